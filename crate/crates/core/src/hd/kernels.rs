//! Hot loops with runtime CPU feature dispatch.
//!
//! Each kernel is written once as portable Rust and compiled a second time
//! under wider target features; LLVM vectorizes the wide copy. Results are
//! identical on every path since all arithmetic is integer.

#[inline(always)]
fn hamming_portable(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

#[inline(always)]
fn hamming_rows_portable(query: &[u64], rows: &[u64], out: &mut [u32]) {
    let w = query.len();
    for (row, d) in rows.chunks_exact(w).zip(out.iter_mut()) {
        *d = hamming_portable(query, row);
    }
}

#[inline(always)]
fn signed_add_portable(acc: &mut [i8], id: &[i8], mask: &[i8]) {
    for ((a, &x), &m) in acc.iter_mut().zip(id).zip(mask) {
        *a = a.wrapping_add((x ^ m).wrapping_sub(m));
    }
}

#[inline(always)]
fn widen_add_portable(acc: &mut [i32], part: &[i8]) {
    for (a, &p) in acc.iter_mut().zip(part) {
        *a += p as i32;
    }
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    #[target_feature(enable = "avx512f,avx512bw,avx512vpopcntdq,popcnt")]
    pub unsafe fn hamming_rows_avx512(query: &[u64], rows: &[u64], out: &mut [u32]) {
        super::hamming_rows_portable(query, rows, out)
    }

    #[target_feature(enable = "avx2,popcnt")]
    pub unsafe fn hamming_rows_avx2(query: &[u64], rows: &[u64], out: &mut [u32]) {
        super::hamming_rows_portable(query, rows, out)
    }

    #[target_feature(enable = "popcnt")]
    pub unsafe fn hamming_popcnt(a: &[u64], b: &[u64]) -> u32 {
        super::hamming_portable(a, b)
    }

    #[target_feature(enable = "avx512f,avx512bw")]
    pub unsafe fn signed_add_avx512(acc: &mut [i8], id: &[i8], mask: &[i8]) {
        super::signed_add_portable(acc, id, mask)
    }

    #[target_feature(enable = "avx2")]
    pub unsafe fn signed_add_avx2(acc: &mut [i8], id: &[i8], mask: &[i8]) {
        super::signed_add_portable(acc, id, mask)
    }

    #[target_feature(enable = "avx2")]
    pub unsafe fn widen_add_avx2(acc: &mut [i32], part: &[i8]) {
        super::widen_add_portable(acc, part)
    }

    pub fn has_avx512() -> bool {
        is_x86_feature_detected!("avx512f") && is_x86_feature_detected!("avx512bw") && is_x86_feature_detected!("avx512vpopcntdq")
    }
}

/// Number of differing bits between two packed vectors.
pub fn hamming(a: &[u64], b: &[u64]) -> u32 {
    debug_assert_eq!(a.len(), b.len());
    #[cfg(target_arch = "x86_64")]
    if is_x86_feature_detected!("popcnt") {
        return unsafe { x86::hamming_popcnt(a, b) };
    }
    hamming_portable(a, b)
}

/// Hamming distance from `query` to each row of the row-major matrix `rows`.
pub fn hamming_rows(query: &[u64], rows: &[u64], out: &mut [u32]) {
    assert_eq!(rows.len(), query.len() * out.len());
    #[cfg(target_arch = "x86_64")]
    {
        if x86::has_avx512() {
            return unsafe { x86::hamming_rows_avx512(query, rows, out) };
        }
        if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("popcnt") {
            return unsafe { x86::hamming_rows_avx2(query, rows, out) };
        }
    }
    hamming_rows_portable(query, rows, out)
}

/// `acc[d] += mask[d] == 0 ? id[d] : -id[d]`, wrapping in `i8`.
///
/// `mask` holds 0 for a +1 component and -1 for a -1 component.
pub fn signed_add(acc: &mut [i8], id: &[i8], mask: &[i8]) {
    assert!(acc.len() == id.len() && id.len() == mask.len());
    #[cfg(target_arch = "x86_64")]
    {
        if is_x86_feature_detected!("avx512f") && is_x86_feature_detected!("avx512bw") {
            return unsafe { x86::signed_add_avx512(acc, id, mask) };
        }
        if is_x86_feature_detected!("avx2") {
            return unsafe { x86::signed_add_avx2(acc, id, mask) };
        }
    }
    signed_add_portable(acc, id, mask)
}

pub fn widen_add(acc: &mut [i32], part: &[i8]) {
    assert_eq!(acc.len(), part.len());
    #[cfg(target_arch = "x86_64")]
    if is_x86_feature_detected!("avx2") {
        return unsafe { x86::widen_add_avx2(acc, part) };
    }
    widen_add_portable(acc, part)
}
