//! Small matrix kernels shaped so that the inner loops run over contiguous
//! memory and vectorize.

use crate::real::Real;

const LANES: usize = 8;

#[inline]
pub(crate) fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Dot product with a fixed lane split, so the summation order does not
/// depend on the target's vector width.
#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..LANES {
            acc[l] += x[l] * y[l];
        }
    }
    let mut s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    for (&x, &y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// `c[m×n] += a[m×k] · b[k×n]`
pub(crate) fn matmul_acc<T: Real>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    for (crow, arow) in c.chunks_exact_mut(n).zip(a.chunks_exact(k)) {
        for (&aip, brow) in arow.iter().zip(b.chunks_exact(n)) {
            axpy(aip, brow, crow);
        }
    }
}

/// `c[m×n] += aᵀ · b` with `a` stored as `[k×m]` and `b` as `[k×n]`.
pub(crate) fn matmul_at_b<T: Real>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), k * m);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    for (i, crow) in c.chunks_exact_mut(n).enumerate() {
        for (p, brow) in b.chunks_exact(n).enumerate() {
            axpy(a[p * m + i], brow, crow);
        }
    }
}

/// `c[m×n] += a · bᵀ` with `a` stored as `[m×k]` and `b` as `[n×k]`.
pub(crate) fn matmul_a_bt<T: Real>(a: &[T], b: &[T], c: &mut [T], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(c.len(), m * n);
    for (crow, arow) in c.chunks_exact_mut(n).zip(a.chunks_exact(k)) {
        for (cij, brow) in crow.iter_mut().zip(b.chunks_exact(k)) {
            *cij += dot(arow, brow);
        }
    }
}
