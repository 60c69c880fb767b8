//! Vector kernels with a fixed reduction order, so identical inputs give
//! bit-identical results.

/// Dot product with eight independent accumulators. The summation order is
/// fixed; the unrolling only exposes instruction-level parallelism.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let split = a.len() - a.len() % 8;
    let (a8, a_tail) = a.split_at(split);
    let (b8, b_tail) = b.split_at(split);
    for (ca, cb) in a8.chunks_exact(8).zip(b8.chunks_exact(8)) {
        for lane in 0..8 {
            acc[lane] += ca[lane] * cb[lane];
        }
    }
    let mut tail = 0.0;
    for (x, y) in a_tail.iter().zip(b_tail) {
        tail += x * y;
    }
    (((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]))) + tail
}

#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    crate::math::sqrt(dot(v, v))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
