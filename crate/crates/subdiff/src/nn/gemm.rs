//! Single entry point for dense matrix products.
//!
//! Wraps `faer`'s sequential matmul and, on x86-64, issues `vzeroupper`
//! afterwards: the AVX-512 kernels leave the upper ZMM state dirty, which
//! stalls every subsequent scalar SSE instruction (notably libm's `exp` in
//! the activation loops) by an order of magnitude until the state is cleared.

use faer::linalg::matmul::matmul;
use faer::mat::{MatMut, MatRef};
use faer::{Accum, Par};

#[inline]
pub(crate) fn gemm(dst: MatMut<'_, f64>, accum: Accum, lhs: MatRef<'_, f64>, rhs: MatRef<'_, f64>) {
    matmul(dst, accum, lhs, rhs, 1.0, Par::Seq);
    clear_upper_simd_state();
}

#[inline]
fn clear_upper_simd_state() {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx") {
            // Safe operation: only zeroes the upper halves of the vector
            // registers, which hold no live values across this call boundary.
            unsafe { vzeroupper() }
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx")]
unsafe fn vzeroupper() {
    std::arch::x86_64::_mm256_zeroupper();
}
