//! Banded LU factorization without pivoting.
//!
//! The implicit L1 stepping produces matrices `γI − A_h − C` that are strictly
//! diagonally dominant for `a > 0`, `c ≤ γ`-ish reaction sizes, so pivoting is
//! unnecessary; a pivot-magnitude check guards the edge cases. Fill stays
//! inside the original bands.

use crate::error::{Error, Result};

/// Square banded matrix with `kl` sub- and `ku` superdiagonals. Entry `(i,j)`
/// is stored iff `j−ku ≤ i ≤ j+kl`.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column-contiguous band storage: `(i,j)` at `j·(kl+ku+1) + (i−j+ku)`.
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(i + self.ku >= j && j + self.kl >= i, "({i},{j}) outside band");
        j * (self.kl + self.ku + 1) + (i + self.ku - j)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// In-place LU without pivoting. The factored form keeps `L`'s multipliers
    /// in the subdiagonal band and `U` in the diagonal/superdiagonal bands.
    pub fn factorize(mut self) -> Result<BandedLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let pivot = self.get(k, k);
            if pivot.abs() < 1e-300 {
                return Err(Error::SingularSystem { row: k, pivot });
            }
            let i_max = (k + kl).min(n - 1);
            for i in k + 1..=i_max {
                let m = self.get(i, k) / pivot;
                self.set(i, k, m);
                if m != 0.0 {
                    let j_max = (k + ku).min(n - 1);
                    for j in k + 1..=j_max {
                        let v = self.get(k, j);
                        if v != 0.0 {
                            self.add(i, j, -m * v);
                        }
                    }
                }
            }
        }
        Ok(BandedLu(self))
    }
}

/// Factored banded system ready for repeated right-hand sides.
#[derive(Debug, Clone)]
pub struct BandedLu(BandedMatrix);

impl BandedLu {
    /// Solves `A x = b` in place.
    pub fn solve_into(&self, b: &mut [f64]) {
        let m = &self.0;
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        assert_eq!(b.len(), n);
        // Forward: apply L (unit diagonal).
        for k in 0..n {
            let bk = b[k];
            if bk != 0.0 {
                let i_max = (k + kl).min(n - 1);
                for i in k + 1..=i_max {
                    b[i] -= m.get(i, k) * bk;
                }
            }
        }
        // Backward: solve U x = y.
        for k in (0..n).rev() {
            let j_max = (k + ku).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=j_max {
                acc -= m.get(k, j) * b[j];
            }
            b[k] = acc / m.get(k, k);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn solves_a_tridiagonal_system() {
        // [2 1 0; 1 2 1; 0 1 2] x = [4, 7, 6] → x = [1, 2, 2].
        let mut a = BandedMatrix::zeros(3, 1, 1);
        for i in 0..3 {
            a.set(i, i, 2.0);
        }
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 2, 1.0);
        a.set(2, 1, 1.0);
        let lu = a.factorize().unwrap();
        let mut b = vec![4.0, 7.0, 6.0];
        lu.solve_into(&mut b);
        assert_abs_diff_eq!(b[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn reproduces_a_random_banded_product() {
        // Build a diagonally dominant banded matrix, multiply a known vector,
        // and recover it.
        let n = 40;
        let (kl, ku) = (3, 2);
        let mut a = BandedMatrix::zeros(n, kl, ku);
        let mut state = 12345u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            let mut off_sum = 0.0;
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                if j != i {
                    let v = rnd();
                    a.set(i, j, v);
                    off_sum += v.abs();
                }
            }
            a.set(i, i, off_sum + 1.0);
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                b[i] += a.get(i, j) * x_true[j];
            }
        }
        let lu = a.factorize().unwrap();
        lu.solve_into(&mut b);
        for i in 0..n {
            assert_abs_diff_eq!(b[i], x_true[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = BandedMatrix::zeros(3, 1, 1);
        assert!(matches!(
            a.factorize(),
            Err(Error::SingularSystem { row: 0, .. })
        ));
    }
}
