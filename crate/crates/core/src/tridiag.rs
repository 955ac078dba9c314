//! Thomas algorithm for complex tridiagonal systems.
//!
//! The system is
//!
//! ```text
//! diag[0]  sup[0]                         x[0]     rhs[0]
//! sub[1]   diag[1]  sup[1]                x[1]     rhs[1]
//!          ...      ...      ...       ·  ...   =  ...
//!                   sub[n-1] diag[n-1]    x[n-1]   rhs[n-1]
//! ```
//!
//! `sub[0]` and `sup[n-1]` are ignored. No pivoting is done; the
//! Crank-Nicolson matrix is diagonally dominant so elimination is stable.

use num_complex::Complex64;

use crate::error::{Error, Result};

const PIVOT_FLOOR: f64 = 1e-300;

/// LU factors of a fixed tridiagonal matrix, reused across right-hand sides.
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    sub: Vec<Complex64>,
    // sup[i] / pivot[i]
    sup_scaled: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
}

impl ThomasFactor {
    pub fn new(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        assert!(sub.len() == n && sup.len() == n, "tridiagonal bands must have equal length");
        let mut sup_scaled = vec![Complex64::new(0.0, 0.0); n];
        let mut inv_pivot = vec![Complex64::new(0.0, 0.0); n];

        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let pivot = if i == 0 { diag[0] } else { diag[i] - sub[i] * prev };
            if !(pivot.norm() > PIVOT_FLOOR) || !pivot.re.is_finite() || !pivot.im.is_finite() {
                return Err(Error::SolverBreakdown { row: i });
            }
            inv_pivot[i] = pivot.inv();
            sup_scaled[i] = sup[i] * inv_pivot[i];
            prev = sup_scaled[i];
        }
        Ok(Self { sub: sub.to_vec(), sup_scaled, inv_pivot })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        // Forward sweep
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.sub[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        // Back substitution
        for i in (0..n - 1).rev() {
            rhs[i] -= self.sup_scaled[i] * rhs[i + 1];
        }
    }
}

/// One-shot solve of `A x = rhs`.
pub fn solve_tridiagonal(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let factor = ThomasFactor::new(sub, diag, sup)?;
    let mut x = rhs.to_vec();
    factor.solve_in_place(&mut x);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn apply(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut y = diag[i] * x[i];
                if i > 0 {
                    y += sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    y += sup[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    #[test]
    fn solves_small_system() {
        let sub = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let diag = [c(4.0, 0.0), c(4.0, 0.0), c(4.0, 0.0)];
        let sup = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let rhs = [c(5.0, 0.0), c(6.0, 0.0), c(5.0, 0.0)];
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for xi in x {
            assert!((xi - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let z = c(0.0, 0.0);
        let err = solve_tridiagonal(&[z, z], &[z, c(1.0, 0.0)], &[z, z], &[z, z]).unwrap_err();
        assert_eq!(err, Error::SolverBreakdown { row: 0 });
    }

    proptest! {
        #[test]
        fn residual_is_small(
            entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 3..60)
        ) {
            let n = entries.len();
            let sub: Vec<_> = entries.iter().map(|e| c(e.0, e.1)).collect();
            let sup: Vec<_> = entries.iter().map(|e| c(e.1, -e.0)).collect();
            // Strict diagonal dominance.
            let diag: Vec<_> = entries.iter().map(|e| c(3.0 + e.2.abs(), e.3)).collect();
            let rhs: Vec<_> = entries.iter().map(|e| c(e.4, e.2)).collect();
            let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
            let back = apply(&sub, &diag, &sup, &x);
            for i in 0..n {
                prop_assert!((back[i] - rhs[i]).norm() < 1e-12);
            }
        }
    }
}
