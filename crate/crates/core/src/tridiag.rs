//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! lowest eigenvalues and shifted inverse iteration for the ground state.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored as its diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

const PIVOT_GUARD: f64 = 1e-300;

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(
            off.len() + 1,
            diag.len(),
            "off-diagonal must have n - 1 entries"
        );
        SymTridiag { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (negative pivots of the
    /// LDLᵀ factorization of `T - x I`).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let coupling = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1] / q
            };
            q = self.diag[i] - x - coupling;
            if q == 0.0 {
                q = -PIVOT_GUARD;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues in ascending order, each bracketed by
    /// bisection to width `tol`.
    pub fn lowest_eigenvalues(&self, k: usize, tol: f64) -> Vec<f64> {
        let k = k.min(self.len());
        let (glo, ghi) = self.gershgorin();
        let mut out = Vec::with_capacity(k);
        let mut floor = glo;
        for j in 0..k {
            let mut a = floor;
            let mut b = ghi;
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if self.count_below(mid) <= j {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let value = 0.5 * (a + b);
            out.push(value);
            floor = a;
        }
        out
    }

    /// Solves `(T - shift I) y = rhs`, assuming the shifted matrix is
    /// positive definite. Returns `None` if a nonpositive pivot appears.
    fn solve_shifted_spd(&self, shift: f64, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        let mut pivots = vec![0.0; n];
        let mut z = vec![0.0; n];
        for i in 0..n {
            let (coupling, carry) = if i == 0 {
                (0.0, 0.0)
            } else {
                let l = self.off[i - 1] / pivots[i - 1];
                (l * self.off[i - 1], l * z[i - 1])
            };
            pivots[i] = self.diag[i] - shift - coupling;
            if pivots[i] <= 0.0 || !pivots[i].is_finite() {
                return None;
            }
            z[i] = rhs[i] - carry;
        }
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let next = if i + 1 < n {
                self.off[i] * y[i + 1]
            } else {
                0.0
            };
            y[i] = (z[i] - next) / pivots[i];
        }
        Some(y)
    }

    /// Ground-state eigenvector by inverse iteration with a shift just below
    /// the given lowest eigenvalue. The result has unit Euclidean norm and a
    /// nonnegative sum.
    pub fn ground_state(&self, lowest: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let shift = lowest - 1e-7 * lowest.abs().max(1.0);
        let mut y = vec![1.0 / (n as f64).sqrt(); n];
        let mut trace = Vec::new();
        for _ in 0..60 {
            let next = self
                .solve_shifted_spd(shift, &y)
                .ok_or_else(|| Error::SolverFailure {
                    reason: "shifted matrix is not positive definite; eigenvalue estimate too high"
                        .into(),
                    trace: trace.clone(),
                })?;
            let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
            let sign = if next.iter().sum::<f64>() < 0.0 {
                -1.0
            } else {
                1.0
            };
            let next: Vec<f64> = next.iter().map(|v| sign * v / norm).collect();
            let change = next
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            trace.push(change);
            y = next;
            if change < 1e-13 {
                return Ok(y);
            }
        }
        Err(Error::SolverFailure {
            reason: "inverse iteration did not converge".into(),
            trace,
        })
    }

    /// `y = T x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 50;
        let t = laplacian(n);
        let ev = t.lowest_eigenvalues(5, 1e-12);
        for (j, v) in ev.iter().enumerate() {
            let theta = (j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let exact = 2.0 - 2.0 * theta.cos();
            assert!((v - exact).abs() < 1e-11, "j={j}: {v} vs {exact}");
        }
    }

    #[test]
    fn counts_on_two_by_two() {
        // eigenvalues 2 ± 1
        let t = SymTridiag::new(vec![2.0, 2.0], vec![-1.0]);
        assert_eq!(t.count_below(0.5), 0);
        assert_eq!(t.count_below(2.0), 1);
        assert_eq!(t.count_below(3.5), 2);
    }

    #[test]
    fn ground_state_of_laplacian_is_sine() {
        let n = 40;
        let t = laplacian(n);
        let lam = t.lowest_eigenvalues(1, 1e-13)[0];
        let v = t.ground_state(lam).unwrap();
        let norm: f64 = (1..=n)
            .map(|i| {
                (i as f64 * std::f64::consts::PI / (n + 1) as f64)
                    .sin()
                    .powi(2)
            })
            .sum::<f64>()
            .sqrt();
        for (i, vi) in v.iter().enumerate() {
            let exact = ((i + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).sin() / norm;
            assert!((vi - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn overestimated_eigenvalue_is_rejected() {
        let t = laplacian(10);
        let lam = t.lowest_eigenvalues(2, 1e-12)[1];
        assert!(matches!(
            t.ground_state(lam),
            Err(Error::SolverFailure { .. })
        ));
    }

    proptest! {
        #[test]
        fn eigenvalues_satisfy_residual_and_order(diag in prop::collection::vec(-5.0f64..5.0, 4..30), seed in 0.1f64..2.0) {
            let n = diag.len();
            let off: Vec<f64> = (0..n - 1).map(|i| -seed * (1.0 + (i % 3) as f64)).collect();
            let t = SymTridiag::new(diag, off);
            let ev = t.lowest_eigenvalues(3, 1e-12);
            for w in ev.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-12);
            }
            let v = t.ground_state(ev[0]).unwrap();
            let tv = t.apply(&v);
            let res = tv.iter().zip(&v).map(|(a, b)| (a - ev[0] * b).abs()).fold(0.0, f64::max);
            prop_assert!(res < 1e-8, "residual {res}");
            // nonzero off-diagonals: ground state has one sign
            prop_assert!(v.iter().all(|x| *x > -1e-12));
        }
    }
}
