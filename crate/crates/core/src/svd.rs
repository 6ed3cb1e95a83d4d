//! Full and truncated singular value decompositions.
//!
//! `full_svd` delegates to nalgebra's Golub–Kahan bidiagonalization with
//! implicit QR. `truncated_svd` is a randomized subspace iteration: a
//! Gaussian start block of width `k + 8` is pushed through alternating
//! products with `A` and `Aᵀ`, and Rayleigh–Ritz on the projected matrix
//! gives the leading triples. Iteration stops when the leading `k` values
//! move by less than `tol·σ₁` between sweeps and the Ritz residual
//! `‖A V − U diag(s)‖_F` is below `tol·‖A‖_F`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::SeededRng;

/// Largest `min(rows, cols)` accepted by [`full_svd`].
pub const FULL_SVD_LIMIT: usize = 2048;
/// Below this `min(rows, cols)` a dense SVD is cheaper than subspace
/// iteration for the spectra seen here, so low-rank routines use it directly.
pub const DENSE_CROSSOVER: usize = 256;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 300;
/// Extra columns carried by the subspace iteration beyond the requested rank.
pub const OVERSAMPLE: usize = 8;

/// `a ≈ u · diag(s) · vᵀ` with `s` non-increasing.
#[derive(Clone, Debug)]
pub struct SvdTriple {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdTriple {
    /// The `k` leading singular triplets.
    pub fn leading(&self, k: usize) -> SvdTriple {
        let k = k.min(self.s.len());
        let take = |m: &DenseMatrix| {
            let data = (0..m.rows()).flat_map(|i| m.row(i)[..k].iter().copied()).collect();
            DenseMatrix::from_raw(m.rows(), k, data)
        };
        SvdTriple {
            u: take(&self.u),
            s: self.s[..k].to_vec(),
            v: take(&self.v),
        }
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `u · diag(weights) · vᵀ` for a replacement spectrum.
    pub fn compose_with(&self, weights: &[f64]) -> DenseMatrix {
        assert_eq!(weights.len(), self.s.len());
        let (m, n) = (self.u.rows(), self.v.rows());
        let k = weights.len();
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let urow = self.u.row(i);
            let orow = &mut out[i * n..(i + 1) * n];
            for p in 0..k {
                let c = urow[p] * weights[p];
                if c == 0.0 {
                    continue;
                }
                for (j, o) in orow.iter_mut().enumerate() {
                    *o += c * self.v[(j, p)];
                }
            }
        }
        DenseMatrix::from_raw(m, n, out)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.compose_with(&self.s)
    }

    /// Frobenius distance of `uᵀu` and `vᵀv` from the identity (the larger one).
    pub fn orthonormality_error(&self) -> f64 {
        let k = self.s.len();
        let id = DenseMatrix::identity(k);
        let eu = self.u.t_matmul(&self.u).sub(&id).frobenius_norm();
        let ev = self.v.t_matmul(&self.v).sub(&id).frobenius_norm();
        eu.max(ev)
    }
}

fn nalgebra_svd(a: &DenseMatrix, vectors: bool) -> Result<nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let sweeps = 100 * a.rows().max(a.cols());
    nalgebra::SVD::try_new(a.to_nalgebra(), vectors, vectors, f64::EPSILON, sweeps).ok_or(
        Error::NonConvergence {
            what: "full SVD",
            iterations: sweeps,
        },
    )
}

fn check_full_limit(a: &DenseMatrix) -> Result<()> {
    let dim = a.rows().min(a.cols());
    if dim > FULL_SVD_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: FULL_SVD_LIMIT,
        });
    }
    Ok(())
}

/// Complete decomposition with `k = min(rows, cols)`.
pub fn full_svd(a: &DenseMatrix) -> Result<SvdTriple> {
    check_full_limit(a)?;
    let svd = nalgebra_svd(a, true)?;
    let u = DenseMatrix::from_nalgebra(svd.u.as_ref().expect("u requested"));
    let v = DenseMatrix::from_nalgebra(&svd.v_t.as_ref().expect("v requested").transpose());
    let s = svd.singular_values.iter().map(|x| x.max(0.0)).collect();
    Ok(SvdTriple { u, s, v })
}

/// Singular values only, non-increasing.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_full_limit(a)?;
    let svd = nalgebra_svd(a, false)?;
    let mut s: Vec<f64> = svd.singular_values.iter().map(|x| x.max(0.0)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

pub fn nuclear_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// Number of singular values above `rel · σ₁`.
pub fn numerical_rank_of(s: &[f64], rel: f64) -> usize {
    match s.first() {
        Some(&s1) if s1 > 0.0 => s.iter().filter(|&&x| x > rel * s1).count(),
        _ => 0,
    }
}

pub fn numerical_rank(a: &DenseMatrix, rel: f64) -> Result<usize> {
    Ok(numerical_rank_of(&singular_values(a)?, rel))
}

/// Orthonormal basis for the column span of `y` (thin Householder Q).
/// Nuclear norm of `u vᵀ` for tall factors `u` (m×r) and `v` (n×r), from
/// the r×r core `R_u R_vᵀ` of their thin QR factorizations.
pub fn product_nuclear_norm(u: &DenseMatrix, v: &DenseMatrix) -> Result<f64> {
    if u.cols() != v.cols() {
        return Err(Error::ShapeMismatch {
            left: u.shape(),
            right: v.shape(),
        });
    }
    let ru = nalgebra::QR::new(u.to_nalgebra()).r();
    let rv = nalgebra::QR::new(v.to_nalgebra()).r();
    let core = DenseMatrix::from_nalgebra(&(ru * rv.transpose()));
    nuclear_norm(&core)
}

fn orthonormalize(y: &DenseMatrix) -> DenseMatrix {
    let qr = nalgebra::QR::new(y.to_nalgebra());
    DenseMatrix::from_nalgebra(&qr.q())
}

fn gaussian_block(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = SeededRng::new(seed);
    let data = (0..rows * cols).map(|_| rng.gaussian()).collect();
    DenseMatrix::from_raw(rows, cols, data)
}

fn validate_rank(a: &DenseMatrix, k: usize) -> Result<()> {
    let max = a.rows().min(a.cols());
    if k == 0 || k > max {
        return Err(Error::InvalidRank { k, max });
    }
    Ok(())
}

/// Leading `k` singular triples by randomized subspace iteration.
///
/// The start block is drawn from `seed`, so results are reproducible.
pub fn truncated_svd(a: &DenseMatrix, k: usize, tol: f64, max_iter: usize, seed: u64) -> Result<SvdTriple> {
    validate_rank(a, k)?;
    let width = (k + OVERSAMPLE).min(a.rows().min(a.cols()));
    let omega = gaussian_block(a.cols(), width, seed);
    subspace_iteration(a, k, tol, max_iter, omega)
}

/// As [`truncated_svd`], seeding the right subspace with the columns of
/// `start` (n × j). Missing columns up to `k + 8` are filled from `seed`.
pub fn truncated_svd_warm(
    a: &DenseMatrix,
    k: usize,
    tol: f64,
    max_iter: usize,
    start: &DenseMatrix,
    seed: u64,
) -> Result<SvdTriple> {
    validate_rank(a, k)?;
    if start.rows() != a.cols() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: start.shape(),
        });
    }
    let width = (k + OVERSAMPLE).min(a.rows().min(a.cols()));
    let fill = gaussian_block(a.cols(), width, seed);
    let take = start.cols().min(width);
    let omega = DenseMatrix::from_fn(a.cols(), width, |i, j| {
        if j < take {
            start[(i, j)]
        } else {
            fill[(i, j)]
        }
    })?;
    subspace_iteration(a, k, tol, max_iter, omega)
}

fn subspace_iteration(a: &DenseMatrix, k: usize, tol: f64, max_iter: usize, omega: DenseMatrix) -> Result<SvdTriple> {
    let (m, n) = a.shape();
    let a_norm = a.frobenius_norm();
    if a_norm == 0.0 {
        let u = DenseMatrix::from_fn(m, k, |i, j| if i == j { 1.0 } else { 0.0 })?;
        let v = DenseMatrix::from_fn(n, k, |i, j| if i == j { 1.0 } else { 0.0 })?;
        return Ok(SvdTriple { u, s: vec![0.0; k], v });
    }

    let mut q = orthonormalize(&a.matmul(&omega));
    let mut prev: Option<Vec<f64>> = None;
    for _ in 0..max_iter.max(1) {
        // Bᵀ = Aᵀ Q; its SVD Bᵀ = V̂ Σ Ûᵀ gives A ≈ (Q Û) Σ V̂ᵀ.
        let bt = a.t_matmul(&q);
        let small = full_svd(&bt)?;
        let s: Vec<f64> = small.s[..k].to_vec();

        let sigma_stable = prev.as_ref().is_some_and(|p| {
            let scale = s[0].max(f64::MIN_POSITIVE);
            s.iter().zip(p).all(|(x, y)| (x - y).abs() <= tol * scale)
        });
        if sigma_stable {
            let u = q.matmul(&small.v);
            let v_k = take_cols(&small.u, k);
            let u_k = take_cols(&u, k);
            let mut resid = a.matmul(&v_k);
            for i in 0..m {
                for j in 0..k {
                    resid[(i, j)] -= u_k[(i, j)] * s[j];
                }
            }
            if resid.frobenius_norm() <= tol * a_norm {
                return Ok(SvdTriple { u: u_k, s, v: v_k });
            }
        }
        prev = Some(s);
        q = orthonormalize(&a.matmul(&small.u));
    }
    Err(Error::NonConvergence {
        what: "truncated SVD",
        iterations: max_iter,
    })
}

fn take_cols(a: &DenseMatrix, k: usize) -> DenseMatrix {
    let data = (0..a.rows()).flat_map(|i| a.row(i)[..k].iter().copied()).collect();
    DenseMatrix::from_raw(a.rows(), k, data)
}

/// Leading singular pair `(u, σ₁, v)`.
pub fn top_singular_pair(a: &DenseMatrix, tol: f64, max_iter: usize, seed: u64) -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let t = truncated_svd(a, 1, tol, max_iter, seed)?;
    Ok((t.u.col(0), t.s[0], t.v.col(0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random(m: usize, n: usize, seed: u64) -> DenseMatrix {
        gaussian_block(m, n, seed)
    }

    #[test]
    fn truncated_diag() {
        let a = DenseMatrix::from_diag(&[5.0, 3.0, 1.0]).unwrap();
        let t = truncated_svd(&a, 2, DEFAULT_TOL, DEFAULT_MAX_ITER, 1).unwrap();
        assert!((t.s[0] - 5.0).abs() < 1e-12 && (t.s[1] - 3.0).abs() < 1e-12);
        // vectors up to sign
        assert!((t.u[(0, 0)].abs() - 1.0).abs() < 1e-10);
        assert!((t.v[(1, 1)].abs() - 1.0).abs() < 1e-10);
        assert!(t.orthonormality_error() < 1e-8);
    }

    #[test]
    fn truncated_rank_one() {
        let a = DenseMatrix::outer(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 2.0);
        let t = truncated_svd(&a, 1, DEFAULT_TOL, DEFAULT_MAX_ITER, 3).unwrap();
        assert!((t.s[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_matches_full_prefix() {
        let a = random(50, 40, 11);
        let full = full_svd(&a).unwrap();
        let t = truncated_svd(&a, 5, DEFAULT_TOL, DEFAULT_MAX_ITER, 5).unwrap();
        for i in 0..5 {
            assert!((t.s[i] - full.s[i]).abs() <= 1e-8 * full.s[i], "{i}: {} vs {}", t.s[i], full.s[i]);
        }
        let resid = a.matmul(&t.v).sub(&t.u.matmul(&DenseMatrix::from_diag(&t.s).unwrap()));
        assert!(resid.frobenius_norm() <= DEFAULT_TOL * a.frobenius_norm());
        assert!(t.orthonormality_error() < 1e-8);
    }

    #[test]
    fn truncated_is_deterministic() {
        let a = random(20, 30, 2);
        let x = truncated_svd(&a, 3, 1e-9, 300, 99).unwrap();
        let y = truncated_svd(&a, 3, 1e-9, 300, 99).unwrap();
        assert_eq!(x.u, y.u);
        assert_eq!(x.s, y.s);
    }

    #[test]
    fn truncated_reports_nonconvergence() {
        let a = random(40, 40, 4);
        assert!(matches!(
            truncated_svd(&a, 3, 1e-15, 2, 1),
            Err(Error::NonConvergence { .. })
        ));
        assert!(matches!(truncated_svd(&a, 0, 1e-9, 2, 1), Err(Error::InvalidRank { .. })));
        assert!(matches!(truncated_svd(&a, 41, 1e-9, 2, 1), Err(Error::InvalidRank { .. })));
    }

    #[test]
    fn warm_start_agrees() {
        let a = random(30, 25, 8);
        let cold = truncated_svd(&a, 4, 1e-10, 300, 1).unwrap();
        let warm = truncated_svd_warm(&a, 4, 1e-10, 300, &cold.v, 2).unwrap();
        for (x, y) in cold.s.iter().zip(&warm.s) {
            assert!((x - y).abs() < 1e-8 * cold.s[0]);
        }
    }

    #[test]
    fn full_identity_and_zero() {
        let t = full_svd(&DenseMatrix::identity(3)).unwrap();
        assert!(t.s.iter().all(|s| (s - 1.0).abs() < 1e-14));
        let z = full_svd(&DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(z.s, vec![0.0, 0.0]);
        assert!(z.orthonormality_error() < 1e-8);
    }

    #[test]
    fn full_swap_matrix() {
        // aᵀa = I, so both singular values are 1.
        let a = DenseMatrix::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let t = full_svd(&a).unwrap();
        assert!((t.s[0] - 1.0).abs() < 1e-14 && (t.s[1] - 1.0).abs() < 1e-14);
        assert!(t.reconstruct().sub(&a).frobenius_norm() < 1e-12);
    }

    #[test]
    fn full_reconstructs_rectangular() {
        for (m, n) in [(7, 3), (3, 7), (12, 12)] {
            let a = random(m, n, (m * n) as u64);
            let t = full_svd(&a).unwrap();
            assert_eq!(t.rank(), m.min(n));
            assert!(t.s.windows(2).all(|w| w[0] >= w[1]));
            let err = t.reconstruct().sub(&a).frobenius_norm();
            assert!(err <= 1e-10 * a.frobenius_norm().max(1.0));
            assert!(t.orthonormality_error() < 1e-8);
        }
    }

    #[test]
    fn top_pair_examples() {
        let (u, s, v) = top_singular_pair(&DenseMatrix::from_diag(&[4.0, 2.0]).unwrap(), 1e-9, 300, 0).unwrap();
        assert!((s - 4.0).abs() < 1e-12);
        assert!((u[0].abs() - 1.0).abs() < 1e-9 && (v[0].abs() - 1.0).abs() < 1e-9);

        let ones = DenseMatrix::new(2, 2, vec![1.0; 4]).unwrap();
        let (u, s, v) = top_singular_pair(&ones, 1e-9, 300, 0).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((s - 2.0).abs() < 1e-12);
        assert!((u[0].abs() - h).abs() < 1e-9 && (u[1].abs() - h).abs() < 1e-9);
        assert!((v[0].abs() - h).abs() < 1e-9 && (v[1].abs() - h).abs() < 1e-9);

        let a = random(30, 30, 77);
        let full = full_svd(&a).unwrap();
        let (_, s, _) = top_singular_pair(&a, 1e-9, 300, 5).unwrap();
        assert!((s - full.s[0]).abs() <= 1e-8 * full.s[0]);
    }

    #[test]
    fn rank_counts() {
        let a = DenseMatrix::from_diag(&[3.0, 1e-10, 0.0]).unwrap();
        assert_eq!(numerical_rank(&a, 1e-8).unwrap(), 1);
        assert_eq!(nuclear_norm(&DenseMatrix::from_diag(&[2.0, -1.0]).unwrap()).unwrap(), 3.0);
    }
}
