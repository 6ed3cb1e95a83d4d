//! Seeded synthetic robust-PCA instances.
//!
//! All draws come from one [`SeededRng`] stream per instance, consumed in a
//! fixed order: the entries of `U` (row-major), then `V`, then the noise
//! matrix, then the sparsity mask. The same spec therefore produces the same
//! matrices bit-for-bit on every platform.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::oracles::Regularizer;
use crate::problem::ProblemSpec;
use crate::rng::SeededRng;
use crate::svd;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    /// `L = scale·U Vᵀ` with standard Gaussian factors, `S = scale·N` kept
    /// entrywise with probability `p`.
    Sec5,
    /// `X* = U Vᵀ` with `N(0, 1/n)` factors; `Y*` entries are `±1` with
    /// probability `p/2` each and 0 otherwise. Bounds use the ℓ_{1+δ} norm.
    Table2,
    /// [`InstanceKind::Sec5`] recipe, carrying the certificate `f* = 0`.
    KnownOptimum,
}

impl InstanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceKind::Sec5 => "sec5",
            InstanceKind::Table2 => "table2",
            InstanceKind::KnownOptimum => "known-optimum",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "sec5" => Some(InstanceKind::Sec5),
            "table2" => Some(InstanceKind::Table2),
            "known-optimum" | "knownoptimum" => Some(InstanceKind::KnownOptimum),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    /// Probability that an entry of the sparse part is nonzero.
    pub p: f64,
    pub scale: f64,
    /// ℓ_{1+δ} exponent offset for [`InstanceKind::Table2`].
    pub delta: Option<f64>,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn sec5(m: usize, n: usize, r: usize, p: f64, seed: u64) -> Self {
        Self {
            kind: InstanceKind::Sec5,
            m,
            n,
            r,
            p,
            scale: 10.0,
            delta: None,
            seed,
        }
    }

    pub fn known_optimum(m: usize, n: usize, r: usize, p: f64, seed: u64) -> Self {
        Self {
            kind: InstanceKind::KnownOptimum,
            ..Self::sec5(m, n, r, p, seed)
        }
    }

    pub fn table2(n: usize, r: usize, delta: f64, seed: u64) -> Self {
        Self {
            kind: InstanceKind::Table2,
            m: n,
            n,
            r,
            p: 0.1,
            scale: 1.0,
            delta: Some(delta),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::EmptyDimension {
                rows: self.m,
                cols: self.n,
            });
        }
        let max = self.m.min(self.n);
        if self.r == 0 || self.r > max {
            return Err(Error::InvalidRank { k: self.r, max });
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidConstants("sparsity frequency must lie in (0, 1)"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidConstants("scale must be positive"));
        }
        if self.kind == InstanceKind::Table2 {
            match self.delta {
                Some(d) if d > 0.0 && d <= 1.0 => {}
                _ => return Err(Error::InvalidConstants("table2 instances need delta in (0, 1]")),
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    /// `l_true + s_true`, computed entrywise in floating point.
    pub m_data: DenseMatrix,
    pub l_true: DenseMatrix,
    pub s_true: DenseMatrix,
    /// Nuclear norm of `l_true`.
    pub tau: f64,
    /// `‖s_true‖₁`, or `‖s_true‖_{1+δ}` for table-2 instances.
    pub s_bound: f64,
    /// Optimal value when known by construction.
    pub f_star: Option<f64>,
}

impl Instance {
    /// Problem with the exact bounds: nuclear ball of radius `tau` on `X`,
    /// ℓ1 (or ℓ_{1+δ}) ball of radius `s_bound` on `Y`.
    pub fn problem(&self, rank_cap: Option<usize>) -> Result<ProblemSpec> {
        let reg_y = match (self.spec.kind, self.spec.delta) {
            (InstanceKind::Table2, Some(d)) => Regularizer::LpBall {
                p: 1.0 + d,
                s: self.s_bound,
            },
            _ => Regularizer::L1Ball { s: self.s_bound },
        };
        ProblemSpec::new(
            self.m_data.clone(),
            Regularizer::NuclearBall {
                tau: self.tau,
                rank_cap,
            },
            reg_y,
        )
    }

    /// `(‖x − L‖²_F/‖L‖²_F, ‖y − S‖²_F/‖S‖²_F)`.
    pub fn relative_errors(&self, x: &DenseMatrix, y: &DenseMatrix) -> (f64, f64) {
        (relative_error_sq(x, &self.l_true), relative_error_sq(y, &self.s_true))
    }
}

/// `‖a − b‖²_F / ‖b‖²_F`.
pub fn relative_error_sq(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).frobenius_norm_sq() / b.frobenius_norm_sq()
}

fn gaussian_matrix(rng: &mut SeededRng, rows: usize, cols: usize, scale: f64) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| scale * rng.gaussian()).expect("positive dimensions")
}

/// Dispatches on `spec.kind`.
pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    match spec.kind {
        InstanceKind::Sec5 => gen_sec5_instance(spec),
        InstanceKind::Table2 => gen_table2_instance(spec),
        InstanceKind::KnownOptimum => gen_known_optimum(spec),
    }
}

pub fn gen_sec5_instance(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let (m, n, r) = (spec.m, spec.n, spec.r);
    let mut rng = SeededRng::new(spec.seed);
    let u = gaussian_matrix(&mut rng, m, r, 1.0);
    let v = gaussian_matrix(&mut rng, n, r, 1.0);
    let noise = gaussian_matrix(&mut rng, m, n, spec.scale);
    let kept = noise
        .as_slice()
        .iter()
        .map(|&x| if rng.bernoulli(spec.p) { x } else { 0.0 })
        .collect();
    let s_true = DenseMatrix::new(m, n, kept)?;
    let l_true = u.matmul(&v.transpose()).scale(spec.scale);
    let s_bound = s_true.l1_norm();
    if s_bound == 0.0 {
        return Err(Error::DegenerateInstance("sparse component is identically zero"));
    }
    let tau = spec.scale * svd::product_nuclear_norm(&u, &v)?;
    Ok(Instance {
        spec: *spec,
        m_data: l_true.add(&s_true),
        l_true,
        s_true,
        tau,
        s_bound,
        f_star: None,
    })
}

pub fn gen_table2_instance(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let delta = spec.delta.expect("validated");
    let (m, n, r) = (spec.m, spec.n, spec.r);
    let mut rng = SeededRng::new(spec.seed);
    let sd = 1.0 / libm::sqrt(n as f64);
    let u = gaussian_matrix(&mut rng, m, r, sd);
    let v = gaussian_matrix(&mut rng, n, r, sd);
    let half = spec.p / 2.0;
    let s_true = DenseMatrix::from_fn(m, n, |_, _| {
        let draw = rng.uniform();
        if draw < half {
            spec.scale
        } else if draw < spec.p {
            -spec.scale
        } else {
            0.0
        }
    })?;
    if s_true.max_abs() == 0.0 {
        return Err(Error::DegenerateInstance("sparse component is identically zero"));
    }
    let l_true = u.matmul(&v.transpose());
    let tau = svd::product_nuclear_norm(&u, &v)?;
    Ok(Instance {
        spec: *spec,
        m_data: l_true.add(&s_true),
        s_bound: s_true.lp_norm(1.0 + delta),
        l_true,
        s_true,
        tau,
        f_star: None,
    })
}

/// Sec5-recipe instance whose ground truth is feasible for its own exact
/// bounds and fits `M` exactly, so `f* = 0`.
pub fn gen_known_optimum(spec: &InstanceSpec) -> Result<Instance> {
    let mut inst = gen_sec5_instance(&InstanceSpec {
        kind: InstanceKind::Sec5,
        ..*spec
    })?;
    inst.spec = *spec;
    inst.f_star = Some(0.0);
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::objective;

    #[test]
    fn sec5_low_rank_part_has_rank_r() {
        let inst = gen_sec5_instance(&InstanceSpec::sec5(100, 100, 5, 0.05, 3)).unwrap();
        assert_eq!(svd::numerical_rank(&inst.l_true, 1e-8).unwrap(), 5);
        assert_eq!(inst.l_true.add(&inst.s_true), inst.m_data);
    }

    #[test]
    fn tau_matches_full_svd() {
        let inst = gen_sec5_instance(&InstanceSpec::sec5(60, 40, 4, 0.1, 9)).unwrap();
        let direct = svd::nuclear_norm(&inst.l_true).unwrap();
        assert!((inst.tau - direct).abs() <= 1e-10 * direct);
        assert!((inst.s_bound - inst.s_true.l1_norm()).abs() <= 1e-10 * inst.s_bound);
    }

    #[test]
    fn degenerate_mask_is_an_error() {
        let err = gen_sec5_instance(&InstanceSpec::sec5(2, 2, 1, 1e-12, 0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateInstance(_)));
    }

    #[test]
    fn known_optimum_has_zero_objective() {
        let inst = gen_known_optimum(&InstanceSpec::known_optimum(20, 20, 3, 0.05, 42)).unwrap();
        let again = gen_known_optimum(&InstanceSpec::known_optimum(20, 20, 3, 0.05, 42)).unwrap();
        assert_eq!(inst.m_data, again.m_data);
        assert_eq!(inst.tau.to_bits(), again.tau.to_bits());
        let p = inst.problem(Some(3)).unwrap();
        assert_eq!(objective(&p, &inst.l_true, &inst.s_true).unwrap(), 0.0);
        assert_eq!(inst.f_star, Some(0.0));
    }

    #[test]
    fn table2_bounds() {
        let delta = 0.2;
        let inst = gen_table2_instance(&InstanceSpec::table2(30, 3, delta, 1)).unwrap();
        let nnz = inst.s_true.count_nonzero() as f64;
        assert!((inst.s_bound - libm::pow(nnz, 1.0 / (1.0 + delta))).abs() < 1e-10 * inst.s_bound);
        assert!(inst.s_true.as_slice().iter().all(|&x| x == 0.0 || x.abs() == 1.0));
        let p = inst.problem(Some(3)).unwrap();
        assert_eq!(p.reg_y, Regularizer::LpBall { p: 1.2, s: inst.s_bound });
    }

    #[test]
    fn spec_validation() {
        assert!(InstanceSpec::sec5(5, 5, 6, 0.1, 0).validate().is_err());
        assert!(InstanceSpec::sec5(5, 5, 2, 1.0, 0).validate().is_err());
        let mut t = InstanceSpec::table2(5, 2, 0.1, 0);
        t.delta = None;
        assert!(t.validate().is_err());
        assert_eq!(InstanceKind::from_name("known_optimum"), Some(InstanceKind::KnownOptimum));
    }
}
