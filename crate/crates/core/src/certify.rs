//! Sum-of-squares certificates `h₀ − ξ = vᵀGv + Σ h_t (u_tᵀ v_t)` and their
//! independent verification in exact arithmetic.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::sym_eigen;
use crate::momentsos::{basis_size, half_degree, monomial_basis, MonomialBasis};
use crate::polyalg::PolyError;
use crate::resolve::Sampler;
use crate::scalar::Coefficient;
use crate::varietylab::{newton_project_all, VarietyError, VarietySpec};
use crate::{FloatPoly, Poly, Polynomial};

/// Denominator cap when rationalizing floating certificate data.
pub const MAX_DENOMINATOR: u64 = 1_000_000_000;
/// Default residual and eigenvalue tolerance.
pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error("certificate mismatch: {0}")]
    Dimension(String),
    #[error("Gram matrix has eigenvalue {0} below the tolerance")]
    NotPsd(f64),
    #[error("no sample points on the variety")]
    NoSamples,
    #[error("invalid certificate JSON: {0}")]
    Json(String),
}

/// Certificate data. `C = f64` for solver output, `BigRational` for
/// hand-written certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct SOSCertificate<C: Coefficient = f64> {
    pub vars: Vec<String>,
    pub k: u32,
    pub xi: C,
    /// Degree-`k` basis `v` over all variables.
    pub basis: MonomialBasis,
    /// Full symmetric matrix, row-major.
    pub gram: Vec<Vec<C>>,
    /// `u_t` over the degree `2(k − r_t)` basis, one per generator.
    pub multipliers: Vec<Vec<C>>,
    pub squares: Option<Vec<FloatPoly>>,
    /// Max coefficient of the exact residual, when computed.
    pub residual_norm: f64,
}

impl<C: Coefficient> SOSCertificate<C> {
    pub fn new(vars: Vec<String>, k: u32, xi: C, gram: Vec<Vec<C>>, multipliers: Vec<Vec<C>>) -> Self {
        let basis = monomial_basis(vars.len(), k);
        SOSCertificate { vars, k, xi, basis, gram, multipliers, squares: None, residual_norm: f64::NAN }
    }

    pub fn gram_f64(&self) -> DMatrix<f64> {
        let s = self.gram.len();
        DMatrix::from_fn(s, s, |i, j| self.gram[i][j].to_f64())
    }

    /// `vᵀGv` exactly after rationalization.
    pub fn sos_part(&self) -> Poly {
        let n = self.basis.nvars();
        let mut p = Poly::zero(n);
        for (i, row) in self.gram.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                let q = g.to_rational(MAX_DENOMINATOR);
                if !q.is_zero() {
                    p.add_term(self.basis.get(i).mul(self.basis.get(j)), q);
                }
            }
        }
        p
    }

    /// `u_t` as polynomials, exactly after rationalization.
    pub fn multiplier_polys(&self, h: &[Poly]) -> Result<Vec<Poly>, CertifyError> {
        let n = self.basis.nvars();
        if self.multipliers.len() != h.len() {
            return Err(CertifyError::Dimension(format!(
                "{} multiplier vectors for {} generators",
                self.multipliers.len(),
                h.len()
            )));
        }
        h.iter()
            .zip(&self.multipliers)
            .enumerate()
            .map(|(t, (g, u))| {
                let r = half_degree(g);
                if r > self.k {
                    return Err(CertifyError::Dimension(format!("generator {t} has degree above 2k")));
                }
                let b = monomial_basis(n, 2 * (self.k - r));
                if u.len() != b.len() {
                    return Err(CertifyError::Dimension(format!(
                        "multiplier {t} has {} entries, expected {}",
                        u.len(),
                        b.len()
                    )));
                }
                let exact: Vec<BigRational> = u.iter().map(|c| c.to_rational(MAX_DENOMINATOR)).collect();
                Ok(b.combine(&exact))
            })
            .collect()
    }

    /// `h₀ − ξ − vᵀGv − Σ h_t u_t` in exact arithmetic.
    pub fn residual(&self, h0: &Poly, h: &[Poly]) -> Result<Poly, CertifyError> {
        self.check_shape(h0, h)?;
        let n = self.basis.nvars();
        let mut r = h0 - &Poly::constant(n, self.xi.to_rational(MAX_DENOMINATOR));
        r = &r - &self.sos_part();
        for (g, u) in h.iter().zip(self.multiplier_polys(h)?) {
            r = &r - &(g * &u);
        }
        Ok(r)
    }

    fn check_shape(&self, h0: &Poly, h: &[Poly]) -> Result<(), CertifyError> {
        let n = self.basis.nvars();
        if h0.nvars() != n || h.iter().any(|g| g.nvars() != n) || self.vars.len() != n {
            return Err(CertifyError::Dimension(format!("certificate is over {n} variables")));
        }
        let s = basis_size(n, self.k);
        if self.gram.len() != s || self.gram.iter().any(|r| r.len() != s) {
            return Err(CertifyError::Dimension(format!("Gram matrix must be {s}x{s}")));
        }
        Ok(())
    }
}

/// Outcome of [`verify_certificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_residual_coefficient: f64,
    pub gram_min_eigenvalue: f64,
    /// Whether the residual is identically zero.
    pub exact: bool,
    pub pass: bool,
}

/// Re-expand the certificate identity exactly; pass iff the residual's
/// largest coefficient and the Gram matrix's negative eigenvalue slack are
/// both within `tol`.
pub fn verify_certificate<C: Coefficient>(
    cert: &SOSCertificate<C>,
    h0: &Poly,
    h: &[Poly],
    tol: f64,
) -> Result<VerificationReport, CertifyError> {
    let residual = cert.residual(h0, h)?;
    let max_coef = residual.max_abs_coefficient();
    let g = cert.gram_f64();
    let min_eig = if g.nrows() == 0 {
        0.0
    } else {
        let sym = (&g + g.transpose()) * 0.5;
        sym_eigen(&sym).map(|(v, _)| v[0]).unwrap_or(f64::NEG_INFINITY)
    };
    Ok(VerificationReport {
        max_residual_coefficient: max_coef,
        gram_min_eigenvalue: min_eig,
        exact: residual.is_zero(),
        pass: max_coef <= tol && min_eig >= -tol,
    })
}

/// `q_i = √λ_i (e_iᵀ v)` from the eigendecomposition of `G`, with negative
/// eigenvalues down to `−tol` clipped to zero.
pub fn gram_to_squares(g: &DMatrix<f64>, basis: &MonomialBasis, tol: f64) -> Result<Vec<FloatPoly>, CertifyError> {
    if g.nrows() != basis.len() || g.ncols() != basis.len() {
        return Err(CertifyError::Dimension(format!("Gram matrix must be {0}x{0}", basis.len())));
    }
    if g.nrows() == 0 {
        return Ok(Vec::new());
    }
    let (vals, vecs) = sym_eigen(&((g + g.transpose()) * 0.5)).map_err(|_| CertifyError::NotPsd(f64::NAN))?;
    if vals[0] < -tol {
        return Err(CertifyError::NotPsd(vals[0]));
    }
    Ok(vals
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.0)
        .map(|(i, &l)| {
            let coeffs: Vec<f64> = vecs.column(i).iter().map(|v| v * l.sqrt()).collect();
            basis.combine(&coeffs)
        })
        .collect())
}

/// Where to draw points of a variety from.
#[derive(Debug, Clone, PartialEq)]
pub enum VarietySampler {
    /// Fixed points, used as given.
    Points(Vec<Vec<f64>>),
    /// A catalog parameterization.
    Parametric(Sampler),
    /// Uniform starts in `[−radius, radius]ⁿ`, projected onto the variety.
    Projection { radius: f64 },
}

impl VarietySampler {
    /// Up to `count` points of `v`, reproducible from `seed`.
    pub fn sample(&self, v: &VarietySpec, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, CertifyError> {
        match self {
            VarietySampler::Points(p) => Ok(p.iter().take(count).cloned().collect()),
            VarietySampler::Parametric(s) => Ok(s.samples(count, seed)),
            VarietySampler::Projection { radius } => {
                let n = v.nvars();
                let mut out = Vec::with_capacity(count);
                let mut next = 0u64;
                // bounded number of rounds so empty varieties terminate
                for _ in 0..20 {
                    if out.len() >= count {
                        break;
                    }
                    let starts: Vec<Vec<f64>> = (0..count as u64)
                        .map(|i| {
                            let mut rng = ChaCha8Rng::seed_from_u64(seed);
                            rng.set_stream(next + i);
                            (0..n).map(|_| rng.gen_range(-*radius..=*radius)).collect()
                        })
                        .collect();
                    next += count as u64;
                    for p in newton_project_all(v, &starts, 50, 1e-12)?.into_iter().flatten() {
                        if out.len() < count {
                            out.push(p);
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub samples: usize,
    pub max_abs: f64,
    pub pass: bool,
}

/// Evaluate `p` at sampled points of `system`; pass iff `max |p| ≤ tol`.
pub fn vanishing_check<C: Coefficient>(
    p: &Polynomial<C>,
    system: &VarietySpec,
    sampler: &VarietySampler,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<VanishingReport, CertifyError> {
    let pts = sampler.sample(system, count, seed)?;
    if pts.is_empty() {
        return Err(CertifyError::NoSamples);
    }
    let mut max_abs = 0.0f64;
    for z in &pts {
        max_abs = max_abs.max(p.to_f64().evaluate_f64(z)?.abs());
    }
    Ok(VanishingReport { samples: pts.len(), max_abs, pass: max_abs <= tol })
}

/// JSON form of a floating certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson {
    pub xi: f64,
    pub vars: Vec<String>,
    pub k: u32,
    pub basis: Vec<String>,
    /// Lower triangle, row-major: `G₀₀, G₁₀, G₁₁, G₂₀, ...`.
    pub gram: Vec<f64>,
    pub multipliers: Vec<Vec<f64>>,
    /// Absent when the residual was never computed.
    #[serde(default)]
    pub residual_norm: Option<f64>,
}

impl SOSCertificate<f64> {
    pub fn to_json(&self) -> CertificateJson {
        let mut gram = Vec::new();
        for i in 0..self.gram.len() {
            for j in 0..=i {
                gram.push(self.gram[i][j]);
            }
        }
        CertificateJson {
            xi: self.xi,
            vars: self.vars.clone(),
            k: self.k,
            basis: self.basis.to_text(&self.vars),
            gram,
            multipliers: self.multipliers.clone(),
            residual_norm: self.residual_norm.is_finite().then_some(self.residual_norm),
        }
    }

    pub fn from_json(j: &CertificateJson) -> Result<Self, CertifyError> {
        let basis = monomial_basis(j.vars.len(), j.k);
        if basis.to_text(&j.vars) != j.basis {
            return Err(CertifyError::Json("basis does not match vars and k".into()));
        }
        let s = basis.len();
        if j.gram.len() != s * (s + 1) / 2 {
            return Err(CertifyError::Json(format!("gram needs {} lower-triangle entries", s * (s + 1) / 2)));
        }
        let mut gram = vec![vec![0.0; s]; s];
        let mut it = j.gram.iter();
        #[allow(clippy::needless_range_loop)]
        for i in 0..s {
            for j2 in 0..=i {
                let v = *it.next().expect("length checked");
                gram[i][j2] = v;
                gram[j2][i] = v;
            }
        }
        let mut c = SOSCertificate::new(j.vars.clone(), j.k, j.xi, gram, j.multipliers.clone());
        c.residual_norm = j.residual_norm.unwrap_or(f64::NAN);
        Ok(c)
    }
}

/// Lower bound on `h₀(z) − ξ` implied by the certificate at a feasible
/// point `z`: `−(residual · ‖v(z)‖₁ + negative eigenvalue slack · ‖v(z)‖²)`.
/// Returns `h₀(z) − ξ` minus that bound, which is non-negative for a sound
/// certificate.
pub fn soundness_gap(
    cert: &SOSCertificate<f64>,
    h0: &Poly,
    z: &[f64],
    residual_bound: f64,
) -> Result<f64, CertifyError> {
    let v = cert.basis.point_moments(z);
    let g = cert.gram_f64();
    let min_eig = sym_eigen(&((&g + g.transpose()) * 0.5)).map(|(e, _)| e[0]).unwrap_or(f64::NEG_INFINITY);
    let slack = (-min_eig).max(0.0) * v.iter().map(|x| x * x).sum::<f64>();
    let big = cert.basis.degree() * 2;
    let moments = monomial_basis(cert.basis.nvars(), big).point_moments(z);
    let bound = residual_bound * moments.iter().map(|x| f64::abs(*x)).sum::<f64>();
    Ok(h0.evaluate_f64(z)? - cert.xi + bound + slack)
}

/// Random PSD matrix of rank at most `rank`, for property tests.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, rank, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose()
}

/// Max coefficient of `vᵀGv − Σ q_i²`.
pub fn reconstruction_error(g: &DMatrix<f64>, basis: &MonomialBasis, squares: &[FloatPoly]) -> f64 {
    let mut p = FloatPoly::zero(basis.nvars());
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            p.add_term(basis.get(i).mul(basis.get(j)), g[(i, j)]);
        }
    }
    for q in squares {
        p = &p - &(q * q);
    }
    p.terms().map(|(_, c)| f64::abs(*c)).fold(0.0, f64::max)
}
