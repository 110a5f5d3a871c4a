//! Gaussian Markov random field prior on log rates, with its precision
//! hyperprior and the propriety-parameter prior.
//!
//! The field couples adjacent epochs through a symmetric tridiagonal matrix
//! `W` whose off-diagonals are the midpoint gaps (`W[j][j+1] = d_j`) and a
//! diagonal `D_w` of row sums of `W`. The density kernel on `ζ` is
//! `τ^{M/2} · exp(-τ/2 · ζ'(D_w - ρW)ζ)`. With `ρ = 1` each row of
//! `D_w - W` sums to zero and the field is improper; `|ρ| < 1` makes
//! `D_w - ρW` positive definite by diagonal dominance. All densities and
//! gradients run in O(M) off the tridiagonal structure; dense matrices are
//! materialized only for spectra and tests.

use nalgebra::DMatrix;

use crate::clock::EpochGrid;
use crate::error::{Error, Result};

/// Exponent of `τ` in the field kernel. The published kernel carries `M/2`;
/// the proper (M+1)-dimensional Gaussian would carry `(M+1)/2`. The default
/// follows the published kernel; the alternative is an expert override and
/// shifts the precision's conditional shape by 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TauExponent {
    #[default]
    HalfM,
    HalfMPlusOne,
}

impl TauExponent {
    /// Numeric exponent for a field over `m + 1` epochs with `m` increments.
    pub fn value(self, m: usize) -> f64 {
        match self {
            TauExponent::HalfM => m as f64 / 2.0,
            TauExponent::HalfMPlusOne => (m as f64 + 1.0) / 2.0,
        }
    }
}

/// The smoothing field over `M + 1` log rates.
#[derive(Debug, Clone)]
pub struct GmrfModel {
    /// Midpoint gaps `d`, length `M`; `W[j][j+1] = d[j]`.
    gaps: Vec<f64>,
    pub rho: f64,
    pub tau: f64,
    pub exponent: TauExponent,
}

impl GmrfModel {
    /// Build the field for a grid with propriety parameter `|rho| < 1` and
    /// precision `tau > 0`.
    pub fn new(grid: &EpochGrid, rho: f64, tau: f64) -> Result<Self> {
        Self::from_gaps(grid.midpoint_gaps().to_vec(), rho, tau)
    }

    pub fn from_gaps(gaps: Vec<f64>, rho: f64, tau: f64) -> Result<Self> {
        if rho.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "propriety parameter must satisfy |rho| < 1, got {rho} (the field is improper)"
            )));
        }
        Self::from_gaps_unchecked(gaps, rho, tau)
    }

    /// Diagnostic constructor that admits `rho = 1` (the improper field).
    /// Densities computed with it are shift-invariant and must not be used
    /// for sampling.
    pub fn from_gaps_improper(gaps: Vec<f64>, tau: f64) -> Result<Self> {
        Self::from_gaps_unchecked(gaps, 1.0, tau)
    }

    fn from_gaps_unchecked(gaps: Vec<f64>, rho: f64, tau: f64) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::InvalidParameter(
                "field needs at least one midpoint gap (two epochs)".into(),
            ));
        }
        if gaps.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidParameter("midpoint gaps must be positive".into()));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "precision must be positive, got {tau}"
            )));
        }
        Ok(Self {
            gaps,
            rho,
            tau,
            exponent: TauExponent::default(),
        })
    }

    /// Number of increments, `M`.
    pub fn n_gaps(&self) -> usize {
        self.gaps.len()
    }

    /// Field dimension, `M + 1`.
    pub fn dim(&self) -> usize {
        self.gaps.len() + 1
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Diagonal of `D_w` (row sums of `W`).
    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.dim();
        let mut diag = vec![0.0; n];
        for (j, &d) in self.gaps.iter().enumerate() {
            diag[j] += d;
            diag[j + 1] += d;
        }
        diag
    }

    /// `ζ'(D_w - ρW)ζ`, evaluated off the tridiagonal structure in O(M).
    pub fn quadratic_form(&self, zeta: &[f64]) -> Result<f64> {
        self.check_dim(zeta)?;
        let mut acc = 0.0;
        for (j, &d) in self.gaps.iter().enumerate() {
            let (a, b) = (zeta[j], zeta[j + 1]);
            acc += d * (a * a + b * b - 2.0 * self.rho * a * b);
        }
        Ok(acc)
    }

    /// Unnormalized log density: `(M/2)·ln τ − (τ/2)·ζ'(D_w − ρW)ζ`
    /// (constant in `ζ` omitted; τ exponent included).
    pub fn log_density(&self, zeta: &[f64]) -> Result<f64> {
        let q = self.quadratic_form(zeta)?;
        Ok(self.exponent.value(self.n_gaps()) * self.tau.ln() - 0.5 * self.tau * q)
    }

    /// Gradient of the log density: `−τ(D_w − ρW)ζ`, in O(M).
    pub fn gradient(&self, zeta: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.gradient_into(zeta, &mut out)?;
        Ok(out)
    }

    pub fn gradient_into(&self, zeta: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dim(zeta)?;
        if out.len() != self.dim() {
            return Err(Error::DimensionMismatch("gradient buffer length".into()));
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, &d) in self.gaps.iter().enumerate() {
            let (a, b) = (zeta[j], zeta[j + 1]);
            out[j] += -self.tau * d * (a - self.rho * b);
            out[j + 1] += -self.tau * d * (b - self.rho * a);
        }
        Ok(())
    }

    /// Dense `D_w − ρW` (without the τ factor).
    pub fn precision_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let diag = self.row_sums();
        for j in 0..n {
            m[(j, j)] = diag[j];
        }
        for (j, &d) in self.gaps.iter().enumerate() {
            m[(j, j + 1)] = -self.rho * d;
            m[(j + 1, j)] = -self.rho * d;
        }
        m
    }

    /// Sorted eigenvalues of `D_w − ρW` (ascending).
    pub fn precision_spectrum(&self) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.precision_matrix());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    fn check_dim(&self, zeta: &[f64]) -> Result<()> {
        if zeta.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "field dimension {} but got {} log rates",
                self.dim(),
                zeta.len()
            )));
        }
        Ok(())
    }
}

/// Prior on the propriety parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoSpec {
    /// Keep `rho` fixed at the given value (any `|rho| < 1`).
    Fixed(f64),
    /// Estimate `rho` over (0, 1) with `logit(rho) ~ N(location, scale²)`.
    LogitNormal { location: f64, scale: f64 },
}

/// Hyperparameters of the precision prior and the `rho` specification.
#[derive(Debug, Clone)]
pub struct HyperPriors {
    /// Gamma shape `a` for the precision.
    pub tau_shape: f64,
    /// Gamma rate `b` for the precision.
    pub tau_rate: f64,
    pub rho: RhoSpec,
}

impl HyperPriors {
    pub fn new(tau_shape: f64, tau_rate: f64, rho: RhoSpec) -> Result<Self> {
        if !(tau_shape > 0.0) || !(tau_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "precision prior needs positive shape and rate, got {tau_shape}, {tau_rate}"
            )));
        }
        if let RhoSpec::LogitNormal { scale, .. } = rho {
            if !(scale > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "logit-normal scale must be positive, got {scale}"
                )));
            }
        }
        if let RhoSpec::Fixed(r) = rho {
            if r.abs() >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "fixed rho must satisfy |rho| < 1, got {r}"
                )));
            }
        }
        Ok(Self {
            tau_shape,
            tau_rate,
            rho,
        })
    }

    /// Defaults: diffuse Gamma(0.001, 0.001) precision, rho fixed at 0.99.
    pub fn default_fixed_rho() -> Self {
        Self::new(1e-3, 1e-3, RhoSpec::Fixed(0.99)).unwrap()
    }
}

/// Unnormalized log prior of the precision: `(a−1)·ln τ − b·τ`.
pub fn tau_log_prior(tau: f64, hyper: &HyperPriors) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "precision must be positive, got {tau}"
        )));
    }
    Ok((hyper.tau_shape - 1.0) * tau.ln() - hyper.tau_rate * tau)
}

/// Log prior density of `rho`. Fixed `rho` contributes zero; the
/// logit-normal contributes the full normalized density on (0, 1).
pub fn rho_log_prior(rho: f64, hyper: &HyperPriors) -> Result<f64> {
    match hyper.rho {
        RhoSpec::Fixed(_) => Ok(0.0),
        RhoSpec::LogitNormal { location, scale } => {
            if !(0.0 < rho && rho < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "estimated rho must lie in (0,1), got {rho}"
                )));
            }
            let x = logit(rho);
            let z = (x - location) / scale;
            Ok(-0.5 * z * z
                - 0.5 * (2.0 * std::f64::consts::PI).ln()
                - scale.ln()
                - (rho * (1.0 - rho)).ln())
        }
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn inv_logit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
