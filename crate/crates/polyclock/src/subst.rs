//! Reversible substitution models: normalized infinitesimal generators,
//! their spectral decompositions, transition probability matrices, and the
//! discretized-Gamma site-rate mixture.
//!
//! Generators are normalized to one expected substitution per site per unit
//! of branch "length", so the branch integrals fed to
//! [`GeneratorModel::transition_matrix`] are in expected-substitution units.
//! Reversibility lets us symmetrize the generator with `diag(pi)^{1/2}`,
//! which guarantees a real spectrum and a stable eigendecomposition.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::error::{Error, Result};

const PI_TOLERANCE: f64 = 1e-10;

/// A normalized reversible generator `Q` with stationary distribution `pi`
/// and spectral decomposition `Q = B Λ B⁻¹`.
#[derive(Debug, Clone)]
pub struct GeneratorModel {
    states: usize,
    /// Row-major S×S generator.
    q: Vec<f64>,
    pi: Vec<f64>,
    /// Eigenvalues; the entry closest to zero is snapped to exactly 0.
    eigenvalues: Vec<f64>,
    /// Right eigenvectors as columns, row-major.
    right: Vec<f64>,
    /// Left eigenvectors as rows (B⁻¹), row-major.
    left: Vec<f64>,
}

impl GeneratorModel {
    /// Build a normalized reversible generator from exchangeabilities.
    ///
    /// `rates` holds the upper-triangular exchangeabilities in row order:
    /// for S=4 that is (AC, AG, AT, CG, CT, GT). `Q[i][j] = rates[ij] * pi[j]`
    /// off the diagonal, scaled so `-Σ_s pi_s Q_ss = 1`.
    pub fn from_exchangeabilities(rates: &[f64], pi: &[f64]) -> Result<Self> {
        let s = pi.len();
        if s < 2 {
            return Err(Error::InvalidParameter(format!(
                "state space must have ≥2 states, got {s}"
            )));
        }
        let expected = s * (s - 1) / 2;
        if rates.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "need {expected} exchangeabilities for {s} states, got {}",
                rates.len()
            )));
        }
        validate_simplex(pi)?;
        if let Some(&bad) = rates.iter().find(|&&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "exchangeabilities must be positive and finite, got {bad}"
            )));
        }

        let mut q = vec![0.0f64; s * s];
        let mut k = 0;
        for i in 0..s {
            for j in (i + 1)..s {
                q[i * s + j] = rates[k] * pi[j];
                q[j * s + i] = rates[k] * pi[i];
                k += 1;
            }
        }
        for i in 0..s {
            let row_sum: f64 = (0..s).filter(|&j| j != i).map(|j| q[i * s + j]).sum();
            q[i * s + i] = -row_sum;
        }
        // Normalize to one expected substitution per unit branch length.
        let mu: f64 = (0..s).map(|i| -pi[i] * q[i * s + i]).sum();
        if !(mu > 0.0) {
            return Err(Error::Numerical("generator has zero total rate".into()));
        }
        for v in q.iter_mut() {
            *v /= mu;
        }

        let (eigenvalues, right, left) = decompose(&q, pi, s)?;
        Ok(Self {
            states: s,
            q,
            pi: pi.to_vec(),
            eigenvalues,
            right,
            left,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn generator(&self) -> &[f64] {
        &self.q
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn right_eigenvectors(&self) -> &[f64] {
        &self.right
    }

    pub fn left_eigenvectors(&self) -> &[f64] {
        &self.left
    }

    /// Transition probability matrix `exp(bQ)` for a branch integral `b`.
    ///
    /// Entries are clamped to [0, 1] after reconstruction; `b = 0` yields the
    /// identity. Negative `b` signals an upstream rate-integral bug and is an
    /// error.
    pub fn transition_matrix(&self, b: f64) -> Result<Vec<f64>> {
        let mut p = vec![0.0; self.states * self.states];
        self.transition_matrix_into(b, &mut p)?;
        Ok(p)
    }

    /// As [`Self::transition_matrix`], writing into a caller-owned buffer.
    pub fn transition_matrix_into(&self, b: f64, out: &mut [f64]) -> Result<()> {
        if !(b >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "branch integral must be nonnegative, got {b}"
            )));
        }
        self.scaled_reconstruct(|lam| (lam * b).exp(), out);
        for v in out.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        Ok(())
    }

    /// `Q · exp(bQ)`, the derivative of the transition matrix in `b`.
    /// Unclamped; used by the likelihood gradient.
    pub fn transition_derivative_into(&self, b: f64, out: &mut [f64]) -> Result<()> {
        if !(b >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "branch integral must be nonnegative, got {b}"
            )));
        }
        self.scaled_reconstruct(|lam| lam * (lam * b).exp(), out);
        Ok(())
    }

    fn scaled_reconstruct(&self, f: impl Fn(f64) -> f64, out: &mut [f64]) {
        let s = self.states;
        if s <= 8 {
            let mut buf = [0.0f64; 8];
            for (k, &lam) in self.eigenvalues.iter().enumerate() {
                buf[k] = f(lam);
            }
            reconstruct(&self.right, &buf[..s], &self.left, s, out);
        } else {
            let buf: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
            reconstruct(&self.right, &buf, &self.left, s, out);
        }
    }
}

/// `out = B · diag(d) · B⁻¹`, row-major.
fn reconstruct(right: &[f64], diag: &[f64], left: &[f64], s: usize, out: &mut [f64]) {
    for i in 0..s {
        for j in 0..s {
            let mut acc = 0.0;
            for k in 0..s {
                acc += right[i * s + k] * diag[k] * left[k * s + j];
            }
            out[i * s + j] = acc;
        }
    }
}

fn validate_simplex(pi: &[f64]) -> Result<()> {
    if let Some(&bad) = pi.iter().find(|&&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "stationary frequencies must be strictly positive, got {bad}"
        )));
    }
    let sum: f64 = pi.iter().sum();
    if (sum - 1.0).abs() > PI_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "stationary frequencies sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Eigendecomposition via the `diag(pi)^{1/2}` similarity transform.
///
/// Returns (eigenvalues, B, B⁻¹) with the zero eigenvalue snapped to 0 and
/// sorted descending, so index 0 is the stationary mode.
fn decompose(q: &[f64], pi: &[f64], s: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let mut sym = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            sym[(i, j)] = sqrt_pi[i] * q[i * s + j] / sqrt_pi[j];
        }
    }
    // Enforce exact symmetry against rounding before decomposing.
    for i in 0..s {
        for j in (i + 1)..s {
            let m = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = m;
            sym[(j, i)] = m;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let mut eigenvalues = Vec::with_capacity(s);
    let mut right = vec![0.0f64; s * s];
    let mut left = vec![0.0f64; s * s];
    for (k, &src) in order.iter().enumerate() {
        let lam = eig.eigenvalues[src];
        eigenvalues.push(lam);
        let v: DVector<f64> = eig.eigenvectors.column(src).into();
        for i in 0..s {
            right[i * s + k] = v[i] / sqrt_pi[i];
            left[k * s + i] = v[i] * sqrt_pi[i];
        }
    }
    if eigenvalues[0].abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "largest eigenvalue {} is not numerically zero",
            eigenvalues[0]
        )));
    }
    eigenvalues[0] = 0.0;
    if eigenvalues[1..].iter().any(|&l| l >= 0.0) {
        return Err(Error::Numerical(
            "generator has a non-negative subdominant eigenvalue".into(),
        ));
    }
    Ok((eigenvalues, right, left))
}

/// HKY generator: transitions (A↔G, C↔T) scaled by `kappa` relative to
/// transversions.
pub fn hky(kappa: f64, pi: &[f64]) -> Result<GeneratorModel> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    if pi.len() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "HKY needs 4 frequencies, got {}",
            pi.len()
        )));
    }
    gtr(&[1.0, kappa, 1.0, 1.0, kappa, 1.0], pi)
}

/// GTR generator from six exchangeabilities (AC, AG, AT, CG, CT, GT).
pub fn gtr(rates: &[f64], pi: &[f64]) -> Result<GeneratorModel> {
    if rates.len() != 6 || pi.len() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "GTR needs 6 rates and 4 frequencies, got {} and {}",
            rates.len(),
            pi.len()
        )));
    }
    GeneratorModel::from_exchangeabilities(rates, pi)
}

/// Jukes–Cantor generator (all exchangeabilities equal, uniform frequencies).
pub fn jukes_cantor() -> GeneratorModel {
    gtr(&[1.0; 6], &[0.25; 4]).expect("JC parameters are always valid")
}

/// Across-site rate variation as an equal-weight category mixture.
#[derive(Debug, Clone)]
pub struct SiteRateModel {
    alpha: Option<f64>,
    rates: Vec<f64>,
    weights: Vec<f64>,
}

impl SiteRateModel {
    /// Single category at rate 1 (no rate variation).
    pub fn uniform() -> Self {
        Self {
            alpha: None,
            rates: vec![1.0],
            weights: vec![1.0],
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn n_categories(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Discretize Gamma(alpha, alpha) rate variation into `k` equal-probability
/// categories, each represented by the mean of its quantile slice, then
/// renormalized so the mixture mean is exactly 1.
pub fn discretized_gamma(alpha: f64, k: usize) -> Result<SiteRateModel> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma shape must be positive, got {alpha}"
        )));
    }
    if k < 1 {
        return Err(Error::InvalidParameter(
            "need at least one rate category".into(),
        ));
    }
    if k == 1 {
        return Ok(SiteRateModel {
            alpha: Some(alpha),
            rates: vec![1.0],
            weights: vec![1.0],
        });
    }

    let dist = Gamma::new(alpha, alpha).map_err(|e| Error::Numerical(e.to_string()))?;
    // Mean of each slice via the Gamma(alpha+1, alpha) identity:
    // ∫ x f_{α,α}(x) dx over (a, b) = F_{α+1,α}(b) − F_{α+1,α}(a).
    let dist_up = Gamma::new(alpha + 1.0, alpha).map_err(|e| Error::Numerical(e.to_string()))?;

    let mut cuts = Vec::with_capacity(k + 1);
    cuts.push(0.0);
    for i in 1..k {
        cuts.push(gamma_quantile(&dist, i as f64 / k as f64)?);
    }
    cuts.push(f64::INFINITY);

    let mut rates = Vec::with_capacity(k);
    for i in 0..k {
        let hi = if cuts[i + 1].is_finite() {
            dist_up.cdf(cuts[i + 1])
        } else {
            1.0
        };
        let lo = if cuts[i] > 0.0 { dist_up.cdf(cuts[i]) } else { 0.0 };
        rates.push(k as f64 * (hi - lo));
    }
    let mean: f64 = rates.iter().sum::<f64>() / k as f64;
    for r in rates.iter_mut() {
        *r /= mean;
    }
    Ok(SiteRateModel {
        alpha: Some(alpha),
        rates,
        weights: vec![1.0 / k as f64; k],
    })
}

/// Quantile of a Gamma distribution by bracketing bisection on its CDF.
/// The library's builtin inverse overflows for very large shapes.
fn gamma_quantile(dist: &Gamma, p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile probability must be in (0,1), got {p}"
        )));
    }
    let mut hi = 1.0f64;
    let mut doublings = 0;
    while dist.cdf(hi) < p {
        hi *= 2.0;
        doublings += 1;
        if doublings > 4000 {
            return Err(Error::Numerical("gamma quantile bracket failed".into()));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sum: f64 = v.iter().sum();
        for x in v.iter_mut() {
            *x /= sum;
        }
        v
    }

    #[test]
    fn hky_with_kappa_one_is_jukes_cantor() {
        let m = hky(1.0, &[0.25; 4]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { -1.0 } else { 1.0 / 3.0 };
                assert!((m.generator()[i * 4 + j] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hky_transition_transversion_ratio() {
        let m = hky(2.0, &[0.25; 4]).unwrap();
        let q = m.generator();
        // A→G is a transition, A→C a transversion.
        assert!((q[0 * 4 + 2] / q[0 * 4 + 1] - 2.0).abs() < 1e-12);
        // C→T transition vs C→G transversion.
        assert!((q[1 * 4 + 3] / q[1 * 4 + 2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn detailed_balance_over_random_draws() {
        let mut rng = ChaCha12Rng::seed_from_u64(71);
        for _ in 0..500 {
            let kappa = rng.gen_range(0.1..10.0);
            let pi = random_simplex(&mut rng, 4);
            let m = hky(kappa, &pi).unwrap();
            let q = m.generator();
            for i in 0..4 {
                for j in 0..4 {
                    let res = pi[i] * q[i * 4 + j] - pi[j] * q[j * 4 + i];
                    assert!(res.abs() < 1e-12, "detailed balance residual {res}");
                }
            }
        }
    }

    #[test]
    fn generator_invariants() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..100 {
            let rates: Vec<f64> = (0..6).map(|_| rng.gen_range(0.1..5.0)).collect();
            let pi = random_simplex(&mut rng, 4);
            let m = gtr(&rates, &pi).unwrap();
            let q = m.generator();
            for i in 0..4 {
                let row: f64 = (0..4).map(|j| q[i * 4 + j]).sum();
                assert!(row.abs() < 1e-12, "row sum {row}");
                for j in 0..4 {
                    if i != j {
                        assert!(q[i * 4 + j] >= 0.0);
                    }
                }
            }
            // Stationarity: pi Q = 0.
            for j in 0..4 {
                let v: f64 = (0..4).map(|i| pi[i] * q[i * 4 + j]).sum();
                assert!(v.abs() < 1e-10, "stationarity residual {v}");
            }
            // Normalization.
            let mu: f64 = (0..4).map(|i| -pi[i] * q[i * 4 + i]).sum();
            assert!((mu - 1.0).abs() < 1e-12);
            // Spectrum: one zero, rest negative.
            assert_eq!(m.eigenvalues()[0], 0.0);
            assert!(m.eigenvalues()[1..].iter().all(|&l| l < 0.0));
            // Right eigenvector of the zero eigenvalue is the ones vector,
            // left is pi.
            let b = m.right_eigenvectors();
            let scale = b[0];
            for i in 0..4 {
                assert!((b[i * 4] / scale - 1.0).abs() < 1e-8);
            }
            let l = m.left_eigenvectors();
            for i in 0..4 {
                assert!((l[i] * scale - pi[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gtr_nests_hky() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..50 {
            let kappa = rng.gen_range(0.2..8.0);
            let pi = random_simplex(&mut rng, 4);
            let a = hky(kappa, &pi).unwrap();
            let b = gtr(&[1.0, kappa, 1.0, 1.0, kappa, 1.0], &pi).unwrap();
            for (x, y) in a.generator().iter().zip(b.generator()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reconstruction_recovers_q() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..50 {
            let rates: Vec<f64> = (0..6).map(|_| rng.gen_range(0.1..5.0)).collect();
            let pi = random_simplex(&mut rng, 4);
            let m = gtr(&rates, &pi).unwrap();
            let mut recon = vec![0.0; 16];
            reconstruct(
                m.right_eigenvectors(),
                m.eigenvalues(),
                m.left_eigenvectors(),
                4,
                &mut recon,
            );
            for (a, b) in recon.iter().zip(m.generator()) {
                assert!((a - b).abs() < 1e-11, "reconstruction error {}", (a - b).abs());
            }
        }
    }

    #[test]
    fn transition_identity_at_zero() {
        let m = jukes_cantor();
        let p = m.transition_matrix(0.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((p[i * 4 + j] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn jc_closed_form() {
        let m = jukes_cantor();
        let b = 0.3;
        let p = m.transition_matrix(b).unwrap();
        let diag = 0.25 + 0.75 * (-4.0 * b / 3.0).exp();
        let off = 0.25 - 0.25 * (-4.0 * b / 3.0).exp();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { diag } else { off };
                assert!((p[i * 4 + j] - expect).abs() < 1e-12);
            }
        }
        assert!((diag - 0.75274).abs() < 1e-5);
    }

    #[test]
    fn rows_sum_to_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..50 {
            let rates: Vec<f64> = (0..6).map(|_| rng.gen_range(0.1..5.0)).collect();
            let pi = random_simplex(&mut rng, 4);
            let m = gtr(&rates, &pi).unwrap();
            for &b in &[0.01, 0.1, 1.0, 10.0] {
                let p = m.transition_matrix(b).unwrap();
                for i in 0..4 {
                    let row: f64 = (0..4).map(|j| p[i * 4 + j]).sum();
                    assert!((row - 1.0).abs() < 1e-12, "row sum {row} at b={b}");
                }
            }
        }
    }

    #[test]
    fn chapman_kolmogorov() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..20 {
            let rates: Vec<f64> = (0..6).map(|_| rng.gen_range(0.1..5.0)).collect();
            let pi = random_simplex(&mut rng, 4);
            let m = gtr(&rates, &pi).unwrap();
            let (b1, b2) = (rng.gen_range(0.01..2.0), rng.gen_range(0.01..2.0));
            let p1 = m.transition_matrix(b1).unwrap();
            let p2 = m.transition_matrix(b2).unwrap();
            let p12 = m.transition_matrix(b1 + b2).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let prod: f64 = (0..4).map(|k| p1[i * 4 + k] * p2[k * 4 + j]).sum();
                    assert!((prod - p12[i * 4 + j]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn long_branch_converges_to_stationary() {
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        let rates: Vec<f64> = (0..6).map(|_| rng.gen_range(0.2..3.0)).collect();
        let pi = random_simplex(&mut rng, 4);
        let m = gtr(&rates, &pi).unwrap();
        let p = m.transition_matrix(500.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((p[i * 4 + j] - pi[j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn negative_branch_is_error() {
        let m = jukes_cantor();
        assert!(m.transition_matrix(-0.1).is_err());
    }

    #[test]
    fn bad_parameters_are_errors() {
        assert!(hky(0.0, &[0.25; 4]).is_err());
        assert!(hky(2.0, &[0.3, 0.3, 0.3, 0.3]).is_err());
        assert!(gtr(&[1.0, -1.0, 1.0, 1.0, 1.0, 1.0], &[0.25; 4]).is_err());
    }

    #[test]
    fn transition_derivative_matches_finite_difference() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let rates: Vec<f64> = (0..6).map(|_| rng.gen_range(0.2..3.0)).collect();
        let pi = random_simplex(&mut rng, 4);
        let m = gtr(&rates, &pi).unwrap();
        let b = 0.37;
        let h = 1e-6;
        let mut d = vec![0.0; 16];
        m.transition_derivative_into(b, &mut d).unwrap();
        let p_hi = m.transition_matrix(b + h).unwrap();
        let p_lo = m.transition_matrix(b - h).unwrap();
        for k in 0..16 {
            let fd = (p_hi[k] - p_lo[k]) / (2.0 * h);
            assert!((d[k] - fd).abs() < 1e-8, "entry {k}: {} vs {fd}", d[k]);
        }
    }

    #[test]
    fn single_category_is_rate_one() {
        let m = discretized_gamma(0.7, 1).unwrap();
        assert_eq!(m.rates(), &[1.0]);
        assert_eq!(m.weights(), &[1.0]);
    }

    #[test]
    fn huge_alpha_collapses_to_one() {
        let m = discretized_gamma(1e6, 4).unwrap();
        for &r in m.rates() {
            assert!((r - 1.0).abs() < 1e-2, "rate {r}");
        }
    }

    #[test]
    fn gamma_categories_increase_and_average_one() {
        let m = discretized_gamma(0.5, 4).unwrap();
        for w in m.rates().windows(2) {
            assert!(w[0] < w[1]);
        }
        let mean: f64 =
            m.rates().iter().zip(m.weights()).map(|(r, w)| r * w).sum();
        assert!((mean - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gamma_slice_means_match_quadrature() {
        // Independent oracle: Simpson integration of x·pdf over each slice.
        let alpha = 0.5;
        let k = 4;
        let model = discretized_gamma(alpha, k).unwrap();
        let dist = Gamma::new(alpha, alpha).unwrap();
        let pdf = |x: f64| {
            use statrs::distribution::Continuous;
            dist.pdf(x)
        };
        let mut cuts = vec![0.0];
        for i in 1..k {
            cuts.push(gamma_quantile(&dist, i as f64 / k as f64).unwrap());
        }
        cuts.push(gamma_quantile(&dist, 1.0 - 1e-13).unwrap());
        // The integrand x·pdf(x) vanishes at 0 even when the pdf diverges.
        let xf = |x: f64| if x <= 0.0 { 0.0 } else { x * pdf(x) };
        for i in 0..k {
            let (a, b) = (cuts[i], cuts[i + 1]);
            let n = 20_000;
            let h = (b - a) / n as f64;
            let mut integral = 0.0;
            for step in 0..n {
                let x0 = a + step as f64 * h;
                let x1 = x0 + h;
                let xm = 0.5 * (x0 + x1);
                integral += h / 6.0 * (xf(x0) + 4.0 * xf(xm) + xf(x1));
            }
            let expected = k as f64 * integral;
            assert!(
                (model.rates()[i] - expected).abs() < 1e-3,
                "category {i}: {} vs quadrature {expected}",
                model.rates()[i]
            );
        }
    }

    #[test]
    fn gamma_bad_parameters() {
        assert!(discretized_gamma(0.0, 4).is_err());
        assert!(discretized_gamma(1.0, 0).is_err());
    }
}
