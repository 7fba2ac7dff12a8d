//! Random-intercept linear mixed model with a single fixed slope:
//!
//! y_ij = β0 + β1·x_ij + u_i + ε_ij,  u_i ~ N(0, σ²_u),  ε_ij ~ N(0, σ²_e).
//!
//! The likelihood is profiled over the variance ratio λ = σ²_u/σ²_e. For a
//! fixed λ the marginal covariance of group i is σ²_e(I + λJ), whose inverse
//! is (I − c_i J)/σ²_e with c_i = λ/(1 + n_i λ), so β follows from GLS in
//! closed form and σ²_e from the weighted residual sum of squares. The
//! remaining one-dimensional problem in ln λ is solved by a log-spaced grid
//! scan refined with golden-section search.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LmmError {
    #[error("outcome, predictor and group vectors differ in length")]
    LengthMismatch,
    #[error("non-finite value at observation {0}")]
    NonFinite(usize),
    #[error("need at least two groups, got {0}")]
    TooFewGroups(usize),
    #[error("no group has two or more observations")]
    NoRepeatedGroup,
    #[error("design matrix is singular (constant predictor)")]
    Singular,
    #[error("variance-ratio search did not converge within {0} iterations")]
    NonConvergence(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LmmMethod {
    #[default]
    Ml,
    Reml,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedModelFit {
    pub beta0: f64,
    pub beta1: f64,
    pub var_group: f64,
    pub var_resid: f64,
    pub variance_ratio: f64,
    pub r2_marginal: f64,
    pub r2_conditional: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    /// Optimum sits on an edge of the ratio bracket.
    pub at_boundary: bool,
    pub method: LmmMethod,
    pub n_obs: usize,
    pub n_groups: usize,
}

/// Bracket for the variance ratio σ²_u/σ²_e.
pub const RATIO_MIN: f64 = 1e-8;
pub const RATIO_MAX: f64 = 1e4;
const GRID_POINTS: usize = 97;
const REL_TOL: f64 = 1e-9;
const MAX_ITER: usize = 500;

/// Observations grouped for repeated likelihood evaluation. `x` and `y` are
/// centred internally for conditioning; reported coefficients are on the
/// original scale.
#[derive(Debug, Clone)]
pub struct MixedModelData {
    groups: Vec<Vec<(f64, f64)>>,
    x_mean: f64,
    y_mean: f64,
    n: usize,
    x_centered: Vec<f64>,
}

/// Profile of the likelihood at one variance ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub ratio: f64,
    pub log_likelihood: f64,
    /// Intercept and slope on the centred scale.
    pub beta: [f64; 2],
    pub var_resid: f64,
}

impl MixedModelData {
    pub fn new<G: Ord + Clone>(y: &[f64], x: &[f64], group: &[G]) -> Result<Self, LmmError> {
        if y.len() != x.len() || x.len() != group.len() {
            return Err(LmmError::LengthMismatch);
        }
        if let Some(i) = (0..y.len()).find(|&i| !y[i].is_finite() || !x[i].is_finite()) {
            return Err(LmmError::NonFinite(i));
        }
        let n = y.len();
        let x_mean = x.iter().sum::<f64>() / n.max(1) as f64;
        let y_mean = y.iter().sum::<f64>() / n.max(1) as f64;
        let mut by_group: BTreeMap<G, Vec<(f64, f64)>> = BTreeMap::new();
        for i in 0..n {
            by_group.entry(group[i].clone()).or_default().push((x[i] - x_mean, y[i] - y_mean));
        }
        if by_group.len() < 2 {
            return Err(LmmError::TooFewGroups(by_group.len()));
        }
        if by_group.values().all(|g| g.len() < 2) {
            return Err(LmmError::NoRepeatedGroup);
        }
        let x_centered: Vec<f64> = x.iter().map(|v| v - x_mean).collect();
        let sxx: f64 = x_centered.iter().map(|v| v * v).sum();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        if sxx <= 1e-24 * scale * scale * n as f64 {
            return Err(LmmError::Singular);
        }
        Ok(Self { groups: by_group.into_values().collect(), x_mean, y_mean, n, x_centered })
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// GLS solve and profiled log-likelihood at a fixed variance ratio.
    pub fn profile(&self, ratio: f64, method: LmmMethod) -> Result<ProfilePoint, LmmError> {
        // X'V⁻¹X and X'V⁻¹y accumulated per group, X = [1, x]
        let (mut a00, mut a01, mut a11, mut b0, mut b1, mut logdet) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for g in &self.groups {
            let ni = g.len() as f64;
            let c = ratio / (1.0 + ni * ratio);
            let sx: f64 = g.iter().map(|p| p.0).sum();
            let sy: f64 = g.iter().map(|p| p.1).sum();
            let sxx: f64 = g.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = g.iter().map(|p| p.0 * p.1).sum();
            a00 += ni - c * ni * ni;
            a01 += sx - c * ni * sx;
            a11 += sxx - c * sx * sx;
            b0 += sy - c * ni * sy;
            b1 += sxy - c * sx * sy;
            logdet += (1.0 + ni * ratio).ln();
        }
        let det = a00 * a11 - a01 * a01;
        if !(det > 1e-12 * a00.abs() * a11.abs()) {
            return Err(LmmError::Singular);
        }
        let beta = [(a11 * b0 - a01 * b1) / det, (a00 * b1 - a01 * b0) / det];
        let mut q = 0.0;
        for g in &self.groups {
            let ni = g.len() as f64;
            let c = ratio / (1.0 + ni * ratio);
            let mut rsum = 0.0;
            for &(x, y) in g {
                let r = y - beta[0] - beta[1] * x;
                q += r * r;
                rsum += r;
            }
            q -= c * rsum * rsum;
        }
        let n = self.n as f64;
        let two_pi = std::f64::consts::TAU;
        let (var_resid, log_likelihood) = match method {
            LmmMethod::Ml => {
                let s2 = q / n;
                (s2, -0.5 * n * ((two_pi * s2).ln() + 1.0) - 0.5 * logdet)
            }
            LmmMethod::Reml => {
                let df = n - 2.0;
                let s2 = q / df;
                (s2, -0.5 * df * ((two_pi * s2).ln() + 1.0) - 0.5 * logdet - 0.5 * det.ln())
            }
        };
        Ok(ProfilePoint { ratio, log_likelihood, beta, var_resid })
    }

    fn finish(&self, p: ProfilePoint, method: LmmMethod, converged: bool, at_boundary: bool) -> MixedModelFit {
        let beta1 = p.beta[1];
        let beta0 = p.beta[0] + self.y_mean - beta1 * self.x_mean;
        let var_resid = p.var_resid;
        let var_group = p.ratio * var_resid;
        let n = self.n as f64;
        let fitted_mean = beta1 * self.x_centered.iter().sum::<f64>() / n;
        let var_fixed = self
            .x_centered
            .iter()
            .map(|x| (beta1 * x - fitted_mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        let denom = var_fixed + var_group + var_resid;
        MixedModelFit {
            beta0,
            beta1,
            var_group,
            var_resid,
            variance_ratio: p.ratio,
            r2_marginal: var_fixed / denom,
            r2_conditional: (var_fixed + var_group) / denom,
            log_likelihood: p.log_likelihood,
            converged,
            at_boundary,
            method,
            n_obs: self.n,
            n_groups: self.groups.len(),
        }
    }

    pub fn fit(&self, method: LmmMethod) -> Result<MixedModelFit, LmmError> {
        let (lo, hi) = (RATIO_MIN.ln(), RATIO_MAX.ln());
        let theta = |i: usize| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64;
        let eval = |t: f64| self.profile(t.exp(), method);

        let grid = (0..GRID_POINTS).map(|i| eval(theta(i))).collect::<Result<Vec<_>, _>>()?;
        let best = (0..GRID_POINTS)
            .max_by(|&a, &b| grid[a].log_likelihood.total_cmp(&grid[b].log_likelihood))
            .expect("non-empty grid");
        let mut a = theta(best.saturating_sub(1));
        let mut b = theta((best + 1).min(GRID_POINTS - 1));

        // golden-section maximisation on [a, b]
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = eval(c)?.log_likelihood;
        let mut fd = eval(d)?.log_likelihood;
        let mut iter = 0;
        while (b - a) > REL_TOL * (1.0 + a.abs().max(b.abs())) {
            iter += 1;
            if iter > MAX_ITER {
                return Err(LmmError::NonConvergence(MAX_ITER));
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = eval(c)?.log_likelihood;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = eval(d)?.log_likelihood;
            }
        }
        let mut opt = eval((a + b) / 2.0)?;
        // the grid point itself (possibly a bracket edge) may be better
        for cand in [&grid[best], &grid[0], &grid[GRID_POINTS - 1]] {
            if cand.log_likelihood > opt.log_likelihood {
                opt = *cand;
            }
        }
        let t_opt = opt.ratio.ln();
        let at_boundary = (t_opt - lo).abs() < 1e-6 || (t_opt - hi).abs() < 1e-6;
        Ok(self.finish(opt, method, true, at_boundary))
    }
}

/// Fits the random-intercept model by maximising the profiled likelihood.
pub fn fit_random_intercept<G: Ord + Clone>(
    y: &[f64],
    x: &[f64],
    group: &[G],
    method: LmmMethod,
) -> Result<MixedModelFit, LmmError> {
    MixedModelData::new(y, x, group)?.fit(method)
}
