//! ε-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved over β = α − α* with Σβ = 0 and |β| ≤ C by updating
//! the maximal violating pair, each step maximizing the piecewise quadratic
//! dual exactly along the pair direction.

use crate::data::{FeatureVector, N_FEATURES};
use crate::error::{Error, Result};

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

pub fn kernel_matrix(rows: &[[f64; N_FEATURES]], gamma: f64) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in 0..i {
            let v = rbf_kernel(&rows[i], &rows[j], gamma);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrConfig {
    pub c: f64,
    /// Tube half-width in standardized target units.
    pub epsilon: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig {
            c: 1.0,
            epsilon: 0.1,
            gamma: 1.0 / N_FEATURES as f64,
            tol: 1e-3,
            max_iter: 200_000,
        }
    }
}

impl SvrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidConfig(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    /// β_i = α_i − α_i* per training row.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub config: SvrConfig,
    /// Standardized training inputs.
    pub rows: Vec<[f64; N_FEATURES]>,
    pub input_mean: [f64; N_FEATURES],
    pub input_std: [f64; N_FEATURES],
    pub target_mean: f64,
    pub target_std: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Dual objective sampled once per n updates, plus the final value.
    pub objective_history: Vec<f64>,
}

impl SvrModel {
    pub fn standardize(&self, x: &[f64; N_FEATURES]) -> [f64; N_FEATURES] {
        std::array::from_fn(|i| (x[i] - self.input_mean[i]) / self.input_std[i])
    }

    /// Output in standardized target units for an already standardized input.
    pub fn decision(&self, z: &[f64; N_FEATURES]) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.rows)
            .filter(|(b, _)| **b != 0.0)
            .map(|(b, r)| b * rbf_kernel(r, z, self.config.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        let z = self.standardize(&x.complete()?);
        Ok(self.decision(&z) * self.target_std + self.target_mean)
    }

    pub fn support_count(&self) -> usize {
        self.coefficients.iter().filter(|b| **b != 0.0).count()
    }
}

/// ½βᵀKβ − yᵀβ + ε‖β‖₁ negated, i.e. the quantity the solver maximizes.
pub fn dual_objective(k: &[Vec<f64>], y: &[f64], beta: &[f64], epsilon: f64) -> f64 {
    let n = beta.len();
    let mut quad = 0.0;
    for i in 0..n {
        if beta[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += beta[i] * beta[j] * k[i][j];
        }
    }
    -0.5 * quad + y.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() - epsilon * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Best step t for β_i += t, β_j −= t. Returns (t, gain in the dual).
fn pair_step(eta: f64, g: f64, bi: f64, bj: f64, c: f64, eps: f64) -> (f64, f64) {
    let lo = (-c - bi).max(bj - c);
    let hi = (c - bi).min(bj + c);
    let delta = |t: f64| -0.5 * eta * t * t + g * t - eps * ((bi + t).abs() - bi.abs() + (bj - t).abs() - bj.abs());
    let mut knots = vec![lo, hi];
    for k in [-bi, bj] {
        if k > lo && k < hi {
            knots.push(k);
        }
    }
    knots.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
    let mut best = (0.0, 0.0);
    let mut consider = |t: f64| {
        let d = delta(t);
        if d > best.1 {
            best = (t, d);
        }
    };
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        consider(a);
        consider(b);
        if eta > 0.0 && b > a {
            let mid = 0.5 * (a + b);
            let si = (bi + mid).signum();
            let sj = (bj - mid).signum();
            let t = ((g - eps * (si - sj)) / eta).clamp(a, b);
            consider(t);
        }
    }
    best
}

pub fn fit_svr(x: &[FeatureVector], y: &[f64], cfg: &SvrConfig) -> Result<SvrModel> {
    cfg.validate()?;
    if x.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let raw: Vec<[f64; N_FEATURES]> = x.iter().map(|f| f.complete()).collect::<Result<_>>()?;
    let n = raw.len();
    let mut mean = [0.0; N_FEATURES];
    let mut std = [0.0; N_FEATURES];
    for j in 0..N_FEATURES {
        mean[j] = raw.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = raw.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n as f64;
        std[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let rows: Vec<[f64; N_FEATURES]> = raw
        .iter()
        .map(|r| std::array::from_fn(|j| (r[j] - mean[j]) / std[j]))
        .collect();
    let target_mean = y.iter().sum::<f64>() / n as f64;
    let tvar = y.iter().map(|v| (v - target_mean).powi(2)).sum::<f64>() / n as f64;
    let target_std = if tvar > 0.0 { tvar.sqrt() } else { 1.0 };
    let ys: Vec<f64> = y.iter().map(|v| (v - target_mean) / target_std).collect();

    let (coefficients, bias, converged, iterations, objective_history) = solve_dual(&kernel_matrix(&rows, cfg.gamma), &ys, cfg);
    Ok(SvrModel {
        coefficients,
        bias,
        config: *cfg,
        rows,
        input_mean: mean,
        input_std: std,
        target_mean,
        target_std,
        converged,
        iterations,
        objective_history,
    })
}

/// Solves the ε-SVR dual for a precomputed kernel. Returns
/// (β, b, converged, iterations, objective history).
pub fn solve_dual(k: &[Vec<f64>], y: &[f64], cfg: &SvrConfig) -> (Vec<f64>, f64, bool, usize, Vec<f64>) {
    let n = y.len();
    let (c, eps) = (cfg.c, cfg.epsilon);
    let mut beta = vec![0.0; n];
    // f[i] = (Kβ)_i
    let mut f = vec![0.0; n];
    let mut objective = 0.0;
    let mut history = vec![objective];
    let mut converged = false;
    let mut iterations = 0;
    let mut bias;

    loop {
        // Largest derivative for raising some β_i, smallest for lowering some β_j.
        let mut up = (f64::NEG_INFINITY, usize::MAX);
        let mut low = (f64::INFINITY, usize::MAX);
        for i in 0..n {
            let g = y[i] - f[i];
            if beta[i] < c {
                let u = g - if beta[i] >= 0.0 { eps } else { -eps };
                if u > up.0 {
                    up = (u, i);
                }
            }
            if beta[i] > -c {
                let l = g - if beta[i] > 0.0 { eps } else { -eps };
                if l < low.0 {
                    low = (l, i);
                }
            }
        }
        bias = if up.1 == usize::MAX || low.1 == usize::MAX {
            0.0
        } else {
            0.5 * (up.0 + low.0)
        };
        if up.1 == usize::MAX || low.1 == usize::MAX || up.0 - low.0 <= cfg.tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
        let (i, j) = (up.1, low.1);
        let eta = (k[i][i] + k[j][j] - 2.0 * k[i][j]).max(0.0);
        let g = (y[i] - f[i]) - (y[j] - f[j]);
        let (t, gain) = pair_step(eta, g, beta[i], beta[j], c, eps);
        iterations += 1;
        if t == 0.0 {
            // No improving step along the chosen pair; the iterate is optimal
            // up to rounding.
            converged = true;
            break;
        }
        beta[i] = (beta[i] + t).clamp(-c, c);
        beta[j] = (beta[j] - t).clamp(-c, c);
        for r in 0..n {
            f[r] += t * (k[r][i] - k[r][j]);
        }
        objective += gain;
        if iterations % n.max(1) == 0 {
            history.push(objective);
        }
    }
    history.push(objective);
    (beta, bias, converged, iterations, history)
}
