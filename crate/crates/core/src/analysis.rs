//! Closed-form estimators and nonlinear least-squares fits for the measured
//! quantities: nucleus-number and strain estimates, dephasing-time and
//! Q-factor projections, initialization-fidelity bounds, and the damped /
//! stretched / oscillating fit models used on the time traces.
//!
//! Times are in the unit the data comes in (us for the simulator's own
//! traces), frequencies in ordinary MHz so the published arithmetic
//! reproduces digit for digit.

use crate::{Result, SimError};

// ---------------------------------------------------------------------------
// fit models
// ---------------------------------------------------------------------------

/// The fit models appearing in the analysis pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModelId {
    /// `I(t) = Theta(t - t0) [(I0 - Iend) exp(-(t - t0) Gamma) + Iend]`,
    /// `t0` fixed by the equal-area constraint.
    SpinPumping,
    /// `v(t) = v0 exp(-(t/T2)^alpha)`
    RamseyStretched,
    /// `C(t) = C0 sin(2 pi nu t + phi) exp(-(t/T2)^alpha) + B`
    MagnonRamsey,
    /// `C(t) = C0 sin(2 pi nu t + phi) + B`
    UndampedSine,
    /// `p(t) = (0.5 - p0)(1 - exp(-t/T1)) + p0`
    T1Saturation,
    /// `V(t) = A exp(-(t/Ta)^alpha) + B exp(-(t/Tb)^beta)`
    TwoExponential,
    /// `V(t) = A exp(-(t/Ta)^alpha)`
    SingleStretched,
}

impl FitModelId {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "spin_pumping" => FitModelId::SpinPumping,
            "ramsey_stretched" => FitModelId::RamseyStretched,
            "magnon_ramsey" => FitModelId::MagnonRamsey,
            "undamped_sine" => FitModelId::UndampedSine,
            "t1_saturation" => FitModelId::T1Saturation,
            "two_exponential" => FitModelId::TwoExponential,
            "single_stretched" => FitModelId::SingleStretched,
            other => {
                return Err(SimError::Config(format!("unknown fit model '{other}'")));
            }
        })
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            FitModelId::SpinPumping => &["i0", "i_end", "gamma"],
            FitModelId::RamseyStretched => &["v0", "t2_star", "alpha"],
            FitModelId::MagnonRamsey => &["c0", "nu", "phi", "t2_mag", "alpha", "b"],
            FitModelId::UndampedSine => &["c0", "nu", "phi", "b"],
            FitModelId::T1Saturation => &["p0", "t1"],
            FitModelId::TwoExponential => &["a", "t_a", "alpha", "b", "t_b", "beta"],
            FitModelId::SingleStretched => &["a", "t_a", "alpha"],
        }
    }

    /// Per-parameter (lower, upper) bounds, enforced by projection.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        const FREE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);
        const POS: (f64, f64) = (1e-12, f64::INFINITY);
        match self {
            FitModelId::SpinPumping => vec![FREE, FREE, POS],
            FitModelId::RamseyStretched => vec![FREE, POS, POS],
            FitModelId::MagnonRamsey => vec![FREE, POS, FREE, POS, POS, FREE],
            FitModelId::UndampedSine => vec![FREE, POS, FREE, FREE],
            FitModelId::T1Saturation => vec![FREE, POS],
            FitModelId::TwoExponential => vec![FREE, POS, POS, FREE, POS, POS],
            FitModelId::SingleStretched => vec![FREE, POS, POS],
        }
    }

    pub fn n_params(&self) -> usize {
        self.param_names().len()
    }

    /// Model value at `t`; `aux` is the equal-area `t0` for the spin-pumping
    /// model and unused otherwise.
    pub fn eval(&self, t: f64, p: &[f64], aux: f64) -> f64 {
        match self {
            FitModelId::SpinPumping => {
                let (i0, i_end, gamma) = (p[0], p[1], p[2]);
                if t < aux {
                    0.0
                } else {
                    (i0 - i_end) * (-(t - aux) * gamma).exp() + i_end
                }
            }
            FitModelId::RamseyStretched => p[0] * stretched(t, p[1], p[2]),
            FitModelId::MagnonRamsey => {
                p[0] * (std::f64::consts::TAU * p[1] * t + p[2]).sin() * stretched(t, p[3], p[4])
                    + p[5]
            }
            FitModelId::UndampedSine => {
                p[0] * (std::f64::consts::TAU * p[1] * t + p[2]).sin() + p[3]
            }
            FitModelId::T1Saturation => (0.5 - p[0]) * (1.0 - (-t / p[1]).exp()) + p[0],
            FitModelId::TwoExponential => {
                p[0] * stretched(t, p[1], p[2]) + p[3] * stretched(t, p[4], p[5])
            }
            FitModelId::SingleStretched => p[0] * stretched(t, p[1], p[2]),
        }
    }

    /// Resolve the auxiliary quantity entering `eval`. For the spin-pumping
    /// model this is the onset time `t0`, chosen by bisection so the fit and
    /// the data enclose equal areas (trapezoidal rule on the data grid).
    pub fn resolve_aux(&self, data: &FitData, p: &[f64]) -> f64 {
        match self {
            FitModelId::SpinPumping => {
                // Data area by trapezoid on the measured grid, model area in
                // closed form: binned (histogram) data carries the onset
                // area exactly, so the two agree to curvature corrections.
                let data_area = trapezoid(&data.t, &data.y);
                let span = data.t.last().unwrap() - data.t[0];
                let t_min = data.t[0];
                let t_max = *data.t.last().unwrap();
                let (i0, i_end, gamma) = (p[0], p[1], p[2]);
                let area = |t0: f64| {
                    if t0 >= t_max {
                        return 0.0;
                    }
                    let start = t0.max(t_min);
                    (i0 - i_end) / gamma
                        * ((-(start - t0) * gamma).exp() - (-(t_max - t0) * gamma).exp())
                        + i_end * (t_max - start)
                };
                // area(t0) peaks at t0 = t_min: decreasing for later onsets,
                // increasing when the onset extends backward in time (the
                // decay then happens before the window)
                let (mut lo, mut hi, decreasing) = if area(t_min) >= data_area {
                    (t_min, t_max, true)
                } else {
                    (t_min - span, t_min, false)
                };
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if (area(mid) > data_area) == decreasing {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-14 * span.max(1.0) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
            _ => 0.0,
        }
    }
}

fn stretched(t: f64, tau: f64, alpha: f64) -> f64 {
    (-(t.max(0.0) / tau).powf(alpha)).exp()
}

fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tt, yy)| 0.5 * (tt[1] - tt[0]) * (yy[0] + yy[1]))
        .sum()
}

/// Measured samples for a fit: abscissa, ordinate, optional 1-sigma errors.
#[derive(Debug, Clone)]
pub struct FitData {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl FitData {
    pub fn new(t: Vec<f64>, y: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        if t.len() != y.len() || t.is_empty() {
            return Err(SimError::Config("fit data must have equal nonzero lengths".into()));
        }
        if let Some(s) = &sigma {
            if s.len() != t.len() || s.iter().any(|&v| !(v > 0.0)) {
                return Err(SimError::Config("sigma column must be positive".into()));
            }
        }
        Ok(FitData { t, y, sigma })
    }

    fn weight(&self, i: usize) -> f64 {
        match &self.sigma {
            Some(s) => 1.0 / s[i],
            None => 1.0,
        }
    }
}

/// Outcome of a Levenberg-Marquardt minimization.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Covariance of the parameters from the Jacobian at the optimum. With
    /// unit weights it is scaled by the reduced chi-square.
    pub covariance: Vec<Vec<f64>>,
    /// Root of the weighted squared-residual sum at the optimum.
    pub residual_norm: f64,
    pub iterations: usize,
}

impl FitResult {
    pub fn param_errors(&self) -> Vec<f64> {
        (0..self.params.len()).map(|i| self.covariance[i][i].max(0.0).sqrt()).collect()
    }
}

/// Weighted Levenberg-Marquardt minimization of the squared residuals of a
/// [`FitModelId`] against data, with bounds enforced by projection and the
/// covariance taken from the Jacobian at the optimum.
pub fn fit_least_squares(
    model: FitModelId,
    data: &FitData,
    initial: &[f64],
) -> Result<FitResult> {
    let k = model.n_params();
    if initial.len() != k {
        return Err(SimError::Config(format!(
            "model needs {k} initial parameters, got {}",
            initial.len()
        )));
    }
    if data.t.len() < k {
        return Err(SimError::Config(format!(
            "need at least {k} data points, got {}",
            data.t.len()
        )));
    }
    if initial.iter().any(|p| !p.is_finite()) {
        return Err(SimError::Config("initial guess must be finite".into()));
    }
    let bounds = model.bounds();
    let project = |p: &mut [f64]| {
        for (v, (lo, hi)) in p.iter_mut().zip(&bounds) {
            *v = v.clamp(*lo, *hi);
        }
    };

    let n = data.t.len();
    let residuals = |p: &[f64]| -> Vec<f64> {
        let aux = model.resolve_aux(data, p);
        (0..n)
            .map(|i| (data.y[i] - model.eval(data.t[i], p, aux)) * data.weight(i))
            .collect()
    };
    let cost_of = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let mut p: Vec<f64> = initial.to_vec();
    project(&mut p);
    let mut r = residuals(&p);
    let mut cost = cost_of(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;

    let jacobian = |p: &[f64]| -> Vec<Vec<f64>> {
        // central differences of the residual vector
        let mut cols = Vec::with_capacity(k);
        for a in 0..k {
            let h = 1e-7 * p[a].abs().max(1e-4);
            let mut pp = p.to_vec();
            pp[a] = p[a] + h;
            let rp = residuals(&pp);
            pp[a] = p[a] - h;
            let rm = residuals(&pp);
            cols.push(
                rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<f64>>(),
            );
        }
        cols
    };

    let mut jtj = vec![vec![0.0; k]; k];
    for _ in 0..500 {
        iterations += 1;
        let cols = jacobian(&p);
        for a in 0..k {
            for b in 0..k {
                jtj[a][b] = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
            }
        }
        // cols hold d(residual)/d(param) with residual = y - f, so the
        // Gauss-Newton step is p - (JtJ + lambda D)^-1 Jt r
        let grad: Vec<f64> =
            (0..k).map(|a| cols[a].iter().zip(&r).map(|(x, y)| x * y).sum()).collect();

        let mut improved = false;
        for _ in 0..40 {
            let mut lhs = jtj.clone();
            for a in 0..k {
                lhs[a][a] += lambda * jtj[a][a].max(1e-30);
            }
            let delta = match solve_linear(&lhs, &grad) {
                Some(d) => d,
                None => {
                    return Err(SimError::Numerical(format!(
                        "singular Jacobian at parameters {p:?}"
                    )))
                }
            };
            let mut candidate: Vec<f64> =
                p.iter().zip(&delta).map(|(v, d)| v - d).collect();
            project(&mut candidate);
            let rc = residuals(&candidate);
            let cc = cost_of(&rc);
            if cc.is_finite() && cc <= cost {
                let step = candidate
                    .iter()
                    .zip(&p)
                    .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
                    .fold(0.0, f64::max);
                p = candidate;
                r = rc;
                cost = cc;
                lambda = (lambda / 3.0).max(1e-14);
                improved = true;
                if step < 1e-10 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e14 {
                break;
            }
        }
        if converged || !improved {
            converged = converged || cost.is_finite();
            break;
        }
    }
    if !converged {
        return Err(SimError::Numerical(format!(
            "fit did not converge after {iterations} iterations; last parameters {p:?}, cost {cost}"
        )));
    }

    // covariance from the Jacobian at the optimum
    let cols = jacobian(&p);
    for a in 0..k {
        for b in 0..k {
            jtj[a][b] = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
        }
    }
    let mut covariance = match invert(&jtj) {
        Some(c) => c,
        None => {
            return Err(SimError::Numerical(
                "singular Jacobian at the optimum; covariance unavailable".into(),
            ))
        }
    };
    if data.sigma.is_none() && n > k {
        let scale = cost / (n - k) as f64;
        for row in &mut covariance {
            for v in row {
                *v *= scale;
            }
        }
    }

    Ok(FitResult { params: p, covariance, residual_norm: cost.sqrt(), iterations })
}

fn solve_linear(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let k = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..k {
        let (pivot, max) = (col..k)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if max < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in col + 1..k {
            let f = m[r][col] / m[col][col];
            for c in col..k {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let mut acc = rhs[r];
        for c in r + 1..k {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Some(x)
}

fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let k = a.len();
    let mut out = vec![vec![0.0; k]; k];
    for col in 0..k {
        let mut e = vec![0.0; k];
        e[col] = 1.0;
        let x = solve_linear(a, &e)?;
        for r in 0..k {
            out[r][col] = x[r];
        }
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// closed-form estimators
// ---------------------------------------------------------------------------

/// Lower bound on the optical spin-initialization fidelity from the
/// fluorescence levels at the start and end of the pumping pulse:
/// `F >= 1 - I_end / I0`.
pub fn estimate_init_fidelity(i0: f64, i_end: f64) -> Result<f64> {
    if !(i0 > 0.0) {
        return Err(SimError::Domain("I0 must be > 0".into()));
    }
    if !(0.0..=i0).contains(&i_end) {
        return Err(SimError::Domain("require 0 <= I_end <= I0".into()));
    }
    Ok(1.0 - i_end / i0)
}

/// Moments of the hyperfine-coupling distribution for a Gaussian electron
/// envelope of width `sigma`: `M_k = sum_i a_i^k` converted to integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeMoments {
    pub sigma: f64,
    pub a_total: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

/// Closed-form envelope moments: `M1 = A`,
/// `M2 = A^2 / (sigma^3 sqrt(8) pi^(3/2))`,
/// `M3 = A^3 / (sigma^6 sqrt(27) pi^3)`.
pub fn envelope_moments(sigma: f64, a_total: f64) -> Result<EnvelopeMoments> {
    if !(sigma > 0.0) {
        return Err(SimError::Domain("sigma must be > 0".into()));
    }
    let pi = std::f64::consts::PI;
    Ok(EnvelopeMoments {
        sigma,
        a_total,
        m1: a_total,
        m2: a_total * a_total / (sigma.powi(3) * 8f64.sqrt() * pi.powf(1.5)),
        m3: a_total.powi(3) / (sigma.powi(6) * 27f64.sqrt() * pi.powi(3)),
    })
}

/// Effective nucleus number defined through the second moment:
/// `N = sigma^3 sqrt(8) pi^(3/2)`.
pub fn effective_n(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(SimError::Domain("sigma must be > 0".into()));
    }
    Ok(sigma.powi(3) * 8f64.sqrt() * std::f64::consts::PI.powf(1.5))
}

/// Geometric enhancement of the collective Knight shift over the uniform
/// model: `M3/M2 * N/A = 8 / sqrt(27) ~ 1.54`.
pub fn knight_factor() -> f64 {
    8.0 / 27f64.sqrt()
}

/// Effective nucleus numbers from the measured differential Knight shift:
/// `N_species = 1.54 c A / delta_nu` and `N_total = 2 N_species / c`.
pub fn estimate_nuclei(delta_nu_mhz: f64, a_total_mhz: f64, abundance: f64) -> Result<(f64, f64)> {
    if !(delta_nu_mhz > 0.0) {
        return Err(SimError::Domain("delta_nu must be > 0".into()));
    }
    if !(abundance > 0.0 && abundance <= 1.0) {
        return Err(SimError::Domain("abundance must be in (0, 1]".into()));
    }
    let n_species = knight_factor() * abundance * a_total_mhz / delta_nu_mhz;
    Ok((n_species, 2.0 * n_species / abundance))
}

/// Strain-induced non-collinear coupling `a B_Q / w_n`, reported in kHz.
pub fn strain_noncollinear(a_mhz: f64, b_q_mhz: f64, larmor_mhz: f64) -> Result<f64> {
    if !(larmor_mhz > 0.0) {
        return Err(SimError::Domain("larmor frequency must be > 0".into()));
    }
    Ok(a_mhz * b_q_mhz / larmor_mhz * 1e3)
}

/// Inhomogeneous dephasing time implied by a Gaussian satellite linewidth:
/// `T2* = sqrt(2) sqrt(8 ln 2) / (2 pi dv)`, divided by the quadrupolar
/// moment ratio to convert between gallium isotopes. Returns us for a kHz
/// linewidth.
pub fn quadrupolar_t2(fwhm_khz: f64, moment_ratio: f64) -> Result<f64> {
    if !(fwhm_khz > 0.0) {
        return Err(SimError::Domain("linewidth must be > 0".into()));
    }
    if !(moment_ratio > 0.0) {
        return Err(SimError::Domain("moment ratio must be > 0".into()));
    }
    let fwhm_mhz = fwhm_khz * 1e-3;
    let t2 = std::f64::consts::SQRT_2 * (8.0 * 2f64.ln()).sqrt()
        / (std::f64::consts::TAU * fwhm_mhz);
    Ok(t2 / moment_ratio)
}

/// Electron quantization-axis tilt from the g-factors along the two in-plane
/// crystal axes: `tan(phi) = (g110 - g_m110) / (g110 + g_m110)`.
pub fn tilt_from_g(g_110: f64, g_m110: f64) -> Result<f64> {
    let denom = g_110 + g_m110;
    if denom == 0.0 {
        return Err(SimError::Domain("degenerate g-factor sum".into()));
    }
    Ok(((g_110 - g_m110) / denom).atan())
}

/// Quality factor from a fitted relaxation time and the probe Rabi frequency:
/// `Q = T1 f` in the undriven convention (`T1 = Q / f`), halved for a
/// spin-locked measurement (`T1 = 2 Q / f`).
pub fn estimate_q(t1_us: f64, f_rabi_mhz: f64, spin_locked: bool) -> Result<f64> {
    if !(t1_us > 0.0 && f_rabi_mhz > 0.0) {
        return Err(SimError::Domain("T1 and Rabi frequency must be > 0".into()));
    }
    let q = t1_us * f_rabi_mhz;
    Ok(if spin_locked { q / 2.0 } else { q })
}
