//! Initial nuclear state sampling: thermal `|j,m>` states via the equivalent
//! spin-1/2 mapping, engineered dark and deviated-dark states, quasi-static
//! detuning noise, and assembly of the initial electro-nuclear density
//! matrix.
//!
//! All samplers are pure functions of their parameters and an explicit RNG;
//! per-sample generators are seeded as `seed_base + sample_index` so parallel
//! and serial runs agree bit for bit.

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::hilbert::{OperatorMatrix, SpaceLayout, TruncatedMode};
use crate::{Result, SimError};

/// Thermal distribution of the collective spin length `j` for an equal
/// mixture of `n_half` spin-1/2s in the infinite-temperature limit.
///
/// `p_j ∝ (2j+1)^2 / (j0+j+1) * C(2j0, j0+j) * 2^(-2j0)` with `j0 = n_half/2`,
/// evaluated in the log domain through the log-gamma function and normalized
/// explicitly.
#[derive(Debug, Clone)]
pub struct ThermalDistribution {
    n_half: u64,
    j_values: Vec<f64>,
    log_pmf: Vec<f64>,
    cdf: Vec<f64>,
}

/// Marginal distribution of the total spin length for `n_half` spin-1/2s.
pub fn thermal_j_pmf(n_half: u64) -> Result<ThermalDistribution> {
    if n_half == 0 {
        return Err(SimError::Domain("spin-1/2 count must be >= 1".into()));
    }
    let j0 = n_half as f64 / 2.0;
    let n_entries = (n_half / 2 + 1) as usize;
    let j_frac = if n_half % 2 == 1 { 0.5 } else { 0.0 };

    let ln2 = std::f64::consts::LN_2;
    let mut log_pmf = Vec::with_capacity(n_entries);
    let mut j_values = Vec::with_capacity(n_entries);
    for k in 0..n_entries {
        let j = j_frac + k as f64;
        // ln C(2j0, j0+j) = lnG(2j0+1) - lnG(j0+j+1) - lnG(j0-j+1)
        let ln_binom = libm::lgamma(2.0 * j0 + 1.0)
            - libm::lgamma(j0 + j + 1.0)
            - libm::lgamma(j0 - j + 1.0);
        let lp = 2.0 * (2.0 * j + 1.0).ln() - (j0 + j + 1.0).ln() + ln_binom
            - 2.0 * j0 * ln2;
        if !lp.is_finite() {
            return Err(SimError::Numerical(format!(
                "log probability not finite at j = {j} for n_half = {n_half}"
            )));
        }
        j_values.push(j);
        log_pmf.push(lp);
    }

    // normalize via logsumexp, then build the cumulative table
    let max_lp = log_pmf.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_norm = max_lp
        + log_pmf.iter().map(|lp| (lp - max_lp).exp()).sum::<f64>().ln();
    for lp in &mut log_pmf {
        *lp -= log_norm;
    }
    let mut cdf = Vec::with_capacity(n_entries);
    let mut acc = 0.0;
    for lp in &log_pmf {
        acc += lp.exp();
        cdf.push(acc);
    }
    let total = *cdf.last().unwrap();
    if (total - 1.0).abs() > 1e-9 {
        return Err(SimError::Numerical(format!(
            "thermal pmf normalization drift {total} for n_half = {n_half}"
        )));
    }
    *cdf.last_mut().unwrap() = 1.0;

    Ok(ThermalDistribution { n_half, j_values, log_pmf, cdf })
}

impl ThermalDistribution {
    pub fn n_half(&self) -> u64 {
        self.n_half
    }

    pub fn j_values(&self) -> &[f64] {
        &self.j_values
    }

    /// Normalized probabilities, exponentiated from the log table.
    pub fn pmf(&self) -> Vec<f64> {
        self.log_pmf.iter().map(|lp| lp.exp()).collect()
    }

    /// Inverse-CDF draw of the spin length.
    pub fn sample_j<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let pos = self.cdf.partition_point(|&c| c < u);
        self.j_values[pos.min(self.j_values.len() - 1)]
    }
}

/// Equivalent spin-1/2 count reproducing the `m` statistics of `n` nuclei of
/// spin `i`: `n_half = round(n * 4 I(I+1) / 3)` (exactly `5n` for I = 3/2).
pub fn equivalent_spin_half_count(n_nuclei: u64, spin: f64) -> u64 {
    (n_nuclei as f64 * 4.0 * spin * (spin + 1.0) / 3.0).round() as u64
}

/// Uniform draw of `m` from `{-j, -j+1, ..., j}`.
pub fn sample_m_uniform<R: Rng>(j: f64, rng: &mut R) -> f64 {
    let count = (2.0 * j).round() as u64 + 1;
    let k = rng.gen_range(0..count);
    -j + k as f64
}

/// Draw a thermal `(j, m)` pair for `n_nuclei` spins of magnitude `spin`.
pub fn sample_thermal<R: Rng>(
    dist: &ThermalDistribution,
    rng: &mut R,
) -> (f64, f64) {
    let j = dist.sample_j(rng);
    let m = sample_m_uniform(j, rng);
    (j, m)
}

/// Which stretched edge a polarized state occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationSign {
    /// `m = -j` edge (register dark state).
    Minus,
    /// `m = +j` edge (oppositely pumped species).
    Plus,
}

/// Requested initial state of one nuclear species.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NuclearStateSpec {
    /// Infinite-temperature mixture sampled through the spin-1/2 mapping.
    Thermal,
    /// Perfect dark state `|p j0, -+ p j0>`.
    Dark { polarization: f64, sign: PolarizationSign },
    /// Dark state with an integer deviation `dm` sampled from the discrete
    /// exponential (geometric) distribution `p(dm) ∝ exp(-dm / lambda)`.
    DeviatedDark { polarization: f64, sign: PolarizationSign, lambda: f64 },
}

/// A resolved `(j, m)` sample; `clipped` flags a deviation draw that exceeded
/// the physical range and was clamped to the opposite edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledState {
    pub j: f64,
    pub m: f64,
    pub clipped: bool,
}

/// Resolve a polarized state spec for a species with maximal spin length
/// `j0`.
pub fn polarized_state<R: Rng>(
    spec: &NuclearStateSpec,
    j0: f64,
    rng: &mut R,
) -> Result<SampledState> {
    match *spec {
        NuclearStateSpec::Thermal => Err(SimError::Domain(
            "thermal states are resolved through the thermal sampler".into(),
        )),
        NuclearStateSpec::Dark { polarization, sign } => {
            check_polarization(polarization)?;
            let j = polarization * j0;
            let m = match sign {
                PolarizationSign::Minus => -j,
                PolarizationSign::Plus => j,
            };
            Ok(SampledState { j, m, clipped: false })
        }
        NuclearStateSpec::DeviatedDark { polarization, sign, lambda } => {
            check_polarization(polarization)?;
            if lambda < 0.0 {
                return Err(SimError::Domain("lambda must be >= 0".into()));
            }
            let j = polarization * j0;
            let dm = sample_geometric_deviation(lambda, rng);
            let (m, clipped) = if dm > 2.0 * j {
                // beyond the opposite edge: clamp and flag
                (if sign == PolarizationSign::Plus { -j } else { j }, true)
            } else {
                match sign {
                    PolarizationSign::Plus => (j - dm, false),
                    PolarizationSign::Minus => (-j + dm, false),
                }
            };
            Ok(SampledState { j, m, clipped })
        }
    }
}

fn check_polarization(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(SimError::Domain(format!(
            "polarization fraction must be in (0, 1], got {p}"
        )));
    }
    Ok(())
}

/// Integer deviation from a discrete exponential: geometric with ratio
/// `exp(-1/lambda)`; degenerates to 0 as `lambda -> 0`.
fn sample_geometric_deviation<R: Rng>(lambda: f64, rng: &mut R) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let ln_q = -1.0 / lambda;
    let u: f64 = rng.gen();
    // floor(ln(1-u) / ln q); u in [0,1) keeps the argument positive
    ((1.0 - u).ln() / ln_q).floor()
}

/// Standard normal draw (Box-Muller), kept in-crate so the per-seed sample
/// streams are stable across dependency upgrades.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Quasi-static electron detuning draw for an inhomogeneous dephasing time
/// `t2_star_us`: zero-mean Gaussian with ordinary-frequency standard
/// deviation `sqrt(2) / (2 pi T2*)` MHz.
pub fn sample_detuning<R: Rng>(t2_star_us: f64, rng: &mut R) -> Result<f64> {
    if !(t2_star_us > 0.0) {
        return Err(SimError::Domain("T2* must be > 0".into()));
    }
    let sigma = detuning_sigma_mhz(t2_star_us);
    Ok(sigma * standard_normal(rng))
}

/// Standard deviation of the detuning distribution in MHz.
pub fn detuning_sigma_mhz(t2_star_us: f64) -> f64 {
    std::f64::consts::SQRT_2 / (std::f64::consts::TAU * t2_star_us)
}

/// How a sampled `m` is anchored inside its truncation window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowPlacement {
    /// Window centered on the sampled projection (thermal and deviated-dark
    /// states).
    Centered,
    /// Sample at the lowest window level so one raising step exists and
    /// lowering is annihilated (dark state at `m = -j`).
    LowestLevel,
    /// Mirror image for a dark state at `m = +j`.
    HighestLevel,
}

/// A species state mapped into its truncation window: the mode plus the
/// window level index holding the sampled projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedState {
    pub mode: TruncatedMode,
    pub level_index: usize,
}

/// Build the truncation window around a sampled `(j, m)`.
pub fn place_window(
    j: f64,
    m: f64,
    n_levels: usize,
    placement: WindowPlacement,
) -> Result<PlacedState> {
    let half = (n_levels - 1) / 2;
    let (m_center, level_index) = match placement {
        WindowPlacement::Centered => (m, half),
        WindowPlacement::LowestLevel => (m + half as f64, n_levels - 1),
        WindowPlacement::HighestLevel => (m - half as f64, 0),
    };
    let mode = TruncatedMode::new(j, m_center, n_levels)?;
    Ok(PlacedState { mode, level_index })
}

/// Placement rule for a state spec, per the window design: thermal samples
/// center the window, dark states sit at the window edge so the annihilated
/// ladder direction leaves the window, deviated dark states are centered on
/// the sampled value.
pub fn placement_for(spec: &NuclearStateSpec) -> WindowPlacement {
    match spec {
        NuclearStateSpec::Thermal => WindowPlacement::Centered,
        NuclearStateSpec::Dark { sign, .. } => match sign {
            PolarizationSign::Minus => WindowPlacement::LowestLevel,
            PolarizationSign::Plus => WindowPlacement::HighestLevel,
        },
        NuclearStateSpec::DeviatedDark { .. } => WindowPlacement::Centered,
    }
}

/// Initial electro-nuclear density matrix
/// `rho0 = (F |up><up| + (1-F) |down><down|) (x) |psi_nuc><psi_nuc|`
/// with `|psi_nuc>` the product of the placed window basis states.
pub fn initial_density_matrix(
    f_init: f64,
    placed: &[PlacedState],
    layout: &SpaceLayout,
) -> Result<OperatorMatrix> {
    if !(0.0..=1.0).contains(&f_init) {
        return Err(SimError::Domain(format!(
            "initialization fidelity must be in [0, 1], got {f_init}"
        )));
    }
    if placed.len() + 1 != layout.n_subsystems() {
        return Err(SimError::DimensionMismatch(format!(
            "{} placed states for a layout with {} nuclear subsystems",
            placed.len(),
            layout.n_subsystems() - 1
        )));
    }
    let mut indices = vec![0usize; layout.n_subsystems()];
    for (s, p) in placed.iter().enumerate() {
        if p.level_index >= layout.dims()[s + 1] {
            return Err(SimError::DimensionMismatch(format!(
                "window level {} outside subsystem {} dimension {}",
                p.level_index,
                s + 1,
                layout.dims()[s + 1]
            )));
        }
        indices[s + 1] = p.level_index;
    }
    let mut rho = OperatorMatrix::zeros(layout.dims().to_vec());
    indices[0] = 0;
    let up = layout.index(&indices);
    indices[0] = 1;
    let down = layout.index(&indices);
    rho.set(up, up, C64::new(f_init, 0.0));
    rho.set(down, down, C64::new(1.0 - f_init, 0.0));
    Ok(rho)
}
