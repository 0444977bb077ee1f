//! Truncated collective-basis Hilbert space and the operators acting on it.
//!
//! The simulation space is a product of the electron spin-1/2 and one
//! truncated collective mode per nuclear species. Each mode keeps a window
//! of consecutive `|j,m>` levels around a reference projection; everything
//! else is dense complex linear algebra on the resulting product space
//! (dimension 90 for the default `[2, 3, 3, 5]` layout).

use num_complex::Complex64 as C64;

use crate::{Result, SimError};

/// Tolerance for the physical-range check `-j <= m <= j`.
pub const LADDER_DOMAIN_TOL: f64 = 1e-9;

/// Per-isotope material constants.
///
/// Frequencies are ordinary frequencies in MHz. `hyperfine_total_mhz` is the
/// material constant `A` of the species and `hyperfine_per_nucleus_mhz` the
/// estimated single-nucleus coupling `a`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpeciesParams {
    pub name: String,
    /// Nuclear spin magnitude I (3/2 for all species of the host material).
    pub spin: f64,
    /// Larmor frequency at the operating field, MHz.
    pub larmor_mhz: f64,
    /// Total hyperfine material constant A, MHz.
    pub hyperfine_total_mhz: f64,
    /// Single-nucleus hyperfine coupling a, MHz.
    pub hyperfine_per_nucleus_mhz: f64,
    /// Isotopic abundance (unit-cell concentration), in (0, 1].
    pub abundance: f64,
    /// Effective number of nuclei of this species.
    pub effective_count: f64,
}

impl SpeciesParams {
    pub fn gallium69() -> Self {
        SpeciesParams {
            name: "69Ga".into(),
            spin: 1.5,
            larmor_mhz: 45.99,
            hyperfine_total_mhz: 8700.0,
            hyperfine_per_nucleus_mhz: 0.269,
            abundance: 0.604,
            effective_count: 20536.0,
        }
    }

    pub fn gallium71() -> Self {
        SpeciesParams {
            name: "71Ga".into(),
            spin: 1.5,
            larmor_mhz: 58.41,
            hyperfine_total_mhz: 11100.0,
            hyperfine_per_nucleus_mhz: 0.342,
            abundance: 0.396,
            effective_count: 13464.0,
        }
    }

    pub fn arsenic75() -> Self {
        SpeciesParams {
            name: "75As".into(),
            spin: 1.5,
            larmor_mhz: 32.49,
            hyperfine_total_mhz: 10400.0,
            hyperfine_per_nucleus_mhz: 0.320,
            abundance: 1.0,
            effective_count: 34000.0,
        }
    }

    /// Default species set in layout order: 69Ga, 71Ga, 75As.
    pub fn default_table() -> Vec<SpeciesParams> {
        vec![Self::gallium69(), Self::gallium71(), Self::arsenic75()]
    }

    /// Alternative per-nucleus coupling `A / (N_tot / 2)` for a given total
    /// effective nucleus count.
    pub fn per_nucleus_from_total(&self, n_total: f64) -> f64 {
        self.hyperfine_total_mhz / (n_total / 2.0)
    }

    /// Maximal collective spin length `j0 = I * N`.
    pub fn max_spin_length(&self) -> f64 {
        self.spin * self.effective_count
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spin > 0.0) {
            return Err(SimError::Domain(format!("{}: spin must be > 0", self.name)));
        }
        if !(self.larmor_mhz > 0.0) {
            return Err(SimError::Domain(format!(
                "{}: larmor_mhz must be > 0",
                self.name
            )));
        }
        if !(self.abundance > 0.0 && self.abundance <= 1.0) {
            return Err(SimError::Domain(format!(
                "{}: abundance must be in (0, 1]",
                self.name
            )));
        }
        if !(self.effective_count >= 1.0) {
            return Err(SimError::Domain(format!(
                "{}: effective_count must be >= 1",
                self.name
            )));
        }
        Ok(())
    }
}

/// One truncated collective nuclear mode: total spin `j` and a window of
/// `n_levels` consecutive `m` values centered on `m_center`.
///
/// Non-half-integer `j` is allowed (the effective register model uses
/// `j = 0.6 * j0`). Window levels are ordered highest `m` first. Levels that
/// fall outside the physical range `|m| <= j` are kept in the basis but all
/// ladder amplitudes into or out of them are clipped to zero.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TruncatedMode {
    pub j: f64,
    pub m_center: f64,
    pub n_levels: usize,
}

impl TruncatedMode {
    pub fn new(j: f64, m_center: f64, n_levels: usize) -> Result<Self> {
        if !(j >= 0.0) || !j.is_finite() {
            return Err(SimError::Domain(format!(
                "mode spin length j must be a nonnegative real, got {j}"
            )));
        }
        if n_levels == 0 || n_levels % 2 == 0 {
            return Err(SimError::Domain(format!(
                "window size must be odd and positive, got {n_levels}"
            )));
        }
        Ok(TruncatedMode { j, m_center, n_levels })
    }

    /// `m` value of window level `k`, ordered highest first:
    /// `level(0) = m_center + (n-1)/2`, ..., `level(n-1) = m_center - (n-1)/2`.
    pub fn level(&self, k: usize) -> f64 {
        debug_assert!(k < self.n_levels);
        let half = (self.n_levels as isize - 1) / 2;
        self.m_center + (half - k as isize) as f64
    }

    /// Number of window levels outside the physical range `|m| <= j`
    /// (these carry zero ladder amplitude).
    pub fn clipped_levels(&self) -> usize {
        (0..self.n_levels)
            .filter(|&k| {
                let m = self.level(k);
                m > self.j + LADDER_DOMAIN_TOL || m < -self.j - LADDER_DOMAIN_TOL
            })
            .count()
    }
}

/// Ordered list of subsystem dimensions defining the product-space basis.
///
/// Index convention: basis state `(i_0, i_1, ..., i_{n-1})` maps to the
/// row-major flat index `((i_0 * d_1 + i_1) * d_2 + i_2) * ... + i_{n-1}`,
/// i.e. the leftmost subsystem is the slowest index. The default layout is
/// `[electron: 2, 69Ga: 3, 71Ga: 3, 75As: 5]` with total dimension 90.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SpaceLayout {
    dims: Vec<usize>,
}

impl SpaceLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(SimError::Domain(
                "layout must contain at least one nonzero dimension".into(),
            ));
        }
        Ok(SpaceLayout { dims })
    }

    /// Default layout: electron plus 3/3/5-level windows for 69Ga, 71Ga, 75As.
    pub fn default_register() -> Self {
        SpaceLayout { dims: vec![2, 3, 3, 5] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flat index of a product basis state.
    pub fn index(&self, indices: &[usize]) -> usize {
        debug_assert_eq!(indices.len(), self.dims.len());
        let mut idx = 0;
        for (i, (&k, &d)) in indices.iter().zip(&self.dims).enumerate() {
            debug_assert!(k < d, "subsystem {i} index {k} out of range {d}");
            let _ = i;
            idx = idx * d + k;
        }
        idx
    }

    /// Stride of one subsystem in the flat index (product of dimensions to
    /// its right).
    pub fn stride(&self, subsystem: usize) -> usize {
        self.dims[subsystem + 1..].iter().product()
    }
}

/// Dense complex square matrix tagged with its subsystem dimension list.
///
/// Row-major storage. The dimension metadata is either a full layout
/// (`dims.len() > 1`) or a single subsystem dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dims: Vec<usize>,
    dim: usize,
    data: Vec<C64>,
}

impl OperatorMatrix {
    pub fn zeros(dims: Vec<usize>) -> Self {
        let dim: usize = dims.iter().product();
        OperatorMatrix { dims, dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn zeros_dim(dim: usize) -> Self {
        Self::zeros(vec![dim])
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let mut m = Self::zeros(dims);
        for i in 0..m.dim {
            m.data[i * m.dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros_dim(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] += v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn scale(&mut self, s: C64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: C64) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(self.dims.clone());
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(self.dims.clone());
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                let crow = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    crow[j] += aik * brow[j];
                }
            }
        }
        out
    }

    /// Kronecker product; dimension metadata is concatenated.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (na, nb) = (self.dim, rhs.dim);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&rhs.dims);
        let mut out = Self::zeros(dims);
        let n = out.dim;
        for ia in 0..na {
            for ja in 0..na {
                let a = self.data[ia * na + ja];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for ib in 0..nb {
                    for jb in 0..nb {
                        let b = rhs.data[ib * nb + jb];
                        if b.re != 0.0 || b.im != 0.0 {
                            out.data[(ia * nb + ib) * n + (ja * nb + jb)] = a * b;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced infinity norm (max absolute row sum), used for exponential
    /// scaling estimates.
    pub fn inf_norm(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = self.data[i * n + j] - self.data[j * n + i].conj();
                err += d.norm_sqr();
            }
        }
        (2.0 * err).sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol * self.frobenius_norm().max(1.0)
    }
}

/// Standard spin-1/2 operator `S_x` (Pauli x over 2).
pub fn spin_half_x() -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(vec![2]);
    m.set(0, 1, C64::new(0.5, 0.0));
    m.set(1, 0, C64::new(0.5, 0.0));
    m
}

/// Standard spin-1/2 operator `S_y` (Pauli y over 2).
pub fn spin_half_y() -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(vec![2]);
    m.set(0, 1, C64::new(0.0, -0.5));
    m.set(1, 0, C64::new(0.0, 0.5));
    m
}

/// Standard spin-1/2 operator `S_z`; the electron basis is ordered
/// `|up> = 0`, `|down> = 1`.
pub fn spin_half_z() -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(vec![2]);
    m.set(0, 0, C64::new(0.5, 0.0));
    m.set(1, 1, C64::new(-0.5, 0.0));
    m
}

/// Collective ladder amplitude `<j,m+1| I+ |j,m> = sqrt(j(j+1) - m(m+1))`.
///
/// Returns 0 when the value under the root is <= 0 (top of the ladder).
/// `m` outside `[-j, j]` beyond tolerance is a domain error.
pub fn ladder_element(j: f64, m: f64) -> Result<f64> {
    if m > j + LADDER_DOMAIN_TOL || m < -j - LADDER_DOMAIN_TOL {
        return Err(SimError::Domain(format!(
            "ladder element out of range: m = {m}, j = {j}"
        )));
    }
    let under = j * (j + 1.0) - m * (m + 1.0);
    Ok(if under <= 0.0 { 0.0 } else { under.sqrt() })
}

/// Ladder amplitude with out-of-window clipping: window levels beyond the
/// physical range contribute zero amplitude instead of an error.
fn ladder_element_clipped(j: f64, m: f64) -> f64 {
    if m > j + LADDER_DOMAIN_TOL || m + 1.0 > j + LADDER_DOMAIN_TOL {
        return 0.0;
    }
    if m < -j - LADDER_DOMAIN_TOL {
        return 0.0;
    }
    let under = j * (j + 1.0) - m * (m + 1.0);
    if under <= 0.0 {
        0.0
    } else {
        under.sqrt()
    }
}

/// Collective raising operator on a truncated window.
///
/// With the window ordered highest `m` first, `I+` has the ladder amplitudes
/// on the first superdiagonal: entry `(k, k+1)` couples `level(k+1)` up to
/// `level(k)`. The lowering operator is the conjugate transpose.
pub fn raising_matrix(mode: &TruncatedMode) -> OperatorMatrix {
    let n = mode.n_levels;
    let mut m = OperatorMatrix::zeros(vec![n]);
    for k in 0..n - 1 {
        let amp = ladder_element_clipped(mode.j, mode.level(k + 1));
        m.set(k, k + 1, C64::new(amp, 0.0));
    }
    m
}

/// Collective lowering operator `I- = (I+)^dagger`.
pub fn lowering_matrix(mode: &TruncatedMode) -> OperatorMatrix {
    raising_matrix(mode).dagger()
}

/// Diagonal matrix of the window's `m` values (highest first).
pub fn z_matrix(mode: &TruncatedMode) -> OperatorMatrix {
    let n = mode.n_levels;
    let mut m = OperatorMatrix::zeros(vec![n]);
    for k in 0..n {
        m.set(k, k, C64::new(mode.level(k), 0.0));
    }
    m
}

/// Embed a single-subsystem operator into the product space by Kronecker
/// products with identities on every other subsystem.
pub fn embed(op: &OperatorMatrix, subsystem: usize, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    if subsystem >= layout.n_subsystems() {
        return Err(SimError::DimensionMismatch(format!(
            "subsystem index {subsystem} out of range for {}-part layout",
            layout.n_subsystems()
        )));
    }
    if op.dim() != layout.dims()[subsystem] {
        return Err(SimError::DimensionMismatch(format!(
            "operator dimension {} does not match subsystem {} dimension {}",
            op.dim(),
            subsystem,
            layout.dims()[subsystem]
        )));
    }
    let total = layout.total_dim();
    let left: usize = layout.dims()[..subsystem].iter().product();
    let right: usize = layout.dims()[subsystem + 1..].iter().product();
    let d = op.dim();
    let mut out = OperatorMatrix::zeros(layout.dims().to_vec());
    for l in 0..left {
        for a in 0..d {
            for b in 0..d {
                let v = op.get(a, b);
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                for r in 0..right {
                    let row = (l * d + a) * right + r;
                    let col = (l * d + b) * right + r;
                    out.set(row, col, v);
                }
            }
        }
    }
    debug_assert_eq!(out.dim(), total);
    Ok(out)
}
