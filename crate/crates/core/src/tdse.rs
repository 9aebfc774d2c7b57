//! Exact time-dependent Schrödinger integration in the truncated eigenbasis,
//!
//! ```text
//! i dpsi/dtau = (1/omega_L) [ diag(E_k) - lambda X cos(tau) ] psi
//! ```
//!
//! with a fixed-step classic fourth-order Runge-Kutta scheme. No silent
//! renormalization: the norm is checked at every sample and drift beyond
//! 1e-8 is an error asking for a finer step.
//!
//! Besides the lowest-n truncation this module can restrict the dynamics to
//! an arbitrary subset of levels, and can integrate the bare three-level
//! model (doublet plus upper level with couplings Omega12, Omega23) that the
//! closed-form solution refers to.

use num_complex::Complex64;

use crate::drive::DriveParams;
use crate::error::{Error, Result};
use crate::spectrum::{EigenSolution, Parity};

pub const NORM_TOLERANCE: f64 = 1e-8;

/// Complex amplitude vector over retained levels; unit norm within 1e-8.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidConfig("empty state vector".into()));
        }
        let norm_sq: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::StateCorruption(format!(
                "state norm^2 = {norm_sq} is not 1 within {NORM_TOLERANCE}"
            )));
        }
        Ok(Self { amps })
    }

    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::OutOfRange(format!("level {k} outside 0..{dim}")));
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[k] = Complex64::ONE;
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn population(&self, k: usize) -> f64 {
        self.amps[k].norm_sqr()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Integration window in the phase time tau = omega_L t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    tau_start: f64,
    tau_end: f64,
    dtau: f64,
}

impl TimeGrid {
    /// Default sampling: 2000 steps per optical cycle, sized so that norm
    /// drift over the default 200-cycle window stays well below 1e-8.
    pub const DEFAULT_DTAU: f64 = std::f64::consts::TAU / 2000.0;
    pub const DEFAULT_TAU_END: f64 = 400.0 * std::f64::consts::PI;

    pub fn new(tau_start: f64, tau_end: f64, dtau: f64) -> Result<Self> {
        if !tau_start.is_finite() || !tau_end.is_finite() || tau_end <= tau_start {
            return Err(Error::InvalidConfig(format!(
                "tau_end = {tau_end} must exceed tau_start = {tau_start}"
            )));
        }
        if !dtau.is_finite() || dtau <= 0.0 {
            return Err(Error::InvalidConfig(format!("dtau = {dtau} must be positive")));
        }
        Ok(Self { tau_start, tau_end, dtau })
    }

    pub fn tau_start(&self) -> f64 {
        self.tau_start
    }

    pub fn tau_end(&self) -> f64 {
        self.tau_end
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    /// Number of steps covering the window; the effective step divides the
    /// span exactly.
    pub fn n_steps(&self) -> usize {
        let span = self.tau_end - self.tau_start;
        ((span / self.dtau - 1e-9).ceil() as usize).max(1)
    }

    pub fn dtau_effective(&self) -> f64 {
        (self.tau_end - self.tau_start) / self.n_steps() as f64
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { tau_start: 0.0, tau_end: Self::DEFAULT_TAU_END, dtau: Self::DEFAULT_DTAU }
    }
}

/// Sampled per-level populations along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    pub taus: Vec<f64>,
    /// One row per sample, `n_levels` entries each.
    pub populations: Vec<Vec<f64>>,
    /// Population of the lower doublet, |c_0|^2 + |c_1|^2.
    pub doublet_total: Vec<f64>,
    pub n_levels: usize,
    /// Largest |norm^2 - 1| seen at any sample.
    pub max_norm_error: f64,
}

impl PopulationTrace {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Time series of a single level.
    pub fn level(&self, k: usize) -> Vec<f64> {
        self.populations.iter().map(|row| row[k]).collect()
    }

    pub fn max_of_level(&self, k: usize) -> f64 {
        self.populations.iter().map(|row| row[k]).fold(0.0, f64::max)
    }

    pub fn min_doublet(&self) -> f64 {
        self.doublet_total.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Split a level label into component tokens: a bare label like "0+", "0-",
/// "3+" or a raw index, or an equal-weight superposition like
/// "(0+ + 0-)/sqrt2" (the normalization suffix is implied and ignored).
fn parse_components(label: &str) -> Result<Vec<&str>> {
    let mut text = label.trim();
    if let Some(open) = text.strip_prefix('(') {
        let close = open
            .rfind(')')
            .ok_or_else(|| Error::UnknownLevel(format!("unbalanced parentheses in {label:?}")))?;
        let tail = open[close + 1..].trim();
        if !(tail.is_empty() || tail.starts_with('/')) {
            return Err(Error::UnknownLevel(format!("trailing {tail:?} in {label:?}")));
        }
        text = &open[..close];
    }
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(Error::UnknownLevel("empty level label".into()));
    }
    let mut components = Vec::new();
    let mut expect_label = true;
    for tok in tokens {
        if expect_label {
            components.push(tok);
        } else if tok != "+" {
            return Err(Error::UnknownLevel(format!(
                "expected '+' between components, found {tok:?}"
            )));
        }
        expect_label = !expect_label;
    }
    if expect_label {
        return Err(Error::UnknownLevel(format!("dangling '+' in {label:?}")));
    }
    Ok(components)
}

fn parse_label_indices(label: &str) -> Result<Vec<usize>> {
    parse_components(label)?.into_iter().map(single_label_index).collect()
}

/// Index of a single named level: "n+" -> 2n, "n-" -> 2n+1, digits -> index.
fn single_label_index(token: &str) -> Result<usize> {
    if let Ok(k) = token.parse::<usize>() {
        return Ok(k);
    }
    let (digits, sign) = token.split_at(token.len().saturating_sub(1));
    let n: usize = digits
        .parse()
        .map_err(|_| Error::UnknownLevel(format!("cannot parse level {token:?}")))?;
    match sign {
        "+" => Ok(2 * n),
        "-" => Ok(2 * n + 1),
        _ => Err(Error::UnknownLevel(format!("cannot parse level {token:?}"))),
    }
}

fn superposition(dim: usize, indices: &[usize]) -> Result<StateVector> {
    let mut amps = vec![Complex64::ZERO; dim];
    let w = Complex64::new(1.0 / (indices.len() as f64).sqrt(), 0.0);
    for &k in indices {
        if k >= dim {
            return Err(Error::OutOfRange(format!("level {k} outside 0..{dim}")));
        }
        if amps[k] != Complex64::ZERO {
            return Err(Error::UnknownLevel("repeated component in superposition".into()));
        }
        amps[k] = w;
    }
    StateVector::new(amps)
}

/// Unit state on a named level (or superposition) of an eigensolution.
/// Named labels are checked against the computed parities.
pub fn prepare_level(s: &EigenSolution, label: &str) -> Result<StateVector> {
    let indices = parse_label_indices(label)?;
    for &k in &indices {
        if k >= s.n_levels() {
            return Err(Error::OutOfRange(format!(
                "level {k} not among the {} retained levels",
                s.n_levels()
            )));
        }
        let expected = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
        if s.parity(k) != expected {
            return Err(Error::UnknownLevel(format!(
                "level {k} does not carry the parity its label implies"
            )));
        }
    }
    superposition(s.n_levels(), &indices)
}

/// Unit state in the three-level space {|1>, |2>, |3>} = {0+, 0-, 3+}.
pub fn prepare_three_level(label: &str) -> Result<StateVector> {
    let indices = parse_components(label)?
        .into_iter()
        .map(|tok| match tok {
            "0+" => Ok(0),
            "0-" => Ok(1),
            "3+" => Ok(2),
            _ => tok.parse::<usize>().ok().filter(|&k| k < 3).ok_or_else(|| {
                Error::UnknownLevel(format!(
                    "{tok:?} names no level of the three-level model (0+, 0-, 3+)"
                ))
            }),
        })
        .collect::<Result<Vec<usize>>>()?;
    superposition(3, &indices)
}

/// Right-hand side -i [diag(e) - c cos(tau) X] psi with precomputed
/// tau-unit coefficients.
struct Propagator {
    n: usize,
    energies: Vec<f64>,   // (E_k - shift) / omega_L
    coupling: Vec<f64>,   // row-major X (or Omega) matrix
    drive: f64,           // lambda / omega_L (or 1/omega_L for Omega form)
}

impl Propagator {
    fn rhs(&self, tau: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let c = self.drive * tau.cos();
        for i in 0..self.n {
            let row = &self.coupling[i * self.n..(i + 1) * self.n];
            let mut acc = Complex64::ZERO;
            for (x, p) in row.iter().zip(psi.iter()) {
                acc += x * p;
            }
            let h = self.energies[i] * psi[i] - c * acc;
            out[i] = Complex64::new(h.im, -h.re); // -i * h
        }
    }
}

/// Fixed-step RK4 over the grid; `dtau` may be negative (used by the
/// time-reversal checks). Samples every `stride` steps plus the endpoint.
fn integrate(
    prop: &Propagator,
    initial: &[Complex64],
    tau_start: f64,
    dtau: f64,
    n_steps: usize,
    stride: usize,
    doublet_levels: (Option<usize>, Option<usize>),
) -> Result<PopulationTrace> {
    let n = prop.n;
    let stride = stride.max(1);
    let mut psi = initial.to_vec();
    let mut k1 = vec![Complex64::ZERO; n];
    let mut k2 = vec![Complex64::ZERO; n];
    let mut k3 = vec![Complex64::ZERO; n];
    let mut k4 = vec![Complex64::ZERO; n];
    let mut tmp = vec![Complex64::ZERO; n];

    let samples = n_steps / stride + 2;
    let mut trace = PopulationTrace {
        taus: Vec::with_capacity(samples),
        populations: Vec::with_capacity(samples),
        doublet_total: Vec::with_capacity(samples),
        n_levels: n,
        max_norm_error: 0.0,
    };

    let record = |psi: &[Complex64], tau: f64, trace: &mut PopulationTrace| -> Result<()> {
        let row: Vec<f64> = psi.iter().map(|c| c.norm_sqr()).collect();
        let norm: f64 = row.iter().sum();
        let err = (norm - 1.0).abs();
        if err > NORM_TOLERANCE {
            return Err(Error::StepSize(format!(
                "norm drift {err:.3e} exceeds {NORM_TOLERANCE:.0e} at tau = {tau:.3}; reduce dtau"
            )));
        }
        trace.max_norm_error = trace.max_norm_error.max(err);
        let doublet = doublet_levels.0.map_or(0.0, |k| row[k])
            + doublet_levels.1.map_or(0.0, |k| row[k]);
        trace.taus.push(tau);
        trace.populations.push(row);
        trace.doublet_total.push(doublet);
        Ok(())
    };

    record(&psi, tau_start, &mut trace)?;
    for step in 0..n_steps {
        let tau = tau_start + step as f64 * dtau;
        prop.rhs(tau, &psi, &mut k1);
        for i in 0..n {
            tmp[i] = psi[i] + 0.5 * dtau * k1[i];
        }
        prop.rhs(tau + 0.5 * dtau, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = psi[i] + 0.5 * dtau * k2[i];
        }
        prop.rhs(tau + 0.5 * dtau, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = psi[i] + dtau * k3[i];
        }
        prop.rhs(tau + dtau, &tmp, &mut k4);
        for i in 0..n {
            psi[i] += dtau / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            record(&psi, tau_start + (step + 1) as f64 * dtau, &mut trace)?;
        }
    }
    Ok(trace)
}

/// Reduce `initial` onto `levels`, requiring all amplitude to live there.
fn restrict_initial(initial: &StateVector, levels: &[usize], full_dim: usize) -> Result<Vec<Complex64>> {
    if initial.dim() == levels.len() {
        return Ok(initial.amplitudes().to_vec());
    }
    if initial.dim() != full_dim {
        return Err(Error::ShapeMismatch(format!(
            "initial state has {} components, expected {} or {}",
            initial.dim(),
            levels.len(),
            full_dim
        )));
    }
    let mut reduced = vec![Complex64::ZERO; levels.len()];
    let mut captured = 0.0;
    for (slot, &k) in levels.iter().enumerate() {
        reduced[slot] = initial.amplitudes()[k];
        captured += reduced[slot].norm_sqr();
    }
    if (captured - initial.norm_sq()).abs() > 1e-12 {
        return Err(Error::OutOfRange(
            "initial state has amplitude outside the retained levels".into(),
        ));
    }
    Ok(reduced)
}

fn doublet_slots(levels: &[usize]) -> (Option<usize>, Option<usize>) {
    let slot_of = |level: usize| levels.iter().position(|&k| k == level);
    (slot_of(0), slot_of(1))
}

/// Integrate the driven dynamics truncated to an arbitrary subset of the
/// retained eigenlevels.
pub fn evolve_subset(
    s: &EigenSolution,
    d: &DriveParams,
    initial: &StateVector,
    grid: &TimeGrid,
    levels: &[usize],
    stride: usize,
) -> Result<PopulationTrace> {
    if levels.is_empty() {
        return Err(Error::InvalidConfig("empty level subset".into()));
    }
    for (i, &k) in levels.iter().enumerate() {
        if k >= s.n_levels() {
            return Err(Error::OutOfRange(format!(
                "subset level {k} not among the {} retained levels",
                s.n_levels()
            )));
        }
        if levels[..i].contains(&k) {
            return Err(Error::InvalidConfig(format!("subset repeats level {k}")));
        }
    }
    let m = levels.len();
    // centering the retained spectrum halves the fastest phase; populations
    // are unaffected (global phase)
    let e_min = levels.iter().map(|&k| s.energy(k)).fold(f64::INFINITY, f64::min);
    let e_max = levels.iter().map(|&k| s.energy(k)).fold(f64::NEG_INFINITY, f64::max);
    let shift = 0.5 * (e_min + e_max);
    let energies: Vec<f64> = levels.iter().map(|&k| (s.energy(k) - shift) / d.omega_l).collect();
    let mut coupling = vec![0.0; m * m];
    for (a, &i) in levels.iter().enumerate() {
        for (b, &j) in levels.iter().enumerate() {
            coupling[a * m + b] = s.dipole(i, j);
        }
    }
    let prop = Propagator { n: m, energies, coupling, drive: d.lambda / d.omega_l };
    let psi0 = restrict_initial(initial, levels, s.n_levels())?;
    integrate(
        &prop,
        &psi0,
        grid.tau_start(),
        grid.dtau_effective(),
        grid.n_steps(),
        stride,
        doublet_slots(levels),
    )
}

/// Integrate the driven dynamics in the lowest `n_levels` eigenlevels.
pub fn evolve(
    s: &EigenSolution,
    d: &DriveParams,
    initial: &StateVector,
    grid: &TimeGrid,
    n_levels: usize,
    stride: usize,
) -> Result<PopulationTrace> {
    if n_levels < 2 || n_levels > s.n_levels() {
        return Err(Error::OutOfRange(format!(
            "n_levels = {n_levels} not in 2..={}",
            s.n_levels()
        )));
    }
    let levels: Vec<usize> = (0..n_levels).collect();
    evolve_subset(s, d, initial, grid, &levels, stride)
}

/// Integrate the bare three-level model: doublet at -Delta0/2, +Delta0/2 and
/// the upper level at omega3, with couplings Omega12 and Omega23 cos(tau).
/// Level order is {|1>, |2>, |3>} = {0+, 0-, 3+}.
pub fn evolve_three_level(
    d: &DriveParams,
    initial: &StateVector,
    grid: &TimeGrid,
    stride: usize,
) -> Result<PopulationTrace> {
    if initial.dim() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "three-level evolution needs a 3-component state, got {}",
            initial.dim()
        )));
    }
    let shift = 0.5 * d.omega3;
    let energies = vec![
        (-0.5 * d.delta0 - shift) / d.omega_l,
        (0.5 * d.delta0 - shift) / d.omega_l,
        (d.omega3 - shift) / d.omega_l,
    ];
    let coupling = vec![
        0.0, d.omega12, 0.0,
        d.omega12, 0.0, d.omega23,
        0.0, d.omega23, 0.0,
    ];
    let prop = Propagator { n: 3, energies, coupling, drive: 1.0 / d.omega_l };
    integrate(
        &prop,
        initial.amplitudes(),
        grid.tau_start(),
        grid.dtau_effective(),
        grid.n_steps(),
        stride,
        (Some(0), Some(1)),
    )
}

/// Mean spacing between deep minima of a sampled series. Samples below
/// `threshold` are grouped into dips, merging gaps up to `min_gap` so that
/// fast oscillations riding on a deep minimum do not split it; each dip is
/// collapsed to the midpoint of its first and last sample. Dips within
/// `min_gap` of either trace end are dropped as possibly clipped. Returns
/// None if fewer than two whole dips remain.
pub fn transfer_period_from_minima(
    taus: &[f64],
    series: &[f64],
    threshold: f64,
    min_gap: f64,
) -> Option<f64> {
    if taus.len() != series.len() || taus.len() < 3 {
        return None;
    }
    let mut dips: Vec<(f64, f64)> = Vec::new();
    for (&tau, &v) in taus.iter().zip(series) {
        if v < threshold {
            match dips.last_mut() {
                Some(d) if tau - d.1 <= min_gap => d.1 = tau,
                _ => dips.push((tau, tau)),
            }
        }
    }
    let (lo, hi) = (taus[0], taus[taus.len() - 1]);
    let midpoints: Vec<f64> = dips
        .iter()
        .filter(|d| d.0 - lo > min_gap && hi - d.1 > min_gap)
        .map(|d| 0.5 * (d.0 + d.1))
        .collect();
    if midpoints.len() < 2 {
        return None;
    }
    let spacings: Vec<f64> = midpoints.windows(2).map(|w| w[1] - w[0]).collect();
    Some(spacings.iter().sum::<f64>() / spacings.len() as f64)
}

/// Forward-then-backward integration distance, for accuracy checks.
#[cfg(test)]
pub(crate) fn round_trip_distance(
    s: &EigenSolution,
    d: &DriveParams,
    initial: &StateVector,
    tau_end: f64,
    dtau: f64,
    n_levels: usize,
) -> Result<f64> {
    let levels: Vec<usize> = (0..n_levels).collect();
    let shift = 0.5 * (s.energy(0) + s.energy(n_levels - 1));
    let energies: Vec<f64> = levels.iter().map(|&k| (s.energy(k) - shift) / d.omega_l).collect();
    let mut coupling = vec![0.0; n_levels * n_levels];
    for i in 0..n_levels {
        for j in 0..n_levels {
            coupling[i * n_levels + j] = s.dipole(i, j);
        }
    }
    let prop = Propagator { n: n_levels, energies, coupling, drive: d.lambda / d.omega_l };
    let n_steps = (tau_end / dtau).round() as usize;
    let mut psi = initial.amplitudes().to_vec();
    let mut k1 = vec![Complex64::ZERO; n_levels];
    let mut k2 = vec![Complex64::ZERO; n_levels];
    let mut k3 = vec![Complex64::ZERO; n_levels];
    let mut k4 = vec![Complex64::ZERO; n_levels];
    let mut tmp = vec![Complex64::ZERO; n_levels];
    let mut step_all = |psi: &mut Vec<Complex64>, t0: f64, h: f64, n_steps: usize| {
        for step in 0..n_steps {
            let tau = t0 + step as f64 * h;
            prop.rhs(tau, psi, &mut k1);
            for i in 0..n_levels {
                tmp[i] = psi[i] + 0.5 * h * k1[i];
            }
            prop.rhs(tau + 0.5 * h, &tmp, &mut k2);
            for i in 0..n_levels {
                tmp[i] = psi[i] + 0.5 * h * k2[i];
            }
            prop.rhs(tau + 0.5 * h, &tmp, &mut k3);
            for i in 0..n_levels {
                tmp[i] = psi[i] + h * k3[i];
            }
            prop.rhs(tau + h, &tmp, &mut k4);
            for i in 0..n_levels {
                psi[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            }
        }
    };
    step_all(&mut psi, 0.0, dtau, n_steps);
    step_all(&mut psi, tau_end, -dtau, n_steps);
    let dist_sq: f64 = psi
        .iter()
        .zip(initial.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(dist_sq.sqrt())
}
