//! Dissipative dynamics of the primed-basis density matrix.
//!
//! The upper level decays into |2'> at an effective rate Gamma; branching
//! and the nonsecular coherence couplings carry Bessel weights
//! Lambda_n = J_n(2 Omega12/omega_L). Population equations (per unit t):
//!
//! ```text
//! d rho'11 = Gamma/2 (1 - Lambda0) rho'33
//! d rho'22 = i (Omega23R/2)(rho'32 - rho'23) + Gamma/2 (1 + Lambda0) rho'33
//! d rho'12 = i Delta0R rho'12 - i (Omega23R/2) rho'13
//! d rho'13 = i (deltaR + Delta0R) rho'13 - i (Omega23R/2) rho'12
//!            - Gamma/2 (rho'13 - Lambda2/2 rho'31)
//! d rho'23 = i deltaR rho'23 - i (Omega23R/2)(rho'22 - rho'33)
//!            - Gamma/2 (rho'23 - Lambda2/2 rho'32)
//! ```
//!
//! rho'33 closes by trace conservation, d rho'33 = -(d rho'11 + d rho'22),
//! and the conjugate entries follow from Hermiticity. The coherent part is
//! the commutator with the renormalized Hamiltonian (coupling Omega23R/2 on
//! the 2-3 bond), so the Gamma -> 0 limit reproduces the closed-form primed
//! amplitudes exactly. Everything is stepped in tau, dividing rates by
//! omega_L (Gamma is already specified in units of omega_L).
//!
//! Since rho'11 only grows while rho'33 is populated and Omega12 != 0 keeps
//! feeding 2' -> 3', all population ends up trapped in the dark state |1'>
//! regardless of preparation.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::analytic::ThreeLevelParams;
use crate::error::{Error, Result};
use crate::tdse::TimeGrid;

const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;
const DIAG_SLACK: f64 = 1e-8;
const STEADY_STATE_RATE: f64 = 1e-10;

/// 3x3 Hermitian, unit-trace density matrix in the primed basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrixPrimed {
    rho: Matrix3<Complex64>,
}

impl DensityMatrixPrimed {
    pub fn new(rho: Matrix3<Complex64>) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                if (rho[(i, j)] - rho[(j, i)].conj()).norm() > HERMITICITY_TOL {
                    return Err(Error::StateCorruption(format!(
                        "density matrix not Hermitian at ({i},{j})"
                    )));
                }
            }
        }
        let trace = rho[(0, 0)].re + rho[(1, 1)].re + rho[(2, 2)].re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::StateCorruption(format!("trace = {trace} is not 1")));
        }
        for k in 0..3 {
            let p = rho[(k, k)].re;
            if !(-DIAG_SLACK..=1.0 + DIAG_SLACK).contains(&p) {
                return Err(Error::StateCorruption(format!(
                    "population rho'[{k}][{k}] = {p} outside [0, 1]"
                )));
            }
        }
        Ok(Self { rho })
    }

    pub(crate) fn new_unchecked(rho: Matrix3<Complex64>) -> Self {
        Self { rho }
    }

    /// Pure-state projector from a (normalized) amplitude triple.
    pub fn from_pure_triple(t: &crate::analytic::AmplitudeTriple) -> Result<Self> {
        let v = [t.c1, t.c2, t.c3];
        Self::new(Matrix3::from_fn(|i, j| v[i] * v[j].conj()))
    }

    /// Pure state |k'><k'|.
    pub fn pure(k: usize) -> Result<Self> {
        if k > 2 {
            return Err(Error::OutOfRange(format!("level {k} outside the primed triple")));
        }
        let mut rho = Matrix3::zeros();
        rho[(k, k)] = Complex64::ONE;
        Ok(Self { rho })
    }

    /// The maximally mixed state, identity / 3.
    pub fn maximally_mixed() -> Self {
        Self { rho: Matrix3::identity().map(|c: Complex64| c / 3.0) }
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.rho
    }

    pub fn population(&self, k: usize) -> f64 {
        self.rho[(k, k)].re
    }

    pub fn coherence(&self, i: usize, j: usize) -> Complex64 {
        self.rho[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.rho[(0, 0)].re + self.rho[(1, 1)].re + self.rho[(2, 2)].re
    }

    /// Smallest eigenvalue, from the closed-form solution of the Hermitian
    /// 3x3 characteristic polynomial.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian3_min_eigenvalue(&self.rho)
    }
}

/// Decay rate and Bessel weights entering the dissipator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    /// Effective spontaneous emission rate in units of omega_L.
    pub gamma: f64,
    pub lambda0: f64,
    pub lambda2: f64,
}

impl DecayParams {
    pub fn new(gamma: f64, p: &ThreeLevelParams) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidConfig(format!("gamma = {gamma} must be nonnegative")));
        }
        if p.lambda0.abs() > 1.0 || p.lambda2.abs() > 1.0 {
            return Err(Error::InvalidConfig("Bessel weights must lie in [-1, 1]".into()));
        }
        Ok(Self { gamma, lambda0: p.lambda0, lambda2: p.lambda2 })
    }
}

/// d rho'/d tau without input validation; used inside the integrator.
fn rhs_raw(
    rho: &Matrix3<Complex64>,
    p: &ThreeLevelParams,
    dec: &DecayParams,
    omega_l: f64,
) -> Matrix3<Complex64> {
    let i = Complex64::I;
    let g = 0.5 * p.omega23_r / omega_l;
    let d0 = p.delta0_r / omega_l;
    let dpd = (p.delta_r + p.delta0_r) / omega_l;
    let dr = p.delta_r / omega_l;
    let gamma = dec.gamma;

    let r = |a: usize, b: usize| rho[(a, b)];
    let mut out = Matrix3::zeros();
    let pump = i * g * (r(2, 1) - r(1, 2));
    out[(0, 0)] = Complex64::from(0.5 * gamma * (1.0 - dec.lambda0)) * r(2, 2);
    out[(1, 1)] = pump + Complex64::from(0.5 * gamma * (1.0 + dec.lambda0)) * r(2, 2);
    out[(2, 2)] = -(out[(0, 0)] + out[(1, 1)]); // trace conservation closure
    out[(0, 1)] = i * d0 * r(0, 1) - i * g * r(0, 2);
    out[(0, 2)] = i * dpd * r(0, 2) - i * g * r(0, 1)
        - 0.5 * gamma * (r(0, 2) - 0.5 * dec.lambda2 * r(2, 0));
    out[(1, 2)] = i * dr * r(1, 2) - i * g * (r(1, 1) - r(2, 2))
        - 0.5 * gamma * (r(1, 2) - 0.5 * dec.lambda2 * r(2, 1));
    out[(1, 0)] = out[(0, 1)].conj();
    out[(2, 0)] = out[(0, 2)].conj();
    out[(2, 1)] = out[(1, 2)].conj();
    out
}

/// Time derivative of the primed density matrix, per unit tau.
pub fn master_rhs(
    rho: &DensityMatrixPrimed,
    p: &ThreeLevelParams,
    dec: &DecayParams,
    omega_l: f64,
) -> Result<Matrix3<Complex64>> {
    if !omega_l.is_finite() || omega_l <= 0.0 {
        return Err(Error::InvalidConfig(format!("omega_L = {omega_l} must be positive")));
    }
    // revalidate; the public surface must reject corrupted states
    let checked = DensityMatrixPrimed::new(*rho.matrix())?;
    Ok(rhs_raw(checked.matrix(), p, dec, omega_l))
}

/// Sampled primed-basis trajectory.
#[derive(Debug, Clone)]
pub struct MasterTrace {
    pub taus: Vec<f64>,
    pub states: Vec<DensityMatrixPrimed>,
    /// First sampled tau with ||d rho'|| below 1e-10, if reached.
    pub steady_state_tau: Option<f64>,
    /// Smallest population eigenvalue seen along the run (positivity monitor).
    pub min_eigenvalue: f64,
    /// Largest |trace - 1| seen along the run.
    pub max_trace_error: f64,
}

impl MasterTrace {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrixPrimed {
        self.states.last().expect("trace holds at least the initial state")
    }

    /// Time series of a primed population.
    pub fn population(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.population(k)).collect()
    }
}

/// Integrate the master equation with fixed-step RK4, sampling every
/// `stride` steps. Hermiticity is preserved by construction and the trace
/// exactly; populations and trace are still monitored at every sample.
pub fn evolve_master(
    initial: &DensityMatrixPrimed,
    p: &ThreeLevelParams,
    dec: &DecayParams,
    omega_l: f64,
    grid: &TimeGrid,
    stride: usize,
) -> Result<MasterTrace> {
    if !omega_l.is_finite() || omega_l <= 0.0 {
        return Err(Error::InvalidConfig(format!("omega_L = {omega_l} must be positive")));
    }
    let stride = stride.max(1);
    let dtau = grid.dtau_effective();
    let n_steps = grid.n_steps();
    let mut rho = *initial.matrix();

    let mut trace = MasterTrace {
        taus: Vec::with_capacity(n_steps / stride + 2),
        states: Vec::with_capacity(n_steps / stride + 2),
        steady_state_tau: None,
        min_eigenvalue: f64::INFINITY,
        max_trace_error: 0.0,
    };

    let record = |rho: &Matrix3<Complex64>, tau: f64, trace: &mut MasterTrace| -> Result<()> {
        let tr = rho[(0, 0)].re + rho[(1, 1)].re + rho[(2, 2)].re;
        let err = (tr - 1.0).abs();
        if err > TRACE_TOL {
            return Err(Error::StepSize(format!(
                "trace drift {err:.3e} exceeds {TRACE_TOL:.0e} at tau = {tau:.3}; reduce dtau"
            )));
        }
        let state = DensityMatrixPrimed::new_unchecked(*rho);
        trace.max_trace_error = trace.max_trace_error.max(err);
        trace.min_eigenvalue = trace.min_eigenvalue.min(state.min_eigenvalue());
        if trace.steady_state_tau.is_none() {
            let rate = rhs_raw(rho, p, dec, omega_l).norm();
            if rate < STEADY_STATE_RATE {
                trace.steady_state_tau = Some(tau);
            }
        }
        trace.taus.push(tau);
        trace.states.push(state);
        Ok(())
    };

    record(&rho, grid.tau_start(), &mut trace)?;
    for step in 0..n_steps {
        let k1 = rhs_raw(&rho, p, dec, omega_l);
        let k2 = rhs_raw(&(rho + k1 * Complex64::from(0.5 * dtau)), p, dec, omega_l);
        let k3 = rhs_raw(&(rho + k2 * Complex64::from(0.5 * dtau)), p, dec, omega_l);
        let k4 = rhs_raw(&(rho + k3 * Complex64::from(dtau)), p, dec, omega_l);
        rho += (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(dtau / 6.0);
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            record(&rho, grid.tau_start() + (step + 1) as f64 * dtau, &mut trace)?;
        }
    }
    Ok(trace)
}

/// Lab-frame populations from a primed trajectory. With phi = phi(tau),
///
/// ```text
/// rho11 = cos^2 phi rho'11 + sin^2 phi rho'22 + sin(2 phi) Im rho'12
/// rho22 = sin^2 phi rho'11 + cos^2 phi rho'22 - sin(2 phi) Im rho'12
/// rho33 = rho'33
/// ```
pub fn lab_populations_from_primed(
    states: &[DensityMatrixPrimed],
    p: &ThreeLevelParams,
    taus: &[f64],
) -> Result<Vec<[f64; 3]>> {
    if states.len() != taus.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} states vs {} sample times",
            states.len(),
            taus.len()
        )));
    }
    Ok(states
        .iter()
        .zip(taus)
        .map(|(s, &tau)| {
            let phi = p.phi_amplitude * tau.sin();
            let (sin_phi, cos_phi) = phi.sin_cos();
            let (c2, s2) = (cos_phi * cos_phi, sin_phi * sin_phi);
            let cross = (2.0 * phi).sin() * s.coherence(0, 1).im;
            let p11 = s.population(0);
            let p22 = s.population(1);
            [
                c2 * p11 + s2 * p22 + cross,
                s2 * p11 + c2 * p22 - cross,
                s.population(2),
            ]
        })
        .collect())
}

/// Smallest eigenvalue of a Hermitian 3x3 matrix (trigonometric closed form).
fn hermitian3_min_eigenvalue(a: &Matrix3<Complex64>) -> f64 {
    let q = (a[(0, 0)].re + a[(1, 1)].re + a[(2, 2)].re) / 3.0;
    let off = a[(0, 1)].norm_sqr() + a[(0, 2)].norm_sqr() + a[(1, 2)].norm_sqr();
    let p2 = (a[(0, 0)].re - q).powi(2)
        + (a[(1, 1)].re - q).powi(2)
        + (a[(2, 2)].re - q).powi(2)
        + 2.0 * off;
    if p2 < 1e-300 {
        return q;
    }
    let p = (p2 / 6.0).sqrt();
    let mut b = *a;
    for k in 0..3 {
        b[(k, k)] -= Complex64::from(q);
    }
    let b = b.map(|c| c / Complex64::from(p));
    let det = (b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
        - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
        + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]))
        .re;
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    // roots are q + 2p cos(phi + 2 pi k / 3); k = 1 gives the smallest
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{self, AmplitudeTriple};
    use crate::drive::calibrate;
    use crate::spectrum::{solve, BasisConfig, PotentialParams};
    use crate::tdse::TimeGrid;
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn working_point() -> &'static (f64, ThreeLevelParams) {
        static WP: OnceLock<(f64, ThreeLevelParams)> = OnceLock::new();
        WP.get_or_init(|| {
            let s = solve(&PotentialParams::default(), &BasisConfig::default(), 20).unwrap();
            let d = calibrate(&s, 0.35 * PI).unwrap();
            (d.omega_l, analytic::renormalize(&d).unwrap())
        })
    }

    fn outer(v: [Complex64; 3]) -> Matrix3<Complex64> {
        Matrix3::from_fn(|i, j| v[i] * v[j].conj())
    }

    #[test]
    fn dark_state_is_exactly_stationary() {
        let (omega_l, p) = working_point();
        let dec = DecayParams::new(0.01, p).unwrap();
        let rho = DensityMatrixPrimed::pure(0).unwrap();
        let dot = master_rhs(&rho, p, &dec, *omega_l).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(dot[(i, j)], Complex64::ZERO, "nonzero derivative at ({i},{j})");
            }
        }
    }

    #[test]
    fn dissipation_off_matches_closed_form() {
        let (omega_l, p) = working_point();
        let dec = DecayParams::new(0.0, p).unwrap();
        let w = Complex64::new(1.0 / 3.0f64.sqrt(), 0.0);
        let v0 = [w, Complex64::new(0.0, 1.0) * w, w];
        let initial = DensityMatrixPrimed::new(outer(v0)).unwrap();
        let grid = TimeGrid::new(0.0, 300.0, 0.005).unwrap();
        let trace = evolve_master(&initial, p, &dec, *omega_l, &grid, 100).unwrap();

        let triple = AmplitudeTriple::new(v0[0], v0[1], v0[2]).unwrap();
        let mut worst = 0.0f64;
        for (state, &tau) in trace.states.iter().zip(&trace.taus) {
            let cp = analytic::primed_amplitudes(p, &triple, tau, *omega_l);
            let expect = outer([cp.c1, cp.c2, cp.c3]);
            for i in 0..3 {
                for j in 0..3 {
                    worst = worst.max((state.matrix()[(i, j)] - expect[(i, j)]).norm());
                }
            }
        }
        assert!(worst < 1e-9, "unitary limit deviates from closed form by {worst}");
    }

    #[test]
    fn reaches_dark_steady_state_from_doublet() {
        let (omega_l, p) = working_point();
        let dec = DecayParams::new(0.01, p).unwrap();
        let initial = DensityMatrixPrimed::pure(1).unwrap();
        let grid = TimeGrid::new(0.0, 5000.0, 0.02).unwrap();
        let trace = evolve_master(&initial, p, &dec, *omega_l, &grid, 50).unwrap();
        let end = trace.final_state();
        assert!(end.population(2) < 1e-4, "rho'33 = {}", end.population(2));
        assert!(end.population(0) > 0.999, "rho'11 = {}", end.population(0));
        assert!(trace.max_trace_error < 1e-8);
        assert!(trace.min_eigenvalue > -1e-6, "positivity: {}", trace.min_eigenvalue);
    }

    #[test]
    fn steady_state_is_preparation_independent() {
        let (omega_l, p) = working_point();
        let dec = DecayParams::new(0.01, p).unwrap();
        let initial = DensityMatrixPrimed::pure(2).unwrap();
        let grid = TimeGrid::new(0.0, 5000.0, 0.02).unwrap();
        let trace = evolve_master(&initial, p, &dec, *omega_l, &grid, 50).unwrap();
        let end = trace.final_state();
        assert!(end.population(2) < 1e-4);
        assert!(end.population(0) > 0.999);
    }

    #[test]
    fn mixed_state_keeps_unit_trace() {
        let (omega_l, p) = working_point();
        let dec = DecayParams::new(0.01, p).unwrap();
        let initial = DensityMatrixPrimed::maximally_mixed();
        let grid = TimeGrid::new(0.0, 1000.0, 0.02).unwrap();
        let trace = evolve_master(&initial, p, &dec, *omega_l, &grid, 50).unwrap();
        assert!(trace.max_trace_error < 1e-8);
        for state in &trace.states {
            assert!((state.trace() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn dark_preparation_never_moves() {
        let (omega_l, p) = working_point();
        let dec = DecayParams::new(0.01, p).unwrap();
        let initial = DensityMatrixPrimed::pure(0).unwrap();
        let grid = TimeGrid::new(0.0, 200.0, 0.02).unwrap();
        let trace = evolve_master(&initial, p, &dec, *omega_l, &grid, 50).unwrap();
        assert_eq!(trace.steady_state_tau, Some(0.0));
        for state in &trace.states {
            assert_eq!(state.population(0), 1.0);
        }
    }

    /// Late-time approach rate of 1 - rho'11 from a log-slope fit.
    fn closing_rate(gamma: f64, horizon: f64) -> f64 {
        let (omega_l, p) = working_point();
        let dec = DecayParams::new(gamma, p).unwrap();
        let initial = DensityMatrixPrimed::pure(1).unwrap();
        let grid = TimeGrid::new(0.0, horizon, 0.05).unwrap();
        let trace = evolve_master(&initial, p, &dec, *omega_l, &grid, 200).unwrap();
        let pts: Vec<(f64, f64)> = trace
            .taus
            .iter()
            .zip(trace.states.iter())
            .filter(|(&tau, s)| tau > 0.4 * horizon && s.population(0) < 1.0 - 1e-12)
            .map(|(&tau, s)| (tau, (1.0 - s.population(0)).ln()))
            .collect();
        let n = pts.len() as f64;
        let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (sxx, sxy): (f64, f64) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
        -(n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn doubling_gamma_roughly_doubles_the_approach_rate() {
        let r1 = closing_rate(0.002, 12_000.0);
        let r2 = closing_rate(0.004, 6_000.0);
        let ratio = r2 / r1;
        assert!((1.5..=2.5).contains(&ratio), "rate ratio {ratio}");
    }

    #[test]
    fn lab_populations_transform() {
        let (_, p) = working_point();
        // phi vanishes at multiples of pi: lab = primed diagonals
        let w = Complex64::new(0.5f64.sqrt(), 0.0);
        let rho = DensityMatrixPrimed::new(outer([w, Complex64::new(0.0, 1.0) * w, Complex64::ZERO]))
            .unwrap();
        let taus = [0.0, PI, 2.0 * PI];
        let states = [rho, rho, rho];
        let lab = lab_populations_from_primed(&states, p, &taus).unwrap();
        for row in &lab {
            assert!((row[0] - 0.5).abs() < 1e-12);
            assert!((row[1] - 0.5).abs() < 1e-12);
            assert!(row[2].abs() < 1e-15);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        // pure dark state: lab rho22 = sin^2 phi
        let dark = DensityMatrixPrimed::pure(0).unwrap();
        let taus: Vec<f64> = (0..50).map(|k| 0.13 * k as f64).collect();
        let states = vec![dark; 50];
        let lab = lab_populations_from_primed(&states, p, &taus).unwrap();
        for (row, &tau) in lab.iter().zip(&taus) {
            let phi = p.phi_amplitude * tau.sin();
            assert!((row[1] - phi.sin().powi(2)).abs() < 1e-14);
            assert!(row[2].abs() < 1e-15);
        }

        assert!(matches!(
            lab_populations_from_primed(&states[..3], p, &taus[..2]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn lab_transform_consistent_with_amplitudes() {
        // the density-matrix image of the amplitude transform, checked on a
        // coherence-rich pure state
        let (omega_l, p) = working_point();
        let a = Complex64::new(0.6, 0.1);
        let b = Complex64::new(-0.2, 0.7);
        let c = Complex64::new(0.32, 0.0);
        let norm = (a.norm_sqr() + b.norm_sqr() + c.norm_sqr()).sqrt();
        let triple = AmplitudeTriple::new(a / norm, b / norm, c / norm).unwrap();
        for k in 0..40 {
            let tau = 0.37 * k as f64;
            let primed = analytic::primed_amplitudes(p, &triple, tau, *omega_l);
            let state =
                DensityMatrixPrimed::new(outer([primed.c1, primed.c2, primed.c3])).unwrap();
            let lab = lab_populations_from_primed(&[state], p, &[tau]).unwrap()[0];
            let expect = analytic::lab_amplitudes(&primed, tau, p).populations();
            for (x, y) in lab.iter().zip(&expect) {
                assert!((x - y).abs() < 1e-13, "{x} vs {y} at tau = {tau}");
            }
        }
    }

    #[test]
    fn corrupted_states_rejected() {
        let mut m = Matrix3::<Complex64>::zeros();
        m[(0, 0)] = Complex64::ONE;
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(DensityMatrixPrimed::new(m), Err(Error::StateCorruption(_))));

        let mut m = Matrix3::<Complex64>::zeros();
        m[(0, 0)] = Complex64::from(2.0);
        assert!(matches!(DensityMatrixPrimed::new(m), Err(Error::StateCorruption(_))));

        let (omega_l, p) = working_point();
        assert!(matches!(
            DecayParams::new(-0.1, p),
            Err(Error::InvalidConfig(_))
        ));
        let dec = DecayParams::new(0.0, p).unwrap();
        let rho = DensityMatrixPrimed::pure(0).unwrap();
        assert!(matches!(
            master_rhs(&rho, p, &dec, -*omega_l),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn min_eigenvalue_closed_form() {
        let diag = Matrix3::from_diagonal(&nalgebra::Vector3::new(
            Complex64::from(0.1),
            Complex64::from(0.3),
            Complex64::from(0.6),
        ));
        assert!((hermitian3_min_eigenvalue(&diag) - 0.1).abs() < 1e-14);
        // rank-one projector: eigenvalues {1, 0, 0}
        let v = [
            Complex64::new(0.5, 0.2),
            Complex64::new(-0.3, 0.6),
            Complex64::new(0.2, -0.4),
        ];
        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let proj = outer([v[0] / n, v[1] / n, v[2] / n]);
        assert!(hermitian3_min_eigenvalue(&proj).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn rhs_conserves_trace_and_hermiticity(
            p11 in 0.0f64..1.0,
            p22 in 0.0f64..1.0,
            re12 in -0.3f64..0.3,
            im12 in -0.3f64..0.3,
            re13 in -0.3f64..0.3,
            im13 in -0.3f64..0.3,
            re23 in -0.3f64..0.3,
            im23 in -0.3f64..0.3,
            gamma in 0.0f64..0.1,
        ) {
            let (omega_l, p) = working_point();
            let a = p11;
            let b = (1.0 - a) * p22;
            let c = 1.0 - a - b;
            let mut m = Matrix3::<Complex64>::zeros();
            m[(0, 0)] = Complex64::from(a);
            m[(1, 1)] = Complex64::from(b);
            m[(2, 2)] = Complex64::from(c.max(0.0));
            m[(0, 1)] = Complex64::new(re12, im12);
            m[(1, 0)] = m[(0, 1)].conj();
            m[(0, 2)] = Complex64::new(re13, im13);
            m[(2, 0)] = m[(0, 2)].conj();
            m[(1, 2)] = Complex64::new(re23, im23);
            m[(2, 1)] = m[(1, 2)].conj();
            let dec = DecayParams { gamma, lambda0: p.lambda0, lambda2: p.lambda2 };
            let dot = rhs_raw(&m, p, &dec, *omega_l);
            // exact closure and exact Hermitian mirroring
            prop_assert_eq!(dot[(0, 0)].re + dot[(1, 1)].re + dot[(2, 2)].re, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(dot[(i, j)], dot[(j, i)].conj());
                }
            }
        }
    }
}
