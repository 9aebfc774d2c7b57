//! Laser calibration against the field-free spectrum, and the validity
//! report for the renormalized three-level treatment.
//!
//! The drive is monochromatic, -lambda X cos(tau). Calibration tunes the
//! laser to the 0- <-> 3+ transition (levels 1 and 6) and fixes the field
//! amplitude through the requested Omega12/omega_L.

use crate::error::{Error, Result};
use crate::spectrum::EigenSolution;

/// Dimensionless laser and coupling parameters.
///
/// `omega3` is the upper-level energy measured from the midpoint of the
/// lower doublet, so the three-level Hamiltonian places the doublet at
/// -Delta0/2 and +Delta0/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub lambda: f64,
    pub omega_l: f64,
    pub omega12: f64,
    pub omega23: f64,
    pub delta0: f64,
    pub omega3: f64,
}

/// How well the working point satisfies the smallness conditions that make
/// the renormalized model quantitative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub ratio_delta: f64,
    pub ratio_omega23: f64,
    pub ratio_omega12: f64,
    /// sqrt(Omega12 / omega_L), the scale both small ratios are measured
    /// against.
    pub bound: f64,
    /// Omega12 / omega_L >= 1.
    pub in_strong_field: bool,
    pub satisfied: bool,
}

pub const DEFAULT_MARGIN: f64 = 0.25;

const MIN_LEVELS: usize = 7;
const DIPOLE_FLOOR: f64 = 1e-12;

/// Tune the laser to the 0- <-> 3+ transition and scale the field so that
/// Omega12 / omega_L equals `intensity_ratio` exactly.
pub fn calibrate(s: &EigenSolution, intensity_ratio: f64) -> Result<DriveParams> {
    if !intensity_ratio.is_finite() || intensity_ratio < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "intensity ratio must be nonnegative and finite, got {intensity_ratio}"
        )));
    }
    if s.n_levels() < MIN_LEVELS {
        return Err(Error::OutOfRange(format!(
            "calibration needs at least {MIN_LEVELS} levels, solution has {}",
            s.n_levels()
        )));
    }
    let mu12 = s.dipole(0, 1).abs();
    let mu23 = s.dipole(1, 6).abs();
    if mu12 < DIPOLE_FLOOR {
        return Err(Error::DegenerateDipole(format!(
            "<0+|X|0-> = {mu12:.3e} is too small to calibrate against"
        )));
    }
    let omega_l = s.energy(6) - s.energy(1);
    let omega12 = intensity_ratio * omega_l;
    let lambda = omega12 / mu12;
    Ok(DriveParams {
        lambda,
        omega_l,
        omega12,
        omega23: lambda * mu23,
        delta0: s.energy(1) - s.energy(0),
        omega3: s.energy(6) - 0.5 * (s.energy(0) + s.energy(1)),
    })
}

/// Evaluate Delta0/omega_L and Omega23/omega_L against margin*sqrt(Omega12/omega_L).
pub fn validity(d: &DriveParams, margin: f64) -> ValidityReport {
    let ratio_delta = d.delta0 / d.omega_l;
    let ratio_omega23 = d.omega23 / d.omega_l;
    let ratio_omega12 = d.omega12 / d.omega_l;
    let bound = ratio_omega12.max(0.0).sqrt();
    ValidityReport {
        ratio_delta,
        ratio_omega23,
        ratio_omega12,
        bound,
        in_strong_field: ratio_omega12 >= 1.0,
        satisfied: ratio_delta < margin * bound && ratio_omega23 < margin * bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{solve, BasisConfig, EigenSolution, Parity, PotentialParams};
    use nalgebra::DMatrix;
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn defaults() -> &'static EigenSolution {
        static SOL: OnceLock<EigenSolution> = OnceLock::new();
        SOL.get_or_init(|| {
            solve(&PotentialParams::default(), &BasisConfig::default(), 20).unwrap()
        })
    }

    #[test]
    fn calibration_is_exact_and_consistent() {
        let s = defaults();
        let ratio = 0.35 * PI;
        let d = calibrate(s, ratio).unwrap();
        assert!((d.omega12 / d.omega_l - ratio).abs() <= 4.0 * f64::EPSILON * ratio);
        assert_eq!(d.omega_l, s.energy(6) - s.energy(1));
        assert_eq!(d.delta0, s.energy(1) - s.energy(0));
        assert_eq!(d.omega3, s.energy(6) - 0.5 * (s.energy(0) + s.energy(1)));
        // Omega_ij = lambda * mu_ij
        assert!((d.omega12 - d.lambda * s.dipole(0, 1).abs()).abs() < 1e-12 * d.omega12);
        assert!((d.omega23 - d.lambda * s.dipole(1, 6).abs()).abs() < 1e-15);
        // frozen working-point coupling (true 0- <-> 3+ element)
        assert!((d.omega23 / d.omega_l - 0.0151950296482).abs() < 1e-6);
        assert!((d.omega12 / d.omega_l - 1.0995574287564).abs() < 1e-10);
    }

    #[test]
    fn field_off_limit() {
        let d = calibrate(defaults(), 0.0).unwrap();
        assert_eq!(d.lambda, 0.0);
        assert_eq!(d.omega12, 0.0);
        assert_eq!(d.omega23, 0.0);
        assert!(d.delta0 > 0.0);
    }

    #[test]
    fn calibration_idempotent() {
        let a = calibrate(defaults(), 0.35 * PI).unwrap();
        let b = calibrate(defaults(), 0.35 * PI).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_levels_rejected() {
        let s = solve(&PotentialParams::default(), &BasisConfig::default(), 6).unwrap();
        assert!(matches!(calibrate(&s, 1.0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn degenerate_dipole_rejected() {
        let n = 7;
        let energies: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let parities: Vec<Parity> = (0..n)
            .map(|k| if k % 2 == 0 { Parity::Even } else { Parity::Odd })
            .collect();
        let dipole = DMatrix::zeros(n, n);
        let s = EigenSolution::from_parts(energies, parities, dipole).unwrap();
        assert!(matches!(calibrate(&s, 1.0), Err(Error::DegenerateDipole(_))));
    }

    #[test]
    fn negative_ratio_rejected() {
        assert!(matches!(calibrate(defaults(), -0.1), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn validity_at_reference_ratios() {
        // the reference working point, taken at face value
        let d = DriveParams {
            lambda: 1.0,
            omega_l: 1.0,
            omega12: 1.10,
            omega23: 0.23,
            delta0: 3.28e-4,
            omega3: 1.0,
        };
        let r = validity(&d, DEFAULT_MARGIN);
        assert!(r.satisfied);
        assert!(r.in_strong_field);
        assert!((r.bound - 1.10f64.sqrt()).abs() < 1e-15);

        // a coupling as large as the photon energy cannot satisfy "<<"
        let bad = DriveParams { omega23: 1.0, ..d };
        assert!(!validity(&bad, DEFAULT_MARGIN).satisfied);
    }

    #[test]
    fn sweep_endpoints_remain_valid() {
        let s = defaults();
        for ratio in [0.1 * PI, 0.5 * PI] {
            let d = calibrate(s, ratio).unwrap();
            let r = validity(&d, DEFAULT_MARGIN);
            assert!(r.satisfied, "validity lost at Omega12/omega_L = {ratio}");
        }
    }

    #[test]
    fn dimensionless_ratios_are_scale_covariant() {
        let s = defaults();
        let c = 3.7;
        let scaled = EigenSolution::from_parts(
            s.energies().iter().map(|e| c * e).collect(),
            s.parities().to_vec(),
            s.dipole_matrix() * c,
        )
        .unwrap();
        let ratio = 0.35 * PI;
        let a = calibrate(s, ratio).unwrap();
        let b = calibrate(&scaled, ratio).unwrap();
        // lambda = ratio * omega_L / mu12 is invariant; every ratio of
        // energies (or of Omegas to omega_L) is invariant as well
        assert!((a.lambda - b.lambda).abs() < 1e-12 * a.lambda.abs());
        for (x, y) in [
            (a.omega12 / a.omega_l, b.omega12 / b.omega_l),
            (a.omega23 / a.omega_l, b.omega23 / b.omega_l),
            (a.delta0 / a.omega_l, b.delta0 / b.omega_l),
            (a.omega3 / a.omega_l, b.omega3 / b.omega_l),
        ] {
            assert!((x - y).abs() < 1e-12 * x.abs().max(1e-300));
        }
    }
}
