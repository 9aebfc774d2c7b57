//! Run configuration: defaults reproduce the reference working point
//! (alpha = 1.735, Omega12/omega_L = 0.35 pi, 20 levels). Values come from
//! three layers, strongest last: built-in defaults, a `key = value` config
//! file, command-line flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::Args;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub n_basis: usize,
    pub n_levels: usize,
    pub intensity_ratio: f64,
    pub initial: String,
    pub tau_end: f64,
    pub dtau: f64,
    pub stride: usize,
    pub gamma: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 1.735,
            n_basis: 120,
            n_levels: 20,
            intensity_ratio: 0.35 * PI,
            initial: "0+".to_string(),
            tau_end: 400.0 * PI,
            dtau: std::f64::consts::TAU / 2000.0,
            stride: 20,
            gamma: 0.01,
            margin: 0.25,
            tolerance: 0.02,
            out: None,
        }
    }
}

/// Flags shared by every subcommand. Every flag has a config-file key of
/// the same name (dashes become underscores); flags override the file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Barrier parameter of the quartic double well
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Oscillator expansion basis size
    #[arg(long = "n-basis")]
    pub n_basis: Option<usize>,
    /// Retained eigenlevels (3 selects the bare three-level model in `compare`)
    #[arg(long = "n-levels")]
    pub n_levels: Option<usize>,
    /// Omega12/omega_L; accepts plain numbers or multiples of pi like "0.35pi"
    #[arg(long = "intensity-ratio")]
    pub intensity_ratio: Option<String>,
    /// Initial state: "0+", "0-", "3+", a level index, or "(0+ + 0-)/sqrt2"
    #[arg(long)]
    pub initial: Option<String>,
    /// End of the integration window in tau; accepts "400pi"
    #[arg(long = "tau-end")]
    pub tau_end: Option<String>,
    /// Integrator step in tau; accepts "2pi" style values
    #[arg(long)]
    pub dtau: Option<String>,
    /// Steps between recorded samples
    #[arg(long)]
    pub stride: Option<usize>,
    /// Spontaneous emission rate Gamma in units of omega_L
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Strictness factor for the validity report
    #[arg(long)]
    pub margin: Option<f64>,
    /// Pass/fail tolerance for `compare`
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Config file with key = value lines
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path (default: <subcommand>.csv)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse a float that may carry a trailing pi multiplier: "0.35pi",
/// "0.35*pi", "2pi", "pi", or a plain number.
pub fn parse_pi_number(text: &str) -> CliResult<f64> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (mantissa, multiplier) = if let Some(m) = lower.strip_suffix("pi") {
        (m.trim_end_matches('*').trim(), PI)
    } else {
        (lower.as_str(), 1.0)
    };
    if mantissa.is_empty() {
        return Ok(multiplier);
    }
    mantissa
        .parse::<f64>()
        .map(|v| v * multiplier)
        .map_err(|_| CliError::Config(format!("cannot parse number {text:?}")))
}

fn parse_usize(text: &str, key: &str) -> CliResult<usize> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| CliError::Config(format!("cannot parse {key} = {text:?} as an integer")))
}

impl RunConfig {
    /// Apply one `key = value` setting.
    fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "alpha" => self.alpha = parse_pi_number(value)?,
            "n_basis" => self.n_basis = parse_usize(value, key)?,
            "n_levels" => self.n_levels = parse_usize(value, key)?,
            "intensity_ratio" => self.intensity_ratio = parse_pi_number(value)?,
            "initial" => self.initial = value.trim().to_string(),
            "tau_end" => self.tau_end = parse_pi_number(value)?,
            "dtau" => self.dtau = parse_pi_number(value)?,
            "stride" => self.stride = parse_usize(value, key)?,
            "gamma" => self.gamma = parse_pi_number(value)?,
            "margin" => self.margin = parse_pi_number(value)?,
            "tolerance" => self.tolerance = parse_pi_number(value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => return Err(CliError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Layer a `key = value` config file over the current values.
    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{}:{}: expected key = value, got {raw:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Layer command-line flags over the current values.
    pub fn apply_flags(&mut self, args: &CommonArgs) -> CliResult<()> {
        if let Some(v) = args.alpha {
            self.alpha = v;
        }
        if let Some(v) = args.n_basis {
            self.n_basis = v;
        }
        if let Some(v) = args.n_levels {
            self.n_levels = v;
        }
        if let Some(v) = &args.intensity_ratio {
            self.intensity_ratio = parse_pi_number(v)?;
        }
        if let Some(v) = &args.initial {
            self.initial = v.clone();
        }
        if let Some(v) = &args.tau_end {
            self.tau_end = parse_pi_number(v)?;
        }
        if let Some(v) = &args.dtau {
            self.dtau = parse_pi_number(v)?;
        }
        if let Some(v) = args.stride {
            self.stride = v;
        }
        if let Some(v) = args.gamma {
            self.gamma = v;
        }
        if let Some(v) = args.margin {
            self.margin = v;
        }
        if let Some(v) = args.tolerance {
            self.tolerance = v;
        }
        if let Some(v) = &args.out {
            self.out = Some(v.clone());
        }
        Ok(())
    }

    /// Resolve the effective configuration: defaults, optional subcommand
    /// overrides, config file, flags.
    pub fn resolve(args: &CommonArgs, overrides: &[(&str, &str)]) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (key, value) in overrides {
            cfg.set(key, value)?;
        }
        if let Some(path) = &args.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_flags(args)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        for (name, value) in [
            ("alpha", self.alpha),
            ("tau_end", self.tau_end),
            ("dtau", self.dtau),
            ("margin", self.margin),
            ("tolerance", self.tolerance),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(CliError::Config(format!("{name} must be positive, got {value}")));
            }
        }
        if self.intensity_ratio < 0.0 || !self.intensity_ratio.is_finite() {
            return Err(CliError::Config(format!(
                "intensity_ratio must be nonnegative, got {}",
                self.intensity_ratio
            )));
        }
        if self.gamma < 0.0 || !self.gamma.is_finite() {
            return Err(CliError::Config(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        if self.n_levels < 2 {
            return Err(CliError::Config(format!(
                "n_levels must be at least 2, got {}",
                self.n_levels
            )));
        }
        if self.stride == 0 {
            return Err(CliError::Config("stride must be positive".into()));
        }
        Ok(())
    }

    /// The `key = value` lines echoed into every output header (the output
    /// path itself is omitted so relocated runs stay byte-identical).
    pub fn echo_lines(&self) -> Vec<String> {
        vec![
            format!("alpha = {}", self.alpha),
            format!("n_basis = {}", self.n_basis),
            format!("n_levels = {}", self.n_levels),
            format!("intensity_ratio = {}", self.intensity_ratio),
            format!("initial = {}", self.initial),
            format!("tau_end = {}", self.tau_end),
            format!("dtau = {}", self.dtau),
            format!("stride = {}", self.stride),
            format!("gamma = {}", self.gamma),
            format!("margin = {}", self.margin),
            format!("tolerance = {}", self.tolerance),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_suffixed_numbers() {
        assert!((parse_pi_number("0.35pi").unwrap() - 0.35 * PI).abs() < 1e-15);
        assert!((parse_pi_number("0.35*pi").unwrap() - 0.35 * PI).abs() < 1e-15);
        assert!((parse_pi_number("pi").unwrap() - PI).abs() < 1e-15);
        assert!((parse_pi_number("400PI").unwrap() - 400.0 * PI).abs() < 1e-12);
        assert_eq!(parse_pi_number("1.25").unwrap(), 1.25);
        assert!(parse_pi_number("abc").is_err());
    }

    #[test]
    fn layering_order() {
        let dir = std::env::temp_dir().join("dwell-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "alpha = 2.0\nstride = 7\n# comment\ngamma = 0.02\n").unwrap();
        let args = CommonArgs {
            config: Some(path),
            gamma: Some(0.05),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&args, &[("tau_end", "100")]).unwrap();
        assert_eq!(cfg.alpha, 2.0); // file beats default
        assert_eq!(cfg.stride, 7);
        assert_eq!(cfg.gamma, 0.05); // flag beats file
        assert_eq!(cfg.tau_end, 100.0); // subcommand override beats default
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let dir = std::env::temp_dir().join("dwell-config-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.cfg");
        std::fs::write(&path, "frequency = 3\n").unwrap();
        let args = CommonArgs { config: Some(path), ..Default::default() };
        assert!(matches!(RunConfig::resolve(&args, &[]), Err(CliError::Config(_))));

        let args = CommonArgs { alpha: Some(-1.0), ..Default::default() };
        assert!(matches!(RunConfig::resolve(&args, &[]), Err(CliError::Config(_))));
    }
}
