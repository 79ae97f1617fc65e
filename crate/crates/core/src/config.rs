//! Run configuration: `key = value` lines, `#` comments.
//!
//! Angles and times accept small expressions such as `pi/8`, `3pi/4`,
//! `0.5*pi` or `1/16`. Lists are comma separated; `start:stop:count`
//! expands to `count` evenly spaced values including both ends.

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::morse::MorseParams;
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Grid,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
    pub fn grid(self) -> bool {
        matches!(self, OutputFormat::Grid | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeSpec {
    /// Multiples of the revival time.
    Fractions(Vec<f64>),
    /// Atomic units.
    Absolute(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beta: f64,
    pub mu: f64,
    pub r0: f64,
    pub d: f64,
    pub alpha: f64,
    /// Binomial parameter of the coherent state is `zeta_scale·alpha`.
    pub zeta_scale: f64,
    pub n_levels: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub np: usize,
    /// Half-width of the p grid; `None` picks it from the state.
    pub p_max: Option<f64>,
    pub theta: Vec<f64>,
    pub times: TimeSpec,
    pub output_dir: PathBuf,
    /// 0 lets the thread pool decide.
    pub workers: usize,
    pub format: OutputFormat,
    pub lobe_threshold: f64,
    pub theta_count: usize,
    pub scan_direction: crate::analysis::Direction,
    /// `None` scans up to the state's own spread in that direction.
    pub scan_max: Option<f64>,
    pub scan_steps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            beta: MorseParams::I2_BETA,
            mu: MorseParams::I2_MU,
            r0: MorseParams::I2_R0,
            d: MorseParams::I2_D,
            alpha: 2.0,
            zeta_scale: 0.5,
            n_levels: 24,
            x_min: -0.25,
            x_max: 0.45,
            nx: 2048,
            np: 512,
            p_max: None,
            theta: vec![PI / 2.0],
            times: TimeSpec::Fractions(vec![0.125]),
            output_dir: PathBuf::from("out"),
            workers: 0,
            format: OutputFormat::Both,
            lobe_threshold: crate::phase_space::DEFAULT_LOBE_THRESHOLD,
            theta_count: 33,
            scan_direction: crate::analysis::Direction::Position,
            scan_max: None,
            scan_steps: 257,
        }
    }
}

pub const KEYS: &[&str] = &[
    "beta",
    "mu",
    "r0",
    "D",
    "alpha",
    "zeta_scale",
    "n_levels",
    "x_min",
    "x_max",
    "nx",
    "np",
    "p_max",
    "theta",
    "t_frac",
    "t_au",
    "output_dir",
    "workers",
    "format",
    "lobe_threshold",
    "theta_count",
    "scan_direction",
    "scan_max",
    "scan_steps",
];

impl RunConfig {
    pub fn params(&self) -> Result<MorseParams> {
        MorseParams::new(self.beta, self.mu, self.r0, self.d)
    }

    pub fn zeta(&self) -> f64 {
        self.zeta_scale * self.alpha
    }

    pub fn x_grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(self.x_min, self.x_max, self.nx)
    }

    /// Absolute times in atomic units.
    pub fn times_au(&self) -> Result<Vec<f64>> {
        Ok(match &self.times {
            TimeSpec::Absolute(t) => t.clone(),
            TimeSpec::Fractions(f) => {
                let revival = self.params()?.characteristic_times().revival;
                f.iter().map(|f| f * revival).collect()
            }
        })
    }

    /// Applies one `key=value` pair; `line` is used in diagnostics.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let fail = |reason: String| Error::Config {
            line,
            key: key.to_string(),
            reason,
        };
        let number = || parse_expr(value).map_err(&fail);
        let count = || {
            value
                .parse::<usize>()
                .map_err(|e| fail(format!("{value:?} is not a non-negative integer: {e}")))
        };
        let positive = |v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(fail(format!("must be positive, got {v}")))
            }
        };
        match key {
            "beta" => self.beta = positive(number()?)?,
            "mu" => self.mu = positive(number()?)?,
            "r0" => self.r0 = positive(number()?)?,
            "D" => self.d = positive(number()?)?,
            "alpha" => self.alpha = number()?,
            "zeta_scale" => self.zeta_scale = positive(number()?)?,
            "n_levels" => self.n_levels = count()?,
            "x_min" => self.x_min = number()?,
            "x_max" => self.x_max = number()?,
            "nx" => self.nx = count()?,
            "np" => self.np = count()?,
            "p_max" => {
                self.p_max = if value == "auto" {
                    None
                } else {
                    Some(positive(number()?)?)
                }
            }
            "theta" => self.theta = parse_list(value).map_err(&fail)?,
            "t_frac" => self.times = TimeSpec::Fractions(parse_list(value).map_err(&fail)?),
            "t_au" => self.times = TimeSpec::Absolute(parse_list(value).map_err(&fail)?),
            "output_dir" => {
                if value.is_empty() {
                    return Err(fail("empty path".into()));
                }
                self.output_dir = PathBuf::from(value)
            }
            "workers" => self.workers = count()?,
            "format" => {
                self.format = match value {
                    "csv" => OutputFormat::Csv,
                    "grid" => OutputFormat::Grid,
                    "both" => OutputFormat::Both,
                    _ => return Err(fail(format!("expected csv, grid or both, got {value:?}"))),
                }
            }
            "lobe_threshold" => self.lobe_threshold = number()?,
            "theta_count" => self.theta_count = count()?,
            "scan_direction" => {
                self.scan_direction = value.parse().map_err(|e: Error| fail(e.to_string()))?
            }
            "scan_max" => {
                self.scan_max = if value == "auto" {
                    None
                } else {
                    Some(positive(number()?)?)
                }
            }
            "scan_steps" => self.scan_steps = count()?,
            _ => {
                return Err(fail(format!(
                    "unknown key; expected one of {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Cross-field checks; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, reason: String| Error::Config {
            line: 0,
            key: key.to_string(),
            reason,
        };
        let params = self.params().map_err(|e| fail("beta", e.to_string()))?;
        let bound = params.bound_state_count();
        if self.n_levels < 2 || self.n_levels > bound {
            return Err(fail(
                "n_levels",
                format!(
                    "{} outside 2..={bound} (bound states of this potential)",
                    self.n_levels
                ),
            ));
        }
        for (key, n) in [("nx", self.nx), ("np", self.np)] {
            if n < 128 || !n.is_power_of_two() {
                return Err(fail(key, format!("{n} is not a power of two ≥ 128")));
            }
        }
        if !(self.x_max > self.x_min) {
            return Err(fail(
                "x_max",
                format!("{} ≤ x_min {}", self.x_max, self.x_min),
            ));
        }
        if !(self.lobe_threshold > 0.0 && self.lobe_threshold < 1.0) {
            return Err(fail(
                "lobe_threshold",
                format!("{} outside (0, 1)", self.lobe_threshold),
            ));
        }
        if self.theta_count < crate::analysis::MIN_CARPET_ROWS {
            return Err(fail(
                "theta_count",
                format!(
                    "{} < {}",
                    self.theta_count,
                    crate::analysis::MIN_CARPET_ROWS
                ),
            ));
        }
        if self.scan_steps < crate::analysis::MIN_SCAN_STEPS {
            return Err(fail(
                "scan_steps",
                format!("{} < {}", self.scan_steps, crate::analysis::MIN_SCAN_STEPS),
            ));
        }
        let (key, list) = match &self.times {
            TimeSpec::Fractions(f) => ("t_frac", f),
            TimeSpec::Absolute(t) => ("t_au", t),
        };
        if list.is_empty() || self.theta.is_empty() {
            return Err(fail(
                if list.is_empty() { key } else { "theta" },
                "empty list".into(),
            ));
        }
        Ok(())
    }
}

/// Parses a whole config file and applies defaults for missing keys.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = split_assignment(line).ok_or_else(|| Error::Config {
            line: index + 1,
            key: line.to_string(),
            reason: "expected key=value".into(),
        })?;
        config.set(key, value, index + 1)?;
    }
    config.validate()?;
    Ok(config)
}

pub fn split_assignment(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    let k = k.trim();
    (!k.is_empty()).then_some((k, v.trim()))
}

/// Evaluates `a`, `pi`, `a*pi`, `api`, any of those `/ b`, or `a/b`.
pub fn parse_expr(text: &str) -> std::result::Result<f64, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (num, den) = match compact.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (compact.as_str(), None),
    };
    let bad = || format!("cannot evaluate {text:?}");
    let numerator = match num.strip_suffix("pi") {
        Some(coeff) => {
            let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
            let c = match coeff {
                "" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            c * PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let value = match den {
        Some(d) => {
            let d = parse_expr(d)?;
            if d == 0.0 {
                return Err(format!("division by zero in {text:?}"));
            }
            numerator / d
        }
        None => numerator,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

pub fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (parse_expr(start)?, parse_expr(stop)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("bad count in range {text:?}"))?;
            if n < 2 {
                return Err(format!("range {text:?} needs at least 2 points"));
            }
            Ok((0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect())
        }
        [_] => text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(parse_expr)
            .collect(),
        _ => Err(format!("expected a list or start:stop:count, got {text:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_iodine_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!((c.beta, c.mu, c.r0, c.d), (4.954, 1.156e5, 5.03, 0.057));
        assert_eq!((c.alpha, c.n_levels), (2.0, 24));
    }

    #[test]
    fn degenerate_coherent_state_is_a_valid_config() {
        let c = parse_config("alpha=0\nn_levels=2").unwrap();
        assert_eq!(c.alpha, 0.0);
        assert_eq!(c.n_levels, 2);
    }

    #[test]
    fn too_many_levels_rejected() {
        let err = parse_config("n_levels=500").unwrap_err();
        assert!(err.to_string().contains("n_levels"), "{err}");
        assert!(err.to_string().contains("117"), "{err}");
    }

    #[test]
    fn unknown_key_names_line() {
        let err = parse_config("# comment\nbeta = 4.954\nbogus = 1\n").unwrap_err();
        match err {
            Error::Config { line, key, .. } => assert_eq!((line, key.as_str()), (3, "bogus")),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unparsable_value() {
        let err = parse_config("nx = lots").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        assert!(parse_config("nx = 1000").is_err());
        assert!(parse_config("np = 64").is_err());
        assert!(parse_config("D = -1").is_err());
    }

    #[test]
    fn expressions() {
        assert_eq!(parse_expr("pi").unwrap(), PI);
        assert_eq!(parse_expr("pi/8").unwrap(), PI / 8.0);
        assert_eq!(parse_expr("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_expr("0.5 * pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_expr("-pi").unwrap(), -PI);
        assert_eq!(parse_expr("1/16").unwrap(), 0.0625);
        assert_eq!(parse_expr("1.156e5").unwrap(), 115_600.0);
        assert!(parse_expr("pie").is_err());
        assert!(parse_expr("1/0").is_err());
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("0, pi/2 ,pi").unwrap(), vec![0.0, PI / 2.0, PI]);
        let r = parse_list("0:pi:9").unwrap();
        assert_eq!(r.len(), 9);
        assert_eq!(r[8], PI);
        assert!((r[1] - PI / 8.0).abs() < 1e-15);
        assert!(parse_list("0:pi:1").is_err());
    }

    #[test]
    fn times_in_atomic_units() {
        let c = parse_config("t_frac = 1/8, 1/16").unwrap();
        let t = c.times_au().unwrap();
        let rev = c.params().unwrap().characteristic_times().revival;
        assert_eq!(t, vec![rev / 8.0, rev / 16.0]);
        let c = parse_config("t_au = 1000").unwrap();
        assert_eq!(c.times_au().unwrap(), vec![1000.0]);
    }
}
