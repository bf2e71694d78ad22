use std::f64::consts::PI;
use std::path::PathBuf;

use ksurf::netgen::{GreedyParams, DEFAULT_DELTA, DEFAULT_MAX_GENERATIONS};
use serde::Serialize;

use crate::CliError;

/// Parses radians ("1.5708") or multiples of π ("pi", "3pi/4", "-pi/6", "0.5*pi").
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let t = t.replace('π', "pi");
    if t.is_empty() {
        return Err("empty angle".into());
    }
    let bad = || format!("cannot parse angle '{text}'");
    let number = |s: &str| -> Result<f64, String> { s.parse::<f64>().map_err(|_| bad()) };
    let Some(at) = t.find("pi") else {
        let v = number(&t)?;
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    };
    let (head, tail) = (&t[..at], &t[at + 2..]);
    let factor = match head.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => number(h)?,
    };
    let divisor = match tail {
        "" => 1.0,
        _ => {
            let d = tail.strip_prefix('/').ok_or_else(bad)?;
            let d = number(d)?;
            if d == 0.0 {
                return Err(format!("zero divisor in '{text}'"));
            }
            d
        }
    };
    Ok(factor * PI / divisor)
}

/// Parses "2,3,4" or "2:6" (inclusive, unit step) or "2:6:0.5".
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let bad = || format!("cannot parse list '{text}'");
    if text.contains(':') {
        let parts: Vec<f64> =
            text.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let (a, b, step) = match parts[..] {
            [a, b] => (a, b, 1.0),
            [a, b, s] => (a, b, s),
            _ => return Err(bad()),
        };
        if !(step > 0.0) || b < a {
            return Err(bad());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + i as f64 * step).collect());
    }
    text.split(',').filter(|p| !p.trim().is_empty()).map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
}

/// Everything a command needs. Paths and the thread count are not echoed
/// into reports, so outputs do not depend on them.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub radius: f64,
    pub phi0: Option<f64>,
    pub phi_star: f64,
    pub delta: f64,
    pub sectors: usize,
    pub max_generations: usize,
    pub r_list: Vec<f64>,
    pub kappa: f64,
    pub z_max: f64,
    pub xi_max: f64,
    pub step: f64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub report: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: "build".into(),
            radius: 3.0,
            phi0: None,
            phi_star: 0.75 * PI,
            delta: DEFAULT_DELTA,
            sectors: 4,
            max_generations: DEFAULT_MAX_GENERATIONS,
            r_list: vec![2.0, 3.0, 4.0, 5.0, 6.0],
            kappa: 3.0,
            z_max: 12.0,
            xi_max: 10.0,
            step: ksurf::reference::DEFAULT_STEP,
            out: PathBuf::from("."),
            report: None,
            threads: None,
        }
    }
}

impl RunConfig {
    fn params_for(&self, radius: f64) -> Result<GreedyParams, CliError> {
        if !self.sectors.is_multiple_of(2) || self.sectors < 4 {
            return Err(CliError::Config(format!("--sectors must be even and at least 4, got {}", self.sectors)));
        }
        let mut p = GreedyParams::new(radius, self.sectors / 2, self.phi_star)
            .with_delta(self.delta)
            .with_max_generations(self.max_generations);
        if let Some(phi0) = self.phi0 {
            p = p.with_first_angle(phi0);
        }
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }

    /// Greedy parameters at the configured radius.
    pub fn greedy_params(&self) -> Result<GreedyParams, CliError> {
        self.params_for(self.radius)
    }

    /// Greedy parameters at another radius of a sweep.
    pub fn greedy_params_at(&self, radius: f64) -> Result<GreedyParams, CliError> {
        self.params_for(radius)
    }

    pub fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("--radius", self.radius)?;
        positive("--delta", self.delta)?;
        positive("--kappa", self.kappa)?;
        positive("--z-max", self.z_max)?;
        positive("--xi-max", self.xi_max)?;
        positive("--step", self.step)?;
        if self.threads == Some(0) {
            return bad("--threads must be at least 1".into());
        }
        if self.r_list.is_empty() {
            return bad("--r-list is empty".into());
        }
        for &r in &self.r_list {
            positive("--r-list entry", r)?;
        }
        if let Some(phi0) = self.phi0 {
            if !(phi0 > 0.0 && phi0 < PI) {
                return bad(format!("--phi0 must lie in (0, π), got {phi0}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("-pi/6").unwrap(), -PI / 6.0);
        assert_eq!(parse_angle("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle(" 4π/5 ").unwrap(), 4.0 * PI / 5.0);
        assert_eq!(parse_angle("PI/2").unwrap(), PI / 2.0);
        for bad in ["", "pi/0", "3pie", "x", "pi/", "nan", "inf"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("2,3,4").unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(parse_list("2:6").unwrap(), vec![2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(parse_list("1:2:0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_list("3:1").is_err());
        assert!(parse_list("a,b").is_err());
        assert!(parse_list("").unwrap().is_empty());
    }

    #[test]
    fn config_checks() {
        let c = RunConfig::default();
        assert!(c.check().is_ok());
        assert!(c.greedy_params().is_ok());
        let odd = RunConfig { sectors: 5, ..RunConfig::default() };
        assert!(matches!(odd.greedy_params(), Err(CliError::Config(_))));
        let wide = RunConfig { phi_star: 1.0, ..RunConfig::default() };
        assert!(matches!(wide.greedy_params(), Err(CliError::Config(_))));
        let zero = RunConfig { threads: Some(0), ..RunConfig::default() };
        assert!(zero.check().is_err());
        let empty = RunConfig { r_list: vec![], ..RunConfig::default() };
        assert!(empty.check().is_err());
    }
}
