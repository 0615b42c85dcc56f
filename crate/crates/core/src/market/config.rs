use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// The school-sampling law, by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    Uniform,
    ParetoLow,
    ParetoHigh,
    TwoClass,
    Degenerate,
    Custom,
}

impl DistributionKind {
    /// The five named laws of the non-uniform experiments, in figure order.
    pub const NAMED: [DistributionKind; 5] = [
        DistributionKind::Uniform,
        DistributionKind::ParetoLow,
        DistributionKind::ParetoHigh,
        DistributionKind::TwoClass,
        DistributionKind::Degenerate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistributionKind::Uniform => "uniform",
            DistributionKind::ParetoLow => "pareto-low",
            DistributionKind::ParetoHigh => "pareto-high",
            DistributionKind::TwoClass => "two-class",
            DistributionKind::Degenerate => "degenerate",
            DistributionKind::Custom => "custom",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uniform" | "p1" => DistributionKind::Uniform,
            "pareto-low" | "p2" => DistributionKind::ParetoLow,
            "pareto-high" | "p3" => DistributionKind::ParetoHigh,
            "two-class" | "p4" => DistributionKind::TwoClass,
            "degenerate" | "p5" => DistributionKind::Degenerate,
            "custom" => DistributionKind::Custom,
            other => return Err(Error::config(format!("unknown distribution `{other}`"))),
        })
    }
}

/// A school-sampling law with its weights materialized for a fixed `n`.
///
/// Index `j` in `weights` is school `j + 1` in one-based notation. The
/// threshold laws are stated for 1000 schools; for other sizes the
/// two-class threshold is `ceil(n/5)` and the degenerate split is
/// `ceil(n/2)`. The degenerate law gives every light school one percent of
/// the uniform mass and the heavy schools the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    kind: DistributionKind,
    weights: Vec<f64>,
}

impl DistributionSpec {
    pub fn uniform(n: usize) -> Self {
        Self {
            kind: DistributionKind::Uniform,
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Builds one of the named laws. `Custom` needs explicit weights.
    pub fn named(kind: DistributionKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("n must be positive"));
        }
        let nf = n as f64;
        let raw: Vec<f64> = match kind {
            DistributionKind::Uniform => return Ok(Self::uniform(n)),
            DistributionKind::ParetoLow => (1..=n).map(|j| 1.0 / (2.0 + j as f64 / nf)).collect(),
            DistributionKind::ParetoHigh => (1..=n)
                .map(|j| (1.0 + j as f64 / nf).powi(-10))
                .collect(),
            DistributionKind::TwoClass => {
                let threshold = n.div_ceil(5);
                (1..=n)
                    .map(|j| if j <= threshold { 4.0 } else { 1.0 })
                    .collect()
            }
            DistributionKind::Degenerate => {
                let split = n.div_ceil(2);
                (1..=n)
                    .map(|j| if j <= split { 2.0 - 0.01 } else { 0.01 })
                    .collect()
            }
            DistributionKind::Custom => {
                return Err(Error::config("custom distribution requires explicit weights"))
            }
        };
        let total: f64 = raw.iter().sum();
        Ok(Self {
            kind,
            weights: raw.into_iter().map(|w| w / total).collect(),
        })
    }

    /// User-supplied weights; must be nonnegative and sum to one.
    pub fn custom(weights: Vec<f64>) -> Result<Self> {
        let spec = Self {
            kind: DistributionKind::Custom,
            weights,
        };
        spec.check_weights()?;
        Ok(spec)
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        self.kind == DistributionKind::Uniform
    }

    fn check_weights(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::config("distribution has no weights"));
        }
        if let Some(j) = self.weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::config(format!(
                "weight of school {} is {}; weights must be finite and nonnegative",
                j + 1,
                self.weights[j]
            )));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::config(format!("weights sum to {total}, expected 1")));
        }
        Ok(())
    }
}

/// Full description of one random market.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    /// Number of schools.
    pub n: usize,
    /// Preference list length.
    pub d: usize,
    /// Seats per school.
    pub q: usize,
    /// Number of students processed.
    pub m: usize,
    pub dist: DistributionSpec,
    pub seed: u64,
}

impl MarketConfig {
    /// One-seat uniform market with `m` students and seed 0.
    pub fn uniform(n: usize, d: usize, m: usize) -> Self {
        Self {
            n,
            d,
            q: 1,
            m,
            dist: DistributionSpec::uniform(n),
            seed: 0,
        }
    }

    pub fn with_seats(mut self, q: usize) -> Self {
        self.q = q;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_students(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_dist(mut self, dist: DistributionSpec) -> Self {
        self.dist = dist;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n must be at least 1"));
        }
        if self.d == 0 || self.d > self.n {
            return Err(Error::config(format!(
                "list length d = {} must satisfy 1 <= d <= n = {}",
                self.d, self.n
            )));
        }
        if self.q == 0 {
            return Err(Error::config("seats per school q must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::config("number of students m must be at least 1"));
        }
        if self.dist.weights.len() != self.n {
            return Err(Error::config(format!(
                "distribution has {} weights but the market has {} schools",
                self.dist.weights.len(),
                self.n
            )));
        }
        self.dist.check_weights()?;
        let positive = self.dist.weights.iter().filter(|w| **w > 0.0).count();
        if positive < self.d {
            return Err(Error::config(format!(
                "only {positive} schools have positive weight; lists of length {} impossible",
                self.d
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_laws_are_normalized_and_nonnegative() {
        for n in [1usize, 7, 1000, 1001] {
            for kind in DistributionKind::NAMED {
                let spec = DistributionSpec::named(kind, n).unwrap();
                assert_eq!(spec.weights().len(), n);
                spec.check_weights().unwrap();
            }
        }
    }

    #[test]
    fn two_class_and_degenerate_shapes_at_1000() {
        let tc = DistributionSpec::named(DistributionKind::TwoClass, 1000).unwrap();
        let w = tc.weights();
        assert!((w[199] / w[200] - 4.0).abs() < 1e-12);
        assert!((w[0] - 4.0 / 1600.0).abs() < 1e-15);

        let dg = DistributionSpec::named(DistributionKind::Degenerate, 1000).unwrap();
        let w = dg.weights();
        assert!((w[0] - 1.99 / 1000.0).abs() < 1e-15);
        assert!((w[999] - 0.01 / 1000.0).abs() < 1e-15);
        let heavy: f64 = w[..500].iter().sum();
        assert!((heavy - 0.995).abs() < 1e-12);
    }

    #[test]
    fn pareto_decreasing() {
        for kind in [DistributionKind::ParetoLow, DistributionKind::ParetoHigh] {
            let w = DistributionSpec::named(kind, 100).unwrap().weights().to_vec();
            assert!(w.windows(2).all(|p| p[0] > p[1]));
        }
        let hi = DistributionSpec::named(DistributionKind::ParetoHigh, 1000).unwrap();
        let ratio = hi.weights()[0] / hi.weights()[999];
        assert!((ratio - (2.0f64 / 1.001).powi(10)).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(MarketConfig::uniform(3, 3, 1).validate().is_ok());
        assert!(MarketConfig::uniform(3, 4, 1).validate().is_err());
        assert!(MarketConfig::uniform(3, 0, 1).validate().is_err());
        assert!(MarketConfig::uniform(3, 1, 0).validate().is_err());
        assert!(MarketConfig::uniform(3, 1, 1).with_seats(0).validate().is_err());
        let wrong_len = MarketConfig::uniform(3, 1, 1).with_dist(DistributionSpec::uniform(4));
        assert!(wrong_len.validate().is_err());
        let sparse = DistributionSpec::custom(vec![0.5, 0.5, 0.0]).unwrap();
        assert!(MarketConfig::uniform(3, 2, 1).with_dist(sparse.clone()).validate().is_ok());
        assert!(MarketConfig::uniform(3, 3, 1).with_dist(sparse).validate().is_err());
        assert!(DistributionSpec::custom(vec![0.5, 0.6]).is_err());
        assert!(DistributionSpec::custom(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in DistributionKind::NAMED {
            assert_eq!(kind.name().parse::<DistributionKind>().unwrap(), kind);
        }
        assert!("zipf".parse::<DistributionKind>().is_err());
    }
}
