use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use super::PassageTime;
use crate::geom::AcceptedGraph;
use crate::{Error, Result};

/// Edge speed law. Every member has a finite exponential moment near zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SpeedDistribution {
    Exponential { mean: f64 },
    HalfNormal { scale: f64 },
    Uniform { a: f64, b: f64 },
}

impl Default for SpeedDistribution {
    fn default() -> Self {
        SpeedDistribution::Exponential { mean: 1.0 }
    }
}

impl SpeedDistribution {
    fn validate(self) -> Result<Self> {
        let ok = match self {
            SpeedDistribution::Exponential { mean } => mean > 0.0 && mean.is_finite(),
            SpeedDistribution::HalfNormal { scale } => scale > 0.0 && scale.is_finite(),
            SpeedDistribution::Uniform { a, b } => a >= 0.0 && b > a && b.is_finite(),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::UnknownDistribution(format!("invalid parameters: {self}")))
        }
    }

    /// One positive draw; nonpositive values are redrawn.
    pub fn draw(&self, rng: &mut impl Rng) -> f64 {
        loop {
            let v = match *self {
                SpeedDistribution::Exponential { mean } => {
                    Exp::new(1.0 / mean).expect("validated").sample(rng)
                }
                SpeedDistribution::HalfNormal { scale } => {
                    Normal::new(0.0, scale).expect("validated").sample(rng).abs()
                }
                SpeedDistribution::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            };
            if v > 0.0 {
                return v;
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            SpeedDistribution::Exponential { mean } => mean,
            SpeedDistribution::HalfNormal { scale } => scale * (2.0 / std::f64::consts::PI).sqrt(),
            SpeedDistribution::Uniform { a, b } => 0.5 * (a + b),
        }
    }
}

impl fmt::Display for SpeedDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpeedDistribution::Exponential { mean } => write!(f, "exp:{mean}"),
            SpeedDistribution::HalfNormal { scale } => write!(f, "halfnormal:{scale}"),
            SpeedDistribution::Uniform { a, b } => write!(f, "uniform:{a}:{b}"),
        }
    }
}

impl FromStr for SpeedDistribution {
    type Err = Error;

    /// Parses `exp:MEAN`, `halfnormal:SCALE` or `uniform:A:B`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::UnknownDistribution(s.to_string()))?
                .parse::<f64>()
                .map_err(|_| Error::UnknownDistribution(s.to_string()))
        };
        let d = match (parts[0].to_ascii_lowercase().as_str(), parts.len()) {
            ("exp" | "exponential", 1) => SpeedDistribution::Exponential { mean: 1.0 },
            ("exp" | "exponential", 2) => SpeedDistribution::Exponential { mean: num(1)? },
            ("halfnormal" | "half_normal", 1) => SpeedDistribution::HalfNormal { scale: 1.0 },
            ("halfnormal" | "half_normal", 2) => SpeedDistribution::HalfNormal { scale: num(1)? },
            ("uniform", 3) => SpeedDistribution::Uniform {
                a: num(1)?,
                b: num(2)?,
            },
            _ => return Err(Error::UnknownDistribution(s.to_string())),
        };
        d.validate()
    }
}

impl TryFrom<String> for SpeedDistribution {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SpeedDistribution> for String {
    fn from(d: SpeedDistribution) -> String {
        d.to_string()
    }
}

/// I.i.d. speeds `eta_e`, one per graph edge in the graph's canonical
/// (lexicographic) edge order, with the derived edge weights `eta_e |e|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedField {
    pub distribution: SpeedDistribution,
    pub seed: u64,
    pub speeds: Vec<f64>,
    weights: Vec<PassageTime>,
}

impl SpeedField {
    /// Builds a field from explicit speeds (one per edge).
    pub fn from_speeds(
        graph: &AcceptedGraph,
        distribution: SpeedDistribution,
        seed: u64,
        speeds: Vec<f64>,
    ) -> Result<Self> {
        if speeds.len() != graph.edges.len() {
            return Err(Error::InvalidParameter(format!(
                "{} speeds for {} edges",
                speeds.len(),
                graph.edges.len()
            )));
        }
        if let Some(s) = speeds.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "speed must be positive, got {s}"
            )));
        }
        let weights = graph
            .edges
            .iter()
            .zip(&speeds)
            .map(|(e, s)| PassageTime::from_f64(s * e.length))
            .collect();
        Ok(SpeedField {
            distribution,
            seed,
            speeds,
            weights,
        })
    }

    /// Weight `eta_e |e|` of edge `e`.
    pub fn weight(&self, e: usize) -> PassageTime {
        self.weights[e]
    }

    pub fn weights(&self) -> &[PassageTime] {
        &self.weights
    }

    /// The same field with every speed multiplied by `c`.
    pub fn scaled(&self, graph: &AcceptedGraph, c: f64) -> Result<Self> {
        let speeds = self.speeds.iter().map(|s| s * c).collect();
        SpeedField::from_speeds(graph, self.distribution, self.seed, speeds)
    }
}

/// Draws one speed per edge, sequentially from a ChaCha8 stream seeded with
/// `seed`, in canonical edge order.
pub fn sample_speeds(
    graph: &AcceptedGraph,
    distribution: SpeedDistribution,
    seed: u64,
) -> Result<SpeedField> {
    let distribution = distribution.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let speeds = (0..graph.edges.len())
        .map(|_| distribution.draw(&mut rng))
        .collect();
    SpeedField::from_speeds(graph, distribution, seed, speeds)
}
