use serde::{Deserialize, Serialize};

use crate::fpp::{SpeedDistribution, CENSOR_DISTANCE};
use crate::geom::DEFAULT_DELTA_G;
use crate::point::Point;
use crate::pointproc::{Window, DEFAULT_MARGIN};
use crate::scaling::MIN_SAMPLES;
use crate::{Error, Result};

pub const EXPERIMENT_SCHEMA: &str = "fpplab.experiment/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Hmu,
    MonotoneH,
    Fluctuation,
    Wandering,
    Straightness,
    Density,
    /// Everything above from one seed set.
    Suite,
}

impl ExperimentKind {
    /// Every kind except `density` needs the passage-time sweep along the
    /// axis, either as its output or for the plug-in `h` and `sigma`.
    pub fn hmu(self) -> bool {
        self != ExperimentKind::Density
    }

    fn includes(self, k: ExperimentKind) -> bool {
        self == k || self == ExperimentKind::Suite
    }

    pub fn monotone_h(self) -> bool {
        self.includes(ExperimentKind::MonotoneH)
    }

    pub fn fluctuation(self) -> bool {
        self.includes(ExperimentKind::Fluctuation)
    }

    pub fn wandering(self) -> bool {
        self.includes(ExperimentKind::Wandering)
    }

    pub fn straightness(self) -> bool {
        self.includes(ExperimentKind::Straightness)
    }

    pub fn density(self) -> bool {
        self.includes(ExperimentKind::Density)
    }

    /// Kinds that sample pairs inside a cylinder of width `K Delta_r` and so
    /// need a pilot estimate of `Delta_r`.
    pub fn needs_pilot(self) -> bool {
        self.fluctuation() || self.wandering()
    }
}

/// Statistics window `[-pad, length + pad] x [-half_height, half_height]`;
/// the origin and `r e_1` for every `r <= length` lie inside it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowPolicy {
    pub length: f64,
    pub half_height: f64,
    #[serde(default = "default_pad")]
    pub pad: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

impl WindowPolicy {
    pub fn window(&self) -> Result<Window> {
        Window::new(
            Point::new(-self.pad, -self.half_height),
            Point::new(self.length + self.pad, self.half_height),
            self.margin,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HmuConfig {
    /// Distances `r` at which `T(0, r e_1)` is recorded; empty means every
    /// multiple of 10 up to the window length.
    pub r: Vec<f64>,
    /// Range of `r` used by the exponent and regression fits.
    pub fit_min: f64,
    pub fit_max: Option<f64>,
    /// Constant of the `C sigma_r log r` envelope used for the lower end of
    /// the `mu` bracket.
    pub c46: f64,
}

impl Default for HmuConfig {
    fn default() -> Self {
        HmuConfig {
            r: Vec::new(),
            fit_min: 20.0,
            fit_max: None,
            c46: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonotoneConfig {
    pub epsilon: f64,
}

impl Default for MonotoneConfig {
    fn default() -> Self {
        MonotoneConfig { epsilon: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluctuationConfig {
    pub r: f64,
    /// Cylinder radii in units of `Delta_r`.
    pub k: Vec<f64>,
    /// Pairs must satisfy `(y - x)_1 >= epsilon r`.
    pub epsilon: f64,
    pub pairs: usize,
    pub t: Vec<f64>,
    /// Thresholds below `c26 K^2` are reported with a warning.
    pub c26: f64,
}

impl Default for FluctuationConfig {
    fn default() -> Self {
        FluctuationConfig {
            r: 100.0,
            k: vec![1.0, 2.0],
            epsilon: 0.25,
            pairs: 64,
            t: step_grid(0.0, 8.0, 0.125),
            c26: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WanderingConfig {
    pub r: f64,
    pub k: f64,
    pub epsilon: f64,
    pub pairs: usize,
    pub s: Vec<f64>,
    pub c34: f64,
}

impl Default for WanderingConfig {
    fn default() -> Self {
        WanderingConfig {
            r: 100.0,
            k: 1.0,
            epsilon: 0.25,
            pairs: 64,
            s: step_grid(0.25, 4.0, 0.125),
            c34: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StraightnessConfig {
    pub r: Vec<f64>,
    pub t: Vec<f64>,
    pub c23: f64,
    /// Upper exponent for `sigma*`; defaults to `chi_hat + 0.1` (capped
    /// below 1).
    pub chi2: Option<f64>,
}

impl Default for StraightnessConfig {
    fn default() -> Self {
        StraightnessConfig {
            r: vec![50.0, 100.0, 200.0],
            t: step_grid(0.0, 16.0, 0.25),
            c23: 1.0,
            chi2: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    pub radii: Vec<f64>,
    /// Thresholds for `|V cap B_r(c)| / r^2`.
    pub a: Vec<f64>,
    /// Ball centres per replica, spread evenly along the axis.
    pub centers: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            radii: vec![5.0, 10.0, 20.0],
            a: step_grid(3.0, 4.6, 0.02),
            centers: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub name: String,
    pub seed: u64,
    pub replicas: usize,
    /// Replicas used to estimate `Delta_r` before pairs are sampled.
    #[serde(default = "default_pilot")]
    pub pilot_replicas: usize,
    #[serde(default)]
    pub speed: SpeedDistribution,
    #[serde(default = "default_delta_g")]
    pub delta_g: f64,
    pub window: WindowPolicy,
    #[serde(default)]
    pub hmu: HmuConfig,
    #[serde(default)]
    pub monotone_h: MonotoneConfig,
    #[serde(default)]
    pub fluctuation: FluctuationConfig,
    #[serde(default)]
    pub wandering: WanderingConfig,
    #[serde(default)]
    pub straightness: StraightnessConfig,
    #[serde(default)]
    pub density: DensityConfig,
}

fn default_pad() -> f64 {
    10.0
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

fn default_pilot() -> usize {
    40
}

fn default_delta_g() -> f64 {
    DEFAULT_DELTA_G
}

/// `lo, lo + step, ...` up to `hi` (inclusive within rounding).
pub fn step_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn check_grid(name: &str, g: &[f64], allow_zero: bool) -> Result<()> {
    if g.is_empty() {
        return Err(Error::Config(format!("{name} grid is empty")));
    }
    if let Some(v) = g
        .iter()
        .find(|v| !(v.is_finite() && (**v > 0.0 || allow_zero && **v == 0.0)))
    {
        return Err(Error::Config(format!("{name} grid has invalid value {v}")));
    }
    if g.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(format!("{name} grid is not strictly increasing")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    /// Parses TOML, checking the schema id before anything else.
    pub fn from_toml(s: &str) -> Result<Self> {
        let value: toml::Table = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        let found = value
            .get("schema")
            .and_then(|v| v.as_str())
            .unwrap_or("<missing>");
        if found != EXPERIMENT_SCHEMA {
            return Err(Error::Schema {
                expected: EXPERIMENT_SCHEMA.into(),
                found: found.into(),
            });
        }
        let mut cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.fill_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    fn fill_defaults(&mut self) {
        if self.hmu.r.is_empty() {
            self.hmu.r = step_grid(10.0, self.window.length, 10.0);
        }
    }

    /// Upper end of the fit range.
    pub fn fit_max(&self) -> f64 {
        self.hmu.fit_max.unwrap_or(self.window.length)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != EXPERIMENT_SCHEMA {
            return Err(Error::Schema {
                expected: EXPERIMENT_SCHEMA.into(),
                found: self.schema.clone(),
            });
        }
        if self.replicas < MIN_SAMPLES {
            return Err(Error::Config(format!(
                "replicas must be at least {MIN_SAMPLES}, got {}",
                self.replicas
            )));
        }
        if !(self.delta_g > 0.0 && self.delta_g < 1.0) {
            return Err(Error::Config(format!(
                "delta_g must lie in (0, 1), got {}",
                self.delta_g
            )));
        }
        let w = &self.window;
        check_positive("window.length", w.length)?;
        check_positive("window.half_height", w.half_height)?;
        if !(w.pad >= CENSOR_DISTANCE + 1.0) {
            return Err(Error::Config(format!(
                "window.pad must be at least {}, got {}",
                CENSOR_DISTANCE + 1.0,
                w.pad
            )));
        }
        w.window().map_err(|e| Error::Config(e.to_string()))?;
        let length = w.length * (1.0 + 1e-12);
        let kind = self.kind;
        if kind.hmu() {
            check_grid("hmu.r", &self.hmu.r, false)?;
            if self.hmu.r.last().is_some_and(|&r| r > length) {
                return Err(Error::Config("hmu.r exceeds window.length".into()));
            }
            check_positive("hmu.c46", self.hmu.c46)?;
            let in_fit = self
                .hmu
                .r
                .iter()
                .filter(|&&r| r >= self.hmu.fit_min && r <= self.fit_max())
                .count();
            if in_fit < 4 {
                return Err(Error::Config(format!(
                    "need at least 4 hmu.r values in the fit range, got {in_fit}"
                )));
            }
        }
        if kind.monotone_h() && !(self.monotone_h.epsilon > 0.0 && self.monotone_h.epsilon < 1.0) {
            return Err(Error::Config("monotone_h.epsilon must lie in (0, 1)".into()));
        }
        if kind.needs_pilot() && !(MIN_SAMPLES..=self.replicas).contains(&self.pilot_replicas) {
            return Err(Error::Config(format!(
                "pilot_replicas must lie in [{MIN_SAMPLES}, replicas], got {}",
                self.pilot_replicas
            )));
        }
        let (r_lo, r_hi) = (
            self.hmu.r.first().copied().unwrap_or(0.0),
            self.hmu.r.last().copied().unwrap_or(0.0),
        );
        let in_hmu = |name: &str, r: f64| {
            if r >= r_lo && r <= r_hi {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} = {r} outside the hmu.r range [{r_lo}, {r_hi}]"
                )))
            }
        };
        if kind.fluctuation() {
            let f = &self.fluctuation;
            in_hmu("fluctuation.r", f.r)?;
            check_grid("fluctuation.k", &f.k, false)?;
            check_grid("fluctuation.t", &f.t, true)?;
            if !(f.epsilon > 0.0 && f.epsilon < 1.0) {
                return Err(Error::Config("fluctuation.epsilon must lie in (0, 1)".into()));
            }
            if f.pairs == 0 {
                return Err(Error::Config("fluctuation.pairs must be positive".into()));
            }
            check_positive("fluctuation.c26", f.c26)?;
            // pair separations reach sqrt(r^2 + (2 K Delta)^2); h is interpolated
            // from the hmu grid and must cover them
            if r_hi < f.r {
                return Err(Error::Config("hmu.r must extend to fluctuation.r".into()));
            }
        }
        if kind.wandering() {
            let wd = &self.wandering;
            in_hmu("wandering.r", wd.r)?;
            check_positive("wandering.k", wd.k)?;
            check_grid("wandering.s", &wd.s, false)?;
            check_positive("wandering.c34", wd.c34)?;
            if !(wd.epsilon > 0.0 && wd.epsilon < 1.0) {
                return Err(Error::Config("wandering.epsilon must lie in (0, 1)".into()));
            }
            if wd.pairs == 0 {
                return Err(Error::Config("wandering.pairs must be positive".into()));
            }
        }
        if kind.straightness() {
            let s = &self.straightness;
            check_grid("straightness.r", &s.r, false)?;
            check_grid("straightness.t", &s.t, true)?;
            if s.r.last().is_some_and(|&r| r > length) {
                return Err(Error::Config("straightness.r exceeds window.length".into()));
            }
            check_positive("straightness.c23", s.c23)?;
            if let Some(c) = s.chi2 {
                if !(c > 0.0 && c < 1.0) {
                    return Err(Error::Config("straightness.chi2 must lie in (0, 1)".into()));
                }
            }
        }
        if kind.density() {
            let d = &self.density;
            check_grid("density.radii", &d.radii, false)?;
            check_grid("density.a", &d.a, true)?;
            if d.centers == 0 {
                return Err(Error::Config("density.centers must be positive".into()));
            }
            let rmax = *d.radii.last().unwrap();
            if rmax > w.half_height + w.margin || rmax > w.length / 2.0 + w.pad + w.margin {
                return Err(Error::Config(format!(
                    "density radius {rmax} does not fit inside the sampled region"
                )));
            }
        }
        Ok(())
    }
}
