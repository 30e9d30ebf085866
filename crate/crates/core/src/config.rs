//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowConfig, Integrator};
use crate::geometry::AxiSurface;
use crate::identities::LadderConfig;
use crate::pinching::{PinchingConstants, ToleranceModel};
use crate::singularity::AnalysisConfig;
use crate::speed::SpeedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keyword {
    Auto,
}

/// A number or the string `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrAuto {
    Value(f64),
    Auto(Keyword),
}

impl OrAuto {
    pub fn value(&self) -> Option<f64> {
        match self {
            OrAuto::Value(v) => Some(*v),
            OrAuto::Auto(_) => None,
        }
    }
}

impl Default for OrAuto {
    fn default() -> Self {
        OrAuto::Auto(Keyword::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    LogSpeed,
    McfReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedSection {
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_h0")]
    pub h0: f64,
}

fn default_h0() -> f64 {
    std::f64::consts::E
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometrySection {
    Sphere {
        radius: f64,
        #[serde(alias = "nodes")]
        segments: usize,
    },
    Spheroid {
        a: f64,
        c: f64,
        #[serde(alias = "nodes")]
        segments: usize,
    },
    ProfileFile {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub h_stop: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: f64,
    #[serde(default = "default_snapshot_h_factor")]
    pub snapshot_h_factor: f64,
    #[serde(default = "default_redistribute")]
    pub redistribute_every: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_integrator")]
    pub integrator: Integrator,
}

fn default_cfl() -> f64 {
    0.2
}
fn default_dt_min() -> f64 {
    1e-14
}
fn default_snapshot_every() -> f64 {
    1e300
}
fn default_snapshot_h_factor() -> f64 {
    1.25
}
fn default_redistribute() -> usize {
    20
}
fn default_max_steps() -> usize {
    50_000_000
}
fn default_integrator() -> Integrator {
    Integrator::Midpoint
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PinchingSection {
    #[serde(rename = "C", default)]
    pub c: OrAuto,
    #[serde(default)]
    pub sigma: OrAuto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSchedule {
    Auto(Keyword),
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularitySection {
    #[serde(default = "default_threshold")]
    pub classifier_threshold: f64,
    #[serde(default = "default_k")]
    pub k_schedule: KSchedule,
    #[serde(default = "default_k_levels")]
    pub k_levels: usize,
    #[serde(default = "default_roundness")]
    pub roundness_threshold: f64,
}

fn default_threshold() -> f64 {
    0.2
}
fn default_k() -> KSchedule {
    KSchedule::Auto(Keyword::Auto)
}
fn default_k_levels() -> usize {
    6
}
fn default_roundness() -> f64 {
    0.05
}

impl Default for SingularitySection {
    fn default() -> Self {
        Self {
            classifier_threshold: default_threshold(),
            k_schedule: default_k(),
            k_levels: default_k_levels(),
            roundness_threshold: default_roundness(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_segments")]
    pub segments: Vec<usize>,
    #[serde(default = "default_dt_coeff")]
    pub dt_coeff: f64,
    #[serde(default = "default_time_segments")]
    pub time_segments: usize,
    #[serde(default = "default_dts")]
    pub dts: Vec<f64>,
    #[serde(default = "default_ladder_sigma")]
    pub ladder_sigma: f64,
    #[serde(default = "default_c1")]
    pub tolerance_c1: f64,
    #[serde(default = "default_c2")]
    pub tolerance_c2: f64,
    #[serde(default = "default_min_order_ds")]
    pub min_order_ds: f64,
    #[serde(default = "default_min_order_dt")]
    pub min_order_dt: f64,
}

fn default_segments() -> Vec<usize> {
    LadderConfig::default().segments
}
fn default_dt_coeff() -> f64 {
    LadderConfig::default().dt_coeff
}
fn default_time_segments() -> usize {
    LadderConfig::default().time_segments
}
fn default_dts() -> Vec<f64> {
    LadderConfig::default().dts
}
fn default_ladder_sigma() -> f64 {
    LadderConfig::default().sigma
}
fn default_c1() -> f64 {
    ToleranceModel::default().c1
}
fn default_c2() -> f64 {
    ToleranceModel::default().c2
}
fn default_min_order_ds() -> f64 {
    1.8
}
fn default_min_order_dt() -> f64 {
    1.0
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            segments: default_segments(),
            dt_coeff: default_dt_coeff(),
            time_segments: default_time_segments(),
            dts: default_dts(),
            ladder_sigma: default_ladder_sigma(),
            tolerance_c1: default_c1(),
            tolerance_c2: default_c2(),
            min_order_ds: default_min_order_ds(),
            min_order_dt: default_min_order_dt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    pub speed: SpeedSection,
    pub geometry: GeometrySection,
    pub flow: FlowSection,
    #[serde(default)]
    pub pinching: PinchingSection,
    #[serde(default)]
    pub singularity: SingularitySection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// 1-based line of the first `"key"` after the first `"section"`, or of the
/// first `"key"` anywhere.
fn line_of(src: &str, section: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    let from = src.find(&format!("\"{section}\"")).unwrap_or(0);
    let pos = src[from..]
        .find(&needle)
        .map(|p| p + from)
        .or_else(|| src.find(&needle));
    match pos {
        Some(p) => src[..p].matches('\n').count() + 1,
        None => 1,
    }
}

impl RunConfig {
    pub fn from_str_named(src: &str, name: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(src)
            .map_err(|e| Error::Config(format!("{name}:{}: {e}", e.line())))?;
        cfg.validate(src, name)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: cannot read config: {e}", path.display())))?;
        let mut cfg = Self::from_str_named(&src, &path.display().to_string())?;
        if let GeometrySection::ProfileFile { path: p } = &mut cfg.geometry {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    fn validate(&self, src: &str, name: &str) -> Result<()> {
        let fail = |section: &str, key: &str, msg: String| -> Result<()> {
            Err(Error::Config(format!(
                "{name}:{}: {section}.{key} {msg}",
                line_of(src, section, key)
            )))
        };
        let positive = |section: &str, key: &str, v: f64| -> Result<()> {
            if !(v > 0.0) || !v.is_finite() {
                return fail(section, key, format!("must be a positive number, got {v}"));
            }
            Ok(())
        };
        match (self.mode, self.speed.alpha) {
            (Mode::LogSpeed, None) => {
                return fail("speed", "alpha", "is required in log-speed mode".into())
            }
            (Mode::LogSpeed, Some(a)) => positive("speed", "alpha", a)?,
            (Mode::McfReference, Some(a)) if a != 0.0 => {
                return fail(
                    "speed",
                    "alpha",
                    format!("must be 0 or absent in mcf-reference mode, got {a}"),
                )
            }
            _ => {}
        }
        if !(self.speed.h0 >= std::f64::consts::E) {
            return fail(
                "speed",
                "h0",
                format!("must be >= e, got {}", self.speed.h0),
            );
        }
        match &self.geometry {
            GeometrySection::Sphere { radius, segments } => {
                positive("geometry", "radius", *radius)?;
                if *segments < 8 {
                    return fail(
                        "geometry",
                        "segments",
                        format!("must be >= 8, got {segments}"),
                    );
                }
            }
            GeometrySection::Spheroid { a, c, segments } => {
                positive("geometry", "a", *a)?;
                positive("geometry", "c", *c)?;
                if *segments < 8 {
                    return fail(
                        "geometry",
                        "segments",
                        format!("must be >= 8, got {segments}"),
                    );
                }
            }
            GeometrySection::ProfileFile { .. } => {}
        }
        let f = &self.flow;
        if !(f.cfl > 0.0 && f.cfl <= 1.0) {
            return fail("flow", "cfl", format!("must lie in (0, 1], got {}", f.cfl));
        }
        positive("flow", "h_stop", f.h_stop)?;
        positive("flow", "dt_min", f.dt_min)?;
        positive("flow", "snapshot_every", f.snapshot_every)?;
        positive("flow", "snapshot_h_factor", f.snapshot_h_factor)?;
        if f.redistribute_every == 0 {
            return fail("flow", "redistribute_every", "must be >= 1".into());
        }
        if f.max_steps == 0 {
            return fail("flow", "max_steps", "must be >= 1".into());
        }
        if let Some(c) = self.pinching.c.value() {
            if !(c > 0.0 && c < 0.25) {
                return fail("pinching", "C", format!("must lie in (0, 1/4), got {c}"));
            }
        }
        if let Some(s) = self.pinching.sigma.value() {
            positive("pinching", "sigma", s)?;
        }
        let s = &self.singularity;
        positive(
            "singularity",
            "classifier_threshold",
            s.classifier_threshold,
        )?;
        positive("singularity", "roundness_threshold", s.roundness_threshold)?;
        if let KSchedule::List(ks) = &s.k_schedule {
            if ks.is_empty() || ks.iter().any(|k| !(*k > 0.0)) {
                return fail(
                    "singularity",
                    "k_schedule",
                    "must be \"auto\" or a nonempty list of positive numbers".into(),
                );
            }
        }
        if s.k_levels < 3 {
            return fail(
                "singularity",
                "k_levels",
                format!("must be >= 3, got {}", s.k_levels),
            );
        }
        let v = &self.verify;
        if v.segments.len() < 3 || v.segments.iter().any(|&n| n < 8) {
            return fail(
                "verify",
                "segments",
                "needs at least 3 levels of >= 8 segments".into(),
            );
        }
        if v.dts.len() < 4 || v.dts.iter().any(|d| !(*d > 0.0)) {
            return fail("verify", "dts", "needs at least 4 positive steps".into());
        }
        positive("verify", "dt_coeff", v.dt_coeff)?;
        positive("verify", "ladder_sigma", v.ladder_sigma)?;
        positive("verify", "tolerance_c1", v.tolerance_c1)?;
        positive("verify", "tolerance_c2", v.tolerance_c2)?;
        Ok(())
    }

    pub fn speed(&self) -> Result<SpeedParams> {
        match self.mode {
            Mode::McfReference => SpeedParams::mean_curvature_reference(self.speed.h0),
            Mode::LogSpeed => SpeedParams::new(self.speed.alpha.unwrap_or(0.0), self.speed.h0),
        }
    }

    pub fn initial_surface(&self) -> Result<AxiSurface> {
        match &self.geometry {
            GeometrySection::Sphere { radius, segments } => AxiSurface::sphere(*radius, *segments),
            GeometrySection::Spheroid { a, c, segments } => AxiSurface::spheroid(*a, *c, *segments),
            GeometrySection::ProfileFile { path } => crate::io::read_profile(path, 0.0),
        }
    }

    /// `None` in mcf-reference mode, where `σ` defaults to zero.
    pub fn pinching_constants(&self) -> Result<Option<PinchingConstants>> {
        let sp = self.speed()?;
        if sp.is_reference() {
            return Ok(None);
        }
        PinchingConstants::derive(
            2,
            sp.alpha(),
            self.pinching.c.value(),
            self.pinching.sigma.value(),
        )
        .map(Some)
    }

    pub fn sigma(&self) -> Result<f64> {
        Ok(match self.pinching_constants()? {
            Some(c) => c.sigma,
            None => self.pinching.sigma.value().unwrap_or(0.0),
        })
    }

    pub fn flow_config(&self) -> Result<FlowConfig> {
        let f = &self.flow;
        let mut cfg = FlowConfig::new(self.speed()?, f.h_stop);
        cfg.cfl = f.cfl;
        cfg.dt_min = f.dt_min;
        cfg.snapshot_every = f.snapshot_every;
        cfg.snapshot_h_factor = f.snapshot_h_factor;
        cfg.redistribute_every = f.redistribute_every;
        cfg.max_steps = f.max_steps;
        cfg.integrator = f.integrator;
        cfg.sigma = self.sigma()?;
        Ok(cfg)
    }

    pub fn analysis(&self) -> AnalysisConfig {
        let s = &self.singularity;
        AnalysisConfig {
            classifier_threshold: s.classifier_threshold,
            k_schedule: match &s.k_schedule {
                KSchedule::Auto(_) => Vec::new(),
                KSchedule::List(v) => v.clone(),
            },
            k_levels: s.k_levels,
            roundness_threshold: s.roundness_threshold,
        }
    }

    pub fn ladder(&self) -> LadderConfig {
        let v = &self.verify;
        LadderConfig {
            segments: v.segments.clone(),
            dt_coeff: v.dt_coeff,
            time_segments: v.time_segments,
            dts: v.dts.clone(),
            sigma: v.ladder_sigma,
            floor: 1e-12,
        }
    }

    pub fn tolerance_model(&self) -> ToleranceModel {
        ToleranceModel {
            c1: self.verify.tolerance_c1,
            c2: self.verify.tolerance_c2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
  "speed": { "alpha": 1.0 },
  "geometry": { "kind": "spheroid", "a": 1.0, "c": 1.1, "segments": 64 },
  "flow": { "h_stop": 50.0 },
  "pinching": { "C": "auto", "sigma": "auto" }
}"#;

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::from_str_named(GOOD, "good.json").unwrap();
        assert_eq!(c.flow.cfl, 0.2);
        assert_eq!(c.pinching.c, OrAuto::Auto(Keyword::Auto));
        assert!(c.sigma().unwrap() > 0.0);
    }

    #[test]
    fn negative_cfl_names_key_and_line() {
        let bad = GOOD.replace("\"h_stop\": 50.0", "\"h_stop\": 50.0,\n    \"cfl\": -0.5");
        let err = RunConfig::from_str_named(&bad, "bad.json")
            .unwrap_err()
            .to_string();
        assert!(err.contains("flow.cfl"), "{err}");
        assert!(err.starts_with("bad.json:5:"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = RunConfig::from_str_named("{\n\"speed\": }", "x.json")
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("x.json:2:"), "{err}");
    }

    #[test]
    fn reference_mode_gives_zero_sigma() {
        let src = GOOD.replace(
            "\"speed\": { \"alpha\": 1.0 }",
            "\"mode\": \"mcf-reference\", \"speed\": {}",
        );
        let c = RunConfig::from_str_named(&src, "m.json").unwrap();
        assert_eq!(c.sigma().unwrap(), 0.0);
        assert!(c.speed().unwrap().is_reference());
    }
}
