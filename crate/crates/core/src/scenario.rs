//! Scenario files: a human-readable TOML description of the sector geometry,
//! traffic process, separation standards, reward constants, timing, and
//! optional trainer overrides.
//!
//! Routes are listed in order (their index is the route id); crossing and
//! merge annotations give a planar point that must lie on every referenced
//! route, from which the along-route arc positions are derived.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::SpeedEnvelope;
use crate::env::{ArrivalProcess, EnvError, ScenarioConfig};
use crate::geometry::{
    CrossingPoint, GeometryError, MergePoint, Point, Route, RouteId, SectorLayout,
    ON_ROUTE_TOL_NMI,
};
use crate::rl::TrainerConfig;

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario not found: {0}")]
    NotFound(PathBuf),
    #[error("cannot read scenario {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("unsupported scenario format version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub traffic: TrafficSection,
    #[serde(default)]
    pub separation: SeparationSection,
    #[serde(default)]
    pub reward: RewardSection,
    #[serde(default)]
    pub timing: TimingSection,
    #[serde(default = "SpeedEnvelope::default")]
    pub envelope: SpeedEnvelope,
    #[serde(default, rename = "route")]
    pub routes: Vec<RouteSection>,
    #[serde(default, rename = "crossing")]
    pub crossings: Vec<CrossingSection>,
    #[serde(default, rename = "merge")]
    pub merges: Vec<MergeSection>,
    /// Optional trainer overrides; command-line flags take precedence.
    #[serde(default)]
    pub trainer: Option<TrainerConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    pub max_aircraft: usize,
    pub n_closest: usize,
    pub entry_speed_kts: f64,
    pub arrivals: ArrivalsSection,
}

impl Default for TrafficSection {
    fn default() -> Self {
        TrafficSection {
            max_aircraft: 30,
            n_closest: 3,
            entry_speed_kts: 470.0,
            arrivals: ArrivalsSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrivalsSection {
    Discrete { choices_s: Vec<f64> },
    Continuous { min_s: f64, max_s: f64 },
}

impl Default for ArrivalsSection {
    fn default() -> Self {
        ArrivalsSection::Discrete { choices_s: vec![240.0, 300.0, 360.0] }
    }
}

impl From<ArrivalsSection> for ArrivalProcess {
    fn from(section: ArrivalsSection) -> Self {
        match section {
            ArrivalsSection::Discrete { choices_s } => ArrivalProcess::DiscreteGaps { choices_s },
            ArrivalsSection::Continuous { min_s, max_s } => {
                ArrivalProcess::ContinuousGaps { min_s, max_s }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationSection {
    pub los_nmi: f64,
    pub alert_nmi: f64,
}

impl Default for SeparationSection {
    fn default() -> Self {
        SeparationSection { los_nmi: 3.0, alert_nmi: 10.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSection {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for RewardSection {
    fn default() -> Self {
        RewardSection { alpha: 0.1, beta: 0.005 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSection {
    pub dt_s: f64,
    pub sub_step_s: f64,
    pub substep_conflict_checks: bool,
}

impl Default for TimingSection {
    fn default() -> Self {
        TimingSection { dt_s: 12.0, sub_step_s: 1.0, substep_conflict_checks: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSection {
    pub waypoints: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingSection {
    pub routes: [usize; 2],
    /// Planar point of the crossing; must lie on both routes.
    pub at: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeSection {
    pub upstream: Vec<usize>,
    /// Planar merge point; must lie on every upstream route, which must
    /// share their geometry downstream of it.
    pub at: [f64; 2],
}

/// A parsed and validated scenario plus its file-level metadata.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub name: String,
    pub config: ScenarioConfig,
    pub trainer: Option<TrainerConfig>,
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<ScenarioFile, ScenarioError> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        if file.format_version != SCENARIO_FORMAT_VERSION {
            return Err(ScenarioError::Version {
                found: file.format_version,
                supported: SCENARIO_FORMAT_VERSION,
            });
        }
        Ok(file)
    }

    pub fn build(self) -> Result<LoadedScenario, ScenarioError> {
        if self.routes.is_empty() {
            return Err(ScenarioError::Invalid("scenario defines no routes".into()));
        }
        let mut routes = Vec::with_capacity(self.routes.len());
        for (i, section) in self.routes.iter().enumerate() {
            let waypoints: Vec<Point> =
                section.waypoints.iter().map(|&[x, y]| Point::new(x, y)).collect();
            routes.push(Route::new(RouteId(i), waypoints)?);
        }

        let arc_of = |route_idx: usize, at: [f64; 2], what: &str| -> Result<f64, ScenarioError> {
            let route: &Route = routes.get(route_idx).ok_or_else(|| {
                ScenarioError::Invalid(format!("{what} references unknown route {route_idx}"))
            })?;
            route.arc_position_of(Point::new(at[0], at[1]), ON_ROUTE_TOL_NMI).ok_or_else(|| {
                ScenarioError::Invalid(format!(
                    "{what} point ({}, {}) does not lie on route {route_idx}",
                    at[0], at[1]
                ))
            })
        };

        let mut crossings = Vec::with_capacity(self.crossings.len());
        for (i, c) in self.crossings.iter().enumerate() {
            let what = format!("crossing {i}");
            crossings.push(CrossingPoint {
                routes: (RouteId(c.routes[0]), RouteId(c.routes[1])),
                arc_positions: (arc_of(c.routes[0], c.at, &what)?, arc_of(c.routes[1], c.at, &what)?),
            });
        }

        let mut merges = Vec::with_capacity(self.merges.len());
        for (i, m) in self.merges.iter().enumerate() {
            let what = format!("merge {i}");
            if m.upstream.len() < 2 {
                return Err(ScenarioError::Invalid(format!(
                    "{what} needs at least two upstream routes"
                )));
            }
            let mut arc_positions = Vec::with_capacity(m.upstream.len());
            for &r in &m.upstream {
                arc_positions.push(arc_of(r, m.at, &what)?);
            }
            // The shared segment is the first upstream route's geometry from
            // the merge point on; layout validation checks the others match.
            let lead = &routes[m.upstream[0]];
            let lead_arc = arc_positions[0];
            let mut shared_segment = vec![lead.position_at(lead_arc)?];
            shared_segment.extend(
                lead.waypoints
                    .iter()
                    .zip(&lead.cumulative_lengths)
                    .filter(|&(_, &c)| c > lead_arc + ON_ROUTE_TOL_NMI)
                    .map(|(&p, _)| p),
            );
            merges.push(MergePoint {
                upstream_routes: m.upstream.iter().map(|&r| RouteId(r)).collect(),
                arc_positions,
                shared_segment,
            });
        }

        let layout = SectorLayout::new(routes, crossings, merges)?;
        let config = ScenarioConfig {
            layout,
            max_aircraft: self.traffic.max_aircraft,
            arrivals: self.traffic.arrivals.into(),
            n_closest: self.traffic.n_closest,
            los_nmi: self.separation.los_nmi,
            alert_nmi: self.separation.alert_nmi,
            alpha: self.reward.alpha,
            beta_reward: self.reward.beta,
            dt_s: self.timing.dt_s,
            sub_step_s: self.timing.sub_step_s,
            envelope: self.envelope,
            entry_speed_kts: self.traffic.entry_speed_kts,
            substep_conflict_checks: self.timing.substep_conflict_checks,
            rng_seed: self.seed,
        };
        config.validate()?;
        if let Some(trainer) = &self.trainer {
            trainer.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        }
        Ok(LoadedScenario { name: self.name, config, trainer: self.trainer })
    }
}

/// Read, parse, and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<LoadedScenario, ScenarioError> {
    if !path.exists() {
        return Err(ScenarioError::NotFound(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    ScenarioFile::from_toml(&text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
format_version = 1
name = "single"

[[route]]
waypoints = [[0.0, 0.0], [200.0, 0.0]]
"#;

    const CROSSING: &str = r#"
format_version = 1
name = "crossing"
seed = 3

[traffic]
max_aircraft = 10
n_closest = 2
entry_speed_kts = 470.0

[traffic.arrivals]
mode = "discrete"
choices_s = [240.0, 300.0]

[[route]]
waypoints = [[50.0, -100.0], [50.0, 100.0]]

[[route]]
waypoints = [[0.0, 0.0], [200.0, 0.0]]

[[crossing]]
routes = [0, 1]
at = [50.0, 0.0]
"#;

    const MERGE: &str = r#"
format_version = 1
name = "merge"

[[route]]
waypoints = [[-80.0, 60.0], [0.0, 0.0], [100.0, 0.0]]

[[route]]
waypoints = [[-80.0, -60.0], [0.0, 0.0], [100.0, 0.0]]

[[merge]]
upstream = [0, 1]
at = [0.0, 0.0]
"#;

    #[test]
    fn minimal_scenario_uses_defaults() {
        let loaded = ScenarioFile::from_toml(MINIMAL).unwrap().build().unwrap();
        assert_eq!(loaded.name, "single");
        assert_eq!(loaded.config.max_aircraft, 30);
        assert_eq!(loaded.config.n_closest, 3);
        assert_eq!(loaded.config.los_nmi, 3.0);
        assert_eq!(loaded.config.alert_nmi, 10.0);
        assert_eq!(loaded.config.alpha, 0.1);
        assert_eq!(loaded.config.beta_reward, 0.005);
        assert_eq!(loaded.config.dt_s, 12.0);
        assert_eq!(loaded.config.envelope, SpeedEnvelope::default());
        assert!(loaded.trainer.is_none());
        assert!(matches!(
            loaded.config.arrivals,
            ArrivalProcess::DiscreteGaps { ref choices_s } if choices_s == &vec![240.0, 300.0, 360.0]
        ));
    }

    #[test]
    fn crossing_arcs_are_derived_from_the_point() {
        let loaded = ScenarioFile::from_toml(CROSSING).unwrap().build().unwrap();
        let layout = &loaded.config.layout;
        let crossing = &layout.intersections()[0];
        assert!((crossing.arc_positions.0 - 100.0).abs() < 1e-9); // on the N-S route
        assert!((crossing.arc_positions.1 - 50.0).abs() < 1e-9); // on the W-E route
        assert!(layout.conflicting_routes(RouteId(0)).unwrap().contains(&RouteId(1)));
    }

    #[test]
    fn merge_shared_segment_is_derived() {
        let loaded = ScenarioFile::from_toml(MERGE).unwrap().build().unwrap();
        let merge = &loaded.config.layout.merge_points()[0];
        assert_eq!(merge.shared_segment.len(), 2);
        assert!((merge.shared_segment[0].x).abs() < 1e-9);
        assert!((merge.shared_segment[1].x - 100.0).abs() < 1e-9);
        let leg = 80.0f64.hypot(60.0); // 100 nmi approach leg
        assert!((merge.arc_positions[0] - leg).abs() < 1e-6);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let text = MINIMAL.replace("format_version = 1", "format_version = 2");
        assert!(matches!(
            ScenarioFile::from_toml(&text),
            Err(ScenarioError::Version { found: 2, supported: 1 })
        ));
    }

    #[test]
    fn unknown_fields_name_the_offender() {
        let text = format!("{MINIMAL}\n[separation]\nlos_nmi = 3.0\nalert_nmi = 10.0\ntypo_field = 1\n");
        let err = ScenarioFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("typo_field"), "{err}");
    }

    #[test]
    fn off_route_crossing_point_is_invalid() {
        let text = CROSSING.replace("at = [50.0, 0.0]", "at = [50.0, 3.0]");
        let err = ScenarioFile::from_toml(&text).unwrap().build().unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid(_)));
        assert!(err.to_string().contains("does not lie on route"));
    }

    #[test]
    fn missing_file_reports_not_found() {
        let err = load_scenario(Path::new("/no/such/scenario.toml")).unwrap_err();
        assert!(matches!(err, ScenarioError::NotFound(_)));
        assert!(err.to_string().contains("scenario not found"));
    }

    #[test]
    fn trainer_section_round_trips() {
        let text = format!(
            "{CROSSING}\n[trainer]\ngamma = 0.95\nlr = 0.0005\nloss_variant = \"a2c\"\n"
        );
        let loaded = ScenarioFile::from_toml(&text).unwrap().build().unwrap();
        let trainer = loaded.trainer.unwrap();
        assert_eq!(trainer.gamma, 0.95);
        assert_eq!(trainer.lr, 5e-4);
        assert_eq!(trainer.loss_variant, crate::rl::LossVariant::A2c);
        // Everything not set falls back to the defaults.
        assert_eq!(trainer.clip_epsilon, 0.2);
    }

    #[test]
    fn separation_ordering_is_validated() {
        let text = format!("{MINIMAL}\n[separation]\nlos_nmi = 12.0\nalert_nmi = 10.0\n");
        let err = ScenarioFile::from_toml(&text).unwrap().build().unwrap_err();
        assert!(matches!(err, ScenarioError::Env(_)));
    }
}
