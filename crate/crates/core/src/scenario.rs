//! Task scenarios: world objects plus a success predicate.
//!
//! Scenario files are TOML:
//!
//! ```toml
//! id = "cup"
//! time_limit_s = 840.0
//!
//! [[objects]]
//! name = "cup"
//! pose = [1.5, -0.6, 0.9]
//! attachable = true
//!
//! [success]
//! kind = "place_in_region"          # or remove_from_region / wipe_contacts
//! object = "cup"
//! region = { min = [2.3, -0.8, 0.7], max = [2.7, -0.4, 1.1] }
//! ```
//!
//! `wipe_contacts` takes `wipe` (the held object), `targets` (object names),
//! `contact_radius` and `required`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{Pose3, World, WorldObject};

pub const DEFAULT_TIME_LIMIT_S: f64 = 840.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    Cup,
    Trash,
    Blanket,
    Cleaning,
    Practice,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [
        ScenarioId::Cup,
        ScenarioId::Trash,
        ScenarioId::Blanket,
        ScenarioId::Cleaning,
        ScenarioId::Practice,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::Cup => "cup",
            ScenarioId::Trash => "trash",
            ScenarioId::Blanket => "blanket",
            ScenarioId::Cleaning => "cleaning",
            ScenarioId::Practice => "practice",
        }
    }

    pub fn bundled_source(self) -> &'static str {
        match self {
            ScenarioId::Cup => include_str!("../assets/scenarios/cup.toml"),
            ScenarioId::Trash => include_str!("../assets/scenarios/trash.toml"),
            ScenarioId::Blanket => include_str!("../assets/scenarios/blanket.toml"),
            ScenarioId::Cleaning => include_str!("../assets/scenarios/cleaning.toml"),
            ScenarioId::Practice => include_str!("../assets/scenarios/practice.toml"),
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// Axis-aligned box in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub min: Pose3,
    pub max: Pose3,
}

impl Region {
    pub fn contains(&self, p: &Pose3) -> bool {
        (self.min.x..=self.max.x).contains(&p.x)
            && (self.min.y..=self.max.y).contains(&p.y)
            && (self.min.z..=self.max.z).contains(&p.z)
    }

    pub fn center(&self) -> Pose3 {
        Pose3::new(
            (self.min.x + self.max.x) / 2.0,
            (self.min.y + self.max.y) / 2.0,
            (self.min.z + self.max.z) / 2.0,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub name: String,
    pub pose: Pose3,
    #[serde(default)]
    pub attachable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SuccessPredicate {
    /// Object released inside the region.
    PlaceInRegion { object: String, region: Region },
    /// Object anywhere outside the region, held or not.
    RemoveFromRegion { object: String, region: Region },
    /// The held `wipe` object has come within `contact_radius` of at least
    /// `required` of the `targets`.
    WipeContacts {
        wipe: String,
        targets: Vec<String>,
        contact_radius: f64,
        required: usize,
    },
}

impl SuccessPredicate {
    pub fn region(&self) -> Option<&Region> {
        match self {
            SuccessPredicate::PlaceInRegion { region, .. }
            | SuccessPredicate::RemoveFromRegion { region, .. } => Some(region),
            SuccessPredicate::WipeContacts { .. } => None,
        }
    }
}

fn default_time_limit() -> f64 {
    DEFAULT_TIME_LIMIT_S
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: ScenarioId,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
    pub objects: Vec<ObjectSpec>,
    pub success: SuccessPredicate,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("malformed scenario at {location}: {message}")]
    MalformedScenario { location: String, message: String },
    #[error("cannot read scenario file: {0}")]
    Io(String),
}

fn malformed(location: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::MalformedScenario { location: location.into(), message: message.into() }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

impl Scenario {
    pub fn bundled(id: ScenarioId) -> Scenario {
        Scenario::from_toml(id.bundled_source()).expect("bundled scenarios are valid")
    }

    pub fn from_toml(text: &str) -> Result<Scenario, ScenarioError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let (line, col) = line_col(text, span.start);
                    format!("line {line}, column {col}")
                }
                None => "document".to_string(),
            };
            malformed(location, e.message().to_string())
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load_file(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
        Scenario::from_toml(&text)
    }

    /// Resolves either a bundled id (`cup`) or a path to a scenario file.
    pub fn load(id_or_path: &str) -> Result<Scenario, ScenarioError> {
        match id_or_path.parse::<ScenarioId>() {
            Ok(id) => Ok(Scenario::bundled(id)),
            Err(_) => Scenario::load_file(Path::new(id_or_path)),
        }
    }

    fn object(&self, name: &str) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.name == name)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.time_limit_s > 0.0 && self.time_limit_s.is_finite()) {
            return Err(malformed("time_limit_s", "must be positive"));
        }
        let mut names = BTreeSet::new();
        for (i, o) in self.objects.iter().enumerate() {
            if !names.insert(o.name.as_str()) {
                return Err(malformed(format!("objects[{i}].name"), format!("duplicate object `{}`", o.name)));
            }
            if !o.pose.is_finite() {
                return Err(malformed(format!("objects[{i}].pose"), "must be finite"));
            }
        }
        let need_attachable = |field: &str, name: &str| match self.object(name) {
            None => Err(malformed(format!("success.{field}"), format!("unknown object `{name}`"))),
            Some(o) if !o.attachable => {
                Err(malformed(format!("success.{field}"), format!("object `{name}` is not attachable")))
            }
            Some(_) => Ok(()),
        };
        match &self.success {
            SuccessPredicate::PlaceInRegion { object, region }
            | SuccessPredicate::RemoveFromRegion { object, region } => {
                need_attachable("object", object)?;
                let ok = region.min.x < region.max.x && region.min.y < region.max.y && region.min.z < region.max.z;
                if !ok || !region.min.is_finite() || !region.max.is_finite() {
                    return Err(malformed("success.region", "min must be below max on every axis"));
                }
            }
            SuccessPredicate::WipeContacts { wipe, targets, contact_radius, required } => {
                need_attachable("wipe", wipe)?;
                for t in targets {
                    if self.object(t).is_none() {
                        return Err(malformed("success.targets", format!("unknown object `{t}`")));
                    }
                }
                if *required == 0 || *required > targets.len() {
                    return Err(malformed("success.required", "must be between 1 and the number of targets"));
                }
                if !(*contact_radius > 0.0 && contact_radius.is_finite()) {
                    return Err(malformed("success.contact_radius", "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Fresh world with the robot homed and objects at their initial poses.
    pub fn world(&self) -> World {
        World::new(
            self.objects
                .iter()
                .map(|o| WorldObject { name: o.name.clone(), pose: o.pose, attachable: o.attachable })
                .collect(),
        )
    }
}

/// Per-run state that success predicates accumulate (wipe contacts).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskProgress {
    pub contacted: BTreeSet<String>,
}

impl TaskProgress {
    /// Records contacts made by the held wipe object in the current world.
    pub fn update(&mut self, scenario: &Scenario, world: &World) {
        let SuccessPredicate::WipeContacts { wipe, targets, contact_radius, .. } = &scenario.success else {
            return;
        };
        if world.held_name() != Some(wipe.as_str()) {
            return;
        }
        let Some(wipe_pose) = world.object_index(wipe).map(|i| world.objects[i].pose) else {
            return;
        };
        for t in targets {
            if let Some(i) = world.object_index(t) {
                if world.objects[i].pose.distance(&wipe_pose) <= *contact_radius {
                    self.contacted.insert(t.clone());
                }
            }
        }
    }
}

pub fn check_success(scenario: &Scenario, world: &World, progress: &TaskProgress) -> bool {
    let pose_of = |name: &str| world.object_index(name).map(|i| (i, world.objects[i].pose));
    match &scenario.success {
        SuccessPredicate::PlaceInRegion { object, region } => pose_of(object)
            .is_some_and(|(i, p)| region.contains(&p) && world.robot.held_object != Some(i)),
        SuccessPredicate::RemoveFromRegion { object, region } => {
            pose_of(object).is_some_and(|(_, p)| !region.contains(&p))
        }
        SuccessPredicate::WipeContacts { targets, required, .. } => {
            targets.iter().filter(|t| progress.contacted.contains(*t)).count() >= *required
        }
    }
}
