//! Sectioned plain-text (TOML) scene description.
//!
//! ```toml
//! noise_floor_dbm = -60.0
//!
//! [[front_end]]
//! id = "TA"
//! role = "tx"
//! position = [0.0, 0.0, 1.0]
//! boresight = [0.0, 0.0, -1.0]
//! half_power_semi_angle_deg = 60.0
//! tx_electrical_power_dbm = 10.0
//!
//! [[front_end]]
//! id = "RA"
//! role = "rx"
//! position = [0.0, 0.0, 0.0]
//! boresight = [0.0, 0.0, 1.0]
//! fov_half_angle_deg = 40.0
//! active_area_m2 = 1.0e-4
//! conversion_gain_db = 0.0
//!
//! [[obstacle]]
//! kind = "full-path-block"
//! blocked_pairs = [["TA", "RA"]]
//! start = 100
//! end = 181
//! ```
//!
//! All quantities are SI (meters, m²) except angles (degrees) and powers
//! (dBm / dB).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{FrontEnd, Obstacle, Optics, Scene, Vec3, DEFAULT_NOISE_FLOOR_DBM};
use crate::error::{Diagnostic, Error, Result};

const OBSTACLE_KIND: &str = "full-path-block";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise_floor_dbm: Option<f64>,
    #[serde(default, rename = "front_end")]
    front_ends: Vec<FrontEndFile>,
    #[serde(default, rename = "obstacle")]
    obstacles: Vec<ObstacleFile>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrontEndFile {
    id: Option<String>,
    role: Option<String>,
    position: Option<Vec<f64>>,
    boresight: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    half_power_semi_angle_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tx_electrical_power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fov_half_angle_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    active_area_m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conversion_gain_db: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleFile {
    kind: Option<String>,
    blocked_pairs: Option<Vec<Vec<String>>>,
    start: Option<i64>,
    end: Option<i64>,
}

fn vec3(field: &str, value: &Option<Vec<f64>>, diags: &mut Vec<Diagnostic>) -> Vec3 {
    match value.as_deref() {
        Some([x, y, z]) => [*x, *y, *z],
        Some(other) => {
            diags.push(Diagnostic::new(
                field,
                format!("must have exactly 3 components (got {})", other.len()),
            ));
            [f64::NAN; 3]
        }
        None => {
            diags.push(Diagnostic::new(field, "is required"));
            [f64::NAN; 3]
        }
    }
}

fn required(field: String, value: Option<f64>, diags: &mut Vec<Diagnostic>) -> f64 {
    value.unwrap_or_else(|| {
        diags.push(Diagnostic::new(field, "is required"));
        f64::NAN
    })
}

fn forbidden(field: String, value: Option<f64>, role: &str, diags: &mut Vec<Diagnostic>) {
    if value.is_some() {
        diags.push(Diagnostic::new(
            field,
            format!("not allowed on a {role} front-end"),
        ));
    }
}

impl SceneFile {
    /// Structural conversion; field-presence problems become diagnostics.
    fn into_scene(self) -> (Scene, Vec<Diagnostic>) {
        let mut diags = Vec::new();
        let mut front_ends = Vec::with_capacity(self.front_ends.len());
        for (i, fe) in self.front_ends.into_iter().enumerate() {
            let p = |name: &str| format!("front_end[{i}].{name}");
            let id = fe.id.clone().unwrap_or_else(|| {
                diags.push(Diagnostic::new(p("id"), "is required"));
                String::new()
            });
            let position = vec3(&p("position"), &fe.position, &mut diags);
            let boresight = vec3(&p("boresight"), &fe.boresight, &mut diags);
            let optics = match fe.role.as_deref() {
                Some("tx") => {
                    forbidden(
                        p("fov_half_angle_deg"),
                        fe.fov_half_angle_deg,
                        "tx",
                        &mut diags,
                    );
                    forbidden(p("active_area_m2"), fe.active_area_m2, "tx", &mut diags);
                    forbidden(
                        p("conversion_gain_db"),
                        fe.conversion_gain_db,
                        "tx",
                        &mut diags,
                    );
                    Optics::Tx {
                        half_power_semi_angle_deg: required(
                            p("half_power_semi_angle_deg"),
                            fe.half_power_semi_angle_deg,
                            &mut diags,
                        ),
                        tx_electrical_power_dbm: required(
                            p("tx_electrical_power_dbm"),
                            fe.tx_electrical_power_dbm,
                            &mut diags,
                        ),
                    }
                }
                Some("rx") => {
                    forbidden(
                        p("half_power_semi_angle_deg"),
                        fe.half_power_semi_angle_deg,
                        "rx",
                        &mut diags,
                    );
                    forbidden(
                        p("tx_electrical_power_dbm"),
                        fe.tx_electrical_power_dbm,
                        "rx",
                        &mut diags,
                    );
                    Optics::Rx {
                        fov_half_angle_deg: required(
                            p("fov_half_angle_deg"),
                            fe.fov_half_angle_deg,
                            &mut diags,
                        ),
                        active_area_m2: required(
                            p("active_area_m2"),
                            fe.active_area_m2,
                            &mut diags,
                        ),
                        conversion_gain_db: fe.conversion_gain_db.unwrap_or(0.0),
                    }
                }
                other => {
                    diags.push(Diagnostic::new(
                        p("role"),
                        format!("must be \"tx\" or \"rx\" (got {other:?})"),
                    ));
                    continue;
                }
            };
            front_ends.push(FrontEnd {
                id,
                position,
                boresight,
                optics,
            });
        }

        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for (i, ob) in self.obstacles.into_iter().enumerate() {
            let p = |name: &str| format!("obstacle[{i}].{name}");
            if let Some(kind) = ob.kind.as_deref() {
                if kind != OBSTACLE_KIND {
                    diags.push(Diagnostic::new(
                        p("kind"),
                        format!("only \"{OBSTACLE_KIND}\" is supported (got {kind:?})"),
                    ));
                }
            }
            let mut pairs = Vec::new();
            for (k, pair) in ob.blocked_pairs.unwrap_or_default().into_iter().enumerate() {
                match <[String; 2]>::try_from(pair) {
                    Ok([tx, rx]) => pairs.push((tx, rx)),
                    Err(_) => diags.push(Diagnostic::new(
                        format!("obstacle[{i}].blocked_pairs[{k}]"),
                        "must be a [tx_id, rx_id] pair",
                    )),
                }
            }
            let mut bound = |name: &str, v: Option<i64>| match v {
                Some(v) if v >= 0 => v as u64,
                Some(v) => {
                    diags.push(Diagnostic::new(p(name), format!("must be >= 0 (got {v})")));
                    0
                }
                None => {
                    diags.push(Diagnostic::new(p(name), "is required"));
                    0
                }
            };
            let start = bound("start", ob.start);
            let end = bound("end", ob.end);
            obstacles.push(Obstacle::new(pairs, start, end));
        }

        let scene = Scene::new(
            front_ends,
            obstacles,
            self.noise_floor_dbm.unwrap_or(DEFAULT_NOISE_FLOOR_DBM),
        );
        (scene, diags)
    }

    fn from_scene(scene: &Scene) -> Self {
        let front_ends = scene
            .front_ends
            .iter()
            .map(|fe| {
                let mut out = FrontEndFile {
                    id: Some(fe.id.clone()),
                    position: Some(fe.position.to_vec()),
                    boresight: Some(fe.boresight.to_vec()),
                    ..Default::default()
                };
                match fe.optics {
                    Optics::Tx {
                        half_power_semi_angle_deg,
                        tx_electrical_power_dbm,
                    } => {
                        out.role = Some("tx".into());
                        out.half_power_semi_angle_deg = Some(half_power_semi_angle_deg);
                        out.tx_electrical_power_dbm = Some(tx_electrical_power_dbm);
                    }
                    Optics::Rx {
                        fov_half_angle_deg,
                        active_area_m2,
                        conversion_gain_db,
                    } => {
                        out.role = Some("rx".into());
                        out.fov_half_angle_deg = Some(fov_half_angle_deg);
                        out.active_area_m2 = Some(active_area_m2);
                        out.conversion_gain_db = Some(conversion_gain_db);
                    }
                }
                out
            })
            .collect();
        let obstacles = scene
            .obstacles
            .iter()
            .map(|ob| ObstacleFile {
                kind: Some(OBSTACLE_KIND.into()),
                blocked_pairs: Some(
                    ob.blocked_pairs
                        .iter()
                        .map(|(t, r)| vec![t.clone(), r.clone()])
                        .collect(),
                ),
                start: Some(ob.start as i64),
                end: Some(ob.end as i64),
            })
            .collect();
        SceneFile {
            noise_floor_dbm: Some(scene.noise_floor_dbm),
            front_ends,
            obstacles,
        }
    }
}

/// Parses scene text and reports every problem found, structural or
/// semantic. The scene is returned only when the diagnostics are empty.
pub fn parse_scene_diagnostics(text: &str) -> (Option<Scene>, Vec<Diagnostic>) {
    let file: SceneFile = match toml::from_str(text) {
        Ok(file) => file,
        Err(e) => {
            let msg = e.message().to_string();
            return (None, vec![Diagnostic::new("<syntax>", msg)]);
        }
    };
    let (scene, mut diags) = file.into_scene();
    if diags.is_empty() {
        diags = scene.validate();
    }
    if diags.is_empty() {
        (Some(scene), diags)
    } else {
        (None, diags)
    }
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    match parse_scene_diagnostics(text) {
        (Some(scene), _) => Ok(scene),
        (None, diags) => Err(Error::InvalidScene(diags)),
    }
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    parse_scene(&std::fs::read_to_string(path)?)
}

/// Diagnostics for the scene file at `path`; empty iff it is valid.
pub fn validate_scene_file(path: &Path) -> Result<Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_scene_diagnostics(&text).1)
}

pub fn scene_to_toml(scene: &Scene) -> String {
    toml::to_string(&SceneFile::from_scene(scene)).expect("scene serializes to TOML")
}
