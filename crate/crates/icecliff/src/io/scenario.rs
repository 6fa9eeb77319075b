//! Scenario schema, normalization and validation.

use super::IoError;
use crate::boundary::{BasalCondition, TerminusLoading};
use crate::constitutive::DrivingForceModel;
use crate::material::MaterialParams;
use crate::mesh::{build_rectangle_mesh, DEFAULT_NODE_CAP};
use crate::solver::{Simulation, SolverControls, SolverError};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Fully normalized scenario: SI units throughout, defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub h: f64,
    pub l_over_h: f64,
    pub target_h: f64,
    pub material: MaterialParams<f64>,
    pub basal: BasalCondition,
    pub terminus: TerminusLoading,
    pub driving: DrivingForceModel<f64>,
    pub controls: SolverControls,
    pub outputs: OutputConfig,
    pub node_cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    /// Snapshot times relative to the damage-phase start, s.
    pub snapshot_times: Vec<f64>,
    pub export_dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            snapshot_times: Vec::new(),
            export_dir: PathBuf::from("out"),
        }
    }
}

impl Scenario {
    pub fn length(&self) -> f64 {
        self.l_over_h * self.h
    }

    /// Builds the configured simulation (mesh plus solver).
    pub fn to_simulation(&self) -> Result<Simulation, SolverError> {
        let mesh = build_rectangle_mesh(self.h, self.length(), self.target_h, self.node_cap)
            .map_err(SolverError::MeshBuild)?;
        Simulation::new(
            mesh,
            self.material,
            self.basal,
            self.terminus,
            self.driving,
            self.controls.clone(),
        )
    }
}

/// A stress-valued key accepted as `<name>_Pa` or `<name>_MPa`.
macro_rules! stress_key {
    ($errors:expr, $name:literal, $pa:expr, $mpa:expr, $default:expr) => {
        match ($pa, $mpa) {
            (Some(_), Some(_)) => {
                $errors.push(format!(
                    "{}: give exactly one of {}_Pa and {}_MPa",
                    $name, $name, $name
                ));
                $default
            }
            (Some(v), None) => v,
            (None, Some(v)) => v * 1e6,
            (None, None) => $default,
        }
    };
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(rename = "H_m")]
    h_m: f64,
    #[serde(rename = "L_over_H", skip_serializing_if = "Option::is_none")]
    l_over_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_h_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    material: Option<RawMaterial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basal: Option<RawBasal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terminus: Option<RawTerminus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    driving_force: Option<RawDrivingForce>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    controls: Option<RawControls>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outputs: Option<RawOutputs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_nodes: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    #[serde(rename = "E_Pa", skip_serializing_if = "Option::is_none")]
    e_pa: Option<f64>,
    #[serde(rename = "E_MPa", skip_serializing_if = "Option::is_none")]
    e_mpa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_ice: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho_water: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_creep: Option<f64>,
    #[serde(rename = "A_creep_Pa", skip_serializing_if = "Option::is_none")]
    a_creep_pa: Option<f64>,
    #[serde(rename = "A_creep_MPa", skip_serializing_if = "Option::is_none")]
    a_creep_mpa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_int: Option<f64>,
    #[serde(rename = "tau_c_Pa", skip_serializing_if = "Option::is_none")]
    tau_c_pa: Option<f64>,
    #[serde(rename = "tau_c_MPa", skip_serializing_if = "Option::is_none")]
    tau_c_mpa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_fric: Option<f64>,
    #[serde(rename = "tau_0_Pa", skip_serializing_if = "Option::is_none")]
    tau_0_pa: Option<f64>,
    #[serde(rename = "tau_0_MPa", skip_serializing_if = "Option::is_none")]
    tau_0_mpa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_pf_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ell_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_res: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawBasal {
    FreeSlip,
    Frozen,
    Weertman(RawWeertman),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeertman {
    #[serde(rename = "C")]
    c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[serde(rename = "tau_0_Pa", skip_serializing_if = "Option::is_none")]
    tau_0_pa: Option<f64>,
    #[serde(rename = "tau_0_MPa", skip_serializing_if = "Option::is_none")]
    tau_0_mpa: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerminus {
    #[serde(skip_serializing_if = "Option::is_none")]
    h_w_m: Option<f64>,
    #[serde(rename = "buttress_sigma_Pa", skip_serializing_if = "Option::is_none")]
    buttress_sigma_pa: Option<f64>,
    #[serde(rename = "buttress_sigma_MPa", skip_serializing_if = "Option::is_none")]
    buttress_sigma_mpa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    buttress_above_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    buttress_below_m: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawDrivingForce {
    MohrCoulomb,
    Principal(RawPrincipal),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrincipal {
    #[serde(rename = "sigma_c_Pa", skip_serializing_if = "Option::is_none")]
    sigma_c_pa: Option<f64>,
    #[serde(rename = "sigma_c_MPa", skip_serializing_if = "Option::is_none")]
    sigma_c_mpa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControls {
    #[serde(skip_serializing_if = "Option::is_none")]
    stagger_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_passes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_init_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_min_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_max_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_grow: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_shrink: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spinup_duration_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spinup_dt_init_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spinup_dt_max_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    damage_duration_s: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    snapshot_times_s: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    export_dir: Option<String>,
}

/// Parses and normalizes a scenario from JSON text.
pub fn scenario_from_json(text: &str) -> Result<Scenario, IoError> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| IoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    normalize(raw)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    scenario_from_json(&text)
}

fn normalize(raw: RawScenario) -> Result<Scenario, IoError> {
    let mut errors: Vec<String> = Vec::new();
    let defaults = MaterialParams::<f64>::glacial_ice();
    let m = raw.material.unwrap_or_default();

    let n_creep = m.n_creep.unwrap_or(defaults.n_creep);
    let a_creep = match (m.a_creep_pa, m.a_creep_mpa) {
        (Some(_), Some(_)) => {
            errors.push("A_creep: give exactly one of A_creep_Pa and A_creep_MPa".into());
            defaults.a_creep
        }
        (Some(v), None) => v,
        (None, Some(v)) => v * 1e-6f64.powf(n_creep),
        (None, None) => defaults.a_creep,
    };
    let material = MaterialParams {
        e_young: stress_key!(errors, "E", m.e_pa, m.e_mpa, defaults.e_young),
        nu: m.nu.unwrap_or(defaults.nu),
        rho_i: m.rho_ice.unwrap_or(defaults.rho_i),
        rho_w: m.rho_water.unwrap_or(defaults.rho_w),
        g: m.g.unwrap_or(defaults.g),
        n_creep,
        a_creep,
        mu_int: m.mu_int.unwrap_or(defaults.mu_int),
        tau_c: stress_key!(errors, "tau_c", m.tau_c_pa, m.tau_c_mpa, defaults.tau_c),
        m_fric: m.m_fric.unwrap_or(defaults.m_fric),
        tau_0: stress_key!(errors, "tau_0", m.tau_0_pa, m.tau_0_mpa, defaults.tau_0),
        c_fric: defaults.c_fric,
        eta_pf: m.eta_pf_s.unwrap_or(defaults.eta_pf),
        ell: m.ell_m.unwrap_or(defaults.ell),
        zeta: m.zeta.unwrap_or(defaults.zeta),
        k_res: m.k_res.unwrap_or(defaults.k_res),
    };
    if let Err(mat_errors) = material.validate() {
        errors.extend(mat_errors.iter().map(|e| e.to_string()));
    }

    let basal = match raw.basal {
        None | Some(RawBasal::Frozen) => BasalCondition::Frozen,
        Some(RawBasal::FreeSlip) => BasalCondition::FreeSlip,
        Some(RawBasal::Weertman(w)) => {
            let tau_0 = stress_key!(errors, "tau_0", w.tau_0_pa, w.tau_0_mpa, material.tau_0);
            BasalCondition::Weertman {
                c_fric: w.c,
                m_fric: w.m.unwrap_or(material.m_fric),
                tau_0,
            }
        }
    };
    if let Err(e) = basal.validate() {
        errors.push(e.to_string());
    }

    let t = raw.terminus.unwrap_or_default();
    let terminus = TerminusLoading {
        h_w: t.h_w_m.unwrap_or(0.0),
        buttress_sigma: stress_key!(
            errors,
            "buttress_sigma",
            t.buttress_sigma_pa,
            t.buttress_sigma_mpa,
            0.0
        ),
        buttress_above: t.buttress_above_m.unwrap_or(25.0),
        buttress_below: t.buttress_below_m.unwrap_or(55.0),
    };
    if let Err(e) = terminus.validate() {
        errors.push(e.to_string());
    }

    let driving = match raw.driving_force {
        None | Some(RawDrivingForce::MohrCoulomb) => DrivingForceModel::MohrCoulomb {
            mu: material.mu_int,
            tau_c: material.tau_c,
        },
        Some(RawDrivingForce::Principal(p)) => {
            let sigma_c = stress_key!(
                errors,
                "sigma_c",
                p.sigma_c_pa,
                p.sigma_c_mpa,
                material.tau_c
            );
            if !(sigma_c > 0.0) {
                errors.push("sigma_c must be positive".into());
            }
            DrivingForceModel::Principal {
                sigma_c,
                zeta: p.zeta.unwrap_or(material.zeta),
            }
        }
    };

    let c = raw.controls.unwrap_or_default();
    let base = SolverControls::default();
    let controls = SolverControls {
        stagger_tol: c.stagger_tol.unwrap_or(base.stagger_tol),
        max_passes: c.max_passes.unwrap_or(base.max_passes),
        dt_init: c.dt_init_s.unwrap_or(base.dt_init),
        dt_min: c.dt_min_s.unwrap_or(base.dt_min),
        dt_max: c.dt_max_s.unwrap_or(base.dt_max),
        dt_grow: c.dt_grow.unwrap_or(base.dt_grow),
        dt_shrink: c.dt_shrink.unwrap_or(base.dt_shrink),
        spinup_duration: c.spinup_duration_s.unwrap_or(base.spinup_duration),
        spinup_dt_init: c.spinup_dt_init_s.unwrap_or(base.spinup_dt_init),
        spinup_dt_max: c.spinup_dt_max_s.unwrap_or(base.spinup_dt_max),
        damage_duration: c.damage_duration_s.unwrap_or(base.damage_duration),
        damage_enabled: true,
    };
    if controls.validate().is_err() {
        errors.push("solver controls violate 0 < dt_min <= dt_init <= dt_max, dt_grow > 1 > dt_shrink > 0".into());
    }

    let o = raw.outputs.unwrap_or_default();
    let outputs = OutputConfig {
        snapshot_times: o.snapshot_times_s.unwrap_or_default(),
        export_dir: PathBuf::from(o.export_dir.unwrap_or_else(|| "out".into())),
    };

    let h = raw.h_m;
    if !(h > 0.0) {
        errors.push("H_m must be positive".into());
    }
    let l_over_h = raw.l_over_h.unwrap_or(6.0);
    if !(l_over_h >= 2.0) {
        errors.push(format!("L_over_H must be >= 2, got {l_over_h}"));
    }
    let target_h = raw.target_h_m.unwrap_or(material.ell / 2.0);
    if !(target_h > 0.0) {
        errors.push("target_h_m must be positive".into());
    }
    if terminus.h_w > h {
        errors.push(format!(
            "h_w_m = {} exceeds the glacier thickness {}",
            terminus.h_w, h
        ));
    }
    if outputs
        .snapshot_times
        .iter()
        .any(|t| !t.is_finite() || *t < 0.0)
    {
        errors.push("snapshot_times_s must be finite and non-negative".into());
    }

    if !errors.is_empty() {
        return Err(IoError::Validation(errors));
    }
    Ok(Scenario {
        h,
        l_over_h,
        target_h,
        material,
        basal,
        terminus,
        driving,
        controls,
        outputs,
        node_cap: raw.max_nodes.unwrap_or(DEFAULT_NODE_CAP),
    })
}

/// Serializes a normalized scenario in canonical form (`_Pa` keys only),
/// such that loading the output reproduces the scenario exactly.
pub fn scenario_to_json(s: &Scenario) -> String {
    let m = &s.material;
    let raw = RawScenario {
        h_m: s.h,
        l_over_h: Some(s.l_over_h),
        target_h_m: Some(s.target_h),
        material: Some(RawMaterial {
            e_pa: Some(m.e_young),
            nu: Some(m.nu),
            rho_ice: Some(m.rho_i),
            rho_water: Some(m.rho_w),
            g: Some(m.g),
            n_creep: Some(m.n_creep),
            a_creep_pa: Some(m.a_creep),
            mu_int: Some(m.mu_int),
            tau_c_pa: Some(m.tau_c),
            m_fric: Some(m.m_fric),
            tau_0_pa: Some(m.tau_0),
            eta_pf_s: Some(m.eta_pf),
            ell_m: Some(m.ell),
            zeta: Some(m.zeta),
            k_res: Some(m.k_res),
            ..Default::default()
        }),
        basal: Some(match s.basal {
            BasalCondition::FreeSlip => RawBasal::FreeSlip,
            BasalCondition::Frozen => RawBasal::Frozen,
            BasalCondition::Weertman { c_fric, m_fric, tau_0 } => RawBasal::Weertman(RawWeertman {
                c: c_fric,
                m: Some(m_fric),
                tau_0_pa: Some(tau_0),
                tau_0_mpa: None,
            }),
        }),
        terminus: Some(RawTerminus {
            h_w_m: Some(s.terminus.h_w),
            buttress_sigma_pa: Some(s.terminus.buttress_sigma),
            buttress_sigma_mpa: None,
            buttress_above_m: Some(s.terminus.buttress_above),
            buttress_below_m: Some(s.terminus.buttress_below),
        }),
        driving_force: Some(match s.driving {
            DrivingForceModel::MohrCoulomb { .. } => RawDrivingForce::MohrCoulomb,
            DrivingForceModel::Principal { sigma_c, zeta } => {
                RawDrivingForce::Principal(RawPrincipal {
                    sigma_c_pa: Some(sigma_c),
                    sigma_c_mpa: None,
                    zeta: Some(zeta),
                })
            }
        }),
        controls: Some(RawControls {
            stagger_tol: Some(s.controls.stagger_tol),
            max_passes: Some(s.controls.max_passes),
            dt_init_s: Some(s.controls.dt_init),
            dt_min_s: Some(s.controls.dt_min),
            dt_max_s: Some(s.controls.dt_max),
            dt_grow: Some(s.controls.dt_grow),
            dt_shrink: Some(s.controls.dt_shrink),
            spinup_duration_s: Some(s.controls.spinup_duration),
            spinup_dt_init_s: Some(s.controls.spinup_dt_init),
            spinup_dt_max_s: Some(s.controls.spinup_dt_max),
            damage_duration_s: Some(s.controls.damage_duration),
        }),
        outputs: Some(RawOutputs {
            snapshot_times_s: Some(s.outputs.snapshot_times.clone()),
            export_dir: Some(s.outputs.export_dir.display().to_string()),
        }),
        max_nodes: Some(s.node_cap),
    };
    serde_json::to_string_pretty(&raw).expect("scenario serialization cannot fail")
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, scenario_to_json(s)).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Configuration for the critical-height (cohesion) sweep.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohesionSweepConfig {
    pub base: serde_json::Value,
    #[serde(rename = "tau_c_MPa_values")]
    pub tau_c_mpa_values: Vec<f64>,
    #[serde(default = "default_mu_values")]
    pub mu_values: Vec<f64>,
    /// `(stable, failed)` thickness bracket, m.
    pub h_bracket_m: (f64, f64),
    #[serde(default = "default_resolution")]
    pub resolution_m: f64,
}

/// Configuration for the marine stability-envelope sweep.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarineSweepConfig {
    pub base: serde_json::Value,
    #[serde(rename = "tau_c_MPa_values")]
    pub tau_c_mpa_values: Vec<f64>,
    pub h_values_m: Vec<f64>,
    /// `(stable, failed)` freeboard bracket, m.
    pub freeboard_bracket_m: (f64, f64),
    #[serde(default = "default_resolution")]
    pub resolution_m: f64,
    #[serde(rename = "buttress_sigma_MPa_values", default)]
    pub buttress_sigma_mpa_values: Vec<f64>,
}

/// Configuration for the basal-friction sweep.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionSweepConfig {
    pub base: serde_json::Value,
    #[serde(rename = "C_values")]
    pub c_values: Vec<f64>,
}

fn default_mu_values() -> Vec<f64> {
    vec![0.8]
}

fn default_resolution() -> f64 {
    5.0
}

impl CohesionSweepConfig {
    pub fn base_scenario(&self) -> Result<Scenario, IoError> {
        scenario_from_json(&self.base.to_string())
    }
}

impl MarineSweepConfig {
    pub fn base_scenario(&self) -> Result<Scenario, IoError> {
        scenario_from_json(&self.base.to_string())
    }
}

impl FrictionSweepConfig {
    pub fn base_scenario(&self) -> Result<Scenario, IoError> {
        scenario_from_json(&self.base.to_string())
    }
}

pub fn load_sweep_config<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn minimal_config_gets_table_defaults() {
        let s = scenario_from_json(r#"{"H_m": 200.0, "basal": "frozen"}"#).unwrap();
        assert_eq!(s.h, 200.0);
        assert_eq!(s.basal, BasalCondition::Frozen);
        assert_relative_eq!(s.material.e_young, 9500e6);
        assert_relative_eq!(s.material.nu, 0.35);
        assert_relative_eq!(s.material.rho_i, 917.0);
        assert_relative_eq!(s.material.rho_w, 1020.0);
        assert_relative_eq!(s.material.n_creep, 3.0);
        assert_relative_eq!(s.material.a_creep, 7.156e-25);
        assert_relative_eq!(s.material.mu_int, 0.8);
        assert_relative_eq!(s.material.tau_c, 1e6);
        assert_relative_eq!(s.material.m_fric, 3.0);
        assert_relative_eq!(s.material.tau_0, 0.75e6);
        assert_relative_eq!(s.material.eta_pf, 33.8);
        assert_relative_eq!(s.material.ell, 10.0);
        assert_eq!(s.l_over_h, 6.0);
        assert_eq!(s.target_h, 5.0); // ell / 2
        assert_eq!(s.terminus.h_w, 0.0);
    }

    #[test]
    fn mpa_suffix_converts_once() {
        let s = scenario_from_json(
            r#"{"H_m": 100.0, "material": {"tau_c_MPa": 0.5, "A_creep_MPa": 7.156e-7}}"#,
        )
        .unwrap();
        assert_relative_eq!(s.material.tau_c, 0.5e6);
        assert_relative_eq!(s.material.a_creep, 7.156e-25, max_relative = 1e-12);
    }

    #[test]
    fn both_suffixes_rejected() {
        let err = scenario_from_json(
            r#"{"H_m": 100.0, "material": {"tau_c_MPa": 0.5, "tau_c_Pa": 5e5}}"#,
        )
        .unwrap_err();
        match err {
            IoError::Validation(v) => assert!(v.iter().any(|m| m.contains("tau_c"))),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn invalid_nu_names_the_invariant() {
        let err =
            scenario_from_json(r#"{"H_m": 100.0, "material": {"nu": 0.6}}"#).unwrap_err();
        match err {
            IoError::Validation(v) => {
                assert!(v.iter().any(|m| m.contains("Poisson")), "{v:?}")
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn violations_reported_exhaustively() {
        let err = scenario_from_json(
            r#"{"H_m": -5.0, "material": {"nu": 0.6, "tau_c_MPa": -1.0}}"#,
        )
        .unwrap_err();
        match err {
            IoError::Validation(v) => assert!(v.len() >= 3, "{v:?}"),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let err = scenario_from_json(r#"{"H_m": 100.0, "melange_depth": 3.0}"#).unwrap_err();
        match err {
            IoError::Parse { message, .. } => assert!(message.contains("melange_depth")),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn weertman_basal_parses() {
        let s = scenario_from_json(
            r#"{"H_m": 200.0, "basal": {"weertman": {"C": 1e7, "m": 3.0, "tau_0_MPa": 0.75}}}"#,
        )
        .unwrap();
        assert_eq!(
            s.basal,
            BasalCondition::Weertman {
                c_fric: 1e7,
                m_fric: 3.0,
                tau_0: 0.75e6
            }
        );
    }

    #[test]
    fn principal_driving_force_parses() {
        let s = scenario_from_json(
            r#"{"H_m": 200.0, "driving_force": {"principal": {"sigma_c_MPa": 1.2, "zeta": 1.0}}}"#,
        )
        .unwrap();
        assert_eq!(
            s.driving,
            DrivingForceModel::Principal {
                sigma_c: 1.2e6,
                zeta: 1.0
            }
        );
    }

    #[test]
    fn canonical_round_trip_is_identity() {
        let s = scenario_from_json(
            r#"{
                "H_m": 800.0,
                "L_over_H": 6.0,
                "basal": "frozen",
                "material": {"tau_c_MPa": 0.5},
                "terminus": {"h_w_m": 585.0, "buttress_sigma_MPa": 0.025},
                "controls": {"dt_max_s": 8.0},
                "outputs": {"snapshot_times_s": [5.0, 40.0], "export_dir": "result"}
            }"#,
        )
        .unwrap();
        let text = scenario_to_json(&s);
        let s2 = scenario_from_json(&text).unwrap();
        assert_eq!(s, s2);
        // And a second round trip is byte-identical.
        assert_eq!(text, scenario_to_json(&s2));
    }

    #[test]
    fn water_above_surface_rejected() {
        let err = scenario_from_json(r#"{"H_m": 100.0, "terminus": {"h_w_m": 150.0}}"#)
            .unwrap_err();
        assert!(matches!(err, IoError::Validation(_)));
    }
}
