//! Run configuration: a TOML file with per-case entries, plus
//! command-line overrides.
//!
//! Each case names its relaxation scale and either an explicit mesh or a
//! scaling exponent `beta`, in which case the mesh is `round(eps^-beta)`
//! cells per axis. Exactly one of the two must be present.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::scheme::SchemeVariant;
use crate::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scheme: Option<String>,
    eta: Option<f64>,
    tau: Option<f64>,
    end_time_half_decays: Option<f64>,
    samples_per_half_decay: Option<u32>,
    checkpoint_every_steps: Option<u64>,
    emit_profile_plot: Option<bool>,
    out_dir: Option<PathBuf>,
    vortex: Option<VortexFile>,
    #[serde(default)]
    cases: Vec<CaseConfig>,
    convergence: Option<ConvergenceConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct VortexFile {
    a: Option<f64>,
    b: Option<f64>,
    u0: Option<f64>,
    rho0: Option<f64>,
    rt0: Option<f64>,
}

/// One sweep entry as written in the file.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub epsilon: f64,
    pub mesh: Option<u32>,
    pub scaling_exponent: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub epsilon: f64,
    pub base_mesh: u32,
    pub levels: u32,
}

/// Vortex parameters after defaulting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexParams {
    pub a: f64,
    pub b: f64,
    pub u0: f64,
    pub rho0: f64,
    pub rt0: f64,
}

impl Default for VortexParams {
    fn default() -> Self {
        Self {
            a: std::f64::consts::TAU,
            b: std::f64::consts::TAU,
            u0: 0.01,
            rho0: 1.0,
            rt0: 0.5,
        }
    }
}

/// A case with its mesh resolved to a concrete cell count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedCase {
    pub epsilon: f64,
    pub mesh: usize,
}

/// Command-line overrides; any present field wins over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scheme: Option<String>,
    pub eps: Option<f64>,
    pub mesh: Option<u32>,
    pub eta: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scheme: SchemeVariant,
    pub eta: f64,
    pub tau: f64,
    pub end_time_half_decays: f64,
    pub samples_per_half_decay: u32,
    pub checkpoint_every_steps: u64,
    pub emit_profile_plot: bool,
    pub out_dir: PathBuf,
    pub vortex: VortexParams,
    pub cases: Vec<ResolvedCase>,
    pub convergence: Option<ConvergenceConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeVariant::Dugks,
            eta: 0.5,
            tau: 1.0,
            end_time_half_decays: 1.0,
            samples_per_half_decay: 20,
            checkpoint_every_steps: 0,
            emit_profile_plot: true,
            out_dir: PathBuf::from("out"),
            vortex: VortexParams::default(),
            cases: Vec::new(),
            convergence: None,
        }
    }
}

impl RunConfig {
    /// Loads `path` (or starts from defaults when `None`) and applies
    /// `overrides`.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let file: ConfigFile = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::from_str("").expect("empty config parses"),
        };
        Self::resolve(file, overrides)
    }

    fn resolve(file: ConfigFile, ov: &Overrides) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(s) = ov.scheme.as_deref().or(file.scheme.as_deref()) {
            cfg.scheme = s.parse()?;
        }
        if let Some(eta) = ov.eta.or(file.eta) {
            cfg.eta = eta;
        }
        if !(cfg.eta > 0.0 && cfg.eta < 1.0) {
            return Err(Error::Config(format!("eta must lie in (0, 1), got {}", cfg.eta)));
        }
        if let Some(tau) = file.tau {
            if !(tau > 0.0) {
                return Err(Error::Config(format!("tau must be positive, got {tau}")));
            }
            cfg.tau = tau;
        }
        if let Some(v) = file.end_time_half_decays {
            if !(v > 0.0) {
                return Err(Error::Config(format!(
                    "end_time_half_decays must be positive, got {v}"
                )));
            }
            cfg.end_time_half_decays = v;
        }
        if let Some(v) = file.samples_per_half_decay {
            if v == 0 {
                return Err(Error::Config("samples_per_half_decay must be at least 1".into()));
            }
            cfg.samples_per_half_decay = v;
        }
        if let Some(v) = file.checkpoint_every_steps {
            cfg.checkpoint_every_steps = v;
        }
        if let Some(v) = file.emit_profile_plot {
            cfg.emit_profile_plot = v;
        }
        if let Some(v) = ov.out.clone().or(file.out_dir) {
            cfg.out_dir = v;
        }
        if let Some(v) = file.vortex {
            let d = VortexParams::default();
            cfg.vortex = VortexParams {
                a: v.a.unwrap_or(d.a),
                b: v.b.unwrap_or(d.b),
                u0: v.u0.unwrap_or(d.u0),
                rho0: v.rho0.unwrap_or(d.rho0),
                rt0: v.rt0.unwrap_or(d.rt0),
            };
        }
        cfg.convergence = file.convergence;
        if let Some(c) = &cfg.convergence {
            if c.levels < 3 {
                return Err(Error::Config(format!(
                    "a convergence ladder needs at least 3 levels, got {}",
                    c.levels
                )));
            }
        }

        let mut file_cases = file.cases;
        match (ov.eps, ov.mesh) {
            (Some(eps), Some(mesh)) => {
                file_cases = vec![CaseConfig {
                    epsilon: eps,
                    mesh: Some(mesh),
                    scaling_exponent: None,
                }];
            }
            (Some(eps), None) => match file_cases.len() {
                1 => file_cases[0].epsilon = eps,
                n => {
                    return Err(Error::Config(format!(
                        "--eps without --mesh needs exactly one configured case to override, found {n}"
                    )))
                }
            },
            (None, Some(mesh)) => match file_cases.len() {
                1 => {
                    file_cases[0].mesh = Some(mesh);
                    file_cases[0].scaling_exponent = None;
                }
                n => {
                    return Err(Error::Config(format!(
                        "--mesh without --eps needs exactly one configured case to override, found {n}"
                    )))
                }
            },
            (None, None) => {}
        }
        cfg.cases = file_cases
            .iter()
            .map(resolve_case)
            .collect::<Result<Vec<_>>>()?;
        Ok(cfg)
    }
}

fn resolve_case(case: &CaseConfig) -> Result<ResolvedCase> {
    if !(case.epsilon > 0.0) || !case.epsilon.is_finite() {
        return Err(Error::Config(format!(
            "case epsilon must be positive and finite, got {}",
            case.epsilon
        )));
    }
    let mesh = match (case.mesh, case.scaling_exponent) {
        (Some(n), None) => n as usize,
        (None, Some(beta)) => {
            if !(beta > 0.0) {
                return Err(Error::Config(format!(
                    "scaling exponent must be positive, got {beta}"
                )));
            }
            case.epsilon.powf(-beta).round() as usize
        }
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "a case must set either mesh or scaling_exponent, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config(
                "a case must set either mesh or scaling_exponent".into(),
            ))
        }
    };
    if mesh < 4 {
        return Err(Error::Config(format!(
            "resolved mesh {mesh} is below the minimum of 4 cells per axis"
        )));
    }
    Ok(ResolvedCase {
        epsilon: case.epsilon,
        mesh,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        let file: ConfigFile = toml::from_str(text).unwrap();
        RunConfig::resolve(file, &Overrides::default())
    }

    #[test]
    fn scaling_exponent_reproduces_the_reference_meshes() {
        let cfg = parse(
            r#"
            [[cases]]
            epsilon = 1.6e-3
            scaling_exponent = 0.5
            [[cases]]
            epsilon = 1e-4
            scaling_exponent = 0.5
            [[cases]]
            epsilon = 2.5e-5
            scaling_exponent = 0.5
            "#,
        )
        .unwrap();
        let meshes: Vec<usize> = cfg.cases.iter().map(|c| c.mesh).collect();
        assert_eq!(meshes, vec![25, 100, 200]);
    }

    #[test]
    fn mesh_and_exponent_are_mutually_exclusive() {
        let err = parse(
            r#"
            [[cases]]
            epsilon = 1e-4
            mesh = 50
            scaling_exponent = 0.5
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = parse("[[cases]]\nepsilon = 1e-4\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn defaults_match_the_reference_experiment() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.scheme, SchemeVariant::Dugks);
        assert_eq!(cfg.eta, 0.5);
        assert_eq!(cfg.tau, 1.0);
        assert_eq!(cfg.vortex.u0, 0.01);
        assert_eq!(cfg.vortex.rt0, 0.5);
        assert_eq!(cfg.vortex.a, std::f64::consts::TAU);
        assert_eq!(cfg.samples_per_half_decay, 20);
    }

    #[test]
    fn overrides_win_over_the_file() {
        let file: ConfigFile = toml::from_str(
            r#"
            scheme = "clr"
            eta = 0.3
            [[cases]]
            epsilon = 1e-3
            mesh = 32
            "#,
        )
        .unwrap();
        let ov = Overrides {
            scheme: Some("dugks".into()),
            eps: Some(1e-4),
            mesh: None,
            eta: Some(0.6),
            out: Some(PathBuf::from("elsewhere")),
        };
        let cfg = RunConfig::resolve(file, &ov).unwrap();
        assert_eq!(cfg.scheme, SchemeVariant::Dugks);
        assert_eq!(cfg.eta, 0.6);
        assert_eq!(cfg.cases, vec![ResolvedCase { epsilon: 1e-4, mesh: 32 }]);
        assert_eq!(cfg.out_dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_eta() {
        assert!(toml::from_str::<ConfigFile>("not_a_key = 1").is_err());
        assert!(parse("eta = 1.5").is_err());
    }
}
