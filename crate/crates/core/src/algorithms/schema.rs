use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dvoretzky_checker::{
    blum_to_dvoretzky, BlumConstruction, BlumProblem, BoundMode, DvoretzkyParams, ParamSeq,
};
use crate::process_engine::{NoiseModel, ProcessSpec};
use crate::series_lab::{Schedule, SeqSpec};

use super::iterations::{affine_spec, banach_spec, kw_spec, rm_spec, sgd_spec};
use super::maps::MapSpec;
use super::problems::{default_grid, ContractionProblem, MinimizationProblem, RootFindingProblem};
use super::AlgoError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Rm,
    Kw,
    Sgd,
    Banach,
    Affine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    #[default]
    Zero,
    Gaussian {
        sigma: f64,
    },
    Uniform {
        half_width: f64,
    },
    Discrete {
        values: Vec<f64>,
        probs: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl NoiseSpec {
    pub fn build(&self) -> Result<NoiseModel, AlgoError> {
        Ok(match self {
            NoiseSpec::Zero => NoiseModel::zero(),
            NoiseSpec::Gaussian { sigma } => NoiseModel::gaussian(nonneg_const("sigma", *sigma)?),
            NoiseSpec::Uniform { half_width } => {
                NoiseModel::uniform(nonneg_const("half_width", *half_width)?)
            }
            NoiseSpec::Discrete {
                values,
                probs,
                scale,
            } => NoiseModel::discrete(values.clone(), probs.clone(), Schedule::constant(*scale))?,
        })
    }
}

fn nonneg_const(what: &str, v: f64) -> Result<Schedule, AlgoError> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(AlgoError::Schema(format!(
            "{what} must be a nonnegative number, got {v}"
        )));
    }
    Ok(Schedule::constant(v))
}

/// Problem description file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(rename = "type")]
    pub kind: ProblemKind,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<MapSpec>,
    #[serde(default)]
    pub b: f64,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub lin_a: Option<f64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub lin_b: Option<f64>,
    pub x0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<f64>,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Step sizes; unused by affine problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<SeqSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_schedule: Option<SeqSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_contr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
}

/// A problem with its schedules resolved.
#[derive(Debug, Clone)]
pub enum Problem {
    RootFinding {
        problem: RootFindingProblem,
        a: Schedule,
        x0: f64,
        x_star: f64,
    },
    KieferWolfowitz {
        problem: RootFindingProblem,
        a: Schedule,
        c: Schedule,
        x0: f64,
        x_star: f64,
    },
    Sgd {
        problem: MinimizationProblem,
        a: Schedule,
        x0: f64,
        x_star: f64,
    },
    Contraction {
        problem: ContractionProblem,
        a: Schedule,
        x0: f64,
    },
    Affine {
        slope: f64,
        intercept: f64,
        noise: NoiseModel,
        x0: f64,
        x_star: f64,
    },
}

fn need<T>(v: Option<T>, what: &str, kind: ProblemKind) -> Result<T, AlgoError> {
    v.ok_or_else(|| AlgoError::Schema(format!("{kind:?} problem needs `{what}`")))
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, AlgoError> {
        let f: Self = serde_json::from_str(text).map_err(|e| AlgoError::Schema(e.to_string()))?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(AlgoError::Schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                f.schema_version
            )));
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self, AlgoError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AlgoError::Schema(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn spec_id(&self) -> String {
        self.id
            .clone()
            .unwrap_or_else(|| format!("{:?}", self.kind).to_lowercase())
    }

    pub fn resolve(&self) -> Result<Problem, AlgoError> {
        let kind = self.kind;
        let noise = self.noise.build()?;
        let schedule = || -> Result<Schedule, AlgoError> {
            Ok(need(self.schedule.as_ref(), "schedule", kind)?.build()?)
        };
        let a = match kind {
            ProblemKind::Affine => Schedule::zero(),
            _ => schedule()?,
        };
        Ok(match kind {
            ProblemKind::Rm => {
                let problem = self.root_problem(need(self.m, "M", kind)?, noise)?;
                let x_star = match self.x_star {
                    Some(x) => x,
                    None => problem.root().ok_or_else(|| {
                        AlgoError::Schema("cannot invert M at b; declare x_star".into())
                    })?,
                };
                Problem::RootFinding {
                    problem,
                    a,
                    x0: self.x0,
                    x_star,
                }
            }
            ProblemKind::Kw => {
                let problem = self.root_problem(need(self.m, "M", kind)?, noise)?;
                let c = match &self.c_schedule {
                    Some(c) => c.build()?,
                    None => Schedule::power(1.0 / 3.0, 1.0, 0.0),
                };
                let x_star = match (self.x_star, self.m) {
                    (Some(x), _) => x,
                    (None, Some(MapSpec::NegQuadratic { center, .. })) => center,
                    _ => return Err(AlgoError::Schema("Kw problem needs `x_star`".into())),
                };
                Problem::KieferWolfowitz {
                    problem,
                    a,
                    c,
                    x0: self.x0,
                    x_star,
                }
            }
            ProblemKind::Sgd => {
                let problem = MinimizationProblem {
                    grad: need(self.grad, "grad", kind)?,
                    noise,
                };
                let x_star = match self.x_star {
                    Some(x) => x,
                    None => problem.minimizer().ok_or_else(|| {
                        AlgoError::Schema("gradient has no unique zero; declare x_star".into())
                    })?,
                };
                Problem::Sgd {
                    problem,
                    a,
                    x0: self.x0,
                    x_star,
                }
            }
            ProblemKind::Banach => {
                let problem = ContractionProblem::new(
                    need(self.g, "g", kind)?,
                    need(self.gamma_contr, "gamma_contr", kind)?,
                    need(self.fixed_point, "fixed_point", kind)?,
                    &default_grid(),
                )?;
                Problem::Contraction {
                    problem,
                    a,
                    x0: self.x0,
                }
            }
            ProblemKind::Affine => Problem::Affine {
                slope: need(self.slope, "slope", kind)?,
                intercept: self.intercept.unwrap_or(0.0),
                noise,
                x0: self.x0,
                x_star: need(self.x_star, "x_star", kind)?,
            },
        })
    }

    fn root_problem(&self, m: MapSpec, noise: NoiseModel) -> Result<RootFindingProblem, AlgoError> {
        let mut p = RootFindingProblem::new(m, self.b, noise);
        if let (Some(a), Some(b)) = (self.lin_a, self.lin_b) {
            p = p.with_bound(a, b);
        } else if self.lin_a.is_some() || self.lin_b.is_some() {
            return Err(AlgoError::Schema("declare both A and B or neither".into()));
        }
        if p.lin_a.is_finite() {
            p.validate(&default_grid())?;
        }
        Ok(p)
    }
}

/// Process spec plus whatever parameters follow from the problem's
/// declarations.
#[derive(Debug, Clone)]
pub struct DvoretzkyPackage {
    pub spec: ProcessSpec,
    /// Parameters derived from the problem, if it declares enough structure.
    pub params: Option<DvoretzkyParams>,
    pub blum: Option<BlumConstruction>,
    /// The reduction the Blum parameters were built from.
    pub blum_problem: Option<BlumProblem>,
}

impl Problem {
    pub fn process_spec(&self) -> ProcessSpec {
        match self {
            Problem::RootFinding {
                problem,
                a,
                x0,
                x_star,
            } => rm_spec(problem, a, *x0, *x_star),
            Problem::KieferWolfowitz {
                problem,
                a,
                c,
                x0,
                x_star,
            } => kw_spec(problem, a, c, *x0, *x_star),
            Problem::Sgd {
                problem,
                a,
                x0,
                x_star,
            } => sgd_spec(problem, a, *x0, *x_star),
            Problem::Contraction { problem, a, x0 } => banach_spec(problem, a, *x0),
            Problem::Affine {
                slope,
                intercept,
                noise,
                x0,
                x_star,
            } => affine_spec(*slope, *intercept, noise.clone(), *x0, *x_star),
        }
    }

    /// Root-finding data in the form the Blum reduction needs, for problems
    /// whose update is `x + a_n (b − M(x)) + noise`.
    pub fn blum_problem(&self) -> Result<Option<BlumProblem>, AlgoError> {
        let (m, b, noise, a, lin) = match self {
            Problem::RootFinding { problem, a, .. } => (
                problem.m,
                problem.b,
                &problem.noise,
                a,
                (problem.lin_a, problem.lin_b),
            ),
            Problem::Sgd { problem, a, .. } => (
                problem.grad,
                0.0,
                &problem.noise,
                a,
                problem
                    .grad
                    .linear_bound()
                    .unwrap_or((f64::INFINITY, f64::INFINITY)),
            ),
            _ => return Ok(None),
        };
        let domain = m.inverse_domain().ok_or_else(|| {
            AlgoError::MissingRegularity(format!("{m:?} declares no local inverse"))
        })?;
        if !(lin.0.is_finite() && lin.1.is_finite()) {
            return Err(AlgoError::MissingRegularity(format!(
                "{m:?} declares no linear bound"
            )));
        }
        Ok(Some(BlumProblem {
            m: Arc::new(move |x| m.eval(x)),
            m_inverse: Arc::new(move |y| m.inverse(y).unwrap_or(f64::NAN)),
            inverse_domain: domain,
            lin_a: lin.0,
            lin_b: lin.1,
            sigma: noise.std_dev(1)?,
            a: a.clone(),
            b,
        }))
    }
}

/// Packages a problem for certification.
///
/// Root-finding and SGD problems get Blum parameters built to `horizon`;
/// contractions get weak-bound parameters `α = β = 0`,
/// `γ_n = a_n (1 − contraction factor)`. Other problems need explicit
/// parameters.
pub fn as_dvoretzky(problem: &Problem, horizon: usize) -> Result<DvoretzkyPackage, AlgoError> {
    let spec = problem.process_spec();
    let blum_problem = problem.blum_problem()?;
    let (params, blum) = match (&blum_problem, problem) {
        (Some(bp), _) => {
            bp.validate(spec.x_star, &default_grid())?;
            let c = blum_to_dvoretzky(bp, spec.x_star, horizon, None)?;
            (Some(c.params.clone()), Some(c))
        }
        (None, Problem::Contraction { problem, a, .. }) => {
            let (a, k) = (a.clone(), 1.0 - problem.gamma_contr);
            let gamma = Schedule::nonneg(format!("{k} {}", a.label()), move |n| {
                k * a.get(n).unwrap_or(f64::NAN)
            });
            let p = DvoretzkyParams::regular(
                Schedule::zero(),
                Schedule::zero(),
                gamma,
                BoundMode::Weak,
                1,
            );
            (Some(p), None)
        }
        _ => (None, None),
    };
    Ok(DvoretzkyPackage {
        spec,
        params,
        blum,
        blum_problem,
    })
}

/// Replacement sequences applied on top of a construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<SeqSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<SeqSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<SeqSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamsConstruction {
    /// Blum reduction of a root-finding or SGD problem.
    Blum {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<SeqSpec>,
        #[serde(default)]
        overrides: Overrides,
    },
    /// Whatever the problem declares (Blum, or the contraction bound).
    Auto {
        #[serde(default)]
        overrides: Overrides,
    },
    Explicit {
        alpha: SeqSpec,
        beta: SeqSpec,
        gamma: SeqSpec,
        #[serde(default = "one_usize")]
        n0: usize,
    },
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<BoundMode>,
    #[serde(flatten)]
    pub construction: ParamsConstruction,
}

impl ParamsFile {
    pub fn from_json(text: &str) -> Result<Self, AlgoError> {
        let f: Self = serde_json::from_str(text).map_err(|e| AlgoError::Schema(e.to_string()))?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(AlgoError::Schema(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                f.schema_version
            )));
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self, AlgoError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AlgoError::Schema(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Builds the parameters for `pkg` at `horizon`. A mode given here wins
    /// over the construction's own.
    pub fn resolve(
        &self,
        pkg: &DvoretzkyPackage,
        horizon: usize,
    ) -> Result<DvoretzkyParams, AlgoError> {
        let (base, overrides) = match &self.construction {
            ParamsConstruction::Explicit {
                alpha,
                beta,
                gamma,
                n0,
            } => (
                DvoretzkyParams::regular(
                    alpha.build()?,
                    beta.build()?,
                    gamma.build()?,
                    BoundMode::Original,
                    *n0,
                ),
                None,
            ),
            ParamsConstruction::Blum { rho, overrides } => {
                let bp = pkg.blum_problem.as_ref().ok_or_else(|| {
                    AlgoError::MissingRegularity("problem admits no Blum reduction".into())
                })?;
                let rho = rho.as_ref().map(|r| r.build()).transpose()?;
                let c = blum_to_dvoretzky(bp, pkg.spec.x_star, horizon, rho)?;
                (c.params, Some(overrides))
            }
            ParamsConstruction::Auto { overrides } => {
                let p = pkg.params.clone().ok_or_else(|| {
                    AlgoError::MissingRegularity(
                        "problem declares no parameters; use explicit".into(),
                    )
                })?;
                (p, Some(overrides))
            }
        };
        let mut p = base;
        if let Some(o) = overrides {
            if let Some(s) = &o.alpha {
                p.alpha = ParamSeq::Regular(s.build()?);
            }
            if let Some(s) = &o.beta {
                p.beta = ParamSeq::Regular(s.build()?);
            }
            if let Some(s) = &o.gamma {
                p.gamma = ParamSeq::Regular(s.build()?);
            }
        }
        if let Some(m) = self.mode {
            p.mode = m;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process_engine::simulate;

    const RM: &str = r#"{
        "schema_version": 1,
        "type": "rm",
        "M": {"name": "linear", "k": 2, "c": 1},
        "b": 0, "A": 2, "B": 1,
        "x0": 1.0,
        "noise": {"kind": "gaussian", "sigma": 1},
        "schedule": {"name": "harmonic", "shift": 1}
    }"#;

    #[test]
    fn rm_file_resolves() {
        let f = ProblemFile::from_json(RM).unwrap();
        let p = f.resolve().unwrap();
        let pkg = as_dvoretzky(&p, 1000).unwrap();
        assert_eq!(pkg.spec.x_star, -0.5);
        let c = pkg.blum.unwrap();
        assert_eq!(c.n0, 1);
        assert!((c.eta.get(10).unwrap() - c.rho.get(10).unwrap() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rm_package_simulates_like_robbins_monro() {
        let p = ProblemFile::from_json(RM).unwrap().resolve().unwrap();
        let Problem::RootFinding { problem, a, x0, .. } = &p else {
            panic!()
        };
        let direct = super::super::robbins_monro(problem, a, 17, 3000, *x0).unwrap();
        let pkg = as_dvoretzky(&p, 3000).unwrap();
        assert_eq!(simulate(&pkg.spec, 17, 3000).unwrap(), direct);
    }

    #[test]
    fn contraction_package_is_noiseless_weak() {
        let text = r#"{"schema_version":1,"type":"banach","g":{"name":"linear","k":0.5,"c":1},
            "gamma_contr":0.5,"fixed_point":2,"x0":0,"schedule":{"name":"harmonic","shift":1}}"#;
        let p = ProblemFile::from_json(text).unwrap().resolve().unwrap();
        let pkg = as_dvoretzky(&p, 100).unwrap();
        let params = pkg.params.unwrap();
        assert_eq!(params.mode, BoundMode::Weak);
        assert_eq!(params.gamma.eval(3, 0).unwrap(), 0.5 * 0.25);
        assert_eq!(pkg.spec.noise.variance(5).unwrap(), 0.0);
    }

    #[test]
    fn sgd_quadratic_transform() {
        let text = r#"{"schema_version":1,"type":"sgd","grad":{"name":"linear","k":2,"c":-2},
            "x0":5,"noise":{"kind":"gaussian","sigma":1},"schedule":{"name":"harmonic","shift":1}}"#;
        let p = ProblemFile::from_json(text).unwrap().resolve().unwrap();
        let pkg = as_dvoretzky(&p, 100).unwrap();
        assert_eq!(pkg.spec.x_star, 1.0);
        let t = pkg.spec.transform.eval(3, &[0.0, 0.0, 4.0], 0.5);
        assert_eq!(t, 4.0 - 0.25 * (2.0 * 4.0 - 2.0));
        assert!(pkg.blum.is_some());
    }

    #[test]
    fn schema_errors() {
        assert!(ProblemFile::from_json("{").is_err());
        assert!(ProblemFile::from_json(
            &RM.replace("\"schema_version\": 1", "\"schema_version\": 9")
        )
        .is_err());
        assert!(ProblemFile::from_json(&RM.replace("\"b\": 0", "\"bogus\": 0")).is_err());
        let no_m = RM.replace(r#""M": {"name": "linear", "k": 2, "c": 1},"#, "");
        assert!(ProblemFile::from_json(&no_m).unwrap().resolve().is_err());
        let tight = RM.replace("\"B\": 1", "\"B\": 0.1");
        assert!(ProblemFile::from_json(&tight).unwrap().resolve().is_err());
    }

    #[test]
    fn params_files() {
        let p = ProblemFile::from_json(RM).unwrap().resolve().unwrap();
        let pkg = as_dvoretzky(&p, 1000).unwrap();
        let zero_gamma = ParamsFile::from_json(
            r#"{"schema_version":1,"construction":"blum","overrides":{"gamma":{"name":"zero"}}}"#,
        )
        .unwrap();
        let params = zero_gamma.resolve(&pkg, 1000).unwrap();
        assert_eq!(params.gamma.eval(5, 0).unwrap(), 0.0);
        assert!(params.alpha.eval(5, 0).unwrap() > 0.0);

        let explicit = ParamsFile::from_json(
            r#"{"schema_version":1,"mode":"weak","construction":"explicit",
                "alpha":{"name":"harmonic"},"beta":{"name":"power","p":2},"gamma":{"name":"harmonic"}}"#,
        )
        .unwrap();
        let params = explicit.resolve(&pkg, 1000).unwrap();
        assert_eq!(params.mode, BoundMode::Weak);
        assert_eq!(params.beta.eval(2, 0).unwrap(), 0.25);

        assert!(ParamsFile::from_json(r#"{"schema_version":1,"construction":"magic"}"#).is_err());
    }
}
