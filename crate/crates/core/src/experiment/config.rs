use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LqgError, Result};
use crate::gmc::{check_subcritical, Flavor, Scheme};
use crate::manifolds::{ManifoldKind, ManifoldModel};
use crate::polyakov::PolyakovFlavor;
use crate::spectral::KernelKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    KernelResidual,
    FieldCovariance,
    GmcMass,
    Martingale,
    ConformalMeasure,
    BallScaling,
    LbmRevuz,
    RandomOperator,
    Polyakov,
    Anomaly,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::KernelResidual,
        ExperimentKind::FieldCovariance,
        ExperimentKind::GmcMass,
        ExperimentKind::Martingale,
        ExperimentKind::ConformalMeasure,
        ExperimentKind::BallScaling,
        ExperimentKind::LbmRevuz,
        ExperimentKind::RandomOperator,
        ExperimentKind::Polyakov,
        ExperimentKind::Anomaly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::KernelResidual => "kernel-residual",
            ExperimentKind::FieldCovariance => "field-covariance",
            ExperimentKind::GmcMass => "gmc-mass",
            ExperimentKind::Martingale => "martingale",
            ExperimentKind::ConformalMeasure => "conformal-measure",
            ExperimentKind::BallScaling => "ball-scaling",
            ExperimentKind::LbmRevuz => "lbm-revuz",
            ExperimentKind::RandomOperator => "random-operator",
            ExperimentKind::Polyakov => "polyakov",
            ExperimentKind::Anomaly => "anomaly",
        }
    }

    /// One-line description of what the experiment checks.
    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::KernelResidual => {
                "kernel ladder: S² grounded resolvent vs closed form, or log-divergence residual stability under doubled truncation"
            }
            ExperimentKind::FieldCovariance => {
                "field pairings vs the covariance form, Weyl growth of the GJMS spectrum, Girsanov shift identity"
            }
            ExperimentKind::GmcMass => "mean total LQG mass equals the volume; Cameron-Martin weight-ratio identity",
            ExperimentKind::Martingale => "nested Monte Carlo regression of fine-level on coarse-level subset mass",
            ExperimentKind::ConformalMeasure => {
                "subset-mass moments: transformed g-ensemble vs directly sampled g'-ensemble"
            }
            ExperimentKind::BallScaling => "ball masses over a radius ladder: means vs ball volumes, log-log slopes",
            ExperimentKind::LbmRevuz => "Liouville Brownian motion: clock at γ = 0, Revuz identity on paths",
            ExperimentKind::RandomOperator => {
                "Galerkin random GJMS operator: spectrum, heat-flow energy dissipation, form invariance"
            }
            ExperimentKind::Polyakov => {
                "partition function by a-integration vs Gamma reduction; finiteness gates; total Q invariance"
            }
            ExperimentKind::Anomaly => "conformal anomaly: Monte Carlo ratio vs closed form with common random numbers",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = LqgError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LqgError::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// Short manifold names used on the command line.
pub fn parse_manifold(s: &str) -> Result<ManifoldKind> {
    use std::f64::consts::PI;
    Ok(match s {
        "s2" => ManifoldKind::unit_sphere(2),
        "s4" => ManifoldKind::unit_sphere(4),
        "s6" => ManifoldKind::unit_sphere(6),
        "t2" => ManifoldKind::square_torus(2, 2.0 * PI),
        "t4" => ManifoldKind::square_torus(4, 2.0 * PI),
        "s2xs2" => ManifoldKind::ProductSurfaces {
            curvature_1: 1.0,
            curvature_2: 1.0,
        },
        _ => return Err(LqgError::Config(format!("unknown manifold `{s}` (s2, s4, s6, t2, t4, s2xs2)"))),
    })
}

/// Every field except `kind` and `manifold` is optional; runners fill in
/// per-kind defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_manifold")]
    pub manifold: ManifoldKind,
    #[serde(default)]
    pub seed: u64,
    /// Monte Carlo sample count.
    pub samples: Option<usize>,
    pub gamma: Option<f64>,
    pub flavor: Option<Flavor>,
    pub scheme: Option<Scheme>,
    /// Laplace spectrum cutoff (kernel sums: maximal degree).
    pub cutoff: Option<usize>,
    /// Number of nonconstant field modes.
    pub ell: Option<usize>,
    /// Coarse level for the martingale experiment.
    pub ell_coarse: Option<usize>,
    /// Inner sample count for the martingale experiment.
    pub inner: Option<usize>,
    /// Quadrature resolution.
    pub resolution: Option<usize>,
    pub kernel: Option<KernelKind>,
    pub phi_amplitude: Option<f64>,
    pub time: Option<f64>,
    pub dt: Option<f64>,
    pub theta: Option<f64>,
    pub theta_star: Option<f64>,
    pub m: Option<f64>,
    pub polyakov_flavor: Option<PolyakovFlavor>,
    /// Worker threads; affects wall time only.
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

fn default_manifold() -> ManifoldKind {
    ManifoldKind::unit_sphere(2)
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        let defaults = if kind == ExperimentKind::LbmRevuz {
            ManifoldKind::square_torus(2, 2.0 * std::f64::consts::PI)
        } else {
            default_manifold()
        };
        Self {
            kind,
            manifold: defaults,
            seed: 0,
            samples: None,
            gamma: None,
            flavor: None,
            scheme: None,
            cutoff: None,
            ell: None,
            ell_coarse: None,
            inner: None,
            resolution: None,
            kernel: None,
            phi_amplitude: None,
            time: None,
            dt: None,
            theta: None,
            theta_star: None,
            m: None,
            polyakov_flavor: None,
            threads: None,
            out: None,
        }
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| LqgError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LqgError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LqgError::Config(e.to_string()))
    }

    /// The parts of the config that determine results.
    pub fn echo(&self) -> Self {
        Self {
            threads: None,
            out: None,
            ..self.clone()
        }
    }

    /// Range checks that must pass before any computation.
    pub fn validate(&self) -> Result<ManifoldModel> {
        let model = ManifoldModel::new(self.manifold.clone())?;
        let n = model.dimension();
        if let Some(g) = self.gamma {
            check_subcritical(g, n)?;
        }
        for (name, v) in [("samples", self.samples), ("inner", self.inner), ("resolution", self.resolution)] {
            if v == Some(0) {
                return Err(LqgError::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(LqgError::InvalidParameter("threads must be positive".into()));
            }
        }
        for (name, v) in [("time", self.time), ("dt", self.dt), ("m", self.m)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(LqgError::InvalidParameter(format!("{name} must be positive (got {x})")));
                }
            }
        }
        if let Some(a) = self.phi_amplitude {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(LqgError::InvalidParameter(format!("phi_amplitude must be ≥ 0 (got {a})")));
            }
        }
        if let (Some(c), Some(l)) = (self.ell_coarse, self.ell) {
            if c == 0 || c > l {
                return Err(LqgError::InvalidParameter(format!("need 0 < ell_coarse ≤ ell (got {c}, {l})")));
            }
        }
        Ok(model)
    }
}
