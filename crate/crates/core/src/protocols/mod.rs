//! End-to-end drivers: weak cloning, the teleportation baseline, chains of
//! parties and the qudit generalization.

mod chain;
mod cloning;
mod random;
mod sequential;

pub use chain::{run_chain, ChainConfig, ChainReport};
pub use cloning::{run_qudit, run_weak_cloning};
pub use random::{random_hermitian, random_state};
pub use sequential::run_teleportation_sequential;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pointer::{PointerGrid, DEFAULT_GRID_HALF_WIDTH, DEFAULT_GRID_N, WEAKNESS_WARN};
use crate::tensor::{HermitianObservable, StateVector};
use crate::weak::{CouplingSpec, PointerMoments, Representation};

/// Strength used when none is given.
pub const DEFAULT_GAMMA: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[serde(rename = "weakclone")]
    WeakClone,
    Sequential,
    Chain,
    Qudit,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::WeakClone => "weakclone",
            Scheme::Sequential => "sequential",
            Scheme::Chain => "chain",
            Scheme::Qudit => "qudit",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weakclone" => Ok(Scheme::WeakClone),
            "sequential" => Ok(Scheme::Sequential),
            "chain" => Ok(Scheme::Chain),
            "qudit" => Ok(Scheme::Qudit),
            _ => Err(Error::Dimension(format!("unknown scheme `{s}`"))),
        }
    }
}

/// Who holds the entangled pair. Only changes report metadata.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    #[default]
    AliceHoldsPair,
    BobHoldsPair,
}

impl Layout {
    pub fn as_str(&self) -> &'static str {
        match self {
            Layout::AliceHoldsPair => "alice-holds-pair",
            Layout::BobHoldsPair => "bob-holds-pair",
        }
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alice-holds-pair" => Ok(Layout::AliceHoldsPair),
            "bob-holds-pair" => Ok(Layout::BobHoldsPair),
            _ => Err(Error::Dimension(format!("unknown layout `{s}`"))),
        }
    }
}

/// Which representation(s) a run uses. `Both` reports the ensemble result
/// and attaches the grid result as a cross-check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationChoice {
    Grid,
    #[default]
    Gaussian,
    Both,
}

impl RepresentationChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            RepresentationChoice::Grid => "grid",
            RepresentationChoice::Gaussian => "gaussian",
            RepresentationChoice::Both => "both",
        }
    }

    fn primary(&self) -> Representation {
        match self {
            RepresentationChoice::Grid => Representation::Grid,
            _ => Representation::GaussianEnsemble,
        }
    }
}

impl fmt::Display for RepresentationChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepresentationChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(RepresentationChoice::Grid),
            "gaussian" => Ok(RepresentationChoice::Gaussian),
            "both" => Ok(RepresentationChoice::Both),
            _ => Err(Error::Dimension(format!("unknown representation `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    /// The unknown input state, a single qudit.
    pub phi: StateVector,
    pub obs_a: HermitianObservable,
    pub obs_b: HermitianObservable,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub representation: RepresentationChoice,
    pub grid_n: usize,
    pub grid_half_width: f64,
    pub seed: u64,
    pub layout: Layout,
    /// Apply Bob's coupling before Alice's.
    pub bob_first: bool,
}

impl ProtocolConfig {
    /// Defaults: `γ = 10⁻³`, `Δ = 1`, ensemble representation, default grid.
    pub fn new(phi: StateVector, obs_a: HermitianObservable, obs_b: HermitianObservable) -> Self {
        ProtocolConfig {
            phi,
            obs_a,
            obs_b,
            gamma_a: DEFAULT_GAMMA,
            gamma_b: DEFAULT_GAMMA,
            delta_a: 1.0,
            delta_b: 1.0,
            representation: RepresentationChoice::default(),
            grid_n: DEFAULT_GRID_N,
            grid_half_width: DEFAULT_GRID_HALF_WIDTH,
            seed: 0,
            layout: Layout::default(),
            bob_first: false,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma_a = gamma;
        self.gamma_b = gamma;
        self
    }

    pub fn with_representation(mut self, representation: RepresentationChoice) -> Self {
        self.representation = representation;
        self
    }

    /// Dimension of the input qudit.
    pub fn dim(&self) -> usize {
        self.phi.dims().first().copied().unwrap_or(0)
    }

    pub fn grid(&self) -> Result<PointerGrid> {
        PointerGrid::new(self.grid_n, self.grid_half_width)
    }

    pub fn validate(&self) -> Result<()> {
        if self.phi.num_subsystems() != 1 {
            return Err(Error::Dimension(format!(
                "input state must be a single qudit, got dims {:?}",
                self.phi.dims()
            )));
        }
        if !self.phi.is_normalized() {
            return Err(Error::Dimension(format!("input state has norm {}", self.phi.norm())));
        }
        let n = self.dim();
        for (name, obs) in [("A", &self.obs_a), ("B", &self.obs_b)] {
            if obs.dim() != n {
                return Err(Error::ShapeMismatch(format!(
                    "observable {name} is {0}×{0} but the state has dimension {n}",
                    obs.dim()
                )));
            }
        }
        for (name, v) in [("gamma_a", self.gamma_a), ("gamma_b", self.gamma_b)] {
            if !v.is_finite() {
                return Err(Error::Dimension(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [("delta_a", self.delta_a), ("delta_b", self.delta_b)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Dimension(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            phi: self.phi.amps().iter().map(|z| [z.re, z.im]).collect(),
            obs_a: self.obs_a.matrix().as_slice().iter().map(|z| [z.re, z.im]).collect(),
            obs_b: self.obs_b.matrix().as_slice().iter().map(|z| [z.re, z.im]).collect(),
            gamma_a: self.gamma_a,
            gamma_b: self.gamma_b,
            delta_a: self.delta_a,
            delta_b: self.delta_b,
            grid_n: self.grid_n,
            grid_l: self.grid_half_width,
            seed: self.seed,
            bob_first: self.bob_first,
        }
    }
}

/// Serializable copy of the inputs of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub phi: Vec<[f64; 2]>,
    pub obs_a: Vec<[f64; 2]>,
    pub obs_b: Vec<[f64; 2]>,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub grid_n: usize,
    pub grid_l: f64,
    pub seed: u64,
    pub bob_first: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexValue {
    fn from(z: C64) -> Self {
        ComplexValue { re: z.re, im: z.im }
    }
}

/// What one pointer recorded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointerReport {
    pub label: String,
    pub gamma: f64,
    pub delta: f64,
    /// Momentum shift `⟨p⟩_final − ⟨p⟩_initial`; pointers start centered.
    pub delta_p: f64,
    pub variance: f64,
    /// `−δp/γ`, absent at `γ = 0`.
    pub estimate: Option<f64>,
    pub weak_value: ComplexValue,
    pub expectation: f64,
    /// `|ŵ − X_w|`, absent at `γ = 0`.
    pub residual: Option<f64>,
    pub weakness_ratio: f64,
}

impl PointerReport {
    fn new(label: &str, spec: &CouplingSpec, delta: f64, m: PointerMoments, weak_value: C64, expectation: f64) -> Self {
        let estimate = (spec.gamma != 0.0).then(|| -m.mean / spec.gamma);
        PointerReport {
            label: label.to_string(),
            gamma: spec.gamma,
            delta,
            delta_p: m.mean,
            variance: m.variance,
            estimate,
            weak_value: weak_value.into(),
            expectation,
            residual: estimate.map(|w| (C64::new(w, 0.0) - weak_value).norm()),
            weakness_ratio: spec.weakness_ratio(delta),
        }
    }

    /// Whether the coupling is outside the weak regime.
    pub fn weakness_warning(&self) -> bool {
        self.weakness_ratio > WEAKNESS_WARN
    }

    /// `|ŵ − ⟨φ|X|φ⟩|`, absent at `γ = 0`.
    pub fn expectation_error(&self) -> Option<f64> {
        self.estimate.map(|w| (w - self.expectation).abs())
    }
}

/// The same run repeated on the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub representation: &'static str,
    pub ps_probability: f64,
    pub delta_p: Vec<f64>,
    /// Largest difference from the primary run over `ps_probability` and
    /// all `δp`.
    pub max_deviation: f64,
}

impl CrossCheck {
    fn new(primary_ps: f64, primary: &[PointerReport], ps_probability: f64, moments: &[PointerMoments]) -> Self {
        let delta_p: Vec<f64> = moments.iter().map(|m| m.mean).collect();
        let max_deviation = primary
            .iter()
            .zip(&delta_p)
            .map(|(r, d)| (r.delta_p - d).abs())
            .fold((primary_ps - ps_probability).abs(), f64::max);
        CrossCheck { representation: "grid", ps_probability, delta_p, max_deviation }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scheme: Scheme,
    pub layout: Layout,
    pub representation: RepresentationChoice,
    /// Probability of the kept branch; 1 when nothing is discarded.
    pub ps_probability: f64,
    /// Per-outcome probabilities of the Bell measurement, teleportation only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch_probabilities: Option<Vec<f64>>,
    pub pointers: Vec<PointerReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
    pub config: ConfigEcho,
    /// Left out of serialized output so reports stay reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RunReport {
    pub fn pointer(&self, label: &str) -> Option<&PointerReport> {
        self.pointers.iter().find(|p| p.label == label)
    }

    /// Equality of everything except metadata tags and timing.
    pub fn same_numerics(&self, other: &RunReport) -> bool {
        self.ps_probability.to_bits() == other.ps_probability.to_bits()
            && self.branch_probabilities == other.branch_probabilities
            && self.pointers == other.pointers
            && self.cross_check == other.cross_check
            && self.config == other.config
    }
}

/// Label of the `i`-th party: `a`, `b`, `c`, …, then `p26`, `p27`, ….
pub fn party_label(i: usize) -> String {
    if i < 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        format!("p{i}")
    }
}
