use std::time::Instant;

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::pointer::{gaussian_pointer, PointerGrid};
use crate::protocols::{
    party_label, CrossCheck, PointerReport, ProtocolConfig, RepresentationChoice, RunReport, Scheme,
};
use crate::tensor::{max_entangled, tensor_product, StateVector};
use crate::weak::{conditional_weak_value, CouplingSpec, JointState, PointerMoments, Representation};

/// Couplings on a discrete state, then partial post-selections in order.
/// Coupling `i` is read out by pointer `i`.
pub(super) struct Pipeline {
    pub phi: StateVector,
    pub discrete: StateVector,
    pub couplings: Vec<CouplingSpec>,
    pub deltas: Vec<f64>,
    pub posts: Vec<(Vec<usize>, StateVector)>,
    pub reverse: bool,
}

pub(super) struct Outcome {
    pub ps_probability: f64,
    pub pointers: Vec<PointerReport>,
    pub cross_check: Option<CrossCheck>,
}

impl Pipeline {
    fn simulate(&self, repr: Representation, grid: &PointerGrid) -> Result<(f64, Vec<PointerMoments>)> {
        let mut js = match repr {
            Representation::Grid => {
                let pointers = self
                    .deltas
                    .iter()
                    .map(|&d| gaussian_pointer(grid, d))
                    .collect::<Result<Vec<_>>>()?;
                JointState::grid(&self.discrete, &pointers)?
            }
            Representation::GaussianEnsemble => JointState::ensemble(&self.discrete, &self.deltas)?,
        };
        let order: Vec<usize> = if self.reverse {
            (0..self.couplings.len()).rev().collect()
        } else {
            (0..self.couplings.len()).collect()
        };
        for i in order {
            js = js.apply_coupling(&self.couplings[i])?;
        }
        for (targets, chi) in &self.posts {
            js = js.postselect(targets, chi)?.0;
        }
        let moments = (0..self.couplings.len())
            .map(|p| js.pointer_moments(p))
            .collect::<Result<Vec<_>>>()?;
        Ok((js.weight(), moments))
    }

    fn weak_values(&self) -> Result<Vec<C64>> {
        let posts: Vec<(&[usize], &StateVector)> =
            self.posts.iter().map(|(t, chi)| (t.as_slice(), chi)).collect();
        self.couplings
            .iter()
            .map(|c| conditional_weak_value(&self.discrete, &c.observable, c.target, &posts))
            .collect()
    }

    pub fn run(&self, choice: RepresentationChoice, grid: &PointerGrid) -> Result<Outcome> {
        let weak_values = self.weak_values()?;
        let (ps_probability, moments) = self.simulate(choice.primary(), grid)?;
        let pointers: Vec<PointerReport> = self
            .couplings
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let expectation = c.observable.expectation(self.phi.amps());
                PointerReport::new(&party_label(i), c, self.deltas[i], moments[i], weak_values[i], expectation)
            })
            .collect();
        let cross_check = match choice {
            RepresentationChoice::Both => {
                let (ps, m) = self.simulate(Representation::Grid, grid)?;
                Some(CrossCheck::new(ps_probability, &pointers, ps, &m))
            }
            _ => None,
        };
        Ok(Outcome { ps_probability, pointers, cross_check })
    }
}

fn cloning_pipeline(cfg: &ProtocolConfig) -> Result<Pipeline> {
    cfg.validate()?;
    let pair = max_entangled(cfg.dim())?;
    Ok(Pipeline {
        phi: cfg.phi.clone(),
        discrete: tensor_product(&cfg.phi, &pair)?,
        couplings: vec![
            CouplingSpec::new(cfg.obs_a.clone(), 0, 0, cfg.gamma_a)?,
            CouplingSpec::new(cfg.obs_b.clone(), 2, 1, cfg.gamma_b)?,
        ],
        deltas: vec![cfg.delta_a, cfg.delta_b],
        posts: vec![(vec![0, 1], pair)],
        reverse: cfg.bob_first,
    })
}

fn run_cloning(cfg: &ProtocolConfig, scheme: Scheme) -> Result<RunReport> {
    let start = Instant::now();
    let out = cloning_pipeline(cfg)?.run(cfg.representation, &cfg.grid()?)?;
    Ok(RunReport {
        scheme,
        layout: cfg.layout,
        representation: cfg.representation,
        ps_probability: out.ps_probability,
        branch_probabilities: None,
        pointers: out.pointers,
        cross_check: out.cross_check,
        config: cfg.echo(),
        wall_time: start.elapsed(),
    })
}

/// `|φ⟩₁|Φ⟩₂₃`: Alice couples to 1, Bob to 3, then `Φ` is post-selected on
/// (1, 2). Works for any dimension with `Φ` maximally entangled.
pub fn run_weak_cloning(cfg: &ProtocolConfig) -> Result<RunReport> {
    run_cloning(cfg, Scheme::WeakClone)
}

/// Same pipeline as [`run_weak_cloning`], tagged as a qudit run.
pub fn run_qudit(cfg: &ProtocolConfig) -> Result<RunReport> {
    run_cloning(cfg, Scheme::Qudit)
}
