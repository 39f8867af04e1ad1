use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocols::cloning::Pipeline;
use crate::protocols::{CrossCheck, PointerReport, ProtocolConfig, RepresentationChoice};
use crate::tensor::{max_entangled, tensor_product, HermitianObservable};
use crate::weak::{CouplingSpec, MAX_GRID_POINTERS};

/// `k` parties linked by `k − 1` maximally entangled pairs.
///
/// Party 0 uses `gamma_a`, `delta_a`; every later party uses `gamma_b`,
/// `delta_b`. One observable per party.
#[derive(Clone, Debug)]
pub struct ChainConfig {
    pub base: ProtocolConfig,
    pub observables: Vec<HermitianObservable>,
}

impl ChainConfig {
    /// Party 0 measures `obs_a`, all others `obs_b`.
    pub fn uniform(base: ProtocolConfig, parties: usize) -> Self {
        let observables = (0..parties)
            .map(|i| if i == 0 { base.obs_a.clone() } else { base.obs_b.clone() })
            .collect();
        ChainConfig { base, observables }
    }

    pub fn parties(&self) -> usize {
        self.observables.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub parties: usize,
    pub representation: RepresentationChoice,
    /// Probability that all `k − 1` post-selections succeed.
    pub ps_probability: f64,
    pub pointers: Vec<PointerReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Runs the chain: `|φ⟩ ⊗ |Φ⟩^{⊗(k−1)}`, party `i` couples to subsystem
/// `2i`, then the maximally entangled state is post-selected on the first
/// two remaining subsystems `k − 1` times, teleporting `φ` down the chain.
pub fn run_chain(cfg: &ChainConfig) -> Result<ChainReport> {
    let start = Instant::now();
    let base = &cfg.base;
    base.validate()?;
    let k = cfg.parties();
    if k == 0 {
        return Err(Error::Dimension("a chain needs at least one party".into()));
    }
    if base.representation != RepresentationChoice::Gaussian && k > MAX_GRID_POINTERS {
        return Err(Error::Representation(format!(
            "{k} parties need {k} pointers; the grid holds at most {MAX_GRID_POINTERS}, use the gaussian representation"
        )));
    }
    let n = base.dim();
    if let Some(obs) = cfg.observables.iter().find(|o| o.dim() != n) {
        return Err(Error::ShapeMismatch(format!(
            "chain observable is {0}×{0} but the state has dimension {n}",
            obs.dim()
        )));
    }

    let pair = max_entangled(n)?;
    let discrete = (1..k).try_fold(base.phi.clone(), |acc, _| tensor_product(&acc, &pair))?;
    let couplings = cfg
        .observables
        .iter()
        .enumerate()
        .map(|(i, obs)| {
            let gamma = if i == 0 { base.gamma_a } else { base.gamma_b };
            CouplingSpec::new(obs.clone(), 2 * i, i, gamma)
        })
        .collect::<Result<Vec<_>>>()?;
    let deltas = (0..k).map(|i| if i == 0 { base.delta_a } else { base.delta_b }).collect();
    let pipeline = Pipeline {
        phi: base.phi.clone(),
        discrete,
        couplings,
        deltas,
        posts: (1..k).map(|_| (vec![0, 1], pair.clone())).collect(),
        reverse: base.bob_first,
    };
    let out = pipeline.run(base.representation, &base.grid()?)?;
    Ok(ChainReport {
        parties: k,
        representation: base.representation,
        ps_probability: out.ps_probability,
        pointers: out.pointers,
        cross_check: out.cross_check,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{random_hermitian, random_state, run_weak_cloning};

    fn base(seed: u64) -> ProtocolConfig {
        ProtocolConfig::new(
            random_state(2, seed).unwrap(),
            random_hermitian(2, seed + 1).unwrap(),
            random_hermitian(2, seed + 2).unwrap(),
        )
    }

    #[test]
    fn single_party_is_plain_measurement() {
        let r = run_chain(&ChainConfig::uniform(base(0), 1)).unwrap();
        assert_eq!(r.ps_probability, 1.0);
        assert!(r.pointers[0].residual.unwrap() < 1e-4);
    }

    #[test]
    fn two_parties_match_weak_cloning() {
        let cfg = base(3);
        let chain = run_chain(&ChainConfig::uniform(cfg.clone(), 2)).unwrap();
        let clone = run_weak_cloning(&cfg).unwrap();
        assert_eq!(chain.ps_probability, clone.ps_probability);
        assert_eq!(chain.pointers, clone.pointers);
    }

    #[test]
    fn probability_halves_twice_per_link() {
        for k in 1..=4 {
            let cfg = ChainConfig::uniform(base(k as u64), k);
            let r = run_chain(&cfg).unwrap();
            assert!((r.ps_probability - 0.25f64.powi(k as i32 - 1)).abs() < 1e-6);
            let r0 = run_chain(&ChainConfig { base: cfg.base.clone().with_gamma(0.0), ..cfg }).unwrap();
            assert!((r0.ps_probability - 0.25f64.powi(k as i32 - 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn three_distinct_observables() {
        let b = base(11);
        let observables = vec![random_hermitian(2, 20).unwrap(), random_hermitian(2, 21).unwrap(), random_hermitian(2, 22).unwrap()];
        let r = run_chain(&ChainConfig { base: b, observables }).unwrap();
        assert!((r.ps_probability - 1.0 / 16.0).abs() < 1e-6);
        for p in &r.pointers {
            assert!(p.expectation_error().unwrap() < 1e-4);
            assert!((p.weak_value.re - p.expectation).abs() < 1e-12 && p.weak_value.im.abs() < 1e-12);
        }
    }

    #[test]
    fn grid_refused_for_three_parties() {
        let cfg = ChainConfig::uniform(base(0).with_representation(RepresentationChoice::Grid), 3);
        assert!(matches!(run_chain(&cfg), Err(Error::Representation(_))));
    }
}
