use std::time::Instant;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pointer::gaussian_pointer;
use crate::protocols::{
    party_label, CrossCheck, PointerReport, ProtocolConfig, RepresentationChoice, RunReport, Scheme,
};
use crate::tensor::{bell_phi_plus, tensor_product, Matrix, StateVector};
use crate::weak::{CouplingSpec, JointState, PointerMoments, Representation};

/// Bell basis `Φ+, Φ−, Ψ+, Ψ−` on two qubits, with the correction that
/// restores the teleported qubit for each outcome.
fn bell_outcomes() -> Vec<(StateVector, Matrix)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = |v: [f64; 4]| StateVector::new(vec![2, 2], v.iter().map(|&x| C64::new(x, 0.0)).collect());
    vec![
        (bell_phi_plus(), Matrix::identity(2)),
        (bell([s, 0.0, 0.0, -s]).unwrap(), Matrix::pauli_z()),
        (bell([0.0, s, s, 0.0]).unwrap(), Matrix::pauli_x()),
        (bell([0.0, s, -s, 0.0]).unwrap(), &Matrix::pauli_z() * &Matrix::pauli_x()),
    ]
}

/// Per-branch results: branch probability and both pointers' moments.
fn simulate(
    cfg: &ProtocolConfig,
    repr: Representation,
    alice: &CouplingSpec,
    bob: &CouplingSpec,
) -> Result<(Vec<f64>, Vec<PointerMoments>)> {
    let discrete = tensor_product(&cfg.phi, &bell_phi_plus())?;
    let initial = match repr {
        Representation::Grid => {
            let grid = cfg.grid()?;
            let pointers = [gaussian_pointer(&grid, cfg.delta_a)?, gaussian_pointer(&grid, cfg.delta_b)?];
            JointState::grid(&discrete, &pointers)?
        }
        Representation::GaussianEnsemble => JointState::ensemble(&discrete, &[cfg.delta_a, cfg.delta_b])?,
    };
    let coupled = initial.apply_coupling(alice)?;
    let mut probabilities = Vec::with_capacity(4);
    let mut branches = Vec::with_capacity(4);
    for (chi, correction) in bell_outcomes() {
        let (branch, p) = coupled.postselect(&[0, 1], &chi)?;
        probabilities.push(p);
        // a branch that never happens contributes nothing
        if p < crate::weak::MIN_WEIGHT {
            continue;
        }
        let branch = branch.apply_discrete(&correction, &[0])?.apply_coupling(bob)?;
        branches.push((p, branch.pointer_moments(0)?, branch.pointer_moments(1)?));
    }
    let total: f64 = branches.iter().map(|b| b.0).sum();
    let average = |pick: fn(&(f64, PointerMoments, PointerMoments)) -> PointerMoments| {
        let mean = branches.iter().map(|b| b.0 * pick(b).mean).sum::<f64>() / total;
        let second = branches
            .iter()
            .map(|b| b.0 * (pick(b).variance + pick(b).mean * pick(b).mean))
            .sum::<f64>()
            / total;
        PointerMoments { mean, variance: second - mean * mean, weight: total }
    };
    Ok((probabilities, vec![average(|b| b.1), average(|b| b.2)]))
}

/// Teleportation baseline on qubits.
///
/// Alice couples to `|φ⟩`, a Bell measurement on (1, 2) is resolved over all
/// four outcomes, qubit 3 is corrected, and Bob couples to it. Pointer
/// moments are averaged over outcomes with their probabilities, so nothing
/// is discarded and both weak values are plain expectations.
pub fn run_teleportation_sequential(cfg: &ProtocolConfig) -> Result<RunReport> {
    let start = Instant::now();
    cfg.validate()?;
    if cfg.dim() != 2 {
        return Err(Error::Dimension(format!("teleportation needs a qubit, got dimension {}", cfg.dim())));
    }
    let alice = CouplingSpec::new(cfg.obs_a.clone(), 0, 0, cfg.gamma_a)?;
    // after the Bell measurement only qubit 3 is left, at index 0
    let bob = CouplingSpec::new(cfg.obs_b.clone(), 0, 1, cfg.gamma_b)?;

    let (branch_probabilities, moments) = simulate(cfg, cfg.representation.primary(), &alice, &bob)?;
    let ps_probability = moments[0].weight;
    let pointers: Vec<PointerReport> = [(&alice, cfg.delta_a), (&bob, cfg.delta_b)]
        .iter()
        .enumerate()
        .map(|(i, (spec, delta))| {
            let expectation = spec.observable.expectation(cfg.phi.amps());
            PointerReport::new(&party_label(i), spec, *delta, moments[i], C64::new(expectation, 0.0), expectation)
        })
        .collect();
    let cross_check = match cfg.representation {
        RepresentationChoice::Both => {
            let (_, m) = simulate(cfg, Representation::Grid, &alice, &bob)?;
            Some(CrossCheck::new(ps_probability, &pointers, m[0].weight, &m))
        }
        _ => None,
    };
    Ok(RunReport {
        scheme: Scheme::Sequential,
        layout: cfg.layout,
        representation: cfg.representation,
        ps_probability,
        branch_probabilities: Some(branch_probabilities),
        pointers,
        cross_check,
        config: cfg.echo(),
        wall_time: start.elapsed(),
    })
}
