//! Von Neumann couplings `exp(-iγ X ⊗ q)` on joint qudit/pointer states.
//!
//! Two representations are provided and each checks the other:
//!
//! - [`Representation::Grid`]: a dense tensor over the discrete subsystems
//!   and one sampled grid per pointer. Independent of any closed form, but
//!   limited by discretization and memory (at most two pointers).
//! - [`Representation::GaussianEnsemble`]: the exact expansion into
//!   momentum-shifted Gaussians, see [`ShiftedGaussianEnsemble`].
//!
//! The coupling strength `γ` is the time integral of the switching profile.
//! Since `X ⊗ q` commutes with itself at all times, the profile enters only
//! through `γ` and no time integration is performed.

mod ensemble;
mod first_order;
mod grid;

pub use ensemble::{
    gaussian_momentum_element, gaussian_momentum_sq_element, gaussian_overlap, EnsembleTerm,
    ShiftedGaussianEnsemble, MIN_WEIGHT,
};
pub use first_order::first_order_postselected;
pub use grid::{GridJoint, MAX_GRID_POINTERS};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pointer::{weakness_ratio, GridPointerState};
use crate::tensor::{apply_embedded, inner_product, project_onto, HermitianObservable, Matrix, StateVector};

/// Smallest `|⟨post|pre⟩|` for which a weak value is defined.
pub const MIN_OVERLAP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Representation {
    #[serde(rename = "grid")]
    Grid,
    #[serde(rename = "gaussian")]
    GaussianEnsemble,
}

impl Representation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Representation::Grid => "grid",
            Representation::GaussianEnsemble => "gaussian",
        }
    }
}

/// One weak coupling: observable on a discrete subsystem, read out by a
/// pointer.
#[derive(Clone, Debug)]
pub struct CouplingSpec {
    pub observable: HermitianObservable,
    pub target: usize,
    pub pointer: usize,
    pub gamma: f64,
}

impl CouplingSpec {
    pub fn new(observable: HermitianObservable, target: usize, pointer: usize, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::Dimension(format!("coupling strength must be finite, got {gamma}")));
        }
        Ok(CouplingSpec { observable, target, pointer, gamma })
    }

    /// See [`weakness_ratio`].
    pub fn weakness_ratio(&self, delta: f64) -> f64 {
        weakness_ratio(self.gamma, self.observable.spectral_radius(), delta)
    }
}

/// Momentum statistics of one pointer in a (possibly unnormalized) joint
/// state. `mean` and `variance` are normalized; `weight` is the squared norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointerMoments {
    pub mean: f64,
    pub variance: f64,
    pub weight: f64,
}

/// Discrete subsystems plus pointer registers, in either representation.
#[derive(Clone, Debug)]
pub enum JointState {
    Grid(GridJoint),
    Ensemble(ShiftedGaussianEnsemble),
}

impl JointState {
    /// Dense product state `|discrete⟩ ⊗ |m_1⟩ ⊗ …` on pointer grids.
    pub fn grid(discrete: &StateVector, pointers: &[GridPointerState]) -> Result<Self> {
        Ok(JointState::Grid(GridJoint::new(discrete, pointers)?))
    }

    /// `|discrete⟩ ⊗ G_1 ⊗ …` with centered Gaussians of the given widths.
    pub fn ensemble(discrete: &StateVector, widths: &[f64]) -> Result<Self> {
        Ok(JointState::Ensemble(ShiftedGaussianEnsemble::new(discrete, widths)?))
    }

    pub fn representation(&self) -> Representation {
        match self {
            JointState::Grid(_) => Representation::Grid,
            JointState::Ensemble(_) => Representation::GaussianEnsemble,
        }
    }

    pub fn discrete_dims(&self) -> &[usize] {
        match self {
            JointState::Grid(g) => g.discrete_dims(),
            JointState::Ensemble(e) => e.discrete_dims(),
        }
    }

    pub fn num_pointers(&self) -> usize {
        match self {
            JointState::Grid(g) => g.num_pointers(),
            JointState::Ensemble(e) => e.num_pointers(),
        }
    }

    /// Squared norm.
    pub fn weight(&self) -> f64 {
        match self {
            JointState::Grid(g) => g.tensor().norm_sqr(),
            JointState::Ensemble(e) => e.weight(),
        }
    }

    pub fn as_grid(&self) -> Option<&GridJoint> {
        match self {
            JointState::Grid(g) => Some(g),
            JointState::Ensemble(_) => None,
        }
    }

    pub fn as_ensemble(&self) -> Option<&ShiftedGaussianEnsemble> {
        match self {
            JointState::Grid(_) => None,
            JointState::Ensemble(e) => Some(e),
        }
    }

    /// Applies one coupling exactly.
    pub fn apply_coupling(&self, spec: &CouplingSpec) -> Result<Self> {
        Ok(match self {
            JointState::Grid(g) => JointState::Grid(g.apply_coupling(spec)?),
            JointState::Ensemble(e) => JointState::Ensemble(e.apply_coupling(
                &spec.observable,
                spec.target,
                spec.pointer,
                spec.gamma,
            )?),
        })
    }

    /// Applies couplings in order.
    pub fn apply_couplings(&self, specs: &[CouplingSpec]) -> Result<Self> {
        specs.iter().try_fold(self.clone(), |s, c| s.apply_coupling(c))
    }

    /// Applies a matrix to discrete subsystems only.
    pub fn apply_discrete(&self, op: &Matrix, targets: &[usize]) -> Result<Self> {
        Ok(match self {
            JointState::Grid(g) => JointState::Grid(g.apply_discrete(op, targets)?),
            JointState::Ensemble(e) => JointState::Ensemble(e.apply_discrete(op, targets)?),
        })
    }

    /// Contracts `⟨chi|` into discrete subsystems `targets`; pointers are
    /// untouched. Returns the unnormalized state and its squared norm.
    pub fn postselect(&self, targets: &[usize], chi: &StateVector) -> Result<(Self, f64)> {
        Ok(match self {
            JointState::Grid(g) => {
                let (g, p) = g.postselect(targets, chi)?;
                (JointState::Grid(g), p)
            }
            JointState::Ensemble(e) => {
                let (e, p) = e.postselect(targets, chi)?;
                (JointState::Ensemble(e), p)
            }
        })
    }

    /// Momentum moments of one pointer: spectral on the grid, closed form in
    /// the ensemble.
    pub fn pointer_moments(&self, pointer: usize) -> Result<PointerMoments> {
        match self {
            JointState::Grid(g) => g.momentum_moments(pointer),
            JointState::Ensemble(e) => e.analytic_moments(pointer),
        }
    }

    /// `‖self − other‖`; both must share representation and shape.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        match (self, other) {
            (JointState::Grid(a), JointState::Grid(b)) => Ok(a.tensor().sub(b.tensor())?.norm()),
            (JointState::Ensemble(a), JointState::Ensemble(b)) => a.distance(b),
            _ => Err(Error::Representation("cannot compare grid and ensemble states".into())),
        }
    }
}

/// Same as [`JointState::postselect`], as a free function.
pub fn postselect_joint(
    js: &JointState,
    targets: &[usize],
    chi: &StateVector,
) -> Result<(JointState, f64)> {
    js.postselect(targets, chi)
}

/// Same as [`JointState::apply_coupling`], as a free function.
pub fn apply_coupling(js: &JointState, spec: &CouplingSpec) -> Result<JointState> {
    js.apply_coupling(spec)
}

/// `⟨post| X_target |pre⟩ / ⟨post|pre⟩`.
pub fn weak_value(
    pre: &StateVector,
    observable: &HermitianObservable,
    target: usize,
    post: &StateVector,
) -> Result<C64> {
    let overlap = inner_product(post, pre)?;
    if overlap.norm() <= MIN_OVERLAP {
        return Err(Error::VanishingOverlap { overlap: overlap.norm() });
    }
    let x_pre = apply_embedded(pre, observable.matrix(), &[target])?;
    Ok(inner_product(post, &x_pre)? / overlap)
}

/// Weak value of `X_target` conditioned on partial post-selections.
///
/// Each `(targets, chi)` contracts `⟨chi|` into the current state, in order,
/// with indices referring to the subsystems left by the previous step. With
/// `R₀` and `R_X` the results for `pre` and `X pre`, the weak value is
/// `⟨R₀|R_X⟩/⟨R₀|R₀⟩`. A full post-selection reduces to [`weak_value`].
pub fn conditional_weak_value(
    pre: &StateVector,
    observable: &HermitianObservable,
    target: usize,
    posts: &[(&[usize], &StateVector)],
) -> Result<C64> {
    let x_pre = apply_embedded(pre, observable.matrix(), &[target])?;
    let contract = |s: &StateVector| {
        posts.iter().try_fold(s.clone(), |acc, (targets, chi)| project_onto(&acc, targets, chi).map(|r| r.0))
    };
    let r0 = contract(pre)?;
    let weight = r0.norm_sqr();
    if weight.sqrt() <= MIN_OVERLAP {
        return Err(Error::VanishingOverlap { overlap: weight.sqrt() });
    }
    Ok(inner_product(&r0, &contract(&x_pre)?)? / weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointer::{gaussian_pointer, PointerGrid};
    use crate::tensor::{bell_phi_plus, tensor_product};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_qubit(rng: &mut ChaCha8Rng) -> StateVector {
        let amps = (0..2).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        StateVector::qudit(amps.collect()).unwrap().normalize().unwrap()
    }

    fn random_observable(rng: &mut ChaCha8Rng) -> HermitianObservable {
        let mut m = Matrix::zeros(2);
        m[(0, 0)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
        m[(1, 1)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        m[(0, 1)] = z;
        m[(1, 0)] = z.conj();
        HermitianObservable::new(m).unwrap()
    }

    fn grid_pointer() -> GridPointerState {
        gaussian_pointer(&PointerGrid::default(), 1.0).unwrap()
    }

    #[test]
    fn weak_value_of_eigenstate() {
        let zero = StateVector::basis(vec![2], 0).unwrap();
        let w = weak_value(&zero, &HermitianObservable::pauli_z(), 0, &zero).unwrap();
        assert_eq!(w, C64::new(1.0, 0.0));
    }

    #[test]
    fn weak_value_plain_expectation() {
        for theta in [0.0, 0.3, 1.1, 2.5] {
            let (s, c) = f64::sin_cos(theta);
            let phi = StateVector::qudit(vec![C64::new(c, 0.0), C64::new(s, 0.0)]).unwrap();
            let w = weak_value(&phi, &HermitianObservable::pauli_z(), 0, &phi).unwrap();
            assert!((w - C64::new((2.0 * theta).cos(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn weak_value_cloning_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let phi = random_qubit(&mut rng);
            let x = random_observable(&mut rng);
            let pre = tensor_product(&phi, &bell_phi_plus()).unwrap();
            let post = tensor_product(&bell_phi_plus(), &phi).unwrap();
            let w = weak_value(&pre, &x, 0, &post).unwrap();
            let expected = x.expectation(phi.amps());
            assert!((w - C64::new(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn conditional_matches_full_postselection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let phi = random_qubit(&mut rng);
            let x = random_observable(&mut rng);
            let pre = tensor_product(&phi, &bell_phi_plus()).unwrap();
            let bell = bell_phi_plus();
            let w = conditional_weak_value(&pre, &x, 0, &[(&[0, 1], &bell)]).unwrap();
            assert!((w - C64::new(x.expectation(phi.amps()), 0.0)).norm() < 1e-12);
            let post = tensor_product(&bell, &phi).unwrap();
            let full = weak_value(&pre, &x, 0, &post).unwrap();
            let cond = conditional_weak_value(&pre, &x, 0, &[(&[0, 1, 2], &post)]).unwrap();
            assert!((full - cond).norm() < 1e-12);
        }
    }

    #[test]
    fn weak_value_vanishing_overlap() {
        let zero = StateVector::basis(vec![2], 0).unwrap();
        let one = StateVector::basis(vec![2], 1).unwrap();
        let err = weak_value(&zero, &HermitianObservable::pauli_x(), 0, &one).unwrap_err();
        assert!(matches!(err, Error::VanishingOverlap { .. }));
    }

    #[test]
    fn zero_strength_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi = random_qubit(&mut rng);
        let spec = CouplingSpec::new(random_observable(&mut rng), 0, 0, 0.0).unwrap();
        let g = JointState::grid(&phi, &[grid_pointer()]).unwrap();
        assert!(g.apply_coupling(&spec).unwrap().distance(&g).unwrap() < 1e-15);
        let e = JointState::ensemble(&phi, &[1.0]).unwrap();
        assert!(e.apply_coupling(&spec).unwrap().distance(&e).unwrap() < 1e-15);
    }

    #[test]
    fn eigenstate_shifts_pointer() {
        let zero = StateVector::basis(vec![2], 0).unwrap();
        let spec = CouplingSpec::new(HermitianObservable::pauli_z(), 0, 0, 0.01).unwrap();
        for js in [
            JointState::grid(&zero, &[grid_pointer()]).unwrap(),
            JointState::ensemble(&zero, &[1.0]).unwrap(),
        ] {
            let m = js.apply_coupling(&spec).unwrap().pointer_moments(0).unwrap();
            assert!((m.mean + 0.01).abs() < 1e-9, "{:?}: {}", js.representation(), m.mean);
        }
    }

    #[test]
    fn couplings_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let phi = random_qubit(&mut rng);
            let big = tensor_product(&phi, &bell_phi_plus()).unwrap();
            let specs = [
                CouplingSpec::new(random_observable(&mut rng), 0, 0, 0.3).unwrap(),
                CouplingSpec::new(random_observable(&mut rng), 2, 1, 0.2).unwrap(),
            ];
            let g = JointState::grid(&big, &[grid_pointer(), grid_pointer()]).unwrap();
            let e = JointState::ensemble(&big, &[1.0, 1.0]).unwrap();
            for js in [g, e] {
                let out = js.apply_couplings(&specs).unwrap();
                assert!((out.weight() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn disjoint_couplings_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = random_qubit(&mut rng);
        let big = tensor_product(&phi, &bell_phi_plus()).unwrap();
        let a = CouplingSpec::new(random_observable(&mut rng), 0, 0, 0.1).unwrap();
        let b = CouplingSpec::new(random_observable(&mut rng), 2, 1, 0.1).unwrap();
        let g = JointState::grid(&big, &[grid_pointer(), grid_pointer()]).unwrap();
        let e = JointState::ensemble(&big, &[1.0, 1.0]).unwrap();
        for js in [g, e] {
            let ab = js.apply_couplings(&[a.clone(), b.clone()]).unwrap();
            let ba = js.apply_couplings(&[b.clone(), a.clone()]).unwrap();
            assert!(ab.distance(&ba).unwrap() < 1e-12);
        }
    }

    #[test]
    fn zero_strength_postselection_quarter() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = random_qubit(&mut rng);
        let big = tensor_product(&phi, &bell_phi_plus()).unwrap();
        let g = JointState::grid(&big, &[grid_pointer(), grid_pointer()]).unwrap();
        let e = JointState::ensemble(&big, &[1.0, 1.0]).unwrap();
        let (_, pe) = postselect_joint(&e, &[0, 1], &bell_phi_plus()).unwrap();
        assert!((pe - 0.25).abs() < 1e-15);
        // grid norm carries summation roundoff over n² samples
        let (res, p) = postselect_joint(&g, &[0, 1], &bell_phi_plus()).unwrap();
        assert!((p - 0.25).abs() < 1e-12, "{p:e}");
        for k in 0..2 {
            let m = res.pointer_moments(k).unwrap();
            assert!(m.mean.abs() < 1e-14 && (m.variance - 0.25).abs() < 1e-10);
        }
    }

    #[test]
    fn bell_outcomes_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bells = [[s, 0.0, 0.0, s], [s, 0.0, 0.0, -s], [0.0, s, s, 0.0], [0.0, s, -s, 0.0]];
        for _ in 0..100 {
            let phi = random_qubit(&mut rng);
            let big = tensor_product(&phi, &bell_phi_plus()).unwrap();
            let specs = [
                CouplingSpec::new(random_observable(&mut rng), 0, 0, 0.2).unwrap(),
                CouplingSpec::new(random_observable(&mut rng), 2, 1, 0.2).unwrap(),
            ];
            let js = JointState::ensemble(&big, &[1.0, 1.0]).unwrap().apply_couplings(&specs).unwrap();
            let mut total = 0.0;
            for b in bells {
                let chi = StateVector::new(vec![2, 2], b.iter().map(|&x| C64::new(x, 0.0)).collect())
                    .unwrap();
                let (_, p) = js.postselect(&[0, 1], &chi).unwrap();
                assert!((-1e-12..=1.0 + 1e-12).contains(&p));
                total += p;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_refuses_three_pointers() {
        let zero = StateVector::basis(vec![2], 0).unwrap();
        let p = grid_pointer();
        let err = JointState::grid(&zero, &[p.clone(), p.clone(), p]).unwrap_err();
        assert!(matches!(err, Error::Representation(_)));
    }

    #[test]
    fn representations_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let phi = random_qubit(&mut rng);
        let big = tensor_product(&phi, &bell_phi_plus()).unwrap();
        let specs = [
            CouplingSpec::new(random_observable(&mut rng), 0, 0, 0.05).unwrap(),
            CouplingSpec::new(random_observable(&mut rng), 2, 1, 0.05).unwrap(),
        ];
        let run = |js: JointState| {
            let (res, p) = js.apply_couplings(&specs).unwrap().postselect(&[0, 1], &bell_phi_plus()).unwrap();
            (p, res.pointer_moments(0).unwrap(), res.pointer_moments(1).unwrap())
        };
        let g = run(JointState::grid(&big, &[grid_pointer(), grid_pointer()]).unwrap());
        let e = run(JointState::ensemble(&big, &[1.0, 1.0]).unwrap());
        assert!((g.0 - e.0).abs() < 1e-8);
        assert!((g.1.mean - e.1.mean).abs() < 1e-8);
        assert!((g.2.mean - e.2.mean).abs() < 1e-8);
        assert!((g.1.variance - e.1.variance).abs() < 1e-8);
    }

    #[test]
    fn grid_bandwidth_guard() {
        let zero = StateVector::basis(vec![2], 0).unwrap();
        let g = JointState::grid(&zero, &[grid_pointer()]).unwrap();
        let spec = CouplingSpec::new(HermitianObservable::pauli_z(), 0, 0, 60.0).unwrap();
        assert!(matches!(g.apply_coupling(&spec), Err(Error::Bandwidth { .. })));
    }
}
