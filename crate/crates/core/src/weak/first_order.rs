use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pointer::{momentum_moments, GridPointerState, COVERAGE_SIGMAS};
use crate::tensor::{apply_embedded, inner_product, project_onto, tensor_product, StateVector};
use crate::weak::{CouplingSpec, GridJoint, JointState, MIN_OVERLAP};

/// First-order approximation of the post-selected state.
///
/// With `R₀ = ⟨χ|Φ⟩` (contracted into `targets`) and `R_X = ⟨χ|X|Φ⟩`, the
/// weak value is `X_w = ⟨R₀|R_X⟩/⟨R₀|R₀⟩` and `R_X⊥ = R_X − X_w R₀` is the
/// part of `R_X` orthogonal to `R₀`. The result is
///
/// ```text
/// R₀ ⊗_p e^{-iγ_p X_w,p q_p}|m_p⟩  −  i Σ_c γ_c R_Xc⊥ ⊗ q_{p_c} |m⟩
/// ```
///
/// on the remaining discrete subsystems and the pointer grids, in the same
/// layout as an exact grid post-selection so the two can be subtracted.
/// Pointers without a coupling stay in `|m_p⟩`.
pub fn first_order_postselected(
    discrete: &StateVector,
    pointers: &[GridPointerState],
    couplings: &[CouplingSpec],
    targets: &[usize],
    chi: &StateVector,
) -> Result<JointState> {
    let mut used = vec![false; pointers.len()];
    for c in couplings {
        if c.pointer >= pointers.len() {
            return Err(Error::IndexOutOfRange { index: c.pointer, count: pointers.len() });
        }
        if std::mem::replace(&mut used[c.pointer], true) {
            return Err(Error::ShapeMismatch(format!("pointer {} coupled twice", c.pointer)));
        }
    }

    let (r0, p0) = project_onto(discrete, targets, chi)?;
    if p0.sqrt() <= MIN_OVERLAP {
        return Err(Error::VanishingOverlap { overlap: p0.sqrt() });
    }

    let base: Vec<Vec<C64>> = pointers
        .iter()
        .map(|ps| {
            let h = ps.grid().spacing().sqrt();
            ps.samples().iter().map(|s| s * h).collect()
        })
        .collect();
    let mut leading = base.clone();
    let mut corrections = Vec::with_capacity(couplings.len());
    for c in couplings {
        let x_phi = apply_embedded(discrete, c.observable.matrix(), &[c.target])?;
        let (rx, _) = project_onto(&x_phi, targets, chi)?;
        let xw = inner_product(&r0, &rx)? / p0;
        let perp = rx.sub(&r0.scale(xw))?;

        let positions = pointers[c.pointer].grid().positions();
        leading[c.pointer] = base[c.pointer]
            .iter()
            .zip(&positions)
            .map(|(m, &q)| m * (C64::new(0.0, -c.gamma * q) * xw).exp())
            .collect();
        let q_m: Vec<C64> = base[c.pointer].iter().zip(&positions).map(|(m, &q)| m * q).collect();
        let mut factors = base.clone();
        factors[c.pointer] = q_m;
        corrections.push((perp.scale(C64::new(0.0, -c.gamma)), factors));
    }

    let assemble = |head: &StateVector, factors: &[Vec<C64>]| -> Result<StateVector> {
        factors.iter().try_fold(head.clone(), |acc, f| {
            tensor_product(&acc, &StateVector::new(vec![f.len()], f.clone())?)
        })
    };
    let mut total = assemble(&r0, &leading)?;
    for (head, factors) in &corrections {
        let term = assemble(head, factors)?;
        total = total.sub(&term.scale(C64::new(-1.0, 0.0)))?;
    }

    let spread = pointers
        .iter()
        .map(|ps| momentum_moments(ps).map(|(m, v)| m.abs() + COVERAGE_SIGMAS * v.sqrt()))
        .collect::<Result<Vec<_>>>()?;
    Ok(JointState::Grid(GridJoint::from_tensor(
        r0.dims().to_vec(),
        pointers.iter().map(|p| *p.grid()).collect(),
        spread,
        total,
    )))
}
