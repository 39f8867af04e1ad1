use std::borrow::Cow;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::matrix::{DensityOperator, Matrix};

/// Default cap on the number of complex amplitudes in one tensor.
pub const DEFAULT_AMPLITUDE_BUDGET: usize = 1 << 26;

/// Tolerance for calling a state normalized.
pub const NORM_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Amplitudes over an ordered list of subsystems.
///
/// Layout is row-major with the leftmost subsystem varying slowest. An empty
/// `dims` list is a scalar (one amplitude), which is what a projection onto
/// every subsystem leaves behind.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<C64>,
    normalized: bool,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::Dimension(format!("subsystem dimension {d} is below 2")));
        }
        let len = checked_len(&dims)?;
        if amps.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes for dims {dims:?} (expected {len})",
                amps.len()
            )));
        }
        if !amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::ShapeMismatch("non-finite amplitude".into()));
        }
        Ok(Self::from_parts(dims, amps))
    }

    pub(crate) fn from_parts(dims: Vec<usize>, amps: Vec<C64>) -> Self {
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        StateVector { dims, amps, normalized: (norm_sqr - 1.0).abs() <= NORM_TOL }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let len = checked_len(&dims)?;
        if index >= len {
            return Err(Error::IndexOutOfRange { index, count: len });
        }
        let mut amps = vec![ZERO; len];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    pub fn scalar(value: C64) -> Self {
        Self::from_parts(Vec::new(), vec![value])
    }

    /// Single qudit from its amplitudes.
    pub fn qudit(amps: Vec<C64>) -> Result<Self> {
        Self::new(vec![amps.len()], amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroWeight { weight: 0.0 });
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_parts(self.dims.clone(), self.amps.iter().map(|a| a * s).collect())
    }

    /// `self − other`, same shape required.
    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        let amps = self.amps.iter().zip(&other.amps).map(|(a, b)| a - b).collect();
        Ok(Self::from_parts(self.dims.clone(), amps))
    }

    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        tensor_product_with_budget(self, other, DEFAULT_AMPLITUDE_BUDGET)
    }
}

fn checked_len(dims: &[usize]) -> Result<usize> {
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).ok_or(Error::Capacity {
        requested: usize::MAX,
        budget: DEFAULT_AMPLITUDE_BUDGET,
    })
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Reorders tensor axes so that new axis `i` is old axis `order[i]`.
pub(crate) fn permute_axes(amps: &[C64], dims: &[usize], order: &[usize]) -> Vec<C64> {
    debug_assert_eq!(order.len(), dims.len());
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return amps.to_vec();
    }
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&a| dims[a]).collect();
    let step: Vec<usize> = order.iter().map(|&a| old_strides[a]).collect();
    let mut out = Vec::with_capacity(amps.len());
    let mut counter = vec![0usize; order.len()];
    let mut src = 0usize;
    for _ in 0..amps.len() {
        out.push(amps[src]);
        for ax in (0..counter.len()).rev() {
            counter[ax] += 1;
            src += step[ax];
            if counter[ax] < new_dims[ax] {
                break;
            }
            src -= step[ax] * new_dims[ax];
            counter[ax] = 0;
        }
    }
    out
}

fn inverse_permutation(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (i, &o) in order.iter().enumerate() {
        inv[o] = i;
    }
    inv
}

/// Checks that `targets` are distinct and in range; returns
/// `targets ++ complement` as an axis order.
pub(crate) fn front_order(num: usize, targets: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; num];
    for &t in targets {
        if t >= num {
            return Err(Error::IndexOutOfRange { index: t, count: num });
        }
        if seen[t] {
            return Err(Error::ShapeMismatch(format!("subsystem {t} listed twice")));
        }
        seen[t] = true;
    }
    let mut order = targets.to_vec();
    order.extend((0..num).filter(|i| !seen[*i]));
    Ok(order)
}

/// Applies `op` (acting on a leading axis of size `d`) to every block of a
/// tensor laid out as `[outer, d, inner]`.
fn apply_block(data: &[C64], outer: usize, d: usize, inner: usize, op: &Matrix) -> Vec<C64> {
    let mut out = vec![ZERO; data.len()];
    for o in 0..outer {
        let base = o * d * inner;
        for i in 0..d {
            let dst = base + i * inner;
            for j in 0..d {
                let m = op[(i, j)];
                if m == ZERO {
                    continue;
                }
                let src = base + j * inner;
                for r in 0..inner {
                    out[dst + r] += m * data[src + r];
                }
            }
        }
    }
    out
}

/// `a ⊗ b` under an explicit amplitude budget.
pub fn tensor_product_with_budget(
    a: &StateVector,
    b: &StateVector,
    budget: usize,
) -> Result<StateVector> {
    let requested = a.len().checked_mul(b.len()).unwrap_or(usize::MAX);
    if requested > budget {
        return Err(Error::Capacity { requested, budget });
    }
    let mut amps = Vec::with_capacity(requested);
    for x in &a.amps {
        amps.extend(b.amps.iter().map(|y| x * y));
    }
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Ok(StateVector::from_parts(dims, amps))
}

/// Kronecker product with the default amplitude budget.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    tensor_product_with_budget(a, b, DEFAULT_AMPLITUDE_BUDGET)
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_phi_plus() -> StateVector {
    max_entangled(2).expect("dimension 2 is valid")
}

/// `Σ_j |j⟩|j⟩ / √n`.
pub fn max_entangled(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::Dimension(format!("maximally entangled state needs n >= 2, got {n}")));
    }
    let amp = C64::new((1.0 / n as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; n * n];
    for j in 0..n {
        amps[j * n + j] = amp;
    }
    StateVector::new(vec![n, n], amps)
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.dims != b.dims {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.dims, b.dims)));
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// Applies `op` to the subsystems `targets` (in the given order) and the
/// identity elsewhere.
pub fn apply_embedded(state: &StateVector, op: &Matrix, targets: &[usize]) -> Result<StateVector> {
    let order = front_order(state.num_subsystems(), targets)?;
    let d: usize = targets.iter().map(|&t| state.dims[t]).product();
    if op.dim() != d || targets.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} operator on targets {targets:?} of dims {:?}",
            op.dim(),
            op.dim(),
            state.dims
        )));
    }
    let amps = if let [t] = *targets {
        let outer: usize = state.dims[..t].iter().product();
        let inner: usize = state.dims[t + 1..].iter().product();
        apply_block(&state.amps, outer, d, inner, op)
    } else {
        let moved = permute_axes(&state.amps, &state.dims, &order);
        let rest = state.len() / d;
        let applied = apply_block(&moved, 1, d, rest, op);
        let moved_dims: Vec<usize> = order.iter().map(|&a| state.dims[a]).collect();
        permute_axes(&applied, &moved_dims, &inverse_permutation(&order))
    };
    Ok(StateVector::from_parts(state.dims.clone(), amps))
}

/// Contracts `⟨chi|` into `targets`, returning the unnormalized residual on
/// the remaining subsystems (original order) and its squared norm.
pub fn project_onto(
    state: &StateVector,
    targets: &[usize],
    chi: &StateVector,
) -> Result<(StateVector, f64)> {
    let order = front_order(state.num_subsystems(), targets)?;
    let target_dims: Vec<usize> = targets.iter().map(|&t| state.dims[t]).collect();
    if chi.dims != target_dims {
        return Err(Error::ShapeMismatch(format!(
            "projector dims {:?} do not match target dims {target_dims:?}",
            chi.dims
        )));
    }
    if (chi.norm_sqr() - 1.0).abs() > NORM_TOL {
        return Err(Error::ShapeMismatch("projection target is not normalized".into()));
    }
    let moved: Cow<[C64]> = if order.iter().enumerate().all(|(i, &o)| i == o) {
        Cow::Borrowed(&state.amps)
    } else {
        Cow::Owned(permute_axes(&state.amps, &state.dims, &order))
    };
    let d = chi.len();
    let rest = state.len() / d;
    let mut residual = vec![ZERO; rest];
    for (j, c) in chi.amps.iter().enumerate() {
        let c = c.conj();
        if c == ZERO {
            continue;
        }
        for (r, out) in residual.iter_mut().enumerate() {
            *out += c * moved[j * rest + r];
        }
    }
    let dims: Vec<usize> = order[targets.len()..].iter().map(|&a| state.dims[a]).collect();
    let residual = StateVector::from_parts(dims, residual);
    let p = residual.norm_sqr();
    Ok((residual, p))
}

/// Reduced density operator on `keep` (in the given order).
pub fn partial_trace(state: &StateVector, keep: &[usize]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::ShapeMismatch("partial trace must keep a subsystem".into()));
    }
    let order = front_order(state.num_subsystems(), keep)?;
    let moved = permute_axes(&state.amps, &state.dims, &order);
    let d: usize = keep.iter().map(|&k| state.dims[k]).product();
    let rest = state.len() / d;
    let mut rho = Matrix::zeros(d);
    for i in 0..d {
        let ri = &moved[i * rest..(i + 1) * rest];
        for j in i..d {
            let rj = &moved[j * rest..(j + 1) * rest];
            let v: C64 = ri.iter().zip(rj).map(|(x, y)| x * y.conj()).sum();
            rho[(i, j)] = v;
            rho[(j, i)] = v.conj();
        }
        rho[(i, i)] = C64::new(rho[(i, i)].re, 0.0);
    }
    Ok(DensityOperator::new(rho, state.norm_sqr()))
}
