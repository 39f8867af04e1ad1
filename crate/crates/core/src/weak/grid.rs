use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pointer::{
    leakage_ratio, moments_from_sums, momentum_moments, GridPointerState, MomentumSpectrum,
    PointerGrid, COVERAGE_SIGMAS, LEAKAGE_TOL,
};
use crate::tensor::{
    apply_embedded, permute_axes, project_onto, tensor_product, Matrix, StateVector,
};
use crate::weak::{CouplingSpec, PointerMoments};

/// Grids beyond this many pointers exceed the amplitude budget.
pub const MAX_GRID_POINTERS: usize = 2;

/// Dense joint tensor: discrete axes first, then one axis per pointer.
///
/// Pointer samples are stored multiplied by `√h`, so the plain Euclidean
/// norm of the tensor is the physical norm.
#[derive(Clone, Debug)]
pub struct GridJoint {
    discrete_dims: Vec<usize>,
    grids: Vec<PointerGrid>,
    /// `|⟨p⟩| + 8σ_p` of each initial pointer.
    initial_spread: Vec<f64>,
    /// Sum of `|γ|ρ(X)` over couplings applied to each pointer.
    kick_bound: Vec<f64>,
    tensor: StateVector,
}

impl GridJoint {
    pub fn new(discrete: &StateVector, pointers: &[GridPointerState]) -> Result<Self> {
        if pointers.len() > MAX_GRID_POINTERS {
            return Err(Error::Representation(format!(
                "grid representation supports at most {MAX_GRID_POINTERS} pointers, got {}",
                pointers.len()
            )));
        }
        let mut tensor = discrete.clone();
        let mut initial_spread = Vec::with_capacity(pointers.len());
        for ps in pointers {
            let (mean, var) = momentum_moments(ps)?;
            initial_spread.push(mean.abs() + COVERAGE_SIGMAS * var.sqrt());
            let h = ps.grid().spacing().sqrt();
            let scaled: Vec<C64> = ps.samples().iter().map(|s| s * h).collect();
            let factor = StateVector::new(vec![ps.grid().n()], scaled)?;
            tensor = tensor_product(&tensor, &factor)?;
        }
        Ok(GridJoint {
            discrete_dims: discrete.dims().to_vec(),
            grids: pointers.iter().map(|p| *p.grid()).collect(),
            kick_bound: vec![0.0; pointers.len()],
            initial_spread,
            tensor,
        })
    }

    /// Wraps a tensor laid out as discrete axes followed by pointer axes.
    pub(crate) fn from_tensor(
        discrete_dims: Vec<usize>,
        grids: Vec<PointerGrid>,
        initial_spread: Vec<f64>,
        tensor: StateVector,
    ) -> Self {
        debug_assert_eq!(tensor.num_subsystems(), discrete_dims.len() + grids.len());
        let kick_bound = vec![0.0; grids.len()];
        GridJoint { discrete_dims, grids, initial_spread, kick_bound, tensor }
    }

    pub fn discrete_dims(&self) -> &[usize] {
        &self.discrete_dims
    }

    pub fn grids(&self) -> &[PointerGrid] {
        &self.grids
    }

    pub fn num_pointers(&self) -> usize {
        self.grids.len()
    }

    pub fn tensor(&self) -> &StateVector {
        &self.tensor
    }

    fn check_discrete(&self, targets: &[usize]) -> Result<()> {
        let count = self.discrete_dims.len();
        match targets.iter().find(|&&t| t >= count) {
            Some(&index) => Err(Error::IndexOutOfRange { index, count }),
            None => Ok(()),
        }
    }

    fn check_pointer(&self, pointer: usize) -> Result<()> {
        if pointer >= self.grids.len() {
            return Err(Error::IndexOutOfRange { index: pointer, count: self.grids.len() });
        }
        Ok(())
    }

    pub fn apply_coupling(&self, spec: &CouplingSpec) -> Result<Self> {
        self.check_discrete(&[spec.target])?;
        self.check_pointer(spec.pointer)?;
        let n_target = self.discrete_dims[spec.target];
        if spec.observable.dim() != n_target {
            return Err(Error::ShapeMismatch(format!(
                "{n_target}-level subsystem measured with a {}-level observable",
                spec.observable.dim()
            )));
        }
        let kick = spec.gamma.abs() * spec.observable.spectral_radius();
        let p = spec.pointer;
        let grid = self.grids[p];
        let required = self.initial_spread[p] + self.kick_bound[p] + kick;
        if required > grid.bandwidth() {
            return Err(Error::Bandwidth { required, available: grid.bandwidth() });
        }

        // For pointer sample k the target sees U_k = Σ_λ e^{-iγλq_k} P_λ.
        let d = n_target;
        let n = grid.n();
        let projectors = spec.observable.spectral_projectors();
        let mut unitaries = vec![C64::new(0.0, 0.0); n * d * d];
        for (k, q) in grid.positions().into_iter().enumerate() {
            let u = &mut unitaries[k * d * d..(k + 1) * d * d];
            for (lambda, proj) in &projectors {
                let phase = C64::from_polar(1.0, -spec.gamma * lambda * q);
                for (dst, m) in u.iter_mut().zip(proj.as_slice()) {
                    *dst += phase * m;
                }
            }
        }

        let dims = self.tensor.dims();
        let target_stride: usize = dims[spec.target + 1..].iter().product();
        let pointer_stride: usize = dims[self.discrete_dims.len() + p + 1..].iter().product();
        let src = self.tensor.amps();
        let mut out = vec![C64::new(0.0, 0.0); src.len()];
        for base in (0..src.len()).step_by(target_stride * d) {
            for r in 0..target_stride {
                let k = (r / pointer_stride) % n;
                let u = &unitaries[k * d * d..(k + 1) * d * d];
                let first = base + r;
                for i in 0..d {
                    let row = &u[i * d..(i + 1) * d];
                    out[first + i * target_stride] =
                        row.iter().enumerate().map(|(j, m)| m * src[first + j * target_stride]).sum();
                }
            }
        }
        let mut next = GridJoint {
            discrete_dims: self.discrete_dims.clone(),
            grids: self.grids.clone(),
            initial_spread: self.initial_spread.clone(),
            kick_bound: self.kick_bound.clone(),
            tensor: StateVector::from_parts(dims.to_vec(), out),
        };
        next.kick_bound[p] += kick;
        Ok(next)
    }

    pub fn apply_discrete(&self, op: &Matrix, targets: &[usize]) -> Result<Self> {
        self.check_discrete(targets)?;
        let mut next = self.clone();
        next.tensor = apply_embedded(&self.tensor, op, targets)?;
        Ok(next)
    }

    pub fn postselect(&self, targets: &[usize], chi: &StateVector) -> Result<(Self, f64)> {
        self.check_discrete(targets)?;
        let (tensor, p) = project_onto(&self.tensor, targets, chi)?;
        let discrete_dims = (0..self.discrete_dims.len())
            .filter(|i| !targets.contains(i))
            .map(|i| self.discrete_dims[i])
            .collect();
        let mut next = self.clone();
        next.discrete_dims = discrete_dims;
        next.tensor = tensor;
        Ok((next, p))
    }

    /// Spectral momentum moments of one pointer, traced over everything else.
    pub fn momentum_moments(&self, pointer: usize) -> Result<PointerMoments> {
        self.check_pointer(pointer)?;
        let dims = self.tensor.dims();
        let axis = self.discrete_dims.len() + pointer;
        let mut order: Vec<usize> = (0..dims.len()).filter(|&a| a != axis).collect();
        order.push(axis);
        let moved = permute_axes(self.tensor.amps(), dims, &order);
        let n = self.grids[pointer].n();
        let ratio = leakage_ratio(&moved, moved.len() / n);
        if ratio > LEAKAGE_TOL {
            return Err(Error::Leakage { ratio });
        }
        let sums = MomentumSpectrum::new(&self.grids[pointer]).sums(&moved);
        let (mean, variance) = moments_from_sums(sums)?;
        Ok(PointerMoments { mean, variance, weight: self.tensor.norm_sqr() })
    }
}
