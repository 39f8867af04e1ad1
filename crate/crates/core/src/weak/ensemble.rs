//! Exact representation of coupled qudit/pointer states as finite sums of
//! momentum-shifted Gaussians.
//!
//! A term `(c, d, s)` stands for `c |d⟩ ⊗_p G_{s_p}` where
//! `G_s(q) = e^{-isq} G(q)` and `G` is the centered Gaussian of width `Δ_p`.
//! Everything needed downstream follows from two closed forms:
//!
//! ```text
//! ⟨G_c|G_c'⟩   = exp(-(c - c')² Δ² / 2)
//! ⟨G_c|p|G_c'⟩ = -((c + c')/2) ⟨G_c|G_c'⟩
//! ⟨G_c|p²|G_c'⟩ = (((c + c')/2)² + 1/(4Δ²)) ⟨G_c|G_c'⟩
//! ```

use indexmap::IndexMap;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pointer::{GridPointerState, PointerGrid};
use crate::tensor::{
    eigh, front_order, strides, HermitianObservable, Matrix, StateVector,
    DEFAULT_AMPLITUDE_BUDGET,
};
use crate::weak::PointerMoments;

/// Totals below this are treated as an empty state.
pub const MIN_WEIGHT: f64 = 1e-14;

/// One shifted-Gaussian product term.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleTerm {
    pub coefficient: C64,
    pub discrete_index: usize,
    pub shifts: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedGaussianEnsemble {
    discrete_dims: Vec<usize>,
    widths: Vec<f64>,
    terms: Vec<EnsembleTerm>,
}

type TermKey = (usize, Vec<u64>);

/// Adds up terms sharing a basis index and shift vector. Insertion order is
/// kept so that results are reproducible run to run.
fn merge(terms: impl IntoIterator<Item = EnsembleTerm>) -> Result<Vec<EnsembleTerm>> {
    let mut map: IndexMap<TermKey, C64> = IndexMap::new();
    for t in terms {
        let key = (t.discrete_index, t.shifts.iter().map(|s| (s + 0.0).to_bits()).collect());
        *map.entry(key).or_insert(C64::new(0.0, 0.0)) += t.coefficient;
    }
    if map.len() > DEFAULT_AMPLITUDE_BUDGET {
        return Err(Error::Capacity { requested: map.len(), budget: DEFAULT_AMPLITUDE_BUDGET });
    }
    Ok(map
        .into_iter()
        .filter(|(_, c)| *c != C64::new(0.0, 0.0))
        .map(|((discrete_index, bits), coefficient)| EnsembleTerm {
            coefficient,
            discrete_index,
            shifts: bits.into_iter().map(f64::from_bits).collect(),
        })
        .collect())
}

/// `⟨G_c|G_c'⟩` for a Gaussian of width `delta`.
pub fn gaussian_overlap(c: f64, c_prime: f64, delta: f64) -> f64 {
    let d = c - c_prime;
    (-0.5 * d * d * delta * delta).exp()
}

/// `⟨G_c|p|G_c'⟩`.
pub fn gaussian_momentum_element(c: f64, c_prime: f64, delta: f64) -> f64 {
    -0.5 * (c + c_prime) * gaussian_overlap(c, c_prime, delta)
}

/// `⟨G_c|p²|G_c'⟩`.
pub fn gaussian_momentum_sq_element(c: f64, c_prime: f64, delta: f64) -> f64 {
    let m = 0.5 * (c + c_prime);
    (m * m + 0.25 / (delta * delta)) * gaussian_overlap(c, c_prime, delta)
}

impl ShiftedGaussianEnsemble {
    /// `|discrete⟩ ⊗_p G` with unshifted pointers of the given widths.
    pub fn new(discrete: &StateVector, widths: &[f64]) -> Result<Self> {
        if let Some(&w) = widths.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Dimension(format!("pointer width must be positive, got {w}")));
        }
        let terms = discrete
            .amps()
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != C64::new(0.0, 0.0))
            .map(|(i, &a)| EnsembleTerm {
                coefficient: a,
                discrete_index: i,
                shifts: vec![0.0; widths.len()],
            })
            .collect();
        Ok(ShiftedGaussianEnsemble {
            discrete_dims: discrete.dims().to_vec(),
            widths: widths.to_vec(),
            terms,
        })
    }

    pub fn discrete_dims(&self) -> &[usize] {
        &self.discrete_dims
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn terms(&self) -> &[EnsembleTerm] {
        &self.terms
    }

    pub fn num_pointers(&self) -> usize {
        self.widths.len()
    }

    fn with_terms(&self, discrete_dims: Vec<usize>, terms: Vec<EnsembleTerm>) -> Self {
        ShiftedGaussianEnsemble { discrete_dims, widths: self.widths.clone(), terms }
    }

    fn check_pointer(&self, pointer: usize) -> Result<()> {
        if pointer >= self.widths.len() {
            return Err(Error::IndexOutOfRange { index: pointer, count: self.widths.len() });
        }
        Ok(())
    }

    /// Applies `exp(-iγ X ⊗ q_pointer)` with `X` on discrete subsystem `target`.
    ///
    /// Each term splits along the spectral projectors of `X`; the projector
    /// for eigenvalue `λ` adds `γλ` to the pointer's shift.
    pub fn apply_coupling(
        &self,
        observable: &HermitianObservable,
        target: usize,
        pointer: usize,
        gamma: f64,
    ) -> Result<Self> {
        self.check_pointer(pointer)?;
        front_order(self.discrete_dims.len(), &[target])?;
        let n = self.discrete_dims[target];
        if observable.dim() != n {
            return Err(Error::ShapeMismatch(format!(
                "{n}-level subsystem measured with a {}-level observable",
                observable.dim()
            )));
        }
        let stride = strides(&self.discrete_dims)[target];
        let projectors = observable.spectral_projectors();
        let mut out = Vec::with_capacity(self.terms.len() * projectors.len() * n);
        for term in &self.terms {
            let j = (term.discrete_index / stride) % n;
            let base = term.discrete_index - j * stride;
            for (lambda, proj) in &projectors {
                let mut shifts = term.shifts.clone();
                shifts[pointer] += gamma * lambda;
                for l in 0..n {
                    let m = proj[(l, j)];
                    if m == C64::new(0.0, 0.0) {
                        continue;
                    }
                    out.push(EnsembleTerm {
                        coefficient: term.coefficient * m,
                        discrete_index: base + l * stride,
                        shifts: shifts.clone(),
                    });
                }
            }
        }
        Ok(self.with_terms(self.discrete_dims.clone(), merge(out)?))
    }

    /// Applies a matrix to the discrete subsystems `targets`.
    pub fn apply_discrete(&self, op: &Matrix, targets: &[usize]) -> Result<Self> {
        front_order(self.discrete_dims.len(), targets)?;
        let d: usize = targets.iter().map(|&t| self.discrete_dims[t]).product();
        if op.dim() != d || targets.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} operator on targets {targets:?}",
                op.dim(),
                op.dim()
            )));
        }
        let st = strides(&self.discrete_dims);
        let mut out = Vec::new();
        for term in &self.terms {
            let (j, base) = split_index(term.discrete_index, targets, &self.discrete_dims, &st);
            for l in 0..d {
                let m = op[(l, j)];
                if m == C64::new(0.0, 0.0) {
                    continue;
                }
                out.push(EnsembleTerm {
                    coefficient: term.coefficient * m,
                    discrete_index: base + join_offset(l, targets, &self.discrete_dims, &st),
                    shifts: term.shifts.clone(),
                });
            }
        }
        Ok(self.with_terms(self.discrete_dims.clone(), merge(out)?))
    }

    /// Contracts `⟨chi|` into the discrete subsystems `targets`, leaving the
    /// pointers untouched. Returns the unnormalized ensemble and its weight.
    pub fn postselect(&self, targets: &[usize], chi: &StateVector) -> Result<(Self, f64)> {
        let order = front_order(self.discrete_dims.len(), targets)?;
        let target_dims: Vec<usize> = targets.iter().map(|&t| self.discrete_dims[t]).collect();
        if chi.dims() != target_dims.as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "projector dims {:?} do not match target dims {target_dims:?}",
                chi.dims()
            )));
        }
        if (chi.norm_sqr() - 1.0).abs() > crate::tensor::NORM_TOL {
            return Err(Error::ShapeMismatch("projection target is not normalized".into()));
        }
        let st = strides(&self.discrete_dims);
        let rest: Vec<usize> = order[targets.len()..].to_vec();
        let rest_dims: Vec<usize> = rest.iter().map(|&a| self.discrete_dims[a]).collect();
        let rest_strides = strides(&rest_dims);
        let mut out = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let (j, _) = split_index(term.discrete_index, targets, &self.discrete_dims, &st);
            let c = chi.amps()[j].conj();
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let idx = rest
                .iter()
                .zip(&rest_strides)
                .map(|(&a, &s)| ((term.discrete_index / st[a]) % self.discrete_dims[a]) * s)
                .sum();
            out.push(EnsembleTerm {
                coefficient: term.coefficient * c,
                discrete_index: idx,
                shifts: term.shifts.clone(),
            });
        }
        let projected = self.with_terms(rest_dims, merge(out)?);
        let weight = projected.weight();
        Ok((projected, weight))
    }

    /// Terms grouped by discrete basis index; only same-index pairs overlap.
    fn groups(&self) -> IndexMap<usize, Vec<&EnsembleTerm>> {
        let mut g: IndexMap<usize, Vec<&EnsembleTerm>> = IndexMap::new();
        for t in &self.terms {
            g.entry(t.discrete_index).or_default().push(t);
        }
        g
    }

    fn pair_overlap(&self, a: &EnsembleTerm, b: &EnsembleTerm, skip: Option<usize>) -> f64 {
        let mut o = 1.0;
        for (p, &w) in self.widths.iter().enumerate() {
            if Some(p) != skip {
                o *= gaussian_overlap(a.shifts[p], b.shifts[p], w);
            }
        }
        o
    }

    /// Sums `Σ_{t,t'} Re(c̄_t c_t') f(t, t')` over pairs sharing a basis index.
    fn pair_sum(&self, f: impl Fn(&EnsembleTerm, &EnsembleTerm) -> f64) -> f64 {
        let mut total = 0.0;
        for group in self.groups().values() {
            for (i, a) in group.iter().enumerate() {
                total += a.coefficient.norm_sqr() * f(a, a);
                for b in &group[i + 1..] {
                    total += 2.0 * (a.coefficient.conj() * b.coefficient).re * f(a, b);
                }
            }
        }
        total
    }

    /// Squared norm of the full state.
    pub fn weight(&self) -> f64 {
        self.pair_sum(|a, b| self.pair_overlap(a, b, None))
    }

    /// Closed-form momentum mean, variance and total weight for one pointer.
    pub fn analytic_moments(&self, pointer: usize) -> Result<PointerMoments> {
        self.check_pointer(pointer)?;
        let delta = self.widths[pointer];
        let weight = self.weight();
        if weight < MIN_WEIGHT {
            return Err(Error::ZeroWeight { weight });
        }
        let s1 = self.pair_sum(|a, b| {
            self.pair_overlap(a, b, Some(pointer))
                * gaussian_momentum_element(a.shifts[pointer], b.shifts[pointer], delta)
        });
        let s2 = self.pair_sum(|a, b| {
            self.pair_overlap(a, b, Some(pointer))
                * gaussian_momentum_sq_element(a.shifts[pointer], b.shifts[pointer], delta)
        });
        let mean = s1 / weight;
        Ok(PointerMoments { mean, variance: (s2 / weight - mean * mean).max(0.0), weight })
    }

    /// `‖self − other‖` for ensembles on the same spaces.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.discrete_dims != other.discrete_dims || self.widths != other.widths {
            return Err(Error::ShapeMismatch("ensembles live on different spaces".into()));
        }
        let negated = other.terms.iter().map(|t| EnsembleTerm {
            coefficient: -t.coefficient,
            ..t.clone()
        });
        let diff = self.with_terms(
            self.discrete_dims.clone(),
            merge(self.terms.iter().cloned().chain(negated))?,
        );
        Ok(diff.weight().max(0.0).sqrt())
    }

    /// Trace distance between the normalized two-pointer reduced state and
    /// the product of its marginals.
    ///
    /// Works in the finite non-orthogonal basis spanned by the distinct
    /// shifted Gaussians of each pointer. With coefficient matrix `D` and Gram
    /// matrix `S`, the trace norm is `Σ |eig(S^{1/2} D S^{1/2})|`.
    pub fn pointer_product_deviation(&self) -> Result<f64> {
        if self.widths.len() != 2 {
            return Err(Error::PointerCount { expected: 2, found: self.widths.len() });
        }
        let mut basis: [IndexMap<u64, f64>; 2] = [IndexMap::new(), IndexMap::new()];
        for t in &self.terms {
            for (p, b) in basis.iter_mut().enumerate() {
                let s = t.shifts[p] + 0.0;
                b.entry(s.to_bits()).or_insert(s);
            }
        }
        let (ma, mb) = (basis[0].len(), basis[1].len());
        let m = ma * mb;
        if m == 0 {
            return Err(Error::ZeroWeight { weight: 0.0 });
        }
        let gram = |p: usize| {
            let shifts: Vec<f64> = basis[p].values().copied().collect();
            let mut s = Matrix::zeros(shifts.len());
            for (i, &x) in shifts.iter().enumerate() {
                for (k, &y) in shifts.iter().enumerate() {
                    s[(i, k)] = C64::new(gaussian_overlap(x, y, self.widths[p]), 0.0);
                }
            }
            s
        };
        let (sa, sb) = (gram(0), gram(1));

        // R = Σ_d x_d x_d†, x_d indexed by (a-shift, b-shift)
        let mut r = Matrix::zeros(m);
        for group in self.groups().values() {
            let mut x = vec![C64::new(0.0, 0.0); m];
            for t in group {
                let i = basis[0].get_index_of(&(t.shifts[0] + 0.0).to_bits()).unwrap();
                let j = basis[1].get_index_of(&(t.shifts[1] + 0.0).to_bits()).unwrap();
                x[i * mb + j] += t.coefficient;
            }
            r = r.add(&Matrix::outer(&x, &x)?);
        }

        let mut weight = C64::new(0.0, 0.0);
        let mut ra = Matrix::zeros(ma);
        let mut rb = Matrix::zeros(mb);
        for i in 0..ma {
            for j in 0..mb {
                for k in 0..ma {
                    for l in 0..mb {
                        let v = r[(i * mb + j, k * mb + l)];
                        weight += v * sa[(k, i)] * sb[(l, j)];
                        ra[(i, k)] += v * sb[(l, j)];
                        rb[(j, l)] += v * sa[(k, i)];
                    }
                }
            }
        }
        let w = weight.re;
        if w < MIN_WEIGHT {
            return Err(Error::ZeroWeight { weight: w });
        }
        let inv = C64::new(1.0 / w, 0.0);
        let d = r.scale(inv).sub(&ra.scale(inv).kron(&rb.scale(inv)));
        let root = psd_sqrt(&sa.kron(&sb))?;
        let core = &(&root * &d) * &root;
        let core = core.add(&core.adjoint()).scale(C64::new(0.5, 0.0));
        let trace_norm: f64 = eigh(&core)?.values().iter().map(|v| v.abs()).sum();
        Ok((0.5 * trace_norm).clamp(0.0, 1.0))
    }

    /// Samples the ensemble onto pointer grids, giving the amplitudes of the
    /// equivalent grid tensor (discrete axes first, each pointer sample
    /// scaled by `√h`).
    pub fn sample_on(&self, grids: &[PointerGrid]) -> Result<StateVector> {
        if grids.len() != self.widths.len() {
            return Err(Error::PointerCount { expected: self.widths.len(), found: grids.len() });
        }
        let mut dims = self.discrete_dims.clone();
        dims.extend(grids.iter().map(|g| g.n()));
        let total: usize = dims.iter().product();
        if total > DEFAULT_AMPLITUDE_BUDGET {
            return Err(Error::Capacity { requested: total, budget: DEFAULT_AMPLITUDE_BUDGET });
        }
        let bases: Vec<GridPointerState> = grids
            .iter()
            .zip(&self.widths)
            .map(|(g, &w)| crate::pointer::gaussian_pointer(g, w))
            .collect::<Result<_>>()?;
        let pointer_len: usize = grids.iter().map(|g| g.n()).product();
        let mut amps = vec![C64::new(0.0, 0.0); total];
        for t in &self.terms {
            let factors: Vec<Vec<C64>> = bases
                .iter()
                .zip(&t.shifts)
                .map(|(b, &s)| {
                    let h = b.grid().spacing().sqrt();
                    b.grid()
                        .positions()
                        .iter()
                        .zip(b.samples())
                        .map(|(&q, &g)| g * C64::from_polar(h, -s * q))
                        .collect()
                })
                .collect();
            let block = &mut amps[t.discrete_index * pointer_len..(t.discrete_index + 1) * pointer_len];
            let mut product = vec![t.coefficient];
            for f in &factors {
                product = product.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
            }
            for (dst, v) in block.iter_mut().zip(product) {
                *dst += v;
            }
        }
        StateVector::new(dims, amps)
    }
}

/// Splits a flat index into the joint index over `targets` (row-major in
/// the given order) and the flat index with target digits zeroed.
fn split_index(idx: usize, targets: &[usize], dims: &[usize], st: &[usize]) -> (usize, usize) {
    let mut joint = 0;
    let mut base = idx;
    for &t in targets {
        let digit = (idx / st[t]) % dims[t];
        joint = joint * dims[t] + digit;
        base -= digit * st[t];
    }
    (joint, base)
}

/// Inverse of the joint part of [`split_index`].
fn join_offset(mut joint: usize, targets: &[usize], dims: &[usize], st: &[usize]) -> usize {
    let mut off = 0;
    for &t in targets.iter().rev() {
        off += (joint % dims[t]) * st[t];
        joint /= dims[t];
    }
    off
}

/// Principal square root of a positive semidefinite Hermitian matrix;
/// slightly negative eigenvalues from rounding are clamped to zero.
fn psd_sqrt(s: &Matrix) -> Result<Matrix> {
    let e = eigh(s)?;
    let n = s.dim();
    let mut scaled = e.vectors().clone();
    for j in 0..n {
        let r = e.values()[j].max(0.0).sqrt();
        for i in 0..n {
            scaled[(i, j)] *= r;
        }
    }
    Ok(&scaled * &e.vectors().adjoint())
}
