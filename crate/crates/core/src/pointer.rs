//! Continuous pointer registers sampled on a uniform grid.
//!
//! Fourier convention: `ψ̃(p) = (2π)^(-1/2) ∫ e^{-ipq} ψ(q) dq` with
//! `[q, p] = i`. Under it, multiplying by `e^{-icq}` moves `⟨p⟩` by `-c`.
//!
//! Samples are stored as physical wave-function values `ψ(q_k)`; the norm is
//! `Σ |ψ_k|² h`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Number of Gaussian standard deviations a grid must cover on each side.
pub const COVERAGE_SIGMAS: f64 = 8.0;

/// Maximum boundary-to-peak ratio of the sampled probability density.
pub const LEAKAGE_TOL: f64 = 1e-12;

/// Weakness ratios above this are reported as outside the weak regime.
pub const WEAKNESS_WARN: f64 = 0.1;

pub const DEFAULT_GRID_N: usize = 512;
pub const DEFAULT_GRID_HALF_WIDTH: f64 = 16.0;

/// Uniform grid `q_k = -L + k h`, `h = 2L/n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointerGrid {
    n: usize,
    half_width: f64,
}

impl PointerGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Dimension(format!("grid half-width must be positive, got {half_width}")));
        }
        Ok(PointerGrid { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn position(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.position(k)).collect()
    }

    /// Largest representable momentum, `π/h`.
    pub fn bandwidth(&self) -> f64 {
        PI / self.spacing()
    }

    /// Momenta in FFT output order.
    pub fn momenta(&self) -> Vec<f64> {
        let dp = 2.0 * PI / (self.n as f64 * self.spacing());
        (0..self.n)
            .map(|k| {
                let m = if k < self.n / 2 { k as f64 } else { k as f64 - self.n as f64 };
                m * dp
            })
            .collect()
    }
}

impl Default for PointerGrid {
    fn default() -> Self {
        PointerGrid { n: DEFAULT_GRID_N, half_width: DEFAULT_GRID_HALF_WIDTH }
    }
}

/// A pointer wave function sampled on a [`PointerGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridPointerState {
    grid: PointerGrid,
    samples: Vec<C64>,
}

impl GridPointerState {
    pub fn new(grid: PointerGrid, samples: Vec<C64>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::ShapeMismatch(format!(
                "{} samples on a grid of {}",
                samples.len(),
                grid.n()
            )));
        }
        Ok(GridPointerState { grid, samples })
    }

    pub fn grid(&self) -> &PointerGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// `Σ |ψ_k|² h`.
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// Ratio of the larger boundary density to the peak density.
    pub fn leakage(&self) -> f64 {
        leakage_ratio(&self.samples, 1)
    }
}

/// Boundary-to-peak density ratio for a tensor whose last axis is a pointer
/// grid of `n = data.len() / slices` samples, taken over all slices.
pub(crate) fn leakage_ratio(data: &[C64], slices: usize) -> f64 {
    let n = data.len() / slices;
    let peak = data.iter().fold(0.0f64, |m, s| m.max(s.norm_sqr()));
    if peak == 0.0 {
        return 0.0;
    }
    let edge = data
        .chunks(n)
        .fold(0.0f64, |m, c| m.max(c[0].norm_sqr()).max(c[n - 1].norm_sqr()));
    edge / peak
}

/// Minimum-uncertainty Gaussian `(2πΔ²)^(-1/4) exp(-q²/(4Δ²))`, so that
/// `Var(q) = Δ²` and `Var(p) = 1/(4Δ²)`.
pub fn gaussian_pointer(grid: &PointerGrid, delta: f64) -> Result<GridPointerState> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Dimension(format!("pointer width must be positive, got {delta}")));
    }
    let required = COVERAGE_SIGMAS * delta;
    if grid.half_width() < required {
        return Err(Error::GridTooSmall { half_width: grid.half_width(), required });
    }
    let norm = (2.0 * PI * delta * delta).powf(-0.25);
    let samples = grid
        .positions()
        .into_iter()
        .map(|q| C64::new(norm * (-q * q / (4.0 * delta * delta)).exp(), 0.0))
        .collect();
    GridPointerState::new(*grid, samples)
}

/// Multiplies the samples by `e^{-icq}`.
pub fn apply_position_phase(ps: &GridPointerState, c: f64) -> Result<GridPointerState> {
    let (mean, var) = momentum_moments(ps)?;
    let required = c.abs() + mean.abs() + COVERAGE_SIGMAS * var.sqrt();
    let available = ps.grid.bandwidth();
    if required > available {
        return Err(Error::Bandwidth { required, available });
    }
    let samples = ps
        .grid
        .positions()
        .iter()
        .zip(&ps.samples)
        .map(|(&q, &s)| s * C64::from_polar(1.0, -c * q))
        .collect();
    Ok(GridPointerState { grid: ps.grid, samples })
}

/// Spectral momentum sums over one or many pointer slices.
pub(crate) struct MomentumSpectrum {
    fft: Arc<dyn Fft<f64>>,
    momenta: Vec<f64>,
}

impl MomentumSpectrum {
    pub(crate) fn new(grid: &PointerGrid) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(grid.n());
        MomentumSpectrum { fft, momenta: grid.momenta() }
    }

    /// Returns `(Σ w, Σ p w, Σ p² w)` with `w_m = |FFT(slice)_m|² / n`, summed
    /// over consecutive slices of length `n`. By Parseval `Σ w` equals
    /// `Σ |slice_k|²`.
    pub(crate) fn sums(&self, data: &[C64]) -> [f64; 3] {
        let n = self.momenta.len();
        let mut buf = data.to_vec();
        self.fft.process(&mut buf);
        let mut acc = [0.0; 3];
        for chunk in buf.chunks(n) {
            for (f, &p) in chunk.iter().zip(&self.momenta) {
                let w = f.norm_sqr() / n as f64;
                acc[0] += w;
                acc[1] += p * w;
                acc[2] += p * p * w;
            }
        }
        acc
    }
}

/// Turns raw sums into `(mean, variance)`.
pub(crate) fn moments_from_sums(sums: [f64; 3]) -> Result<(f64, f64)> {
    let [w, s1, s2] = sums;
    if w <= 0.0 {
        return Err(Error::ZeroWeight { weight: w });
    }
    let mean = s1 / w;
    Ok((mean, (s2 / w - mean * mean).max(0.0)))
}

/// Mean and variance of `|ψ̃(p)|²`.
pub fn momentum_moments(ps: &GridPointerState) -> Result<(f64, f64)> {
    let ratio = ps.leakage();
    if ratio > LEAKAGE_TOL {
        return Err(Error::Leakage { ratio });
    }
    moments_from_sums(MomentumSpectrum::new(&ps.grid).sums(&ps.samples))
}

/// Mean and variance of `|ψ(q)|²` under trapezoidal weights.
pub fn position_moments(ps: &GridPointerState) -> (f64, f64) {
    let n = ps.grid.n();
    let (mut w, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (k, s) in ps.samples.iter().enumerate() {
        let q = ps.grid.position(k);
        let weight = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        let d = weight * s.norm_sqr();
        w += d;
        s1 += q * d;
        s2 += q * q * d;
    }
    let mean = s1 / w;
    (mean, (s2 / w - mean * mean).max(0.0))
}

/// `γ·ρ(X)·2Δ`: the largest momentum kick relative to the pointer's momentum
/// spread `1/(2Δ)`.
pub fn weakness_ratio(gamma: f64, spectral_radius: f64, delta: f64) -> f64 {
    gamma.abs() * spectral_radius * 2.0 * delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_gaussian(delta: f64) -> GridPointerState {
        gaussian_pointer(&PointerGrid::default(), delta).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(PointerGrid::new(500, 16.0).is_err());
        assert!(PointerGrid::new(8, 16.0).is_err());
        assert!(PointerGrid::new(64, 0.0).is_err());
        let g = PointerGrid::new(512, 16.0).unwrap();
        assert_eq!(g.spacing(), 1.0 / 16.0);
        assert_eq!(g.position(0), -16.0);
        assert!((g.bandwidth() - 16.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn unit_gaussian_moments() {
        let g = default_gaussian(1.0);
        assert!((g.norm_sqr() - 1.0).abs() < 1e-10);
        let (qm, qv) = position_moments(&g);
        assert!(qm.abs() < 1e-12);
        assert!((qv - 1.0).abs() < 1e-8);
        let (pm, pv) = momentum_moments(&g).unwrap();
        assert!(pm.abs() < 1e-10);
        assert!((pv - 0.25).abs() < 1e-8);
    }

    #[test]
    fn wide_gaussian_position_variance() {
        let g = gaussian_pointer(&PointerGrid::default(), 2.0).unwrap();
        let (m, v) = position_moments(&g);
        assert!(m.abs() < 1e-8);
        assert!((v - 4.0).abs() < 1e-8);
    }

    #[test]
    fn grid_too_small() {
        let g = PointerGrid::new(64, 4.0).unwrap();
        assert!(matches!(gaussian_pointer(&g, 1.0), Err(Error::GridTooSmall { .. })));
        assert!(gaussian_pointer(&g, 0.5).is_ok());
    }

    #[test]
    fn zero_phase_is_identity() {
        let g = default_gaussian(1.0);
        assert_eq!(apply_position_phase(&g, 0.0).unwrap(), g);
    }

    #[test]
    fn phase_shifts_momentum_down() {
        let g = default_gaussian(1.0);
        let shifted = apply_position_phase(&g, 0.3).unwrap();
        let (m, v) = momentum_moments(&shifted).unwrap();
        assert!((m + 0.3).abs() < 1e-8, "{m}");
        assert!((v - 0.25).abs() < 1e-8);
        assert!((shifted.norm_sqr() - g.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_superposition_has_zero_mean() {
        let g = default_gaussian(1.0);
        let plus = apply_position_phase(&g, 1.0).unwrap();
        let minus = apply_position_phase(&g, -1.0).unwrap();
        let samples =
            plus.samples().iter().zip(minus.samples()).map(|(a, b)| (a + b) * 0.5).collect();
        let sup = GridPointerState::new(*g.grid(), samples).unwrap();
        let (m, _) = momentum_moments(&sup).unwrap();
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn bandwidth_exceeded() {
        let g = default_gaussian(1.0);
        let err = apply_position_phase(&g, 49.0).unwrap_err();
        assert!(matches!(err, Error::Bandwidth { .. }));
    }

    #[test]
    fn leakage_detected() {
        let grid = PointerGrid::new(64, 8.0).unwrap();
        let flat = GridPointerState::new(grid, vec![C64::new(0.25, 0.0); 64]).unwrap();
        assert!(matches!(momentum_moments(&flat), Err(Error::Leakage { .. })));
    }

    #[test]
    fn translation_by_one_step() {
        let g = default_gaussian(1.0);
        let mut samples = g.samples().to_vec();
        samples.rotate_right(1);
        let moved = GridPointerState::new(*g.grid(), samples).unwrap();
        let (m0, _) = position_moments(&g);
        let (m1, _) = position_moments(&moved);
        assert!((m1 - m0 - g.grid().spacing()).abs() < 1e-12);
    }

    #[test]
    fn refinement_converged() {
        let coarse = gaussian_pointer(&PointerGrid::new(512, 16.0).unwrap(), 1.0).unwrap();
        let fine = gaussian_pointer(&PointerGrid::new(1024, 16.0).unwrap(), 1.0).unwrap();
        for c in [0.0, 0.3, -1.2] {
            let a = apply_position_phase(&coarse, c).unwrap();
            let b = apply_position_phase(&fine, c).unwrap();
            let (am, av) = momentum_moments(&a).unwrap();
            let (bm, bv) = momentum_moments(&b).unwrap();
            assert!((am - bm).abs() <= 1e-10 && (av - bv).abs() <= 1e-10);
            let (aq, aqv) = position_moments(&a);
            let (bq, bqv) = position_moments(&b);
            assert!((aq - bq).abs() <= 1e-10 && (aqv - bqv).abs() <= 1e-10);
        }
    }

    #[test]
    fn weakness_ratio_definition() {
        assert!((weakness_ratio(1e-3, 1.0, 1.0) - 2e-3).abs() < 1e-18);
        assert!(weakness_ratio(-0.1, 2.0, 1.0) > WEAKNESS_WARN);
    }

    proptest! {
        #[test]
        fn parseval(c in -5.0f64..5.0, delta in 0.5f64..2.0) {
            let g = apply_position_phase(&default_gaussian(delta), c).unwrap();
            let [w, _, _] = MomentumSpectrum::new(g.grid()).sums(g.samples());
            prop_assert!((w * g.grid().spacing() - g.norm_sqr()).abs() < 1e-10);
        }

        #[test]
        fn phases_compose(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
            let g = default_gaussian(1.0);
            let two = apply_position_phase(&apply_position_phase(&g, c1).unwrap(), c2).unwrap();
            let one = apply_position_phase(&g, c1 + c2).unwrap();
            for (a, b) in two.samples().iter().zip(one.samples()) {
                prop_assert!((a - b).norm() < 1e-13);
            }
        }

        #[test]
        fn momentum_shift_law(c0 in -3.0f64..3.0, c in -3.0f64..3.0, delta in 0.5f64..2.0) {
            let base = apply_position_phase(&default_gaussian(delta), c0).unwrap();
            let (m0, v0) = momentum_moments(&base).unwrap();
            let (m1, v1) = momentum_moments(&apply_position_phase(&base, c).unwrap()).unwrap();
            prop_assert!((m1 - (m0 - c)).abs() < 1e-8);
            prop_assert!((v1 - v0).abs() < 1e-8);
        }

        #[test]
        fn position_variance_ignores_phase(c in -5.0f64..5.0) {
            let g = default_gaussian(1.0);
            let (_, v0) = position_moments(&g);
            let (_, v1) = position_moments(&apply_position_phase(&g, c).unwrap());
            prop_assert!((v0 - v1).abs() < 1e-12);
        }
    }
}
