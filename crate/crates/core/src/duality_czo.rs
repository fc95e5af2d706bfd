//! The coefficient pairing `L_g(f)`, empirical duality constants,
//! convolution Calderón–Zygmund operators given by Fourier multipliers,
//! their standard-kernel constants, the CMO boundedness experiment and the
//! scale-window partial sums.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{smooth_step, ExponentFunction, Grid, Signal};
use crate::littlewood_paley::{apply_multiplier, KernelFamily, Which};
use crate::phi_transform::{analyze_with, DenseOperators};
use crate::rng;
use crate::space_norms::{cmo_norm, hardy_norm, require_mean_zero, CmoForm};

/// `L_g(f) = Σ_Q ⟨f, φ_Q⟩ conj⟨g, ψ_Q⟩`. For an exactly tiling family this
/// is `⟨f_band, g⟩`.
pub fn pairing(f: &Signal, g: &Signal, fam: &KernelFamily) -> Result<Complex64> {
    require_mean_zero(f, "pairing")?;
    require_mean_zero(g, "pairing")?;
    let a = analyze_with(f, fam, Which::Analysis)?;
    let b = analyze_with(g, fam, Which::Synthesis)?;
    Ok(a.pairing(&b))
}

/// [`pairing`] evaluated with the dense matrices.
pub fn dense_pairing(ops: &DenseOperators, f: &Signal, g: &Signal) -> Complex64 {
    let fv = nalgebra::DVector::from_column_slice(f.values());
    let gv = nalgebra::DVector::from_column_slice(g.values());
    let a = &ops.analysis * fv;
    // ⟨g, ψ_Q⟩ = (1/N) Σ g conj(ψ_Q)
    let b = ops.synthesis.adjoint() * gv / Complex64::new(f.len() as f64, 0.0);
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub trials_used: usize,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// No usable pair survived degenerate filtering.
    pub insufficient: bool,
}

fn require_p_plus_at_most_one(p: &ExponentFunction) -> Result<()> {
    if p.p_plus() > 1.0 {
        return Err(Error::Precondition(format!(
            "duality needs 0 < p⁻ ≤ p⁺ ≤ 1, got p⁺ = {}",
            p.p_plus()
        )));
    }
    Ok(())
}

/// `max |L_g(f)| / (‖f‖_H ‖g‖_CMO)` over seeded pairs; trial `t` uses stream `(seed, t)`.
pub fn duality_constant(p: &ExponentFunction, fam: &KernelFamily, trials: usize, seed: u64) -> Result<DualityReport> {
    require_p_plus_at_most_one(p)?;
    if trials == 0 {
        return Err(Error::Precondition("at least one trial is required".into()));
    }
    let rows: Vec<Option<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Option<f64>> {
            let mut r = rng::stream(seed, t);
            let f = rng::mixed_band_signal(fam, &mut r, t)?;
            // rotate from f towards an independent signal, so aligned pairs are sampled too
            let h = rng::mixed_band_signal(fam, &mut r, t + 1)?;
            let theta = std::f64::consts::FRAC_PI_2 * r.random::<f64>();
            let g = f.scaled(Complex64::new(theta.cos(), 0.0)).add(&h.scaled(Complex64::new(theta.sin(), 0.0)));
            let den = hardy_norm(&f, p, fam)? * cmo_norm(&g, p, fam, CmoForm::Integral)?;
            let num = pairing(&f, &g, fam)?.norm();
            Ok((den > 0.0).then(|| num / den))
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DualityReport {
        trials_used: ratios.len(),
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        insufficient: ratios.is_empty(),
        ratios,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CzoKind {
    /// `−i sign(ξ) θ(|ξ|)` with a smooth ramp at low frequencies and a smooth roll-off before Nyquist.
    HilbertSmooth,
    /// `−i sign(ξ)` with `m(0) = m(N/2) = 0`; not smooth, used as a negative control.
    HilbertSharp,
    /// Multiplier values indexed by FFT bin.
    Custom(Vec<[f64; 2]>),
}

impl CzoKind {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "hilbert_smooth" => Ok(CzoKind::HilbertSmooth),
            "hilbert_sharp" => Ok(CzoKind::HilbertSharp),
            other => Err(Error::Config(format!(
                "unsupported operator kind {other:?} (hilbert_smooth, hilbert_sharp, or a custom multiplier)"
            ))),
        }
    }
}

/// Convolution operator `T f = Σ_ξ m(ξ) f̂(ξ) e^{2πiξx}` with `m(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierOperator {
    grid: Grid,
    multiplier: Vec<Complex64>,
    gamma: f64,
    kernel: Signal,
}

impl MultiplierOperator {
    pub fn new(grid: Grid, multiplier: Vec<Complex64>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Precondition(format!("γ must lie in (0, 1], got {gamma}")));
        }
        if multiplier.len() != grid.size() {
            return Err(Error::Precondition(format!(
                "multiplier has {} entries, grid has {}",
                multiplier.len(),
                grid.size()
            )));
        }
        if multiplier[0] != Complex64::new(0.0, 0.0) {
            return Err(Error::Precondition("multiplier must vanish at frequency 0".into()));
        }
        if multiplier.iter().any(|m| !m.re.is_finite() || !m.im.is_finite()) {
            return Err(Error::Numeric("multiplier has non-finite entries".into()));
        }
        let kernel = Signal::new(grid, fft::inverse(&multiplier))?;
        Ok(MultiplierOperator { grid, multiplier, gamma, kernel })
    }

    pub fn zero(grid: Grid) -> Self {
        Self::new(grid, vec![Complex64::new(0.0, 0.0); grid.size()], 1.0).expect("valid")
    }

    /// `m ≡ 1` on the family's covered frequencies.
    pub fn band_identity(fam: &KernelFamily, gamma: f64) -> Result<Self> {
        let m = fam.band_projector().into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        Self::new(fam.grid(), m, gamma)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn multiplier(&self) -> &[Complex64] {
        &self.multiplier
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Spatial kernel `k(x) = Σ m(ξ) e^{2πiξx}`; `T f = ∫ k(x − y) f(y) dy`.
    pub fn kernel(&self) -> &Signal {
        &self.kernel
    }

    /// `sup |m|`, the L² operator norm.
    pub fn l2_norm(&self) -> f64 {
        self.multiplier.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        let m = self.multiplier.iter().map(|v| v.conj()).collect();
        Self::new(self.grid, m, self.gamma).expect("conjugate keeps invariants")
    }
}

pub fn build_multiplier_czo(grid: Grid, kind: &CzoKind, gamma: f64) -> Result<MultiplierOperator> {
    let n = grid.size();
    let m: Vec<Complex64> = match kind {
        CzoKind::HilbertSmooth => {
            let low = (n as f64 / 16.0).min(4.0);
            let eighth = n as f64 / 8.0;
            (0..n)
                .map(|b| {
                    let xi = fft::frequency(b, n);
                    let a = xi.unsigned_abs() as f64;
                    let theta = smooth_step(a / low) * (1.0 - smooth_step((a - eighth) / eighth));
                    Complex64::new(0.0, -(xi.signum() as f64) * theta)
                })
                .collect()
        }
        CzoKind::HilbertSharp => (0..n)
            .map(|b| {
                let xi = fft::frequency(b, n);
                if b == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -(xi.signum() as f64))
                }
            })
            .collect(),
        CzoKind::Custom(values) => values.iter().map(|v| Complex64::new(v[0], v[1])).collect(),
    };
    MultiplierOperator::new(grid, m, gamma)
}

/// `T f`.
pub fn apply(op: &MultiplierOperator, f: &Signal) -> Result<Signal> {
    if f.grid() != op.grid {
        return Err(Error::Precondition("signal and operator grids differ".into()));
    }
    Ok(apply_multiplier(f, &op.multiplier))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardKernelReport {
    /// `max_{x≠0} |x| |k(x)|`.
    pub c_size: f64,
    /// `max |k(x) − k(x − y')| |x|^{1+γ} / |y'|^γ` over grid pairs with `|x| ≥ 2|y'| > 0`.
    pub c_smooth: f64,
    pub l2_norm: f64,
}

pub fn standard_kernel_report(op: &MultiplierOperator) -> StandardKernelReport {
    let grid = op.grid;
    let n = grid.size();
    let k = op.kernel.values();
    let gamma = op.gamma;
    let c_size = (1..n).map(|i| grid.distance(i, 0) * k[i].norm()).fold(0.0, f64::max);
    let c_smooth = (1..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.distance(i, 0);
            let mut best = 0.0f64;
            let max_r = (x * n as f64 / 2.0).floor() as usize;
            for r in 1..=max_r {
                let y = r as f64 / n as f64;
                for j in [(i + n - r) % n, (i + r) % n] {
                    let d = (k[i] - k[j]).norm();
                    best = best.max(d * x.powf(1.0 + gamma) / y.powf(gamma));
                }
            }
            best
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    StandardKernelReport {
        c_size,
        c_smooth,
        l2_norm: op.l2_norm(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CzoCmoReport {
    pub trials_used: usize,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// `max |⟨T g, f⟩ − ⟨g, T* f⟩| / (‖g‖₂ ‖f‖₂)`.
    pub adjoint_error: f64,
}

/// `max ‖T g‖_CMO / ‖g‖_CMO` over seeded synthesized heavy-tailed `g`.
pub fn czo_cmo_experiment(
    op: &MultiplierOperator,
    p: &ExponentFunction,
    fam: &KernelFamily,
    trials: usize,
    seed: u64,
) -> Result<CzoCmoReport> {
    let lower = 1.0 / (1.0 + op.gamma);
    if p.p_minus() <= lower {
        return Err(Error::Precondition(format!(
            "needs p⁻ > 1/(1+γ) = {lower}, got p⁻ = {}",
            p.p_minus()
        )));
    }
    if p.p_plus() > 1.0 {
        return Err(Error::Precondition(format!("needs p⁺ ≤ 1, got p⁺ = {}", p.p_plus())));
    }
    if trials == 0 {
        return Err(Error::Precondition("at least one trial is required".into()));
    }
    let adj = op.adjoint();
    let rows: Vec<(Option<f64>, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<(Option<f64>, f64)> {
            let mut r = rng::stream(seed, t);
            let g = rng::heavy_band_signal(fam, &mut r)?;
            let f = rng::band_noise(fam, &mut r);
            let tg = apply(op, &g)?;
            let lhs = tg.inner(&f);
            let rhs = g.inner(&apply(&adj, &f)?);
            let scale = (g.l2_norm() * f.l2_norm()).max(f64::MIN_POSITIVE);
            let den = cmo_norm(&g, p, fam, CmoForm::Integral)?;
            let ratio = (den > 0.0)
                .then(|| cmo_norm(&tg, p, fam, CmoForm::Integral).map(|v| v / den))
                .transpose()?;
            Ok((ratio, (lhs - rhs).norm() / scale))
        })
        .collect::<Result<_>>()?;
    let adjoint_error = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let ratios: Vec<f64> = rows.into_iter().filter_map(|r| r.0).collect();
    Ok(CzoCmoReport {
        trials_used: ratios.len(),
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        ratios,
        adjoint_error,
    })
}

/// Center of the scale window used by [`partial_sum`].
pub fn partial_sum_center(fam: &KernelFamily) -> u32 {
    (fam.j_min() + fam.j_max()) / 2
}

/// Smallest window size for which [`partial_sum`] keeps every scale.
pub fn partial_sum_full(fam: &KernelFamily) -> u32 {
    let c = partial_sum_center(fam);
    (c - fam.j_min()).max(fam.j_max() - c) + 1
}

/// `f_m = Σ_{|j − j_c| < m} ψ_j * φ̃_j * f`; `m = 0` gives zero, `m ≥` [`partial_sum_full`] the band projection.
pub fn partial_sum(f: &Signal, fam: &KernelFamily, m: u32) -> Result<Signal> {
    if f.grid() != fam.grid() {
        return Err(Error::Precondition("signal and family grids differ".into()));
    }
    let n = f.len();
    let c = partial_sum_center(fam);
    let mut mult = vec![Complex64::new(0.0, 0.0); n];
    for j in fam.scales().filter(|&j| j.abs_diff(c) < m) {
        for ((acc, a), s) in mult.iter_mut().zip(fam.analysis_hat(j)?).zip(fam.synthesis_hat(j)?) {
            *acc += Complex64::new(a * s, 0.0);
        }
    }
    Ok(apply_multiplier(f, &mult))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::WindowKind;
    use crate::phi_transform::dense_operators;

    fn grid(j: u32) -> Grid {
        Grid::new(j).unwrap()
    }

    #[test]
    fn pairing_matches_inner_product_and_dense_oracle() {
        let g = grid(6);
        let fam = KernelFamily::standard(g, 1, 4, WindowKind::MeyerSmooth).unwrap();
        let dense = dense_operators(g, &fam).unwrap();
        for t in 0..4 {
            let f = rng::band_noise(&fam, &mut rng::stream(11, t));
            let h = rng::white_noise(g, &mut rng::stream(12, t));
            let h = h.sub(&Signal::constant(g, h.mean()));
            let l = pairing(&f, &h, &fam).unwrap();
            assert!((l - f.inner(&h)).norm() < 1e-12);
            assert!((l - dense_pairing(&dense, &f, &h)).norm() < 1e-12);
        }
        let f = rng::band_noise(&fam, &mut rng::stream(1, 0));
        assert!((pairing(&f, &f, &fam).unwrap().re - 1.0).abs() < 1e-12);
        let sharp = KernelFamily::standard(g, 1, 5, WindowKind::ShannonSharp).unwrap();
        let low = Signal::tone(g, 1);
        let high = Signal::tone(g, 20);
        assert!(pairing(&low, &high, &sharp).unwrap().norm() < 1e-12);
        assert!(pairing(&Signal::constant(g, Complex64::new(1.0, 0.0)), &high, &sharp).is_err());
    }

    #[test]
    fn duality_needs_small_exponents() {
        let g = grid(6);
        let fam = KernelFamily::standard(g, 1, 4, WindowKind::MeyerSmooth).unwrap();
        let p = ExponentFunction::constant(g, 1.3).unwrap();
        assert!(matches!(duality_constant(&p, &fam, 3, 1), Err(Error::Precondition(_))));
        let p = ExponentFunction::constant(g, 1.0).unwrap();
        let r = duality_constant(&p, &fam, 4, 3).unwrap();
        assert_eq!(r.trials_used, 4);
        assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0);
        assert_eq!(r, duality_constant(&p, &fam, 4, 3).unwrap());
    }

    #[test]
    fn multiplier_basics() {
        let g = grid(8);
        let op = build_multiplier_czo(g, &CzoKind::HilbertSmooth, 1.0).unwrap();
        let c = apply(&op, &Signal::constant(g, Complex64::new(3.5, 0.0))).unwrap();
        assert!(c.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        let t = apply(&op, &Signal::tone(g, 5)).unwrap();
        let expect = Signal::tone(g, 5).scaled(op.multiplier()[5]);
        assert!(t.sub(&expect).max_abs() < 1e-13);
        let f = rng::white_noise(g, &mut rng::stream(2, 0));
        assert!(apply(&op, &f).unwrap().l2_norm() <= op.l2_norm() * f.l2_norm() * (1.0 + 1e-12));
        assert!(CzoKind::from_name("riesz").is_err());
        assert!(build_multiplier_czo(g, &CzoKind::HilbertSmooth, 0.0).is_err());
        let bad = CzoKind::Custom(vec![[1.0, 0.0]; 256]);
        assert!(build_multiplier_czo(g, &bad, 1.0).is_err());
    }

    #[test]
    fn apply_matches_circulant_matrix() {
        let g = grid(6);
        let op = build_multiplier_czo(g, &CzoKind::HilbertSmooth, 1.0).unwrap();
        let f = rng::white_noise(g, &mut rng::stream(5, 0));
        let k = op.kernel().values();
        let n = 64;
        let direct: Vec<Complex64> = (0..n)
            .map(|i| (0..n).map(|y| k[(i + n - y) % n] * f.values()[y]).sum::<Complex64>() / n as f64)
            .collect();
        let fast = apply(&op, &f).unwrap();
        for (a, b) in fast.values().iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_identity() {
        let g = grid(7);
        let op = build_multiplier_czo(g, &CzoKind::HilbertSmooth, 0.5).unwrap();
        let adj = op.adjoint();
        for t in 0..10 {
            let f = rng::white_noise(g, &mut rng::stream(6, t));
            let h = rng::white_noise(g, &mut rng::stream(7, t)).scaled(Complex64::new(0.3, 0.8));
            let lhs = apply(&op, &f).unwrap().inner(&h);
            let rhs = f.inner(&apply(&adj, &h).unwrap());
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn kernel_constants() {
        let z = standard_kernel_report(&MultiplierOperator::zero(grid(6)));
        assert_eq!((z.c_size, z.c_smooth), (0.0, 0.0));
        let mut smooth = Vec::new();
        for j in [7, 8, 9] {
            let op = build_multiplier_czo(grid(j), &CzoKind::HilbertSmooth, 1.0).unwrap();
            smooth.push(standard_kernel_report(&op));
        }
        for w in smooth.windows(2) {
            assert!(w[1].c_size / w[0].c_size < 2.0 && w[1].c_size / w[0].c_size > 0.5);
            assert!(w[1].c_smooth / w[0].c_smooth < 2.0 && w[1].c_smooth / w[0].c_smooth > 0.5);
        }
    }

    #[test]
    fn experiment_checks_hypotheses() {
        let g = grid(7);
        let fam = KernelFamily::standard(g, 1, 5, WindowKind::MeyerSmooth).unwrap();
        let op = build_multiplier_czo(g, &CzoKind::HilbertSmooth, 1.0).unwrap();
        let low = ExponentFunction::constant(g, 0.5).unwrap();
        assert!(czo_cmo_experiment(&op, &low, &fam, 2, 1).is_err());
        let p = ExponentFunction::constant(g, 0.9).unwrap();
        let r = czo_cmo_experiment(&MultiplierOperator::zero(g), &p, &fam, 3, 1).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        let id = MultiplierOperator::band_identity(&fam, 1.0).unwrap();
        let r = czo_cmo_experiment(&id, &p, &fam, 3, 1).unwrap();
        assert!((r.max_ratio - 1.0).abs() < 1e-9);
        let r = czo_cmo_experiment(&op, &p, &fam, 3, 1).unwrap();
        assert!(r.max_ratio.is_finite() && r.adjoint_error < 1e-10);
    }

    #[test]
    fn partial_sums() {
        let g = grid(8);
        let fam = KernelFamily::standard(g, 1, 6, WindowKind::MeyerSmooth).unwrap();
        let f = rng::white_noise(g, &mut rng::stream(3, 0));
        assert_eq!(partial_sum(&f, &fam, 0).unwrap().max_abs(), 0.0);
        let full = partial_sum(&f, &fam, partial_sum_full(&fam)).unwrap();
        assert!(full.sub(&fam.project(&f)).max_abs() < 1e-12);
        let h = rng::band_noise(&fam, &mut rng::stream(3, 1));
        let mut last = f64::INFINITY;
        for m in 0..=partial_sum_full(&fam) {
            let e = f.sub(&partial_sum(&f, &fam, m).unwrap()).inner(&h).norm();
            assert!(e <= last + 1e-12);
            last = e;
        }
        assert!(last < 1e-12);
    }
}
