//! Frequency-tiled Littlewood–Paley families on the discrete torus, band
//! convolutions, square functions and the Hardy–Littlewood maximal operator.
//!
//! Scale `j` of a family lives on the annulus `2^{j-1} ≤ |m| ≤ 2^{j+1}` of
//! integer frequencies. The covered set of a family with scales
//! `j_min..=j_max` is `2^{j_min-1} ≤ |m| < 2^{j_max}`, plus the Nyquist
//! frequency when `j_max = J − 1`. On the covered set the multipliers satisfy
//! `Σ_j conj(φ̂_j) ψ̂_j = 1` and `Σ_j |ψ̂_j|² = 1`; off it they vanish.
//!
//! Coefficients of band `j` are sampled on dyadic intervals of scale
//! `j + shift`. Sampling is alias-free when the band's support fits inside
//! the sampling Nyquist range: the sharp family needs `shift ≥ 1`, the
//! smooth family (whose windows overlap an octave on each side) `shift ≥ 2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{build_dyadic_tree, DyadicInterval, ExponentFunction, Grid, ProbePolicy, Signal};
use crate::luxemburg::{norm_of_moduli, DEFAULT_REL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// Raised-cosine windows in `log₂|m|` built on a C^∞ step.
    MeyerSmooth,
    /// Indicators of `2^{j-1} ≤ |m| < 2^j`.
    ShannonSharp,
}

impl WindowKind {
    /// Smallest oversampling shift for which band sampling does not alias.
    pub fn min_alias_free_shift(self) -> u32 {
        match self {
            WindowKind::MeyerSmooth => 2,
            WindowKind::ShannonSharp => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// Kernel `φ̃_j`, i.e. multiplier `conj(φ̂_j)`; used to form `⟨f, φ_Q⟩`.
    Analysis,
    /// Kernel `ψ_j`, multiplier `ψ̂_j`.
    Synthesis,
}

/// Where the discrete square functions freeze band values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lattice {
    /// Intervals of scale `j + shift` for band `j`.
    #[default]
    Shifted,
    /// Every sample is its own interval (scale `J`).
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelFamily {
    grid: Grid,
    j_min: u32,
    j_max: u32,
    shift: u32,
    window: WindowKind,
    analysis_hat: Vec<Vec<f64>>,
    synthesis_hat: Vec<Vec<f64>>,
    covered: Vec<bool>,
}

/// Build a family whose multipliers tile the covered frequencies exactly.
pub fn build_family(
    grid: Grid,
    j_min: u32,
    j_max: u32,
    window: WindowKind,
    shift: u32,
) -> Result<KernelFamily> {
    let big_j = grid.log2_size();
    if j_min < 1 || j_min > j_max || j_max + 1 > big_j {
        return Err(Error::Config(format!(
            "scale range [{j_min}, {j_max}] must satisfy 1 ≤ j_min ≤ j_max ≤ J − 1 = {}",
            big_j.saturating_sub(1)
        )));
    }
    let n = grid.size();
    let covered: Vec<bool> = (0..n)
        .map(|i| {
            let m = fft::frequency(i, n).unsigned_abs();
            let lo = 1u64 << (j_min - 1);
            let hi = 1u64 << j_max;
            (m >= lo && m < hi) || (j_max + 1 == big_j && m == hi)
        })
        .collect();
    if !covered.iter().any(|&c| c) {
        return Err(Error::Config("scale range covers no nonzero frequency".into()));
    }
    let scales = (j_max - j_min + 1) as usize;
    let mut raw = vec![vec![0.0; n]; scales];
    for (i, &cov) in covered.iter().enumerate() {
        if !cov {
            continue;
        }
        let m = fft::frequency(i, n).unsigned_abs() as f64;
        let lm = m.log2();
        for (s, row) in raw.iter_mut().enumerate() {
            let j = j_min + s as u32;
            row[i] = match window {
                WindowKind::MeyerSmooth => {
                    let t = lm - j as f64;
                    if j == j_min && t < 0.0 {
                        1.0
                    } else if t.abs() < 1.0 {
                        meyer_bump(t)
                    } else {
                        0.0
                    }
                }
                WindowKind::ShannonSharp => {
                    let mi = m as u64;
                    let top = j == j_max && mi == 1u64 << j_max;
                    let inside = mi >= 1u64 << (j - 1) && mi < 1u64 << j;
                    if inside || top {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
        }
    }
    // Pointwise normalization: Σ_j b_j² = 1 on the covered set.
    for i in 0..n {
        if !covered[i] {
            continue;
        }
        let total: f64 = raw.iter().map(|row| row[i] * row[i]).sum();
        let norm = total.sqrt();
        for row in raw.iter_mut() {
            row[i] /= norm;
        }
    }
    Ok(KernelFamily {
        grid,
        j_min,
        j_max,
        shift,
        window,
        analysis_hat: raw.clone(),
        synthesis_hat: raw,
        covered,
    })
}

/// `cos(π/2 · ν(|t|))` on `|t| < 1`; adjacent bumps satisfy `b(t)² + b(t−1)² = 1`.
fn meyer_bump(t: f64) -> f64 {
    (std::f64::consts::FRAC_PI_2 * crate::grid::smooth_step(t.abs())).cos()
}

impl KernelFamily {
    /// Family with the window's minimal alias-free shift.
    pub fn standard(grid: Grid, j_min: u32, j_max: u32, window: WindowKind) -> Result<Self> {
        build_family(grid, j_min, j_max, window, window.min_alias_free_shift())
    }

    /// Widest alias-free family on the grid for the given window.
    pub fn full_range(grid: Grid, window: WindowKind) -> Result<Self> {
        let shift = window.min_alias_free_shift();
        let j_max = grid.log2_size().saturating_sub(shift).min(grid.log2_size() - 1);
        Self::standard(grid, 1, j_max, window)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn scales(&self) -> std::ops::RangeInclusive<u32> {
        self.j_min..=self.j_max
    }

    pub fn j_min(&self) -> u32 {
        self.j_min
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn window(&self) -> WindowKind {
        self.window
    }

    pub fn is_alias_free(&self) -> bool {
        self.shift >= self.window.min_alias_free_shift()
            || self.j_min + self.shift >= self.grid.log2_size()
    }

    pub fn covered(&self) -> &[bool] {
        &self.covered
    }

    /// Frequencies (signed) covered by the family.
    pub fn covered_frequencies(&self) -> Vec<i64> {
        let n = self.grid.size();
        (0..n).filter(|&i| self.covered[i]).map(|i| fft::frequency(i, n)).collect()
    }

    fn index(&self, j: u32) -> Result<usize> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::Range(format!(
                "scale {j} outside family range [{}, {}]",
                self.j_min, self.j_max
            )));
        }
        Ok((j - self.j_min) as usize)
    }

    pub fn analysis_hat(&self, j: u32) -> Result<&[f64]> {
        Ok(&self.analysis_hat[self.index(j)?])
    }

    pub fn synthesis_hat(&self, j: u32) -> Result<&[f64]> {
        Ok(&self.synthesis_hat[self.index(j)?])
    }

    /// Multiplier applied by [`conv_scale`].
    pub fn multiplier(&self, j: u32, which: Which) -> Result<Vec<Complex64>> {
        Ok(match which {
            Which::Analysis => self.analysis_hat(j)?.iter().map(|&v| Complex64::new(v, 0.0).conj()).collect(),
            Which::Synthesis => self.synthesis_hat(j)?.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        })
    }

    /// Dyadic scale on which band `j` is sampled.
    pub fn sample_scale(&self, j: u32) -> Result<u32> {
        self.index(j)?;
        let s = j + self.shift;
        if s > self.grid.log2_size() {
            return Err(Error::Range(format!(
                "band {j} with shift {} needs scale {s} > J = {}",
                self.shift,
                self.grid.log2_size()
            )));
        }
        Ok(s)
    }

    pub(crate) fn lattice_scale(&self, j: u32, lattice: Lattice) -> Result<u32> {
        match lattice {
            Lattice::Shifted => self.sample_scale(j),
            Lattice::Full => {
                self.index(j)?;
                Ok(self.grid.log2_size())
            }
        }
    }

    /// All coefficient-bearing intervals, ordered by band then position.
    pub fn coefficient_lattice(&self) -> Result<Vec<DyadicInterval>> {
        let mut out = Vec::new();
        for j in self.scales() {
            let s = self.sample_scale(j)?;
            out.extend(build_dyadic_tree(self.grid, s, s)?);
        }
        Ok(out)
    }

    /// `max_m |Σ_j conj(φ̂_j(m)) ψ̂_j(m) − 1|` over covered `m`.
    pub fn tiling_residual(&self) -> f64 {
        (0..self.grid.size())
            .filter(|&i| self.covered[i])
            .map(|i| {
                let s: f64 = self
                    .analysis_hat
                    .iter()
                    .zip(&self.synthesis_hat)
                    .map(|(a, b)| a[i] * b[i])
                    .sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max_m |Σ_j |ψ̂_j(m)|² − 1|` over covered `m`.
    pub fn energy_residual(&self) -> f64 {
        (0..self.grid.size())
            .filter(|&i| self.covered[i])
            .map(|i| (self.synthesis_hat.iter().map(|r| r[i] * r[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `true` iff every multiplier vanishes outside its annulus `[2^{j-1}, 2^{j+1}]`.
    pub fn support_ok(&self) -> bool {
        let n = self.grid.size();
        self.scales().all(|j| {
            let k = (j - self.j_min) as usize;
            (0..n).all(|i| {
                let m = fft::frequency(i, n).unsigned_abs();
                let inside = m >= 1 << (j - 1) && m <= 1 << (j + 1);
                inside || (self.analysis_hat[k][i] == 0.0 && self.synthesis_hat[k][i] == 0.0)
            })
        })
    }

    /// Core region of band `j` on which the lower bound is asserted: the
    /// middle half `2^{j-1/2} ≤ |m| ≤ 2^{j+1/2}` of the annulus for the smooth
    /// window, the band itself for the sharp window.
    pub fn in_core(&self, j: u32, m: i64) -> bool {
        let a = m.unsigned_abs() as f64;
        if a == 0.0 {
            return false;
        }
        match self.window {
            WindowKind::MeyerSmooth => (a.log2() - j as f64).abs() <= 0.5,
            WindowKind::ShannonSharp => a >= (1u64 << (j - 1)) as f64 && a < (1u64 << j) as f64,
        }
    }

    /// `min |φ̂_j(m)|, |ψ̂_j(m)|` over covered core frequencies of every band.
    pub fn core_lower_bound(&self) -> f64 {
        let n = self.grid.size();
        let mut lo = f64::INFINITY;
        for j in self.scales() {
            let k = (j - self.j_min) as usize;
            for i in 0..n {
                if self.covered[i] && self.in_core(j, fft::frequency(i, n)) {
                    lo = lo.min(self.analysis_hat[k][i].abs()).min(self.synthesis_hat[k][i].abs());
                }
            }
        }
        lo
    }

    /// Multiplier of the covered-band projector.
    pub fn band_projector(&self) -> Vec<f64> {
        self.covered.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect()
    }

    /// Orthogonal projection onto covered frequencies.
    pub fn project(&self, f: &Signal) -> Signal {
        apply_multiplier(f, &self.band_projector().iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>())
    }
}

/// Multiply the spectrum of `f` by `multiplier` (indexed by FFT bin).
pub fn apply_multiplier(f: &Signal, multiplier: &[Complex64]) -> Signal {
    let mut spec = fft::spectrum(f.values());
    for (s, m) in spec.iter_mut().zip(multiplier) {
        *s *= m;
    }
    Signal::new(f.grid(), fft::inverse(&spec)).expect("length preserved")
}

/// `ψ_j * f` (synthesis) or `φ̃_j * f` (analysis) by FFT.
pub fn conv_scale(f: &Signal, fam: &KernelFamily, j: u32, which: Which) -> Result<Signal> {
    if f.grid() != fam.grid {
        return Err(Error::Precondition("signal and family live on different grids".into()));
    }
    Ok(apply_multiplier(f, &fam.multiplier(j, which)?))
}

/// All band convolutions sharing one forward transform.
pub fn band_signals(f: &Signal, fam: &KernelFamily, which: Which) -> Result<Vec<Vec<Complex64>>> {
    if f.grid() != fam.grid {
        return Err(Error::Precondition("signal and family live on different grids".into()));
    }
    let spec = fft::spectrum(f.values());
    fam.scales()
        .map(|j| {
            let mult = fam.multiplier(j, which)?;
            let band: Vec<Complex64> = spec.iter().zip(&mult).map(|(a, b)| a * b).collect();
            Ok(fft::inverse(&band))
        })
        .collect()
}

fn real_signal(grid: Grid, values: Vec<f64>) -> Signal {
    Signal::from_real(grid, &values).expect("grid-sized")
}

/// `G(f) = (Σ_j |ψ_j * f|²)^{1/2}`.
pub fn square_function(f: &Signal, fam: &KernelFamily) -> Result<Signal> {
    let bands = band_signals(f, fam, Which::Synthesis)?;
    let n = f.len();
    let mut acc = vec![0.0; n];
    for band in &bands {
        for (a, v) in acc.iter_mut().zip(band) {
            *a += v.norm_sqr();
        }
    }
    Ok(real_signal(f.grid(), acc.into_iter().map(f64::sqrt).collect()))
}

fn frozen_square_function(
    f: &Signal,
    fam: &KernelFamily,
    which: Which,
    probe: ProbePolicy,
    lattice: Lattice,
) -> Result<Vec<f64>> {
    let bands = band_signals(f, fam, which)?;
    let mut acc = vec![0.0; f.len()];
    for (band, j) in bands.iter().zip(fam.scales()) {
        let s = fam.lattice_scale(j, lattice)?;
        let moduli: Vec<f64> = band.iter().map(|v| v.norm()).collect();
        for q in build_dyadic_tree(fam.grid, s, s)? {
            let v = probe.select(&moduli, &q);
            let v2 = v * v;
            for a in &mut acc[q.sample_range()] {
                *a += v2;
            }
        }
    }
    Ok(acc.into_iter().map(f64::sqrt).collect())
}

/// `G^d(f) = (Σ_j Σ_Q |ψ_j * f(x_Q)|² χ_Q)^{1/2}` with left-endpoint probes on the shifted lattice.
pub fn discrete_square_function(f: &Signal, fam: &KernelFamily) -> Result<Signal> {
    discrete_square_function_with(f, fam, ProbePolicy::Left, Lattice::Shifted)
}

pub fn discrete_square_function_with(
    f: &Signal,
    fam: &KernelFamily,
    probe: ProbePolicy,
    lattice: Lattice,
) -> Result<Signal> {
    Ok(real_signal(f.grid(), frozen_square_function(f, fam, Which::Synthesis, probe, lattice)?))
}

/// `G_φ^d(f)`: per-interval supremum of `|φ_j * f|` before summing over bands.
pub fn maximal_square_function(f: &Signal, fam: &KernelFamily) -> Result<Signal> {
    Ok(real_signal(
        f.grid(),
        frozen_square_function(f, fam, Which::Analysis, ProbePolicy::Sup, Lattice::Shifted)?,
    ))
}

/// Centered Hardy–Littlewood maximal function: at each sample the largest
/// average of `|f|` over the odd-length windows centered there (up to
/// `N − 1` samples) and over the whole torus.
pub fn hl_maximal(f: &Signal) -> Signal {
    let n = f.len();
    let a = f.abs();
    let mut prefix = vec![0.0; 3 * n + 1];
    for i in 0..3 * n {
        prefix[i + 1] = prefix[i] + a[i % n];
    }
    let full = prefix[n] / n as f64;
    let max_radius = (n.saturating_sub(2)) / 2;
    let out: Vec<f64> = (0..n)
        .map(|i| {
            let c = i + n;
            let mut best = full;
            for r in 0..=max_radius {
                let avg = (prefix[c + r + 1] - prefix[c - r]) / (2 * r + 1) as f64;
                best = best.max(avg);
            }
            best
        })
        .collect();
    real_signal(f.grid(), out)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VectorMaximalReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub degenerate: bool,
}

/// `‖‖(M f_i)‖_{ℓ^q}‖_{L^{p(·)}}` against `‖‖(f_i)‖_{ℓ^q}‖_{L^{p(·)}}`.
pub fn vector_maximal_report(fs: &[Signal], p: &ExponentFunction, q: f64) -> Result<VectorMaximalReport> {
    if !(q > 1.0) {
        return Err(Error::Precondition(format!("vector-valued maximal bound needs q > 1, got {q}")));
    }
    let n = p.grid().size();
    let lq = |rows: &[Vec<f64>]| -> Vec<f64> {
        (0..n)
            .map(|i| rows.iter().map(|r| r[i].powf(q)).sum::<f64>().powf(1.0 / q))
            .collect()
    };
    let plain: Vec<Vec<f64>> = fs.iter().map(|f| f.abs()).collect();
    let maxed: Vec<Vec<f64>> = fs.iter().map(|f| hl_maximal(f).re()).collect();
    let rhs = norm_of_moduli(&lq(&plain), p.samples(), DEFAULT_REL_TOL)?;
    let lhs = norm_of_moduli(&lq(&maxed), p.samples(), DEFAULT_REL_TOL)?;
    let degenerate = rhs == 0.0;
    Ok(VectorMaximalReport {
        lhs,
        rhs,
        ratio: if degenerate { 0.0 } else { lhs / rhs },
        degenerate,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityEntry {
    pub j: u32,
    pub j_prime: u32,
    pub constant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityTable {
    pub entries: Vec<OrthogonalityEntry>,
    pub max_constant: f64,
}

impl OrthogonalityTable {
    pub fn get(&self, j: u32, j_prime: u32) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.j == j && e.j_prime == j_prime)
            .map(|e| e.constant)
    }
}

/// Smallest `C(j, j')` with
/// `|ψ_j * φ_{j'}(x)| ≤ C 2^{-|j−j'| L} 2^{j∧j'} / (1 + 2^{j∧j'} |x|)^{1+M}` on the grid.
pub fn almost_orthogonality_table(fam: &KernelFamily, decay_l: u32, decay_m: u32) -> Result<OrthogonalityTable> {
    if decay_l < 1 || decay_m < 1 {
        return Err(Error::Precondition("L and M must be at least 1".into()));
    }
    let grid = fam.grid;
    let mut entries = Vec::new();
    for j in fam.scales() {
        for jp in fam.scales() {
            let a = fam.synthesis_hat(j)?;
            let b = fam.analysis_hat(jp)?;
            let prod: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| Complex64::new(x * y, 0.0)).collect();
            let kernel = fft::inverse(&prod);
            let lo = j.min(jp) as f64;
            let gap = j.abs_diff(jp) as f64;
            let mut c = 0.0f64;
            for (i, k) in kernel.iter().enumerate() {
                let x = grid.distance(i, 0);
                let bound = (-gap * decay_l as f64).exp2() * lo.exp2()
                    / (1.0 + lo.exp2() * x).powi(1 + decay_m as i32);
                c = c.max(k.norm() / bound);
            }
            entries.push(OrthogonalityEntry {
                j,
                j_prime: jp,
                constant: c,
            });
        }
    }
    let max_constant = entries.iter().map(|e| e.constant).fold(0.0, f64::max);
    Ok(OrthogonalityTable { entries, max_constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(j: u32) -> Grid {
        Grid::new(j).unwrap()
    }

    #[test]
    fn shannon_tiles_exactly() {
        let g = grid(8);
        let fam = build_family(g, 1, 7, WindowKind::ShannonSharp, 1).unwrap();
        assert_eq!(fam.tiling_residual(), 0.0);
        let cov = fam.covered_frequencies();
        assert_eq!(cov.len(), 256 - 1);
        assert!(fam.support_ok());
        assert_eq!(fam.core_lower_bound(), 1.0);
    }

    #[test]
    fn meyer_tiles_to_machine_precision() {
        let g = grid(8);
        let fam = build_family(g, 1, 7, WindowKind::MeyerSmooth, 2).unwrap();
        assert!(fam.tiling_residual() <= 1e-12);
        assert!(fam.energy_residual() <= 1e-12);
        assert!(fam.support_ok());
        assert!(fam.core_lower_bound() >= 0.7);
        for j in fam.scales() {
            assert_eq!(fam.synthesis_hat(j).unwrap()[0], 0.0);
            assert_eq!(fam.analysis_hat(j).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn family_rejects_bad_ranges() {
        let g = grid(6);
        assert!(build_family(g, 0, 3, WindowKind::MeyerSmooth, 2).is_err());
        assert!(build_family(g, 2, 6, WindowKind::MeyerSmooth, 2).is_err());
        assert!(build_family(g, 4, 3, WindowKind::MeyerSmooth, 2).is_err());
    }

    #[test]
    fn shift_past_resolution_is_a_range_error() {
        let g = grid(6);
        let fam = build_family(g, 1, 5, WindowKind::MeyerSmooth, 2).unwrap();
        let f = Signal::tone(g, 3);
        assert!(matches!(discrete_square_function(&f, &fam), Err(Error::Range(_))));
        assert!(conv_scale(&f, &fam, 6, Which::Analysis).is_err());
    }

    #[test]
    fn tone_is_an_eigenfunction_and_constants_vanish() {
        let g = grid(8);
        let fam = KernelFamily::standard(g, 1, 6, WindowKind::MeyerSmooth).unwrap();
        let tone = Signal::tone(g, 3);
        for j in fam.scales() {
            let out = conv_scale(&tone, &fam, j, Which::Synthesis).unwrap();
            let expect = tone.scaled(Complex64::new(fam.synthesis_hat(j).unwrap()[3], 0.0));
            assert!(out.sub(&expect).max_abs() < 1e-13);
            let c = conv_scale(&Signal::constant(g, Complex64::new(2.0, 0.0)), &fam, j, Which::Analysis).unwrap();
            assert!(c.max_abs() < 1e-15);
        }
    }

    #[test]
    fn square_function_parseval() {
        let g = grid(8);
        let fam = KernelFamily::standard(g, 1, 6, WindowKind::MeyerSmooth).unwrap();
        let f = fam.project(&Signal::from_real_fn(g, |x| (2.0 * std::f64::consts::PI * 5.0 * x).sin() + (40.0 * x * x).cos()));
        let gf = square_function(&f, &fam).unwrap();
        assert!((gf.l2_norm() - f.l2_norm()).abs() <= 1e-10 * f.l2_norm());
        assert!(square_function(&Signal::constant(g, Complex64::new(1.0, 0.0)), &fam).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn single_band_tone_gives_constant_square_function() {
        let g = grid(8);
        let fam = KernelFamily::standard(g, 1, 7, WindowKind::ShannonSharp).unwrap();
        // |m| = 3 lies only in band 2 for the sharp family.
        let gf = square_function(&Signal::tone(g, 3), &fam).unwrap();
        for v in gf.values() {
            assert!((v.re - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn full_lattice_matches_continuous_square_function() {
        let g = grid(7);
        let fam = KernelFamily::standard(g, 1, 5, WindowKind::MeyerSmooth).unwrap();
        let f = Signal::from_real_fn(g, |x| (13.0 * x).sin() * (3.0 * x).cos() - 0.1);
        let a = discrete_square_function_with(&f, &fam, ProbePolicy::Left, Lattice::Full).unwrap();
        let b = square_function(&f, &fam).unwrap();
        assert!(a.sub(&b).max_abs() < 1e-13);
    }

    #[test]
    fn maximal_dominates_discrete() {
        let g = grid(8);
        let fam = KernelFamily::standard(g, 1, 6, WindowKind::MeyerSmooth).unwrap();
        let f = Signal::from_real_fn(g, |x| (31.0 * x * x).sin());
        let gd = discrete_square_function(&f, &fam).unwrap();
        let gm = maximal_square_function(&f, &fam).unwrap();
        for (a, b) in gd.values().iter().zip(gm.values()) {
            assert!(a.re <= b.re);
        }
    }

    #[test]
    fn hl_maximal_basics() {
        let g = grid(7);
        let c = hl_maximal(&Signal::constant(g, Complex64::new(-1.5, 0.0)));
        assert!(c.values().iter().all(|v| (v.re - 1.5).abs() < 1e-14));
        let half = hl_maximal(&Signal::from_real_fn(g, |x| if x < 0.5 { 1.0 } else { 0.0 }));
        assert!(half.values().iter().all(|v| v.re >= 0.5 - 1e-15));
    }

    #[test]
    fn vector_maximal_degenerate_and_constant() {
        let g = grid(6);
        let p = ExponentFunction::constant(g, 1.0).unwrap();
        let r = vector_maximal_report(&[Signal::zeros(g), Signal::zeros(g)], &p, 2.0).unwrap();
        assert!(r.degenerate && r.lhs == 0.0 && r.rhs == 0.0);
        let r = vector_maximal_report(&[Signal::constant(g, Complex64::new(2.0, 0.0))], &p, 2.0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12);
        assert!(vector_maximal_report(&[], &p, 1.0).is_err());
    }

    #[test]
    fn orthogonality_sharp_disjoint_and_smooth_decay() {
        let g = grid(8);
        let sharp = KernelFamily::standard(g, 1, 7, WindowKind::ShannonSharp).unwrap();
        let t = almost_orthogonality_table(&sharp, 1, 1).unwrap();
        for e in &t.entries {
            if e.j.abs_diff(e.j_prime) >= 2 {
                assert_eq!(e.constant, 0.0);
            }
        }
        let smooth = KernelFamily::standard(g, 1, 6, WindowKind::MeyerSmooth).unwrap();
        let t = almost_orthogonality_table(&smooth, 1, 1).unwrap();
        for e in &t.entries {
            assert!(e.constant.is_finite());
            assert!(e.constant <= t.max_constant * (-(e.j.abs_diff(e.j_prime) as f64)).exp2());
            if e.j.abs_diff(e.j_prime) >= 2 {
                assert_eq!(e.constant, 0.0);
            }
        }
    }
}
