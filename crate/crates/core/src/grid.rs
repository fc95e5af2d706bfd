//! Grid, signals, exponent functions and the finite dyadic tree.
//!
//! Everything lives on the periodic unit interval `[0, 1)` sampled at
//! `N = 2^J` points with quadrature weight `1/N` per sample.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::luxemburg;

pub const MIN_LOG2_SIZE: u32 = 2;
pub const MAX_LOG2_SIZE: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    log2_size: u32,
}

impl Grid {
    pub fn new(log2_size: u32) -> Result<Self> {
        if !(MIN_LOG2_SIZE..=MAX_LOG2_SIZE).contains(&log2_size) {
            return Err(Error::Range(format!(
                "grid exponent J = {log2_size} outside [{MIN_LOG2_SIZE}, {MAX_LOG2_SIZE}]"
            )));
        }
        Ok(Self { log2_size })
    }

    pub fn log2_size(&self) -> u32 {
        self.log2_size
    }

    pub fn size(&self) -> usize {
        1usize << self.log2_size
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.size() as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        i as f64 / self.size() as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.size()).map(|i| self.point(i))
    }

    /// Periodic distance between samples `i` and `j`, in units of the torus.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let n = self.size();
        let d = i.abs_diff(j) % n;
        d.min(n - d) as f64 / n as f64
    }
}

/// A complex-valued sampled function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::Precondition(format!(
                "signal has {} samples, grid has {}",
                values.len(),
                grid.size()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.size()],
        }
    }

    pub fn constant(grid: Grid, c: Complex64) -> Self {
        Self {
            grid,
            values: vec![c; grid.size()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            grid,
            values: grid.points().map(f).collect(),
        }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// The pure tone `e^{2πi m x}`.
    pub fn tone(grid: Grid, m: i64) -> Self {
        Self::from_fn(grid, |x| {
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 * x)
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.len() as f64
    }

    /// `(∫ |f|^2)^{1/2}` with the grid quadrature.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.len() as f64).sqrt()
    }

    /// `⟨f, g⟩ = ∫ f conj(g)`.
    pub fn inner(&self, other: &Signal) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            / self.len() as f64
    }

    pub fn scaled(&self, c: Complex64) -> Signal {
        Signal {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Signal) -> Signal {
        Signal {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Signal) -> Signal {
        Signal {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Signal {
        Signal {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Relative L2 distance `‖self − other‖₂ / ‖other‖₂` (absolute when `other` is zero).
    pub fn relative_l2_error(&self, reference: &Signal) -> f64 {
        let diff = self.sub(reference).l2_norm();
        let r = reference.l2_norm();
        if r == 0.0 {
            diff
        } else {
            diff / r
        }
    }
}

/// Sampled variable exponent `p(·)` with cached bounds.
#[derive(Debug)]
pub struct ExponentFunction {
    grid: Grid,
    samples: Vec<f64>,
    p_minus: f64,
    p_plus: f64,
    lh: OnceLock<f64>,
    indicator_norms: OnceLock<Vec<Vec<f64>>>,
}

impl Clone for ExponentFunction {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.clone(),
            p_minus: self.p_minus,
            p_plus: self.p_plus,
            lh: self.lh.clone(),
            indicator_norms: self.indicator_norms.clone(),
        }
    }
}

impl PartialEq for ExponentFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

impl ExponentFunction {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.size() {
            return Err(Error::Precondition(format!(
                "exponent has {} samples, grid has {}",
                samples.len(),
                grid.size()
            )));
        }
        if let Some(bad) = samples.iter().find(|p| !p.is_finite() || **p <= 0.0) {
            return Err(Error::Domain(format!(
                "exponent samples must be finite and positive, got {bad}"
            )));
        }
        let p_minus = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let p_plus = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            grid,
            samples,
            p_minus,
            p_plus,
            lh: OnceLock::new(),
            indicator_norms: OnceLock::new(),
        })
    }

    pub fn constant(grid: Grid, p0: f64) -> Result<Self> {
        Self::new(grid, vec![p0; grid.size()])
    }

    /// `p(x) = mean + amplitude · sin(2πx)`.
    pub fn sinusoid(grid: Grid, mean: f64, amplitude: f64) -> Result<Self> {
        Self::new(
            grid,
            grid.points()
                .map(|x| mean + amplitude * (2.0 * std::f64::consts::PI * x).sin())
                .collect(),
        )
    }

    /// Periodic step from `low` on `[0, 1/2)` to `high` on `[1/2, 1)`, with
    /// smooth transitions of the given width (at most 1/2) at `x = 1/2` and `x = 0`.
    /// A width of zero gives the sharp jump.
    pub fn smoothstep(grid: Grid, low: f64, high: f64, width: f64) -> Result<Self> {
        let samples = grid
            .points()
            .map(|x| {
                let width = width.min(0.5);
                if width <= 0.0 {
                    return if x < 0.5 { low } else { high };
                }
                let w = if x < 0.25 {
                    1.0 - smooth_step(x / width + 0.5)
                } else if x < 0.75 {
                    smooth_step((x - 0.5) / width + 0.5)
                } else {
                    1.0 - smooth_step((x - 1.0) / width + 0.5)
                };
                low + (high - low) * w
            })
            .collect();
        Self::new(grid, samples)
    }

    /// `1/p = 1/p1 + 1/p2`, pointwise.
    pub fn harmonic_sum(p1: &ExponentFunction, p2: &ExponentFunction) -> Result<Self> {
        if p1.grid != p2.grid {
            return Err(Error::Precondition("exponents live on different grids".into()));
        }
        Self::new(
            p1.grid,
            p1.samples
                .iter()
                .zip(&p2.samples)
                .map(|(a, b)| 1.0 / (1.0 / a + 1.0 / b))
                .collect(),
        )
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// `Some(p0)` when every sample equals `p0`.
    pub fn constant_value(&self) -> Option<f64> {
        (self.p_minus == self.p_plus).then_some(self.p_minus)
    }

    /// Cached log-Hölder constant, see [`lh_constant`].
    pub fn lh_constant(&self) -> f64 {
        *self.lh.get_or_init(|| scan_lh_constant(self))
    }

    /// `‖χ_P‖_{L^{p(·)}}` for a dyadic interval on this exponent's grid, cached
    /// over the whole tree on first use.
    pub fn dyadic_indicator_norm(&self, interval: &DyadicInterval) -> f64 {
        let table = self.indicator_norms.get_or_init(|| {
            (0..=self.grid.log2_size())
                .map(|scale| {
                    let count = 1usize << scale;
                    let len = self.grid.size() >> scale;
                    (0..count)
                        .map(|k| {
                            luxemburg::indicator_norm(self, &TorusInterval::new(self.grid, k * len, len))
                        })
                        .collect()
                })
                .collect()
        });
        table[interval.scale as usize][interval.position]
    }
}

/// C^∞ step from 0 (t ≤ 0) to 1 (t ≥ 1).
pub(crate) fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

fn scan_lh_constant(p: &ExponentFunction) -> f64 {
    let n = p.grid.size();
    let s = &p.samples;
    let mut best = 0.0f64;
    for k in 1..=n / 2 {
        let w = -(k as f64 / n as f64).ln();
        let mut local = 0.0f64;
        for i in 0..n {
            local = local.max((s[i] - s[(i + k) % n]).abs());
        }
        best = best.max(local * w);
    }
    best
}

/// Smallest `C ≥ 0` with `|p(x_i) − p(x_j)| ≤ C / (−log d(x_i, x_j))` over all
/// sample pairs at periodic distance `0 < d ≤ 1/2`.
pub fn lh_constant(p: &ExponentFunction) -> f64 {
    p.lh_constant()
}

pub fn exponent_bounds(p: &ExponentFunction) -> (f64, f64) {
    (p.p_minus, p.p_plus)
}

/// Smallest `d ≥ 0` with `p⁻ (d + 2) > 1` (one-dimensional moment order).
pub fn min_moment_degree(p: &ExponentFunction) -> usize {
    moment_degree_for(p.p_minus)
}

pub(crate) fn moment_degree_for(p_minus: f64) -> usize {
    let mut d = 0usize;
    while p_minus * (d as f64 + 2.0) <= 1.0 {
        d += 1;
    }
    d
}

/// A dyadic interval `[k 2^{-j}, (k+1) 2^{-j})` of a grid with `2^J` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub scale: u32,
    pub position: usize,
    pub log2_size: u32,
}

impl DyadicInterval {
    pub fn new(grid: Grid, scale: u32, position: usize) -> Result<Self> {
        if scale > grid.log2_size() {
            return Err(Error::Range(format!(
                "scale {scale} finer than grid resolution {}",
                grid.log2_size()
            )));
        }
        if position >= 1usize << scale {
            return Err(Error::Range(format!("position {position} out of range at scale {scale}")));
        }
        Ok(Self {
            scale,
            position,
            log2_size: grid.log2_size(),
        })
    }

    pub fn root(grid: Grid) -> Self {
        Self {
            scale: 0,
            position: 0,
            log2_size: grid.log2_size(),
        }
    }

    pub fn grid(&self) -> Grid {
        Grid {
            log2_size: self.log2_size,
        }
    }

    /// `ℓ(Q) = 2^{-j}`, also the measure `|Q|` in one dimension.
    pub fn length(&self) -> f64 {
        (-(self.scale as f64)).exp2()
    }

    pub fn measure(&self) -> f64 {
        self.length()
    }

    pub fn sample_count(&self) -> usize {
        1usize << (self.log2_size - self.scale)
    }

    pub fn start(&self) -> usize {
        self.position * self.sample_count()
    }

    pub fn sample_range(&self) -> Range<usize> {
        let s = self.start();
        s..s + self.sample_count()
    }

    /// Left endpoint `z_Q`.
    pub fn anchor(&self) -> f64 {
        self.position as f64 * self.length()
    }

    pub fn center(&self) -> f64 {
        self.anchor() + 0.5 * self.length()
    }

    /// Sample index of the probe point `x_Q` under a point-valued policy.
    pub fn probe_index(&self, policy: ProbePolicy) -> usize {
        match policy {
            ProbePolicy::Center => self.start() + self.sample_count() / 2,
            _ => self.start(),
        }
    }

    pub fn parent(&self) -> Option<Self> {
        (self.scale > 0).then(|| Self {
            scale: self.scale - 1,
            position: self.position / 2,
            log2_size: self.log2_size,
        })
    }

    pub fn children(&self) -> Option<[Self; 2]> {
        (self.scale < self.log2_size).then(|| {
            let c = |k| Self {
                scale: self.scale + 1,
                position: k,
                log2_size: self.log2_size,
            };
            [c(2 * self.position), c(2 * self.position + 1)]
        })
    }

    /// Ancestor at a coarser (or equal) scale.
    pub fn ancestor_at(&self, scale: u32) -> Option<Self> {
        (scale <= self.scale).then(|| Self {
            scale,
            position: self.position >> (self.scale - scale),
            log2_size: self.log2_size,
        })
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        interval_contains(self, other)
    }

    pub fn to_span(&self) -> TorusInterval {
        TorusInterval {
            grid: self.grid(),
            start: self.start(),
            len: self.sample_count(),
        }
    }

    /// Concentric `factor`-fold dilate, wrapped periodically and clipped to the torus.
    pub fn dilate(&self, factor: usize) -> TorusInterval {
        let n = self.grid().size();
        let len = self.sample_count();
        let total = len * factor;
        if total >= n {
            return TorusInterval::full(self.grid());
        }
        let left = (total - len) / 2;
        let start = (self.start() + n - left % n) % n;
        TorusInterval {
            grid: self.grid(),
            start,
            len: total,
        }
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[{},{}]", self.scale, self.position)
    }
}

/// A contiguous run of samples on the torus, possibly wrapping past `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusInterval {
    grid: Grid,
    start: usize,
    len: usize,
}

impl TorusInterval {
    pub fn new(grid: Grid, start: usize, len: usize) -> Self {
        let n = grid.size();
        Self {
            grid,
            start: start % n,
            len: len.min(n),
        }
    }

    pub fn full(grid: Grid) -> Self {
        Self {
            grid,
            start: 0,
            len: grid.size(),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.grid.size()
    }

    pub fn measure(&self) -> f64 {
        self.len as f64 / self.grid.size() as f64
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.grid.size();
        (0..self.len).map(move |o| (self.start + o) % n)
    }

    pub fn contains_index(&self, i: usize) -> bool {
        let n = self.grid.size();
        (i + n - self.start) % n < self.len
    }

    /// Unwrapped coordinate of sample `i` measured from the interval's midpoint.
    pub fn local_coordinate(&self, i: usize) -> f64 {
        let n = self.grid.size();
        let offset = (i + n - self.start) % n;
        (offset as f64 - 0.5 * self.len as f64) / n as f64
    }
}

/// Sample-selection rule for point evaluations `f(x_Q)` inside an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbePolicy {
    #[default]
    Left,
    Center,
    Sup,
    Inf,
}

impl ProbePolicy {
    /// Apply the policy to the moduli of a band-limited signal over `q`.
    pub fn select(&self, moduli: &[f64], q: &DyadicInterval) -> f64 {
        let r = q.sample_range();
        match self {
            ProbePolicy::Left | ProbePolicy::Center => moduli[q.probe_index(*self)],
            ProbePolicy::Sup => moduli[r].iter().copied().fold(0.0, f64::max),
            ProbePolicy::Inf => moduli[r].iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// All dyadic intervals of scales `j_min..=j_max`, ordered by `(scale, position)`.
pub fn build_dyadic_tree(grid: Grid, j_min: u32, j_max: u32) -> Result<Vec<DyadicInterval>> {
    if j_min > j_max || j_max > grid.log2_size() {
        return Err(Error::Range(format!(
            "scale bounds [{j_min}, {j_max}] invalid for J = {}",
            grid.log2_size()
        )));
    }
    let mut out = Vec::with_capacity((1usize << (j_max + 1)) - (1usize << j_min));
    for scale in j_min..=j_max {
        for position in 0..1usize << scale {
            out.push(DyadicInterval {
                scale,
                position,
                log2_size: grid.log2_size(),
            });
        }
    }
    Ok(out)
}

/// `true` iff `q ⊆ p` (sample ranges).
pub fn interval_contains(p: &DyadicInterval, q: &DyadicInterval) -> bool {
    q.scale >= p.scale && (q.position >> (q.scale - p.scale)) == p.position
}

/// Sparse map from dyadic intervals to complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffField {
    entries: BTreeMap<DyadicInterval, Complex64>,
    scale_range: (u32, u32),
}

impl CoeffField {
    pub fn new(scale_range: (u32, u32)) -> Self {
        Self {
            entries: BTreeMap::new(),
            scale_range,
        }
    }

    pub fn scale_range(&self) -> (u32, u32) {
        self.scale_range
    }

    pub fn insert(&mut self, q: DyadicInterval, value: Complex64) -> Result<()> {
        if q.scale < self.scale_range.0 || q.scale > self.scale_range.1 {
            return Err(Error::Range(format!(
                "{q} outside field scale range {:?}",
                self.scale_range
            )));
        }
        self.entries.insert(q, value);
        Ok(())
    }

    pub fn get(&self, q: &DyadicInterval) -> Complex64 {
        self.entries.get(q).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DyadicInterval, &Complex64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|(q, v)| (*q, v * c)).collect(),
            scale_range: self.scale_range,
        }
    }

    /// `Σ_Q s_Q · conj(t_Q)`.
    pub fn pairing(&self, other: &CoeffField) -> Complex64 {
        self.entries
            .iter()
            .map(|(q, v)| v * other.get(q).conj())
            .sum()
    }

    /// Text form, one `j k re im` line per entry.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (q, v) in &self.entries {
            s.push_str(&format!("{} {} {:e} {:e}\n", q.scale, q.position, v.re, v.im));
        }
        s
    }

    pub fn from_text(grid: Grid, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(Error::Config(format!(
                    "line {}: expected `j k re im`, got {line:?}",
                    lineno + 1
                )));
            }
            let bad = |what: &str| Error::Config(format!("line {}: bad {what}", lineno + 1));
            let j: u32 = parts[0].parse().map_err(|_| bad("scale"))?;
            let k: usize = parts[1].parse().map_err(|_| bad("position"))?;
            let re: f64 = parts[2].parse().map_err(|_| bad("real part"))?;
            let im: f64 = parts[3].parse().map_err(|_| bad("imaginary part"))?;
            entries.insert(DyadicInterval::new(grid, j, k)?, Complex64::new(re, im));
        }
        let lo = entries.keys().map(|q| q.scale).min().unwrap_or(0);
        let hi = entries.keys().map(|q| q.scale).max().unwrap_or(grid.log2_size());
        Ok(Self {
            entries,
            scale_range: (lo, hi),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(j: u32) -> Grid {
        Grid::new(j).unwrap()
    }

    #[test]
    fn tree_counts_and_order() {
        let g = grid(3);
        let root = build_dyadic_tree(g, 0, 0).unwrap();
        assert_eq!(root.len(), 1);
        assert_eq!(root[0].sample_range(), 0..8);
        assert_eq!(build_dyadic_tree(g, 0, 3).unwrap().len(), 15);
        let g4 = grid(4);
        let level = build_dyadic_tree(g4, 2, 2).unwrap();
        assert_eq!(level.len(), 4);
        for (k, q) in level.iter().enumerate() {
            assert_eq!(q.length(), 0.25);
            assert_eq!(q.sample_range(), 4 * k..4 * k + 4);
        }
        let t = build_dyadic_tree(g4, 0, 4).unwrap();
        assert!(t.windows(2).all(|w| (w[0].scale, w[0].position) < (w[1].scale, w[1].position)));
        assert!(build_dyadic_tree(g4, 2, 5).is_err());
        assert!(build_dyadic_tree(g4, 3, 2).is_err());
    }

    #[test]
    fn children_partition_parent() {
        let g = grid(5);
        for q in build_dyadic_tree(g, 0, 4).unwrap() {
            let [a, b] = q.children().unwrap();
            assert_eq!(a.sample_range().start, q.sample_range().start);
            assert_eq!(a.sample_range().end, b.sample_range().start);
            assert_eq!(b.sample_range().end, q.sample_range().end);
            assert_eq!(a.parent(), Some(q));
        }
    }

    #[test]
    fn containment_examples() {
        let g = grid(4);
        let p = DyadicInterval::new(g, 1, 0).unwrap();
        assert!(interval_contains(&p, &DyadicInterval::new(g, 2, 1).unwrap()));
        assert!(!interval_contains(&p, &DyadicInterval::new(g, 2, 2).unwrap()));
        assert!(interval_contains(&p, &p));
    }

    #[test]
    fn containment_matches_sample_ranges_exhaustively() {
        for j in 1..=6 {
            let g = grid(j.max(2));
            let tree = build_dyadic_tree(g, 0, g.log2_size()).unwrap();
            for p in &tree {
                for q in &tree {
                    let (rp, rq) = (p.sample_range(), q.sample_range());
                    let by_range = rq.start >= rp.start && rq.end <= rp.end;
                    assert_eq!(interval_contains(p, q), by_range);
                    let disjoint = rq.end <= rp.start || rp.end <= rq.start;
                    assert!(by_range || interval_contains(q, p) || disjoint);
                }
            }
        }
    }

    #[test]
    fn lh_constant_examples() {
        let g = grid(8);
        assert_eq!(ExponentFunction::constant(g, 0.9).unwrap().lh_constant(), 0.0);
        // brute force over all ordered pairs
        let p = ExponentFunction::sinusoid(g, 0.8, 0.1).unwrap();
        let n = g.size();
        let mut brute = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = g.distance(i, j);
                if d > 0.0 && d <= 0.5 {
                    brute = brute.max((p.samples()[i] - p.samples()[j]).abs() * -d.ln());
                }
            }
        }
        assert!((p.lh_constant() - brute).abs() <= 1e-15 * brute);
    }

    #[test]
    fn lh_constant_grows_for_jump_and_is_stable_for_smooth() {
        let jumps: Vec<f64> = [6, 8, 10]
            .iter()
            .map(|&j| ExponentFunction::smoothstep(grid(j), 0.7, 1.0, 0.0).unwrap().lh_constant())
            .collect();
        assert!(jumps[0] < jumps[1] && jumps[1] < jumps[2], "{jumps:?}");
        let a = ExponentFunction::sinusoid(grid(8), 0.8, 0.1).unwrap().lh_constant();
        let b = ExponentFunction::sinusoid(grid(10), 0.8, 0.1).unwrap().lh_constant();
        assert!((a - b).abs() <= 0.1 * b);
    }

    #[test]
    fn bounds_and_moment_degree() {
        let g = grid(4);
        assert_eq!(exponent_bounds(&ExponentFunction::constant(g, 1.0).unwrap()), (1.0, 1.0));
        let pattern: Vec<f64> = (0..16).map(|i| [0.7, 0.9, 0.8][i % 3]).collect();
        assert_eq!(exponent_bounds(&ExponentFunction::new(g, pattern).unwrap()), (0.7, 0.9));
        let s = ExponentFunction::sinusoid(g, 0.8, 0.1).unwrap();
        let lo = s.samples().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = s.samples().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(exponent_bounds(&s), (lo, hi));
        assert_eq!(moment_degree_for(1.0), 0);
        assert_eq!(moment_degree_for(0.5), 1);
        assert_eq!(moment_degree_for(0.3), 2);
        let mut prev = usize::MAX;
        for k in 1..200 {
            let d = moment_degree_for(k as f64 * 0.01);
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn exponent_rejects_nonpositive() {
        let g = grid(2);
        assert!(ExponentFunction::new(g, vec![1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(ExponentFunction::new(g, vec![1.0; 3]).is_err());
    }

    #[test]
    fn smoothstep_has_requested_plateaus() {
        let g = grid(8);
        let p = ExponentFunction::smoothstep(g, 0.7, 1.0, 0.1).unwrap();
        assert!((p.samples()[64] - 0.7).abs() < 1e-12);
        assert!((p.samples()[192] - 1.0).abs() < 1e-12);
        assert_eq!(p.p_minus(), 0.7);
    }

    #[test]
    fn dilate_wraps() {
        let g = grid(6);
        let q = DyadicInterval::new(g, 4, 0).unwrap();
        let d = q.dilate(5);
        assert_eq!(d.len(), 20);
        assert!(d.contains_index(63) && d.contains_index(0) && d.contains_index(11));
        assert!(!d.contains_index(12) && !d.contains_index(55));
        assert!(DyadicInterval::new(g, 2, 1).unwrap().dilate(5).is_full());
    }

    #[test]
    fn coefficient_text_round_trip() {
        let g = grid(5);
        let mut field = CoeffField::new((2, 4));
        field.insert(DyadicInterval::new(g, 3, 5).unwrap(), Complex64::new(1.5, -0.25)).unwrap();
        field.insert(DyadicInterval::new(g, 2, 0).unwrap(), Complex64::new(-2.0, 0.0)).unwrap();
        assert!(field.insert(DyadicInterval::new(g, 5, 0).unwrap(), Complex64::new(1.0, 0.0)).is_err());
        let back = CoeffField::from_text(g, &field.to_text()).unwrap();
        assert_eq!(back.iter().collect::<Vec<_>>(), field.iter().collect::<Vec<_>>());
    }
}
