//! Stopping-time atomic decomposition driven by the maximal square function.
//!
//! Level sets `Ω_i = {G_φ^d f > 2^i}` assign every dyadic interval `Q` to the
//! largest `i` with `|Q ∩ Ω_i| > |Q|/2`. Coefficients of the intervals owned
//! by a maximal cube `Q̃` of generation `i` are resynthesized, truncated to
//! `5Q̃` and corrected by a polynomial on `Q̃` so that moments up to degree
//! `d` vanish. Everything cut off by the truncation goes to one extra atom
//! on the whole torus, so `Σ λ a` reproduces the band part of `f`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{build_dyadic_tree, min_moment_degree, CoeffField, DyadicInterval, ExponentFunction, Signal, TorusInterval};
use crate::littlewood_paley::{maximal_square_function, KernelFamily};
use crate::luxemburg::{indicator_norm, norm_of_moduli, DEFAULT_REL_TOL};
use crate::phi_transform::{analyze, synthesize};
use crate::space_norms::{hardy_norm, require_mean_zero};

/// Moment tolerance relative to `‖a‖_∞`.
pub const MOMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Generation {
    Level(i32),
    /// Intervals never more than half covered by any level set; carries `i_min − 1`.
    Residual(i32),
    /// The collected truncation remainders.
    Tail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSets {
    /// `(i, Ω_i)` for increasing `i`; every mask is nonempty.
    pub levels: Vec<(i32, Vec<bool>)>,
    pub degenerate: bool,
}

impl LevelSets {
    pub fn i_min(&self) -> Option<i32> {
        self.levels.first().map(|l| l.0)
    }
}

/// `Ω_i = {gdf > 2^i}` for `i ∈ [⌊log₂ min⁺⌋ − 1, ⌈log₂ max⌉]`, empty sets dropped.
pub fn level_sets(gdf: &Signal) -> Result<LevelSets> {
    let v = gdf.re();
    if gdf.values().iter().any(|z| z.im != 0.0 || z.re < 0.0 || !z.re.is_finite()) {
        return Err(Error::Precondition("level sets need a finite nonnegative real signal".into()));
    }
    let pos_min = v.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
    if !pos_min.is_finite() {
        return Ok(LevelSets { levels: Vec::new(), degenerate: true });
    }
    let max = v.iter().copied().fold(0.0, f64::max);
    let lo = pos_min.log2().floor() as i32 - 1;
    let hi = max.log2().ceil() as i32;
    let levels = (lo..=hi)
        .map(|i| {
            let t = (i as f64).exp2();
            (i, v.iter().map(|&x| x > t).collect::<Vec<bool>>())
        })
        .filter(|(_, m)| m.iter().any(|&b| b))
        .collect();
    Ok(LevelSets { levels, degenerate: false })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingFamily {
    /// Generation of every tree interval.
    pub generation: BTreeMap<DyadicInterval, Generation>,
    /// Inclusion-maximal intervals of each generation, ordered by generation then position.
    pub maximal: Vec<(DyadicInterval, Generation)>,
    /// Largest same-generation ancestor (possibly itself) of every tree interval.
    pub owner: BTreeMap<DyadicInterval, DyadicInterval>,
}

/// Partition `tree` into the stopping families `B_i` and find their maximal elements.
pub fn stopping_cubes(levels: &LevelSets, tree: &[DyadicInterval]) -> StoppingFamily {
    let residual = Generation::Residual(levels.i_min().map_or(0, |i| i - 1));
    let mut generation = BTreeMap::new();
    for q in tree {
        let half = q.sample_count() as f64 / 2.0;
        let mut g = residual;
        // levels are nested, so the last one that covers more than half wins
        for (i, mask) in &levels.levels {
            let hits = mask[q.sample_range()].iter().filter(|&&b| b).count() as f64;
            if hits > half {
                g = Generation::Level(*i);
            } else {
                break;
            }
        }
        generation.insert(*q, g);
    }
    let mut owner = BTreeMap::new();
    let mut maximal = Vec::new();
    for q in tree {
        let g = generation[q];
        let mut best = *q;
        let mut cur = q.parent();
        while let Some(a) = cur {
            if generation.get(&a) == Some(&g) {
                best = a;
            }
            cur = a.parent();
        }
        owner.insert(*q, best);
        if best == *q {
            maximal.push((*q, g));
        }
    }
    maximal.sort_by_key(|(q, g)| (*g, *q));
    StoppingFamily { generation, maximal, owner }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub cube: DyadicInterval,
    pub generation: Generation,
    pub lambda: f64,
    pub signal: Signal,
    /// `5Q̃` clipped periodically (the whole torus for the tail).
    pub support: TorusInterval,
    /// `5ℓ(Q̃) ≥ 1`: the support condition says nothing.
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDecomposition {
    pub stopping_cubes: Vec<(DyadicInterval, Generation)>,
    pub atoms: Vec<Atom>,
    /// `‖f‖_{H^{p(·)}}`.
    pub source_norm: f64,
    pub moment_degree: usize,
}

impl AtomicDecomposition {
    /// `Σ λ a` in atom order.
    pub fn reconstruct(&self, like: &Signal) -> Signal {
        let mut acc = Signal::zeros(like.grid());
        for a in &self.atoms {
            acc = acc.add(&a.signal.scaled(Complex64::new(a.lambda, 0.0)));
        }
        acc
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.lambda).collect()
    }

    pub fn cubes(&self) -> Vec<DyadicInterval> {
        self.atoms.iter().map(|a| a.cube).collect()
    }
}

/// Signed periodic distance from the midpoint of `span` to sample `i`, in units of `scale`.
fn local_u(span: &TorusInterval, i: usize, scale: f64) -> f64 {
    let n = span.grid().size() as f64;
    let mut d = (i as f64 - span.start() as f64 - 0.5 * span.len() as f64).rem_euclid(n);
    if d >= n / 2.0 {
        d -= n;
    }
    d / n / scale
}

/// Subtract from `b` a polynomial of degree `≤ d` supported on `fit` so that
/// `Σ b(x) u(x)^α = 0` for `α ≤ d`, with `u` measured from the center of `fit`.
fn cancel_moments(b: &mut [Complex64], fit: &TorusInterval, d: usize, scale: f64) -> Result<()> {
    let us: Vec<(usize, f64)> = fit.indices().map(|i| (i, local_u(fit, i, scale))).collect();
    let mut moments = vec![Complex64::new(0.0, 0.0); d + 1];
    for (i, bi) in b.iter().enumerate() {
        if bi.norm_sqr() == 0.0 {
            continue;
        }
        let u = local_u(fit, i, scale);
        let mut pw = 1.0;
        for m in moments.iter_mut() {
            *m += bi * pw;
            pw *= u;
        }
    }
    let mut gram = DMatrix::<f64>::zeros(d + 1, d + 1);
    for &(_, u) in &us {
        for r in 0..=d {
            for c in 0..=d {
                gram[(r, c)] += u.powi((r + c) as i32);
            }
        }
    }
    let lu = gram.lu();
    let solve = |rhs: Vec<f64>| {
        lu.solve(&DVector::from_vec(rhs))
            .ok_or_else(|| Error::Numeric("singular moment system".into()))
    };
    let c_re = solve(moments.iter().map(|m| m.re).collect())?;
    let c_im = solve(moments.iter().map(|m| m.im).collect())?;
    for &(i, u) in &us {
        let mut pw = 1.0;
        for k in 0..=d {
            b[i] -= Complex64::new(c_re[k], c_im[k]) * pw;
            pw *= u;
        }
    }
    Ok(())
}

/// Decompose the band part of `f` into atoms.
pub fn atomic_decompose(f: &Signal, p: &ExponentFunction, fam: &KernelFamily) -> Result<AtomicDecomposition> {
    let d = min_moment_degree(p);
    if f.max_abs() == 0.0 {
        return Ok(AtomicDecomposition {
            stopping_cubes: Vec::new(),
            atoms: Vec::new(),
            source_norm: 0.0,
            moment_degree: d,
        });
    }
    require_mean_zero(f, "atomic_decompose")?;
    let grid = f.grid();
    let n = grid.size();
    let source_norm = hardy_norm(f, p, fam)?;
    let levels = level_sets(&maximal_square_function(f, fam)?)?;
    let tree = build_dyadic_tree(grid, 0, grid.log2_size())?;
    let family = stopping_cubes(&levels, &tree);
    let coeffs = analyze(f, fam)?;

    let mut groups: BTreeMap<DyadicInterval, CoeffField> = BTreeMap::new();
    for (q, c) in coeffs.iter() {
        let top = family.owner[q];
        groups
            .entry(top)
            .or_insert_with(|| CoeffField::new(coeffs.scale_range()))
            .insert(*q, *c)?;
    }

    let pieces: Vec<(Option<Atom>, Vec<Complex64>)> = family
        .maximal
        .par_iter()
        .filter_map(|(cube, gen)| groups.get(cube).map(|g| (cube, gen, g)))
        .map(|(cube, gen, group)| -> Result<(Option<Atom>, Vec<Complex64>)> {
            let energy: f64 = group.iter().map(|(_, c)| c.norm_sqr()).sum();
            let piece = synthesize(group, fam)?;
            let support = cube.dilate(5);
            let vacuous = support.is_full();
            let mut local: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
            for i in support.indices() {
                local[i] = piece.values()[i];
            }
            let fit = if cube.sample_count() > d { cube.to_span() } else { support };
            if !vacuous {
                cancel_moments(&mut local, &fit, d, cube.length())?;
            } else {
                let mean = local.iter().sum::<Complex64>() / n as f64;
                local.iter_mut().for_each(|v| *v -= mean);
            }
            let tail: Vec<Complex64> = piece.values().iter().zip(&local).map(|(a, b)| a - b).collect();
            let lambda = indicator_norm(p, &cube.to_span()) / cube.measure().sqrt() * energy.sqrt();
            if lambda == 0.0 {
                return Ok((None, tail));
            }
            let signal = Signal::new(grid, local.iter().map(|v| v / lambda).collect())?;
            Ok((
                Some(Atom {
                    cube: *cube,
                    generation: *gen,
                    lambda,
                    signal,
                    support,
                    vacuous,
                }),
                tail,
            ))
        })
        .collect::<Result<_>>()?;

    let mut atoms = Vec::new();
    let mut tail = vec![Complex64::new(0.0, 0.0); n];
    for (atom, t) in pieces {
        for (a, v) in tail.iter_mut().zip(&t) {
            *a += v;
        }
        atoms.extend(atom);
    }
    let tail = Signal::new(grid, tail)?;
    let tail_norm = tail.l2_norm();
    if tail_norm > 0.0 {
        let root = DyadicInterval::root(grid);
        atoms.push(Atom {
            cube: root,
            generation: Generation::Tail,
            lambda: tail_norm,
            signal: tail.scaled(Complex64::new(1.0 / tail_norm, 0.0)),
            support: TorusInterval::full(grid),
            vacuous: true,
        });
    }
    Ok(AtomicDecomposition {
        stopping_cubes: family.maximal,
        atoms,
        source_norm,
        moment_degree: d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomCheck {
    pub support: bool,
    /// `‖a‖_{L^q} ‖χ_Q‖_{p(·)} / |Q|^{1/q}`.
    pub size_ratio: f64,
    pub size: bool,
    pub moments: bool,
    /// `max_α |Σ a u^α| / (N ‖a‖_∞)` with `u` the centered coordinate over `ℓ(Q)`.
    pub max_moment: f64,
}

pub fn atom_check(a: &Signal, q: &DyadicInterval, p: &ExponentFunction, q_exp: f64, d: usize) -> Result<AtomCheck> {
    atom_check_span(a, &q.to_span(), p, q_exp, d)
}

/// [`atom_check`] on an arbitrary periodic span; on the full torus only the mean is tested.
pub fn atom_check_span(a: &Signal, span: &TorusInterval, p: &ExponentFunction, q_exp: f64, d: usize) -> Result<AtomCheck> {
    if !(q_exp > 1.0) {
        return Err(Error::Precondition(format!("atom exponent q must exceed 1, got {q_exp}")));
    }
    let n = a.len();
    let vals = a.values();
    let sup = a.max_abs();
    let support = (0..n).all(|i| span.contains_index(i) || vals[i].norm_sqr() == 0.0);
    let lq = (vals.iter().map(|v| v.norm().powf(q_exp)).sum::<f64>() / n as f64).powf(1.0 / q_exp);
    let size_ratio = lq * indicator_norm(p, span) / span.measure().powf(1.0 / q_exp);
    let degree = if span.is_full() { 0 } else { d };
    let mut max_moment = 0.0f64;
    if sup > 0.0 {
        let scale = span.measure();
        for alpha in 0..=degree {
            let m: Complex64 = span
                .indices()
                .map(|i| vals[i] * local_u(span, i, scale).powi(alpha as i32))
                .sum();
            max_moment = max_moment.max(m.norm() / (n as f64 * sup));
        }
    }
    Ok(AtomCheck {
        support,
        size_ratio,
        size: size_ratio <= 1.0 + 1e-9,
        moments: max_moment <= MOMENT_TOL,
        max_moment,
    })
}

/// `A({λ}, {Q}) = ‖(Σ_j (|λ_j| χ_{Q_j} / ‖χ_{Q_j}‖_{p(·)})^{p⁻})^{1/p⁻}‖_{L^{p(·)}}`.
pub fn a_quantity(lambdas: &[f64], cubes: &[DyadicInterval], p: &ExponentFunction) -> Result<f64> {
    let spans: Vec<TorusInterval> = cubes.iter().map(|q| q.to_span()).collect();
    a_quantity_spans(lambdas, &spans, p)
}

pub fn a_quantity_spans(lambdas: &[f64], spans: &[TorusInterval], p: &ExponentFunction) -> Result<f64> {
    if lambdas.len() != spans.len() {
        return Err(Error::Precondition(format!(
            "{} coefficients for {} cubes",
            lambdas.len(),
            spans.len()
        )));
    }
    let pm = p.p_minus();
    let mut acc = vec![0.0; p.grid().size()];
    for (l, s) in lambdas.iter().zip(spans) {
        let w = (l.abs() / indicator_norm(p, s)).powf(pm);
        for i in s.indices() {
            acc[i] += w;
        }
    }
    let g: Vec<f64> = acc.into_iter().map(|v| v.powf(1.0 / pm)).collect();
    norm_of_moduli(&g, p.samples(), DEFAULT_REL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::littlewood_paley::WindowKind;
    use crate::rng;

    fn grid(j: u32) -> Grid {
        Grid::new(j).unwrap()
    }

    #[test]
    fn levels_of_a_constant() {
        let g = grid(5);
        let l = level_sets(&Signal::constant(g, Complex64::new(3.0, 0.0))).unwrap();
        for (i, m) in &l.levels {
            assert!((*i as f64).exp2() < 3.0);
            assert!(m.iter().all(|&b| b));
        }
        assert_eq!(l.levels.last().unwrap().0, 1);
        assert!(level_sets(&Signal::zeros(g)).unwrap().degenerate);
        assert!(level_sets(&Signal::constant(g, Complex64::new(-1.0, 0.0))).is_err());
    }

    #[test]
    fn levels_nest_and_match_thresholds() {
        let g = grid(6);
        let v = rng::white_noise(g, &mut rng::stream(3, 0)).map(|z| Complex64::new(z.norm(), 0.0));
        let l = level_sets(&v).unwrap();
        for w in l.levels.windows(2) {
            assert!(w[1].1.iter().zip(&w[0].1).all(|(a, b)| !a || *b));
        }
        for (i, m) in &l.levels {
            for (k, &b) in m.iter().enumerate() {
                assert_eq!(b, v.values()[k].re > (*i as f64).exp2());
            }
        }
    }

    #[test]
    fn stopping_family_partitions_the_tree() {
        let g = grid(6);
        let v = rng::white_noise(g, &mut rng::stream(8, 0)).map(|z| Complex64::new(z.norm(), 0.0));
        let l = level_sets(&v).unwrap();
        let tree = build_dyadic_tree(g, 0, 6).unwrap();
        let fam = stopping_cubes(&l, &tree);
        for q in &tree {
            // brute-force B_i membership
            let members: Vec<i32> = l
                .levels
                .iter()
                .filter(|(i, m)| {
                    let hits = |mask: &Vec<bool>| mask[q.sample_range()].iter().filter(|&&b| b).count() * 2;
                    let next = l.levels.iter().find(|(k, _)| *k == i + 1).map_or(0, |(_, m2)| hits(m2));
                    hits(m) > q.sample_count() && next <= q.sample_count()
                })
                .map(|(i, _)| *i)
                .collect();
            match fam.generation[q] {
                Generation::Level(i) => assert_eq!(members, vec![i]),
                _ => assert!(members.is_empty()),
            }
            let top = fam.owner[q];
            assert!(top.contains(q) && fam.generation[&top] == fam.generation[q]);
        }
        // maximal cubes of one generation are disjoint
        for (a, ga) in &fam.maximal {
            for (b, gb) in &fam.maximal {
                if a != b && ga == gb {
                    assert!(!a.contains(b));
                }
            }
        }
    }

    #[test]
    fn bump_on_first_quarter_stops_there() {
        let g = grid(8);
        let mut v = vec![Complex64::new(0.01, 0.0); 256];
        for x in v.iter_mut().take(64) {
            *x = Complex64::new(10.0, 0.0);
        }
        let l = level_sets(&Signal::new(g, v).unwrap()).unwrap();
        let fam = stopping_cubes(&l, &build_dyadic_tree(g, 0, 8).unwrap());
        let top = l.levels.last().unwrap().0;
        let high: Vec<_> = fam.maximal.iter().filter(|(_, gen)| *gen == Generation::Level(top)).collect();
        assert_eq!(high.len(), 1);
        assert_eq!(high[0].0, DyadicInterval::new(g, 2, 0).unwrap());
    }

    #[test]
    fn decomposition_reconstructs_with_valid_atoms() {
        let g = grid(8);
        let fam = KernelFamily::standard(g, 1, 6, WindowKind::MeyerSmooth).unwrap();
        for (p0, seed) in [(0.9, 1u64), (0.45, 2)] {
            let p = ExponentFunction::constant(g, p0).unwrap();
            let f = rng::band_noise(&fam, &mut rng::stream(seed, 0));
            let dec = atomic_decompose(&f, &p, &fam).unwrap();
            assert_eq!(dec.moment_degree, min_moment_degree(&p));
            assert!(dec.reconstruct(&f).relative_l2_error(&f) < 1e-10);
            for a in &dec.atoms {
                let c = atom_check_span(&a.signal, &a.support, &p, 2.0, dec.moment_degree).unwrap();
                assert!(c.support && c.moments, "{:?} {c:?}", a.cube);
            }
        }
        let p = ExponentFunction::constant(g, 0.9).unwrap();
        assert!(atomic_decompose(&Signal::zeros(g), &p, &fam).unwrap().atoms.is_empty());
    }

    #[test]
    fn a_quantity_closed_forms() {
        let g = grid(6);
        let p = ExponentFunction::sinusoid(g, 0.8, 0.1).unwrap();
        let q = DyadicInterval::new(g, 3, 5).unwrap();
        assert!((a_quantity(&[2.5], &[q], &p).unwrap() - 2.5).abs() < 1e-9);
        let one = ExponentFunction::constant(g, 1.0).unwrap();
        let q2 = DyadicInterval::new(g, 2, 0).unwrap();
        assert!((a_quantity(&[1.5, 0.5], &[q, q2], &one).unwrap() - 2.0).abs() < 1e-9);
        assert!(a_quantity(&[1.0], &[], &p).is_err());
    }

    #[test]
    fn atom_check_exact_haar() {
        let g = grid(6);
        let p = ExponentFunction::constant(g, 1.0).unwrap();
        let q = DyadicInterval::new(g, 2, 1).unwrap();
        // ±c on the halves of Q: ‖a‖₂ = c|Q|^{1/2} must equal |Q|^{1/2}/|Q|
        let c = 1.0 / q.measure();
        let a = Signal::from_fn(g, |x| {
            let inside = (0.25..0.5).contains(&x);
            let s = if x < 0.375 { c } else { -c };
            Complex64::new(if inside { s } else { 0.0 }, 0.0)
        });
        let r = atom_check(&a, &q, &p, 2.0, 0).unwrap();
        assert!(r.support && r.moments && r.size);
        assert!((r.size_ratio - 1.0).abs() < 1e-9);
        let z = atom_check(&Signal::zeros(g), &q, &p, 2.0, 3).unwrap();
        assert!(z.support && z.moments && z.size);
        assert!(atom_check(&a, &q, &p, 1.0, 0).is_err());
    }
}
