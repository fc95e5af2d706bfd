//! Variable Lebesgue modular and Luxemburg norm.
//!
//! The norm is the unique `λ*` with `∫ (|f|/λ*)^{p(x)} dx = 1`. It is found by
//! bisection on `log λ`, because the modular spans many decades once
//! `p⁻ < 1`. Signals are rescaled by `max |f|` before exponentiation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{DyadicInterval, ExponentFunction, Signal, TorusInterval};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 60;
const MAX_WIDENINGS: usize = 64;

/// `(1/N) Σ_i (|f(x_i)|/λ)^{p(x_i)}`.
pub fn modular(f: &Signal, p: &ExponentFunction, lambda: f64) -> Result<f64> {
    check_grid(f, p)?;
    modular_of_moduli(&f.abs(), p.samples(), lambda)
}

pub fn modular_of_moduli(moduli: &[f64], exponent: &[f64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("modular needs λ > 0, got {lambda}")));
    }
    Ok(raw_modular(moduli, exponent, lambda))
}

fn raw_modular(moduli: &[f64], exponent: &[f64], lambda: f64) -> f64 {
    let sum: f64 = moduli
        .iter()
        .zip(exponent)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, p)| (a / lambda).powf(*p))
        .sum();
    sum / moduli.len() as f64
}

fn check_grid(f: &Signal, p: &ExponentFunction) -> Result<()> {
    if f.grid() != p.grid() {
        return Err(Error::Precondition("signal and exponent live on different grids".into()));
    }
    Ok(())
}

/// `‖f‖_{L^{p(·)}} = inf{λ > 0 : modular(f, p, λ) ≤ 1}`.
pub fn luxemburg_norm(f: &Signal, p: &ExponentFunction, rel_tol: f64) -> Result<f64> {
    check_grid(f, p)?;
    norm_of_moduli(&f.abs(), p.samples(), rel_tol)
}

/// Luxemburg norm of a nonnegative sample vector.
pub fn norm_of_moduli(moduli: &[f64], exponent: &[f64], rel_tol: f64) -> Result<f64> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-2) {
        return Err(Error::Precondition(format!("rel_tol must lie in (0, 1e-2], got {rel_tol}")));
    }
    let max = moduli.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0.0);
    }
    if !max.is_finite() {
        return Err(Error::Numeric("signal has non-finite samples".into()));
    }
    // |f| ≡ c on all samples: each term is (c/λ)^{p(x)}, equal to 1 exactly at λ = c.
    if moduli.iter().all(|&a| a == max) {
        return Ok(max);
    }
    let scaled: Vec<f64> = moduli.iter().map(|a| a / max).collect();
    let n = moduli.len() as f64;
    let p_minus = exponent.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = n.powf(-1.0 / p_minus) / 2.0;
    let mut hi = 2.0;
    let mut widenings = 0;
    while raw_modular(&scaled, exponent, lo) <= 1.0 {
        lo /= 2.0;
        widenings += 1;
        if widenings > MAX_WIDENINGS {
            return Err(Error::Numeric("Luxemburg bracket failed below".into()));
        }
    }
    while raw_modular(&scaled, exponent, hi) > 1.0 {
        hi *= 2.0;
        widenings += 1;
        if widenings > MAX_WIDENINGS {
            return Err(Error::Numeric("Luxemburg bracket failed above".into()));
        }
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..MAX_BISECTIONS {
        if b - a <= rel_tol * 0.5 {
            break;
        }
        let mid = 0.5 * (a + b);
        if raw_modular(&scaled, exponent, mid.exp()) > 1.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(max * (0.5 * (a + b)).exp())
}

/// `‖χ_E‖_{L^{p(·)}}` for a run of samples. Closed form `|E|^{1/p0}` for
/// constant exponents, otherwise a safeguarded Newton iteration on `log λ`
/// for the convex decreasing map `t ↦ (1/N) Σ_{i∈E} e^{−p_i t}`.
pub fn indicator_norm(p: &ExponentFunction, span: &TorusInterval) -> f64 {
    if span.is_empty() {
        return 0.0;
    }
    if let Some(p0) = p.constant_value() {
        return span.measure().powf(1.0 / p0);
    }
    let s = p.samples();
    let n = p.grid().size() as f64;
    let exps: Vec<f64> = span.indices().map(|i| s[i]).collect();
    let g = |t: f64| -> (f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        for &pi in &exps {
            let e = (-pi * t).exp();
            v += e;
            dv -= pi * e;
        }
        (v / n - 1.0, dv / n)
    };
    // The root lies between the extreme constant-exponent solutions.
    let m = span.measure().ln();
    let p_lo = exps.iter().copied().fold(f64::INFINITY, f64::min);
    let p_hi = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut a, mut b) = ((m / p_lo).min(m / p_hi), (m / p_lo).max(m / p_hi));
    if b - a < 1e-15 {
        return (0.5 * (a + b)).exp();
    }
    let mut t = a;
    for _ in 0..100 {
        let (v, dv) = g(t);
        if v > 0.0 {
            a = t;
        } else {
            b = t;
        }
        if v == 0.0 || b - a < 1e-14 {
            break;
        }
        let newton = t - v / dv;
        t = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (newton - t).abs() < 1e-15 && (v / dv).abs() < 1e-15 {
            break;
        }
    }
    t.exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct CharRatioCase {
    pub big: DyadicInterval,
    pub small: DyadicInterval,
    /// `(‖χ_B‖ / ‖χ_S‖) · (|S| / |B|)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CharRatioReport {
    pub cases: Vec<CharRatioCase>,
    pub max_ratio: f64,
}

/// Measured constants of `‖χ_B‖/‖χ_S‖ ≤ C |B|/|S|` for nested pairs `S ⊆ B`.
pub fn char_ratio_report(
    p: &ExponentFunction,
    cases: &[(DyadicInterval, DyadicInterval)],
) -> Result<CharRatioReport> {
    let mut out = Vec::with_capacity(cases.len());
    for (big, small) in cases {
        if !big.contains(small) {
            return Err(Error::Precondition(format!("{small} is not contained in {big}")));
        }
        let ratio = p.dyadic_indicator_norm(big) / p.dyadic_indicator_norm(small) * small.measure()
            / big.measure();
        out.push(CharRatioCase {
            big: *big,
            small: *small,
            ratio,
        });
    }
    let max_ratio = out.iter().map(|c| c.ratio).fold(0.0, f64::max);
    Ok(CharRatioReport { cases: out, max_ratio })
}

/// Every nested pair `S ⊆ B` of the dyadic tree between the given scales.
pub fn nested_pairs(
    grid: crate::grid::Grid,
    j_min: u32,
    j_max: u32,
) -> Result<Vec<(DyadicInterval, DyadicInterval)>> {
    let tree = crate::grid::build_dyadic_tree(grid, j_min, j_max)?;
    let mut pairs = Vec::new();
    for b in &tree {
        for s in &tree {
            if b.contains(s) {
                pairs.push((*b, *s));
            }
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `‖fg‖_{p(·)}` against `‖f‖_{p1(·)} ‖g‖_{p2(·)}` with `1/p = 1/p1 + 1/p2`.
pub fn holder_report(
    f: &Signal,
    g: &Signal,
    p1: &ExponentFunction,
    p2: &ExponentFunction,
) -> Result<HolderReport> {
    let p = ExponentFunction::harmonic_sum(p1, p2)?;
    let prod: Vec<f64> = f.abs().iter().zip(g.abs()).map(|(a, b)| a * b).collect();
    let lhs = norm_of_moduli(&prod, p.samples(), DEFAULT_REL_TOL)?;
    let rhs = luxemburg_norm(f, p1, DEFAULT_REL_TOL)? * luxemburg_norm(g, p2, DEFAULT_REL_TOL)?;
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(HolderReport { lhs, rhs, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    fn g(j: u32) -> Grid {
        Grid::new(j).unwrap()
    }

    #[test]
    fn modular_examples() {
        let grid = g(6);
        let p = ExponentFunction::sinusoid(grid, 0.8, 0.1).unwrap();
        let c = Signal::constant(grid, Complex64::new(2.5, 0.0));
        assert_eq!(modular(&c, &p, 2.5).unwrap(), 1.0);
        assert_eq!(modular(&Signal::zeros(grid), &p, 0.3).unwrap(), 0.0);
        let half = Signal::from_real_fn(grid, |x| if x < 0.5 { 1.0 } else { 0.0 });
        let two = ExponentFunction::constant(grid, 2.0).unwrap();
        assert_eq!(modular(&half, &two, 1.0).unwrap(), 0.5);
        assert!(matches!(modular(&half, &two, 0.0), Err(Error::Domain(_))));
        assert!(modular(&half, &two, -1.0).is_err());
    }

    #[test]
    fn norm_examples() {
        let grid = g(8);
        let p = ExponentFunction::sinusoid(grid, 0.8, 0.1).unwrap();
        let c = Signal::constant(grid, Complex64::new(0.75, 0.0));
        assert_eq!(luxemburg_norm(&c, &p, DEFAULT_REL_TOL).unwrap(), 0.75);
        assert_eq!(luxemburg_norm(&Signal::zeros(grid), &p, DEFAULT_REL_TOL).unwrap(), 0.0);
        let quarter = Signal::from_real_fn(grid, |x| if x < 0.25 { 1.0 } else { 0.0 });
        let half = ExponentFunction::constant(grid, 0.5).unwrap();
        let v = luxemburg_norm(&quarter, &half, DEFAULT_REL_TOL).unwrap();
        assert!((v - 1.0 / 16.0).abs() <= 1e-9 / 16.0);
        assert!(luxemburg_norm(&quarter, &half, 0.5).is_err());
    }

    #[test]
    fn unit_modular_at_the_norm() {
        let grid = g(7);
        let p = ExponentFunction::sinusoid(grid, 0.6, 0.3).unwrap();
        let f = Signal::from_real_fn(grid, |x| (7.0 * x).sin() * 40.0 + 0.1);
        let lam = luxemburg_norm(&f, &p, DEFAULT_REL_TOL).unwrap();
        let m = modular(&f, &p, lam).unwrap();
        assert!((m - 1.0).abs() <= 10.0 * DEFAULT_REL_TOL, "{m}");
    }

    #[test]
    fn indicator_norm_matches_bisection() {
        let grid = g(7);
        let p = ExponentFunction::sinusoid(grid, 0.8, 0.15).unwrap();
        for (start, len) in [(0, 1), (3, 10), (100, 60), (0, 128)] {
            let span = TorusInterval::new(grid, start, len);
            let mut chi = vec![0.0; 128];
            for i in span.indices() {
                chi[i] = 1.0;
            }
            let direct = norm_of_moduli(&chi, p.samples(), 1e-12).unwrap();
            let fast = indicator_norm(&p, &span);
            assert!((direct - fast).abs() <= 1e-10 * direct, "{direct} {fast}");
        }
    }

    #[test]
    fn char_ratio_constant_exponent_closed_form() {
        let grid = g(6);
        let two = ExponentFunction::constant(grid, 2.0).unwrap();
        let b = DyadicInterval::new(grid, 1, 0).unwrap();
        let s = DyadicInterval::new(grid, 3, 1).unwrap();
        let r = char_ratio_report(&two, &[(b, s)]).unwrap();
        assert!((r.max_ratio - 0.5).abs() < 1e-12);
        let p0 = 0.7;
        let pc = ExponentFunction::constant(grid, p0).unwrap();
        let r = char_ratio_report(&pc, &nested_pairs(grid, 0, 6).unwrap()).unwrap();
        for c in &r.cases {
            let expect = (c.big.measure() / c.small.measure()).powf(1.0 / p0 - 1.0);
            assert!((c.ratio - expect).abs() <= 1e-12 * expect);
        }
        assert!(char_ratio_report(&two, &[(s, b)]).is_err());
    }

    #[test]
    fn holder_trivial_cases() {
        let grid = g(6);
        let two = ExponentFunction::constant(grid, 2.0).unwrap();
        let a = Signal::constant(grid, Complex64::new(3.0, 0.0));
        let b = Signal::constant(grid, Complex64::new(0.5, 0.0));
        let r = holder_report(&a, &b, &two, &two).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12 && (r.lhs - 1.5).abs() < 1e-12);
        let chi = Signal::from_real_fn(grid, |x| if x < 0.375 { 1.0 } else { 0.0 });
        let r = holder_report(&chi, &chi, &two, &two).unwrap();
        assert!((r.lhs - 0.375).abs() < 1e-9 && (r.ratio - 1.0).abs() < 1e-9);
    }
}
