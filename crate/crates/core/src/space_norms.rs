//! Function- and sequence-space norms: Hardy (square-function form),
//! Carleson `CMO^{p(·)}`, `s^{p(·)}`, `c^{p(·)}`, Campanato and
//! Hölder–Zygmund, plus the local polynomial projection.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{build_dyadic_tree, CoeffField, DyadicInterval, ExponentFunction, ProbePolicy, Signal, TorusInterval};
use crate::littlewood_paley::{band_signals, discrete_square_function_with, KernelFamily, Lattice, Which};
use crate::luxemburg::{indicator_norm, luxemburg_norm, norm_of_moduli, DEFAULT_REL_TOL};

/// Relative size of the mean tolerated by operations that need mean-zero input.
pub const MEAN_ZERO_TOL: f64 = 1e-9;

pub(crate) fn require_mean_zero(f: &Signal, what: &str) -> Result<()> {
    let scale = f.max_abs().max(f64::MIN_POSITIVE);
    if f.mean().norm() > MEAN_ZERO_TOL * scale {
        return Err(Error::Precondition(format!(
            "{what} needs a mean-zero signal (mean = {:.3e})",
            f.mean().norm()
        )));
    }
    Ok(())
}

/// `‖f‖_{H^{p(·)}} := ‖G^d f‖_{L^{p(·)}}`.
pub fn hardy_norm(f: &Signal, p: &ExponentFunction, fam: &KernelFamily) -> Result<f64> {
    hardy_norm_with(f, p, fam, ProbePolicy::Left, Lattice::Shifted)
}

pub fn hardy_norm_with(
    f: &Signal,
    p: &ExponentFunction,
    fam: &KernelFamily,
    probe: ProbePolicy,
    lattice: Lattice,
) -> Result<f64> {
    require_mean_zero(f, "hardy_norm")?;
    let g = discrete_square_function_with(f, fam, probe, lattice)?;
    luxemburg_norm(&g, p, DEFAULT_REL_TOL)
}

/// Which Carleson expression [`cmo_norm`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmoForm {
    /// `Σ_{Q⊂P} |⟨g, ψ_Q⟩|²`, coefficients taken at the left corner `z_Q`.
    Integral,
    /// `Σ_{Q⊂P} |φ_j * g(x_Q)|² |Q|` with the given probe.
    Discrete(ProbePolicy),
}

/// Per-band values `v_Q` (one per interval of that band's lattice scale).
pub(crate) struct BandSamples {
    pub band: u32,
    pub scale: u32,
    pub values: Vec<f64>,
}

/// `sup_P { |P|/‖χ_P‖² Σ_{j ≥ scale(P)} Σ_{Q ⊂ P} v_Q² |Q| }^{1/2}` over
/// dyadic `P` with scales `0..=p_max_scale`.
pub(crate) fn carleson_sup(bands: &[BandSamples], p: &ExponentFunction, p_max_scale: u32) -> f64 {
    let depth = p_max_scale as usize;
    // sums[s][k]: contribution of bands with j ≥ s inside P = (s, k).
    let mut sums: Vec<Vec<f64>> = (0..=depth).map(|s| vec![0.0; 1 << s]).collect();
    for b in bands {
        let q_measure = (-(b.scale as f64)).exp2();
        let mut level: Vec<f64> = b.values.iter().map(|v| v * v * q_measure).collect();
        let mut s = b.scale as usize;
        while s > 0 {
            if s <= depth && (b.band as usize) >= s {
                for (acc, v) in sums[s].iter_mut().zip(&level) {
                    *acc += v;
                }
            }
            level = level.chunks(2).map(|c| c[0] + c[1]).collect();
            s -= 1;
        }
        for (acc, v) in sums[0].iter_mut().zip(&level) {
            *acc += v;
        }
    }
    let grid = p.grid();
    let mut best = 0.0f64;
    for (s, row) in sums.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            let q = DyadicInterval::new(grid, s as u32, k).expect("in tree");
            let chi = p.dyadic_indicator_norm(&q);
            best = best.max(q.measure() / (chi * chi) * v);
        }
    }
    best.sqrt()
}

pub(crate) fn band_probe_samples(
    f: &Signal,
    fam: &KernelFamily,
    which: Which,
    probe: ProbePolicy,
) -> Result<Vec<BandSamples>> {
    band_probe_samples_at(f, fam, which, probe, fam.shift())
}

/// Band values sampled on intervals of scale `j + shift` instead of the family's own lattice.
pub(crate) fn band_probe_samples_at(
    f: &Signal,
    fam: &KernelFamily,
    which: Which,
    probe: ProbePolicy,
    shift: u32,
) -> Result<Vec<BandSamples>> {
    let big_j = fam.grid().log2_size();
    let bands = band_signals(f, fam, which)?;
    fam.scales()
        .zip(bands)
        .map(|(j, band)| {
            let scale = j + shift;
            if scale > big_j {
                return Err(Error::Range(format!("band {j} with shift {shift} needs scale {scale} > J = {big_j}")));
            }
            let moduli: Vec<f64> = band.iter().map(|v| v.norm()).collect();
            let values = build_dyadic_tree(fam.grid(), scale, scale)?
                .iter()
                .map(|q| probe.select(&moduli, q))
                .collect();
            Ok(BandSamples { band: j, scale, values })
        })
        .collect()
}

/// Carleson norm `‖g‖_{CMO^{p(·)}}` by full tree traversal; `P` ranges over
/// dyadic intervals with `ℓ(P) ≥ 2^{-j_max}`.
pub fn cmo_norm(g: &Signal, p: &ExponentFunction, fam: &KernelFamily, form: CmoForm) -> Result<f64> {
    if g.grid() != p.grid() || g.grid() != fam.grid() {
        return Err(Error::Precondition("signal, exponent and family grids differ".into()));
    }
    let bands = match form {
        CmoForm::Integral => band_probe_samples(g, fam, Which::Synthesis, ProbePolicy::Left)?,
        CmoForm::Discrete(probe) => band_probe_samples(g, fam, Which::Analysis, probe)?,
    };
    Ok(carleson_sup(&bands, p, fam.j_max()))
}

/// `‖{s_Q}‖_{s^{p(·)}} = ‖(Σ_Q |s_Q|² |Q|^{-1} χ_Q)^{1/2}‖_{L^{p(·)}}`.
pub fn seq_s_norm(s: &CoeffField, p: &ExponentFunction) -> Result<f64> {
    let grid = p.grid();
    let mut acc = vec![0.0; grid.size()];
    for (q, v) in s.iter() {
        if q.log2_size != grid.log2_size() {
            return Err(Error::Precondition("coefficient field and exponent grids differ".into()));
        }
        let w = v.norm_sqr() / q.measure();
        for a in &mut acc[q.sample_range()] {
            *a += w;
        }
    }
    let g: Vec<f64> = acc.into_iter().map(f64::sqrt).collect();
    norm_of_moduli(&g, p.samples(), DEFAULT_REL_TOL)
}

/// `‖{t_Q}‖_{c^{p(·)}} = sup_P { |P|/‖χ_P‖² Σ_{Q⊂P} |t_Q|² }^{1/2}` over every dyadic `P`.
pub fn seq_c_norm(t: &CoeffField, p: &ExponentFunction) -> Result<f64> {
    let grid = p.grid();
    let big_j = grid.log2_size() as usize;
    let mut sums: Vec<Vec<f64>> = (0..=big_j).map(|s| vec![0.0; 1 << s]).collect();
    for (q, v) in t.iter() {
        if q.log2_size != grid.log2_size() {
            return Err(Error::Precondition("coefficient field and exponent grids differ".into()));
        }
        sums[q.scale as usize][q.position] += v.norm_sqr();
    }
    for s in (1..=big_j).rev() {
        let (upper, lower) = sums.split_at_mut(s);
        for (k, v) in lower[0].iter().enumerate() {
            upper[s - 1][k / 2] += v;
        }
    }
    let mut best = 0.0f64;
    for (s, row) in sums.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            if *v > 0.0 {
                let q = DyadicInterval::new(grid, s as u32, k)?;
                let chi = p.dyadic_indicator_norm(&q);
                best = best.max(q.measure() / (chi * chi) * v);
            }
        }
    }
    Ok(best.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyProjection {
    /// Coefficients in powers of `(x − z_Q)`, lowest degree first.
    pub coefficients: Vec<Complex64>,
    /// `f − P_Q^d f` on the samples of `Q`, in order.
    pub residual: Vec<Complex64>,
}

fn legendre_column(u: &[f64], k: usize) -> Vec<f64> {
    u.iter()
        .map(|&x| {
            let (mut p0, mut p1) = (1.0, x);
            if k == 0 {
                return p0;
            }
            for n in 1..k {
                let p2 = ((2 * n + 1) as f64 * x * p1 - n as f64 * p0) / (n + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            p1
        })
        .collect()
}

/// Monomial coefficients (in `u`) of the Legendre polynomial `P_k`.
fn legendre_monomials(k: usize) -> Vec<f64> {
    let mut p0 = vec![1.0];
    if k == 0 {
        return p0;
    }
    let mut p1 = vec![0.0, 1.0];
    for n in 1..k {
        let mut p2 = vec![0.0; n + 2];
        for (i, c) in p1.iter().enumerate() {
            p2[i + 1] += (2 * n + 1) as f64 * c / (n + 1) as f64;
        }
        for (i, c) in p0.iter().enumerate() {
            p2[i] -= n as f64 * c / (n + 1) as f64;
        }
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Discrete least-squares projection of `f|_Q` onto polynomials of degree `≤ d`,
/// solved in a shifted Legendre basis on `Q`.
pub fn poly_project(f: &Signal, q: &DyadicInterval, d: usize) -> Result<PolyProjection> {
    let count = q.sample_count();
    if count < d + 1 {
        return Err(Error::Precondition(format!(
            "{q} has {count} samples, degree {d} needs {}",
            d + 1
        )));
    }
    let h = f.grid().spacing();
    let len = q.length();
    // u ∈ [−1, 1) over Q.
    let u: Vec<f64> = (0..count).map(|o| 2.0 * (o as f64 * h) / len - 1.0).collect();
    let mut basis = DMatrix::<f64>::zeros(count, d + 1);
    for k in 0..=d {
        for (r, v) in legendre_column(&u, k).into_iter().enumerate() {
            basis[(r, k)] = v;
        }
    }
    let svd = basis.clone().svd(true, true);
    let vals = &f.values()[q.sample_range()];
    let solve = |rhs: Vec<f64>| -> Result<DVector<f64>> {
        svd.solve(&DVector::from_vec(rhs), 1e-14)
            .map_err(|e| Error::Numeric(format!("least squares failed: {e}")))
    };
    let c_re = solve(vals.iter().map(|v| v.re).collect())?;
    let c_im = solve(vals.iter().map(|v| v.im).collect())?;
    let fit_re = &basis * &c_re;
    let fit_im = &basis * &c_im;
    let residual = vals
        .iter()
        .enumerate()
        .map(|(r, v)| v - Complex64::new(fit_re[r], fit_im[r]))
        .collect();
    // u = a y − 1 with y = x − z_Q and a = 2/ℓ(Q).
    let a = 2.0 / len;
    let mut coefficients = vec![Complex64::new(0.0, 0.0); d + 1];
    for k in 0..=d {
        let ck = Complex64::new(c_re[k], c_im[k]);
        for (i, mono) in legendre_monomials(k).iter().enumerate() {
            // (a y − 1)^i = Σ_r C(i, r) a^r y^r (−1)^{i−r}
            for r in 0..=i {
                let sign = if (i - r) % 2 == 0 { 1.0 } else { -1.0 };
                coefficients[r] += ck * mono * binomial(i, r) * a.powi(r as i32) * sign;
            }
        }
    }
    Ok(PolyProjection { coefficients, residual })
}

/// `sup_Q (|Q|/‖χ_Q‖_{p(·)}) ((1/|Q|) ∫_Q |f − P_Q^d f|^q)^{1/q}` over dyadic `Q`
/// with at least `d + 1` samples.
pub fn campanato_norm(f: &Signal, p: &ExponentFunction, q: f64, d: usize) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Precondition(format!("Campanato exponent q must lie in [1, ∞), got {q}")));
    }
    let grid = f.grid();
    let tree = build_dyadic_tree(grid, 0, grid.log2_size())?;
    let values: Vec<f64> = tree
        .par_iter()
        .filter(|cube| cube.sample_count() > d)
        .map(|cube| -> Result<f64> {
            let proj = poly_project(f, cube, d)?;
            let n = proj.residual.len() as f64;
            let osc = (proj.residual.iter().map(|r| r.norm().powf(q)).sum::<f64>() / n).powf(1.0 / q);
            Ok(cube.measure() / p.dyadic_indicator_norm(cube) * osc)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// `Δ_h^{k} f(x_i)` with `h = step/N`, periodic.
pub fn iterated_difference(values: &[Complex64], i: usize, step: usize, order: usize) -> Complex64 {
    let n = values.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..=order {
        let sign = if (order - r).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += values[(i + r * step) % n] * binomial(order, r) * sign;
    }
    acc
}

/// `sup_{x, h≠0} (|Q|/‖χ_Q‖_{p(·)}) |Δ_h^{d+1} f(x)|` with `Q = Q(x, |h|)` the
/// grid interval of measure `min(2|h|, 1)` centered at `x`. Only `h > 0` is
/// scanned: `|Δ_{−h}^{d+1} f(x)| = |Δ_h^{d+1} f(x − (d+1)h)|`.
pub fn zygmund_norm(f: &Signal, p: &ExponentFunction, d: usize) -> Result<f64> {
    let grid = f.grid();
    let n = grid.size();
    let vals = f.values();
    let best = (1..=n / 2)
        .into_par_iter()
        .map(|k| {
            let width = (2 * k).min(n);
            let weight_const = p.constant_value().map(|p0| {
                let m = width as f64 / n as f64;
                m / m.powf(1.0 / p0)
            });
            let mut local = 0.0f64;
            for i in 0..n {
                let diff = iterated_difference(vals, i, k, d + 1).norm();
                if diff == 0.0 {
                    continue;
                }
                let w = weight_const.unwrap_or_else(|| {
                    let span = TorusInterval::new(grid, (i + n - k) % n, width);
                    span.measure() / indicator_norm(p, &span)
                });
                local = local.max(w * diff);
            }
            local
        })
        .collect::<Vec<f64>>();
    Ok(best.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::littlewood_paley::WindowKind;

    fn grid(j: u32) -> Grid {
        Grid::new(j).unwrap()
    }

    #[test]
    fn hardy_norm_basics() {
        let g = grid(8);
        let fam = KernelFamily::standard(g, 1, 6, WindowKind::MeyerSmooth).unwrap();
        let p1 = ExponentFunction::constant(g, 1.0).unwrap();
        assert_eq!(hardy_norm(&Signal::zeros(g), &p1, &fam).unwrap(), 0.0);
        let offset = Signal::constant(g, Complex64::new(1.0, 0.0));
        assert!(matches!(hardy_norm(&offset, &p1, &fam), Err(Error::Precondition(_))));
        let two = ExponentFunction::constant(g, 2.0).unwrap();
        let f = fam.project(&Signal::from_real_fn(g, |x| (9.0 * x).sin() + (50.0 * x * x).cos()));
        let h = hardy_norm_with(&f, &two, &fam, ProbePolicy::Left, Lattice::Full).unwrap();
        assert!((h - f.l2_norm()).abs() <= 1e-9 * f.l2_norm());
        // alias-free shifted lattice also reproduces the L2 norm
        let h = hardy_norm(&f, &two, &fam).unwrap();
        assert!((h - f.l2_norm()).abs() <= 1e-9 * f.l2_norm());
    }

    #[test]
    fn s_and_c_closed_forms() {
        let g = grid(6);
        let p1 = ExponentFunction::constant(g, 1.0).unwrap();
        let q0 = DyadicInterval::new(g, 2, 1).unwrap();
        let mut field = CoeffField::new((0, 6));
        field.insert(q0, Complex64::new(1.0, 0.0)).unwrap();
        let s = seq_s_norm(&field, &p1).unwrap();
        let c = seq_c_norm(&field, &p1).unwrap();
        assert!((s - 0.5).abs() < 1e-9);
        assert!((c - 2.0).abs() < 1e-12);
        assert!((field.pairing(&field).re / (s * c) - 1.0).abs() < 1e-9);
        let empty = CoeffField::new((0, 6));
        assert_eq!(seq_s_norm(&empty, &p1).unwrap(), 0.0);
        assert_eq!(seq_c_norm(&empty, &p1).unwrap(), 0.0);
        let scaled = field.scaled(Complex64::new(0.0, -3.0));
        assert!((seq_c_norm(&scaled, &p1).unwrap() - 6.0).abs() < 1e-12);
        assert!((seq_s_norm(&scaled, &p1).unwrap() - 1.5).abs() < 1e-9);
        let mut more = field.clone();
        more.insert(DyadicInterval::new(g, 4, 9).unwrap(), Complex64::new(0.1, 0.0)).unwrap();
        assert!(seq_c_norm(&more, &p1).unwrap() >= c);
    }

    #[test]
    fn s_norm_single_entry_constant_exponent() {
        let g = grid(7);
        for p0 in [0.5, 0.8, 1.5] {
            let p = ExponentFunction::constant(g, p0).unwrap();
            let q0 = DyadicInterval::new(g, 3, 2).unwrap();
            let mut field = CoeffField::new((0, 7));
            field.insert(q0, Complex64::new(1.0, 0.0)).unwrap();
            let expect = q0.measure().powf(1.0 / p0 - 0.5);
            assert!((seq_s_norm(&field, &p).unwrap() - expect).abs() <= 1e-9 * expect);
        }
    }

    #[test]
    fn polynomial_projection() {
        let g = grid(8);
        let q = DyadicInterval::new(g, 2, 1).unwrap();
        let lin = Signal::from_real_fn(g, |x| 3.0 * x - 0.7);
        let pr = poly_project(&lin, &q, 1).unwrap();
        assert!(pr.residual.iter().all(|r| r.norm() < 1e-12));
        assert!((pr.coefficients[0].re - (3.0 * 0.25 - 0.7)).abs() < 1e-12);
        assert!((pr.coefficients[1].re - 3.0).abs() < 1e-11);
        let f = Signal::from_real_fn(g, |x| (5.0 * x).sin());
        let pr = poly_project(&f, &q, 0).unwrap();
        let mean: f64 = f.re()[q.sample_range()].iter().sum::<f64>() / 64.0;
        assert!((pr.coefficients[0].re - mean).abs() < 1e-13);
        assert!(poly_project(&f, &DyadicInterval::new(g, 8, 0).unwrap(), 1).is_err());
    }

    #[test]
    fn projection_of_square_converges_to_continuum() {
        // continuum: x² on [0,1) projects to x − 1/6
        let mut last = f64::INFINITY;
        for j in [6, 8, 10] {
            let g = grid(j);
            let f = Signal::from_real_fn(g, |x| x * x);
            let pr = poly_project(&f, &DyadicInterval::root(g), 1).unwrap();
            let err = (pr.coefficients[0].re + 1.0 / 6.0).abs() + (pr.coefficients[1].re - 1.0).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn residual_is_orthogonal_to_polynomials() {
        let g = grid(7);
        let f = Signal::from_real_fn(g, |x| (17.0 * x).cos() + x.powi(5));
        let q = DyadicInterval::new(g, 1, 1).unwrap();
        let pr = poly_project(&f, &q, 3).unwrap();
        let xs: Vec<f64> = q.sample_range().map(|i| g.point(i) - q.anchor()).collect();
        for a in 0..=3 {
            let m: f64 = pr.residual.iter().zip(&xs).map(|(r, x)| r.re * x.powi(a)).sum();
            assert!(m.abs() < 1e-10, "moment {a}: {m}");
        }
    }

    #[test]
    fn campanato_and_zygmund_vanish_on_constants() {
        let g = grid(6);
        let p = ExponentFunction::sinusoid(g, 0.9, 0.05).unwrap();
        let c = Signal::constant(g, Complex64::new(2.0, 0.0));
        assert!(campanato_norm(&c, &p, 2.0, 0).unwrap() < 1e-14);
        assert_eq!(zygmund_norm(&c, &p, 0).unwrap(), 0.0);
        assert_eq!(zygmund_norm(&c, &p, 2).unwrap(), 0.0);
        assert!(campanato_norm(&c, &p, 0.5, 0).is_err());
        let quad = Signal::from_real_fn(g, |x| x * x - x);
        assert!(campanato_norm(&quad, &p, 2.0, 2).unwrap() < 1e-12);
    }

    #[test]
    fn second_difference_kills_lines_without_wrap() {
        let g = grid(6);
        let f = Signal::from_real_fn(g, |x| 2.0 * x + 1.0);
        for k in 1..10 {
            for i in 0..(64 - 2 * k) {
                assert!(iterated_difference(f.values(), i, k, 2).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn campanato_and_zygmund_are_refinement_stable_for_sine() {
        let p = |g| ExponentFunction::constant(g, 1.0).unwrap();
        let s = |g| Signal::from_real_fn(g, |x| (2.0 * std::f64::consts::PI * x).sin());
        let (g8, g10) = (grid(8), grid(10));
        let c8 = campanato_norm(&s(g8), &p(g8), 2.0, 1).unwrap();
        let c10 = campanato_norm(&s(g10), &p(g10), 2.0, 1).unwrap();
        assert!(c8 > 0.0 && (c8 - c10).abs() <= 0.1 * c10);
        let z8 = zygmund_norm(&s(g8), &p(g8), 1).unwrap();
        let z10 = zygmund_norm(&s(g10), &p(g10), 1).unwrap();
        assert!(z8 > 0.0 && (z8 - z10).abs() <= 0.1 * z10);
    }
}
