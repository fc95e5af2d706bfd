//! Slow reference evaluations that share no code path with the solvers they check.

use num_complex::Complex64;

use crate::grid::{build_dyadic_tree, DyadicInterval, ExponentFunction, Signal};
use crate::littlewood_paley::KernelFamily;
use crate::phi_transform::DenseOperators;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Luxemburg norm as the minimizer of `|ρ(e^t) − 1|` by golden-section search,
/// where `ρ(λ) = (1/N) Σ (|f_i|/λ)^{p_i}` is summed directly.
pub fn golden_section_norm(moduli: &[f64], exponent: &[f64]) -> f64 {
    let n = moduli.len() as f64;
    let max = moduli.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let p_min = exponent.iter().copied().fold(f64::INFINITY, f64::min);
    let rho = |t: f64| -> f64 {
        let lam = t.exp();
        moduli
            .iter()
            .zip(exponent)
            .map(|(&a, &p)| if a == 0.0 { 0.0 } else { (a / lam).powf(p) })
            .sum::<f64>()
            / n
    };
    let f = |t: f64| (rho(t) - 1.0).abs();
    // at the lower end the largest sample alone contributes at least 1
    let mut a = max.ln() - n.ln() / p_min - 1.0;
    let mut b = max.ln() + 1.0;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if b - a < 1e-15 * (1.0 + b.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    (0.5 * (a + b)).exp()
}

/// `‖χ_Q‖_{p(·)}` through [`golden_section_norm`] on the indicator.
pub fn indicator_norm_oracle(p: &ExponentFunction, q: &DyadicInterval) -> f64 {
    let mut chi = vec![0.0; p.grid().size()];
    for v in &mut chi[q.sample_range()] {
        *v = 1.0;
    }
    golden_section_norm(&chi, p.samples())
}

/// Integral-form Carleson norm by explicit double loop over `P` and `Q ⊆ P`,
/// with coefficients `⟨g, ψ_Q⟩` taken from the dense synthesis matrix.
pub fn carleson_oracle(g: &Signal, p: &ExponentFunction, fam: &KernelFamily, dense: &DenseOperators) -> f64 {
    let n = g.len();
    let coeffs: Vec<(DyadicInterval, f64)> = dense
        .lattice
        .iter()
        .enumerate()
        .map(|(r, q)| {
            let c: Complex64 = (0..n).map(|i| g.values()[i] * dense.synthesis[(i, r)].conj()).sum::<Complex64>() / n as f64;
            (*q, c.norm_sqr())
        })
        .collect();
    let mut best = 0.0f64;
    for big in build_dyadic_tree(fam.grid(), 0, fam.j_max()).expect("valid scales") {
        let s: f64 = coeffs
            .iter()
            .filter(|(q, _)| big.contains(q) && q.scale - fam.shift() >= big.scale)
            .map(|(_, c)| c)
            .sum();
        if s > 0.0 {
            let chi = indicator_norm_oracle(p, &big);
            best = best.max(big.measure() / (chi * chi) * s);
        }
    }
    best.sqrt()
}

/// `(1/N Σ |f|^{p0})^{1/p0}`.
pub fn lebesgue_norm(f: &Signal, p0: f64) -> f64 {
    (f.abs().iter().map(|a| a.powf(p0)).sum::<f64>() / f.len() as f64).powf(1.0 / p0)
}
