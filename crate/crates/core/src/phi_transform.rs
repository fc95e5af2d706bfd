//! Analysis `S_φ f = {⟨f, φ_Q⟩}` and synthesis `T_ψ s = Σ s_Q ψ_Q`, with a
//! dense-matrix oracle and the empirical boundedness reports.
//!
//! For band `j` the intervals `Q` have scale `j + shift`, `z_Q` is the left
//! corner and `ψ_Q(x) = |Q|^{1/2} ψ_j(x − z_Q)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{build_dyadic_tree, CoeffField, DyadicInterval, ExponentFunction, Grid, ProbePolicy, Signal};
use crate::littlewood_paley::{apply_multiplier, band_signals, KernelFamily, Which};
use crate::rng;
use crate::space_norms::{band_probe_samples_at, carleson_sup, cmo_norm, hardy_norm, seq_c_norm, seq_s_norm, CmoForm};

/// Largest grid accepted by [`dense_operators`].
pub const DENSE_MAX_SIZE: usize = 4096;

fn empty_field(fam: &KernelFamily) -> Result<CoeffField> {
    Ok(CoeffField::new((fam.sample_scale(fam.j_min())?, fam.sample_scale(fam.j_max())?)))
}

/// `S_φ f`.
pub fn analyze(f: &Signal, fam: &KernelFamily) -> Result<CoeffField> {
    analyze_with(f, fam, Which::Analysis)
}

/// Coefficients `⟨f, φ_Q⟩` (`Which::Analysis`) or `⟨f, ψ_Q⟩` (`Which::Synthesis`).
pub fn analyze_with(f: &Signal, fam: &KernelFamily, which: Which) -> Result<CoeffField> {
    let bands = band_signals(f, fam, which)?;
    let mut field = empty_field(fam)?;
    for (j, band) in fam.scales().zip(bands) {
        let s = fam.sample_scale(j)?;
        for q in build_dyadic_tree(fam.grid(), s, s)? {
            field.insert(q, band[q.start()] * q.measure().sqrt())?;
        }
    }
    Ok(field)
}

/// `T_ψ s`.
pub fn synthesize(s: &CoeffField, fam: &KernelFamily) -> Result<Signal> {
    let grid = fam.grid();
    let n = grid.size();
    let lo = fam.sample_scale(fam.j_min())?;
    let hi = fam.sample_scale(fam.j_max())?;
    let mut combs: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; fam.scales().count()];
    for (q, v) in s.iter() {
        if q.grid() != grid {
            return Err(Error::Range(format!("{q} is not on the family grid")));
        }
        if q.scale < lo || q.scale > hi {
            return Err(Error::Range(format!("{q} outside family lattice scales [{lo}, {hi}]")));
        }
        let j = q.scale - fam.shift();
        // convolution carries a 1/N quadrature weight
        combs[(j - fam.j_min()) as usize][q.start()] += v * q.measure().sqrt() * n as f64;
    }
    let mut total = vec![Complex64::new(0.0, 0.0); n];
    for (j, comb) in fam.scales().zip(&combs) {
        if comb.iter().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        let mut spec = fft::spectrum(comb);
        for (a, m) in spec.iter_mut().zip(fam.synthesis_hat(j)?) {
            *a *= m;
        }
        for (t, v) in total.iter_mut().zip(fft::inverse(&spec)) {
            *t += v;
        }
    }
    Signal::new(grid, total)
}

/// Explicit matrices of `S_φ` (rows indexed by `lattice`) and `T_ψ`, with
/// kernels evaluated by direct trigonometric sums.
#[derive(Debug, Clone)]
pub struct DenseOperators {
    pub lattice: Vec<DyadicInterval>,
    pub analysis: DMatrix<Complex64>,
    pub synthesis: DMatrix<Complex64>,
}

/// `k(x_i) = Σ_m k̂(m) e^{2πi m x_i}` without an FFT.
fn direct_kernel(hat: &[Complex64]) -> Vec<Complex64> {
    let n = hat.len();
    let twiddle: Vec<Complex64> = (0..n)
        .map(|r| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / n as f64))
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&b| hat[b].norm_sqr() != 0.0)
                .map(|b| hat[b] * twiddle[(b * i) % n])
                .sum()
        })
        .collect()
}

pub fn dense_operators(grid: Grid, fam: &KernelFamily) -> Result<DenseOperators> {
    let n = grid.size();
    if n > DENSE_MAX_SIZE {
        return Err(Error::Resource(format!("dense operators need N ≤ {DENSE_MAX_SIZE}, got {n}")));
    }
    if grid != fam.grid() {
        return Err(Error::Precondition("family lives on a different grid".into()));
    }
    let lattice = fam.coefficient_lattice()?;
    let mut analysis = DMatrix::<Complex64>::zeros(lattice.len(), n);
    let mut synthesis = DMatrix::<Complex64>::zeros(n, lattice.len());
    let mut row = 0;
    for j in fam.scales() {
        let phi = direct_kernel(&fam.analysis_hat(j)?.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
        let psi = direct_kernel(&fam.synthesis_hat(j)?.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
        let s = fam.sample_scale(j)?;
        for q in build_dyadic_tree(grid, s, s)? {
            let z = q.start();
            let w = q.measure().sqrt();
            for i in 0..n {
                let d = (i + n - z) % n;
                // ⟨f, φ_Q⟩ = (1/N) Σ_i f(x_i) conj(φ_Q(x_i))
                analysis[(row, i)] = phi[d].conj() * (w / n as f64);
                synthesis[(i, row)] = psi[d] * w;
            }
            row += 1;
        }
    }
    Ok(DenseOperators { lattice, analysis, synthesis })
}

impl DenseOperators {
    pub fn analyze(&self, f: &Signal, fam: &KernelFamily) -> Result<CoeffField> {
        let v = nalgebra::DVector::from_column_slice(f.values());
        let c = &self.analysis * v;
        let mut field = empty_field(fam)?;
        for (q, x) in self.lattice.iter().zip(c.iter()) {
            field.insert(*q, *x)?;
        }
        Ok(field)
    }

    pub fn synthesize(&self, s: &CoeffField) -> Result<Signal> {
        let coeffs = nalgebra::DVector::from_iterator(self.lattice.len(), self.lattice.iter().map(|q| s.get(q)));
        let v = &self.synthesis * coeffs;
        Signal::new(self.lattice[0].grid(), v.iter().copied().collect())
    }

    /// Spectral norm of `T S − P` with `P` the covered-band projector.
    pub fn projector_discrepancy(&self, fam: &KernelFamily) -> f64 {
        let n = fam.grid().size();
        let proj = direct_kernel(&fam.band_projector().iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
        let mut diff = &self.synthesis * &self.analysis;
        for i in 0..n {
            for k in 0..n {
                diff[(i, k)] -= proj[(i + n - k) % n] / n as f64;
            }
        }
        diff.singular_values().max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconstruction {
    pub error: f64,
    pub degenerate: bool,
}

/// `‖f − T S f‖₂ / ‖f‖₂`.
pub fn reconstruction_error(f: &Signal, fam: &KernelFamily) -> Result<Reconstruction> {
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Ok(Reconstruction { error: 0.0, degenerate: true });
    }
    let back = synthesize(&analyze(f, fam)?, fam)?;
    Ok(Reconstruction {
        error: f.sub(&back).l2_norm() / norm,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorNormReport {
    pub trials_used: usize,
    /// `‖S f‖_s / ‖f‖_H` per trial.
    pub analysis_hardy: Vec<f64>,
    /// `‖T s‖_H / ‖s‖_s`.
    pub synthesis_hardy: Vec<f64>,
    /// `‖S g‖_c / ‖g‖_CMO`.
    pub analysis_cmo: Vec<f64>,
    /// `‖T t‖_CMO / ‖t‖_c`.
    pub synthesis_cmo: Vec<f64>,
    pub maxima: [f64; 4],
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0 && num.is_finite()).then(|| num / den)
}

/// Empirical ratios for `S_φ` and `T_ψ` on seeded random inputs; trial `t`
/// draws from stream `(seed, t)`.
pub fn operator_norm_report(fam: &KernelFamily, p: &ExponentFunction, trials: usize, seed: u64) -> Result<OperatorNormReport> {
    if trials == 0 {
        return Err(Error::Precondition("at least one trial is required".into()));
    }
    let rows: Vec<[Option<f64>; 4]> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<[Option<f64>; 4]> {
            let mut r = rng::stream(seed, t);
            let f = rng::mixed_band_signal(fam, &mut r, t)?;
            let field = rng::sparse_heavy_field(fam, &mut r, 0.1, 2.0)?;
            let sf = analyze(&f, fam)?;
            let tf = synthesize(&field, fam)?;
            Ok([
                ratio(seq_s_norm(&sf, p)?, hardy_norm(&f, p, fam)?),
                ratio(hardy_norm(&tf, p, fam)?, seq_s_norm(&field, p)?),
                ratio(seq_c_norm(&sf, p)?, cmo_norm(&f, p, fam, CmoForm::Integral)?),
                ratio(cmo_norm(&tf, p, fam, CmoForm::Integral)?, seq_c_norm(&field, p)?),
            ])
        })
        .collect::<Result<_>>()?;
    let rows: Vec<[f64; 4]> = rows
        .into_iter()
        .filter_map(|r| Some([r[0]?, r[1]?, r[2]?, r[3]?]))
        .collect();
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let mut maxima = [0.0f64; 4];
    for r in &rows {
        for k in 0..4 {
            maxima[k] = maxima[k].max(r[k]);
        }
    }
    Ok(OperatorNormReport {
        trials_used: rows.len(),
        analysis_hardy: col(0),
        synthesis_hardy: col(1),
        analysis_cmo: col(2),
        synthesis_cmo: col(3),
        maxima,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PpRatio {
    pub ratio: f64,
    pub sup_quantity: f64,
    pub inf_quantity: f64,
    pub degenerate: bool,
}

/// Sup-probe Carleson quantity with kernels `fam_a` over the inf-probe
/// quantity with kernels `fam_b`. Both are sampled on intervals of scale
/// `j + max(shift_a, shift_b)`.
pub fn pp_ratio(f: &Signal, p: &ExponentFunction, fam_a: &KernelFamily, fam_b: &KernelFamily) -> Result<PpRatio> {
    if fam_a.j_min() != fam_b.j_min() || fam_a.j_max() != fam_b.j_max() || fam_a.grid() != fam_b.grid() {
        return Err(Error::Precondition("families must cover the same scales on the same grid".into()));
    }
    let shift = fam_a.shift().max(fam_b.shift());
    let sup = band_probe_samples_at(f, fam_a, Which::Analysis, ProbePolicy::Sup, shift)?;
    let inf = band_probe_samples_at(f, fam_b, Which::Analysis, ProbePolicy::Inf, shift)?;
    let sup_quantity = carleson_sup(&sup, p, fam_a.j_max());
    let inf_quantity = carleson_sup(&inf, p, fam_a.j_max());
    if inf_quantity == 0.0 {
        return Ok(PpRatio { ratio: f64::NAN, sup_quantity, inf_quantity, degenerate: true });
    }
    Ok(PpRatio {
        ratio: sup_quantity / inf_quantity,
        sup_quantity,
        inf_quantity,
        degenerate: false,
    })
}

/// Band-limited `ψ_Q` itself, for direct comparison with [`synthesize`].
pub fn wavelet(fam: &KernelFamily, q: &DyadicInterval) -> Result<Signal> {
    let j = q
        .scale
        .checked_sub(fam.shift())
        .ok_or_else(|| Error::Range(format!("{q} below family lattice")))?;
    let mult: Vec<Complex64> = fam
        .synthesis_hat(j)?
        .iter()
        .enumerate()
        .map(|(b, &v)| {
            let m = fft::frequency(b, fam.grid().size()) as f64;
            Complex64::from_polar(v * q.measure().sqrt(), -2.0 * std::f64::consts::PI * m * q.anchor())
        })
        .collect();
    // a unit impulse at 0 has f̂ ≡ 1, so this inverts the multiplier directly
    Ok(apply_multiplier(&impulse(fam.grid()), &mult))
}

fn impulse(grid: Grid) -> Signal {
    let mut v = vec![Complex64::new(0.0, 0.0); grid.size()];
    v[0] = Complex64::new(grid.size() as f64, 0.0);
    Signal::new(grid, v).expect("grid-sized")
}
