//! Seeded random inputs. Every trial draws from its own ChaCha20 stream
//! `(seed, trial)`, so results do not depend on how trials are scheduled.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{Error, Result};
use crate::grid::{CoeffField, ExponentFunction, Grid, Signal};
use crate::littlewood_paley::KernelFamily;
use crate::phi_transform::synthesize;

/// Identifier written into reports.
pub const RNG_ALGORITHM: &str = "chacha20";

pub fn stream(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn white_noise(grid: Grid, rng: &mut impl Rng) -> Signal {
    let v: Vec<f64> = (0..grid.size()).map(|_| StandardNormal.sample(rng)).collect();
    Signal::from_real(grid, &v).expect("grid-sized")
}

/// Real white noise projected onto the covered bands, unit L² norm.
pub fn band_noise(fam: &KernelFamily, rng: &mut impl Rng) -> Signal {
    let f = fam.project(&white_noise(fam.grid(), rng));
    let n = f.l2_norm();
    f.scaled(Complex64::new(1.0 / n, 0.0))
}

/// Sparse field on the family's coefficient lattice: each entry is kept
/// with probability `density` and drawn from a Student-t law with `dof`
/// degrees of freedom (heavy tailed for small `dof`). At least one entry
/// is always present.
pub fn sparse_heavy_field(fam: &KernelFamily, rng: &mut impl Rng, density: f64, dof: f64) -> Result<CoeffField> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Precondition(format!("density must lie in (0, 1], got {density}")));
    }
    let t = StudentT::new(dof).map_err(|e| Error::Precondition(format!("bad degrees of freedom: {e}")))?;
    let lattice = fam.coefficient_lattice()?;
    let lo = fam.sample_scale(fam.j_min())?;
    let hi = fam.sample_scale(fam.j_max())?;
    let mut field = CoeffField::new((lo, hi));
    for q in &lattice {
        if rng.random::<f64>() < density {
            field.insert(*q, Complex64::new(t.sample(rng), 0.0))?;
        }
    }
    if field.is_empty() {
        let q = lattice[rng.random_range(0..lattice.len())];
        field.insert(q, Complex64::new(t.sample(rng), 0.0))?;
    }
    Ok(field)
}

/// `T_ψ` of a sparse heavy-tailed field, unit L² norm.
pub fn heavy_band_signal(fam: &KernelFamily, rng: &mut impl Rng) -> Result<Signal> {
    let field = sparse_heavy_field(fam, rng, 0.05, 1.5)?;
    let f = synthesize(&field, fam)?;
    let n = f.l2_norm();
    if n == 0.0 {
        return Ok(f);
    }
    Ok(f.scaled(Complex64::new(1.0 / n, 0.0)))
}

/// Alternate Gaussian band noise (even trials) and synthesized heavy fields (odd trials).
pub fn mixed_band_signal(fam: &KernelFamily, rng: &mut impl Rng, trial: u64) -> Result<Signal> {
    if trial.is_multiple_of(2) {
        Ok(band_noise(fam, rng))
    } else {
        heavy_band_signal(fam, rng)
    }
}

/// Smooth random exponent with values in `[lo, hi]`: a few low-frequency
/// cosines rescaled onto the interval.
pub fn smooth_exponent(grid: Grid, rng: &mut impl Rng, lo: f64, hi: f64) -> Result<ExponentFunction> {
    let modes: Vec<(f64, f64)> = (1..=3)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0)))
        .collect();
    let raw: Vec<f64> = grid
        .points()
        .map(|x| {
            modes
                .iter()
                .enumerate()
                .map(|(k, (a, ph))| a * (2.0 * std::f64::consts::PI * ((k + 1) as f64 * x + ph)).cos())
                .sum()
        })
        .collect();
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (max - min).max(f64::MIN_POSITIVE);
    ExponentFunction::new(grid, raw.iter().map(|v| lo + (hi - lo) * (v - min) / span).collect())
}
