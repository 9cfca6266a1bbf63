//! Brute-force reference implementations.
//!
//! These deliberately avoid the fast paths of the main pipeline: noise is
//! simulated by filtering white noise on an oversampled grid instead of the
//! closed-form lag sums, singular values come from an explicit whitening
//! matrix and a full SVD, the DFT is an explicit matrix, and power
//! allocations are found by exhaustive grid search.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::LinkProfile;
use crate::taps::AmplificationVector;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Fine-grid samples per symbol period `1/B`.
    pub oversampling: usize,
    /// Sinc truncation half-width in symbol periods.
    pub half_width: usize,
    /// Number of length-`S` windows averaged by the Monte-Carlo estimate.
    pub samples: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            oversampling: 16,
            half_width: 40,
            samples: 200_000,
        }
    }
}

fn plain_sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Samples of the forwarding channel `g'(t) = (p * g_bs * delta)(t)` on the
/// fine grid, time-shifted so the earliest path sits at `t = 0`. Returns
/// the first grid index and the samples.
fn forwarding_filter(link: &LinkProfile, bandwidth: f64, f_c: f64, cfg: &OracleConfig) -> (i64, Vec<Complex64>) {
    let first = link.paths.iter().map(|p| p.delay).fold(f64::INFINITY, f64::min);
    let last = link.paths.iter().map(|p| p.delay).fold(f64::NEG_INFINITY, f64::max);
    let m = cfg.oversampling as f64;
    let dt = 1.0 / (m * bandwidth);
    let k_min = -((cfg.half_width * cfg.oversampling) as i64);
    let k_max = ((last - first) / dt).ceil() as i64 + (cfg.half_width * cfg.oversampling) as i64;
    let taps = (k_min..=k_max)
        .map(|k| {
            let t = k as f64 * dt;
            link.paths
                .iter()
                .map(|p| {
                    let rel = p.delay - first;
                    let phase = Complex64::from_polar(1.0, -2.0 * PI * f_c * rel);
                    phase * (p.attenuation * bandwidth.sqrt() * plain_sinc(bandwidth * (t - rel)))
                })
                .sum()
        })
        .collect();
    (k_min, taps)
}

/// Monte-Carlo estimate of the `S x S` time-domain noise covariance at the
/// BS: white repeater input noise filtered by each repeater-BS channel and
/// scaled by `alpha_l`, plus white receiver noise, sampled at rate `B`.
#[allow(clippy::too_many_arguments)]
pub fn mc_noise_covariance<R: Rng + ?Sized>(
    bs_links: &[LinkProfile],
    alpha: &AmplificationVector,
    n0: f64,
    subcarriers: usize,
    bandwidth: f64,
    f_c: f64,
    cfg: &OracleConfig,
    rng: &mut R,
) -> Result<DMatrix<Complex64>> {
    if alpha.len() != bs_links.len() {
        return Err(Error::LengthMismatch {
            expected: bs_links.len(),
            got: alpha.len(),
        });
    }
    let s = subcarriers;
    let out_len = cfg.samples + s - 1;
    let m = cfg.oversampling;
    let dt = 1.0 / (m as f64 * bandwidth);

    let mut noise: Vec<Complex64> = (0..out_len).map(|_| complex_gaussian(rng, n0)).collect();

    for (link, &a) in bs_links.iter().zip(alpha.as_slice()) {
        if a == 0.0 || link.paths.is_empty() {
            continue;
        }
        let (k_min, filter) = forwarding_filter(link, bandwidth, f_c, cfg);
        let k_max = k_min + filter.len() as i64 - 1;
        // w[i] lives at time (i + offset) dt; output r needs w[r m - k].
        let offset = -k_max;
        let fine_len = ((out_len - 1) * m) as i64 - k_min - offset + 1;
        let white: Vec<Complex64> = (0..fine_len).map(|_| complex_gaussian(rng, n0 / dt)).collect();
        let gain = a * dt;
        for (r, out) in noise.iter_mut().enumerate() {
            let base = (r * m) as i64 - offset;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, g) in filter.iter().enumerate() {
                let k = k_min + j as i64;
                acc += g * white[(base - k) as usize];
            }
            *out += acc * gain;
        }
    }

    let mut cov = DMatrix::<Complex64>::zeros(s, s);
    for t in 0..cfg.samples {
        let window = &noise[t..t + s];
        for r2 in 0..s {
            let c = window[r2].conj();
            for r1 in 0..s {
                cov[(r1, r2)] += window[r1] * c;
            }
        }
    }
    Ok(cov / Complex64::new(cfg.samples as f64, 0.0))
}

/// Explicit unitary DFT matrix, `F[nu, r] = exp(-j 2 pi r nu / S) / sqrt(S)`.
pub fn dft_matrix(s: usize) -> DMatrix<Complex64> {
    let norm = 1.0 / (s as f64).sqrt();
    DMatrix::from_fn(s, s, |nu, r| {
        Complex64::from_polar(norm, -2.0 * PI * ((r * nu) % s) as f64 / s as f64)
    })
}

/// `F D F^H` by explicit matrix products.
pub fn frequency_noise_cov_explicit(d: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let f = dft_matrix(d.nrows());
    &f * d * f.adjoint()
}

/// Singular values of `Dbar^{-1/2} diag(gains)` via an explicit inverse
/// square root and a full SVD, descending.
pub fn direct_svd_singular_values(gains: &[Complex64], dbar: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let s = gains.len();
    if dbar.nrows() != s {
        return Err(Error::LengthMismatch {
            expected: dbar.nrows(),
            got: s,
        });
    }
    let eig = SymmetricEigen::new(dbar.clone());
    let mut v_scaled = eig.eigenvectors.clone();
    for (j, l) in eig.eigenvalues.iter().enumerate() {
        let w = Complex64::new(1.0 / l.sqrt(), 0.0);
        v_scaled.column_mut(j).iter_mut().for_each(|x| *x *= w);
    }
    let inv_sqrt = v_scaled * eig.eigenvectors.adjoint();
    let mut whitened = inv_sqrt;
    for (j, g) in gains.iter().enumerate() {
        whitened.column_mut(j).iter_mut().for_each(|x| *x *= g);
    }
    let mut sv: Vec<f64> = SVD::new(whitened, false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

fn objective(sigma: &[f64], q: &[f64]) -> f64 {
    sigma.iter().zip(q).map(|(s, q)| (1.0 + s * s * q).log2()).sum()
}

/// Best allocation on the simplex grid `{budget * k / resolution}` with
/// `sum q = budget`, by exhaustive enumeration.
pub fn grid_search_allocation(sigma: &[f64], budget: f64, resolution: usize) -> Result<Vec<f64>> {
    let n = sigma.len();
    if n > 4 {
        return Err(Error::GridSearchTooLarge(n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let step = budget / resolution as f64;
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let mut counts = vec![0usize; n];
    fn recurse(
        idx: usize,
        remaining: usize,
        counts: &mut Vec<usize>,
        sigma: &[f64],
        step: f64,
        best: &mut (f64, Vec<f64>),
    ) {
        if idx == counts.len() - 1 {
            counts[idx] = remaining;
            let q: Vec<f64> = counts.iter().map(|&c| c as f64 * step).collect();
            let v = objective(sigma, &q);
            if v > best.0 {
                *best = (v, q);
            }
            return;
        }
        for c in 0..=remaining {
            counts[idx] = c;
            recurse(idx + 1, remaining - c, counts, sigma, step, best);
        }
    }
    recurse(0, resolution, &mut counts, sigma, step, &mut best);
    Ok(best.1)
}

/// Water-filling objective `sum log2(1 + sigma^2 q)`.
pub fn allocation_objective(sigma: &[f64], q: &[f64]) -> f64 {
    objective(sigma, q)
}

/// Relative Frobenius distance `||a - b|| / ||b||`.
pub fn relative_frobenius(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).norm() / b.norm()
}
