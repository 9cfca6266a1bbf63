//! Frequency-domain channel, noise whitening, water-filling and capacity.
//!
//! With `S` subcarriers and cyclic prefix `T`, the OFDM block sees the
//! diagonal channel `H = diag(h[0..S])` and noise covariance
//! `Dbar = F D F^H`, with `F` the unitary DFT. Whitening by `Dbar^{-1/2}`
//! gives a unit-noise channel whose singular values `sigma` set the
//! capacity `C = B / (T + S) sum log2(1 + sigma^2 q)`.
//!
//! The singular values are taken from the Hermitian Gram matrix
//! `H^H Dbar^{-1} H`, which has the same non-zero spectrum as
//! `(Dbar^{-1/2} H)^H (Dbar^{-1/2} H)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyChannel {
    pub gains: Vec<Complex64>,
    pub subcarriers: usize,
    pub cyclic_prefix: usize,
    pub bandwidth: f64,
}

impl FrequencyChannel {
    pub fn from_taps(taps: &[Complex64], subcarriers: usize, bandwidth: f64) -> Result<Self> {
        Ok(Self {
            gains: to_frequency(taps, subcarriers)?,
            subcarriers,
            cyclic_prefix: taps.len().saturating_sub(1),
            bandwidth,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    /// Whitened singular values, descending.
    pub singular_values: Vec<f64>,
    /// Power per eigen-channel, aligned with `singular_values`.
    pub allocation: Vec<f64>,
    /// `None` when every singular value is zero.
    pub water_level: Option<f64>,
    /// `sum log2(1 + sigma^2 q)`, bit per OFDM block.
    pub bits_per_block: f64,
    pub capacity_bps: f64,
}

/// `hbar[nu] = sum_{l=0}^{T} h[l] exp(-j 2 pi l nu / S)`.
pub fn to_frequency(taps: &[Complex64], subcarriers: usize) -> Result<Vec<Complex64>> {
    let t = taps.len().saturating_sub(1);
    if t >= subcarriers {
        return Err(Error::CyclicPrefixTooLong {
            taps: t,
            subcarriers,
        });
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); subcarriers];
    buf[..taps.len()].copy_from_slice(taps);
    FftPlanner::new().plan_fft_forward(subcarriers).process(&mut buf);
    Ok(buf)
}

/// `Dbar = F D F^H` with the unitary DFT `F[nu, r] = exp(-j 2 pi r nu / S) / sqrt(S)`.
pub fn frequency_noise_cov(d: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let s = d.nrows();
    assert_eq!(s, d.ncols(), "covariance must be square");
    if s == 0 {
        return d.clone();
    }
    let fft = FftPlanner::new().plan_fft_forward(s);
    let scale = Complex64::new(1.0 / (s as f64).sqrt(), 0.0);
    let apply_f = |m: &mut DMatrix<Complex64>| {
        // column-major storage: each chunk is one column
        for col in m.as_mut_slice().chunks_exact_mut(s) {
            fft.process(col);
            col.iter_mut().for_each(|v| *v *= scale);
        }
    };
    // F D, then F (F D)^H = F D^H F^H = Dbar^H
    let mut x = d.clone();
    apply_f(&mut x);
    let mut y = x.adjoint();
    apply_f(&mut y);
    let adj = y.adjoint();
    (y + adj) * Complex64::new(0.5, 0.0)
}

fn check_finite(values: impl IntoIterator<Item = Complex64>, what: &'static str) -> Result<()> {
    if values.into_iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Eigendecomposition of a Hermitian positive-definite matrix with
/// eigenvalues floored at `floor * max(lambda)`.
#[derive(Debug, Clone)]
pub struct HermitianFactor {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl HermitianFactor {
    pub fn new(m: &DMatrix<Complex64>, floor: f64) -> Result<Self> {
        check_finite(m.iter().copied(), "noise covariance")?;
        let n = m.nrows();
        // normalize so the eigensolver works on O(1) entries
        let scale = (0..n).map(|i| m[(i, i)].re.abs()).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let eig = SymmetricEigen::new(m / Complex64::new(scale, 0.0));
        let max = eig.eigenvalues.iter().copied().fold(f64::MIN, f64::max);
        let min_allowed = max * floor;
        let eigenvalues = eig.eigenvalues.iter().map(|&l| l.max(min_allowed) * scale).collect();
        Ok(Self {
            eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    /// `V f(Lambda) V^H`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let w = Complex64::new(f(l), 0.0);
            scaled.column_mut(j).iter_mut().for_each(|v| *v *= w);
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn inverse(&self) -> DMatrix<Complex64> {
        self.apply_fn(|l| 1.0 / l)
    }

    pub fn inverse_sqrt(&self) -> DMatrix<Complex64> {
        self.apply_fn(|l| 1.0 / l.sqrt())
    }
}

/// The whitening matrix `Dbar^{-1/2}`.
pub fn whitener(dbar: &DMatrix<Complex64>, floor: f64) -> Result<DMatrix<Complex64>> {
    Ok(HermitianFactor::new(dbar, floor)?.inverse_sqrt())
}

/// `H^H Dbar^{-1} H` for diagonal `H = diag(gains)`.
fn whitened_gram(gains: &[Complex64], dbar: &DMatrix<Complex64>, floor: f64) -> Result<DMatrix<Complex64>> {
    check_finite(gains.iter().copied(), "channel gains")?;
    if gains.len() != dbar.nrows() {
        return Err(Error::LengthMismatch {
            expected: dbar.nrows(),
            got: gains.len(),
        });
    }
    let mut gram = HermitianFactor::new(dbar, floor)?.inverse();
    let s = gains.len();
    for b in 0..s {
        for a in 0..s {
            gram[(a, b)] = gains[a].conj() * gram[(a, b)] * gains[b];
        }
    }
    let adj = gram.adjoint();
    Ok((gram + adj) * Complex64::new(0.5, 0.0))
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Singular values of `Dbar^{-1/2} diag(gains)`, descending.
pub fn whitened_singular_values(gains: &[Complex64], dbar: &DMatrix<Complex64>, floor: f64) -> Result<Vec<f64>> {
    let gram = whitened_gram(gains, dbar, floor)?;
    let scale = (0..gram.nrows()).map(|i| gram[(i, i)].re).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(vec![0.0; gains.len()]);
    }
    let eig = SymmetricEigen::new(gram / Complex64::new(scale, 0.0));
    Ok(sorted_desc(
        eig.eigenvalues.iter().map(|&l| (l.max(0.0) * scale).sqrt()).collect(),
    ))
}

/// Capacity-achieving input covariance `V diag(q) V^H`, where `V` holds the
/// right singular vectors of the whitened channel ordered by descending
/// singular value and `allocation` is aligned with that order.
pub fn input_covariance(
    gains: &[Complex64],
    dbar: &DMatrix<Complex64>,
    allocation: &[f64],
    floor: f64,
) -> Result<DMatrix<Complex64>> {
    let gram = whitened_gram(gains, dbar, floor)?;
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let s = gains.len();
    let mut k = DMatrix::<Complex64>::zeros(s, s);
    for (&idx, &q) in order.iter().zip(allocation) {
        let v = eig.eigenvectors.column(idx);
        k += v * v.adjoint() * Complex64::new(q, 0.0);
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterFilling {
    pub allocation: Vec<f64>,
    /// `None` when no channel has positive gain.
    pub water_level: Option<f64>,
}

/// `q = max(0, mu - 1 / sigma^2)` with `sum q = total_power`; channels with
/// `sigma = 0` get nothing.
pub fn waterfill(sigma: &[f64], total_power: f64) -> WaterFilling {
    let mut inverse: Vec<(usize, f64)> = sigma
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > 0.0)
        .map(|(i, s)| (i, 1.0 / (s * s)))
        .collect();
    let mut allocation = vec![0.0; sigma.len()];
    if inverse.is_empty() {
        return WaterFilling {
            allocation,
            water_level: None,
        };
    }
    inverse.sort_by(|a, b| a.1.total_cmp(&b.1));

    let n = inverse.len();
    let mut cumulative = 0.0;
    let mut mu = 0.0;
    for k in 1..=n {
        cumulative += inverse[k - 1].1;
        mu = (total_power + cumulative) / k as f64;
        if k == n || mu <= inverse[k].1 {
            break;
        }
    }
    for &(i, inv) in &inverse {
        allocation[i] = (mu - inv).max(0.0);
    }
    WaterFilling {
        allocation,
        water_level: Some(mu),
    }
}

/// `sum log2(1 + sigma^2 q)`.
pub fn bits_per_block(sigma: &[f64], allocation: &[f64]) -> f64 {
    sigma
        .iter()
        .zip(allocation)
        .map(|(s, q)| (s * s * q).ln_1p() / std::f64::consts::LN_2)
        .sum()
}

/// `C = B / (T + S) sum log2(1 + sigma^2 q)` in bit/s.
pub fn capacity(sigma: &[f64], allocation: &[f64], bandwidth: f64, subcarriers: usize, cyclic_prefix: usize) -> f64 {
    bandwidth / (cyclic_prefix + subcarriers) as f64 * bits_per_block(sigma, allocation)
}

/// Full chain from time-domain taps and noise covariance to capacity.
/// `signal_psd` is the average power per time-domain symbol `q`; the
/// water-filling budget is `q S`.
pub fn evaluate(
    taps: &[Complex64],
    noise: &DMatrix<Complex64>,
    bandwidth: f64,
    signal_psd: f64,
    eigen_floor: f64,
) -> Result<CapacityResult> {
    let subcarriers = noise.nrows();
    let channel = FrequencyChannel::from_taps(taps, subcarriers, bandwidth)?;
    let dbar = frequency_noise_cov(noise);
    let singular_values = whitened_singular_values(&channel.gains, &dbar, eigen_floor)?;
    let wf = waterfill(&singular_values, signal_psd * subcarriers as f64);
    let bits = bits_per_block(&singular_values, &wf.allocation);
    Ok(CapacityResult {
        capacity_bps: bandwidth / (channel.cyclic_prefix + subcarriers) as f64 * bits,
        bits_per_block: bits,
        singular_values,
        allocation: wf.allocation,
        water_level: wf.water_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hpd(s: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = StreamKey::root(seed).rng();
        let a = DMatrix::from_fn(s, s, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        &a * a.adjoint() + DMatrix::identity(s, s) * c(0.1, 0.0)
    }

    #[test]
    fn impulse_and_delay() {
        let h = to_frequency(&[c(1.0, 0.0)], 8).unwrap();
        assert!(h.iter().all(|v| (*v - c(1.0, 0.0)).norm() < 1e-15));
        let h = to_frequency(&[c(0.0, 0.0), c(1.0, 0.0)], 8).unwrap();
        for (nu, v) in h.iter().enumerate() {
            assert!((*v - Complex64::cis(-2.0 * PI * nu as f64 / 8.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn cyclic_prefix_must_be_shorter_than_block() {
        let taps = vec![c(1.0, 0.0); 9];
        assert!(matches!(
            to_frequency(&taps, 8),
            Err(Error::CyclicPrefixTooLong { taps: 8, subcarriers: 8 })
        ));
        assert!(to_frequency(&taps[..8], 8).is_ok());
    }

    #[test]
    fn to_frequency_matches_direct_sum() {
        let taps: Vec<Complex64> = (0..5).map(|l| c(l as f64 * 0.3 - 0.4, 0.1 * l as f64)).collect();
        let s = 12;
        let h = to_frequency(&taps, s).unwrap();
        for (nu, hv) in h.iter().enumerate() {
            let direct: Complex64 = taps
                .iter()
                .enumerate()
                .map(|(l, t)| t * Complex64::cis(-2.0 * PI * (l * nu) as f64 / s as f64))
                .sum();
            assert!((hv - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn frequency_cov_of_white_noise() {
        let d = DMatrix::<Complex64>::identity(16, 16) * c(3.0, 0.0);
        let dbar = frequency_noise_cov(&d);
        assert!((dbar - d).norm() < 1e-13);
    }

    #[test]
    fn frequency_cov_preserves_spectrum() {
        let d = random_hpd(9, 4);
        let dbar = frequency_noise_cov(&d);
        assert!((dbar.trace() - d.trace()).norm() < 1e-12 * d.trace().norm());
        let mut a: Vec<f64> = SymmetricEigen::new(d).eigenvalues.iter().copied().collect();
        let mut b: Vec<f64> = SymmetricEigen::new(dbar).eigenvalues.iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9 * x.abs());
        }
    }

    #[test]
    fn white_noise_singular_values() {
        let n0 = 2e-20;
        let gains = vec![c(3e-7, 1e-7), c(0.0, -2e-7), c(1e-8, 0.0), c(5e-7, 5e-7)];
        let dbar = DMatrix::<Complex64>::identity(4, 4) * c(n0, 0.0);
        let sigma = whitened_singular_values(&gains, &dbar, 1e-14).unwrap();
        let mut expected: Vec<f64> = gains.iter().map(|g| g.norm() / n0.sqrt()).collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        for (s, e) in sigma.iter().zip(&expected) {
            assert!((s / e - 1.0).abs() < 1e-9, "{s} vs {e}");
        }
    }

    #[test]
    fn zero_channel_has_zero_singular_values() {
        let dbar = random_hpd(5, 1);
        let sigma = whitened_singular_values(&[c(0.0, 0.0); 5], &dbar, 1e-14).unwrap();
        assert_eq!(sigma, vec![0.0; 5]);
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        let dbar = random_hpd(2, 1);
        assert!(matches!(
            whitened_singular_values(&[c(f64::NAN, 0.0), c(1.0, 0.0)], &dbar, 1e-14),
            Err(Error::NonFinite(_))
        ));
        let mut bad = dbar.clone();
        bad[(0, 0)] = c(f64::INFINITY, 0.0);
        assert!(whitened_singular_values(&[c(1.0, 0.0); 2], &bad, 1e-14).is_err());
    }

    #[test]
    fn whitener_whitens() {
        let dbar = random_hpd(12, 8) * c(1e-20, 0.0);
        let w = whitener(&dbar, 1e-14).unwrap();
        let white = &w * &dbar * w.adjoint();
        assert!((white - DMatrix::<Complex64>::identity(12, 12)).norm() < 1e-8);
    }

    #[test]
    fn waterfill_examples() {
        let wf = waterfill(&[1.0, 1.0], 2.0 * 0.7);
        assert!((wf.allocation[0] - 0.7).abs() < 1e-15 && (wf.allocation[1] - 0.7).abs() < 1e-15);

        let wf = waterfill(&[1.0, 0.0], 5.0);
        assert_eq!(wf.allocation, vec![5.0, 0.0]);

        let wf = waterfill(&[1.0, 0.5f64.sqrt()], 3.0);
        assert!((wf.water_level.unwrap() - 3.0).abs() < 1e-12);
        assert!((wf.allocation[0] - 2.0).abs() < 1e-12 && (wf.allocation[1] - 1.0).abs() < 1e-12);

        let wf = waterfill(&[0.0, 0.0], 1.0);
        assert_eq!(wf.allocation, vec![0.0, 0.0]);
        assert_eq!(wf.water_level, None);

        let wf = waterfill(&[2.0, 1.0], 0.0);
        assert_eq!(wf.allocation, vec![0.0, 0.0]);
    }

    #[test]
    fn waterfill_drops_weak_channels() {
        // 1/sigma^2 = [1, 4]; budget 1 -> mu = 2 < 4 so only the first is used
        let wf = waterfill(&[1.0, 0.5], 1.0);
        assert_eq!(wf.allocation, vec![1.0, 0.0]);
        assert_eq!(wf.water_level, Some(2.0));
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity(&[1.0, 2.0], &[0.0, 0.0], 1e6, 2, 1), 0.0);
        let (h, q, n0, s, t, b) = (1e-6f64, 2e-8f64, 2e-20f64, 64usize, 10usize, 9.6e6);
        let sigma = vec![h / n0.sqrt(); s];
        let alloc = vec![q; s];
        let expected = b * s as f64 / (t + s) as f64 * (1.0 + h * h * q / n0).log2();
        assert!((capacity(&sigma, &alloc, b, s, t) / expected - 1.0).abs() < 1e-12);
        assert!((capacity(&sigma, &alloc, 2.0 * b, s, t) / capacity(&sigma, &alloc, b, s, t) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn input_covariance_achieves_capacity() {
        let s = 6;
        let dbar = random_hpd(s, 2);
        let gains: Vec<Complex64> = (0..s).map(|i| c(0.3 + i as f64 * 0.1, -0.2)).collect();
        let sigma = whitened_singular_values(&gains, &dbar, 1e-14).unwrap();
        let wf = waterfill(&sigma, 3.0);
        let k = input_covariance(&gains, &dbar, &wf.allocation, 1e-14).unwrap();
        assert!((k.trace().re - 3.0).abs() < 1e-9);
        // log2 det(I + Hw K Hw^H) equals the water-filled rate
        let w = whitener(&dbar, 1e-14).unwrap();
        let hw = &w * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(gains.clone()));
        let m = DMatrix::<Complex64>::identity(s, s) + &hw * &k * hw.adjoint();
        let logdet: f64 = SymmetricEigen::new(m).eigenvalues.iter().map(|l| l.log2()).sum();
        assert!((logdet - bits_per_block(&sigma, &wf.allocation)).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn waterfill_kkt(sig in proptest::collection::vec(0.0f64..3.0, 1..40), budget in 0.0f64..50.0) {
            let wf = waterfill(&sig, budget);
            let total: f64 = wf.allocation.iter().sum();
            if sig.iter().any(|s| *s > 0.0) {
                prop_assert!((total - budget).abs() <= 1e-9 * budget.max(1.0));
                let mu = wf.water_level.unwrap();
                for (s, q) in sig.iter().zip(&wf.allocation) {
                    prop_assert!(*q >= 0.0);
                    if *s == 0.0 {
                        prop_assert_eq!(*q, 0.0);
                    } else if *q > 0.0 {
                        prop_assert!((mu - 1.0 / (s * s) - q).abs() <= 1e-9 * mu.max(1.0));
                    } else {
                        prop_assert!(1.0 / (s * s) >= mu - 1e-9 * mu.max(1.0));
                    }
                }
                let uniform = vec![budget / sig.len() as f64; sig.len()];
                prop_assert!(bits_per_block(&sig, &wf.allocation) >= bits_per_block(&sig, &uniform) - 1e-12);
            }
        }

        #[test]
        fn to_frequency_is_linear(a in -3.0f64..3.0, seed in 0u64..1000) {
            let mut rng = StreamKey::root(seed).rng();
            let mut draw = || (0..6).map(|_| c(rng.random::<f64>(), rng.random::<f64>())).collect::<Vec<_>>();
            let (h1, h2) = (draw(), draw());
            let mix: Vec<Complex64> = h1.iter().zip(&h2).map(|(x, y)| x * a + y).collect();
            let f1 = to_frequency(&h1, 16).unwrap();
            let f2 = to_frequency(&h2, 16).unwrap();
            let fm = to_frequency(&mix, 16).unwrap();
            for nu in 0..16 {
                prop_assert!((fm[nu] - (f1[nu] * a + f2[nu])).norm() < 1e-12);
            }
        }
    }
}
