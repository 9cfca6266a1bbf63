//! Time-domain covariance of the effective receiver noise.
//!
//! Repeater `l` forwards its own input noise through its repeater-BS
//! channel, so the BS sees coloured noise with covariance
//! `alpha_l^2 D_l`, where `D_l` depends only on the lag `r1 - r2`:
//!
//! `d_l(lag) = N0 sum_i sum_j a_i a_j exp(-j 2 pi f_c (tau_i - tau_j)) sinc(lag - B (tau_i - tau_j))`.
//!
//! The total covariance adds the white BS receiver noise:
//! `D = sum_l alpha_l^2 D_l + N0 I`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::LinkProfile;
use crate::taps::{carrier_phase, sinc, AmplificationVector};
use crate::{Error, Result};

pub fn noise_cross_term(bs_link: &LinkProfile, lag: i64, bandwidth: f64, f_c: f64, n0: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for pi in &bs_link.paths {
        for pj in &bs_link.paths {
            let dtau = pi.delay - pj.delay;
            let weight = pi.attenuation * pj.attenuation * sinc(lag as f64 - bandwidth * dtau);
            acc += carrier_phase(f_c, dtau) * weight;
        }
    }
    acc * n0
}

/// Hermitian Toeplitz matrix stored by its first column: entry
/// `(r1, r2)` is `lags[r1 - r2]` for `r1 >= r2` and its conjugate mirror
/// otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzHermitian {
    lags: Vec<Complex64>,
}

impl ToeplitzHermitian {
    pub fn from_lags(mut lags: Vec<Complex64>) -> Self {
        if let Some(first) = lags.first_mut() {
            first.im = 0.0;
        }
        Self { lags }
    }

    pub fn size(&self) -> usize {
        self.lags.len()
    }

    pub fn lags(&self) -> &[Complex64] {
        &self.lags
    }

    pub fn get(&self, r1: usize, r2: usize) -> Complex64 {
        if r1 >= r2 {
            self.lags[r1 - r2]
        } else {
            self.lags[r2 - r1].conj()
        }
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let s = self.size();
        DMatrix::from_fn(s, s, |r1, r2| self.get(r1, r2))
    }
}

/// `D_l` for one repeater-BS link, `S x S`.
pub fn build_repeater_covariance(
    bs_link: &LinkProfile,
    subcarriers: usize,
    bandwidth: f64,
    f_c: f64,
    n0: f64,
) -> ToeplitzHermitian {
    let lags = (0..subcarriers as i64)
        .map(|lag| noise_cross_term(bs_link, lag, bandwidth, f_c, n0))
        .collect();
    ToeplitzHermitian::from_lags(lags)
}

/// Per-repeater covariance blocks sharing one noise PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub n0: f64,
    pub subcarriers: usize,
    pub blocks: Vec<ToeplitzHermitian>,
}

impl NoiseModel {
    pub fn new(rep_to_bs: &[LinkProfile], subcarriers: usize, bandwidth: f64, f_c: f64, n0: f64) -> Self {
        let blocks = rep_to_bs
            .iter()
            .map(|link| build_repeater_covariance(link, subcarriers, bandwidth, f_c, n0))
            .collect();
        Self {
            n0,
            subcarriers,
            blocks,
        }
    }

    /// Lags of `D = sum_l alpha_l^2 D_l + N0 I`.
    pub fn total_lags(&self, alpha: &AmplificationVector) -> Result<ToeplitzHermitian> {
        if alpha.len() != self.blocks.len() {
            return Err(Error::LengthMismatch {
                expected: self.blocks.len(),
                got: alpha.len(),
            });
        }
        let mut lags = vec![Complex64::new(0.0, 0.0); self.subcarriers];
        lags[0].re = self.n0;
        for (block, &a) in self.blocks.iter().zip(alpha.as_slice()) {
            if a == 0.0 {
                continue;
            }
            let w = a * a;
            lags.iter_mut().zip(block.lags()).for_each(|(t, d)| *t += d * w);
        }
        Ok(ToeplitzHermitian::from_lags(lags))
    }

    pub fn total(&self, alpha: &AmplificationVector) -> Result<DMatrix<Complex64>> {
        Ok(self.total_lags(alpha)?.to_matrix())
    }
}

/// Dense `D = sum_l alpha_l^2 D_l + N0 I_S`.
pub fn total_covariance(
    blocks: &[ToeplitzHermitian],
    alpha: &AmplificationVector,
    n0: f64,
    subcarriers: usize,
) -> Result<DMatrix<Complex64>> {
    if alpha.len() != blocks.len() {
        return Err(Error::LengthMismatch {
            expected: blocks.len(),
            got: alpha.len(),
        });
    }
    let mut d = DMatrix::<Complex64>::identity(subcarriers, subcarriers) * Complex64::new(n0, 0.0);
    for (block, &a) in blocks.iter().zip(alpha.as_slice()) {
        d += block.to_matrix() * Complex64::new(a * a, 0.0);
    }
    // exact Hermitian symmetry
    let adj = d.adjoint();
    Ok((d + adj) * Complex64::new(0.5, 0.0))
}
