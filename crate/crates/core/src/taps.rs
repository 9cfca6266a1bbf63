//! Symbol-rate tap synthesis.
//!
//! With ideal sinc pulses at rate `B`, a path of amplitude `a` and delay
//! `tau` contributes `a exp(-j 2 pi f_c (tau - eta)) sinc(l + B (eta - tau))`
//! to tap `l`. Direct-link taps `c_d[l]` and the per-repeater taps
//! `c_r,l[l]` are kept apart so the effective channel
//! `h[l] = c_d[l] + sum_l alpha_l c_r,l[l]` can be re-evaluated for any
//! amplification vector without touching the multipath profiles.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{ChannelRealization, LinkProfile};
use crate::{Error, Result};

/// Normalized sinc, `sin(pi x) / (pi x)`, exactly zero at non-zero integers.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let n = x.round();
    let r = x - n;
    if r == 0.0 {
        return 0.0;
    }
    let sign = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
    sign * (PI * r).sin() / (PI * x)
}

/// `exp(-j 2 pi f_c delay)`, with the cycle count reduced before the
/// trigonometric call.
pub fn carrier_phase(carrier_frequency: f64, delay: f64) -> Complex64 {
    let cycles = carrier_frequency * delay;
    let frac = cycles - cycles.round();
    Complex64::cis(-2.0 * PI * frac)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GuardTaps {
    /// Taps before the earliest arrival.
    pub pre: usize,
    /// Taps after the latest arrival.
    pub post: usize,
}

impl GuardTaps {
    pub const fn post_only(post: usize) -> Self {
        Self { pre: 0, post }
    }
}

/// Receiver clock offset and tap count of the discretized channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapWindow {
    /// Clock offset `eta` in seconds; tap 0 samples time `eta`.
    pub eta: f64,
    /// Highest tap index `T`; the window holds `T + 1` taps.
    pub tap_count: usize,
}

impl TapWindow {
    /// Moves the reference `k` symbol periods earlier and grows the window by
    /// `k` taps, keeping its end fixed.
    pub fn extend_front(self, k: usize, bandwidth: f64) -> Self {
        Self {
            eta: self.eta - k as f64 / bandwidth,
            tap_count: self.tap_count + k,
        }
    }

    /// Inverse of [`TapWindow::extend_front`]; `k` is capped at `tap_count`.
    pub fn trim_front(self, k: usize, bandwidth: f64) -> Self {
        let k = k.min(self.tap_count);
        Self {
            eta: self.eta + k as f64 / bandwidth,
            tap_count: self.tap_count - k,
        }
    }

    /// Shrinks the window to at most `max_tap_count`, dropping up to `pre`
    /// leading guard taps first and then taps from the tail.
    pub fn fit(self, max_tap_count: usize, pre: usize, bandwidth: f64) -> Self {
        if self.tap_count <= max_tap_count {
            return self;
        }
        let mut w = self.trim_front((self.tap_count - max_tap_count).min(pre), bandwidth);
        w.tap_count = w.tap_count.min(max_tap_count);
        w
    }
}

/// Earliest and latest composite arrival over the direct paths and every
/// repeater path `tau_ue,i + tau_bs,j + tau_l`.
fn arrival_span(realization: &ChannelRealization, repeater_delays: &[f64]) -> Result<(f64, f64)> {
    let mut span: Option<(f64, f64)> = realization.direct.delay_range();
    let mut widen = |lo: f64, hi: f64| {
        span = Some(match span {
            Some((a, b)) => (a.min(lo), b.max(hi)),
            None => (lo, hi),
        });
    };
    for (l, (up, down)) in realization.ue_to_rep.iter().zip(&realization.rep_to_bs).enumerate() {
        if let (Some((ul, uh)), Some((dl, dh))) = (up.delay_range(), down.delay_range()) {
            let tau_l = repeater_delays.get(l).copied().unwrap_or(0.0);
            widen(ul + dl + tau_l, uh + dh + tau_l);
        }
    }
    span.ok_or(Error::EmptyRealization)
}

/// Anchors `eta` `guard.pre` symbol periods before the earliest arrival and
/// sizes `T` to cover the delay span plus both guards.
pub fn select_reference_and_length(
    realization: &ChannelRealization,
    repeater_delays: &[f64],
    bandwidth: f64,
    guard: GuardTaps,
) -> Result<TapWindow> {
    let (first, last) = arrival_span(realization, repeater_delays)?;
    // 1e-9 tap slack so spans that are whole tap multiples do not round up.
    let span_taps = (bandwidth * (last - first) - 1e-9).ceil().max(0.0) as usize;
    Ok(TapWindow {
        eta: first - guard.pre as f64 / bandwidth,
        tap_count: span_taps + guard.pre + guard.post,
    })
}

fn accumulate_path(taps: &mut [Complex64], amplitude: f64, delay: f64, eta: f64, bandwidth: f64, f_c: f64) {
    let rotation = carrier_phase(f_c, delay - eta) * amplitude;
    let offset = bandwidth * (eta - delay);
    for (l, tap) in taps.iter_mut().enumerate() {
        *tap += rotation * sinc(l as f64 + offset);
    }
}

/// `c_d[l]` for `l = 0..=T`.
pub fn compute_direct_taps(direct: &LinkProfile, window: TapWindow, bandwidth: f64, f_c: f64) -> Vec<Complex64> {
    let mut taps = vec![Complex64::new(0.0, 0.0); window.tap_count + 1];
    for p in &direct.paths {
        accumulate_path(&mut taps, p.attenuation, p.delay, window.eta, bandwidth, f_c);
    }
    taps
}

/// `c_r,l[l]` for `l = 0..=T`: the double sum over UE-repeater path `i` and
/// repeater-BS path `j` with composite delay `tau_ue,i + tau_bs,j + tau_l`.
pub fn compute_repeater_taps(
    ue_link: &LinkProfile,
    bs_link: &LinkProfile,
    tau_l: f64,
    window: TapWindow,
    bandwidth: f64,
    f_c: f64,
) -> Vec<Complex64> {
    let mut taps = vec![Complex64::new(0.0, 0.0); window.tap_count + 1];
    for up in &ue_link.paths {
        for down in &bs_link.paths {
            accumulate_path(
                &mut taps,
                up.attenuation * down.attenuation,
                up.delay + down.delay + tau_l,
                window.eta,
                bandwidth,
                f_c,
            );
        }
    }
    taps
}

/// Linear repeater amplitude gains `alpha_l >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationVector(Vec<f64>);

impl AmplificationVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::InvalidAmplification(bad));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn uniform(len: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![alpha; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.0.iter().filter(|a| **a > 0.0).count()
    }

    pub fn is_active(&self, l: usize) -> bool {
        self.0[l] > 0.0
    }
}

/// Discretized channel with the direct and repeater contributions kept
/// separate.
#[derive(Debug, Clone, PartialEq)]
pub struct TapSet {
    pub eta: f64,
    pub tap_count: usize,
    pub direct_taps: Vec<Complex64>,
    /// One column of `T + 1` taps per repeater.
    pub repeater_taps: Vec<Vec<Complex64>>,
    pub bandwidth: f64,
    pub repeater_delays: Vec<f64>,
}

impl TapSet {
    pub fn synthesize(
        realization: &ChannelRealization,
        window: TapWindow,
        bandwidth: f64,
        f_c: f64,
        repeater_delays: Vec<f64>,
    ) -> Result<Self> {
        let l = realization.num_repeaters();
        if repeater_delays.len() != l {
            return Err(Error::LengthMismatch {
                expected: l,
                got: repeater_delays.len(),
            });
        }
        let direct_taps = compute_direct_taps(&realization.direct, window, bandwidth, f_c);
        let repeater_taps = realization
            .ue_to_rep
            .iter()
            .zip(&realization.rep_to_bs)
            .zip(&repeater_delays)
            .map(|((up, down), &tau)| compute_repeater_taps(up, down, tau, window, bandwidth, f_c))
            .collect::<Vec<_>>();
        let set = Self {
            eta: window.eta,
            tap_count: window.tap_count,
            direct_taps,
            repeater_taps,
            bandwidth,
            repeater_delays,
        };
        if !set.is_finite() {
            return Err(Error::NonFinite("channel taps"));
        }
        Ok(set)
    }

    pub fn num_repeaters(&self) -> usize {
        self.repeater_taps.len()
    }

    fn is_finite(&self) -> bool {
        self.direct_taps
            .iter()
            .chain(self.repeater_taps.iter().flatten())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `h[l] = c_d[l] + c_r[l]^T alpha`.
    pub fn effective_taps(&self, alpha: &AmplificationVector) -> Result<Vec<Complex64>> {
        effective_taps(self, alpha)
    }
}

pub fn effective_taps(taps: &TapSet, alpha: &AmplificationVector) -> Result<Vec<Complex64>> {
    if alpha.len() != taps.num_repeaters() {
        return Err(Error::LengthMismatch {
            expected: taps.num_repeaters(),
            got: alpha.len(),
        });
    }
    let mut h = taps.direct_taps.clone();
    for (column, &a) in taps.repeater_taps.iter().zip(alpha.as_slice()) {
        if a == 0.0 {
            continue;
        }
        for (hl, c) in h.iter_mut().zip(column) {
            *hl += c * a;
        }
    }
    Ok(h)
}
