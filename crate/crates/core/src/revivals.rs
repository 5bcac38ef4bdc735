//! Collapse, revival and super-revival analysis of `⟨n̂⟩(τ)`.
//!
//! Two envelopes are extracted, each as the centered rolling peak-to-peak
//! amplitude of the signal minus its rolling mean:
//!
//! * a fine envelope, a few Rabi periods wide, whose first prominent peak is
//!   the revival time `τ_r`;
//! * a coarse envelope (default window `8π`) which is further averaged over
//!   `4τ_r` to expose the slow modulation. A super-revival is a resurgence
//!   of that averaged envelope after its post-revival minimum, with
//!   visibility `(peak − base)/(peak + base)` above a threshold.
//!
//! Thresholds are relative (median absolute deviation, visibility), so the
//! analysis is invariant under rescaling the signal.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{round, sqrt};

use crate::analytic::ExcitationSeries;
use crate::error::{Error, Result};

/// Rolling window of the coarse envelope.
pub const DEFAULT_WINDOW: f64 = 8.0 * PI;

/// A sampled curve on the series grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Envelope {
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
}

/// A local maximum together with its topographic prominence.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Peak {
    pub index: usize,
    pub tau: f64,
    pub height: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalOptions {
    /// Coarse envelope window in `τ` units.
    pub window: f64,
    /// Fine envelope window in Rabi periods `2π/√(n̄+1)`.
    pub revival_window_periods: f64,
    /// Prominence threshold in units of the envelope's median absolute deviation.
    pub prominence_mads: f64,
    /// The first revival is searched for in `τ ≤ factor · 2π√n̄`.
    pub revival_search_factor: f64,
    /// Minimum visibility of a super-revival.
    pub visibility_threshold: f64,
    /// Accepted range of `τ_sr / (4 n̄ τ_r)`.
    pub prediction_window: (f64, f64),
    /// Required span in units of `4 n̄ τ_r`.
    pub span_factor: f64,
    /// If false, a short series is analysed anyway and flagged through
    /// [`RevivalReport::span_sufficient`] instead of failing.
    pub require_super_revival_span: bool,
}

impl Default for RevivalOptions {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            revival_window_periods: 4.0,
            prominence_mads: 1.5,
            revival_search_factor: 2.5,
            visibility_threshold: 0.5,
            prediction_window: (0.5, 1.5),
            span_factor: 1.2,
            require_super_revival_span: true,
        }
    }
}

/// Result of [`detect_revivals`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RevivalReport {
    /// `|α|²` of the initial coherent state.
    pub n_bar: f64,
    /// `2π√n̄`, the revival time in units of `τ = gt`.
    pub tau_r_predicted: f64,
    /// `2π√n̄ · g/Ω`, the same formula read with a `1/Ω` time unit;
    /// `None` when `Ω = 0`.
    pub tau_r_predicted_omega_units: Option<f64>,
    pub tau_r_measured: f64,
    /// `4 n̄ τ_r_measured`.
    pub tau_sr_predicted: f64,
    pub tau_sr_measured: Option<f64>,
    pub super_revival_detected: bool,
    /// Whether the series spans `span_factor · τ_sr_predicted`.
    pub span_sufficient: bool,
    /// `τ_sr_measured / τ_sr_predicted`.
    pub tau_sr_ratio: Option<f64>,
    /// Detected and inside the prediction window.
    pub within_predicted_window: bool,
    /// Visibility of the first resurgence after the baseline minimum.
    pub visibility: Option<f64>,
    /// Position and level of the averaged envelope's post-revival minimum.
    pub baseline_tau: Option<f64>,
    pub baseline_level: Option<f64>,
    pub candidate_tau: Option<f64>,
    pub window: f64,
    pub revival_window: f64,
    pub prominence_threshold: f64,
    /// Fine envelope on the series grid.
    pub envelope: Envelope,
    /// Prominent peaks of the fine envelope, sorted by `τ`.
    pub peak_list: Vec<Peak>,
}

/// Rabi period `2π/√(n̄+1)` near the centre of the photon distribution.
pub fn rabi_period(n_bar: f64) -> f64 {
    2.0 * PI / sqrt(n_bar + 1.0)
}

/// Centered rolling peak-to-peak amplitude of the series minus its rolling
/// mean. Windows are clipped at the ends of the grid.
pub fn extract_envelope(series: &ExcitationSeries, window: f64) -> Result<Envelope> {
    let step = uniform_step(series.tau())?;
    let minimum = (4.0 * rabi_period(series.alpha().n_bar())).max(2.0 * step);
    // tolerate round-off when the window is computed as exactly the minimum
    if window.is_nan() || window < minimum * (1.0 - 1e-12) {
        return Err(Error::WindowTooSmall { window, minimum });
    }
    let half = half_width(window, step);
    Ok(Envelope {
        tau: series.tau().to_vec(),
        values: peak_to_peak(series.n_mean(), half),
    })
}

/// Revival analysis with default options; the series must span the
/// super-revival prediction.
pub fn detect_revivals(series: &ExcitationSeries) -> Result<RevivalReport> {
    detect_revivals_with(series, &RevivalOptions::default())
}

pub fn detect_revivals_with(
    series: &ExcitationSeries,
    opts: &RevivalOptions,
) -> Result<RevivalReport> {
    let step = uniform_step(series.tau())?;
    let tau = series.tau();
    let n_bar = series.alpha().n_bar();
    let params = series.params();
    let tau_r_predicted = 2.0 * PI * sqrt(n_bar);
    let tau_r_predicted_omega_units =
        (params.omega() != 0.0).then(|| tau_r_predicted * params.g() / params.omega());

    // first revival from the fine envelope
    let revival_window = opts.revival_window_periods * rabi_period(n_bar);
    let fine = extract_envelope(series, revival_window)?;
    let threshold_fine = opts.prominence_mads * mad(&fine.values);
    // peaks within one window of the start sit on the clipped edge
    let search_start = tau[0] + revival_window;
    let search_end = tau[0] + opts.revival_search_factor * tau_r_predicted;
    let cut = tau.partition_point(|&t| t <= search_end);
    let tau_r_measured = find_peaks(&tau[..cut], &fine.values[..cut], threshold_fine)
        .into_iter()
        .find(|p| p.tau >= search_start)
        .map(|p| p.tau)
        .ok_or(Error::NoRevivalFound)?;
    let peak_list = find_peaks(tau, &fine.values, threshold_fine);

    let tau_sr_predicted = 4.0 * n_bar * tau_r_measured;
    let mut report = RevivalReport {
        n_bar,
        tau_r_predicted,
        tau_r_predicted_omega_units,
        tau_r_measured,
        tau_sr_predicted,
        tau_sr_measured: None,
        super_revival_detected: false,
        span_sufficient: true,
        tau_sr_ratio: None,
        within_predicted_window: false,
        visibility: None,
        baseline_tau: None,
        baseline_level: None,
        candidate_tau: None,
        window: opts.window,
        revival_window,
        prominence_threshold: threshold_fine,
        envelope: fine,
        peak_list,
    };

    let required = opts.span_factor * tau_sr_predicted;
    if series.span() < required {
        if opts.require_super_revival_span {
            return Err(Error::SeriesTooShort {
                span: series.span(),
                required,
            });
        }
        report.span_sufficient = false;
    }

    // slow modulation of the coarse envelope
    let coarse = extract_envelope(series, opts.window)?;
    let averaged = rolling_mean(&coarse.values, half_width(4.0 * tau_r_measured, step));
    let start = tau.partition_point(|&t| t < tau_r_measured);
    let base = start + argmin(&averaged[start..]);
    let threshold = opts.prominence_mads * mad(&coarse.values);
    report.baseline_tau = Some(tau[base]);
    report.baseline_level = Some(averaged[base]);
    if let Some(peak) = find_peaks(&tau[base..], &averaged[base..], threshold).first() {
        let j = base + peak.index;
        let height = averaged[j];
        let visibility = (height - averaged[base]) / (height + averaged[base]);
        report.visibility = Some(visibility);
        report.candidate_tau = Some(tau[j]);
        if visibility >= opts.visibility_threshold {
            let ratio = tau[j] / tau_sr_predicted;
            report.super_revival_detected = true;
            report.tau_sr_measured = Some(tau[j]);
            report.tau_sr_ratio = Some(ratio);
            report.within_predicted_window =
                ratio >= opts.prediction_window.0 && ratio <= opts.prediction_window.1;
        }
    }
    Ok(report)
}

/// Local maxima of `values` whose topographic prominence is at least
/// `min_prominence`, in index order. Flat tops report their middle sample;
/// the first and last samples are never peaks.
///
/// The prominence of a peak is its height above the higher of the two
/// minima found by walking left and right until a strictly higher sample
/// (or the boundary) is reached. A zero threshold keeps every local maximum
/// with positive prominence.
pub fn find_peaks(tau: &[f64], values: &[f64], min_prominence: f64) -> Vec<Peak> {
    debug_assert_eq!(tau.len(), values.len());
    let mut peaks = Vec::new();
    let n = values.len();
    let mut i = 1;
    while i + 1 < n {
        if values[i - 1] < values[i] {
            let mut ahead = i + 1;
            while ahead + 1 < n && values[ahead] == values[i] {
                ahead += 1;
            }
            if values[ahead] < values[i] {
                let index = (i + ahead - 1) / 2;
                let prominence = prominence(values, i, ahead - 1);
                if prominence >= min_prominence && prominence > 0.0 {
                    peaks.push(Peak {
                        index,
                        tau: tau[index],
                        height: values[index],
                        prominence,
                    });
                }
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    peaks
}

fn prominence(values: &[f64], left_edge: usize, right_edge: usize) -> f64 {
    let h = values[left_edge];
    let mut left_min = h;
    for &v in values[..left_edge].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &values[right_edge + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

fn uniform_step(tau: &[f64]) -> Result<f64> {
    if tau.len() < 3 {
        return Err(Error::InvalidGrid);
    }
    let step = (tau[tau.len() - 1] - tau[0]) / (tau.len() - 1) as f64;
    let uniform = tau
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-6 * step);
    if step.is_nan() || step <= 0.0 || !uniform {
        return Err(Error::InvalidGrid);
    }
    Ok(step)
}

fn half_width(window: f64, step: f64) -> usize {
    (round(window / step) as usize) / 2
}

fn peak_to_peak(values: &[f64], half: usize) -> Vec<f64> {
    let mean = rolling_mean(values, half);
    let residual: Vec<f64> = values.iter().zip(&mean).map(|(v, m)| v - m).collect();
    let hi = rolling_extreme(&residual, half, |a, b| a >= b);
    let lo = rolling_extreme(&residual, half, |a, b| a <= b);
    hi.iter().zip(&lo).map(|(a, b)| a - b).collect()
}

/// Mean over `[i − half, i + half]` clipped to the grid.
fn rolling_mean(values: &[f64], half: usize) -> Vec<f64> {
    let n = values.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in values {
        acc += v;
        prefix.push(acc);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Rolling max (or min) over `[i − half, i + half]` with a monotonic deque;
/// `keeps(a, b)` is true when `a` dominates `b`.
fn rolling_extreme(values: &[f64], half: usize, keeps: impl Fn(f64, f64) -> bool) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while let Some(&back) = deque.back() {
                if keeps(values[next], values[back]) {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while let Some(&front) = deque.front() {
            if front < lo {
                deque.pop_front();
            } else {
                break;
            }
        }
        out.push(values[*deque.front().expect("window is non-empty")]);
    }
    out
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
        )
        .0
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        0.5 * (sorted[m - 1] + sorted[m])
    }
}

/// Median absolute deviation from the median.
fn mad(values: &[f64]) -> f64 {
    let m = median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    median(&dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{uniform_grid, AnalyticEvaluator, Provenance};
    use crate::fockspace::{CoherentAmplitude, SpaceDims};
    use crate::hamiltonians::IonParams;
    use num_complex::Complex64;

    fn synthetic(f: impl Fn(f64) -> f64, tau_max: f64, step: f64) -> ExcitationSeries {
        let tau = uniform_grid(tau_max, step).unwrap();
        let values = tau.iter().map(|&t| f(t)).collect();
        let p = IonParams::new(1.0, 0.5, 0.0, 0.5).unwrap();
        let alpha = CoherentAmplitude::new(Complex64::new(0.5, 5.0), 0.5);
        ExcitationSeries::new(tau, values, Provenance::Analytic, p, alpha, 80).unwrap()
    }

    fn analytic(alpha: Complex64, eta: f64, tau_max: f64, step: f64) -> ExcitationSeries {
        let p = IonParams::new(1.0, 0.5, 0.0, eta).unwrap();
        let a = CoherentAmplitude::new(alpha, eta);
        let d = SpaceDims::new(a.auto_n_max()).unwrap();
        AnalyticEvaluator::new(a, p, d)
            .unwrap()
            .series(&uniform_grid(tau_max, step).unwrap())
            .unwrap()
    }

    #[test]
    fn constant_series_has_flat_envelope() {
        let s = synthetic(|_| 3.0, 100.0, 0.05);
        let e = extract_envelope(&s, DEFAULT_WINDOW).unwrap();
        assert!(e.values.iter().all(|&v| v.abs() < 1e-12));
        assert_eq!(detect_revivals(&s), Err(Error::NoRevivalFound));
    }

    #[test]
    fn sinusoid_envelope_is_twice_amplitude() {
        let amp = 1.7;
        let s = synthetic(|t| 5.0 + amp * libm::sin(3.0 * t), 200.0, 0.01);
        let e = extract_envelope(&s, DEFAULT_WINDOW).unwrap();
        let n = e.values.len();
        for &v in &e.values[n / 4..3 * n / 4] {
            assert!((v - 2.0 * amp).abs() < 0.05 * 2.0 * amp, "{v}");
        }
    }

    #[test]
    fn short_window_rejected() {
        let s = synthetic(libm::sin, 100.0, 0.05);
        assert!(matches!(
            extract_envelope(&s, 1.0),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let p = IonParams::new(1.0, 0.5, 0.0, 0.5).unwrap();
        let alpha = CoherentAmplitude::new(Complex64::new(0.5, 5.0), 0.5);
        let s = ExcitationSeries::new(
            alloc::vec![0.0, 1.0, 3.0, 4.0],
            alloc::vec![0.0; 4],
            Provenance::Analytic,
            p,
            alpha,
            80,
        )
        .unwrap();
        assert_eq!(
            extract_envelope(&s, DEFAULT_WINDOW),
            Err(Error::InvalidGrid)
        );
    }

    #[test]
    fn peaks_and_prominence() {
        let v = [0.0, 2.0, 1.0, 5.0, 5.0, 5.0, 0.5, 3.0, 0.0];
        let t: Vec<f64> = (0..v.len()).map(|k| k as f64).collect();
        let p = find_peaks(&t, &v, 0.0);
        assert_eq!(
            p.iter().map(|p| p.index).collect::<Vec<_>>(),
            alloc::vec![1, 4, 7]
        );
        assert_eq!(p[0].prominence, 1.0);
        assert_eq!(p[1].prominence, 5.0);
        assert_eq!(p[2].prominence, 2.5);
        assert_eq!(find_peaks(&t, &v, 2.0).len(), 2);
    }

    #[test]
    fn rolling_helpers_match_naive() {
        let v: Vec<f64> = (0..57)
            .map(|k| libm::sin(k as f64 * 0.7) + 0.01 * k as f64)
            .collect();
        for half in [0, 1, 4, 30, 80] {
            let mx = rolling_extreme(&v, half, |a, b| a >= b);
            let mean = rolling_mean(&v, half);
            for i in 0..v.len() {
                let lo = i.saturating_sub(half);
                let hi = (i + half + 1).min(v.len());
                let w = &v[lo..hi];
                assert_eq!(mx[i], w.iter().cloned().fold(f64::MIN, f64::max));
                assert!((mean[i] - w.iter().sum::<f64>() / w.len() as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn first_revival_near_prediction() {
        let s = analytic(Complex64::new(5.0, 0.5), 0.5, 120.0, 0.05);
        let opts = RevivalOptions {
            require_super_revival_span: false,
            ..Default::default()
        };
        let r = detect_revivals_with(&s, &opts).unwrap();
        assert!(!r.span_sufficient);
        assert!(
            (r.tau_r_measured / r.tau_r_predicted - 1.0).abs() < 0.1,
            "{}",
            r.tau_r_measured
        );
        assert_eq!(r.tau_sr_predicted, 4.0 * r.n_bar * r.tau_r_measured);
        assert_eq!(r.n_bar, s.alpha().n_bar());
        assert!(r.peak_list.windows(2).all(|w| w[0].tau < w[1].tau));
        assert!(r
            .peak_list
            .iter()
            .all(|p| p.prominence >= r.prominence_threshold));
    }

    #[test]
    fn short_series_rejected_when_required() {
        let s = analytic(Complex64::new(5.0, 0.5), 0.5, 120.0, 0.05);
        assert!(matches!(
            detect_revivals(&s),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn scale_equivariance_and_determinism() {
        let s = analytic(Complex64::new(0.5, 5.0), 0.5, 400.0, 0.05);
        let opts = RevivalOptions {
            require_super_revival_span: false,
            ..Default::default()
        };
        let a = detect_revivals_with(&s, &opts).unwrap();
        assert_eq!(a, detect_revivals_with(&s, &opts).unwrap());
        let b = detect_revivals_with(&s.scaled(3.5), &opts).unwrap();
        assert_eq!(a.tau_r_measured, b.tau_r_measured);
        assert_eq!(a.peak_list.len(), b.peak_list.len());
        for (p, q) in a.peak_list.iter().zip(&b.peak_list) {
            assert_eq!(p.tau, q.tau);
            assert!((q.height - 3.5 * p.height).abs() < 1e-9 * q.height.max(1.0));
        }
    }

    #[test]
    fn textbook_revivals_are_regular() {
        // η = 0: pure Jaynes-Cummings dynamics, revivals near k·τ_r
        let s = analytic(Complex64::new(5.0, 0.5), 0.0, 3900.0, 0.05);
        let r = detect_revivals(&s).unwrap();
        assert!(!r.super_revival_detected);
        let tr = r.tau_r_measured;
        for k in 2..=3 {
            let target = k as f64 * tr;
            let hit = r
                .peak_list
                .iter()
                .any(|p| (p.tau / target - 1.0).abs() <= 0.1);
            assert!(hit, "no revival near {k} tau_r = {target}");
        }
    }
}
