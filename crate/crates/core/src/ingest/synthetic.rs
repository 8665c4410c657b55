//! Deterministic synthetic recordings.
//!
//! Fall trials contain one impact whose acceleration magnitude lies in
//! [70, 130] m/s² within the first five seconds, followed by lying still at
//! gravity level (≈ 9.81). ADL trials never exceed 40 m/s². Everything is a
//! pure function of the spec and its seed.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    ActivityCode, ActivityFamily, BodyPosition, SensorKind, SensorRecording, SensorSample,
};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng, stream};

pub const GRAVITY: f64 = 9.81;
/// Upper bound on ADL acceleration magnitude.
pub const ADL_MAX_MAGNITUDE: f64 = 38.0;
pub const FALL_PEAK_RANGE: (f64, f64) = (70.0, 130.0);
/// Length of the synthesized fall pattern, from loss of balance to lying still.
pub const FALL_PATTERN_S: f64 = 5.0;

const EPOCH_MS: i64 = 1_700_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityPlan {
    pub activity: ActivityCode,
    /// Defaults to the catalogue repetition count.
    #[serde(default)]
    pub repetitions: Option<u32>,
    /// Defaults to the catalogue trial duration.
    #[serde(default)]
    pub duration_s: Option<f64>,
}

impl ActivityPlan {
    pub fn new(activity: ActivityCode) -> Self {
        ActivityPlan {
            activity,
            repetitions: None,
            duration_s: None,
        }
    }

    pub fn reps(activity: ActivityCode, repetitions: u32) -> Self {
        ActivityPlan {
            activity,
            repetitions: Some(repetitions),
            duration_s: None,
        }
    }

    pub fn repetitions(&self) -> u32 {
        self.repetitions
            .unwrap_or_else(|| self.activity.nominal_repetitions())
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
            .unwrap_or_else(|| self.activity.nominal_duration_s())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub subjects: u32,
    pub activities: Vec<ActivityPlan>,
    #[serde(default = "all_positions")]
    pub positions: Vec<BodyPosition>,
    /// Overrides the per-position nominal rate (205 Hz chest, 90 Hz wrists).
    #[serde(default)]
    pub rate_hz: Option<f64>,
    pub seed: u64,
}

fn all_positions() -> Vec<BodyPosition> {
    BodyPosition::ALL.to_vec()
}

impl SyntheticSpec {
    /// Chest-only corpus giving exactly 1000 segments, 100 of them falls:
    /// five subjects, each with 4 repetitions of the five falls (20 segments)
    /// and 180 ADL/OM segments.
    pub fn desk_benchmark(seed: u64) -> Self {
        let mut activities: Vec<ActivityPlan> = [1, 2, 3, 5, 6]
            .iter()
            .map(|&i| ActivityPlan::reps(ActivityCode::fall(i), 4))
            .collect();
        activities.extend([
            ActivityPlan::new(ActivityCode::adl(1)),
            ActivityPlan::new(ActivityCode::adl(2)),
            ActivityPlan::new(ActivityCode::om(1)),
            ActivityPlan::new(ActivityCode::adl(3)),
            ActivityPlan::new(ActivityCode::adl(4)),
            ActivityPlan::new(ActivityCode::adl(11)),
            ActivityPlan::new(ActivityCode::adl(12)),
        ]);
        SyntheticSpec {
            subjects: 5,
            activities,
            positions: vec![BodyPosition::Chest],
            rate_hz: None,
            seed,
        }
    }

    /// One repetition of every catalogue activity, all positions.
    pub fn catalogue(subjects: u32, seed: u64) -> Self {
        SyntheticSpec {
            subjects,
            activities: ActivityCode::vocabulary()
                .into_iter()
                .map(|a| ActivityPlan::reps(a, 1))
                .collect(),
            positions: all_positions(),
            rate_hz: None,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.subjects == 0 {
            return Err(Error::InvalidSpec("zero subjects".into()));
        }
        if self.activities.is_empty() {
            return Err(Error::InvalidSpec("no activities".into()));
        }
        if self.positions.is_empty() {
            return Err(Error::InvalidSpec("no positions".into()));
        }
        if let Some(rate) = self.rate_hz {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "rate_hz must be positive, got {rate}"
                )));
            }
        }
        for plan in &self.activities {
            let d = plan.duration_s();
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "{}: duration must be positive",
                    plan.activity
                )));
            }
        }
        Ok(())
    }
}

/// Generates one accelerometer and one gyroscope recording per
/// (subject, position, activity, repetition).
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<SensorRecording>> {
    spec.validate()?;
    let mut out = Vec::new();
    let mut counter: u64 = 0;
    for subject in 1..=spec.subjects {
        for &position in &spec.positions {
            let rate = spec.rate_hz.unwrap_or_else(|| position.nominal_rate_hz());
            for plan in &spec.activities {
                for rep in 0..plan.repetitions() {
                    let mut r = rng(derive_seed(spec.seed, stream::SYNTHETIC, counter));
                    let n = (plan.duration_s() * rate).round().max(1.0) as usize;
                    let (acc, gyr) = synthesize_trial(&mut r, plan.activity, n, rate);
                    let start_ts = EPOCH_MS + counter as i64 * 600_000;
                    let sampling_id =
                        format!("s{subject}-{}-{}-{rep}", position.dir_name(), plan.activity);
                    out.extend(into_recordings(
                        &sampling_id,
                        subject,
                        position,
                        plan.activity,
                        start_ts,
                        rate,
                        acc,
                        gyr,
                    ));
                    counter += 1;
                }
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn into_recordings(
    sampling_id: &str,
    subject_id: u32,
    position: BodyPosition,
    activity: ActivityCode,
    start_ts: i64,
    rate: f64,
    acc: Vec<[f64; 3]>,
    gyr: Vec<[f64; 3]>,
) -> [SensorRecording; 2] {
    let ts = |i: usize| start_ts + (i as f64 * 1000.0 / rate).round() as i64;
    let to_samples = |v: Vec<[f64; 3]>| -> Vec<SensorSample> {
        v.into_iter()
            .enumerate()
            .map(|(i, [x, y, z])| SensorSample {
                timestamp_ms: ts(i),
                x,
                y,
                z,
            })
            .collect()
    };
    let n = acc.len();
    let end_ts = ts(n.saturating_sub(1));
    let make = |kind, samples| SensorRecording {
        sampling_id: sampling_id.to_string(),
        subject_id,
        position,
        kind,
        activity,
        start_ts,
        end_ts,
        samples,
    };
    [
        make(SensorKind::LinearAcceleration, to_samples(acc)),
        make(SensorKind::AngularSpeed, to_samples(gyr)),
    ]
}

#[derive(Debug, Clone, Copy)]
struct Profile {
    amp: f64,
    freq: f64,
    gyr_amp: f64,
    /// Periodic impulses: (period s, peak m/s² above gravity).
    bursts: Option<(f64, f64)>,
}

const STILL: Profile = Profile {
    amp: 0.3,
    freq: 0.3,
    gyr_amp: 0.05,
    bursts: None,
};
const WALK: Profile = Profile {
    amp: 3.0,
    freq: 1.9,
    gyr_amp: 0.8,
    bursts: None,
};
const RUN: Profile = Profile {
    amp: 9.0,
    freq: 2.8,
    gyr_amp: 2.0,
    bursts: None,
};

#[derive(Debug, Clone, Copy)]
enum Posture {
    Upright,
    Lying,
}

impl Posture {
    fn gravity(self) -> [f64; 3] {
        match self {
            Posture::Upright => [0.0, GRAVITY, 0.0],
            Posture::Lying => [0.0, 0.0, GRAVITY],
        }
    }
}

fn profile_for(code: ActivityCode) -> Profile {
    let p = match (code.family, code.index) {
        (ActivityFamily::Adl, 1) => STILL,
        (ActivityFamily::Adl, 2) => WALK,
        (ActivityFamily::Adl, 3) => RUN,
        (ActivityFamily::Adl, 4) => Profile {
            amp: 1.0,
            freq: 0.5,
            gyr_amp: 0.4,
            bursts: Some((2.0, 22.0)),
        },
        (ActivityFamily::Adl, 5 | 6) => Profile {
            amp: 4.0,
            freq: 1.7,
            gyr_amp: 1.0,
            bursts: None,
        },
        (ActivityFamily::Adl, 7 | 8) => Profile {
            amp: 0.4,
            freq: 0.4,
            gyr_amp: 0.1,
            bursts: None,
        },
        (ActivityFamily::Adl, 11 | 12) => Profile {
            amp: 3.5,
            freq: 1.8,
            gyr_amp: 0.9,
            bursts: None,
        },
        (ActivityFamily::Adl, 13 | 14) => Profile {
            amp: 10.0,
            freq: 2.9,
            gyr_amp: 2.2,
            bursts: None,
        },
        (ActivityFamily::Adl, 15) => Profile {
            amp: 2.0,
            freq: 1.5,
            gyr_amp: 0.8,
            bursts: Some((1.0, 18.0)),
        },
        (ActivityFamily::Om, 1) => Profile {
            amp: 2.5,
            freq: 1.8,
            gyr_amp: 1.2,
            bursts: None,
        },
        (ActivityFamily::Om, 2) => Profile {
            amp: 6.0,
            freq: 2.5,
            gyr_amp: 1.8,
            bursts: None,
        },
        (ActivityFamily::Om, 3 | 6) => STILL,
        (ActivityFamily::Om, 4 | 7) => WALK,
        (ActivityFamily::Om, 5 | 8) => RUN,
        (ActivityFamily::Om, 9) => Profile {
            amp: 3.0,
            freq: 1.0,
            gyr_amp: 0.8,
            bursts: None,
        },
        _ => STILL,
    };
    if code.with_rifle {
        Profile {
            amp: p.amp * 0.8,
            bursts: p.bursts.map(|(t, h)| (t, h * 0.85)),
            ..p
        }
    } else {
        p
    }
}

/// Extra acceleration during a posture transition: (peak m/s², posture after).
fn transition_for(code: ActivityCode) -> Option<(f64, f64, Posture)> {
    match (code.family, code.index) {
        (ActivityFamily::Adl, 7 | 8) => Some((6.0, 9.0, Posture::Upright)),
        (ActivityFamily::Om, 3..=5) => Some((18.0, 28.0, Posture::Upright)),
        (ActivityFamily::Om, 6..=8) => Some((35.0, 60.0, Posture::Lying)),
        _ => None,
    }
}

fn noise(r: &mut ChaCha8Rng, sd: f64) -> [f64; 3] {
    let n = Normal::new(0.0, sd).expect("positive sd");
    [n.sample(r), n.sample(r), n.sample(r)]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Motion on top of gravity; returns (acc deviation, gyro) per sample.
fn periodic_motion(
    r: &mut ChaCha8Rng,
    p: Profile,
    n: usize,
    rate: f64,
) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    let phase: [f64; 3] = [
        r.random::<f64>() * 2.0 * PI,
        r.random::<f64>() * 2.0 * PI,
        r.random::<f64>() * 2.0 * PI,
    ];
    let freq = p.freq * (0.9 + 0.2 * r.random::<f64>());
    let burst_offset = r.random::<f64>();
    let mut acc = Vec::with_capacity(n);
    let mut gyr = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / rate;
        let w = 2.0 * PI * freq * t;
        let mut a = [
            0.5 * p.amp * (w + phase[0]).sin(),
            p.amp * (w + phase[1]).sin().abs() - 0.5 * p.amp,
            0.4 * p.amp * (0.5 * w + phase[2]).sin(),
        ];
        if let Some((period, peak)) = p.bursts {
            let cycle = (t / period + burst_offset).fract() * period;
            let pulse = (-(cycle - 0.5 * period).powi(2) / (2.0 * 0.05f64.powi(2))).exp();
            a[1] += peak * pulse;
        }
        acc.push(add(a, noise(r, 0.1 + 0.03 * p.amp)));
        let g = [
            p.gyr_amp * (w + phase[2]).sin(),
            0.6 * p.gyr_amp * (w + phase[0]).cos(),
            0.3 * p.gyr_amp * (0.5 * w).sin(),
        ];
        gyr.push(add(g, noise(r, 0.02)));
    }
    (acc, gyr)
}

fn pulse_at(center: f64, width: f64, t: f64) -> f64 {
    (-(t - center).powi(2) / (2.0 * width * width)).exp()
}

fn synthesize_trial(
    r: &mut ChaCha8Rng,
    code: ActivityCode,
    n: usize,
    rate: f64,
) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    if code.is_fall() {
        let pre = (r.random_range(0.3..1.5) * rate).round() as usize;
        let pre = pre.min(n);
        let (mut acc, mut gyr) = periodic_motion(r, STILL, pre, rate);
        for a in acc.iter_mut() {
            *a = add(*a, Posture::Upright.gravity());
        }
        let (fa, fg) = fall_pattern(r, n - pre, rate, code.with_rifle);
        acc.extend(fa);
        gyr.extend(fg);
        return (acc, gyr);
    }

    let profile = profile_for(code);
    let (mut dev, mut gyr) = periodic_motion(r, profile, n, rate);
    let mut gravity = vec![
        match (code.family, code.index) {
            (ActivityFamily::Om, 9) => Posture::Lying.gravity(),
            _ => Posture::Upright.gravity(),
        };
        n
    ];
    if let Some((lo, hi, after)) = transition_for(code) {
        let duration = n as f64 / rate;
        let t_tr = duration * r.random_range(0.3..0.65);
        let peak = r.random_range(lo..hi);
        let i_tr = ((t_tr * rate) as usize).min(n.saturating_sub(1));
        for (i, (d, g)) in dev.iter_mut().zip(gyr.iter_mut()).enumerate() {
            let t = i as f64 / rate;
            if i > i_tr {
                // settled in the new posture: movement dies out
                *d = scale(*d, 0.1);
                *g = scale(*g, 0.1);
            }
            d[1] += (peak - GRAVITY).max(0.0) * pulse_at(t_tr, 0.06, t);
            g[0] += 2.5 * pulse_at(t_tr - 0.2, 0.25, t);
        }
        for g in gravity.iter_mut().skip(i_tr + 1) {
            *g = after.gravity();
        }
    }
    if code.family == ActivityFamily::Adl {
        // hard ceiling: |g + s·dev| ≤ |g| + s·|dev| ≤ ADL_MAX_MAGNITUDE
        let over = dev
            .iter()
            .zip(&gravity)
            .any(|(d, g)| norm(add(*d, *g)) > ADL_MAX_MAGNITUDE);
        if over {
            let max_dev = dev.iter().map(|d| norm(*d)).fold(0.0, f64::max);
            let s = (ADL_MAX_MAGNITUDE - GRAVITY) / max_dev;
            for d in dev.iter_mut() {
                *d = scale(*d, s);
            }
        }
    }
    let acc = dev
        .into_iter()
        .zip(gravity)
        .map(|(d, g)| add(d, g))
        .collect();
    (acc, gyr)
}

/// Loss of balance, impact and lying still; `n` samples starting at onset.
/// The impact sample carries the unique maximum magnitude.
fn fall_pattern(
    r: &mut ChaCha8Rng,
    n: usize,
    rate: f64,
    rifle: bool,
) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    let t_impact = r.random_range(0.5..0.8);
    let peak = if rifle {
        r.random_range(72.0..105.0)
    } else {
        r.random_range(75.0..125.0)
    };
    let n_secondary = if r.random::<bool>() { 1 } else { 2 };
    let secondary: Vec<(f64, f64)> = (0..n_secondary)
        .map(|k| {
            let dt = if k == 0 {
                r.random_range(0.15..0.25)
            } else {
                r.random_range(0.35..0.5)
            };
            (t_impact + dt, r.random_range(42.0..60.0))
        })
        .collect();
    let lying: [f64; 3] = match r.random_range(0..4) {
        0 => [0.0, 0.0, GRAVITY],
        1 => [0.0, 0.0, -GRAVITY],
        2 => [GRAVITY, 0.0, 0.0],
        _ => [-GRAVITY, 0.0, 0.0],
    };
    let impact_dir = {
        let v = [r.random_range(-0.5..0.5), 1.0, r.random_range(-0.5..0.5)];
        scale(v, 1.0 / norm(v))
    };
    let spin = r.random_range(3.0..6.0);
    let i_impact = (t_impact * rate).round() as usize;

    let mut acc = Vec::with_capacity(n);
    let mut gyr = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / rate;
        let (a, g) = if i < i_impact {
            // falling: orientation rotates from upright towards lying, felt gravity drops
            let f = t / t_impact;
            let dir = add(scale([0.0, 1.0, 0.0], 1.0 - f), scale(lying, f / GRAVITY));
            let dir = scale(dir, 1.0 / norm(dir).max(1e-9));
            let a = scale(dir, GRAVITY * (1.0 - 0.75 * f));
            (
                add(a, noise(r, 0.2)),
                add([spin * f, 0.5 * spin * f, 0.2 * spin], noise(r, 0.05)),
            )
        } else if i == i_impact {
            (scale(impact_dir, peak), [8.0, 4.0, 2.0])
        } else {
            let k = i - i_impact;
            let mut a = add(lying, noise(r, 0.15));
            // impact ringing on the two samples after the peak
            if k <= 2 {
                a = add(
                    a,
                    scale(impact_dir, peak * if k == 1 { 0.5 } else { 0.25 } - GRAVITY),
                );
            }
            for &(ts, h) in &secondary {
                a = add(a, scale(impact_dir, (h - GRAVITY) * pulse_at(ts, 0.02, t)));
            }
            let decay = (-(t - t_impact) / 0.3).exp();
            (a, add(scale([6.0, 3.0, 1.5], decay), noise(r, 0.02)))
        };
        acc.push(a);
        gyr.push(g);
    }
    (acc, gyr)
}

/// A continuous feed with falls at known onsets, for replay tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub duration_s: f64,
    pub position: BodyPosition,
    #[serde(default)]
    pub rate_hz: Option<f64>,
    /// Onset of each fall pattern, seconds from stream start.
    pub fall_onsets_s: Vec<f64>,
    /// Activity between falls.
    pub background: ActivityCode,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticStream {
    pub acc: SensorRecording,
    pub gyr: SensorRecording,
    pub onsets_s: Vec<f64>,
}

/// Background activity with a [`FALL_PATTERN_S`]-long fall pattern at each
/// onset; after each fall the subject lies still for three seconds.
pub fn generate_stream(spec: &StreamSpec) -> Result<SyntheticStream> {
    let rate = spec
        .rate_hz
        .unwrap_or_else(|| spec.position.nominal_rate_hz());
    if !(rate > 0.0) || !(spec.duration_s > 0.0) {
        return Err(Error::InvalidSpec(
            "stream needs positive duration and rate".into(),
        ));
    }
    if spec.background.is_fall() {
        return Err(Error::InvalidSpec(
            "stream background cannot be a fall".into(),
        ));
    }
    let mut onsets = spec.fall_onsets_s.clone();
    onsets.sort_by(f64::total_cmp);
    let n = (spec.duration_s * rate).round() as usize;
    let mut r = rng(derive_seed(spec.seed, stream::SYNTHETIC, u64::MAX));
    let (bg_acc, bg_gyr) = synthesize_trial(&mut r, spec.background, n, rate);
    let mut acc = bg_acc;
    let mut gyr = bg_gyr;
    for &onset in &onsets {
        if onset < 0.0 || onset >= spec.duration_s {
            return Err(Error::InvalidSpec(format!(
                "fall onset {onset} outside stream"
            )));
        }
        let start = (onset * rate).round() as usize;
        let len = ((FALL_PATTERN_S + 3.0) * rate).round() as usize;
        let end = (start + len).min(n);
        let (fa, fg) = fall_pattern(&mut r, end - start, rate, false);
        acc.splice(start..end, fa);
        gyr.splice(start..end, fg);
    }
    let [acc, gyr] = into_recordings(
        "stream",
        0,
        spec.position,
        spec.background,
        EPOCH_MS,
        rate,
        acc,
        gyr,
    );
    Ok(SyntheticStream {
        acc,
        gyr,
        onsets_s: onsets,
    })
}
