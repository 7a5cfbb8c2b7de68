//! Least-squares fit of a [`RateProfile`] to reference durations.
//!
//! The model `seconds = floor + units × (1 / rate)` is linear in `(1 / rate, floor)`, so an
//! ordinary least-squares line through `(units, seconds)` gives both parameters. When the
//! line is unusable (all unit counts equal, nonpositive slope) the fit falls back to
//! `floor = 0, rate = Σunits / Σseconds`. A negative intercept is refitted through the origin
//! so the floor stays nonnegative.

use thiserror::Error;

use super::rate::{ProfileConfigError, RateProfile, UnitKind};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("need at least 2 samples to calibrate, got {0}")]
    InsufficientData(usize),
    #[error("sample {index}: reference duration must be finite and > 0")]
    NonPositiveDuration { index: usize },
    #[error("sample {index}: text has no {unit} to count")]
    EmptyText { index: usize, unit: &'static str },
    #[error(transparent)]
    Profile(#[from] ProfileConfigError),
}

pub fn calibrate_rate<T: Scalar, S: AsRef<str>>(
    language: &str,
    samples: &[(S, T)],
    unit_kind: UnitKind,
) -> Result<RateProfile<T>, CalibrationError> {
    if samples.len() < 2 {
        return Err(CalibrationError::InsufficientData(samples.len()));
    }
    let mut units = Vec::with_capacity(samples.len());
    let mut seconds = Vec::with_capacity(samples.len());
    for (index, (text, secs)) in samples.iter().enumerate() {
        if !(secs.is_finite() && *secs > T::zero()) {
            return Err(CalibrationError::NonPositiveDuration { index });
        }
        let count = unit_kind.count(text.as_ref());
        if count == 0 {
            return Err(CalibrationError::EmptyText {
                index,
                unit: unit_kind.as_str(),
            });
        }
        units.push(T::from_count(count));
        seconds.push(*secs);
    }

    let (rate, floor) = fit_line(&units, &seconds).unwrap_or_else(|| fallback(&units, &seconds));
    Ok(RateProfile::new(language, rate, unit_kind, floor)?)
}

fn fallback<T: Scalar>(units: &[T], seconds: &[T]) -> (T, T) {
    let su = units.iter().fold(T::zero(), |a, u| a + *u);
    let ss = seconds.iter().fold(T::zero(), |a, s| a + *s);
    (su / ss, T::zero())
}

/// Returns `(rate, floor)`, or `None` when the fit is degenerate.
fn fit_line<T: Scalar>(units: &[T], seconds: &[T]) -> Option<(T, T)> {
    let n = T::from_count(units.len());
    let mean_u = units.iter().fold(T::zero(), |a, u| a + *u) / n;
    let mean_s = seconds.iter().fold(T::zero(), |a, s| a + *s) / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (u, s) in units.iter().zip(seconds) {
        let du = *u - mean_u;
        sxx = sxx + du * du;
        sxy = sxy + du * (*s - mean_s);
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    if !(slope.is_finite() && slope > T::zero()) {
        return None;
    }
    let intercept = mean_s - slope * mean_u;
    if intercept >= T::zero() {
        return Some((slope.recip(), intercept));
    }
    // Through the origin.
    let (mut uu, mut us) = (T::zero(), T::zero());
    for (u, s) in units.iter().zip(seconds) {
        uu = uu + *u * *u;
        us = us + *u * *s;
    }
    let slope = us / uu;
    (slope.is_finite() && slope > T::zero()).then(|| (slope.recip(), T::zero()))
}
