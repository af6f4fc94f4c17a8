//! Ratio-of-ratios calibration, used as an analytic oracle for rendered data.
//!
//! `R = (AC/DC)_red / (AC/DC)_blue`, with AC taken as the population standard
//! deviation over a window and DC as its mean. The calibration line is
//! `R = (110 − s) / 25`.

pub const INTERCEPT: f64 = 110.0;
pub const SLOPE: f64 = 25.0;

pub fn ratio_for_spo2(s: f64) -> f64 {
    (INTERCEPT - s) / SLOPE
}

pub fn spo2_for_ratio(r: f64) -> f64 {
    INTERCEPT - SLOPE * r
}

/// `(std / mean)` of a slice, population moments.
pub fn perfusion_index(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Ratio of ratios between a red and a blue segment of equal length.
pub fn window_ratio(red: &[f64], blue: &[f64]) -> f64 {
    perfusion_index(red) / perfusion_index(blue)
}

/// SpO₂ estimate for a window of raw (unstandardized) channel means.
pub fn estimate_spo2(red: &[f64], blue: &[f64]) -> f64 {
    spo2_for_ratio(window_ratio(red, blue))
}
