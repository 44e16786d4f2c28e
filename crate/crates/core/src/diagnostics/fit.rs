//! Least-squares fits of width decay laws: power law w ~ (t_c - t)^p with the
//! rupture time found by a golden-section search maximizing the log-log fit
//! quality, and exponential decay w ~ exp(rate t).

use crate::error::{CoreError, CoreResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    Power,
    Exponential,
}

#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    /// power exponent p, or the exponential rate (negative for decay)
    pub exponent: f64,
    /// estimated rupture time (power model only)
    pub t_c: Option<f64>,
    /// coefficient of determination of the final linear fit
    pub r2: f64,
}

fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// Longest strictly decreasing suffix of positive samples.
fn decreasing_tail(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut tail: Vec<(f64, f64)> = Vec::new();
    for &(t, w) in samples.iter().rev() {
        if w <= 0.0 {
            continue;
        }
        match tail.last() {
            None => tail.push((t, w)),
            Some(&(_, w_next)) => {
                if w > w_next {
                    tail.push((t, w));
                } else {
                    break;
                }
            }
        }
    }
    tail.reverse();
    tail
}

pub fn fit_power_exponent(samples: &[(f64, f64)], model: FitModel) -> CoreResult<FitResult> {
    let tail = decreasing_tail(samples);
    if tail.len() < 8 {
        return Err(CoreError::Config(format!(
            "need at least 8 strictly decreasing samples, found {}",
            tail.len()
        )));
    }
    let t: Vec<f64> = tail.iter().map(|s| s.0).collect();
    let ln_w: Vec<f64> = tail.iter().map(|s| s.1.ln()).collect();

    match model {
        FitModel::Exponential => {
            let (slope, _, r2) = linear_regression(&t, &ln_w);
            Ok(FitResult {
                exponent: slope,
                t_c: None,
                r2,
            })
        }
        FitModel::Power => {
            let t_last = *t.last().expect("nonempty");
            let span = (t_last - t[0]).max(1e-12);
            let quality = |t_c: f64| -> (f64, f64) {
                let x: Vec<f64> = t.iter().map(|ti| (t_c - ti).ln()).collect();
                let (slope, _, r2) = linear_regression(&x, &ln_w);
                (slope, r2)
            };
            // golden-section maximum of r2 over t_c in (t_last, t_last + 2 span]
            let mut lo = t_last + 1e-9 * span;
            let mut hi = t_last + 2.0 * span;
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            let mut x1 = hi - phi * (hi - lo);
            let mut x2 = lo + phi * (hi - lo);
            let mut f1 = quality(x1).1;
            let mut f2 = quality(x2).1;
            for _ in 0..80 {
                if f1 < f2 {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = quality(x2).1;
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = quality(x1).1;
                }
            }
            let t_c = 0.5 * (lo + hi);
            let (slope, r2) = quality(t_c);
            Ok(FitResult {
                exponent: slope,
                t_c: Some(t_c),
                r2,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_recovered() {
        let t_c = 2.37;
        let samples: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 0.05 * i as f64;
                (t, 1.3 * (t_c - t).powi(1))
            })
            .collect();
        let fit = fit_power_exponent(&samples, FitModel::Power).unwrap();
        assert!((fit.exponent - 1.0).abs() < 0.01, "p = {}", fit.exponent);
        assert!((fit.t_c.unwrap() - t_c).abs() < 0.05);
        assert!(fit.r2 > 0.9999);

        let samples: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 0.05 * i as f64;
                (t, 0.8 * (t_c - t).sqrt())
            })
            .collect();
        let fit = fit_power_exponent(&samples, FitModel::Power).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.01, "p = {}", fit.exponent);
    }

    #[test]
    fn exact_exponential_recovered() {
        let samples: Vec<(f64, f64)> = (0..30)
            .map(|i| {
                let t = 0.1 * i as f64;
                (t, 2.0 * (-3.0 * t).exp())
            })
            .collect();
        let fit = fit_power_exponent(&samples, FitModel::Exponential).unwrap();
        assert!((fit.exponent + 3.0).abs() < 0.01);
        assert!(fit.r2 > 0.9999);
    }

    #[test]
    fn non_monotone_tail_rejected() {
        let samples: Vec<(f64, f64)> = (0..20)
            .map(|i| (i as f64, 1.0 + (i % 2) as f64))
            .collect();
        assert!(fit_power_exponent(&samples, FitModel::Power).is_err());
    }
}
