//! Least-squares fits of sampled response curves.
//!
//! The power law p = a·gᵇ is fitted in two stages: ordinary least squares in
//! log-log space for the starting point, then damped Levenberg-Marquardt on
//! the linear-space residuals, which weights the high-pressure end the way
//! the macro solver sees it.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

/// Pressure threshold below which samples are treated as out of contact.
pub const FIT_PRESSURE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    pub sse: f64,
    pub ssr: f64,
    pub sst: f64,
    pub r2: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits p = a·gᵇ to (g, p) samples. Samples with non-positive gap or with
/// pressure at the contact floor are dropped; at least three must survive.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(g, p)| g > 0.0 && p > FIT_PRESSURE_FLOOR)
        .cloned()
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!(
            "power-law fit needs at least 3 in-contact samples, got {}",
            pts.len()
        )));
    }

    // Log-log least squares for the starting point.
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(g, p) in &pts {
        let (x, y) = (g.ln(), p.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::Fit("all gap samples coincide".into()));
    }
    let mut b = (n * sxy - sx * sy) / det;
    let mut a = ((sy - b * sx) / n).exp();

    let sse_of = |a: f64, b: f64| -> f64 {
        pts.iter()
            .map(|&(g, p)| {
                let r = a * g.powf(b) - p;
                r * r
            })
            .sum()
    };

    // Levenberg-Marquardt refinement.
    let mut sse = sse_of(a, b);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let mut jtj = Matrix2::<f64>::zeros();
        let mut jtr = Vector2::<f64>::zeros();
        for &(g, p) in &pts {
            let model = a * g.powf(b);
            let r = model - p;
            let ja = g.powf(b);
            let jb = model * g.ln();
            jtj[(0, 0)] += ja * ja;
            jtj[(0, 1)] += ja * jb;
            jtj[(1, 1)] += jb * jb;
            jtr[0] += ja * r;
            jtr[1] += jb * r;
        }
        jtj[(1, 0)] = jtj[(0, 1)];

        let mut accepted = false;
        for _ in 0..40 {
            let mut damped = jtj;
            damped[(0, 0)] += lambda * jtj[(0, 0)].max(1e-300);
            damped[(1, 1)] += lambda * jtj[(1, 1)].max(1e-300);
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let (a_try, b_try) = (a + step[0], b + step[1]);
            if !(a_try.is_finite() && b_try.is_finite()) || a_try <= 0.0 {
                lambda *= 10.0;
                continue;
            }
            let sse_try = sse_of(a_try, b_try);
            if sse_try.is_finite() && sse_try <= sse {
                let converged = sse - sse_try <= 1e-14 * sse.max(1e-300);
                a = a_try;
                b = b_try;
                sse = sse_try;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if converged {
                    lambda = -1.0; // flag outer-loop exit
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || lambda < 0.0 {
            break;
        }
    }

    let mean = pts.iter().map(|&(_, p)| p).sum::<f64>() / n;
    let sst: f64 = pts.iter().map(|&(_, p)| (p - mean).powi(2)).sum();
    let ssr: f64 = pts
        .iter()
        .map(|&(g, _)| (a * g.powf(b) - mean).powi(2))
        .sum();
    if sst <= 0.0 {
        return Err(Error::Fit("pressure samples are constant".into()));
    }
    Ok(PowerLawFit {
        a,
        b,
        sse,
        ssr,
        sst,
        r2: 1.0 - sse / sst,
    })
}

/// Ordinary least squares y = slope·x + intercept.
pub fn fit_linear(samples: &[(f64, f64)]) -> Result<LinearFit> {
    if samples.len() < 2 {
        return Err(Error::Fit(format!(
            "linear fit needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in samples {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;

    let mean = sy / n;
    let sst: f64 = samples.iter().map(|&(_, y)| (y - mean).powi(2)).sum();
    let sse: f64 = samples
        .iter()
        .map(|&(x, y)| (slope * x + intercept - y).powi(2))
        .sum();
    if sst <= 0.0 {
        return Err(Error::Fit("ordinates are constant".into()));
    }
    Ok(LinearFit {
        slope,
        intercept,
        r2: 1.0 - sse / sst,
    })
}
