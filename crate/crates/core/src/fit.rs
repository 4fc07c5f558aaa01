//! Least-squares fits used by the tail, Zeno and step-size scaling studies.

use crate::error::{Error, Result};

/// Ordinary least squares y = slope * x + intercept.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("fit inputs must have equal length"));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "linear fit needs at least 3 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("degenerate fit: all abscissae equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let slope_stderr = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
    })
}

/// Power-law fit result over a stated |x| window.
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    pub window: (f64, f64),
    /// Exponent p in |f| ~ amplitude * |x|^p.
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub exponent_stderr: f64,
}

/// Fit log|y| against log|x| over the window `x_lo <= |x| <= x_hi`.
/// Points with |y| at or below `floor` are rejected as noise.
pub fn fit_power_law(
    xs: &[f64],
    ys: &[f64],
    window: (f64, f64),
    floor: f64,
) -> Result<TailFit> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        let ax = x.abs();
        if ax >= window.0 && ax <= window.1 {
            if y.abs() <= floor {
                return Err(Error::Accuracy(format!(
                    "tail sample |y| = {:.3e} at |x| = {ax} is below the noise floor {floor:.3e}",
                    y.abs()
                )));
            }
            lx.push(ax.ln());
            ly.push(y.abs().ln());
        }
    }
    let f = linear_fit(&lx, &ly)?;
    Ok(TailFit {
        window,
        exponent: f.slope,
        amplitude: f.intercept.exp(),
        r_squared: f.r_squared,
        exponent_stderr: f.slope_stderr,
    })
}

/// Scaling fit m(dt) ~ C * dt^p across a step-size ladder.
#[derive(Debug, Clone, Copy)]
pub struct ScalingFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub exponent_stderr: f64,
}

pub fn fit_scaling(dts: &[f64], values: &[f64]) -> Result<ScalingFit> {
    for &v in values {
        if !(v > 0.0) {
            return Err(Error::Accuracy(format!(
                "scaling fit requires positive values, got {v:.3e}"
            )));
        }
    }
    let lx: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let f = linear_fit(&lx, &ly)?;
    Ok(ScalingFit {
        exponent: f.slope,
        amplitude: f.intercept.exp(),
        r_squared: f.r_squared,
        exponent_stderr: f.slope_stderr,
    })
}
