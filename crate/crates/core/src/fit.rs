//! Ordinary least-squares line fit with a slope standard error.
//!
//! Shared by the band-edge exponent checks, the finite-lattice convergence
//! report and the disorder tail fit.

/// Result of fitting `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (residual-based, n-2 degrees of freedom).
    pub slope_stderr: f64,
    /// Coefficient of determination.
    pub r2: f64,
}

/// Least-squares fit; panics if the arrays differ in length or hold fewer
/// than three points (a slope error needs n >= 3).
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    assert!(n >= 3, "need at least 3 points for a fit with error bars");
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    for i in 0..n {
        let r = y[i] - (slope * x[i] + intercept);
        ss_res += r * r;
    }
    let slope_stderr = (ss_res / (nf - 2.0) / sxx).sqrt();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LinearFit {
        slope,
        intercept,
        slope_stderr,
        r2,
    }
}
