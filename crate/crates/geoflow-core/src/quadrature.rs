//! Composite Simpson quadrature on uniform grids.
//!
//! Every integral in this crate runs through the two routines here: a
//! full-interval rule and a cumulative prefix rule that retains fourth-order
//! accuracy at interior nodes. Both require an even number of panels.

/// Composite Simpson weights for `n + 1` samples with spacing `h`.
///
/// `n` must be even and >= 2. The returned weights `w` satisfy
/// `integral = sum(w[i] * f[i])` with error O(h^4) for smooth `f`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0, "Simpson rule needs even n >= 2");
    let mut w = vec![0.0; n + 1];
    let third = h / 3.0;
    w[0] = third;
    w[n] = third;
    for (i, wi) in w.iter_mut().enumerate().skip(1).take(n - 1) {
        *wi = if i % 2 == 1 { 4.0 * third } else { 2.0 * third };
    }
    w
}

/// Integral of the samples `f` over the whole grid with spacing `h`.
///
/// `f.len()` must be odd (even panel count).
pub fn integrate(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    assert!(n >= 2 && n % 2 == 0, "Simpson rule needs even n >= 2");
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, &fi) in f.iter().enumerate().skip(1).take(n - 1) {
        if i % 2 == 1 {
            odd += fi;
        } else {
            even += fi;
        }
    }
    (f[0] + f[n] + 4.0 * odd + 2.0 * even) * h / 3.0
}

/// Cumulative integral `F[i] = integral of f from node 0 to node i`.
///
/// Even nodes use composite Simpson pairs; odd nodes correct the previous
/// pair with the three-point Newton-Cotes half-panel rule, so every prefix
/// is third-order or better and the final entry equals `integrate(f, h)`.
pub fn cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len() - 1;
    assert!(n >= 2 && n % 2 == 0, "cumulative rule needs even n >= 2");
    let c = h / 12.0;
    let mut out = vec![0.0; n + 1];
    out[1] = c * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    for i in (2..=n).step_by(2) {
        out[i] = out[i - 2] + c * 4.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        if i < n {
            out[i + 1] = out[i] + c * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]);
        }
    }
    out
}

/// Least-squares line through `(xs, ys)`: returns `(slope, intercept, r2)`.
///
/// `r2` is the coefficient of determination; it is 1.0 when the fit is
/// exact and 0.0 when the line explains none of the variance. Requires at
/// least two points with distinct abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points to fit a line");
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    assert!(sxx > 0.0, "abscissae are all equal");
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let h = 0.1;
        let w = simpson_weights(8, h);
        let total: f64 = w.iter().sum();
        assert!((total - 0.8).abs() < 1e-15);
    }

    #[test]
    fn integrates_cubics_exactly() {
        // Simpson is exact on polynomials of degree <= 3.
        let n = 6;
        let h = 0.5;
        let f: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 * h;
                2.0 * x * x * x - x * x + 3.0 * x - 1.0
            })
            .collect();
        // Antiderivative: x^4/2 - x^3/3 + 3x^2/2 - x at x = 3.
        let exact = 40.5 - 9.0 + 13.5 - 3.0;
        assert!((integrate(&f, h) - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn integral_of_sine_over_half_period() {
        let n = 64;
        let h = std::f64::consts::PI / n as f64;
        let f: Vec<f64> = (0..=n).map(|i| (i as f64 * h).sin()).collect();
        // integral of sin over [0, pi] = 2; composite Simpson error ~ h^4.
        assert!((integrate(&f, h) - 2.0).abs() < 1e-7);
    }

    #[test]
    fn integrate_matches_weighted_sum() {
        let n = 10;
        let h = 0.3;
        let f: Vec<f64> = (0..=n).map(|i| ((i * i) as f64).sin()).collect();
        let w = simpson_weights(n, h);
        let by_weights: f64 = w.iter().zip(&f).map(|(wi, fi)| wi * fi).sum();
        assert!((integrate(&f, h) - by_weights).abs() < 1e-14);
    }

    #[test]
    fn cumulative_endpoint_agrees_with_integrate() {
        let n = 40;
        let h = 0.05;
        let f: Vec<f64> = (0..=n).map(|i| (1.0 + i as f64 * h).ln()).collect();
        let c = cumulative(&f, h);
        assert!((c[n] - integrate(&f, h)).abs() < 1e-14);
    }

    #[test]
    fn cumulative_tracks_antiderivative_of_exp() {
        let n = 32;
        let h = 1.0 / n as f64;
        let f: Vec<f64> = (0..=n).map(|i| (i as f64 * h).exp()).collect();
        let c = cumulative(&f, h);
        for (i, ci) in c.iter().enumerate() {
            let exact = (i as f64 * h).exp() - 1.0;
            // Third-order prefix rule: h^3 ~ 3e-5 per panel, accumulated
            // errors stay two orders below that here.
            assert!(
                (ci - exact).abs() < 3e-7,
                "node {i}: got {ci}, want {exact}"
            );
        }
    }

    #[test]
    fn cumulative_is_exact_on_quadratics() {
        // Both the paired Simpson step and the half-panel correction
        // integrate quadratics exactly.
        let n = 8;
        let h = 0.25;
        let f: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 * h;
                3.0 * x * x - 2.0 * x + 1.0
            })
            .collect();
        let c = cumulative(&f, h);
        for (i, ci) in c.iter().enumerate() {
            let x = i as f64 * h;
            let exact = x * x * x - x * x + x;
            assert!((ci - exact).abs() < 1e-14, "node {i}");
        }
    }

    #[test]
    fn cumulative_fourth_order_at_even_nodes() {
        // Halving h should shrink even-node errors by ~16x.
        let err = |n: usize| {
            let h = 2.0 / n as f64;
            let f: Vec<f64> = (0..=n).map(|i| (1.5 * i as f64 * h).cos()).collect();
            let c = cumulative(&f, h);
            let mut worst = 0.0f64;
            for i in (0..=n).step_by(2) {
                let x = i as f64 * h;
                let exact = (1.5 * x).sin() / 1.5;
                worst = worst.max((c[i] - exact).abs());
            }
            worst
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -2.5 * x + 4.0).collect();
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        assert!((slope + 2.5).abs() < 1e-12);
        assert!((intercept - 4.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_r2_drops_for_noise() {
        // Deterministic "noise": alternating signs uncorrelated with x.
        let xs: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let ys: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let (_, _, r2) = linear_fit(&xs, &ys);
        assert!(r2 < 0.05, "r2 {r2}");
    }
}
