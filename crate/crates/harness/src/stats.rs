//! Binomial confidence intervals.

/// Two-sided 95 % normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // Reference values from statsmodels proportion_confint(method="wilson").
        let (lo, hi) = wilson(10, 100, Z95);
        assert!((lo - 0.055_229_137_1).abs() < 1e-8, "{lo}");
        assert!((hi - 0.174_365_661_5).abs() < 1e-8, "{hi}");
        let (lo, hi) = wilson(0, 50, Z95);
        assert!(lo.abs() < 1e-12, "{lo}");
        assert!((hi - 0.071_347_599_1).abs() < 1e-8, "{hi}");
    }

    #[test]
    fn width_shrinks_with_samples() {
        let w = |n: u64| {
            let (lo, hi) = wilson(n / 100, n, Z95);
            hi - lo
        };
        let ratio = w(10_000) / w(1_000_000);
        assert!((ratio - 10.0).abs() < 0.2, "{ratio}");
    }
}
