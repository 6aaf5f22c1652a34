use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};

/// CDF of Gamma(shape, scale).
pub fn gamma_cdf(shape: f64, scale: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        if x <= 0.0 {
            0.0
        } else {
            gamma_lr(shape, x / scale)
        }
    }
}

/// One-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("KS statistic of an empty sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    });
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("KS statistic of an empty sample"));
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0_f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic one-sample critical value at level `alpha`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Asymptotic two-sample critical value at level `alpha`.
pub fn ks_two_sample_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{standard_exponential, stream};

    #[test]
    fn critical_values() {
        assert!((ks_critical_value(10_000, 0.01) * 100.0 - 1.6276).abs() < 1e-3);
        assert!(
            (ks_two_sample_critical_value(100, 100, 0.01) - 1.6276 * 0.02_f64.sqrt()).abs() < 1e-3
        );
    }

    #[test]
    fn exponential_samples_fit() {
        let mut rng = stream(17, 0);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| standard_exponential(&mut rng))
            .collect();
        let d = ks_statistic(&xs, gamma_cdf(1.0, 1.0)).unwrap();
        assert!(d < ks_critical_value(xs.len(), 0.01));
        let wrong = ks_statistic(&xs, gamma_cdf(2.0, 1.0)).unwrap();
        assert!(wrong > 10.0 * ks_critical_value(xs.len(), 0.01));
    }

    #[test]
    fn constant_sample() {
        let cdf = gamma_cdf(1.0, 1.0);
        let c = 0.4;
        let d = ks_statistic(&[c; 200], &cdf).unwrap();
        assert!((d - cdf(c).max(1.0 - cdf(c))).abs() < 1e-12);
        assert!(ks_statistic(&[], &cdf).is_err());
    }

    #[test]
    fn two_sample() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }
}
