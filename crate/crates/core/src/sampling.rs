//! Data generation under each life-testing scheme and reduction to sufficient statistics.
//!
//! Every variate is produced by inversion from a ChaCha8 stream, so a shared
//! stream yields samples that move exactly with the location and scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{check_removals, Design, Population, SchemeConfig, SufficientStats};

pub type Stream = ChaCha8Rng;

/// Independent stream number `index` under master seed `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `mu - scale ln(1 - u)`.
pub fn exponential_quantile(mu: f64, scale: f64, u: f64) -> f64 {
    mu + scale * -(-u).ln_1p()
}

/// Standard exponential variate by inversion.
pub fn standard_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p()
}

/// Sum of `shape` standard exponentials, a Gamma(shape, 1) variate.
pub fn standard_gamma<R: Rng + ?Sized>(rng: &mut R, shape: u32) -> f64 {
    let mut acc = 0.0;
    for _ in 0..shape {
        acc += standard_exponential(rng);
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeTag {
    Iid,
    TypeII { n: u32 },
    Progressive { removals: Vec<u32> },
    Records,
}

/// Ascending observations of one population.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    pub observations: Vec<f64>,
    pub scheme: SchemeTag,
}

/// `x_min`, `t` and the Gamma shape of `t` for one population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduced {
    pub x_min: f64,
    pub t: f64,
    pub shape: u32,
}

pub fn draw_iid<R: Rng + ?Sized>(pop: &Population, rng: &mut R) -> RawSample {
    let mut observations: Vec<f64> = (0..pop.n)
        .map(|_| pop.mu + pop.sigma * standard_exponential(rng))
        .collect();
    observations.sort_by(f64::total_cmp);
    RawSample {
        observations,
        scheme: SchemeTag::Iid,
    }
}

pub fn reduce_iid(raw: &RawSample) -> Result<Reduced> {
    let x = &raw.observations;
    if x.len() < 2 {
        return Err(Error::invalid(format!(
            "complete sample needs at least 2 observations, got {}",
            x.len()
        )));
    }
    let x_min = x[0];
    let t = x.iter().map(|&v| v - x_min).sum();
    Ok(Reduced {
        x_min,
        t,
        shape: x.len() as u32 - 1,
    })
}

/// First `m` order statistics of a sample of size `n`, via exponential spacings.
pub fn draw_type2<R: Rng + ?Sized>(pop: &Population, m: u32, rng: &mut R) -> Result<RawSample> {
    if m < 2 || m > pop.n {
        return Err(Error::invalid(format!(
            "type-II count must satisfy 2 <= m <= n, got m = {m}, n = {}",
            pop.n
        )));
    }
    let mut z = 0.0;
    let observations = (0..m)
        .map(|j| {
            z += standard_exponential(rng) / f64::from(pop.n - j);
            pop.mu + pop.sigma * z
        })
        .collect();
    Ok(RawSample {
        observations,
        scheme: SchemeTag::TypeII { n: pop.n },
    })
}

pub fn reduce_type2(prefix: &[f64], n: u32, m: u32) -> Result<Reduced> {
    if m < 2 || m > n || prefix.len() != m as usize {
        return Err(Error::invalid(format!(
            "type-II reduction needs 2 <= m <= n and m observations (m = {m}, n = {n}, got {})",
            prefix.len()
        )));
    }
    let x_min = prefix[0];
    let last = prefix[prefix.len() - 1] - x_min;
    let t = prefix.iter().map(|&v| v - x_min).sum::<f64>() + f64::from(n - m) * last;
    Ok(Reduced {
        x_min,
        t,
        shape: m - 1,
    })
}

/// Progressively censored failure times; `removals[j]` units leave after failure `j`.
pub fn draw_progressive_raw<R: Rng + ?Sized>(
    pop: &Population,
    removals: &[u32],
    rng: &mut R,
) -> Result<RawSample> {
    check_removals(removals, pop.n).map_err(Error::Invalid)?;
    let mut on_test = pop.n;
    let mut z = 0.0;
    let mut observations = Vec::with_capacity(removals.len());
    for &s in removals {
        z += standard_exponential(rng) / f64::from(on_test);
        observations.push(pop.mu + pop.sigma * z);
        on_test -= 1 + s;
    }
    Ok(RawSample {
        observations,
        scheme: SchemeTag::Progressive {
            removals: removals.to_vec(),
        },
    })
}

pub fn reduce_progressive(observations: &[f64], removals: &[u32]) -> Result<Reduced> {
    if observations.len() != removals.len() || observations.len() < 2 {
        return Err(Error::invalid(format!(
            "progressive reduction needs matching lengths >= 2 (got {} observations, {} removals)",
            observations.len(),
            removals.len()
        )));
    }
    let x_min = observations[0];
    let t = observations
        .iter()
        .zip(removals)
        .map(|(&x, &s)| f64::from(s + 1) * (x - x_min))
        .sum();
    Ok(Reduced {
        x_min,
        t,
        shape: observations.len() as u32 - 1,
    })
}

pub fn draw_progressive<R: Rng + ?Sized>(
    pop: &Population,
    removals: &[u32],
    rng: &mut R,
) -> Result<Reduced> {
    let raw = draw_progressive_raw(pop, removals, rng)?;
    reduce_progressive(&raw.observations, removals)
}

/// First `r` upper record values of an i.i.d. exponential sequence.
pub fn draw_record_values<R: Rng + ?Sized>(
    pop: &Population,
    r: u32,
    rng: &mut R,
) -> Result<RawSample> {
    if r < 2 {
        return Err(Error::invalid(format!(
            "record count must be >= 2, got {r}"
        )));
    }
    let mut z = 0.0;
    let observations = (0..r)
        .map(|_| {
            z += standard_exponential(rng);
            pop.mu + pop.sigma * z
        })
        .collect();
    Ok(RawSample {
        observations,
        scheme: SchemeTag::Records,
    })
}

/// First record and the spread of the first `r` records.
///
/// `t` is built from the increments alone, so it does not depend on `mu`.
pub fn draw_records<R: Rng + ?Sized>(pop: &Population, r: u32, rng: &mut R) -> Result<Reduced> {
    if r < 2 {
        return Err(Error::invalid(format!(
            "record count must be >= 2, got {r}"
        )));
    }
    let x_min = pop.mu + pop.sigma * standard_exponential(rng);
    let t = pop.sigma * standard_gamma(rng, r - 1);
    Ok(Reduced {
        x_min,
        t,
        shape: r - 1,
    })
}

/// Upper records of a sequence, in order of occurrence.
pub fn extract_records(sequence: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &x in sequence {
        if out.last().is_none_or(|&last| x > last) {
            out.push(x);
        }
    }
    out
}

/// Direct draw of `(x_min, t)`: `mu + (sigma/rate) E` and `sigma Gamma(shape)`.
pub fn draw_stats_direct<R: Rng + ?Sized>(
    pop: &Population,
    rate: u32,
    shape: u32,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if shape < 1 || rate < 1 {
        return Err(Error::invalid(format!(
            "direct draw needs shape >= 1 and rate >= 1 (shape = {shape}, rate = {rate})"
        )));
    }
    let x_min = pop.mu + pop.sigma / f64::from(rate) * standard_exponential(rng);
    let t = pop.sigma * standard_gamma(rng, shape);
    Ok((x_min, t))
}

/// Sufficient statistics for all populations by the direct path.
pub fn draw_scenario_stats<R: Rng + ?Sized>(
    pops: &[Population],
    design: &Design,
    rng: &mut R,
) -> Result<SufficientStats> {
    let k = pops.len();
    let mut stats = SufficientStats {
        x_min: Vec::with_capacity(k),
        t: Vec::with_capacity(k),
        shape: design.shapes.clone(),
    };
    for (j, pop) in pops.iter().enumerate() {
        let (x, t) = draw_stats_direct(pop, design.rates[j], design.shapes[j], rng)?;
        stats.x_min.push(x);
        stats.t.push(t);
    }
    Ok(stats)
}

/// Sufficient statistics for all populations through raw samples of the scheme.
pub fn draw_scenario_stats_raw<R: Rng + ?Sized>(
    pops: &[Population],
    scheme: &SchemeConfig,
    rng: &mut R,
) -> Result<SufficientStats> {
    let mut x_min = Vec::with_capacity(pops.len());
    let mut t = Vec::with_capacity(pops.len());
    let mut shape = Vec::with_capacity(pops.len());
    for (j, pop) in pops.iter().enumerate() {
        let red = match scheme {
            SchemeConfig::Iid => reduce_iid(&draw_iid(pop, rng))?,
            SchemeConfig::TypeII { m } => {
                let raw = draw_type2(pop, m[j], rng)?;
                reduce_type2(&raw.observations, pop.n, m[j])?
            }
            SchemeConfig::ProgressiveII { removals } => draw_progressive(pop, &removals[j], rng)?,
            SchemeConfig::Records { r } => {
                let raw = draw_record_values(pop, r[j], rng)?;
                let x = &raw.observations;
                Reduced {
                    x_min: x[0],
                    t: x[x.len() - 1] - x[0],
                    shape: r[j] - 1,
                }
            }
        };
        x_min.push(red.x_min);
        t.push(red.t);
        shape.push(red.shape);
    }
    Ok(SufficientStats { x_min, t, shape })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quantile_values() {
        assert_abs_diff_eq!(
            exponential_quantile(0.0, 1.0, 0.5),
            std::f64::consts::LN_2,
            epsilon = 1e-5
        );
        assert_abs_diff_eq!(
            exponential_quantile(0.0, 2.0, 0.5),
            2.0 * std::f64::consts::LN_2,
            epsilon = 1e-5
        );
    }

    #[test]
    fn iid_support_and_order() {
        let pop = Population::new(2.0, 1.0, 50);
        let raw = draw_iid(&pop, &mut stream(1, 0));
        assert!(raw.observations.iter().all(|&x| x > 2.0));
        assert!(raw.observations.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn reduce_iid_examples() {
        let r = |v: &[f64]| {
            reduce_iid(&RawSample {
                observations: v.to_vec(),
                scheme: SchemeTag::Iid,
            })
        };
        let a = r(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((a.x_min, a.t, a.shape), (1.0, 0.0, 2));
        let b = r(&[0.5, 1.0, 2.0]).unwrap();
        assert_eq!((b.x_min, b.t), (0.5, 2.0));
        let c = r(&[1.5, 2.0, 3.0]).unwrap();
        assert_eq!((c.x_min, c.t), (1.5, 2.0));
        assert!(r(&[1.0]).is_err());
    }

    #[test]
    fn reduce_type2_examples() {
        let full = reduce_type2(&[0.5, 1.0, 2.0], 3, 3).unwrap();
        assert_eq!(full.t, 2.0);
        let cens = reduce_type2(&[1.0, 1.2, 1.5], 5, 3).unwrap();
        assert_abs_diff_eq!(cens.t, 1.7, epsilon = 1e-12);
        assert_eq!(cens.shape, 2);
        assert_eq!(reduce_type2(&[1.0, 1.0], 5, 2).unwrap().t, 0.0);
        assert!(reduce_type2(&[1.0], 5, 1).is_err());
        assert!(reduce_type2(&[1.0, 2.0], 1, 2).is_err());
    }

    #[test]
    fn reduce_progressive_example() {
        let r = reduce_progressive(&[1.0, 1.5], &[0, 2]).unwrap();
        assert_abs_diff_eq!(r.t, 1.5, epsilon = 1e-15);
        assert_eq!(r.shape, 1);
    }

    #[test]
    fn progressive_rejects_bad_removals() {
        let pop = Population::new(0.0, 1.0, 4);
        assert!(draw_progressive(&pop, &[0, 1], &mut stream(0, 0)).is_err());
        assert!(draw_progressive(&pop, &[3], &mut stream(0, 0)).is_err());
        assert!(draw_progressive(&pop, &[0, 2], &mut stream(0, 0)).is_ok());
    }

    #[test]
    fn records() {
        let pop = Population::new(5.0, 2.0, 10);
        for rep in 0..100 {
            assert!(draw_records(&pop, 3, &mut stream(3, rep)).unwrap().x_min > 5.0);
        }
        let a = draw_records(&Population::new(0.0, 2.0, 10), 4, &mut stream(9, 1)).unwrap();
        let b = draw_records(&pop, 4, &mut stream(9, 1)).unwrap();
        assert_eq!(a.t.to_bits(), b.t.to_bits());
        assert!(draw_records(&pop, 1, &mut stream(0, 0)).is_err());
        assert_eq!(
            extract_records(&[1.0, 0.5, 2.0, 2.0, 3.0, 1.0]),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn direct_path_is_deterministic() {
        let pop = Population::new(0.0, 1.0, 5);
        let a = draw_stats_direct(&pop, 5, 4, &mut stream(42, 7)).unwrap();
        let b = draw_stats_direct(&pop, 5, 4, &mut stream(42, 7)).unwrap();
        assert_eq!(a, b);
        assert!(draw_stats_direct(&pop, 5, 0, &mut stream(42, 7)).is_err());
    }

    #[test]
    fn streams_differ() {
        let a: f64 = stream(1, 0).random();
        let b: f64 = stream(1, 1).random();
        let c: f64 = stream(2, 0).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
