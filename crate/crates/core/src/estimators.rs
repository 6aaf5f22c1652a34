//! Point estimators of a target location parameter.
//!
//! The free functions follow the complete-sample parameterization (`ns` are
//! sample sizes). [`EstimatorPlan`] precomputes the same constants for any
//! life-testing design and is what the risk engine evaluates.

use crate::error::{Error, Result};
use crate::model::{
    BleeVariant, BoundExponent, Design, EstimatorId, Scenario, ScenarioKind, SufficientStats,
};

fn check_p(p: f64) {
    assert!(
        p.is_finite() && p != 0.0,
        "loss shape p must be finite and nonzero, got {p}"
    );
}

/// `(1/p) (1 - (rate/(rate - p))^{1/(shape + 1)})`, the minimizer over `c` of the
/// risk of `x_min + c t` when the minimum has rate `rate` and `t ~ Gamma(shape)`.
pub fn affine_multiplier(rate: u32, shape: u32, p: f64) -> f64 {
    check_p(p);
    let r = f64::from(rate);
    assert!(
        r > p,
        "multiplier requires rate > p (rate = {rate}, p = {p})"
    );
    // ln(r / (r - p))
    let log_base = -(-p / r).ln_1p();
    -(log_base / (f64::from(shape) + 1.0)).exp_m1() / p
}

/// Affine equivariant multiplier for a complete sample of size `n_i`.
pub fn c0(n_i: u32, p: f64) -> f64 {
    assert!(n_i >= 2, "c0 requires n_i >= 2, got {n_i}");
    affine_multiplier(n_i, n_i - 1, p)
}

/// Multiplier of the pooled statistic (shape `n - k`) for component size `n_i`.
pub fn beta0(n_i: u32, n: u32, k: u32, p: f64) -> f64 {
    assert!(n > k, "beta0 requires n - k >= 1 (n = {n}, k = {k})");
    affine_multiplier(n_i, n - k, p)
}

/// Clip-bound factor `(1/p)(1 - (rate/(rate - p))^{1/count})`.
pub fn bound_factor(rate: u32, count: u32, p: f64) -> f64 {
    assert!(count >= 1, "bound exponent count must be positive");
    affine_multiplier(rate, count - 1, p)
}

/// Ordered-scale clip-bound factor with the exponent `1/(n + 1)`, `n = sum ns`.
pub fn ordered_scale_bound(i: usize, ns: &[u32], p: f64) -> f64 {
    let n: u32 = ns.iter().sum();
    bound_factor(ns[i], n + 1, p)
}

pub fn baee_affine(x_min_i: f64, t_i: f64, mult: f64) -> f64 {
    x_min_i + mult * t_i
}

pub fn mle(i: usize, x_mins: &[f64]) -> f64 {
    x_mins[i]
}

/// `min(x_min_i, ..., x_min_k)`.
pub fn rmle(i: usize, x_mins: &[f64]) -> f64 {
    x_mins[i..].iter().copied().fold(f64::INFINITY, f64::min)
}

/// Location equivariant shift for a known scale.
pub fn blee_known_scale(n_i: u32, sigma_i: f64, p: f64, variant: BleeVariant) -> f64 {
    check_p(p);
    let n = f64::from(n_i);
    match variant {
        BleeVariant::PaperPrinted => {
            assert!(n > p * sigma_i, "printed shift requires n_i > p sigma_i");
            (-p * sigma_i / n).ln_1p() / p
        }
        BleeVariant::LossConsistent => {
            assert!(n > p, "shift requires n_i > p");
            sigma_i * (-p / n).ln_1p() / p
        }
    }
}

/// `q = sum n_j / sigma_j`.
pub fn rate_sum(ns: &[u32], sigmas: &[f64]) -> f64 {
    ns.iter().zip(sigmas).map(|(&n, &s)| f64::from(n) / s).sum()
}

/// `g = (sigma_i/p) ln((q sigma_i - p)/(q sigma_i))`.
pub fn known_scale_shift(q: f64, sigma_i: f64, p: f64) -> f64 {
    check_p(p);
    let qs = q * sigma_i;
    assert!(qs > p, "known-scale shift requires q sigma_i > p");
    sigma_i * (-p / qs).ln_1p() / p
}

/// `min(0, Y_j)` over `j` in `range`, relative to component `i`.
fn min_diff(x_mins: &[f64], i: usize, range: std::ops::Range<usize>) -> f64 {
    x_mins[range]
        .iter()
        .fold(0.0_f64, |m, &x| m.min(x - x_mins[i]))
}

/// Ordered-scale improvement with explicit multiplier `c` and bound factor `d`.
pub fn improved_ordered_scale_with(
    i: usize,
    x_mins: &[f64],
    t: &[f64],
    c: f64,
    d: f64,
) -> Result<f64> {
    let ti = t[i];
    if !(ti > 0.0) {
        return Err(Error::Degenerate(format!(
            "t_{} = {ti}; the ratios t_j/t_i are undefined",
            i + 1
        )));
    }
    let mult = if i == 0 {
        let w: f64 = t[1..].iter().map(|&tj| tj / ti).sum();
        let lower = d * (1.0 + w);
        let upper = d;
        if c <= lower {
            lower
        } else if c >= upper {
            upper
        } else {
            c
        }
    } else {
        let w: f64 = t[..i].iter().map(|&tj| tj / ti).sum();
        let upper = d * (1.0 + w);
        if c >= upper {
            upper
        } else {
            c
        }
    };
    Ok(x_mins[i] + mult * ti)
}

/// Ordered-scale improvement over the affine equivariant estimator.
pub fn improved_ordered_scale(
    i: usize,
    stats: &SufficientStats,
    ns: &[u32],
    p: f64,
) -> Result<f64> {
    improved_ordered_scale_with(
        i,
        &stats.x_min,
        &stats.t,
        c0(ns[i], p),
        ordered_scale_bound(i, ns, p),
    )
}

/// Known-scale improvement with explicit shift `alpha` and bound shift `g`.
pub fn improved_known_scale_with(i: usize, x_mins: &[f64], alpha: f64, g: f64) -> f64 {
    let k = x_mins.len();
    let x = x_mins[i];
    if i + 1 < k {
        let gamma = g + min_diff(x_mins, i, i + 1..k);
        if alpha > gamma {
            x + gamma
        } else {
            x + alpha
        }
    } else {
        let nu = g + min_diff(x_mins, i, 0..k - 1);
        let gamma = g;
        if alpha <= nu {
            x + nu
        } else if alpha >= gamma {
            x + gamma
        } else {
            x + alpha
        }
    }
}

pub fn improved_known_scale(
    i: usize,
    x_mins: &[f64],
    ns: &[u32],
    sigmas: &[f64],
    p: f64,
    variant: BleeVariant,
) -> f64 {
    let alpha = blee_known_scale(ns[i], sigmas[i], p, variant);
    let g = known_scale_shift(rate_sum(ns, sigmas), sigmas[i], p);
    improved_known_scale_with(i, x_mins, alpha, g)
}

/// Restricted MLE shifted by the known-scale bound constant.
pub fn rmle_improved(i: usize, x_mins: &[f64], ns: &[u32], sigmas: &[f64], p: f64) -> f64 {
    rmle(i, x_mins) + known_scale_shift(rate_sum(ns, sigmas), sigmas[i], p)
}

/// `x_min_i + min(scaled, min(0, Y_{i+1}, ..., Y_k))`, or `+ min(scaled, 0)` for the last component.
fn capped_shift(i: usize, x_mins: &[f64], scaled: f64) -> f64 {
    let k = x_mins.len();
    let cap = if i + 1 < k {
        min_diff(x_mins, i, i + 1..k)
    } else {
        0.0
    };
    x_mins[i] + scaled.min(cap)
}

pub fn improved_equal_scale_with(i: usize, x_mins: &[f64], t_pooled: f64, beta: f64) -> f64 {
    capped_shift(i, x_mins, beta * t_pooled)
}

/// Equal-unknown-scale improvement using the pooled statistic.
pub fn improved_equal_scale(i: usize, x_mins: &[f64], t_pooled: f64, ns: &[u32], p: f64) -> f64 {
    let n: u32 = ns.iter().sum();
    let beta = beta0(ns[i], n, ns.len() as u32, p);
    improved_equal_scale_with(i, x_mins, t_pooled, beta)
}

pub fn improved_unequal_scale_with(i: usize, x_mins: &[f64], t_i: f64, kappa: f64) -> f64 {
    capped_shift(i, x_mins, kappa * t_i)
}

/// Unequal-unknown-scale improvement; the multiplier uses the Gamma shape of `t_i`.
pub fn improved_unequal_scale(i: usize, stats: &SufficientStats, ns: &[u32], p: f64) -> f64 {
    let kappa = affine_multiplier(ns[i], stats.shape[i], p);
    improved_unequal_scale_with(i, &stats.x_min, stats.t[i], kappa)
}

/// Coordinate of the sufficient statistic along which kinks are located.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    XMin(usize),
    T(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rule {
    Mle,
    Rmle { shift: f64 },
    Affine { mult: f64 },
    Pooled { mult: f64 },
    Shift { alpha: f64 },
    OrderedScale { c: f64, d: f64 },
    KnownScale { alpha: f64, g: f64 },
    EqualScale { beta: f64 },
    UnequalScale { kappa: f64 },
}

/// An estimator with every constant precomputed for one scenario and design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorPlan {
    estimator: EstimatorId,
    target: usize,
    rule: Rule,
}

impl EstimatorPlan {
    /// Assumes the scenario, design and `p` passed validation.
    pub fn new(
        estimator: EstimatorId,
        scenario: &Scenario,
        design: &Design,
        p: f64,
    ) -> Result<Self> {
        if !estimator.applies_to(scenario.kind) {
            return Err(Error::EstimatorMismatch {
                estimator,
                kind: scenario.kind,
            });
        }
        let i = scenario.target;
        let rate = design.rates[i];
        let shape = design.shapes[i];
        let sigma = scenario.populations[i].sigma;
        let known_g = || {
            let q: f64 = design
                .rates
                .iter()
                .zip(&scenario.populations)
                .map(|(&r, pop)| f64::from(r) / pop.sigma)
                .sum();
            known_scale_shift(q, sigma, p)
        };
        let rule = match estimator {
            EstimatorId::Mle => Rule::Mle,
            EstimatorId::Rmle => Rule::Rmle { shift: 0.0 },
            EstimatorId::RmleImproved => Rule::Rmle { shift: known_g() },
            EstimatorId::Baee => {
                if scenario.kind == ScenarioKind::LocEqualUnknownScale {
                    Rule::Pooled {
                        mult: affine_multiplier(rate, design.pooled_shape(), p),
                    }
                } else {
                    Rule::Affine {
                        mult: affine_multiplier(rate, shape, p),
                    }
                }
            }
            EstimatorId::Blee(v) => Rule::Shift {
                alpha: blee_known_scale(rate, sigma, p, v),
            },
            EstimatorId::ImprovedOrderedScale(e) => {
                let count = match e {
                    BoundExponent::Printed => design.effective_total() + 1,
                    BoundExponent::ShapeConsistent => design.pooled_shape() + 1,
                };
                Rule::OrderedScale {
                    c: affine_multiplier(rate, shape, p),
                    d: bound_factor(rate, count, p),
                }
            }
            EstimatorId::ImprovedKnownScale(v) => Rule::KnownScale {
                alpha: blee_known_scale(rate, sigma, p, v),
                g: known_g(),
            },
            EstimatorId::ImprovedEqualScale => Rule::EqualScale {
                beta: affine_multiplier(rate, design.pooled_shape(), p),
            },
            EstimatorId::ImprovedUnequalScale => Rule::UnequalScale {
                kappa: affine_multiplier(rate, shape, p),
            },
        };
        Ok(Self {
            estimator,
            target: i,
            rule,
        })
    }

    pub fn estimator(&self) -> EstimatorId {
        self.estimator
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Evaluates the estimate; fails only for the ordered-scale rule with `t_i = 0`.
    pub fn estimate(&self, stats: &SufficientStats) -> Result<f64> {
        self.estimate_raw(&stats.x_min, &stats.t)
    }

    pub fn estimate_raw(&self, x_min: &[f64], t: &[f64]) -> Result<f64> {
        let i = self.target;
        Ok(match self.rule {
            Rule::Mle => x_min[i],
            Rule::Rmle { shift } => rmle(i, x_min) + shift,
            Rule::Affine { mult } => baee_affine(x_min[i], t[i], mult),
            Rule::Pooled { mult } => baee_affine(x_min[i], t.iter().sum(), mult),
            Rule::Shift { alpha } => x_min[i] + alpha,
            Rule::OrderedScale { c, d } => return improved_ordered_scale_with(i, x_min, t, c, d),
            Rule::KnownScale { alpha, g } => improved_known_scale_with(i, x_min, alpha, g),
            Rule::EqualScale { beta } => improved_equal_scale_with(i, x_min, t.iter().sum(), beta),
            Rule::UnequalScale { kappa } => improved_unequal_scale_with(i, x_min, t[i], kappa),
        })
    }

    /// Values of a non-target coordinate at which the estimate is not smooth,
    /// holding the other coordinates fixed. May include spurious candidates.
    pub fn kinks(&self, x_min: &[f64], t: &[f64], along: Coordinate) -> Vec<f64> {
        let i = self.target;
        let k = x_min.len();
        let xi = x_min[i];
        // min(0, Y_l) over l in `range` excluding j
        let others = |j: usize, range: std::ops::Range<usize>| {
            range
                .filter(|&l| l != j)
                .fold(0.0_f64, |m, l| m.min(x_min[l] - xi))
        };
        match (self.rule, along) {
            (Rule::Rmle { .. }, Coordinate::XMin(j)) if j > i => {
                let m = (i..k)
                    .filter(|&l| l != j)
                    .map(|l| x_min[l])
                    .fold(f64::INFINITY, f64::min);
                vec![m]
            }
            (Rule::OrderedScale { c, d }, Coordinate::T(j)) if j != i => {
                let ti = t[i];
                let factor = c / d - 1.0;
                let rest: f64 = if i == 0 {
                    (1..k).filter(|&l| l != j).map(|l| t[l]).sum()
                } else if j < i {
                    (0..i).filter(|&l| l != j).map(|l| t[l]).sum()
                } else {
                    return Vec::new();
                };
                vec![ti * factor - rest]
            }
            (Rule::KnownScale { alpha, g }, Coordinate::XMin(j)) => {
                let active = if i + 1 < k { j > i } else { j < i };
                if !active {
                    return Vec::new();
                }
                let range = if i + 1 < k { i + 1..k } else { 0..k - 1 };
                vec![xi + others(j, range), xi + alpha - g]
            }
            (Rule::EqualScale { beta }, Coordinate::XMin(j)) if j > i => {
                let scaled = beta * t.iter().sum::<f64>();
                vec![xi + others(j, i + 1..k), xi + scaled]
            }
            (Rule::UnequalScale { kappa }, Coordinate::XMin(j)) if j > i => {
                vec![xi + others(j, i + 1..k), xi + kappa * t[i]]
            }
            _ => Vec::new(),
        }
    }
}
