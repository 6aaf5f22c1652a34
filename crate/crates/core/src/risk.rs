//! Linex loss, closed-form risks and the Monte Carlo risk engine.
//!
//! Replication `r` draws from stream `r` of the master seed, and all
//! estimators at a grid point see the same draws. Losses are reduced with a
//! fixed pairwise tree, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::EstimatorPlan;
use crate::model::{
    validate, EstimatorId, LossSpec, Population, PriResult, RiskEstimate, Scenario, SchemeConfig,
};
use crate::sampling::{draw_scenario_stats, stream};

/// `e^{pt} - pt - 1` with `t = (delta - mu)/sigma`.
pub fn linex_loss(delta: f64, mu: f64, sigma: f64, p: f64) -> f64 {
    assert!(sigma > 0.0, "sigma must be positive");
    assert!(p != 0.0, "p must be nonzero");
    let x = p * (delta - mu) / sigma;
    (x.exp_m1() - x).max(0.0)
}

/// Exact risk of `x_min + c t` with `t ~ Gamma(m, sigma)` and minimum rate `n_i`.
pub fn analytic_affine_risk(c: f64, n_i: u32, m: u32, p: f64) -> Result<f64> {
    let n = f64::from(n_i);
    if !(n > p) {
        return Err(Error::invalid(format!(
            "affine risk requires n_i > p ({n_i} <= {p})"
        )));
    }
    if c * p >= 1.0 {
        return Err(Error::MgfDivergence(c * p));
    }
    let m = f64::from(m);
    let a = n / (n - p);
    Ok(a * (-m * (-p * c).ln_1p()).exp() - p / n - p * c * m - 1.0)
}

/// Exact risk of `x_min + alpha` under the `sigma`-scaled Linex loss.
pub fn analytic_shift_risk(alpha: f64, n_i: u32, sigma_i: f64, p: f64) -> f64 {
    let n = f64::from(n_i);
    assert!(n > p, "shift risk requires n_i > p");
    let z = p * alpha / sigma_i;
    z.exp() * n / (n - p) - z - p / n - 1.0
}

/// A validated scenario, scheme and loss.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub scenario: Scenario,
    pub scheme: SchemeConfig,
    pub loss: LossSpec,
}

impl GridPoint {
    pub fn new(scenario: Scenario, scheme: SchemeConfig, loss: LossSpec) -> Result<Self> {
        validate(&scenario, &scheme, &loss).into_result()?;
        Ok(Self {
            scenario,
            scheme,
            loss,
        })
    }

    /// `sigma_1 / sigma_2`, the ordered-scale table axis.
    pub fn scale_ratio(&self) -> f64 {
        let pops = &self.scenario.populations;
        pops[0].sigma / pops[1].sigma
    }

    /// `mu_2 - mu_1`, the ordered-location table axis.
    pub fn location_gap(&self) -> f64 {
        let pops = &self.scenario.populations;
        pops[1].mu - pops[0].mu
    }

    pub fn plans(&self, estimators: &[EstimatorId]) -> Result<Vec<EstimatorPlan>> {
        let design = self.scheme.design(&self.scenario.populations);
        estimators
            .iter()
            .map(|&e| EstimatorPlan::new(e, &self.scenario, &design, self.loss.p()))
            .collect()
    }
}

/// Per-replication losses of several estimators on common random numbers.
#[derive(Debug, Clone)]
pub struct CrnRun {
    pub estimators: Vec<EstimatorId>,
    pub reps: u64,
    pub seed: u64,
    /// Row-major: `losses[r * estimators.len() + e]`.
    losses: Vec<f64>,
}

/// Mean and standard error of a paired loss difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedDifference {
    pub mean: f64,
    pub std_error: f64,
}

impl CrnRun {
    pub fn losses_of(&self, e: usize) -> Vec<f64> {
        let width = self.estimators.len();
        self.losses.iter().skip(e).step_by(width).copied().collect()
    }

    pub fn risk(&self, e: usize) -> RiskEstimate {
        let (mean_loss, std_error) = mean_and_se(&self.losses_of(e));
        RiskEstimate {
            mean_loss,
            std_error,
            reps: self.reps,
            seed: self.seed,
        }
    }

    /// `loss(a) - loss(b)` averaged over replications.
    pub fn paired(&self, a: usize, b: usize) -> PairedDifference {
        let width = self.estimators.len();
        let d: Vec<f64> = self
            .losses
            .chunks_exact(width)
            .map(|row| row[a] - row[b])
            .collect();
        let (mean, std_error) = mean_and_se(&d);
        PairedDifference { mean, std_error }
    }

    pub fn pri(&self, baseline: usize, candidate: usize) -> Result<PriResult> {
        pri(
            self.estimators[baseline],
            &self.risk(baseline),
            self.estimators[candidate],
            &self.risk(candidate),
        )
    }
}

/// Monte Carlo losses of `estimators` at `point` on shared draws.
///
/// Draws are generated relative to the target location, which leaves every
/// location equivariant estimate unchanged in distribution and makes the
/// output bit-identical under a common shift of all locations.
pub fn mc_risks(
    estimators: &[EstimatorId],
    point: &GridPoint,
    reps: u64,
    seed: u64,
) -> Result<CrnRun> {
    if reps < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 replications, got {reps}"
        )));
    }
    if estimators.is_empty() {
        return Err(Error::invalid("no estimators requested"));
    }
    validate(&point.scenario, &point.scheme, &point.loss).into_result()?;
    let plans = point.plans(estimators)?;
    let scenario = &point.scenario;
    let i = scenario.target;
    let mu_i = scenario.populations[i].mu;
    let sigma_i = scenario.populations[i].sigma;
    let centered: Vec<Population> = scenario
        .populations
        .iter()
        .map(|pop| Population {
            mu: pop.mu - mu_i,
            ..*pop
        })
        .collect();
    let design = point.scheme.design(&scenario.populations);
    let p = point.loss.p();
    let width = plans.len();
    let reps_usize = usize::try_from(reps).map_err(|_| Error::invalid("too many replications"))?;
    let mut losses = vec![0.0; reps_usize * width];

    losses
        .par_chunks_mut(width)
        .enumerate()
        .try_for_each(|(r, row)| -> Result<()> {
            let mut rng = stream(seed, r as u64);
            let stats = draw_scenario_stats(&centered, &design, &mut rng)?;
            for (slot, plan) in row.iter_mut().zip(&plans) {
                let est = plan.estimate(&stats)?;
                *slot = linex_loss(est, 0.0, sigma_i, p);
            }
            Ok(())
        })?;

    Ok(CrnRun {
        estimators: estimators.to_vec(),
        reps,
        seed,
        losses,
    })
}

pub fn mc_risk(
    estimator: EstimatorId,
    point: &GridPoint,
    reps: u64,
    seed: u64,
) -> Result<RiskEstimate> {
    Ok(mc_risks(&[estimator], point, reps, seed)?.risk(0))
}

/// `100 (R0 - R) / R0`.
pub fn pri(
    baseline_id: EstimatorId,
    baseline: &RiskEstimate,
    candidate_id: EstimatorId,
    candidate: &RiskEstimate,
) -> Result<PriResult> {
    let r0 = baseline.mean_loss;
    if !(r0 > 0.0) {
        return Err(Error::invalid(format!(
            "baseline risk must be positive to compute PRI, got {r0}"
        )));
    }
    Ok(PriResult {
        baseline: baseline_id,
        candidate: candidate_id,
        pri_percent: 100.0 * (r0 - candidate.mean_loss) / r0,
    })
}

/// Sum by a fixed binary tree over the slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and `sd / sqrt(n)`.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::c0;
    use crate::model::{Population, ScenarioKind};
    use approx::assert_abs_diff_eq;

    #[test]
    fn loss_values() {
        assert_eq!(linex_loss(3.0, 3.0, 2.0, 1.5), 0.0);
        assert_abs_diff_eq!(linex_loss(1.0, 0.0, 1.0, 1.0), 0.718282, epsilon = 1e-5);
        assert_abs_diff_eq!(linex_loss(-1.0, 0.0, 1.0, 1.0), 0.367879, epsilon = 1e-5);
    }

    #[test]
    fn affine_risk_values() {
        let r = analytic_affine_risk(c0(5, 1.0), 5, 4, 1.0).unwrap();
        assert_abs_diff_eq!(r, 0.028199, epsilon = 1e-5);
        assert_abs_diff_eq!(
            analytic_affine_risk(0.0, 5, 9, 1.0).unwrap(),
            0.05,
            epsilon = 1e-15
        );
        assert!(matches!(
            analytic_affine_risk(1.0, 5, 4, 1.0),
            Err(Error::MgfDivergence(_))
        ));
        let mle = RiskEstimate {
            mean_loss: 0.05,
            std_error: 0.0,
            reps: 2,
            seed: 0,
        };
        let baee = RiskEstimate {
            mean_loss: r,
            ..mle
        };
        let pr = pri(EstimatorId::Mle, &mle, EstimatorId::Baee, &baee).unwrap();
        assert_abs_diff_eq!(pr.pri_percent, 43.60, epsilon = 5e-3);
    }

    #[test]
    fn shift_risk_properties() {
        let mle = 5.0 / 4.0 - 0.2 - 1.0;
        assert_abs_diff_eq!(analytic_shift_risk(0.0, 5, 1.5, 1.0), mle, epsilon = 1e-15);
        let f = |a| analytic_shift_risk(a, 5, 1.5, 1.0);
        for (a, b) in [(-1.0, 0.5), (-0.3, -0.2), (0.1, 2.0)] {
            assert!(f(0.5 * a + 0.5 * b) < 0.5 * (f(a) + f(b)));
        }
    }

    #[test]
    fn pri_rules() {
        let a = RiskEstimate {
            mean_loss: 0.1,
            std_error: 0.0,
            reps: 2,
            seed: 0,
        };
        let worse = RiskEstimate {
            mean_loss: 0.2,
            ..a
        };
        assert_eq!(
            pri(EstimatorId::Mle, &a, EstimatorId::Baee, &a)
                .unwrap()
                .pri_percent,
            0.0
        );
        assert!(
            pri(EstimatorId::Mle, &a, EstimatorId::Baee, &worse)
                .unwrap()
                .pri_percent
                < 0.0
        );
        let zero = RiskEstimate {
            mean_loss: 0.0,
            ..a
        };
        assert!(pri(EstimatorId::Mle, &zero, EstimatorId::Baee, &a).is_err());
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        let (m, se) = mean_and_se(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_abs_diff_eq!(se, 1.0, epsilon = 1e-15);
    }

    fn ordered(mu: (f64, f64), sigma: (f64, f64), p: f64) -> GridPoint {
        GridPoint::new(
            Scenario::new(
                ScenarioKind::OrderedScale,
                vec![
                    Population::new(mu.0, sigma.0, 5),
                    Population::new(mu.1, sigma.1, 5),
                ],
                0,
            ),
            SchemeConfig::Iid,
            LossSpec::new(p).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn mc_matches_closed_form() {
        let pt = ordered((0.0, 0.0), (1.0, 1.0), 1.0);
        let run = mc_risks(&[EstimatorId::Mle, EstimatorId::Baee], &pt, 50_000, 11).unwrap();
        let mle = run.risk(0);
        let baee = run.risk(1);
        assert!((mle.mean_loss - 0.05).abs() < 3.0 * mle.std_error);
        assert!((baee.mean_loss - 0.028199).abs() < 3.0 * baee.std_error);
    }

    #[test]
    fn common_shift_is_bit_identical() {
        let a = ordered((0.0, 0.0), (1.0, 2.0), 1.0);
        let b = ordered((7.0, 7.0), (1.0, 2.0), 1.0);
        let e = [EstimatorId::Baee, EstimatorId::Mle];
        let ra = mc_risks(&e, &a, 2_000, 5).unwrap();
        let rb = mc_risks(&e, &b, 2_000, 5).unwrap();
        for j in 0..2 {
            assert_eq!(
                ra.risk(j).mean_loss.to_bits(),
                rb.risk(j).mean_loss.to_bits()
            );
        }
    }

    #[test]
    fn mismatched_estimator_is_an_error() {
        let pt = ordered((0.0, 0.0), (1.0, 1.0), 1.0);
        assert!(matches!(
            mc_risk(EstimatorId::RmleImproved, &pt, 100, 1),
            Err(Error::EstimatorMismatch { .. })
        ));
        assert!(mc_risk(EstimatorId::Mle, &pt, 1, 1).is_err());
    }
}
