//! Domain types, scenario configuration and validation.
//!
//! Every other module assumes its inputs passed [`validate`]; the estimator
//! constants panic on precondition violations instead of returning errors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible |p|.
pub const MIN_ABS_P: f64 = 1e-10;

/// Linex loss `q (e^{pt} - pt - 1)` with the weight fixed at `q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    p: f64,
}

impl LossSpec {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p.abs() < MIN_ABS_P {
            return Err(Error::invalid(format!(
                "loss shape p must be finite with |p| >= {MIN_ABS_P}, got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Loss weight; always 1.
    pub fn weight(&self) -> f64 {
        1.0
    }
}

/// One two-parameter exponential population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub mu: f64,
    pub sigma: f64,
    pub n: u32,
}

impl Population {
    pub fn new(mu: f64, sigma: f64, n: u32) -> Self {
        Self { mu, sigma, n }
    }
}

/// Which order restriction is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// `sigma_1 <= ... <= sigma_k`, locations unrestricted.
    OrderedScale,
    /// `mu_1 <= ... <= mu_k` with known scales.
    LocKnownScale,
    /// `mu_1 <= ... <= mu_k` with a common unknown scale.
    LocEqualUnknownScale,
    /// `mu_1 <= ... <= mu_k` with unrestricted unknown scales.
    LocUnequalUnknownScale,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::OrderedScale,
        ScenarioKind::LocKnownScale,
        ScenarioKind::LocEqualUnknownScale,
        ScenarioKind::LocUnequalUnknownScale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::OrderedScale => "ordered-scale",
            ScenarioKind::LocKnownScale => "known-scale",
            ScenarioKind::LocEqualUnknownScale => "equal-scale",
            ScenarioKind::LocUnequalUnknownScale => "unequal-scale",
        }
    }

    pub fn is_location(self) -> bool {
        !matches!(self, ScenarioKind::OrderedScale)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ordered-scale" | "scale" => Ok(ScenarioKind::OrderedScale),
            "known-scale" | "loc-known" => Ok(ScenarioKind::LocKnownScale),
            "equal-scale" | "loc-equal" => Ok(ScenarioKind::LocEqualUnknownScale),
            "unequal-scale" | "loc-unequal" => Ok(ScenarioKind::LocUnequalUnknownScale),
            other => Err(Error::invalid(format!(
                "unknown scenario `{other}` (expected ordered-scale, known-scale, equal-scale or unequal-scale)"
            ))),
        }
    }
}

/// A restriction kind, its populations and the (0-based) target component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub populations: Vec<Population>,
    pub target: usize,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, populations: Vec<Population>, target: usize) -> Self {
        Self {
            kind,
            populations,
            target,
        }
    }

    pub fn k(&self) -> usize {
        self.populations.len()
    }

    pub fn ns(&self) -> Vec<u32> {
        self.populations.iter().map(|p| p.n).collect()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.populations.iter().map(|p| p.sigma).collect()
    }

    pub fn total_n(&self) -> u32 {
        self.populations.iter().map(|p| p.n).sum()
    }

    pub fn with_target(&self, target: usize) -> Self {
        Self {
            target,
            ..self.clone()
        }
    }
}

/// Life-testing scheme; vectors hold one entry per population.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeConfig {
    Iid,
    TypeII { m: Vec<u32> },
    ProgressiveII { removals: Vec<Vec<u32>> },
    Records { r: Vec<u32> },
}

/// Per-population rate of the minimum and Gamma shape of `t` under a scheme.
///
/// The minimum is `mu + (sigma / rate) E` and `t ~ Gamma(shape, sigma)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub rates: Vec<u32>,
    pub shapes: Vec<u32>,
}

impl Design {
    pub fn pooled_shape(&self) -> u32 {
        self.shapes.iter().sum()
    }

    /// Effective sample size `sum (shape_j + 1)`; equals `sum n_j` for complete samples.
    pub fn effective_total(&self) -> u32 {
        self.shapes.iter().map(|s| s + 1).sum()
    }
}

impl SchemeConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeConfig::Iid => "iid",
            SchemeConfig::TypeII { .. } => "type2",
            SchemeConfig::ProgressiveII { .. } => "progressive",
            SchemeConfig::Records { .. } => "records",
        }
    }

    /// Rates and shapes for the given populations. Assumes the scheme is valid for them.
    pub fn design(&self, pops: &[Population]) -> Design {
        let (rates, shapes) = match self {
            SchemeConfig::Iid => (
                pops.iter().map(|p| p.n).collect(),
                pops.iter().map(|p| p.n.saturating_sub(1)).collect(),
            ),
            SchemeConfig::TypeII { m } => (
                pops.iter().map(|p| p.n).collect(),
                m.iter().map(|m| m.saturating_sub(1)).collect(),
            ),
            SchemeConfig::ProgressiveII { removals } => (
                pops.iter().map(|p| p.n).collect(),
                removals
                    .iter()
                    .map(|s| (s.len() as u32).saturating_sub(1))
                    .collect(),
            ),
            SchemeConfig::Records { r } => (
                vec![1; pops.len()],
                r.iter().map(|r| r.saturating_sub(1)).collect(),
            ),
        };
        Design { rates, shapes }
    }
}

/// Per-population `(x_min, t)` pairs and the Gamma shape of each `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub x_min: Vec<f64>,
    pub t: Vec<f64>,
    pub shape: Vec<u32>,
}

impl SufficientStats {
    pub fn k(&self) -> usize {
        self.x_min.len()
    }

    pub fn pooled_t(&self) -> f64 {
        self.t.iter().sum()
    }

    /// `W_j = t_j / t_i`; `None` when `t_i` is not positive.
    pub fn ratio(&self, j: usize, i: usize) -> Option<f64> {
        (self.t[i] > 0.0).then(|| self.t[j] / self.t[i])
    }

    /// `Y_j = x_min_j - x_min_i`.
    pub fn diff(&self, j: usize, i: usize) -> f64 {
        self.x_min[j] - self.x_min[i]
    }
}

/// Monte Carlo mean loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean_loss: f64,
    pub std_error: f64,
    pub reps: u64,
    pub seed: u64,
}

/// Percentage risk improvement of `candidate` over `baseline`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriResult {
    pub baseline: EstimatorId,
    pub candidate: EstimatorId,
    pub pri_percent: f64,
}

/// Which form of the known-scale shift constant to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BleeVariant {
    /// `(1/p) ln((n - p sigma)/n)`.
    #[default]
    PaperPrinted,
    /// `(sigma/p) ln((n - p)/n)`, the minimizer of the scaled Linex risk.
    LossConsistent,
}

/// Exponent used in the clip bound of the ordered-scale improvement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum BoundExponent {
    /// `1/(n + 1)` with `n` the total sample size.
    #[default]
    Printed,
    /// `1/(n - k + 1)`, matching the Gamma shape of the pooled statistic.
    ShapeConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorId {
    Mle,
    Rmle,
    Baee,
    Blee(BleeVariant),
    ImprovedOrderedScale(BoundExponent),
    ImprovedKnownScale(BleeVariant),
    ImprovedEqualScale,
    ImprovedUnequalScale,
    RmleImproved,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 12] = [
        EstimatorId::Mle,
        EstimatorId::Rmle,
        EstimatorId::Baee,
        EstimatorId::Blee(BleeVariant::PaperPrinted),
        EstimatorId::Blee(BleeVariant::LossConsistent),
        EstimatorId::ImprovedOrderedScale(BoundExponent::Printed),
        EstimatorId::ImprovedOrderedScale(BoundExponent::ShapeConsistent),
        EstimatorId::ImprovedKnownScale(BleeVariant::PaperPrinted),
        EstimatorId::ImprovedKnownScale(BleeVariant::LossConsistent),
        EstimatorId::ImprovedEqualScale,
        EstimatorId::ImprovedUnequalScale,
        EstimatorId::RmleImproved,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorId::Mle => "mle",
            EstimatorId::Rmle => "rmle",
            EstimatorId::Baee => "baee",
            EstimatorId::Blee(BleeVariant::PaperPrinted) => "blee",
            EstimatorId::Blee(BleeVariant::LossConsistent) => "blee-loss",
            EstimatorId::ImprovedOrderedScale(BoundExponent::Printed) => "improved-scale",
            EstimatorId::ImprovedOrderedScale(BoundExponent::ShapeConsistent) => {
                "improved-scale-shape"
            }
            EstimatorId::ImprovedKnownScale(BleeVariant::PaperPrinted) => "improved-known",
            EstimatorId::ImprovedKnownScale(BleeVariant::LossConsistent) => "improved-known-loss",
            EstimatorId::ImprovedEqualScale => "improved-equal",
            EstimatorId::ImprovedUnequalScale => "improved-unequal",
            EstimatorId::RmleImproved => "rmle-improved",
        }
    }

    /// The estimator an improved estimator is shown to dominate.
    pub fn baseline(self) -> Option<EstimatorId> {
        match self {
            EstimatorId::ImprovedOrderedScale(_)
            | EstimatorId::ImprovedEqualScale
            | EstimatorId::ImprovedUnequalScale => Some(EstimatorId::Baee),
            EstimatorId::ImprovedKnownScale(v) => Some(EstimatorId::Blee(v)),
            EstimatorId::RmleImproved => Some(EstimatorId::Rmle),
            _ => None,
        }
    }

    /// Whether the estimator can be evaluated in a scenario of this kind.
    pub fn applies_to(self, kind: ScenarioKind) -> bool {
        use ScenarioKind::*;
        match self {
            EstimatorId::Mle => true,
            EstimatorId::Baee => kind != LocKnownScale,
            EstimatorId::Rmle => kind.is_location(),
            EstimatorId::Blee(_)
            | EstimatorId::ImprovedKnownScale(_)
            | EstimatorId::RmleImproved => kind == LocKnownScale,
            EstimatorId::ImprovedOrderedScale(_) => kind == OrderedScale,
            EstimatorId::ImprovedEqualScale => kind == LocEqualUnknownScale,
            EstimatorId::ImprovedUnequalScale => kind == LocUnequalUnknownScale,
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        EstimatorId::ALL
            .iter()
            .copied()
            .find(|e| e.name() == key)
            .ok_or_else(|| {
                let names: Vec<_> = EstimatorId::ALL.iter().map(|e| e.name()).collect();
                Error::invalid(format!(
                    "unknown estimator `{}` (expected one of: {})",
                    s.trim(),
                    names.join(", ")
                ))
            })
    }
}

/// One violated constraint. Population indices are 0-based; messages print them 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    LossShape {
        p: f64,
    },
    TooFewPopulations {
        k: usize,
    },
    TargetOutOfRange {
        target: usize,
        k: usize,
    },
    NonFiniteLocation {
        index: usize,
    },
    NonPositiveScale {
        index: usize,
        sigma: f64,
    },
    SampleTooSmall {
        index: usize,
        n: u32,
    },
    ScaleOrder {
        index: usize,
    },
    LocationOrder {
        index: usize,
    },
    UnequalScales {
        index: usize,
    },
    SchemeLength {
        expected: usize,
        found: usize,
    },
    TypeIICount {
        index: usize,
        m: u32,
        n: u32,
    },
    ProgressiveRemovals {
        index: usize,
        detail: String,
    },
    RecordCount {
        index: usize,
        r: u32,
    },
    RateNotAboveP {
        index: usize,
        rate: u32,
        p: f64,
    },
    RateSumScale {
        index: usize,
        q: f64,
        sigma: f64,
        p: f64,
    },
    PrintedShift {
        index: usize,
        n: u32,
        sigma: f64,
        p: f64,
    },
    TotalNotAboveP {
        n: u32,
        p: f64,
    },
    PooledShape {
        n: u32,
        k: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LossShape { p } => {
                write!(
                    f,
                    "loss shape p = {p} must be finite with |p| >= {MIN_ABS_P}"
                )
            }
            Violation::TooFewPopulations { k } => write!(f, "need k >= 2 populations, got {k}"),
            Violation::TargetOutOfRange { target, k } => {
                write!(f, "target component {} is outside 1..{k}", target + 1)
            }
            Violation::NonFiniteLocation { index } => {
                write!(f, "mu_{} must be finite", index + 1)
            }
            Violation::NonPositiveScale { index, sigma } => {
                write!(
                    f,
                    "sigma_{} = {sigma} must be positive and finite",
                    index + 1
                )
            }
            Violation::SampleTooSmall { index, n } => {
                write!(f, "n_{} = {n} must be at least 2", index + 1)
            }
            Violation::ScaleOrder { index } => write!(
                f,
                "scales must be nondecreasing: sigma_{} > sigma_{}",
                index + 1,
                index + 2
            ),
            Violation::LocationOrder { index } => write!(
                f,
                "locations must be nondecreasing: mu_{} > mu_{}",
                index + 1,
                index + 2
            ),
            Violation::UnequalScales { index } => write!(
                f,
                "equal-scale scenario requires sigma_{} = sigma_1",
                index + 1
            ),
            Violation::SchemeLength { expected, found } => write!(
                f,
                "scheme lists {found} population entries, expected {expected}"
            ),
            Violation::TypeIICount { index, m, n } => write!(
                f,
                "type-II count m_{} = {m} must satisfy 2 <= m <= n = {n}",
                index + 1
            ),
            Violation::ProgressiveRemovals { index, detail } => {
                write!(
                    f,
                    "progressive removals for population {}: {detail}",
                    index + 1
                )
            }
            Violation::RecordCount { index, r } => {
                write!(f, "record count r_{} = {r} must be at least 2", index + 1)
            }
            Violation::RateNotAboveP { index, rate, p } => write!(
                f,
                "n_i > p fails for population {}: {rate} <= {p}",
                index + 1
            ),
            Violation::RateSumScale { index, q, sigma, p } => write!(
                f,
                "q*sigma_i > p fails for population {}: {q} * {sigma} <= {p}",
                index + 1
            ),
            Violation::PrintedShift { index, n, sigma, p } => write!(
                f,
                "n_i > p*sigma_i fails for population {}: {n} <= {p} * {sigma}",
                index + 1
            ),
            Violation::TotalNotAboveP { n, p } => write!(f, "n > p fails: {n} <= {p}"),
            Violation::PooledShape { n, k } => {
                write!(f, "pooled statistic needs n - k >= 1: n = {n}, k = {k}")
            }
        }
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return f.write_str("ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

/// Checks every invariant of the scenario, scheme and loss, plus the
/// well-definedness of each constant the scenario's estimators need.
pub fn validate(scenario: &Scenario, scheme: &SchemeConfig, loss: &LossSpec) -> ValidationReport {
    let mut v = Vec::new();
    let p = loss.p();
    let pops = &scenario.populations;
    let k = pops.len();

    if !p.is_finite() || p.abs() < MIN_ABS_P {
        v.push(Violation::LossShape { p });
    }
    if k < 2 {
        v.push(Violation::TooFewPopulations { k });
    }
    if scenario.target >= k {
        v.push(Violation::TargetOutOfRange {
            target: scenario.target,
            k,
        });
    }

    for (index, pop) in pops.iter().enumerate() {
        if !pop.mu.is_finite() {
            v.push(Violation::NonFiniteLocation { index });
        }
        if !(pop.sigma.is_finite() && pop.sigma > 0.0) {
            v.push(Violation::NonPositiveScale {
                index,
                sigma: pop.sigma,
            });
        }
        if pop.n < 2 {
            v.push(Violation::SampleTooSmall { index, n: pop.n });
        }
    }

    for (index, w) in pops.windows(2).enumerate() {
        match scenario.kind {
            ScenarioKind::OrderedScale => {
                if w[0].sigma > w[1].sigma {
                    v.push(Violation::ScaleOrder { index });
                }
            }
            _ => {
                if w[0].mu > w[1].mu {
                    v.push(Violation::LocationOrder { index });
                }
            }
        }
    }
    if scenario.kind == ScenarioKind::LocEqualUnknownScale {
        for (index, pop) in pops.iter().enumerate().skip(1) {
            if pop.sigma != pops[0].sigma {
                v.push(Violation::UnequalScales { index });
            }
        }
    }

    let scheme_ok = check_scheme(scheme, pops, &mut v);
    if !scheme_ok
        || v.iter()
            .any(|x| matches!(x, Violation::SampleTooSmall { .. }))
    {
        return ValidationReport { violations: v };
    }

    let design = scheme.design(pops);
    for (index, &rate) in design.rates.iter().enumerate() {
        if !(f64::from(rate) > p) {
            v.push(Violation::RateNotAboveP { index, rate, p });
        }
    }

    match scenario.kind {
        ScenarioKind::LocKnownScale => {
            let q: f64 = design
                .rates
                .iter()
                .zip(pops)
                .map(|(&r, pop)| f64::from(r) / pop.sigma)
                .sum();
            for (index, pop) in pops.iter().enumerate() {
                if !(q * pop.sigma > p) {
                    v.push(Violation::RateSumScale {
                        index,
                        q,
                        sigma: pop.sigma,
                        p,
                    });
                }
                let rate = design.rates[index];
                if !(f64::from(rate) > p * pop.sigma) {
                    v.push(Violation::PrintedShift {
                        index,
                        n: rate,
                        sigma: pop.sigma,
                        p,
                    });
                }
            }
        }
        ScenarioKind::LocEqualUnknownScale => {
            let n = design.effective_total();
            if !(f64::from(n) > p) {
                v.push(Violation::TotalNotAboveP { n, p });
            }
            if design.pooled_shape() < 1 {
                v.push(Violation::PooledShape { n, k });
            }
        }
        ScenarioKind::OrderedScale => {
            let n = design.effective_total();
            if !(f64::from(n) > p) {
                v.push(Violation::TotalNotAboveP { n, p });
            }
        }
        ScenarioKind::LocUnequalUnknownScale => {}
    }

    ValidationReport { violations: v }
}

fn check_scheme(scheme: &SchemeConfig, pops: &[Population], v: &mut Vec<Violation>) -> bool {
    let before = v.len();
    let k = pops.len();
    let length = |found: usize, v: &mut Vec<Violation>| {
        if found != k {
            v.push(Violation::SchemeLength { expected: k, found });
            false
        } else {
            true
        }
    };
    match scheme {
        SchemeConfig::Iid => {}
        SchemeConfig::TypeII { m } => {
            if length(m.len(), v) {
                for (index, (&m, pop)) in m.iter().zip(pops).enumerate() {
                    if m < 2 || m > pop.n {
                        v.push(Violation::TypeIICount { index, m, n: pop.n });
                    }
                }
            }
        }
        SchemeConfig::ProgressiveII { removals } => {
            if length(removals.len(), v) {
                for (index, (s, pop)) in removals.iter().zip(pops).enumerate() {
                    if let Err(detail) = check_removals(s, pop.n) {
                        v.push(Violation::ProgressiveRemovals { index, detail });
                    }
                }
            }
        }
        SchemeConfig::Records { r } => {
            if length(r.len(), v) {
                for (index, &r) in r.iter().enumerate() {
                    if r < 2 {
                        v.push(Violation::RecordCount { index, r });
                    }
                }
            }
        }
    }
    v.len() == before
}

/// Checks `m >= 2` and `m + sum S_j = n` for a progressive removal vector.
pub fn check_removals(removals: &[u32], n: u32) -> core::result::Result<(), String> {
    let m = removals.len() as u64;
    if m < 2 {
        return Err(format!("need at least 2 observed failures, got {m}"));
    }
    let removed: u64 = removals.iter().map(|&s| u64::from(s)).sum();
    if m + removed != u64::from(n) {
        return Err(format!(
            "m + sum(S) = {} + {} must equal n = {n}",
            m, removed
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(kind: ScenarioKind, n: (u32, u32), sigma: (f64, f64)) -> Scenario {
        Scenario::new(
            kind,
            vec![
                Population::new(0.0, sigma.0, n.0),
                Population::new(0.0, sigma.1, n.1),
            ],
            0,
        )
    }

    fn loss(p: f64) -> LossSpec {
        LossSpec::new(p).unwrap()
    }

    #[test]
    fn loss_rejects_zero_and_tiny_p() {
        assert!(LossSpec::new(0.0).is_err());
        assert!(LossSpec::new(5e-11).is_err());
        assert!(LossSpec::new(f64::NAN).is_err());
        assert_eq!(LossSpec::new(-0.5).unwrap().p(), -0.5);
        assert_eq!(loss(1.0).weight(), 1.0);
    }

    #[test]
    fn balanced_pair_passes() {
        let s = two(ScenarioKind::OrderedScale, (5, 5), (1.0, 1.0));
        assert!(validate(&s, &SchemeConfig::Iid, &loss(1.0)).passed());
    }

    #[test]
    fn sample_size_equal_to_p_fails() {
        let s = two(ScenarioKind::OrderedScale, (5, 5), (1.0, 1.0));
        let r = validate(&s, &SchemeConfig::Iid, &loss(5.0));
        assert!(!r.passed());
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::RateNotAboveP { .. })));
    }

    #[test]
    fn known_scale_rate_sum_violation() {
        let s = two(ScenarioKind::LocKnownScale, (5, 5), (1.0, 1.5));
        let r = validate(&s, &SchemeConfig::Iid, &loss(9.0));
        let hit = r.violations.iter().find_map(|v| match v {
            Violation::RateSumScale { index: 0, q, .. } => Some(*q),
            _ => None,
        });
        let q = hit.expect("q*sigma_1 > p must be reported");
        assert!((q - 25.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn order_and_equal_scale_checks() {
        let s = two(ScenarioKind::OrderedScale, (5, 5), (2.0, 1.0));
        assert!(validate(&s, &SchemeConfig::Iid, &loss(1.0))
            .violations
            .contains(&Violation::ScaleOrder { index: 0 }));

        let mut s = two(ScenarioKind::LocEqualUnknownScale, (5, 5), (1.0, 2.0));
        s.populations[0].mu = 1.0;
        let r = validate(&s, &SchemeConfig::Iid, &loss(1.0));
        assert!(r
            .violations
            .contains(&Violation::LocationOrder { index: 0 }));
        assert!(r
            .violations
            .contains(&Violation::UnequalScales { index: 1 }));
    }

    #[test]
    fn scheme_invariants() {
        let s = two(ScenarioKind::OrderedScale, (5, 5), (1.0, 1.0));
        let l = loss(1.0);
        assert!(validate(&s, &SchemeConfig::TypeII { m: vec![3, 5] }, &l).passed());
        assert!(!validate(&s, &SchemeConfig::TypeII { m: vec![1, 5] }, &l).passed());
        assert!(!validate(&s, &SchemeConfig::TypeII { m: vec![3] }, &l).passed());
        let ok = SchemeConfig::ProgressiveII {
            removals: vec![vec![0, 2, 0], vec![1, 0, 0, 0]],
        };
        assert!(validate(&s, &ok, &l).passed());
        let bad = SchemeConfig::ProgressiveII {
            removals: vec![vec![0, 1, 0], vec![1, 0, 0, 0]],
        };
        assert!(!validate(&s, &bad, &l).passed());
        assert!(!validate(&s, &SchemeConfig::Records { r: vec![2, 1] }, &l).passed());
    }

    #[test]
    fn records_use_unit_rate() {
        let s = two(ScenarioKind::OrderedScale, (5, 5), (1.0, 1.0));
        let rec = SchemeConfig::Records { r: vec![3, 4] };
        assert!(validate(&s, &rec, &loss(0.5)).passed());
        assert!(!validate(&s, &rec, &loss(1.0)).passed());
        let d = rec.design(&s.populations);
        assert_eq!(d.rates, vec![1, 1]);
        assert_eq!(d.shapes, vec![2, 3]);
    }

    #[test]
    fn validate_is_pure() {
        let s = two(ScenarioKind::LocKnownScale, (5, 5), (1.0, 1.5));
        let l = loss(9.0);
        assert_eq!(
            validate(&s, &SchemeConfig::Iid, &l),
            validate(&s, &SchemeConfig::Iid, &l)
        );
    }

    #[test]
    fn estimator_names_round_trip() {
        for e in EstimatorId::ALL {
            assert_eq!(e.name().parse::<EstimatorId>().unwrap(), e);
        }
        assert!("nonsense".parse::<EstimatorId>().is_err());
    }

    #[test]
    fn stats_derived_quantities() {
        let s = SufficientStats {
            x_min: vec![1.0, 1.5],
            t: vec![2.0, 3.0],
            shape: vec![4, 4],
        };
        assert_eq!(s.pooled_t(), 5.0);
        assert_eq!(s.ratio(1, 0), Some(1.5));
        assert_eq!(s.diff(1, 0), 0.5);
        let z = SufficientStats {
            t: vec![0.0, 3.0],
            ..s
        };
        assert_eq!(z.ratio(1, 0), None);
    }
}
