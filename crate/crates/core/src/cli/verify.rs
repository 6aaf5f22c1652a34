//! Self-checks run by `ordexp verify`.

use std::time::Instant;

use crate::error::Result;
use crate::estimators::{affine_multiplier, beta0, blee_known_scale, c0};
use crate::model::{
    BleeVariant, BoundExponent, EstimatorId, LossSpec, Population, Scenario, ScenarioKind,
    SchemeConfig,
};
use crate::oracle::{
    gamma_cdf, ks_critical_value, ks_statistic, ks_two_sample, ks_two_sample_critical_value,
    minimize_affine_risk, minimize_shift_risk,
};
use crate::risk::{analytic_affine_risk, analytic_shift_risk, mc_risks, CrnRun, GridPoint};
use crate::sampling::{
    draw_iid, draw_progressive, draw_record_values, draw_stats_direct, draw_type2, reduce_iid,
    reduce_type2, stream, Reduced,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    pub fn reps(self) -> u64 {
        match self {
            Level::Fast => 10_000,
            Level::Full => 50_000,
        }
    }
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(format!("unknown level `{other}` (expected fast or full)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub level: Level,
    pub seed: u64,
    /// Added to every `c0` before comparison with the oracle.
    pub c0_offset: f64,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn error(&mut self, what: String) {
        self.checks += 1;
        self.failures.push(what);
    }

    fn finish(self, name: &'static str, start: Instant) -> SuiteReport {
        SuiteReport {
            name,
            checks: self.checks,
            failures: self.failures,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

pub const ORACLE_P: [f64; 8] = [-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0];
pub const ORACLE_TOL: f64 = 1e-8;

/// Closed-form multipliers and shifts against numerical risk minimizers.
pub fn constants_suite(c0_offset: f64) -> SuiteReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for n in 2..=30u32 {
        for &p in &ORACLE_P {
            if f64::from(n) <= p {
                continue;
            }
            let c = c0(n, p) + c0_offset;
            match minimize_affine_risk(n, n - 1, p) {
                Ok(o) => t.check((c - o).abs() < ORACLE_TOL, || {
                    format!("c0(n={n}, p={p}) = {c:.12} vs oracle {o:.12}")
                }),
                Err(e) => t.error(format!("c0 oracle failed at n={n}, p={p}: {e}")),
            }
            let b = beta0(n, 2 * n, 2, p);
            match minimize_affine_risk(n, 2 * n - 2, p) {
                Ok(o) => t.check((b - o).abs() < ORACLE_TOL, || {
                    format!("beta0(n={n}, p={p}) = {b:.12} vs oracle {o:.12}")
                }),
                Err(e) => t.error(format!("beta0 oracle failed at n={n}, p={p}: {e}")),
            }
            for sigma in [1.0, 1.5] {
                let a = blee_known_scale(n, sigma, p, BleeVariant::LossConsistent);
                let o = minimize_shift_risk(n, sigma, p);
                t.check((a - o).abs() < ORACLE_TOL, || {
                    format!("alpha0(n={n}, sigma={sigma}, p={p}) = {a:.12} vs oracle {o:.12}")
                });
            }
        }
    }
    t.finish("constants-vs-oracle", start)
}

fn point(
    kind: ScenarioKind,
    pops: [(f64, f64, u32); 2],
    target: usize,
    p: f64,
    scheme: SchemeConfig,
) -> Result<GridPoint> {
    let pops = pops
        .iter()
        .map(|&(m, s, n)| Population::new(m, s, n))
        .collect();
    GridPoint::new(Scenario::new(kind, pops, target), scheme, LossSpec::new(p)?)
}

fn applicable(kind: ScenarioKind) -> Vec<EstimatorId> {
    EstimatorId::ALL
        .iter()
        .copied()
        .filter(|e| e.applies_to(kind))
        .collect()
}

fn scale_equivariant(e: EstimatorId) -> bool {
    !matches!(
        e,
        EstimatorId::Blee(BleeVariant::PaperPrinted)
            | EstimatorId::ImprovedKnownScale(BleeVariant::PaperPrinted)
    )
}

/// Risks under a common location shift (bit-identical) and a common scale
/// change (relative 1e-12).
pub fn equivariance_suite(reps: u64, seed: u64) -> SuiteReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let cases = [
        (ScenarioKind::OrderedScale, [(0.0, 0.5, 5), (0.0, 1.0, 7)]),
        (
            ScenarioKind::LocKnownScale,
            [(0.25, 1.0, 5), (0.75, 1.5, 6)],
        ),
        (
            ScenarioKind::LocEqualUnknownScale,
            [(0.25, 1.0, 6), (0.75, 1.0, 5)],
        ),
        (
            ScenarioKind::LocUnequalUnknownScale,
            [(0.25, 1.0, 5), (0.75, 1.5, 7)],
        ),
    ];
    let reps = reps.min(5_000);
    for (kind, pops) in cases {
        let ests = applicable(kind);
        for target in 0..2 {
            for p in [-1.0, 1.0] {
                let shifted = pops.map(|(m, s, n)| (m + 8.0, s, n));
                let scaled = pops.map(|(m, s, n)| (2.0 * m, 2.0 * s, n));
                let runs: Result<Vec<CrnRun>> = [pops, shifted, scaled]
                    .into_iter()
                    .map(|pp| {
                        let pt = point(kind, pp, target, p, SchemeConfig::Iid)?;
                        mc_risks(&ests, &pt, reps, seed)
                    })
                    .collect();
                let runs = match runs {
                    Ok(r) => r,
                    Err(e) => {
                        t.error(format!("{kind}, target {}, p={p}: {e}", target + 1));
                        continue;
                    }
                };
                for (idx, &e) in ests.iter().enumerate() {
                    let base = runs[0].risk(idx).mean_loss;
                    let moved = runs[1].risk(idx).mean_loss;
                    t.check(base.to_bits() == moved.to_bits(), || {
                        format!(
                            "{kind}, {e}[{}], p={p}: shift changed risk {base} -> {moved}",
                            target + 1
                        )
                    });
                    if scale_equivariant(e) {
                        let sc = runs[2].risk(idx).mean_loss;
                        t.check((sc - base).abs() <= 1e-12 * base.abs(), || {
                            format!(
                                "{kind}, {e}[{}], p={p}: scaling changed risk {base} -> {sc}",
                                target + 1
                            )
                        });
                    }
                }
            }
        }
    }
    t.finish("equivariance", start)
}

pub const DOMINANCE_SIZES: [(u32, u32); 3] = [(5, 5), (5, 7), (7, 6)];
pub const DOMINANCE_P: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];
pub const DOMINANCE_RATIOS: [f64; 3] = [0.5, 0.9, 1.0];
pub const DOMINANCE_GAPS: [f64; 3] = [0.1, 0.4, 0.9];

pub const IMPROVED: [EstimatorId; 7] = [
    EstimatorId::ImprovedOrderedScale(BoundExponent::Printed),
    EstimatorId::ImprovedOrderedScale(BoundExponent::ShapeConsistent),
    EstimatorId::ImprovedKnownScale(BleeVariant::PaperPrinted),
    EstimatorId::ImprovedKnownScale(BleeVariant::LossConsistent),
    EstimatorId::ImprovedEqualScale,
    EstimatorId::ImprovedUnequalScale,
    EstimatorId::RmleImproved,
];

fn improved_kind(e: EstimatorId) -> ScenarioKind {
    ScenarioKind::ALL
        .iter()
        .copied()
        .find(|&k| e.applies_to(k))
        .expect("every improved estimator applies somewhere")
}

/// Populations for the sweep: scale ratio for ordered scales, location gap otherwise.
fn dominance_pops(kind: ScenarioKind, n: (u32, u32), axis: usize) -> [(f64, f64, u32); 2] {
    match kind {
        ScenarioKind::OrderedScale => [(0.0, DOMINANCE_RATIOS[axis], n.0), (0.0, 1.0, n.1)],
        ScenarioKind::LocEqualUnknownScale => [(0.0, 1.0, n.0), (DOMINANCE_GAPS[axis], 1.0, n.1)],
        ScenarioKind::LocKnownScale | ScenarioKind::LocUnequalUnknownScale => {
            [(0.0, 1.0, n.0), (DOMINANCE_GAPS[axis], 1.5, n.1)]
        }
    }
}

/// `risk(improved) <= risk(baseline) + 3 SE` of the paired difference, for
/// each improved estimator on a sizes x ordering x p grid, both components.
pub fn dominance_suite(reps: u64, seed: u64) -> SuiteReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for e in IMPROVED {
        let base = e.baseline().expect("improved estimators have a baseline");
        let kind = improved_kind(e);
        for n in DOMINANCE_SIZES {
            for axis in 0..3 {
                for p in DOMINANCE_P {
                    for target in 0..2 {
                        let pops = dominance_pops(kind, n, axis);
                        let run = point(kind, pops, target, p, SchemeConfig::Iid)
                            .and_then(|pt| mc_risks(&[base, e], &pt, reps, seed));
                        match run {
                            Ok(run) => {
                                let d = run.paired(1, 0);
                                t.check(d.mean <= 3.0 * d.std_error, || {
                                    format!(
                                        "{e}[{}] vs {base}: n={n:?}, pops={pops:?}, p={p}: excess risk {:.3e} > 3 SE {:.3e}",
                                        target + 1,
                                        d.mean,
                                        3.0 * d.std_error
                                    )
                                });
                            }
                            Err(err) => t.error(format!("{e}, n={n:?}, p={p}: {err}")),
                        }
                    }
                }
            }
        }
    }
    t.finish("dominance", start)
}

pub const KS_ALPHA: f64 = 0.01;

fn draws<F>(count: usize, seed: u64, f: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&mut crate::sampling::Stream) -> Result<(f64, f64)>,
{
    let mut xs = Vec::with_capacity(count);
    let mut ts = Vec::with_capacity(count);
    for r in 0..count {
        let mut rng = stream(seed, r as u64);
        let (x, t) = f(&mut rng)?;
        xs.push(x);
        ts.push(t);
    }
    Ok((xs, ts))
}

fn pair(red: Reduced) -> (f64, f64) {
    (red.x_min, red.t)
}

/// Scheme samplers against the direct `(x_min, t)` draw and against the
/// Gamma law of the spacing statistic.
pub fn ks_suite(count: usize, seed: u64) -> SuiteReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let pop = Population::new(0.5, 2.0, 6);
    let n = pop.n;
    let crit2 = ks_two_sample_critical_value(count, count, KS_ALPHA);
    let crit1 = ks_critical_value(count, KS_ALPHA);

    let direct = |rate: u32, shape: u32| {
        draws(count, seed ^ 0x5eed, move |rng| {
            draw_stats_direct(&pop, rate, shape, rng)
        })
    };
    type Sampler<'a> = Box<dyn Fn(&mut crate::sampling::Stream) -> Result<(f64, f64)> + 'a>;
    let r = 4;
    let cases: Vec<(&str, u32, u32, Sampler)> = vec![
        (
            "complete sample",
            n,
            n - 1,
            Box::new(|rng| reduce_iid(&draw_iid(&pop, rng)).map(pair)),
        ),
        (
            "type-II with m = n",
            n,
            n - 1,
            Box::new(|rng| {
                let raw = draw_type2(&pop, n, rng)?;
                reduce_type2(&raw.observations, n, n).map(pair)
            }),
        ),
        (
            "progressive with no removals",
            n,
            n - 1,
            Box::new(|rng| draw_progressive(&pop, &vec![0; n as usize], rng).map(pair)),
        ),
        (
            "record values",
            1,
            r - 1,
            Box::new(|rng| {
                let raw = draw_record_values(&pop, r, rng)?;
                let x = &raw.observations;
                Ok((x[0], x[x.len() - 1] - x[0]))
            }),
        ),
    ];
    for (name, rate, shape, sampler) in &cases {
        let result = direct(*rate, *shape).and_then(|d| Ok((d, draws(count, seed, sampler)?)));
        match result {
            Ok(((dx, dt), (sx, st))) => {
                for (what, a, b) in [("x_min", &dx, &sx), ("t", &dt, &st)] {
                    match ks_two_sample(a, b) {
                        Ok(d) => t.check(d <= crit2, || {
                            format!("{name}: two-sample KS on {what} = {d:.4} > {crit2:.4}")
                        }),
                        Err(e) => t.error(format!("{name}: {e}")),
                    }
                }
            }
            Err(e) => t.error(format!("{name}: {e}")),
        }
    }

    let censored: Vec<(&str, u32, Sampler)> = vec![
        (
            "type-II with m = 3",
            3,
            Box::new(|rng| {
                let raw = draw_type2(&pop, 3, rng)?;
                reduce_type2(&raw.observations, n, 3).map(pair)
            }),
        ),
        (
            "progressive with removals 1,0,2",
            3,
            Box::new(|rng| draw_progressive(&pop, &[1, 0, 2], rng).map(pair)),
        ),
    ];
    for (name, m, sampler) in &censored {
        match draws(count, seed, sampler) {
            Ok((xs, ts)) => {
                let shifted: Vec<f64> = xs.iter().map(|x| x - pop.mu).collect();
                let checks = [
                    ("t", ts, gamma_cdf(f64::from(m - 1), pop.sigma)),
                    ("x_min", shifted, gamma_cdf(1.0, pop.sigma / f64::from(n))),
                ];
                for (what, sample, cdf) in checks {
                    match ks_statistic(&sample, cdf) {
                        Ok(d) => t.check(d <= crit1, || {
                            format!("{name}: one-sample KS on {what} = {d:.4} > {crit1:.4}")
                        }),
                        Err(e) => t.error(format!("{name}: {e}")),
                    }
                }
            }
            Err(e) => t.error(format!("{name}: {e}")),
        }
    }
    t.finish("ks-schemes", start)
}

/// Monte Carlo risks of affine and shift estimators against closed forms.
pub fn analytic_suite(reps: u64, seed: u64) -> SuiteReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut compare =
        |label: String, pt: Result<GridPoint>, e: EstimatorId, exact: Result<f64>| match (
            pt.and_then(|pt| mc_risks(&[e], &pt, reps, seed)),
            exact,
        ) {
            (Ok(run), Ok(exact)) => {
                let r = run.risk(0);
                t.check((r.mean_loss - exact).abs() <= 3.0 * r.std_error, || {
                    format!(
                        "{label}: MC {:.6} +- {:.6} vs closed form {exact:.6}",
                        r.mean_loss, r.std_error
                    )
                });
            }
            (Err(err), _) | (_, Err(err)) => t.error(format!("{label}: {err}")),
        };
    for p in [-1.0, 1.0, 2.0] {
        for target in 0..2 {
            let ni = [5, 7][target];
            let pops = [(0.0, 0.5, 5), (0.0, 1.0, 7)];
            let pt = || {
                point(
                    ScenarioKind::OrderedScale,
                    pops,
                    target,
                    p,
                    SchemeConfig::Iid,
                )
            };
            compare(
                format!("mle[{}], ordered scales, p={p}", target + 1),
                pt(),
                EstimatorId::Mle,
                analytic_affine_risk(0.0, ni, ni - 1, p),
            );
            compare(
                format!("baee[{}], ordered scales, p={p}", target + 1),
                pt(),
                EstimatorId::Baee,
                analytic_affine_risk(c0(ni, p), ni, ni - 1, p),
            );
            compare(
                format!("baee[{}], equal scales, p={p}", target + 1),
                point(
                    ScenarioKind::LocEqualUnknownScale,
                    [(0.0, 1.0, 5), (0.3, 1.0, 7)],
                    target,
                    p,
                    SchemeConfig::Iid,
                ),
                EstimatorId::Baee,
                analytic_affine_risk(beta0(ni, 12, 2, p), ni, 10, p),
            );
            for v in [BleeVariant::PaperPrinted, BleeVariant::LossConsistent] {
                let sigma = [1.0, 1.5][target];
                compare(
                    format!("blee {v:?} [{}], known scales, p={p}", target + 1),
                    point(
                        ScenarioKind::LocKnownScale,
                        [(0.0, 1.0, 5), (0.3, 1.5, 7)],
                        target,
                        p,
                        SchemeConfig::Iid,
                    ),
                    EstimatorId::Blee(v),
                    Ok(analytic_shift_risk(
                        blee_known_scale(ni, sigma, p, v),
                        ni,
                        sigma,
                        p,
                    )),
                );
            }
            let m = [3, 4][target];
            compare(
                format!("baee[{}], type-II m={m}, p={p}", target + 1),
                point(
                    ScenarioKind::OrderedScale,
                    pops,
                    target,
                    p,
                    SchemeConfig::TypeII { m: vec![3, 4] },
                ),
                EstimatorId::Baee,
                analytic_affine_risk(affine_multiplier(ni, m - 1, p), ni, m - 1, p),
            );
        }
    }
    t.finish("analytic-vs-mc", start)
}

pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteReport> {
    let reps = opts.level.reps();
    vec![
        constants_suite(opts.c0_offset),
        equivariance_suite(reps, opts.seed),
        dominance_suite(reps, opts.seed),
        ks_suite(10_000, opts.seed),
        analytic_suite(reps, opts.seed),
    ]
}
