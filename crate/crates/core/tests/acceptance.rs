//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

use std::process::Command;
use std::time::Instant;

use ordexp::cli::config::DEFAULT_SEED;
use ordexp::cli::run::{run_cell, run_table, Row};
use ordexp::cli::tables::{builtin_table, TableCell, TableOverrides};
use ordexp::cli::verify::{constants_suite, dominance_suite, ks_suite};
use ordexp::estimators::c0;
use ordexp::risk::analytic_affine_risk;

const REPS: u64 = 50_000;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Rows of a built-in table restricted to one sample-size pair and one p.
fn table_rows(id: u32, n: (u32, u32), p: f64, keep: impl Fn(&TableCell) -> bool) -> Vec<Row> {
    let overrides = TableOverrides {
        p: Some(vec![p]),
        n_pairs: Some(vec![n]),
    };
    let spec = builtin_table(id, &overrides).expect("built-in table");
    spec.cells
        .iter()
        .filter(|c| keep(c))
        .flat_map(|c| run_cell(c, id, REPS, DEFAULT_SEED).expect("table cell runs"))
        .collect()
}

fn within(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol)
}

fn fmt(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.2}")).collect();
    format!("({})", parts.join(", "))
}

fn constants_vs_oracle() -> Outcome {
    let start = Instant::now();
    let report = constants_suite(0.0);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        report.passed() && secs < 5.0,
        format!(
            "{} checks, {} failures, {secs:.2} s",
            report.checks,
            report.failures.len()
        ),
    )
}

fn baee_vs_mle_ordered_scale() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (p, published, analytic_expected) in [(1.0, 43.58, 43.60), (-1.0, 37.25, 37.11)] {
        let r_mle = analytic_affine_risk(0.0, 5, 4, p).unwrap();
        let r_baee = analytic_affine_risk(c0(5, p), 5, 4, p).unwrap();
        let analytic = 100.0 * (r_mle - r_baee) / r_mle;
        let start = Instant::now();
        let rows = table_rows(4, (5, 5), p, |_| true);
        let secs = start.elapsed().as_secs_f64();
        let mc = rows[0].pri;
        ok &= (analytic - analytic_expected).abs() < 0.005;
        ok &= (mc - published).abs() <= 1.0 && secs < 10.0;
        notes.push(format!(
            "p={p}: analytic {analytic:.2}, MC {mc:.2} (published {published}), {secs:.2} s"
        ));
    }
    outcome(ok, notes.join("; "))
}

fn table1_spot_checks() -> Outcome {
    let targets = [
        (0.5, -1.0, [1.62, 0.91]),
        (0.5, 1.0, [2.01, 1.05]),
        (0.9, -1.0, [0.97, 3.52]),
        (0.9, 1.0, [1.33, 4.00]),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (ratio, p, want) in targets {
        let rows = table_rows(1, (5, 5), p, |c| c.sigma.0 == ratio);
        let got: Vec<f64> = rows.iter().map(|r| r.pri).collect();
        ok &= within(&got, &want, 0.5);
        notes.push(format!(
            "ratio {ratio}, p={p}: {} vs {}",
            fmt(&got),
            fmt(&want)
        ));
    }
    outcome(ok, notes.join("; "))
}

fn single_check(id: u32, keep: impl Fn(&TableCell) -> bool, want: &[f64], tol: f64) -> Outcome {
    let rows = table_rows(id, (5, 5), 1.0, keep);
    let got: Vec<f64> = rows.iter().map(|r| r.pri).collect();
    outcome(
        within(&got, want, tol),
        format!("{} vs {} (tolerance {tol})", fmt(&got), fmt(want)),
    )
}

fn table6_variants() -> Outcome {
    let overrides = TableOverrides {
        p: Some(vec![1.0]),
        n_pairs: Some(vec![(5, 5)]),
    };
    let spec = builtin_table(6, &overrides).expect("table 6");
    let run = run_table(&spec, REPS, DEFAULT_SEED).expect("table 6 runs");
    let matched = run.variant_outcomes.iter().find(|o| o.matched);
    let tried: Vec<String> = run
        .variant_outcomes
        .iter()
        .map(|o| format!("{:?} {}", o.variant, fmt(&o.pri)))
        .collect();
    outcome(
        matched.is_some(),
        format!(
            "tried [{}] vs (49.89, 22.63); matching variant: {}",
            tried.join(", "),
            matched.map_or("none".to_string(), |o| format!("{:?}", o.variant))
        ),
    )
}

fn dominance_sweep() -> Outcome {
    let start = Instant::now();
    let report = dominance_suite(REPS, DEFAULT_SEED);
    let secs = start.elapsed().as_secs_f64();
    let mut detail = format!(
        "{} comparisons, {} failures, {secs:.1} s",
        report.checks,
        report.failures.len()
    );
    for f in report.failures.iter().take(5) {
        detail.push_str("\n      ");
        detail.push_str(f);
    }
    outcome(report.passed() && secs < 300.0, detail)
}

fn scheme_equivalence() -> Outcome {
    let report = ks_suite(10_000, DEFAULT_SEED);
    outcome(
        report.passed(),
        format!(
            "{} KS tests at the 1% level, {} failures {:?}",
            report.checks,
            report.failures.len(),
            report.failures
        ),
    )
}

fn determinism_across_threads() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_ordexp");
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, threads) in dirs.iter().zip(["1", "3"]) {
        let status = Command::new(bin)
            .args([
                "table", "1", "--grid", "5,5;7,6", "--p", "-1,1", "--reps", "20000",
            ])
            .arg("--out-dir")
            .arg(dir.path())
            .env("ORDEXP_THREADS", threads)
            .output()
            .expect("binary runs");
        if !status.status.success() {
            return outcome(false, format!("table run failed: {status:?}"));
        }
    }
    let mut same = true;
    for name in ["table_1.csv", "table_1_display.csv"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        same &= !a.is_empty() && a == b;
    }
    outcome(same, "table 1 with 1 and 3 worker threads")
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 constants vs oracle", constants_vs_oracle),
        (
            "2 BAEE vs MLE PRI, ordered scales",
            baee_vs_mle_ordered_scale,
        ),
        (
            "3 ordered-scale improvement spot checks",
            table1_spot_checks,
        ),
        ("4 pooled BAEE vs MLE, equal scales", || {
            single_check(8, |_| true, &[48.30, 47.81], 1.0)
        }),
        ("5 equal-scale improvement", || {
            single_check(9, |c| c.mu.1 == 0.1 && c.sigma.0 == 0.7, &[44.29], 1.5)
        }),
        ("6 unequal-scale improvement", || {
            single_check(
                15,
                |c| c.mu.1 == 0.1 && c.sigma == (0.7, 0.5),
                &[51.28],
                1.5,
            )
        }),
        (
            "7 known-scale improvement with shift variants",
            table6_variants,
        ),
        ("8 dominance sweep", dominance_sweep),
        ("9 scheme equivalence", scheme_equivalence),
        (
            "10 determinism across thread counts",
            determinism_across_threads,
        ),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        println!(
            "{} criterion {name}: {} [{:.1} s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
