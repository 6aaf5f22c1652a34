//! Built-in percentage-risk-improvement grids.

use crate::model::{BleeVariant, BoundExponent, EstimatorId, ScenarioKind};

/// One table cell: a two-population configuration, a loss shape and the
/// estimator pair to compare for the listed components (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub kind: ScenarioKind,
    pub n: (u32, u32),
    pub sigma: (f64, f64),
    pub mu: (f64, f64),
    pub p: f64,
    pub candidate: EstimatorId,
    pub baseline: EstimatorId,
    pub components: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub id: u32,
    pub title: String,
    pub cells: Vec<TableCell>,
    /// Entries of the published grid that look like copy errors.
    pub notes: Vec<String>,
}

/// Replacement axes for a built-in table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableOverrides {
    pub p: Option<Vec<f64>>,
    pub n_pairs: Option<Vec<(u32, u32)>>,
}

pub const TABLE_IDS: [u32; 14] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 15];

const PAIRS_A: [(u32, u32); 5] = [(5, 5), (5, 7), (7, 6), (8, 10), (15, 12)];
const PAIRS_B: [(u32, u32); 5] = [(8, 8), (9, 10), (12, 8), (14, 15), (16, 13)];
const P_SMALL: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];
const P_LARGE: [f64; 4] = [-4.0, -2.0, 2.0, 4.0];
const P_ALL: [f64; 8] = [-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0];
const P_KNOWN_LARGE: [f64; 4] = [-2.5, -2.0, 2.0, 2.5];
const RATIOS: [f64; 7] = [0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95];
const GAPS: [f64; 7] = [0.1, 0.2, 0.4, 0.6, 0.9, 1.2, 1.4];
const KNOWN_SIGMAS: [(f64, f64); 2] = [(1.0, 1.5), (3.0, 2.0)];
const EQUAL_ROWS: [(f64, f64); 7] = [
    (0.1, 0.7),
    (0.2, 1.0),
    (0.4, 1.5),
    (0.6, 2.0),
    (0.9, 2.3),
    (1.2, 2.8),
    (1.4, 3.0),
];
const UNEQUAL_ROWS: [(f64, f64, f64); 7] = [
    (0.1, 0.7, 0.5),
    (0.2, 1.0, 0.9),
    (0.4, 1.5, 1.6),
    (0.6, 2.0, 1.9),
    (0.9, 2.3, 2.5),
    (1.2, 2.8, 3.0),
    (1.4, 3.0, 3.5),
];

const IMPROVED_SCALE: EstimatorId = EstimatorId::ImprovedOrderedScale(BoundExponent::Printed);

pub fn builtin_table(id: u32, overrides: &TableOverrides) -> Option<TableSpec> {
    let pairs = |default: &[(u32, u32)]| {
        overrides
            .n_pairs
            .clone()
            .unwrap_or_else(|| default.to_vec())
    };
    let ps = |default: &[f64]| overrides.p.clone().unwrap_or_else(|| default.to_vec());
    let both = vec![0, 1];

    let scale = |pairs: Vec<(u32, u32)>, ps: Vec<f64>, baseline: EstimatorId| {
        let mut cells = Vec::new();
        for &n in &pairs {
            for &ratio in &RATIOS {
                for &p in &ps {
                    cells.push(TableCell {
                        kind: ScenarioKind::OrderedScale,
                        n,
                        sigma: (ratio, 1.0),
                        mu: (0.0, 0.0),
                        p,
                        candidate: IMPROVED_SCALE,
                        baseline,
                        components: vec![0, 1],
                    });
                }
            }
        }
        cells
    };

    let known = |pairs: Vec<(u32, u32)>,
                 ps: Vec<f64>,
                 gaps: &[f64],
                 candidate: EstimatorId,
                 baseline: EstimatorId,
                 components: Vec<usize>| {
        let mut cells = Vec::new();
        for &n in &pairs {
            for &gap in gaps {
                for &sigma in &KNOWN_SIGMAS {
                    for &p in &ps {
                        cells.push(TableCell {
                            kind: ScenarioKind::LocKnownScale,
                            n,
                            sigma,
                            mu: (0.0, gap),
                            p,
                            candidate,
                            baseline,
                            components: components.clone(),
                        });
                    }
                }
            }
        }
        cells
    };

    let known_improved = EstimatorId::ImprovedKnownScale(BleeVariant::PaperPrinted);
    let known_blee = EstimatorId::Blee(BleeVariant::PaperPrinted);

    let (title, cells, notes): (&str, Vec<TableCell>, Vec<&str>) = match id {
        1 => (
            "ordered scales: improved estimators against the affine equivariant estimator",
            scale(pairs(&PAIRS_A), ps(&P_SMALL), EstimatorId::Baee),
            vec![],
        ),
        2 => (
            "ordered scales: improved estimators against the affine equivariant estimator",
            scale(pairs(&PAIRS_A), ps(&P_LARGE), EstimatorId::Baee),
            vec!["published (5,5) columns for p = 2 and p = 4 are identical"],
        ),
        3 => (
            "ordered scales: improved estimators against the MLE",
            scale(pairs(&PAIRS_A), ps(&P_SMALL), EstimatorId::Mle),
            vec!["published (5,7) column for p = -0.5 repeats the p = -1 column"],
        ),
        4 => {
            let mut cells = Vec::new();
            for &n in &pairs(&PAIRS_A) {
                for &p in &ps(&[-1.0, -0.5, 0.5, 1.0, -4.0, -2.0, 2.0, 4.0]) {
                    cells.push(TableCell {
                        kind: ScenarioKind::OrderedScale,
                        n,
                        sigma: (1.0, 1.0),
                        mu: (0.0, 0.0),
                        p,
                        candidate: EstimatorId::Baee,
                        baseline: EstimatorId::Mle,
                        components: both.clone(),
                    });
                }
            }
            (
                "affine equivariant estimators against the MLE",
                cells,
                vec![],
            )
        }
        5 => (
            "ordered scales: improved estimators against the MLE",
            scale(pairs(&PAIRS_A), ps(&P_LARGE), EstimatorId::Mle),
            vec![
                "published (5,5), p = 2 rows for ratios 0.1 and 0.95 are identical (48.55, 47.73)",
            ],
        ),
        6 => (
            "known scales: improved estimators against the location equivariant estimator",
            known(
                pairs(&PAIRS_A),
                ps(&P_SMALL),
                &GAPS,
                known_improved,
                known_blee,
                both.clone(),
            ),
            vec![
                "published (5,7), sigma = (1, 1.5): p = 0.5 and p = 1 columns are identical",
                "published (7,6), sigma = (3, 2): p = 0.5 and p = 1 columns are identical",
                "published (8,10), sigma = (1, 1.5): all four p columns are identical",
            ],
        ),
        7 => (
            "known scales: improved estimators against the location equivariant estimator",
            known(
                pairs(&PAIRS_B),
                ps(&P_KNOWN_LARGE),
                &GAPS,
                known_improved,
                known_blee,
                both.clone(),
            ),
            vec![],
        ),
        8 => {
            let mut cells = Vec::new();
            for &n in &pairs(&PAIRS_A) {
                for &p in &ps(&P_ALL) {
                    cells.push(TableCell {
                        kind: ScenarioKind::LocEqualUnknownScale,
                        n,
                        sigma: (1.0, 1.0),
                        mu: (0.0, 0.0),
                        p,
                        candidate: EstimatorId::Baee,
                        baseline: EstimatorId::Mle,
                        components: both.clone(),
                    });
                }
            }
            (
                "equal unknown scales: pooled affine estimators against the MLE",
                cells,
                vec![],
            )
        }
        9 => {
            let mut cells = Vec::new();
            for &n in &pairs(&PAIRS_A) {
                for &(gap, sigma) in &EQUAL_ROWS {
                    for &p in &ps(&P_ALL) {
                        cells.push(TableCell {
                            kind: ScenarioKind::LocEqualUnknownScale,
                            n,
                            sigma: (sigma, sigma),
                            mu: (0.0, gap),
                            p,
                            candidate: EstimatorId::ImprovedEqualScale,
                            baseline: EstimatorId::Baee,
                            components: vec![0],
                        });
                    }
                }
            }
            (
                "equal unknown scales: improved first component against the pooled affine estimator",
                cells,
                vec![
                    "published (5,5) and (5,7) columns for p = 1 and p = 2 repeat each other",
                    "published (8,10) columns repeat in pairs (p = -2, -1) and (p = -0.5, 0.5)",
                ],
            )
        }
        10 | 11 => {
            let (default_pairs, default_ps) = if id == 10 {
                (&PAIRS_A, &P_SMALL)
            } else {
                (&PAIRS_B, &P_KNOWN_LARGE)
            };
            (
                "known scales: improved restricted MLE of the first component",
                known(
                    pairs(default_pairs),
                    ps(default_ps),
                    &GAPS,
                    EstimatorId::RmleImproved,
                    EstimatorId::Rmle,
                    vec![0],
                ),
                vec![],
            )
        }
        12 | 13 => {
            let (default_pairs, default_ps) = if id == 12 {
                (&PAIRS_A, &P_SMALL)
            } else {
                (&PAIRS_B, &P_KNOWN_LARGE)
            };
            (
                "known scales: improved restricted MLE of the second component",
                known(
                    pairs(default_pairs),
                    ps(default_ps),
                    &[0.0],
                    EstimatorId::RmleImproved,
                    EstimatorId::Rmle,
                    vec![1],
                ),
                vec![],
            )
        }
        15 => {
            let mut cells = Vec::new();
            for &n in &pairs(&PAIRS_A) {
                for &(gap, s1, s2) in &UNEQUAL_ROWS {
                    for &p in &ps(&P_ALL) {
                        cells.push(TableCell {
                            kind: ScenarioKind::LocUnequalUnknownScale,
                            n,
                            sigma: (s1, s2),
                            mu: (0.0, gap),
                            p,
                            candidate: EstimatorId::ImprovedUnequalScale,
                            baseline: EstimatorId::Baee,
                            components: vec![0],
                        });
                    }
                }
            }
            (
                "unequal unknown scales: improved first component against the affine estimator",
                cells,
                vec![],
            )
        }
        _ => return None,
    };
    Some(TableSpec {
        id,
        title: title.to_string(),
        cells,
        notes: notes.into_iter().map(String::from).collect(),
    })
}
