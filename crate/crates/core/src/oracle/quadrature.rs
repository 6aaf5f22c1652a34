use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::estimators::{Coordinate, EstimatorPlan};
use crate::model::{EstimatorId, ScenarioKind};
use crate::risk::{linex_loss, GridPoint};

/// Golub-Welsch nodes and weights from a symmetric tridiagonal Jacobi matrix.
fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            j[(i, i + 1)] = off[i];
            j[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Generalized Gauss-Laguerre rule with weights summing to one, i.e. for
/// expectations under the Gamma(`alpha + 1`, 1) density.
pub fn gauss_laguerre(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let off: Vec<f64> = (1..n)
        .map(|k| (k as f64 * (k as f64 + alpha)).sqrt())
        .collect();
    golub_welsch(&diag, &off, 1.0)
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&diag, &off, 2.0)
}

/// One standardized coordinate: an Exp(1) or Gamma(shape, 1) variable.
#[derive(Clone, Copy)]
struct Axis {
    coord: Coordinate,
    shape: f64,
    /// raw value = offset + scale * standardized value
    offset: f64,
    scale: f64,
}

impl Axis {
    fn log_density(&self, v: f64) -> f64 {
        (self.shape - 1.0) * v.ln() - v - ln_gamma(self.shape)
    }
}

struct Rules {
    legendre: (Vec<f64>, Vec<f64>),
    tail: (Vec<f64>, Vec<f64>),
    by_axis: Vec<(Vec<f64>, Vec<f64>)>,
}

/// Risk of a k = 2 estimator by tensor-product quadrature over the four
/// standardized coordinates of `(x_min_1, x_min_2, t_1, t_2)`.
///
/// The innermost coordinate is the one along which the estimator's clips
/// switch; it is split into panels at those points.
pub fn brute_force_risk(estimator: EstimatorId, point: &GridPoint, nodes: usize) -> Result<f64> {
    let scenario = &point.scenario;
    if scenario.k() != 2 {
        return Err(Error::Unsupported(format!(
            "quadrature risk is only available for k = 2, got k = {}",
            scenario.k()
        )));
    }
    if nodes < 2 {
        return Err(Error::invalid("quadrature needs at least 2 nodes"));
    }
    let plan = point.plans(&[estimator])?[0];
    let design = point.scheme.design(&scenario.populations);
    let i = scenario.target;
    let other = 1 - i;
    let mu_i = scenario.populations[i].mu;
    let sigma_i = scenario.populations[i].sigma;
    let p = point.loss.p();

    let mut axes = Vec::with_capacity(4);
    for (j, pop) in scenario.populations.iter().enumerate() {
        axes.push(Axis {
            coord: Coordinate::XMin(j),
            shape: 1.0,
            offset: pop.mu - mu_i,
            scale: pop.sigma / f64::from(design.rates[j]),
        });
        axes.push(Axis {
            coord: Coordinate::T(j),
            shape: f64::from(design.shapes[j]),
            offset: 0.0,
            scale: pop.sigma,
        });
    }
    let inner_coord = if scenario.kind == ScenarioKind::OrderedScale {
        Coordinate::T(other)
    } else {
        Coordinate::XMin(other)
    };
    let inner_pos = axes.iter().position(|a| a.coord == inner_coord).unwrap();
    let inner = axes.remove(inner_pos);

    let rules = Rules {
        legendre: gauss_legendre(nodes),
        tail: gauss_laguerre(nodes, 0.0),
        by_axis: axes
            .iter()
            .chain(std::iter::once(&inner))
            .map(|a| gauss_laguerre(nodes, a.shape - 1.0))
            .collect(),
    };

    let mut x = [0.0; 2];
    let mut t = [0.0; 2];
    let set = |coord: Coordinate, value: f64, x: &mut [f64; 2], t: &mut [f64; 2]| match coord {
        Coordinate::XMin(j) => x[j] = value,
        Coordinate::T(j) => t[j] = value,
    };

    let mut total = 0.0;
    let (n0, w0) = &rules.by_axis[0];
    let (n1, w1) = &rules.by_axis[1];
    let (n2, w2) = &rules.by_axis[2];
    for (a, wa) in n0.iter().zip(w0) {
        set(
            axes[0].coord,
            axes[0].offset + axes[0].scale * a,
            &mut x,
            &mut t,
        );
        for (b, wb) in n1.iter().zip(w1) {
            set(
                axes[1].coord,
                axes[1].offset + axes[1].scale * b,
                &mut x,
                &mut t,
            );
            for (c, wc) in n2.iter().zip(w2) {
                set(
                    axes[2].coord,
                    axes[2].offset + axes[2].scale * c,
                    &mut x,
                    &mut t,
                );
                let inner_val = integrate_inner(&plan, &inner, &rules, &mut x, &mut t, |est| {
                    linex_loss(est, 0.0, sigma_i, p)
                })?;
                total += wa * wb * wc * inner_val;
            }
        }
    }
    Ok(total)
}

fn integrate_inner(
    plan: &EstimatorPlan,
    axis: &Axis,
    rules: &Rules,
    x: &mut [f64; 2],
    t: &mut [f64; 2],
    loss: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mut cuts: Vec<f64> = plan
        .kinks(&x[..], &t[..], axis.coord)
        .into_iter()
        .map(|raw| (raw - axis.offset) / axis.scale)
        .filter(|v| v.is_finite() && *v > 0.0)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut eval = |v: f64| -> Result<f64> {
        let raw = axis.offset + axis.scale * v;
        match axis.coord {
            Coordinate::XMin(j) => x[j] = raw,
            Coordinate::T(j) => t[j] = raw,
        }
        Ok(loss(plan.estimate_raw(&x[..], &t[..])?))
    };

    if cuts.is_empty() {
        let (nodes, weights) = &rules.by_axis[3];
        let mut acc = 0.0;
        for (v, w) in nodes.iter().zip(weights) {
            acc += w * eval(*v)?;
        }
        return Ok(acc);
    }

    let mut acc = 0.0;
    let mut lo = 0.0;
    let (ln, lw) = &rules.legendre;
    for &hi in &cuts {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (z, w) in ln.iter().zip(lw) {
            let v = mid + half * z;
            acc += half * w * axis.log_density(v).exp() * eval(v)?;
        }
        lo = hi;
    }
    let (tn, tw) = &rules.tail;
    for (s, w) in tn.iter().zip(tw) {
        let v = lo + s;
        acc += w * (axis.log_density(v) + s).exp() * eval(v)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn laguerre_moments() {
        let (x, w) = gauss_laguerre(20, 2.0);
        // Gamma(3, 1): mean 3, second moment 12
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
        let m1: f64 = x.iter().zip(&w).map(|(x, w)| w * x).sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert_abs_diff_eq!(m1, 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(m2, 12.0, epsilon = 1e-10);
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        let i4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert_abs_diff_eq!(i4, 0.4, epsilon = 1e-14);
    }

    use crate::model::{BoundExponent, LossSpec, Population, Scenario, SchemeConfig};
    use crate::risk::{analytic_affine_risk, mc_risks};

    fn point(kind: ScenarioKind, pops: [(f64, f64, u32); 2], target: usize, p: f64) -> GridPoint {
        let pops = pops
            .iter()
            .map(|&(m, s, n)| Population::new(m, s, n))
            .collect();
        GridPoint::new(
            Scenario::new(kind, pops, target),
            SchemeConfig::Iid,
            LossSpec::new(p).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn closed_form_risks() {
        let pt = point(
            ScenarioKind::OrderedScale,
            [(0.0, 1.0, 5), (0.0, 1.0, 5)],
            0,
            1.0,
        );
        let mle = brute_force_risk(EstimatorId::Mle, &pt, 32).unwrap();
        assert_abs_diff_eq!(mle, 0.05, epsilon = 1e-6);
        let baee = brute_force_risk(EstimatorId::Baee, &pt, 32).unwrap();
        let exact = analytic_affine_risk(crate::estimators::c0(5, 1.0), 5, 4, 1.0).unwrap();
        assert_abs_diff_eq!(baee, exact, epsilon = 1e-6);
    }

    #[test]
    fn improved_scale_agrees_with_monte_carlo() {
        let pt = point(
            ScenarioKind::OrderedScale,
            [(0.0, 0.5, 5), (0.0, 1.0, 5)],
            0,
            1.0,
        );
        let e = EstimatorId::ImprovedOrderedScale(BoundExponent::Printed);
        let q = brute_force_risk(e, &pt, 24).unwrap();
        let mc = mc_risks(&[e], &pt, 50_000, 3).unwrap().risk(0);
        assert!(
            (q - mc.mean_loss).abs() < 3.0 * mc.std_error,
            "{q} vs {mc:?}"
        );
    }

    #[test]
    fn rejects_more_than_two_populations() {
        let pops = vec![Population::new(0.0, 1.0, 5); 3];
        let pt = GridPoint::new(
            Scenario::new(ScenarioKind::OrderedScale, pops, 0),
            SchemeConfig::Iid,
            LossSpec::new(1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            brute_force_risk(EstimatorId::Mle, &pt, 8),
            Err(Error::Unsupported(_))
        ));
    }
}
