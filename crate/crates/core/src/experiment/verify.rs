//! Pure checks of the two counting chains on a finished report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::incidence::{cell_box, IncidenceReport};
use crate::affine::plane_box_intersects_within;
use crate::error::Result;
use crate::net_measure::DyadicCube;
use crate::separated_nets::{build_epsilon_net, code_ball_measure, NetFamily, NetRequest};
use crate::simplex::simplex_volume;

const REL_TOL: f64 = 1e-9;
/// Failure messages kept per check; the count is always exact.
const KEPT_FAILURES: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Failures {
    pub count: usize,
    pub messages: Vec<String>,
}

impl Failures {
    fn push(&mut self, msg: String) {
        self.count += 1;
        if self.messages.len() < KEPT_FAILURES {
            self.messages.push(msg);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerChainOutcome {
    pub passed: bool,
    pub failures: Failures,
    /// `Σ_i Π_r |A_r(i)|`
    pub product_sum: u128,
    pub min_ratio: Option<f64>,
    pub implied_constant: f64,
}

pub fn verify_lower_chain(report: &IncidenceReport) -> LowerChainOutcome {
    let mut failures = Failures::default();
    if report.per_plane_counts.len() != report.planes.len() || report.plane_count != report.planes.len() {
        failures.push(format!(
            "{} planes but {} count rows and M = {}",
            report.planes.len(),
            report.per_plane_counts.len(),
            report.plane_count
        ));
    }
    let product_sum: u128 = report
        .per_plane_counts
        .iter()
        .map(|c| c.iter().map(|&x| x as u128).product::<u128>())
        .sum();
    let a = report.a_count as u128;
    if a < product_sum {
        failures.push(format!("A = {a} below the product sum {product_sum}"));
    }
    let ceiling = (report.j_count as u128)
        .checked_pow(report.m as u32 + 1)
        .and_then(|j| j.checked_mul(report.plane_count as u128));
    if ceiling.is_some_and(|c| a > c) {
        failures.push(format!("A = {a} above J^(m+1) M = {}", ceiling.unwrap_or(0)));
    }

    let leaf = ((report.dims.n as f64).sqrt() * report.delta).powf(report.alpha);
    let mut min_ratio: Option<f64> = None;
    for (i, (rec, counts)) in report.planes.iter().zip(&report.per_plane_counts).enumerate() {
        if counts.len() != report.m + 1 || rec.selection.masses.len() != report.m + 1 {
            failures.push(format!("plane {i}: expected {} cells", report.m + 1));
            continue;
        }
        for (r, (&nu, &c)) in rec.selection.masses.iter().zip(counts).enumerate() {
            if rec.cell_cubes.get(r).map(Vec::len) != Some(c) {
                failures.push(format!("plane {i}, cell {r}: count {c} disagrees with the stored cubes"));
            }
            let covered = c as f64 * leaf;
            if covered < nu * (1.0 - REL_TOL) {
                failures.push(format!(
                    "plane {i}, cell {r}: {c} cubes cover {covered} < mass {nu}"
                ));
            }
            if nu > 0.0 {
                let q = covered / nu;
                min_ratio = Some(min_ratio.map_or(q, |m| m.min(q)));
            }
        }
    }
    let m1 = (report.m + 1) as f64;
    let implied_constant = report.a_count as f64
        / (report.delta.powf(-(report.s + report.alpha * m1))
            * report.lambda.powf(1.0 + report.psi * m1));
    LowerChainOutcome {
        passed: failures.is_empty(),
        failures,
        product_sum,
        min_ratio,
        implied_constant,
    }
}

/// The net built at one tuple's cubes.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleNet {
    pub request: NetRequest,
    pub net: NetFamily,
}

/// One net per tuple, `None` where the projected centers are degenerate.
pub fn build_tuple_nets(report: &IncidenceReport) -> Result<Vec<Option<TupleNet>>> {
    report
        .tuples
        .par_iter()
        .map(|t| {
            let cubes: Vec<DyadicCube> = t
                .cubes
                .iter()
                .map(|c| DyadicCube::new(report.l, c.clone()))
                .collect();
            let centers: Vec<Vec<f64>> = cubes.iter().map(DyadicCube::center).collect();
            let k = report.dims.k;
            let projected: Vec<Vec<f64>> = centers.iter().map(|c| c[..k].to_vec()).collect();
            if simplex_volume(&projected) <= 0.0 {
                return Ok(None);
            }
            let request = match NetRequest::from_cubes(report.dims, &cubes) {
                Ok(r) => r,
                Err(crate::Error::Degenerate(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let net = build_epsilon_net(&request)?;
            Ok(Some(TupleNet { request, net }))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperChainOutcome {
    pub passed: bool,
    pub failures: Failures,
    pub tuples_checked: usize,
    /// Smallest projected simplex volume over nonempty tuples.
    pub min_volume: Option<f64>,
    /// The same over `λ^φ`.
    pub min_volume_over_lambda_phi: Option<f64>,
    /// (tuple, plane) pairs where the perturbation hypothesis held and the
    /// volume floor was enforced.
    pub perturbation_checked: usize,
    /// Largest distance to the net over the claimed radius.
    pub max_radius_ratio: Option<f64>,
    /// Largest `|A_tuple| (2δ/3)^D / (|net| (2(ρ+δ/3))^D)`.
    pub max_packing_ratio: Option<f64>,
}

fn keep_max(slot: &mut Option<f64>, v: f64) {
    *slot = Some(slot.map_or(v, |s| s.max(v)));
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn verify_upper_chain(report: &IncidenceReport, nets: &[Option<TupleNet>]) -> UpperChainOutcome {
    let mut failures = Failures::default();
    let mut out = UpperChainOutcome {
        passed: false,
        failures: Failures::default(),
        tuples_checked: 0,
        min_volume: None,
        min_volume_over_lambda_phi: None,
        perturbation_checked: 0,
        max_radius_ratio: None,
        max_packing_ratio: None,
    };
    if nets.len() != report.tuples.len() {
        failures.push(format!("{} nets for {} tuples", nets.len(), report.tuples.len()));
    }
    let k = report.dims.k;
    let m = report.m;
    let delta = report.delta;
    let lambda_phi = report.lambda.powf(report.phi);
    for (ti, (t, net)) in report.tuples.iter().zip(nets).enumerate() {
        out.tuples_checked += 1;
        let cubes: Vec<DyadicCube> = t.cubes.iter().map(|c| DyadicCube::new(report.l, c.clone())).collect();
        let projected: Vec<Vec<f64>> = cubes.iter().map(|c| c.center()[..k].to_vec()).collect();
        let vol = simplex_volume(&projected);
        out.min_volume = Some(out.min_volume.map_or(vol, |v: f64| v.min(vol)));
        if !(vol > 0.0) {
            failures.push(format!("tuple {ti}: degenerate projected simplex"));
            continue;
        }
        let Some(net) = net else {
            failures.push(format!("tuple {ti}: no net"));
            continue;
        };

        for &i in &t.planes {
            let Some(rec) = report.planes.get(i) else {
                failures.push(format!("tuple {ti}: plane {i} missing"));
                continue;
            };
            // (a) volume floor, where the cells are small against the witness
            let f = simplex_volume(&rec.selection.centers);
            let x = rec.cell_side + delta;
            if x <= m as f64 / (2f64.powi(m as i32 + 1) * k as f64) * f {
                out.perturbation_checked += 1;
                let floor = f / 2f64.powi(m as i32 + 1);
                if vol < floor * (1.0 - REL_TOL) {
                    failures.push(format!("tuple {ti}, plane {i}: volume {vol} below {floor}"));
                }
            }
            // membership over the selected cells
            for (r, cube) in cubes.iter().enumerate() {
                let Some(cell) = rec.selection.cells.get(r) else {
                    failures.push(format!("plane {i}: no cell {r}"));
                    continue;
                };
                let cb = cell_box(cell, rec.cell_side);
                if !plane_box_intersects_within(&rec.code, cube, Some(&cb)) {
                    failures.push(format!("tuple {ti}, plane {i}: misses cube {r} over its cell"));
                }
            }
            // (b) coverage
            let d = net.net.distance_to(&rec.code);
            let q = d / net.net.claimed_radius;
            keep_max(&mut out.max_radius_ratio, q);
            if q > 1.0 + REL_TOL {
                failures.push(format!(
                    "tuple {ti}, plane {i}: distance {d} beyond radius {}",
                    net.net.claimed_radius
                ));
            }
        }
        // (c) packing
        let lhs = t.planes.len() as f64 * code_ball_measure(delta / 3.0, report.dims);
        let rhs = net.net.cardinality() as f64
            * code_ball_measure(net.net.claimed_radius + delta / 3.0, report.dims);
        keep_max(&mut out.max_packing_ratio, lhs / rhs);
        if lhs > rhs * (1.0 + REL_TOL) {
            failures.push(format!("tuple {ti}: packing {lhs} exceeds {rhs}"));
        }
    }
    out.min_volume_over_lambda_phi = out.min_volume.map(|v| v / lambda_phi);
    out.passed = failures.is_empty();
    out.failures = failures;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{Dims, PlaneCode};
    use crate::experiment::incidence::{build_incidence, generate, ExperimentConfig};

    fn product_report() -> IncidenceReport {
        let dims = Dims::new(2, 1).unwrap();
        let cfg = ExperimentConfig::sharp_product(dims, 1, 2f64.ln() / 3f64.ln(), 6, 0).unwrap();
        let (set, planes) = generate(&cfg).unwrap();
        build_incidence(&cfg, &planes, &set).unwrap()
    }

    #[test]
    fn generated_report_passes_both_chains() {
        let rep = product_report();
        assert_eq!(rep.plane_count, 8);
        let low = verify_lower_chain(&rep);
        assert!(low.passed, "{:?}", low.failures);
        assert_eq!(low.product_sum, rep.a_count as u128);
        let nets = build_tuple_nets(&rep).unwrap();
        // m = k: the nets are single planes
        assert!(nets.iter().all(|n| n.as_ref().unwrap().net.cardinality() == 1));
        let up = verify_upper_chain(&rep, &nets);
        assert!(up.passed, "{:?}", up.failures);
        assert_eq!(up.tuples_checked, rep.tuples.len());
        assert!(up.min_volume.unwrap() > 0.0);
    }

    #[test]
    fn lowered_count_fails() {
        let mut rep = product_report();
        rep.a_count -= 1;
        assert!(!verify_lower_chain(&rep).passed);
    }

    #[test]
    fn inflated_mass_fails() {
        let mut rep = product_report();
        rep.planes[0].selection.masses[0] *= 1e3;
        assert!(!verify_lower_chain(&rep).passed);
    }

    #[test]
    fn far_plane_fails() {
        let mut rep = product_report();
        let mut rogue = rep.planes[0].clone();
        rogue.code = PlaneCode::new(rep.dims, vec![0.999], vec![vec![0.0]]).unwrap();
        rep.planes.push(rogue);
        rep.tuples[0].planes.push(rep.planes.len() - 1);
        let nets = build_tuple_nets(&rep).unwrap();
        let up = verify_upper_chain(&rep, &nets);
        assert!(!up.passed);
        assert!(up.max_radius_ratio.unwrap() > 1.0);
    }

    #[test]
    fn missing_nets_fail() {
        let rep = product_report();
        assert!(!verify_upper_chain(&rep, &[]).passed);
    }
}
