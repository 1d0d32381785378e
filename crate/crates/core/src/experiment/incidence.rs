//! The incidence set: for each plane, the cubes of `B_l` met by the plane
//! over each greedily selected cell, and the tuples of such cubes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generators::{gen_sharp_flat, gen_sharp_product};
use super::verify::build_tuple_nets;
use crate::affine::{in_horizontal_family, metric_code, plane_box_intersects, plane_box_intersects_within, Dims, PlaneCode};
use crate::error::{Error, Result};
use crate::greedy::{
    derive_params, greedy_select, lipschitz_constant, neighborhood_constant, split_alpha,
    GreedyParams, MassMap, Selection,
};
use crate::net_measure::{side_at, CubeSet, DyadicCube};
use crate::rng::seeded;

/// Cap on `Σ_i Π_r |A_r(i)|`, the number of incidences stored.
const MAX_INCIDENCES: u64 = 5_000_000;
/// Cap on horizontal cube positions scanned per plane.
const MAX_COLUMNS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    SharpFlat,
    SharpProduct { m_flat: usize },
    /// Planes and set supplied by the caller.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dims: Dims,
    pub alpha: f64,
    pub s: f64,
    pub l: u32,
    pub lambda: f64,
    pub generator: Generator,
    pub seed: u64,
    /// Planes drawn from a generated family.
    pub max_planes: usize,
}

impl ExperimentConfig {
    /// Validates ranges; `λ` defaults to `1/l²`.
    pub fn new(dims: Dims, alpha: f64, s: f64, l: u32, generator: Generator, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= dims.k as f64) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, {}]", dims.k)));
        }
        let top = ((dims.k + 1) * dims.codim()) as f64;
        if !(0.0..=top).contains(&s) {
            return Err(Error::InvalidParameter(format!("s {s} not in [0, {top}]")));
        }
        if !(1..=30).contains(&l) {
            return Err(Error::InvalidParameter(format!("scale exponent {l} not in [1, 30]")));
        }
        Ok(Self {
            dims,
            alpha,
            s,
            l,
            lambda: 1.0 / (l as f64).powi(2),
            generator,
            seed,
            max_planes: 256,
        })
    }

    /// Flat example: `s = (k − ⌈α⌉)(n − k)`.
    pub fn sharp_flat(dims: Dims, alpha: f64, l: u32, seed: u64) -> Result<Self> {
        let (m, _) = split_alpha(alpha);
        let s = (dims.k.saturating_sub(m) * dims.codim()) as f64;
        Self::new(dims, alpha, s, l, Generator::SharpFlat, seed)
    }

    /// Product example with `α = k`.
    pub fn sharp_product(dims: Dims, m_flat: usize, s: f64, l: u32, seed: u64) -> Result<Self> {
        Self::new(dims, dims.k as f64, s, l, Generator::SharpProduct { m_flat }, seed)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!("lambda {lambda} not in (0,1]")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn delta(&self) -> f64 {
        side_at(self.l)
    }
}

/// The set `B_l` and the planes of a generated configuration.
pub fn generate(config: &ExperimentConfig) -> Result<(CubeSet, Vec<PlaneCode>)> {
    let set = match config.generator {
        Generator::SharpFlat => gen_sharp_flat(config.dims, config.alpha, config.l, None)?,
        Generator::SharpProduct { m_flat } => {
            gen_sharp_product(config.dims, m_flat, config.s, config.l, None)?
        }
        Generator::Custom => {
            return Err(Error::InvalidParameter(
                "custom configurations supply their own set and planes".into(),
            ))
        }
    };
    if (set.family.family_dimension() - config.s).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "generated family has dimension {}, config says {}",
            set.family.family_dimension(),
            config.s
        )));
    }
    let mut rng = seeded(config.seed);
    let planes = set
        .family
        .sample_distinct(config.delta(), config.max_planes, &mut rng)?;
    Ok((set.cubes, planes))
}

/// Dyadic `α`-content of a union of level-`level` cubes in `ℝⁿ`: the cheapest
/// cover by dyadic cubes, each costing `(√n·side)^α`.
pub fn dyadic_content(cubes: &[Vec<i64>], level: u32, n: usize, alpha: f64) -> f64 {
    if cubes.is_empty() {
        return 0.0;
    }
    let cost = |lv: u32| ((n as f64).sqrt() * side_at(lv)).powf(alpha);
    let mut cur: BTreeMap<Vec<i64>, f64> = cubes.iter().map(|c| (c.clone(), cost(level))).collect();
    for lv in (0..level).rev() {
        let mut next: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (idx, v) in cur {
            let parent: Vec<i64> = idx.iter().map(|&i| i >> 1).collect();
            *next.entry(parent).or_insert(0.0) += v;
        }
        let cap = cost(lv);
        for v in next.values_mut() {
            *v = v.min(cap);
        }
        cur = next;
    }
    cur.values().sum()
}

/// Cubes of `set` met by the plane over `t ∈ [0,1]ᵏ`, in lexicographic order.
pub fn plane_cubes(code: &PlaneCode, set: &CubeSet) -> Result<Vec<Vec<i64>>> {
    let Dims { n, k } = code.dims;
    if set.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: set.dim(),
        });
    }
    let level = set.level();
    let per = 1i64 << level;
    let side = side_at(level);
    let columns = (per as usize).checked_pow(k as u32).filter(|&c| c <= MAX_COLUMNS).ok_or_else(|| {
        Error::InvalidParameter(format!("2^({level}·{k}) columns is too many to scan"))
    })?;
    let mut out = Vec::new();
    let mut h = vec![0i64; k];
    for _ in 0..columns {
        let mut ranges = Vec::with_capacity(n - k);
        for j in 0..n - k {
            let (mut lo, mut hi) = (code.a0[j], code.a0[j]);
            for (i, &hi_idx) in h.iter().enumerate() {
                let (x0, x1) = (hi_idx as f64 * side, (hi_idx + 1) as f64 * side);
                let (u, v) = (code.b[i][j] * x0, code.b[i][j] * x1);
                lo += u.min(v);
                hi += u.max(v);
            }
            let vlo = ((lo / side).floor() as i64 - 1).max(0);
            let vhi = ((hi / side).floor() as i64 + 1).min(per - 1);
            ranges.push((vlo, vhi));
        }
        if ranges.iter().all(|(a, b)| a <= b) {
            let mut v: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'vertical: loop {
                let idx: Vec<i64> = h.iter().chain(&v).copied().collect();
                if set.contains(&idx) && plane_box_intersects(code, &DyadicCube::new(level, idx.clone())) {
                    out.push(idx);
                }
                for j in (0..v.len()).rev() {
                    v[j] += 1;
                    if v[j] <= ranges[j].1 {
                        continue 'vertical;
                    }
                    v[j] = ranges[j].0;
                }
                break;
            }
        }
        for i in (0..k).rev() {
            h[i] += 1;
            if h[i] < per {
                break;
            }
            h[i] = 0;
        }
    }
    Ok(out)
}

/// Closed parameter box of cell `index` at side `side`, clipped to `[0,1]ᵏ`.
pub fn cell_box(index: &[i64], side: f64) -> Vec<(f64, f64)> {
    index
        .iter()
        .map(|&i| ((i as f64 * side).min(1.0), ((i + 1) as f64 * side).min(1.0)))
        .collect()
}

/// Everything recorded about one plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneRecord {
    pub code: PlaneCode,
    /// Dyadic `α`-content of the plane's cubes in `B_l`.
    pub content: f64,
    pub params: GreedyParams,
    /// Side of the mass-map cells.
    pub cell_side: f64,
    pub selection: Selection,
    /// `A_r(i)`: cube indices met over the r-th selected cell.
    pub cell_cubes: Vec<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleRecord {
    pub cubes: Vec<Vec<i64>>,
    /// Positions in `IncidenceReport::planes`.
    pub planes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceReport {
    pub dims: Dims,
    pub alpha: f64,
    pub s: f64,
    pub l: u32,
    pub delta: f64,
    pub lambda: f64,
    pub m: usize,
    pub epsilon: f64,
    pub phi: f64,
    pub psi: f64,
    pub zeta: f64,
    /// `α + (s − (k−m)(n−k))/(m+1)`
    pub bound_t: f64,
    /// M, the number of qualifying planes.
    pub plane_count: usize,
    /// Input planes whose content fell below λ.
    pub skipped_planes: usize,
    pub j_count: usize,
    pub a_count: u64,
    /// `|A_r(i)|` for each plane i and r = 0..=m.
    pub per_plane_counts: Vec<Vec<usize>>,
    pub per_tuple_max: usize,
    /// Smallest greedy separation `d₀` over the planes.
    pub min_d0: Option<f64>,
    pub planes: Vec<PlaneRecord>,
    pub tuples: Vec<TupleRecord>,
    /// `min |A_r(i)|·(√n δ)^α / ν_r(i)` over nonzero masses.
    pub lower_chain_ratio: Option<f64>,
    /// `|A| / (δ^{−(s+α(m+1))} λ^{1+ψ(m+1)})`
    pub lower_bound_constant: f64,
    /// Largest distance from a counted plane to its tuple's net.
    pub covering_radius: Option<f64>,
    /// Largest such distance over the net's claimed radius.
    pub covering_ratio: Option<f64>,
    /// `M δ^s / λ`
    pub packing_ratio: f64,
    /// `δ^{−t} λ^ζ`, the implied lower bound on `|J|`.
    pub j_lower_bound: f64,
}

/// `ζ = 1/(m+1) + ψ + φ(k+1)(n−k)/(m+1)`
pub fn zeta(dims: Dims, alpha: f64) -> f64 {
    let (m, eps) = split_alpha(alpha);
    let phi = m as f64 / eps;
    let psi = 1.0 + (m * dims.k) as f64 / eps;
    let m1 = (m + 1) as f64;
    1.0 / m1 + psi + phi * ((dims.k + 1) * dims.codim()) as f64 / m1
}

/// `α + (s − (k−⌈α⌉)(n−k))/(⌈α⌉+1)`
pub fn bound_exponent(dims: Dims, alpha: f64, s: f64) -> f64 {
    let (m, _) = split_alpha(alpha);
    let lost = (dims.k as f64 - m as f64) * dims.codim() as f64;
    alpha + (s - lost) / (m + 1) as f64
}

/// Dyadic level of the mass-map cells: the largest side `2^{−L} ≤ r`, no
/// finer than the cubes.
fn cell_level(r: f64, l: u32) -> u32 {
    let lv = (-r.log2()).ceil().max(0.0) as u32;
    lv.min(l)
}

fn analyze_plane(
    code: &PlaneCode,
    set: &CubeSet,
    alpha: f64,
    lambda: f64,
) -> Result<Option<PlaneRecord>> {
    let Dims { n, k } = code.dims;
    let l = set.level();
    let hits = plane_cubes(code, set)?;
    let content = dyadic_content(&hits, l, n, alpha);
    if content < lambda || content <= 0.0 {
        return Ok(None);
    }
    let params = derive_params(
        k,
        alpha,
        content.min(1.0),
        lipschitz_constant(n, k),
        neighborhood_constant(k, alpha),
    )?;
    let lv = cell_level(params.r, l);
    let cell_side = side_at(lv);
    let shift = l - lv;
    let cells_per_axis = 1i64 << lv;

    let mut leaves: BTreeMap<Vec<i64>, Vec<Vec<i64>>> = BTreeMap::new();
    for cube in &hits {
        let home: Vec<i64> = cube[..k].iter().map(|&h| h >> shift).collect();
        let cube_d = DyadicCube::new(l, cube.clone());
        let mut off = vec![-1i64; k];
        'neighbors: loop {
            let cell: Vec<i64> = home.iter().zip(&off).map(|(h, o)| h + o).collect();
            if cell.iter().all(|&c| (0..cells_per_axis).contains(&c))
                && plane_box_intersects_within(code, &cube_d, Some(&cell_box(&cell, cell_side)))
            {
                leaves.entry(cell).or_default().push(cube.clone());
            }
            for o in off.iter_mut().rev() {
                *o += 1;
                if *o <= 1 {
                    continue 'neighbors;
                }
                *o = -1;
            }
            break;
        }
    }

    let mut map = MassMap::zeros(k, cell_side)?;
    for (cell, cubes) in &leaves {
        map.set(cell, dyadic_content(cubes, l, n, alpha))?;
    }
    let selection = greedy_select(&map, &params)?;
    let cell_cubes = selection
        .cells
        .iter()
        .map(|c| leaves.get(c).cloned().unwrap_or_default())
        .collect();
    Ok(Some(PlaneRecord {
        code: code.clone(),
        content,
        params,
        cell_side,
        selection,
        cell_cubes,
    }))
}

fn check_separated(planes: &[PlaneCode], delta: f64) -> Result<()> {
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let d = metric_code(&planes[i], &planes[j])?;
            if d < delta * (1.0 - 1e-12) {
                return Err(Error::NotSeparated {
                    first: i,
                    second: j,
                    distance: d,
                    delta,
                });
            }
        }
    }
    Ok(())
}

/// Counts the incidence set for δ-separated planes in the horizontal family
/// against `B_l`, then measures the covering constants on every tuple.
pub fn build_incidence(
    config: &ExperimentConfig,
    planes: &[PlaneCode],
    set: &CubeSet,
) -> Result<IncidenceReport> {
    let dims = config.dims;
    if set.level() != config.l {
        return Err(Error::ScaleMismatch {
            set_level: set.level(),
            expected: config.l,
        });
    }
    if set.dim() != dims.n {
        return Err(Error::DimensionMismatch {
            expected: dims.n,
            got: set.dim(),
        });
    }
    for (i, p) in planes.iter().enumerate() {
        if p.dims != dims {
            return Err(Error::DimensionMismatch {
                expected: dims.code_len(),
                got: p.dims.code_len(),
            });
        }
        if !in_horizontal_family(p) {
            return Err(Error::InvalidParameter(format!("plane {i} is not horizontal")));
        }
    }
    let delta = config.delta();
    check_separated(planes, delta)?;

    let analyzed: Vec<Option<PlaneRecord>> = planes
        .par_iter()
        .map(|p| analyze_plane(p, set, config.alpha, config.lambda))
        .collect::<Result<_>>()?;
    let skipped_planes = analyzed.iter().filter(|r| r.is_none()).count();
    let records: Vec<PlaneRecord> = analyzed.into_iter().flatten().collect();
    if skipped_planes > 0 {
        log::info!("{skipped_planes} planes carry content below lambda and are skipped");
    }

    let per_plane_counts: Vec<Vec<usize>> = records
        .iter()
        .map(|r| r.cell_cubes.iter().map(Vec::len).collect())
        .collect();
    let stored: u64 = per_plane_counts
        .iter()
        .map(|c| c.iter().map(|&x| x as u64).product::<u64>())
        .sum();
    if stored > MAX_INCIDENCES {
        return Err(Error::InvalidParameter(format!(
            "{stored} incidences exceed the cap {MAX_INCIDENCES}"
        )));
    }

    let mut tuple_map: BTreeMap<Vec<Vec<i64>>, Vec<usize>> = BTreeMap::new();
    for (i, rec) in records.iter().enumerate() {
        if rec.cell_cubes.iter().any(Vec::is_empty) {
            continue;
        }
        let mut pos = vec![0usize; rec.cell_cubes.len()];
        'tuples: loop {
            let key: Vec<Vec<i64>> = pos
                .iter()
                .zip(&rec.cell_cubes)
                .map(|(&p, cubes)| cubes[p].clone())
                .collect();
            tuple_map.entry(key).or_default().push(i);
            for r in (0..pos.len()).rev() {
                pos[r] += 1;
                if pos[r] < rec.cell_cubes[r].len() {
                    continue 'tuples;
                }
                pos[r] = 0;
            }
            break;
        }
    }
    let tuples: Vec<TupleRecord> = tuple_map
        .into_iter()
        .map(|(cubes, planes)| TupleRecord { cubes, planes })
        .collect();
    let a_count: u64 = tuples.iter().map(|t| t.planes.len() as u64).sum();
    let per_tuple_max = tuples.iter().map(|t| t.planes.len()).max().unwrap_or(0);

    let (m, epsilon) = split_alpha(config.alpha);
    let phi = m as f64 / epsilon;
    let psi = 1.0 + (m * dims.k) as f64 / epsilon;
    let leaf = ((dims.n as f64).sqrt() * delta).powf(config.alpha);
    let lower_chain_ratio = records
        .iter()
        .zip(&per_plane_counts)
        .flat_map(|(rec, counts)| {
            rec.selection
                .masses
                .iter()
                .zip(counts)
                .filter(|(nu, _)| **nu > 0.0)
                .map(|(nu, &c)| c as f64 * leaf / nu)
                .collect::<Vec<_>>()
        })
        .reduce(f64::min);
    let m1 = (m + 1) as f64;
    let lower_bound_constant = a_count as f64
        / (delta.powf(-(config.s + config.alpha * m1)) * config.lambda.powf(1.0 + psi * m1));
    let bound_t = bound_exponent(dims, config.alpha, config.s);
    let z = zeta(dims, config.alpha);

    let mut report = IncidenceReport {
        dims,
        alpha: config.alpha,
        s: config.s,
        l: config.l,
        delta,
        lambda: config.lambda,
        m,
        epsilon,
        phi,
        psi,
        zeta: z,
        bound_t,
        plane_count: records.len(),
        skipped_planes,
        j_count: set.len(),
        a_count,
        per_plane_counts,
        per_tuple_max,
        min_d0: records.iter().map(|r| r.params.d0).reduce(f64::min),
        planes: records,
        tuples,
        lower_chain_ratio,
        lower_bound_constant,
        covering_radius: None,
        covering_ratio: None,
        packing_ratio: 0.0,
        j_lower_bound: delta.powf(-bound_t) * config.lambda.powf(z),
    };
    report.packing_ratio = report.plane_count as f64 * delta.powf(config.s) / config.lambda;

    let nets = build_tuple_nets(&report)?;
    let mut radius: Option<f64> = None;
    let mut ratio: Option<f64> = None;
    for (t, net) in report.tuples.iter().zip(&nets) {
        let Some(net) = net else { continue };
        for &i in &t.planes {
            let d = net.net.distance_to(&report.planes[i].code);
            radius = Some(radius.map_or(d, |r| r.max(d)));
            let q = d / net.net.claimed_radius;
            ratio = Some(ratio.map_or(q, |r| r.max(q)));
        }
    }
    report.covering_radius = radius;
    report.covering_ratio = ratio;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_measure::rasterize_cantor;

    fn dims(n: usize, k: usize) -> Dims {
        Dims::new(n, k).unwrap()
    }

    fn line(y: f64) -> PlaneCode {
        PlaneCode::new(dims(2, 1), vec![y], vec![vec![0.0]]).unwrap()
    }

    #[test]
    fn content_examples() {
        // one cube: its own diameter
        let c = dyadic_content(&[vec![3, 5]], 3, 2, 1.0);
        assert!((c - 2f64.sqrt() / 8.0).abs() < 1e-15);
        // a full row of level-3 squares is capped at every level by the parent
        let row: Vec<Vec<i64>> = (0..8).map(|i| vec![i, 0]).collect();
        let c = dyadic_content(&row, 3, 2, 1.0);
        assert!((c - 8.0 * 2f64.sqrt() / 8.0).abs() < 1e-12);
        // full square, α = 2: the unit cube costs 2
        let all: Vec<Vec<i64>> = (0..4).flat_map(|i| (0..4).map(move |j| vec![i, j])).collect();
        assert!((dyadic_content(&all, 2, 2, 2.0) - 2.0).abs() < 1e-12);
        // α = 1: the root cap √2 is below 16·(√2/4)
        assert!((dyadic_content(&all, 2, 2, 1.0) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(dyadic_content(&[], 4, 2, 1.0), 0.0);
    }

    #[test]
    fn plane_cubes_matches_brute_force() {
        let full = CubeSet::from_indices(2, 4, (0..16).flat_map(|i| (0..16).map(move |j| vec![i, j]))).unwrap();
        for code in [
            PlaneCode::new(dims(2, 1), vec![0.1], vec![vec![0.7]]).unwrap(),
            PlaneCode::new(dims(2, 1), vec![0.9], vec![vec![-0.6]]).unwrap(),
            line(0.5),
        ] {
            let fast = plane_cubes(&code, &full).unwrap();
            let slow: Vec<Vec<i64>> = full
                .cubes()
                .filter(|c| plane_box_intersects(&code, c))
                .map(|c| c.index)
                .collect();
            assert_eq!(fast, slow);
        }
        // the line y = 1/2 lies on a grid line and meets two rows
        assert_eq!(plane_cubes(&line(0.5), &full).unwrap().len(), 32);
    }

    proptest::proptest! {
        #[test]
        fn plane_cubes_agrees_on_random_planes(seed in 0u64..500, k in 1usize..3) {
            let d = dims(k + 1, k);
            let mut rng = seeded(seed);
            let code = crate::affine::sample_horizontal(d, &mut rng);
            let per = 8i64;
            let all = CubeSet::from_indices(k + 1, 3, (0..per.pow(k as u32 + 1)).map(|mut f| {
                let mut idx = vec![0; k + 1];
                for x in idx.iter_mut().rev() {
                    *x = f % per;
                    f /= per;
                }
                idx
            })).unwrap();
            let fast = plane_cubes(&code, &all).unwrap();
            let slow: Vec<Vec<i64>> = all.cubes().filter(|c| plane_box_intersects(&code, c)).map(|c| c.index).collect();
            proptest::prop_assert_eq!(fast, slow);
        }
    }

    #[test]
    fn exponents() {
        let d = dims(2, 1);
        // m = 1, ε = 1: ζ = 1/2 + 2 + 1·2·1/2
        assert!((zeta(d, 1.0) - 3.5).abs() < 1e-12);
        assert!((bound_exponent(d, 1.0, 1.0) - 1.5).abs() < 1e-12);
        assert!((bound_exponent(dims(3, 2), 0.5, 1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_plane_factorizes() {
        let d = dims(2, 1);
        let code = line(0.3);
        let full = CubeSet::from_indices(2, 6, (0..64).flat_map(|i| (0..64).map(move |j| vec![i, j]))).unwrap();
        let hits = plane_cubes(&code, &full).unwrap();
        let set = CubeSet::from_indices(2, 6, hits).unwrap();
        let cfg = ExperimentConfig::new(d, 1.0, 1.0, 6, Generator::Custom, 0).unwrap();
        let rep = build_incidence(&cfg, &[code], &set).unwrap();
        assert_eq!(rep.plane_count, 1);
        assert_eq!(rep.m, 1);
        let c = &rep.per_plane_counts[0];
        assert_eq!(rep.a_count, (c[0] * c[1]) as u64);
        assert!(rep.a_count > 0);
        assert_eq!(rep.per_tuple_max, 1);
        assert!(rep.lower_chain_ratio.unwrap() >= 1.0 - 1e-12);
        assert!(rep.covering_ratio.unwrap() <= 1.0);
    }

    #[test]
    fn empty_set_has_no_incidences() {
        let d = dims(2, 1);
        let cfg = ExperimentConfig::new(d, 1.0, 1.0, 5, Generator::Custom, 0).unwrap();
        let rep = build_incidence(&cfg, &[line(0.2), line(0.7)], &CubeSet::empty(2, 5)).unwrap();
        assert_eq!(rep.a_count, 0);
        assert_eq!(rep.plane_count, 0);
        assert_eq!(rep.skipped_planes, 2);
    }

    #[test]
    fn input_errors() {
        let d = dims(2, 1);
        let cfg = ExperimentConfig::new(d, 1.0, 1.0, 5, Generator::Custom, 0).unwrap();
        let coarse = CubeSet::empty(2, 4);
        assert!(matches!(
            build_incidence(&cfg, &[line(0.2)], &coarse),
            Err(Error::ScaleMismatch { set_level: 4, expected: 5 })
        ));
        let set = CubeSet::empty(2, 5);
        assert!(matches!(
            build_incidence(&cfg, &[line(0.2), line(0.21)], &set),
            Err(Error::NotSeparated { .. })
        ));
        let tilted = PlaneCode::new(d, vec![0.5], vec![vec![0.8]]).unwrap();
        assert!(build_incidence(&cfg, &[tilted], &set).is_err());
        assert!(ExperimentConfig::new(d, 1.5, 1.0, 5, Generator::Custom, 0).is_err());
        assert!(ExperimentConfig::new(d, 1.0, 4.5, 5, Generator::Custom, 0).is_err());
        assert!(ExperimentConfig::new(d, 1.0, 1.0, 0, Generator::Custom, 0).is_err());
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn two_parallel_lines() {
        let d = dims(2, 1);
        let (y1, y2) = (0.2, 0.7);
        let full = CubeSet::from_indices(2, 6, (0..64).flat_map(|i| (0..64).map(move |j| vec![i, j]))).unwrap();
        let mut idx = plane_cubes(&line(y1), &full).unwrap();
        idx.extend(plane_cubes(&line(y2), &full).unwrap());
        let set = CubeSet::from_indices(2, 6, idx).unwrap();
        let cfg = ExperimentConfig::new(d, 1.0, 1.0, 6, Generator::Custom, 0).unwrap();
        let rep = build_incidence(&cfg, &[line(y1), line(y2)], &set).unwrap();
        let sum: u64 = rep
            .per_plane_counts
            .iter()
            .map(|c| c.iter().map(|&x| x as u64).product::<u64>())
            .sum();
        assert_eq!(rep.a_count, sum);
        assert_eq!(rep.plane_count, 2);
        // far-apart lines share no tuple
        assert_eq!(rep.per_tuple_max, 1);
    }

    #[test]
    fn generated_runs_are_deterministic() {
        let cfg = ExperimentConfig::sharp_flat(dims(3, 2), 2f64.ln() / 3f64.ln(), 5, 4).unwrap();
        let (set, planes) = generate(&cfg).unwrap();
        assert_eq!(planes.len(), 33);
        let a = build_incidence(&cfg, &planes, &set).unwrap();
        let b = build_incidence(&cfg, &planes, &set).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        // every plane contains the set, so the tuples collect all planes
        assert_eq!(a.per_tuple_max, a.plane_count);
        assert!(a.a_count > 0);
    }

    #[test]
    fn report_round_trips_through_json() {
        let raster = rasterize_cantor(3, &[0, 2], 4).unwrap();
        assert_eq!(raster.cubes.level(), 7);
        let cfg = ExperimentConfig::sharp_product(dims(2, 1), 1, 2f64.ln() / 3f64.ln(), 5, 0).unwrap();
        let (set, planes) = generate(&cfg).unwrap();
        let rep = build_incidence(&cfg, &planes, &set).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        assert!(text.contains("\"per_tuple_max\""));
        assert!(text.contains("\"a_count\""));
        let back: IncidenceReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rep);
    }
}
