//! Greedy mass-concentration selection on a plane: m+1 grid cells carrying a
//! large share of a mass map, each center far from the hull of the earlier ones.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{dist_to_affine_hull, factorial, simplex_volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyParams {
    pub k: usize,
    pub alpha: f64,
    pub m: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub l2: f64,
    pub k_prime: f64,
    pub d: f64,
    pub d0: f64,
    pub r: f64,
}

impl GreedyParams {
    /// `φ = m/ε`
    pub fn phi(&self) -> f64 {
        self.m as f64 / self.epsilon
    }

    /// `ψ = 1 + mk/ε`
    pub fn psi(&self) -> f64 {
        1.0 + (self.m * self.k) as f64 / self.epsilon
    }

    /// `d₀^m / m!`, the guaranteed witness volume.
    pub fn witness_floor(&self) -> f64 {
        self.d0.powi(self.m as i32) / factorial(self.m)
    }

    /// `β s^k / 2^{k+1}` for grid side `s`.
    pub fn mass_threshold(&self, side: f64) -> f64 {
        self.beta * side.powi(self.k as i32) / 2f64.powi(self.k as i32 + 1)
    }
}

/// `⌈α⌉` and `α − ⌈α⌉ + 1`.
pub fn split_alpha(alpha: f64) -> (usize, f64) {
    let m = alpha.ceil().max(1.0) as usize;
    (m, alpha - m as f64 + 1.0)
}

/// `L₂ = √(1 + k(n−k))`, a Lipschitz constant of `t ↦ (t, g_P(t))` on 𝓗.
pub fn lipschitz_constant(n: usize, k: usize) -> f64 {
    (1.0 + (k * (n - k)) as f64).sqrt()
}

/// `K′ = 2^α (3√k)^{m−1} k^{α/2}`
pub fn neighborhood_constant(k: usize, alpha: f64) -> f64 {
    let (m, _) = split_alpha(alpha);
    let k = k as f64;
    2f64.powf(alpha) * (3.0 * k.sqrt()).powi(m as i32 - 1) * k.powf(alpha / 2.0)
}

pub fn derive_params(k: usize, alpha: f64, beta: f64, l2: f64, k_prime: f64) -> Result<GreedyParams> {
    if k == 0 || !(alpha > 0.0 && alpha <= k as f64) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0, {k}]")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("beta {beta} not in (0, 1]")));
    }
    if l2 < 1.0 || k_prime <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need L2 >= 1 and K' > 0, got {l2}, {k_prime}"
        )));
    }
    let (m, epsilon) = split_alpha(alpha);
    let d = (beta / (2.0 * k_prime)).powf(1.0 / epsilon).min(beta);
    let d0 = d / (2.0 * l2);
    let r = d0.powi(m as i32) / (2f64.powi(k as i32 + 1) * k as f64 * factorial(m));
    Ok(GreedyParams {
        k,
        alpha,
        m,
        epsilon,
        beta,
        l2,
        k_prime,
        d,
        d0,
        r,
    })
}

/// Nonnegative masses on the cells of side `cell_side` covering `[0,1]ᵏ`.
/// Cells are stored densely, first coordinate most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMap {
    k: usize,
    cell_side: f64,
    per_axis: usize,
    masses: Vec<f64>,
}

impl MassMap {
    pub fn zeros(k: usize, cell_side: f64) -> Result<Self> {
        if k == 0 || !(cell_side > 0.0 && cell_side <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need k >= 1 and side in (0,1], got {k}, {cell_side}"
            )));
        }
        let per_axis = (1.0 / cell_side - 1e-9).ceil().max(1.0) as usize;
        let cells = per_axis
            .checked_pow(k as u32)
            .filter(|&c| c <= 1 << 26)
            .ok_or_else(|| Error::InvalidParameter(format!("{per_axis}^{k} cells is too many")))?;
        Ok(Self {
            k,
            cell_side,
            per_axis,
            masses: vec![0.0; cells],
        })
    }

    /// Mass `total` spread evenly over the cells.
    pub fn uniform(k: usize, cell_side: f64, total: f64) -> Result<Self> {
        let mut map = Self::zeros(k, cell_side)?;
        let each = total / map.masses.len() as f64;
        map.masses.iter_mut().for_each(|x| *x = each);
        Ok(map)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn index_of(&self, flat: usize) -> Vec<i64> {
        let mut rest = flat;
        let mut idx = vec![0i64; self.k];
        for slot in idx.iter_mut().rev() {
            *slot = (rest % self.per_axis) as i64;
            rest /= self.per_axis;
        }
        idx
    }

    fn flat_of(&self, index: &[i64]) -> Result<usize> {
        if index.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: index.len(),
            });
        }
        let mut flat = 0usize;
        for &i in index {
            if i < 0 || i as usize >= self.per_axis {
                return Err(Error::InvalidParameter(format!(
                    "cell index {i} outside 0..{}",
                    self.per_axis
                )));
            }
            flat = flat * self.per_axis + i as usize;
        }
        Ok(flat)
    }

    pub fn get(&self, index: &[i64]) -> Result<f64> {
        Ok(self.masses[self.flat_of(index)?])
    }

    pub fn set(&mut self, index: &[i64], mass: f64) -> Result<()> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass {mass} is not a finite nonnegative number")));
        }
        let f = self.flat_of(index)?;
        self.masses[f] = mass;
        Ok(())
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn scale(&mut self, factor: f64) {
        self.masses.iter_mut().for_each(|x| *x *= factor);
    }

    /// Center of the cell clipped to `[0,1]ᵏ`.
    pub fn center(&self, flat: usize) -> Vec<f64> {
        self.index_of(flat)
            .into_iter()
            .map(|i| {
                let lo = i as f64 * self.cell_side;
                let hi = (lo + self.cell_side).min(1.0);
                (lo + hi) / 2.0
            })
            .collect()
    }

    /// `(lo, hi)` per axis of the clipped cell.
    pub fn cell_box(&self, index: &[i64]) -> Vec<(f64, f64)> {
        index
            .iter()
            .map(|&i| {
                let lo = i as f64 * self.cell_side;
                (lo, (lo + self.cell_side).min(1.0))
            })
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {:?}", self.k, self.cell_side)?;
        for (f, &mass) in self.masses.iter().enumerate() {
            if mass > 0.0 {
                let idx: Vec<String> = self.index_of(f).iter().map(|i| i.to_string()).collect();
                writeln!(w, "{} {:?}", idx.join(" "), mass)?;
            }
        }
        Ok(())
    }

    /// Cells not listed have mass zero.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let (k, side) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(parse_err(1, "missing header".into()));
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(parse_err(i + 1, format!("expected \"k r\", found {line:?}")));
            }
            let k: usize = parts[0].parse().map_err(|e| parse_err(i + 1, format!("bad k: {e}")))?;
            let r: f64 = parts[1].parse().map_err(|e| parse_err(i + 1, format!("bad r: {e}")))?;
            break (k, r);
        };
        let mut map = Self::zeros(k, side)?;
        for (i, line) in lines {
            let line = line?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.is_empty() {
                continue;
            }
            if parts.len() != k + 1 {
                return Err(parse_err(i + 1, format!("expected {} fields, found {}", k + 1, parts.len())));
            }
            let idx = parts[..k]
                .iter()
                .map(|t| t.parse::<i64>().map_err(|e| parse_err(i + 1, format!("bad index {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let mass: f64 = parts[k]
                .parse()
                .map_err(|e| parse_err(i + 1, format!("bad mass: {e}")))?;
            map.set(&idx, mass).map_err(|e| parse_err(i + 1, e.to_string()))?;
        }
        Ok(map)
    }
}

/// Mass of the cells whose center lies within `width + √k·side/2` of the
/// affine hull of `hull_points`.
pub fn neighborhood_mass(map: &MassMap, hull_points: &[Vec<f64>], width: f64) -> Result<f64> {
    if hull_points.is_empty() {
        return Err(Error::InvalidParameter("empty hull".into()));
    }
    let reach = width + (map.k as f64).sqrt() * map.cell_side / 2.0;
    let flags = hull_distances(map, hull_points)?;
    Ok(flags
        .iter()
        .zip(&map.masses)
        .filter(|(d, _)| **d <= reach)
        .map(|(_, m)| m)
        .sum())
}

fn hull_distances(map: &MassMap, hull: &[Vec<f64>]) -> Result<Vec<f64>> {
    (0..map.masses.len())
        .into_par_iter()
        .map(|f| dist_to_affine_hull(&map.center(f), hull))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub cells: Vec<Vec<i64>>,
    pub centers: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    /// Distance of pick i from the hull of picks `0..i`, for `i >= 1`.
    pub hull_separations: Vec<f64>,
    /// Mass within `2d₀` of the hull before pick i, for `i >= 1`.
    pub neighborhood_masses: Vec<f64>,
    /// `β s^k / 2^{k+1}` with `s` the map's cell side.
    pub mass_threshold: f64,
}

impl Selection {
    /// Every recorded neighborhood mass is at most `β/2`.
    pub fn neighborhoods_small(&self, beta: f64) -> bool {
        self.neighborhood_masses.iter().all(|&m| m <= beta / 2.0)
    }

    /// Every pick carries at least the mass threshold.
    pub fn masses_large(&self) -> bool {
        self.masses.iter().all(|&a| a >= self.mass_threshold)
    }

    /// The dichotomy: small neighborhoods force large picks.
    pub fn dichotomy_holds(&self, beta: f64) -> bool {
        !self.neighborhoods_small(beta) || self.masses_large()
    }
}

/// Index of the largest value among `allowed`, ties to the smallest index.
fn argmax(masses: &[f64], allowed: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (f, &m) in masses.iter().enumerate() {
        if allowed(f) && best.is_none_or(|b| m > masses[b]) {
            best = Some(f);
        }
    }
    best
}

pub fn greedy_select(map: &MassMap, params: &GreedyParams) -> Result<Selection> {
    if map.k != params.k {
        return Err(Error::DimensionMismatch {
            expected: params.k,
            got: map.k,
        });
    }
    let total = map.total();
    if total < params.beta * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "total mass {total} below beta {}",
            params.beta
        )));
    }
    let first = argmax(&map.masses, |_| true).expect("map has cells");
    let mut picks = vec![first];
    let mut centers = vec![map.center(first)];
    let mut separations = Vec::with_capacity(params.m);
    let mut neighborhoods = Vec::with_capacity(params.m);
    let reach = 2.0 * params.d0 + (map.k as f64).sqrt() * map.cell_side / 2.0;
    for _ in 0..params.m {
        let dist = hull_distances(map, &centers)?;
        let near: f64 = dist
            .iter()
            .zip(&map.masses)
            .filter(|(d, _)| **d <= reach)
            .map(|(_, m)| m)
            .sum();
        neighborhoods.push(near);
        let next = argmax(&map.masses, |f| dist[f] >= params.d0).ok_or(Error::NoCandidate {
            d0: params.d0,
            picked: centers.len(),
        })?;
        separations.push(dist[next]);
        picks.push(next);
        centers.push(map.center(next));
    }
    let selection = Selection {
        cells: picks.iter().map(|&f| map.index_of(f)).collect(),
        masses: picks.iter().map(|&f| map.masses[f]).collect(),
        centers,
        hull_separations: separations,
        neighborhood_masses: neighborhoods,
        mass_threshold: params.mass_threshold(map.cell_side),
    };
    if !selection.dichotomy_holds(params.beta) {
        log::warn!("selection violates the mass dichotomy: {selection:?}");
    }
    Ok(selection)
}

/// m-volume of the simplex on the selected centers.
pub fn witness_simplex(selection: &Selection) -> f64 {
    simplex_volume(&selection.centers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn params_examples() {
        let p = derive_params(1, 1.0, 0.5, 1.0, 2.0).unwrap();
        assert_eq!(p.m, 1);
        assert_abs_diff_eq!(p.epsilon, 1.0);
        assert_abs_diff_eq!(p.d, 0.5 / 4.0);
        assert_abs_diff_eq!(p.d0, 0.5 / 8.0);
        assert_abs_diff_eq!(p.r, p.d0 / 4.0);

        let p = derive_params(2, 1.5, 0.5, 1.0, 2.0).unwrap();
        assert_eq!(p.m, 2);
        assert_abs_diff_eq!(p.epsilon, 0.5);
        assert_abs_diff_eq!(p.d, (0.5f64 / 4.0).powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(p.r, p.d0.powi(2) / (8.0 * 2.0 * 2.0), epsilon = 1e-18);
        assert_abs_diff_eq!(p.phi(), 4.0);
        assert_abs_diff_eq!(p.psi(), 9.0);

        // (β/2K′)^{1/ε} = 1 exceeds β = 1 only at equality; cap at β.
        let p = derive_params(1, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(p.d, 1.0);
        let p = derive_params(1, 1.0, 0.5, 1.0, 0.1).unwrap();
        assert_abs_diff_eq!(p.d, 0.5);

        assert!(derive_params(1, 1.5, 0.5, 1.0, 1.0).is_err());
        assert!(derive_params(2, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(derive_params(2, 1.0, 0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn constants() {
        assert_eq!(split_alpha(2.0), (2, 1.0));
        assert_eq!(split_alpha(0.5), (1, 0.5));
        assert_abs_diff_eq!(lipschitz_constant(3, 2), 3f64.sqrt());
        assert_abs_diff_eq!(neighborhood_constant(1, 1.0), 2.0);
        assert_abs_diff_eq!(
            neighborhood_constant(2, 1.5),
            2f64.powf(1.5) * 3.0 * 2f64.sqrt() * 2f64.powf(0.75),
            epsilon = 1e-12
        );
    }

    #[test]
    fn neighborhood_examples() {
        let map = MassMap::uniform(2, 0.1, 1.0).unwrap();
        // a center point: only its own cell
        let one = neighborhood_mass(&map, &[vec![0.05, 0.05]], 0.0).unwrap();
        assert_abs_diff_eq!(one, 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(neighborhood_mass(&map, &[vec![0.5, 0.5]], 2f64.sqrt()).unwrap(), 1.0, epsilon = 1e-12);
        assert!(neighborhood_mass(&map, &[], 0.1).is_err());

        // strip around the x-axis: rows whose center is within w + slack
        let fine = MassMap::uniform(2, 1.0 / 64.0, 1.0).unwrap();
        let w = 0.1;
        let got = neighborhood_mass(&fine, &[vec![0.0, 0.0], vec![1.0, 0.0]], w).unwrap();
        let reach = w + 2f64.sqrt() / 128.0;
        let rows = (0..64).filter(|&i| (i as f64 + 0.5) / 64.0 <= reach).count();
        assert_abs_diff_eq!(got, rows as f64 / 64.0, epsilon = 1e-12);
        assert!((got - w).abs() <= 2.0 / 64.0);
    }

    #[test]
    fn uniform_map_segment() {
        let p = derive_params(1, 1.0, 1.0, 1.0, 2.0).unwrap();
        let map = MassMap::uniform(1, 1.0 / 64.0, 1.0).unwrap();
        let sel = greedy_select(&map, &p).unwrap();
        assert_eq!(sel.cells[0], vec![0]);
        assert!(sel.hull_separations[0] >= p.d0);
        assert!(sel.masses_large());
        assert!(sel.dichotomy_holds(p.beta));
        assert_abs_diff_eq!(sel.mass_threshold, 1.0 / 64.0 / 4.0);
        assert!(witness_simplex(&sel) >= p.witness_floor());
    }

    #[test]
    fn concentrated_mass_reported_not_raised() {
        let p = derive_params(1, 1.0, 1.0, 1.0, 2.0).unwrap();
        let mut map = MassMap::zeros(1, 1.0 / 32.0).unwrap();
        map.set(&[3], 1.0).unwrap();
        let sel = greedy_select(&map, &p).unwrap();
        assert_eq!(sel.cells[0], vec![3]);
        assert_eq!(sel.masses[1], 0.0);
        assert!(!sel.masses_large());
        assert!(!sel.neighborhoods_small(p.beta));
        assert!(sel.dichotomy_holds(p.beta));

        // d₀ beyond the diameter leaves nothing to pick
        let far = GreedyParams { d0: 2.0, ..p };
        assert!(matches!(greedy_select(&map, &far), Err(Error::NoCandidate { .. })));
    }

    #[test]
    fn two_clusters() {
        let p = derive_params(1, 1.0, 1.0, 1.0, 2.0).unwrap();
        let mut map = MassMap::zeros(1, 1.0 / 32.0).unwrap();
        map.set(&[2], 0.6).unwrap();
        map.set(&[28], 0.4).unwrap();
        let sel = greedy_select(&map, &p).unwrap();
        assert_eq!(sel.cells, vec![vec![2], vec![28]]);
        assert_eq!(sel.masses, vec![0.6, 0.4]);
    }

    #[test]
    fn witness_examples() {
        let d0 = 0.1;
        let sel = Selection {
            cells: vec![],
            centers: vec![vec![0.0], vec![d0]],
            masses: vec![],
            hull_separations: vec![d0],
            neighborhood_masses: vec![],
            mass_threshold: 0.0,
        };
        assert_abs_diff_eq!(witness_simplex(&sel), d0);
        let sel = Selection {
            centers: vec![vec![0.0, 0.0], vec![d0, 0.0], vec![0.0, d0]],
            ..sel
        };
        assert_abs_diff_eq!(witness_simplex(&sel), d0 * d0 / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn mass_file_round_trip() {
        let mut map = MassMap::zeros(2, 0.25).unwrap();
        map.set(&[1, 2], 0.3).unwrap();
        map.set(&[3, 0], 0.7).unwrap();
        let mut buf = Vec::new();
        map.write_to(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("2 0.25\n"));
        assert_eq!(MassMap::read_from(&buf[..]).unwrap(), map);
        assert!(MassMap::read_from(&b"2 0.25\n1 9 0.5\n"[..]).is_err());
        assert!(MassMap::read_from(&b"2 0.25\n1 1 -0.5\n"[..]).is_err());
        assert!(MassMap::read_from(&b"2 0.25\n1 0.5\n"[..]).is_err());
    }

    #[test]
    fn clipped_boundary_cells() {
        let map = MassMap::zeros(1, 0.3).unwrap();
        assert_eq!(map.per_axis(), 4);
        assert_abs_diff_eq!(map.center(3)[0], 0.95);
    }

    #[test]
    fn neighborhood_constant_is_admissible() {
        for k in 1..=3usize {
            for alpha in [0.5, 1.0, 1.5, 2.0] {
                if alpha > k as f64 {
                    continue;
                }
                let beta = 1.0;
                let kp = neighborhood_constant(k, alpha);
                let p = derive_params(k, alpha, beta, lipschitz_constant(k + 1, k), kp).unwrap();
                let side = (p.d / 4.0).max(if k == 3 { 1.0 / 96.0 } else { 1.0 / 512.0 });
                let map = MassMap::uniform(k, side, beta).unwrap();
                // hulls of m points: corners, centers and diagonals
                let mut hulls: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.5; k]], vec![vec![0.0; k]]];
                if p.m >= 2 {
                    hulls.push(vec![vec![0.0; k], vec![1.0; k]]);
                    let mut e = vec![0.0; k];
                    e[0] = 1.0;
                    hulls.push(vec![vec![0.5; k], e]);
                }
                for hull in hulls.iter().filter(|h| h.len() == p.m) {
                    let got = neighborhood_mass(&map, hull, p.d).unwrap();
                    let bound = 2.0 * kp * p.d.powf(p.epsilon) * beta;
                    assert!(got <= bound, "k={k} alpha={alpha}: {got} > {bound}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn scaling_keeps_picks(seed in any::<u64>(), k in 1usize..3) {
            use rand::Rng;
            let mut rng = crate::rng::seeded(seed);
            let mut map = MassMap::zeros(k, 1.0 / 16.0).unwrap();
            for f in 0..map.len() {
                let idx = map.index_of(f);
                map.set(&idx, rng.random::<f64>()).unwrap();
            }
            let total = map.total();
            map.scale(0.25 / total);
            let p = derive_params(k, k as f64, 0.25, 1.0, 1.0).unwrap();
            let a = greedy_select(&map, &p).unwrap();
            let mut doubled = map.clone();
            doubled.scale(2.0);
            let q = derive_params(k, k as f64, 0.5, 1.0, 1.0).unwrap();
            let q = GreedyParams { d0: p.d0, ..q };
            let b = greedy_select(&doubled, &q).unwrap();
            prop_assert_eq!(&a.cells, &b.cells);
            for (x, y) in a.masses.iter().zip(&b.masses) {
                prop_assert!((2.0 * x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn separations_and_witness(seed in any::<u64>(), k in 1usize..3, alpha_step in 1usize..5) {
            use rand::Rng;
            let alpha = alpha_step as f64 * 0.5;
            prop_assume!(alpha <= k as f64);
            let mut rng = crate::rng::seeded(seed);
            let mut map = MassMap::zeros(k, 1.0 / 32.0).unwrap();
            for f in 0..map.len() {
                let idx = map.index_of(f);
                map.set(&idx, rng.random::<f64>().powi(4)).unwrap();
            }
            let beta = 0.8;
            map.scale(beta / map.total());
            let p = derive_params(k, alpha, beta, lipschitz_constant(k + 1, k), neighborhood_constant(k, alpha)).unwrap();
            let sel = greedy_select(&map, &p).unwrap();
            prop_assert_eq!(sel.cells.len(), p.m + 1);
            prop_assert!(sel.hull_separations.iter().all(|&s| s >= p.d0));
            prop_assert!(witness_simplex(&sel) >= p.witness_floor() * (1.0 - 1e-12));
            prop_assert!(sel.dichotomy_holds(beta));
        }
    }
}
