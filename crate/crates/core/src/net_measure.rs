//! Dyadic cubes and cube sets, Cantor rasterization, box-counting,
//! net premeasures, Frostman checks and the scale selector.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::affine::{code_distance, Dims, PlaneCode};
use crate::error::{Error, Result};

/// Closed cube `Π [index_j 2^{−l}, (index_j+1) 2^{−l}]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: Vec<i64>,
}

impl DyadicCube {
    pub fn new(level: u32, index: Vec<i64>) -> Self {
        Self { level, index }
    }

    pub fn side(&self) -> f64 {
        side_at(self.level)
    }

    pub fn diameter(&self) -> f64 {
        (self.index.len() as f64).sqrt() * self.side()
    }

    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        let s = self.side();
        let lo = self.index[axis] as f64 * s;
        (lo, lo + s)
    }

    pub fn center(&self) -> Vec<f64> {
        let s = self.side();
        self.index.iter().map(|&i| (i as f64 + 0.5) * s).collect()
    }
}

pub fn side_at(level: u32) -> f64 {
    2f64.powi(-(level as i32))
}

/// Distinct cubes of one level, stored flat and sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeSet {
    dim: usize,
    level: u32,
    flat: Vec<i64>,
}

impl CubeSet {
    pub fn empty(dim: usize, level: u32) -> Self {
        Self {
            dim,
            level,
            flat: Vec::new(),
        }
    }

    pub fn from_indices<I>(dim: usize, level: u32, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<i64>>,
    {
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for idx in indices {
            if idx.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: idx.len(),
                });
            }
            rows.push(idx);
        }
        rows.sort_unstable();
        rows.dedup();
        Ok(Self {
            dim,
            level,
            flat: rows.concat(),
        })
    }

    /// Caller guarantees `flat` is sorted and duplicate free.
    fn from_sorted_flat(dim: usize, level: u32, flat: Vec<i64>) -> Self {
        debug_assert!(flat.len().is_multiple_of(dim.max(1)));
        Self { dim, level, flat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.flat.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = &[i64]> + '_ {
        self.flat.chunks_exact(self.dim.max(1))
    }

    pub fn cubes(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        self.indices()
            .map(move |idx| DyadicCube::new(self.level, idx.to_vec()))
    }

    pub fn contains(&self, index: &[i64]) -> bool {
        if index.len() != self.dim || self.dim == 0 {
            return false;
        }
        let n = self.len();
        let row = |i: usize| &self.flat[i * self.dim..(i + 1) * self.dim];
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match row(mid).cmp(index) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// The level-`level` parents of the cubes (`level <= self.level`).
    pub fn coarsen(&self, level: u32) -> Result<CubeSet> {
        if level > self.level {
            return Err(Error::InvalidParameter(format!(
                "cannot coarsen level {} to finer level {level}",
                self.level
            )));
        }
        let shift = self.level - level;
        let mut rows: Vec<Vec<i64>> = self
            .indices()
            .map(|idx| idx.iter().map(|&i| i >> shift).collect())
            .collect();
        rows.sort_unstable();
        rows.dedup();
        Ok(Self::from_sorted_flat(self.dim, level, rows.concat()))
    }

    /// `(level, count)` for every level `0..=self.level`.
    pub fn dyadic_counts(&self) -> Vec<(f64, usize)> {
        (0..=self.level)
            .map(|l| {
                let c = self.coarsen(l).expect("coarser level").len();
                (l as f64, c)
            })
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.dim, self.level)?;
        for idx in self.indices() {
            let line: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<CubeSet> {
        let mut lines = r
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let header = header?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let bad_header = |message: String| Error::Parse { line: 1, message };
        if parts.len() != 2 {
            return Err(bad_header(format!("expected \"n l\", found {header:?}")));
        }
        let dim: usize = parts[0]
            .parse()
            .map_err(|e| bad_header(format!("bad n: {e}")))?;
        let level: u32 = parts[1]
            .parse()
            .map_err(|e| bad_header(format!("bad l: {e}")))?;
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let idx = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<i64>().map_err(|e| Error::Parse {
                        line: i + 1,
                        message: format!("bad index {t:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if idx.len() != dim {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {dim} indices, found {}", idx.len()),
                });
            }
            rows.push(idx);
        }
        CubeSet::from_indices(dim, level, rows)
    }
}

/// A digit-restricted Cantor set at finite depth.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorRaster {
    pub base: u32,
    pub digits: Vec<u32>,
    pub depth: u32,
    /// Left endpoints of the level-`depth` cells as numerators over `base^depth`.
    pub cells: Vec<u128>,
    /// The cells snapped to dyadic cubes at level `⌈depth·log₂ base⌉`.
    pub cubes: CubeSet,
}

impl CantorRaster {
    /// `(j·log₂ b, cell count at depth j)` for `j = 0..=depth`, read off the cells.
    pub fn native_counts(&self) -> Vec<(f64, usize)> {
        let b = self.base as u128;
        let log_b = (self.base as f64).log2();
        (0..=self.depth)
            .map(|j| {
                let div = b.pow(self.depth - j);
                let mut parents: Vec<u128> = self.cells.iter().map(|c| c / div).collect();
                parents.dedup();
                (j as f64 * log_b, parents.len())
            })
            .collect()
    }

    pub fn dimension(&self) -> f64 {
        (self.digits.len() as f64).ln() / (self.base as f64).ln()
    }
}

/// Smallest `L` with `2^L >= b^depth`. A b-adic cell is then shorter than two
/// cube sides and meets at most three cubes.
pub fn snap_level(base: u32, depth: u32) -> u32 {
    let target = (base as u128).pow(depth);
    let mut l = 0u32;
    while (1u128 << l) < target {
        l += 1;
    }
    l
}

pub fn rasterize_cantor(base: u32, digits: &[u32], depth: u32) -> Result<CantorRaster> {
    if base < 2 {
        return Err(Error::InvalidParameter(format!("base {base} < 2")));
    }
    let mut digits = digits.to_vec();
    digits.sort_unstable();
    digits.dedup();
    if digits.is_empty() {
        return Err(Error::InvalidParameter("empty digit set".into()));
    }
    if digits.iter().any(|&d| d >= base) {
        return Err(Error::InvalidParameter(format!(
            "digits must lie in 0..{base}"
        )));
    }
    let b = base as u128;
    if (depth as f64) * (base as f64).log2() > 100.0 {
        return Err(Error::InvalidParameter(format!(
            "depth {depth} too large for base {base}"
        )));
    }
    let mut cells: Vec<u128> = vec![0];
    for _ in 0..depth {
        cells = cells
            .iter()
            .flat_map(|&c| digits.iter().map(move |&d| c * b + d as u128))
            .collect();
    }
    let level = snap_level(base, depth);
    let denom = b.pow(depth);
    let scale = 1u128 << level;
    let mut idx: Vec<i64> = Vec::with_capacity(2 * cells.len());
    for &c in &cells {
        let first = c * scale / denom;
        let last = ((c + 1) * scale).div_ceil(denom) - 1;
        for i in first..=last {
            idx.push(i as i64);
        }
    }
    idx.sort_unstable();
    idx.dedup();
    let cubes = CubeSet::from_sorted_flat(1, level, idx);
    Ok(CantorRaster {
        base,
        digits,
        depth,
        cells,
        cubes,
    })
}

/// `[0,1]^p × A × {0}^{n−p−1}` at the level of `a`.
pub fn product_set(a: &CubeSet, flat_dims: usize, ambient: usize) -> Result<CubeSet> {
    if a.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: a.dim(),
        });
    }
    if flat_dims + 1 > ambient {
        return Err(Error::InvalidParameter(format!(
            "p + 1 = {} exceeds ambient dimension {ambient}",
            flat_dims + 1
        )));
    }
    let side = 1i64 << a.level();
    let total = (side as usize).pow(flat_dims as u32) * a.len();
    let mut flat = Vec::with_capacity(total * ambient);
    let mut free = vec![0i64; flat_dims];
    for _ in 0..(side as usize).pow(flat_dims as u32) {
        for &ai in a.indices().map(|r| &r[0]) {
            flat.extend_from_slice(&free);
            flat.push(ai);
            flat.extend(std::iter::repeat_n(0, ambient - flat_dims - 1));
        }
        // odometer, last coordinate fastest, keeps the output lexicographic
        for j in (0..flat_dims).rev() {
            free[j] += 1;
            if free[j] < side {
                break;
            }
            free[j] = 0;
        }
    }
    Ok(CubeSet::from_sorted_flat(ambient, a.level(), flat))
}

/// Inclusive window of levels used by the least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitRange {
    pub lo: f64,
    pub hi: f64,
}

impl FitRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn all() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, level: f64) -> bool {
        level >= self.lo - 1e-9 && level <= self.hi + 1e-9
    }
}

impl FromStr for FitRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("fit range {s:?} is not lmin:lmax"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let lo: f64 = a.trim().parse().map_err(|_| bad())?;
        let hi: f64 = b.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        Ok(Self { lo, hi })
    }
}

impl fmt::Display for FitRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// The window a cube set is fitted over by default. The coarsest levels
/// are dominated by lattice effects and are left out.
pub fn default_fit_range(level: u32) -> FitRange {
    FitRange::new(2f64.min(level as f64), level as f64)
}

/// Least-squares slope of `log₂ count` against level.
pub fn box_dimension_estimate(counts: &[(f64, usize)], fit: FitRange) -> Result<f64> {
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .filter(|(l, c)| *c > 0 && fit.contains(*l))
        .map(|&(l, c)| (l, (c as f64).log2()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientLevels { found: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientLevels { found: 1 });
    }
    Ok(sxy / sxx)
}

/// `Σ (√n 2^{−l})^s` over the given cubes.
pub fn net_premeasure<'a, I>(cover: I, s: f64) -> f64
where
    I: IntoIterator<Item = &'a DyadicCube>,
{
    cover.into_iter().map(|c| c.diameter().powf(s)).sum()
}

pub fn cube_set_premeasure(set: &CubeSet, s: f64) -> f64 {
    let diam = (set.dim() as f64).sqrt() * side_at(set.level());
    set.len() as f64 * diam.powf(s)
}

/// A finitely supported measure on plane codes with a claimed Frostman bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanSample {
    pub atoms: Vec<(PlaneCode, f64)>,
    pub s: f64,
    pub c: f64,
}

impl FrostmanSample {
    /// Uniform weights on the grid `(j+½)/g` in the `active` code coordinates,
    /// zero in the rest. The exponent is the number of active coordinates.
    pub fn grid(dims: Dims, g: usize, active: &[usize]) -> Result<Self> {
        if g == 0 {
            return Err(Error::InvalidParameter("grid size must be positive".into()));
        }
        let len = dims.code_len();
        if let Some(&bad) = active.iter().find(|&&a| a >= len) {
            return Err(Error::InvalidParameter(format!(
                "active coordinate {bad} outside code length {len}"
            )));
        }
        let count = g.pow(active.len() as u32);
        let weight = 1.0 / count as f64;
        let mut atoms = Vec::with_capacity(count);
        let mut digits = vec![0usize; active.len()];
        for _ in 0..count {
            let mut x = vec![0.0; len];
            for (&a, &d) in active.iter().zip(&digits) {
                x[a] = (d as f64 + 0.5) / g as f64;
            }
            atoms.push((PlaneCode::from_flat(dims, &x)?, weight));
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < g {
                    break;
                }
                *d = 0;
            }
        }
        Ok(Self {
            atoms,
            s: active.len() as f64,
            c: f64::NAN,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn codes(&self) -> Vec<PlaneCode> {
        self.atoms.iter().map(|a| a.0.clone()).collect()
    }
}

/// Mass of the open code-metric ball `B(center, r)`.
pub fn ball_mass(mu: &FrostmanSample, center: &PlaneCode, r: f64) -> f64 {
    mu.atoms
        .iter()
        .filter(|(p, _)| code_distance(p, center) < r)
        .map(|(_, w)| w)
        .sum()
}

/// Largest `μ(B(P, r)) / r^s` over the given centers and radii.
pub fn frostman_verify(mu: &FrostmanSample, radii: &[f64], centers: &[PlaneCode]) -> Result<f64> {
    if let Some(r) = radii.iter().find(|&&r| r <= 0.0 || !r.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius {r} is not positive")));
    }
    let mut worst = 0.0f64;
    for c in centers {
        for &r in radii {
            worst = worst.max(ball_mass(mu, c, r) / r.powf(mu.s));
        }
    }
    Ok(worst)
}

/// Smallest level `l` with `q_l >= 1/l²`.
pub fn scale_select(masses: &[(u32, f64)]) -> Result<u32> {
    masses
        .iter()
        .filter(|(l, q)| *l >= 1 && *q >= 1.0 / (*l as f64).powi(2))
        .map(|(l, _)| *l)
        .min()
        .ok_or(Error::NoQualifyingLevel)
}
