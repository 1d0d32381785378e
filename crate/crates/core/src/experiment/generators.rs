//! Sharp example configurations: a Cantor-type set inside a flat, and a
//! product of a cube with a Cantor set, each with its family of planes.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::affine::{Dims, PlaneCode};
use crate::error::{Error, Result};
use crate::greedy::split_alpha;
use crate::net_measure::{
    box_dimension_estimate, product_set, rasterize_cantor, snap_level, CantorRaster, CubeSet,
    FitRange,
};

const MAX_BASE: u32 = 16;

/// Base and digit set whose Cantor set has dimension closest to `dim`.
/// Searches bases up to 16, smallest base on ties; digits are spread evenly.
pub fn fit_digits(dim: f64) -> Result<(u32, Vec<u32>)> {
    if !(0.0..=1.0).contains(&dim) {
        return Err(Error::InvalidParameter(format!("Cantor dimension {dim} not in [0,1]")));
    }
    let mut best = (f64::INFINITY, 2u32, 1u32);
    for b in 2..=MAX_BASE {
        for c in 1..=b {
            let err = ((c as f64).ln() / (b as f64).ln() - dim).abs();
            if err < best.0 - 1e-12 {
                best = (err, b, c);
            }
        }
    }
    let (_, b, c) = best;
    let digits = if c == 1 {
        vec![0]
    } else {
        (0..c)
            .map(|i| ((i * (b - 1)) as f64 / (c - 1) as f64).round() as u32)
            .collect()
    };
    Ok((b, digits))
}

/// Smallest depth whose snapped level reaches `l`.
fn depth_for_level(base: u32, l: u32) -> u32 {
    (1..).find(|&j| snap_level(base, j) >= l).unwrap_or(1)
}

/// Grid values `0, step, …` in `[0,1]`.
fn grid_values(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidParameter(format!("grid step {step} not in (0,1]")));
    }
    let steps = (1.0 / step + 1e-9).floor() as usize;
    Ok((0..=steps).map(|j| j as f64 * step).collect())
}

/// Planes of a sharp example. Members lie in the horizontal family and
/// distinct grid members are at code distance at least the grid step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlaneFamily {
    /// Planes containing `span(e₁…e_m)`: `a⁰ = 0`, `bⁱ = 0` for `i ≤ m`,
    /// the remaining slopes on the grid.
    Flat { dims: Dims, m: usize },
    /// Planes inside `ℝ^{m_flat+k−1}` lifted to height `a` in the next
    /// coordinate, for `a` among `translations`.
    Product {
        dims: Dims,
        m_flat: usize,
        translations: Vec<f64>,
        translation_dimension: f64,
    },
}

impl PlaneFamily {
    pub fn dims(&self) -> Dims {
        match self {
            Self::Flat { dims, .. } | Self::Product { dims, .. } => *dims,
        }
    }

    /// Dimension of the continuous family.
    pub fn family_dimension(&self) -> f64 {
        match self {
            Self::Flat { dims, m } => ((dims.k - m) * dims.codim()) as f64,
            Self::Product {
                dims,
                m_flat,
                translation_dimension,
                ..
            } => ((dims.k + 1) * (m_flat - 1)) as f64 + translation_dimension,
        }
    }

    /// Mixed radix of the grid members.
    fn radices(&self, step: f64) -> Result<Vec<usize>> {
        let axis = grid_values(step)?.len();
        Ok(match self {
            Self::Flat { dims, m } => vec![axis; (dims.k - m) * dims.codim()],
            Self::Product {
                dims,
                m_flat,
                translations,
                ..
            } => {
                let mut r = vec![axis; (dims.k + 1) * (m_flat - 1)];
                r.push(translations.len());
                r
            }
        })
    }

    /// Number of grid members, `None` on overflow.
    pub fn grid_size(&self, step: f64) -> Result<Option<usize>> {
        Ok(self
            .radices(step)?
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(r)))
    }

    fn member(&self, step: f64, digits: &[usize]) -> Result<PlaneCode> {
        let dims = self.dims();
        let (k, c) = (dims.k, dims.codim());
        match self {
            Self::Flat { m, .. } => {
                let mut b = vec![vec![0.0; c]; k];
                for (slot, &d) in digits.iter().enumerate() {
                    b[m + slot / c][slot % c] = d as f64 * step;
                }
                PlaneCode::new(dims, vec![0.0; c], b)
            }
            Self::Product {
                m_flat,
                translations,
                ..
            } => {
                let free = m_flat - 1;
                let mut heights = vec![vec![0.0; c]; k + 1];
                for (slot, &d) in digits[..digits.len() - 1].iter().enumerate() {
                    heights[slot / free][slot % free] = d as f64 * step;
                }
                let a = translations[digits[digits.len() - 1]];
                for h in heights.iter_mut() {
                    h[free] = a;
                }
                PlaneCode::from_heights(dims, &heights)
            }
        }
    }

    /// All grid members in lexicographic digit order; errors above `limit`.
    pub fn grid(&self, step: f64, limit: usize) -> Result<Vec<PlaneCode>> {
        let radices = self.radices(step)?;
        let size = self.grid_size(step)?.filter(|&s| s <= limit).ok_or_else(|| {
            Error::InvalidParameter(format!("plane grid exceeds {limit} members"))
        })?;
        let mut digits = vec![0usize; radices.len()];
        let mut out = Vec::with_capacity(size);
        for _ in 0..size {
            out.push(self.member(step, &digits)?);
            for j in (0..digits.len()).rev() {
                digits[j] += 1;
                if digits[j] < radices[j] {
                    break;
                }
                digits[j] = 0;
            }
        }
        Ok(out)
    }

    /// A uniformly random grid member.
    pub fn sample<R: Rng + ?Sized>(&self, step: f64, rng: &mut R) -> Result<PlaneCode> {
        let digits: Vec<usize> = self
            .radices(step)?
            .iter()
            .map(|&r| rng.random_range(0..r))
            .collect();
        self.member(step, &digits)
    }

    /// `count` distinct grid members: the whole grid when it is small enough,
    /// otherwise distinct random draws in draw order.
    pub fn sample_distinct<R: Rng + ?Sized>(
        &self,
        step: f64,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<PlaneCode>> {
        if let Some(size) = self.grid_size(step)? {
            if size <= count {
                return self.grid(step, size);
            }
        }
        let radices = self.radices(step)?;
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count {
            attempts += 1;
            if attempts > 100 * count + 1000 {
                return Err(Error::NoQualifyingPlane { attempts });
            }
            let digits: Vec<usize> = radices.iter().map(|&r| rng.random_range(0..r)).collect();
            if seen.insert(digits.clone()) {
                out.push(self.member(step, &digits)?);
            }
        }
        Ok(out)
    }
}

/// A generated set at level `l` with its planes.
#[derive(Debug, Clone)]
pub struct SharpSet {
    /// `[0,1]^flat_dims × A × {0}` at level `l`.
    pub cubes: CubeSet,
    /// The one-dimensional Cantor factor `A`.
    pub factor: CantorRaster,
    pub flat_dims: usize,
    pub theoretical_dimension: f64,
    pub family: PlaneFamily,
}

impl SharpSet {
    /// Counts at scales `b^{−j}`: the factor's counts times `b^{j·flat_dims}`.
    pub fn native_counts(&self) -> Vec<(f64, usize)> {
        let b = self.factor.base as usize;
        self.factor
            .native_counts()
            .into_iter()
            .enumerate()
            .map_while(|(j, (lv, c))| {
                b.checked_pow((j * self.flat_dims) as u32)
                    .and_then(|w| w.checked_mul(c))
                    .map(|n| (lv, n))
            })
            .collect()
    }

    pub fn native_dimension(&self) -> Result<f64> {
        box_dimension_estimate(&self.native_counts(), FitRange::all())
    }
}

fn build_set(
    dims: Dims,
    flat_dims: usize,
    factor_dim: f64,
    l: u32,
    depth: Option<u32>,
) -> Result<(CubeSet, CantorRaster)> {
    let (base, digits) = fit_digits(factor_dim)?;
    let depth = depth.unwrap_or_else(|| depth_for_level(base, l));
    let factor = rasterize_cantor(base, &digits, depth)?;
    let a = if factor.cubes.level() >= l {
        factor.cubes.coarsen(l)?
    } else {
        return Err(Error::ScaleMismatch {
            set_level: factor.cubes.level(),
            expected: l,
        });
    };
    Ok((product_set(&a, flat_dims, dims.n)?, factor))
}

/// Cantor-type set of dimension `α` inside `span(e₁…e_⌈α⌉)` and the planes
/// containing that flat. `depth` overrides the Cantor depth, which must
/// still reach level `l`.
pub fn gen_sharp_flat(dims: Dims, alpha: f64, l: u32, depth: Option<u32>) -> Result<SharpSet> {
    if !(alpha > 0.0 && alpha <= dims.k as f64 - 1.0) {
        return Err(Error::InvalidParameter(format!(
            "flat example needs 0 < alpha <= k - 1 = {}, got {alpha}",
            dims.k - 1
        )));
    }
    let (m, _) = split_alpha(alpha);
    let factor_dim = alpha - (m - 1) as f64;
    let (cubes, factor) = build_set(dims, m - 1, factor_dim, l, depth)?;
    let theoretical_dimension = (m - 1) as f64 + factor.dimension();
    Ok(SharpSet {
        cubes,
        factor,
        flat_dims: m - 1,
        theoretical_dimension,
        family: PlaneFamily::Flat { dims, m },
    })
}

/// `[0,1]^{m_flat+k−1} × A × {0}` with `dim A = s − (k+1)(m_flat−1)`, and
/// the planes of the flat lifted by grid points of `A` at spacing at least
/// `2^{−l}`.
pub fn gen_sharp_product(
    dims: Dims,
    m_flat: usize,
    s: f64,
    l: u32,
    depth: Option<u32>,
) -> Result<SharpSet> {
    if m_flat == 0 || m_flat + dims.k > dims.n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= m_flat <= n - k = {}, got {m_flat}",
            dims.codim()
        )));
    }
    let a_dim = s - ((dims.k + 1) * (m_flat - 1)) as f64;
    if !(-1e-12..=1.0 + 1e-12).contains(&a_dim) {
        return Err(Error::InvalidParameter(format!(
            "s = {s} needs dim A = {a_dim} in [0,1]"
        )));
    }
    let a_dim = a_dim.clamp(0.0, 1.0);
    let flat_dims = m_flat + dims.k - 1;
    let (cubes, factor) = build_set(dims, flat_dims, a_dim, l, depth)?;
    let translations = translation_points(&factor, l);
    Ok(SharpSet {
        cubes,
        theoretical_dimension: flat_dims as f64 + factor.dimension(),
        flat_dims,
        family: PlaneFamily::Product {
            dims,
            m_flat,
            translations,
            translation_dimension: factor.dimension(),
        },
        factor,
    })
}

/// Points of the Cantor factor, one per cell at the deepest depth whose cells
/// are no shorter than `2^{−l}`. Each is the smallest point of its cell.
fn translation_points(factor: &CantorRaster, l: u32) -> Vec<f64> {
    let b = factor.base as u128;
    let depth = (0..=factor.depth)
        .take_while(|&j| b.pow(j) <= 1u128 << l)
        .last()
        .unwrap_or(0);
    let div = b.pow(factor.depth - depth);
    let mut cells: Vec<u128> = factor.cells.iter().map(|c| c / div).collect();
    cells.dedup();
    let dmin = *factor.digits.iter().min().unwrap_or(&0) as f64;
    let width = (b as f64).powi(depth as i32).recip();
    let tail = if b > 1 { dmin / (b as f64 - 1.0) } else { 0.0 };
    cells.iter().map(|&c| (c as f64 + tail) * width).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{in_horizontal_family, metric_code};
    use crate::net_measure::default_fit_range;
    use crate::rng::seeded;

    fn dims(n: usize, k: usize) -> Dims {
        Dims::new(n, k).unwrap()
    }

    #[test]
    fn digit_fits() {
        assert_eq!(fit_digits(2f64.ln() / 3f64.ln()).unwrap(), (3, vec![0, 2]));
        assert_eq!(fit_digits(1.0).unwrap(), (2, vec![0, 1]));
        assert_eq!(fit_digits(0.5).unwrap(), (4, vec![0, 3]));
        assert_eq!(fit_digits(0.0).unwrap(), (2, vec![0]));
        assert!(fit_digits(1.2).is_err());
        // log 3 / log 5 ≈ 0.6826
        assert_eq!(fit_digits(0.6826).unwrap(), (5, vec![0, 2, 4]));
    }

    #[test]
    fn flat_segment_example() {
        let set = gen_sharp_flat(dims(3, 2), 1.0, 5, None).unwrap();
        assert_eq!(set.cubes.level(), 5);
        assert_eq!(set.cubes.len(), 32);
        assert!(set.cubes.indices().all(|i| i[1] == 0 && i[2] == 0));
        let est = box_dimension_estimate(&set.cubes.dyadic_counts(), default_fit_range(5)).unwrap();
        assert!((est - 1.0).abs() < 1e-9);
        assert_eq!(set.family.family_dimension(), 1.0);
        let planes = set.family.grid(1.0 / 32.0, 100).unwrap();
        assert_eq!(planes.len(), 33);
        for p in &planes {
            assert!(in_horizontal_family(p));
            // the plane contains the x-axis segment
            assert_eq!(p.height_at(&[0.7, 0.0]), vec![0.0]);
        }
    }

    #[test]
    fn flat_cantor_example() {
        let alpha = 2f64.ln() / 3f64.ln();
        let set = gen_sharp_flat(dims(3, 2), alpha, 10, None).unwrap();
        assert_eq!((set.factor.base, set.factor.digits.clone()), (3, vec![0, 2]));
        assert_eq!(set.factor.depth, 6);
        assert!((set.native_dimension().unwrap() - alpha).abs() < 1e-9);
        assert!(gen_sharp_flat(dims(3, 2), 1.5, 6, None).is_err());
        assert!(gen_sharp_flat(dims(3, 1), 0.5, 6, None).is_err());
    }

    #[test]
    fn product_examples() {
        // A = [0,1] gives the full square
        let full = gen_sharp_product(dims(2, 1), 1, 1.0, 4, None).unwrap();
        assert_eq!(full.cubes.len(), 256);
        assert!((full.theoretical_dimension - 2.0).abs() < 1e-12);

        let third = 2f64.ln() / 3f64.ln();
        let cantor = gen_sharp_product(dims(2, 1), 1, third, 6, None).unwrap();
        assert!((cantor.native_dimension().unwrap() - (1.0 + third)).abs() < 1e-9);
        let PlaneFamily::Product { translations, .. } = &cantor.family else {
            panic!("product family expected")
        };
        let expected: Vec<f64> = [0, 2, 6, 8, 18, 20, 24, 26].iter().map(|&c| c as f64 / 27.0).collect();
        assert_eq!(translations.len(), 8);
        for (a, e) in translations.iter().zip(&expected) {
            assert!((a - e).abs() < 1e-15);
        }

        // A = {0}, k = 1, n = 3, m_flat = 2: the plane z = 0
        let point = gen_sharp_product(dims(3, 1), 2, 2.0, 4, None).unwrap();
        assert!((point.theoretical_dimension - 2.0).abs() < 1e-12);
        assert!(point.cubes.indices().all(|i| i[2] == 0));
        assert_eq!(point.cubes.len(), 256);
        assert!(gen_sharp_product(dims(2, 1), 2, 2.0, 4, None).is_err());
        assert!(gen_sharp_product(dims(3, 1), 2, 3.5, 4, None).is_err());
    }

    #[test]
    fn product_planes_lie_in_the_set() {
        let set = gen_sharp_product(dims(4, 1), 2, 2.5, 5, None).unwrap();
        let step = 1.0 / 32.0;
        let mut rng = seeded(3);
        for _ in 0..50 {
            let p = set.family.sample(step, &mut rng).unwrap();
            assert!(in_horizontal_family(&p));
            for t in [0.0, 0.3, 1.0] {
                let x = p.height_at(&[t]);
                assert_eq!(x[2], 0.0);
                // the lifted coordinate is constant along the plane
                assert_eq!(x[1], p.a0[1]);
            }
        }
    }

    #[test]
    fn grid_members_are_separated() {
        let fams = [
            gen_sharp_flat(dims(4, 3), 1.5, 3, None).unwrap().family,
            gen_sharp_product(dims(3, 1), 2, 2.6, 3, None).unwrap().family,
        ];
        for fam in fams {
            let step = 0.125;
            let planes = fam.grid(step, 100_000).unwrap();
            assert_eq!(Some(planes.len()), fam.grid_size(step).unwrap());
            for i in 0..planes.len().min(300) {
                for j in i + 1..planes.len().min(300) {
                    assert!(metric_code(&planes[i], &planes[j]).unwrap() >= step - 1e-15);
                }
            }
        }
    }

    #[test]
    fn distinct_sampling_is_deterministic() {
        let fam = gen_sharp_flat(dims(5, 3), 1.0, 4, None).unwrap().family;
        let a = fam.sample_distinct(0.0625, 40, &mut seeded(9)).unwrap();
        let b = fam.sample_distinct(0.0625, 40, &mut seeded(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        let small = gen_sharp_flat(dims(3, 2), 1.0, 3, None).unwrap().family;
        assert_eq!(small.sample_distinct(0.125, 40, &mut seeded(1)).unwrap().len(), 9);
        assert!(fam.grid(0.0625, 10).is_err());
    }
}
