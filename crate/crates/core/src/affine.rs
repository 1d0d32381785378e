//! Coded affine k-planes of the horizontal family, their two metrics and
//! plane–box intersection.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::feasibility::System;
use crate::net_measure::DyadicCube;

const ON_FLAT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub k: usize,
}

impl Dims {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidDims { n, k });
        }
        Ok(Self { n, k })
    }

    /// n − k, the dimension of every height vector.
    pub fn codim(&self) -> usize {
        self.n - self.k
    }

    /// (k+1)(n−k)
    pub fn code_len(&self) -> usize {
        (self.k + 1) * self.codim()
    }
}

/// The code `(a⁰, b¹, …, bᵏ)` of a plane. `P ∩ H_i` is the point `(1^i, a⁰ + bⁱ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneCode {
    pub dims: Dims,
    pub a0: Vec<f64>,
    pub b: Vec<Vec<f64>>,
}

impl PlaneCode {
    pub fn new(dims: Dims, a0: Vec<f64>, b: Vec<Vec<f64>>) -> Result<Self> {
        check_len(dims.codim(), a0.len())?;
        check_len(dims.k, b.len())?;
        for bi in &b {
            check_len(dims.codim(), bi.len())?;
        }
        Ok(Self { dims, a0, b })
    }

    /// Builds a code from its flat coordinate vector `a⁰ ‖ b¹ ‖ … ‖ bᵏ`.
    pub fn from_flat(dims: Dims, x: &[f64]) -> Result<Self> {
        check_len(dims.code_len(), x.len())?;
        let c = dims.codim();
        let a0 = x[..c].to_vec();
        let b = (0..dims.k)
            .map(|i| x[(i + 1) * c..(i + 2) * c].to_vec())
            .collect();
        Ok(Self { dims, a0, b })
    }

    /// The same plane in the coordinates given by intersection heights
    /// `a⁰, a⁰+b¹, …, a⁰+bᵏ`.
    pub fn from_heights(dims: Dims, heights: &[Vec<f64>]) -> Result<Self> {
        check_len(dims.k + 1, heights.len())?;
        let a0 = heights[0].clone();
        check_len(dims.codim(), a0.len())?;
        let mut b = Vec::with_capacity(dims.k);
        for h in &heights[1..] {
            check_len(dims.codim(), h.len())?;
            b.push(h.iter().zip(&a0).map(|(x, y)| x - y).collect());
        }
        Ok(Self { dims, a0, b })
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut x = self.a0.clone();
        for bi in &self.b {
            x.extend_from_slice(bi);
        }
        x
    }

    /// Vertical part `a⁰ + Σ tᵢ bⁱ` of the point over `t`.
    pub fn height_at(&self, t: &[f64]) -> Vec<f64> {
        let mut g = self.a0.clone();
        for (ti, bi) in t.iter().zip(&self.b) {
            for (gj, bij) in g.iter_mut().zip(bi) {
                *gj += ti * bij;
            }
        }
        g
    }

    fn check_dims(&self, other: &PlaneCode) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::InvalidParameter(format!(
                "planes live in different spaces: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }
}

pub fn point_on_plane(code: &PlaneCode, t: &[f64]) -> Result<Vec<f64>> {
    check_len(code.dims.k, t.len())?;
    let mut p = t.to_vec();
    p.extend(code.height_at(t));
    Ok(p)
}

/// Reads the code off the k+1 points `x_i ∈ H_i`.
pub fn code_from_intersections(dims: Dims, points: &[Vec<f64>]) -> Result<PlaneCode> {
    check_len(dims.k + 1, points.len())?;
    let mut heights = Vec::with_capacity(dims.k + 1);
    for (i, x) in points.iter().enumerate() {
        check_len(dims.n, x.len())?;
        for (j, &xj) in x[..dims.k].iter().enumerate() {
            let want = if i >= 1 && j == i - 1 { 1.0 } else { 0.0 };
            if (xj - want).abs() > ON_FLAT_TOL {
                return Err(Error::MalformedIntersection {
                    index: i,
                    detail: format!("coordinate {j} is {xj}, expected {want}"),
                });
            }
        }
        heights.push(x[dims.k..].to_vec());
    }
    PlaneCode::from_heights(dims, &heights)
}

pub fn in_horizontal_family(code: &PlaneCode) -> bool {
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    code.a0.iter().all(|&a| unit(a))
        && code
            .b
            .iter()
            .all(|bi| bi.iter().zip(&code.a0).all(|(b, a)| unit(a + b)))
}

/// Max-norm distance of the codes.
pub fn metric_code(p: &PlaneCode, q: &PlaneCode) -> Result<f64> {
    p.check_dims(q)?;
    Ok(code_distance(p, q))
}

pub(crate) fn code_distance(p: &PlaneCode, q: &PlaneCode) -> f64 {
    let mut d = p
        .a0
        .iter()
        .zip(&q.a0)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
    for (bp, bq) in p.b.iter().zip(&q.b) {
        for (x, y) in bp.iter().zip(bq) {
            d = d.max((x - y).abs());
        }
    }
    d
}

/// Orthogonal projection onto the direction space and the base point in its
/// orthogonal complement.
fn projection_and_base(code: &PlaneCode) -> (DMatrix<f64>, DVector<f64>) {
    let Dims { n, k } = code.dims;
    let mut w = DMatrix::<f64>::zeros(n, k);
    for i in 0..k {
        w[(i, i)] = 1.0;
        for (j, &bij) in code.b[i].iter().enumerate() {
            w[(k + j, i)] = bij;
        }
    }
    // The first k rows are the identity, so W always has full column rank.
    let q = w.qr().q();
    let proj = &q * q.transpose();
    let mut x = DVector::<f64>::zeros(n);
    for (j, &a) in code.a0.iter().enumerate() {
        x[k + j] = a;
    }
    let base = &x - &proj * &x;
    (proj, base)
}

/// `‖π_V1 − π_V2‖ + |a1 − a2|` with the operator norm taken from the SVD.
pub fn metric_natural(p: &PlaneCode, q: &PlaneCode) -> Result<f64> {
    p.check_dims(q)?;
    let (p1, a1) = projection_and_base(p);
    let (p2, a2) = projection_and_base(q);
    let op = (p1 - p2)
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s));
    Ok(op + (a1 - a2).norm())
}

/// Closed-cube intersection test.
pub fn plane_box_intersects(code: &PlaneCode, cube: &DyadicCube) -> bool {
    plane_box_intersects_within(code, cube, None)
}

/// As [`plane_box_intersects`] with the parameter `t` further restricted
/// to the box `t_box` (one `(lo, hi)` per coordinate).
pub fn plane_box_intersects_within(
    code: &PlaneCode,
    cube: &DyadicCube,
    t_box: Option<&[(f64, f64)]>,
) -> bool {
    let Dims { n, k } = code.dims;
    if cube.index.len() != n {
        return false;
    }
    let mut sys = System::new(k);
    for i in 0..k {
        let (mut lo, mut hi) = cube.bounds(i);
        if let Some(tb) = t_box {
            lo = lo.max(tb[i].0);
            hi = hi.min(tb[i].1);
        }
        if lo > hi {
            return false;
        }
        sys.bound_var(i, lo, hi);
    }
    let mut coeffs = vec![0.0; k];
    for j in 0..n - k {
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = code.b[i][j];
        }
        let (lo, hi) = cube.bounds(k + j);
        sys.bound_affine(&coeffs, code.a0[j], lo, hi);
    }
    sys.is_feasible()
}

/// Empirical equivalence constants between the natural and the code metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricEquivalenceReport {
    pub sample_size: usize,
    pub max_ratio_m_over_d: f64,
    pub max_ratio_d_over_m: f64,
}

/// A uniform code of 𝓗: independent uniform intersection heights.
pub fn sample_horizontal<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> PlaneCode {
    let heights: Vec<Vec<f64>> = (0..=dims.k)
        .map(|_| (0..dims.codim()).map(|_| rng.random::<f64>()).collect())
        .collect();
    PlaneCode::from_heights(dims, &heights).expect("dims are consistent")
}

/// Ratios over the supplied pairs. Pairs at code distance zero are skipped.
pub fn metric_equivalence(pairs: &[(PlaneCode, PlaneCode)]) -> Result<MetricEquivalenceReport> {
    let mut report = MetricEquivalenceReport {
        sample_size: 0,
        max_ratio_m_over_d: 0.0,
        max_ratio_d_over_m: 0.0,
    };
    for (p, q) in pairs {
        let d = metric_code(p, q)?;
        if d == 0.0 {
            continue;
        }
        let m = metric_natural(p, q)?;
        report.sample_size += 1;
        report.max_ratio_m_over_d = report.max_ratio_m_over_d.max(m / d);
        report.max_ratio_d_over_m = report.max_ratio_d_over_m.max(d / m);
    }
    Ok(report)
}

/// Renders one plane in the line format `n k a⁰… b¹… … bᵏ…`.
pub fn format_plane(code: &PlaneCode) -> String {
    let mut s = format!("{} {}", code.dims.n, code.dims.k);
    for x in code.flat() {
        let _ = write!(s, " {x:?}");
    }
    s
}

pub fn parse_plane(line: &str, line_no: usize) -> Result<PlaneCode> {
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let mut it = line.split_whitespace();
    let mut int = |name: &str| -> Result<usize> {
        it.next()
            .ok_or_else(|| err(format!("missing {name}")))?
            .parse::<usize>()
            .map_err(|e| err(format!("bad {name}: {e}")))
    };
    let n = int("n")?;
    let k = int("k")?;
    let dims = Dims::new(n, k)?;
    let xs = line
        .split_whitespace()
        .skip(2)
        .map(|tok| tok.parse::<f64>().map_err(|e| err(format!("bad number {tok:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if xs.len() != dims.code_len() {
        return Err(err(format!(
            "expected {} code coordinates, found {}",
            dims.code_len(),
            xs.len()
        )));
    }
    PlaneCode::from_flat(dims, &xs)
}

pub fn write_planes<W: Write>(mut w: W, codes: &[PlaneCode]) -> Result<()> {
    for c in codes {
        writeln!(w, "{}", format_plane(c))?;
    }
    Ok(())
}

/// Blank lines and lines starting with `#` are ignored.
pub fn read_planes<R: BufRead>(r: R) -> Result<Vec<PlaneCode>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(parse_plane(trimmed, i + 1)?);
    }
    Ok(out)
}
