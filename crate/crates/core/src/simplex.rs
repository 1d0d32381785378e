//! Simplex volumes, distances to affine hulls, the volume and perturbation
//! estimates, and the Cramer-rule plane solver.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::affine::{Dims, PlaneCode};
use crate::error::{check_len, Error, Result};

/// Below this a Gram–Schmidt residual is treated as zero.
const RANK_TOL: f64 = 1e-12;

/// Corner enumeration in [`perturbation_check`] stops above this many tuples.
const MAX_CORNER_TUPLES: usize = 1 << 16;

pub fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

pub fn determinant(m: &DMatrix<f64>) -> f64 {
    m.clone().determinant()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    pub vertices: Vec<Vec<f64>>,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(first) = vertices.first() {
            for v in &vertices {
                check_len(first.len(), v.len())?;
            }
        }
        Ok(Self { vertices })
    }

    /// m, one less than the vertex count.
    pub fn dim(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn volume(&self) -> f64 {
        simplex_volume(&self.vertices)
    }
}

/// m-dimensional volume of the hull of `vertices` (m+1 points):
/// `sqrt(det Gram(z₁−z₀,…,z_m−z₀)) / m!`.
pub fn simplex_volume(vertices: &[Vec<f64>]) -> f64 {
    let Some((z0, rest)) = vertices.split_first() else {
        return 0.0;
    };
    let m = rest.len();
    if m == 0 {
        return 1.0;
    }
    if m > z0.len() {
        return 0.0;
    }
    let edges: Vec<Vec<f64>> = rest
        .iter()
        .map(|z| z.iter().zip(z0).map(|(a, b)| a - b).collect())
        .collect();
    let gram = DMatrix::from_fn(m, m, |i, j| dot(&edges[i], &edges[j]));
    let det = determinant(&gram).max(0.0);
    det.sqrt() / factorial(m)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Orthonormal basis of the span of `vectors`, dropping dependent ones.
fn orthonormal_basis(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = dot(v, v).sqrt();
        let mut w = v.clone();
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm > RANK_TOL * scale.max(1.0) {
            basis.push(w.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// Euclidean distance from `p` to the affine span of `hull`.
pub fn dist_to_affine_hull(p: &[f64], hull: &[Vec<f64>]) -> Result<f64> {
    let Some((h0, rest)) = hull.split_first() else {
        return Err(Error::InvalidParameter("empty hull".into()));
    };
    check_len(h0.len(), p.len())?;
    let dirs: Vec<Vec<f64>> = rest.iter().map(|h| sub(h, h0)).collect();
    let basis = orthonormal_basis(&dirs);
    let mut w = sub(p, h0);
    for _ in 0..2 {
        for q in &basis {
            let c = dot(&w, q);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
    }
    Ok(dot(&w, &w).sqrt())
}

/// Closed axis-parallel cube `Π [lo_i, lo_i + side]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisCube {
    pub lo: Vec<f64>,
    pub side: f64,
}

impl AxisCube {
    pub fn new(lo: Vec<f64>, side: f64) -> Self {
        Self { lo, side }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.lo.len()
            && p
                .iter()
                .zip(&self.lo)
                .all(|(&x, &l)| x >= l - RANK_TOL && x <= l + self.side + RANK_TOL)
    }

    fn corner(&self, mask: usize) -> Vec<f64> {
        self.lo
            .iter()
            .enumerate()
            .map(|(i, &l)| if mask >> i & 1 == 1 { l + self.side } else { l })
            .collect()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo.iter().map(|&l| l + self.side * rng.random::<f64>()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCertificate {
    pub m: usize,
    pub k: usize,
    pub side: f64,
    pub f_x: f64,
    /// `f_x / 2^{m+1}`
    pub required: f64,
    pub min_volume: f64,
    pub corner_tuples: usize,
    pub sampled_tuples: usize,
}

/// Checks that every choice of one point per cube spans volume at least
/// `f_x / 2^{m+1}`, over all corner tuples and `samples` random tuples.
pub fn perturbation_check<R: Rng + ?Sized>(
    cubes: &[AxisCube],
    witnesses: &[Vec<f64>],
    f_x: f64,
    samples: usize,
    rng: &mut R,
) -> Result<PerturbationCertificate> {
    if cubes.len() < 2 {
        return Err(Error::InvalidParameter("need at least two cubes".into()));
    }
    check_len(cubes.len(), witnesses.len())?;
    let m = cubes.len() - 1;
    let k = cubes[0].lo.len();
    let x = cubes[0].side;
    for c in cubes {
        check_len(k, c.lo.len())?;
        if (c.side - x).abs() > RANK_TOL {
            return Err(Error::InvalidParameter("cubes must share one side length".into()));
        }
    }
    let admissible = m as f64 / (2f64.powi(m as i32 + 1) * k as f64) * f_x;
    if x > admissible {
        return Err(Error::Hypothesis(format!(
            "side {x} exceeds m/(2^(m+1) k) f = {admissible}"
        )));
    }
    for (i, (c, w)) in cubes.iter().zip(witnesses).enumerate() {
        if !c.contains(w) {
            return Err(Error::Hypothesis(format!("witness {i} lies outside its cube")));
        }
    }
    let witness_volume = simplex_volume(witnesses);
    if witness_volume < f_x {
        return Err(Error::Hypothesis(format!(
            "witness volume {witness_volume} below f = {f_x}"
        )));
    }

    let required = f_x / 2f64.powi(m as i32 + 1);
    let mut min_volume = f64::INFINITY;
    let per_cube = 1usize << k;
    let corner_tuples = per_cube
        .checked_pow(m as u32 + 1)
        .filter(|&c| c <= MAX_CORNER_TUPLES)
        .unwrap_or(0);
    let mut tuple = vec![Vec::new(); m + 1];
    for code in 0..corner_tuples {
        let mut rest = code;
        for (slot, c) in tuple.iter_mut().zip(cubes) {
            *slot = c.corner(rest % per_cube);
            rest /= per_cube;
        }
        min_volume = min_volume.min(simplex_volume(&tuple));
    }
    for _ in 0..samples {
        for (slot, c) in tuple.iter_mut().zip(cubes) {
            *slot = c.sample(rng);
        }
        min_volume = min_volume.min(simplex_volume(&tuple));
    }
    if min_volume < required {
        return Err(Error::Counterexample {
            volume: min_volume,
            required,
        });
    }
    Ok(PerturbationCertificate {
        m,
        k,
        side: x,
        f_x,
        required,
        min_volume,
        corner_tuples,
        sampled_tuples: samples,
    })
}

/// `e_0 = 0`, `e_i` the i-th unit vector of ℝᵏ.
pub fn basis_point(k: usize, index: usize) -> Vec<f64> {
    let mut e = vec![0.0; k];
    if index > 0 {
        e[index - 1] = 1.0;
    }
    e
}

/// Greedily appends the farthest of `e_0, …, e_k` from the current hull
/// until the simplex is k-dimensional. Ties go to the smallest index.
pub fn extend_with_basis(v: &[Vec<f64>]) -> Result<Vec<usize>> {
    let Some(first) = v.first() else {
        return Err(Error::Degenerate("no vertices".into()));
    };
    let k = first.len();
    let m = v.len() - 1;
    if m > k {
        return Err(Error::Degenerate(format!("{} points in dimension {k}", v.len())));
    }
    if m == 0 || simplex_volume(v) <= 0.0 {
        return Err(Error::Degenerate("input simplex has zero volume".into()));
    }
    let mut hull = v.to_vec();
    let mut picked = Vec::with_capacity(k - m);
    for _ in m..k {
        let mut best = (0usize, f64::NEG_INFINITY);
        for idx in 0..=k {
            let d = dist_to_affine_hull(&basis_point(k, idx), &hull)?;
            if d > best.1 {
                best = (idx, d);
            }
        }
        picked.push(best.0);
        hull.push(basis_point(k, best.0));
    }
    Ok(picked)
}

/// Lower bound on the k-volume after extension:
/// `a · (1/(2√k))^{k−m} · m!/k!`.
pub fn extension_volume_bound(a: f64, k: usize, m: usize) -> f64 {
    a * (1.0 / (2.0 * (k as f64).sqrt())).powi((k - m) as i32) * factorial(m) / factorial(k)
}

/// The k+1 points `s⁰…sᵏ ∈ [0,1]ᵏ` and the matrix with rows `(1, sⁱ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationSystem {
    pub s_points: Vec<Vec<f64>>,
    pub matrix: DMatrix<f64>,
}

impl InterpolationSystem {
    pub fn new(s_points: Vec<Vec<f64>>) -> Result<Self> {
        let k = s_points.len().saturating_sub(1);
        if k == 0 {
            return Err(Error::InvalidParameter("need k+1 >= 2 points".into()));
        }
        for s in &s_points {
            check_len(k, s.len())?;
        }
        let matrix = DMatrix::from_fn(k + 1, k + 1, |i, j| {
            if j == 0 {
                1.0
            } else {
                s_points[i][j - 1]
            }
        });
        Ok(Self { s_points, matrix })
    }

    pub fn k(&self) -> usize {
        self.s_points.len() - 1
    }

    pub fn det(&self) -> f64 {
        determinant(&self.matrix)
    }

    fn nonsingular_det(&self) -> Result<f64> {
        let det = self.det();
        // |det M| = k! Vol, compare against the same quantity computed by Gram.
        let scale = factorial(self.k()) * simplex_volume(&self.s_points);
        if det.abs() <= 1e-14 || scale <= 1e-14 {
            return Err(Error::Singular { det });
        }
        Ok(det)
    }
}

/// The plane with `g_P(sⁱ) = pⁱ`, by Cramer's rule one height coordinate at a time.
pub fn solve_plane_through(
    sys: &InterpolationSystem,
    dims: Dims,
    heights: &[Vec<f64>],
) -> Result<PlaneCode> {
    let k = sys.k();
    check_len(dims.k, k)?;
    check_len(k + 1, heights.len())?;
    for h in heights {
        check_len(dims.codim(), h.len())?;
    }
    let det = sys.nonsingular_det()?;
    let mut a0 = vec![0.0; dims.codim()];
    let mut b = vec![vec![0.0; dims.codim()]; k];
    for j in 0..dims.codim() {
        for col in 0..=k {
            let mut mj = sys.matrix.clone();
            for (row, h) in heights.iter().enumerate() {
                mj[(row, col)] = h[j];
            }
            let y = determinant(&mj) / det;
            if col == 0 {
                a0[j] = y;
            } else {
                b[col - 1][j] = y;
            }
        }
    }
    PlaneCode::new(dims, a0, b)
}

/// `δ̃ (k+1) k^{k/2} / |det M|`, where `|det M| = k! Vol(Δ(s⁰…sᵏ))`.
pub fn rigidity_bound(sys: &InterpolationSystem, height_perturbation: f64) -> Result<f64> {
    let k = sys.k() as f64;
    let det = sys.nonsingular_det()?;
    Ok(height_perturbation * (k + 1.0) * k.powf(k / 2.0) / det.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{metric_code, point_on_plane};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Volume from pairwise squared distances alone.
    fn cayley_menger_volume(vertices: &[Vec<f64>]) -> f64 {
        let m = vertices.len() - 1;
        let size = m + 2;
        let cm = DMatrix::from_fn(size, size, |i, j| match (i, j) {
            (0, 0) => 0.0,
            (0, _) | (_, 0) => 1.0,
            _ => {
                let d = sub(&vertices[i - 1], &vertices[j - 1]);
                dot(&d, &d)
            }
        });
        let sign = if (m + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        let scale = 2f64.powi(m as i32) * factorial(m).powi(2);
        (sign * cm.determinant() / scale).max(0.0).sqrt()
    }

    #[test]
    fn volume_examples() {
        assert_abs_diff_eq!(simplex_volume(&[vec![0.0], vec![1.0]]), 1.0);
        assert_abs_diff_eq!(
            simplex_volume(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            simplex_volume(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]),
            0.0,
            epsilon = 1e-15
        );
        let tet = [
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert_abs_diff_eq!(simplex_volume(&tet), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cayley_menger_volume(&tet), 1.0 / 6.0, epsilon = 1e-12);
        let s = Simplex::new(tet.to_vec()).unwrap();
        assert_eq!(s.dim(), 3);
        assert!(Simplex::new(vec![vec![0.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn hull_distance_examples() {
        let hull = [vec![0.0, 0.0], vec![1.0, 0.0]];
        assert_abs_diff_eq!(dist_to_affine_hull(&[0.0, 1.0], &hull).unwrap(), 1.0);
        assert_abs_diff_eq!(dist_to_affine_hull(&[0.3, 0.0], &hull).unwrap(), 0.0);
        assert_abs_diff_eq!(dist_to_affine_hull(&[1.0, 1.0], &hull).unwrap(), 1.0);
        assert_abs_diff_eq!(dist_to_affine_hull(&[3.0, 4.0], &[vec![0.0, 0.0]]).unwrap(), 5.0);
        assert!(dist_to_affine_hull(&[1.0], &[]).is_err());
    }

    #[test]
    fn perturbation_segment_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = 1.0 / 8.0;
        let cubes = [AxisCube::new(vec![0.0], x), AxisCube::new(vec![1.0 - x], x)];
        let cert = perturbation_check(&cubes, &[vec![0.0], vec![1.0]], 1.0, 100, &mut rng).unwrap();
        assert_abs_diff_eq!(cert.min_volume, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(cert.required, 0.25);
        assert_eq!(cert.corner_tuples, 4);
    }

    #[test]
    fn perturbation_hypothesis_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = 0.3;
        let cubes = [AxisCube::new(vec![0.0], x), AxisCube::new(vec![0.7], x)];
        let r = perturbation_check(&cubes, &[vec![0.0], vec![1.0]], 1.0, 10, &mut rng);
        assert!(matches!(r, Err(Error::Hypothesis(_))));
        let x = 1.0 / 8.0;
        let cubes = [AxisCube::new(vec![0.0], x), AxisCube::new(vec![0.5], x)];
        let r = perturbation_check(&cubes, &[vec![0.0], vec![0.5]], 1.0, 10, &mut rng);
        assert!(matches!(r, Err(Error::Hypothesis(_))));
    }

    #[test]
    fn basis_extension_examples() {
        let idx = extend_with_basis(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(idx, vec![2]);
        let mut pts = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        pts.push(basis_point(2, idx[0]));
        let vol = simplex_volume(&pts);
        assert_abs_diff_eq!(vol, 0.5);
        assert!(vol >= extension_volume_bound(1.0, 2, 1));

        assert!(extend_with_basis(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap()
            .is_empty());

        // k = 3, m = 1 along e₁: e₂ first (ties with e₃), then e₃.
        let v = [vec![0.0; 3], vec![1.0, 0.0, 0.0]];
        let idx = extend_with_basis(&v).unwrap();
        assert_eq!(idx, vec![2, 3]);
        let mut pts = v.to_vec();
        pts.extend(idx.iter().map(|&i| basis_point(3, i)));
        assert_abs_diff_eq!(simplex_volume(&pts), 1.0 / 6.0, epsilon = 1e-15);
        assert!(1.0 / 6.0 >= extension_volume_bound(1.0, 3, 1));

        assert!(extend_with_basis(&[vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn cramer_examples() {
        let d21 = Dims::new(2, 1).unwrap();
        let sys = InterpolationSystem::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let c = solve_plane_through(&sys, d21, &[vec![0.3], vec![0.8]]).unwrap();
        assert_abs_diff_eq!(c.a0[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(c.b[0][0], 0.5, epsilon = 1e-15);

        let d32 = Dims::new(3, 2).unwrap();
        let sys = InterpolationSystem::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap();
        assert_abs_diff_eq!(sys.det(), 1.0, epsilon = 1e-15);
        let c = solve_plane_through(&sys, d32, &[vec![0.2], vec![0.5], vec![0.9]]).unwrap();
        assert_abs_diff_eq!(c.a0[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(c.b[0][0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(c.b[1][0], 0.7, epsilon = 1e-15);

        let flat = InterpolationSystem::new(vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![1.0, 1.0]])
            .unwrap();
        assert!(matches!(
            solve_plane_through(&flat, d32, &[vec![0.0], vec![0.0], vec![0.0]]),
            Err(Error::Singular { .. })
        ));
        assert!(rigidity_bound(&flat, 0.1).is_err());
    }

    /// Largest code change over all ±δ̃ corner perturbations of the heights.
    fn corner_oracle(sys: &InterpolationSystem, dims: Dims, heights: &[Vec<f64>], dt: f64) -> f64 {
        let base = solve_plane_through(sys, dims, heights).unwrap();
        let slots = heights.len() * dims.codim();
        let mut worst = 0.0f64;
        for mask in 0..(1usize << slots) {
            let moved: Vec<Vec<f64>> = heights
                .iter()
                .enumerate()
                .map(|(i, h)| {
                    h.iter()
                        .enumerate()
                        .map(|(j, &y)| {
                            let bit = mask >> (i * dims.codim() + j) & 1;
                            if bit == 1 { y + dt } else { y - dt }
                        })
                        .collect()
                })
                .collect();
            let q = solve_plane_through(sys, dims, &moved).unwrap();
            worst = worst.max(metric_code(&base, &q).unwrap());
        }
        worst
    }

    #[test]
    fn rigidity_examples() {
        let d21 = Dims::new(2, 1).unwrap();
        let sys = InterpolationSystem::new(vec![vec![0.0], vec![1.0]]).unwrap();
        assert_abs_diff_eq!(rigidity_bound(&sys, 0.1).unwrap(), 0.2, epsilon = 1e-15);
        assert_eq!(rigidity_bound(&sys, 0.0).unwrap(), 0.0);
        let worst = corner_oracle(&sys, d21, &[vec![0.3], vec![0.8]], 0.1);
        assert_abs_diff_eq!(worst, 0.2, epsilon = 1e-12);

        let d32 = Dims::new(3, 2).unwrap();
        let sys = InterpolationSystem::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap();
        assert_abs_diff_eq!(rigidity_bound(&sys, 0.01).unwrap(), 0.06, epsilon = 1e-15);
        let worst = corner_oracle(&sys, d32, &[vec![0.2], vec![0.5], vec![0.9]], 0.01);
        assert!(worst <= 0.06 + 1e-12);
    }

    fn random_points(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
            .collect()
    }

    #[test]
    fn cayley_menger_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..1000 {
            let m = 1 + trial % 4;
            let ambient = m + rng.random_range(0..3);
            let v = random_points(&mut rng, m + 1, ambient);
            let a = simplex_volume(&v);
            let b = cayley_menger_volume(&v);
            assert!((a - b).abs() <= 1e-10, "m={m}: {a} vs {b}");
        }
    }

    #[test]
    fn hull_distance_volume_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..1000 {
            let m = 1 + trial % 3;
            let v = random_points(&mut rng, m + 2, m + 2);
            let (hull, p) = v.split_at(m + 1);
            let lhs = dist_to_affine_hull(&p[0], hull).unwrap() * simplex_volume(hull)
                / (m as f64 + 1.0);
            assert!((lhs - simplex_volume(&v)).abs() <= 1e-10);
        }
    }

    proptest! {
        #[test]
        fn solve_then_evaluate(k in 1usize..4, extra in 1usize..3, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dims = Dims::new(k + extra, k).unwrap();
            let s = random_points(&mut rng, k + 1, k);
            prop_assume!(factorial(k) * simplex_volume(&s) > 1e-3);
            let heights = random_points(&mut rng, k + 1, extra);
            let sys = InterpolationSystem::new(s.clone()).unwrap();
            let code = solve_plane_through(&sys, dims, &heights).unwrap();
            for (si, hi) in s.iter().zip(&heights) {
                let p = point_on_plane(&code, si).unwrap();
                for (a, b) in p[k..].iter().zip(hi) {
                    prop_assert!((a - b).abs() <= 1e-10);
                }
            }
        }

        #[test]
        fn det_matches_volume(k in 1usize..5, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_points(&mut rng, k + 1, k);
            let sys = InterpolationSystem::new(s.clone()).unwrap();
            prop_assert!((sys.det().abs() - factorial(k) * simplex_volume(&s)).abs() <= 1e-10);
        }
    }
}
