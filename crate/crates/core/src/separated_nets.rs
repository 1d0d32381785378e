//! δ-separated packings of plane codes and ε-nets of the planes through a
//! fixed tuple of cubes.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{code_distance, in_horizontal_family, plane_box_intersects, Dims, PlaneCode};
use crate::error::{check_len, Error, Result};
use crate::net_measure::{DyadicCube, FrostmanSample};
use crate::rng::trial_rng;
use crate::simplex::{
    basis_point, extend_with_basis, factorial, simplex_volume, solve_plane_through,
    InterpolationSystem,
};

/// Greedy in input order: a code is kept iff it is at distance `>= delta`
/// from everything kept so far. Returns the kept positions.
pub fn maximal_separated_subset(codes: &[PlaneCode], delta: f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for (i, c) in codes.iter().enumerate() {
        if kept.iter().all(|&j| code_distance(c, &codes[j]) >= delta) {
            kept.push(i);
        }
    }
    kept
}

/// Pairwise distances all at least `delta`.
pub fn is_separated(codes: &[PlaneCode], delta: f64) -> bool {
    codes
        .iter()
        .enumerate()
        .all(|(i, p)| codes[i + 1..].iter().all(|q| code_distance(p, q) >= delta))
}

/// Every code lies within `delta` of the packing.
pub fn is_maximal(codes: &[PlaneCode], packing: &[PlaneCode], delta: f64) -> bool {
    codes
        .iter()
        .all(|p| packing.iter().any(|q| code_distance(p, q) < delta))
}

/// `λ / (C δ^s)`
pub fn packing_lower_bound(mu: &FrostmanSample, qualifying_mass: f64, delta: f64) -> f64 {
    qualifying_mass / (mu.c * delta.powf(mu.s))
}

/// `(2δ)^{(k+1)(n−k)}`, the volume of a code-metric ball.
pub fn code_ball_measure(delta: f64, dims: Dims) -> f64 {
    (2.0 * delta).powi(dims.code_len() as i32)
}

/// `c₁ = (1 + k^{3/2})/2`: a plane of 𝓗 meeting a δ-cube passes within `c₁δ`
/// (per height coordinate) of the cube center over the center's projection.
pub fn height_constant(k: usize) -> f64 {
    (1.0 + (k as f64).powf(1.5)) / 2.0
}

/// `K_cov = c₁ (k+1) k^{k/2} (2√k)^{k−m} / m!`
pub fn covering_constant(dims: Dims, m: usize) -> f64 {
    let k = dims.k as f64;
    height_constant(dims.k) * (k + 1.0) * k.powf(k / 2.0) * (2.0 * k.sqrt()).powi((dims.k - m) as i32)
        / factorial(m)
}

/// The grid `U = δℤ ∩ [0,1]` along one axis.
pub fn grid_axis(delta: f64) -> Vec<f64> {
    let steps = (1.0 / delta + 1e-9).floor() as usize;
    (0..=steps).map(|j| j as f64 * delta).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetRequest {
    pub dims: Dims,
    pub m: usize,
    pub delta: f64,
    /// m+1 cube centers in `[0,1]ⁿ`.
    pub centers: Vec<Vec<f64>>,
    pub basis_indices: Vec<usize>,
}

impl NetRequest {
    /// Picks the basis indices by greedy extension of the projected centers.
    pub fn new(dims: Dims, delta: f64, centers: Vec<Vec<f64>>) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {delta} not in (0,1)")));
        }
        if centers.len() < 2 || centers.len() > dims.k + 1 {
            return Err(Error::InvalidParameter(format!(
                "need between 2 and k+1 = {} centers, got {}",
                dims.k + 1,
                centers.len()
            )));
        }
        for c in &centers {
            check_len(dims.n, c.len())?;
        }
        let m = centers.len() - 1;
        let req = Self {
            dims,
            m,
            delta,
            centers,
            basis_indices: Vec::new(),
        };
        let v = req.projected();
        let basis_indices = extend_with_basis(&v)?;
        Ok(Self { basis_indices, ..req })
    }

    /// The request for the closed cubes `cubes` (their centers, side as δ).
    pub fn from_cubes(dims: Dims, cubes: &[DyadicCube]) -> Result<Self> {
        let delta = cubes
            .first()
            .ok_or_else(|| Error::InvalidParameter("no cubes".into()))?
            .side();
        Self::new(dims, delta, cubes.iter().map(DyadicCube::center).collect())
    }

    /// `v_r = proj₀ c_r`, the first k coordinates.
    pub fn projected(&self) -> Vec<Vec<f64>> {
        self.centers.iter().map(|c| c[..self.dims.k].to_vec()).collect()
    }

    /// Vertical parts `w^r` of the centers.
    pub fn heights(&self) -> Vec<Vec<f64>> {
        self.centers.iter().map(|c| c[self.dims.k..].to_vec()).collect()
    }

    /// m-volume of `Δ(v₀…v_m)`.
    pub fn simplex_volume(&self) -> f64 {
        simplex_volume(&self.projected())
    }

    pub fn cubes(&self) -> Vec<(Vec<f64>, f64)> {
        self.centers
            .iter()
            .map(|c| (c.iter().map(|x| x - self.delta / 2.0).collect(), self.delta))
            .collect()
    }

    /// `s⁰…sᵏ`: the projected centers followed by the chosen basis points.
    pub fn interpolation_system(&self) -> Result<InterpolationSystem> {
        let mut s = self.projected();
        s.extend(self.basis_indices.iter().map(|&i| basis_point(self.dims.k, i)));
        InterpolationSystem::new(s)
    }

    pub fn claimed_radius(&self) -> f64 {
        covering_constant(self.dims, self.m) * self.delta / self.simplex_volume()
    }

    fn cube_contains(&self, r: usize, p: &[f64]) -> bool {
        let h = self.delta / 2.0;
        self.centers[r]
            .iter()
            .zip(p)
            .all(|(&c, &x)| x >= c - h - 1e-12 && x <= c + h + 1e-12)
    }

    /// Closed-box test of `code` against every request cube.
    pub fn meets_all_cubes(&self, code: &PlaneCode) -> bool {
        (0..=self.m).all(|r| {
            let cube = self.cube_as_dyadic(r);
            match cube {
                Some(c) => plane_box_intersects(code, &c),
                None => self.meets_box(code, r),
            }
        })
    }

    /// The r-th cube as a dyadic cube when its center and side are dyadic.
    fn cube_as_dyadic(&self, r: usize) -> Option<DyadicCube> {
        let level = (-self.delta.log2()).round();
        if level < 0.0 || (2f64.powf(-level) - self.delta).abs() > 1e-15 {
            return None;
        }
        let index: Vec<i64> = self.centers[r]
            .iter()
            .map(|&c| (c / self.delta - 0.5).round() as i64)
            .collect();
        let cube = DyadicCube::new(level as u32, index);
        let ok = cube
            .center()
            .iter()
            .zip(&self.centers[r])
            .all(|(a, b)| (a - b).abs() < 1e-12);
        ok.then_some(cube)
    }

    fn meets_box(&self, code: &PlaneCode, r: usize) -> bool {
        use crate::feasibility::System;
        let k = self.dims.k;
        let h = self.delta / 2.0;
        let c = &self.centers[r];
        let mut sys = System::new(k);
        for (i, ci) in c[..k].iter().enumerate() {
            sys.bound_var(i, ci - h, ci + h);
        }
        let mut coeffs = vec![0.0; k];
        for j in 0..self.dims.codim() {
            for (i, x) in coeffs.iter_mut().enumerate() {
                *x = code.b[i][j];
            }
            sys.bound_affine(&coeffs, code.a0[j], c[k + j] - h, c[k + j] + h);
        }
        sys.is_feasible()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetFamily {
    pub codes: Vec<PlaneCode>,
    pub grid_step: f64,
    pub claimed_radius: f64,
}

impl NetFamily {
    pub fn cardinality(&self) -> usize {
        self.codes.len()
    }

    /// Distance from `code` to the nearest member.
    pub fn distance_to(&self, code: &PlaneCode) -> f64 {
        self.codes
            .iter()
            .map(|c| code_distance(c, code))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn outside_horizontal(&self) -> usize {
        self.codes.iter().filter(|c| !in_horizontal_family(c)).count()
    }
}

/// `(⌊1/δ⌋+1)^{(n−k)(k−m)}`
pub fn net_cardinality(dims: Dims, m: usize, delta: f64) -> usize {
    grid_axis(delta).len().pow((dims.codim() * (dims.k - m)) as u32)
}

/// One plane through `c₀…c_m` and `(e_ω, u^ω)` for every grid tuple.
pub fn build_epsilon_net(req: &NetRequest) -> Result<NetFamily> {
    let sys = req.interpolation_system()?;
    let axis = grid_axis(req.delta);
    let free = req.dims.codim() * (req.dims.k - req.m);
    let total = net_cardinality(req.dims, req.m, req.delta);
    let fixed = req.heights();
    let codes = (0..total)
        .into_par_iter()
        .map(|mut t| {
            let mut coords = Vec::with_capacity(free);
            for _ in 0..free {
                coords.push(axis[t % axis.len()]);
                t /= axis.len();
            }
            coords.reverse();
            let mut heights = fixed.clone();
            heights.extend(coords.chunks(req.dims.codim()).map(<[f64]>::to_vec));
            solve_plane_through(&sys, req.dims, &heights)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NetFamily {
        codes,
        grid_step: req.delta,
        claimed_radius: req.claimed_radius(),
    })
}

/// Draws a plane of 𝓗 meeting every request cube: one anchor in each cube,
/// random heights over the basis points, solve, reject if outside 𝓗.
pub fn sample_qualifying_plane<R: Rng + ?Sized>(
    req: &NetRequest,
    rng: &mut R,
    max_attempts: usize,
) -> Result<PlaneCode> {
    let k = req.dims.k;
    let cubes = req.cubes();
    for _ in 0..max_attempts {
        let anchors: Vec<Vec<f64>> = cubes
            .iter()
            .map(|(lo, side)| lo.iter().map(|&l| l + side * rng.random::<f64>()).collect())
            .collect();
        let mut s: Vec<Vec<f64>> = anchors.iter().map(|a| a[..k].to_vec()).collect();
        let mut heights: Vec<Vec<f64>> = anchors.iter().map(|a| a[k..].to_vec()).collect();
        for &i in &req.basis_indices {
            s.push(basis_point(k, i));
            heights.push((0..req.dims.codim()).map(|_| rng.random::<f64>()).collect());
        }
        let Ok(sys) = InterpolationSystem::new(s) else {
            continue;
        };
        let Ok(code) = solve_plane_through(&sys, req.dims, &heights) else {
            continue;
        };
        if in_horizontal_family(&code) && anchors.iter().enumerate().all(|(r, a)| req.cube_contains(r, a)) {
            return Ok(code);
        }
    }
    Err(Error::NoQualifyingPlane {
        attempts: max_attempts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub trials: usize,
    pub empirical_radius: f64,
    pub claimed_radius: f64,
    /// Sampled planes that failed the closed-box test (expected 0).
    pub off_cube_samples: usize,
}

impl CoveringReport {
    pub fn holds(&self) -> bool {
        self.empirical_radius <= self.claimed_radius && self.off_cube_samples == 0
    }
}

/// Largest distance from a sampled qualifying plane to the net.
pub fn covering_radius_check(
    net: &NetFamily,
    req: &NetRequest,
    trials: usize,
    seed: u64,
) -> Result<CoveringReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let p = sample_qualifying_plane(req, &mut rng, 100_000)?;
            Ok((net.distance_to(&p), req.meets_all_cubes(&p)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoveringReport {
        trials,
        empirical_radius: results.iter().map(|r| r.0).fold(0.0, f64::max),
        claimed_radius: net.claimed_radius,
        off_cube_samples: results.iter().filter(|r| !r.1).count(),
    })
}

/// JSON sidecar written next to a net's plane file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSidecar {
    pub delta: f64,
    pub m: usize,
    pub centers: Vec<Vec<f64>>,
    pub basis_indices: Vec<usize>,
    pub claimed_radius: f64,
    pub cardinality: usize,
}

impl NetSidecar {
    pub fn new(req: &NetRequest, net: &NetFamily) -> Self {
        Self {
            delta: req.delta,
            m: req.m,
            centers: req.centers.clone(),
            basis_indices: req.basis_indices.clone(),
            claimed_radius: net.claimed_radius,
            cardinality: net.cardinality(),
        }
    }
}
