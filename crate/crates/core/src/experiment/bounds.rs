//! Closed-form dimension bounds, generic over `f64` and exact rationals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_rational::Ratio;

use crate::error::{Error, Result};

pub trait Scalar:
    Copy
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_int(x: i64) -> Self;
    fn ceil(self) -> Self;
    fn to_f64(self) -> f64;

    fn lesser(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn greater(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_int(x: i64) -> Self {
        x as f64
    }

    fn ceil(self) -> Self {
        f64::ceil(self)
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for Ratio<i64> {
    fn from_int(x: i64) -> Self {
        Ratio::from_integer(x)
    }

    fn ceil(self) -> Self {
        Ratio::ceil(&self)
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

fn int<T: Scalar>(x: usize) -> T {
    T::from_int(x as i64)
}

fn check_family_dim<T: Scalar>(k: usize, n: usize, s: T) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidDims { n, k });
    }
    let top = int::<T>((k + 1) * (n - k));
    if s < T::from_int(0) || s > top {
        return Err(Error::InvalidParameter(format!(
            "s = {s:?} outside [0, {}]",
            (k + 1) * (n - k)
        )));
    }
    Ok(())
}

/// `α + (s − (k − ⌈α⌉)(n − k)) / (⌈α⌉ + 1)`
pub fn dimension_bound<T: Scalar>(alpha: T, k: usize, n: usize, s: T) -> Result<T> {
    check_family_dim(k, n, s)?;
    if alpha <= T::from_int(0) || alpha > int(k) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha:?} outside (0, {k}]")));
    }
    let m = alpha.ceil();
    let lost = (int::<T>(k) - m) * int(n - k);
    Ok(alpha + (s - lost) / (m + T::from_int(1)))
}

/// `max(min(s − k(n−k) + 2k, n), k + min(s, 1))`
pub fn f_bound<T: Scalar>(k: usize, n: usize, s: T) -> T {
    let kk = int::<T>(k);
    let upper = (s - int::<T>(k * (n - k)) + kk + kk).lesser(int(n));
    upper.greater(kk + s.lesser(T::from_int(1)))
}

/// `k + s/(k+1)`
pub fn g_bound<T: Scalar>(k: usize, s: T) -> T {
    int::<T>(k) + s / int(k + 1)
}

/// Dimension of the product construction for a family of dimension `s`.
pub fn h_construction<T: Scalar>(k: usize, s: T) -> T {
    let kk = int::<T>(k);
    let m = (s / int(k + 1)).ceil();
    if m >= (kk + s) / int(k + 1) {
        s - kk * m + kk + kk
    } else {
        kk + m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRow<T> {
    pub s: T,
    pub f: T,
    pub g: T,
    pub h: T,
}

pub fn bounds_table<T: Scalar>(k: usize, n: usize, s_grid: &[T]) -> Result<Vec<BoundsRow<T>>> {
    s_grid
        .iter()
        .map(|&s| {
            check_family_dim(k, n, s)?;
            Ok(BoundsRow {
                s,
                f: f_bound(k, n, s),
                g: g_bound(k, s),
                h: h_construction(k, s),
            })
        })
        .collect()
}

/// `0, step, 2·step, …` up to `(k+1)(n−k)` inclusive.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // the negated form also rejects NaN
pub fn s_grid(k: usize, n: usize, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step {step} must be positive")));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidDims { n, k });
    }
    let top = ((k + 1) * (n - k)) as f64;
    let count = (top / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|j| j as f64 * step).collect())
}

/// CSV with header `s,f,g,h` and six decimals.
pub fn bounds_csv<T: Scalar>(rows: &[BoundsRow<T>]) -> String {
    let mut out = String::from("s,f,g,h\n");
    for r in rows {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6}\n",
            r.s.to_f64(),
            r.f.to_f64(),
            r.g.to_f64(),
            r.h.to_f64()
        ));
    }
    out
}
