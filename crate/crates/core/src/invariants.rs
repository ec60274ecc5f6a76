//! Fibered rotation number, Lyapunov exponent and Oseledec directions by
//! Birkhoff averages along orbits.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{degree, unwrapped_polar_angles, QpCocycle, Sl2Map};
use crate::config::TOL;
use crate::error::{Error, Result};
use crate::sl2_geometry::Mat2R;

/// Continuous polar angle of a matrix path tabulated on equispaced nodes of
/// `[lo, lo + n·step]`. Points outside the table are read periodically when
/// a period is set and clamped otherwise.
#[derive(Debug, Clone)]
pub struct AngleTable {
    lo: f64,
    step: f64,
    period: Option<f64>,
    phi: Vec<f64>,
}

impl AngleTable {
    /// Table over one period of a periodic map, from its grid samples.
    pub fn periodic(map: &Sl2Map) -> Result<Self> {
        let phi = unwrapped_polar_angles(map)?;
        let step = map.period() / map.grid_len() as f64;
        Ok(AngleTable { lo: 0.0, step, period: Some(map.period()), phi })
    }

    /// Table of `f` on `n + 1` nodes spanning `[lo, hi]`.
    pub fn on_interval(f: &(dyn Fn(f64) -> Mat2R + Sync), lo: f64, hi: f64, n: usize) -> Result<Self> {
        let step = (hi - lo) / n as f64;
        let raw: Vec<f64> = (0..=n).into_par_iter().map(|j| f(lo + j as f64 * step).polar_angle()).collect();
        let mut phi = Vec::with_capacity(n + 1);
        phi.push(raw[0]);
        for j in 1..=n {
            let inc = (raw[j] - raw[j - 1] + PI).rem_euclid(2.0 * PI) - PI;
            if inc.abs() > PI / 2.0 {
                return Err(Error::GridTooCoarse { node: j, increment: inc / (2.0 * PI) });
            }
            phi.push(phi[j - 1] + inc);
        }
        Ok(AngleTable { lo, step, period: None, phi })
    }

    /// Read the table periodically with the given period.
    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }

    pub fn angles(&self) -> &[f64] {
        &self.phi
    }

    /// Interpolated table value at `t`.
    pub fn guess(&self, t: f64) -> f64 {
        let n = self.phi.len() - 1;
        let s = match self.period {
            Some(p) => ((t - self.lo) / p).rem_euclid(1.0) * n as f64,
            None => ((t - self.lo) / self.step).clamp(0.0, n as f64),
        };
        let j = (s.floor() as usize).min(n - 1);
        let w = s - j as f64;
        self.phi[j] * (1.0 - w) + self.phi[j + 1] * w
    }

    /// The representative of `raw` (mod 2π) closest to the table at `t`.
    pub fn branch(&self, raw: f64, t: f64) -> f64 {
        let guess = self.guess(t);
        raw + 2.0 * PI * ((guess - raw) / (2.0 * PI)).round()
    }
}

/// Continuous lift of the projective action of a degree-zero map.
///
/// The rotation part of `A(θ) = R_{φ(θ)}S(θ)` is tabulated as a continuous
/// angle on the grid; at an arbitrary `θ` the exact polar angle is placed on
/// the branch closest to the interpolated table value. The symmetric factor
/// moves every direction by less than a quarter turn, so the total
/// displacement is continuous in `(θ, x)`.
#[derive(Debug, Clone)]
pub struct Lift {
    table: AngleTable,
}

impl Lift {
    pub fn new(map: &Sl2Map) -> Result<Self> {
        let deg = degree(map)?;
        if deg != 0 {
            return Err(Error::NonzeroDegree { degree: deg });
        }
        Ok(Lift { table: AngleTable::periodic(map)? })
    }

    /// Lift from an angle table; the caller is responsible for the degree.
    pub fn from_table(table: AngleTable) -> Self {
        Lift { table }
    }

    /// Continuous rotation angle (radians) of `a = A(θ)`.
    pub fn rotation_angle(&self, a: &Mat2R, theta: f64) -> f64 {
        self.table.branch(a.polar_angle(), theta)
    }

    /// Lifted displacement `f(θ, x)` in turns of the vector at angle `2πx`,
    /// together with the image angle.
    pub fn displacement(&self, a: &Mat2R, theta: f64, x: f64) -> (f64, f64) {
        let phi = self.rotation_angle(a, theta);
        let v = [(2.0 * PI * x).cos(), (2.0 * PI * x).sin()];
        let w = a.apply(v);
        let new_x = w[1].atan2(w[0]) / (2.0 * PI);
        let sym = (new_x - x - phi / (2.0 * PI) + 0.5).rem_euclid(1.0) - 0.5;
        (phi / (2.0 * PI) + sym, new_x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationNumberResult {
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// `(1/n)·Σ f(F̃^k(θ₀, x₀)) mod 1` with a dyadic-window residual.
pub fn fibered_rotation_number(c: &QpCocycle, n: usize, theta0: f64, x0: f64) -> Result<RotationNumberResult> {
    let lift = Lift::new(&c.map)?;
    Ok(rotation_with_lift(c, &lift, n, theta0, x0))
}

pub fn rotation_with_lift(c: &QpCocycle, lift: &Lift, n: usize, theta0: f64, x0: f64) -> RotationNumberResult {
    let period = c.map.period();
    rotation_of_path(&|t| c.eval(t), c.alpha, period, lift, n, theta0, x0)
}

/// Rotation number of `(α, f)` for a `period`-periodic path given by a
/// closure, with the lift supplied by the caller.
pub fn rotation_of_path(
    f: &dyn Fn(f64) -> Mat2R,
    alpha: f64,
    period: f64,
    lift: &Lift,
    n: usize,
    theta0: f64,
    x0: f64,
) -> RotationNumberResult {
    let mut total = 0.0;
    let (mut theta, mut x) = (theta0, x0);
    let (q1, q2) = (n / 4, n / 2);
    let (mut s1, mut s2) = (0.0, 0.0);
    for k in 0..n {
        if k == q1 {
            s1 = total;
        }
        if k == q2 {
            s2 = total;
        }
        let a = f(theta);
        let (d, nx) = lift.displacement(&a, theta, x);
        total += d;
        x = nx;
        theta = (theta0 + (k + 1) as f64 * alpha).rem_euclid(period);
    }
    let late = (total - s2) / (n - q2) as f64;
    let early = (s2 - s1) / (q2 - q1).max(1) as f64;
    RotationNumberResult { value: (total / n as f64).rem_euclid(1.0), iterations: n, residual: (late - early).abs() }
}

pub fn rotation_distance(a: f64, b: f64) -> f64 {
    circle_dist(a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovResult {
    pub value: f64,
    pub mean: f64,
    pub median: f64,
    pub backward: f64,
    pub residual: f64,
    pub per_sample: Vec<f64>,
    pub n: usize,
}

fn growth_rate(c: &QpCocycle, theta: f64, n: usize, burn_in: usize) -> f64 {
    let mut v = [0.6, 0.8];
    let mut acc = 0.0;
    let mut t = theta;
    for k in 0..burn_in + n {
        let w = c.eval(t).apply(v);
        let r = w[0].hypot(w[1]);
        if k >= burn_in {
            acc += r.ln();
        }
        v = [w[0] / r, w[1] / r];
        t = (theta + (k + 1) as f64 * c.alpha).rem_euclid(c.map.period());
    }
    acc / n as f64
}

pub fn burn_in(n: usize) -> usize {
    (n / 10).max(100)
}

/// Average of `(1/n)·log‖A_n(θ)v‖` over equidistributed `θ` samples, using
/// per-step renormalization after a discarded transient.
pub fn lyapunov_exponent(c: &QpCocycle, n: usize, samples: usize) -> LyapunovResult {
    let samples = samples.max(1);
    let b = burn_in(n);
    let inv = c.inverse_cocycle();
    let period = c.map.period();
    let thetas: Vec<f64> = (0..samples).map(|j| period * (j as f64 + 0.5) / samples as f64).collect();
    let fwd: Vec<f64> = thetas.par_iter().map(|&t| growth_rate(c, t, n, b)).collect();
    let bwd: Vec<f64> = thetas.par_iter().map(|&t| growth_rate(&inv, t, n, b)).collect();
    let mean = fwd.iter().sum::<f64>() / samples as f64;
    let backward = bwd.iter().sum::<f64>() / samples as f64;
    let mut sorted = fwd.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if samples % 2 == 1 {
        sorted[samples / 2]
    } else {
        0.5 * (sorted[samples / 2 - 1] + sorted[samples / 2])
    };
    LyapunovResult {
        value: mean.max(0.0),
        mean,
        median,
        backward,
        residual: (mean - backward).abs(),
        per_sample: fwd,
        n,
    }
}

/// Direction in the projective line, stored as a unit vector.
pub type Direction = [f64; 2];

/// `|sin|` of the angle between two directions.
pub fn projective_distance(u: Direction, v: Direction) -> f64 {
    let nu = u[0].hypot(u[1]);
    let nv = v[0].hypot(v[1]);
    (u[0] * v[1] - u[1] * v[0]).abs() / (nu * nv)
}

fn normalized_product(c: &QpCocycle, n: usize, theta: f64) -> Mat2R {
    let mut acc = Mat2R::IDENTITY;
    for j in 0..n {
        acc = c.eval(theta + j as f64 * c.alpha) * acc;
        let s = acc.max_abs();
        if s > 1e100 {
            acc = acc.scale(1.0 / s);
        }
    }
    acc
}

/// Singular values (descending) with right singular vectors.
fn svd(m: &Mat2R) -> (f64, f64, Direction, Direction) {
    let g = m.transpose() * *m;
    let tr = g.trace();
    let det = g.det();
    let disc = ((tr * tr / 4.0) - det).max(0.0).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = (tr / 2.0 - disc).max(0.0);
    let v1 = if g.b.abs() > 1e-300 * tr.max(1e-300) {
        [g.b, l1 - g.a]
    } else if g.a >= g.d {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let r = v1[0].hypot(v1[1]);
    let v1 = [v1[0] / r, v1[1] / r];
    let v2 = [-v1[1], v1[0]];
    (l1.sqrt(), l2.sqrt(), v1, v2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OseledecResult {
    pub stable: Direction,
    pub unstable: Direction,
    pub defect: f64,
}

fn unstable_at(c: &QpCocycle, theta: f64, n: usize) -> Result<Direction> {
    let m = normalized_product(c, n, theta - n as f64 * c.alpha);
    let (s1, s2, v1, _) = svd(&m);
    check_ratio(s1, s2)?;
    let w = m.apply(v1);
    let r = w[0].hypot(w[1]);
    Ok([w[0] / r, w[1] / r])
}

fn stable_at(c: &QpCocycle, theta: f64, n: usize) -> Result<Direction> {
    let m = normalized_product(c, n, theta);
    let (s1, s2, _, v2) = svd(&m);
    check_ratio(s1, s2)?;
    Ok(v2)
}

fn check_ratio(s1: f64, s2: f64) -> Result<()> {
    let ratio = if s2 > 0.0 { s1 / s2 } else { f64::INFINITY };
    if ratio < TOL.hyperbolicity_ratio {
        return Err(Error::NoHyperbolicity { ratio });
    }
    Ok(())
}

/// Stable and unstable directions at `θ` from `n`-step products; the defect
/// is the larger projective equivariance error `A(θ)E(θ)` vs `E(θ+α)`.
pub fn oseledec_directions(c: &QpCocycle, theta: f64, n: usize) -> Result<OseledecResult> {
    let stable = stable_at(c, theta, n)?;
    let unstable = unstable_at(c, theta, n)?;
    let a = c.eval(theta);
    let s_next = stable_at(c, theta + c.alpha, n)?;
    let u_next = unstable_at(c, theta + c.alpha, n)?;
    let defect = projective_distance(a.apply(stable), s_next).max(projective_distance(a.apply(unstable), u_next));
    Ok(OseledecResult { stable, unstable, defect })
}
