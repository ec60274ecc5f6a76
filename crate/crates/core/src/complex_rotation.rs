//! Complexified cocycles `A_z = A·C_z`, their invariant holomorphic sections
//! and the complex rotation number `ζ(z)`.
//!
//! Two pictures are used. In the disk picture (conjugation by `P`) the
//! cocycle reads `U(x)D_z` with `U ∈ SU(1,1)`, and for `|z| < 1` it maps the
//! unit disk strictly into itself; the forward-invariant section `τ_−` is the
//! attracting fixed point of the transfer operator. In the real picture
//! `A(x)C_z` acts on the half-planes and the sections `m_±` live in `H_±`.
//!
//! Sections are grid functions with linear interpolation for the shifted
//! lookup. A Picard sweep composes a block of `m` exact one-step matrices so
//! that one sweep contracts by about `10⁻³`; the block matrices depend only on
//! the cocycle and are computed once.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{eval_trig, MapExpr, QpCocycle, Sl2Map};
use crate::config::Settings;
use crate::error::{Error, Result};
use crate::invariants::{fibered_rotation_number, lyapunov_exponent};
use crate::sl2_geometry::{c_z, d_z, moebius_act, sl2_to_su11, Mat2C, Mat2R, C64};
use crate::spectral::linear_periodic;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A point `z` of the closed slit disk: `0 < |z| ≤ 1`, `arg z ∈ (−π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexParam {
    z: C64,
}

impl ComplexParam {
    pub fn new(z: C64) -> Result<Self> {
        let r = z.norm();
        if !(r > 0.0 && r <= 1.0 + 1e-12) || !r.is_finite() {
            return Err(Error::ConfigInvalid(format!("|z| = {r} outside (0, 1]")));
        }
        if z.im == 0.0 && z.re < 0.0 {
            return Err(Error::ConfigInvalid("z on the slit (negative real axis)".into()));
        }
        Ok(ComplexParam { z })
    }

    /// `z = r·e^{iβ}`.
    pub fn polar(r: f64, beta: f64) -> Result<Self> {
        ComplexParam::new(C64::from_polar(r, beta))
    }

    /// `z = (λ − i)/(λ + i)`; `Im λ > 0` gives the open disk.
    pub fn from_lambda(lambda: C64) -> Result<Self> {
        ComplexParam::new(z_of_lambda(lambda))
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn lambda(&self) -> C64 {
        lambda_of_z(self.z)
    }

    pub fn is_interior(&self) -> bool {
        self.z.norm() < 1.0 - 1e-12
    }
}

pub fn z_of_lambda(lambda: C64) -> C64 {
    (lambda - I) / (lambda + I)
}

pub fn lambda_of_z(z: C64) -> C64 {
    I * (1.0 + z) / (1.0 - z)
}

/// Disk coordinate of a point of `H_−` and back (`τ = (m + i)/(m − i)`).
pub fn disk_of_half_plane(m: C64) -> C64 {
    (m + I) / (m - I)
}

pub fn half_plane_of_disk(tau: C64) -> C64 {
    I * (tau + 1.0) / (tau - 1.0)
}

/// A cocycle `(α, M(·))` with `M(x) ∈ SL(2,C)`.
#[derive(Clone)]
pub struct ComplexCocycle {
    pub alpha: f64,
    pub period: f64,
    f: Arc<dyn Fn(f64) -> Mat2C + Send + Sync>,
}

impl std::fmt::Debug for ComplexCocycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComplexCocycle").field("alpha", &self.alpha).field("period", &self.period).finish()
    }
}

impl ComplexCocycle {
    pub fn from_fn(alpha: f64, period: f64, f: impl Fn(f64) -> Mat2C + Send + Sync + 'static) -> Self {
        ComplexCocycle { alpha, period, f: Arc::new(f) }
    }

    pub fn eval(&self, x: f64) -> Mat2C {
        (self.f)(x)
    }

    /// `(x ↦ x − α, M(x − α)⁻¹)`.
    pub fn inverse_cocycle(&self) -> ComplexCocycle {
        let f = self.f.clone();
        let alpha = self.alpha;
        ComplexCocycle::from_fn(-alpha, self.period, move |x| f(x - alpha).inv())
    }

    /// The same cocycle in the disk picture, `P·M·P⁻¹`.
    pub fn disk_picture(&self) -> ComplexCocycle {
        let f = self.f.clone();
        ComplexCocycle::from_fn(self.alpha, self.period, move |x| crate::sl2_geometry::to_su11_picture(&f(x)))
    }

    /// Lyapunov exponent from the growth of a complex vector, averaged over
    /// `samples` equidistributed starting points after a transient of `n/10`.
    pub fn lyapunov(&self, n: usize, samples: usize) -> f64 {
        let burn = crate::invariants::burn_in(n);
        let samples = samples.max(1);
        let rates: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let theta = self.period * (s as f64 + 0.5) / samples as f64;
                let mut v = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
                let mut acc = 0.0;
                for k in 0..burn + n {
                    let x = (theta + k as f64 * self.alpha).rem_euclid(self.period);
                    let w = self.eval(x).apply(v);
                    let r = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
                    if k >= burn {
                        acc += r.ln();
                    }
                    v = [w[0] / r, w[1] / r];
                }
                acc / n as f64
            })
            .collect();
        rates.iter().sum::<f64>() / samples as f64
    }
}

/// `(α, A(·)·C_z)`.
pub fn complexify(c: &QpCocycle, z: ComplexParam) -> ComplexCocycle {
    let map = c.map.clone();
    let cz = c_z(z.z());
    ComplexCocycle::from_fn(c.alpha, c.map.period(), move |x| map.eval(x).to_complex() * cz)
}

/// `Ã_λ(x) = [[V(x) − λ, 1], [−1, 0]]` for a trigonometric potential.
pub fn schrodinger_complexify(alpha: f64, potential: &[(i64, f64)], lambda: C64) -> ComplexCocycle {
    let v = potential.to_vec();
    ComplexCocycle::from_fn(alpha, 1.0, move |x| schrodinger_matrix(eval_trig(&v, x), lambda))
}

fn schrodinger_matrix(v: f64, lambda: C64) -> Mat2C {
    Mat2C::new(v - lambda, C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0))
}

/// Residuals of the algebraic identities of the energy-complexified
/// Schrödinger cocycle on `samples` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchrodingerIdentities {
    /// `max |det Ã_λ − 1|`.
    pub det: f64,
    /// `max ‖Ã_λ⁻¹ − S·Ã_λ·S‖` with `S = [[0, −1], [−1, 0]]`.
    pub inverse_flip: f64,
    /// `max ‖Q·M·Q⁻¹ − (M⁻¹)ᵀ‖` with `M = [[V + λ, 1], [−1, 0]]`, `Q` the
    /// quarter-turn rotation.
    pub quarter_turn: f64,
    /// `max |Im|` of the entries (zero for real `λ`).
    pub max_imag: f64,
}

pub fn schrodinger_identities(potential: &[(i64, f64)], lambda: C64, samples: usize) -> SchrodingerIdentities {
    let s = Mat2C::new(C64::new(0.0, 0.0), C64::new(-1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0));
    let q = Mat2R::rotation(PI / 2.0).to_complex();
    let mut out = SchrodingerIdentities { det: 0.0, inverse_flip: 0.0, quarter_turn: 0.0, max_imag: 0.0 };
    for j in 0..samples {
        let v = eval_trig(potential, j as f64 / samples as f64);
        let a = schrodinger_matrix(v, lambda);
        out.det = out.det.max((a.det() - 1.0).norm());
        out.inverse_flip = out.inverse_flip.max((a.inv() - s * a * s).max_abs());
        let m = schrodinger_matrix(v, -lambda);
        let mi = m.inv();
        let mit = Mat2C::new(mi.a, mi.c, mi.b, mi.d);
        out.quarter_turn = out.quarter_turn.max((q * m * q.inv() - mit).max_abs());
        out.max_imag = out.max_imag.max(a.max_imag());
    }
    out
}

/// Grid-sampled section `s(x_j)`, `x_j = j·period/N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    #[serde(skip)]
    pub values: Vec<C64>,
    pub period: f64,
    pub sweeps: usize,
    /// Sup node displacement of the last sweep.
    pub residual: f64,
    /// Exact one-step matrices composed per sweep.
    pub block: usize,
    /// `max_j |s(x_j) − M(x_j − α)·s(x_j − α)|` with interpolated lookup.
    pub equivariance: f64,
}

/// Disk-picture section `τ_−(z, ·)`.
pub type DiskSection = Section;

impl Section {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, j: usize) -> f64 {
        self.period * j as f64 / self.values.len() as f64
    }

    pub fn at(&self, x: f64) -> C64 {
        linear_periodic(&self.values, self.period, x)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Number of one-step matrices per sweep for a per-step contraction `q < 1`.
pub fn block_size(q: f64) -> usize {
    if !(q > 0.0 && q < 1.0) {
        return 1;
    }
    ((1e-3f64).ln() / q.ln()).ceil().clamp(1.0, 20_000.0) as usize
}

/// Picard iteration for `s(x) = M(x − α)·s(x − α)` on `N` nodes, starting
/// from `init`, with `block` exact steps per sweep.
pub fn picard_section(
    c: &ComplexCocycle,
    init: Vec<C64>,
    block: usize,
    tol: f64,
    max_sweeps: usize,
) -> Result<Section> {
    let n = init.len();
    let period = c.period;
    let alpha = c.alpha;
    let node = |j: usize| period * j as f64 / n as f64;
    let blocks: Vec<Mat2C> = (0..n)
        .into_par_iter()
        .map(|j| {
            let x = node(j);
            let mut acc = Mat2C::IDENTITY;
            for k in 1..=block {
                acc = acc * c.eval((x - k as f64 * alpha).rem_euclid(period));
                let s = acc.max_abs();
                if !(0.5..=2.0).contains(&s) {
                    acc = acc.scale(C64::new(1.0 / s, 0.0));
                }
            }
            acc
        })
        .collect();
    let lag = block as f64 * alpha;
    let mut values = init;
    let mut residual = f64::INFINITY;
    let mut sweeps = 0;
    while residual > tol {
        if sweeps >= max_sweeps {
            return Err(Error::NoContraction { residual, sweeps });
        }
        let next: Vec<C64> = (0..n)
            .into_par_iter()
            .map(|j| moebius_act(&blocks[j], linear_periodic(&values, period, node(j) - lag)))
            .collect::<Result<_>>()?;
        residual = next.iter().zip(&values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if !residual.is_finite() {
            return Err(Error::NoContraction { residual, sweeps });
        }
        values = next;
        sweeps += 1;
    }
    let equivariance = (0..n)
        .into_par_iter()
        .map(|j| {
            let x = node(j);
            let prev = (x - alpha).rem_euclid(period);
            match moebius_act(&c.eval(prev), linear_periodic(&values, period, prev)) {
                Ok(v) => (v - values[j]).norm(),
                Err(_) => f64::INFINITY,
            }
        })
        .reduce(|| 0.0, f64::max);
    Ok(Section { values, period, sweeps, residual, block, equivariance })
}

fn disk_contraction(z: C64) -> f64 {
    let r = z.norm();
    r.min(1.0 / r).powi(2)
}

/// Forward-invariant disk section `τ_−(z, ·)` of `(α, U(·)D_z)`, `|z| < 1`.
pub fn invariant_section(c: &QpCocycle, z: ComplexParam, n: usize, tol: f64) -> Result<DiskSection> {
    section_from(c, z, vec![C64::new(0.0, 0.0); n], tol)
}

/// As [`invariant_section`] from a given initial section.
pub fn section_from(c: &QpCocycle, z: ComplexParam, init: Vec<C64>, tol: f64) -> Result<DiskSection> {
    if !z.is_interior() {
        return Err(Error::ConfigInvalid("invariant sections need |z| < 1".into()));
    }
    if init.len() < 2 || !init.len().is_power_of_two() {
        return Err(Error::ConfigInvalid(format!("section grid {} is not a power of two", init.len())));
    }
    let u = complexify(c, z).disk_picture();
    picard_section(&u, init, block_size(disk_contraction(z.z())), tol, Settings::default().max_sweeps)
}

/// [`invariant_section`] with the grid doubled until the one-step
/// equivariance residual is at most `10·tol` or the grid reaches `max_grid`.
pub fn refined_section(c: &QpCocycle, z: ComplexParam, n: usize, tol: f64, max_grid: usize) -> Result<DiskSection> {
    let mut n = n;
    loop {
        let s = invariant_section(c, z, n, tol)?;
        if s.equivariance <= 10.0 * tol || 2 * n > max_grid {
            return Ok(s);
        }
        n *= 2;
    }
}

/// Continuous lift of `φ_z(x, τ)` with `e^{2πiφ} = ρ/|ρ|`, where
/// `ρ(z, x, τ) = b̄(x)zτ + ā(x)/z` is the second row of `U(x)D_z(τ, 1)ᵀ`.
///
/// `φ = (arg ā(x) − arg z + Arg(1 + z²b̄τ/ā))/2π`: the last term stays in
/// `(−1/4, 1/4)` on the closed disk, and `arg ā` is lifted continuously in
/// `x` from the principal value at `x = 0`.
#[derive(Debug, Clone)]
pub struct PhiLift {
    z: C64,
    period: f64,
    map: Sl2Map,
    /// Lifted `arg ā` at the nodes `0..=N`.
    table: Vec<f64>,
}

impl PhiLift {
    pub fn new(c: &QpCocycle, z: ComplexParam, n: usize) -> Result<Self> {
        let period = c.map.period();
        let raw: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|j| sl2_to_su11(&c.eval(period * j as f64 / n as f64)).d.arg())
            .collect();
        let mut table = Vec::with_capacity(n + 1);
        table.push(raw[0]);
        for j in 1..=n {
            let prev = table[j - 1];
            let inc = (raw[j % n] - prev + PI).rem_euclid(2.0 * PI) - PI;
            if inc.abs() > PI / 2.0 {
                return Err(Error::BranchFault { node: j, jump: inc / (2.0 * PI) });
            }
            table.push(prev + inc);
        }
        Ok(PhiLift { z: z.z(), period, map: c.map.clone(), table })
    }

    /// Lifted `arg ā(x)` for any real `x`.
    pub fn abar_angle(&self, x: f64, abar: C64) -> f64 {
        let n = self.table.len() - 1;
        let turns = (x / self.period).floor();
        let s = (x / self.period - turns) * n as f64;
        let j = (s.floor() as usize).min(n - 1);
        let t = s - j as f64;
        let winding = self.table[n] - self.table[0];
        let guess = self.table[j] * (1.0 - t) + self.table[j + 1] * t + turns * winding;
        let raw = abar.arg();
        raw + 2.0 * PI * ((guess - raw) / (2.0 * PI)).round()
    }

    /// `(φ, log|ρ|)` at `(x, τ)` given `U(x)`.
    pub fn phi_with(&self, u: &Mat2C, x: f64, tau: C64) -> (f64, f64) {
        let w = self.z * self.z * u.c * tau / u.d;
        let rho = u.d / self.z * (1.0 + w);
        let angle = self.abar_angle(x, u.d) - self.z.arg() + (1.0 + w).arg();
        (angle / (2.0 * PI), rho.norm().ln())
    }

    pub fn phi(&self, x: f64, tau: C64) -> f64 {
        self.phi_with(&sl2_to_su11(&self.map.eval(x)), x, tau).0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaResult {
    pub zeta: C64,
    /// Lyapunov exponent of `(α, A·C_z)` from vector growth.
    pub re_check: f64,
    /// `2π·` Birkhoff average of `φ_z` along an orbit started at `τ = 0`.
    pub im_check: f64,
}

impl ZetaResult {
    /// `−Im ζ/2π mod 1`, comparable with the fibered rotation number.
    pub fn rotation(&self) -> f64 {
        rotation_of_zeta(self.zeta)
    }
}

pub fn rotation_of_zeta(zeta: C64) -> f64 {
    (-zeta.im / (2.0 * PI)).rem_euclid(1.0)
}

/// `∫ Log ρ(z, x, τ(x)) dx` (mean over the section grid).
pub fn zeta_value(c: &QpCocycle, z: ComplexParam, section: &DiskSection) -> Result<C64> {
    if !(section.residual <= 1e-8) {
        return Err(Error::ConfigInvalid(format!("section residual {} above 1e-8", section.residual)));
    }
    let n = section.len();
    let lift = PhiLift::new(c, z, n)?;
    let parts: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let x = section.node(j);
            lift.phi_with(&sl2_to_su11(&c.eval(x)), x, section.values[j])
        })
        .collect();
    for j in 1..n {
        let jump = parts[j].0 - parts[j - 1].0;
        if jump.abs() > 0.5 {
            return Err(Error::BranchFault { node: j, jump });
        }
    }
    let re = parts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let im = 2.0 * PI * parts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    Ok(C64::new(re, im))
}

/// `ζ(z)` with the two independent checks (`n` iterations each; the
/// Lyapunov check averages over `samples` starting points).
pub fn zeta(c: &QpCocycle, z: ComplexParam, section: &DiskSection, n: usize, samples: usize) -> Result<ZetaResult> {
    let value = zeta_value(c, z, section)?;
    let re_check = complexify(c, z).lyapunov(n, samples);
    let im_check = geometric_rotation(c, z, n, section.len())?;
    Ok(ZetaResult { zeta: value, re_check, im_check })
}

/// `2π·(1/n)Σφ_z(x_k, τ_k)` along `x_k = kα`, `τ_{k+1} = U_z(x_k)·τ_k`,
/// `τ_0 = 0`. Valid on the closed disk.
pub fn geometric_rotation(c: &QpCocycle, z: ComplexParam, n: usize, table: usize) -> Result<f64> {
    let lift = PhiLift::new(c, z, table)?;
    let dz = d_z(z.z());
    let period = c.map.period();
    let mut tau = C64::new(0.0, 0.0);
    let mut acc = 0.0;
    let mut x = 0.0;
    for _ in 0..n {
        let u = sl2_to_su11(&c.eval(x));
        acc += lift.phi_with(&u, x, tau).0;
        tau = moebius_act(&(u * dz), tau)?;
        if tau.norm() > 1.0 {
            tau /= tau.norm();
        }
        x = (x + c.alpha).rem_euclid(period);
    }
    Ok(2.0 * PI * acc / n as f64)
}

/// `max_j |φ_z(x_j, τ₁(x_j)) − φ_z(x_j, τ₂(x_j))|` for two sections.
pub fn lemma_l1_gap(c: &QpCocycle, z: ComplexParam, s1: &DiskSection, s2: &DiskSection) -> Result<f64> {
    let n = s1.len();
    let lift = PhiLift::new(c, z, n)?;
    Ok((0..n)
        .map(|j| {
            let x = s1.node(j);
            let u = sl2_to_su11(&c.eval(x));
            (lift.phi_with(&u, x, s1.values[j]).0 - lift.phi_with(&u, x, s2.at(x)).0).abs()
        })
        .fold(0.0, f64::max))
}

/// `ζ` at an interior point with its own section.
pub fn zeta_at(c: &QpCocycle, z: ComplexParam, n: usize, tol: f64) -> Result<C64> {
    let s = invariant_section(c, z, n, tol)?;
    zeta_value(c, z, &s)
}

/// Cauchy–Riemann residual `|∂_xζ + i∂_yζ|` from central differences of
/// step `h`.
pub fn holomorphicity_residual(c: &QpCocycle, z: ComplexParam, h: f64, n: usize, tol: f64) -> Result<f64> {
    let at = |w: C64| ComplexParam::new(w).and_then(|p| zeta_at(c, p, n, tol));
    let z0 = z.z();
    let dx = (at(z0 + h)? - at(z0 - h)?) / (2.0 * h);
    let dy = (at(z0 + I * h)? - at(z0 - I * h)?) / (2.0 * h);
    Ok((dx + I * dy).norm())
}

/// `∂_λ ζ(z(λ))` by a central difference along the real axis.
pub fn zeta_lambda_derivative(c: &QpCocycle, lambda: C64, h: f64, n: usize, tol: f64) -> Result<C64> {
    let at = |l: C64| ComplexParam::from_lambda(l).and_then(|p| zeta_at(c, p, n, tol));
    Ok((at(lambda + h)? - at(lambda - h)?) / (2.0 * h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub beta: f64,
    pub r: f64,
    pub zeta: C64,
}

/// One `β` of a boundary scan: `ζ(re^{iβ})` over the radii, the
/// extrapolated boundary value and direct estimates for `(α, A·R_β)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub beta: f64,
    pub rows: Vec<BoundaryRow>,
    pub boundary: C64,
    /// `−Im ζ/2π mod 1` of the boundary value.
    pub rotation: f64,
    pub lyap_direct: f64,
    pub rot_direct: f64,
    /// `|Re ζ(e^{iβ})|` below [`ZERO_EXPONENT_TOL`].
    pub zero_exponent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryScan {
    pub points: Vec<BoundaryPoint>,
    /// Largest jump of `Im ζ(e^{iβ})` between adjacent `β` (mod 2π).
    pub max_im_jump: f64,
    /// Range of the continuously unwrapped `Im ζ(e^{iβ})` over the points
    /// flagged with zero exponent.
    pub im_variation: f64,
}

pub const ZERO_EXPONENT_TOL: f64 = 1e-3;

/// Value at `h = 0` of the interpolating polynomial through `(h_i, y_i)`.
pub fn richardson(h: &[f64], y: &[C64]) -> C64 {
    let mut p = y.to_vec();
    let n = h.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i + 1] * h[i] - p[i] * h[i + m]) / (h[i] - h[i + m]);
        }
    }
    p[0]
}

/// `A·R_β` as a real cocycle on the grid of `c`.
pub fn rotated(c: &QpCocycle, beta: f64) -> Result<QpCocycle> {
    let expr = MapExpr::Product { factors: vec![c.map.expr().clone(), MapExpr::Const { m: Mat2R::rotation(beta) }] };
    Ok(QpCocycle::new(c.alpha, Sl2Map::with_grid(expr, c.map.grid_len())?))
}

/// Radial scan of `ζ(re^{iβ})`, extrapolated to `r = 1` in `h = 1 − r`.
pub fn boundary_scan(
    c: &QpCocycle,
    betas: &[f64],
    radii: &[f64],
    n: usize,
    tol: f64,
    settings: &Settings,
) -> Result<BoundaryScan> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::ConfigInvalid("radii must increase inside (0, 1)".into()));
    }
    let points: Vec<BoundaryPoint> = betas
        .par_iter()
        .map(|&beta| -> Result<BoundaryPoint> {
            let mut rows = Vec::with_capacity(radii.len());
            for &r in radii {
                let z = ComplexParam::polar(r, beta)?;
                rows.push(BoundaryRow { beta, r, zeta: zeta_at(c, z, n, tol)? });
            }
            let h: Vec<f64> = radii.iter().map(|r| 1.0 - r).collect();
            let y: Vec<C64> = rows.iter().map(|row| row.zeta).collect();
            let boundary = richardson(&h, &y);
            let direct = rotated(c, beta)?;
            let lyap_direct = lyapunov_exponent(&direct, settings.lyapunov_iterations, settings.lyapunov_samples).value;
            let rot_direct = fibered_rotation_number(&direct, settings.rotation_iterations, 0.0, 0.0)?.value;
            Ok(BoundaryPoint {
                beta,
                rows,
                boundary,
                rotation: rotation_of_zeta(boundary),
                lyap_direct,
                rot_direct,
                zero_exponent: boundary.re.abs() < ZERO_EXPONENT_TOL,
            })
        })
        .collect::<Result<_>>()?;
    let wrap = |d: f64| (d + PI).rem_euclid(2.0 * PI) - PI;
    let max_im_jump = points
        .windows(2)
        .map(|w| wrap(w[1].boundary.im - w[0].boundary.im).abs())
        .fold(0.0, f64::max);
    let mut unwrapped = Vec::new();
    for p in points.iter().filter(|p| p.zero_exponent) {
        let v = match unwrapped.last() {
            Some(&prev) => prev + wrap(p.boundary.im - prev),
            None => p.boundary.im,
        };
        unwrapped.push(v);
    }
    let im_variation = match (unwrapped.iter().cloned().reduce(f64::max), unwrapped.iter().cloned().reduce(f64::min)) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => 0.0,
    };
    Ok(BoundaryScan { points, max_im_jump, im_variation })
}

/// The half-plane sections and the boundary functionals at `λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IjDefect {
    pub lambda: C64,
    pub i: f64,
    pub j: C64,
    /// `I − 4·Im J`.
    pub defect: f64,
    /// The same quantity from the nonnegative-integrand form.
    pub integrand_form: f64,
    pub min_gap: f64,
    #[serde(skip)]
    pub m_minus: Section,
    #[serde(skip)]
    pub m_plus: Section,
}

impl IjDefect {
    /// `∂_λζ` predicted from `J`: `−2J/(1 + λ²)`.
    pub fn lambda_derivative(&self) -> C64 {
        -2.0 * self.j / (1.0 + self.lambda * self.lambda)
    }
}

/// Sections `m_± ∈ H_±` of `(α, A·C_z)`, `z = (λ − i)/(λ + i)`, and the
/// quantities `I`, `J`, `I − 4 Im J`.
///
/// For `Im λ > 0` (`|z| < 1`) the forward dynamics contracts `H_−` and
/// `m_−` is its attracting section; for `Im λ < 0` the roles of forward and
/// inverse dynamics are exchanged.
pub fn ij_defect(c: &QpCocycle, lambda: C64, n: usize, tol: f64) -> Result<IjDefect> {
    if lambda.im == 0.0 {
        return Err(Error::ConfigInvalid("ij_defect needs Im λ ≠ 0".into()));
    }
    let z = z_of_lambda(lambda);
    let map = c.map.clone();
    let cz = c_z(z);
    let period = c.map.period();
    let fwd = ComplexCocycle::from_fn(c.alpha, period, move |x| map.eval(x).to_complex() * cz);
    let bwd = fwd.inverse_cocycle();
    let block = block_size(disk_contraction(z));
    let max_sweeps = Settings::default().max_sweeps;
    let start = |s: f64| vec![C64::new(0.0, s); n];
    let (m_minus, m_plus) = if lambda.im > 0.0 {
        (picard_section(&fwd, start(-1.0), block, tol, max_sweeps)?, picard_section(&bwd, start(1.0), block, tol, max_sweeps)?)
    } else {
        (picard_section(&bwd, start(-1.0), block, tol, max_sweeps)?, picard_section(&fwd, start(1.0), block, tol, max_sweeps)?)
    };
    let mut min_gap = f64::INFINITY;
    let (mut i_sum, mut j_sum, mut rhs) = (0.0, C64::new(0.0, 0.0), 0.0);
    for (&mm, &mp) in m_minus.values.iter().zip(&m_plus.values) {
        let gap = (mp - mm).norm();
        min_gap = min_gap.min(gap);
        if gap < 1e-8 {
            return Err(Error::SectionCollapse { gap });
        }
        let ix = (1.0 + mp.norm_sqr()) / mp.im - (1.0 + mm.norm_sqr()) / mm.im;
        i_sum += ix;
        j_sum += (1.0 + mm * mp) / (mm - mp);
        let ratio = ((mm.re - mp.re).powi(2) + (mm.im + mp.im).powi(2)) / (mm - mp).norm_sqr();
        rhs += ix * ratio;
    }
    let nf = n as f64;
    let (i, j) = (i_sum / nf, j_sum / nf);
    Ok(IjDefect {
        lambda,
        i,
        j,
        defect: i - 4.0 * j.im,
        integrand_form: rhs / nf,
        min_gap,
        m_minus,
        m_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::conjugated_rotation_on;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    fn constant(m: Mat2R) -> QpCocycle {
        QpCocycle::new(GOLDEN, Sl2Map::with_grid(MapExpr::Const { m }, 256).unwrap())
    }

    #[test]
    fn c_z_on_the_circle_is_a_rotation() {
        let m = c_z(C64::from_polar(1.0, 0.7));
        assert!(m.max_imag() < 1e-14);
        assert!((m.re() - Mat2R::rotation(0.7)).max_abs() < 1e-14);
        assert!((c_z(C64::new(1.0, 0.0)) - Mat2C::IDENTITY).max_abs() < 1e-15);
        let w = C64::new(0.3, -0.55);
        assert!((c_z(w).det() - 1.0).norm() < 1e-13);
    }

    #[test]
    fn identity_zeta() {
        let c = constant(Mat2R::IDENTITY);
        let z = ComplexParam::new(C64::new(0.8, 0.0)).unwrap();
        let s = invariant_section(&c, z, 256, 1e-12).unwrap();
        assert!(s.sup_abs() < 1e-14);
        let r = zeta(&c, z, &s, 2000, 4).unwrap();
        assert!((r.zeta - C64::new(1.25f64.ln(), 0.0)).norm() < 1e-12);
        assert!((r.re_check - 1.25f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn rotation_zeta_on_the_circle() {
        let psi = 0.23;
        let c = constant(Mat2R::rotation_turns(psi));
        let beta = 0.4;
        let z = ComplexParam::polar(0.95, beta).unwrap();
        let s = invariant_section(&c, z, 256, 1e-12).unwrap();
        assert!(s.sup_abs() < 1e-14 && s.equivariance < 1e-14);
        let r = zeta(&c, z, &s, 5000, 2).unwrap();
        assert!((r.zeta.re + 0.95f64.ln()).abs() < 1e-12);
        let expect = psi + beta / (2.0 * PI);
        assert!((r.rotation() - expect).abs() < 1e-12);
        assert!((r.im_check - r.zeta.im).abs() < 1e-12);
    }

    #[test]
    fn bounded_family_section_and_zeta() {
        let c = conjugated_rotation_on(GOLDEN, 0.23, 0.15, 512).unwrap();
        let z = ComplexParam::polar(0.9, 0.3).unwrap();
        let s = invariant_section(&c, z, 1024, 1e-10).unwrap();
        assert!(s.residual <= 1e-10 && s.sup_abs() <= 1.0);
        let mut rng_state = 7u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng_state >> 11) as f64 / (1u64 << 53) as f64) * 1.6 - 0.8
        };
        let init: Vec<C64> = (0..1024).map(|_| C64::new(next(), next()) * 0.7).collect();
        let s2 = section_from(&c, z, init, 1e-10).unwrap();
        let diff = s.values.iter().zip(&s2.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-9);
        let r = zeta(&c, z, &s, 10_000, 16).unwrap();
        assert!(r.zeta.re >= 0.0);
        assert!((r.zeta.re - r.re_check).abs() < 1e-3, "{r:?}");
        assert!((r.zeta.im - r.im_check).abs() < 1e-3, "{r:?}");
        assert!(lemma_l1_gap(&c, z, &s, &s2).unwrap() < 0.5);
    }

    #[test]
    fn ij_identity_for_rotations() {
        let c = constant(Mat2R::rotation_turns(0.17));
        let d = ij_defect(&c, C64::new(0.4, -0.05), 64, 1e-12).unwrap();
        assert!(d.defect.abs() < 1e-10 && d.i > 0.0);
        let d = ij_defect(&c, C64::new(0.4, 0.05), 64, 1e-12).unwrap();
        assert!(d.defect.abs() < 1e-10);
    }

    #[test]
    fn lambda_derivative_of_the_identity() {
        let c = constant(Mat2R::IDENTITY);
        let lambda = C64::new(0.3, 0.2);
        let d = ij_defect(&c, lambda, 64, 1e-12).unwrap();
        let fd = zeta_lambda_derivative(&c, lambda, 1e-5, 64, 1e-13).unwrap();
        assert!((fd - d.lambda_derivative()).norm() < 1e-6, "{fd} {}", d.lambda_derivative());
        assert!(fd.im < 0.0);
    }

    #[test]
    fn schrodinger_identities_hold() {
        let v = vec![(1, 2.0), (-2, 0.3)];
        let ids = schrodinger_identities(&v, C64::new(0.4, -0.2), 64);
        assert!(ids.det < 1e-14 && ids.inverse_flip < 1e-14 && ids.quarter_turn < 1e-14);
        assert_eq!(schrodinger_identities(&v, C64::new(0.4, 0.0), 16).max_imag, 0.0);
    }

    #[test]
    fn slit_and_modulus_are_checked() {
        assert!(ComplexParam::new(C64::new(-0.5, 0.0)).is_err());
        assert!(ComplexParam::new(C64::new(0.0, 0.0)).is_err());
        assert!(ComplexParam::new(C64::new(1.01, 0.0)).is_err());
        let z = ComplexParam::from_lambda(C64::new(0.5, 0.3)).unwrap();
        assert!(z.is_interior());
        assert!((z.lambda() - C64::new(0.5, 0.3)).norm() < 1e-14);
    }
}
