//! Fourier cohomological equations, the twisted normal-form step near `E_r`,
//! a local KAM loop near rotations, the rigidity argument for conjugacies,
//! and two explicit perturbations: hyperbolic neighbours of elliptic
//! constants and the Schrödinger destabilizer.

use std::f64::consts::PI;
use std::ops::{Add, Neg, Sub};

use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{degree, MapExpr, QpCocycle, Sl2Map};
use crate::config::{Settings, TOL};
use crate::error::{Error, Result};
use crate::sl2_geometry::{sl2_to_su11, su11_to_algebra, su11_to_sl2, Mat2C, Mat2R, Su11Vector, C64};
use crate::spectral;

/// Defect at which the KAM loop stops.
pub const KAM_TARGET: f64 = 1e-10;
/// Divisors below this size abort the KAM loop.
pub const RESONANCE_TOL: f64 = 1e-6;
/// Relative size of a nonzero Fourier mode tolerated by the rigidity check.
pub const RIGIDITY_TOL: f64 = 1e-6;

const TWO_PI: f64 = 2.0 * PI;

fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

fn grid_for(order: usize) -> usize {
    (8 * (order + 1)).next_power_of_two().max(64)
}

/// Complex trigonometric polynomial `Σ_{|k|≤N} ĉ_k e^{2πikθ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigPoly {
    order: usize,
    coeffs: Vec<C64>,
}

impl TrigPoly {
    pub fn zero(order: usize) -> Self {
        TrigPoly { order, coeffs: vec![C64::new(0.0, 0.0); 2 * order + 1] }
    }

    /// Modes outside `|k| ≤ order` are dropped.
    pub fn from_modes(order: usize, modes: &[(i64, C64)]) -> Self {
        let mut p = TrigPoly::zero(order);
        for &(k, v) in modes {
            if k.unsigned_abs() as usize <= order {
                p.coeffs[(k + order as i64) as usize] += v;
            }
        }
        p
    }

    /// Real polynomial from `(k, value)` pairs in the cos/sin convention of
    /// [`MapExpr`].
    pub fn from_trig(coeffs: &[(i64, f64)]) -> Self {
        let order = coeffs.iter().map(|&(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut modes = Vec::new();
        for &(k, v) in coeffs {
            if k == 0 {
                modes.push((0, C64::new(v, 0.0)));
            } else if k > 0 {
                modes.push((k, C64::new(v / 2.0, 0.0)));
                modes.push((-k, C64::new(v / 2.0, 0.0)));
            } else {
                modes.push((-k, C64::new(0.0, -v / 2.0)));
                modes.push((k, C64::new(0.0, v / 2.0)));
            }
        }
        TrigPoly::from_modes(order, &modes)
    }

    /// Truncated Fourier series of equispaced samples on `[0, 1)`.
    pub fn from_samples(samples: &[C64], order: usize) -> Result<Self> {
        let m = samples.len();
        if m <= 2 * order {
            return Err(Error::ConfigInvalid(format!("{m} samples cannot resolve {order} modes")));
        }
        let c = spectral::forward(samples);
        let mut p = TrigPoly::zero(order);
        for k in -(order as i64)..=order as i64 {
            p.coeffs[(k + order as i64) as usize] = c[spectral::index(k, m)];
        }
        Ok(p)
    }

    pub fn from_real_samples(samples: &[f64], order: usize) -> Result<Self> {
        let c: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
        TrigPoly::from_samples(&c, order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, k: i64) -> C64 {
        if k.unsigned_abs() as usize > self.order {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[(k + self.order as i64) as usize]
    }

    pub fn set_coeff(&mut self, k: i64, v: C64) {
        assert!(k.unsigned_abs() as usize <= self.order, "mode {k} outside order {}", self.order);
        self.coeffs[(k + self.order as i64) as usize] = v;
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let n = self.order as i64;
        self.coeffs.iter().enumerate().map(move |(j, &c)| (j as i64 - n, c))
    }

    pub fn eval(&self, theta: f64) -> C64 {
        self.modes().map(|(k, c)| c * cis(TWO_PI * k as f64 * theta)).sum()
    }

    /// Values on the nodes `j/m`.
    pub fn samples(&self, m: usize) -> Vec<C64> {
        if m <= 2 * self.order {
            return (0..m).map(|j| self.eval(j as f64 / m as f64)).collect();
        }
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for (k, c) in self.modes() {
            buf[spectral::index(k, m)] = c;
        }
        spectral::inverse(&buf)
    }

    /// `θ ↦ p(θ + c)`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut p = self.clone();
        for (k, v) in self.modes() {
            p.coeffs[(k + self.order as i64) as usize] = v * cis(TWO_PI * k as f64 * c);
        }
        p
    }

    pub fn derivative(&self, j: u32) -> Self {
        let mut p = self.clone();
        for (k, v) in self.modes() {
            p.coeffs[(k + self.order as i64) as usize] = v * C64::new(0.0, TWO_PI * k as f64).powu(j);
        }
        p
    }

    pub fn mean(&self) -> C64 {
        self.coeff(0)
    }

    pub fn truncated(&self, order: usize) -> Self {
        let modes: Vec<(i64, C64)> = self.modes().collect();
        TrigPoly::from_modes(order, &modes)
    }

    pub fn scale(&self, s: C64) -> Self {
        TrigPoly { order: self.order, coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    /// `θ ↦ conj(p(θ))`.
    pub fn conj(&self) -> Self {
        let mut p = TrigPoly::zero(self.order);
        for (k, v) in self.modes() {
            p.coeffs[(-k + self.order as i64) as usize] = v.conj();
        }
        p
    }

    pub fn real_part(&self) -> Self {
        (self.clone() + self.conj()).scale(C64::new(0.5, 0.0))
    }

    pub fn imag_part(&self) -> Self {
        (self.clone() - self.conj()).scale(C64::new(0.0, -0.5))
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.modes().all(|(k, v)| (v - self.coeff(-k).conj()).norm() <= tol)
    }

    /// Cos/sin coefficients of the real part.
    pub fn to_trig(&self) -> Vec<(i64, f64)> {
        let re = self.real_part();
        let mut out = vec![(0, re.coeff(0).re)];
        for k in 1..=self.order as i64 {
            let c = re.coeff(k);
            out.push((k, 2.0 * c.re));
            out.push((-k, -2.0 * c.im));
        }
        out
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples(grid_for(self.order)).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max_{j≤s} ‖∂^j p‖₀`.
    pub fn cs_norm(&self, s: u32) -> f64 {
        (0..=s).map(|j| self.derivative(j).sup_norm()).fold(0.0, f64::max)
    }

    pub fn l1_coeffs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(self, o: TrigPoly) -> TrigPoly {
        let order = self.order.max(o.order);
        let mut p = self.truncated(order);
        for (k, v) in o.modes() {
            p.coeffs[(k + order as i64) as usize] += v;
        }
        p
    }
}

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(self, o: TrigPoly) -> TrigPoly {
        self + (-o)
    }
}

/// su(1,1)-valued polynomial `{t(θ), ν(θ)}` with `t` real.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Su11Poly {
    pub t: TrigPoly,
    pub nu: TrigPoly,
}

impl Su11Poly {
    pub fn zero(order: usize) -> Self {
        Su11Poly { t: TrigPoly::zero(order), nu: TrigPoly::zero(order) }
    }

    pub fn from_samples(samples: &[Su11Vector], order: usize) -> Result<Self> {
        let t: Vec<f64> = samples.iter().map(|v| v.t).collect();
        let nu: Vec<C64> = samples.iter().map(|v| v.nu).collect();
        Ok(Su11Poly { t: TrigPoly::from_real_samples(&t, order)?, nu: TrigPoly::from_samples(&nu, order)? })
    }

    pub fn order(&self) -> usize {
        self.t.order().max(self.nu.order())
    }

    pub fn eval(&self, theta: f64) -> Su11Vector {
        Su11Vector::new(self.t.eval(theta).re, self.nu.eval(theta))
    }

    pub fn samples(&self, m: usize) -> Vec<Su11Vector> {
        self.t.samples(m).into_iter().zip(self.nu.samples(m)).map(|(t, nu)| Su11Vector::new(t.re, nu)).collect()
    }

    pub fn shifted(&self, c: f64) -> Self {
        Su11Poly { t: self.t.shifted(c), nu: self.nu.shifted(c) }
    }

    pub fn cs_norm(&self, s: u32) -> f64 {
        let m = grid_for(self.order());
        (0..=s)
            .map(|j| {
                let d = Su11Poly { t: self.t.derivative(j), nu: self.nu.derivative(j) };
                d.samples(m).iter().map(|v| v.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// The same polynomial in sl(2,R), as `ExpTrig` coefficients.
    pub fn to_algebra_trig(&self) -> Vec<(i64, [f64; 4])> {
        let basis = [
            su11_to_algebra(&Su11Vector::new(1.0, C64::new(0.0, 0.0))).to_matrix(),
            su11_to_algebra(&Su11Vector::new(0.0, C64::new(1.0, 0.0))).to_matrix(),
            su11_to_algebra(&Su11Vector::new(0.0, C64::new(0.0, 1.0))).to_matrix(),
        ];
        let parts = [self.t.to_trig(), self.nu.real_part().to_trig(), self.nu.imag_part().to_trig()];
        let order = self.order() as i64;
        let mut out = Vec::new();
        for k in -order..=order {
            let mut m = Mat2R::ZERO;
            for (part, b) in parts.iter().zip(&basis) {
                if let Some(&(_, v)) = part.iter().find(|&&(j, _)| j == k) {
                    m = m + b.scale(v);
                }
            }
            if m.max_abs() > 0.0 {
                out.push((k, [m.a, m.b, m.c, m.d]));
            }
        }
        out
    }
}

fn su11_add(a: Su11Vector, b: Su11Vector) -> Su11Vector {
    Su11Vector::new(a.t + b.t, a.nu + b.nu)
}

fn su11_sub(a: Su11Vector, b: Su11Vector) -> Su11Vector {
    Su11Vector::new(a.t - b.t, a.nu - b.nu)
}

/// `max_{j≤s} sup ‖∂^j U‖` of su(1,1) grid samples on `[0, 1)`.
pub fn su11_cs_norm(samples: &[Su11Vector], s: u32) -> f64 {
    let cols = [
        samples.iter().map(|v| v.t).collect::<Vec<_>>(),
        samples.iter().map(|v| v.nu.re).collect(),
        samples.iter().map(|v| v.nu.im).collect(),
    ];
    let mut best = 0.0f64;
    for order in 0..=s {
        let d: Vec<Vec<f64>> = cols.iter().map(|c| spectral::derivative(c, 1.0, order)).collect();
        for j in 0..samples.len() {
            best = best.max((d[0][j] * d[0][j] + d[1][j] * d[1][j] + d[2][j] * d[2][j]).sqrt());
        }
    }
    best
}

/// `E_r(θ)` in the SU(1,1) picture.
pub fn e_r_su11(r: i64, theta: f64) -> Mat2C {
    Mat2C::diag(cis(TWO_PI * r as f64 * theta))
}

/// `U(θ_j) = log(E_r(θ_j)⁻¹·PA(θ_j)P⁻¹)` on `m` nodes, for a cocycle close
/// to `E_r`.
pub fn log_relative_to_er(c: &QpCocycle, r: i64, m: usize) -> Vec<Su11Vector> {
    (0..m)
        .into_par_iter()
        .map(|j| {
            let theta = j as f64 / m as f64;
            let a = sl2_to_su11(&c.eval(theta));
            Su11Vector::from_matrix(&(e_r_su11(-r, theta) * a).log())
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationSolution {
    pub y: TrigPoly,
    pub residual: f64,
    pub amplification: f64,
}

/// Solves `y(θ+α) − y(θ) = T_N f(θ) − f̂(0)` with `ŷ(0) = 0`.
pub fn solve_translation_cohomology(f: &TrigPoly, alpha: f64, n: usize) -> Result<TranslationSolution> {
    let mut y = TrigPoly::zero(n);
    let mut amplification = 0.0f64;
    for k in 1..=n as i64 {
        let d = cis(TWO_PI * k as f64 * alpha) - 1.0;
        if d.norm() < TOL.small_divisor {
            return Err(Error::SmallDivisor { k, divisor: d.norm() });
        }
        amplification = amplification.max(1.0 / d.norm());
        y.set_coeff(k, f.coeff(k) / d);
        y.set_coeff(-k, f.coeff(-k) / d.conj());
    }
    let mut rhs = f.truncated(n);
    rhs.set_coeff(0, C64::new(0.0, 0.0));
    let m = grid_for(n);
    let shift = 0.5 / m as f64;
    let ya = y.shifted(alpha + shift).samples(m);
    let y0 = y.shifted(shift).samples(m);
    let g = rhs.shifted(shift).samples(m);
    let residual = (0..m).map(|j| (ya[j] - y0[j] - g[j]).norm()).fold(0.0, f64::max);
    Ok(TranslationSolution { y, residual, amplification })
}

#[derive(Debug, Clone, Serialize)]
pub struct TwistedSolution {
    pub nu: TrigPoly,
    /// The resonant band `P_r`, modes `−(2r−1)…0`.
    pub band: TrigPoly,
    pub residual: f64,
    /// Longest chain of the mode recursion.
    pub amplification: f64,
}

/// Solves `e^{−4πirθ}ν(θ+α) − ν(θ) = P_r(θ) − T_N g(θ)` with `P_r` supported
/// on the band `−(2r−1)…0`.
///
/// Mode `m` of the equation reads `w_{m+2r}ν̂_{m+2r} − ν̂_m = P̂_m − ĝ_m` with
/// `w_k = e^{2πikα}`. Modes above the band are solved downward from `N`,
/// modes below upward from `−N`; the band takes what is left. All divisors
/// have modulus one.
pub fn solve_twisted_cohomology(g: &TrigPoly, alpha: f64, r: i64, n: usize) -> Result<TwistedSolution> {
    if r < 1 {
        return Err(Error::ConfigInvalid(format!("twisted equation needs r >= 1, got {r}")));
    }
    let ni = n as i64;
    let w = |k: i64| cis(TWO_PI * k as f64 * alpha);
    let mut nu = TrigPoly::zero(n);
    let gc = |k: i64| if k.abs() <= ni { g.coeff(k) } else { C64::new(0.0, 0.0) };
    for m in (1..=ni).rev() {
        let up = if m + 2 * r <= ni { w(m + 2 * r) * nu.coeff(m + 2 * r) } else { C64::new(0.0, 0.0) };
        nu.set_coeff(m, gc(m) + up);
    }
    for m in -ni..=-2 * r {
        let v = (nu.coeff(m) - gc(m)) / w(m + 2 * r);
        nu.set_coeff(m + 2 * r, v);
    }
    let mut band = TrigPoly::zero((2 * r - 1) as usize);
    for j in -(2 * r - 1)..=0 {
        band.set_coeff(j, gc(j) + w(j + 2 * r) * nu.coeff(j + 2 * r) - nu.coeff(j));
    }
    let m = grid_for(n + 2 * r as usize);
    let shift = 0.5 / m as f64;
    let na = nu.shifted(alpha + shift).samples(m);
    let n0 = nu.shifted(shift).samples(m);
    let p = band.shifted(shift).samples(m);
    let gt = g.truncated(n).shifted(shift).samples(m);
    let residual = (0..m)
        .map(|j| {
            let theta = (j as f64 + 0.5) / m as f64;
            (cis(-2.0 * TWO_PI * r as f64 * theta) * na[j] - n0[j] - (p[j] - gt[j])).norm()
        })
        .fold(0.0, f64::max);
    Ok(TwistedSolution { nu, band, residual, amplification: ((n + 1) as f64 / (2 * r) as f64).ceil() })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormalFormNorms {
    pub z: [f64; 3],
    pub gamma: [f64; 3],
    pub f: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalFormOutput {
    pub z: Su11Poly,
    pub gamma: Su11Poly,
    /// Remainder on the input grid.
    #[serde(skip)]
    pub f: Vec<Su11Vector>,
    pub norms: NormalFormNorms,
    /// `sup ‖LHS − E_r e^{Γ+F}‖`, zero up to rounding.
    pub identity_residual: f64,
    /// `sup |log(e^{−Γ}E_r⁻¹·LHS)|`, the conjugation defect without `F`.
    pub conjugacy_defect: f64,
    pub input_size: f64,
}

/// One step of the normal form near `E_r`: solve the linearized equations
/// for `Z = {y, ν}`, keep `Γ = {f̂(0), P_r}`, and measure the remainder
/// `F = log(E_r⁻¹e^{Z(θ+α)}E_r e^{U}e^{−Z}) − Γ` on the grid of `U`.
pub fn normal_form_step(u: &[Su11Vector], alpha: f64, r: i64, n: usize, settings: &Settings) -> Result<NormalFormOutput> {
    let m = u.len();
    if m <= 2 * (n + 2 * r.unsigned_abs() as usize) {
        return Err(Error::ConfigInvalid(format!("grid of {m} nodes too coarse for N = {n}")));
    }
    let size = su11_cs_norm(u, 2) * (n as f64).powf(settings.normal_form_a);
    if size > settings.normal_form_eps0 {
        return Err(Error::StepTooLarge { size, eps0: settings.normal_form_eps0 });
    }
    let up = Su11Poly::from_samples(u, n)?;
    let y = solve_translation_cohomology(&-up.t.clone(), alpha, n)?;
    let tw = solve_twisted_cohomology(&up.nu, alpha, r, n)?;
    let z = Su11Poly { t: y.y, nu: tw.nu };
    let gamma = Su11Poly { t: TrigPoly::from_modes(0, &[(0, C64::new(up.t.mean().re, 0.0))]), nu: tw.band };

    let za = z.shifted(alpha).samples(m);
    let z0 = z.samples(m);
    let gs = gamma.samples(m);
    let rows: Vec<(Su11Vector, f64, f64)> = (0..m)
        .into_par_iter()
        .map(|j| {
            let theta = j as f64 / m as f64;
            let e = e_r_su11(r, theta);
            let lhs = za[j].exp() * e * u[j].exp() * Su11Vector::new(-z0[j].t, -z0[j].nu).exp();
            let inner = e_r_su11(-r, theta) * lhs;
            let f = su11_sub(Su11Vector::from_matrix(&inner.log()), gs[j]);
            let rebuilt = e * su11_add(gs[j], f).exp();
            let without = Su11Vector::new(-gs[j].t, -gs[j].nu).exp() * inner;
            (f, (lhs - rebuilt).frobenius(), Su11Vector::from_matrix(&without.log()).norm())
        })
        .collect();
    let f: Vec<Su11Vector> = rows.iter().map(|r| r.0).collect();
    let identity_residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let conjugacy_defect = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let norms = NormalFormNorms {
        z: [z.cs_norm(0), z.cs_norm(1), z.cs_norm(2)],
        gamma: [gamma.cs_norm(0), gamma.cs_norm(1), gamma.cs_norm(2)],
        f: [su11_cs_norm(&f, 0), su11_cs_norm(&f, 1), su11_cs_norm(&f, 2)],
    };
    Ok(NormalFormOutput { z, gamma, f, norms, identity_residual, conjugacy_defect, input_size: su11_cs_norm(u, 0) })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Lambda2r {
    /// `‖Λ_{2r}U‖₀`.
    pub lhs: f64,
    /// `‖U − Λ_{2r}U‖₀`.
    pub rhs: f64,
    /// `∫|ν|` over the grid.
    pub nu_mass: f64,
    /// `‖∂U‖₀`.
    pub derivative: f64,
}

/// Sizes of the resonant band `Λ_{2r}U = {t̂(0), Σ_{−(2r−1)≤k≤0} ν̂_k e^{2πikθ}}`
/// and of its complement, plus the `∫|ν|` versus `‖∂U‖₀` pair.
pub fn lambda_2r_monitor(u: &[Su11Vector], r: i64) -> Lambda2r {
    let m = u.len();
    let t: Vec<f64> = u.iter().map(|v| v.t).collect();
    let nu: Vec<C64> = u.iter().map(|v| v.nu).collect();
    let t0 = spectral::mean(&t);
    let nc = spectral::forward(&nu);
    let mut band = vec![C64::new(0.0, 0.0); m];
    for k in -(2 * r - 1)..=0 {
        let j = spectral::index(k, m);
        band[j] = nc[j];
    }
    let lam = spectral::inverse(&band);
    let (mut lhs, mut rhs) = (0.0f64, 0.0f64);
    for j in 0..m {
        lhs = lhs.max((t0 * t0 + lam[j].norm_sqr()).sqrt());
        rhs = rhs.max(((t[j] - t0).powi(2) + (nu[j] - lam[j]).norm_sqr()).sqrt());
    }
    let nu_mass = nu.iter().map(|v| v.norm()).sum::<f64>() / m as f64;
    let derivative = su11_first_derivative_norm(u);
    Lambda2r { lhs, rhs, nu_mass, derivative }
}

fn su11_first_derivative_norm(u: &[Su11Vector]) -> f64 {
    let cols = [
        u.iter().map(|v| v.t).collect::<Vec<_>>(),
        u.iter().map(|v| v.nu.re).collect(),
        u.iter().map(|v| v.nu.im).collect(),
    ];
    let d: Vec<Vec<f64>> = cols.iter().map(|c| spectral::derivative(c, 1.0, 1)).collect();
    (0..u.len()).map(|j| (d[0][j].powi(2) + d[1][j].powi(2) + d[2][j].powi(2)).sqrt()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KamStep {
    pub step: usize,
    pub truncation: usize,
    pub defect: f64,
    pub correction: f64,
}

#[derive(Debug, Clone)]
pub struct KamResult {
    /// `B` with `A(θ) = B(θ+α)A₀B(θ)⁻¹`.
    pub conjugacy: Sl2Map,
    pub constant: Mat2R,
    /// Rotation angle of `A₀` in turns.
    pub angle: f64,
    pub steps: Vec<KamStep>,
    pub final_defect: f64,
    /// `sup ‖B(θ+α)⁻¹A(θ)B(θ) − A₀‖` on offset nodes.
    pub check: f64,
}

fn rot_su11(phi: f64) -> Mat2C {
    Mat2C::diag(cis(phi))
}

/// Recentres `a` at the rotation absorbing the mean of `t`; returns the new
/// angle, `U = log(D_φ⁻¹a)` and `sup ‖a − D_φ‖`.
fn recenter(a: &[Mat2C], phi: f64) -> (f64, Vec<Su11Vector>, f64) {
    let log_at = |phi: f64| -> Vec<Su11Vector> {
        let d = rot_su11(-phi);
        a.par_iter().map(|m| Su11Vector::from_matrix(&(d * *m).log())).collect()
    };
    let u = log_at(phi);
    let phi = phi + u.iter().map(|v| v.t).sum::<f64>() / u.len() as f64;
    let u = log_at(phi);
    let d = rot_su11(phi);
    let defect = a.iter().map(|m| (*m - d).op_norm()).fold(0.0, f64::max);
    (phi, u, defect)
}

/// KAM iteration near a constant rotation: at step `n` the linearized
/// equations are solved on `N_n = exp((3/2)ⁿ)` modes (capped at a quarter
/// of the grid) and the cocycle is conjugated by `e^{Z}` exactly on the grid.
pub fn kam_reduce_local(c: &QpCocycle, max_steps: usize, settings: &Settings) -> Result<KamResult> {
    if c.map.period() != 1.0 {
        return Err(Error::ConfigInvalid("KAM loop needs a 1-periodic map".into()));
    }
    let g = c.map.grid_len();
    let alpha = c.alpha;
    let mut a: Vec<Mat2C> = c.map.samples().iter().map(sl2_to_su11).collect();
    let mean_a: C64 = a.iter().map(|m| m.a).sum::<C64>() / g as f64;
    let mut phi = mean_a.arg();
    let start = a.iter().map(|m| (*m - rot_su11(phi)).op_norm()).fold(0.0, f64::max);
    if start > settings.normal_form_eps0 {
        return Err(Error::StepTooLarge { size: start, eps0: settings.normal_form_eps0 });
    }
    let mut factors: Vec<Su11Poly> = Vec::new();
    let mut steps = Vec::new();
    let mut rises = 0;
    let final_defect = loop {
        let (p, u, defect) = recenter(&a, phi);
        phi = p;
        let n = steps.len();
        if let Some(prev) = steps.last().map(|s: &KamStep| s.defect) {
            rises = if defect > prev { rises + 1 } else { 0 };
        }
        let trunc = (1.5f64.powi(n as i32).exp().ceil() as usize).min(g / 4);
        steps.push(KamStep { step: n, truncation: trunc, defect, correction: 0.0 });
        if defect <= KAM_TARGET {
            break defect;
        }
        if rises >= 2 || n >= max_steps {
            return Err(Error::Diverged { step: n });
        }
        let up = Su11Poly::from_samples(&u, trunc)?;
        let mut z = Su11Poly::zero(trunc);
        let twist = cis(-2.0 * phi);
        for k in -(trunc as i64)..=trunc as i64 {
            let w = cis(TWO_PI * k as f64 * alpha);
            let dn = twist * w - 1.0;
            if dn.norm() < RESONANCE_TOL {
                return Err(Error::ResonanceHit { k, divisor: dn.norm() });
            }
            z.nu.set_coeff(k, -up.nu.coeff(k) / dn);
            if k != 0 {
                let dt = w - 1.0;
                if dt.norm() < RESONANCE_TOL {
                    return Err(Error::ResonanceHit { k, divisor: dt.norm() });
                }
                z.t.set_coeff(k, -up.t.coeff(k) / dt);
            }
        }
        let za = z.shifted(alpha).samples(g);
        let z0 = z.samples(g);
        a = a
            .par_iter()
            .enumerate()
            .map(|(j, m)| za[j].exp() * *m * Su11Vector::new(-z0[j].t, -z0[j].nu).exp())
            .collect();
        steps.last_mut().expect("step pushed").correction = z.cs_norm(0);
        factors.push(z);
    };
    let constant = su11_to_sl2(&rot_su11(phi));
    let expr = if factors.is_empty() {
        MapExpr::Const { m: Mat2R::IDENTITY }
    } else {
        MapExpr::Product {
            factors: factors
                .iter()
                .map(|z| {
                    let coeffs = z.to_algebra_trig().into_iter().map(|(k, m)| (k, m.map(|x| -x))).collect();
                    MapExpr::ExpTrig { coeffs }
                })
                .collect(),
        }
    };
    let conjugacy = Sl2Map::with_grid(expr, g)?;
    let check = (0..g)
        .into_par_iter()
        .map(|j| {
            let theta = (j as f64 + 0.5) / g as f64;
            let m = conjugacy.eval(theta + alpha).inv_unimodular() * c.eval(theta) * conjugacy.eval(theta);
            (m - constant).op_norm()
        })
        .reduce(|| 0.0, f64::max);
    Ok(KamResult { conjugacy, constant, angle: (phi / TWO_PI).rem_euclid(1.0), steps, final_defect, check })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RigidityResult {
    pub constant: Mat2R,
    /// Largest `‖D̂(k)‖/‖D̂(0)‖` over `k ≠ 0` and where it occurs.
    pub max_relative_mode: f64,
    pub max_mode: i64,
    /// `max_k ‖A₀D̂(k)A₀⁻¹ − e^{2πikα}D̂(k)‖`.
    pub annihilation: f64,
}

/// Checks that a transition `D` between two conjugacies to the elliptic
/// constant `A₀` has no nonzero Fourier modes and returns its mean.
pub fn rigidity_conjugacy(d: &[Mat2R], a0: &Mat2R, alpha: f64) -> Result<RigidityResult> {
    let trace = a0.trace().abs();
    if trace >= 2.0 {
        return Err(Error::NotElliptic { trace });
    }
    let m = d.len();
    let cols: Vec<Vec<C64>> = [
        d.iter().map(|x| x.a).collect::<Vec<_>>(),
        d.iter().map(|x| x.b).collect(),
        d.iter().map(|x| x.c).collect(),
        d.iter().map(|x| x.d).collect(),
    ]
    .iter()
    .map(|c| spectral::forward_real(c))
    .collect();
    let mode = |j: usize| Mat2C::new(cols[0][j], cols[1][j], cols[2][j], cols[3][j]);
    let base = mode(0).op_norm();
    let (a0c, a0i) = (a0.to_complex(), a0.inv_unimodular().to_complex());
    let (mut worst, mut worst_k, mut annihilation) = (0.0f64, 0i64, 0.0f64);
    for j in 1..m {
        let k = spectral::mode(j, m);
        let dk = mode(j);
        let rel = dk.op_norm() / base;
        if rel > worst {
            worst = rel;
            worst_k = k;
        }
        let res = a0c * dk * a0i - dk.scale(cis(TWO_PI * k as f64 * alpha));
        annihilation = annihilation.max(res.op_norm());
    }
    if worst > RIGIDITY_TOL {
        return Err(Error::NonconstantMode { k: worst_k, size: worst });
    }
    Ok(RigidityResult { constant: mode(0).re(), max_relative_mode: worst, max_mode: worst_k, annihilation })
}

/// `(C, φ)` with `A₀ = C·R_φ·C⁻¹`, `det C = 1`, `φ` in turns.
pub fn rotation_normal_form(a0: &Mat2R) -> Result<(Mat2R, f64)> {
    let trace = a0.trace();
    if trace.abs() >= 2.0 {
        return Err(Error::NotElliptic { trace: trace.abs() });
    }
    let theta = (trace / 2.0).acos();
    for sign in [1.0, -1.0] {
        let lam = cis(-sign * theta);
        let v = if a0.b.abs() >= a0.c.abs() {
            [C64::new(a0.b, 0.0), lam - a0.a]
        } else {
            [lam - a0.d, C64::new(a0.c, 0.0)]
        };
        let c = Mat2R::new(v[0].re, v[0].im, v[1].re, v[1].im);
        let det = c.det();
        if det > 0.0 {
            let c = c.scale(1.0 / det.sqrt());
            return Ok((c, (sign * theta / TWO_PI).rem_euclid(1.0)));
        }
    }
    Err(Error::NotElliptic { trace: trace.abs() })
}

#[derive(Debug, Clone)]
pub struct HyperbolicNeighbor {
    pub map: Sl2Map,
    pub k: i64,
    /// `log` of the spectral radius of `H`.
    pub h: f64,
    pub conj: Mat2R,
    /// Rotation angle of `A₀` in turns.
    pub angle: f64,
    pub distance: f64,
}

fn circle_dist(x: f64) -> f64 {
    let d = x.rem_euclid(1.0);
    d.min(1.0 - d)
}

/// `A(θ) = C·R_{k(θ+α)}·H·R_{−kθ}·C⁻¹` with `H = diag(e^h, e^{−h})`, which
/// is conjugate to the constant `H` and lies within `C^s` distance `ε` of
/// `A₀ = C·R_φ·C⁻¹`. `k` is the smallest `|k|` with `R_{kα}` close enough
/// to `R_φ`.
pub fn hyperbolic_neighbor(a0: &Mat2R, alpha: f64, eps: f64, s: u32, grid: usize) -> Result<HyperbolicNeighbor> {
    if eps <= 0.0 {
        return Err(Error::ConfigInvalid(format!("epsilon must be positive, got {eps}")));
    }
    let (c, phi) = rotation_normal_form(a0)?;
    let ci = c.inv_unimodular();
    let kappa = c.op_norm() * ci.op_norm();
    let reach = eps / (4.0 * PI * kappa);
    let k = (0..10_000_000i64)
        .flat_map(|n| if n == 0 { vec![0] } else { vec![n, -n] })
        .find(|&k| circle_dist(phi - k as f64 * alpha) <= reach)
        .ok_or_else(|| Error::ConfigInvalid("no rotation close enough to A0".into()))?;
    let rot = 2.0 * (PI * circle_dist(phi - k as f64 * alpha)).sin();
    let speed = (4.0 * PI * k.unsigned_abs().max(1) as f64).powi(s as i32);
    let bound = (eps / kappa - rot).min(eps / (kappa * speed)) / 1.05;
    let mut h = bound.ln_1p();
    let target = Sl2Map::with_grid(MapExpr::Const { m: *a0 }, grid)?;
    for _ in 0..40 {
        let hm = Mat2R::new(h.exp(), 0.0, 0.0, (-h).exp());
        let expr = MapExpr::Product {
            factors: vec![
                MapExpr::Const { m: c },
                MapExpr::Shift { c: alpha, of: Box::new(MapExpr::RotPath { r: k as f64 }) },
                MapExpr::Const { m: hm },
                MapExpr::RotPath { r: -(k as f64) },
                MapExpr::Const { m: ci },
            ],
        };
        let map = Sl2Map::with_grid(expr, grid)?;
        let distance = crate::cocycle::cs_distance(&map, &target, s)?;
        if distance <= eps {
            return Ok(HyperbolicNeighbor { map, k, h, conj: c, angle: phi, distance });
        }
        h /= 2.0;
    }
    Err(Error::ConfigInvalid("could not fit a hyperbolic perturbation within epsilon".into()))
}

/// Pushes the cone field `K(θ) = C·R_{kθ}·{|v₂| ≤ |v₁|}` through the
/// cocycle and returns the largest slope `|w₂/w₁|` of an image boundary
/// direction in the coordinates of `K(θ+α)`; below one means strict
/// invariance.
pub fn neighbor_cone_test(nb: &HyperbolicNeighbor, alpha: f64, samples: usize) -> f64 {
    let ci = nb.conj.inv_unimodular();
    (0..samples)
        .into_par_iter()
        .map(|j| {
            let theta = (j as f64 + 0.5) / samples as f64;
            let frame = nb.conj * Mat2R::rotation_turns(nb.k as f64 * theta);
            let back = Mat2R::rotation_turns(-(nb.k as f64) * (theta + alpha)) * ci;
            let a = nb.map.eval(theta);
            [[1.0, 1.0], [1.0, -1.0]]
                .iter()
                .map(|&v| {
                    let w = back.apply(a.apply(frame.apply(v)));
                    (w[1] / w[0]).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct Destabilizer {
    /// Zero of `c` (upper-right entry of `B`).
    pub x: f64,
    /// Zero of `d` (lower-right entry of `B`).
    pub y: f64,
    pub delta: f64,
    /// `w` on the grid of `B`.
    pub w: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    /// `λ² − μν`.
    pub margin: f64,
    /// `d(x)²` and `−c(y)²`.
    pub mu_limit: f64,
    pub nu_limit: f64,
}

/// `χ(u) = (315/256)(1 − u²)⁴` on `[−1, 1]`, mass one.
pub fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        315.0 / 256.0 * (1.0 - u * u).powi(4)
    }
}

fn zeros_of(b: &Sl2Map, entry: fn(&Mat2R) -> f64) -> Vec<f64> {
    let n = b.grid_len();
    let p = b.period();
    let s = b.samples();
    let mut out = Vec::new();
    for j in 0..n {
        let (u, v) = (entry(&s[j]), entry(&s[(j + 1) % n]));
        if u == 0.0 {
            out.push(b.node(j));
            continue;
        }
        if u * v > 0.0 || v == 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (b.node(j), b.node(j) + p / n as f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if entry(&b.eval(mid)) * u > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// `∫ χ(u)·g(x − δu) du` by composite Simpson.
fn bump_average(g: &dyn Fn(f64) -> f64, x: f64, delta: f64) -> f64 {
    let n = 2000;
    let h = 2.0 / n as f64;
    let mut acc = 0.0;
    for j in 0..=n {
        let u = -1.0 + j as f64 * h;
        let wgt = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += wgt * bump(u) * g(x - delta * u);
    }
    acc * h / 3.0
}

/// Bump-difference perturbation `w = δ⁻¹χ((x−θ)/δ) − δ⁻¹χ((y−θ)/δ)` built at
/// a zero `x` of `c` and a zero `y` of `d`, with the integrals
/// `λ = ∫wcd`, `μ = ∫wd²`, `ν = ∫wc²`.
pub fn schrodinger_destabilizer(b: &Sl2Map, delta: f64) -> Result<Destabilizer> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::ConfigInvalid(format!("bump width {delta} outside (0, 1/4)")));
    }
    if b.period() != 1.0 {
        return Err(Error::ConfigInvalid("destabilizer needs a 1-periodic conjugacy".into()));
    }
    let deg = degree(b)?;
    if deg == 0 {
        return Err(Error::ConfigInvalid("conjugacy has degree zero".into()));
    }
    let c_of = |m: &Mat2R| m.b;
    let d_of = |m: &Mat2R| m.d;
    let xs = zeros_of(b, c_of);
    if xs.is_empty() {
        return Err(Error::NoZeroFound { entry: "c" });
    }
    let ys = zeros_of(b, d_of);
    if ys.is_empty() {
        return Err(Error::NoZeroFound { entry: "d" });
    }
    let mut best = (0.0, xs[0], ys[0]);
    for &x in &xs {
        let dx = d_of(&b.eval(x)).abs();
        for &y in &ys {
            let score = dx * c_of(&b.eval(y)).abs();
            if score > best.0 {
                best = (score, x, y);
            }
        }
    }
    let (score, x, y) = best;
    if score < 1e-12 {
        return Err(Error::ZerosCoincide { at: x });
    }
    let cd = |t: f64| {
        let m = b.eval(t);
        m.b * m.d
    };
    let dd = |t: f64| b.eval(t).d.powi(2);
    let cc = |t: f64| b.eval(t).b.powi(2);
    let diff = |g: &dyn Fn(f64) -> f64| bump_average(g, x, delta) - bump_average(g, y, delta);
    let (lambda, mu, nu) = (diff(&cd), diff(&dd), diff(&cc));
    let w = (0..b.grid_len())
        .map(|j| {
            let t = b.node(j);
            let ux = ((x - t + 0.5).rem_euclid(1.0) - 0.5) / delta;
            let uy = ((y - t + 0.5).rem_euclid(1.0) - 0.5) / delta;
            (bump(ux) - bump(uy)) / delta
        })
        .collect();
    Ok(Destabilizer {
        x,
        y,
        delta,
        w,
        lambda,
        mu,
        nu,
        margin: lambda * lambda - mu * nu,
        mu_limit: d_of(&b.eval(x)).powi(2),
        nu_limit: -c_of(&b.eval(y)).powi(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{fibered_rotation_number, lyapunov_exponent, rotation_distance};

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    fn real_mode(k: i64, v: f64) -> TrigPoly {
        TrigPoly::from_trig(&[(k, v)])
    }

    #[test]
    fn trig_round_trip() {
        let p = TrigPoly::from_trig(&[(0, 0.3), (2, 1.5), (-3, -0.7)]);
        assert!(p.is_real(1e-15));
        let x = 0.137;
        let direct = 0.3 + 1.5 * (2.0 * TWO_PI * x).cos() - 0.7 * (3.0 * TWO_PI * x).sin();
        assert!((p.eval(x).re - direct).abs() < 1e-14);
        let back = p.to_trig();
        assert!(back.iter().any(|&(k, v)| k == -3 && (v + 0.7).abs() < 1e-14));
        let s = p.samples(32);
        let q = TrigPoly::from_samples(&s, 3).unwrap();
        assert!((q - p).l1_coeffs() < 1e-13);
    }

    #[test]
    fn translation_single_mode() {
        let f = real_mode(1, 1.0);
        let sol = solve_translation_cohomology(&f, GOLDEN, 8).unwrap();
        assert!(sol.residual <= 1e-10);
        let nonzero: Vec<i64> = sol.y.modes().filter(|(_, c)| c.norm() > 1e-15).map(|(k, _)| k).collect();
        assert_eq!(nonzero, vec![-1, 1]);
        let x = 0.31;
        let lhs = sol.y.eval(x + GOLDEN) - sol.y.eval(x);
        assert!((lhs.re - (TWO_PI * x).cos()).abs() < 1e-12);
    }

    #[test]
    fn translation_constant_and_resonance() {
        let f = real_mode(0, 2.0);
        let sol = solve_translation_cohomology(&f, GOLDEN, 4).unwrap();
        assert!(sol.y.l1_coeffs() == 0.0);
        let err = solve_translation_cohomology(&real_mode(2, 1.0), 0.5, 4).unwrap_err();
        assert!(matches!(err, Error::SmallDivisor { k: 2, .. }));
    }

    #[test]
    fn twisted_single_mode_and_passthrough() {
        let g = TrigPoly::from_modes(1, &[(1, C64::new(1.0, 0.0))]);
        let sol = solve_twisted_cohomology(&g, GOLDEN, 1, 16).unwrap();
        assert!(sol.residual <= 1e-10);
        let nonzero: Vec<i64> = sol.nu.modes().filter(|(_, c)| c.norm() > 1e-15).map(|(k, _)| k).collect();
        assert_eq!(nonzero, vec![1]);
        assert!((sol.band.coeff(-1) - cis(TWO_PI * GOLDEN)).norm() < 1e-15);
        assert_eq!(sol.band.coeff(0), C64::new(0.0, 0.0));

        let g = TrigPoly::from_modes(3, &[(0, C64::new(0.5, 0.2)), (-3, C64::new(0.1, 0.0)), (-1, C64::new(0.0, 1.0))]);
        let sol = solve_twisted_cohomology(&g, GOLDEN, 2, 8).unwrap();
        assert!(sol.nu.l1_coeffs() < 1e-15);
        assert_eq!(sol.band.order(), 3);
        assert!((sol.band.clone() - g.clone()).l1_coeffs() < 1e-15);
        assert!(sol.residual <= 1e-12);
    }

    #[test]
    fn twisted_generic_residual() {
        let modes: Vec<(i64, C64)> = (-10i64..=10).map(|k| (k, C64::new(1.0 / (1 + k * k) as f64, 0.3 / (2 + k.abs()) as f64))).collect();
        let g = TrigPoly::from_modes(10, &modes);
        for r in 1..=3 {
            let sol = solve_twisted_cohomology(&g, GOLDEN, r, 10).unwrap();
            assert!(sol.residual <= 1e-12, "r = {r}: {}", sol.residual);
        }
    }

    fn single_mode(size: f64, k: i64, m: usize) -> Vec<Su11Vector> {
        (0..m).map(|j| Su11Vector::new(0.0, cis(TWO_PI * k as f64 * j as f64 / m as f64) * size)).collect()
    }

    fn loose() -> Settings {
        Settings { normal_form_eps0: 1e9, ..Settings::default() }
    }

    #[test]
    fn normal_form_zero_and_quadratic() {
        let zero = vec![Su11Vector::default(); 256];
        let out = normal_form_step(&zero, GOLDEN, 1, 32, &Settings::default()).unwrap();
        assert!(out.norms.f[0] < 1e-14);
        assert_eq!(out.norms.z[0], 0.0);
        let big = normal_form_step(&single_mode(1e-2, 3, 256), GOLDEN, 1, 32, &loose()).unwrap();
        let small = normal_form_step(&single_mode(1e-3, 3, 256), GOLDEN, 1, 32, &loose()).unwrap();
        let ratio = big.norms.f[0] / small.norms.f[0];
        assert!((50.0..=200.0).contains(&ratio), "ratio {ratio}");
        assert!(big.identity_residual < 1e-13);
        assert!((big.conjugacy_defect - big.norms.f[0]).abs() <= 0.05 * big.norms.f[0]);
    }

    #[test]
    fn normal_form_resonant_passthrough() {
        let u = single_mode(1e-3, -1, 256);
        let out = normal_form_step(&u, GOLDEN, 1, 32, &loose()).unwrap();
        assert!(out.norms.z[0] < 1e-15);
        assert!(out.norms.f[0] <= 1e-12);
        assert!((out.gamma.nu.coeff(-1) - C64::new(1e-3, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn normal_form_precondition() {
        let err = normal_form_step(&single_mode(1e-3, 3, 256), GOLDEN, 1, 32, &Settings::default()).unwrap_err();
        assert_eq!(err.code(), "STEP_TOO_LARGE");
    }

    #[test]
    fn lambda_monitor_band() {
        let m = lambda_2r_monitor(&single_mode(1e-3, 3, 128), 1);
        assert!(m.lhs < 1e-15);
        assert!((m.rhs - 1e-3).abs() < 1e-12);
        let m = lambda_2r_monitor(&single_mode(1e-3, -1, 128), 1);
        assert!((m.lhs - 1e-3).abs() < 1e-12 && m.rhs < 1e-15);
    }

    fn near_rotation(psi: f64, size: f64) -> QpCocycle {
        let u = vec![
            (1, [size, 0.3 * size, -0.2 * size, -size]),
            (-2, [0.0, size, 0.5 * size, 0.0]),
            (3, [0.4 * size, -0.6 * size, 0.0, -0.4 * size]),
        ];
        let expr = MapExpr::Product {
            factors: vec![MapExpr::Const { m: Mat2R::rotation_turns(psi) }, MapExpr::ExpTrig { coeffs: u }],
        };
        QpCocycle::new(GOLDEN, Sl2Map::with_grid(expr, 1024).unwrap())
    }

    #[test]
    fn kam_reduces_near_rotation() {
        let c = near_rotation(0.23, 1e-4);
        let out = kam_reduce_local(&c, 8, &Settings::default()).unwrap();
        assert!(out.final_defect <= KAM_TARGET);
        assert!(out.steps.len() - 1 <= 6);
        assert!(out.check <= 1e-8, "check {}", out.check);
        let rho = fibered_rotation_number(&c, 100_000, 0.0, 0.0).unwrap();
        assert!(rotation_distance(rho.value, out.angle) < 3e-4);
    }

    #[test]
    fn kam_constant_and_resonant() {
        let c = QpCocycle::new(GOLDEN, Sl2Map::with_grid(MapExpr::Const { m: Mat2R::rotation_turns(0.2) }, 256).unwrap());
        let out = kam_reduce_local(&c, 8, &Settings::default()).unwrap();
        assert_eq!(out.steps.len(), 1);
        assert_eq!(out.conjugacy.expr(), &MapExpr::Const { m: Mat2R::IDENTITY });
        let err = kam_reduce_local(&near_rotation(GOLDEN / 2.0, 1e-4), 8, &Settings::default()).unwrap_err();
        assert_eq!(err.code(), "RESONANCE_HIT");
    }

    #[test]
    fn rigidity_of_two_conjugacies() {
        let b = MapExpr::ExpTrig { coeffs: vec![(1, [0.1, 0.05, -0.02, -0.1]), (-2, [0.0, 0.03, 0.04, 0.0])] };
        let (cst, r, psi) = (0.37, 2i64, 0.21);
        let bt = MapExpr::Product {
            factors: vec![b.clone(), MapExpr::Const { m: Mat2R::rotation_turns(cst) }, MapExpr::RotPath { r: r as f64 }],
        };
        let d: Vec<Mat2R> = (0..256)
            .map(|j| {
                let t = j as f64 / 256.0;
                b.eval(t).inv_unimodular() * bt.eval(t) * Mat2R::rotation_turns(-(r as f64) * t)
            })
            .collect();
        let a0 = Mat2R::rotation_turns(psi);
        let out = rigidity_conjugacy(&d, &a0, GOLDEN).unwrap();
        assert!(out.constant.dist(&Mat2R::rotation_turns(cst)) < 1e-6);
        let injected: Vec<Mat2R> = d
            .iter()
            .enumerate()
            .map(|(j, m)| *m + Mat2R::new(0.0, 1e-3, 0.0, 0.0).scale((3.0 * TWO_PI * j as f64 / 256.0).cos()))
            .collect();
        match rigidity_conjugacy(&injected, &a0, GOLDEN).unwrap_err() {
            Error::NonconstantMode { k, .. } => assert_eq!(k.abs(), 3),
            e => panic!("unexpected {e}"),
        }
        assert_eq!(rigidity_conjugacy(&d, &Mat2R::diag(2.0), GOLDEN).unwrap_err().code(), "NOT_ELLIPTIC");
    }

    #[test]
    fn rotation_normal_form_recovers_angle() {
        let q = Mat2R::new(2.0, 1.0, 1.0, 1.0);
        let a0 = q * Mat2R::rotation_turns(0.3) * q.inv_unimodular();
        let (c, phi) = rotation_normal_form(&a0).unwrap();
        assert!((phi - 0.3).abs() < 1e-12);
        assert!((c.det() - 1.0).abs() < 1e-12);
        assert!((c * Mat2R::rotation_turns(phi) * c.inv_unimodular()).dist(&a0) < 1e-12);
        let (_, phi) = rotation_normal_form(&Mat2R::rotation_turns(0.8)).unwrap();
        assert!((phi - 0.8).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_neighbor_is_close_and_hyperbolic() {
        let a0 = Mat2R::rotation_turns(0.3);
        let nb = hyperbolic_neighbor(&a0, GOLDEN, 0.1, 2, 4096).unwrap();
        assert!(nb.distance <= 0.1);
        assert!(nb.h > 0.0);
        assert!(neighbor_cone_test(&nb, GOLDEN, 512) < 1.0);
        let nb_wide = hyperbolic_neighbor(&a0, GOLDEN, 0.5, 2, 4096).unwrap();
        assert!(nb_wide.k.abs() <= nb.k.abs());
        let c = QpCocycle::new(GOLDEN, nb.map.clone());
        let l = lyapunov_exponent(&c, 2_000_000, 1);
        assert!((l.mean - nb.h).abs() < 1e-6);
    }

    #[test]
    fn destabilizer_on_e1() {
        let b = Sl2Map::rotation_path(1);
        let out = schrodinger_destabilizer(&b, 0.02).unwrap();
        assert!(out.margin > 0.0);
        assert!(out.mu > 0.0 && out.nu < 0.0);
        assert!((out.mu - out.mu_limit).abs() <= 0.05 * out.mu_limit.abs());
        assert!((out.nu - out.nu_limit).abs() <= 0.05 * out.nu_limit.abs());
        let mass: f64 = out.w.iter().sum::<f64>() / out.w.len() as f64;
        assert!(mass.abs() < 1e-9);
        let err = schrodinger_destabilizer(&Sl2Map::constant(Mat2R::rotation_turns(0.1)), 0.02).unwrap_err();
        assert_eq!(err.code(), "CONFIG_INVALID");
    }
}
