//! Fibered Z²-actions on ℝ × SL(2,R), basis changes, normalization,
//! rescaling and the `(U_k, V_k)` renormalization sequence.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::QpCocycle;
use crate::continued_fractions::{half_lattice_distance, int_det, CfExpansion, IntMat};
use crate::error::{Error, Result};
use crate::invariants::{rotation_of_path, AngleTable, Lift};
use crate::sl2_geometry::Mat2R;
use crate::spectral;

pub type MapFn = Arc<dyn Fn(f64) -> Mat2R + Send + Sync>;

pub const DEFAULT_DOMAIN: (f64, f64) = (-5.0, 6.0);

/// `(t, y) ↦ (t + γ, D(t)y)`.
#[derive(Clone)]
pub struct FiberedMap {
    pub gamma: f64,
    map: MapFn,
    identity: bool,
}

impl fmt::Debug for FiberedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiberedMap").field("gamma", &self.gamma).field("identity", &self.identity).finish()
    }
}

impl FiberedMap {
    pub fn new(gamma: f64, f: impl Fn(f64) -> Mat2R + Send + Sync + 'static) -> Self {
        FiberedMap { gamma, map: Arc::new(f), identity: false }
    }

    pub fn from_fn(gamma: f64, map: MapFn) -> Self {
        FiberedMap { gamma, map, identity: false }
    }

    /// `(γ, Id)`.
    pub fn translation(gamma: f64) -> Self {
        FiberedMap { gamma, map: Arc::new(|_| Mat2R::IDENTITY), identity: true }
    }

    pub fn is_translation(&self) -> bool {
        self.identity
    }

    pub fn eval(&self, t: f64) -> Mat2R {
        (self.map)(t)
    }

    pub fn map_fn(&self) -> MapFn {
        self.map.clone()
    }

    pub fn apply(&self, t: f64, y: [f64; 2]) -> (f64, [f64; 2]) {
        (t + self.gamma, self.eval(t).apply(y))
    }

    /// `self ∘ other`: `(γ + γ', C(t + γ')D(t))`.
    pub fn compose(&self, other: &FiberedMap) -> FiberedMap {
        let gamma = self.gamma + other.gamma;
        match (self.identity, other.identity) {
            (true, true) => FiberedMap::translation(gamma),
            (true, false) => FiberedMap { gamma, map: other.map.clone(), identity: false },
            (false, true) => {
                let (c, g) = (self.map.clone(), other.gamma);
                FiberedMap::new(gamma, move |t| c(t + g))
            }
            (false, false) => {
                let (c, d, g) = (self.map.clone(), other.map.clone(), other.gamma);
                FiberedMap::new(gamma, move |t| c(t + g) * d(t))
            }
        }
    }

    /// `(−γ, D(t − γ)⁻¹)`.
    pub fn inverse(&self) -> FiberedMap {
        if self.identity {
            return FiberedMap::translation(-self.gamma);
        }
        let (d, g) = (self.map.clone(), self.gamma);
        FiberedMap::new(-g, move |t| d(t - g).inv_unimodular())
    }

    /// `n`-th iterate by repeated squaring.
    pub fn pow(&self, n: i64) -> FiberedMap {
        let mut base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = FiberedMap::translation(0.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }

    /// Conjugate by the dilation `t ↦ λt`: `(γ/λ, D(λt))`.
    pub fn rescaled(&self, lambda: f64) -> FiberedMap {
        if self.identity {
            return FiberedMap::translation(self.gamma / lambda);
        }
        let d = self.map.clone();
        FiberedMap::new(self.gamma / lambda, move |t| d(lambda * t))
    }

    /// `(γ, B(t + γ)⁻¹D(t)B(t))`.
    pub fn conjugated(&self, b: &MapFn) -> FiberedMap {
        let (d, b, g) = (self.map.clone(), b.clone(), self.gamma);
        FiberedMap::new(g, move |t| b(t + g).inv_unimodular() * d(t) * b(t))
    }
}

/// A commuting pair of fibered maps, sampled on `domain` when needed.
#[derive(Debug, Clone)]
pub struct FiberedAction {
    pub gen1: FiberedMap,
    pub gen2: FiberedMap,
    pub domain: (f64, f64),
    origin: Option<QpCocycle>,
}

impl FiberedAction {
    pub fn new(gen1: FiberedMap, gen2: FiberedMap, domain: (f64, f64)) -> Self {
        FiberedAction { gen1, gen2, domain, origin: None }
    }

    pub fn frequencies(&self) -> (f64, f64) {
        (self.gen1.gamma, self.gen2.gamma)
    }

    /// `gen1ⁿ ∘ gen2ᵐ`.
    pub fn element(&self, n: i64, m: i64) -> FiberedMap {
        self.gen1.pow(n).compose(&self.gen2.pow(m))
    }

    /// The cocycle this action was built from, while untouched.
    pub fn to_cocycle(&self) -> Option<QpCocycle> {
        self.origin.clone()
    }

    pub fn nodes(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.domain;
        (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1).max(1) as f64).collect()
    }

    /// `sup ‖C(t+γ₂)A(t) − A(t+γ₁)C(t)‖` over `n` domain nodes.
    pub fn commutation_defect(&self, n: usize) -> f64 {
        let (g1, g2) = (&self.gen1, &self.gen2);
        self.nodes(n)
            .into_par_iter()
            .map(|t| {
                let lhs = g1.eval(t + g2.gamma) * g2.eval(t);
                let rhs = g2.eval(t + g1.gamma) * g1.eval(t);
                (lhs - rhs).op_norm()
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn rescaled(&self, lambda: f64) -> FiberedAction {
        FiberedAction::new(self.gen1.rescaled(lambda), self.gen2.rescaled(lambda), self.domain)
    }

    pub fn conjugated(&self, b: &MapFn) -> FiberedAction {
        FiberedAction::new(self.gen1.conjugated(b), self.gen2.conjugated(b), self.domain)
    }
}

/// `gen1 = (1, Id)`, `gen2 = (α, A)`.
pub fn action_from_cocycle(c: &QpCocycle) -> Result<FiberedAction> {
    action_from_shifted(c, 0.0)
}

/// The action of `(α, A(· − ν))`.
pub fn action_from_shifted(c: &QpCocycle, nu: f64) -> Result<FiberedAction> {
    if c.map.period() != 1.0 {
        return Err(Error::ConfigInvalid("actions need a 1-periodic map".into()));
    }
    let map = c.map.clone();
    let gen2 = if nu == 0.0 {
        FiberedMap::new(c.alpha, move |t| map.eval(t))
    } else {
        FiberedMap::new(c.alpha, move |t| map.eval(t - nu))
    };
    let mut act = FiberedAction::new(FiberedMap::translation(1.0), gen2, DEFAULT_DOMAIN);
    if nu == 0.0 {
        act.origin = Some(c.clone());
    }
    Ok(act)
}

/// New generators `gen_i' = gen1^{M[i][0]} ∘ gen2^{M[i][1]}`.
pub fn change_basis(act: &FiberedAction, m: &IntMat) -> Result<FiberedAction> {
    let det = int_det(m);
    if det.abs() != 1 {
        return Err(Error::NotUnimodularBasis { det: det as i64 });
    }
    let g1 = act.element(m[0][0] as i64, m[0][1] as i64);
    let g2 = act.element(m[1][0] as i64, m[1][1] as i64);
    Ok(FiberedAction::new(g1, g2, act.domain))
}

/// `C^∞` step: 0 on `(−∞, 0.1]`, 1 on `[0.9, ∞)`.
pub fn smooth_step(t: f64) -> f64 {
    let f = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let u = (t - 0.1) / 0.8;
    let (a, b) = (f(u), f(1.0 - u));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

const BLEND_NODES: usize = 1024;

/// Conjugate an action with `gen1 = (1, C)` to one with `gen1 = (1, Id)`.
///
/// `B ≡ Id` near 0 and `B = C(t−1)` near 1 on `[0, 1]`, blended along the
/// logarithm of `C(t−1)` (or along its polar factors when that logarithm
/// leaves the real branch), then extended by `B(t+1) = C(t)B(t)`.
pub fn normalize(act: &FiberedAction) -> Result<(FiberedAction, MapFn)> {
    let g1 = act.gen1.gamma;
    if (g1 - 1.0).abs() > 1e-9 {
        return Err(Error::ConfigInvalid(format!("normalization needs gen1 frequency 1, got {g1}")));
    }
    if act.gen1.is_translation() {
        let id: MapFn = Arc::new(|_| Mat2R::IDENTITY);
        return Ok((act.clone(), id));
    }
    let c = act.gen1.map_fn();
    let geodesic = (0..=BLEND_NODES).all(|j| {
        let m = c(j as f64 / BLEND_NODES as f64 - 1.0);
        m.trace() > -2.0 + 1e-6 && m.log().is_some()
    });
    let b0: MapFn = if geodesic {
        let c = c.clone();
        Arc::new(move |t: f64| {
            let chi = smooth_step(t);
            if chi == 0.0 {
                return Mat2R::IDENTITY;
            }
            let l = c(t - 1.0).log().expect("real logarithm on the blend interval");
            l.scale(chi).exp()
        })
    } else {
        let table = AngleTable::on_interval(&*c, -1.0, 0.0, BLEND_NODES)?;
        let c = c.clone();
        Arc::new(move |t: f64| {
            let chi = smooth_step(t);
            if chi == 0.0 {
                return Mat2R::IDENTITY;
            }
            let m = c(t - 1.0);
            let phi = table.branch(m.polar_angle(), t - 1.0);
            let s = Mat2R::rotation(-phi) * m;
            let ls = s.log().expect("positive symmetric factor");
            Mat2R::rotation(chi * phi) * ls.scale(chi).exp()
        })
    };
    let b: MapFn = {
        let c = c.clone();
        Arc::new(move |t: f64| {
            let n = t.floor();
            let s = t - n;
            let mut m = b0(s);
            if n >= 0.0 {
                for j in 0..n as i64 {
                    m = c(s + j as f64) * m;
                }
            } else {
                for j in 1..=(-n) as i64 {
                    m = c(s - j as f64).inv_unimodular() * m;
                }
            }
            m
        })
    };
    let gen2 = act.gen2.conjugated(&b);
    Ok((FiberedAction::new(FiberedMap::translation(1.0), gen2, act.domain), b))
}

/// State `k` of the renormalization: `U_k = (β_{k−1}, A^{(k−1)})`,
/// `V_k = (β_k, A^{(k)})` with `A^{(k)} = A_{(−1)^k q_k}(· − ν)`.
#[derive(Debug, Clone)]
pub struct RenormState {
    pub k: usize,
    pub cf: Arc<CfExpansion>,
    pub cocycle: QpCocycle,
    pub pair: FiberedAction,
    pub nu: f64,
}

impl RenormState {
    pub fn new(c: &QpCocycle, cf: Arc<CfExpansion>, nu: f64) -> Result<Self> {
        if (cf.alpha - c.alpha).abs() > 1e-15 {
            return Err(Error::ConfigInvalid("expansion does not match the cocycle frequency".into()));
        }
        Ok(RenormState { k: 0, cf, cocycle: c.clone(), pair: action_from_shifted(c, nu)?, nu })
    }

    /// `(β_{k−1}, β_k)` from the exact expansion.
    pub fn exact_frequencies(&self) -> (f64, f64) {
        let k = self.k as i64;
        (self.cf.beta(k - 1), self.cf.beta(k))
    }

    pub fn frequency_defect(&self) -> f64 {
        let (b0, b1) = self.exact_frequencies();
        let (g0, g1) = self.pair.frequencies();
        (g0 - b0).abs().max((g1 - b1).abs())
    }

    /// Signed exponents `((−1)^{k−1}q_{k−1}, (−1)^k q_k)` of the generators.
    pub fn exponents(&self) -> (i64, i64) {
        let k = self.k as i64;
        let sign = |j: i64| if j.rem_euclid(2) == 0 { 1 } else { -1 };
        (sign(k - 1) * self.cf.q(k - 1) as i64, sign(k) * self.cf.q(k) as i64)
    }

    pub fn beta_prev(&self) -> f64 {
        self.cf.beta(self.k as i64 - 1)
    }

    pub fn alpha_k(&self) -> f64 {
        self.cf.alpha_k(self.k)
    }
}

/// `U_{k+1} = V_k`, `V_{k+1} = U_k V_k^{−a_{k+1}}`.
pub fn renorm_step(state: &RenormState) -> Result<RenormState> {
    let k = state.k;
    if k + 1 > state.cf.depth() {
        return Err(Error::DepthExhausted { k: k + 1 });
    }
    let a = state.cf.a(k + 1) as i128;
    let pair = change_basis(&state.pair, &[[0, 1], [1, -a]])?;
    Ok(RenormState { k: k + 1, cf: state.cf.clone(), cocycle: state.cocycle.clone(), pair, nu: state.nu })
}

/// States `0..=depth`.
pub fn renormalize(c: &QpCocycle, cf: Arc<CfExpansion>, depth: usize, nu: f64) -> Result<Vec<RenormState>> {
    let mut out = vec![RenormState::new(c, cf, nu)?];
    for _ in 0..depth {
        let next = renorm_step(out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

/// `(Ũ_k, Ṽ_k) = ((1, C̃), (α_k, Ã))` with `C̃(t) = A^{(k−1)}(β_{k−1}t)` and
/// `Ã(t) = A^{(k)}(β_{k−1}t)`.
pub fn rescaled_pair(state: &RenormState) -> Result<FiberedAction> {
    let beta = state.beta_prev();
    if beta <= 1e-12 {
        return Err(Error::Underflow { beta });
    }
    let mut act = state.pair.rescaled(beta);
    act.domain = DEFAULT_DOMAIN;
    Ok(act)
}

const DEGREE_NODES: usize = 64;
const DEGREE_XS: [f64; 4] = [0.0, 0.19, 0.43, 0.71];

fn domain_table(f: &MapFn, domain: (f64, f64)) -> Result<AngleTable> {
    let mut n = 4096;
    loop {
        match AngleTable::on_interval(&**f, domain.0, domain.1, n) {
            Err(Error::GridTooCoarse { .. }) if n < 1 << 16 => n *= 2,
            other => return other,
        }
    }
}

/// Degree of the action with the spread of the sampled values.
pub fn action_degree_detail(act: &FiberedAction) -> Result<(i64, f64)> {
    let (g1, g2) = (&act.gen1, &act.gen2);
    let lc = Lift::from_table(domain_table(&g1.map_fn(), act.domain)?);
    let la = Lift::from_table(domain_table(&g2.map_fn(), act.domain)?);
    let values: Vec<f64> = (0..DEGREE_NODES)
        .into_par_iter()
        .flat_map_iter(|j| {
            let t = j as f64 / DEGREE_NODES as f64;
            let (lc, la) = (&lc, &la);
            DEGREE_XS.iter().map(move |&x| {
                let (dc, x1) = lc.displacement(&g1.eval(t), t, x);
                let (da1, _) = la.displacement(&g2.eval(t + g1.gamma), t + g1.gamma, x1);
                let (da, x2) = la.displacement(&g2.eval(t), t, x);
                let (dc1, _) = lc.displacement(&g1.eval(t + g2.gamma), t + g2.gamma, x2);
                (da1 + dc) - (dc1 + da)
            })
        })
        .collect();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    if spread > 1e-3 {
        return Err(Error::Nonconstant { spread });
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok((mean.round() as i64, spread))
}

/// `(a∘F_c + c) − (c∘F_a + a)` for lifts `c`, `a` of the two generators.
pub fn action_degree(act: &FiberedAction) -> Result<i64> {
    action_degree_detail(act).map(|(d, _)| d)
}

/// Rotation number of an action, meaningful modulo `½(Zγ₁ + Zγ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionRotation {
    pub value: f64,
    pub frequencies: (f64, f64),
    pub residual: f64,
}

impl ActionRotation {
    /// Distance from `value − x` to the half lattice, searching coefficients
    /// of `γ₂/γ₁` up to `k_max`.
    pub fn lattice_distance(&self, x: f64, k_max: i64) -> f64 {
        let (g1, g2) = self.frequencies;
        let rho = (self.value - x) / g1;
        (-k_max..=k_max).map(|k| half_lattice_distance(rho, k, g2 / g1)).fold(f64::INFINITY, f64::min) * g1
    }
}

/// Periodic angle table of a 1-periodic closure; fails on nonzero winding.
fn periodic_table(f: &MapFn, n: usize) -> Result<AngleTable> {
    let t = AngleTable::on_interval(&**f, 0.0, 1.0, n)?;
    let phi = t.angles();
    let winding = ((phi[n] - phi[0]) / (2.0 * PI)).round() as i64;
    if winding != 0 {
        return Err(Error::NonzeroDegree { degree: winding });
    }
    Ok(t.with_period(1.0))
}

pub fn action_rotation_number(act: &FiberedAction, n: usize) -> Result<ActionRotation> {
    let deg = action_degree(act)?;
    if deg != 0 {
        return Err(Error::NonzeroDegree { degree: deg });
    }
    let lambda = act.gen1.gamma;
    let scaled = if (lambda - 1.0).abs() > 1e-12 { act.rescaled(lambda) } else { act.clone() };
    let (norm, _) = normalize(&scaled)?;
    let f = norm.gen2.map_fn();
    let lift = Lift::from_table(periodic_table(&f, 4096)?);
    let g2 = norm.gen2.gamma;
    let r = rotation_of_path(&*f, g2, 1.0, &lift, n, 0.0, 0.0);
    Ok(ActionRotation { value: r.value * lambda, frequencies: (lambda, g2 * lambda), residual: r.residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proximity {
    pub r: i64,
    pub distance: f64,
    /// Mean rotation angle (turns) of the matched model `R_c·E_r`.
    pub constant: f64,
}

const PROXIMITY_NODES: usize = 1024;

/// Distance of the normalized rescaled generator to the closest `R_c·E_r`
/// after removing the periodic coboundary part of its rotation angle.
pub fn proximity_to_rotation_model(state: &RenormState) -> Result<Proximity> {
    let pair = rescaled_pair(state)?;
    let (norm, _) = normalize(&pair)?;
    let alpha = norm.gen2.gamma;
    let f = norm.gen2.map_fn();
    let n = PROXIMITY_NODES;
    let table = AngleTable::on_interval(&*f, 0.0, 1.0, n)?;
    let phi = table.angles();
    let r = ((phi[n] - phi[0]) / (2.0 * PI)).round() as i64;
    let g: Vec<f64> = (0..n).map(|j| phi[j] / (2.0 * PI) - r as f64 * j as f64 / n as f64).collect();
    let gh = spectral::forward_real(&g);
    let mut ph = vec![Complex64::new(0.0, 0.0); n];
    let mut ph_shift = ph.clone();
    for j in 1..n {
        let m = spectral::mode(j, n);
        if j == n / 2 {
            continue;
        }
        let e = Complex64::from_polar(1.0, 2.0 * PI * m as f64 * alpha);
        let div = e - 1.0;
        if div.norm() < 1e-8 {
            continue;
        }
        ph[j] = gh[j] / div;
        ph_shift[j] = ph[j] * e;
    }
    let p: Vec<f64> = spectral::inverse(&ph).iter().map(|z| z.re).collect();
    let p_shift: Vec<f64> = spectral::inverse(&ph_shift).iter().map(|z| z.re).collect();
    let c = gh[0].re;
    let distance = (0..n)
        .into_par_iter()
        .map(|j| {
            let t = j as f64 / n as f64;
            let m = Mat2R::rotation_turns(-p_shift[j]) * f(t) * Mat2R::rotation_turns(p[j]);
            (m - Mat2R::rotation_turns(c + r as f64 * t)).op_norm()
        })
        .reduce(|| 0.0, f64::max);
    Ok(Proximity { r, distance, constant: c.rem_euclid(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{fibered_product, Sl2Map};
    use crate::continued_fractions::expand;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    fn bounded(alpha: f64) -> QpCocycle {
        crate::families::conjugated_rotation(alpha, 0.23, 0.15).unwrap()
    }

    #[test]
    fn composition_and_inverse() {
        let c = bounded(GOLDEN);
        let act = action_from_cocycle(&c).unwrap();
        let g = act.gen2.compose(&act.gen2.inverse());
        assert!(g.gamma.abs() < 1e-15);
        assert!((g.eval(0.37) - Mat2R::IDENTITY).max_abs() < 1e-12);
        let p = act.gen2.pow(5);
        assert!((p.eval(0.2) - fibered_product(&c, 5, 0.2)).max_abs() < 1e-12);
        let p = act.gen2.pow(-3);
        assert!((p.eval(0.2) - fibered_product(&c, -3, 0.2)).max_abs() < 1e-12);
    }

    #[test]
    fn basis_changes() {
        let c = bounded(GOLDEN);
        let act = action_from_cocycle(&c).unwrap();
        let same = change_basis(&act, &[[1, 0], [0, 1]]).unwrap();
        assert_eq!(same.frequencies(), act.frequencies());
        let swap = change_basis(&act, &[[0, 1], [1, 0]]).unwrap();
        assert_eq!(swap.frequencies(), (GOLDEN, 1.0));
        let sum = change_basis(&act, &[[1, 1], [0, 1]]).unwrap();
        assert!((sum.gen1.gamma - (1.0 + GOLDEN)).abs() < 1e-15);
        let direct = act.gen1.compose(&act.gen2);
        assert!((sum.gen1.eval(0.3) - direct.eval(0.3)).max_abs() < 1e-14);
        assert!(sum.commutation_defect(257) < 1e-8);
        assert_eq!(change_basis(&act, &[[2, 0], [0, 1]]).unwrap_err().code(), "NOT_UNIMODULAR_BASIS");
    }

    #[test]
    fn frequencies_follow_expansion() {
        let alpha = 2f64.sqrt() - 1.0;
        let c = bounded(alpha);
        let cf = Arc::new(expand(alpha, 12).unwrap());
        let states = renormalize(&c, cf, 8, 0.0).unwrap();
        for s in &states {
            assert!(s.frequency_defect() < 1e-12, "k = {}", s.k);
        }
        let s = &states[5];
        let (eu, ev) = s.exponents();
        for t in [0.1, 0.7] {
            assert!((s.pair.gen1.eval(t) - fibered_product(&c, eu, t)).max_abs() < 1e-9);
            assert!((s.pair.gen2.eval(t) - fibered_product(&c, ev, t)).max_abs() < 1e-9);
        }
    }

    #[test]
    fn golden_first_step() {
        let c = bounded(GOLDEN);
        let cf = Arc::new(expand(GOLDEN, 10).unwrap());
        let s1 = renorm_step(&RenormState::new(&c, cf, 0.0).unwrap()).unwrap();
        assert!((s1.pair.gen2.gamma - GOLDEN * GOLDEN).abs() < 1e-15);
        assert!((s1.pair.gen1.gamma - GOLDEN).abs() < 1e-15);
    }

    #[test]
    fn rescaled_pair_commutes() {
        let alpha = 2f64.sqrt() - 1.0;
        let c = bounded(alpha);
        let cf = Arc::new(expand(alpha, 12).unwrap());
        let states = renormalize(&c, cf, 5, 0.0).unwrap();
        let p = rescaled_pair(&states[5]).unwrap();
        assert!((p.gen1.gamma - 1.0).abs() < 1e-12);
        assert!((p.gen2.gamma - states[5].alpha_k()).abs() < 1e-12);
        assert!(p.commutation_defect(2049) < 1e-7);
    }

    #[test]
    fn normalize_constant_generator() {
        let h = Mat2R::new(2.0, 1.0, 1.0, 1.0);
        let act = FiberedAction::new(
            FiberedMap::new(1.0, move |_| h),
            FiberedMap::new(GOLDEN, move |_| h),
            DEFAULT_DOMAIN,
        );
        let (norm, b) = normalize(&act).unwrap();
        for t in [-2.3, 0.05, 0.5, 3.7] {
            assert!((b(t + 1.0) - h * b(t)).max_abs() < 1e-10);
            assert!((norm.gen2.eval(t + 1.0) - norm.gen2.eval(t)).max_abs() < 1e-9);
        }
        assert!(norm.commutation_defect(257) < 1e-7);
    }

    #[test]
    fn normalize_rescaled_pair() {
        let alpha = 2f64.sqrt() - 1.0;
        let c = bounded(alpha);
        let cf = Arc::new(expand(alpha, 12).unwrap());
        let states = renormalize(&c, cf, 4, 0.0).unwrap();
        let p = rescaled_pair(&states[4]).unwrap();
        let (norm, b) = normalize(&p).unwrap();
        for t in [-1.5, 0.3, 2.2] {
            assert!((b(t + 1.0) - p.gen1.eval(t) * b(t)).max_abs() < 1e-9);
        }
        assert!(norm.commutation_defect(513) < 1e-7);
    }

    #[test]
    fn degree_of_rotation_paths() {
        for r in [-2, 0, 1, 3] {
            let c = QpCocycle::new(GOLDEN, Sl2Map::rotation_path(r));
            let act = action_from_cocycle(&c).unwrap();
            assert_eq!(action_degree(&act).unwrap().abs(), r.abs());
            let sheared = change_basis(&act, &[[1, 1], [0, 1]]).unwrap();
            assert_eq!(action_degree(&sheared).unwrap(), action_degree(&act).unwrap());
        }
    }

    #[test]
    fn rotation_of_constant_action() {
        let c = QpCocycle::new(GOLDEN, Sl2Map::constant(Mat2R::rotation_turns(0.3)));
        let act = action_from_cocycle(&c).unwrap();
        let r = action_rotation_number(&act, 20_000).unwrap();
        assert!(r.lattice_distance(0.3, 50) < 1e-4);
        let cf = Arc::new(expand(GOLDEN, 10).unwrap());
        let states = renormalize(&c, cf, 3, 0.0).unwrap();
        let r3 = action_rotation_number(&states[3].pair, 20_000).unwrap();
        assert!(r3.frequencies.1 > 0.0);
    }

    #[test]
    fn proximity_examples() {
        let cf = Arc::new(expand(GOLDEN, 10).unwrap());
        let c = QpCocycle::new(GOLDEN, Sl2Map::constant(Mat2R::rotation_turns(0.3)));
        let p = proximity_to_rotation_model(&RenormState::new(&c, cf.clone(), 0.0).unwrap()).unwrap();
        assert_eq!(p.r, 0);
        assert!(p.distance < 1e-9);
        let pert = Sl2Map::rotation_path(2).product(&Sl2Map::exp_trig(vec![(1, [1e-3, 0.0, 0.0, -1e-3])]));
        let c = QpCocycle::new(GOLDEN, pert);
        let p = proximity_to_rotation_model(&RenormState::new(&c, cf, 0.0).unwrap()).unwrap();
        assert_eq!(p.r, 2);
        assert!(p.distance > 1e-4 && p.distance < 3e-3, "{}", p.distance);
    }
}
