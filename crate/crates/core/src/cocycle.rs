//! Quasi-periodic cocycles `(α, A)` over the circle: the map expression
//! tree, fibered products, conjugation, degree and the L operator.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::TOL;
use crate::error::{Error, Result};
use crate::sl2_geometry::{AlgebraVector, Mat2R};
use crate::spectral;

pub const DEFAULT_GRID: usize = 4096;

/// Closed-form description of a map `θ ↦ A(θ) ∈ SL(2,R)`.
///
/// Trigonometric coefficients use the convention `(k, value)` with `k ≥ 0`
/// standing for `value·cos(2πkθ)` and `k < 0` for `value·sin(2π|k|θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapExpr {
    Const { m: Mat2R },
    /// `θ ↦ R_{2πrθ}`; `r` may be a half-integer (period 2).
    RotPath { r: f64 },
    /// `θ ↦ exp(X(θ))` with `X = Σ c_k·trig_k(θ)`, entries `[a, b, c, d]`
    /// projected to their traceless part.
    ExpTrig { coeffs: Vec<(i64, [f64; 4])> },
    /// `θ ↦ [[V(θ) − shift, 1], [−1, 0]]`.
    Schrodinger { potential: Vec<(i64, f64)>, shift: f64 },
    /// Pointwise product, leftmost factor applied last.
    Product { factors: Vec<MapExpr> },
    Inverse { of: Box<MapExpr> },
    /// `θ ↦ A(θ + c)`.
    Shift { c: f64, of: Box<MapExpr> },
    /// `θ ↦ B(θ)·A(θ)·B(θ)⁻¹`.
    Conj { by: Box<MapExpr>, of: Box<MapExpr> },
}

pub fn trig_basis(k: i64, theta: f64) -> f64 {
    if k >= 0 {
        (2.0 * PI * k as f64 * theta).cos()
    } else {
        (2.0 * PI * (-k) as f64 * theta).sin()
    }
}

/// Evaluate a real trigonometric polynomial in the `(k, value)` convention.
pub fn eval_trig(coeffs: &[(i64, f64)], theta: f64) -> f64 {
    coeffs.iter().map(|&(k, v)| v * trig_basis(k, theta)).sum()
}

impl MapExpr {
    pub fn eval(&self, theta: f64) -> Mat2R {
        match self {
            MapExpr::Const { m } => *m,
            MapExpr::RotPath { r } => Mat2R::rotation_turns(r * theta),
            MapExpr::ExpTrig { coeffs } => self::exp_trig_generator(coeffs, theta).exp(),
            MapExpr::Schrodinger { potential, shift } => {
                Mat2R::new(eval_trig(potential, theta) - shift, 1.0, -1.0, 0.0)
            }
            MapExpr::Product { factors } => {
                factors.iter().fold(Mat2R::IDENTITY, |acc, f| acc * f.eval(theta))
            }
            MapExpr::Inverse { of } => of.eval(theta).inv_unimodular(),
            MapExpr::Shift { c, of } => of.eval(theta + c),
            MapExpr::Conj { by, of } => {
                let b = by.eval(theta);
                b * of.eval(theta) * b.inv_unimodular()
            }
        }
    }

    /// 1 or 2.
    pub fn period(&self) -> f64 {
        match self {
            MapExpr::RotPath { r } => {
                if (r - r.round()).abs() < 1e-12 {
                    1.0
                } else {
                    2.0
                }
            }
            MapExpr::Const { .. } | MapExpr::ExpTrig { .. } | MapExpr::Schrodinger { .. } => 1.0,
            MapExpr::Product { factors } => factors.iter().map(|f| f.period()).fold(1.0, f64::max),
            MapExpr::Inverse { of } | MapExpr::Shift { of, .. } => of.period(),
            MapExpr::Conj { by, of } => by.period().max(of.period()),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            MapExpr::Const { m } => {
                let det = m.det();
                if (det - 1.0).abs() > 1e-10 {
                    return Err(Error::NotUnimodular { det });
                }
                Ok(())
            }
            MapExpr::RotPath { r } => {
                if (2.0 * r - (2.0 * r).round()).abs() > 1e-12 {
                    return Err(Error::ConfigInvalid(format!("rotation path rate {r} is not a half-integer")));
                }
                Ok(())
            }
            MapExpr::ExpTrig { .. } | MapExpr::Schrodinger { .. } => Ok(()),
            MapExpr::Product { factors } => factors.iter().try_for_each(|f| f.validate()),
            MapExpr::Inverse { of } | MapExpr::Shift { of, .. } => of.validate(),
            MapExpr::Conj { by, of } => {
                by.validate()?;
                of.validate()
            }
        }
    }
}

pub fn exp_trig_generator(coeffs: &[(i64, [f64; 4])], theta: f64) -> AlgebraVector {
    let mut m = Mat2R::ZERO;
    for &(k, [a, b, c, d]) in coeffs {
        m = m + Mat2R::new(a, b, c, d).scale(trig_basis(k, theta));
    }
    AlgebraVector::from_matrix(&m)
}

/// A map from the circle `R/pZ` (`p ∈ {1, 2}`) to SL(2,R): an expression
/// plus cached samples on `N` equispaced nodes of one period.
#[derive(Debug, Clone)]
pub struct Sl2Map {
    expr: MapExpr,
    period: f64,
    samples: Arc<Vec<Mat2R>>,
}

impl Sl2Map {
    pub fn new(expr: MapExpr) -> Result<Self> {
        Sl2Map::with_grid(expr, DEFAULT_GRID)
    }

    pub fn with_grid(expr: MapExpr, n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::ConfigInvalid(format!("grid size {n} is not a power of two")));
        }
        expr.validate()?;
        let period = expr.period();
        let samples: Vec<Mat2R> =
            (0..n).into_par_iter().map(|j| expr.eval(period * j as f64 / n as f64)).collect();
        if let Some(bad) = samples.iter().find(|m| !m.is_unimodular(1e-10)) {
            return Err(Error::NotUnimodular { det: bad.det() });
        }
        Ok(Sl2Map { expr, period, samples: Arc::new(samples) })
    }

    pub fn constant(m: Mat2R) -> Self {
        Sl2Map::new(MapExpr::Const { m }).expect("constant map")
    }

    /// `E_r(θ) = R_{2πrθ}`.
    pub fn rotation_path(r: i64) -> Self {
        Sl2Map::new(MapExpr::RotPath { r: r as f64 }).expect("rotation path")
    }

    pub fn exp_trig(coeffs: Vec<(i64, [f64; 4])>) -> Self {
        Sl2Map::new(MapExpr::ExpTrig { coeffs }).expect("exp trig")
    }

    pub fn expr(&self) -> &MapExpr {
        &self.expr
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn grid_len(&self) -> usize {
        self.samples.len()
    }

    pub fn node(&self, j: usize) -> f64 {
        self.period * j as f64 / self.samples.len() as f64
    }

    pub fn samples(&self) -> &[Mat2R] {
        &self.samples
    }

    pub fn eval(&self, theta: f64) -> Mat2R {
        self.expr.eval(theta)
    }

    /// Same expression sampled on a grid of size `n`.
    pub fn regrid(&self, n: usize) -> Result<Self> {
        if n == self.grid_len() {
            return Ok(self.clone());
        }
        Sl2Map::with_grid(self.expr.clone(), n)
    }

    pub fn refine(&self) -> Result<Self> {
        self.regrid(2 * self.grid_len())
    }

    pub fn product(&self, other: &Sl2Map) -> Sl2Map {
        self.combine(MapExpr::Product { factors: vec![self.expr.clone(), other.expr.clone()] }, other)
    }

    pub fn inverse(&self) -> Sl2Map {
        self.derived(MapExpr::Inverse { of: Box::new(self.expr.clone()) })
    }

    pub fn shifted(&self, c: f64) -> Sl2Map {
        self.derived(MapExpr::Shift { c, of: Box::new(self.expr.clone()) })
    }

    /// Pointwise `B·A·B⁻¹` with `B = by`.
    pub fn conjugated_by(&self, by: &Sl2Map) -> Sl2Map {
        self.combine(MapExpr::Conj { by: Box::new(by.expr.clone()), of: Box::new(self.expr.clone()) }, by)
    }

    fn derived(&self, expr: MapExpr) -> Sl2Map {
        Sl2Map::with_grid(expr, self.grid_len()).expect("derived map of a valid map")
    }

    fn combine(&self, expr: MapExpr, other: &Sl2Map) -> Sl2Map {
        Sl2Map::with_grid(expr, self.grid_len().max(other.grid_len())).expect("combination of valid maps")
    }

    /// `sup_θ ‖A(θ)‖` over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|m| m.op_norm()).fold(0.0, f64::max)
    }

    /// Grid samples of the entrywise `order`-th derivative.
    pub fn derivative_samples(&self, order: u32) -> Vec<Mat2R> {
        let entries = self.entry_columns();
        let d: Vec<Vec<f64>> = entries.iter().map(|e| spectral::derivative(e, self.period, order)).collect();
        (0..self.grid_len()).map(|j| Mat2R::new(d[0][j], d[1][j], d[2][j], d[3][j])).collect()
    }

    fn entry_columns(&self) -> [Vec<f64>; 4] {
        let s = &self.samples;
        [
            s.iter().map(|m| m.a).collect(),
            s.iter().map(|m| m.b).collect(),
            s.iter().map(|m| m.c).collect(),
            s.iter().map(|m| m.d).collect(),
        ]
    }
}

/// `max_{0≤j≤s} sup_θ ‖∂^j(A − B)(θ)‖` on the finer of the two grids.
/// Derivatives are spectral; orders above 4 are accepted but are estimates only.
pub fn cs_distance(a: &Sl2Map, b: &Sl2Map, s: u32) -> Result<f64> {
    let n = a.grid_len().max(b.grid_len());
    let (a, b) = (a.regrid(n)?, b.regrid(n)?);
    let diff: Vec<Mat2R> = a.samples().iter().zip(b.samples()).map(|(x, y)| *x - *y).collect();
    Ok(cs_norm_samples(&diff, a.period(), s))
}

pub fn cs_norm_samples(samples: &[Mat2R], period: f64, s: u32) -> f64 {
    let cols = [
        samples.iter().map(|m| m.a).collect::<Vec<_>>(),
        samples.iter().map(|m| m.b).collect(),
        samples.iter().map(|m| m.c).collect(),
        samples.iter().map(|m| m.d).collect(),
    ];
    let mut best = 0.0f64;
    for order in 0..=s {
        let d: Vec<Vec<f64>> = cols.iter().map(|e| spectral::derivative(e, period, order)).collect();
        for j in 0..samples.len() {
            best = best.max(Mat2R::new(d[0][j], d[1][j], d[2][j], d[3][j]).op_norm());
        }
    }
    best
}

/// The skew product `(θ, y) ↦ (θ + α, A(θ)y)`.
#[derive(Debug, Clone)]
pub struct QpCocycle {
    pub alpha: f64,
    pub map: Sl2Map,
}

impl QpCocycle {
    pub fn new(alpha: f64, map: Sl2Map) -> Self {
        QpCocycle { alpha, map }
    }

    pub fn eval(&self, theta: f64) -> Mat2R {
        self.map.eval(theta)
    }

    /// The inverse dynamics `(θ, y) ↦ (θ − α, A(θ − α)⁻¹y)`.
    pub fn inverse_cocycle(&self) -> QpCocycle {
        QpCocycle::new(-self.alpha, self.map.shifted(-self.alpha).inverse())
    }
}

/// `A_n(θ)`: `A(θ+(n−1)α)⋯A(θ)` for `n > 0`, `A(θ−|n|α)⁻¹⋯A(θ−α)⁻¹` for `n < 0`.
pub fn fibered_product(c: &QpCocycle, n: i64, theta: f64) -> Mat2R {
    let mut acc = Mat2R::IDENTITY;
    if n >= 0 {
        for j in 0..n {
            acc = c.eval(theta + j as f64 * c.alpha) * acc;
        }
    } else {
        for j in 1..=(-n) {
            acc = c.eval(theta - j as f64 * c.alpha).inv_unimodular() * acc;
        }
    }
    acc
}

/// Continuous (unwrapped) polar angles of the grid samples, in radians.
/// Fails when consecutive increments exceed a quarter turn.
pub fn unwrapped_polar_angles(m: &Sl2Map) -> Result<Vec<f64>> {
    let s = m.samples();
    let mut out = Vec::with_capacity(s.len() + 1);
    let mut prev = s[0].polar_angle();
    out.push(prev);
    for j in 1..=s.len() {
        let raw = s[j % s.len()].polar_angle();
        let mut inc = raw - prev.rem_euclid(2.0 * PI);
        inc = (inc + PI).rem_euclid(2.0 * PI) - PI;
        if inc.abs() > PI / 2.0 {
            return Err(Error::GridTooCoarse { node: j, increment: inc / (2.0 * PI) });
        }
        prev += inc;
        out.push(prev);
    }
    Ok(out)
}

/// Winding number of the rotation part of `m` along one period.
pub fn degree(m: &Sl2Map) -> Result<i64> {
    let phi = unwrapped_polar_angles(m)?;
    let total = phi[phi.len() - 1] - phi[0];
    Ok((total / (2.0 * PI)).round() as i64)
}

/// `(α, B(·+α)A(·)B(·)⁻¹)`.
pub fn conjugate(b: &Sl2Map, c: &QpCocycle) -> QpCocycle {
    let expr = MapExpr::Product {
        factors: vec![
            MapExpr::Shift { c: c.alpha, of: Box::new(b.expr().clone()) },
            c.map.expr().clone(),
            MapExpr::Inverse { of: Box::new(b.expr().clone()) },
        ],
    };
    let n = b.grid_len().max(c.map.grid_len());
    QpCocycle::new(c.alpha, Sl2Map::with_grid(expr, n).expect("conjugate of valid maps"))
}

/// Schrödinger block `[[V(θ) − shift, 1], [−1, 0]]`.
pub fn schrodinger(potential: Vec<(i64, f64)>, energy_shift: f64) -> Sl2Map {
    Sl2Map::new(MapExpr::Schrodinger { potential, shift: energy_shift }).expect("schrodinger map")
}

/// `Lu = (∂u)u⁻¹` on the grid, by spectral differentiation.
pub fn l_operator(m: &Sl2Map) -> Result<Vec<AlgebraVector>> {
    if m.grid_len() < 256 {
        return Err(Error::ConfigInvalid(format!("L operator needs at least 256 nodes, got {}", m.grid_len())));
    }
    let d = m.derivative_samples(1);
    Ok(d.iter().zip(m.samples()).map(|(dm, u)| AlgebraVector::from_matrix(&(*dm * u.inv_unimodular()))).collect())
}

/// Largest trace of `(∂u)u⁻¹` over the grid.
pub fn l_operator_trace_defect(m: &Sl2Map) -> f64 {
    let d = m.derivative_samples(1);
    d.iter().zip(m.samples()).map(|(dm, u)| (*dm * u.inv_unimodular()).trace().abs()).fold(0.0, f64::max)
}

/// `max_{|k|≤K, θ ∈ grid} ‖A_k(θ)‖` and the `k` attaining it.
pub fn boundedness_probe(c: &QpCocycle, k_max: i64) -> Result<(f64, i64)> {
    let n = c.map.grid_len();
    let inv = c.inverse_cocycle();
    let per_node: Vec<(f64, i64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let theta = c.map.node(j);
            let mut best = (1.0, 0i64);
            let mut fwd = Mat2R::IDENTITY;
            let mut bwd = Mat2R::IDENTITY;
            for k in 1..=k_max {
                fwd = c.eval(theta + (k - 1) as f64 * c.alpha) * fwd;
                bwd = inv.eval(theta - (k - 1) as f64 * c.alpha) * bwd;
                let (nf, nb) = (fwd.op_norm(), bwd.op_norm());
                if nf > best.0 {
                    best = (nf, k);
                }
                if nb > best.0 {
                    best = (nb, -k);
                }
                if !(best.0 <= TOL.overflow) {
                    return (f64::INFINITY, best.1);
                }
            }
            best
        })
        .collect();
    let mut best = (1.0, 0i64);
    for &(v, k) in &per_node {
        if v > best.0 {
            best = (v, k);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Overflow { k: best.1 });
    }
    Ok(best)
}

/// Structured text description of a cocycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleDoc {
    pub alpha: f64,
    pub map: MapExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

impl CocycleDoc {
    pub fn build(&self) -> Result<QpCocycle> {
        let map = Sl2Map::with_grid(self.map.clone(), self.grid.unwrap_or(DEFAULT_GRID))?;
        Ok(QpCocycle::new(self.alpha, map))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cocycle document serializes")
    }
}

impl From<&QpCocycle> for CocycleDoc {
    fn from(c: &QpCocycle) -> Self {
        CocycleDoc { alpha: c.alpha, map: c.map.expr().clone(), grid: Some(c.map.grid_len()) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    #[test]
    fn product_base_cases() {
        let c = QpCocycle::new(GOLDEN, Sl2Map::exp_trig(vec![(1, [0.2, 0.1, -0.3, -0.2])]));
        assert_eq!(fibered_product(&c, 0, 0.3), Mat2R::IDENTITY);
        assert_eq!(fibered_product(&c, 1, 0.3), c.eval(0.3));
        let p = fibered_product(&c, -1, 0.3) * fibered_product(&c, 1, 0.3 - GOLDEN);
        assert!((p - Mat2R::IDENTITY).max_abs() < 1e-14);
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree(&Sl2Map::rotation_path(3)).unwrap(), 3);
        assert_eq!(degree(&Sl2Map::constant(Mat2R::new(2.0, 1.0, 1.0, 1.0))).unwrap(), 0);
        let m = Sl2Map::rotation_path(2)
            .product(&Sl2Map::rotation_path(-1))
            .product(&Sl2Map::constant(Mat2R::new(1.0, 0.5, 0.0, 1.0)));
        assert_eq!(degree(&m).unwrap(), 1);
    }

    #[test]
    fn coarse_grid_is_reported() {
        let m = Sl2Map::with_grid(MapExpr::RotPath { r: 5.0 }, 16).unwrap();
        assert_eq!(degree(&m).unwrap_err().code(), "GRID_TOO_COARSE");
    }

    #[test]
    fn schrodinger_examples() {
        let m = schrodinger(vec![], 0.0);
        assert_eq!(m.eval(0.3), Mat2R::new(0.0, 1.0, -1.0, 0.0));
        assert_eq!(degree(&m).unwrap(), 0);
        let m = schrodinger(vec![(1, 2.0)], 0.0);
        for (t, v) in [(0.0, 2.0), (0.25, 0.0), (0.5, -2.0)] {
            assert!((m.eval(t).a - v).abs() < 1e-14);
        }
        assert!(m.samples().iter().all(|s| (s.det() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn l_operator_of_rotation_path() {
        // counter-clockwise rotation generator [[0,-1],[1,0]] is {0,0,-1}
        let l = l_operator(&Sl2Map::rotation_path(2)).unwrap();
        for v in [l[0], l[1000], l[3000]] {
            assert!((v - AlgebraVector::new(0.0, 0.0, -4.0 * PI)).norm() < 1e-9);
        }
        let l = l_operator(&Sl2Map::constant(Mat2R::new(2.0, 1.0, 1.0, 1.0))).unwrap();
        assert!(l.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn boundedness_examples() {
        let c = QpCocycle::new(GOLDEN, Sl2Map::constant(Mat2R::rotation_turns(0.3)));
        assert!((boundedness_probe(&c, 20).unwrap().0 - 1.0).abs() < 1e-12);
        let e = std::f64::consts::E;
        let c = QpCocycle::new(GOLDEN, Sl2Map::with_grid(MapExpr::Const { m: Mat2R::diag(e) }, 8).unwrap());
        let (s, k) = boundedness_probe(&c, 7).unwrap();
        assert!((s / e.powi(7) - 1.0).abs() < 1e-12);
        assert_eq!(k.abs(), 7);
        let c = QpCocycle::new(GOLDEN, Sl2Map::with_grid(MapExpr::Const { m: Mat2R::diag(1e10) }, 8).unwrap());
        assert_eq!(boundedness_probe(&c, 40).unwrap_err().code(), "OVERFLOW");
    }

    #[test]
    fn document_round_trip() {
        let doc = CocycleDoc {
            alpha: GOLDEN,
            map: MapExpr::Product {
                factors: vec![
                    MapExpr::RotPath { r: 1.0 },
                    MapExpr::ExpTrig { coeffs: vec![(0, [0.1, 0.0, 0.0, -0.1]), (-2, [0.0, 0.2, 0.1, 0.0])] },
                ],
            },
            grid: Some(256),
        };
        let text = doc.to_json();
        assert!(text.contains("\"rot_path\"") && text.contains("\"exp_trig\""));
        assert_eq!(CocycleDoc::from_json(&text).unwrap(), doc);
        assert_eq!(doc.build().unwrap().map.grid_len(), 256);
    }

    #[test]
    fn half_integer_path_has_period_two() {
        let m = Sl2Map::new(MapExpr::RotPath { r: 0.5 }).unwrap();
        assert_eq!(m.period(), 2.0);
        assert_eq!(degree(&m).unwrap(), 1);
    }
}
