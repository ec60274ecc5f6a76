//! Test families with known structure: conjugated rotations and conjugated
//! rotation paths.

use crate::cocycle::{MapExpr, QpCocycle, Sl2Map};
use crate::error::Result;
use crate::sl2_geometry::Mat2R;

/// Generator `X(θ)` of the conjugator: three Fourier modes of size
/// `amplitude`, entries `[a, b, c, d]` in the trigonometric convention of
/// [`MapExpr::ExpTrig`].
pub fn conjugator_coeffs(amplitude: f64) -> Vec<(i64, [f64; 4])> {
    let s = amplitude;
    vec![
        (1, [0.6 * s, 0.3 * s, -0.5 * s, -0.6 * s]),
        (-1, [0.2 * s, -0.7 * s, 0.4 * s, -0.2 * s]),
        (2, [-0.4 * s, 0.5 * s, 0.3 * s, 0.4 * s]),
        (-3, [0.3 * s, 0.2 * s, -0.6 * s, -0.3 * s]),
    ]
}

pub fn conjugator(amplitude: f64) -> MapExpr {
    MapExpr::ExpTrig { coeffs: conjugator_coeffs(amplitude) }
}

/// `B(θ+α)·M(θ)·B(θ)⁻¹` for a map expression `M`.
pub fn conjugated_expr(alpha: f64, b: &MapExpr, m: MapExpr) -> MapExpr {
    MapExpr::Product {
        factors: vec![
            MapExpr::Shift { c: alpha, of: Box::new(b.clone()) },
            m,
            MapExpr::Inverse { of: Box::new(b.clone()) },
        ],
    }
}

/// The bounded family `(α, B(θ+α)R_ψB(θ)⁻¹)`, `ψ` in turns.
pub fn conjugated_rotation(alpha: f64, psi: f64, amplitude: f64) -> Result<QpCocycle> {
    conjugated_rotation_on(alpha, psi, amplitude, crate::cocycle::DEFAULT_GRID)
}

pub fn conjugated_rotation_on(alpha: f64, psi: f64, amplitude: f64, grid: usize) -> Result<QpCocycle> {
    let m = MapExpr::Const { m: Mat2R::rotation_turns(psi) };
    let expr = conjugated_expr(alpha, &conjugator(amplitude), m);
    Ok(QpCocycle::new(alpha, Sl2Map::with_grid(expr, grid)?))
}

/// `(α, B(θ+α)E_r(θ)B(θ)⁻¹)`.
pub fn conjugated_path(alpha: f64, r: i64, amplitude: f64) -> Result<QpCocycle> {
    let expr = conjugated_expr(alpha, &conjugator(amplitude), MapExpr::RotPath { r: r as f64 });
    Ok(QpCocycle::new(alpha, Sl2Map::new(expr)?))
}
