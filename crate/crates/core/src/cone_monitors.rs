//! Cone-valued splittings `η_k = η_k⁺ − η_k⁻` of the logarithmic derivatives
//! of the renormalized maps, the integrated monotone quantities built from
//! them, and the decay monitor `ε_k`.
//!
//! All fields live in the original 1-periodic coordinate and are sampled on
//! `N` equispaced nodes of `[0, 1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{boundedness_probe, fibered_product, l_operator, QpCocycle};
use crate::continued_fractions::CfExpansion;
use crate::config::TOL;
use crate::error::{Error, Result};
use crate::sl2_geometry::{cone_margin, minkowski_norm_unchecked, AlgebraVector, Mat2R};
use crate::spectral;

pub type Field = Vec<AlgebraVector>;

const MARGIN_CAP: f64 = 1e12;

#[derive(Debug, Clone, Serialize)]
pub struct ConeDecomposition {
    pub eta_plus: Field,
    pub eta_minus: Field,
    pub delta: f64,
    pub z0: f64,
}

fn field_margin(f: &[AlgebraVector]) -> f64 {
    f.iter().map(cone_margin).fold(f64::INFINITY, f64::min).min(MARGIN_CAP)
}

/// `η₀⁺ ≡ {0, 0, z₀}` with `z₀ = (1 + margin)(sup‖L(A)‖ + 1)` and
/// `η₀⁻ = η₀⁺ − L(A)`, on the grid of `c`.
pub fn decompose_eta0(c: &QpCocycle, margin: f64) -> Result<ConeDecomposition> {
    if !(margin > 0.0) {
        return Err(Error::ConfigInvalid(format!("cone margin must be positive, got {margin}")));
    }
    let l = l_operator(&c.map)?;
    let sup = l.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let z0 = (1.0 + margin) * (sup + 1.0);
    let top = AlgebraVector::new(0.0, 0.0, z0);
    let eta_plus = vec![top; l.len()];
    let eta_minus: Field = l.iter().map(|v| top - *v).collect();
    let delta = field_margin(&eta_plus).min(field_margin(&eta_minus));
    Ok(ConeDecomposition { eta_plus, eta_minus, delta, z0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Block {
    C,
    A,
}

/// One factor `X(t + offset)^{±1}` of a block word, `X` being the level-`l`
/// map `C^{(l)}` or `A^{(l)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Letter {
    pub block: Block,
    pub inverse: bool,
    pub offset: f64,
}

/// Written left to right; the leftmost letter is applied last.
pub type Word = Vec<Letter>;

fn shift_word(w: &[Letter], by: f64) -> Word {
    w.iter().map(|l| Letter { offset: l.offset + by, ..*l }).collect()
}

fn invert_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| Letter { inverse: !l.inverse, ..*l }).collect()
}

/// Words of `C^{(k)}` and `A^{(k)}` in the level-`l` letters, from
/// `c_j(t) = a_{j−1}(t)` and
/// `a_j(t) = c_{j−1}(t − a_jβ_{j−1})·a_{j−1}(t − a_jβ_{j−1})⁻¹⋯a_{j−1}(t − β_{j−1})⁻¹`.
pub fn expand_blocks(cf: &CfExpansion, k: usize, l: usize) -> Result<(Word, Word)> {
    if l >= k {
        return Err(Error::ConfigInvalid(format!("block expansion needs l < k (k = {k}, l = {l})")));
    }
    if k > cf.depth() {
        return Err(Error::DepthExhausted { k });
    }
    let mut c: Word = vec![Letter { block: Block::C, inverse: false, offset: 0.0 }];
    let mut a: Word = vec![Letter { block: Block::A, inverse: false, offset: 0.0 }];
    for j in l + 1..=k {
        let beta = cf.beta(j as i64 - 1);
        let aj = cf.a(j);
        let mut next = shift_word(&c, -(aj as f64) * beta);
        for i in (1..=aj).rev() {
            next.extend(invert_word(&shift_word(&a, -(i as f64) * beta)));
        }
        c = a;
        a = next;
    }
    Ok((c, a))
}

/// `(#C letters, #A letters)`.
pub fn letter_counts(w: &[Letter]) -> (usize, usize) {
    let c = w.iter().filter(|l| l.block == Block::C).count();
    (c, w.len() - c)
}

fn parity_sign(j: i64) -> i64 {
    if j.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Signed exponent of `C^{(l)} = A_{(−1)^{l−1}q_{l−1}}` or `A^{(l)} = A_{(−1)^l q_l}`.
pub fn block_exponent(cf: &CfExpansion, l: usize, block: Block) -> i64 {
    let j = match block {
        Block::C => l as i64 - 1,
        Block::A => l as i64,
    };
    parity_sign(j) * cf.q(j) as i64
}

pub fn nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| j as f64 / n as f64).collect()
}

/// Exact level-`l` matrices at `t_j + offset`.
fn block_matrices(c: &QpCocycle, cf: &CfExpansion, l: usize, block: Block, offset: f64, n: usize) -> Vec<Mat2R> {
    let e = block_exponent(cf, l, block);
    (0..n).into_par_iter().map(|j| fibered_product(c, e, j as f64 / n as f64 + offset)).collect()
}

/// Samples of the trigonometric interpolant of `f` at `t_j + offset`.
pub fn shift_field(f: &[AlgebraVector], offset: f64) -> Field {
    let n = f.len();
    let comps = [
        f.iter().map(|v| v.x).collect::<Vec<_>>(),
        f.iter().map(|v| v.y).collect(),
        f.iter().map(|v| v.z).collect(),
    ];
    let shifted: Vec<Vec<f64>> = comps
        .iter()
        .map(|s| {
            let mut ch = spectral::forward_real(s);
            for (j, cj) in ch.iter_mut().enumerate() {
                if n % 2 == 0 && j == n / 2 {
                    *cj *= (PI * n as f64 * offset).cos();
                    continue;
                }
                let m = spectral::mode(j, n) as f64;
                *cj *= Complex64::from_polar(1.0, 2.0 * PI * m * offset);
            }
            spectral::inverse(&ch).into_iter().map(|z| z.re).collect()
        })
        .collect();
    (0..n).map(|j| AlgebraVector::new(shifted[0][j], shifted[1][j], shifted[2][j])).collect()
}

/// Cone fields of one level: `(γ⁺, γ⁻)` for `C^{(l)}`, `(η⁺, η⁻)` for `A^{(l)}`.
#[derive(Debug, Clone, Serialize)]
pub struct ConeLevel {
    pub k: usize,
    pub eta_plus: Field,
    pub eta_minus: Field,
    pub gamma_plus: Field,
    pub gamma_minus: Field,
    /// Smallest cone margin over the four fields.
    pub margin: f64,
}

impl ConeLevel {
    pub fn eta(&self) -> Field {
        diff(&self.eta_plus, &self.eta_minus)
    }

    pub fn gamma(&self) -> Field {
        diff(&self.gamma_plus, &self.gamma_minus)
    }

    fn pair(&self, block: Block) -> (&Field, &Field) {
        match block {
            Block::C => (&self.gamma_plus, &self.gamma_minus),
            Block::A => (&self.eta_plus, &self.eta_minus),
        }
    }
}

fn diff(a: &[AlgebraVector], b: &[AlgebraVector]) -> Field {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

fn sum(a: &[AlgebraVector], b: &[AlgebraVector]) -> Field {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

/// `(f⁺(w), f⁻(w))` for a word in the letters of `level`, with
/// `f^±(X) = X^±` and `f^±(X⁻¹) = Ad(X⁻¹)X^∓`, transported by the prefixes.
fn word_sum(c: &QpCocycle, cf: &CfExpansion, level: &ConeLevel, l: usize, word: &[Letter]) -> (Field, Field) {
    let n = level.eta_plus.len();
    let data: Vec<(Vec<Mat2R>, Field, Field)> = word
        .iter()
        .map(|letter| {
            let mats = block_matrices(c, cf, l, letter.block, letter.offset, n);
            let (p, m) = level.pair(letter.block);
            (mats, shift_field(p, letter.offset), shift_field(m, letter.offset))
        })
        .collect();
    let per_node: Vec<(AlgebraVector, AlgebraVector)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut prefix = Mat2R::IDENTITY;
            let (mut plus, mut minus) = (AlgebraVector::ZERO, AlgebraVector::ZERO);
            for (letter, (mats, xp, xm)) in word.iter().zip(&data) {
                if letter.inverse {
                    prefix = prefix * mats[j].inv_unimodular();
                    plus = plus + xm[j].ad(&prefix);
                    minus = minus + xp[j].ad(&prefix);
                } else {
                    plus = plus + xp[j].ad(&prefix);
                    minus = minus + xm[j].ad(&prefix);
                    prefix = prefix * mats[j];
                }
            }
            (plus, minus)
        })
        .collect();
    per_node.into_iter().unzip()
}

fn check_cone(k: usize, f: &[AlgebraVector]) -> Result<()> {
    for (node, v) in f.iter().enumerate() {
        let escape = (v.x.hypot(v.y) - v.z) / v.norm().max(1.0);
        if escape > 1e-8 {
            return Err(Error::ConeEscape { node, margin: cone_margin(v) }.context(format!("level {k}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeRecursion {
    pub levels: Vec<ConeLevel>,
    /// `sup_{|n| ≤ q_depth} ‖A_n‖` on the grid.
    pub sup_norm: f64,
}

fn level_zero(dec: &ConeDecomposition) -> ConeLevel {
    let zero = vec![AlgebraVector::ZERO; dec.eta_plus.len()];
    ConeLevel {
        k: 0,
        eta_plus: dec.eta_plus.clone(),
        eta_minus: dec.eta_minus.clone(),
        gamma_plus: zero.clone(),
        gamma_minus: zero,
        margin: dec.delta,
    }
}

/// Levels `0..=depth`: `γ_k^± = η_{k−1}^±` and `η_k^±` from the block word
/// of `A^{(k)}` over level `k − 2` (level 0 for `k = 1`).
pub fn cone_recursion(dec: &ConeDecomposition, c: &QpCocycle, cf: &CfExpansion, depth: usize) -> Result<ConeRecursion> {
    if depth > cf.depth() {
        return Err(Error::DepthExhausted { k: depth });
    }
    let (sup_norm, _) = boundedness_probe(c, cf.q(depth as i64) as i64)?;
    let mut levels = vec![level_zero(dec)];
    for k in 1..=depth {
        let l = if k >= 2 { k - 2 } else { 0 };
        let (_, word) = expand_blocks(cf, k, l)?;
        let (eta_plus, eta_minus) = word_sum(c, cf, &levels[l], l, &word);
        check_cone(k, &eta_plus)?;
        check_cone(k, &eta_minus)?;
        let prev = &levels[k - 1];
        let (gamma_plus, gamma_minus) = (prev.eta_plus.clone(), prev.eta_minus.clone());
        let margin = [&eta_plus, &eta_minus, &gamma_plus, &gamma_minus]
            .iter()
            .filter(|f| f.iter().any(|v| v.norm() > 0.0))
            .map(|f| field_margin(f))
            .fold(MARGIN_CAP, f64::min);
        levels.push(ConeLevel { k, eta_plus, eta_minus, gamma_plus, gamma_minus, margin });
    }
    Ok(ConeRecursion { levels, sup_norm })
}

/// `η_k^±` summed directly over the level-0 word of `A^{(k)}`.
pub fn direct_eta(dec: &ConeDecomposition, c: &QpCocycle, cf: &CfExpansion, k: usize) -> Result<(Field, Field)> {
    if k == 0 {
        return Ok((dec.eta_plus.clone(), dec.eta_minus.clone()));
    }
    let (_, word) = expand_blocks(cf, k, 0)?;
    let word: Word = word.into_iter().filter(|l| l.block == Block::A).collect();
    Ok(word_sum(c, cf, &level_zero(dec), 0, &word))
}

/// `L(A_n)` on `n_nodes` nodes by spectral differentiation of exact samples.
pub fn l_of_power(c: &QpCocycle, power: i64, n_nodes: usize) -> Field {
    let samples: Vec<Mat2R> =
        (0..n_nodes).into_par_iter().map(|j| fibered_product(c, power, j as f64 / n_nodes as f64)).collect();
    let cols = [
        samples.iter().map(|m| m.a).collect::<Vec<_>>(),
        samples.iter().map(|m| m.b).collect(),
        samples.iter().map(|m| m.c).collect(),
        samples.iter().map(|m| m.d).collect(),
    ];
    let d: Vec<Vec<f64>> = cols.iter().map(|s| spectral::derivative(s, 1.0, 1)).collect();
    (0..n_nodes)
        .map(|j| {
            let dm = Mat2R::new(d[0][j], d[1][j], d[2][j], d[3][j]);
            AlgebraVector::from_matrix(&(dm * samples[j].inv_unimodular()))
        })
        .collect()
}

/// Largest node-wise deviation of `(η_k, γ_k)` from `(L(A^{(k)}), L(C^{(k)}))`.
pub fn difference_defect(level: &ConeLevel, c: &QpCocycle, cf: &CfExpansion) -> f64 {
    let n = level.eta_plus.len();
    let la = l_of_power(c, block_exponent(cf, level.k, Block::A), n);
    let lc = l_of_power(c, block_exponent(cf, level.k, Block::C), n);
    let de = level.eta().iter().zip(&la).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max);
    let dg = level.gamma().iter().zip(&lc).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max);
    de.max(dg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratedQuantities {
    pub k: usize,
    pub e_plus: f64,
    pub e_minus: f64,
    pub e: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    pub f: f64,
    pub u_plus: f64,
    pub u_minus: f64,
    pub u: f64,
    pub ubar_plus: f64,
    pub ubar_minus: f64,
    pub ubar: f64,
}

fn mean_n(f: &[AlgebraVector]) -> f64 {
    f.iter().map(minkowski_norm_unchecked).sum::<f64>() / f.len() as f64
}

/// `e = ∫N(η)`, `f = ∫N(γ)`, `u^± = e^± + α_k f^∓`, `u = e + α_k f`,
/// `ū = β_{k−1}u`.
pub fn integrated_quantities(level: &ConeLevel, cf: &CfExpansion) -> IntegratedQuantities {
    let k = level.k;
    let e_plus = mean_n(&level.eta_plus);
    let e_minus = mean_n(&level.eta_minus);
    let e = mean_n(&sum(&level.eta_plus, &level.eta_minus));
    let f_plus = mean_n(&level.gamma_plus);
    let f_minus = mean_n(&level.gamma_minus);
    let f = mean_n(&sum(&level.gamma_plus, &level.gamma_minus));
    let ak = cf.alpha_k(k);
    let beta = cf.beta(k as i64 - 1);
    let (u_plus, u_minus, u) = (e_plus + ak * f_minus, e_minus + ak * f_plus, e + ak * f);
    IntegratedQuantities {
        k,
        e_plus,
        e_minus,
        e,
        f_plus,
        f_minus,
        f,
        u_plus,
        u_minus,
        u,
        ubar_plus: beta * u_plus,
        ubar_minus: beta * u_minus,
        ubar: beta * u,
    }
}

/// `M = 2·S²·max sup‖η₀^±‖` with `S` the fibered-product bound; it dominates
/// `β_{k−1}` times the sup norms of the level-`k` fields.
pub fn bound_constant(sup_norm: f64, dec: &ConeDecomposition) -> f64 {
    let m0 = dec.eta_plus.iter().chain(&dec.eta_minus).map(|v| v.norm()).fold(0.0, f64::max);
    2.0 * sup_norm * sup_norm * m0
}

/// One-step monotonicity gaps `ū_k^± − ū_{k−1}^∓` and `ū_k − ū_{k−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneGap {
    pub k: usize,
    pub plus: f64,
    pub minus: f64,
    pub total: f64,
}

pub fn monotone_gaps(qs: &[IntegratedQuantities]) -> Vec<MonotoneGap> {
    qs.windows(2)
        .map(|w| MonotoneGap {
            k: w[1].k,
            plus: w[1].ubar_plus - w[0].ubar_minus,
            minus: w[1].ubar_minus - w[0].ubar_plus,
            total: w[1].ubar - w[0].ubar,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayEntry {
    pub k: usize,
    pub epsilon: f64,
    pub deriv_eta: f64,
    pub deriv_gamma: f64,
    pub rho: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
    /// `α_k, α_{k+1} ∈ (1/5, 1/4]`.
    pub sigma_window: bool,
    /// Shift minimizing the windowed ε density (surrogate for the best window).
    pub mu: f64,
    /// Windowed density at `mu` relative to `ε_k`.
    pub window_ratio: f64,
}

fn derivative_norms(f: &[AlgebraVector]) -> Vec<f64> {
    let comps = [
        f.iter().map(|v| v.x).collect::<Vec<_>>(),
        f.iter().map(|v| v.y).collect(),
        f.iter().map(|v| v.z).collect(),
    ];
    let d: Vec<Vec<f64>> = comps.iter().map(|s| spectral::derivative(s, 1.0, 1)).collect();
    (0..f.len()).map(|j| AlgebraVector::new(d[0][j], d[1][j], d[2][j]).norm()).collect()
}

/// Node-wise integrand of the three commutator terms for cone fields `g`
/// (of `C^{(k)}`) and `e` (of `A^{(k)}`).
fn rho_density(g: &[AlgebraVector], e: &[AlgebraVector], cm: &[Mat2R], am: &[Mat2R], b_prev: f64, b: f64) -> Vec<f64> {
    let g2 = shift_field(g, -2.0 * b_prev);
    let g1 = shift_field(g, -b_prev);
    let e1 = shift_field(e, -b);
    (0..g.len())
        .map(|j| {
            let t1 = g2[j].bracket(&g1[j].ad(&cm[j].inv_unimodular())).norm();
            let t2 = g1[j].bracket(&e[j]).norm();
            let t3 = e[j].bracket(&e1[j].ad(&am[j])).norm();
            t1 + t2 + t3
        })
        .collect()
}

/// `ε_k = β_{k−1}²(‖∂η_k‖_{L¹} + ‖∂γ_k‖_{L¹} + ρ + ρ⁺ + ρ⁻)` for every level
/// with `k ≥ 1`.
pub fn decay_monitor(rec: &ConeRecursion, c: &QpCocycle, cf: &CfExpansion) -> Vec<DecayEntry> {
    rec.levels
        .iter()
        .filter(|l| l.k >= 1)
        .map(|level| {
            let k = level.k;
            let n = level.eta_plus.len();
            let b_prev = cf.beta(k as i64 - 1);
            let b = cf.beta(k as i64);
            let de = derivative_norms(&level.eta());
            let dg = derivative_norms(&level.gamma());
            let cm = block_matrices(c, cf, k, Block::C, -b_prev, n);
            let am = block_matrices(c, cf, k, Block::A, 0.0, n);
            let rp = rho_density(&level.gamma_minus, &level.eta_plus, &cm, &am, b_prev, b);
            let rm = rho_density(&level.gamma_plus, &level.eta_minus, &cm, &am, b_prev, b);
            let gs = sum(&level.gamma_plus, &level.gamma_minus);
            let es = sum(&level.eta_plus, &level.eta_minus);
            let r0 = rho_density(&gs, &es, &cm, &am, b_prev, b);
            let s2 = b_prev * b_prev;
            let density: Vec<f64> = (0..n).map(|j| s2 * (de[j] + dg[j] + r0[j] + rp[j] + rm[j])).collect();
            let epsilon = spectral::mean(&density);
            let in_window = |a: f64| a > 0.2 && a <= 0.25;
            let sigma_window = in_window(cf.alpha_k(k)) && k < cf.depth() && in_window(cf.alpha_k(k + 1));
            let (mu, window) = best_window(&density, (10.0 * b_prev).min(1.0));
            DecayEntry {
                k,
                epsilon,
                deriv_eta: spectral::mean(&de),
                deriv_gamma: spectral::mean(&dg),
                rho: spectral::mean(&r0),
                rho_plus: spectral::mean(&rp),
                rho_minus: spectral::mean(&rm),
                sigma_window,
                mu,
                window_ratio: if epsilon > 0.0 { window / epsilon } else { 0.0 },
            }
        })
        .collect()
}

const NU_GRID: usize = 64;

/// Argmin over `ν ∈ {j/64}` of the mean of `density` on `[ν, ν + width]`.
fn best_window(density: &[f64], width: f64) -> (f64, f64) {
    let n = density.len();
    let len = ((width * n as f64).round() as usize).clamp(1, n);
    let mut best = (0.0, f64::INFINITY);
    for j in 0..NU_GRID {
        let start = j * n / NU_GRID;
        let avg = (0..len).map(|i| density[(start + i) % n]).sum::<f64>() / len as f64;
        if avg < best.1 {
            best = (j as f64 / NU_GRID as f64, avg);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    /// `+1` when `L(A)` lies in the future cone, `−1` for the past cone.
    pub sheet: i8,
}

/// `2π|r| ≥ ∫N(L(A))`, with `L(A)` required in one sheet of the cone.
pub fn degree_bound_check(c: &QpCocycle, r: i64, delta: f64) -> Result<DegreeBound> {
    let l = l_operator(&c.map)?;
    let inside = |s: f64| {
        l.iter().all(|v| {
            let w = v.scale(s);
            w.z > TOL.cone && crate::sl2_geometry::cone_membership(&w, delta)
        })
    };
    let sheet = if inside(1.0) {
        1
    } else if inside(-1.0) {
        -1
    } else {
        let worst = l
            .iter()
            .min_by(|a, b| cone_margin(a).abs().total_cmp(&cone_margin(b).abs()))
            .copied()
            .unwrap_or_default();
        return Err(Error::ConeViolation { q: crate::sl2_geometry::quad_form(&worst), z: worst.z });
    };
    let rhs = mean_n(&l.iter().map(|v| v.scale(sheet as f64)).collect::<Vec<_>>());
    let lhs = 2.0 * PI * r.abs() as f64;
    Ok(DegreeBound { lhs, rhs, ok: lhs >= rhs - 1e-6, sheet })
}

/// Both sides of the integrated commutator bound for cone-valued fields on
/// `[0, 1]`:
/// `Σ_{i<j}∫‖[γ_i, γ_j]‖ ≤ (4/δ)(∫N(Σγ_i) − Σ∫N(γ_i))^{1/2}(∫(Σ N(γ_i) + ‖γ_i‖)³)^{1/2}`.
pub fn integrated_bracket_bound(fields: &[Field], delta: f64) -> (f64, f64) {
    let n = fields[0].len();
    let mut lhs = 0.0;
    let mut total = vec![AlgebraVector::ZERO; n];
    let mut sum_n = 0.0;
    let mut cube = vec![0.0; n];
    for (i, fi) in fields.iter().enumerate() {
        for fj in &fields[i + 1..] {
            lhs += fi.iter().zip(fj).map(|(a, b)| a.bracket(b).norm()).sum::<f64>() / n as f64;
        }
        for (j, v) in fi.iter().enumerate() {
            total[j] = total[j] + *v;
            cube[j] += minkowski_norm_unchecked(v) + v.norm();
        }
        sum_n += mean_n(fi);
    }
    let gap = (mean_n(&total) - sum_n).max(0.0);
    let third = cube.iter().map(|s| s * s * s).sum::<f64>() / n as f64;
    (lhs, 4.0 / delta * gap.sqrt() * third.sqrt())
}
