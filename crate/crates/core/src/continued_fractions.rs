//! Continued fractions: partial quotients, Gauss iterates, convergents,
//! diophantine certificates and the basis-change matrices of the
//! renormalization.
//!
//! Expansions are exact: a real `α` is first turned into the rational it
//! represents (a double is a dyadic rational) and the Euclidean algorithm runs
//! on 128-bit integers. The Gauss iterates `α_k = s_k/s_{k−1}` and the
//! products `β_k = s_k/s_{−1}` are then ratios of exact remainders, correct to
//! the last bit at every depth. For an irrational number known only through
//! its double approximation the quotients agree with the true ones while
//! `q_k² ≲ 2^53`; use [`CfExpansion::from_partial_quotients`] to go deeper.

use serde::Serialize;

use crate::config::TOL;
use crate::error::{Error, Result};

/// Continued-fraction data of `α = [0; a_1, a_2, …]`, indices `k ≥ −1`
/// where meaningful (`p_{−1} = 1`, `q_{−1} = 0`, `β_{−1} = 1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfExpansion {
    pub alpha: f64,
    num: i128,
    den: i128,
    /// `a[k]` for `k = 0..=depth` (`a[0] = 0`).
    a: Vec<i64>,
    /// `α_k` for `k = 0..=depth`.
    alpha_k: Vec<f64>,
    /// `β_k` for `k = −1..=depth`, stored at `k + 1`.
    beta: Vec<f64>,
    /// `p_k`, `q_k` for `k = −1..=depth`, stored at `k + 1`.
    p: Vec<i128>,
    q: Vec<i128>,
    /// Set when the expansion stopped early on a rational remainder.
    pub truncated: bool,
}

impl CfExpansion {
    pub fn depth(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self, k: usize) -> i64 {
        self.a[k]
    }

    pub fn alpha_k(&self, k: usize) -> f64 {
        self.alpha_k[k]
    }

    pub fn beta(&self, k: i64) -> f64 {
        self.beta[(k + 1) as usize]
    }

    pub fn p(&self, k: i64) -> i128 {
        self.p[(k + 1) as usize]
    }

    pub fn q(&self, k: i64) -> i128 {
        self.q[(k + 1) as usize]
    }

    pub fn partial_quotients(&self) -> &[i64] {
        &self.a[1..]
    }

    /// The exact rational `num/den` being expanded.
    pub fn rational(&self) -> (i128, i128) {
        (self.num, self.den)
    }

    /// Expansion of the finite continued fraction `[0; a_1, …, a_n]`.
    pub fn from_partial_quotients(quotients: &[i64]) -> Result<Self> {
        if quotients.is_empty() || quotients.iter().any(|&a| a < 1) {
            return Err(Error::ConfigInvalid("partial quotients must be positive".into()));
        }
        // evaluate backwards: x = 1/(a_n), x = 1/(a_j + x)
        let (mut num, mut den): (i128, i128) = (0, 1);
        for &a in quotients.iter().rev() {
            let nd = (a as i128).checked_mul(den).and_then(|v| v.checked_add(num));
            let nd = nd.ok_or(Error::DepthLimit { depth: quotients.len() })?;
            num = den;
            den = nd;
        }
        let mut cf = expand_rational_partial(num, den, quotients.len())?;
        cf.truncated = false;
        Ok(cf)
    }
}

/// Exact rational value of a double in `(0, 1)` (denominator at most `2^126`).
pub fn dyadic_rational(alpha: f64) -> (i128, i128) {
    let bits = alpha.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i128;
    let (mut m, mut e) = if exp == 0 { (frac, 1074i64) } else { (frac | (1i128 << 52), 1075 - exp) };
    while e > 126 {
        m >>= 1;
        e -= 1;
    }
    while e > 0 && m % 2 == 0 && m != 0 {
        m /= 2;
        e -= 1;
    }
    (m, 1i128 << e)
}

/// Expansion of `alpha` to `depth` partial quotients.
pub fn expand(alpha: f64, depth: usize) -> Result<CfExpansion> {
    let cf = expand_partial(alpha, depth)?;
    if cf.truncated {
        return Err(Error::RationalStop { depth: cf.depth() });
    }
    Ok(cf)
}

/// Like [`expand`] but returns the data gathered before a rational stop.
pub fn expand_partial(alpha: f64, depth: usize) -> Result<CfExpansion> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ConfigInvalid(format!("alpha = {alpha} outside (0, 1)")));
    }
    let (u, v) = dyadic_rational(alpha);
    let mut cf = expand_rational_partial(u, v, depth)?;
    cf.alpha = alpha;
    Ok(cf)
}

/// Exact expansion of `u/v` with `0 < u < v`.
pub fn expand_rational(u: i128, v: i128, depth: usize) -> Result<CfExpansion> {
    let cf = expand_rational_partial(u, v, depth)?;
    if cf.truncated {
        return Err(Error::RationalStop { depth: cf.depth() });
    }
    Ok(cf)
}

pub fn expand_rational_partial(u: i128, v: i128, depth: usize) -> Result<CfExpansion> {
    if !(u > 0 && u < v) {
        return Err(Error::ConfigInvalid(format!("rational {u}/{v} outside (0, 1)")));
    }
    let vf = v as f64;
    let mut cf = CfExpansion {
        alpha: u as f64 / vf,
        num: u,
        den: v,
        a: vec![0],
        alpha_k: vec![u as f64 / vf],
        beta: vec![1.0, u as f64 / vf],
        p: vec![1, 0],
        q: vec![0, 1],
        truncated: false,
    };
    let (mut s_prev, mut s_cur) = (v, u);
    for k in 1..=depth {
        if s_cur == 0 || cf.alpha_k[k - 1] < TOL.rational_stop {
            cf.truncated = true;
            break;
        }
        let a = s_prev / s_cur;
        let s_next = s_prev % s_cur;
        let a_i64 = i64::try_from(a).map_err(|_| Error::DepthLimit { depth: k })?;
        let p = (a.checked_mul(cf.p[k]).and_then(|x| x.checked_add(cf.p[k - 1]))).ok_or(Error::DepthLimit { depth: k })?;
        let q = (a.checked_mul(cf.q[k]).and_then(|x| x.checked_add(cf.q[k - 1]))).ok_or(Error::DepthLimit { depth: k })?;
        cf.a.push(a_i64);
        cf.alpha_k.push(s_next as f64 / s_cur as f64);
        cf.beta.push(s_next as f64 / vf);
        cf.p.push(p);
        cf.q.push(q);
        s_prev = s_cur;
        s_cur = s_next;
    }
    Ok(cf)
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiophantineCert {
    pub gamma: f64,
    pub sigma: f64,
    pub k_range: u64,
    pub worst_k: i64,
    pub margin: f64,
    pub valid: bool,
}

/// Exhaustive check of `min_l |kα − l| ≥ γ⁻¹|k|^{−σ}` for `1 ≤ k ≤ K`.
pub fn cd_test(alpha: f64, gamma: f64, sigma: f64, k_range: u64) -> DiophantineCert {
    let mut margin = f64::INFINITY;
    let mut worst_k = 0i64;
    for k in 1..=k_range {
        let m = (k as f64).powf(sigma) * dist_to_int(k as f64 * alpha) * gamma;
        if m < margin {
            margin = m;
            worst_k = k as i64;
        }
    }
    DiophantineCert { gamma, sigma, k_range, worst_k, margin, valid: margin >= 1.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeCert {
    pub kappa: f64,
    pub tau: f64,
    pub k_range: u64,
    pub worst_k: i64,
    pub margin: f64,
    /// `Some(k₀)` when `ρ = k₀α/2 mod 1/2` within `1e−10`.
    pub rational_k: Option<i64>,
    pub valid: bool,
}

/// `min_l |ρ − kα/2 − l/2|`.
pub fn half_lattice_distance(rho: f64, k: i64, alpha: f64) -> f64 {
    dist_to_int(2.0 * rho - k as f64 * alpha) / 2.0
}

/// Exhaustive check of `min_l |ρ − kα/2 − l/2| ≥ κ⁻¹|k|^{−τ}` for `|k| ≤ K`
/// (with `|k|^τ` read as 1 at `k = 0`), detecting the rational case.
pub fn diophantine_wrt(rho: f64, cf: &CfExpansion, kappa: f64, tau: f64, k_range: u64) -> RelativeCert {
    let alpha = cf.alpha;
    let mut margin = f64::INFINITY;
    let mut worst_k = 0i64;
    let mut rational_k = None;
    let kr = k_range as i64;
    for mag in 0..=kr {
        for k in if mag == 0 { vec![0] } else { vec![mag, -mag] } {
            let d = half_lattice_distance(rho, k, alpha);
            if rational_k.is_none() && d <= 1e-10 {
                rational_k = Some(k);
            }
            let m = (mag.max(1) as f64).powf(tau) * d * kappa;
            if m < margin {
                margin = m;
                worst_k = k;
            }
        }
    }
    RelativeCert {
        kappa,
        tau,
        k_range,
        worst_k,
        margin,
        rational_k,
        valid: rational_k.is_none() && margin >= 1.0,
    }
}

/// Indices `k` with `α_k, α_{k+1} ∈ (1/5, 1/4]` both passing `cd_test` with
/// `K = 1000`. Finite-window evidence only.
pub fn sigma_window_search(cf: &CfExpansion, gamma: f64, sigma: f64) -> Vec<usize> {
    let window = |x: f64| x > 0.2 && x <= 0.25;
    let good = |x: f64| window(x) && cd_test(x, gamma, sigma, 1000).valid;
    let goods: Vec<bool> = (0..=cf.depth()).map(|k| good(cf.alpha_k(k))).collect();
    (0..cf.depth()).filter(|&k| goods[k] && goods[k + 1]).collect()
}

/// Integer 2×2 matrix `[[m1, m2], [m3, m4]]`.
pub type IntMat = [[i128; 2]; 2];

pub fn int_mul(x: &IntMat, y: &IntMat) -> IntMat {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

pub fn int_det(x: &IntMat) -> i128 {
    x[0][0] * x[1][1] - x[0][1] * x[1][0]
}

/// `F_k⋯F_{l+1}` with `F_j = [[0, 1], [1, −a_j]]`; it maps the frequency
/// pair `(β_{l−1}, β_l)` to `(β_{k−1}, β_k)`.
pub fn basis_matrix(cf: &CfExpansion, k: usize, l: usize) -> Result<IntMat> {
    if k < l || (k - l) % 2 != 0 {
        return Err(Error::Parity { k, l });
    }
    if k > cf.depth() {
        return Err(Error::DepthExhausted { k });
    }
    let mut m: IntMat = [[1, 0], [0, 1]];
    for j in l + 1..=k {
        m = int_mul(&[[0, 1], [1, -(cf.a(j) as i128)]], &m);
    }
    Ok(m)
}

/// Largest relative residual of
/// `(|m4| |m2|; |m3| |m1|)(1, α_k)ᵀ = (β_{l−1}/β_{k−1})(1, α_l)ᵀ`.
pub fn eigen_relation_residual(cf: &CfExpansion, k: usize, l: usize) -> Result<f64> {
    let m = basis_matrix(cf, k, l)?;
    let (m1, m2, m3, m4) = (m[0][0] as f64, m[0][1] as f64, m[1][0] as f64, m[1][1] as f64);
    let ak = cf.alpha_k(k);
    let al = cf.alpha_k(l);
    let s = cf.beta(l as i64 - 1) / cf.beta(k as i64 - 1);
    let lhs = [m4.abs() + m2.abs() * ak, m3.abs() + m1.abs() * ak];
    let rhs = [s, s * al];
    Ok(((lhs[0] - rhs[0]).abs() / rhs[0].abs()).max((lhs[1] - rhs[1]).abs() / rhs[0].abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    #[test]
    fn golden_mean() {
        let cf = expand(GOLDEN, 20).unwrap();
        assert!(cf.partial_quotients().iter().all(|&a| a == 1));
        let qs: Vec<i128> = (0..8).map(|k| cf.q(k)).collect();
        assert_eq!(qs, vec![1, 1, 2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn first_quotient() {
        assert_eq!(expand(0.22, 3).unwrap().a(1), 4);
    }

    #[test]
    fn determinant_identity_silver() {
        let cf = CfExpansion::from_partial_quotients(&[2; 30]).unwrap();
        for k in 0..=30i64 {
            let lhs = cf.q(k) * cf.p(k - 1) - cf.q(k - 1) * cf.p(k);
            assert_eq!(lhs, if k % 2 == 0 { 1 } else { -1 });
        }
        assert!((cf.alpha - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn rational_stop() {
        let e = expand(0.375, 10).unwrap_err();
        assert_eq!(e, Error::RationalStop { depth: 3 });
        let cf = expand_partial(0.375, 10).unwrap();
        assert_eq!(cf.partial_quotients(), &[2, 1, 2]);
    }

    #[test]
    fn cd_examples() {
        assert!(cd_test(GOLDEN, 3.0, 1.5, 10_000).valid);
        let c = cd_test(1.0 / 3.0, 3.0, 1.5, 10);
        assert_eq!((c.worst_k, c.margin, c.valid), (3, 0.0, false));
    }

    #[test]
    fn relative_examples() {
        let cf = expand(GOLDEN, 10).unwrap();
        assert_eq!(diophantine_wrt(GOLDEN / 2.0, &cf, 10.0, 2.0, 50).rational_k, Some(1));
        assert_eq!(diophantine_wrt(0.0, &cf, 10.0, 2.0, 50).rational_k, Some(0));
        let c = diophantine_wrt(GOLDEN / std::f64::consts::PI, &cf, 10.0, 2.0, 1000);
        assert!(c.rational_k.is_none() && c.margin > 0.0);
    }

    #[test]
    fn sigma_windows() {
        let golden = expand(GOLDEN, 20).unwrap();
        assert!(sigma_window_search(&golden, 10.0, 1.5).is_empty());
        let cf = CfExpansion::from_partial_quotients(&[4; 40]).unwrap();
        let ks = sigma_window_search(&cf, 10.0, 1.5);
        assert!((0..20).all(|k| ks.contains(&k)));
        assert!(ks.iter().all(|&k| cf.a(k + 1) == 4));
        let fixed = 5f64.sqrt() - 2.0;
        let cf = expand(fixed, 8).unwrap();
        assert!((0..=8).all(|k| (cf.alpha_k(k) - fixed).abs() < 1e-5));
        assert_eq!(sigma_window_search(&cf, 10.0, 1.5), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn basis_examples() {
        let cf = expand(GOLDEN, 10).unwrap();
        assert_eq!(basis_matrix(&cf, 4, 4).unwrap(), [[1, 0], [0, 1]]);
        assert_eq!(basis_matrix(&cf, 2, 0).unwrap(), [[1, -1], [-1, 2]]);
        assert_eq!(basis_matrix(&cf, 3, 0).unwrap_err().code(), "PARITY");
        let silver = CfExpansion::from_partial_quotients(&[2; 30]).unwrap();
        assert!(eigen_relation_residual(&silver, 6, 2).unwrap() < 1e-9);
    }
}
