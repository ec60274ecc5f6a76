//! The acceptance suite: twelve end-to-end checks with fixed tolerances,
//! shared by the `selftest` command and the `acceptance` test target.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cocycle::{conjugate, MapExpr, QpCocycle, Sl2Map};
use crate::complex_rotation::{boundary_scan, ij_defect, invariant_section, zeta, ComplexParam};
use crate::cone_monitors::{bound_constant, cone_recursion, decompose_eta0, degree_bound_check, integrated_quantities, monotone_gaps};
use crate::config::Settings;
use crate::continued_fractions::{eigen_relation_residual, expand, CfExpansion};
use crate::error::Result;
use crate::families::{conjugated_path, conjugated_rotation_on};
use crate::invariants::{fibered_rotation_number, lyapunov_exponent, rotation_distance};
use crate::reducibility::{
    hyperbolic_neighbor, kam_reduce_local, neighbor_cone_test, normal_form_step, schrodinger_destabilizer, KAM_TARGET,
};
use crate::renormalization::{renormalize, rescaled_pair};
use crate::sl2_geometry::{ad_action, commutator_defect, quad_form, AlgebraVector, Mat2R, Su11Vector, C64};

pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("[{tag}] {:>2} {}: {} ({:.1} s)", self.id, self.name, self.detail, self.seconds)
    }
}

type Check = fn(u64) -> Result<(bool, String)>;

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    check: Check,
}

impl Criterion {
    pub fn run(&self, seed: u64) -> Outcome {
        let start = Instant::now();
        let (pass, detail) = match (self.check)(seed) {
            Ok(r) => r,
            Err(e) => (false, format!("error {}: {e}", e.code())),
        };
        Outcome { id: self.id, name: self.name, pass, detail, seconds: start.elapsed().as_secs_f64() }
    }
}

pub fn criteria() -> Vec<Criterion> {
    let list: [(&'static str, Check); 12] = [
        ("rotation-number law", rotation_law),
        ("constant-cocycle invariants", constant_invariants),
        ("continued-fraction identities", cf_identities),
        ("sl(2,R) cone geometry", cone_geometry),
        ("renormalization bookkeeping", renormalization_bookkeeping),
        ("monotone functionals", monotone_functionals),
        ("degree lower bound", degree_lower_bound),
        ("complex rotation number", complex_rotation_number),
        ("normal-form quadraticity", normal_form_quadraticity),
        ("local KAM loop", local_kam),
        ("hyperbolic neighbor", hyperbolic_neighbor_check),
        ("Schrodinger destabilizer", destabilizer),
    ];
    list.into_iter().enumerate().map(|(i, (name, check))| Criterion { id: i + 1, name, check }).collect()
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    criteria().iter().map(|c| c.run(seed)).collect()
}

fn rotation_law(_: u64) -> Result<(bool, String)> {
    let c = QpCocycle::new(GOLDEN, Sl2Map::constant(Mat2R::rotation_turns(0.25)));
    let base = fibered_rotation_number(&c, 100_000, 0.0, 0.0)?.value;
    let mut worst = 0.0f64;
    for r in -2..=2 {
        let conj = conjugate(&Sl2Map::rotation_path(r), &c);
        let v = fibered_rotation_number(&conj, 100_000, 0.0, 0.0)?.value;
        worst = worst.max(rotation_distance(v, base + r as f64 * GOLDEN));
    }
    Ok((worst <= 3e-4, format!("max |shift - r alpha| = {worst:.2e} (tol 3e-4)")))
}

fn constant_invariants(_: u64) -> Result<(bool, String)> {
    let c = QpCocycle::new(GOLDEN, Sl2Map::constant(Mat2R::diag(std::f64::consts::E)));
    let lyap = (lyapunov_exponent(&c, 10_000, 8).value - 1.0).abs();
    let mut rot = 0.0f64;
    for psi in [0.1, 0.25, 0.4] {
        let c = QpCocycle::new(GOLDEN, Sl2Map::constant(Mat2R::rotation_turns(psi)));
        rot = rot.max(rotation_distance(fibered_rotation_number(&c, 100_000, 0.0, 0.0)?.value, psi));
    }
    Ok((lyap <= 1e-6 && rot <= 1e-4, format!("|lambda - 1| = {lyap:.2e} (tol 1e-6), max |rho - psi| = {rot:.2e} (tol 1e-4)")))
}

fn cf_identities(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut det_ok, mut beta_ok, mut eig) = (true, true, 0.0f64);
    for _ in 0..20 {
        let quotients: Vec<i64> = (0..40).map(|_| rng.random_range(1..=5)).collect();
        let cf = CfExpansion::from_partial_quotients(&quotients)?;
        for k in 0..=30i64 {
            let lhs = cf.q(k) * cf.p(k - 1) - cf.q(k - 1) * cf.p(k);
            det_ok &= lhs == if k % 2 == 0 { 1 } else { -1 };
        }
        for k in 0..=30i64 {
            let (q0, q1) = (cf.q(k) as f64, cf.q(k + 1) as f64);
            let b = cf.beta(k);
            beta_ok &= 1.0 / (q1 + q0) < b && b < 1.0 / q1;
        }
        for (k, l) in [(2, 0), (4, 2), (6, 2)] {
            eig = eig.max(eigen_relation_residual(&cf, k, l)?);
        }
    }
    Ok((
        det_ok && beta_ok && eig <= 1e-9,
        format!("determinant identity {det_ok}, beta bounds {beta_ok}, eigen residual {eig:.2e} (tol 1e-9)"),
    ))
}

fn cone_sample(rng: &mut ChaCha8Rng) -> AlgebraVector {
    let (x, y): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let margin: f64 = rng.random_range(0.05..2.0);
    AlgebraVector::new(x, y, (1.0 + margin) * x.hypot(y) + rng.random_range(1e-3..0.1))
}

fn cone_geometry(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut acs, mut gap, mut ad) = (0.0f64, f64::INFINITY, 0.0f64);
    for _ in 0..1_000_000 {
        let v = cone_sample(&mut rng);
        let w = cone_sample(&mut rng);
        let d = commutator_defect(&v, &w)?;
        let scale = v.norm().powi(2) * w.norm().powi(2);
        acs = acs.max(d.acs_residual.abs() / scale);
        gap = gap.min(d.anti_cs_gap / (v.norm() * w.norm()));
        let g = AlgebraVector::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let img = ad_action(&g.exp(), &v)?;
        ad = ad.max((quad_form(&img) - quad_form(&v)).abs() / img.norm().powi(2).max(1.0));
    }
    Ok((
        acs <= 1e-10 && gap >= -1e-12 && ad <= 1e-10,
        format!("acs residual {acs:.2e} (tol 1e-10), min anti-CS gap {gap:.2e} (tol -1e-12), Ad residual {ad:.2e} (tol 1e-10)"),
    ))
}

fn renormalization_bookkeeping(_: u64) -> Result<(bool, String)> {
    let alpha = 2f64.sqrt() - 1.0;
    let c = conjugated_rotation_on(alpha, 0.23, 0.15, 4096)?;
    let cf = Arc::new(expand(alpha, 12)?);
    let states = renormalize(&c, cf, 8, 0.0)?;
    let freq = states.iter().map(|s| s.frequency_defect()).fold(0.0, f64::max);
    let mut comm = 0.0f64;
    for s in states.iter().skip(1) {
        comm = comm.max(rescaled_pair(s)?.commutation_defect(2049));
    }
    Ok((
        freq <= 1e-12 && comm <= 1e-7,
        format!("frequency defect {freq:.2e} (tol 1e-12), commutation defect {comm:.2e} (tol 1e-7), k <= 8"),
    ))
}

fn monotone_functionals(_: u64) -> Result<(bool, String)> {
    let cf = expand(GOLDEN, 20)?;
    let c = conjugated_rotation_on(GOLDEN, 0.23, 0.15, 256)?;
    let dec = decompose_eta0(&c, Settings::default().cone_margin)?;
    let rec = cone_recursion(&dec, &c, &cf, 6)?;
    let qs: Vec<_> = rec.levels.iter().map(|l| integrated_quantities(l, &cf)).collect();
    let worst_gap = monotone_gaps(&qs).iter().map(|g| g.plus.min(g.minus)).fold(f64::INFINITY, f64::min);
    let two_m = 2.0 * bound_constant(rec.sup_norm, &dec);
    let top = qs.iter().map(|q| q.ubar_plus.max(q.ubar_minus)).fold(0.0, f64::max);
    let low = qs.iter().map(|q| q.ubar_plus.min(q.ubar_minus)).fold(f64::INFINITY, f64::min);
    Ok((
        worst_gap >= -1e-8 && top <= two_m && low >= 0.0,
        format!("min step {worst_gap:.2e} (tol -1e-8), max ubar {top:.3} <= 2M = {two_m:.3}, min ubar {low:.3}"),
    ))
}

fn degree_lower_bound(_: u64) -> Result<(bool, String)> {
    let mut eq = 0.0f64;
    for r in 1..=3 {
        let c = QpCocycle::new(GOLDEN, Sl2Map::rotation_path(r));
        let b = degree_bound_check(&c, r, 0.1)?;
        eq = eq.max((b.lhs - b.rhs).abs());
    }
    let c = conjugated_path(GOLDEN, 1, 0.05)?;
    let b = degree_bound_check(&c, 1, 0.0)?;
    let strict = b.lhs - b.rhs;
    Ok((
        eq <= 1e-8 && strict > 1e-6,
        format!("E_r equality defect {eq:.2e} (tol 1e-8), conjugated E_1 gap {strict:.2e} (> 0)"),
    ))
}

fn complex_rotation_number(_: u64) -> Result<(bool, String)> {
    let settings = Settings::default();
    let c = conjugated_rotation_on(GOLDEN, 0.23, 0.15, 512)?;
    let (n, tol) = (1024, settings.section_tol);
    let mut re_err = 0.0f64;
    for z in [ComplexParam::polar(0.9, 0.0)?, ComplexParam::polar(0.9, 0.3)?] {
        let s = invariant_section(&c, z, n, tol)?;
        let r = zeta(&c, z, &s, 10_000, 16)?;
        re_err = re_err.max((r.zeta.re - r.re_check).abs());
    }
    let betas: Vec<f64> = (0..8).map(|j| -0.7 + 0.2 * j as f64).collect();
    let scan = boundary_scan(&c, &betas, &[0.9, 0.99, 0.999], n, tol, &settings)?;
    let im_err = scan.points.iter().map(|p| rotation_distance(p.rotation, p.rot_direct)).fold(0.0, f64::max);
    let ij = ij_defect(&c, C64::new(0.5, -0.05), n, tol)?;
    Ok((
        re_err <= 1e-3 && im_err <= 1e-3 && ij.defect >= -1e-6,
        format!(
            "|Re zeta - lyap| {re_err:.2e} (tol 1e-3), |rot(zeta) - rho_f| {im_err:.2e} over 8 betas (tol 1e-3), I - 4 Im J = {:.3} (>= -1e-6)",
            ij.defect
        ),
    ))
}

fn normal_form_quadraticity(_: u64) -> Result<(bool, String)> {
    let settings = Settings { normal_form_eps0: 1e9, ..Settings::default() };
    let m = 256;
    let mode = |size: f64| -> Vec<Su11Vector> {
        (0..m)
            .map(|j| Su11Vector::new(0.0, C64::from_polar(size, 2.0 * std::f64::consts::PI * 3.0 * j as f64 / m as f64)))
            .collect()
    };
    let big = normal_form_step(&mode(1e-2), GOLDEN, 1, 32, &settings)?;
    let small = normal_form_step(&mode(1e-3), GOLDEN, 1, 32, &settings)?;
    let ratio = big.norms.f[0] / small.norms.f[0];
    let ident = big.identity_residual.max(small.identity_residual);
    let agree = [&big, &small]
        .iter()
        .map(|o| (o.conjugacy_defect - o.norms.f[0]).abs() / o.norms.f[0])
        .fold(0.0, f64::max);
    Ok((
        (50.0..=200.0).contains(&ratio) && ident <= 1e-12 && agree <= 0.05,
        format!("|F| ratio {ratio:.1} (in [50, 200]), identity residual {ident:.1e}, defect vs |F| rel {agree:.1e}"),
    ))
}

fn local_kam(_: u64) -> Result<(bool, String)> {
    let size = 1e-4;
    let u = vec![
        (1, [size, 0.3 * size, -0.2 * size, -size]),
        (-2, [0.0, size, 0.5 * size, 0.0]),
        (3, [0.4 * size, -0.6 * size, 0.0, -0.4 * size]),
    ];
    let expr = MapExpr::Product { factors: vec![MapExpr::Const { m: Mat2R::rotation_turns(0.23) }, MapExpr::ExpTrig { coeffs: u }] };
    let c = QpCocycle::new(GOLDEN, Sl2Map::with_grid(expr, 4096)?);
    let cert = crate::continued_fractions::diophantine_wrt(0.23, &expand(GOLDEN, 20)?, 100.0, 2.0, 1000);
    let out = kam_reduce_local(&c, 6, &Settings::default())?;
    let steps = out.steps.len() - 1;
    let rho = fibered_rotation_number(&c, 100_000, 0.0, 0.0)?.value;
    let gap = rotation_distance(rho, out.angle);
    Ok((
        cert.valid && out.final_defect <= KAM_TARGET && steps <= 6 && gap <= 3e-4 && out.check <= 1e-8,
        format!(
            "final defect {:.1e} in {steps} steps (tol 1e-10, <= 6), conjugacy check {:.1e}, |angle - rho_f| {gap:.1e} (tol 3e-4), diophantine margin {:.2} (kappa 100, tau 2)",
            out.final_defect, out.check, cert.margin
        ),
    ))
}

fn hyperbolic_neighbor_check(_: u64) -> Result<(bool, String)> {
    let nb = hyperbolic_neighbor(&Mat2R::rotation_turns(0.3), GOLDEN, 0.1, 2, 4096)?;
    let c = QpCocycle::new(GOLDEN, nb.map.clone());
    let l = lyapunov_exponent(&c, 10_000_000, 1);
    let err = (l.mean - nb.h).abs();
    let cone = neighbor_cone_test(&nb, GOLDEN, 512);
    Ok((
        nb.distance <= 0.1 && err <= 1e-6 && l.mean > 0.0 && cone < 1.0,
        format!(
            "k = {}, C^2 distance {:.4} (tol 0.1), lyap {:.3e} vs log spec H {:.3e} (tol 1e-6), cone slope {:.9}",
            nb.k, nb.distance, l.mean, nb.h, cone
        ),
    ))
}

fn destabilizer(_: u64) -> Result<(bool, String)> {
    let b = Sl2Map::rotation_path(1);
    let out = schrodinger_destabilizer(&b, Settings::default().bump_delta)?;
    let mu_err = (out.mu - out.mu_limit).abs() / out.mu_limit.abs();
    let nu_err = (out.nu - out.nu_limit).abs() / out.nu_limit.abs();
    Ok((
        out.margin > 0.0 && mu_err <= 0.05 && nu_err <= 0.05,
        format!("margin {:.4} (> 0), mu vs d(x)^2 rel {mu_err:.1e}, nu vs -c(y)^2 rel {nu_err:.1e} (tol 5e-2)", out.margin),
    ))
}
