use serde::{Deserialize, Serialize};

/// Fixed numerical thresholds shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub unimodular: f64,
    pub cone: f64,
    pub light_cone_ratio: f64,
    pub pole: f64,
    pub overflow: f64,
    pub rational_stop: f64,
    pub small_divisor: f64,
    pub hyperbolicity_ratio: f64,
}

pub const TOL: Tolerances = Tolerances {
    unimodular: 1e-12,
    cone: 1e-12,
    light_cone_ratio: 1e-10,
    pole: 1e-300,
    overflow: 1e300,
    rational_stop: 1e-14,
    small_divisor: 1e-12,
    hyperbolicity_ratio: 10.0,
};

/// Tunable constants of the numerical schemes. The CLI reads these from its
/// configuration document; library defaults are [`Settings::default`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub grid: usize,
    pub rotation_iterations: usize,
    pub lyapunov_iterations: usize,
    pub lyapunov_samples: usize,
    pub renorm_grid: usize,
    pub renorm_domain: (f64, f64),
    pub nu_grid: usize,
    pub cone_margin: f64,
    pub section_grid: usize,
    pub section_tol: f64,
    pub max_sweeps: usize,
    pub normal_form_a: f64,
    pub normal_form_eps0: f64,
    pub kam_max_steps: usize,
    pub bump_delta: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            grid: 4096,
            rotation_iterations: 100_000,
            lyapunov_iterations: 10_000,
            lyapunov_samples: 64,
            renorm_grid: 1 << 14,
            renorm_domain: (-5.0, 6.0),
            nu_grid: 64,
            cone_margin: 0.5,
            section_grid: 4096,
            section_tol: 1e-10,
            max_sweeps: 10_000,
            normal_form_a: 2.0,
            normal_form_eps0: 1e-2,
            kam_max_steps: 8,
            bump_delta: 0.02,
        }
    }
}
