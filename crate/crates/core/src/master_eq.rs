//! Deterministic integration of the secular Lindblad equation.
//!
//! Propagation happens in the fixed diabatic representation with the bare
//! H_S(t); the order-n frame only enters through the Lindblad operators. The
//! rotated-frame Bloch equations provide an independent route to the same
//! populations.

use serde::Serialize;

use crate::dissipation::{rates_at, RateSet};
use crate::error::{Error, Result};
use crate::mat2::{Mat2, C64, E, G, I};
use crate::model::{hamiltonian_at, Order, SystemConfig};
use crate::renorm::{frame1, frame_for};

/// Largest ω·Δt of the RK4 step for which no accuracy warning is emitted.
const RK4_PHASE_PER_STEP_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Mat2);

impl DensityMatrix {
    pub fn from_populations(p_e: f64, p_g: f64) -> Self {
        DensityMatrix(Mat2::diag(C64::new(p_e, 0.0), C64::new(p_g, 0.0)))
    }

    pub fn rho_ee(&self) -> f64 {
        self.0 .0[E][E].re
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = &self.0 .0;
        let a = m[E][E].re;
        let d = m[G][G].re;
        let b = 0.5 * (m[E][G] + m[G][E].conj());
        0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
    }
}

/// Thermal state e^{−βH_S(t)}/Z built from the adiabatic eigenbasis.
pub fn gibbs_state(config: &SystemConfig, t: f64) -> DensityMatrix {
    let f = frame1(config, t);
    let p_e = excited_gibbs_weight(config.beta, f.omega01);
    let rho = f.projector_e().scale_re(p_e) + f.projector_g().scale_re(1.0 - p_e);
    DensityMatrix(rho)
}

/// Thermal occupation of the upper of two levels split by `gap`.
pub fn excited_gibbs_weight(beta: f64, gap: f64) -> f64 {
    1.0 / (1.0 + (beta * gap).exp())
}

/// Right-hand side of the Lindblad equation for given H and jump operators.
pub fn lindblad_rhs_with(rho: &Mat2, h: &Mat2, rates: &RateSet) -> Mat2 {
    let mut out = h.commutator(rho).scale(-I);
    for l in &rates.ops {
        let ld = l.adjoint();
        out = out + *l * *rho * ld - (ld * *l).anticommutator(rho).scale_re(0.5);
    }
    out
}

pub fn lindblad_rhs(rho: &DensityMatrix, t: f64, order: Order, config: &SystemConfig) -> Mat2 {
    let rates = rates_at(&frame_for(config, t, order), config);
    lindblad_rhs_with(&rho.0, &hamiltonian_at(config, t), &rates)
}

/// Trajectory-grid steps at which population series are sampled.
pub fn output_steps(config: &SystemConfig) -> Vec<u64> {
    let stride = (config.n_steps / config.n_output).max(1);
    (0..=config.n_output).map(|j| j * stride).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationSeries {
    pub order: Order,
    pub times: Vec<f64>,
    pub rho_ee: Vec<f64>,
    pub warnings: Vec<String>,
}

fn rk4<S, F>(state: S, t: f64, h: f64, f: F) -> S
where
    S: Copy + std::ops::Add<Output = S>,
    F: Fn(f64, S) -> S,
    S: Scale,
{
    let k1 = f(t, state);
    let k2 = f(t + 0.5 * h, state + k1.scaled(0.5 * h));
    let k3 = f(t + 0.5 * h, state + k2.scaled(0.5 * h));
    let k4 = f(t + h, state + k3.scaled(h));
    state + (k1 + k2.scaled(2.0) + k3.scaled(2.0) + k4).scaled(h / 6.0)
}

trait Scale {
    fn scaled(self, s: f64) -> Self;
}

impl Scale for Mat2 {
    fn scaled(self, s: f64) -> Self {
        self.scale_re(s)
    }
}

/// Integrates over the output grid, calling `step` for each RK4 step and
/// `emit` at every output time (including t = 0).
fn integrate_on_output_grid<S: Copy>(
    config: &SystemConfig,
    mut state: S,
    mut step: impl FnMut(S, f64, f64) -> S,
    mut emit: impl FnMut(f64, &S),
) -> Vec<String> {
    let times: Vec<f64> = output_steps(config)
        .into_iter()
        .map(|k| config.step_time(k))
        .collect();
    let target = config.t_drive() / config.me_steps_per_cycle as f64;
    let mut warnings = Vec::new();
    let mut max_h: f64 = 0.0;
    emit(times[0], &state);
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let substeps = (span / target).ceil().max(1.0) as u64;
        let h = span / substeps as f64;
        max_h = max_h.max(h);
        for s in 0..substeps {
            state = step(state, w[0] + s as f64 * h, h);
        }
        emit(w[1], &state);
    }
    let fastest = (config.omega0 * config.omega0 + 4.0 * config.lambda0 * config.lambda0).sqrt();
    if max_h * fastest > RK4_PHASE_PER_STEP_LIMIT {
        warnings.push(format!(
            "density-matrix step {max_h:.3e} resolves the level splitting poorly (ω·Δt = {:.3e}); raise me_steps_per_cycle",
            max_h * fastest
        ));
    }
    warnings
}

/// Full density matrices on the output grid for order-n dissipation.
pub fn integrate_density(config: &SystemConfig, order: Order) -> (Vec<(f64, DensityMatrix)>, Vec<String>) {
    let rhs = |t: f64, rho: Mat2| {
        let rates = rates_at(&frame_for(config, t, order), config);
        lindblad_rhs_with(&rho, &hamiltonian_at(config, t), &rates)
    };
    let mut out = Vec::with_capacity(config.n_output as usize + 1);
    let warnings = integrate_on_output_grid(
        config,
        gibbs_state(config, config.t_init()).0,
        |rho, t, h| rk4(rho, t, h, rhs),
        |t, rho| out.push((t, DensityMatrix(*rho))),
    );
    (out, warnings)
}

/// ρ_ee(t) of the Lindblad dynamics with order-n dissipation, started from
/// the Gibbs state at t_init.
pub fn integrate_populations(config: &SystemConfig, order: Order) -> PopulationSeries {
    let (samples, warnings) = integrate_density(config, order);
    PopulationSeries {
        order,
        times: samples.iter().map(|(t, _)| *t).collect(),
        rho_ee: samples.iter().map(|(_, r)| r.rho_ee()).collect(),
        warnings,
    }
}

#[derive(Debug, Clone, Copy)]
struct Bloch {
    rho_gg: f64,
    rho_ge: C64,
}

impl std::ops::Add for Bloch {
    type Output = Bloch;
    fn add(self, o: Bloch) -> Bloch {
        Bloch {
            rho_gg: self.rho_gg + o.rho_gg,
            rho_ge: self.rho_ge + o.rho_ge,
        }
    }
}

impl Scale for Bloch {
    fn scaled(self, s: f64) -> Self {
        Bloch {
            rho_gg: self.rho_gg * s,
            rho_ge: self.rho_ge * s,
        }
    }
}

/// Integrates the rotated-frame Bloch equations of order `order` (1 or 2),
/// maps the result back to the diabatic basis and returns the largest
/// absolute deviation of ρ_ee from [`integrate_populations`].
pub fn bloch_crosscheck(config: &SystemConfig, order: Order) -> Result<f64> {
    if order == Order::Diabatic {
        return Err(Error::invalid(
            "n_order",
            "the rotated-frame cross-check needs a frame that diagonalizes H_S (n = 1 or 2)",
        ));
    }
    let rhs = |t: f64, s: Bloch| {
        let f = frame_for(config, t, order);
        let r = rates_at(&f, config);
        let w = f.w_ge;
        let drho_gg = -2.0 * (w.conj() * s.rho_ge).im - (r.gamma_up + r.gamma_down) * s.rho_gg
            + r.gamma_down;
        let decoherence = 0.5 * r.gamma_down + 0.5 * r.gamma_up + 2.0 * r.gamma_phi;
        let drho_ge = I * w * (2.0 * s.rho_gg - 1.0) + I * f.omega01 * s.rho_ge
            - s.rho_ge * decoherence;
        Bloch {
            rho_gg: drho_gg,
            rho_ge: drho_ge,
        }
    };
    let t0 = config.t_init();
    let d0 = frame_for(config, t0, order).basis();
    let rotated = d0.adjoint() * gibbs_state(config, t0).0 * d0;
    let start = Bloch {
        rho_gg: rotated.0[G][G].re,
        rho_ge: rotated.0[G][E],
    };

    let mut bloch_rho_ee = Vec::new();
    integrate_on_output_grid(
        config,
        start,
        |s, t, h| rk4(s, t, h, rhs),
        |t, s| {
            let tilde = Mat2([
                [C64::new(1.0 - s.rho_gg, 0.0), s.rho_ge.conj()],
                [s.rho_ge, C64::new(s.rho_gg, 0.0)],
            ]);
            let d = frame_for(config, t, order).basis();
            bloch_rho_ee.push((d * tilde * d.adjoint()).0[E][E].re);
        },
    );
    let direct = integrate_populations(config, order);
    Ok(direct
        .rho_ee
        .iter()
        .zip(&bloch_rho_ee)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
