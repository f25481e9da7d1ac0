//! Ohmic noise spectrum, drive-dressed rates and Lindblad operators.

use crate::mat2::{Ket, Mat2, C64};
use crate::model::SystemConfig;
use crate::renorm::Frame;

/// Reduced spectral density S(ω) of the ohmic bath.
///
/// For ω ≠ 0 this is 2μω / (1 − e^{−βω}); at ω = 0 the flat dephasing value
/// 2μT₀ is used instead of the ohmic limit 2μ/β.
pub fn spectral_density(omega: f64, config: &SystemConfig) -> f64 {
    if omega == 0.0 {
        2.0 * config.mu * config.t0
    } else {
        2.0 * config.mu * omega / -(-config.beta * omega).exp_m1()
    }
}

/// Transition rates of one frame and the associated jump operators.
///
/// Channel 0 is decay |e⁽ⁿ⁾⟩ → |g⁽ⁿ⁾⟩, channel 1 excitation and channel 2
/// dephasing. Operators are expressed in the diabatic basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    pub gamma_down: f64,
    pub gamma_up: f64,
    pub gamma_phi: f64,
    pub ops: [Mat2; 3],
}

impl RateSet {
    pub fn gammas(&self) -> [f64; 3] {
        [self.gamma_down, self.gamma_up, self.gamma_phi]
    }

    /// Σᵢ Lᵢ†Lᵢ.
    pub fn operator_sum(&self) -> Mat2 {
        self.ops
            .iter()
            .fold(Mat2::zero(), |acc, l| acc + l.adjoint() * *l)
    }
}

fn sqrt_c(x: f64) -> C64 {
    C64::new(x.sqrt(), 0.0)
}

fn jump_operators(rates: [f64; 3], ket_e: &Ket, ket_g: &Ket) -> [Mat2; 3] {
    let [down, up, phi] = rates;
    [
        ket_g.outer(ket_e).scale(sqrt_c(down)),
        ket_e.outer(ket_g).scale(sqrt_c(up)),
        (ket_e.outer(ket_e) - ket_g.outer(ket_g)).scale(sqrt_c(phi)),
    ]
}

pub fn rates_at(frame: &Frame, config: &SystemConfig) -> RateSet {
    let m2 = frame.m2.norm_sqr();
    let gamma_down = spectral_density(frame.omega01, config) * m2;
    let gamma_up = spectral_density(-frame.omega01, config) * m2;
    let gamma_phi = spectral_density(0.0, config) * frame.m1 * frame.m1;
    RateSet {
        gamma_down,
        gamma_up,
        gamma_phi,
        ops: jump_operators([gamma_down, gamma_up, gamma_phi], &frame.ket_e, &frame.ket_g),
    }
}

/// Rates and operators of the time-reversed dynamics at the mirrored instant.
///
/// Γ̄₀ = Γ₁, Γ̄₁ = Γ₀, Γ̄₂ = Γ₂ and L̄ᵢ = √Γ̄ᵢ Aᵢ†, so Σ L̄ᵢ†L̄ᵢ = Σ Lᵢ†Lᵢ.
pub fn reversed_rates(rates: &RateSet) -> RateSet {
    let scaled = |op: &Mat2, from: f64, to: f64| {
        if from > 0.0 {
            op.adjoint().scale_re((to / from).sqrt())
        } else {
            Mat2::zero()
        }
    };
    let [l0, l1, l2] = &rates.ops;
    RateSet {
        gamma_down: rates.gamma_up,
        gamma_up: rates.gamma_down,
        gamma_phi: rates.gamma_phi,
        ops: [
            scaled(l0, rates.gamma_down, rates.gamma_up),
            scaled(l1, rates.gamma_up, rates.gamma_down),
            *l2,
        ],
    }
}
