//! Adiabatic renormalization frames for orders n = 0, 1, 2.
//!
//! A [`Frame`] holds the order-n basis {|e⁽ⁿ⁾⟩, |g⁽ⁿ⁾⟩} expanded in the
//! diabatic basis, the level energies, the off-diagonal element w_ge⁽ⁿ⁾ of the
//! rotation generator ŵₙ = −i Dₙ†Ḋₙ, and the matrix elements
//! m₁⁽ⁿ⁾ = ⟨g⁽ⁿ⁾|Ŷ|g⁽ⁿ⁾⟩ and m₂⁽ⁿ⁾ = ⟨g⁽ⁿ⁾|Ŷ|e⁽ⁿ⁾⟩ of the coupling operator.
//!
//! Phase convention: C_ee⁽¹⁾ and C_gg⁽¹⁾ are real and positive, so the
//! adiabatic kets are a proper rotation of the diabatic ones and stay smooth
//! through λ = 0. At order two C_eg⁽²⁾, C_gg⁽²⁾ are real and C_ee⁽²⁾, C_ge⁽²⁾
//! imaginary, with C_gg⁽²⁾ > 0 and Im C_ee⁽²⁾ > 0. Under this convention the
//! diagonal elements of ŵ₁ and ŵ₂ vanish and w_eg = −w_ge.

use std::f64::consts::SQRT_2;

use crate::error::Result;
use crate::mat2::{Ket, Mat2, C64, I};
use crate::model::{DriveProtocol, DriveSample, Order, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub order: Order,
    pub t: f64,
    pub energy_g: f64,
    pub energy_e: f64,
    /// Gap angular frequency ω₀₁⁽ⁿ⁾ = E_e⁽ⁿ⁾ − E_g⁽ⁿ⁾.
    pub omega01: f64,
    pub ket_g: Ket,
    pub ket_e: Ket,
    pub w_ge: C64,
    pub m1: f64,
    pub m2: C64,
    /// Local (super)adiabatic parameter αₙ = √2 |w_ge⁽ⁿ⁾| / ω₀₁⁽ⁿ⁾.
    pub alpha: f64,
}

impl Frame {
    /// D_S⁽ⁿ⁾, mapping |e⟩ ↦ |e⁽ⁿ⁾⟩ and |g⟩ ↦ |g⁽ⁿ⁾⟩.
    pub fn basis(&self) -> Mat2 {
        Mat2::from_columns(&self.ket_e, &self.ket_g)
    }

    pub fn projector_e(&self) -> Mat2 {
        self.ket_e.outer(&self.ket_e)
    }

    pub fn projector_g(&self) -> Mat2 {
        self.ket_g.outer(&self.ket_g)
    }

    /// ŵₙ in the fixed (e, g) index basis.
    pub fn rotation_generator(&self) -> Mat2 {
        Mat2([[C64::new(0.0, 0.0), -self.w_ge], [self.w_ge, C64::new(0.0, 0.0)]])
    }
}

/// Time-independent diabatic frame (n = 0).
pub fn frame0(config: &SystemConfig) -> Frame {
    let half = 0.5 * config.omega0;
    Frame {
        order: Order::Diabatic,
        t: 0.0,
        energy_g: -half,
        energy_e: half,
        omega01: config.omega0,
        ket_g: Ket::ground(),
        ket_e: Ket::excited(),
        w_ge: C64::new(0.0, 0.0),
        m1: 0.0,
        m2: config.g(),
        alpha: 0.0,
    }
}

/// Adiabatic frame together with the time derivatives needed at order two.
struct AdiabaticParts {
    frame: Frame,
    energy_e_dot: f64,
    w_ge_dot: C64,
}

fn adiabatic_parts(omega0: f64, g: C64, t: f64, d: DriveSample) -> AdiabaticParts {
    let lambda = d.lambda;
    let gap = (omega0 * omega0 + 4.0 * lambda * lambda).sqrt();

    // Amplitudes with ħω₀ − √(ħ²ω₀² + 4λ²) rewritten as −4λ²/(ħω₀ + √(…)); the
    // factors of 1/(2λ) then cancel and the expressions are regular at λ = 0.
    let sum = omega0 + gap;
    let norm = (sum * sum + 4.0 * lambda * lambda).sqrt();
    let c_ee = sum / norm;
    let c_eg = 2.0 * lambda / norm;
    let c_gg = c_ee;
    let c_ge = -c_eg;

    let energy_e = 0.5 * gap;
    let energy_g = -0.5 * gap;

    let overlap = c_ee * c_gg + c_eg * c_ge;
    let w_ge = -I * (d.lambda_dot * overlap / (energy_e - energy_g));

    let c = |x: f64| C64::new(x, 0.0);
    let m1 = 2.0 * (g * c(c_gg) * c(c_ge)).re;
    let m2 = g * c(c_gg) * c(c_ee) + g.conj() * c(c_ge) * c(c_eg);

    let denom = 4.0 * lambda * lambda + omega0 * omega0;
    let energy_e_dot = d.lambda_dot * 2.0 * lambda / denom.sqrt();
    let w_ge_dot = -I * (d.lambda_ddot * omega0 / denom)
        + I * (d.lambda_dot * d.lambda_dot * 8.0 * omega0 * lambda / (denom * denom));

    let omega01 = energy_e - energy_g;
    AdiabaticParts {
        frame: Frame {
            order: Order::Adiabatic,
            t,
            energy_g,
            energy_e,
            omega01,
            ket_g: Ket::new(c(c_ge), c(c_gg)),
            ket_e: Ket::new(c(c_ee), c(c_eg)),
            w_ge,
            m1,
            m2,
            alpha: SQRT_2 * w_ge.norm() / omega01,
        },
        energy_e_dot,
        w_ge_dot,
    }
}

/// Adiabatic frame (n = 1) for an explicit drive sample.
pub fn adiabatic_frame(omega0: f64, g: C64, t: f64, d: DriveSample) -> Frame {
    adiabatic_parts(omega0, g, t, d).frame
}

/// First superadiabatic frame (n = 2) for an explicit drive sample.
pub fn superadiabatic_frame(omega0: f64, g: C64, t: f64, d: DriveSample) -> Frame {
    let AdiabaticParts {
        frame: f1,
        energy_e_dot,
        w_ge_dot,
    } = adiabatic_parts(omega0, g, t, d);
    let energy_g_dot = -energy_e_dot;

    let w1 = f1.w_ge;
    let w1_abs2 = w1.norm_sqr();
    let omega01 = (f1.omega01 * f1.omega01 + 4.0 * w1_abs2).sqrt();
    let energy_e = 0.5 * omega01;
    let energy_g = -0.5 * omega01;

    // E_e⁽²⁾ − E_g⁽¹⁾ = (ω₀₁⁽¹⁾ + ω₀₁⁽²⁾)/2; E_g⁽²⁾ − E_g⁽¹⁾ = −2|w|²/(ω₀₁⁽¹⁾ + ω₀₁⁽²⁾).
    let half_sum = 0.5 * (f1.omega01 + omega01);
    let norm = (w1_abs2 + half_sum * half_sum).sqrt();
    let c_ee = I * (half_sum / norm);
    let c_eg = I * w1 / norm;
    let c_gg = C64::new(half_sum / norm, 0.0);
    let c_ge = -w1.conj() / norm;

    let ket_e = f1.ket_e.scale(c_ee) + f1.ket_g.scale(c_eg);
    let ket_g = f1.ket_e.scale(c_ge) + f1.ket_g.scale(c_gg);

    let e_dot = C64::new(energy_e_dot, 0.0);
    let g_dot = C64::new(energy_g_dot, 0.0);
    let numerator = c_ge.conj() * (c_ee * e_dot - c_eg * w_ge_dot)
        + c_gg.conj() * (c_eg * g_dot + c_ee * w_ge_dot);
    let w_ge = -I * numerator / (energy_e - energy_g);

    let m1_prev = C64::new(f1.m1, 0.0);
    let m2_prev = f1.m2;
    let m1 = (c_gg.norm_sqr() - c_ge.norm_sqr()) * f1.m1
        + 2.0 * (c_ge * c_gg.conj() * m2_prev).re;
    let m2 = (c_gg.conj() * c_eg - c_ge.conj() * c_ee) * m1_prev
        + c_gg.conj() * c_ee * m2_prev
        + c_ge.conj() * c_eg * m2_prev.conj();

    Frame {
        order: Order::Superadiabatic,
        t,
        energy_g,
        energy_e,
        omega01,
        ket_g,
        ket_e,
        w_ge,
        m1,
        m2,
        alpha: SQRT_2 * w_ge.norm() / omega01,
    }
}

pub fn frame1(config: &SystemConfig, t: f64) -> Frame {
    adiabatic_frame(config.omega0, config.g(), t, config.drive().sample(t))
}

pub fn frame2(config: &SystemConfig, t: f64) -> Frame {
    superadiabatic_frame(config.omega0, config.g(), t, config.drive().sample(t))
}

/// Frame of the given order at time `t`.
pub fn frame_for(config: &SystemConfig, t: f64, order: Order) -> Frame {
    match order {
        Order::Diabatic => Frame { t, ..frame0(config) },
        Order::Adiabatic => frame1(config, t),
        Order::Superadiabatic => frame2(config, t),
    }
}

/// Frame dispatch on a raw order number.
pub fn frame_at(config: &SystemConfig, t: f64, n: u32) -> Result<Frame> {
    Ok(frame_for(config, t, Order::try_from(n)?))
}

/// One row of the local adiabatic-parameter table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSample {
    pub t_over_tdrive: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// α₁ and α₂ on `points + 1` equidistant times covering one drive cycle.
pub fn alpha_table(config: &SystemConfig, points: usize) -> Vec<AlphaSample> {
    let period = config.t_drive();
    (0..=points)
        .map(|i| {
            let x = i as f64 / points as f64;
            let t = x * period;
            AlphaSample {
                t_over_tdrive: x,
                alpha1: frame1(config, t).alpha,
                alpha2: frame2(config, t).alpha,
            }
        })
        .collect()
}
