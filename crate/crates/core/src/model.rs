//! Physical parameters and the drive protocol.
//!
//! Natural units are used throughout: ħ = k_B = 1 and, by default, ω₀ = 1, so
//! energies are in units of ħω₀ and times in units of 1/ω₀. The damping
//! constant `mu` is measured in 1/(ħω₀²).
//!
//! Matrices are written in the diabatic basis ordered (e, g): index 0 is the
//! excited state |e⟩ and index 1 the ground state |g⟩, so that
//! H_S = [[+ω₀/2, λ], [λ, −ω₀/2]].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::{Mat2, C64};

/// Renormalization order n of the dynamical basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Order {
    /// n = 0: undriven eigenbasis.
    Diabatic,
    /// n = 1: instantaneous eigenbasis of H_S(t).
    Adiabatic,
    /// n = 2: first superadiabatic basis.
    Superadiabatic,
}

impl Order {
    pub const ALL: [Order; 3] = [Order::Diabatic, Order::Adiabatic, Order::Superadiabatic];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl TryFrom<u32> for Order {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        match n {
            0 => Ok(Order::Diabatic),
            1 => Ok(Order::Adiabatic),
            2 => Ok(Order::Superadiabatic),
            other => Err(Error::UnsupportedOrder(other)),
        }
    }
}

impl From<Order> for u32 {
    fn from(o: Order) -> u32 {
        o as u32
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u32)
    }
}

/// All physical and numerical parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Resonance angular frequency ω₀.
    pub omega0: f64,
    /// Drive amplitude λ₀.
    pub lambda0: f64,
    /// Drive angular frequency ω_d.
    pub omega_d: f64,
    /// Real part of the coupling strength g.
    pub g_re: f64,
    /// Imaginary part of the coupling strength g.
    pub g_im: f64,
    /// Damping constant μ.
    pub mu: f64,
    /// Inverse bath temperature β.
    pub beta: f64,
    /// Effective dephasing temperature T₀.
    pub t0: f64,
    pub n_cycles: u32,
    /// Renormalization order of the stochastic dynamics.
    pub n_order: Order,
    /// Time steps of the trajectory integration over the whole protocol.
    pub n_steps: u64,
    pub n_traj: u64,
    pub seed: u64,
    /// Fixed-step RK4 steps per drive cycle for the density-matrix integration.
    pub me_steps_per_cycle: u64,
    /// Number of output intervals of population series over the whole protocol.
    pub n_output: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let omega0 = 1.0;
        let temperature = 0.5 * omega0;
        SystemConfig {
            omega0,
            lambda0: 0.5 * omega0,
            omega_d: 0.3 * omega0,
            g_re: omega0 / (5.0 * 2f64.sqrt()),
            g_im: 0.0,
            mu: 1.0 / (omega0 * omega0),
            beta: 1.0 / temperature,
            t0: 2.0 * temperature,
            n_cycles: 3,
            n_order: Order::Superadiabatic,
            n_steps: 100_000,
            n_traj: 100_000,
            seed: 0x5eed_0fc0_ffee,
            me_steps_per_cycle: 100_000,
            n_output: 200,
        }
    }
}

impl SystemConfig {
    /// Sets one parameter by its configuration key from a textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            value
                .trim()
                .parse()
                .map_err(|e: T::Err| Error::invalid(key, format!("cannot parse `{value}`: {e}")))
        }
        match key {
            "omega0" => self.omega0 = parse(key, value)?,
            "lambda0" => self.lambda0 = parse(key, value)?,
            "omega_d" => self.omega_d = parse(key, value)?,
            "g_re" => self.g_re = parse(key, value)?,
            "g_im" => self.g_im = parse(key, value)?,
            "mu" => self.mu = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "t0" => self.t0 = parse(key, value)?,
            "n_cycles" => self.n_cycles = parse(key, value)?,
            "n_order" => self.n_order = Order::try_from(parse::<u32>(key, value)?)?,
            "n_steps" => self.n_steps = parse(key, value)?,
            "n_traj" => self.n_traj = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "me_steps_per_cycle" => self.me_steps_per_cycle = parse(key, value)?,
            "n_output" => self.n_output = parse(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be finite and > 0, got {v}")))
            }
        }
        fn finite(field: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be finite, got {v}")))
            }
        }
        positive("omega0", self.omega0)?;
        positive("omega_d", self.omega_d)?;
        positive("beta", self.beta)?;
        finite("lambda0", self.lambda0)?;
        finite("g_re", self.g_re)?;
        finite("g_im", self.g_im)?;
        finite("mu", self.mu)?;
        if self.mu < 0.0 {
            return Err(Error::invalid("mu", "must be >= 0"));
        }
        finite("t0", self.t0)?;
        if self.t0 < 0.0 {
            return Err(Error::invalid("t0", "must be >= 0"));
        }
        if self.n_cycles == 0 {
            return Err(Error::invalid("n_cycles", "must be >= 1"));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be >= 1"));
        }
        if self.n_steps > u32::MAX as u64 {
            return Err(Error::invalid("n_steps", "must fit in 32 bits"));
        }
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj", "must be >= 1"));
        }
        if self.me_steps_per_cycle == 0 {
            return Err(Error::invalid("me_steps_per_cycle", "must be >= 1"));
        }
        if self.n_output == 0 || self.n_output > self.n_steps {
            return Err(Error::invalid("n_output", "must be in 1..=n_steps"));
        }
        Ok(())
    }

    pub fn g(&self) -> C64 {
        C64::new(self.g_re, self.g_im)
    }

    pub fn drive(&self) -> SinusoidalDrive {
        SinusoidalDrive {
            amplitude: self.lambda0,
            angular_frequency: self.omega_d,
        }
    }

    /// Length of one drive cycle, 2π/ω_d.
    pub fn t_drive(&self) -> f64 {
        2.0 * PI / self.omega_d
    }

    pub fn t_init(&self) -> f64 {
        0.0
    }

    pub fn t_final(&self) -> f64 {
        self.n_cycles as f64 * self.t_drive()
    }

    /// Trajectory time step.
    pub fn dt(&self) -> f64 {
        self.t_final() / self.n_steps as f64
    }

    /// Time of trajectory grid point `k`.
    pub fn step_time(&self, k: u64) -> f64 {
        k as f64 * self.dt()
    }
}

/// λ and its first two time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub lambda: f64,
    pub lambda_dot: f64,
    pub lambda_ddot: f64,
}

impl DriveSample {
    /// A frozen drive: λ held constant with vanishing derivatives.
    pub fn frozen(lambda: f64) -> Self {
        DriveSample {
            lambda,
            lambda_dot: 0.0,
            lambda_ddot: 0.0,
        }
    }
}

/// A control protocol with closed-form λ(t), λ̇(t), λ̈(t).
pub trait DriveProtocol {
    fn sample(&self, t: f64) -> DriveSample;
}

/// λ(t) = λ₀ sin(ω_d t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidalDrive {
    pub amplitude: f64,
    pub angular_frequency: f64,
}

impl DriveProtocol for SinusoidalDrive {
    fn sample(&self, t: f64) -> DriveSample {
        let w = self.angular_frequency;
        let (s, c) = (w * t).sin_cos();
        DriveSample {
            lambda: self.amplitude * s,
            lambda_dot: self.amplitude * w * c,
            lambda_ddot: -self.amplitude * w * w * s,
        }
    }
}

pub fn drive_at(config: &SystemConfig, t: f64) -> DriveSample {
    config.drive().sample(t)
}

/// H_S for a given drive value.
pub fn hamiltonian_for(omega0: f64, lambda: f64) -> Mat2 {
    let h = 0.5 * omega0;
    Mat2([
        [C64::new(h, 0.0), C64::new(lambda, 0.0)],
        [C64::new(lambda, 0.0), C64::new(-h, 0.0)],
    ])
}

pub fn hamiltonian_at(config: &SystemConfig, t: f64) -> Mat2 {
    hamiltonian_for(config.omega0, drive_at(config, t).lambda)
}

/// System part of the coupling operator, Y = g* σ₊ + g σ₋.
pub fn coupling_operator(config: &SystemConfig) -> Mat2 {
    let g = config.g();
    Mat2([[C64::new(0.0, 0.0), g.conj()], [g, C64::new(0.0, 0.0)]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn defaults() -> SystemConfig {
        SystemConfig::default()
    }

    fn central(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        (f(t + h) - f(t - h)) / (2.0 * h)
    }

    #[test]
    fn set_by_key() {
        let mut c = defaults();
        c.set("beta", " 3.5").unwrap();
        c.set("n_order", "1").unwrap();
        assert_eq!(c.beta, 3.5);
        assert_eq!(c.n_order, Order::Adiabatic);
        assert!(matches!(c.set("n_order", "4"), Err(Error::UnsupportedOrder(4))));
        assert!(matches!(c.set("gamma", "1"), Err(Error::UnknownKey(_))));
        assert!(matches!(c.set("n_steps", "-1"), Err(Error::InvalidField { .. })));
    }

    #[test]
    fn drive_at_origin() {
        let c = defaults();
        let d = drive_at(&c, 0.0);
        assert_eq!(d.lambda, 0.0);
        assert_eq!(d.lambda_dot, c.lambda0 * c.omega_d);
        assert_eq!(d.lambda_ddot, 0.0);
    }

    #[test]
    fn drive_at_quarter_cycle() {
        let c = defaults();
        let d = drive_at(&c, c.t_drive() / 4.0);
        assert!((d.lambda - c.lambda0).abs() < 1e-15);
        assert!(d.lambda_dot.abs() < 1e-15);
        assert!((d.lambda_ddot + c.lambda0 * c.omega_d * c.omega_d).abs() < 1e-15);
    }

    #[test]
    fn drive_derivatives_match_finite_differences_at_fixed_time() {
        let c = defaults();
        let t = 0.7;
        let h = 1e-5;
        let d = drive_at(&c, t);
        let fd1 = central(|s| drive_at(&c, s).lambda, t, h);
        let fd2 = (drive_at(&c, t + h).lambda - 2.0 * d.lambda + drive_at(&c, t - h).lambda) / (h * h);
        assert!(((d.lambda_dot - fd1) / d.lambda_dot).abs() < 1e-8);
        // second difference is limited by cancellation; its oracle is the first derivative of λ̇
        let fd2b = central(|s| drive_at(&c, s).lambda_dot, t, h);
        assert!(((d.lambda_ddot - fd2b) / d.lambda_ddot).abs() < 1e-8);
        assert!(((d.lambda_ddot - fd2) / d.lambda_ddot).abs() < 1e-3);
    }

    #[test]
    fn hamiltonian_limits() {
        let c = defaults();
        let h0 = hamiltonian_at(&c, 0.0);
        assert_eq!(h0, Mat2::diag(C64::new(0.5, 0.0), C64::new(-0.5, 0.0)));
        let hq = hamiltonian_at(&c, c.t_drive() / 4.0);
        assert!((hq.0[0][1].re - 0.5).abs() < 1e-15);
        assert!((hq.0[1][0].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lambda_vanishes_at_whole_cycles() {
        let c = defaults();
        for k in 0..=3 {
            assert!(drive_at(&c, k as f64 * c.t_drive()).lambda.abs() < 1e-14);
        }
    }

    #[test]
    fn default_is_valid_and_orders_reject_three() {
        defaults().validate().unwrap();
        assert!(matches!(Order::try_from(3), Err(Error::UnsupportedOrder(3))));
        assert_eq!(Order::try_from(2).unwrap(), Order::Superadiabatic);
    }

    proptest! {
        #[test]
        fn drive_is_periodic(t in 0.0f64..3.0 * 2.0 * PI / 0.3) {
            let c = defaults();
            let a = drive_at(&c, t).lambda;
            let b = drive_at(&c, t + c.t_drive()).lambda;
            prop_assert!((a - b).abs() < 1e-13);
        }

        #[test]
        fn hamiltonian_hermitian_traceless(t in -100.0f64..100.0) {
            let h = hamiltonian_at(&defaults(), t);
            prop_assert!(h.hermiticity_residual() < 1e-15);
            prop_assert!(h.trace().norm() < 1e-15);
        }

        #[test]
        fn derivatives_match_finite_differences(t in 0.0f64..70.0) {
            let c = defaults();
            let h = 1e-6;
            let d = drive_at(&c, t);
            let fd1 = central(|s| drive_at(&c, s).lambda, t, h);
            let fd2 = central(|s| drive_at(&c, s).lambda_dot, t, h);
            // relative where the derivative is not near a zero crossing
            let tol1 = 1e-6 * d.lambda_dot.abs().max(1e-3);
            let tol2 = 1e-6 * d.lambda_ddot.abs().max(1e-3);
            prop_assert!((d.lambda_dot - fd1).abs() < tol1);
            prop_assert!((d.lambda_ddot - fd2).abs() < tol2);
        }
    }
}
