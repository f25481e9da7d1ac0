//! Quantum-jump unraveling with the two-measurement protocol.
//!
//! Trajectories follow the first-order update ψ ↦ (1 − i dt H_eff) ψ / N with
//! at most one jump per step, H_eff and the rates taken at the left end of
//! each step. The waiting time to the next jump is drawn by comparing the
//! accumulated no-jump survival Πₖ(1 − pₖ) against one uniform threshold,
//! which is equivalent in distribution to a Bernoulli draw per step.
//!
//! Between jumps the update is linear, so the state at step k is Vₖφ with
//! Vₖ a product of step propagators since the last block anchor and φ fixed.
//! The per-step jump probability pₖ = dt⟨ψₖ|K|ψₖ⟩/⟨ψₖ|ψₖ⟩ is then a ratio of
//! two quadratic forms in φ whose coefficients are tabulated once per run.
//! Blocks are kept short enough that Vₖ stays well conditioned. The hot loop
//! advances [`LANES`] trajectories in lockstep over the shared [`StepTable`];
//! lanes never interact, so results do not depend on batching.

use serde::Serialize;

use crate::dissipation::{rates_at, reversed_rates, RateSet};
use crate::error::{Error, Result};
use crate::mat2::{Ket, Mat2, C64, E, G, I};
use crate::master_eq::{excited_gibbs_weight, output_steps};
use crate::model::{hamiltonian_at, Order, SystemConfig};
use crate::renorm::{frame1, frame_for, Frame};
use crate::rng::{Purpose, StreamRng};

/// Trajectories advanced together by the batched kernel.
pub const LANES: usize = 16;

/// dt·ω₀ above which the first-order update is flagged as too coarse.
pub const COARSE_STEP_LIMIT: f64 = 1e-2;

const MAX_BLOCK: usize = 4096;
const MIN_BLOCK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Level {
    #[serde(rename = "g")]
    Ground,
    #[serde(rename = "e")]
    Excited,
}

impl Level {
    pub fn symbol(self) -> char {
        match self {
            Level::Ground => 'g',
            Level::Excited => 'e',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumState {
    pub ket: Ket,
    /// Squared norm of the unnormalized state produced by the last update.
    pub norm_sqr: f64,
}

impl QuantumState {
    pub fn new(ket: Ket) -> Self {
        QuantumState {
            ket: ket.normalized(),
            norm_sqr: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    pub t_j: f64,
    pub channel: usize,
    pub omega01_n: f64,
    pub gamma_forward: f64,
    pub gamma_reversed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub index: u64,
    pub order: Order,
    pub k_init: Level,
    pub l_final: Level,
    pub e_init: f64,
    pub e_final: f64,
    pub events: Vec<JumpEvent>,
}

impl TrajectoryRecord {
    pub fn delta_e(&self) -> f64 {
        self.e_final - self.e_init
    }

    /// Heat released into the bath along the dynamics-order frame.
    pub fn heat_total(&self) -> f64 {
        self.events.iter().map(heat_of_jump).fold(0.0, |q, h| q + h)
    }

    pub fn work(&self) -> f64 {
        self.delta_e() + self.heat_total()
    }

    pub fn jump_counts(&self) -> [u64; 3] {
        let mut c = [0; 3];
        for e in &self.events {
            c[e.channel] += 1;
        }
        c
    }
}

pub fn effective_hamiltonian(t: f64, order: Order, config: &SystemConfig) -> Mat2 {
    let rates = rates_at(&frame_for(config, t, order), config);
    hamiltonian_at(config, t) - rates.operator_sum().scale(C64::new(0.0, 0.5))
}

/// First-order update for one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEntry {
    /// 1 − i dt H_eff.
    pub propagator: Mat2,
    /// dt Σᵢ Lᵢ†Lᵢ.
    pub decay: Mat2,
}

impl StepEntry {
    pub fn new(config: &SystemConfig, t: f64, dt: f64, order: Order) -> Self {
        let rates = rates_at(&frame_for(config, t, order), config);
        let k = rates.operator_sum();
        let h_eff = hamiltonian_at(config, t) - k.scale(C64::new(0.0, 0.5));
        StepEntry {
            propagator: Mat2::identity() - h_eff.scale(I * dt),
            decay: k.scale_re(dt),
        }
    }
}

/// Coefficients c with φ†Hφ = c · moments(φ) for Hermitian H.
fn hermitian_form(h: &Mat2) -> [f64; 4] {
    let eg = h.0[E][G];
    [h.0[E][E].re, h.0[G][G].re, 2.0 * eg.re, -2.0 * eg.im]
}

/// (|φ_e|², |φ_g|², Re φ_e*φ_g, Im φ_e*φ_g)
fn moments(phi: &Ket) -> [f64; 4] {
    let [e, g] = phi.0;
    let c = e.conj() * g;
    [e.norm_sqr(), g.norm_sqr(), c.re, c.im]
}

fn inverse(m: &Mat2) -> Mat2 {
    let [[a, b], [c, d]] = m.0;
    let inv_det = (a * d - b * c).inv();
    Mat2([[d * inv_det, -b * inv_det], [-c * inv_det, a * inv_det]])
}

/// Tabulated propagation data for one dynamics order on the trajectory grid.
#[derive(Debug, Clone)]
pub struct StepTable {
    order: Order,
    dt: f64,
    block_len: usize,
    /// Per step: forms of dt⟨ψₖ|K|ψₖ⟩ and ⟨ψₖ|ψₖ⟩ in the anchor moments.
    forms: Vec<[f64; 8]>,
    /// Vₖ₊₁ = Mₖ Vₖ relative to the anchor of the block holding step k.
    transfer: Vec<Mat2>,
}

impl StepTable {
    pub fn new(config: &SystemConfig, order: Order) -> Self {
        let dt = config.dt();
        let entries: Vec<StepEntry> = (0..config.n_steps)
            .map(|k| StepEntry::new(config, config.step_time(k), dt, order))
            .collect();
        let total_decay = entries
            .iter()
            .map(|e| e.decay.trace().re)
            .fold(0.0, f64::max);
        let block_len = if total_decay > 0.0 {
            ((1.0 / total_decay).floor() as usize).clamp(MIN_BLOCK, MAX_BLOCK)
        } else {
            MAX_BLOCK
        };

        let mut forms = Vec::with_capacity(entries.len());
        let mut transfer = Vec::with_capacity(entries.len());
        let mut v = Mat2::identity();
        for (k, e) in entries.iter().enumerate() {
            if k % block_len == 0 {
                v = Mat2::identity();
            }
            let vd = v.adjoint();
            let a = hermitian_form(&(vd * e.decay * v));
            let b = hermitian_form(&(vd * v));
            forms.push([a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]]);
            v = e.propagator * v;
            transfer.push(v);
        }
        StepTable {
            order,
            dt,
            block_len,
            forms,
            transfer,
        }
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Unnormalized state at step k for anchor vector φ, after the anchor of
    /// step k has been applied (k < len), or at the end of the run (k = len).
    fn state(&self, k: usize, phi: &Ket) -> Ket {
        if k.is_multiple_of(self.block_len) && k < self.len() {
            *phi
        } else {
            self.transfer[k - 1].apply(phi)
        }
    }
}

pub fn no_jump_step(
    psi: &QuantumState,
    t: f64,
    dt: f64,
    order: Order,
    config: &SystemConfig,
) -> (QuantumState, f64) {
    let entry = StepEntry::new(config, t, dt, order);
    let out = entry.propagator.apply(&psi.ket);
    let n2 = out.norm_sqr();
    let next = QuantumState {
        ket: out.scale(C64::new(1.0 / n2.sqrt(), 0.0)),
        norm_sqr: n2,
    };
    (next, n2)
}

pub fn jump_probabilities_with(psi: &Ket, dt: f64, rates: &RateSet) -> [f64; 3] {
    rates.ops.map(|l| dt * l.apply(psi).norm_sqr())
}

pub fn jump_probabilities(
    psi: &QuantumState,
    t: f64,
    dt: f64,
    order: Order,
    config: &SystemConfig,
) -> [f64; 3] {
    let rates = rates_at(&frame_for(config, t, order), config);
    jump_probabilities_with(&psi.ket, dt, &rates)
}

pub fn collapse_with(psi: &Ket, channel: usize, rates: &RateSet) -> Result<QuantumState> {
    let op = rates
        .ops
        .get(channel)
        .ok_or_else(|| Error::invalid("channel", format!("{channel} is not one of 0, 1, 2")))?;
    let out = op.apply(psi);
    let n2 = out.norm_sqr();
    if n2 <= 0.0 || !n2.is_finite() {
        return Err(Error::ZeroProbabilityCollapse { channel });
    }
    Ok(QuantumState::new(out))
}

pub fn collapse(
    psi: &QuantumState,
    channel: usize,
    t: f64,
    order: Order,
    config: &SystemConfig,
) -> Result<QuantumState> {
    let rates = rates_at(&frame_for(config, t, order), config);
    collapse_with(&psi.ket, channel, &rates)
}

/// Inverse-CDF channel choice over (p0, p1, p2) for a uniform `u`.
pub fn select_channel(p: [f64; 3], u: f64) -> usize {
    let target = u * (p[0] + p[1] + p[2]);
    let mut cumulative = 0.0;
    let mut last_open = 0;
    for (i, &pi) in p.iter().enumerate() {
        if pi > 0.0 {
            cumulative += pi;
            last_open = i;
            if target < cumulative {
                return i;
            }
        }
    }
    last_open
}

pub fn initial_measurement(rng: &mut StreamRng, config: &SystemConfig) -> (Level, f64, QuantumState) {
    measure_gibbs(&frame1(config, config.t_init()), config.beta, rng.uniform(0, Purpose::InitialMeasurement))
}

fn measure_gibbs(f: &Frame, beta: f64, u: f64) -> (Level, f64, QuantumState) {
    if u < excited_gibbs_weight(beta, f.omega01) {
        (Level::Excited, f.energy_e, QuantumState::new(f.ket_e))
    } else {
        (Level::Ground, f.energy_g, QuantumState::new(f.ket_g))
    }
}

pub fn final_measurement(
    rng: &mut StreamRng,
    psi: &QuantumState,
    t_final: f64,
    config: &SystemConfig,
) -> (Level, f64) {
    measure_born(&frame1(config, t_final), &psi.ket, rng.uniform(0, Purpose::FinalMeasurement))
}

fn measure_born(f: &Frame, psi: &Ket, u: f64) -> (Level, f64) {
    if u < f.ket_e.inner(psi).norm_sqr() / psi.norm_sqr() {
        (Level::Excited, f.energy_e)
    } else {
        (Level::Ground, f.energy_g)
    }
}

pub fn heat_with_gap(channel: usize, omega01: f64) -> f64 {
    match channel {
        0 => omega01,
        1 => -omega01,
        _ => 0.0,
    }
}

pub fn heat_of_jump(event: &JumpEvent) -> f64 {
    heat_with_gap(event.channel, event.omega01_n)
}

/// Work of a recorded trajectory with heats assigned from the order-`n_prime`
/// frame gap at each jump time.
pub fn reassign_work(record: &TrajectoryRecord, n_prime: u32, config: &SystemConfig) -> Result<f64> {
    let order = Order::try_from(n_prime)?;
    let heat = record
        .events
        .iter()
        .map(|e| {
            let gap = if order == record.order {
                e.omega01_n
            } else {
                frame_for(config, e.t_j, order).omega01
            };
            heat_with_gap(e.channel, gap)
        })
        .fold(0.0, |q, h| q + h);
    Ok(record.delta_e() + heat)
}

/// Sums of ρ_ee and ρ_ee² over trajectories at the output times.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationAccumulator {
    pub count: u64,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl PopulationAccumulator {
    pub fn new(points: usize) -> Self {
        PopulationAccumulator {
            count: 0,
            sum: vec![0.0; points],
            sum_sq: vec![0.0; points],
        }
    }

    pub fn merge(&mut self, other: &PopulationAccumulator) {
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        self.sum.iter().map(|s| s / self.count as f64).collect()
    }

    /// Standard error of the mean at each output time.
    pub fn sem(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, s2)| {
                let mean = s / n;
                let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            })
            .collect()
    }
}

/// Everything a batch needs besides the step table.
#[derive(Debug, Clone)]
pub struct EngineContext {
    pub config: SystemConfig,
    pub output_steps: Vec<u64>,
    initial: Frame,
    terminal: Frame,
}

impl EngineContext {
    pub fn new(config: &SystemConfig) -> Self {
        EngineContext {
            config: config.clone(),
            output_steps: output_steps(config),
            initial: frame1(config, config.t_init()),
            terminal: frame1(config, config.t_final()),
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        let phase = self.config.dt() * self.config.omega0;
        if phase >= COARSE_STEP_LIMIT {
            vec![format!(
                "trajectory step dt·ω₀ = {phase:.3e} exceeds {COARSE_STEP_LIMIT:.0e}; raise n_steps"
            )]
        } else {
            Vec::new()
        }
    }
}

#[derive(Default)]
struct Lanes {
    x0: [f64; LANES],
    x1: [f64; LANES],
    x2: [f64; LANES],
    x3: [f64; LANES],
    survival: [f64; LANES],
    threshold: [f64; LANES],
}

impl Lanes {
    fn set_anchor(&mut self, l: usize, phi: &Ket) {
        let [a, b, c, d] = moments(phi);
        self.x0[l] = a;
        self.x1[l] = b;
        self.x2[l] = c;
        self.x3[l] = d;
    }
}

/// Survival update of every lane for one step; true if any lane jumps.
#[inline(always)]
fn advance(f: &[f64; 8], lanes: &mut Lanes) -> bool {
    let mut any = false;
    for l in 0..LANES {
        let (x0, x1, x2, x3) = (lanes.x0[l], lanes.x1[l], lanes.x2[l], lanes.x3[l]);
        let loss = f[0] * x0 + f[1] * x1 + f[2] * x2 + f[3] * x3;
        let norm = f[4] * x0 + f[5] * x1 + f[6] * x2 + f[7] * x3;
        let s = lanes.survival[l] * (1.0 - loss / norm);
        any |= s < lanes.threshold[l];
        lanes.survival[l] = s;
    }
    any
}

fn rho_ee(psi: &Ket) -> f64 {
    psi.0[E].norm_sqr() / psi.norm_sqr()
}

/// Runs trajectories `first .. first + count` (`count ≤ LANES`).
///
/// Population samples of the first `count` lanes are added to `populations`
/// in index order when given.
pub fn simulate_batch(
    table: &StepTable,
    ctx: &EngineContext,
    first: u64,
    count: usize,
    mut populations: Option<&mut PopulationAccumulator>,
) -> Vec<TrajectoryRecord> {
    assert!(count <= LANES);
    let config = &ctx.config;
    let mut rngs: Vec<StreamRng> = (0..LANES as u64)
        .map(|l| StreamRng::new(config.seed, first + l))
        .collect();
    let mut lanes = Lanes::default();
    let mut phi = [Ket::ground(); LANES];
    let mut records = Vec::with_capacity(LANES);
    for (l, rng) in rngs.iter_mut().enumerate() {
        let (level, energy, state) =
            measure_gibbs(&ctx.initial, config.beta, rng.uniform(0, Purpose::InitialMeasurement));
        phi[l] = state.ket;
        lanes.set_anchor(l, &phi[l]);
        lanes.survival[l] = 1.0;
        lanes.threshold[l] = rng.uniform(0, Purpose::JumpThreshold);
        records.push(TrajectoryRecord {
            index: first + l as u64,
            order: table.order,
            k_init: level,
            l_final: level,
            e_init: energy,
            e_final: energy,
            events: Vec::new(),
        });
    }

    let mut sample = |j: usize, k: usize, phi: &[Ket; LANES]| {
        if let Some(acc) = populations.as_deref_mut() {
            for p in phi.iter().take(count) {
                let r = rho_ee(&table.state(k, p));
                acc.sum[j] += r;
                acc.sum_sq[j] += r * r;
            }
        }
    };

    let n = table.len();
    let mut next_out = 0;
    for (k, form) in table.forms.iter().enumerate() {
        if k > 0 && k % table.block_len == 0 {
            for (l, p) in phi.iter_mut().enumerate() {
                *p = table.transfer[k - 1].apply(p).normalized();
                lanes.set_anchor(l, p);
            }
        }
        if ctx.output_steps.get(next_out) == Some(&(k as u64)) {
            sample(next_out, k, &phi);
            next_out += 1;
        }
        if advance(form, &mut lanes) {
            for l in 0..LANES {
                if lanes.survival[l] < lanes.threshold[l] {
                    let psi = table.state(k, &phi[l]).normalized();
                    let (state, event) = jump(config, table, k as u64, &psi, &mut rngs[l]);
                    records[l].events.push(event);
                    phi[l] = inverse(&table.transfer[k]).apply(&state.ket);
                    lanes.set_anchor(l, &phi[l]);
                    lanes.survival[l] = 1.0;
                    lanes.threshold[l] = rngs[l].uniform(k as u64 + 1, Purpose::JumpThreshold);
                }
            }
        }
    }
    if ctx.output_steps.get(next_out) == Some(&(n as u64)) {
        sample(next_out, n, &phi);
    }
    if let Some(acc) = populations {
        acc.count += count as u64;
    }

    for (l, rec) in records.iter_mut().enumerate() {
        let psi = table.state(n, &phi[l]);
        let (level, energy) = measure_born(
            &ctx.terminal,
            &psi,
            rngs[l].uniform(0, Purpose::FinalMeasurement),
        );
        rec.l_final = level;
        rec.e_final = energy;
    }
    records.truncate(count);
    records
}

#[cold]
fn jump(
    config: &SystemConfig,
    table: &StepTable,
    k: u64,
    psi: &Ket,
    rng: &mut StreamRng,
) -> (QuantumState, JumpEvent) {
    let t = config.step_time(k);
    let frame = frame_for(config, t, table.order);
    let rates = rates_at(&frame, config);
    let p = jump_probabilities_with(psi, table.dt, &rates);
    let channel = select_channel(p, rng.uniform(k, Purpose::Channel));
    let state = collapse_with(psi, channel, &rates)
        .expect("channel chosen with positive probability");
    let reversed = reversed_rates(&rates);
    let event = JumpEvent {
        t_j: t,
        channel,
        omega01_n: frame.omega01,
        gamma_forward: rates.gammas()[channel],
        gamma_reversed: reversed.gammas()[channel],
    };
    (state, event)
}

/// Single trajectory of the configured dynamics order.
pub fn run_trajectory(config: &SystemConfig, traj_index: u64) -> TrajectoryRecord {
    let table = StepTable::new(config, config.n_order);
    let ctx = EngineContext::new(config);
    simulate_batch(&table, &ctx, traj_index, 1, None).remove(0)
}
