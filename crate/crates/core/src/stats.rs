//! Work distributions, moments, Jarzynski and integral fluctuation theorem
//! estimators, and trajectory entropy production.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jump_engine::{Level, TrajectoryRecord};
use crate::master_eq::excited_gibbs_weight;
use crate::model::{Order, SystemConfig};
use crate::renorm::frame1;

/// Two-sided 95 % normal quantile.
pub const Z95: f64 = 1.96;

/// Running count, sum and sum of squares; merging is associative up to
/// floating-point reassociation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MomentAccumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn from_samples(samples: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = MomentAccumulator::default();
        for x in samples {
            acc.push(x);
        }
        acc
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Sample standard deviation over √N.
    pub fn sem(&self) -> f64 {
        let n = self.count as f64;
        let mean = self.mean();
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.mean(), self.sem())
    }
}

/// A value with its standard error and 1.96σ interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub sem: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    pub fn new(value: f64, sem: f64) -> Self {
        Estimate {
            value,
            sem,
            ci_low: value - Z95 * sem,
            ci_high: value + Z95 * sem,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkEnsemble {
    pub samples: Vec<f64>,
    pub dynamics: Order,
    pub assignment: Order,
}

impl WorkEnsemble {
    pub fn new(samples: Vec<f64>, dynamics: Order, assignment: Order) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|w| !w.is_finite()) {
            return Err(Error::invalid("work", format!("non-finite sample {bad}")));
        }
        Ok(WorkEnsemble {
            samples,
            dynamics,
            assignment,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkHistogram {
    pub bin_width: f64,
    /// Bin index i covers [(i − ½)w, (i + ½)w).
    pub counts: BTreeMap<i64, u64>,
    pub total: u64,
}

impl WorkHistogram {
    pub fn bin_of(&self, w: f64) -> i64 {
        (w / self.bin_width).round() as i64
    }

    pub fn center(&self, bin: i64) -> f64 {
        bin as f64 * self.bin_width
    }

    pub fn density(&self, bin: i64) -> f64 {
        let c = self.counts.get(&bin).copied().unwrap_or(0);
        c as f64 / (self.total as f64 * self.bin_width)
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.len()
    }

    /// Bin centers and densities over the full occupied range, zeros included.
    pub fn dense(&self) -> Vec<(f64, f64)> {
        match (self.counts.keys().next(), self.counts.keys().next_back()) {
            (Some(&lo), Some(&hi)) => (lo..=hi).map(|b| (self.center(b), self.density(b))).collect(),
            _ => Vec::new(),
        }
    }

    pub fn normalization(&self) -> f64 {
        self.counts.keys().map(|&b| self.density(b) * self.bin_width).sum()
    }
}

pub fn histogram(ensemble: &WorkEnsemble, bin_width: f64) -> Result<WorkHistogram> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::invalid("bin_width", format!("must be > 0, got {bin_width}")));
    }
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut h = WorkHistogram {
        bin_width,
        counts: BTreeMap::new(),
        total: ensemble.len() as u64,
    };
    for &w in &ensemble.samples {
        *h.counts.entry(h.bin_of(w)).or_insert(0) += 1;
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
    pub sem_mean: f64,
    pub sem_second: f64,
}

pub fn moments(ensemble: &WorkEnsemble) -> Result<Moments> {
    if ensemble.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: ensemble.len(),
        });
    }
    let first = MomentAccumulator::from_samples(ensemble.samples.iter().copied());
    let second = MomentAccumulator::from_samples(ensemble.samples.iter().map(|w| w * w));
    Ok(Moments {
        mean: first.mean(),
        second_moment: second.mean(),
        sem_mean: first.sem(),
        sem_second: second.sem(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JarzynskiEstimate {
    /// ⟨e^{−βW}⟩
    pub mean_exp: f64,
    /// |1 − ⟨e^{−βW}⟩e^{βΔF}|
    pub deviation: f64,
    /// Standard error of the deviation.
    pub sem: f64,
}

pub fn jarzynski(ensemble: &WorkEnsemble, beta: f64, delta_f: f64) -> JarzynskiEstimate {
    let acc = MomentAccumulator::from_samples(ensemble.samples.iter().map(|w| (-beta * w).exp()));
    let scale = (beta * delta_f).exp();
    JarzynskiEstimate {
        mean_exp: acc.mean(),
        deviation: (1.0 - acc.mean() * scale).abs(),
        sem: acc.sem() * scale,
    }
}

/// −β⁻¹ ln[Z(t_final)/Z(t_init)] with Z = 2cosh(βω₀₁⁽¹⁾/2).
pub fn free_energy_difference(config: &SystemConfig, t_init: f64, t_final: f64) -> f64 {
    let (a, b) = (frame1(config, t_init).omega01, frame1(config, t_final).omega01);
    let beta = config.beta;
    // ln cosh(x) − ln cosh(y) without overflow at large β.
    let ln_cosh = |x: f64| x.abs() + (-2.0 * x.abs()).exp().ln_1p() - std::f64::consts::LN_2;
    -(ln_cosh(0.5 * beta * b) - ln_cosh(0.5 * beta * a)) / beta
}

/// ln of the Gibbs probability of `level` at time t.
fn ln_gibbs(config: &SystemConfig, t: f64, level: Level) -> f64 {
    let p_e = excited_gibbs_weight(config.beta, frame1(config, t).omega01);
    match level {
        Level::Excited => p_e.ln(),
        Level::Ground => (-p_e).ln_1p(),
    }
}

/// Trajectory entropy production R with Gibbs boundary distributions.
///
/// Returns +∞ when a reversed rate in the product vanishes.
pub fn entropy_production(record: &TrajectoryRecord, config: &SystemConfig) -> f64 {
    let boundary = ln_gibbs(config, config.t_init(), record.k_init)
        - ln_gibbs(config, config.t_final(), record.l_final);
    record.events.iter().fold(boundary, |r, e| {
        if e.gamma_forward == e.gamma_reversed {
            r
        } else if e.gamma_reversed == 0.0 {
            f64::INFINITY
        } else {
            r + (e.gamma_forward / e.gamma_reversed).ln()
        }
    })
}

/// ⟨e^{−R}⟩ with its standard error.
pub fn ift_check<'a>(
    records: impl IntoIterator<Item = &'a TrajectoryRecord>,
    config: &SystemConfig,
) -> Result<Estimate> {
    let acc = MomentAccumulator::from_samples(
        records
            .into_iter()
            .map(|r| (-entropy_production(r, config)).exp()),
    );
    if acc.count == 0 {
        return Err(Error::EmptyEnsemble);
    }
    Ok(acc.estimate())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationReport {
    pub dynamics_order: Order,
    pub work_order: Order,
    pub n_traj: u64,
    pub beta: f64,
    pub delta_f: f64,
    pub jarzynski_mean: Estimate,
    pub jarzynski_deviation: Estimate,
    pub ift_mean: Option<Estimate>,
    pub first_moment: Estimate,
    pub second_moment: Estimate,
}

impl FluctuationReport {
    /// Builds the report for a work ensemble; `entropy` holds R per
    /// trajectory when the work order matches the dynamics order.
    pub fn new(
        ensemble: &WorkEnsemble,
        entropy: Option<&[f64]>,
        config: &SystemConfig,
        delta_f: f64,
    ) -> Result<Self> {
        let m = moments(ensemble)?;
        let j = jarzynski(ensemble, config.beta, delta_f);
        let scale = (config.beta * delta_f).exp();
        let ift_mean = entropy.map(|r| {
            MomentAccumulator::from_samples(r.iter().map(|x| (-x).exp())).estimate()
        });
        Ok(FluctuationReport {
            dynamics_order: ensemble.dynamics,
            work_order: ensemble.assignment,
            n_traj: ensemble.len() as u64,
            beta: config.beta,
            delta_f,
            jarzynski_mean: Estimate::new(j.mean_exp, j.sem / scale),
            jarzynski_deviation: Estimate::new(j.deviation, j.sem),
            ift_mean,
            first_moment: Estimate::new(m.mean, m.sem_mean),
            second_moment: Estimate::new(m.second_moment, m.sem_second),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump_engine::JumpEvent;
    use proptest::prelude::*;

    fn ens(samples: Vec<f64>) -> WorkEnsemble {
        WorkEnsemble::new(samples, Order::Superadiabatic, Order::Superadiabatic).unwrap()
    }

    #[test]
    fn delta_histogram() {
        let h = histogram(&ens(vec![0.0; 10]), 0.01).unwrap();
        assert_eq!(h.occupied_bins(), 1);
        assert!((h.density(0) - 100.0).abs() < 1e-12);
        assert!(histogram(&ens(vec![]), 0.01).is_err());
        assert!(histogram(&ens(vec![1.0]), 0.0).is_err());
    }

    #[test]
    fn integer_samples_land_on_centers() {
        let h = histogram(&ens(vec![-1.0, 0.0, 1.0, 2.0, 1.0]), 0.01).unwrap();
        for &bin in h.counts.keys() {
            assert_eq!(bin % 100, 0);
        }
    }

    #[test]
    fn two_point_moments() {
        let m = moments(&ens(vec![1.0, -1.0])).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.second_moment, 1.0);
        assert!(matches!(moments(&ens(vec![1.0])), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn degenerate_jarzynski() {
        let j = jarzynski(&ens(vec![0.0; 5]), 2.0, 0.0);
        assert_eq!(j.mean_exp, 1.0);
        assert_eq!(j.deviation, 0.0);
    }

    #[test]
    fn free_energy_closed_loop_and_quarter_cycle() {
        let c = SystemConfig::default();
        let tc = c.t_drive();
        assert!(free_energy_difference(&c, 0.0, 3.0 * tc).abs() < 1e-12);
        let quarter = free_energy_difference(&c, 0.0, tc / 4.0);
        let b = c.beta;
        let expected = -((b * 2f64.sqrt() / 2.0).cosh() / (b / 2.0).cosh()).ln() / b;
        assert!((quarter - expected).abs() < 1e-12);
    }

    #[test]
    fn free_energy_ground_state_limit() {
        let c = SystemConfig { beta: 1e4, ..SystemConfig::default() };
        let tc = c.t_drive();
        let df = free_energy_difference(&c, 0.0, tc / 4.0);
        let expected = frame1(&c, tc / 4.0).energy_g - frame1(&c, 0.0).energy_g;
        assert!((df - expected).abs() < 1e-6);
    }

    fn record(k: Level, l: Level, events: Vec<JumpEvent>) -> TrajectoryRecord {
        TrajectoryRecord {
            index: 0,
            order: Order::Adiabatic,
            k_init: k,
            l_final: l,
            e_init: if k == Level::Excited { 0.5 } else { -0.5 },
            e_final: if l == Level::Excited { 0.5 } else { -0.5 },
            events,
        }
    }

    #[test]
    fn zero_jump_entropy() {
        let c = SystemConfig::default();
        assert_eq!(entropy_production(&record(Level::Ground, Level::Ground, vec![]), &c), 0.0);
        assert_eq!(entropy_production(&record(Level::Excited, Level::Excited, vec![]), &c), 0.0);
        let dephasing = JumpEvent {
            t_j: 1.0,
            channel: 2,
            omega01_n: 1.0,
            gamma_forward: 0.3,
            gamma_reversed: 0.3,
        };
        assert_eq!(entropy_production(&record(Level::Ground, Level::Ground, vec![dephasing]), &c), 0.0);
    }

    #[test]
    fn vanishing_reversed_rate_is_infinite() {
        let c = SystemConfig::default();
        let e = JumpEvent {
            t_j: 1.0,
            channel: 0,
            omega01_n: 1.0,
            gamma_forward: 0.3,
            gamma_reversed: 0.0,
        };
        assert_eq!(entropy_production(&record(Level::Ground, Level::Ground, vec![e]), &c), f64::INFINITY);
    }

    #[test]
    fn ift_of_reversible_records() {
        let c = SystemConfig::default();
        let recs = vec![record(Level::Ground, Level::Ground, vec![]); 3];
        let est = ift_check(&recs, &c).unwrap();
        assert_eq!(est.value, 1.0);
        assert!(ift_check(&[], &c).is_err());
    }

    proptest! {
        #[test]
        fn histogram_is_normalized(samples in proptest::collection::vec(-5.0f64..5.0, 1..400), w in 1e-3f64..0.5) {
            let h = histogram(&ens(samples), w).unwrap();
            prop_assert!((h.normalization() - 1.0).abs() < 1e-9);
            let dense: f64 = h.dense().iter().map(|(_, d)| d * w).sum();
            prop_assert!((dense - 1.0).abs() < 1e-9);
        }

        #[test]
        fn accumulator_merge_is_associative(samples in proptest::collection::vec(-3.0f64..3.0, 2..200), cut in 0usize..200) {
            let cut = cut.min(samples.len());
            let whole = MomentAccumulator::from_samples(samples.iter().copied());
            let mut left = MomentAccumulator::from_samples(samples[..cut].iter().copied());
            left.merge(&MomentAccumulator::from_samples(samples[cut..].iter().copied()));
            prop_assert_eq!(whole.count, left.count);
            prop_assert!((whole.sum - left.sum).abs() <= 1e-12 * whole.sum_sq.max(1.0));
            prop_assert!((whole.sum_sq - left.sum_sq).abs() <= 1e-12 * whole.sum_sq.max(1.0));
        }
    }
}
