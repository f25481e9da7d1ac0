use adiabatic_qjump::ensemble::{run_ensemble, EnsembleOptions};
use adiabatic_qjump::stats::{histogram, jarzynski, moments};
use adiabatic_qjump::{Order, SystemConfig};

fn config() -> SystemConfig {
    SystemConfig {
        n_steps: 20_000,
        ..SystemConfig::default()
    }
}

#[test]
fn entropy_production_equals_dissipated_work_per_trajectory() {
    let c = config();
    for order in Order::ALL {
        let r = run_ensemble(&c, order, 2000, &EnsembleOptions::default()).unwrap();
        for s in &r.summaries {
            let expected = c.beta * (s.work[order.index()] - r.delta_f);
            assert!((s.entropy - expected).abs() < 1e-12, "{order} #{}", s.index);
        }
    }
}

#[test]
fn higher_order_heat_assignments_agree_closely() {
    let c = config();
    let r = run_ensemble(&c, Order::Superadiabatic, 4000, &EnsembleOptions::default()).unwrap();
    let m1 = moments(&r.work(Order::Adiabatic, r.len()).unwrap()).unwrap();
    let m2 = moments(&r.work(Order::Superadiabatic, r.len()).unwrap()).unwrap();
    assert!(((m1.mean - m2.mean) / m2.mean).abs() < 0.01);
    assert!(((m1.second_moment - m2.second_moment) / m2.second_moment).abs() < 0.01);
}

#[test]
fn work_is_positive_on_average_for_a_closed_cycle() {
    let c = config();
    for order in Order::ALL {
        let r = run_ensemble(&c, order, 4000, &EnsembleOptions::default()).unwrap();
        assert_eq!(r.delta_f, 0.0);
        let w = r.work(order, r.len()).unwrap();
        let m = moments(&w).unwrap();
        assert!(m.mean > 3.0 * m.sem_mean, "{order}: {} ± {}", m.mean, m.sem_mean);
        // Jensen: ⟨e^{−βW}⟩ ≥ e^{−β⟨W⟩}.
        let j = jarzynski(&w, c.beta, r.delta_f);
        assert!(j.mean_exp >= (-c.beta * m.mean).exp());
        let h = histogram(&w, 0.01).unwrap();
        assert!((h.normalization() - 1.0).abs() < 1e-12);
    }
}
