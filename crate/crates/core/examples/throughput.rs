//! Measures trajectory-steps per second of the batched jump kernel.

use std::time::Instant;

use adiabatic_qjump::jump_engine::{simulate_batch, EngineContext, StepTable, LANES};
use adiabatic_qjump::{Order, SystemConfig};

fn main() {
    let config = SystemConfig::default();
    let ctx = EngineContext::new(&config);
    for order in Order::ALL {
        let table = StepTable::new(&config, order);
        let batches = 64u64;
        let start = Instant::now();
        let mut jumps = 0;
        for b in 0..batches {
            for r in simulate_batch(&table, &ctx, b * LANES as u64, LANES, None) {
                jumps += r.events.len();
            }
        }
        let secs = start.elapsed().as_secs_f64();
        let steps = (batches * LANES as u64 * config.n_steps) as f64;
        println!(
            "order {order}: {:.2} ns per trajectory-step, {:.2} jumps per trajectory",
            secs / steps * 1e9,
            jumps as f64 / (batches * LANES as u64) as f64
        );
    }
}
