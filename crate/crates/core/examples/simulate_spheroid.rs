//! Runs a prolate spheroid to near its singular time and prints the trace.

use curvflow::flow::{self, FlowConfig};
use curvflow::pinching::PinchingConstants;
use curvflow::{AxiSurface, SpeedParams};

fn main() {
    let segments = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(128);
    let sp = SpeedParams::with_alpha(1.0).expect("speed");
    let consts = PinchingConstants::derive(2, 1.0, None, None).expect("constants");
    let initial = AxiSurface::spheroid(1.0, 1.1, segments).expect("surface");

    let mut cfg = FlowConfig::new(sp, 1000.0);
    cfg.sigma = consts.sigma;
    cfg.snapshot_h_factor = 1.25;

    match flow::run(&initial, &cfg) {
        Ok(out) => {
            let rows = out.trace.rows();
            let stride = (rows.len() / 12).max(1);
            println!(
                "{:>14} {:>12} {:>12} {:>10} {:>12}",
                "t", "H_min", "H_max", "gamma_min", "gsigma_max"
            );
            for r in rows.iter().step_by(stride).chain(rows.last()) {
                println!(
                    "{:>14.9} {:>12.4} {:>12.4} {:>10.6} {:>12.4e}",
                    r.t, r.h_min, r.h_max, r.gamma_min, r.gsigma_max
                );
            }
            println!(
                "{:?} after {} steps, {} snapshots, h_min never dropped: {}",
                out.termination,
                out.steps,
                out.snapshots.len(),
                out.trace.h_min_drop() == 0.0
            );
        }
        Err(f) => eprintln!("run failed: {f}"),
    }
}
