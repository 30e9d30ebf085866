//! Derives the pinching constant chain and scans the feasibility window.

use curvflow::pinching::{self, EpsilonMode, PinchingConstants};

fn main() -> curvflow::Result<()> {
    for alpha in [0.5, 1.0, 2.0] {
        let k = PinchingConstants::derive(2, alpha, None, None)?;
        let (d1, d2) = pinching::critical_deltas(2, alpha);
        println!(
            "alpha = {alpha}: C = {:.6} ({:?}), eps = {:.6}, delta = {}, sigma_max = {:.6e}, critical deltas {:.6}/{:.6}",
            k.c, k.c_source, k.epsilon, k.delta_l, k.sigma, d1, d2
        );
    }

    println!(
        "\n{:>8} {:>12} {:>12} {:>12}",
        "C", "eps sharp", "eps simple", "sigma_max"
    );
    for c in [0.05, 0.1, 0.15, 0.2, 0.24] {
        let sharp = pinching::epsilon_lower_bound(c, 2, EpsilonMode::Sharp)?;
        let simple = pinching::epsilon_lower_bound(c, 2, EpsilonMode::Simple)?;
        let delta = pinching::pinching_delta(sharp, 2, 1e-3)?.delta;
        let s = pinching::sigma_max(c, sharp, delta, 1.0, 2)?;
        println!("{c:>8.3} {sharp:>12.6} {simple:>12.6} {s:>12.6e}");
    }

    let d3 = pinching::pinching_delta(0.2, 3, 5e-3)?;
    println!(
        "\nn = 3, eps = 0.2: delta = {:.6} (grid {:.6}, refined {:.6})",
        d3.delta, d3.grid_min, d3.refined_min
    );
    Ok(())
}
