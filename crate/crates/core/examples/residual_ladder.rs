//! Measures how fast the discrete evolution equations converge on a spheroid.

use curvflow::identities::{self, Equation, LadderConfig};
use curvflow::{AxiSurface, SpeedParams};

fn main() -> curvflow::Result<()> {
    let sp = SpeedParams::with_alpha(1.0)?;
    let cfg = LadderConfig::default();
    let surface = |n: usize| AxiSurface::spheroid(1.0, 1.1, n);

    let alg = identities::algebraic_checks(&surface(128)?, &sp, cfg.sigma)?;
    println!("algebraic recombination max defect: {:.3e}", alg.max());

    for eq in Equation::ALL {
        let r = identities::residual_ladder(eq, surface, &sp, &cfg)?;
        println!("{eq:?}:");
        for l in &r.space_levels {
            println!(
                "  N = {:4}  ds = {:.4e}  residual = {:.4e}",
                l.segments, l.ds, l.value
            );
        }
        println!(
            "  space order {:.3} (exact {}), time order {:.3} (exact {})",
            r.order_ds.order, r.order_ds.exact, r.order_dt.order, r.order_dt.exact
        );
    }
    Ok(())
}
