//! Evolves a graph patch over a shrinking sphere cap and reports convergence
//! against the exact cap.

use curvflow::graphflow;
use curvflow::oracle::{self, McfSphere};
use curvflow::SpeedParams;

fn main() -> curvflow::Result<()> {
    let cases: [(f64, f64); 2] = [(0.0, 0.1), (1.0, 0.05)];
    for (alpha, t_end) in cases {
        let (sp, sol_box): (SpeedParams, Box<dyn oracle::RadiusHistory>) = if alpha == 0.0 {
            let sp = SpeedParams::mean_curvature_reference(std::f64::consts::E)?;
            (sp, Box::new(McfSphere { r0: 1.0, dim_n: 2 }))
        } else {
            let sp = SpeedParams::with_alpha(alpha)?;
            (sp, Box::new(oracle::solve_sphere(1.0, 2, sp, 1e-11)?))
        };
        println!("alpha = {alpha}, t_end = {t_end}");
        let mut prev: Option<f64> = None;
        for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
            let run = graphflow::run_graph(h, &sp, sol_box.as_ref(), t_end, 0.2)?;
            let order = prev.map(|e| (e / run.max_error).log2());
            println!(
                "  h = {h:.5}  steps = {:5}  max error = {:.4e}  order = {}  max principle {}",
                run.steps,
                run.max_error,
                order.map_or("-".into(), |o| format!("{o:.3}")),
                run.max_principle_ok
            );
            prev = Some(run.max_error);
        }
    }
    Ok(())
}
