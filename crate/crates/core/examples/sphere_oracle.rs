//! Integrates the shrinking-sphere ODE and compares it with the closed form
//! in the reference mode.

use curvflow::oracle::{self, McfSphere, RadiusHistory};
use curvflow::SpeedParams;

fn main() -> curvflow::Result<()> {
    let mcf = McfSphere { r0: 1.0, dim_n: 2 };
    let sp0 = SpeedParams::mean_curvature_reference(std::f64::consts::E)?;
    let num = oracle::solve_sphere(1.0, 2, sp0, 1e-11)?;
    println!(
        "reference: T = {:.12} (closed form {:.12})",
        num.t_blowup,
        mcf.blowup_time()
    );
    for t in [0.05, 0.1, 0.2, 0.24] {
        println!(
            "  r({t}) = {:.12}  exact {:.12}",
            num.radius(t)?,
            mcf.radius(t)?
        );
    }

    for alpha in [0.5, 1.0, 2.0] {
        let sp = SpeedParams::with_alpha(alpha)?;
        let a = oracle::solve_sphere(1.0, 2, sp, 1e-10)?;
        let b = oracle::solve_sphere(1.0, 2, sp, 1e-11)?;
        println!(
            "alpha = {alpha}: T = {:.12}, |T(tol) - T(tol/10)| = {:.2e}, {} dense nodes",
            b.t_blowup,
            (a.t_blowup - b.t_blowup).abs(),
            b.t.len()
        );
    }
    Ok(())
}
