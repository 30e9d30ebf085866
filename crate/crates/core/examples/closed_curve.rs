//! Moves a planar ellipse by the log-modified curvature speed.

use curvflow::curve::ClosedCurve;
use curvflow::SpeedParams;

fn main() -> curvflow::Result<()> {
    let sp = SpeedParams::with_alpha(1.0)?;
    let mut c = ClosedCurve::ellipse(1.0, 0.6, 200)?;
    let mut t = 0.0;
    for _ in 0..6 {
        let (k, _, _) = c.curvature()?;
        let (kmin, kmax) = k
            .iter()
            .fold((f64::INFINITY, 0f64), |(a, b), &x| (a.min(x), b.max(x)));
        println!(
            "t = {t:.3}  mean radius = {:.6}  kappa in [{kmin:.4}, {kmax:.4}]",
            c.mean_radius()
        );
        t += 0.03;
        c = c.run_to(&sp, t, 0.2)?;
    }
    Ok(())
}
