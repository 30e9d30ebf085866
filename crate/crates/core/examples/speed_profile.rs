//! Tabulates the speed function and its derivatives over several decades of H.

use curvflow::SpeedParams;

fn main() -> curvflow::Result<()> {
    let alpha: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(1.0), |a| a.parse())
        .expect("alpha");
    let sp = SpeedParams::with_alpha(alpha)?;
    println!("alpha = {}, H0 = {:.6}", sp.alpha(), sp.h0());
    println!(
        "{:>12} {:>14} {:>14} {:>14} {:>12}",
        "H", "f", "f'", "f''", "H f''/f'"
    );
    for e in -2..=6 {
        let h = 10f64.powi(e);
        let v = sp.values(h);
        println!(
            "{:>12.3e} {:>14.6e} {:>14.6e} {:>14.6e} {:>12.6}",
            h,
            v.f,
            v.fp,
            v.fpp,
            sp.h_fpp_over_fp(h)?
        );
    }
    Ok(())
}
