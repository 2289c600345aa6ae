//! Vibron spectra across the linear-to-bent transition, with the closed-form
//! limits for comparison.

use revivals::timescales::timescales_at;
use revivals::vibron::{
    vibron_exact_spectrum, vibron_exact_times, vibron_spectrum, VibronParams, CHI_CRITICAL,
};

fn main() -> revivals::Result<()> {
    let n = 20;
    for chi in [0.0, 0.1, CHI_CRITICAL, 0.5, 1.0] {
        let p = VibronParams::new(n, chi)?;
        let s = vibron_spectrum(&p)?.spectrum;
        let shown: Vec<String> = s
            .levels()
            .iter()
            .take(6)
            .map(|e| format!("{e:.4}"))
            .collect();
        println!("chi = {chi:.2}: {} ...", shown.join(" "));
        if let Some(exact) = vibron_exact_spectrum(&p) {
            let worst = s
                .levels()
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            println!("           closed form agrees to {worst:.1e}");
        }
    }

    let k0 = 3;
    for chi in [0.0, 1.0] {
        let p = VibronParams::new(n, chi)?;
        let numeric = timescales_at(&vibron_spectrum(&p)?.spectrum, k0)?;
        let exact = vibron_exact_times(&p, k0)?;
        println!(
            "chi = {chi}: T_Cl {:.6} (exact {:.6}), T_R {:.6} (exact {:.6})",
            numeric.t_cl, exact.t_cl, numeric.t_r, exact.t_r
        );
    }
    Ok(())
}
