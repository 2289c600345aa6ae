//! System-size scaling at the vibron critical point and the semiclassical
//! level law `E_k/N − χ_c ∝ k^p`.

use revivals::criticality::{scaling_with_n, semiclassical_check, Column, K0Rule};
use revivals::timescales::timescales_at;
use revivals::vibron::{vibron_spectrum, VibronParams, CHI_CRITICAL};

fn main() -> revivals::Result<()> {
    let sizes = [250, 500, 1000, 2000, 4000];
    let family = |n| Ok(vibron_spectrum(&VibronParams::new(n, CHI_CRITICAL)?)?.spectrum);
    for &n in &sizes {
        let t = timescales_at(&family(n)?, 0)?;
        println!("N = {n:5}: T_Cl = {:.4}", t.t_cl);
    }
    let fit = scaling_with_n(family, K0Rule::Fixed(0), &sizes, Column::TCl)?;
    println!("T_Cl ~ N^{:.4} (r2 {:.6})", fit.exponent, fit.r2);

    for window in [(100, 400), (400, 1000), (1000, 1800)] {
        let s = semiclassical_check(4000, window)?;
        println!("k in {window:?}: slope {:.4}", s.exponent);
    }
    match semiclassical_check(4000, (2, 10)) {
        Ok(s) => println!("k in (2, 10): slope {:.4}", s.exponent),
        Err(e) => println!("k in (2, 10): {e}"),
    }
    Ok(())
}
