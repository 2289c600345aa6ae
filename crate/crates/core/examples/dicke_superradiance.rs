//! Dicke model at j = 10: truncation convergence, the gap closing towards
//! λ_c and the `T_R` divergence in the even sector.

use revivals::criticality::{
    fit_powerlaw, locate_divergence, log_offset_grid, scan, Column, DerivativeOrder, FitWindow,
    ModelSpec, Side,
};
use revivals::dicke::{
    converge_truncation, dicke_excitation_gap, dicke_lambda_c, dicke_spectrum, DickeParams, Parity,
};

fn main() -> revivals::Result<()> {
    let lambda_c = dicke_lambda_c(1.0, 1.0)?;
    println!("lambda_c = {lambda_c}");
    let base = DickeParams::new(10.0, 1.0, 1.0, lambda_c, 1, Parity::Even)?;
    let n_max = converge_truncation(&base, 27, 1e-8)?;
    println!("lowest 27 even levels converged at n_max = {n_max}");
    let params = base.with_n_max(n_max);

    for lambda in [0.1, 0.3, 0.45, 0.5, 0.6] {
        let even = dicke_spectrum(&params.with_lambda(lambda))?.spectrum;
        let gap = dicke_excitation_gap(&params.with_lambda(lambda))?;
        println!(
            "lambda = {lambda:.2}: E0 = {:.6}, E1 - E0 (even) = {:.6}, excitation gap = {gap:.6}",
            even.ground(),
            even.gap().unwrap()
        );
    }

    let model = ModelSpec::dicke(&params);
    let xc = locate_divergence(&model, 0, (0.3, 0.5), DerivativeOrder::Second)?;
    println!("T_R diverges at lambda = {xc:.9}");
    let near = scan(&model, 0, &log_offset_grid(xc, 1e-6, 1e-3, 12)?, 1)?;
    for fit in fit_powerlaw(&near, Column::TR, xc, Side::Both, &FitWindow::default())? {
        println!(
            "{:?} side: exponent {:.4}, r2 {:.6}",
            fit.side, fit.exponent, fit.r2
        );
    }
    Ok(())
}
