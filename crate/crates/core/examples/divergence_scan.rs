//! Timescales across the vibron transition at N = 1000: where `T_R` and
//! `T_SR` diverge, where `T_Cl` peaks, and how `T_R` blows up.

use revivals::criticality::{
    fit_powerlaw, locate_classical_peak, locate_divergence, log_offset_grid, scan, scan_with,
    sign_change_brackets, Column, DerivativeOrder, FitWindow, ModelSpec, Side,
};
use revivals::timescales::SlopeRule;

fn main() -> revivals::Result<()> {
    let model = ModelSpec::Vibron { n: 1000 };
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let overview = scan(&model, 0, &grid, 4)?;
    println!("{:>6} {:>12} {:>14} {:>14}", "chi", "T_Cl", "T_R", "T_SR");
    for row in overview.rows.iter().step_by(20) {
        println!(
            "{:6.3} {:12.4} {:14.4} {:14.4}",
            row.control, row.times.t_cl, row.times.t_r, row.times.t_sr
        );
    }

    let b2 = sign_change_brackets(&overview, DerivativeOrder::Second);
    let b3 = sign_change_brackets(&overview, DerivativeOrder::Third);
    println!("E'' changes sign in {b2:?}");
    println!("E''' changes sign in {b3:?}");
    let nearest = |b: &[(f64, f64)]| {
        *b.iter()
            .filter(|(lo, _)| *lo > 0.0)
            .min_by(|x, y| (x.0 - 0.2).abs().total_cmp(&(y.0 - 0.2).abs()))
            .unwrap()
    };
    let e2 = locate_divergence(&model, 0, nearest(&b2), DerivativeOrder::Second)?;
    let e3 = locate_divergence(&model, 0, nearest(&b3), DerivativeOrder::Third)?;
    println!("T_R diverges at chi = {e2:.10}");
    println!("T_SR diverges at chi = {e3:.10}");

    let fine: Vec<f64> = (0..=150).map(|i| 0.15 + 0.001 * i as f64).collect();
    let mid = scan_with(&model, 0, &fine, 4, SlopeRule::ParabolaMidpoint)?;
    let top = (0..fine.len())
        .max_by(|&a, &b| mid.rows[a].times.t_cl.total_cmp(&mid.rows[b].times.t_cl))
        .unwrap();
    let peak = locate_classical_peak(
        &model,
        0,
        (fine[top - 1], fine[top + 1]),
        SlopeRule::ParabolaMidpoint,
    )?;
    println!("T_Cl peaks at chi = {peak:.7}");

    let near = scan(&model, 0, &log_offset_grid(e2, 1e-7, 1e-3, 16)?, 4)?;
    for fit in fit_powerlaw(&near, Column::TR, e2, Side::Both, &FitWindow::default())? {
        println!("{}", fit.to_record());
    }
    Ok(())
}
