//! Ground-state wave packet in the bent phase: |A(t)| and its revivals.
//!
//! `cargo run --release --example wave_packet_revival [out.csv]`

use std::fs::File;
use std::io::BufWriter;

use revivals::config::RunConfig;
use revivals::dynamics::{
    autocorrelation, detect_revivals, gaussian_packet, TimeGrid, DEFAULT_THRESHOLD,
};
use revivals::output::provenance_line;
use revivals::timescales::timescales_at;

fn main() -> revivals::Result<()> {
    let cfg =
        RunConfig::from_toml_str("model = \"vibron\"\nn = 2000\nchi = 0.5\nk0 = 0\nsigma = 2.0\n")?;
    cfg.validate()?;
    let s = cfg.spectrum()?;
    let t = timescales_at(&s, cfg.k0)?;
    println!(
        "T_Cl = {:.4}  T_R = {:.4}  T_R/2 = {:.4}",
        t.t_cl,
        t.t_r,
        t.t_r / 2.0
    );

    let packet = gaussian_packet(s.len(), cfg.k0, cfg.sigma, cfg.cutoff)?;
    println!("packet populates {} levels", packet.len());
    let grid = TimeGrid::for_timescales(t.t_cl, t.t_r)?;
    let trace = autocorrelation(&s, &packet, &grid)?;
    let lowest = trace.modulus.iter().copied().fold(1.0, f64::min);
    println!("{} samples, min |A| = {lowest:.4}", grid.count);

    for r in detect_revivals(&trace, DEFAULT_THRESHOLD, t.t_cl)? {
        println!("revival at t = {:.2} with |A| = {:.6}", r.time, r.modulus);
    }

    if let Some(path) = std::env::args().nth(1) {
        trace.write_csv(
            BufWriter::new(File::create(&path)?),
            &[provenance_line(&cfg.to_json())],
        )?;
        println!("trace written to {path}");
    }
    Ok(())
}
