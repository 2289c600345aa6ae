//! Dense and tridiagonal symmetric eigensolvers on small matrices.

use revivals::spectral::{eig_sym_dense, eig_sym_tridiagonal, SymDense, SymTridiagonal};

fn main() -> revivals::Result<()> {
    // 1D lattice Laplacian: eigenvalues 2 − 2cos(kπ/(n+1)).
    let n = 8;
    let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])?;
    let tri = eig_sym_tridiagonal(&t, true)?;
    println!(
        "tridiagonal path, residual bound {:.2e}",
        tri.residual_bound
    );
    for (k, e) in tri.values.iter().enumerate() {
        let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
        println!("  E{k} = {e:.15}  exact {exact:.15}");
    }

    let dense = SymDense::from_rows(&[
        vec![4.0, 1.0, -2.0, 2.0],
        vec![1.0, 2.0, 0.0, 1.0],
        vec![-2.0, 0.0, 3.0, -2.0],
        vec![2.0, 1.0, -2.0, -1.0],
    ])?;
    let sys = eig_sym_dense(&dense, true)?;
    println!("dense path: {:?}", sys.values);
    println!(
        "trace {} vs sum of eigenvalues {}",
        dense.trace(),
        sys.values.iter().sum::<f64>()
    );

    let lopsided = SymDense::new(2, vec![1.0, 2.0, 2.5, 1.0]);
    println!("asymmetric input rejected: {}", lopsided.unwrap_err());
    Ok(())
}
