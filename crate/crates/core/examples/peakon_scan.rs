//! Locate the peakon zero set over an amplitude/speed grid and fit `c(a)`.

use chkp_lab::weakform::{peakon_scan, ScanConfig};

fn main() -> chkp_lab::Result<()> {
    let cfg = ScanConfig {
        theta: 0.0,
        kappa: 0.0,
        a_grid: vec![0.5, 1.0, 1.5, 2.0],
        c_grid: (0..=25).map(|i| 0.1 * i as f64).collect(),
        basis: None,
        quad: None,
    };
    let z = peakon_scan(&cfg)?;
    for p in &z.refined {
        println!("a {:.2}  c {:.10}", p.a, p.c);
    }
    if let Some(f) = z.fit {
        println!("c = {:.8} a + {:.2e}", f.slope, f.intercept);
    }
    Ok(())
}
