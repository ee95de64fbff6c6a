//! Derivatives, the inverse of `L = d/dx - d3/dx3`, shifts and reflections.

use std::f64::consts::TAU;

use chkp_lab::spectral::{apply_l, deriv, invert_l, reflect, spectral_shift, Field2D, Grid2D};

fn main() -> chkp_lab::Result<()> {
    let g = Grid2D::new(64, 32, TAU, TAU)?;
    let u = Field2D::from_fn(g, |x, y| (2.0 * x + y).sin() + 0.5 * (x - 3.0 * y).cos());

    let uxy = deriv(&u, 1, 1)?;
    let exact = Field2D::from_fn(g, |x, y| {
        -2.0 * (2.0 * x + y).sin() + 1.5 * (x - 3.0 * y).cos()
    });
    println!("u_xy error        {:.2e}", uxy.max_abs_diff(&exact));

    let back = apply_l(&invert_l(&u)?)?;
    println!("L L^-1 u - u      {:.2e}", back.max_abs_diff(&u));

    let shifted = spectral_shift(&u, 0.3);
    let exact = Field2D::from_fn(g, |x, y| {
        (2.0 * (x - 0.3) + y).sin() + 0.5 * (x - 0.3 - 3.0 * y).cos()
    });
    println!("shift by 0.3      {:.2e}", shifted.max_abs_diff(&exact));

    let twice = reflect(&reflect(&u, 1.1), 1.1);
    println!("reflect twice     {:.2e}", twice.max_abs_diff(&u));
    Ok(())
}
