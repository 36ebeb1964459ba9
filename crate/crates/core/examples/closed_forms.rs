//! Distances, Busemann functions and visual metrics in the flat disk.

use moebius_rigidity::hyperbolic::{
    h_busemann, h_distance, h_gromov, h_involution, h_visual, DiskPoint, IdealPoint,
};

fn main() -> moebius_rigidity::error::Result<()> {
    let x = DiskPoint::new(0.0, 0.0)?;
    let y = DiskPoint::new(0.5, 0.1)?;
    let xi = IdealPoint::new(0.0);
    let eta = IdealPoint::new(2.0);

    println!("d(x, y)          = {:.12}", h_distance(&x, &y));
    println!("B(x, y, xi)      = {:.12}", h_busemann(&x, &y, &xi));
    println!("(xi|eta)_x       = {:.12}", h_gromov(&x, &xi, &eta)?);
    println!("rho_x(xi, eta)   = {:.12}", h_visual(&x, &xi, &eta));
    println!("rho_y(xi, eta)   = {:.12}", h_visual(&y, &xi, &eta));
    println!("i_y(xi)          = {:.12}", h_involution(&y, &xi).angle());
    Ok(())
}
