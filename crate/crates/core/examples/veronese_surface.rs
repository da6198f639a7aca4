//! The Veronese surface: isometry, second fundamental form, optimality.

use cgconf::charts::{veronese_map, veronese_radius};
use cgconf::immersion::{dilatation_at, mean_curvature, optimality_coefficient, sff_table, Sphere};
use cgconf::DiffConfig;
use nalgebra::DVector;

fn main() -> cgconf::Result<()> {
    let cfg = DiffConfig::default();
    let phi = veronese_map();
    let sphere = Sphere::new(veronese_radius())?;
    for t in [[0.0, 0.0], [0.5, 0.0], [0.3, -0.6]] {
        let x = DVector::from_row_slice(&t);
        let table = sff_table(&phi, &x, &cfg)?;
        let opt = optimality_coefficient(&phi, &sphere, &x, &cfg)?;
        println!("t = {t:?}");
        println!("  dilatation {}", dilatation_at(&phi, &x, &cfg)?.lambda);
        println!("  |sff(e1,e1)|^2 = {}, |sff(e1,e2)|^2 = {}", table.inner((0, 0), (0, 0)), table.inner((0, 1), (0, 1)));
        println!("  C = {} (residual {:e})", opt.c, opt.residual);
        println!("  |H| = {:e}", mean_curvature(&phi, &sphere, &x, &cfg)?.norm());
    }
    Ok(())
}
