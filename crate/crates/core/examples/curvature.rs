//! Metric, Christoffel symbols and sectional curvature on built-in charts.

use cgconf::charts::{stereo_chart, veronese_target};
use cgconf::manifold::{christoffel_at, christoffel_finite_difference, metric_at, sectional_curvature};
use cgconf::DiffConfig;
use nalgebra::DVector;

fn main() -> cgconf::Result<()> {
    let cfg = DiffConfig::default();
    let s2 = stereo_chart(2, 1.0);
    let x = DVector::from_vec(vec![0.3, -0.4]);
    println!("metric of S^2 at {:?}:\n{}", x.as_slice(), metric_at(&s2, &x)?);

    let oracle = christoffel_at(&s2, &x, &cfg)?;
    let fd = christoffel_finite_difference(&s2, &x, &cfg)?;
    println!("Christoffel oracle vs finite differences: {:.2e}", oracle.max_abs_diff(&fd));

    let target = veronese_target();
    let y = DVector::from_vec(vec![0.2, 0.1, -0.3, 0.5]);
    let (u, v) = (DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]), DVector::from_vec(vec![0.0, 1.0, 1.0, 0.0]));
    let bare = target.without_christoffel_oracle();
    println!("curvature of S^4(1/sqrt 3): oracle {}, finite differences {}",
        sectional_curvature(&target, &y, &u, &v, &cfg)?,
        sectional_curvature(&bare, &y, &u, &v, &cfg)?);
    Ok(())
}
