//! The (p,q,alpha) family of tangent-bundle metrics on the round sphere.

use cgconf::bundle::{cg_metric_eval, cg_metric_matrix, horizontal_lift, vertical_lift};
use cgconf::charts::stereo_chart;
use cgconf::{BundlePoint, CGParams, DiffConfig};
use nalgebra::DVector;

fn main() -> cgconf::Result<()> {
    let cfg = DiffConfig::default();
    let m = stereo_chart(2, 1.0);
    let at = BundlePoint::new(DVector::from_vec(vec![0.2, 0.5]), DVector::from_vec(vec![0.7, -0.3]));
    let h = horizontal_lift(&m, &at, &DVector::from_vec(vec![1.0, 0.0]), &cfg)?;
    let v = vertical_lift(&at, &DVector::from_vec(vec![0.0, 1.0]));
    let zv = vertical_lift(&at, &at.z);

    for (name, params) in [
        ("Sasaki", CGParams::sasaki()),
        ("Cheeger-Gromoll", CGParams::cheeger_gromoll()),
        ("p=2, q=0.5, alpha=3", CGParams::constant(2.0, 0.5, 3.0)),
    ] {
        println!("{name}");
        println!("  h(H, V) = {:e}", cg_metric_eval(&m, &params, &h, &v, &cfg)?);
        println!("  h(Z^v, Z^v) = {}", cg_metric_eval(&m, &params, &zv, &zv, &cfg)?);
        println!("  framed matrix:\n{}", cg_metric_matrix(&m, &params, &at)?);
    }
    println!("|Z|^2 = {}", m.inner(&at.x, &at.z, &at.z)?);
    Ok(())
}
