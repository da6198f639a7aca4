//! Measured dilatation of the Veronese bundle differential for a metric pair.

use cgconf::charts::{lower_hemisphere, veronese_map};
use cgconf::immersion::{bundle_conformality, BundleSampling};
use cgconf::sampling::sample_bundle_points;
use cgconf::{CGParams, DiffConfig};

fn main() -> cgconf::Result<()> {
    let phi = veronese_map();
    let points = sample_bundle_points(&lower_hemisphere(), 3, 8, 0.9, 2.0)?;
    let source = CGParams::constant(1.0, 1.0, 1.0);
    let target = CGParams::constant(0.0, 1.0, 1.0);
    let report = bundle_conformality(&phi, &source, &target, &points, &BundleSampling::default(), &DiffConfig::default())?;
    println!("{:>10} {:>20} {:>20}", "|Z|^2", "measured", "1 + |Z|^2");
    for s in &report.samples {
        println!("{:>10.4} {:>20.15} {:>20.15}", s.z_norm2, s.measured_ratio, 1.0 + s.z_norm2);
    }
    println!("constant in (A, B): {}", report.lambda_is_constant_in_a);
    Ok(())
}
