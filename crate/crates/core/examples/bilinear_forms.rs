//! Symmetric bilinear forms with <B(X,Z), B(Y,Z)> = C <X,Y> <Z,Z>.

use cgconf::bilinear::{
    classify_dim2_form, complex_mult_form, dim_ge3_certificate, e1_residual, search_dim3_counterexample, Branch,
    SymBilinearForm,
};
use nalgebra::DVector;

fn main() -> cgconf::Result<()> {
    let b = complex_mult_form(2.0, 0.7, Branch::Conjugate, -1.0)?;
    println!("complex form residual at C = 2: {:e}", e1_residual(&b, 2.0));
    println!("classified: {:?}", classify_dim2_form(&b, 1e-9)?);

    let scalar = SymBilinearForm::from_fn(2, 1, |i, j| DVector::from_element(1, if i == j { 1.0 } else { 0.0 }));
    println!("<X,Y> form: {:?}", classify_dim2_form(&scalar, 1e-9)?);

    let lifted = b.zero_extend(3, 2);
    println!("dimension 3 certificate: {:?}", dim_ge3_certificate(&lifted, 1e-9)?);
    let search = search_dim3_counterexample(64, 1.0, 5);
    println!("best residual over {} restarts: {}", search.restarts, search.best_residual);
    Ok(())
}
