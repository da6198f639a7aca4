//! Which pairs of bundle metrics admit a conformal bundle differential.

use cgconf::immersion::{classify_case, closed_form_dilatation};
use cgconf::LocalParams;

fn main() {
    let l = |p, q, alpha| LocalParams { p, q, alpha };
    let pairs = [
        ("Sasaki / Sasaki", l(0.0, 0.0, 1.0), l(0.0, 0.0, 1.0)),
        ("CG / CG", l(1.0, 1.0, 1.0), l(1.0, 1.0, 1.0)),
        ("p=1, alpha=2 / p=1, alpha=1", l(1.0, 1.0, 2.0), l(1.0, 1.0, 1.0)),
        ("p=1 / p=0", l(1.0, 1.0, 1.0), l(0.0, 1.0, 1.0)),
        ("CG / Sasaki", l(1.0, 1.0, 1.0), l(0.0, 0.0, 1.0)),
        ("p=2 / p=1", l(2.0, 1.0, 1.0), l(1.0, 1.0, 1.0)),
    ];
    for (name, src, tgt) in pairs {
        let tag = classify_case(&src, &tgt, 1.0);
        println!("{name:<30} {tag:?}  Lambda(|Z|^2 = 1) = {}", closed_form_dilatation(&src, &tgt, 1.0, 1.0));
    }
}
