//! Stretching certificates for the logistic map on both sides of mu = 4.

use triopoly::dynamics::logistic_sap_demo;

fn main() {
    for mu in [3.88, 4.0, 4.5] {
        let r = logistic_sap_demo(mu);
        println!("mu = {mu}");
        println!("  f:   {:?}", r.first_iterate);
        println!("  f^2: {:?}", r.second_iterate);
    }
}
