//! Periodic points for every symbol word up to length 3, with the shift
//! check, and the entropy bound.

use triopoly::horseshoe::OrientedBox;
use triopoly::symbolic::{
    count_periodic_words, entropy_lower_bound, shift_commutes, PeriodicOptions,
};
use triopoly::{certify_box, CertifyOptions, Cuboid, Params};

fn main() -> triopoly::Result<()> {
    let p = Params::reference();
    let b = Cuboid::reference();
    let ob = OrientedBox::new(b);
    for k in 1..=3 {
        let table = count_periodic_words(&p, &ob, k, &PeriodicOptions::default(), false)?;
        for r in &table.results {
            let shift = shift_commutes(&p, &ob, r.point, 2 * k)?;
            println!(
                "{}: {:?} residual {:.1e} shift ok {shift}",
                r.word, r.point, r.residual
            );
        }
        println!(
            "k = {k}: {}/{} realized",
            table.realized(),
            table.results.len()
        );
    }
    let certified = certify_box(&p, &b, &CertifyOptions::default()).is_certified();
    println!("entropy lower bound: {}", entropy_lower_bound(certified));
    Ok(())
}
