//! Encloses extrema of the map's components over the example box by
//! branch and bound.

use triopoly::bounds::{bound_extremum, BoundConfig, Component, Extremum};
use triopoly::{Cuboid, Params};

fn main() -> triopoly::Result<()> {
    let p = Params::reference();
    let r = Cuboid::reference().to_interval_box();
    let cfg = BoundConfig {
        tol: 1e-10,
        ..BoundConfig::default()
    };
    for (c, which) in [
        (Component::F1, Extremum::Max),
        (Component::F1, Extremum::Min),
        (Component::F2, Extremum::Max),
        (Component::F2, Extremum::Min),
    ] {
        let rep = bound_extremum(&p, &r, "R", c, which, &cfg)?;
        println!(
            "{c:?} {which:?}: [{:.12}, {:.12}] after {} subdivisions",
            rep.enclosure.lo, rep.enclosure.hi, rep.subdivisions
        );
    }
    Ok(())
}
