//! Searches for admissible boxes near the example box and at a slow speed.

use triopoly::search::{search_boxes, SearchOptions, SearchSpace, Strategy};
use triopoly::{Cuboid, Params};

fn main() -> triopoly::Result<()> {
    let p = Params::reference();
    let opts = SearchOptions::new(
        Strategy::Refine,
        5_000,
        1,
        SearchSpace::around(&Cuboid::reference(), 0.1),
    );
    let r = search_boxes(&p, &opts)?;
    if let Some(best) = r.found.first() {
        println!(
            "best of {} found: {:?} score {:.3e}",
            r.found.len(),
            best.candidate.cuboid.to_array(),
            best.candidate.score
        );
    }

    let slow = p.with_alpha(10.0)?;
    let r = search_boxes(
        &slow,
        &SearchOptions::new(Strategy::Random, 20_000, 1, SearchSpace::broad()),
    )?;
    println!("alpha = 10: {} boxes found", r.found.len());
    if let Some(m) = r.near_miss {
        println!(
            "near miss binds on {:?} ({}) at {:.3e}",
            m.binding, m.binding_check, m.score
        );
    }
    Ok(())
}
