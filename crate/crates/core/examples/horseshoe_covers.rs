//! Covers of K0 and K1, the midplane check, the two fixed points and
//! stretching along a few random paths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use triopoly::bounds::BoundConfig;
use triopoly::horseshoe::{
    build_k_enclosures, check_path_stretching, locate_fixed_point_in, midplane_image_misses,
    OrientedBox, PathSample, StretchOptions,
};
use triopoly::{Cuboid, Params};

fn main() -> triopoly::Result<()> {
    let p = Params::reference();
    let ob = OrientedBox::new(Cuboid::reference());
    let (k0, k1) = build_k_enclosures(&p, &ob, 32)?;
    println!(
        "K0: {} cells, K1: {} cells, disjoint: {}",
        k0.len(),
        k1.len(),
        !k0.intersects(&k1)
    );

    let mid = midplane_image_misses(&p, &ob, &BoundConfig::default())?;
    println!("F(S) misses R: {}", mid.misses);

    for i in 0..2 {
        let fp = locate_fixed_point_in(&p, &ob, i)?;
        println!(
            "fixed point in R{i}: {:?} (residual {:.1e})",
            fp.state, fp.residual
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..5 {
        let path = PathSample::random_joining(&ob, 3, &mut rng);
        let rep = check_path_stretching(&p, &ob, &path, &StretchOptions::default())?;
        let spans: Vec<(f64, f64)> = rep.crossings.iter().map(|c| (c.t_start, c.t_end)).collect();
        println!("crossings {spans:.6?}, stretches: {}", rep.stretches());
    }
    Ok(())
}
