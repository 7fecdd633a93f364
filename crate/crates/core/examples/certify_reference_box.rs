//! Certifies the example box with both engines and prints each record.

use triopoly::{certify_box, CertifyOptions, Cuboid, EngineChoice, Params};

fn main() -> triopoly::Result<()> {
    let p = Params::reference();
    let b = Cuboid::reference();
    let cert = certify_box(&p, &b, &CertifyOptions::with_engine(EngineChoice::Both));
    for r in &cert.records {
        println!("{:?}: {:?} (margin {:.3e})", r.id, r.status, r.margin);
    }
    println!("verdict: {:?}", cert.verdict);

    let thin = b.with_z_r(0.38)?;
    let cert = certify_box(
        &p,
        &thin,
        &CertifyOptions::with_engine(EngineChoice::Analytic),
    );
    println!("z_r = 0.38: {:?}", cert.verdict);
    Ok(())
}
