//! Equilibrium stability and Lyapunov spectra across adjustment speeds.

use triopoly::dynamics::{
    classify_equilibrium, lyapunov_spectrum, stability_boundary, SafetyBox, DEFAULT_STABILITY_TOL,
};
use triopoly::{Params, State};

fn main() -> triopoly::Result<()> {
    let base = Params::reference();
    if let Some(a) = stability_boundary(&base, 0.1, 17.0, 1e-10)? {
        println!("equilibrium loses stability at alpha = {a:.8}");
    }
    for alpha in [4.0, 8.0, 9.0, 17.0] {
        let p = base.with_alpha(alpha)?;
        let st = classify_equilibrium(&p, DEFAULT_STABILITY_TOL)?;
        let n = p.nash();
        let rep = lyapunov_spectrum(
            &p,
            State::new(n.x + 1e-3, n.y, n.z),
            20_000,
            1_000,
            &SafetyBox::default(),
        )?;
        println!(
            "alpha {alpha:>4}: {:?}, exponents {:.4?}{}",
            st.classification,
            rep.exponents,
            if rep.partial() { " (escaped)" } else { "" }
        );
    }
    Ok(())
}
