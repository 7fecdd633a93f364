//! Writes a bifurcation table over alpha in [6, 10] to standard output.

use triopoly::dynamics::{bifurcation_scan, ScanOptions, StartPolicy};
use triopoly::Params;

fn main() -> triopoly::Result<()> {
    let opts = ScanOptions {
        record: 50,
        ..ScanOptions::default()
    };
    let table = bifurcation_scan(
        &Params::reference(),
        6.0,
        10.0,
        81,
        &StartPolicy::NashOffset(1e-3),
        &opts,
    )?;
    table.write_csv(&mut std::io::stdout().lock())
}
