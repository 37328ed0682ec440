// Implied effect of eldercare on employment as the ratio of two estimates,
// and capping weekly hours at a percentile.
//
// `cargo run --example wald_ratio`

use carelab::estimators::{wald_ratio, winsorize};

pub fn run() -> carelab::Result<()> {
    // (employment effect, se, care effect, se) for unmarried women and men;
    // the samples differ, so the covariance is set to zero
    for (label, rf, rf_se, fs, fs_se) in [
        ("women", -0.0978, 0.0500, 0.1675, 0.0555),
        ("men", 0.0112, 0.0267, 0.2435, 0.0379),
    ] {
        let w = wald_ratio(rf, fs, rf_se * rf_se, fs_se * fs_se, 0.0, 1e-6)?;
        println!("{label}: {rf} / {fs} = {:.3} (se {:.3})", w.ratio, w.se);
    }

    let hours = [
        Some(40.0),
        Some(44.0),
        None,
        Some(48.0),
        Some(112.0),
        Some(50.0),
    ];
    let capped = winsorize(&hours, 80.0)?;
    println!("hours {hours:?}\n  at the 80th percentile -> {capped:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> carelab::Result<()> {
    run()
}
