// Hospitalization rates implied by the default age profile of the parental
// health chain, unconditionally and among parents sick last period.
//
// `cargo run --release --example health_rates`

use carelab::dynamic::{
    health_rates, simulate_health_path, write_health_rates, AgeProfile, CarePolicy,
};

pub fn run() -> carelab::Result<()> {
    let profile = AgeProfile::default();
    let chain = profile.build()?;

    let path = simulate_health_path(&chain, CarePolicy::default(), profile.periods, 3)?;
    let show = |v: &[bool]| {
        v.iter()
            .map(|&b| if b { '1' } else { '.' })
            .collect::<String>()
    };
    println!("one parent, sick: {}", show(&path.sick));
    println!("          cared:  {}", show(&path.care));

    let rates = health_rates(&chain, CarePolicy::default(), profile.periods, 20_000, 1)?;
    let mut csv = Vec::new();
    write_health_rates(&rates, &mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}

#[allow(dead_code)]
fn main() -> carelab::Result<()> {
    run()
}
