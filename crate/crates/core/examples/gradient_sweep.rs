// How the employment response to a parental health shock varies with
// household wealth and the wife's wage. Writes the surface as CSV to stdout.
//
// `cargo run --example gradient_sweep > gradient.csv`

use carelab::model::{gradient_sweep, unit_grid, HouseholdConfig, SweepAxes};

pub fn run() -> carelab::Result<()> {
    let params = HouseholdConfig::default().build()?;
    let grid = unit_grid(11);
    let surface = gradient_sweep(&params, &SweepAxes::default(), &grid, &grid)?;

    let positive = surface
        .cells
        .iter()
        .filter(|c| c.delta_work_prob.is_some_and(|d| d > 0.0))
        .count();
    eprintln!(
        "{positive} of {} cells respond positively (income effect)",
        surface.cells.len()
    );
    eprintln!(
        "poorest household, highest wage: {:+.4}; richest household, lowest wage: {:+.4}",
        surface
            .cell(0, grid.len() - 1)
            .delta_work_prob
            .unwrap_or(f64::NAN),
        surface
            .cell(grid.len() - 1, 0)
            .delta_work_prob
            .unwrap_or(f64::NAN),
    );
    let mut csv = Vec::new();
    surface.write_csv(&mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}

#[allow(dead_code)]
fn main() -> carelab::Result<()> {
    run()
}
