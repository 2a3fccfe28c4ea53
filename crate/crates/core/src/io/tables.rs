//! CSV layouts of every experiment, shared by the CLI and the test suites.

use crate::dynamics::Trajectory;
use crate::ensemble::{expected_class_probabilities, OutcomeClass, OutcomeStats};
use crate::experiments::chsh::ChshValue;
use crate::experiments::malus::MalusRow;
use crate::experiments::tau::TauEstimate;
use crate::io::csv::{Cell, CsvTable};
use crate::io::svg::{Plot, Series};

/// Columns `t, x1, x2, q`; time in units of `tau_r` unless `seconds`.
pub fn collapse_table(traj: &Trajectory, tau_r: f64, seconds: bool) -> CsvTable {
    let mut t = CsvTable::new(["t", "x1", "x2", "q"]);
    let scale = if seconds { 1.0 } else { 1.0 / tau_r };
    for s in &traj.samples {
        t.push(vec![(s.t * scale).into(), s.x[0].into(), s.x[1].into(), s.q().into()]);
    }
    t
}

fn z_cell(freq: f64, expected: f64, se: f64) -> Cell {
    if se > 0.0 { Cell::Float((freq - expected) / se) } else { Cell::Empty }
}

/// One row per outcome class, then the marginal events `grow_1`, `grow_2`.
pub fn ensemble_table(stats: &OutcomeStats, x0: [f64; 2]) -> CsvTable {
    let mut t = CsvTable::new(["event", "count", "frequency", "std_error", "expected", "z"]);
    let expected = expected_class_probabilities(x0, stats.mode);
    for class in OutcomeClass::ALL {
        let (f, se, e) = (stats.frequency(class), stats.std_error(class), expected[class.index()]);
        t.push(vec![
            class.as_str().into(),
            stats.count(class).into(),
            f.into(),
            se.into(),
            e.into(),
            z_cell(f, e, se),
        ]);
    }
    for n in 0..2 {
        let (f, se) = (stats.grow_frequency(n), stats.grow_std_error(n));
        t.push(vec![
            format!("grow_{}", n + 1).into(),
            stats.grow_count(n).into(),
            f.into(),
            se.into(),
            x0[n].into(),
            z_cell(f, x0[n], se),
        ]);
    }
    t
}

/// Degrees are rounded to 1e-9 so that 30 deg prints as `30`.
pub fn malus_table(rows: &[MalusRow], tau_r: f64) -> CsvTable {
    let mut t = CsvTable::new(["eps_deg", "t_over_tau", "expectation", "ratio_to_malus"]);
    for r in rows {
        t.push(vec![
            ((r.eps.to_degrees() * 1e9).round() / 1e9).into(),
            (r.t / tau_r).into(),
            r.expectation.into(),
            r.ratio_to_malus.into(),
        ]);
    }
    t
}

pub fn chsh_table(label: &str, v: &ChshValue) -> CsvTable {
    let mut t = CsvTable::new(["setting", "c_ab", "c_ab_prime", "c_a_prime_b", "c_a_prime_b_prime", "F"]);
    let [a, b, c, d] = v.correlations;
    t.push(vec![label.into(), a.into(), b.into(), c.into(), d.into(), v.f.into()]);
    t
}

pub fn interference_table(screen: &[f64], far_field: &[f64], exact: &[f64]) -> CsvTable {
    let mut t = CsvTable::new(["y", "intensity", "intensity_exact"]);
    for ((y, i), e) in screen.iter().zip(far_field).zip(exact) {
        t.push(vec![(*y).into(), (*i).into(), (*e).into()]);
    }
    t
}

pub fn tau_table(e: &TauEstimate) -> CsvTable {
    let mut t = CsvTable::new(["wavelength", "photon_energy", "hbar_over_e", "quoted_order", "upper_bound"]);
    t.push(vec![
        e.wavelength.into(),
        e.photon_energy.into(),
        e.hbar_over_e.into(),
        e.quoted_order.into(),
        e.upper_bound.into(),
    ]);
    t
}

/// Line plot of `y_columns` against `x_column`, one series per column.
pub fn plot_columns(table: &CsvTable, title: &str, x_column: &str, y_columns: &[&str]) -> Plot {
    let xs = table.float_column(x_column);
    Plot {
        title: title.into(),
        x_label: x_column.into(),
        y_label: y_columns.join(", "),
        series: y_columns
            .iter()
            .map(|c| Series::new(*c, xs.iter().copied().zip(table.float_column(c)).collect()))
            .collect(),
    }
}

/// Splits rows by the value of `group_column`, one series per distinct value.
pub fn plot_grouped(table: &CsvTable, title: &str, group_column: &str, x_column: &str, y_column: &str) -> Plot {
    let (Some(g), Some(x), Some(y)) =
        (table.column_index(group_column), table.column_index(x_column), table.column_index(y_column))
    else {
        return Plot { title: title.into(), ..Plot::default() };
    };
    let mut series: Vec<Series> = Vec::new();
    for row in &table.rows {
        let (Cell::Float(gv), Cell::Float(xv), Cell::Float(yv)) = (&row[g], &row[x], &row[y]) else { continue };
        let name = format!("{group_column} = {gv}");
        match series.iter_mut().find(|s| s.name == name) {
            Some(s) => s.points.push((*xv, *yv)),
            None => series.push(Series::new(name, vec![(*xv, *yv)])),
        }
    }
    Plot { title: title.into(), x_label: x_column.into(), y_label: y_column.into(), series }
}
