//! The CSV layout consumed by the plotting scripts.

use molcav::sweep::{preset, run_sweep, write_results, CsvTable, Format};

const FIXED: &str = "index,branch,delta,delta_p,kappa,gamma1,gamma2,g1,g2,n1,n2,n_molecules,m_split,omega,\
cavity_abs,g1_abs,g2_abs,stable,abscissa,marginal,within_cap,residual";

fn header(axes: &[&str], pairs: &[&str]) -> String {
    let mut cols: Vec<String> = axes.iter().map(|a| format!("axis_{a}")).collect();
    cols.push(FIXED.to_string());
    for p in pairs {
        cols.push(format!("eta_{p},en_{p}"));
    }
    cols.push("error".to_string());
    cols.join(",")
}

fn written(name: &str, overrides: &[&str]) -> (CsvTable, String) {
    let spec = preset(name).unwrap().with_overrides(overrides).unwrap();
    let table = run_sweep(&spec, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(format!("{name}.csv"));
    write_results(&table, Format::Csv, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    (CsvTable::read(&path).unwrap(), text)
}

#[test]
fn plotted_presets_have_the_documented_header() {
    let all = ["a_b1", "a_b2", "b1_b2"];
    for (name, axes) in [
        ("fig2", ["delta", "omega"]),
        ("fig3d", ["n_molecules", "nbar"]),
        ("fig4a", ["delta", "omega"]),
    ] {
        let (_, text) = written(name, &["axes.0.count=3", "axes.1.count=3"]);
        assert_eq!(text.lines().next().unwrap(), header(&axes, &all), "{name}");
    }
}

#[test]
fn unstable_cells_are_empty_and_stable_cells_numeric() {
    let (t, _) = written("fig2", &["axes.0.min=-0.5", "axes.0.count=6", "axes.1.count=5"]);
    let stable = t.column("stable").unwrap();
    let en = t.column("en_a_b2").unwrap();
    let eta = t.column("eta_a_b2").unwrap();
    let mut seen = (0, 0);
    for r in &t.records {
        match r[stable].as_str() {
            "true" => {
                let e: f64 = r[en].parse().unwrap();
                assert!(e >= 0.0);
                assert!(r[eta].parse::<f64>().unwrap() > 0.0);
                seen.0 += 1;
            }
            "false" => {
                assert!(r[en].is_empty() && r[eta].is_empty());
                seen.1 += 1;
            }
            other => panic!("bad stable flag {other}"),
        }
    }
    assert!(seen.0 > 0 && seen.1 > 0, "{seen:?}");
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let (t, _) = written("fig2", &["axes.0.count=3", "axes.1.count=3"]);
    let k = t.column("kappa").unwrap();
    let cell = &t.records[0][k];
    assert_eq!(cell, "3.3333333333333331e-1");
    assert_eq!(cell.parse::<f64>().unwrap(), 1.0 / 3.0);
    let axis = t.floats("axis_delta").unwrap();
    assert_eq!(axis[0], Some(0.0));
    assert_eq!(axis.last().unwrap(), &Some(1.0));
}

#[test]
fn row_major_axis_order() {
    let (t, _) = written("fig2", &["axes.0.count=2", "axes.1.count=3"]);
    let d = t.floats("axis_delta").unwrap();
    let o = t.floats("axis_omega").unwrap();
    let got: Vec<(f64, f64)> = d.iter().zip(&o).map(|(a, b)| (a.unwrap(), b.unwrap())).collect();
    assert_eq!(got, vec![(0.0, 0.0), (0.0, 8.0), (0.0, 16.0), (1.0, 0.0), (1.0, 8.0), (1.0, 16.0)]);
}
