use std::path::PathBuf;
use std::process::{Command, Output};

use cascade_core::bundled;

fn cascade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Rows of a CSV text, split on commas.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("cascade-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

/// Value on the `J` line of a solve report.
fn value_of(text: &str) -> f64 {
    let first = &rows(text)[0];
    assert_eq!(first[0], "J");
    first[1].parse().unwrap()
}

const PUBLISHED: [[f64; 12]; 5] = [
    [
        3.716, 3.502, 3.310, 3.140, 2.984, 2.844, 2.718, 2.600, 2.494, 2.396, 2.304, 3.716,
    ],
    [
        9.860, 9.806, 9.750, 9.696, 8.974, 9.000, 7.334, 6.742, 4.578, 4.078, 4.000, 9.860,
    ],
    [
        10.000, 11.112, 11.090, 11.028, 10.000, 9.000, 7.334, 6.742, 5.000, 4.444, 4.000, 11.150,
    ],
    [
        10.000, 11.112, 11.090, 11.028, 10.000, 9.000, 7.334, 6.742, 5.000, 4.444, 4.000, 11.150,
    ],
    [
        10.000, 11.112, 11.090, 11.028, 10.000, 9.000, 7.334, 6.742, 5.000, 4.444, 4.000, 11.150,
    ],
];

#[test]
fn table1_matches_the_published_cells() {
    let text = stdout(&cascade(&["table1"]));
    let table = rows(&text);
    assert_eq!(table.len(), 6);
    assert_eq!(table[0].len(), 13);
    assert_eq!(table[0][0], "N");
    assert_eq!(table[0][12], "optimal");
    let cells: Vec<Vec<f64>> = table[1..]
        .iter()
        .map(|r| r[1..].iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    for (n, (got, want)) in cells.iter().zip(PUBLISHED).enumerate() {
        for (col, (g, w)) in got.iter().zip(want).enumerate() {
            assert!((g - w).abs() <= 1e-3, "N={} col {col}: {g} vs {w}", n + 1);
        }
    }
    // residual loads never drop as the horizon grows
    for col in 0..12 {
        for n in 1..5 {
            assert!(cells[n][col] >= cells[n - 1][col] - 1e-9);
        }
    }
    // identical invocations give identical bytes
    assert_eq!(text, stdout(&cascade(&["table1"])));
}

#[test]
fn uncontrolled_triangle_loses_every_link() {
    let table = rows(&stdout(&cascade(&["simulate", "@example1"])));
    assert_eq!(
        table[0],
        ["t", "active_links", "failed_links", "residual", "feasible"]
    );
    assert_eq!(table[1][1], "4");
    assert_eq!(table[2][2], "e1;e4");
    let last = table.last().unwrap();
    assert_eq!(last[1], "0");
    assert_eq!(last[4], "true");
}

#[test]
fn feasible_instance_has_a_single_row() {
    let text = bundled::EXAMPLE1.replace("1 30\n2 -10\n3 -20", "1 3\n2 -1\n3 -2");
    let path = temp_file("feasible.txt", &text);
    let sim = rows(&stdout(&cascade(&["simulate", path.to_str().unwrap()])));
    assert_eq!(sim.len(), 2);
    assert_eq!(sim[1], ["0", "4", "", "6.00000", "true"]);
    // no shedding: every stage keeps p⁰ and J is its residual load
    let solved = stdout(&cascade(&["solve", path.to_str().unwrap(), "-n", "2"]));
    assert!((value_of(&solved) - 6.0).abs() < 1e-9);
    for row in &rows(&solved)[2..] {
        assert_eq!(row[2..], ["3.00000", "-1.00000", "-2.00000"]);
    }
}

#[test]
fn uncontrolled_ieee39_disconnects_the_supply_node_at_the_first_step() {
    let inst = bundled::ieee39();
    let v = inst.net.node_index("39").unwrap();
    let incident: Vec<&str> = inst
        .net
        .links()
        .iter()
        .enumerate()
        .filter(|(i, l)| inst.active().contains(*i) && (l.tail == v || l.head == v))
        .map(|(_, l)| l.name.as_str())
        .collect();
    assert!(!incident.is_empty());
    let table = rows(&stdout(&cascade(&[
        "simulate",
        "@ieee39",
        "--horizon",
        "1",
    ])));
    let failed: Vec<&str> = table[2][2].split(';').collect();
    for name in incident {
        assert!(failed.contains(&name), "{name} survives: {failed:?}");
    }
}

#[test]
fn proportional_and_file_controls() {
    let table = rows(&stdout(&cascade(&[
        "simulate",
        "@example2a",
        "--mode",
        "proportional:0.4",
    ])));
    assert_eq!(table.len(), 3);
    assert_eq!(table[2][2], "e5");
    assert_eq!(table[2][3], "2.40000");
    assert_eq!(table[2][4], "true");
    let controls = temp_file("controls.txt", "# two stages\n30, -10, -20\n21 -7 -14\n");
    let mode = format!("file:{}", controls.display());
    let table = rows(&stdout(&cascade(&[
        "simulate",
        "@example1",
        "--mode",
        &mode,
    ])));
    assert_eq!(table.len(), 4);
    assert_eq!(table[3][1], "2");
    assert_eq!(table[3][3], "42.0000");
}

#[test]
fn exact_values_on_ieee39() {
    for (n, want) in [(1, 3.716), (2, 9.860), (3, 11.150), (5, 11.150)] {
        let text = stdout(&cascade(&["solve", "@ieee39", "-n", &n.to_string()]));
        assert!((value_of(&text) - want).abs() <= 1e-3, "N = {n}");
        let table = rows(&text);
        assert_eq!(table.len(), 2 + n);
        assert_eq!(table[1].len(), 2 + 39);
        // the retrieved control reaches the value to the printed precision
        let reached: f64 = table.last().unwrap()[1].parse().unwrap();
        assert!(reached >= value_of(&text) - 1e-4);
    }
}

#[test]
fn projected_and_analytic_methods() {
    let text = stdout(&cascade(&[
        "solve", "@ieee39", "-n", "2", "--method", "proj:1.0",
    ]));
    assert!((value_of(&text) - 4.0).abs() <= 1e-3);
    let text = stdout(&cascade(&[
        "solve",
        "@example2b",
        "-n",
        "2",
        "--method",
        "tree-constant",
    ]));
    assert!((value_of(&text) - 4.2).abs() <= 1e-9);
    assert_eq!(rows(&text)[2], ["0", "4.20000", "2.10000", "0", "-2.10000"]);
    let text = stdout(&cascade(&[
        "solve",
        "@example2a",
        "-n",
        "2",
        "--method",
        "one-shot",
    ]));
    assert!((value_of(&text) - 3.0).abs() <= 1e-9);
}

#[test]
fn verbose_search_reports_depth_statistics() {
    let out = cascade(&["solve", "@example2a", "-n", "3", "-v"]);
    let _ = stdout(&out);
    let err = String::from_utf8(out.stderr).unwrap();
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines[0], "depth,expanded,pruned,memo_hits,incumbent");
    assert_eq!(lines.len(), 4);
}

#[test]
fn full_precision_prints_twelve_decimals() {
    let text = stdout(&cascade(&[
        "--full-precision",
        "solve",
        "@example2b",
        "-n",
        "2",
        "--method",
        "tree-constant",
    ]));
    assert_eq!(rows(&text)[0], ["J", "4.200000000000"]);
}

#[test]
fn exit_codes() {
    let bad = temp_file(
        "bad.txt",
        "[nodes]\n1 supply\n2 demand\n[links]\ne1 1 3 1 1\n",
    );
    let out = cascade(&["simulate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
    // shedding more than the injection is not an admissible control
    let controls = temp_file("too-much.txt", "31 -11 -20\n");
    let mode = format!("file:{}", controls.display());
    let out = cascade(&["simulate", "@example1", "--mode", &mode]);
    assert_eq!(out.status.code(), Some(3));
    let out = cascade(&["solve", "@ieee39", "-n", "1", "--method", "tree-constant"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not tree reducible"));
    let out = cascade(&["solve", "@example1", "-n", "1", "--method", "proj:1.5"]);
    assert_eq!(out.status.code(), Some(3));
    let out = cascade(&["solve", "@nowhere", "-n", "1"]);
    assert_eq!(out.status.code(), Some(1));
}
