//! `cascade`: simulate cascades, solve for load-shedding controls and print the residual-load
//! table of the IEEE 39-bus benchmark. Output is CSV on stdout.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use cascade_core::agg::DepthStats;
use cascade_core::cascade::zero_unbalanced;
use cascade_core::chi::tree_reduce;
use cascade_core::{
    bundled, eta_family, failure_step, is_feasible, parse, projected_search, residual_load_table,
    retrieve_control, run_uncontrolled, solve_one_shot, solve_tree_constant, value_iteration,
    Error, Instance, LinkSet, NetworkState, SearchOptions, ETAS,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cascade",
    version,
    about = "Optimal load shedding against cascading failures"
)]
struct Cli {
    /// Print values with 12 decimals instead of 6 significant digits.
    #[arg(long, global = true)]
    full_precision: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the failure dynamics under a fixed control policy and print the trajectory.
    Simulate {
        /// Instance file, or `@name` for a bundled instance (e.g. `@ieee39`).
        instance: String,
        /// `none`, `proportional:λ` or `file:PATH` (one control per line, one value per node).
        #[arg(long, default_value = "none")]
        mode: Mode,
        /// Largest number of failure steps.
        #[arg(long, default_value_t = 10)]
        horizon: usize,
    },
    /// Compute a control sequence for `horizon` stages and its residual load.
    Solve {
        /// Instance file, or `@name` for a bundled instance.
        instance: String,
        /// Number of stages N.
        #[arg(long, short = 'n')]
        horizon: usize,
        /// `exact`, `tree-constant`, `one-shot` or `proj:η`.
        #[arg(long, default_value = "exact")]
        method: Method,
        /// Tolerance of control retrieval for the search-based methods.
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Print per-depth search statistics as CSV on stderr.
        #[arg(long, short = 'v')]
        verbose: bool,
    },
    /// Residual loads of the IEEE 39-bus instance for every projection column and the optimum.
    Table1 {
        /// Largest horizon.
        #[arg(long, default_value_t = 5)]
        max_horizon: usize,
    },
}

#[derive(Clone, Debug)]
enum Mode {
    None,
    Proportional(f64),
    File(PathBuf),
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "none" => Ok(Mode::None),
            Some(("proportional", x)) => {
                let lambda: f64 = x.parse().map_err(|_| format!("bad factor `{x}`"))?;
                if !(0.0..=1.0).contains(&lambda) {
                    return Err(format!("factor {lambda} lies outside [0, 1]"));
                }
                Ok(Mode::Proportional(lambda))
            }
            Some(("file", path)) => Ok(Mode::File(PathBuf::from(path))),
            _ => Err(format!(
                "unknown mode `{s}`; expected none, proportional:λ or file:PATH"
            )),
        }
    }
}

#[derive(Clone, Debug)]
enum Method {
    Exact,
    TreeConstant,
    OneShot,
    Projected(f64),
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Method::Exact),
            "tree-constant" => Ok(Method::TreeConstant),
            "one-shot" => Ok(Method::OneShot),
            _ => match s.strip_prefix("proj:") {
                Some(x) => x
                    .parse()
                    .map(Method::Projected)
                    .map_err(|_| format!("bad mixing parameter `{x}`")),
                None => Err(format!(
                    "unknown method `{s}`; expected exact, tree-constant, one-shot or proj:η"
                )),
            },
        }
    }
}

/// Failure with its exit code: 2 for unreadable input, 3 when no feasible control exists, 1
/// otherwise.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } => 2,
            Error::Infeasible(_)
            | Error::InfeasibleTarget { .. }
            | Error::EmptyDomain
            | Error::InadmissibleControl { .. }
            | Error::RetrievalFailed { .. } => 3,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn failure(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

/// CSV number: 6 significant digits, or 12 decimals with `full`.
fn num(x: f64, full: bool) -> String {
    if full {
        let s = format!("{x:.12}");
        return if s
            .trim_start_matches('-')
            .chars()
            .all(|c| c == '0' || c == '.')
        {
            "0".into()
        } else {
            s
        };
    }
    if x.abs() < 1e-9 {
        return "0".into();
    }
    // round first so that 9.9999996 counts as a two-digit number
    let x: f64 = format!("{x:.5e}").parse().unwrap();
    let decimals = (5 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn load_instance(arg: &str) -> Result<Instance, Failure> {
    if let Some(name) = arg.strip_prefix('@') {
        let names: Vec<&str> = bundled::ALL.iter().map(|(n, _)| *n).collect();
        return bundled::by_name(name).ok_or_else(|| {
            failure(
                1,
                format!(
                    "no bundled instance `{name}`; available: {}",
                    names.join(", ")
                ),
            )
        });
    }
    let text = std::fs::read_to_string(arg).map_err(|e| failure(1, format!("{arg}: {e}")))?;
    parse(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{arg}: {}", f.message);
        f
    })
}

/// Control file: one control per nonempty line, comma or whitespace separated, one value per
/// network node. Lines starting with `#` are comments.
fn read_controls(path: &PathBuf, nodes: usize) -> Result<Vec<Vec<f64>>, Failure> {
    let shown = path.display();
    let text = std::fs::read_to_string(path).map_err(|e| failure(1, format!("{shown}: {e}")))?;
    let mut controls = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| failure(2, format!("{shown}: line {}: not a number list", k + 1)))?;
        if values.len() != nodes {
            return Err(failure(
                2,
                format!(
                    "{shown}: line {}: expected {nodes} values, found {}",
                    k + 1,
                    values.len()
                ),
            ));
        }
        controls.push(values);
    }
    Ok(controls)
}

fn trajectory_csv(inst: &Instance, states: &[NetworkState], full: bool) -> String {
    let mut out = String::from("t,active_links,failed_links,residual,feasible\n");
    let mut prev: Option<&LinkSet> = None;
    for (t, st) in states.iter().enumerate() {
        let failed: Vec<&str> = match prev {
            Some(p) => p
                .iter()
                .filter(|&i| !st.active.contains(i))
                .map(|i| inst.net.link(i).name.as_str())
                .collect(),
            None => Vec::new(),
        };
        let _ = writeln!(
            out,
            "{t},{},{},{},{}",
            st.active.len(),
            failed.join(";"),
            num(inst.net.objective(&st.p), full),
            is_feasible(&inst.net, st)
        );
        prev = Some(&st.active);
    }
    out
}

fn simulate(inst: &Instance, mode: &Mode, horizon: usize, full: bool) -> Result<String, Failure> {
    let start = inst.state();
    let states = match mode {
        Mode::None => run_uncontrolled(&inst.net, &start, horizon),
        Mode::Proportional(lambda) => {
            // shed every injection to λ of its value at the first step, then let the cascade run
            let mut states = vec![start.clone()];
            if !is_feasible(&inst.net, &start) && horizon > 0 {
                let scaled: Vec<f64> = start.p.iter().map(|x| lambda * x).collect();
                let u = zero_unbalanced(&inst.net, &start.active, &scaled);
                let next = failure_step(&inst.net, &start, &u)?;
                let rest = run_uncontrolled(&inst.net, &next, horizon - 1);
                states.extend(rest);
            }
            states
        }
        Mode::File(path) => {
            let controls = read_controls(path, inst.net.node_count())?;
            let mut states = vec![start.clone()];
            let mut cur = start;
            for u in controls.iter().take(horizon) {
                cur = failure_step(&inst.net, &cur, u)?;
                states.push(cur.clone());
            }
            states
        }
    };
    Ok(trajectory_csv(inst, &states, full))
}

fn controls_csv(inst: &Instance, value: f64, controls: &[Vec<f64>], full: bool) -> String {
    let mut out = format!("J,{}\n", num(value, full));
    let names = inst.net.node_names().join(",");
    let _ = writeln!(out, "t,residual,{names}");
    for (t, u) in controls.iter().enumerate() {
        let vals: Vec<String> = u.iter().map(|&x| num(x, full)).collect();
        let _ = writeln!(
            out,
            "{t},{},{}",
            num(inst.net.objective(u), full),
            vals.join(",")
        );
    }
    out
}

fn solve(
    inst: &Instance,
    n: usize,
    method: &Method,
    epsilon: f64,
    verbose: bool,
    full: bool,
) -> Result<String, Failure> {
    if n == 0 {
        return Err(failure(1, "horizon must be at least 1"));
    }
    let st = inst.state();
    let (value, controls) = match method {
        Method::Exact => {
            let r = value_iteration(&inst.net, &st, n, &SearchOptions::default())?;
            if verbose {
                eprintln!("{}", DepthStats::CSV_HEADER);
                for s in &r.stats {
                    eprintln!("{}", s.csv());
                }
            }
            let u = retrieve_control(&inst.net, &st, &r, epsilon)?;
            (r.value, u)
        }
        Method::TreeConstant => {
            let tree = tree_reduce(&inst.net, &st.active)?;
            let sol = solve_tree_constant(&inst.net, &inst.p0, &tree, n)?;
            (sol.value, vec![sol.control; n])
        }
        Method::OneShot => {
            let os = solve_one_shot(&inst.net, &st, n)?;
            (os.value, os.sequence(&inst.p0, n))
        }
        Method::Projected(eta) => {
            let spec = eta_family(&inst.net, *eta)?;
            let res = projected_search(&inst.net, &st, n, &spec, epsilon)?;
            (res.value, res.controls)
        }
    };
    Ok(controls_csv(inst, value, &controls, full))
}

fn table1(max_horizon: usize, full: bool) -> Result<String, Failure> {
    let rows = residual_load_table(&bundled::ieee39(), max_horizon)?;
    let mut out = String::from("N");
    for eta in ETAS {
        let _ = write!(out, ",{eta}");
    }
    out.push_str(",optimal\n");
    for row in rows {
        let vals: Vec<String> = row.projected.iter().map(|&x| num(x, full)).collect();
        let _ = writeln!(
            out,
            "{},{},{}",
            row.horizon,
            vals.join(","),
            num(row.optimal, full)
        );
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<String, Failure> {
    let full = cli.full_precision;
    match cli.command {
        Command::Simulate {
            instance,
            mode,
            horizon,
        } => simulate(&load_instance(&instance)?, &mode, horizon, full),
        Command::Solve {
            instance,
            horizon,
            method,
            epsilon,
            verbose,
        } => solve(
            &load_instance(&instance)?,
            horizon,
            &method,
            epsilon,
            verbose,
            full,
        ),
        Command::Table1 { max_horizon } => table1(max_horizon, full),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
