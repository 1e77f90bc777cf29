//! Command-line front end: (T, B)-plane sweeps to CSV, single protocol
//! runs with a machine-readable ledger, and the verification suite.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use qet_core::correlations;
use qet_core::protocol::{run_excited_qet, run_product_qee, run_thermal_qet, ProtocolTrace};
use qet_core::verify;
use qet_core::xy_model::{thermal_state, ModelParams};

#[derive(Parser)]
#[command(
    name = "qet",
    version,
    about = "Two-qubit XY-model energy teleportation laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the (T, B) plane at fixed alpha and write a CSV surface.
    Sweep(SweepArgs),
    /// Run one protocol instance and print its energy ledger.
    Protocol(ProtocolArgs),
    /// Run the invariant and acceptance suites.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Quantity {
    /// Energy extracted by the optimally rotated run.
    Extract,
    /// Negativity of the thermal state.
    Negativity,
    /// Wootters concurrence of the thermal state.
    Concurrence,
    /// Closed-form quantum discord in bits.
    Discord,
    /// Optimal rotation angle theta_0.
    #[value(name = "theta_opt")]
    ThetaOpt,
    /// Energy injected by the measurement.
    #[value(name = "delta_inf")]
    DeltaInf,
}

impl Quantity {
    fn column(self) -> &'static str {
        match self {
            Quantity::Extract => "extract",
            Quantity::Negativity => "negativity",
            Quantity::Concurrence => "concurrence",
            Quantity::Discord => "discord",
            Quantity::ThetaOpt => "theta_opt",
            Quantity::DeltaInf => "delta_inf",
        }
    }

    fn needs_protocol(self) -> bool {
        matches!(
            self,
            Quantity::Extract | Quantity::ThetaOpt | Quantity::DeltaInf
        )
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Coupling alpha (> 0).
    #[arg(long)]
    alpha: f64,
    /// Lowest temperature of the grid (> 0).
    #[arg(long, default_value_t = 0.05)]
    t_min: f64,
    /// Highest temperature of the grid.
    #[arg(long, default_value_t = 2.0)]
    t_max: f64,
    /// Number of temperature points (2..=10000).
    #[arg(long, default_value_t = 50)]
    t_steps: usize,
    /// Lowest field of the grid (>= 0).
    #[arg(long, default_value_t = 0.05)]
    b_min: f64,
    /// Highest field of the grid.
    #[arg(long, default_value_t = 2.0)]
    b_max: f64,
    /// Number of field points (2..=10000).
    #[arg(long, default_value_t = 50)]
    b_steps: usize,
    /// Column to emit; repeat for several columns.
    #[arg(long = "quantity", value_enum)]
    quantities: Vec<Quantity>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for the grid (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Mode {
    /// Gibbs state at the given temperature.
    Thermal,
    /// The upper Bell state |psi+>.
    Excited,
    /// The product ground state |00> (requires B > alpha).
    Qee,
}

#[derive(Args)]
struct ProtocolArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Magnetic field B (>= 0).
    #[arg(long)]
    b: f64,
    /// Coupling alpha (> 0).
    #[arg(long)]
    alpha: f64,
    /// Temperature; required in thermal mode, ignored otherwise.
    #[arg(long)]
    temp: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Multiplies every tolerance; 0 injects a guaranteed failure.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Protocol(args) => cmd_protocol(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

/// Usage-level failure: print the message and exit with code 2.
fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn fmt(value: f64) -> String {
    format!("{value:.16e}")
}

fn cmd_sweep(args: SweepArgs) -> ExitCode {
    if !(args.alpha > 0.0) {
        return usage_error("--alpha must be > 0");
    }
    if !(args.t_min > 0.0) {
        return usage_error("--t-min must be > 0");
    }
    if args.t_max < args.t_min {
        return usage_error("--t-max must be >= --t-min");
    }
    if !(args.b_min >= 0.0) {
        return usage_error("--b-min must be >= 0");
    }
    if args.b_max < args.b_min {
        return usage_error("--b-max must be >= --b-min");
    }
    for (steps, flag) in [(args.t_steps, "--t-steps"), (args.b_steps, "--b-steps")] {
        if !(2..=10_000).contains(&steps) {
            return usage_error(&format!("{flag} must be between 2 and 10000"));
        }
    }

    let mut quantities = args.quantities.clone();
    if quantities.is_empty() {
        quantities.push(Quantity::Extract);
    }
    quantities.dedup_by_key(|q| q.column());

    let ts = linspace(args.t_min, args.t_max, args.t_steps);
    let bs = linspace(args.b_min, args.b_max, args.b_steps);
    let grid: Vec<(f64, f64)> = ts
        .iter()
        .flat_map(|&t| bs.iter().map(move |&b| (t, b)))
        .collect();

    let needs_protocol = quantities.iter().any(|q| q.needs_protocol());
    let alpha = args.alpha;
    let quantities_ref = &quantities;
    let compute = move |&(t, b): &(f64, f64)| -> Result<String, String> {
        let params = ModelParams::new(b, alpha, t).map_err(|e| e.to_string())?;
        let trace: Option<ProtocolTrace> = if needs_protocol {
            Some(run_thermal_qet(&params).map_err(|e| e.to_string())?)
        } else {
            None
        };
        let mut fields = vec![fmt(t), fmt(b), fmt(alpha)];
        for q in quantities_ref {
            let value = match q {
                Quantity::Extract => trace.as_ref().unwrap().delta_extract,
                Quantity::ThetaOpt => trace.as_ref().unwrap().theta_opt,
                Quantity::DeltaInf => trace.as_ref().unwrap().delta_inf,
                Quantity::Negativity => {
                    let rho = thermal_state(&params).map_err(|e| e.to_string())?;
                    correlations::negativity(&rho).map_err(|e| e.to_string())?.0
                }
                Quantity::Concurrence => {
                    let rho = thermal_state(&params).map_err(|e| e.to_string())?;
                    correlations::concurrence(&rho).map_err(|e| e.to_string())?
                }
                Quantity::Discord => {
                    correlations::discord_xstate(&params)
                        .map_err(|e| e.to_string())?
                        .discord
                }
            };
            fields.push(fmt(value));
        }
        Ok(fields.join(","))
    };

    // Rows are computed in parallel but collected in grid order, so the
    // output bytes do not depend on scheduling.
    let rows: Result<Vec<String>, String> = match args.jobs {
        Some(jobs) => {
            if jobs == 0 {
                return usage_error("--jobs must be >= 1");
            }
            match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                Ok(pool) => pool.install(|| grid.par_iter().map(compute).collect()),
                Err(e) => return usage_error(&format!("--jobs rejected: {e}")),
            }
        }
        None => grid.par_iter().map(compute).collect(),
    };
    let rows = match rows {
        Ok(rows) => rows,
        Err(e) => return usage_error(&e),
    };

    let file = match File::create(&args.out) {
        Ok(f) => f,
        Err(e) => {
            return usage_error(&format!(
                "--out {} is not writable: {e}",
                args.out.display()
            ))
        }
    };
    let mut writer = BufWriter::new(file);
    let header: Vec<&str> = ["T", "B", "alpha"]
        .into_iter()
        .chain(quantities.iter().map(|q| q.column()))
        .collect();
    let mut write_all = || -> std::io::Result<()> {
        writeln!(writer, "{}", header.join(","))?;
        for row in &rows {
            writeln!(writer, "{row}")?;
        }
        writer.flush()
    };
    if let Err(e) = write_all() {
        return usage_error(&format!("--out {} failed: {e}", args.out.display()));
    }
    ExitCode::SUCCESS
}

fn print_trace(trace: &ProtocolTrace) {
    println!("e_initial={}", fmt(trace.e_initial));
    println!("e_after_measurement={}", fmt(trace.e_after_measurement));
    println!("e_after_locc={}", fmt(trace.e_after_locc));
    println!("delta_inf={}", fmt(trace.delta_inf));
    println!("delta_tel={}", fmt(trace.delta_tel));
    println!("delta_extract={}", fmt(trace.delta_extract));
    println!("theta_opt={}", fmt(trace.theta_opt));
    println!("t0={}", fmt(trace.t0));
    println!("p={}", fmt(trace.p));
    println!("q={}", fmt(trace.q));
}

fn cmd_protocol(args: ProtocolArgs) -> ExitCode {
    if !(args.alpha > 0.0) {
        return usage_error("--alpha must be > 0");
    }
    if !(args.b >= 0.0) {
        return usage_error("--b must be >= 0");
    }
    // The pure-state modes never evaluate Boltzmann weights; any valid
    // placeholder temperature leaves their ledgers untouched.
    let temperature = match (&args.mode, args.temp) {
        (Mode::Thermal, None) => return usage_error("--temp is required in thermal mode"),
        (_, Some(t)) if !(t > 0.0) => return usage_error("--temp must be > 0"),
        (_, Some(t)) => t,
        (_, None) => 1.0,
    };
    let params = match ModelParams::new(args.b, args.alpha, temperature) {
        Ok(p) => p,
        Err(e) => return usage_error(&e.to_string()),
    };

    match args.mode {
        Mode::Thermal => {
            let trace = match run_thermal_qet(&params) {
                Ok(t) => t,
                Err(e) => return usage_error(&e.to_string()),
            };
            println!("mode=thermal");
            println!("b={}", fmt(args.b));
            println!("alpha={}", fmt(args.alpha));
            println!("temp={}", fmt(temperature));
            print_trace(&trace);
        }
        Mode::Excited => {
            let trace = match run_excited_qet(&params) {
                Ok(t) => t,
                Err(e) => return usage_error(&e.to_string()),
            };
            println!("mode=excited");
            println!("b={}", fmt(args.b));
            println!("alpha={}", fmt(args.alpha));
            println!("alice_stage={}", fmt(trace.delta_inf));
            print_trace(&trace);
        }
        Mode::Qee => {
            if args.b <= args.alpha {
                return usage_error(
                    "qee mode requires --b > --alpha: the ground state must be a product state",
                );
            }
            let (trace, breakdown) = match run_product_qee(&params) {
                Ok(r) => r,
                Err(e) => return usage_error(&e.to_string()),
            };
            println!("mode=qee");
            println!("b={}", fmt(args.b));
            println!("alpha={}", fmt(args.alpha));
            println!("site_a={}", fmt(breakdown.e_site_a));
            println!("site_b={}", fmt(breakdown.e_site_b));
            println!("interaction={}", fmt(breakdown.e_interaction));
            print_trace(&trace);
        }
    }
    ExitCode::SUCCESS
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    if !(args.tolerance_scale >= 0.0) {
        return usage_error("--tolerance-scale must be >= 0");
    }
    let results = verify::run_all(args.tolerance_scale);
    let mut modules: Vec<&'static str> = Vec::new();
    for c in &results {
        if !modules.contains(&c.module) {
            modules.push(c.module);
        }
        println!(
            "[{}] {}::{} residual={:.3e} tolerance={:.3e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.module,
            c.name,
            c.residual,
            c.tolerance
        );
    }
    println!();
    let mut all_passed = true;
    for module in modules {
        let total = results.iter().filter(|c| c.module == module).count();
        let passed = results
            .iter()
            .filter(|c| c.module == module && c.passed)
            .count();
        println!("{module}: {passed}/{total} passed");
        all_passed &= passed == total;
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
