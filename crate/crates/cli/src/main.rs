use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gas_tsp_core::bench::{
    generate_instances, read_instance, run_bench, write_instances, write_outputs, Engine, ExperimentConfig,
    InstanceSpec,
};
use gas_tsp_core::circuit::{neighborhood_circuit, support_report};
use gas_tsp_core::gas::{run_gas_with, GasConfig};
use gas_tsp_core::grover::{Strategy, TerminationRule};
use gas_tsp_core::lk::{run_lk, LkConfig, StartRange};
use gas_tsp_core::neighborhood::{enumerate_neighborhood, ExchangeChainSpec};
use gas_tsp_core::oracle::{enumerate_good_states, held_karp_optimum, GoodStateSet};
use gas_tsp_core::tour::greedy_tour;
use gas_tsp_core::{Error, Tour};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "gas-tsp",
    version,
    about = "Grover adaptive search on the TSP, simulated classically"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Tsplib,
}

#[derive(Clone, Copy, ValueEnum)]
enum Starts {
    /// 1..=n-1
    Pseudocode,
    /// 1..=n-2
    Interior,
    /// 0..=n-1
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random symmetric instances.
    Gen {
        #[arg(long, value_delimiter = ',', default_values_t = [8, 10, 12])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        per_size: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        low: f64,
        #[arg(long, default_value_t = 100.0)]
        high: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance exactly with Held-Karp.
    Exact {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate all tours below a threshold (default: the greedy cost).
    Enumerate {
        instance: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one full-space search from the greedy tour.
    RunGas {
        instance: PathBuf,
        #[arg(long, default_value = "original")]
        strategy: Strategy,
        /// Base for the original strategy.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value = "rounds:logn4")]
        termination: TerminationRule,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Start node of the greedy tour.
        #[arg(long, default_value_t = 0)]
        start: usize,
        /// Good-state cache written by `enumerate`.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one exchange-chain search from the greedy tour.
    RunLk {
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        l_max: Option<usize>,
        #[arg(long, default_value_t = 1)]
        l_min: usize,
        #[arg(long, default_value_t = 5.0)]
        budget_factor: f64,
        /// Count every draw against the per-chain cap.
        #[arg(long)]
        cleaned: bool,
        /// Chain starts to scan.
        #[arg(long, value_enum, default_value_t = Starts::Pseudocode)]
        starts: Starts,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the strategy x termination sweep.
    Bench {
        /// JSON experiment config; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        per_size: Option<usize>,
        /// Seed for instance generation.
        #[arg(long)]
        instance_seed: Option<u64>,
        /// Root seed for per-trial seeds.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        strategy: Option<Vec<Strategy>>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        termination: Option<Vec<TerminationRule>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        lk: bool,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a neighborhood as JSON.
    Neighborhood {
        #[arg(long, value_delimiter = ',')]
        tour: Vec<usize>,
        #[arg(long)]
        start: usize,
        #[arg(long)]
        length: usize,
        /// Also report members cheaper than the reference.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Simulate the state-preparation circuit and compare its support.
    CircuitCheck {
        #[arg(long, value_delimiter = ',')]
        tour: Vec<usize>,
        #[arg(long)]
        start: usize,
        #[arg(long)]
        length: usize,
        /// Write the gate list as JSON.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capability(_) => 3,
        Error::Io { .. } => 1,
        _ => 2,
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                    path: dir.display().to_string(),
                    source: e,
                })?;
            }
            std::fs::write(path, text).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn with_lambda(strategy: Strategy, lambda: Option<f64>) -> Result<Strategy, Error> {
    let s = match (strategy, lambda) {
        (Strategy::Original { .. }, Some(lambda)) => Strategy::Original { lambda },
        (s, _) => s,
    };
    s.validate()?;
    Ok(s)
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Gen {
            sizes,
            per_size,
            seed,
            low,
            high,
            format,
            out,
        } => {
            let spec = InstanceSpec {
                sizes,
                per_size,
                seed,
                weight_range: (low, high),
            };
            let instances = generate_instances(&spec)?;
            match format {
                Format::Json => {
                    write_instances(&out, &instances)?;
                }
                Format::Tsplib => {
                    for inst in &instances {
                        write_or_print(Some(&out.join(format!("{}.tsp", inst.name()))), &inst.to_tsplib())?;
                    }
                }
            }
            eprintln!("wrote {} instances to {}", instances.len(), out.display());
        }
        Command::Exact { instance, out } => {
            let inst = read_instance(&instance)?;
            let (tour, cost) = held_karp_optimum(&inst)?;
            let doc = json!({ "instance": inst.name(), "n": inst.n(), "optimum": cost, "tour": tour });
            write_or_print(out.as_deref(), &serde_json::to_string_pretty(&doc)?)?;
        }
        Command::Enumerate {
            instance,
            threshold,
            start,
            out,
        } => {
            let inst = read_instance(&instance)?;
            let threshold = match threshold {
                Some(y) => y,
                None => greedy_tour(&inst, start)?.cost(&inst)?,
            };
            let set = enumerate_good_states(&inst, threshold)?;
            set.save(&out, &inst)?;
            eprintln!(
                "{} classes, {} tours below {threshold} written to {}",
                set.entries().len(),
                set.total(),
                out.display()
            );
        }
        Command::RunGas {
            instance,
            strategy,
            lambda,
            termination,
            seed,
            start,
            cache,
            out,
        } => {
            let inst = read_instance(&instance)?;
            let config = GasConfig {
                start,
                ..GasConfig::new(with_lambda(strategy, lambda)?, termination)
            };
            let initial = greedy_tour(&inst, start)?;
            let threshold = initial.cost(&inst)?;
            let cached = match &cache {
                Some(path) if path.exists() => GoodStateSet::load(path, &inst)?,
                _ => None,
            };
            let good = match cached.filter(|s| s.threshold() >= threshold) {
                Some(set) => set,
                None => enumerate_good_states(&inst, threshold)?,
            };
            let rec = run_gas_with(&inst, &good, &initial, &config, seed)?;
            write_or_print(out.as_deref(), &rec.to_json()?)?;
        }
        Command::RunLk {
            instance,
            seed,
            lambda,
            l_max,
            l_min,
            budget_factor,
            cleaned,
            starts,
            start,
            out,
        } => {
            let inst = read_instance(&instance)?;
            let config = LkConfig {
                l_max,
                l_min,
                lambda: lambda.unwrap_or(LkConfig::default().lambda),
                budget_factor,
                starts: match starts {
                    Starts::Pseudocode => StartRange::Pseudocode,
                    Starts::Interior => StartRange::Interior,
                    Starts::All => StartRange::All,
                },
                literal_mode: !cleaned,
                ..LkConfig::default()
            };
            let rec = run_lk(&inst, &greedy_tour(&inst, start)?, &config, seed)?;
            write_or_print(out.as_deref(), &rec.to_json()?)?;
        }
        Command::Bench {
            config,
            sizes,
            per_size,
            instance_seed,
            seed,
            strategy,
            lambda,
            termination,
            trials,
            lk,
            cache,
            out,
        } => {
            let mut cfg = match &config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                        path: path.display().to_string(),
                        source: e,
                    })?;
                    serde_json::from_str(&text)?
                }
                None => ExperimentConfig::default(),
            };
            if let Some(s) = sizes {
                cfg.instances.sizes = s;
            }
            if let Some(p) = per_size {
                cfg.instances.per_size = p;
            }
            if let Some(s) = instance_seed {
                cfg.instances.seed = s;
            }
            if let Some(s) = seed {
                cfg.root_seed = s;
            }
            if let Some(s) = strategy {
                cfg.strategies = s;
            }
            if lambda.is_some() {
                cfg.strategies = cfg
                    .strategies
                    .into_iter()
                    .map(|s| with_lambda(s, lambda))
                    .collect::<Result<_, _>>()?;
            }
            if let Some(t) = termination {
                cfg.terminations = t;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if lk {
                cfg.engine = Engine::Lk;
            }
            if cache.is_some() {
                cfg.cache_dir = cache;
            }
            let output = run_bench(&cfg)?;
            write_or_print(Some(&out.join("config.json")), &serde_json::to_string_pretty(&cfg)?)?;
            write_outputs(&out, &output)?;
            eprintln!(
                "{} records, {} failures written to {}",
                output.records.len(),
                output.failures.len(),
                out.display()
            );
            if !output.failures.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Neighborhood {
            tour,
            start,
            length,
            instance,
        } => {
            let spec = ExchangeChainSpec::new(Tour::new(tour)?, start, length)?;
            let set = enumerate_neighborhood(&spec);
            let mut doc = json!({
                "reference": spec.reference(),
                "start": start,
                "length": length,
                "size": set.size(),
                "members": set.members,
            });
            if let Some(path) = instance {
                let inst = read_instance(&path)?;
                let y = spec.reference().cost(&inst)?;
                let improving: Vec<_> = set
                    .members
                    .iter()
                    .filter(|t| t.cost(&inst).is_ok_and(|c| c < y))
                    .collect();
                doc["reference_cost"] = json!(y);
                doc["improving"] = json!(improving);
            }
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::CircuitCheck {
            tour,
            start,
            length,
            export,
        } => {
            let reference = Tour::new(tour)?;
            let n = reference.len();
            let circuit = neighborhood_circuit(&reference, start, length)?;
            if let Some(path) = &export {
                write_or_print(Some(path), &circuit.to_json()?)?;
            }
            let report = support_report(&circuit.run()?, n)?;
            let expected = enumerate_neighborhood(&ExchangeChainSpec::new(reference, start, length)?);
            let matches = report.all_one_hot && report.tours == expected.members;
            let doc = json!({
                "qubits": circuit.qubits,
                "gates": circuit.gates.len(),
                "support": report.tours.len(),
                "expected": expected.size(),
                "support_matches": matches,
                "norm_error": report.norm_error,
                "max_uniform_deviation": report.max_uniform_deviation,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            if !matches {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
