//! Command-line front end: translate specifications to monitor automata,
//! synthesize controllers over finite systems or ODE grid abstractions,
//! replay synthesized controllers in closed loop, and print the
//! monitor-size benchmark table.
//!
//! Exit codes: 0 on success (including a clean `realizable false`
//! verdict), 2 on usage or input errors, 3 when a runtime precondition
//! fails (start state outside the controllable region, divergence from
//! the abstraction, and similar simulation failures).

mod spec_file;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use safesynth::abstraction::{
    build_grid_abstraction, extend_system, parse_abstraction_config, refine_and_simulate,
    AbstractionSpec, EnvSource, Extension, GridAbstraction, SimError,
};
use safesynth::automata::{construct_fine_nfa, subset_construction};
use safesynth::games::{load_policy, save_policy};
use safesynth::ltl::{gen_fail_exact_formula, gen_fail_formula, Letter};
use safesynth::synthesis::{synthesize, SynthesisResult};
use safesynth::ts::{load_system, TransitionSystem};
use safesynth::Formula;

use spec_file::parse_spec_file;

#[derive(Parser)]
#[command(name = "safesynth", version, about)]
struct Cli {
    /// Worker threads for parallel phases (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Translate a specification file into monitor automata (NFA + DFA).
    Translate {
        /// Specification file (`atoms:` plus `formula:` or `safe:` lines).
        #[arg(long)]
        spec: PathBuf,
        /// Directory for `nfa.txt` / `dfa.txt` graph exports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a maximally permissive controller.
    Synthesize {
        /// Finite transition system file.
        #[arg(long, conflicts_with = "abstraction")]
        system: Option<PathBuf>,
        /// ODE grid-abstraction config; built (and extended, if the config
        /// declares environment or input-observation atoms) before
        /// synthesis.
        #[arg(long, required_unless_present = "system")]
        abstraction: Option<PathBuf>,
        /// Specification file.
        #[arg(long)]
        spec: PathBuf,
        /// Directory for `policy.txt`, `product.txt`, `report.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a synthesized controller in closed loop on the continuous model.
    Simulate {
        /// ODE grid-abstraction config.
        #[arg(long)]
        abstraction: PathBuf,
        /// Specification file (the controller is re-derived
        /// deterministically, or loaded from --controller).
        #[arg(long)]
        spec: PathBuf,
        /// Previously saved policy file to replay instead of re-solving.
        #[arg(long)]
        controller: Option<PathBuf>,
        /// Initial continuous state, comma-separated.
        #[arg(long)]
        x0: String,
        /// Environment word file: one token per cycle listing the true
        /// environment atoms (`f` or `f,g`), with `-` or `!f` for none.
        #[arg(long)]
        env_word: Option<PathBuf>,
        /// Seed for the random environment (used when no word is given;
        /// a word is padded with all-false past its end).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum number of control cycles.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Stop as soon as the guarantee atom holds.
        #[arg(long)]
        stop_at_target: bool,
        /// Trajectory CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the monitor-size table for the fault-window family.
    Bench {
        /// Window sizes, inclusive (`3..6`).
        #[arg(long, default_value = "3..6")]
        n_range: String,
        /// Pattern parameter within each window.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Antecedent family and spelling.
        #[arg(long, value_enum, default_value_t = Shape::Nested)]
        shape: Shape,
        /// Also write the table to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Antecedent family used by `bench`.
#[derive(Copy, Clone, ValueEnum)]
enum Shape {
    /// Exactly k negated readings, next-factored chains.
    Nested,
    /// Exactly k negated readings, flat chains.
    Flat,
    /// At least k positive readings (the synthesis default family).
    Window,
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // Ignore the error: the global pool may already be initialized.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    if let Err(e) = run(cli.cmd) {
        eprintln!("error: {e:#}");
        // Simulation-time failures are runtime errors (3); everything else
        // that reaches here is an input or usage problem (2).
        let code = if e.downcast_ref::<SimError>().is_some() { 3 } else { 2 };
        std::process::exit(code);
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Translate { spec, out } => cmd_translate(&spec, out.as_deref()),
        Cmd::Synthesize {
            system,
            abstraction,
            spec,
            out,
        } => cmd_synthesize(system.as_deref(), abstraction.as_deref(), &spec, out.as_deref()),
        Cmd::Simulate {
            abstraction,
            spec,
            controller,
            x0,
            env_word,
            seed,
            steps,
            stop_at_target,
            out,
        } => cmd_simulate(
            &abstraction,
            &spec,
            controller.as_deref(),
            &x0,
            env_word.as_deref(),
            seed,
            steps,
            stop_at_target,
            out.as_deref(),
        ),
        Cmd::Bench {
            n_range,
            k,
            shape,
            out,
        } => cmd_bench(&n_range, k, shape, out.as_deref()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_out(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_translate(spec_path: &Path, out: Option<&Path>) -> Result<()> {
    let spec = parse_spec_file(&read(spec_path)?, None)?;
    if spec.guarantee.is_some() {
        return Err(anyhow!(
            "translate expects a pure safety specification (no `guarantee:` line)"
        ));
    }
    let t0 = Instant::now();
    let nfa = construct_fine_nfa(&spec.formula, &spec.alphabet)?;
    let dfa = subset_construction(&nfa);
    let build_ms = t0.elapsed().as_millis();

    let report = format!(
        "nfa_states {}\ndfa_states {}\nbuild_ms {build_ms}\n",
        nfa.state_count(),
        dfa.state_count()
    );
    print!("{report}");
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_out(&dir.join("nfa.txt"), &nfa.export_graph())?;
        write_out(&dir.join("dfa.txt"), &dfa.export_graph())?;
        write_out(&dir.join("report.txt"), &report)?;
    }
    Ok(())
}

/// The synthesis target built from CLI flags: either a finite system file,
/// or a grid abstraction (extended when the config asks for it).
struct Target {
    system: TransitionSystem,
    grid: Option<(GridAbstraction<f64>, Option<Extension>)>,
}

fn load_target(system: Option<&Path>, abstraction: Option<&Path>) -> Result<Target> {
    match (system, abstraction) {
        (Some(path), None) => Ok(Target {
            system: load_system(&read(path)?)?,
            grid: None,
        }),
        (None, Some(path)) => {
            let spec: AbstractionSpec<f64> = parse_abstraction_config(&read(path)?)?;
            let g = build_grid_abstraction(&spec)?;
            if spec.exo.is_empty() && spec.input_atoms.is_empty() {
                Ok(Target {
                    system: g.system.clone(),
                    grid: Some((g, None)),
                })
            } else {
                let input_atoms: Vec<(String, Vec<u32>)> = spec
                    .input_atoms
                    .iter()
                    .map(|(name, members)| {
                        let ids = members
                            .iter()
                            .map(|m| {
                                g.system.input_id(m).ok_or_else(|| {
                                    anyhow!("unknown input `{m}` in input_atom `{name}`")
                                })
                            })
                            .collect::<Result<Vec<u32>>>()?;
                        Ok((name.clone(), ids))
                    })
                    .collect::<Result<_>>()?;
                let (ext_sys, ext) = extend_system(&g.system, &input_atoms, &spec.exo)?;
                Ok(Target {
                    system: ext_sys,
                    grid: Some((g, Some(ext))),
                })
            }
        }
        _ => Err(anyhow!("exactly one of --system or --abstraction is required")),
    }
}

fn cmd_synthesize(
    system: Option<&Path>,
    abstraction: Option<&Path>,
    spec_path: &Path,
    out: Option<&Path>,
) -> Result<()> {
    let target = load_target(system, abstraction)?;
    let spec = parse_spec_file(&read(spec_path)?, Some(target.system.atoms()))?;
    let result = synthesize(&target.system, &spec.formula)?;

    print!("{}", result.report.to_text());
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_out(
            &dir.join("policy.txt"),
            &save_policy(&result.strategy, result.controller.as_ref()),
        )?;
        write_out(&dir.join("product.txt"), &result.product.to_text())?;
        write_out(&dir.join("report.txt"), &result.report.to_text())?;
    }
    Ok(())
}

fn parse_x0(s: &str, dim: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("bad coordinate `{t}` in --x0"))
        })
        .collect::<Result<_>>()?;
    if vals.len() != dim {
        return Err(anyhow!("--x0 has {} coordinates, model has {dim}", vals.len()));
    }
    Ok(vals)
}

fn parse_env_word(text: &str, exo: &[String]) -> Result<Vec<Letter>> {
    let mut letters = Vec::new();
    for tok in text.split_whitespace() {
        let mut letter: Letter = 0;
        if tok != "-" {
            for part in tok.split(',') {
                let (neg, name) = match part.strip_prefix('!') {
                    Some(n) => (true, n),
                    None => (false, part),
                };
                let bit = exo.iter().position(|e| e == name).ok_or_else(|| {
                    anyhow!("unknown environment atom `{name}` in the environment word")
                })?;
                if !neg {
                    letter |= 1 << bit;
                }
            }
        }
        letters.push(letter);
    }
    Ok(letters)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    abstraction: &Path,
    spec_path: &Path,
    controller: Option<&Path>,
    x0: &str,
    env_word: Option<&Path>,
    seed: u64,
    steps: usize,
    stop_at_target: bool,
    out: Option<&Path>,
) -> Result<()> {
    let config: AbstractionSpec<f64> = parse_abstraction_config(&read(abstraction)?)?;
    let target = load_target(None, Some(abstraction))?;
    let spec = parse_spec_file(&read(spec_path)?, Some(target.system.atoms()))?;
    let (g, ext) = target.grid.as_ref().expect("abstraction target");

    // Validate the cheap inputs before the synthesis work starts.
    let x0 = parse_x0(x0, g.model.dim())?;
    let mut env = match env_word {
        Some(path) => EnvSource::Word(parse_env_word(&read(path)?, &config.exo)?),
        None => EnvSource::random(seed),
    };

    let mut result: SynthesisResult = synthesize(&target.system, &spec.formula)?;
    if let Some(path) = controller {
        let (strategy, ctrl) = load_policy(&read(path)?)?;
        if strategy.winning.len() != result.product.state_count()
            || ctrl.is_some() != result.controller.is_some()
        {
            return Err(anyhow!(
                "policy file {} does not match this abstraction and specification",
                path.display()
            ));
        }
        result.strategy = strategy;
        result.controller = ctrl;
    }

    let traj = refine_and_simulate(g, ext.as_ref(), &result, &x0, &mut env, steps, stop_at_target)?;

    eprintln!(
        "cycles {}  target_step {}  eps_max {:.6}",
        traj.rows.len(),
        traj.target_step.map_or_else(|| "-".to_string(), |t| t.to_string()),
        traj.eps_max
    );
    let csv = traj.to_csv();
    match out {
        Some(path) => write_out(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_bench(n_range: &str, k: usize, shape: Shape, out: Option<&Path>) -> Result<()> {
    let (lo, hi) = n_range
        .split_once("..")
        .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
        .ok_or_else(|| anyhow!("--n-range must look like `3..6` (inclusive bounds)"))?;
    if lo > hi {
        return Err(anyhow!("--n-range is empty"));
    }

    let alphabet = safesynth::Alphabet::new(["f", "stop"])?;
    let mut table = String::from("n\tk\tnfa_states\tdfa_states\tbuild_ms\n");
    for n in lo..=hi {
        let f = match shape {
            Shape::Nested => gen_fail_exact_formula(n, k, true, Formula::atom("stop"))?,
            Shape::Flat => gen_fail_exact_formula(n, k, false, Formula::atom("stop"))?,
            Shape::Window => gen_fail_formula(n, k, Formula::atom("stop"))?,
        };
        let t0 = Instant::now();
        let nfa = construct_fine_nfa(&f, &alphabet)?;
        let dfa = subset_construction(&nfa);
        let ms = t0.elapsed().as_millis();
        let _ = writeln!(table, "{n}\t{k}\t{}\t{}\t{ms}", nfa.state_count(), dfa.state_count());
    }
    print!("{table}");
    if let Some(path) = out {
        write_out(path, &table)?;
    }
    Ok(())
}
