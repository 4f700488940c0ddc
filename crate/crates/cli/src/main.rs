use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fear_core::casestudies::run_case_studies;
use fear_core::feasibility::{feasible_hypervolume, ActionPartition};
use fear_core::io::{export_candidates, export_matrix, load_scenario, ExportOptions, LoadedScenario};
use fear_core::planner::{
    candidate_grid, evaluate_candidates, select_action, AggregateKind, AggregationPolicy, CandidateEvaluation,
};
use fear_core::render::{render_feasibility, render_plan, render_scene, render_trajectories};
use fear_core::{fear_matrix, resolve_trajectories, FearError, MdrSpec, SocialForceConfig};

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "fear", version, about = "Feasible action-space reduction for 2D multi-agent scenes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MdrChoice {
    Zero,
    SocialForce,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the FeAR matrix of a scenario as CSV.
    Compute {
        scenario: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Append the hypervolumes behind every entry.
        #[arg(long)]
        audit: bool,
        /// Append the unclipped ratios.
        #[arg(long)]
        raw: bool,
        /// Override the document's move-de-rigueur policy.
        #[arg(long, value_enum)]
        mdr: Option<MdrChoice>,
    },
    /// Rank candidate actions of one agent by aggregated FeAR.
    Plan {
        scenario: PathBuf,
        /// 1-based agent id.
        #[arg(long)]
        ego: usize,
        /// mean, min, max or count.
        #[arg(long, default_value = "mean")]
        aggregate: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        grid_magnitudes: usize,
        #[arg(long, default_value_t = 16)]
        grid_directions: usize,
        /// Rank colliding candidates too.
        #[arg(long)]
        no_mask: bool,
    },
    /// Render an SVG: scene, trajectories, feasibility:<id> or plan:<id>:<aggregate>.
    Render {
        scenario: PathBuf,
        what: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the bundled golden case studies and compare against the sign table.
    Casestudies { out_dir: PathBuf },
    /// Print the moves de rigueur of a scenario as JSON.
    Mdr {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        policy: Option<MdrChoice>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<FearError> for Failure {
    fn from(e: FearError) -> Self {
        match e {
            FearError::NoCollisionFreeCandidate { best } => Failure {
                code: EXIT_INFEASIBLE,
                message: format!(
                    "no collision-free candidate; best colliding candidate a={:.6} theta={:.6}",
                    best.candidate.magnitude, best.candidate.direction
                ),
            },
            other => Failure::usage(other.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read_scenario(path: &Path) -> CliResult<LoadedScenario> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    load_scenario(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn mdr_spec(loaded: &LoadedScenario, choice: Option<MdrChoice>) -> MdrSpec {
    match choice {
        None => loaded.mdr.clone(),
        Some(MdrChoice::Zero) => MdrSpec::Zero,
        Some(MdrChoice::SocialForce) => match &loaded.mdr {
            MdrSpec::SocialForce(cfg) => MdrSpec::SocialForce(cfg.clone()),
            MdrSpec::Zero => MdrSpec::SocialForce(SocialForceConfig::default()),
        },
    }
}

fn agent_index(loaded: &LoadedScenario, id: usize) -> CliResult<usize> {
    let k = loaded.scenario.agent_count();
    if id == 0 || id > k {
        return Err(Failure::usage(format!("agent id {id} out of range 1..={k}")));
    }
    Ok(id - 1)
}

struct PlanOutput {
    evals: Vec<CandidateEvaluation>,
    grid: ActionPartition,
    kind: AggregateKind,
    policy: AggregationPolicy,
}

fn plan(loaded: &LoadedScenario, ego: usize, aggregate: &str, n_mag: usize, n_dir: usize, mask: bool) -> CliResult<PlanOutput> {
    let kind: AggregateKind = aggregate.parse().map_err(|e: FearError| Failure::usage(e.to_string()))?;
    let s = &loaded.scenario;
    let mdr = loaded.mdr.compute(s)?;
    let candidates = candidate_grid(s.a_max, n_mag, n_dir)?;
    let evals = evaluate_candidates(s, &loaded.joint, &mdr, ego, &candidates)?;
    Ok(PlanOutput {
        evals,
        grid: ActionPartition {
            a_max: s.a_max,
            magnitude_bins: n_mag,
            direction_bins: n_dir,
        },
        kind,
        policy: AggregationPolicy {
            kind,
            collision_mask: mask,
        },
    })
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Compute {
            scenario,
            out,
            audit,
            raw,
            mdr,
        } => {
            let loaded = read_scenario(&scenario)?;
            let mu = mdr_spec(&loaded, mdr).compute(&loaded.scenario)?;
            let m = fear_matrix(&loaded.scenario, &loaded.joint, &mu)?;
            write_output(out.as_deref(), &export_matrix(&m, ExportOptions { raw, audit }))
        }
        Command::Plan {
            scenario,
            ego,
            aggregate,
            out,
            grid_magnitudes,
            grid_directions,
            no_mask,
        } => {
            let loaded = read_scenario(&scenario)?;
            let ego = agent_index(&loaded, ego)?;
            let p = plan(&loaded, ego, &aggregate, grid_magnitudes, grid_directions, !no_mask)?;
            let table = export_candidates(&p.evals);
            write_output(out.as_deref(), &table)?;
            let sel = select_action(&p.evals, p.policy)?;
            let e = &p.evals[sel.index];
            eprintln!(
                "selected ({}): a={:.6} theta={:.6} {}={:.6}",
                p.kind,
                sel.action.magnitude,
                sel.action.direction,
                p.kind,
                p.kind.scalar(&e.aggregates)
            );
            Ok(())
        }
        Command::Render { scenario, what, out } => {
            let loaded = read_scenario(&scenario)?;
            let svg = render(&loaded, &what)?;
            write_output(Some(&out), &svg)
        }
        Command::Casestudies { out_dir } => casestudies(&out_dir),
        Command::Mdr { scenario, policy } => {
            let loaded = read_scenario(&scenario)?;
            let mu = mdr_spec(&loaded, policy).compute(&loaded.scenario)?;
            let text = serde_json::to_string_pretty(&mu).expect("joint action serialises");
            println!("{text}");
            Ok(())
        }
    }
}

fn render(loaded: &LoadedScenario, what: &str) -> CliResult<String> {
    let s = &loaded.scenario;
    let parts: Vec<&str> = what.split(':').collect();
    let id = |text: &str| -> CliResult<usize> {
        let n: usize = text
            .parse()
            .map_err(|_| Failure::usage(format!("bad agent id {text:?} in {what:?}")))?;
        agent_index(loaded, n)
    };
    match parts.as_slice() {
        ["scene"] => Ok(render_scene(s)),
        ["trajectories"] => Ok(render_trajectories(s, &resolve_trajectories(s, &loaded.joint, None)?)),
        ["feasibility", agent] => {
            let j = id(agent)?;
            Ok(render_feasibility(&feasible_hypervolume(s, &loaded.joint, j)?))
        }
        ["plan", agent, aggregate] => {
            let ego = id(agent)?;
            let p = plan(loaded, ego, aggregate, 16, 16, true)?;
            let sel = select_action(&p.evals, p.policy).ok();
            Ok(render_plan(&p.evals, p.grid, p.kind, sel.as_ref()))
        }
        _ => Err(Failure::usage(format!(
            "unknown render target {what:?}; expected scene, trajectories, feasibility:<id> or plan:<id>:<aggregate>"
        ))),
    }
}

fn casestudies(out_dir: &Path) -> CliResult {
    let report = run_case_studies()?;
    fs::create_dir_all(out_dir).map_err(|e| Failure::usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let write = |name: String, text: &str| {
        let p = out_dir.join(name);
        fs::write(&p, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display())))
    };
    let options = ExportOptions { raw: true, audit: true };
    for case in &report.cases {
        let s = &case.loaded.scenario;
        write(format!("case_{}.csv", case.id), &export_matrix(&case.matrix, options))?;
        write(format!("case_{}_scene.svg", case.id), &render_scene(s))?;
        write(format!("case_{}_trajectories.svg", case.id), &render_trajectories(s, &case.resolved))?;
    }
    for cell in &report.mdr.cells {
        write(
            format!("mdr_A{}_mu{}.csv", cell.joint_label, cell.mdr_label),
            &export_matrix(&cell.matrix, options),
        )?;
    }
    for (label, joint) in &report.mdr.actions {
        let r = resolve_trajectories(&report.mdr.scenario, joint, None)?;
        write(format!("mdr_A{label}_trajectories.svg"), &render_trajectories(&report.mdr.scenario, &r))?;
    }
    write("report.md".into(), &report.to_markdown())?;

    let failures = report.failures();
    println!(
        "{} matrices, {} checks, {} failed; report in {}",
        report.matrix_count(),
        report.checks().count(),
        failures.len(),
        out_dir.join("report.md").display()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        let diff: Vec<String> = failures
            .iter()
            .map(|f| format!("- expected {} [{}]", f.claim, f.scope))
            .collect();
        Err(Failure {
            code: EXIT_MISMATCH,
            message: format!("sign pattern mismatch:\n{}", diff.join("\n")),
        })
    }
}

fn configure_threads() -> CliResult {
    let Ok(value) = std::env::var("FEAR_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("FEAR_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot configure {n} threads: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
