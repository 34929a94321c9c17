use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use commonrec::config::{ClassifierSpec, DatasetSpec, RunConfig};
use commonrec::datasets::{gen_reduction_instance, gen_synthetic, write_tu, SynthConfig, BLANK};
use commonrec::graphspace::to_text;
use commonrec::pipeline::{baseline_local_rw, explain_fc, explain_fcr};
use commonrec::report::{eval_report, RunReport};

mod oracle;

/// Marker left in an output directory when a run did not finish.
const FAILED_MARKER: &str = "FAILED";

#[derive(Parser)]
#[command(name = "commonrec", version, about = "Global common-recourse explanations for graph classifiers")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Vertex-reinforced walk, clustering and greedy recourse selection.
    ExplainFcr(RunArgs),
    /// Same, restricted to a counterfactual budget (`counterfactual_budget`).
    ExplainFc(RunArgs),
    /// Per-input local random walks feeding the same selection.
    BaselineLocalRw(RunArgs),
    /// Merge run reports into a coverage/cost table and coverage curves.
    Eval(EvalArgs),
    /// Write datasets and config templates.
    GenFixture {
        #[command(subcommand)]
        kind: Fixture,
    },
    /// Cross-check core routines against brute-force oracles.
    OracleCheck(oracle::OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; defaults apply when absent.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set theta=0.2 --set dataset.n_graphs=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the report files; without it the summary goes to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// `report.json` files or run directories holding one.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Write `eval.csv` and `curves.csv` here instead of printing the table.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Fixture {
    /// Synthetic molecule-like corpus as a TU directory plus a matching config.
    Synthetic {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        n_graphs: usize,
        #[arg(long, default_value_t = 5)]
        min_nodes: usize,
        #[arg(long, default_value_t = 12)]
        max_nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Star-graph encoding of a max-coverage instance as a TU directory plus a matching config.
    Reduction {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        elements: usize,
        /// One set as comma-separated element ids; repeat per set.
        #[arg(long = "subset", value_name = "IDS", required = true)]
        subsets: Vec<String>,
    },
    /// Print a fully resolved config.
    Config {
        #[arg(long)]
        profile: Option<String>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn resolve(args: &RunArgs) -> Result<RunConfig> {
    let mut overrides = Vec::new();
    if let Some(p) = &args.profile {
        overrides.push(format!("profile = {p:?}"));
    }
    if let Some(s) = args.seed {
        overrides.push(format!("seed = {s}"));
    }
    overrides.extend(args.set.iter().cloned());
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path, &overrides)?,
        None => RunConfig::from_toml("", &overrides)?,
    };
    if let Some(out) = &args.output {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn run(method: fn(&RunConfig) -> commonrec::Result<RunReport>, args: &RunArgs) -> Result<()> {
    let cfg = resolve(args)?;
    let out = cfg.output.clone();
    if let Some(dir) = &out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let _ = fs::remove_file(dir.join(FAILED_MARKER));
    }
    let result = method(&cfg).map_err(anyhow::Error::from).and_then(|report| match &out {
        Some(dir) => {
            report.write(dir)?;
            println!(
                "{}: coverage {:.4} cost {:.4} with {} recourse -> {}",
                report.method,
                report.summary.coverage,
                report.summary.cost,
                report.summary.recourse.len(),
                dir.display()
            );
            Ok(())
        }
        None => {
            print!("{}", report.summary.to_json());
            Ok(())
        }
    });
    if let (Err(e), Some(dir)) = (&result, &out) {
        // whatever was written so far must not pass for a finished run
        let _ = fs::write(dir.join(FAILED_MARKER), describe(e) + "\n");
    }
    result
}

fn read_report(path: &Path) -> Result<RunReport> {
    let file = if path.is_dir() { path.join("report.json") } else { path.to_path_buf() };
    if file.parent().is_some_and(|d| d.join(FAILED_MARKER).exists()) {
        bail!("{} belongs to a failed run", file.display());
    }
    let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
    RunReport::from_json(&text).with_context(|| file.display().to_string())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let reports = args.reports.iter().map(|p| read_report(p)).collect::<Result<Vec<_>>>()?;
    let table = eval_report(&reports);
    let mut means = String::from("method,runs,mean_coverage,mean_cost\n");
    for (method, coverage, cost, n) in table.means() {
        means.push_str(&format!("{method},{n},{coverage},{cost}\n"));
    }
    match &args.output {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, text) in [("eval.csv", table.table_csv()), ("curves.csv", table.curves_csv()), ("means.csv", means)] {
                let path = dir.join(name);
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        None => print!("{}\n{}", table.table_csv(), means),
    }
    Ok(())
}

fn parse_subset(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad element id {t:?} in {s:?}")))
        .collect()
}

/// Writes `config.toml` pointing at the TU directory in `out`.
fn write_fixture_config(out: &Path, classifier: ClassifierSpec, min_label_count: usize) -> Result<()> {
    let path = fs::canonicalize(out)?;
    let cfg = RunConfig {
        dataset: DatasetSpec::Tu { path, min_label_count },
        classifier,
        ..RunConfig::default()
    };
    cfg.validate()?;
    fs::write(out.join("config.toml"), cfg.to_toml())?;
    Ok(())
}

fn gen_fixture(kind: &Fixture) -> Result<()> {
    match kind {
        Fixture::Synthetic {
            out,
            n_graphs,
            min_nodes,
            max_nodes,
            seed,
        } => {
            let synth = SynthConfig {
                n_graphs: *n_graphs,
                min_nodes: *min_nodes,
                max_nodes: *max_nodes,
                seed: *seed,
                ..SynthConfig::default()
            };
            let (ds, clf) = gen_synthetic(&synth)?;
            write_tu(&ds, out)?;
            fs::write(out.join("motif.txt"), to_text(clf.motif()))?;
            let spec = ClassifierSpec::ForbiddenMotif {
                motif: Some(to_text(clf.motif())),
                p_present: synth.p_present,
                p_absent: synth.p_absent,
            };
            // the synthetic labels are dense enough that no filtering is wanted
            write_fixture_config(out, spec, 0)?;
            println!("{} graphs -> {}", ds.len(), out.display());
        }
        Fixture::Reduction { out, elements, subsets } => {
            let sets = subsets.iter().map(|s| parse_subset(s)).collect::<Result<Vec<_>>>()?;
            if *elements == 0 || sets.iter().flatten().any(|&u| u >= *elements) {
                bail!("every set must index elements below {elements}");
            }
            let inst = gen_reduction_instance(*elements, &sets);
            write_tu(&inst.dataset, out)?;
            let spec = ClassifierSpec::SameColorPair { blank: Some(BLANK.0) };
            write_fixture_config(out, spec, 0)?;
            println!("{} stars over {} sets -> {}", elements, sets.len(), out.display());
        }
        Fixture::Config { profile, set } => {
            let mut overrides: Vec<String> = profile.iter().map(|p| format!("profile = {p:?}")).collect();
            overrides.extend(set.iter().cloned());
            print!("{}", RunConfig::from_toml("", &overrides)?.to_toml());
        }
    }
    Ok(())
}

/// The error and its causes on one line. Library errors already quote their
/// source, so causes contained in the text so far are skipped.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

/// 2 for configuration problems, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let config = err
        .chain()
        .any(|e| matches!(e.downcast_ref::<commonrec::Error>(), Some(commonrec::Error::Config(_))));
    if config {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::ExplainFcr(a) => run(explain_fcr, a),
        Command::ExplainFc(a) => run(explain_fc, a),
        Command::BaselineLocalRw(a) => run(baseline_local_rw, a),
        Command::Eval(a) => eval(a),
        Command::GenFixture { kind } => gen_fixture(kind),
        Command::OracleCheck(a) => oracle::check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn causes_are_not_repeated() {
        let io = commonrec::Error::Io {
            path: "x.toml".into(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "gone"),
        };
        let err = anyhow::Error::from(io).context("loading");
        assert_eq!(describe(&err), "loading: x.toml: gone");
    }

    #[test]
    fn subsets_parse() {
        assert_eq!(parse_subset("0, 2,5").unwrap(), vec![0, 2, 5]);
        assert!(parse_subset("1,x").is_err());
    }

    #[test]
    fn config_errors_map_to_2() {
        let cfg = anyhow::Error::from(commonrec::Error::Config("bad".into()));
        assert_eq!(exit_code(&cfg), 2);
        assert_eq!(exit_code(&cfg.context("loading")), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
    }

    #[test]
    fn flags_override_the_file() {
        let args = RunArgs {
            config: None,
            set: vec!["budget=7".into()],
            profile: Some("desk".into()),
            seed: Some(9),
            output: Some("out".into()),
        };
        let cfg = resolve(&args).unwrap();
        assert_eq!((cfg.budget, cfg.seed, cfg.steps), (7, 9, 20_000));
        assert_eq!(cfg.output, Some(PathBuf::from("out")));
    }
}
