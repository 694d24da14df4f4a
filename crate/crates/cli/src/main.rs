use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use biinterp_core::corpus::{bundled_corpus, load_group, run_corpus, InstanceSpec, ModeChoice, SpecError};
use biinterp_core::extension::extension_data;
use biinterp_core::folog::{
    axiomatize_with_tuple, check_axiomatization, parse_formula, AxiomatizationCertificate, CertificateFile, EvalError,
    BUDGET_ENV, DEFAULT_BUDGET,
};
use biinterp_core::gamma::{auto_mode, build_codec_with_mode};
use biinterp_core::group::{GroupTable, Subgroup};
use biinterp_core::interp::{check_equivalence, interpret_g_in_h, kappa_var, translate, VerifyError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "biinterp",
    version,
    about = "Verify that a finite group and a definable normal subgroup interpret each other"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full verification pipeline on one instance
    Verify(VerifyArgs),
    /// Translate a formula about the group into one about the subgroup
    Translate(TranslateArgs),
    /// Print the extension data and tuple encoding of an instance
    Codec(InstanceArgs),
    /// Write the characteristic sentence of a group with a generating tuple
    Axiomatize(AxiomatizeArgs),
    /// Check a characteristic sentence against a group and tuple
    CheckAxiom(CheckAxiomArgs),
    /// Verify every instance of a corpus and print a summary table
    Corpus(CorpusArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Standard,
    Star,
}

impl From<ModeArg> for ModeChoice {
    fn from(m: ModeArg) -> ModeChoice {
        match m {
            ModeArg::Auto => ModeChoice::Auto,
            ModeArg::Standard => ModeChoice::Standard,
            ModeArg::Star => ModeChoice::Star,
        }
    }
}

#[derive(Args)]
struct InstanceArgs {
    /// Builder expression (e.g. symmetric:4) or path to a group file
    #[arg(long)]
    group: String,
    /// Formula with one free variable defining the subgroup
    #[arg(long)]
    kappa: String,
    /// Parameter binding name=id, repeatable
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, usize)>,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    /// Enumeration budget in visited assignments
    #[arg(long, env = BUDGET_ENV, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Seed of the random translation suite
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random sentences in the translation suite
    #[arg(long, default_value_t = 0)]
    suite_size: usize,
    /// Report file (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TranslateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Formula about the group; parameters use the --param bindings
    #[arg(long)]
    phi: String,
}

#[derive(Args)]
struct AxiomatizeArgs {
    #[arg(long)]
    group: String,
    /// Comma-separated element ids
    #[arg(long, default_value = "")]
    tuple: String,
    /// Certificate file (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckAxiomArgs {
    /// Certificate file written by `axiomatize`
    #[arg(long)]
    cert: PathBuf,
    #[arg(long)]
    group: String,
    /// Comma-separated element ids
    #[arg(long, default_value = "")]
    tuple: String,
}

#[derive(Args)]
struct CorpusArgs {
    /// JSON array of instances (bundled corpus if absent)
    #[arg(long)]
    instances: Option<PathBuf>,
    /// Run no instances
    #[arg(long, conflicts_with = "instances")]
    empty: bool,
    /// Seed of the random translation suites
    #[arg(long)]
    seed: Option<u64>,
    /// Random sentences per instance
    #[arg(long)]
    suite_size: Option<usize>,
    #[arg(long, env = BUDGET_ENV)]
    budget: Option<u64>,
    /// File for the full JSON reports
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, usize), String> {
    let (name, id) = s.split_once('=').ok_or_else(|| format!("expected name=id, got `{s}`"))?;
    let id = id.trim().parse().map_err(|_| format!("bad element id in `{s}`"))?;
    Ok((name.trim().to_string(), id))
}

fn parse_tuple(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| format!("bad element id `{p}`")))
        .collect()
}

enum Failure {
    /// verification ran and did not succeed
    Verdict,
    /// bad input or exhausted budget
    Input(String),
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(|e| input(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn spec_of(args: &InstanceArgs) -> InstanceSpec {
    let mut spec = InstanceSpec::new("cli", &args.group, &args.kappa);
    spec.name = format!("{} / {}", args.group, args.kappa);
    spec.params = args.params.iter().cloned().collect();
    spec.mode = args.mode.into();
    spec.budget = Some(args.budget);
    spec
}

fn cap_message(e: &EvalError) -> String {
    match e {
        EvalError::ComplexityCap { budget, spent, estimate } => format!(
            "complexity cap: budget {budget} exhausted after {spent} steps (plain enumeration estimate {estimate:.3e})"
        ),
        other => other.to_string(),
    }
}

fn cmd_verify(args: VerifyArgs) -> Outcome {
    let mut spec = spec_of(&args.instance);
    spec.seed = args.seed;
    spec.suite_size = args.suite_size;
    match biinterp_core::corpus::run_instance(&spec) {
        Ok(report) => {
            write_output(args.out.as_ref(), &report.to_json())?;
            eprintln!("verdict: {}", report.verdict);
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Verdict)
            }
        }
        Err(SpecError::Verify(VerifyError::ComplexityCap { report, error })) => {
            write_output(args.out.as_ref(), &report.to_json())?;
            Err(Failure::Input(cap_message(&error)))
        }
        Err(e) => Err(input(e)),
    }
}

struct Prepared {
    g: Arc<GroupTable>,
    sub: Subgroup,
}

fn prepare(args: &InstanceArgs) -> Result<Prepared, Failure> {
    let spec = spec_of(args);
    let g = Arc::new(load_group(&args.group).map_err(input)?);
    let kappa = spec.kappa_formula().map_err(input)?.resolve_params(&spec.env()).map_err(input)?;
    let var = kappa_var(&kappa).map_err(input)?;
    let set = biinterp_core::folog::Evaluator::new(&g, &Default::default())
        .with_budget(args.budget)
        .definable_set(&kappa, &[var])
        .map_err(|e| input(cap_message(&e)))?;
    let sub = Subgroup::from_members(g.clone(), set.into_iter().map(|t| t[0])).map_err(input)?;
    Ok(Prepared { g, sub })
}

fn cmd_codec(args: InstanceArgs) -> Outcome {
    let p = prepare(&args)?;
    let ext = Arc::new(extension_data(&p.sub).map_err(input)?);
    let mode = ModeChoice::from(args.mode).mode().unwrap_or_else(|| auto_mode(ext.m()));
    let codec = build_codec_with_mode(ext.clone(), mode).map_err(input)?;
    let out = json!({"order": p.g.order(), "extension": ext.to_json(), "codec": codec.to_json()});
    println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    Ok(())
}

fn cmd_translate(args: TranslateArgs) -> Outcome {
    let p = prepare(&args.instance)?;
    let spec = spec_of(&args.instance);
    let phi = parse_formula(&args.phi).map_err(input)?;
    let ext = Arc::new(extension_data(&p.sub).map_err(input)?);
    let mode = spec.mode.mode().unwrap_or_else(|| auto_mode(ext.m()));
    let codec = build_codec_with_mode(ext, mode).map_err(input)?;
    let budget = args.instance.budget;
    let interp = interpret_g_in_h(&codec, budget).map_err(|e| match e {
        biinterp_core::interp::InterpError::Eval(e) => input(cap_message(&e)),
        other => input(other),
    })?;
    let env = spec.env();
    let res = translate(&phi, &interp, &env).map_err(input)?;
    println!("{}", res.psi);
    let eq = check_equivalence(&phi, &res, &interp, &env, budget).map_err(|e| input(cap_message(&e)))?;
    if res.r == 0 {
        eprintln!("source: {}, target: {}", eq.first.0, eq.first.1);
    }
    if eq.holds {
        eprintln!("equivalence verified over {} assignment(s)", eq.instances);
        Ok(())
    } else {
        eprintln!("equivalence FAILS at {:?}", eq.counterexample.unwrap_or_default());
        Err(Failure::Verdict)
    }
}

fn cmd_axiomatize(args: AxiomatizeArgs) -> Outcome {
    let g = Arc::new(load_group(&args.group).map_err(input)?);
    let tuple = parse_tuple(&args.tuple).map_err(input)?;
    let cert = axiomatize_with_tuple(g, &tuple).map_err(input)?;
    let text = serde_json::to_string_pretty(&cert.to_file()).expect("serializes");
    write_output(args.out.as_ref(), &text)
}

fn cmd_check_axiom(args: CheckAxiomArgs) -> Outcome {
    let data = fs::read_to_string(&args.cert).map_err(|e| input(format!("{}: {e}", args.cert.display())))?;
    let file: CertificateFile = serde_json::from_str(&data).map_err(input)?;
    let cert = AxiomatizationCertificate::from_file(&file).map_err(input)?;
    let h2 = load_group(&args.group).map_err(input)?;
    let tuple = parse_tuple(&args.tuple).map_err(input)?;
    let check = check_axiomatization(&cert, &h2, &tuple).map_err(input)?;
    let out = json!({"holds": check.holds, "isomorphism": check.witness});
    println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    if check.holds {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn cmd_corpus(args: CorpusArgs) -> Outcome {
    let mut specs = if args.empty {
        Vec::new()
    } else if let Some(path) = &args.instances {
        let data = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        serde_json::from_str::<Vec<InstanceSpec>>(&data).map_err(|e| input(format!("{}: {e}", path.display())))?
    } else {
        bundled_corpus()
    };
    for spec in &mut specs {
        if let Some(seed) = args.seed {
            spec.seed = seed;
        }
        if let Some(n) = args.suite_size {
            spec.suite_size = n;
        }
        if let Some(b) = args.budget {
            spec.budget = Some(b);
        }
    }
    let rows = run_corpus(&specs);
    let width = rows.iter().map(|r| r.instance.len()).max().unwrap_or(8).max(8);
    println!("{:width$}  {:16}  first failure", "instance", "verdict");
    for r in &rows {
        println!("{:width$}  {:16}  {}", r.instance, r.verdict, r.failure.as_deref().unwrap_or("-"));
    }
    if let Some(out) = &args.out {
        let text = serde_json::to_string_pretty(&rows).expect("serializes");
        write_output(Some(out), &text)?;
    }
    if rows.iter().all(|r| r.failure.is_none()) {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Translate(a) => cmd_translate(a),
        Command::Codec(a) => cmd_codec(a),
        Command::Axiomatize(a) => cmd_axiomatize(a),
        Command::CheckAxiom(a) => cmd_check_axiom(a),
        Command::Corpus(a) => cmd_corpus(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
