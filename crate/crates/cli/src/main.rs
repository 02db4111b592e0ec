//! Command line front end: clean survey tables, synthesize test data,
//! discretize, optimize cut points, extract rules, and compare the
//! optimized discretization against the equal-width baseline.

mod schema;

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use roughcut::discretize::{apply, equal_width, CutPointSet};
use roughcut::evolve::{evolve, CrossoverOp, FitnessMetric, GaConfig};
use roughcut::pipeline::run_compare;
use roughcut::rules::{evaluate, extract, RuleSet};
use roughcut::synth::{synthesize, SynthSpec};
use roughcut::table::{
    clean, load_table, survey_schema, ConsistencyChecks, InformationTable, Schema,
};
use roughcut::{Error, Result};

#[derive(Parser)]
#[command(
    name = "roughcut",
    version,
    about = "If-then rule induction with optimized discretization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drop records with missing values or impossible pregnancy counts
    Clean(CleanArgs),
    /// Generate a synthetic survey table, optionally with a planted rule
    Synth(SynthArgs),
    /// Bin numeric attributes with equal-width or supplied cut points
    Discretize(DiscretizeArgs),
    /// Search for cut points that maximize the fitness metric
    Optimize(OptimizeArgs),
    /// Extract and render if-then decision rules
    Rules(RulesArgs),
    /// Score a rule file against labelled test data
    Evaluate(EvaluateArgs),
    /// Optimize on a training split and compare against equal width
    Compare(CompareArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Input table: CSV with a header row matching the schema
    #[arg(long)]
    input: PathBuf,
    /// Attribute layout file; defaults to the built-in survey layout
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Directory for output files
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricChoice {
    /// Approximation accuracy of the positive decision class
    Alpha,
    /// Fraction of decision-pure condition patterns
    Pattern,
}

impl From<MetricChoice> for FitnessMetric {
    fn from(choice: MetricChoice) -> Self {
        match choice {
            MetricChoice::Alpha => FitnessMetric::Alpha,
            MetricChoice::Pattern => FitnessMetric::PatternRatio,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CrossoverChoice {
    /// Cycle-following position exchange
    Cyclic,
    /// Convex combination of the parents
    Blend,
}

impl From<CrossoverChoice> for CrossoverOp {
    fn from(choice: CrossoverChoice) -> Self {
        match choice {
            CrossoverChoice::Cyclic => CrossoverOp::Cyclic,
            CrossoverChoice::Blend => CrossoverOp::Blend,
        }
    }
}

#[derive(Args)]
struct GaArgs {
    /// Individuals per generation
    #[arg(long, default_value_t = 20)]
    population: usize,
    /// Generations to run
    #[arg(long, default_value_t = 100)]
    generations: usize,
    /// Per-gene mutation probability
    #[arg(long, default_value_t = 0.05)]
    mutation_rate: f64,
    /// Per-pair crossover probability
    #[arg(long, default_value_t = 0.8)]
    crossover_rate: f64,
    /// Geometric selection parameter q
    #[arg(long, default_value_t = 0.08)]
    selection_q: f64,
    /// Carry the best individual into every generation
    #[arg(long)]
    elitism: bool,
    /// Recombination operator
    #[arg(long, value_enum, default_value_t = CrossoverChoice::Cyclic)]
    crossover_op: CrossoverChoice,
    /// Evaluate fitness on a single thread
    #[arg(long)]
    serial: bool,
}

impl GaArgs {
    fn to_config(&self, seed: u64, metric: MetricChoice) -> GaConfig<f64> {
        GaConfig {
            population_size: self.population,
            generations: self.generations,
            selection_q: self.selection_q,
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            elitism: self.elitism,
            metric: metric.into(),
            crossover: self.crossover_op.into(),
            parallel: !self.serial,
            seed,
        }
    }
}

#[derive(Args)]
struct CleanArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Remove only records with missing values
    #[arg(long)]
    missing_only: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator settings, like "records=1000; noise=0.1; rule=Education < 7"
    #[arg(long)]
    config: String,
    /// Random seed
    #[arg(long)]
    seed: u64,
    /// Attribute layout file; defaults to the built-in survey layout
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Directory for output files
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct DiscretizeArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Number of bins per numeric attribute
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Cut point file; equal-width cuts when omitted
    #[arg(long)]
    cuts: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Number of bins per numeric attribute
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Random seed
    #[arg(long)]
    seed: u64,
    /// Fitness metric to maximize
    #[arg(long, value_enum, default_value_t = MetricChoice::Alpha)]
    metric: MetricChoice,
    #[command(flatten)]
    ga: GaArgs,
}

#[derive(Args)]
struct RulesArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Number of bins per numeric attribute
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Cut point file; equal-width cuts when omitted
    #[arg(long)]
    cuts: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Rule file written by `rules` or `compare` (.tsv)
    #[arg(long)]
    rules: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Number of bins per numeric attribute
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Random seed
    #[arg(long)]
    seed: u64,
    /// Fitness metric to maximize
    #[arg(long, value_enum, default_value_t = MetricChoice::Alpha)]
    metric: MetricChoice,
    /// Fraction of records held out for testing
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    #[command(flatten)]
    ga: GaArgs,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

/// 1 for bad requests, 2 for unusable data, 3 for internal invariants.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parameter(_) | Error::Config(_) => 1,
        Error::Schema(_) | Error::Row { .. } | Error::Range { .. } | Error::Io(_) => 2,
        Error::State(_) => 3,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Clean(args) => run_clean(args),
        Command::Synth(args) => run_synth(args),
        Command::Discretize(args) => run_discretize(args),
        Command::Optimize(args) => run_optimize(args),
        Command::Rules(args) => run_rules(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Compare(args) => run_compare_cmd(args),
    }
}

fn load_schema(path: &Option<PathBuf>) -> Result<Schema<f64>> {
    match path {
        Some(p) => schema::parse_schema(&fs::read_to_string(p)?),
        None => Ok(survey_schema()),
    }
}

fn load_input(path: &Path, schema: &Schema<f64>) -> Result<InformationTable<f64>> {
    load_table(BufReader::new(fs::File::open(path)?), schema)
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, content)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load_cuts(
    path: &Option<PathBuf>,
    bins: usize,
    schema: &Schema<f64>,
) -> Result<CutPointSet<f64>> {
    match path {
        Some(p) => CutPointSet::from_text(BufReader::new(fs::File::open(p)?), schema),
        None => equal_width(schema, bins),
    }
}

fn run_clean(args: CleanArgs) -> Result<()> {
    let schema = load_schema(&args.io.schema)?;
    let table = load_input(&args.io.input, &schema)?;
    let checks = if args.missing_only {
        ConsistencyChecks::None
    } else {
        ConsistencyChecks::GravidityParity
    };
    let (cleaned, report) = clean(&table, checks)?;
    if !report.is_reconciled() {
        return Err(Error::State("cleaning counts do not reconcile".into()));
    }
    write_out(&args.io.out, "cleaned.csv", &cleaned.to_csv())?;
    write_out(&args.io.out, "cleaning_report.txt", &report.to_text())?;
    print!("{}", report.to_text());
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<()> {
    let schema = load_schema(&args.schema)?;
    let spec = SynthSpec::parse(&args.config, &schema)?;
    let table = synthesize(&schema, &spec, args.seed)?;
    write_out(&args.out, "data.csv", &table.to_csv())?;
    println!("records={}", table.len());
    Ok(())
}

fn run_discretize(args: DiscretizeArgs) -> Result<()> {
    let schema = load_schema(&args.io.schema)?;
    let table = load_input(&args.io.input, &schema)?;
    let cuts = load_cuts(&args.cuts, args.bins, &schema)?;
    let discretized = apply(&table, &cuts)?;
    write_out(&args.io.out, "discretized.csv", &discretized.to_csv())?;
    write_out(&args.io.out, "cuts.txt", &cuts.to_text(&schema))?;
    Ok(())
}

fn run_optimize(args: OptimizeArgs) -> Result<()> {
    let schema = load_schema(&args.io.schema)?;
    let table = load_input(&args.io.input, &schema)?;
    let config = args.ga.to_config(args.seed, args.metric);
    let outcome = evolve(&table, args.bins, &config)?;
    let metric = match config.metric {
        FitnessMetric::Alpha => "alpha",
        FitnessMetric::PatternRatio => "pattern",
    };
    let summary = format!(
        "bins={}\nmetric={metric}\nseed={}\npopulation={}\ngenerations={}\n\
         baseline-fitness={}\nbest-fitness={}\nfitness-gain={}\n",
        args.bins,
        config.seed,
        config.population_size,
        config.generations,
        outcome.baseline_fitness,
        outcome.best_fitness,
        outcome.best_fitness - outcome.baseline_fitness,
    );
    write_out(&args.io.out, "history.csv", &outcome.history.to_csv())?;
    write_out(
        &args.io.out,
        "best_cuts.txt",
        &outcome.best_cuts.to_text(&schema),
    )?;
    write_out(&args.io.out, "summary.txt", &summary)?;
    print!("{summary}");
    Ok(())
}

fn run_rules(args: RulesArgs) -> Result<()> {
    let schema = load_schema(&args.io.schema)?;
    let table = load_input(&args.io.input, &schema)?;
    let cuts = load_cuts(&args.cuts, args.bins, &schema)?;
    let discretized = apply(&table, &cuts)?;
    let rules = extract(&discretized)?;
    write_out(&args.io.out, "rules.txt", &rules.render())?;
    write_out(&args.io.out, "rules.tsv", &rules.to_tsv())?;
    println!(
        "certain-rules={}\npossible-rules={}",
        rules.certain_count(),
        rules.possible_count()
    );
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let schema = load_schema(&args.io.schema)?;
    let table = load_input(&args.io.input, &schema)?;
    let rules = RuleSet::from_tsv(BufReader::new(fs::File::open(&args.rules)?), &schema)?;
    let discretized = apply(&table, rules.cuts())?;
    let evaluation = evaluate(&rules, &discretized)?;
    write_out(&args.io.out, "evaluation.txt", &evaluation.to_text())?;
    print!("{}", evaluation.to_text());
    Ok(())
}

fn run_compare_cmd(args: CompareArgs) -> Result<()> {
    let schema = load_schema(&args.io.schema)?;
    let table = load_input(&args.io.input, &schema)?;
    let config = args.ga.to_config(args.seed, args.metric);
    let outcome = run_compare(&table, args.bins, &config, args.test_fraction)?;
    let out = &args.io.out;
    write_out(out, "compare_report.txt", &outcome.report.to_text())?;
    write_out(out, "history.csv", &outcome.evolution.history.to_csv())?;
    write_out(
        out,
        "best_cuts.txt",
        &outcome.evolution.best_cuts.to_text(&schema),
    )?;
    write_out(
        out,
        "baseline_cuts.txt",
        &outcome.evolution.baseline_cuts.to_text(&schema),
    )?;
    write_out(
        out,
        "optimized_rules.txt",
        &outcome.optimized_rules.render(),
    )?;
    write_out(
        out,
        "optimized_rules.tsv",
        &outcome.optimized_rules.to_tsv(),
    )?;
    write_out(out, "baseline_rules.txt", &outcome.baseline_rules.render())?;
    write_out(out, "baseline_rules.tsv", &outcome.baseline_rules.to_tsv())?;
    print!("{}", outcome.report.to_text());
    Ok(())
}
