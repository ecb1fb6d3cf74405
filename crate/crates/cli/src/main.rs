use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dcq_core::{classify, dmcq_conditions, is_difference_linear, Attr, Dcq, DcqError, Strategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dcq_cli::bench::{self, BenchConfig};
use dcq_cli::corpus::{builtin_corpus, corpus_entry};
use dcq_cli::csv_io::{load_set, write_set, write_weighted, COUNT_COLUMN};
use dcq_cli::dsl::{parse_program, parse_program_unchecked, Program};
use dcq_cli::error::RunError;
use dcq_cli::gen::{gen_cliques, gen_graph, gen_triples, random_database, RuleMix};
use dcq_cli::run::{
    intersect_duplicate_atoms, run_program, AggKind, AggOptions, Data, RingKind, RunOptions,
    Semantics,
};
use dcq_cli::sql::emit_sql;

#[derive(Parser)]
#[command(
    name = "dcq",
    version,
    about = "Evaluate differences of conjunctive queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the class of every operand and the strategy each difference gets.
    Classify(Source),
    /// Evaluate the differences of a program over CSV tables.
    Run(RunArgs),
    /// Sweep the triangle workload and print CSV tables.
    Bench(BenchArgs),
    /// Write synthetic tables.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Print SQL for the differences of a program.
    EmitSql(EmitArgs),
}

#[derive(Args)]
struct Source {
    /// Program file; without it (and without --corpus) the built-in corpus is used.
    #[arg(long)]
    program: Option<PathBuf>,
    /// Built-in program by name.
    #[arg(long, conflicts_with = "program")]
    corpus: Option<String>,
    /// Only this difference.
    #[arg(long)]
    dcq: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Auto,
    Easy,
    Baseline,
    HeuristicBool,
    HeuristicCap,
    Dmcq,
    Oracle,
}

impl StrategyArg {
    fn strategy(self) -> Option<Strategy> {
        match self {
            StrategyArg::Auto => None,
            StrategyArg::Easy => Some(Strategy::Easy),
            StrategyArg::Baseline => Some(Strategy::Baseline),
            StrategyArg::HeuristicBool => Some(Strategy::HeuristicBool),
            StrategyArg::HeuristicCap => Some(Strategy::HeuristicCap),
            StrategyArg::Dmcq => Some(Strategy::Dmcq),
            StrategyArg::Oracle => Some(Strategy::Oracle),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Directory holding one `<table>.csv` per relation source.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "set")]
    semantics: Semantics,
    /// Group-by attributes, comma separated; switches to aggregation.
    #[arg(long, value_delimiter = ',')]
    agg_head: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "numerical")]
    agg_kind: AggKind,
    #[arg(long, value_enum, default_value = "counting")]
    ring: RingKind,
    /// Drop groups whose aggregate is zero.
    #[arg(long)]
    drop_zero: bool,
    /// Compare every result with the brute-force evaluator; fail on a difference.
    #[arg(long)]
    check_oracle: bool,
    /// Merge atoms of a query over the same attributes into one intersected table.
    #[arg(long)]
    intersect_duplicates: bool,
    /// Directory for `<dcq>.csv` results.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON-lines statistics file, `-` for stdout.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SweepArg {
    Out1,
    Out2,
    Out,
    All,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "all")]
    sweep: SweepArg,
    #[arg(long, default_value_t = 2_000)]
    nodes: usize,
    #[arg(long, default_value_t = 10_000)]
    edges: usize,
    #[arg(long, default_value_t = 10_000)]
    triples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Strategies to compare, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "easy,baseline")]
    strategies: Vec<String>,
    /// Run the points of a sweep concurrently; timings are left blank.
    #[arg(long)]
    parallel: bool,
    /// Skip the oracle above this input size.
    #[arg(long, default_value_t = 2_000)]
    oracle_max_n: usize,
    /// CSV output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// A random directed graph without self-loops.
    Graph {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Disjoint cliques with about `edges` directed edges.
    Cliques {
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Candidate triples drawn from a graph CSV.
    Triples {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        m: usize,
        /// Shares of length-2 paths, edge-plus-vertex draws and length-4 paths.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.5,0")]
        mix: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random tables for every relation source of a program.
    Random {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 12)]
        domain: i64,
        #[arg(long, default_value_t = 50)]
        max_rows: usize,
        /// Add a `#count` column with multiplicities up to this value.
        #[arg(long)]
        max_count: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EmitArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
}

fn load_programs(source: &Source) -> Result<Vec<(String, Program)>> {
    match (&source.program, &source.corpus) {
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let program = parse_program(&text).with_context(|| format!("in {}", path.display()))?;
            Ok(vec![(path.display().to_string(), program)])
        }
        (None, Some(name)) => {
            let entry =
                corpus_entry(name).with_context(|| format!("no built-in program `{name}`"))?;
            Ok(vec![(entry.name.to_string(), entry.program())])
        }
        (None, None) => Ok(builtin_corpus()
            .iter()
            .map(|e| (e.name.to_string(), e.program()))
            .collect()),
    }
}

fn load_program(source: &Source) -> Result<Program> {
    if source.program.is_none() && source.corpus.is_none() {
        bail!("--program or --corpus is required");
    }
    Ok(load_programs(source)?.remove(0).1)
}

/// A program file without the query invariants checked; atoms over one
/// attribute set are merged before validation.
fn load_program_unchecked(source: &Source) -> Result<Program> {
    match &source.program {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(parse_program_unchecked(&text).with_context(|| format!("in {}", path.display()))?)
        }
        None => load_program(source),
    }
}

fn selected(program: &Program, only: &Option<String>) -> Result<Vec<(String, Dcq)>> {
    let all = program.all_dcqs();
    match only {
        None => Ok(all),
        Some(name) => {
            let found: Vec<_> = all.into_iter().filter(|(n, _)| n == name).collect();
            if found.is_empty() {
                bail!("no difference named `{name}`");
            }
            Ok(found)
        }
    }
}

/// The strategy a difference gets from its classes alone.
fn class_strategy(dcq: &Dcq) -> Result<(Strategy, String)> {
    if dcq.operands.len() > 2 {
        return Ok(match dmcq_conditions(&dcq.operands) {
            Ok(()) => (
                Strategy::Dmcq,
                "chain meets the multi-operand conditions".to_string(),
            ),
            Err(why) => (Strategy::Baseline, why),
        });
    }
    let verdict = is_difference_linear(&dcq.operands[0], &dcq.operands[1])?;
    if verdict.holds {
        return Ok((Strategy::Easy, "difference-linear".to_string()));
    }
    let why = verdict.witness.map(|w| w.to_string()).unwrap_or_default();
    if classify(&dcq.operands[1]).linear_reducible {
        Ok((Strategy::HeuristicBool, why))
    } else {
        Ok((
            Strategy::HeuristicCap,
            format!("{why}; heuristic choice depends on data"),
        ))
    }
}

fn cmd_classify(source: &Source) -> Result<()> {
    let mut out = std::io::stdout().lock();
    for (label, program) in load_programs(source)? {
        for (name, dcq) in selected(&program, &source.dcq)? {
            let (strategy, why) = class_strategy(&dcq)?;
            writeln!(out, "{label}/{name}: {strategy} ({why})")?;
            for (i, q) in dcq.operands.iter().enumerate() {
                let c = classify(q);
                writeln!(
                    out,
                    "  Q{}: acyclic={} free_connex={} linear_reducible={} full={}  {q}",
                    i + 1,
                    c.acyclic,
                    c.free_connex,
                    c.linear_reducible,
                    c.full
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut program = if args.intersect_duplicates {
        load_program_unchecked(&args.source)?
    } else {
        load_program(&args.source)?
    };
    let agg = args.agg_head.as_ref().map(|group| AggOptions {
        group: group.iter().map(|g| Attr::new(g.trim())).collect(),
        kind: args.agg_kind,
        ring: args.ring,
        drop_zero: args.drop_zero,
    });
    if agg.is_some() && args.semantics == Semantics::Bag {
        bail!("aggregation reads annotations from #weight; drop --semantics bag");
    }
    let opts = RunOptions {
        strategy: args.strategy.strategy(),
        semantics: args.semantics,
        agg,
        check_oracle: args.check_oracle,
    };
    let mut data = Data::load(&program, &args.data, &opts)?;
    if args.intersect_duplicates {
        (program, data) = match data {
            Data::Set(db) => {
                intersect_duplicate_atoms(&program, &db).map(|(p, d)| (p, Data::Set(d)))?
            }
            Data::Bag(db) => {
                intersect_duplicate_atoms(&program, &db).map(|(p, d)| (p, Data::Bag(d)))?
            }
            Data::Counting(db) => {
                intersect_duplicate_atoms(&program, &db).map(|(p, d)| (p, Data::Counting(d)))?
            }
            Data::Pair(db) => {
                intersect_duplicate_atoms(&program, &db).map(|(p, d)| (p, Data::Pair(d)))?
            }
        };
        program.validate()?;
    }
    if let Some(only) = &args.source.dcq {
        program.dcqs.retain(|d| &d.name == only);
        if program.dcqs.is_empty() {
            bail!("no difference named `{only}`");
        }
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut stats: Option<Box<dyn std::io::Write>> = match &args.stats {
        None => None,
        Some(p) if p == Path::new("-") => Some(Box::new(std::io::stdout())),
        Some(p) => Some(Box::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
    };
    let results = run_program(&program, &data, &opts);
    let total = results.len();
    let mut failed = Vec::new();
    for result in results {
        let (report, output) = match result {
            Ok(r) => r,
            Err(e) => {
                failed.push(e);
                continue;
            }
        };
        if let Some(w) = stats.as_mut() {
            writeln!(w, "{}", report.to_json())?;
        }
        match &args.out {
            Some(dir) => output.write(&dir.join(format!("{}.csv", report.query)))?,
            None if args.stats.as_deref() != Some(Path::new("-")) => {
                println!(
                    "{}: {} tuples via {}",
                    report.query, report.out, report.strategy
                );
            }
            None => {}
        }
    }
    let hint = |e: &RunError| match e {
        RunError::Dcq(DcqError::BudgetExceeded(_)) => {
            "; the oracle only handles small inputs, drop --check-oracle"
        }
        _ => "",
    };
    match failed.len() {
        0 => Ok(()),
        1 => bail!("{}{}", failed[0], hint(&failed[0])),
        n => {
            for e in &failed {
                eprintln!("error: {e}{}", hint(e));
            }
            bail!("{n} of {total} differences failed")
        }
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let strategies = args
        .strategies
        .iter()
        .map(|s| s.trim().parse::<Strategy>().map_err(anyhow::Error::msg))
        .collect::<Result<Vec<_>>>()?;
    let cfg = BenchConfig {
        nodes: args.nodes,
        edges: args.edges,
        triples: args.triples,
        seed: args.seed,
        strategies,
        parallel: args.parallel,
        oracle_max_n: args.oracle_max_n,
        ..BenchConfig::default()
    };
    let mut points = Vec::new();
    if matches!(args.sweep, SweepArg::Out1 | SweepArg::All) {
        let sizes: Vec<usize> = [1, 2, 4, 8].iter().map(|k| args.triples * k / 4).collect();
        points.extend(bench::sweep_out1(&cfg, &sizes)?);
    }
    if matches!(args.sweep, SweepArg::Out2 | SweepArg::All) {
        points.extend(bench::sweep_out2(&cfg, &[0, 25, 50, 75, 100])?);
    }
    if matches!(args.sweep, SweepArg::Out | SweepArg::All) {
        let mixes = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&p| RuleMix::new(p, 1.0 - p, 0.0))
            .collect::<Result<Vec<_>, _>>()?;
        points.extend(bench::sweep_out(&cfg, &mixes)?);
    }
    let table = bench::to_csv(&points);
    match &args.out {
        Some(p) => fs::write(p, table).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{table}"),
    }
    Ok(())
}

fn cmd_gen(cmd: &GenCommand) -> Result<()> {
    match cmd {
        GenCommand::Graph {
            nodes,
            edges,
            seed,
            out,
        } => write_set(out, &gen_graph(*nodes, *edges, *seed))?,
        GenCommand::Cliques { edges, size, out } => write_set(out, &gen_cliques(*edges, *size))?,
        GenCommand::Triples {
            graph,
            m,
            mix,
            seed,
            out,
        } => {
            let [p2, ev, p4] = mix[..] else {
                bail!("--mix takes three shares");
            };
            let graph = load_set(graph, &["src".to_string(), "dst".to_string()])?;
            write_set(
                out,
                &gen_triples(&graph, *m, RuleMix::new(p2, ev, p4)?, *seed)?,
            )?;
        }
        GenCommand::Random {
            source,
            domain,
            max_rows,
            max_count,
            seed,
            out,
        } => {
            let program = load_program(source)?;
            fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut written = std::collections::HashSet::new();
            match max_count {
                Some(k) => {
                    let db = random_database(&program, true, *domain, *max_rows, &mut rng, |r| {
                        r.gen_range(1..=*k)
                    });
                    for decl in &program.relations {
                        if written.insert(decl.source()) {
                            let rel = db.get(&decl.name).expect("generated");
                            write_weighted(
                                &out.join(format!("{}.csv", decl.source())),
                                rel,
                                COUNT_COLUMN,
                            )?;
                        }
                    }
                }
                None => {
                    let db = random_database(&program, true, *domain, *max_rows, &mut rng, |_| ());
                    for decl in &program.relations {
                        if written.insert(decl.source()) {
                            write_set(
                                &out.join(format!("{}.csv", decl.source())),
                                db.get(&decl.name).expect("generated"),
                            )?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn cmd_emit_sql(args: &EmitArgs) -> Result<()> {
    for (label, program) in load_programs(&args.source)? {
        for (name, dcq) in selected(&program, &args.source.dcq)? {
            let strategy = match args.strategy.strategy() {
                Some(s) => s,
                None => match class_strategy(&dcq)?.0 {
                    Strategy::HeuristicCap => Strategy::Baseline,
                    s => s,
                },
            };
            println!("-- {label}/{name} ({strategy})");
            print!("{}", emit_sql(&program, &dcq, strategy)?);
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Classify(source) => cmd_classify(source),
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Gen(cmd) => cmd_gen(cmd),
        Command::EmitSql(args) => cmd_emit_sql(args),
    }
}
