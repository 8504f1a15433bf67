//! `cpa` — cache persistence analysis of control-flow graphs.
//!
//! Exit codes: 0 success, 1 command-line usage error, 2 invalid input
//! (unreadable file, parse error, unsupported configuration), 3 the run
//! itself succeeded but uncovered a soundness violation (`compare` found a
//! domain claiming persistence the exact analysis refutes, or
//! `oracle-check` found the analysis disagreeing with the brute-force
//! oracle).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cpa_core::cfg::{blocks_in_set, project_to_cache_set};
use cpa_core::exact::ExactZdd;
use cpa_core::generate::{gen_hamiltonian_cfg, gen_random_cfg, RandomCfgParams, UndirectedGraph};
use cpa_core::oracle::{access_trace, find_witness, Witness, DEFAULT_BUDGET};
use cpa_core::solver::{
    analyze_program, emit_persistence_constraints, render_text, resolve_scopes, run_differential,
    solve, DifferentialReport, FlowGraph, Schedule, ScopeMode, FORMAT_VERSION,
};
use cpa_core::{parse_cfg, BlockId, CacheConfig, Cfg, DomainKind};

#[derive(Parser)]
#[command(
    name = "cpa",
    version,
    about = "Cache persistence analysis of control-flow graphs",
    long_about = "Decides, per memory block and persistence scope, whether the block can \
                  miss a set of an LRU cache more than once per scope entrance. Inputs are \
                  CFG text files; see the analyze subcommand."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide persistence per memory block and scope
    Analyze(AnalyzeArgs),
    /// Run a domain in lockstep against the exact one, reporting divergences
    Compare(CompareArgs),
    /// Check exact-analysis verdicts against the brute-force oracle
    OracleCheck(OracleCheckArgs),
    /// Generate analysis inputs
    #[command(subcommand)]
    Gen(GenCommand),
}

/// Cache geometry shared by the analysis subcommands.
#[derive(Args)]
struct CacheArgs {
    /// Cache associativity (ways per set)
    #[arg(
        short = 'k',
        long = "assoc",
        default_value_t = 8,
        value_parser = clap::value_parser!(u32).range(1..)
    )]
    assoc: u32,

    /// Number of cache sets (1 = fully associative)
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    sets: u32,

    /// Cache line size in bytes (power of two)
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
    line_size: u32,
}

impl CacheArgs {
    fn config(&self) -> CacheConfig {
        CacheConfig { associativity: self.assoc, num_sets: self.sets, line_size: self.line_size }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CFG input file
    file: PathBuf,

    #[command(flatten)]
    cache: CacheArgs,

    /// Domains to run, comma separated: must, cmust, blockcs, globalcs,
    /// product, exact, exact-explicit-0, exact-explicit-up, exact-explicit-k
    #[arg(
        short = 'd',
        long = "domains",
        value_parser = parse_domain,
        value_delimiter = ',',
        default_value = "exact"
    )]
    domains: Vec<DomainKind>,

    /// Scope selection: explicit (declared only), auto (declared, else
    /// natural loops), whole (one scope spanning the program)
    #[arg(long, value_parser = parse_scope_mode, default_value = "auto")]
    scopes: ScopeMode,

    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: Format,

    /// Write the exact domain's fixpoint state at the first analysed
    /// scope's header as Graphviz to this file
    #[arg(long, value_name = "FILE")]
    dump_zdd_dot: Option<PathBuf>,

    /// Print per-scope persistence constraints for a path analysis instead
    /// of the report (one `m_<block>_<scope> <= entries_<scope>;` per
    /// proven block)
    #[arg(long)]
    emit_constraints: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// CFG input file
    file: PathBuf,

    #[command(flatten)]
    cache: CacheArgs,

    /// Subject domain to compare against the exact reference
    #[arg(short = 'd', long = "domain", value_parser = parse_domain)]
    domain: DomainKind,

    /// Scope selection: explicit, auto, or whole
    #[arg(long, value_parser = parse_scope_mode, default_value = "auto")]
    scopes: ScopeMode,

    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct OracleCheckArgs {
    /// CFG input file (single-block and empty access labels only)
    file: PathBuf,

    /// Cache associativity; the oracle models one fully-associative set
    #[arg(
        short = 'k',
        long = "assoc",
        default_value_t = 8,
        value_parser = clap::value_parser!(u32).range(1..)
    )]
    assoc: u32,

    /// Abort when |V|*|E| exceeds this budget
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,

    /// Check only this block (default: every block)
    #[arg(long, value_name = "NAME")]
    block: Option<String>,

    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Reduce a Hamiltonian-circuit instance to a persistence question
    Hamiltonian {
        /// Edge-list file: first line the vertex count, then one `a b`
        /// edge per line; `#` starts a comment
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
    },
    /// Emit a seeded random structured (reducible) program
    Random {
        /// Generator seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Upper bound on nodes beyond the entry/exit pair
        #[arg(long, default_value_t = 8)]
        nodes: usize,
        /// Size of the block universe (at least 1)
        #[arg(long, default_value_t = 6)]
        blocks: usize,
        /// Probability a region becomes a loop
        #[arg(long, default_value_t = 0.3)]
        loop_prob: f64,
        /// Probability an access is a multi-block set
        #[arg(long, default_value_t = 0.0)]
        many_rate: f64,
        /// Probability an access target is statically unknown
        #[arg(long, default_value_t = 0.0)]
        unknown_rate: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_domain(s: &str) -> Result<DomainKind, String> {
    DomainKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = DomainKind::PUBLIC.iter().map(|d| d.name()).collect();
        format!("unknown domain, expected one of: {}", names.join(", "))
    })
}

fn parse_scope_mode(s: &str) -> Result<ScopeMode, String> {
    ScopeMode::parse(s).ok_or_else(|| "expected one of: explicit, auto, whole".to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version exit 0; genuine usage errors exit 1.
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Compare(args) => cmd_compare(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_cfg(path: &Path) -> anyhow::Result<Cfg> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_cfg(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> anyhow::Result<ExitCode> {
    let cfg = load_cfg(&args.file)?;
    let config = args.cache.config();
    let report = analyze_program(&cfg, &config, &args.domains, args.scopes)?;
    if let Some(path) = &args.dump_zdd_dot {
        let dot = exact_header_dot(&cfg, &config, args.scopes)?;
        fs::write(path, dot).with_context(|| format!("writing {}", path.display()))?;
    }
    if args.emit_constraints {
        print!("{}", emit_persistence_constraints(&report, &cfg));
    } else {
        match args.format {
            Format::Text => print!("{}", render_text(&report)),
            Format::Json => print_json(&report)?,
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Solve the exact domain over the first analysed (cache set, scope) pair
/// and render the scope-header state's decision diagrams as Graphviz.
fn exact_header_dot(cfg: &Cfg, config: &CacheConfig, mode: ScopeMode) -> anyhow::Result<String> {
    let scopes = resolve_scopes(cfg, mode)?;
    let scope = scopes.first().context("nothing to dump: the input has no scope")?;
    let set = (0..config.num_sets)
        .find(|&s| config.num_sets == 1 || !blocks_in_set(cfg, config, s).is_empty())
        .context("nothing to dump: no cache set holds a block")?;
    let projected = project_to_cache_set(cfg, config, set)?;
    let mut exact = ExactZdd::with_universe(config.associativity, projected.block_ids());
    let graph = FlowGraph::restricted(&projected, scope);
    let result = solve(&mut exact, &graph, Schedule::ReversePostorder)?;
    let state = result.states[scope.header.index()]
        .as_ref()
        .expect("scope headers are seeded before solving");
    Ok(exact.state_to_dot(state, |v| projected.block_name(BlockId(v)).to_string()))
}

fn cmd_compare(args: CompareArgs) -> anyhow::Result<ExitCode> {
    let cfg = load_cfg(&args.file)?;
    let config = args.cache.config();
    let report = run_differential(&cfg, &config, args.domain, args.scopes)?;
    match args.format {
        Format::Text => print!("{}", render_differential(&report)),
        Format::Json => print_json(&report)?,
    }
    Ok(if report.violations.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn render_differential(r: &DifferentialReport) -> String {
    use std::fmt::Write;

    let plural = |n: usize| if n == 1 { "" } else { "s" };
    let mut out = String::new();
    let _ = writeln!(out, "differential: {} against reference {}", r.subject, r.reference);
    let _ = writeln!(
        out,
        "compared {} state pairs: {} violation{}, {} gap{}",
        r.compared,
        r.violations.len(),
        plural(r.violations.len()),
        r.gaps.len(),
        plural(r.gaps.len()),
    );
    for d in &r.violations {
        let _ = writeln!(
            out,
            "  violation: set {} scope {} node {} block {} (claimed persistent, refuted)",
            d.cache_set, d.scope, d.node, d.block
        );
    }
    for d in &r.gaps {
        let _ = writeln!(
            out,
            "  gap: set {} scope {} node {} block {} (provable, subject misses it)",
            d.cache_set, d.scope, d.node, d.block
        );
    }
    out
}

#[derive(Serialize)]
struct OracleReport {
    format_version: u32,
    associativity: u32,
    budget: usize,
    blocks: Vec<OracleRow>,
    agree: bool,
}

#[derive(Serialize)]
struct OracleRow {
    block: String,
    analysis: bool,
    oracle: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<String>>,
}

fn cmd_oracle_check(args: OracleCheckArgs) -> anyhow::Result<ExitCode> {
    let cfg = load_cfg(&args.file)?;
    let config = CacheConfig::fully_associative(args.assoc);
    let analysis =
        analyze_program(&cfg, &config, &[DomainKind::Exact], ScopeMode::Whole)?;
    let scope = analysis.scopes.first().context("analysis produced no scope")?;
    let analysis_verdict = |name: &str| -> bool {
        scope
            .blocks
            .iter()
            .find(|row| row.block == name)
            .map(|row| row.verdicts[0].persistent)
            .unwrap_or(true)
    };

    let targets: Vec<BlockId> = match &args.block {
        Some(name) => {
            vec![cfg.block_id(name).with_context(|| format!("unknown block: {name}"))?]
        }
        None => cfg.block_ids().collect(),
    };

    let mut rows = Vec::new();
    for &b in &targets {
        let witness = find_witness(&cfg, b, args.assoc, args.budget)?;
        rows.push(OracleRow {
            block: cfg.block_name(b).to_string(),
            analysis: analysis_verdict(cfg.block_name(b)),
            oracle: witness.is_none(),
            witness: witness.map(|w| render_witness(&cfg, &w)),
        });
    }
    let agree = rows.iter().all(|r| r.analysis == r.oracle);
    let report = OracleReport {
        format_version: FORMAT_VERSION,
        associativity: args.assoc,
        budget: args.budget,
        blocks: rows,
        agree,
    };
    match args.format {
        Format::Text => print!("{}", render_oracle(&report)),
        Format::Json => print_json(&report)?,
    }
    Ok(if agree { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

/// The witness's access trace by block name; the two misses of the target
/// block are marked with `!`.
fn render_witness(cfg: &Cfg, w: &Witness) -> Vec<String> {
    access_trace(cfg, &w.edges)
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let name = cfg.block_name(b);
            if i == w.miss_positions.0 || i == w.miss_positions.1 {
                format!("{name}!")
            } else {
                name.to_string()
            }
        })
        .collect()
}

fn render_oracle(r: &OracleReport) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "oracle check: associativity {}, budget {}, whole-program scope",
        r.associativity, r.budget
    );
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    let width = r.blocks.iter().map(|row| row.block.len()).chain([5]).max().unwrap();
    let mut line = format!("  {:<width$}  {:<8}  {:<6}  witness", "block", "analysis", "oracle");
    out.push_str(line.trim_end());
    out.push('\n');
    for row in &r.blocks {
        let witness = row.witness.as_ref().map_or("-".to_string(), |t| t.join(" "));
        line = format!(
            "  {:<width$}  {:<8}  {:<6}  {}",
            row.block,
            yes_no(row.analysis),
            yes_no(row.oracle),
            witness
        );
        out.push_str(line.trim_end());
        out.push('\n');
    }
    if r.agree {
        let _ = writeln!(out, "verdicts agree on {} block(s)", r.blocks.len());
    } else {
        let mismatched: Vec<&str> = r
            .blocks
            .iter()
            .filter(|row| row.analysis != row.oracle)
            .map(|row| row.block.as_str())
            .collect();
        let _ = writeln!(out, "DISAGREEMENT on: {}", mismatched.join(" "));
    }
    out
}

fn cmd_gen(cmd: GenCommand) -> anyhow::Result<ExitCode> {
    match cmd {
        GenCommand::Hamiltonian { graph } => {
            let text = fs::read_to_string(&graph)
                .with_context(|| format!("reading {}", graph.display()))?;
            let g = UndirectedGraph::parse_edge_list(&text)
                .with_context(|| format!("parsing {}", graph.display()))?;
            anyhow::ensure!(
                g.num_vertices() >= 2,
                "the reduction needs at least 2 vertices, got {}",
                g.num_vertices()
            );
            let instance = gen_hamiltonian_cfg(&g);
            println!(
                "# hamiltonian-circuit reduction: {} vertices, {} edges",
                g.num_vertices(),
                g.num_edges()
            );
            println!(
                "# block {} is persistent at associativity {} in the whole-program scope",
                instance.cfg.block_name(instance.designated),
                instance.k
            );
            println!("# iff the source graph has no hamiltonian circuit; check with:");
            println!("#   cpa analyze -k {} --sets 1 --scopes whole <this file>", instance.k);
            print!("{}", instance.cfg.to_text());
        }
        GenCommand::Random { seed, nodes, blocks, loop_prob, many_rate, unknown_rate } => {
            anyhow::ensure!(blocks >= 1, "--blocks must be at least 1");
            for (name, rate) in
                [("loop-prob", loop_prob), ("many-rate", many_rate), ("unknown-rate", unknown_rate)]
            {
                anyhow::ensure!(
                    (0.0..=1.0).contains(&rate),
                    "--{name} must lie in [0, 1], got {rate}"
                );
            }
            let params = RandomCfgParams { nodes, blocks, loop_prob, many_rate, unknown_rate };
            let cfg = gen_random_cfg(seed, &params);
            println!("# random structured program, seed {seed}");
            print!("{}", cfg.to_text());
        }
    }
    Ok(ExitCode::SUCCESS)
}
