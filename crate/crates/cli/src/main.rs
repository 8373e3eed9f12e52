//! Command-line front end: compile rule bases, translate vit files, trace
//! derivations, run benchmarks and consistency checks.
//!
//! Exit codes: 0 success, 1 usage/parse/compile/IO errors, 2 transfer
//! failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use semshift_core::compiler::{compile, CompiledRuleSet, Direction};
use semshift_core::dsl::parse_rule_file_named;
use semshift_core::runtime::{
    derive_all, transfer, FallbackPolicy, HookRegistry, TransferError, TransferResult,
};
use semshift_core::sorts::{load_hierarchy, SortHierarchy};
use semshift_core::synth::{generate_inputs, generate_rule_file, SynthConfig};
use semshift_core::vit::{parse_vit, serialize_vit, Vit};

#[derive(Parser)]
#[command(
    name = "semshift",
    version,
    about = "Rule-based semantic transfer: compile declarative rewrite rules and apply them to flat semantic sets"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile rule files and print rule/index statistics
    Compile(CompileArgs),
    /// Rewrite input vit files into target vit files
    Translate(TranslateArgs),
    /// Enumerate all distinct derivations for one input
    Derive(DeriveArgs),
    /// Generate synthetic rules/inputs and report compile and transfer times
    Bench(BenchArgs),
    /// Validate rule files (and optionally inputs) without translating
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DirArg {
    Fwd,
    Bwd,
}

impl From<DirArg> for Direction {
    fn from(d: DirArg) -> Direction {
        match d {
            DirArg::Fwd => Direction::Fwd,
            DirArg::Bwd => Direction::Bwd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FallbackArg {
    Copy,
    Drop,
    Error,
}

impl From<FallbackArg> for FallbackPolicy {
    fn from(f: FallbackArg) -> FallbackPolicy {
        match f {
            FallbackArg::Copy => FallbackPolicy::CopyThrough,
            FallbackArg::Drop => FallbackPolicy::Drop,
            FallbackArg::Error => FallbackPolicy::Error,
        }
    }
}

#[derive(Args)]
struct RuleOpts {
    /// Rule file(s), in application order
    #[arg(long = "rules", required = true, num_args = 1..)]
    rules: Vec<PathBuf>,
    /// Application direction
    #[arg(long, value_enum)]
    direction: DirArg,
    /// Sort hierarchy file (defaults to a hierarchy containing only `top`)
    #[arg(long)]
    sorts: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    rules: RuleOpts,
    /// Print the deterministic trie listing to stdout
    #[arg(long)]
    dump_trie: bool,
}

#[derive(Args)]
struct TranslateArgs {
    #[command(flatten)]
    rules: RuleOpts,
    /// Input vit file, or a directory of .vit files (batch mode)
    #[arg(long)]
    input: PathBuf,
    /// Output file (single input) or directory (batch); stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
    /// Policy for conditions no rule consumes
    #[arg(long, value_enum, default_value = "copy")]
    fallback: FallbackArg,
    /// Print the derivation trace
    #[arg(long)]
    trace: bool,
    /// Print timing and rule-firing counts to stderr
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct DeriveArgs {
    #[command(flatten)]
    rules: RuleOpts,
    /// Input vit file
    #[arg(long)]
    input: PathBuf,
    /// Maximum number of distinct results
    #[arg(long, default_value_t = 10)]
    limit: usize,
    /// Policy for conditions no rule consumes
    #[arg(long, value_enum, default_value = "copy")]
    fallback: FallbackArg,
    /// Print the derivation trace of every result
    #[arg(long)]
    trace: bool,
    /// Print search statistics to stderr
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Number of synthetic rules
    #[arg(long, default_value_t = 1700)]
    rules_count: usize,
    /// Number of synthetic inputs
    #[arg(long, default_value_t = 50)]
    inputs_count: usize,
    /// Functor vocabulary size
    #[arg(long, default_value_t = 600)]
    vocab: usize,
    /// Generator seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    rules: RuleOpts,
    /// Optional vit file or directory to validate against the rule base
    #[arg(long)]
    input: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = match cli.cmd {
        Cmd::Compile(args) => cmd_compile(args),
        Cmd::Translate(args) => cmd_translate(args),
        Cmd::Derive(args) => cmd_derive(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Check(args) => cmd_check(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

// ---------------------------------------------------------------------------
// loading
// ---------------------------------------------------------------------------

fn module_name_for(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(|s| {
            let cleaned: String = s
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                .collect();
            if cleaned.starts_with(|c: char| c.is_ascii_lowercase()) {
                cleaned
            } else {
                format!("m_{cleaned}")
            }
        })
        .unwrap_or_else(|| "main".into())
}

fn load_program(opts: &RuleOpts) -> Result<(CompiledRuleSet, SortHierarchy)> {
    let hierarchy = match &opts.sorts {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading sort hierarchy {}", path.display()))?;
            load_hierarchy(&text).with_context(|| format!("loading {}", path.display()))?
        }
        None => SortHierarchy::top_only(),
    };
    let mut modules = Vec::new();
    for path in &opts.rules {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading rule file {}", path.display()))?;
        let (module, diags) = parse_rule_file_named(&text, &module_name_for(path))
            .with_context(|| format!("parsing {}", path.display()))?;
        for d in diags {
            eprintln!("{}: {d}", path.display());
        }
        modules.push(module);
    }
    let prog = compile(&modules, opts.direction.into(), &hierarchy).context("compiling rules")?;
    for d in &prog.diagnostics {
        eprintln!("{d}");
    }
    Ok((prog, hierarchy))
}

fn load_vit(path: &Path) -> Result<Vit> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading input {}", path.display()))?;
    parse_vit(&text).with_context(|| format!("parsing {}", path.display()))
}

fn vit_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("vit"))
        .collect();
    files.sort();
    Ok(files)
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

fn cmd_compile(args: CompileArgs) -> Result<ExitCode> {
    let (prog, _) = load_program(&args.rules)?;
    let summary = format!(
        "compiled {} rules, {} index keys ({})",
        prog.rule_count(),
        prog.index_key_count(),
        prog.direction
    );
    if args.dump_trie {
        eprintln!("{summary}");
        print!("{}", prog.dump_trie());
    } else {
        println!("{summary}");
    }
    Ok(ExitCode::SUCCESS)
}

fn report_stats(result: &TransferResult) {
    eprintln!(
        "stats: tried={} fired={} fallbacks={} time={:.3}ms",
        result.stats.rules_tried,
        result.stats.rules_fired,
        result.stats.fallbacks,
        result.stats.elapsed.as_secs_f64() * 1e3
    );
}

fn translate_one(
    v: &Vit,
    prog: &CompiledRuleSet,
    hierarchy: &SortHierarchy,
    policy: FallbackPolicy,
) -> std::result::Result<TransferResult, TransferError> {
    transfer(v, prog, hierarchy, &HookRegistry::default(), policy)
}

fn cmd_translate(args: TranslateArgs) -> Result<ExitCode> {
    let (prog, hierarchy) = load_program(&args.rules)?;
    let policy: FallbackPolicy = args.fallback.into();

    if args.input.is_dir() {
        let files = vit_files(&args.input)?;
        if let Some(out_dir) = &args.output {
            fs::create_dir_all(out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
        }
        let mut ok = 0usize;
        let mut parse_errors = 0usize;
        let mut transfer_errors = 0usize;
        for file in &files {
            let name = file.file_name().unwrap().to_string_lossy();
            let v = match load_vit(file) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("{name}: error: {e:#}");
                    parse_errors += 1;
                    continue;
                }
            };
            match translate_one(&v, &prog, &hierarchy, policy) {
                Ok(result) => {
                    let text = serialize_vit(&result.output);
                    match &args.output {
                        Some(dir) => {
                            let target = dir.join(file.file_name().unwrap());
                            fs::write(&target, text)
                                .with_context(|| format!("writing {}", target.display()))?;
                        }
                        None => {
                            println!("% {name}");
                            print!("{text}");
                        }
                    }
                    if args.trace {
                        print!("{}", result.trace_text());
                    }
                    if args.stats {
                        report_stats(&result);
                    }
                    ok += 1;
                }
                Err(e) => {
                    eprintln!("{name}: transfer error: {e}");
                    transfer_errors += 1;
                }
            }
        }
        println!(
            "translated {ok} file(s), {} error(s)",
            parse_errors + transfer_errors
        );
        if transfer_errors > 0 {
            return Ok(ExitCode::from(2));
        }
        if parse_errors > 0 {
            return Ok(ExitCode::from(1));
        }
        return Ok(ExitCode::SUCCESS);
    }

    let v = load_vit(&args.input)?;
    match translate_one(&v, &prog, &hierarchy, policy) {
        Ok(result) => {
            let text = serialize_vit(&result.output);
            match &args.output {
                Some(path) => {
                    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => print!("{text}"),
            }
            if args.trace {
                print!("{}", result.trace_text());
            }
            if args.stats {
                report_stats(&result);
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("transfer error: {e}");
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_derive(args: DeriveArgs) -> Result<ExitCode> {
    let (prog, hierarchy) = load_program(&args.rules)?;
    let v = load_vit(&args.input)?;
    match derive_all(
        &v,
        &prog,
        &hierarchy,
        &HookRegistry::default(),
        args.fallback.into(),
        args.limit,
    ) {
        Ok(out) => {
            println!(
                "{} distinct result(s){}",
                out.results.len(),
                if out.truncated {
                    " (limit reached)"
                } else {
                    ""
                }
            );
            for (i, result) in out.results.iter().enumerate() {
                println!("% result {}", i + 1);
                print!("{}", serialize_vit(&result.output));
                if args.trace {
                    print!("{}", result.trace_text());
                }
            }
            if args.stats {
                eprintln!(
                    "stats: tried={} fired={} time={:.3}ms",
                    out.stats.rules_tried,
                    out.stats.rules_fired,
                    out.stats.elapsed.as_secs_f64() * 1e3
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("transfer error: {e}");
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let cfg = SynthConfig {
        rules: args.rules_count,
        vocab: args.vocab.max(1),
        seed: args.seed,
        ..Default::default()
    };
    let rules_text = generate_rule_file(&cfg);
    let hierarchy = SortHierarchy::top_only();

    let started = Instant::now();
    let (module, _) =
        parse_rule_file_named(&rules_text, "bench").context("parsing generated rules")?;
    let prog =
        compile(&[module], Direction::Fwd, &hierarchy).context("compiling generated rules")?;
    let compile_time = started.elapsed();
    println!(
        "compile: {} rules, {} index keys in {:.3} s",
        prog.rule_count(),
        prog.index_key_count(),
        compile_time.as_secs_f64()
    );

    let inputs: Vec<Vit> = generate_inputs(&cfg, args.inputs_count, 15, 20, args.seed ^ 0x9e37)
        .iter()
        .map(|t| parse_vit(t).expect("generated input parses"))
        .collect();
    let hooks = HookRegistry::default();
    let mut times: Vec<Duration> = Vec::with_capacity(inputs.len());
    for v in &inputs {
        let t = Instant::now();
        let result = transfer(v, &prog, &hierarchy, &hooks, FallbackPolicy::CopyThrough);
        times.push(t.elapsed());
        if let Err(e) = result {
            bail!("benchmark transfer failed: {e}");
        }
    }
    if times.is_empty() {
        println!("transfer: no inputs");
        return Ok(ExitCode::SUCCESS);
    }
    times.sort();
    let mean = times.iter().sum::<Duration>() / times.len() as u32;
    let median = times[times.len() / 2];
    let p95 = times[(times.len() * 95 / 100).min(times.len() - 1)];
    println!(
        "transfer: {} inputs (15-20 conditions), mean {:.3} ms, median {:.3} ms, p95 {:.3} ms",
        times.len(),
        mean.as_secs_f64() * 1e3,
        median.as_secs_f64() * 1e3,
        p95.as_secs_f64() * 1e3
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode> {
    let (prog, hierarchy) = load_program(&args.rules)?;
    println!(
        "rules ok: {} rules, {} index keys ({})",
        prog.rule_count(),
        prog.index_key_count(),
        prog.direction
    );
    if let Some(input) = &args.input {
        let files = if input.is_dir() {
            vit_files(input)?
        } else {
            vec![input.clone()]
        };
        for file in &files {
            let v = load_vit(file)?;
            v.validate_sorts(&hierarchy)
                .with_context(|| format!("validating {}", file.display()))?;
        }
        println!("inputs ok: {} file(s)", files.len());
    }
    Ok(ExitCode::SUCCESS)
}
