//! `sumprod`: exact statistics of finite sets and claim suites over families.
//!
//! Exit codes: 0 success; 1 an exact claim failed; 2 usage, parse or
//! configuration error; 3 precondition violated; 4 budget exceeded.
//! Results go to stdout (or `--out`); progress and summaries go to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sumprod::claims::{
    self, lookup, plot_csv, registry, results_csv, results_json_lines, results_markdown, run_suite, summary,
    trends_by_series, trends_csv, trends_json_lines, trends_markdown, Budgets, ClaimResult, EvalOptions, Exactness,
    FamilySpec, Job, RunConfig, SizeRange, TrendReport, Verdict,
};
use sumprod::energies::{
    default_candidates, energy, fp_energy_k, fp_mixed_energy, gowers_norm_capped, m_hat, mixed_energy, Group,
};
use sumprod::error::Error;
use sumprod::field::{parse_fp_set, FpSet};
use sumprod::fplab::{fp_energy, shift_intersection_max, subgroup};
use sumprod::incidence::{collinear_triples_with, cross_ratio_count, quotient_configuration, TripleAlgorithm};
use sumprod::sets::{fiber, iterated_sumset_capped, parse_set, setop_capped, RSet, SetOpKind};

const THREADS_ENV: &str = "SUMPROD_THREADS";

#[derive(Parser)]
#[command(name = "sumprod", version, about = "Exact sum-product statistics and claim suites")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one statistic of one input.
    Compute(ComputeArgs),
    /// Evaluate claims on families and report every result.
    Verify(SuiteArgs),
    /// Evaluate claims along size ranges and report log-log trends.
    Scan(ScanArgs),
    /// Re-render saved JSON-lines results.
    Report(ReportArgs),
    /// List the claim registry.
    Claims,
}

#[derive(Clone, Copy, ValueEnum)]
enum Statistic {
    /// |kA| (or |A∘B| with --op).
    SumsetSize,
    /// The set A∘B itself.
    Setop,
    /// E_k(A) or E(A,B).
    Energy,
    /// Non-normalized multiplicative Gowers norm ‖A‖_{U^k}.
    Gowers,
    /// Collinear triples T(A,B,C).
    Triples,
    /// Cross-ratio coincidences.
    CrossRatio,
    /// The fiber A ∩ λ⁻¹A.
    Fiber,
    /// Candidate upper bound for M(A).
    MHat,
    /// Incidences of the quotient configuration of A.
    Incidences,
    /// E⁺(A,B) in F_p.
    FpEnergy,
    /// The order-d subgroup of F_p^*.
    Subgroup,
    /// max_{x≠0} |A ∩ (A+x)| in F_p.
    ShiftIntersection,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    Add,
    Mul,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Sum,
    Difference,
    Product,
    Quotient,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Args)]
struct ComputeArgs {
    statistic: Statistic,
    /// Input set: rationals, or `p=<prime>` and residues for F_p statistics.
    #[arg(long, conflicts_with = "set_file")]
    set: Option<String>,
    #[arg(long)]
    set_file: Option<PathBuf>,
    /// Second set B.
    #[arg(long)]
    set_b: Option<String>,
    /// Third set C.
    #[arg(long)]
    set_c: Option<String>,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, value_enum, default_value = "add")]
    group: GroupArg,
    #[arg(long, value_enum)]
    op: Option<OpArg>,
    /// Fiber scalar λ.
    #[arg(long)]
    lambda: Option<String>,
    /// Prime modulus for `subgroup`.
    #[arg(long)]
    p: Option<u64>,
    /// Subgroup order.
    #[arg(long)]
    d: Option<u64>,
    /// auto, energy-form, slope-sort or determinant.
    #[arg(long, default_value = "auto")]
    algorithm: String,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    budgets: BudgetArgs,
}

#[derive(Args, Clone, Default)]
struct BudgetArgs {
    /// Largest |A| for energies.
    #[arg(long)]
    budget_energy: Option<usize>,
    /// Largest |A| for Gowers norms.
    #[arg(long)]
    budget_gowers: Option<usize>,
    /// Largest |A| for collinear triples.
    #[arg(long)]
    budget_triples: Option<usize>,
    /// Largest |A| for exhaustive subset searches.
    #[arg(long)]
    budget_oracle: Option<usize>,
    /// Largest derived set.
    #[arg(long)]
    budget_set_cap: Option<usize>,
}

impl BudgetArgs {
    fn apply(&self, mut b: Budgets) -> Budgets {
        b.energy = self.budget_energy.unwrap_or(b.energy);
        b.gowers = self.budget_gowers.unwrap_or(b.gowers);
        b.triples = self.budget_triples.unwrap_or(b.triples);
        b.oracle = self.budget_oracle.unwrap_or(b.oracle);
        b.set_cap = self.budget_set_cap.unwrap_or(b.set_cap);
        b
    }
}

#[derive(Args)]
struct SuiteArgs {
    /// Claim ids; `all` selects the whole registry.
    claims: Vec<String>,
    /// Family specs such as `gp:1:2`, `random`, `fp-subgroup`.
    #[arg(long = "family")]
    families: Vec<String>,
    /// `a..b` (doubling) or a comma list; defaults per claim.
    #[arg(long)]
    sizes: Option<String>,
    /// Mandatory for random families.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time per evaluation.
    #[arg(long)]
    timings: bool,
    /// Extra seeded scalars for max/min over dilations.
    #[arg(long)]
    random_scalars: Option<usize>,
    #[command(flatten)]
    budgets: BudgetArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    suite: SuiteArgs,
    /// Plot-ready CSV of (n, lhs, rhs, ratio).
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Raw results as JSON-lines.
    #[arg(long)]
    results: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON-lines files written by `verify` or `scan --results`.
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "md")]
    format: Format,
    /// Summarize trends instead of listing rows.
    #[arg(long)]
    trends: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Invalid(_) => 2,
            Error::Precondition(_) => 3,
            Error::Budget { .. } => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        // Only fails if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let outcome = match cli.command {
        Command::Compute(a) => compute(&a),
        Command::Verify(a) => verify(&a),
        Command::Scan(a) => scan(&a),
        Command::Report(a) => report(&a),
        Command::Claims => list_claims(),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.flush()).map_err(|e| Failure::usage(format!("stdout: {e}")))
        }
    }
}

// ---------------------------------------------------------------------------
// compute
// ---------------------------------------------------------------------------

fn input_text(a: &ComputeArgs) -> CliResult<String> {
    match (&a.set, &a.set_file) {
        (Some(s), None) => Ok(s.clone()),
        (None, Some(p)) => {
            fs::read_to_string(p).map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display())))
        }
        _ => Err(Failure::usage("exactly one of --set and --set-file is required")),
    }
}

fn group(g: GroupArg) -> Group {
    match g {
        GroupArg::Add => Group::Additive,
        GroupArg::Mul => Group::Multiplicative,
    }
}

fn op_kind(o: OpArg) -> SetOpKind {
    match o {
        OpArg::Sum => SetOpKind::Sum,
        OpArg::Difference => SetOpKind::Difference,
        OpArg::Product => SetOpKind::Product,
        OpArg::Quotient => SetOpKind::Quotient,
    }
}

fn second(text: &Option<String>, fallback: &RSet) -> CliResult<RSet> {
    Ok(match text {
        Some(t) => parse_set(t)?,
        None => fallback.clone(),
    })
}

fn second_fp(text: &Option<String>, fallback: &FpSet) -> CliResult<FpSet> {
    Ok(match text {
        Some(t) => parse_fp_set(t)?,
        None => fallback.clone(),
    })
}

fn compute(a: &ComputeArgs) -> CliResult<u8> {
    let budgets = a.budgets.apply(Budgets::default());
    let value: String = match a.statistic {
        Statistic::Subgroup => {
            let (p, d) = a.p.zip(a.d).ok_or_else(|| Failure::usage("subgroup needs --p and --d"))?;
            subgroup(p, d)?.to_text()
        }
        Statistic::FpEnergy | Statistic::ShiftIntersection => {
            let s = parse_fp_set(&input_text(a)?)?;
            match a.statistic {
                Statistic::FpEnergy => {
                    if a.set_b.is_none() && a.k != 2 {
                        fp_energy_k(&s, a.k, group(a.group))?.value.to_string()
                    } else if matches!(a.group, GroupArg::Add) {
                        fp_energy(&s, &second_fp(&a.set_b, &s)?)?.to_string()
                    } else {
                        fp_mixed_energy(&s, &second_fp(&a.set_b, &s)?, Group::Multiplicative)?.value.to_string()
                    }
                }
                _ => {
                    let m = shift_intersection_max(&s);
                    format!("{} {}", m.value, m.argmax)
                }
            }
        }
        stat => {
            let s = parse_set(&input_text(a)?)?;
            compute_rational(a, stat, &s, &budgets)?
        }
    };
    let text = match a.format {
        Some(Format::Json) => {
            let stat = Statistic::value_variants()
                .iter()
                .position(|v| std::mem::discriminant(v) == std::mem::discriminant(&a.statistic))
                .and_then(|i| Statistic::value_variants()[i].to_possible_value())
                .map(|v| v.get_name().to_string())
                .unwrap_or_default();
            let obj = serde_json::json!({ "schema": claims::SCHEMA, "statistic": stat, "value": value });
            format!("{obj}\n")
        }
        _ => format!("{value}\n"),
    };
    emit(None, &text)?;
    Ok(0)
}

fn compute_rational(a: &ComputeArgs, stat: Statistic, s: &RSet, budgets: &Budgets) -> CliResult<String> {
    let cap = budgets.set_cap;
    let limit = |what: &str, n: usize, max: usize| -> CliResult<()> {
        if n > max {
            Err(Error::Budget { what: format!("{what} input size"), needed: n as u128, limit: max as u128 }.into())
        } else {
            Ok(())
        }
    };
    Ok(match stat {
        Statistic::SumsetSize => match a.op {
            Some(op) => setop_capped(op_kind(op), s, &second(&a.set_b, s)?, cap)?.len().to_string(),
            None => iterated_sumset_capped(s, a.k, cap)?.len().to_string(),
        },
        Statistic::Setop => {
            let op = a.op.ok_or_else(|| Failure::usage("setop needs --op"))?;
            setop_capped(op_kind(op), s, &second(&a.set_b, s)?, cap)?.to_text()
        }
        Statistic::Energy => {
            limit("energy", s.len(), budgets.energy)?;
            match &a.set_b {
                Some(_) => mixed_energy(s, &second(&a.set_b, s)?, group(a.group))?.value.to_string(),
                None => energy(s, a.k, group(a.group))?.value.to_string(),
            }
        }
        Statistic::Gowers => {
            limit("Gowers norm", s.len(), budgets.gowers)?;
            gowers_norm_capped(s, a.k, 8)?.value.to_string()
        }
        Statistic::Triples => {
            let algo: TripleAlgorithm = a.algorithm.parse()?;
            let (b, c) = (second(&a.set_b, s)?, second(&a.set_c, s)?);
            collinear_triples_with(s, &b, &c, algo, budgets.triples)?.to_string()
        }
        Statistic::CrossRatio => {
            let (b, c) = (second(&a.set_b, s)?, second(&a.set_c, s)?);
            cross_ratio_count(s, &b, &c)?.to_string()
        }
        Statistic::Fiber => {
            let l = a.lambda.as_deref().ok_or_else(|| Failure::usage("fiber needs --lambda"))?;
            let l = l.parse().map_err(|e| Error::Parse(format!("{e}")))?;
            fiber(s, &l)?.to_text()
        }
        Statistic::MHat => {
            let m = m_hat(s, &default_candidates(s)?)?;
            format!("{} {}", m.value, m.argmin)
        }
        Statistic::Incidences => {
            let cfg = quotient_configuration(s)?;
            format!(
                "incidences={} points={} lines={} q_total={}",
                cfg.incidences(),
                cfg.point_count(),
                cfg.lines.len(),
                cfg.q_total
            )
        }
        Statistic::FpEnergy | Statistic::ShiftIntersection | Statistic::Subgroup => unreachable!("handled by caller"),
    })
}

// ---------------------------------------------------------------------------
// verify / scan
// ---------------------------------------------------------------------------

struct Plan {
    jobs: Vec<Job>,
    opts: EvalOptions,
    format: Format,
    /// Distinct sizes per (claim, family) series.
    series_sizes: Vec<usize>,
}

fn parse_format(s: &str) -> CliResult<Format> {
    Format::from_str(s, true).map_err(|_| Failure::usage(format!("unknown format {s:?} (json, csv, md)")))
}

fn plan(a: &SuiteArgs) -> CliResult<Plan> {
    let cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = a.seed.or(cfg.seed);
    let format = match (a.format, &cfg.format) {
        (Some(f), _) => f,
        (None, Some(s)) => parse_format(s)?,
        (None, None) => Format::Json,
    };
    if let Some(t) = cfg.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let opts = EvalOptions {
        budgets: a.budgets.apply(cfg.budgets),
        random_scalars: a.random_scalars.unwrap_or(EvalOptions::default().random_scalars),
        timings: a.timings || cfg.timings,
        ..EvalOptions::default()
    };
    // (claims, families, sizes) groups: the command line, else the config suites.
    let groups: Vec<(Vec<String>, Vec<String>, Option<String>)> = if !a.claims.is_empty() || !a.families.is_empty() {
        vec![(a.claims.clone(), a.families.clone(), a.sizes.clone())]
    } else {
        cfg.suite.iter().map(|s| (s.claims.clone(), s.families.clone(), a.sizes.clone().or(s.sizes.clone()))).collect()
    };
    if groups.is_empty() {
        return Err(Failure::usage("no claims given (pass claim ids or a --config with [[suite]] entries)"));
    }
    let mut jobs = Vec::new();
    let mut series_sizes = Vec::new();
    for (ids, fams, sizes) in groups {
        if ids.is_empty() {
            return Err(Failure::usage("no claim ids given"));
        }
        if fams.is_empty() {
            return Err(Failure::usage("at least one --family is required"));
        }
        let specs: Vec<_> = if ids.iter().any(|i| i == "all") {
            registry().iter().collect()
        } else {
            ids.iter().map(|i| lookup(i)).collect::<Result<_, _>>()?
        };
        let families = fams
            .iter()
            .map(|f| {
                let spec = FamilySpec::parse(f, seed.unwrap_or(0))?;
                if spec.is_random() && seed.is_none() {
                    return Err(Failure::usage(format!("family {f} is random: --seed is required")));
                }
                Ok(spec)
            })
            .collect::<CliResult<Vec<_>>>()?;
        let explicit: Option<SizeRange> = sizes.as_deref().map(str::parse).transpose()?;
        for claim in specs {
            let range = match &explicit {
                Some(r) => r.clone(),
                None => claim.default_sizes.parse()?,
            };
            for family in &families {
                series_sizes.push(range.len());
                for &n in range.sizes() {
                    jobs.push(Job { claim, family: family.clone(), n });
                }
            }
        }
    }
    Ok(Plan { jobs, opts, format, series_sizes })
}

fn any_exact_failure(results: &[ClaimResult]) -> bool {
    results.iter().any(|r| r.verdict == Verdict::Fails && r.exactness != Exactness::ConstantBounded)
}

fn render_results(results: &[ClaimResult], format: Format) -> String {
    match format {
        Format::Json => results_json_lines(results),
        Format::Csv => results_csv(results),
        Format::Md => results_markdown(results),
    }
}

fn render_trends(trends: &[TrendReport], format: Format) -> String {
    match format {
        Format::Json => trends_json_lines(trends),
        Format::Csv => trends_csv(trends),
        Format::Md => trends_markdown(trends),
    }
}

fn evaluate(plan: &Plan) -> Vec<ClaimResult> {
    eprintln!("evaluating {} jobs on {} threads", plan.jobs.len(), rayon::current_num_threads());
    let results = run_suite(&plan.jobs, &plan.opts);
    eprint!("{}", summary(&results));
    results
}

fn verify(a: &SuiteArgs) -> CliResult<u8> {
    let plan = plan(a)?;
    let results = evaluate(&plan);
    emit(a.out.as_deref(), &render_results(&results, plan.format))?;
    Ok(if any_exact_failure(&results) { 1 } else { 0 })
}

fn scan(a: &ScanArgs) -> CliResult<u8> {
    let plan = plan(&a.suite)?;
    if let Some(&k) = plan.series_sizes.iter().min() {
        if k < 3 {
            return Err(Failure::usage(format!("need ≥ 3 sizes for a trend, got {k}")));
        }
    }
    let results = evaluate(&plan);
    let trends = trends_by_series(&results)?;
    if let Some(p) = &a.results {
        emit(Some(p), &results_json_lines(&results))?;
    }
    if let Some(p) = &a.plot {
        emit(Some(p), &plot_csv(&results))?;
    }
    emit(a.suite.out.as_deref(), &render_trends(&trends, plan.format))?;
    Ok(if any_exact_failure(&results) { 1 } else { 0 })
}

// ---------------------------------------------------------------------------
// report / claims
// ---------------------------------------------------------------------------

fn report(a: &ReportArgs) -> CliResult<u8> {
    if a.inputs.is_empty() {
        return Err(Failure::usage("no input files"));
    }
    let mut results = Vec::new();
    for p in &a.inputs {
        let text = fs::read_to_string(p).map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display())))?;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let r: ClaimResult = serde_json::from_str(line)
                .map_err(|e| Failure::usage(format!("{}:{}: not a result row: {e}", p.display(), i + 1)))?;
            results.push(r);
        }
    }
    let text = if a.trends {
        render_trends(&trends_by_series(&results)?, a.format)
    } else {
        render_results(&results, a.format)
    };
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn list_claims() -> CliResult<u8> {
    let mut out = String::new();
    for c in registry() {
        let ex =
            serde_json::to_value(c.exactness).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        out.push_str(&format!("{:<24} {:<17} {:<8} {}\n", c.id, ex, c.default_sizes, c.statement));
    }
    emit(None, &out)?;
    Ok(0)
}
