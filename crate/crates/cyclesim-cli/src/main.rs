//! Command-line front end: build, verify, solve, trace, reverse.
//!
//! JSON is the machine format; text output is a rendering of the same
//! data. Exit codes: 0 success, 1 usage/validation, 2 capacity,
//! 3 internal cross-check failure.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cyclesim::{
    apply_um, apply_um_dagger, build_to_level, decode_cycle, enumerate_cycles, expand_level,
    min_tour, reverse_level, sample_repetitions, trace_level, AncillaMask, AncillaMode,
    BasisLabel, BuildOptions, Error, PathMask, SparseState, TourSource, Variant, WeightMatrix,
    DEFAULT_TERM_BUDGET,
};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CAPACITY: u8 = 2;
const EXIT_CROSS_CHECK: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cyclesim",
    version,
    about = "Exact simulator of the level-by-level Hamiltonian-cycle superposition, with TSP post-processing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Projector,
    Aux,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Projector => Variant::Projector,
            VariantArg::Aux => Variant::Aux,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AncillaArg {
    Reuse,
    Retain,
}

impl From<AncillaArg> for AncillaMode {
    fn from(v: AncillaArg) -> Self {
        match v {
            AncillaArg::Reuse => AncillaMode::Reuse,
            AncillaArg::Retain => AncillaMode::Retain,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build the uniform superposition of all (n-1)!/2 cycles; write the
    /// state and the probability ledger as JSON files.
    Build {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "projector")]
        variant: VariantArg,
        #[arg(long, value_enum, default_value = "reuse")]
        ancilla: AncillaArg,
        /// Live-term budget for the build.
        #[arg(long, default_value_t = DEFAULT_TERM_BUDGET)]
        budget: u64,
        /// Output path prefix; writes `<out>.state.json` and `<out>.ledger.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the oracle-equivalence, unitarity, uniformity, probability, and
    /// aux-equivalence suites; exit 0 only if everything passes.
    Verify {
        /// Vertex count, 3..=8 (exhaustive checks).
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Find the minimum-weight tour of a symmetric instance, cross-checking
    /// the state-sourced result against exhaustive search.
    Solve {
        /// Weight matrix file: CSV (n rows of n integers) or JSON.
        #[arg(long)]
        weights: PathBuf,
        /// Optional declared vertex count; must match the file.
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_TERM_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Gate trace of the expansion at one level: per-sub-op fired counts
    /// and the exact split of squared norm into good and residual parts.
    Trace {
        #[arg(long)]
        n: u32,
        /// Input level of the traced step (3 <= level < n).
        #[arg(long)]
        level: u32,
        /// Monte-Carlo repetition sampling: trials per level.
        #[arg(long)]
        sample: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TERM_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Uncompute one level: entangle the parents with their ancilla unit
    /// states and verify the walk reverses exactly.
    Reverse {
        #[arg(long)]
        n: u32,
        /// Level to reverse into (3 <= level < n); defaults to n-1.
        #[arg(long)]
        level: Option<u32>,
        /// Optional path for the reversed state JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TERM_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapacityExceeded { .. } | Error::EnumerationTooLarge(_) => EXIT_CAPACITY,
            _ => EXIT_VALIDATION,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not failures.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(EXIT_VALIDATION);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Build { n, variant, ancilla, budget, out, format } => {
            cmd_build(n, variant.into(), ancilla.into(), budget, out, format)
        }
        Command::Verify { n, format } => cmd_verify(n, format),
        Command::Solve { weights, n, budget, format } => cmd_solve(&weights, n, budget, format),
        Command::Trace { n, level, sample, seed, budget, format } => {
            cmd_trace(n, level, sample, seed, budget, format)
        }
        Command::Reverse { n, level, out, budget, format } => {
            cmd_reverse(n, level, out, budget, format)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), Failure> {
    fs::write(path, format!("{contents}\n"))
        .map_err(|e| fail(EXIT_VALIDATION, format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct BuildSummary {
    n: u32,
    terms: u64,
    levels_ok: bool,
    sub_op_applications: u64,
    peak_ancilla_width: u32,
    ancilla_bits_consumed: u64,
    state_path: String,
    ledger_path: String,
}

fn cmd_build(
    n: u32,
    variant: Variant,
    ancilla: AncillaMode,
    budget: u64,
    out: Option<PathBuf>,
    format: Format,
) -> Result<(), Failure> {
    let options = BuildOptions { variant, ancilla_mode: ancilla, term_budget: budget };
    let outcome = build_to_level(n, n, &options)?;

    let prefix = out.unwrap_or_else(|| PathBuf::from(format!("cyclesim_n{n}")));
    let state_path = prefix.with_extension("state.json");
    let ledger_path = prefix.with_extension("ledger.json");
    write_file(&state_path, &outcome.state.to_json_string()?)?;
    write_file(&ledger_path, &outcome.ledger.to_json_string()?)?;

    let summary = BuildSummary {
        n,
        terms: outcome.state.term_count(),
        levels_ok: outcome.ledger.law_holds(),
        sub_op_applications: outcome.sub_op_applications,
        peak_ancilla_width: outcome.space.peak_ancilla_width,
        ancilla_bits_consumed: outcome.space.ancilla_bits_consumed,
        state_path: state_path.display().to_string(),
        ledger_path: ledger_path.display().to_string(),
    };
    match format {
        Format::Text => println!(
            "n={} terms={} levels_ok={}",
            summary.n, summary.terms, summary.levels_ok
        ),
        Format::Json => println!("{}", serde_json::to_string_pretty(&summary).unwrap()),
    }
    Ok(())
}

#[derive(Serialize)]
struct Check {
    check: String,
    pass: bool,
    detail: String,
}

fn run_verify_checks(n: u32) -> Result<Vec<Check>, Failure> {
    let mut checks = Vec::new();

    // Bit-exact worked example at m = 3.
    {
        let input = SparseState::initial(4)?.attach_ancilla_uniform(3)?;
        let output = apply_um(&input, 3)?;
        let kets: Vec<String> = output
            .terms()
            .map(|(l, _)| format!("{}|{}", l.ancilla.to_bit_string(3), l.path.to_bit_string(6)))
            .collect();
        let pass = kets == ["000|011110", "000|101101", "000|110011"];
        checks.push(Check {
            check: "worked_example_bit_exact".into(),
            pass,
            detail: format!("kets={kets:?}"),
        });
    }

    // Level-by-level build with uniformity and the probability law.
    let mut state = SparseState::initial(n)?;
    let mut uniform_ok = true;
    let mut law_ok = true;
    let mut law_detail = Vec::new();
    for m in 3..n {
        let (next, p) = expand_level(&state, m, Variant::Projector)?;
        let coeffs: Vec<i64> = next.terms().map(|(_, c)| c).collect();
        uniform_ok &= coeffs.iter().all(|&c| c == coeffs[0] && c > 0);
        law_ok &= p.as_ratio().numer() * u128::from(m - 1) == p.as_ratio().denom() * 2;
        law_detail.push(format!("m={m}:{p}"));
        state = next;
    }
    checks.push(Check {
        check: "uniformity".into(),
        pass: uniform_ok,
        detail: format!("levels 3..{n} uniform positive"),
    });
    checks.push(Check {
        check: "probability_law".into(),
        pass: law_ok,
        detail: law_detail.join(" "),
    });

    // Oracle equivalence on the full build.
    {
        let expected: u64 = (1..n as u64).product::<u64>() / 2;
        let built: BTreeSet<PathMask> = state.terms().map(|(l, _)| l.path).collect();
        let oracle: BTreeSet<PathMask> = enumerate_cycles(n)?.into_iter().collect();
        let set_equal = built == oracle;
        checks.push(Check {
            check: "oracle_equivalence".into(),
            pass: set_equal && state.term_count() == expected,
            detail: format!(
                "terms={} expected={expected} set_equal={set_equal}",
                state.term_count()
            ),
        });
    }

    // Exhaustive unitarity on the truncated register, m = 3 (and 4 if it fits).
    for m in 3..=4u32 {
        if m + 1 > n {
            continue;
        }
        let reg_n = m + 1;
        let width = m * (m - 1) / 2;
        let e = reg_n * (reg_n - 1) / 2;
        let total: u64 = 1 << (width + e);
        let mut images = BTreeSet::new();
        for raw in 0..total {
            let path = PathMask::from_positions((1..=e).filter(|&p| raw >> (p - 1) & 1 == 1))?;
            let mut anc = AncillaMask::ZERO;
            for l in 1..=width {
                if raw >> (e + l - 1) & 1 == 1 {
                    anc.toggle(l);
                }
            }
            let s =
                SparseState::from_terms(reg_n, m, width, [(BasisLabel::new(path, anc), 1i64)])?;
            let image = apply_um(&s, m)?;
            images.insert(*image.terms().next().unwrap().0);
        }
        checks.push(Check {
            check: format!("unitarity_exhaustive_m{m}"),
            pass: images.len() as u64 == total,
            detail: format!("labels={total} distinct_images={}", images.len()),
        });
    }

    // Reversibility on the built levels.
    {
        let mut pass = true;
        let mut count = 0u32;
        let mut s = SparseState::initial(n)?;
        for m in 3..n {
            let attached = s.attach_ancilla_uniform(m)?;
            let round = apply_um_dagger(&apply_um(&attached, m)?, m)?;
            pass &= round == attached;
            count += 1;
            s = expand_level(&s, m, Variant::Projector)?.0;
        }
        checks.push(Check {
            check: "reversibility".into(),
            pass,
            detail: format!("levels_checked={count}"),
        });
    }

    // Aux-variant equivalence per level.
    {
        let mut pass = true;
        let mut s = SparseState::initial(n)?;
        for m in 3..n {
            let (a, pa) = expand_level(&s, m, Variant::Projector)?;
            let (b, pb) = expand_level(&s, m, Variant::Aux)?;
            pass &= a == b && pa == pb;
            s = a;
        }
        checks.push(Check {
            check: "aux_equivalence".into(),
            pass,
            detail: format!("levels 3..{n}"),
        });
    }

    Ok(checks)
}

fn cmd_verify(n: u32, format: Format) -> Result<(), Failure> {
    if !(3..=8).contains(&n) {
        return Err(fail(EXIT_VALIDATION, format!("verify needs 3 <= n <= 8, got {n}")));
    }
    let checks = run_verify_checks(n)?;
    let all_pass = checks.iter().all(|c| c.pass);
    match format {
        Format::Text => {
            for c in &checks {
                println!("{} {} — {}", if c.pass { "PASS" } else { "FAIL" }, c.check, c.detail);
            }
            println!(
                "verify n={n}: {}",
                if all_pass { "all checks passed" } else { "FAILURES" }
            );
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&checks).unwrap()),
    }
    if all_pass {
        Ok(())
    } else {
        Err(fail(EXIT_VALIDATION, "verification failed"))
    }
}

#[derive(Serialize)]
struct SolveReport {
    n: u32,
    tour: Vec<u32>,
    weight: i64,
    mask: String,
    mask_hex: String,
    cross_check: String,
}

fn cmd_solve(
    weights: &PathBuf,
    declared_n: Option<u32>,
    budget: u64,
    format: Format,
) -> Result<(), Failure> {
    let text = fs::read_to_string(weights)
        .map_err(|e| fail(EXIT_VALIDATION, format!("cannot read {}: {e}", weights.display())))?;
    let matrix = if text.trim_start().starts_with('{') {
        WeightMatrix::from_json_str(&text)?
    } else {
        WeightMatrix::from_csv_str(&text)?
    };
    let n = matrix.n();
    if let Some(d) = declared_n {
        if d != n {
            return Err(fail(
                EXIT_VALIDATION,
                format!("--n {d} does not match the {n}-vertex weight file"),
            ));
        }
    }

    let options = BuildOptions { term_budget: budget, ..BuildOptions::default() };
    let built = build_to_level(n, n, &options)?;
    let from_state = min_tour(&matrix, TourSource::State(&built.state))?;
    let exhaustive = min_tour(&matrix, TourSource::Exhaustive)?;
    let agree = from_state == exhaustive;

    let (mask, weight) = exhaustive;
    let tour = decode_cycle(&mask, n)?;
    let e = n * (n - 1) / 2;
    let report = SolveReport {
        n,
        tour: tour.clone(),
        weight,
        mask: mask.to_bit_string(e),
        mask_hex: mask.to_hex_string(e),
        cross_check: if agree { "ok".into() } else { "mismatch".into() },
    };
    match format {
        Format::Text => {
            let seq: Vec<String> = tour.iter().map(u32::to_string).collect();
            println!(
                "tour=({}) weight={} cross_check={}",
                seq.join(","),
                weight,
                report.cross_check
            );
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
    }
    if agree {
        Ok(())
    } else {
        Err(fail(
            EXIT_CROSS_CHECK,
            format!(
                "state-sourced minimum ({}, {}) disagrees with exhaustive ({}, {})",
                from_state.0.to_bit_string(e),
                from_state.1,
                report.mask,
                weight
            ),
        ))
    }
}

#[derive(Serialize)]
struct TraceSubOp {
    m: u32,
    l: u32,
    break_edge: (u32, u32),
    new_bits: (u32, u32),
    fired: u64,
}

#[derive(Serialize)]
struct SampleLine {
    m: u32,
    trials: u32,
    mean: f64,
    expected: String,
}

#[derive(Serialize)]
struct TraceReport {
    n: u32,
    level: u32,
    sub_ops: Vec<TraceSubOp>,
    fired_terms: u64,
    residual_terms: u64,
    good: String,
    residual: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    samples: Vec<SampleLine>,
}

fn cmd_trace(
    n: u32,
    level: u32,
    sample: Option<u32>,
    seed: u64,
    budget: u64,
    format: Format,
) -> Result<(), Failure> {
    if level < 3 || level >= n {
        return Err(fail(
            EXIT_VALIDATION,
            format!("trace needs 3 <= level < n, got level={level} n={n}"),
        ));
    }
    let options = BuildOptions { term_budget: budget, ..BuildOptions::default() };
    let trace = trace_level(n, level, &options)?;

    let mut samples = Vec::new();
    if let Some(trials) = sample {
        let mut entries: Vec<(u32, cyclesim::ExactProb)> =
            trace.ledger.entries.iter().map(|e| (e.m, e.p.clone())).collect();
        entries.push((level, trace.good.clone()));
        for (m, p) in entries {
            let counts = sample_repetitions(&p, trials, seed.wrapping_add(m as u64))?;
            samples.push(SampleLine {
                m,
                trials,
                mean: cyclesim::mean(&counts),
                expected: p.expected_repetitions()?.to_string(),
            });
        }
    }

    let report = TraceReport {
        n,
        level,
        sub_ops: trace
            .sub_ops
            .iter()
            .map(|t| TraceSubOp {
                m: t.m,
                l: t.l,
                break_edge: t.broken_edge,
                new_bits: t.new_bits,
                fired: t.fired,
            })
            .collect(),
        fired_terms: trace.fired_terms,
        residual_terms: trace.residual_terms,
        good: trace.good.to_string(),
        residual: trace.residual.to_string(),
        samples,
    };
    match format {
        Format::Text => {
            for op in &report.sub_ops {
                println!(
                    "U[{},{}]: break=({},{}) new=({},{}) fired={}",
                    op.m, op.l, op.break_edge.0, op.break_edge.1, op.new_bits.0, op.new_bits.1,
                    op.fired
                );
            }
            println!(
                "level {}: good={} residual={} fired_terms={} residual_terms={}",
                report.level, report.good, report.residual, report.fired_terms,
                report.residual_terms
            );
            for s in &report.samples {
                println!(
                    "sample m={} trials={} mean={:.4} expected={}",
                    s.m, s.trials, s.mean, s.expected
                );
            }
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
    }
    Ok(())
}

#[derive(Serialize)]
struct ReverseReport {
    n: u32,
    level: u32,
    parents: u64,
    entangled_terms: u64,
    uniform_marginal: bool,
    roundtrip: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    state_path: Option<String>,
}

fn cmd_reverse(
    n: u32,
    level: Option<u32>,
    out: Option<PathBuf>,
    budget: u64,
    format: Format,
) -> Result<(), Failure> {
    let m = level.unwrap_or_else(|| n.saturating_sub(1));
    if m < 3 || m >= n {
        return Err(fail(
            EXIT_VALIDATION,
            format!("reverse needs 3 <= level < n, got level={m} n={n}"),
        ));
    }
    let options = BuildOptions { term_budget: budget, ..BuildOptions::default() };
    let built = build_to_level(n, m + 1, &options)?;
    let reversed = reverse_level(&built.state, m)?;

    // Each parent cycle must appear once per set bit, ancilla pointing at it.
    let mut per_mask: std::collections::BTreeMap<PathMask, u64> = Default::default();
    let mut pointing_ok = true;
    for (label, _) in reversed.terms() {
        if label.ancilla.count_ones() != 1 {
            pointing_ok = false;
            break;
        }
        let l = label.ancilla.set_positions().next().unwrap();
        pointing_ok &= label.path.get(l);
        *per_mask.entry(label.path).or_default() += 1;
    }
    let uniform_marginal =
        pointing_ok && per_mask.values().all(|&k| k == m as u64) && !per_mask.is_empty();

    let forward = apply_um(&reversed, m)?;
    let expect = built.state.attach_ancilla_zero(m * (m - 1) / 2)?;
    let roundtrip = forward.term_count() == expect.term_count()
        && forward
            .terms()
            .zip(expect.terms())
            .all(|((la, ca), (lb, cb))| la == lb && ca == cb);

    let state_path = match out {
        Some(path) => {
            write_file(&path, &reversed.to_json_string()?)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let report = ReverseReport {
        n,
        level: m,
        parents: per_mask.len() as u64,
        entangled_terms: reversed.term_count(),
        uniform_marginal,
        roundtrip,
        state_path,
    };
    match format {
        Format::Text => println!(
            "reverse m={}: parents={} entangled_terms={} uniform_marginal={} roundtrip={}",
            report.level, report.parents, report.entangled_terms, report.uniform_marginal,
            report.roundtrip
        ),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
    }
    if uniform_marginal && roundtrip {
        Ok(())
    } else {
        Err(fail(EXIT_CROSS_CHECK, "reverse walk checks failed"))
    }
}
