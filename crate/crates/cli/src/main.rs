mod output;

use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use idealprob::experiment::{convergence_table, empirical_probability, TableConfig};
use idealprob::ideals::{enumerate_ideals, ideal_count};
use idealprob::product::{probability, Precision, ProbabilityQuery, ProbabilityResult};
use idealprob::splitting::{is_prime, rational_primes_up_to, split_prime, PrimeSplitting};
use idealprob::verify::{run_suite, Suite, TABLE_FIELDS};
use idealprob::{Error, NumberField, Params};

use output::{rounded_number, scalar_text, write_csv, Format, OutputRecord};

#[derive(Parser, Debug)]
#[command(name = "idealprob", version, about = "Probabilities that random ideals are k-wise relatively r-prime")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Treat polynomial-field splitting caveats as failures (exit 3).
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// P_{n,k,r} for one field with a truncation bound.
    Prob(ProbArgs),
    /// Grid of probabilities over fields and n.
    Table(TableArgs),
    /// Run a property suite.
    Verify {
        /// identities, psi, rho, mobius-count, zeta-consistency or all.
        suite: String,
    },
    /// Splitting of rational primes.
    Split(SplitArgs),
    /// Monte-Carlo estimate over ideals of norm <= x.
    Estimate(EstimateArgs),
    /// Ideals of norm <= x.
    Enumerate(EnumerateArgs),
}

#[derive(Args, Debug)]
struct Tuple {
    #[arg(short = 'n')]
    n: u32,
    #[arg(short = 'k', default_value_t = 2)]
    k: u32,
    #[arg(short = 'r', default_value_t = 1)]
    r: u32,
}

#[derive(Args, Debug)]
struct ProbArgs {
    #[arg(short = 'f', long = "field")]
    field: String,
    #[command(flatten)]
    tuple: Tuple,
    /// Guaranteed decimal digits.
    #[arg(short = 't', long = "digits", conflicts_with = "primes")]
    digits: Option<u32>,
    /// Use exactly the first N rational primes.
    #[arg(long)]
    primes: Option<u64>,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Field spec; repeat for several columns.
    #[arg(short = 'f', long = "field")]
    fields: Vec<String>,
    /// Values of n, comma separated.
    #[arg(short = 'n', value_delimiter = ',', default_values_t = [2, 3, 4])]
    n: Vec<u32>,
    #[arg(short = 'k', default_value_t = 2)]
    k: u32,
    #[arg(short = 'r', default_value_t = 1)]
    r: u32,
    #[arg(short = 't', long = "digits", default_value_t = 4)]
    digits: u32,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(short = 'f', long = "field")]
    field: String,
    #[arg(short = 'p', conflicts_with = "up_to", required_unless_present = "up_to")]
    p: Option<u64>,
    /// Every prime up to this bound.
    #[arg(long = "up-to")]
    up_to: Option<u64>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(short = 'f', long = "field")]
    field: String,
    #[command(flatten)]
    tuple: Tuple,
    /// Norm bound: `N`, `a^b` or `aeb`. Repeat with --convergence.
    #[arg(short = 'x', value_parser = parse_bound, required = true)]
    x: Vec<u64>,
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Tabulate exact ratios (or estimates beyond the cap) for each x.
    #[arg(long)]
    convergence: bool,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(short = 'f', long = "field")]
    field: String,
    #[arg(short = 'x', value_parser = parse_bound)]
    x: u64,
    #[arg(long = "count-only")]
    count_only: bool,
}

/// `N`, `a^b` or `aeb`.
fn parse_bound(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let num = |t: &str| t.parse::<u64>().map_err(|e| format!("`{t}`: {e}"));
    let exp = |t: &str| t.parse::<u32>().map_err(|e| format!("`{t}`: {e}"));
    let value = if let Some((a, b)) = s.split_once('^') {
        num(a)?.checked_pow(exp(b)?)
    } else if let Some((a, b)) = s.split_once(['e', 'E']) {
        10u64.checked_pow(exp(b)?).and_then(|p| num(a).ok()?.checked_mul(p))
    } else {
        Some(num(s)?)
    };
    value.ok_or_else(|| format!("`{s}` does not fit in 64 bits"))
}

enum Failure {
    Core(Error),
    Usage(String),
    Verify,
    Strict,
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("thread pool is configured once");
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Strict) => {
            eprintln!("error: result carries a splitting caveat (--strict)");
            ExitCode::from(3)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Precision { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut record = match &cli.command {
        Command::Prob(a) => cmd_prob(a)?,
        Command::Table(a) => cmd_table(a)?,
        Command::Verify { suite } => cmd_verify(suite)?,
        Command::Split(a) => cmd_split(a)?,
        Command::Estimate(a) => cmd_estimate(a)?,
        Command::Enumerate(a) => cmd_enumerate(a)?,
    };
    record.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    emit(&mut out, &record, cli.format)?;
    if record.caveat {
        if cli.strict {
            return Err(Failure::Strict);
        }
        eprintln!("warning: polynomial field splitting was not squarefree at some prime; values are not guaranteed");
    }
    if record.results.get("passed") == Some(&Value::Bool(false)) {
        return Err(Failure::Verify);
    }
    Ok(())
}

fn parse_field(spec: &str) -> Result<NumberField, Failure> {
    Ok(spec.parse::<NumberField>()?)
}

/// Decimals the bound guarantees for `|value - P|`.
fn guaranteed_decimals(bound: Option<f64>) -> u32 {
    match bound {
        Some(b) if b > 0.0 => (-(2.0 * b).log10()).floor().clamp(0.0, 15.0) as u32,
        _ => 0,
    }
}

fn probability_fields(rec: &mut OutputRecord, res: &ProbabilityResult) {
    let decimals = res.digits.unwrap_or_else(|| guaranteed_decimals(res.error_bound));
    rec.result("value", rounded_number(res.value, decimals + 2))
        .result("rounded", format!("{:.*}", decimals as usize, res.value))
        .result("guaranteed_decimals", decimals)
        .result("primes_used", res.primes_used)
        .result("last_prime", res.last_prime)
        .result("error_bound", res.error_bound);
    rec.caveat |= res.caveat;
}

fn cmd_prob(a: &ProbArgs) -> Result<OutputRecord, Failure> {
    let field = parse_field(&a.field)?;
    let params = Params::new(a.tuple.n, a.tuple.k, a.tuple.r)?;
    let precision = match (a.digits, a.primes) {
        (_, Some(n)) => Precision::Primes(n),
        (t, None) => Precision::Digits(t.unwrap_or(idealprob::product::DEFAULT_DIGITS)),
    };
    let res = probability(&ProbabilityQuery::new(field.clone(), params, precision))?;
    let mut rec = OutputRecord::new("prob", Some(field.label().to_string()));
    rec.param("spec", field.spec().to_string())
        .param("n", params.n)
        .param("k", params.k)
        .param("r", params.r);
    match precision {
        Precision::Digits(t) => rec.param("t", t),
        Precision::Primes(n) => rec.param("N", n),
    };
    probability_fields(&mut rec, &res);
    Ok(rec)
}

fn cmd_table(a: &TableArgs) -> Result<OutputRecord, Failure> {
    let specs: Vec<String> = if a.fields.is_empty() {
        TABLE_FIELDS.iter().map(|s| s.to_string()).collect()
    } else {
        a.fields.clone()
    };
    let fields = specs.iter().map(|s| parse_field(s)).collect::<Result<Vec<_>, _>>()?;
    let mut rec = OutputRecord::new("table", None);
    rec.param("fields", fields.iter().map(|f| f.spec().to_string()).collect::<Vec<_>>())
        .param("n", a.n.clone())
        .param("k", a.k)
        .param("r", a.r)
        .param("t", a.digits);
    let mut rows = Vec::new();
    for &n in &a.n {
        let params = Params::new(n, a.k, a.r)?;
        let mut cells = Vec::new();
        for field in &fields {
            let res = probability(&ProbabilityQuery::new(field.clone(), params, Precision::Digits(a.digits)))?;
            rec.caveat |= res.caveat;
            cells.push(json!({
                "field": field.label(),
                "value": rounded_number(res.value, a.digits + 2),
                "rounded": format!("{:.*}", a.digits as usize, res.value),
                "primes_used": res.primes_used,
                "last_prime": res.last_prime,
                "error_bound": res.error_bound,
                "caveat": res.caveat,
            }));
        }
        rows.push(json!({ "n": n, "cells": cells }));
    }
    rec.result("labels", fields.iter().map(|f| f.label().to_string()).collect::<Vec<_>>())
        .result("rows", rows);
    Ok(rec)
}

fn cmd_verify(suite: &str) -> Result<OutputRecord, Failure> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse::<Suite>()?]
    };
    let reports = suites
        .into_iter()
        .map(run_suite)
        .collect::<Result<Vec<_>, _>>()?;
    let passed = reports.iter().all(|r| r.passed());
    let mut rec = OutputRecord::new("verify", None);
    rec.param("suite", suite);
    rec.result("passed", passed)
        .result("suites", serde_json::to_value(&reports).expect("reports serialize"));
    Ok(rec)
}

fn splitting_json(s: &PrimeSplitting) -> Value {
    json!({
        "p": s.p,
        "classes": s.classes.iter().map(|c| json!({"f": c.f, "e": c.e, "g": c.g})).collect::<Vec<_>>(),
        "caveat": s.caveat,
    })
}

fn cmd_split(a: &SplitArgs) -> Result<OutputRecord, Failure> {
    let field = parse_field(&a.field)?;
    let mut rec = OutputRecord::new("split", Some(field.label().to_string()));
    rec.param("spec", field.spec().to_string());
    let primes = match (a.p, a.up_to) {
        (Some(p), _) => {
            if !is_prime(p) {
                return Err(Failure::Usage(format!("{p} is not prime")));
            }
            rec.param("p", p);
            vec![p]
        }
        (None, Some(limit)) => {
            rec.param("up_to", limit);
            rational_primes_up_to(limit)?
        }
        (None, None) => unreachable!("clap requires one of -p, --up-to"),
    };
    let splits: Vec<_> = primes.iter().map(|&p| split_prime(&field, p)).collect();
    rec.caveat = splits.iter().any(|s| s.caveat);
    rec.result("degree", field.degree())
        .result("primes", splits.iter().map(splitting_json).collect::<Vec<_>>());
    Ok(rec)
}

/// Whether any prime up to `x` has a non-squarefree reduction.
fn splitting_caveat(field: &NumberField, x: u64) -> Result<bool, Failure> {
    if field.exact_splitting() || x < 2 {
        return Ok(false);
    }
    Ok(rational_primes_up_to(x)?
        .into_iter()
        .any(|p| split_prime(field, p).caveat))
}

fn cmd_estimate(a: &EstimateArgs) -> Result<OutputRecord, Failure> {
    let field = parse_field(&a.field)?;
    let params = Params::new(a.tuple.n, a.tuple.k, a.tuple.r)?;
    if a.samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    if a.x.len() > 1 && !a.convergence {
        return Err(Failure::Usage("several -x values need --convergence".into()));
    }
    let mut rec = OutputRecord::new("estimate", Some(field.label().to_string()));
    rec.param("spec", field.spec().to_string())
        .param("n", params.n)
        .param("k", params.k)
        .param("r", params.r);
    let max_x = *a.x.iter().max().expect("at least one x");
    rec.caveat = splitting_caveat(&field, max_x)?;
    if a.convergence {
        rec.param("x", a.x.clone()).param("samples", a.samples).param("seed", a.seed);
        let config = TableConfig {
            samples: a.samples,
            seed: a.seed,
            ..TableConfig::default()
        };
        let rows = convergence_table(&field, params, &a.x, &config)?;
        rec.result("rows", serde_json::to_value(&rows).expect("rows serialize"));
        return Ok(rec);
    }
    let x = a.x[0];
    rec.param("x", x).param("samples", a.samples).param("seed", a.seed);
    let universe = enumerate_ideals(&field, x)?;
    let est = empirical_probability(&universe, params, a.samples, a.seed)?;
    let p = probability(&ProbabilityQuery::new(field, params, Precision::Digits(4)))?;
    rec.result("ideal_count", universe.len() as u64)
        .result("mean", est.mean)
        .result("standard_error", est.standard_error)
        .result("probability", rounded_number(p.value, 6))
        .result("gap", (est.mean - p.value).abs());
    Ok(rec)
}

fn cmd_enumerate(a: &EnumerateArgs) -> Result<OutputRecord, Failure> {
    let field = parse_field(&a.field)?;
    let mut rec = OutputRecord::new("enumerate", Some(field.label().to_string()));
    rec.param("spec", field.spec().to_string()).param("x", a.x);
    rec.caveat = splitting_caveat(&field, a.x)?;
    if a.count_only {
        let h = ideal_count(&field, a.x)?;
        rec.result("ideal_count", h).result("density", h as f64 / a.x as f64);
        return Ok(rec);
    }
    let universe = enumerate_ideals(&field, a.x)?;
    let h = universe.len() as u64;
    let mut dump = Vec::new();
    universe.dump(&mut dump)?;
    let lines: Vec<Value> = String::from_utf8(dump)
        .expect("dump is ASCII")
        .lines()
        .map(|l| Value::from(l.to_string()))
        .collect();
    rec.result("ideal_count", h)
        .result("density", h as f64 / a.x as f64)
        .result("ideals", lines);
    Ok(rec)
}

fn emit<W: Write>(out: &mut W, rec: &OutputRecord, format: Format) -> Outcome {
    match format {
        Format::Json => writeln!(out, "{}", rec.to_json())?,
        Format::Csv => emit_csv(out, rec)?,
        Format::Text => emit_text(out, rec)?,
    }
    Ok(())
}

fn array<'a>(rec: &'a OutputRecord, key: &str) -> &'a [Value] {
    rec.results
        .get(key)
        .and_then(Value::as_array)
        .map(Vec::as_slice)
        .unwrap_or(&[])
}

fn text(v: &Value) -> String {
    scalar_text(v)
}

fn emit_csv<W: Write>(out: &mut W, rec: &OutputRecord) -> Outcome {
    match rec.command.as_str() {
        "table" => {
            let labels = array(rec, "labels");
            let mut header = vec!["n".to_string()];
            header.extend(labels.iter().map(text));
            let rows: Vec<Vec<String>> = array(rec, "rows")
                .iter()
                .map(|row| {
                    let mut line = vec![text(&row["n"])];
                    line.extend(row["cells"].as_array().into_iter().flatten().map(|c| text(&c["rounded"])));
                    line
                })
                .collect();
            write_csv(out, &header, &rows)?;
        }
        "split" => {
            let header = ["p", "f", "e", "g", "caveat"].map(String::from);
            let mut rows = Vec::new();
            for s in array(rec, "primes") {
                for c in s["classes"].as_array().into_iter().flatten() {
                    rows.push(vec![text(&s["p"]), text(&c["f"]), text(&c["e"]), text(&c["g"]), text(&s["caveat"])]);
                }
            }
            write_csv(out, &header, &rows)?;
        }
        "verify" => {
            let header = ["suite", "check", "passed", "detail"].map(String::from);
            let mut rows = Vec::new();
            for s in array(rec, "suites") {
                for c in s["checks"].as_array().into_iter().flatten() {
                    rows.push(vec![text(&s["suite"]), text(&c["name"]), text(&c["passed"]), text(&c["detail"])]);
                }
            }
            write_csv(out, &header, &rows)?;
        }
        "estimate" if rec.results.contains_key("rows") => {
            let header = ["x", "ideal_count", "ratio", "exact", "standard_error", "probability", "gap"].map(String::from);
            let rows: Vec<Vec<String>> = array(rec, "rows")
                .iter()
                .map(|r| header.iter().map(|h| text(&r[h.as_str()])).collect())
                .collect();
            write_csv(out, &header, &rows)?;
        }
        "enumerate" if rec.results.contains_key("ideals") => {
            let header = ["norm", "factors"].map(String::from);
            let rows: Vec<Vec<String>> = array(rec, "ideals")
                .iter()
                .map(|l| {
                    let (norm, factors) = l.as_str().unwrap_or_default().split_once('\t').unwrap_or_default();
                    vec![norm.to_string(), factors.to_string()]
                })
                .collect();
            write_csv(out, &header, &rows)?;
        }
        _ => {
            let (header, row) = rec.flat_columns();
            write_csv(out, &header, &[row])?;
        }
    }
    Ok(())
}

fn emit_text<W: Write>(out: &mut W, rec: &OutputRecord) -> Outcome {
    let r = &rec.results;
    match rec.command.as_str() {
        "prob" => {
            let field = rec.field.as_deref().unwrap_or_default();
            let params: Vec<String> = rec.params.iter().skip(1).map(|(k, v)| format!("{k}={}", text(v))).collect();
            writeln!(out, "P({field}; {}) = {}", params.join(", "), text(&r["value"]))?;
            writeln!(out, "rounded:     {}", text(&r["rounded"]))?;
            writeln!(out, "primes used: {} (p_N = {})", text(&r["primes_used"]), text(&r["last_prime"]))?;
            match r["error_bound"].as_f64() {
                Some(b) => writeln!(out, "error bound: {b:.3e}")?,
                None => writeln!(out, "error bound: none (too few primes)")?,
            }
        }
        "table" => {
            let labels: Vec<String> = array(rec, "labels").iter().map(text).collect();
            let width = labels.iter().map(String::len).max().unwrap_or(0).max(8);
            write!(out, "{:>3}", "n")?;
            for l in &labels {
                write!(out, "  {l:>width$}")?;
            }
            writeln!(out)?;
            for row in array(rec, "rows") {
                write!(out, "{:>3}", text(&row["n"]))?;
                for c in row["cells"].as_array().into_iter().flatten() {
                    write!(out, "  {:>width$}", text(&c["rounded"]))?;
                }
                writeln!(out)?;
            }
        }
        "verify" => {
            for s in array(rec, "suites") {
                for c in s["checks"].as_array().into_iter().flatten() {
                    let tag = if c["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
                    writeln!(out, "{tag} {}: {} ({})", text(&s["suite"]), text(&c["name"]), text(&c["detail"]))?;
                }
            }
            let verdict = if r["passed"].as_bool() == Some(true) { "all checks passed" } else { "some checks failed" };
            writeln!(out, "{verdict}")?;
        }
        "split" => {
            for s in array(rec, "primes") {
                let classes: Vec<String> = s["classes"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|c| format!("f={} e={} g={}", c["f"], c["e"], c["g"]))
                    .collect();
                let flag = if s["caveat"].as_bool() == Some(true) { "  (caveat)" } else { "" };
                writeln!(out, "p={}: {}{flag}", s["p"], classes.join("; "))?;
            }
        }
        "estimate" if r.contains_key("rows") => {
            writeln!(out, "{:>12} {:>10} {:>10} {:>6} {:>10} {:>10}", "x", "H(x)", "ratio", "exact", "P", "gap")?;
            for row in array(rec, "rows") {
                writeln!(
                    out,
                    "{:>12} {:>10} {:>10.6} {:>6} {:>10.6} {:>10.6}",
                    text(&row["x"]),
                    text(&row["ideal_count"]),
                    row["ratio"].as_f64().unwrap_or(f64::NAN),
                    text(&row["exact"]),
                    row["probability"].as_f64().unwrap_or(f64::NAN),
                    row["gap"].as_f64().unwrap_or(f64::NAN),
                )?;
            }
        }
        "estimate" => {
            writeln!(out, "H(x):     {}", text(&r["ideal_count"]))?;
            writeln!(
                out,
                "estimate: {:.6} ± {:.6}",
                r["mean"].as_f64().unwrap_or(f64::NAN),
                r["standard_error"].as_f64().unwrap_or(f64::NAN)
            )?;
            writeln!(out, "P:        {}", text(&r["probability"]))?;
            writeln!(out, "gap:      {:.6}", r["gap"].as_f64().unwrap_or(f64::NAN))?;
        }
        "enumerate" => {
            if let Some(lines) = r.get("ideals").and_then(Value::as_array) {
                for l in lines {
                    writeln!(out, "{}", text(l))?;
                }
            }
            writeln!(out, "H(x) = {}", text(&r["ideal_count"]))?;
            writeln!(out, "H(x)/x = {:.6}", r["density"].as_f64().unwrap_or(f64::NAN))?;
        }
        _ => unreachable!("every command has a text layout"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_parse() {
        assert_eq!(parse_bound("1000"), Ok(1000));
        assert_eq!(parse_bound("10^5"), Ok(100_000));
        assert_eq!(parse_bound("1e4"), Ok(10_000));
        assert_eq!(parse_bound("3E2"), Ok(300));
        assert!(parse_bound("10^30").is_err());
        assert!(parse_bound("ten").is_err());
        assert!(parse_bound("-5").is_err());
    }

    #[test]
    fn guaranteed_digit_counts() {
        assert_eq!(guaranteed_decimals(Some(4.9995e-5)), 4);
        assert_eq!(guaranteed_decimals(Some(0.3)), 0);
        assert_eq!(guaranteed_decimals(None), 0);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
