use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use commtask_core::families::catalog::comparison_table;
use commtask_core::families::{make_a, make_d, make_g, make_identity, make_uniform, TableRow};
use commtask_core::io::{parse_named, serialize_named, to_value};
use commtask_core::majorization::{decide, equivalent, grid_point_agrees, decide_d_family, Certificate, Outcome};
use commtask_core::monotones::{iota, iota_witness, nneg_rank, report, MonotoneReport};
use commtask_core::quantum::psd_bounds;
use commtask_core::rational::{int, parse_rational};
use commtask_core::transform::reduce;
use commtask_core::{Budget, CommMatrix, Rational};

#[derive(Parser)]
#[command(name = "commtask", version, about = "Communication matrices and ultraweak majorization")]
struct Cli {
    /// Time budget per decision, in milliseconds.
    #[arg(long, global = true, env = "COMMTASK_BUDGET_MS", default_value_t = 60_000)]
    budget_ms: u64,
    /// Residual tolerance for handing numeric candidates to exact rounding.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Pretty,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Identity,
    #[value(alias = "V")]
    Uniform,
    D,
    G,
    A,
}

#[derive(Args)]
struct Inputs {
    /// Matrix files (JSON array of rows, or {"name", "matrix"}).
    files: Vec<PathBuf>,
    /// Matrix literal, e.g. '[["1/2","1/2"],["0","1"]]'. Repeatable.
    #[arg(long)]
    inline: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a family member.
    Gen {
        #[arg(value_enum, ignore_case = true)]
        family: FamilyName,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        t: Option<usize>,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All six monotones.
    Mono(Inputs),
    /// Decide C ⪯ D.
    Compare(Inputs),
    /// Decide C ≃ D.
    Equiv(Inputs),
    /// Nonnegative rank.
    Nrank(Inputs),
    /// Bracket on the psd rank.
    Psd(Inputs),
    /// ι with its witness.
    Iota(Inputs),
    /// Reduced equivalent matrix with witnesses.
    Reduce(Inputs),
    /// Monotones of the eight comparison matrices against the reference values.
    Table1,
    /// Closed-form order of D_{n,ε} on a grid.
    Dfamily {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1/12")]
        step: String,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

fn violation(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

type CliResult = Result<(), Failure>;

fn load(inputs: &Inputs, count: usize) -> Result<Vec<CommMatrix>, Failure> {
    let mut texts = Vec::new();
    for path in &inputs.files {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        texts.push((path.display().to_string(), text));
    }
    texts.extend(inputs.inline.iter().map(|s| ("--inline".to_string(), s.clone())));
    if texts.len() != count {
        return Err(usage(format!("expected {count} matrix argument(s), got {}", texts.len())));
    }
    texts
        .into_iter()
        .map(|(origin, text)| parse_named(&text).map(|m| m.matrix).map_err(|e| usage(format!("{origin}: {e}"))))
        .collect()
}

struct Ctx {
    budget: Budget,
    format: Format,
}

impl Ctx {
    fn emit(&self, value: &Value, pretty: impl FnOnce() -> String) {
        match self.format {
            Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("JSON values always serialize")),
            Format::Pretty => print!("{}", pretty()),
        }
    }
}

fn matrix_lines(c: &CommMatrix) -> String {
    let cells: Vec<Vec<String>> = c.rows().map(|r| r.iter().map(ToString::to_string).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    cells
        .iter()
        .map(|r| {
            let row: Vec<String> = r.iter().map(|x| format!("{x:>width$}")).collect();
            format!("  {}\n", row.join("  "))
        })
        .collect()
}

fn bracket(lo: usize, hi: usize) -> String {
    if lo == hi {
        lo.to_string()
    } else {
        format!("[{lo},{hi}]")
    }
}

fn report_lines(r: &MonotoneReport) -> String {
    let mut out = format!(
        "rank        {}\nnneg_rank   {} ({})\npsd_rank    [{},{}] ({})\nlambda_min  {}\niota        {}\nlambda_max  {}\n",
        r.rank,
        bracket(r.nneg_rank.lo, r.nneg_rank.hi),
        r.nneg_rank.method,
        r.psd.lower,
        r.psd.upper,
        r.psd.methods.join(", "),
        r.lambda_min,
        r.iota,
        r.lambda_max,
    );
    if r.psd.upper < r.psd.certified_upper {
        out.push_str(&format!("            certified psd upper bound {}\n", r.psd.certified_upper));
    }
    out
}

fn cmd_gen(family: FamilyName, n: usize, eps: Option<String>, t: Option<usize>, out: Option<PathBuf>) -> CliResult {
    let (name, matrix) = match family {
        FamilyName::Identity => (format!("identity_{n}"), make_identity(n)),
        FamilyName::Uniform => (format!("V_{n}"), make_uniform(n)),
        FamilyName::A => (format!("A_{n}"), make_a(n)),
        FamilyName::D => {
            let text = eps.ok_or_else(|| usage("family D needs --eps"))?;
            let e = parse_rational(&text).map_err(usage)?;
            (format!("D_{{{n},{e}}}"), make_d(n, &e))
        }
        FamilyName::G => {
            let t = t.ok_or_else(|| usage("family G needs --t"))?;
            (format!("G_{{{n},{t}}}"), make_g(n, t))
        }
    };
    let text = serialize_named(&name, &matrix.map_err(usage)?);
    match out {
        Some(path) => fs::write(&path, text + "\n").map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_mono(ctx: &Ctx, inputs: &Inputs) -> CliResult {
    let c = &load(inputs, 1)?[0];
    let r = report(c, &ctx.budget);
    ctx.emit(&r.to_json(), || report_lines(&r));
    let bad = r.invariant_violations();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(violation(bad.join("; ")))
    }
}

fn certificate_line(cert: &Certificate) -> String {
    match cert {
        Certificate::MonotoneSeparation { monotone, on_c, on_d } => {
            format!("{} separates: {on_c} on C, {on_d} on D", monotone.name())
        }
        Certificate::ExactWitness(_) => "exact witness".into(),
        Certificate::BranchBoundBound { bound, nodes, .. } => {
            format!("branch and bound: residual ≥ {bound} (≈ {:.3e}), {nodes} nodes", commtask_core::rational::to_f64(bound))
        }
        Certificate::ClosedForm { rule, separation } => match separation {
            Some((f, x, y)) => format!("closed form {rule}; {} separates: {x} vs {y}", f.name()),
            None => format!("closed form {rule}"),
        },
    }
}

fn verdict_lines(v: &commtask_core::majorization::Verdict) -> String {
    let mut out = format!("{} (stage {}, {} ms)\n", v.outcome, v.stage, v.elapsed.as_millis());
    if let Some(cert) = &v.certificate {
        out.push_str(&format!("  {}\n", certificate_line(cert)));
    }
    if let Some(w) = &v.witness {
        out.push_str(&format!("  L =\n{}  R =\n{}", matrix_lines(&w.left), matrix_lines(&w.right)));
    }
    if v.outcome == Outcome::Unknown {
        if let Some(r) = v.residual {
            out.push_str(&format!("  best residual {r:.3e}\n"));
        }
        if let Some(b) = &v.lower_bound {
            out.push_str(&format!("  certified lower bound {b}\n"));
        }
    }
    out
}

fn cmd_compare(ctx: &Ctx, inputs: &Inputs) -> CliResult {
    let m = load(inputs, 2)?;
    let v = decide(&m[0], &m[1], &ctx.budget);
    ctx.emit(&v.to_json(), || verdict_lines(&v));
    if v.verify(&m[0], &m[1]) {
        Ok(())
    } else {
        Err(violation("certificate failed re-verification"))
    }
}

fn cmd_equiv(ctx: &Ctx, inputs: &Inputs) -> CliResult {
    let m = load(inputs, 2)?;
    let e = equivalent(&m[0], &m[1], &ctx.budget);
    ctx.emit(&e.to_json(), || {
        format!(
            "{}\nC ⪯ D: {}D ⪯ C: {}",
            e.outcome,
            verdict_lines(&e.forward),
            verdict_lines(&e.backward)
        )
    });
    if e.forward.verify(&m[0], &m[1]) && e.backward.verify(&m[1], &m[0]) {
        Ok(())
    } else {
        Err(violation("certificate failed re-verification"))
    }
}

fn cmd_nrank(ctx: &Ctx, inputs: &Inputs) -> CliResult {
    let c = &load(inputs, 1)?[0];
    let r = nneg_rank(c, &ctx.budget);
    let value = json!({ "lo": r.lo, "hi": r.hi, "exact": r.exact(), "method": r.method });
    ctx.emit(&value, || format!("nneg_rank {} ({})\n", bracket(r.lo, r.hi), r.method));
    Ok(())
}

fn cmd_psd(ctx: &Ctx, inputs: &Inputs) -> CliResult {
    let c = &load(inputs, 1)?[0];
    let b = psd_bounds(c, &nneg_rank(c, &ctx.budget), &ctx.budget);
    ctx.emit(&b.to_json(), || {
        let mut s = format!("psd_rank [{},{}] ({})\n", b.lower, b.upper, b.methods.join(", "));
        if let Some(w) = &b.numeric_witness {
            s.push_str(&format!("  numeric factorization of size {}, residual {:.2e} (not certified)\n", b.upper, w.residual));
        }
        s
    });
    Ok(())
}

fn cmd_iota(ctx: &Ctx, inputs: &Inputs) -> CliResult {
    let c = &load(inputs, 1)?[0];
    let k = iota(c);
    let w = iota_witness(c);
    let ok = w.verifies(&make_identity(k).map_err(violation)?, c);
    let value = json!({ "iota": k, "witness": serde_json::to_value(&w).expect("witness serializes"), "verified": ok });
    ctx.emit(&value, || {
        format!("iota {k}\n  L =\n{}  R =\n{}", matrix_lines(&w.left), matrix_lines(&w.right))
    });
    if ok {
        Ok(())
    } else {
        Err(violation("iota witness failed verification"))
    }
}

fn cmd_reduce(ctx: &Ctx, inputs: &Inputs) -> CliResult {
    let c = &load(inputs, 1)?[0];
    let t = reduce(c).map_err(violation)?;
    let value = json!({
        "matrix": to_value(&t.matrix),
        "forward": serde_json::to_value(&t.forward).expect("witness serializes"),
        "backward": serde_json::to_value(&t.backward).expect("witness serializes"),
        "verified": t.verifies(c),
    });
    ctx.emit(&value, || format!("{}x{}\n{}", t.matrix.n_rows(), t.matrix.n_cols(), matrix_lines(&t.matrix)));
    if t.verifies(c) {
        Ok(())
    } else {
        Err(violation("reduction witnesses failed verification"))
    }
}

fn table_mismatches(r: &MonotoneReport, row: &TableRow) -> Vec<&'static str> {
    let mut bad = Vec::new();
    if r.rank != row.rank {
        bad.push("rank");
    }
    if r.nneg_rank.exact() != Some(row.nneg_rank) {
        bad.push("nneg_rank");
    }
    if !(r.psd.lower <= row.psd_rank && row.psd_rank <= r.psd.upper) {
        bad.push("psd_rank");
    }
    if r.lambda_min != row.lambda_min {
        bad.push("lambda_min");
    }
    if r.iota != row.iota {
        bad.push("iota");
    }
    if r.lambda_max != row.lambda_max {
        bad.push("lambda_max");
    }
    bad
}

/// Monotones whose values differ between two reports (psd: disjoint brackets).
fn differing(a: &MonotoneReport, b: &MonotoneReport) -> Vec<&'static str> {
    let mut out = Vec::new();
    if a.rank != b.rank {
        out.push("rank");
    }
    if a.nneg_rank.hi < b.nneg_rank.lo || b.nneg_rank.hi < a.nneg_rank.lo {
        out.push("nneg_rank");
    }
    if a.psd.upper < b.psd.lower || b.psd.upper < a.psd.lower {
        out.push("psd_rank");
    }
    if a.lambda_min != b.lambda_min {
        out.push("lambda_min");
    }
    if a.iota != b.iota {
        out.push("iota");
    }
    if a.lambda_max != b.lambda_max {
        out.push("lambda_max");
    }
    out
}

const DETECTING_PAIRS: [(&str, &str, &str); 6] = [
    ("K+", "K", "rank"),
    ("K", "K-", "nneg_rank"),
    ("D_{3,1/3}", "A", "psd_rank"),
    ("A", "B", "lambda_min"),
    ("B", "C", "iota"),
    ("C", "D", "lambda_max"),
];

fn cmd_table1(ctx: &Ctx) -> CliResult {
    let table = comparison_table();
    let reports: Vec<MonotoneReport> = table.iter().map(|(_, m, _)| report(m, &ctx.budget)).collect();
    let mut failures = Vec::new();
    let mut columns = Vec::new();
    for ((name, _, row), r) in table.iter().zip(&reports) {
        let bad = table_mismatches(r, row);
        if !bad.is_empty() {
            failures.push(format!("{name}: {}", bad.join(", ")));
        }
        let mut col = r.to_json();
        col["name"] = json!(name);
        col["expected"] = json!({
            "rank": row.rank,
            "nneg_rank": row.nneg_rank,
            "psd_rank": row.psd_rank,
            "lambda_min": row.lambda_min.to_string(),
            "iota": row.iota,
            "lambda_max": row.lambda_max.to_string(),
        });
        col["mismatches"] = json!(bad);
        columns.push(col);
    }
    let index = |n: &str| table.iter().position(|(name, _, _)| *name == n).expect("catalog name");
    let mut pairs = Vec::new();
    for (a, b, f) in DETECTING_PAIRS {
        let diff = differing(&reports[index(a)], &reports[index(b)]);
        let ok = diff == [f];
        if !ok {
            failures.push(format!("{a} vs {b}: differing monotones {diff:?}, expected only {f}"));
        }
        pairs.push(json!({ "pair": [a, b], "monotone": f, "differing": diff, "ok": ok }));
    }
    let value = json!({ "columns": columns, "pairs": pairs, "ok": failures.is_empty() });
    ctx.emit(&value, || {
        let mut s = format!("{:<12}", "");
        for (name, _, _) in &table {
            s.push_str(&format!("{name:>11}"));
        }
        s.push('\n');
        let line = |label: &str, f: &dyn Fn(&MonotoneReport, &TableRow) -> (String, bool)| {
            let mut s = format!("{label:<12}");
            for ((_, _, row), r) in table.iter().zip(&reports) {
                let (text, ok) = f(r, row);
                let cell = if ok { text } else { format!("{text}!") };
                s.push_str(&format!("{cell:>11}"));
            }
            s.push('\n');
            s
        };
        s += &line("rank", &|r, row| (r.rank.to_string(), r.rank == row.rank));
        s += &line("nneg_rank", &|r, row| {
            (bracket(r.nneg_rank.lo, r.nneg_rank.hi), r.nneg_rank.exact() == Some(row.nneg_rank))
        });
        s += &line("psd_rank", &|r, row| {
            (bracket(r.psd.lower, r.psd.upper), r.psd.lower <= row.psd_rank && row.psd_rank <= r.psd.upper)
        });
        s += &line("lambda_min", &|r, row| (r.lambda_min.to_string(), r.lambda_min == row.lambda_min));
        s += &line("iota", &|r, row| (r.iota.to_string(), r.iota == row.iota));
        s += &line("lambda_max", &|r, row| (r.lambda_max.to_string(), r.lambda_max == row.lambda_max));
        s.push('\n');
        for p in &pairs {
            s.push_str(&format!(
                "{:<10} vs {:<10} only {:<11} {}\n",
                p["pair"][0].as_str().unwrap_or_default(),
                p["pair"][1].as_str().unwrap_or_default(),
                p["monotone"].as_str().unwrap_or_default(),
                if p["ok"].as_bool() == Some(true) { "ok" } else { "MISMATCH" }
            ));
        }
        s.push_str(if failures.is_empty() { "all values match\n" } else { "mismatches found\n" });
        s
    });
    if failures.is_empty() {
        Ok(())
    } else {
        Err(violation(failures.join("; ")))
    }
}

fn cmd_dfamily(ctx: &Ctx, n: usize, step: &str) -> CliResult {
    let step = parse_rational(step).map_err(usage)?;
    if step <= int(0) || step > int(1) {
        return Err(usage("--step must lie in (0, 1]"));
    }
    if n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let mut grid: Vec<Rational> = Vec::new();
    let mut x = int(0);
    while x <= int(1) {
        grid.push(x.clone());
        x += &step;
    }
    let mut rows = Vec::new();
    let (mut agree, mut total) = (0usize, 0usize);
    let mut pretty = String::new();
    for eps in &grid {
        let mut below = Vec::new();
        let mut marks = String::new();
        for mu in &grid {
            let holds = decide_d_family(n, eps, mu).map_err(usage)?;
            let ok = grid_point_agrees(n, eps, mu).map_err(usage)?;
            total += 1;
            agree += usize::from(ok);
            if holds {
                below.push(mu.to_string());
            }
            marks.push(match (holds, ok) {
                (true, true) => '+',
                (false, true) => '.',
                _ => '!',
            });
        }
        pretty.push_str(&format!("eps {:>6}  {marks}\n", eps.to_string()));
        rows.push(json!({ "eps": eps.to_string(), "majorized_mu": below }));
    }
    let value = json!({ "n": n, "step": step.to_string(), "points": total, "agree": agree, "rows": rows });
    ctx.emit(&value, || format!("{pretty}{agree}/{total} grid points agree\n"));
    if agree == total {
        Ok(())
    } else {
        Err(violation(format!("{} grid points disagree", total - agree)))
    }
}

fn run(cli: Cli) -> CliResult {
    if cli.budget_ms == 0 {
        return Err(usage("--budget-ms must be positive"));
    }
    if !(cli.tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage(format!("--threads: {e}")))?;
    }
    let mut budget = Budget::default().with_time(Duration::from_millis(cli.budget_ms)).with_seed(cli.seed);
    budget.tol = cli.tol;
    let ctx = Ctx {
        budget,
        format: cli.format,
    };
    match &cli.command {
        Command::Gen { family, n, eps, t, out } => cmd_gen(*family, *n, eps.clone(), *t, out.clone()),
        Command::Mono(i) => cmd_mono(&ctx, i),
        Command::Compare(i) => cmd_compare(&ctx, i),
        Command::Equiv(i) => cmd_equiv(&ctx, i),
        Command::Nrank(i) => cmd_nrank(&ctx, i),
        Command::Psd(i) => cmd_psd(&ctx, i),
        Command::Iota(i) => cmd_iota(&ctx, i),
        Command::Reduce(i) => cmd_reduce(&ctx, i),
        Command::Table1 => cmd_table1(&ctx),
        Command::Dfamily { n, step } => cmd_dfamily(&ctx, *n, step),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
