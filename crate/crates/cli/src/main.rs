//! `matformula` command-line front end.

mod bench;
mod session;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use matformula::apps::ipm::{simulate, IpmConfig};
use matformula::apps::lp::LinearProgram;
use matformula::apps::online_ls::{parse_stream, OnlineLinearSystem};
use matformula::apps::parse_matrix;
use matformula::apps::qr::{finish, gram_schmidt};
use matformula::apps::simplex::{simplex_solve, SimplexOutcome};
use matformula::compiler::Sign;
use matformula::field::{modulus, set_modulus, Rational};
use matformula::{compile, Assignment, DenseMatrix, DynamicFormula, Field, Formula, ResetPolicy, Zp};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "matformula", version, about = "Dynamic matrix formulas and their applications")]
struct Cli {
    /// Scalar field: zp, zp:<prime>, rational or float64.
    #[arg(long, global = true, default_value = "zp")]
    field: String,

    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value = "entries")]
    reset_mode: ResetArg,

    /// Reset once accumulated changes reach ceil(n^x).
    #[arg(long, global = true, default_value_t = 0.5)]
    reset_exponent: f64,

    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Write the report to this file instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    /// Extra diagnostics on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ResetArg {
    Entries,
    Columns,
    Never,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a formula and report the block matrix layout.
    Compile {
        formula: PathBuf,
        /// Also write the gadget tree as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Evaluate a formula on an assignment.
    Eval { formula: PathBuf, assignment: PathBuf },
    /// Replay an update/query script through a dynamic formula.
    Session {
        formula: PathBuf,
        script: PathBuf,
        /// Initial assignment; by default every input is the identity
        /// pattern (ones on the diagonal).
        #[arg(long)]
        at: Option<PathBuf>,
    },
    /// Solve an LP `max c x, A x = b, x >= 0` from a feasible basis.
    Simplex {
        lp: PathBuf,
        /// 1-based initial basis; defaults to the last d variables.
        #[arg(long, value_delimiter = ',')]
        basis: Option<Vec<usize>>,
    },
    /// Solve every leading system of a row stream.
    Onlinels { stream: PathBuf },
    /// Gram-Schmidt orthogonalization and QR.
    Qr { matrix: PathBuf },
    /// Interior point projection maintenance over Z_p.
    IpmSim {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        iters: usize,
        /// Fresh sparse h each iteration; resets count D columns.
        #[arg(long)]
        dense_h: bool,
    },
    /// Operation-count comparisons, written as CSV.
    Bench {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 32)]
        events: usize,
        /// Events replayed on the naive backend.
        #[arg(long, default_value_t = 2)]
        naive_events: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Smw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FieldChoice {
    Zp,
    Rational,
    Float64,
}

enum CliError {
    Lib(matformula::Error),
    Usage(String),
    Io(PathBuf, std::io::Error),
}

impl From<matformula::Error> for CliError {
    fn from(e: matformula::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn class(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.class(),
            CliError::Usage(_) => "UsageError",
            CliError::Io(..) => "IoError",
        }
    }

    fn detail(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Usage(m) => m.clone(),
            CliError::Io(p, e) => format!("{}: {e}", p.display()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_domain() => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

enum Output {
    Text(String),
    Json(Value),
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn parse_field(s: &str) -> CliResult<FieldChoice> {
    match s {
        "zp" => Ok(FieldChoice::Zp),
        "rational" => Ok(FieldChoice::Rational),
        "float64" => Ok(FieldChoice::Float64),
        _ => {
            let Some(p) = s.strip_prefix("zp:") else {
                return Err(CliError::Usage(format!("unknown field `{s}`")));
            };
            let p: u64 = p
                .parse()
                .map_err(|_| CliError::Usage(format!("bad modulus `{p}`")))?;
            set_modulus(p)?;
            Ok(FieldChoice::Zp)
        }
    }
}

fn policy(cli: &Cli) -> CliResult<ResetPolicy> {
    let x = cli.reset_exponent;
    if !(0.0..=1.0).contains(&x) {
        return Err(CliError::Usage(format!("reset exponent {x} outside [0, 1]")));
    }
    Ok(match cli.reset_mode {
        ResetArg::Entries => ResetPolicy::entries(x),
        ResetArg::Columns => ResetPolicy::columns(x),
        ResetArg::Never => ResetPolicy::never(),
    })
}

fn strings<F: Field>(v: &[F]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn matrix_json<F: Field>(m: &DenseMatrix<F>) -> Value {
    json!((0..m.rows()).map(|i| strings(m.row(i))).collect::<Vec<_>>())
}

fn matrix_text<F: Field>(m: &DenseMatrix<F>) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let _ = writeln!(s, "{}", strings(m.row(i)).join(" "));
    }
    s
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn field_name(f: FieldChoice) -> String {
    match f {
        FieldChoice::Zp => format!("zp:{}", modulus()),
        FieldChoice::Rational => "rational".into(),
        FieldChoice::Float64 => "float64".into(),
    }
}

fn report(command: &str, field: FieldChoice, body: Value) -> Value {
    let mut v = json!({ "schema": 1, "command": command, "field": field_name(field) });
    if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
        m.extend(b);
    }
    v
}

// ------------------------------------------------------------- commands

fn cmd_compile<F: Field>(cli: &Cli, field: FieldChoice, path: &Path, dot: Option<&Path>) -> CliResult<Output> {
    let f = Formula::<F>::parse(&read(path)?)?;
    let c = compile(&f);
    if let Some(dot) = dot {
        write(dot, &c.to_dot(&f))?;
    }
    if !cli.json {
        return Ok(Output::Text(c.report(&f)));
    }
    let placements: Vec<Value> = c
        .all_placements()
        .map(|p| {
            json!({
                "input": f.inputs()[p.input].name,
                "row": p.row + 1,
                "col": p.col + 1,
                "rows": p.rows,
                "cols": p.cols,
                "sign": if p.sign == Sign::Plus { "+" } else { "-" },
            })
        })
        .collect();
    Ok(Output::Json(report(
        "compile",
        field,
        json!({
            "size": c.size(),
            "formula_size": f.size(),
            "I": one_based(c.output_rows()),
            "J": one_based(c.output_cols()),
            "constants": c.constants().len(),
            "construction_writes": c.construction_writes(),
            "placements": placements,
        }),
    )))
}

fn cmd_eval<F: Field>(cli: &Cli, field: FieldChoice, formula: &Path, assignment: &Path) -> CliResult<Output> {
    let f = Formula::<F>::parse(&read(formula)?)?;
    let a = Assignment::parse(&f, &read(assignment)?)?;
    let v = f.evaluate(&a)?;
    if cli.json {
        return Ok(Output::Json(report("eval", field, json!({ "value": matrix_json(&v) }))));
    }
    Ok(Output::Text(matrix_text(&v)))
}

fn default_assignment<F: Field>(f: &Formula<F>) -> Assignment<F> {
    let values = f
        .inputs()
        .iter()
        .map(|d| DenseMatrix::from_fn(d.rows, d.cols, |i, j| if i == j { F::one() } else { F::zero() }))
        .collect();
    Assignment::new(f, values).expect("dimensions from the declarations")
}

fn cmd_session<F: Field>(
    cli: &Cli,
    field: FieldChoice,
    formula: &Path,
    script: &Path,
    at: Option<&Path>,
) -> CliResult<(Output, Option<CliError>)> {
    let f = Formula::<F>::parse(&read(formula)?)?;
    let a = match at {
        Some(p) => Assignment::parse(&f, &read(p)?)?,
        None => default_assignment(&f),
    };
    let lines = session::parse(&f, &read(script)?)?;
    let mut df = DynamicFormula::open(&f, &a, policy(cli)?)?;
    let (answers, res) = session::replay(&mut df, &lines);
    if cli.verbose > 0 {
        eprintln!("N is {0}x{0}; resets after iterations {1:?}", df.compiled().size(), df.reset_iterations());
    }
    let err = res.err().map(CliError::from);
    let out = if cli.json {
        let list: Vec<Value> = answers
            .iter()
            .map(|a| json!({ "line": a.line, "query": a.query, "values": strings(&a.values) }))
            .collect();
        Output::Json(report(
            "session",
            field,
            json!({
                "answers": list,
                "iterations": df.iteration(),
                "resets": df.reset_iterations(),
                "completed": err.is_none(),
            }),
        ))
    } else {
        let mut s = String::new();
        for a in &answers {
            let _ = writeln!(s, "{}", strings(&a.values).join(" "));
        }
        Output::Text(s)
    };
    Ok((out, err))
}

/// Always exact over the rationals, whatever `--field` says.
fn cmd_simplex(cli: &Cli, path: &Path, basis: Option<&[usize]>) -> CliResult<Output> {
    let lp = LinearProgram::parse(&read(path)?)?;
    let (d, n) = (lp.constraints(), lp.variables());
    let basis: Vec<usize> = match basis {
        Some(b) => {
            if b.iter().any(|&j| j == 0 || j > n) {
                return Err(CliError::Usage(format!("basis indices must lie in 1..={n}")));
            }
            b.iter().map(|j| j - 1).collect()
        }
        None => (n - d..n).collect(),
    };
    let out = simplex_solve(&lp, &basis, policy(cli)?)?;
    let pivots = |p: &[(usize, usize)]| p.iter().map(|&(e, l)| [e + 1, l + 1]).collect::<Vec<_>>();
    if cli.json {
        let body = match &out {
            SimplexOutcome::Optimal { x, objective, basis, pivots: p } => json!({
                "status": "optimal",
                "objective": objective.to_string(),
                "x": strings(x),
                "basis": one_based(basis),
                "pivots": pivots(p),
            }),
            SimplexOutcome::Unbounded { direction, pivots: p } => json!({
                "status": "unbounded",
                "direction": strings(direction),
                "pivots": pivots(p),
            }),
        };
        return Ok(Output::Json(report("simplex", FieldChoice::Rational, body)));
    }
    let mut s = String::new();
    match &out {
        SimplexOutcome::Optimal { x, objective, basis, pivots: p } => {
            let _ = writeln!(s, "optimal {objective}");
            let _ = writeln!(s, "x {}", strings(x).join(" "));
            let _ = writeln!(s, "basis {:?}", one_based(basis));
            let _ = writeln!(s, "pivots {:?}", pivots(p));
        }
        SimplexOutcome::Unbounded { direction, pivots: p } => {
            let _ = writeln!(s, "unbounded");
            let _ = writeln!(s, "direction {}", strings(direction).join(" "));
            let _ = writeln!(s, "pivots {:?}", pivots(p));
        }
    }
    Ok(Output::Text(s))
}

fn cmd_onlinels<F: Field>(cli: &Cli, field: FieldChoice, path: &Path) -> CliResult<(Output, Option<CliError>)> {
    let (n, rows) = parse_stream::<F>(&read(path)?)?;
    let mut st = OnlineLinearSystem::<F>::new(n, policy(cli)?)?;
    let mut steps = Vec::new();
    let mut err = None;
    for (row, b) in rows {
        match st.push(row, b) {
            Ok(x) => steps.push(x),
            Err(e) => {
                err = Some(CliError::from(e));
                break;
            }
        }
    }
    let out = if cli.json {
        let list: Vec<Value> = steps
            .iter()
            .enumerate()
            .map(|(s, x)| json!({ "s": s + 1, "x": strings(x) }))
            .collect();
        Output::Json(report("onlinels", field, json!({ "n": n, "steps": list })))
    } else {
        let mut s = String::new();
        for (i, x) in steps.iter().enumerate() {
            let _ = writeln!(s, "{}: {}", i + 1, strings(x).join(" "));
        }
        Output::Text(s)
    };
    Ok((out, err))
}

fn cmd_qr<F: Field>(cli: &Cli, field: FieldChoice, path: &Path) -> CliResult<Output> {
    let v = parse_matrix::<F>(&read(path)?)?;
    let gs = gram_schmidt(&v, policy(cli)?)?;
    // the float finish needs exact rational input
    let float = if field == FieldChoice::Rational {
        let vq = parse_matrix::<Rational>(&read(path)?)?;
        let gq = gram_schmidt(&vq, policy(cli)?)?;
        Some(finish(&gq, &vq))
    } else {
        None
    };
    if cli.json {
        let mut body = json!({
            "independent": one_based(&gs.independent),
            "rank_profile": gs.rank_profile(),
            "orthogonal": matrix_json(&gs.orthogonal),
            "r": matrix_json(&gs.r),
        });
        if let (Some(fq), Value::Object(m)) = (&float, &mut body) {
            m.insert("q_float".into(), matrix_json(&fq.q));
            m.insert("r_float".into(), matrix_json(&fq.r));
        }
        return Ok(Output::Json(report("qr", field, body)));
    }
    let mut s = String::new();
    let _ = writeln!(s, "independent {:?}", one_based(&gs.independent));
    let _ = writeln!(s, "orthogonal columns\n{}", matrix_text(&gs.orthogonal).trim_end());
    let _ = writeln!(s, "R\n{}", matrix_text(&gs.r).trim_end());
    if let Some(fq) = float {
        let _ = writeln!(s, "Q (float)\n{}", matrix_text(&fq.q).trim_end());
        let _ = writeln!(s, "R (float)\n{}", matrix_text(&fq.r).trim_end());
    }
    Ok(Output::Text(s))
}

fn cmd_ipm(cli: &Cli, field: FieldChoice, n: usize, iters: usize, dense_h: bool) -> CliResult<Output> {
    if field != FieldChoice::Zp {
        return Err(CliError::Usage("ipm-sim runs over Z_p".into()));
    }
    let cfg = IpmConfig {
        n,
        iterations: iters,
        seed: cli.seed,
        policy: policy(cli)?,
        dense_h,
    };
    let rep = simulate(&cfg)?;
    if cli.json {
        let body = serde_json::to_value(&rep).expect("report serializes");
        return Ok(Output::Json(report("ipm-sim", field, body)));
    }
    let mut s = String::new();
    let _ = writeln!(s, "n {} d {} seed {} threshold {:?}", rep.n, rep.d, rep.seed, rep.threshold);
    let _ = writeln!(s, "iter changed |U| reset update_muls query_muls reset_muls mismatch");
    for it in &rep.iterations {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {}",
            it.iteration,
            it.changed,
            it.accumulated,
            it.reset as u8,
            it.update.muls,
            it.query.muls,
            it.reset_ops.muls,
            it.mismatch as u8
        );
    }
    let _ = writeln!(s, "mismatches {} total_muls {}", rep.mismatches, rep.total.muls);
    Ok(Output::Text(s))
}

fn cmd_bench(cli: &Cli, field: FieldChoice, sizes: &[usize], events: usize, naive_events: usize) -> CliResult<Output> {
    if field != FieldChoice::Zp {
        return Err(CliError::Usage("bench runs over Z_p".into()));
    }
    let rows = bench::smw(sizes, events, naive_events, policy(cli)?, cli.seed)?;
    Ok(Output::Text(bench::csv(&rows)))
}

// ----------------------------------------------------------------- main

macro_rules! with_field {
    ($field:expr, $f:ident => $body:expr) => {
        match $field {
            FieldChoice::Zp => {
                type $f = Zp;
                $body
            }
            FieldChoice::Rational => {
                type $f = Rational;
                $body
            }
            FieldChoice::Float64 => {
                type $f = f64;
                $body
            }
        }
    };
}

fn run(cli: &Cli) -> CliResult<(Output, Option<CliError>)> {
    let field = parse_field(&cli.field)?;
    let done = |o: CliResult<Output>| o.map(|o| (o, None));
    match &cli.command {
        Command::Compile { formula, dot } => {
            with_field!(field, F => done(cmd_compile::<F>(cli, field, formula, dot.as_deref())))
        }
        Command::Eval { formula, assignment } => {
            with_field!(field, F => done(cmd_eval::<F>(cli, field, formula, assignment)))
        }
        Command::Session { formula, script, at } => {
            with_field!(field, F => cmd_session::<F>(cli, field, formula, script, at.as_deref()))
        }
        Command::Simplex { lp, basis } => done(cmd_simplex(cli, lp, basis.as_deref())),
        Command::Onlinels { stream } => with_field!(field, F => cmd_onlinels::<F>(cli, field, stream)),
        Command::Qr { matrix } => with_field!(field, F => done(cmd_qr::<F>(cli, field, matrix))),
        Command::IpmSim { n, iters, dense_h } => done(cmd_ipm(cli, field, *n, *iters, *dense_h)),
        Command::Bench {
            suite: Suite::Smw,
            sizes,
            events,
            naive_events,
        } => done(cmd_bench(cli, field, sizes, *events, *naive_events)),
    }
}

fn emit(cli: &Cli, out: Output) -> CliResult<()> {
    let text = match out {
        Output::Text(s) => s,
        Output::Json(v) => serde_json::to_string_pretty(&v).expect("json") + "\n",
    };
    match &cli.out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("ERROR {}: {}", e.class(), e.detail());
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            eprint!("{msg}");
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return fail(&CliError::Usage(first));
        }
    };
    match run(&cli) {
        Ok((out, err)) => {
            if let Err(e) = emit(&cli, out) {
                return fail(&e);
            }
            match err {
                Some(e) => fail(&e),
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => fail(&e),
    }
}
