//! Command-line driver.
//!
//! Every subcommand prints one report (JSON envelope, CSV summary, or a
//! human-readable digest) and exits with a stable code: 0 success or a
//! positive verdict, 1 a negative verdict or a failed check, 2 an
//! inconclusive verdict, 64 usage, 65 violated precondition, 66 resource
//! cap, 70 internal bug, 74 i/o.  A JSON config file may supply any long
//! flag by name; flags given on the command line win.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ffexpand::error::Error;
use ffexpand::expansion::ImageOptions;
use ffexpand::gf::FieldCtx;
use ffexpand::report::{
    self, CollectionSpec, Report, RunConfig,
};
use ffexpand::structure::{AnnihilatorBudget, FamilyStatus, NicenessOptions, NicenessStatus};

#[derive(Parser)]
#[command(
    name = "ffexpand",
    version,
    about = "Niceness, incidence, and expansion experiments over small finite fields",
    args_override_self = true
)]
struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// JSON object of default flag values; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Human => "human",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a polynomial is nice.
    CheckNice {
        /// Field spec: a prime like "7" or a prime power like "3^2".
        #[arg(long)]
        field: String,
        /// Polynomial text, e.g. "2*z^2+(x+y)*z+x*y".
        #[arg(long)]
        poly: String,
        /// Number of variables (inferred from the text when omitted).
        #[arg(long)]
        nvars: Option<usize>,
        /// Override for the annihilator search degree bound.
        #[arg(long)]
        bound: Option<usize>,
    },

    /// Run random point-curve incidence trials and check the deviation bound.
    Incidence {
        #[arg(long)]
        field: String,
        /// Curve degree n (curves y = a_n x^n + ... + a_0).
        #[arg(long)]
        degree: usize,
        /// Point source: full, random:<n>[:<seed>], file:<path>, or a size.
        #[arg(long, default_value = "random:20")]
        points: String,
        /// Curve source, same grammar as --points.
        #[arg(long, default_value = "random:20")]
        curves: String,
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },

    /// Measure the image size of a polynomial on chosen sets.
    Expand {
        #[arg(long)]
        field: String,
        #[arg(long)]
        poly: String,
        #[arg(long)]
        nvars: Option<usize>,
        /// Per-variable descriptors (comma separated) or one for all:
        /// full, random:<n>[:<seed>], interval:<n>[:<seed>], file:<path>.
        #[arg(long, default_value = "full")]
        sets: String,
        /// Constant C in the size threshold |X_i| >= C q^((k-1)/k).
        #[arg(long, default_value_t = 1.0)]
        threshold_c: f64,
        /// Scan the whole grid even after the image fills the field.
        #[arg(long)]
        no_early_exit: bool,
        /// Disable the parallel scan.
        #[arg(long)]
        sequential: bool,
    },

    /// Build the structured sets on which a diagonal quadratic fails to expand.
    Counterexample {
        /// Odd prime p.
        #[arg(long)]
        prime: u64,
        /// Three nonzero coefficients a,b,c of a*x^2+b*y^2+c*z^2.
        #[arg(long, default_value = "1,1,1")]
        coeffs: String,
    },

    /// Classify a ternary quadratic, or scan all of them over F_3.
    ClassifyQuadratic {
        #[arg(long)]
        field: String,
        #[arg(long)]
        poly: Option<String>,
        /// Scan every constant-free ternary quadratic and compare the
        /// classifier with the search (q = 3 only).
        #[arg(long)]
        exhaustive: bool,
    },

    /// Search for an algebraic relation among polynomials.
    Annihilator {
        #[arg(long)]
        field: String,
        /// Semicolon-separated polynomial list, e.g. "x*y; x^2*y^2".
        #[arg(long)]
        polys: String,
        #[arg(long)]
        nvars: Option<usize>,
        /// Maximum relation degree to search.
        #[arg(long)]
        bound: Option<usize>,
    },

    /// Assemble a*x^d + F(y,z)*x + G(y,z) and measure its image.
    ConcFamily {
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = 1)]
        a: i64,
        /// Exponent d of the distinguished variable.
        #[arg(long)]
        degree: u32,
        /// Coefficient polynomial F in the variables y, z.
        #[arg(long)]
        f: String,
        /// Constant polynomial G in the variables y, z.
        #[arg(long)]
        g: String,
        #[arg(long, default_value = "full")]
        sets: String,
        #[arg(long, default_value_t = 1.0)]
        threshold_c: f64,
    },
}

const SUBCOMMANDS: [&str; 8] = [
    "check-nice",
    "incidence",
    "expand",
    "counterexample",
    "classify-quadratic",
    "annihilator",
    "conc-family",
    "help",
];

const GLOBAL_KEYS: [&str; 3] = ["seed", "format", "output"];

/// Expands `--config <file>` into flag tokens: global keys right after the
/// program name, subcommand keys right after the subcommand, so that
/// explicit command-line flags always come later and win under
/// `args_override_self`.
fn inject_config(argv: Vec<String>) -> Result<Vec<String>, Error> {
    let mut path = None;
    for (i, token) in argv.iter().enumerate() {
        if let Some(v) = token.strip_prefix("--config=") {
            path = Some(v.to_string());
        } else if token == "--config" {
            if let Some(v) = argv.get(i + 1) {
                path = Some(v.clone());
            }
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let map = value
        .as_object()
        .ok_or_else(|| Error::domain("config file must hold a JSON object of flag values"))?;

    let mut globals = Vec::new();
    let mut locals = Vec::new();
    for (key, value) in map {
        let dest = if GLOBAL_KEYS.contains(&key.as_str()) { &mut globals } else { &mut locals };
        let flag = format!("--{key}");
        match value {
            serde_json::Value::Null | serde_json::Value::Bool(false) => {}
            serde_json::Value::Bool(true) => dest.push(flag),
            serde_json::Value::String(s) => {
                dest.push(flag);
                dest.push(s.clone());
            }
            serde_json::Value::Number(n) => {
                dest.push(flag);
                dest.push(n.to_string());
            }
            other => {
                return Err(Error::domain(format!(
                    "config key {key:?} has unsupported value {other}; use scalars"
                )));
            }
        }
    }

    let sub_pos = argv.iter().position(|t| SUBCOMMANDS.contains(&t.as_str()));
    let mut out = Vec::with_capacity(argv.len() + globals.len() + locals.len());
    out.push(argv[0].clone());
    out.extend(globals);
    match sub_pos {
        Some(pos) => {
            out.extend(argv[1..=pos].iter().cloned());
            out.extend(locals);
            out.extend(argv[pos + 1..].iter().cloned());
        }
        None => out.extend(argv[1..].iter().cloned()),
    }
    Ok(out)
}

fn init_threads() {
    if let Ok(text) = std::env::var("FFEXPAND_THREADS") {
        if let Ok(n) = text.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() {
    init_threads();
    let argv: Vec<String> = std::env::args().collect();
    let argv = match inject_config(argv) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("ffexpand: {e}");
            std::process::exit(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(64);
        }
    };
    let output = cli.output.clone();
    match run(cli) {
        Ok((text, code)) => {
            match output {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("ffexpand: cannot write {}: {e}", path.display());
                        std::process::exit(74);
                    }
                }
                None => print!("{text}"),
            }
            std::process::exit(code);
        }
        Err(e) => {
            eprintln!("ffexpand: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn render<T: Serialize>(
    report: &Report<T>,
    format: Format,
    csv: (String, String),
    human: String,
) -> String {
    match format {
        Format::Json => format!("{}\n", report.to_json()),
        Format::Csv => format!("{}\n{}\n", csv.0, csv.1),
        Format::Human => human,
    }
}

fn run(cli: Cli) -> Result<(String, i32), Error> {
    let started = Instant::now();
    let seed = cli.seed;
    let format = cli.format;
    let ms = |s: Instant| s.elapsed().as_millis() as u64;

    match cli.command {
        Command::CheckNice { field, poly, nvars, bound } => {
            let ctx = FieldCtx::parse_spec(&field)?;
            let mut opts = NicenessOptions::default();
            opts.bound_override = bound;
            let payload = report::run_check_nice(&ctx, &poly, nvars, &opts)?;
            let mut config = RunConfig::new("check-nice", &field, seed, format.name())
                .with("poly", &poly);
            if let Some(n) = nvars {
                config = config.with("nvars", n);
            }
            if let Some(b) = bound {
                config = config.with("bound", b);
            }
            let code = match payload.verdict.status {
                NicenessStatus::Nice => 0,
                NicenessStatus::NotNice => 1,
                NicenessStatus::Inconclusive => 2,
            };
            let status = format!("{:?}", payload.verdict.status).to_lowercase();
            let csv = (
                "command,field,poly,status".to_string(),
                format!("check-nice,{field},{},{status}", csv_quote(&payload.poly)),
            );
            let human = format!(
                "{} over F_{} is {}{}\n",
                payload.poly,
                ctx.q(),
                match payload.verdict.status {
                    NicenessStatus::Nice => "nice",
                    NicenessStatus::NotNice => "not nice",
                    NicenessStatus::Inconclusive => "inconclusive",
                },
                match payload.verdict.distinguished {
                    Some(i) => format!(" (distinguished variable {i})"),
                    None => String::new(),
                }
            );
            let report = Report::new(config, payload, ms(started));
            Ok((render(&report, format, csv, human), code))
        }

        Command::Incidence { field, degree, points, curves, trials } => {
            let ctx = FieldCtx::parse_spec(&field)?;
            let pspec = CollectionSpec::parse(&points)?;
            let cspec = CollectionSpec::parse(&curves)?;
            let payload = report::run_incidence(&ctx, degree, &pspec, &cspec, trials, seed)?;
            let config = RunConfig::new("incidence", &field, seed, format.name())
                .with("degree", degree)
                .with("points", &points)
                .with("curves", &curves)
                .with("trials", trials);
            let code = if payload.all_satisfied { 0 } else { 1 };
            let csv = (
                "command,field,degree,trials,satisfied,max_ratio".to_string(),
                format!(
                    "incidence,{field},{degree},{trials},{},{}",
                    payload.satisfied, payload.max_ratio
                ),
            );
            let human = format!(
                "{}/{} trials satisfied the deviation bound over F_{} at degree {} (max ratio {:.4})\n",
                payload.satisfied,
                payload.trials,
                ctx.q(),
                degree,
                payload.max_ratio
            );
            let report = Report::new(config, payload, ms(started));
            Ok((render(&report, format, csv, human), code))
        }

        Command::Expand { field, poly, nvars, sets, threshold_c, no_early_exit, sequential } => {
            let ctx = FieldCtx::parse_spec(&field)?;
            let opts = ImageOptions { early_exit: !no_early_exit, parallel: !sequential };
            let payload =
                report::run_expand(&ctx, &poly, nvars, &sets, seed, threshold_c, &opts)?;
            let mut config = RunConfig::new("expand", &field, seed, format.name())
                .with("poly", &poly)
                .with("sets", &sets)
                .with("threshold_c", threshold_c);
            if let Some(n) = nvars {
                config = config.with("nvars", n);
            }
            if no_early_exit {
                config = config.with("no_early_exit", true);
            }
            if sequential {
                config = config.with("sequential", true);
            }
            let m = &payload.measurement;
            let csv = (
                "command,field,nvars,degree,sizes,image_size,deficiency,statistic".to_string(),
                format!(
                    "expand,{field},{},{},{},{},{},{}",
                    m.nvars,
                    m.degree,
                    join_sizes(&m.set_sizes),
                    m.image_size,
                    m.deficiency,
                    m.statistic
                ),
            );
            let human = format!(
                "|P(X)| = {} of q = {} (deficiency {}, statistic {:.4}) on sets of sizes {}\n",
                m.image_size,
                m.q,
                m.deficiency,
                m.statistic,
                join_sizes(&m.set_sizes)
            );
            let report = Report::new(config, payload, ms(started));
            Ok((render(&report, format, csv, human), 0))
        }

        Command::Counterexample { prime, coeffs } => {
            let field = prime.to_string();
            let ctx = FieldCtx::parse_spec(&field)?;
            let parsed: Vec<i64> = coeffs
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Error::domain(format!("coefficients must be integers, got {coeffs:?}")))?;
            let payload = report::run_counterexample(&ctx, &parsed)?;
            let config = RunConfig::new("counterexample", &field, seed, format.name())
                .with("prime", prime)
                .with("coeffs", &coeffs);
            let code = if payload.within_ceiling { 0 } else { 1 };
            let csv = (
                "command,prime,coeffs,sizes,image_size,ceiling,within_ceiling".to_string(),
                format!(
                    "counterexample,{prime},{},{},{},{},{}",
                    csv_quote(&coeffs),
                    join_sizes(&payload.set_sizes),
                    payload.image_size,
                    payload.ceiling,
                    payload.within_ceiling
                ),
            );
            let human = format!(
                "|Q(X,Y,Z)| = {} <= {} = floor(3p/4): {} (sizes {}, window [{:.1}, {:.1}])\n",
                payload.image_size,
                payload.ceiling,
                payload.within_ceiling,
                join_sizes(&payload.set_sizes),
                payload.size_window_low,
                payload.size_window_high
            );
            let report = Report::new(config, payload, ms(started));
            Ok((render(&report, format, csv, human), code))
        }

        Command::ClassifyQuadratic { field, poly, exhaustive } => {
            let ctx = FieldCtx::parse_spec(&field)?;
            if exhaustive {
                let payload = report::run_classify_exhaustive(&ctx)?;
                let config = RunConfig::new("classify-quadratic", &field, seed, format.name())
                    .with("exhaustive", true);
                let code = if payload.agreement { 0 } else { 1 };
                let csv = (
                    "command,field,quadratics,nice,not_nice,agreement".to_string(),
                    format!(
                        "classify-quadratic,{field},{},{},{},{}",
                        payload.quadratics, payload.nice, payload.not_nice, payload.agreement
                    ),
                );
                let human = format!(
                    "scanned {} polynomials over F_{}: {} quadratics, {} nice, {} not nice, agreement {}\n",
                    payload.scanned,
                    ctx.q(),
                    payload.quadratics,
                    payload.nice,
                    payload.not_nice,
                    payload.agreement
                );
                let report = Report::new(config, payload, ms(started));
                return Ok((render(&report, format, csv, human), code));
            }
            let poly = poly.ok_or_else(|| {
                Error::domain("either --poly or --exhaustive is required")
            })?;
            let payload = report::run_classify_quadratic(&ctx, &poly)?;
            let config = RunConfig::new("classify-quadratic", &field, seed, format.name())
                .with("poly", &poly);
            let code = if payload.class.is_nice() { 0 } else { 1 };
            let class = if payload.class.is_nice() { "nice" } else { "not_nice" };
            let csv = (
                "command,field,poly,class,agrees_with_search".to_string(),
                format!(
                    "classify-quadratic,{field},{},{class},{}",
                    csv_quote(&payload.poly),
                    payload.agrees_with_search
                ),
            );
            let human = format!(
                "{} over F_{} is {} (search agrees: {})\n",
                payload.poly,
                ctx.q(),
                if payload.class.is_nice() { "nice" } else { "not nice" },
                payload.agrees_with_search
            );
            let report = Report::new(config, payload, ms(started));
            Ok((render(&report, format, csv, human), code))
        }

        Command::Annihilator { field, polys, nvars, bound } => {
            let ctx = FieldCtx::parse_spec(&field)?;
            let texts: Vec<String> =
                polys.split(';').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
            let payload = report::run_annihilator(
                &ctx,
                &texts,
                nvars,
                bound,
                &AnnihilatorBudget::default(),
            )?;
            let mut config = RunConfig::new("annihilator", &field, seed, format.name())
                .with("polys", &polys);
            if let Some(n) = nvars {
                config = config.with("nvars", n);
            }
            if let Some(b) = bound {
                config = config.with("bound", b);
            }
            let (code, kind, detail) = match &payload.family.status {
                FamilyStatus::Dependent { relation } => {
                    (0, "dependent", format!("relation of degree {}", relation.degree))
                }
                FamilyStatus::Independent { .. } => (1, "independent", "jacobian witness".into()),
                FamilyStatus::Unknown { bound_searched } => {
                    (2, "unknown", format!("searched through degree {bound_searched}"))
                }
            };
            let csv = (
                "command,field,nvars,kind,bound_used".to_string(),
                format!(
                    "annihilator,{field},{},{kind},{}",
                    payload.nvars, payload.family.bound_used
                ),
            );
            let human = format!("family is {kind} ({detail})\n");
            let report = Report::new(config, payload, ms(started));
            Ok((render(&report, format, csv, human), code))
        }

        Command::ConcFamily { field, a, degree, f, g, sets, threshold_c } => {
            let ctx = FieldCtx::parse_spec(&field)?;
            let opts = ImageOptions::default();
            let payload = report::run_conc_family(
                &ctx, a, degree, &f, &g, &sets, seed, threshold_c, &opts,
            )?;
            if !payload.independence_certified {
                eprintln!(
                    "ffexpand: warning: F and G were not certified independent; measuring anyway"
                );
            }
            let config = RunConfig::new("conc-family", &field, seed, format.name())
                .with("a", a)
                .with("degree", degree)
                .with("f", &f)
                .with("g", &g)
                .with("sets", &sets)
                .with("threshold_c", threshold_c);
            let m = &payload.measurement;
            let csv = (
                "command,field,poly,sizes,image_size,deficiency,independence_certified".to_string(),
                format!(
                    "conc-family,{field},{},{},{},{},{}",
                    csv_quote(&payload.poly),
                    join_sizes(&m.set_sizes),
                    m.image_size,
                    m.deficiency,
                    payload.independence_certified
                ),
            );
            let human = format!(
                "{}: |P(X,Y,Z)| = {} of q = {} (deficiency {}, independence certified: {})\n",
                payload.poly, m.image_size, m.q, m.deficiency, payload.independence_certified
            );
            let report = Report::new(config, payload, ms(started));
            Ok((render(&report, format, csv, human), 0))
        }
    }
}

fn join_sizes(sizes: &[u64]) -> String {
    sizes.iter().map(u64::to_string).collect::<Vec<_>>().join("|")
}

fn csv_quote(text: &str) -> String {
    if text.contains(',') || text.contains('"') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}
