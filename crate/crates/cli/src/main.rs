use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use satmodel_cli::config::Overrides;
use satmodel_cli::{load, run, ReportWriter, RunError, EXIT_FAILED, EXIT_INVALID};

/// Geometric model of satellite renormalization: renders, criterion runs
/// and numerical validators with JSON-lines reports.
#[derive(Parser, Debug)]
#[command(name = "satmodel", version)]
struct Cli {
    /// TOML job file; flags below override its fields.
    #[arg(long, global = true, env = "SATMODEL_CONFIG")]
    config: Option<PathBuf>,
    /// Working precision in bits, or "auto".
    #[arg(long, global = true, env = "SATMODEL_PRECISION")]
    precision: Option<String>,
    /// Deepest level N.
    #[arg(long, global = true, env = "SATMODEL_HORIZON")]
    horizon: Option<i64>,
    /// Directory for report.jsonl and images; reports go to stdout without it.
    #[arg(long, global = true, env = "SATMODEL_OUT")]
    out: Option<PathBuf>,
    /// Worker threads for rendering and sampling (results do not depend on it).
    #[arg(long, global = true, env = "SATMODEL_THREADS")]
    threads: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// The constant C, e.g. 3.2, 7/2 or 2pi.
    #[arg(long = "c", global = true, env = "SATMODEL_C")]
    c: Option<String>,
    /// Rotation numbers, comma separated: 1/28,1/39670.
    #[arg(long, global = true, value_delimiter = ',', env = "SATMODEL_FRACTIONS")]
    fractions: Option<Vec<String>>,
    /// Sequence generator: tower, affine or geometric.
    #[arg(long, global = true, env = "SATMODEL_GENERATOR")]
    generator: Option<String>,
    /// First denominator of the generated sequence.
    #[arg(long, global = true)]
    q0: Option<i64>,
    /// Common numerator of the generated sequence.
    #[arg(long, global = true)]
    p: Option<i64>,
    /// Tower base m in q' = m^q.
    #[arg(long, global = true)]
    base: Option<i64>,
    /// Affine slope a in q' = a*q + b.
    #[arg(long, global = true)]
    a: Option<i64>,
    /// Affine offset b in q' = a*q + b.
    #[arg(long, global = true)]
    b: Option<i64>,
    /// Geometric ratio r in q' = r*q.
    #[arg(long, global = true)]
    ratio: Option<i64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the command named in the configuration file.
    Run,
    /// Escape-depth image and component counts.
    Render {
        /// Real range MIN,MAX.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        /// Imaginary range MIN,MAX.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
        #[arg(long)]
        width: Option<i64>,
        #[arg(long)]
        height: Option<i64>,
        /// Image file name inside the output directory.
        #[arg(long)]
        image: Option<String>,
    },
    /// Centers, gap and class-membership margins for a candidate.
    Criterion {
        /// center, theorem or fixed.
        #[arg(long)]
        candidate: Option<String>,
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        /// Candidate for the fixed rule.
        #[arg(long = "x")]
        x: Option<String>,
    },
    /// Levin values over a window of levels.
    Levin {
        #[arg(long)]
        start: Option<i64>,
        #[arg(long)]
        end: Option<i64>,
        #[arg(long)]
        delta: Option<String>,
    },
    /// Disk-preimage, argument, sector, monotonicity and recursion suites.
    Verify {
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        #[arg(long)]
        c_prime: Option<String>,
        #[arg(long)]
        samples: Option<i64>,
        #[arg(long)]
        seed: Option<i64>,
        #[arg(long)]
        arg_q: Option<i64>,
    },
    /// Component labels of points.
    Address {
        /// A point RE,IM; repeatable.
        #[arg(long = "point", value_delimiter = ',', allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Centers s_0..s_N and the endpoint estimate.
    Centers,
}

fn overrides(cli: &Cli) -> Overrides {
    let mut o = Overrides::default();
    if let Some(p) = &cli.precision {
        match p.parse::<i64>() {
            Ok(bits) => o.set("precision", bits),
            Err(_) => o.set("precision", p.as_str()),
        }
    }
    if let Some(h) = cli.horizon {
        o.set("horizon", h);
    }
    if let Some(out) = &cli.out {
        o.set("output", out.to_string_lossy().as_ref());
    }
    let m = &cli.model;
    if let Some(c) = &m.c {
        o.set("model.c", c.as_str());
    }
    if let Some(f) = &m.fractions {
        o.set("model.fractions", f.clone());
    }
    if let Some(kind) = &m.generator {
        o.set("model.generator.kind", kind.as_str());
    }
    for (key, v) in [("q0", m.q0), ("p", m.p), ("base", m.base), ("a", m.a), ("b", m.b), ("ratio", m.ratio)] {
        if let Some(v) = v {
            o.set(&format!("model.generator.{key}"), v);
        }
    }
    let text = |o: &mut Overrides, path: &str, v: &Option<String>| {
        if let Some(v) = v {
            o.set(path, v.as_str());
        }
    };
    let name = match &cli.command {
        Cmd::Run => None,
        Cmd::Render { x, y, width, height, image } => {
            if let Some(x) = x {
                o.set("render.x", x.clone());
            }
            if let Some(y) = y {
                o.set("render.y", y.clone());
            }
            if let Some(w) = width {
                o.set("render.width", *w);
            }
            if let Some(h) = height {
                o.set("render.height", *h);
            }
            text(&mut o, "render.image", image);
            Some("render")
        }
        Cmd::Criterion { candidate, delta, alpha, beta, x } => {
            text(&mut o, "criterion.candidate", candidate);
            text(&mut o, "criterion.delta", delta);
            text(&mut o, "criterion.alpha", alpha);
            text(&mut o, "criterion.beta", beta);
            text(&mut o, "criterion.x", x);
            Some("criterion")
        }
        Cmd::Levin { start, end, delta } => {
            if let Some(s) = start {
                o.set("levin.start", *s);
            }
            if let Some(e) = end {
                o.set("levin.end", *e);
            }
            text(&mut o, "levin.delta", delta);
            Some("levin")
        }
        Cmd::Verify { alpha, beta, c_prime, samples, seed, arg_q } => {
            text(&mut o, "verify.alpha", alpha);
            text(&mut o, "verify.beta", beta);
            text(&mut o, "verify.c_prime", c_prime);
            for (key, v) in [("samples", samples), ("seed", seed), ("arg_q", arg_q)] {
                if let Some(v) = v {
                    o.set(&format!("verify.{key}"), *v);
                }
            }
            Some("verify")
        }
        Cmd::Address { points } => {
            if !points.is_empty() {
                let pairs: Vec<Vec<String>> = points.chunks(2).map(|c| c.to_vec()).collect();
                o.set("address.points", pairs);
            }
            Some("address")
        }
        Cmd::Centers => Some("centers"),
    };
    if let Some(name) = name {
        o.set("command", name);
    }
    o
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INVALID) } else { ExitCode::SUCCESS };
        }
    };
    let text = match &cli.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("config: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_INVALID);
            }
        },
        None => String::new(),
    };
    let config = match load(&text, &overrides(&cli)) {
        Ok(c) => c,
        Err(errors) => {
            for e in &errors.0 {
                eprintln!("{e}");
            }
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("threads: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match execute(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

fn execute(config: &satmodel_cli::JobConfig) -> Result<(), RunError> {
    match &config.output {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let file = BufWriter::new(File::create(dir.join("report.jsonl"))?);
            let mut report = ReportWriter::new(file);
            run(config, dir, &mut report)
        }
        None => {
            let stdout = io::stdout().lock();
            let mut report = ReportWriter::new(stdout);
            let result = run(config, Path::new("."), &mut report);
            report.into_inner().flush()?;
            result
        }
    }
}
