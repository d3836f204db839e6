use ccbm::descent::Method;
use ccbm::error::ScenarioError;
use ccbm::mesh::io::write_snapshot;
use ccbm::mesh::quality::mesh_quality;
use ccbm::scenario::{
    apply_config_pair, parse_config, preset, preset_names, run_scenario, sweep, Scenario,
};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Free-boundary Bernoulli solver benchmarks.
#[derive(Parser)]
#[command(name = "ccbm", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Overrides {
    /// Scenario preset name.
    #[arg(long, default_value = "example2d1")]
    scenario: String,
    /// Flat `key = value` config file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target mesh edge length.
    #[arg(long)]
    h: Option<f64>,
    /// Step scale multiplier.
    #[arg(long)]
    mu: Option<f64>,
    /// Convergence tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Boundary flux constant.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write its artifacts.
    Run {
        #[command(flatten)]
        common: Overrides,
        /// ccbm, kv, or both.
        #[arg(long, default_value = "ccbm")]
        method: String,
        /// Output directory; artifacts are skipped without it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump a boundary trace every N iterates (0 = final only).
        #[arg(long, default_value_t = 0)]
        dump_every: usize,
    },
    /// Run a lambda x mu x h x method grid and write summary.csv.
    Sweep {
        #[command(flatten)]
        common: Overrides,
        /// Comma list or integer range `a..b`, e.g. `-10..-1`.
        #[arg(long, allow_hyphen_values = true)]
        lambdas: Option<String>,
        /// Comma list, e.g. `1.0,0.5,0.25`.
        #[arg(long)]
        mus: Option<String>,
        /// Comma list, e.g. `0.1,0.05`.
        #[arg(long)]
        hs: Option<String>,
        /// Comma list from {ccbm, kv}.
        #[arg(long, default_value = "ccbm")]
        methods: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        dump_every: usize,
    },
    /// Fast numerical self-checks.
    Validate,
    /// Generate the scenario mesh, report quality, optionally snapshot it.
    Mesh {
        #[command(flatten)]
        common: Overrides,
        /// Snapshot file path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn build_scenario(common: &Overrides) -> Result<Scenario, ScenarioError> {
    let mut scn = preset(&common.scenario)?;
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::io(path.display().to_string(), e))?;
        for (k, v) in parse_config(&text)? {
            apply_config_pair(&mut scn, &k, &v)?;
        }
    }
    if let Some(h) = common.h {
        scn.h = h;
    }
    if let Some(mu) = common.mu {
        scn.descent.mu = mu;
    }
    if let Some(tol) = common.tol {
        scn.descent.tol = tol;
    }
    if let Some(n) = common.max_iters {
        scn.descent.max_iters = n;
    }
    if let Some(l) = common.lambda {
        scn.lambda = l;
    }
    Ok(scn)
}

fn parse_list(text: &str) -> Result<Vec<f64>, ScenarioError> {
    let bad = |msg: String| ScenarioError::BadConfig { line: 0, msg };
    if let Some((a, b)) = text.split_once("..") {
        let lo: i64 = a.trim().parse().map_err(|_| bad(format!("bad range start `{a}`")))?;
        let hi: i64 = b.trim().parse().map_err(|_| bad(format!("bad range end `{b}`")))?;
        if hi < lo {
            return Err(bad(format!("empty range `{text}`")));
        }
        return Ok((lo..=hi).map(|v| v as f64).collect());
    }
    text.split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|_| bad(format!("bad number `{tok}` in list")))
        })
        .collect()
}

fn parse_methods(text: &str) -> Result<Vec<Method>, ScenarioError> {
    text.split(',')
        .map(|tok| match tok.trim() {
            "ccbm" => Ok(Method::Ccbm),
            "kv" => Ok(Method::Kv),
            other => Err(ScenarioError::BadConfig {
                line: 0,
                msg: format!("method must be ccbm or kv, got `{other}`"),
            }),
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), ScenarioError> {
    match cli.cmd {
        Cmd::Run { common, method, out, dump_every } => {
            let scn = build_scenario(&common)?;
            let methods: Vec<Method> = match method.as_str() {
                "both" => vec![Method::Ccbm, Method::Kv],
                other => parse_methods(other)?,
            };
            let split = methods.len() > 1;
            for m in methods {
                let mut s = scn.clone();
                s.descent.method = m;
                let dir = out.as_ref().map(|d| if split { d.join(m.name()) } else { d.clone() });
                let art = run_scenario(&s, dir.as_deref(), dump_every)?;
                let last = art.outcome.records.last().unwrap();
                println!(
                    "{} {}: {} after {} moves, J={:.6e}, J_KV={:.6e}, d_H={:.6e}, {:.0} ms",
                    s.name,
                    m.name(),
                    art.outcome.reason.name(),
                    art.outcome.records.len() - 1,
                    last.j,
                    last.j_kv,
                    last.d_h,
                    art.cpu_ms
                );
            }
            Ok(())
        }
        Cmd::Sweep { common, lambdas, mus, hs, methods, out, dump_every } => {
            let scn = build_scenario(&common)?;
            let lambdas = match lambdas {
                Some(t) => parse_list(&t)?,
                None => vec![scn.lambda],
            };
            let mus = match mus {
                Some(t) => parse_list(&t)?,
                None => vec![scn.descent.mu],
            };
            let hs = match hs {
                Some(t) => parse_list(&t)?,
                None => vec![scn.h],
            };
            let methods = parse_methods(&methods)?;
            let rows = sweep(&scn, &lambdas, &mus, &hs, &methods, out.as_deref(), dump_every)?;
            for r in &rows {
                println!(
                    "lambda={:<6} mu={:<5} h={:<6} {}: J={:.6e} d_H={:.6e} iters={} {:.0} ms",
                    r.lambda,
                    r.mu,
                    r.h,
                    r.method.name(),
                    r.final_j,
                    r.final_dh,
                    r.iters,
                    r.cpu_ms
                );
            }
            Ok(())
        }
        Cmd::Validate => {
            let results = ccbm::validate::run_all();
            let mut ok = true;
            for c in &results {
                println!("{} {:<42} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if ok {
                Ok(())
            } else {
                Err(ScenarioError::BadConfig { line: 0, msg: "self checks failed".into() })
            }
        }
        Cmd::Mesh { common, out } => {
            let scn = build_scenario(&common)?;
            let mesh = scn.build_mesh()?;
            let q = mesh_quality(&mesh);
            println!(
                "{}: {} vertices, {} triangles, angles [{:.1}, {:.1}] deg, aspect {:.2}, area {:.6}",
                scn.name,
                q.n_vertices,
                q.n_triangles,
                q.min_angle_deg,
                q.max_angle_deg,
                q.worst_aspect,
                q.total_area
            );
            if let Some(path) = out {
                let mut buf = Vec::new();
                write_snapshot(&mesh, &mut buf)
                    .map_err(|e| ScenarioError::io(path.display().to_string(), e))?;
                std::fs::write(&path, buf)
                    .map_err(|e| ScenarioError::io(path.display().to_string(), e))?;
                println!("snapshot written to {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, ScenarioError::UnknownScenario(_)) {
                eprintln!("(known scenarios: {})", preset_names().join(", "));
            }
            ExitCode::from(2)
        }
    }
}
