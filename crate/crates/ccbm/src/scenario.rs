//! Named benchmark scenarios, their closed-form anchors, and batch runs.

use crate::descent::{
    history_csv, run_descent, DescentConfig, DescentOutcome, IterateView, Method,
};
use crate::error::ScenarioError;
use crate::mesh::generate::{generate_annulus, InnerBoundary};
use crate::mesh::hausdorff::circle_polyline;
use crate::mesh::io::write_snapshot;
use crate::mesh::Mesh;
use crate::vec2::Vec2;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Multiplier on the inward flux for concentric circles of radii r < R in
/// the plane; the unique lambda that makes R the stationary free boundary.
pub fn lambda_annulus_2d(r: f64, big_r: f64) -> Result<f64, ScenarioError> {
    if !(r > 0.0 && big_r > r) {
        return Err(ScenarioError::BadRadii { r, big_r });
    }
    Ok(1.0 / (big_r * (r / big_r).ln()))
}

/// Same for concentric spheres in three dimensions.
pub fn lambda_annulus_3d(r: f64, big_r: f64) -> Result<f64, ScenarioError> {
    if !(r > 0.0 && big_r > r) {
        return Err(ScenarioError::BadRadii { r, big_r });
    }
    Ok(-r / (big_r * (big_r - r)))
}

/// Closed-form solution of the complex Robin problem between concentric
/// circles: u(rho) = a + b ln(rho) with complex a, b fixed by u = 1 at r and
/// u' + i u = lambda at R. Returns (re, im) at radius rho.
pub fn radial_exact_solution(r: f64, big_r: f64, lambda: f64, rho: f64) -> (f64, f64) {
    // b = (lambda - i) / (1/R + i ln(R/r));  a = 1 - b ln r.
    let (num_re, num_im) = (lambda, -1.0);
    let (den_re, den_im) = (1.0 / big_r, (big_r / r).ln());
    let den_sq = den_re * den_re + den_im * den_im;
    let b_re = (num_re * den_re + num_im * den_im) / den_sq;
    let b_im = (num_im * den_re - num_re * den_im) / den_sq;
    let a_re = 1.0 - b_re * r.ln();
    let a_im = -b_im * r.ln();
    (a_re + b_re * rho.ln(), a_im + b_im * rho.ln())
}

/// A fully specified run: geometry, data, resolution, and descent knobs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub inner: InnerBoundary,
    /// Radius of the initial free boundary (circle about the origin).
    pub outer_radius: f64,
    pub lambda: f64,
    pub h: f64,
    pub smoothing_passes: usize,
    pub descent: DescentConfig,
    /// Known target boundary, when one exists, for the d_H column.
    pub reference: Option<Vec<Vec2>>,
}

impl Scenario {
    pub fn build_mesh(&self) -> Result<Mesh, ScenarioError> {
        Ok(generate_annulus(&self.inner, self.outer_radius, self.h, self.smoothing_passes)?)
    }
}

/// Named presets.
pub fn preset(name: &str) -> Result<Scenario, ScenarioError> {
    match name {
        // Concentric circles with the stationary radius 0.7: the one case
        // with a closed-form answer, used for recovery checks.
        "example2d1" => Ok(Scenario {
            name: name.into(),
            inner: InnerBoundary::Circle { radius: 0.5 },
            outer_radius: 1.25,
            lambda: lambda_annulus_2d(0.5, 0.7)?,
            h: 0.05,
            smoothing_passes: 0,
            descent: DescentConfig {
                mu: 2.0,
                tol: 1e-6,
                plateau_tol: 1e-6,
                max_iters: 400,
                ..DescentConfig::default()
            },
            reference: Some(circle_polyline(0.7, 4096)),
        }),
        // L-shaped inner boundary, fixed iteration budget, no closed form.
        "example2d2" => Ok(Scenario {
            name: name.into(),
            inner: InnerBoundary::LShape,
            outer_radius: 1.25,
            lambda: -5.0,
            h: 0.1,
            smoothing_passes: 8,
            descent: DescentConfig {
                mu: 1.0,
                tol: 0.0,
                plateau_tol: 0.0,
                max_iters: 100,
                ..DescentConfig::default()
            },
            reference: None,
        }),
        // Pinched-oval inner boundary, same protocol as the L-shape.
        "example2d3" => Ok(Scenario {
            name: name.into(),
            inner: InnerBoundary::Ribbon,
            outer_radius: 1.25,
            lambda: -5.0,
            h: 0.1,
            smoothing_passes: 8,
            descent: DescentConfig {
                mu: 1.0,
                tol: 0.0,
                plateau_tol: 0.0,
                max_iters: 100,
                ..DescentConfig::default()
            },
            reference: None,
        }),
        other => Err(ScenarioError::UnknownScenario(other.to_string())),
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &["example2d1", "example2d2", "example2d3"]
}

/// Flat `key = value` configuration text; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ScenarioError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ScenarioError::BadConfig {
            line: ln + 1,
            msg: "expected `key = value`".into(),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Apply one config pair onto a scenario. Unknown keys are errors so typos
/// fail loudly.
pub fn apply_config_pair(scn: &mut Scenario, key: &str, value: &str) -> Result<(), ScenarioError> {
    let bad = |msg: String| ScenarioError::BadConfig { line: 0, msg };
    let parse_f64 =
        |v: &str| v.parse::<f64>().map_err(|_| bad(format!("bad number `{v}` for `{key}`")));
    let parse_usize =
        |v: &str| v.parse::<usize>().map_err(|_| bad(format!("bad count `{v}` for `{key}`")));
    match key {
        "h" => scn.h = parse_f64(value)?,
        "lambda" => scn.lambda = parse_f64(value)?,
        "mu" => scn.descent.mu = parse_f64(value)?,
        "tol" => scn.descent.tol = parse_f64(value)?,
        "plateau_tol" => scn.descent.plateau_tol = parse_f64(value)?,
        "max_iters" => scn.descent.max_iters = parse_usize(value)?,
        "fd_modes" => scn.descent.fd_modes = parse_usize(value)?,
        "fd_step" => scn.descent.fd_step = parse_f64(value)?,
        "smoothing" => scn.smoothing_passes = parse_usize(value)?,
        "outer_radius" => scn.outer_radius = parse_f64(value)?,
        "method" => {
            scn.descent.method = match value {
                "ccbm" => Method::Ccbm,
                "kv" => Method::Kv,
                other => return Err(bad(format!("method must be ccbm or kv, got `{other}`"))),
            }
        }
        other => return Err(bad(format!("unknown key `{other}`"))),
    }
    Ok(())
}

/// Everything one run leaves behind.
#[derive(Debug)]
pub struct RunArtifacts {
    pub outcome: DescentOutcome,
    pub cpu_ms: f64,
    pub out_dir: Option<PathBuf>,
}

fn write_file(path: &Path, content: &str) -> Result<(), ScenarioError> {
    fs::write(path, content).map_err(|e| ScenarioError::io(path.display().to_string(), e))
}

/// Free-boundary trace table: `s x y u1 u2 p1 p2 kappa G` per vertex.
pub fn trace_table(view: &IterateView) -> String {
    let mut out = String::from("# s x y u1 u2 p1 p2 kappa G\n");
    for (j, &v) in view.mesh.free_loop.iter().enumerate() {
        let p = view.mesh.vertices[v];
        let (p1, p2) = match view.adjoint {
            Some(adj) => (adj.field.re[v], adj.field.im[v]),
            None => (0.0, 0.0),
        };
        let _ = writeln!(
            out,
            "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            view.geom.arc_coord[j],
            p.x,
            p.y,
            view.state.field.re[v],
            view.state.field.im[v],
            p1,
            p2,
            view.geom.curvature[j],
            view.density[j],
        );
    }
    out
}

/// Run one scenario; when `out_dir` is given, writes history.csv, the final
/// mesh snapshot and trace, and periodic traces every `dump_every` iterates.
pub fn run_scenario(
    scn: &Scenario,
    out_dir: Option<&Path>,
    dump_every: usize,
) -> Result<RunArtifacts, ScenarioError> {
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir.display().to_string(), e))?;
    }
    let mesh0 = scn.build_mesh()?;
    let clock = Instant::now();

    let mut latest_trace = String::new();
    let mut dump_error: Option<ScenarioError> = None;
    let outcome =
        run_descent(&mesh0, scn.lambda, &scn.descent, scn.reference.as_deref(), |k, view| {
            let table = trace_table(view);
            if let Some(dir) = out_dir {
                if dump_every > 0 && k % dump_every == 0 && dump_error.is_none() {
                    let path = dir.join(format!("trace_{k:05}.txt"));
                    if let Err(e) = write_file(&path, &table) {
                        dump_error = Some(e);
                    }
                }
            }
            latest_trace = table;
        })?;
    if let Some(e) = dump_error {
        return Err(e);
    }
    let cpu_ms = clock.elapsed().as_secs_f64() * 1e3;

    if let Some(dir) = out_dir {
        write_file(&dir.join("history.csv"), &history_csv(&outcome.records))?;
        write_file(&dir.join("trace_final.txt"), &latest_trace)?;
        let mut snap = Vec::new();
        write_snapshot(&outcome.mesh, &mut snap)
            .map_err(|e| ScenarioError::io("mesh_final.txt", e))?;
        write_file(&dir.join("mesh_final.txt"), &String::from_utf8(snap).unwrap())?;
        write_file(&dir.join("stop_reason.txt"), &format!("{}\n", outcome.reason.name()))?;
    }

    Ok(RunArtifacts { outcome, cpu_ms, out_dir: out_dir.map(|p| p.to_path_buf()) })
}

/// One row of summary.csv.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: f64,
    pub mu: f64,
    pub h: f64,
    pub method: Method,
    pub final_j: f64,
    pub final_dh: f64,
    pub iters: usize,
    pub cpu_ms: f64,
}

pub fn summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda,mu,h,method,final_J,final_dH,iters,cpu_ms\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{},{:.3}",
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
    out
}

/// The timing column blanked, for byte comparisons.
pub fn summary_csv_deterministic(rows: &[SweepRow]) -> String {
    summary_csv(rows)
        .lines()
        .map(|line| {
            let mut parts: Vec<&str> = line.split(',').collect();
            if parts.len() == 8 && parts[0] != "lambda" {
                parts[7] = "-";
            }
            parts.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

fn trim_float(v: f64) -> String {
    let s = format!("{v}");
    s.replace('-', "m")
}

/// Cartesian sweep over lambda, mu, h, and method. Runs in parallel, writes
/// one subdirectory per run plus summary.csv, and returns rows in grid
/// order (lambda outermost, method innermost).
pub fn sweep(
    base: &Scenario,
    lambdas: &[f64],
    mus: &[f64],
    hs: &[f64],
    methods: &[Method],
    out_dir: Option<&Path>,
    dump_every: usize,
) -> Result<Vec<SweepRow>, ScenarioError> {
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir.display().to_string(), e))?;
    }
    let mut grid = Vec::new();
    for &lambda in lambdas {
        for &mu in mus {
            for &h in hs {
                for &method in methods {
                    grid.push((lambda, mu, h, method));
                }
            }
        }
    }

    let rows: Vec<Result<SweepRow, ScenarioError>> = grid
        .par_iter()
        .map(|&(lambda, mu, h, method)| {
            let mut scn = base.clone();
            scn.lambda = lambda;
            scn.descent.mu = mu;
            scn.h = h;
            scn.descent.method = method;
            let sub = out_dir.map(|d| {
                d.join(format!(
                    "{}_lam{}_mu{}_h{}",
                    method.name(),
                    trim_float(lambda),
                    trim_float(mu),
                    trim_float(h)
                ))
            });
            let art = run_scenario(&scn, sub.as_deref(), dump_every)?;
            let last = art.outcome.records.last().expect("at least one record");
            let final_j = match method {
                Method::Ccbm => last.j,
                Method::Kv => last.j_kv,
            };
            Ok(SweepRow {
                lambda,
                mu,
                h,
                method,
                final_j,
                final_dh: last.d_h,
                iters: art.outcome.records.len().saturating_sub(1),
                cpu_ms: art.cpu_ms,
            })
        })
        .collect();

    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        out.push(r?);
    }
    if let Some(dir) = out_dir {
        write_file(&dir.join("summary.csv"), &summary_csv(&out))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_formulas_match_known_values() {
        // 2D concentric circles, r = 0.5, R = 0.7.
        let l2 = lambda_annulus_2d(0.5, 0.7).unwrap();
        assert!((l2 - -4.24573).abs() < 5e-6, "lambda_2d = {l2}");
        // 3D concentric spheres, r = 0.3, R = 0.5.
        let l3 = lambda_annulus_3d(0.3, 0.5).unwrap();
        assert!((l3 - -3.0).abs() < 1e-12, "lambda_3d = {l3}");
        assert!(matches!(lambda_annulus_2d(0.7, 0.5), Err(ScenarioError::BadRadii { .. })));
    }

    #[test]
    fn radial_solution_satisfies_both_ends() {
        let (r, big_r, lambda) = (0.5, 1.1, -2.7);
        let (u_re, u_im) = radial_exact_solution(r, big_r, lambda, r);
        assert!((u_re - 1.0).abs() < 1e-14 && u_im.abs() < 1e-14);

        // Robin check at R: u'(R) + i u(R) = lambda, u' = b / rho.
        let eps = 1e-7;
        let (up_re, up_im) = radial_exact_solution(r, big_r, lambda, big_r + eps);
        let (um_re, um_im) = radial_exact_solution(r, big_r, lambda, big_r - eps);
        let du_re = (up_re - um_re) / (2.0 * eps);
        let du_im = (up_im - um_im) / (2.0 * eps);
        let (ur_re, ur_im) = radial_exact_solution(r, big_r, lambda, big_r);
        let robin_re = du_re - ur_im;
        let robin_im = du_im + ur_re;
        assert!((robin_re - lambda).abs() < 1e-6, "robin re {robin_re}");
        assert!(robin_im.abs() < 1e-6, "robin im {robin_im}");
    }

    #[test]
    fn config_parsing() {
        let text = "# comment\n h = 0.1 \n method = kv # trailing\n\nmu=0.5\n";
        let pairs = parse_config(text).unwrap();
        assert_eq!(pairs.len(), 3);
        let mut scn = preset("example2d1").unwrap();
        for (k, v) in &pairs {
            apply_config_pair(&mut scn, k, v).unwrap();
        }
        assert_eq!(scn.h, 0.1);
        assert_eq!(scn.descent.method, Method::Kv);
        assert_eq!(scn.descent.mu, 0.5);
        assert!(apply_config_pair(&mut scn, "nope", "1").is_err());
        assert!(parse_config("h 0.1").is_err());
    }

    #[test]
    fn presets_resolve() {
        for name in preset_names() {
            let s = preset(name).unwrap();
            assert!(s.lambda < 0.0);
            assert!(s.h > 0.0);
        }
        assert!(matches!(preset("nope"), Err(ScenarioError::UnknownScenario(_))));
    }
}
