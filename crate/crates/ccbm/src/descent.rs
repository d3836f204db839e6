//! Gradient descent on the free boundary with Sobolev-smoothed velocities.
//!
//! Each iteration solves the forward problems, turns the boundary density
//! into an H1 velocity over the whole mesh (zero on the fixed boundary),
//! scales the step from the current cost, backtracks on element inversion or
//! cost increase, and moves every vertex at once.

use crate::error::{DescentError, MeshError, SolveError};
use crate::fem::{
    assemble_free_boundary_load, assemble_mass, assemble_stiffness, solve_spd_multi, DirichletBc,
};
use crate::gradient::{boundary_pairing, gradient_density};
use crate::kv::{kv_cost_with, solve_kv_pair_with};
use crate::mesh::geometry::{free_boundary_geometry, FreeBoundaryGeometry};
use crate::mesh::hausdorff::hausdorff_distance;
use crate::mesh::Mesh;
use crate::state::{cost_with, solve_state_adjoint_with, solve_state_with, StateSolution};
use crate::vec2::Vec2;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Complex-coupling cost driven by its adjoint-based boundary density.
    Ccbm,
    /// Kohn-Vogelius cost driven by a finite-difference fitted density.
    Kv,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ccbm => "ccbm",
            Method::Kv => "kv",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentConfig {
    /// Step scale: t = mu J / |V|_H1^2 before backtracking.
    pub mu: f64,
    /// Converged when max(|V|_H1, sup |V| on Sigma, J) falls below this.
    pub tol: f64,
    /// Plateau stop on |J_k - J_{k-1}|; zero disables.
    pub plateau_tol: f64,
    /// Accepted moves budget.
    pub max_iters: usize,
    pub method: Method,
    /// Basis size for the finite-difference density fit (KV driving).
    pub fd_modes: usize,
    /// Probe step for finite differences.
    pub fd_step: f64,
    /// Backtracking halvings before giving up.
    pub max_halvings: usize,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            mu: 1.0,
            tol: 1e-6,
            plateau_tol: 1e-6,
            max_iters: 200,
            method: Method::Ccbm,
            fd_modes: 9,
            fd_step: 1e-4,
            max_halvings: 20,
        }
    }
}

/// One history row; `t` is the step accepted from this iterate (zero on the
/// stopping row).
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub k: usize,
    pub j: f64,
    pub j_kv: f64,
    pub grad_norm: f64,
    pub v_inf_sigma: f64,
    pub t: f64,
    pub d_h: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    Plateau,
    IterBudget,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::Plateau => "plateau",
            StopReason::IterBudget => "iter_budget",
        }
    }
}

#[derive(Debug)]
pub struct DescentOutcome {
    pub mesh: Mesh,
    pub records: Vec<IterationRecord>,
    pub reason: StopReason,
}

/// Everything a per-iterate observer may want to dump.
pub struct IterateView<'a> {
    pub mesh: &'a Mesh,
    pub geom: &'a FreeBoundaryGeometry,
    pub state: &'a StateSolution,
    pub adjoint: Option<&'a crate::state::AdjointSolution>,
    /// Driving density at free-loop vertices.
    pub density: &'a [f64],
}

/// H1 velocity field with its energy.
#[derive(Debug, Clone)]
pub struct DescentField {
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    /// a(V, V) in the vector H1 inner product; dJ[V] = -a(V, V).
    pub h1_norm_sq: f64,
}

impl DescentField {
    pub fn as_vectors(&self) -> Vec<Vec2> {
        self.vx.iter().zip(&self.vy).map(|(&x, &y)| Vec2::new(x, y)).collect()
    }

    pub fn sup_on_loop(&self, mesh: &Mesh) -> f64 {
        mesh.free_loop
            .iter()
            .map(|&v| Vec2::new(self.vx[v], self.vy[v]).norm())
            .fold(0.0f64, f64::max)
    }
}

/// Riesz-represent the negative boundary density in vector H1: each
/// component solves (K + M) V = -integral of g n_c phi, V = 0 on the fixed
/// boundary. Interior vertices ride along, giving the mesh deformation.
pub fn sobolev_gradient(
    mesh: &Mesh,
    geom: &FreeBoundaryGeometry,
    density: &[f64],
) -> Result<DescentField, SolveError> {
    let k = assemble_stiffness(mesh);
    let m = assemble_mass(mesh);
    let a = k.add_scaled(&m, 1.0, 1.0);

    // Load -n_c (B g) rather than -B (g n_c): pairing that load against V
    // reproduces boundary_pairing(g, V . n) exactly, which makes
    // dJ[V] = -|V|_{H1}^2 an identity of the discrete system.
    let bg = assemble_free_boundary_load(mesh, density);
    let loads: Vec<Vec<f64>> = [0, 1]
        .iter()
        .map(|&c| {
            let mut l = vec![0.0; mesh.n_vertices()];
            for (j, &v) in mesh.free_loop.iter().enumerate() {
                let n = geom.normal[j];
                l[v] = -bg[v] * if c == 0 { n.x } else { n.y };
            }
            l
        })
        .collect();
    let bc: Vec<DirichletBc> =
        mesh.fixed_loop.iter().map(|&v| DirichletBc { node: v, value: 0.0 }).collect();
    let mut sols = solve_spd_multi(&a, &loads, &bc)?;
    let vy = sols.pop().unwrap();
    let vx = sols.pop().unwrap();
    let h1_norm_sq = a.bilinear(&vx, &vx) + a.bilinear(&vy, &vy);
    Ok(DescentField { vx, vy, h1_norm_sq })
}

/// t = mu J / |V|^2, the quasi-Newton scale of the paper's algorithm; zero
/// when the cost or the field degenerates.
pub fn step_size(j: f64, h1_norm_sq: f64, mu: f64) -> f64 {
    if !(j > 0.0) || !(h1_norm_sq > 0.0) {
        return 0.0;
    }
    let t = mu * j / h1_norm_sq;
    if t.is_finite() {
        t
    } else {
        0.0
    }
}

/// Central difference of a scenario cost along a velocity field.
pub fn fd_directional_derivative(
    mesh: &Mesh,
    lambda: f64,
    vx: &[f64],
    vy: &[f64],
    t: f64,
    method: Method,
) -> Result<f64, DescentError> {
    let v: Vec<Vec2> = vx.iter().zip(vy).map(|(&x, &y)| Vec2::new(x, y)).collect();
    let eval = |m: &Mesh| -> Result<f64, SolveError> {
        match method {
            Method::Ccbm => {
                let k = assemble_stiffness(m);
                let b = crate::fem::assemble_free_boundary_mass(m);
                let mass = assemble_mass(m);
                let st = solve_state_with(m, &k, &b, lambda)?;
                Ok(0.5 * mass.bilinear(&st.field.im, &st.field.im))
            }
            Method::Kv => crate::kv::kv_cost_on(m, lambda),
        }
    };
    let plus = mesh.moved_by(&v, t).map_err(|e| DescentError::Mesh { iter: 0, source: e })?;
    let minus = mesh.moved_by(&v, -t).map_err(|e| DescentError::Mesh { iter: 0, source: e })?;
    let jp = eval(&plus).map_err(|e| DescentError::Solve { iter: 0, source: e })?;
    let jm = eval(&minus).map_err(|e| DescentError::Solve { iter: 0, source: e })?;
    Ok((jp - jm) / (2.0 * t))
}

/// Gauss elimination with partial pivoting; fine for the small dense fit.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in row + 1..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Fourier-type basis over arc length on the free loop.
fn loop_basis(geom: &FreeBoundaryGeometry, modes: usize) -> Vec<Vec<f64>> {
    let l = geom.perimeter;
    (0..modes)
        .map(|m| {
            geom.arc_coord
                .iter()
                .map(|&s| {
                    if m == 0 {
                        1.0
                    } else {
                        let k = ((m + 1) / 2) as f64;
                        let arg = 2.0 * std::f64::consts::PI * k * s / l;
                        if m % 2 == 1 {
                            arg.cos()
                        } else {
                            arg.sin()
                        }
                    }
                })
                .collect()
        })
        .collect()
}

/// Estimate a boundary density for the KV cost by probing smooth normal
/// perturbations with central differences and fitting the Fourier basis.
pub fn kv_fd_density(
    mesh: &Mesh,
    geom: &FreeBoundaryGeometry,
    lambda: f64,
    modes: usize,
    fd_step: f64,
) -> Result<Vec<f64>, DescentError> {
    let basis = loop_basis(geom, modes);

    // One Sobolev extension per mode, all sharing a factorization.
    let k = assemble_stiffness(mesh);
    let m = assemble_mass(mesh);
    let a = k.add_scaled(&m, 1.0, 1.0);
    let bc: Vec<DirichletBc> =
        mesh.fixed_loop.iter().map(|&v| DirichletBc { node: v, value: 0.0 }).collect();
    let mut loads = Vec::with_capacity(2 * modes);
    for b in &basis {
        for c in 0..2 {
            let g: Vec<f64> = b
                .iter()
                .zip(&geom.normal)
                .map(|(v, n)| v * if c == 0 { n.x } else { n.y })
                .collect();
            loads.push(assemble_free_boundary_load(mesh, &g));
        }
    }
    let sols =
        solve_spd_multi(&a, &loads, &bc).map_err(|e| DescentError::Solve { iter: 0, source: e })?;

    let mut gram = vec![vec![0.0; modes]; modes];
    let mut rhs = vec![0.0; modes];
    for mi in 0..modes {
        let vx = &sols[2 * mi];
        let vy = &sols[2 * mi + 1];
        let sup = vx
            .iter()
            .zip(vy.iter())
            .map(|(&x, &y)| Vec2::new(x, y).norm())
            .fold(0.0f64, f64::max)
            .max(1e-30);
        let sx: Vec<f64> = vx.iter().map(|v| v / sup).collect();
        let sy: Vec<f64> = vy.iter().map(|v| v / sup).collect();

        let mut t = fd_step;
        let mut d = None;
        for _ in 0..8 {
            match fd_directional_derivative(mesh, lambda, &sx, &sy, t, Method::Kv) {
                Ok(v) => {
                    d = Some(v);
                    break;
                }
                Err(DescentError::Mesh { .. }) => t *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let d = d.ok_or(DescentError::StepCollapse { iter: 0, halvings: 8, t })?;
        rhs[mi] = d;

        let trace: Vec<f64> = mesh
            .free_loop
            .iter()
            .enumerate()
            .map(|(j, &v)| Vec2::new(sx[v], sy[v]).dot(geom.normal[j]))
            .collect();
        // gram[probe][basis] = integral of b_k (W_probe . n).
        for kk in 0..modes {
            gram[mi][kk] = boundary_pairing(geom, &basis[kk], &trace);
        }
    }

    let coef = solve_dense(gram, rhs)
        .ok_or(DescentError::Solve { iter: 0, source: SolveError::SingularSystem })?;
    let kvert = geom.arc_coord.len();
    let mut g = vec![0.0; kvert];
    for (ck, bk) in coef.iter().zip(&basis) {
        for j in 0..kvert {
            g[j] += ck * bk[j];
        }
    }
    Ok(g)
}

/// Full descent loop. `reference` supplies the polyline for the d_H column;
/// when absent, distances are measured against the final iterate afterwards.
pub fn run_descent(
    mesh0: &Mesh,
    lambda: f64,
    cfg: &DescentConfig,
    reference: Option<&[Vec2]>,
    mut on_iterate: impl FnMut(usize, &IterateView),
) -> Result<DescentOutcome, DescentError> {
    let mut mesh = mesh0.clone();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut polylines: Vec<Vec<Vec2>> = Vec::new();
    let mut prev_driving: Option<f64> = None;
    let reason;

    let mut k_iter = 0usize;
    loop {
        let clock = Instant::now();
        let stiff = assemble_stiffness(&mesh);
        let bmass = crate::fem::assemble_free_boundary_mass(&mesh);
        let mass = assemble_mass(&mesh);
        let err_solve = |e: SolveError| DescentError::Solve { iter: k_iter, source: e };

        let geom = free_boundary_geometry(&mesh)
            .map_err(|e| DescentError::Mesh { iter: k_iter, source: e })?;

        let mut adjoint = None;
        let state;
        let density: Vec<f64> = match cfg.method {
            Method::Ccbm => {
                let (st, adj) = solve_state_adjoint_with(&mesh, &stiff, &bmass, &mass, lambda)
                    .map_err(err_solve)?;
                let d = gradient_density(&mesh, &geom, &st, &adj, lambda);
                state = st;
                adjoint = Some(adj);
                d.values
            }
            Method::Kv => {
                state = solve_state_with(&mesh, &stiff, &bmass, lambda).map_err(err_solve)?;
                kv_fd_density(&mesh, &geom, lambda, cfg.fd_modes, cfg.fd_step)?
            }
        };
        let j = cost_with(&mass, &state);
        let kv_pair = solve_kv_pair_with(&mesh, &stiff, lambda).map_err(err_solve)?;
        let j_kv = kv_cost_with(&stiff, &kv_pair);

        let field = sobolev_gradient(&mesh, &geom, &density).map_err(err_solve)?;
        let grad_norm = field.h1_norm_sq.max(0.0).sqrt();
        let v_inf = field.sup_on_loop(&mesh);
        let driving_j = match cfg.method {
            Method::Ccbm => j,
            Method::Kv => j_kv,
        };

        let d_h = match reference {
            Some(r) => hausdorff_distance(&mesh.free_polyline(), r)
                .map_err(|e| DescentError::Mesh { iter: k_iter, source: e })?,
            None => {
                polylines.push(mesh.free_polyline());
                f64::NAN
            }
        };

        on_iterate(
            k_iter,
            &IterateView {
                mesh: &mesh,
                geom: &geom,
                state: &state,
                adjoint: adjoint.as_ref(),
                density: &density,
            },
        );

        let mut record = IterationRecord {
            k: k_iter,
            j,
            j_kv,
            grad_norm,
            v_inf_sigma: v_inf,
            t: 0.0,
            d_h,
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
        };

        // Stopping tests look at the current iterate, before any move.
        if grad_norm.max(v_inf).max(driving_j) < cfg.tol {
            records.push(record);
            reason = StopReason::Converged;
            break;
        }
        if let Some(pj) = prev_driving {
            if cfg.plateau_tol > 0.0 && (pj - driving_j).abs() < cfg.plateau_tol {
                records.push(record);
                reason = StopReason::Plateau;
                break;
            }
        }
        if k_iter >= cfg.max_iters {
            records.push(record);
            reason = StopReason::IterBudget;
            break;
        }

        let t0 = step_size(driving_j, field.h1_norm_sq, cfg.mu);
        if t0 <= 0.0 {
            records.push(record);
            reason = StopReason::Converged;
            break;
        }

        // Backtracking: reject element inversion and cost increase.
        let v = field.as_vectors();
        let mut t = t0;
        let mut accepted: Option<(Mesh, f64)> = None;
        let mut halvings = 0usize;
        while halvings <= cfg.max_halvings {
            match mesh.moved_by(&v, t) {
                Err(MeshError::MeshInversion { .. }) => {}
                Err(e) => return Err(DescentError::Mesh { iter: k_iter, source: e }),
                Ok(candidate) => {
                    let cost_next = match cfg.method {
                        Method::Ccbm => {
                            let k2 = assemble_stiffness(&candidate);
                            let b2 = crate::fem::assemble_free_boundary_mass(&candidate);
                            let m2 = assemble_mass(&candidate);
                            let s2 = solve_state_with(&candidate, &k2, &b2, lambda)
                                .map_err(err_solve)?;
                            cost_with(&m2, &s2)
                        }
                        Method::Kv => {
                            let k2 = assemble_stiffness(&candidate);
                            let p2 =
                                solve_kv_pair_with(&candidate, &k2, lambda).map_err(err_solve)?;
                            kv_cost_with(&k2, &p2)
                        }
                    };
                    if cost_next <= driving_j {
                        accepted = Some((candidate, cost_next));
                        break;
                    }
                }
            }
            t *= 0.5;
            halvings += 1;
        }
        let (next_mesh, cost_next) =
            accepted.ok_or(DescentError::StepCollapse { iter: k_iter, halvings, t })?;
        // Monotone descent is a structural invariant of the loop.
        assert!(
            cost_next <= driving_j,
            "cost rose from {driving_j} to {cost_next} on an accepted step"
        );

        record.t = t;
        records.push(record);
        prev_driving = Some(driving_j);
        mesh = next_mesh;
        k_iter += 1;
    }

    if reference.is_none() {
        // Paper convention: distances against the final iterate.
        let last = polylines.last().cloned().unwrap_or_default();
        for (rec, poly) in records.iter_mut().zip(&polylines) {
            rec.d_h = hausdorff_distance(poly, &last)
                .map_err(|e| DescentError::Mesh { iter: rec.k, source: e })?;
        }
    }

    Ok(DescentOutcome { mesh, records, reason })
}

/// history.csv writer; 17 significant digits, locale independent.
pub fn history_csv(records: &[IterationRecord]) -> String {
    let mut out = String::from("k,J,J_KV,grad_norm,v_inf_sigma,t,d_H,wall_ms\n");
    for r in records {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.3}\n",
            r.k, r.j, r.j_kv, r.grad_norm, r.v_inf_sigma, r.t, r.d_h, r.wall_ms
        ));
    }
    out
}

/// The same CSV with the timing column blanked, for byte comparisons.
pub fn history_csv_deterministic(records: &[IterationRecord]) -> String {
    let full = history_csv(records);
    full.lines()
        .map(|line| {
            let mut parts: Vec<&str> = line.split(',').collect();
            if parts.len() == 8 && parts[0] != "k" {
                parts[7] = "-";
            }
            parts.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradient::boundary_form_derivative;
    use crate::mesh::generate::{generate_annulus, InnerBoundary};
    use crate::scenario::lambda_annulus_2d;
    use crate::state::{solve_adjoint, solve_state};

    #[test]
    fn sobolev_direction_descends() {
        // dJ[V] = -a(V, V) for the Riesz representative, so the boundary
        // form evaluated on V must come out negative.
        let (r, big_r) = (0.5, 1.25);
        let lambda = lambda_annulus_2d(0.5, 0.7).unwrap();
        let mesh = generate_annulus(&InnerBoundary::Circle { radius: r }, big_r, 0.08, 0).unwrap();
        let geom = free_boundary_geometry(&mesh).unwrap();
        let state = solve_state(&mesh, lambda).unwrap();
        let adjoint = solve_adjoint(&mesh, &state).unwrap();
        let density = gradient_density(&mesh, &geom, &state, &adjoint, lambda);
        let field = sobolev_gradient(&mesh, &geom, &density.values).unwrap();

        let v_loop: Vec<Vec2> =
            mesh.free_loop.iter().map(|&i| Vec2::new(field.vx[i], field.vy[i])).collect();
        let dj = boundary_form_derivative(&geom, &density, &v_loop);
        assert!(dj < 0.0, "dJ[V] = {dj}");
        let rel = (dj + field.h1_norm_sq) / field.h1_norm_sq;
        assert!(rel.abs() < 1e-9, "dJ[V] vs -a(V,V): {rel}");

        // Fixed boundary does not move.
        for &vtx in &mesh.fixed_loop {
            assert_eq!(field.vx[vtx], 0.0);
            assert_eq!(field.vy[vtx], 0.0);
        }
    }

    #[test]
    fn step_size_degenerate_cases() {
        assert_eq!(step_size(0.0, 1.0, 2.0), 0.0);
        assert_eq!(step_size(1.0, 0.0, 2.0), 0.0);
        assert_eq!(step_size(2.0, 4.0, 2.0), 1.0);
    }

    #[test]
    fn short_descent_is_monotone() {
        let lambda = lambda_annulus_2d(0.5, 0.7).unwrap();
        let mesh = generate_annulus(&InnerBoundary::Circle { radius: 0.5 }, 1.0, 0.1, 0).unwrap();
        let cfg = DescentConfig {
            mu: 2.0,
            max_iters: 6,
            tol: 1e-12,
            plateau_tol: 0.0,
            ..DescentConfig::default()
        };
        let out = run_descent(&mesh, lambda, &cfg, None, |_, _| {}).unwrap();
        assert_eq!(out.reason, StopReason::IterBudget);
        assert_eq!(out.records.len(), 7);
        for w in out.records.windows(2) {
            assert!(w[1].j <= w[0].j, "J rose: {} -> {}", w[0].j, w[1].j);
        }
        // d_H backfilled against the final iterate: last row zero, others
        // positive and decreasing toward it.
        assert_eq!(out.records.last().unwrap().d_h, 0.0);
        assert!(out.records[0].d_h > 0.0);
    }

    #[test]
    fn history_csv_shape() {
        let rec = IterationRecord {
            k: 0,
            j: 1.0,
            j_kv: 2.0,
            grad_norm: 3.0,
            v_inf_sigma: 4.0,
            t: 5.0,
            d_h: 6.0,
            wall_ms: 7.0,
        };
        let text = history_csv(&[rec]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "k,J,J_KV,grad_norm,v_inf_sigma,t,d_H,wall_ms");
        let row = lines.next().unwrap();
        assert!(row.starts_with("0,1.0000000000000000e0,"));
        assert_eq!(row.split(',').count(), 8);
    }
}
