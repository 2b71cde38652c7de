//! Primal-dual path-following interior-point method for real symmetric
//! block SDPs in the form
//!
//! ```text
//! (P)  min <C, X>   s.t.  <A_i, X> = b_i,  X ⪰ 0
//! (D)  max b^T y    s.t.  Σ y_i A_i + Z = C,  Z ⪰ 0
//! ```
//!
//! Search directions use Nesterov–Todd scaling computed from Cholesky
//! factors and an SVD (`R^T L = U D V^T`, `G = L V D^{-1/2}`), so the scaled
//! iterate is the diagonal `D` and the Lyapunov corrector solve is
//! elementwise. Mehrotra predictor-corrector, infeasible start.

use crate::linalg::real::{cholesky_solve, svd_jacobi, symmetric_eigenvalues, RealMatrix};

pub(crate) struct RealSdp {
    pub dims: Vec<usize>,
    pub c: Vec<RealMatrix>,
    /// Sparse by block: `(block index, coefficient matrix)`.
    pub a: Vec<Vec<(usize, RealMatrix)>>,
    pub b: Vec<f64>,
    /// Every block is the real embedding of a Hermitian block.
    pub embedded: bool,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct IpmOptions {
    pub max_iter: usize,
    pub gap_target: f64,
    pub gap_accept: f64,
    pub residual_target: f64,
    pub residual_accept: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Failed,
}

pub(crate) struct IpmResult {
    pub status: IpmStatus,
    pub x: Vec<RealMatrix>,
    pub y: Vec<f64>,
    pub dual_objective: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// Farkas ray: `y` with `A^T y ⪯ 0, b^T y = 1` for primal infeasibility.
    pub ray: Option<Vec<f64>>,
    pub message: String,
}

type Blocks = Vec<RealMatrix>;

/// Iterations without a better merit before giving up.
const STALL_ITERATIONS: usize = 40;

struct Scaling {
    g: RealMatrix,
    g_inv: RealMatrix,
    w: RealMatrix,
    d: Vec<f64>,
}

impl RealSdp {
    fn apply_a(&self, x: &Blocks) -> Vec<f64> {
        self.a
            .iter()
            .map(|terms| terms.iter().map(|(blk, m)| m.dot(&x[*blk])).sum())
            .collect()
    }

    fn apply_at(&self, y: &[f64]) -> Blocks {
        let mut out: Blocks = self.dims.iter().map(|&n| RealMatrix::zeros(n, n)).collect();
        for (terms, &yi) in self.a.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (blk, m) in terms {
                out[*blk].axpy(yi, m);
            }
        }
        out
    }
}

fn blocks_dot(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn blocks_max_abs(a: &Blocks) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.max_abs()))
}

/// Projects a real `2n x 2n` symmetric matrix onto the embedded-Hermitian
/// subspace `[[A, -B], [B, A]]`.
fn project_embedded(m: &RealMatrix) -> RealMatrix {
    let n = m.rows() / 2;
    let mut out = m.clone();
    for i in 0..n {
        for j in 0..n {
            let a = 0.5 * (m[(i, j)] + m[(i + n, j + n)]);
            let b = 0.5 * (m[(i + n, j)] - m[(i, j + n)]);
            out[(i, j)] = a;
            out[(i + n, j + n)] = a;
            out[(i + n, j)] = b;
            out[(i, j + n)] = -b;
        }
    }
    out.symmetrize()
}

fn nt_scaling(x: &RealMatrix, z: &RealMatrix) -> Option<Scaling> {
    let l = x.cholesky()?;
    let r = z.cholesky()?;
    let (_u, s, v) = svd_jacobi(&r.transpose().matmul(&l));
    if s.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let n = x.rows();
    let mut g = l.matmul(&v);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] /= s[j].sqrt();
        }
    }
    let mut g_inv = v.transpose().matmul(&l.lower_triangular_inverse());
    for i in 0..n {
        for j in 0..n {
            g_inv[(i, j)] *= s[i].sqrt();
        }
    }
    let w = g.matmul_t(&g).symmetrize();
    Some(Scaling { g, g_inv, w, d: s })
}

/// Largest step `t` such that `diag(d) + t * m ⪰ 0` (capped at `1e6`).
fn max_step(d: &[f64], m: &RealMatrix) -> f64 {
    let n = d.len();
    let mut scaled = m.clone();
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] /= (d[i] * d[j]).sqrt();
        }
    }
    let lmin = symmetric_eigenvalues(&scaled.symmetrize())[0];
    if lmin >= 0.0 {
        1e6
    } else {
        (-1.0 / lmin).min(1e6)
    }
}

struct Direction {
    dx: Blocks,
    dy: Vec<f64>,
    dz: Blocks,
}

enum SchurFactor {
    Cholesky(RealMatrix),
    Dense(RealMatrix),
}

impl SchurFactor {
    fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        match self {
            SchurFactor::Cholesky(l) => Some(cholesky_solve(l, rhs)),
            SchurFactor::Dense(m) => m.solve_lu(rhs),
        }
    }
}

fn factor_schur(m: &RealMatrix) -> SchurFactor {
    if let Some(l) = m.cholesky() {
        return SchurFactor::Cholesky(l);
    }
    let scale = (0..m.rows()).fold(0.0f64, |s, i| s.max(m[(i, i)].abs())).max(1e-300);
    let mut reg = m.clone();
    for i in 0..m.rows() {
        reg[(i, i)] += 1e-13 * scale;
    }
    match reg.cholesky() {
        Some(l) => SchurFactor::Cholesky(l),
        None => SchurFactor::Dense(m.clone()),
    }
}

pub(crate) fn solve(p: &RealSdp, opt: &IpmOptions) -> IpmResult {
    let m = p.b.len();
    let nb = p.dims.len();
    let n_total: usize = p.dims.iter().sum();

    let a_norms: Vec<f64> = p
        .a
        .iter()
        .map(|t| t.iter().map(|(_, mat)| mat.dot(mat)).sum::<f64>().sqrt())
        .collect();
    let c_norm = p.c.iter().map(|c| c.dot(c)).sum::<f64>().sqrt();
    let n_max = p.dims.iter().copied().max().unwrap_or(1) as f64;
    let xi = p
        .b
        .iter()
        .zip(&a_norms)
        .map(|(bi, an)| n_max * (1.0 + bi.abs()) / (1.0 + an))
        .fold(10f64.max(n_max.sqrt()), f64::max);
    let eta = a_norms
        .iter()
        .copied()
        .fold(10f64.max(n_max.sqrt()).max(c_norm), f64::max);

    let mut x: Blocks = p.dims.iter().map(|&n| RealMatrix::identity(n).scale(xi)).collect();
    let mut z: Blocks = p.dims.iter().map(|&n| RealMatrix::identity(n).scale(eta)).collect();
    let mut y = vec![0.0; m];

    let mut best: Option<(f64, Blocks, Vec<f64>, Blocks, usize)> = None;
    let mut message = String::from("iteration limit reached");
    let mut iterations = 0;

    let evaluate = |x: &Blocks, y: &[f64], z: &Blocks| {
        let ax = p.apply_a(x);
        let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = p.apply_at(y);
        let rd: Blocks = (0..nb).map(|k| p.c[k].sub(&z[k]).sub(&aty[k])).collect();
        let pobj = blocks_dot(&p.c, x);
        let dobj: f64 = p.b.iter().zip(y).map(|(b, v)| b * v).sum();
        let pinf = rp.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let dinf = blocks_max_abs(&rd);
        (rp, rd, pobj, dobj, pinf, dinf)
    };

    for iter in 0..opt.max_iter {
        iterations = iter;
        let (rp, rd, pobj, dobj, pinf, dinf) = evaluate(&x, &y, &z);
        let gap = (pobj - dobj).abs();
        let mu = blocks_dot(&x, &z) / n_total as f64;
        log::trace!("ipm {iter}: gap {gap:.3e} pinf {pinf:.2e} dinf {dinf:.2e} mu {mu:.2e}");

        let merit = (gap / opt.gap_accept)
            .max(pinf / opt.residual_accept)
            .max(dinf / opt.residual_accept);
        if best.as_ref().is_none_or(|b| merit <= b.0) {
            best = Some((merit, x.clone(), y.clone(), z.clone(), iter));
        }

        if best.as_ref().is_some_and(|b| iter > b.4 + STALL_ITERATIONS) {
            message = "no progress".into();
            break;
        }
        if gap <= opt.gap_target && pinf <= opt.residual_target && dinf <= opt.residual_target {
            return finish(p, IpmStatus::Optimal, x, y, z, iter, None, "converged".into());
        }

        // Farkas ray for primal infeasibility: A^T y ⪯ 0 with b^T y > 0.
        if dobj > 1e5 * (1.0 + c_norm) {
            let ray: Vec<f64> = y.iter().map(|v| v / dobj).collect();
            let aty = p.apply_at(&ray);
            let worst = aty
                .iter()
                .map(|blk| -symmetric_eigenvalues(&blk.scale(-1.0))[0])
                .fold(f64::NEG_INFINITY, f64::max);
            if worst <= 1e-8 {
                return finish(
                    p,
                    IpmStatus::PrimalInfeasible,
                    x,
                    y,
                    z,
                    iter,
                    Some(ray),
                    "primal infeasible (dual improving ray)".into(),
                );
            }
        }
        if pobj < -1e5 * (1.0 + p.b.iter().fold(0.0f64, |a, v| a.max(v.abs()))) {
            let xs: Blocks = x.iter().map(|b| b.scale(-1.0 / pobj)).collect();
            let ax = p.apply_a(&xs);
            if ax.iter().all(|v| v.abs() <= 1e-8) {
                return finish(p, IpmStatus::DualInfeasible, x, y, z, iter, None, "dual infeasible (primal unbounded)".into());
            }
        }

        let Some(scalings) = x
            .iter()
            .zip(&z)
            .map(|(xb, zb)| nt_scaling(xb, zb))
            .collect::<Option<Vec<_>>>()
        else {
            message = "iterate lost positive definiteness".into();
            break;
        };

        // Schur complement M_ij = <A_i, W A_j W>.
        let wajw: Vec<Vec<(usize, RealMatrix)>> = p
            .a
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|(blk, a)| {
                        let w = &scalings[*blk].w;
                        (*blk, w.matmul(a).matmul(w))
                    })
                    .collect()
            })
            .collect();
        let mut schur = RealMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut s = 0.0;
                for (bi, ai) in &p.a[i] {
                    for (bj, wj) in &wajw[j] {
                        if bi == bj {
                            s += ai.dot(wj);
                        }
                    }
                }
                schur[(i, j)] = s;
                schur[(j, i)] = s;
            }
        }
        let factor = factor_schur(&schur);

        let w_rd_w: Blocks = (0..nb)
            .map(|k| scalings[k].w.matmul(&rd[k]).matmul(&scalings[k].w))
            .collect();
        let a_wrdw = p.apply_a(&w_rd_w);

        let direction = |rc: &Blocks| -> Option<Direction> {
            let a_rc = p.apply_a(rc);
            let rhs: Vec<f64> = (0..m).map(|i| rp[i] - a_rc[i] + a_wrdw[i]).collect();
            let dy = factor.solve(&rhs)?;
            if dy.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let at_dy = p.apply_at(&dy);
            let dz: Blocks = (0..nb).map(|k| rd[k].sub(&at_dy[k]).symmetrize()).collect();
            let dx: Blocks = (0..nb)
                .map(|k| {
                    let w = &scalings[k].w;
                    rc[k].sub(&w.matmul(&dz[k]).matmul(w)).symmetrize()
                })
                .collect();
            Some(Direction { dx, dy, dz })
        };

        let scaled = |dir: &Direction| -> (Blocks, Blocks) {
            let sx = (0..nb)
                .map(|k| {
                    let s = &scalings[k];
                    s.g_inv.matmul(&dir.dx[k]).matmul_t(&s.g_inv).symmetrize()
                })
                .collect();
            let sz = (0..nb)
                .map(|k| {
                    let s = &scalings[k];
                    s.g.transpose().matmul(&dir.dz[k]).matmul(&s.g).symmetrize()
                })
                .collect();
            (sx, sz)
        };

        let steps = |sx: &Blocks, sz: &Blocks| -> (f64, f64) {
            let ap = (0..nb).map(|k| max_step(&scalings[k].d, &sx[k])).fold(f64::INFINITY, f64::min);
            let ad = (0..nb).map(|k| max_step(&scalings[k].d, &sz[k])).fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        // Predictor: affine-scaling direction, Rc = -X.
        let rc_aff: Blocks = x.iter().map(|b| b.scale(-1.0)).collect();
        let Some(pred) = direction(&rc_aff) else {
            message = "Schur complement solve failed".into();
            break;
        };
        let (sx_p, sz_p) = scaled(&pred);
        let (ap_max, ad_max) = steps(&sx_p, &sz_p);
        let ap = ap_max.min(1.0);
        let ad = ad_max.min(1.0);
        let mut mu_aff = 0.0;
        for k in 0..nb {
            let xa = x[k].add(&pred.dx[k].scale(ap));
            let za = z[k].add(&pred.dz[k].scale(ad));
            mu_aff += xa.dot(&za);
        }
        mu_aff /= n_total as f64;
        let expon = if ap.min(ad) > 0.5 { 3.0 } else { 2.0 };
        let sigma = (mu_aff / mu).max(0.0).powf(expon).min(1.0);

        // Corrector: V D + D V = 2 (σμI − D² − sym(dX̃ dZ̃)) with V = diag(d).
        let rc_corr: Blocks = (0..nb)
            .map(|k| {
                let s = &scalings[k];
                let n = s.d.len();
                let cross = sx_p[k].matmul(&sz_p[k]);
                let mut dd = RealMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let mut r = -0.5 * (cross[(i, j)] + cross[(j, i)]);
                        if i == j {
                            r += sigma * mu - s.d[i] * s.d[i];
                        }
                        dd[(i, j)] = 2.0 * r / (s.d[i] + s.d[j]);
                    }
                }
                s.g.matmul(&dd).matmul_t(&s.g).symmetrize()
            })
            .collect();
        let Some(corr) = direction(&rc_corr) else {
            message = "Schur complement solve failed".into();
            break;
        };
        let (sx_c, sz_c) = scaled(&corr);
        let (ap_max, ad_max) = steps(&sx_c, &sz_c);
        let tau = 0.9 + 0.09 * ap.min(ad);
        let ap = (tau * ap_max).min(1.0);
        let ad = (tau * ad_max).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            message = "step length stagnated".into();
            break;
        }

        // Backtrack when round-off pushes a trial iterate off the cone.
        let (mut ap, mut ad) = (ap, ad);
        let mut accepted = None;
        for _ in 0..40 {
            let trial = |v: &Blocks, d: &Blocks, a: f64| -> Option<Blocks> {
                v.iter()
                    .zip(d)
                    .map(|(b, db)| {
                        let mut nb = b.clone();
                        nb.axpy(a, db);
                        let nb = if p.embedded { project_embedded(&nb) } else { nb.symmetrize() };
                        nb.cholesky().map(|_| nb)
                    })
                    .collect()
            };
            match (trial(&x, &corr.dx, ap), trial(&z, &corr.dz, ad)) {
                (Some(nx), Some(nz)) => {
                    accepted = Some((nx, nz));
                    break;
                }
                (px, pz) => {
                    if px.is_none() {
                        ap *= 0.5;
                    }
                    if pz.is_none() {
                        ad *= 0.5;
                    }
                }
            }
        }
        let Some((nx, nz)) = accepted else {
            message = "iterate lost positive definiteness".into();
            break;
        };
        x = nx;
        z = nz;
        for (yi, d) in y.iter_mut().zip(&corr.dy) {
            *yi += ad * d;
        }
        iterations = iter + 1;
    }

    // Fall back to the best iterate seen and check the acceptance thresholds.
    let (x, y, z, it) = match best {
        Some((_, bx, by, bz, bi)) => {
            let (_, _, pobj, dobj, pinf, dinf) = evaluate(&x, &y, &z);
            let last_merit = ((pobj - dobj).abs() / opt.gap_accept)
                .max(pinf / opt.residual_accept)
                .max(dinf / opt.residual_accept);
            let (_, _, bp, bd, bpi, bdi) = evaluate(&bx, &by, &bz);
            let best_merit = ((bp - bd).abs() / opt.gap_accept)
                .max(bpi / opt.residual_accept)
                .max(bdi / opt.residual_accept);
            if last_merit <= best_merit {
                (x, y, z, iterations)
            } else {
                (bx, by, bz, bi)
            }
        }
        None => (x, y, z, iterations),
    };
    let (_, _, pobj, dobj, pinf, dinf) = evaluate(&x, &y, &z);
    let status = if (pobj - dobj).abs() <= opt.gap_accept
        && pinf <= opt.residual_accept
        && dinf <= opt.residual_accept
    {
        IpmStatus::Optimal
    } else {
        IpmStatus::Failed
    };
    if status == IpmStatus::Optimal {
        message = format!("accepted at relaxed tolerance ({message})");
    }
    finish(p, status, x, y, z, it, None, message)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: &RealSdp,
    status: IpmStatus,
    x: Blocks,
    y: Vec<f64>,
    z: Blocks,
    iterations: usize,
    ray: Option<Vec<f64>>,
    message: String,
) -> IpmResult {
    let aty = p.apply_at(&y);
    let dual_residual = (0..p.dims.len())
        .map(|k| p.c[k].sub(&z[k]).sub(&aty[k]).max_abs())
        .fold(0.0, f64::max);
    IpmResult {
        status,
        dual_objective: p.b.iter().zip(&y).map(|(b, v)| b * v).sum(),
        dual_residual,
        x,
        y,
        iterations,
        ray,
        message,
    }
}
