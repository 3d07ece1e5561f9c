//! `Delta phi = omega` in the unit disc with `phi = 0` on the circle.
//!
//! Unknowns live on the masked nodes. A 5-point stencil arm that leaves the disc is replaced
//! by a ghost value extrapolated linearly through the circle crossing at distance `theta h`,
//! which keeps the matrix symmetric: the arm's contribution becomes `(1 - 1/theta) phi_i`.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::par;
use crate::wente::grid::{DiscField, PlaneGrid};

/// Smallest stencil fraction; closer crossings are clamped to keep the diagonal finite.
const THETA_MIN: f64 = 1e-8;

/// Sparse symmetric negative-definite operator `h^2 Delta` on the disc nodes.
struct DiscLaplacian {
    /// Grid index of each unknown.
    nodes: Vec<usize>,
    /// Unknown index of each neighbour (E, W, N, S), `usize::MAX` when the arm leaves the disc.
    neighbours: Vec<[usize; 4]>,
    diag: Vec<f64>,
}

impl DiscLaplacian {
    fn new(grid: PlaneGrid) -> Self {
        let n = grid.n;
        let mut unknown = vec![usize::MAX; grid.len()];
        let mut nodes = Vec::new();
        for i1 in 0..n {
            for i2 in 0..n {
                if grid.inside(i1, i2) {
                    unknown[grid.index(i1, i2)] = nodes.len();
                    nodes.push(grid.index(i1, i2));
                }
            }
        }
        let h = grid.h();
        let mut neighbours = Vec::with_capacity(nodes.len());
        let mut diag = Vec::with_capacity(nodes.len());
        for &idx in &nodes {
            let (i1, i2) = (idx / n, idx % n);
            let (x, y) = (grid.x(i1), grid.x(i2));
            let mut arms = [usize::MAX; 4];
            let mut d = 0.0;
            let steps: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
            for (k, (s1, s2)) in steps.iter().enumerate() {
                let (j1, j2) = (i1 as isize + s1, i2 as isize + s2);
                let inside = j1 >= 0
                    && j2 >= 0
                    && (j1 as usize) < n
                    && (j2 as usize) < n
                    && grid.inside(j1 as usize, j2 as usize);
                if inside {
                    arms[k] = unknown[grid.index(j1 as usize, j2 as usize)];
                    d -= 1.0;
                } else {
                    // Distance to the circle along the arm, in units of h.
                    let (along, across) = if *s1 != 0 {
                        (x * *s1 as f64, y)
                    } else {
                        (y * *s2 as f64, x)
                    };
                    let reach = (1.0 - across * across).max(0.0).sqrt();
                    let theta = ((reach - along) / h).clamp(THETA_MIN, 1.0);
                    d -= 1.0 / theta;
                }
            }
            neighbours.push(arms);
            diag.push(d);
        }
        Self {
            nodes,
            neighbours,
            diag,
        }
    }

    /// `out = -A x`, which is symmetric positive definite.
    fn apply_negated(&self, x: &[f64], out: &mut [f64]) {
        let vals = par::map_collect(self.nodes.len(), |i| {
            let mut s = self.diag[i] * x[i];
            for &j in &self.neighbours[i] {
                if j != usize::MAX {
                    s += x[j];
                }
            }
            -s
        });
        out.copy_from_slice(&vals);
    }
}

/// Solution of the Dirichlet problem and solver diagnostics.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    /// Zero outside the disc mask.
    pub phi: DiscField,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `Delta phi = omega` on the disc with zero boundary values by Jacobi-preconditioned CG.
pub fn poisson_dirichlet(omega: &DiscField, tol: &Tolerances) -> Result<PoissonSolution> {
    let grid = omega.grid;
    let op = DiscLaplacian::new(grid);
    let m = op.nodes.len();
    let h2 = grid.h() * grid.h();
    let b: Vec<f64> = op.nodes.iter().map(|&i| -h2 * omega.values[i]).collect();
    let b_norm = par::dot(&b, &b).sqrt();
    let mut phi = DiscField::zeros(grid);
    if b_norm == 0.0 {
        return Ok(PoissonSolution {
            phi,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = op.diag.iter().map(|d| -1.0 / d).collect();
    let mut x = vec![0.0; m];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; m];
    let mut rz = par::dot(&r, &z);
    let mut rel = 1.0;
    let mut iterations = 0;
    while iterations < tol.solver_max_iter {
        iterations += 1;
        op.apply_negated(&p, &mut ap);
        let alpha = rz / par::dot(&p, &ap);
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = par::dot(&r, &r).sqrt() / b_norm;
        if rel <= tol.solver_rel {
            break;
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = par::dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    if rel > tol.solver_rel {
        return Err(Error::SolverDiverged {
            iterations,
            residual: rel,
        });
    }
    for (k, &idx) in op.nodes.iter().enumerate() {
        phi.values[idx] = x[k];
    }
    Ok(PoissonSolution {
        phi,
        iterations,
        relative_residual: rel,
    })
}

/// `||grad phi||_{L2(D)}` for a Dirichlet solution, from `int |grad phi|^2 = -int phi omega`.
pub fn dirichlet_energy_norm(sol: &PoissonSolution, omega: &DiscField) -> f64 {
    (-sol.phi.zip_with(omega, |a, b| a * b).disc_integral()).max(0.0).sqrt()
}
