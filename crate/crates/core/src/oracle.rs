//! Reference spectra that share nothing with the Weyl-family machinery.
//!
//! The finite-difference oracle discretizes the quadratic form
//!
//! ```text
//! q[psi] = sum_e int |psi'|^2 + <rho psi, Theta rho psi>,   rho psi in range(Pi)
//! ```
//!
//! of `-A_{Pi,Theta}` with linear elements and lumped mass, which is the
//! standard second-order three-point scheme in the interior. Endpoint values
//! are explicit unknowns `rho = Q c` with `Q` an orthonormal basis of
//! `range(Pi)`, so `(1 - Pi) rho = 0` holds by construction and the flux rows
//! carry `Pi tau = Theta rho`. Scaling by the inverse square root of the mass
//! turns the problem into a plain Hermitian one: a real tridiagonal block for
//! interior nodes bordered by the `c` unknowns. Eigenvalues come from Sturm
//! counts on that bordered matrix.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::krein::{ExtensionParams, WeylSystem};
use crate::models::{GraphModel, IntervalModel};
use num_complex::Complex64;

use crate::numeric::{c, hermitian_eig, CMatrix};

/// Grid for the finite-difference oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FDSpec {
    /// Grid points per edge, endpoints included.
    pub n_nodes: usize,
}

impl FDSpec {
    pub const MIN_NODES: usize = 100;

    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < Self::MIN_NODES {
            return Err(Error::GridTooCoarse(format!(
                "finite-difference oracle needs at least {} nodes per edge, got {n_nodes}",
                Self::MIN_NODES
            )));
        }
        Ok(FDSpec { n_nodes })
    }
}

/// `H = [[T, B], [B*, C]]` with `T` real symmetric tridiagonal.
#[derive(Debug, Clone)]
struct Bordered {
    diag: Vec<f64>,
    /// `off[j]` couples `j` and `j + 1`.
    off: Vec<f64>,
    b: CMatrix,
    c: CMatrix,
    /// `(first index, length)` of each edge's interior chain.
    chains: Vec<(usize, usize)>,
}

fn assemble(lengths: &[f64], p: &ExtensionParams, spec: &FDSpec) -> Result<Bordered> {
    let n = 2 * lengths.len();
    if p.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    let q = p.range_basis();
    let k = q.ncols();
    let intervals = spec.n_nodes - 1;
    let interior = intervals - 1;
    let m = interior * lengths.len();
    let chains: Vec<(usize, usize)> = (0..lengths.len()).map(|e| (e * interior, interior)).collect();
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    // Rows of the unscaled coupling between interior nodes and endpoint values.
    let mut coupling = CMatrix::zeros(m, n);
    let mut stiff_ends = vec![0.0; n];
    let mut mass_ends = vec![0.0; n];
    for (e, &a) in lengths.iter().enumerate() {
        let h = a / intervals as f64;
        let base = e * interior;
        for j in 0..interior {
            diag[base + j] = 2.0 / (h * h);
            if j + 1 < interior {
                off[base + j] = -1.0 / (h * h);
            }
        }
        let s = h.powf(-1.5);
        coupling[(base, 2 * e)] = c(-s, 0.0);
        coupling[(base + interior - 1, 2 * e + 1)] = c(-s, 0.0);
        for l in [2 * e, 2 * e + 1] {
            stiff_ends[l] = 1.0 / h;
            mass_ends[l] = h / 2.0;
        }
    }
    if k == 0 {
        return Ok(Bordered {
            diag,
            off,
            b: CMatrix::zeros(m, 0),
            c: CMatrix::zeros(0, 0),
            chains,
        });
    }
    let dmat = |v: &[f64]| CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, v.iter().map(|&x| c(x, 0.0))));
    let mass_c = crate::numeric::hermitian_part(&(q.adjoint() * dmat(&mass_ends) * q));
    let stiff_c = q.adjoint() * dmat(&stiff_ends) * q + p.theta_block();
    let chol = nalgebra::Cholesky::new(mass_c)
        .ok_or_else(|| Error::Internal("boundary mass block is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&CMatrix::identity(k, k))
        .ok_or_else(|| Error::Internal("singular Cholesky factor".into()))?;
    let b = coupling * q * linv.adjoint();
    let cc = crate::numeric::hermitian_part(&(&linv * stiff_c * linv.adjoint()));
    Ok(Bordered {
        diag,
        off,
        b,
        c: cc,
        chains,
    })
}

impl Bordered {
    fn size(&self) -> usize {
        self.diag.len() + self.c.nrows()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let m = self.diag.len();
        let k = self.c.nrows();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..m {
            let mut r: f64 = (0..k).map(|i| self.b[(j, i)].norm()).sum();
            if j > 0 {
                r += self.off[j - 1].abs();
            }
            if j + 1 < m {
                r += self.off[j].abs();
            }
            lo = lo.min(self.diag[j] - r);
            hi = hi.max(self.diag[j] + r);
        }
        for i in 0..k {
            let r: f64 = (0..k).filter(|&j| j != i).map(|j| self.c[(i, j)].norm()).sum::<f64>()
                + (0..m).map(|j| self.b[(j, i)].norm()).sum::<f64>();
            lo = lo.min(self.c[(i, i)].re - r);
            hi = hi.max(self.c[(i, i)].re + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues below `sigma`.
    ///
    /// Each interior chain is eliminated with Bunch's 1x1 / 2x2 pivoting for
    /// symmetric tridiagonals, so no pivot is ever divided through when it is
    /// small relative to its coupling. The last node (or last two) of every
    /// chain is kept together with the border unknowns in a final dense
    /// block, whose inertia comes from a Hermitian eigensolve. Sylvester's law
    /// adds the pivot inertias to that of the final block.
    fn count_below(&self, sigma: f64) -> Result<usize> {
        const ALPHA: f64 = 0.618_033_988_749_894_9;
        let k = self.c.nrows();
        let mut neg = 0usize;
        let mut schur = &self.c - CMatrix::identity(k, k) * c(sigma, 0.0);
        // Kept nodes: (diag, coupling row to the border, coupling to the previous kept node).
        let mut kept: Vec<(f64, Vec<Complex64>, f64)> = Vec::new();
        let row = |j: usize| -> Vec<Complex64> { (0..k).map(|i| self.b[(j, i)]).collect() };
        let sub_outer = |s: &mut CMatrix, x: &[Complex64], y: &[Complex64], w: f64| {
            for r in 0..k {
                for q in 0..k {
                    s[(r, q)] -= x[r].conj() * y[q] * w;
                }
            }
        };
        for &(start, len) in &self.chains {
            let end = start + len;
            let mut j = start;
            let mut d = self.diag[j] - sigma;
            let mut x = row(j);
            loop {
                if j + 1 == end {
                    kept.push((d, x, 0.0));
                    break;
                }
                let off = self.off[j];
                let a1 = self.diag[j + 1] - sigma;
                let off2 = if j + 2 < end { self.off[j + 1] } else { 0.0 };
                let scale = d.abs().max(a1.abs()).max(off.abs()).max(off2.abs());
                if d.abs() * scale >= ALPHA * off * off {
                    if d < 0.0 {
                        neg += 1;
                    }
                    sub_outer(&mut schur, &x, &x, 1.0 / d);
                    let b1 = row(j + 1);
                    let f = off / d;
                    x = b1.iter().zip(&x).map(|(b, xv)| b - xv * f).collect();
                    d = a1 - off * f;
                    j += 1;
                    continue;
                }
                if j + 2 == end {
                    // Both remaining nodes go to the dense block.
                    kept.push((d, x, 0.0));
                    kept.push((a1, row(j + 1), off));
                    break;
                }
                // 2x2 pivot [[d, off], [off, a1]]; det < 0 by the pivoting rule.
                let det = d * a1 - off * off;
                neg += if det < 0.0 {
                    1
                } else if d + a1 < 0.0 {
                    2
                } else {
                    0
                };
                let inv = [[a1 / det, -off / det], [-off / det, d / det]];
                let x1 = row(j + 1);
                // S -= [x; x1]^* P^{-1} [x; x1]
                for r in 0..k {
                    for q in 0..k {
                        let v = x[r].conj() * (x[q] * inv[0][0] + x1[q] * inv[0][1])
                            + x1[r].conj() * (x[q] * inv[1][0] + x1[q] * inv[1][1]);
                        schur[(r, q)] -= v;
                    }
                }
                // Node j + 2 couples to j + 1 only.
                let b2 = row(j + 2);
                let a2 = self.diag[j + 2] - sigma;
                d = a2 - off2 * off2 * inv[1][1];
                x = (0..k)
                    .map(|i| b2[i] - (x[i] * inv[1][0] + x1[i] * inv[1][1]) * off2)
                    .collect();
                j += 2;
            }
        }
        let f = k + kept.len();
        let mut block = CMatrix::zeros(f, f);
        block.view_mut((0, 0), (k, k)).copy_from(&schur);
        for (t, (dv, xv, prev)) in kept.iter().enumerate() {
            let idx = k + t;
            block[(idx, idx)] = c(*dv, 0.0);
            for i in 0..k {
                block[(idx, i)] = xv[i];
                block[(i, idx)] = xv[i].conj();
            }
            if *prev != 0.0 {
                block[(idx, idx - 1)] = c(*prev, 0.0);
                block[(idx - 1, idx)] = c(*prev, 0.0);
            }
        }
        let eig = hermitian_eig(&crate::numeric::hermitian_part(&block))?;
        Ok(neg + eig.values.iter().filter(|&&v| v < 0.0).count())
    }

    /// The `count` smallest eigenvalues, ascending.
    fn lowest(&self, count: usize) -> Result<Vec<f64>> {
        let (glo, ghi) = self.gershgorin();
        let mut out = Vec::with_capacity(count);
        let mut floor = glo;
        for idx in 0..count {
            let (mut lo, mut hi) = (floor, ghi);
            for _ in 0..300 {
                let mid = 0.5 * (lo + hi);
                if hi - lo <= 1e-13 * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid)? > idx {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let v = 0.5 * (lo + hi);
            out.push(v);
            floor = lo;
        }
        Ok(out)
    }

    fn dense(&self) -> CMatrix {
        let m = self.diag.len();
        let k = self.c.nrows();
        let mut h = CMatrix::zeros(m + k, m + k);
        for j in 0..m {
            h[(j, j)] = c(self.diag[j], 0.0);
            if j + 1 < m {
                h[(j, j + 1)] = c(self.off[j], 0.0);
                h[(j + 1, j)] = c(self.off[j], 0.0);
            }
        }
        h.view_mut((0, m), (m, k)).copy_from(&self.b);
        h.view_mut((m, 0), (k, m)).copy_from(&self.b.adjoint());
        h.view_mut((m, m), (k, k)).copy_from(&self.c);
        h
    }
}

fn spectrum(lengths: &[f64], p: &ExtensionParams, spec: &FDSpec, count: usize) -> Result<Vec<f64>> {
    let h = assemble(lengths, p, spec)?;
    if count > h.size() {
        return Err(Error::GridTooCoarse(format!(
            "asked for {count} eigenvalues of a {}-dimensional discretization",
            h.size()
        )));
    }
    Ok(h.lowest(count)?.into_iter().map(|mu| -mu).collect())
}

/// The `count` eigenvalues of the discretized `d^2/dx^2` closest to the top
/// of the spectrum, i.e. the lowest modes, ordered `0 >= l_1 >= l_2 >= ...`
/// for a nonpositive operator.
pub fn fd_interval_spectrum(m: &IntervalModel, p: &ExtensionParams, spec: &FDSpec, count: usize) -> Result<Vec<f64>> {
    spectrum(&[m.length()], p, spec, count)
}

/// Graph version of [`fd_interval_spectrum`]; `spec.n_nodes` applies per edge.
pub fn fd_graph_spectrum(g: &GraphModel, p: &ExtensionParams, spec: &FDSpec, count: usize) -> Result<Vec<f64>> {
    if p.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: p.dim(),
        });
    }
    spectrum(&g.lengths(), p, spec, count)
}

/// All eigenvalues of the discretization by dense diagonalization, same
/// ordering as the Sturm path. Intended for small grids.
pub fn fd_graph_spectrum_dense(lengths: &[f64], p: &ExtensionParams, spec: &FDSpec) -> Result<Vec<f64>> {
    let h = assemble(lengths, p, spec)?.dense();
    let mut v: Vec<f64> = hermitian_eig(&h)?.values.into_iter().map(|mu| -mu).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

/// Bound state of a single point interaction of strength `alpha`:
/// the root of `alpha + sqrt(lambda) / (4 pi) = 0` with `sqrt(lambda) > 0`.
pub fn single_point_eigenvalue(alpha: f64) -> Option<f64> {
    (alpha < 0.0).then_some(16.0 * PI * PI * alpha * alpha)
}
