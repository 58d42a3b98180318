//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex<f64>`. The SVD used
//! for null-space projection is a one-sided (Hestenes) Jacobi iteration. It
//! returns the *full* right singular basis `V` (`n × n`) directly, including
//! the null-space columns of a wide channel matrix, and is accurate to the
//! working precision relative to each singular value.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

const MAX_SWEEPS: usize = 80;

/// `‖A‖_F`.
pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `(A + A^H) / 2`; exact Hermitian symmetry for matrices that are Hermitian
/// up to rounding.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Singular value decomposition `H = U Σ V^H` of an `m × n` complex matrix.
///
/// `u` is `m × m` unitary, `v` is `n × n` unitary and `singular_values` holds
/// the `min(m, n)` diagonal entries of `Σ` in nonincreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    /// Rebuild `U Σ V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let mut sigma = ComplexMatrix::zeros(m, n);
        for (i, s) in self.singular_values.iter().enumerate() {
            sigma[(i, i)] = Complex64::new(*s, 0.0);
        }
        &self.u * sigma * self.v.adjoint()
    }
}

/// One-sided Jacobi SVD.
///
/// Columns of `G = H V` are orthogonalised pairwise by unitary plane
/// rotations accumulated into `V`; at convergence the column norms are the
/// singular values and the normalised nonzero columns are the left singular
/// vectors. Columns that collapse to (numerically) zero are replaced by an
/// orthonormal completion so `U` is always square and unitary.
pub fn jacobi_svd(h: &ComplexMatrix) -> Svd {
    let (m, n) = h.shape();
    let mut g = h.clone();
    let mut v = ComplexMatrix::identity(n, n);

    let scale = frobenius(h);
    // Rotations on columns this small only shuffle rounding noise.
    let negligible = (f64::EPSILON * scale).powi(2);
    let tol = f64::EPSILON * (m.max(n) as f64);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let gp = g.column(p);
                    let gq = g.column(q);
                    (gp.norm_squared(), gq.norm_squared(), gp.dotc(&gq))
                };
                let gamma_abs = gamma.norm();
                if gamma_abs <= tol * (alpha * beta).sqrt() || gamma_abs <= negligible {
                    continue;
                }
                rotated = true;

                // Remove the phase of gamma, then apply a real Jacobi rotation.
                let phase = Complex64::from_polar(1.0, -gamma.arg());
                let zeta = (beta - alpha) / (2.0 * gamma_abs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut g, p, q, c, s, phase);
                rotate_columns(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| g.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let l = m.min(n);
    let sigma_max = order.first().map(|&j| norms[j]).unwrap_or(0.0);
    let nonzero = f64::EPSILON * (m.max(n) as f64) * sigma_max;

    let mut v_sorted = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        v_sorted.set_column(dst, &v.column(src));
    }

    let mut singular_values = Vec::with_capacity(l);
    let mut u_cols: Vec<ComplexVector> = Vec::with_capacity(m);
    for &j in order.iter().take(l) {
        let sigma = norms[j];
        singular_values.push(sigma);
        if sigma > nonzero && sigma > 0.0 {
            u_cols.push(g.column(j).unscale(sigma));
        }
    }
    let u = complete_orthonormal(m, &u_cols);

    Svd {
        u,
        singular_values,
        v: v_sorted,
    }
}

fn rotate_columns(a: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    for r in 0..a.nrows() {
        let ap = a[(r, p)];
        let aq = a[(r, q)] * phase;
        a[(r, p)] = ap * c - aq * s;
        a[(r, q)] = ap * s + aq * c;
    }
}

/// Extend orthonormal columns to an `m × m` unitary matrix.
///
/// Leading columns are kept (re-orthogonalised); the remainder is filled from
/// the standard basis by twice-iterated modified Gram-Schmidt, picking the
/// candidate with the largest residual each time.
pub fn complete_orthonormal(m: usize, leading: &[ComplexVector]) -> ComplexMatrix {
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(m);
    for col in leading.iter().take(m) {
        if let Some(q) = orthogonalize(col.clone(), &basis) {
            basis.push(q);
        }
    }
    while basis.len() < m {
        let best = (0..m)
            .map(|i| {
                let mut e = ComplexVector::zeros(m);
                e[i] = Complex64::new(1.0, 0.0);
                let r = project_out(e, &basis);
                let r = project_out(r, &basis);
                (r.norm(), r)
            })
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("m > basis.len() >= 0");
        basis.push(best.1.unscale(best.0));
    }
    let mut out = ComplexMatrix::zeros(m, m);
    for (j, q) in basis.iter().enumerate() {
        out.set_column(j, q);
    }
    out
}

fn project_out(mut x: ComplexVector, basis: &[ComplexVector]) -> ComplexVector {
    for q in basis {
        let coef = q.dotc(&x);
        x.axpy(-coef, q, Complex64::new(1.0, 0.0));
    }
    x
}

fn orthogonalize(x: ComplexVector, basis: &[ComplexVector]) -> Option<ComplexVector> {
    let before = x.norm();
    let r = project_out(project_out(x, basis), basis);
    let after = r.norm();
    (after > 1e-8 * before && after > 0.0).then(|| r.unscale(after))
}
