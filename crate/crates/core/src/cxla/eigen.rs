use super::{abs1, inverse, vec_norm, CMatrix, CNum, LinalgError, MAX_ORDER};

/// Default relative deflation tolerance for the QR iteration.
pub const DEFAULT_EIG_TOL: f64 = f64::EPSILON;

/// Eigenvector matrices with a 1-norm condition estimate above this are
/// reported as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

/// QR sweeps allowed per unit of matrix order.
const SWEEPS_PER_ORDER: usize = 100;

/// Relative gap below which real parts are considered tied when sorting.
const SORT_TIE_RATIO: f64 = 1e-9;

const ZERO: CNum = CNum::new(0.0, 0.0);
const ONE: CNum = CNum::new(1.0, 0.0);

/// Eigenvalues sorted by (real, imaginary) part with matching unit-norm
/// eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<CNum>,
    /// Column `m` is the eigenvector of `eigenvalues[m]`.
    pub eigenvectors: CMatrix,
    /// `||V||_1 ||V^-1||_1`, infinite if `V` is numerically singular.
    pub condition_estimate: f64,
}

impl EigenDecomposition {
    /// Largest column residual `||A v_m - a_m v_m||`.
    pub fn max_residual(&self, a: &CMatrix) -> f64 {
        (0..a.n())
            .map(|m| {
                let v = self.eigenvectors.column(m);
                let av = a.mul_vec(&v);
                let r: Vec<CNum> = av
                    .iter()
                    .zip(&v)
                    .map(|(x, y)| x - self.eigenvalues[m] * y)
                    .collect();
                vec_norm(&r)
            })
            .fold(0.0, f64::max)
    }

    /// `||A V - V diag(a)||_F`.
    pub fn residual_frobenius(&self, a: &CMatrix) -> f64 {
        let av = a.matmul(&self.eigenvectors);
        let vd = CMatrix::from_fn(a.n(), |i, j| self.eigenvectors[(i, j)] * self.eigenvalues[j]);
        av.sub(&vd).frobenius_norm()
    }
}

/// Eigendecomposition of a general complex matrix.
///
/// `tol` is the relative deflation threshold of the QR iteration; pass
/// [`DEFAULT_EIG_TOL`] unless there is a reason not to.
pub fn eig(a: &CMatrix, tol: f64) -> Result<EigenDecomposition, LinalgError> {
    let d = eig_unchecked(a, tol)?;
    if !(d.condition_estimate <= DEFECTIVE_CONDITION) {
        return Err(LinalgError::DefectiveMatrix {
            condition: d.condition_estimate,
            limit: DEFECTIVE_CONDITION,
        });
    }
    Ok(d)
}

/// Eigenvalues only, sorted as in [`eig`]. Defective matrices are accepted.
pub fn eigenvalues(a: &CMatrix, tol: f64) -> Result<Vec<CNum>, LinalgError> {
    Ok(eig_unchecked(a, tol)?.eigenvalues)
}

/// Same as [`eig`] but returns ill-conditioned eigenvector sets instead of
/// rejecting them.
pub(crate) fn eig_unchecked(a: &CMatrix, tol: f64) -> Result<EigenDecomposition, LinalgError> {
    let n = a.n();
    if n == 0 || n > MAX_ORDER {
        return Err(LinalgError::UnsupportedOrder(n));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let tol = if tol > 0.0 { tol } else { DEFAULT_EIG_TOL };

    let (mut t, mut q) = hessenberg(a);
    schur(&mut t, &mut q, tol)?;

    let eigenvalues: Vec<CNum> = (0..n).map(|i| t[(i, i)]).collect();
    let y = triangular_eigenvectors(&t);
    let mut v = q.matmul(&y);
    for j in 0..n {
        let col = v.column(j);
        let s = vec_norm(&col);
        if s > 0.0 {
            let col: Vec<CNum> = col.iter().map(|z| z / s).collect();
            v.set_column(j, &col);
        }
    }

    let order = sorted_order(&eigenvalues);
    let eigenvalues: Vec<CNum> = order.iter().map(|&k| eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    let condition_estimate = match inverse(&eigenvectors) {
        Ok(inv) => (eigenvectors.norm_1() * inv.norm_1()).max(1.0),
        Err(_) => f64::INFINITY,
    };

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        condition_estimate,
    })
}

/// Lexicographic order by (re, im). Real parts that agree to within a small
/// relative gap are tied so that rounding noise cannot reorder eigenvalues
/// sharing a real part.
fn sorted_order(vals: &[CNum]) -> Vec<usize> {
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let gap = SORT_TIE_RATIO * scale;
    let mut by_re: Vec<usize> = (0..vals.len()).collect();
    by_re.sort_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re).then(a.cmp(&b)));

    let mut cluster_of = vec![0usize; vals.len()];
    let mut cluster = 0;
    let mut anchor = vals[by_re[0]].re;
    for &k in &by_re {
        if vals[k].re - anchor > gap {
            cluster += 1;
            anchor = vals[k].re;
        }
        cluster_of[k] = cluster;
    }
    by_re.sort_by(|&a, &b| {
        cluster_of[a]
            .cmp(&cluster_of[b])
            .then(vals[a].im.total_cmp(&vals[b].im))
            .then(a.cmp(&b))
    });
    by_re
}

/// Householder reduction `A = Q H Q^H` with `H` upper Hessenberg.
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.n();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<CNum> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let Some(v) = householder_vector(&x) else {
            continue;
        };
        apply_reflector_left(&mut h, &v, k + 1, 0);
        apply_reflector_right(&mut h, &v, k + 1);
        apply_reflector_right(&mut q, &v, k + 1);
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Unit vector `v` such that `(I - 2 v v^H) x` is a multiple of `e_1`.
fn householder_vector(x: &[CNum]) -> Option<Vec<CNum>> {
    let xnorm = vec_norm(x);
    if xnorm == 0.0 || x[1..].iter().all(|z| *z == ZERO) {
        return None;
    }
    let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
    let alpha = -phase * xnorm;
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vn = vec_norm(&v);
    if vn == 0.0 {
        return None;
    }
    v.iter_mut().for_each(|z| *z /= vn);
    Some(v)
}

/// `M <- (I - 2 v v^H) M` acting on rows `offset..`, columns `col_start..`.
fn apply_reflector_left(m: &mut CMatrix, v: &[CNum], offset: usize, col_start: usize) {
    for j in col_start..m.n() {
        let s: CNum = v
            .iter()
            .enumerate()
            .map(|(i, vi)| vi.conj() * m[(offset + i, j)])
            .sum();
        let s2 = s * 2.0;
        for (i, vi) in v.iter().enumerate() {
            m[(offset + i, j)] -= vi * s2;
        }
    }
}

/// `M <- M (I - 2 v v^H)` acting on columns `offset..`.
fn apply_reflector_right(m: &mut CMatrix, v: &[CNum], offset: usize) {
    for i in 0..m.n() {
        let s: CNum = v
            .iter()
            .enumerate()
            .map(|(j, vj)| m[(i, offset + j)] * vj)
            .sum();
        let s2 = s * 2.0;
        for (j, vj) in v.iter().enumerate() {
            m[(i, offset + j)] -= s2 * vj.conj();
        }
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: CNum, b: CNum) -> (f64, CNum) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, ONE);
    }
    let an = a.norm();
    let norm = an.hypot(b.norm());
    (an / norm, (a / an) * b.conj() / norm)
}

/// Shifted QR iteration on an upper Hessenberg matrix, reducing it in place
/// to upper triangular Schur form and accumulating the unitary factor in `z`.
fn schur(h: &mut CMatrix, z: &mut CMatrix, tol: f64) -> Result<(), LinalgError> {
    let n = h.n();
    let budget = SWEEPS_PER_ORDER * n;
    let hnorm = h.frobenius_norm();
    let mut sweeps = 0;
    let mut since_deflation = 0;
    let mut hi = n - 1;

    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let mut s = abs1(h[(lo - 1, lo - 1)]) + abs1(h[(lo, lo)]);
            if s == 0.0 {
                s = hnorm;
            }
            if abs1(h[(lo, lo - 1)]) <= tol * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if sweeps >= budget {
            return Err(LinalgError::NonConvergence { sweeps });
        }
        sweeps += 1;
        since_deflation += 1;

        let shift = if since_deflation % 10 == 0 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + CNum::new(0.75 * abs1(h[(hi, hi - 1)]), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(h, z, lo, hi, shift);
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: CNum, b: CNum, c: CNum, d: CNum) -> CNum {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let m1 = mid + disc;
    let m2 = mid - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// One explicit shifted QR step on the active window `lo..=hi`, applied to
/// the full matrix so the result stays a Schur form of the original.
fn qr_sweep(h: &mut CMatrix, z: &mut CMatrix, lo: usize, hi: usize, shift: CNum) {
    let n = h.n();
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..n {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        h[(k + 1, k)] = ZERO;
        rotations.push((c, s));
    }
    for (k, &(c, s)) in (lo..hi).zip(&rotations) {
        for i in 0..=(k + 1).min(hi) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + s.conj() * y;
            h[(i, k + 1)] = -s * x + y * c;
        }
        for i in 0..n {
            let x = z[(i, k)];
            let y = z[(i, k + 1)];
            z[(i, k)] = x * c + s.conj() * y;
            z[(i, k + 1)] = -s * x + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// Eigenvectors of an upper triangular matrix by back-substitution; column
/// `k` belongs to `t[(k, k)]`.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    const RESCALE_ABOVE: f64 = 1e100;
    let n = t.n();
    // Complex division squares the denominator, so the floor must survive that.
    let small = (f64::EPSILON * t.frobenius_norm()).max(1e-150);
    let mut y = CMatrix::zeros(n);
    let mut col = vec![ZERO; n];
    for k in 0..n {
        col.iter_mut().for_each(|x| *x = ZERO);
        col[k] = ONE;
        let lambda = t[(k, k)];
        for i in (0..k).rev() {
            let s: CNum = (i + 1..=k).map(|j| t[(i, j)] * col[j]).sum();
            if s == ZERO {
                continue;
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = CNum::new(small, 0.0);
            }
            col[i] = -s / d;
            let m = col[i].norm();
            if m > RESCALE_ABOVE {
                col[i..=k].iter_mut().for_each(|x| *x /= m);
            }
        }
        y.set_column(k, &col);
    }
    y
}

/// Orthonormal basis of the numerical null space of `m`: singular
/// directions whose pivot in a column-pivoted QR of `m^H` falls below
/// `rel_tol * ||m||_F`.
pub(crate) fn null_space(m: &CMatrix, rel_tol: f64) -> Vec<Vec<CNum>> {
    let n = m.n();
    let mut r = m.conj_transpose();
    let mut q = CMatrix::identity(n);
    let threshold = rel_tol * m.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut col_norms: Vec<f64> = (0..n).map(|j| vec_norm(&r.column(j))).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;

    for k in 0..n {
        let (p, best) = (k..n)
            .map(|j| (j, col_norms[j]))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best <= threshold {
            break;
        }
        if p != k {
            for i in 0..n {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, p)];
                r[(i, p)] = tmp;
            }
            col_norms.swap(k, p);
            perm.swap(k, p);
        }
        let x: Vec<CNum> = (k..n).map(|i| r[(i, k)]).collect();
        if let Some(v) = householder_vector(&x) {
            apply_reflector_left(&mut r, &v, k, k);
            apply_reflector_right(&mut q, &v, k);
        }
        if r[(k, k)].norm() <= threshold {
            break;
        }
        rank = k + 1;
        for j in k + 1..n {
            col_norms[j] = (k + 1..n).map(|i| r[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        }
    }
    (rank..n).map(|j| q.column(j)).collect()
}
