use super::{CMatrix, CNum, LinalgError};

/// Pivots smaller than this multiple of `||M||_inf` are treated as zero.
const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

fn factor(m: &CMatrix) -> Result<Lu, LinalgError> {
    let n = m.n();
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let threshold = SINGULAR_PIVOT_RATIO * m.norm_inf();
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmag <= threshold || pmag == 0.0 {
            return Err(LinalgError::SingularMatrix { pivot: k });
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let l = lu[(i, k)] / pivot;
            lu[(i, k)] = l;
            if l == CNum::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= l * u;
            }
        }
    }
    Ok(Lu { lu, perm })
}

impl Lu {
    fn solve(&self, b: &[CNum]) -> Vec<CNum> {
        let n = self.lu.n();
        let mut x: Vec<CNum> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: CNum = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: CNum = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }
}

/// Solves `M x = b` by LU with partial pivoting, followed by one step of
/// iterative refinement.
pub fn solve_linear(m: &CMatrix, b: &[CNum]) -> Result<Vec<CNum>, LinalgError> {
    if b.len() != m.n() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.n(),
            actual: b.len(),
        });
    }
    let lu = factor(m)?;
    let mut x = lu.solve(b);
    let r: Vec<CNum> = m.mul_vec(&x).iter().zip(b).map(|(mx, bi)| bi - mx).collect();
    let dx = lu.solve(&r);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    Ok(x)
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = m.n();
    let lu = factor(m)?;
    let mut inv = CMatrix::zeros(n);
    let mut e = vec![CNum::new(0.0, 0.0); n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = CNum::new(0.0, 0.0));
        e[j] = CNum::new(1.0, 0.0);
        inv.set_column(j, &lu.solve(&e));
    }
    Ok(inv)
}
