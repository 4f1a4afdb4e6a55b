use crate::scalar::Scalar;

/// Determinant by Gaussian elimination. Exact for rationals; for floats the
/// pivot is the entry of largest magnitude in the column.
pub fn determinant<S: Scalar>(mut m: Vec<Vec<S>>) -> S {
    let n = m.len();
    let mut det = S::one();
    for col in 0..n {
        let pivot = if S::EXACT {
            (col..n).find(|&r| !m[r][col].is_zero())
        } else {
            (col..n).filter(|&r| !m[r][col].is_zero()).max_by(|&a, &b| {
                m[a][col]
                    .abs()
                    .partial_cmp(&m[b][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        };
        let Some(p) = pivot else {
            return S::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pv = m[col][col].clone();
        det = det * pv.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone() / pv.clone();
            for c in col..n {
                let sub = factor.clone() * m[col][c].clone();
                m[r][c] = m[r][c].clone() - sub;
            }
        }
    }
    det
}

/// Determinant of a small `f64` matrix with partial pivoting.
pub fn determinant_f64(m: &[Vec<f64>]) -> f64 {
    determinant(m.to_vec())
}
