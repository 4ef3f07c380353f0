//! Geometric-mean equilibration with power-of-two factors, so scaling and
//! unscaling are exact in floating point.

const PASSES: usize = 6;

pub(crate) struct Scaling {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub objective: f64,
}

impl Scaling {
    pub fn identity(m: usize, n: usize) -> Self {
        Scaling { row: vec![1.0; m], col: vec![1.0; n], objective: 1.0 }
    }
}

fn pow2(x: f64) -> f64 {
    if !x.is_finite() || x <= 0.0 {
        1.0
    } else {
        2f64.powi(x.log2().round() as i32)
    }
}

/// Computes row and column factors for a column-compressed matrix.
pub(crate) fn equilibrate(
    m: usize,
    col_start: &[usize],
    row_idx: &[usize],
    vals: &[f64],
    cost: &[f64],
) -> Scaling {
    let n = col_start.len() - 1;
    let mut s = Scaling::identity(m, n);
    for _ in 0..PASSES {
        let mut rmin = vec![f64::INFINITY; m];
        let mut rmax = vec![0.0f64; m];
        for j in 0..n {
            for k in col_start[j]..col_start[j + 1] {
                let v = (vals[k] * s.col[j]).abs();
                let i = row_idx[k];
                rmin[i] = rmin[i].min(v);
                rmax[i] = rmax[i].max(v);
            }
        }
        for i in 0..m {
            if rmax[i] > 0.0 {
                s.row[i] = pow2(1.0 / (rmin[i] * rmax[i]).sqrt());
            }
        }
        for j in 0..n {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for k in col_start[j]..col_start[j + 1] {
                let v = (vals[k] * s.row[row_idx[k]]).abs();
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi > 0.0 {
                s.col[j] = pow2(1.0 / (lo * hi).sqrt());
            }
        }
    }
    let cmax = cost
        .iter()
        .zip(&s.col)
        .map(|(c, sc)| (c * sc).abs())
        .fold(0.0f64, f64::max);
    if cmax > 0.0 {
        s.objective = pow2(cmax);
    }
    s
}
