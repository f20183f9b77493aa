//! Minimal compressed-row matrices and Jacobi-preconditioned CG.

use std::collections::BTreeMap;

pub struct CsrBuilder {
    n: usize,
    rows: Vec<BTreeMap<usize, f64>>,
}

impl CsrBuilder {
    pub fn new(n: usize) -> Self {
        CsrBuilder {
            n,
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        *self.rows[i].entry(j).or_insert(0.0) += v;
    }

    pub fn build(self) -> CsrMatrix {
        let mut ptr = Vec::with_capacity(self.n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        ptr.push(0);
        for row in self.rows {
            for (j, v) in row {
                col.push(j);
                val.push(v);
            }
            ptr.push(col.len());
        }
        CsrMatrix { ptr, col, val }
    }
}

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl CsrMatrix {
    pub fn dim(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.ptr[i]..self.ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            *yi = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                (self.ptr[i]..self.ptr[i + 1])
                    .find(|&k| self.col[k] == i)
                    .map_or(0.0, |k| self.val[k])
            })
            .collect()
    }
}

/// Solves A x = b for symmetric positive definite A. Returns the last
/// iterate if the relative residual `rtol` is not reached.
pub fn cg_solve(a: &CsrMatrix, b: &[f64], rtol: f64, max_iter: usize) -> Vec<f64> {
    let n = a.dim();
    let dinv: Vec<f64> = a.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return x;
    }
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= rtol * bnorm {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_solves_a_tridiagonal_system() {
        let n = 50;
        let mut b = CsrBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 2.5);
            if i + 1 < n {
                b.add(i, i + 1, -1.0);
                b.add(i + 1, i, -1.0);
            }
        }
        let a = b.build();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = cg_solve(&a, &rhs, 1e-13, 500);
        let mut ax = vec![0.0; n];
        a.mul(&x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - rhs[i]).abs() < 1e-11);
        }
    }
}
