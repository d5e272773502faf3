//! Shared helpers for the oracle suites: closed forms, seeded randomness,
//! and small linear-algebra scaffolding kept independent of the library's
//! own eigenvalue code.

#![allow(dead_code)]

use fnparab::grid::{Boundary, Grid, GridField};
use fnparab::operators::SymMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Heat evolution of a Gaussian bump: amplitude * exp(-|x|^2 / (4 t0))
/// becomes amplitude (t0/(t0+t))^(N/2) exp(-|x|^2 / (4 (t0+t))).
pub fn heat_gaussian(x: &[f64], amplitude: f64, t0: f64, t: f64) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let s = t0 + t;
    amplitude * (t0 / s).powf(x.len() as f64 / 2.0) * (-r2 / (4.0 * s)).exp()
}

pub fn gaussian(grid: Grid, amplitude: f64, width: f64) -> GridField {
    GridField::from_fn(grid, Boundary::DirichletZero, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        amplitude * (-r2 / (width * width)).exp()
    })
}

/// Random symmetric matrix with entries of order `scale`.
pub fn random_sym(rng: &mut StdRng, dim: usize, scale: f64) -> SymMatrix {
    let mut m = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            m.set(i, j, scale * rng.random_range(-1.0..1.0));
        }
    }
    m
}

/// Random orthogonal matrix columns via Gram-Schmidt on random vectors;
/// deliberately independent of the library's eigen code.
pub fn random_orthogonal(rng: &mut StdRng, dim: usize) -> Vec<Vec<f64>> {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut ok = true;
        for _ in 0..dim {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= dot * ci;
                }
            }
            let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for vi in &mut v {
                *vi /= norm;
            }
            cols.push(v);
        }
        if ok {
            return cols;
        }
    }
}

/// tr(A X) computed by direct products from an explicit square matrix A.
pub fn trace_product(a: &[Vec<f64>], x: &SymMatrix) -> f64 {
    let dim = a.len();
    let mut tr = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            tr += a[i][j] * x.get(j, i);
        }
    }
    tr
}

/// Builds Q diag(d) Q^T as an explicit matrix from orthonormal columns.
pub fn conjugate_diag(q: &[Vec<f64>], d: &[f64]) -> Vec<Vec<f64>> {
    let dim = q.len();
    let mut a = vec![vec![0.0; dim]; dim];
    for (k, col) in q.iter().enumerate() {
        for i in 0..dim {
            for j in 0..dim {
                a[i][j] += d[k] * col[i] * col[j];
            }
        }
    }
    a
}

/// det(M) for dim <= 3, explicit cofactor formulas.
pub fn det_explicit(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => panic!("det_explicit supports dim <= 3"),
    }
}

pub fn sym_to_rows(x: &SymMatrix) -> Vec<Vec<f64>> {
    let dim = x.dim();
    (0..dim)
        .map(|i| (0..dim).map(|j| x.get(i, j)).collect())
        .collect()
}
