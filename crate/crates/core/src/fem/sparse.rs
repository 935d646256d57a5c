//! Compressed sparse rows, reverse Cuthill–McKee ordering and an envelope
//! (skyline) Cholesky factorization.

use crate::error::{Error, Result};
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries; column indices within a row end up sorted.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => self.values[self.indptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            *yi = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `self + alpha · other` on the union pattern.
    pub fn add_scaled(&self, other: &CsrMatrix, alpha: f64) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.values.len() + other.values.len());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, alpha * v)));
        }
        CsrMatrix::from_triplets(self.n, t)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

/// Reverse Cuthill–McKee ordering: `perm[new] = old`. Each component starts
/// from a pseudo-peripheral vertex; ties break by index, so the result is
/// deterministic.
pub fn rcm(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.indptr[i + 1] - a.indptr[i]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(a, seed, &degree);
        let mut queue = VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
            nbrs.sort_by_key(|&j| (degree[j], j));
            for j in nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &CsrMatrix, start: usize) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; a.n];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for (j, _) in a.row(v) {
            if level[j] == usize::MAX {
                level[j] = level[v] + 1;
                queue.push_back(j);
            }
        }
    }
    (level, last)
}

fn pseudo_peripheral(a: &CsrMatrix, seed: usize, degree: &[usize]) -> usize {
    let mut v = seed;
    let mut ecc = 0;
    for _ in 0..10 {
        let (level, _) = bfs_levels(a, v);
        let depth = level.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
        if depth <= ecc && v != seed {
            break;
        }
        ecc = depth;
        let candidate = (0..a.n)
            .filter(|&i| level[i] == depth)
            .min_by_key(|&i| (degree[i], i))
            .unwrap();
        if candidate == v {
            break;
        }
        v = candidate;
    }
    v
}

/// `L Lᵀ = P A Pᵀ` with `L` stored row by row from its first nonzero column.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let perm = rcm(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            first[new] = a.row(old).map(|(j, _)| inv[j]).filter(|&j| j <= new).min().unwrap_or(new);
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let jn = inv[j];
                if jn <= new {
                    data[start[new] + jn - first[new]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let ri = start[i] + (k0 - fi);
                let rj = start[j] + (k0 - fj);
                let len = j - k0;
                let mut s = 0.0;
                for k in 0..len {
                    s += data[ri + k] * data[rj + k];
                }
                let ljj = data[start[j + 1] - 1];
                let idx = start[i] + (j - fi);
                data[idx] = (data[idx] - s) / ljj;
            }
            let row = &data[start[i]..start[i + 1] - 1];
            let s: f64 = row.iter().map(|x| x * x).sum();
            let d = data[start[i + 1] - 1] - s;
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite(perm[i]));
            }
            data[start[i + 1] - 1] = d.sqrt();
        }
        Ok(SkylineCholesky {
            n,
            perm,
            first,
            start,
            data,
        })
    }

    /// Number of stored entries of `L`.
    pub fn profile(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1] - 1];
            let mut s = y[i];
            for (k, l) in row.iter().enumerate() {
                s -= l * y[fi + k];
            }
            y[i] = s / self.data[self.start[i + 1] - 1];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            y[i] /= self.data[self.start[i + 1] - 1];
            let xi = y[i];
            let row = &self.data[self.start[i]..self.start[i + 1] - 1];
            for (k, l) in row.iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + 0.01 * i as f64));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), 4.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn rcm_is_a_permutation() {
        let m = laplacian_1d(50);
        let mut p = rcm(&m);
        p.sort();
        assert_eq!(p, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn cholesky_solves() {
        let m = laplacian_1d(40);
        let chol = SkylineCholesky::factor(&m).unwrap();
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = m.mul(&x);
        let y = chol.solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
        // a tridiagonal matrix keeps a bandwidth-1 profile
        assert!(chol.profile() <= 2 * 40);
    }

    #[test]
    fn indefinite_is_rejected() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(SkylineCholesky::factor(&m), Err(Error::NotPositiveDefinite(_))));
    }
}
