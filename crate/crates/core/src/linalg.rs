//! Sparse real matrices at truncation, with extremal singular values and
//! range solves computed block by block.
//!
//! Frames, synthesis operators and projections here are very sparse and split
//! into many independent blocks (the connected components of the row/column
//! incidence graph). Singular values and least-squares solves are computed
//! per block, so a diagonal operator at `N = 10⁴` never allocates an `N × N`
//! Gram matrix while a dense operator still goes through a full
//! eigendecomposition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{FrameError, Result};
use crate::graded::{scaled_l2, GradedVector};

/// Largest block (in columns) handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 2000;

/// Relative tolerance under which two singular values count as tied.
pub(crate) const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    // Row-major; column indices 0-based and increasing within a row.
    data: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0))).expect("identity entries")
    }

    /// 0-based triplets; duplicates are summed and zeros dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut data: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for (r, c, v) in triplets {
            if r >= rows {
                return Err(FrameError::DimensionMismatch { expected: rows, got: r + 1 });
            }
            if c >= cols {
                return Err(FrameError::DimensionMismatch { expected: cols, got: c + 1 });
            }
            if !v.is_finite() {
                return Err(FrameError::NonFinite { index: c + 1 });
            }
            data[r].push((c, v));
        }
        for row in &mut data {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            *row = merged;
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(FrameError::DimensionMismatch { expected: cols, got: row.len() });
            }
            triplets.extend(row.iter().enumerate().map(|(j, &v)| (i, j, v)));
        }
        Self::from_triplets(rows.len(), cols, triplets)
    }

    /// Matrix whose `i`-th column is `columns[i]` (real parts required).
    pub fn from_columns(rows: usize, columns: &[GradedVector]) -> Result<Self> {
        let mut triplets = Vec::new();
        for (c, col) in columns.iter().enumerate() {
            for (j, z) in col.iter() {
                if z.im != 0.0 {
                    return Err(FrameError::InvalidParameters(
                        "operators are real; complex column entry".into(),
                    ));
                }
                triplets.push((j - 1, c, z.re));
            }
        }
        Self::from_triplets(rows, columns.len(), triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Nonzeros of row `r` (0-based), as `(col, value)`.
    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.data[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r].binary_search_by_key(&c, |e| e.0).map_or(0.0, |p| self.data[r][p].1)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.data.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    /// Column `c` (0-based) as a 1-based vector.
    pub fn column(&self, c: usize) -> GradedVector {
        GradedVector::from_sparse(
            self.data
                .iter()
                .enumerate()
                .filter_map(|(r, row)| {
                    row.binary_search_by_key(&c, |e| e.0)
                        .ok()
                        .map(|p| (r + 1, Complex64::new(row[p].1, 0.0)))
                }),
        )
        .expect("finite entries")
    }

    pub fn columns(&self) -> Vec<GradedVector> {
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.cols];
        for (r, c, v) in self.triplets() {
            cols[c].push((r + 1, Complex64::new(v, 0.0)));
        }
        cols.into_iter().map(|e| GradedVector::from_sparse(e).expect("finite entries")).collect()
    }

    /// `A x` for a 1-based vector `x` supported within the column count.
    pub fn apply(&self, x: &GradedVector) -> Result<GradedVector> {
        if x.support_len() > self.cols {
            return Err(FrameError::DimensionMismatch { expected: self.cols, got: x.support_len() });
        }
        let dense = x.to_dense(self.cols);
        let out = self.data.iter().enumerate().filter_map(|(r, row)| {
            let acc: Complex64 = row.iter().map(|&(c, v)| dense[c] * v).sum();
            (acc != Complex64::new(0.0, 0.0)).then_some((r + 1, acc))
        });
        GradedVector::from_sparse(out)
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(r, c, v)| (c, r, v)))
            .expect("transposed entries")
    }

    /// `self · rhs`
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(FrameError::DimensionMismatch { expected: self.cols, got: rhs.rows });
        }
        let mut triplets = Vec::new();
        for (r, row) in self.data.iter().enumerate() {
            let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
            for &(k, a) in row {
                for &(c, b) in &rhs.data[k] {
                    *acc.entry(c).or_insert(0.0) += a * b;
                }
            }
            triplets.extend(acc.into_iter().map(|(c, v)| (r, c, v)));
        }
        Self::from_triplets(self.rows, rhs.cols, triplets)
    }

    /// `diag(row_w) · A · diag(col_w)`, weights indexed from 0.
    pub fn weighted<R, C>(&self, row_w: R, col_w: C) -> Self
    where
        R: Fn(usize) -> f64,
        C: Fn(usize) -> f64,
    {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let wr = row_w(r);
                row.iter().map(|&(c, v)| (c, v * wr * col_w(c))).collect()
            })
            .collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Largest entrywise deviation from the identity.
    pub fn identity_defect(&self) -> (usize, f64) {
        let mut worst = (0, 0.0f64);
        for r in 0..self.rows.max(self.cols) {
            let d = if r < self.rows && r < self.cols { (self.get(r, r) - 1.0).abs() } else { 1.0 };
            if d > worst.1 {
                worst = (r, d);
            }
        }
        for (r, c, v) in self.triplets() {
            if r != c && v.abs() > worst.1 {
                worst = (c, v.abs());
            }
        }
        worst
    }

    /// Largest entrywise `|A − B|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.rows.max(other.rows) {
            let a = self.data.get(r).map(Vec::as_slice).unwrap_or(&[]);
            let b = other.data.get(r).map(Vec::as_slice).unwrap_or(&[]);
            let (mut i, mut k) = (0, 0);
            while i < a.len() || k < b.len() {
                let d = match (a.get(i), b.get(k)) {
                    (Some(x), Some(y)) if x.0 == y.0 => {
                        i += 1;
                        k += 1;
                        x.1 - y.1
                    }
                    (Some(x), Some(y)) if x.0 < y.0 => {
                        i += 1;
                        x.1
                    }
                    (Some(x), None) => {
                        i += 1;
                        x.1
                    }
                    (_, Some(y)) => {
                        k += 1;
                        y.1
                    }
                    (None, None) => unreachable!(),
                };
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    /// Connected components of the row/column incidence graph, each as
    /// `(rows, cols)` sorted, ordered by smallest column. Empty columns form
    /// singleton components with no rows; empty rows are dropped.
    pub fn components(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let n = self.cols + self.rows;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (r, c, _) in self.triplets() {
            let (a, b) = (find(&mut parent, c), find(&mut parent, self.cols + r));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut slot: Vec<Option<usize>> = vec![None; n];
        let mut comps: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for c in 0..self.cols {
            let root = find(&mut parent, c);
            let id = *slot[root].get_or_insert_with(|| {
                comps.push((Vec::new(), Vec::new()));
                comps.len() - 1
            });
            comps[id].1.push(c);
        }
        for r in 0..self.rows {
            if self.data[r].is_empty() {
                continue;
            }
            let root = find(&mut parent, self.cols + r);
            if let Some(id) = slot[root] {
                comps[id].0.push(r);
            }
        }
        comps
    }

    /// Extremal singular values of the column action: the smallest and
    /// largest `‖A x‖ / ‖x‖` over nonzero `x`, with unit maximizers.
    pub fn singular_extremes(&self) -> Result<SingularExtremes> {
        if self.cols == 0 {
            return Err(FrameError::Empty("matrix has no columns"));
        }
        let mut best: Option<SingularExtremes> = None;
        for (rows, cols) in self.components() {
            if cols.len() > DENSE_LIMIT {
                return Err(FrameError::TooLarge { size: cols.len(), limit: DENSE_LIMIT });
            }
            let local = self.block_extremes(&rows, &cols)?;
            best = Some(match best {
                None => local,
                Some(mut acc) => {
                    if local.min < acc.min * (1.0 - TIE_TOLERANCE) {
                        acc.min = local.min;
                        acc.argmin = local.argmin;
                    }
                    if local.max > acc.max * (1.0 + TIE_TOLERANCE) {
                        acc.max = local.max;
                        acc.argmax = local.argmax;
                    }
                    acc
                }
            });
        }
        Ok(best.expect("at least one column"))
    }

    fn block_extremes(&self, rows: &[usize], cols: &[usize]) -> Result<SingularExtremes> {
        let unit = |c: usize| vec![(c, 1.0)];
        if rows.is_empty() {
            return Ok(SingularExtremes { min: 0.0, max: 0.0, argmin: unit(cols[0]), argmax: unit(cols[0]) });
        }
        if cols.len() == 1 {
            let c = cols[0];
            let s = scaled_l2(rows.iter().map(|&r| self.get(r, c).abs()));
            return Ok(SingularExtremes { min: s, max: s, argmin: unit(c), argmax: unit(c) });
        }
        // Dense block, scaled to unit peak before forming the Gram matrix.
        let k = cols.len();
        let local: std::collections::HashMap<usize, usize> =
            cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let peak = rows
            .iter()
            .flat_map(|&r| self.data[r].iter().map(|e| e.1.abs()))
            .fold(0.0f64, f64::max);
        let mut gram = vec![0.0; k * k];
        for &r in rows {
            let row: Vec<(usize, f64)> =
                self.data[r].iter().map(|&(c, v)| (local[&c], v / peak)).collect();
            for &(a, x) in &row {
                for &(b, y) in &row {
                    gram[a * k + b] += x * y;
                }
            }
        }
        let (vals, vecs) = jacobi_eigen(&mut gram, k);
        let mut imin = 0;
        let mut imax = 0;
        for i in 1..k {
            if vals[i] < vals[imin] {
                imin = i;
            }
            if vals[i] > vals[imax] {
                imax = i;
            }
        }
        let sigma = |l: f64| l.max(0.0).sqrt() * peak;
        let vector = |i: usize| (0..k).map(|a| (cols[a], vecs[a * k + i])).collect();
        // Rank-deficient blocks (more columns than rows) have σ_min = 0.
        let min = if rows.len() < k { 0.0 } else { sigma(vals[imin]) };
        Ok(SingularExtremes { min, max: sigma(vals[imax]), argmin: vector(imin), argmax: vector(imax) })
    }
}

/// Extremal singular values with unit vectors attaining them (0-based columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SingularExtremes {
    pub min: f64,
    pub max: f64,
    pub argmin: Vec<(usize, f64)>,
    pub argmax: Vec<(usize, f64)>,
}

/// Cyclic Jacobi eigendecomposition of a symmetric `n × n` row-major matrix.
///
/// Rotations stop once every off-diagonal entry is negligible relative to the
/// geometric mean of its diagonal pair, which keeps small eigenvalues of
/// graded positive definite matrices relatively accurate. Returns the
/// eigenvalues and the eigenvectors as columns of a row-major matrix.
pub fn jacobi_eigen(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    const EPS: f64 = 1e-16;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                if apq == 0.0 || apq.abs() <= EPS * (app * aqq).abs().sqrt() {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = (t * t + 1.0).sqrt().recip();
                let s = t * c;
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let (arp, arq) = (a[r * n + p], a[r * n + q]);
                        let (np, nq) = (c * arp - s * arq, s * arp + c * arq);
                        a[r * n + p] = np;
                        a[p * n + r] = np;
                        a[r * n + q] = nq;
                        a[q * n + r] = nq;
                    }
                    let (vrp, vrq) = (v[r * n + p], v[r * n + q]);
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Least-squares solver for `U x = y`, factored once per block of `U`.
pub struct RangeSolver {
    cols: usize,
    rows: usize,
    blocks: Vec<SolveBlock>,
    row_block: Vec<Option<usize>>,
}

struct SolveBlock {
    rows: Vec<usize>,
    cols: Vec<usize>,
    matrix: DMatrix<f64>,
    svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

/// Solution of a range solve with its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSolution {
    pub x: GradedVector,
    pub residual: f64,
    pub relative_residual: f64,
}

impl RangeSolver {
    pub fn new(u: &SparseMatrix) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut row_block = vec![None; u.rows()];
        for (rows, cols) in u.components() {
            if rows.is_empty() {
                continue;
            }
            if cols.len() > DENSE_LIMIT {
                return Err(FrameError::TooLarge { size: cols.len(), limit: DENSE_LIMIT });
            }
            let matrix = DMatrix::from_fn(rows.len(), cols.len(), |i, k| u.get(rows[i], cols[k]));
            let svd = matrix.clone().svd(true, true);
            for &r in &rows {
                row_block[r] = Some(blocks.len());
            }
            blocks.push(SolveBlock { rows, cols, matrix, svd });
        }
        Ok(Self { cols: u.cols(), rows: u.rows(), blocks, row_block })
    }

    pub fn solve(&self, y: &GradedVector) -> Result<RangeSolution> {
        if y.support_len() > self.rows {
            return Err(FrameError::DimensionMismatch { expected: self.rows, got: y.support_len() });
        }
        let mut residual_terms: Vec<f64> = Vec::new();
        let mut touched: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.blocks.len()];
        for (j, z) in y.iter() {
            match self.row_block[j - 1] {
                Some(b) => touched[b].push((j - 1, z)),
                None => residual_terms.push(z.norm()),
            }
        }
        let mut x = Vec::new();
        for (b, entries) in touched.iter().enumerate() {
            if entries.is_empty() {
                continue;
            }
            let block = &self.blocks[b];
            let pos: std::collections::HashMap<usize, usize> =
                block.rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
            let mut re = DVector::zeros(block.rows.len());
            let mut im = DVector::zeros(block.rows.len());
            for &(r, z) in entries {
                re[pos[&r]] = z.re;
                im[pos[&r]] = z.im;
            }
            let tol = block.svd.singular_values.max() * 1e-12;
            let solve = |rhs: &DVector<f64>| -> Result<DVector<f64>> {
                block.svd.solve(rhs, tol).map_err(|e| FrameError::Degenerate(e.to_string()))
            };
            let (xr, xi) = (solve(&re)?, solve(&im)?);
            let (rr, ri) = (&block.matrix * &xr - &re, &block.matrix * &xi - &im);
            residual_terms.extend((0..block.rows.len()).map(|i| rr[i].hypot(ri[i])));
            x.extend(
                block.cols.iter().enumerate().map(|(k, &c)| (c + 1, Complex64::new(xr[k], xi[k]))),
            );
        }
        let residual = scaled_l2(residual_terms);
        let scale = scaled_l2(y.iter().map(|(_, z)| z.norm()).collect::<Vec<_>>());
        let relative_residual = if scale == 0.0 { residual } else { residual / scale };
        let x = GradedVector::from_sparse(x)?;
        debug_assert!(x.support_len() <= self.cols);
        Ok(RangeSolution { x, residual, relative_residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_singular_values() {
        let m = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let s = m.singular_extremes().unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s.max - phi).abs() < 1e-14);
        assert!((s.min - (phi - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn diagonal_extremes_and_ties() {
        let m = SparseMatrix::from_triplets(4, 4, [(0, 0, 1.0), (1, 1, 3.0), (2, 2, 1.0), (3, 3, 3.0)])
            .unwrap();
        let s = m.singular_extremes().unwrap();
        assert_eq!((s.min, s.max), (1.0, 3.0));
        assert_eq!(s.argmin, vec![(0, 1.0)]);
        assert_eq!(s.argmax, vec![(1, 1.0)]);
    }

    #[test]
    fn empty_column_gives_zero_lower_value() {
        let m = SparseMatrix::from_triplets(2, 2, [(0, 0, 2.0)]).unwrap();
        let s = m.singular_extremes().unwrap();
        assert_eq!((s.min, s.max), (0.0, 2.0));
        assert_eq!(s.argmin, vec![(1, 1.0)]);
    }

    #[test]
    fn wide_block_is_rank_deficient() {
        let m = SparseMatrix::from_dense(&[vec![1.0, 1.0]]).unwrap();
        let s = m.singular_extremes().unwrap();
        assert_eq!(s.min, 0.0);
        assert!((s.max - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jacobi_reconstructs() {
        let n = 3;
        let orig = vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.25, 0.5, 0.25, 2.0];
        let mut a = orig.clone();
        let (vals, vecs) = jacobi_eigen(&mut a, n);
        for i in 0..n {
            for k in 0..n {
                let r: f64 = (0..n).map(|m| vecs[i * n + m] * vals[m] * vecs[k * n + m]).sum();
                assert!((r - orig[i * n + k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn range_solver_block() {
        // Two rows sharing one column: (1,1)ᵀ x = y.
        let u = SparseMatrix::from_triplets(2, 1, [(0, 0, 1.0), (1, 0, 1.0)]).unwrap();
        let solver = RangeSolver::new(&u).unwrap();
        let y = GradedVector::from_real(&[3.0, 3.0]).unwrap();
        let sol = solver.solve(&y).unwrap();
        assert!((sol.x.get(1).re - 3.0).abs() < 1e-14);
        assert!(sol.relative_residual < 1e-14);
        let off = solver.solve(&GradedVector::canonical(1)).unwrap();
        assert!((off.relative_residual - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn matmul_and_transpose() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 3.0]]).unwrap();
        let p = a.matmul(&a.transpose()).unwrap();
        assert_eq!(p.get(0, 0), 5.0);
        assert_eq!(p.get(0, 1), 6.0);
        assert_eq!(p.get(1, 1), 9.0);
        assert_eq!(SparseMatrix::identity(3).identity_defect().1, 0.0);
    }
}
