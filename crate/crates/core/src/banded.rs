//! Square banded matrices with factor-once/solve-many factorizations.
//!
//! Storage is row-major over the band: row `i` keeps columns
//! `i - lower ..= i + upper`, out-of-range slots are zero.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    order: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(order: usize, lower: usize, upper: usize) -> Self {
        let lower = lower.min(order.saturating_sub(1));
        let upper = upper.min(order.saturating_sub(1));
        BandedMatrix {
            order,
            lower,
            upper,
            data: vec![0.0; order * (lower + upper + 1)],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets; repeated entries add.
    /// The bandwidths are the smallest ones containing every triplet.
    pub fn from_triplets(order: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let (mut lower, mut upper) = (0, 0);
        for &(i, j, _) in triplets {
            if i > j {
                lower = lower.max(i - j);
            } else {
                upper = upper.max(j - i);
            }
        }
        let mut m = BandedMatrix::zeros(order, lower, upper);
        for &(i, j, v) in triplets {
            m.add(i, j, v);
        }
        m
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        BandedMatrix::from_triplets(n, &triplets)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.order && j < self.order && j + self.lower >= i && j <= i + self.upper
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.lower - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    /// Sets an entry; panics if `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] = value;
    }

    /// Adds to an entry; panics if `(i, j)` lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += value;
    }

    fn columns(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.lower)..(i + self.upper + 1).min(self.order)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.order);
        (0..self.order)
            .map(|i| self.columns(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `Mᵀ x`.
    pub fn transpose_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.order);
        let mut y = vec![0.0; self.order];
        for (i, &xi) in x.iter().enumerate() {
            for j in self.columns(i) {
                y[j] += self.get(i, j) * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> BandedMatrix {
        let mut t = BandedMatrix::zeros(self.order, self.upper, self.lower);
        for i in 0..self.order {
            for j in self.columns(i) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `self + alpha * other`, widening the band as needed.
    pub fn add_scaled(&self, alpha: f64, other: &BandedMatrix) -> BandedMatrix {
        assert_eq!(self.order, other.order);
        let mut out = BandedMatrix::zeros(
            self.order,
            self.lower.max(other.lower),
            self.upper.max(other.upper),
        );
        for i in 0..self.order {
            for j in self.columns(i) {
                out.add(i, j, self.get(i, j));
            }
            for j in other.columns(i) {
                out.add(i, j, alpha * other.get(i, j));
            }
        }
        out
    }

    pub fn scaled(&self, alpha: f64) -> BandedMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.order).all(|i| {
            self.columns(i)
                .all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol)
        })
    }

    /// True if every entry strictly above the diagonal is zero.
    pub fn is_lower_triangular(&self) -> bool {
        (0..self.order).all(|i| self.columns(i).filter(|&j| j > i).all(|j| self.get(i, j) == 0.0))
    }

    pub fn lu(&self) -> Result<BandedLu> {
        BandedLu::new(self)
    }

    pub fn cholesky(&self) -> Result<BandedCholesky> {
        BandedCholesky::new(self)
    }

    /// Forward substitution for a lower-triangular matrix.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.order);
        let mut x = b.to_vec();
        for i in 0..self.order {
            let mut s = x[i];
            for j in i.saturating_sub(self.lower)..i {
                s -= self.get(i, j) * x[j];
            }
            let d = self.get(i, i);
            if d == 0.0 {
                return Err(Error::Singular { row: i });
            }
            x[i] = s / d;
        }
        Ok(x)
    }

    /// Back substitution with the transpose of a lower-triangular matrix.
    pub fn solve_lower_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.order);
        let n = self.order;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..(i + self.lower + 1).min(n) {
                s -= self.get(j, i) * x[j];
            }
            let d = self.get(i, i);
            if d == 0.0 {
                return Err(Error::Singular { row: i });
            }
            x[i] = s / d;
        }
        Ok(x)
    }
}

/// LU factorization with partial pivoting; `U` has upper bandwidth
/// `lower + upper` to absorb pivoting fill.
#[derive(Debug, Clone)]
pub struct BandedLu {
    order: usize,
    lower: usize,
    /// Upper bandwidth of `U`.
    span: usize,
    /// Row `i` stores columns `i - lower ..= i + span` of the working matrix.
    work: Vec<f64>,
    /// `multipliers[k * lower + r]` eliminates row `k + 1 + r` with row `k`.
    multipliers: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn new(m: &BandedMatrix) -> Result<Self> {
        let n = m.order;
        let lower = m.lower;
        let span = m.lower + m.upper;
        let width = lower + span + 1;
        let at = |i: usize, j: usize| i * width + (j + lower - i);

        let mut work = vec![0.0; n * width];
        for i in 0..n {
            for j in m.columns(i) {
                work[at(i, j)] = m.get(i, j);
            }
        }
        let mut multipliers = vec![0.0; n * lower];
        let mut pivots = vec![0; n];

        for k in 0..n {
            let last_row = (k + lower).min(n - 1);
            let last_col = (k + span).min(n - 1);

            let mut p = k;
            let mut best = work[at(k, k)].abs();
            for i in k + 1..=last_row {
                let v = work[at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { row: k });
            }
            pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    work.swap(at(k, j), at(p, j));
                }
            }
            let pivot = work[at(k, k)];
            for i in k + 1..=last_row {
                let l = work[at(i, k)] / pivot;
                multipliers[k * lower + (i - k - 1)] = l;
                work[at(i, k)] = 0.0;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        work[at(i, j)] -= l * work[at(k, j)];
                    }
                }
            }
        }

        Ok(BandedLu {
            order: n,
            lower,
            span,
            work,
            multipliers,
            pivots,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.order;
        assert_eq!(x.len(), n);
        let width = self.lower + self.span + 1;
        let at = |i: usize, j: usize| i * width + (j + self.lower - i);

        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            let last_row = (k + self.lower).min(n - 1);
            for i in k + 1..=last_row {
                x[i] -= self.multipliers[k * self.lower + (i - k - 1)] * xk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + self.span).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=last_col {
                s -= self.work[at(k, j)] * x[j];
            }
            x[k] = s / self.work[at(k, k)];
        }
    }
}

/// Cholesky factor `L Lᵀ` of a symmetric positive definite banded matrix.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    order: usize,
    band: usize,
    /// Row `i` stores `L[i][i - band ..= i]`.
    factor: Vec<f64>,
}

impl BandedCholesky {
    fn new(m: &BandedMatrix) -> Result<Self> {
        let n = m.order;
        let band = m.lower.max(m.upper);
        let width = band + 1;
        let at = |i: usize, j: usize| i * width + (j + band - i);
        let mut factor = vec![0.0; n * width];

        for i in 0..n {
            let start = i.saturating_sub(band);
            for j in start..=i {
                let mut s = m.get(i, j);
                for k in start.max(j.saturating_sub(band))..j {
                    s -= factor[at(i, k)] * factor[at(j, k)];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Singular { row: i });
                    }
                    factor[at(i, i)] = s.sqrt();
                } else {
                    factor[at(i, j)] = s / factor[at(j, j)];
                }
            }
        }
        Ok(BandedCholesky { order: n, band, factor })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.order;
        assert_eq!(b.len(), n);
        let width = self.band + 1;
        let at = |i: usize, j: usize| i * width + (j + self.band - i);
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(self.band)..i {
                s -= self.factor[at(i, k)] * x[k];
            }
            x[i] = s / self.factor[at(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + self.band + 1).min(n) {
                s -= self.factor[at(k, i)] * x[k];
            }
            x[i] = s / self.factor[at(i, i)];
        }
        x
    }
}
