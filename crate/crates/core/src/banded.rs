//! Banded linear algebra: general LU with partial pivoting and symmetric
//! Cholesky. Storage follows the LAPACK band layout so that the pivoting
//! fill-in of `kl` extra super-diagonals has room.

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    // column-major, entry (i, j) at j*ldab + kl + ku + i - j
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, data: vec![0.0; n * ldab] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.kl + self.ku + i - j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Panics outside the band: an assembly bug, not a runtime condition.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row_range(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row_range(i).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn lu(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = self.data[self.idx(j, j)].abs();
            for i in 1..=km {
                let v = self.data[self.idx(j + i, j)].abs();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(Error::SingularPivot { row: j });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(j + jp, c);
                    self.data.swap(a, b);
                }
            }
            let piv = self.data[self.idx(j, j)];
            for i in 1..=km {
                let k = self.idx(j + i, j);
                self.data[k] /= piv;
            }
            for c in j + 1..=ju {
                let ujc = self.data[self.idx(j, c)];
                if ujc == 0.0 {
                    continue;
                }
                for i in 1..=km {
                    let l = self.data[self.idx(j + i, j)];
                    let k = self.idx(j + i, c);
                    self.data[k] -= l * ujc;
                }
            }
        }
        debug_assert!(kv < self.ldab);
        Ok(BandLu { a: self, ipiv })
    }
}

/// LU factors of a [`BandMatrix`]; immutable, so one factorization can
/// serve concurrent solves.
#[derive(Debug, Clone)]
pub struct BandLu {
    a: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.a.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let a = &self.a;
        let n = a.n;
        assert_eq!(b.len(), n);
        let kv = a.kl + a.ku;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = a.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for i in 1..=km {
                    b[j + i] -= a.data[a.idx(j + i, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= a.data[a.idx(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                for i in j.saturating_sub(kv)..j {
                    b[i] -= a.data[a.idx(i, j)] * bj;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Symmetric matrix stored by its lower band of half-width `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    k: usize,
    // row-major lower band, (i, j) with i - k <= j <= i at i*(k+1) + (i - j)
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self { n, k, data: vec![0.0; n * (k + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.k
    }

    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        (i < self.n && i - j <= self.k).then(|| i * (self.k + 1) + (i - j))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j).unwrap_or_else(|| panic!("({i}, {j}) outside band"));
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j).unwrap_or_else(|| panic!("({i}, {j}) outside band"));
        self.data[k] = v;
    }

    /// `self + alpha * other`; both must share size and bandwidth.
    pub fn axpy(&self, alpha: f64, other: &SymBandMatrix) -> SymBandMatrix {
        assert_eq!((self.n, self.k), (other.n, other.k));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + alpha * b).collect();
        SymBandMatrix { n: self.n, k: self.k, data }
    }

    /// `D A D` for a diagonal `D`.
    pub fn scale_sym(&self, d: &[f64]) -> SymBandMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in i.saturating_sub(self.k)..=i {
                let k = i * (self.k + 1) + (i - j);
                out.data[k] *= d[i] * d[j];
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let base = i * (self.k + 1);
            y[i] += self.data[base] * x[i];
            for j in i.saturating_sub(self.k)..i {
                let a = self.data[base + i - j];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
        }
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * (self.k + 1)]).collect()
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        let (n, k) = (self.n, self.k);
        let w = k + 1;
        let mut l = self.data.clone();
        for i in 0..n {
            let j0 = i.saturating_sub(k);
            for j in j0..=i {
                let mut s = l[i * w + (i - j)];
                for c in i.saturating_sub(k).max(j.saturating_sub(k))..j {
                    s -= l[i * w + (i - c)] * l[j * w + (j - c)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { row: i });
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(BandCholesky { n, k, l })
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    k: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, k) = (self.n, self.k);
        let w = k + 1;
        assert_eq!(b.len(), n);
        for i in 0..n {
            let mut s = b[i];
            for j in i.saturating_sub(k)..i {
                s -= self.l[i * w + (i - j)] * b[j];
            }
            b[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..(i + k + 1).min(n) {
                s -= self.l[j * w + (j - i)] * b[j];
            }
            b[i] = s / self.l[i * w];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
