//! Dense GF(2) matrices stored as packed bit columns.

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn toggle(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the lowest set bit.
    pub fn lowest(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| 64 * k + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GfMatrix {
    rows: usize,
    cols: Vec<BitVec>,
}

impl GfMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols: vec![BitVec::zeros(rows); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_columns(rows: usize, cols: Vec<BitVec>) -> Self {
        assert!(cols.iter().all(|c| c.len() == rows));
        Self { rows, cols }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cols[j].get(i)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.cols[j].set(i, value);
    }

    pub fn toggle(&mut self, i: usize, j: usize) {
        self.cols[j].toggle(i);
    }

    pub fn column(&self, j: usize) -> &BitVec {
        &self.cols[j]
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(BitVec::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols(), self.nrows());
        for (j, c) in self.cols.iter().enumerate() {
            for i in c.ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    pub fn apply(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.ncols());
        let mut out = BitVec::zeros(self.rows);
        for j in v.ones() {
            out.xor_assign(&self.cols[j]);
        }
        out
    }

    /// `self * other`.
    pub fn mul(&self, other: &GfMatrix) -> GfMatrix {
        assert_eq!(self.ncols(), other.nrows());
        GfMatrix {
            rows: self.rows,
            cols: other.cols.iter().map(|c| self.apply(c)).collect(),
        }
    }

    pub fn add(&self, other: &GfMatrix) -> GfMatrix {
        assert_eq!((self.nrows(), self.ncols()), (other.nrows(), other.ncols()));
        let mut out = self.clone();
        for (a, b) in out.cols.iter_mut().zip(&other.cols) {
            a.xor_assign(b);
        }
        out
    }

    /// Restriction to the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> GfMatrix {
        let mut out = GfMatrix::zeros(rows.len(), cols.len());
        for (jj, &j) in cols.iter().enumerate() {
            for (ii, &i) in rows.iter().enumerate() {
                if self.get(i, j) {
                    out.set(ii, jj, true);
                }
            }
        }
        out
    }

    /// Column reduction `R = M V` with `V` invertible upper triangular: each
    /// column is cleared against earlier columns sharing its lowest set row.
    /// Returns `(R, V)`.
    pub fn reduce(&self) -> (GfMatrix, GfMatrix) {
        let mut r = self.clone();
        let mut v = GfMatrix::identity(self.ncols());
        let mut owner: Vec<Option<usize>> = vec![None; self.rows];
        for j in 0..r.ncols() {
            while let Some(low) = r.cols[j].lowest() {
                match owner[low] {
                    Some(k) => {
                        let (rk, vk) = (r.cols[k].clone(), v.cols[k].clone());
                        r.cols[j].xor_assign(&rk);
                        v.cols[j].xor_assign(&vk);
                    }
                    None => {
                        owner[low] = Some(j);
                        break;
                    }
                }
            }
        }
        (r, v)
    }

    pub fn rank(&self) -> usize {
        self.reduce().0.cols.iter().filter(|c| !c.is_zero()).count()
    }

    /// Basis of the null space.
    pub fn kernel(&self) -> Vec<BitVec> {
        let (r, v) = self.reduce();
        (0..self.ncols())
            .filter(|&j| r.cols[j].is_zero())
            .map(|j| v.cols[j].clone())
            .collect()
    }

    pub fn column_space_contains(&self, w: &BitVec) -> bool {
        let mut ext = self.clone();
        ext.cols.push(w.clone());
        ext.rank() == self.rank()
    }
}
