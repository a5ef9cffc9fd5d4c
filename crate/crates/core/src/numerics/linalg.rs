use crate::error::{Error, Result};

/// Relative pivot floor for the strict factorization.
const PIVOT_FLOOR: f64 = 1e-14;

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SpdMatrix {
    /// Wraps row-major data, checking shape, finiteness and symmetry.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Domain(format!(
                "matrix data has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite matrix entry at flat index {i}")));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
                    return Err(Error::Domain(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds the matrix from an entry function evaluated on the lower triangle.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::new(n, data)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    n: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// `out = L z`.
    pub fn mul_vec(&self, z: &[f64], out: &mut [f64]) {
        assert_eq!(z.len(), self.n);
        assert_eq!(out.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.n..i * self.n + i + 1];
            *o = row.iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }
}

/// Strict Cholesky factorization.
///
/// Fails with [`Error::NotPositiveDefinite`] as soon as a pivot falls below
/// `1e-14` times the largest diagonal entry, naming the offending row.
pub fn cholesky(a: &SpdMatrix) -> Result<LowerTriangular> {
    let n = a.n;
    let max_diag = a.diagonal().into_iter().fold(0.0_f64, f64::max);
    let threshold = PIVOT_FLOOR * max_diag;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > threshold) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d, threshold });
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Ok(LowerTriangular { n, data: l })
}

/// Low-rank factor `G` (n × rank) with `G Gᵀ ≈ A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactor {
    n: usize,
    rank: usize,
    /// Row-major n × rank.
    data: Vec<f64>,
}

impl LowRankFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.rank..(i + 1) * self.rank]
    }

    /// `out = G z` for `z` of length `rank`.
    pub fn mul_vec(&self, z: &[f64], out: &mut [f64]) {
        assert_eq!(z.len(), self.rank);
        assert_eq!(out.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }

    /// Largest entrywise deviation of `G Gᵀ` from `a`, relative to the diagonal scale.
    pub fn relative_residual(&self, a: &SpdMatrix) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..=i {
                let g: f64 = self.row(i).iter().zip(self.row(j)).map(|(x, y)| x * y).sum();
                let scale = (a.get(i, i) * a.get(j, j)).sqrt();
                if scale > 0.0 {
                    worst = worst.max((g - a.get(i, j)).abs() / scale);
                }
            }
        }
        worst
    }
}

/// Diagonally pivoted Cholesky on the correlation-scaled matrix.
///
/// Stops once the largest remaining correlation-scale pivot is at most `tol`,
/// which makes the result insensitive to the wildly different magnitudes that
/// Gram matrices over geometric ladders carry.
pub fn pivoted_cholesky(a: &SpdMatrix, tol: f64) -> Result<LowRankFactor> {
    let n = a.n;
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::NotPositiveDefinite { index: i, pivot: diag[i], threshold: 0.0 });
    }
    let s: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let mut resid = vec![1.0; n];
    let mut perm: Vec<usize> = (0..n).collect();
    // Columns of the correlation factor, each of length n in original indexing.
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let (pos, &best) = perm[k..]
            .iter()
            .map(|&p| &resid[p])
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, (i, r)| if *r > *acc.1 { (i, r) } else { acc });
        if best <= tol {
            break;
        }
        perm.swap(k, k + pos);
        let p = perm[k];
        let root = best.sqrt();
        let mut col = vec![0.0; n];
        col[p] = root;
        for &i in &perm[k + 1..] {
            let mut v = a.get(i, p) / (s[i] * s[p]);
            for c in &cols {
                v -= c[i] * c[p];
            }
            let v = v / root;
            col[i] = v;
            resid[i] -= v * v;
        }
        resid[p] = 0.0;
        cols.push(col);
    }
    let rank = cols.len();
    let mut data = vec![0.0; n * rank];
    for i in 0..n {
        for (r, c) in cols.iter().enumerate() {
            data[i * rank + r] = c[i] * s[i];
        }
    }
    Ok(LowRankFactor { n, rank, data })
}
