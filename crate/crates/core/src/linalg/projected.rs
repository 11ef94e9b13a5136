use super::RealMatrix;

/// The `(m+1) x m` real projected matrix `T̄` of a Krylov decomposition.
///
/// Only the lower triangle (row >= column) is stored; reads above the
/// diagonal mirror it, so the leading square block is symmetric by
/// construction. Row `m` holds the coupling of the residual vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedMatrix {
    m: usize,
    t: Vec<f64>,
}

impl ProjectedMatrix {
    pub fn new(m: usize) -> Self {
        Self { m, t: vec![0.0; (m + 1) * m] }
    }

    /// Maximum number of columns.
    pub fn capacity(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.t[i * self.m + j]
        } else {
            self.t[j * self.m + i]
        }
    }

    /// Writes entry `(i, j)`; `(j, i)` reads back the same value.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(r <= self.m && c < self.m);
        self.t[r * self.m + c] = value;
    }

    pub fn clear(&mut self) {
        self.t.iter_mut().for_each(|x| *x = 0.0);
    }

    /// The symmetric leading `j x j` block.
    pub fn leading(&self, j: usize) -> RealMatrix {
        RealMatrix::from_fn(j, j, |r, c| self.get(r, c))
    }

    /// Row `i`, columns `0..j` (used for the coupling row below the active block).
    pub fn row_prefix(&self, i: usize, j: usize) -> Vec<f64> {
        (0..j).map(|c| self.t[i * self.m + c]).collect()
    }
}
