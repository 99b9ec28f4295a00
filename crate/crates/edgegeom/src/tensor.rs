//! Minimal dense rank-3 and rank-4 containers, row-major over small extents.

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub d0: usize,
    pub d1: usize,
    pub d2: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(d0: usize, d1: usize, d2: usize) -> Self {
        Tensor3 {
            d0,
            d1,
            d2,
            data: vec![0.0; d0 * d1 * d2],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.d1 + j) * self.d2 + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.d1 + j) * self.d2 + k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.d1 + j) * self.d2 + k] += v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Antisymmetrise over the last two slots.
    pub fn antisymmetrise_12(&mut self) {
        for i in 0..self.d0 {
            for j in 0..self.d1 {
                for k in (j + 1)..self.d2 {
                    let a = self.get(i, j, k);
                    let b = self.get(i, k, j);
                    let h = 0.5 * (a - b);
                    self.set(i, j, k, h);
                    self.set(i, k, j, -h);
                }
                self.set(i, j, j, 0.0);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    pub d0: usize,
    pub d1: usize,
    pub d2: usize,
    pub d3: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(d0: usize, d1: usize, d2: usize, d3: usize) -> Self {
        Tensor4 {
            d0,
            d1,
            d2,
            d3,
            data: vec![0.0; d0 * d1 * d2 * d3],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.d1 + j) * self.d2 + k) * self.d3 + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[((i * self.d1 + j) * self.d2 + k) * self.d3 + l] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Antisymmetrise in the (0,1) pair and in the (2,3) pair.
    pub fn antisymmetrise_pairs(&mut self) {
        let (n0, n1, n2, n3) = (self.d0, self.d1, self.d2, self.d3);
        let mut out = vec![0.0; self.data.len()];
        for i in 0..n0 {
            for j in 0..n1 {
                for k in 0..n2 {
                    for l in 0..n3 {
                        let v = 0.25
                            * (self.get(i, j, k, l) - self.get(j, i, k, l) - self.get(i, j, l, k)
                                + self.get(j, i, l, k));
                        out[((i * n1 + j) * n2 + k) * n3 + l] = v;
                    }
                }
            }
        }
        self.data = out;
    }
}
