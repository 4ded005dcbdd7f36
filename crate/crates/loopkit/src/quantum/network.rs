//! Dense tensors with labelled binary legs and pairwise contraction.
//!
//! Every leg has dimension 2. Bit `k` of a flat index is the value of
//! `legs[k]`. Contracting two tensors sums over all labels they share.

use num_complex::Complex64;

use crate::error::{LoopError, Result};
use crate::guard;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub legs: Vec<usize>,
    pub data: Vec<Complex64>,
}

/// Scatters the bits of `value` to the positions listed in `positions`.
fn scatter_table(positions: &[usize]) -> Vec<usize> {
    let n = positions.len();
    let mut out = vec![0usize; 1 << n];
    for v in 0..(1usize << n) {
        let mut idx = 0;
        for (k, &p) in positions.iter().enumerate() {
            if (v >> k) & 1 == 1 {
                idx |= 1 << p;
            }
        }
        out[v] = idx;
    }
    out
}

impl Tensor {
    pub fn new(legs: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != 1usize << legs.len() {
            return Err(LoopError::DimensionMismatch { expected: 1 << legs.len(), got: data.len() });
        }
        Ok(Tensor { legs, data })
    }

    pub fn scalar(value: Complex64) -> Self {
        Tensor { legs: Vec::new(), data: vec![value] }
    }

    /// Two-leg tensor holding `m[x][y]` with `x` on `first` and `y` on `second`.
    pub fn matrix(first: usize, second: usize, m: [[Complex64; 2]; 2]) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); 4];
        for x in 0..2 {
            for y in 0..2 {
                data[x | (y << 1)] = m[x][y];
            }
        }
        Tensor { legs: vec![first, second], data }
    }

    pub fn rank(&self) -> usize {
        self.legs.len()
    }

    /// Contracts every shared label.
    pub fn contract(&self, other: &Tensor) -> Result<Tensor> {
        let shared: Vec<usize> = self.legs.iter().copied().filter(|l| other.legs.contains(l)).collect();
        let a_only: Vec<usize> = self.legs.iter().copied().filter(|l| !shared.contains(l)).collect();
        let b_only: Vec<usize> = other.legs.iter().copied().filter(|l| !shared.contains(l)).collect();
        let out_rank = a_only.len() + b_only.len();
        guard::check("tensor contraction", out_rank + shared.len(), guard::HILBERT_BITS + 6)?;

        let pos = |legs: &[usize], labels: &[usize]| -> Vec<usize> {
            labels.iter().map(|l| legs.iter().position(|x| x == l).expect("label present")).collect()
        };
        let a_out = scatter_table(&pos(&self.legs, &a_only));
        let a_sh = scatter_table(&pos(&self.legs, &shared));
        let b_out = scatter_table(&pos(&other.legs, &b_only));
        let b_sh = scatter_table(&pos(&other.legs, &shared));

        let na = a_only.len();
        let mut data = vec![Complex64::new(0.0, 0.0); 1 << out_rank];
        for ob in 0..(1usize << b_only.len()) {
            let bo = b_out[ob];
            for oa in 0..(1usize << na) {
                let ao = a_out[oa];
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 0..a_sh.len() {
                    let x = self.data[ao | a_sh[s]];
                    if x.re == 0.0 && x.im == 0.0 {
                        continue;
                    }
                    acc += x * other.data[bo | b_sh[s]];
                }
                data[oa | (ob << na)] = acc;
            }
        }
        let mut legs = a_only;
        legs.extend(b_only);
        Ok(Tensor { legs, data })
    }

    /// Data reordered so that bit `k` corresponds to `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Vec<Complex64>> {
        if order.len() != self.legs.len() || order.iter().any(|l| !self.legs.contains(l)) {
            return Err(LoopError::Malformed("permutation does not match the open legs".into()));
        }
        let src = scatter_table(&order.iter().map(|l| self.legs.iter().position(|x| x == l).unwrap()).collect::<Vec<_>>());
        Ok(src.iter().map(|&i| self.data[i]).collect())
    }
}

/// Contracts a list of tensors left to right.
pub fn contract_all(tensors: Vec<Tensor>) -> Result<Tensor> {
    let mut iter = tensors.into_iter();
    let mut acc = iter.next().unwrap_or_else(|| Tensor::scalar(Complex64::new(1.0, 0.0)));
    for t in iter {
        acc = acc.contract(&t)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn matrix_product_through_a_shared_leg() {
        let a = Tensor::matrix(0, 1, [[c(1.0), c(2.0)], [c(3.0), c(4.0)]]);
        let b = Tensor::matrix(1, 2, [[c(5.0), c(6.0)], [c(7.0), c(8.0)]]);
        let ab = a.contract(&b).unwrap();
        let m = ab.permuted(&[0, 2]).unwrap();
        // (AB)[x][z] at index x | z << 1.
        assert_eq!(m, vec![c(19.0), c(43.0), c(22.0), c(50.0)]);
    }

    #[test]
    fn full_contraction_is_a_trace() {
        let a = Tensor::matrix(0, 1, [[c(1.0), c(2.0)], [c(3.0), c(4.0)]]);
        let id = Tensor::matrix(1, 0, [[c(1.0), c(0.0)], [c(0.0), c(1.0)]]);
        let t = a.contract(&id).unwrap();
        assert_eq!(t.rank(), 0);
        assert_eq!(t.data[0], c(5.0));
    }
}
