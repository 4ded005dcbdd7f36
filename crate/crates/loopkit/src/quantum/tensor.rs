//! The fiducial tensors and their symmetries.
//!
//! `A^0_{uldr} = lambda d_{ul} d_{dr}` and `A^1_{uldr} = d_{ur} d_{dl}`.
//! The explicitly invariant variant replaces the tile-0 pairs by singlets
//! `w = |01> - |10>`: `At^0 = lambda w_{ul} w_{dr}`, `At^1 = A^1`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::Tensor;

pub type C64 = Complex64;

pub(crate) fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    A,
    ATilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorParams {
    pub lambda: C64,
    pub variant: Variant,
}

impl Default for TensorParams {
    fn default() -> Self {
        TensorParams { lambda: c(1.0), variant: Variant::A }
    }
}

impl TensorParams {
    pub fn a(lambda: f64) -> Self {
        TensorParams { lambda: c(lambda), variant: Variant::A }
    }

    pub fn a_tilde(lambda: f64) -> Self {
        TensorParams { lambda: c(lambda), variant: Variant::ATilde }
    }
}

/// Flat index of a virtual leg assignment in `(u, l, d, r)` bit order.
pub fn leg_index(u: usize, l: usize, d: usize, r: usize) -> usize {
    u | (l << 1) | (d << 2) | (r << 3)
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn singlet(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    }
}

/// `entries[i][leg_index(u,l,d,r)]`.
pub type Entries = [[C64; 16]; 2];

pub fn tensor_entries(params: TensorParams) -> Entries {
    let mut t = [[c(0.0); 16]; 2];
    for u in 0..2 {
        for l in 0..2 {
            for d in 0..2 {
                for r in 0..2 {
                    let k = leg_index(u, l, d, r);
                    let zero = match params.variant {
                        Variant::A => delta(u, l) * delta(d, r),
                        Variant::ATilde => singlet(u, l) * singlet(d, r),
                    };
                    t[0][k] = params.lambda * zero;
                    t[1][k] = c(delta(u, r) * delta(d, l));
                }
            }
        }
    }
    t
}

/// Tensor with legs `[phys, u, l, d, r]`.
pub fn site_tensor(entries: &Entries, phys: usize, legs: [usize; 4]) -> Tensor {
    let mut data = vec![c(0.0); 32];
    for i in 0..2 {
        for k in 0..16 {
            data[i | (k << 1)] = entries[i][k];
        }
    }
    Tensor { legs: vec![phys, legs[0], legs[1], legs[2], legs[3]], data }
}

pub type Mat2 = [[C64; 2]; 2];

pub fn identity2() -> Mat2 {
    [[c(1.0), c(0.0)], [c(0.0), c(1.0)]]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

pub fn conj2(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[0][1].conj()], [a[1][0].conj(), a[1][1].conj()]]
}

pub fn transpose2(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// `D_phi = diag(e^{i phi}, e^{-i phi})`.
pub fn phase_diag(phi: f64) -> Mat2 {
    [[C64::from_polar(1.0, phi), c(0.0)], [c(0.0), C64::from_polar(1.0, -phi)]]
}

/// The matrix `Y = [[0, 1], [-1, 0]]`.
pub fn y_matrix() -> Mat2 {
    [[c(0.0), c(1.0)], [c(-1.0), c(0.0)]]
}

/// Acts with `mats[k]` on virtual leg `k`: `new[x'] = sum_x M[x'][x] old[x]`.
pub fn act_on_legs(entries: &Entries, mats: [&Mat2; 4]) -> Entries {
    let mut out = [[c(0.0); 16]; 2];
    for i in 0..2 {
        for k_new in 0..16 {
            let mut acc = c(0.0);
            for k_old in 0..16 {
                let v = entries[i][k_old];
                if v == c(0.0) {
                    continue;
                }
                let mut f = c(1.0);
                for leg in 0..4 {
                    f *= mats[leg][(k_new >> leg) & 1][(k_old >> leg) & 1];
                }
                acc += f * v;
            }
            out[i][k_new] = acc;
        }
    }
    out
}

/// Haar-random element of SU(2).
pub fn random_su2<R: Rng>(rng: &mut R) -> Mat2 {
    let v = loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            break v.map(|x| x / n);
        }
    };
    let a = C64::new(v[0], v[1]);
    let b = C64::new(v[2], v[3]);
    [[a, b], [-b.conj(), a.conj()]]
}

fn max_diff(a: &Entries, b: &Entries) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for k in 0..16 {
            m = m.max((a[i][k] - b[i][k]).norm());
        }
    }
    m
}

/// Residuals of the tensor-level symmetry checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// Largest deviation of `g x g x conj(g) x conj(g)` acting on `At` from `At`.
    pub su2_residual: f64,
    /// Deviation of `A(lambda)` from `At(-lambda)` with `Y` on the up and
    /// right legs, and with `Y` on the left and down legs.
    pub gauge_residual: f64,
    pub trials: usize,
}

/// Random SU(2) invariance of the singlet tensor and its gauge relation to `A`.
///
/// `Y` acts on the up/right (or left/down) legs with the convention of
/// [`act_on_legs`]; under it the tile-0 component picks up a sign, so the
/// gauge image of `At(lambda)` is `A(-lambda)`.
pub fn symmetry_selftest(lambda: C64, trials: usize, seed: u64) -> SymmetryReport {
    let at = tensor_entries(TensorParams { lambda, variant: Variant::ATilde });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut su2: f64 = 0.0;
    for _ in 0..trials.max(1) {
        let g = random_su2(&mut rng);
        let gb = conj2(&g);
        su2 = su2.max(max_diff(&act_on_legs(&at, [&g, &g, &gb, &gb]), &at));
    }
    let a_neg = tensor_entries(TensorParams { lambda: -lambda, variant: Variant::A });
    let y = y_matrix();
    let id = identity2();
    let ur = act_on_legs(&at, [&y, &id, &id, &y]);
    let ld = act_on_legs(&at, [&id, &y, &y, &id]);
    let gauge = max_diff(&ur, &a_neg).max(max_diff(&ld, &a_neg));
    SymmetryReport { su2_residual: su2, gauge_residual: gauge, trials: trials.max(1) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_follow_the_delta_pattern() {
        let a = tensor_entries(TensorParams::a(0.7));
        assert_eq!(a[0][leg_index(0, 0, 1, 1)], c(0.7));
        assert_eq!(a[1][leg_index(0, 0, 1, 1)], c(0.0));
        assert_eq!(a[1][leg_index(1, 0, 0, 1)], c(1.0));
        let at = tensor_entries(TensorParams::a_tilde(0.7));
        assert_eq!(at[0][leg_index(0, 1, 0, 1)], c(0.7));
        assert_eq!(at[0][leg_index(1, 0, 0, 1)], c(-0.7));
        assert_eq!(at[0][leg_index(0, 0, 1, 1)], c(0.0));
    }

    #[test]
    fn identity_group_element_leaves_the_tensor_unchanged() {
        let at = tensor_entries(TensorParams::a_tilde(1.3));
        let id = identity2();
        assert_eq!(max_diff(&act_on_legs(&at, [&id, &id, &id, &id]), &at), 0.0);
    }

    #[test]
    fn symmetry_residuals_vanish() {
        let r = symmetry_selftest(c(1.0), 100, 7);
        assert!(r.su2_residual < 1e-12, "{:?}", r);
        assert!(r.gauge_residual < 1e-15, "{:?}", r);
        let r = symmetry_selftest(C64::new(0.3, -1.1), 20, 8);
        assert!(r.su2_residual < 1e-12 && r.gauge_residual < 1e-15, "{:?}", r);
    }

    #[test]
    fn random_group_elements_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let g = random_su2(&mut rng);
            let p = mat_mul(&g, &transpose2(&conj2(&g)));
            assert!((p[0][0] - c(1.0)).norm() < 1e-12 && p[0][1].norm() < 1e-12);
        }
    }
}
