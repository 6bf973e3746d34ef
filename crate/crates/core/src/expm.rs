//! Dense complex matrix exponential via scaling-and-squaring with a
//! Pade(13,13) approximant (Higham 2005).
//!
//! Used as an independent oracle against the closed-form displacement matrix
//! and as a general utility; nothing in the closed-form path calls this.

use ndarray::Array2;
use num_complex::Complex64;

// Pade(13,13) coefficients, Higham (2005) eq. (10.33).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &Array2<Complex64>) -> f64 {
    let mut best = 0.0f64;
    for col in a.columns() {
        let s: f64 = col.iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

fn eye(n: usize) -> Array2<Complex64> {
    Array2::from_diag_elem(n, Complex64::new(1.0, 0.0))
}

/// Solve `A X = B` in place by LU with partial pivoting; `A` and `B` are
/// consumed. Panics on a singular system (cannot happen for the diagonally
/// dominant Pade denominator).
fn solve(mut a: Array2<Complex64>, mut b: Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    for k in 0..n {
        let mut piv = k;
        let mut best = a[[k, k]].norm();
        for r in (k + 1)..n {
            let v = a[[r, k]].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        assert!(best > 0.0, "singular matrix in Pade solve");
        if piv != k {
            for c in 0..n {
                a.swap([k, c], [piv, c]);
            }
            for c in 0..b.ncols() {
                b.swap([k, c], [piv, c]);
            }
        }
        let d = a[[k, k]];
        for r in (k + 1)..n {
            let f = a[[r, k]] / d;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in k..n {
                let v = a[[k, c]];
                a[[r, c]] -= f * v;
            }
            for c in 0..b.ncols() {
                let v = b[[k, c]];
                b[[r, c]] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        let d = a[[k, k]];
        for c in 0..b.ncols() {
            let mut acc = b[[k, c]];
            for j in (k + 1)..n {
                acc -= a[[k, j]] * b[[j, c]];
            }
            b[[k, c]] = acc / d;
        }
    }
    b
}

/// Compute `exp(A)` for a square complex matrix.
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return Array2::zeros((0, 0));
    }

    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a = a.mapv(|z| z / 2.0f64.powi(squarings as i32));

    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let id = eye(n);

    // u = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let w1 = &a6 * PADE13[13] + &a4 * PADE13[11] + &a2 * PADE13[9];
    let w2 = &a6 * PADE13[7] + &a4 * PADE13[5] + &a2 * PADE13[3] + &id * PADE13[1];
    let u = a.dot(&(a6.dot(&w1) + w2));
    // v = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let z1 = &a6 * PADE13[12] + &a4 * PADE13[10] + &a2 * PADE13[8];
    let v = a6.dot(&z1) + &a6 * PADE13[6] + &a4 * PADE13[4] + &a2 * PADE13[2] + &id * PADE13[0];

    // exp(A) ~ (v - u)^-1 (v + u)
    let mut r = solve(&v - &u, &v + &u);
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z: Array2<Complex64> = Array2::zeros((4, 4));
        let e = expm(&z);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e[[i, j]] - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn exp_of_diagonal() {
        let mut a: Array2<Complex64> = Array2::zeros((3, 3));
        a[[0, 0]] = c(0.3, 0.0);
        a[[1, 1]] = c(0.0, 1.2);
        a[[2, 2]] = c(-2.0, 0.7);
        let e = expm(&a);
        for i in 0..3 {
            let want = a[[i, i]].exp();
            assert!((e[[i, i]] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn exp_of_pauli_x_rotation() {
        // exp(i t X) = cos t I + i sin t X
        let t = 0.83;
        let mut a: Array2<Complex64> = Array2::zeros((2, 2));
        a[[0, 1]] = c(0.0, t);
        a[[1, 0]] = c(0.0, t);
        let e = expm(&a);
        assert!((e[[0, 0]] - c(t.cos(), 0.0)).norm() < 1e-14);
        assert!((e[[0, 1]] - c(0.0, t.sin())).norm() < 1e-14);
        assert!((e[[1, 0]] - c(0.0, t.sin())).norm() < 1e-14);
        assert!((e[[1, 1]] - c(t.cos(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn anti_hermitian_exponential_is_unitary() {
        // A = i eta (a + a^dag) truncated; exp should be unitary even with
        // several squarings.
        let n = 24;
        let eta = 1.7;
        let mut a: Array2<Complex64> = Array2::zeros((n, n));
        for k in 0..n - 1 {
            let v = eta * ((k + 1) as f64).sqrt();
            a[[k, k + 1]] = c(0.0, v);
            a[[k + 1, k]] = c(0.0, v);
        }
        let e = expm(&a);
        let edag = e.t().mapv(|z| z.conj());
        let prod = edag.dot(&e);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[[i, j]] - c(want, 0.0)).norm());
            }
        }
        assert!(worst < 1e-12, "unitarity deviation {worst}");
    }
}
