//! 3×3 helpers: determinant, pivoted solve, and characteristic-polynomial eigenvalues.

use num_complex::Complex64;

pub type Mat3 = [[f64; 3]; 3];

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `det(m - λI)` for complex `λ`.
pub fn char_poly_at(m: &Mat3, lambda: Complex64) -> Complex64 {
    let a = |i: usize, j: usize| {
        if i == j {
            Complex64::new(m[i][j], 0.0) - lambda
        } else {
            Complex64::new(m[i][j], 0.0)
        }
    };
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
        - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

/// Solves `m·x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-14` times the largest entry.
pub fn solve3(m: &Mat3, b: &[f64; 3]) -> Option<[f64; 3]> {
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut a = *m;
    let mut rhs = *b;
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Roots of the monic cubic `z³ + a z² + b z + c`, polished by Newton steps.
pub fn monic_cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    // depressed cubic t³ + p t + q, z = t - a/3
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let mut roots = if p == 0.0 {
        let t = (-q).cbrt();
        let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        let t = Complex64::new(t, 0.0);
        [t, t * w, t * w.conj()]
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let big = if q > 0.0 {
            -q / 2.0 - sq
        } else {
            -q / 2.0 + sq
        };
        let u = big.cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let re = -(u + v) / 2.0;
        let im = 3f64.sqrt() / 2.0 * (u - v);
        [
            Complex64::new(u + v, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        [
            Complex64::new(m * phi.cos(), 0.0),
            Complex64::new(m * (phi - tau).cos(), 0.0),
            Complex64::new(m * (phi - 2.0 * tau).cos(), 0.0),
        ]
    };

    for z in roots.iter_mut() {
        *z -= shift;
        for _ in 0..3 {
            let f = ((*z + a) * *z + b) * *z + c;
            let df = (3.0 * *z + 2.0 * a) * *z + b;
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            let next = *z - step;
            let fn_ = ((next + a) * next + b) * next + c;
            if fn_.norm() < f.norm() {
                *z = next;
            } else {
                break;
            }
        }
    }
    roots
}

/// Eigenvalues of a 3×3 matrix via its characteristic polynomial, sorted by
/// descending real part.
pub fn eigenvalues3(m: &Mat3) -> [Complex64; 3] {
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = det3(m);
    // det(λI - m) = λ³ - tr λ² + minors λ - det
    let mut roots = monic_cubic_roots(-trace, minors, -det);
    roots.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    roots
}
