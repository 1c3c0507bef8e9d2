//! Eigenvalues of real 3x3 matrices from the characteristic cubic.
//!
//! `det(M - λI) = 0` expands to `λ³ - tr(M)λ² + c₂λ - det(M) = 0`, where `c₂`
//! is the sum of the principal 2x2 minors. Substituting `λ = t + tr/3` gives
//! the depressed cubic `t³ + pt + q = 0`, solved in closed form: Cardano for
//! one real root and a conjugate pair, the trigonometric form for three real
//! roots, and the repeated-root form when the discriminant vanishes.

use num_complex::Complex;

use crate::frame::{Matrix3, Neighborhood3x3};
use crate::scalar::Scalar;

/// Relative discriminant magnitude below which roots are treated as repeated.
pub const REPEATED_ROOT_EPS: f64 = 1e-12;

pub fn trace<S: Scalar>(m: &Matrix3<S>) -> S {
    m[0][0] + m[1][1] + m[2][2]
}

pub fn determinant<S: Scalar>(m: &Matrix3<S>) -> S {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Sum of the three principal 2x2 minors.
pub fn principal_minor_sum<S: Scalar>(m: &Matrix3<S>) -> S {
    (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
}

/// The three (possibly complex) eigenvalues of a real 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple<S> {
    values: [Complex<S>; 3],
}

impl<S: Scalar> EigenTriple<S> {
    pub fn values(&self) -> &[Complex<S>; 3] {
        &self.values
    }

    pub fn sum(&self) -> Complex<S> {
        self.values[0] + self.values[1] + self.values[2]
    }

    pub fn product(&self) -> Complex<S> {
        self.values[0] * self.values[1] * self.values[2]
    }

    /// True when every eigenvalue has a zero imaginary part.
    pub fn all_real(&self) -> bool {
        self.values.iter().all(|v| v.im == S::zero())
    }

    /// Real parts sorted ascending, if all roots are real.
    pub fn real_sorted(&self) -> Option<[S; 3]> {
        if !self.all_real() {
            return None;
        }
        let mut re = self.values.map(|v| v.re);
        re.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        Some(re)
    }
}

/// Roots of the characteristic cubic of `m`.
pub fn eigen_values_3x3<S: Scalar>(m: &Matrix3<S>) -> EigenTriple<S> {
    let tr = trace(m);
    let c2 = principal_minor_sum(m);
    let det = determinant(m);
    let values = cubic_roots(tr, c2, det);
    EigenTriple { values }
}

/// Roots of `λ³ - tr·λ² + c2·λ - det`.
fn cubic_roots<S: Scalar>(tr: S, c2: S, det: S) -> [Complex<S>; 3] {
    let two = S::lit(2.0);
    let three = S::lit(3.0);
    let shift = tr / three;
    // λ³ + aλ² + bλ + c with a = -tr, b = c2, c = -det.
    let (a, b, c) = (-tr, c2, -det);
    let p = b - a * a / three;
    let q = two * a * a * a / S::lit(27.0) - a * b / three + c;

    let half_q = q / two;
    let third_p = p / three;
    let half_q_sq = half_q * half_q;
    let third_p_cu = third_p * third_p * third_p;
    let disc = half_q_sq + third_p_cu;
    let scale = S::one() + half_q_sq + third_p_cu.abs();

    let real = |t: S| Complex::new(t + shift, S::zero());
    if disc.abs() <= S::lit(REPEATED_ROOT_EPS) * scale {
        // Repeated root: t1 = 2u, t2 = t3 = -u with u = cbrt(-q/2).
        let u = (-half_q).cbrt();
        return [real(two * u), real(-u), real(-u)];
    }
    if disc > S::zero() {
        let sq = disc.sqrt();
        let u = (-half_q + sq).cbrt();
        let v = (-half_q - sq).cbrt();
        let re = -(u + v) / two;
        let im = (u - v) * three.sqrt() / two;
        return [
            real(u + v),
            Complex::new(re + shift, im),
            Complex::new(re + shift, -im),
        ];
    }
    // Three distinct real roots; p < 0 here.
    let r = two * (-third_p).sqrt();
    let cos_arg = (three * q / (two * p) * (-three / p).sqrt()).max(-S::one()).min(S::one());
    let phi = cos_arg.acos() / three;
    let step = two * S::PI() / three;
    [
        real(r * phi.cos()),
        real(r * (phi - step).cos()),
        real(r * (phi - two * step).cos()),
    ]
}

/// Sum of the eigenvalues of the window, computed as its trace.
pub fn eigen_sum<S: Scalar>(m: &Neighborhood3x3<S>) -> S {
    trace(m.rows())
}
