//! Small fixed-dimension complex linear algebra.
//!
//! Everything here works on 2×2 and 4×4 matrices, which is all a single spin
//! and a two-spin register need. Pauli conventions:
//! σx = [[0, 1], [1, 0]], σy = [[0, −i], [i, 0]], σz = diag(1, −1).

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

/// Tolerance on ‖U†U − 𝟙‖_F above which an input is not treated as unitary.
pub const UNITARY_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2×2 Hermitian operator `c0·𝟙 + cx·σx + cy·σy + cz·σz`.
///
/// Coefficients are angular frequencies. Hamiltonians, invariants and the
/// gauge potential of a rotating-field loop all live in this form.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HermitianDecomp {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
}

impl HermitianDecomp {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(c0: f64, cx: f64, cy: f64, cz: f64) -> Self {
        Self { c0, cx, cy, cz }
    }

    /// Length of the Bloch (traceless) part.
    pub fn norm_bloch(&self) -> f64 {
        (self.cx * self.cx + self.cy * self.cy + self.cz * self.cz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.c0.is_finite() && self.cx.is_finite() && self.cy.is_finite() && self.cz.is_finite()
    }

    /// Eigenvalues `(c0 + b, c0 − b)` with `b` the Bloch norm.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let b = self.norm_bloch();
        (self.c0 + b, self.c0 - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.c0 * s, self.cx * s, self.cy * s, self.cz * s)
    }

    /// Largest field-wise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = *self - *other;
        d.c0.abs().max(d.cx.abs()).max(d.cy.abs()).max(d.cz.abs())
    }

    /// The composed matrix. Callers that cannot guarantee finite fields should
    /// go through [`pauli_compose`].
    pub fn matrix(&self) -> Mat2 {
        Mat([
            [
                Complex64::new(self.c0 + self.cz, 0.0),
                Complex64::new(self.cx, -self.cy),
            ],
            [
                Complex64::new(self.cx, self.cy),
                Complex64::new(self.c0 - self.cz, 0.0),
            ],
        ])
    }

    /// Hermitian part of an arbitrary 2×2 matrix in Pauli coordinates.
    pub fn from_matrix(m: &Mat2) -> Self {
        let [[a, b], [c, d]] = m.0;
        Self::new(
            0.5 * (a.re + d.re),
            0.5 * (b.re + c.re),
            0.5 * (c.im - b.im),
            0.5 * (a.re - d.re),
        )
    }

    /// `exp(−i·M·t)` through the spectral formula
    /// `e^{−i c0 t} [cos(bt) 𝟙 − i sin(bt) ĉ·σ]`.
    pub fn propagator(&self, t: f64) -> Mat2 {
        let b = self.norm_bloch();
        let (cos_bt, sin_over_b) = if b > 0.0 {
            let bt = b * t;
            (bt.cos(), bt.sin() / b)
        } else {
            (1.0, t)
        };
        let phase = Complex64::from_polar(1.0, -self.c0 * t);
        let d = Complex64::new(cos_bt, -sin_over_b * self.cz);
        let e = Complex64::new(cos_bt, sin_over_b * self.cz);
        // −i·s·(cx σx + cy σy): off-diagonals −i s (cx ∓ i cy)
        let upper = Complex64::new(-sin_over_b * self.cy, -sin_over_b * self.cx);
        let lower = Complex64::new(sin_over_b * self.cy, -sin_over_b * self.cx);
        Mat([[phase * d, phase * upper], [phase * lower, phase * e]])
    }
}

impl Add for HermitianDecomp {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.c0 + rhs.c0,
            self.cx + rhs.cx,
            self.cy + rhs.cy,
            self.cz + rhs.cz,
        )
    }
}

impl Sub for HermitianDecomp {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.c0 - rhs.c0,
            self.cx - rhs.cx,
            self.cy - rhs.cy,
            self.cz - rhs.cz,
        )
    }
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat<const N: usize>(pub [[Complex64; N]; N]);

pub type Mat2 = Mat<2>;
pub type Mat4 = Mat<4>;

impl<const N: usize> Default for Mat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Mat<N> {
    pub fn zeros() -> Self {
        Mat([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖U†U − 𝟙‖_F.
    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self - Self::identity()).frobenius_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn apply(&self, ket: &Ket<N>) -> Ket<N> {
        let mut out = [ZERO; N];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row.iter().zip(ket.0.iter()).map(|(a, b)| a * b).sum();
        }
        Ket(out)
    }

    /// Frobenius norm of the strictly off-diagonal part.
    pub fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            for j in 0..N {
                if i != j {
                    acc += self.0[i][j].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }
}

impl<const N: usize> Mul for Mat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

impl<const N: usize> Add for Mat<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        out.0
            .iter_mut()
            .flatten()
            .zip(rhs.0.iter().flatten())
            .for_each(|(a, b)| *a += b);
        out
    }
}

impl<const N: usize> Sub for Mat<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        out.0
            .iter_mut()
            .flatten()
            .zip(rhs.0.iter().flatten())
            .for_each(|(a, b)| *a -= b);
        out
    }
}

impl Mat2 {
    pub fn sigma_x() -> Self {
        Mat([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma_y() -> Self {
        Mat([[ZERO, -I], [I, ZERO]])
    }

    pub fn sigma_z() -> Self {
        Mat([[ONE, ZERO], [ZERO, -ONE]])
    }

    /// Kronecker product `self ⊗ rhs`; `self` acts on the first (most
    /// significant) tensor factor.
    pub fn kron(&self, rhs: &Mat2) -> Mat4 {
        let mut out = Mat4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out.0[2 * i + k][2 * j + l] = self.0[i][j] * rhs.0[k][l];
                    }
                }
            }
        }
        out
    }
}

/// Complex state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket<const N: usize>(pub [Complex64; N]);

pub type Ket2 = Ket<2>;
pub type Ket4 = Ket<4>;

impl<const N: usize> Ket<N> {
    pub fn basis(index: usize) -> Self {
        let mut out = [ZERO; N];
        out[index] = ONE;
        Ket(out)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidInput(
                "cannot normalize a zero or non-finite state".into(),
            ));
        }
        let mut out = *self;
        out.0.iter_mut().for_each(|z| *z /= n);
        Ok(out)
    }

    /// `⟨ψ|M|ψ⟩` (real part; `M` is expected Hermitian).
    pub fn expectation(&self, m: &Mat<N>) -> f64 {
        self.inner(&m.apply(self)).re
    }
}

impl<const N: usize> From<[Complex64; N]> for Ket<N> {
    fn from(amplitudes: [Complex64; N]) -> Self {
        Ket(amplitudes)
    }
}

impl Ket2 {
    /// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a normalized state.
    pub fn bloch(&self) -> [f64; 3] {
        let [a, b] = self.0;
        let cross = a.conj() * b;
        [2.0 * cross.re, 2.0 * cross.im, a.norm_sqr() - b.norm_sqr()]
    }
}

/// Composes `c0·𝟙 + cx·σx + cy·σy + cz·σz`.
pub fn pauli_compose(h: &HermitianDecomp) -> Result<Mat2> {
    if !h.is_finite() {
        return Err(Error::InvalidInput(format!(
            "non-finite Pauli coefficients {h:?}"
        )));
    }
    Ok(h.matrix())
}

/// `exp(−i·M·t)` for `M = pauli_compose(h)`.
pub fn herm_exp(h: &HermitianDecomp, t: f64) -> Result<Mat2> {
    if !h.is_finite() || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "non-finite generator {h:?} or time {t}"
        )));
    }
    Ok(h.propagator(t))
}

fn check_unitary<const N: usize>(m: &Mat<N>, name: &str) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::InvalidInput(format!(
            "{name} has non-finite entries"
        )));
    }
    let defect = m.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::InvalidInput(format!(
            "{name} is not unitary (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// `min_γ ‖u − e^{iγ} v‖_F`, zero iff the two unitaries differ by a global
/// phase.
///
/// The minimizer is `e^{iγ} = conj(tr(u†v)) / |tr(u†v)|`; the residual is
/// evaluated directly rather than through `√(2d − 2|tr(u†v)|)` so that
/// distances far below √ε survive.
pub fn global_phase_distance<const N: usize>(u: &Mat<N>, v: &Mat<N>) -> Result<f64> {
    check_unitary(u, "u")?;
    check_unitary(v, "v")?;
    Ok(aligned_distance(u, v))
}

pub(crate) fn aligned_distance<const N: usize>(u: &Mat<N>, v: &Mat<N>) -> f64 {
    let overlap = (u.dagger() * *v).trace();
    let align = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        ONE
    };
    (*u - v.scale(align)).frobenius_norm()
}

/// Gate fidelity `|tr(u†v)| / N`.
pub fn fidelity<const N: usize>(u: &Mat<N>, v: &Mat<N>) -> f64 {
    (u.dagger() * *v).trace().norm() / N as f64
}

/// Reduces `x` modulo 2π into (−π, π]; −π maps to +π.
pub fn principal_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Distance between two angles on the circle, in [0, π].
pub fn angle_gap(a: f64, b: f64) -> f64 {
    principal_angle(a - b).abs()
}
