//! Drive parameters, 2×2 Pauli algebra and a small dense complex matrix type.
//!
//! Spin basis ordering is `[|↑⟩, |↓⟩]` throughout, so `σ_z = diag(1, −1)` and
//! `σ₊ = |↑⟩⟨↓|`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Physical inputs of the bichromatic drive
/// `H(t) = ½ω₀σ_z + Σ_j (A_j/2) cos(ω_j t + φ_j) σ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub omega0: f64,
    pub a1: f64,
    pub a2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl DriveParams {
    pub fn new(omega0: f64, a1: f64, a2: f64, omega1: f64, omega2: f64) -> Self {
        DriveParams { omega0, a1, a2, omega1, omega2, phi1: 0.0, phi2: 0.0 }
    }

    /// Parameters in units of ω₁ with `ω₂ = 1 + Δ` and `A₂ = r·A₁`.
    pub fn with_ratio(omega0: f64, a1: f64, r: f64, delta: f64) -> Self {
        DriveParams::new(omega0, a1, r * a1, 1.0, 1.0 + delta)
    }

    pub fn with_phases(mut self, phi1: f64, phi2: f64) -> Self {
        self.phi1 = phi1;
        self.phi2 = phi2;
        self
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn validate(self) -> Result<Self> {
        let fields = [
            ("omega0", self.omega0),
            ("a1", self.a1),
            ("a2", self.a2),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("phi1", self.phi1),
            ("phi2", self.phi2),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::NonFiniteParameter(name));
            }
        }
        for (name, v) in [("omega0", self.omega0), ("omega1", self.omega1), ("omega2", self.omega2)] {
            if v <= 0.0 {
                return Err(Error::NonPositiveFrequency(name));
            }
        }
        if self.omega1 == self.omega2 {
            return Err(Error::EqualFrequencies);
        }
        if self.a1 < 0.0 {
            return Err(Error::NegativeAmplitude("a1"));
        }
        if self.a2 < 0.0 {
            return Err(Error::NegativeAmplitude("a2"));
        }
        Ok(self)
    }

    /// `r = A₂/A₁`, reported only when `A₁ > 0`.
    pub fn ratio(&self) -> Option<f64> {
        (self.a1 > 0.0).then(|| self.a2 / self.a1)
    }

    /// Beat frequency `Δ = ω₂ − ω₁`.
    pub fn beat(&self) -> f64 {
        self.omega2 - self.omega1
    }

    pub fn phase_difference(&self) -> f64 {
        self.phi2 - self.phi1
    }

    /// The same physics rescaled to units of ω₁, together with the scale factor ω₁.
    pub fn normalized(&self) -> (DriveParams, f64) {
        let s = self.omega1;
        let p = DriveParams {
            omega0: self.omega0 / s,
            a1: self.a1 / s,
            a2: self.a2 / s,
            omega1: 1.0,
            omega2: self.omega2 / s,
            phi1: self.phi1,
            phi2: self.phi2,
        };
        (p, s)
    }

    /// The lab-frame Hamiltonian at time `t`.
    pub fn hamiltonian(&self, t: f64) -> Mat2 {
        let drive = 0.5 * self.a1 * (self.omega1 * t + self.phi1).cos()
            + 0.5 * self.a2 * (self.omega2 * t + self.phi2).cos();
        Mat2::new([
            [C64::new(0.5 * self.omega0, 0.0), C64::new(drive, 0.0)],
            [C64::new(drive, 0.0), C64::new(-0.5 * self.omega0, 0.0)],
        ])
    }

    /// Largest frequency scale in the problem.
    pub fn max_scale(&self) -> f64 {
        [self.omega0, self.omega1, self.omega2, self.a1, self.a2]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Complex 2×2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(m: [[C64; 2]; 2]) -> Self {
        Mat2(m)
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2([
            [C64::new(m[0][0], 0.0), C64::new(m[0][1], 0.0)],
            [C64::new(m[1][0], 0.0), C64::new(m[1][1], 0.0)],
        ])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |U†U − I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Mat2::identity()).max_abs()
    }

    /// `exp(−iθ σ_x)` in closed form.
    pub fn exp_sigma_x(theta: f64) -> Mat2 {
        let (s, c) = theta.sin_cos();
        Mat2([[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]])
    }

    /// `diag(e^{iθ/2}, e^{−iθ/2}) = exp(iθσ_z/2)`.
    pub fn rotation_z(theta: f64) -> Mat2 {
        Mat2([[C64::from_polar(1.0, 0.5 * theta), ZERO], [ZERO, C64::from_polar(1.0, -0.5 * theta)]])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut r = [[ZERO; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }
}

/// The Pauli matrices and ladder operators.
#[derive(Debug, Clone, Copy)]
pub struct PauliAlgebra {
    pub sigma_0: Mat2,
    pub sigma_x: Mat2,
    pub sigma_y: Mat2,
    pub sigma_z: Mat2,
    pub sigma_plus: Mat2,
    pub sigma_minus: Mat2,
}

pub const PAULI: PauliAlgebra = PauliAlgebra {
    sigma_0: Mat2::identity(),
    sigma_x: Mat2::new([[ZERO, ONE], [ONE, ZERO]]),
    sigma_y: Mat2::new([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]]),
    sigma_z: Mat2::new([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]]),
    sigma_plus: Mat2::new([[ZERO, ONE], [ZERO, ZERO]]),
    sigma_minus: Mat2::new([[ZERO, ZERO], [ONE, ZERO]]),
};

/// Square dense complex matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] += v;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// True when every imaginary part vanishes exactly.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }
}
