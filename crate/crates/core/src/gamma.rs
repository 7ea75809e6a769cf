//! Two-dimensional Dirac matrices for 2+1 dimensions.

use num_complex::Complex64;

/// 2×2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, c: Complex64) -> Mat2 {
        let m = &self.0;
        Mat2([[c * m[0][0], c * m[0][1]], [c * m[1][0], c * m[1][1]]])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    #[allow(clippy::needless_range_loop)]
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = Mat2::ZERO;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        out
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] += rhs.0[r][c];
            }
        }
        out
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(-ONE)
    }
}

/// Minkowski metric `diag(1, -1, -1, -1)`; its 2+1 block is the leading 3×3.
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// `gamma^0 = σ1`, `gamma^1 = iσ2`, `gamma^2 = iσ3`, with the Fermi-speed
/// rescaling `rho = diag(1, v_F, v_F)`.
#[derive(Debug, Clone, Copy)]
pub struct GammaBasis {
    pub gamma: [Mat2; 3],
    pub rho: [f64; 3],
}

impl GammaBasis {
    pub fn new(v_f: f64) -> Self {
        let sigma1 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
        let sigma2 = Mat2([[ZERO, -I], [I, ZERO]]);
        let sigma3 = Mat2([[ONE, ZERO], [ZERO, -ONE]]);
        GammaBasis {
            gamma: [sigma1, sigma2.scale(I), sigma3.scale(I)],
            rho: [1.0, v_f, v_f],
        }
    }

    pub fn eta(mu: usize, nu: usize) -> f64 {
        if mu == nu {
            ETA[mu]
        } else {
            0.0
        }
    }

    /// `gamma^mu x_mu` for a covariant (lower-index) three-vector.
    pub fn slash(&self, lower: [Complex64; 3]) -> Mat2 {
        (0..3).fold(Mat2::ZERO, |acc, mu| acc + self.gamma[mu].scale(lower[mu]))
    }

    /// Dirac conjugate `gamma^0 M^† gamma^0`.
    pub fn bar(&self, m: &Mat2) -> Mat2 {
        self.gamma[0] * m.adjoint() * self.gamma[0]
    }

    /// Largest deviation from `{gamma^mu, gamma^nu} = 2 eta^{mu nu}`.
    pub fn clifford_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for mu in 0..3 {
            for nu in 0..3 {
                let anti = self.gamma[mu] * self.gamma[nu] + self.gamma[nu] * self.gamma[mu];
                let target = Mat2::IDENTITY.scale(Complex64::from(2.0 * Self::eta(mu, nu)));
                worst = worst.max((anti - target).max_abs());
            }
        }
        worst
    }

    pub fn trace4(&self, s: usize, m: usize, l: usize, n: usize) -> Complex64 {
        (self.gamma[s] * self.gamma[m] * self.gamma[l] * self.gamma[n]).trace()
    }

    /// Closed form of the four-gamma trace.
    pub fn trace4_expected(s: usize, m: usize, l: usize, n: usize) -> f64 {
        let eta = Self::eta;
        2.0 * (eta(s, m) * eta(l, n) - eta(s, l) * eta(m, n) + eta(s, n) * eta(l, m))
    }

    /// Largest deviation of `trace4` from its closed form over all index tuples.
    pub fn trace_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in 0..3 {
            for m in 0..3 {
                for l in 0..3 {
                    for n in 0..3 {
                        let diff = self.trace4(s, m, l, n) - Self::trace4_expected(s, m, l, n);
                        worst = worst.max(diff.norm());
                    }
                }
            }
        }
        worst
    }
}
