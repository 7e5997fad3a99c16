//! Reference computations that share no code with `repulsive-core`.
//!
//! Each one is slow or narrow on purpose; they exist so the test suites can
//! compare the fast paths against something derived independently.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Dense rectangle-rule evaluation of the one-dimensional Mehler integral
///
/// `(τ/(2πi sinh 2τσ))^{1/2} ∫ exp(iτ((x²+y²) cosh 2τσ − 2xy)/(2 sinh 2τσ)) ψ(y) dy`
///
/// at every node, using the principal square root. O(N²).
pub fn mehler_direct(psi: &[Complex64], nodes: &[f64], dx: f64, tau: f64, sigma: f64) -> Vec<Complex64> {
    assert_eq!(psi.len(), nodes.len());
    if sigma == 0.0 {
        return psi.to_vec();
    }
    let s = (2.0 * tau * sigma).sinh();
    let c = (2.0 * tau * sigma).cosh();
    let prefactor = (Complex64::new(tau, 0.0) / (Complex64::new(0.0, 2.0 * PI * s))).sqrt();
    nodes
        .iter()
        .map(|&x| {
            let mut acc = Complex64::default();
            for (&y, &p) in nodes.iter().zip(psi) {
                let phase = tau * ((x * x + y * y) * c - 2.0 * x * y) / (2.0 * s);
                acc += Complex64::from_polar(1.0, phase) * p;
            }
            acc * prefactor * dx
        })
        .collect()
}

/// The Gaussian `exp(−A x²/2 + B x + D)` carried along by `i u_t = −u_xx − τ² x² u`.
///
/// Substituting the ansatz gives
/// `A' = −2i(A² + τ²)`, `B' = −2iAB`, `D' = −i(A − B²)`,
/// integrated here with classical RK4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiGaussian {
    pub a: Complex64,
    pub b: Complex64,
    pub d: Complex64,
}

impl RiccatiGaussian {
    /// `exp(−width (x − center)²/2 + i momentum x)`.
    pub fn initial(width: f64, center: f64, momentum: f64) -> Self {
        RiccatiGaussian {
            a: Complex64::new(width, 0.0),
            b: Complex64::new(width * center, momentum),
            d: Complex64::new(-0.5 * width * center * center, 0.0),
        }
    }

    fn rhs(&self, tau: f64) -> [Complex64; 3] {
        let i = Complex64::new(0.0, 1.0);
        [
            -2.0 * i * (self.a * self.a + tau * tau),
            -2.0 * i * self.a * self.b,
            -i * (self.a - self.b * self.b),
        ]
    }

    fn shifted(&self, k: &[Complex64; 3], h: f64) -> Self {
        RiccatiGaussian {
            a: self.a + k[0] * h,
            b: self.b + k[1] * h,
            d: self.d + k[2] * h,
        }
    }

    pub fn evolve(&self, tau: f64, time: f64, steps: usize) -> Self {
        let h = time / steps as f64;
        let mut y = *self;
        for _ in 0..steps {
            let k1 = y.rhs(tau);
            let k2 = y.shifted(&k1, 0.5 * h).rhs(tau);
            let k3 = y.shifted(&k2, 0.5 * h).rhs(tau);
            let k4 = y.shifted(&k3, h).rhs(tau);
            let mut k = [Complex64::default(); 3];
            for j in 0..3 {
                k[j] = (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) / 6.0;
            }
            y = y.shifted(&k, h);
        }
        y
    }

    pub fn value(&self, x: f64) -> Complex64 {
        (-0.5 * self.a * x * x + self.b * x + self.d).exp()
    }
}

/// Verdict from cross-multiplied `i128` arithmetic on the reciprocals
/// `1/q = iq_num/iq_den`, `1/r = ir_num/ir_den` (zero numerator means infinity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteVerdict {
    pub admissible: bool,
    pub on_boundary: bool,
    pub is_endpoint: bool,
}

pub fn brute_repulsive(iq: (i128, i128), ir: (i128, i128), n: i128) -> BruteVerdict {
    let (qn, qd) = iq;
    let (rn, rd) = ir;
    assert!(qd > 0 && rd > 0 && qn >= 0 && rn >= 0);
    // q ≥ 2 ⇔ 1/q ≤ 1/2
    let q_ok = 2 * qn <= qd;
    let r_ok = 2 * rn <= rd;
    // 1/q + n/(2r) vs n/4, multiplied by 4 qd rd
    let lhs = 4 * qn * rd + 2 * n * rn * qd;
    let rhs = n * qd * rd;
    let sum_ok = lhs >= rhs;
    let on_boundary = lhs == rhs;
    // (q, r) = (2, 2n/(n−2)) ⇔ 1/q = 1/2, 1/r = (n−2)/(2n)
    let is_endpoint = n >= 3 && 2 * qn == qd && rn * 2 * n == (n - 2) * rd;
    BruteVerdict {
        admissible: q_ok && r_ok && sum_ok,
        on_boundary,
        is_endpoint,
    }
}

/// `k`-th eigenvalue (from 1) of the `m`-point Dirichlet matrix `tridiag(−1, 2, −1)/h²`.
pub fn dirichlet_eigenvalue(k: usize, m: usize, h: f64) -> f64 {
    let s = (k as f64 * PI / (2.0 * (m + 1) as f64)).sin();
    4.0 * s * s / (h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riccati_is_exact_for_free_width_at_zero_time() {
        let g = RiccatiGaussian::initial(1.0, 0.5, 2.0);
        let v = g.value(0.5);
        assert!((v - Complex64::from_polar(1.0, 1.0)).norm() < 1e-14);
        assert_eq!(g.evolve(1.0, 0.0, 10), g);
    }

    #[test]
    fn riccati_centre_amplitude() {
        // a = 1, τ = 1: |u(t,0)| = cosh(4t)^{-1/4}
        let g = RiccatiGaussian::initial(1.0, 0.0, 0.0).evolve(1.0, 0.7, 20_000);
        let want = (4.0f64 * 0.7).cosh().powf(-0.25);
        assert!((g.value(0.0).norm() - want).abs() < 1e-12);
    }

    #[test]
    fn brute_endpoint() {
        let v = brute_repulsive((1, 2), (1, 6), 3);
        assert!(v.admissible && v.on_boundary && v.is_endpoint);
        let v = brute_repulsive((0, 1), (0, 1), 1);
        assert!(!v.admissible);
    }
}
