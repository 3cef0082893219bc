//! Independent scalar oracle for the regeneration probability on the
//! `n = 2`, `p = 1` instance with `X = (1, 1)'`.

use statrs::function::erf::erfc;

// X'X = 2 and beta | z ~ N((z1 + z2) / 2, 1/2).

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn big_phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    phi((x - mean) / var.sqrt()) / var.sqrt()
}

pub fn trunc_pdf(z: f64, mean: f64, y: bool) -> f64 {
    if y {
        if z > 0.0 {
            phi(z - mean) / big_phi(mean)
        } else {
            0.0
        }
    } else if z <= 0.0 {
        phi(z - mean) / big_phi(-mean)
    } else {
        0.0
    }
}

pub struct TwoPoint {
    pub y: [bool; 2],
    pub z_star: [f64; 2],
    pub c: f64,
    pub d: f64,
    pub p: f64,
}

impl TwoPoint {
    pub fn beta_given_z(&self, beta: f64, z: [f64; 2]) -> f64 {
        normal_pdf(beta, 0.5 * (z[0] + z[1]), 0.5)
    }

    pub fn z_given_beta(&self, z: [f64; 2], beta: f64) -> f64 {
        trunc_pdf(z[0], beta, self.y[0]) * trunc_pdf(z[1], beta, self.y[1])
    }

    /// `s(z)` with an explicit minorization constant `eps`.
    pub fn s(&self, z: [f64; 2], eps: f64) -> f64 {
        let t = (z[0] - self.z_star[0]) + (z[1] - self.z_star[1]);
        let lin = if t > 0.0 {
            self.c * t
        } else if t < 0.0 {
            self.d * t
        } else {
            0.0
        };
        let quad = |v: [f64; 2]| 0.5 * (v[0] + v[1]).powi(2);
        eps * lin.exp() / (0.5 * quad(z) - 0.5 * quad(self.z_star)).exp()
    }

    pub fn q(&self, beta: f64, z: [f64; 2], eps: f64) -> f64 {
        if beta < self.c || beta > self.d {
            return 0.0;
        }
        self.beta_given_z(beta, self.z_star) * self.z_given_beta(z, beta) / eps
    }

    pub fn eta(&self, from: (f64, [f64; 2]), to: (f64, [f64; 2]), eps: f64) -> f64 {
        let w = self.p * (1.0 - self.p);
        let num = w * self.s(from.1, eps) * self.q(to.0, to.1, eps);
        let beta_then_z = self.beta_given_z(to.0, from.1) * self.z_given_beta(to.1, to.0);
        let z_then_beta = self.z_given_beta(to.1, from.0) * self.beta_given_z(to.0, to.1);
        num / (w * (beta_then_z + z_then_beta))
    }
}

pub const CASES: [((f64, [f64; 2]), (f64, [f64; 2])); 4] = [
    ((0.3, [0.8, -0.4]), (0.1, [1.1, -0.2])),
    ((-0.5, [0.2, -1.5]), (0.45, [0.05, -0.9])),
    ((1.2, [2.0, -0.1]), (-0.2, [0.6, -2.3])),
    ((0.0, [0.5, -0.5]), (0.0, [0.5, -0.5])),
];
