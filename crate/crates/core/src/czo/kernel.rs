use core::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::math::Float;

/// Which convolution kernel.
#[derive(Debug, Clone, Copy)]
pub enum KernelId {
    /// `-1 / (pi z^2)`.
    Beurling,
    /// `x_1 / (2 pi |x|^3)`.
    Riesz1,
    /// `x_2 / (2 pi |x|^3)`.
    Riesz2,
    Custom {
        name: &'static str,
        eval: fn(Point) -> Complex64,
    },
}

/// A convolution kernel with its claimed size/smoothness constant `c_k` and
/// Hölder order `sigma`.
#[derive(Debug, Clone, Copy)]
pub struct KernelSpec {
    pub id: KernelId,
    pub c_k: f64,
    pub sigma: f64,
}

impl KernelSpec {
    /// `|K(x-y) - K(x)| |x|^3 / |y| = |2 - w| / (pi |1 - w|^2)` with
    /// `w = y/x`; over `|w| <= 1/2` the maximum `6/pi` sits at `w = 1/2`.
    pub fn beurling() -> Self {
        KernelSpec { id: KernelId::Beurling, c_k: 6.0 / PI, sigma: 1.0 }
    }

    /// `|grad K(z)| <= 1/(pi |z|^3)` and `|z| >= |x|/2` on the segment give
    /// `8/pi`.
    pub fn riesz1() -> Self {
        KernelSpec { id: KernelId::Riesz1, c_k: 8.0 / PI, sigma: 1.0 }
    }

    pub fn riesz2() -> Self {
        KernelSpec { id: KernelId::Riesz2, c_k: 8.0 / PI, sigma: 1.0 }
    }

    /// A user kernel. The constants are claims that [`verify_kernel`] audits.
    pub fn custom(name: &'static str, eval: fn(Point) -> Complex64, c_k: f64, sigma: f64) -> Self {
        KernelSpec { id: KernelId::Custom { name, eval }, c_k, sigma }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "beurling" => Some(Self::beurling()),
            "riesz1" => Some(Self::riesz1()),
            "riesz2" => Some(Self::riesz2()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.id {
            KernelId::Beurling => "beurling",
            KernelId::Riesz1 => "riesz1",
            KernelId::Riesz2 => "riesz2",
            KernelId::Custom { name, .. } => name,
        }
    }

    /// `K(z)` for `z != 0`.
    #[inline]
    pub fn eval(&self, z: Point) -> Complex64 {
        match self.id {
            KernelId::Beurling => {
                // -1/(pi z^2) = -conj(z)^2 / (pi |z|^4)
                let r2 = z.x * z.x + z.y * z.y;
                let s = -1.0 / (PI * r2 * r2);
                Complex64::new(s * (z.x * z.x - z.y * z.y), -s * 2.0 * z.x * z.y)
            }
            KernelId::Riesz1 => {
                let r2 = z.x * z.x + z.y * z.y;
                Complex64::new(z.x / (2.0 * PI * r2 * r2.sqrt()), 0.0)
            }
            KernelId::Riesz2 => {
                let r2 = z.x * z.x + z.y * z.y;
                Complex64::new(z.y / (2.0 * PI * r2 * r2.sqrt()), 0.0)
            }
            KernelId::Custom { eval, .. } => eval(z),
        }
    }
}

/// Sampled audit of the size and Hölder conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelAudit {
    pub samples: usize,
    /// `max |K(x)| |x|^d`.
    pub max_size: f64,
    /// `max |K(x-y) - K(x)| |x|^(d+sigma) / |y|^sigma` over `0 < 2|y| <= |x|`.
    pub max_smoothness: f64,
    /// `max |mean of K over a circle| * r^d`; the quadrature relies on zero.
    pub max_circle_mean: f64,
    pub c_k: f64,
    pub sigma: f64,
    pub size_ok: bool,
    pub smoothness_ok: bool,
}

/// Checks both kernel conditions at `n_samples` seeded random points.
pub fn verify_kernel(spec: &KernelSpec, n_samples: usize, seed: u64) -> KernelAudit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut size, mut smooth, mut circle) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..n_samples {
        let r = 10f64.powf(rng.gen_range(-2.0..2.0));
        let a = rng.gen_range(0.0..2.0 * PI);
        let x = Point::new(r * a.cos(), r * a.sin());
        size = size.max(spec.eval(x).norm() * r * r);
        // y uniform in the disk of radius |x|/2
        let ry = 0.5 * r * rng.gen_range(0.0..1.0_f64).sqrt();
        let b = rng.gen_range(0.0..2.0 * PI);
        let y = Point::new(ry * b.cos(), ry * b.sin());
        if ry > 0.0 {
            let q = (spec.eval(x - y) - spec.eval(x)).norm() * r.powf(2.0 + spec.sigma) / ry.powf(spec.sigma);
            smooth = smooth.max(q);
        }
        if k % 64 == 0 {
            let n = 256;
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..n {
                let th = (t as f64 + 0.5) * 2.0 * PI / n as f64;
                acc += spec.eval(Point::new(r * th.cos(), r * th.sin()));
            }
            circle = circle.max((acc / n as f64).norm() * r * r);
        }
    }
    KernelAudit {
        samples: n_samples,
        max_size: size,
        max_smoothness: smooth,
        max_circle_mean: circle,
        c_k: spec.c_k,
        sigma: spec.sigma,
        size_ok: size <= spec.c_k,
        smoothness_ok: smooth <= spec.c_k,
    }
}
