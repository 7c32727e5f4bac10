//! Float helpers shared by the quadrature code.

pub(crate) use num_traits::Float;

/// `r2^(-alpha/2)`, i.e. `|z|^(-alpha)` given `|z|^2`.
///
/// The seminorm kernels spend most of their time here, so the exponents
/// that actually occur for small integer and half-integer `s*q + d` go
/// through `sqrt` instead of `powf`.
#[inline]
pub(crate) fn inv_dist_pow(r2: f64, alpha: f64) -> f64 {
    let twice = alpha * 2.0;
    if twice == 6.0 {
        let r = r2.sqrt();
        1.0 / (r2 * r)
    } else if twice == 4.0 {
        1.0 / r2
    } else if twice == 8.0 {
        1.0 / (r2 * r2)
    } else if twice == 7.0 {
        // |z|^3.5
        let r = r2.sqrt();
        1.0 / (r2 * r * r.sqrt())
    } else if twice == 5.0 {
        let r = r2.sqrt();
        1.0 / (r2 * r.sqrt())
    } else {
        r2.powf(-alpha * 0.5)
    }
}

/// `|t|^q` with the common small integer exponents unrolled.
#[inline]
pub(crate) fn abs_pow(t: f64, q: f64) -> f64 {
    let a = t.abs();
    if q == 2.0 {
        a * a
    } else if q == 1.0 {
        a
    } else if q == 3.0 {
        a * a * a
    } else if q == 4.0 {
        let a2 = a * a;
        a2 * a2
    } else if a == 0.0 {
        0.0
    } else {
        a.powf(q)
    }
}

/// `x^e` for `x >= 0`, exact for `e == 1`.
#[inline]
pub(crate) fn pow_nonneg(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if x == 0.0 {
        0.0
    } else if e == 0.5 {
        x.sqrt()
    } else if e == 2.0 {
        x * x
    } else {
        x.powf(e)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub(crate) fn gauss_legendre(n: usize) -> (alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to the panels `[b[k], b[k+1]]`.
pub(crate) fn panel_rule(breaks: &[f64], n: usize) -> (alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let (gx, gw) = gauss_legendre(n);
    let mut x = alloc::vec::Vec::new();
    let mut w = alloc::vec::Vec::new();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (t, v) in gx.iter().zip(&gw) {
            x.push(mid + half * t);
            w.push(half * v);
        }
    }
    (x, w)
}
