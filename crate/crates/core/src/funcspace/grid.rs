use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point, WhitneyCover};
use crate::math::{abs_pow, Float};
use crate::Error;

/// Samples of a function at the tensor midpoints of every cube of a cover.
///
/// Cube `i` holds `m^2` values; node `k = a + m*b` sits at
/// `(x0 + (a + 1/2) h/m, y0 + (b + 1/2) h/m)`.
#[derive(Debug, Clone)]
pub struct GridFunction<'c> {
    cover: &'c WhitneyCover,
    m: usize,
    re: Vec<f64>,
    im: Option<Vec<f64>>,
}

/// Closed-form test functions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Builtin {
    Const(f64),
    /// First coordinate.
    X1,
    /// Radial `C^1` bump `(1-r)^2 (1+2r)` of `r = |x - center| / radius`.
    Bump {
        center: Point,
        radius: f64,
    },
    /// `|x - center|^a`.
    Holder {
        a: f64,
        center: Point,
    },
}

/// Radial cubic profile, 1 at the center and `C^1`-flat at `t = 1`.
pub fn bump_profile(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let u = 1.0 - t;
        u * u * (1.0 + 2.0 * t)
    }
}

impl Builtin {
    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            Builtin::Const(c) => c,
            Builtin::X1 => p.x,
            Builtin::Bump { center, radius } => bump_profile((p - center).norm() / radius),
            Builtin::Holder { a, center } => {
                let r = (p - center).norm();
                if r == 0.0 {
                    0.0
                } else {
                    r.powf(a)
                }
            }
        }
    }

    /// Parses `const`, `const:c`, `x1`, `bump` and `holder:a`; bumps and
    /// Hölder functions are centered on the domain's bounding box.
    pub fn parse(name: &str, cover: &WhitneyCover) -> Result<Builtin, Error> {
        let bb = cover.domain().bounding_box();
        let center = bb.center();
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let num = |a: Option<&str>, default: Option<f64>| -> Result<f64, Error> {
            match a {
                Some(t) => t.trim().parse::<f64>().map_err(|_| bad(name)),
                None => default.ok_or_else(|| bad(name)),
            }
        };
        match head {
            "const" => Ok(Builtin::Const(num(arg, Some(1.0))?)),
            "x1" if arg.is_none() => Ok(Builtin::X1),
            "bump" => Ok(Builtin::Bump { center, radius: num(arg, Some(0.5 * bb.width().min(bb.height())))? }),
            "holder" => {
                let a = num(arg, None)?;
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidParameter(alloc::format!("holder exponent must be positive, got {a}")));
                }
                Ok(Builtin::Holder { a, center })
            }
            _ => Err(bad(name)),
        }
    }
}

fn bad(name: &str) -> Error {
    Error::InvalidParameter(alloc::format!("unknown function {name:?}; expected const[:c], x1, bump[:radius] or holder:a"))
}

/// Samples `f` at every node of `cover` with `m x m` nodes per cube.
pub fn sample_function<'c, F: Fn(Point) -> f64>(cover: &'c WhitneyCover, f: F, m: usize) -> Result<GridFunction<'c>, Error> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mm = m * m;
    let mut re = Vec::with_capacity(cover.len() * mm);
    for cube in 0..cover.len() {
        for node in 0..mm {
            let v = f(node_point(cover, m, cube, node));
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { cube, node });
            }
            re.push(v);
        }
    }
    Ok(GridFunction { cover, m, re, im: None })
}

/// Coordinates of node `node` of cube `cube`.
pub fn node_point(cover: &WhitneyCover, m: usize, cube: usize, node: usize) -> Point {
    let c = cover.cube(cube);
    let h = c.side() / m as f64;
    let (a, b) = (node % m, node / m);
    let r = c.rect();
    Point::new(r.x0 + (a as f64 + 0.5) * h, r.y0 + (b as f64 + 0.5) * h)
}

impl<'c> GridFunction<'c> {
    /// Wraps raw node values (real part, optional imaginary part).
    pub fn from_values(cover: &'c WhitneyCover, m: usize, re: Vec<f64>, im: Option<Vec<f64>>) -> Result<Self, Error> {
        let n = cover.len() * m * m;
        if m == 0 || re.len() != n || im.as_ref().is_some_and(|v| v.len() != n) {
            return Err(Error::CoverMismatch);
        }
        for (k, v) in re.iter().chain(im.iter().flatten()).enumerate() {
            if !v.is_finite() {
                let k = k % n;
                return Err(Error::NonFiniteSample { cube: k / (m * m), node: k % (m * m) });
            }
        }
        Ok(GridFunction { cover, m, re, im })
    }

    /// Independent uniform values in `[lo, hi)` at every node.
    pub fn random_uniform(cover: &'c WhitneyCover, m: usize, lo: f64, hi: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let re = (0..cover.len() * m * m).map(|_| rng.gen_range(lo..hi)).collect();
        GridFunction { cover, m, re, im: None }
    }

    pub fn builtin(cover: &'c WhitneyCover, b: Builtin, m: usize) -> Result<Self, Error> {
        sample_function(cover, |p| b.eval(p), m)
    }

    pub fn cover(&self) -> &'c WhitneyCover {
        self.cover
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nodes_per_cube(&self) -> usize {
        self.m * self.m
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn is_complex(&self) -> bool {
        self.im.is_some()
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> Option<&[f64]> {
        self.im.as_deref()
    }

    /// Values of cube `i`.
    pub fn cube_values(&self, i: usize) -> &[f64] {
        let mm = self.m * self.m;
        &self.re[i * mm..(i + 1) * mm]
    }

    /// Flat node index of `(cube, node)`.
    pub fn flat(&self, cube: usize, node: usize) -> usize {
        cube * self.m * self.m + node
    }

    pub fn point(&self, flat: usize) -> Point {
        let mm = self.m * self.m;
        node_point(self.cover, self.m, flat / mm, flat % mm)
    }

    /// Quadrature weight (node cell area) of a node.
    pub fn weight(&self, flat: usize) -> f64 {
        let h = self.cover.cube(flat / (self.m * self.m)).side() / self.m as f64;
        h * h
    }

    /// `|f|` at a node.
    pub fn abs_at(&self, k: usize) -> f64 {
        match &self.im {
            None => self.re[k].abs(),
            Some(im) => self.re[k].hypot(im[k]),
        }
    }

    /// `|f(a) - f(b)|`.
    #[inline]
    pub fn diff_abs(&self, a: usize, b: usize) -> f64 {
        match &self.im {
            None => (self.re[a] - self.re[b]).abs(),
            Some(im) => (self.re[a] - self.re[b]).hypot(im[a] - im[b]),
        }
    }

    /// Node-value mean over cube `i` (real and imaginary parts). Computed
    /// as `v0 + mean(v - v0)`, so a constant cube gives its value exactly.
    pub fn cube_mean(&self, i: usize) -> (f64, f64) {
        let mm = self.m * self.m;
        let mean = |v: &[f64]| {
            let v0 = v[0];
            v0 + v.iter().map(|x| x - v0).sum::<f64>() / v.len() as f64
        };
        let r = mean(&self.re[i * mm..(i + 1) * mm]);
        let m = match &self.im {
            None => 0.0,
            Some(im) => mean(&im[i * mm..(i + 1) * mm]),
        };
        (r, m)
    }

    /// The node flat index at `p` when `p` is exactly a node.
    pub fn node_at(&self, p: Point) -> Result<usize, Error> {
        let cube = self.cover.cube_of_point(p).ok_or(Error::NotANode)?;
        let c = self.cover.cube(cube);
        let h = c.side() / self.m as f64;
        let r = c.rect();
        let a = ((p.x - r.x0) / h - 0.5).round();
        let b = ((p.y - r.y0) / h - 0.5).round();
        if a < 0.0 || b < 0.0 || a >= self.m as f64 || b >= self.m as f64 {
            return Err(Error::NotANode);
        }
        let k = self.flat(cube, a as usize + self.m * b as usize);
        if self.point(k) != p {
            return Err(Error::NotANode);
        }
        Ok(k)
    }

    /// Node nearest to `p` among the nodes of the cube containing `p`.
    pub fn nearest_node(&self, p: Point) -> Option<usize> {
        let cube = self.cover.cube_of_point(p)?;
        let mm = self.m * self.m;
        (0..mm).map(|k| self.flat(cube, k)).min_by(|&a, &b| self.point(a).dist(p).total_cmp(&self.point(b).dist(p)).then(a.cmp(&b)))
    }

    /// `alpha * self + beta * other` on the same cover.
    pub fn combine(&self, alpha: f64, other: &GridFunction<'c>, beta: f64) -> Result<GridFunction<'c>, Error> {
        if !core::ptr::eq(self.cover, other.cover) || self.m != other.m {
            return Err(Error::CoverMismatch);
        }
        let re = self.re.iter().zip(&other.re).map(|(a, b)| alpha * a + beta * b).collect();
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (a, b) => {
                let n = self.re.len();
                let zero = alloc::vec![0.0; n];
                let a = a.as_ref().unwrap_or(&zero);
                let b = b.as_ref().unwrap_or(&zero);
                Some(a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect())
            }
        };
        Ok(GridFunction { cover: self.cover, m: self.m, re, im })
    }

    pub fn scaled(&self, lambda: f64) -> GridFunction<'c> {
        GridFunction {
            cover: self.cover,
            m: self.m,
            re: self.re.iter().map(|v| lambda * v).collect(),
            im: self.im.as_ref().map(|im| im.iter().map(|v| lambda * v).collect()),
        }
    }

    /// Same samples, other cover with identical cube list and order.
    pub fn rebind<'d>(&self, cover: &'d WhitneyCover) -> Result<GridFunction<'d>, Error> {
        if cover.len() != self.cover.len() {
            return Err(Error::CoverMismatch);
        }
        Ok(GridFunction { cover, m: self.m, re: self.re.clone(), im: self.im.clone() })
    }

    /// Maximum of `|f|` over nodes.
    pub fn sup_norm(&self) -> f64 {
        (0..self.len()).map(|k| self.abs_at(k)).fold(0.0, f64::max)
    }

    pub fn describe(&self) -> String {
        alloc::format!("{} cubes x {} nodes{}", self.cover.len(), self.m * self.m, if self.is_complex() { ", complex" } else { "" })
    }
}

/// Midpoint-rule `(sum w |f|^p)^(1/p)` over the covered cubes.
pub fn lp_norm(f: &GridFunction<'_>, p: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..f.len() {
        acc += f.weight(k) * abs_pow(f.abs_at(k), p);
    }
    acc.powf(1.0 / p)
}
