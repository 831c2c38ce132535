//! Closed-form scalar functions on the line.
//!
//! Test functions, the pieces of jump functions and the slot factors of
//! pseudo-exponential vectors are all built from [`Profile`] values, so that
//! one-sided limits at 0 and derivatives are evaluated exactly instead of
//! being read off a grid.

use crate::linalg::{c, C64};
use crate::quadrature;

/// Which side of the origin a one-sided limit is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `0⁺`
    Plus,
    /// `0⁻`
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Zero,
    Constant {
        value: C64,
    },
    /// `amplitude · exp(1 − 1/(1 − u²))` for `u = (x − center)/halfwidth`, `|u| < 1`.
    /// Peak value is `amplitude`, attained at `center`.
    Bump {
        center: f64,
        halfwidth: f64,
        amplitude: C64,
    },
    /// `offset + slope · x`
    Affine {
        offset: C64,
        slope: C64,
    },
    /// Smooth cutoff: 1 on `[lo, hi]`, 0 outside `[lo − ramp, hi + ramp]`.
    Plateau {
        lo: f64,
        hi: f64,
        ramp: f64,
    },
    /// `left` on `x < 0`, `right` on `x > 0`. The value at exactly 0 is the right one.
    Piecewise {
        left: Box<Profile>,
        right: Box<Profile>,
    },
    Product {
        a: Box<Profile>,
        b: Box<Profile>,
    },
    Sum {
        a: Box<Profile>,
        b: Box<Profile>,
    },
    /// `x ↦ inner(x − by)`
    Shifted {
        inner: Box<Profile>,
        by: f64,
    },
}

fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

fn dpsi(x: f64) -> f64 {
    if x > 0.0 {
        psi(x) / (x * x)
    } else {
        0.0
    }
}

/// C∞ step rising from 0 at `x ≤ 0` to 1 at `x ≥ 1`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = psi(x);
        a / (a + psi(1.0 - x))
    }
}

fn smooth_step_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        let a = psi(x);
        let b = psi(1.0 - x);
        (dpsi(x) * b + a * dpsi(1.0 - x)) / ((a + b) * (a + b))
    }
}

impl Profile {
    pub fn bump(center: f64, halfwidth: f64, amplitude: C64) -> Self {
        Profile::Bump {
            center,
            halfwidth,
            amplitude,
        }
    }

    pub fn constant(value: C64) -> Self {
        Profile::Constant { value }
    }

    pub fn affine(offset: C64, slope: C64) -> Self {
        Profile::Affine { offset, slope }
    }

    pub fn plateau(lo: f64, hi: f64, ramp: f64) -> Self {
        Profile::Plateau { lo, hi, ramp }
    }

    pub fn piecewise(left: Profile, right: Profile) -> Self {
        Profile::Piecewise {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn times(self, other: Profile) -> Self {
        Profile::Product {
            a: Box::new(self),
            b: Box::new(other),
        }
    }

    pub fn plus(self, other: Profile) -> Self {
        Profile::Sum {
            a: Box::new(self),
            b: Box::new(other),
        }
    }

    pub fn scaled(self, factor: C64) -> Self {
        self.times(Profile::constant(factor))
    }

    pub fn shifted(self, by: f64) -> Self {
        if by == 0.0 {
            return self;
        }
        Profile::Shifted {
            inner: Box::new(self),
            by,
        }
    }

    /// Restriction to the half-line on `side` (zero on the other side).
    pub fn on_side(self, side: Side) -> Self {
        match side {
            Side::Plus => Profile::piecewise(Profile::Zero, self),
            Side::Minus => Profile::piecewise(self, Profile::Zero),
        }
    }

    pub fn value(&self, x: f64) -> C64 {
        match self {
            Profile::Zero => c(0.0, 0.0),
            Profile::Constant { value } => *value,
            Profile::Bump {
                center,
                halfwidth,
                amplitude,
            } => {
                let u = (x - center) / halfwidth;
                if u.abs() < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - u * u)).exp()
                } else {
                    c(0.0, 0.0)
                }
            }
            Profile::Affine { offset, slope } => offset + slope * x,
            Profile::Plateau { lo, hi, ramp } => {
                let rise = smooth_step((x - (lo - ramp)) / ramp);
                let fall = smooth_step(((hi + ramp) - x) / ramp);
                c(rise * fall, 0.0)
            }
            Profile::Piecewise { left, right } => {
                if x < 0.0 {
                    left.value(x)
                } else {
                    right.value(x)
                }
            }
            Profile::Product { a, b } => a.value(x) * b.value(x),
            Profile::Sum { a, b } => a.value(x) + b.value(x),
            Profile::Shifted { inner, by } => inner.value(x - by),
        }
    }

    pub fn derivative(&self, x: f64) -> C64 {
        match self {
            Profile::Zero | Profile::Constant { .. } => c(0.0, 0.0),
            Profile::Bump {
                center,
                halfwidth,
                amplitude,
            } => {
                let u = (x - center) / halfwidth;
                if u.abs() < 1.0 {
                    let q = 1.0 - u * u;
                    amplitude * (1.0 - 1.0 / q).exp() * (-2.0 * u / (q * q)) / *halfwidth
                } else {
                    c(0.0, 0.0)
                }
            }
            Profile::Affine { slope, .. } => *slope,
            Profile::Plateau { lo, hi, ramp } => {
                let a = (x - (lo - ramp)) / ramp;
                let b = ((hi + ramp) - x) / ramp;
                let d = smooth_step_deriv(a) * smooth_step(b) - smooth_step(a) * smooth_step_deriv(b);
                c(d / ramp, 0.0)
            }
            Profile::Piecewise { left, right } => {
                if x < 0.0 {
                    left.derivative(x)
                } else {
                    right.derivative(x)
                }
            }
            Profile::Product { a, b } => a.derivative(x) * b.value(x) + a.value(x) * b.derivative(x),
            Profile::Sum { a, b } => a.derivative(x) + b.derivative(x),
            Profile::Shifted { inner, by } => inner.derivative(x - by),
        }
    }

    /// One-sided limit of the value at `x`.
    pub fn limit_at(&self, x: f64, side: Side) -> C64 {
        match self {
            Profile::Piecewise { left, right } if x == 0.0 => match side {
                Side::Plus => right.limit_at(0.0, side),
                Side::Minus => left.limit_at(0.0, side),
            },
            Profile::Piecewise { left, right } => {
                if x < 0.0 {
                    left.limit_at(x, side)
                } else {
                    right.limit_at(x, side)
                }
            }
            Profile::Product { a, b } => a.limit_at(x, side) * b.limit_at(x, side),
            Profile::Sum { a, b } => a.limit_at(x, side) + b.limit_at(x, side),
            Profile::Shifted { inner, by } => inner.limit_at(x - by, side),
            other => other.value(x),
        }
    }

    /// One-sided limit of the value at 0.
    pub fn limit(&self, side: Side) -> C64 {
        self.limit_at(0.0, side)
    }

    /// One-sided limit of the derivative at `x`.
    pub fn derivative_limit_at(&self, x: f64, side: Side) -> C64 {
        match self {
            Profile::Piecewise { left, right } if x == 0.0 => match side {
                Side::Plus => right.derivative_limit_at(0.0, side),
                Side::Minus => left.derivative_limit_at(0.0, side),
            },
            Profile::Piecewise { left, right } => {
                if x < 0.0 {
                    left.derivative_limit_at(x, side)
                } else {
                    right.derivative_limit_at(x, side)
                }
            }
            Profile::Product { a, b } => {
                a.derivative_limit_at(x, side) * b.limit_at(x, side)
                    + a.limit_at(x, side) * b.derivative_limit_at(x, side)
            }
            Profile::Sum { a, b } => a.derivative_limit_at(x, side) + b.derivative_limit_at(x, side),
            Profile::Shifted { inner, by } => inner.derivative_limit_at(x - by, side),
            other => other.derivative(x),
        }
    }

    /// Closed hull of the support, with infinities for unbounded profiles.
    /// An empty support is reported as `lo > hi`.
    pub fn support(&self) -> (f64, f64) {
        const EMPTY: (f64, f64) = (f64::INFINITY, f64::NEG_INFINITY);
        match self {
            Profile::Zero => EMPTY,
            Profile::Constant { value } => {
                if *value == c(0.0, 0.0) {
                    EMPTY
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            Profile::Bump {
                center, halfwidth, ..
            } => (center - halfwidth, center + halfwidth),
            Profile::Affine { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Profile::Plateau { lo, hi, ramp } => (lo - ramp, hi + ramp),
            Profile::Piecewise { left, right } => {
                let (ll, lh) = left.support();
                let (rl, rh) = right.support();
                let l = (ll, lh.min(0.0));
                let r = (rl.max(0.0), rh);
                hull(l, r)
            }
            Profile::Product { a, b } => {
                let (al, ah) = a.support();
                let (bl, bh) = b.support();
                (al.max(bl), ah.min(bh))
            }
            Profile::Sum { a, b } => hull(a.support(), b.support()),
            Profile::Shifted { inner, by } => {
                let (l, h) = inner.support();
                (l + by, h + by)
            }
        }
    }

    /// Points where the profile may fail to be smooth (jumps, support edges).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match self {
            Profile::Zero | Profile::Constant { .. } | Profile::Affine { .. } => vec![],
            Profile::Bump {
                center, halfwidth, ..
            } => vec![center - halfwidth, *center, center + halfwidth],
            Profile::Plateau { lo, hi, ramp } => vec![lo - ramp, *lo, *hi, hi + ramp],
            Profile::Piecewise { left, right } => {
                let mut v = vec![0.0];
                v.extend(left.breakpoints().into_iter().filter(|&p| p < 0.0));
                v.extend(right.breakpoints().into_iter().filter(|&p| p > 0.0));
                v
            }
            Profile::Product { a, b } | Profile::Sum { a, b } => {
                let mut v = a.breakpoints();
                v.extend(b.breakpoints());
                v
            }
            Profile::Shifted { inner, by } => inner.breakpoints().into_iter().map(|p| p + by).collect(),
        };
        out.retain(|p| p.is_finite());
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// Largest |value| seen on a fine sampling of `[lo, hi]`.
    pub fn sup_norm_estimate(&self, lo: f64, hi: f64) -> f64 {
        let n = 4096;
        (0..=n)
            .map(|j| self.value(lo + (hi - lo) * j as f64 / n as f64).norm())
            .fold(0.0, f64::max)
    }
}

fn hull(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let a_empty = a.0 > a.1;
    let b_empty = b.0 > b.1;
    match (a_empty, b_empty) {
        (true, true) => a,
        (true, false) => b,
        (false, true) => a,
        (false, false) => (a.0.min(b.0), a.1.max(b.1)),
    }
}

/// Continuum inner product `∫ conj(f) g` over `[lo, hi]` by adaptive quadrature.
pub fn inner_product(f: &Profile, g: &Profile, lo: f64, hi: f64, tol: f64) -> C64 {
    let (fl, fh) = f.support();
    let (gl, gh) = g.support();
    let a = lo.max(fl).max(gl);
    let b = hi.min(fh).min(gh);
    if a >= b {
        return c(0.0, 0.0);
    }
    let mut breaks = f.breakpoints();
    breaks.extend(g.breakpoints());
    quadrature::integrate_with_breaks(|x| f.value(x).conj() * g.value(x), a, b, &breaks, tol)
}

/// Continuum squared L² norm over `[lo, hi]`.
pub fn norm_sqr(f: &Profile, lo: f64, hi: f64, tol: f64) -> f64 {
    inner_product(f, f, lo, hi, tol).re
}

/// A `ℂ^d`-valued closed-form function, one scalar profile per component.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorProfile {
    pub components: Vec<Profile>,
}

impl VectorProfile {
    pub fn new(components: Vec<Profile>) -> Self {
        VectorProfile { components }
    }

    /// `profile(x) · v`
    pub fn along(profile: &Profile, v: &[C64]) -> Self {
        VectorProfile {
            components: v.iter().map(|&z| profile.clone().scaled(z)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `x ↦ M · self(x)`
    pub fn mapped(&self, m: &crate::linalg::CMatrix) -> Self {
        let d = self.dim();
        let components = (0..m.nrows())
            .map(|a| {
                let mut acc = Profile::Zero;
                for b in 0..d {
                    let z = m[(a, b)];
                    if z != c(0.0, 0.0) {
                        acc = match acc {
                            Profile::Zero => self.components[b].clone().scaled(z),
                            other => other.plus(self.components[b].clone().scaled(z)),
                        };
                    }
                }
                acc
            })
            .collect();
        VectorProfile { components }
    }

    pub fn value(&self, x: f64) -> Vec<C64> {
        self.components.iter().map(|p| p.value(x)).collect()
    }

    pub fn derivative(&self, x: f64) -> Vec<C64> {
        self.components.iter().map(|p| p.derivative(x)).collect()
    }

    pub fn limit(&self, side: Side) -> Vec<C64> {
        self.components.iter().map(|p| p.limit(side)).collect()
    }

    pub fn support(&self) -> (f64, f64) {
        self.components
            .iter()
            .map(|p| p.support())
            .fold((f64::INFINITY, f64::NEG_INFINITY), hull)
    }
}
