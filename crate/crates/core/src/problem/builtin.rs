//! Ready-made Gibbs families.

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::scalar::{norm, Real};

use super::{Component, Domain, GibbsFamily, MinimalSetSpec, ScalarField};

pub const BUILTIN_NAMES: [&str; 4] = ["normal1d", "double_well_sym", "double_well_asym", "volcano"];

/// Looks up a builtin family. `dim` only matters for `volcano` (default 2).
pub fn by_name<T: Real>(name: &str, dim: Option<usize>) -> Result<GibbsFamily<T>> {
    match name {
        "normal1d" => Ok(normal1d()),
        "double_well_sym" => Ok(double_well_sym()),
        "double_well_asym" => Ok(double_well_asym()),
        "volcano" => volcano(dim.unwrap_or(2)),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

fn lebesgue<T: Real>(d: usize) -> ScalarField<T> {
    ScalarField::constant(d, T::one())
}

/// `ℓ(x) = x²/2` with its single minimum at 0.
pub fn normal1d<T: Real>() -> GibbsFamily<T> {
    let ell = ScalarField::new(1, "x^2/2", |x: &[T]| T::lit(0.5) * x[0] * x[0])
        .with_gradient(|x: &[T]| vec![x[0]])
        .with_hessian(|_: &[T]| SymMatrix::identity(1));
    GibbsFamily::new(
        "normal1d",
        ell,
        lebesgue(1),
        MinimalSetSpec::new(vec![Component::point(vec![T::zero()])]),
        T::one(),
        Domain::cube(1, T::lit(8.0)),
    )
    .expect("normal1d is well formed")
}

/// `ℓ(x) = (x² − 1)²/2`, minima at ±1 with `ℓ'' = 4`.
pub fn double_well_sym<T: Real>() -> GibbsFamily<T> {
    let half = T::lit(0.5);
    let ell = ScalarField::new(1, "(x^2-1)^2/2", move |x: &[T]| {
        let q = x[0] * x[0] - T::one();
        half * q * q
    })
    .with_gradient(|x: &[T]| vec![T::lit(2.0) * x[0] * (x[0] * x[0] - T::one())])
    .with_hessian(|x: &[T]| SymMatrix::from_rows(1, &[T::lit(6.0) * x[0] * x[0] - T::lit(2.0)]));
    GibbsFamily::new(
        "double_well_sym",
        ell,
        lebesgue(1),
        MinimalSetSpec::new(vec![
            Component::point(vec![-T::one()]),
            Component::point(vec![T::one()]),
        ]),
        T::lit(0.5),
        Domain::cube(1, T::lit(3.0)),
    )
    .expect("double_well_sym is well formed")
}

/// Left well `x²` up to 1/2, right well `4(x − 1)²` from 3/4, joined by the
/// quintic matching value, slope and curvature at both ends.
#[derive(Clone, Copy, Debug)]
struct AsymmetricWell<T> {
    a: T,
    b: T,
    coeffs: [T; 6],
}

impl<T: Real> AsymmetricWell<T> {
    fn new() -> Self {
        let a = T::lit(0.5);
        let b = T::lit(0.75);
        let len = b - a;
        let left = |x: T| (x * x, T::lit(2.0) * x, T::lit(2.0));
        let right = |x: T| {
            let y = x - T::one();
            (T::lit(4.0) * y * y, T::lit(8.0) * y, T::lit(8.0))
        };
        let (f0, d0, s0) = left(a);
        let (f1, d1, s1) = right(b);
        let basis: [[f64; 6]; 6] = [
            [1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
            [0.0, 1.0, 0.0, -6.0, 8.0, -3.0],
            [0.0, 0.0, 0.5, -1.5, 1.5, -0.5],
            [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
            [0.0, 0.0, 0.0, -4.0, 7.0, -3.0],
            [0.0, 0.0, 0.0, 0.5, -1.0, 0.5],
        ];
        let data = [f0, len * d0, len * len * s0, f1, len * d1, len * len * s1];
        let mut coeffs = [T::zero(); 6];
        for (row, &w) in basis.iter().zip(&data) {
            for k in 0..6 {
                coeffs[k] += w * T::lit(row[k]);
            }
        }
        Self { a, b, coeffs }
    }

    /// Value, first and second derivative.
    fn eval(&self, x: T) -> (T, T, T) {
        if x <= self.a {
            (x * x, T::lit(2.0) * x, T::lit(2.0))
        } else if x >= self.b {
            let y = x - T::one();
            (T::lit(4.0) * y * y, T::lit(8.0) * y, T::lit(8.0))
        } else {
            let len = self.b - self.a;
            let s = (x - self.a) / len;
            let c = &self.coeffs;
            let mut f = T::zero();
            let mut g = T::zero();
            let mut h = T::zero();
            for k in (0..6).rev() {
                f = f * s + c[k];
                if k >= 1 {
                    g = g * s + c[k] * T::of_usize(k);
                }
                if k >= 2 {
                    h = h * s + c[k] * T::of_usize(k * (k - 1));
                }
            }
            (f, g / len, h / (len * len))
        }
    }
}

/// Two quadratic wells at 0 and 1 with Hessians 2 and 8 and a smooth bridge
/// on which `ℓ ≥ 1/4`.
pub fn double_well_asym<T: Real>() -> GibbsFamily<T> {
    let w = AsymmetricWell::<T>::new();
    let ell = ScalarField::new(1, "asymmetric double well", move |x: &[T]| w.eval(x[0]).0)
        .with_gradient(move |x: &[T]| vec![w.eval(x[0]).1])
        .with_hessian(move |x: &[T]| SymMatrix::from_rows(1, &[w.eval(x[0]).2]));
    GibbsFamily::new(
        "double_well_asym",
        ell,
        lebesgue(1),
        MinimalSetSpec::new(vec![
            Component::point(vec![T::zero()]),
            Component::point(vec![T::one()]),
        ]),
        T::lit(0.2),
        Domain::new(vec![T::lit(-3.0)], vec![T::lit(4.0)]),
    )
    .expect("double_well_asym is well formed")
}

/// `ℓ(x) = ½‖x‖² − ‖x‖ + ½`, evaluated as `½(‖x‖ − 1)²` (same function, no
/// cancellation near the unit sphere). Minimal set: the unit sphere.
pub fn volcano<T: Real>(d: usize) -> Result<GibbsFamily<T>> {
    if !(2..=3).contains(&d) {
        return Err(Error::Unsupported(format!("volcano in dimension {d}")));
    }
    let half = T::lit(0.5);
    let ell = ScalarField::new(d, "volcano", move |x: &[T]| {
        let r = norm(x) - T::one();
        half * r * r
    })
    .with_gradient(|x: &[T]| {
        let r = norm(x);
        if r == T::zero() {
            return vec![T::zero(); x.len()];
        }
        let s = (r - T::one()) / r;
        x.iter().map(|&v| s * v).collect()
    })
    .with_hessian(|x: &[T]| {
        // x̂x̂ᵀ + (1 − 1/r)(I − x̂x̂ᵀ)
        let d = x.len();
        let r = norm(x).max(T::min_positive_value());
        let tangential = T::one() - T::one() / r;
        let mut rows = vec![T::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                let radial = x[i] * x[j] / (r * r);
                let id = if i == j { T::one() } else { T::zero() };
                rows[i * d + j] = radial + tangential * (id - radial);
            }
        }
        SymMatrix::from_rows(d, &rows)
    });
    GibbsFamily::new(
        "volcano",
        ell,
        lebesgue(d),
        MinimalSetSpec::new(vec![Component::sphere(vec![T::zero(); d], T::one())]),
        T::lit(0.5),
        Domain::cube(d, T::lit(3.0)),
    )
}
