use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::scalar::Real;

pub type EvalFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type GradFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
pub type HessFn<T> = Arc<dyn Fn(&[T]) -> SymMatrix<T> + Send + Sync>;

/// A map `R^d → R` with optional analytic derivatives. Used both for the
/// potential (nonnegative) and the reference density (strictly positive).
#[derive(Clone)]
pub struct ScalarField<T> {
    dim: usize,
    label: String,
    eval: EvalFn<T>,
    gradient: Option<GradFn<T>>,
    hessian: Option<HessFn<T>>,
}

impl<T> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl<T: Real> ScalarField<T> {
    pub fn new(dim: usize, label: impl Into<String>, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self {
            dim,
            label: label.into(),
            eval: Arc::new(f),
            gradient: None,
            hessian: None,
        }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        Self::new(dim, format!("constant({c})"), move |_| c)
            .with_gradient(move |x: &[T]| vec![T::zero(); x.len()])
            .with_hessian(move |x: &[T]| SymMatrix::zeros(x.len()))
    }

    pub fn with_gradient(mut self, g: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(mut self, h: impl Fn(&[T]) -> SymMatrix<T> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    /// Drops analytic derivatives so that finite differences are used.
    pub fn without_derivatives(mut self) -> Self {
        self.gradient = None;
        self.hessian = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn has_analytic_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    #[inline]
    pub fn value(&self, x: &[T]) -> T {
        (self.eval)(x)
    }

    pub fn try_value(&self, x: &[T]) -> Result<T> {
        let v = self.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteValue(format!(
                "{} at {:?}",
                self.label,
                x.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
            )))
        }
    }

    /// Analytic gradient when available, central differences otherwise.
    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        if let Some(g) = &self.gradient {
            return Ok(g(x));
        }
        fd_gradient(self, x)
    }

    /// Analytic Hessian when available, nested central differences otherwise.
    pub fn hessian(&self, x: &[T]) -> Result<SymMatrix<T>> {
        if let Some(h) = &self.hessian {
            let m = h(x);
            if !m.is_finite() {
                return Err(Error::NonFiniteValue(format!("{} Hessian", self.label)));
            }
            return Ok(m);
        }
        fd_hessian(self, x)
    }
}

/// Base finite-difference step: `1e-5` in double precision, scaled up for
/// lower precision types so round-off does not swamp the difference.
pub fn fd_base_step<T: Real>() -> T {
    if T::epsilon() < T::lit(1e-10) {
        T::lit(1e-5)
    } else {
        T::epsilon().cbrt()
    }
}

/// Step `max(h₀, h₀·|x_j|)`, adjusted so that `x_j ± h` is exactly
/// representable relative to `x_j`.
fn fd_step<T: Real>(xj: T) -> T {
    let base = fd_base_step::<T>();
    let h = base.max(base * xj.abs());
    (xj + h) - xj
}

pub fn fd_gradient<T: Real>(field: &ScalarField<T>, x: &[T]) -> Result<Vec<T>> {
    let mut p = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = fd_step(x[j]);
        p[j] = x[j] + h;
        let fp = field.try_value(&p)?;
        p[j] = x[j] - h;
        let fm = field.try_value(&p)?;
        p[j] = x[j];
        g.push((fp - fm) / (h + h));
    }
    Ok(g)
}

/// Central-difference Hessian, symmetrized as `(H + Hᵀ)/2`.
pub fn fd_hessian<T: Real>(field: &ScalarField<T>, x: &[T]) -> Result<SymMatrix<T>> {
    let d = x.len();
    let steps: Vec<T> = x.iter().map(|&v| fd_step(v)).collect();
    let f0 = field.try_value(x)?;
    let mut rows = vec![T::zero(); d * d];
    let mut p = x.to_vec();
    for j in 0..d {
        let hj = steps[j];
        p[j] = x[j] + hj;
        let fp = field.try_value(&p)?;
        p[j] = x[j] - hj;
        let fm = field.try_value(&p)?;
        p[j] = x[j];
        rows[j * d + j] = (fp - (f0 + f0) + fm) / (hj * hj);
        for k in 0..j {
            let hk = steps[k];
            let mut corner = |sj: T, sk: T| -> Result<T> {
                p[j] = x[j] + sj * hj;
                p[k] = x[k] + sk * hk;
                let v = field.try_value(&p);
                p[j] = x[j];
                p[k] = x[k];
                v
            };
            let one = T::one();
            let fpp = corner(one, one)?;
            let fpm = corner(one, -one)?;
            let fmp = corner(-one, one)?;
            let fmm = corner(-one, -one)?;
            let v = (fpp - fpm - fmp + fmm) / (T::lit(4.0) * hj * hk);
            rows[j * d + k] = v;
            rows[k * d + j] = v;
        }
    }
    Ok(SymMatrix::from_rows(d, &rows))
}

/// Multivariate monomial-sum polynomial `Σ c · Π x_j^{e_j}` with analytic
/// derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    pub dim: usize,
    pub terms: Vec<(T, Vec<u32>)>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(dim: usize, terms: Vec<(T, Vec<u32>)>) -> Result<Self> {
        for (_, powers) in &terms {
            if powers.len() != dim {
                return Err(Error::InvalidProblem(format!(
                    "polynomial term has {} exponents, expected {dim}",
                    powers.len()
                )));
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.terms
            .iter()
            .map(|(c, e)| *c * monomial(x, e))
            .sum()
    }

    fn derivative(&self, j: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[j] > 0)
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[j] -= 1;
                (*c * T::lit(e[j] as f64), e2)
            })
            .collect();
        Self { dim: self.dim, terms }
    }

    pub fn into_field(self, label: impl Into<String>) -> ScalarField<T> {
        let d = self.dim;
        let grads: Vec<Polynomial<T>> = (0..d).map(|j| self.derivative(j)).collect();
        let hess: Vec<Polynomial<T>> = (0..d)
            .flat_map(|j| {
                let g = grads[j].clone();
                (0..d).map(move |k| g.derivative(k))
            })
            .collect();
        let p = self.clone();
        ScalarField::new(d, label, move |x| p.eval(x))
            .with_gradient(move |x| grads.iter().map(|g| g.eval(x)).collect())
            .with_hessian(move |x| {
                let rows: Vec<T> = hess.iter().map(|h| h.eval(x)).collect();
                SymMatrix::from_rows(d, &rows)
            })
    }
}

fn monomial<T: Real>(x: &[T], e: &[u32]) -> T {
    x.iter()
        .zip(e)
        .fold(T::one(), |acc, (&v, &k)| acc * v.powi(k as i32))
}
