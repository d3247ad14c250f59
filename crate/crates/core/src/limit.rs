//! The limit measure `μ = φ·M` of the Gibbs family, Gaussian-type proxies
//! for `μₙ`, and the from-below check `φ ≥ ζ⁽ⁿ⁾/Zₙ`.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::laplace::{off_tube_log_mass, tube_masses, zeta_n, TubularFrame};
use crate::linalg::{check_positive_definite, SymMatrix};
use crate::problem::{Domain, EmbeddedSphere, GibbsFamily};
use crate::quadrature::{QuadOptions, Region, Shell, SphereRule};
use crate::scalar::Real;

/// Values below this are reported as zero with an underflow flag.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;
/// Agreement required between the base and refined sphere rules.
pub const SPHERE_NORMALIZER_TOL: f64 = 1e-8;
/// Angular nodes of the tabulated inverse CDF for circles.
pub const CDF_TABLE_NODES: usize = 4096;

fn positive_definite_det<T: Real>(h: &SymMatrix<T>, what: impl FnOnce() -> String) -> Result<T> {
    if !check_positive_definite(h) {
        return Err(Error::NotPositiveDefinite(what()));
    }
    Ok(h.cholesky().expect("positive definite").det())
}

/// Weights `w_x ∝ det(H_ℓ(x))^{−1/2}·π₀(x)` of a family whose minimal set
/// consists of points only.
pub fn compute_point_weights<T: Real>(family: &GibbsFamily<T>) -> Result<Vec<(Vec<T>, T)>> {
    if !family.minimal_set().all_points() {
        return Err(Error::MixedDimensions);
    }
    let mut logs = Vec::with_capacity(family.components().len());
    for (i, c) in family.components().iter().enumerate() {
        let x = c.project(&[]);
        let h = family.normal_hessian(i, &x)?;
        let det = positive_definite_det(&h, || format!("Hessian at {}", c.describe()))?;
        let pi = family.pi0().value(&x);
        logs.push((x, pi.ln() - T::lit(0.5) * det.ln()));
    }
    let top = logs.iter().map(|(_, l)| *l).fold(T::neg_infinity(), T::max);
    let raw: Vec<T> = logs.iter().map(|(_, l)| (*l - top).exp()).collect();
    let total: T = raw.iter().copied().sum();
    Ok(logs
        .into_iter()
        .zip(raw)
        .map(|((x, _), w)| (x, w / total))
        .collect())
}

/// One sphere of the limit support with its quadrature rule and the
/// unnormalized density `π₀·det(normal Hessian)^{−1/2}` at the rule nodes.
#[derive(Clone, Debug)]
pub struct SpherePart<T> {
    pub component: usize,
    pub sphere: EmbeddedSphere<T>,
    pub rule: SphereRule<T>,
    pub raw_density: Vec<T>,
    pub mass: T,
}

/// Limit density on one or more spheres of equal dimension.
#[derive(Clone, Debug)]
pub struct SphereLimit<T> {
    family: GibbsFamily<T>,
    pub parts: Vec<SpherePart<T>>,
    pub normalizer: T,
    pub constant: bool,
}

impl<T: Real> SphereLimit<T> {
    fn raw_at(&self, index: usize, u: &[T]) -> Result<T> {
        raw_sphere_density(&self.family, index, u)
    }

    /// `φ(u)` at a point of one of the spheres.
    pub fn density(&self, u: &[T]) -> Result<T> {
        let (index, _) = self.family.minimal_set().nearest(u);
        Ok(self.raw_at(index, u)? / self.normalizer)
    }

    /// Probability carried by each sphere.
    pub fn part_weights(&self) -> Vec<T> {
        self.parts.iter().map(|p| p.mass / self.normalizer).collect()
    }

    /// Unnormalized density of part `k` on `count` equally spaced angles of
    /// a circle; used for inverse-CDF sampling.
    pub fn circle_table(&self, k: usize, count: usize) -> Result<Vec<T>> {
        let part = &self.parts[k];
        let rule = SphereRule::circle(&part.sphere.center, part.sphere.radius, count);
        rule.nodes
            .iter()
            .map(|x| self.raw_at(part.component, &part.sphere.project(x)))
            .collect()
    }

    pub fn family(&self) -> &GibbsFamily<T> {
        &self.family
    }
}

fn raw_sphere_density<T: Real>(family: &GibbsFamily<T>, index: usize, u: &[T]) -> Result<T> {
    let h = family.normal_hessian(index, u)?;
    let det = positive_definite_det(&h, || {
        format!("normal Hessian on {}", family.components()[index].describe())
    })?;
    Ok(family.pi0().value(u) / det.sqrt())
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum LimitKind<T> {
    Discrete { atoms: Vec<Vec<T>>, weights: Vec<T> },
    SphereUniformLike(SphereLimit<T>),
}

/// The limit `μ` together with the components left out because they are
/// not of maximal dimension.
#[derive(Clone, Debug)]
pub struct LimitMeasure<T> {
    pub kind: LimitKind<T>,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

impl<T: Real> LimitMeasure<T> {
    pub fn dirac(atom: Vec<T>) -> Self {
        Self {
            kind: LimitKind::Discrete {
                atoms: vec![atom],
                weights: vec![T::one()],
            },
            kept: vec![0],
            dropped: Vec::new(),
        }
    }

    pub fn discrete(atoms: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::LengthMismatch {
                left: atoms.len(),
                right: weights.len(),
            });
        }
        let total: T = weights.iter().copied().sum();
        if weights.iter().any(|&w| w < T::zero()) || (total - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) {
            return Err(Error::InvalidConfig("limit weights must be nonnegative and sum to 1".into()));
        }
        let kept = (0..atoms.len()).collect();
        Ok(Self {
            kind: LimitKind::Discrete { atoms, weights },
            kept,
            dropped: Vec::new(),
        })
    }

    pub fn as_discrete(&self) -> Option<(&[Vec<T>], &[T])> {
        match &self.kind {
            LimitKind::Discrete { atoms, weights } => Some((atoms, weights)),
            LimitKind::SphereUniformLike(_) => None,
        }
    }

    pub fn as_sphere(&self) -> Option<&SphereLimit<T>> {
        match &self.kind {
            LimitKind::SphereUniformLike(s) => Some(s),
            LimitKind::Discrete { .. } => None,
        }
    }

    /// `φ(u)` for a point of the support: the atom weight for discrete
    /// limits, the density w.r.t. the intrinsic measure on spheres.
    pub fn density_at(&self, u: &[T]) -> Result<T> {
        match &self.kind {
            LimitKind::Discrete { atoms, weights } => {
                let (k, d) = atoms
                    .iter()
                    .enumerate()
                    .map(|(k, a)| (k, crate::scalar::dist(a, u)))
                    .fold((0, T::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best });
                if d > T::lit(crate::problem::ON_MANIFOLD_TOL) {
                    return Err(Error::NotOnManifold { distance: d.as_f64() });
                }
                Ok(weights[k])
            }
            LimitKind::SphereUniformLike(s) => s.density(u),
        }
    }

    pub fn to_json(&self) -> Value {
        let vec = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<_>>();
        match &self.kind {
            LimitKind::Discrete { atoms, weights } => json!({
                "kind": "discrete",
                "atoms": atoms.iter().map(|a| vec(a)).collect::<Vec<_>>(),
                "weights": vec(weights),
                "kept_components": self.kept,
                "dropped_components": self.dropped,
            }),
            LimitKind::SphereUniformLike(s) => json!({
                "kind": "sphere_uniform_like",
                "normalizer": s.normalizer.as_f64(),
                "constant_density": s.constant,
                "parts": s.parts.iter().map(|p| json!({
                    "component": p.component,
                    "center": vec(&p.sphere.center),
                    "radius": p.sphere.radius.as_f64(),
                    "nodes": p.rule.nodes.iter().map(|x| vec(x)).collect::<Vec<_>>(),
                    "quadrature_weights": vec(&p.rule.weights),
                    "density": p.raw_density.iter().map(|&v| (v / s.normalizer).as_f64()).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "kept_components": self.kept,
                "dropped_components": self.dropped,
            }),
        }
    }
}

fn refined_rule<T: Real>(s: &EmbeddedSphere<T>) -> SphereRule<T> {
    if s.ambient_dim() == 2 {
        SphereRule::circle(&s.center, s.radius, 2 * crate::quadrature::CIRCLE_NODES)
    } else {
        SphereRule::sphere(
            &s.center,
            s.radius,
            crate::quadrature::SPHERE_POLAR + 10,
            crate::quadrature::SPHERE_AZIMUTHAL + 20,
        )
    }
}

/// Builds `μ` on the components of maximal dimension. Lower-dimensional
/// components are dropped with a warning.
pub fn build_limit_measure<T: Real>(family: &GibbsFamily<T>) -> Result<LimitMeasure<T>> {
    let k = family.minimal_set().max_intrinsic_dim();
    let (kept, dropped): (Vec<usize>, Vec<usize>) =
        (0..family.components().len()).partition(|&i| family.components()[i].intrinsic_dim() == k);
    if !dropped.is_empty() {
        let names: Vec<String> = dropped.iter().map(|&i| family.components()[i].describe()).collect();
        log::warn!(
            "limit of {} is supported on dimension-{k} components only; dropping {}",
            family.name(),
            names.join(", ")
        );
    }
    if k == 0 {
        let weights = compute_point_weights(family)?;
        let (atoms, weights) = weights.into_iter().unzip();
        return Ok(LimitMeasure {
            kind: LimitKind::Discrete { atoms, weights },
            kept,
            dropped,
        });
    }
    let mut parts = Vec::new();
    for &i in &kept {
        let s = family.components()[i]
            .as_sphere()
            .expect("positive-dimensional components are spheres")
            .clone();
        let rule = SphereRule::new(&s.center, s.radius)?;
        let raw: Vec<T> = rule
            .nodes
            .iter()
            .map(|x| raw_sphere_density(family, i, &s.project(x)))
            .collect::<Result<_>>()?;
        let mass: T = raw.iter().zip(&rule.weights).map(|(&v, &w)| v * w).sum();
        let fine = refined_rule(&s);
        let mut fine_mass = T::zero();
        for (x, &w) in fine.nodes.iter().zip(&fine.weights) {
            fine_mass += w * raw_sphere_density(family, i, &s.project(x))?;
        }
        if !(((mass - fine_mass) / mass).abs() <= T::lit(SPHERE_NORMALIZER_TOL)) {
            return Err(Error::QuadratureFailure(format!(
                "sphere normalizer unresolved on {}: {} vs {}",
                family.components()[i].describe(),
                mass.as_f64(),
                fine_mass.as_f64()
            )));
        }
        parts.push(SpherePart {
            component: i,
            sphere: s,
            rule,
            raw_density: raw,
            mass,
        });
    }
    let normalizer = parts.iter().map(|p| p.mass).sum();
    let (lo, hi) = parts
        .iter()
        .flat_map(|p| p.raw_density.iter().copied())
        .fold((T::infinity(), T::zero()), |(a, b), v| (a.min(v), b.max(v)));
    let constant = hi <= lo * (T::one() + T::lit(1e-8));
    Ok(LimitMeasure {
        kind: LimitKind::SphereUniformLike(SphereLimit {
            family: family.clone(),
            parts,
            normalizer,
            constant,
        }),
        kept,
        dropped,
    })
}

/// One Gaussian of a proxy: weight, mean and precision matrix.
#[derive(Clone, Debug, Serialize)]
pub struct GaussianComponent<T> {
    pub weight: T,
    pub mean: Vec<T>,
    pub precision: SymMatrix<T>,
}

impl<T: Real> GaussianComponent<T> {
    pub fn covariance(&self) -> SymMatrix<T> {
        self.precision
            .cholesky()
            .expect("proxy precisions are positive definite")
            .inverse()
    }

    /// Normal density with this mean and precision.
    pub fn density(&self, x: &[T]) -> T {
        let chol = self.precision.cholesky().expect("positive definite");
        let y: Vec<T> = x.iter().zip(&self.mean).map(|(&a, &b)| a - b).collect();
        let q = self.precision.quad_form(&y);
        let d = x.len() as i32;
        (T::lit(-0.5) * q).exp() * chol.det().sqrt() / T::TAU().powf(T::lit(d as f64 / 2.0))
    }
}

/// Gaussian-type approximations of `μₙ` around point minima.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianProxy<T> {
    /// `N(x*, (nH)^{−1})`.
    Single { mean: Vec<T>, precision: SymMatrix<T> },
    /// `Σ w_z N(z, (nH_z)^{−1})`.
    Mixture { components: Vec<GaussianComponent<T>> },
    /// Density `∝ exp(−nα(x))`, `α(x) = ½ min_z (x−z)ᵀH_z(x−z)`; the
    /// precisions here are `H_z`, without the factor `n`.
    MaxOfGaussians { components: Vec<GaussianComponent<T>> },
}

impl<T: Real> GaussianProxy<T> {
    /// Components as stored, with a single Gaussian given weight 1.
    pub fn components(&self) -> Vec<GaussianComponent<T>> {
        match self {
            GaussianProxy::Single { mean, precision } => vec![GaussianComponent {
                weight: T::one(),
                mean: mean.clone(),
                precision: precision.clone(),
            }],
            GaussianProxy::Mixture { components } | GaussianProxy::MaxOfGaussians { components } => {
                components.clone()
            }
        }
    }

    /// Density of a single or mixture proxy.
    pub fn mixture_density(&self, x: &[T]) -> Result<T> {
        match self {
            GaussianProxy::MaxOfGaussians { .. } => Err(Error::Unsupported(
                "max-of-Gaussians needs an explicit normalizer".into(),
            )),
            _ => Ok(self.components().iter().map(|c| c.weight * c.density(x)).sum()),
        }
    }
}

/// Location, normal Hessian and weight of each point component.
type PointHessian<T> = (Vec<T>, SymMatrix<T>, T);

fn point_hessians<T: Real>(family: &GibbsFamily<T>) -> Result<Vec<PointHessian<T>>> {
    let weights = compute_point_weights(family)?;
    weights
        .into_iter()
        .enumerate()
        .map(|(i, (x, w))| {
            let h = family.normal_hessian(i, &x)?;
            Ok((x, h, w))
        })
        .collect()
}

/// `Σ w_z N(z, n⁻¹H_ℓ(z)⁻¹)`, collapsing to a single Gaussian for one minimum.
pub fn gaussian_mixture_proxy<T: Real>(family: &GibbsFamily<T>, n: u64) -> Result<GaussianProxy<T>> {
    let nt = T::lit(n as f64);
    let mut comps: Vec<GaussianComponent<T>> = point_hessians(family)?
        .into_iter()
        .map(|(mean, h, weight)| GaussianComponent {
            weight,
            mean,
            precision: h.scaled(nt),
        })
        .collect();
    if comps.len() == 1 {
        let c = comps.pop().expect("one component");
        return Ok(GaussianProxy::Single {
            mean: c.mean,
            precision: c.precision,
        });
    }
    Ok(GaussianProxy::Mixture { components: comps })
}

pub fn max_of_gaussians_proxy<T: Real>(family: &GibbsFamily<T>) -> Result<GaussianProxy<T>> {
    let components = point_hessians(family)?
        .into_iter()
        .map(|(mean, precision, weight)| GaussianComponent {
            weight,
            mean,
            precision,
        })
        .collect();
    Ok(GaussianProxy::MaxOfGaussians { components })
}

/// `α(x) = ½ min_z (x − z)ᵀH_z(x − z)` over the components of a proxy.
pub fn alpha<T: Real>(components: &[GaussianComponent<T>], x: &[T]) -> T {
    components
        .iter()
        .map(|c| {
            let y: Vec<T> = x.iter().zip(&c.mean).map(|(&a, &b)| a - b).collect();
            T::lit(0.5) * c.precision.quad_form(&y)
        })
        .fold(T::infinity(), T::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityValue<T> {
    pub value: T,
    pub underflow: bool,
}

/// `exp(−nα(x))`, flushed to zero with a flag below `1e−300`.
pub fn max_of_gaussians_density<T: Real>(proxy: &GaussianProxy<T>, n: u64, x: &[T]) -> Result<DensityValue<T>> {
    let GaussianProxy::MaxOfGaussians { components } = proxy else {
        return Err(Error::Unsupported("not a max-of-Gaussians proxy".into()));
    };
    let log_v = -T::lit(n as f64) * alpha(components, x);
    if log_v.as_f64() < UNDERFLOW_FLOOR.ln() {
        return Ok(DensityValue {
            value: T::zero(),
            underflow: true,
        });
    }
    Ok(DensityValue {
        value: log_v.exp(),
        underflow: false,
    })
}

/// `Ẑₙ = ∫ exp(−nα)` over a box, by iterated quadrature (`d ≤ 3`).
pub fn max_of_gaussians_normalizer<T: Real>(proxy: &GaussianProxy<T>, n: u64, domain: &Domain<T>) -> Result<T> {
    let GaussianProxy::MaxOfGaussians { components } = proxy else {
        return Err(Error::Unsupported("not a max-of-Gaussians proxy".into()));
    };
    let nt = T::lit(n as f64);
    let hints = components.iter().map(|c| Shell::ball(c.mean.clone(), T::zero())).collect();
    let width = T::lit(6.0) / nt.sqrt();
    let region = Region::boxed(domain.lo.clone(), domain.hi.clone()).with_hints(hints, Some(width));
    let mut opts = QuadOptions::<T>::with_tol(0.0, 1e-11);
    opts.abs_tol = T::min_positive_value() / T::epsilon();
    opts.max_panels = 20_000;
    Ok(region.integrate(|x| (-nt * alpha(components, x)).exp(), opts)?.value)
}

/// Outcome of the from-below check on a grid of base points.
///
/// The margin `φ(u) − ζ(u)/Zₙ` is split as `imbalance + tail` with
/// `imbalance = μₙ(T)·(φ(u) − g(u))`, `g = ζ/∫ζ dM`, and
/// `tail = φ(u)·μₙ(D) ≥ 0`, where `T` is the union of tubes and `D` the rest
/// of the domain. The tail is carried in log space.
#[derive(Clone, Debug, Serialize)]
pub struct FromBelowReport {
    pub n: u64,
    pub holds: bool,
    pub worst_margin: f64,
    pub worst_point: Vec<f64>,
    /// Largest `|imbalance|` over the grid.
    pub max_abs_imbalance: f64,
    /// `ln` of the smallest tail term over the grid.
    pub log_min_tail: f64,
    /// Size below which a computed imbalance is indistinguishable from zero.
    pub resolution: f64,
    /// Margin certified positive: either computed positive, or the
    /// imbalance is below resolution while the tail term is positive.
    pub strictly_positive: bool,
    pub margins: Vec<f64>,
}

/// How `Zₙ` splits between the tubes and the rest `D` of the domain:
/// `Zₙ = S + R` with `S = Σ_j ∫ζ_j dM_j` and `R = ∫_D exp(−nℓ)π₀`, the
/// latter kept as a logarithm.
#[derive(Clone, Debug, Serialize)]
pub struct TubeSplit {
    pub n: u64,
    pub per_component: Vec<f64>,
    pub tube_total: f64,
    pub log_off_tube: f64,
}

impl TubeSplit {
    /// `ln Zₙ`.
    pub fn log_z(&self) -> f64 {
        let ls = self.tube_total.ln();
        if self.log_off_tube.is_finite() {
            ls + (self.log_off_tube - ls).exp().ln_1p()
        } else {
            ls
        }
    }

    /// `μₙ(T)`.
    pub fn mass_in_tubes(&self) -> f64 {
        (self.tube_total.ln() - self.log_z()).exp()
    }

    /// `ln μₙ(D)`.
    pub fn log_mass_off_tubes(&self) -> f64 {
        self.log_off_tube - self.log_z()
    }

    /// `ζ(u)/Zₙ` for a slice value `ζ(u)`.
    pub fn scaled(&self, zeta: f64) -> f64 {
        (zeta.ln() - self.log_z()).exp()
    }

    /// `φ(u) − ζ(u)/Zₙ` written as `μₙ(T)(φ − ζ/S) + φ·μₙ(D)`.
    pub fn margin(&self, phi: f64, zeta: f64) -> (f64, f64) {
        let imbalance = self.mass_in_tubes() * (phi - zeta / self.tube_total);
        let log_tail = phi.ln() + self.log_mass_off_tubes();
        (imbalance, log_tail)
    }
}

pub fn tube_split<T: Real>(family: &GibbsFamily<T>, n: u64) -> Result<TubeSplit> {
    let masses = tube_masses(family, n)?;
    Ok(TubeSplit {
        n,
        per_component: masses.per_component.iter().map(|v| v.as_f64()).collect(),
        tube_total: masses.total.as_f64(),
        log_off_tube: off_tube_log_mass(family, n)?.as_f64(),
    })
}

/// Base points used by default: each point, and 64 points on each sphere.
pub fn default_u_grid<T: Real>(family: &GibbsFamily<T>) -> Vec<Vec<T>> {
    family
        .components()
        .iter()
        .flat_map(|c| c.test_points(crate::problem::SPHERE_TEST_POINTS))
        .collect()
}

/// Relative size below which `φ − ζ/S` is indistinguishable from quadrature
/// roundoff in `ζ` and `S`.
pub const IMBALANCE_RESOLUTION: f64 = 1e3 * 64.0 * f64::EPSILON;

pub fn check_from_below<T: Real>(family: &GibbsFamily<T>, n: u64, u_grid: &[Vec<T>]) -> Result<FromBelowReport> {
    if !family.minimal_set().equal_dimension() {
        return Err(Error::MixedDimensions);
    }
    let limit = build_limit_measure(family)?;
    let split = tube_split(family, n)?;
    let mut worst = (f64::INFINITY, Vec::new());
    let mut max_imb = 0.0f64;
    let mut min_tail = f64::INFINITY;
    let mut resolution = 0.0f64;
    let mut margins = Vec::with_capacity(u_grid.len());
    for u in u_grid {
        let (index, _) = family.minimal_set().nearest(u);
        let frame = TubularFrame::for_component(family, index)?;
        let phi = limit.density_at(u)?.as_f64();
        let (imbalance, log_tail) = split.margin(phi, zeta_n(&frame, family, n, u)?.as_f64());
        let margin = imbalance + log_tail.exp();
        resolution = resolution.max(IMBALANCE_RESOLUTION * phi);
        max_imb = max_imb.max(imbalance.abs());
        min_tail = min_tail.min(log_tail);
        if margin < worst.0 {
            worst = (margin, u.iter().map(|v| v.as_f64()).collect());
        }
        margins.push(margin);
    }
    let holds = worst.0 >= -1e-8;
    let strictly_positive = worst.0 > 0.0 || (max_imb <= resolution && min_tail.is_finite());
    Ok(FromBelowReport {
        n,
        holds,
        worst_margin: worst.0,
        worst_point: worst.1,
        max_abs_imbalance: max_imb,
        log_min_tail: min_tail,
        resolution,
        strictly_positive,
        margins,
    })
}
