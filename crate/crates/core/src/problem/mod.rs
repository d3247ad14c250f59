//! Potentials, reference densities, minimal sets and the Gibbs family
//! `μₙ ∝ exp(−nℓ)π₀` they generate, together with numeric sanity checks.

pub mod builtin;
pub mod field;
pub mod json;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::quadrature::{Region, Shell};
use crate::scalar::{dist, Real};

pub use crate::linalg::check_positive_definite;
pub use field::{fd_hessian, Polynomial, ScalarField};

/// Absolute tolerance for `ℓ = 0` on the declared minimal set.
pub const ZERO_LEVEL_TOL: f64 = 1e-10;
/// Tolerance for a point to count as lying on a sphere.
pub const ON_MANIFOLD_TOL: f64 = 1e-8;
/// Points in the quasi-random minimum scan.
pub const SCAN_POINTS: usize = 100_000;
/// Sphere points used when checking `ℓ = 0` and the normal Hessian.
pub const SPHERE_TEST_POINTS: usize = 64;

/// Hessian of a field at `x`, analytic if available, otherwise central
/// differences with step `max(1e-5, 1e-5·|x_j|)`.
pub fn hessian_at<T: Real>(field: &ScalarField<T>, x: &[T]) -> Result<SymMatrix<T>> {
    field.hessian(x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddedSphere<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Real> EmbeddedSphere<T> {
    pub fn new(center: Vec<T>, radius: T) -> Self {
        Self { center, radius }
    }

    pub fn ambient_dim(&self) -> usize {
        self.center.len()
    }

    /// Outward unit normal `(u − c)/‖u − c‖` at a point of the sphere.
    pub fn normal_frame(&self, u: &[T]) -> Result<Vec<T>> {
        let rho = dist(u, &self.center);
        let off = (rho - self.radius).abs();
        if !(off < T::lit(ON_MANIFOLD_TOL)) {
            return Err(Error::NotOnManifold { distance: off.as_f64() });
        }
        Ok(u.iter().zip(&self.center).map(|(&a, &c)| (a - c) / rho).collect())
    }

    /// Radial projection `c + r(x − c)/‖x − c‖`. The centre maps to the pole
    /// along the first axis.
    pub fn project(&self, x: &[T]) -> Vec<T> {
        let rho = dist(x, &self.center);
        if rho == T::zero() {
            let mut p = self.center.clone();
            p[0] += self.radius;
            return p;
        }
        x.iter()
            .zip(&self.center)
            .map(|(&a, &c)| c + self.radius * (a - c) / rho)
            .collect()
    }

    /// Deterministic, roughly uniform points on the sphere: equally spaced
    /// angles for circles, a Fibonacci lattice for 2-spheres.
    pub fn test_points(&self, count: usize) -> Vec<Vec<T>> {
        let d = self.ambient_dim();
        let c = &self.center;
        let r = self.radius;
        (0..count)
            .map(|i| {
                let dir: Vec<f64> = match d {
                    2 => {
                        let th = std::f64::consts::TAU * i as f64 / count as f64;
                        vec![th.cos(), th.sin()]
                    }
                    3 => {
                        let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                        let s = (1.0 - z * z).max(0.0).sqrt();
                        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                        let ph = golden * i as f64;
                        vec![s * ph.cos(), s * ph.sin(), z]
                    }
                    _ => {
                        let mut v = vec![0.0; d];
                        v[i % d] = if (i / d).is_multiple_of(2) { 1.0 } else { -1.0 };
                        v
                    }
                };
                dir.iter()
                    .zip(c)
                    .map(|(&v, &ci)| ci + r * T::lit(v))
                    .collect()
            })
            .collect()
    }
}

/// A connected piece of the minimal set.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component<T> {
    FinitePoint { location: Vec<T> },
    EmbeddedSphere(EmbeddedSphere<T>),
}

impl<T: Real> Component<T> {
    pub fn point(location: Vec<T>) -> Self {
        Component::FinitePoint { location }
    }

    pub fn sphere(center: Vec<T>, radius: T) -> Self {
        Component::EmbeddedSphere(EmbeddedSphere::new(center, radius))
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Component::FinitePoint { location } => location.len(),
            Component::EmbeddedSphere(s) => s.ambient_dim(),
        }
    }

    /// Intrinsic dimension `k`: 0 for points, `d − 1` for spheres.
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Component::FinitePoint { .. } => 0,
            Component::EmbeddedSphere(s) => s.ambient_dim() - 1,
        }
    }

    /// Codimension `d − k`, the dimension of each normal slice.
    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.intrinsic_dim()
    }

    pub fn as_sphere(&self) -> Option<&EmbeddedSphere<T>> {
        match self {
            Component::EmbeddedSphere(s) => Some(s),
            Component::FinitePoint { .. } => None,
        }
    }

    /// Euclidean distance from `x` to the component.
    pub fn distance(&self, x: &[T]) -> T {
        match self {
            Component::FinitePoint { location } => dist(x, location),
            Component::EmbeddedSphere(s) => (dist(x, &s.center) - s.radius).abs(),
        }
    }

    /// Nearest point of the component (the slice base point).
    pub fn project(&self, x: &[T]) -> Vec<T> {
        match self {
            Component::FinitePoint { location } => location.clone(),
            Component::EmbeddedSphere(s) => s.project(x),
        }
    }

    /// Distance between the supports of two components.
    pub fn support_distance(&self, other: &Component<T>) -> T {
        use Component::*;
        match (self, other) {
            (FinitePoint { location }, c) | (c, FinitePoint { location }) => c.distance(location),
            (EmbeddedSphere(a), EmbeddedSphere(b)) => {
                let cc = dist(&a.center, &b.center);
                if cc >= a.radius + b.radius {
                    cc - a.radius - b.radius
                } else if cc <= (a.radius - b.radius).abs() {
                    (a.radius - b.radius).abs() - cc
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Tubular neighbourhood `N(ε)` as a shell.
    pub fn tube(&self, eps: T) -> Shell<T> {
        match self {
            Component::FinitePoint { location } => Shell::ball(location.clone(), eps),
            Component::EmbeddedSphere(s) => Shell {
                center: s.center.clone(),
                r_in: s.radius - eps,
                r_out: s.radius + eps,
            },
        }
    }

    /// The component itself as a degenerate shell, used as a quadrature hint.
    pub fn hint(&self) -> Shell<T> {
        match self {
            Component::FinitePoint { location } => Shell::ball(location.clone(), T::zero()),
            Component::EmbeddedSphere(s) => Shell {
                center: s.center.clone(),
                r_in: s.radius,
                r_out: s.radius,
            },
        }
    }

    /// Points on the component for grid-based checks.
    pub fn test_points(&self, count: usize) -> Vec<Vec<T>> {
        match self {
            Component::FinitePoint { location } => vec![location.clone()],
            Component::EmbeddedSphere(s) => s.test_points(count),
        }
    }

    /// Centre of the component and the outer radius of its `ε`-tube.
    fn extent(&self, eps: T) -> (&[T], T) {
        match self {
            Component::FinitePoint { location } => (location, eps),
            Component::EmbeddedSphere(s) => (&s.center, s.radius + eps),
        }
    }

    pub fn describe(&self) -> String {
        let fmt = |v: &[T]| {
            let parts: Vec<String> = v.iter().map(|x| format!("{}", x.as_f64())).collect();
            format!("({})", parts.join(", "))
        };
        match self {
            Component::FinitePoint { location } => format!("point {}", fmt(location)),
            Component::EmbeddedSphere(s) => {
                format!("sphere centre {} radius {}", fmt(&s.center), s.radius.as_f64())
            }
        }
    }
}

/// The declared zero set of `ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalSetSpec<T> {
    pub components: Vec<Component<T>>,
}

impl<T: Real> MinimalSetSpec<T> {
    pub fn new(components: Vec<Component<T>>) -> Self {
        Self { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Largest intrinsic dimension among the components.
    pub fn max_intrinsic_dim(&self) -> usize {
        self.components.iter().map(|c| c.intrinsic_dim()).max().unwrap_or(0)
    }

    pub fn equal_dimension(&self) -> bool {
        let k = self.max_intrinsic_dim();
        self.components.iter().all(|c| c.intrinsic_dim() == k)
    }

    pub fn all_points(&self) -> bool {
        self.components
            .iter()
            .all(|c| matches!(c, Component::FinitePoint { .. }))
    }

    /// Distance from `x` to the whole set and the index of the nearest
    /// component (lowest index on ties).
    pub fn nearest(&self, x: &[T]) -> (usize, T) {
        let mut best = (0, T::infinity());
        for (i, c) in self.components.iter().enumerate() {
            let d = c.distance(x);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

/// Axis-aligned integration box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Domain<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Real> Domain<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Self {
        Self { lo, hi }
    }

    pub fn cube(dim: usize, half_width: T) -> Self {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&a, &b))| v >= a && v <= b)
    }

    pub fn volume(&self) -> T {
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(T::one(), |acc, (&a, &b)| acc * (b - a))
    }

    /// Maps a point of the unit cube into the box.
    pub fn from_unit(&self, s: &[f64]) -> Vec<T> {
        s.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&a, &b))| a + (b - a) * T::lit(v))
            .collect()
    }
}

/// `ℓ`, `π₀`, the declared minimal set, the tubular radius and the box on
/// which every integral is taken.
#[derive(Clone, Debug)]
pub struct GibbsFamily<T> {
    name: String,
    ell: ScalarField<T>,
    pi0: ScalarField<T>,
    minimal_set: MinimalSetSpec<T>,
    epsilon: T,
    domain: Domain<T>,
}

impl<T: Real> GibbsFamily<T> {
    /// Builds a family after the structural checks: matching dimensions,
    /// `0 < ε < r` for spheres, disjoint `ε`-tubes, domain margin `≥ ε`,
    /// `ℓ = 0` and `π₀ > 0` on the declared set.
    pub fn new(
        name: impl Into<String>,
        ell: ScalarField<T>,
        pi0: ScalarField<T>,
        minimal_set: MinimalSetSpec<T>,
        epsilon: T,
        domain: Domain<T>,
    ) -> Result<Self> {
        let fam = Self {
            name: name.into(),
            ell,
            pi0,
            minimal_set,
            epsilon,
            domain,
        };
        fam.check_structure()?;
        Ok(fam)
    }

    fn check_structure(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProblem(msg));
        let d = self.ell.dim();
        if d == 0 {
            return bad("dimension must be positive".into());
        }
        if self.pi0.dim() != d || self.domain.dim() != d || self.domain.hi.len() != d {
            return bad("potential, reference and domain disagree on dimension".into());
        }
        if self.minimal_set.is_empty() {
            return bad("minimal set is empty".into());
        }
        if !(self.epsilon > T::zero()) {
            return bad("epsilon must be positive".into());
        }
        if self.domain.lo.iter().zip(&self.domain.hi).any(|(a, b)| !(a < b)) {
            return bad("domain must have lo < hi in every coordinate".into());
        }
        let tol = T::lit(1e-12);
        for (i, c) in self.minimal_set.components.iter().enumerate() {
            if c.ambient_dim() != d {
                return bad(format!("component {i} has the wrong dimension"));
            }
            if let Component::EmbeddedSphere(s) = c {
                if !(s.radius > T::zero()) {
                    return bad(format!("component {i}: radius must be positive"));
                }
                if !(self.epsilon < s.radius) {
                    return bad(format!("component {i}: epsilon must be below the radius"));
                }
                if !(2..=3).contains(&d) {
                    return Err(Error::Unsupported(format!("spheres in ambient dimension {d}")));
                }
            }
            let (centre, reach) = c.extent(self.epsilon);
            for j in 0..d {
                let scale = T::one().max(centre[j].abs()).max(reach);
                if centre[j] - reach - self.epsilon < self.domain.lo[j] - tol * scale
                    || centre[j] + reach + self.epsilon > self.domain.hi[j] + tol * scale
                {
                    return bad(format!(
                        "component {i}: domain does not contain its tube with margin epsilon"
                    ));
                }
            }
            for u in c.test_points(SPHERE_TEST_POINTS) {
                let v = self.ell.value(&u);
                if !(v.abs() <= T::lit(ZERO_LEVEL_TOL)) {
                    return bad(format!(
                        "potential is {} on component {i}, expected 0",
                        v.as_f64()
                    ));
                }
                if !(self.pi0.value(&u) > T::zero()) {
                    return bad(format!("reference density not positive on component {i}"));
                }
            }
        }
        let comps = &self.minimal_set.components;
        for i in 0..comps.len() {
            for j in (i + 1)..comps.len() {
                let gap = comps[i].support_distance(&comps[j]) - (self.epsilon + self.epsilon);
                if !(gap > T::zero()) {
                    return bad(format!("tubes of components {i} and {j} overlap"));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.ell.dim()
    }

    pub fn ell(&self) -> &ScalarField<T> {
        &self.ell
    }

    pub fn pi0(&self) -> &ScalarField<T> {
        &self.pi0
    }

    pub fn minimal_set(&self) -> &MinimalSetSpec<T> {
        &self.minimal_set
    }

    pub fn components(&self) -> &[Component<T>] {
        &self.minimal_set.components
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    /// Same family with a different reference density.
    pub fn with_reference(&self, pi0: ScalarField<T>) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.ell.clone(),
            pi0,
            self.minimal_set.clone(),
            self.epsilon,
            self.domain.clone(),
        )
    }

    /// Same family with a different tubular radius.
    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.ell.clone(),
            self.pi0.clone(),
            self.minimal_set.clone(),
            epsilon,
            self.domain.clone(),
        )
    }

    /// Same family on a different integration box.
    pub fn with_domain(&self, domain: Domain<T>) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.ell.clone(),
            self.pi0.clone(),
            self.minimal_set.clone(),
            self.epsilon,
            domain,
        )
    }

    /// `exp(−nℓ(x))·π₀(x)`.
    #[inline]
    pub fn unnormalized_density(&self, n: T, x: &[T]) -> T {
        (-n * self.ell.value(x)).exp() * self.pi0.value(x)
    }

    /// Index of the tube containing `x`, if any.
    pub fn tube_index(&self, x: &[T]) -> Option<usize> {
        let (i, d) = self.minimal_set.nearest(x);
        if d < self.epsilon {
            Some(i)
        } else {
            None
        }
    }

    /// The integration box with quadrature hints at every component.
    pub fn region(&self, peak_width: Option<T>) -> Region<T> {
        let hints = self.components().iter().map(|c| c.hint()).collect();
        Region::boxed(self.domain.lo.clone(), self.domain.hi.clone()).with_hints(hints, peak_width)
    }

    /// Hessian of `ℓ` restricted to the normal space of component `index` at
    /// `u`: the full Hessian for points, the 1×1 second derivative of
    /// `t ↦ ℓ(u + t·v(u))` for spheres (5-point central difference).
    pub fn normal_hessian(&self, index: usize, u: &[T]) -> Result<SymMatrix<T>> {
        match &self.components()[index] {
            Component::FinitePoint { .. } => hessian_at(&self.ell, u),
            Component::EmbeddedSphere(s) => {
                let v = s.normal_frame(u)?;
                let h = normal_step::<T>();
                let at = |t: T| -> Result<T> {
                    let x: Vec<T> = u.iter().zip(&v).map(|(&a, &b)| a + t * b).collect();
                    self.ell.try_value(&x)
                };
                let two = T::lit(2.0);
                let f2p = at(two * h)?;
                let f1p = at(h)?;
                let f0 = at(T::zero())?;
                let f1m = at(-h)?;
                let f2m = at(-two * h)?;
                let second = (-f2p + T::lit(16.0) * f1p - T::lit(30.0) * f0 + T::lit(16.0) * f1m - f2m)
                    / (T::lit(12.0) * h * h);
                Ok(SymMatrix::from_rows(1, &[second]))
            }
        }
    }

    /// Full validation: the tail condition at `δ = ε/2`, positive definite
    /// normal Hessians and a quasi-random scan for undeclared minima.
    pub fn validate(&self) -> Result<ValidationReport> {
        let delta = self.epsilon * T::lit(0.5);
        let tail = check_tail_condition(self, delta, default_grid_resolution(self.dim()))?;
        let scan = scan_minimum(self, SCAN_POINTS);
        let mut hessians = Vec::new();
        for (i, c) in self.components().iter().enumerate() {
            let mut ok = true;
            let mut smallest = f64::INFINITY;
            for u in c.test_points(SPHERE_TEST_POINTS) {
                let h = self.normal_hessian(i, &u)?;
                ok &= check_positive_definite(&h);
                if let Some(ch) = h.cholesky() {
                    let d = h.dim();
                    for j in 0..d {
                        smallest = smallest.min((ch.l(j, j) * ch.l(j, j)).as_f64());
                    }
                } else {
                    smallest = smallest.min(0.0);
                }
            }
            hessians.push(HessianCheck {
                component: i,
                description: c.describe(),
                positive_definite: ok,
                smallest_pivot: smallest,
            });
        }
        let passed = tail.passed && scan.passed && hessians.iter().all(|h| h.positive_definite);
        Ok(ValidationReport {
            problem: self.name.clone(),
            dimension: self.dim(),
            epsilon: self.epsilon.as_f64(),
            tail,
            scan,
            hessians,
            passed,
        })
    }

    /// [`validate`](Self::validate), turning a failed report into an error.
    pub fn ensure_valid(&self) -> Result<ValidationReport> {
        let report = self.validate()?;
        if report.passed {
            Ok(report)
        } else {
            Err(Error::InvalidProblem(format!(
                "{} failed validation: {}",
                self.name,
                report.failure_summary()
            )))
        }
    }
}

fn normal_step<T: Real>() -> T {
    if T::epsilon() < T::lit(1e-10) {
        T::lit(2e-3)
    } else {
        T::lit(5e-2)
    }
}

fn default_grid_resolution(d: usize) -> usize {
    match d {
        1 => 4001,
        2 => 401,
        3 => 81,
        _ => 21,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TailCheck {
    pub passed: bool,
    pub observed_infimum: f64,
    pub surviving_points: usize,
    pub delta: f64,
}

/// Falsification sweep for the tail condition: the infimum of `ℓ` on a
/// regular grid over the domain, excluding `δ`-neighbourhoods of every
/// component. Only the integration domain is examined.
pub fn check_tail_condition<T: Real>(
    family: &GibbsFamily<T>,
    delta: T,
    grid_resolution: usize,
) -> Result<TailCheck> {
    if !(delta > T::zero()) || grid_resolution < 2 {
        return Err(Error::InvalidConfig(
            "tail check needs delta > 0 and at least two grid points per axis".into(),
        ));
    }
    let d = family.dim();
    let dom = family.domain();
    let m = grid_resolution;
    let total = m.checked_pow(d as u32).ok_or(Error::SizeTooLarge {
        size: usize::MAX,
        limit: 1 << 32,
    })?;
    let mut x = vec![T::zero(); d];
    let mut inf = T::infinity();
    let mut surviving = 0usize;
    for idx in 0..total {
        let mut rest = idx;
        for j in 0..d {
            let k = rest % m;
            rest /= m;
            let s = T::of_usize(k) / T::of_usize(m - 1);
            x[j] = dom.lo[j] + (dom.hi[j] - dom.lo[j]) * s;
        }
        if family.minimal_set().nearest(&x).1 < delta {
            continue;
        }
        surviving += 1;
        let v = family.ell().try_value(&x)?;
        if v < inf {
            inf = v;
        }
    }
    if surviving < 10 {
        return Err(Error::ResolutionTooCoarse { surviving });
    }
    Ok(TailCheck {
        passed: inf > T::lit(1e-8),
        observed_infimum: inf.as_f64(),
        surviving_points: surviving,
        delta: delta.as_f64(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub points: usize,
    pub argmin: Vec<f64>,
    pub minimum: f64,
    pub distance_to_minimal_set: f64,
    pub negative_values: usize,
    pub passed: bool,
}

/// `i`-th element of the van der Corput sequence in `base`.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Halton point with index `i` (skipping the origin) in `[0,1)^d`.
pub fn halton(i: u64, d: usize) -> Vec<f64> {
    (0..d).map(|j| radical_inverse(i + 1, HALTON_BASES[j % 8])).collect()
}

/// Minimum of `ℓ` over a Halton scan of the domain; passes when the argmin
/// lies within `ε` of the declared set and no negative value is seen.
pub fn scan_minimum<T: Real>(family: &GibbsFamily<T>, count: usize) -> ScanResult {
    let d = family.dim();
    let mut best = (T::infinity(), vec![T::zero(); d]);
    let mut negatives = 0;
    for i in 0..count as u64 {
        let x = family.domain().from_unit(&halton(i, d));
        let v = family.ell().value(&x);
        if v < T::zero() {
            negatives += 1;
        }
        if v < best.0 {
            best = (v, x);
        }
    }
    let gap = family.minimal_set().nearest(&best.1).1;
    ScanResult {
        points: count,
        argmin: best.1.iter().map(|v| v.as_f64()).collect(),
        minimum: best.0.as_f64(),
        distance_to_minimal_set: gap.as_f64(),
        negative_values: negatives,
        passed: gap <= family.epsilon() && negatives == 0 && best.0.is_finite(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HessianCheck {
    pub component: usize,
    pub description: String,
    pub positive_definite: bool,
    pub smallest_pivot: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub problem: String,
    pub dimension: usize,
    pub epsilon: f64,
    pub tail: TailCheck,
    pub scan: ScanResult,
    pub hessians: Vec<HessianCheck>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failure_summary(&self) -> String {
        let mut parts = Vec::new();
        if !self.tail.passed {
            parts.push(format!("tail infimum {:.3e}", self.tail.observed_infimum));
        }
        if !self.scan.passed {
            parts.push(format!(
                "scan minimum at distance {:.3e} from the minimal set",
                self.scan.distance_to_minimal_set
            ));
        }
        for h in self.hessians.iter().filter(|h| !h.positive_definite) {
            parts.push(format!("Hessian not positive definite on {}", h.description));
        }
        parts.join("; ")
    }
}
