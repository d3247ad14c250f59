//! Slice quadrature in tubular coordinates around the minimal set, the
//! normalizer `Zₙ`, and checks of the Laplace asymptotics.
//!
//! Around a component `M` of codimension `s = d − k`, every point of the
//! `ε`-tube is written `S(t, u)` with `u ∈ M` and `t` in the `s`-ball of
//! radius `ε`. The slice integrals are
//!
//! ```text
//! ψ(u) = ∫ ‖t‖^p exp(−n ℓ(S(t,u))) π₀(S(t,u)) h(t,u) dt,   ζ = ψ with p = 0,
//! ```
//!
//! and `∫_{N(ε)} exp(−nℓ)π₀ dx = ∫_M ζ dM`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::check_positive_definite;
use crate::problem::{Component, EmbeddedSphere, GibbsFamily, ON_MANIFOLD_TOL};
use crate::quadrature::{Integrator, QuadOptions, Region, Shell, SphereRule};
use crate::sampling::{Proposal, SeedSpec};
use crate::scalar::{dist, Real};

/// Half-width, in units of `n^{-1/2}`, of the central slice panel.
pub const PEAK_WIDTH_SIGMAS: f64 = 6.0;
/// Relative accuracy of the off-tube mass; it enters only through a logarithm.
pub const OFF_TUBE_REL_TOL: f64 = 1e-7;

/// Normal-slice coordinates around one component.
#[derive(Clone, Debug)]
pub struct TubularFrame<T> {
    component: Component<T>,
    epsilon: T,
}

impl<T: Real> TubularFrame<T> {
    pub fn new(component: Component<T>, epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero()) {
            return Err(Error::InvalidProblem("epsilon must be positive".into()));
        }
        if let Component::EmbeddedSphere(s) = &component {
            if !(epsilon < s.radius) {
                return Err(Error::InvalidProblem("epsilon must be below the radius".into()));
            }
        }
        Ok(Self { component, epsilon })
    }

    pub fn for_component(family: &GibbsFamily<T>, index: usize) -> Result<Self> {
        let c = family
            .components()
            .get(index)
            .ok_or_else(|| Error::InvalidConfig(format!("no component with index {index}")))?;
        Self::new(c.clone(), family.epsilon())
    }

    pub fn component(&self) -> &Component<T> {
        &self.component
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn codim(&self) -> usize {
        self.component.codim()
    }

    /// `S(t, u)`: `u + t` for points, `u + t·(u − c)/r` for spheres.
    pub fn slice_map(&self, t: &[T], u: &[T]) -> Vec<T> {
        match &self.component {
            Component::FinitePoint { .. } => u.iter().zip(t).map(|(&a, &b)| a + b).collect(),
            Component::EmbeddedSphere(s) => {
                let scale = t[0] / s.radius;
                u.iter()
                    .zip(&s.center)
                    .map(|(&a, &c)| a + scale * (a - c))
                    .collect()
            }
        }
    }

    /// `h(t, u)`: 1 for points, `(1 + t/r)^{d−1}` for spheres.
    pub fn weyl_density(&self, t: &[T], _u: &[T]) -> T {
        match &self.component {
            Component::FinitePoint { .. } => T::one(),
            Component::EmbeddedSphere(s) => (T::one() + t[0] / s.radius).powi(s.ambient_dim() as i32 - 1),
        }
    }

    fn check_base(&self, u: &[T]) -> Result<()> {
        match &self.component {
            Component::FinitePoint { location } => {
                let off = dist(u, location);
                if off < T::lit(ON_MANIFOLD_TOL) {
                    Ok(())
                } else {
                    Err(Error::NotOnManifold { distance: off.as_f64() })
                }
            }
            Component::EmbeddedSphere(s) => s.normal_frame(u).map(|_| ()),
        }
    }
}

fn as_t<T: Real>(n: u64) -> T {
    T::lit(n as f64)
}

fn peak_width<T: Real>(n: u64) -> T {
    T::lit(PEAK_WIDTH_SIGMAS) / as_t::<T>(n).sqrt()
}

/// Quadrature options for a slice integral expected to be of size `scale`.
fn slice_options<T: Real>(scale: T) -> QuadOptions<T> {
    let floor = T::min_positive_value() / T::epsilon();
    QuadOptions {
        rel_tol: T::lit(1e-12),
        abs_tol: (T::lit(1e-12) * scale).max(floor),
        ..QuadOptions::default()
    }
}

/// `ζ⁽ⁿ⁾(u)`; shares its code path with [`psi_n`] at `p = 0`.
pub fn zeta_n<T: Real>(frame: &TubularFrame<T>, family: &GibbsFamily<T>, n: u64, u: &[T]) -> Result<T> {
    psi_n(frame, family, n, 0, u)
}

/// `ψ⁽ⁿ⁾(u)`, the slice integral weighted by `‖t‖^p`.
pub fn psi_n<T: Real>(frame: &TubularFrame<T>, family: &GibbsFamily<T>, n: u64, p: u32, u: &[T]) -> Result<T> {
    frame.check_base(u)?;
    let nt = as_t::<T>(n);
    let eps = frame.epsilon();
    let width = peak_width::<T>(n);
    let codim = frame.codim();
    let scale = family.pi0().value(u).abs()
        * (T::TAU() / nt).powf(T::lit(codim as f64 / 2.0))
        * nt.powf(T::lit(-(p as f64) / 2.0));
    let opts = slice_options(scale);
    let ell = family.ell();
    let pi0 = family.pi0();

    if codim == 1 {
        let mut breaks = vec![T::zero()];
        if width < eps {
            breaks.push(-width);
            breaks.push(width);
        }
        let f = |t: T| {
            let tv = [t];
            let x = frame.slice_map(&tv, u);
            let w = if p == 0 { T::one() } else { t.abs().powi(p as i32) };
            w * (-nt * ell.value(&x)).exp() * pi0.value(&x) * frame.weyl_density(&tv, u)
        };
        return Integrator::new(opts).integrate(f, -eps, eps, &breaks).map(|r| r.value);
    }

    // point component in d ≥ 2: the slice is the ε-ball itself
    let lo: Vec<T> = u.iter().map(|&c| c - eps).collect();
    let hi: Vec<T> = u.iter().map(|&c| c + eps).collect();
    let mut region = Region::boxed(lo, hi).with_hints(
        vec![Shell::ball(u.to_vec(), T::zero())],
        if width < eps { Some(width) } else { None },
    );
    region.include = Some(Shell::ball(u.to_vec(), eps));
    let f = |x: &[T]| {
        let w = if p == 0 { T::one() } else { dist(x, u).powi(p as i32) };
        w * (-nt * ell.value(x)).exp() * pi0.value(x)
    };
    region.integrate(f, opts).map(|r| r.value)
}

/// Integral of `ζ` over one component against its intrinsic measure
/// (counting measure for points), i.e. the tube mass `∫_{N(ε)} e^{−nℓ}π₀`.
pub fn integrate_zeta<T: Real>(frame: &TubularFrame<T>, family: &GibbsFamily<T>, n: u64) -> Result<T> {
    match frame.component() {
        Component::FinitePoint { location } => zeta_n(frame, family, n, location),
        Component::EmbeddedSphere(s) => {
            let rule = SphereRule::new(&s.center, s.radius)?;
            let mut acc = T::zero();
            for (x, &w) in rule.nodes.iter().zip(&rule.weights) {
                acc += w * zeta_n(frame, family, n, &s.project(x))?;
            }
            Ok(acc)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TubularCheck {
    pub ambient: f64,
    pub tubular: f64,
    pub rel_diff: f64,
}

/// Compares the ambient integral of `exp(−nℓ)π₀` over the tube with the
/// slice-then-manifold integral `∫_M ζ dM`.
pub fn tubular_integral_check<T: Real>(
    frame: &TubularFrame<T>,
    family: &GibbsFamily<T>,
    n: u64,
) -> Result<TubularCheck> {
    let d = family.dim();
    if d > 3 {
        return Err(Error::Unsupported(format!("ambient quadrature in dimension {d}")));
    }
    let nt = as_t::<T>(n);
    let width = peak_width::<T>(n);
    let c = frame.component();
    let eps = frame.epsilon();
    let (lo, hi): (Vec<T>, Vec<T>) = match c {
        Component::FinitePoint { location } => (
            location.iter().map(|&v| v - eps).collect(),
            location.iter().map(|&v| v + eps).collect(),
        ),
        Component::EmbeddedSphere(s) => (
            s.center.iter().map(|&v| v - s.radius - eps).collect(),
            s.center.iter().map(|&v| v + s.radius + eps).collect(),
        ),
    };
    let mut region = Region::boxed(lo, hi).with_hints(vec![c.hint()], if width < eps { Some(width) } else { None });
    region.include = Some(c.tube(eps));
    let tubular = integrate_zeta(frame, family, n)?;
    let mut opts = slice_options(tubular);
    opts.rel_tol = T::lit(1e-10);
    let ell = family.ell();
    let pi0 = family.pi0();
    let ambient = region
        .integrate(|x| (-nt * ell.value(x)).exp() * pi0.value(x), opts)?
        .value;
    let rel = ((ambient - tubular) / ambient).abs();
    Ok(TubularCheck {
        ambient: ambient.as_f64(),
        tubular: tubular.as_f64(),
        rel_diff: rel.as_f64(),
    })
}

/// Tube masses `∫_{M_j} ζ_j dM_j` for every component and their sum.
#[derive(Clone, Debug)]
pub struct TubeMasses<T> {
    pub per_component: Vec<T>,
    pub total: T,
}

pub fn tube_masses<T: Real>(family: &GibbsFamily<T>, n: u64) -> Result<TubeMasses<T>> {
    let mut per = Vec::with_capacity(family.components().len());
    for i in 0..family.components().len() {
        per.push(integrate_zeta(&TubularFrame::for_component(family, i)?, family, n)?);
    }
    let total = per.iter().copied().sum();
    Ok(TubeMasses {
        per_component: per,
        total,
    })
}

fn coarse_grid(d: usize) -> usize {
    match d {
        1 => 4001,
        2 => 201,
        _ => 41,
    }
}

/// `ln ∫_D exp(−nℓ)π₀` over the part `D` of the domain outside every tube,
/// computed as `−n·m + ln ∫_D exp(−n(ℓ − m))π₀` with `m` the smallest value of
/// `ℓ` seen on the tube boundaries and a grid of `D`, so that the result
/// stays finite far beyond the underflow threshold.
pub fn off_tube_log_mass<T: Real>(family: &GibbsFamily<T>, n: u64) -> Result<T> {
    let d = family.dim();
    if d > 3 {
        return Err(Error::Unsupported(format!("ambient quadrature in dimension {d}")));
    }
    let eps = family.epsilon();
    let ell = family.ell();
    let mut m = T::infinity();
    for c in family.components() {
        for u in c.test_points(256) {
            let dirs: Vec<Vec<T>> = match c {
                Component::FinitePoint { .. } => {
                    EmbeddedSphere::new(vec![T::zero(); d], T::one()).test_points(256)
                }
                Component::EmbeddedSphere(s) => {
                    let v = s.normal_frame(&u)?;
                    vec![v.clone(), v.iter().map(|&x| -x).collect()]
                }
            };
            for v in dirs {
                let x: Vec<T> = u.iter().zip(&v).map(|(&a, &b)| a + eps * b).collect();
                m = m.min(ell.value(&x));
            }
        }
    }
    let dom = family.domain();
    let res = coarse_grid(d);
    let total = res.pow(d as u32);
    let mut x = vec![T::zero(); d];
    for idx in 0..total {
        let mut rest = idx;
        for j in 0..d {
            let k = rest % res;
            rest /= res;
            x[j] = dom.lo[j] + (dom.hi[j] - dom.lo[j]) * T::of_usize(k) / T::of_usize(res - 1);
        }
        if family.tube_index(&x).is_none() {
            m = m.min(ell.value(&x));
        }
    }
    if !m.is_finite() {
        return Err(Error::NonFiniteValue("potential outside the tubes".into()));
    }
    let nt = as_t::<T>(n);
    if d == 3 && family.components().len() == 1 {
        return off_tube_polar(family, nt, m).map(|scaled| -nt * m + scaled.ln());
    }
    let mut region = Region::boxed(dom.lo.clone(), dom.hi.clone());
    region.exclude = family.components().iter().map(|c| c.tube(eps)).collect();
    region.hints = boundary_ladder(family, nt, m);
    let mut opts = QuadOptions::<T>::with_tol(1e-14, OFF_TUBE_REL_TOL);
    opts.max_panels = 20_000;
    let pi0 = family.pi0();
    let scaled = region
        .integrate(|x| (-nt * (ell.value(x) - m)).exp() * pi0.value(x), opts)?
        .value;
    Ok(-nt * m + scaled.ln())
}

/// Off-tube mass scaled by `exp(nm)` for a single component in `R^3`, in
/// polar coordinates about its centre: a product rule over directions and an
/// adaptive radial integral graded towards the tube boundary. The angular
/// rule is refined until two resolutions agree.
fn off_tube_polar<T: Real>(family: &GibbsFamily<T>, nt: T, m: T) -> Result<T> {
    let eps = family.epsilon();
    let tube = family.components()[0].tube(eps);
    let c = &tube.center;
    let dom = family.domain();
    let ell = family.ell();
    let pi0 = family.pi0();
    let w = (eps / (T::lit(2.0) * nt * m.max(T::min_positive_value()))).min(eps);
    let integrator = Integrator::new({
        let mut o = QuadOptions::<T>::with_tol(0.0, OFF_TUBE_REL_TOL * 0.1);
        o.max_panels = 2_000;
        o
    });
    let along = |dir: &[T]| -> Result<T> {
        let mut reach = T::infinity();
        for j in 0..3 {
            if dir[j] > T::zero() {
                reach = reach.min((dom.hi[j] - c[j]) / dir[j]);
            } else if dir[j] < T::zero() {
                reach = reach.min((dom.lo[j] - c[j]) / dir[j]);
            }
        }
        let mut x = [T::zero(); 3];
        let mut f = |r: T| {
            for j in 0..3 {
                x[j] = c[j] + r * dir[j];
            }
            r * r * (-nt * (ell.value(&x) - m)).exp() * pi0.value(&x)
        };
        let mut total = T::zero();
        if tube.r_in > T::zero() {
            let mut cuts = Vec::new();
            let mut step = w;
            while step < tube.r_in {
                cuts.push(tube.r_in - step);
                step *= T::lit(2.0);
            }
            total += integrator.integrate(&mut f, T::zero(), tube.r_in.min(reach), &cuts)?.value;
        }
        if reach > tube.r_out {
            let mut cuts = Vec::new();
            let mut step = w;
            while tube.r_out + step < reach {
                cuts.push(tube.r_out + step);
                step *= T::lit(2.0);
            }
            total += integrator.integrate(&mut f, tube.r_out, reach, &cuts)?.value;
        }
        Ok(total)
    };
    let origin = [T::zero(); 3];
    let mut previous: Option<T> = None;
    for level in 0..4 {
        let polar = 16usize << level;
        let rule = SphereRule::sphere(&origin, T::one(), polar, 2 * polar);
        let mut total = T::zero();
        for (dir, &wt) in rule.nodes.iter().zip(&rule.weights) {
            total += wt * along(dir)?;
        }
        if let Some(prev) = previous {
            if (total - prev).abs() <= T::lit(OFF_TUBE_REL_TOL) * total.abs() {
                return Ok(total);
            }
        }
        previous = Some(total);
    }
    let total = previous.expect("at least one level");
    log::warn!("off-tube angular rule did not settle; using the finest level");
    Ok(total)
}

/// Shells at geometrically growing distances outside each tube boundary.
/// The off-tube integrand decays from the boundary on the scale
/// `1/(n|∇ℓ|) ≈ ε/(2nm)`, so a graded mesh there resolves it for any `n`.
fn boundary_ladder<T: Real>(family: &GibbsFamily<T>, nt: T, m: T) -> Vec<Shell<T>> {
    let eps = family.epsilon();
    let dom = family.domain();
    let reach = (0..family.dim())
        .map(|j| dom.hi[j] - dom.lo[j])
        .fold(T::zero(), T::max);
    let w = (eps / (T::lit(2.0) * nt * m.max(T::min_positive_value()))).min(eps);
    let mut out = Vec::new();
    for c in family.components() {
        let tube = c.tube(eps);
        let mut step = w;
        while step < reach {
            let outer = tube.r_out + step;
            out.push(Shell { center: tube.center.clone(), r_in: outer, r_out: outer });
            if tube.r_in > T::zero() && tube.r_in > step {
                let inner = tube.r_in - step;
                out.push(Shell { center: tube.center.clone(), r_in: inner, r_out: inner });
            }
            step *= T::lit(2.0);
        }
    }
    out
}

/// Method used for a normalizer estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizerMethod {
    Quadrature,
    ImportanceSampling,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizerEstimate<T> {
    pub value: T,
    pub standard_error: Option<T>,
    pub method: NormalizerMethod,
}

/// Relative standard error above which importance sampling is rejected.
pub const MAX_RELATIVE_SE: f64 = 1e-3;
const IS_BATCH: usize = 1 << 16;
const IS_MAX_DRAWS: usize = 1 << 22;
const IS_SEED: u64 = 0x5eed_2a11_c0de_0001;

/// `Zₙ = ∫ exp(−nℓ)π₀` over the integration domain: iterated quadrature for
/// `d ≤ 2`, importance sampling under the inflated proposal otherwise.
pub fn normalizer_zn<T: Real>(family: &GibbsFamily<T>, n: u64) -> Result<NormalizerEstimate<T>> {
    let nt = as_t::<T>(n);
    let ell = family.ell();
    let pi0 = family.pi0();
    if family.dim() <= 2 {
        let width = peak_width::<T>(n);
        let region = family.region(Some(width.min(family.epsilon())));
        let mut opts = QuadOptions::<T>::with_tol(0.0, 1e-12);
        opts.abs_tol = T::min_positive_value() / T::epsilon();
        opts.max_panels = 20_000;
        let r = region.integrate(|x| (-nt * ell.value(x)).exp() * pi0.value(x), opts)?;
        return Ok(NormalizerEstimate {
            value: r.value,
            standard_error: None,
            method: NormalizerMethod::Quadrature,
        });
    }
    let proposal = Proposal::for_family(family, n, T::lit(2.0))?;
    let mut rng = SeedSpec::new(IS_SEED, n).rng();
    let (mut sum, mut sum_sq, mut count) = (0.0f64, 0.0f64, 0usize);
    loop {
        for _ in 0..IS_BATCH {
            let x = proposal.sample(&mut rng);
            let w = if family.domain().contains(&x) {
                ((-nt * ell.value(&x)).exp() * pi0.value(&x) / proposal.density(&x)).as_f64()
            } else {
                0.0
            };
            sum += w;
            sum_sq += w * w;
        }
        count += IS_BATCH;
        let mean = sum / count as f64;
        let var = (sum_sq / count as f64 - mean * mean).max(0.0) * count as f64 / (count - 1) as f64;
        let se = (var / count as f64).sqrt();
        let rel = if mean > 0.0 { se / mean } else { f64::INFINITY };
        if rel <= 0.25 * MAX_RELATIVE_SE || count >= IS_MAX_DRAWS {
            if rel > MAX_RELATIVE_SE {
                return Err(Error::MonteCarloVarianceTooHigh { relative_se: rel });
            }
            return Ok(NormalizerEstimate {
                value: T::lit(mean),
                standard_error: Some(T::lit(se)),
                method: NormalizerMethod::ImportanceSampling,
            });
        }
    }
}

/// Density of the intermediate measure `νₙ` with respect to the intrinsic
/// measure: `ζ(u)/Σ_j ∫ζ_j dM_j`, the denominator being
/// `Zₙ·Σ_j μₙ(N_j(ε))` written through the tube masses.
#[derive(Clone, Debug)]
pub struct IntermediateDensity<T> {
    n: u64,
    masses: TubeMasses<T>,
}

impl<T: Real> IntermediateDensity<T> {
    pub fn new(family: &GibbsFamily<T>, n: u64) -> Result<Self> {
        if !family.minimal_set().equal_dimension() {
            return Err(Error::MixedDimensions);
        }
        Ok(Self {
            n,
            masses: tube_masses(family, n)?,
        })
    }

    pub fn masses(&self) -> &TubeMasses<T> {
        &self.masses
    }

    pub fn eval(&self, family: &GibbsFamily<T>, u: &[T]) -> Result<T> {
        let (index, _) = family.minimal_set().nearest(u);
        let frame = TubularFrame::for_component(family, index)?;
        Ok(zeta_n(&frame, family, self.n, u)? / self.masses.total)
    }
}

pub fn intermediate_density<T: Real>(family: &GibbsFamily<T>, n: u64, u: &[T]) -> Result<T> {
    IntermediateDensity::new(family, n)?.eval(family, u)
}

/// `c₀(u) = (2π)^{(d−k)/2}·π₀(u)·det(normal Hessian)^{−1/2}`.
pub fn laplace_c0<T: Real>(frame: &TubularFrame<T>, family: &GibbsFamily<T>, u: &[T]) -> Result<T> {
    frame.check_base(u)?;
    let index = family
        .components()
        .iter()
        .position(|c| c == frame.component())
        .ok_or_else(|| Error::InvalidConfig("frame does not belong to this family".into()))?;
    let h = family.normal_hessian(index, u)?;
    if !check_positive_definite(&h) {
        return Err(Error::NotPositiveDefinite(format!("normal Hessian at {}", frame.component().describe())));
    }
    let det = h.cholesky().expect("checked positive definite").det();
    let s = T::lit(frame.codim() as f64 / 2.0);
    Ok(T::TAU().powf(s) * family.pi0().value(u) / det.sqrt())
}

/// Error sequence of `(n/2π)^{(d−k)/2}·ζ⁽ⁿ⁾(u)` against its limit
/// `c₀(u)/(2π)^{(d−k)/2}` along a doubling grid.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticScan {
    pub n_grid: Vec<u64>,
    pub values: Vec<f64>,
    pub reference: f64,
    pub errors: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl AsymptoticScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value,reference,abs_error,ratio\n");
        for i in 0..self.n_grid.len() {
            let ratio = if i == 0 {
                String::new()
            } else {
                format!("{:e}", self.ratios[i - 1])
            };
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{}",
                self.n_grid[i], self.values[i], self.reference, self.errors[i], ratio
            );
        }
        out
    }
}

pub fn laplace_error_scan<T: Real>(
    frame: &TubularFrame<T>,
    family: &GibbsFamily<T>,
    u: &[T],
    n_grid: &[u64],
) -> Result<AsymptoticScan> {
    if n_grid.len() < 5 {
        return Err(Error::InvalidConfig("scan needs at least five grid points".into()));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidConfig("scan grid must double at every step".into()));
    }
    let s = frame.codim() as f64 / 2.0;
    let two_pi = std::f64::consts::TAU;
    let reference = laplace_c0(frame, family, u)?.as_f64() / two_pi.powf(s);
    let mut values = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let z = zeta_n(frame, family, n, u)?.as_f64();
        values.push((n as f64 / two_pi).powf(s) * z);
    }
    let errors: Vec<f64> = values.iter().map(|v| (v - reference).abs()).collect();
    let ratios = errors.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(AsymptoticScan {
        n_grid: n_grid.to_vec(),
        values,
        reference,
        errors,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::builtin;

    #[test]
    fn frame_identities() {
        let fam = builtin::volcano::<f64>(3).unwrap();
        let frame = TubularFrame::for_component(&fam, 0).unwrap();
        let u = [0.0, 0.6, 0.8];
        assert_eq!(frame.slice_map(&[0.0], &u), u.to_vec());
        assert_eq!(frame.weyl_density(&[0.0], &u), 1.0);
        assert!((frame.weyl_density(&[0.25], &u) - 1.5625).abs() < 1e-15);
        let x = frame.slice_map(&[0.3], &u);
        assert!((crate::scalar::norm(&x) - 1.3).abs() < 1e-15);
    }

    #[test]
    fn zeta_of_quadratic_point_is_gaussian_integral() {
        let fam = builtin::normal1d::<f64>();
        for n in [1u64, 10, 100, 1000] {
            let e = 6.0 / (n as f64).sqrt();
            let fam = fam.with_epsilon(e.min(1.0)).unwrap();
            let frame = TubularFrame::for_component(&fam, 0).unwrap();
            let z = zeta_n(&frame, &fam, n, &[0.0]).unwrap();
            let exact = libm::erf(e.min(1.0) * (n as f64 / 2.0).sqrt())
                * (std::f64::consts::TAU / n as f64).sqrt();
            assert!((z - exact).abs() < 1e-12 * exact, "n={n}: {z} vs {exact}");
        }
    }

    #[test]
    fn psi_at_zero_order_is_zeta() {
        let fam = builtin::volcano::<f64>(2).unwrap();
        let frame = TubularFrame::for_component(&fam, 0).unwrap();
        let u = [0.6, -0.8];
        assert_eq!(
            zeta_n(&frame, &fam, 37, &u).unwrap().to_bits(),
            psi_n(&frame, &fam, 37, 0, &u).unwrap().to_bits()
        );
    }

    #[test]
    fn volcano_zeta_is_constant() {
        let fam = builtin::volcano::<f64>(2).unwrap();
        let frame = TubularFrame::for_component(&fam, 0).unwrap();
        let a = zeta_n(&frame, &fam, 10, &[1.0, 0.0]).unwrap();
        let b = zeta_n(&frame, &fam, 10, &[-1.0, 0.0]).unwrap();
        assert!(((a - b) / a).abs() <= 1e-10);
    }

    #[test]
    fn base_point_must_lie_on_component() {
        let fam = builtin::volcano::<f64>(2).unwrap();
        let frame = TubularFrame::for_component(&fam, 0).unwrap();
        assert!(matches!(
            zeta_n(&frame, &fam, 10, &[1.1, 0.0]),
            Err(Error::NotOnManifold { .. })
        ));
    }

    #[test]
    fn c0_examples() {
        let fam = builtin::volcano::<f64>(2).unwrap();
        let frame = TubularFrame::for_component(&fam, 0).unwrap();
        let c0 = laplace_c0(&frame, &fam, &[0.0, 1.0]).unwrap();
        assert!((c0 - std::f64::consts::TAU.sqrt()).abs() < 1e-9);
        let scaled = fam.with_reference(crate::problem::ScalarField::constant(2, 3.0)).unwrap();
        let c3 = laplace_c0(&frame, &scaled, &[0.0, 1.0]).unwrap();
        assert!((c3 - 3.0 * c0).abs() < 1e-9);
    }

    #[test]
    fn normalizer_of_standard_gaussian() {
        let fam = builtin::normal1d::<f64>()
            .with_domain(crate::problem::Domain::new(vec![-20.0], vec![20.0]))
            .unwrap();
        for n in [1u64, 16, 1000] {
            let z = normalizer_zn(&fam, n).unwrap();
            let exact = (std::f64::consts::TAU / n as f64).sqrt();
            assert!(((z.value - exact) / exact).abs() < 1e-10);
            assert_eq!(z.method, NormalizerMethod::Quadrature);
        }
    }

    #[test]
    fn off_tube_mass_in_log_space() {
        // normal1d with ε = 1: ∫_{|x|>1, |x|<8} e^{−nx²/2} = √(2π/n)·erfc(√(n/2)) (tail beyond 8 negligible)
        let fam = builtin::normal1d::<f64>();
        for n in [10u64, 1000, 100_000] {
            let got = off_tube_log_mass(&fam, n).unwrap();
            let nf = n as f64;
            // ln erfc(z) ≈ −z² − ln(z√π) + ln(1 − 1/(2z²) + 3/(4z⁴))
            let z = (nf / 2.0).sqrt();
            let ln_erfc = if z < 20.0 {
                libm::erfc(z).ln()
            } else {
                -z * z - (z * std::f64::consts::PI.sqrt()).ln() + (1.0 - 0.5 / (z * z) + 0.75 / z.powi(4)).ln()
            };
            let want = 0.5 * (std::f64::consts::TAU / nf).ln() + ln_erfc;
            assert!((got - want).abs() < 1e-6 * want.abs().max(1.0), "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn scan_requires_doubling_grid() {
        let fam = builtin::normal1d::<f64>();
        let frame = TubularFrame::for_component(&fam, 0).unwrap();
        assert!(laplace_error_scan(&frame, &fam, &[0.0], &[1, 2, 4, 8]).is_err());
        assert!(laplace_error_scan(&frame, &fam, &[0.0], &[1, 2, 4, 8, 15]).is_err());
        let scan = laplace_error_scan(&frame, &fam, &[0.0], &[128, 256, 512, 1024, 2048]).unwrap();
        assert!(scan.errors.iter().all(|&e| e < 1e-12), "{:?}", scan.errors);
        assert!(scan.to_csv().starts_with("n,value,reference,abs_error,ratio\n128,"));
    }
}
