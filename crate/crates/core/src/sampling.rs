//! Reproducible exact samplers for `μₙ`, the limit measure and the proxies.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplace::{laplace_c0, TubularFrame};
use crate::limit::{alpha, GaussianProxy, LimitKind, LimitMeasure, SphereLimit, CDF_TABLE_NODES};
use crate::linalg::{Cholesky, SymMatrix};
use crate::problem::{Component, Domain, EmbeddedSphere, GibbsFamily, SPHERE_TEST_POINTS};
use crate::quadrature::{sphere_area, SphereRule};
use crate::scalar::{dist, norm, Real};

/// Random generator behind every sampler.
pub type StreamRng = ChaCha20Rng;

/// Safety factor applied to grid-estimated envelope constants.
pub const ENVELOPE_SAFETY: f64 = 1.5;
/// Minimum acceptable acceptance rate.
pub const MIN_ACCEPTANCE: f64 = 1e-3;
/// Proposal draws after which a low acceptance rate is fatal.
const ACCEPTANCE_PROBE: usize = 100_000;
/// Mixture weight of the uniform part over the domain, which keeps the
/// proposal heavier than the target between and beyond the tubes.
pub const DEFENSIVE_WEIGHT: f64 = 0.05;
/// Covariance inflation of the Gibbs proposal.
pub const PROPOSAL_INFLATION: f64 = 2.0;

/// A master seed and a stream index. Each pair selects an independent
/// ChaCha20 stream, so parallel work never shares generator state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Same master seed, different stream.
    pub fn with_stream(&self, stream_id: u64) -> Self {
        Self::new(self.master_seed, stream_id)
    }
}

fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

fn uniform<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.random::<f64>())
}

/// Index drawn from nonnegative weights (not necessarily normalized).
fn categorical<T: Real, R: Rng + ?Sized>(rng: &mut R, weights: &[T]) -> usize {
    let total: T = weights.iter().copied().sum();
    let target = uniform::<T, _>(rng) * total;
    let mut acc = T::zero();
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > T::zero()).unwrap_or(0)
}

/// Uniform direction on the unit sphere in `R^d`.
fn direction<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<T> {
    loop {
        let v: Vec<T> = (0..d).map(|_| normal(rng)).collect();
        let r = norm(&v);
        if r > T::zero() {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleMeta {
    pub n: Option<u64>,
    pub sampler: String,
    pub acceptance_rate: Option<f64>,
    pub seed: SeedSpec,
    pub count: usize,
    pub dimension: usize,
}

#[derive(Clone, Debug)]
pub struct SampleBatch<T> {
    pub points: Vec<Vec<T>>,
    pub meta: SampleMeta,
}

impl<T: Real> SampleBatch<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.meta.dimension
    }

    /// One point per row, columns `x0, x1, …`.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = (0..d).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| format!("{}", v.as_f64())).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Writes the CSV to `path` and the metadata to `path` with a `.json`
    /// extension.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv())?;
        std::fs::write(path.with_extension("json"), serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }

    /// Coordinate `j` of every point, sorted ascending.
    pub fn sorted_coordinate(&self, j: usize) -> Vec<T> {
        let mut v: Vec<T> = self.points.iter().map(|p| p[j]).collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        v
    }
}

/// Gaussian with a stored Cholesky factor of its covariance.
#[derive(Clone, Debug)]
struct GaussianPart<T> {
    mean: Vec<T>,
    chol: Cholesky<T>,
    log_norm: T,
}

impl<T: Real> GaussianPart<T> {
    fn new(mean: Vec<T>, covariance: &SymMatrix<T>) -> Result<Self> {
        let chol = covariance
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("proposal covariance".into()))?;
        let d = mean.len() as f64;
        let log_norm = -T::lit(0.5 * d) * T::TAU().ln() - T::lit(0.5) * chol.det().ln();
        Ok(Self { mean, chol, log_norm })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let z: Vec<T> = (0..self.mean.len()).map(|_| normal(rng)).collect();
        self.chol
            .mul_lower(&z)
            .into_iter()
            .zip(&self.mean)
            .map(|(a, &m)| a + m)
            .collect()
    }

    fn log_density(&self, x: &[T]) -> T {
        let y: Vec<T> = x.iter().zip(&self.mean).map(|(&a, &b)| a - b).collect();
        self.log_norm - T::lit(0.5) * self.chol.inv_quad_form(&y)
    }
}

/// Uniform direction times a normal radial offset truncated to `t > −r`.
#[derive(Clone, Debug)]
struct ShellPart<T> {
    sphere: EmbeddedSphere<T>,
    sd: T,
    log_trunc: T,
    log_unit_area: T,
}

impl<T: Real> ShellPart<T> {
    fn new(sphere: EmbeddedSphere<T>, sd: T) -> Self {
        let z = (sphere.radius / sd).as_f64();
        let trunc = 1.0 - 0.5 * libm::erfc(z / std::f64::consts::SQRT_2);
        let area = sphere_area::<T>(sphere.ambient_dim(), T::one());
        Self {
            log_trunc: T::lit(trunc.ln()),
            log_unit_area: area.ln(),
            sphere,
            sd,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let d = self.sphere.ambient_dim();
        let t = loop {
            let t: T = normal::<T, _>(rng) * self.sd;
            if t > -self.sphere.radius {
                break t;
            }
        };
        let rho = self.sphere.radius + t;
        direction::<T, _>(rng, d)
            .into_iter()
            .zip(&self.sphere.center)
            .map(|(v, &c)| c + rho * v)
            .collect()
    }

    fn log_density(&self, x: &[T]) -> T {
        let rho = dist(x, &self.sphere.center);
        if rho == T::zero() {
            // the ρ^{1−d} factor diverges at the center
            return T::infinity();
        }
        let t = (rho - self.sphere.radius) / self.sd;
        let d = self.sphere.ambient_dim() as i32;
        let log_normal = -T::lit(0.5) * t * t - self.sd.ln() - T::lit(0.5) * T::TAU().ln();
        log_normal - self.log_trunc - self.log_unit_area - T::of_usize((d - 1) as usize) * rho.ln()
    }
}

#[derive(Clone, Debug)]
enum Part<T> {
    Gaussian(GaussianPart<T>),
    Shell(ShellPart<T>),
    Uniform(Domain<T>),
}

/// Mixture proposal covering every tube of a Gibbs family.
#[derive(Clone, Debug)]
pub struct Proposal<T> {
    weights: Vec<T>,
    parts: Vec<Part<T>>,
}

impl<T: Real> Proposal<T> {
    /// Point minima get `N(z, κ(nH_z)^{−1})`; spheres get a uniform direction
    /// times `N(0, κ/(n·min h))` radial offset, `h` the normal Hessian.
    /// Components are weighted by their leading-order Laplace mass, floored
    /// at 1e-3 so that no tube is starved.
    pub fn for_family(family: &GibbsFamily<T>, n: u64, inflation: T) -> Result<Self> {
        let nt = T::lit(n as f64);
        let mut parts = Vec::new();
        let mut masses = Vec::new();
        for (i, c) in family.components().iter().enumerate() {
            let frame = TubularFrame::for_component(family, i)?;
            let codim = T::lit(c.codim() as f64 / 2.0);
            match c {
                Component::FinitePoint { location } => {
                    let h = family.normal_hessian(i, location)?;
                    let cov = h
                        .cholesky()
                        .ok_or_else(|| Error::NotPositiveDefinite(format!("Hessian at {}", c.describe())))?
                        .inverse()
                        .scaled(inflation / nt);
                    parts.push(Part::Gaussian(GaussianPart::new(location.clone(), &cov)?));
                    masses.push(laplace_c0(&frame, family, location)? / nt.powf(codim));
                }
                Component::EmbeddedSphere(s) => {
                    let mut h_min = T::infinity();
                    let mut mass = T::zero();
                    let rule = SphereRule::new(&s.center, s.radius)?;
                    for u in s.test_points(SPHERE_TEST_POINTS) {
                        h_min = h_min.min(family.normal_hessian(i, &u)?.get(0, 0));
                    }
                    if !(h_min > T::zero()) {
                        return Err(Error::NotPositiveDefinite(format!("normal Hessian on {}", c.describe())));
                    }
                    for (x, &w) in rule.nodes.iter().zip(&rule.weights) {
                        mass += w * laplace_c0(&frame, family, &s.project(x))?;
                    }
                    let sd = (inflation / (nt * h_min)).sqrt();
                    parts.push(Part::Shell(ShellPart::new(s.clone(), sd)));
                    masses.push(mass / nt.powf(codim));
                }
            }
        }
        let total: T = masses.iter().copied().sum();
        let floor = T::lit(1e-3);
        let mut weights: Vec<T> = masses.iter().map(|&m| (m / total).max(floor)).collect();
        let wt: T = weights.iter().copied().sum();
        let keep = T::one() - T::lit(DEFENSIVE_WEIGHT);
        weights.iter_mut().for_each(|w| *w = *w / wt * keep);
        weights.push(T::lit(DEFENSIVE_WEIGHT));
        parts.push(Part::Uniform(family.domain().clone()));
        Ok(Self { weights, parts })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let k = categorical(rng, &self.weights);
        match &self.parts[k] {
            Part::Gaussian(g) => g.sample(rng),
            Part::Shell(s) => s.sample(rng),
            Part::Uniform(dom) => dom
                .lo
                .iter()
                .zip(&dom.hi)
                .map(|(&a, &b)| a + (b - a) * uniform::<T, _>(rng))
                .collect(),
        }
    }

    pub fn log_density(&self, x: &[T]) -> T {
        let logs: Vec<T> = self
            .weights
            .iter()
            .zip(&self.parts)
            .map(|(&w, p)| {
                w.ln()
                    + match p {
                        Part::Gaussian(g) => g.log_density(x),
                        Part::Shell(s) => s.log_density(x),
                        Part::Uniform(dom) if dom.contains(x) => -dom.volume().ln(),
                        Part::Uniform(_) => T::neg_infinity(),
                    }
            })
            .collect();
        log_sum_exp(&logs)
    }

    pub fn density(&self, x: &[T]) -> T {
        self.log_density(x).exp()
    }

    /// Radius around each component that holds essentially all proposal
    /// mass, used to place envelope grids.
    fn spread(&self, k: usize) -> T {
        match &self.parts[k] {
            Part::Gaussian(g) => {
                let d = g.mean.len();
                let mut largest = T::zero();
                for i in 0..d {
                    let row: T = (0..=i).map(|j| g.chol.l(i, j) * g.chol.l(i, j)).sum();
                    largest = largest.max(row.sqrt());
                }
                largest
            }
            Part::Shell(s) => s.sd,
            Part::Uniform(_) => T::zero(),
        }
    }
}

fn log_sum_exp<T: Real>(v: &[T]) -> T {
    let m = v.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    m + v.iter().map(|&x| (x - m).exp()).sum::<T>().ln()
}

/// `−nℓ(x) + ln π₀(x)`, or `−∞` outside the domain.
fn log_target<T: Real>(family: &GibbsFamily<T>, n: T, x: &[T]) -> T {
    if !family.domain().contains(x) {
        return T::neg_infinity();
    }
    -n * family.ell().value(x) + family.pi0().value(x).ln()
}

fn envelope_grid<T: Real>(family: &GibbsFamily<T>, proposal: &Proposal<T>) -> Vec<Vec<T>> {
    let d = family.dim();
    let dom = family.domain();
    let mut pts = Vec::new();
    let global = match d {
        1 => 4001,
        2 => 151,
        _ => 31,
    };
    tensor_grid(&dom.lo, &dom.hi, global, &mut pts);
    for (k, c) in family.components().iter().enumerate() {
        let w = proposal.spread(k) * T::lit(10.0);
        match c {
            Component::FinitePoint { location } => {
                let lo: Vec<T> = location.iter().map(|&v| v - w).collect();
                let hi: Vec<T> = location.iter().map(|&v| v + w).collect();
                let local = match d {
                    1 => 2001,
                    2 => 101,
                    _ => 31,
                };
                tensor_grid(&lo, &hi, local, &mut pts);
            }
            Component::EmbeddedSphere(s) => {
                let radial = 201;
                let reach = w.min(s.radius * T::lit(0.999));
                for u in s.test_points(if d == 2 { 256 } else { 400 }) {
                    let v: Vec<T> = u.iter().zip(&s.center).map(|(&a, &c)| (a - c) / s.radius).collect();
                    for i in 0..radial {
                        let t = -reach + (reach + w) * T::of_usize(i) / T::of_usize(radial - 1);
                        pts.push(u.iter().zip(&v).map(|(&a, &b)| a + t * b).collect());
                    }
                }
            }
        }
    }
    pts
}

fn tensor_grid<T: Real>(lo: &[T], hi: &[T], m: usize, out: &mut Vec<Vec<T>>) {
    let d = lo.len();
    let total = m.pow(d as u32);
    for idx in 0..total {
        let mut rest = idx;
        let mut x = Vec::with_capacity(d);
        for j in 0..d {
            let k = rest % m;
            rest /= m;
            x.push(lo[j] + (hi[j] - lo[j]) * T::of_usize(k) / T::of_usize(m - 1));
        }
        out.push(x);
    }
}

/// `ln sup (target/proposal)` estimated on a grid.
fn log_envelope<T: Real>(family: &GibbsFamily<T>, proposal: &Proposal<T>, n: T) -> T {
    envelope_grid(family, proposal)
        .iter()
        .map(|x| log_target(family, n, x) - proposal.log_density(x))
        .filter(|v| !v.is_nan())
        .fold(T::neg_infinity(), T::max)
}

/// Largest ratio `target/(M·proposal)` over the first `count` Halton points
/// of the domain, for checking envelope validity.
pub fn envelope_check<T: Real>(family: &GibbsFamily<T>, n: u64, count: usize) -> Result<f64> {
    let nt = T::lit(n as f64);
    let proposal = Proposal::for_family(family, n, T::lit(PROPOSAL_INFLATION))?;
    let log_m = log_envelope(family, &proposal, nt) + T::lit(ENVELOPE_SAFETY).ln();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..count as u64 {
        let x = family.domain().from_unit(&crate::problem::halton(i, family.dim()));
        let r = (log_target(family, nt, &x) - proposal.log_density(&x) - log_m).as_f64();
        if !r.is_nan() {
            worst = worst.max(r);
        }
    }
    Ok(worst.exp())
}

/// Exact draws from `μₙ` by rejection under the inflated proposal.
pub fn sample_gibbs<T: Real>(family: &GibbsFamily<T>, n: u64, count: usize, seed: SeedSpec) -> Result<SampleBatch<T>> {
    if count == 0 {
        return Err(Error::InvalidConfig("count must be at least 1".into()));
    }
    let nt = T::lit(n as f64);
    let proposal = Proposal::for_family(family, n, T::lit(PROPOSAL_INFLATION))?;
    let mut log_m = log_envelope(family, &proposal, nt) + T::lit(ENVELOPE_SAFETY).ln();
    if !log_m.is_finite() {
        return Err(Error::NonFiniteValue("envelope constant".into()));
    }
    let mut rng = seed.rng();
    let mut doubled = false;
    'attempt: loop {
        let mut points = Vec::with_capacity(count);
        let mut draws = 0usize;
        while points.len() < count {
            let x = proposal.sample(&mut rng);
            draws += 1;
            let log_ratio = log_target(family, nt, &x) - proposal.log_density(&x) - log_m;
            if log_ratio > T::zero() {
                if doubled {
                    return Err(Error::EnvelopeViolation {
                        ratio: log_ratio.exp().as_f64(),
                    });
                }
                log::warn!("envelope violated in {} at n = {n}; doubling the safety factor", family.name());
                log_m += T::lit(2.0).ln();
                doubled = true;
                continue 'attempt;
            }
            if uniform::<T, _>(&mut rng).ln() < log_ratio {
                points.push(x);
            }
            if draws == ACCEPTANCE_PROBE {
                let rate = points.len() as f64 / draws as f64;
                if rate < MIN_ACCEPTANCE {
                    return Err(Error::AcceptanceTooLow { rate });
                }
            }
        }
        let rate = count as f64 / draws as f64;
        if rate < MIN_ACCEPTANCE {
            return Err(Error::AcceptanceTooLow { rate });
        }
        return Ok(SampleBatch {
            points,
            meta: SampleMeta {
                n: Some(n),
                sampler: "gibbs_rejection".into(),
                acceptance_rate: Some(rate),
                seed,
                count,
                dimension: family.dim(),
            },
        });
    }
}

/// Draws on a circle with tabulated density, by inverse CDF with a
/// piecewise-linear density between angular nodes.
struct CircleTable<T> {
    values: Vec<T>,
    cumulative: Vec<T>,
}

impl<T: Real> CircleTable<T> {
    fn new(values: Vec<T>) -> Self {
        let m = values.len();
        let h = T::TAU() / T::of_usize(m);
        let mut cumulative = Vec::with_capacity(m + 1);
        cumulative.push(T::zero());
        for k in 0..m {
            let next = values[(k + 1) % m];
            let last = *cumulative.last().expect("nonempty");
            cumulative.push(last + T::lit(0.5) * h * (values[k] + next));
        }
        Self { values, cumulative }
    }

    fn angle<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let m = self.values.len();
        let h = T::TAU() / T::of_usize(m);
        let total = self.cumulative[m];
        let target = uniform::<T, _>(rng) * total;
        let k = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&target).expect("finite"))
        {
            Ok(i) => i.min(m - 1),
            Err(i) => i.saturating_sub(1).min(m - 1),
        };
        let rem = target - self.cumulative[k];
        let f0 = self.values[k];
        let f1 = self.values[(k + 1) % m];
        let slope = (f1 - f0) / h;
        // f0·s + slope·s²/2 = rem
        let s = if slope.abs() <= T::epsilon() * f0.abs().max(T::min_positive_value()) {
            rem / f0
        } else {
            let disc = (f0 * f0 + T::lit(2.0) * slope * rem).max(T::zero());
            T::lit(2.0) * rem / (f0 + disc.sqrt())
        };
        (T::of_usize(k) * h + s.max(T::zero()).min(h)) % T::TAU()
    }
}

fn sphere_sampler<T: Real>(s: &SphereLimit<T>) -> Result<Vec<Option<CircleTable<T>>>> {
    if s.constant {
        return Ok(s.parts.iter().map(|_| None).collect());
    }
    let mut out = Vec::new();
    for (k, part) in s.parts.iter().enumerate() {
        if part.sphere.ambient_dim() != 2 {
            return Err(Error::UnsupportedDensity(
                "non-constant limit density on a 2-sphere".into(),
            ));
        }
        out.push(Some(CircleTable::new(s.circle_table(k, CDF_TABLE_NODES)?)));
    }
    Ok(out)
}

/// Reusable sampler for a limit measure.
pub struct LimitSampler<'a, T> {
    limit: &'a LimitMeasure<T>,
    weights: Vec<T>,
    tables: Vec<Option<CircleTable<T>>>,
}

impl<'a, T: Real> LimitSampler<'a, T> {
    pub fn new(limit: &'a LimitMeasure<T>) -> Result<Self> {
        match &limit.kind {
            LimitKind::Discrete { weights, .. } => Ok(Self {
                limit,
                weights: weights.clone(),
                tables: Vec::new(),
            }),
            LimitKind::SphereUniformLike(s) => Ok(Self {
                limit,
                weights: s.part_weights(),
                tables: sphere_sampler(s)?,
            }),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let k = categorical(rng, &self.weights);
        match &self.limit.kind {
            LimitKind::Discrete { atoms, .. } => atoms[k].clone(),
            LimitKind::SphereUniformLike(s) => {
                let sph = &s.parts[k].sphere;
                let dir: Vec<T> = match &self.tables[k] {
                    None => direction(rng, sph.ambient_dim()),
                    Some(table) => {
                        let th = table.angle(rng);
                        vec![th.cos(), th.sin()]
                    }
                };
                dir.iter()
                    .zip(&sph.center)
                    .map(|(&v, &c)| c + sph.radius * v)
                    .collect()
            }
        }
    }
}

pub fn sample_limit<T: Real>(limit: &LimitMeasure<T>, count: usize, seed: SeedSpec) -> Result<SampleBatch<T>> {
    let sampler = LimitSampler::new(limit)?;
    let mut rng = seed.rng();
    let points: Vec<Vec<T>> = (0..count).map(|_| sampler.draw(&mut rng)).collect();
    let dimension = match &limit.kind {
        LimitKind::Discrete { atoms, .. } => atoms[0].len(),
        LimitKind::SphereUniformLike(s) => s.parts[0].sphere.ambient_dim(),
    };
    Ok(SampleBatch {
        points,
        meta: SampleMeta {
            n: None,
            sampler: "limit".into(),
            acceptance_rate: None,
            seed,
            count,
            dimension,
        },
    })
}

/// Draws from a proxy: categorical component then `mean + L z` for
/// mixtures; rejection under `Σ_z exp(−½n(x−z)ᵀH_z(x−z))` for the maximum
/// of Gaussians (acceptance at least one over the number of minima).
pub fn sample_proxy<T: Real>(proxy: &GaussianProxy<T>, n: u64, count: usize, seed: SeedSpec) -> Result<SampleBatch<T>> {
    let mut rng = seed.rng();
    let comps = proxy.components();
    let dimension = comps[0].mean.len();
    let mut points = Vec::with_capacity(count);
    let mut draws = 0usize;
    match proxy {
        GaussianProxy::Single { .. } | GaussianProxy::Mixture { .. } => {
            let parts: Vec<GaussianPart<T>> = comps
                .iter()
                .map(|c| GaussianPart::new(c.mean.clone(), &c.covariance()))
                .collect::<Result<_>>()?;
            let weights: Vec<T> = comps.iter().map(|c| c.weight).collect();
            for _ in 0..count {
                let k = categorical(&mut rng, &weights);
                points.push(parts[k].sample(&mut rng));
            }
            draws = count;
        }
        GaussianProxy::MaxOfGaussians { components } => {
            let nt = T::lit(n as f64);
            let parts: Vec<GaussianPart<T>> = components
                .iter()
                .map(|c| {
                    let cov = c
                        .precision
                        .cholesky()
                        .ok_or_else(|| Error::NotPositiveDefinite("proxy precision".into()))?
                        .inverse()
                        .scaled(T::one() / nt);
                    GaussianPart::new(c.mean.clone(), &cov)
                })
                .collect::<Result<_>>()?;
            // exp(−½nQ_z) = (2π)^{d/2}det(nH_z)^{−1/2}·N_z, so weight by the prefactors
            let weights: Vec<T> = parts.iter().map(|p| (-p.log_norm).exp()).collect();
            while points.len() < count {
                let k = categorical(&mut rng, &weights);
                let x = parts[k].sample(&mut rng);
                draws += 1;
                let qs: Vec<T> = components
                    .iter()
                    .map(|c| {
                        let y: Vec<T> = x.iter().zip(&c.mean).map(|(&a, &b)| a - b).collect();
                        T::lit(0.5) * nt * c.precision.quad_form(&y)
                    })
                    .collect();
                let qmin = nt * alpha(components, &x);
                let denom: T = qs.iter().map(|&q| (qmin - q).exp()).sum();
                if uniform::<T, _>(&mut rng) < T::one() / denom {
                    points.push(x);
                }
            }
        }
    }
    Ok(SampleBatch {
        points,
        meta: SampleMeta {
            n: Some(n),
            sampler: match proxy {
                GaussianProxy::MaxOfGaussians { .. } => "max_of_gaussians_rejection".into(),
                _ => "gaussian_mixture".into(),
            },
            acceptance_rate: Some(count as f64 / draws.max(1) as f64),
            seed,
            count,
            dimension,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::{build_limit_measure, gaussian_mixture_proxy};
    use crate::problem::builtin;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| SeedSpec::new(7, 1).rng().random()).collect();
        let mut r = SeedSpec::new(7, 1).rng();
        let b: Vec<u64> = (0..4).map(|_| r.random()).collect();
        assert_eq!(a[0], b[0]);
        let mut r2 = SeedSpec::new(7, 2).rng();
        let c: Vec<u64> = (0..4).map(|_| r2.random()).collect();
        assert_ne!(b, c);
    }

    #[test]
    fn gaussian_gibbs_moments() {
        let fam = builtin::normal1d::<f64>();
        let batch = sample_gibbs(&fam, 100, 10_000, SeedSpec::new(11, 0)).unwrap();
        let xs: Vec<f64> = batch.points.iter().map(|p| p[0]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!(mean.abs() <= 0.003, "{mean}");
        assert!((0.0094..=0.0106).contains(&var), "{var}");
        let again = sample_gibbs(&fam, 100, 10_000, SeedSpec::new(11, 0)).unwrap();
        assert_eq!(batch.points, again.points);
    }

    #[test]
    fn volcano_radial_mean() {
        let fam = builtin::volcano::<f64>(2).unwrap();
        let batch = sample_gibbs(&fam, 400, 10_000, SeedSpec::new(3, 0)).unwrap();
        let r = batch.points.iter().map(|p| norm(p)).sum::<f64>() / batch.len() as f64;
        assert!((r - 1.0).abs() < 0.01, "{r}");
        assert!(batch.points.iter().all(|p| fam.domain().contains(p)));
    }

    #[test]
    fn limit_samples() {
        let dirac = LimitMeasure::dirac(vec![0.0]);
        let b = sample_limit(&dirac, 100, SeedSpec::new(1, 0)).unwrap();
        assert!(b.points.iter().all(|p| p[0] == 0.0));
        let two = build_limit_measure(&builtin::double_well_sym::<f64>()).unwrap();
        let b = sample_limit(&two, 10_000, SeedSpec::new(1, 0)).unwrap();
        let frac = b.points.iter().filter(|p| p[0] > 0.0).count() as f64 / 1e4;
        assert!((frac - 0.5).abs() < 0.015);
        let circle = build_limit_measure(&builtin::volcano::<f64>(2).unwrap()).unwrap();
        let b = sample_limit(&circle, 10_000, SeedSpec::new(1, 0)).unwrap();
        let mx = b.points.iter().map(|p| p[0]).sum::<f64>() / 1e4;
        let my = b.points.iter().map(|p| p[1]).sum::<f64>() / 1e4;
        assert!(mx.abs() < 0.02 && my.abs() < 0.02);
    }

    #[test]
    fn tilted_circle_limit_uses_inverse_cdf() {
        let fam = builtin::volcano::<f64>(2)
            .unwrap()
            .with_reference(crate::problem::ScalarField::new(2, "tilt", |x: &[f64]| (0.8 * x[0]).exp()))
            .unwrap();
        let mu = build_limit_measure(&fam).unwrap();
        assert!(!mu.as_sphere().unwrap().constant);
        let b = sample_limit(&mu, 40_000, SeedSpec::new(5, 0)).unwrap();
        // E[cos θ] under density ∝ e^{0.8 cos θ} is I₁(0.8)/I₀(0.8)
        let want = 0.3724386243;
        let got = b.points.iter().map(|p| p[0]).sum::<f64>() / b.len() as f64;
        assert!((got - want).abs() < 0.012, "{got}");
        let sphere = builtin::volcano::<f64>(3)
            .unwrap()
            .with_reference(crate::problem::ScalarField::new(3, "tilt", |x: &[f64]| (0.8 * x[0]).exp()))
            .unwrap();
        let mu3 = build_limit_measure(&sphere).unwrap();
        assert!(matches!(sample_limit(&mu3, 10, SeedSpec::new(5, 0)), Err(Error::UnsupportedDensity(_))));
    }

    #[test]
    fn proxy_samples() {
        let p = gaussian_mixture_proxy(&builtin::normal1d::<f64>(), 25).unwrap();
        let b = sample_proxy(&p, 25, 10_000, SeedSpec::new(9, 0)).unwrap();
        let var = b.points.iter().map(|x| x[0] * x[0]).sum::<f64>() / 1e4;
        assert!((0.037..=0.043).contains(&var), "{var}");
    }

    #[test]
    fn csv_and_sidecar() {
        let b = sample_limit(&LimitMeasure::dirac(vec![1.5, -2.0]), 2, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(b.to_csv(), "x0,x1\n1.5,-2\n1.5,-2\n");
        let dir = std::env::temp_dir().join(format!("concentra-batch-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("b.csv");
        b.write(&path).unwrap();
        let meta: SampleMeta = serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
        assert_eq!(meta.count, 2);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
