//! `W^p` estimation: exact 1-D and discrete solvers, semi-discrete and
//! empirical plug-ins, Gaussian closed forms and the tubular coupling bound.

pub mod simplex;

use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laplace::{zeta_n, TubularFrame};
use crate::limit::{tube_split, LimitKind, LimitMeasure, TubeSplit, IMBALANCE_RESOLUTION};
use crate::problem::GibbsFamily;
use crate::quadrature::integrate;
use crate::sampling::{sample_gibbs, LimitSampler, SampleBatch, SeedSpec};
use crate::scalar::{dist_pow, Real};

/// Largest support (per side) accepted by the discrete solvers.
pub const MAX_SUPPORT: usize = 4096;
/// Marginal tolerance of a transport plan.
pub const PLAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMethod {
    Exact1D,
    ExactDiscrete,
    SemiDiscrete,
    EmpiricalOt,
    CouplingUpperBound,
    ClosedForm,
}

/// Sparse joint weights between two finite supports.
#[derive(Clone, Debug)]
pub struct TransportPlan<T> {
    pub left: Vec<Vec<T>>,
    pub left_weights: Vec<T>,
    pub right: Vec<Vec<T>>,
    pub right_weights: Vec<T>,
    /// `(i, j, mass)` triplets with positive mass.
    pub entries: Vec<(usize, usize, T)>,
    /// Most negative relative reduced cost of the dual certificate.
    pub min_reduced_cost: f64,
}

impl<T: Real> TransportPlan<T> {
    /// Largest deviation of the row and column sums from the marginals.
    pub fn marginal_error(&self) -> f64 {
        let mut rows = vec![0.0f64; self.left.len()];
        let mut cols = vec![0.0f64; self.right.len()];
        for &(i, j, w) in &self.entries {
            rows[i] += w.as_f64();
            cols[j] += w.as_f64();
        }
        let r = rows
            .iter()
            .zip(&self.left_weights)
            .map(|(a, b)| (a - b.as_f64()).abs());
        let c = cols
            .iter()
            .zip(&self.right_weights)
            .map(|(a, b)| (a - b.as_f64()).abs());
        r.chain(c).fold(0.0, f64::max)
    }

    pub fn is_feasible(&self) -> bool {
        self.entries.iter().all(|e| e.2 >= T::zero()) && self.marginal_error() <= PLAN_TOL
    }

    /// `i,j,mass` per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,mass\n");
        for &(i, j, w) in &self.entries {
            let _ = writeln!(out, "{i},{j},{}", w.as_f64());
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct TransportEstimate<T> {
    pub p: u32,
    pub value: T,
    pub method: TransportMethod,
    pub standard_error: Option<T>,
    pub plan: Option<TransportPlan<T>>,
}

impl<T: Real> TransportEstimate<T> {
    fn plain(p: u32, value: T, method: TransportMethod) -> Self {
        Self {
            p,
            value,
            method,
            standard_error: None,
            plan: None,
        }
    }
}

fn check_order(p: u32) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidConfig("transport order p must be at least 1".into()));
    }
    Ok(())
}

fn root<T: Real>(mean_cost: T, p: u32) -> T {
    mean_cost.max(T::zero()).powf(T::one() / T::lit(p as f64))
}

/// Standard error of `m^{1/p}` from that of `m`.
fn root_se<T: Real>(mean_cost: T, se: T, p: u32) -> T {
    if mean_cost <= T::zero() {
        return T::zero();
    }
    let pf = T::lit(p as f64);
    se * mean_cost.powf(T::one() / pf - T::one()) / pf
}

/// Monotone coupling of two sorted samples of equal size.
pub fn wasserstein_1d<T: Real>(xs: &[T], ys: &[T], p: u32) -> Result<TransportEstimate<T>> {
    check_order(p)?;
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::InvalidConfig("empty sample".into()));
    }
    let sorted = |v: &[T]| v.windows(2).all(|w| w[0] <= w[1]);
    if !sorted(xs) || !sorted(ys) {
        return Err(Error::InvalidConfig("samples must be sorted ascending".into()));
    }
    let mean = xs
        .iter()
        .zip(ys)
        .map(|(&a, &b)| (a - b).abs().powi(p as i32))
        .sum::<T>()
        / T::of_usize(xs.len());
    Ok(TransportEstimate::plain(p, root(mean, p), TransportMethod::Exact1D))
}

fn check_measure<T: Real>(atoms: &[Vec<T>], weights: &[T]) -> Result<()> {
    if atoms.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: atoms.len(),
            right: weights.len(),
        });
    }
    if atoms.len() > MAX_SUPPORT {
        return Err(Error::SizeTooLarge {
            size: atoms.len(),
            limit: MAX_SUPPORT,
        });
    }
    let total: f64 = weights.iter().map(|w| w.as_f64()).sum();
    if atoms.is_empty() || weights.iter().any(|w| *w < T::zero()) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Infeasible("weights must be nonnegative and sum to 1".into()));
    }
    Ok(())
}

/// Exact optimal transport between two finite measures with cost
/// `‖x − y‖^p`, with a primal plan and a dual optimality certificate.
pub fn wasserstein_discrete<T: Real>(
    mu: (&[Vec<T>], &[T]),
    nu: (&[Vec<T>], &[T]),
    p: u32,
) -> Result<TransportEstimate<T>> {
    check_order(p)?;
    check_measure(mu.0, mu.1)?;
    check_measure(nu.0, nu.1)?;
    let d = mu.0[0].len();
    if mu.0.iter().chain(nu.0).any(|a| a.len() != d) {
        return Err(Error::InvalidConfig("atoms of different dimensions".into()));
    }
    let cost: Vec<f64> = mu
        .0
        .iter()
        .flat_map(|x| nu.0.iter().map(move |y| dist_pow(x, y, p).as_f64()))
        .collect();
    let a: Vec<f64> = mu.1.iter().map(|w| w.as_f64()).collect();
    let b: Vec<f64> = nu.1.iter().map(|w| w.as_f64()).collect();
    let sol = simplex::solve(&a, &b, &cost)?;
    let plan = TransportPlan {
        left: mu.0.to_vec(),
        left_weights: mu.1.to_vec(),
        right: nu.0.to_vec(),
        right_weights: nu.1.to_vec(),
        entries: sol.flows.iter().map(|&(i, j, w)| (i, j, T::lit(w))).collect(),
        min_reduced_cost: sol.min_reduced_cost,
    };
    Ok(TransportEstimate {
        p,
        value: root(T::lit(sol.cost), p),
        method: TransportMethod::ExactDiscrete,
        standard_error: None,
        plan: Some(plan),
    })
}

/// Exact OT between two equal-size point clouds with uniform weights.
pub fn empirical_wp<T: Real>(a: &SampleBatch<T>, b: &SampleBatch<T>, p: u32) -> Result<TransportEstimate<T>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() > MAX_SUPPORT {
        return Err(Error::SizeTooLarge {
            size: a.len(),
            limit: MAX_SUPPORT,
        });
    }
    if a.dim() == 1 {
        let est = wasserstein_1d(&a.sorted_coordinate(0), &b.sorted_coordinate(0), p)?;
        return Ok(TransportEstimate {
            method: TransportMethod::EmpiricalOt,
            ..est
        });
    }
    let w = vec![T::one() / T::of_usize(a.len()); a.len()];
    let est = wasserstein_discrete((&a.points, &w), (&b.points, &w), p)?;
    Ok(TransportEstimate {
        method: TransportMethod::EmpiricalOt,
        ..est
    })
}

/// Exact OT between the uniform empirical measure of `samples` and a
/// discrete limit. The standard error treats the per-sample transport
/// costs under the optimal plan as independent.
pub fn semi_discrete_to_atoms<T: Real>(
    samples: &SampleBatch<T>,
    limit: &LimitMeasure<T>,
    p: u32,
) -> Result<TransportEstimate<T>> {
    let (atoms, weights) = limit
        .as_discrete()
        .ok_or_else(|| Error::InvalidConfig("semi-discrete transport needs a discrete limit".into()))?;
    if samples.len() > MAX_SUPPORT {
        return Err(Error::SizeTooLarge {
            size: samples.len(),
            limit: MAX_SUPPORT,
        });
    }
    if samples.is_empty() {
        return Err(Error::InvalidConfig("empty sample".into()));
    }
    let n = samples.len();
    let w = vec![T::one() / T::of_usize(n); n];
    let est = wasserstein_discrete((&samples.points, &w), (atoms, weights), p)?;
    let plan = est.plan.as_ref().expect("discrete solver returns a plan");
    let mut per = vec![T::zero(); n];
    for &(i, j, m) in &plan.entries {
        per[i] += m * T::of_usize(n) * dist_pow(&samples.points[i], &atoms[j], p);
    }
    let mean = per.iter().copied().sum::<T>() / T::of_usize(n);
    let se = if n > 1 {
        let var = per.iter().map(|&c| (c - mean) * (c - mean)).sum::<T>() / T::of_usize(n - 1);
        (var / T::of_usize(n)).sqrt()
    } else {
        T::zero()
    };
    Ok(TransportEstimate {
        standard_error: Some(root_se(mean, se, p)),
        method: TransportMethod::SemiDiscrete,
        ..est
    })
}

/// `(p!/(2^{p/2}(p/2)!))^{1/p}·√v`, the `W^p` distance from `N(0, v)` to
/// `δ₀` for even `p`.
pub fn gaussian_dirac_exact<T: Real>(variance: T, p: u32) -> Result<T> {
    check_order(p)?;
    if p % 2 == 1 {
        return Err(Error::OddOrderUnsupported(p));
    }
    if variance < T::zero() {
        return Err(Error::InvalidConfig("variance must be nonnegative".into()));
    }
    // p!/(2^{p/2}(p/2)!) = (p − 1)!!
    let double_factorial = (1..p).step_by(2).fold(T::one(), |acc, k| acc * T::lit(k as f64));
    Ok(double_factorial.powf(T::one() / T::lit(p as f64)) * variance.sqrt())
}

/// `E|Z|^p` for a standard normal `Z`, by quadrature.
pub fn gaussian_abs_moment<T: Real>(p: u32) -> Result<T> {
    let pt = T::lit(p as f64);
    let norm = T::one() / T::TAU().sqrt();
    let half = integrate(
        |z: T| z.powf(pt) * (-z * z / T::lit(2.0)).exp() * norm,
        T::zero(),
        T::lit(40.0),
        &[T::one(), T::lit(4.0), T::lit(10.0)],
    )?;
    Ok(T::lit(2.0) * half)
}

/// `W^p(N(0, v), δ₀)` for any order, through the quadrature moment.
pub fn gaussian_dirac_quadrature<T: Real>(variance: T, p: u32) -> Result<T> {
    check_order(p)?;
    Ok(gaussian_abs_moment::<T>(p)?.powf(T::one() / T::lit(p as f64)) * variance.sqrt())
}

/// How the limit points paired with samples outside every tube were drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    /// Every sample fell inside a tube.
    NotNeeded,
    /// From the residual law `(φ − ζ/Zₙ)/μₙ(off tubes)`.
    Exact,
    /// From the residual law with negative parts clipped (from-below fails).
    Clipped,
    /// The residual is below floating-point resolution everywhere; drawn from `φ`.
    LimitFallback,
}

#[derive(Clone, Debug)]
pub struct CouplingOutcome<T> {
    pub estimate: TransportEstimate<T>,
    pub off_tube: usize,
    pub residual: ResidualMode,
}

/// Relative size below which margins are indistinguishable from round-off.
/// Proposal budget per residual draw.
const RESIDUAL_TRIES: usize = 1_000_000;

/// Draws from `(φ − ζ/Zₙ)₊`, normalized: categorical weights for atoms,
/// rejection from `φ` with acceptance `margin/(φ·sup ratio)` on spheres.
struct ResidualSampler<'a, T> {
    family: &'a GibbsFamily<T>,
    n: u64,
    limit: &'a LimitMeasure<T>,
    split: TubeSplit,
    mode: ResidualMode,
    atom_weights: Vec<T>,
    sup_ratio: f64,
}

impl<'a, T: Real> ResidualSampler<'a, T> {
    fn new(family: &'a GibbsFamily<T>, n: u64, limit: &'a LimitMeasure<T>) -> Result<Self> {
        let split = tube_split(family, n)?;
        let mut s = Self {
            family,
            n,
            limit,
            split,
            mode: ResidualMode::Exact,
            atom_weights: Vec::new(),
            sup_ratio: 0.0,
        };
        match &limit.kind {
            LimitKind::Discrete { weights, .. } => {
                let mut r = Vec::with_capacity(weights.len());
                let mut resolved = false;
                let mut clipped = false;
                for (k, &w) in weights.iter().enumerate() {
                    let zeta = s.split.per_component[limit.kept[k]];
                    let (ratio, ok) = s.ratio(w.as_f64(), zeta);
                    resolved |= ok;
                    clipped |= ratio < -1e-8;
                    r.push(T::lit(ratio.max(0.0) * w.as_f64()));
                }
                let total: f64 = r.iter().map(|v| v.as_f64()).sum();
                if !resolved || !(total > 0.0) {
                    s.mode = ResidualMode::LimitFallback;
                    s.atom_weights = weights.clone();
                } else {
                    s.mode = if clipped { ResidualMode::Clipped } else { ResidualMode::Exact };
                    s.atom_weights = r;
                }
            }
            LimitKind::SphereUniformLike(sph) => {
                let mut resolved = false;
                let mut clipped = false;
                let mut sup = 0.0f64;
                for part in &sph.parts {
                    for x in &part.rule.nodes {
                        let u = part.sphere.project(x);
                        let (ratio, ok) = s.sphere_ratio(&u)?;
                        resolved |= ok;
                        clipped |= ratio < -1e-8;
                        sup = sup.max(ratio);
                    }
                }
                if !resolved || !(sup > 0.0) {
                    s.mode = ResidualMode::LimitFallback;
                } else {
                    s.mode = if clipped { ResidualMode::Clipped } else { ResidualMode::Exact };
                    // node maximum plus headroom for the ratio between nodes
                    s.sup_ratio = 1.25 * sup;
                }
            }
        }
        if s.mode == ResidualMode::LimitFallback {
            log::warn!(
                "residual law of {} at n = {n} is below floating-point resolution; pairing with limit draws",
                family.name()
            );
        } else if s.mode == ResidualMode::Clipped {
            log::warn!(
                "from-below condition fails for {} at n = {n}; residual law clipped at zero",
                family.name()
            );
        }
        Ok(s)
    }

    /// `margin/φ` and whether it is resolved above round-off.
    fn ratio(&self, phi: f64, zeta: f64) -> (f64, bool) {
        let (imbalance, log_tail) = self.split.margin(phi, zeta);
        let ratio = imbalance / phi + (log_tail - phi.ln()).exp();
        (ratio, ratio.abs() > IMBALANCE_RESOLUTION)
    }

    fn sphere_ratio(&self, u: &[T]) -> Result<(f64, bool)> {
        let (index, _) = self.family.minimal_set().nearest(u);
        let frame = TubularFrame::for_component(self.family, index)?;
        let phi = self.limit.density_at(u)?.as_f64();
        let zeta = zeta_n(&frame, self.family, self.n, u)?.as_f64();
        Ok(self.ratio(phi, zeta))
    }

    fn draw<R: Rng + ?Sized>(&self, base: &LimitSampler<'_, T>, rng: &mut R) -> Result<Vec<T>> {
        match (&self.limit.kind, self.mode) {
            (_, ResidualMode::LimitFallback) => Ok(base.draw(rng)),
            (LimitKind::Discrete { atoms, .. }, _) => {
                let total: T = self.atom_weights.iter().copied().sum();
                let target = T::lit(rng.random::<f64>()) * total;
                let mut acc = T::zero();
                for (k, &w) in self.atom_weights.iter().enumerate() {
                    acc += w;
                    if target < acc {
                        return Ok(atoms[k].clone());
                    }
                }
                let last = self.atom_weights.iter().rposition(|&w| w > T::zero()).unwrap_or(0);
                Ok(atoms[last].clone())
            }
            (LimitKind::SphereUniformLike(_), _) => {
                for _ in 0..RESIDUAL_TRIES {
                    let u = base.draw(rng);
                    let (ratio, _) = self.sphere_ratio(&u)?;
                    if rng.random::<f64>() * self.sup_ratio < ratio.max(0.0) {
                        return Ok(u);
                    }
                }
                Err(Error::AcceptanceTooLow {
                    rate: 1.0 / RESIDUAL_TRIES as f64,
                })
            }
        }
    }
}

/// Upper bound on `W^p(μₙ, μ)` from the explicit coupling: a sample `X` of
/// `μₙ` inside a tube is paired with its base point (nearest atom, or the
/// radial projection onto the sphere), and a sample outside every tube with
/// an independent draw from the residual law `(φ − ζ/Zₙ)/μₙ(off tubes)`, so
/// that the second marginal is exactly `μ` whenever `φ ≥ ζ/Zₙ`.
pub fn coupling_upper_bound<T: Real>(
    family: &GibbsFamily<T>,
    n: u64,
    limit: &LimitMeasure<T>,
    count: usize,
    seed: SeedSpec,
    p: u32,
) -> Result<TransportEstimate<T>> {
    Ok(coupling_with_diagnostics(family, n, limit, count, seed, p)?.estimate)
}

pub fn coupling_with_diagnostics<T: Real>(
    family: &GibbsFamily<T>,
    n: u64,
    limit: &LimitMeasure<T>,
    count: usize,
    seed: SeedSpec,
    p: u32,
) -> Result<CouplingOutcome<T>> {
    check_order(p)?;
    if !family.minimal_set().equal_dimension() {
        return Err(Error::MixedDimensions);
    }
    let xs = sample_gibbs(family, n, count, seed)?;
    let base = LimitSampler::new(limit)?;
    let mut residual: Option<ResidualSampler<'_, T>> = None;
    let mut rng = seed.with_stream(seed.stream_id ^ (1 << 63)).rng();
    let mut costs = Vec::with_capacity(count);
    let mut off_tube = 0usize;
    for x in &xs.points {
        let y = match family.tube_index(x) {
            Some(k) => family.components()[k].project(x),
            None => {
                off_tube += 1;
                if residual.is_none() {
                    residual = Some(ResidualSampler::new(family, n, limit)?);
                }
                residual.as_ref().expect("just built").draw(&base, &mut rng)?
            }
        };
        costs.push(dist_pow(x, &y, p));
    }
    let m = T::of_usize(costs.len());
    let mean = costs.iter().copied().sum::<T>() / m;
    let var = costs.iter().map(|&c| (c - mean) * (c - mean)).sum::<T>() / (m - T::one()).max(T::one());
    let se = (var / m).sqrt();
    Ok(CouplingOutcome {
        estimate: TransportEstimate {
            p,
            value: root(mean, p),
            method: TransportMethod::CouplingUpperBound,
            standard_error: Some(root_se(mean, se, p)),
            plan: None,
        },
        off_tube,
        residual: residual.map_or(ResidualMode::NotNeeded, |r| r.mode),
    })
}

/// Closed form for `μₙ = N(0, v)` against `δ₀`, wrapped as an estimate.
pub fn gaussian_dirac_estimate<T: Real>(variance: T, p: u32) -> Result<TransportEstimate<T>> {
    let value = if p.is_multiple_of(2) {
        gaussian_dirac_exact(variance, p)?
    } else {
        gaussian_dirac_quadrature(variance, p)?
    };
    Ok(TransportEstimate::plain(p, value, TransportMethod::ClosedForm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::build_limit_measure;
    use crate::problem::builtin;
    use crate::sampling::{sample_limit, SampleMeta};

    fn batch(points: Vec<Vec<f64>>) -> SampleBatch<f64> {
        let d = points[0].len();
        SampleBatch {
            meta: SampleMeta {
                n: None,
                sampler: "test".into(),
                acceptance_rate: None,
                seed: SeedSpec::new(0, 0),
                count: points.len(),
                dimension: d,
            },
            points,
        }
    }

    #[test]
    fn one_dimensional_examples() {
        let xs = [0.0, 0.0];
        let ys = [1.0, 1.0];
        assert_eq!(wasserstein_1d(&xs, &ys, 2).unwrap().value, 1.0);
        assert_eq!(wasserstein_1d(&xs, &xs, 3).unwrap().value, 0.0);
        assert!(matches!(wasserstein_1d(&xs, &[1.0], 2), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn discrete_examples() {
        let a = vec![vec![0.0f64]];
        let b = vec![vec![-1.0f64], vec![1.0]];
        let est = wasserstein_discrete((&a, &[1.0]), (&b, &[0.5, 0.5]), 2).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        assert!(est.plan.unwrap().is_feasible());
        let same = wasserstein_discrete((&b, &[0.3, 0.7]), (&b, &[0.3, 0.7]), 1).unwrap();
        assert!(same.value.abs() < 1e-12);
        let plan = same.plan.unwrap();
        assert!(plan.entries.iter().all(|&(i, j, _)| i == j));
    }

    #[test]
    fn semi_discrete_example() {
        let s = batch(vec![vec![-1.1], vec![-0.9], vec![0.9], vec![1.1]]);
        let limit = LimitMeasure::discrete(vec![vec![-1.0], vec![1.0]], vec![0.5, 0.5]).unwrap();
        let est = semi_discrete_to_atoms(&s, &limit, 1).unwrap();
        assert!((est.value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn gaussian_closed_forms() {
        assert!((gaussian_dirac_exact(0.01f64, 2).unwrap() - 0.1).abs() < 1e-15);
        assert!((gaussian_dirac_exact(0.01f64, 4).unwrap() - 3f64.powf(0.25) * 0.1).abs() < 1e-15);
        assert_eq!(gaussian_dirac_exact(0.0f64, 2).unwrap(), 0.0);
        assert!(matches!(gaussian_dirac_exact(1.0f64, 3), Err(Error::OddOrderUnsupported(3))));
        // E|Z| = √(2/π), E|Z|³ = 2√(2/π)
        let c = (2.0 / std::f64::consts::PI).sqrt();
        assert!((gaussian_abs_moment::<f64>(1).unwrap() - c).abs() < 1e-12);
        assert!((gaussian_abs_moment::<f64>(3).unwrap() - 2.0 * c).abs() < 1e-12);
        assert!((gaussian_abs_moment::<f64>(4).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_for_a_single_well() {
        let fam = builtin::normal1d::<f64>();
        let limit = build_limit_measure(&fam).unwrap();
        let est = coupling_upper_bound(&fam, 100, &limit, 10_000, SeedSpec::new(1, 0), 2).unwrap();
        assert!((est.value - 0.1).abs() < 0.005, "{}", est.value);
    }

    #[test]
    fn coupling_residual_for_double_well_at_small_n() {
        // at n = 10 about 16% of the mass lies outside the tubes
        let fam = builtin::double_well_asym::<f64>();
        let limit = build_limit_measure(&fam).unwrap();
        let out = coupling_with_diagnostics(&fam, 10, &limit, 2000, SeedSpec::new(4, 0), 1).unwrap();
        assert!(out.off_tube > 0);
        assert_eq!(out.residual, ResidualMode::Exact);
    }

    #[test]
    fn empirical_routes_one_dimension() {
        let a = batch(vec![vec![0.3], vec![-1.0], vec![2.0]]);
        let b = batch(vec![vec![1.0], vec![0.0], vec![0.5]]);
        let e = empirical_wp(&a, &b, 2).unwrap();
        let xs = a.sorted_coordinate(0);
        let ys = b.sorted_coordinate(0);
        assert_eq!(e.value, wasserstein_1d(&xs, &ys, 2).unwrap().value);
    }

    #[test]
    fn circle_samples_against_each_other() {
        let mu = build_limit_measure(&builtin::volcano::<f64>(2).unwrap()).unwrap();
        let a = sample_limit(&mu, 200, SeedSpec::new(1, 0)).unwrap();
        let e = empirical_wp(&a, &a, 2).unwrap();
        assert!(e.value.abs() < 1e-12);
        assert!(e.plan.unwrap().is_feasible());
    }
}
