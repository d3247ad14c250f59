//! Numerical integration: adaptive Gauss–Legendre on intervals, iterated
//! integration over balls, shells and boxes in up to three dimensions, and
//! fixed rules on circles and 2-spheres.
//!
//! Refinement is deterministic: the panel with the largest error estimate is
//! always split first (lowest index on ties), so identical inputs give
//! bit-identical results regardless of caller threading.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (
        nodes.into_iter().map(T::lit).collect(),
        weights.into_iter().map(T::lit).collect(),
    )
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let pn = if n == 0 { 1.0 } else { p1 };
    let dpn = n as f64 * (x * pn - p0) / (x * x - 1.0);
    (pn, dpn)
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_panels: usize,
    pub order: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-14),
            rel_tol: T::lit(1e-12),
            max_panels: 4000,
            order: 20,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol: T::lit(abs_tol),
            rel_tol: T::lit(rel_tol),
            ..Self::default()
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub panels: usize,
    pub evaluations: usize,
}

/// Reusable Gauss–Legendre rule with the adaptive driver attached.
#[derive(Clone, Debug)]
pub struct Integrator<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    opts: QuadOptions<T>,
}

#[derive(Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    /// Composite (two-half) estimate.
    value: T,
    /// Per-half estimates, reused when this panel is split.
    left: T,
    right: T,
    abs_mass: T,
    error: T,
}

impl<T: Real> Integrator<T> {
    pub fn new(opts: QuadOptions<T>) -> Self {
        let (nodes, weights) = gauss_legendre(opts.order);
        Self { nodes, weights, opts }
    }

    pub fn options(&self) -> &QuadOptions<T> {
        &self.opts
    }

    /// Fixed rule on `[a, b]`; returns the estimate and `∫|f|`.
    fn rule<F: FnMut(T) -> T>(&self, f: &mut F, a: T, b: T) -> (T, T) {
        let half = T::lit(0.5) * (b - a);
        let mid = T::lit(0.5) * (a + b);
        let mut s = T::zero();
        let mut sa = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            s += w * v;
            sa += w * v.abs();
        }
        (s * half, sa * half)
    }

    fn panel<F: FnMut(T) -> T>(&self, f: &mut F, a: T, b: T, whole: T) -> Panel<T> {
        let mid = T::lit(0.5) * (a + b);
        let (left, la) = self.rule(f, a, mid);
        let (right, ra) = self.rule(f, mid, b);
        let value = left + right;
        Panel {
            a,
            b,
            value,
            left,
            right,
            abs_mass: la + ra,
            error: (value - whole).abs(),
        }
    }

    /// Integrates `f` over `[a, b]` with optional interior breakpoints.
    pub fn integrate<F: FnMut(T) -> T>(
        &self,
        mut f: F,
        a: T,
        b: T,
        breakpoints: &[T],
    ) -> Result<QuadResult<T>> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::QuadratureFailure("non-finite interval".into()));
        }
        if a == b {
            return Ok(QuadResult {
                value: T::zero(),
                error: T::zero(),
                panels: 0,
                evaluations: 0,
            });
        }
        let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
        let mut cuts = vec![lo];
        let mut inner: Vec<T> = breakpoints
            .iter()
            .copied()
            .filter(|&c| c > lo && c < hi)
            .collect();
        inner.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
        inner.dedup();
        cuts.extend(inner);
        cuts.push(hi);

        let per_rule = self.nodes.len();
        let mut evaluations = 0usize;
        let mut panels: Vec<Panel<T>> = Vec::with_capacity(64);
        for w in cuts.windows(2) {
            let (whole, _) = self.rule(&mut f, w[0], w[1]);
            panels.push(self.panel(&mut f, w[0], w[1], whole));
            evaluations += 3 * per_rule;
        }
        let roundoff = T::lit(64.0) * T::epsilon();
        loop {
            let total: T = panels.iter().map(|p| p.value).sum();
            let abs_total: T = panels.iter().map(|p| p.abs_mass).sum();
            let tol = self.opts.abs_tol.max(self.opts.rel_tol * total.abs());
            let floor = roundoff * abs_total;
            let mut err = T::zero();
            let mut worst: Option<usize> = None;
            let mut worst_err = T::zero();
            for (i, p) in panels.iter().enumerate() {
                err += p.error;
                let resolvable = p.error > roundoff * p.abs_mass && p.b - p.a > (p.a.abs() + p.b.abs()) * roundoff;
                if resolvable && p.error > worst_err {
                    worst_err = p.error;
                    worst = Some(i);
                }
            }
            if !err.is_finite() || !total.is_finite() {
                return Err(Error::QuadratureFailure("non-finite integrand".into()));
            }
            if err <= tol.max(floor) || worst.is_none() {
                return Ok(QuadResult {
                    value: sign * total,
                    error: err,
                    panels: panels.len(),
                    evaluations,
                });
            }
            if panels.len() >= self.opts.max_panels {
                return Err(Error::QuadratureFailure(format!(
                    "error estimate {:e} above tolerance {:e} after {} panels",
                    err.as_f64(),
                    tol.as_f64(),
                    panels.len()
                )));
            }
            let i = worst.expect("checked above");
            let p = panels[i];
            let mid = T::lit(0.5) * (p.a + p.b);
            let left = self.panel(&mut f, p.a, mid, p.left);
            let right = self.panel(&mut f, mid, p.b, p.right);
            evaluations += 4 * per_rule;
            panels[i] = left;
            panels.insert(i + 1, right);
        }
    }
}

/// One-shot adaptive integration with default tolerances.
pub fn integrate<T: Real, F: FnMut(T) -> T>(f: F, a: T, b: T, breakpoints: &[T]) -> Result<T> {
    Integrator::new(QuadOptions::default())
        .integrate(f, a, b, breakpoints)
        .map(|r| r.value)
}

/// Spherical shell `r_in ≤ ‖x − c‖ ≤ r_out`; a ball when `r_in = 0` and a
/// point when both radii vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct Shell<T> {
    pub center: Vec<T>,
    pub r_in: T,
    pub r_out: T,
}

impl<T: Real> Shell<T> {
    pub fn ball(center: Vec<T>, radius: T) -> Self {
        Self {
            center,
            r_in: T::zero(),
            r_out: radius,
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        let r = crate::scalar::dist(x, &self.center);
        r >= self.r_in && r <= self.r_out
    }
}

/// Integration region for iterated quadrature: an axis-aligned box, optionally
/// intersected with one shell and with a list of shells removed.
///
/// `hints` mark manifolds where the integrand concentrates (points and
/// spheres, encoded as shells with `r_in = r_out`); every fiber is cut at the
/// hint crossings and at `± peak_width` around them.
#[derive(Clone, Debug)]
pub struct Region<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub include: Option<Shell<T>>,
    pub exclude: Vec<Shell<T>>,
    pub hints: Vec<Shell<T>>,
    pub peak_width: Option<T>,
}

impl<T: Real> Region<T> {
    pub fn boxed(lo: Vec<T>, hi: Vec<T>) -> Self {
        Self {
            lo,
            hi,
            include: None,
            exclude: Vec::new(),
            hints: Vec::new(),
            peak_width: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn with_hints(mut self, hints: Vec<Shell<T>>, peak_width: Option<T>) -> Self {
        self.hints = hints;
        self.peak_width = peak_width;
        self
    }

    /// Intervals of `x_k` (k = `prefix.len()`) over which the remaining fiber is
    /// non-empty, plus interior breakpoints.
    fn fiber(&self, prefix: &[T]) -> (Vec<(T, T)>, Vec<T>) {
        let k = prefix.len();
        let innermost = k + 1 == self.dim();
        let rho2 = |c: &[T]| -> T {
            prefix
                .iter()
                .zip(c)
                .map(|(&x, &ci)| (x - ci) * (x - ci))
                .sum::<T>()
        };
        let half_chord = |r: T, r2: T| -> Option<T> {
            let s = r * r - r2;
            if s > T::zero() {
                Some(s.sqrt())
            } else {
                None
            }
        };
        let mut intervals = vec![(self.lo[k], self.hi[k])];
        let mut breaks = Vec::new();

        if let Some(shell) = &self.include {
            let r2 = rho2(&shell.center);
            let ck = shell.center[k];
            match half_chord(shell.r_out, r2) {
                None => return (Vec::new(), Vec::new()),
                Some(h) => intervals = intersect(&intervals, ck - h, ck + h),
            }
            if let Some(h) = half_chord(shell.r_in, r2) {
                if innermost {
                    intervals = subtract(&intervals, ck - h, ck + h);
                } else {
                    breaks.push(ck - h);
                    breaks.push(ck + h);
                }
            }
        }
        for shell in &self.exclude {
            let r2 = rho2(&shell.center);
            let ck = shell.center[k];
            let outer = half_chord(shell.r_out, r2);
            let inner = half_chord(shell.r_in, r2);
            if innermost {
                if let Some(ho) = outer {
                    match inner {
                        Some(hi) => {
                            intervals = subtract(&intervals, ck - ho, ck - hi);
                            intervals = subtract(&intervals, ck + hi, ck + ho);
                        }
                        None => intervals = subtract(&intervals, ck - ho, ck + ho),
                    }
                }
            } else {
                for h in [outer, inner].into_iter().flatten() {
                    breaks.push(ck - h);
                    breaks.push(ck + h);
                }
            }
        }
        for hint in &self.hints {
            let r2 = rho2(&hint.center);
            let ck = hint.center[k];
            let mut marks = Vec::new();
            if hint.r_out > T::zero() {
                if let Some(h) = half_chord(hint.r_out, r2) {
                    marks.push(ck - h);
                    marks.push(ck + h);
                }
                if !innermost {
                    marks.push(ck);
                }
            } else {
                marks.push(ck);
            }
            for m in marks {
                breaks.push(m);
                if let Some(w) = self.peak_width {
                    breaks.push(m - w);
                    breaks.push(m + w);
                }
            }
        }
        (intervals, breaks)
    }

    /// Iterated adaptive integration of `f` over the region (dimension ≤ 3).
    pub fn integrate<F: Fn(&[T]) -> T>(&self, f: F, opts: QuadOptions<T>) -> Result<QuadResult<T>> {
        if self.dim() == 0 || self.dim() > 3 {
            return Err(Error::Unsupported(format!(
                "iterated quadrature in dimension {}",
                self.dim()
            )));
        }
        let integ = Integrator::new(opts);
        let mut prefix = Vec::with_capacity(self.dim());
        let mut failure: Option<Error> = None;
        let mut error = T::zero();
        let mut evaluations = 0usize;
        let value = self.level(&integ, &f, &mut prefix, &mut failure, &mut error, &mut evaluations);
        match failure {
            Some(e) => Err(e),
            None => Ok(QuadResult {
                value,
                error,
                panels: 0,
                evaluations,
            }),
        }
    }

    fn level<F: Fn(&[T]) -> T>(
        &self,
        integ: &Integrator<T>,
        f: &F,
        prefix: &mut Vec<T>,
        failure: &mut Option<Error>,
        error: &mut T,
        evaluations: &mut usize,
    ) -> T {
        let (intervals, breaks) = self.fiber(prefix);
        let mut total = T::zero();
        for (a, b) in intervals {
            if failure.is_some() || b <= a {
                continue;
            }
            let k = prefix.len();
            let innermost = k + 1 == self.dim();
            let res = integ.integrate(
                |x| {
                    if failure.is_some() {
                        return T::zero();
                    }
                    prefix.push(x);
                    let v = if innermost {
                        *evaluations += 1;
                        f(prefix)
                    } else {
                        // Inner levels report failure through `failure`.
                        let mut inner_fail = None;
                        let mut inner_err = T::zero();
                        let v = self.level(integ, f, prefix, &mut inner_fail, &mut inner_err, evaluations);
                        if inner_fail.is_some() {
                            *failure = inner_fail;
                        }
                        v
                    };
                    prefix.pop();
                    v
                },
                a,
                b,
                &breaks,
            );
            match res {
                Ok(r) => {
                    total += r.value;
                    if k == 0 {
                        *error += r.error;
                    }
                }
                Err(e) => {
                    *failure = Some(e);
                }
            }
        }
        total
    }
}

fn intersect<T: Real>(intervals: &[(T, T)], lo: T, hi: T) -> Vec<(T, T)> {
    intervals
        .iter()
        .filter_map(|&(a, b)| {
            let (a2, b2) = (a.max(lo), b.min(hi));
            (b2 > a2).then_some((a2, b2))
        })
        .collect()
}

fn subtract<T: Real>(intervals: &[(T, T)], lo: T, hi: T) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(intervals.len() + 1);
    for &(a, b) in intervals {
        if hi <= a || lo >= b {
            out.push((a, b));
            continue;
        }
        if lo > a {
            out.push((a, lo));
        }
        if hi < b {
            out.push((hi, b));
        }
    }
    out
}

/// Fixed quadrature on a circle (`d = 2`) or a 2-sphere (`d = 3`) of given
/// centre and radius. Weights sum to the surface measure.
#[derive(Clone, Debug)]
pub struct SphereRule<T> {
    pub nodes: Vec<Vec<T>>,
    pub weights: Vec<T>,
}

/// Angular nodes of the circle rule.
pub const CIRCLE_NODES: usize = 512;
/// Polar (Gauss–Legendre in cos θ) and azimuthal counts of the 2-sphere rule.
pub const SPHERE_POLAR: usize = 20;
pub const SPHERE_AZIMUTHAL: usize = 40;

impl<T: Real> SphereRule<T> {
    pub fn new(center: &[T], radius: T) -> Result<Self> {
        match center.len() {
            2 => Ok(Self::circle(center, radius, CIRCLE_NODES)),
            3 => Ok(Self::sphere(center, radius, SPHERE_POLAR, SPHERE_AZIMUTHAL)),
            d => Err(Error::Unsupported(format!(
                "sphere quadrature in ambient dimension {d}"
            ))),
        }
    }

    /// Trapezoid rule in the angle.
    pub fn circle(center: &[T], radius: T, count: usize) -> Self {
        let w = T::TAU() * radius / T::of_usize(count);
        let nodes = (0..count)
            .map(|i| {
                let th = T::TAU() * T::of_usize(i) / T::of_usize(count);
                vec![center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            })
            .collect();
        Self {
            nodes,
            weights: vec![w; count],
        }
    }

    /// Gauss–Legendre in `cos θ` times the trapezoid rule in `φ`; exact for
    /// spherical polynomials of degree below `min(2·polar, azimuthal)`.
    pub fn sphere(center: &[T], radius: T, polar: usize, azimuthal: usize) -> Self {
        let (z, wz) = gauss_legendre::<T>(polar);
        let dphi = T::TAU() / T::of_usize(azimuthal);
        let r2 = radius * radius;
        let mut nodes = Vec::with_capacity(polar * azimuthal);
        let mut weights = Vec::with_capacity(polar * azimuthal);
        for (&zi, &wi) in z.iter().zip(&wz) {
            let s = (T::one() - zi * zi).max(T::zero()).sqrt();
            for j in 0..azimuthal {
                let ph = dphi * (T::of_usize(j) + T::lit(0.5));
                nodes.push(vec![
                    center[0] + radius * s * ph.cos(),
                    center[1] + radius * s * ph.sin(),
                    center[2] + radius * zi,
                ]);
                weights.push(wi * dphi * r2);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(&[T]) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| w * f(x))
            .sum()
    }

    pub fn total_measure(&self) -> T {
        self.weights.iter().copied().sum()
    }
}

/// Surface measure of the sphere of radius `r` in `R^d` (`d ≥ 1`).
pub fn sphere_area<T: Real>(d: usize, r: T) -> T {
    // |S^{d-1}| = 2 π^{d/2} / Γ(d/2) r^{d-1}
    let half = d as f64 / 2.0;
    let area = 2.0 * std::f64::consts::PI.powf(half) / libm::tgamma(half);
    T::lit(area) * r.powi(d as i32 - 1)
}
