//! Drift specifications, invariant densities and path simulation.
//!
//! A drift is a baseline (linear or tabulated) plus a constant offset and a
//! list of localized kernel bumps. Membership in the ergodicity class
//! `Sigma(C, A, gamma, sigma)` is enforced on a validation grid at
//! construction time: the linear-growth bound `|b(x)| <= C (1 + |x|)` on
//! `[-3A, 3A]` and the inward-drift condition `b(x) sign(x) / sigma^2 <=
//! -gamma` on `A <= |x| <= 3A`. Those conditions certify the analytic density
//! bounds `L_*` and `L^*` and the tail bound used to truncate the
//! normalizing-constant integral.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelId;
use crate::rng;

/// Relative tolerance for the dyadically refined Simpson rule.
const QUAD_REL_TOL: f64 = 1e-10;
/// Target relative contribution of the analytic density tail beyond the
/// truncation radius.
const TAIL_REL: f64 = 1e-12;
/// Validation grid step, as a fraction of `A`.
const VALIDATION_STEP_FRACTION: f64 = 1.0 / 200.0;

/// Ergodicity class parameters `(C, A, gamma, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub growth: f64,
    pub radius: f64,
    pub decay: f64,
    pub sigma: f64,
}

impl ClassParams {
    pub fn new(growth: f64, radius: f64, decay: f64, sigma: f64) -> Result<Self> {
        if !(growth >= 1.0) {
            return Err(Error::InvalidConfig(format!("C must be >= 1, got {growth}")));
        }
        if !(radius > 0.0 && decay > 0.0 && sigma > 0.0) {
            return Err(Error::InvalidConfig(
                "A, gamma and sigma must be positive".into(),
            ));
        }
        Ok(ClassParams { growth, radius, decay, sigma })
    }

    /// `c_1(C, A, sigma) = 2 C sigma^-2 (1 + A) A`, the exponent bound on
    /// `[-A, A]`.
    fn c1(&self) -> f64 {
        2.0 * self.growth * (1.0 + self.radius) * self.radius / (self.sigma * self.sigma)
    }

    /// Truncation radius beyond which the analytic tail bound of the
    /// unnormalized density contributes less than `TAIL_REL` relative to the
    /// certified lower bound of the normalizing constant.
    pub fn truncation_radius(&self) -> f64 {
        let c1 = self.c1();
        let a = self.radius;
        let g = self.decay;
        a + (2.0 * c1 + (1.0 / (2.0 * a * g)).ln() + (1.0 / TAIL_REL).ln()).max(0.0) / (2.0 * g)
    }

    /// Analytic bound for both density tails beyond `r >= A`.
    fn tail_bound(&self, r: f64) -> f64 {
        (self.c1() - 2.0 * self.decay * (r - self.radius)).exp() / self.decay
    }
}

/// Certified uniform bounds on the invariant density over the class:
/// `L_* <= q_b(x) <= L^*` for `x` in `[-A, A]` and every class member.
pub fn class_bounds(params: &ClassParams) -> (f64, f64) {
    let ClassParams { growth: c, radius: a, decay: g, sigma } = *params;
    let s2 = sigma * sigma;
    let c1 = 2.0 * c * (1.0 + a) * a / s2;
    let lower = (-c1).exp() / (2.0 * a * c1 + c1.exp() / g);

    let head = 2.0 / s2 * (1.0 + 1.0 / c);
    let l1 = c / 2.0 * head.exp() * c1.exp();
    let spike = if 2.0 * a * g <= 1.0 {
        (c1 + 2.0 * a * g - 1.0).exp() / (2.0 * g)
    } else {
        a * c1.exp()
    };
    let l2 = c * c / s2 * head.exp() * (c1.exp() + spike);
    (lower, l1.max(l2))
}

/// Drift baseline: a linear slope or a tabulated function.
///
/// Tabulated baselines are interpolated linearly inside their grid and held
/// constant beyond it, so the table must reach past `3A` for validation and
/// past the inward-drift region for density integration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Baseline {
    Linear { slope: f64 },
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

impl Baseline {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Baseline::Linear { slope } => slope * x,
            Baseline::Tabulated { grid, values } => {
                let n = grid.len();
                if x <= grid[0] {
                    return values[0];
                }
                if x >= grid[n - 1] {
                    return values[n - 1];
                }
                let i = match grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
                    Ok(i) => return values[i],
                    Err(i) => i - 1,
                };
                let w = (x - grid[i]) / (grid[i + 1] - grid[i]);
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }
}

/// A localized kernel bump `a K((x - y) / h)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub bandwidth: f64,
    pub kernel: KernelId,
}

/// A validated drift function.
#[derive(Debug, Serialize, Deserialize)]
pub struct DriftSpec {
    baseline: Baseline,
    offset: f64,
    bumps: Vec<Bump>,
    class: ClassParams,
    #[serde(skip)]
    norm_cache: OnceLock<f64>,
}

impl Clone for DriftSpec {
    fn clone(&self) -> Self {
        let norm_cache = OnceLock::new();
        if let Some(v) = self.norm_cache.get() {
            let _ = norm_cache.set(*v);
        }
        DriftSpec {
            baseline: self.baseline.clone(),
            offset: self.offset,
            bumps: self.bumps.clone(),
            class: self.class,
            norm_cache,
        }
    }
}

impl DriftSpec {
    /// Builds and validates a drift.
    pub fn new(
        baseline: Baseline,
        offset: f64,
        bumps: Vec<Bump>,
        class: ClassParams,
    ) -> Result<Self> {
        let spec = DriftSpec { baseline, offset, bumps, class, norm_cache: OnceLock::new() };
        spec.validate()?;
        Ok(spec)
    }

    /// Linear drift `b(x) = slope x` with the given class parameters.
    pub fn linear(slope: f64, class: ClassParams) -> Result<Self> {
        DriftSpec::new(Baseline::Linear { slope }, 0.0, Vec::new(), class)
    }

    /// The standard Ornstein-Uhlenbeck reference `b(x) = -x` in
    /// `Sigma(1, 1, 1, 1)`.
    pub fn standard_ou() -> Self {
        DriftSpec::linear(-1.0, ClassParams::new(1.0, 1.0, 1.0, 1.0).unwrap())
            .expect("-x is in Sigma(1,1,1,1)")
    }

    /// Shifts the drift by a constant. The class parameters are adjusted:
    /// the growth constant widens by `|delta|` and the decay rate shrinks by
    /// `|delta| / sigma^2`, which keeps `b + delta` inside a valid class.
    pub fn with_offset(&self, delta: f64) -> Result<Self> {
        let decay = self.class.decay - delta.abs() / (self.class.sigma * self.class.sigma);
        if decay <= 0.0 {
            return Err(Error::InvalidDrift(format!(
                "offset {delta} exhausts the decay margin gamma={}",
                self.class.decay
            )));
        }
        DriftSpec::new(
            self.baseline.clone(),
            self.offset + delta,
            self.bumps.clone(),
            ClassParams { growth: self.class.growth + delta.abs(), decay, ..self.class },
        )
    }

    /// Adds a bump; the enlarged drift is revalidated.
    pub fn with_bump(&self, bump: Bump, class: ClassParams) -> Result<Self> {
        let mut bumps = self.bumps.clone();
        bumps.push(bump);
        DriftSpec::new(self.baseline.clone(), self.offset, bumps, class)
    }

    /// The built-in three-bump study drift:
    /// `-x - 0.8 K((x+0.6)/0.15) + 0.15 K(x/0.2) + 0.5 K((x-0.5)/0.1)`
    /// with the quartic kernel.
    pub fn alternative_example() -> Self {
        let class = ClassParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let k = KernelId::QuarticSmooth;
        DriftSpec::new(
            Baseline::Linear { slope: -1.0 },
            0.0,
            vec![
                Bump { amplitude: -0.8, center: -0.6, bandwidth: 0.15, kernel: k },
                Bump { amplitude: 0.15, center: 0.0, bandwidth: 0.2, kernel: k },
                Bump { amplitude: 0.5, center: 0.5, bandwidth: 0.1, kernel: k },
            ],
            class,
        )
        .expect("the study drift is in Sigma(1,1,1,1)")
    }

    pub fn class(&self) -> &ClassParams {
        &self.class
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    /// True when the drift is a pure linear baseline plus offset. Such drifts
    /// admit the moment-based fast path of the multiscale statistics.
    pub fn as_affine(&self) -> Option<(f64, f64)> {
        match (&self.baseline, self.bumps.is_empty()) {
            (Baseline::Linear { slope }, true) => Some((*slope, self.offset)),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.baseline.eval(x) + self.offset;
        for b in &self.bumps {
            if (x - b.center).abs() < b.bandwidth {
                v += b.amplitude * b.kernel.rescaled(b.center, b.bandwidth, x);
            }
        }
        v
    }

    fn validate(&self) -> Result<()> {
        let ClassParams { growth: c, radius: a, decay: g, sigma } = self.class;
        for (i, b) in self.bumps.iter().enumerate() {
            if b.bandwidth <= 0.0 {
                return Err(Error::InvalidDrift(format!("bump {i} has bandwidth <= 0")));
            }
            if b.center - b.bandwidth < -a - 1e-12 || b.center + b.bandwidth > a + 1e-12 {
                return Err(Error::InvalidDrift(format!(
                    "bump {i} support [{}, {}] exits [-A, A] = [{}, {}]",
                    b.center - b.bandwidth,
                    b.center + b.bandwidth,
                    -a,
                    a
                )));
            }
        }
        if let Baseline::Tabulated { grid, values } = &self.baseline {
            if grid.len() < 2 || grid.len() != values.len() {
                return Err(Error::InvalidDrift("tabulated baseline needs matching grids".into()));
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidDrift("tabulated grid must be increasing".into()));
            }
        }
        let step = a * VALIDATION_STEP_FRACTION;
        let n = (6.0 * a / step).round() as usize;
        let s2 = sigma * sigma;
        for i in 0..=n {
            let x = -3.0 * a + i as f64 * step;
            let bx = self.eval(x);
            if !bx.is_finite() {
                return Err(Error::InvalidDrift(format!("b({x}) is not finite")));
            }
            if bx.abs() > c * (1.0 + x.abs()) + 1e-9 {
                return Err(Error::InvalidDrift(format!(
                    "growth violated at x={x}: |b|={} > C(1+|x|)={}",
                    bx.abs(),
                    c * (1.0 + x.abs())
                )));
            }
            if x.abs() >= a - 1e-12 && bx * x.signum() / s2 > -g + 1e-9 {
                return Err(Error::InvalidDrift(format!(
                    "inward-drift condition violated at x={x}: b sign(x)/sigma^2 = {}",
                    bx * x.signum() / s2
                )));
            }
        }
        Ok(())
    }

    /// Points where the drift loses smoothness: bump support and plateau
    /// edges. Quadrature segments split here so each piece refines fast.
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = vec![lo, hi];
        for b in &self.bumps {
            let mut edges = vec![b.center - b.bandwidth, b.center + b.bandwidth];
            if let KernelId::TruncatedRecovery { horizon, .. } = b.kernel {
                let cut = b.bandwidth / horizon;
                edges.push(b.center - cut);
                edges.push(b.center + cut);
            }
            for e in edges {
                if e > lo && e < hi {
                    pts.push(e);
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        pts
    }

    /// Closed-form exponent, available when the baseline is linear: the bump
    /// primitives are exact, so no quadrature is involved at all.
    fn exponent_closed(&self, x: f64) -> Option<f64> {
        let slope = match &self.baseline {
            Baseline::Linear { slope } => *slope,
            Baseline::Tabulated { .. } => return None,
        };
        let s2 = self.class.sigma * self.class.sigma;
        let mut phi = 2.0 / s2 * (0.5 * slope * x * x + self.offset * x);
        for b in &self.bumps {
            let from = b.kernel.primitive((0.0 - b.center) / b.bandwidth);
            let to = b.kernel.primitive((x - b.center) / b.bandwidth);
            phi += 2.0 * b.amplitude * b.bandwidth / s2 * (to - from);
        }
        Some(phi)
    }

    /// Exponent `Phi(x) = int_0^x 2 b(u) / sigma^2 du`: closed form for
    /// linear baselines, refined Simpson split at breakpoints otherwise.
    fn exponent(&self, x: f64) -> f64 {
        if let Some(phi) = self.exponent_closed(x) {
            return phi;
        }
        let s2 = self.class.sigma * self.class.sigma;
        let f = |u: f64| 2.0 * self.eval(u) / s2;
        let (lo, hi) = if x >= 0.0 { (0.0, x) } else { (x, 0.0) };
        let sign = if x >= 0.0 { 1.0 } else { -1.0 };
        let mut total = 0.0;
        let pts = self.breakpoints(lo, hi);
        for w in pts.windows(2) {
            total += simpson_refined(f, w[0], w[1]);
        }
        sign * total
    }

    /// Normalizing constant `C_{b, sigma} = int exp(Phi)` over the real line,
    /// truncated at the analytic tail radius; cached after the first call.
    pub fn normalizing_constant(&self) -> f64 {
        *self.norm_cache.get_or_init(|| {
            let r = self.class.truncation_radius();
            if self.exponent_closed(0.0).is_some() {
                let pts = self.breakpoints(-r, r);
                let mut integral = 0.0;
                for w in pts.windows(2) {
                    integral += simpson_refined(
                        |x| self.exponent_closed(x).unwrap().exp(),
                        w[0],
                        w[1],
                    );
                }
                return integral + self.class.tail_bound(r);
            }
            let s2 = self.class.sigma * self.class.sigma;
            let f = |u: f64| 2.0 * self.eval(u) / s2;
            let pts = self.breakpoints(-r, r);
            // Phi at the segment boundaries, anchored at zero.
            let anchor = pts.partition_point(|p| *p < 0.0);
            let mut phi = vec![0.0; pts.len()];
            for i in anchor..pts.len() - 1 {
                phi[i + 1] = phi[i] + simpson_refined(f, pts[i], pts[i + 1]);
            }
            for i in (0..anchor).rev() {
                phi[i] = phi[i + 1] - simpson_refined(f, pts[i], pts[i + 1]);
            }
            // phi[anchor] corresponds to pts[anchor] which is >= 0; correct
            // for the offset when zero is interior to a segment
            let offset = if anchor < pts.len() && pts[anchor] > 0.0 {
                simpson_refined(f, 0.0, pts[anchor])
            } else {
                0.0
            };
            let mut integral = 0.0;
            for (i, w) in pts.windows(2).enumerate() {
                let base = phi[i] + offset;
                integral += (base).exp() * exp_profile_refined(&f, w[0], w[1]);
            }
            integral + self.class.tail_bound(r)
        })
    }

    /// Invariant density `q_b(x) = exp(Phi(x)) / C_{b, sigma}`.
    pub fn invariant_density(&self, x: f64) -> f64 {
        (self.exponent(x)).exp() / self.normalizing_constant()
    }
}

/// Composite Simpson over `[a, b]` (either orientation) with dyadic
/// refinement until the relative change drops below `QUAD_REL_TOL`.
fn simpson_refined(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut n = 32usize;
    let mut prev = simpson_fixed(&f, a, b, n);
    loop {
        n *= 2;
        let cur = simpson_fixed(&f, a, b, n);
        if (cur - prev).abs() <= QUAD_REL_TOL * cur.abs().max(1e-300) || n >= 1 << 22 {
            return cur;
        }
        prev = cur;
    }
}

fn simpson_fixed(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Computes the exponent profile on a uniform grid over `[-r, r]` together
/// with the Simpson integral of its exponential, refining dyadically.
///
/// Returns `(grid, exp(Phi) values, integral)` at the converged resolution.
fn exponent_profile_adaptive(drift: &DriftSpec, r: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let mut cells = 1024usize;
    let mut last: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    loop {
        let (grid, vals, integral) = exponent_profile(drift, r, cells);
        if let Some((_, _, prev)) = &last {
            if (integral - prev).abs() <= QUAD_REL_TOL * integral.abs() || cells >= 1 << 21 {
                return (grid, vals, integral);
            }
        }
        last = Some((grid, vals, integral));
        cells *= 2;
    }
}

/// Single-resolution profile: per-cell Simpson for the cumulative exponent
/// (midpoint evaluations included) and per-cell Simpson for `int exp(Phi)`.
fn exponent_profile(drift: &DriftSpec, r: f64, cells: usize) -> (Vec<f64>, Vec<f64>, f64) {
    debug_assert!(cells.is_multiple_of(2));
    let s2 = drift.class.sigma * drift.class.sigma;
    let f = |x: f64| 2.0 * drift.eval(x) / s2;
    let h = 2.0 * r / cells as f64;
    let grid: Vec<f64> = (0..=cells).map(|i| -r + i as f64 * h).collect();
    let center = cells / 2;

    // Phi at nodes and midpoints, accumulated outward from zero.
    let mut phi = vec![0.0; cells + 1];
    let mut phi_mid = vec![0.0; cells];
    for i in center..cells {
        let (a, b) = (grid[i], grid[i + 1]);
        let m = 0.5 * (a + b);
        phi_mid[i] = phi[i] + simpson_cell(&f, a, m);
        phi[i + 1] = phi[i] + simpson_cell(&f, a, b);
    }
    for i in (0..center).rev() {
        let (a, b) = (grid[i], grid[i + 1]);
        let m = 0.5 * (a + b);
        phi[i] = phi[i + 1] - simpson_cell(&f, a, b);
        phi_mid[i] = phi[i] + simpson_cell(&f, a, m);
    }

    let mut integral = 0.0;
    for i in 0..cells {
        integral += h / 6.0 * (phi[i].exp() + 4.0 * phi_mid[i].exp() + phi[i + 1].exp());
    }
    let vals = phi.iter().map(|p| p.exp()).collect();
    (grid, vals, integral)
}

/// Simpson on one cell with an interior midpoint evaluation.
fn simpson_cell(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

/// `int_a^b exp(int_a^x f)` by a cumulative per-cell Simpson profile with
/// dyadic refinement; used segment-wise between drift breakpoints.
fn exp_profile_refined(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fixed = |cells: usize| -> f64 {
        let h = (b - a) / cells as f64;
        let mut phi = 0.0;
        let mut integral = 0.0;
        for i in 0..cells {
            let x0 = a + i as f64 * h;
            let x1 = x0 + h;
            let m = 0.5 * (x0 + x1);
            let phi_mid = phi + simpson_cell(f, x0, m);
            let phi_next = phi + simpson_cell(f, x0, x1);
            integral += h / 6.0 * (phi.exp() + 4.0 * phi_mid.exp() + phi_next.exp());
            phi = phi_next;
        }
        integral
    };
    let mut cells = 16usize;
    let mut prev = fixed(cells);
    loop {
        cells *= 2;
        let cur = fixed(cells);
        if (cur - prev).abs() <= QUAD_REL_TOL * cur.abs().max(1e-300) || cells >= 1 << 18 {
            return cur;
        }
        prev = cur;
    }
}

/// Tabulated invariant density with certified bounds and a sampling CDF.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// High-accuracy normalizing constant `C_{b, sigma}`.
    pub norm_const: f64,
    /// Class lower bound `L_*` on `[-A, A]`.
    pub lower_bound: f64,
    /// Class upper bound `L^*`.
    pub upper_bound: f64,
    cdf: Vec<f64>,
}

impl DensityTable {
    /// Number of nodes used for stationary sampling tables.
    pub const SAMPLING_NODES: usize = 4001;

    /// Tabulates `q_b` on `min_nodes`-or-finer uniform nodes over the
    /// truncation range. Table values are normalized so that their trapezoid
    /// integral plus the analytic tail bound is exactly one, which keeps the
    /// tabulated mass inside `[1 - 1e-6, 1]`.
    pub fn build(drift: &DriftSpec, min_nodes: usize) -> Self {
        let r = drift.class.truncation_radius();
        let (grid, raw, _) = exponent_profile_adaptive(drift, r);
        let (grid, raw) = if grid.len() >= min_nodes {
            (grid, raw)
        } else {
            let cells = (min_nodes - 1).next_power_of_two();
            let (g, v, _) = exponent_profile(drift, r, cells);
            (g, v)
        };

        let h = grid[1] - grid[0];
        let mut trapz = 0.0;
        for i in 0..raw.len() - 1 {
            trapz += 0.5 * h * (raw[i] + raw[i + 1]);
        }
        let norm = trapz + drift.class.tail_bound(r);
        let values: Vec<f64> = raw.iter().map(|v| v / norm).collect();

        let mut cdf = vec![0.0; values.len()];
        for i in 1..values.len() {
            cdf[i] = cdf[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
        }
        let total = cdf[values.len() - 1];
        for c in cdf.iter_mut() {
            *c /= total;
        }

        let (lower_bound, upper_bound) = class_bounds(&drift.class);
        DensityTable {
            grid,
            values,
            norm_const: drift.normalizing_constant(),
            lower_bound,
            upper_bound,
            cdf,
        }
    }

    /// Density value by linear interpolation.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if x <= self.grid[0] || x >= self.grid[n - 1] {
            return 0.0;
        }
        let h = self.grid[1] - self.grid[0];
        let i = (((x - self.grid[0]) / h) as usize).min(n - 2);
        let w = (x - self.grid[i]) / h;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Trapezoid mass of the table (slightly below one by construction).
    pub fn trapezoid_mass(&self) -> f64 {
        let h = self.grid[1] - self.grid[0];
        let mut s = 0.0;
        for i in 0..self.values.len() - 1 {
            s += 0.5 * h * (self.values[i] + self.values[i + 1]);
        }
        s
    }

    /// Inverse-CDF transform of `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.cdf.len();
        let i = self.cdf.partition_point(|c| *c < u).clamp(1, n - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        if c1 <= c0 {
            return self.grid[i];
        }
        let w = ((u - c0) / (c1 - c0)).clamp(0.0, 1.0);
        self.grid[i - 1] * (1.0 - w) + self.grid[i] * w
    }

    /// Maximum over the tabulated CDF of `|F_emp - F|` for a sorted sample.
    pub fn ks_distance(&self, sorted: &[f64]) -> f64 {
        let n = sorted.len() as f64;
        let mut worst: f64 = 0.0;
        for (i, x) in sorted.iter().enumerate() {
            let idx = self.grid.partition_point(|g| g < x).clamp(1, self.cdf.len() - 1);
            let h = self.grid[1] - self.grid[0];
            let w = ((x - self.grid[idx - 1]) / h).clamp(0.0, 1.0);
            let f = self.cdf[idx - 1] * (1.0 - w) + self.cdf[idx] * w;
            worst = worst.max((f - i as f64 / n).abs()).max((f - (i as f64 + 1.0) / n).abs());
        }
        worst
    }
}

/// A uniformly gridded trajectory starting at time zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplePath {
    pub dt: f64,
    pub values: Vec<f64>,
    /// Hurst index of the driving noise; `0.5` is Brownian.
    pub hurst: f64,
    pub seed: u64,
}

impl SamplePath {
    pub fn horizon(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }
}

/// Euler-Maruyama simulation of `dX = b(X) dt + sigma dW` from `x0`.
///
/// Deterministic in `(drift, x0, horizon, dt, seed)`.
pub fn simulate_em(
    drift: &DriftSpec,
    x0: f64,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<SamplePath> {
    if !(dt > 0.0) || horizon < dt {
        return Err(Error::InvalidConfig(format!(
            "need dt > 0 and horizon >= dt, got dt={dt}, horizon={horizon}"
        )));
    }
    let n = (horizon / dt).round() as usize;
    let sigma = drift.class.sigma;
    let sqdt = dt.sqrt();
    let mut rng = rng::from_seed(seed);
    let mut values = Vec::with_capacity(n + 1);
    values.push(x0);
    let mut x = x0;
    for step in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        x += drift.eval(x) * dt + sigma * sqdt * z;
        if !x.is_finite() {
            return Err(Error::Numerical(format!(
                "Euler-Maruyama blow-up at step {step} (t = {})",
                step as f64 * dt
            )));
        }
        values.push(x);
    }
    Ok(SamplePath { dt, values, hurst: 0.5, seed })
}

/// Draws one point from the stationary density by inverse CDF.
pub fn sample_stationary(drift: &DriftSpec, seed: u64) -> f64 {
    let table = DensityTable::build(drift, DensityTable::SAMPLING_NODES);
    sample_stationary_from(&table, &mut rng::from_seed(seed))
}

/// Draws from an existing table with the caller's generator.
pub fn sample_stationary_from<R: Rng>(table: &DensityTable, rng: &mut R) -> f64 {
    table.quantile(rng.gen_range(1e-12..1.0 - 1e-12))
}

/// Occupation-based density estimate: for each `z` in `z_grid`, the fraction
/// of time spent in `[z - eps, z + eps]` divided by `2 eps`, using left-point
/// Riemann weights on the path grid.
pub fn empirical_density(path: &SamplePath, z_grid: &[f64], eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig("eps must be positive".into()));
    }
    let n = path.values.len() - 1;
    let mut sorted: Vec<f64> = path.values[..n].to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let horizon = path.horizon();
    Ok(z_grid
        .iter()
        .map(|z| {
            let lo = sorted.partition_point(|v| *v < z - eps);
            let hi = sorted.partition_point(|v| *v <= z + eps);
            (hi - lo) as f64 * path.dt / (horizon * 2.0 * eps)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.7724538509055159;

    #[test]
    fn ou_density_is_gaussian() {
        let ou = DriftSpec::standard_ou();
        assert!((ou.invariant_density(0.0) - 1.0 / SQRT_PI).abs() < 1e-9);
        assert!((ou.invariant_density(1.0) - (-1.0f64).exp() / SQRT_PI).abs() < 1e-9);
    }

    #[test]
    fn ou_normalizing_constants() {
        let ou = DriftSpec::standard_ou();
        assert!((ou.normalizing_constant() - SQRT_PI).abs() < 1e-9);
        let fast = DriftSpec::linear(-2.0, ClassParams::new(2.0, 1.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((fast.normalizing_constant() - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn alternative_density_matches_trapezoid_oracle() {
        let alt = DriftSpec::alternative_example();
        // independent oracle: trapezoid over [-12, 12] with step 1e-4
        let step = 1e-4;
        let n = (24.0 / step) as usize;
        let s2 = 1.0;
        let mut exps = Vec::with_capacity(n + 1);
        let mut phi = 0.0;
        let mut prev_x = -12.0;
        let mut prev_b = 2.0 * alt.eval(prev_x) / s2;
        // accumulate from -12, then recenter so Phi(0) = 0
        let mut phis = vec![0.0];
        for i in 1..=n {
            let x = -12.0 + i as f64 * step;
            let b = 2.0 * alt.eval(x) / s2;
            phi += 0.5 * step * (prev_b + b);
            phis.push(phi);
            prev_x = x;
            prev_b = b;
        }
        let _ = prev_x;
        let center = phis[n / 2];
        for p in &phis {
            exps.push((p - center).exp());
        }
        let mut integral = 0.0;
        for i in 0..n {
            integral += 0.5 * step * (exps[i] + exps[i + 1]);
        }
        let oracle_q0 = exps[n / 2] / integral;
        assert!(
            (alt.invariant_density(0.0) - oracle_q0).abs() < 1e-6 * oracle_q0,
            "{} vs oracle {}",
            alt.invariant_density(0.0),
            oracle_q0
        );
        assert!((alt.normalizing_constant() - integral).abs() < 1e-6 * integral);
    }

    #[test]
    fn density_integrates_to_one() {
        for drift in [DriftSpec::standard_ou(), DriftSpec::alternative_example()] {
            let table = DensityTable::build(&drift, 4001);
            let mass = table.trapezoid_mass();
            assert!((1.0 - 1e-6..=1.0).contains(&mass), "mass = {mass}");
            assert!(table.values.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn class_bounds_explicit_value() {
        let params = ClassParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let (lower, upper) = class_bounds(&params);
        let expect = (-4.0f64).exp() / (8.0 + (4.0f64).exp());
        assert!((lower - expect).abs() < 1e-15);
        assert!(upper.is_finite() && upper > 0.0);
    }

    #[test]
    fn ou_density_within_class_bounds() {
        let ou = DriftSpec::standard_ou();
        let (lower, upper) = class_bounds(ou.class());
        let mut x = -1.0;
        while x <= 1.0 {
            let q = ou.invariant_density(x);
            assert!(q >= lower && q <= upper, "q({x}) = {q} not in [{lower}, {upper}]");
            x += 0.05;
        }
    }

    #[test]
    fn density_table_min_respects_lower_bound() {
        let ou = DriftSpec::standard_ou();
        let t = DensityTable::build(&ou, 4001);
        let min_on_a = t
            .grid
            .iter()
            .zip(&t.values)
            .filter(|(x, _)| x.abs() <= 1.0)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min);
        assert!(min_on_a >= 0.9 * t.lower_bound);
    }

    #[test]
    fn validation_rejects_bad_drifts() {
        let class = ClassParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        // growing drift violates the inward condition
        assert!(DriftSpec::linear(1.0, class).is_err());
        // bump sticking out of [-A, A]
        let bump = Bump {
            amplitude: 0.3,
            center: 0.95,
            bandwidth: 0.2,
            kernel: KernelId::QuarticSmooth,
        };
        assert!(DriftSpec::standard_ou().with_bump(bump, class).is_err());
        // offset eats the whole decay margin
        assert!(DriftSpec::standard_ou().with_offset(1.5).is_err());
        assert!(DriftSpec::standard_ou().with_offset(0.3).is_ok());
    }

    #[test]
    fn em_one_step_contract() {
        // a flat drift is not ergodic and is rejected by validation
        let class = ClassParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(DriftSpec::linear(0.0, class).is_err());
        // X1 = x0 + b(x0) dt + sigma sqrt(dt) Z0
        let ou = DriftSpec::standard_ou();
        let p = simulate_em(&ou, 2.0, 0.01, 0.01, 9).unwrap();
        let mut r = rng::from_seed(9);
        let z: f64 = r.sample(StandardNormal);
        let expect = 2.0 + (-2.0) * 0.01 + 0.1 * z;
        assert!((p.values[1] - expect).abs() < 1e-15);
    }

    #[test]
    fn em_deterministic_in_seed() {
        let ou = DriftSpec::standard_ou();
        let a = simulate_em(&ou, 0.3, 5.0, 0.01, 77).unwrap();
        let b = simulate_em(&ou, 0.3, 5.0, 0.01, 77).unwrap();
        assert_eq!(a.values, b.values);
        let c = simulate_em(&ou, 0.3, 5.0, 0.01, 78).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn em_ou_mean_reversion() {
        let ou = DriftSpec::standard_ou();
        let n_paths = 1000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..n_paths {
            let p = simulate_em(&ou, 2.0, 3.0, 0.005, rng::mix(1234, i)).unwrap();
            let last = *p.values.last().unwrap();
            sum += last;
            sumsq += last * last;
        }
        let mean = sum / n_paths as f64;
        let var = sumsq / n_paths as f64 - mean * mean;
        let se = (var / n_paths as f64).sqrt();
        let expect = 2.0 * (-3.0f64).exp();
        assert!(
            (mean - expect).abs() < 4.0 * se,
            "mean {mean} vs {expect} (se {se})"
        );
    }

    #[test]
    fn stationary_sampling_moments_and_ks() {
        let ou = DriftSpec::standard_ou();
        let table = DensityTable::build(&ou, DensityTable::SAMPLING_NODES);
        let mut r = rng::from_seed(5150);
        let n = 10_000;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_stationary_from(&table, &mut r)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        // target N(0, 1/2): se(mean) = sqrt(0.5/n), se(var) ~ sqrt(2/n) * 0.5
        assert!(mean.abs() < 4.0 * (0.5f64 / n as f64).sqrt(), "mean {mean}");
        assert!((var - 0.5).abs() < 4.0 * 0.5 * (2.0f64 / n as f64).sqrt(), "var {var}");
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(table.ks_distance(&draws) < 0.02);
    }

    #[test]
    fn quantile_function_monotone() {
        let table = DensityTable::build(&DriftSpec::standard_ou(), 2001);
        let mut prev = f64::NEG_INFINITY;
        for i in 1..200 {
            let q = table.quantile(i as f64 / 200.0);
            assert!(q >= prev);
            prev = q;
        }
    }

    #[test]
    fn empirical_density_indicator_geometry() {
        let path = SamplePath { dt: 0.1, values: vec![0.3; 11], hurst: 0.5, seed: 0 };
        let est = empirical_density(&path, &[0.3, 0.5], 0.05).unwrap();
        assert!((est[0] - 1.0 / 0.1).abs() < 1e-12);
        assert_eq!(est[1], 0.0);
    }

    #[test]
    fn empirical_density_mass_bound() {
        let ou = DriftSpec::standard_ou();
        let p = simulate_em(&ou, 0.0, 50.0, 0.01, 3).unwrap();
        let eps = 0.05;
        let z: Vec<f64> = (0..41).map(|i| -1.0 + i as f64 * 0.05).collect();
        let est = empirical_density(&p, &z, eps).unwrap();
        // covering with half-overlapping windows counts every point <= 2x
        let mass: f64 = est.iter().map(|v| v * 2.0 * eps).sum();
        assert!(mass <= 2.0 + 1e-9);
    }

    #[test]
    fn empirical_density_approaches_invariant() {
        let ou = DriftSpec::standard_ou();
        let z: Vec<f64> = (0..21).map(|i| -1.0 + i as f64 * 0.1).collect();
        let eps = 0.05;
        let mut improved = 0;
        let total = 10;
        for i in 0..total {
            let long = simulate_em(&ou, 0.0, 2000.0, 0.01, rng::mix(90, i)).unwrap();
            let short = SamplePath {
                dt: long.dt,
                values: long.values[..20_001].to_vec(),
                hurst: 0.5,
                seed: long.seed,
            };
            let sup = |p: &SamplePath| -> f64 {
                empirical_density(p, &z, eps)
                    .unwrap()
                    .iter()
                    .zip(&z)
                    .map(|(e, zz)| (e - ou.invariant_density(*zz)).abs())
                    .fold(0.0, f64::max)
            };
            if sup(&long) <= sup(&short) {
                improved += 1;
            }
        }
        assert!(improved * 10 >= 8 * total, "only {improved}/{total} improved");
    }
}
