//! Construction of least-favourable alternatives.
//!
//! An alternative adds one localized recovery-kernel hat of height
//! `L (1 - eps_T) (h_T^w)^beta` on top of the shifted reference `b0 + eta`.
//! Its bandwidth `h_T^w` couples to a weight `w` that must equal
//! `c_T q_{b^w}(y^w)` — the alternative's own invariant density at the hat
//! location, scaled by the truncation constant `c_T = K_T(0)^{(2beta+1)/beta}`
//! — so the construction is a fixed point solved by bisection over the
//! certified density bracket. Packing hats left to right with disjoint
//! supports yields the full alternative set; every hat then sits exactly at
//! distance `(1 - eps_T) c* delta_T` from the similarity hypothesis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{optimal_constant, KernelId};
use crate::sde::{class_bounds, Bump, ClassParams, DriftSpec};

/// Detection rate `delta_T(beta) = (log T / T)^(beta / (2 beta + 1))`.
pub fn rate_delta(beta: f64, horizon: f64) -> f64 {
    (horizon.ln() / horizon).powf(beta / (2.0 * beta + 1.0))
}

/// One least-favourable construction problem at a fixed anchor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointProblem {
    /// Hölder exponent in `(0, 1]`.
    pub beta: f64,
    /// Hölder constant `L > 0`.
    pub holder: f64,
    /// Horizon `T > e`.
    pub horizon: f64,
    pub sigma: f64,
    pub eta: f64,
    pub reference: DriftSpec,
    /// Anchor location; the hat center is `anchor + R h_T^w`.
    pub anchor: f64,
    /// Support half-width multiple of the kernel (1 for `beta <= 1`).
    pub support_multiple: f64,
    /// Height slack `eps_T` in `(0, 1)`.
    pub eps: f64,
}

impl FixedPointProblem {
    pub fn new(
        beta: f64,
        holder: f64,
        horizon: f64,
        eta: f64,
        reference: DriftSpec,
        anchor: f64,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Unsupported(format!(
                "alternatives require beta in (0,1], got {beta}"
            )));
        }
        if !(holder > 0.0) || !(horizon > std::f64::consts::E) || eta < 0.0 {
            return Err(Error::InvalidConfig(
                "need L > 0, T > e and eta >= 0".into(),
            ));
        }
        let sigma = reference.class().sigma;
        // eps_T = (log T)^(-1/4) vanishes while eps_T sqrt(log T) diverges
        let eps = horizon.ln().powf(-0.25);
        Ok(FixedPointProblem {
            beta,
            holder,
            horizon,
            sigma,
            eta,
            reference,
            anchor,
            support_multiple: 1.0,
            eps,
        })
    }

    /// Hat kernel: untruncated triangle at `beta = 1`, truncated recovery
    /// kernel below.
    pub fn kernel(&self) -> KernelId {
        if self.beta >= 1.0 {
            KernelId::OptimalRecovery { beta: 1.0 }
        } else {
            KernelId::TruncatedRecovery { beta: self.beta, horizon: self.horizon }
        }
    }

    /// Truncation constant `c_T = K_T(0)^((2 beta + 1) / beta)`, one for the
    /// untruncated kernel.
    pub fn c_t(&self) -> f64 {
        let k0 = self.kernel().eval(0.0);
        k0.powf((2.0 * self.beta + 1.0) / self.beta)
    }

    /// Class parameters of the constructed alternatives, widened from the
    /// reference class to absorb the shift and the hat.
    fn target_class(&self) -> Result<ClassParams> {
        let base = self.reference.class();
        let decay = base.decay - self.eta / (self.sigma * self.sigma);
        if decay <= 0.0 {
            return Err(Error::InvalidDrift(format!(
                "eta = {} exhausts the reference decay margin",
                self.eta
            )));
        }
        ClassParams::new(
            2.0 * (base.growth + self.eta),
            base.radius,
            decay,
            base.sigma,
        )
    }

    /// Certified density bracket `[c_T L_*, c_T L^*]` for the fixed point.
    pub fn bracket(&self) -> Result<(f64, f64)> {
        let (lo, hi) = class_bounds(&self.target_class()?);
        let c = self.c_t();
        Ok((c * lo, c * hi))
    }

    /// Smallest weight whose hat still fits between the anchor and `A`.
    ///
    /// Bandwidths shrink in `w`, so feasibility is one-sided: the analytic
    /// lower constant `L_*` is exponentially conservative and at moderate
    /// horizons its hat would dwarf `[-A, A]`; the effective bracket is the
    /// certified one intersected with this geometric floor.
    fn feasible_weight_floor(&self) -> Result<f64> {
        let radius = self.reference.class().radius;
        let room = radius - self.anchor;
        if room <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "anchor {} leaves no room before A = {radius}",
                self.anchor
            )));
        }
        let h_max = room / (2.0 * self.support_multiple);
        let c_star = optimal_constant(self.beta, self.holder)?;
        let scale = (c_star / self.holder).powf(1.0 / self.beta);
        Ok(self.sigma * self.sigma * self.horizon.ln() / self.horizon
            * (scale / h_max).powf(2.0 * self.beta + 1.0)
            * (1.0 + 1e-9))
    }
}

/// Optimal bandwidth `h_T^w = (c*/L)^(1/beta) (sigma^2 log T / (T w))^(1/(2 beta + 1))`.
pub fn bandwidth_h(w: f64, problem: &FixedPointProblem) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::InvalidConfig(format!("weight must be positive, got {w}")));
    }
    let c_star = optimal_constant(problem.beta, problem.holder)?;
    let inner = problem.sigma * problem.sigma * problem.horizon.ln() / (problem.horizon * w);
    Ok((c_star / problem.holder).powf(1.0 / problem.beta)
        * inner.powf(1.0 / (2.0 * problem.beta + 1.0)))
}

/// The alternative drift `b^w = b0 + eta + L (1 - eps_T) (h_T^w)^beta
/// K_T((x - y^w) / h_T^w)` with `y^w = anchor + R h_T^w`.
pub fn alternative_drift(w: f64, problem: &FixedPointProblem) -> Result<DriftSpec> {
    let h = bandwidth_h(w, problem)?;
    let r = problem.support_multiple;
    let center = problem.anchor + r * h;
    let radius = problem.reference.class().radius;
    if center - r * h < -radius - 1e-12 || center + r * h > radius + 1e-12 {
        return Err(Error::InvalidDrift(format!(
            "hat support [{}, {}] exits [-A, A] = [{}, {}]",
            center - r * h,
            center + r * h,
            -radius,
            radius
        )));
    }
    let amplitude = problem.holder * (1.0 - problem.eps) * h.powf(problem.beta);
    let shifted = problem.reference.with_offset(problem.eta)?;
    shifted.with_bump(
        Bump { amplitude, center, bandwidth: h, kernel: problem.kernel() },
        problem.target_class()?,
    )
}

/// Result of one fixed-point solve.
#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub weight: f64,
    pub bandwidth: f64,
    pub center: f64,
    pub drift: DriftSpec,
    pub residual: f64,
}

const FP_TOL: f64 = 1e-8;
const FP_MAX_ITER: usize = 200;

/// Solves `w = c_T q_{b^w}(y^w)` by bisection over the certified bracket,
/// expanding it by 20% up to five times when the endpoint signs agree.
pub fn solve_fixed_point(problem: &FixedPointProblem) -> Result<FixedPointSolution> {
    let c_t = problem.c_t();
    let g = |w: f64| -> Result<f64> {
        let drift = alternative_drift(w, problem)?;
        let h = bandwidth_h(w, problem)?;
        let y = problem.anchor + problem.support_multiple * h;
        Ok(c_t * drift.invariant_density(y) - w)
    };
    let floor = problem.feasible_weight_floor()?;
    let (bracket_lo, bracket_hi) = problem.bracket()?;
    let mut lo = bracket_lo.max(floor);
    let mut hi = bracket_hi;
    if lo >= hi {
        return Err(Error::Numerical(format!(
            "empty weight bracket: geometric floor {floor} exceeds c_T L^* = {bracket_hi}"
        )));
    }
    let mut g_lo = g(lo)?;
    let mut g_hi = g(hi)?;
    let mut expansions = 0;
    while g_lo.signum() == g_hi.signum() && expansions < 5 {
        lo = (lo * 0.8).max(floor);
        hi *= 1.2;
        g_lo = g(lo)?;
        g_hi = g(hi)?;
        expansions += 1;
    }
    if g_lo.signum() == g_hi.signum() && g_lo.abs() > FP_TOL && g_hi.abs() > FP_TOL {
        return Err(Error::Numerical(format!(
            "no fixed point: g({lo}) = {g_lo}, g({hi}) = {g_hi} after {expansions} expansions"
        )));
    }
    let (mut w, mut g_w) = if g_lo.abs() < g_hi.abs() { (lo, g_lo) } else { (hi, g_hi) };
    for _ in 0..FP_MAX_ITER {
        if g_w.abs() <= FP_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid)?;
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        w = mid;
        g_w = g_mid;
    }
    if g_w.abs() > FP_TOL {
        return Err(Error::Numerical(format!(
            "bisection stalled at |g| = {} after {FP_MAX_ITER} iterations",
            g_w.abs()
        )));
    }
    let bandwidth = bandwidth_h(w, problem)?;
    Ok(FixedPointSolution {
        weight: w,
        bandwidth,
        center: problem.anchor + problem.support_multiple * bandwidth,
        drift: alternative_drift(w, problem)?,
        residual: g_w.abs(),
    })
}

/// One packed hat of an alternative set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlternativeBump {
    pub weight: f64,
    pub center: f64,
    pub bandwidth: f64,
    pub amplitude: f64,
    #[serde(skip)]
    pub drift: Option<DriftSpec>,
}

/// The packed family of least-favourable alternatives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlternativeSet {
    pub bumps: Vec<AlternativeBump>,
    pub delta_t: f64,
    pub c_star: f64,
}

/// Iterates the fixed-point solve left to right: anchors advance by the
/// solved support widths, and a hat whose support would exit the reduced
/// interval `[-A', A']` is dropped, ending the construction.
pub fn build_alternatives(template: &FixedPointProblem) -> Result<AlternativeSet> {
    let radius = template.reference.class().radius;
    let r = template.support_multiple;
    // Margin A' = A - (widest plausible hat). The analytic constant L_* is
    // exponentially conservative, so the margin uses the measured minimum of
    // the shifted reference density over [-A, A] with a factor-2 slack; any
    // solution escaping it is caught by the support check.
    let shifted = template.reference.with_offset(template.eta)?;
    let mut q_min = f64::INFINITY;
    let mut x = -radius;
    while x <= radius {
        q_min = q_min.min(shifted.invariant_density(x));
        x += radius / 100.0;
    }
    let widest = bandwidth_h(0.5 * template.c_t() * q_min, template)?;
    let reduced = radius - widest;
    if reduced <= 0.0 {
        return Err(Error::InvalidConfig(
            "horizon too small: the widest hat does not fit in [-A, A]".into(),
        ));
    }

    let mut bumps = Vec::new();
    let mut anchor = -reduced;
    loop {
        let mut problem = template.clone();
        problem.anchor = anchor;
        let sol = match solve_fixed_point(&problem) {
            Ok(s) => s,
            Err(Error::InvalidDrift(_)) | Err(Error::Numerical(_)) if !bumps.is_empty() => break,
            Err(e) => return Err(e),
        };
        if sol.center + r * sol.bandwidth > reduced {
            break;
        }
        anchor = sol.center + r * sol.bandwidth;
        bumps.push(AlternativeBump {
            weight: sol.weight,
            center: sol.center,
            bandwidth: sol.bandwidth,
            amplitude: template.holder
                * (1.0 - template.eps)
                * sol.bandwidth.powf(template.beta),
            drift: Some(sol.drift),
        });
    }
    if bumps.is_empty() {
        return Err(Error::Numerical(
            "no alternative fits inside the reduced interval".into(),
        ));
    }
    Ok(AlternativeSet {
        bumps,
        delta_t: rate_delta(template.beta, template.horizon),
        c_star: optimal_constant(template.beta, template.holder)?,
    })
}

/// Distance `Delta_J(b)`: the grid maximum over `J` of
/// `max(|b - b0| - eta, 0) * (q_b / sigma^2)^(beta / (2 beta + 1))`.
///
/// The density exponent is accumulated along the uniform grid with one
/// adaptive anchor integral, so each grid point costs O(1).
#[allow(clippy::too_many_arguments)]
pub fn delta_distance(
    b: &DriftSpec,
    b0: &DriftSpec,
    eta: f64,
    beta: f64,
    sigma: f64,
    interval: (f64, f64),
    grid_step: f64,
) -> Result<f64> {
    if !(grid_step > 0.0) || interval.1 <= interval.0 {
        return Err(Error::InvalidConfig("need a positive step and a nonempty interval".into()));
    }
    let norm = b.normalizing_constant();
    let s2 = sigma * sigma;
    let expo = beta / (2.0 * beta + 1.0);
    let n = ((interval.1 - interval.0) / grid_step).round() as usize;

    // cumulative Simpson of 2 b / sigma^2 along the grid, anchored at x = 0
    let f = |x: f64| 2.0 * b.eval(x) / s2;
    let mut phi = anchored_exponent(b, interval.0);
    let mut best = 0.0f64;
    let mut x = interval.0;
    for i in 0..=n {
        if i > 0 {
            let prev = x;
            x = interval.0 + i as f64 * grid_step;
            let m = 0.5 * (prev + x);
            phi += (x - prev) / 6.0 * (f(prev) + 4.0 * f(m) + f(x));
        }
        let q = phi.exp() / norm;
        let dev = (b.eval(x) - b0.eval(x)).abs() - eta;
        if dev > 0.0 {
            best = best.max(dev * (q / s2).powf(expo));
        }
    }
    Ok(best)
}

/// `Phi(x0) = int_0^{x0} 2 b / sigma^2` by refined Simpson.
fn anchored_exponent(b: &DriftSpec, x0: f64) -> f64 {
    // reuse the drift's own quadrature through the density it defines
    let q = b.invariant_density(x0);
    (q * b.normalizing_constant()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ou_problem(beta: f64, horizon: f64) -> FixedPointProblem {
        FixedPointProblem::new(beta, 1.0, horizon, 0.05, DriftSpec::standard_ou(), -0.5).unwrap()
    }

    #[test]
    fn rate_examples() {
        assert!((rate_delta(1.0, std::f64::consts::E) - (1.0 / std::f64::consts::E).powf(1.0 / 3.0)).abs() < 1e-14);
        // decreasing in T beyond e
        let mut prev = rate_delta(1.0, 3.0);
        for t in [5.0, 10.0, 100.0, 1e4] {
            let d = rate_delta(1.0, t);
            assert!(d < prev);
            prev = d;
        }
        // direct arithmetic oracle at beta = 0.5, T = 100
        let expect = (100.0f64.ln() / 100.0).powf(0.25);
        assert!((rate_delta(0.5, 100.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn bandwidth_power_law_and_oracle() {
        let p = ou_problem(1.0, 1000.0);
        let h1 = bandwidth_h(1.0, &p).unwrap();
        let h2 = bandwidth_h(2.0f64.powf(2.0 * p.beta + 1.0), &p).unwrap();
        assert!((h2 - h1 / 2.0).abs() < 1e-12);
        // direct arithmetic for random tuples
        let mut state = 7u64;
        for _ in 0..20 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let w = 0.1 + ((state >> 12) as f64 / (1u64 << 52) as f64);
            let c_star = optimal_constant(p.beta, p.holder).unwrap();
            let oracle = (c_star / p.holder).powf(1.0 / p.beta)
                * (p.sigma * p.sigma * p.horizon.ln() / (p.horizon * w))
                    .powf(1.0 / (2.0 * p.beta + 1.0));
            assert!((bandwidth_h(w, &p).unwrap() - oracle).abs() < 1e-15);
        }
        // beta = 1, L = c* = sigma = 1, w = 1, T = e gives (1/e)^(1/3)
        let mut pe = ou_problem(1.0, std::f64::consts::E + 1e-9);
        pe.horizon = std::f64::consts::E;
        let h = bandwidth_h(1.0, &pe).unwrap();
        assert!((h - (1.0 / std::f64::consts::E).powf(1.0 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn c_t_limits() {
        // K_T(0)^((2b+1)/b) -> 1 as T grows at fixed beta < 1
        let mut prev = 0.0;
        for t in [1e2, 1e4, 1e6] {
            let p = FixedPointProblem::new(0.5, 1.0, t, 0.0, DriftSpec::standard_ou(), -0.5)
                .unwrap();
            let c = p.c_t();
            assert!(c > prev && c < 1.0);
            prev = c;
        }
        assert!(1.0 - prev < 1e-2);
        // untruncated kernel at beta = 1
        assert_eq!(ou_problem(1.0, 100.0).c_t(), 1.0);
        assert!(FixedPointProblem::new(1.5, 1.0, 100.0, 0.0, DriftSpec::standard_ou(), 0.0).is_err());
    }

    #[test]
    fn alternative_drift_amplitude_and_hoelder() {
        let p = ou_problem(1.0, 10_000.0);
        let w = 0.3;
        let b = alternative_drift(w, &p).unwrap();
        let h = bandwidth_h(w, &p).unwrap();
        let center = p.anchor + h;
        let k0 = p.kernel().eval(0.0);
        let expect = p.holder * (1.0 - p.eps) * h.powf(p.beta) * k0;
        let got = b.eval(center) - p.reference.eval(center) - p.eta;
        assert!((got - expect).abs() < 1e-12);

        // Hölder check of the hat: |(b - b0)(x) - (b - b0)(x')| <= L |x - x'|^beta
        let mut state = 11u64;
        for _ in 0..10_000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let x = center - 2.0 * h + 4.0 * h * ((state >> 12) as f64 / (1u64 << 52) as f64);
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let x2 = center - 2.0 * h + 4.0 * h * ((state >> 12) as f64 / (1u64 << 52) as f64);
            let d = (b.eval(x) - p.reference.eval(x)) - (b.eval(x2) - p.reference.eval(x2));
            assert!(
                d.abs() <= p.holder * (x - x2).abs().powf(p.beta) + 1e-12,
                "x={x} x'={x2}"
            );
        }
    }

    #[test]
    fn zero_height_hat_at_eps_one() {
        let mut p = ou_problem(1.0, 1000.0);
        p.eps = 1.0;
        let b = alternative_drift(0.3, &p).unwrap();
        let h = bandwidth_h(0.3, &p).unwrap();
        let shifted = p.reference.with_offset(p.eta).unwrap();
        for x in [-0.9, p.anchor + h, 0.0, 0.3] {
            assert!((b.eval(x) - shifted.eval(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn fixed_point_residual_and_bracket() {
        for (beta, horizon) in [(1.0, 10_000.0), (0.5, 1_000_000.0)] {
            let p = ou_problem(beta, horizon);
            let sol = solve_fixed_point(&p).unwrap();
            assert!(sol.residual <= FP_TOL, "residual {}", sol.residual);
            // fixed point relation holds with the returned drift
            let q = sol.drift.invariant_density(sol.center);
            assert!((p.c_t() * q - sol.weight).abs() <= FP_TOL * 1.01);
        }
    }

    #[test]
    fn fixed_point_zero_bump_scan_oracle() {
        // with eps = 1 the hat vanishes: w* solves w = c_T q_{b0 + eta}(anchor + R h_T^w);
        // verified against a dense scan (step 1e-5) over the weight range the
        // density can reach
        let mut p = ou_problem(1.0, 10_000.0);
        p.eps = 1.0;
        let sol = solve_fixed_point(&p).unwrap();
        let shifted = p.reference.with_offset(p.eta).unwrap();
        let table = crate::sde::DensityTable::build(&shifted, 8193);
        let lo = p.feasible_weight_floor().unwrap();
        let hi: f64 = 1.5 * table.values.iter().cloned().fold(0.0, f64::max);
        let mut best = (f64::INFINITY, 0.0);
        let mut w = lo;
        while w <= hi {
            let h = bandwidth_h(w, &p).unwrap();
            let g = p.c_t() * table.eval(p.anchor + h) - w;
            if g.abs() < best.0 {
                best = (g.abs(), w);
            }
            w += 1e-5;
        }
        assert!(
            (sol.weight - best.1).abs() < 2e-5,
            "bisection {} vs scan {}",
            sol.weight,
            best.1
        );
    }

    #[test]
    fn delta_identity_at_fixed_point() {
        let p = ou_problem(1.0, 10_000.0);
        let sol = solve_fixed_point(&p).unwrap();
        let j = (sol.center - 0.5, sol.center + 0.5);
        let delta = delta_distance(
            &sol.drift,
            &p.reference,
            p.eta,
            p.beta,
            p.sigma,
            j,
            1e-4,
        )
        .unwrap();
        let expect = (1.0 - p.eps) * optimal_constant(p.beta, p.holder).unwrap()
            * rate_delta(p.beta, p.horizon);
        assert!((delta - expect).abs() < 1e-6, "{delta} vs {expect}");
    }

    #[test]
    fn delta_boundary_and_monotonicity() {
        let ou = DriftSpec::standard_ou();
        let shifted = ou.with_offset(0.1).unwrap();
        let d = delta_distance(&shifted, &ou, 0.1, 1.0, 1.0, (-0.8, 0.8), 1e-3).unwrap();
        assert!(d <= 1e-12);

        // Delta grows with the bump amplitude
        let class = ClassParams::new(2.0, 1.0, 0.5, 1.0).unwrap();
        let mut prev = 0.0;
        for a in [0.1, 0.2, 0.4] {
            let b = ou
                .with_bump(
                    Bump {
                        amplitude: a,
                        center: 0.2,
                        bandwidth: 0.3,
                        kernel: KernelId::QuarticSmooth,
                    },
                    class,
                )
                .unwrap();
            let d = delta_distance(&b, &ou, 0.0, 1.0, 1.0, (-0.8, 0.8), 1e-3).unwrap();
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn delta_bump_formula_cross_check() {
        // b = b0 + eta + a K_{y,h}: Delta = max over grid of a K q^(1/3);
        // compare against a 10x finer grid
        let ou = DriftSpec::standard_ou();
        let class = ClassParams::new(2.0, 1.0, 0.5, 1.0).unwrap();
        let b = ou
            .with_offset(0.05)
            .unwrap()
            .with_bump(
                Bump {
                    amplitude: 0.3,
                    center: 0.2,
                    bandwidth: 0.25,
                    kernel: KernelId::QuarticSmooth,
                },
                class,
            )
            .unwrap();
        let coarse = delta_distance(&b, &ou, 0.05, 1.0, 1.0, (-0.7, 0.7), 1e-3).unwrap();
        let fine = delta_distance(&b, &ou, 0.05, 1.0, 1.0, (-0.7, 0.7), 1e-4).unwrap();
        assert!((coarse - fine).abs() < 1e-5, "{coarse} vs {fine}");
    }

    #[test]
    fn packing_disjoint_and_count_bounds() {
        let mut counts = Vec::new();
        for horizon in [1e3, 1e4, 1e5] {
            let p = ou_problem(1.0, horizon);
            let set = build_alternatives(&p).unwrap();
            // disjoint supports inside the reduced interval
            for pair in set.bumps.windows(2) {
                assert!(
                    pair[0].center + pair[0].bandwidth <= pair[1].center - pair[1].bandwidth + 1e-12
                );
            }
            let radius = p.reference.class().radius;
            let total: f64 = set.bumps.iter().map(|b| 2.0 * b.bandwidth).sum();
            assert!(total <= 2.0 * radius);
            for b in &set.bumps {
                assert!(b.center - b.bandwidth >= -radius && b.center + b.bandwidth <= radius);
                assert!(b.drift.is_some());
            }
            // upper order bound on the count
            let (_, upper) = class_bounds(&p.target_class().unwrap());
            let c_star = optimal_constant(p.beta, p.holder).unwrap();
            let bound = radius * upper.powf(1.0 / 3.0) * (1.0 / c_star)
                * (horizon / horizon.ln()).powf(1.0 / 3.0);
            assert!(
                (set.bumps.len() as f64) <= bound,
                "N = {} > bound {bound}",
                set.bumps.len()
            );
            counts.push(set.bumps.len());
        }
        assert!(counts[0] <= counts[1] && counts[1] <= counts[2], "{counts:?}");
    }
}
