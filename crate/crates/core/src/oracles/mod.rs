//! Closed-form energies, thresholds and bounds used as ground truth.
//!
//! Everything here is independent of the discrete solver: the stability
//! threshold β, the Neumann eigenvalue oracle, the bounded-cylinder /
//! half-disk / ball energies, the 2-D crossing volume, the free-boundary
//! measure bounds and the overdetermined-constant identities.

pub mod eigen;

use crate::error::{Error, Result};
use crate::geometry::CrossSection;

/// √3·2, the c-independent free-boundary bound coefficient.
const TWO_SQRT3: f64 = 3.464_101_615_137_754_6;

fn beta_fn(s: f64) -> f64 {
    s.sqrt() * s.sqrt().tanh() - 1.0
}

/// The stability threshold root β: the unique solution of √s·tanh√s = 1.
///
/// Bisection on [1, 2] followed by Newton polishing; the residual is below
/// 1e−12 by construction.
pub fn beta_root() -> f64 {
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    debug_assert!(beta_fn(lo) < 0.0 && beta_fn(hi) > 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if beta_fn(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    // Newton: d/ds [√s tanh √s] = (tanh √s + √s sech² √s) / (2√s)
    for _ in 0..4 {
        let r = s.sqrt();
        let t = r.tanh();
        let sech2 = 1.0 - t * t;
        let deriv = (t + r * sech2) / (2.0 * r);
        s -= beta_fn(s) / deriv;
    }
    debug_assert!(beta_fn(s).abs() < 1e-12);
    s
}

/// First nonzero Neumann eigenvalue of −Δ on the cross-section.
pub fn neumann_lambda1(cross_section: &CrossSection) -> f64 {
    cross_section.lambda1()
}

/// Stability classification of the flat cylinder of height `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// λ₁(ω) < 4β/h²: the flat cylinder is not a local minimizer.
    NotLocalMin,
    /// λ₁(ω) > 4β/h²: the flat cylinder is a local minimizer.
    LocalMin,
    Marginal,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::NotLocalMin => "not_local_min",
            Stability::LocalMin => "local_min",
            Stability::Marginal => "marginal",
        }
    }
}

/// Outcome of the λ₁(ω) vs 4β/h² comparison.
#[derive(Debug, Clone, Copy)]
pub struct StabilityVerdict {
    pub lambda1: f64,
    /// 4β/h².
    pub threshold: f64,
    /// λ₁ − 4β/h².
    pub margin: f64,
    pub verdict: Stability,
}

/// Classify the flat cylinder of height `h` in the cylinder over `cross_section`.
pub fn stability_classify(cross_section: &CrossSection, h: f64) -> Result<StabilityVerdict> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("height must be positive, got {h}")));
    }
    let lambda1 = cross_section.lambda1();
    stability_classify_with_lambda1(lambda1, h)
}

/// Same classification with a precomputed λ₁ (one eigensolve per sweep).
pub fn stability_classify_with_lambda1(lambda1: f64, h: f64) -> Result<StabilityVerdict> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("height must be positive, got {h}")));
    }
    let threshold = 4.0 * beta_root() / (h * h);
    let margin = lambda1 - threshold;
    let tol = 1e-9 * threshold;
    let verdict = if margin < -tol {
        Stability::NotLocalMin
    } else if margin > tol {
        Stability::LocalMin
    } else {
        Stability::Marginal
    };
    Ok(StabilityVerdict { lambda1, threshold, margin, verdict })
}

/// Height at which λ₁(ω) = 4β/h², i.e. 2√(β/λ₁).
pub fn marginal_height(cross_section: &CrossSection) -> f64 {
    2.0 * (beta_root() / cross_section.lambda1()).sqrt()
}

/// Volume of the unit ball in ℝ^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Shapes with closed-form torsional energy.
#[derive(Debug, Clone, Copy)]
pub enum AnalyticShape {
    /// ω × (−h/2, h/2): energy −|ω|h³/24.
    BoundedCylinder { omega_measure: f64, height: f64 },
    /// 2-D half-disk of area c on a wall: energy −c²/(8π). When the strip
    /// width is supplied the radius √(2c/π) must fit it.
    HalfDisk2d { volume: f64, width: Option<f64> },
    /// Ball of volume c in ℝ^dim: energy −c^{1+2/N} / (2N(N+2)σ_N^{2/N}).
    Ball { volume: f64, dim: usize },
}

/// Closed-form torsional energy of the given shape.
pub fn analytic_energy(shape: AnalyticShape) -> Result<f64> {
    match shape {
        AnalyticShape::BoundedCylinder { omega_measure, height } => {
            if !(omega_measure > 0.0 && height > 0.0) {
                return Err(Error::InvalidParameter(
                    "bounded cylinder needs positive measure and height".into(),
                ));
            }
            Ok(-omega_measure * height.powi(3) / 24.0)
        }
        AnalyticShape::HalfDisk2d { volume, width } => {
            if !(volume > 0.0) {
                return Err(Error::InvalidParameter("half-disk volume must be positive".into()));
            }
            if let Some(a) = width {
                let radius = (2.0 * volume / std::f64::consts::PI).sqrt();
                if radius > a {
                    return Err(Error::InfeasibleGeometry(format!(
                        "half-disk radius {radius} exceeds the strip width {a}"
                    )));
                }
            }
            Ok(-volume * volume / (8.0 * std::f64::consts::PI))
        }
        AnalyticShape::Ball { volume, dim } => {
            if !(volume > 0.0) || dim < 2 {
                return Err(Error::InvalidParameter("ball needs positive volume and dim >= 2".into()));
            }
            let n = dim as f64;
            let sigma = unit_ball_volume(dim);
            Ok(-volume.powf(1.0 + 2.0 / n) / (2.0 * n * (n + 2.0) * sigma.powf(2.0 / n)))
        }
    }
}

/// The 2-D volume 3a²/π at which the half-disk and bounded-cylinder
/// closed-form energies cross.
pub fn crossing_volume_2d(a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("width must be positive, got {a}")));
    }
    Ok(3.0 * a * a / std::f64::consts::PI)
}

/// Free-boundary measure bounds for a minimizer of volume `c`.
#[derive(Debug, Clone, Copy)]
pub struct GammaBounds {
    /// 2√3 · |ω|; c-independent.
    pub large_c_bound: f64,
    /// c^{1−1/N} √(N(N+2)) (σ_N/2)^{1/N}, leading term only. Soft for
    /// moderate c; meaningful as c → 0.
    pub small_c_bound: f64,
}

pub fn gamma_bounds(c: f64, omega_measure: f64, dim: usize) -> Result<GammaBounds> {
    if !(c > 0.0 && omega_measure > 0.0) || dim < 2 {
        return Err(Error::InvalidParameter("gamma_bounds needs positive c, |omega|, dim >= 2".into()));
    }
    let n = dim as f64;
    let sigma = unit_ball_volume(dim);
    Ok(GammaBounds {
        large_c_bound: TWO_SQRT3 * omega_measure,
        small_c_bound: c.powf(1.0 - 1.0 / n) * (n * (n + 2.0)).sqrt() * (sigma / 2.0).powf(1.0 / n),
    })
}

/// The two routes to the overdetermined constant C₀ and their consistency.
#[derive(Debug, Clone, Copy)]
pub struct C0Relations {
    /// (c / H^{N−1}(Γ))².
    pub identity: f64,
    /// 2|E|/c.
    pub lower: f64,
    /// identity ≥ lower − rel_tol·lower.
    pub consistent: bool,
}

pub fn c0_relations(c: f64, energy: f64, gamma_length: f64, rel_tol: f64) -> Result<C0Relations> {
    if !(gamma_length > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma length must be positive, got {gamma_length}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("volume must be positive, got {c}")));
    }
    let identity = (c / gamma_length).powi(2);
    let lower = 2.0 * energy.abs() / c;
    Ok(C0Relations {
        identity,
        lower,
        consistent: identity >= lower * (1.0 - rel_tol),
    })
}

/// Relative deviation of a (half-cylinder, full-cylinder) energy pair from
/// O_half = ½·O_full.
pub fn halfcylinder_relation(o_half: f64, o_full_at_doubled_volume: f64) -> Result<f64> {
    let expect = 0.5 * o_full_at_doubled_volume;
    if expect == 0.0 {
        return Err(Error::InvalidParameter("full-cylinder energy is zero".into()));
    }
    Ok((o_half - expect).abs() / expect.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn beta_bracket_and_value() {
        assert!(beta_fn(1.0) < 0.0);
        assert!(beta_fn(2.0) > 0.0);
        let beta = beta_root();
        assert!(beta_fn(beta).abs() < 1e-12);
        assert!((1.4390..=1.4395).contains(&beta), "beta = {beta}");
        assert_relative_eq!(beta, 1.4392, epsilon = 5e-5);
    }

    #[test]
    fn beta_is_unique_root_on_bracket() {
        // √s tanh √s is strictly increasing, so the sign changes exactly once
        let mut last = beta_fn(1.0);
        let mut flips = 0;
        for k in 1..=200 {
            let s = 1.0 + k as f64 / 200.0;
            let v = beta_fn(s);
            assert!(v > last, "not increasing at s = {s}");
            if last < 0.0 && v >= 0.0 {
                flips += 1;
            }
            last = v;
        }
        assert_eq!(flips, 1);
    }

    #[test]
    fn stability_examples() {
        let cs = CrossSection::interval(1.0).unwrap();
        let v = stability_classify(&cs, 0.5).unwrap();
        assert_eq!(v.verdict, Stability::NotLocalMin);
        assert_relative_eq!(v.threshold, 23.028, epsilon = 1e-2);
        let v = stability_classify(&cs, 1.0).unwrap();
        assert_eq!(v.verdict, Stability::LocalMin);
        assert_relative_eq!(v.threshold, 5.7569, epsilon = 1e-3);
        let marginal = marginal_height(&cs);
        let v = stability_classify(&cs, marginal).unwrap();
        assert_eq!(v.verdict, Stability::Marginal);
        assert_relative_eq!(marginal, 2.0 * beta_root().sqrt() / PI, epsilon = 1e-6);
    }

    #[test]
    fn stability_is_scale_consistent() {
        // classify(a, h) = classify(s·a, s·h): both sides scale as 1/s²
        for &(a, h) in &[(1.0, 0.5), (1.0, 1.0), (2.0, 1.2), (0.7, 0.76)] {
            for &s in &[0.5, 2.0, 3.7] {
                let base = stability_classify(&CrossSection::interval(a).unwrap(), h).unwrap();
                let scaled =
                    stability_classify(&CrossSection::interval(s * a).unwrap(), s * h).unwrap();
                assert_eq!(base.verdict, scaled.verdict, "a={a} h={h} s={s}");
            }
        }
    }

    #[test]
    fn analytic_energies() {
        let e = analytic_energy(AnalyticShape::BoundedCylinder { omega_measure: 1.0, height: 1.0 })
            .unwrap();
        assert_relative_eq!(e, -1.0 / 24.0);
        let e = analytic_energy(AnalyticShape::HalfDisk2d { volume: 0.5, width: None }).unwrap();
        assert_relative_eq!(e, -0.25 / (8.0 * PI));
        let e = analytic_energy(AnalyticShape::Ball { volume: PI / 4.0, dim: 2 }).unwrap();
        assert_relative_eq!(e, -PI / 256.0, epsilon = 1e-15);
        assert!(analytic_energy(AnalyticShape::HalfDisk2d { volume: 2.0, width: Some(1.0) }).is_err());
    }

    #[test]
    fn bounded_cylinder_energy_monotone_and_cubic() {
        let e = |h: f64| {
            analytic_energy(AnalyticShape::BoundedCylinder { omega_measure: 1.0, height: h }).unwrap()
        };
        let mut last = 0.0;
        for k in 1..=20 {
            let h = k as f64 / 10.0;
            let now = e(h);
            assert!(now < last);
            assert_relative_eq!(e(2.0 * h), 8.0 * now, max_relative = 1e-12);
            last = now;
        }
    }

    #[test]
    fn crossing_volume_values() {
        assert_relative_eq!(crossing_volume_2d(1.0).unwrap(), 3.0 / PI);
        assert_relative_eq!(crossing_volume_2d(2.0).unwrap(), 12.0 / PI);
        // at the crossing the two closed forms agree to 12 digits
        let a = 1.0;
        let c = crossing_volume_2d(a).unwrap();
        let half = analytic_energy(AnalyticShape::HalfDisk2d { volume: c, width: None }).unwrap();
        let rect = analytic_energy(AnalyticShape::BoundedCylinder {
            omega_measure: a,
            height: c / a,
        })
        .unwrap();
        assert!((half - rect).abs() <= 1e-12 * rect.abs());
    }

    #[test]
    fn crossing_orders_the_two_branches() {
        let a = 1.0;
        let cstar = crossing_volume_2d(a).unwrap();
        for k in 1..=40 {
            let c = 0.05 * k as f64;
            if (c - cstar).abs() < 0.02 {
                continue;
            }
            let half = analytic_energy(AnalyticShape::HalfDisk2d { volume: c, width: None }).unwrap();
            let rect = analytic_energy(AnalyticShape::BoundedCylinder {
                omega_measure: a,
                height: c / a,
            })
            .unwrap();
            if c < cstar {
                assert!(half < rect, "c={c}");
            } else {
                assert!(half > rect, "c={c}");
            }
        }
    }

    #[test]
    fn gamma_bound_values() {
        let b = gamma_bounds(1.0, 1.0, 2).unwrap();
        assert_relative_eq!(b.large_c_bound, 2.0 * 3.0f64.sqrt(), epsilon = 1e-12);
        let b = gamma_bounds(0.01, 1.0, 2).unwrap();
        assert_relative_eq!(b.small_c_bound, 2.0 * (PI * 0.01).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(b.small_c_bound, 0.354491, epsilon = 1e-6);
        // the half-disk arc obeys the small-c bound
        let arc = (2.0 * PI * 0.01f64).sqrt();
        assert!(arc <= b.small_c_bound);
    }

    #[test]
    fn c0_relation_examples() {
        // flat cylinder a=1, h=1
        let r = c0_relations(1.0, -1.0 / 24.0, 2.0, 0.0).unwrap();
        assert_relative_eq!(r.identity, 0.25);
        assert_relative_eq!(r.lower, 1.0 / 12.0);
        assert!(r.consistent);
        // half-disk of volume c
        let c = 0.3;
        let gamma = (2.0 * PI * c).sqrt();
        let e = -c * c / (8.0 * PI);
        let r = c0_relations(c, e, gamma, 0.0).unwrap();
        assert_relative_eq!(r.identity, c / (2.0 * PI), epsilon = 1e-14);
        assert_relative_eq!(r.lower, c / (4.0 * PI), epsilon = 1e-14);
        assert!(r.consistent);
        assert!(c0_relations(1.0, -1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn halfcylinder_relation_examples() {
        let d = halfcylinder_relation(-0.020833333333333332, -0.041666666666666664).unwrap();
        assert!(d < 1e-12);
        let d = halfcylinder_relation(-0.5 * 1.1, -1.0).unwrap();
        assert_relative_eq!(d, 0.10, epsilon = 1e-12);
        assert!(halfcylinder_relation(-0.1, 0.0).is_err());
    }
}
