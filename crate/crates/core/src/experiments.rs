//! End-to-end experiments: difference quotients along non-tangential rays
//! and tangential curves, and sweeps of the functionals
//! `L_x(f) = f(x)/(x - x0) - Df` across a gallery.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::criterion::RoadrunnerFamily;
use crate::error::{Error, Result};
use crate::geometry::{dyadic_radius, verify_interior_cone, Point, Ray, Region, SwissCheeseDomain};
use crate::lipschitz::{seminorm_estimate, GalleryFunction};

pub const DEFAULT_LIMIT_TOL: f64 = 1e-3;
/// Deviations below this are treated as exact zeros.
pub const NOISE_FLOOR: f64 = 1e-12;
const TAIL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LimitVerdict {
    Converged,
    NotConverged,
    Inconclusive,
}

impl LimitVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            LimitVerdict::Converged => "CONVERGED",
            LimitVerdict::NotConverged => "NOT_CONVERGED",
            LimitVerdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitSample {
    pub scale_index: u32,
    pub x: Point,
    pub quotient: Complex64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitExperimentReport {
    /// Ordered by decreasing `|x - x0|`.
    pub samples: Vec<LimitSample>,
    pub derivative_value: Complex64,
    pub estimated_limit: Complex64,
    /// Slope of `log deviation` against `log |x - x0|` over the last samples;
    /// infinite when the deviations are at the noise floor.
    pub convergence_order: f64,
    pub verdict: LimitVerdict,
}

impl LimitExperimentReport {
    pub fn final_deviation(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.deviation)
    }

    /// Final deviation divided by `|Df|`, or absolute when `Df = 0`.
    pub fn relative_final_deviation(&self) -> f64 {
        let scale = self.derivative_value.norm();
        let d = self.final_deviation();
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    }
}

/// Curve `base + e^{iθ}(t + i c t²)`, `0 < t <= length`, tangent to the
/// direction `θ` at the base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproachCurve {
    pub base: Point,
    pub direction: f64,
    pub curvature: f64,
    pub length: f64,
}

impl ApproachCurve {
    pub fn point(&self, t: f64) -> Point {
        self.base + Point::from_polar(1.0, self.direction) * Complex64::new(t, self.curvature * t * t)
    }

    pub fn dyadic_point(&self, j: u32) -> Point {
        self.point(self.length * dyadic_radius(j))
    }
}

/// Parabola running along the family's axis just above its holes, so the
/// distance to the boundary is `o(|x - x0|)` along the curve.
pub fn hugging_curve(family: &RoadrunnerFamily, length: f64) -> Result<ApproachCurve> {
    let last = family.truncation.max(family.first_index);
    let curvature = (family.first_index..=last)
        .map(|n| 2.0 * family.hole_radius(n) / family.center_distance(n).powi(2))
        .fold(0.0, f64::max);
    if !(length > 0.0) {
        return Err(Error::InvalidArgument("curve length must be positive".into()));
    }
    Ok(ApproachCurve {
        base: Point::new(0.0, 0.0),
        direction: family.angle,
        curvature,
        length,
    })
}

fn evaluate_samples(f: &GalleryFunction, x0: Point, points: &[(u32, Point)], df: Complex64) -> Result<Vec<LimitSample>> {
    points
        .par_iter()
        .map(|&(j, x)| {
            let quotient = f.eval(x)? / (x - x0);
            if !quotient.is_finite() {
                return Err(Error::NonFinite(x));
            }
            Ok(LimitSample {
                scale_index: j,
                x,
                quotient,
                deviation: (quotient - df).norm(),
            })
        })
        .collect()
}

fn fit_order(samples: &[LimitSample], x0: Point) -> f64 {
    let tail = &samples[samples.len().saturating_sub(TAIL)..];
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|s| s.deviation > NOISE_FLOOR)
        .map(|s| ((s.x - x0).norm().ln(), s.deviation.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::INFINITY
    } else {
        sxy / sxx
    }
}

fn summarize(samples: Vec<LimitSample>, df: Complex64, x0: Point, limit_tol: f64) -> LimitExperimentReport {
    let estimated_limit = match samples.as_slice() {
        [.., prev, last] => 2.0 * last.quotient - prev.quotient,
        [last] => last.quotient,
        [] => Complex64::new(f64::NAN, f64::NAN),
    };
    let convergence_order = fit_order(&samples, x0);
    let verdict = if samples.len() < TAIL {
        LimitVerdict::Inconclusive
    } else {
        let tail = &samples[samples.len() - TAIL..];
        let monotone = tail
            .windows(2)
            .all(|w| w[1].deviation < w[0].deviation || w[1].deviation <= NOISE_FLOOR);
        let scale = if df.norm() > 0.0 { df.norm() } else { 1.0 };
        let final_ok = tail[TAIL - 1].deviation <= limit_tol * scale;
        if monotone && final_ok {
            LimitVerdict::Converged
        } else {
            LimitVerdict::NotConverged
        }
    };
    LimitExperimentReport {
        samples,
        derivative_value: df,
        estimated_limit,
        convergence_order,
        verdict,
    }
}

/// Difference quotients at `x_j = x0 + length 2^{-j} e^{iθ}`, `j = 0..=scales`,
/// compared with the closed-form derivative at the base point.
pub fn nontangential_limit(
    f: &GalleryFunction,
    domain: &SwissCheeseDomain,
    ray: &Ray,
    scales: u32,
    limit_tol: f64,
) -> Result<LimitExperimentReport> {
    if !(limit_tol > 0.0) {
        return Err(Error::InvalidArgument("limit_tol must be positive".into()));
    }
    verify_interior_cone(domain, ray, scales as usize + 1)?;
    f.check_analytic_on(domain)?;
    let x0 = domain.base_point();
    let df = f.derivative(x0)?;
    let points: Vec<(u32, Point)> = (0..=scales).map(|j| (j, ray.dyadic_point(j))).collect();
    let samples = evaluate_samples(f, x0, &points, df)?;
    Ok(summarize(samples, df, x0, limit_tol))
}

/// Same tabulation along an approach curve. The verdict is descriptive.
pub fn tangential_probe(
    f: &GalleryFunction,
    domain: &SwissCheeseDomain,
    curve: &ApproachCurve,
    scales: u32,
    limit_tol: f64,
) -> Result<LimitExperimentReport> {
    let x0 = domain.base_point();
    if (curve.base - x0).norm() > 1e-12 {
        return Err(Error::InvalidArgument("curve must end at the base point".into()));
    }
    // Check the curve between consecutive dyadic samples too.
    const SUB: u32 = 8;
    for j in 0..=scales {
        let hi = curve.length * dyadic_radius(j);
        for s in 0..SUB {
            let t = hi * (1.0 - 0.5 * s as f64 / SUB as f64);
            let z = curve.point(t);
            if !domain.contains(z) {
                return Err(Error::OutsideDomain(z));
            }
        }
    }
    f.check_analytic_on(domain)?;
    let df = f.derivative(x0)?;
    let points: Vec<(u32, Point)> = (0..=scales).map(|j| (j, curve.dyadic_point(j))).collect();
    let samples = evaluate_samples(f, x0, &points, df)?;
    Ok(summarize(samples, df, x0, limit_tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub alpha: f64,
    pub pair_count: usize,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            alpha: 0.5,
            pair_count: 4000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepEntry {
    pub function_index: usize,
    pub scale_index: u32,
    pub x: Point,
    /// `|L_x(f)|`.
    pub functional: f64,
    pub seminorm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalSweepReport {
    pub entries: Vec<SweepEntry>,
    pub max_ratio: f64,
    /// Functions whose seminorm estimate was zero.
    pub skipped: Vec<usize>,
    /// Largest ratio over the last five scales divided by the largest ratio
    /// over the earlier ones.
    pub tail_growth: f64,
    /// Set when the tail maximum exceeds the earlier maximum by more than 10%.
    pub growth_flag: bool,
}

/// `L_x(f) = f(x)/(x - x0) - Df` along the ray for every gallery function,
/// normalised by the seminorm of `f` on the domain.
pub fn functional_sweep(
    gallery: &[GalleryFunction],
    domain: &SwissCheeseDomain,
    ray: &Ray,
    scales: u32,
    opts: &SweepOptions,
) -> Result<FunctionalSweepReport> {
    verify_interior_cone(domain, ray, scales as usize + 1)?;
    let x0 = domain.base_point();
    let region = Region::Domain(domain.clone());
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (i, f) in gallery.iter().enumerate() {
        f.check_analytic_on(domain)?;
        let seminorm = seminorm_estimate(f, &region, opts.alpha, opts.pair_count, opts.seed)?.value;
        if seminorm == 0.0 {
            skipped.push(i);
            continue;
        }
        let df = f.derivative(x0)?;
        let points: Vec<(u32, Point)> = (0..=scales).map(|j| (j, ray.dyadic_point(j))).collect();
        for s in evaluate_samples(f, x0, &points, df)? {
            entries.push(SweepEntry {
                function_index: i,
                scale_index: s.scale_index,
                x: s.x,
                functional: s.deviation,
                seminorm,
                ratio: s.deviation / seminorm,
            });
        }
    }
    let max_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    if !max_ratio.is_finite() {
        return Err(Error::NonFinite(Complex64::new(max_ratio, 0.0)));
    }
    let cut = scales.saturating_sub(TAIL as u32 - 1);
    let early = entries.iter().filter(|e| e.scale_index < cut).map(|e| e.ratio).fold(0.0, f64::max);
    let late = entries.iter().filter(|e| e.scale_index >= cut).map(|e| e.ratio).fold(0.0, f64::max);
    let tail_growth = if early > 0.0 { late / early } else if late > 0.0 { f64::INFINITY } else { 0.0 };
    Ok(FunctionalSweepReport {
        entries,
        max_ratio,
        skipped,
        tail_growth,
        growth_flag: tail_growth > 1.1,
    })
}
