//! Keyhole and annular contours around the base point, contour
//! integration, and the numerical checks built on them: the Cauchy
//! representation of the difference quotient, its splitting over the
//! annular pieces `D_n`, the Lipschitz–Cauchy bound and the kernel
//! seminorm growth.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::content::{
    check_alpha, disjoint_disk_content, greedy_cover_upper, ContentEstimate, GreedyOptions, PlaneSet,
};
use crate::error::{Error, Result};
use crate::geometry::{dyadic_radius, AnnulusIndex, BBox, ClippedDisk, ConeSpec, Disk, Point, Region, SwissCheeseDomain};
use crate::lipschitz::{seminorm_estimate, seminorm_of, GalleryFunction};
use crate::quadrature::integrate_adaptive;

const JOIN_TOL: f64 = 1e-12;

/// Arc `center + radius e^{iθ}` for θ from `start` to `end` (clockwise when
/// `end < start`), or a straight segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Primitive {
    Arc {
        center: Point,
        radius: f64,
        start: f64,
        end: f64,
    },
    Segment {
        from: Point,
        to: Point,
    },
}

impl Primitive {
    /// Point at parameter `t ∈ [0, 1]`.
    pub fn point(&self, t: f64) -> Point {
        match *self {
            Primitive::Arc {
                center,
                radius,
                start,
                end,
            } => center + Point::from_polar(radius, start + (end - start) * t),
            Primitive::Segment { from, to } => from + (to - from) * t,
        }
    }

    /// `dz/dt`.
    pub fn derivative(&self, t: f64) -> Complex64 {
        match *self {
            Primitive::Arc {
                radius, start, end, ..
            } => {
                let theta = start + (end - start) * t;
                Complex64::i() * Point::from_polar(radius, theta) * (end - start)
            }
            Primitive::Segment { from, to } => to - from,
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Primitive::Arc {
                radius, start, end, ..
            } => radius * (end - start).abs(),
            Primitive::Segment { from, to } => (to - from).norm(),
        }
    }

    pub fn start_point(&self) -> Point {
        self.point(0.0)
    }

    pub fn end_point(&self) -> Point {
        self.point(1.0)
    }

    pub fn reversed(&self) -> Primitive {
        match *self {
            Primitive::Arc {
                center,
                radius,
                start,
                end,
            } => Primitive::Arc {
                center,
                radius,
                start: end,
                end: start,
            },
            Primitive::Segment { from, to } => Primitive::Segment { from: to, to: from },
        }
    }

    /// Image under `z -> pivot + λ e^{iφ} (z - pivot)`.
    pub fn transformed(&self, pivot: Point, lambda: f64, rotation: f64) -> Primitive {
        let m = Point::from_polar(lambda, rotation);
        let map = |z: Point| pivot + m * (z - pivot);
        match *self {
            Primitive::Arc {
                center,
                radius,
                start,
                end,
            } => Primitive::Arc {
                center: map(center),
                radius: radius * lambda,
                start: start + rotation,
                end: end + rotation,
            },
            Primitive::Segment { from, to } => Primitive::Segment {
                from: map(from),
                to: map(to),
            },
        }
    }

    /// Euclidean distance from `p` to the primitive.
    pub fn distance_to(&self, p: Point) -> f64 {
        match *self {
            Primitive::Arc {
                center,
                radius,
                start,
                end,
            } => {
                let sweep = (end - start).abs();
                let lo = start.min(end);
                let phi = (p - center).arg();
                let inside = sweep >= 2.0 * PI || (phi - lo).rem_euclid(2.0 * PI) <= sweep;
                let ends = (p - self.start_point()).norm().min((p - self.end_point()).norm());
                if inside {
                    ((p - center).norm() - radius).abs().min(ends)
                } else {
                    ends
                }
            }
            Primitive::Segment { from, to } => segment_distance(from, to, p),
        }
    }

    fn start_tangent(&self) -> Complex64 {
        self.derivative(0.0)
    }

    fn end_tangent(&self) -> Complex64 {
        self.derivative(1.0)
    }

    fn polyline(&self, n: usize) -> Vec<Point> {
        (0..=n).map(|i| self.point(i as f64 / n as f64)).collect()
    }
}

fn segment_distance(a: Point, b: Point, p: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn cross(a: Point, b: Point) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    if d1 == 0.0 && d2 == 0.0 {
        // Collinear: overlap of the projections onto the line.
        let dir = p2 - p1;
        let t = |z: Point| ((z - p1) * dir.conj()).re;
        let (a, b) = (t(q1).min(t(q2)), t(q1).max(t(q2)));
        return b >= 0.0 && a <= dir.norm_sqr();
    }
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

/// Piecewise-analytic path made of arcs and segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourPath {
    segments: Vec<Primitive>,
    closed: bool,
    cusp_free: bool,
}

impl ContourPath {
    /// Validates continuity, closure and simplicity, and records whether the
    /// path has a cusp at any junction.
    pub fn new(segments: Vec<Primitive>, closed: bool) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidContour("path has no primitives".into()));
        }
        for w in segments.windows(2) {
            let gap = (w[0].end_point() - w[1].start_point()).norm();
            if gap > JOIN_TOL {
                return Err(Error::InvalidContour(format!("consecutive primitives are {gap:e} apart")));
            }
        }
        let first = segments[0].start_point();
        let last = segments[segments.len() - 1].end_point();
        if closed && (first - last).norm() > JOIN_TOL {
            return Err(Error::InvalidContour("closed path does not return to its start".into()));
        }
        let path = ContourPath {
            cusp_free: true,
            segments,
            closed,
        };
        path.check_simple()?;
        let cusp_free = path.junctions().all(|(a, b)| {
            let (t0, t1) = (a.end_tangent(), b.start_tangent());
            let turn = (t1 / t0).arg().abs();
            turn < PI - 1e-9
        });
        Ok(ContourPath { cusp_free, ..path })
    }

    /// Positively oriented circle.
    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidContour("circle radius must be positive".into()));
        }
        ContourPath::new(
            vec![Primitive::Arc {
                center,
                radius,
                start: 0.0,
                end: 2.0 * PI,
            }],
            true,
        )
    }

    fn junctions(&self) -> impl Iterator<Item = (&Primitive, &Primitive)> {
        let n = self.segments.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (&self.segments[i], &self.segments[(i + 1) % n]))
    }

    fn check_simple(&self) -> Result<()> {
        const N: usize = 96;
        let n = self.segments.len();
        let lines: Vec<Vec<Point>> = self.segments.iter().map(|p| p.polyline(N)).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent_next = j == i + 1;
                let adjacent_wrap = self.closed && i == 0 && j == n - 1;
                for a in 0..N {
                    for b in 0..N {
                        // Skip the polyline pieces that share the junction point.
                        if adjacent_next && a == N - 1 && b == 0 {
                            continue;
                        }
                        if adjacent_wrap && a == 0 && b == N - 1 {
                            continue;
                        }
                        if segments_cross(lines[i][a], lines[i][a + 1], lines[j][b], lines[j][b + 1]) {
                            return Err(Error::InvalidContour(format!(
                                "primitives {i} and {j} intersect"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> &[Primitive] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_cusp_free(&self) -> bool {
        self.cusp_free
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Primitive::length).sum()
    }

    pub fn arc_count(&self) -> usize {
        self.segments.iter().filter(|p| matches!(p, Primitive::Arc { .. })).count()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len() - self.arc_count()
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        self.segments.iter().map(|s| s.distance_to(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn reversed(&self) -> ContourPath {
        ContourPath {
            segments: self.segments.iter().rev().map(Primitive::reversed).collect(),
            closed: self.closed,
            cusp_free: self.cusp_free,
        }
    }

    pub fn transformed(&self, pivot: Point, lambda: f64, rotation: f64) -> ContourPath {
        ContourPath {
            segments: self.segments.iter().map(|s| s.transformed(pivot, lambda, rotation)).collect(),
            closed: self.closed,
            cusp_free: self.cusp_free,
        }
    }

    /// The same closed path started at primitive `k`.
    pub fn rotated_start(&self, k: usize) -> ContourPath {
        let mut segments = self.segments.clone();
        let shift = k % segments.len().max(1);
        segments.rotate_left(shift);
        ContourPath { segments, ..self.clone() }
    }

    /// `(1/2πi) ∮ dz / (z - p)`.
    pub fn winding_number(&self, p: Point) -> Result<f64> {
        let opts = QuadOptions::new(1e-10).with_poles(vec![p], 0.0);
        let r = integrate_contour(self, &|z: Point| 1.0 / (z - p), &opts)?;
        Ok((r.value / (2.0 * PI * Complex64::i())).re)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_intervals: usize,
    pub poles: Vec<Point>,
    pub pole_clearance: f64,
}

impl QuadOptions {
    pub fn new(tol: f64) -> Self {
        QuadOptions {
            tol,
            max_intervals: 4000,
            poles: Vec::new(),
            pole_clearance: 0.0,
        }
    }

    pub fn with_poles(mut self, poles: Vec<Point>, clearance: f64) -> Self {
        self.poles = poles;
        self.pole_clearance = clearance;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// `∮ f(z) dz` along the path, adaptively per primitive with the error
/// budget split in proportion to arclength.
pub fn integrate_contour<F>(path: &ContourPath, f: &F, opts: &QuadOptions) -> Result<QuadratureResult>
where
    F: Fn(Point) -> Complex64 + Sync,
{
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    for &pole in &opts.poles {
        let d = path.distance_to(pole);
        if d <= opts.pole_clearance || d == 0.0 {
            return Err(Error::PoleTooClose {
                pole,
                distance: d,
                clearance: opts.pole_clearance,
            });
        }
    }
    let total = path.length();
    let parts: Vec<Result<(Complex64, f64, usize, bool)>> = path
        .segments
        .par_iter()
        .map(|prim| {
            let share = if total > 0.0 { opts.tol * prim.length() / total } else { opts.tol };
            let bad: Cell<Option<Point>> = Cell::new(None);
            let g = |t: f64| {
                let z = prim.point(t);
                let v = f(z) * prim.derivative(t);
                if !v.is_finite() && bad.get().is_none() {
                    bad.set(Some(z));
                }
                v
            };
            let out = integrate_adaptive(&g, 0.0, 1.0, share, opts.max_intervals);
            if let Some(z) = bad.get() {
                return Err(Error::NonFinite(z));
            }
            Ok((out.value, out.error, out.evaluations, out.converged))
        })
        .collect();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut converged = true;
    for part in parts {
        let (v, e, n, ok) = part?;
        value += v;
        error += e;
        evaluations += n;
        converged &= ok;
    }
    if !converged {
        return Err(Error::ToleranceNotMet {
            best: value,
            error,
            tol: opts.tol,
        });
    }
    Ok(QuadratureResult {
        value,
        error_estimate: error,
        evaluations,
    })
}

/// Distance from `p` to the closed truncated sector of radius `radius`.
fn sector_distance(cone: &ConeSpec, radius: f64, p: Point) -> f64 {
    let r = (p - cone.vertex).norm();
    if cone.angle_from_axis(p) <= cone.half_angle {
        return (r - radius).max(0.0);
    }
    let edge = |a: f64| segment_distance(cone.vertex, cone.vertex + Point::from_polar(radius, a), p);
    edge(cone.direction - cone.half_angle).min(edge(cone.direction + cone.half_angle))
}

/// Positively oriented boundary of `C ∪ B_N`: the sector `C` of radius
/// `2^{-M}` around the cone axis together with the disk `B_N` of radius
/// `2^{-N}` at the vertex.
pub fn build_keyhole(domain: &SwissCheeseDomain, cone: &ConeSpec, n_inner: u32, m_outer: u32) -> Result<ContourPath> {
    if n_inner <= m_outer {
        return Err(Error::InvalidArgument("keyhole needs N > M".into()));
    }
    let outer = dyadic_radius(m_outer);
    let inner = dyadic_radius(n_inner);
    if cone.length < outer {
        return Err(Error::InvalidArgument(format!(
            "cone length {} is shorter than the sector radius 2^-{m_outer}",
            cone.length
        )));
    }
    cone.verify_in(domain)?;
    let v = cone.vertex;
    let a0 = cone.direction - cone.half_angle;
    let a1 = cone.direction + cone.half_angle;
    ContourPath::new(
        vec![
            Primitive::Arc { center: v, radius: outer, start: a0, end: a1 },
            Primitive::Segment {
                from: v + Point::from_polar(outer, a1),
                to: v + Point::from_polar(inner, a1),
            },
            Primitive::Arc { center: v, radius: inner, start: a1, end: a0 + 2.0 * PI },
            Primitive::Segment {
                from: v + Point::from_polar(inner, a0),
                to: v + Point::from_polar(outer, a0),
            },
        ],
        true,
    )
}

/// Positively oriented boundary of `D_n = A_n \ C`.
pub fn build_annular_piece(n: AnnulusIndex, cone: &ConeSpec) -> Result<ContourPath> {
    let outer = dyadic_radius(n.get());
    let inner = 0.5 * outer;
    if outer > cone.length {
        return Err(Error::InvalidArgument(format!(
            "annulus {} extends beyond the cone length",
            n.get()
        )));
    }
    let v = cone.vertex;
    let a0 = cone.direction - cone.half_angle;
    let a1 = cone.direction + cone.half_angle;
    ContourPath::new(
        vec![
            Primitive::Arc { center: v, radius: outer, start: a1, end: a0 + 2.0 * PI },
            Primitive::Segment {
                from: v + Point::from_polar(outer, a0),
                to: v + Point::from_polar(inner, a0),
            },
            Primitive::Arc { center: v, radius: inner, start: a0 + 2.0 * PI, end: a1 },
            Primitive::Segment {
                from: v + Point::from_polar(inner, a1),
                to: v + Point::from_polar(outer, a1),
            },
        ],
        true,
    )
}

/// Checks that no singularity of `f` meets the closed set `C ∪ B` where `C`
/// is the sector of radius `sector_radius` and `B` the disk of radius
/// `disk_radius` at the vertex.
fn check_analytic_on_keyhole(f: &GalleryFunction, cone: &ConeSpec, sector_radius: f64, disk_radius: f64) -> Result<()> {
    let dist = |p: Point| {
        let to_disk = ((p - cone.vertex).norm() - disk_radius).max(0.0);
        to_disk.min(sector_distance(cone, sector_radius, p))
    };
    for p in f.poles() {
        if dist(p) == 0.0 {
            return Err(Error::NotAnalytic(format!("pole {p} lies in the keyhole region")));
        }
    }
    for t in f.ct_terms() {
        if dist(t.disk.center) <= t.disk.radius {
            return Err(Error::NotAnalytic(format!(
                "transform disk at {} meets the keyhole region",
                t.disk.center
            )));
        }
    }
    Ok(())
}

fn check_quotient_point(cone: &ConeSpec, x: Point, inner: f64, outer: f64) -> Result<()> {
    let r = (x - cone.vertex).norm();
    if !(r > inner && r < outer) || cone.angle_from_axis(x) >= cone.half_angle {
        return Err(Error::InvalidArgument(format!(
            "x = {x} must lie inside the cone with {inner:e} < |x - x0| < {outer:e}"
        )));
    }
    Ok(())
}

fn cauchy_kernel<'a>(f: &'a GalleryFunction, vertex: Point, x: Point) -> impl Fn(Point) -> Complex64 + Sync + 'a {
    move |z: Point| match f.eval(z) {
        Ok(v) => v / ((z - vertex) * (z - x)),
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    }
}

/// `(1/2πi) ∮_{∂(C ∪ B_N)} f(z) / ((z - x0)(z - x)) dz`, which equals
/// `f(x) / (x - x0)` when `f(x0) = 0`. The returned error estimate is
/// already divided by `2π`.
pub fn quotient_via_cauchy(
    f: &GalleryFunction,
    x: Point,
    domain: &SwissCheeseDomain,
    cone: &ConeSpec,
    n_inner: u32,
    m_outer: u32,
    tol: f64,
) -> Result<QuadratureResult> {
    let path = build_keyhole(domain, cone, n_inner, m_outer)?;
    let outer = dyadic_radius(m_outer);
    let inner = dyadic_radius(n_inner);
    check_quotient_point(cone, x, inner, outer)?;
    if f.base_point() != cone.vertex {
        return Err(Error::InvalidArgument("function must vanish at the cone vertex".into()));
    }
    check_analytic_on_keyhole(f, cone, outer, inner)?;
    let opts = QuadOptions::new(2.0 * PI * tol).with_poles(vec![cone.vertex, x], inner / 10.0);
    let r = integrate_contour(&path, &cauchy_kernel(f, cone.vertex, x), &opts)?;
    Ok(QuadratureResult {
        value: r.value / (2.0 * PI * Complex64::i()),
        error_estimate: r.error_estimate / (2.0 * PI),
        evaluations: r.evaluations,
    })
}

/// The keyhole integral split as the circle `|z - x0| = 2^{-M}` minus the
/// boundaries of `D_n`, `M <= n < N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    /// `f(x) / (x - x0)`.
    pub lhs: Complex64,
    /// `-(1/2πi) ∮_{∂D_n}` of the kernel, for each `n`.
    pub annular_terms: Vec<(u32, Complex64)>,
    /// `(1/2πi) ∮` of the kernel over the circle of radius `2^{-M}`.
    pub circle_term: Complex64,
    pub residual: f64,
}

impl DecompositionReport {
    pub fn sum(&self) -> Complex64 {
        self.annular_terms.iter().fold(self.circle_term, |acc, (_, t)| acc + t)
    }
}

pub fn annular_decomposition(
    f: &GalleryFunction,
    x: Point,
    domain: &SwissCheeseDomain,
    cone: &ConeSpec,
    m_outer: u32,
    n_inner: u32,
    tol: f64,
) -> Result<DecompositionReport> {
    if n_inner < m_outer {
        return Err(Error::InvalidArgument("decomposition needs M <= N".into()));
    }
    if f.base_point() != cone.vertex {
        return Err(Error::InvalidArgument("function must vanish at the cone vertex".into()));
    }
    let outer = dyadic_radius(m_outer);
    let inner = dyadic_radius(n_inner);
    if n_inner == m_outer {
        if (x - cone.vertex).norm() >= outer || x == cone.vertex {
            return Err(Error::InvalidArgument("x must lie inside the circle".into()));
        }
        check_analytic_on_keyhole(f, cone, 0.0, outer)?;
    } else {
        if cone.length < outer {
            return Err(Error::InvalidArgument("cone is shorter than the sector radius".into()));
        }
        cone.verify_in(domain)?;
        check_quotient_point(cone, x, inner, outer)?;
        check_analytic_on_keyhole(f, cone, outer, inner)?;
    }
    let lhs = f.eval(x)? / (x - cone.vertex);
    let count = (n_inner - m_outer + 1) as f64;
    let opts = QuadOptions::new(2.0 * PI * tol / count).with_poles(vec![cone.vertex, x], inner / 10.0);
    let kernel = cauchy_kernel(f, cone.vertex, x);
    let two_pi_i = 2.0 * PI * Complex64::i();

    let circle = ContourPath::circle(cone.vertex, outer)?;
    let circle_term = integrate_contour(&circle, &kernel, &opts)?.value / two_pi_i;
    let annular_terms = (m_outer..n_inner)
        .into_par_iter()
        .map(|n| {
            let path = build_annular_piece(AnnulusIndex::new(n)?, cone)?;
            let v = integrate_contour(&path, &kernel, &opts)?.value;
            Ok((n, -v / two_pi_i))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = DecompositionReport {
        lhs,
        annular_terms,
        circle_term,
        residual: 0.0,
    };
    report.residual = (lhs - report.sum()).norm();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaCheckReport {
    pub integral_magnitude: f64,
    pub content_upper: f64,
    pub seminorm_estimate: f64,
    pub kappa_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    pub tol: f64,
    pub pair_count: usize,
    pub seed: u64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            tol: 1e-10,
            pair_count: 6000,
            seed: 0,
        }
    }
}

/// `region ∩ disk`, pixelized conservatively.
struct RegionPiece<'a> {
    region: &'a Region,
    disk: Disk,
}

impl PlaneSet for RegionPiece<'_> {
    fn bbox(&self) -> BBox {
        let d = self.disk.bbox();
        self.region.bbox().and_then(|b| b.intersect(&d)).unwrap_or(d)
    }

    fn meets_square(&self, square: &BBox) -> bool {
        if !self.disk.meets_square(square) {
            return false;
        }
        match self.region {
            Region::Disk(d) => d.meets_square(square),
            Region::AnnulusMinusSector { center, inner, outer, .. } => {
                square.min_distance(*center) <= *outer && square.max_distance(*center) >= *inner
            }
            Region::DiskUnion(ds) => ds.iter().any(|d| d.meets_square(square)),
            Region::Domain(dom) => dom.outer().meets_square(square),
        }
    }

    fn covering_diameter(&self) -> f64 {
        self.disk.diameter().min(self.bbox().diagonal())
    }
}

/// Upper content of `region ∩ (union of the transform disks of f)`.
fn support_content(f: &GalleryFunction, region: &Region, alpha: f64) -> Result<ContentEstimate> {
    let disks: Vec<Disk> = f
        .ct_terms()
        .iter()
        .filter(|t| t.weight != Complex64::new(0.0, 0.0))
        .map(|t| t.disk)
        .collect();
    let mut whole = Vec::new();
    let mut partial = Vec::new();
    for d in disks {
        match region {
            Region::Disk(r) if d.contains_disk(r) => whole.push(*r),
            Region::Disk(r) if r.contains_disk(&d) => whole.push(d),
            Region::Disk(r) if !r.meets(&d) => {}
            _ => partial.push(d),
        }
    }
    if partial.is_empty() {
        let pieces: Vec<ClippedDisk> = whole
            .iter()
            .enumerate()
            .map(|(i, d)| ClippedDisk::whole_disk(i, *d))
            .collect();
        if let Ok(est) = disjoint_disk_content(&pieces, alpha) {
            return Ok(est);
        }
    }
    let pieces: Vec<RegionPiece> = whole
        .into_iter()
        .chain(partial)
        .map(|disk| RegionPiece { region, disk })
        .collect();
    greedy_cover_upper(&pieces, alpha, &GreedyOptions::default())
}

/// Measures `|∮ f dz|` against `M^{1+α}(Ω ∩ S) · ||f||'_{Lipα(Ω)}` where
/// `Ω` is the region bounded by the path and `S` the non-analytic support
/// of `f`.
pub fn lemma_cauchy_bound_check(
    f: &GalleryFunction,
    path: &ContourPath,
    region: &Region,
    alpha: f64,
    opts: &SamplingOptions,
) -> Result<LemmaCheckReport> {
    check_alpha(alpha)?;
    if !path.is_closed() || !path.is_cusp_free() {
        return Err(Error::InvalidContour("lemma needs a closed, cusp-free path".into()));
    }
    if let Some(p) = f.poles().find(|p| region.contains(*p)) {
        return Err(Error::NotAnalytic(format!("pole {p} lies inside the region")));
    }
    let q = QuadOptions::new(opts.tol).with_poles(f.poles().collect(), 0.0);
    let integral = integrate_contour(path, &|z: Point| f.eval(z).unwrap_or(Complex64::new(f64::NAN, 0.0)), &q)?;
    let integral_magnitude = integral.value.norm();
    let content_upper = support_content(f, region, alpha)?.upper;
    let seminorm = seminorm_estimate(f, region, alpha, opts.pair_count, opts.seed)?.value;
    let denom = content_upper * seminorm;
    let kappa_hat = if integral_magnitude <= 10.0 * opts.tol {
        0.0
    } else if denom > 0.0 {
        integral_magnitude / denom
    } else {
        f64::INFINITY
    };
    Ok(LemmaCheckReport {
        integral_magnitude,
        content_upper,
        seminorm_estimate: seminorm,
        kappa_hat,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelRatio {
    pub n: u32,
    /// Seminorm of `f(z)/((z - x0)(z - x))` on `D_n`.
    pub kernel_seminorm: f64,
    /// Seminorm of `f` on `D_n`.
    pub local_seminorm: f64,
    /// Seminorm of `f` on the reference region.
    pub global_seminorm: f64,
    /// `kernel_seminorm / (4^n local_seminorm)`.
    pub ratio: f64,
    /// `kernel_seminorm / (4^n global_seminorm)`.
    pub ratio_global: f64,
}

/// Growth of the kernel seminorm on `D_n` relative to `4^n ||f||'`.
pub fn kernel_seminorm_ratio(
    f: &GalleryFunction,
    x: Point,
    n: AnnulusIndex,
    cone: &ConeSpec,
    alpha: f64,
    reference: &Region,
    pair_count: usize,
    seed: u64,
) -> Result<KernelRatio> {
    check_alpha(alpha)?;
    let outer = dyadic_radius(n.get());
    let r = (x - cone.vertex).norm();
    if !(r <= outer / 4.0 || r >= 2.0 * outer) || r == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "|x - x0| = {r:e} must be <= 2^-(n+2) or >= 2^-(n-1)"
        )));
    }
    if f.base_point() != cone.vertex {
        return Err(Error::InvalidArgument("function must vanish at the cone vertex".into()));
    }
    let piece = Region::annular_piece(n, cone);
    let v = cone.vertex;
    let kernel = |z: Point| f.eval(z).ok().map(|w| w / ((z - v) * (z - x)));
    let kernel_seminorm = seminorm_of(kernel, &piece, alpha, pair_count, seed)?.value;
    let local_seminorm = seminorm_estimate(f, &piece, alpha, pair_count, seed)?.value;
    let global_seminorm = seminorm_estimate(f, reference, alpha, pair_count, seed)?.value;
    let weight = 4f64.powi(n.get() as i32);
    let ratio_of = |s: f64| if kernel_seminorm == 0.0 { 0.0 } else { kernel_seminorm / (weight * s) };
    Ok(KernelRatio {
        n: n.get(),
        kernel_seminorm,
        local_seminorm,
        global_seminorm,
        ratio: ratio_of(local_seminorm),
        ratio_global: ratio_of(global_seminorm),
    })
}

/// Sampled check of `|x|/|z - x| <= 1/k` and `1/(|z||z - x|) <= (1 + 1/k)/|z|^2`
/// for `z` on `∂D_n` and `x` on the cone axis, with `z` and `x` measured from
/// the vertex. Returns the largest observed value of `k |x| / |z - x|`.
pub fn cone_kernel_inequality(cone: &ConeSpec, n: AnnulusIndex, xs: &[Point], samples: usize) -> Result<f64> {
    let path = build_annular_piece(n, cone)?;
    let v = cone.vertex;
    let mut worst: f64 = 0.0;
    for prim in path.segments() {
        for i in 0..=samples {
            let z = prim.point(i as f64 / samples as f64) - v;
            for &x in xs {
                let x = x - v;
                let lhs = x.norm() / (z - x).norm();
                worst = worst.max(cone.k * lhs);
                let second = 1.0 / (z.norm() * (z - x).norm());
                let bound = (1.0 + 1.0 / cone.k) / z.norm_sqr();
                if second > bound * (1.0 + 1e-12) {
                    return Err(Error::InvalidArgument(format!("kernel bound fails at z = {z}")));
                }
            }
        }
    }
    Ok(worst)
}
