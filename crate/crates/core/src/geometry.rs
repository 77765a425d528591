//! Planar geometry of Swiss-cheese domains.
//!
//! A domain is an open disk with finitely many closed disks ("holes")
//! removed, together with a distinguished boundary point `base_point`.
//! Dyadic annuli around the base point, interior cones and rays live here
//! as well, since every other module queries them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::criterion::RoadrunnerFamily;
use crate::error::{Error, Result};

/// A point of the complex plane.
pub type Point = Complex64;

const BOUNDARY_EPS: f64 = 1e-12;

fn check_finite(z: Point, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} has a non-finite coordinate")))
    }
}

/// Axis-aligned box `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        BBox { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn intersect(&self, other: &BBox) -> Option<BBox> {
        let b = BBox::new(
            self.x0.max(other.x0),
            self.y0.max(other.y0),
            self.x1.min(other.x1),
            self.y1.min(other.y1),
        );
        (b.x0 <= b.x1 && b.y0 <= b.y1).then_some(b)
    }

    /// Distance from `z` to the closest point of the box (0 inside).
    pub fn min_distance(&self, z: Point) -> f64 {
        let dx = (self.x0 - z.re).max(0.0).max(z.re - self.x1);
        let dy = (self.y0 - z.im).max(0.0).max(z.im - self.y1);
        dx.hypot(dy)
    }

    /// Distance from `z` to the farthest corner of the box.
    pub fn max_distance(&self, z: Point) -> f64 {
        let dx = (z.re - self.x0).abs().max((z.re - self.x1).abs());
        let dy = (z.im - self.y0).abs().max((z.im - self.y1).abs());
        dx.hypot(dy)
    }
}

/// Closed or open disk depending on the query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        check_finite(center, "disk center")?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Ok(Disk { center, radius })
    }

    pub fn unit() -> Self {
        Disk {
            center: Point::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains_open(&self, z: Point) -> bool {
        (z - self.center).norm() < self.radius
    }

    pub fn contains_closed(&self, z: Point) -> bool {
        (z - self.center).norm() <= self.radius
    }

    /// True when the closed disks share at least one point.
    pub fn meets(&self, other: &Disk) -> bool {
        (self.center - other.center).norm() <= self.radius + other.radius
    }

    /// True when the closed disk `other` lies inside this closed disk.
    pub fn contains_disk(&self, other: &Disk) -> bool {
        (self.center - other.center).norm() + other.radius <= self.radius
    }

    pub fn bbox(&self) -> BBox {
        BBox::new(
            self.center.re - self.radius,
            self.center.im - self.radius,
            self.center.re + self.radius,
            self.center.im + self.radius,
        )
    }

    pub fn point_at(&self, angle: f64) -> Point {
        self.center + Point::from_polar(self.radius, angle)
    }

    /// Image under `z -> pivot + lambda (z - pivot)`.
    pub fn scaled(&self, pivot: Point, lambda: f64) -> Disk {
        Disk {
            center: pivot + (self.center - pivot) * lambda,
            radius: self.radius * lambda,
        }
    }
}

/// Closed annulus `inner <= |z - center| <= outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub center: Point,
    pub inner: f64,
    pub outer: f64,
}

impl Annulus {
    /// The dyadic annulus `2^{-n-1} <= |z - center| <= 2^{-n}`.
    pub fn dyadic(center: Point, n: AnnulusIndex) -> Self {
        let outer = dyadic_radius(n.get());
        Annulus {
            center,
            inner: outer * 0.5,
            outer,
        }
    }

    pub fn contains(&self, z: Point) -> bool {
        let d = (z - self.center).norm();
        self.inner <= d && d <= self.outer
    }

    pub fn width(&self) -> f64 {
        self.outer - self.inner
    }
}

/// `2^{-n}` for integer `n`.
pub fn dyadic_radius(n: u32) -> f64 {
    (-(n as f64)).exp2()
}

/// Index `n >= 1` of a dyadic annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnnulusIndex(u32);

impl AnnulusIndex {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("annulus index must be >= 1".into()));
        }
        Ok(AnnulusIndex(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Why the base point belongs to the boundary of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasePointKind {
    /// Removed explicitly; the domain is punctured there.
    Puncture,
    /// Holes of a generating family accumulate at the base point.
    Accumulation,
    /// The base point lies on the outer circle.
    OuterBoundary,
}

/// Open outer disk minus finitely many closed, pairwise disjoint holes,
/// with a designated boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct SwissCheeseDomain {
    outer: Disk,
    holes: Vec<Disk>,
    base_point: Point,
    base_kind: BasePointKind,
    family: Option<RoadrunnerFamily>,
}

impl SwissCheeseDomain {
    /// The unit disk punctured at the origin.
    pub fn punctured_disk() -> Self {
        SwissCheeseDomain {
            outer: Disk::unit(),
            holes: Vec::new(),
            base_point: Point::new(0.0, 0.0),
            base_kind: BasePointKind::Puncture,
            family: None,
        }
    }

    /// Builds and validates a domain.
    ///
    /// When the base point lies on the outer circle it is a boundary point
    /// already; otherwise it must lie in the open outer disk and `puncture`
    /// must be set so that the point is removed.
    pub fn new(outer: Disk, holes: Vec<Disk>, base_point: Point, puncture: bool) -> Result<Self> {
        check_finite(base_point, "base point")?;
        let d = (base_point - outer.center).norm();
        let base_kind = if (d - outer.radius).abs() <= BOUNDARY_EPS * outer.radius.max(1.0) {
            BasePointKind::OuterBoundary
        } else if d < outer.radius && puncture {
            BasePointKind::Puncture
        } else if d < outer.radius {
            return Err(Error::InvalidDomain(
                "base point lies in the open domain; it must be punctured or lie on the outer circle"
                    .into(),
            ));
        } else {
            return Err(Error::InvalidDomain("base point lies outside the outer disk".into()));
        };
        let domain = SwissCheeseDomain {
            outer,
            holes,
            base_point,
            base_kind,
            family: None,
        };
        domain.validate()?;
        Ok(domain)
    }

    /// Domain generated by a hole family accumulating at the base point.
    pub(crate) fn from_family(
        outer: Disk,
        holes: Vec<Disk>,
        base_point: Point,
        family: RoadrunnerFamily,
    ) -> Result<Self> {
        let domain = SwissCheeseDomain {
            outer,
            holes,
            base_point,
            base_kind: BasePointKind::Accumulation,
            family: Some(family),
        };
        if !outer.contains_open(base_point) {
            return Err(Error::InvalidDomain(
                "accumulation point must lie in the open outer disk".into(),
            ));
        }
        domain.validate()?;
        Ok(domain)
    }

    fn validate(&self) -> Result<()> {
        for (i, h) in self.holes.iter().enumerate() {
            let reach = (h.center - self.outer.center).norm() + h.radius;
            if reach >= self.outer.radius {
                return Err(Error::InvalidDomain(format!(
                    "hole {i} is not inside the open outer disk"
                )));
            }
            if h.contains_closed(self.base_point) {
                return Err(Error::InvalidDomain(format!("hole {i} contains the base point")));
            }
            for (j, g) in self.holes.iter().enumerate().skip(i + 1) {
                if h.meets(g) {
                    return Err(Error::InvalidDomain(format!("holes {i} and {j} intersect")));
                }
            }
        }
        Ok(())
    }

    pub fn outer(&self) -> &Disk {
        &self.outer
    }

    pub fn holes(&self) -> &[Disk] {
        &self.holes
    }

    pub fn base_point(&self) -> Point {
        self.base_point
    }

    pub fn base_kind(&self) -> BasePointKind {
        self.base_kind
    }

    pub fn family(&self) -> Option<&RoadrunnerFamily> {
        self.family.as_ref()
    }

    fn base_is_removed(&self) -> bool {
        matches!(
            self.base_kind,
            BasePointKind::Puncture | BasePointKind::Accumulation
        )
    }

    /// Membership in the open set U.
    pub fn contains(&self, z: Point) -> bool {
        if !self.outer.contains_open(z) {
            return false;
        }
        if self.base_is_removed() && z == self.base_point {
            return false;
        }
        self.holes.iter().all(|h| (z - h.center).norm() > h.radius)
    }

    /// Distance from `z` to the boundary of U.
    pub fn boundary_distance(&self, z: Point) -> Result<f64> {
        if !self.contains(z) {
            return Err(Error::OutsideDomain(z));
        }
        let mut d = self.outer.radius - (z - self.outer.center).norm();
        for h in &self.holes {
            d = d.min((z - h.center).norm() - h.radius);
        }
        if self.base_is_removed() {
            d = d.min((z - self.base_point).norm());
        }
        Ok(d)
    }

    /// The pieces `hole ∩ A_n` for every hole meeting the dyadic annulus
    /// around the base point in a set of positive area.
    pub fn annulus_complement(&self, n: AnnulusIndex) -> Vec<ClippedDisk> {
        let annulus = Annulus::dyadic(self.base_point, n);
        self.holes
            .iter()
            .enumerate()
            .filter_map(|(index, hole)| {
                let d = (hole.center - self.base_point).norm();
                let meets = d - hole.radius < annulus.outer && d + hole.radius > annulus.inner;
                meets.then(|| {
                    let whole = d - hole.radius >= annulus.inner && d + hole.radius <= annulus.outer;
                    ClippedDisk::new(index, *hole, annulus, whole)
                })
            })
            .collect()
    }

    /// Image under `z -> base + lambda (z - base)`; the family link is dropped.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        let b = self.base_point;
        Ok(SwissCheeseDomain {
            outer: self.outer.scaled(b, lambda),
            holes: self.holes.iter().map(|h| h.scaled(b, lambda)).collect(),
            base_point: b,
            base_kind: self.base_kind,
            family: None,
        })
    }
}

/// `hole ∩ annulus`, kept as the exact pair rather than a polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClippedDisk {
    pub hole_index: usize,
    pub hole: Disk,
    pub annulus: Annulus,
    pub whole: bool,
    bbox: BBox,
}

impl ClippedDisk {
    pub fn new(hole_index: usize, hole: Disk, annulus: Annulus, whole: bool) -> Self {
        let bbox = if whole {
            hole.bbox()
        } else {
            clipped_bbox(&hole, &annulus)
        };
        ClippedDisk {
            hole_index,
            hole,
            annulus,
            whole,
            bbox,
        }
    }

    pub fn whole_disk(hole_index: usize, hole: Disk) -> Self {
        let annulus = Annulus {
            center: hole.center,
            inner: 0.0,
            outer: hole.radius,
        };
        ClippedDisk::new(hole_index, hole, annulus, true)
    }

    pub fn contains(&self, z: Point) -> bool {
        self.hole.contains_closed(z) && self.annulus.contains(z)
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Diameter of a ball known to contain the piece.
    pub fn covering_diameter(&self) -> f64 {
        if self.whole {
            self.hole.diameter()
        } else {
            self.bbox.diagonal().min(self.hole.diameter())
        }
    }

    /// Positive-area overlap test; pieces from distinct disjoint holes, or from
    /// the same hole in distinct annuli, never overlap.
    pub fn overlaps(&self, other: &ClippedDisk) -> bool {
        if !self.hole.meets(&other.hole) {
            return false;
        }
        if self.hole == other.hole {
            let a = &self.annulus;
            let b = &other.annulus;
            return a.center == b.center && a.inner < b.outer && b.inner < a.outer;
        }
        // Distinct holes that meet: fall back to the bounding boxes.
        self.bbox.intersect(&other.bbox).is_some_and(|b| b.width() > 0.0 && b.height() > 0.0)
    }
}

/// Bounding box of `hole ∩ annulus`. Its extremes are arc endpoints (the
/// exact circle intersections) or axis-aligned tangent points, which the
/// sampling grid hits exactly because `K` is a multiple of four.
fn clipped_bbox(hole: &Disk, annulus: &Annulus) -> BBox {
    const K: usize = 2048;
    let mut pts: Vec<Point> = Vec::new();
    let circles = [
        (hole.center, hole.radius),
        (annulus.center, annulus.inner),
        (annulus.center, annulus.outer),
    ];
    let slack = 1e-12;
    let inside = |z: Point| {
        let dh = (z - hole.center).norm();
        let da = (z - annulus.center).norm();
        dh <= hole.radius * (1.0 + slack) + slack
            && da >= annulus.inner * (1.0 - slack) - slack
            && da <= annulus.outer * (1.0 + slack) + slack
    };
    let mut margin: f64 = 0.0;
    for &(c, r) in &circles {
        if r <= 0.0 {
            continue;
        }
        margin = margin.max(1e-12 * r);
        for k in 0..K {
            let z = c + Point::from_polar(r, 2.0 * PI * k as f64 / K as f64);
            if inside(z) {
                pts.push(z);
            }
        }
    }
    for &(c, r) in &circles[1..] {
        if r > 0.0 {
            pts.extend(circle_intersections(hole.center, hole.radius, c, r));
        }
    }
    let hb = hole.bbox();
    if pts.is_empty() {
        return hb;
    }
    let mut b = BBox::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for z in pts {
        b.x0 = b.x0.min(z.re);
        b.y0 = b.y0.min(z.im);
        b.x1 = b.x1.max(z.re);
        b.y1 = b.y1.max(z.im);
    }
    let padded = BBox::new(b.x0 - margin, b.y0 - margin, b.x1 + margin, b.y1 + margin);
    padded.intersect(&hb).unwrap_or(hb)
}

fn circle_intersections(c1: Point, r1: f64, c2: Point, r2: f64) -> Vec<Point> {
    let d = (c2 - c1).norm();
    if d == 0.0 || d > r1 + r2 || d < (r1 - r2).abs() {
        return Vec::new();
    }
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let u = (c2 - c1) / d;
    let p = c1 + u * a;
    let perp = Point::new(-u.im, u.re);
    vec![p + perp * h, p - perp * h]
}

/// A segment `origin + t e^{i direction}`, `0 <= t <= length`, ending at
/// the base point when paired with a domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Point,
    pub direction: f64,
    pub length: f64,
}

impl Ray {
    pub fn new(origin: Point, direction: f64, length: f64) -> Result<Self> {
        check_finite(origin, "ray origin")?;
        if !direction.is_finite() || !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument("ray needs finite direction and positive length".into()));
        }
        Ok(Ray {
            origin,
            direction,
            length,
        })
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.origin + Point::from_polar(t, self.direction)
    }

    /// `origin + length 2^{-j} e^{i direction}`.
    pub fn dyadic_point(&self, j: u32) -> Point {
        self.point_at(self.length * dyadic_radius(j))
    }
}

/// Lower estimate of the cone constant `k` along a ray: the minimum of
/// `dist(x, ∂U) / |x - x0|` over the dyadic samples `x_j`, `j < sample_count`.
/// The segment between the outermost and innermost samples must miss every hole.
pub fn verify_interior_cone(domain: &SwissCheeseDomain, ray: &Ray, sample_count: usize) -> Result<f64> {
    if sample_count < 2 {
        return Err(Error::InvalidArgument("sample_count must be at least 2".into()));
    }
    let x0 = domain.base_point();
    if (ray.origin - x0).norm() > BOUNDARY_EPS {
        return Err(Error::InvalidArgument("ray must start at the base point".into()));
    }
    let near = ray.dyadic_point(sample_count as u32 - 1);
    let far = ray.dyadic_point(0);
    for h in domain.holes() {
        let t = ((h.center - near) * (far - near).conj()).re / (far - near).norm_sqr();
        let closest = near + (far - near) * t.clamp(0.0, 1.0);
        if (closest - h.center).norm() <= h.radius {
            return Err(Error::RayNotInterior(closest));
        }
    }
    let mut k = f64::INFINITY;
    for j in 0..sample_count {
        let x = ray.dyadic_point(j as u32);
        if !domain.contains(x) {
            return Err(Error::RayNotInterior(x));
        }
        let d = domain.boundary_distance(x)?;
        k = k.min(d / (x - x0).norm());
    }
    Ok(k)
}

/// Truncated sector with vertex at the base point, and its cone constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub vertex: Point,
    pub direction: f64,
    pub half_angle: f64,
    pub length: f64,
    pub k: f64,
}

impl ConeSpec {
    pub fn new(vertex: Point, direction: f64, half_angle: f64, length: f64, k: f64) -> Result<Self> {
        check_finite(vertex, "cone vertex")?;
        if !(half_angle > 0.0 && half_angle < PI / 2.0) {
            return Err(Error::InvalidArgument("cone half-angle must lie in (0, pi/2)".into()));
        }
        if !(length > 0.0 && length.is_finite()) || !direction.is_finite() {
            return Err(Error::InvalidArgument("cone length must be positive".into()));
        }
        if !(k > 0.0 && k <= half_angle.sin() * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "cone constant k = {k} must lie in (0, sin(half_angle)]"
            )));
        }
        Ok(ConeSpec {
            vertex,
            direction,
            half_angle,
            length,
            k,
        })
    }

    /// Cone around a ray with `k = sin(half_angle)`.
    pub fn around_ray(ray: &Ray, half_angle: f64, length: f64) -> Result<Self> {
        ConeSpec::new(ray.origin, ray.direction, half_angle, length, half_angle.sin())
    }

    /// Angular distance from `z - vertex` to the axis, in `[0, pi]`.
    pub fn angle_from_axis(&self, z: Point) -> f64 {
        let d = (z - self.vertex).arg() - self.direction;
        let r = d.rem_euclid(2.0 * PI);
        r.min(2.0 * PI - r)
    }

    /// Membership in the closed truncated sector.
    pub fn contains(&self, z: Point) -> bool {
        let r = (z - self.vertex).norm();
        r == 0.0 || (r <= self.length && self.angle_from_axis(z) <= self.half_angle)
    }

    /// Checks by sampling that the closed truncated sector lies in
    /// `U ∪ {vertex}`.
    pub fn verify_in(&self, domain: &SwissCheeseDomain) -> Result<()> {
        const RADIAL: usize = 64;
        const GEOMETRIC: i32 = 40;
        const ANGULAR: usize = 32;
        let mut radii: Vec<f64> = (1..=RADIAL)
            .map(|j| self.length * j as f64 / RADIAL as f64)
            .collect();
        radii.extend((0..GEOMETRIC).map(|i| self.length * (-(i as f64)).exp2()));
        for r in radii {
            for a in 0..=ANGULAR {
                let theta = self.direction - self.half_angle
                    + 2.0 * self.half_angle * a as f64 / ANGULAR as f64;
                let z = self.vertex + Point::from_polar(r, theta);
                if !domain.contains(z) {
                    return Err(Error::ConeNotInterior(z));
                }
            }
        }
        Ok(())
    }
}

/// Regions on which seminorms are sampled and contents measured.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Closed disk.
    Disk(Disk),
    /// Closed annulus with the open sector `|arg(z - c) - direction| < half_angle`
    /// removed; `D_n` of the keyhole decomposition.
    AnnulusMinusSector {
        center: Point,
        inner: f64,
        outer: f64,
        direction: f64,
        half_angle: f64,
    },
    /// Union of closed disks; empty list is the empty set.
    DiskUnion(Vec<Disk>),
    /// The open domain itself.
    Domain(SwissCheeseDomain),
}

impl Region {
    /// `D_n = A_n \ C` for the dyadic annulus around the cone vertex.
    pub fn annular_piece(n: AnnulusIndex, cone: &ConeSpec) -> Region {
        let a = Annulus::dyadic(cone.vertex, n);
        Region::AnnulusMinusSector {
            center: cone.vertex,
            inner: a.inner,
            outer: a.outer,
            direction: cone.direction,
            half_angle: cone.half_angle,
        }
    }

    pub fn contains(&self, z: Point) -> bool {
        match self {
            Region::Disk(d) => d.contains_closed(z),
            Region::AnnulusMinusSector {
                center,
                inner,
                outer,
                direction,
                half_angle,
            } => {
                let w = z - center;
                let r = w.norm();
                if r < *inner || r > *outer {
                    return false;
                }
                let d = (w.arg() - direction).rem_euclid(2.0 * PI);
                d.min(2.0 * PI - d) >= *half_angle
            }
            Region::DiskUnion(ds) => ds.iter().any(|d| d.contains_closed(z)),
            Region::Domain(dom) => dom.contains(z),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Region::DiskUnion(ds) if ds.is_empty())
    }

    pub fn bbox(&self) -> Option<BBox> {
        match self {
            Region::Disk(d) => Some(d.bbox()),
            Region::AnnulusMinusSector { center, outer, .. } => Some(
                Disk {
                    center: *center,
                    radius: *outer,
                }
                .bbox(),
            ),
            Region::DiskUnion(ds) => ds.iter().map(Disk::bbox).reduce(|a, b| {
                BBox::new(a.x0.min(b.x0), a.y0.min(b.y0), a.x1.max(b.x1), a.y1.max(b.y1))
            }),
            Region::Domain(dom) => Some(dom.outer().bbox()),
        }
    }

    /// Upper bound for the diameter.
    pub fn diameter_bound(&self) -> f64 {
        match self {
            Region::Disk(d) => d.diameter(),
            Region::AnnulusMinusSector { outer, .. } => 2.0 * outer,
            Region::Domain(dom) => dom.outer().diameter(),
            Region::DiskUnion(_) => self.bbox().map_or(0.0, |b| b.diagonal()),
        }
    }

    /// Point of the boundary (of the closure) at parameter `u ∈ [0, 1)`,
    /// proportional to arclength.
    pub fn boundary_point(&self, u: f64) -> Option<Point> {
        let u = u.rem_euclid(1.0);
        match self {
            Region::Disk(d) => Some(d.point_at(2.0 * PI * u)),
            Region::AnnulusMinusSector {
                center,
                inner,
                outer,
                direction,
                half_angle,
            } => {
                let span = 2.0 * PI - 2.0 * half_angle;
                let start = direction + half_angle;
                let lens = [outer * span, inner * span, outer - inner, outer - inner];
                let total: f64 = lens.iter().sum();
                let mut s = u * total;
                if s < lens[0] {
                    return Some(center + Point::from_polar(*outer, start + s / outer));
                }
                s -= lens[0];
                if s < lens[1] {
                    return Some(center + Point::from_polar(*inner, start + s / inner));
                }
                s -= lens[1];
                if s < lens[2] {
                    return Some(center + Point::from_polar(inner + s, start));
                }
                s -= lens[2];
                Some(center + Point::from_polar(inner + s.min(lens[3]), direction - half_angle))
            }
            Region::DiskUnion(ds) => {
                if ds.is_empty() {
                    return None;
                }
                let total: f64 = ds.iter().map(|d| d.radius).sum();
                let mut s = u * total;
                for d in ds {
                    if s < d.radius {
                        return Some(d.point_at(2.0 * PI * s / d.radius));
                    }
                    s -= d.radius;
                }
                ds.last().map(|d| d.point_at(0.0))
            }
            Region::Domain(dom) => {
                let circles: Vec<&Disk> = std::iter::once(dom.outer()).chain(dom.holes()).collect();
                let total: f64 = circles.iter().map(|d| d.radius).sum();
                let mut s = u * total;
                for d in &circles {
                    if s < d.radius {
                        // Pull the point slightly into U.
                        let inward = if std::ptr::eq(*d, dom.outer()) { -1.0 } else { 1.0 };
                        let r = d.radius * (1.0 + inward * 1e-12);
                        return Some(d.center + Point::from_polar(r, 2.0 * PI * s / d.radius));
                    }
                    s -= d.radius;
                }
                None
            }
        }
    }

    /// Uniform rejection sample from the region.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Point> {
        let b = self.bbox()?;
        for _ in 0..10_000 {
            let z = Point::new(rng.gen_range(b.x0..=b.x1), rng.gen_range(b.y0..=b.y1));
            if self.contains(z) {
                return Some(z);
            }
        }
        None
    }

    /// Image under `z -> pivot + lambda (z - pivot)`.
    pub fn scaled(&self, pivot: Point, lambda: f64) -> Result<Region> {
        Ok(match self {
            Region::Disk(d) => Region::Disk(d.scaled(pivot, lambda)),
            Region::AnnulusMinusSector {
                center,
                inner,
                outer,
                direction,
                half_angle,
            } => Region::AnnulusMinusSector {
                center: pivot + (center - pivot) * lambda,
                inner: inner * lambda,
                outer: outer * lambda,
                direction: *direction,
                half_angle: *half_angle,
            },
            Region::DiskUnion(ds) => Region::DiskUnion(ds.iter().map(|d| d.scaled(pivot, lambda)).collect()),
            Region::Domain(dom) => {
                if pivot != dom.base_point() {
                    return Err(Error::InvalidArgument("domains scale about their base point".into()));
                }
                Region::Domain(dom.scaled(lambda)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(re: f64, im: f64) -> Point {
        Point::new(re, im)
    }

    fn one_hole(center: f64, radius: f64, base: Point, puncture: bool) -> SwissCheeseDomain {
        let hole = Disk::new(p(center, 0.0), radius).unwrap();
        SwissCheeseDomain::new(Disk::unit(), vec![hole], base, puncture).unwrap()
    }

    #[test]
    fn contains_examples() {
        let d = SwissCheeseDomain::punctured_disk();
        assert!(d.contains(p(0.5, 0.0)));
        assert!(!d.contains(p(1.0, 0.0)));
        assert!(!d.contains(p(0.0, 0.0)));
        let h = one_hole(0.5, 0.25, p(0.0, 0.0), true);
        assert!(!h.contains(p(0.5, 0.0)));
        assert!(!h.contains(p(0.75, 0.0)));
        assert!(h.contains(p(0.76, 0.0)));
    }

    #[test]
    fn boundary_distance_examples() {
        let d = SwissCheeseDomain::punctured_disk();
        assert_abs_diff_eq!(d.boundary_distance(p(-0.25, 0.0)).unwrap(), 0.25, epsilon = 1e-15);

        // Base point on the outer circle: no puncture term.
        let h = one_hole(0.5, 0.25, p(-1.0, 0.0), false);
        assert_eq!(h.base_kind(), BasePointKind::OuterBoundary);
        let oracle = (1.0_f64 - 0.25).min((-0.25_f64 - 0.5).abs() - 0.25);
        assert_abs_diff_eq!(h.boundary_distance(p(-0.25, 0.0)).unwrap(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle, 0.5, epsilon = 1e-15);

        let oracle = (0.2_f64 - 0.5).abs() - 0.25;
        assert_abs_diff_eq!(h.boundary_distance(p(0.2, 0.0)).unwrap(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle, 0.05, epsilon = 1e-12);

        assert!(matches!(h.boundary_distance(p(0.5, 0.0)), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn domain_validation() {
        let unit = Disk::unit();
        let a = Disk::new(p(0.5, 0.0), 0.1).unwrap();
        let b = Disk::new(p(0.65, 0.0), 0.1).unwrap();
        assert!(SwissCheeseDomain::new(unit, vec![a, b], p(0.0, 0.0), true).is_err());
        let big = Disk::new(p(0.5, 0.0), 0.6).unwrap();
        assert!(SwissCheeseDomain::new(unit, vec![big], p(-0.5, 0.0), true).is_err());
        let over_base = Disk::new(p(0.1, 0.0), 0.2).unwrap();
        assert!(SwissCheeseDomain::new(unit, vec![over_base], p(0.0, 0.0), true).is_err());
        assert!(SwissCheeseDomain::new(unit, vec![a], p(0.0, 0.0), false).is_err());
        assert!(SwissCheeseDomain::new(unit, vec![a], p(2.0, 0.0), true).is_err());
    }

    #[test]
    fn base_point_is_a_boundary_point() {
        let d = SwissCheeseDomain::punctured_disk();
        assert!(!d.contains(d.base_point()));
        for j in 1..40 {
            let r = (-(j as f64)).exp2();
            assert!(d.contains(p(-r, 0.0)));
        }
    }

    #[test]
    fn cone_estimates() {
        let d = SwissCheeseDomain::punctured_disk();
        let ray = Ray::new(p(0.0, 0.0), PI, 0.5).unwrap();
        let k = verify_interior_cone(&d, &ray, 20).unwrap();
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-12);

        let through = Ray::new(p(0.0, 0.0), 0.0, 0.5).unwrap();
        let h = one_hole(0.5, 0.1, p(0.0, 0.0), true);
        assert!(matches!(
            verify_interior_cone(&h, &through, 8),
            Err(Error::RayNotInterior(_))
        ));
        assert!(verify_interior_cone(&d, &ray, 1).is_err());
    }

    #[test]
    fn cone_spec_checks() {
        let d = SwissCheeseDomain::punctured_disk();
        let c = ConeSpec::new(p(0.0, 0.0), PI, PI / 6.0, 0.5, 0.5).unwrap();
        c.verify_in(&d).unwrap();
        assert!(ConeSpec::new(p(0.0, 0.0), PI, PI / 6.0, 0.5, 0.6).is_err());
        assert!(ConeSpec::new(p(0.0, 0.0), PI, PI / 2.0, 0.5, 0.1).is_err());
        let h = one_hole(-0.3, 0.05, p(0.0, 0.0), true);
        assert!(matches!(c.verify_in(&h), Err(Error::ConeNotInterior(_))));
        assert!(c.contains(p(-0.4, 0.0)));
        assert!(!c.contains(p(0.1, 0.0)));
    }

    #[test]
    fn annulus_complement_examples() {
        let d = one_hole(0.1875, 0.03125, p(0.0, 0.0), true);
        let pieces = d.annulus_complement(AnnulusIndex::new(2).unwrap());
        assert_eq!(pieces.len(), 1);
        assert!(pieces[0].whole);
        assert!(d.annulus_complement(AnnulusIndex::new(4).unwrap()).is_empty());

        // Straddles |z| = 0.25: hole spans radii [0.2, 0.3].
        let s = one_hole(0.25, 0.05, p(0.0, 0.0), true);
        for n in [1, 2] {
            let pieces = s.annulus_complement(AnnulusIndex::new(n).unwrap());
            assert_eq!(pieces.len(), 1);
            assert!(!pieces[0].whole);
            assert!(pieces[0].covering_diameter() <= 0.1);
            assert!(pieces[0].bbox().width() < 0.06);
        }
        assert!(s.annulus_complement(AnnulusIndex::new(3).unwrap()).is_empty());
        assert!(AnnulusIndex::new(0).is_err());
    }

    #[test]
    fn clipped_bbox_contains_piece() {
        let s = one_hole(0.25, 0.05, p(0.0, 0.0), true);
        let piece = s.annulus_complement(AnnulusIndex::new(1).unwrap())[0];
        let b = piece.bbox();
        // Oracle: dense grid over the hole box.
        let hb = piece.hole.bbox();
        let m = 400;
        for i in 0..=m {
            for j in 0..=m {
                let z = p(
                    hb.x0 + hb.width() * i as f64 / m as f64,
                    hb.y0 + hb.height() * j as f64 / m as f64,
                );
                if piece.contains(z) {
                    assert!(b.min_distance(z) == 0.0, "{z} outside {b:?}");
                }
            }
        }
        // Leftmost point is where |z| = 0.25 meets the hole.
        let theta = 2.0 * (0.05f64 / 0.5).asin();
        assert!((b.x0 - 0.25 * theta.cos()).abs() < 1e-9, "{b:?}");
    }

    #[test]
    fn annular_region_boundary_points_lie_on_closure() {
        let c = ConeSpec::new(p(0.0, 0.0), PI, PI / 6.0, 0.5, 0.5).unwrap();
        let r = Region::annular_piece(AnnulusIndex::new(3).unwrap(), &c);
        for i in 0..200 {
            let z = r.boundary_point(i as f64 / 200.0).unwrap();
            let nudged = Region::AnnulusMinusSector {
                center: p(0.0, 0.0),
                inner: 0.0625 * (1.0 - 1e-9),
                outer: 0.125 * (1.0 + 1e-9),
                direction: PI,
                half_angle: PI / 6.0 * (1.0 - 1e-9),
            };
            assert!(nudged.contains(z), "{z}");
        }
    }

    proptest! {
        #[test]
        fn boundary_distance_ball_lies_in_domain(x in -0.95f64..0.95, y in -0.95f64..0.95, a in 0.0f64..6.3, s in 0.0f64..1.0) {
            let d = one_hole(0.5, 0.2, p(0.0, 0.0), true);
            let z = p(x, y);
            prop_assume!(d.contains(z));
            let r = d.boundary_distance(z).unwrap();
            prop_assert!(r > 0.0);
            let w = z + Point::from_polar(0.5 * r * s, a);
            prop_assert!(d.contains(w));
        }

        #[test]
        fn cone_estimate_is_scale_invariant(lambda in 0.05f64..0.99, dir in 2.0f64..4.2) {
            let d = one_hole(0.5, 0.2, p(0.0, 0.0), true);
            let ray = Ray::new(p(0.0, 0.0), dir, 0.4).unwrap();
            let k1 = verify_interior_cone(&d, &ray, 16).unwrap();
            let ds = d.scaled(lambda).unwrap();
            let rs = Ray::new(p(0.0, 0.0), dir, 0.4 * lambda).unwrap();
            let k2 = verify_interior_cone(&ds, &rs, 16).unwrap();
            prop_assert!((k1 - k2).abs() <= 1e-12 * k1.max(1.0));
        }

        #[test]
        fn annulus_pieces_partition_the_annulus(n in 1u32..5, r in 0.01f64..0.09, c in 0.1f64..0.6, u in 0.0f64..1.0, v in 0.0f64..1.0) {
            let d = one_hole(c, r, p(0.0, 0.0), true);
            let idx = AnnulusIndex::new(n).unwrap();
            let a = Annulus::dyadic(p(0.0, 0.0), idx);
            let pieces = d.annulus_complement(idx);
            // Sample a point of A_n in polar coordinates.
            let z = Point::from_polar(a.inner + (a.outer - a.inner) * u, 2.0 * PI * v);
            let in_piece = pieces.iter().filter(|pc| pc.contains(z)).count();
            let on_hole_circle = ((z - d.holes()[0].center).norm() - r).abs() < 1e-12;
            prop_assume!(!on_hole_circle);
            prop_assert!(in_piece <= 1);
            prop_assert!(in_piece == 1 || d.contains(z) || z == d.base_point());
            for pc in &pieces {
                if pc.contains(z) {
                    prop_assert!(pc.hole.contains_closed(z) && a.contains(z));
                }
            }
        }
    }
}
