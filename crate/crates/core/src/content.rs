//! Measure functions and (1+α)-dimensional content estimates of finite
//! unions of clipped disks.
//!
//! Only upper estimates are rigorous here. `lower_heuristic` is a fixed
//! fraction of the disjoint-diameter sum and must never feed a sufficiency
//! claim.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, ClippedDisk, Disk, Point, Region};

/// Fraction of the disjoint diameter sum reported as the heuristic lower bound.
pub const C_LOW: f64 = 0.25;
/// Allowed ratio between `lower_heuristic` and `upper`.
pub const SLACK_FACTOR: f64 = 4.0;
/// Maximum number of pixels for one greedy cover.
pub const DEFAULT_PIXEL_BUDGET: u64 = 1 << 22;
/// Automatic mesh is the piece extent divided by this.
pub const AUTO_MESH_DIVISOR: u32 = 64;

/// `h(t) = t^{1+α} min(1, (t/t0)^ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureFunction {
    pub alpha: f64,
    pub epsilon: f64,
    pub crossover: f64,
}

impl MeasureFunction {
    pub fn new(alpha: f64, epsilon: f64, crossover: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument("epsilon must be nonnegative".into()));
        }
        if !(crossover > 0.0 && crossover.is_finite()) {
            return Err(Error::InvalidArgument("crossover must be positive".into()));
        }
        Ok(MeasureFunction {
            alpha,
            epsilon,
            crossover,
        })
    }

    /// The dominating gauge `t^{1+α}`.
    pub fn power(alpha: f64) -> Result<Self> {
        MeasureFunction::new(alpha, 0.0, 1.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let base = t.powf(1.0 + self.alpha);
        if self.epsilon == 0.0 {
            base
        } else {
            base * (t / self.crossover).powf(self.epsilon).min(1.0)
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Sum in increasing order of magnitude so results do not depend on input order.
pub(crate) fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    terms.into_iter().fold(0.0, |acc, t| acc + t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentMethod {
    ClosedForm,
    GreedyCover,
    DisjointSum,
}

impl ContentMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ContentMethod::ClosedForm => "closed_form",
            ContentMethod::GreedyCover => "greedy_cover",
            ContentMethod::DisjointSum => "disjoint_sum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContentEstimate {
    pub upper: f64,
    pub lower_heuristic: f64,
    pub method: ContentMethod,
}

impl ContentEstimate {
    pub fn zero(method: ContentMethod) -> Self {
        ContentEstimate {
            upper: 0.0,
            lower_heuristic: 0.0,
            method,
        }
    }
}

/// Finite family of closed balls claimed to cover `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    pub balls: Vec<Disk>,
    pub target: Region,
}

impl Cover {
    /// Grid-sampled containment check of the target in the union of balls.
    pub fn validate(&self) -> Result<()> {
        let Some(b) = self.target.bbox() else {
            return Ok(());
        };
        const M: usize = 64;
        let covered = |z: Point| {
            self.balls
                .iter()
                .any(|d| (z - d.center).norm() <= d.radius * (1.0 + 1e-12) + 1e-15)
        };
        let grid = (0..=M).flat_map(|i| {
            (0..=M).map(move |j| {
                Point::new(
                    b.x0 + b.width() * i as f64 / M as f64,
                    b.y0 + b.height() * j as f64 / M as f64,
                )
            })
        });
        let rim = (0..4 * M).filter_map(|i| self.target.boundary_point(i as f64 / (4 * M) as f64));
        for z in grid.chain(rim) {
            if self.target.contains(z) && !covered(z) {
                return Err(Error::InvalidCover(z));
            }
        }
        Ok(())
    }
}

/// `Σ h(diam B)` over the balls of a validated cover.
pub fn cover_content(cover: &Cover, h: &MeasureFunction) -> Result<f64> {
    cover.validate()?;
    Ok(sorted_sum(cover.balls.iter().map(|b| h.eval(b.diameter())).collect()))
}

/// A compact planar set that can be pixelized.
pub trait PlaneSet {
    fn bbox(&self) -> BBox;
    /// Conservative: must be true whenever the closed square meets the set.
    fn meets_square(&self, square: &BBox) -> bool;
    /// Diameter of a ball containing the set.
    fn covering_diameter(&self) -> f64;
}

impl PlaneSet for Disk {
    fn bbox(&self) -> BBox {
        Disk::bbox(self)
    }

    fn meets_square(&self, square: &BBox) -> bool {
        square.min_distance(self.center) <= self.radius
    }

    fn covering_diameter(&self) -> f64 {
        self.diameter()
    }
}

impl PlaneSet for ClippedDisk {
    fn bbox(&self) -> BBox {
        ClippedDisk::bbox(self)
    }

    fn meets_square(&self, square: &BBox) -> bool {
        let a = &self.annulus;
        self.hole.meets_square(square)
            && square.min_distance(a.center) <= a.outer
            && square.max_distance(a.center) >= a.inner
            && square.intersect(&self.bbox()).is_some()
    }

    fn covering_diameter(&self) -> f64 {
        ClippedDisk::covering_diameter(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyOptions {
    /// Largest allowed pixel side; `None` picks extent / 64 per piece.
    pub mesh: Option<f64>,
    pub pixel_budget: u64,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            mesh: None,
            pixel_budget: DEFAULT_PIXEL_BUDGET,
        }
    }
}

/// Upper estimate of `M^{1+α}` of a union of pieces from dyadic-square covers.
///
/// Each piece is pixelized on a dyadic grid anchored at the lower-left
/// corner of its bounding square. Squares are replaced by their
/// circumscribed balls, and a quadtree pass keeps a parent ball whenever it
/// is cheaper than the best cover of its four children. Piece costs are
/// then summed.
pub fn greedy_cover_upper<S: PlaneSet>(pieces: &[S], alpha: f64, opts: &GreedyOptions) -> Result<ContentEstimate> {
    check_alpha(alpha)?;
    if pieces.is_empty() {
        return Ok(ContentEstimate::zero(ContentMethod::GreedyCover));
    }
    if let Some(m) = opts.mesh {
        let smallest = pieces
            .iter()
            .map(|p| p.covering_diameter())
            .fold(f64::INFINITY, f64::min);
        if !(m > 0.0 && m < smallest) {
            return Err(Error::InvalidArgument(format!(
                "mesh {m} must be positive and below the smallest piece diameter {smallest}"
            )));
        }
    }
    let h = MeasureFunction::power(alpha)?;
    let mut levels = Vec::with_capacity(pieces.len());
    let mut requested: u64 = 0;
    for p in pieces {
        let b = p.bbox();
        let side = b.width().max(b.height());
        let mesh = opts.mesh.unwrap_or(side / AUTO_MESH_DIVISOR as f64);
        let k = if side > mesh { (side / mesh).log2().ceil() as u32 } else { 0 };
        if k > 15 {
            return Err(Error::PixelBudget {
                requested: u64::MAX,
                budget: opts.pixel_budget,
            });
        }
        requested = requested.saturating_add(1u64 << (2 * k));
        levels.push(k);
    }
    if requested > opts.pixel_budget {
        return Err(Error::PixelBudget {
            requested,
            budget: opts.pixel_budget,
        });
    }
    let costs: Vec<f64> = pieces
        .iter()
        .zip(levels)
        .map(|(p, k)| quadtree_cost(p, k, &h))
        .collect();
    let lower = C_LOW * sorted_sum(pieces.iter().map(|p| h.eval(p.covering_diameter())).collect());
    Ok(ContentEstimate {
        upper: sorted_sum(costs),
        lower_heuristic: lower,
        method: ContentMethod::GreedyCover,
    })
}

fn quadtree_cost<S: PlaneSet>(piece: &S, k: u32, h: &MeasureFunction) -> f64 {
    let b = piece.bbox();
    let side = b.width().max(b.height());
    if side <= 0.0 {
        return 0.0;
    }
    let g = 1usize << k;
    let pixel = side / g as f64;
    let mut cost = vec![0.0f64; g * g];
    let leaf = h.eval(pixel * std::f64::consts::SQRT_2);
    for i in 0..g {
        for j in 0..g {
            let sq = BBox::new(
                b.x0 + pixel * i as f64,
                b.y0 + pixel * j as f64,
                b.x0 + pixel * (i + 1) as f64,
                b.y0 + pixel * (j + 1) as f64,
            );
            if piece.meets_square(&sq) {
                cost[i * g + j] = leaf;
            }
        }
    }
    let mut size = g;
    let mut square = pixel;
    while size > 1 {
        let half = size / 2;
        square *= 2.0;
        let merged = h.eval(square * std::f64::consts::SQRT_2);
        let mut next = vec![0.0f64; half * half];
        for i in 0..half {
            for j in 0..half {
                let children = [
                    cost[(2 * i) * size + 2 * j],
                    cost[(2 * i + 1) * size + 2 * j],
                    cost[(2 * i) * size + 2 * j + 1],
                    cost[(2 * i + 1) * size + 2 * j + 1],
                ];
                let split: f64 = children.iter().sum();
                next[i * half + j] = if split > 0.0 { split.min(merged) } else { 0.0 };
            }
        }
        cost = next;
        size = half;
    }
    cost[0]
}

/// `Σ (diam piece)^{1+α}` for pairwise disjoint pieces.
pub fn disjoint_disk_content(pieces: &[ClippedDisk], alpha: f64) -> Result<ContentEstimate> {
    check_alpha(alpha)?;
    for (i, a) in pieces.iter().enumerate() {
        for (j, b) in pieces.iter().enumerate().skip(i + 1) {
            if a.overlaps(b) {
                return Err(Error::OverlappingPieces(i, j));
            }
        }
    }
    let h = MeasureFunction::power(alpha)?;
    let upper = sorted_sum(pieces.iter().map(|p| h.eval(p.covering_diameter())).collect());
    Ok(ContentEstimate {
        upper,
        lower_heuristic: C_LOW * upper,
        method: ContentMethod::DisjointSum,
    })
}

/// How the content of annulus pieces is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentMode {
    /// Disjoint sum for disjoint whole disks, greedy otherwise.
    #[default]
    Auto,
    Greedy,
    DisjointSum,
}

pub fn estimate_pieces(pieces: &[ClippedDisk], alpha: f64, mode: ContentMode) -> Result<ContentEstimate> {
    match mode {
        ContentMode::Greedy => greedy_cover_upper(pieces, alpha, &GreedyOptions::default()),
        ContentMode::DisjointSum => disjoint_disk_content(pieces, alpha),
        ContentMode::Auto => {
            if pieces.iter().all(|p| p.whole) {
                match disjoint_disk_content(pieces, alpha) {
                    Err(Error::OverlappingPieces(..)) => {}
                    other => return other,
                }
            }
            greedy_cover_upper(pieces, alpha, &GreedyOptions::default())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Annulus;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn disk(x: f64, y: f64, r: f64) -> Disk {
        Disk::new(Point::new(x, y), r).unwrap()
    }

    fn whole(x: f64, y: f64, r: f64) -> ClippedDisk {
        ClippedDisk::whole_disk(0, disk(x, y, r))
    }

    #[test]
    fn measure_eval_examples() {
        let h = MeasureFunction::power(0.5).unwrap();
        assert_abs_diff_eq!(h.eval(0.25), 0.125, epsilon = 1e-15);
        assert_eq!(h.eval(0.0), 0.0);
        let g = MeasureFunction::new(0.5, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(g.eval(0.25), 0.03125, epsilon = 1e-15);
        assert_eq!(g.eval(0.0), 0.0);
        assert!(MeasureFunction::new(1.0, 0.0, 1.0).is_err());
        assert!(MeasureFunction::new(0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn cover_content_examples() {
        let h = MeasureFunction::power(0.5).unwrap();
        let d = disk(0.0, 0.0, 0.1);
        let one = Cover {
            balls: vec![d],
            target: Region::Disk(d),
        };
        assert_abs_diff_eq!(cover_content(&one, &h).unwrap(), 0.2f64.powf(1.5), epsilon = 1e-15);
        assert_abs_diff_eq!(cover_content(&one, &h).unwrap(), 0.08944, epsilon = 1e-5);
        let e = disk(1.0, 0.0, 0.1);
        let two = Cover {
            balls: vec![d, e],
            target: Region::DiskUnion(vec![d, e]),
        };
        assert_abs_diff_eq!(cover_content(&two, &h).unwrap(), 0.17889, epsilon = 1e-5);
        let empty = Cover {
            balls: vec![],
            target: Region::DiskUnion(vec![]),
        };
        assert_eq!(cover_content(&empty, &h).unwrap(), 0.0);
        let bad = Cover {
            balls: vec![d],
            target: Region::DiskUnion(vec![d, e]),
        };
        assert!(matches!(cover_content(&bad, &h), Err(Error::InvalidCover(_))));
    }

    #[test]
    fn disjoint_content_examples() {
        let r = 0.03125;
        let est = disjoint_disk_content(&[whole(0.5, 0.0, r)], 0.5).unwrap();
        assert_abs_diff_eq!(est.upper, 0.0625f64.powf(1.5), epsilon = 1e-16);
        assert_abs_diff_eq!(est.upper, 0.015625, epsilon = 1e-16);
        assert_eq!(est.method, ContentMethod::DisjointSum);
        let empty = disjoint_disk_content(&[], 0.5).unwrap();
        assert_eq!((empty.upper, empty.lower_heuristic), (0.0, 0.0));
        let many: Vec<_> = (0..7).map(|i| whole(0.1 * i as f64, 0.0, 0.02)).collect();
        let est = disjoint_disk_content(&many, 0.5).unwrap();
        assert_relative_eq!(est.upper, 7.0 * 0.04f64.powf(1.5), max_relative = 1e-14);
        let clash = [
            ClippedDisk::whole_disk(0, disk(0.0, 0.0, 0.1)),
            ClippedDisk::whole_disk(1, disk(0.1, 0.0, 0.1)),
        ];
        assert!(matches!(disjoint_disk_content(&clash, 0.5), Err(Error::OverlappingPieces(0, 1))));
    }

    #[test]
    fn clipped_pieces_of_one_hole_are_disjoint() {
        let hole = disk(0.25, 0.0, 0.05);
        let o = Point::new(0.0, 0.0);
        let a1 = Annulus { center: o, inner: 0.25, outer: 0.5 };
        let a2 = Annulus { center: o, inner: 0.125, outer: 0.25 };
        let pieces = [ClippedDisk::new(0, hole, a1, false), ClippedDisk::new(0, hole, a2, false)];
        let est = disjoint_disk_content(&pieces, 0.5).unwrap();
        assert!(est.upper > 0.0 && est.upper <= 2.0 * 0.1f64.powf(1.5) + 1e-15);
    }

    #[test]
    fn greedy_examples() {
        let alpha: f64 = 0.5;
        let r: f64 = 0.1;
        let exact = (2.0 * r).powf(1.0 + alpha);
        let est = greedy_cover_upper(&[disk(0.3, 0.2, r)], alpha, &GreedyOptions::default()).unwrap();
        assert!(est.upper >= exact / 2.5 && est.upper <= 2.5 * exact, "{}", est.upper);
        let empty: [Disk; 0] = [];
        assert_eq!(greedy_cover_upper(&empty, alpha, &GreedyOptions::default()).unwrap().upper, 0.0);
        let two = [disk(-0.5, 0.0, r), disk(0.5, 0.0, r)];
        let est = greedy_cover_upper(&two, alpha, &GreedyOptions::default()).unwrap();
        assert!(est.upper >= 2.0 * exact / 2.5 && est.upper <= 5.0 * exact);
        assert!(est.lower_heuristic <= SLACK_FACTOR * est.upper);
    }

    #[test]
    fn greedy_budget_and_mesh_errors() {
        let d = [disk(0.0, 0.0, 0.1)];
        let tiny = GreedyOptions {
            mesh: Some(1e-4),
            pixel_budget: 1 << 10,
        };
        assert!(matches!(greedy_cover_upper(&d, 0.5, &tiny), Err(Error::PixelBudget { .. })));
        let coarse = GreedyOptions {
            mesh: Some(0.5),
            ..GreedyOptions::default()
        };
        assert!(greedy_cover_upper(&d, 0.5, &coarse).is_err());
    }

    #[test]
    fn greedy_refinement_never_increases() {
        let d = [disk(0.0, 0.0, 0.1), disk(0.31, 0.05, 0.03)];
        let mut prev = f64::INFINITY;
        for k in 3..9 {
            let opts = GreedyOptions {
                mesh: Some(0.2 / (1u32 << k) as f64 * 1.0000001),
                ..GreedyOptions::default()
            };
            let est = greedy_cover_upper(&d[..1], 0.5, &opts).unwrap();
            assert!(est.upper <= prev * (1.0 + 1e-12));
            prev = est.upper;
        }
    }

    #[test]
    fn estimate_pieces_dispatch() {
        let pieces = [whole(0.5, 0.0, 0.05), whole(0.2, 0.0, 0.01)];
        let est = estimate_pieces(&pieces, 0.5, ContentMode::Auto).unwrap();
        assert_eq!(est.method, ContentMethod::DisjointSum);
        let est = estimate_pieces(&pieces, 0.5, ContentMode::Greedy).unwrap();
        assert_eq!(est.method, ContentMethod::GreedyCover);
    }

    proptest! {
        #[test]
        fn measure_is_monotone_and_dominated(alpha in 0.05f64..0.95, eps in 0.0f64..2.0, t0 in 0.01f64..2.0, a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let h = MeasureFunction::new(alpha, eps, t0).unwrap();
            let (s, t) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(h.eval(s) <= h.eval(t));
            prop_assert!(h.eval(t) <= t.powf(1.0 + alpha) * (1.0 + 1e-15));
        }

        #[test]
        fn cover_content_monotone_in_gauge(alpha in 0.05f64..0.95, eps in 0.0f64..2.0, r in 0.01f64..0.4) {
            let d = disk(0.0, 0.0, r);
            let cover = Cover { balls: vec![d, disk(0.1, 0.0, r / 2.0)], target: Region::Disk(d) };
            let small = MeasureFunction::new(alpha, eps, 1.0).unwrap();
            let big = MeasureFunction::power(alpha).unwrap();
            prop_assert!(cover_content(&cover, &small).unwrap() <= cover_content(&cover, &big).unwrap());
        }

        #[test]
        fn greedy_adding_a_piece_never_decreases(x in -0.8f64..0.8, y in -0.8f64..0.8, r in 0.01f64..0.1) {
            let base = vec![disk(0.0, 0.0, 0.1), disk(0.5, 0.5, 0.05)];
            let mut more = base.clone();
            more.push(disk(x, y, r));
            let o = GreedyOptions::default();
            let a = greedy_cover_upper(&base, 0.5, &o).unwrap().upper;
            let b = greedy_cover_upper(&more, 0.5, &o).unwrap().upper;
            prop_assert!(b >= a);
        }

        #[test]
        fn scaling_law(lambda in 0.05f64..4.0, alpha in 0.1f64..0.9) {
            let pieces = vec![whole(0.3, 0.1, 0.05), whole(-0.2, 0.0, 0.02)];
            let scaled: Vec<_> = pieces.iter().map(|p| ClippedDisk::whole_disk(0, p.hole.scaled(Point::new(0.0, 0.0), lambda))).collect();
            let f = lambda.powf(1.0 + alpha);
            let a = disjoint_disk_content(&pieces, alpha).unwrap().upper;
            let b = disjoint_disk_content(&scaled, alpha).unwrap().upper;
            prop_assert!((b - f * a).abs() <= 1e-12 * b);
            let o = GreedyOptions::default();
            let a = greedy_cover_upper(&pieces, alpha, &o).unwrap().upper;
            let b = greedy_cover_upper(&scaled, alpha, &o).unwrap().upper;
            prop_assert!((b / (f * a) - 1.0).abs() <= 0.01);
        }

        #[test]
        fn greedy_within_slack_of_disjoint_sum(r1 in 0.01f64..0.1, r2 in 0.01f64..0.1, alpha in 0.1f64..0.9) {
            let pieces = vec![whole(-0.5, 0.0, r1), whole(0.5, 0.0, r2)];
            let g = greedy_cover_upper(&pieces, alpha, &GreedyOptions::default()).unwrap().upper;
            let d = disjoint_disk_content(&pieces, alpha).unwrap().upper;
            prop_assert!(g >= d / 2.5 && g <= 2.5 * d);
        }
    }
}
