//! Closed-form test functions analytic on a Swiss-cheese domain, and
//! sampled Lipschitz seminorm estimators.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Disk, Point, Region, SwissCheeseDomain};

/// `weight / (z - pole)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalTerm {
    pub pole: Point,
    pub weight: Complex64,
}

/// `weight · ∫∫_disk dA(w) / (w - z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyTerm {
    pub disk: Disk,
    pub weight: Complex64,
}

/// Cauchy transform of the disk `D(c, r)`: `πr²/(c - z)` outside,
/// `-π conj(z - c)` inside; the two agree on the circle.
pub fn disk_cauchy_transform(disk: &Disk, z: Point) -> Complex64 {
    let w = z - disk.center;
    if w.norm() > disk.radius {
        -PI * disk.radius * disk.radius / w
    } else {
        -PI * w.conj()
    }
}

/// Polynomial + simple poles + disk Cauchy transforms, normalised to
/// vanish at the base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryFunction {
    poly_coeffs: Vec<Complex64>,
    rational_terms: Vec<RationalTerm>,
    ct_terms: Vec<CauchyTerm>,
    base_point: Point,
    offset: Complex64,
}

impl GalleryFunction {
    pub fn new(
        poly_coeffs: Vec<Complex64>,
        rational_terms: Vec<RationalTerm>,
        ct_terms: Vec<CauchyTerm>,
        base_point: Point,
    ) -> Result<Self> {
        let mut f = GalleryFunction {
            poly_coeffs,
            rational_terms,
            ct_terms,
            base_point,
            offset: Complex64::new(0.0, 0.0),
        };
        for t in &f.rational_terms {
            if !(t.pole.re.is_finite() && t.pole.im.is_finite() && t.weight.is_finite()) {
                return Err(Error::InvalidArgument("rational term must be finite".into()));
            }
        }
        if f.poly_coeffs.iter().chain(f.ct_terms.iter().map(|t| &t.weight)).any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        f.offset = f.raw(base_point)?;
        Ok(f)
    }

    /// `Σ c_k z^k` normalised at the origin.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        GalleryFunction::new(coeffs, vec![], vec![], Point::new(0.0, 0.0))
            .expect("polynomials are finite everywhere")
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); k + 1];
        c[k] = Complex64::new(1.0, 0.0);
        GalleryFunction::polynomial(c)
    }

    pub fn zero() -> Self {
        GalleryFunction::polynomial(vec![])
    }

    pub fn rational(pole: Point, weight: Complex64) -> Result<Self> {
        GalleryFunction::new(vec![], vec![RationalTerm { pole, weight }], vec![], Point::new(0.0, 0.0))
    }

    pub fn cauchy_transform(disk: Disk, weight: Complex64) -> Self {
        GalleryFunction::new(vec![], vec![], vec![CauchyTerm { disk, weight }], Point::new(0.0, 0.0))
            .expect("disk transforms are finite everywhere")
    }

    /// `conj(z)` on the closed disk, realised as `-1/π` times its Cauchy transform.
    pub fn conjugate_on(disk: Disk) -> Self {
        GalleryFunction::cauchy_transform(disk, Complex64::new(-1.0 / PI, 0.0))
    }

    pub fn with_base_point(&self, base_point: Point) -> Result<Self> {
        GalleryFunction::new(
            self.poly_coeffs.clone(),
            self.rational_terms.clone(),
            self.ct_terms.clone(),
            base_point,
        )
    }

    pub fn poly_coeffs(&self) -> &[Complex64] {
        &self.poly_coeffs
    }

    pub fn rational_terms(&self) -> &[RationalTerm] {
        &self.rational_terms
    }

    pub fn ct_terms(&self) -> &[CauchyTerm] {
        &self.ct_terms
    }

    pub fn base_point(&self) -> Point {
        self.base_point
    }

    /// `a f + b g`; both must share the base point.
    pub fn combine(a: Complex64, f: &Self, b: Complex64, g: &Self) -> Result<Self> {
        if f.base_point != g.base_point {
            return Err(Error::InvalidArgument("combined functions need the same base point".into()));
        }
        let n = f.poly_coeffs.len().max(g.poly_coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        let poly = (0..n)
            .map(|k| {
                a * f.poly_coeffs.get(k).copied().unwrap_or(zero)
                    + b * g.poly_coeffs.get(k).copied().unwrap_or(zero)
            })
            .collect();
        let scale_r = |s: Complex64, t: &RationalTerm| RationalTerm {
            pole: t.pole,
            weight: s * t.weight,
        };
        let scale_c = |s: Complex64, t: &CauchyTerm| CauchyTerm {
            disk: t.disk,
            weight: s * t.weight,
        };
        let rational = f
            .rational_terms
            .iter()
            .map(|t| scale_r(a, t))
            .chain(g.rational_terms.iter().map(|t| scale_r(b, t)))
            .collect();
        let ct = f
            .ct_terms
            .iter()
            .map(|t| scale_c(a, t))
            .chain(g.ct_terms.iter().map(|t| scale_c(b, t)))
            .collect();
        GalleryFunction::new(poly, rational, ct, f.base_point)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut f = self.clone();
        f.poly_coeffs.iter_mut().for_each(|c| *c *= s);
        f.rational_terms.iter_mut().for_each(|t| t.weight *= s);
        f.ct_terms.iter_mut().for_each(|t| t.weight *= s);
        f.offset = f.raw(f.base_point).expect("base point was regular");
        f
    }

    fn raw(&self, z: Point) -> Result<Complex64> {
        let mut v = self
            .poly_coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
        for t in &self.rational_terms {
            if z == t.pole {
                return Err(Error::Singular(z));
            }
            v += t.weight / (z - t.pole);
        }
        for t in &self.ct_terms {
            v += t.weight * disk_cauchy_transform(&t.disk, z);
        }
        Ok(v)
    }

    /// Value at `z`, with the base-point value subtracted.
    pub fn eval(&self, z: Point) -> Result<Complex64> {
        Ok(self.raw(z)? - self.offset)
    }

    /// Closed-form complex derivative; undefined on transform disks and at poles.
    pub fn derivative(&self, z: Point) -> Result<Complex64> {
        let mut d = Complex64::new(0.0, 0.0);
        for (k, c) in self.poly_coeffs.iter().enumerate().skip(1).rev() {
            d = d * z + c * k as f64;
        }
        for t in &self.rational_terms {
            if z == t.pole {
                return Err(Error::Singular(z));
            }
            d -= t.weight / ((z - t.pole) * (z - t.pole));
        }
        for t in &self.ct_terms {
            let w = t.disk.center - z;
            if w.norm() <= t.disk.radius {
                return Err(Error::NotAnalytic(format!("{z} lies on a transform disk")));
            }
            d += t.weight * PI * t.disk.radius * t.disk.radius / (w * w);
        }
        Ok(d)
    }

    /// Distance from `z` to the closed set where the function is not analytic.
    pub fn singular_distance(&self, z: Point) -> f64 {
        let poles = self.rational_terms.iter().map(|t| (z - t.pole).norm());
        let disks = self
            .ct_terms
            .iter()
            .map(|t| ((z - t.disk.center).norm() - t.disk.radius).max(0.0));
        poles.chain(disks).fold(f64::INFINITY, f64::min)
    }

    pub fn poles(&self) -> impl Iterator<Item = Point> + '_ {
        self.rational_terms.iter().map(|t| t.pole)
    }

    /// Every pole strictly inside a hole and every transform disk inside a
    /// hole, so the function is analytic on the domain.
    pub fn check_analytic_on(&self, domain: &SwissCheeseDomain) -> Result<()> {
        for t in &self.rational_terms {
            if !domain.holes().iter().any(|h| h.contains_open(t.pole)) {
                return Err(Error::NotAnalytic(format!("pole {} is not inside a hole", t.pole)));
            }
        }
        for t in &self.ct_terms {
            if !domain.holes().iter().any(|h| h.contains_disk(&t.disk)) {
                return Err(Error::NotAnalytic(format!(
                    "transform disk at {} is not inside a hole",
                    t.disk.center
                )));
            }
        }
        if self.base_point != domain.base_point() {
            return Err(Error::InvalidArgument("function is normalised at another base point".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormEstimate {
    pub value: f64,
    pub pair_count: usize,
    pub region: String,
}

fn describe(region: &Region) -> String {
    match region {
        Region::Disk(d) => format!("disk({}, {})", d.center, d.radius),
        Region::AnnulusMinusSector { inner, outer, .. } => format!("annular_piece({inner}, {outer})"),
        Region::DiskUnion(ds) => format!("disk_union({})", ds.len()),
        Region::Domain(d) => format!("domain({} holes)", d.holes().len()),
    }
}

/// Sampled `sup |g(z) - g(w)| / |z - w|^α` over the region.
///
/// Pairs come from a seeded stream mixing boundary pairs (including
/// antipodal parameters), interior pairs and near-diagonal pairs at dyadic
/// separations, so larger `pair_count` only extends the sample.
pub fn seminorm_of<G>(g: G, region: &Region, alpha: f64, pair_count: usize, seed: u64) -> Result<SeminormEstimate>
where
    G: Fn(Point) -> Option<Complex64>,
{
    if pair_count < 100 {
        return Err(Error::InvalidArgument("pair_count must be at least 100".into()));
    }
    if region.is_empty() {
        return Ok(SeminormEstimate {
            value: 0.0,
            pair_count: 0,
            region: describe(region),
        });
    }
    let diam = region.diameter_bound();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    let mut used = 0usize;
    for i in 0..pair_count {
        let pair = match i % 3 {
            0 => {
                let u: f64 = rng.gen();
                let v = if rng.gen_bool(0.5) { u + 0.5 } else { rng.gen() };
                region.boundary_point(u).zip(region.boundary_point(v))
            }
            1 => region.sample(&mut rng).zip(region.sample(&mut rng)),
            _ => {
                let k = 1 + (i / 3) % 30;
                let sep = diam * (-(k as f64)).exp2();
                let phi = rng.gen_range(0.0..2.0 * PI);
                let z = if rng.gen_bool(0.5) {
                    region.boundary_point(rng.gen())
                } else {
                    region.sample(&mut rng)
                };
                z.map(|z| (z, z + Point::from_polar(sep, phi)))
                    .filter(|&(_, w)| region.contains(w))
            }
        };
        let Some((z, w)) = pair else { continue };
        let d = (z - w).norm();
        if d == 0.0 {
            continue;
        }
        if let (Some(a), Some(b)) = (g(z), g(w)) {
            let q = (a - b).norm() / d.powf(alpha);
            if q.is_finite() {
                best = best.max(q);
                used += 1;
            }
        }
    }
    if used == 0 {
        return Err(Error::Sampling(format!("no valid pairs in {}", describe(region))));
    }
    Ok(SeminormEstimate {
        value: best,
        pair_count: used,
        region: describe(region),
    })
}

/// Lower estimate of the Lipschitz-α seminorm of `f` on the region.
pub fn seminorm_estimate(
    f: &GalleryFunction,
    region: &Region,
    alpha: f64,
    pair_count: usize,
    seed: u64,
) -> Result<SeminormEstimate> {
    crate::content::check_alpha(alpha)?;
    seminorm_of(|z| f.eval(z).ok(), region, alpha, pair_count, seed)
}

/// `ε(δ)`: the largest sampled ratio over pairs with `|z - w| <= δ`.
pub fn little_lip_modulus(
    f: &GalleryFunction,
    region: &Region,
    alpha: f64,
    deltas: &[f64],
    pair_count: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    crate::content::check_alpha(alpha)?;
    if deltas.iter().any(|d| !(*d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("deltas must be positive and decreasing".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut eps: f64 = 0.0;
        for i in 0..pair_count {
            let sep = if i % 2 == 0 { delta } else { delta * rng.gen_range(0.5..1.0) };
            let phi = rng.gen_range(0.0..2.0 * PI);
            let Some(z) = region.sample(&mut rng) else { continue };
            let w = z + Point::from_polar(sep, phi);
            if !region.contains(w) {
                continue;
            }
            if let (Ok(a), Ok(b)) = (f.eval(z), f.eval(w)) {
                let q = (a - b).norm() / (z - w).norm().powf(alpha);
                if q.is_finite() {
                    eps = eps.max(q);
                }
            }
        }
        table.push((delta, eps));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ct_half() -> GalleryFunction {
        GalleryFunction::cauchy_transform(Disk::new(c(0.5, 0.0), 0.125).unwrap(), c(1.0, 0.0))
    }

    /// Midpoint rule for `∫∫_D dA(w) / (w - z)` on a polar grid.
    fn cauchy_transform_quadrature(disk: &Disk, z: Point) -> Complex64 {
        let (nr, nt) = (400, 800);
        let mut acc = c(0.0, 0.0);
        for i in 0..nr {
            let r = disk.radius * (i as f64 + 0.5) / nr as f64;
            let dr = disk.radius / nr as f64;
            for j in 0..nt {
                let t = 2.0 * PI * (j as f64 + 0.5) / nt as f64;
                let w = disk.center + Point::from_polar(r, t);
                acc += r * dr * (2.0 * PI / nt as f64) / (w - z);
            }
        }
        acc
    }

    #[test]
    fn eval_examples() {
        let sq = GalleryFunction::monomial(2);
        assert_abs_diff_eq!(sq.eval(c(0.3, 0.0)).unwrap().re, 0.09, epsilon = 1e-15);

        let disk = Disk::new(c(0.5, 0.0), 0.125).unwrap();
        let raw0 = disk_cauchy_transform(&disk, c(0.0, 0.0));
        assert_relative_eq!(raw0.re, PI / 32.0, max_relative = 1e-14);
        let oracle = cauchy_transform_quadrature(&disk, c(0.0, 0.0));
        assert_relative_eq!(oracle.re, PI / 32.0, max_relative = 1e-4);
        assert_abs_diff_eq!(oracle.im, 0.0, epsilon = 1e-8);
        assert_eq!(disk_cauchy_transform(&disk, disk.center), c(0.0, 0.0));

        // Normalised value vanishes at the base point.
        assert_eq!(ct_half().eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let pole = GalleryFunction::rational(c(0.5, 0.0), c(1.0, 0.0)).unwrap();
        assert!(matches!(pole.eval(c(0.5, 0.0)), Err(Error::Singular(_))));
    }

    #[test]
    fn transform_inside_matches_area_quadrature() {
        let disk = Disk::new(c(0.1, -0.2), 0.3).unwrap();
        let z = c(0.2, -0.1);
        let oracle = cauchy_transform_quadrature(&disk, z);
        let closed = disk_cauchy_transform(&disk, z);
        assert!((oracle - closed).norm() < 2e-3, "{oracle} vs {closed}");
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(GalleryFunction::monomial(2).derivative(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let d = ct_half().derivative(c(0.0, 0.0)).unwrap();
        assert_relative_eq!(d.re, PI / 16.0, max_relative = 1e-14);
        let h = 1e-5;
        let fd = (ct_half().eval(c(h, 0.0)).unwrap() - ct_half().eval(c(-h, 0.0)).unwrap()) / (2.0 * h);
        assert_relative_eq!(fd.re, PI / 16.0, max_relative = 1e-8);
        let pole = GalleryFunction::rational(c(0.5, 0.0), c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(pole.derivative(c(0.0, 0.0)).unwrap().re, -4.0, epsilon = 1e-14);
        assert!(ct_half().derivative(c(0.5, 0.1)).is_err());
    }

    #[test]
    fn seminorm_examples() {
        let unit = Region::Disk(Disk::unit());
        let conj = GalleryFunction::conjugate_on(Disk::unit());
        let s = seminorm_estimate(&conj, &unit, 0.5, 3000, 7).unwrap();
        assert!(s.value >= 1.40 && s.value <= 2f64.sqrt() + 1e-12, "{}", s.value);
        let id = GalleryFunction::monomial(1);
        let s = seminorm_estimate(&id, &unit, 0.5, 3000, 7).unwrap();
        assert!(s.value >= 1.40 && s.value <= 2f64.sqrt() + 1e-12);
        let konst = GalleryFunction::zero();
        assert_eq!(seminorm_estimate(&konst, &unit, 0.5, 300, 7).unwrap().value, 0.0);
        assert!(seminorm_estimate(&id, &unit, 0.5, 10, 7).is_err());
    }

    #[test]
    fn little_lip_examples() {
        let unit = Region::Disk(Disk::unit());
        let conj = GalleryFunction::conjugate_on(Disk::unit());
        let t = little_lip_modulus(&conj, &unit, 0.5, &[0.04, 0.02, 0.01], 400, 3).unwrap();
        assert_relative_eq!(t[2].1, 0.1, max_relative = 1e-9);
        assert_relative_eq!(t[2].1 / t[1].1, 2f64.powf(-0.5), max_relative = 1e-9);
        assert!(t.windows(2).all(|w| w[1].1 < w[0].1));
        let zero = little_lip_modulus(&GalleryFunction::zero(), &unit, 0.5, &[0.1, 0.05], 100, 3).unwrap();
        assert!(zero.iter().all(|(_, e)| *e == 0.0));
        assert!(little_lip_modulus(&conj, &unit, 0.5, &[0.01, 0.02], 10, 3).is_err());

        // Smooth function: halving δ scales ε by about 2^{-(1-α)}.
        let f = ct_half();
        let region = Region::Disk(Disk::new(c(-0.3, 0.0), 0.2).unwrap());
        let t = little_lip_modulus(&f, &region, 0.5, &[1e-3, 5e-4], 2000, 5).unwrap();
        assert_relative_eq!(t[1].1 / t[0].1, 2f64.powf(-0.5), max_relative = 0.05);
    }

    #[test]
    fn gallery_checks_against_domain() {
        let hole = Disk::new(c(0.5, 0.0), 0.2).unwrap();
        let d = SwissCheeseDomain::new(Disk::unit(), vec![hole], c(0.0, 0.0), true).unwrap();
        ct_half().check_analytic_on(&d).unwrap();
        GalleryFunction::rational(c(0.55, 0.0), c(1.0, 0.0)).unwrap().check_analytic_on(&d).unwrap();
        assert!(GalleryFunction::rational(c(-0.5, 0.0), c(1.0, 0.0)).unwrap().check_analytic_on(&d).is_err());
        let big = GalleryFunction::cauchy_transform(Disk::new(c(0.5, 0.0), 0.3).unwrap(), c(1.0, 0.0));
        assert!(big.check_analytic_on(&d).is_err());
    }

    #[test]
    fn seminorm_grows_with_region() {
        let f = GalleryFunction::monomial(2);
        let small = seminorm_estimate(&f, &Region::Disk(Disk::new(c(0.0, 0.0), 0.5).unwrap()), 0.5, 3000, 1).unwrap();
        let large = seminorm_estimate(&f, &Region::Disk(Disk::unit()), 0.5, 3000, 1).unwrap();
        assert!(large.value >= small.value);
    }

    proptest! {
        #[test]
        fn transform_is_continuous_across_circle(cx in -0.5f64..0.5, cy in -0.5f64..0.5, r in 0.01f64..0.4, t in 0.0f64..6.3) {
            let disk = Disk::new(c(cx, cy), r).unwrap();
            let w = Point::from_polar(r, t);
            let outside = -PI * r * r / w;
            let inside = -PI * w.conj();
            prop_assert!((outside - inside).norm() <= 1e-12);
            let z = disk.point_at(t);
            prop_assert!((disk_cauchy_transform(&disk, z) - inside).norm() <= 1e-12);
        }

        #[test]
        fn derivative_matches_central_differences(x in -0.9f64..0.1, y in -0.6f64..0.6) {
            let hole = Disk::new(c(0.5, 0.0), 0.125).unwrap();
            let f = GalleryFunction::combine(
                c(1.0, 0.0), &ct_half(),
                c(0.5, -0.25), &GalleryFunction::rational(c(0.5, 0.0), c(0.01, 0.0)).unwrap(),
            ).unwrap();
            let f = GalleryFunction::combine(c(1.0, 0.0), &f, c(1.0, 0.0), &GalleryFunction::polynomial(vec![c(0.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(-2.0, 0.0)])).unwrap();
            let z = c(x, y);
            prop_assume!(z.norm() < 1.0 && (z - hole.center).norm() - hole.radius >= 0.01);
            let h = 1e-5;
            let fd = (f.eval(z + h).unwrap() - f.eval(z - h).unwrap()) / (2.0 * h);
            let d = f.derivative(z).unwrap();
            prop_assert!((fd - d).norm() <= 1e-6 * d.norm().max(1.0));
        }

        #[test]
        fn normalised_at_base_point(bx in -0.5f64..0.5, by in -0.5f64..0.5, w in -2.0f64..2.0) {
            let f = GalleryFunction::combine(c(w, 0.0), &ct_half(), c(1.0, 0.0), &GalleryFunction::monomial(3)).unwrap();
            let f = f.with_base_point(c(bx, by)).unwrap();
            prop_assert_eq!(f.eval(c(bx, by)).unwrap(), c(0.0, 0.0));
        }

        #[test]
        fn seminorm_monotone_in_pair_count(n in 100usize..600, extra in 1usize..600, seed in 0u64..50) {
            let f = ct_half();
            let region = Region::Disk(Disk::new(c(-0.2, 0.1), 0.3).unwrap());
            let a = seminorm_estimate(&f, &region, 0.5, n, seed).unwrap().value;
            let b = seminorm_estimate(&f, &region, 0.5, n + extra, seed).unwrap().value;
            prop_assert!(b >= a);
        }
    }
}
