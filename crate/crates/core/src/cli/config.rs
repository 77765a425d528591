//! Run configuration: a TOML file that fully determines one invocation.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::content::ContentMode;
use crate::criterion::RoadrunnerFamily;
use crate::error::Error;
use crate::geometry::{ConeSpec, Disk, Point, Ray, SwissCheeseDomain};
use crate::lipschitz::{CauchyTerm, GalleryFunction, RationalTerm};

/// A complex number written as `[re, im]`.
pub type Pair = [f64; 2];

fn pt(p: Pair) -> Point {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray: Option<RaySection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gallery: Vec<GallerySpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub criterion: CriterionSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decompose: Option<DecomposeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<LemmaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<ContentSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSpec {
    pub center: Pair,
    pub radius: f64,
}

impl DiskSpec {
    fn disk(&self) -> Result<Disk, Error> {
        Disk::new(pt(self.center), self.radius)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<DiskSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Pair>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holes: Vec<DiskSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roadrunner: Option<FamilySpec>,
}

fn default_center_scale() -> f64 {
    0.75
}

fn default_half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default = "default_center_scale")]
    pub center_scale: f64,
    #[serde(default = "default_half")]
    pub center_ratio: f64,
    pub radius_scale: f64,
    pub radius_ratio: f64,
    #[serde(default)]
    pub angle: f64,
    pub truncation: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_index: Option<u32>,
}

impl FamilySpec {
    pub fn family(&self) -> Result<RoadrunnerFamily, Error> {
        let fam = RoadrunnerFamily::new(
            self.center_scale,
            self.center_ratio,
            self.radius_scale,
            self.radius_ratio,
            self.angle,
            self.truncation,
        )?;
        match self.first_index {
            Some(n) => fam.with_first_index(n),
            None => Ok(fam),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSection {
    pub direction: f64,
    pub half_angle: f64,
    pub length: f64,
}

fn default_scales() -> u32 {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySection {
    pub direction: f64,
    pub length: f64,
    #[serde(default = "default_scales")]
    pub scales: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    pub at: Pair,
    pub weight: Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    pub center: Pair,
    pub radius: f64,
    pub weight: Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleTransformSpec {
    /// Index into the domain's hole list.
    pub hole: usize,
    pub weight: Pair,
}

/// `Σ poly[k] z^k + Σ w/(z - p) + Σ w CT_disk(z) + conjugates`, normalised to
/// vanish at the base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GallerySpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub poly: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub poles: Vec<PoleSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transforms: Vec<TransformSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hole_transforms: Vec<HoleTransformSpec>,
    /// Disks on which `conj(z)` is added.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conjugate_on: Vec<DiskSpec>,
}

impl GallerySpec {
    pub fn build(&self, domain: &SwissCheeseDomain) -> Result<GalleryFunction, Error> {
        let rational = self
            .poles
            .iter()
            .map(|p| RationalTerm { pole: pt(p.at), weight: pt(p.weight) })
            .collect();
        let mut ct = Vec::new();
        for t in &self.transforms {
            ct.push(CauchyTerm { disk: Disk::new(pt(t.center), t.radius)?, weight: pt(t.weight) });
        }
        for t in &self.hole_transforms {
            let disk = *domain.holes().get(t.hole).ok_or_else(|| {
                Error::InvalidArgument(format!("hole index {} out of range", t.hole))
            })?;
            ct.push(CauchyTerm { disk, weight: pt(t.weight) });
        }
        for d in &self.conjugate_on {
            ct.push(CauchyTerm { disk: d.disk()?, weight: Complex64::new(-1.0 / PI, 0.0) });
        }
        let poly = self.poly.iter().map(|&c| pt(c)).collect();
        GalleryFunction::new(poly, rational, ct, domain.base_point())
    }
}

fn default_quad_tol() -> f64 {
    1e-10
}

fn default_limit_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_limit_tol")]
    pub limit_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad_tol: default_quad_tol(),
            limit_tol: default_limit_tol(),
        }
    }
}

fn default_n_max() -> u32 {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSection {
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default)]
    pub mode: ContentMode,
}

impl Default for CriterionSection {
    fn default() -> Self {
        CriterionSection {
            n_max: default_n_max(),
            mode: ContentMode::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeSection {
    #[serde(default = "default_m_outer")]
    pub m_outer: u32,
    pub n_inner: u32,
    pub points: Vec<Pair>,
}

fn default_m_outer() -> u32 {
    1
}

fn default_pairs() -> usize {
    6000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSection {
    pub radii: Vec<f64>,
    #[serde(default)]
    pub center: Pair,
    #[serde(default = "default_pairs")]
    pub pair_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentSection {
    pub disks: Vec<DiskSpec>,
    #[serde(default)]
    pub mode: ContentMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_pairs")]
    pub pair_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub curvature: f64,
    pub length: f64,
    #[serde(default)]
    pub direction: f64,
}

fn default_formats() -> Vec<String> {
    vec!["csv".into()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            formats: default_formats(),
        }
    }
}

/// Error pointing at a line of the configuration file when the offending
/// key can be found there.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of the first `key = ...` or `[key]` occurrence.
pub fn locate(source: &str, key: &str) -> Option<usize> {
    source.lines().position(|line| {
        let t = line.trim_start();
        let assign = t
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='));
        let header = t.trim_start_matches('[').trim_end().trim_end_matches(']') == key && t.starts_with('[');
        assign || header
    })
    .map(|i| i + 1)
}

impl RunConfig {
    pub fn parse(source: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(source).map_err(|e| ConfigError {
            line: e.span().map(|s| source[..s.start].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 over the canonical serialization, salted with a label.
    pub fn hash(&self, label: &str) -> String {
        let mut h = Sha256::new();
        h.update(label.as_bytes());
        h.update([0u8]);
        h.update(self.to_toml().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn build_domain(&self) -> Result<SwissCheeseDomain, Error> {
        if let Some(fam) = &self.domain.roadrunner {
            if !self.domain.holes.is_empty() || self.domain.outer.is_some() || self.domain.base_point.is_some() {
                return Err(Error::InvalidDomain("roadrunner excludes explicit holes, outer and base_point".into()));
            }
            return fam.family()?.domain();
        }
        let outer = match &self.domain.outer {
            Some(d) => d.disk()?,
            None => Disk::unit(),
        };
        let holes = self.domain.holes.iter().map(DiskSpec::disk).collect::<Result<Vec<_>, _>>()?;
        let base = pt(self.domain.base_point.unwrap_or([0.0, 0.0]));
        SwissCheeseDomain::new(outer, holes, base, true)
    }

    pub fn build_gallery(&self, domain: &SwissCheeseDomain) -> Result<Vec<(String, GalleryFunction)>, Error> {
        self.gallery
            .iter()
            .map(|g| Ok((g.name.clone(), g.build(domain)?)))
            .collect()
    }

    pub fn build_ray(&self, domain: &SwissCheeseDomain) -> Result<Option<(Ray, u32)>, Error> {
        self.ray
            .map(|r| Ok((Ray::new(domain.base_point(), r.direction, r.length)?, r.scales)))
            .transpose()
    }

    pub fn build_cone(&self, domain: &SwissCheeseDomain) -> Result<Option<ConeSpec>, Error> {
        self.cone
            .map(|c| ConeSpec::new(domain.base_point(), c.direction, c.half_angle, c.length, c.half_angle.sin()))
            .transpose()
    }

    pub fn wants_svg(&self) -> bool {
        self.output.formats.iter().any(|f| f == "svg")
    }

    /// Range checks that need no geometry, each anchored at its key.
    pub fn check_ranges(&self, source: &str) -> Result<(), ConfigError> {
        let fail = |key: &str, message: String| ConfigError { line: locate(source, key), message };
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(fail("alpha", format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        if self.seed > i64::MAX as u64 {
            return Err(fail("seed", "seed must be at most 2^63 - 1".into()));
        }
        let t = &self.tolerances;
        if !(t.quad_tol > 0.0) {
            return Err(fail("quad_tol", "quad_tol must be positive".into()));
        }
        if !(t.limit_tol > 0.0) {
            return Err(fail("limit_tol", "limit_tol must be positive".into()));
        }
        if self.criterion.n_max == 0 || self.criterion.n_max > 60 {
            return Err(fail("n_max", "n_max must lie in 1..=60".into()));
        }
        if let Some(r) = &self.ray {
            if r.scales == 0 || r.scales > 45 {
                return Err(fail("scales", "scales must lie in 1..=45".into()));
            }
        }
        if let Some(d) = &self.decompose {
            if d.m_outer == 0 || d.n_inner < d.m_outer || d.n_inner > 40 {
                return Err(fail("n_inner", "decompose needs 1 <= m_outer <= n_inner <= 40".into()));
            }
        }
        for f in &self.output.formats {
            if f != "csv" && f != "svg" {
                return Err(fail("formats", format!("unknown output format {f:?}")));
            }
        }
        let mut names: Vec<&str> = self.gallery.iter().map(|g| g.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(fail("name", "gallery names must be unique".into()));
        }
        if let Some(bad) = self
            .gallery
            .iter()
            .find(|g| g.name.is_empty() || !g.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'))
        {
            return Err(fail("name", format!("gallery name {:?} must be non-empty [A-Za-z0-9_-]", bad.name)));
        }
        Ok(())
    }
}

/// Key most likely responsible for a geometric validation error.
pub fn key_for(err: &Error) -> &'static str {
    match err {
        Error::InvalidDomain(_) => "domain",
        Error::RayNotInterior(_) => "ray",
        Error::ConeNotInterior(_) => "cone",
        Error::NotAnalytic(_) => "gallery",
        _ => "alpha",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = r#"
alpha = 0.5
seed = 7

[domain.roadrunner]
radius_scale = 1.0
radius_ratio = 0.25
truncation = 8

[ray]
direction = 3.141592653589793
length = 0.5
scales = 20

[[gallery]]
name = "square"
poly = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]

[[gallery]]
name = "hole3"
hole_transforms = [{ hole = 0, weight = [1.0, 0.0] }]
"#;

    #[test]
    fn sample_parses_and_builds() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        cfg.check_ranges(SAMPLE).unwrap();
        let d = cfg.build_domain().unwrap();
        assert_eq!(d.holes().len(), 6);
        let g = cfg.build_gallery(&d).unwrap();
        assert_eq!(g[1].1.ct_terms()[0].disk, d.holes()[0]);
        assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn range_errors_carry_lines() {
        let src = SAMPLE.replace("alpha = 0.5", "alpha = 1.5");
        let cfg = RunConfig::parse(&src).unwrap();
        let err = cfg.check_ranges(&src).unwrap_err();
        assert_eq!(err.line, Some(2));
        let bad = RunConfig::parse("alpha = 0.5\nbogus = 1\n").unwrap_err();
        assert_eq!(bad.line, Some(2));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        let again = RunConfig::parse(&format!("# comment\n{SAMPLE}")).unwrap();
        assert_eq!(cfg.hash("limit"), again.hash("limit"));
        assert_ne!(cfg.hash("limit"), cfg.hash("sweep"));
        let other = RunConfig { seed: 8, ..cfg.clone() };
        assert_ne!(cfg.hash("limit"), other.hash("limit"));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e3..1e3f64, 1e-12..1e-3f64, Just(0.0)]
    }

    proptest! {
        #[test]
        fn round_trip(alpha in 0.01..0.99f64, seed in 0..i64::MAX as u64, r in finite(), w in finite(),
                      scales in 1u32..40, holes in 0usize..4, name in "[a-z][a-z0-9_]{0,8}") {
            let cfg = RunConfig {
                alpha,
                seed,
                domain: DomainSpec {
                    holes: (0..holes).map(|i| DiskSpec { center: [0.1 * i as f64 + r * 1e-6, w], radius: 0.01 }).collect(),
                    ..Default::default()
                },
                cone: Some(ConeSection { direction: r, half_angle: 0.3, length: 0.5 }),
                ray: Some(RaySection { direction: w, length: 0.25, scales }),
                gallery: vec![GallerySpec {
                    name,
                    poly: vec![[r, w]],
                    poles: vec![PoleSpec { at: [w, r], weight: [1.0, -r] }],
                    transforms: vec![],
                    hole_transforms: vec![HoleTransformSpec { hole: 1, weight: [w, 0.0] }],
                    conjugate_on: vec![DiskSpec { center: [0.0, 0.0], radius: 1.0 }],
                }],
                lemma: Some(LemmaSection { radii: vec![0.4, r.abs() + 0.1], center: [r, w], pair_count: 100 }),
                ..RunConfig::parse("alpha = 0.5").unwrap()
            };
            let text = cfg.to_toml();
            let back = RunConfig::parse(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_toml(), text);
        }
    }
}
