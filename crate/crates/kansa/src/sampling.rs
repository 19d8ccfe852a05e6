//! Seeded random placement of interior points and boundary abscissas by
//! acceptance-rejection.
//!
//! All randomness flows through [`SeededGenerator`], a ChaCha12 stream with
//! a documented child-seed derivation, so every experiment is reproducible
//! bitwise from its seed.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::geometry::{AnalyticCurve, Domain, Point2};

/// Consecutive-rejection budget before a sampler gives up.
pub const REJECTION_BUDGET: usize = 1_000_000;

/// Relative distance (times domain diameter) below which a fresh sample
/// counts as a duplicate of an existing point and is redrawn.
pub const DISTINCT_REL: f64 = 1e-12;

/// Number of probe points used to certify a density bound.
const CERTIFY_PROBES: usize = 10_000;

/// Name of the generator algorithm, recorded in output artifacts.
pub const GENERATOR_NAME: &str = "chacha12";

/// SplitMix64 finalizer; the documented mixing function behind child seeds
/// and deterministic start vectors.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic uniform-[0,1) stream seeded by a 64-bit value.
#[derive(Clone, Debug)]
pub struct SeededGenerator {
    seed: u64,
    rng: ChaCha12Rng,
}

impl SeededGenerator {
    pub fn new(seed: u64) -> Self {
        SeededGenerator {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream for trial `index`: the child seed is
    /// splitmix64(seed + (index+1) * golden), so distinct indices give
    /// distinct, decorrelated streams.
    pub fn child(&self, index: u64) -> SeededGenerator {
        let mixed = splitmix64(
            self.seed
                .wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        SeededGenerator::new(mixed)
    }

    /// Uniform in [0,1): the top 53 bits of one 64-bit draw.
    pub fn uniform01(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform01()
    }
}

type InteriorFn = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;
type BoundaryFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Unnormalized interior density with a certified upper bound on its
/// support. The uniform case is a distinct variant so that it can reuse
/// the plain sampler draw-for-draw.
#[derive(Clone)]
pub struct InteriorDensity {
    kind: InteriorKind,
}

#[derive(Clone)]
enum InteriorKind {
    Uniform,
    Weighted {
        name: String,
        f: InteriorFn,
        bound: f64,
    },
}

impl InteriorDensity {
    pub fn uniform() -> Self {
        InteriorDensity {
            kind: InteriorKind::Uniform,
        }
    }

    /// exp(-||p - center||^2 / (2 width^2)); its bound is exactly 1.
    pub fn gaussian_bump(center: Point2, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && center.is_finite()) {
            return Err(Error::Config(format!(
                "gaussian bump needs finite center and width > 0, got ({}, {}) width {}",
                center.x, center.y, width
            )));
        }
        let name = format!("gaussian-bump({},{};{})", center.x, center.y, width);
        let f: InteriorFn = Arc::new(move |p: Point2| {
            let d2 = (p.x - center.x).powi(2) + (p.y - center.y).powi(2);
            (-d2 / (2.0 * width * width)).exp()
        });
        Ok(InteriorDensity {
            kind: InteriorKind::Weighted {
                name,
                f,
                bound: 1.0,
            },
        })
    }

    /// Arbitrary density with a caller-supplied upper bound; the bound is
    /// checked by [`certify`](Self::certify), not trusted.
    pub fn custom(name: impl Into<String>, f: InteriorFn, bound: f64) -> Self {
        InteriorDensity {
            kind: InteriorKind::Weighted {
                name: name.into(),
                f,
                bound,
            },
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, InteriorKind::Uniform)
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            InteriorKind::Uniform => "uniform",
            InteriorKind::Weighted { name, .. } => name,
        }
    }

    /// Checks nonnegativity and the upper bound on a probe grid over the
    /// domain (about 10^4 points of the bounding box, restricted to the
    /// interior).
    pub fn certify(&self, domain: &Domain) -> Result<()> {
        let InteriorKind::Weighted { name, f, bound } = &self.kind else {
            return Ok(());
        };
        if !(bound.is_finite() && *bound > 0.0) {
            return Err(Error::DensityBound {
                name: name.clone(),
                bound: *bound,
                observed: f64::NAN,
            });
        }
        let side = (CERTIFY_PROBES as f64).sqrt() as usize;
        let bb = domain.bounding_box();
        for i in 0..side {
            for j in 0..side {
                let p = Point2::new(
                    bb.min.x + bb.width() * (i as f64 + 0.5) / side as f64,
                    bb.min.y + bb.height() * (j as f64 + 0.5) / side as f64,
                );
                if !domain.contains(p) {
                    continue;
                }
                let v = f(p);
                if !(v >= 0.0) {
                    return Err(Error::NegativeDensity {
                        name: name.clone(),
                        observed: v,
                    });
                }
                if v > *bound {
                    return Err(Error::DensityBound {
                        name: name.clone(),
                        bound: *bound,
                        observed: v,
                    });
                }
            }
        }
        Ok(())
    }

    fn eval(&self, p: Point2) -> f64 {
        match &self.kind {
            InteriorKind::Uniform => 1.0,
            InteriorKind::Weighted { f, .. } => f(p),
        }
    }

    fn bound(&self) -> f64 {
        match &self.kind {
            InteriorKind::Uniform => 1.0,
            InteriorKind::Weighted { bound, .. } => *bound,
        }
    }
}

impl fmt::Debug for InteriorDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InteriorDensity")
            .field("name", &self.name())
            .field("bound", &self.bound())
            .finish()
    }
}

/// Unnormalized density over the boundary parameter with a certified
/// upper bound.
#[derive(Clone)]
pub struct BoundaryDensity {
    kind: BoundaryKind,
}

#[derive(Clone)]
enum BoundaryKind {
    Uniform,
    Weighted {
        name: String,
        f: BoundaryFn,
        bound: f64,
    },
}

impl BoundaryDensity {
    pub fn uniform() -> Self {
        BoundaryDensity {
            kind: BoundaryKind::Uniform,
        }
    }

    pub fn custom(name: impl Into<String>, f: BoundaryFn, bound: f64) -> Self {
        BoundaryDensity {
            kind: BoundaryKind::Weighted {
                name: name.into(),
                f,
                bound,
            },
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, BoundaryKind::Uniform)
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            BoundaryKind::Uniform => "uniform",
            BoundaryKind::Weighted { name, .. } => name,
        }
    }

    /// Checks nonnegativity and the bound at 10^4 uniformly spaced
    /// parameter probes.
    pub fn certify(&self) -> Result<()> {
        let BoundaryKind::Weighted { name, f, bound } = &self.kind else {
            return Ok(());
        };
        if !(bound.is_finite() && *bound > 0.0) {
            return Err(Error::DensityBound {
                name: name.clone(),
                bound: *bound,
                observed: f64::NAN,
            });
        }
        for i in 0..CERTIFY_PROBES {
            let t = i as f64 * TAU / CERTIFY_PROBES as f64;
            let v = f(t);
            if !(v >= 0.0) {
                return Err(Error::NegativeDensity {
                    name: name.clone(),
                    observed: v,
                });
            }
            if v > *bound {
                return Err(Error::DensityBound {
                    name: name.clone(),
                    bound: *bound,
                    observed: v,
                });
            }
        }
        Ok(())
    }

    fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            BoundaryKind::Uniform => 1.0,
            BoundaryKind::Weighted { f, .. } => f(t),
        }
    }

    fn bound(&self) -> f64 {
        match &self.kind {
            BoundaryKind::Uniform => 1.0,
            BoundaryKind::Weighted { bound, .. } => *bound,
        }
    }
}

impl fmt::Debug for BoundaryDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryDensity")
            .field("name", &self.name())
            .field("bound", &self.bound())
            .finish()
    }
}

/// Uniform point in the domain: propose uniform in the bounding box,
/// accept iff strictly interior.
pub fn sample_interior_uniform(domain: &Domain, gen: &mut SeededGenerator) -> Result<Point2> {
    let bb = domain.bounding_box();
    for _ in 0..REJECTION_BUDGET {
        let p = Point2::new(
            gen.uniform_in(bb.min.x, bb.max.x),
            gen.uniform_in(bb.min.y, bb.max.y),
        );
        if domain.contains(p) {
            return Ok(p);
        }
    }
    Err(Error::DegenerateDomain(REJECTION_BUDGET))
}

/// Density-weighted interior point: accept a box proposal p with
/// probability [p interior] * density(p) / bound. The uniform density
/// delegates to the plain sampler so both consume identical draws.
pub fn sample_interior_density(
    domain: &Domain,
    density: &InteriorDensity,
    gen: &mut SeededGenerator,
) -> Result<Point2> {
    if density.is_uniform() {
        return sample_interior_uniform(domain, gen);
    }
    let bb = domain.bounding_box();
    let bound = density.bound();
    for _ in 0..REJECTION_BUDGET {
        let p = Point2::new(
            gen.uniform_in(bb.min.x, bb.max.x),
            gen.uniform_in(bb.min.y, bb.max.y),
        );
        let u = gen.uniform01();
        if domain.contains(p) && u * bound < density.eval(p) {
            return Ok(p);
        }
    }
    Err(Error::RejectionBudget {
        context: "interior density sampling",
    })
}

/// Boundary abscissa with the arclength law: propose t uniform in
/// [0, 2*pi), accept with probability speed(t) / speed_upper_bound.
pub fn sample_boundary_arclength(
    curve: &AnalyticCurve,
    gen: &mut SeededGenerator,
) -> Result<f64> {
    let s_max = curve.speed_upper_bound();
    if !(s_max > 0.0) {
        return Err(Error::RejectionBudget {
            context: "boundary arclength sampling on a degenerate curve",
        });
    }
    for _ in 0..REJECTION_BUDGET {
        let t = gen.uniform_in(0.0, TAU);
        let u = gen.uniform01();
        if u * s_max < curve.speed(t) {
            return Ok(t);
        }
    }
    Err(Error::RejectionBudget {
        context: "boundary arclength sampling",
    })
}

/// Boundary abscissa under a parameter density w: accept t with
/// probability w(t) / bound. The uniform density returns the proposal
/// directly.
pub fn sample_boundary_density(
    curve: &AnalyticCurve,
    density: &BoundaryDensity,
    gen: &mut SeededGenerator,
) -> Result<f64> {
    let _ = curve;
    if density.is_uniform() {
        return Ok(gen.uniform_in(0.0, TAU));
    }
    let bound = density.bound();
    for _ in 0..REJECTION_BUDGET {
        let t = gen.uniform_in(0.0, TAU);
        let u = gen.uniform01();
        if u * bound < density.eval(t) {
            return Ok(t);
        }
    }
    Err(Error::RejectionBudget {
        context: "boundary density sampling",
    })
}

/// Interior sample redrawn until it clears every existing collocation
/// point by the distinctness threshold. Coincidences have probability
/// zero in exact arithmetic; redrawing keeps them out of floating point.
pub fn sample_interior_distinct(
    domain: &Domain,
    density: &InteriorDensity,
    existing: &[Point2],
    gen: &mut SeededGenerator,
) -> Result<Point2> {
    let threshold = DISTINCT_REL * domain.diameter();
    for _ in 0..REJECTION_BUDGET {
        let p = sample_interior_density(domain, density, gen)?;
        if existing.iter().all(|q| q.dist(p) >= threshold) {
            return Ok(p);
        }
    }
    Err(Error::RejectionBudget {
        context: "distinct interior point",
    })
}

/// Boundary sample redrawn until its image on the curve clears every
/// existing collocation point.
pub fn sample_boundary_distinct(
    domain: &Domain,
    density: &BoundaryDensity,
    arclength_law: bool,
    existing: &[Point2],
    gen: &mut SeededGenerator,
) -> Result<f64> {
    let threshold = DISTINCT_REL * domain.diameter();
    let curve = domain.boundary();
    for _ in 0..REJECTION_BUDGET {
        let t = if arclength_law && density.is_uniform() {
            sample_boundary_arclength(curve, gen)?
        } else {
            sample_boundary_density(curve, density, gen)?
        };
        let q = curve.eval(t);
        if existing.iter().all(|p| p.dist(q) >= threshold) {
            return Ok(t);
        }
    }
    Err(Error::RejectionBudget {
        context: "distinct boundary point",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Upper 0.001 quantile of chi-square with 19 degrees of freedom.
    const CHI2_19_001: f64 = 43.8202;

    fn unit_disk() -> Domain {
        Domain::new(AnalyticCurve::circle(1.0, 0.0, 0.0).unwrap()).unwrap()
    }

    fn chi_square(counts: &[usize], expected: &[f64]) -> f64 {
        counts
            .iter()
            .zip(expected)
            .map(|(&c, &e)| {
                let d = c as f64 - e;
                d * d / e
            })
            .sum()
    }

    #[test]
    fn generator_is_deterministic() {
        let mut a = SeededGenerator::new(12345);
        let mut b = SeededGenerator::new(12345);
        for _ in 0..1000 {
            assert_eq!(a.uniform01().to_bits(), b.uniform01().to_bits());
        }
        let mut c = SeededGenerator::new(12346);
        let differs = (0..100).any(|_| a.uniform01() != c.uniform01());
        assert!(differs);
    }

    #[test]
    fn uniform01_range() {
        let mut g = SeededGenerator::new(7);
        for _ in 0..10_000 {
            let u = g.uniform01();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn child_seeds_are_distinct() {
        let g = SeededGenerator::new(99);
        let mut seeds: Vec<u64> = (0..1000).map(|i| g.child(i).seed()).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 1000);
        assert!(seeds.iter().all(|&s| s != 99));
    }

    #[test]
    fn interior_uniform_properties() {
        let d = unit_disk();
        let mut g = SeededGenerator::new(1);
        let mut pos_x = 0usize;
        let n = 10_000;
        for _ in 0..n {
            let p = sample_interior_uniform(&d, &mut g).unwrap();
            assert!(d.contains(p));
            if p.x > 0.0 {
                pos_x += 1;
            }
        }
        let frac = pos_x as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.02, "frac={frac}");
    }

    #[test]
    fn disk_acceptance_rate_near_area_ratio() {
        let d = unit_disk();
        let bb = d.bounding_box();
        let mut g = SeededGenerator::new(2);
        let proposals = 100_000;
        let mut accepted = 0usize;
        for _ in 0..proposals {
            let p = Point2::new(
                g.uniform_in(bb.min.x, bb.max.x),
                g.uniform_in(bb.min.y, bb.max.y),
            );
            if d.contains(p) {
                accepted += 1;
            }
        }
        let rate = accepted as f64 / proposals as f64;
        assert!(
            (rate - std::f64::consts::FRAC_PI_4).abs() < 0.005,
            "rate={rate}"
        );
    }

    #[test]
    fn uniform_density_delegates_to_uniform_sampler() {
        let d = unit_disk();
        let mut g1 = SeededGenerator::new(77);
        let mut g2 = SeededGenerator::new(77);
        let dens = InteriorDensity::uniform();
        for _ in 0..200 {
            let a = sample_interior_uniform(&d, &mut g1).unwrap();
            let b = sample_interior_density(&d, &dens, &mut g2).unwrap();
            assert_eq!((a.x.to_bits(), a.y.to_bits()), (b.x.to_bits(), b.y.to_bits()));
        }
    }

    #[test]
    fn gaussian_bump_concentrates_mass() {
        let d = unit_disk();
        let bump = InteriorDensity::gaussian_bump(Point2::new(0.0, 0.0), 0.3).unwrap();
        bump.certify(&d).unwrap();
        let n = 10_000;
        let mut g = SeededGenerator::new(3);
        let mean_r_bump: f64 = (0..n)
            .map(|_| {
                sample_interior_density(&d, &bump, &mut g)
                    .unwrap()
                    .dist(Point2::new(0.0, 0.0))
            })
            .sum::<f64>()
            / n as f64;
        let mut g = SeededGenerator::new(3);
        let mean_r_uniform: f64 = (0..n)
            .map(|_| {
                sample_interior_uniform(&d, &mut g)
                    .unwrap()
                    .dist(Point2::new(0.0, 0.0))
            })
            .sum::<f64>()
            / n as f64;
        assert!(mean_r_bump < mean_r_uniform);
    }

    #[test]
    fn halved_density_halves_acceptance() {
        // density == 0.5 * bound everywhere: same law, twice the draws
        let d = unit_disk();
        let half = InteriorDensity::custom("half", Arc::new(|_| 0.5), 1.0);
        half.certify(&d).unwrap();
        let n = 2000;
        let mut g = SeededGenerator::new(4);
        for _ in 0..n {
            sample_interior_density(&d, &half, &mut g).unwrap();
        }
        // acceptance rate = (pi/4)/2; just verify samples stay lawful
        let p = sample_interior_density(&d, &half, &mut g).unwrap();
        assert!(d.contains(p));
    }

    #[test]
    fn density_certification_catches_bad_bounds() {
        let d = unit_disk();
        let spiky = InteriorDensity::custom(
            "spiky",
            Arc::new(|p: Point2| 1.0 + p.x.abs()),
            1.0,
        );
        assert!(matches!(
            spiky.certify(&d),
            Err(Error::DensityBound { .. })
        ));
        let negative = InteriorDensity::custom("neg", Arc::new(|p: Point2| p.x), 1.0);
        assert!(matches!(
            negative.certify(&d),
            Err(Error::NegativeDensity { .. })
        ));
        let signed = BoundaryDensity::custom("cos", Arc::new(f64::cos), 1.0);
        assert!(matches!(
            signed.certify(),
            Err(Error::NegativeDensity { .. })
        ));
        let ok = BoundaryDensity::custom("lifted-cos", Arc::new(|t: f64| 1.0 + t.cos()), 2.0);
        ok.certify().unwrap();
    }

    #[test]
    fn circle_arclength_abscissas_are_uniform() {
        let c = AnalyticCurve::circle(1.0, 0.0, 0.0).unwrap();
        let mut g = SeededGenerator::new(5);
        let bins = 20;
        let n = 100_000;
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let t = sample_boundary_arclength(&c, &mut g).unwrap();
            assert!((0.0..TAU).contains(&t));
            counts[(t / TAU * bins as f64) as usize % bins] += 1;
        }
        let expected = vec![n as f64 / bins as f64; bins];
        let stat = chi_square(&counts, &expected);
        assert!(stat < CHI2_19_001, "chi2={stat}");
    }

    #[test]
    fn ellipse_arclength_abscissas_match_speed_density() {
        let c = AnalyticCurve::ellipse(2.0, 1.0).unwrap();
        let rule = crate::geometry::gauss_legendre(16);
        let total = c.arclength().unwrap();
        let bins = 20;
        let n = 100_000;
        // expected bin mass: integral of the speed over the bin, over L
        let expected: Vec<f64> = (0..bins)
            .map(|b| {
                let a = b as f64 * TAU / bins as f64;
                let h = TAU / bins as f64;
                let mid = a + 0.5 * h;
                let integral: f64 = rule
                    .iter()
                    .map(|&(x, w)| w * c.speed(mid + 0.5 * h * x))
                    .sum::<f64>()
                    * 0.5
                    * h;
                n as f64 * integral / total
            })
            .collect();
        let mut g = SeededGenerator::new(6);
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let t = sample_boundary_arclength(&c, &mut g).unwrap();
            counts[(t / TAU * bins as f64) as usize % bins] += 1;
        }
        let stat = chi_square(&counts, &expected);
        assert!(stat < CHI2_19_001, "chi2={stat}");
    }

    #[test]
    fn lifted_cosine_boundary_density_matches_bin_integrals() {
        let c = AnalyticCurve::circle(1.0, 0.0, 0.0).unwrap();
        let w = BoundaryDensity::custom("lifted-cos", Arc::new(|t: f64| 1.0 + t.cos()), 2.0);
        w.certify().unwrap();
        let bins = 20;
        let n = 100_000;
        // integral of (1 + cos t)/(2 pi) over a bin is (h + sin b - sin a)/(2 pi)
        let expected: Vec<f64> = (0..bins)
            .map(|b| {
                let a = b as f64 * TAU / bins as f64;
                let b_end = (b + 1) as f64 * TAU / bins as f64;
                n as f64 * ((b_end - a) + b_end.sin() - a.sin()) / TAU
            })
            .collect();
        let mut g = SeededGenerator::new(8);
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let t = sample_boundary_density(&c, &w, &mut g).unwrap();
            counts[(t / TAU * bins as f64) as usize % bins] += 1;
        }
        let stat = chi_square(&counts, &expected);
        assert!(stat < CHI2_19_001, "chi2={stat}");
    }

    #[test]
    fn uniform_boundary_density_is_uniform_parameter() {
        let c = AnalyticCurve::ellipse(2.0, 1.0).unwrap();
        let w = BoundaryDensity::uniform();
        let mut g = SeededGenerator::new(9);
        let bins = 20;
        let n = 50_000;
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let t = sample_boundary_density(&c, &w, &mut g).unwrap();
            counts[(t / TAU * bins as f64) as usize % bins] += 1;
        }
        let expected = vec![n as f64 / bins as f64; bins];
        assert!(chi_square(&counts, &expected) < CHI2_19_001);
    }

    #[test]
    fn samplers_reproduce_bitwise_across_runs() {
        let d = unit_disk();
        let c = d.boundary().clone();
        let w = BoundaryDensity::custom("lifted-cos", Arc::new(|t: f64| 1.0 + t.cos()), 2.0);
        let bump = InteriorDensity::gaussian_bump(Point2::new(0.1, -0.2), 0.5).unwrap();

        let run = |seed: u64| -> Vec<u64> {
            let mut g = SeededGenerator::new(seed);
            let mut out = Vec::new();
            for _ in 0..50 {
                let p = sample_interior_uniform(&d, &mut g).unwrap();
                out.push(p.x.to_bits());
                let p = sample_interior_density(&d, &bump, &mut g).unwrap();
                out.push(p.y.to_bits());
                out.push(sample_boundary_arclength(&c, &mut g).unwrap().to_bits());
                out.push(sample_boundary_density(&c, &w, &mut g).unwrap().to_bits());
            }
            out
        };
        assert_eq!(run(424242), run(424242));
    }

    #[test]
    fn distinct_guard_redraws_near_duplicates() {
        let d = unit_disk();
        let mut g = SeededGenerator::new(10);
        let dens = InteriorDensity::uniform();
        // place an existing point, then force the guard by checking the
        // next sample against a copy of itself
        let p = sample_interior_uniform(&d, &mut g).unwrap();
        let threshold = DISTINCT_REL * d.diameter();
        let q = sample_interior_distinct(&d, &dens, &[p], &mut g).unwrap();
        assert!(p.dist(q) >= threshold);

        // a saturated existing set still leaves room
        let existing: Vec<Point2> = (0..50)
            .map(|_| sample_interior_uniform(&d, &mut g).unwrap())
            .collect();
        let r = sample_interior_distinct(&d, &dens, &existing, &mut g).unwrap();
        assert!(existing.iter().all(|e| e.dist(r) >= threshold));

        let w = BoundaryDensity::uniform();
        let t = sample_boundary_distinct(&d, &w, true, &existing, &mut g).unwrap();
        let bq = d.boundary().eval(t);
        assert!(existing.iter().all(|e| e.dist(bq) >= threshold));
    }
}
