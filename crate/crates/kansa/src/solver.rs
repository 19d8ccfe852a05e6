//! End-to-end Poisson solves: sample centers, assemble, factor, solve,
//! evaluate, and measure errors against manufactured solutions.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use crate::assembly::{
    assemble, assemble_rhs, CollocationSet, KansaMatrix, RhsSpec,
};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point2};
use crate::kernel::TpsKernel;
use crate::linalg::{lu_factor, sigma_extremes, DetValue, SigmaReport};
use crate::sampling::{
    sample_boundary_distinct, sample_interior_distinct, BoundaryDensity, InteriorDensity,
    SeededGenerator, GENERATOR_NAME,
};

/// Numerical health of one factorize-and-solve pass.
#[derive(Clone, Copy, Debug)]
pub struct SolveDiagnostics {
    pub det: DetValue,
    pub sigma: SigmaReport,
    /// max_i |(K x - b)_i|
    pub residual_inf: f64,
    /// residual_inf / max_i |b_i| (or the absolute value when b = 0)
    pub residual_rel: f64,
}

/// Collocation solution: coefficients over the sampled centers plus the
/// diagnostics of the solve that produced them.
#[derive(Clone, Debug)]
pub struct KansaSolution {
    domain: Domain,
    kernel: TpsKernel,
    set: CollocationSet,
    c: Vec<f64>,
    d: Vec<f64>,
    seed: u64,
    diagnostics: SolveDiagnostics,
}

impl KansaSolution {
    pub fn kernel(&self) -> TpsKernel {
        self.kernel
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn set(&self) -> &CollocationSet {
        &self.set
    }

    /// Coefficients of the interior centers.
    pub fn interior_coefficients(&self) -> &[f64] {
        &self.c
    }

    /// Coefficients of the boundary centers.
    pub fn boundary_coefficients(&self) -> &[f64] {
        &self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn diagnostics(&self) -> SolveDiagnostics {
        self.diagnostics
    }

    /// CSV dump: '#' metadata lines, then one row per center with its
    /// coefficient. Boundary rows carry their abscissa, interior rows an
    /// empty t column.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# generator={GENERATOR_NAME} seed={}", self.seed)?;
        writeln!(
            w,
            "# nu={} n={} m={} det_sign={} log_abs_det={:.16e} sigma_min={:.16e} sigma_max={:.16e} residual_inf={:.16e}",
            self.kernel.nu(),
            self.set.n(),
            self.set.m(),
            self.diagnostics.det.sign,
            self.diagnostics.det.log_abs,
            self.diagnostics.sigma.sigma_min,
            self.diagnostics.sigma.sigma_max,
            self.diagnostics.residual_inf,
        )?;
        writeln!(w, "kind,x,y,t,coefficient")?;
        for (p, c) in self.set.interior().iter().zip(&self.c) {
            writeln!(w, "interior,{:.16e},{:.16e},,{:.16e}", p.x, p.y, c)?;
        }
        for ((q, t), d) in self
            .set
            .boundary_points()
            .iter()
            .zip(self.set.boundary_t())
            .zip(&self.d)
        {
            writeln!(w, "boundary,{:.16e},{:.16e},{:.16e},{:.16e}", q.x, q.y, t, d)?;
        }
        Ok(())
    }
}

/// Samples n interior points and m boundary abscissas under the given
/// densities, with the distinctness guard applied across the whole set.
pub fn sample_collocation_set(
    domain: &Domain,
    n: usize,
    m: usize,
    interior_density: &InteriorDensity,
    boundary_density: &BoundaryDensity,
    gen: &mut SeededGenerator,
) -> Result<CollocationSet> {
    let mut set = CollocationSet::empty();
    let mut existing: Vec<Point2> = Vec::with_capacity(n + m);
    for _ in 0..n {
        let p = sample_interior_distinct(domain, interior_density, &existing, gen)?;
        set.push_interior(domain, p)?;
        existing.push(p);
    }
    for _ in 0..m {
        let t = sample_boundary_distinct(domain, boundary_density, true, &existing, gen)?;
        set.push_boundary(domain, t)?;
        existing.push(*set.boundary_points().last().unwrap());
    }
    Ok(set)
}

/// Solves the collocation system on an already-built set. The seed is
/// carried through for reporting only.
pub fn solve_on_set(
    domain: &Domain,
    kernel: &TpsKernel,
    set: CollocationSet,
    rhs: &RhsSpec,
    seed: u64,
) -> Result<KansaSolution> {
    if set.size() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 collocation points, got {}",
            set.size()
        )));
    }
    let k = assemble(kernel, domain, &set)?;
    let b = assemble_rhs(rhs, &set)?;
    let (x, diagnostics) = factor_and_solve(&k, &b)?;
    let n = set.n();
    Ok(KansaSolution {
        domain: domain.clone(),
        kernel: *kernel,
        set,
        c: x[..n].to_vec(),
        d: x[n..].to_vec(),
        seed,
        diagnostics,
    })
}

fn factor_and_solve(k: &KansaMatrix, b: &[f64]) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let lu = lu_factor(k.matrix())?;
    let det = lu.log_abs_det();
    let sigma = sigma_extremes(k.matrix())?;
    if lu.has_zero_pivot() || sigma.is_numerically_singular() {
        return Err(Error::NumericallySingular {
            det_sign: det.sign,
            log_abs_det: det.log_abs,
            sigma_min: sigma.sigma_min,
            sigma_max: sigma.sigma_max,
            ratio: sigma.ratio(),
        });
    }
    let x = lu.solve(b)?;
    let residual_inf = k
        .matrix()
        .mul_vec(&x)
        .iter()
        .zip(b)
        .map(|(kx, bi)| (kx - bi).abs())
        .fold(0.0f64, f64::max);
    let b_inf = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual_rel = if b_inf > 0.0 {
        residual_inf / b_inf
    } else {
        residual_inf
    };
    Ok((
        x,
        SolveDiagnostics {
            det,
            sigma,
            residual_inf,
            residual_rel,
        },
    ))
}

/// Full pipeline under the default laws: uniform interior points and
/// arclength boundary points. Deterministic for a fixed seed.
pub fn solve_poisson(
    domain: &Domain,
    kernel: &TpsKernel,
    n: usize,
    m: usize,
    rhs: &RhsSpec,
    seed: u64,
) -> Result<KansaSolution> {
    solve_poisson_with_densities(
        domain,
        kernel,
        n,
        m,
        rhs,
        &InteriorDensity::uniform(),
        &BoundaryDensity::uniform(),
        seed,
    )
}

/// Full pipeline with caller-chosen sampling densities. A uniform boundary
/// density means the arclength law.
#[allow(clippy::too_many_arguments)]
pub fn solve_poisson_with_densities(
    domain: &Domain,
    kernel: &TpsKernel,
    n: usize,
    m: usize,
    rhs: &RhsSpec,
    interior_density: &InteriorDensity,
    boundary_density: &BoundaryDensity,
    seed: u64,
) -> Result<KansaSolution> {
    if n + m < 2 {
        return Err(Error::Config(format!(
            "need at least 2 collocation points, got n + m = {}",
            n + m
        )));
    }
    interior_density.certify(domain)?;
    boundary_density.certify()?;
    let mut gen = SeededGenerator::new(seed);
    let set = sample_collocation_set(domain, n, m, interior_density, boundary_density, &mut gen)?;
    solve_on_set(domain, kernel, set, rhs, seed)
}

/// u_N(P): the ansatz sum over all centers.
pub fn evaluate(sol: &KansaSolution, p: Point2) -> f64 {
    let kernel = sol.kernel;
    let mut acc = 0.0;
    for (center, c) in sol.set.interior().iter().zip(&sol.c) {
        acc += c * kernel.phi_pair(p, *center);
    }
    for (center, d) in sol.set.boundary_points().iter().zip(&sol.d) {
        acc += d * kernel.phi_pair(p, *center);
    }
    acc
}

/// Laplacian of the ansatz at P; defined everywhere since nu >= 2 is
/// enforced at assembly.
pub fn evaluate_laplacian(sol: &KansaSolution, p: Point2) -> f64 {
    let kernel = sol.kernel;
    let mut acc = 0.0;
    for (center, c) in sol.set.interior().iter().zip(&sol.c) {
        acc += c * kernel.lap_phi_unchecked(p.dist(*center));
    }
    for (center, d) in sol.set.boundary_points().iter().zip(&sol.d) {
        acc += d * kernel.lap_phi_unchecked(p.dist(*center));
    }
    acc
}

/// Built-in exact solutions with analytic source terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManufacturedCase {
    /// u = x^2 + y^2, f = 4
    Quadratic,
    /// u = e^x sin y, f = 0
    HarmonicExp,
    /// u = sin(pi x) sin(pi y), f = -2 pi^2 u
    Trig,
}

impl ManufacturedCase {
    pub const ALL: [ManufacturedCase; 3] = [
        ManufacturedCase::Quadratic,
        ManufacturedCase::HarmonicExp,
        ManufacturedCase::Trig,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ManufacturedCase::Quadratic => "quadratic",
            ManufacturedCase::HarmonicExp => "harmonic-exp",
            ManufacturedCase::Trig => "trig",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown manufactured case '{name}' (expected quadratic, harmonic-exp or trig)"
                ))
            })
    }

    /// The exact solution u*.
    pub fn exact(&self, p: Point2) -> f64 {
        match self {
            ManufacturedCase::Quadratic => p.x * p.x + p.y * p.y,
            ManufacturedCase::HarmonicExp => p.x.exp() * p.y.sin(),
            ManufacturedCase::Trig => (PI * p.x).sin() * (PI * p.y).sin(),
        }
    }

    /// The analytic Laplacian f = Delta u*.
    pub fn laplacian(&self, p: Point2) -> f64 {
        match self {
            ManufacturedCase::Quadratic => 4.0,
            ManufacturedCase::HarmonicExp => 0.0,
            ManufacturedCase::Trig => -2.0 * PI * PI * self.exact(p),
        }
    }

    /// Right-hand side pair (f, g) with g the trace of u*.
    pub fn rhs_spec(&self) -> RhsSpec {
        let case = *self;
        let trace = *self;
        RhsSpec::new(
            format!("{}:laplacian", self.name()),
            Arc::new(move |p| case.laplacian(p)),
            format!("{}:trace", self.name()),
            Arc::new(move |p| trace.exact(p)),
        )
    }
}

/// Max and RMS error of the solution against the exact field over an
/// interior evaluation grid (resolution x resolution box points filtered
/// by membership; the ambiguous band is excluded by the membership test).
pub fn grid_error(
    sol: &KansaSolution,
    case: ManufacturedCase,
    resolution: usize,
) -> Result<(f64, f64)> {
    let bb = sol.domain.bounding_box();
    let mut max_err = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut count = 0usize;
    for i in 0..resolution {
        for j in 0..resolution {
            let p = Point2::new(
                bb.min.x + bb.width() * (i as f64 + 0.5) / resolution as f64,
                bb.min.y + bb.height() * (j as f64 + 0.5) / resolution as f64,
            );
            if !sol.domain.contains(p) {
                continue;
            }
            let err = (evaluate(sol, p) - case.exact(p)).abs();
            max_err = max_err.max(err);
            sum_sq += err * err;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyGrid);
    }
    Ok((max_err, (sum_sq / count as f64).sqrt()))
}
