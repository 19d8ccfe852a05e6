//! Monte Carlo harness: incremental random growth of collocation sets with
//! determinant and singular-value tracking, deliberate singular-pair
//! probes, and convergence studies over manufactured solutions.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::{assemble, extend_boundary, extend_interior, CollocationSet};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point2};
use crate::kernel::TpsKernel;
use crate::linalg::{lu_factor, sigma_extremes, DetValue, SINGULAR_RATIO_CUTOFF};
use crate::sampling::{
    sample_boundary_distinct, sample_interior_distinct, BoundaryDensity, InteriorDensity,
    SeededGenerator, GENERATOR_NAME,
};
use crate::solver::{grid_error, solve_poisson, ManufacturedCase};

/// Order in which interior and boundary points are added while growing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interleaving {
    /// Interior, boundary, interior, ... until one side is exhausted.
    Alternate,
    /// Interior with this probability at each step (one generator draw).
    Random { p_interior: f64 },
    InteriorFirst,
    BoundaryFirst,
}

impl Interleaving {
    pub fn name(&self) -> String {
        match self {
            Interleaving::Alternate => "alternate".into(),
            Interleaving::Random { p_interior } => format!("random({p_interior})"),
            Interleaving::InteriorFirst => "interior-first".into(),
            Interleaving::BoundaryFirst => "boundary-first".into(),
        }
    }
}

/// Growth target and interleaving rule. Growth reaches exactly
/// (target_n, target_m), one point per step.
#[derive(Clone, Copy, Debug)]
pub struct GrowthPolicy {
    pub target_n: usize,
    pub target_m: usize,
    pub interleaving: Interleaving,
}

impl GrowthPolicy {
    pub fn target_total(&self) -> usize {
        self.target_n + self.target_m
    }

    /// Decides the next point kind given the current counts. Falls back to
    /// whichever side still has room.
    fn next_is_interior(&self, n: usize, m: usize, gen: &mut SeededGenerator) -> bool {
        let room_interior = n < self.target_n;
        let room_boundary = m < self.target_m;
        if !room_boundary {
            return true;
        }
        if !room_interior {
            return false;
        }
        match self.interleaving {
            Interleaving::Alternate => (n + m) % 2 == 0,
            Interleaving::Random { p_interior } => gen.uniform01() < p_interior,
            Interleaving::InteriorFirst => true,
            Interleaving::BoundaryFirst => false,
        }
    }
}

/// One sampled growth step.
#[derive(Clone, Copy, Debug)]
pub enum GrowthStep {
    Interior(Point2),
    Boundary(f64),
}

/// Samples the full growth sequence for one trial: policy decisions and
/// point draws interleaved on a single generator, with the distinctness
/// guard applied against everything sampled so far.
pub fn growth_sequence(
    domain: &Domain,
    policy: &GrowthPolicy,
    interior_density: &InteriorDensity,
    boundary_density: &BoundaryDensity,
    gen: &mut SeededGenerator,
) -> Result<Vec<GrowthStep>> {
    let mut steps = Vec::with_capacity(policy.target_total());
    let mut existing: Vec<Point2> = Vec::with_capacity(policy.target_total());
    let mut n = 0usize;
    let mut m = 0usize;
    while n + m < policy.target_total() {
        if policy.next_is_interior(n, m, gen) {
            let p = sample_interior_distinct(domain, interior_density, &existing, gen)?;
            steps.push(GrowthStep::Interior(p));
            existing.push(p);
            n += 1;
        } else {
            let t = sample_boundary_distinct(domain, boundary_density, true, &existing, gen)?;
            steps.push(GrowthStep::Boundary(t));
            existing.push(domain.boundary().eval(t));
            m += 1;
        }
    }
    Ok(steps)
}

/// Diagnostics of one growth step at matrix order N.
#[derive(Clone, Copy, Debug)]
pub struct TrialRecord {
    pub n_total: usize,
    pub n_interior: usize,
    pub m_boundary: usize,
    pub det_sign: i8,
    pub log_abs_det: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// sigma_min / sigma_max
    pub ratio: f64,
    /// true iff the ratio is at or below the numerical-singularity cutoff
    pub flagged: bool,
    /// wall time of this step's factorization and iteration, in seconds;
    /// kept out of CSV schemas so outputs stay byte-reproducible
    pub wall_seconds: f64,
}

/// Grows one random collocation set point by point through the bordered
/// extension operations, recording determinant and singular-value
/// diagnostics at every N >= 2.
pub fn unisolvence_trial(
    domain: &Domain,
    kernel: &TpsKernel,
    policy: &GrowthPolicy,
    interior_density: &InteriorDensity,
    boundary_density: &BoundaryDensity,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    if kernel.nu() < 2 {
        return Err(Error::UnsupportedKernel(kernel.nu()));
    }
    if policy.target_total() < 2 {
        return Err(Error::Config(format!(
            "growth target must be at least 2 points, got {}",
            policy.target_total()
        )));
    }
    interior_density.certify(domain)?;
    boundary_density.certify()?;

    let mut gen = SeededGenerator::new(seed);
    let steps = growth_sequence(domain, policy, interior_density, boundary_density, &mut gen)?;

    let mut set = CollocationSet::empty();
    let mut matrix = assemble(kernel, domain, &set)?;
    let mut records = Vec::with_capacity(steps.len().saturating_sub(1));
    for step in steps {
        let (next_matrix, next_set) = match step {
            GrowthStep::Interior(p) => extend_interior(&matrix, kernel, domain, &set, p)?,
            GrowthStep::Boundary(t) => extend_boundary(&matrix, kernel, domain, &set, t)?,
        };
        matrix = next_matrix;
        set = next_set;
        if set.size() < 2 {
            continue;
        }
        let started = Instant::now();
        let det = lu_factor(matrix.matrix())?.log_abs_det();
        let sigma = sigma_extremes(matrix.matrix())?;
        let wall_seconds = started.elapsed().as_secs_f64();
        let ratio = sigma.ratio();
        records.push(TrialRecord {
            n_total: set.size(),
            n_interior: set.n(),
            m_boundary: set.m(),
            det_sign: det.sign,
            log_abs_det: det.log_abs,
            sigma_min: sigma.sigma_min,
            sigma_max: sigma.sigma_max,
            ratio,
            flagged: ratio <= SINGULAR_RATIO_CUTOFF,
            wall_seconds,
        });
    }
    Ok(records)
}

/// Per-N aggregate over all trials of a study.
#[derive(Clone, Copy, Debug)]
pub struct UnisolvenceAggregate {
    pub n_total: usize,
    pub min_ratio: f64,
    pub median_ratio: f64,
    pub flagged: usize,
}

/// One trial's records with its derived seed.
#[derive(Clone, Debug)]
pub struct TrialRun {
    pub trial: u64,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
}

/// Full study output: every record plus deterministic aggregates.
#[derive(Clone, Debug)]
pub struct UnisolvenceReport {
    pub master_seed: u64,
    pub trial_count: u64,
    pub policy_name: String,
    pub nu: u32,
    pub runs: Vec<TrialRun>,
    pub aggregates: Vec<UnisolvenceAggregate>,
    pub flagged_total: usize,
    pub flagged_seeds: Vec<u64>,
}

impl UnisolvenceReport {
    pub fn record_count(&self) -> usize {
        self.runs.iter().map(|r| r.records.len()).sum()
    }

    /// Per-step records, trial-major: '#' metadata then fixed columns.
    pub fn write_records_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "# generator={GENERATOR_NAME} master_seed={} trials={} policy={} nu={}",
            self.master_seed, self.trial_count, self.policy_name, self.nu
        )?;
        writeln!(
            w,
            "trial,seed,N,n,m,det_sign,log_abs_det,sigma_min,sigma_max,ratio,flagged"
        )?;
        for run in &self.runs {
            for r in &run.records {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                    run.trial,
                    run.seed,
                    r.n_total,
                    r.n_interior,
                    r.m_boundary,
                    r.det_sign,
                    r.log_abs_det,
                    r.sigma_min,
                    r.sigma_max,
                    r.ratio,
                    u8::from(r.flagged),
                )?;
            }
        }
        Ok(())
    }

    /// Per-N aggregates: '#' metadata then one row per matrix order.
    pub fn write_aggregate_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "# generator={GENERATOR_NAME} master_seed={} trials={} policy={} nu={} flagged_total={}",
            self.master_seed,
            self.trial_count,
            self.policy_name,
            self.nu,
            self.flagged_total
        )?;
        writeln!(w, "N,min_ratio,median_ratio,flagged")?;
        for a in &self.aggregates {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{}",
                a.n_total, a.min_ratio, a.median_ratio, a.flagged
            )?;
        }
        Ok(())
    }
}

fn median_of(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

/// Runs `trials` independent growth trials in parallel (one derived child
/// seed per trial index) and aggregates per-N statistics. Aggregates are
/// deterministic for a fixed master seed under any parallelism degree
/// because the reduce is ordered by trial index.
pub fn unisolvence_study(
    domain: &Domain,
    kernel: &TpsKernel,
    policy: &GrowthPolicy,
    interior_density: &InteriorDensity,
    boundary_density: &BoundaryDensity,
    trials: u64,
    master_seed: u64,
) -> Result<UnisolvenceReport> {
    if trials == 0 {
        return Err(Error::Config("trial count must be at least 1".into()));
    }
    let master = SeededGenerator::new(master_seed);
    let runs: Vec<TrialRun> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let child = master.child(trial);
            let seed = child.seed();
            let records = unisolvence_trial(
                domain,
                kernel,
                policy,
                interior_density,
                boundary_density,
                seed,
            )?;
            Ok(TrialRun {
                trial,
                seed,
                records,
            })
        })
        .collect::<Result<_>>()?;

    let mut aggregates = Vec::new();
    for n_total in 2..=policy.target_total() {
        let mut ratios: Vec<f64> = runs
            .iter()
            .flat_map(|run| run.records.iter())
            .filter(|r| r.n_total == n_total)
            .map(|r| r.ratio)
            .collect();
        ratios.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
        let flagged = runs
            .iter()
            .flat_map(|run| run.records.iter())
            .filter(|r| r.n_total == n_total && r.flagged)
            .count();
        aggregates.push(UnisolvenceAggregate {
            n_total,
            min_ratio: ratios[0],
            median_ratio: median_of(&ratios),
            flagged,
        });
    }
    let flagged_total = aggregates.iter().map(|a| a.flagged).sum();
    let flagged_seeds: Vec<u64> = runs
        .iter()
        .filter(|run| run.records.iter().any(|r| r.flagged))
        .map(|run| run.seed)
        .collect();

    Ok(UnisolvenceReport {
        master_seed,
        trial_count: trials,
        policy_name: policy.interleaving.name(),
        nu: kernel.nu(),
        runs,
        aggregates,
        flagged_total,
        flagged_seeds,
    })
}

/// One measured configuration of the singular probe.
#[derive(Clone, Copy, Debug)]
pub struct ProbeCase {
    /// "interior-pair", "mixed-pair" or "interior-control"
    pub label: &'static str,
    /// absolute distance perturbation away from the critical radius
    pub delta: f64,
    /// realized center distance, measured from the actual points
    pub distance: f64,
    pub det: DetValue,
    /// plain determinant (always representable at this size)
    pub det_value: f64,
    /// proof closed form evaluated at the realized distance
    pub closed_form: f64,
    pub max_abs_entry: f64,
}

/// Probe output: measured determinants of deliberately singular and
/// near-singular two-center configurations.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub nu: u32,
    pub critical_radius: f64,
    /// max |entry| over every probed matrix; the scale for the
    /// near-zero-determinant verdict
    pub entry_scale: f64,
    pub cases: Vec<ProbeCase>,
}

impl ProbeReport {
    pub fn case(&self, label: &str, delta: f64) -> Option<&ProbeCase> {
        self.cases
            .iter()
            .find(|c| c.label == label && c.delta == delta)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "# nu={} critical_radius={:.16e} entry_scale={:.16e}",
            self.nu, self.critical_radius, self.entry_scale
        )?;
        writeln!(
            w,
            "case,delta,distance,det_sign,log_abs_det,det,closed_form,max_abs_entry"
        )?;
        for c in &self.cases {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                c.label,
                c.delta,
                c.distance,
                c.det.sign,
                c.det.log_abs,
                c.det_value,
                c.closed_form,
                c.max_abs_entry
            )?;
        }
        Ok(())
    }
}

/// Interior-pair closed form: det = -16 nu^2 r^{4nu-4} (nu ln r + 1)^2.
fn interior_pair_closed_form(nu: u32, r: f64) -> f64 {
    let nuf = nu as f64;
    -16.0 * nuf * nuf * r.powi(4 * nu as i32 - 4) * (nuf * r.ln() + 1.0).powi(2)
}

/// Mixed-pair closed form: det = -4 nu phi(r) r^{2nu-2} (nu ln r + 1).
fn mixed_pair_closed_form(kernel: &TpsKernel, r: f64) -> f64 {
    let nuf = kernel.nu() as f64;
    -4.0 * nuf
        * kernel.phi_unchecked(r)
        * r.powi(2 * kernel.nu() as i32 - 2)
        * (nuf * r.ln() + 1.0)
}

/// Builds the deliberate singular configurations of the two-center base
/// cases on the unit disk: an interior pair at the critical distance, a
/// mixed interior/boundary pair at the critical distance, a perturbation
/// ladder delta in {1e-2, 1e-4, 1e-6} around each, and a well-separated
/// interior control pair at distance 1.
pub fn singular_probe(kernel: &TpsKernel) -> Result<ProbeReport> {
    if kernel.nu() < 2 {
        return Err(Error::UnsupportedKernel(kernel.nu()));
    }
    let domain = Domain::new(crate::geometry::AnalyticCurve::circle(1.0, 0.0, 0.0)?)?;
    let rc = kernel.critical_radius();
    let mut cases = Vec::new();
    let mut entry_scale = 0.0f64;

    let deltas = [0.0, 1e-6, 1e-4, 1e-2];
    for &delta in &deltas {
        // interior pair at distance rc + delta, symmetric about the origin
        // so the separation is exact in floating point
        let d = rc + delta;
        let set = CollocationSet::new(
            &domain,
            vec![Point2::new(-0.5 * d, 0.0), Point2::new(0.5 * d, 0.0)],
            vec![],
        )?;
        let k = assemble(kernel, &domain, &set)?;
        let distance = set.interior()[0].dist(set.interior()[1]);
        let det = lu_factor(k.matrix())?.log_abs_det();
        entry_scale = entry_scale.max(k.matrix().max_abs_entry());
        cases.push(ProbeCase {
            label: "interior-pair",
            delta,
            distance,
            det,
            det_value: det.value(),
            closed_form: interior_pair_closed_form(kernel.nu(), distance),
            max_abs_entry: k.matrix().max_abs_entry(),
        });
    }

    for &delta in &deltas {
        // boundary point at t = 0 maps to (1, 0); the interior partner sits
        // on the inward ray at the probed distance
        let d = rc + delta;
        let set = CollocationSet::new(&domain, vec![Point2::new(1.0 - d, 0.0)], vec![0.0])?;
        let k = assemble(kernel, &domain, &set)?;
        let distance = set.interior()[0].dist(set.boundary_points()[0]);
        let det = lu_factor(k.matrix())?.log_abs_det();
        entry_scale = entry_scale.max(k.matrix().max_abs_entry());
        cases.push(ProbeCase {
            label: "mixed-pair",
            delta,
            distance,
            det,
            det_value: det.value(),
            closed_form: mixed_pair_closed_form(kernel, distance),
            max_abs_entry: k.matrix().max_abs_entry(),
        });
    }

    // control: interior pair at unit distance, far from the singular circle
    let set = CollocationSet::new(
        &domain,
        vec![Point2::new(-0.5, 0.0), Point2::new(0.5, 0.0)],
        vec![],
    )?;
    let k = assemble(kernel, &domain, &set)?;
    let det = lu_factor(k.matrix())?.log_abs_det();
    entry_scale = entry_scale.max(k.matrix().max_abs_entry());
    cases.push(ProbeCase {
        label: "interior-control",
        delta: 1.0 - rc,
        distance: 1.0,
        det,
        det_value: det.value(),
        closed_form: interior_pair_closed_form(kernel.nu(), 1.0),
        max_abs_entry: k.matrix().max_abs_entry(),
    });

    Ok(ProbeReport {
        nu: kernel.nu(),
        critical_radius: rc,
        entry_scale,
        cases,
    })
}

/// One solve of a convergence ladder.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub n_total: usize,
    pub seed: u64,
    /// grid errors; absent when the solve hit the singular verdict
    pub max_err: Option<f64>,
    pub rms_err: Option<f64>,
    pub det_sign: i8,
    pub log_abs_det: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub flagged: bool,
}

/// Ladder study output with per-N medians over the non-flagged solves.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub case: ManufacturedCase,
    pub master_seed: u64,
    pub nu: u32,
    pub interior_fraction: f64,
    pub rows: Vec<ConvergenceRow>,
    /// (N, median max error) per ladder rung
    pub medians: Vec<(usize, f64)>,
    pub flagged_count: usize,
}

impl ConvergenceReport {
    pub fn median_for(&self, n_total: usize) -> Option<f64> {
        self.medians
            .iter()
            .find(|(n, _)| *n == n_total)
            .map(|(_, m)| *m)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "# generator={GENERATOR_NAME} master_seed={} case={} nu={} interior_fraction={}",
            self.master_seed,
            self.case.name(),
            self.nu,
            self.interior_fraction
        )?;
        writeln!(
            w,
            "N,seed,max_err,rms_err,log_abs_det,sigma_min,sigma_max,cond,flagged"
        )?;
        for r in &self.rows {
            let fmt_opt = |v: Option<f64>| match v {
                Some(x) => format!("{x:.16e}"),
                None => String::new(),
            };
            writeln!(
                w,
                "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.n_total,
                r.seed,
                fmt_opt(r.max_err),
                fmt_opt(r.rms_err),
                r.log_abs_det,
                r.sigma_min,
                r.sigma_max,
                r.sigma_max / r.sigma_min,
                u8::from(r.flagged),
            )?;
        }
        Ok(())
    }
}

/// Solves the manufactured case over an increasing ladder of set sizes,
/// `seeds_per_n` independent seeds each, in parallel. Singular-verdict
/// solves are recorded and counted but excluded from the medians.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    domain: &Domain,
    kernel: &TpsKernel,
    case: ManufacturedCase,
    ladder: &[usize],
    interior_fraction: f64,
    seeds_per_n: u64,
    master_seed: u64,
    grid_resolution: usize,
) -> Result<ConvergenceReport> {
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "convergence ladder must be strictly increasing".into(),
        ));
    }
    if ladder.is_empty() || seeds_per_n == 0 {
        return Err(Error::Config(
            "convergence study needs a ladder and at least one seed".into(),
        ));
    }
    if !(0.0..=1.0).contains(&interior_fraction) {
        return Err(Error::Config(format!(
            "interior fraction must lie in [0, 1], got {interior_fraction}"
        )));
    }
    let master = SeededGenerator::new(master_seed);
    let jobs: Vec<(usize, u64)> = ladder
        .iter()
        .flat_map(|&n_total| (0..seeds_per_n).map(move |s| (n_total, s)))
        .collect();
    let rows: Vec<ConvergenceRow> = jobs
        .par_iter()
        .map(|&(n_total, seed_index)| {
            let seed = master.child(n_total as u64 * 1_000_003 + seed_index).seed();
            let n = ((n_total as f64) * interior_fraction).round() as usize;
            let n = n.clamp(1, n_total - 1);
            let m = n_total - n;
            let rhs = case.rhs_spec();
            match solve_poisson(domain, kernel, n, m, &rhs, seed) {
                Ok(sol) => {
                    let (max_err, rms_err) = grid_error(&sol, case, grid_resolution)?;
                    let d = sol.diagnostics();
                    Ok(ConvergenceRow {
                        n_total,
                        seed,
                        max_err: Some(max_err),
                        rms_err: Some(rms_err),
                        det_sign: d.det.sign,
                        log_abs_det: d.det.log_abs,
                        sigma_min: d.sigma.sigma_min,
                        sigma_max: d.sigma.sigma_max,
                        flagged: false,
                    })
                }
                Err(Error::NumericallySingular {
                    det_sign,
                    log_abs_det,
                    sigma_min,
                    sigma_max,
                    ..
                }) => Ok(ConvergenceRow {
                    n_total,
                    seed,
                    max_err: None,
                    rms_err: None,
                    det_sign,
                    log_abs_det,
                    sigma_min,
                    sigma_max,
                    flagged: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut medians = Vec::new();
    for &n_total in ladder {
        let mut errs: Vec<f64> = rows
            .iter()
            .filter(|r| r.n_total == n_total)
            .filter_map(|r| r.max_err)
            .collect();
        if errs.is_empty() {
            continue;
        }
        errs.sort_by(|a, b| a.partial_cmp(b).expect("errors are finite"));
        medians.push((n_total, median_of(&errs)));
    }
    let flagged_count = rows.iter().filter(|r| r.flagged).count();

    Ok(ConvergenceReport {
        case,
        master_seed,
        nu: kernel.nu(),
        interior_fraction,
        rows,
        medians,
        flagged_count,
    })
}
