//! Collocation sets and the Kansa block matrix.
//!
//! The matrix layout follows the block display of the discretized problem:
//! rows 1..n carry the Laplacian equations at the interior points, rows
//! n+1..N the value equations at the boundary points; columns are ordered
//! interior centers first, then boundary centers. With that ordering the
//! diagonal is exactly zero.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point2};
use crate::kernel::TpsKernel;
use crate::linalg::Matrix;
use crate::sampling::DISTINCT_REL;

/// Scalar field used for source terms and boundary data. Evaluation
/// failures surface as non-finite values and are caught at assembly.
pub type ScalarField = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;

/// Ordered collocation centers: interior points first, then boundary
/// abscissas with their cached curve images. The ordering is authoritative;
/// it is the row and column order of the assembled matrix.
#[derive(Clone, Debug)]
pub struct CollocationSet {
    interior: Vec<Point2>,
    boundary_t: Vec<f64>,
    boundary_q: Vec<Point2>,
}

impl CollocationSet {
    pub fn empty() -> Self {
        CollocationSet {
            interior: Vec::new(),
            boundary_t: Vec::new(),
            boundary_q: Vec::new(),
        }
    }

    /// Builds a set and validates its invariants against the domain.
    pub fn new(domain: &Domain, interior: Vec<Point2>, boundary_t: Vec<f64>) -> Result<Self> {
        let boundary_q = boundary_t
            .iter()
            .map(|&t| domain.boundary().eval(t))
            .collect();
        let set = CollocationSet {
            interior,
            boundary_t,
            boundary_q,
        };
        set.validate(domain)?;
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.interior.len()
    }

    pub fn m(&self) -> usize {
        self.boundary_t.len()
    }

    pub fn size(&self) -> usize {
        self.n() + self.m()
    }

    pub fn interior(&self) -> &[Point2] {
        &self.interior
    }

    pub fn boundary_t(&self) -> &[f64] {
        &self.boundary_t
    }

    pub fn boundary_points(&self) -> &[Point2] {
        &self.boundary_q
    }

    /// Center behind column `idx` in matrix order.
    pub fn center(&self, idx: usize) -> Point2 {
        if idx < self.n() {
            self.interior[idx]
        } else {
            self.boundary_q[idx - self.n()]
        }
    }

    /// All centers in matrix order.
    pub fn all_points(&self) -> Vec<Point2> {
        let mut pts = self.interior.clone();
        pts.extend_from_slice(&self.boundary_q);
        pts
    }

    /// Appends an interior point, guarding against near-duplicates.
    pub fn push_interior(&mut self, domain: &Domain, p: Point2) -> Result<()> {
        if !domain.contains(p) {
            return Err(Error::InvalidSet(format!(
                "interior point ({}, {}) is not strictly inside the domain",
                p.x, p.y
            )));
        }
        self.guard_distinct(domain, p)?;
        self.interior.push(p);
        Ok(())
    }

    /// Appends a boundary abscissa, guarding against near-duplicates.
    pub fn push_boundary(&mut self, domain: &Domain, t: f64) -> Result<()> {
        let q = domain.boundary().eval(t);
        self.guard_distinct(domain, q)?;
        self.boundary_t.push(t);
        self.boundary_q.push(q);
        Ok(())
    }

    fn guard_distinct(&self, domain: &Domain, p: Point2) -> Result<()> {
        let threshold = DISTINCT_REL * domain.diameter();
        for (index, q) in self
            .interior
            .iter()
            .chain(self.boundary_q.iter())
            .enumerate()
        {
            let dist = q.dist(p);
            if dist < threshold {
                return Err(Error::DuplicatePoint {
                    index,
                    dist,
                    threshold,
                });
            }
        }
        Ok(())
    }

    /// Re-checks every invariant: interior membership, boundary images on
    /// the curve, pairwise distinctness.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        for p in &self.interior {
            if !domain.contains(*p) {
                return Err(Error::InvalidSet(format!(
                    "interior point ({}, {}) is not strictly inside the domain",
                    p.x, p.y
                )));
            }
        }
        let on_curve_tol = 1e-12 * domain.diameter().max(1.0);
        for (t, q) in self.boundary_t.iter().zip(&self.boundary_q) {
            if q.dist(domain.boundary().eval(*t)) > on_curve_tol {
                return Err(Error::InvalidSet(format!(
                    "cached boundary point for t = {t} is off the curve"
                )));
            }
        }
        let threshold = DISTINCT_REL * domain.diameter();
        let pts = self.all_points();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let dist = pts[i].dist(pts[j]);
                if dist < threshold {
                    return Err(Error::DuplicatePoint {
                        index: j,
                        dist,
                        threshold,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Dense collocation matrix with its block dimensions.
#[derive(Clone, Debug)]
pub struct KansaMatrix {
    matrix: Matrix,
    n: usize,
    m: usize,
}

impl KansaMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        self.n + self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    /// Row-major CSV dump at full precision, for external inspection.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        for i in 0..self.size() {
            let row: Vec<String> = (0..self.size())
                .map(|j| format!("{:.16e}", self.matrix.get(i, j)))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Entry for row point `p` against the center in column `j`: a Laplacian
/// row for interior equations, a plain kernel row for boundary equations.
fn entry(kernel: &TpsKernel, row_is_interior: bool, p: Point2, center: Point2) -> f64 {
    let r = p.dist(center);
    if row_is_interior {
        kernel.lap_phi_unchecked(r)
    } else {
        kernel.phi_unchecked(r)
    }
}

/// Builds the full collocation matrix for the set. Requires nu >= 2 so the
/// Laplacian rows are defined at their own centers.
pub fn assemble(kernel: &TpsKernel, domain: &Domain, set: &CollocationSet) -> Result<KansaMatrix> {
    if kernel.nu() < 2 {
        return Err(Error::UnsupportedKernel(kernel.nu()));
    }
    set.validate(domain)?;
    let n = set.n();
    let size = set.size();
    let mut matrix = Matrix::zeros(size, size);
    for i in 0..size {
        let row_is_interior = i < n;
        let p = set.center(i);
        for j in 0..size {
            matrix.set(i, j, entry(kernel, row_is_interior, p, set.center(j)));
        }
    }
    Ok(KansaMatrix { matrix, n, m: set.m() })
}

/// Right-hand side: source term and boundary datum with their names, kept
/// for reporting.
#[derive(Clone)]
pub struct RhsSpec {
    f_name: String,
    g_name: String,
    f: ScalarField,
    g: ScalarField,
}

impl RhsSpec {
    pub fn new(
        f_name: impl Into<String>,
        f: ScalarField,
        g_name: impl Into<String>,
        g: ScalarField,
    ) -> Self {
        RhsSpec {
            f_name: f_name.into(),
            g_name: g_name.into(),
            f,
            g,
        }
    }

    pub fn f_name(&self) -> &str {
        &self.f_name
    }

    pub fn g_name(&self) -> &str {
        &self.g_name
    }

    pub fn f(&self, p: Point2) -> f64 {
        (self.f)(p)
    }

    pub fn g(&self, p: Point2) -> f64 {
        (self.g)(p)
    }
}

impl std::fmt::Debug for RhsSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RhsSpec")
            .field("f", &self.f_name)
            .field("g", &self.g_name)
            .finish()
    }
}

/// Right-hand side vector: f at the interior points, then g at the
/// boundary points, in set order.
pub fn assemble_rhs(rhs: &RhsSpec, set: &CollocationSet) -> Result<Vec<f64>> {
    let mut b = Vec::with_capacity(set.size());
    for p in set.interior() {
        let v = rhs.f(*p);
        if !v.is_finite() {
            return Err(Error::RhsEvaluation(format!(
                "source term '{}' produced {} at ({}, {})",
                rhs.f_name, v, p.x, p.y
            )));
        }
        b.push(v);
    }
    for q in set.boundary_points() {
        let v = rhs.g(*q);
        if !v.is_finite() {
            return Err(Error::RhsEvaluation(format!(
                "boundary datum '{}' produced {} at ({}, {})",
                rhs.g_name, v, q.x, q.y
            )));
        }
        b.push(v);
    }
    Ok(b)
}

/// Grows the matrix by one boundary center appended as the last row and
/// column, reusing all old entries unchanged. Equals a fresh assembly of
/// the extended set bitwise.
pub fn extend_boundary(
    k: &KansaMatrix,
    kernel: &TpsKernel,
    domain: &Domain,
    set: &CollocationSet,
    t_new: f64,
) -> Result<(KansaMatrix, CollocationSet)> {
    if kernel.nu() < 2 {
        return Err(Error::UnsupportedKernel(kernel.nu()));
    }
    let mut extended = set.clone();
    extended.push_boundary(domain, t_new)?;
    let q_new = *extended.boundary_points().last().unwrap();

    let n = set.n();
    let old = set.size();
    let size = old + 1;
    let mut matrix = Matrix::zeros(size, size);
    for i in 0..old {
        for j in 0..old {
            matrix.set(i, j, k.get(i, j));
        }
    }
    for i in 0..old {
        let row_is_interior = i < n;
        matrix.set(i, old, entry(kernel, row_is_interior, set.center(i), q_new));
    }
    for j in 0..old {
        matrix.set(old, j, entry(kernel, false, q_new, set.center(j)));
    }
    matrix.set(old, old, 0.0);
    Ok((
        KansaMatrix {
            matrix,
            n,
            m: set.m() + 1,
        },
        extended,
    ))
}

/// Grows the matrix by one interior center, inserting its row and column
/// at block position n, between the interior and boundary blocks. Equals a
/// fresh assembly of the extended set bitwise.
pub fn extend_interior(
    k: &KansaMatrix,
    kernel: &TpsKernel,
    domain: &Domain,
    set: &CollocationSet,
    p_new: Point2,
) -> Result<(KansaMatrix, CollocationSet)> {
    if kernel.nu() < 2 {
        return Err(Error::UnsupportedKernel(kernel.nu()));
    }
    let mut extended = set.clone();
    extended.push_interior(domain, p_new)?;

    let n = set.n();
    let old = set.size();
    let size = old + 1;
    // old index i maps to i for i < n and to i+1 for i >= n
    let shift = |i: usize| if i < n { i } else { i + 1 };
    let mut matrix = Matrix::zeros(size, size);
    for i in 0..old {
        for j in 0..old {
            matrix.set(shift(i), shift(j), k.get(i, j));
        }
    }
    for i in 0..old {
        let row_is_interior = i < n;
        matrix.set(shift(i), n, entry(kernel, row_is_interior, set.center(i), p_new));
    }
    for j in 0..old {
        matrix.set(n, shift(j), entry(kernel, true, p_new, set.center(j)));
    }
    matrix.set(n, n, 0.0);
    Ok((
        KansaMatrix {
            matrix,
            n: n + 1,
            m: set.m(),
        },
        extended,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AnalyticCurve;
    use crate::linalg::lu_factor;
    use crate::sampling::{
        sample_boundary_arclength, sample_interior_uniform, SeededGenerator,
    };

    fn unit_disk() -> Domain {
        Domain::new(AnalyticCurve::circle(1.0, 0.0, 0.0).unwrap()).unwrap()
    }

    fn kernel2() -> TpsKernel {
        TpsKernel::new(2).unwrap()
    }

    fn det_of(k: &KansaMatrix) -> f64 {
        lu_factor(k.matrix()).unwrap().log_abs_det().value()
    }

    fn random_set(domain: &Domain, n: usize, m: usize, seed: u64) -> CollocationSet {
        let mut g = SeededGenerator::new(seed);
        let mut set = CollocationSet::empty();
        for _ in 0..n {
            let p = sample_interior_uniform(domain, &mut g).unwrap();
            set.push_interior(domain, p).unwrap();
        }
        for _ in 0..m {
            let t = sample_boundary_arclength(domain.boundary(), &mut g).unwrap();
            set.push_boundary(domain, t).unwrap();
        }
        set
    }

    #[test]
    fn two_by_two_mixed_example() {
        let d = unit_disk();
        let set = CollocationSet::new(&d, vec![Point2::new(0.0, 0.0)], vec![0.0]).unwrap();
        let k = assemble(&kernel2(), &d, &set).unwrap();
        assert_eq!(k.get(0, 0), 0.0);
        assert_eq!(k.get(0, 1), 8.0);
        assert_eq!(k.get(1, 0), 0.0);
        assert_eq!(k.get(1, 1), 0.0);
    }

    #[test]
    fn two_interior_unit_distance() {
        let d = unit_disk();
        let set = CollocationSet::new(
            &d,
            vec![Point2::new(-0.5, 0.0), Point2::new(0.5, 0.0)],
            vec![],
        )
        .unwrap();
        let k = assemble(&kernel2(), &d, &set).unwrap();
        assert_eq!(k.get(0, 1), 8.0);
        assert_eq!(k.get(1, 0), 8.0);
        assert!((det_of(&k) + 64.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_is_exactly_zero() {
        let d = unit_disk();
        for seed in 0..5 {
            let set = random_set(&d, 6, 5, seed);
            let k = assemble(&kernel2(), &d, &set).unwrap();
            for i in 0..k.size() {
                assert_eq!(k.get(i, i), 0.0);
            }
        }
    }

    #[test]
    fn nu_one_rejected_at_assembly() {
        let d = unit_disk();
        let set = random_set(&d, 3, 3, 1);
        let k1 = TpsKernel::new(1).unwrap();
        assert!(matches!(
            assemble(&k1, &d, &set),
            Err(Error::UnsupportedKernel(1))
        ));
        let k = assemble(&kernel2(), &d, &set).unwrap();
        assert!(matches!(
            extend_boundary(&k, &k1, &d, &set, 0.5),
            Err(Error::UnsupportedKernel(1))
        ));
    }

    #[test]
    fn boundary_value_block_holds_plain_kernel_values() {
        let d = unit_disk();
        let set = random_set(&d, 4, 3, 2);
        let k = assemble(&kernel2(), &d, &set).unwrap();
        let kn = kernel2();
        for h in 0..set.m() {
            let q = set.boundary_points()[h];
            for j in 0..set.n() {
                assert_eq!(k.get(set.n() + h, j), kn.phi_pair(q, set.interior()[j]));
            }
        }
    }

    #[test]
    fn entrywise_symmetries() {
        let d = unit_disk();
        let set = random_set(&d, 6, 5, 3);
        let k = assemble(&kernel2(), &d, &set).unwrap();
        let n = set.n();
        // interior Laplacian block and boundary value block are symmetric
        for i in 0..n {
            for j in 0..n {
                assert_eq!(k.get(i, j), k.get(j, i));
            }
        }
        for h in 0..set.m() {
            for l in 0..set.m() {
                assert_eq!(k.get(n + h, n + l), k.get(n + l, n + h));
            }
        }
    }

    #[test]
    fn rhs_layout_and_examples() {
        let d = unit_disk();
        let set = random_set(&d, 2, 1, 4);
        let rhs = RhsSpec::new(
            "four",
            Arc::new(|_| 4.0),
            "zero",
            Arc::new(|_| 0.0),
        );
        assert_eq!(assemble_rhs(&rhs, &set).unwrap(), vec![4.0, 4.0, 0.0]);

        let rhs = RhsSpec::new(
            "zero",
            Arc::new(|_| 0.0),
            "r-squared",
            Arc::new(|p: Point2| p.x * p.x + p.y * p.y),
        );
        let b = assemble_rhs(&rhs, &set).unwrap();
        for v in &b[2..] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rhs_evaluation_failure_reported() {
        let d = unit_disk();
        let set = random_set(&d, 1, 1, 5);
        let rhs = RhsSpec::new(
            "bad",
            Arc::new(|_| f64::NAN),
            "zero",
            Arc::new(|_| 0.0),
        );
        assert!(matches!(
            assemble_rhs(&rhs, &set),
            Err(Error::RhsEvaluation(_))
        ));
    }

    #[test]
    fn extend_boundary_matches_fresh_assembly() {
        let d = unit_disk();
        let kn = kernel2();
        let set = random_set(&d, 3, 2, 6);
        let k = assemble(&kn, &d, &set).unwrap();
        let (k2, set2) = extend_boundary(&k, &kn, &d, &set, 1.25).unwrap();
        assert_eq!(k2.size(), k.size() + 1);
        assert_eq!((k2.n(), k2.m()), (3, 3));
        let fresh = assemble(&kn, &d, &set2).unwrap();
        assert_eq!(fresh.matrix().data(), k2.matrix().data());
    }

    #[test]
    fn extend_interior_matches_fresh_assembly() {
        let d = unit_disk();
        let kn = kernel2();
        let set = random_set(&d, 3, 2, 7);
        let k = assemble(&kn, &d, &set).unwrap();
        let p_new = Point2::new(0.11, -0.37);
        let (k2, set2) = extend_interior(&k, &kn, &d, &set, p_new).unwrap();
        assert_eq!((k2.n(), k2.m()), (4, 2));
        let fresh = assemble(&kn, &d, &set2).unwrap();
        assert_eq!(fresh.matrix().data(), k2.matrix().data());
    }

    #[test]
    fn random_growth_sequences_extend_bitwise() {
        let d = unit_disk();
        let kn = kernel2();
        for seed in 0..10u64 {
            let mut g = SeededGenerator::new(1000 + seed);
            let mut set = CollocationSet::empty();
            let mut k = assemble(&kn, &d, &set).unwrap();
            for step in 0..12 {
                if g.uniform01() < 0.5 && step > 0 || step % 4 == 3 {
                    let t = sample_boundary_arclength(d.boundary(), &mut g).unwrap();
                    let (k2, s2) = extend_boundary(&k, &kn, &d, &set, t).unwrap();
                    k = k2;
                    set = s2;
                } else {
                    let p = sample_interior_uniform(&d, &mut g).unwrap();
                    let (k2, s2) = extend_interior(&k, &kn, &d, &set, p).unwrap();
                    k = k2;
                    set = s2;
                }
                let fresh = assemble(&kn, &d, &set).unwrap();
                assert_eq!(fresh.matrix().data(), k.matrix().data());
            }
        }
    }

    #[test]
    fn boundary_pair_closed_form() {
        // two boundary centers only: det = -phi(r)^2
        let d = unit_disk();
        let kn = kernel2();
        let set = CollocationSet::new(&d, vec![], vec![0.3]).unwrap();
        let k = assemble(&kn, &d, &set).unwrap();
        let (k2, set2) = extend_boundary(&k, &kn, &d, &set, 2.1).unwrap();
        let r = set2.boundary_points()[0].dist(set2.boundary_points()[1]);
        let want = -kn.phi(r).unwrap().powi(2);
        let got = det_of(&k2);
        assert!((got - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn mixed_pair_closed_form() {
        // one interior plus one boundary center: det = -phi(r) * lap_phi(r)
        let d = unit_disk();
        let kn = kernel2();
        let set = CollocationSet::new(&d, vec![], vec![0.0]).unwrap();
        let k = assemble(&kn, &d, &set).unwrap();
        let p = Point2::new(0.2, 0.1);
        let (k2, set2) = extend_interior(&k, &kn, &d, &set, p).unwrap();
        let r = p.dist(set2.boundary_points()[0]);
        let want = -kn.phi(r).unwrap() * kn.lap_phi(r).unwrap();
        let got = det_of(&k2);
        assert!((got - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn interior_swap_preserves_determinant() {
        let d = unit_disk();
        let kn = kernel2();
        for seed in 0..5u64 {
            let set = random_set(&d, 5, 4, 20 + seed);
            let mut interior = set.interior().to_vec();
            interior.swap(1, 3);
            let swapped =
                CollocationSet::new(&d, interior, set.boundary_t().to_vec()).unwrap();
            let da = det_of(&assemble(&kn, &d, &set).unwrap());
            let db = det_of(&assemble(&kn, &d, &swapped).unwrap());
            assert!((da - db).abs() <= 1e-12 * da.abs().max(db.abs()));
        }
    }

    #[test]
    fn append_and_permute_matches_insert() {
        // inserting the interior column at block position n agrees, up to
        // the permutation sign, with appending it last and permuting
        let d = unit_disk();
        let kn = kernel2();
        let set = random_set(&d, 3, 3, 30);
        let k = assemble(&kn, &d, &set).unwrap();
        let p_new = Point2::new(-0.21, 0.33);
        let (k_ins, _) = extend_interior(&k, &kn, &d, &set, p_new).unwrap();

        // manual append-at-end layout
        let old = set.size();
        let size = old + 1;
        let mut appended = Matrix::zeros(size, size);
        for i in 0..old {
            for j in 0..old {
                appended.set(i, j, k.get(i, j));
            }
        }
        for i in 0..old {
            appended.set(i, old, entry(&kn, i < set.n(), set.center(i), p_new));
        }
        for j in 0..old {
            appended.set(old, j, entry(&kn, true, p_new, set.center(j)));
        }

        let d_ins = lu_factor(k_ins.matrix()).unwrap().log_abs_det();
        let d_app = lu_factor(&appended).unwrap().log_abs_det();
        // moving the appended row and column to position n costs m row
        // swaps and m column swaps: net sign (-1)^{2m} = +1
        assert_eq!(d_ins.sign, d_app.sign);
        assert!((d_ins.log_abs - d_app.log_abs).abs() <= 1e-12 * d_ins.log_abs.abs().max(1.0));
    }

    #[test]
    fn duplicate_point_guard() {
        let d = unit_disk();
        let mut set = random_set(&d, 2, 2, 8);
        let p = set.interior()[0];
        assert!(matches!(
            set.push_interior(&d, p),
            Err(Error::DuplicatePoint { .. })
        ));
        let t = set.boundary_t()[0];
        assert!(matches!(
            set.push_boundary(&d, t),
            Err(Error::DuplicatePoint { .. })
        ));
    }

    #[test]
    fn exterior_interior_point_rejected() {
        let d = unit_disk();
        let err = CollocationSet::new(&d, vec![Point2::new(1.5, 0.0)], vec![]);
        assert!(matches!(err, Err(Error::InvalidSet(_))));
    }

    #[test]
    fn csv_export_round_figures() {
        let d = unit_disk();
        let set = CollocationSet::new(&d, vec![Point2::new(0.0, 0.0)], vec![0.0]).unwrap();
        let k = assemble(&kernel2(), &d, &set).unwrap();
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("0.0000000000000000e0,8.0000000000000000e0"));
    }
}
