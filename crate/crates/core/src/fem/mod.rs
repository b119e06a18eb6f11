//! P1 finite elements on the disk mesh for the pulled-back Poisson problem
//! `-div(A grad u) = f_ref` with homogeneous Dirichlet conditions.
//!
//! Coefficients are frozen at triangle centroids. Boundary unknowns are
//! eliminated, so every assembled operator acts on interior nodes only.

pub mod mesh;
pub mod sparse;

use std::sync::Arc;

use crate::deformation::{AngularTable, PointData, PullbackData};
use crate::error::{Error, Result};

pub use mesh::{build_disk_mesh, Mesh};
pub use sparse::{conjugate_gradient, CgOptions, CgStats, CsrMatrix};

/// Per-triangle geometry of the reference mesh.
#[derive(Debug, Clone, Copy)]
struct Element {
    area: f64,
    /// Gradients of the three barycentric basis functions.
    grads: [[f64; 2]; 3],
}

/// Per-triangle coefficient values used by [`FemSpace::assemble`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementCoefficients {
    /// Symmetric diffusion tensor `[a11, a12, a22]`.
    pub a: [f64; 3],
    /// Mass weight.
    pub w: f64,
    /// Load density.
    pub g: f64,
}

impl From<&PointData> for ElementCoefficients {
    fn from(p: &PointData) -> Self {
        ElementCoefficients {
            a: p.a,
            w: p.det_j,
            g: p.f_ref,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FemSystem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub load: Vec<f64>,
}

/// Node values on the full mesh; boundary entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FemSolution {
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    H10,
}

/// Mesh, interior numbering, element geometry, sparsity pattern and the
/// reference norm matrices. Shared read-only between solves.
#[derive(Debug)]
pub struct FemSpace {
    mesh: Mesh,
    interior: Vec<usize>,
    /// Interior index of each global node, `usize::MAX` on the boundary.
    local: Vec<usize>,
    elements: Vec<Element>,
    pattern: CsrMatrix,
    /// For each triangle, the value-array position of local entry `(a, b)`
    /// at `3a + b`, or `usize::MAX` when a vertex is on the boundary.
    scatter: Vec<[usize; 9]>,
    mass0: CsrMatrix,
    stiff0: CsrMatrix,
}

const NONE: usize = usize::MAX;

impl FemSpace {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let interior = mesh.interior_nodes();
        if interior.is_empty() {
            return Err(Error::invalid("mesh has no interior nodes"));
        }
        let mut local = vec![NONE; mesh.num_nodes()];
        for (k, &g) in interior.iter().enumerate() {
            local[g] = k;
        }
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); interior.len()];
        let mut elements = Vec::with_capacity(mesh.num_triangles());
        for t in &mesh.triangles {
            let area = mesh.signed_area(t);
            if !(area > 0.0) {
                return Err(Error::invalid("mesh has a non-positive triangle"));
            }
            let p = t.map(|i| mesh.nodes[i]);
            let mut grads = [[0.0; 2]; 3];
            for a in 0..3 {
                let q = p[(a + 1) % 3];
                let r = p[(a + 2) % 3];
                grads[a] = [(q[1] - r[1]) / (2.0 * area), (r[0] - q[0]) / (2.0 * area)];
            }
            elements.push(Element { area, grads });
            for &i in t {
                for &j in t {
                    if local[i] != NONE && local[j] != NONE {
                        rows[local[i]].push(local[j]);
                    }
                }
            }
        }
        let pattern = CsrMatrix::from_rows(&rows);
        let scatter = mesh
            .triangles
            .iter()
            .map(|t| {
                let mut s = [NONE; 9];
                for a in 0..3 {
                    for b in 0..3 {
                        let (i, j) = (local[t[a]], local[t[b]]);
                        if i != NONE && j != NONE {
                            s[3 * a + b] = pattern.position(i, j).expect("entry in pattern");
                        }
                    }
                }
                s
            })
            .collect();
        let mut space = FemSpace {
            mesh,
            interior,
            local,
            elements,
            pattern: pattern.clone(),
            scatter,
            mass0: pattern.clone(),
            stiff0: pattern,
        };
        let unit = vec![
            ElementCoefficients {
                a: [1.0, 0.0, 1.0],
                w: 1.0,
                g: 0.0
            };
            space.elements.len()
        ];
        space.mass0 = space.mass_matrix(&unit);
        space.stiff0 = space.stiffness_matrix(&unit);
        Ok(space)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Number of interior unknowns.
    pub fn dof(&self) -> usize {
        self.interior.len()
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn centroids(&self) -> Vec<[f64; 2]> {
        self.mesh.centroids()
    }

    /// Unit-weight mass matrix on interior nodes.
    pub fn mass0(&self) -> &CsrMatrix {
        &self.mass0
    }

    /// Identity-coefficient stiffness matrix on interior nodes.
    pub fn stiffness0(&self) -> &CsrMatrix {
        &self.stiff0
    }

    fn check_len(&self, coeffs: &[ElementCoefficients]) {
        assert_eq!(
            coeffs.len(),
            self.elements.len(),
            "one coefficient set per triangle"
        );
    }

    pub fn stiffness_matrix(&self, coeffs: &[ElementCoefficients]) -> CsrMatrix {
        self.check_len(coeffs);
        let mut m = self.pattern.clone();
        let vals = m.values_mut();
        for ((el, c), sc) in self.elements.iter().zip(coeffs).zip(&self.scatter) {
            let [a11, a12, a22] = c.a;
            let ag: [[f64; 2]; 3] = el
                .grads
                .map(|g| [a11 * g[0] + a12 * g[1], a12 * g[0] + a22 * g[1]]);
            for a in 0..3 {
                for b in a..3 {
                    let v = el.area * (ag[a][0] * el.grads[b][0] + ag[a][1] * el.grads[b][1]);
                    if sc[3 * a + b] != NONE {
                        vals[sc[3 * a + b]] += v;
                        if a != b {
                            vals[sc[3 * b + a]] += v;
                        }
                    }
                }
            }
        }
        m
    }

    pub fn mass_matrix(&self, coeffs: &[ElementCoefficients]) -> CsrMatrix {
        self.check_len(coeffs);
        let mut m = self.pattern.clone();
        let vals = m.values_mut();
        for ((el, c), sc) in self.elements.iter().zip(coeffs).zip(&self.scatter) {
            let local = local_mass(el.area, c.w);
            for a in 0..3 {
                for b in 0..3 {
                    if sc[3 * a + b] != NONE {
                        vals[sc[3 * a + b]] += local[a][b];
                    }
                }
            }
        }
        m
    }

    pub fn load_vector(&self, coeffs: &[ElementCoefficients]) -> Vec<f64> {
        self.check_len(coeffs);
        let mut f = vec![0.0; self.dof()];
        for ((el, c), t) in self.elements.iter().zip(coeffs).zip(&self.mesh.triangles) {
            let v = c.g * el.area / 3.0;
            for &i in t {
                if self.local[i] != NONE {
                    f[self.local[i]] += v;
                }
            }
        }
        f
    }

    pub fn assemble(&self, coeffs: &[ElementCoefficients]) -> FemSystem {
        FemSystem {
            stiffness: self.stiffness_matrix(coeffs),
            mass: self.mass_matrix(coeffs),
            load: self.load_vector(coeffs),
        }
    }

    /// Interior vector to full node vector.
    pub fn extend(&self, interior: &[f64]) -> Vec<f64> {
        assert_eq!(interior.len(), self.dof());
        let mut full = vec![0.0; self.mesh.num_nodes()];
        for (&g, &v) in self.interior.iter().zip(interior) {
            full[g] = v;
        }
        full
    }

    /// Full node vector to interior vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&g| full[g]).collect()
    }

    /// `sqrt(v^T M v)` or `sqrt(v^T K0 v)` for an interior vector.
    pub fn norm(&self, v: &[f64], which: NormKind) -> Result<f64> {
        if v.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                got: v.len(),
            });
        }
        let m = match which {
            NormKind::L2 => &self.mass0,
            NormKind::H10 => &self.stiff0,
        };
        Ok(m.quadratic_form(v).max(0.0).sqrt())
    }

    /// `|u_h - u|_{L2}` over the mesh, with `u_h` given on the full node set,
    /// using a degree-5 seven-point rule per triangle.
    pub fn l2_error_against(&self, full: &[f64], exact: impl Fn([f64; 2]) -> f64) -> f64 {
        let mut acc = 0.0;
        for (el, t) in self.elements.iter().zip(&self.mesh.triangles) {
            let p = t.map(|i| self.mesh.nodes[i]);
            let u = t.map(|i| full[i]);
            for (bary, w) in seven_point_rule() {
                let x = [
                    bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0],
                    bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1],
                ];
                let uh = bary[0] * u[0] + bary[1] * u[1] + bary[2] * u[2];
                let e = uh - exact(x);
                acc += w * el.area * e * e;
            }
        }
        acc.sqrt()
    }
}

/// Exact P1 mass matrix of a triangle with constant weight `w`.
pub fn local_mass(area: f64, w: f64) -> [[f64; 3]; 3] {
    let off = w * area / 12.0;
    let mut m = [[off; 3]; 3];
    for (a, row) in m.iter_mut().enumerate() {
        row[a] = 2.0 * off;
    }
    m
}

/// Radon's degree-5 rule on a triangle: barycentric points and weights
/// summing to one.
pub fn seven_point_rule() -> [([f64; 3], f64); 7] {
    let r = 15f64.sqrt();
    let a1 = (6.0 - r) / 21.0;
    let b1 = (9.0 + 2.0 * r) / 21.0;
    let a2 = (6.0 + r) / 21.0;
    let b2 = (9.0 - 2.0 * r) / 21.0;
    let w1 = (155.0 - r) / 1200.0;
    let w2 = (155.0 + r) / 1200.0;
    [
        ([1.0 / 3.0; 3], 9.0 / 40.0),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

/// Fixed space plus pullback data: everything needed to assemble and solve
/// for one parameter vector.
#[derive(Debug)]
pub struct PullbackProblem {
    pub space: Arc<FemSpace>,
    pub data: PullbackData,
    table: AngularTable,
    pub cg: CgOptions,
}

impl PullbackProblem {
    pub fn new(space: Arc<FemSpace>, data: PullbackData) -> Result<Self> {
        let table = AngularTable::new(&space.centroids(), data.field.s())?;
        Ok(PullbackProblem {
            space,
            data,
            table,
            cg: CgOptions::default(),
        })
    }

    pub fn s(&self) -> usize {
        self.data.field.s()
    }

    /// Pullback data at all centroids.
    pub fn element_data(&self, y: &[f64]) -> Result<Vec<PointData>> {
        let coeffs = self.data.field.coefficients(y)?;
        self.table.evaluate(&self.data, &coeffs)
    }

    pub fn element_coefficients(&self, y: &[f64]) -> Result<Vec<ElementCoefficients>> {
        Ok(self
            .element_data(y)?
            .iter()
            .map(ElementCoefficients::from)
            .collect())
    }

    pub fn assemble(&self, y: &[f64]) -> Result<FemSystem> {
        Ok(self.space.assemble(&self.element_coefficients(y)?))
    }

    /// Interior coefficients of the discrete solution.
    pub fn solve_poisson_interior(&self, y: &[f64]) -> Result<Vec<f64>> {
        let coeffs = self.element_coefficients(y)?;
        let k = self.space.stiffness_matrix(&coeffs);
        let f = self.space.load_vector(&coeffs);
        let mut u = vec![0.0; self.space.dof()];
        conjugate_gradient(&k, &f, &mut u, self.cg)?;
        Ok(u)
    }

    pub fn solve_poisson(&self, y: &[f64]) -> Result<FemSolution> {
        let u = self.solve_poisson_interior(y)?;
        Ok(FemSolution {
            coefficients: self.space.extend(&u),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::{pullback_data, Experiment, ScalarField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadrature_rule_is_degree_five() {
        // integral of l1^a l2^b l3^c over the reference triangle (area 1/2)
        // equals a! b! c! 2! / (a+b+c+2)! * area
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for a in 0..=5u32 {
            for b in 0..=5 - a {
                let c = 5 - a - b;
                for (aa, bb, cc) in [(a, b, c), (a, b, 0), (a, 0, 0)] {
                    let q: f64 = seven_point_rule()
                        .iter()
                        .map(|(l, w)| {
                            w * l[0].powi(aa as i32) * l[1].powi(bb as i32) * l[2].powi(cc as i32)
                        })
                        .sum();
                    let exact = fact(aa) * fact(bb) * fact(cc) * 2.0 / fact(aa + bb + cc + 2);
                    assert!((q - exact).abs() < 1e-15, "{aa} {bb} {cc}");
                }
            }
        }
    }

    #[test]
    fn unconstrained_laplacian_rows_sum_to_zero() {
        let space = FemSpace::new(build_disk_mesh(0.3).unwrap()).unwrap();
        let k = space.stiffness0();
        // interior rows not touching the boundary sum to zero
        let mesh = space.mesh();
        let mut touches = vec![false; space.dof()];
        for t in &mesh.triangles {
            if t.iter().any(|&i| mesh.boundary[i]) {
                for &i in t {
                    if !mesh.boundary[i] {
                        touches[space.local[i]] = true;
                    }
                }
            }
        }
        for i in 0..space.dof() {
            if !touches[i] {
                let s: f64 = k.row(i).map(|(_, v)| v).sum();
                assert!(s.abs() < 1e-12, "row {i} sums to {s}");
            }
        }
    }

    #[test]
    fn matches_cotangent_formula() {
        let space = FemSpace::new(build_disk_mesh(0.4).unwrap()).unwrap();
        let mesh = space.mesh();
        let k = space.stiffness0();
        // off-diagonal entry between interior nodes i, j:
        // -1/2 sum over adjacent triangles of cot(opposite angle)
        let cot = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
            let u = [q[0] - p[0], q[1] - p[1]];
            let v = [r[0] - p[0], r[1] - p[1]];
            (u[0] * v[0] + u[1] * v[1]) / (u[0] * v[1] - u[1] * v[0]).abs()
        };
        for (li, &gi) in space.interior().iter().enumerate() {
            for (lj, v) in k.row(li) {
                let gj = space.interior()[lj];
                if gj == gi {
                    continue;
                }
                let mut expected = 0.0;
                for t in &mesh.triangles {
                    if t.contains(&gi) && t.contains(&gj) {
                        let o = *t.iter().find(|&&x| x != gi && x != gj).unwrap();
                        expected -= 0.5 * cot(mesh.nodes[o], mesh.nodes[gi], mesh.nodes[gj]);
                    }
                }
                assert!((v - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mass_sums_to_area_without_elimination() {
        let space = FemSpace::new(build_disk_mesh(0.2).unwrap()).unwrap();
        let total: f64 = space
            .elements
            .iter()
            .map(|el| local_mass(el.area, 1.0).iter().flatten().sum::<f64>())
            .sum();
        assert!((total - space.mesh().area()).abs() < 1e-13);
        // after elimination only part of the partition of unity remains
        let ones = vec![1.0; space.dof()];
        let interior_sq = space.mass0().quadratic_form(&ones);
        assert!(interior_sq > 0.0 && interior_sq < space.mesh().area());
    }

    #[test]
    fn symmetric_assembly_is_exact() {
        let space = Arc::new(FemSpace::new(build_disk_mesh(0.2).unwrap()).unwrap());
        let field = Experiment::E2.field(10).unwrap();
        let problem = PullbackProblem::new(
            space,
            pullback_data(&field, ScalarField::ONE, ScalarField::ZERO),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y: Vec<f64> = (0..10).map(|_| rng.random_range(-0.5..0.5)).collect();
        let sys = problem.assemble(&y).unwrap();
        assert_eq!(sys.stiffness.transpose(), sys.stiffness);
        assert_eq!(sys.mass.transpose(), sys.mass);
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        let space = Arc::new(FemSpace::new(build_disk_mesh(0.3).unwrap()).unwrap());
        let field = Experiment::E1.field(3).unwrap();
        let problem = PullbackProblem::new(
            space,
            pullback_data(&field, ScalarField::ZERO, ScalarField::ZERO),
        )
        .unwrap();
        let sol = problem.solve_poisson(&[0.2, -0.1, 0.4]).unwrap();
        assert!(sol.coefficients.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn galerkin_residual_is_small() {
        let space = Arc::new(FemSpace::new(build_disk_mesh(0.1).unwrap()).unwrap());
        let field = Experiment::E1.field(8).unwrap();
        let problem = PullbackProblem::new(
            space.clone(),
            pullback_data(&field, ScalarField::ONE, ScalarField::ZERO),
        )
        .unwrap();
        let y = [0.3, -0.2, 0.1, 0.4, -0.4, 0.0, 0.25, -0.1];
        let sys = problem.assemble(&y).unwrap();
        let sol = problem.solve_poisson(&y).unwrap();
        let u = space.restrict(&sol.coefficients);
        let ku = sys.stiffness.matvec(&u);
        let fnorm = sparse::dot(&sys.load, &sys.load).sqrt();
        for (a, b) in ku.iter().zip(&sys.load) {
            assert!((a - b).abs() <= 1e-9 * fnorm);
        }
        for i in space.mesh().boundary_nodes() {
            assert_eq!(sol.coefficients[i], 0.0);
        }
    }

    #[test]
    fn manufactured_solution_converges() {
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for h in [0.4, 0.2, 0.1] {
            let space = Arc::new(FemSpace::new(build_disk_mesh(h).unwrap()).unwrap());
            let field = Experiment::E1.field(1).unwrap();
            let problem = PullbackProblem::new(
                space.clone(),
                pullback_data(&field, ScalarField::ONE, ScalarField::ZERO),
            )
            .unwrap();
            let sol = problem.solve_poisson(&[0.0]).unwrap();
            errs.push(space.l2_error_against(&sol.coefficients, |x| {
                (1.0 - x[0] * x[0] - x[1] * x[1]) / 4.0
            }));
            hs.push(space.mesh().max_edge());
        }
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
        let order = (errs[1] / errs[2]).ln() / (hs[1] / hs[2]).ln();
        assert!((1.7..=2.3).contains(&order), "order {order}");
    }

    #[test]
    fn norms_basic() {
        let space = FemSpace::new(build_disk_mesh(0.2).unwrap()).unwrap();
        assert_eq!(
            space.norm(&vec![0.0; space.dof()], NormKind::L2).unwrap(),
            0.0
        );
        assert!(space.norm(&[1.0], NormKind::H10).is_err());
        let ones = vec![1.0; space.dof()];
        let l2 = space.norm(&ones, NormKind::L2).unwrap();
        let sum: f64 = space.mass0().values().iter().sum();
        assert!((l2 * l2 - sum).abs() < 1e-13);
    }

    #[test]
    fn poincare_constant_below_one() {
        let space = FemSpace::new(build_disk_mesh(0.2).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let v: Vec<f64> = (0..space.dof())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let l2 = space.norm(&v, NormKind::L2).unwrap();
            let h1 = space.norm(&v, NormKind::H10).unwrap();
            assert!(l2 <= h1);
        }
    }
}
