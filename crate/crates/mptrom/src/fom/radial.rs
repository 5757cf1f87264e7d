//! Radially reduced conducting sphere model.
//!
//! For a sphere under unit excitation `e_i`, the vector transmission problem
//! admits the separable ansatz `theta_i(xi) = g(r) (e_i x xi_hat)`. The
//! angular integrals are exact, leaving one-dimensional weak forms on the
//! radial profile `g` over `(0, R]` with `g(0) = g(R) = 0`:
//!
//! ```text
//! k(u, v) = (8 pi / 3) int mu_tilde^-1 [ (u' + u/r)(v' + v/r) r^2 + 2 u v ] dr
//! c(u, v) = nu_tilde (8 pi / 3) int_0^1 u v r^2 dr
//! m(u, v) = (8 pi / 3) int_1^R u v r^2 dr
//! ```
//!
//! and the magnetostatic right-hand side `-(16 pi / 3) int mu_tilde^-1
//! (w' r^2 + 2 w r) dr`. Each excitation direction carries its own copy of
//! the radial system in a block-diagonal global matrix, which keeps the
//! cross-direction quadratic forms exactly zero, as the full 3D sphere's
//! symmetries demand.
//!
//! The discretization uses Gauss-Lobatto Lagrange elements of order `p` with
//! boundary layers embedded just inside `r = 1` and geometrically graded
//! interior/exterior regions. All integrands expand to polynomials, so the
//! `p + 2`-point Gauss rule integrates every bilinear form exactly.

use super::{
    DiscretizationInfo, FomError, FullOrderModel, ImEvaluator, MaterialParams, MeshGrading,
};
use crate::linalg::{cg_solve, Preconditioner, SparseComplexMatrix};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Angular factor shared by every reduced bilinear form.
const ANGULAR: f64 = 8.0 * PI / 3.0;

#[derive(Debug, Clone)]
pub struct RadialSphereParams {
    pub materials: MaterialParams,
    pub grading: MeshGrading,
    pub order_p: usize,
    pub outer_radius: f64,
    pub n_interior: usize,
    pub n_exterior: usize,
    /// Tolerance of the internal magnetostatic solve.
    pub theta0_rel_tol: f64,
}

impl RadialSphereParams {
    pub fn new(materials: MaterialParams, grading: MeshGrading) -> Self {
        Self {
            materials,
            grading,
            order_p: 3,
            outer_radius: 1000.0,
            n_interior: 16,
            n_exterior: 30,
            theta0_rel_tol: 1e-10,
        }
    }
}

// ---------------------------------------------------------------------------
// Quadrature and shape functions
// ---------------------------------------------------------------------------

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| nodes[a].partial_cmp(&nodes[b]).unwrap());
    (
        order.iter().map(|&i| nodes[i]).collect(),
        order.iter().map(|&i| weights[i]).collect(),
    )
}

/// Gauss-Lobatto points on [-1, 1]: the endpoints plus the roots of `P'_p`.
fn gauss_lobatto_nodes(p: usize) -> Vec<f64> {
    assert!(p >= 1);
    let mut nodes = vec![-1.0];
    for k in 1..p {
        let mut x = (PI * (p - k) as f64 / p as f64).cos();
        for _ in 0..100 {
            let (pp, dp) = legendre_with_derivative(p, x);
            // Newton on P'_p using (1 - x^2) P'' = 2 x P' - p(p+1) P.
            let d2 = (2.0 * x * dp - (p * (p + 1)) as f64 * pp) / (1.0 - x * x);
            let dx = dp / d2;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(x);
    }
    nodes.push(1.0);
    nodes
}

/// Lagrange basis over `points` evaluated with derivative at `x`.
fn lagrange_eval(points: &[f64], k: usize, x: f64) -> (f64, f64) {
    let n = points.len();
    let mut value = 1.0;
    for m in 0..n {
        if m != k {
            value *= (x - points[m]) / (points[k] - points[m]);
        }
    }
    let mut deriv = 0.0;
    for m in 0..n {
        if m == k {
            continue;
        }
        let mut term = 1.0 / (points[k] - points[m]);
        for j in 0..n {
            if j != k && j != m {
                term *= (x - points[j]) / (points[k] - points[j]);
            }
        }
        deriv += term;
    }
    (value, deriv)
}

/// Shape values and reference derivatives tabulated at the quadrature points.
struct ShapeTable {
    /// `value[q][k]`
    value: Vec<Vec<f64>>,
    /// `d/dxi` at the quadrature points.
    deriv: Vec<Vec<f64>>,
}

fn tabulate_shapes(order_p: usize, quad_points: &[f64]) -> ShapeTable {
    let nodes = gauss_lobatto_nodes(order_p);
    let mut value = Vec::with_capacity(quad_points.len());
    let mut deriv = Vec::with_capacity(quad_points.len());
    for &x in quad_points {
        let mut vrow = Vec::with_capacity(nodes.len());
        let mut drow = Vec::with_capacity(nodes.len());
        for k in 0..nodes.len() {
            let (v, d) = lagrange_eval(&nodes, k, x);
            vrow.push(v);
            drow.push(d);
        }
        value.push(vrow);
        deriv.push(drow);
    }
    ShapeTable { value, deriv }
}

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Element {
    left: f64,
    right: f64,
    conductor: bool,
}

/// Breakpoints of `n` geometrically coarsening widths over `[start, end]`
/// with ratio 1.5, the finest element at the `start` side.
fn geometric_breaks(start: f64, end: f64, n: usize) -> Vec<f64> {
    const RATIO: f64 = 1.5;
    let length = end - start;
    let h0 = length * (RATIO - 1.0) / (RATIO.powi(n as i32) - 1.0);
    let widths: Vec<f64> = (0..n).map(|j| h0 * RATIO.powi(j as i32)).collect();
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(start);
    let mut acc = start;
    for (j, w) in widths.iter().enumerate() {
        acc = if j + 1 == n { end } else { acc + w };
        pts.push(acc);
    }
    pts
}

struct RadialDisc {
    elements: Vec<Element>,
    order_p: usize,
    /// Coordinates of every global node (element-shared endpoints included).
    nodes: Vec<f64>,
    n_free: usize,
    quad_points: Vec<f64>,
    quad_weights: Vec<f64>,
    shapes: ShapeTable,
    mu_r: f64,
    nu_tilde: f64,
}

impl RadialDisc {
    fn build(params: &RadialSphereParams) -> Result<Self, FomError> {
        let p = params.order_p;
        if p < 1 {
            return Err(FomError::InvalidParameter("order_p must be >= 1".into()));
        }
        if params.outer_radius <= 2.0 {
            return Err(FomError::InvalidParameter(format!(
                "outer_radius = {} too small; the truncation boundary must sit well outside the object",
                params.outer_radius
            )));
        }
        if params.n_interior == 0 || params.n_exterior == 0 {
            return Err(FomError::InvalidParameter(
                "element counts must be >= 1".into(),
            ));
        }
        let total_layers: f64 = params.grading.thicknesses.iter().sum();
        if !(total_layers < 1.0) {
            return Err(FomError::InvalidGrading(format!(
                "layers total {total_layers} >= conductor radius 1"
            )));
        }
        if p == 1 && params.n_interior < 2 {
            log::warn!(
                "insufficient resolution: interior region has {} element(s) at p = 1",
                params.n_interior
            );
        }

        // Interior: (0, 1 - T] in uniform coarse elements. Depth coverage of
        // the skin-depth decay below the layers is the grading schemes' job;
        // a fine interior would mask the differences between them.
        let mut breaks: Vec<f64> = (0..=params.n_interior)
            .map(|j| (1.0 - total_layers) * j as f64 / params.n_interior as f64)
            .collect();
        // Layers: thicknesses listed surface-first, so walk them inward from 1.
        let mut layer_pts = Vec::with_capacity(params.grading.thicknesses.len());
        let mut pos = 1.0;
        for t in &params.grading.thicknesses {
            pos -= t;
            layer_pts.push(pos);
        }
        layer_pts.reverse();
        if let Some(first) = layer_pts.first_mut() {
            *first = 1.0 - total_layers;
        }
        breaks.extend(layer_pts.iter().skip(1));
        breaks.push(1.0);
        // Exterior: (1, R], finest element at the conductor surface.
        let ext = geometric_breaks(1.0, params.outer_radius, params.n_exterior);
        breaks.extend(ext.iter().skip(1));

        let mut elements = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            if !(w[1] > w[0]) {
                return Err(FomError::InvalidGrading(format!(
                    "degenerate element [{}, {}]",
                    w[0], w[1]
                )));
            }
            elements.push(Element {
                left: w[0],
                right: w[1],
                conductor: w[1] <= 1.0 + 1e-12,
            });
        }

        let gl = gauss_lobatto_nodes(p);
        let mut nodes = Vec::with_capacity(elements.len() * p + 1);
        for (e, el) in elements.iter().enumerate() {
            let mid = 0.5 * (el.left + el.right);
            let half = 0.5 * (el.right - el.left);
            let start = if e == 0 { 0 } else { 1 };
            for &xi in &gl[start..] {
                nodes.push(mid + half * xi);
            }
        }
        // Snap the shared endpoints exactly.
        let n_nodes = nodes.len();
        nodes[0] = 0.0;
        nodes[n_nodes - 1] = params.outer_radius;

        let (quad_points, quad_weights) = gauss_legendre(p + 2);
        let shapes = tabulate_shapes(p, &quad_points);

        Ok(Self {
            elements,
            order_p: p,
            nodes,
            n_free: n_nodes - 2,
            quad_points,
            quad_weights,
            shapes,
            mu_r: params.materials.mu_r,
            nu_tilde: params.materials.nu_tilde(),
        })
    }

    /// Global node index of local node `k` in element `e`.
    fn global_node(&self, e: usize, k: usize) -> usize {
        e * self.order_p + k
    }

    /// Free-DOF index of a global node, or `None` on the Dirichlet boundary.
    fn free_index(&self, g: usize) -> Option<usize> {
        if g == 0 || g + 1 == self.nodes.len() {
            None
        } else {
            Some(g - 1)
        }
    }

    fn mu_inv(&self, conductor: bool) -> f64 {
        if conductor {
            1.0 / self.mu_r
        } else {
            1.0
        }
    }
}

struct RadialMatrices {
    stiffness: Vec<(usize, usize, f64)>,
    conduction: Vec<(usize, usize, f64)>,
    reg_mass: Vec<(usize, usize, f64)>,
    full_mass: Vec<(usize, usize, f64)>,
    rhs0: Vec<f64>,
    t_moment: Vec<f64>,
}

fn assemble_radial(disc: &RadialDisc) -> RadialMatrices {
    let p = disc.order_p;
    let nq = disc.quad_points.len();
    let n_free = disc.n_free;
    let mut out = RadialMatrices {
        stiffness: Vec::new(),
        conduction: Vec::new(),
        reg_mass: Vec::new(),
        full_mass: Vec::new(),
        rhs0: vec![0.0; n_free],
        t_moment: vec![0.0; n_free],
    };

    let nl = p + 1;
    let mut ke = vec![0.0; nl * nl];
    let mut ce = vec![0.0; nl * nl];
    let mut me = vec![0.0; nl * nl];
    let mut re = vec![0.0; nl];
    let mut te = vec![0.0; nl];

    for (e, el) in disc.elements.iter().enumerate() {
        let half = 0.5 * (el.right - el.left);
        let mid = 0.5 * (el.left + el.right);
        let dxi = 1.0 / half;
        let mu_inv = disc.mu_inv(el.conductor);
        ke.iter_mut().for_each(|v| *v = 0.0);
        ce.iter_mut().for_each(|v| *v = 0.0);
        me.iter_mut().for_each(|v| *v = 0.0);
        re.iter_mut().for_each(|v| *v = 0.0);
        te.iter_mut().for_each(|v| *v = 0.0);

        for q in 0..nq {
            let x = mid + half * disc.quad_points[q];
            let w = disc.quad_weights[q] * half;
            let vals = &disc.shapes.value[q];
            let ders = &disc.shapes.deriv[q];
            for k in 0..nl {
                let (vk, dk) = (vals[k], ders[k] * dxi);
                for l in k..nl {
                    let (vl, dl) = (vals[l], ders[l] * dxi);
                    // Expanded curl-curl integrand; polynomial, no 1/r terms.
                    let kk = dk * dl * (x * x) + (dk * vl + vk * dl) * x + 3.0 * (vk * vl);
                    ke[k * nl + l] += w * mu_inv * ANGULAR * kk;
                    let mm = vk * vl * (x * x) * ANGULAR;
                    if el.conductor {
                        ce[k * nl + l] += w * disc.nu_tilde * mm;
                    } else {
                        me[k * nl + l] += w * mm;
                    }
                }
                re[k] += w * mu_inv * (-2.0 * ANGULAR) * (dk * x * x + 2.0 * vk * x);
                if el.conductor {
                    te[k] += w * disc.nu_tilde * ANGULAR * vk * x * x * x;
                }
            }
        }

        for k in 0..nl {
            let gk = match disc.free_index(disc.global_node(e, k)) {
                Some(i) => i,
                None => continue,
            };
            out.rhs0[gk] += re[k];
            out.t_moment[gk] += te[k];
            for l in k..nl {
                let gl = match disc.free_index(disc.global_node(e, l)) {
                    Some(i) => i,
                    None => continue,
                };
                let push_pair =
                    |dst: &mut Vec<(usize, usize, f64)>, v: f64| {
                        if v != 0.0 {
                            dst.push((gk, gl, v));
                            if gk != gl {
                                dst.push((gl, gk, v));
                            }
                        }
                    };
                push_pair(&mut out.stiffness, ke[k * nl + l]);
                push_pair(&mut out.conduction, ce[k * nl + l]);
                push_pair(&mut out.reg_mass, me[k * nl + l]);
                push_pair(&mut out.full_mass, ce[k * nl + l] / disc.nu_tilde + me[k * nl + l]);
            }
        }
    }
    out
}

fn real_triplets_to_sparse(
    n: usize,
    triplets: &[(usize, usize, f64)],
) -> SparseComplexMatrix {
    let complex: Vec<(usize, usize, Complex64)> = triplets
        .iter()
        .map(|&(r, c, v)| (r, c, Complex64::new(v, 0.0)))
        .collect();
    SparseComplexMatrix::from_triplets(n, n, &complex).expect("assembly indices in range")
}

/// Replicates a radial matrix into a 3-block global matrix, one block per
/// excitation direction.
fn block_diag3(n_free: usize, triplets: &[(usize, usize, f64)]) -> SparseComplexMatrix {
    let mut all = Vec::with_capacity(triplets.len() * 3);
    for dir in 0..3 {
        let off = dir * n_free;
        all.extend(
            triplets
                .iter()
                .map(|&(r, c, v)| (r + off, c + off, Complex64::new(v, 0.0))),
        );
    }
    SparseComplexMatrix::from_triplets(3 * n_free, 3 * n_free, &all).expect("block indices in range")
}

// ---------------------------------------------------------------------------
// Capabilities kept by the generated model
// ---------------------------------------------------------------------------

/// Assembly capability of a generated radial model: re-solving the
/// magnetostatic problem and embedding radial vectors into the block layout.
pub struct RadialAssembly {
    theta0_operator: SparseComplexMatrix,
    rhs0: Vec<f64>,
    n_free: usize,
}

impl RadialAssembly {
    pub fn n_free(&self) -> usize {
        self.n_free
    }

    /// Solves the regularized `nu = 0` system for the radial profile.
    pub fn solve_theta0_radial(&self, rel_tol: f64) -> Result<Vec<f64>, FomError> {
        let rhs: Vec<Complex64> = self.rhs0.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let rhs_norm: f64 = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if rhs_norm == 0.0 {
            return Ok(vec![0.0; self.n_free]);
        }
        let sol = cg_solve(
            &self.theta0_operator,
            &rhs,
            rel_tol,
            400_000,
            Preconditioner::Jacobi,
        )?;
        let imag: f64 = sol.x.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
        let real_norm: f64 = sol.x.iter().map(|v| v.re * v.re).sum::<f64>().sqrt();
        if imag > 1e-12 * real_norm.max(1.0) {
            log::warn!("magnetostatic solve picked up an imaginary component {imag:e}");
        }
        Ok(sol.x.iter().map(|v| v.re).collect())
    }

    /// Places a radial vector into block `direction` of the global layout.
    pub fn embed_real(&self, radial: &[f64], direction: usize) -> Vec<f64> {
        assert!(direction < 3);
        assert_eq!(radial.len(), self.n_free);
        let mut out = vec![0.0; 3 * self.n_free];
        out[direction * self.n_free..(direction + 1) * self.n_free].copy_from_slice(radial);
        out
    }
}

/// Element-quadrature tensor evaluation on the radial discretization.
struct RadialImEvaluator {
    disc: RadialDisc,
    /// Radial magnetostatic profile (free DOFs).
    theta0_radial: Vec<f64>,
    alpha: f64,
}

impl RadialImEvaluator {
    /// Coefficient of local node `k` in element `e` from a per-direction
    /// block of the global vector; Dirichlet nodes contribute zero.
    fn coeff(&self, block: &[Complex64], e: usize, k: usize) -> Complex64 {
        match self.disc.free_index(self.disc.global_node(e, k)) {
            Some(i) => block[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    fn coeff_real(&self, block: &[f64], e: usize, k: usize) -> f64 {
        match self.disc.free_index(self.disc.global_node(e, k)) {
            Some(i) => block[i],
            None => 0.0,
        }
    }

    fn block<'v>(&self, v: &'v [Complex64], dir: usize) -> Result<&'v [Complex64], FomError> {
        let n = self.disc.n_free;
        if v.len() != 3 * n {
            return Err(FomError::DimensionMismatch(format!(
                "coefficient vector has {} entries, model has {}",
                v.len(),
                3 * n
            )));
        }
        Ok(&v[dir * n..(dir + 1) * n])
    }
}

impl ImEvaluator for RadialImEvaluator {
    fn r_entry(
        &self,
        i: usize,
        j: usize,
        qi: &[Complex64],
        qj: &[Complex64],
    ) -> Result<f64, FomError> {
        let bi = self.block(qi, i)?;
        let bj = self.block(qj, j)?;
        if i != j {
            // The reduced ansatz fields of different directions are
            // angularly orthogonal; the integral vanishes identically.
            return Ok(0.0);
        }
        let disc = &self.disc;
        let nl = disc.order_p + 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, el) in disc.elements.iter().enumerate() {
            let half = 0.5 * (el.right - el.left);
            let mid = 0.5 * (el.left + el.right);
            let dxi = 1.0 / half;
            let mu_inv = disc.mu_inv(el.conductor);
            for q in 0..disc.quad_points.len() {
                let x = mid + half * disc.quad_points[q];
                let w = disc.quad_weights[q] * half;
                let mut gi = Complex64::new(0.0, 0.0);
                let mut gj = Complex64::new(0.0, 0.0);
                let mut di = Complex64::new(0.0, 0.0);
                let mut dj = Complex64::new(0.0, 0.0);
                for k in 0..nl {
                    let v = disc.shapes.value[q][k];
                    let d = disc.shapes.deriv[q][k] * dxi;
                    gi += self.coeff(bi, e, k) * v;
                    gj += self.coeff(bj, e, k) * v;
                    di += self.coeff(bi, e, k) * d;
                    dj += self.coeff(bj, e, k) * d;
                }
                let gi_c = gi.conj();
                let di_c = di.conj();
                let integrand =
                    di_c * dj * (x * x) + (di_c * gj + gi_c * dj) * x + 3.0 * gi_c * gj;
                acc += w * mu_inv * ANGULAR * integrand;
            }
        }
        let scale = self.alpha.powi(3) / 4.0;
        if acc.im.abs() > 1e-9 * acc.norm().max(1e-300) {
            log::warn!(
                "integral method real block has imaginary residue {:e} (relative)",
                acc.im.abs() / acc.norm()
            );
        }
        Ok(-scale * acc.re)
    }

    fn i_entry(
        &self,
        i: usize,
        j: usize,
        qi: &[Complex64],
        qj: &[Complex64],
        omega: f64,
    ) -> Result<f64, FomError> {
        let bi = self.block(qi, i)?;
        let bj = self.block(qj, j)?;
        if i != j {
            return Ok(0.0);
        }
        let disc = &self.disc;
        let nl = disc.order_p + 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, el) in disc.elements.iter().enumerate() {
            if !el.conductor {
                continue;
            }
            let half = 0.5 * (el.right - el.left);
            let mid = 0.5 * (el.left + el.right);
            for q in 0..disc.quad_points.len() {
                let x = mid + half * disc.quad_points[q];
                let w = disc.quad_weights[q] * half;
                let mut gi = Complex64::new(0.0, 0.0);
                let mut gj = Complex64::new(0.0, 0.0);
                let mut g0 = 0.0;
                for k in 0..nl {
                    let v = disc.shapes.value[q][k];
                    gi += self.coeff(bi, e, k) * v;
                    gj += self.coeff(bj, e, k) * v;
                    g0 += self.coeff_real(&self.theta0_radial, e, k) * v;
                }
                // Total field profile g^(1) + g^(0) + r for each direction.
                let ti = gi + g0 + x;
                let tj = gj + g0 + x;
                acc += w * ti.conj() * tj * (x * x);
            }
        }
        let value = omega * disc.nu_tilde * ANGULAR * self.alpha.powi(3) / 4.0 * acc.re;
        Ok(value)
    }
}

// ---------------------------------------------------------------------------
// Model construction
// ---------------------------------------------------------------------------

/// Builds the radially reduced sphere model: assembles the block systems,
/// solves the magnetostatic problem, and attaches the postprocessing vectors
/// and element-quadrature capability.
pub fn build_radial_sphere_fom(params: &RadialSphereParams) -> Result<FullOrderModel, FomError> {
    let disc = RadialDisc::build(params)?;
    let radial = assemble_radial(&disc);
    let n_free = disc.n_free;
    let n_dofs = 3 * n_free;

    let k_radial = real_triplets_to_sparse(n_free, &radial.stiffness);
    let m_radial = real_triplets_to_sparse(n_free, &radial.reg_mass);
    let theta0_operator = k_radial
        .linear_combination(
            Complex64::new(1.0, 0.0),
            &m_radial,
            Complex64::new(params.materials.epsilon, 0.0),
        )
        .expect("radial K and M dimensions agree");

    let assembly = Arc::new(RadialAssembly {
        theta0_operator,
        rhs0: radial.rhs0.clone(),
        n_free,
    });
    let theta0_radial = assembly.solve_theta0_radial(params.theta0_rel_tol)?;

    let stiffness = block_diag3(n_free, &radial.stiffness);
    let conduction = block_diag3(n_free, &radial.conduction);
    let reg_mass = block_diag3(n_free, &radial.reg_mass);
    let full_mass = block_diag3(n_free, &radial.full_mass);

    let embed = |v: &[f64], dir: usize| assembly.embed_real(v, dir);
    let theta0 = [
        embed(&theta0_radial, 0),
        embed(&theta0_radial, 1),
        embed(&theta0_radial, 2),
    ];
    let t_moment = [
        embed(&radial.t_moment, 0),
        embed(&radial.t_moment, 1),
        embed(&radial.t_moment, 2),
    ];
    let s_moment = t_moment.clone();

    let nu_tilde = params.materials.nu_tilde();
    let mut c_scalar = [[0.0; 3]; 3];
    for d in 0..3 {
        c_scalar[d][d] = nu_tilde * 8.0 * PI / 15.0;
    }

    let alpha = params.materials.alpha;
    let im = RadialImEvaluator {
        disc,
        theta0_radial,
        alpha,
    };
    let description = format!(
        "radial sphere: {:?} grading, L = {}, tau = {:.6e}, p = {}, R = {}, {} elements",
        params.grading.scheme,
        params.grading.layers,
        params.grading.tau,
        params.order_p,
        params.outer_radius,
        im.disc.elements.len()
    );

    Ok(FullOrderModel {
        n_dofs,
        m_dofs: n_dofs,
        stiffness,
        conduction,
        reg_mass,
        c1: None,
        c2: None,
        theta0,
        s_moment,
        t_moment,
        c_scalar,
        materials: params.materials,
        volume_b_alpha: alpha.powi(3) * 4.0 * PI / 3.0,
        shared_basis: true,
        norm_mass: Some(full_mass),
        norm_override: None,
        source_hat: None,
        im: Some(Arc::new(im)),
        assembly: Some(assembly),
        discretization: DiscretizationInfo {
            description,
            order_p: params.order_p,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fom::{assemble_source, GradingScheme, MeshGrading};
    use crate::linalg::quad_form;

    fn materials(mu_r: f64) -> MaterialParams {
        MaterialParams::new(1e-3, 1e6, mu_r, 1e-10).unwrap()
    }

    fn sphere(mu_r: f64) -> FullOrderModel {
        let m = materials(mu_r);
        let tau = crate::fom::nondim_skin_depth(1e8, &m).unwrap();
        let grading = MeshGrading::new(GradingScheme::GeometricIncreasing, 2, tau).unwrap();
        build_radial_sphere_fom(&RadialSphereParams::new(m, grading)).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        // degree 9 polynomial x^8: integral over [-1,1] is 2/9.
        let val: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(8)).sum();
        assert!((val - 2.0 / 9.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lobatto_nodes_bracket_and_sort() {
        for p in 1..=6 {
            let n = gauss_lobatto_nodes(p);
            assert_eq!(n.len(), p + 1);
            assert_eq!(n[0], -1.0);
            assert_eq!(n[p], 1.0);
            for w in n.windows(2) {
                assert!(w[1] > w[0]);
            }
        }
    }

    #[test]
    fn assembled_matrices_are_exactly_symmetric() {
        let fom = sphere(32.0);
        assert_eq!(fom.stiffness.symmetry_defect(), 0.0);
        assert_eq!(fom.conduction.symmetry_defect(), 0.0);
        assert_eq!(fom.reg_mass.symmetry_defect(), 0.0);
        fom.validate().unwrap();
    }

    #[test]
    fn mu_r_one_has_no_magnetostatic_response() {
        let fom = sphere(1.0);
        let norm: f64 = fom.theta0[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-10, "theta0 norm {norm}");
    }

    #[test]
    fn theta0_trace_matches_analytic_sphere() {
        // Interior solution g = A r with A = 2 (mu_r - 1) / (mu_r + 2); the
        // node at r = 1 carries the trace value A.
        for mu_r in [2.0, 8.0, 32.0] {
            let m = materials(mu_r);
            let tau = crate::fom::nondim_skin_depth(1e8, &m).unwrap();
            let grading = MeshGrading::new(GradingScheme::GeometricIncreasing, 2, tau).unwrap();
            let params = RadialSphereParams::new(m, grading);
            let disc = RadialDisc::build(&params).unwrap();
            let fom = build_radial_sphere_fom(&params).unwrap();

            let surface_node = disc
                .nodes
                .iter()
                .position(|&x| (x - 1.0).abs() < 1e-12)
                .expect("node at r = 1");
            let idx = disc.free_index(surface_node).unwrap();
            let a_expect = 2.0 * (mu_r - 1.0) / (mu_r + 2.0);
            let a_num = fom.theta0[0][idx];
            assert!(
                (a_num - a_expect).abs() < 2e-3 * a_expect.abs(),
                "mu_r = {mu_r}: trace {a_num} vs {a_expect}"
            );
        }
    }

    #[test]
    fn t_moment_equals_conduction_times_radius_interpolant() {
        // e_i x xi corresponds to g(r) = r, which the Lagrange basis
        // represents exactly, so t = C * (nodal r values).
        let m = materials(32.0);
        let tau = crate::fom::nondim_skin_depth(1e8, &m).unwrap();
        let grading = MeshGrading::new(GradingScheme::GeometricIncreasing, 2, tau).unwrap();
        let params = RadialSphereParams::new(m, grading);
        let disc = RadialDisc::build(&params).unwrap();
        let fom = build_radial_sphere_fom(&params).unwrap();

        let mut r_vec = vec![Complex64::new(0.0, 0.0); fom.n_dofs];
        for g in 0..disc.nodes.len() {
            if let Some(i) = disc.free_index(g) {
                // Only the conductor portion matters; C has no exterior rows,
                // but the interpolant must be exact there, so fill all nodes.
                r_vec[i] = Complex64::new(disc.nodes[g], 0.0);
            }
        }
        let ct = fom.conduction.matvec_alloc(&r_vec);
        for i in 0..disc.n_free {
            let want = fom.t_moment[0][i];
            assert!(
                (ct[i].re - want).abs() <= 1e-12 * want.abs().max(1e-12),
                "row {i}: {} vs {}",
                ct[i].re,
                want
            );
        }
    }

    #[test]
    fn source_scales_linearly_in_omega() {
        let fom = sphere(32.0);
        let r1 = assemble_source(&fom, 0, 1e4).unwrap();
        let r2 = assemble_source(&fom, 0, 2e4).unwrap();
        for (a, b) in r1.iter().zip(&r2) {
            assert_eq!(b.re, 2.0 * a.re);
            assert_eq!(b.im, 2.0 * a.im);
        }
        // Real postprocessing vectors make the source purely imaginary.
        assert!(r1.iter().all(|v| v.re == 0.0));
    }

    #[test]
    fn blocks_of_different_directions_do_not_couple() {
        let fom = sphere(32.0);
        let o0: Vec<Complex64> = fom.theta0[0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let o1: Vec<Complex64> = fom.theta0[1].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let cross = quad_form(&o0, &fom.stiffness, &o1, false).unwrap();
        assert_eq!(cross.norm(), 0.0);
        let same = quad_form(&o0, &fom.stiffness, &o0, false).unwrap();
        assert!(same.norm() > 0.0);
    }

    #[test]
    fn system_matrix_imaginary_part_is_minus_omega_conduction() {
        let fom = sphere(32.0);
        let omega = 3.7e5;
        let a = fom.system_matrix(omega);
        let mut x = vec![Complex64::new(0.0, 0.0); fom.n_dofs];
        for (i, v) in x.iter_mut().enumerate() {
            *v = Complex64::new(((i % 7) as f64 - 3.0) / 3.0, 0.0);
        }
        let xax = quad_form(&x, &a, &x, false).unwrap();
        let xcx = quad_form(&x, &fom.conduction, &x, false).unwrap();
        assert!(
            (xax.im + omega * xcx.re).abs() <= 1e-10 * (omega * xcx.re).abs().max(1e-300),
            "Im(x^T A x) = {} vs -omega x^T C x = {}",
            xax.im,
            -omega * xcx.re
        );
    }
}
