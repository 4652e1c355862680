//! Stability conditions as strict LMI feasibility problems, plus the
//! congruence transforms that connect them.
//!
//! Every constraint is an affine symmetric-matrix map
//! `F(X) = C + Σ coef·(LᵀXR + RᵀXᵀL)/2` over the decision blocks, so one
//! evaluator serves the solver, the validator and the audit.

use crate::algebra::{block_diag, hstack, kron, set_block, sym_eig_extrema, symmetrize, vstack, RealMatrix};
use crate::error::{Error, Result};
use crate::families::{
    bidiagonal_stamp, build_bliman, build_kronecker_e, build_thm4, BlimanFamily, ShuffleFamily, SystemPair,
    Thm4Family,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Structure imposed on a decision block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Symmetric,
    /// Symmetric and required to be positive definite.
    SymmetricPositive,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarSpec {
    pub name: String,
    pub dim: usize,
    pub kind: VarKind,
}

impl VarSpec {
    pub fn new(name: &str, dim: usize, kind: VarKind) -> Self {
        Self { name: name.to_string(), dim, kind }
    }

    pub fn is_positive(&self) -> bool {
        self.kind == VarKind::SymmetricPositive
    }

    pub fn is_symmetric(&self) -> bool {
        self.kind != VarKind::General
    }

    /// Number of free scalars in the block.
    pub fn param_count(&self) -> usize {
        if self.is_symmetric() {
            self.dim * (self.dim + 1) / 2
        } else {
            self.dim * self.dim
        }
    }

    /// `(row, col)` pairs indexing the free scalars, upper triangle first for
    /// symmetric blocks. Parameter `i` contributes `e_r e_cᵀ + e_c e_rᵀ`
    /// (symmetric, `r != c`), `e_r e_rᵀ` (diagonal) or `e_r e_cᵀ` (general).
    pub fn param_positions(&self) -> Vec<(usize, usize)> {
        let d = self.dim;
        if self.is_symmetric() {
            (0..d).flat_map(|r| (r..d).map(move |c| (r, c))).collect()
        } else {
            (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).collect()
        }
    }

    /// Assembles the block from its parameters.
    pub fn assemble(&self, params: &[f64]) -> RealMatrix {
        let mut m = RealMatrix::zeros(self.dim, self.dim);
        for (&(r, c), &v) in self.param_positions().iter().zip(params) {
            m[(r, c)] = v;
            if self.is_symmetric() {
                m[(c, r)] = v;
            }
        }
        m
    }
}

/// One affine piece `coef·(LᵀXR + RᵀXᵀL)/2` with `L, R` of shape `dim × size`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub var: usize,
    pub left: RealMatrix,
    pub right: RealMatrix,
    pub coef: f64,
}

impl Term {
    /// `s·MᵀXM`.
    pub fn congruence(var: usize, m: RealMatrix, s: f64) -> Self {
        Self { var, left: m.clone(), right: m, coef: s }
    }

    /// `s·(LᵀXR + RᵀXᵀL)`.
    pub fn cross(var: usize, left: RealMatrix, right: RealMatrix, s: f64) -> Self {
        Self { var, left, right, coef: 2.0 * s }
    }

    pub fn apply(&self, x: &RealMatrix) -> RealMatrix {
        let m = self.left.transpose() * x * &self.right;
        (&m + m.transpose()) * (0.5 * self.coef)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    NegativeDefinite,
    PositiveDefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub size: usize,
    pub constant: RealMatrix,
    pub terms: Vec<Term>,
    pub sense: Sense,
}

impl Constraint {
    fn negative(name: &str, size: usize, terms: Vec<Term>) -> Self {
        Self {
            name: name.to_string(),
            size,
            constant: RealMatrix::zeros(size, size),
            terms,
            sense: Sense::NegativeDefinite,
        }
    }

    pub fn evaluate(&self, assignment: &[RealMatrix]) -> RealMatrix {
        let mut out = self.constant.clone();
        for t in &self.terms {
            out += t.apply(&assignment[t.var]);
        }
        out
    }

    /// Strictness slack: `−λ_max` for `≺ 0`, `λ_min` for `≻ 0`.
    pub fn slack(&self, assignment: &[RealMatrix]) -> Result<f64> {
        let (lo, hi) = sym_eig_extrema(&self.evaluate(assignment))?;
        Ok(match self.sense {
            Sense::NegativeDefinite => -hi,
            Sense::PositiveDefinite => lo,
        })
    }
}

/// Side condition `ρ(matrix) < 1` attached to a problem and decided outside
/// the LMI.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPrecheck {
    pub label: String,
    pub matrix: RealMatrix,
}

/// Condition labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    Thm4,
    Thm4Schur,
    Bliman,
    Kronecker,
    Carvalho,
    Ddmb,
    Robust,
    Polytopic,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::Thm4 => "thm4",
            Condition::Thm4Schur => "thm4schur",
            Condition::Bliman => "bliman",
            Condition::Kronecker => "kronecker",
            Condition::Carvalho => "carvalho",
            Condition::Ddmb => "ddmb",
            Condition::Robust => "robust",
            Condition::Polytopic => "polytopic",
        }
    }

    /// Whether the condition is indexed by a block order `k`.
    pub fn uses_k(&self) -> bool {
        matches!(
            self,
            Condition::Thm4 | Condition::Thm4Schur | Condition::Bliman | Condition::Robust | Condition::Polytopic
        )
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Strict feasibility problem: find blocks such that every constraint holds
/// strictly and every positive block is positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiProblem {
    pub condition: Condition,
    pub k: Option<usize>,
    pub variables: Vec<VarSpec>,
    pub constraints: Vec<Constraint>,
    pub precheck: Option<SpectralPrecheck>,
    /// All constants vanish, so feasible points form a cone.
    pub homogeneous: bool,
}

impl LmiProblem {
    fn new(condition: Condition, k: Option<usize>, variables: Vec<VarSpec>, constraints: Vec<Constraint>) -> Self {
        let homogeneous = constraints.iter().all(|c| c.constant.iter().all(|v| *v == 0.0));
        let prob = Self { condition, k, variables, constraints, precheck: None, homogeneous };
        debug_assert!(prob.check_shapes().is_ok(), "{:?}", prob.check_shapes());
        prob
    }

    pub fn param_count(&self) -> usize {
        self.variables.iter().map(VarSpec::param_count).sum()
    }

    pub fn check_assignment(&self, assignment: &[RealMatrix]) -> Result<()> {
        if assignment.len() != self.variables.len() {
            return Err(Error::Dimension(format!(
                "expected {} blocks, got {}",
                self.variables.len(),
                assignment.len()
            )));
        }
        for (v, x) in self.variables.iter().zip(assignment) {
            if x.shape() != (v.dim, v.dim) {
                return Err(Error::Dimension(format!(
                    "block {} should be {}x{}, got {:?}",
                    v.name,
                    v.dim,
                    v.dim,
                    x.shape()
                )));
            }
        }
        Ok(())
    }

    pub fn check_shapes(&self) -> Result<()> {
        for c in &self.constraints {
            if c.constant.shape() != (c.size, c.size) {
                return Err(Error::Dimension(format!("constant of {} has shape {:?}", c.name, c.constant.shape())));
            }
            for t in &c.terms {
                let v = self
                    .variables
                    .get(t.var)
                    .ok_or_else(|| Error::Dimension(format!("term in {} references block {}", c.name, t.var)))?;
                if t.left.shape() != (v.dim, c.size) || t.right.shape() != (v.dim, c.size) {
                    return Err(Error::Dimension(format!(
                        "term on {} in {}: factors {:?}/{:?}, expected {}x{}",
                        v.name,
                        c.name,
                        t.left.shape(),
                        t.right.shape(),
                        v.dim,
                        c.size
                    )));
                }
            }
        }
        Ok(())
    }

    /// Draws a random assignment honoring each block's structure.
    pub fn random_assignment(&self, rng: &mut impl Rng) -> Vec<RealMatrix> {
        self.variables
            .iter()
            .map(|v| {
                let params: Vec<f64> = (0..v.param_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
                v.assemble(&params)
            })
            .collect()
    }

    /// Checks symmetry and affinity of every constraint map on random
    /// assignments.
    pub fn audit(&self, seed: u64, draws: usize) -> Result<()> {
        self.check_shapes()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zero: Vec<RealMatrix> = self.variables.iter().map(|v| RealMatrix::zeros(v.dim, v.dim)).collect();
        for _ in 0..draws {
            let v = self.random_assignment(&mut rng);
            let w = self.random_assignment(&mut rng);
            let (alpha, beta) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let mix: Vec<RealMatrix> = v.iter().zip(&w).map(|(a, b)| a * alpha + b * beta).collect();
            for c in &self.constraints {
                let base = c.evaluate(&zero);
                let full = c.evaluate(&mix);
                let (fv, fw, fm) = (c.evaluate(&v) - &base, c.evaluate(&w) - &base, &full - &base);
                let scale = 1.0 + fv.amax() + fw.amax() + base.amax();
                let asym = (&full - full.transpose()).amax();
                if asym > 1e-10 * scale {
                    return Err(Error::Affinity(format!("{} is not symmetric ({asym:e})", c.name)));
                }
                let gap = (&fm - (fv * alpha + fw * beta)).amax();
                if gap > 1e-10 * scale * (alpha.abs() + beta.abs()).max(1.0) {
                    return Err(Error::Affinity(format!("{} is not affine ({gap:e})", c.name)));
                }
            }
        }
        Ok(())
    }
}

/// A solved assignment with its validated strictness margin.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub condition: Condition,
    pub k: Option<usize>,
    pub assignment: Vec<RealMatrix>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    /// `−λ_max` (or `λ_min`) of each constraint, in problem order.
    pub constraint_slacks: Vec<f64>,
    /// `λ_min` of each positive block; `None` for unconstrained blocks.
    pub variable_slacks: Vec<Option<f64>>,
    pub margin: f64,
    pub accepted: bool,
}

/// Recomputes every constraint from the affine terms and accepts iff every
/// slack exceeds `tol`.
pub fn validate_certificate(prob: &LmiProblem, assignment: &[RealMatrix], tol: f64) -> Result<MarginReport> {
    prob.check_assignment(assignment)?;
    if assignment.iter().flat_map(|m| m.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("certificate has non-finite entries".into()));
    }
    let mut sym = Vec::with_capacity(assignment.len());
    for (v, x) in prob.variables.iter().zip(assignment) {
        sym.push(if v.is_symmetric() { symmetrize(x)? } else { x.clone() });
    }
    let constraint_slacks = prob.constraints.iter().map(|c| c.slack(&sym)).collect::<Result<Vec<_>>>()?;
    let variable_slacks = prob
        .variables
        .iter()
        .zip(&sym)
        .map(|(v, x)| if v.is_positive() { sym_eig_extrema(x).map(|e| Some(e.0)) } else { Ok(None) })
        .collect::<Result<Vec<_>>>()?;
    let margin = constraint_slacks
        .iter()
        .copied()
        .chain(variable_slacks.iter().flatten().copied())
        .fold(f64::INFINITY, f64::min);
    Ok(MarginReport { constraint_slacks, variable_slacks, margin, accepted: margin > tol })
}

/// Perturbation model attached to a system, in the caller's labelling.
#[derive(Debug, Clone, PartialEq)]
pub enum UncertaintyModel {
    /// `[ΔB ΔA] = E₀F[B₀ A₀]` with `FᵀF ≤ I`.
    NormBounded { e0: RealMatrix, a0: RealMatrix, b0: RealMatrix },
    /// `(ΔA, ΔB)` in the convex hull of the listed vertices.
    Polytopic { vertices: Vec<(RealMatrix, RealMatrix)> },
}

impl UncertaintyModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            UncertaintyModel::NormBounded { e0, a0, b0 } => {
                let (rows, p) = e0.shape();
                let q = a0.nrows();
                if rows != n || p == 0 || q == 0 || a0.shape() != (q, n) || b0.shape() != (q, n) {
                    return Err(Error::Dimension(format!(
                        "norm-bounded template needs E0 {n}xp, A0/B0 qx{n}; got E0 {:?}, A0 {:?}, B0 {:?}",
                        e0.shape(),
                        a0.shape(),
                        b0.shape()
                    )));
                }
            }
            UncertaintyModel::Polytopic { vertices } => {
                if vertices.is_empty() {
                    return Err(Error::InvalidInput("polytope needs at least one vertex".into()));
                }
                for (da, db) in vertices {
                    if da.shape() != (n, n) || db.shape() != (n, n) {
                        return Err(Error::Dimension(format!(
                            "vertex blocks must be {n}x{n}, got {:?} and {:?}",
                            da.shape(),
                            db.shape()
                        )));
                    }
                }
            }
        }
        let all = match self {
            UncertaintyModel::NormBounded { e0, a0, b0 } => [e0, a0, b0].iter().all(|m| m.iter().all(|v| v.is_finite())),
            UncertaintyModel::Polytopic { vertices } => {
                vertices.iter().all(|(a, b)| a.iter().chain(b.iter()).all(|v| v.is_finite()))
            }
        };
        if !all {
            return Err(Error::InvalidInput("uncertainty entries must be finite".into()));
        }
        Ok(())
    }

    /// Same model in the internal (`b > a`) labelling of `sys`.
    fn internal(&self, sys: &SystemPair) -> UncertaintyModel {
        if !sys.swapped() {
            return self.clone();
        }
        match self {
            UncertaintyModel::NormBounded { e0, a0, b0 } => {
                UncertaintyModel::NormBounded { e0: e0.clone(), a0: b0.clone(), b0: a0.clone() }
            }
            UncertaintyModel::Polytopic { vertices } => UncertaintyModel::Polytopic {
                vertices: vertices.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
            },
        }
    }
}

/// Which realization of the main condition to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thm4Form {
    Dense,
    Schur,
}

/// `[0 I; I 0]` with `n×n` blocks.
pub fn exchange2(n: usize) -> RealMatrix {
    let mut e = RealMatrix::zeros(2 * n, 2 * n);
    set_block(&mut e, 0, n, &RealMatrix::identity(n, n));
    set_block(&mut e, n, 0, &RealMatrix::identity(n, n));
    e
}

/// Block anti-identity with three `n×n` blocks.
pub fn exchange3(n: usize) -> RealMatrix {
    let mut e = RealMatrix::zeros(3 * n, 3 * n);
    for i in 0..3 {
        set_block(&mut e, i * n, (2 - i) * n, &RealMatrix::identity(n, n));
    }
    e
}

/// `rows × total` matrix with an identity block starting at column `offset`.
fn selector(rows: usize, offset: usize, total: usize) -> RealMatrix {
    let mut s = RealMatrix::zeros(rows, total);
    set_block(&mut s, 0, offset, &RealMatrix::identity(rows, rows));
    s
}

fn check_square(name: &str, m: &RealMatrix, dim: usize) -> Result<()> {
    if m.shape() != (dim, dim) {
        return Err(Error::Dimension(format!("{name} must be {dim}x{dim}, got {:?}", m.shape())));
    }
    Ok(())
}

/// `[A_k B_k]ᵀ(P−Q)[A_k B_k] − L_kᵀPL_k`.
pub fn omega_k1(fam: &Thm4Family, p: &RealMatrix, q: &RealMatrix) -> Result<RealMatrix> {
    let kn = fam.k * fam.n;
    check_square("P", p, kn)?;
    check_square("Q", q, kn)?;
    let sh = fam.shift();
    Ok(sh.transpose() * (p - q) * &sh - fam.lift.transpose() * p * &fam.lift)
}

/// `Ω_k1(P,Q) + [𝒜_k ℬ_k]ᵀQ[𝒜_k ℬ_k]`.
pub fn omega_k(fam: &Thm4Family, p: &RealMatrix, q: &RealMatrix) -> Result<RealMatrix> {
    let c = fam.script();
    Ok(omega_k1(fam, p, q)? + c.transpose() * q * &c)
}

/// The power-based counterpart `Ω̄_k(P̄,Q̄)`.
pub fn omega_bar(fam: &BlimanFamily, p: &RealMatrix, q: &RealMatrix) -> Result<RealMatrix> {
    let kn = fam.k * fam.n;
    check_square("P", p, kn)?;
    check_square("Q", q, kn)?;
    let sh = fam.shift();
    let c = fam.script();
    let lift = selector(kn, 0, kn + fam.n);
    Ok(sh.transpose() * (p - q) * &sh - lift.transpose() * p * &lift + c.transpose() * q * &c)
}

fn carvalho_blocks(sys: &SystemPair) -> (RealMatrix, RealMatrix) {
    let n = sys.n();
    let top = hstack(&[sys.a(), sys.b()]);
    let first = selector(n, 0, 2 * n);
    (top, first)
}

/// `[[A,B],[I,0]]ᵀ diag(X,Y) [[A,B],[I,0]] − diag(X,Y)`.
pub fn phi1(sys: &SystemPair, x: &RealMatrix, y: &RealMatrix) -> Result<RealMatrix> {
    let n = sys.n();
    check_square("X", x, n)?;
    check_square("Y", y, n)?;
    let (top, first) = carvalho_blocks(sys);
    let m = vstack(&[&top, &first]);
    let d = block_diag(&[x, y]);
    Ok(m.transpose() * &d * m - d)
}

struct DdmbBlocks {
    n21: RealMatrix,
    n22: RealMatrix,
    m21: RealMatrix,
    m22: RealMatrix,
}

fn ddmb_blocks(sys: &SystemPair) -> DdmbBlocks {
    let n = sys.n();
    let zero = RealMatrix::zeros(n, n);
    let eye = RealMatrix::identity(n, n);
    let row = |blocks: [&RealMatrix; 3]| hstack(&blocks);
    let abz = row([sys.a(), sys.b(), &zero]);
    DdmbBlocks {
        n21: vstack(&[&abz, &row([&eye, &zero, &zero])]),
        n22: vstack(&[&row([&zero, &zero, &eye]), &row([&zero, &eye, &zero])]),
        m21: vstack(&[&abz, &row([&zero, &zero, &eye])]),
        m22: vstack(&[&row([&eye, &zero, &zero]), &row([&zero, &eye, &zero])]),
    }
}

/// `N₂₁ᵀX*N₂₁ − N₂₂ᵀX*N₂₂ + M₂₁ᵀY*M₂₁ − M₂₂ᵀY*M₂₂`.
pub fn phi2(sys: &SystemPair, x: &RealMatrix, y: &RealMatrix) -> Result<RealMatrix> {
    let n = sys.n();
    check_square("X*", x, 2 * n)?;
    check_square("Y*", y, 2 * n)?;
    let d = ddmb_blocks(sys);
    Ok(d.n21.transpose() * x * &d.n21 - d.n22.transpose() * x * &d.n22 + d.m21.transpose() * y * &d.m21
        - d.m22.transpose() * y * &d.m22)
}

/// `(W_kᵀP̄W_k, W_kᵀQ̄W_k)`.
pub fn transform_bliman_to_thm4(
    sf: &ShuffleFamily,
    pbar: &RealMatrix,
    qbar: &RealMatrix,
) -> Result<(RealMatrix, RealMatrix)> {
    let kn = sf.k * sf.n;
    check_square("P̄", pbar, kn)?;
    check_square("Q̄", qbar, kn)?;
    let wt = sf.w.transpose();
    Ok((&wt * pbar * &sf.w, &wt * qbar * &sf.w))
}

fn omega_terms(p: usize, q: usize, shift: &RealMatrix, lift: &RealMatrix, script: &RealMatrix) -> Vec<Term> {
    vec![
        Term::congruence(p, shift.clone(), 1.0),
        Term::congruence(p, lift.clone(), -1.0),
        Term::congruence(q, shift.clone(), -1.0),
        Term::congruence(q, script.clone(), 1.0),
    ]
}

fn pq_vars(kn: usize, pname: &str, qname: &str) -> Vec<VarSpec> {
    vec![
        VarSpec::new(pname, kn, VarKind::SymmetricPositive),
        VarSpec::new(qname, kn, VarKind::SymmetricPositive),
    ]
}

pub fn thm4_problem(sys: &SystemPair, k: usize, form: Thm4Form) -> Result<LmiProblem> {
    let fam = build_thm4(sys, k)?;
    let (n, kn) = (sys.n(), k * sys.n());
    let vars = pq_vars(kn, "P", "Q");
    let (shift, script) = (fam.shift(), fam.script());
    Ok(match form {
        Thm4Form::Dense => {
            let terms = omega_terms(0, 1, &shift, &fam.lift, &script);
            LmiProblem::new(Condition::Thm4, Some(k), vars, vec![Constraint::negative("omega", kn + n, terms)])
        }
        Thm4Form::Schur => {
            let size = 2 * kn + n;
            let j1 = selector(kn + n, 0, size);
            let j2 = selector(kn, kn + n, size);
            let terms = vec![
                Term::congruence(0, &shift * &j1, 1.0),
                Term::congruence(0, &fam.lift * &j1, -1.0),
                Term::congruence(1, &shift * &j1, -1.0),
                Term::cross(1, j2.clone(), &script * &j1, 1.0),
                Term::congruence(1, j2, -1.0),
            ];
            LmiProblem::new(Condition::Thm4Schur, Some(k), vars, vec![Constraint::negative("omega_schur", size, terms)])
        }
    })
}

pub fn bliman_problem(sys: &SystemPair, k: usize) -> Result<LmiProblem> {
    let fam = build_bliman(sys, k)?;
    let (n, kn) = (sys.n(), k * sys.n());
    let lift = selector(kn, 0, kn + n);
    let terms = omega_terms(0, 1, &fam.shift(), &lift, &fam.script());
    Ok(LmiProblem::new(
        Condition::Bliman,
        Some(k),
        pq_vars(kn, "Pbar", "Qbar"),
        vec![Constraint::negative("omega_bar", kn + n, terms)],
    ))
}

pub fn kronecker_problem(sys: &SystemPair) -> Result<LmiProblem> {
    let e = build_kronecker_e(sys).e;
    let nn = sys.n() * sys.n();
    let size = 3 * nn;
    let s: Vec<RealMatrix> = (0..3).map(|i| selector(nn, i * nn, size)).collect();
    let vars = vec![
        VarSpec::new("P1", nn, VarKind::Symmetric),
        VarSpec::new("P2", nn, VarKind::Symmetric),
        VarSpec::new("P3", nn, VarKind::General),
    ];
    let terms = vec![
        Term::congruence(0, s[0].clone(), -1.0),
        Term::congruence(0, s[2].clone(), 1.0),
        Term::congruence(1, s[1].clone(), -1.0),
        Term::congruence(1, s[2].clone(), 1.0),
        Term::cross(2, s[0].clone(), s[2].clone(), -1.0),
        Term::cross(2, s[2].clone(), s[1].clone(), 1.0),
    ];
    let mut c = Constraint::negative("kronecker", size, terms);
    c.constant = -(e.transpose() * &e);
    let mut prob = LmiProblem::new(Condition::Kronecker, None, vars, vec![c]);
    prob.precheck = Some(SpectralPrecheck { label: "rho(A+B)".into(), matrix: sys.sum() });
    Ok(prob)
}

pub fn carvalho_problem(sys: &SystemPair) -> Result<LmiProblem> {
    let n = sys.n();
    let (top, first) = carvalho_blocks(sys);
    let second = selector(n, n, 2 * n);
    let terms = vec![
        Term::congruence(0, top, 1.0),
        Term::congruence(0, first.clone(), -1.0),
        Term::congruence(1, first, 1.0),
        Term::congruence(1, second, -1.0),
    ];
    let vars = vec![VarSpec::new("X1", n, VarKind::SymmetricPositive), VarSpec::new("Y1", n, VarKind::SymmetricPositive)];
    Ok(LmiProblem::new(Condition::Carvalho, None, vars, vec![Constraint::negative("phi1", 2 * n, terms)]))
}

pub fn ddmb_problem(sys: &SystemPair) -> Result<LmiProblem> {
    let n = sys.n();
    let d = ddmb_blocks(sys);
    let terms = vec![
        Term::congruence(0, d.n21, 1.0),
        Term::congruence(0, d.n22, -1.0),
        Term::congruence(1, d.m21, 1.0),
        Term::congruence(1, d.m22, -1.0),
    ];
    let vars = vec![
        VarSpec::new("X2", 2 * n, VarKind::SymmetricPositive),
        VarSpec::new("Y2", 2 * n, VarKind::SymmetricPositive),
    ];
    Ok(LmiProblem::new(Condition::Ddmb, None, vars, vec![Constraint::negative("phi2", 3 * n, terms)]))
}

/// Coupling block of the robust condition between the state rows and the
/// `I_k⊗E₀` rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RobustForm {
    /// `[𝒜_{k0} ℬ_{k0}]ᵀQ_k(I_k⊗E₀)`; needs `q = n`.
    #[default]
    Printed,
    /// `[𝒜_k ℬ_k]ᵀQ_k(I_k⊗E₀)`, the Schur complement of the perturbed `Ω_k`.
    Derived,
}

/// Norm-bounded robust condition of block order `k` in the printed form.
pub fn robust_problem(sys: &SystemPair, unc: &UncertaintyModel, k: usize) -> Result<LmiProblem> {
    robust_problem_with(sys, unc, k, RobustForm::Printed)
}

pub fn robust_problem_with(sys: &SystemPair, unc: &UncertaintyModel, k: usize, form: RobustForm) -> Result<LmiProblem> {
    let n = sys.n();
    unc.validate(n)?;
    let UncertaintyModel::NormBounded { e0, a0, b0 } = unc.internal(sys) else {
        return Err(Error::InvalidInput("robust condition needs a norm-bounded model".into()));
    };
    let fam = build_thm4(sys, k)?;
    let (p, q) = (e0.ncols(), a0.nrows());
    if form == RobustForm::Printed && q != n {
        return Err(Error::Dimension(format!("printed robust form needs A0, B0 with n = {n} rows, got {q}")));
    }
    let kn = k * n;
    let size = kn + n + k * p;
    let j1 = selector(kn + n, 0, size);
    let j2 = selector(k * p, kn + n, size);
    let c0 = bidiagonal_stamp(&b0, &a0, k);
    let c0j = &c0 * &j1;
    let ie0 = kron(&RealMatrix::identity(k, k), &e0);

    let mut terms = omega_terms(0, 1, &(fam.shift() * &j1), &(&fam.lift * &j1), &(fam.script() * &j1));
    let coupling = match form {
        RobustForm::Printed => &c0j,
        RobustForm::Derived => &(fam.script() * &j1),
    };
    terms.push(Term::cross(1, coupling.clone(), &ie0 * &j2, 1.0));
    terms.push(Term::congruence(1, &ie0 * &j2, 1.0));
    let eye_k = RealMatrix::identity(k, k);
    for l in 0..q {
        let el = RealMatrix::from_fn(1, q, |_, c| if c == l { 1.0 } else { 0.0 });
        terms.push(Term::congruence(2, kron(&eye_k, &el) * &c0j, 1.0));
    }
    for l in 0..p {
        let el = RealMatrix::from_fn(1, p, |_, c| if c == l { 1.0 } else { 0.0 });
        terms.push(Term::congruence(2, kron(&eye_k, &el) * &j2, -1.0));
    }
    let mut vars = pq_vars(kn, "P", "Q");
    vars.push(VarSpec::new("S", k, VarKind::SymmetricPositive));
    Ok(LmiProblem::new(Condition::Robust, Some(k), vars, vec![Constraint::negative("robust", size, terms)]))
}

/// Polytopic condition: one `Ω_k` constraint per vertex with shared `(P, Q)`.
pub fn polytopic_problem(sys: &SystemPair, unc: &UncertaintyModel, k: usize) -> Result<LmiProblem> {
    let n = sys.n();
    unc.validate(n)?;
    let UncertaintyModel::Polytopic { vertices } = unc.internal(sys) else {
        return Err(Error::InvalidInput("polytopic condition needs a vertex list".into()));
    };
    let fam = build_thm4(sys, k)?;
    let kn = k * n;
    let constraints = vertices
        .iter()
        .enumerate()
        .map(|(i, (da, db))| {
            let vsys = SystemPair::from_matrices(sys.a() + da, sys.b() + db)?;
            let script = build_thm4(&vsys, k)?.script();
            let terms = omega_terms(0, 1, &fam.shift(), &fam.lift, &script);
            Ok(Constraint::negative(&format!("omega_vertex{i}"), kn + n, terms))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LmiProblem::new(Condition::Polytopic, Some(k), pq_vars(kn, "P", "Q"), constraints))
}

/// Builds the problem for a condition; `k` is ignored by k-free conditions.
pub fn build_problem(
    sys: &SystemPair,
    condition: Condition,
    k: usize,
    unc: Option<&UncertaintyModel>,
) -> Result<LmiProblem> {
    match condition {
        Condition::Thm4 => thm4_problem(sys, k, Thm4Form::Dense),
        Condition::Thm4Schur => thm4_problem(sys, k, Thm4Form::Schur),
        Condition::Bliman => bliman_problem(sys, k),
        Condition::Kronecker => kronecker_problem(sys),
        Condition::Carvalho => carvalho_problem(sys),
        Condition::Ddmb => ddmb_problem(sys),
        Condition::Robust | Condition::Polytopic => {
            let unc = unc.ok_or_else(|| Error::InvalidInput(format!("{condition} needs an uncertainty model")))?;
            if condition == Condition::Robust {
                robust_problem(sys, unc, k)
            } else {
                polytopic_problem(sys, unc, k)
            }
        }
    }
}
