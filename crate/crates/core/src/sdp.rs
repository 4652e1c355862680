//! Strict LMI feasibility by margin maximization.
//!
//! Every problem is recast as `max t` subject to `G_c(v) ⪰ tI` for each
//! block, where `G_c = −F_c` for negative constraints, `G_c = F_c` for
//! positive ones and `G_c = X` for each positive decision block. Homogeneous
//! problems are normalized by `Σ tr(X) = T` over the positive blocks; the
//! remaining blocks are confined to a box `|v_i| ≤ R`.
//!
//! The default method follows the log-barrier central path, which yields both
//! a primal margin and a Lagrangian upper bound on the best achievable margin.
//! The upper bound is what allows an `Infeasible` verdict. The supergradient
//! method only ever produces lower bounds.

use crate::algebra::{sym_eig_extrema, RealMatrix};
use crate::conditions::{validate_certificate, Certificate, LmiProblem, Sense, VarSpec};
use crate::error::{Error, Result};
use crate::oracle::precheck_holds;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Barrier,
    Supergradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Budget of Newton steps (barrier) or ascent steps (supergradient).
    pub max_iterations: usize,
    pub margin_tolerance: f64,
    /// Trace normalization `T`; `None` means ten times the total block dimension.
    pub normalization_bound: Option<f64>,
    /// Step rule label of the supergradient method.
    pub step_schedule: String,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::Barrier,
            max_iterations: 5000,
            margin_tolerance: 1e-7,
            normalization_bound: None,
            step_schedule: "inverse-sqrt".into(),
            seed: 0,
            restarts: 5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        if !(self.margin_tolerance > 0.0 && self.margin_tolerance.is_finite()) {
            return Err(Error::InvalidInput("margin_tolerance must be positive".into()));
        }
        if let Some(t) = self.normalization_bound {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidInput("normalization_bound must be positive".into()));
            }
        }
        if self.step_schedule != "inverse-sqrt" {
            return Err(Error::InvalidInput(format!("unknown step schedule {:?}", self.step_schedule)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub status: FeasibilityStatus,
    pub certificate: Option<Certificate>,
    /// Best margin reached under the normalization.
    pub achieved_margin: f64,
    /// Proven upper bound on the margin, when one is available.
    pub upper_bound: Option<f64>,
    pub iterations_used: usize,
    pub note: Option<String>,
}

impl FeasibilityVerdict {
    fn without_certificate(status: FeasibilityStatus, margin: f64, ub: Option<f64>, iters: usize, note: Option<String>) -> Self {
        Self { status, certificate: None, achieved_margin: margin, upper_bound: ub, iterations_used: iters, note }
    }

    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

/// `constraint[row, col] += value · X_var[var_row, var_col]`, summed over
/// all entries, with `X_var` the full (not triangular) block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorEntry {
    pub var: usize,
    pub var_row: usize,
    pub var_col: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseConstraint {
    pub name: String,
    pub size: usize,
    pub sense: Sense,
    /// Nonzero `(row, col, value)` entries of the constant part.
    pub constant: Vec<(usize, usize, f64)>,
    pub operator: Vec<OperatorEntry>,
}

/// Problem handed to an external adapter. Positive blocks carry the implicit
/// requirement `X ≻ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLmi {
    pub variables: Vec<VarSpec>,
    pub constraints: Vec<SparseConstraint>,
}

impl SparseLmi {
    pub fn from_problem(prob: &LmiProblem) -> Self {
        let constraints = prob
            .constraints
            .iter()
            .map(|c| {
                let mut constant = Vec::new();
                for row in 0..c.size {
                    for col in 0..c.size {
                        let v = c.constant[(row, col)];
                        if v != 0.0 {
                            constant.push((row, col, v));
                        }
                    }
                }
                let mut operator = Vec::new();
                for t in &c.terms {
                    let dim = prob.variables[t.var].dim;
                    for a in 0..dim {
                        for b in 0..dim {
                            for row in 0..c.size {
                                for col in 0..c.size {
                                    let v = 0.5
                                        * t.coef
                                        * (t.left[(a, row)] * t.right[(b, col)] + t.left[(a, col)] * t.right[(b, row)]);
                                    if v != 0.0 {
                                        operator.push(OperatorEntry { var: t.var, var_row: a, var_col: b, row, col, value: v });
                                    }
                                }
                            }
                        }
                    }
                }
                SparseConstraint { name: c.name.clone(), size: c.size, sense: c.sense, constant, operator }
            })
            .collect();
        Self { variables: prob.variables.clone(), constraints }
    }

    pub fn evaluate(&self, idx: usize, assignment: &[RealMatrix]) -> RealMatrix {
        let c = &self.constraints[idx];
        let mut out = RealMatrix::zeros(c.size, c.size);
        for &(r, col, v) in &c.constant {
            out[(r, col)] += v;
        }
        for e in &c.operator {
            out[(e.row, e.col)] += e.value * assignment[e.var][(e.var_row, e.var_col)];
        }
        out
    }
}

/// What an adapter may return: a candidate assignment, a claimed upper bound
/// on the normalized margin, or both.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdapterAnswer {
    pub assignment: Option<Vec<RealMatrix>>,
    pub margin_upper_bound: Option<f64>,
}

/// In-process contract for an external feasibility solver.
pub trait ExternalAdapter: Send + Sync {
    fn name(&self) -> &str;

    /// Whether `solve` tolerates concurrent calls.
    fn concurrent(&self) -> bool {
        false
    }

    fn solve(&self, problem: &SparseLmi) -> std::result::Result<AdapterAnswer, String>;
}

struct AdapterSlot {
    adapter: Arc<dyn ExternalAdapter>,
    gate: Mutex<()>,
}

/// Solver front end; routes to a registered adapter when one is present.
pub struct Solver {
    cfg: SolverConfig,
    adapter: Option<AdapterSlot>,
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Self {
        Self { cfg, adapter: None }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn register_external_adapter(&mut self, adapter: Arc<dyn ExternalAdapter>) {
        self.adapter = Some(AdapterSlot { adapter, gate: Mutex::new(()) });
    }

    pub fn solve(&self, prob: &LmiProblem) -> Result<FeasibilityVerdict> {
        self.cfg.validate()?;
        prob.audit(self.cfg.seed, 2)?;
        if let Some(pc) = &prob.precheck {
            if !precheck_holds(pc)? {
                return Ok(FeasibilityVerdict::without_certificate(
                    FeasibilityStatus::Infeasible,
                    f64::NEG_INFINITY,
                    None,
                    0,
                    Some(format!("precheck {} < 1 fails", pc.label)),
                ));
            }
        }
        match &self.adapter {
            Some(slot) => Ok(self.solve_with_adapter(prob, slot)),
            None => {
                let compiled = Compiled::new(prob, &self.cfg);
                match self.cfg.method {
                    SolverMethod::Barrier => barrier(prob, &compiled, &self.cfg),
                    SolverMethod::Supergradient => supergradient(prob, &compiled, &self.cfg),
                }
            }
        }
    }

    fn solve_with_adapter(&self, prob: &LmiProblem, slot: &AdapterSlot) -> FeasibilityVerdict {
        let sparse = SparseLmi::from_problem(prob);
        let call = || catch_unwind(AssertUnwindSafe(|| slot.adapter.solve(&sparse)));
        let outcome = if slot.adapter.concurrent() {
            call()
        } else {
            let _guard = slot.gate.lock().unwrap_or_else(|e| e.into_inner());
            call()
        };
        let inconclusive = |note: String| {
            FeasibilityVerdict::without_certificate(FeasibilityStatus::Inconclusive, f64::NEG_INFINITY, None, 1, Some(note))
        };
        let answer = match outcome {
            Ok(Ok(a)) => a,
            Ok(Err(e)) => return inconclusive(format!("adapter {} failed: {e}", slot.adapter.name())),
            Err(_) => return inconclusive(format!("adapter {} panicked", slot.adapter.name())),
        };
        let tol = self.cfg.margin_tolerance;
        if let Some(assign) = &answer.assignment {
            if let Ok(rep) = validate_certificate(prob, assign, tol) {
                if rep.accepted {
                    return FeasibilityVerdict {
                        status: FeasibilityStatus::Feasible,
                        certificate: Some(certificate(prob, assign.clone(), rep.margin)),
                        achieved_margin: rep.margin,
                        upper_bound: answer.margin_upper_bound,
                        iterations_used: 1,
                        note: None,
                    };
                }
            }
        }
        match answer.margin_upper_bound {
            Some(ub) if ub < -tol && claims_allowed(prob) => FeasibilityVerdict::without_certificate(
                FeasibilityStatus::Infeasible,
                f64::NEG_INFINITY,
                Some(ub),
                1,
                Some(format!("upper bound from adapter {}", slot.adapter.name())),
            ),
            _ => inconclusive(format!("adapter {} returned no valid certificate", slot.adapter.name())),
        }
    }
}

/// Solves with the built-in method selected by `cfg`.
pub fn solve_feasibility(prob: &LmiProblem, cfg: &SolverConfig) -> Result<FeasibilityVerdict> {
    Solver::new(cfg.clone()).solve(prob)
}

fn certificate(prob: &LmiProblem, assignment: Vec<RealMatrix>, margin: f64) -> Certificate {
    Certificate { condition: prob.condition, k: prob.k, assignment, margin }
}

/// A negative upper bound proves infeasibility only when the normalization
/// loses nothing: the problem is a cone and every block is positive.
fn claims_allowed(prob: &LmiProblem) -> bool {
    prob.homogeneous && !prob.variables.is_empty() && prob.variables.iter().all(VarSpec::is_positive)
}

/// One `G(v) ⪰ tI` block.
struct Block {
    g0: RealMatrix,
    coeffs: Vec<(usize, RealMatrix)>,
}

impl Block {
    fn at(&self, v: &[f64]) -> RealMatrix {
        let mut g = self.g0.clone();
        for (i, gi) in &self.coeffs {
            if v[*i] != 0.0 {
                g += gi * v[*i];
            }
        }
        g
    }
}

struct Compiled {
    blocks: Vec<Block>,
    m: usize,
    offsets: Vec<usize>,
    /// Trace coefficients `a_i` of the normalization.
    trace: Vec<f64>,
    has_equality: bool,
    bound: f64,
    /// Whether parameter `i` carries an explicit box barrier.
    boxed: Vec<bool>,
}

impl Compiled {
    fn new(prob: &LmiProblem, cfg: &SolverConfig) -> Self {
        let mut offsets = Vec::with_capacity(prob.variables.len());
        let mut m = 0;
        for v in &prob.variables {
            offsets.push(m);
            m += v.param_count();
        }
        let total_dim: usize = prob.variables.iter().map(|v| v.dim).sum();
        let bound = cfg.normalization_bound.unwrap_or(10.0 * total_dim as f64);

        let mut blocks = Vec::new();
        for c in &prob.constraints {
            let sign = if c.sense == Sense::NegativeDefinite { -1.0 } else { 1.0 };
            let mut coeffs: Vec<(usize, RealMatrix)> = Vec::new();
            for (vi, var) in prob.variables.iter().enumerate() {
                let terms: Vec<_> = c.terms.iter().filter(|t| t.var == vi).collect();
                if terms.is_empty() {
                    continue;
                }
                for (pi, basis) in basis_matrices(var).into_iter().enumerate() {
                    let mut g = RealMatrix::zeros(c.size, c.size);
                    for t in &terms {
                        g += t.apply(&basis);
                    }
                    if g.amax() > 0.0 {
                        coeffs.push((offsets[vi] + pi, g * sign));
                    }
                }
            }
            blocks.push(Block { g0: &c.constant * sign, coeffs });
        }
        let mut trace = vec![0.0; m];
        let mut boxed = vec![false; m];
        for (vi, var) in prob.variables.iter().enumerate() {
            let positions = var.param_positions();
            if var.is_positive() {
                let coeffs = basis_matrices(var).into_iter().enumerate().map(|(pi, b)| (offsets[vi] + pi, b)).collect();
                blocks.push(Block { g0: RealMatrix::zeros(var.dim, var.dim), coeffs });
                for (pi, (r, c)) in positions.iter().enumerate() {
                    if r == c {
                        trace[offsets[vi] + pi] = 1.0;
                    }
                }
            } else {
                for pi in 0..positions.len() {
                    boxed[offsets[vi] + pi] = true;
                }
            }
        }
        let has_equality = trace.iter().any(|a| *a != 0.0);
        Self { blocks, m, offsets, trace, has_equality, bound, boxed }
    }

    fn start(&self, prob: &LmiProblem) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        let pos_dim: usize = prob.variables.iter().filter(|x| x.is_positive()).map(|x| x.dim).sum();
        if pos_dim > 0 {
            let diag = self.bound / pos_dim as f64;
            for (i, a) in self.trace.iter().enumerate() {
                if *a != 0.0 {
                    v[i] = diag;
                }
            }
        }
        v
    }

    fn assignment(&self, prob: &LmiProblem, v: &[f64]) -> Vec<RealMatrix> {
        prob.variables
            .iter()
            .zip(&self.offsets)
            .map(|(var, &off)| var.assemble(&v[off..off + var.param_count()]))
            .collect()
    }

    /// `min_c λ_min(G_c(v))` with the minimizing block and eigenvector.
    fn min_slack(&self, v: &[f64]) -> (f64, usize, DVector<f64>) {
        let mut best = (f64::INFINITY, 0, DVector::zeros(0));
        for (ci, b) in self.blocks.iter().enumerate() {
            let (val, vec) = crate::algebra::min_eigpair(&b.at(v));
            if val < best.0 {
                best = (val, ci, vec);
            }
        }
        best
    }

    fn barrier_dimension(&self) -> f64 {
        let blocks: usize = self.blocks.iter().map(|b| b.g0.nrows()).sum();
        (blocks + 2 * self.boxed.iter().filter(|b| **b).count()) as f64
    }
}

fn basis_matrices(var: &VarSpec) -> Vec<RealMatrix> {
    var.param_positions()
        .into_iter()
        .map(|(r, c)| {
            let mut e = RealMatrix::zeros(var.dim, var.dim);
            e[(r, c)] = 1.0;
            if var.is_symmetric() {
                e[(c, r)] = 1.0;
            }
            e
        })
        .collect()
}

/// Barrier state at one point: slack factors and derivative data.
struct Evaluation {
    linv: Vec<RealMatrix>,
    value: f64,
}

fn evaluate_barrier(comp: &Compiled, v: &[f64], t: f64, sigma: f64) -> Option<Evaluation> {
    let mut value = -sigma * t;
    for (i, boxed) in comp.boxed.iter().enumerate() {
        if *boxed {
            let (lo, hi) = (comp.bound + v[i], comp.bound - v[i]);
            if lo <= 0.0 || hi <= 0.0 {
                return None;
            }
            value -= lo.ln() + hi.ln();
        }
    }
    let mut linv = Vec::with_capacity(comp.blocks.len());
    for b in &comp.blocks {
        let mut s = b.at(v);
        for d in 0..s.nrows() {
            s[(d, d)] -= t;
        }
        let chol = s.cholesky()?;
        let l = chol.l();
        let diag_ok = (0..l.nrows()).all(|d| l[(d, d)] > 0.0 && l[(d, d)].is_finite());
        if !diag_ok {
            return None;
        }
        value -= 2.0 * (0..l.nrows()).map(|d| l[(d, d)].ln()).sum::<f64>();
        let n = l.nrows();
        linv.push(l.solve_lower_triangular(&RealMatrix::identity(n, n))?);
    }
    Some(Evaluation { linv, value })
}

fn frob(a: &RealMatrix, b: &RealMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

/// Lagrangian upper bound on the normalized margin, from `Z_c ∝ S_c⁻¹`.
fn dual_bound(comp: &Compiled, ev: &Evaluation) -> f64 {
    let zs: Vec<RealMatrix> = ev.linv.iter().map(|li| li.transpose() * li).collect();
    let total: f64 = zs.iter().map(|z| z.trace()).sum();
    if !(total > 0.0 && total.is_finite()) {
        return f64::INFINITY;
    }
    let mut base = 0.0;
    let mut r = vec![0.0; comp.m];
    for (b, z) in comp.blocks.iter().zip(&zs) {
        base += frob(z, &b.g0) / total;
        for (i, gi) in &b.coeffs {
            r[*i] += frob(z, gi) / total;
        }
    }
    let eval = |y: f64| {
        let mut u = base + if comp.has_equality { y * comp.bound } else { 0.0 };
        for i in 0..comp.m {
            u += comp.bound * (r[i] - y * comp.trace[i]).abs();
        }
        u
    };
    let mut best = eval(0.0);
    if comp.has_equality {
        for i in 0..comp.m {
            if comp.trace[i] != 0.0 {
                best = best.min(eval(r[i] / comp.trace[i]));
            }
        }
    }
    best
}

struct Outcome {
    v: Vec<f64>,
    upper: Option<f64>,
    iterations: usize,
    stop: Stop,
}

#[derive(PartialEq)]
enum Stop {
    Margin,
    Bound,
    Converged,
    Budget,
    Stalled,
}

fn barrier_path(prob: &LmiProblem, comp: &Compiled, cfg: &SolverConfig) -> Outcome {
    let tol = cfg.margin_tolerance;
    let target = 10.0 * tol;
    let mut v = comp.start(prob);
    let mut t = comp.min_slack(&v).0 - 1.0;
    let nu = comp.barrier_dimension();
    let dim = comp.m + 1;
    let mut sigma = 1.0;
    let mut iterations = 0;
    let mut upper: Option<f64> = None;
    let a_full = {
        let mut a = DVector::zeros(dim);
        for i in 0..comp.m {
            a[i] = comp.trace[i];
        }
        a
    };

    loop {
        // centering
        for _ in 0..60 {
            if iterations >= cfg.max_iterations {
                return Outcome { v, upper, iterations, stop: Stop::Budget };
            }
            let Some(ev) = evaluate_barrier(comp, &v, t, sigma) else {
                return Outcome { v, upper, iterations, stop: Stop::Stalled };
            };
            iterations += 1;

            let mut grad = DVector::zeros(dim);
            let mut hess = RealMatrix::zeros(dim, dim);
            grad[comp.m] = -sigma;
            for (i, boxed) in comp.boxed.iter().enumerate() {
                if *boxed {
                    let (lo, hi) = (comp.bound + v[i], comp.bound - v[i]);
                    grad[i] += 1.0 / hi - 1.0 / lo;
                    hess[(i, i)] += 1.0 / (hi * hi) + 1.0 / (lo * lo);
                }
            }
            for (b, li) in comp.blocks.iter().zip(&ev.linv) {
                let mut idx: Vec<usize> = Vec::with_capacity(b.coeffs.len() + 1);
                let mut ms: Vec<RealMatrix> = Vec::with_capacity(b.coeffs.len() + 1);
                for (i, gi) in &b.coeffs {
                    idx.push(*i);
                    ms.push(li * gi * li.transpose());
                }
                idx.push(comp.m);
                ms.push(-(li * li.transpose()));
                for (p, mp) in ms.iter().enumerate() {
                    grad[idx[p]] -= mp.trace();
                    for q in 0..=p {
                        let h = frob(mp, &ms[q]);
                        hess[(idx[p], idx[q])] += h;
                        if p != q {
                            hess[(idx[q], idx[p])] += h;
                        }
                    }
                }
            }
            let Some(step) = newton_step(&hess, &grad, comp.has_equality.then_some(&a_full)) else {
                return Outcome { v, upper, iterations, stop: Stop::Stalled };
            };
            let decrement = -grad.dot(&step);
            if !(decrement.is_finite()) {
                return Outcome { v, upper, iterations, stop: Stop::Stalled };
            }
            if decrement < 1e-10 {
                break;
            }
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let nv: Vec<f64> = (0..comp.m).map(|i| v[i] + alpha * step[i]).collect();
                let nt = t + alpha * step[comp.m];
                if let Some(next) = evaluate_barrier(comp, &nv, nt, sigma) {
                    if next.value <= ev.value - 0.25 * alpha * decrement {
                        v = nv;
                        t = nt;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
            if t > target {
                return Outcome { v, upper, iterations, stop: Stop::Margin };
            }
        }

        if let Some(ev) = evaluate_barrier(comp, &v, t, sigma) {
            let u = dual_bound(comp, &ev);
            upper = Some(upper.map_or(u, |p: f64| p.min(u)));
        }
        if upper.is_some_and(|u| u < target) {
            return Outcome { v, upper, iterations, stop: Stop::Bound };
        }
        if nu / sigma < 1e-13 * (1.0 + t.abs()) {
            return Outcome { v, upper, iterations, stop: Stop::Converged };
        }
        sigma *= 8.0;
    }
}

/// Solves `[H a; aᵀ 0][d; λ] = [−g; 0]` (or `H d = −g` without the equality).
fn newton_step(hess: &RealMatrix, grad: &DVector<f64>, a: Option<&DVector<f64>>) -> Option<DVector<f64>> {
    let dim = hess.nrows();
    let mut h = hess.clone();
    let scale = (0..dim).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let chol = match h.clone().cholesky() {
        Some(c) => c,
        None => {
            for i in 0..dim {
                h[(i, i)] += 1e-12 * scale;
            }
            h.cholesky()?
        }
    };
    let hg = chol.solve(grad);
    match a {
        None => Some(-hg),
        Some(a) => {
            let ha = chol.solve(a);
            let denom = a.dot(&ha);
            if !(denom > 0.0) {
                return None;
            }
            let lambda = -a.dot(&hg) / denom;
            Some(-(hg + ha * lambda))
        }
    }
}

fn finish(
    prob: &LmiProblem,
    comp: &Compiled,
    cfg: &SolverConfig,
    v: &[f64],
    upper: Option<f64>,
    iterations: usize,
) -> Result<FeasibilityVerdict> {
    let tol = cfg.margin_tolerance;
    let assign = comp.assignment(prob, v);
    let rep = validate_certificate(prob, &assign, tol)?;
    if rep.accepted {
        return Ok(FeasibilityVerdict {
            status: FeasibilityStatus::Feasible,
            achieved_margin: rep.margin,
            certificate: Some(certificate(prob, assign, rep.margin)),
            upper_bound: upper,
            iterations_used: iterations,
            note: None,
        });
    }
    let (status, note) = match upper {
        Some(u) if u < -tol && claims_allowed(prob) => (FeasibilityStatus::Infeasible, None),
        Some(u) if u < -tol => (
            FeasibilityStatus::Inconclusive,
            Some("margin bound negative, but the normalization is not exhaustive".to_string()),
        ),
        _ => (FeasibilityStatus::Inconclusive, None),
    };
    Ok(FeasibilityVerdict::without_certificate(status, rep.margin, upper, iterations, note))
}

fn barrier(prob: &LmiProblem, comp: &Compiled, cfg: &SolverConfig) -> Result<FeasibilityVerdict> {
    let out = barrier_path(prob, comp, cfg);
    let mut verdict = finish(prob, comp, cfg, &out.v, out.upper, out.iterations)?;
    if verdict.status == FeasibilityStatus::Inconclusive && verdict.note.is_none() {
        verdict.note = Some(
            match out.stop {
                Stop::Budget => "iteration budget exhausted",
                Stop::Stalled => "barrier path stalled",
                Stop::Converged | Stop::Bound => "optimal margin within tolerance of zero",
                Stop::Margin => "certificate failed revalidation",
            }
            .to_string(),
        );
    }
    Ok(verdict)
}

/// Euclidean projection onto `{a·v = T}` followed by the box on boxed entries.
fn project(comp: &Compiled, v: &mut [f64]) {
    if comp.has_equality {
        let norm2: f64 = comp.trace.iter().map(|a| a * a).sum();
        let gap: f64 = comp.trace.iter().zip(v.iter()).map(|(a, x)| a * x).sum::<f64>() - comp.bound;
        for (x, a) in v.iter_mut().zip(&comp.trace) {
            *x -= a * gap / norm2;
        }
    }
    for (x, boxed) in v.iter_mut().zip(&comp.boxed) {
        if *boxed {
            *x = x.clamp(-comp.bound, comp.bound);
        }
    }
}

fn supergradient(prob: &LmiProblem, comp: &Compiled, cfg: &SolverConfig) -> Result<FeasibilityVerdict> {
    let target = 10.0 * cfg.margin_tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let restarts = cfg.restarts.max(1);
    let per_run = (cfg.max_iterations / restarts).max(1);
    let start = comp.start(prob);
    let mut best_v = start.clone();
    let mut best = comp.min_slack(&start).0;
    let mut iterations = 0;

    'runs: for run in 0..restarts {
        let mut v = start.clone();
        if run > 0 {
            let spread = comp.bound / (comp.m as f64).max(1.0);
            for x in v.iter_mut() {
                *x += spread * rng.random_range(-0.5..0.5);
            }
            project(comp, &mut v);
        }
        let eta0 = 0.1 * (comp.min_slack(&v).0.abs() + 1.0);
        for it in 1..=per_run {
            iterations += 1;
            let (val, ci, x) = comp.min_slack(&v);
            if val > best {
                best = val;
                best_v = v.clone();
                if best > target {
                    break 'runs;
                }
            }
            let mut g = vec![0.0; comp.m];
            for (i, gi) in &comp.blocks[ci].coeffs {
                g[*i] = x.dot(&(gi * &x));
            }
            // supergradient of t is g; remove the normal component of the equality
            if comp.has_equality {
                let norm2: f64 = comp.trace.iter().map(|a| a * a).sum();
                let along: f64 = g.iter().zip(&comp.trace).map(|(x, a)| x * a).sum::<f64>() / norm2;
                for (gi, a) in g.iter_mut().zip(&comp.trace) {
                    *gi -= along * a;
                }
            }
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            let eta = eta0 / (it as f64).sqrt();
            for (x, gi) in v.iter_mut().zip(&g) {
                *x += eta * gi / norm;
            }
            project(comp, &mut v);
        }
    }
    let mut verdict = finish(prob, comp, cfg, &best_v, None, iterations)?;
    if verdict.status == FeasibilityStatus::Inconclusive {
        verdict.note = Some("supergradient ascent gives lower bounds only".into());
    }
    Ok(verdict)
}

/// `min_c λ_min(G_c(v))` for an explicit assignment: the normalized margin
/// objective, exposed for analysis and tests.
pub fn margin_objective(prob: &LmiProblem, assignment: &[RealMatrix]) -> Result<f64> {
    prob.check_assignment(assignment)?;
    let mut best = f64::INFINITY;
    for c in &prob.constraints {
        best = best.min(c.slack(assignment)?);
    }
    for (v, x) in prob.variables.iter().zip(assignment) {
        if v.is_positive() {
            best = best.min(sym_eig_extrema(x)?.0);
        }
    }
    Ok(best)
}
