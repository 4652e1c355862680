//! Drivers for the experiments: certification over a `k` schedule, robust
//! margin bisection, and `(α, β)` region scans.

use crate::algebra::{spectral_radius_real, RealMatrix};
use crate::conditions::{build_problem, robust_problem_with, Certificate, Condition, RobustForm, UncertaintyModel};
use crate::error::{Error, Result};
use crate::families::{SystemPair, DEFAULT_MAX_K};
use crate::oracle::{classify, sweep, OracleVerdict, SweepReport, DEFAULT_GRID_POINTS};
use crate::sdp::{FeasibilityStatus, FeasibilityVerdict, Solver, SolverConfig};
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Ascending block orders to try.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSchedule {
    pub ks: Vec<usize>,
    pub stop_on_first: bool,
}

impl Default for KSchedule {
    fn default() -> Self {
        Self { ks: vec![1, 2, 3], stop_on_first: true }
    }
}

impl KSchedule {
    pub fn new(ks: Vec<usize>, stop_on_first: bool) -> Result<Self> {
        let s = Self { ks, stop_on_first };
        s.validate(DEFAULT_MAX_K)?;
        Ok(s)
    }

    pub fn single(k: usize) -> Self {
        Self { ks: vec![k], stop_on_first: true }
    }

    pub fn validate(&self, max_k: usize) -> Result<()> {
        if self.ks.is_empty() {
            return Err(Error::InvalidInput("k schedule is empty".into()));
        }
        if self.ks[0] == 0 || self.ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!("k schedule must be positive and strictly ascending: {:?}", self.ks)));
        }
        if *self.ks.last().unwrap() > max_k {
            return Err(Error::InvalidInput(format!("k = {} exceeds the cap {max_k}", self.ks.last().unwrap())));
        }
        Ok(())
    }
}

/// A condition, optionally pinned to one block order (`thm4k2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Method {
    pub condition: Condition,
    pub k: Option<usize>,
}

impl Method {
    pub fn new(condition: Condition, k: Option<usize>) -> Self {
        Self { condition, k: if condition.uses_k() { k } else { None } }
    }

    pub fn schedule(&self, default: &KSchedule) -> KSchedule {
        match self.k {
            Some(k) => KSchedule::single(k),
            None if self.condition.uses_k() => default.clone(),
            None => KSchedule::single(1),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            Some(k) => write!(f, "{}k{k}", self.condition),
            None => write!(f, "{}", self.condition),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const ALL: [Condition; 8] = [
            Condition::Thm4Schur,
            Condition::Thm4,
            Condition::Bliman,
            Condition::Kronecker,
            Condition::Carvalho,
            Condition::Ddmb,
            Condition::Robust,
            Condition::Polytopic,
        ];
        let s = s.trim();
        for c in ALL {
            if let Some(rest) = s.strip_prefix(c.label()) {
                if rest.is_empty() {
                    return Ok(Method::new(c, None));
                }
                if c.uses_k() {
                    if let Some(k) = rest.strip_prefix('k').and_then(|d| d.parse::<usize>().ok()) {
                        if k >= 1 {
                            return Ok(Method::new(c, Some(k)));
                        }
                    }
                }
            }
        }
        Err(Error::InvalidInput(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KVerdict {
    pub k: Option<usize>,
    pub verdict: FeasibilityVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport {
    pub condition: Condition,
    pub per_k: Vec<KVerdict>,
    pub certified: bool,
    pub certified_k: Option<usize>,
    pub certificate: Option<Certificate>,
    /// Absent when equal delays short-circuit the sweep.
    pub sweep: Option<SweepReport>,
    pub oracle: OracleVerdict,
    /// Set when equal delays reduce the question to `ρ(A+B) < 1`.
    pub equal_delay_rho: Option<f64>,
}

impl CertifyReport {
    /// `infeasible` only if the last scheduled order was refuted.
    pub fn refuted(&self) -> bool {
        !self.certified && self.per_k.last().is_some_and(|v| v.verdict.status == FeasibilityStatus::Infeasible)
    }
}

pub fn certify(
    sys: &SystemPair,
    condition: Condition,
    schedule: &KSchedule,
    cfg: &SolverConfig,
    unc: Option<&UncertaintyModel>,
) -> Result<CertifyReport> {
    certify_with(sys, condition, schedule, &Solver::new(cfg.clone()), unc)
}

pub fn certify_with(
    sys: &SystemPair,
    condition: Condition,
    schedule: &KSchedule,
    solver: &Solver,
    unc: Option<&UncertaintyModel>,
) -> Result<CertifyReport> {
    schedule.validate(DEFAULT_MAX_K)?;
    if sys.equal_delays() {
        let rho = spectral_radius_real(&sys.sum())?;
        return Ok(CertifyReport {
            condition,
            per_k: Vec::new(),
            certified: rho < 1.0,
            certified_k: None,
            certificate: None,
            sweep: None,
            oracle: classify(rho, 0.0),
            equal_delay_rho: Some(rho),
        });
    }
    let ks: Vec<usize> = if condition.uses_k() { schedule.ks.clone() } else { vec![1] };
    let mut per_k = Vec::new();
    let (mut certificate, mut certified_k) = (None, None);
    for k in ks {
        let prob = build_problem(sys, condition, k, unc)?;
        let verdict = solver.solve(&prob)?;
        let hit = verdict.is_feasible();
        if hit && certificate.is_none() {
            certificate = verdict.certificate.clone();
            certified_k = condition.uses_k().then_some(k);
        }
        per_k.push(KVerdict { k: condition.uses_k().then_some(k), verdict });
        if hit && schedule.stop_on_first {
            break;
        }
    }
    let report = sweep(sys, DEFAULT_GRID_POINTS, true)?;
    Ok(CertifyReport {
        condition,
        certified: certificate.is_some(),
        per_k,
        certified_k,
        certificate,
        oracle: classify(report.rho_max, 0.0),
        sweep: Some(report),
        equal_delay_rho: None,
    })
}

/// Norm-bounded model scaled by `r`: `(E₀, r·A₀, r·B₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormBoundedTemplate {
    pub e0: RealMatrix,
    pub a0_unit: RealMatrix,
    pub b0_unit: RealMatrix,
}

impl NormBoundedTemplate {
    /// `E₀ = [0; 1]`, `B₀ = [[0, r], [0, 0]]`, `A₀ = [[0, 0], [r, 0]]`.
    pub fn example() -> Self {
        Self {
            e0: RealMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
            a0_unit: RealMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
            b0_unit: RealMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        }
    }

    pub fn at(&self, r: f64) -> UncertaintyModel {
        UncertaintyModel::NormBounded { e0: self.e0.clone(), a0: &self.a0_unit * r, b0: &self.b0_unit * r }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginProbe {
    pub r: f64,
    pub status: FeasibilityStatus,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginResult {
    pub k: usize,
    pub r_star: f64,
    /// `(last certified r, first uncertified r)`.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Some probe was inconclusive and was counted as not feasible.
    pub conservative: bool,
    pub transcript: Vec<MarginProbe>,
    /// Certificate at `r_star`, if any probe succeeded.
    pub certificate: Option<Certificate>,
}

impl MarginResult {
    /// Every certified probe lies below every uncertified one.
    pub fn transcript_is_monotone(&self) -> bool {
        let max_ok = self.transcript.iter().filter(|p| p.status == FeasibilityStatus::Feasible).map(|p| p.r).fold(f64::NEG_INFINITY, f64::max);
        let min_bad = self.transcript.iter().filter(|p| p.status != FeasibilityStatus::Feasible).map(|p| p.r).fold(f64::INFINITY, f64::min);
        max_ok < min_bad
    }
}

/// Largest certified `r` in `[0, r_max]` by bisection, using `RobustForm::Printed`.
pub fn robust_margin(
    sys: &SystemPair,
    template: &NormBoundedTemplate,
    k: usize,
    r_max: f64,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<MarginResult> {
    robust_margin_with(sys, template, k, r_max, tol, cfg, RobustForm::Printed)
}

pub fn robust_margin_with(
    sys: &SystemPair,
    template: &NormBoundedTemplate,
    k: usize,
    r_max: f64,
    tol: f64,
    cfg: &SolverConfig,
    form: RobustForm,
) -> Result<MarginResult> {
    if !(r_max > 0.0 && r_max.is_finite()) || !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("need r_max > 0 and tol > 0, got {r_max}, {tol}")));
    }
    template.at(1.0).validate(sys.n())?;
    let solver = Solver::new(cfg.clone());
    let mut transcript = Vec::new();
    let mut conservative = false;
    let mut certificate = None;
    let mut probe = |r: f64, transcript: &mut Vec<MarginProbe>| -> Result<bool> {
        let prob = robust_problem_with(sys, &template.at(r), k, form)?;
        let v = solver.solve(&prob)?;
        conservative |= v.status == FeasibilityStatus::Inconclusive;
        transcript.push(MarginProbe { r, status: v.status, margin: v.achieved_margin });
        if v.is_feasible() {
            certificate = v.certificate;
            Ok(true)
        } else {
            Ok(false)
        }
    };
    let (mut lo, mut hi) = (0.0, r_max);
    if probe(r_max, &mut transcript)? {
        lo = r_max;
    } else {
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if probe(mid, &mut transcript)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let iterations = transcript.len();
    Ok(MarginResult { k, r_star: lo, bracket: (lo, hi), iterations, conservative, transcript, certificate })
}

/// `A(α) = A₀ + α·D_A`, `B(β) = B₀ + β·D_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTemplate {
    pub a: RealMatrix,
    pub b: RealMatrix,
    pub da: RealMatrix,
    pub db: RealMatrix,
    pub delay_a: f64,
    pub delay_b: f64,
}

impl RegionTemplate {
    /// `A(α) = [[−0.4, −0.3], [0.1+α, 0.15]]`, `B(β) = [[0.1, 0.25], [−0.9, −0.1+β]]`.
    pub fn example() -> Self {
        Self {
            a: RealMatrix::from_row_slice(2, 2, &[-0.4, -0.3, 0.1, 0.15]),
            b: RealMatrix::from_row_slice(2, 2, &[0.1, 0.25, -0.9, -0.1]),
            da: RealMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
            db: RealMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
            delay_a: 1.0,
            delay_b: 2.0,
        }
    }

    pub fn system(&self, alpha: f64, beta: f64) -> Result<SystemPair> {
        SystemPair::new(&self.a + &self.da * alpha, &self.b + &self.db * beta, self.delay_a, self.delay_b)
    }
}

/// Inclusive range `lo, lo+step, …, hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
            return Err(Error::InvalidInput(format!("bad range [{lo}, {hi}]")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn values(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| {
            let v = self.lo + i as f64 * self.step;
            // snap to the decimal grid to keep labels clean
            (v * 1e12).round() / 1e12
        }).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellVerdict {
    Certified { k: Option<usize>, margin: f64 },
    NotCertified,
    Infeasible,
    Error(String),
}

impl CellVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            CellVerdict::Certified { .. } => "certified",
            CellVerdict::NotCertified => "not_certified",
            CellVerdict::Infeasible => "infeasible",
            CellVerdict::Error(_) => "error",
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, CellVerdict::Certified { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanCell {
    pub alpha: f64,
    pub beta: f64,
    pub rho_max: f64,
    pub oracle: OracleVerdict,
    pub verdicts: Vec<CellVerdict>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Agreement {
    /// Cells off the oracle boundary band.
    pub considered: usize,
    pub agree: usize,
    /// Certified while the oracle says unstable.
    pub false_certified: usize,
    /// Oracle stable, not certified.
    pub missed: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionScan {
    pub alpha_range: AxisRange,
    pub beta_range: AxisRange,
    pub band: f64,
    pub methods: Vec<Method>,
    /// Row-major, `α` outer and `β` inner.
    pub cells: Vec<ScanCell>,
    pub agreement: Vec<Agreement>,
    /// Some certified cell has `rho_max ≥ 1`.
    pub soundness_violation: bool,
}

struct ScanSetup<'a> {
    template: &'a RegionTemplate,
    methods: &'a [Method],
    schedule: KSchedule,
    solver: Solver,
    grid_points: usize,
    band: f64,
}

fn scan_cell(setup: &ScanSetup<'_>, alpha: f64, beta: f64) -> ScanCell {
    let ScanSetup { template, methods, schedule, solver, grid_points, band } = setup;
    let (grid_points, band) = (*grid_points, *band);
    let sys = match template.system(alpha, beta) {
        Ok(s) => s,
        Err(e) => {
            return ScanCell {
                alpha,
                beta,
                rho_max: f64::NAN,
                oracle: OracleVerdict::Boundary,
                verdicts: methods.iter().map(|_| CellVerdict::Error(e.to_string())).collect(),
            }
        }
    };
    let (rho_max, oracle) = match sweep(&sys, grid_points, true) {
        Ok(r) => (r.rho_max, classify(r.rho_max, band)),
        Err(_) => (f64::NAN, OracleVerdict::Boundary),
    };
    let verdicts = methods
        .iter()
        .map(|m| {
            let sched = m.schedule(schedule);
            match certify_conditions_only(&sys, m.condition, &sched, solver) {
                Ok((Some((k, margin)), _)) => CellVerdict::Certified { k, margin },
                Ok((None, true)) => CellVerdict::Infeasible,
                Ok((None, false)) => CellVerdict::NotCertified,
                Err(e) => CellVerdict::Error(e.to_string()),
            }
        })
        .collect();
    ScanCell { alpha, beta, rho_max, oracle, verdicts }
}

/// Certified `(k, margin)`, and whether the last order was refuted.
type ScheduleOutcome = (Option<(Option<usize>, f64)>, bool);

/// Runs the schedule without the oracle annotation.
fn certify_conditions_only(sys: &SystemPair, condition: Condition, schedule: &KSchedule, solver: &Solver) -> Result<ScheduleOutcome> {
    let mut refuted = false;
    for &k in &schedule.ks {
        let v = solver.solve(&build_problem(sys, condition, k, None)?)?;
        if v.is_feasible() {
            return Ok((Some((condition.uses_k().then_some(k), v.achieved_margin)), false));
        }
        refuted = v.status == FeasibilityStatus::Infeasible;
    }
    Ok((None, refuted))
}

/// Grid scan over `(α, β)`; cells are independent and evaluated in parallel,
/// the output order is fixed.
pub fn region_scan(
    template: &RegionTemplate,
    methods: &[Method],
    alpha_range: AxisRange,
    beta_range: AxisRange,
    cfg: &SolverConfig,
    band: f64,
) -> Result<RegionScan> {
    if methods.iter().any(|m| matches!(m.condition, Condition::Robust | Condition::Polytopic)) {
        return Err(Error::InvalidInput("region scans take nominal conditions only".into()));
    }
    let setup = ScanSetup {
        template,
        methods,
        schedule: KSchedule::default(),
        solver: Solver::new(cfg.clone()),
        grid_points: DEFAULT_GRID_POINTS,
        band,
    };
    let points: Vec<(f64, f64)> =
        alpha_range.values().into_iter().flat_map(|a| beta_range.values().into_iter().map(move |b| (a, b))).collect();
    let cells: Vec<ScanCell> = points
        .par_iter()
        .map(|&(a, b)| scan_cell(&setup, a, b))
        .collect();

    let mut agreement = vec![Agreement::default(); methods.len()];
    let mut soundness_violation = false;
    for cell in &cells {
        for (stats, v) in agreement.iter_mut().zip(&cell.verdicts) {
            if v.is_certified() && !(cell.rho_max < 1.0) {
                soundness_violation = true;
            }
            if matches!(v, CellVerdict::Error(_)) {
                stats.errors += 1;
            }
            if cell.oracle == OracleVerdict::Boundary {
                continue;
            }
            stats.considered += 1;
            let stable = cell.oracle == OracleVerdict::Stable;
            match (stable, v.is_certified()) {
                (true, true) | (false, false) => stats.agree += 1,
                (false, true) => stats.false_certified += 1,
                (true, false) => stats.missed += 1,
            }
        }
    }
    Ok(RegionScan { alpha_range, beta_range, band, methods: methods.to_vec(), cells, agreement, soundness_violation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_sys(a: f64, b: f64) -> SystemPair {
        SystemPair::from_matrices(RealMatrix::from_element(1, 1, a), RealMatrix::from_element(1, 1, b)).unwrap()
    }

    #[test]
    fn schedule_validation() {
        assert!(KSchedule::new(vec![], true).is_err());
        assert!(KSchedule::new(vec![2, 1], true).is_err());
        assert!(KSchedule::new(vec![0, 1], true).is_err());
        assert!(KSchedule::new(vec![1, 13], true).is_err());
        assert!(KSchedule::new(vec![1, 2, 3], false).is_ok());
    }

    #[test]
    fn method_labels_round_trip() {
        for s in ["carvalho", "kronecker", "ddmb", "thm4", "thm4k2", "thm4schur", "thm4schurk3", "bliman", "blimank2"] {
            assert_eq!(s.parse::<Method>().unwrap().to_string(), s);
        }
        assert_eq!("thm4k2".parse::<Method>().unwrap(), Method::new(Condition::Thm4, Some(2)));
        for bad in ["", "thm5", "thm4k0", "carvalhok2", "thm4kx"] {
            assert!(bad.parse::<Method>().is_err(), "{bad}");
        }
    }

    #[test]
    fn certify_examples() {
        let cfg = SolverConfig::default();
        let origin = RegionTemplate::example().system(0.0, 0.0).unwrap();
        let rep = certify(&origin, Condition::Thm4, &KSchedule::new(vec![1, 2], true).unwrap(), &cfg, None).unwrap();
        assert!(rep.certified && rep.certified_k.unwrap() <= 2);
        assert_eq!(rep.oracle, OracleVerdict::Stable);

        let rep = certify(&scalar_sys(0.4, 0.3), Condition::Carvalho, &KSchedule::default(), &cfg, None).unwrap();
        assert!(rep.certified);

        for c in [Condition::Thm4, Condition::Bliman, Condition::Carvalho, Condition::Kronecker, Condition::Ddmb] {
            let rep = certify(&scalar_sys(0.6, 0.6), c, &KSchedule::default(), &cfg, None).unwrap();
            assert!(!rep.certified);
            assert_eq!(rep.oracle, OracleVerdict::Unstable);
        }
    }

    #[test]
    fn equal_delays_use_the_sum() {
        let cfg = SolverConfig::default();
        let one = |v: f64| RealMatrix::from_element(1, 1, v);
        let sys = SystemPair::new(one(0.5), one(0.3), 1.0, 1.0).unwrap();
        let rep = certify(&sys, Condition::Thm4, &KSchedule::default(), &cfg, None).unwrap();
        assert!(rep.certified && rep.sweep.is_none());
        assert!((rep.equal_delay_rho.unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn vanishing_uncertainty_keeps_the_full_range() {
        let sys = RegionTemplate::example().system(0.0, 0.0).unwrap();
        let template = NormBoundedTemplate {
            e0: RealMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
            a0_unit: RealMatrix::zeros(2, 2),
            b0_unit: RealMatrix::zeros(2, 2),
        };
        let res = robust_margin(&sys, &template, 1, 0.8, 1e-3, &SolverConfig::default()).unwrap();
        assert_eq!(res.r_star, 0.8);
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn bliman_certificates_transfer_to_the_main_condition() {
        use crate::conditions::{transform_bliman_to_thm4, validate_certificate};
        use crate::families::build_shuffle_family;
        let cfg = SolverConfig::default();
        let t = RegionTemplate::example();
        let mut transferred = 0;
        for (alpha, beta) in [(0.0, 0.0), (0.4, -0.3), (-0.5, 0.5), (0.7, 0.2), (-0.8, -0.6)] {
            let sys = t.system(alpha, beta).unwrap();
            for k in 1..=3 {
                let v = crate::sdp::solve_feasibility(&build_problem(&sys, Condition::Bliman, k, None).unwrap(), &cfg).unwrap();
                let Some(cert) = v.certificate.filter(|c| c.margin > 0.0) else { continue };
                let sf = build_shuffle_family(&sys, k).unwrap();
                let (p, q) = transform_bliman_to_thm4(&sf, &cert.assignment[0], &cert.assignment[1]).unwrap();
                let target = build_problem(&sys, Condition::Thm4, k, None).unwrap();
                assert!(validate_certificate(&target, &[p, q], 0.0).unwrap().accepted, "({alpha}, {beta}) k={k}");
                transferred += 1;
            }
        }
        assert!(transferred >= 5);
    }

    #[test]
    fn axis_values_are_inclusive() {
        let v = AxisRange::new(-1.0, 1.0, 0.02).unwrap().values();
        assert_eq!(v.len(), 101);
        assert_eq!((v[0], v[50], v[100]), (-1.0, 0.0, 1.0));
        assert_eq!(AxisRange::new(0.0, 0.0, 0.1).unwrap().values(), vec![0.0]);
        assert!(AxisRange::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn small_scan_is_consistent() {
        let methods: Vec<Method> = ["carvalho", "thm4k1", "blimank1", "thm4k2"].iter().map(|s| s.parse().unwrap()).collect();
        let r = AxisRange::new(-0.9, 0.9, 0.3).unwrap();
        let scan = region_scan(&RegionTemplate::example(), &methods, r, r, &SolverConfig::default(), 0.02).unwrap();
        assert_eq!(scan.cells.len(), 49);
        assert!(!scan.soundness_violation);
        assert_eq!((scan.cells[1].alpha, scan.cells[1].beta), (-0.9, -0.6));
        for cell in &scan.cells {
            let first = cell.verdicts[0].is_certified();
            assert_eq!(cell.verdicts[1].is_certified(), first, "{cell:?}");
            assert_eq!(cell.verdicts[2].is_certified(), first, "{cell:?}");
            if cell.verdicts[1].is_certified() {
                assert!(cell.verdicts[3].is_certified(), "{cell:?}");
            }
        }
    }
}
