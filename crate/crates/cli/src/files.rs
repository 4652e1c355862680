//! On-disk formats: system files, region templates and solver settings, all
//! JSON with matrices as nested row arrays.

use delta_stab::analysis::{NormBoundedTemplate, RegionTemplate};
use delta_stab::conditions::UncertaintyModel;
use delta_stab::sdp::{SolverConfig, SolverMethod};
use delta_stab::{Error, RealMatrix, Result, SystemPair};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    pub delay_a: f64,
    pub delay_b: f64,
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<UncertaintySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum UncertaintySection {
    NormBounded {
        #[serde(rename = "E0")]
        e0: Rows,
        #[serde(rename = "A0")]
        a0: Rows,
        #[serde(rename = "B0")]
        b0: Rows,
    },
    Polytopic { vertices: Vec<Vertex> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    #[serde(rename = "dA")]
    pub da: Rows,
    #[serde(rename = "dB")]
    pub db: Rows,
}

pub fn to_matrix(name: &str, rows: &Rows) -> Result<RealMatrix> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if nr == 0 || nc == 0 {
        return Err(Error::Dimension(format!("{name} is empty")));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != nc) {
        return Err(Error::Dimension(format!("{name} row {i} has {} entries, expected {nc}", rows[i].len())));
    }
    Ok(RealMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

pub fn to_rows(m: &RealMatrix) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn square(name: &str, rows: &Rows, n: usize) -> Result<RealMatrix> {
    let m = to_matrix(name, rows)?;
    if m.shape() != (n, n) {
        return Err(Error::Dimension(format!("{name} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
    }
    Ok(m)
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("system file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system files always serialize")
    }

    pub fn from_system(sys: &SystemPair, unc: Option<&UncertaintyModel>) -> Self {
        let (a, b, delay_a, delay_b) = sys.original();
        let uncertainty = unc.map(|u| match u {
            UncertaintyModel::NormBounded { e0, a0, b0 } => {
                UncertaintySection::NormBounded { e0: to_rows(e0), a0: to_rows(a0), b0: to_rows(b0) }
            }
            UncertaintyModel::Polytopic { vertices } => UncertaintySection::Polytopic {
                vertices: vertices.iter().map(|(da, db)| Vertex { da: to_rows(da), db: to_rows(db) }).collect(),
            },
        });
        Self { n: sys.n(), delay_a, delay_b, a: to_rows(a), b: to_rows(b), uncertainty }
    }

    pub fn system(&self) -> Result<SystemPair> {
        let a = square("A", &self.a, self.n)?;
        let b = square("B", &self.b, self.n)?;
        SystemPair::new(a, b, self.delay_a, self.delay_b)
    }

    pub fn uncertainty(&self) -> Result<Option<UncertaintyModel>> {
        let model = match &self.uncertainty {
            None => return Ok(None),
            Some(UncertaintySection::NormBounded { e0, a0, b0 }) => {
                UncertaintyModel::NormBounded { e0: to_matrix("E0", e0)?, a0: to_matrix("A0", a0)?, b0: to_matrix("B0", b0)? }
            }
            Some(UncertaintySection::Polytopic { vertices }) => UncertaintyModel::Polytopic {
                vertices: vertices
                    .iter()
                    .map(|v| Ok((square("dA", &v.da, self.n)?, square("dB", &v.db, self.n)?)))
                    .collect::<Result<_>>()?,
            },
        };
        model.validate(self.n)?;
        Ok(Some(model))
    }

    /// The norm-bounded section read as the `r = 1` template.
    pub fn margin_template(&self) -> Result<NormBoundedTemplate> {
        match self.uncertainty()? {
            Some(UncertaintyModel::NormBounded { e0, a0, b0 }) => Ok(NormBoundedTemplate { e0, a0_unit: a0, b0_unit: b0 }),
            _ => Err(Error::InvalidInput("margin needs a norm_bounded uncertainty section".into())),
        }
    }

    /// Built-in example system with its `r = 1` uncertainty.
    pub fn example() -> Self {
        let t = RegionTemplate::example();
        let unc = NormBoundedTemplate::example().at(1.0);
        let sys = SystemPair::new(t.a, t.b, t.delay_a, t.delay_b).expect("example is valid");
        Self::from_system(&sys, Some(&unc))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionTemplateFile {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "dA")]
    pub da: Rows,
    #[serde(rename = "dB")]
    pub db: Rows,
    #[serde(default = "one")]
    pub delay_a: f64,
    #[serde(default = "two")]
    pub delay_b: f64,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

impl RegionTemplateFile {
    pub fn load(path: &Path) -> Result<RegionTemplate> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let f: Self = serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("template file: {e}")))?;
        let a = to_matrix("A", &f.a)?;
        let n = a.nrows();
        let t = RegionTemplate {
            b: square("B", &f.b, n)?,
            da: square("dA", &f.da, n)?,
            db: square("dB", &f.db, n)?,
            a: square("A", &f.a, n)?,
            delay_a: f.delay_a,
            delay_b: f.delay_b,
        };
        t.system(0.0, 0.0)?;
        Ok(t)
    }
}

/// Partial solver settings; absent keys keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfigFile {
    pub method: Option<String>,
    pub max_iterations: Option<usize>,
    pub margin_tolerance: Option<f64>,
    pub normalization_bound: Option<f64>,
    pub step_schedule: Option<String>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
}

impl SolverConfigFile {
    pub fn load(path: &Path) -> Result<SolverConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let f: Self = serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("solver config: {e}")))?;
        f.resolve()
    }

    pub fn resolve(self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::default();
        if let Some(m) = self.method {
            cfg.method = match m.as_str() {
                "barrier" => SolverMethod::Barrier,
                "supergradient" => SolverMethod::Supergradient,
                other => return Err(Error::InvalidInput(format!("unknown solver method {other:?}"))),
            };
        }
        cfg.max_iterations = self.max_iterations.unwrap_or(cfg.max_iterations);
        cfg.margin_tolerance = self.margin_tolerance.unwrap_or(cfg.margin_tolerance);
        cfg.normalization_bound = self.normalization_bound.or(cfg.normalization_bound);
        cfg.step_schedule = self.step_schedule.unwrap_or(cfg.step_schedule);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.restarts = self.restarts.unwrap_or(cfg.restarts);
        cfg.validate()?;
        Ok(cfg)
    }
}
