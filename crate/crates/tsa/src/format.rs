//! JSON wire formats.
//!
//! Field elements are always `[a, b]` pairs (`b = 0` in prime fields). User
//! labels in every file are 1-based.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tsa_core::audit::{AuditReport, AuditStatus, EntropyCheck, MiStatus, MiWitness};
use tsa_core::engine::Transcript;
use tsa_core::gf::{FieldElement, FieldSpec, GfError};
use tsa_core::matrix::{FieldMatrix, MatrixError};
use tsa_core::scheme::{
    ModulationSearch, Rates, Rational, SchemeError, VerificationReport,
};
use tsa_core::topology::{Topology, TopologyError, TopologyKind};
use tsa_core::Scheme;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("{0}")]
    Invalid(String),
}

pub type Element = [u64; 2];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldJson {
    pub p: u64,
    pub degree: u32,
    pub delta: Option<u64>,
}

impl From<FieldSpec> for FieldJson {
    fn from(f: FieldSpec) -> Self {
        FieldJson {
            p: f.p(),
            degree: f.degree(),
            delta: f.delta(),
        }
    }
}

impl TryFrom<&FieldJson> for FieldSpec {
    type Error = FormatError;

    fn try_from(j: &FieldJson) -> Result<Self, FormatError> {
        match (j.degree, j.delta) {
            (1, None) => Ok(FieldSpec::prime(j.p)?),
            (2, Some(delta)) => Ok(FieldSpec::extension(j.p, delta)?),
            _ => Err(FormatError::Invalid(format!(
                "degree {} does not match delta {:?}",
                j.degree, j.delta
            ))),
        }
    }
}

pub fn element_json(x: FieldElement) -> Element {
    [x.a, x.b]
}

pub fn elements_json(xs: &[FieldElement]) -> Vec<Element> {
    xs.iter().copied().map(element_json).collect()
}

pub fn parse_elements(f: FieldSpec, xs: &[Element]) -> Result<Vec<FieldElement>, FormatError> {
    xs.iter()
        .map(|&[a, b]| f.element(a, b).map_err(FormatError::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Element>,
}

impl From<&FieldMatrix> for MatrixJson {
    fn from(m: &FieldMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data: elements_json(m.data()),
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self, f: FieldSpec) -> Result<FieldMatrix, FormatError> {
        let data = parse_elements(f, &self.data)?;
        Ok(FieldMatrix::new(f, self.rows, self.cols, data)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyJson {
    pub kind: String,
    #[serde(rename = "K")]
    pub users: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Topology> for TopologyJson {
    fn from(t: &Topology) -> Self {
        TopologyJson {
            kind: t.kind().name().to_string(),
            users: t.users(),
            edges: t.edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
        }
    }
}

impl TryFrom<&TopologyJson> for Topology {
    type Error = FormatError;

    fn try_from(j: &TopologyJson) -> Result<Self, FormatError> {
        let kind = TopologyKind::from_name(&j.kind)
            .ok_or_else(|| FormatError::Invalid(format!("unknown topology kind {:?}", j.kind)))?;
        let mut edges = Vec::with_capacity(j.edges.len());
        for &[a, b] in &j.edges {
            if a == 0 || b == 0 {
                return Err(FormatError::Invalid("edge labels start at 1".into()));
            }
            edges.push((a - 1, b - 1));
        }
        Ok(Topology::with_kind(kind, j.users, edges)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatesJson {
    pub rx: [u64; 2],
    pub rz: [u64; 2],
    pub rzs: [u64; 2],
}

fn rational_json(r: Rational) -> [u64; 2] {
    [r.num, r.den]
}

fn parse_rational([num, den]: [u64; 2]) -> Result<Rational, FormatError> {
    if den == 0 {
        return Err(FormatError::Invalid("rate with zero denominator".into()));
    }
    Ok(Rational { num, den })
}

impl From<Rates> for RatesJson {
    fn from(r: Rates) -> Self {
        RatesJson {
            rx: rational_json(r.rx),
            rz: rational_json(r.rz),
            rzs: rational_json(r.rzs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeJson {
    pub topology: TopologyJson,
    pub field: FieldJson,
    pub alpha: Vec<Element>,
    #[serde(rename = "H")]
    pub h: MatrixJson,
    pub d: usize,
    pub rates: RatesJson,
}

impl From<&Scheme> for SchemeJson {
    fn from(s: &Scheme) -> Self {
        SchemeJson {
            topology: s.topology().into(),
            field: s.spec().into(),
            alpha: elements_json(s.alpha()),
            h: s.h().into(),
            d: s.d(),
            rates: s.rates().into(),
        }
    }
}

impl TryFrom<&SchemeJson> for Scheme {
    type Error = FormatError;

    fn try_from(j: &SchemeJson) -> Result<Self, FormatError> {
        let f = FieldSpec::try_from(&j.field)?;
        let topology = Topology::try_from(&j.topology)?;
        let alpha = parse_elements(f, &j.alpha)?;
        let h = j.h.to_matrix(f)?;
        if h.cols() != j.d {
            return Err(FormatError::Invalid(format!(
                "d = {} but H has {} columns",
                j.d,
                h.cols()
            )));
        }
        let rates = Rates {
            rx: parse_rational(j.rates.rx)?,
            rz: parse_rational(j.rates.rz)?,
            rzs: parse_rational(j.rates.rzs)?,
        };
        Ok(Scheme::with_rates(topology, alpha, h, rates)?)
    }
}

pub fn scheme_to_string(s: &Scheme) -> String {
    serde_json::to_string_pretty(&SchemeJson::from(s)).expect("plain data serializes")
}

pub fn scheme_from_str(text: &str) -> Result<Scheme, FormatError> {
    let j: SchemeJson = serde_json::from_str(text)?;
    Scheme::try_from(&j)
}

pub fn topology_from_str(text: &str) -> Result<Topology, FormatError> {
    let j: TopologyJson = serde_json::from_str(text)?;
    Topology::try_from(&j)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptJson {
    pub round: u64,
    #[serde(rename = "W")]
    pub w: Vec<Element>,
    #[serde(rename = "N")]
    pub n: Vec<Element>,
    #[serde(rename = "Z")]
    pub z: Vec<Element>,
    #[serde(rename = "X")]
    pub x: Vec<Element>,
    pub recovered: Vec<Element>,
    pub expected: Vec<Element>,
}

impl TranscriptJson {
    pub fn new(round: u64, t: &Transcript) -> Self {
        TranscriptJson {
            round,
            w: elements_json(&t.w),
            n: elements_json(&t.n),
            z: elements_json(&t.z),
            x: elements_json(&t.x),
            recovered: elements_json(&t.recovered),
            expected: elements_json(&t.expected),
        }
    }
}

/// Input file for `run`: one vector reused every round, or one per round
/// (cycled).
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum InputsJson {
    Single(Vec<Element>),
    PerRound(Vec<Vec<Element>>),
}

impl InputsJson {
    pub fn into_vectors(self) -> Vec<Vec<Element>> {
        match self {
            InputsJson::Single(v) => vec![v],
            InputsJson::PerRound(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserRankJson {
    pub user: usize,
    pub alpha_is_zero: bool,
    pub closed_rank: usize,
    pub closed_expected: usize,
    pub open_rank: usize,
    pub open_expected: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyJson {
    pub pass: bool,
    pub recovery_ok: bool,
    pub rates_ok: bool,
    pub rates_error: Option<String>,
    pub d: usize,
    pub kernel_dim: usize,
    pub h_rank: usize,
    pub users: Vec<UserRankJson>,
}

impl VerifyJson {
    pub fn new(r: &VerificationReport, rates: Result<(), SchemeError>) -> Self {
        let rates_error = rates.err().map(|e| e.to_string());
        VerifyJson {
            pass: r.passed() && rates_error.is_none(),
            recovery_ok: r.recovery_ok,
            rates_ok: rates_error.is_none(),
            rates_error,
            d: r.d,
            kernel_dim: r.kernel_dim,
            h_rank: r.h_rank,
            users: r
                .users
                .iter()
                .map(|u| UserRankJson {
                    user: u.user + 1,
                    alpha_is_zero: u.alpha_is_zero,
                    closed_rank: u.closed_rank,
                    closed_expected: u.closed_expected,
                    open_rank: u.open_rank,
                    open_expected: u.open_expected,
                    pass: u.passed(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessJson {
    pub neighborhood_sum: Element,
    pub own_input: Option<Element>,
    pub own_key: Element,
    pub observed: Vec<Element>,
    pub inputs: Vec<Element>,
    pub joint: u64,
    pub class_total: u64,
    pub observed_marginal: u64,
    pub input_marginal: u64,
}

impl From<&MiWitness> for WitnessJson {
    fn from(w: &MiWitness) -> Self {
        WitnessJson {
            neighborhood_sum: element_json(w.neighborhood_sum),
            own_input: w.own_input.map(element_json),
            own_key: element_json(w.own_key),
            observed: elements_json(&w.observed),
            inputs: elements_json(&w.inputs),
            joint: w.joint,
            class_total: w.class_total,
            observed_marginal: w.observed_marginal,
            input_marginal: w.input_marginal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MiJson {
    Zero,
    Positive { witness: WitnessJson },
    Skipped { needed: u64, budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntropyJson {
    pub closed_entropy: usize,
    pub closed_floor: usize,
    pub conditional_entropy: usize,
    pub conditional_floor: usize,
    pub pass: bool,
}

impl From<&EntropyCheck> for EntropyJson {
    fn from(e: &EntropyCheck) -> Self {
        EntropyJson {
            closed_entropy: e.closed_entropy,
            closed_floor: e.d,
            conditional_entropy: e.conditional_entropy,
            conditional_floor: e.d.saturating_sub(1),
            pass: e.passed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserAuditJson {
    pub user: usize,
    pub mi: MiJson,
    pub entropy: EntropyJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditJson {
    pub status: &'static str,
    pub states: u64,
    pub budget: u64,
    pub users: Vec<UserAuditJson>,
}

pub fn status_name(s: AuditStatus) -> &'static str {
    match s {
        AuditStatus::Pass => "pass",
        AuditStatus::PassWithSkips => "pass_with_skips",
        AuditStatus::Fail => "fail",
    }
}

impl From<&AuditReport> for AuditJson {
    fn from(r: &AuditReport) -> Self {
        AuditJson {
            status: status_name(r.status()),
            states: r.states,
            budget: r.budget,
            users: r
                .users
                .iter()
                .map(|u| UserAuditJson {
                    user: u.user + 1,
                    mi: match &u.mi {
                        MiStatus::Zero => MiJson::Zero,
                        MiStatus::Leak(w) => MiJson::Positive { witness: w.into() },
                        MiStatus::Skipped { needed, budget } => MiJson::Skipped {
                            needed: *needed,
                            budget: *budget,
                        },
                    },
                    entropy: (&u.entropy).into(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchJson {
    pub field: FieldJson,
    pub strategy: String,
    pub candidates: u64,
    pub best_alpha: Vec<Element>,
    pub kernel_dim: usize,
    pub degree: Option<usize>,
    pub feasible: Option<bool>,
    pub maximizers: Vec<Vec<Element>>,
}

impl SearchJson {
    pub fn new(f: FieldSpec, strategy: &str, t: &Topology, r: &ModulationSearch) -> Self {
        let degree = t.regular_degree();
        SearchJson {
            field: f.into(),
            strategy: strategy.to_string(),
            candidates: r.candidates,
            best_alpha: elements_json(&r.best_alpha),
            kernel_dim: r.kernel_dim,
            degree,
            feasible: degree.map(|d| r.kernel_dim >= d),
            maximizers: r.maximizers.iter().map(|a| elements_json(a)).collect(),
        }
    }
}
