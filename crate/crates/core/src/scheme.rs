//! Key-generation designs built from the kernel of the modulated adjacency
//! matrix `diag(alpha) + A`.
//!
//! A [`Scheme`] pairs a graph with a field, a modulation vector `alpha` and a
//! `K x d` key-generation matrix `H`. User `k` holds the key `Z_k = H_k · N`
//! for a uniform source key `N ∈ F^d`, and recovers its neighborhood sum as
//! `alpha_k Z_k + Σ_{i ∈ N(k)} X_i`. That works exactly when
//! `(diag(alpha) + A) H = 0`; secrecy additionally needs every closed
//! neighborhood to see `d` independent key rows (see [`verify`]).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::gf::{smallest_prime_congruent_one, FieldElement, FieldSpec, GfError};
use crate::matrix::{FieldMatrix, MatrixError};
use crate::topology::{Topology, TopologyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("topology is not regular")]
    NotRegular,
    #[error("rates {found} differ from the one-shot rates {expected}")]
    InconsistentRates { found: Rates, expected: Rates },
    #[error("key matrix has {found} columns but the graph degree is {degree}")]
    DegreeMismatch { degree: usize, found: usize },
    #[error("{family} construction failed verification: {detail}")]
    ConstructionFailed {
        family: &'static str,
        detail: String,
    },
    #[error("kernel dimension {dim} is below the degree {d}")]
    KernelTooSmall { dim: usize, d: usize },
    #[error("canonical kernel basis fails the rank conditions at users {failing:?}")]
    RankConditionFailed {
        failing: Vec<usize>,
        report: VerificationReport,
    },
    #[error("search needs {needed} candidates, budget is {cap}")]
    BudgetExceeded { needed: u64, cap: u64 },
    #[error("blocks must partition the {users} users")]
    BadBlocks { users: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub const fn integer(n: u64) -> Self {
        Rational { num: n, den: 1 }
    }

    /// Compares by value, so `2/2 == 1/1`.
    pub fn same_value(self, other: Rational) -> bool {
        self.den != 0
            && other.den != 0
            && self.num as u128 * other.den as u128 == other.num as u128 * self.den as u128
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Message, individual-key and source-key rates, per input symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rates {
    pub rx: Rational,
    pub rz: Rational,
    pub rzs: Rational,
}

impl Rates {
    /// One message symbol, one key symbol per user, `d` source-key symbols.
    pub fn one_shot(d: usize) -> Self {
        Rates {
            rx: Rational::integer(1),
            rz: Rational::integer(1),
            rzs: Rational::integer(d as u64),
        }
    }

    pub fn same_value(&self, other: &Rates) -> bool {
        self.rx.same_value(other.rx) && self.rz.same_value(other.rz) && self.rzs.same_value(other.rzs)
    }
}

impl fmt::Display for Rates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(R_X={}, R_Z={}, R_ZS={})", self.rx, self.rz, self.rzs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme {
    topology: Topology,
    spec: FieldSpec,
    alpha: Vec<FieldElement>,
    h: FieldMatrix,
    rates: Rates,
}

impl Scheme {
    /// Assembles a scheme, checking shapes and field membership only. The
    /// recovery and rank conditions are left to [`verify`].
    pub fn new(
        topology: Topology,
        alpha: Vec<FieldElement>,
        h: FieldMatrix,
    ) -> Result<Self, SchemeError> {
        let spec = h.spec();
        let k = topology.users();
        if alpha.len() != k {
            return Err(SchemeError::ShapeMismatch(format!(
                "alpha has {} entries for {} users",
                alpha.len(),
                k
            )));
        }
        if h.rows() != k {
            return Err(SchemeError::ShapeMismatch(format!(
                "H has {} rows for {} users",
                h.rows(),
                k
            )));
        }
        if h.cols() == 0 {
            return Err(SchemeError::ShapeMismatch("H has no columns".into()));
        }
        if let Some(bad) = alpha.iter().find(|&&x| !spec.contains(x)) {
            return Err(MatrixError::BadEntry { a: bad.a, b: bad.b }.into());
        }
        let rates = Rates::one_shot(h.cols());
        Ok(Scheme {
            topology,
            spec,
            alpha,
            h,
            rates,
        })
    }

    /// Like [`Scheme::new`] but with stored rates, which must equal the
    /// one-shot rates `(1, 1, d)`.
    pub fn with_rates(
        topology: Topology,
        alpha: Vec<FieldElement>,
        h: FieldMatrix,
        rates: Rates,
    ) -> Result<Self, SchemeError> {
        let s = Self::new(topology, alpha, h)?;
        if !rates.same_value(&s.rates) {
            return Err(SchemeError::InconsistentRates {
                found: rates,
                expected: s.rates,
            });
        }
        Ok(s)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn alpha(&self) -> &[FieldElement] {
        &self.alpha
    }

    pub fn h(&self) -> &FieldMatrix {
        &self.h
    }

    /// Number of source-key symbols (columns of `H`).
    pub fn d(&self) -> usize {
        self.h.cols()
    }

    pub fn users(&self) -> usize {
        self.topology.users()
    }

    pub fn rates(&self) -> Rates {
        self.rates
    }

    pub fn dmam(&self) -> FieldMatrix {
        dmam(&self.topology, self.spec, &self.alpha).expect("alpha length checked at construction")
    }

    /// Same scheme with a different key matrix (used for negative controls).
    pub fn with_h(&self, h: FieldMatrix) -> Result<Self, SchemeError> {
        Self::new(self.topology.clone(), self.alpha.clone(), h)
    }

    /// Checks the optimal-rate claims: a regular graph whose degree equals the
    /// number of source-key symbols, rates `(1, 1, d)`, and `rank(H) >= d`.
    pub fn check_rates(&self) -> Result<(), SchemeError> {
        let degree = self.topology.regular_degree().ok_or(SchemeError::NotRegular)?;
        if degree != self.d() {
            return Err(SchemeError::DegreeMismatch {
                degree,
                found: self.d(),
            });
        }
        let expected = Rates::one_shot(degree);
        if !self.rates.same_value(&expected) {
            return Err(SchemeError::InconsistentRates {
                found: self.rates,
                expected,
            });
        }
        let rank = self.h.rank();
        if rank < degree {
            return Err(SchemeError::ConstructionFailed {
                family: "rate",
                detail: format!("rank(H) = {rank} is below the source-key floor {degree}"),
            });
        }
        Ok(())
    }
}

/// `diag(alpha) + A` over `spec`.
pub fn dmam(
    topology: &Topology,
    spec: FieldSpec,
    alpha: &[FieldElement],
) -> Result<FieldMatrix, SchemeError> {
    let k = topology.users();
    if alpha.len() != k {
        return Err(SchemeError::ShapeMismatch(format!(
            "alpha has {} entries for {} users",
            alpha.len(),
            k
        )));
    }
    let mut m = topology.adjacency(spec);
    for (i, &a) in alpha.iter().enumerate() {
        m.set(i, i, a);
    }
    Ok(m)
}

/// Rank results for one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UserRankCheck {
    pub user: usize,
    pub alpha_is_zero: bool,
    /// `rank(H[N(k) ∪ {k}])`, must equal `d`.
    pub closed_rank: usize,
    pub closed_expected: usize,
    /// `rank(H[N(k)])`, must equal `d - 1` when `alpha_k = 0`, else `d`.
    pub open_rank: usize,
    pub open_expected: usize,
}

impl UserRankCheck {
    pub fn passed(&self) -> bool {
        self.closed_rank == self.closed_expected && self.open_rank == self.open_expected
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub d: usize,
    /// `(diag(alpha) + A) H == 0`.
    pub recovery_ok: bool,
    pub users: Vec<UserRankCheck>,
    /// `dim ker(diag(alpha) + A)`.
    pub kernel_dim: usize,
    pub h_rank: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.recovery_ok && self.users.iter().all(UserRankCheck::passed)
    }

    pub fn failing_users(&self) -> Vec<usize> {
        self.users
            .iter()
            .filter(|u| !u.passed())
            .map(|u| u.user)
            .collect()
    }
}

/// Checks the kernel (recovery) condition and the per-user rank (security)
/// conditions. Failures are reported, never raised.
pub fn verify(s: &Scheme) -> VerificationReport {
    let a = s.dmam();
    let recovery_ok = a.mat_mat(s.h()).map(|p| p.is_zero()).unwrap_or(false);
    let d = s.d();
    let users = (0..s.users())
        .map(|k| {
            let closed = s.topology.closed_neighborhood(k).expect("k in range");
            let open = s.topology.neighbors(k).expect("k in range");
            let alpha_is_zero = s.alpha[k].is_zero();
            UserRankCheck {
                user: k,
                alpha_is_zero,
                closed_rank: s.h.submatrix_rows(&closed).expect("in range").rank(),
                closed_expected: d,
                open_rank: s.h.submatrix_rows(open).expect("in range").rank(),
                open_expected: if alpha_is_zero { d.saturating_sub(1) } else { d },
            }
        })
        .collect();
    VerificationReport {
        d,
        recovery_ok,
        users,
        kernel_dim: a.kernel_dim(),
        h_rank: s.h.rank(),
    }
}

fn ensure_valid(s: Scheme, family: &'static str) -> Result<Scheme, SchemeError> {
    let report = verify(&s);
    if !report.passed() {
        return Err(SchemeError::ConstructionFailed {
            family,
            detail: format!(
                "recovery_ok={}, failing users {:?}",
                report.recovery_ok,
                report.failing_users()
            ),
        });
    }
    s.check_rates().map_err(|e| SchemeError::ConstructionFailed {
        family,
        detail: format!("{e}"),
    })?;
    Ok(s)
}

/// Field and root choices behind the ring construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RingParameters {
    pub spec: FieldSpec,
    pub omega: FieldElement,
    pub alpha: FieldElement,
}

pub fn ring_parameters(users: usize) -> Result<RingParameters, SchemeError> {
    Topology::ring(users)?;
    let q = smallest_prime_congruent_one(users as u64);
    let spec = FieldSpec::prime(q)?;
    let omega = spec.find_root_of_unity(users as u64)?;
    let omega_inv = spec.inv(omega)?;
    let alpha = spec.neg(spec.add(omega, omega_inv));
    Ok(RingParameters { spec, omega, alpha })
}

/// Ring of `K` users over the smallest prime `q ≡ 1 (mod K)`: uniform
/// `alpha = -(ω + ω⁻¹)` and `H = [ (ω^j), (ω^-j) ]` for a primitive `K`-th
/// root of unity `ω`.
pub fn build_ring(users: usize) -> Result<Scheme, SchemeError> {
    let params = ring_parameters(users)?;
    let f = params.spec;
    let omega_inv = f.inv(params.omega)?;
    let forward: Vec<_> = (0..users as u64).map(|j| f.pow(params.omega, j)).collect();
    let backward: Vec<_> = (0..users as u64).map(|j| f.pow(omega_inv, j)).collect();
    let h = FieldMatrix::from_columns(f, users, &[forward, backward])?;
    let s = Scheme::new(Topology::ring(users)?, vec![params.alpha; users], h)?;
    ensure_valid(s, "ring")
}

/// Field, root and modulation choices behind the prism construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrismParameters {
    /// Smallest prime `p ≡ 1 (mod M)`.
    pub p: u64,
    /// Working field: `F_p`, or `F_p[x]/(x^2 - Δ)` when `Δ` is a non-square.
    pub spec: FieldSpec,
    pub omega: FieldElement,
    pub lambda1: FieldElement,
    pub delta: FieldElement,
    pub sqrt_delta: FieldElement,
    /// Modulation on the first cycle (`+√Δ` branch).
    pub alpha1: FieldElement,
    /// Modulation on the second cycle (`-√Δ` branch).
    pub alpha2: FieldElement,
}

pub fn prism_parameters(m: usize) -> Result<PrismParameters, SchemeError> {
    Topology::prism(m)?;
    let p = smallest_prime_congruent_one(m as u64);
    let base = FieldSpec::prime(p)?;
    let omega = base.find_root_of_unity(m as u64)?;
    let lambda1 = base.add(omega, base.inv(omega)?);
    let delta = base.mul(lambda1, base.sub(lambda1, base.from_u64(4)));
    let (spec, sqrt_delta) = match base.sqrt(delta) {
        Some(r) => (base, r),
        None => {
            let ext = FieldSpec::extension(p, delta.a)?;
            let r = ext.sqrt(delta).ok_or(SchemeError::ConstructionFailed {
                family: "prism",
                detail: "no square root of delta in the extension".into(),
            })?;
            (ext, r)
        }
    };
    let f = spec;
    let half = f.inv(f.from_u64(2))?;
    let centre = f.neg(f.add(lambda1, f.from_u64(2)));
    let alpha1 = f.mul(f.add(centre, sqrt_delta), half);
    let alpha2 = f.mul(f.sub(centre, sqrt_delta), half);
    Ok(PrismParameters {
        p,
        spec,
        omega,
        lambda1,
        delta,
        sqrt_delta,
        alpha1,
        alpha2,
    })
}

fn prism_scheme(
    m: usize,
    params: &PrismParameters,
    alpha_top: FieldElement,
    alpha_bottom: FieldElement,
) -> Result<Scheme, SchemeError> {
    let f = params.spec;
    let columns: Vec<Vec<FieldElement>> = [0, 1, m as u64 - 1]
        .iter()
        .map(|&t| {
            let root = f.pow(params.omega, t);
            let lambda_t = f.add(root, f.inv(root).expect("root is nonzero"));
            let scale = f.neg(f.add(alpha_top, lambda_t));
            let v: Vec<_> = (0..m as u64).map(|j| f.pow(root, j)).collect();
            let lower = v.iter().map(|&x| f.mul(scale, x));
            v.iter().copied().chain(lower).collect()
        })
        .collect();
    let h = FieldMatrix::from_columns(f, 2 * m, &columns)?;
    let mut alpha = vec![alpha_top; m];
    alpha.extend(core::iter::repeat_n(alpha_bottom, m));
    Scheme::new(Topology::prism(m)?, alpha, h)
}

/// Prism on `2M` users: blockwise modulation `(α₁…α₁, α₂…α₂)` and key columns
/// `[v_t ; -(α₁ + λ_t) v_t]` for `t ∈ {0, 1, M-1}`. If the `+√Δ` assignment
/// fails verification the branches are swapped once before giving up.
pub fn build_prism(m: usize) -> Result<Scheme, SchemeError> {
    let params = prism_parameters(m)?;
    let first = prism_scheme(m, &params, params.alpha1, params.alpha2)?;
    if verify(&first).passed() {
        return ensure_valid(first, "prism");
    }
    let swapped = prism_scheme(m, &params, params.alpha2, params.alpha1)?;
    ensure_valid(swapped, "prism")
}

/// Complete graph over `F_2`: `alpha = 1` everywhere, `H = [I_{K-1}; 1…1]`.
pub fn build_complete(users: usize) -> Result<Scheme, SchemeError> {
    let t = Topology::complete(users)?;
    let f = FieldSpec::prime(2)?;
    let d = users - 1;
    let mut h = FieldMatrix::zeros(f, users, d);
    for j in 0..d {
        h.set(j, j, f.one());
        h.set(d, j, f.neg(f.one()));
    }
    let s = Scheme::new(t, vec![f.one(); users], h)?;
    ensure_valid(s, "complete")
}

/// The hand-built six-user prism scheme over `F_5` with `alpha = 2`
/// everywhere. It does not come from [`build_prism`] (5 is not `1 mod 3`).
pub fn literal_prism6_f5() -> Scheme {
    let f = FieldSpec::prime(5).expect("5 is prime");
    let h = FieldMatrix::from_i64_rows(
        f,
        &[
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[-2, -1, -1],
            &[-1, -2, -1],
            &[-1, -1, -2],
        ],
    )
    .expect("literal matrix");
    Scheme::new(
        Topology::prism(3).expect("M = 3"),
        vec![f.from_u64(2); 6],
        h,
    )
    .expect("literal scheme")
}

/// Uses the first `d` canonical kernel vectors of `diag(alpha) + A` as `H`.
pub fn from_kernel(
    topology: &Topology,
    spec: FieldSpec,
    alpha: &[FieldElement],
) -> Result<Scheme, SchemeError> {
    let d = topology.regular_degree().ok_or(SchemeError::NotRegular)?;
    let a = dmam(topology, spec, alpha)?;
    let basis = a.kernel_basis();
    if basis.len() < d {
        return Err(SchemeError::KernelTooSmall {
            dim: basis.len(),
            d,
        });
    }
    let h = FieldMatrix::from_columns(spec, topology.users(), &basis[..d])?;
    let s = Scheme::new(topology.clone(), alpha.to_vec(), h)?;
    let report = verify(&s);
    if !report.passed() {
        return Err(SchemeError::RankConditionFailed {
            failing: report.failing_users(),
            report,
        });
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchStrategy {
    /// One shared value for every user.
    Uniform,
    /// One value per block; blocks must partition the users.
    Blockwise(Vec<Vec<usize>>),
    /// Every vector in `F^K`.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulationSearch {
    /// Lexicographically smallest maximizer.
    pub best_alpha: Vec<FieldElement>,
    pub kernel_dim: usize,
    /// Every maximizer, sorted lexicographically.
    pub maximizers: Vec<Vec<FieldElement>>,
    pub candidates: u64,
}

/// Maximizes `dim ker(diag(alpha) + A)` over the candidates of `strategy`.
/// Fails up front when the candidate count exceeds `cap`.
pub fn search_modulation(
    topology: &Topology,
    spec: FieldSpec,
    strategy: &SearchStrategy,
    cap: u64,
) -> Result<ModulationSearch, SchemeError> {
    let k = topology.users();
    let blocks: Vec<Vec<usize>> = match strategy {
        SearchStrategy::Uniform => vec![(0..k).collect()],
        SearchStrategy::Exhaustive => (0..k).map(|i| vec![i]).collect(),
        SearchStrategy::Blockwise(b) => {
            let mut seen = vec![false; k];
            for &v in b.iter().flatten() {
                if v >= k || seen[v] {
                    return Err(SchemeError::BadBlocks { users: k });
                }
                seen[v] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(SchemeError::BadBlocks { users: k });
            }
            b.clone()
        }
    };
    let q = spec.order();
    let needed = u32::try_from(blocks.len())
        .ok()
        .and_then(|n| q.checked_pow(n))
        .unwrap_or(u64::MAX);
    if needed > cap {
        return Err(SchemeError::BudgetExceeded { needed, cap });
    }

    let adjacency = topology.adjacency(spec);
    let mut best_dim = 0;
    let mut maximizers: Vec<Vec<FieldElement>> = Vec::new();
    let mut digits = vec![0u64; blocks.len()];
    for _ in 0..needed {
        let mut alpha = vec![spec.zero(); k];
        for (block, &digit) in blocks.iter().zip(&digits) {
            for &v in block {
                alpha[v] = spec.element_at(digit);
            }
        }
        let mut a = adjacency.clone();
        for (i, &x) in alpha.iter().enumerate() {
            a.set(i, i, x);
        }
        let dim = a.kernel_dim();
        if dim > best_dim || maximizers.is_empty() {
            best_dim = dim;
            maximizers.clear();
        }
        if dim == best_dim {
            maximizers.push(alpha);
        }
        // Mixed-radix increment, last block least significant.
        for digit in digits.iter_mut().rev() {
            *digit += 1;
            if *digit < q {
                break;
            }
            *digit = 0;
        }
    }
    maximizers.sort();
    Ok(ModulationSearch {
        best_alpha: maximizers[0].clone(),
        kernel_dim: best_dim,
        maximizers,
        candidates: needed,
    })
}
