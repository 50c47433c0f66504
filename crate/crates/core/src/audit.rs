//! Exact security audits by enumeration.
//!
//! For user `k` with neighbors `N(k)` the leakage of interest is
//!
//! ```text
//! I( X_{N(k)} ; W_{N(k)} | Σ_{i∈N(k)} W_i, W_k, Z_k )
//! ```
//!
//! with inputs and source key independent and uniform. It is zero exactly when,
//! for every conditioning value `c`, the joint counts factorize:
//! `n(c,x,w) · n(c) = n(c,x) · n(c,w)`. The check is done on integer counts,
//! so no logarithms or floating point are involved. Checking the cells that
//! occur is enough: if all of them factorize, the products over the missing
//! cells must sum to zero, so there are none.
//!
//! Inputs of users outside `N(k) ∪ {k}` never enter any of these quantities.
//! The enumeration therefore runs over `(W_k, W_{N(k)}, N)` and weights each
//! assignment by `q^(K - 1 - |N(k)|)`, which reproduces the counts of the full
//! `F_q^K × F_q^d` enumeration exactly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::gf::{FieldElement, FieldSpec};
use crate::scheme::Scheme;

/// Default ceiling on `q^(K+d)`.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("enumeration needs {needed} states, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("user {user} out of range for {users} users")]
    BadUser { user: usize, users: usize },
    #[error("key distribution on {set:?} is not uniform over a subspace")]
    NonUniformSupport { set: Vec<usize> },
}

/// Exact outcome counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionTable<K: Ord> {
    counts: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord> Default for DistributionTable<K> {
    fn default() -> Self {
        DistributionTable {
            counts: BTreeMap::new(),
            total: 0,
        }
    }
}

impl<K: Ord> DistributionTable<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, outcome: K, weight: u64) {
        if weight == 0 {
            return;
        }
        *self.counts.entry(outcome).or_insert(0) += weight;
        self.total += weight;
    }

    pub fn count(&self, outcome: &K) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct outcomes with a positive count.
    pub fn support(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiOptions {
    /// Include `W_k` in the conditioning tuple. Turning it off gives the
    /// reduced form `I(X_N; W_N | ΣW_N, Z_k)`.
    pub condition_on_own_input: bool,
    /// Check factorization with the observed and input tuples swapped.
    pub swap_roles: bool,
}

impl Default for MiOptions {
    fn default() -> Self {
        MiOptions {
            condition_on_own_input: true,
            swap_roles: false,
        }
    }
}

/// A conditioning class and cell where the counts do not factorize.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiWitness {
    pub user: usize,
    pub neighborhood_sum: FieldElement,
    /// `None` when the audit does not condition on `W_k`.
    pub own_input: Option<FieldElement>,
    pub own_key: FieldElement,
    /// `X_{N(k)}` in neighbor order.
    pub observed: Vec<FieldElement>,
    /// `W_{N(k)}` in neighbor order.
    pub inputs: Vec<FieldElement>,
    /// `n(c, x, w)`.
    pub joint: u64,
    /// `n(c)`.
    pub class_total: u64,
    /// `n(c, x)`.
    pub observed_marginal: u64,
    /// `n(c, w)`.
    pub input_marginal: u64,
}

impl MiWitness {
    pub fn factorizes(&self) -> bool {
        self.joint as u128 * self.class_total as u128
            == self.observed_marginal as u128 * self.input_marginal as u128
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MiVerdict {
    Zero,
    Positive(MiWitness),
}

impl MiVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, MiVerdict::Zero)
    }
}

/// `q^(K+d)`, the size of the full `(W, N)` space, saturating at `u64::MAX`.
pub fn state_count(s: &Scheme) -> u64 {
    u32::try_from(s.users() + s.d())
        .ok()
        .and_then(|e| s.spec().order().checked_pow(e))
        .unwrap_or(u64::MAX)
}

/// One enumerated assignment, as seen from user `k`.
struct UserState<'a> {
    sum: u64,
    own_input: u64,
    own_key: u64,
    observed: &'a [u64],
    inputs: &'a [u64],
    weight: u64,
}

fn check_user(s: &Scheme, user: usize) -> Result<(), AuditError> {
    if user >= s.users() {
        return Err(AuditError::BadUser {
            user,
            users: s.users(),
        });
    }
    Ok(())
}

fn check_budget(s: &Scheme, budget: u64) -> Result<(), AuditError> {
    let needed = state_count(s);
    if needed > budget {
        return Err(AuditError::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// Advances little-endian base-`q` digits; false after the last vector.
fn next_digits(digits: &mut [u64], q: u64) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < q {
            return true;
        }
        *d = 0;
    }
    false
}

fn encode(digits: &[u64], q: u64) -> u64 {
    digits.iter().rev().fold(0, |acc, &d| acc * q + d)
}

fn for_each_state<F: FnMut(&UserState<'_>)>(s: &Scheme, user: usize, mut visit: F) {
    let f = s.spec();
    let q = f.order();
    let neighbors = s.topology().neighbors(user).expect("user checked");
    let m = neighbors.len();
    let weight = q.pow((s.users() - 1 - m) as u32);

    let mut n_digits = vec![0u64; s.d()];
    let mut w_digits = vec![0u64; m];
    let mut observed = vec![0u64; m];
    loop {
        let n: Vec<FieldElement> = n_digits.iter().map(|&i| f.element_at(i)).collect();
        let z = s.h().mat_vec(&n).expect("shape checked at construction");
        let own_key = f.index_of(z[user]);
        let z_nb: Vec<FieldElement> = neighbors.iter().map(|&i| z[i]).collect();
        for own_input in 0..q {
            w_digits.iter_mut().for_each(|d| *d = 0);
            loop {
                let mut sum = f.zero();
                for (j, &wd) in w_digits.iter().enumerate() {
                    let w = f.element_at(wd);
                    sum = f.add(sum, w);
                    observed[j] = f.index_of(f.add(w, z_nb[j]));
                }
                visit(&UserState {
                    sum: f.index_of(sum),
                    own_input,
                    own_key,
                    observed: &observed,
                    inputs: &w_digits,
                    weight,
                });
                if !next_digits(&mut w_digits, q) {
                    break;
                }
            }
        }
        if !next_digits(&mut n_digits, q) {
            break;
        }
    }
}

fn class_key(state: &UserState<'_>, q: u64, options: MiOptions) -> u64 {
    if options.condition_on_own_input {
        (state.sum * q + state.own_input) * q + state.own_key
    } else {
        state.sum * q + state.own_key
    }
}

fn decode(f: FieldSpec, code: u64, len: usize) -> Vec<FieldElement> {
    let q = f.order();
    let mut rest = code;
    (0..len)
        .map(|_| {
            let d = rest % q;
            rest /= q;
            f.element_at(d)
        })
        .collect()
}

/// Decides whether user `k` learns anything about its neighbors' inputs beyond
/// their sum, by exhaustive enumeration.
pub fn brute_force_mi(
    s: &Scheme,
    user: usize,
    budget: u64,
    options: MiOptions,
) -> Result<MiVerdict, AuditError> {
    check_user(s, user)?;
    check_budget(s, budget)?;
    let f = s.spec();
    let q = f.order();
    let m = s.topology().neighbors(user).expect("checked").len();

    let mut joint: DistributionTable<(u64, u64, u64)> = DistributionTable::new();
    for_each_state(s, user, |st| {
        let x = encode(st.observed, q);
        let w = encode(st.inputs, q);
        let (first, second) = if options.swap_roles { (w, x) } else { (x, w) };
        joint.add((class_key(st, q, options), first, second), st.weight);
    });

    let mut class: DistributionTable<u64> = DistributionTable::new();
    let mut first_marginal: DistributionTable<(u64, u64)> = DistributionTable::new();
    let mut second_marginal: DistributionTable<(u64, u64)> = DistributionTable::new();
    for (&(c, a, b), n) in joint.iter() {
        class.add(c, n);
        first_marginal.add((c, a), n);
        second_marginal.add((c, b), n);
    }

    for (&(c, a, b), n) in joint.iter() {
        let nc = class.count(&c);
        let na = first_marginal.count(&(c, a));
        let nb = second_marginal.count(&(c, b));
        if n as u128 * nc as u128 != na as u128 * nb as u128 {
            let (x, w, nx, nw) = if options.swap_roles {
                (b, a, nb, na)
            } else {
                (a, b, na, nb)
            };
            let (neighborhood_sum, own_input, own_key) = if options.condition_on_own_input {
                (c / (q * q), Some(f.element_at(c / q % q)), c % q)
            } else {
                (c / q, None, c % q)
            };
            return Ok(MiVerdict::Positive(MiWitness {
                user,
                neighborhood_sum: f.element_at(neighborhood_sum),
                own_input,
                own_key: f.element_at(own_key),
                observed: decode(f, x, m),
                inputs: decode(f, w, m),
                joint: n,
                class_total: nc,
                observed_marginal: nx,
                input_marginal: nw,
            }));
        }
    }
    Ok(MiVerdict::Zero)
}

/// Recounts only the witness's conditioning class and returns the fresh
/// counts; the witness is confirmed when they fail to factorize.
pub fn recheck_witness(s: &Scheme, witness: &MiWitness) -> Result<MiWitness, AuditError> {
    check_user(s, witness.user)?;
    let f = s.spec();
    let q = f.order();
    let options = MiOptions {
        condition_on_own_input: witness.own_input.is_some(),
        swap_roles: false,
    };
    let target_class = {
        let sum = f.index_of(witness.neighborhood_sum);
        let key = f.index_of(witness.own_key);
        match witness.own_input {
            Some(w) => (sum * q + f.index_of(w)) * q + key,
            None => sum * q + key,
        }
    };
    let x_code = encode(
        &witness.observed.iter().map(|&v| f.index_of(v)).collect::<Vec<_>>(),
        q,
    );
    let w_code = encode(
        &witness.inputs.iter().map(|&v| f.index_of(v)).collect::<Vec<_>>(),
        q,
    );
    let mut fresh = witness.clone();
    fresh.joint = 0;
    fresh.class_total = 0;
    fresh.observed_marginal = 0;
    fresh.input_marginal = 0;
    for_each_state(s, witness.user, |st| {
        if class_key(st, q, options) != target_class {
            return;
        }
        let x = encode(st.observed, q) == x_code;
        let w = encode(st.inputs, q) == w_code;
        fresh.class_total += st.weight;
        if x {
            fresh.observed_marginal += st.weight;
        }
        if w {
            fresh.input_marginal += st.weight;
        }
        if x && w {
            fresh.joint += st.weight;
        }
    });
    Ok(fresh)
}

/// Rank-based entropy floors for one user, in q-ary units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntropyCheck {
    pub user: usize,
    /// `H(Z_{N(k) ∪ {k}}) = rank(H[N(k) ∪ {k}])`, floor `d`.
    pub closed_entropy: usize,
    /// `H(Z_{N(k)} | Z_k) = rank(H[N(k) ∪ {k}]) - rank(H[{k}])`, floor `d - 1`.
    pub conditional_entropy: usize,
    pub d: usize,
}

impl EntropyCheck {
    pub fn passed(&self) -> bool {
        self.closed_entropy >= self.d && self.conditional_entropy + 1 >= self.d
    }
}

pub fn entropy_checks(s: &Scheme) -> Vec<EntropyCheck> {
    let d = s.d();
    (0..s.users())
        .map(|k| {
            let closed = s.topology().closed_neighborhood(k).expect("k in range");
            let closed_rank = s.h().submatrix_rows(&closed).expect("in range").rank();
            let own_rank = s.h().submatrix_rows(&[k]).expect("in range").rank();
            EntropyCheck {
                user: k,
                closed_entropy: closed_rank,
                conditional_entropy: closed_rank - own_rank,
                d,
            }
        })
        .collect()
}

/// `H(Z_S)` in q-ary units by enumerating every source key. The key
/// distribution must be uniform over a support of size `q^e`; anything else is
/// reported as [`AuditError::NonUniformSupport`].
pub fn empirical_entropy(s: &Scheme, set: &[usize], budget: u64) -> Result<u32, AuditError> {
    for &k in set {
        check_user(s, k)?;
    }
    let f = s.spec();
    let q = f.order();
    let needed = u32::try_from(s.d())
        .ok()
        .and_then(|d| q.checked_pow(d))
        .unwrap_or(u64::MAX);
    if needed > budget {
        return Err(AuditError::BudgetExceeded { needed, budget });
    }
    let mut table: DistributionTable<Vec<u64>> = DistributionTable::new();
    let mut digits = vec![0u64; s.d()];
    loop {
        let n: Vec<FieldElement> = digits.iter().map(|&i| f.element_at(i)).collect();
        let z = s.h().mat_vec(&n).expect("shape checked");
        table.add(set.iter().map(|&k| f.index_of(z[k])).collect(), 1);
        if !next_digits(&mut digits, q) {
            break;
        }
    }
    let non_uniform = || AuditError::NonUniformSupport { set: set.to_vec() };
    let first = table.iter().next().map(|(_, c)| c).ok_or_else(non_uniform)?;
    if table.iter().any(|(_, c)| c != first) {
        return Err(non_uniform());
    }
    let mut support = table.support() as u64;
    let mut exponent = 0;
    while support > 1 {
        if !support.is_multiple_of(q) {
            return Err(non_uniform());
        }
        support /= q;
        exponent += 1;
    }
    Ok(exponent)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MiStatus {
    Zero,
    Leak(MiWitness),
    Skipped { needed: u64, budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserAudit {
    pub user: usize,
    pub mi: MiStatus,
    pub entropy: EntropyCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditStatus {
    Pass,
    /// Every executed check passed but some MI audits were skipped.
    PassWithSkips,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub states: u64,
    pub budget: u64,
    pub users: Vec<UserAudit>,
}

impl AuditReport {
    pub fn status(&self) -> AuditStatus {
        let failed = self
            .users
            .iter()
            .any(|u| matches!(u.mi, MiStatus::Leak(_)) || !u.entropy.passed());
        if failed {
            AuditStatus::Fail
        } else if self
            .users
            .iter()
            .any(|u| matches!(u.mi, MiStatus::Skipped { .. }))
        {
            AuditStatus::PassWithSkips
        } else {
            AuditStatus::Pass
        }
    }

    pub fn audited_users(&self) -> usize {
        self.users
            .iter()
            .filter(|u| !matches!(u.mi, MiStatus::Skipped { .. }))
            .count()
    }
}

/// Entropy floors for everyone, plus exact MI per user when within budget.
pub fn audit_scheme(s: &Scheme, budget: u64, options: MiOptions) -> AuditReport {
    let entropy = entropy_checks(s);
    let users = entropy
        .into_iter()
        .map(|e| {
            let mi = match brute_force_mi(s, e.user, budget, options) {
                Ok(MiVerdict::Zero) => MiStatus::Zero,
                Ok(MiVerdict::Positive(w)) => MiStatus::Leak(w),
                Err(AuditError::BudgetExceeded { needed, budget }) => {
                    MiStatus::Skipped { needed, budget }
                }
                Err(e) => unreachable!("user index is in range: {e}"),
            };
            UserAudit {
                user: e.user,
                mi,
                entropy: e,
            }
        })
        .collect();
    AuditReport {
        states: state_count(s),
        budget,
        users,
    }
}
