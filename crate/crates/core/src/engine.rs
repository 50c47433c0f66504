//! One protocol round: sample a source key, derive keys, mask and broadcast,
//! then let every user recover its neighborhood sum from what it can see.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::gf::{FieldElement, FieldSpec};
use crate::matrix::MatrixError;
use crate::scheme::Scheme;

/// Everything produced by one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    /// Inputs `W`.
    pub w: Vec<FieldElement>,
    /// Source key `N` (length `d`).
    pub n: Vec<FieldElement>,
    /// Individual keys `Z = H N`.
    pub z: Vec<FieldElement>,
    /// Broadcasts `X = W + Z`.
    pub x: Vec<FieldElement>,
    pub recovered: Vec<FieldElement>,
    /// Neighborhood sums of `W`, computed directly from the inputs.
    pub expected: Vec<FieldElement>,
}

/// What user `k` holds at recovery time and nothing more.
#[derive(Debug, Clone, Copy)]
pub struct UserView<'a> {
    pub own_input: FieldElement,
    pub own_key: FieldElement,
    pub modulation: FieldElement,
    /// Messages from the neighbors, in neighbor order.
    pub received: &'a [FieldElement],
}

/// `alpha_k Z_k + Σ received`.
pub fn recover(spec: FieldSpec, view: &UserView<'_>) -> FieldElement {
    let own = spec.mul(view.modulation, view.own_key);
    view.received.iter().fold(own, |acc, &x| spec.add(acc, x))
}

/// Uniform field element by rejection from the generator's 64-bit output.
pub fn sample_element<R: RngCore>(spec: FieldSpec, rng: &mut R) -> FieldElement {
    let q = spec.order();
    let zone = u64::MAX - (u64::MAX % q);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return spec.element_at(v % q);
        }
    }
}

pub fn sample_vector<R: RngCore>(spec: FieldSpec, len: usize, rng: &mut R) -> Vec<FieldElement> {
    (0..len).map(|_| sample_element(spec, rng)).collect()
}

/// `d` uniform source-key symbols, reproducible from `seed`.
pub fn sample_source_key(spec: FieldSpec, d: usize, seed: u64) -> Vec<FieldElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_vector(spec, d, &mut rng)
}

/// Seeded stream of `(W, N)` pairs for repeated rounds.
#[derive(Debug, Clone)]
pub struct RoundSampler {
    rng: ChaCha8Rng,
}

impl RoundSampler {
    pub fn new(seed: u64) -> Self {
        RoundSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn inputs(&mut self, scheme: &Scheme) -> Vec<FieldElement> {
        sample_vector(scheme.spec(), scheme.users(), &mut self.rng)
    }

    pub fn source_key(&mut self, scheme: &Scheme) -> Vec<FieldElement> {
        sample_vector(scheme.spec(), scheme.d(), &mut self.rng)
    }
}

pub fn derive_keys(s: &Scheme, n: &[FieldElement]) -> Result<Vec<FieldElement>, MatrixError> {
    s.h().mat_vec(n)
}

pub fn run_round(
    s: &Scheme,
    w: &[FieldElement],
    n: &[FieldElement],
) -> Result<Transcript, MatrixError> {
    let f = s.spec();
    let t = s.topology();
    if w.len() != s.users() {
        return Err(MatrixError::ShapeMismatch("input vector length != users"));
    }
    if w.iter().chain(n).any(|&v| !f.contains(v)) {
        return Err(MatrixError::FieldMismatch);
    }
    let z = derive_keys(s, n)?;
    let x: Vec<_> = w.iter().zip(&z).map(|(&wi, &zi)| f.add(wi, zi)).collect();

    let mut received = Vec::new();
    let mut recovered = Vec::with_capacity(w.len());
    let mut expected = Vec::with_capacity(w.len());
    for k in 0..s.users() {
        let neighbors = t.neighbors(k).expect("k in range");
        received.clear();
        received.extend(neighbors.iter().map(|&i| x[i]));
        let view = UserView {
            own_input: w[k],
            own_key: z[k],
            modulation: s.alpha()[k],
            received: &received,
        };
        recovered.push(recover(f, &view));
        expected.push(f.sum(neighbors.iter().map(|&i| w[i])));
    }
    Ok(Transcript {
        w: w.to_vec(),
        n: n.to_vec(),
        z,
        x,
        recovered,
        expected,
    })
}

/// Per-user `recovered == expected`.
pub fn check_recovery(t: &Transcript) -> Vec<bool> {
    t.recovered
        .iter()
        .zip(&t.expected)
        .map(|(r, e)| r == e)
        .collect()
}
