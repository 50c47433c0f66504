//! Undirected communication graphs.
//!
//! Users are indexed from 0 in this API. Serialized edge lists use the
//! 1-based labels `1..=K`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::gf::FieldSpec;
use crate::matrix::FieldMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("{kind} needs at least {min}, got {got}")]
    TooSmall {
        kind: TopologyKind,
        min: usize,
        got: usize,
    },
    #[error("vertex {vertex} out of range for {users} users")]
    BadVertex { vertex: usize, users: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("edge list does not describe a {0} graph")]
    KindMismatch(TopologyKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    Ring,
    Prism,
    Complete,
    Custom,
}

impl TopologyKind {
    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Ring => "ring",
            TopologyKind::Prism => "prism",
            TopologyKind::Complete => "complete",
            TopologyKind::Custom => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "ring" => TopologyKind::Ring,
            "prism" => TopologyKind::Prism,
            "complete" => TopologyKind::Complete,
            "custom" => TopologyKind::Custom,
            _ => return None,
        })
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A connected simple undirected graph on `K` users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    kind: TopologyKind,
    users: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Topology {
    /// Cycle `0 - 1 - ... - (K-1) - 0`.
    pub fn ring(users: usize) -> Result<Self, TopologyError> {
        if users < 3 {
            return Err(TopologyError::TooSmall {
                kind: TopologyKind::Ring,
                min: 3,
                got: users,
            });
        }
        let edges = (0..users).map(|k| (k, (k + 1) % users));
        Self::build(TopologyKind::Ring, users, edges)
    }

    /// Circular ladder: two stacked `M`-cycles on `0..M` and `M..2M`, with
    /// rungs `k - (k + M)`.
    pub fn prism(m: usize) -> Result<Self, TopologyError> {
        if m < 3 {
            return Err(TopologyError::TooSmall {
                kind: TopologyKind::Prism,
                min: 3,
                got: m,
            });
        }
        let edges = (0..m).flat_map(|k| {
            let next = (k + 1) % m;
            [(k, next), (m + k, m + next), (k, m + k)]
        });
        Self::build(TopologyKind::Prism, 2 * m, edges)
    }

    pub fn complete(users: usize) -> Result<Self, TopologyError> {
        if users < 2 {
            return Err(TopologyError::TooSmall {
                kind: TopologyKind::Complete,
                min: 2,
                got: users,
            });
        }
        let edges = (0..users).flat_map(|i| (i + 1..users).map(move |j| (i, j)));
        Self::build(TopologyKind::Complete, users, edges)
    }

    /// Arbitrary graph from 0-based edges. Duplicate edges collapse; the
    /// graph must be loop-free and connected. Regularity is not required.
    pub fn custom<I>(users: usize, edges: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if users < 2 {
            return Err(TopologyError::TooSmall {
                kind: TopologyKind::Custom,
                min: 2,
                got: users,
            });
        }
        Self::build(TopologyKind::Custom, users, edges)
    }

    /// Rebuilds a graph from its serialized form, re-checking every invariant
    /// of the named kind.
    pub fn with_kind<I>(kind: TopologyKind, users: usize, edges: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let t = Self::custom(users, edges)?;
        let expected = match kind {
            TopologyKind::Ring => Some(Self::ring(users)?),
            TopologyKind::Prism if users.is_multiple_of(2) => Some(Self::prism(users / 2)?),
            TopologyKind::Prism => {
                return Err(TopologyError::TooSmall {
                    kind,
                    min: 6,
                    got: users,
                })
            }
            TopologyKind::Complete => Some(Self::complete(users)?),
            TopologyKind::Custom => None,
        };
        match expected {
            Some(named) if named.edges == t.edges => Ok(named),
            Some(_) => Err(TopologyError::KindMismatch(kind)),
            None => Ok(t),
        }
    }

    fn build<I>(kind: TopologyKind, users: usize, edges: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            for v in [i, j] {
                if v >= users {
                    return Err(TopologyError::BadVertex { vertex: v, users });
                }
            }
            if i == j {
                return Err(TopologyError::SelfLoop(i));
            }
            set.insert((i.min(j), i.max(j)));
        }
        let mut adjacency = vec![Vec::new(); users];
        for &(i, j) in &set {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for row in &mut adjacency {
            row.sort_unstable();
        }
        let t = Topology {
            kind,
            users,
            edges: set.into_iter().collect(),
            adjacency,
        };
        if !t.is_connected() {
            return Err(TopologyError::Disconnected);
        }
        Ok(t)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.users];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Open neighborhood of `k`, sorted.
    pub fn neighbors(&self, k: usize) -> Result<&[usize], TopologyError> {
        self.adjacency
            .get(k)
            .map(Vec::as_slice)
            .ok_or(TopologyError::BadVertex {
                vertex: k,
                users: self.users,
            })
    }

    /// `neighbors(k) ∪ {k}`, sorted.
    pub fn closed_neighborhood(&self, k: usize) -> Result<Vec<usize>, TopologyError> {
        let mut out = self.neighbors(k)?.to_vec();
        let pos = out.partition_point(|&v| v < k);
        out.insert(pos, k);
        Ok(out)
    }

    pub fn degree(&self, k: usize) -> Result<usize, TopologyError> {
        self.neighbors(k).map(<[usize]>::len)
    }

    /// The common degree if every vertex has the same one.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adjacency[0].len();
        self.adjacency.iter().all(|n| n.len() == d).then_some(d)
    }

    /// 0/1 adjacency matrix over `spec`.
    pub fn adjacency(&self, spec: FieldSpec) -> FieldMatrix {
        let mut m = FieldMatrix::zeros(spec, self.users, self.users);
        for &(i, j) in &self.edges {
            m.set(i, j, spec.one());
            m.set(j, i, spec.one());
        }
        m
    }
}
