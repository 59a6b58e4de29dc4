use crate::domain::Ball;
use crate::padic::{ExtInt, Prime};

/// Data attached to an edge `A -> B` when the subsidiary test is run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsidiaryEdgeData {
    /// Least `s >= 0` making the rescaled edge identity integral.
    pub s_exponent: i64,
    /// Exponents of `p^-s`, `p^l |f'(a)|`, `|Q(a)||f'(a)|/|Q'(a)|` and
    /// `p^-2s |Q(a)||f'(a)|^2`; the third is `+inf` when `Q'(a) = 0`.
    pub bound_exponents: [ExtInt; 4],
    pub passes: bool,
}

/// The digraph `G(f, p^t)`: one vertex per level-`t` ball of the domain and
/// one out-edge per vertex, to the ball containing the image of its
/// representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelDigraph {
    pub prime: Prime,
    pub level: i64,
    /// Level-`t` balls in key order.
    pub vertices: Vec<Ball>,
    /// `edges[i]` is the index of the successor of `vertices[i]`.
    pub edges: Vec<usize>,
    /// Per-edge subsidiary data, present once the subsidiary test has run.
    pub subsidiary: Option<Vec<SubsidiaryEdgeData>>,
}

impl LevelDigraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, ball: &Ball) -> Option<usize> {
        self.vertices.binary_search(ball).ok()
    }

    pub fn successor(&self, ball: &Ball) -> Option<&Ball> {
        self.index_of(ball).map(|i| &self.vertices[self.edges[i]])
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.len()];
        for &j in &self.edges {
            deg[j] += 1;
        }
        deg
    }

    /// Indices of the vertices mapping to vertex `j`.
    pub fn preimages(&self, j: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.edges[i] == j).collect()
    }

    /// Whether every edge passes the subsidiary test, i.e. `G* = G`.
    /// `None` if the subsidiary data was not computed.
    pub fn subsidiary_is_full(&self) -> Option<bool> {
        self.subsidiary.as_ref().map(|s| s.iter().all(|e| e.passes))
    }

    /// Edges of `G*` as index pairs.
    pub fn subsidiary_edges(&self) -> Vec<(usize, usize)> {
        match &self.subsidiary {
            Some(data) => data
                .iter()
                .enumerate()
                .filter(|(_, d)| d.passes)
                .map(|(i, _)| (i, self.edges[i]))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn cycles(&self) -> CycleDecomposition {
        CycleDecomposition::of(self)
    }
}

/// Functional-graph decomposition of a [`LevelDigraph`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleDecomposition {
    /// Vertex indices of each cycle, starting at its smallest key; cycles
    /// are ordered by that smallest key.
    pub cycles: Vec<Vec<usize>>,
    /// Vertices on no cycle, in key order.
    pub tail_vertices: Vec<usize>,
    pub in_degrees: Vec<usize>,
}

impl CycleDecomposition {
    pub fn of(g: &LevelDigraph) -> Self {
        const UNSEEN: u8 = 0;
        const ACTIVE: u8 = 1;
        const DONE: u8 = 2;
        let n = g.len();
        let mut state = vec![UNSEEN; n];
        let mut on_cycle = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            let mut path = Vec::new();
            let mut v = start;
            while state[v] == UNSEEN {
                state[v] = ACTIVE;
                path.push(v);
                v = g.edges[v];
            }
            if state[v] == ACTIVE {
                let pos = path.iter().position(|&u| u == v).expect("v is on the path");
                let mut cycle = path[pos..].to_vec();
                let min_at = cycle
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, &u)| u)
                    .map(|(i, _)| i)
                    .expect("nonempty cycle");
                cycle.rotate_left(min_at);
                for &u in &cycle {
                    on_cycle[u] = true;
                }
                cycles.push(cycle);
            }
            for u in path {
                state[u] = DONE;
            }
        }
        cycles.sort_by_key(|c| c[0]);
        let tail_vertices = (0..n).filter(|&v| !on_cycle[v]).collect();
        CycleDecomposition {
            cycles,
            tail_vertices,
            in_degrees: g.in_degrees(),
        }
    }

    pub fn is_union_of_cycles(&self) -> bool {
        self.tail_vertices.is_empty()
    }

    pub fn is_single_cycle(&self) -> bool {
        self.tail_vertices.is_empty() && self.cycles.len() == 1
    }

    /// Cycle lengths in ascending order.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let mut lens: Vec<usize> = self.cycles.iter().map(Vec::len).collect();
        lens.sort_unstable();
        lens
    }
}
