//! Rainbow matchings of size at least `δ - 2δ^(2/3)` on properly colored
//! graphs with at least `2δ` vertices.
//!
//! Start from a greedy maximal rainbow matching `M` with free vertex set
//! `R`. Colors unused by `M` form `C_1`. Layer `j` looks at the surviving
//! matching edges `M_j` and moves into `M_j'` those whose endpoints have at
//! least `4δ^(1/3)` edges into `R` colored from `C_j`; their colors join
//! `C_{j+1}`. Certain local structures (a `C_j` edge inside `R`, a matching
//! edge with differently colored `C_j` edges into `R` at both ends, or a `C_j`
//! edge from `R` to the non-designated end of an earlier `M'` edge) let us
//! grow `M` by one: add the offending edges and trace every borrowed color
//! back to a `C_1` color, re-matching each designated endpoint on the way.
//! When the layers run out without such a structure, `M` is large enough.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::SolverError;
use crate::graph::{validate_rainbow_matching, Color, ColoredGraph, Edge, RainbowMatching, Vertex};

/// Floor of the real cube root.
pub fn icbrt(x: u64) -> u64 {
    let mut r = (x as f64).cbrt() as u64;
    while r.pow(3) > x {
        r -= 1;
    }
    while (r + 1).pow(3) <= x {
        r += 1;
    }
    r
}

/// `⌊2δ^(1/3)⌋`.
pub fn layer_count(delta: usize) -> usize {
    icbrt(8 * delta as u64) as usize
}

/// `max(0, ⌈δ - 2δ^(2/3)⌉)`.
pub fn size_bound(delta: usize) -> usize {
    let d = delta as u64;
    delta.saturating_sub(icbrt(8 * d * d) as usize)
}

/// `s >= 4δ^(1/3)`.
fn meets_threshold(s: usize, delta: usize) -> bool {
    (s as u128).pow(3) >= 64 * delta as u128
}

/// `2s >= δ^(2/3)`, i.e. `s >= δ^(2/3)/2`.
fn at_least_half_two_thirds(s: usize, delta: usize) -> bool {
    (2 * s as u128).pow(3) >= (delta as u128).pow(2)
}

/// `d > 2δ^(2/3)`.
fn above_two_thirds(d: usize, delta: usize) -> bool {
    (d as u128).pow(3) > 8 * (delta as u128).pow(2)
}

/// A matching edge moved into `M_j'`; all its `C_j` edges into `R` are
/// credited to `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Split {
    pub edge: Edge,
    pub x: Vertex,
    pub y: Vertex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Layer {
    /// `|M_j|`.
    pub surviving: usize,
    /// `M_j'`.
    pub split: Vec<Split>,
    /// Smallest `deg_{C_j}(v, V(M_j))` over free `v`.
    pub min_free_degree: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// A `C_j` edge joining two free vertices.
    FreeFree(Edge),
    /// `edge` in `M_j'` with `C_j` edges into `R` of different colors and
    /// different free ends at both of its endpoints.
    TwoSided {
        edge: Edge,
        first: Edge,
        second: Edge,
    },
    /// A `C_j` edge from a free vertex to the `y` end of `edge`, an earlier
    /// layer's `M'` edge.
    HitsY { edge: Edge, hit: Edge },
}

impl Violation {
    pub fn label(&self) -> &'static str {
        match self {
            Violation::FreeFree(_) => "free-free",
            Violation::TwoSided { .. } => "two-sided",
            Violation::HitsY { .. } => "hits-y",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayerState {
    pub matching: RainbowMatching,
    pub layers: Vec<Layer>,
    /// The first structure found whose exchange succeeds, if any.
    pub violation: Option<Violation>,
    delta: usize,
    free: Vec<bool>,
    /// Layer at which each matching edge entered `M'`.
    promoted: Vec<Option<usize>>,
    designated: Vec<Vertex>,
    owner: HashMap<Color, usize>,
}

impl LayerState {
    pub fn is_free(&self, v: Vertex) -> bool {
        self.free[v]
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    /// `Some(0)` for `C_1`, `Some(j)` for colors of `M_j'`, `None` for
    /// colors of matching edges never promoted.
    pub fn color_level(&self, c: Color) -> Option<usize> {
        match self.owner.get(&c) {
            None => Some(0),
            Some(&i) => self.promoted[i],
        }
    }

    /// `c ∈ C_j`.
    pub fn active(&self, c: Color, j: usize) -> bool {
        self.color_level(c).is_some_and(|l| l < j)
    }

    fn index_of(&self, e: &Edge) -> Option<usize> {
        self.owner
            .get(&e.color)
            .copied()
            .filter(|&i| self.matching.edges()[i] == *e)
    }
}

struct Plan<'a> {
    g: &'a ColoredGraph,
    state: &'a LayerState,
    removed: BTreeSet<usize>,
    added: Vec<Edge>,
    taken: BTreeSet<Vertex>,
}

impl Plan<'_> {
    fn color_taken(&self, c: Color) -> bool {
        if self.added.iter().any(|e| e.color == c) {
            return true;
        }
        matches!(self.state.owner.get(&c), Some(i) if !self.removed.contains(i))
    }

    fn add(&mut self, e: Edge) -> Option<()> {
        if self.added.iter().any(|a| a.color == e.color) {
            return None;
        }
        for x in e.endpoints() {
            if self.state.is_free(x) && !self.taken.insert(x) {
                return None;
            }
        }
        self.added.push(e);
        match self.state.owner.get(&e.color) {
            Some(&i) if !self.removed.contains(&i) => self.remove_and_rematch(i),
            _ => Some(()),
        }
    }

    /// Removes matching edge `i` and re-matches its designated end into `R`
    /// with an unused color from an earlier layer, preferring colors that
    /// need no further tracing, then shallower colors, then smaller ends.
    fn remove_and_rematch(&mut self, i: usize) -> Option<()> {
        let level = self.state.promoted[i]?;
        self.removed.insert(i);
        let x = self.state.designated[i];
        let pick = self
            .g
            .neighbors(x)
            .iter()
            .filter(|(r, c)| {
                self.state.is_free(*r)
                    && !self.taken.contains(r)
                    && self.state.active(*c, level)
                    && !self.color_taken(*c)
            })
            .map(|&(r, c)| {
                let terminal =
                    !matches!(self.state.owner.get(&c), Some(o) if !self.removed.contains(o));
                let depth = self.state.color_level(c).unwrap_or(usize::MAX);
                ((!terminal, depth, r), c)
            })
            .min()?;
        let ((_, _, r), c) = pick;
        self.add(Edge::new(x, r, c))
    }

    fn finish(self) -> Option<RainbowMatching> {
        let m: RainbowMatching = self
            .state
            .matching
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.removed.contains(i))
            .map(|(_, e)| *e)
            .chain(self.added)
            .collect();
        let ok = m.len() == self.state.matching.len() + 1
            && validate_rainbow_matching(self.g, &m).is_ok();
        ok.then_some(m)
    }
}

fn plan(g: &ColoredGraph, state: &LayerState, violation: &Violation) -> Option<RainbowMatching> {
    let mut p = Plan {
        g,
        state,
        removed: BTreeSet::new(),
        added: Vec::new(),
        taken: BTreeSet::new(),
    };
    match violation {
        Violation::FreeFree(e) => p.add(*e)?,
        Violation::TwoSided {
            edge,
            first,
            second,
        } => {
            p.removed.insert(state.index_of(edge)?);
            p.add(*first)?;
            p.add(*second)?;
        }
        Violation::HitsY { edge, hit } => {
            p.remove_and_rematch(state.index_of(edge)?)?;
            p.add(*hit)?;
        }
    }
    p.finish()
}

/// Greedy rainbow matching over edges in ascending `(color, u, v)` order.
/// No edge between two unmatched vertices has an unused color afterwards.
pub fn greedy_matching(g: &ColoredGraph) -> RainbowMatching {
    let mut edges = g.edges().to_vec();
    edges.sort_by_key(|e| (e.color, e.u, e.v));
    let mut used_vertex = vec![false; g.vertex_count() + 1];
    let mut used_color = BTreeSet::new();
    let mut out = Vec::new();
    for e in edges {
        if !used_vertex[e.u] && !used_vertex[e.v] && !used_color.contains(&e.color) {
            used_vertex[e.u] = true;
            used_vertex[e.v] = true;
            used_color.insert(e.color);
            out.push(e);
        }
    }
    RainbowMatching::new(out)
}

/// Builds layers `1..=⌊2δ^(1/3)⌋` over `matching`, stopping at the first
/// violation whose exchange goes through. Scan order inside a layer:
/// free-free edges, then two-sided edges, then edges hitting earlier `y`s,
/// each in ascending edge order.
pub fn build_layers(g: &ColoredGraph, matching: &RainbowMatching) -> LayerState {
    let delta = g.min_degree();
    let mut free = vec![true; g.vertex_count() + 1];
    free[0] = false;
    let mut owner = HashMap::new();
    for (i, e) in matching.edges().iter().enumerate() {
        free[e.u] = false;
        free[e.v] = false;
        owner.insert(e.color, i);
    }
    let mut state = LayerState {
        matching: matching.clone(),
        layers: Vec::new(),
        violation: None,
        delta,
        free,
        promoted: vec![None; matching.len()],
        designated: vec![0; matching.len()],
        owner,
    };
    let fires = |state: &LayerState, v: &Violation| plan(g, state, v).is_some();

    for j in 1..=layer_count(delta) {
        // M_j: edges not promoted yet.
        let surviving: Vec<usize> = (0..matching.len())
            .filter(|&i| state.promoted[i].is_none())
            .collect();

        for &e in g.edges() {
            if state.is_free(e.u) && state.is_free(e.v) && state.active(e.color, j) {
                let v = Violation::FreeFree(e);
                if fires(&state, &v) {
                    state.violation = Some(v);
                    return state;
                }
            }
        }

        let into_r = |state: &LayerState, x: Vertex| -> Vec<(Vertex, Color)> {
            g.neighbors(x)
                .iter()
                .copied()
                .filter(|&(r, c)| state.is_free(r) && state.active(c, j))
                .collect()
        };
        let mut split = Vec::new();
        for &i in &surviving {
            let e = matching.edges()[i];
            let (eu, ev) = (into_r(&state, e.u), into_r(&state, e.v));
            if !meets_threshold(eu.len() + ev.len(), delta) {
                continue;
            }
            if !eu.is_empty() && !ev.is_empty() {
                for &(r1, c1) in &eu {
                    for &(r2, c2) in &ev {
                        if r1 == r2 || c1 == c2 {
                            continue;
                        }
                        let v = Violation::TwoSided {
                            edge: e,
                            first: Edge::new(e.u, r1, c1),
                            second: Edge::new(e.v, r2, c2),
                        };
                        if fires(&state, &v) {
                            state.violation = Some(v);
                            return state;
                        }
                    }
                }
            }
            let (x, y) = if eu.len() >= ev.len() {
                (e.u, e.v)
            } else {
                (e.v, e.u)
            };
            split.push((i, Split { edge: e, x, y }));
        }

        for layer in &state.layers {
            for s in &layer.split {
                for &(r, c) in g.neighbors(s.y) {
                    if state.is_free(r) && state.active(c, j) {
                        let v = Violation::HitsY {
                            edge: s.edge,
                            hit: Edge::new(s.y, r, c),
                        };
                        if fires(&state, &v) {
                            state.violation = Some(v);
                            return state;
                        }
                    }
                }
            }
        }

        let min_free_degree = state
            .free
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(v, _)| {
                g.neighbors(v)
                    .iter()
                    .filter(|&&(w, c)| {
                        state.active(c, j)
                            && surviving.iter().any(|&i| matching.edges()[i].touches(w))
                    })
                    .count()
            })
            .min();
        let empty = split.is_empty();
        for &(i, s) in &split {
            state.promoted[i] = Some(j);
            state.designated[i] = s.x;
        }
        state.layers.push(Layer {
            surviving: surviving.len(),
            split: split.into_iter().map(|(_, s)| s).collect(),
            min_free_degree,
        });
        if empty {
            break;
        }
    }
    state
}

pub fn detect_violation(state: &LayerState) -> Option<Violation> {
    state.violation.clone()
}

/// Performs the exchange for `violation`: exactly one more edge.
pub fn trace_back_augment(
    g: &ColoredGraph,
    state: &LayerState,
    violation: &Violation,
) -> Result<RainbowMatching, SolverError> {
    plan(g, state, violation).ok_or_else(|| {
        SolverError::InternalInvariantBroken(format!(
            "no exchange for {violation:?}: not enough free neighbors in unused colors"
        ))
    })
}

/// Per-round statistics, one JSON line each under `--trace`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    pub round: usize,
    pub matching: usize,
    pub free: usize,
    /// `(|M_j|, |M_j'|)` per built layer.
    pub layers: Vec<(usize, usize)>,
    pub violation: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredSolution {
    pub matching: RainbowMatching,
    pub bound: usize,
    pub rounds: Vec<RoundStats>,
}

impl LayeredSolution {
    pub fn augmentations(&self) -> usize {
        self.rounds.iter().filter(|r| r.violation.is_some()).count()
    }
}

pub fn find_rainbow_matching_layered(g: &ColoredGraph) -> Result<RainbowMatching, SolverError> {
    solve(g).map(|s| s.matching)
}

pub fn solve(g: &ColoredGraph) -> Result<LayeredSolution, SolverError> {
    let delta = g.min_degree();
    let n = g.vertex_count();
    if n < 2 * delta {
        return Err(SolverError::PreconditionViolated(format!(
            "{n} vertices < 2δ = {}",
            2 * delta
        )));
    }
    let bound = size_bound(delta);
    let mut matching = greedy_matching(g);
    let mut rounds = Vec::new();
    loop {
        let state = build_layers(g, &matching);
        rounds.push(RoundStats {
            round: rounds.len(),
            matching: matching.len(),
            free: state.free_count(),
            layers: state
                .layers
                .iter()
                .map(|l| (l.surviving, l.split.len()))
                .collect(),
            violation: state.violation.as_ref().map(Violation::label),
        });
        let Some(violation) = &state.violation else {
            if matching.len() < bound {
                return Err(SolverError::InternalInvariantBroken(format!(
                    "no violation left but |M| = {} < {bound}; {}",
                    matching.len(),
                    describe_laws(&state)
                )));
            }
            break;
        };
        let next = trace_back_augment(g, &state, violation)?;
        if next.len() != matching.len() + 1 {
            return Err(SolverError::InternalInvariantBroken(format!(
                "exchange changed |M| from {} to {}",
                matching.len(),
                next.len()
            )));
        }
        matching = next;
    }
    Ok(LayeredSolution {
        matching: matching.sorted(),
        bound,
        rounds,
    })
}

/// Which of the layer laws the final build satisfied; the laws are only
/// promised when `|M|` is below the bound.
pub fn describe_laws(state: &LayerState) -> String {
    let delta = state.delta;
    let mut parts = vec![format!("|R| = {}", state.free_count())];
    for (j, layer) in state.layers.iter().enumerate() {
        parts.push(format!(
            "layer {}: |M_j| = {}, |M_j'| = {}, shrink {}, free degree {}",
            j + 1,
            layer.surviving,
            layer.split.len(),
            if at_least_half_two_thirds(layer.split.len(), delta) {
                "ok"
            } else {
                "short"
            },
            match layer.min_free_degree {
                Some(d) if above_two_thirds(d, delta) => "ok",
                Some(_) => "short",
                None => "n/a",
            }
        ));
    }
    parts.join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cyclic_square, random_square, Seed};

    #[test]
    fn integer_roots() {
        assert_eq!(icbrt(0), 0);
        assert_eq!(icbrt(26), 2);
        assert_eq!(icbrt(27), 3);
        assert_eq!(icbrt(5832), 18);
        assert_eq!(icbrt(u32::MAX as u64), 1625);
        assert_eq!(size_bound(27), 9);
        assert_eq!(size_bound(2), 0);
        assert_eq!(size_bound(0), 0);
        assert_eq!(layer_count(27), 6);
        assert_eq!(layer_count(1), 2);
        assert!(meets_threshold(4, 1));
        assert!(!meets_threshold(3, 1));
        assert!(meets_threshold(12, 27));
        assert!(!meets_threshold(11, 27));
    }

    #[test]
    fn trivial_inputs() {
        let g = ColoredGraph::empty(4).unwrap();
        assert!(find_rainbow_matching_layered(&g).unwrap().is_empty());
        let z2 = cyclic_square(2).to_bipartite_factorization();
        assert_eq!(find_rainbow_matching_layered(&z2).unwrap().len(), 1);
        let tiny = ColoredGraph::new(3, [(1, 2, 1), (2, 3, 2), (1, 3, 3)]).unwrap();
        assert!(matches!(
            find_rainbow_matching_layered(&tiny),
            Err(SolverError::PreconditionViolated(_))
        ));
    }

    // x1=1 y1=2 (color 5), x2=3 y2=4 (color 6); x1 -> 5..8 and x2 -> 9..12
    // in colors 1..4; vertex 13 free.
    fn promoted_pair(
        extra: (Vertex, Vertex, Color),
        vertices: usize,
    ) -> (ColoredGraph, RainbowMatching) {
        let mut edges = vec![(1, 2, 5), (3, 4, 6), extra];
        for k in 0..4u32 {
            edges.push((1, 5 + k as usize, k + 1));
            edges.push((3, 9 + k as usize, k + 1));
        }
        let g = ColoredGraph::new(vertices, edges).unwrap();
        let m = RainbowMatching::new(vec![Edge::new(1, 2, 5), Edge::new(3, 4, 6)]);
        (g, m)
    }

    #[test]
    fn classification_by_hand() {
        let (g, m) = promoted_pair((13, 2, 6), 13);
        let state = build_layers(&g, &m);
        let first = &state.layers[0];
        assert_eq!(first.surviving, 2);
        assert_eq!(
            first.split,
            vec![
                Split {
                    edge: Edge::new(1, 2, 5),
                    x: 1,
                    y: 2
                },
                Split {
                    edge: Edge::new(3, 4, 6),
                    x: 3,
                    y: 4
                },
            ]
        );
        assert_eq!(state.color_level(1), Some(0));
        assert_eq!(state.color_level(5), Some(1));
        assert!(state.active(6, 2) && !state.active(6, 1));
    }

    #[test]
    fn hits_y_exchange() {
        let (g, m) = promoted_pair((13, 2, 6), 13);
        let state = build_layers(&g, &m);
        let v = detect_violation(&state).unwrap();
        assert_eq!(
            v,
            Violation::HitsY {
                edge: Edge::new(1, 2, 5),
                hit: Edge::new(2, 13, 6)
            }
        );
        let next = trace_back_augment(&g, &state, &v).unwrap();
        assert_eq!(
            next.sorted().edges(),
            &[Edge::new(1, 5, 1), Edge::new(2, 13, 6), Edge::new(3, 10, 2)]
        );
    }

    #[test]
    fn free_free_with_borrowed_color() {
        let (g, m) = promoted_pair((13, 14, 6), 14);
        let state = build_layers(&g, &m);
        let v = detect_violation(&state).unwrap();
        assert_eq!(v, Violation::FreeFree(Edge::new(13, 14, 6)));
        assert_eq!(state.layers.len(), 1);
        let next = trace_back_augment(&g, &state, &v).unwrap();
        // Color 6 moves to the free edge; x2 re-matched in color 1.
        assert_eq!(
            next.sorted().edges(),
            &[Edge::new(1, 2, 5), Edge::new(3, 9, 1), Edge::new(13, 14, 6)]
        );
    }

    #[test]
    fn free_free_depth_zero() {
        let g = ColoredGraph::new(4, [(1, 2, 1), (3, 4, 2)]).unwrap();
        let m = RainbowMatching::new(vec![Edge::new(1, 2, 1)]);
        let state = build_layers(&g, &m);
        assert_eq!(
            state.violation,
            Some(Violation::FreeFree(Edge::new(3, 4, 2)))
        );
        assert_eq!(
            trace_back_augment(&g, &state, state.violation.as_ref().unwrap())
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn two_sided_exchange() {
        // x1 = 1 sees 3, 4, 5 in colors 1..3; y1 = 2 sees 6 in color 4.
        let g =
            ColoredGraph::new(6, [(1, 2, 5), (1, 3, 1), (1, 4, 2), (1, 5, 3), (2, 6, 4)]).unwrap();
        let m = RainbowMatching::new(vec![Edge::new(1, 2, 5)]);
        let state = build_layers(&g, &m);
        let v = detect_violation(&state).unwrap();
        assert_eq!(
            v,
            Violation::TwoSided {
                edge: Edge::new(1, 2, 5),
                first: Edge::new(1, 3, 1),
                second: Edge::new(2, 6, 4),
            }
        );
        let next = trace_back_augment(&g, &state, &v).unwrap();
        assert_eq!(
            next.sorted().edges(),
            &[Edge::new(1, 3, 1), Edge::new(2, 6, 4)]
        );
    }

    #[test]
    fn squares_meet_the_bound() {
        for (n, seeds) in [(8usize, 6u64), (16, 4), (27, 2)] {
            for s in 0..seeds {
                let g = random_square(n, Seed(s)).to_bipartite_factorization();
                let sol = solve(&g).unwrap();
                assert!(sol.matching.len() >= size_bound(n));
                assert!(validate_rainbow_matching(&g, &sol.matching).is_ok());
                let greedy = greedy_matching(&g).len();
                assert_eq!(sol.matching.len(), greedy + sol.augmentations());
            }
        }
    }
}
