//! Partial transversals without short cycles.
//!
//! A Latin square of order `n` is a 1-factorization of the complete digraph
//! with loops: cell `(r, c)` holding `s` is the arc `r -> c` of color `s`. A
//! partial transversal is then a rainbow linear digraph (in- and out-degree
//! at most one), and its cycles are the digraph's cycles.
//!
//! The builder keeps a rainbow linear digraph `G_1` with `t` arcs and no
//! cycle of length `<= k`. `A_1`/`B_1` are the starts/ends of its paths
//! (isolated vertices count for both). Layer `i` picks the unused color with
//! the fewest forbidden arcs into `A_{i-1}`, where `v -> u` is forbidden if
//! it is a loop or a rainbow path of length `< k` leads from `u` to `v`. The
//! tails of the other arcs of that color become `B_i` and their `G_1`
//! successors become `A_i`. A tail in `B_1` gives `t + 1` arcs after
//! unwinding the recorded parents; no growth means `G_1` is locally maximal.

use serde::Serialize;

use crate::error::SolverError;
use crate::latin::{Cell, DigraphView, ForbiddenCycles, LatinSquare, PartialTransversal, Symbol};

pub type Vertex = usize;

/// `max(0, ⌈n - 6n^((k-1)/k)⌉)`.
pub fn theorem_bound(n: usize, k: usize) -> usize {
    assert!(k >= 2, "k must be at least 2");
    // ⌈n - x⌉ = n - ⌊x⌋ with x = 6n^((k-1)/k); ⌊x⌋ is the largest a with
    // a^k <= 6^k n^(k-1).
    let estimate = (6.0 * (n as f64).powf((k - 1) as f64 / k as f64)).floor() as u128;
    let rhs = 6u128.checked_pow(k as u32).and_then(|p| {
        (n as u128)
            .checked_pow(k as u32 - 1)
            .and_then(|q| p.checked_mul(q))
    });
    let floor_x = match rhs {
        Some(rhs) => {
            let fits = |a: u128| a.checked_pow(k as u32).is_some_and(|p| p <= rhs);
            let mut a = estimate;
            while a > 0 && !fits(a) {
                a -= 1;
            }
            while fits(a + 1) {
                a += 1;
            }
            a
        }
        None => estimate,
    };
    (n as u128).saturating_sub(floor_x) as usize
}

/// `max(0, ⌈(1 - 4 ln ln n / ln n) n⌉)`; zero below `n = 3`, where
/// `ln ln n` is not positive.
pub fn corollary_bound(n: usize) -> usize {
    if n < 3 {
        return 0;
    }
    let ln = (n as f64).ln();
    let value = (1.0 - 4.0 * ln.ln() / ln) * n as f64;
    if value <= 0.0 {
        0
    } else {
        (value.ceil() as usize).min(n)
    }
}

/// `max(2, ⌊ln n / (3 ln ln n)⌋)`, and 2 below `n = 3`.
pub fn corollary_k(n: usize) -> usize {
    if n < 3 {
        return 2;
    }
    let ln = (n as f64).ln();
    ((ln / (3.0 * ln.ln())).floor() as usize).max(2)
}

/// A rainbow-or-not subdigraph with in- and out-degree at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearDigraph {
    succ: Vec<Option<(Vertex, Symbol)>>,
    pred: Vec<Option<Vertex>>,
}

impl LinearDigraph {
    pub fn empty(n: usize) -> Self {
        LinearDigraph {
            succ: vec![None; n + 1],
            pred: vec![None; n + 1],
        }
    }

    pub fn from_transversal(n: usize, t: &PartialTransversal) -> Result<Self, SolverError> {
        let mut g = LinearDigraph::empty(n);
        for c in t.cells() {
            g.add(c.row, c.col, c.symbol)?;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.succ.len() - 1
    }

    pub fn arc_count(&self) -> usize {
        self.succ.iter().flatten().count()
    }

    pub fn successor(&self, v: Vertex) -> Option<(Vertex, Symbol)> {
        self.succ[v]
    }

    pub fn predecessor(&self, v: Vertex) -> Option<Vertex> {
        self.pred[v]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (Vertex, Vertex, Symbol)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .filter_map(|(v, s)| s.map(|(w, c)| (v, w, c)))
    }

    pub fn add(&mut self, tail: Vertex, head: Vertex, color: Symbol) -> Result<(), SolverError> {
        if self.succ[tail].is_some() || self.pred[head].is_some() {
            return Err(SolverError::InternalInvariantBroken(format!(
                "arc {tail}->{head} would raise a degree above one"
            )));
        }
        self.succ[tail] = Some((head, color));
        self.pred[head] = Some(tail);
        Ok(())
    }

    pub fn remove_out(&mut self, tail: Vertex) -> Option<(Vertex, Symbol)> {
        let arc = self.succ[tail].take();
        if let Some((head, _)) = arc {
            self.pred[head] = None;
        }
        arc
    }

    /// Length of the cycle that `tail -> head` would close, if any.
    pub fn closes_cycle(&self, tail: Vertex, head: Vertex) -> Option<usize> {
        let mut length = 1;
        let mut at = head;
        while at != tail {
            at = self.succ[at]?.0;
            length += 1;
        }
        Some(length)
    }

    /// Path starts: no in-arc (isolated vertices included).
    pub fn starts(&self) -> Vec<Vertex> {
        (1..=self.vertex_count())
            .filter(|&v| self.pred[v].is_none())
            .collect()
    }

    /// Path ends: no out-arc (isolated vertices included).
    pub fn ends(&self) -> Vec<Vertex> {
        (1..=self.vertex_count())
            .filter(|&v| self.succ[v].is_none())
            .collect()
    }

    pub fn to_transversal(&self) -> PartialTransversal {
        self.arcs()
            .map(|(row, col, symbol)| Cell { row, col, symbol })
            .collect()
    }

    /// Checks the arcs against the factorization, rainbowness, and the cycle
    /// constraint.
    pub fn check(&self, view: &DigraphView<'_>, k: usize) -> Result<(), SolverError> {
        let broken = |m: String| Err(SolverError::InternalInvariantBroken(m));
        let mut seen = vec![false; view.vertex_count() + 1];
        for (tail, head, color) in self.arcs() {
            if view.arc_color(tail, head) != color {
                return broken(format!("arc {tail}->{head} does not have color {color}"));
            }
            if std::mem::replace(&mut seen[color as usize], true) {
                return broken(format!("color {color} used twice"));
            }
            if self.pred[head] != Some(tail) {
                return broken(format!("predecessor of {head} out of sync"));
            }
        }
        let t = self.to_transversal();
        if let Some(c) = t.cycles().cycles.iter().find(|c| c.len() <= k) {
            return broken(format!("cycle of length {} <= {k}", c.len()));
        }
        Ok(())
    }
}

/// Counters for the layer inequalities. These are reported, not enforced,
/// except where noted in [`build_short_cycle_free_transversal`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExpansionStats {
    pub augmentations: usize,
    pub rounds: usize,
    pub layers: usize,
    pub deepest_layer: usize,
    /// Chosen color's forbidden count above `k i^(k-1) (n-t) / (n-t-(i-2))`.
    pub forbidden_count_exceeded: usize,
    /// New layers smaller than `(n-t)/2` while `i <= ((n-t)/(4k))^(1/(k-1))`.
    pub short_layers: usize,
    /// Vertices of `A_{i-1}` with more than `(k-2) i^(k-2)` forbidden tails
    /// reachable by rainbow paths of length `2..k-1` ending in a `G_1` arc.
    pub path_count_exceeded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransversalOptions {
    /// Re-check every intermediate digraph.
    pub check_invariants: bool,
}

impl Default for TransversalOptions {
    fn default() -> Self {
        TransversalOptions {
            check_invariants: cfg!(debug_assertions),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransversalResult {
    pub transversal: PartialTransversal,
    pub k: usize,
    pub bound: usize,
    pub stats: ExpansionStats,
}

/// One expansion layer's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerOutcome {
    Expanded,
    /// Arc `tail -> head` of `color` joins two paths (or closes a long cycle).
    AugmentationFound {
        tail: Vertex,
        head: Vertex,
        color: Symbol,
    },
    Stalled,
    ColorsExhausted,
}

/// The nested `A_i`, `B_i` and the extra arcs of `G_i` for one round.
pub struct TransversalSearchState<'a> {
    view: DigraphView<'a>,
    k: usize,
    g1: LinearDigraph,
    a_layers: Vec<Vec<Vertex>>,
    b_layers: Vec<Vec<Vertex>>,
    in_a: Vec<bool>,
    in_b: Vec<bool>,
    in_b1: Vec<bool>,
    /// For `a` in `A_i \ A_{i-1}`, `i >= 2`: the `b` it was shifted from.
    shifted_from: Vec<Option<Vertex>>,
    /// For `b` in `B_i \ B_{i-1}`, `i >= 2`: its arc into `A_{i-1}`.
    parent: Vec<Option<(Vertex, Symbol)>>,
    color_used: Vec<bool>,
    unused: usize,
}

impl<'a> TransversalSearchState<'a> {
    pub fn new(view: DigraphView<'a>, k: usize, g1: LinearDigraph) -> Self {
        let n = view.vertex_count();
        let a1 = g1.starts();
        let b1 = g1.ends();
        let mut in_a = vec![false; n + 1];
        let mut in_b = vec![false; n + 1];
        for &a in &a1 {
            in_a[a] = true;
        }
        for &b in &b1 {
            in_b[b] = true;
        }
        let mut color_used = vec![false; n + 1];
        for (_, _, c) in g1.arcs() {
            color_used[c as usize] = true;
        }
        let unused = n - g1.arc_count();
        TransversalSearchState {
            view,
            k,
            a_layers: vec![a1],
            b_layers: vec![b1],
            in_b1: in_b.clone(),
            in_a,
            in_b,
            shifted_from: vec![None; n + 1],
            parent: vec![None; n + 1],
            color_used,
            unused,
            g1,
        }
    }

    pub fn a_layers(&self) -> &[Vec<Vertex>] {
        &self.a_layers
    }

    pub fn b_layers(&self) -> &[Vec<Vertex>] {
        &self.b_layers
    }

    fn out_arcs(&self, x: Vertex) -> impl Iterator<Item = (Vertex, Symbol, bool)> + '_ {
        let first = self.g1.successor(x).map(|(w, c)| (w, c, true));
        let extra = self.parent[x].map(|(w, c)| (w, c, false));
        first.into_iter().chain(extra)
    }

    /// Tails `v` with `v -> u` forbidden: `u` itself and every vertex at the
    /// end of a rainbow path of length `1..k-1` from `u` in `G_{i-1}`. The
    /// second list holds the vertices reached by such paths of length at
    /// least 2 whose last arc is in `G_1`.
    fn forbidden_tails(&self, u: Vertex) -> (Vec<Vertex>, Vec<Vertex>) {
        let mut all = vec![u];
        let mut counted = Vec::new();
        let mut colors = Vec::new();
        let mut path = vec![u];
        self.walk(u, &mut path, &mut colors, &mut all, &mut counted);
        all.sort_unstable();
        all.dedup();
        counted.sort_unstable();
        counted.dedup();
        (all, counted)
    }

    fn walk(
        &self,
        x: Vertex,
        path: &mut Vec<Vertex>,
        colors: &mut Vec<Symbol>,
        all: &mut Vec<Vertex>,
        counted: &mut Vec<Vertex>,
    ) {
        if path.len() >= self.k {
            return;
        }
        for (w, c, in_g1) in self.out_arcs(x) {
            if path.contains(&w) || colors.contains(&c) {
                continue;
            }
            all.push(w);
            if in_g1 && path.len() >= 2 {
                counted.push(w);
            }
            path.push(w);
            colors.push(c);
            self.walk(w, path, colors, all, counted);
            path.pop();
            colors.pop();
        }
    }

    /// Builds layer `i = self.a_layers.len() + 1`.
    pub fn expand_layer(
        &mut self,
        stats: &mut ExpansionStats,
    ) -> Result<LayerOutcome, SolverError> {
        let n = self.view.vertex_count();
        let t = self.g1.arc_count();
        let i = self.a_layers.len() + 1;
        if self.unused == 0 {
            return Ok(LayerOutcome::ColorsExhausted);
        }
        let heads: Vec<Vertex> = self.a_layers.iter().flatten().copied().collect();
        let mut forbidden = vec![Vec::new(); n + 1];
        let mut total = 0;
        for &u in &heads {
            let (all, counted) = self.forbidden_tails(u);
            let k = self.k as u128;
            if counted.len() as u128 > (k - 2) * (i as u128).pow(self.k as u32 - 2) {
                stats.path_count_exceeded += 1;
            }
            total += all.len();
            forbidden[u] = all;
        }

        // Color with the fewest forbidden arcs into A_{i-1}; smallest wins ties.
        let is_forbidden = |u: Vertex, v: Vertex| forbidden[u].binary_search(&v).is_ok();
        let (count, color) = (1..=n as Symbol)
            .filter(|&c| !self.color_used[c as usize])
            .map(|c| {
                let count = heads
                    .iter()
                    .filter(|&&u| is_forbidden(u, self.view.tail_of(u, c)))
                    .count();
                (count, c)
            })
            .min()
            .expect("an unused color exists");
        // Averaging: each forbidden pair has exactly one color.
        if count * self.unused > total {
            return Err(SolverError::InternalInvariantBroken(format!(
                "color {color} has {count} forbidden arcs, above the average {total}/{}",
                self.unused
            )));
        }
        let deficit = n - t;
        let f_num = (self.k as u128) * (i as u128).pow(self.k as u32 - 1) * deficit as u128;
        let f_den = (deficit + 2).saturating_sub(i) as u128;
        if f_den > 0 && count as u128 * f_den > f_num {
            stats.forbidden_count_exceeded += 1;
        }

        let arcs: Vec<(Vertex, Vertex)> = heads
            .iter()
            .map(|&u| (self.view.tail_of(u, color), u))
            .filter(|&(v, u)| !is_forbidden(u, v))
            .collect();
        if let Some(&(v, u)) = arcs
            .iter()
            .filter(|(v, _)| self.in_b1[*v])
            .min_by_key(|(_, u)| *u)
        {
            return Ok(LayerOutcome::AugmentationFound {
                tail: v,
                head: u,
                color,
            });
        }

        let mut new_b: Vec<(Vertex, Vertex)> =
            arcs.into_iter().filter(|(v, _)| !self.in_b[*v]).collect();
        new_b.sort_unstable();
        // Tails in B_{i-1} \ B_1 number at most |A_{i-1} \ A_1|.
        let b_old: usize = self.b_layers[1..].iter().map(Vec::len).sum();
        if new_b.len() + count + b_old < heads.len() {
            return Err(SolverError::InternalInvariantBroken(format!(
                "layer {i}: {} new tails from {} heads with {count} forbidden",
                new_b.len(),
                heads.len()
            )));
        }
        if new_b.is_empty() {
            return Ok(LayerOutcome::Stalled);
        }
        let mut new_a = Vec::with_capacity(new_b.len());
        for &(b, u) in &new_b {
            let (a, _) = self.g1.successor(b).ok_or_else(|| {
                SolverError::InternalInvariantBroken(format!("new tail {b} is a path end"))
            })?;
            if self.in_a[a] {
                return Err(SolverError::InternalInvariantBroken(format!(
                    "shifted vertex {a} already in A"
                )));
            }
            self.in_a[a] = true;
            self.in_b[b] = true;
            self.shifted_from[a] = Some(b);
            self.parent[b] = Some((u, color));
            new_a.push(a);
        }
        self.color_used[color as usize] = true;
        self.unused -= 1;
        if (4 * self.k as u128) * (i as u128).pow(self.k as u32 - 1) <= deficit as u128
            && 2 * new_b.len() < deficit
        {
            stats.short_layers += 1;
        }
        self.b_layers
            .push(new_b.into_iter().map(|(b, _)| b).collect());
        self.a_layers.push(new_a);
        Ok(LayerOutcome::Expanded)
    }

    /// The rainbow linear digraph with `t` arcs, path ends exactly `B_1`,
    /// and a path starting at `u`.
    pub fn linear_for(&self, u: Vertex) -> Result<LinearDigraph, SolverError> {
        let mut chain = Vec::new();
        let mut x = u;
        while let Some(b) = self.shifted_from[x] {
            let (next, color) = self.parent[b].expect("shifted vertex has a parent");
            chain.push((b, next, color));
            x = next;
        }
        let mut l = self.g1.clone();
        for &(b, _, _) in &chain {
            l.remove_out(b);
        }
        for &(b, head, color) in &chain {
            l.add(b, head, color)?;
        }
        Ok(l)
    }

    pub fn apply_augmentation(
        &self,
        tail: Vertex,
        head: Vertex,
        color: Symbol,
    ) -> Result<LinearDigraph, SolverError> {
        let mut l = self.linear_for(head)?;
        l.add(tail, head, color)?;
        l.check(&self.view, self.k)?;
        if l.arc_count() != self.g1.arc_count() + 1 {
            return Err(SolverError::InternalInvariantBroken(format!(
                "augmentation produced {} arcs from {}",
                l.arc_count(),
                self.g1.arc_count()
            )));
        }
        Ok(l)
    }

    /// Independent check that no rainbow cycle of length `<= k` in `G_i`
    /// uses one of the newest layer's arcs.
    fn newest_arcs_close_no_short_cycle(&self) -> bool {
        let Some(layer) = self.b_layers.last().filter(|_| self.b_layers.len() > 1) else {
            return true;
        };
        layer.iter().all(|&b| {
            let (u, c) = self.parent[b].expect("new tail has a parent");
            // A rainbow path u ~> b of length < k avoiding color c.
            let mut stack = vec![(u, vec![u], vec![c])];
            while let Some((x, path, colors)) = stack.pop() {
                if x == b {
                    return false;
                }
                if path.len() >= self.k {
                    continue;
                }
                for (w, cw, _) in self.out_arcs(x) {
                    if !path.contains(&w) && !colors.contains(&cw) {
                        let mut p = path.clone();
                        p.push(w);
                        let mut cs = colors.clone();
                        cs.push(cw);
                        stack.push((w, p, cs));
                    }
                }
            }
            true
        })
    }
}

/// Greedy start: for each color in ascending order, the first tail (in
/// ascending order) whose arc keeps degrees at most one and closes no cycle
/// of length `<= k`.
pub fn greedy_linear_digraph(view: &DigraphView<'_>, k: usize) -> LinearDigraph {
    let n = view.vertex_count();
    let mut g = LinearDigraph::empty(n);
    for color in 1..=n as Symbol {
        for tail in 1..=n {
            let head = view.head_of(tail, color);
            if g.successor(tail).is_some() || g.predecessor(head).is_some() {
                continue;
            }
            if g.closes_cycle(tail, head).is_some_and(|l| l <= k) {
                continue;
            }
            g.add(tail, head, color).expect("degrees checked");
            break;
        }
    }
    g
}

/// A partial transversal with no cycle of length `<= k`, locally maximal
/// under the layer search, of size at least [`theorem_bound`]`(n, k)`.
pub fn build_short_cycle_free_transversal(
    square: &LatinSquare,
    k: usize,
) -> Result<TransversalResult, SolverError> {
    solve(square, k, TransversalOptions::default())
}

pub fn solve(
    square: &LatinSquare,
    k: usize,
    options: TransversalOptions,
) -> Result<TransversalResult, SolverError> {
    if k < 2 {
        return Err(SolverError::PreconditionViolated(format!("k = {k} < 2")));
    }
    let view = square.to_digraph_factorization();
    let n = view.vertex_count();
    let mut g1 = greedy_linear_digraph(&view, k);
    g1.check(&view, k)?;
    let mut stats = ExpansionStats::default();
    'rounds: loop {
        stats.rounds += 1;
        let mut state = TransversalSearchState::new(view, k, g1.clone());
        for _ in 0..n * n {
            let outcome = state.expand_layer(&mut stats)?;
            if options.check_invariants && !state.newest_arcs_close_no_short_cycle() {
                return Err(SolverError::InternalInvariantBroken(format!(
                    "layer {} closes a short rainbow cycle",
                    state.a_layers.len()
                )));
            }
            match outcome {
                LayerOutcome::Expanded => {
                    stats.layers += 1;
                    stats.deepest_layer = stats.deepest_layer.max(state.a_layers.len());
                }
                LayerOutcome::AugmentationFound { tail, head, color } => {
                    g1 = state.apply_augmentation(tail, head, color)?;
                    stats.augmentations += 1;
                    continue 'rounds;
                }
                LayerOutcome::Stalled | LayerOutcome::ColorsExhausted => break 'rounds,
            }
        }
        return Err(SolverError::InternalInvariantBroken(format!(
            "more than {} layers in one round",
            n * n
        )));
    }
    let bound = theorem_bound(n, k);
    if g1.arc_count() < bound {
        return Err(SolverError::InternalInvariantBroken(format!(
            "locally maximal with {} arcs < {bound}",
            g1.arc_count()
        )));
    }
    let transversal = g1.to_transversal().sorted();
    if options.check_invariants {
        crate::latin::validate_transversal(square, &transversal, ForbiddenCycles::UpTo(k))
            .map_err(|e| SolverError::InternalInvariantBroken(e.to_string()))?;
    }
    Ok(TransversalResult {
        transversal,
        k,
        bound,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleFreeResult {
    pub transversal: PartialTransversal,
    pub k: usize,
    /// Cells removed, one per remaining cycle.
    pub removed: Vec<Cell>,
    pub stats: ExpansionStats,
}

/// Builds with `k = corollary_k(n)`, then drops the smallest-row cell of
/// every remaining cycle.
pub fn cycle_free_transversal(square: &LatinSquare) -> Result<CycleFreeResult, SolverError> {
    let k = corollary_k(square.order());
    let built = build_short_cycle_free_transversal(square, k)?;
    let removed: Vec<Cell> = built
        .transversal
        .cycles()
        .cycles
        .iter()
        .map(|c| c[0])
        .collect();
    let transversal: PartialTransversal = built
        .transversal
        .cells()
        .iter()
        .copied()
        .filter(|c| !removed.contains(c))
        .collect();
    Ok(CycleFreeResult {
        transversal,
        k,
        removed,
        stats: built.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cyclic_square, klein_four_square, random_square, Seed};
    use crate::latin::validate_transversal;

    #[test]
    fn bounds() {
        assert_eq!(theorem_bound(49, 2), 7);
        assert_eq!(theorem_bound(100, 2), 40);
        assert_eq!(theorem_bound(36, 2), 0);
        assert_eq!(theorem_bound(1, 2), 0);
        assert_eq!(theorem_bound(1000, 3), 400);
        assert_eq!(theorem_bound(10_000, 2), 9400);
        assert_eq!(corollary_bound(2), 0);
        assert_eq!(corollary_bound(10), 0);
        assert!(corollary_bound(1_000_000) > 0);
        assert_eq!(corollary_k(1), 2);
        assert_eq!(corollary_k(100), 2);
    }

    #[test]
    fn order_one_is_a_loop() {
        let r = build_short_cycle_free_transversal(&cyclic_square(1), 2).unwrap();
        assert!(r.transversal.is_empty());
        assert!(cycle_free_transversal(&cyclic_square(1))
            .unwrap()
            .transversal
            .is_empty());
    }

    #[test]
    fn k_below_two_is_rejected() {
        assert!(matches!(
            build_short_cycle_free_transversal(&cyclic_square(3), 1),
            Err(SolverError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn cyclic_49() {
        let sq = cyclic_square(49);
        let r = build_short_cycle_free_transversal(&sq, 2).unwrap();
        assert!(r.transversal.len() >= 7);
        assert!(validate_transversal(&sq, &r.transversal, ForbiddenCycles::UpTo(2)).is_ok());
    }

    #[test]
    fn klein_square_cycle_free() {
        let sq = klein_four_square();
        let r = cycle_free_transversal(&sq).unwrap();
        assert_eq!(r.transversal.len(), 2);
        assert!(validate_transversal(&sq, &r.transversal, ForbiddenCycles::All).is_ok());
    }

    #[test]
    fn greedy_start_is_valid() {
        for s in 0..20 {
            let sq = random_square(9, Seed(s));
            let view = sq.to_digraph_factorization();
            for k in 2..5 {
                greedy_linear_digraph(&view, k).check(&view, k).unwrap();
            }
        }
    }

    // Z_5, k = 2, G_1 = {1->3 (color 3)}. A_1 = {1,2,4,5}, B_1 = {2,3,4,5}.
    #[test]
    fn depth_one_augmentation() {
        let sq = cyclic_square(5);
        let view = sq.to_digraph_factorization();
        let mut g1 = LinearDigraph::empty(5);
        g1.add(1, 3, 3).unwrap();
        let mut state = TransversalSearchState::new(view, 2, g1);
        assert_eq!(state.a_layers()[0], vec![1, 2, 4, 5]);
        assert_eq!(state.b_layers()[0], vec![2, 3, 4, 5]);
        let mut stats = ExpansionStats::default();
        let outcome = state.expand_layer(&mut stats).unwrap();
        let LayerOutcome::AugmentationFound { tail, head, color } = outcome else {
            panic!("{outcome:?}")
        };
        let next = state.apply_augmentation(tail, head, color).unwrap();
        assert_eq!(next.arc_count(), 2);
        next.check(&view, 2).unwrap();
    }

    #[test]
    fn deeper_augmentations_replay() {
        let mut deepest = 0;
        for s in 0..40 {
            let sq = random_square(12, Seed(s));
            let r = solve(
                &sq,
                3,
                TransversalOptions {
                    check_invariants: true,
                },
            )
            .unwrap();
            assert!(validate_transversal(&sq, &r.transversal, ForbiddenCycles::UpTo(3)).is_ok());
            assert_eq!(r.stats.path_count_exceeded, 0);
            deepest = deepest.max(r.stats.deepest_layer);
        }
        assert!(deepest >= 2);
    }

    #[test]
    fn output_matches_digraph() {
        let sq = random_square(10, Seed(3));
        let r = build_short_cycle_free_transversal(&sq, 3).unwrap();
        let l = LinearDigraph::from_transversal(10, &r.transversal).unwrap();
        l.check(&sq.to_digraph_factorization(), 3).unwrap();
        assert_eq!(l.to_transversal().sorted(), r.transversal);
    }
}
