//! Exhaustive solvers for small instances. Ground truth for the tests.
//!
//! Every search visits choices in a fixed lexicographic order and keeps the
//! first optimum it finds, so certificates are reproducible.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{Color, ColoredGraph, Edge, RainbowMatching};
use crate::latin::{Cell, ForbiddenCycles, LatinSquare, PartialTransversal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_edges: usize,
    pub max_order: usize,
    /// Search nodes visited before giving up.
    pub node_limit: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_edges: 24,
            max_order: 7,
            node_limit: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance exceeds the oracle budget: {0}")]
    BudgetExceeded(String),
}

struct MatchingSearch<'a> {
    edges: &'a [Edge],
    color_index: HashMap<Color, usize>,
    vertex_used: Vec<bool>,
    color_used: Vec<bool>,
    current: Vec<Edge>,
    best: Vec<Edge>,
    nodes: u64,
    node_limit: u64,
    free_vertices: usize,
    free_colors: usize,
}

impl MatchingSearch<'_> {
    fn run(&mut self, from: usize) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(OracleError::BudgetExceeded(format!(
                "more than {} search nodes",
                self.node_limit
            )));
        }
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        let remaining = self.edges.len() - from;
        let bound =
            self.current.len() + remaining.min(self.free_vertices / 2).min(self.free_colors);
        if bound <= self.best.len() {
            return Ok(());
        }
        for i in from..self.edges.len() {
            let e = self.edges[i];
            let ci = self.color_index[&e.color];
            if self.vertex_used[e.u] || self.vertex_used[e.v] || self.color_used[ci] {
                continue;
            }
            self.vertex_used[e.u] = true;
            self.vertex_used[e.v] = true;
            self.color_used[ci] = true;
            self.free_vertices -= 2;
            self.free_colors -= 1;
            self.current.push(e);
            self.run(i + 1)?;
            self.current.pop();
            self.free_vertices += 2;
            self.free_colors += 1;
            self.vertex_used[e.u] = false;
            self.vertex_used[e.v] = false;
            self.color_used[ci] = false;
            let bound = self.current.len()
                + (self.edges.len() - i - 1)
                    .min(self.free_vertices / 2)
                    .min(self.free_colors);
            if bound <= self.best.len() {
                break;
            }
        }
        Ok(())
    }
}

/// A maximum rainbow matching by depth-first search over the edges in
/// `(u, v)` order with vertex and color occupancy pruning.
pub fn max_rainbow_matching_exact(
    g: &ColoredGraph,
    budget: OracleBudget,
) -> Result<RainbowMatching, OracleError> {
    if g.edge_count() > budget.max_edges {
        return Err(OracleError::BudgetExceeded(format!(
            "{} edges > {}",
            g.edge_count(),
            budget.max_edges
        )));
    }
    let colors = g.colors();
    let color_index = colors.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut search = MatchingSearch {
        edges: g.edges(),
        color_index,
        vertex_used: vec![false; g.vertex_count() + 1],
        color_used: vec![false; colors.len()],
        current: Vec::new(),
        best: Vec::new(),
        nodes: 0,
        node_limit: budget.node_limit,
        free_vertices: g.vertex_count(),
        free_colors: colors.len(),
    };
    search.run(0)?;
    Ok(RainbowMatching::new(search.best))
}

struct TransversalSearch<'a> {
    square: &'a LatinSquare,
    forbid: ForbiddenCycles,
    // col_in_row[r] = column chosen in row r (1-based), 0 if the row is skipped
    // or not decided yet.
    col_in_row: Vec<usize>,
    col_mask: u64,
    symbol_mask: u64,
    size: usize,
    best: Vec<usize>,
    best_size: usize,
    nodes: u64,
    node_limit: u64,
}

impl TransversalSearch<'_> {
    /// Length of the cycle that choosing `(row, col)` would close, if any.
    fn closed_cycle(&self, row: usize, col: usize) -> Option<usize> {
        let mut length = 1;
        let mut at = col;
        loop {
            if at == row {
                return Some(length);
            }
            let next = self.col_in_row[at];
            if next == 0 {
                return None;
            }
            at = next;
            length += 1;
        }
    }

    fn run(&mut self, row: usize) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(OracleError::BudgetExceeded(format!(
                "more than {} search nodes",
                self.node_limit
            )));
        }
        let n = self.square.order();
        if self.size > self.best_size {
            self.best_size = self.size;
            self.best = self.col_in_row.clone();
        }
        if row > n || self.size + (n - row + 1) <= self.best_size {
            return Ok(());
        }
        for col in 1..=n {
            let symbol = self.square.get(row, col);
            let (cbit, sbit) = (1u64 << (col - 1), 1u64 << (symbol - 1));
            if self.col_mask & cbit != 0 || self.symbol_mask & sbit != 0 {
                continue;
            }
            if self.forbid != ForbiddenCycles::None {
                if let Some(length) = self.closed_cycle(row, col) {
                    if self.forbid.forbids(length) {
                        continue;
                    }
                }
            }
            self.col_in_row[row] = col;
            self.col_mask |= cbit;
            self.symbol_mask |= sbit;
            self.size += 1;
            self.run(row + 1)?;
            self.size -= 1;
            self.col_mask &= !cbit;
            self.symbol_mask &= !sbit;
            self.col_in_row[row] = 0;
            if self.best_size == n {
                return Ok(());
            }
        }
        // Leave this row out.
        self.run(row + 1)
    }
}

fn transversal_search(
    square: &LatinSquare,
    forbid: ForbiddenCycles,
    budget: OracleBudget,
) -> Result<PartialTransversal, OracleError> {
    let n = square.order();
    if n > budget.max_order || n > 64 {
        return Err(OracleError::BudgetExceeded(format!(
            "order {n} > {}",
            budget.max_order.min(64)
        )));
    }
    let mut search = TransversalSearch {
        square,
        forbid,
        col_in_row: vec![0; n + 1],
        col_mask: 0,
        symbol_mask: 0,
        size: 0,
        best: vec![0; n + 1],
        best_size: 0,
        nodes: 0,
        node_limit: budget.node_limit,
    };
    search.run(1)?;
    let cells: Vec<Cell> = (1..=n)
        .filter(|&r| search.best[r] != 0)
        .map(|r| square.cell(r, search.best[r]))
        .collect();
    Ok(PartialTransversal::new(cells))
}

/// A maximum partial transversal, by exhaustive search over one column (or
/// none) per row with column and symbol bitmasks.
pub fn max_transversal_exact(
    square: &LatinSquare,
    budget: OracleBudget,
) -> Result<PartialTransversal, OracleError> {
    transversal_search(square, ForbiddenCycles::None, budget)
}

/// A maximum partial transversal with no cycle that `forbid` rules out.
/// Each placed cell closes at most one cycle, so checking that cycle on
/// placement is exact.
pub fn max_cyclefree_transversal_exact(
    square: &LatinSquare,
    forbid: ForbiddenCycles,
    budget: OracleBudget,
) -> Result<PartialTransversal, OracleError> {
    transversal_search(square, forbid, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{
        cyclic_square, k4_factorization_pair, klein_four_square, two_colored_c4,
    };
    use crate::graph::validate_rainbow_matching;
    use crate::latin::validate_transversal;

    #[test]
    fn tight_graph_fixtures() {
        let budget = OracleBudget::default();
        let c4 = two_colored_c4();
        let m = max_rainbow_matching_exact(&c4, budget).unwrap();
        assert_eq!(m.len(), 1);
        assert!(validate_rainbow_matching(&c4, &m).is_ok());

        let pair = k4_factorization_pair();
        let m = max_rainbow_matching_exact(&pair, budget).unwrap();
        assert_eq!(m.len(), 2);
        assert!(validate_rainbow_matching(&pair, &m).is_ok());

        let empty = ColoredGraph::empty(3).unwrap();
        assert!(max_rainbow_matching_exact(&empty, budget)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn budget_is_enforced() {
        let g = cyclic_square(5).to_bipartite_factorization();
        assert!(matches!(
            max_rainbow_matching_exact(&g, OracleBudget::default()),
            Err(OracleError::BudgetExceeded(_))
        ));
        let tiny = OracleBudget {
            node_limit: 3,
            ..OracleBudget::default()
        };
        assert!(max_rainbow_matching_exact(&k4_factorization_pair(), tiny).is_err());
        assert!(max_transversal_exact(&cyclic_square(8), OracleBudget::default()).is_err());
    }

    #[test]
    fn small_transversals() {
        let budget = OracleBudget::default();
        assert_eq!(
            max_transversal_exact(&cyclic_square(1), budget)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            max_transversal_exact(&cyclic_square(2), budget)
                .unwrap()
                .len(),
            1
        );
        let z3 = cyclic_square(3);
        let t = max_transversal_exact(&z3, budget).unwrap();
        assert_eq!(t.len(), 3);
        assert!(validate_transversal(&z3, &t, ForbiddenCycles::None).is_ok());
    }

    #[test]
    fn cycle_free_witness() {
        let budget = OracleBudget::default();
        let sq = klein_four_square();
        let t = max_cyclefree_transversal_exact(&sq, ForbiddenCycles::All, budget).unwrap();
        assert_eq!(t.len(), 2);
        assert!(validate_transversal(&sq, &t, ForbiddenCycles::All).is_ok());
        assert!(t.cells().iter().all(|c| c.symbol != 1));
    }
}
