//! Latin squares, their two 1-factorization views, and partial transversals.
//!
//! Rows, columns and symbols are all 1-based. A transversal cell `(i, j)`
//! corresponds to the arc `i -> j` of the digraph view, so the cycles of a
//! transversal are exactly the directed cycles of its arc set.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{content_lines, syntax, ColoredGraph, FormatError};

pub type Symbol = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Line {
    Row,
    Column,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatinError {
    #[error("a Latin square needs order at least 1")]
    Empty,
    #[error("row {row} has {found} entries, expected {expected}")]
    BadShape {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("{distinct} distinct symbols in a square of order {order}")]
    WrongAlphabet { distinct: usize, order: usize },
    #[error("symbol {symbol} repeats in {line:?} at row {row}, column {col}")]
    NotLatin {
        row: usize,
        col: usize,
        symbol: Symbol,
        line: Line,
    },
}

/// An `n x n` Latin square over the symbols `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatinSquare {
    order: usize,
    cells: Vec<Symbol>,
    // (row, symbol) -> column and (column, symbol) -> row, both 1-based.
    col_of: Vec<usize>,
    row_of: Vec<usize>,
}

impl LatinSquare {
    /// Validates rows of symbols. Any alphabet of exactly `n` distinct
    /// integers is accepted and relabeled order-preservingly onto `1..=n`.
    pub fn from_rows<R: AsRef<[Symbol]>>(rows: &[R]) -> Result<Self, LatinError> {
        let order = rows.len();
        if order == 0 {
            return Err(LatinError::Empty);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.as_ref().len() != order {
                return Err(LatinError::BadShape {
                    row: i + 1,
                    found: row.as_ref().len(),
                    expected: order,
                });
            }
        }
        let alphabet: BTreeSet<Symbol> = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        let relabel: HashMap<Symbol, Symbol> = if alphabet.len() == order {
            alphabet.iter().zip(1..).map(|(&s, t)| (s, t)).collect()
        } else if alphabet.len() < order {
            // Too few symbols: some row must repeat one, report it as such.
            alphabet.iter().map(|&s| (s, s)).collect()
        } else {
            return Err(LatinError::WrongAlphabet {
                distinct: alphabet.len(),
                order,
            });
        };

        let n = order;
        let mut cells = Vec::with_capacity(n * n);
        for row in rows {
            cells.extend(row.as_ref().iter().map(|s| relabel[s]));
        }
        let mut col_of = vec![0; n * n];
        let mut row_of = vec![0; n * n];
        let mut row_seen: Vec<HashMap<Symbol, usize>> = vec![HashMap::new(); n];
        let mut col_seen: Vec<HashMap<Symbol, usize>> = vec![HashMap::new(); n];
        for r in 0..n {
            for c in 0..n {
                let s = cells[r * n + c];
                if row_seen[r].insert(s, c).is_some() {
                    return Err(LatinError::NotLatin {
                        row: r + 1,
                        col: c + 1,
                        symbol: s,
                        line: Line::Row,
                    });
                }
                if col_seen[c].insert(s, r).is_some() {
                    return Err(LatinError::NotLatin {
                        row: r + 1,
                        col: c + 1,
                        symbol: s,
                        line: Line::Column,
                    });
                }
            }
        }
        if alphabet.len() != order {
            return Err(LatinError::WrongAlphabet {
                distinct: alphabet.len(),
                order,
            });
        }
        for r in 0..n {
            for c in 0..n {
                let s = cells[r * n + c] as usize - 1;
                col_of[r * n + s] = c + 1;
                row_of[c * n + s] = r + 1;
            }
        }
        Ok(LatinSquare {
            order,
            cells,
            col_of,
            row_of,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Symbol at `(row, col)`, both 1-based.
    pub fn get(&self, row: usize, col: usize) -> Symbol {
        self.cells[(row - 1) * self.order + (col - 1)]
    }

    pub fn row(&self, row: usize) -> &[Symbol] {
        &self.cells[(row - 1) * self.order..row * self.order]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Symbol]> {
        self.cells.chunks(self.order)
    }

    /// Column of `symbol` in `row`.
    pub fn col_of(&self, row: usize, symbol: Symbol) -> usize {
        self.col_of[(row - 1) * self.order + (symbol as usize - 1)]
    }

    /// Row of `symbol` in `col`.
    pub fn row_of(&self, col: usize, symbol: Symbol) -> usize {
        self.row_of[(col - 1) * self.order + (symbol as usize - 1)]
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        1..=self.order as Symbol
    }

    /// The 1-factorization of `K_{n,n}`: rows are vertices `1..=n`, columns
    /// are `n+1..=2n`, and edge `(i, n+j)` has color `a_ij`.
    pub fn to_bipartite_factorization(&self) -> ColoredGraph {
        let n = self.order;
        let edges = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, n + j, self.get(i, j))));
        ColoredGraph::new(2 * n, edges).expect("a Latin square always yields a proper coloring")
    }

    /// The 1-factorization of the complete digraph with loops.
    pub fn to_digraph_factorization(&self) -> DigraphView<'_> {
        DigraphView { square: self }
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        Cell {
            row,
            col,
            symbol: self.get(row, col),
        }
    }
}

impl fmt::Display for LatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_latin(self))
    }
}

/// The complete digraph on `1..=n` (with a loop at each vertex) where arc
/// `i -> j` carries color `a_ij`. Each color class is 1-regular.
#[derive(Debug, Clone, Copy)]
pub struct DigraphView<'a> {
    square: &'a LatinSquare,
}

impl DigraphView<'_> {
    pub fn vertex_count(&self) -> usize {
        self.square.order
    }

    pub fn arc_color(&self, tail: usize, head: usize) -> Symbol {
        self.square.get(tail, head)
    }

    /// The unique `color` arc leaving `tail`.
    pub fn head_of(&self, tail: usize, color: Symbol) -> usize {
        self.square.col_of(tail, color)
    }

    /// The unique `color` arc entering `head`.
    pub fn tail_of(&self, head: usize, color: Symbol) -> usize {
        self.square.row_of(head, color)
    }

    /// All arcs of one color as `(tail, head)`, by tail.
    pub fn color_class(&self, color: Symbol) -> Vec<(usize, usize)> {
        (1..=self.square.order)
            .map(|tail| (tail, self.head_of(tail, color)))
            .collect()
    }

    pub fn square(&self) -> &LatinSquare {
        self.square
    }
}

/// Parses the Latin square text format: `<n>` then `n` rows of `n` integers.
pub fn parse_latin(text: &str) -> Result<LatinSquare, LatinFormatError> {
    let mut lines = content_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| LatinFormatError::Syntax(syntax(1, "missing order line")))?;
    let order: usize = header.parse().map_err(|_| {
        LatinFormatError::Syntax(syntax(line, format!("`{header}` is not an order")))
    })?;
    let mut rows = Vec::with_capacity(order);
    for (line, text) in lines {
        let row = text
            .split_whitespace()
            .map(|f| {
                f.parse::<Symbol>()
                    .map_err(|_| syntax(line, format!("`{f}` is not a symbol")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(LatinFormatError::Syntax)?;
        if row.len() != order {
            return Err(LatinFormatError::Latin(LatinError::BadShape {
                row: rows.len() + 1,
                found: row.len(),
                expected: order,
            }));
        }
        rows.push(row);
    }
    if rows.len() != order {
        return Err(LatinFormatError::Syntax(syntax(
            line,
            format!("order {order} declared but {} rows given", rows.len()),
        )));
    }
    LatinSquare::from_rows(&rows).map_err(LatinFormatError::Latin)
}

pub fn serialize_latin(square: &LatinSquare) -> String {
    let mut out = format!("{}\n", square.order());
    for row in square.rows() {
        let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatinFormatError {
    #[error(transparent)]
    Syntax(FormatError),
    #[error(transparent)]
    Latin(LatinError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    pub symbol: Symbol,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}):{}", self.row, self.col, self.symbol)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialTransversal {
    cells: Vec<Cell>,
}

impl PartialTransversal {
    pub fn new(cells: Vec<Cell>) -> Self {
        PartialTransversal { cells }
    }

    /// Reads the symbols for `(row, col)` pairs off the square.
    pub fn from_positions(square: &LatinSquare, positions: &[(usize, usize)]) -> Self {
        PartialTransversal::new(positions.iter().map(|&(r, c)| square.cell(r, c)).collect())
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn sorted(mut self) -> Self {
        self.cells.sort_unstable();
        self
    }

    /// Splits the cells into cycles and maximal paths under the successor
    /// relation "column of this cell = row of the next cell". Rows and
    /// columns must be pairwise distinct.
    pub fn cycles(&self) -> CycleDecomposition {
        let by_row: HashMap<usize, Cell> = self.cells.iter().map(|c| (c.row, *c)).collect();
        let has_pred: BTreeSet<usize> = self
            .cells
            .iter()
            .filter(|c| by_row.contains_key(&c.col))
            .map(|c| c.col)
            .collect();
        let mut visited: BTreeSet<usize> = BTreeSet::new();
        let mut paths = Vec::new();
        let mut starts: Vec<usize> = by_row
            .keys()
            .copied()
            .filter(|r| !has_pred.contains(r))
            .collect();
        starts.sort_unstable();
        for start in starts {
            let mut path = Vec::new();
            let mut row = start;
            while let Some(cell) = by_row.get(&row) {
                if !visited.insert(row) {
                    break;
                }
                path.push(*cell);
                row = cell.col;
            }
            paths.push(path);
        }
        let mut rows: Vec<usize> = by_row.keys().copied().collect();
        rows.sort_unstable();
        let mut cycles = Vec::new();
        for start in rows {
            if visited.contains(&start) {
                continue;
            }
            let mut cycle = Vec::new();
            let mut row = start;
            while visited.insert(row) {
                let cell = by_row[&row];
                cycle.push(cell);
                row = cell.col;
            }
            cycles.push(cycle);
        }
        CycleDecomposition { cycles, paths }
    }
}

impl FromIterator<Cell> for PartialTransversal {
    fn from_iter<I: IntoIterator<Item = Cell>>(iter: I) -> Self {
        PartialTransversal::new(iter.into_iter().collect())
    }
}

/// Cycles ordered by smallest row, each starting at that row; paths ordered
/// by their first row.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleDecomposition {
    pub cycles: Vec<Vec<Cell>>,
    pub paths: Vec<Vec<Cell>>,
}

impl CycleDecomposition {
    pub fn cycle_lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }

    pub fn shortest_cycle(&self) -> Option<usize> {
        self.cycles.iter().map(Vec::len).min()
    }

    pub fn cell_count(&self) -> usize {
        self.cycles.iter().chain(&self.paths).map(Vec::len).sum()
    }
}

/// Which cycles a transversal must avoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForbiddenCycles {
    None,
    /// Cycles of length `1..=k`.
    UpTo(usize),
    All,
}

impl ForbiddenCycles {
    pub fn forbids(&self, length: usize) -> bool {
        match *self {
            ForbiddenCycles::None => false,
            ForbiddenCycles::UpTo(k) => length <= k,
            ForbiddenCycles::All => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransversalViolation {
    #[error("cell {cell} lies outside the square")]
    OutOfRange { cell: Cell },
    #[error("cell {cell} holds symbol {actual}")]
    SymbolMismatch { cell: Cell, actual: Symbol },
    #[error("row {0} used twice")]
    RepeatedRow(usize),
    #[error("column {0} used twice")]
    RepeatedColumn(usize),
    #[error("symbol {0} used twice")]
    RepeatedSymbol(Symbol),
    #[error("forbidden cycle of length {}", cells.len())]
    ForbiddenCycle { cells: Vec<Cell> },
}

/// Checks the partial-transversal invariants and, if asked, the absence of
/// forbidden cycles. Reports the first violation in cell order.
pub fn validate_transversal(
    square: &LatinSquare,
    t: &PartialTransversal,
    forbid: ForbiddenCycles,
) -> Result<(), TransversalViolation> {
    let n = square.order();
    let mut rows = BTreeSet::new();
    let mut cols = BTreeSet::new();
    let mut symbols = BTreeSet::new();
    for &cell in t.cells() {
        if cell.row == 0 || cell.row > n || cell.col == 0 || cell.col > n {
            return Err(TransversalViolation::OutOfRange { cell });
        }
        let actual = square.get(cell.row, cell.col);
        if actual != cell.symbol {
            return Err(TransversalViolation::SymbolMismatch { cell, actual });
        }
        if !rows.insert(cell.row) {
            return Err(TransversalViolation::RepeatedRow(cell.row));
        }
        if !cols.insert(cell.col) {
            return Err(TransversalViolation::RepeatedColumn(cell.col));
        }
        if !symbols.insert(cell.symbol) {
            return Err(TransversalViolation::RepeatedSymbol(cell.symbol));
        }
    }
    if forbid != ForbiddenCycles::None {
        if let Some(cycle) = t
            .cycles()
            .cycles
            .into_iter()
            .find(|c| forbid.forbids(c.len()))
        {
            return Err(TransversalViolation::ForbiddenCycle { cells: cycle });
        }
    }
    Ok(())
}

/// Parses a `transversal <T>` certificate followed by `row col symbol` lines.
pub fn parse_transversal(text: &str) -> Result<PartialTransversal, FormatError> {
    let mut lines = content_lines(text);
    let (header_line, header) = crate::graph::parse_header(&mut lines, "transversal")?;
    let [size] = header[..] else {
        return Err(syntax(header_line, "expected `transversal <T>`"));
    };
    let mut cells = Vec::new();
    for (line, text) in lines {
        let [row, col, symbol] = crate::graph::parse_fields::<3>(line, text)?;
        let symbol = Symbol::try_from(symbol).map_err(|_| syntax(line, "symbol too large"))?;
        cells.push(Cell {
            row: row as usize,
            col: col as usize,
            symbol,
        });
    }
    if cells.len() as u64 != size {
        return Err(syntax(
            header_line,
            format!("header declares {size} cells, found {}", cells.len()),
        ));
    }
    Ok(PartialTransversal::new(cells))
}

pub fn write_transversal(t: &PartialTransversal) -> String {
    let mut out = format!("transversal {}\n", t.len());
    for c in t.cells() {
        out.push_str(&format!("{} {} {}\n", c.row, c.col, c.symbol));
    }
    out
}
