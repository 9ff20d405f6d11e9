//! Properly edge-colored simple graphs and rainbow matchings.
//!
//! Vertices are 1-based (`1..=vertex_count`) everywhere, so that the
//! bipartite view of a Latin square can use rows `1..=n` and columns
//! `n+1..=2n` directly. Colors are opaque integers.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;
pub type Color = u32;

/// An undirected colored edge. [`Edge::new`] stores the smaller endpoint in `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub color: Color,
}

impl Edge {
    pub fn new(a: Vertex, b: Vertex, color: Color) -> Self {
        Edge {
            u: a.min(b),
            v: a.max(b),
            color,
        }
    }

    pub fn touches(&self, x: Vertex) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint that is not `x`. `x` must be an endpoint.
    pub fn other(&self, x: Vertex) -> Vertex {
        debug_assert!(self.touches(x));
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn endpoints(&self) -> [Vertex; 2] {
        [self.u, self.v]
    }

    pub fn shares_vertex(&self, other: &Edge) -> bool {
        self.touches(other.u) || self.touches(other.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}:{}", self.u, self.v, self.color)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a graph needs at least one vertex")]
    NoVertices,
    #[error("vertex {vertex} is outside 1..={vertex_count}")]
    VertexOutOfRange { vertex: Vertex, vertex_count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {u}-{v}")]
    DuplicateEdge { u: Vertex, v: Vertex },
    #[error("improper coloring: color {color} appears twice at vertex {vertex}")]
    ImproperColoring { vertex: Vertex, color: Color },
}

/// A finite simple graph with a proper edge coloring. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    // Index 0 is unused. Sorted by neighbor.
    adjacency: Vec<Vec<(Vertex, Color)>>,
    // Index 0 is unused. Sorted by color.
    by_color: Vec<Vec<(Color, Vertex)>>,
}

impl ColoredGraph {
    /// Builds and validates a graph from `(u, v, color)` triples.
    pub fn new(
        vertex_count: usize,
        edge_list: impl IntoIterator<Item = (Vertex, Vertex, Color)>,
    ) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut adjacency = vec![Vec::new(); vertex_count + 1];
        let mut by_color: Vec<HashMap<Color, Vertex>> = vec![HashMap::new(); vertex_count + 1];
        let mut edges = Vec::new();
        for (a, b, color) in edge_list {
            for x in [a, b] {
                if x == 0 || x > vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: x,
                        vertex_count,
                    });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let edge = Edge::new(a, b, color);
            if adjacency[edge.u].iter().any(|&(w, _)| w == edge.v) {
                return Err(GraphError::DuplicateEdge {
                    u: edge.u,
                    v: edge.v,
                });
            }
            for x in [a, b] {
                if by_color[x].insert(color, edge.other(x)).is_some() {
                    return Err(GraphError::ImproperColoring { vertex: x, color });
                }
            }
            adjacency[edge.u].push((edge.v, color));
            adjacency[edge.v].push((edge.u, color));
            edges.push(edge);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        edges.sort_unstable_by_key(|e| (e.u, e.v));
        let by_color = by_color
            .into_iter()
            .map(|m| {
                let mut list: Vec<_> = m.into_iter().collect();
                list.sort_unstable();
                list
            })
            .collect();
        Ok(ColoredGraph {
            vertex_count,
            edges,
            adjacency,
            by_color,
        })
    }

    /// Edgeless graph on `vertex_count` vertices.
    pub fn empty(vertex_count: usize) -> Result<Self, GraphError> {
        Self::new(vertex_count, std::iter::empty())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        1..=self.vertex_count
    }

    /// All edges, sorted by `(u, v)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(neighbor, color)` pairs, sorted by neighbor.
    pub fn neighbors(&self, v: Vertex) -> &[(Vertex, Color)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len()
    }

    /// Minimum vertex degree, δ(G).
    pub fn min_degree(&self) -> usize {
        self.vertices().map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn color_between(&self, a: Vertex, b: Vertex) -> Option<Color> {
        if a == 0 || a > self.vertex_count {
            return None;
        }
        let list = &self.adjacency[a];
        list.binary_search_by_key(&b, |&(w, _)| w)
            .ok()
            .map(|i| list[i].1)
    }

    /// The neighbor of `v` along its `color` edge, if any.
    pub fn neighbor_by_color(&self, v: Vertex, color: Color) -> Option<Vertex> {
        let list = &self.by_color[v];
        list.binary_search_by_key(&color, |&(c, _)| c)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.color_between(edge.u, edge.v) == Some(edge.color)
    }

    /// The palette actually used by the edges.
    pub fn colors(&self) -> BTreeSet<Color> {
        self.edges.iter().map(|e| e.color).collect()
    }

    /// Re-checks the proper-coloring and simplicity invariants from scratch.
    pub fn check_proper(&self) -> Result<(), GraphError> {
        for v in self.vertices() {
            let mut seen = BTreeSet::new();
            for &(w, c) in &self.adjacency[v] {
                if w == v {
                    return Err(GraphError::SelfLoop(v));
                }
                if !seen.insert(c) {
                    return Err(GraphError::ImproperColoring {
                        vertex: v,
                        color: c,
                    });
                }
            }
            for pair in self.adjacency[v].windows(2) {
                if pair[0].0 == pair[1].0 {
                    return Err(GraphError::DuplicateEdge {
                        u: v.min(pair[0].0),
                        v: v.max(pair[0].0),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A list of edges intended to form a rainbow matching. The invariants are
/// certified against a host graph by [`validate_rainbow_matching`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RainbowMatching {
    edges: Vec<Edge>,
}

impl RainbowMatching {
    pub fn new(edges: Vec<Edge>) -> Self {
        RainbowMatching { edges }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<Edge> {
        self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn push(&mut self, edge: Edge) {
        self.edges.push(edge);
    }

    pub fn colors(&self) -> BTreeSet<Color> {
        self.edges.iter().map(|e| e.color).collect()
    }

    /// Sorts edges by `(u, v)` for stable output.
    pub fn sorted(mut self) -> Self {
        self.edges.sort_unstable_by_key(|e| (e.u, e.v));
        self
    }
}

impl FromIterator<Edge> for RainbowMatching {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        RainbowMatching::new(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingViolation {
    #[error("{edge} is not an edge of the graph")]
    NotAnEdge { edge: Edge },
    #[error("{edge} has color {actual} in the graph")]
    WrongColor { edge: Edge, actual: Color },
    #[error("{first} and {second} share vertex {vertex}")]
    SharedVertex {
        vertex: Vertex,
        first: Edge,
        second: Edge,
    },
    #[error("{first} and {second} repeat color {color}")]
    RepeatedColor {
        color: Color,
        first: Edge,
        second: Edge,
    },
}

/// Checks that `m` is a rainbow matching of `g`, reporting the first
/// violation in edge order.
pub fn validate_rainbow_matching(
    g: &ColoredGraph,
    m: &RainbowMatching,
) -> Result<(), MatchingViolation> {
    let mut vertex_owner: HashMap<Vertex, Edge> = HashMap::new();
    let mut color_owner: HashMap<Color, Edge> = HashMap::new();
    for &raw in m.edges() {
        let edge = Edge::new(raw.u, raw.v, raw.color);
        match g.color_between(edge.u, edge.v) {
            None => return Err(MatchingViolation::NotAnEdge { edge }),
            Some(actual) if actual != edge.color => {
                return Err(MatchingViolation::WrongColor { edge, actual })
            }
            Some(_) => {}
        }
        for x in edge.endpoints() {
            if let Some(&first) = vertex_owner.get(&x) {
                return Err(MatchingViolation::SharedVertex {
                    vertex: x,
                    first,
                    second: edge,
                });
            }
        }
        if let Some(&first) = color_owner.get(&edge.color) {
            return Err(MatchingViolation::RepeatedColor {
                color: edge.color,
                first,
                second: edge,
            });
        }
        vertex_owner.insert(edge.u, edge);
        vertex_owner.insert(edge.v, edge);
        color_owner.insert(edge.color, edge);
    }
    Ok(())
}

/// Vertices not covered by `m`, ascending.
pub fn free_vertices(g: &ColoredGraph, m: &RainbowMatching) -> Vec<Vertex> {
    let mut covered = vec![false; g.vertex_count() + 1];
    for e in m.edges() {
        covered[e.u] = true;
        covered[e.v] = true;
    }
    g.vertices().filter(|&v| !covered[v]).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
}

pub(crate) fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub(crate) fn parse_fields<const N: usize>(
    line: usize,
    text: &str,
) -> Result<[u64; N], FormatError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != N {
        return Err(syntax(
            line,
            format!("expected {N} fields, found {}", fields.len()),
        ));
    }
    let mut out = [0u64; N];
    for (slot, field) in out.iter_mut().zip(&fields) {
        *slot = field
            .parse()
            .map_err(|_| syntax(line, format!("`{field}` is not a non-negative integer")))?;
    }
    Ok(out)
}

pub(crate) fn parse_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    keyword: &str,
) -> Result<(usize, Vec<u64>), FormatError> {
    let (line, text) = lines
        .next()
        .ok_or_else(|| syntax(1, format!("missing `{keyword}` header")))?;
    let mut fields = text.split_whitespace();
    if fields.next() != Some(keyword) {
        return Err(syntax(line, format!("expected `{keyword}` header")));
    }
    let values = fields
        .map(|f| {
            f.parse()
                .map_err(|_| syntax(line, format!("`{f}` is not a non-negative integer")))
        })
        .collect::<Result<Vec<u64>, _>>()?;
    Ok((line, values))
}

/// Parses the `graph <V> <E>` text format.
pub fn parse_graph(text: &str) -> Result<ColoredGraph, FormatError> {
    let mut lines = content_lines(text);
    let (header_line, header) = parse_header(&mut lines, "graph")?;
    let [vertex_count, edge_count] = header[..] else {
        return Err(syntax(header_line, "expected `graph <V> <E>`"));
    };
    let vertex_count = vertex_count as usize;
    if vertex_count == 0 {
        return Err(FormatError::Graph {
            line: header_line,
            source: GraphError::NoVertices,
        });
    }
    let mut triples = Vec::new();
    let mut line_of = Vec::new();
    for (line, text) in lines {
        let [u, v, c] = parse_fields::<3>(line, text)?;
        let c = Color::try_from(c).map_err(|_| syntax(line, "color id too large"))?;
        triples.push((u as usize, v as usize, c));
        line_of.push(line);
    }
    if triples.len() as u64 != edge_count {
        return Err(syntax(
            header_line,
            format!(
                "header declares {edge_count} edges, found {}",
                triples.len()
            ),
        ));
    }
    ColoredGraph::new(vertex_count, triples.iter().copied()).map_err(|source| {
        let line = first_failing_line(vertex_count, &triples, &line_of);
        FormatError::Graph { line, source }
    })
}

fn first_failing_line(
    vertex_count: usize,
    triples: &[(Vertex, Vertex, Color)],
    lines: &[usize],
) -> usize {
    // Binary search for the shortest failing prefix.
    let (mut lo, mut hi) = (1, triples.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if ColoredGraph::new(vertex_count, triples[..mid].iter().copied()).is_err() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lines[lo - 1]
}

pub fn write_graph(g: &ColoredGraph) -> String {
    let mut out = format!("graph {} {}\n", g.vertex_count(), g.edge_count());
    for e in g.edges() {
        out.push_str(&format!("{} {} {}\n", e.u, e.v, e.color));
    }
    out
}

/// Parses a `matching <M>` certificate followed by `u v c` lines.
pub fn parse_matching(text: &str) -> Result<RainbowMatching, FormatError> {
    let mut lines = content_lines(text);
    let (header_line, header) = parse_header(&mut lines, "matching")?;
    let [size] = header[..] else {
        return Err(syntax(header_line, "expected `matching <M>`"));
    };
    let mut edges = Vec::new();
    for (line, text) in lines {
        let [u, v, c] = parse_fields::<3>(line, text)?;
        let c = Color::try_from(c).map_err(|_| syntax(line, "color id too large"))?;
        edges.push(Edge::new(u as usize, v as usize, c));
    }
    if edges.len() as u64 != size {
        return Err(syntax(
            header_line,
            format!("header declares {size} edges, found {}", edges.len()),
        ));
    }
    Ok(RainbowMatching::new(edges))
}

pub fn write_matching(m: &RainbowMatching) -> String {
    let mut out = format!("matching {}\n", m.len());
    for e in m.edges() {
        out.push_str(&format!("{} {} {}\n", e.u, e.v, e.color));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn c4() -> ColoredGraph {
        ColoredGraph::new(4, [(1, 2, 0), (2, 3, 1), (3, 4, 0), (4, 1, 1)]).unwrap()
    }

    #[test]
    fn builds_c4() {
        let g = c4();
        assert_eq!(g.min_degree(), 2);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.color_between(4, 1), Some(1));
        assert_eq!(g.neighbor_by_color(3, 0), Some(4));
    }

    #[test]
    fn single_edge() {
        let g = ColoredGraph::new(2, [(1, 2, 7)]).unwrap();
        assert_eq!(g.min_degree(), 1);
        let g = ColoredGraph::new(3, [(1, 2, 7)]).unwrap();
        assert_eq!(g.min_degree(), 0);
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(
            ColoredGraph::new(3, [(1, 2, 0), (2, 3, 0)]),
            Err(GraphError::ImproperColoring {
                vertex: 2,
                color: 0
            })
        );
        assert_eq!(
            ColoredGraph::new(3, [(1, 2, 0), (2, 1, 1)]),
            Err(GraphError::DuplicateEdge { u: 1, v: 2 })
        );
        assert_eq!(
            ColoredGraph::new(3, [(2, 2, 0)]),
            Err(GraphError::SelfLoop(2))
        );
        assert!(matches!(
            ColoredGraph::new(3, [(1, 4, 0)]),
            Err(GraphError::VertexOutOfRange { vertex: 4, .. })
        ));
        assert_eq!(ColoredGraph::new(0, []), Err(GraphError::NoVertices));
    }

    #[test]
    fn validates_matchings() {
        let g = c4();
        let ok = RainbowMatching::new(vec![Edge::new(1, 2, 0)]);
        assert_eq!(validate_rainbow_matching(&g, &ok), Ok(()));

        let repeated = RainbowMatching::new(vec![Edge::new(1, 2, 0), Edge::new(3, 4, 0)]);
        assert!(matches!(
            validate_rainbow_matching(&g, &repeated),
            Err(MatchingViolation::RepeatedColor { color: 0, .. })
        ));

        let shared = RainbowMatching::new(vec![Edge::new(1, 2, 0), Edge::new(2, 3, 1)]);
        assert!(matches!(
            validate_rainbow_matching(&g, &shared),
            Err(MatchingViolation::SharedVertex { vertex: 2, .. })
        ));

        let absent = RainbowMatching::new(vec![Edge::new(1, 3, 0)]);
        assert!(matches!(
            validate_rainbow_matching(&g, &absent),
            Err(MatchingViolation::NotAnEdge { .. })
        ));
        let recolored = RainbowMatching::new(vec![Edge::new(1, 2, 1)]);
        assert!(matches!(
            validate_rainbow_matching(&g, &recolored),
            Err(MatchingViolation::WrongColor { actual: 0, .. })
        ));
    }

    #[test]
    fn free_vertices_of_c4() {
        let g = c4();
        assert_eq!(
            free_vertices(&g, &RainbowMatching::default()),
            vec![1, 2, 3, 4]
        );
        let m = RainbowMatching::new(vec![Edge::new(1, 2, 0)]);
        assert_eq!(free_vertices(&g, &m), vec![3, 4]);
    }

    #[test]
    fn graph_text_round_trip() {
        let g = c4();
        let text = write_graph(&g);
        assert_eq!(parse_graph(&text).unwrap(), g);
        let with_comments = "# a comment\ngraph 2 1\n\n# edge\n1 2 5\n";
        assert_eq!(parse_graph(with_comments).unwrap().edge_count(), 1);
    }

    #[test]
    fn parser_reports_lines() {
        let err = parse_graph("graph 3 2\n1 2 0\n2 3 0\n").unwrap_err();
        assert_eq!(
            err,
            FormatError::Graph {
                line: 3,
                source: GraphError::ImproperColoring {
                    vertex: 2,
                    color: 0
                }
            }
        );
        let err = parse_graph("graph 3 2\n1 2 0\n# dup\n2 1 1\n").unwrap_err();
        assert!(matches!(
            err,
            FormatError::Graph {
                line: 4,
                source: GraphError::DuplicateEdge { .. }
            }
        ));
        assert!(matches!(
            parse_graph("graph 3 2\n1 2 0\n"),
            Err(FormatError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_graph("graph 3 1\n1 x 0\n"),
            Err(FormatError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn matching_certificate_round_trip() {
        let m = RainbowMatching::new(vec![Edge::new(1, 2, 0), Edge::new(3, 4, 9)]);
        assert_eq!(parse_matching(&write_matching(&m)).unwrap(), m);
    }
}
