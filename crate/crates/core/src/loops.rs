use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Edge, Shading, VertexId};

/// A closed walk with a marked starting point; level-0 loops are bare vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Loop {
    base: VertexId,
    edges: Vec<Edge>,
}

impl Loop {
    pub(crate) fn from_parts(base: VertexId, edges: Vec<Edge>) -> Loop {
        Loop { base, edges }
    }

    pub fn vertex(v: VertexId) -> Loop {
        Loop { base: v, edges: Vec::new() }
    }

    pub fn new(g: &BipartiteGraph, edges: Vec<Edge>) -> Result<Loop> {
        if edges.is_empty() {
            return Err(Error::Loop("an edge loop needs at least one edge; use Loop::vertex".into()));
        }
        if !edges.len().is_multiple_of(2) {
            return Err(Error::Loop(format!("odd length {}", edges.len())));
        }
        for w in edges.windows(2) {
            if g.target(w[0]) != g.source(w[1]) {
                return Err(Error::Loop(format!(
                    "`{}` does not compose with `{}`",
                    g.edge_name(w[0]),
                    g.edge_name(w[1])
                )));
            }
        }
        let base = g.source(edges[0]);
        if g.target(*edges.last().unwrap()) != base {
            return Err(Error::Loop("walk is not closed".into()));
        }
        Ok(Loop { base, edges })
    }

    /// Whitespace-separated edge tokens, or a single vertex name for level 0.
    pub fn parse(g: &BipartiteGraph, text: &str) -> Result<Loop> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() == 1 && g.edge_id(tokens[0]).is_err() {
            if let Ok(v) = g.vertex_id(tokens[0]) {
                return Ok(Loop::vertex(v));
            }
        }
        let edges = tokens.iter().map(|t| g.edge_id(t)).collect::<Result<Vec<_>>>()?;
        Loop::new(g, edges)
    }

    pub fn display(&self, g: &BipartiteGraph) -> String {
        if self.edges.is_empty() {
            return g.vertex(self.base).name.clone();
        }
        self.edges.iter().map(|&e| g.edge_name(e)).collect::<Vec<_>>().join(" ")
    }

    pub fn base(&self) -> VertexId {
        self.base
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn level(&self) -> usize {
        self.edges.len() / 2
    }

    pub fn shading(&self, g: &BipartiteGraph) -> Shading {
        g.parity(self.base)
    }

    /// The walk read backwards with every edge reversed; the base is unchanged.
    pub fn reversed(&self) -> Loop {
        Loop {
            base: self.base,
            edges: self.edges.iter().rev().map(|&e| BipartiteGraph::opposite(e)).collect(),
        }
    }

    pub fn concat(&self, other: &Loop) -> Option<Loop> {
        if self.base != other.base {
            return None;
        }
        let mut edges = Vec::with_capacity(self.edges.len() + other.edges.len());
        edges.extend_from_slice(&self.edges);
        edges.extend_from_slice(&other.edges);
        Some(Loop { base: self.base, edges })
    }

    /// Moves the first two edges to the end.
    pub fn shifted(&self, g: &BipartiteGraph) -> Loop {
        if self.edges.len() < 2 {
            return self.clone();
        }
        let mut edges = self.edges[2..].to_vec();
        edges.extend_from_slice(&self.edges[..2]);
        Loop { base: g.target(self.edges[1]), edges }
    }
}
