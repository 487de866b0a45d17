use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loops::Loop;

pub type VertexId = usize;
/// Oriented edge: `2 * base + 0` runs + to -, `2 * base + 1` is its opposite.
pub type Edge = u32;

pub const PF_TOL: f64 = 1e-12;
pub const PF_MAX_ITER: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Shading {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Shading {
    pub fn flip(self) -> Shading {
        match self {
            Shading::Plus => Shading::Minus,
            Shading::Minus => Shading::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Shading::Plus => '+',
            Shading::Minus => '-',
        }
    }

    pub fn parse(s: &str) -> Option<Shading> {
        match s {
            "+" => Some(Shading::Plus),
            "-" | "−" => Some(Shading::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Shading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub parity: Shading,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseEdge {
    pub name: String,
    pub from: VertexId,
    pub to: VertexId,
}

#[derive(Clone, Debug)]
pub struct BipartiteGraph {
    vertices: Vec<Vertex>,
    edges: Vec<BaseEdge>,
    out: Vec<Vec<Edge>>,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<String, u32>,
    mu_override: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct VertexDoc {
    name: String,
    parity: String,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    name: String,
    from: String,
    to: String,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<BTreeMap<String, f64>>,
}

impl BipartiteGraph {
    pub fn new(vertices: Vec<(&str, Shading)>, edges: Vec<(&str, &str, &str)>) -> Result<Self> {
        let vertices = vertices
            .into_iter()
            .map(|(n, p)| Vertex { name: n.to_string(), parity: p })
            .collect();
        let edges = edges
            .into_iter()
            .map(|(n, a, b)| (n.to_string(), a.to_string(), b.to_string()))
            .collect();
        Self::build(vertices, edges, None)
    }

    fn build(
        vertices: Vec<Vertex>,
        edge_names: Vec<(String, String, String)>,
        mu: Option<BTreeMap<String, f64>>,
    ) -> Result<Self> {
        let mut vertex_index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.name.clone(), i).is_some() {
                return Err(Error::DuplicateName(v.name.clone()));
            }
        }
        let mut edges = Vec::new();
        let mut edge_index = HashMap::new();
        for (name, a, b) in edge_names {
            if name.ends_with('\'') {
                return Err(Error::Graph(format!("edge name `{name}` may not end with an apostrophe")));
            }
            let from = *vertex_index.get(&a).ok_or_else(|| Error::UnknownVertex(a.clone()))?;
            let to = *vertex_index.get(&b).ok_or_else(|| Error::UnknownVertex(b.clone()))?;
            if vertices[from].parity == vertices[to].parity {
                return Err(Error::Parity { edge: name, parity: vertices[from].parity.symbol() });
            }
            if vertices[from].parity != Shading::Plus {
                return Err(Error::Graph(format!("edge `{name}` must run from a + vertex to a - vertex")));
            }
            if edge_index.insert(name.clone(), edges.len() as u32).is_some() {
                return Err(Error::DuplicateName(name));
            }
            edges.push(BaseEdge { name, from, to });
        }
        let mut out = vec![Vec::new(); vertices.len()];
        for (b, e) in edges.iter().enumerate() {
            out[e.from].push(2 * b as u32);
            out[e.to].push(2 * b as u32 + 1);
        }
        let mu_override = match mu {
            None => None,
            Some(m) => {
                let mut vals = vec![f64::NAN; vertices.len()];
                for (k, x) in m {
                    let i = *vertex_index.get(&k).ok_or_else(|| Error::UnknownVertex(k.clone()))?;
                    if !(x > 0.0) {
                        return Err(Error::Graph(format!("mu({k}) must be positive")));
                    }
                    vals[i] = x;
                }
                if vals.iter().any(|x| x.is_nan()) {
                    return Err(Error::Graph("mu override must list every vertex".into()));
                }
                Some(vals)
            }
        };
        let g = BipartiteGraph { vertices, edges, out, vertex_index, edge_index, mu_override };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        let mut vertices = Vec::new();
        for v in doc.vertices {
            let parity = Shading::parse(&v.parity)
                .ok_or_else(|| Error::Graph(format!("bad parity `{}` for vertex `{}`", v.parity, v.name)))?;
            vertices.push(Vertex { name: v.name, parity });
        }
        let edges = doc.edges.into_iter().map(|e| (e.name, e.from, e.to)).collect();
        Self::build(vertices, edges, doc.mu)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let doc = GraphDoc {
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexDoc { name: v.name.clone(), parity: v.parity.symbol().to_string() })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    name: e.name.clone(),
                    from: self.vertices[e.from].name.clone(),
                    to: self.vertices[e.to].name.clone(),
                })
                .collect(),
            mu: self.mu_override.as_ref().map(|m| {
                m.iter().enumerate().map(|(i, x)| (self.vertices[i].name.clone(), *x)).collect()
            }),
        };
        serde_json::to_string_pretty(&doc).expect("graph document serializes")
    }

    /// Two vertices joined by one edge.
    pub fn a2() -> Self {
        Self::new(vec![("v", Shading::Plus), ("w", Shading::Minus)], vec![("e", "v", "w")])
            .expect("valid graph")
    }

    /// Three-vertex path with the even vertex in the middle.
    pub fn a3() -> Self {
        Self::new(
            vec![("m", Shading::Plus), ("l", Shading::Minus), ("r", Shading::Minus)],
            vec![("e1", "m", "l"), ("e2", "m", "r")],
        )
        .expect("valid graph")
    }

    /// Star with an even center `c` and `n` odd leaves.
    pub fn star(n: usize) -> Self {
        let leaves: Vec<String> = (1..=n).map(|i| format!("l{i}")).collect();
        let names: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
        let mut vs = vec![("c", Shading::Plus)];
        vs.extend(leaves.iter().map(|l| (l.as_str(), Shading::Minus)));
        let es = (0..n).map(|i| (names[i].as_str(), "c", leaves[i].as_str())).collect();
        Self::new(vs, es).expect("valid graph")
    }

    /// Path on `n >= 2` vertices `v1..vn`, odd-indexed vertices even.
    pub fn path(n: usize) -> Self {
        assert!(n >= 2, "path needs at least two vertices");
        let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let enames: Vec<String> = (1..n).map(|i| format!("e{i}")).collect();
        let vs = (0..n)
            .map(|i| (names[i].as_str(), if i % 2 == 0 { Shading::Plus } else { Shading::Minus }))
            .collect();
        let es = (0..n - 1)
            .map(|i| {
                let (a, b) = if i % 2 == 0 { (i, i + 1) } else { (i + 1, i) };
                (enames[i].as_str(), names[a].as_str(), names[b].as_str())
            })
            .collect();
        Self::new(vs, es).expect("valid graph")
    }

    /// Resolves `a2`, `a3`, `s4`, `starN` and `pathN` to built-in graphs.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "a2" => Some(Self::a2()),
            "a3" => Some(Self::a3()),
            "s4" => Some(Self::star(4)),
            _ => {
                if let Some(n) = name.strip_prefix("star").and_then(|s| s.parse().ok()) {
                    if n >= 1 {
                        return Some(Self::star(n));
                    }
                }
                if let Some(n) = name.strip_prefix("path").and_then(|s| s.parse().ok()) {
                    if n >= 2 {
                        return Some(Self::path(n));
                    }
                }
                None
            }
        }
    }

    fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.out[v] {
                let w = self.target(e);
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_base_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_oriented_edges(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn base_edges(&self) -> &[BaseEdge] {
        &self.edges
    }

    pub fn parity(&self, v: VertexId) -> Shading {
        self.vertices[v].parity
    }

    pub fn vertices_of(&self, s: Shading) -> Vec<VertexId> {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].parity == s).collect()
    }

    pub fn vertex_id(&self, name: &str) -> Result<VertexId> {
        self.vertex_index.get(name).copied().ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    /// Looks up `name` or `name'` (opposite orientation).
    pub fn edge_id(&self, token: &str) -> Result<Edge> {
        let (base, opp) = match token.strip_suffix('\'') {
            Some(b) => (b, 1),
            None => (token, 0),
        };
        let b = self.edge_index.get(base).ok_or_else(|| Error::UnknownEdge(token.to_string()))?;
        Ok(2 * b + opp)
    }

    pub fn source(&self, e: Edge) -> VertexId {
        let b = &self.edges[(e >> 1) as usize];
        if e & 1 == 0 {
            b.from
        } else {
            b.to
        }
    }

    pub fn target(&self, e: Edge) -> VertexId {
        let b = &self.edges[(e >> 1) as usize];
        if e & 1 == 0 {
            b.to
        } else {
            b.from
        }
    }

    pub fn opposite(e: Edge) -> Edge {
        e ^ 1
    }

    pub fn is_positive(e: Edge) -> bool {
        e & 1 == 0
    }

    pub fn edge_name(&self, e: Edge) -> String {
        let b = &self.edges[(e >> 1) as usize];
        if e & 1 == 0 {
            b.name.clone()
        } else {
            format!("{}'", b.name)
        }
    }

    /// Oriented edges starting at `v`.
    pub fn out_edges(&self, v: VertexId) -> &[Edge] {
        &self.out[v]
    }

    pub fn all_edges(&self) -> impl Iterator<Item = Edge> {
        0..(2 * self.edges.len() as u32)
    }

    pub fn adjacency(&self) -> Vec<Vec<f64>> {
        let n = self.vertices.len();
        let mut a = vec![vec![0.0; n]; n];
        for e in &self.edges {
            a[e.from][e.to] += 1.0;
            a[e.to][e.from] += 1.0;
        }
        a
    }

    pub fn mu_override(&self) -> Option<&[f64]> {
        self.mu_override.as_deref()
    }

    /// All closed walks of length `2k` based at `v`, in lexicographic edge order.
    pub fn loops_at(&self, v: VertexId, k: usize) -> Vec<Loop> {
        let mut out = Vec::new();
        let mut stack = Vec::with_capacity(2 * k);
        self.walk(v, v, 2 * k, &mut stack, &mut out);
        out
    }

    /// All walks of length `len` starting at `v`.
    pub fn paths_from(&self, v: VertexId, len: usize) -> Vec<Vec<Edge>> {
        let mut out = Vec::new();
        let mut stack = Vec::with_capacity(len);
        self.paths_rec(v, len, &mut stack, &mut out);
        out
    }

    fn paths_rec(&self, at: VertexId, left: usize, stack: &mut Vec<Edge>, out: &mut Vec<Vec<Edge>>) {
        if left == 0 {
            out.push(stack.clone());
            return;
        }
        for &e in &self.out[at] {
            stack.push(e);
            self.paths_rec(self.target(e), left - 1, stack, out);
            stack.pop();
        }
    }

    fn walk(&self, base: VertexId, at: VertexId, left: usize, stack: &mut Vec<Edge>, out: &mut Vec<Loop>) {
        if left == 0 {
            if at == base {
                out.push(Loop::from_parts(base, stack.clone()));
            }
            return;
        }
        for &e in &self.out[at] {
            stack.push(e);
            self.walk(base, self.target(e), left - 1, stack, out);
            stack.pop();
        }
    }

    /// Loops of every level `0..=kmax` at every vertex of shading `s`.
    pub fn loops_up_to(&self, s: Shading, kmax: usize) -> Vec<Loop> {
        let mut out = Vec::new();
        for v in self.vertices_of(s) {
            for k in 0..=kmax {
                out.extend(self.loops_at(v, k));
            }
        }
        out
    }

    pub fn edge_names_unique(&self) -> bool {
        let names: HashSet<&str> = self.edges.iter().map(|e| e.name.as_str()).collect();
        names.len() == self.edges.len()
    }
}

#[derive(Clone, Debug)]
pub struct PfData {
    pub delta: f64,
    pub mu: Vec<f64>,
    pub tol: f64,
    pub iterations: usize,
}

impl PfData {
    /// `max_v |(A mu)(v) - delta mu(v)| / max_v mu(v)`.
    pub fn residual(&self, g: &BipartiteGraph) -> f64 {
        let a = g.adjacency();
        let scale = self.mu.iter().cloned().fold(0.0, f64::max);
        let mut r: f64 = 0.0;
        for (i, row) in a.iter().enumerate() {
            let am: f64 = row.iter().zip(&self.mu).map(|(x, y)| x * y).sum();
            r = r.max((am - self.delta * self.mu[i]).abs());
        }
        r / scale
    }
}

/// Power iteration on `A + I`; the shift keeps the bipartite spectrum from oscillating.
pub fn perron_frobenius(g: &BipartiteGraph, tol: f64) -> Result<PfData> {
    if !(tol > 0.0) {
        return Err(Error::Graph("tolerance must be positive".into()));
    }
    let a = g.adjacency();
    let n = a.len();
    let apply = |x: &[f64]| -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    };
    let rayleigh = |x: &[f64], ax: &[f64]| -> f64 {
        let num: f64 = x.iter().zip(ax).map(|(p, q)| p * q).sum();
        let den: f64 = x.iter().map(|p| p * p).sum();
        num / den
    };
    if let Some(mu) = g.mu_override() {
        let ax = apply(mu);
        let delta = rayleigh(mu, &ax);
        let pf = normalized(delta, mu.to_vec(), tol, 0);
        if pf.residual(g) > tol.max(1e-9) {
            return Err(Error::Graph("mu override is not a Perron-Frobenius eigenvector".into()));
        }
        return Ok(pf);
    }
    if n == 1 {
        return Ok(PfData { delta: 0.0, mu: vec![1.0], tol, iterations: 0 });
    }
    let mut x = vec![1.0; n];
    for it in 1..=PF_MAX_ITER {
        let ax = apply(&x);
        let delta = rayleigh(&x, &ax);
        let scale = x.iter().cloned().fold(0.0, f64::max);
        let res = ax.iter().zip(&x).map(|(p, q)| (p - delta * q).abs()).fold(0.0, f64::max) / scale;
        if res <= 0.25 * tol {
            return Ok(normalized(delta, x, tol, it));
        }
        let y: Vec<f64> = ax.iter().zip(&x).map(|(p, q)| p + q).collect();
        let m = y.iter().cloned().fold(0.0, f64::max);
        x = y.into_iter().map(|p| p / m).collect();
    }
    Err(Error::NoConvergence(PF_MAX_ITER))
}

fn normalized(delta: f64, x: Vec<f64>, tol: f64, iterations: usize) -> PfData {
    let m = x.iter().cloned().fold(f64::INFINITY, f64::min);
    PfData { delta, mu: x.into_iter().map(|p| p / m).collect(), tol, iterations }
}

/// A graph together with its Perron-Frobenius data and cached edge weights.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    pub graph: BipartiteGraph,
    pub pf: PfData,
    sigma: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(graph: BipartiteGraph) -> Result<Self> {
        let pf = perron_frobenius(&graph, PF_TOL)?;
        Ok(Self::with_pf(graph, pf))
    }

    pub fn with_pf(graph: BipartiteGraph, pf: PfData) -> Self {
        let sigma = graph.all_edges().map(|e| edge_weight_sigma(&graph, &pf, e)).collect();
        WeightedGraph { graph, pf, sigma }
    }

    pub fn a2() -> Self {
        Self::new(BipartiteGraph::a2()).expect("pf converges")
    }

    pub fn a3() -> Self {
        Self::new(BipartiteGraph::a3()).expect("pf converges")
    }

    pub fn s4() -> Self {
        Self::new(BipartiteGraph::star(4)).expect("pf converges")
    }

    pub fn delta(&self) -> f64 {
        self.pf.delta
    }

    pub fn mu(&self, v: VertexId) -> f64 {
        self.pf.mu[v]
    }

    pub fn sigma(&self, e: Edge) -> f64 {
        self.sigma[e as usize]
    }

    /// Overrides the edge weights; used only to check that diagnostics catch bad data.
    pub fn with_sigma_fault(&self, f: impl Fn(Edge, f64) -> f64) -> Self {
        let mut c = self.clone();
        for e in c.graph.all_edges() {
            c.sigma[e as usize] = f(e, c.sigma[e as usize]);
        }
        c
    }

    pub fn source(&self, e: Edge) -> VertexId {
        self.graph.source(e)
    }

    pub fn target(&self, e: Edge) -> VertexId {
        self.graph.target(e)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.graph.vertex(v).name
    }
}

/// `sqrt(mu(t(e)) / mu(s(e)))`.
pub fn edge_weight_sigma(g: &BipartiteGraph, pf: &PfData, e: Edge) -> f64 {
    (pf.mu[g.target(e)] / pf.mu[g.source(e)]).sqrt()
}
