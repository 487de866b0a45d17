//! Center-valued traces, vertex states, inner products and Gram diagnostics.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::algebra::{tl_element, wedge};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Edge, Shading, VertexId, WeightedGraph};
use crate::loops::Loop;
use crate::nc::{catalan, free_generator_counts, noncrossing_pairings};
use crate::par::{map_slice, ExecMode};

pub const PSD_FLOOR: f64 = -1e-8;
pub const FAITHFUL_FLOOR: f64 = 1e-10;
pub const RANK_TOL: f64 = 1e-8;

/// A function on vertices, one slot per vertex of the graph.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterValue {
    pub values: Vec<f64>,
}

#[derive(Serialize)]
struct VertexValue<'a> {
    vertex: &'a str,
    value: f64,
}

impl CenterValue {
    pub fn zero(n: usize) -> CenterValue {
        CenterValue { values: vec![0.0; n] }
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.values[v]
    }

    pub fn max_abs_diff(&self, other: &CenterValue) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> CenterValue {
        CenterValue { values: self.values.iter().map(|x| x * s).collect() }
    }

    /// `[{"vertex": name, "value": x}, ...]` over the given vertices.
    pub fn to_json(&self, g: &BipartiteGraph, vertices: &[VertexId]) -> String {
        let rows: Vec<VertexValue> =
            vertices.iter().map(|&v| VertexValue { vertex: &g.vertex(v).name, value: self.values[v] }).collect();
        serde_json::to_string(&rows).expect("values serialize")
    }
}

/// Sum over non-crossing pairings of the word, each pair contributing the earlier edge's weight.
pub fn closure_weight(wg: &WeightedGraph, word: &[Edge]) -> f64 {
    let n = word.len();
    if n % 2 == 1 {
        return 0.0;
    }
    // dp[i][j]: pairing sum of word[i..j].
    let mut dp = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..=n {
        dp[i][i] = 1.0;
    }
    for len in (2..=n).step_by(2) {
        for i in 0..=n - len {
            let j = i + len;
            let opp = BipartiteGraph::opposite(word[i]);
            let mut s = 0.0;
            for q in (i + 1..j).step_by(2) {
                if word[q] == opp {
                    s += dp[i + 1][q] * dp[q + 1][j];
                }
            }
            dp[i][j] = s * wg.sigma(word[i]);
        }
    }
    dp[0][n]
}

/// Value of the level-`k` trace on a single loop, supported at its base.
pub fn trace_loop(wg: &WeightedGraph, k: usize, x: &Loop) -> Result<f64> {
    if x.level() < k {
        return Err(Error::Level { level: x.level(), needed: k });
    }
    let ed = x.edges();
    let n = ed.len();
    let mut w = 1.0;
    for j in 0..k {
        if ed[n - 1 - j] != BipartiteGraph::opposite(ed[j]) {
            return Ok(0.0);
        }
        w *= wg.sigma(ed[j]);
    }
    Ok(w * closure_weight(wg, &ed[k..n - k]))
}

pub fn trace_k(wg: &WeightedGraph, k: usize, x: &Element) -> Result<CenterValue> {
    trace_k_with(wg, k, x, ExecMode::Sequential)
}

pub fn trace_k_with(wg: &WeightedGraph, k: usize, x: &Element, mode: ExecMode) -> Result<CenterValue> {
    if x.level() < k {
        return Err(Error::Level { level: x.level(), needed: k });
    }
    let terms: Vec<(&Loop, f64)> = x.iter().collect();
    let vals = map_slice(mode, &terms, |(l, c)| c * trace_loop(wg, k, l).expect("level checked"));
    let mut out = CenterValue::zero(wg.graph.n_vertices());
    for ((l, _), v) in terms.iter().zip(vals) {
        out.values[l.base()] += v;
    }
    Ok(out)
}

/// Closed form of the trace on a level-`k` element read as top and bottom paths.
pub fn usual_trace(wg: &WeightedGraph, x: &Element) -> CenterValue {
    let mut out = CenterValue::zero(wg.graph.n_vertices());
    let k = x.level();
    for (l, c) in x.iter() {
        let ed = l.edges();
        let mut w = 1.0;
        for j in 0..k {
            if ed[2 * k - 1 - j] != BipartiteGraph::opposite(ed[j]) {
                w = 0.0;
                break;
            }
            w *= wg.sigma(ed[j]);
        }
        out.values[l.base()] += c * w;
    }
    out
}

/// `sum_v mu(v)^2 Tr_k(x)(v)`, the scalar trace compatible with the tower maps.
pub fn scalar_trace(wg: &WeightedGraph, k: usize, x: &Element) -> Result<f64> {
    let t = trace_k(wg, k, x)?;
    Ok(t.values.iter().enumerate().map(|(v, y)| wg.mu(v).powi(2) * y).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiMethod {
    Pairing,
    Recursive,
}

pub fn phi_vertex(wg: &WeightedGraph, x: &Element, v: VertexId, method: PhiMethod) -> Result<f64> {
    if wg.graph.parity(v) != x.shading() {
        return Err(Error::Shading);
    }
    let mut s = 0.0;
    for (l, c) in x.iter() {
        let val = match method {
            PhiMethod::Pairing => phi_loop_pairing(wg, l, v),
            PhiMethod::Recursive => phi_loop_recursive(wg, l, v),
        };
        s += c * val;
    }
    Ok(s)
}

/// Explicit sum over every non-crossing pairing of the loop's edges.
pub fn phi_loop_pairing(wg: &WeightedGraph, x: &Loop, v: VertexId) -> f64 {
    if x.base() != v {
        return 0.0;
    }
    let ed = x.edges();
    let pairings = noncrossing_pairings(ed.len()).expect("loop length within range");
    pairings
        .iter()
        .map(|p| {
            p.pairs()
                .iter()
                .map(|&(i, j)| if ed[j] == BipartiteGraph::opposite(ed[i]) { wg.sigma(ed[i]) } else { 0.0 })
                .product::<f64>()
        })
        .sum()
}

/// First-edge decomposition `x = e x1 e' x2`.
pub fn phi_loop_recursive(wg: &WeightedGraph, x: &Loop, v: VertexId) -> f64 {
    if x.base() != v {
        return 0.0;
    }
    phi_word(wg, v, x.edges())
}

fn phi_word(wg: &WeightedGraph, v: VertexId, w: &[Edge]) -> f64 {
    if w.is_empty() {
        return 1.0;
    }
    if wg.source(w[0]) != v {
        return 0.0;
    }
    let e = w[0];
    let opp = BipartiteGraph::opposite(e);
    let mut s = 0.0;
    for q in (1..w.len()).step_by(2) {
        if w[q] == opp {
            s += wg.sigma(e) * phi_word(wg, wg.target(e), &w[1..q]) * phi_word(wg, v, &w[q + 1..]);
        }
    }
    s
}

/// Bilinear pairing: a loop pairs only with its reversal, with weight the product of its edge weights.
pub fn pairing(wg: &WeightedGraph, a: &Element, b: &Element) -> Result<CenterValue> {
    if a.level() != b.level() {
        return Err(Error::Level { level: b.level(), needed: a.level() });
    }
    let mut out = CenterValue::zero(wg.graph.n_vertices());
    for (x, ca) in a.iter() {
        let y = x.reversed();
        let cb = b.coeff(&y);
        if cb != 0.0 {
            let w: f64 = x.edges().iter().map(|&e| wg.sigma(e)).product();
            out.values[x.base()] += ca * cb * w;
        }
    }
    Ok(out)
}

/// Center-valued inner product `<a, b> = pairing(a*, b)`.
pub fn inner_product(wg: &WeightedGraph, a: &Element, b: &Element) -> Result<CenterValue> {
    pairing(wg, &crate::algebra::involution(0, a)?, b)
}

/// `mu(v) Tr_0(x* y)(v)` over all level-`k` loops `x, y` at `v`.
pub fn gram_matrix(wg: &WeightedGraph, v: VertexId, k: usize, mode: ExecMode) -> (Vec<Loop>, DMatrix<f64>) {
    let loops = wg.graph.loops_at(v, k);
    let n = loops.len();
    let rows = map_slice(mode, &loops, |x| {
        let xr = x.reversed();
        loops
            .iter()
            .map(|y| {
                let mut word = xr.edges().to_vec();
                word.extend_from_slice(y.edges());
                wg.mu(v) * closure_weight(wg, &word)
            })
            .collect::<Vec<f64>>()
    });
    let mut m = DMatrix::zeros(n, n);
    for (i, r) in rows.into_iter().enumerate() {
        for (j, x) in r.into_iter().enumerate() {
            m[(i, j)] = x;
        }
    }
    (loops, m)
}

pub fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    if m.nrows() == 0 {
        return (f64::INFINITY, f64::NEG_INFINITY);
    }
    let sym = (m + m.transpose()) * 0.5;
    let ev = SymmetricEigen::new(sym).eigenvalues;
    (ev.min(), ev.max())
}

#[derive(Clone, Debug, Serialize)]
pub struct GramRow {
    pub vertex: String,
    pub level: usize,
    pub dim: usize,
    pub min_eig: f64,
    pub max_eig: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub rows: Vec<GramRow>,
    pub pass: bool,
}

/// Positivity, and faithfulness when the loop parameter exceeds one.
pub fn gram_psd_check(wg: &WeightedGraph, k: usize, shading: Shading, mode: ExecMode) -> GramReport {
    let strict = wg.delta() > 1.0 + 1e-12;
    let mut rows = Vec::new();
    for v in wg.graph.vertices_of(shading) {
        let (loops, m) = gram_matrix(wg, v, k, mode);
        let (lo, hi) = eigen_range(&m);
        let pass = loops.is_empty() || (lo >= PSD_FLOOR && (!strict || lo > FAITHFUL_FLOOR));
        rows.push(GramRow { vertex: wg.name(v).to_string(), level: k, dim: loops.len(), min_eig: lo, max_eig: hi, pass });
    }
    let pass = rows.iter().all(|r| r.pass);
    GramReport { rows, pass }
}

/// Numerical rank relative to the largest eigenvalue of a Gram matrix.
pub fn gram_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 {
        return 0;
    }
    let sym = (m + m.transpose()) * 0.5;
    let ev = SymmetricEigen::new(sym).eigenvalues;
    let top = ev.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    if top == 0.0 {
        return 0;
    }
    ev.iter().filter(|x| x.abs() > tol * top).count()
}

/// `sum_v mu(v) <a, b>(v) / sum_v mu(v)`.
pub fn weighted_scalar_product(wg: &WeightedGraph, a: &Element, b: &Element) -> f64 {
    let ip = inner_product(wg, a, b).expect("equal levels");
    let total: f64 = (0..wg.graph.n_vertices()).map(|v| wg.mu(v)).sum();
    ip.values.iter().enumerate().map(|(v, x)| wg.mu(v) * x).sum::<f64>() / total
}

fn gram_of(wg: &WeightedGraph, xs: &[Element]) -> DMatrix<f64> {
    let n = xs.len();
    DMatrix::from_fn(n, n, |i, j| weighted_scalar_product(wg, &xs[i], &xs[j]))
}

#[derive(Clone, Debug, Serialize)]
pub struct DimRow {
    pub n: usize,
    pub diagrams: usize,
    pub rank_all: usize,
    pub rank_products: usize,
    pub free_dim: usize,
    pub expected: f64,
    pub pass: bool,
}

/// Dimensions of the generator spaces of the diagram subalgebra in each degree.
pub fn free_structure_report(wg: &WeightedGraph, nmax: usize, tol: f64) -> Result<Vec<DimRow>> {
    if nmax > 6 {
        return Err(Error::Graph("degree above 6".into()));
    }
    let s = Shading::Plus;
    let expected = free_generator_counts(nmax);
    let mut by_degree: Vec<Vec<Element>> = vec![vec![crate::element::Element::unit0(&wg.graph, s)]];
    for n in 1..=nmax {
        by_degree.push(
            noncrossing_pairings(2 * n)?.iter().map(|p| tl_element(wg, p, s)).collect(),
        );
    }
    let mut rows = Vec::new();
    for n in 1..=nmax {
        let all = &by_degree[n];
        let rank_all = gram_rank(&gram_of(wg, all), tol);
        let mut products = Vec::new();
        for j in 1..n {
            for a in &by_degree[j] {
                for b in &by_degree[n - j] {
                    products.push(wedge(wg, 0, a, b)?);
                }
            }
        }
        let rank_products = gram_rank(&gram_of(wg, &products), tol);
        let free_dim = rank_all.saturating_sub(rank_products);
        let exp = expected[n - 1];
        rows.push(DimRow {
            n,
            diagrams: catalan(n) as usize,
            rank_all,
            rank_products,
            free_dim,
            expected: exp,
            pass: (free_dim as f64 - exp).abs() < 1e-9,
        });
    }
    Ok(rows)
}
