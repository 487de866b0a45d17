//! Gaussian block random matrices indexed by graph edges, and Monte Carlo trace estimates.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Edge, VertexId, WeightedGraph};
use crate::loops::Loop;
use crate::par::{map_range_init, ExecMode};
use crate::trace::phi_loop_pairing;

pub const ENTRY_CAP: usize = 20_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct BlockModelSpec {
    pub n: usize,
    pub m: usize,
    pub m_v: Vec<usize>,
    pub seed: u64,
}

impl BlockModelSpec {
    /// `M_v = max(1, round(M mu(v)))`.
    pub fn new(wg: &WeightedGraph, n: usize, m: usize, seed: u64) -> Result<BlockModelSpec> {
        if n == 0 || m == 0 {
            return Err(Error::Model("N and M must be positive".into()));
        }
        let m_v: Vec<usize> =
            (0..wg.graph.n_vertices()).map(|v| ((m as f64 * wg.mu(v)).round() as usize).max(1)).collect();
        let spec = BlockModelSpec { n, m, m_v, seed };
        let entries: usize =
            wg.graph.base_edges().iter().map(|e| spec.block_dim(e.from) * spec.block_dim(e.to)).sum();
        if entries > ENTRY_CAP {
            return Err(Error::Model(format!("{entries} matrix entries exceed the cap of {ENTRY_CAP}")));
        }
        Ok(spec)
    }

    pub fn block_dim(&self, v: VertexId) -> usize {
        self.n * self.m_v[v]
    }

    /// Normalized trace of the vertex projection, `M_v / M`.
    pub fn tr_vertex(&self, v: VertexId) -> f64 {
        self.m_v[v] as f64 / self.m as f64
    }

    /// `(mu(s) mu(t))^{-1/2} / (N M)`.
    pub fn entry_variance(&self, wg: &WeightedGraph, e: Edge) -> f64 {
        let (s, t) = (wg.source(e), wg.target(e));
        1.0 / ((wg.mu(s) * wg.mu(t)).sqrt() * (self.n * self.m) as f64)
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn adjoint(&self) -> CMat {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).conj());
            }
        }
        CMat { rows: self.cols, cols: self.rows, data }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.data.chunks_exact(self.cols).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// `self^* x`.
    pub fn adj_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.cols];
        for (row, xi) in self.data.chunks_exact(self.cols).zip(x) {
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += a.conj() * xi;
            }
        }
        y
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        let mut data = vec![Complex64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            let out = &mut data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.get(i, k);
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        CMat { rows: self.rows, cols: other.cols, data }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }
}

/// One draw of the model: a block per base edge; opposite edges use the adjoint.
#[derive(Clone, Debug)]
pub struct SampledModel {
    pub blocks: Vec<CMat>,
}

/// Generator for stream `stream` of `seed`: a Xoshiro state drawn from that ChaCha stream.
fn stream_rng(seed: u64, stream: u64) -> Xoshiro256PlusPlus {
    let mut c = ChaCha8Rng::seed_from_u64(seed);
    c.set_stream(stream);
    Xoshiro256PlusPlus::from_rng(&mut c)
}

/// Blocks from stream `index`, probes from stream `index` of a derived seed.
fn block_rng(spec: &BlockModelSpec, index: u64) -> Xoshiro256PlusPlus {
    stream_rng(spec.seed, index)
}

fn probe_rng(spec: &BlockModelSpec, index: u64) -> Xoshiro256PlusPlus {
    stream_rng(spec.seed ^ 0x9e37_79b9_7f4a_7c15, index)
}

/// Fills one block row by row, handing each finished row to `on_row`.
fn fill_block(
    wg: &WeightedGraph,
    spec: &BlockModelSpec,
    b: usize,
    rng: &mut Xoshiro256PlusPlus,
    mut data: Vec<Complex64>,
    mut on_row: impl FnMut(usize, &[Complex64]),
) -> CMat {
    let be = &wg.graph.base_edges()[b];
    let (rows, cols) = (spec.block_dim(be.from), spec.block_dim(be.to));
    let sd = (0.5 * spec.entry_variance(wg, 2 * b as Edge)).sqrt();
    data.resize(rows * cols, Complex64::new(0.0, 0.0));
    for (i, row) in data.chunks_exact_mut(cols).enumerate() {
        for x in row.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *x = Complex64::new(sd * re, sd * im);
        }
        on_row(i, row);
    }
    CMat { rows, cols, data }
}

/// Draws sample `index` from the stream `(spec.seed, index)`.
pub fn sample_model(wg: &WeightedGraph, spec: &BlockModelSpec, index: u64) -> SampledModel {
    let mut rng = block_rng(spec, index);
    let blocks = (0..wg.graph.n_base_edges()).map(|b| fill_block(wg, spec, b, &mut rng, Vec::new(), |_, _| {})).collect();
    SampledModel { blocks }
}

fn dot(row: &[Complex64], x: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (a, b) in row.iter().zip(x) {
        re += a.re * b.re - a.im * b.im;
        im += a.re * b.im + a.im * b.re;
    }
    Complex64::new(re, im)
}

/// `y += conj(row) s`.
fn axpy_conj(y: &mut [Complex64], row: &[Complex64], s: Complex64) {
    for (yj, a) in y.iter_mut().zip(row) {
        yj.re += a.re * s.re + a.im * s.im;
        yj.im += a.re * s.im - a.im * s.re;
    }
}

/// Products of one block with several vectors, and of its adjoint with several more.
struct RowWork<'a> {
    direct: Vec<(&'a [Complex64], Vec<Complex64>)>,
    adjoint: Vec<(&'a [Complex64], Vec<Complex64>)>,
}

impl<'a> RowWork<'a> {
    fn new(rows: usize, cols: usize, direct: Vec<&'a [Complex64]>, adjoint: Vec<&'a [Complex64]>) -> RowWork<'a> {
        RowWork {
            direct: direct.into_iter().map(|x| (x, vec![Complex64::new(0.0, 0.0); rows])).collect(),
            adjoint: adjoint.into_iter().map(|x| (x, vec![Complex64::new(0.0, 0.0); cols])).collect(),
        }
    }

    fn row(&mut self, i: usize, row: &[Complex64]) {
        for (x, y) in &mut self.direct {
            y[i] = dot(row, x);
        }
        for (x, y) in &mut self.adjoint {
            axpy_conj(y, row, x[i]);
        }
    }
}

/// Probe words and block inner products needed by a loop set, shared by every sample.
struct Plan {
    /// Words grouped by length; each acts on the probe at its end vertex.
    by_len: Vec<Vec<Vec<Edge>>>,
    /// Block pairs `(p, q)`, `p <= q`, whose entrywise inner product is needed.
    pairs: Vec<(usize, usize)>,
}

fn left_star(ed: &[Edge]) -> Vec<Edge> {
    ed.iter().rev().map(|&e| BipartiteGraph::opposite(e)).collect()
}

impl Plan {
    fn new(loops: &[Loop]) -> Plan {
        let mut words: Vec<Vec<Edge>> = Vec::new();
        let mut pairs = Vec::new();
        for w in loops {
            let ed = w.edges();
            match ed.len() {
                0 => {}
                2 => {
                    let (p, q) = ((ed[0] >> 1) as usize, (ed[1] >> 1) as usize);
                    pairs.push((p.min(q), p.max(q)));
                }
                n => {
                    let h = n / 2;
                    for half in [ed[h..].to_vec(), left_star(&ed[..h])] {
                        for s in 0..half.len() {
                            words.push(half[s..].to_vec());
                        }
                    }
                }
            }
        }
        words.sort();
        words.dedup();
        pairs.sort();
        pairs.dedup();
        let maxlen = words.iter().map(Vec::len).max().unwrap_or(0);
        let mut by_len = vec![Vec::new(); maxlen + 1];
        for w in words {
            by_len[w.len()].push(w);
        }
        Plan { by_len, pairs }
    }
}

/// One sample of `tr(d_v X_w)` for every loop: exact for two edges, otherwise an unbiased Gaussian probe.
fn sample_values(
    wg: &WeightedGraph,
    spec: &BlockModelSpec,
    plan: &Plan,
    loops: &[Loop],
    index: u64,
    spare: &mut Vec<Vec<Complex64>>,
) -> Vec<f64> {
    let g = &wg.graph;
    let nb = g.n_base_edges();
    let norm = (spec.n * spec.m) as f64;
    let mut prng = probe_rng(spec, index);
    let probes: Vec<Vec<Complex64>> = (0..g.n_vertices())
        .map(|v| {
            (0..spec.block_dim(v))
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut prng);
                    let im: f64 = StandardNormal.sample(&mut prng);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect()
        })
        .collect();
    let input = |values: &HashMap<Vec<Edge>, Vec<Complex64>>, w: &[Edge]| -> Vec<Complex64> {
        if w.len() == 1 {
            probes[g.target(w[0])].clone()
        } else {
            values[&w[1..]].clone()
        }
    };
    let split = |ws: &[Vec<Edge>], b: usize| -> (Vec<Vec<Edge>>, Vec<Vec<Edge>>) {
        ws.iter().filter(|w| (w[0] >> 1) as usize == b).cloned().partition(|w| BipartiteGraph::is_positive(w[0]))
    };
    let mut values: HashMap<Vec<Edge>, Vec<Complex64>> = HashMap::new();
    let mut inner: HashMap<(usize, usize), Complex64> = HashMap::new();
    let level1: &[Vec<Edge>] = plan.by_len.get(1).map(Vec::as_slice).unwrap_or(&[]);
    let mut rng = block_rng(spec, index);
    let mut blocks: Vec<CMat> = Vec::with_capacity(nb);
    for b in 0..nb {
        let (dw, aw) = split(level1, b);
        let dx: Vec<Vec<Complex64>> = dw.iter().map(|w| input(&values, w)).collect();
        let ax: Vec<Vec<Complex64>> = aw.iter().map(|w| input(&values, w)).collect();
        let be = &g.base_edges()[b];
        let (rows, cols) = (spec.block_dim(be.from), spec.block_dim(be.to));
        let mut work =
            RowWork::new(rows, cols, dx.iter().map(Vec::as_slice).collect(), ax.iter().map(Vec::as_slice).collect());
        let partners: Vec<usize> = plan.pairs.iter().filter(|pq| pq.1 == b).map(|pq| pq.0).collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); partners.len()];
        let buf = spare.pop().unwrap_or_default();
        let block = fill_block(wg, spec, b, &mut rng, buf, |i, row| {
            work.row(i, row);
            for (k, &p) in partners.iter().enumerate() {
                if p == b {
                    acc[k].re += row.iter().map(|x| x.norm_sqr()).sum::<f64>();
                } else {
                    let other = &blocks[p].data[i * cols..(i + 1) * cols];
                    for (x, y) in other.iter().zip(row) {
                        acc[k] += x * y.conj();
                    }
                }
            }
        });
        for (w, (_, y)) in dw.into_iter().zip(work.direct) {
            values.insert(w, y);
        }
        for (w, (_, y)) in aw.into_iter().zip(work.adjoint) {
            values.insert(w, y);
        }
        for (k, p) in partners.into_iter().enumerate() {
            inner.insert((p, b), acc[k]);
        }
        blocks.push(block);
    }
    for ws in plan.by_len.iter().skip(2) {
        for (b, block) in blocks.iter().enumerate() {
            let (dw, aw) = split(ws, b);
            if dw.is_empty() && aw.is_empty() {
                continue;
            }
            let dx: Vec<Vec<Complex64>> = dw.iter().map(|w| input(&values, w)).collect();
            let ax: Vec<Vec<Complex64>> = aw.iter().map(|w| input(&values, w)).collect();
            let mut work = RowWork::new(
                block.rows,
                block.cols,
                dx.iter().map(Vec::as_slice).collect(),
                ax.iter().map(Vec::as_slice).collect(),
            );
            for (i, row) in block.data.chunks_exact(block.cols).enumerate() {
                work.row(i, row);
            }
            let (d, a) = (work.direct, work.adjoint);
            for (w, (_, y)) in dw.into_iter().zip(d) {
                values.insert(w, y);
            }
            for (w, (_, y)) in aw.into_iter().zip(a) {
                values.insert(w, y);
            }
        }
    }
    let out = loops
        .iter()
        .map(|w| {
            let ed = w.edges();
            match ed.len() {
                0 => spec.tr_vertex(w.base()),
                2 => {
                    let (p, q) = ((ed[0] >> 1) as usize, (ed[1] >> 1) as usize);
                    let ip = inner[&(p.min(q), p.max(q))];
                    // Entrywise sum of X_p conj(X_q) is Tr(X_a X_b) for a positive first edge.
                    let t = if (p <= q) == BipartiteGraph::is_positive(ed[0]) { ip } else { ip.conj() };
                    t.re / norm
                }
                n => {
                    let h = n / 2;
                    let r = &values[&ed[h..]];
                    let l = &values[&left_star(&ed[..h])];
                    let s: Complex64 = l.iter().zip(r).map(|(a, b)| a.conj() * b).sum();
                    s.re / norm
                }
            }
        })
        .collect();
    spare.extend(blocks.into_iter().map(|b| b.data));
    out
}

impl SampledModel {
    /// The block of an oriented edge as a dense matrix.
    pub fn edge_matrix(&self, e: Edge) -> CMat {
        let b = &self.blocks[(e >> 1) as usize];
        if BipartiteGraph::is_positive(e) {
            b.clone()
        } else {
            b.adjoint()
        }
    }

    pub fn apply_edge(&self, e: Edge, x: &[Complex64]) -> Vec<Complex64> {
        let b = &self.blocks[(e >> 1) as usize];
        if BipartiteGraph::is_positive(e) {
            b.matvec(x)
        } else {
            b.adj_matvec(x)
        }
    }

    /// Dense product of the blocks along a word.
    pub fn word_matrix(&self, word: &[Edge]) -> CMat {
        let mut acc = self.edge_matrix(word[0]);
        for &e in &word[1..] {
            acc = acc.matmul(&self.edge_matrix(e));
        }
        acc
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    #[serde(rename = "loop")]
    pub lp: String,
    pub vertex: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub abs_err: f64,
}

impl McEstimate {
    /// `|estimate - target| <= max(3 stderr, 5% |target| + 0.02)`.
    pub fn within_band(&self) -> bool {
        self.abs_err <= (3.0 * self.stderr).max(0.05 * self.target.abs() + 0.02)
    }
}

/// `mu(v) phi_v(w)`, the large-size limit of `tr(d_v X_w)`.
pub fn mc_target(wg: &WeightedGraph, w: &Loop, v: VertexId) -> f64 {
    wg.mu(v) * phi_loop_pairing(wg, w, v)
}

/// Monte Carlo means of `tr(d_v X_w)` for loops based at `v`, sharing every sample.
pub fn estimate_traces(
    wg: &WeightedGraph,
    spec: &BlockModelSpec,
    loops: &[Loop],
    samples: usize,
    mode: ExecMode,
) -> Result<Vec<McEstimate>> {
    if samples < 2 {
        return Err(Error::Model("at least two samples are needed".into()));
    }
    let plan = Plan::new(loops);
    let per_sample =
        map_range_init(mode, samples, Vec::new, |spare, s| sample_values(wg, spec, &plan, loops, s as u64, spare));
    let g = &wg.graph;
    Ok(loops
        .iter()
        .enumerate()
        .map(|(q, w)| {
            let xs: Vec<f64> = per_sample.iter().map(|r| r[q]).collect();
            let mean = xs.iter().sum::<f64>() / samples as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
            let target = mc_target(wg, w, w.base());
            McEstimate {
                lp: w.display(g),
                vertex: g.vertex(w.base()).name.clone(),
                n: spec.n,
                m: spec.m,
                samples,
                seed: spec.seed,
                estimate: mean,
                stderr: (var / samples as f64).sqrt(),
                target,
                abs_err: (mean - target).abs(),
            }
        })
        .collect())
}

/// Estimate for one loop at `v`; loops based elsewhere have trace zero.
pub fn estimate_trace(
    wg: &WeightedGraph,
    spec: &BlockModelSpec,
    w: &Loop,
    v: VertexId,
    samples: usize,
    mode: ExecMode,
) -> Result<McEstimate> {
    if wg.graph.parity(v) != w.shading(&wg.graph) {
        return Err(Error::Shading);
    }
    let mut est = estimate_traces(wg, spec, std::slice::from_ref(w), samples, mode)?.remove(0);
    if w.base() != v {
        est.vertex = wg.name(v).to_string();
        est.estimate = 0.0;
        est.stderr = 0.0;
        est.target = 0.0;
        est.abs_err = 0.0;
    }
    Ok(est)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<McEstimate>,
    /// Per loop, whether the error trend across the grid is acceptable.
    pub trends: Vec<(String, bool)>,
    pub all_within_band: bool,
    pub trend_ok: bool,
}

/// The last error may exceed the first only by twice their combined standard errors.
pub fn trend_ok(rows: &[McEstimate]) -> bool {
    match (rows.first(), rows.last()) {
        (Some(a), Some(b)) => b.abs_err <= a.abs_err + 2.0 * (a.stderr + b.stderr),
        _ => true,
    }
}

/// Estimates every loop at its base vertex for each `(N, M)` in the grid.
pub fn convergence_sweep(
    wg: &WeightedGraph,
    loops: &[Loop],
    grid: &[(usize, usize)],
    samples: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<SweepReport> {
    let mut per_size = Vec::new();
    for &(n, m) in grid {
        let spec = BlockModelSpec::new(wg, n, m, seed)?;
        per_size.push(estimate_traces(wg, &spec, loops, samples, mode)?);
    }
    let trends: Vec<(String, bool)> = (0..loops.len())
        .map(|q| {
            let series: Vec<McEstimate> = per_size.iter().map(|r| r[q].clone()).collect();
            (series[0].lp.clone(), trend_ok(&series))
        })
        .collect();
    let last = per_size.last().map(|r| r.iter().all(McEstimate::within_band)).unwrap_or(true);
    let trend = trends.iter().all(|t| t.1);
    Ok(SweepReport { rows: per_size.into_iter().flatten().collect(), trends, all_within_band: last, trend_ok: trend })
}
