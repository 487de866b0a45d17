//! Truncated Fock space over graph paths and the operators acting on it.

use serde::Serialize;

use crate::algebra::{cup, include_n, wedge_loops};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Edge, Shading, VertexId, WeightedGraph};
use crate::loops::Loop;
use crate::par::{map_slice, ExecMode};
use crate::trace::phi_loop_pairing;

pub const BASIS_CAP: usize = 1_000_000;
const NONE: u32 = u32::MAX;

/// All composable paths of length `0..=depth`, indexed breadth first.
#[derive(Clone, Debug)]
pub struct PathBasis {
    depth: usize,
    start: Vec<VertexId>,
    len: Vec<u16>,
    first: Vec<Edge>,
    rest: Vec<u32>,
    prepend: Vec<u32>,
    norm2: Vec<f64>,
    edge_target: Vec<VertexId>,
}

/// Sparse vector as index-sorted `(index, coefficient)` pairs.
pub type SparseVec = Vec<(u32, f64)>;

fn normalize(mut v: SparseVec) -> SparseVec {
    v.sort_unstable_by_key(|p| p.0);
    let mut out: SparseVec = Vec::with_capacity(v.len());
    for (i, c) in v {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += c,
            _ => out.push((i, c)),
        }
    }
    out.retain(|p| p.1 != 0.0);
    out
}

pub fn add_vec(a: &SparseVec, b: &SparseVec, s: f64) -> SparseVec {
    let mut v = a.clone();
    v.extend(b.iter().map(|&(i, c)| (i, c * s)));
    normalize(v)
}

pub fn max_abs(v: &SparseVec) -> f64 {
    v.iter().fold(0.0, |m, p| m.max(p.1.abs()))
}

impl PathBasis {
    pub fn new(wg: &WeightedGraph, depth: usize) -> Result<PathBasis> {
        let g = &wg.graph;
        let nv = g.n_vertices();
        let ne = g.n_oriented_edges();
        let mut b = PathBasis {
            depth,
            start: (0..nv).collect(),
            len: vec![0; nv],
            first: vec![NONE; nv],
            rest: vec![NONE; nv],
            prepend: Vec::new(),
            norm2: vec![1.0; nv],
            edge_target: g.all_edges().map(|e| g.target(e)).collect(),
        };
        let mut layer: Vec<u32> = (0..nv as u32).collect();
        let mut links: Vec<(u32, Edge, u32)> = Vec::new();
        for l in 1..=depth {
            let mut next = Vec::new();
            for &i in &layer {
                let s = b.start[i as usize];
                for &f in g.out_edges(s) {
                    let e = BipartiteGraph::opposite(f);
                    let idx = b.start.len();
                    if idx >= BASIS_CAP {
                        return Err(Error::BasisCap(idx + 1));
                    }
                    b.start.push(g.source(e));
                    b.len.push(l as u16);
                    b.first.push(e);
                    b.rest.push(i);
                    b.norm2.push(b.norm2[i as usize] / wg.sigma(e));
                    links.push((i, e, idx as u32));
                    next.push(idx as u32);
                }
            }
            layer = next;
        }
        let n = b.start.len();
        b.prepend = vec![NONE; ne * n];
        for (i, e, j) in links {
            b.prepend[e as usize * n + i as usize] = j;
        }
        Ok(b)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn size(&self) -> usize {
        self.start.len()
    }

    pub fn path_len(&self, i: usize) -> usize {
        self.len[i] as usize
    }

    pub fn start(&self, i: usize) -> VertexId {
        self.start[i]
    }

    pub fn norm2(&self, i: usize) -> f64 {
        self.norm2[i]
    }

    pub fn path(&self, mut i: usize) -> (VertexId, Vec<Edge>) {
        let s = self.start[i];
        let mut edges = Vec::with_capacity(self.len[i] as usize);
        while self.first[i] != NONE {
            edges.push(self.first[i]);
            i = self.rest[i] as usize;
        }
        (s, edges)
    }

    /// Index of the path `edges`, or of the vertex `v` when `edges` is empty.
    pub fn index_of(&self, v: VertexId, edges: &[Edge]) -> Option<usize> {
        let mut i = match edges.last() {
            Some(&last) => self.edge_target[last as usize],
            None => v,
        };
        for &e in edges.iter().rev() {
            let j = self.prepend_idx(e, i);
            if j == NONE {
                return None;
            }
            i = j as usize;
        }
        Some(i)
    }

    fn prepend_idx(&self, e: Edge, i: usize) -> u32 {
        self.prepend[e as usize * self.size() + i]
    }

    /// Paths of length at most `max_len`.
    pub fn interior(&self, max_len: usize) -> Vec<usize> {
        (0..self.size()).filter(|&i| self.path_len(i) <= max_len).collect()
    }

    pub fn unit(&self, i: usize) -> SparseVec {
        vec![(i as u32, 1.0)]
    }

    /// `<x, y>` with path norms `prod sigma(e)^-1`.
    pub fn dot(&self, x: &SparseVec, y: &SparseVec) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut s = 0.0;
        while a < x.len() && b < y.len() {
            match x[a].0.cmp(&y[b].0) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    s += x[a].1 * y[b].1 * self.norm2[x[a].0 as usize];
                    a += 1;
                    b += 1;
                }
            }
        }
        s
    }

    pub fn norm2_of(&self, x: &SparseVec) -> f64 {
        self.dot(x, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    /// Prepends an edge.
    Create(Edge),
    /// Adjoint of `Create`: strips a matching first edge.
    Annihilate(Edge),
    /// `Create(e) + Annihilate(e')`.
    Field(Edge),
    /// Projection onto paths starting at a vertex.
    Vertex(VertexId),
}

/// A linear combination of letter words; words act right to left.
pub type Expr = Vec<(f64, Vec<Letter>)>;

pub struct Fock<'a> {
    pub wg: &'a WeightedGraph,
    pub basis: PathBasis,
}

impl<'a> Fock<'a> {
    pub fn new(wg: &'a WeightedGraph, depth: usize) -> Result<Fock<'a>> {
        Ok(Fock { wg, basis: PathBasis::new(wg, depth)? })
    }

    fn create(&self, e: Edge, x: &SparseVec, out: &mut SparseVec) {
        let g = &self.wg.graph;
        for &(i, c) in x {
            let i = i as usize;
            if self.basis.start[i] == g.target(e) {
                let j = self.basis.prepend_idx(e, i);
                if j != NONE {
                    out.push((j, c));
                }
            }
        }
    }

    fn annihilate(&self, e: Edge, x: &SparseVec, out: &mut SparseVec) {
        let w = 1.0 / self.wg.sigma(e);
        for &(i, c) in x {
            if self.basis.first[i as usize] == e {
                out.push((self.basis.rest[i as usize], c * w));
            }
        }
    }

    pub fn apply_letter(&self, l: Letter, x: &SparseVec) -> SparseVec {
        let mut out = Vec::with_capacity(x.len() * 2);
        match l {
            Letter::Create(e) => self.create(e, x, &mut out),
            Letter::Annihilate(e) => self.annihilate(e, x, &mut out),
            Letter::Field(e) => {
                self.create(e, x, &mut out);
                self.annihilate(BipartiteGraph::opposite(e), x, &mut out);
            }
            Letter::Vertex(v) => out.extend(x.iter().filter(|p| self.basis.start[p.0 as usize] == v)),
        }
        normalize(out)
    }

    pub fn apply_word(&self, word: &[Letter], x: &SparseVec) -> SparseVec {
        let mut v = x.clone();
        for &l in word.iter().rev() {
            if v.is_empty() {
                break;
            }
            v = self.apply_letter(l, &v);
        }
        v
    }

    pub fn apply(&self, expr: &Expr, x: &SparseVec) -> SparseVec {
        let mut acc = Vec::new();
        for (c, w) in expr {
            acc.extend(self.apply_word(w, x).into_iter().map(|(i, y)| (i, y * c)));
        }
        normalize(acc)
    }

    /// `<v, X v>` for the vertex vacuum `v`.
    pub fn vacuum_expectation(&self, expr: &Expr, v: VertexId) -> f64 {
        let y = self.apply(expr, &self.basis.unit(v));
        y.iter().find(|p| p.0 as usize == v).map(|p| p.1).unwrap_or(0.0)
    }

    pub fn operator(&self, expr: &Expr) -> FockOperator {
        let cols = (0..self.basis.size()).map(|i| self.apply(expr, &self.basis.unit(i))).collect();
        FockOperator { cols, word_len: expr_len(expr) }
    }

    pub fn operator_of(&self, op: &FockExpr) -> Result<FockOperator> {
        Ok(self.operator(&expr_of(self.wg, op)?))
    }
}

pub fn expr_len(expr: &Expr) -> usize {
    expr.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
}

/// Letters of `c_t(x)`: created prefix, field middle, annihilated suffix.
pub fn loop_word(x: &Loop, t: usize) -> Result<Vec<Letter>> {
    if x.level() < t {
        return Err(Error::Level { level: x.level(), needed: t });
    }
    let ed = x.edges();
    if ed.is_empty() {
        return Ok(vec![Letter::Vertex(x.base())]);
    }
    let n = ed.len();
    let mut w = Vec::with_capacity(n);
    w.extend(ed[..t].iter().map(|&e| Letter::Create(e)));
    w.extend(ed[t..n - t].iter().map(|&e| Letter::Field(e)));
    w.extend(ed[n - t..].iter().map(|&e| Letter::Annihilate(BipartiteGraph::opposite(e))));
    Ok(w)
}

pub fn element_expr(x: &Element, t: usize) -> Result<Expr> {
    x.iter().map(|(l, c)| Ok((c, loop_word(l, t)?))).collect()
}

/// Operator expressions with a name.
#[derive(Clone, Debug)]
pub enum FockExpr {
    Create(Edge),
    Annihilate(Edge),
    Field(Edge),
    LoopWord { lp: Loop, t: usize },
    Cup,
    CupCup,
    CupCupSigma,
    Identity,
}

pub fn expr_of(wg: &WeightedGraph, op: &FockExpr) -> Result<Expr> {
    let g = &wg.graph;
    let check = |e: Edge| -> Result<Edge> {
        if (e as usize) < g.n_oriented_edges() {
            Ok(e)
        } else {
            Err(Error::UnknownEdge(format!("#{e}")))
        }
    };
    Ok(match op {
        FockExpr::Create(e) => vec![(1.0, vec![Letter::Create(check(*e)?)])],
        FockExpr::Annihilate(e) => vec![(1.0, vec![Letter::Annihilate(check(*e)?)])],
        FockExpr::Field(e) => vec![(1.0, vec![Letter::Field(check(*e)?)])],
        FockExpr::LoopWord { lp, t } => vec![(1.0, loop_word(lp, *t)?)],
        FockExpr::Cup => element_expr(&cup(wg, Shading::Plus), 0)?,
        FockExpr::CupCup => cupcup_expr(wg, true),
        FockExpr::CupCupSigma => cupcup_expr(wg, false),
        FockExpr::Identity => g.vertices().iter().enumerate().map(|(v, _)| (1.0, vec![Letter::Vertex(v)])).collect(),
    })
}

/// The nested two-cup operator at even vertices, weighted by the end-point ratio or by edge weights.
fn cupcup_expr(wg: &WeightedGraph, ratio_form: bool) -> Expr {
    let g = &wg.graph;
    let mut out = Vec::new();
    for v in g.vertices_of(Shading::Plus) {
        for &e in g.out_edges(v) {
            for &f in g.out_edges(g.target(e)) {
                let w = if ratio_form {
                    (wg.mu(g.target(f)) / wg.mu(g.source(e))).sqrt()
                } else {
                    wg.sigma(e) * wg.sigma(f)
                };
                let word = vec![
                    Letter::Field(e),
                    Letter::Field(f),
                    Letter::Field(BipartiteGraph::opposite(f)),
                    Letter::Field(BipartiteGraph::opposite(e)),
                ];
                out.push((w, word));
            }
        }
    }
    out
}

/// Largest gap between the two weightings of the nested two-cup sum.
pub fn cupcup_weight_gap(wg: &WeightedGraph) -> f64 {
    let a = cupcup_expr(wg, true);
    let b = cupcup_expr(wg, false);
    a.iter().zip(&b).map(|(x, y)| (x.0 - y.0).abs()).fold(0.0, f64::max)
}

/// Sparse operator stored by columns.
#[derive(Clone, Debug)]
pub struct FockOperator {
    pub cols: Vec<SparseVec>,
    pub word_len: usize,
}

impl FockOperator {
    pub fn apply(&self, x: &SparseVec) -> SparseVec {
        let mut acc = Vec::new();
        for &(j, c) in x {
            acc.extend(self.cols[j as usize].iter().map(|&(i, y)| (i, y * c)));
        }
        normalize(acc)
    }

    pub fn mul(&self, other: &FockOperator) -> FockOperator {
        FockOperator {
            cols: other.cols.iter().map(|c| self.apply(c)).collect(),
            word_len: self.word_len + other.word_len,
        }
    }

    pub fn sub(&self, other: &FockOperator) -> FockOperator {
        FockOperator {
            cols: self.cols.iter().zip(&other.cols).map(|(a, b)| add_vec(a, b, -1.0)).collect(),
            word_len: self.word_len.max(other.word_len),
        }
    }

    /// Adjoint for the weighted path inner product.
    pub fn adjoint(&self, basis: &PathBasis) -> FockOperator {
        let mut cols: Vec<SparseVec> = vec![Vec::new(); self.cols.len()];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, a) in col {
                cols[i as usize].push((j as u32, a * basis.norm2(i as usize) / basis.norm2(j)));
            }
        }
        FockOperator { cols: cols.into_iter().map(normalize).collect(), word_len: self.word_len }
    }

    /// Frobenius norm over the given columns.
    pub fn frobenius_on(&self, cols: &[usize]) -> f64 {
        cols.iter().map(|&j| self.cols[j].iter().map(|p| p.1 * p.1).sum::<f64>()).sum::<f64>().sqrt()
    }

    pub fn max_abs_on(&self, cols: &[usize]) -> f64 {
        cols.iter().map(|&j| max_abs(&self.cols[j])).fold(0.0, f64::max)
    }

    /// Exact for vacuum use at truncation depth `depth`.
    pub fn exact_for_vacuum(&self, depth: usize) -> bool {
        depth >= self.word_len
    }
}

/// `(sum_{e at v} sigma(e) e e')^{tensor k}` as a vector.
pub fn xi_vector(fock: &Fock, k: usize, v: VertexId) -> SparseVec {
    let wg = fock.wg;
    let g = &wg.graph;
    let mut words: Vec<(Vec<Edge>, f64)> = vec![(Vec::new(), 1.0)];
    for _ in 0..k {
        let mut next = Vec::new();
        for (w, c) in &words {
            for &e in g.out_edges(v) {
                let mut w2 = w.clone();
                w2.push(e);
                w2.push(BipartiteGraph::opposite(e));
                next.push((w2, c * wg.sigma(e)));
            }
        }
        words = next;
    }
    normalize(words.into_iter().filter_map(|(w, c)| fock.basis.index_of(v, &w).map(|i| (i as u32, c))).collect())
}

/// Vacuum moments `phi_v(cup^n)` for `n = 0..=nmax`.
pub fn cup_moments(wg: &WeightedGraph, v: VertexId, nmax: usize) -> Result<Vec<f64>> {
    let fock = Fock::new(wg, 2 * nmax)?;
    let c = expr_of(wg, &FockExpr::Cup)?;
    let mut x = fock.basis.unit(v);
    let mut out = vec![1.0];
    for _ in 0..nmax {
        x = fock.apply(&c, &x);
        out.push(x.iter().find(|p| p.0 as usize == v).map(|p| p.1).unwrap_or(0.0));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceOracleReport {
    pub loops: usize,
    pub max_dev: f64,
    pub worst_loop: String,
    pub pass: bool,
}

/// Vacuum expectation of the field word of every loop against the pairing formula.
pub fn oracle_check_trace(wg: &WeightedGraph, max_len: usize, depth: usize, tol: f64) -> Result<TraceOracleReport> {
    if depth < max_len {
        return Err(Error::Model(format!("depth {depth} is below loop length {max_len}")));
    }
    let fock = Fock::new(wg, depth)?;
    let g = &wg.graph;
    let mut count = 0;
    let mut max_dev: f64 = 0.0;
    let mut worst = String::new();
    for v in 0..g.n_vertices() {
        for k in 1..=max_len / 2 {
            for l in g.loops_at(v, k) {
                let got = fock.vacuum_expectation(&vec![(1.0, loop_word(&l, 0)?)], v);
                let want = phi_loop_pairing(wg, &l, v);
                let d = (got - want).abs();
                count += 1;
                if d > max_dev || worst.is_empty() {
                    max_dev = max_dev.max(d);
                    worst = l.display(g);
                }
            }
        }
    }
    Ok(TraceOracleReport { loops: count, max_dev, worst_loop: worst, pass: max_dev <= tol })
}

#[derive(Clone, Debug, Serialize)]
pub struct HomomorphismReport {
    pub t: usize,
    pub pairs: usize,
    pub nonzero_products: usize,
    pub max_dev: f64,
}

/// `c_t(a) c_t(b)` against `c_t(a wedge_t b)` on every interior path, for all loop pairs.
pub fn homomorphism_check(
    wg: &WeightedGraph,
    max_len: usize,
    t: usize,
    interior: usize,
    mode: ExecMode,
) -> Result<HomomorphismReport> {
    let g = &wg.graph;
    let fock = Fock::new(wg, 2 * max_len + interior)?;
    let cols = fock.basis.interior(interior);
    let mut loops: Vec<Loop> = Vec::new();
    for v in 0..g.n_vertices() {
        for k in t.max(1)..=max_len / 2 {
            loops.extend(g.loops_at(v, k));
        }
    }
    let units: Vec<SparseVec> = cols.iter().map(|&i| fock.basis.unit(i)).collect();
    let words: Vec<Vec<Letter>> = loops.iter().map(|l| loop_word(l, t)).collect::<Result<_>>()?;
    let images: Vec<Vec<SparseVec>> =
        map_slice(mode, &words, |w| units.iter().map(|u| fock.apply_word(w, u)).collect());
    let idx: Vec<usize> = (0..loops.len()).collect();
    let per_a = map_slice(mode, &idx, |&ia| {
        let a = &loops[ia];
        let mut dev: f64 = 0.0;
        let (mut pairs, mut nonzero) = (0usize, 0usize);
        for (ib, b) in loops.iter().enumerate() {
            if g.parity(a.base()) != g.parity(b.base()) {
                continue;
            }
            pairs += 1;
            let prod = wedge_loops(wg, t, a, b);
            let rhs_word = prod.as_ref().map(|(l, _)| loop_word(l, t).expect("level at least t"));
            if prod.is_some() {
                nonzero += 1;
            }
            for (u, bimg) in units.iter().zip(&images[ib]) {
                let lhs = fock.apply_word(&words[ia], bimg);
                let rhs = match (&prod, &rhs_word) {
                    (Some((_, w)), Some(word)) => fock.apply_word(word, u).into_iter().map(|(i, c)| (i, c * w)).collect(),
                    _ => Vec::new(),
                };
                let diff = add_vec(&lhs, &rhs, -1.0);
                dev = dev.max(max_abs(&diff));
            }
        }
        (pairs, nonzero, dev)
    });
    let mut rep = HomomorphismReport { t, pairs: 0, nonzero_products: 0, max_dev: 0.0 };
    for (p, n, d) in per_a {
        rep.pairs += p;
        rep.nonzero_products += n;
        rep.max_dev = rep.max_dev.max(d);
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorReport {
    pub xi_norms: Vec<(usize, f64, f64)>,
    pub commutator_norm: f64,
    pub cupcup_minus_cup_squared: f64,
    pub cupcup_minus_cup: f64,
    pub cupcup_weight_gap: f64,
    pub cup_decomposition_dev: f64,
    pub pk_commutation_dev: f64,
}

/// Degenerate-graph diagnostics on the interior of a depth-`depth` truncation.
pub fn commutator_diagnostics(wg: &WeightedGraph, depth: usize) -> Result<CommutatorReport> {
    if depth < 10 {
        return Err(Error::Model("depth must be at least 10".into()));
    }
    let g = &wg.graph;
    let fock = Fock::new(wg, depth)?;
    let mut xi_norms = Vec::new();
    for v in g.vertices_of(Shading::Plus).into_iter().take(1) {
        for k in 0..=3 {
            let xi = xi_vector(&fock, k, v);
            xi_norms.push((k, fock.basis.norm2_of(&xi), wg.delta().powi(k as i32)));
        }
    }
    let cup_e = expr_of(wg, &FockExpr::Cup)?;
    let cc_e = expr_of(wg, &FockExpr::CupCup)?;
    let interior = fock.basis.interior(depth - 6);
    let mut comm: f64 = 0.0;
    let mut sq: f64 = 0.0;
    let mut eq: f64 = 0.0;
    let mut dec: f64 = 0.0;
    let delta = wg.delta();
    for &i in &interior {
        let u = fock.basis.unit(i);
        let cu = fock.apply(&cup_e, &u);
        let ccu = fock.apply(&cc_e, &u);
        let a = fock.apply(&cup_e, &ccu);
        let b = fock.apply(&cc_e, &cu);
        let c = add_vec(&a, &b, -1.0);
        comm += c.iter().map(|p| p.1 * p.1).sum::<f64>();
        let cu2 = fock.apply(&cup_e, &cu);
        sq = sq.max(max_abs(&add_vec(&ccu, &cu2, -1.0)));
        eq = eq.max(max_abs(&add_vec(&ccu, &cu, -1.0)));
        if g.parity(fock.basis.start(i)) == Shading::Plus {
            let mut rhs: SparseVec = Vec::new();
            for v in g.vertices_of(Shading::Plus) {
                for &e in g.out_edges(v) {
                    let pair = [Letter::Create(e), Letter::Create(BipartiteGraph::opposite(e))];
                    let up = fock.apply_word(&pair, &u);
                    let down = fock.apply_word(
                        &[Letter::Annihilate(BipartiteGraph::opposite(e)), Letter::Annihilate(e)],
                        &u,
                    );
                    rhs = add_vec(&rhs, &up, wg.sigma(e));
                    rhs = add_vec(&rhs, &down, wg.sigma(e));
                }
            }
            rhs = add_vec(&rhs, &u, delta);
            if fock.basis.path_len(i) > 0 {
                rhs = add_vec(&rhs, &u, 1.0);
            }
            dec = dec.max(max_abs(&add_vec(&cu, &rhs, -1.0)));
        }
    }
    Ok(CommutatorReport {
        xi_norms,
        commutator_norm: comm.sqrt(),
        cupcup_minus_cup_squared: sq,
        cupcup_minus_cup: eq,
        cupcup_weight_gap: cupcup_weight_gap(wg),
        cup_decomposition_dev: dec,
        pk_commutation_dev: pk_commutation(wg, &fock, 2)?,
    })
}

/// `c_k(x)` against the `k`-fold inclusion of short degree-0 loops, commutator on the interior.
pub fn pk_commutation(wg: &WeightedGraph, fock: &Fock, kmax: usize) -> Result<f64> {
    let g = &wg.graph;
    let mut dev: f64 = 0.0;
    for k in 1..=kmax {
        for s in [Shading::Plus, Shading::Minus] {
            let mut ys = Vec::new();
            for v in g.vertices_of(s) {
                ys.extend(g.loops_at(v, 1));
            }
            for y in ys {
                let iy = include_n(wg, &Element::from_loop(g, y, 1.0), k);
                let iy_e = element_expr(&iy, k)?;
                let len = expr_len(&iy_e) + 2 * k;
                if len > fock.basis.depth() {
                    return Err(Error::Model("truncation too shallow for commutation check".into()));
                }
                let cols = fock.basis.interior(fock.basis.depth() - len);
                for v in g.vertices_of(iy.shading()) {
                    for x in g.loops_at(v, k) {
                        let xe = vec![(1.0, loop_word(&x, k)?)];
                        for &i in &cols {
                            let u = fock.basis.unit(i);
                            let a = fock.apply(&xe, &fock.apply(&iy_e, &u));
                            let b = fock.apply(&iy_e, &fock.apply(&xe, &u));
                            dev = dev.max(max_abs(&add_vec(&a, &b, -1.0)));
                        }
                    }
                }
            }
        }
    }
    Ok(dev)
}
