//! Graded products, involution, rotation, tower maps and Temperley-Lieb elements.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::element::Element;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Edge, Shading, WeightedGraph};
use crate::loops::Loop;
use crate::nc::{noncrossing_pairings, NcPairing};
use crate::tangle::{eval_tangle, TangleProgram};

/// Product of two loops in the `t`-th graded algebra.
///
/// The last `t` edges of `x` must be the reversed opposite of the first `t`
/// edges of `y`; the survivors are concatenated and weighted by the inverse
/// edge weights of the matched edges of `y`.
pub fn wedge_loops(wg: &WeightedGraph, t: usize, x: &Loop, y: &Loop) -> Option<(Loop, f64)> {
    if x.base() != y.base() || x.len() < 2 * t || y.len() < 2 * t {
        return None;
    }
    let xe = x.edges();
    let ye = y.edges();
    let n = xe.len();
    let mut w = 1.0;
    for j in 0..t {
        if xe[n - 1 - j] != BipartiteGraph::opposite(ye[j]) {
            return None;
        }
        w /= wg.sigma(ye[j]);
    }
    let mut edges = Vec::with_capacity(n + ye.len() - 2 * t);
    edges.extend_from_slice(&xe[..n - t]);
    edges.extend_from_slice(&ye[t..]);
    Some((Loop::from_parts(x.base(), edges), w))
}

pub fn wedge(wg: &WeightedGraph, t: usize, a: &Element, b: &Element) -> Result<Element> {
    for l in [a.level(), b.level()] {
        if l < t {
            return Err(Error::Level { level: l, needed: t });
        }
    }
    if a.shading() != b.shading() {
        return Err(Error::Shading);
    }
    let mut by_base: HashMap<usize, Vec<(&Loop, f64)>> = HashMap::new();
    for (y, c) in b.iter() {
        by_base.entry(y.base()).or_default().push((y, c));
    }
    let mut items = Vec::new();
    for (x, ca) in a.iter() {
        if let Some(ys) = by_base.get(&x.base()) {
            for &(y, cb) in ys {
                if let Some((l, w)) = wedge_loops(wg, t, x, y) {
                    items.push((l, ca * cb * w));
                }
            }
        }
    }
    Ok(Element::collect(a.level() + b.level() - t, a.shading(), items))
}

/// `x` wedged with itself `n` times in degree 0; `n = 0` gives the unit.
pub fn wedge0_power(wg: &WeightedGraph, x: &Element, n: usize) -> Element {
    let mut acc = Element::unit0(&wg.graph, x.shading());
    for _ in 0..n {
        acc = wedge(wg, 0, &acc, x).expect("degree-0 product of equal shadings");
    }
    acc
}

/// Loop reversal, the adjoint in every graded algebra.
pub fn involution(t: usize, a: &Element) -> Result<Element> {
    if a.level() < t {
        return Err(Error::Level { level: a.level(), needed: t });
    }
    Ok(Element::collect(a.level(), a.shading(), a.iter().map(|(l, c)| (l.reversed(), c))))
}

/// One click of the rotation on a loop: the first two edges move to the end.
pub fn rotate_loop(wg: &WeightedGraph, x: &Loop) -> (Loop, f64) {
    let r = x.shifted(&wg.graph);
    let w = wg.mu(x.base()) / wg.mu(r.base());
    (r, w)
}

pub fn rotate(wg: &WeightedGraph, a: &Element) -> Result<Element> {
    if a.level() == 0 {
        return Err(Error::Level { level: 0, needed: 1 });
    }
    Ok(Element::collect(a.level(), a.shading(), a.iter().map(|(l, c)| {
        let (r, w) = rotate_loop(wg, l);
        (r, c * w)
    })))
}

pub fn rotate_n(wg: &WeightedGraph, a: &Element, n: usize) -> Result<Element> {
    let mut x = a.clone();
    for _ in 0..n {
        x = rotate(wg, &x)?;
    }
    Ok(x)
}

/// Tower inclusion: `w` goes to the sum of `e w e'` over edges `e` ending at its base.
pub fn include_step(wg: &WeightedGraph, a: &Element) -> Element {
    let g = &wg.graph;
    let mut items = Vec::new();
    for (w, c) in a.iter() {
        for &f in g.out_edges(w.base()) {
            let e = BipartiteGraph::opposite(f);
            let mut edges = Vec::with_capacity(w.len() + 2);
            edges.push(e);
            edges.extend_from_slice(w.edges());
            edges.push(f);
            items.push((Loop::from_parts(g.source(e), edges), c * wg.sigma(e)));
        }
    }
    Element::collect(a.level() + 1, a.shading().flip(), items)
}

pub fn include_n(wg: &WeightedGraph, a: &Element, n: usize) -> Element {
    let mut x = a.clone();
    for _ in 0..n {
        x = include_step(wg, &x);
    }
    x
}

/// Tower conditional expectation: strips matching outer edges, undoing `include_step`.
pub fn expect_step(wg: &WeightedGraph, a: &Element) -> Result<Element> {
    if a.level() == 0 {
        return Err(Error::Level { level: 0, needed: 1 });
    }
    let delta = wg.delta();
    let mut items = Vec::new();
    for (x, c) in a.iter() {
        let ed = x.edges();
        let e = ed[0];
        let last = ed[ed.len() - 1];
        if last != BipartiteGraph::opposite(e) {
            continue;
        }
        let ratio = wg.mu(wg.source(e)) / wg.mu(wg.target(e));
        let inner = Loop::from_parts(wg.target(e), ed[1..ed.len() - 1].to_vec());
        items.push((inner, c * ratio.powf(1.5) / delta));
    }
    Ok(Element::collect(a.level() - 1, a.shading().flip(), items))
}

/// The diagram element of a non-crossing pairing, based at every vertex of `shading`.
pub fn tl_element(wg: &WeightedGraph, pairing: &NcPairing, shading: Shading) -> Element {
    let g = &wg.graph;
    let n = pairing.points();
    let mut items = Vec::new();
    let mut stack: Vec<Edge> = Vec::with_capacity(n);
    for v in g.vertices_of(shading) {
        tl_rec(wg, pairing, v, v, 1.0, &mut stack, &mut items);
    }
    Element::collect(n / 2, shading, items)
}

fn tl_rec(
    wg: &WeightedGraph,
    p: &NcPairing,
    base: usize,
    at: usize,
    w: f64,
    stack: &mut Vec<Edge>,
    out: &mut Vec<(Loop, f64)>,
) {
    let i = stack.len();
    if i == p.points() {
        out.push((Loop::from_parts(base, stack.clone()), w));
        return;
    }
    let j = p.partner(i);
    if j < i {
        let e = BipartiteGraph::opposite(stack[j]);
        stack.push(e);
        tl_rec(wg, p, base, wg.target(e), w, stack, out);
        stack.pop();
    } else {
        for &e in wg.graph.out_edges(at) {
            stack.push(e);
            tl_rec(wg, p, base, wg.target(e), w * wg.sigma(e), stack, out);
            stack.pop();
        }
    }
}

/// Sum of all diagram elements with `n` strings.
pub fn big_t(wg: &WeightedGraph, n: usize, shading: Shading) -> Element {
    if n == 0 {
        return Element::unit0(&wg.graph, shading);
    }
    let mut acc = Element::zero(n, shading);
    for p in noncrossing_pairings(2 * n).expect("even point count within range") {
        acc = acc.add(&tl_element(wg, &p, shading));
    }
    acc
}

/// The single-cup element of level one.
pub fn cup(wg: &WeightedGraph, shading: Shading) -> Element {
    tl_element(wg, &NcPairing::from_partner(vec![1, 0]), shading)
}

/// The nested two-cup element of level two.
pub fn cupcup(wg: &WeightedGraph, shading: Shading) -> Element {
    tl_element(wg, &NcPairing::from_partner(vec![3, 2, 1, 0]), shading)
}

/// Pairing `{j, 2k+1-j}` for every `j`: all strings run through.
pub fn through_pairing(k: usize) -> NcPairing {
    NcPairing::from_partner((0..2 * k).map(|j| 2 * k - 1 - j).collect())
}

/// The `i`-th generator diagram at level `k`, `1 <= i < k`.
pub fn tl_generator_pairing(k: usize, i: usize) -> Result<NcPairing> {
    if i == 0 || i >= k {
        return Err(Error::Tangle(format!("generator index {i} outside 1..{k}")));
    }
    let mut partner: Vec<usize> = (0..2 * k).map(|j| 2 * k - 1 - j).collect();
    let (a, b) = (i - 1, i);
    let (c, d) = (2 * k - 1 - i, 2 * k - i);
    partner[a] = b;
    partner[b] = a;
    partner[c] = d;
    partner[d] = c;
    Ok(NcPairing::from_partner(partner))
}

pub fn tl_generator(wg: &WeightedGraph, k: usize, i: usize, shading: Shading) -> Result<Element> {
    Ok(tl_element(wg, &tl_generator_pairing(k, i)?, shading))
}

/// Unit of the level-`k` algebra under `usual_mult`.
pub fn usual_unit(wg: &WeightedGraph, k: usize, shading: Shading) -> Element {
    if k == 0 {
        return Element::unit0(&wg.graph, shading);
    }
    tl_element(wg, &through_pairing(k), shading)
}

/// The normalized Jones projection at level `k >= 2`.
pub fn jones_projection(wg: &WeightedGraph, k: usize, shading: Shading) -> Result<Element> {
    if k < 2 {
        return Err(Error::Level { level: k, needed: 2 });
    }
    Ok(tl_generator(wg, k, 1, shading)?.scale(1.0 / wg.delta()))
}

/// Stacking product of two level-`k` elements, evaluated through a cached tangle.
pub fn usual_mult(wg: &WeightedGraph, a: &Element, b: &Element) -> Result<Element> {
    if a.level() != b.level() {
        return Err(Error::Level { level: b.level(), needed: a.level() });
    }
    if a.shading() != b.shading() {
        return Err(Error::Shading);
    }
    let k = a.level();
    let prog = mult_program(k, a.shading());
    eval_tangle(wg, &prog, &[("A", a), ("B", b)])
}

fn mult_program(k: usize, s: Shading) -> TangleProgram {
    static CACHE: OnceLock<Mutex<HashMap<(usize, Shading), TangleProgram>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("cache lock");
    map.entry((k, s)).or_insert_with(|| TangleProgram::wedge(k, k, k, s)).clone()
}
