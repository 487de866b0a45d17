#![allow(dead_code)]

use gpa_core::graph::{BipartiteGraph, Shading, WeightedGraph};
use gpa_core::tangle::random_element;
use gpa_core::Element;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected bipartite graph on `n` vertices: a random tree plus `extra` random edges.
pub fn random_graph(n: usize, extra: usize, seed: u64) -> BipartiteGraph {
    let mut r = rng(seed);
    let mut parity = vec![Shading::Plus];
    let mut pairs = Vec::new();
    for i in 1..n {
        let p = r.random_range(0..i);
        parity.push(parity[p].flip());
        pairs.push((p, i));
    }
    for _ in 0..extra {
        let a = r.random_range(0..n);
        let b = r.random_range(0..n);
        if parity[a] != parity[b] {
            pairs.push((a, b));
        }
    }
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let enames: Vec<String> = (0..pairs.len()).map(|i| format!("e{i}")).collect();
    let vs = (0..n).map(|i| (names[i].as_str(), parity[i])).collect();
    let es = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let (p, m) = if parity[a] == Shading::Plus { (a, b) } else { (b, a) };
            (enames[k].as_str(), names[p].as_str(), names[m].as_str())
        })
        .collect();
    BipartiteGraph::new(vs, es).expect("random graph is valid")
}

pub fn named_graphs() -> Vec<(&'static str, WeightedGraph)> {
    vec![("a2", WeightedGraph::a2()), ("a3", WeightedGraph::a3()), ("s4", WeightedGraph::s4())]
}

pub fn graph_by_index(i: usize) -> WeightedGraph {
    named_graphs().swap_remove(i % 3).1
}

pub fn random_elem(wg: &WeightedGraph, level: usize, s: Shading, seed: u64) -> Element {
    random_element(wg, level, s, &mut rng(seed))
}

pub fn shading(b: bool) -> Shading {
    if b {
        Shading::Plus
    } else {
        Shading::Minus
    }
}
