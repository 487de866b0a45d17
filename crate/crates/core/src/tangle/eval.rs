use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{rotate_loop, wedge};
use crate::element::Element;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, WeightedGraph};
use crate::loops::Loop;

use super::{Layer, Shape, TangleProgram};

fn find<'a>(inputs: &'a [(&str, &'a Element)], name: &str) -> Result<&'a Element> {
    inputs
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, e)| *e)
        .ok_or_else(|| Error::Tangle(format!("missing input `{name}`")))
}

/// Evaluates a program by summing over spin states, one layer at a time.
pub fn eval_tangle(wg: &WeightedGraph, p: &TangleProgram, inputs: &[(&str, &Element)]) -> Result<Element> {
    for d in &p.inputs {
        let e = find(inputs, &d.name)?;
        if e.level() != d.level {
            return Err(Error::Level { level: e.level(), needed: d.level });
        }
        if e.shading() != d.shading {
            return Err(Error::Shading);
        }
    }
    p.shape_with(|n| {
        let e = find(inputs, n)?;
        Ok(Shape { points: 2 * e.level(), shading: e.shading() })
    })?;
    let mut layers = p.layers.iter();
    let mut state = match layers.next() {
        Some(Layer::Load(n)) => find(inputs, n)?.clone(),
        _ => return Err(Error::Tangle("a program starts with load".into())),
    };
    for l in layers {
        state = apply_layer(wg, l, &state, inputs)?;
    }
    Ok(state)
}

fn apply_layer(wg: &WeightedGraph, layer: &Layer, x: &Element, inputs: &[(&str, &Element)]) -> Result<Element> {
    let g = &wg.graph;
    match layer {
        Layer::Load(_) => Err(Error::Tangle("load must be the first layer".into())),
        Layer::Tensor(n) => wedge(wg, 0, x, find(inputs, n)?),
        Layer::Cap(i) => {
            let i = *i - 1;
            let items = x.iter().filter_map(|(l, c)| {
                let ed = l.edges();
                if ed[i + 1] != BipartiteGraph::opposite(ed[i]) {
                    return None;
                }
                let mut edges = Vec::with_capacity(ed.len() - 2);
                edges.extend_from_slice(&ed[..i]);
                edges.extend_from_slice(&ed[i + 2..]);
                Some((Loop::from_parts(l.base(), edges), c * wg.sigma(ed[i])))
            });
            Ok(Element::collect(x.level() - 1, x.shading(), items.collect::<Vec<_>>()))
        }
        Layer::Cup(i, _) => {
            let gap = *i - 1;
            let mut items = Vec::new();
            for (l, c) in x.iter() {
                let ed = l.edges();
                let at = if gap == 0 { l.base() } else { g.target(ed[gap - 1]) };
                for &e in g.out_edges(at) {
                    let mut edges = Vec::with_capacity(ed.len() + 2);
                    edges.extend_from_slice(&ed[..gap]);
                    edges.push(e);
                    edges.push(BipartiteGraph::opposite(e));
                    edges.extend_from_slice(&ed[gap..]);
                    items.push((Loop::from_parts(l.base(), edges), c * wg.sigma(e)));
                }
            }
            Ok(Element::collect(x.level() + 1, x.shading(), items))
        }
        Layer::Rotate => Ok(Element::collect(
            x.level(),
            x.shading(),
            x.iter()
                .map(|(l, c)| {
                    let (r, w) = rotate_loop(wg, l);
                    (r, c * w)
                })
                .collect::<Vec<_>>(),
        )),
    }
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub equal: bool,
    pub max_diff: f64,
    pub detail: String,
}

/// Compares two programs on random inputs over A2, A3 and the four-leaf star.
pub fn equivalence_check(pa: &TangleProgram, pb: &TangleProgram, trials: usize, seed: u64) -> EquivalenceReport {
    let mut names_a: Vec<_> = pa.inputs.iter().map(|d| (&d.name, d.level, d.shading)).collect();
    let mut names_b: Vec<_> = pb.inputs.iter().map(|d| (&d.name, d.level, d.shading)).collect();
    names_a.sort();
    names_b.sort();
    if names_a != names_b || pa.inputs.is_empty() {
        return EquivalenceReport {
            equal: false,
            max_diff: f64::INFINITY,
            detail: "programs declare different inputs".into(),
        };
    }
    let graphs = [WeightedGraph::a2(), WeightedGraph::a3(), WeightedGraph::s4()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_diff: f64 = 0.0;
    for wg in &graphs {
        for trial in 0..trials {
            let owned: Vec<(String, Element)> = pa
                .inputs
                .iter()
                .map(|d| (d.name.clone(), random_element(wg, d.level, d.shading, &mut rng)))
                .collect();
            let inputs: Vec<(&str, &Element)> = owned.iter().map(|(n, e)| (n.as_str(), e)).collect();
            let ra = eval_tangle(wg, pa, &inputs);
            let rb = eval_tangle(wg, pb, &inputs);
            match (ra, rb) {
                (Ok(a), Ok(b)) => {
                    let d = a.rel_diff(&b);
                    max_diff = max_diff.max(d);
                    if d > 1e-9 {
                        return EquivalenceReport {
                            equal: false,
                            max_diff,
                            detail: format!("differ by {d:.3e} on trial {trial}"),
                        };
                    }
                }
                (a, b) => {
                    return EquivalenceReport {
                        equal: false,
                        max_diff: f64::INFINITY,
                        detail: format!("evaluation failed: {:?} / {:?}", a.err(), b.err()),
                    }
                }
            }
        }
    }
    EquivalenceReport { equal: true, max_diff, detail: "agree".into() }
}

/// Uniform coefficients in `[-1, 1]` on every loop of the given level and shading.
pub fn random_element(wg: &WeightedGraph, level: usize, s: crate::graph::Shading, rng: &mut impl Rng) -> Element {
    let g = &wg.graph;
    let mut items = Vec::new();
    for v in g.vertices_of(s) {
        for l in g.loops_at(v, level) {
            items.push((l, rng.random_range(-1.0..1.0)));
        }
    }
    Element::collect(level, s, items)
}
