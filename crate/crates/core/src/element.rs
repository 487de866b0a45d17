use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Shading, WeightedGraph};
use crate::loops::Loop;

pub const PRUNE: f64 = 1e-14;

/// A finite linear combination of loops of one level and shading.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    level: usize,
    shading: Shading,
    terms: BTreeMap<Loop, f64>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    #[serde(rename = "loop")]
    lp: String,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    level: usize,
    shading: Shading,
    terms: Vec<TermDoc>,
}

impl Element {
    pub fn zero(level: usize, shading: Shading) -> Element {
        Element { level, shading, terms: BTreeMap::new() }
    }

    pub fn from_loop(g: &BipartiteGraph, l: Loop, coeff: f64) -> Element {
        let mut e = Element::zero(l.level(), l.shading(g));
        e.add_term(l, coeff);
        e
    }

    pub fn from_terms(
        g: &BipartiteGraph,
        level: usize,
        shading: Shading,
        terms: impl IntoIterator<Item = (Loop, f64)>,
    ) -> Result<Element> {
        let mut e = Element::zero(level, shading);
        for (l, c) in terms {
            if l.level() != level {
                return Err(Error::Level { level: l.level(), needed: level });
            }
            if l.shading(g) != shading {
                return Err(Error::Shading);
            }
            e.add_term(l, c);
        }
        Ok(e)
    }

    /// `sum_v v` over vertices of the given shading.
    pub fn unit0(g: &BipartiteGraph, shading: Shading) -> Element {
        let mut e = Element::zero(0, shading);
        for v in g.vertices_of(shading) {
            e.add_term(Loop::vertex(v), 1.0);
        }
        e
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn shading(&self) -> Shading {
        self.shading
    }

    pub fn terms(&self) -> &BTreeMap<Loop, f64> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Loop, f64)> {
        self.terms.iter().map(|(l, c)| (l, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, l: &Loop) -> f64 {
        self.terms.get(l).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, l: Loop, c: f64) {
        debug_assert_eq!(l.level(), self.level);
        let v = self.terms.get(&l).copied().unwrap_or(0.0) + c;
        if v.abs() < PRUNE {
            self.terms.remove(&l);
        } else {
            self.terms.insert(l, v);
        }
    }

    /// Builds an element from possibly repeated terms, pruning small sums.
    pub(crate) fn collect(level: usize, shading: Shading, items: impl IntoIterator<Item = (Loop, f64)>) -> Element {
        let mut terms: BTreeMap<Loop, f64> = BTreeMap::new();
        for (l, c) in items {
            *terms.entry(l).or_insert(0.0) += c;
        }
        terms.retain(|_, c| c.abs() >= PRUNE);
        Element { level, shading, terms }
    }

    pub fn scale(&self, s: f64) -> Element {
        Element::collect(self.level, self.shading, self.terms.iter().map(|(l, c)| (l.clone(), c * s)))
    }

    pub fn add(&self, other: &Element) -> Element {
        assert_eq!(self.level, other.level, "level mismatch in add");
        assert_eq!(self.shading, other.shading, "shading mismatch in add");
        Element::collect(
            self.level,
            self.shading,
            self.iter().chain(other.iter()).map(|(l, c)| (l.clone(), c)),
        )
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest coefficient difference, relative to `max(1, |a|, |b|)`.
    pub fn rel_diff(&self, other: &Element) -> f64 {
        if self.level != other.level || self.shading != other.shading {
            if self.is_zero() && other.is_zero() {
                return 0.0;
            }
            return f64::INFINITY;
        }
        let scale = 1.0f64.max(self.max_abs()).max(other.max_abs());
        let mut d: f64 = 0.0;
        for (l, c) in self.iter() {
            d = d.max((c - other.coeff(l)).abs());
        }
        for (l, c) in other.iter() {
            if !self.terms.contains_key(l) {
                d = d.max(c.abs());
            }
        }
        d / scale
    }

    pub fn to_json(&self, g: &BipartiteGraph) -> String {
        let doc = ElementDoc {
            level: self.level,
            shading: self.shading,
            terms: self.iter().map(|(l, c)| TermDoc { lp: l.display(g), coeff: c }).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("element serializes")
    }

    pub fn from_json(g: &BipartiteGraph, text: &str) -> Result<Element> {
        let doc: ElementDoc = serde_json::from_str(text)?;
        let mut terms = Vec::new();
        for t in doc.terms {
            terms.push((Loop::parse(g, &t.lp)?, t.coeff));
        }
        Element::from_terms(g, doc.level, doc.shading, terms)
    }

    pub fn display(&self, wg: &WeightedGraph) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.iter()
            .map(|(l, c)| format!("{c:+.6}*({})", l.display(&wg.graph)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}
