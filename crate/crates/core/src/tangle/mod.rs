//! Layered rectangular tangles: a small DSL, a printer and a spin-state evaluator.

mod eval;
mod parse;

pub use eval::{equivalence_check, eval_tangle, random_element, EquivalenceReport};
pub use parse::parse_tangle;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Shading;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Layer {
    /// Starts the diagram from an input box.
    Load(String),
    /// Places an input box to the right, sharing the base region.
    Tensor(String),
    /// Joins boundary points `i` and `i + 1` (1-based).
    Cap(usize),
    /// Creates new boundary points `i` and `i + 1`; the sign, if given, is the enclosed region's shading.
    Cup(usize, Option<Shading>),
    /// Moves the first two boundary points to the end.
    Rotate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputDecl {
    pub name: String,
    pub level: usize,
    pub shading: Shading,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangleProgram {
    pub name: Option<String>,
    pub inputs: Vec<InputDecl>,
    pub output: Option<(usize, Shading)>,
    pub layers: Vec<Layer>,
}

/// Boundary shape after each layer: point count and base shading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub points: usize,
    pub shading: Shading,
}

/// Shading of the region entered after `gap` boundary points.
pub(crate) fn region_shading(base: Shading, gap: usize) -> Shading {
    if gap.is_multiple_of(2) {
        base
    } else {
        base.flip()
    }
}

impl Shape {
    /// Applies one layer, with `input` resolving box shapes.
    pub fn step(self, layer: &Layer, input: impl Fn(&str) -> Result<Shape>) -> Result<Shape> {
        match layer {
            Layer::Load(_) => Err(Error::Tangle("load must be the first layer".into())),
            Layer::Tensor(n) => {
                let s = input(n)?;
                if s.shading != self.shading {
                    return Err(Error::Tangle(format!("tensor `{n}` has the wrong shading")));
                }
                Ok(Shape { points: self.points + s.points, shading: self.shading })
            }
            Layer::Cap(i) => {
                if *i == 0 || i + 1 > self.points {
                    return Err(Error::Tangle(format!("cap {i} out of range for {} points", self.points)));
                }
                Ok(Shape { points: self.points - 2, shading: self.shading })
            }
            Layer::Cup(i, sign) => {
                if *i == 0 || *i > self.points + 1 {
                    return Err(Error::Tangle(format!("cup {i} out of range for {} points", self.points)));
                }
                let inner = region_shading(self.shading, i - 1).flip();
                if let Some(s) = sign {
                    if *s != inner {
                        return Err(Error::Tangle(format!("cup {i} encloses a {inner} region, not {s}")));
                    }
                }
                Ok(Shape { points: self.points + 2, shading: self.shading })
            }
            Layer::Rotate => {
                if self.points < 2 {
                    return Err(Error::Tangle("rotate needs boundary points".into()));
                }
                Ok(self)
            }
        }
    }
}

impl TangleProgram {
    pub fn input(&self, name: &str) -> Option<&InputDecl> {
        self.inputs.iter().find(|d| d.name == name)
    }

    /// Checks ranges and shadings against the declared inputs and output.
    pub fn validate(&self) -> Result<Shape> {
        let lookup = |n: &str| -> Result<Shape> {
            self.input(n)
                .map(|d| Shape { points: 2 * d.level, shading: d.shading })
                .ok_or_else(|| Error::Tangle(format!("undeclared input `{n}`")))
        };
        self.shape_with(lookup)
    }

    pub(crate) fn shape_with(&self, lookup: impl Fn(&str) -> Result<Shape>) -> Result<Shape> {
        let mut it = self.layers.iter();
        let mut shape = match it.next() {
            Some(Layer::Load(n)) => lookup(n)?,
            _ => return Err(Error::Tangle("a program starts with load".into())),
        };
        for l in it {
            shape = shape.step(l, &lookup)?;
        }
        if let Some((level, s)) = self.output {
            if shape.points != 2 * level || shape.shading != s {
                return Err(Error::Tangle(format!(
                    "declared output {level}{s} but the program yields {}{}",
                    shape.points / 2,
                    shape.shading
                )));
            }
        }
        Ok(shape)
    }

    pub fn print(&self) -> String {
        let mut s = String::from("tangle");
        if let Some(n) = &self.name {
            write!(s, " {n}").unwrap();
        }
        if !self.inputs.is_empty() {
            let decls: Vec<String> =
                self.inputs.iter().map(|d| format!("{}: {}{}", d.name, d.level, d.shading)).collect();
            write!(s, " ({})", decls.join(", ")).unwrap();
        }
        if let Some((l, sh)) = self.output {
            write!(s, " -> {l} {sh}").unwrap();
        }
        s.push_str(" {\n");
        for l in &self.layers {
            let line = match l {
                Layer::Load(n) => format!("load {n};"),
                Layer::Tensor(n) => format!("tensor {n};"),
                Layer::Cap(i) => format!("cap {i};"),
                Layer::Cup(i, None) => format!("cup {i};"),
                Layer::Cup(i, Some(sh)) => format!("cup {i} {sh};"),
                Layer::Rotate => "rotate;".to_string(),
            };
            writeln!(s, "  {line}").unwrap();
        }
        s.push('}');
        s.push('\n');
        s
    }

    /// Feeds the output of `self` into the first `load` of `next`.
    pub fn then(&self, next: &TangleProgram) -> Result<TangleProgram> {
        let mut layers = self.layers.clone();
        let mut rest = next.layers.iter();
        let slot = match rest.next() {
            Some(Layer::Load(n)) => n.clone(),
            _ => return Err(Error::Tangle("the second program must start with load".into())),
        };
        layers.extend(rest.cloned());
        let mut inputs = self.inputs.clone();
        for d in &next.inputs {
            if d.name == slot {
                continue;
            }
            if self.input(&d.name).is_some() {
                return Err(Error::Tangle(format!("input `{}` declared by both programs", d.name)));
            }
            inputs.push(d.clone());
        }
        Ok(TangleProgram { name: None, inputs, output: next.output, layers })
    }

    /// `A` of level `ma` and `B` of level `mb` joined along `t` strings.
    pub fn wedge(ma: usize, mb: usize, t: usize, s: Shading) -> TangleProgram {
        let mut layers = vec![Layer::Load("A".into()), Layer::Tensor("B".into())];
        for j in 0..t {
            layers.push(Layer::Cap(2 * ma - j));
        }
        TangleProgram {
            name: Some(format!("wedge{t}")),
            inputs: vec![
                InputDecl { name: "A".into(), level: ma, shading: s },
                InputDecl { name: "B".into(), level: mb, shading: s },
            ],
            output: Some((ma + mb - t, s)),
            layers,
        }
    }

    /// Pairs `X` of level `m` against a closing box `C` of the same level.
    pub fn closure(m: usize, s: Shading, box_first: bool) -> TangleProgram {
        let (first, second) = if box_first { ("C", "X") } else { ("X", "C") };
        let mut layers = vec![Layer::Load(first.into()), Layer::Tensor(second.into())];
        for j in 0..2 * m {
            layers.push(Layer::Cap(2 * m - j));
        }
        TangleProgram {
            name: Some("closure".into()),
            inputs: vec![
                InputDecl { name: "X".into(), level: m, shading: s },
                InputDecl { name: "C".into(), level: m, shading: s },
            ],
            output: Some((0, s)),
            layers,
        }
    }

    /// A single input `X` followed by the given layers.
    pub fn unary(level: usize, s: Shading, layers: Vec<Layer>) -> TangleProgram {
        let mut all = vec![Layer::Load("X".into())];
        all.extend(layers);
        TangleProgram {
            name: None,
            inputs: vec![InputDecl { name: "X".into(), level, shading: s }],
            output: None,
            layers: all,
        }
    }
}
