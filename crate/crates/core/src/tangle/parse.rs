use crate::error::{Error, Result};
use crate::graph::Shading;

use super::{InputDecl, Layer, TangleProgram};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Sym(char),
    Arrow,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

fn lex(text: &str) -> Result<Lexer> {
    let mut toks = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            toks.push((Tok::Ident(chars[start..i].iter().collect()), l0, c0));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| Error::Parse { line: l0, col: c0, msg: "integer too large".into() })?;
            toks.push((Tok::Int(n), l0, c0));
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            toks.push((Tok::Arrow, l0, c0));
            i += 2;
            col += 2;
            continue;
        }
        if "{}();:,+-".contains(c) {
            toks.push((Tok::Sym(c), l0, c0));
            i += 1;
            col += 1;
            continue;
        }
        return Err(Error::Parse { line: l0, col: c0, msg: format!("unexpected character `{c}`") });
    }
    Ok(Lexer { toks, pos: 0, end: (line, col) })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.1, t.2)).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Parse { line, col, msg: msg.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    fn int(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected an integer"),
        }
    }

    fn shading(&mut self) -> Result<Shading> {
        match self.peek() {
            Some(Tok::Sym('+')) => {
                self.pos += 1;
                Ok(Shading::Plus)
            }
            Some(Tok::Sym('-')) => {
                self.pos += 1;
                Ok(Shading::Minus)
            }
            _ => self.err("expected `+` or `-`"),
        }
    }
}

/// Parses a `.tgl` program; range and shading errors are reported when inputs are declared.
pub fn parse_tangle(text: &str) -> Result<TangleProgram> {
    let mut lx = lex(text)?;
    match lx.next() {
        Some(Tok::Ident(s)) if s == "tangle" => {}
        _ => {
            lx.pos = 0;
            return lx.err("expected `tangle`");
        }
    }
    let name = match lx.peek() {
        Some(Tok::Ident(_)) => Some(lx.ident()?),
        _ => None,
    };
    let mut inputs: Vec<InputDecl> = Vec::new();
    if lx.peek() == Some(&Tok::Sym('(')) {
        lx.pos += 1;
        loop {
            let at = lx.here();
            let n = lx.ident()?;
            lx.expect_sym(':')?;
            let level = lx.int()?;
            let shading = lx.shading()?;
            if inputs.iter().any(|d| d.name == n) {
                return Err(Error::Parse { line: at.0, col: at.1, msg: format!("input `{n}` declared twice") });
            }
            inputs.push(InputDecl { name: n, level, shading });
            match lx.peek() {
                Some(Tok::Sym(',')) => lx.pos += 1,
                Some(Tok::Sym(')')) => {
                    lx.pos += 1;
                    break;
                }
                _ => return lx.err("expected `,` or `)`"),
            }
        }
    }
    let output = if lx.peek() == Some(&Tok::Arrow) {
        lx.pos += 1;
        let l = lx.int()?;
        let s = lx.shading()?;
        Some((l, s))
    } else {
        None
    };
    lx.expect_sym('{')?;
    let mut layers = Vec::new();
    let mut spans = Vec::new();
    loop {
        let at = lx.here();
        let kw = match lx.peek() {
            Some(Tok::Sym('}')) => {
                lx.pos += 1;
                break;
            }
            Some(Tok::Ident(_)) => lx.ident()?,
            _ => return lx.err("expected a layer or `}`"),
        };
        let layer = match kw.as_str() {
            "load" => Layer::Load(lx.ident()?),
            "tensor" => Layer::Tensor(lx.ident()?),
            "cap" => Layer::Cap(lx.int()?),
            "cup" => {
                let i = lx.int()?;
                let s = match lx.peek() {
                    Some(Tok::Sym('+')) | Some(Tok::Sym('-')) => Some(lx.shading()?),
                    _ => None,
                };
                Layer::Cup(i, s)
            }
            "rotate" => Layer::Rotate,
            other => {
                return Err(Error::Parse { line: at.0, col: at.1, msg: format!("unknown layer `{other}`") })
            }
        };
        lx.expect_sym(';')?;
        layers.push(layer);
        spans.push(at);
    }
    if lx.peek().is_some() {
        return lx.err("trailing input after `}`");
    }
    let prog = TangleProgram { name, inputs, output, layers };
    check_layers(&prog, &spans)?;
    Ok(prog)
}

fn check_layers(p: &TangleProgram, spans: &[(usize, usize)]) -> Result<()> {
    let fail = |i: usize, msg: String| -> Error {
        let (line, col) = spans.get(i).copied().unwrap_or((1, 1));
        Error::Parse { line, col, msg }
    };
    match p.layers.first() {
        Some(Layer::Load(_)) => {}
        _ => return Err(fail(0, "a program starts with load".into())),
    }
    for (i, l) in p.layers.iter().enumerate() {
        if let Layer::Load(_) = l {
            if i > 0 {
                return Err(fail(i, "load may appear only once, first".into()));
            }
        }
        if let Layer::Load(n) | Layer::Tensor(n) = l {
            if !p.inputs.is_empty() && p.input(n).is_none() {
                return Err(fail(i, format!("undeclared input `{n}`")));
            }
        }
    }
    if p.inputs.is_empty() {
        return Ok(());
    }
    let lookup = |n: &str| -> Result<super::Shape> {
        let d = p.input(n).expect("checked above");
        Ok(super::Shape { points: 2 * d.level, shading: d.shading })
    };
    let mut shape = lookup(match &p.layers[0] {
        Layer::Load(n) => n,
        _ => unreachable!(),
    })?;
    for (i, l) in p.layers.iter().enumerate().skip(1) {
        shape = shape.step(l, lookup).map_err(|e| fail(i, e.to_string()))?;
    }
    if let Some((level, s)) = p.output {
        if shape.points != 2 * level || shape.shading != s {
            return Err(fail(
                p.layers.len().saturating_sub(1),
                format!("declared output {level}{s} but the program yields {}{}", shape.points / 2, shape.shading),
            ));
        }
    }
    Ok(())
}
