//! One function per subcommand, each producing a `RunReport`.

use std::path::PathBuf;

use clap::{ArgGroup, Args};
use gpa_core::algebra::{big_t, cup, usual_unit, wedge0_power};
use gpa_core::fock::cup_moments;
use gpa_core::graph::{BipartiteGraph, Shading, WeightedGraph};
use gpa_core::matrix_model::{convergence_sweep, estimate_trace, BlockModelSpec, McEstimate};
use gpa_core::nc::{free_poisson_moments, MomentMethod};
use gpa_core::report::{ReportRow, RunReport};
use gpa_core::tangle::{equivalence_check, eval_tangle, parse_tangle, random_element, TangleProgram};
use gpa_core::trace::{gram_psd_check, inner_product, trace_k, CenterValue};
use gpa_core::{Element, ExecMode, Loop};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checks::{self, Check, SHADINGS};
use crate::{CliError, CliResult, Common};

const MODE: ExecMode = ExecMode::Parallel;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// A JSON file path, or a built-in graph name.
pub fn load_graph(spec: Option<&str>) -> CliResult<WeightedGraph> {
    let spec = spec.ok_or_else(|| usage("a graph is required (--graph FILE or a built-in name)"))?;
    let path = std::path::Path::new(spec);
    let g = if path.exists() {
        BipartiteGraph::load(path)?
    } else {
        BipartiteGraph::builtin(spec).ok_or_else(|| usage(format!("no graph file or built-in named `{spec}`")))?
    };
    Ok(WeightedGraph::new(g)?)
}

fn rng(c: &Common) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(c.seed)
}

fn push_checks(r: &mut RunReport, checks: &[Check], tol: f64) {
    for ch in checks {
        r.passed &= ch.passes(tol);
        r.push(ch.row());
    }
}

fn parse_shading(s: &str) -> Result<Shading, String> {
    Shading::parse(s).ok_or_else(|| format!("expected `+` or `-`, got `{s}`"))
}

pub fn graph_info(c: &Common, file: Option<String>) -> CliResult<RunReport> {
    let wg = load_graph(file.as_deref().or(c.graph.as_deref()))?;
    let g = &wg.graph;
    let mut r = RunReport::new("graph info").with_graph(&wg.graph);
    r.param("vertices", g.n_vertices());
    r.param("base_edges", g.n_base_edges());
    r.param("pf_iterations", wg.pf.iterations);
    r.push(ReportRow::value("delta", wg.delta()));
    for v in 0..g.n_vertices() {
        r.push(ReportRow::value(format!("mu[{}]", wg.name(v)), wg.mu(v)));
    }
    for e in g.all_edges() {
        r.push(ReportRow::value(format!("sigma[{}]", g.edge_name(e)), wg.sigma(e)));
    }
    let res = wg.pf.residual(g);
    r.passed = res <= c.tol;
    r.push(ReportRow::compared("pf_residual", res, 0.0));
    Ok(r)
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["lp", "element", "gram"])))]
pub struct TraceArgs {
    /// A single loop as whitespace-separated edge names.
    #[arg(long = "loop")]
    lp: Option<String>,
    /// An element as a JSON document.
    #[arg(long)]
    element: Option<PathBuf>,
    /// Trace level: closes all but the outer `k` string pairs.
    #[arg(long, default_value_t = 0)]
    k: usize,
    /// Check Gram positivity at this level instead.
    #[arg(long)]
    gram: Option<usize>,
    /// Shading for the Gram check; both when omitted.
    #[arg(long, value_parser = parse_shading, allow_hyphen_values = true)]
    shading: Option<Shading>,
}

fn closure_values(wg: &WeightedGraph, x: &Element, cl: &Element) -> CliResult<CenterValue> {
    let p = TangleProgram::closure(x.level(), x.shading(), false);
    let y = eval_tangle(wg, &p, &[("X", x), ("C", cl)])?;
    let mut out = CenterValue::zero(wg.graph.n_vertices());
    for (l, v) in y.iter() {
        out.values[l.base()] += v;
    }
    Ok(out)
}

pub fn trace(c: &Common, a: TraceArgs) -> CliResult<RunReport> {
    let wg = load_graph(c.graph.as_deref())?;
    let g = &wg.graph;
    let mut r = RunReport::new("trace").with_graph(g);
    if let Some(k) = a.gram {
        r.param("gram_level", k);
        let shadings: Vec<Shading> = a.shading.map(|s| vec![s]).unwrap_or(SHADINGS.to_vec());
        for s in shadings {
            let rep = gram_psd_check(&wg, k, s, MODE);
            for row in rep.rows {
                r.push(ReportRow::value(format!("gram_dim[{}]", row.vertex), row.dim as f64));
                r.push(ReportRow::value(format!("gram_min_eig[{}]", row.vertex), row.min_eig));
                r.push(ReportRow::value(format!("gram_max_eig[{}]", row.vertex), row.max_eig));
            }
            r.passed &= rep.pass;
        }
        return Ok(r);
    }
    let x = match (&a.lp, &a.element) {
        (Some(text), _) => {
            r.param("loop", text);
            Element::from_loop(g, Loop::parse(g, text)?, 1.0)
        }
        (_, Some(path)) => {
            r.param("element", path.display());
            Element::from_json(g, &std::fs::read_to_string(path).map_err(gpa_core::Error::from)?)?
        }
        _ => unreachable!("argument group requires one input"),
    };
    let m = x.level();
    r.param("level", m);
    r.param("k", a.k);
    let t = trace_k(&wg, a.k, &x)?;
    let oracle = if a.k == 0 {
        Some(closure_values(&wg, &x, &big_t(&wg, m, x.shading()))?)
    } else if a.k == m {
        Some(closure_values(&wg, &x, &usual_unit(&wg, m, x.shading()))?)
    } else {
        None
    };
    let norms = inner_product(&wg, &x, &x)?;
    for v in g.vertices_of(x.shading()) {
        let name = format!("trace[{}]", wg.name(v));
        match &oracle {
            Some(o) => {
                let row = ReportRow::compared(name, t.get(v), o.get(v));
                r.passed &= row.abs_err.unwrap_or(0.0) <= c.tol * o.get(v).abs().max(1.0);
                r.push(row);
            }
            None => r.push(ReportRow::value(name, t.get(v))),
        }
    }
    for v in g.vertices_of(x.shading()) {
        r.passed &= norms.get(v) >= -c.tol;
        r.push(ReportRow::value(format!("norm2[{}]", wg.name(v)), norms.get(v)));
    }
    Ok(r)
}

#[derive(Args)]
pub struct MomentsArgs {
    /// Highest moment.
    #[arg(long, default_value_t = 8)]
    n: usize,
}

pub fn moments(c: &Common, a: MomentsArgs) -> CliResult<RunReport> {
    let wg = load_graph(c.graph.as_deref())?;
    let g = &wg.graph;
    let mut r = RunReport::new("moments").with_graph(g);
    r.param("n", a.n);
    let d = wg.delta();
    let rec = free_poisson_moments(d, a.n, MomentMethod::Recursion)?;
    let others = [
        (MomentMethod::ClosedForm, free_poisson_moments(d, a.n, MomentMethod::ClosedForm)?),
        (MomentMethod::Narayana, free_poisson_moments(d, a.n, MomentMethod::Narayana)?),
    ];
    let evens = g.vertices_of(Shading::Plus);
    let u = cup(&wg, Shading::Plus);
    let fock: Vec<Vec<f64>> = evens.iter().map(|&v| cup_moments(&wg, v, a.n)).collect::<Result<_, _>>()?;
    let mut worst: f64 = 0.0;
    let mut compare = |r: &mut RunReport, name: String, value: f64, want: f64| {
        let row = ReportRow::compared(name, value, want);
        worst = worst.max(row.abs_err.unwrap_or(0.0) / want.abs().max(1.0));
        r.push(row);
    };
    for n in 0..=a.n {
        r.push(ReportRow::value(format!("m{n}.recursion"), rec[n]));
        for (method, vals) in &others {
            compare(&mut r, format!("m{n}.{}", method.name()), vals[n], rec[n]);
        }
        let tr = trace_k(&wg, 0, &wedge0_power(&wg, &u, n))?;
        for (i, &v) in evens.iter().enumerate() {
            compare(&mut r, format!("m{n}.trace[{}]", wg.name(v)), tr.get(v), rec[n]);
            compare(&mut r, format!("m{n}.fock[{}]", wg.name(v)), fock[i][n], rec[n]);
        }
    }
    let agree = worst <= c.tol;
    r.push(ReportRow::compared("all_agree", if agree { 1.0 } else { 0.0 }, 1.0));
    r.passed = agree;
    Ok(r)
}

#[derive(Args)]
pub struct TangleArgs {
    /// Tangle program file.
    file: PathBuf,
    /// Input element as NAME=FILE; undeclared-but-needed inputs are drawn at random.
    #[arg(long = "input", value_name = "NAME=FILE")]
    inputs: Vec<String>,
    /// Compare with a second program on random inputs instead of evaluating.
    #[arg(long)]
    equiv: Option<PathBuf>,
    /// Random trials per built-in graph for --equiv.
    #[arg(long, default_value_t = 5)]
    trials: usize,
}

fn read_program(path: &PathBuf) -> CliResult<TangleProgram> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    parse_tangle(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn tangle(c: &Common, a: TangleArgs) -> CliResult<RunReport> {
    let p = read_program(&a.file)?;
    p.validate()?;
    if let Some(other) = &a.equiv {
        let q = read_program(other)?;
        let rep = equivalence_check(&p, &q, a.trials, c.seed);
        let mut r = RunReport::new("tangle equiv");
        r.seed = Some(c.seed);
        r.param("first", a.file.display());
        r.param("second", other.display());
        r.param("trials", a.trials);
        r.param("detail", &rep.detail);
        r.push(ReportRow::compared("max_diff", rep.max_diff, 0.0));
        r.passed = rep.equal;
        return Ok(r);
    }
    let wg = load_graph(c.graph.as_deref())?;
    let g = &wg.graph;
    let mut r = RunReport::new("tangle").with_graph(g);
    r.param("program", a.file.display());
    let mut owned: Vec<(String, Element)> = Vec::new();
    for spec in &a.inputs {
        let (name, path) = spec.split_once('=').ok_or_else(|| usage(format!("--input expects NAME=FILE, got `{spec}`")))?;
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?;
        owned.push((name.to_string(), Element::from_json(g, &text)?));
    }
    let mut rng = rng(c);
    let mut drew = false;
    for d in &p.inputs {
        if !owned.iter().any(|(n, _)| *n == d.name) {
            owned.push((d.name.clone(), random_element(&wg, d.level, d.shading, &mut rng)));
            drew = true;
        }
    }
    if drew {
        r.seed = Some(c.seed);
    }
    let inputs: Vec<(&str, &Element)> = owned.iter().map(|(n, e)| (n.as_str(), e)).collect();
    let y = eval_tangle(&wg, &p, &inputs)?;
    r.param("output_level", y.level());
    r.param("output_shading", y.shading());
    for (l, v) in y.iter() {
        r.push(ReportRow::value(format!("coeff[{}]", l.display(g)), v));
    }
    Ok(r)
}

#[derive(Args)]
pub struct TowerArgs {
    /// Highest level checked (at least 2).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Random elements per level.
    #[arg(long, default_value_t = 3)]
    trials: usize,
}

pub fn tower(c: &Common, a: TowerArgs) -> CliResult<RunReport> {
    if a.k < 2 {
        return Err(usage("--k must be at least 2"));
    }
    let wg = load_graph(c.graph.as_deref())?;
    let mut r = RunReport::new("tower").with_graph(&wg.graph);
    r.seed = Some(c.seed);
    r.param("k", a.k);
    r.param("trials", a.trials);
    let checks = checks::tower(&wg, a.k, a.trials, &mut rng(c))?;
    push_checks(&mut r, &checks, c.tol);
    Ok(r)
}

#[derive(Args)]
pub struct FockArgs {
    /// Longest loop checked against the vacuum state.
    #[arg(long, default_value_t = 6)]
    max_len: usize,
    /// Path-length truncation; 10 or more adds the cup diagnostics.
    #[arg(long, default_value_t = 12)]
    depth: usize,
}

pub fn fock(c: &Common, a: FockArgs) -> CliResult<RunReport> {
    let wg = load_graph(c.graph.as_deref())?;
    let mut r = RunReport::new("fock").with_graph(&wg.graph);
    r.param("max_len", a.max_len);
    r.param("depth", a.depth);
    let checks = checks::fock(&wg, a.max_len, a.depth, MODE, c.tol)?;
    push_checks(&mut r, &checks, c.tol);
    Ok(r)
}

#[derive(Args)]
pub struct McArgs {
    /// Loop as whitespace-separated edge names.
    #[arg(long = "loop")]
    lp: String,
    /// Vertex at which the trace is read; the loop's base when omitted.
    #[arg(long)]
    vertex: Option<String>,
    /// Copies of each vertex block.
    #[arg(long = "N", default_value_t = 40)]
    n: usize,
    /// Block scale: vertex `v` gets `round(M mu(v))` rows.
    #[arg(long = "M", default_value_t = 40)]
    m: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Size grid such as `10x10,20x20,40x40`; replaces --N and --M.
    #[arg(long)]
    sweep: Option<String>,
}

fn parse_grid(s: &str) -> CliResult<Vec<(usize, usize)>> {
    s.split(',')
        .map(|p| {
            let (n, m) = p.trim().split_once('x').ok_or_else(|| usage(format!("bad grid entry `{p}`")))?;
            let n = n.parse().map_err(|_| usage(format!("bad N in `{p}`")))?;
            let m = m.parse().map_err(|_| usage(format!("bad M in `{p}`")))?;
            Ok((n, m))
        })
        .collect()
}

fn push_estimate(r: &mut RunReport, e: &McEstimate, suffix: &str) {
    r.push(ReportRow::compared(format!("estimate{suffix}"), e.estimate, e.target));
    r.push(ReportRow::value(format!("stderr{suffix}"), e.stderr));
}

pub fn mc(c: &Common, a: McArgs) -> CliResult<RunReport> {
    let wg = load_graph(c.graph.as_deref())?;
    let g = &wg.graph;
    let w = Loop::parse(g, &a.lp)?;
    let v = match &a.vertex {
        Some(name) => g.vertex_id(name)?,
        None => w.base(),
    };
    let mut r = RunReport::new("mc").with_graph(g);
    r.seed = Some(c.seed);
    r.param("loop", &a.lp);
    r.param("vertex", wg.name(v));
    r.param("samples", a.samples);
    match &a.sweep {
        None => {
            r.param("N", a.n);
            r.param("M", a.m);
            let spec = BlockModelSpec::new(&wg, a.n, a.m, c.seed)?;
            let e = estimate_trace(&wg, &spec, &w, v, a.samples, MODE)?;
            push_estimate(&mut r, &e, "");
            r.passed = e.within_band();
        }
        Some(grid) => {
            if v != w.base() {
                return Err(usage("--sweep reads the trace at the loop's base vertex"));
            }
            let grid = parse_grid(grid)?;
            r.param("grid", grid.iter().map(|(n, m)| format!("{n}x{m}")).collect::<Vec<_>>().join(","));
            let rep = convergence_sweep(&wg, std::slice::from_ref(&w), &grid, a.samples, c.seed, MODE)?;
            for e in &rep.rows {
                push_estimate(&mut r, e, &format!("[{}x{}]", e.n, e.m));
            }
            r.push(ReportRow::compared("trend_ok", if rep.trend_ok { 1.0 } else { 0.0 }, 1.0));
            r.passed = rep.all_within_band && rep.trend_ok;
        }
    }
    Ok(r)
}

#[derive(Args)]
pub struct SelftestArgs {
    /// Loop length bound for the Fock checks.
    #[arg(long, default_value_t = 6)]
    max_len: usize,
    /// Fock truncation depth.
    #[arg(long, default_value_t = 12)]
    depth: usize,
}

pub fn selftest(c: &Common, a: SelftestArgs) -> CliResult<RunReport> {
    let mut r = RunReport::new("selftest");
    r.seed = Some(c.seed);
    r.param("graphs", "a2,a3,s4");
    let mut rng = rng(c);
    for (name, wg) in [("a2", WeightedGraph::a2()), ("a3", WeightedGraph::a3()), ("s4", WeightedGraph::s4())] {
        let mut all = Vec::new();
        all.extend(checks::algebra(&wg, &mut rng)?);
        all.extend(checks::tower(&wg, 3, 2, &mut rng)?);
        all.extend(checks::traces(&wg, &mut rng, MODE)?);
        all.extend(checks::tangles(&wg, &mut rng)?);
        all.extend(checks::fock(&wg, a.max_len, a.depth, MODE, c.tol)?);
        for ch in &mut all {
            ch.name = format!("{name}.{}", ch.name);
        }
        push_checks(&mut r, &all, c.tol);
    }
    Ok(r)
}
