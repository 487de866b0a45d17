//! Identity checks shared by `tower`, `fock` and `selftest`.

use gpa_core::algebra::{
    big_t, expect_step, include_n, include_step, involution, jones_projection, rotate_n, tl_generator, usual_mult,
    usual_unit, wedge,
};
use gpa_core::fock::{commutator_diagnostics, homomorphism_check, oracle_check_trace};
use gpa_core::graph::{Shading, WeightedGraph};
use gpa_core::report::ReportRow;
use gpa_core::tangle::{eval_tangle, parse_tangle, random_element, Layer, TangleProgram};
use gpa_core::trace::{gram_psd_check, phi_loop_pairing, phi_loop_recursive, trace_k, CenterValue};
use gpa_core::{Element, ExecMode, Result};
use rand_chacha::ChaCha8Rng;

pub const SHADINGS: [Shading; 2] = [Shading::Plus, Shading::Minus];

/// A computed value and the value it should equal.
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
}

impl Check {
    pub fn dev(name: impl Into<String>, dev: f64) -> Check {
        Check { name: name.into(), value: dev, expected: 0.0 }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Check {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, expected: 1.0 }
    }

    pub fn passes(&self, tol: f64) -> bool {
        (self.value - self.expected).abs() <= tol * self.expected.abs().max(1.0)
    }

    pub fn row(&self) -> ReportRow {
        ReportRow::compared(self.name.clone(), self.value, self.expected)
    }
}

fn diff(a: &Element, b: &Element) -> f64 {
    a.sub(b).max_abs()
}

fn level0_values(wg: &WeightedGraph, x: &Element) -> CenterValue {
    let mut out = CenterValue::zero(wg.graph.n_vertices());
    for (l, c) in x.iter() {
        out.values[l.base()] += c;
    }
    out
}

/// Temperley-Lieb relations, Jones projections, tower maps and the Markov property up to level `kmax`.
pub fn tower(wg: &WeightedGraph, kmax: usize, trials: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let d = wg.delta();
    let mut out = Vec::new();
    for s in SHADINGS {
        let (mut rel, mut proj, mut inv, mut exe, mut markov, mut mult) = (0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
        for k in 2..=kmax {
            let m = |a: &Element, b: &Element| usual_mult(wg, a, b);
            let e: Vec<Element> = (1..k).map(|i| tl_generator(wg, k, i, s)).collect::<Result<_>>()?;
            for i in 0..k - 1 {
                rel = rel.max(diff(&m(&e[i], &e[i])?, &e[i].scale(d)));
                for j in 0..k - 1 {
                    if i.abs_diff(j) == 1 {
                        rel = rel.max(diff(&m(&m(&e[i], &e[j])?, &e[i])?, &e[i]));
                    } else if i.abs_diff(j) >= 2 {
                        rel = rel.max(diff(&m(&e[i], &e[j])?, &m(&e[j], &e[i])?));
                    }
                }
            }
            let p = jones_projection(wg, k, s)?;
            proj = proj.max(diff(&m(&p, &p)?, &p)).max(diff(&involution(k, &p)?, &p));
            for _ in 0..trials {
                let x1 = random_element(wg, k - 1, s.flip(), rng);
                let x = include_step(wg, &x1);
                inv = inv.max(diff(&expect_step(wg, &x)?, &x1));
                let lhs = m(&m(&p, &x)?, &p)?;
                let rhs = m(&include_n(wg, &expect_step(wg, &x1)?, 2), &p)?;
                exe = exe.max(diff(&lhs, &rhs));
                let left = d * scalar(wg, k, &m(&x, &p)?)?;
                markov = markov.max((left - scalar(wg, k - 1, &x1)?).abs());
                let y1 = random_element(wg, k - 1, s.flip(), rng);
                let prod = include_step(wg, &m(&x1, &y1)?);
                mult = mult.max(diff(&prod, &m(&x, &include_step(wg, &y1))?));
            }
        }
        out.push(Check::dev(format!("tower{s}.generator_relations"), rel));
        out.push(Check::dev(format!("tower{s}.projection"), proj));
        out.push(Check::dev(format!("tower{s}.expectation_inverts_inclusion"), inv));
        out.push(Check::dev(format!("tower{s}.exe"), exe));
        out.push(Check::dev(format!("tower{s}.markov"), markov));
        out.push(Check::dev(format!("tower{s}.inclusion_multiplicative"), mult));
    }
    Ok(out)
}

fn scalar(wg: &WeightedGraph, k: usize, x: &Element) -> Result<f64> {
    gpa_core::trace::scalar_trace(wg, k, x)
}

/// Associativity, involution, rotation period and units of the graded products.
pub fn algebra(wg: &WeightedGraph, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let (mut assoc, mut invo, mut rot, mut unit) = (0f64, 0f64, 0f64, 0f64);
    for s in SHADINGS {
        for t in 0..=2 {
            let lv = t.max(1);
            let a = random_element(wg, lv, s, rng);
            let b = random_element(wg, lv + 1, s, rng);
            let c = random_element(wg, lv, s, rng);
            let l = wedge(wg, t, &wedge(wg, t, &a, &b)?, &c)?;
            let r = wedge(wg, t, &a, &wedge(wg, t, &b, &c)?)?;
            assoc = assoc.max(diff(&l, &r));
            let ab = wedge(wg, t, &a, &b)?;
            let rev = wedge(wg, t, &involution(t, &b)?, &involution(t, &a)?)?;
            invo = invo.max(diff(&involution(t, &ab)?, &rev));
        }
        for k in 0..=3 {
            let x = random_element(wg, k, s, rng);
            if k > 0 {
                rot = rot.max(diff(&rotate_n(wg, &x, k)?, &x));
            }
            let u = usual_unit(wg, k, s);
            unit = unit.max(diff(&usual_mult(wg, &u, &x)?, &x)).max(diff(&usual_mult(wg, &x, &u)?, &x));
            let u0 = Element::unit0(&wg.graph, s);
            unit = unit.max(diff(&wedge(wg, 0, &u0, &x)?, &x));
        }
    }
    Ok(vec![
        Check::dev("algebra.associativity", assoc),
        Check::dev("algebra.involution_reverses_products", invo),
        Check::dev("algebra.rotation_period", rot),
        Check::dev("algebra.units", unit),
    ])
}

/// Trace property, closure-tangle agreement, vertex-state methods and Gram positivity.
pub fn traces(wg: &WeightedGraph, rng: &mut ChaCha8Rng, mode: ExecMode) -> Result<Vec<Check>> {
    let g = &wg.graph;
    let (mut tracial, mut closure, mut phi) = (0f64, 0f64, 0f64);
    let mut gram_ok = true;
    for s in SHADINGS {
        for k in 1..=3 {
            let a = random_element(wg, k, s, rng);
            let b = random_element(wg, k, s, rng);
            let ab = trace_k(wg, k, &usual_mult(wg, &a, &b)?)?;
            let ba = trace_k(wg, k, &usual_mult(wg, &b, &a)?)?;
            tracial = tracial.max(ab.max_abs_diff(&ba));
        }
        for m in 1..=2 {
            let x = random_element(wg, m, s, rng);
            let p = TangleProgram::closure(m, s, false);
            let t = big_t(wg, m, s);
            let via = level0_values(wg, &eval_tangle(wg, &p, &[("X", &x), ("C", &t)])?);
            closure = closure.max(via.max_abs_diff(&trace_k(wg, 0, &x)?));
            let one = usual_unit(wg, m, s);
            let via = level0_values(wg, &eval_tangle(wg, &p, &[("X", &x), ("C", &one)])?);
            closure = closure.max(via.max_abs_diff(&trace_k(wg, m, &x)?));
        }
        for k in 0..=3 {
            gram_ok &= gram_psd_check(wg, k, s, mode).pass;
        }
    }
    for v in 0..g.n_vertices() {
        for k in 1..=3 {
            for l in g.loops_at(v, k) {
                phi = phi.max((phi_loop_pairing(wg, &l, v) - phi_loop_recursive(wg, &l, v)).abs());
            }
        }
    }
    Ok(vec![
        Check::dev("trace.tracial", tracial),
        Check::dev("trace.closure_oracle", closure),
        Check::dev("trace.vertex_state_methods", phi),
        Check::flag("trace.gram_positive", gram_ok),
    ])
}

/// Closed strings, zigzags, product tangles and printing.
pub fn tangles(wg: &WeightedGraph, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let d = wg.delta();
    let (mut capcup, mut zigzag, mut wedges) = (0f64, 0f64, 0f64);
    let mut printing = true;
    for s in SHADINGS {
        for m in 0..=2 {
            let x = random_element(wg, m, s, rng);
            for i in 1..=2 * m + 1 {
                let p = TangleProgram::unary(m, s, vec![Layer::Cup(i, None), Layer::Cap(i)]);
                capcup = capcup.max(diff(&eval_tangle(wg, &p, &[("X", &x)])?, &x.scale(d)));
                let mut sides = Vec::new();
                if i >= 2 {
                    sides.push(i - 1);
                }
                if i <= 2 * m {
                    sides.push(i + 1);
                }
                for j in sides {
                    let p = TangleProgram::unary(m, s, vec![Layer::Cup(i, None), Layer::Cap(j)]);
                    zigzag = zigzag.max(diff(&eval_tangle(wg, &p, &[("X", &x)])?, &x));
                }
            }
        }
        for t in 0..=2 {
            let (ma, mb) = (t.max(1), t.max(1) + 1);
            let a = random_element(wg, ma, s, rng);
            let b = random_element(wg, mb, s, rng);
            let prog = TangleProgram::wedge(ma, mb, t, s);
            wedges = wedges.max(diff(&eval_tangle(wg, &prog, &[("A", &a), ("B", &b)])?, &wedge(wg, t, &a, &b)?));
            printing &= parse_tangle(&prog.print()).map(|q| q == prog).unwrap_or(false);
        }
    }
    Ok(vec![
        Check::dev("tangle.closed_string", capcup),
        Check::dev("tangle.zigzag", zigzag),
        Check::dev("tangle.products", wedges),
        Check::flag("tangle.print_parse", printing),
    ])
}

/// Fock-space oracle agreement: vacuum states, homomorphisms, vector norms and cup structure.
pub fn fock(wg: &WeightedGraph, max_len: usize, depth: usize, mode: ExecMode, tol: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let r = oracle_check_trace(wg, max_len, depth.max(max_len), tol)?;
    out.push(Check::dev("fock.vacuum_state", r.max_dev));
    for t in 0..=1 {
        let h = homomorphism_check(wg, max_len.min(4), t, 2, mode)?;
        out.push(Check::dev(format!("fock.homomorphism_t{t}"), h.max_dev));
    }
    if depth >= 10 {
        let c = commutator_diagnostics(wg, depth)?;
        for (k, got, want) in &c.xi_norms {
            out.push(Check { name: format!("fock.xi_norm_{k}"), value: *got, expected: *want });
        }
        out.push(Check::dev("fock.cup_decomposition", c.cup_decomposition_dev));
        out.push(Check::dev("fock.included_loops_commute", c.pk_commutation_dev));
        out.push(Check::dev("fock.nested_cup_weights", c.cupcup_weight_gap));
    }
    Ok(out)
}
