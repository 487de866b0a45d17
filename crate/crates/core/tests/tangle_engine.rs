mod common;

use common::{graph_by_index, random_elem, shading};
use gpa_core::algebra::{big_t, rotate, wedge};
use gpa_core::graph::{Shading, WeightedGraph};
use gpa_core::tangle::{equivalence_check, eval_tangle, parse_tangle, InputDecl, Layer, TangleProgram};
use gpa_core::Error;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn parse_err(text: &str) -> (usize, usize, String) {
    match parse_tangle(text) {
        Err(Error::Parse { line, col, msg }) => (line, col, msg),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn cap_on_level_one_input_gives_level_zero() {
    let p = parse_tangle("tangle { load A; cap 1; }").unwrap();
    let wg = WeightedGraph::a3();
    let a = random_elem(&wg, 1, Shading::Plus, 1);
    let y = eval_tangle(&wg, &p, &[("A", &a)]).unwrap();
    assert_eq!(y.level(), 0);
}

#[test]
fn syntax_errors_carry_positions() {
    let (line, col, _) = parse_err("tangle {\n  load A\n  cap 1;\n}");
    assert_eq!((line, col), (3, 3));
    let (line, col, msg) = parse_err("tangle {\n  load A;\n  twist 2;\n}");
    assert_eq!((line, col), (3, 3));
    assert!(msg.contains("twist"));
    let (line, _, _) = parse_err("knot { load A; }");
    assert_eq!(line, 1);
    let (line, col, _) = parse_err("tangle (A: 1+, A: 1+) { load A; }");
    assert_eq!((line, col), (1, 16));
    assert!(parse_tangle("tangle { load A; } extra").is_err());
    assert!(parse_tangle("tangle { cap 1; }").is_err());
    assert!(parse_tangle("tangle { load A; load B; }").is_err());
}

#[test]
fn range_and_shading_errors() {
    let (line, col, msg) = parse_err("tangle (A: 2+) {\n  load A;\n  cap 5;\n}");
    assert_eq!((line, col), (3, 3));
    assert!(msg.contains("out of range"));
    assert!(parse_tangle("tangle (A: 2+) { load A; cap 3; }").is_ok());
    assert!(parse_tangle("tangle (A: 1+) { load A; cup 1 -; }").is_ok());
    assert!(parse_tangle("tangle (A: 1+) { load A; cup 1 +; }").is_err());
    assert!(parse_tangle("tangle (A: 1+, B: 1-) { load A; tensor B; }").is_err());
    assert!(parse_tangle("tangle (A: 1+) { load A; tensor B; }").is_err());
    assert!(parse_tangle("tangle (A: 1+) -> 1 + { load A; cap 1; }").is_err());
    assert!(parse_tangle("tangle (A: 0+) { load A; rotate; }").is_err());
}

#[test]
fn evaluation_checks_inputs() {
    let wg = WeightedGraph::a3();
    let p = parse_tangle("tangle (A: 1+) { load A; cap 1; }").unwrap();
    let a = random_elem(&wg, 1, Shading::Plus, 2);
    assert!(matches!(eval_tangle(&wg, &p, &[]), Err(Error::Tangle(_))));
    let wrong_level = random_elem(&wg, 2, Shading::Plus, 2);
    assert!(matches!(eval_tangle(&wg, &p, &[("A", &wrong_level)]), Err(Error::Level { .. })));
    let wrong_shading = random_elem(&wg, 1, Shading::Minus, 2);
    assert!(matches!(eval_tangle(&wg, &p, &[("A", &wrong_shading)]), Err(Error::Shading)));
    assert!(eval_tangle(&wg, &p, &[("A", &a)]).is_ok());
}

#[test]
fn triple_product_bracketings_agree() {
    let left = parse_tangle("tangle (A: 2+, B: 2+, C: 2+) { load A; tensor B; cap 4; tensor C; cap 6; }").unwrap();
    let right = parse_tangle("tangle (A: 2+, B: 2+, C: 2+) { load A; tensor B; tensor C; cap 8; cap 4; }").unwrap();
    let r = equivalence_check(&left, &right, 3, 11);
    assert!(r.equal, "{}", r.detail);
    let wg = WeightedGraph::s4();
    let s = Shading::Plus;
    let (a, b, c) = (random_elem(&wg, 2, s, 1), random_elem(&wg, 2, s, 2), random_elem(&wg, 2, s, 3));
    let want = wedge(&wg, 1, &wedge(&wg, 1, &a, &b).unwrap(), &c).unwrap();
    let got = eval_tangle(&wg, &left, &[("A", &a), ("B", &b), ("C", &c)]).unwrap();
    assert!(got.rel_diff(&want) < TOL);
}

#[test]
fn cap_and_cup_commute_when_disjoint() {
    let a = parse_tangle("tangle (X: 2-) { load X; cup 5; cap 1; }").unwrap();
    let b = parse_tangle("tangle (X: 2-) { load X; cap 1; cup 3; }").unwrap();
    assert!(equivalence_check(&a, &b, 3, 5).equal);
}

#[test]
fn closure_position_is_irrelevant_for_the_diagram_sum() {
    for m in 1..=3 {
        for s in [Shading::Plus, Shading::Minus] {
            let a = TangleProgram::closure(m, s, false);
            let b = TangleProgram::closure(m, s, true);
            for (_, wg) in common::named_graphs() {
                let x = random_elem(&wg, m, s, m as u64);
                let t = big_t(&wg, m, s);
                let ya = eval_tangle(&wg, &a, &[("X", &x), ("C", &t)]).unwrap();
                let yb = eval_tangle(&wg, &b, &[("X", &x), ("C", &t)]).unwrap();
                assert!(ya.rel_diff(&yb) < TOL);
            }
        }
    }
}

#[test]
fn unequal_programs_are_reported() {
    let a = parse_tangle("tangle (X: 1+) { load X; cup 1; cap 1; }").unwrap();
    let b = parse_tangle("tangle (X: 1+) { load X; rotate; }").unwrap();
    let r = equivalence_check(&a, &b, 3, 1);
    assert!(!r.equal);
    let c = parse_tangle("tangle (Y: 1+) { load Y; }").unwrap();
    assert!(!equivalence_check(&a, &c, 3, 1).equal);
}

#[test]
fn composed_programs() {
    let first = parse_tangle("tangle (A: 1+, B: 1+) { load A; tensor B; }").unwrap();
    let second = parse_tangle("tangle (X: 2+) -> 1 + { load X; cap 2; }").unwrap();
    let both = first.then(&second).unwrap();
    assert_eq!(both.validate().unwrap().points, 2);
    let direct = TangleProgram::wedge(1, 1, 1, Shading::Plus);
    assert!(equivalence_check(&both, &direct, 3, 2).equal);
}

fn random_program() -> impl Strategy<Value = TangleProgram> {
    (0usize..=3, any::<bool>(), proptest::collection::vec((0u8..3, any::<u16>(), any::<bool>()), 0..8), any::<bool>())
        .prop_map(|(level, sh, ops, named)| {
            let s = shading(sh);
            let mut points = 2 * level;
            let mut layers = vec![Layer::Load("X".into())];
            for (kind, pos, sign) in ops {
                match kind {
                    0 if points >= 2 => {
                        layers.push(Layer::Cap(1 + pos as usize % (points - 1)));
                        points -= 2;
                    }
                    1 => {
                        let i = 1 + pos as usize % (points + 1);
                        let inner = if (i - 1).is_multiple_of(2) { s.flip() } else { s };
                        layers.push(Layer::Cup(i, sign.then_some(inner)));
                        points += 2;
                    }
                    _ if points >= 2 => layers.push(Layer::Rotate),
                    _ => {}
                }
            }
            TangleProgram {
                name: named.then(|| "p".to_string()),
                inputs: vec![InputDecl { name: "X".into(), level, shading: s }],
                output: Some((points / 2, s)),
                layers,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(p in random_program()) {
        prop_assert!(p.validate().is_ok());
        let back = parse_tangle(&p.print()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn closed_strings_and_zigzags(gi in 0usize..3, sh in any::<bool>(), m in 0usize..=2, pos in any::<u16>(), seed in any::<u64>()) {
        let wg = graph_by_index(gi);
        let s = shading(sh);
        let x = random_elem(&wg, m, s, seed);
        let i = 1 + pos as usize % (2 * m + 1);
        let loop_prog = TangleProgram::unary(m, s, vec![Layer::Cup(i, None), Layer::Cap(i)]);
        let y = eval_tangle(&wg, &loop_prog, &[("X", &x)]).unwrap();
        prop_assert!(y.rel_diff(&x.scale(wg.delta())) < TOL);
        if i >= 2 {
            let z = TangleProgram::unary(m, s, vec![Layer::Cup(i, None), Layer::Cap(i - 1)]);
            prop_assert!(eval_tangle(&wg, &z, &[("X", &x)]).unwrap().rel_diff(&x) < TOL);
        }
        if i <= 2 * m {
            let z = TangleProgram::unary(m, s, vec![Layer::Cup(i, None), Layer::Cap(i + 1)]);
            prop_assert!(eval_tangle(&wg, &z, &[("X", &x)]).unwrap().rel_diff(&x) < TOL);
        }
    }

    #[test]
    fn rotate_layer_matches_rotation(gi in 0usize..3, sh in any::<bool>(), m in 1usize..=3, seed in any::<u64>()) {
        let wg = graph_by_index(gi);
        let s = shading(sh);
        let x = random_elem(&wg, m, s, seed);
        let once = eval_tangle(&wg, &TangleProgram::unary(m, s, vec![Layer::Rotate]), &[("X", &x)]).unwrap();
        prop_assert!(once.rel_diff(&rotate(&wg, &x).unwrap()) < TOL);
        let full = eval_tangle(&wg, &TangleProgram::unary(m, s, vec![Layer::Rotate; m]), &[("X", &x)]).unwrap();
        prop_assert!(full.rel_diff(&x) < TOL);
    }

    #[test]
    fn wedge_tangles_match_products(gi in 0usize..3, sh in any::<bool>(), t in 0usize..=2, da in 0usize..=1, db in 0usize..=1, seed in any::<u64>()) {
        let wg = graph_by_index(gi);
        let s = shading(sh);
        let (ma, mb) = (t.max(1) + da, t.max(1) + db);
        let a = random_elem(&wg, ma, s, seed);
        let b = random_elem(&wg, mb, s, seed ^ 1);
        let via = eval_tangle(&wg, &TangleProgram::wedge(ma, mb, t, s), &[("A", &a), ("B", &b)]).unwrap();
        prop_assert!(via.rel_diff(&wedge(&wg, t, &a, &b).unwrap()) < TOL);
    }
}
