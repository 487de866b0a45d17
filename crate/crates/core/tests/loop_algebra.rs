mod common;

use common::{graph_by_index, random_elem, shading};
use gpa_core::algebra::{
    big_t, cup, cupcup, expect_step, include_n, include_step, involution, jones_projection, rotate, rotate_n,
    tl_generator, usual_mult, usual_unit, wedge, wedge0_power, wedge_loops,
};
use gpa_core::graph::{BipartiteGraph, Shading, WeightedGraph};
use gpa_core::{Element, Error, Loop};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

#[test]
fn wedge_of_loops_contracts_matching_edges() {
    let wg = WeightedGraph::a3();
    let g = &wg.graph;
    let x = Loop::parse(g, "e1 e1'").unwrap();
    let (l, w) = wedge_loops(&wg, 1, &x, &x).unwrap();
    assert_eq!(l.display(g), "e1 e1'");
    assert!((w - 1.0 / wg.sigma(g.edge_id("e1").unwrap())).abs() < 1e-12);
    let y = Loop::parse(g, "e2 e2'").unwrap();
    assert!(wedge_loops(&wg, 1, &x, &y).is_none());
    let (l0, w0) = wedge_loops(&wg, 0, &x, &y).unwrap();
    assert_eq!((l0.display(g).as_str(), w0), ("e1 e1' e2 e2'", 1.0));
}

#[test]
fn product_errors() {
    let wg = WeightedGraph::a3();
    let a = cup(&wg, Shading::Plus);
    assert!(matches!(wedge(&wg, 2, &a, &a), Err(Error::Level { .. })));
    let b = cup(&wg, Shading::Minus);
    assert!(matches!(wedge(&wg, 0, &a, &b), Err(Error::Shading)));
    assert!(usual_mult(&wg, &a, &usual_unit(&wg, 2, Shading::Plus)).is_err());
    assert!(rotate(&wg, &Element::unit0(&wg.graph, Shading::Plus)).is_err());
    assert!(expect_step(&wg, &Element::unit0(&wg.graph, Shading::Plus)).is_err());
    assert!(jones_projection(&wg, 1, Shading::Plus).is_err());
}

#[test]
fn nested_cup_is_cup_squared_on_the_single_edge_graph() {
    let wg = WeightedGraph::a2();
    let u = cup(&wg, Shading::Plus);
    let uu = cupcup(&wg, Shading::Plus);
    assert!(uu.rel_diff(&wedge0_power(&wg, &u, 2)) < TOL);
    assert!(uu.rel_diff(&u) > 0.5);
}

#[test]
fn big_t_is_sum_of_all_diagrams() {
    for (_, wg) in common::named_graphs() {
        assert!(big_t(&wg, 1, Shading::Plus).rel_diff(&cup(&wg, Shading::Plus)) < TOL);
        assert_eq!(big_t(&wg, 0, Shading::Plus), Element::unit0(&wg.graph, Shading::Plus));
    }
}

#[test]
fn temperley_lieb_relations() {
    for (name, wg) in common::named_graphs() {
        let d = wg.delta();
        for s in [Shading::Plus, Shading::Minus] {
            let k = 3;
            let one = usual_unit(&wg, k, s);
            let e1 = tl_generator(&wg, k, 1, s).unwrap();
            let e2 = tl_generator(&wg, k, 2, s).unwrap();
            let sq = usual_mult(&wg, &e1, &e1).unwrap();
            assert!(sq.rel_diff(&e1.scale(d)) < TOL, "{name}: generator squares to delta times itself");
            let braid = usual_mult(&wg, &usual_mult(&wg, &e1, &e2).unwrap(), &e1).unwrap();
            assert!(braid.rel_diff(&e1) < TOL, "{name}: e1 e2 e1 = e1");
            assert!(usual_mult(&wg, &one, &e2).unwrap().rel_diff(&e2) < TOL);
            let p = jones_projection(&wg, k, s).unwrap();
            assert!(usual_mult(&wg, &p, &p).unwrap().rel_diff(&p) < TOL);
        }
    }
}

#[test]
fn json_round_trip() {
    let wg = WeightedGraph::s4();
    let x = random_elem(&wg, 2, Shading::Minus, 3);
    let back = Element::from_json(&wg.graph, &x.to_json(&wg.graph)).unwrap();
    assert!(back.rel_diff(&x) < 1e-15);
    assert!(Element::from_json(&wg.graph, r#"{"level":1,"shading":"+","terms":[{"loop":"e1 e2","coeff":1}]}"#).is_err());
}

fn level_and_t() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (0usize..=2).prop_flat_map(|t| (Just(t), t..=t + 1, t..=t + 1, t..=t + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graded_product_is_associative(gi in 0usize..3, sh in any::<bool>(), (t, la, lb, lc) in level_and_t(), seed in any::<u64>()) {
        let wg = graph_by_index(gi);
        let s = shading(sh);
        let a = random_elem(&wg, la, s, seed);
        let b = random_elem(&wg, lb, s, seed ^ 1);
        let c = random_elem(&wg, lc, s, seed ^ 2);
        let left = wedge(&wg, t, &wedge(&wg, t, &a, &b).unwrap(), &c).unwrap();
        let right = wedge(&wg, t, &a, &wedge(&wg, t, &b, &c).unwrap()).unwrap();
        prop_assert!(left.rel_diff(&right) < TOL);
    }

    #[test]
    fn involution_reverses_products(gi in 0usize..3, sh in any::<bool>(), (t, la, lb, _) in level_and_t(), seed in any::<u64>()) {
        let wg = graph_by_index(gi);
        let s = shading(sh);
        let a = random_elem(&wg, la, s, seed);
        let b = random_elem(&wg, lb, s, seed ^ 1);
        let ab = wedge(&wg, t, &a, &b).unwrap();
        let lhs = involution(t, &ab).unwrap();
        let rhs = wedge(&wg, t, &involution(t, &b).unwrap(), &involution(t, &a).unwrap()).unwrap();
        prop_assert!(lhs.rel_diff(&rhs) < TOL);
        prop_assert!(involution(t, &lhs).unwrap().rel_diff(&ab) < 1e-15);
    }

    #[test]
    fn rotation_has_period_level(gi in 0usize..3, sh in any::<bool>(), k in 1usize..=3, seed in any::<u64>()) {
        let wg = graph_by_index(gi);
        let x = random_elem(&wg, k, shading(sh), seed);
        prop_assert!(rotate_n(&wg, &x, k).unwrap().rel_diff(&x) < TOL);
        if k > 1 && gi % 3 != 0 {
            prop_assert!(rotate(&wg, &x).unwrap().rel_diff(&x) > 1e-6);
        }
    }

    #[test]
    fn expectation_undoes_inclusion(gi in 0usize..3, sh in any::<bool>(), k in 0usize..=2, n in 1usize..=2, seed in any::<u64>()) {
        let wg = graph_by_index(gi);
        let x = random_elem(&wg, k, shading(sh), seed);
        let mut y = include_n(&wg, &x, n);
        prop_assert_eq!(y.level(), k + n);
        for _ in 0..n {
            y = expect_step(&wg, &y).unwrap();
        }
        prop_assert!(y.rel_diff(&x) < TOL);
    }

    #[test]
    fn inclusion_is_multiplicative(gi in 0usize..3, sh in any::<bool>(), k in 1usize..=2, seed in any::<u64>()) {
        let wg = graph_by_index(gi);
        let s = shading(sh);
        let a = random_elem(&wg, k, s, seed);
        let b = random_elem(&wg, k, s, seed ^ 7);
        let lhs = include_step(&wg, &usual_mult(&wg, &a, &b).unwrap());
        let rhs = usual_mult(&wg, &include_step(&wg, &a), &include_step(&wg, &b)).unwrap();
        prop_assert!(lhs.rel_diff(&rhs) < TOL);
    }

    #[test]
    fn units_are_neutral(gi in 0usize..3, sh in any::<bool>(), k in 0usize..=3, seed in any::<u64>()) {
        let wg = graph_by_index(gi);
        let s = shading(sh);
        let x = random_elem(&wg, k, s, seed);
        let u0 = Element::unit0(&wg.graph, s);
        prop_assert!(wedge(&wg, 0, &u0, &x).unwrap().rel_diff(&x) < TOL);
        prop_assert!(wedge(&wg, 0, &x, &u0).unwrap().rel_diff(&x) < TOL);
        let u = usual_unit(&wg, k, s);
        prop_assert!(usual_mult(&wg, &u, &x).unwrap().rel_diff(&x) < TOL);
        prop_assert!(usual_mult(&wg, &x, &u).unwrap().rel_diff(&x) < TOL);
    }

    #[test]
    fn usual_product_is_associative(gi in 0usize..3, sh in any::<bool>(), k in 1usize..=2, seed in any::<u64>()) {
        let wg = graph_by_index(gi);
        let s = shading(sh);
        let a = random_elem(&wg, k, s, seed);
        let b = random_elem(&wg, k, s, seed ^ 3);
        let c = random_elem(&wg, k, s, seed ^ 5);
        let l = usual_mult(&wg, &usual_mult(&wg, &a, &b).unwrap(), &c).unwrap();
        let r = usual_mult(&wg, &a, &usual_mult(&wg, &b, &c).unwrap()).unwrap();
        prop_assert!(l.rel_diff(&r) < TOL);
    }
}

#[test]
fn opposite_is_an_involution_on_edges() {
    let g = BipartiteGraph::star(3);
    for e in g.all_edges() {
        assert_eq!(BipartiteGraph::opposite(BipartiteGraph::opposite(e)), e);
        assert_eq!(g.source(e), g.target(BipartiteGraph::opposite(e)));
    }
}
