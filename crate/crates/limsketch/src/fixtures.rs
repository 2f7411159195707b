//! Small standard presentations and sketches used across tests, examples,
//! and the acceptance suite.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::category::{materialize, MaterializedCategory};
use crate::factorization::{realize, RealizationResult};
use crate::graph::{EdgeId, Graph, Gwi, ObjectId, Path};
use crate::presentation::Presentation;
use crate::sketch::{make_sketch, Cone, Diagram, LimitSketch};
use crate::{Bounds, DEFAULT_MAX_ITER};

fn oid(s: &str) -> ObjectId {
    ObjectId::new(s)
}

fn eid(s: &str) -> EdgeId {
    EdgeId::new(s)
}

/// TERM2: objects `a`, `t`, no edges, one empty-diagram cone at `t`
/// demanding that `t` become terminal.
pub fn term2() -> LimitSketch {
    let p = Presentation::new(Gwi::free(Graph::build(&["a", "t"], &[]).unwrap()).unwrap());
    let cone = Cone::new(
        "term",
        oid("t"),
        MaterializedCategory::discrete(&[]),
        Diagram::new(),
        BTreeMap::new(),
    );
    make_sketch(p, vec![cone]).unwrap()
}

/// PROD: objects `p`, `a`, `b` with projections `pi1`, `pi2` and a
/// discrete-index cone exhibiting `p` as the product of `a` and `b`.
/// Already realized.
pub fn prod() -> LimitSketch {
    let g = Graph::build(&["p", "a", "b"], &[("pi1", "p", "a"), ("pi2", "p", "b")]).unwrap();
    let p = Presentation::new(Gwi::free(g).unwrap());
    let index = MaterializedCategory::discrete(&["l", "r"]);
    let mut diagram = Diagram::new();
    diagram.map_object(oid("l"), oid("a"));
    diagram.map_object(oid("r"), oid("b"));
    diagram.map_morphism(index.identity_of(&oid("l")).unwrap(), Path::empty(oid("a")));
    diagram.map_morphism(index.identity_of(&oid("r")).unwrap(), Path::empty(oid("b")));
    let mut legs = BTreeMap::new();
    legs.insert(oid("l"), Path::new(oid("p"), vec![eid("pi1")]));
    legs.insert(oid("r"), Path::new(oid("p"), vec![eid("pi2")]));
    let cone = Cone::new("prod", oid("p"), index, diagram, legs);
    make_sketch(p, vec![cone]).unwrap()
}

/// SQ: objects `p`, `a` with `pi1, pi2 : p -> a` and one cone exhibiting
/// `p` as the product `a × a`. Not realized; the saturation loop closes it
/// at eight morphisms.
pub fn sq() -> LimitSketch {
    let g = Graph::build(&["p", "a"], &[("pi1", "p", "a"), ("pi2", "p", "a")]).unwrap();
    let p = Presentation::new(Gwi::free(g).unwrap());
    let index = MaterializedCategory::discrete(&["l", "r"]);
    let mut diagram = Diagram::new();
    diagram.map_object(oid("l"), oid("a"));
    diagram.map_object(oid("r"), oid("a"));
    diagram.map_morphism(index.identity_of(&oid("l")).unwrap(), Path::empty(oid("a")));
    diagram.map_morphism(index.identity_of(&oid("r")).unwrap(), Path::empty(oid("a")));
    let mut legs = BTreeMap::new();
    legs.insert(oid("l"), Path::new(oid("p"), vec![eid("pi1")]));
    legs.insert(oid("r"), Path::new(oid("p"), vec![eid("pi2")]));
    let cone = Cone::new("sq", oid("p"), index, diagram, legs);
    make_sketch(p, vec![cone]).unwrap()
}

/// The commuting square: `g.f = k.h`. Closes at nine morphisms.
pub fn square_presentation() -> Presentation {
    let g = Graph::build(
        &["a", "b", "c", "d"],
        &[("f", "a", "b"), ("g", "b", "d"), ("h", "a", "c"), ("k", "c", "d")],
    )
    .unwrap();
    let mut p = Presentation::new(Gwi::free(g).unwrap());
    let gf = Path::new(oid("a"), vec![eid("f"), eid("g")]);
    let kh = Path::new(oid("a"), vec![eid("h"), eid("k")]);
    p.add_relation(&gf, &kh).unwrap();
    p
}

/// The arrow category presentation: `bang : a -> t` and nothing else.
/// This is the realized form of TERM2.
pub fn arrow_presentation() -> Presentation {
    let g = Graph::build(&["a", "t"], &[("bang", "a", "t")]).unwrap();
    Presentation::new(Gwi::free(g).unwrap())
}

/// Parallel pair `f, g : a -> b`, no relations. Four morphisms.
pub fn parallel_pair_presentation() -> Presentation {
    let g = Graph::build(&["a", "b"], &[("f", "a", "b"), ("g", "a", "b")]).unwrap();
    Presentation::new(Gwi::free(g).unwrap())
}

/// Free triangle `a -> b -> c`. Six morphisms.
pub fn triangle_presentation() -> Presentation {
    let g = Graph::build(&["a", "b", "c"], &[("f", "a", "b"), ("g", "b", "c")]).unwrap();
    Presentation::new(Gwi::free(g).unwrap())
}

/// A free loop; never materializes.
pub fn loop_presentation() -> Presentation {
    let g = Graph::build(&["v"], &[("e", "v", "v")]).unwrap();
    Presentation::new(Gwi::free(g).unwrap())
}

/// A sketch with a genuine fork-shaped (parallel-pair) index: the cone at
/// `e` presents it as the equalizer of `u, v : x -> y`. The base carries
/// the relation `u.inc = v.inc` so the legs are natural; the extra edge
/// `w : x -> y` is unrelated and useful for negative tests.
pub fn fork_sketch() -> LimitSketch {
    let g = Graph::build(
        &["e", "x", "y"],
        &[("inc", "e", "x"), ("u", "x", "y"), ("v", "x", "y"), ("w", "x", "y")],
    )
    .unwrap();
    let mut p = Presentation::new(Gwi::free(g).unwrap());
    let u_inc = Path::new(oid("e"), vec![eid("inc"), eid("u")]);
    let v_inc = Path::new(oid("e"), vec![eid("inc"), eid("v")]);
    p.add_relation(&u_inc, &v_inc).unwrap();

    let index = {
        let g = Graph::build(&["i", "j"], &[("a1", "i", "j"), ("a2", "i", "j")]).unwrap();
        materialize(&Presentation::new(Gwi::free(g).unwrap()), 2, 8)
            .unwrap()
            .expect_done("fork index")
    };
    let mut diagram = Diagram::new();
    diagram.map_object(oid("i"), oid("x"));
    diagram.map_object(oid("j"), oid("y"));
    diagram.map_morphism(index.identity_of(&oid("i")).unwrap(), Path::empty(oid("x")));
    diagram.map_morphism(index.identity_of(&oid("j")).unwrap(), Path::empty(oid("y")));
    diagram.map_morphism(
        index.edge_class(&eid("a1")).unwrap(),
        Path::new(oid("x"), vec![eid("u")]),
    );
    diagram.map_morphism(
        index.edge_class(&eid("a2")).unwrap(),
        Path::new(oid("x"), vec![eid("v")]),
    );
    let mut legs = BTreeMap::new();
    legs.insert(oid("i"), Path::new(oid("e"), vec![eid("inc")]));
    legs.insert(oid("j"), u_inc);
    let cone = Cone::new("eq", oid("e"), index, diagram, legs);
    make_sketch(p, vec![cone]).unwrap()
}

/// The TERM2 realization, computed once. Stabilizes with one attachment.
pub fn realized_term2() -> &'static RealizationResult {
    static CELL: OnceLock<RealizationResult> = OnceLock::new();
    CELL.get_or_init(|| {
        realize(&term2(), DEFAULT_MAX_ITER, &Bounds::default()).expect("TERM2 realizes")
    })
}

/// The SQ realization, computed once. Stabilizes at eight morphisms.
pub fn realized_sq() -> &'static RealizationResult {
    static CELL: OnceLock<RealizationResult> = OnceLock::new();
    CELL.get_or_init(|| {
        realize(&sq(), DEFAULT_MAX_ITER, &Bounds::default()).expect("SQ realizes")
    })
}

/// The PROD realization, computed once. A zero-event fixpoint.
pub fn realized_prod() -> &'static RealizationResult {
    static CELL: OnceLock<RealizationResult> = OnceLock::new();
    CELL.get_or_init(|| {
        realize(&prod(), DEFAULT_MAX_ITER, &Bounds::default()).expect("PROD realizes")
    })
}

/// Presentations with at most eight morphisms when materialized, used as
/// targets when testing universal properties by exhaustive enumeration.
/// Each entry is (name, presentation, materialization).
pub fn pool_small() -> Vec<(&'static str, Presentation, MaterializedCategory)> {
    let mat = |p: &Presentation, name: &str| {
        materialize(p, 6, 64)
            .unwrap_or_else(|e| panic!("{name}: {e}"))
            .expect_done(name)
    };
    let terminal = Presentation::terminal();
    let discrete2 =
        Presentation::new(Gwi::free(Graph::build(&["a", "t"], &[]).unwrap()).unwrap());
    let entries = vec![
        ("terminal", terminal),
        ("discrete2", discrete2),
        ("arrow", arrow_presentation()),
        ("pair", parallel_pair_presentation()),
        ("prod", prod().base().clone()),
        ("triangle", triangle_presentation()),
    ];
    entries
        .into_iter()
        .map(|(name, p)| {
            let cat = mat(&p, name);
            (name, p, cat)
        })
        .collect()
}

/// The small pool extended with categories of up to ten morphisms.
pub fn pool_ten() -> Vec<(&'static str, Presentation, MaterializedCategory)> {
    let mut pool = pool_small();
    let square = square_presentation();
    let cat = materialize(&square, 6, 64).unwrap().expect_done("square");
    pool.push(("square", square, cat));
    pool
}
