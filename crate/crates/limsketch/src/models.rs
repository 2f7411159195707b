//! Finite-Set models of limit sketches: carriers are canonical initial
//! segments {0..k-1}, edge actions are function tables, and a model must
//! satisfy every relation and send every specified cone to a limit cone
//! (the canonical comparison into the set of compatible tuples is a
//! bijection).
//!
//! Models of a sketch and of its realization are in bijection: restriction
//! along the realization unit goes one way, and replaying the saturation
//! trace (each attached filler gets the unique limit-induced function)
//! goes back.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::category::{materialize_bounded, MaterializedCategory};
use crate::error::{Error, Result};
use crate::factorization::{RealizationResult, SoaEvent};
use crate::graph::{EdgeId, ObjectId, Path};
use crate::presentation::Presentation;
use crate::sketch::{Cone, LimitSketch};
use crate::{Bounded, Bounds};

/// A finite-Set assignment: carrier sizes per object and a function table
/// per non-identity generating edge (`action[e][x]` is the image of `x`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Model {
    carrier: BTreeMap<ObjectId, usize>,
    action: BTreeMap<EdgeId, Vec<usize>>,
}

impl Model {
    pub fn new(carrier: BTreeMap<ObjectId, usize>, action: BTreeMap<EdgeId, Vec<usize>>) -> Model {
        Model { carrier, action }
    }

    pub fn carrier_size(&self, o: &ObjectId) -> Result<usize> {
        self.carrier
            .get(o)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(o.clone()))
    }

    pub fn carriers(&self) -> impl Iterator<Item = (&ObjectId, usize)> {
        self.carrier.iter().map(|(o, k)| (o, *k))
    }

    pub fn action(&self, e: &EdgeId) -> Result<&[usize]> {
        self.action
            .get(e)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownEdge(e.clone()))
    }

    pub fn actions(&self) -> impl Iterator<Item = (&EdgeId, &[usize])> {
        self.action.iter().map(|(e, t)| (e, t.as_slice()))
    }

    /// Apply a path to an element of the carrier of its start.
    pub fn eval_path(&self, p: &Presentation, path: &Path, x: usize) -> Result<usize> {
        let mut at = x;
        for e in path.edges() {
            if p.generators().is_identity_edge(e) {
                continue;
            }
            let table = self.action(e)?;
            at = *table
                .get(at)
                .ok_or_else(|| Error::Validation(format!("element {at} outside carrier")))?;
        }
        Ok(at)
    }

    /// Check the typing of the tables against a presentation.
    fn well_typed(&self, p: &Presentation) -> Result<()> {
        for o in p.objects() {
            self.carrier_size(o)?;
        }
        for (e, s, t) in p.generators().non_identity_edges() {
            let table = self.action(e)?;
            if table.len() != self.carrier_size(s)? {
                return Err(Error::Validation(format!(
                    "action of `{e}` has domain size {}, carrier of `{s}` has {}",
                    table.len(),
                    self.carrier_size(s)?
                )));
            }
            let cod = self.carrier_size(t)?;
            if table.iter().any(|&v| v >= cod) {
                return Err(Error::Validation(format!(
                    "action of `{e}` escapes the carrier of `{t}`"
                )));
            }
        }
        Ok(())
    }
}

/// The limit of a cone's diagram in finite sets: every tuple of elements
/// over the index objects compatible with every index morphism. Tuples
/// are in lexicographic order.
fn limit_tuples(s: &Presentation, cone: &Cone, m: &Model) -> Result<Vec<Vec<usize>>> {
    let index_objects: Vec<ObjectId> = cone.index().objects().to_vec();
    if index_objects.is_empty() {
        return Ok(vec![Vec::new()]); // the empty tuple: a one-point limit
    }
    let ranges: Vec<Vec<usize>> = index_objects
        .iter()
        .map(|i| {
            let io = cone.diagram().object_image(i)?;
            Ok((0..m.carrier_size(io)?).collect())
        })
        .collect::<Result<_>>()?;
    if ranges.iter().any(|r| r.is_empty()) {
        return Ok(Vec::new());
    }
    let position: BTreeMap<&ObjectId, usize> = index_objects
        .iter()
        .enumerate()
        .map(|(n, i)| (i, n))
        .collect();
    let mut out = Vec::new();
    'tuple: for tuple in ranges.into_iter().multi_cartesian_product() {
        for f in cone.index().morphisms() {
            if cone.index().is_identity(f) {
                continue;
            }
            let (i, j) = (cone.index().src(f), cone.index().tgt(f));
            let image = cone.diagram().morphism_image(f)?;
            if m.eval_path(s, image, tuple[position[i]])? != tuple[position[j]] {
                continue 'tuple;
            }
        }
        out.push(tuple);
    }
    Ok(out)
}

/// Does the model send the cone to a limit cone? The comparison
/// `carrier(apex) -> limit` given by the legs must be a bijection.
fn cone_is_limit(s: &Presentation, cone: &Cone, m: &Model) -> Result<bool> {
    let tuples = limit_tuples(s, cone, m)?;
    let index_objects: Vec<ObjectId> = cone.index().objects().to_vec();
    let apex_size = m.carrier_size(cone.apex())?;
    let mut seen = std::collections::BTreeSet::new();
    for x in 0..apex_size {
        let image: Vec<usize> = index_objects
            .iter()
            .map(|i| m.eval_path(s, cone.leg(i)?, x))
            .collect::<Result<_>>()?;
        if !tuples.contains(&image) {
            return Ok(false); // legs do not even land in the limit
        }
        if !seen.insert(image) {
            return Ok(false); // not injective
        }
    }
    Ok(seen.len() == tuples.len())
}

/// Is `m` a model of the sketch: well typed, all relations hold pointwise,
/// and every specified cone becomes a limit cone in finite sets.
pub fn is_model(s: &LimitSketch, m: &Model) -> Result<bool> {
    m.well_typed(s.base())?;
    for rel in s.base().relations() {
        let size = m.carrier_size(rel.lhs().start())?;
        for x in 0..size {
            if m.eval_path(s.base(), rel.lhs(), x)? != m.eval_path(s.base(), rel.rhs(), x)? {
                return Ok(false);
            }
        }
    }
    for (_, cone) in s.cones() {
        if !cone_is_limit(s.base(), cone, m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All models with every carrier of size at most `max_size`, in
/// lexicographic order of (carrier sizes, action tables). Raw enumeration;
/// no isomorphism quotient.
pub fn enumerate_models(s: &LimitSketch, max_size: usize) -> Result<Vec<Model>> {
    let objects: Vec<ObjectId> = s.base().objects().cloned().collect();
    let edges: Vec<(EdgeId, ObjectId, ObjectId)> = s
        .base()
        .generators()
        .non_identity_edges()
        .map(|(e, a, b)| (e.clone(), a.clone(), b.clone()))
        .collect();

    let mut out = Vec::new();
    let size_choices: Box<dyn Iterator<Item = Vec<usize>>> = if objects.is_empty() {
        Box::new(std::iter::once(Vec::new()))
    } else {
        Box::new(
            objects
                .iter()
                .map(|_| (0..=max_size).collect::<Vec<_>>())
                .multi_cartesian_product(),
        )
    };
    for sizes in size_choices {
        let carrier: BTreeMap<ObjectId, usize> =
            objects.iter().cloned().zip(sizes.iter().copied()).collect();
        // All function tables per edge, lexicographically.
        let mut table_choices: Vec<Vec<Vec<usize>>> = Vec::with_capacity(edges.len());
        for (_, src, tgt) in &edges {
            let dom = carrier[src];
            let cod = carrier[tgt];
            table_choices.push(all_functions(dom, cod));
        }
        if table_choices.iter().any(|t| t.is_empty()) {
            continue; // nonempty domain into an empty codomain
        }
        let assignments: Box<dyn Iterator<Item = Vec<Vec<usize>>>> = if edges.is_empty() {
            Box::new(std::iter::once(Vec::new()))
        } else {
            Box::new(table_choices.into_iter().multi_cartesian_product())
        };
        for tables in assignments {
            let action: BTreeMap<EdgeId, Vec<usize>> = edges
                .iter()
                .map(|(e, _, _)| e.clone())
                .zip(tables.into_iter())
                .collect();
            let m = Model::new(carrier.clone(), action);
            if is_model(s, &m)? {
                out.push(m);
            }
        }
    }
    Ok(out)
}

/// Every function {0..dom-1} -> {0..cod-1} as a table, lexicographically.
/// The empty domain has exactly one (empty) function.
fn all_functions(dom: usize, cod: usize) -> Vec<Vec<usize>> {
    if dom == 0 {
        return vec![Vec::new()];
    }
    if cod == 0 {
        return Vec::new();
    }
    (0..dom)
        .map(|_| (0..cod).collect::<Vec<_>>())
        .multi_cartesian_product()
        .collect()
}

/// Restriction along the realization unit: keep the carriers, forget the
/// actions of the attached fillers.
pub fn transport_model(r: &RealizationResult, m: &Model) -> Result<Model> {
    if !r.is_stabilized() {
        return Err(Error::Precondition(
            "transport requires a stabilized realization".into(),
        ));
    }
    let mut carrier = BTreeMap::new();
    for o in r.original.base().objects() {
        carrier.insert(o.clone(), m.carrier_size(o)?);
    }
    let mut action = BTreeMap::new();
    for (e, _, _) in r.original.base().generators().non_identity_edges() {
        action.insert(e.clone(), m.action(e)?.to_vec());
    }
    Ok(Model::new(carrier, action))
}

/// The inverse of transport: replay the trace, assigning every attached
/// filler the unique function its limit cone induces.
pub fn lift_model(r: &RealizationResult, m: &Model, _bounds: &Bounds) -> Result<Model> {
    if !r.is_stabilized() {
        return Err(Error::Precondition(
            "lift requires a stabilized realization".into(),
        ));
    }
    let base = r.original.base();
    let realized = r.realized.base();
    let mut action: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (e, _, _) in base.generators().non_identity_edges() {
        action.insert(e.clone(), m.action(e)?.to_vec());
    }
    let carrier: BTreeMap<ObjectId, usize> =
        m.carriers().map(|(o, k)| (o.clone(), k)).collect();
    let partial_eval = |action: &BTreeMap<EdgeId, Vec<usize>>, path: &Path, x: usize| -> Result<usize> {
        let mut at = x;
        for e in path.edges() {
            if realized.generators().is_identity_edge(e) {
                continue;
            }
            let table = action
                .get(e)
                .ok_or_else(|| Error::PartialMap(format!("edge `{e}` during replay")))?;
            at = table[at];
        }
        Ok(at)
    };

    for event in &r.trace {
        match event {
            SoaEvent::Attach {
                y,
                alpha,
                kappa,
                edge,
                ..
            } => {
                let cone = r.original.cone(*alpha)?;
                let index_objects: Vec<ObjectId> = cone.index().objects().to_vec();
                let apex = cone.apex();
                // Precompute leg actions on the apex carrier.
                let mut table = Vec::with_capacity(carrier[y]);
                for b in 0..carrier[y] {
                    // The tuple this element must map to.
                    let target: Vec<usize> = kappa
                        .iter()
                        .map(|(_, path)| partial_eval(&action, path, b))
                        .collect::<Result<_>>()?;
                    let mut found = None;
                    for a in 0..carrier[apex] {
                        let image: Vec<usize> = index_objects
                            .iter()
                            .map(|i| {
                                let model = Model::new(carrier.clone(), action.clone());
                                model.eval_path(realized, cone.leg(i)?, a)
                            })
                            .collect::<Result<_>>()?;
                        if image == target {
                            if found.is_some() {
                                return Err(Error::Precondition(format!(
                                    "two limit fillers while replaying `{edge}`"
                                )));
                            }
                            found = Some(a);
                        }
                    }
                    match found {
                        Some(a) => table.push(a),
                        None => {
                            return Err(Error::Precondition(format!(
                                "no limit filler while replaying `{edge}`"
                            )))
                        }
                    }
                }
                action.insert(edge.clone(), table);
            }
            SoaEvent::Identify { lhs, rhs } => {
                for x in 0..carrier[lhs.start()] {
                    if partial_eval(&action, lhs, x)? != partial_eval(&action, rhs, x)? {
                        return Err(Error::Precondition(format!(
                            "identification {lhs} ~ {rhs} fails in the model"
                        )));
                    }
                }
            }
        }
    }
    Ok(Model::new(carrier, action))
}

/// Pairing of the models of a sketch with the models of its realization.
#[derive(Debug, Clone)]
pub struct ModelBijectionReport {
    pub models_original: Vec<Model>,
    pub models_realized: Vec<Model>,
    /// For each realized model, the index of its restriction in
    /// `models_original`.
    pub pairing: Vec<usize>,
}

/// Enumerate both model lists and pair them by restriction along the unit.
pub fn model_bijection(
    r: &RealizationResult,
    max_size: usize,
    bounds: &Bounds,
) -> Result<ModelBijectionReport> {
    let models_original = enumerate_models(&r.original, max_size)?;
    let models_realized = enumerate_models(&r.realized, max_size)?;
    let mut pairing = Vec::with_capacity(models_realized.len());
    for m in &models_realized {
        let restricted = transport_model(r, m)?;
        let idx = models_original
            .iter()
            .position(|x| *x == restricted)
            .ok_or_else(|| {
                Error::Validation("restriction of a realized model is not a model".into())
            })?;
        pairing.push(idx);
    }
    // Round-trip check in the other direction.
    for m in &models_original {
        let lifted = lift_model(r, m, bounds)?;
        if transport_model(r, &lifted)? != *m {
            return Err(Error::Validation(
                "lift followed by restriction is not the identity".into(),
            ));
        }
    }
    Ok(ModelBijectionReport {
        models_original,
        models_realized,
        pairing,
    })
}

/// The hom-functor model at `l`: carriers are hom-sets of the materialized
/// base, actions are postcomposition. Hom functors preserve limits, so
/// this passes [`is_model`] on realized sketches.
pub fn yoneda_model(
    s: &LimitSketch,
    l: &ObjectId,
    bounds: &Bounds,
) -> Result<Bounded<(Model, MaterializedCategory)>> {
    let cat = match materialize_bounded(s.base(), bounds)? {
        Bounded::Done(c) => c,
        Bounded::Diverged { witness } => return Ok(Bounded::Diverged { witness }),
    };
    if !cat.objects().contains(l) {
        return Err(Error::UnknownVertex(l.clone()));
    }
    let mut carrier = BTreeMap::new();
    for x in cat.objects() {
        carrier.insert(x.clone(), cat.hom(l, x).len());
    }
    let mut action = BTreeMap::new();
    for (e, src, tgt) in s.base().generators().non_identity_edges() {
        let class = cat.edge_class(e)?;
        let dom = cat.hom(l, src);
        let cod = cat.hom(l, tgt);
        let mut table = Vec::with_capacity(dom.len());
        for &m in dom {
            let composed = cat.compose(class, m)?;
            let pos = cod
                .iter()
                .position(|&c| c == composed)
                .ok_or_else(|| Error::Validation("hom-sets are inconsistent".into()))?;
            table.push(pos);
        }
        action.insert(e.clone(), table);
    }
    Ok(Bounded::Done((Model::new(carrier, action), cat)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::realize;
    use crate::fixtures;
    use crate::sketch::free_sketch;

    fn oid(s: &str) -> ObjectId {
        ObjectId::new(s)
    }

    fn bounds() -> Bounds {
        Bounds::default()
    }

    #[test]
    fn relation_respecting_assignment_models_a_free_sketch() {
        let s = free_sketch(fixtures::arrow_presentation());
        let mut carrier = BTreeMap::new();
        carrier.insert(oid("a"), 2);
        carrier.insert(oid("t"), 3);
        let mut action = BTreeMap::new();
        action.insert(EdgeId::new("bang"), vec![2, 0]);
        let m = Model::new(carrier, action);
        assert!(is_model(&s, &m).unwrap());
    }

    #[test]
    fn term2_models_need_a_one_point_terminal_carrier() {
        let s = fixtures::term2();
        let mut carrier = BTreeMap::new();
        carrier.insert(oid("a"), 2);
        carrier.insert(oid("t"), 1);
        let good = Model::new(carrier.clone(), BTreeMap::new());
        assert!(is_model(&s, &good).unwrap());
        carrier.insert(oid("t"), 2);
        let bad = Model::new(carrier, BTreeMap::new());
        assert!(!is_model(&s, &bad).unwrap());
    }

    #[test]
    fn model_counts_for_standard_fixtures() {
        // Free sketch on one object: carriers 0, 1, 2.
        let one = free_sketch(Presentation::terminal());
        assert_eq!(enumerate_models(&one, 2).unwrap().len(), 3);
        // TERM2: |t| = 1 forced, |a| free.
        let term2 = fixtures::term2();
        assert_eq!(enumerate_models(&term2, 2).unwrap().len(), 3);
        // Realized SQ at size <= 1: the all-empty and the all-singleton
        // assignments both qualify.
        let r = fixtures::realized_sq();
        assert_eq!(enumerate_models(&r.realized, 1).unwrap().len(), 2);
    }

    #[test]
    fn sq_models_satisfy_the_product_equation() {
        let sq = fixtures::sq();
        for m in enumerate_models(&sq, 2).unwrap() {
            let p = m.carrier_size(&oid("p")).unwrap();
            let a = m.carrier_size(&oid("a")).unwrap();
            assert_eq!(p, a * a);
        }
    }

    #[test]
    fn transport_and_lift_are_inverse_on_term2() {
        let r = fixtures::realized_term2();
        let originals = enumerate_models(&r.original, 2).unwrap();
        for m in &originals {
            let lifted = lift_model(r, m, &bounds()).unwrap();
            assert!(is_model(&r.realized, &lifted).unwrap());
            assert_eq!(&transport_model(r, &lifted).unwrap(), m);
        }
        let realized_models = enumerate_models(&r.realized, 2).unwrap();
        for m in &realized_models {
            let restricted = transport_model(r, m).unwrap();
            let back = lift_model(r, &restricted, &bounds()).unwrap();
            assert_eq!(&back, m);
        }
    }

    #[test]
    fn terminal_sketch_model_lists_have_length_one() {
        // Sketch on one object t with the empty-diagram cone: |t| = 1.
        let p = Presentation::new(
            crate::graph::Gwi::free(crate::graph::Graph::build(&["t"], &[]).unwrap()).unwrap(),
        );
        let cone = Cone::new(
            "term",
            oid("t"),
            MaterializedCategory::discrete(&[]),
            crate::sketch::Diagram::new(),
            BTreeMap::new(),
        );
        let s = crate::sketch::make_sketch(p, vec![cone]).unwrap();
        let r = realize(&s, 4, &bounds()).unwrap();
        assert_eq!(enumerate_models(&r.original, 2).unwrap().len(), 1);
        assert_eq!(enumerate_models(&r.realized, 2).unwrap().len(), 1);
    }

    #[test]
    fn model_bijection_on_term2() {
        let r = fixtures::realized_term2();
        let report = model_bijection(r, 2, &bounds()).unwrap();
        assert_eq!(report.models_original.len(), report.models_realized.len());
        // The pairing is a bijection on indices.
        let mut seen: Vec<usize> = report.pairing.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), report.pairing.len());
    }

    #[test]
    fn yoneda_models_of_realized_term2() {
        let r = fixtures::realized_term2();
        // At l = t: Hom(t, a) is empty, Hom(t, t) is the identity.
        let (m, _) = yoneda_model(&r.realized, &oid("t"), &bounds())
            .unwrap()
            .expect_done("yoneda at t");
        assert_eq!(m.carrier_size(&oid("a")).unwrap(), 0);
        assert_eq!(m.carrier_size(&oid("t")).unwrap(), 1);
        assert!(is_model(&r.realized, &m).unwrap());
        // At l = a: both hom-sets are singletons.
        let (m, _) = yoneda_model(&r.realized, &oid("a"), &bounds())
            .unwrap()
            .expect_done("yoneda at a");
        assert_eq!(m.carrier_size(&oid("a")).unwrap(), 1);
        assert_eq!(m.carrier_size(&oid("t")).unwrap(), 1);
        assert!(is_model(&r.realized, &m).unwrap());
    }

    #[test]
    fn yoneda_model_on_one_object_sketch() {
        let s = free_sketch(Presentation::terminal());
        let (m, _) = yoneda_model(&s, &oid("pt"), &bounds())
            .unwrap()
            .expect_done("yoneda");
        assert_eq!(m.carrier_size(&oid("pt")).unwrap(), 1);
        assert!(is_model(&s, &m).unwrap());
    }

    #[test]
    fn transport_is_natural_in_the_sketch_map() {
        // m : free(terminal) -> TERM2 picking t. For a model X of the
        // realized TERM2, restricting along free(m) and then transporting
        // equals transporting and then restricting along m.
        use crate::presentation::{PresentationArrow, PresentationMap};
        use crate::sketch::SketchMap;

        let one = free_sketch(Presentation::terminal());
        let r_one = crate::factorization::realize(&one, 4, &bounds()).unwrap();
        let r_term2 = fixtures::realized_term2();
        let term2 = &r_term2.original;
        let mut pick = PresentationMap::new();
        pick.map_object(oid("pt"), oid("t"));
        let m = SketchMap {
            functor: PresentationArrow::new(one.base().clone(), term2.base().clone(), pick)
                .unwrap(),
            cone_map: one
                .cones()
                .map(|(i, _)| (i, term2.trivial_index(&oid("t")).unwrap()))
                .collect(),
        };
        let free_m = crate::factorization::realize_morphism(&m, &r_one, r_term2, &bounds())
            .unwrap()
            .expect_done("free(m)");

        // Restriction of a model along a presentation arrow.
        let restrict = |model: &Model, along: &PresentationArrow| -> Model {
            let mut carrier = BTreeMap::new();
            for o in along.source().objects() {
                carrier.insert(
                    o.clone(),
                    model.carrier_size(along.object_image(o).unwrap()).unwrap(),
                );
            }
            let mut action = BTreeMap::new();
            for (e, s, _) in along.source().generators().non_identity_edges() {
                let image = along.map().edge_image(e).unwrap();
                let dom = carrier[s];
                let table: Vec<usize> = (0..dom)
                    .map(|x| model.eval_path(along.target(), image, x).unwrap())
                    .collect();
                action.insert(e.clone(), table);
            }
            Model::new(carrier, action)
        };

        for x_realized in enumerate_models(&r_term2.realized, 2).unwrap() {
            let route_a = transport_model(&r_one, &restrict(&x_realized, &free_m)).unwrap();
            let route_b = restrict(&transport_model(r_term2, &x_realized).unwrap(), &m.functor);
            assert_eq!(route_a, route_b);
        }
    }

    #[test]
    fn is_model_is_invariant_under_carrier_relabeling() {
        // Swap the two elements of the `a` carrier in a TERM2 model.
        let s = fixtures::term2();
        let mut carrier = BTreeMap::new();
        carrier.insert(oid("a"), 2);
        carrier.insert(oid("t"), 1);
        let m = Model::new(carrier, BTreeMap::new());
        assert!(is_model(&s, &m).unwrap());
        // With no edges the relabeled model is the same table; exercise the
        // invariance on the arrow sketch instead.
        let arrow = free_sketch(fixtures::arrow_presentation());
        let mut carrier = BTreeMap::new();
        carrier.insert(oid("a"), 2);
        carrier.insert(oid("t"), 2);
        let mut action = BTreeMap::new();
        action.insert(EdgeId::new("bang"), vec![0, 1]);
        let m1 = Model::new(carrier.clone(), action.clone());
        // Relabel t's carrier by the swap (0 1): conjugate the action.
        action.insert(EdgeId::new("bang"), vec![1, 0]);
        let m2 = Model::new(carrier, action);
        assert_eq!(is_model(&arrow, &m1).unwrap(), is_model(&arrow, &m2).unwrap());
    }
}
