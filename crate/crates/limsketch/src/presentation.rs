//! Finitely presented categories: generators plus parallel-path relations,
//! maps between presentations, quotients, and the one pushout shape the
//! cell constructions need (glue freely added edges onto a presentation).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Gwi, ObjectId, Path};
use crate::word::{decide_equal, EqVerdict};

/// An unordered pair of parallel reduced paths, stored with the
/// canonically smaller side first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Relation {
    lhs: Path,
    rhs: Path,
}

impl Relation {
    fn new(a: Path, b: Path) -> Relation {
        if a <= b {
            Relation { lhs: a, rhs: b }
        } else {
            Relation { lhs: b, rhs: a }
        }
    }

    pub fn lhs(&self) -> &Path {
        &self.lhs
    }

    pub fn rhs(&self) -> &Path {
        &self.rhs
    }
}

/// A finitely presented category: a generating gwi and a finite set of
/// relations between parallel reduced paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    generators: Gwi,
    relations: BTreeSet<Relation>,
}

impl Presentation {
    pub fn new(generators: Gwi) -> Presentation {
        Presentation {
            generators,
            relations: BTreeSet::new(),
        }
    }

    /// Free presentation on a plain graph (identities adjoined, no relations).
    pub fn free_on_graph(g: Graph) -> Result<Presentation> {
        Ok(Presentation::new(Gwi::free(g)?))
    }

    /// The presentation with no objects at all.
    pub fn empty() -> Presentation {
        Presentation::new(Gwi::free(Graph::new()).expect("empty graph"))
    }

    /// One object, no non-identity generators.
    pub fn terminal() -> Presentation {
        let g = Graph::build(&["pt"], &[]).expect("static");
        Presentation::new(Gwi::free(g).expect("static"))
    }

    pub fn generators(&self) -> &Gwi {
        &self.generators
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectId> {
        self.generators.graph().vertices()
    }

    pub fn object_count(&self) -> usize {
        self.generators.graph().vertex_count()
    }

    pub fn has_object(&self, v: &ObjectId) -> bool {
        self.generators.graph().has_vertex(v)
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.iter()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn reduce(&self, p: &Path) -> Result<Path> {
        self.generators.reduce(p)
    }

    pub fn path_end(&self, p: &Path) -> Result<ObjectId> {
        self.generators.graph().path_end(p)
    }

    pub fn concat(&self, first: &Path, then: &Path) -> Result<Path> {
        self.generators.graph().concat(first, then)
    }

    pub fn edge_path(&self, e: &EdgeId) -> Result<Path> {
        self.generators.edge_path(e)
    }

    /// Insert a relation. Both sides are reduced and must be parallel;
    /// a relation whose sides coincide after reduction is dropped.
    pub fn add_relation(&mut self, a: &Path, b: &Path) -> Result<()> {
        let a = self.reduce(a)?;
        let b = self.reduce(b)?;
        let (ea, eb) = (self.path_end(&a)?, self.path_end(&b)?);
        if a.start() != b.start() || ea != eb {
            return Err(Error::NotParallel(
                a.start().clone(),
                ea,
                b.start().clone(),
                eb,
            ));
        }
        if a != b {
            self.relations.insert(Relation::new(a, b));
        }
        Ok(())
    }

    /// The quotient by additional relations: same generators, the union of
    /// relation sets. Path equality in the result refines equality here.
    pub fn quotient(&self, rels: &[(Path, Path)]) -> Result<Presentation> {
        let mut q = self.clone();
        for (a, b) in rels {
            q.add_relation(a, b)?;
        }
        Ok(q)
    }

    /// Fresh edge id based on `candidate`, suffixing `:1`, `:2`, … on collision.
    pub(crate) fn mint_edge_id(&self, candidate: &EdgeId) -> EdgeId {
        if !self.generators.graph().has_edge(candidate) {
            return candidate.clone();
        }
        for k in 1.. {
            let fresh = EdgeId::new(format!("{candidate}:{k}"));
            if !self.generators.graph().has_edge(&fresh) {
                return fresh;
            }
        }
        unreachable!()
    }

    /// Add a fresh non-identity generator, returning the id actually used.
    pub(crate) fn adjoin_edge(
        &mut self,
        candidate: &EdgeId,
        src: &ObjectId,
        tgt: &ObjectId,
    ) -> Result<EdgeId> {
        let id = self.mint_edge_id(candidate);
        let mut g = self.generators.underlying_graph();
        g.add_edge(id.clone(), src.clone(), tgt.clone())?;
        let ident = self
            .generators
            .identities()
            .map(|(v, e)| (v.clone(), e.clone()))
            .collect();
        self.generators = Gwi::new(g, ident)?;
        Ok(id)
    }

    /// Add a fresh object together with its identity loop.
    pub(crate) fn adjoin_object(&mut self, v: &ObjectId) -> Result<()> {
        let mut g = self.generators.underlying_graph();
        g.add_vertex(v.clone())?;
        let loop_id = {
            let candidate = EdgeId::new(format!("1_{v}"));
            if g.has_edge(&candidate) {
                return Err(Error::IdentityCollision(candidate));
            }
            candidate
        };
        g.add_edge(loop_id.clone(), v.clone(), v.clone())?;
        let mut ident: BTreeMap<ObjectId, EdgeId> = self
            .generators
            .identities()
            .map(|(o, e)| (o.clone(), e.clone()))
            .collect();
        ident.insert(v.clone(), loop_id);
        self.generators = Gwi::new(g, ident)?;
        Ok(())
    }
}

/// Object and edge assignments underlying a functor between presentations.
/// Identity edges need no entry; they are sent to identity paths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PresentationMap {
    object_map: BTreeMap<ObjectId, ObjectId>,
    edge_map: BTreeMap<EdgeId, Path>,
}

impl PresentationMap {
    pub fn new() -> PresentationMap {
        PresentationMap::default()
    }

    pub fn map_object(&mut self, from: ObjectId, to: ObjectId) {
        self.object_map.insert(from, to);
    }

    pub fn map_edge(&mut self, from: EdgeId, to: Path) {
        self.edge_map.insert(from, to);
    }

    pub fn object_image(&self, o: &ObjectId) -> Result<&ObjectId> {
        self.object_map
            .get(o)
            .ok_or_else(|| Error::PartialMap(format!("object `{o}`")))
    }

    pub fn edge_image(&self, e: &EdgeId) -> Result<&Path> {
        self.edge_map
            .get(e)
            .ok_or_else(|| Error::PartialMap(format!("edge `{e}`")))
    }

    pub fn objects(&self) -> impl Iterator<Item = (&ObjectId, &ObjectId)> {
        self.object_map.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, &Path)> {
        self.edge_map.iter()
    }

    /// Identity assignments on a presentation.
    pub fn identity(p: &Presentation) -> PresentationMap {
        let mut m = PresentationMap::new();
        for o in p.objects() {
            m.map_object(o.clone(), o.clone());
        }
        for (e, _, _) in p.generators().non_identity_edges() {
            m.map_edge(e.clone(), p.edge_path(e).expect("edge of p"));
        }
        m
    }
}

/// A presentation map together with its (co)domain presentations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresentationArrow {
    source: Presentation,
    target: Presentation,
    map: PresentationMap,
}

impl PresentationArrow {
    /// Check that the assignments are total and typed, then package them.
    /// Relation preservation is a separate, bounded question; see
    /// [`PresentationArrow::is_functorial`].
    pub fn new(
        source: Presentation,
        target: Presentation,
        map: PresentationMap,
    ) -> Result<PresentationArrow> {
        for o in source.objects() {
            let io = map.object_image(o)?;
            if !target.has_object(io) {
                return Err(Error::UnknownVertex(io.clone()));
            }
        }
        for (e, s, t) in source.generators().non_identity_edges() {
            let ip = map.edge_image(e)?;
            let start = ip.start().clone();
            let end = target.path_end(ip)?;
            if &start != map.object_image(s)? || &end != map.object_image(t)? {
                return Err(Error::Validation(format!(
                    "image of edge `{e}` is a path {start} -> {end}, expected {} -> {}",
                    map.object_image(s)?,
                    map.object_image(t)?
                )));
            }
        }
        Ok(PresentationArrow {
            source,
            target,
            map,
        })
    }

    pub fn identity(p: &Presentation) -> PresentationArrow {
        PresentationArrow {
            source: p.clone(),
            target: p.clone(),
            map: PresentationMap::identity(p),
        }
    }

    /// The identity-on-generators embedding of `source` into a larger
    /// presentation. Fails if some generator of `source` is missing.
    pub fn inclusion(source: &Presentation, target: &Presentation) -> Result<PresentationArrow> {
        let mut map = PresentationMap::new();
        for o in source.objects() {
            if !target.has_object(o) {
                return Err(Error::UnknownVertex(o.clone()));
            }
            map.map_object(o.clone(), o.clone());
        }
        for (e, _, _) in source.generators().non_identity_edges() {
            map.map_edge(e.clone(), target.edge_path(e)?);
        }
        PresentationArrow::new(source.clone(), target.clone(), map)
    }

    pub fn source(&self) -> &Presentation {
        &self.source
    }

    pub fn target(&self) -> &Presentation {
        &self.target
    }

    pub fn map(&self) -> &PresentationMap {
        &self.map
    }

    pub fn object_image(&self, o: &ObjectId) -> Result<&ObjectId> {
        self.map.object_image(o)
    }

    /// Image of a path: identity edges vanish, generator edges expand to
    /// their image paths. The result is reduced in the target.
    pub fn apply_path(&self, p: &Path) -> Result<Path> {
        let start = self.map.object_image(p.start())?.clone();
        let mut image = Path::empty(start);
        for e in p.edges() {
            if self.source.generators().is_identity_edge(e) {
                continue;
            }
            image = self.target.concat(&image, self.map.edge_image(e)?)?;
        }
        self.target.reduce(&image)
    }

    /// Composition `next ∘ self`; targets must line up structurally.
    pub fn then(&self, next: &PresentationArrow) -> Result<PresentationArrow> {
        if self.target != next.source {
            return Err(Error::Validation(
                "composition of presentation arrows with mismatched middle".into(),
            ));
        }
        let mut map = PresentationMap::new();
        for (o, io) in self.map.objects() {
            map.map_object(o.clone(), next.map.object_image(io)?.clone());
        }
        for (e, ip) in self.map.edges() {
            map.map_edge(e.clone(), next.apply_path(ip)?);
        }
        PresentationArrow::new(self.source.clone(), next.target.clone(), map)
    }

    /// Do the relations of the source hold in the target? Three-valued:
    /// a relation whose image cannot be decided within `bound` yields
    /// `Unknown`, a provably violated one yields `Distinct`.
    pub fn is_functorial(&self, bound: usize) -> Result<EqVerdict> {
        let mut verdict = EqVerdict::Equal;
        for rel in self.source.relations() {
            let a = self.apply_path(rel.lhs())?;
            let b = self.apply_path(rel.rhs())?;
            match decide_equal(&self.target, &a, &b, bound)? {
                EqVerdict::Equal => {}
                EqVerdict::Distinct => return Ok(EqVerdict::Distinct),
                EqVerdict::Unknown => verdict = EqVerdict::Unknown,
            }
        }
        Ok(verdict)
    }

    /// Pointwise structural equality of assignments (same images for every
    /// object and generator, syntactically on reduced paths).
    pub fn same_assignments(&self, other: &PresentationArrow) -> bool {
        self.map == other.map
    }
}

/// Result of gluing: the glued presentation and the two injections.
#[derive(Debug, Clone)]
pub struct Pushout {
    pub result: Presentation,
    /// Injection of the free leg's target (new generators get minted ids).
    pub from_free: PresentationArrow,
    /// Injection of the other leg's target (ids preserved verbatim).
    pub from_base_image: PresentationArrow,
}

/// Pushout of `free_leg` (a graph-inclusion-induced map into a presentation
/// that only adds generators and relations) against `other_leg` (an
/// identity-on-objects map). This is the shape the cell constructions use:
/// glue freely added edges onto a quotient of the common base.
///
/// The result has the union of generators (fresh ids minted for the new
/// edges, recorded in `from_free`) and the union of relations.
pub fn pushout(free_leg: &PresentationArrow, other_leg: &PresentationArrow) -> Result<Pushout> {
    if free_leg.source != other_leg.source {
        return Err(Error::UnsupportedPushout(
            "legs do not share the same source presentation".into(),
        ));
    }

    // free_leg must be induced by a graph inclusion: objects injectively to
    // objects, edges injectively to single fresh edges.
    let mut seen_objects = BTreeSet::new();
    for (_, io) in free_leg.map.objects() {
        if !seen_objects.insert(io.clone()) {
            return Err(Error::UnsupportedPushout(format!(
                "free leg is not injective on objects (image `{io}` repeats)"
            )));
        }
    }
    let mut seen_edges = BTreeSet::new();
    let mut free_edge_image = BTreeMap::new();
    for (e, ip) in free_leg.map.edges() {
        if ip.len() != 1 {
            return Err(Error::UnsupportedPushout(format!(
                "free leg sends edge `{e}` to a path of length {}",
                ip.len()
            )));
        }
        let ie = ip.edges()[0].clone();
        if !seen_edges.insert(ie.clone()) {
            return Err(Error::UnsupportedPushout(format!(
                "free leg is not injective on edges (image `{ie}` repeats)"
            )));
        }
        free_edge_image.insert(ie, e.clone());
    }

    // other_leg must be identity on objects (a bijection onto its target).
    let base_objects: BTreeSet<_> = other_leg.source.objects().cloned().collect();
    let target_objects: BTreeSet<_> = other_leg.target.objects().cloned().collect();
    let image_objects: BTreeSet<_> = other_leg
        .map
        .objects()
        .map(|(_, io)| io.clone())
        .collect();
    if base_objects.len() != target_objects.len() || image_objects != target_objects {
        return Err(Error::UnsupportedPushout(
            "other leg is not identity-on-objects".into(),
        ));
    }

    let mut result = other_leg.target.clone();

    // Transport objects of the free target that are not in the image.
    let mut object_transport: BTreeMap<ObjectId, ObjectId> = BTreeMap::new();
    for (o, io) in free_leg.map.objects() {
        object_transport.insert(io.clone(), other_leg.map.object_image(o)?.clone());
    }
    for v in free_leg.target.objects() {
        if !object_transport.contains_key(v) {
            // New object; carried over verbatim (the paper's shape adds none).
            if result.has_object(v) {
                return Err(Error::UnsupportedPushout(format!(
                    "fresh object id `{v}` collides with the other leg"
                )));
            }
            result.adjoin_object(v)?;
            object_transport.insert(v.clone(), v.clone());
        }
    }

    // Map from edges of the free target into paths of the result.
    let mut edge_transport: BTreeMap<EdgeId, Path> = BTreeMap::new();
    for (fe, s, t) in free_leg.target.generators().non_identity_edges() {
        if let Some(base_edge) = free_edge_image.get(fe) {
            // Old edge: follow the other leg.
            let ip = other_leg.map.edge_image(base_edge)?.clone();
            edge_transport.insert(fe.clone(), ip);
        } else {
            // Fresh edge: mint an id in the result.
            let src = object_transport
                .get(s)
                .ok_or_else(|| Error::UnknownVertex(s.clone()))?
                .clone();
            let tgt = object_transport
                .get(t)
                .ok_or_else(|| Error::UnknownVertex(t.clone()))?
                .clone();
            let id = result.adjoin_edge(fe, &src, &tgt)?;
            let path = result.edge_path(&id)?;
            edge_transport.insert(fe.clone(), path);
        }
    }

    // Injection of the free target.
    let mut from_free_map = PresentationMap::new();
    for v in free_leg.target.objects() {
        from_free_map.map_object(v.clone(), object_transport[v].clone());
    }
    for (fe, _, _) in free_leg.target.generators().non_identity_edges() {
        from_free_map.map_edge(fe.clone(), edge_transport[fe].clone());
    }
    let from_free = PresentationArrow::new(free_leg.target.clone(), result.clone(), from_free_map)?;

    // Translate the free target's relations along the injection.
    let mut translated = Vec::new();
    for rel in free_leg.target.relations() {
        let a = from_free.apply_path(rel.lhs())?;
        let b = from_free.apply_path(rel.rhs())?;
        translated.push((a, b));
    }
    let result = result.quotient(&translated)?;

    let from_free = PresentationArrow::new(from_free.source, result.clone(), from_free.map)?;
    let from_base_image = PresentationArrow::inclusion(other_leg.target(), &result)?;

    Ok(Pushout {
        result,
        from_free,
        from_base_image,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oid(s: &str) -> ObjectId {
        ObjectId::new(s)
    }

    fn eid(s: &str) -> EdgeId {
        EdgeId::new(s)
    }

    #[test]
    fn add_relation_rejects_non_parallel() {
        let g = Graph::build(&["a", "b"], &[("f", "a", "b"), ("e", "a", "a")]).unwrap();
        let mut p = Presentation::new(Gwi::free(g).unwrap());
        let f = p.edge_path(&eid("f")).unwrap();
        let e = p.edge_path(&eid("e")).unwrap();
        assert!(matches!(
            p.add_relation(&f, &e),
            Err(Error::NotParallel(..))
        ));
    }

    #[test]
    fn relations_are_stored_reduced_and_deduplicated() {
        let g = Graph::build(&["a", "b"], &[("f", "a", "b"), ("g", "a", "b")]).unwrap();
        let mut p = Presentation::new(Gwi::free(g).unwrap());
        let f = Path::new(oid("a"), vec![eid("f"), eid("1_b")]);
        let gp = Path::new(oid("a"), vec![eid("1_a"), eid("g")]);
        p.add_relation(&f, &gp).unwrap();
        p.add_relation(&gp, &f).unwrap();
        assert_eq!(p.relation_count(), 1);
        let rel = p.relations().next().unwrap();
        assert_eq!(rel.lhs().len(), 1);
        assert_eq!(rel.rhs().len(), 1);
    }

    #[test]
    fn quotient_by_nothing_is_identity() {
        let g = Graph::build(&["a"], &[("e", "a", "a")]).unwrap();
        let p = Presentation::new(Gwi::free(g).unwrap());
        assert_eq!(p.quotient(&[]).unwrap(), p);
    }

    #[test]
    fn arrow_application_reduces_in_the_target() {
        // f |-> identity path, so g.f |-> g.
        let g1 = Graph::build(&["a", "b"], &[("f", "a", "a"), ("g", "a", "b")]).unwrap();
        let p1 = Presentation::new(Gwi::free(g1).unwrap());
        let g2 = Graph::build(&["x", "y"], &[("h", "x", "y")]).unwrap();
        let p2 = Presentation::new(Gwi::free(g2).unwrap());
        let mut m = PresentationMap::new();
        m.map_object(oid("a"), oid("x"));
        m.map_object(oid("b"), oid("y"));
        m.map_edge(eid("f"), Path::empty(oid("x")));
        m.map_edge(eid("g"), Path::new(oid("x"), vec![eid("h")]));
        let arr = PresentationArrow::new(p1.clone(), p2, m).unwrap();
        let gf = Path::new(oid("a"), vec![eid("f"), eid("g")]);
        assert_eq!(
            arr.apply_path(&gf).unwrap(),
            Path::new(oid("x"), vec![eid("h")])
        );
    }

    #[test]
    fn pushout_along_identity_is_isomorphic_copy() {
        let g = Graph::build(&["a", "b"], &[("f", "a", "b")]).unwrap();
        let base = Presentation::new(Gwi::free(g).unwrap());
        let f = PresentationArrow::identity(&base);
        let gl = PresentationArrow::identity(&base);
        let po = pushout(&f, &gl).unwrap();
        assert_eq!(po.result, base);
        assert!(po.from_free.same_assignments(&PresentationArrow::identity(&base)));
    }

    #[test]
    fn pushout_glues_one_fresh_edge() {
        let base = Presentation::new(
            Gwi::free(Graph::build(&["x", "y"], &[]).unwrap()).unwrap(),
        );
        // Free leg: the base graph plus one new edge y -> x.
        let mut bigger = Graph::build(&["x", "y"], &[("gamma", "y", "x")]).unwrap();
        let _ = &mut bigger;
        let extended = Presentation::new(Gwi::free(bigger).unwrap());
        let free_leg = PresentationArrow::inclusion(&base, &extended).unwrap();
        // In the supported shape the free leg goes out of the base.
        let po = pushout(&free_leg, &PresentationArrow::identity(&base)).unwrap();
        let non_id: Vec<_> = po
            .result
            .generators()
            .non_identity_edges()
            .map(|(e, _, _)| e.clone())
            .collect();
        assert_eq!(non_id, vec![eid("gamma")]);
        assert_eq!(po.result.relation_count(), 0);
    }

    #[test]
    fn pushout_glues_two_parallel_edges() {
        let base =
            Presentation::new(Gwi::free(Graph::build(&["x", "y"], &[]).unwrap()).unwrap());
        let bigger =
            Graph::build(&["x", "y"], &[("g0", "y", "x"), ("g1", "y", "x")]).unwrap();
        let extended = Presentation::new(Gwi::free(bigger).unwrap());
        let free_leg = PresentationArrow::inclusion(&base, &extended).unwrap();
        let po = pushout(&free_leg, &PresentationArrow::identity(&base)).unwrap();
        assert_eq!(po.result.generators().non_identity_edges().count(), 2);
        assert_eq!(po.result.relation_count(), 0);
    }

    #[test]
    fn pushout_mints_fresh_ids_on_collision() {
        // The other leg's target already has an edge named gamma.
        let base =
            Presentation::new(Gwi::free(Graph::build(&["x", "y"], &[]).unwrap()).unwrap());
        let occupied = Presentation::new(
            Gwi::free(Graph::build(&["x", "y"], &[("gamma", "x", "y")]).unwrap()).unwrap(),
        );
        let other = PresentationArrow::inclusion(&base, &occupied).unwrap();
        let extended = Presentation::new(
            Gwi::free(Graph::build(&["x", "y"], &[("gamma", "y", "x")]).unwrap()).unwrap(),
        );
        let free_leg = PresentationArrow::inclusion(&base, &extended).unwrap();
        let po = pushout(&free_leg, &other).unwrap();
        assert!(po.result.generators().graph().has_edge(&eid("gamma")));
        assert!(po.result.generators().graph().has_edge(&eid("gamma:1")));
        // The injection records where the fresh edge went.
        let image = po.from_free.map().edge_image(&eid("gamma")).unwrap();
        assert_eq!(image.edges(), &[eid("gamma:1")]);
    }

    #[test]
    fn pushout_universal_property_on_small_targets() {
        use crate::category::{enumerate_functors, materialize, CatFunctor, MaterializedCategory};

        // Does `h` restrict along `along` to `expected`, evaluating in `mat`?
        fn restricts(
            h: &CatFunctor,
            along: &PresentationArrow,
            expected: &CatFunctor,
            mat: &MaterializedCategory,
        ) -> bool {
            for (o, _) in along.map().objects() {
                let via = h.object_image(along.object_image(o).unwrap()).unwrap();
                if via != expected.object_image(o).unwrap() {
                    return false;
                }
            }
            for (e, ip) in along.map().edges() {
                let via = h.eval_path(along.target(), mat, ip).unwrap();
                if via != expected.edge_image(e).unwrap() {
                    return false;
                }
            }
            true
        }

        let base =
            Presentation::new(Gwi::free(Graph::build(&["x", "y"], &[]).unwrap()).unwrap());
        let extended = Presentation::new(
            Gwi::free(Graph::build(&["x", "y"], &[("gamma", "y", "x")]).unwrap()).unwrap(),
        );
        let free_leg = PresentationArrow::inclusion(&base, &extended).unwrap();
        let other_leg = PresentationArrow::identity(&base);
        let po = pushout(&free_leg, &other_leg).unwrap();

        let targets = [
            MaterializedCategory::terminal(),
            MaterializedCategory::discrete(&["a", "b"]),
            materialize(&crate::fixtures::arrow_presentation(), 4, 16)
                .unwrap()
                .expect_done("arrow"),
            materialize(&crate::fixtures::parallel_pair_presentation(), 4, 16)
                .unwrap()
                .expect_done("pair"),
        ];
        for cat in &targets {
            let from_extended = enumerate_functors(&extended, cat).unwrap();
            let from_base_image = enumerate_functors(&base, cat).unwrap();
            let from_pushout = enumerate_functors(&po.result, cat).unwrap();
            for phi1 in &from_extended {
                for phi2 in &from_base_image {
                    // Agreement on the shared base.
                    let f_then = |o: &str| {
                        phi1.object_image(free_leg.object_image(&oid(o)).unwrap())
                            .unwrap()
                    };
                    if f_then("x") != phi2.object_image(&oid("x")).unwrap()
                        || f_then("y") != phi2.object_image(&oid("y")).unwrap()
                    {
                        continue;
                    }
                    let matches: Vec<&crate::category::CatFunctor> = from_pushout
                        .iter()
                        .filter(|psi| {
                            restricts(psi, &po.from_free, phi1, cat)
                                && restricts(psi, &po.from_base_image, phi2, cat)
                        })
                        .collect();
                    assert_eq!(
                        matches.len(),
                        1,
                        "expected exactly one mediating functor, found {}",
                        matches.len()
                    );
                }
            }
        }
    }

    #[test]
    fn pushout_rejects_non_inclusion_free_leg() {
        let base = Presentation::new(
            Gwi::free(Graph::build(&["x"], &[("e", "x", "x")]).unwrap()).unwrap(),
        );
        let mut m = PresentationMap::new();
        m.map_object(oid("x"), oid("x"));
        m.map_edge(
            eid("e"),
            Path::new(oid("x"), vec![eid("e"), eid("e")]),
        );
        let squash = PresentationArrow::new(base.clone(), base.clone(), m).unwrap();
        assert!(matches!(
            pushout(&squash, &PresentationArrow::identity(&base)),
            Err(Error::UnsupportedPushout(_))
        ));
    }
}
