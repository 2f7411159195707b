//! Finite materialization of a presentation: explicit hom-sets, a
//! composition table, and canonical path representatives per morphism.
//!
//! Enumeration works over class representatives: starting from the empty
//! path at each object, each representative is extended by every
//! composable generator and the extension is classified against the
//! representatives found so far with [`decide_equal`]. A path equal to an
//! earlier representative is never extended again; since equality is a
//! congruence, extensions of representatives still reach every class whose
//! least member fits in the budget, and the chosen representative is the
//! least path of its class in (length, edge-sequence) order.
//!
//! Materialization diverges (rather than erring) when a class count
//! exceeds the budget, when a classification comes back `Unknown`, or when
//! the closure check finds a composite that escapes every known class.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Gwi, ObjectId, Path};
use crate::presentation::{Presentation, PresentationArrow, PresentationMap};
use crate::word::RewriteContext;
use crate::{Bounded, Bounds};

/// Index of a morphism in a [`MaterializedCategory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MorphId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
struct MorphData {
    src: ObjectId,
    tgt: ObjectId,
    rep: Path,
}

/// A presentation whose word problem has closed: finite hom-sets and a
/// total composition table over them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaterializedCategory {
    objects: Vec<ObjectId>,
    morphisms: Vec<MorphData>,
    homs: BTreeMap<(ObjectId, ObjectId), Vec<MorphId>>,
    compose: BTreeMap<(MorphId, MorphId), MorphId>,
    identities: BTreeMap<ObjectId, MorphId>,
    edge_class: BTreeMap<EdgeId, MorphId>,
}

impl MaterializedCategory {
    pub fn objects(&self) -> &[ObjectId] {
        &self.objects
    }

    pub fn morphism_count(&self) -> usize {
        self.morphisms.len()
    }

    pub fn morphisms(&self) -> impl Iterator<Item = MorphId> {
        (0..self.morphisms.len()).map(MorphId)
    }

    pub fn src(&self, m: MorphId) -> &ObjectId {
        &self.morphisms[m.0].src
    }

    pub fn tgt(&self, m: MorphId) -> &ObjectId {
        &self.morphisms[m.0].tgt
    }

    /// Canonical reduced path representing `m` in the source presentation.
    pub fn rep(&self, m: MorphId) -> &Path {
        &self.morphisms[m.0].rep
    }

    pub fn hom(&self, x: &ObjectId, y: &ObjectId) -> &[MorphId] {
        self.homs
            .get(&(x.clone(), y.clone()))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn identity_of(&self, x: &ObjectId) -> Result<MorphId> {
        self.identities
            .get(x)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(x.clone()))
    }

    pub fn is_identity(&self, m: MorphId) -> bool {
        self.identities.values().any(|i| *i == m)
    }

    /// `after ∘ first`: only defined when `tgt(first) = src(after)`.
    pub fn compose(&self, after: MorphId, first: MorphId) -> Result<MorphId> {
        self.compose.get(&(after, first)).copied().ok_or_else(|| {
            Error::Validation(format!(
                "morphisms {} and {} do not compose",
                first.0, after.0
            ))
        })
    }

    /// Class of a single generating edge (identity edges included).
    pub fn edge_class(&self, e: &EdgeId) -> Result<MorphId> {
        self.edge_class
            .get(e)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(e.clone()))
    }

    /// Evaluate a path of the source presentation to its morphism class.
    pub fn eval_path(&self, p: &Path) -> Result<MorphId> {
        let mut m = self.identity_of(p.start())?;
        for e in p.edges() {
            let c = self.edge_class(e)?;
            m = self.compose(c, m)?;
        }
        Ok(m)
    }

    /// Exhaustive associativity and unitality check over the tables.
    pub fn check_axioms(&self) -> Result<()> {
        for m in self.morphisms() {
            let (s, t) = (self.src(m).clone(), self.tgt(m).clone());
            let id_s = self.identity_of(&s)?;
            let id_t = self.identity_of(&t)?;
            if self.compose(m, id_s)? != m || self.compose(id_t, m)? != m {
                return Err(Error::Validation(format!(
                    "unitality fails at morphism {}",
                    m.0
                )));
            }
        }
        for f in self.morphisms() {
            for g in self.morphisms() {
                if self.tgt(f) != self.src(g) {
                    continue;
                }
                for h in self.morphisms() {
                    if self.tgt(g) != self.src(h) {
                        continue;
                    }
                    let left = self.compose(h, self.compose(g, f)?)?;
                    let right = self.compose(self.compose(h, g)?, f)?;
                    if left != right {
                        return Err(Error::Validation(format!(
                            "associativity fails at ({}, {}, {})",
                            f.0, g.0, h.0
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The discrete category on the given objects.
    pub fn discrete(objects: &[&str]) -> MaterializedCategory {
        let graph = Graph::build(objects, &[]).expect("distinct object names");
        let p = Presentation::new(Gwi::free(graph).expect("fresh identities"));
        materialize(&p, 1, objects.len().max(1))
            .expect("discrete materializes")
            .expect_done("discrete category")
    }

    /// The terminal category: one object, one morphism.
    pub fn terminal() -> MaterializedCategory {
        MaterializedCategory::discrete(&["pt"])
    }

    /// Underlying graph: vertices are objects, edges are all morphisms.
    pub fn underlying_graph(&self) -> Graph {
        let mut g = Graph::new();
        for o in &self.objects {
            g.add_vertex(o.clone()).expect("distinct objects");
        }
        for m in self.morphisms() {
            let name = EdgeId::new(format!("mor{}", m.0));
            g.add_edge(name, self.src(m).clone(), self.tgt(m).clone())
                .expect("distinct names");
        }
        g
    }

    /// Morphism id behind an edge of [`Self::underlying_graph`].
    pub fn graph_edge_morphism(e: &EdgeId) -> Option<MorphId> {
        e.as_str()
            .strip_prefix("mor")
            .and_then(|n| n.parse().ok().map(MorphId))
    }
}

/// Like [`Bounded`], but an escape also reports the class representatives
/// discovered before the budget ran out. The saturation loop uses them to
/// decide which uniqueness identifications would unblock the enumeration.
#[derive(Debug, Clone)]
pub enum MaterializeAttempt {
    Closed(MaterializedCategory),
    Escaped { witness: Path, reps: Vec<Path> },
}

/// Materialize a presentation within the given budgets.
pub fn materialize(
    p: &Presentation,
    max_len: usize,
    max_morphisms: usize,
) -> Result<Bounded<MaterializedCategory>> {
    match materialize_attempt(p, max_len, max_morphisms)? {
        MaterializeAttempt::Closed(cat) => Ok(Bounded::Done(cat)),
        MaterializeAttempt::Escaped { witness, .. } => Ok(Bounded::Diverged { witness }),
    }
}

/// [`materialize`], keeping the partial representative list on escape.
pub fn materialize_attempt(
    p: &Presentation,
    max_len: usize,
    max_morphisms: usize,
) -> Result<MaterializeAttempt> {
    let objects: Vec<ObjectId> = p.objects().cloned().collect();
    let skeleton: Graph = p.generators().non_identity_graph();
    let ctx = RewriteContext::new(p);

    // Representatives in canonical order, plus pending extensions.
    let mut reps: Vec<MorphData> = Vec::new();
    let mut pending: std::collections::BTreeSet<Path> =
        objects.iter().map(|o| Path::empty(o.clone())).collect();

    while let Some(path) = pending.iter().next().cloned() {
        pending.remove(&path);
        let end = p.path_end(&path)?;
        // Classify against parallel representatives. Classes are the
        // provable-equality closure: a path joins a class only on an
        // `Equal` verdict. Attachment relations make rewrite components
        // unbounded (a side like `pi1 ~ pi1∘d` grows words forever), so
        // demanding a `Distinct` certificate here would leave almost every
        // saturated presentation undecidable; over-splitting instead is
        // caught by the closure check and the downstream uniqueness scans.
        let mut known = false;
        for r in &reps {
            if r.src != *path.start() || r.tgt != end {
                continue;
            }
            if ctx.decide(&path, &r.rep, max_len)?.is_equal() {
                known = true;
                break;
            }
        }
        if known {
            continue; // redundant path, never extended
        }
        if reps.len() == max_morphisms {
            let reps = reps.into_iter().map(|r| r.rep).collect();
            return Ok(MaterializeAttempt::Escaped { witness: path, reps });
        }
        reps.push(MorphData {
            src: path.start().clone(),
            tgt: end.clone(),
            rep: path.clone(),
        });
        if path.len() < max_len {
            for e in skeleton.out_edges(&end) {
                let mut edges = path.edges().to_vec();
                edges.push(e.clone());
                pending.insert(Path::new(path.start().clone(), edges));
            }
        }
    }

    // reps were popped in canonical order, so they are already sorted.
    let morphisms = reps;
    let find_class = |target: &Path, src: &ObjectId, tgt: &ObjectId| -> Result<Option<MorphId>> {
        for (i, r) in morphisms.iter().enumerate() {
            if r.src != *src || r.tgt != *tgt {
                continue;
            }
            if ctx.decide(target, &r.rep, max_len)?.is_equal() {
                return Ok(Some(MorphId(i)));
            }
        }
        Ok(None)
    };

    // Closure: every composite of representatives lands in a known class.
    let mut compose = BTreeMap::new();
    for (i, f) in morphisms.iter().enumerate() {
        for (j, g) in morphisms.iter().enumerate() {
            if f.tgt != g.src {
                continue;
            }
            let composite = p.concat(&f.rep, &g.rep)?;
            match find_class(&composite, &f.src, &g.tgt)? {
                Some(c) => {
                    compose.insert((MorphId(j), MorphId(i)), c);
                }
                None => {
                    let reps = morphisms.iter().map(|m| m.rep.clone()).collect();
                    return Ok(MaterializeAttempt::Escaped { witness: composite, reps });
                }
            }
        }
    }

    let mut homs: BTreeMap<(ObjectId, ObjectId), Vec<MorphId>> = BTreeMap::new();
    for (i, m) in morphisms.iter().enumerate() {
        homs.entry((m.src.clone(), m.tgt.clone()))
            .or_default()
            .push(MorphId(i));
    }
    let mut identities = BTreeMap::new();
    for o in &objects {
        let id = morphisms
            .iter()
            .position(|m| m.rep.is_empty() && m.rep.start() == o)
            .map(MorphId)
            .ok_or_else(|| Error::Validation(format!("no identity class at `{o}`")))?;
        identities.insert(o.clone(), id);
    }
    let mut edge_class = BTreeMap::new();
    for (v, e) in p.generators().identities() {
        edge_class.insert(e.clone(), identities[v]);
    }
    for (e, s, t) in p.generators().non_identity_edges() {
        let path = p.edge_path(e)?;
        match find_class(&path, s, t)? {
            Some(c) => {
                edge_class.insert(e.clone(), c);
            }
            None => {
                let reps = morphisms.iter().map(|m| m.rep.clone()).collect();
                return Ok(MaterializeAttempt::Escaped { witness: path, reps });
            }
        }
    }

    Ok(MaterializeAttempt::Closed(MaterializedCategory {
        objects,
        morphisms,
        homs,
        compose,
        identities,
        edge_class,
    }))
}

/// [`materialize_attempt`] with a [`Bounds`] budget.
pub fn materialize_attempt_bounded(
    p: &Presentation,
    bounds: &Bounds,
) -> Result<MaterializeAttempt> {
    materialize_attempt(p, bounds.max_word_len, bounds.max_morphisms)
}

/// [`materialize`] with a [`Bounds`] budget.
pub fn materialize_bounded(
    p: &Presentation,
    bounds: &Bounds,
) -> Result<Bounded<MaterializedCategory>> {
    materialize(p, bounds.max_word_len, bounds.max_morphisms)
}

/// Object and morphism assignments of a functor from a presentation into a
/// materialized category.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CatFunctor {
    object_map: BTreeMap<ObjectId, ObjectId>,
    edge_map: BTreeMap<EdgeId, MorphId>,
}

impl CatFunctor {
    pub fn new() -> CatFunctor {
        CatFunctor {
            object_map: BTreeMap::new(),
            edge_map: BTreeMap::new(),
        }
    }

    pub fn map_object(&mut self, from: ObjectId, to: ObjectId) {
        self.object_map.insert(from, to);
    }

    pub fn map_edge(&mut self, from: EdgeId, to: MorphId) {
        self.edge_map.insert(from, to);
    }

    pub fn object_image(&self, o: &ObjectId) -> Result<&ObjectId> {
        self.object_map
            .get(o)
            .ok_or_else(|| Error::PartialMap(format!("object `{o}`")))
    }

    pub fn edge_image(&self, e: &EdgeId) -> Result<MorphId> {
        self.edge_map
            .get(e)
            .copied()
            .ok_or_else(|| Error::PartialMap(format!("edge `{e}`")))
    }

    pub fn objects(&self) -> impl Iterator<Item = (&ObjectId, &ObjectId)> {
        self.object_map.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, MorphId)> {
        self.edge_map.iter().map(|(e, m)| (e, *m))
    }

    /// Evaluate a path of the source presentation in the target category.
    /// Identity edges of `source` contribute nothing.
    pub fn eval_path(
        &self,
        source: &Presentation,
        target: &MaterializedCategory,
        p: &Path,
    ) -> Result<MorphId> {
        let start = self.object_image(p.start())?;
        let mut m = target.identity_of(start)?;
        for e in p.edges() {
            if source.generators().is_identity_edge(e) {
                continue;
            }
            m = target.compose(self.edge_image(e)?, m)?;
        }
        Ok(m)
    }

    /// Relations of `source` hold under the assignments.
    pub fn respects_relations(
        &self,
        source: &Presentation,
        target: &MaterializedCategory,
    ) -> Result<bool> {
        for rel in source.relations() {
            if self.eval_path(source, target, rel.lhs())?
                != self.eval_path(source, target, rel.rhs())?
            {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Repackage as a presentation map into the presentation that `target`
    /// materializes, using canonical representative paths.
    pub fn to_presentation_map(&self, target: &MaterializedCategory) -> PresentationMap {
        let mut m = PresentationMap::new();
        for (o, io) in self.objects() {
            m.map_object(o.clone(), io.clone());
        }
        for (e, im) in self.edges() {
            m.map_edge(e.clone(), target.rep(im).clone());
        }
        m
    }

    /// Evaluate a presentation arrow into a materialization of its target.
    pub fn from_arrow(
        arrow: &PresentationArrow,
        target: &MaterializedCategory,
    ) -> Result<CatFunctor> {
        let mut f = CatFunctor::new();
        for (o, io) in arrow.map().objects() {
            f.map_object(o.clone(), io.clone());
        }
        for (e, ip) in arrow.map().edges() {
            f.map_edge(e.clone(), target.eval_path(ip)?);
        }
        Ok(f)
    }
}

impl Default for CatFunctor {
    fn default() -> Self {
        CatFunctor::new()
    }
}

/// All functors from a presentation into a materialized category, in
/// lexicographic order of assignments. Exhaustive and deterministic.
pub fn enumerate_functors(
    source: &Presentation,
    target: &MaterializedCategory,
) -> Result<Vec<CatFunctor>> {
    let src_objects: Vec<ObjectId> = source.objects().cloned().collect();
    let src_edges: Vec<(EdgeId, ObjectId, ObjectId)> = source
        .generators()
        .non_identity_edges()
        .map(|(e, s, t)| (e.clone(), s.clone(), t.clone()))
        .collect();

    let mut out = Vec::new();
    if src_objects.is_empty() {
        let f = CatFunctor::new();
        if f.respects_relations(source, target)? {
            out.push(f);
        }
        return Ok(out);
    }
    let object_choices = src_objects
        .iter()
        .map(|_| target.objects().to_vec())
        .multi_cartesian_product();
    for assignment in object_choices {
        let object_map: BTreeMap<ObjectId, ObjectId> = src_objects
            .iter()
            .cloned()
            .zip(assignment.into_iter())
            .collect();
        // Candidate morphisms per edge, under the object assignment.
        let mut per_edge = Vec::with_capacity(src_edges.len());
        for (_, s, t) in &src_edges {
            per_edge.push(target.hom(&object_map[s], &object_map[t]).to_vec());
        }
        if per_edge.iter().any(|c| c.is_empty()) {
            continue;
        }
        let edge_choices: Box<dyn Iterator<Item = Vec<MorphId>>> = if src_edges.is_empty() {
            Box::new(std::iter::once(Vec::new()))
        } else {
            Box::new(per_edge.into_iter().multi_cartesian_product())
        };
        for choice in edge_choices {
            let mut f = CatFunctor::new();
            for (o, io) in &object_map {
                f.map_object(o.clone(), io.clone());
            }
            for ((e, _, _), m) in src_edges.iter().zip(choice.into_iter()) {
                f.map_edge(e.clone(), m);
            }
            if f.respects_relations(source, target)? {
                out.push(f);
            }
        }
    }
    Ok(out)
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

    fn square() -> Presentation {
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

    #[test]
    fn commuting_square_closes_at_nine_morphisms() {
        let p = square();
        let cat = materialize(&p, 4, 64).unwrap().expect_done("square");
        // 4 identities + f, g, h, k + one diagonal.
        assert_eq!(cat.morphism_count(), 9);
        assert_eq!(cat.hom(&oid("a"), &oid("d")).len(), 1);
        cat.check_axioms().unwrap();
    }

    #[test]
    fn empty_presentation_has_identity_only() {
        let p = Presentation::terminal();
        let cat = materialize(&p, 3, 8).unwrap().expect_done("terminal");
        assert_eq!(cat.objects().len(), 1);
        assert_eq!(cat.morphism_count(), 1);
        cat.check_axioms().unwrap();
    }

    #[test]
    fn free_loop_diverges_with_a_witness() {
        let g = Graph::build(&["v"], &[("e", "v", "v")]).unwrap();
        let p = Presentation::new(Gwi::free(g).unwrap());
        match materialize(&p, 3, 64).unwrap() {
            Bounded::Diverged { witness } => {
                assert!(witness.len() >= 4, "witness {witness} should escape the budget");
            }
            Bounded::Done(_) => panic!("a free loop must not close"),
        }
    }

    #[test]
    fn collapsed_loop_is_the_one_morphism_category() {
        let g = Graph::build(&["v"], &[("e", "v", "v")]).unwrap();
        let mut p = Presentation::new(Gwi::free(g).unwrap());
        let e = p.edge_path(&eid("e")).unwrap();
        p.add_relation(&e, &Path::empty(oid("v"))).unwrap();
        let cat = materialize(&p, 4, 16).unwrap().expect_done("collapsed loop");
        assert_eq!(cat.morphism_count(), 1);
        assert_eq!(
            cat.edge_class(&eid("e")).unwrap(),
            cat.identity_of(&oid("v")).unwrap()
        );
    }

    #[test]
    fn identified_parallel_pair_is_the_arrow_category() {
        let g = Graph::build(&["a", "b"], &[("f", "a", "b"), ("g", "a", "b")]).unwrap();
        let mut p = Presentation::new(Gwi::free(g).unwrap());
        let f = p.edge_path(&eid("f")).unwrap();
        let gp = p.edge_path(&eid("g")).unwrap();
        p.add_relation(&f, &gp).unwrap();
        let cat = materialize(&p, 4, 16).unwrap().expect_done("arrow");
        assert_eq!(cat.objects().len(), 2);
        assert_eq!(cat.morphism_count(), 3);
        assert_eq!(
            cat.edge_class(&eid("f")).unwrap(),
            cat.edge_class(&eid("g")).unwrap()
        );
    }

    #[test]
    fn morphism_cap_diverges() {
        let g = Graph::build(&["a", "b"], &[("f", "a", "b"), ("g", "a", "b")]).unwrap();
        let p = Presentation::new(Gwi::free(g).unwrap());
        assert!(materialize(&p, 2, 3).unwrap().is_diverged());
    }

    #[test]
    fn eval_path_composes_edge_classes() {
        let p = square();
        let cat = materialize(&p, 4, 64).unwrap().expect_done("square");
        let gf = Path::new(oid("a"), vec![eid("f"), eid("g")]);
        let kh = Path::new(oid("a"), vec![eid("h"), eid("k")]);
        assert_eq!(cat.eval_path(&gf).unwrap(), cat.eval_path(&kh).unwrap());
        assert_ne!(
            cat.eval_path(&gf).unwrap(),
            cat.identity_of(&oid("a")).unwrap()
        );
    }

    #[test]
    fn representatives_are_least_in_class() {
        let p = square();
        let cat = materialize(&p, 4, 64).unwrap().expect_done("square");
        let diag = cat
            .eval_path(&Path::new(oid("a"), vec![eid("f"), eid("g")]))
            .unwrap();
        // Canonical representative of the diagonal is g.f (f sorts before h).
        assert_eq!(
            cat.rep(diag),
            &Path::new(oid("a"), vec![eid("f"), eid("g")])
        );
    }

    #[test]
    fn functor_enumeration_into_the_arrow_category() {
        let g = Graph::build(&["x", "y"], &[("u", "x", "y")]).unwrap();
        let p = Presentation::free_on_graph(g).unwrap();
        let arrow = {
            let g = Graph::build(&["a", "b"], &[("f", "a", "b")]).unwrap();
            let p = Presentation::new(Gwi::free(g).unwrap());
            materialize(&p, 3, 8).unwrap().expect_done("arrow")
        };
        let fs = enumerate_functors(&p, &arrow).unwrap();
        // Object images (a,a), (a,b), (b,b) each admit one morphism image;
        // (b,a) admits none.
        assert_eq!(fs.len(), 3);
    }

    #[test]
    fn discrete_and_terminal_constructors() {
        let d = MaterializedCategory::discrete(&["a", "t"]);
        assert_eq!(d.morphism_count(), 2);
        assert!(d.hom(&oid("a"), &oid("t")).is_empty());
        let t = MaterializedCategory::terminal();
        assert_eq!(t.morphism_count(), 1);
    }
}
