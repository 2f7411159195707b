//! Graphs, graphs with identities, and composable paths.
//!
//! A [`Graph`] is the raw generating data (vertices, edges, source/target).
//! A [`Gwi`] adds a chosen identity loop per vertex. A [`Path`] is a
//! composable list of edges written in diagram order: `edges[0]` leaves
//! `start`, and each edge begins where the previous one ended. The empty
//! path stands for the identity, and [`Gwi::reduce`] deletes identity
//! edges to produce the canonical representative of each composable list.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Vertex / object identifier. Ordered so every enumeration is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(pub String);

/// Edge / generating-morphism identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub String);

impl ObjectId {
    pub fn new(s: impl Into<String>) -> Self {
        ObjectId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl EdgeId {
    pub fn new(s: impl Into<String>) -> Self {
        EdgeId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        ObjectId(s.to_owned())
    }
}

impl From<&str> for EdgeId {
    fn from(s: &str) -> Self {
        EdgeId(s.to_owned())
    }
}

/// A finite directed multigraph with total source/target functions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    vertices: BTreeSet<ObjectId>,
    edges: BTreeMap<EdgeId, (ObjectId, ObjectId)>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    /// Build a graph from vertex names and `(edge, src, tgt)` triples.
    pub fn build(vertices: &[&str], edges: &[(&str, &str, &str)]) -> Result<Graph> {
        let mut g = Graph::new();
        for v in vertices {
            g.add_vertex(ObjectId::new(*v))?;
        }
        for (name, src, tgt) in edges {
            g.add_edge(EdgeId::new(*name), ObjectId::new(*src), ObjectId::new(*tgt))?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, v: ObjectId) -> Result<()> {
        if !self.vertices.insert(v.clone()) {
            return Err(Error::DuplicateVertex(v));
        }
        Ok(())
    }

    pub fn add_edge(&mut self, e: EdgeId, src: ObjectId, tgt: ObjectId) -> Result<()> {
        if !self.vertices.contains(&src) {
            return Err(Error::UnknownVertex(src));
        }
        if !self.vertices.contains(&tgt) {
            return Err(Error::UnknownVertex(tgt));
        }
        if self.edges.contains_key(&e) {
            return Err(Error::DuplicateEdge(e));
        }
        self.edges.insert(e, (src, tgt));
        Ok(())
    }

    pub fn has_vertex(&self, v: &ObjectId) -> bool {
        self.vertices.contains(v)
    }

    pub fn has_edge(&self, e: &EdgeId) -> bool {
        self.edges.contains_key(e)
    }

    pub fn src(&self, e: &EdgeId) -> Result<&ObjectId> {
        self.edges
            .get(e)
            .map(|(s, _)| s)
            .ok_or_else(|| Error::UnknownEdge(e.clone()))
    }

    pub fn tgt(&self, e: &EdgeId) -> Result<&ObjectId> {
        self.edges
            .get(e)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::UnknownEdge(e.clone()))
    }

    pub fn vertices(&self) -> impl Iterator<Item = &ObjectId> {
        self.vertices.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, &ObjectId, &ObjectId)> {
        self.edges.iter().map(|(e, (s, t))| (e, s, t))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Outgoing edges of `v`, in edge-id order.
    pub fn out_edges(&self, v: &ObjectId) -> Vec<&EdgeId> {
        self.edges
            .iter()
            .filter(|(_, (s, _))| s == v)
            .map(|(e, _)| e)
            .collect()
    }

    /// Walk a path from its start, returning the end vertex. Checks that
    /// consecutive edges compose and the path starts where it claims to.
    pub fn path_end(&self, p: &Path) -> Result<ObjectId> {
        if !self.has_vertex(&p.start) {
            return Err(Error::UnknownVertex(p.start.clone()));
        }
        let mut at = p.start.clone();
        for e in &p.edges {
            let s = self.src(e)?;
            if *s != at {
                return Err(Error::NotComposable {
                    edge: e.clone(),
                    expected: s.clone(),
                    found: at,
                });
            }
            at = self.tgt(e)?.clone();
        }
        Ok(at)
    }

    /// Concatenate `first` and `then` into one path (`then ∘ first` as
    /// morphisms): `first` is traversed first.
    pub fn concat(&self, first: &Path, then: &Path) -> Result<Path> {
        let mid = self.path_end(first)?;
        if mid != then.start {
            return Err(Error::NotComposable {
                edge: then
                    .edges
                    .first()
                    .cloned()
                    .unwrap_or_else(|| EdgeId::new("<empty>")),
                expected: then.start.clone(),
                found: mid,
            });
        }
        let mut edges = first.edges.clone();
        edges.extend(then.edges.iter().cloned());
        Ok(Path {
            start: first.start.clone(),
            edges,
        })
    }
}

/// A composable list of edges, in traversal order. Empty = identity at `start`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    start: ObjectId,
    edges: Vec<EdgeId>,
}

impl Path {
    pub fn empty(at: ObjectId) -> Path {
        Path {
            start: at,
            edges: Vec::new(),
        }
    }

    pub fn new(start: ObjectId, edges: Vec<EdgeId>) -> Path {
        Path { start, edges }
    }

    pub fn start(&self) -> &ObjectId {
        &self.start
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

// Canonical path order: length first, then the edge sequence, then the
// start vertex (which only matters for empty paths at different objects).
impl Ord for Path {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.edges.len(), &self.edges, &self.start).cmp(&(
            other.edges.len(),
            &other.edges,
            &other.start,
        ))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            return write!(f, "id({})", self.start);
        }
        // Composition order: last edge applied is written first.
        let names: Vec<&str> = self.edges.iter().rev().map(|e| e.as_str()).collect();
        f.write_str(&names.join("."))
    }
}

/// A graph with a chosen identity loop per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gwi {
    graph: Graph,
    ident: BTreeMap<ObjectId, EdgeId>,
}

impl Gwi {
    /// Assemble a gwi from a graph that already contains the identity loops.
    pub fn new(graph: Graph, ident: BTreeMap<ObjectId, EdgeId>) -> Result<Gwi> {
        for v in graph.vertices() {
            let e = ident
                .get(v)
                .ok_or_else(|| Error::PartialMap(format!("identity of vertex `{v}`")))?;
            if graph.src(e)? != v || graph.tgt(e)? != v {
                return Err(Error::Validation(format!(
                    "identity edge `{e}` of `{v}` is not a loop at `{v}`"
                )));
            }
        }
        Ok(Gwi { graph, ident })
    }

    /// Freely adjoin one identity loop `1_v` per vertex.
    pub fn free(graph: Graph) -> Result<Gwi> {
        let mut g = graph;
        let mut ident = BTreeMap::new();
        for v in g.vertices().cloned().collect::<Vec<_>>() {
            let e = EdgeId::new(format!("1_{v}"));
            if g.has_edge(&e) {
                return Err(Error::IdentityCollision(e));
            }
            g.add_edge(e.clone(), v.clone(), v.clone())?;
            ident.insert(v, e);
        }
        Ok(Gwi { graph: g, ident })
    }

    /// Forget the identity function.
    pub fn underlying_graph(&self) -> Graph {
        self.graph.clone()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn identity_edge(&self, v: &ObjectId) -> Result<&EdgeId> {
        self.ident
            .get(v)
            .ok_or_else(|| Error::UnknownVertex(v.clone()))
    }

    pub fn is_identity_edge(&self, e: &EdgeId) -> bool {
        self.ident.values().any(|i| i == e)
    }

    pub fn identities(&self) -> impl Iterator<Item = (&ObjectId, &EdgeId)> {
        self.ident.iter()
    }

    /// The generating edges that are not identity loops, in id order.
    pub fn non_identity_edges(&self) -> impl Iterator<Item = (&EdgeId, &ObjectId, &ObjectId)> {
        self.graph.edges().filter(|(e, _, _)| !self.is_identity_edge(e))
    }

    /// The subgraph spanned by the non-identity edges. Reduced paths are
    /// exactly the paths of this graph.
    pub fn non_identity_graph(&self) -> Graph {
        let mut g = Graph::new();
        for v in self.graph.vertices() {
            g.add_vertex(v.clone()).expect("fresh graph");
        }
        for (e, s, t) in self.non_identity_edges() {
            g.add_edge(e.clone(), s.clone(), t.clone()).expect("fresh graph");
        }
        g
    }

    /// One-edge path for a generating edge.
    pub fn edge_path(&self, e: &EdgeId) -> Result<Path> {
        let src = self.graph.src(e)?.clone();
        Ok(Path::new(src, vec![e.clone()]))
    }

    /// Canonical representative of a composable list: delete every identity
    /// edge; an all-identity list becomes the empty path at its vertex.
    /// Idempotent, endpoint-preserving, length-non-increasing.
    pub fn reduce(&self, p: &Path) -> Result<Path> {
        self.graph.path_end(p)?; // composability check
        let edges: Vec<EdgeId> = p
            .edges
            .iter()
            .filter(|e| !self.is_identity_edge(e))
            .cloned()
            .collect();
        Ok(Path::new(p.start.clone(), edges))
    }
}

/// All reduced paths `x -> y` of length at most `max_len` in the free
/// category on `g`, in canonical (length, edge-sequence) order.
///
/// `g` is treated as a plain graph: every edge is a generator. Callers
/// holding a gwi should pass [`Gwi::non_identity_graph`].
pub fn free_category_homs(
    g: &Graph,
    x: &ObjectId,
    y: &ObjectId,
    max_len: usize,
) -> Result<Vec<Path>> {
    if !g.has_vertex(x) {
        return Err(Error::UnknownVertex(x.clone()));
    }
    if !g.has_vertex(y) {
        return Err(Error::UnknownVertex(y.clone()));
    }
    let mut out = Vec::new();
    // Level-by-level extension keeps the canonical order for free.
    let mut level = vec![Path::empty(x.clone())];
    for len in 0..=max_len {
        for p in &level {
            if g.path_end(p)? == *y {
                out.push(p.clone());
            }
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::new();
        for p in &level {
            let at = g.path_end(p)?;
            for e in g.out_edges(&at) {
                let mut edges = p.edges.clone();
                edges.push(e.clone());
                next.push(Path::new(x.clone(), edges));
            }
        }
        level = next;
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

    #[test]
    fn free_gwi_on_empty_graph() {
        let g = Gwi::free(Graph::new()).unwrap();
        assert_eq!(g.graph().vertex_count(), 0);
        assert_eq!(g.graph().edge_count(), 0);
    }

    #[test]
    fn free_gwi_adds_one_loop_per_vertex() {
        let g = Graph::build(&["v"], &[]).unwrap();
        let gwi = Gwi::free(g).unwrap();
        assert_eq!(gwi.graph().edge_count(), 1);
        assert_eq!(gwi.identity_edge(&oid("v")).unwrap(), &eid("1_v"));
        assert_eq!(gwi.graph().src(&eid("1_v")).unwrap(), &oid("v"));
        assert_eq!(gwi.graph().tgt(&eid("1_v")).unwrap(), &oid("v"));
    }

    #[test]
    fn free_gwi_keeps_original_edges() {
        let g = Graph::build(&["v"], &[("e", "v", "v")]).unwrap();
        let gwi = Gwi::free(g).unwrap();
        assert!(gwi.graph().has_edge(&eid("e")));
        assert!(gwi.graph().has_edge(&eid("1_v")));
        assert_eq!(gwi.graph().edge_count(), 2);
        assert!(!gwi.is_identity_edge(&eid("e")));
    }

    #[test]
    fn free_gwi_rejects_identity_collision() {
        let g = Graph::build(&["v"], &[("1_v", "v", "v")]).unwrap();
        assert!(matches!(Gwi::free(g), Err(Error::IdentityCollision(_))));
    }

    #[test]
    fn underlying_graph_forgets_nothing_from_the_edge_set() {
        let g = Graph::build(&["v"], &[("e", "v", "v")]).unwrap();
        let gwi = Gwi::free(g).unwrap();
        let u = gwi.underlying_graph();
        assert_eq!(u.edge_count(), 2);
        assert_eq!(u.vertex_count(), 1);
    }

    #[test]
    fn reduce_deletes_trailing_identity() {
        let g = Graph::build(&["a", "b"], &[("e", "a", "b")]).unwrap();
        let gwi = Gwi::free(g).unwrap();
        let p = Path::new(oid("a"), vec![eid("e"), eid("1_b")]);
        let r = gwi.reduce(&p).unwrap();
        assert_eq!(r, Path::new(oid("a"), vec![eid("e")]));
    }

    #[test]
    fn reduce_of_identity_is_empty_path() {
        let g = Graph::build(&["v"], &[]).unwrap();
        let gwi = Gwi::free(g).unwrap();
        let p = Path::new(oid("v"), vec![eid("1_v")]);
        assert_eq!(gwi.reduce(&p).unwrap(), Path::empty(oid("v")));
        let p3 = Path::new(oid("v"), vec![eid("1_v"), eid("1_v"), eid("1_v")]);
        assert_eq!(gwi.reduce(&p3).unwrap(), Path::empty(oid("v")));
    }

    #[test]
    fn reduce_is_idempotent_and_preserves_endpoints() {
        let g = Graph::build(&["a", "b"], &[("e", "a", "b"), ("f", "b", "a")]).unwrap();
        let gwi = Gwi::free(g).unwrap();
        let p = Path::new(
            oid("a"),
            vec![eid("1_a"), eid("e"), eid("1_b"), eid("f"), eid("1_a")],
        );
        let r = gwi.reduce(&p).unwrap();
        assert_eq!(gwi.reduce(&r).unwrap(), r);
        assert!(r.len() <= p.len());
        assert_eq!(gwi.graph().path_end(&r).unwrap(), oid("a"));
        assert_eq!(r.start(), &oid("a"));
    }

    #[test]
    fn reduce_rejects_non_composable_path() {
        let g = Graph::build(&["a", "b"], &[("e", "a", "b")]).unwrap();
        let gwi = Gwi::free(g).unwrap();
        let bad = Path::new(oid("a"), vec![eid("e"), eid("e")]);
        assert!(matches!(
            gwi.reduce(&bad),
            Err(Error::NotComposable { .. })
        ));
    }

    #[test]
    fn homs_of_loop_graph() {
        let g = Graph::build(&["v"], &[("e", "v", "v")]).unwrap();
        let homs = free_category_homs(&g, &oid("v"), &oid("v"), 3).unwrap();
        assert_eq!(
            homs,
            vec![
                Path::empty(oid("v")),
                Path::new(oid("v"), vec![eid("e")]),
                Path::new(oid("v"), vec![eid("e"), eid("e")]),
                Path::new(oid("v"), vec![eid("e"), eid("e"), eid("e")]),
            ]
        );
    }

    #[test]
    fn homs_of_single_edge() {
        let g = Graph::build(&["a", "b"], &[("f", "a", "b")]).unwrap();
        let homs = free_category_homs(&g, &oid("a"), &oid("b"), 5).unwrap();
        assert_eq!(homs, vec![Path::new(oid("a"), vec![eid("f")])]);
    }

    #[test]
    fn homs_of_parallel_pair() {
        let g = Graph::build(&["a", "b"], &[("f", "a", "b"), ("g", "a", "b")]).unwrap();
        let homs = free_category_homs(&g, &oid("a"), &oid("b"), 1).unwrap();
        assert_eq!(
            homs,
            vec![
                Path::new(oid("a"), vec![eid("f")]),
                Path::new(oid("a"), vec![eid("g")]),
            ]
        );
    }

    #[test]
    fn homs_reject_unknown_vertex() {
        let g = Graph::new();
        assert!(free_category_homs(&g, &oid("a"), &oid("a"), 1).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Random gwi on three vertices plus a random composable walk,
        /// taken through identity edges as well.
        fn arbitrary_walk() -> impl Strategy<Value = (Gwi, Path)> {
            let edges = proptest::collection::vec((0usize..3, 0usize..3), 0..5);
            (edges, 0usize..3, proptest::collection::vec(any::<usize>(), 0..8)).prop_map(
                |(edges, start, choices)| {
                    let mut g = Graph::new();
                    for v in 0..3 {
                        g.add_vertex(ObjectId::new(format!("v{v}"))).unwrap();
                    }
                    for (i, (s, t)) in edges.iter().enumerate() {
                        g.add_edge(
                            EdgeId::new(format!("e{i}")),
                            ObjectId::new(format!("v{s}")),
                            ObjectId::new(format!("v{t}")),
                        )
                        .unwrap();
                    }
                    let gwi = Gwi::free(g).unwrap();
                    let start = ObjectId::new(format!("v{start}"));
                    let mut at = start.clone();
                    let mut walked = Vec::new();
                    for c in choices {
                        let outs = gwi.graph().out_edges(&at);
                        if outs.is_empty() {
                            break;
                        }
                        let e = outs[c % outs.len()].clone();
                        at = gwi.graph().tgt(&e).unwrap().clone();
                        walked.push(e);
                    }
                    (gwi, Path::new(start, walked))
                },
            )
        }

        proptest! {
            #[test]
            fn reduce_is_idempotent_shortening_and_endpoint_preserving(
                (gwi, path) in arbitrary_walk()
            ) {
                let once = gwi.reduce(&path).unwrap();
                let twice = gwi.reduce(&once).unwrap();
                prop_assert_eq!(&once, &twice);
                prop_assert!(once.len() <= path.len());
                prop_assert_eq!(once.start(), path.start());
                prop_assert_eq!(
                    gwi.graph().path_end(&once).unwrap(),
                    gwi.graph().path_end(&path).unwrap()
                );
            }

            #[test]
            fn homs_contain_truncated_concatenations(
                (gwi, path) in arbitrary_walk(),
                cut in 0usize..8
            ) {
                let g = gwi.non_identity_graph();
                let p = gwi.reduce(&path).unwrap();
                let cut = cut.min(p.len());
                let u = Path::new(p.start().clone(), p.edges()[..cut].to_vec());
                let mid = g.path_end(&u).unwrap();
                let w = Path::new(mid, p.edges()[cut..].to_vec());
                let max_len = p.len();
                let homs = free_category_homs(
                    &g,
                    p.start(),
                    &g.path_end(&p).unwrap(),
                    max_len,
                )
                .unwrap();
                let glued = g.concat(&u, &w).unwrap();
                prop_assert!(homs.contains(&glued));
            }
        }
    }

    #[test]
    fn homs_closed_under_truncated_concatenation() {
        let g = Graph::build(&["a", "b"], &[("e", "a", "b"), ("f", "b", "a")]).unwrap();
        let max_len = 4;
        for x in ["a", "b"] {
            for y in ["a", "b"] {
                for z in ["a", "b"] {
                    let us = free_category_homs(&g, &oid(x), &oid(y), max_len).unwrap();
                    let ws = free_category_homs(&g, &oid(y), &oid(z), max_len).unwrap();
                    let all = free_category_homs(&g, &oid(x), &oid(z), max_len).unwrap();
                    for u in &us {
                        for w in &ws {
                            if u.len() + w.len() <= max_len {
                                let c = g.concat(u, w).unwrap();
                                assert!(all.contains(&c), "{c} missing from homs({x},{z})");
                            }
                        }
                    }
                }
            }
        }
    }
}
