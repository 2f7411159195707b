//! The word problem for finitely presented categories, decided by
//! bidirectional BFS over the rewrite graph of reduced paths.
//!
//! Nodes of the rewrite graph are reduced paths; an arc replaces one
//! occurrence of one side of a relation by the other side, in either
//! direction. Given a length bound, the search answers three ways:
//!
//! - `Equal` — the two frontiers met; the paths are congruent.
//! - `Distinct` — one path's entire component was explored without ever
//!   touching the length bound or the node budget, and the other path is
//!   not in it. This is a sound certificate of inequality.
//! - `Unknown` — a budget cut the exploration short.
//!
//! Seed paths longer than the bound are still admitted (the node set is
//! widened to cover them), but any explored path of length >= the bound
//! spoils completeness, so `Distinct` stays conservative.
//!
//! Queries against one presentation share a [`RewriteContext`] that
//! interns edge ids, so the inner search works on small integer words.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, ObjectId, Path};
use crate::presentation::Presentation;

/// Nodes explored per side before a search gives up with `Unknown`.
const NODE_BUDGET: usize = 384;

/// Three-valued answer of [`decide_equal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqVerdict {
    Equal,
    Distinct,
    Unknown,
}

impl EqVerdict {
    pub fn is_equal(self) -> bool {
        self == EqVerdict::Equal
    }
}

/// Interned word: start vertex and edge indices in traversal order.
/// Ordered by (length, edges, start) so shorter words are explored first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Word {
    start: u32,
    edges: Vec<u32>,
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.edges.len(), &self.edges, self.start).cmp(&(
            other.edges.len(),
            &other.edges,
            other.start,
        ))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct InternedRelation {
    lhs: Word,
    rhs: Word,
}

/// Preprocessed rewrite data for one presentation.
pub struct RewriteContext<'p> {
    presentation: &'p Presentation,
    edge_index: BTreeMap<EdgeId, u32>,
    vertex_index: BTreeMap<ObjectId, u32>,
    /// Target vertex per interned edge.
    edge_tgt: Vec<u32>,
    relations: Vec<InternedRelation>,
}

impl<'p> RewriteContext<'p> {
    pub fn new(p: &'p Presentation) -> RewriteContext<'p> {
        let mut vertex_index = BTreeMap::new();
        for v in p.objects() {
            let next = vertex_index.len() as u32;
            vertex_index.insert(v.clone(), next);
        }
        let mut edge_index = BTreeMap::new();
        let mut edge_tgt = Vec::new();
        for (e, _, t) in p.generators().non_identity_edges() {
            let next = edge_index.len() as u32;
            edge_index.insert(e.clone(), next);
            edge_tgt.push(vertex_index[t]);
        }
        let mut ctx = RewriteContext {
            presentation: p,
            edge_index,
            vertex_index,
            edge_tgt,
            relations: Vec::new(),
        };
        let rels: Vec<InternedRelation> = p
            .relations()
            .map(|r| InternedRelation {
                lhs: ctx.intern(r.lhs()).expect("relation paths are valid"),
                rhs: ctx.intern(r.rhs()).expect("relation paths are valid"),
            })
            .collect();
        ctx.relations = rels;
        ctx
    }

    fn intern(&self, p: &Path) -> Result<Word> {
        let start = *self
            .vertex_index
            .get(p.start())
            .ok_or_else(|| Error::UnknownVertex(p.start().clone()))?;
        let edges = p
            .edges()
            .iter()
            .map(|e| {
                self.edge_index
                    .get(e)
                    .copied()
                    .ok_or_else(|| Error::UnknownEdge(e.clone()))
            })
            .collect::<Result<Vec<u32>>>()?;
        Ok(Word { start, edges })
    }

    /// Vertices visited by a word, one per splice position.
    fn visited(&self, w: &Word) -> Vec<u32> {
        let mut out = Vec::with_capacity(w.edges.len() + 1);
        out.push(w.start);
        for &e in &w.edges {
            out.push(self.edge_tgt[e as usize]);
        }
        out
    }

    /// All single-step rewrites of a word. Both relation sides are
    /// reduced, so splicing keeps words reduced.
    fn successors(&self, w: &Word, out: &mut Vec<Word>) {
        out.clear();
        let visited = self.visited(w);
        for rel in &self.relations {
            for (from, to) in [(&rel.lhs, &rel.rhs), (&rel.rhs, &rel.lhs)] {
                if from.edges.is_empty() {
                    for (i, &v) in visited.iter().enumerate() {
                        if v == from.start {
                            let mut edges =
                                Vec::with_capacity(w.edges.len() + to.edges.len());
                            edges.extend_from_slice(&w.edges[..i]);
                            edges.extend_from_slice(&to.edges);
                            edges.extend_from_slice(&w.edges[i..]);
                            out.push(Word {
                                start: w.start,
                                edges,
                            });
                        }
                    }
                } else {
                    let n = from.edges.len();
                    if n > w.edges.len() {
                        continue;
                    }
                    for i in 0..=(w.edges.len() - n) {
                        if w.edges[i..i + n] == from.edges[..] {
                            let mut edges = Vec::with_capacity(
                                w.edges.len() - n + to.edges.len(),
                            );
                            edges.extend_from_slice(&w.edges[..i]);
                            edges.extend_from_slice(&to.edges);
                            edges.extend_from_slice(&w.edges[i + n..]);
                            out.push(Word {
                                start: w.start,
                                edges,
                            });
                        }
                    }
                }
            }
        }
    }

    /// Decide whether two parallel paths are congruent, searching from
    /// both sides up to the length bound and the node budget.
    pub fn decide(&self, u: &Path, v: &Path, bound: usize) -> Result<EqVerdict> {
        let p = self.presentation;
        let u = p.reduce(u)?;
        let v = p.reduce(v)?;
        let (eu, ev) = (p.path_end(&u)?, p.path_end(&v)?);
        if u.start() != v.start() || eu != ev {
            return Err(Error::NotParallel(
                u.start().clone(),
                eu,
                v.start().clone(),
                ev,
            ));
        }
        if u == v {
            return Ok(EqVerdict::Equal);
        }
        let wu = self.intern(&u)?;
        let wv = self.intern(&v)?;
        // Seeds longer than the bound are admitted; completeness is
        // already lost for their side, which keeps Distinct sound.
        let limit = bound.max(wu.edges.len()).max(wv.edges.len());

        let mut side_u = Frontier::new(wu, bound);
        let mut side_v = Frontier::new(wv, bound);
        let mut successors = Vec::new();

        while !side_u.queue.is_empty() || !side_v.queue.is_empty() {
            // Expand the smaller live frontier; ties go to the u side.
            let (this, other) = if side_v.queue.is_empty()
                || (!side_u.queue.is_empty() && side_u.queue.len() <= side_v.queue.len())
            {
                (&mut side_u, &side_v)
            } else {
                (&mut side_v, &side_u)
            };
            let Reverse(current) = this.queue.pop().expect("nonempty frontier");
            self.successors(&current, &mut successors);
            for next in successors.drain(..) {
                if other.seen.contains(&next) {
                    return Ok(EqVerdict::Equal);
                }
                if next.edges.len() > limit {
                    this.complete = false;
                    continue;
                }
                if next.edges.len() >= bound {
                    this.complete = false;
                }
                if this.seen.contains(&next) {
                    continue;
                }
                if this.seen.len() >= NODE_BUDGET {
                    this.complete = false;
                    continue;
                }
                this.seen.insert(next.clone());
                this.queue.push(Reverse(next));
            }
        }

        if side_u.complete || side_v.complete {
            Ok(EqVerdict::Distinct)
        } else {
            Ok(EqVerdict::Unknown)
        }
    }
}

/// Shortest-first frontier: expanding short words first makes downhill
/// proofs cheap and keeps the node budget for where it matters.
struct Frontier {
    seen: HashSet<Word>,
    queue: BinaryHeap<Reverse<Word>>,
    /// True while no explored path reached the length bound and no
    /// successor was dropped for exceeding a budget.
    complete: bool,
}

impl Frontier {
    fn new(seed: Word, bound: usize) -> Frontier {
        let complete = seed.edges.len() < bound;
        let mut seen = HashSet::new();
        seen.insert(seed.clone());
        let mut queue = BinaryHeap::new();
        queue.push(Reverse(seed));
        Frontier {
            seen,
            queue,
            complete,
        }
    }
}

/// Decide whether two parallel paths are congruent modulo the relations.
/// One-shot form of [`RewriteContext::decide`].
pub fn decide_equal(p: &Presentation, u: &Path, v: &Path, bound: usize) -> Result<EqVerdict> {
    RewriteContext::new(p).decide(u, v, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Gwi};

    fn oid(s: &str) -> ObjectId {
        ObjectId::new(s)
    }

    fn eid(s: &str) -> EdgeId {
        EdgeId::new(s)
    }

    /// Commuting square: f,g,h,k with g.f = k.h.
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
    fn defining_relation_is_equal() {
        let p = square();
        let gf = Path::new(oid("a"), vec![eid("f"), eid("g")]);
        let kh = Path::new(oid("a"), vec![eid("h"), eid("k")]);
        assert_eq!(decide_equal(&p, &gf, &kh, 4).unwrap(), EqVerdict::Equal);
    }

    #[test]
    fn reflexivity_at_bound_zero() {
        let p = square();
        let gf = Path::new(oid("a"), vec![eid("f"), eid("g")]);
        assert_eq!(decide_equal(&p, &gf, &gf, 0).unwrap(), EqVerdict::Equal);
    }

    #[test]
    fn distinct_without_relations() {
        let g = Graph::build(&["a", "b"], &[("f", "a", "b"), ("g", "a", "b")]).unwrap();
        let p = Presentation::new(Gwi::free(g).unwrap());
        let f = p.edge_path(&eid("f")).unwrap();
        let gp = p.edge_path(&eid("g")).unwrap();
        assert_eq!(decide_equal(&p, &f, &gp, 3).unwrap(), EqVerdict::Distinct);
    }

    #[test]
    fn non_parallel_paths_are_a_typing_error() {
        let p = square();
        let f = p.edge_path(&eid("f")).unwrap();
        let h = p.edge_path(&eid("h")).unwrap();
        assert!(matches!(
            decide_equal(&p, &f, &h, 3),
            Err(Error::NotParallel(..))
        ));
    }

    #[test]
    fn distinct_when_one_component_completes() {
        // e.e = e relates the powers of e; x is untouched by any relation,
        // so its singleton component certifies Distinct even though the
        // component of e keeps growing past any bound.
        let g = Graph::build(&["v"], &[("e", "v", "v"), ("x", "v", "v")]).unwrap();
        let mut p = Presentation::new(Gwi::free(g).unwrap());
        let e = p.edge_path(&eid("e")).unwrap();
        let ee = Path::new(oid("v"), vec![eid("e"), eid("e")]);
        p.add_relation(&ee, &e).unwrap();
        let x = p.edge_path(&eid("x")).unwrap();
        assert_eq!(decide_equal(&p, &e, &x, 2).unwrap(), EqVerdict::Distinct);
        assert_eq!(decide_equal(&p, &x, &e, 3).unwrap(), EqVerdict::Distinct);
    }

    #[test]
    fn unknown_when_both_components_touch_the_bound() {
        // Both loops have a growing relation, so neither component ever
        // completes and the bound forces an honest Unknown.
        let g = Graph::build(&["v"], &[("e", "v", "v"), ("x", "v", "v")]).unwrap();
        let mut p = Presentation::new(Gwi::free(g).unwrap());
        let e = p.edge_path(&eid("e")).unwrap();
        let ee = Path::new(oid("v"), vec![eid("e"), eid("e")]);
        p.add_relation(&ee, &e).unwrap();
        let x = p.edge_path(&eid("x")).unwrap();
        let xx = Path::new(oid("v"), vec![eid("x"), eid("x")]);
        p.add_relation(&xx, &x).unwrap();
        assert_eq!(decide_equal(&p, &e, &x, 2).unwrap(), EqVerdict::Unknown);
        assert_eq!(decide_equal(&p, &e, &x, 6).unwrap(), EqVerdict::Unknown);
    }

    #[test]
    fn empty_relation_side_rewrites_by_insertion() {
        // e ~ id: the loop collapses.
        let g = Graph::build(&["v"], &[("e", "v", "v")]).unwrap();
        let mut p = Presentation::new(Gwi::free(g).unwrap());
        let e = p.edge_path(&eid("e")).unwrap();
        p.add_relation(&e, &Path::empty(oid("v"))).unwrap();
        let eee = Path::new(oid("v"), vec![eid("e"), eid("e"), eid("e")]);
        assert_eq!(
            decide_equal(&p, &eee, &Path::empty(oid("v")), 4).unwrap(),
            EqVerdict::Equal
        );
    }

    #[test]
    fn long_seeds_are_admitted() {
        let p = square();
        // A composite longer than the bound still decides Equal because the
        // node set is widened to cover the seeds.
        let gf = Path::new(oid("a"), vec![eid("f"), eid("g")]);
        let kh = Path::new(oid("a"), vec![eid("h"), eid("k")]);
        assert_eq!(decide_equal(&p, &gf, &kh, 1).unwrap(), EqVerdict::Equal);
    }

    #[test]
    fn context_reuse_matches_one_shot_queries() {
        let p = square();
        let ctx = RewriteContext::new(&p);
        let gf = Path::new(oid("a"), vec![eid("f"), eid("g")]);
        let kh = Path::new(oid("a"), vec![eid("h"), eid("k")]);
        let f = p.edge_path(&eid("f")).unwrap();
        assert_eq!(ctx.decide(&gf, &kh, 4).unwrap(), EqVerdict::Equal);
        assert_eq!(
            ctx.decide(&gf, &kh, 4).unwrap(),
            decide_equal(&p, &gf, &kh, 4).unwrap()
        );
        let gf2 = p.concat(&f, &p.edge_path(&eid("g")).unwrap()).unwrap();
        assert_eq!(ctx.decide(&gf, &gf2, 2).unwrap(), EqVerdict::Equal);
    }
}
