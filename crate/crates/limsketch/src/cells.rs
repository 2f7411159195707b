//! The two cell constructions: freely adjoin a cone of legs from an
//! object over a diagram (the coinserter), then freely adjoin a single
//! filler arrow whose composites with the cone legs recover those legs.
//! Maps out of either cell are classified by their universal properties,
//! and the filler cells over all (object, non-trivial cone) pairs form
//! the generating set that drives the realization loop.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::category::{materialize_bounded, CatFunctor, MorphId};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Gwi, ObjectId, Path};
use crate::presentation::{pushout, Presentation, PresentationArrow};
use crate::sketch::{Cone, ConeIndex, LimitSketch};
use crate::word::{decide_equal, EqVerdict};
use crate::{Bounded, Bounds};

/// The presentation freely extended by one cone of legs from `y` over the
/// diagram of a chosen cone, modulo the naturality relations.
#[derive(Debug, Clone)]
pub struct Coinserter {
    /// The object the new legs start from.
    pub y: ObjectId,
    /// Which cone of the sketch was used.
    pub alpha: ConeIndex,
    /// Copy of that cone (diagram and legs in the original base).
    pub cone: Cone,
    /// The extended presentation.
    pub result: Presentation,
    /// Identity-on-generators inclusion of the base.
    pub inclusion: PresentationArrow,
    /// Fresh leg edge per index object.
    pub legs: BTreeMap<ObjectId, EdgeId>,
}

/// Leg edge ids are `{y}:{cone}:leg:{i}`; the filler is `{y}:{cone}:fill`.
/// Repeat attachments pick up a `:k` counter via [`mint_in_graph`].
fn leg_edge_name(y: &ObjectId, cone: &Cone, i: &ObjectId) -> EdgeId {
    EdgeId::new(format!("{y}:{}:leg:{i}", cone.name()))
}

fn fill_edge_name(y: &ObjectId, cone: &Cone) -> EdgeId {
    EdgeId::new(format!("{y}:{}:fill", cone.name()))
}

fn mint_in_graph(g: &Graph, candidate: &EdgeId) -> EdgeId {
    if !g.has_edge(candidate) {
        return candidate.clone();
    }
    for k in 1.. {
        let fresh = EdgeId::new(format!("{candidate}:{k}"));
        if !g.has_edge(&fresh) {
            return fresh;
        }
    }
    unreachable!()
}

/// Extend the base of `s` by fresh legs `γ_i : y -> φ(i)` and quotient by
/// the naturality relations `φ(f) ∘ γ_i ~ γ_j`. Built as a pushout of the
/// enlarged free presentation against the base, then a quotient.
pub fn coinserter(s: &LimitSketch, y: &ObjectId, alpha: ConeIndex) -> Result<Coinserter> {
    let base = s.base();
    if !base.has_object(y) {
        return Err(Error::UnknownVertex(y.clone()));
    }
    let cone = s.cone(alpha)?.clone();

    // The enlarged graph: the base's generators plus one leg per index object.
    let mut enlarged: Graph = base.generators().non_identity_graph();
    let mut wanted_legs = Vec::new();
    for i in cone.index().objects() {
        let name = mint_in_graph(&enlarged, &leg_edge_name(y, &cone, i));
        let tgt = cone.diagram().object_image(i)?.clone();
        enlarged.add_edge(name.clone(), y.clone(), tgt)?;
        wanted_legs.push((i.clone(), name));
    }

    let free_base = Presentation::new(Gwi::free(base.generators().non_identity_graph())?);
    let free_extended = Presentation::new(Gwi::free(enlarged)?);
    let free_leg = PresentationArrow::inclusion(&free_base, &free_extended)?;
    let counit_leg = PresentationArrow::inclusion(&free_base, base)?;
    let po = pushout(&free_leg, &counit_leg)?;

    // Where did each fresh leg end up?
    let mut legs = BTreeMap::new();
    for (i, name) in &wanted_legs {
        let image = po.from_free.map().edge_image(name)?;
        legs.insert(i.clone(), image.edges()[0].clone());
    }

    // Quotient by naturality: γ_i then φ(f) equals γ_j.
    let mut rels = Vec::new();
    for f in cone.index().morphisms() {
        let (i, j) = (cone.index().src(f), cone.index().tgt(f));
        let gi = po.result.edge_path(&legs[i])?;
        let lhs = po.result.concat(&gi, cone.diagram().morphism_image(f)?)?;
        let rhs = po.result.edge_path(&legs[j])?;
        rels.push((lhs, rhs));
    }
    let result = po.result.quotient(&rels)?;
    let inclusion = PresentationArrow::inclusion(base, &result)?;

    Ok(Coinserter {
        y: y.clone(),
        alpha,
        cone,
        result,
        inclusion,
        legs,
    })
}

impl Coinserter {
    /// Leg edges as one-edge paths in the result.
    pub fn leg_path(&self, i: &ObjectId) -> Result<Path> {
        let e = self
            .legs
            .get(i)
            .ok_or_else(|| Error::PartialMap(format!("leg at `{i}`")))?;
        self.result.edge_path(e)
    }
}

/// Unique map out of the coinserter determined by a functor on the base
/// and a natural family of legs in the target.
///
/// `kappa` gives, per index object, a path `F(y) -> F(φ(i))` in the target
/// of `f`. Naturality of `kappa` is a precondition, checked with the word
/// problem at `bound`.
pub fn induced_from_cone(
    c: &Coinserter,
    f: &PresentationArrow,
    kappa: &BTreeMap<ObjectId, Path>,
    bound: usize,
) -> Result<PresentationArrow> {
    let target = f.target().clone();
    let fy = f.object_image(&c.y)?.clone();
    for i in c.cone.index().objects() {
        let k = kappa
            .get(i)
            .ok_or_else(|| Error::PartialMap(format!("kappa at `{i}`")))?;
        let want_tgt = f.object_image(c.cone.diagram().object_image(i)?)?;
        if k.start() != &fy || &target.path_end(k)? != want_tgt {
            return Err(Error::Precondition(format!(
                "kappa at `{i}` is not typed {fy} -> {want_tgt}"
            )));
        }
    }
    for m in c.cone.index().morphisms() {
        let (i, j) = (c.cone.index().src(m), c.cone.index().tgt(m));
        let image = f.apply_path(c.cone.diagram().morphism_image(m)?)?;
        let lhs = target.concat(&kappa[i], &image)?;
        if decide_equal(&target, &lhs, &kappa[j], bound)? != EqVerdict::Equal {
            return Err(Error::Precondition(format!(
                "kappa is not natural over index morphism {}",
                m.0
            )));
        }
    }
    let mut map = f.map().clone();
    for (i, e) in &c.legs {
        map.map_edge(e.clone(), kappa[i].clone());
    }
    PresentationArrow::new(c.result.clone(), target, map)
}

/// The coinserter further extended by a filler `γ̄ : y -> apex` with the
/// relations `δ_i ∘ γ̄ ~ γ_i`.
#[derive(Debug, Clone)]
pub struct FillerCell {
    pub coinserter: Coinserter,
    /// The extended presentation.
    pub result: Presentation,
    /// `r : E[y;α] -> E[y;α]'`.
    pub retract: PresentationArrow,
    /// The fresh filler edge.
    pub filler: EdgeId,
    /// `j = r ∘ i : E -> E[y;α]'`.
    pub unit: PresentationArrow,
}

pub fn filler_cell(s: &LimitSketch, y: &ObjectId, alpha: ConeIndex) -> Result<FillerCell> {
    let c = coinserter(s, y, alpha)?;

    let mut enlarged: Graph = c.result.generators().non_identity_graph();
    let fill_name = mint_in_graph(&enlarged, &fill_edge_name(y, &c.cone));
    enlarged.add_edge(fill_name.clone(), y.clone(), c.cone.apex().clone())?;

    let free_base = Presentation::new(Gwi::free(c.result.generators().non_identity_graph())?);
    let free_extended = Presentation::new(Gwi::free(enlarged)?);
    let free_leg = PresentationArrow::inclusion(&free_base, &free_extended)?;
    let counit_leg = PresentationArrow::inclusion(&free_base, &c.result)?;
    let po = pushout(&free_leg, &counit_leg)?;

    let filler = po.from_free.map().edge_image(&fill_name)?.edges()[0].clone();

    let mut rels = Vec::new();
    for i in c.cone.index().objects().to_vec() {
        let gamma_bar = po.result.edge_path(&filler)?;
        let lhs = po.result.concat(&gamma_bar, c.cone.leg(&i)?)?;
        let rhs = po.result.edge_path(&c.legs[&i])?;
        rels.push((lhs, rhs));
    }
    let result = po.result.quotient(&rels)?;
    let retract = PresentationArrow::inclusion(&c.result, &result)?;
    let unit = c.inclusion.then(&retract)?;

    Ok(FillerCell {
        coinserter: c,
        result,
        retract,
        filler,
        unit,
    })
}

impl FillerCell {
    pub fn filler_path(&self) -> Result<Path> {
        self.result.edge_path(&self.filler)
    }
}

/// Unique map out of the filler cell determined by a map out of the
/// coinserter and a choice of filler image.
///
/// `h` is a path `F(y) -> F(apex)` in the target of `f`; the side
/// conditions `F(δ_i) ∘ h ~ F(γ_i)` are preconditions, checked at `bound`.
pub fn induced_from_filler(
    fc: &FillerCell,
    f: &PresentationArrow,
    h: &Path,
    bound: usize,
) -> Result<PresentationArrow> {
    let c = &fc.coinserter;
    let target = f.target().clone();
    let fy = f.object_image(&c.y)?.clone();
    let fapex = f.object_image(c.cone.apex())?.clone();
    if h.start() != &fy || target.path_end(h)? != fapex {
        return Err(Error::Precondition(format!(
            "filler image is not typed {fy} -> {fapex}"
        )));
    }
    for i in c.cone.index().objects() {
        let delta = f.apply_path(c.cone.leg(i)?)?;
        let lhs = target.concat(h, &delta)?;
        let gamma = f.apply_path(&c.leg_path(i)?)?;
        if decide_equal(&target, &lhs, &gamma, bound)? != EqVerdict::Equal {
            return Err(Error::Precondition(format!(
                "filler image violates the side condition at index `{i}`"
            )));
        }
    }
    let mut map = f.map().clone();
    map.map_edge(fc.filler.clone(), h.clone());
    PresentationArrow::new(fc.result.clone(), target, map)
}

/// One element of the Φ set: a map out of the coinserter restricting to
/// the given base functor, paired with a compatible filler morphism.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PhiPair {
    /// Functor data out of the coinserter, into the materialized target.
    pub functor: CatFunctor,
    /// The filler morphism.
    pub h: MorphId,
}

/// All pairs `(G, h)` where `G` extends `f` along the coinserter inclusion
/// and `h` satisfies the filler side conditions, in lexicographic order of
/// (leg choices, h). Bijective with maps out of the filler cell.
pub fn phi_set(
    s: &LimitSketch,
    f: &PresentationArrow,
    y: &ObjectId,
    alpha: ConeIndex,
    bounds: &Bounds,
) -> Result<Bounded<Vec<PhiPair>>> {
    let c = coinserter(s, y, alpha)?;
    let mat = match materialize_bounded(f.target(), bounds)? {
        Bounded::Done(m) => m,
        Bounded::Diverged { witness } => return Ok(Bounded::Diverged { witness }),
    };
    let base_part = CatFunctor::from_arrow(f, &mat)?;
    let fy = base_part.object_image(y)?.clone();
    let fapex = base_part.object_image(c.cone.apex())?.clone();

    // Evaluate the diagram and the cone legs in the target.
    let index_objects: Vec<ObjectId> = c.cone.index().objects().to_vec();
    let mut diagram_obj = BTreeMap::new();
    let mut delta_eval = BTreeMap::new();
    for i in &index_objects {
        diagram_obj.insert(
            i.clone(),
            base_part
                .object_image(c.cone.diagram().object_image(i)?)?
                .clone(),
        );
        delta_eval.insert(
            i.clone(),
            mat.eval_path(&f.apply_path(c.cone.leg(i)?)?)?,
        );
    }
    let mut diagram_mor = BTreeMap::new();
    for m in c.cone.index().morphisms() {
        diagram_mor.insert(
            m,
            mat.eval_path(&f.apply_path(c.cone.diagram().morphism_image(m)?)?)?,
        );
    }

    let leg_choices: Vec<Vec<MorphId>> = index_objects
        .iter()
        .map(|i| mat.hom(&fy, &diagram_obj[i]).to_vec())
        .collect();
    let kappa_iter: Box<dyn Iterator<Item = Vec<MorphId>>> = if index_objects.is_empty() {
        Box::new(std::iter::once(Vec::new()))
    } else if leg_choices.iter().any(|c| c.is_empty()) {
        Box::new(std::iter::empty())
    } else {
        Box::new(leg_choices.into_iter().multi_cartesian_product())
    };

    let mut out = Vec::new();
    'kappa: for pick in kappa_iter {
        let kappa: BTreeMap<&ObjectId, MorphId> =
            index_objects.iter().zip(pick.iter().copied()).collect();
        // Naturality in the materialized target is exact.
        for m in c.cone.index().morphisms() {
            if mat.is_identity(m) {
                continue;
            }
            let (i, j) = (c.cone.index().src(m), c.cone.index().tgt(m));
            if mat.compose(diagram_mor[&m], kappa[i])? != kappa[j] {
                continue 'kappa;
            }
        }
        // Assemble G out of the coinserter.
        let mut g = base_part.clone();
        for (i, e) in &c.legs {
            g.map_edge(e.clone(), kappa[i]);
        }
        // All compatible fillers.
        for &h in mat.hom(&fy, &fapex) {
            let ok = index_objects
                .iter()
                .map(|i| Ok(mat.compose(delta_eval[i], h)? == kappa[i]))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|b| b);
            if ok {
                out.push(PhiPair {
                    functor: g.clone(),
                    h,
                });
            }
        }
    }
    Ok(Bounded::Done(out))
}

/// One generating cell: the filler-cell retract at `(y, alpha)`, viewed
/// under the base.
#[derive(Debug, Clone)]
pub struct GeneratingCell {
    pub y: ObjectId,
    pub alpha: ConeIndex,
    pub cell: FillerCell,
}

/// The generating set: one cell per (object, cone) pair. Trivial cones
/// are skipped by default because their retract is an isomorphism up to
/// path equality, so lifting against them is automatic; pass
/// `include_trivial` to restore them for conformance testing.
pub fn generating_set(s: &LimitSketch, include_trivial: bool) -> Result<Vec<GeneratingCell>> {
    let mut out = Vec::new();
    let indices: Vec<ConeIndex> = if include_trivial {
        s.cones().map(|(i, _)| i).collect()
    } else {
        s.non_trivial_indices()
    };
    for y in s.base().objects().cloned().collect::<Vec<_>>() {
        for &alpha in &indices {
            out.push(GeneratingCell {
                y: y.clone(),
                alpha,
                cell: filler_cell(s, &y, alpha)?,
            });
        }
    }
    Ok(out)
}
