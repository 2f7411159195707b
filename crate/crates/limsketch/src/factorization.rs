//! Lifting problems, unique orthogonality, and the bounded
//! small-object-argument loop that saturates a limit sketch into its
//! universal realization.
//!
//! Each saturation pass materializes the current base, then scans every
//! (object, non-trivial cone, cone family) triple against that snapshot:
//! a family with no filler gets a fresh filler edge attached (a pushout
//! along the cell's retract with its relations instantiated at the
//! family), and a family with several fillers gets relations identifying
//! the later ones with the earliest. The loop stops at the first
//! zero-event pass (`Stabilized`) or when a budget runs out
//! (`BudgetExhausted`). Attachment order is (object, cone, family legs)
//! lexicographic, so traces are reproducible byte for byte.
//!
//! Orthogonality is decided in the coslice under a base presentation:
//! squares are enumerated over maps that restrict correctly along the
//! structure maps. Plain orthogonality is the special case of an empty
//! base.

use std::collections::BTreeMap;
use std::fmt;

use crate::category::{
    enumerate_functors, materialize_attempt, materialize_bounded, CatFunctor,
    MaterializeAttempt, MaterializedCategory, MorphId,
};
use crate::cells::{filler_cell, induced_from_cone, GeneratingCell};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, ObjectId, Path};
use crate::presentation::{pushout, Presentation, PresentationArrow};
use crate::sketch::{
    check_limit_cone, cone_fillers, enumerate_cone_families, ConeIndex, LimitSketch, SketchMap,
};
use crate::word::{decide_equal, EqVerdict};
use crate::{Bounded, Bounds};

/// A commuting square: `right ∘ top = bottom ∘ left` up to path equality.
#[derive(Debug, Clone)]
pub struct LiftingProblem {
    pub left: PresentationArrow,
    pub right: PresentationArrow,
    pub top: PresentationArrow,
    pub bottom: PresentationArrow,
}

impl LiftingProblem {
    pub fn new(
        left: PresentationArrow,
        right: PresentationArrow,
        top: PresentationArrow,
        bottom: PresentationArrow,
    ) -> Result<LiftingProblem> {
        if top.source() != left.source() || top.target() != right.source() {
            return Err(Error::Validation("top map endpoints do not match".into()));
        }
        if bottom.source() != left.target() || bottom.target() != right.target() {
            return Err(Error::Validation(
                "bottom map endpoints do not match".into(),
            ));
        }
        Ok(LiftingProblem {
            left,
            right,
            top,
            bottom,
        })
    }
}

/// All lifts of the square: maps `h` from the left map's target into the
/// right map's source with `h ∘ left = top` and `right ∘ h = bottom`,
/// enumerated over the materialized hom-sets and deduplicated by class.
pub fn find_lifts(lp: &LiftingProblem, bounds: &Bounds) -> Result<Bounded<Vec<CatFunctor>>> {
    let mat_a = match materialize_bounded(lp.right.source(), bounds)? {
        Bounded::Done(m) => m,
        Bounded::Diverged { witness } => return Ok(Bounded::Diverged { witness }),
    };
    let mat_b = match materialize_bounded(lp.right.target(), bounds)? {
        Bounded::Done(m) => m,
        Bounded::Diverged { witness } => return Ok(Bounded::Diverged { witness }),
    };
    let top_eval = CatFunctor::from_arrow(&lp.top, &mat_a)?;
    let bottom_eval = CatFunctor::from_arrow(&lp.bottom, &mat_b)?;

    // The square must commute before lifting makes sense.
    let left_then_bottom = lp.left.then(&lp.bottom)?;
    let top_then_right = lp.top.then(&lp.right)?;
    if CatFunctor::from_arrow(&left_then_bottom, &mat_b)?
        != CatFunctor::from_arrow(&top_then_right, &mat_b)?
    {
        return Err(Error::Precondition("the square does not commute".into()));
    }

    let mut lifts = Vec::new();
    for h in enumerate_functors(lp.left.target(), &mat_a)? {
        if !restricts_along(&h, &lp.left, &top_eval, lp.left.source(), &mat_a)? {
            continue;
        }
        if !composes_to(&h, &lp.right, &bottom_eval, lp.left.target(), &mat_a, &mat_b)? {
            continue;
        }
        lifts.push(h);
    }
    Ok(Bounded::Done(lifts))
}

/// Does `h ∘ along = expected` hold, evaluating in `mat`?
fn restricts_along(
    h: &CatFunctor,
    along: &PresentationArrow,
    expected: &CatFunctor,
    source: &Presentation,
    mat: &MaterializedCategory,
) -> Result<bool> {
    for o in source.objects() {
        if h.object_image(along.object_image(o)?)? != expected.object_image(o)? {
            return Ok(false);
        }
    }
    for (e, _, _) in source.generators().non_identity_edges() {
        let image_path = along.map().edge_image(e)?;
        if h.eval_path(along.target(), mat, image_path)? != expected.edge_image(e)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Does `after ∘ h = expected` hold, with `h` into `mat_mid` and the rest
/// evaluated in `mat_end`?
fn composes_to(
    h: &CatFunctor,
    after: &PresentationArrow,
    expected: &CatFunctor,
    source: &Presentation,
    mat_mid: &MaterializedCategory,
    mat_end: &MaterializedCategory,
) -> Result<bool> {
    for o in source.objects() {
        let mid = h.object_image(o)?;
        if after.object_image(mid)? != expected.object_image(o)? {
            return Ok(false);
        }
    }
    for (e, _, _) in source.generators().non_identity_edges() {
        let mid = h.edge_image(e)?;
        let rep = mat_mid.rep(mid);
        let image = after.apply_path(rep)?;
        if mat_end.eval_path(&image)? != expected.edge_image(e)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An arrow of presentations under a base: the structure maps send the
/// base into both endpoints and commute with the arrow.
#[derive(Debug, Clone)]
pub struct CosliceArrow {
    pub base: Presentation,
    /// `base -> source of map`.
    pub source_structure: PresentationArrow,
    /// `base -> target of map`.
    pub target_structure: PresentationArrow,
    pub map: PresentationArrow,
}

impl CosliceArrow {
    pub fn under(
        base: Presentation,
        source_structure: PresentationArrow,
        target_structure: PresentationArrow,
        map: PresentationArrow,
    ) -> Result<CosliceArrow> {
        if source_structure.source() != &base || target_structure.source() != &base {
            return Err(Error::Validation(
                "structure maps must start at the base".into(),
            ));
        }
        if source_structure.target() != map.source() || target_structure.target() != map.target() {
            return Err(Error::Validation(
                "structure maps must land in the arrow's endpoints".into(),
            ));
        }
        Ok(CosliceArrow {
            base,
            source_structure,
            target_structure,
            map,
        })
    }

    /// A plain arrow, i.e. an arrow under the empty presentation.
    pub fn plain(map: PresentationArrow) -> CosliceArrow {
        let base = Presentation::empty();
        let source_structure =
            PresentationArrow::new(base.clone(), map.source().clone(), Default::default())
                .expect("empty maps are total");
        let target_structure =
            PresentationArrow::new(base.clone(), map.target().clone(), Default::default())
                .expect("empty maps are total");
        CosliceArrow {
            base,
            source_structure,
            target_structure,
            map,
        }
    }

    /// Package a generating cell as its retract under the sketch's base.
    pub fn from_cell(cell: &GeneratingCell) -> Result<CosliceArrow> {
        let c = &cell.cell.coinserter;
        Ok(CosliceArrow {
            base: c.inclusion.source().clone(),
            source_structure: c.inclusion.clone(),
            target_structure: cell.cell.unit.clone(),
            map: cell.cell.retract.clone(),
        })
    }
}

/// Witness for a failed orthogonality check: a commuting square together
/// with all of its lifts (either none or at least two).
#[derive(Debug, Clone)]
pub struct OrthoWitness {
    pub top: CatFunctor,
    pub bottom: CatFunctor,
    pub lifts: Vec<CatFunctor>,
}

/// Verdict of [`orthogonal`].
#[derive(Debug, Clone)]
pub enum OrthoVerdict {
    UniquelyOrthogonal,
    NotOrthogonal(Box<OrthoWitness>),
    Unknown { witness: Path },
}

impl OrthoVerdict {
    pub fn is_unique(&self) -> bool {
        matches!(self, OrthoVerdict::UniquelyOrthogonal)
    }
}

impl fmt::Display for OrthoVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrthoVerdict::UniquelyOrthogonal => write!(f, "uniquely orthogonal"),
            OrthoVerdict::NotOrthogonal(w) => {
                write!(f, "not orthogonal ({} lifts on a witness square)", w.lifts.len())
            }
            OrthoVerdict::Unknown { witness } => write!(f, "unknown (diverged at {witness})"),
        }
    }
}

/// Is every commuting square from `f` to `g` (in the coslice under their
/// common base) filled by exactly one lift?
pub fn orthogonal(f: &CosliceArrow, g: &CosliceArrow, bounds: &Bounds) -> Result<OrthoVerdict> {
    if f.base != g.base {
        return Err(Error::Validation(
            "orthogonality requires a common base".into(),
        ));
    }
    let mat_a = match materialize_bounded(g.map.source(), bounds)? {
        Bounded::Done(m) => m,
        Bounded::Diverged { witness } => return Ok(OrthoVerdict::Unknown { witness }),
    };
    let mat_b = match materialize_bounded(g.map.target(), bounds)? {
        Bounded::Done(m) => m,
        Bounded::Diverged { witness } => return Ok(OrthoVerdict::Unknown { witness }),
    };
    let a_structure = CatFunctor::from_arrow(&g.source_structure, &mat_a)?;
    let b_structure = CatFunctor::from_arrow(&g.target_structure, &mat_b)?;

    // Candidate tops: X -> A under the base.
    let mut tops = Vec::new();
    for t in enumerate_functors(f.map.source(), &mat_a)? {
        if restricts_along(&t, &f.source_structure, &a_structure, &f.base, &mat_a)? {
            tops.push(t);
        }
    }
    // Candidate bottoms: Y -> B under the base.
    let mut bottoms = Vec::new();
    for b in enumerate_functors(f.map.target(), &mat_b)? {
        if restricts_along(&b, &f.target_structure, &b_structure, &f.base, &mat_b)? {
            bottoms.push(b);
        }
    }

    for top in &tops {
        for bottom in &bottoms {
            if !square_commutes(f, g, top, bottom, &mat_a, &mat_b)? {
                continue;
            }
            let lifts = lifts_of_square(f, g, top, bottom, &mat_a, &mat_b)?;
            if lifts.len() != 1 {
                return Ok(OrthoVerdict::NotOrthogonal(Box::new(OrthoWitness {
                    top: top.clone(),
                    bottom: bottom.clone(),
                    lifts,
                })));
            }
        }
    }
    Ok(OrthoVerdict::UniquelyOrthogonal)
}

fn square_commutes(
    f: &CosliceArrow,
    g: &CosliceArrow,
    top: &CatFunctor,
    bottom: &CatFunctor,
    mat_a: &MaterializedCategory,
    mat_b: &MaterializedCategory,
) -> Result<bool> {
    // g ∘ top versus bottom ∘ f on the generators of f's source.
    let x = f.map.source();
    for o in x.objects() {
        let via_top = g.map.object_image(top.object_image(o)?)?;
        let via_bottom = bottom.object_image(f.map.object_image(o)?)?;
        if via_top != via_bottom {
            return Ok(false);
        }
    }
    for (e, _, _) in x.generators().non_identity_edges() {
        let m = top.edge_image(e)?;
        let via_top = mat_b.eval_path(&g.map.apply_path(mat_a.rep(m))?)?;
        let via_bottom = bottom.eval_path(f.map.target(), mat_b, f.map.map().edge_image(e)?)?;
        if via_top != via_bottom {
            return Ok(false);
        }
    }
    Ok(true)
}

fn lifts_of_square(
    f: &CosliceArrow,
    g: &CosliceArrow,
    top: &CatFunctor,
    bottom: &CatFunctor,
    mat_a: &MaterializedCategory,
    mat_b: &MaterializedCategory,
) -> Result<Vec<CatFunctor>> {
    let mut out = Vec::new();
    for h in enumerate_functors(f.map.target(), mat_a)? {
        if !restricts_along(&h, &f.map, top, f.map.source(), mat_a)? {
            continue;
        }
        if !composes_to(&h, &g.map, bottom, f.map.target(), mat_a, mat_b)? {
            continue;
        }
        out.push(h);
    }
    Ok(out)
}

/// One event of the saturation loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SoaEvent {
    /// A cone family with no filler got a fresh filler edge.
    Attach {
        y: ObjectId,
        alpha: ConeIndex,
        cone_name: String,
        /// The family, as canonical representative paths per index object.
        kappa: Vec<(ObjectId, Path)>,
        /// The edge id actually minted.
        edge: EdgeId,
    },
    /// Two distinct fillers of the same family got identified.
    Identify { lhs: Path, rhs: Path },
}

impl fmt::Display for SoaEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SoaEvent::Attach {
                y,
                cone_name,
                kappa,
                edge,
                ..
            } => {
                let legs = kappa
                    .iter()
                    .map(|(i, p)| format!("{i}={p}"))
                    .collect::<Vec<_>>()
                    .join(",");
                write!(f, "ATTACH y={y} alpha={cone_name} legs=[{legs}] edge={edge}")
            }
            SoaEvent::Identify { lhs, rhs } => write!(f, "IDENTIFY m1={lhs} m2={rhs}"),
        }
    }
}

/// Retry budget for the uniqueness-discharge loop inside one pass.
const DISCHARGE_ROUNDS: usize = 32;

/// Materialize the working base, interleaving the uniqueness rule: when the
/// enumeration escapes the budget, any two discovered classes into a cone
/// apex that fill the same cone family must coincide in the realization,
/// so a relation identifying them is added and the attempt retried. Without
/// this, freely attached endo-fillers (say `t : p -> p` with projection
/// relations only) generate an infinite monoid before the pass that would
/// identify `t∘t` with an existing filler can ever see a closed category.
fn materialize_with_uniqueness(
    state: &LimitSketch,
    working: &mut Presentation,
    events: &mut Vec<SoaEvent>,
    bounds: &Bounds,
) -> Result<Bounded<MaterializedCategory>> {
    // Climb a cap ladder: small caps make the escape-sweep-retry cycle
    // cheap while the presentation is still collapsing; the full budget is
    // only spent once no identification fires at the current cap.
    let mut cap = 64.min(bounds.max_morphisms).max(1);
    let mut last_witness = None;
    for _ in 0..DISCHARGE_ROUNDS {
        let attempt = materialize_attempt(working, bounds.max_word_len, cap)?;
        let (witness, mut candidates) = match attempt {
            MaterializeAttempt::Closed(cat) => return Ok(Bounded::Done(cat)),
            MaterializeAttempt::Escaped { witness, reps } => (witness, reps),
        };
        candidates.push(witness.clone());
        let before = events.len();
        sweep_identifications(state, working, &candidates, events, bounds)?;
        if events.len() == before {
            if cap < bounds.max_morphisms {
                cap = (cap * 2).min(bounds.max_morphisms);
            } else {
                return Ok(Bounded::Diverged { witness });
            }
        }
        last_witness = Some(witness);
    }
    Ok(Bounded::Diverged {
        witness: last_witness.expect("at least one round ran"),
    })
}

/// The uniqueness sweep: group the candidate paths landing in a cone apex
/// by the family they fill (legs compared with the word problem) and
/// identify later members with the first one found.
fn sweep_identifications(
    state: &LimitSketch,
    working: &mut Presentation,
    candidates: &[Path],
    events: &mut Vec<SoaEvent>,
    bounds: &Bounds,
) -> Result<()> {
    type FamilyTable = BTreeMap<(ObjectId, ConeIndex), Vec<(Vec<Path>, Path)>>;
    let mut table: FamilyTable = BTreeMap::new();
    for w in candidates {
        let end = working.path_end(w)?;
        for alpha in state.non_trivial_indices() {
            let cone = state.cone(alpha)?;
            if cone.apex() != &end {
                continue;
            }
            let kappa: Vec<Path> = cone
                .index()
                .objects()
                .iter()
                .map(|i| working.reduce(&working.concat(w, cone.leg(i)?)?))
                .collect::<Result<_>>()?;
            let entries = table.entry((w.start().clone(), alpha)).or_default();
            let mut matched = None;
            'entry: for (entry_kappa, h) in entries.iter() {
                for (a, b) in entry_kappa.iter().zip(kappa.iter()) {
                    if decide_equal(working, a, b, bounds.max_word_len)? != EqVerdict::Equal {
                        continue 'entry;
                    }
                }
                matched = Some(h.clone());
                break;
            }
            match matched {
                Some(h) => {
                    // Skip pairs already connected by relations added
                    // earlier in this sweep.
                    if decide_equal(working, &h, w, bounds.max_word_len)? != EqVerdict::Equal {
                        *working = working.quotient(&[(h.clone(), w.clone())])?;
                        events.push(SoaEvent::Identify {
                            lhs: h,
                            rhs: w.clone(),
                        });
                    }
                }
                None => entries.push((kappa, w.clone())),
            }
        }
    }
    Ok(())
}

/// One saturation pass. First the working base is materialized (with
/// uniqueness discharging as needed), then every (object, non-trivial
/// cone, family) triple is scanned against that snapshot: families with no
/// filler get a cell attached, families with several get identifications.
/// Returns the extended sketch and the events, or the divergence witness
/// if no amount of discharging makes the base materialize.
pub fn soa_step(state: &LimitSketch, bounds: &Bounds) -> Result<Bounded<(LimitSketch, Vec<SoaEvent>)>> {
    let mut events = Vec::new();
    let mut working = state.base().clone();
    let snapshot = match materialize_with_uniqueness(state, &mut working, &mut events, bounds)? {
        Bounded::Done(c) => c,
        Bounded::Diverged { witness } => return Ok(Bounded::Diverged { witness }),
    };
    let scan_state = state.with_base(working.clone());

    for y in scan_state.base().objects().cloned().collect::<Vec<_>>() {
        for alpha in scan_state.non_trivial_indices() {
            let cone = scan_state.cone(alpha)?;
            for family in enumerate_cone_families(&snapshot, cone, &y)? {
                let fillers = cone_fillers(&snapshot, cone, &y, &family)?;
                if fillers.is_empty() {
                    let edge = attach_cell(
                        &scan_state,
                        &mut working,
                        &y,
                        alpha,
                        &snapshot,
                        &family,
                        bounds,
                    )?;
                    events.push(SoaEvent::Attach {
                        y: y.clone(),
                        alpha,
                        cone_name: cone.name().to_owned(),
                        kappa: family
                            .iter()
                            .map(|(i, m)| (i.clone(), snapshot.rep(*m).clone()))
                            .collect(),
                        edge,
                    });
                } else if fillers.len() >= 2 {
                    let first = snapshot.rep(fillers[0]).clone();
                    for later in &fillers[1..] {
                        let rhs = snapshot.rep(*later).clone();
                        working = working.quotient(&[(first.clone(), rhs.clone())])?;
                        events.push(SoaEvent::Identify {
                            lhs: first.clone(),
                            rhs,
                        });
                    }
                }
            }
        }
    }

    Ok(Bounded::Done((state.with_base(working), events)))
}

/// Attach one filler cell instantiated at a cone family: a pushout of the
/// cell's retract along the map induced by the family. The net effect on
/// `working` is one fresh edge `y -> apex` plus the relations
/// `δ_i ∘ fresh ~ κ_i`.
fn attach_cell(
    state: &LimitSketch,
    working: &mut Presentation,
    y: &ObjectId,
    alpha: ConeIndex,
    snapshot: &MaterializedCategory,
    family: &[(ObjectId, MorphId)],
    bounds: &Bounds,
) -> Result<EdgeId> {
    let cell = filler_cell(state, y, alpha)?;
    // The family, written as representative paths in the working base.
    let kappa: BTreeMap<ObjectId, Path> = family
        .iter()
        .map(|(i, m)| (i.clone(), snapshot.rep(*m).clone()))
        .collect();
    let into_working = PresentationArrow::inclusion(state.base(), working)?;
    // Naturality of the family was certified against the snapshot at the
    // same word bound, so the re-check inside induced_from_cone succeeds.
    let top = induced_from_cone(&cell.coinserter, &into_working, &kappa, bounds.max_word_len)?;
    let po = pushout(&cell.retract, &top)?;
    let edge_path = po.from_free.map().edge_image(&cell.filler)?;
    let edge = edge_path.edges()[0].clone();
    *working = po.result;
    Ok(edge)
}

/// Status of a realization run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealizeStatus {
    /// A pass produced no events: the sketch is saturated.
    Stabilized,
    /// The iteration budget or a materialization budget ran out.
    BudgetExhausted,
}

/// The realization of a sketch: the saturated sketch, the unit into it,
/// and the full event trace.
#[derive(Debug, Clone)]
pub struct RealizationResult {
    /// The sketch this realization started from.
    pub original: LimitSketch,
    /// The saturated sketch (same cone family, transported verbatim).
    pub realized: LimitSketch,
    /// The unit: inclusion of the base with the identity cone map.
    pub unit: SketchMap,
    pub trace: Vec<SoaEvent>,
    /// Number of passes run, including the final zero-event pass.
    pub iterations: usize,
    pub status: RealizeStatus,
}

/// Saturate to a fixpoint or to the budget.
pub fn realize(s: &LimitSketch, max_iter: usize, bounds: &Bounds) -> Result<RealizationResult> {
    let mut state = s.clone();
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut status = RealizeStatus::BudgetExhausted;
    while iterations < max_iter {
        iterations += 1;
        match soa_step(&state, bounds)? {
            Bounded::Done((next, events)) => {
                if events.is_empty() {
                    status = RealizeStatus::Stabilized;
                    break;
                }
                trace.extend(events);
                state = next;
            }
            Bounded::Diverged { .. } => {
                status = RealizeStatus::BudgetExhausted;
                break;
            }
        }
    }
    let functor = PresentationArrow::inclusion(s.base(), state.base())?;
    let unit = SketchMap {
        functor,
        cone_map: s.cones().map(|(i, _)| (i, i)).collect(),
    };
    Ok(RealizationResult {
        original: s.clone(),
        realized: state,
        unit,
        trace,
        iterations,
        status,
    })
}

impl RealizationResult {
    pub fn is_stabilized(&self) -> bool {
        self.status == RealizeStatus::Stabilized
    }

    /// Render the trace in the line-oriented log format.
    pub fn trace_lines(&self) -> Vec<String> {
        self.trace.iter().map(|e| e.to_string()).collect()
    }
}

/// Extend a cone-preserving functor on the original base through the
/// realization: replay the trace, sending each attached filler to the
/// unique filler its limit cone provides in the target.
///
/// Precondition: `f` sends every specified cone of the original sketch to
/// a limit cone in its target (checked; the error names the cone).
pub fn extend_along_unit(
    r: &RealizationResult,
    f: &PresentationArrow,
    bounds: &Bounds,
) -> Result<Bounded<PresentationArrow>> {
    if f.source() != r.original.base() {
        return Err(Error::Validation(
            "the functor must start at the original base".into(),
        ));
    }
    let mat = match materialize_bounded(f.target(), bounds)? {
        Bounded::Done(m) => m,
        Bounded::Diverged { witness } => return Ok(Bounded::Diverged { witness }),
    };
    for (_, cone) in r.original.cones() {
        let image = cone.image_under(f)?;
        if !check_limit_cone(&mat, &image)? {
            return Err(Error::Precondition(format!(
                "cone `{}` is not sent to a limit cone",
                cone.name()
            )));
        }
    }

    // Extend generator by generator along the trace.
    let mut map = f.map().clone();
    let target = f.target().clone();
    let eval = |map: &crate::presentation::PresentationMap, p: &Path| -> Result<MorphId> {
        // Evaluate a path of the (partially extended) realized base.
        let start = map
            .object_image(p.start())
            .map_err(|e| e.context("extension replay"))?;
        let mut m = mat.identity_of(start)?;
        for e in p.edges() {
            if r.realized.base().generators().is_identity_edge(e) {
                continue;
            }
            let image = map.edge_image(e)?;
            m = mat.compose(mat.eval_path(image)?, m)?;
        }
        Ok(m)
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
                let fy = map.object_image(y)?.clone();
                let family: Vec<(ObjectId, MorphId)> = kappa
                    .iter()
                    .map(|(i, p)| Ok((i.clone(), eval(&map, p)?)))
                    .collect::<Result<_>>()?;
                // The image cone is a limit cone, so exactly one filler.
                let image_cone = cone.image_under(f)?;
                let fillers = cone_fillers(&mat, &image_cone, &fy, &family)?;
                match fillers.as_slice() {
                    [h] => {
                        map.map_edge(edge.clone(), mat.rep(*h).clone());
                    }
                    other => {
                        return Err(Error::Precondition(format!(
                            "expected exactly one filler replaying `{edge}`, found {}",
                            other.len()
                        )))
                    }
                }
            }
            SoaEvent::Identify { lhs, rhs } => {
                if eval(&map, lhs)? != eval(&map, rhs)? {
                    return Err(Error::Precondition(format!(
                        "identification {lhs} ~ {rhs} is not respected in the target"
                    )));
                }
            }
        }
    }
    Ok(Bounded::Done(PresentationArrow::new(
        r.realized.base().clone(),
        target,
        map,
    )?))
}

/// Functorial action of realization: the unique map between realizations
/// commuting with the units.
pub fn realize_morphism(
    m: &SketchMap,
    r_source: &RealizationResult,
    r_target: &RealizationResult,
    bounds: &Bounds,
) -> Result<Bounded<PresentationArrow>> {
    if !r_source.is_stabilized() || !r_target.is_stabilized() {
        return Err(Error::Precondition(
            "both realizations must be stabilized".into(),
        ));
    }
    let composite = m.functor.then(&r_target.unit.functor)?;
    extend_along_unit(r_source, &composite, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::materialize;
    use crate::cells::generating_set;
    use crate::fixtures;
    use crate::graph::Gwi;
    use crate::sketch::{free_sketch, is_realized, validate_sketch_map};

    fn oid(s: &str) -> ObjectId {
        ObjectId::new(s)
    }

    fn eid(s: &str) -> EdgeId {
        EdgeId::new(s)
    }

    fn bounds() -> Bounds {
        Bounds::default()
    }

    #[test]
    fn lifting_along_the_identity_has_exactly_one_lift() {
        let p = fixtures::arrow_presentation();
        let id = PresentationArrow::identity(&p);
        let lp = LiftingProblem::new(id.clone(), id.clone(), id.clone(), id.clone()).unwrap();
        let lifts = find_lifts(&lp, &bounds()).unwrap().expect_done("lifts");
        assert_eq!(lifts.len(), 1);
    }

    #[test]
    fn non_commuting_square_is_an_error() {
        let pair = fixtures::parallel_pair_presentation();
        let discrete = Presentation::new(
            Gwi::free(crate::graph::Graph::build(&["a", "b"], &[]).unwrap()).unwrap(),
        );
        let incl = PresentationArrow::inclusion(&discrete, &pair).unwrap();
        // left = id on discrete, right = id on pair, top sends nothing wrong;
        // build a bottom that disagrees with top on objects.
        let mut swap = crate::presentation::PresentationMap::new();
        swap.map_object(oid("a"), oid("b"));
        swap.map_object(oid("b"), oid("a"));
        let swap = PresentationArrow::new(discrete.clone(), pair.clone(), swap).unwrap();
        let lp = LiftingProblem::new(
            PresentationArrow::identity(&discrete),
            PresentationArrow::identity(&pair),
            incl,
            swap,
        )
        .unwrap();
        assert!(matches!(
            find_lifts(&lp, &bounds()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn identity_is_orthogonal_to_itself() {
        let p = Presentation::terminal();
        let id = CosliceArrow::plain(PresentationArrow::identity(&p));
        let verdict = orthogonal(&id, &id, &bounds()).unwrap();
        assert!(verdict.is_unique());
    }

    #[test]
    fn term2_realizes_to_three_morphisms() {
        let s = fixtures::term2();
        let r = realize(&s, 8, &bounds()).unwrap();
        assert!(r.is_stabilized());
        let cat = materialize(r.realized.base(), 6, 32)
            .unwrap()
            .expect_done("realized TERM2");
        assert_eq!(cat.morphism_count(), 3);
        assert_eq!(cat.hom(&oid("a"), &oid("t")).len(), 1);
        assert_eq!(cat.hom(&oid("t"), &oid("a")).len(), 0);
        // One attachment: the terminal filler from a. The filler at t
        // already exists (the identity), so no event fires there.
        assert_eq!(r.trace.len(), 1);
        assert!(matches!(
            &r.trace[0],
            SoaEvent::Attach { y, edge, .. } if y == &oid("a") && edge == &eid("a:term:fill")
        ));
        assert_eq!(
            is_realized(&r.realized, &bounds()).unwrap(),
            Bounded::Done(true)
        );
    }

    #[test]
    fn prod_is_a_zero_event_fixpoint() {
        let s = fixtures::prod();
        let r = realize(&s, 8, &bounds()).unwrap();
        assert!(r.is_stabilized());
        assert!(r.trace.is_empty());
        assert_eq!(r.iterations, 1);
        assert_eq!(r.realized.base(), s.base());
    }

    #[test]
    fn free_sketches_have_no_events() {
        for p in [
            Presentation::terminal(),
            fixtures::arrow_presentation(),
            fixtures::square_presentation(),
        ] {
            let s = free_sketch(p);
            let (next, events) = soa_step(&s, &bounds()).unwrap().expect_done("step");
            assert!(events.is_empty());
            assert_eq!(next.base(), s.base());
        }
    }

    #[test]
    fn soa_step_is_idempotent_at_fixpoints() {
        let s = fixtures::prod();
        let (s1, e1) = soa_step(&s, &bounds()).unwrap().expect_done("pass 1");
        assert!(e1.is_empty());
        let (_, e2) = soa_step(&s1, &bounds()).unwrap().expect_done("pass 2");
        assert!(e2.is_empty());
    }

    #[test]
    fn sq_realizes_to_the_eight_morphism_category() {
        let r = fixtures::realized_sq();
        assert!(r.is_stabilized());
        let cat = materialize(r.realized.base(), 8, 64)
            .unwrap()
            .expect_done("realized SQ");
        assert_eq!(cat.hom(&oid("a"), &oid("a")).len(), 1);
        assert_eq!(cat.hom(&oid("a"), &oid("p")).len(), 1);
        assert_eq!(cat.hom(&oid("p"), &oid("a")).len(), 2);
        assert_eq!(cat.hom(&oid("p"), &oid("p")).len(), 4);
        assert_eq!(cat.morphism_count(), 8);
        assert_eq!(
            is_realized(&r.realized, &bounds()).unwrap(),
            Bounded::Done(true)
        );
    }

    #[test]
    fn realize_unit_is_a_valid_sketch_map() {
        let r = fixtures::realized_term2();
        let verdict = validate_sketch_map(&r.unit, &r.original, &r.realized, 6).unwrap();
        assert!(verdict.is_valid());
        // Cone map is the identity on indices.
        assert!(r.unit.cone_map.iter().all(|(a, b)| a == b));
    }

    #[test]
    fn realized_fixture_is_fibrant() {
        let r = fixtures::realized_term2();
        let realized = &r.realized;
        let terminal = Presentation::terminal();
        let mut to_terminal = crate::presentation::PresentationMap::new();
        for o in realized.base().objects() {
            to_terminal.map_object(o.clone(), oid("pt"));
        }
        for (e, _, _) in realized.base().generators().non_identity_edges() {
            to_terminal.map_edge(e.clone(), Path::empty(oid("pt")));
        }
        let bang =
            PresentationArrow::new(realized.base().clone(), terminal.clone(), to_terminal)
                .unwrap();
        let unit_structure = PresentationArrow::inclusion(realized.base(), realized.base()).unwrap();
        let to_terminal_structure = unit_structure.then(&bang).unwrap();
        let g = CosliceArrow::under(
            realized.base().clone(),
            unit_structure,
            to_terminal_structure,
            bang,
        )
        .unwrap();
        for cell in generating_set(realized, false).unwrap() {
            let f = CosliceArrow::from_cell(&cell).unwrap();
            let verdict = orthogonal(&f, &g, &bounds()).unwrap();
            assert!(verdict.is_unique(), "cell at {} not orthogonal: {verdict}", cell.y);
        }
    }

    #[test]
    fn unrealized_target_is_not_orthogonal() {
        // The cell at (a, term) against the *discrete* TERM2 base: the
        // square with the identity top has no lift because Hom(a, t) is
        // empty there.
        let s = fixtures::term2();
        let cells = generating_set(&s, false).unwrap();
        let cell = cells.iter().find(|c| c.y == oid("a")).unwrap();
        let f = CosliceArrow::from_cell(cell).unwrap();
        let base = s.base().clone();
        let terminal = Presentation::terminal();
        let mut m = crate::presentation::PresentationMap::new();
        for o in base.objects() {
            m.map_object(o.clone(), oid("pt"));
        }
        let bang = PresentationArrow::new(base.clone(), terminal, m).unwrap();
        let g = CosliceArrow::under(
            base.clone(),
            PresentationArrow::identity(&base),
            bang.clone(),
            bang,
        )
        .unwrap();
        match orthogonal(&f, &g, &bounds()).unwrap() {
            OrthoVerdict::NotOrthogonal(w) => assert!(w.lifts.is_empty()),
            other => panic!("expected a no-lift witness, got {other}"),
        }
    }

    #[test]
    fn extend_along_unit_at_itself_is_the_identity() {
        let r = fixtures::realized_term2();
        let extended = extend_along_unit(r, &r.unit.functor, &bounds())
            .unwrap()
            .expect_done("extension");
        assert!(extended.same_assignments(&PresentationArrow::identity(r.realized.base())));
    }

    #[test]
    fn extend_along_unit_sends_filler_to_unique_terminal_map() {
        // Target: the commuting square category, which has a terminal
        // object d; embed TERM2 by a |-> a, t |-> d.
        let r = fixtures::realized_term2();
        let square = fixtures::square_presentation();
        let mut m = crate::presentation::PresentationMap::new();
        m.map_object(oid("a"), oid("a"));
        m.map_object(oid("t"), oid("d"));
        let f =
            PresentationArrow::new(r.original.base().clone(), square.clone(), m).unwrap();
        let extended = extend_along_unit(r, &f, &bounds())
            .unwrap()
            .expect_done("extension");
        // The attached filler lands on the diagonal class.
        let image = extended.map().edge_image(&eid("a:term:fill")).unwrap();
        let mat = materialize(&square, 6, 32).unwrap().expect_done("square");
        let diag = mat
            .eval_path(&Path::new(oid("a"), vec![eid("f"), eid("g")]))
            .unwrap();
        assert_eq!(mat.eval_path(image).unwrap(), diag);
    }

    #[test]
    fn extend_along_unit_rejects_non_limit_image() {
        let r = fixtures::realized_term2();
        // Identity into the (unrealized) TERM2 base: the terminal cone is
        // not a limit cone there.
        let f = PresentationArrow::identity(r.original.base());
        let err = extend_along_unit(r, &f, &bounds()).unwrap_err();
        assert!(matches!(err, Error::Precondition(msg) if msg.contains("term")));
    }

    #[test]
    fn realize_morphism_identity_is_identity() {
        let r = fixtures::realized_term2();
        let m = SketchMap::identity(&r.original);
        let free_m = realize_morphism(&m, r, r, &bounds())
            .unwrap()
            .expect_done("free(id)");
        assert!(free_m.same_assignments(&PresentationArrow::identity(r.realized.base())));
    }

    #[test]
    fn realize_morphism_picks_the_chosen_object() {
        // One-object free sketch into TERM2 picking t.
        let one = free_sketch(Presentation::terminal());
        let term2 = fixtures::term2();
        let r_one = realize(&one, 4, &bounds()).unwrap();
        let r_term2 = fixtures::realized_term2();
        let mut m = crate::presentation::PresentationMap::new();
        m.map_object(oid("pt"), oid("t"));
        let functor =
            PresentationArrow::new(one.base().clone(), term2.base().clone(), m).unwrap();
        let cone_map = one
            .cones()
            .map(|(i, _)| (i, term2.trivial_index(&oid("t")).unwrap()))
            .collect();
        let sm = SketchMap { functor, cone_map };
        let free_m = realize_morphism(&sm, &r_one, r_term2, &bounds())
            .unwrap()
            .expect_done("free(m)");
        assert_eq!(free_m.object_image(&oid("pt")).unwrap(), &oid("t"));
        // Naturality square: free(m) ∘ unit = unit' ∘ m.
        let lhs = r_one.unit.functor.then(&free_m).unwrap();
        let rhs = sm.functor.then(&r_term2.unit.functor).unwrap();
        assert!(lhs.same_assignments(&rhs));
    }

    #[test]
    fn realize_morphism_respects_composition() {
        // one -> term2 (pick a) -> term2 realized... compose two maps and
        // compare with the composite of the induced maps.
        let one = free_sketch(Presentation::terminal());
        let term2 = fixtures::term2();
        let r_one = realize(&one, 4, &bounds()).unwrap();
        let r_term2 = fixtures::realized_term2();
        let mut pick_a = crate::presentation::PresentationMap::new();
        pick_a.map_object(oid("pt"), oid("a"));
        let m1 = SketchMap {
            functor: PresentationArrow::new(one.base().clone(), term2.base().clone(), pick_a)
                .unwrap(),
            cone_map: one
                .cones()
                .map(|(i, _)| (i, term2.trivial_index(&oid("a")).unwrap()))
                .collect(),
        };
        let m2 = SketchMap::identity(&term2);
        let f1 = realize_morphism(&m1, &r_one, r_term2, &bounds())
            .unwrap()
            .expect_done("free(m1)");
        let f2 = realize_morphism(&m2, r_term2, r_term2, &bounds())
            .unwrap()
            .expect_done("free(m2)");
        let composite_map = SketchMap {
            functor: m1.functor.then(&m2.functor).unwrap(),
            cone_map: m1
                .cone_map
                .iter()
                .map(|(a, b)| (*a, m2.cone_map[b]))
                .collect(),
        };
        let f12 = realize_morphism(&composite_map, &r_one, r_term2, &bounds())
            .unwrap()
            .expect_done("free(m2∘m1)");
        let chained = f1.then(&f2).unwrap();
        assert!(f12.same_assignments(&chained));
    }

    #[test]
    fn realize_traces_are_byte_identical() {
        let s = fixtures::sq();
        let r1 = realize(&s, 12, &bounds()).unwrap();
        let r2 = realize(&s, 12, &bounds()).unwrap();
        assert_eq!(r1.trace_lines(), r2.trace_lines());
        assert_eq!(r1.iterations, r2.iterations);
        assert_eq!(r1.realized.base(), r2.realized.base());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        // A sketch whose base never materializes.
        let s = free_sketch(fixtures::loop_presentation());
        let r = realize(&s, 4, &bounds()).unwrap();
        assert_eq!(r.status, RealizeStatus::BudgetExhausted);
    }
}
