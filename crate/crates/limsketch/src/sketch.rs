//! Limit sketches: a presentation together with a family of cones, each
//! cone being an apex, a finite index category, a diagram into the
//! presentation, and legs from the apex.
//!
//! Every sketch carries the trivial identity cone of each object; the
//! constructor inserts the missing ones. Cone wellformedness (diagram
//! functoriality and leg naturality) is decided with the word-problem
//! engine, so it is bounded like everything else here.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::category::{materialize_bounded, MaterializedCategory, MorphId};
use crate::error::{Error, Result};
use crate::graph::{ObjectId, Path};
use crate::presentation::{Presentation, PresentationArrow};
use crate::word::{decide_equal, EqVerdict};
use crate::{Bounded, Bounds};

/// Position of a cone in its sketch's cone family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConeIndex(pub usize);

/// Functor data from a finite index category into a presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    object_map: BTreeMap<ObjectId, ObjectId>,
    morphism_map: BTreeMap<MorphId, Path>,
}

impl Diagram {
    pub fn new() -> Diagram {
        Diagram {
            object_map: BTreeMap::new(),
            morphism_map: BTreeMap::new(),
        }
    }

    pub fn map_object(&mut self, index_obj: ObjectId, to: ObjectId) {
        self.object_map.insert(index_obj, to);
    }

    pub fn map_morphism(&mut self, index_mor: MorphId, to: Path) {
        self.morphism_map.insert(index_mor, to);
    }

    pub fn object_image(&self, i: &ObjectId) -> Result<&ObjectId> {
        self.object_map
            .get(i)
            .ok_or_else(|| Error::PartialMap(format!("index object `{i}`")))
    }

    pub fn morphism_image(&self, m: MorphId) -> Result<&Path> {
        self.morphism_map
            .get(&m)
            .ok_or_else(|| Error::PartialMap(format!("index morphism {}", m.0)))
    }
}

impl Default for Diagram {
    fn default() -> Self {
        Diagram::new()
    }
}

/// A cone: apex, finite index category, diagram, and one leg per index
/// object, all living in some ambient presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    name: String,
    apex: ObjectId,
    index: MaterializedCategory,
    diagram: Diagram,
    legs: BTreeMap<ObjectId, Path>,
}

impl Cone {
    pub fn new(
        name: impl Into<String>,
        apex: ObjectId,
        index: MaterializedCategory,
        diagram: Diagram,
        legs: BTreeMap<ObjectId, Path>,
    ) -> Cone {
        Cone {
            name: name.into(),
            apex,
            index,
            diagram,
            legs,
        }
    }

    /// The trivial cone at an object: terminal index, constant diagram,
    /// identity leg.
    pub fn trivial(at: &ObjectId) -> Cone {
        let index = MaterializedCategory::terminal();
        let pt = index.objects()[0].clone();
        let mut diagram = Diagram::new();
        diagram.map_object(pt.clone(), at.clone());
        diagram.map_morphism(
            index.identity_of(&pt).expect("terminal identity"),
            Path::empty(at.clone()),
        );
        let mut legs = BTreeMap::new();
        legs.insert(pt, Path::empty(at.clone()));
        Cone {
            name: format!("triv:{at}"),
            apex: at.clone(),
            index,
            diagram,
            legs,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apex(&self) -> &ObjectId {
        &self.apex
    }

    pub fn index(&self) -> &MaterializedCategory {
        &self.index
    }

    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    pub fn leg(&self, i: &ObjectId) -> Result<&Path> {
        self.legs
            .get(i)
            .ok_or_else(|| Error::PartialMap(format!("leg at index object `{i}`")))
    }

    pub fn legs(&self) -> impl Iterator<Item = (&ObjectId, &Path)> {
        self.legs.iter()
    }

    /// Check typing, diagram functoriality, and leg naturality over `base`.
    pub fn validate(&self, base: &Presentation, bound: usize) -> Result<()> {
        if !base.has_object(&self.apex) {
            return Err(Error::UnknownVertex(self.apex.clone()));
        }
        // Diagram typing.
        for i in self.index.objects() {
            let io = self.diagram.object_image(i)?;
            if !base.has_object(io) {
                return Err(Error::UnknownVertex(io.clone()));
            }
        }
        for m in self.index.morphisms() {
            let path = self.diagram.morphism_image(m)?;
            let want_src = self.diagram.object_image(self.index.src(m))?;
            let want_tgt = self.diagram.object_image(self.index.tgt(m))?;
            if path.start() != want_src || &base.path_end(path)? != want_tgt {
                return Err(Error::Validation(format!(
                    "cone `{}`: diagram image of index morphism {} is not typed {want_src} -> {want_tgt}",
                    self.name, m.0
                )));
            }
        }
        // Legs typed from the apex.
        for i in self.index.objects() {
            let leg = self.leg(i)?;
            let io = self.diagram.object_image(i)?;
            if leg.start() != &self.apex || &base.path_end(leg)? != io {
                return Err(Error::Validation(format!(
                    "cone `{}`: leg at `{i}` is not typed {} -> {io}",
                    self.name, self.apex
                )));
            }
        }
        // Functoriality: identities to identities, composites to composites.
        for i in self.index.objects() {
            let id = self.index.identity_of(i)?;
            let image = self.diagram.morphism_image(id)?;
            let at = self.diagram.object_image(i)?.clone();
            if decide_equal(base, image, &Path::empty(at), bound)? != EqVerdict::Equal {
                return Err(Error::Validation(format!(
                    "cone `{}`: diagram does not send the identity at `{i}` to an identity",
                    self.name
                )));
            }
        }
        for f in self.index.morphisms() {
            for g in self.index.morphisms() {
                if self.index.tgt(f) != self.index.src(g) {
                    continue;
                }
                let gf = self.index.compose(g, f)?;
                let expect = base.concat(
                    self.diagram.morphism_image(f)?,
                    self.diagram.morphism_image(g)?,
                )?;
                if decide_equal(base, self.diagram.morphism_image(gf)?, &expect, bound)?
                    != EqVerdict::Equal
                {
                    return Err(Error::Validation(format!(
                        "cone `{}`: diagram is not functorial on the composite of {} and {}",
                        self.name, f.0, g.0
                    )));
                }
            }
        }
        // Naturality of the legs over every index morphism.
        for f in self.index.morphisms() {
            let (i, j) = (self.index.src(f), self.index.tgt(f));
            let lhs = base.concat(self.leg(i)?, self.diagram.morphism_image(f)?)?;
            match decide_equal(base, &lhs, self.leg(j)?, bound)? {
                EqVerdict::Equal => {}
                _ => {
                    return Err(Error::Validation(format!(
                        "cone `{}`: legs are not natural over index morphism {}",
                        self.name, f.0
                    )))
                }
            }
        }
        Ok(())
    }

    /// Syntactic check for "is the trivial identity cone at some object":
    /// terminal index, constant diagram, empty-path leg.
    pub fn is_trivial(&self) -> bool {
        if self.index.morphism_count() != 1 || self.index.objects().len() != 1 {
            return false;
        }
        let pt = &self.index.objects()[0];
        match (self.diagram.object_image(pt), self.legs.get(pt)) {
            (Ok(io), Some(leg)) => io == &self.apex && leg.is_empty(),
            _ => false,
        }
    }

    /// The image cone under a presentation arrow: apex, diagram, and legs
    /// are pushed forward; the index category is unchanged.
    pub fn image_under(&self, f: &PresentationArrow) -> Result<Cone> {
        let apex = f.object_image(&self.apex)?.clone();
        let mut diagram = Diagram::new();
        for i in self.index.objects() {
            diagram.map_object(i.clone(), f.object_image(self.diagram.object_image(i)?)?.clone());
        }
        for m in self.index.morphisms() {
            diagram.map_morphism(m, f.apply_path(self.diagram.morphism_image(m)?)?);
        }
        let mut legs = BTreeMap::new();
        for (i, leg) in self.legs.iter() {
            legs.insert(i.clone(), f.apply_path(leg)?);
        }
        Ok(Cone {
            name: self.name.clone(),
            apex,
            index: self.index.clone(),
            diagram,
            legs,
        })
    }
}

/// A presentation with its cone family. Always contains the trivial cone
/// of every object; `trivial_index` locates it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitSketch {
    base: Presentation,
    cones: Vec<Cone>,
    user_cones: usize,
    trivial_index: BTreeMap<ObjectId, ConeIndex>,
}

/// Assemble a sketch: the given cones come first, then auto-inserted
/// trivial cones for every object that lacks one. Validation uses the
/// default word bound.
pub fn make_sketch(base: Presentation, cones: Vec<Cone>) -> Result<LimitSketch> {
    make_sketch_bounded(base, cones, Bounds::default().max_word_len)
}

pub fn make_sketch_bounded(
    base: Presentation,
    cones: Vec<Cone>,
    bound: usize,
) -> Result<LimitSketch> {
    let mut seen_names = std::collections::BTreeSet::new();
    for c in &cones {
        c.validate(&base, bound)?;
        if !seen_names.insert(c.name().to_owned()) {
            return Err(Error::Validation(format!(
                "duplicate cone name `{}`",
                c.name()
            )));
        }
    }
    let user_cones = cones.len();
    let mut all = cones;
    let mut trivial_index = BTreeMap::new();
    // A user-written trivial cone covers its object.
    for (i, c) in all.iter().enumerate() {
        if c.is_trivial() {
            trivial_index
                .entry(c.apex().clone())
                .or_insert(ConeIndex(i));
        }
    }
    for o in base.objects().cloned().collect::<Vec<_>>() {
        if let std::collections::btree_map::Entry::Vacant(v) = trivial_index.entry(o.clone()) {
            v.insert(ConeIndex(all.len()));
            all.push(Cone::trivial(&o));
        }
    }
    Ok(LimitSketch {
        base,
        cones: all,
        user_cones,
        trivial_index,
    })
}

/// The free sketch on a presentation: exactly the trivial cones.
pub fn free_sketch(p: Presentation) -> LimitSketch {
    make_sketch(p, Vec::new()).expect("trivial cones always validate")
}

impl LimitSketch {
    pub fn base(&self) -> &Presentation {
        &self.base
    }

    /// The forgetful direction: the underlying presentation, cones dropped.
    pub fn underlying_category(&self) -> &Presentation {
        &self.base
    }

    pub fn cones(&self) -> impl Iterator<Item = (ConeIndex, &Cone)> {
        self.cones.iter().enumerate().map(|(i, c)| (ConeIndex(i), c))
    }

    pub fn cone(&self, i: ConeIndex) -> Result<&Cone> {
        self.cones.get(i.0).ok_or(Error::UnknownCone(i.0))
    }

    pub fn cone_count(&self) -> usize {
        self.cones.len()
    }

    /// Number of cones the caller supplied (the rest are auto trivial).
    pub fn user_cone_count(&self) -> usize {
        self.user_cones
    }

    pub fn cone_named(&self, name: &str) -> Option<(ConeIndex, &Cone)> {
        self.cones()
            .find(|(_, c)| c.name() == name)
    }

    pub fn trivial_index(&self, o: &ObjectId) -> Result<ConeIndex> {
        self.trivial_index
            .get(o)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(o.clone()))
    }

    /// Indices of the non-trivial cones, ascending.
    pub fn non_trivial_indices(&self) -> Vec<ConeIndex> {
        self.cones()
            .filter(|(_, c)| !c.is_trivial())
            .map(|(i, _)| i)
            .collect()
    }

    /// Rebuild over a larger base with the same cone family. The caller
    /// guarantees the base only gained generators and relations, which
    /// keeps every cone valid verbatim.
    pub(crate) fn with_base(&self, base: Presentation) -> LimitSketch {
        LimitSketch {
            base,
            cones: self.cones.clone(),
            user_cones: self.user_cones,
            trivial_index: self.trivial_index.clone(),
        }
    }
}

/// Functor data plus a cone-index function between sketches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchMap {
    pub functor: PresentationArrow,
    pub cone_map: BTreeMap<ConeIndex, ConeIndex>,
}

impl SketchMap {
    pub fn identity(s: &LimitSketch) -> SketchMap {
        SketchMap {
            functor: PresentationArrow::identity(s.base()),
            cone_map: s.cones().map(|(i, _)| (i, i)).collect(),
        }
    }
}

/// Why a sketch map failed validation, or `Valid`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SketchMapVerdict {
    Valid,
    Invalid(String),
}

impl SketchMapVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, SketchMapVerdict::Valid)
    }
}

/// Check the four clauses of a sketch map: apexes, index equality, the
/// diagram triangle, and the legs, the path clauses up to `decide_equal`.
pub fn validate_sketch_map(
    m: &SketchMap,
    source: &LimitSketch,
    target: &LimitSketch,
    bound: usize,
) -> Result<SketchMapVerdict> {
    if m.functor.source() != source.base() || m.functor.target() != target.base() {
        return Ok(SketchMapVerdict::Invalid(
            "functor endpoints do not match the sketches".into(),
        ));
    }
    if m.functor.is_functorial(bound)? != EqVerdict::Equal {
        return Ok(SketchMapVerdict::Invalid(
            "functor does not preserve the base relations".into(),
        ));
    }
    for (alpha, cone) in source.cones() {
        let beta = match m.cone_map.get(&alpha) {
            Some(b) => *b,
            None => {
                return Ok(SketchMapVerdict::Invalid(format!(
                    "cone {} has no image",
                    alpha.0
                )))
            }
        };
        let image = target.cone(beta)?;
        if m.functor.object_image(cone.apex())? != image.apex() {
            return Ok(SketchMapVerdict::Invalid(format!(
                "apex clause fails at cone `{}`",
                cone.name()
            )));
        }
        if cone.index() != image.index() {
            return Ok(SketchMapVerdict::Invalid(format!(
                "index categories differ at cone `{}`",
                cone.name()
            )));
        }
        for i in cone.index().objects() {
            let fo = m.functor.object_image(cone.diagram().object_image(i)?)?;
            if fo != image.diagram().object_image(i)? {
                return Ok(SketchMapVerdict::Invalid(format!(
                    "diagram objects differ at cone `{}`, index `{i}`",
                    cone.name()
                )));
            }
        }
        for mor in cone.index().morphisms() {
            let lhs = m.functor.apply_path(cone.diagram().morphism_image(mor)?)?;
            let rhs = image.diagram().morphism_image(mor)?;
            if decide_equal(target.base(), &lhs, rhs, bound)? != EqVerdict::Equal {
                return Ok(SketchMapVerdict::Invalid(format!(
                    "diagram triangle fails at cone `{}`, morphism {}",
                    cone.name(),
                    mor.0
                )));
            }
        }
        for (i, leg) in cone.legs() {
            let lhs = m.functor.apply_path(leg)?;
            let rhs = image.leg(i)?;
            if decide_equal(target.base(), &lhs, rhs, bound)? != EqVerdict::Equal {
                return Ok(SketchMapVerdict::Invalid(format!(
                    "leg clause fails at cone `{}`, index `{i}`",
                    cone.name()
                )));
            }
        }
    }
    Ok(SketchMapVerdict::Valid)
}

/// Natural families over a cone's diagram from a given object: one
/// morphism per index object, compatible with every index morphism.
/// Lexicographic in the hom-set order, so deterministic.
pub fn enumerate_cone_families(
    cat: &MaterializedCategory,
    cone: &Cone,
    from: &ObjectId,
) -> Result<Vec<Vec<(ObjectId, MorphId)>>> {
    let index_objects: Vec<ObjectId> = cone.index().objects().to_vec();
    // Images of the diagram in `cat`.
    let mut diagram_obj = BTreeMap::new();
    for i in &index_objects {
        diagram_obj.insert(i.clone(), cone.diagram().object_image(i)?.clone());
    }
    let mut diagram_mor = BTreeMap::new();
    for m in cone.index().morphisms() {
        diagram_mor.insert(m, cat.eval_path(cone.diagram().morphism_image(m)?)?);
    }

    if index_objects.is_empty() {
        // One empty family: the unique cone over the empty diagram.
        return Ok(vec![Vec::new()]);
    }
    let choices = index_objects
        .iter()
        .map(|i| cat.hom(from, &diagram_obj[i]).to_vec())
        .collect::<Vec<_>>();
    if choices.iter().any(|c| c.is_empty()) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    'family: for pick in choices.into_iter().multi_cartesian_product() {
        let family: Vec<(ObjectId, MorphId)> = index_objects
            .iter()
            .cloned()
            .zip(pick.into_iter())
            .collect();
        let lookup: BTreeMap<&ObjectId, MorphId> =
            family.iter().map(|(i, m)| (i, *m)).collect();
        for f in cone.index().morphisms() {
            if cat.is_identity(f) {
                continue;
            }
            let (i, j) = (cone.index().src(f), cone.index().tgt(f));
            if cat.compose(diagram_mor[&f], lookup[i])? != lookup[j] {
                continue 'family;
            }
        }
        out.push(family);
    }
    Ok(out)
}

/// Morphisms `h : from -> apex` with `leg_i ∘ h = family_i` for all `i`.
pub fn cone_fillers(
    cat: &MaterializedCategory,
    cone: &Cone,
    from: &ObjectId,
    family: &[(ObjectId, MorphId)],
) -> Result<Vec<MorphId>> {
    let mut legs_eval = BTreeMap::new();
    for (i, leg) in cone.legs() {
        legs_eval.insert(i.clone(), cat.eval_path(leg)?);
    }
    let mut out = Vec::new();
    'h: for &h in cat.hom(from, cone.apex()) {
        for (i, kappa) in family {
            if cat.compose(legs_eval[i], h)? != *kappa {
                continue 'h;
            }
        }
        out.push(h);
    }
    Ok(out)
}

/// Is the cone a limit cone in `cat`? Exhaustive: every object, every
/// natural family, exactly one filler.
pub fn check_limit_cone(cat: &MaterializedCategory, cone: &Cone) -> Result<bool> {
    // Error out early on cones referencing unknown objects.
    if !cat.objects().contains(cone.apex()) {
        return Err(Error::UnknownVertex(cone.apex().clone()));
    }
    for i in cone.index().objects() {
        let io = cone.diagram().object_image(i)?;
        if !cat.objects().contains(io) {
            return Err(Error::UnknownVertex(io.clone()));
        }
    }
    for y in cat.objects() {
        for family in enumerate_cone_families(cat, cone, y)? {
            if cone_fillers(cat, cone, y, &family)?.len() != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Materialize the base and check every specified cone.
pub fn is_realized(s: &LimitSketch, bounds: &Bounds) -> Result<Bounded<bool>> {
    let cat = match materialize_bounded(s.base(), bounds)? {
        Bounded::Done(c) => c,
        Bounded::Diverged { witness } => return Ok(Bounded::Diverged { witness }),
    };
    for (_, cone) in s.cones() {
        if !check_limit_cone(&cat, cone)? {
            return Ok(Bounded::Done(false));
        }
    }
    Ok(Bounded::Done(true))
}
