//! The `.sk` text format for sketches.
//!
//! Line-oriented, semicolon-terminated statements:
//!
//! ```text
//! object a;
//! edge f: a -> b;
//! relation g.f = k.h;            // paths compose right to left
//! cone prod at p over { l => a; r => b; } legs { l: pi1, r: pi2 };
//! ```
//!
//! Inside a cone's `over { .. }` block, `i => x;` declares an index object
//! with its diagram image and `u: i -> j => PATH;` declares an index arrow
//! with its image path. The index category is the free category on the
//! declared arrows. `id(x)` is the identity path at `x`. Trivial cones are
//! never written; the sketch constructor inserts them.
//!
//! Identifiers are bare (`[A-Za-z_][A-Za-z0-9_']*` or digits) or double
//! quoted; quoting covers minted ids such as `"a:term:fill"`. The printer
//! emits a canonical form that parses back to the same document.

use std::collections::BTreeMap;

use crate::category::materialize;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Gwi, ObjectId, Path};
use crate::presentation::Presentation;
use crate::sketch::{make_sketch, Cone, Diagram, LimitSketch};

const INDEX_WORD_LEN: usize = 8;
const INDEX_MAX_MORPHISMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Semi,
    Colon,
    Comma,
    Dot,
    Eq,
    Arrow,   // ->
    Fat,     // =>
    LBrace,
    RBrace,
    LParen,
    RParen,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Fat => write!(f, "`=>`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut chars);
            }
            '/' => {
                bump(&mut chars);
                if chars.peek() == Some(&'/') {
                    while let Some(&n) = chars.peek() {
                        if n == '\n' {
                            break;
                        }
                        bump(&mut chars);
                    }
                } else {
                    return Err(Error::Parse {
                        line: tline,
                        col: tcol,
                        message: "expected `//` comment".into(),
                    });
                }
            }
            ';' => {
                bump(&mut chars);
                out.push(Spanned { tok: Tok::Semi, line: tline, col: tcol });
            }
            ':' => {
                bump(&mut chars);
                out.push(Spanned { tok: Tok::Colon, line: tline, col: tcol });
            }
            ',' => {
                bump(&mut chars);
                out.push(Spanned { tok: Tok::Comma, line: tline, col: tcol });
            }
            '.' => {
                bump(&mut chars);
                out.push(Spanned { tok: Tok::Dot, line: tline, col: tcol });
            }
            '{' => {
                bump(&mut chars);
                out.push(Spanned { tok: Tok::LBrace, line: tline, col: tcol });
            }
            '}' => {
                bump(&mut chars);
                out.push(Spanned { tok: Tok::RBrace, line: tline, col: tcol });
            }
            '(' => {
                bump(&mut chars);
                out.push(Spanned { tok: Tok::LParen, line: tline, col: tcol });
            }
            ')' => {
                bump(&mut chars);
                out.push(Spanned { tok: Tok::RParen, line: tline, col: tcol });
            }
            '=' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push(Spanned { tok: Tok::Fat, line: tline, col: tcol });
                } else {
                    out.push(Spanned { tok: Tok::Eq, line: tline, col: tcol });
                }
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push(Spanned { tok: Tok::Arrow, line: tline, col: tcol });
                } else {
                    return Err(Error::Parse {
                        line: tline,
                        col: tcol,
                        message: "expected `->`".into(),
                    });
                }
            }
            '"' => {
                bump(&mut chars);
                let mut s = String::new();
                loop {
                    match chars.peek() {
                        Some(&'"') => {
                            bump(&mut chars);
                            break;
                        }
                        Some(_) => s.push(bump(&mut chars)),
                        None => {
                            return Err(Error::Parse {
                                line: tline,
                                col: tcol,
                                message: "unterminated string".into(),
                            })
                        }
                    }
                }
                out.push(Spanned { tok: Tok::Ident(s), line: tline, col: tcol });
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' || n == '\'' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(s), line: tline, col: tcol });
            }
            other => {
                return Err(Error::Parse {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

/// Raw path syntax before name resolution.
#[derive(Debug, Clone)]
enum RawPath {
    Identity { object: String, line: usize, col: usize },
    /// Edge names in source order (leftmost applied last).
    Edges { names: Vec<(String, usize, usize)> },
}

#[derive(Debug, Clone)]
struct RawConeEntry {
    line: usize,
    col: usize,
    kind: RawConeEntryKind,
}

#[derive(Debug, Clone)]
enum RawConeEntryKind {
    Object { index: String, image: String },
    Arrow { name: String, src: String, tgt: String, image: RawPath },
}

#[derive(Debug, Clone)]
enum RawStmt {
    Object { name: String, line: usize, col: usize },
    Edge {
        name: String,
        src: String,
        src_pos: (usize, usize),
        tgt: String,
        tgt_pos: (usize, usize),
        line: usize,
        col: usize,
    },
    Relation { lhs: RawPath, rhs: RawPath, line: usize, col: usize },
    Cone {
        name: String,
        apex: String,
        entries: Vec<RawConeEntry>,
        legs: Vec<(String, RawPath, usize, usize)>,
        line: usize,
        col: usize,
    },
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn err_here(&self, message: impl Into<String>) -> Error {
        match self.peek() {
            Some(s) => Error::Parse {
                line: s.line,
                col: s.col,
                message: message.into(),
            },
            None => {
                let (line, col) = self
                    .toks
                    .last()
                    .map(|s| (s.line, s.col))
                    .unwrap_or((1, 1));
                Error::Parse {
                    line,
                    col,
                    message: format!("{} (at end of input)", message.into()),
                }
            }
        }
    }

    fn next(&mut self) -> Result<Spanned> {
        let s = self
            .peek()
            .cloned()
            .ok_or_else(|| self.err_here("unexpected end of input"))?;
        self.pos += 1;
        Ok(s)
    }

    fn expect(&mut self, tok: Tok) -> Result<Spanned> {
        let s = self.next().map_err(|_| self.err_here(format!("expected {tok}")))?;
        if s.tok != tok {
            return Err(Error::Parse {
                line: s.line,
                col: s.col,
                message: format!("expected {tok}, found {}", s.tok),
            });
        }
        Ok(s)
    }

    fn ident(&mut self) -> Result<(String, usize, usize)> {
        let s = self.next().map_err(|_| self.err_here("expected a name"))?;
        match s.tok {
            Tok::Ident(name) => Ok((name, s.line, s.col)),
            other => Err(Error::Parse {
                line: s.line,
                col: s.col,
                message: format!("expected a name, found {other}"),
            }),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let (name, line, col) = self.ident()?;
        if name != kw {
            return Err(Error::Parse {
                line,
                col,
                message: format!("expected `{kw}`, found `{name}`"),
            });
        }
        Ok(())
    }

    fn path(&mut self) -> Result<RawPath> {
        let (first, line, col) = self.ident()?;
        if first == "id" && matches!(self.peek().map(|s| &s.tok), Some(Tok::LParen)) {
            self.expect(Tok::LParen)?;
            let (object, oline, ocol) = self.ident()?;
            self.expect(Tok::RParen)?;
            return Ok(RawPath::Identity { object, line: oline, col: ocol });
        }
        let mut names = vec![(first, line, col)];
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Dot)) {
            self.expect(Tok::Dot)?;
            names.push(self.ident()?);
        }
        Ok(RawPath::Edges { names })
    }

    fn statement(&mut self) -> Result<RawStmt> {
        let (kw, line, col) = self.ident()?;
        match kw.as_str() {
            "object" => {
                let (name, ..) = self.ident()?;
                self.expect(Tok::Semi)?;
                Ok(RawStmt::Object { name, line, col })
            }
            "edge" => {
                let (name, ..) = self.ident()?;
                self.expect(Tok::Colon)?;
                let (src, sline, scol) = self.ident()?;
                self.expect(Tok::Arrow)?;
                let (tgt, tline, tcol) = self.ident()?;
                self.expect(Tok::Semi)?;
                Ok(RawStmt::Edge {
                    name,
                    src,
                    src_pos: (sline, scol),
                    tgt,
                    tgt_pos: (tline, tcol),
                    line,
                    col,
                })
            }
            "relation" => {
                let lhs = self.path()?;
                self.expect(Tok::Eq)?;
                let rhs = self.path()?;
                self.expect(Tok::Semi)?;
                Ok(RawStmt::Relation { lhs, rhs, line, col })
            }
            "cone" => {
                let (name, ..) = self.ident()?;
                self.keyword("at")?;
                let (apex, ..) = self.ident()?;
                self.keyword("over")?;
                self.expect(Tok::LBrace)?;
                let mut entries = Vec::new();
                while !matches!(self.peek().map(|s| &s.tok), Some(Tok::RBrace)) {
                    entries.push(self.cone_entry()?);
                }
                self.expect(Tok::RBrace)?;
                let mut legs = Vec::new();
                if matches!(self.peek().map(|s| &s.tok), Some(Tok::Ident(w)) if w == "legs") {
                    self.keyword("legs")?;
                    self.expect(Tok::LBrace)?;
                    if !matches!(self.peek().map(|s| &s.tok), Some(Tok::RBrace)) {
                        loop {
                            let (iname, iline, icol) = self.ident()?;
                            self.expect(Tok::Colon)?;
                            let p = self.path()?;
                            legs.push((iname, p, iline, icol));
                            if matches!(self.peek().map(|s| &s.tok), Some(Tok::Comma)) {
                                self.expect(Tok::Comma)?;
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RBrace)?;
                }
                self.expect(Tok::Semi)?;
                Ok(RawStmt::Cone { name, apex, entries, legs, line, col })
            }
            other => Err(Error::Parse {
                line,
                col,
                message: format!(
                    "expected `object`, `edge`, `relation`, or `cone`, found `{other}`"
                ),
            }),
        }
    }

    fn cone_entry(&mut self) -> Result<RawConeEntry> {
        let (name, line, col) = self.ident()?;
        match self.peek().map(|s| &s.tok) {
            Some(Tok::Fat) => {
                self.expect(Tok::Fat)?;
                let (image, ..) = self.ident()?;
                self.expect(Tok::Semi)?;
                Ok(RawConeEntry {
                    line,
                    col,
                    kind: RawConeEntryKind::Object { index: name, image },
                })
            }
            Some(Tok::Colon) => {
                self.expect(Tok::Colon)?;
                let (src, ..) = self.ident()?;
                self.expect(Tok::Arrow)?;
                let (tgt, ..) = self.ident()?;
                self.expect(Tok::Fat)?;
                let image = self.path()?;
                self.expect(Tok::Semi)?;
                Ok(RawConeEntry {
                    line,
                    col,
                    kind: RawConeEntryKind::Arrow { name, src, tgt, image },
                })
            }
            _ => Err(self.err_here("expected `=>` or `:` in cone entry")),
        }
    }
}

/// A parsed sketch document.
#[derive(Debug, Clone)]
pub struct SketchDocument {
    pub source: String,
    pub sketch: LimitSketch,
}

impl PartialEq for SketchDocument {
    fn eq(&self, other: &Self) -> bool {
        self.sketch == other.sketch
    }
}

/// Parse a `.sk` document into a validated sketch.
pub fn parse_sketch(text: &str) -> Result<SketchDocument> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    let mut stmts = Vec::new();
    while !parser.at_end() {
        stmts.push(parser.statement()?);
    }

    let mut graph = Graph::new();
    let semantic = |line: usize, col: usize, message: String| Error::Parse { line, col, message };

    for st in &stmts {
        if let RawStmt::Object { name, line, col } = st {
            graph
                .add_vertex(ObjectId::new(name.clone()))
                .map_err(|_| semantic(*line, *col, format!("duplicate object `{name}`")))?;
        }
    }
    for st in &stmts {
        if let RawStmt::Edge {
            name,
            src,
            src_pos,
            tgt,
            tgt_pos,
            line,
            col,
        } = st
        {
            if !graph.has_vertex(&ObjectId::new(src.clone())) {
                return Err(semantic(src_pos.0, src_pos.1, format!("unknown object `{src}`")));
            }
            if !graph.has_vertex(&ObjectId::new(tgt.clone())) {
                return Err(semantic(tgt_pos.0, tgt_pos.1, format!("unknown object `{tgt}`")));
            }
            graph
                .add_edge(
                    EdgeId::new(name.clone()),
                    ObjectId::new(src.clone()),
                    ObjectId::new(tgt.clone()),
                )
                .map_err(|_| semantic(*line, *col, format!("duplicate edge `{name}`")))?;
        }
    }
    let mut presentation = Presentation::new(
        Gwi::free(graph).map_err(|e| Error::Parse {
            line: 1,
            col: 1,
            message: e.to_string(),
        })?,
    );

    let resolve_path = |p: &Presentation, raw: &RawPath| -> Result<Path> {
        match raw {
            RawPath::Identity { object, line, col } => {
                let o = ObjectId::new(object.clone());
                if !p.has_object(&o) {
                    return Err(semantic(*line, *col, format!("unknown object `{object}`")));
                }
                Ok(Path::empty(o))
            }
            RawPath::Edges { names } => {
                // Source order is composition order: the rightmost edge is
                // applied first.
                let mut edges = Vec::with_capacity(names.len());
                for (name, line, col) in names.iter().rev() {
                    let e = EdgeId::new(name.clone());
                    if !p.generators().graph().has_edge(&e) {
                        return Err(semantic(*line, *col, format!("unknown edge `{name}`")));
                    }
                    edges.push(e);
                }
                let start = p.generators().graph().src(&edges[0])?.clone();
                let path = Path::new(start, edges);
                p.path_end(&path).map_err(|e| {
                    let (_, line, col) = &names[0];
                    semantic(*line, *col, format!("path does not compose: {e}"))
                })?;
                Ok(path)
            }
        }
    };

    for st in &stmts {
        if let RawStmt::Relation { lhs, rhs, line, col } = st {
            let a = resolve_path(&presentation, lhs)?;
            let b = resolve_path(&presentation, rhs)?;
            presentation
                .add_relation(&a, &b)
                .map_err(|e| semantic(*line, *col, format!("bad relation: {e}")))?;
        }
    }

    let mut cones = Vec::new();
    for st in &stmts {
        if let RawStmt::Cone { name, apex, entries, legs, line, col } = st {
            let apex_id = ObjectId::new(apex.clone());
            if !presentation.has_object(&apex_id) {
                return Err(semantic(*line, *col, format!("unknown object `{apex}`")));
            }
            // Build the index graph and the diagram images.
            let mut index_graph = Graph::new();
            let mut object_images: BTreeMap<ObjectId, ObjectId> = BTreeMap::new();
            let mut arrow_images: BTreeMap<EdgeId, Path> = BTreeMap::new();
            for entry in entries {
                if let RawConeEntryKind::Object { index, image } = &entry.kind {
                    let io = ObjectId::new(index.clone());
                    index_graph.add_vertex(io.clone()).map_err(|_| {
                        semantic(entry.line, entry.col, format!("duplicate index object `{index}`"))
                    })?;
                    let im = ObjectId::new(image.clone());
                    if !presentation.has_object(&im) {
                        return Err(semantic(
                            entry.line,
                            entry.col,
                            format!("unknown object `{image}`"),
                        ));
                    }
                    object_images.insert(io, im);
                }
            }
            for entry in entries {
                if let RawConeEntryKind::Arrow { name, src, tgt, image } = &entry.kind {
                    let e = EdgeId::new(name.clone());
                    let s = ObjectId::new(src.clone());
                    let t = ObjectId::new(tgt.clone());
                    if !index_graph.has_vertex(&s) || !index_graph.has_vertex(&t) {
                        return Err(semantic(
                            entry.line,
                            entry.col,
                            format!("unknown index object in arrow `{name}`"),
                        ));
                    }
                    index_graph
                        .add_edge(e.clone(), s, t)
                        .map_err(|_| {
                            semantic(entry.line, entry.col, format!("duplicate index arrow `{name}`"))
                        })?;
                    arrow_images.insert(e, resolve_path(&presentation, image)?);
                }
            }
            let index_presentation = Presentation::new(Gwi::free(index_graph).map_err(|e| {
                semantic(*line, *col, format!("bad index category: {e}"))
            })?);
            let index = match materialize(&index_presentation, INDEX_WORD_LEN, INDEX_MAX_MORPHISMS)
                .map_err(|e| semantic(*line, *col, format!("bad index category: {e}")))?
            {
                crate::Bounded::Done(c) => c,
                crate::Bounded::Diverged { .. } => {
                    return Err(semantic(
                        *line,
                        *col,
                        format!("index category of cone `{name}` does not close (is it cyclic?)"),
                    ))
                }
            };
            // Diagram: objects from the entries, morphisms by composing
            // arrow images along representative paths.
            let mut diagram = Diagram::new();
            for (io, im) in &object_images {
                diagram.map_object(io.clone(), im.clone());
            }
            for m in index.morphisms() {
                let rep = index.rep(m);
                let start_image = object_images.get(rep.start()).ok_or_else(|| {
                    semantic(*line, *col, format!("index object `{}` lacks an image", rep.start()))
                })?;
                let mut image = Path::empty(start_image.clone());
                for e in rep.edges() {
                    image = presentation
                        .concat(&image, &arrow_images[e])
                        .map_err(|err| {
                            semantic(*line, *col, format!("arrow images do not compose: {err}"))
                        })?;
                }
                diagram.map_morphism(m, image);
            }
            // Legs.
            let mut leg_map = BTreeMap::new();
            for (iname, raw, iline, icol) in legs {
                let io = ObjectId::new(iname.clone());
                if !object_images.contains_key(&io) {
                    return Err(semantic(*iline, *icol, format!("unknown index object `{iname}`")));
                }
                if leg_map
                    .insert(io, resolve_path(&presentation, raw)?)
                    .is_some()
                {
                    return Err(semantic(*iline, *icol, format!("duplicate leg `{iname}`")));
                }
            }
            for io in object_images.keys() {
                if !leg_map.contains_key(io) {
                    return Err(semantic(*line, *col, format!("missing leg for index object `{io}`")));
                }
            }
            cones.push(Cone::new(name.clone(), apex_id, index, diagram, leg_map));
        }
    }

    let sketch = make_sketch(presentation, cones).map_err(|e| match e {
        p @ Error::Parse { .. } => p,
        other => Error::Parse {
            line: 1,
            col: 1,
            message: other.to_string(),
        },
    })?;
    Ok(SketchDocument {
        source: text.to_owned(),
        sketch,
    })
}

fn quote_name(s: &str) -> String {
    let plain = !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
    if plain {
        s.to_owned()
    } else {
        format!("\"{s}\"")
    }
}

fn print_path(p: &Path) -> String {
    if p.is_empty() {
        return format!("id({})", quote_name(p.start().as_str()));
    }
    p.edges()
        .iter()
        .rev()
        .map(|e| quote_name(e.as_str()))
        .collect::<Vec<_>>()
        .join(".")
}

/// Canonical text form of a sketch: objects, edges, relations (each
/// sorted), then the user cones in declaration order. Auto-inserted
/// trivial cones are never written.
pub fn print_sketch(s: &LimitSketch) -> String {
    let mut out = String::new();
    let base = s.base();
    for o in base.objects() {
        out.push_str(&format!("object {};\n", quote_name(o.as_str())));
    }
    for (e, src, tgt) in base.generators().non_identity_edges() {
        out.push_str(&format!(
            "edge {}: {} -> {};\n",
            quote_name(e.as_str()),
            quote_name(src.as_str()),
            quote_name(tgt.as_str())
        ));
    }
    for rel in base.relations() {
        out.push_str(&format!(
            "relation {} = {};\n",
            print_path(rel.lhs()),
            print_path(rel.rhs())
        ));
    }
    for (i, cone) in s.cones() {
        if i.0 >= s.user_cone_count() {
            break;
        }
        out.push_str(&print_cone(cone));
    }
    out
}

fn print_cone(cone: &Cone) -> String {
    let mut entries = Vec::new();
    for i in cone.index().objects() {
        let image = cone
            .diagram()
            .object_image(i)
            .expect("validated cone");
        entries.push(format!(
            "{} => {};",
            quote_name(i.as_str()),
            quote_name(image.as_str())
        ));
    }
    // Generating arrows are the length-one representatives.
    for m in cone.index().morphisms() {
        let rep = cone.index().rep(m);
        if rep.len() != 1 {
            continue;
        }
        let e = &rep.edges()[0];
        let image = cone.diagram().morphism_image(m).expect("validated cone");
        entries.push(format!(
            "{}: {} -> {} => {};",
            quote_name(e.as_str()),
            quote_name(cone.index().src(m).as_str()),
            quote_name(cone.index().tgt(m).as_str()),
            print_path(image)
        ));
    }
    let over = if entries.is_empty() {
        "{}".to_owned()
    } else {
        format!("{{ {} }}", entries.join(" "))
    };
    let legs: Vec<String> = cone
        .legs()
        .map(|(i, p)| format!("{}: {}", quote_name(i.as_str()), print_path(p)))
        .collect();
    let legs_part = if legs.is_empty() {
        String::new()
    } else {
        format!(" legs {{ {} }}", legs.join(", "))
    };
    format!(
        "cone {} at {} over {}{};\n",
        quote_name(cone.name()),
        quote_name(cone.apex().as_str()),
        over,
        legs_part
    )
}
