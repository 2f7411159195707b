//! Command-line driver. Exit codes: 0 for a decided answer (including a
//! decided `false`), 1 when a budget ran out (`Unknown` /
//! `BudgetExhausted`), 2 for errors. Structured output is a single JSON
//! document with sorted keys and no timestamps, so identical invocations
//! produce identical bytes.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::category::materialize_bounded;
use crate::cells::generating_set;
use crate::dsl::{parse_sketch, print_sketch, SketchDocument};
use crate::error::Error;
use crate::factorization::{
    orthogonal, realize, CosliceArrow, OrthoVerdict, RealizationResult, RealizeStatus,
};
use crate::graph::{free_category_homs, ObjectId, Path};
use crate::models::{enumerate_models, model_bijection, yoneda_model, Model};
use crate::presentation::{Presentation, PresentationArrow, PresentationMap};
use crate::sketch::{is_realized, LimitSketch};
use crate::word::decide_equal;
use crate::{Bounded, Bounds, DEFAULT_MAX_ITER, DEFAULT_MAX_SIZE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNDECIDED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Debug, Args)]
struct CommonOpts {
    /// Sketch file to load.
    file: PathBuf,
    /// Budget for the word problem and path enumeration.
    #[arg(long, default_value_t = Bounds::default().max_word_len)]
    max_word_len: usize,
    /// Budget for materialized morphism counts.
    #[arg(long, default_value_t = Bounds::default().max_morphisms)]
    max_morphisms: usize,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

impl CommonOpts {
    fn bounds(&self) -> Bounds {
        Bounds::new(self.max_word_len, self.max_morphisms)
    }
}

#[derive(Debug, Parser)]
#[command(name = "limsketch", version, about = "Limit sketches and their universal realizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a sketch and print its canonical form.
    Parse {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Enumerate reduced paths of the free category on the sketch's graph.
    FreeCat {
        #[command(flatten)]
        common: CommonOpts,
        /// Restrict to paths from this object.
        #[arg(long)]
        from: Option<String>,
        /// Restrict to paths into this object.
        #[arg(long)]
        to: Option<String>,
    },
    /// Saturate the sketch into its universal realization.
    Realize {
        #[command(flatten)]
        common: CommonOpts,
        /// Maximum number of saturation passes.
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Write the event trace to this file, one event per line.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check whether every specified cone is already a limit cone.
    CheckRealized {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Enumerate finite-set models of the sketch.
    Models {
        #[command(flatten)]
        common: CommonOpts,
        /// Carrier-size cap.
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
    },
    /// Realize, then exhibit the model bijection between the sketch and
    /// its realization.
    Transport {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
    },
    /// Realize, then verify unique orthogonality of every generating cell
    /// against the map to the terminal presentation.
    Orthogonal {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Also test the cells of trivial cones.
        #[arg(long)]
        include_trivial: bool,
    },
    /// Hom-functor models of a realized sketch.
    Yoneda {
        #[command(flatten)]
        common: CommonOpts,
        /// Only this object (default: all objects).
        #[arg(long)]
        object: Option<String>,
    },
}

/// Run one invocation. `argv` excludes the binary name.
pub fn run_command<T: AsRef<str>>(argv: &[T]) -> (i32, String) {
    let full = std::iter::once("limsketch".to_owned())
        .chain(argv.iter().map(|a| a.as_ref().to_owned()));
    let cli = match Cli::try_parse_from(full) {
        Ok(c) => c,
        Err(e) => return (EXIT_ERROR, e.to_string()),
    };
    match dispatch(cli.command) {
        Ok((code, output)) => (code, output),
        Err(e) => (EXIT_ERROR, format!("error: {e}\n")),
    }
}

fn load(common: &CommonOpts) -> Result<SketchDocument, Error> {
    let text = std::fs::read_to_string(&common.file).map_err(|e| {
        Error::Validation(format!("cannot read {}: {e}", common.file.display()))
    })?;
    parse_sketch(&text)
}

fn dispatch(cmd: Command) -> Result<(i32, String), Error> {
    match cmd {
        Command::Parse { common } => {
            let doc = load(&common)?;
            let printed = print_sketch(&doc.sketch);
            let out = match common.format {
                Format::Human => format!(
                    "objects: {}\nedges: {}\nrelations: {}\ncones: {} ({} user)\n\n{}",
                    doc.sketch.base().object_count(),
                    doc.sketch.base().generators().non_identity_edges().count(),
                    doc.sketch.base().relation_count(),
                    doc.sketch.cone_count(),
                    doc.sketch.user_cone_count(),
                    printed
                ),
                Format::Structured => pretty(&json!({
                    "objects": doc.sketch.base().object_count(),
                    "edges": doc.sketch.base().generators().non_identity_edges().count(),
                    "relations": doc.sketch.base().relation_count(),
                    "cones": doc.sketch.cone_count(),
                    "user_cones": doc.sketch.user_cone_count(),
                    "canonical": printed,
                })),
            };
            Ok((EXIT_OK, out))
        }
        Command::FreeCat { common, from, to } => {
            let doc = load(&common)?;
            let graph = doc.sketch.base().generators().non_identity_graph();
            let objects: Vec<ObjectId> = doc.sketch.base().objects().cloned().collect();
            let pick = |name: &Option<String>| -> Result<Vec<ObjectId>, Error> {
                match name {
                    Some(n) => {
                        let o = ObjectId::new(n.clone());
                        if !doc.sketch.base().has_object(&o) {
                            return Err(Error::UnknownVertex(o));
                        }
                        Ok(vec![o])
                    }
                    None => Ok(objects.clone()),
                }
            };
            let froms = pick(&from)?;
            let tos = pick(&to)?;
            let mut human = String::new();
            let mut tree: BTreeMap<String, Value> = BTreeMap::new();
            for x in &froms {
                for y in &tos {
                    let homs = free_category_homs(&graph, x, y, common.max_word_len)?;
                    human.push_str(&format!("hom({x}, {y}): {} paths\n", homs.len()));
                    for p in &homs {
                        human.push_str(&format!("  {p}\n"));
                    }
                    tree.insert(
                        format!("{x} -> {y}"),
                        Value::Array(homs.iter().map(|p| Value::String(p.to_string())).collect()),
                    );
                }
            }
            let out = match common.format {
                Format::Human => human,
                Format::Structured => pretty(&json!({ "homs": tree })),
            };
            Ok((EXIT_OK, out))
        }
        Command::Realize {
            common,
            max_iter,
            trace,
        } => {
            let doc = load(&common)?;
            let bounds = common.bounds();
            let r = realize(&doc.sketch, max_iter, &bounds)?;
            if let Some(path) = trace {
                let mut lines = r.trace_lines().join("\n");
                if !lines.is_empty() {
                    lines.push('\n');
                }
                std::fs::write(&path, lines).map_err(|e| {
                    Error::Validation(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            let (summary, hom_table) = realization_summary(&r, &bounds)?;
            let code = match r.status {
                RealizeStatus::Stabilized => EXIT_OK,
                RealizeStatus::BudgetExhausted => EXIT_UNDECIDED,
            };
            let out = match common.format {
                Format::Human => summary,
                Format::Structured => {
                    let status = match r.status {
                        RealizeStatus::Stabilized => "stabilized",
                        RealizeStatus::BudgetExhausted => "budget-exhausted",
                    };
                    pretty(&json!({
                        "status": status,
                        "iterations": r.iterations,
                        "events": r.trace_lines(),
                        "homs": hom_table,
                        "printed": print_sketch(&r.realized),
                    }))
                }
            };
            Ok((code, out))
        }
        Command::CheckRealized { common } => {
            let doc = load(&common)?;
            match is_realized(&doc.sketch, &common.bounds())? {
                Bounded::Done(answer) => {
                    let out = match common.format {
                        Format::Human => format!("{answer}\n"),
                        Format::Structured => pretty(&json!({ "realized": answer })),
                    };
                    Ok((EXIT_OK, out))
                }
                Bounded::Diverged { witness } => {
                    let out = match common.format {
                        Format::Human => format!("unknown (diverged at {witness})\n"),
                        Format::Structured => pretty(&json!({
                            "realized": "unknown",
                            "witness": witness.to_string(),
                        })),
                    };
                    Ok((EXIT_UNDECIDED, out))
                }
            }
        }
        Command::Models { common, max_size } => {
            let doc = load(&common)?;
            let models = enumerate_models(&doc.sketch, max_size)?;
            let out = match common.format {
                Format::Human => {
                    let mut s = format!("{} models with carriers of size <= {max_size}\n", models.len());
                    for (i, m) in models.iter().enumerate() {
                        s.push_str(&format!("model {i}:\n{}", model_human(m)));
                    }
                    s
                }
                Format::Structured => pretty(&json!({
                    "max_size": max_size,
                    "count": models.len(),
                    "models": models.iter().map(model_json).collect::<Vec<_>>(),
                })),
            };
            Ok((EXIT_OK, out))
        }
        Command::Transport {
            common,
            max_iter,
            max_size,
        } => {
            let doc = load(&common)?;
            let bounds = common.bounds();
            let r = realize(&doc.sketch, max_iter, &bounds)?;
            if !r.is_stabilized() {
                let out = match common.format {
                    Format::Human => "realization did not stabilize\n".to_owned(),
                    Format::Structured => pretty(&json!({ "status": "budget-exhausted" })),
                };
                return Ok((EXIT_UNDECIDED, out));
            }
            let report = model_bijection(&r, max_size, &bounds)?;
            let out = match common.format {
                Format::Human => format!(
                    "models of the sketch: {}\nmodels of the realization: {}\npairing: {:?}\nround trips: identities\n",
                    report.models_original.len(),
                    report.models_realized.len(),
                    report.pairing
                ),
                Format::Structured => pretty(&json!({
                    "original_count": report.models_original.len(),
                    "realized_count": report.models_realized.len(),
                    "pairing": report.pairing,
                    "original": report.models_original.iter().map(model_json).collect::<Vec<_>>(),
                    "realized": report.models_realized.iter().map(model_json).collect::<Vec<_>>(),
                })),
            };
            Ok((EXIT_OK, out))
        }
        Command::Orthogonal {
            common,
            max_iter,
            include_trivial,
        } => {
            let doc = load(&common)?;
            let bounds = common.bounds();
            let r = realize(&doc.sketch, max_iter, &bounds)?;
            if !r.is_stabilized() {
                let out = match common.format {
                    Format::Human => "realization did not stabilize\n".to_owned(),
                    Format::Structured => pretty(&json!({ "status": "budget-exhausted" })),
                };
                return Ok((EXIT_UNDECIDED, out));
            }
            let realized = &r.realized;
            let g = terminal_coslice_arrow(realized)?;
            let mut human = String::new();
            let mut cells_json = Vec::new();
            let mut all_unique = true;
            let mut any_unknown = false;
            for cell in generating_set(realized, include_trivial)? {
                let f = CosliceArrow::from_cell(&cell)?;
                let verdict = orthogonal(&f, &g, &bounds)?;
                let name = format!(
                    "r[{};{}]",
                    cell.y,
                    realized.cone(cell.alpha)?.name()
                );
                human.push_str(&format!("{name}: {verdict}\n"));
                let v = match &verdict {
                    OrthoVerdict::UniquelyOrthogonal => "uniquely-orthogonal",
                    OrthoVerdict::NotOrthogonal(_) => "not-orthogonal",
                    OrthoVerdict::Unknown { .. } => "unknown",
                };
                cells_json.push(json!({ "cell": name, "verdict": v }));
                match verdict {
                    OrthoVerdict::UniquelyOrthogonal => {}
                    OrthoVerdict::NotOrthogonal(_) => all_unique = false,
                    OrthoVerdict::Unknown { .. } => any_unknown = true,
                }
            }
            let code = if any_unknown { EXIT_UNDECIDED } else { EXIT_OK };
            let out = match common.format {
                Format::Human => format!("{human}fibrant: {all_unique}\n"),
                Format::Structured => pretty(&json!({
                    "cells": cells_json,
                    "fibrant": if any_unknown { Value::String("unknown".into()) } else { Value::Bool(all_unique) },
                })),
            };
            Ok((code, out))
        }
        Command::Yoneda { common, object } => {
            let doc = load(&common)?;
            let bounds = common.bounds();
            let objects: Vec<ObjectId> = match object {
                Some(n) => vec![ObjectId::new(n)],
                None => doc.sketch.base().objects().cloned().collect(),
            };
            let mut human = String::new();
            let mut entries = Vec::new();
            for l in &objects {
                match yoneda_model(&doc.sketch, l, &bounds)? {
                    Bounded::Done((m, _)) => {
                        let ok = crate::models::is_model(&doc.sketch, &m)?;
                        human.push_str(&format!("yoneda({l}): is_model = {ok}\n{}", model_human(&m)));
                        entries.push(json!({
                            "object": l.to_string(),
                            "is_model": ok,
                            "model": model_json(&m),
                        }));
                    }
                    Bounded::Diverged { witness } => {
                        let out = match common.format {
                            Format::Human => format!("unknown (diverged at {witness})\n"),
                            Format::Structured => pretty(&json!({
                                "status": "unknown",
                                "witness": witness.to_string(),
                            })),
                        };
                        return Ok((EXIT_UNDECIDED, out));
                    }
                }
            }
            let out = match common.format {
                Format::Human => human,
                Format::Structured => pretty(&json!({ "yoneda": entries })),
            };
            Ok((EXIT_OK, out))
        }
    }
}

/// Unique map from a sketch's base to the terminal presentation, as an
/// arrow under that base.
fn terminal_coslice_arrow(s: &LimitSketch) -> Result<CosliceArrow, Error> {
    let terminal = Presentation::terminal();
    let pt = ObjectId::new("pt");
    let mut map = PresentationMap::new();
    for o in s.base().objects() {
        map.map_object(o.clone(), pt.clone());
    }
    for (e, _, _) in s.base().generators().non_identity_edges() {
        map.map_edge(e.clone(), Path::empty(pt.clone()));
    }
    let bang = PresentationArrow::new(s.base().clone(), terminal, map)?;
    CosliceArrow::under(
        s.base().clone(),
        PresentationArrow::identity(s.base()),
        bang.clone(),
        bang,
    )
}

fn realization_summary(
    r: &RealizationResult,
    bounds: &Bounds,
) -> Result<(String, Value), Error> {
    let mut s = String::new();
    match r.status {
        RealizeStatus::Stabilized => s.push_str("status: stabilized\n"),
        RealizeStatus::BudgetExhausted => s.push_str("status: budget exhausted\n"),
    }
    s.push_str(&format!("iterations: {}\n", r.iterations));
    s.push_str(&format!("events: {}\n", r.trace.len()));
    for line in r.trace_lines() {
        s.push_str(&format!("  {line}\n"));
    }
    let mut hom_table: BTreeMap<String, Value> = BTreeMap::new();
    if let Bounded::Done(cat) = materialize_bounded(r.realized.base(), bounds)? {
        s.push_str(&format!("morphisms: {}\n", cat.morphism_count()));
        for x in cat.objects() {
            for y in cat.objects() {
                let h = cat.hom(x, y);
                if !h.is_empty() {
                    s.push_str(&format!(
                        "  hom({x}, {y}) = {{{}}}\n",
                        h.iter()
                            .map(|m| cat.rep(*m).to_string())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ));
                    hom_table.insert(
                        format!("{x} -> {y}"),
                        Value::Array(
                            h.iter()
                                .map(|m| Value::String(cat.rep(*m).to_string()))
                                .collect(),
                        ),
                    );
                }
            }
        }
    } else {
        s.push_str("morphisms: (base does not materialize within bounds)\n");
    }
    Ok((s, json!(hom_table)))
}

fn model_human(m: &Model) -> String {
    let mut s = String::new();
    for (o, k) in m.carriers() {
        s.push_str(&format!("  |{o}| = {k}\n"));
    }
    for (e, table) in m.actions() {
        s.push_str(&format!("  {e}: {table:?}\n"));
    }
    s
}

fn model_json(m: &Model) -> Value {
    let carriers: BTreeMap<String, usize> =
        m.carriers().map(|(o, k)| (o.to_string(), k)).collect();
    let actions: BTreeMap<String, Vec<usize>> = m
        .actions()
        .map(|(e, t)| (e.to_string(), t.to_vec()))
        .collect();
    json!({ "carriers": carriers, "actions": actions })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("valid json");
    s.push('\n');
    s
}

/// Sanity helper used by the examples: decide a single word-problem query
/// in a parsed sketch.
pub fn decide_in_document(
    doc: &SketchDocument,
    lhs: &Path,
    rhs: &Path,
    bound: usize,
) -> Result<crate::word::EqVerdict, Error> {
    decide_equal(doc.sketch.base(), lhs, rhs, bound)
}
