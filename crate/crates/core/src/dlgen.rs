//! Manchester-syntax serialization of definition sets, plus a parser for the
//! subset this module emits.
//!
//! Box definitions become `Utterance and (p some xsd:decimal[> a , <= b]) and …`;
//! exact definitions become `Utterance and ((…) or (…))` with one
//! parenthesised conjunction per leaf. Binary descriptors use `value true` /
//! `value false`. Property names are camelCased descriptor ids; each data
//! property carries its id as an `rdfs:comment`.

use std::fmt::Write as _;

use crate::corpus::LevelLabel;
use crate::rules::{
    Bound, ClassDefinition, DefinitionBody, DefinitionMode, DefinitionSet, Interval,
    IntervalConstraint, PathRule, Provenance,
};
use crate::textmetrics::FeatureCatalog;
use crate::{Error, Result};

pub const DEFAULT_IRI: &str = "https://example.org/conv-onto#";
pub const ROOT_CLASS: &str = "Utterance";

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
const OWL: &str = "http://www.w3.org/2002/07/owl#";
const MODE_NOTE: &str = "definition mode: ";
const PROVENANCE_NOTE: &str = "provenance: ";

/// `flesch_kincaid` → `fleschKincaid`.
pub fn property_name(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    let mut upper = false;
    for ch in id.chars() {
        if ch == '_' {
            upper = true;
        } else if upper {
            out.extend(ch.to_uppercase());
            upper = false;
        } else {
            out.push(ch);
        }
    }
    out
}

pub fn class_name(label: LevelLabel) -> String {
    format!("{label}LevelUtterance")
}

/// At most six fractional digits, trailing zeros trimmed.
pub fn format_decimal(v: f64) -> String {
    let mut s = format!("{v:.6}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

const BINARY_CUT: f64 = 0.5;

fn emit_restriction(c: &IntervalConstraint, catalog: &FeatureCatalog, out: &mut String) -> Result<()> {
    let name = property_name(&c.descriptor);
    if catalog[c.feature].is_binary() {
        let iv = c.interval();
        let truth = if iv == Interval::greater_than(BINARY_CUT) {
            true
        } else if iv == Interval::at_most(BINARY_CUT) {
            false
        } else {
            return Err(Error::UnsupportedBinaryConstraint(c.to_string()));
        };
        let _ = write!(out, "({name} value {truth})");
        return Ok(());
    }
    let mut facets = Vec::new();
    if let Some(b) = c.lower {
        facets.push(format!("{} {}", if b.inclusive { ">=" } else { ">" }, format_decimal(b.value)));
    }
    if let Some(b) = c.upper {
        facets.push(format!("{} {}", if b.inclusive { "<=" } else { "<" }, format_decimal(b.value)));
    }
    if facets.is_empty() {
        let _ = write!(out, "({name} some xsd:decimal)");
    } else {
        let _ = write!(out, "({name} some xsd:decimal[{}])", facets.join(" , "));
    }
    Ok(())
}

fn emit_conjunction(cs: &[IntervalConstraint], catalog: &FeatureCatalog, out: &mut String) -> Result<()> {
    for (i, c) in cs.iter().enumerate() {
        if i > 0 {
            out.push_str(" and ");
        }
        emit_restriction(c, catalog, out)?;
    }
    Ok(())
}

/// The `EquivalentTo:` expression for one definition.
pub fn emit_class_expression(def: &ClassDefinition, catalog: &FeatureCatalog) -> Result<String> {
    let mut out = format!("{ROOT_CLASS} and ");
    match &def.body {
        DefinitionBody::Box { constraints } => {
            if constraints.is_empty() {
                return Err(Error::EmptyDefinition(def.label));
            }
            emit_conjunction(constraints, catalog, &mut out)?;
        }
        DefinitionBody::Exact { paths } => {
            if paths.is_empty() || paths.iter().any(|p| p.constraints.is_empty()) {
                return Err(Error::EmptyDefinition(def.label));
            }
            out.push('(');
            for (i, p) in paths.iter().enumerate() {
                if i > 0 {
                    out.push_str(" or ");
                }
                out.push('(');
                emit_conjunction(&p.constraints, catalog, &mut out)?;
                out.push(')');
            }
            out.push(')');
        }
    }
    Ok(out)
}

fn ontology_iris(iri: &str) -> (String, String) {
    let prefix = if iri.ends_with('#') || iri.ends_with('/') {
        iri.to_string()
    } else {
        format!("{iri}#")
    };
    let ontology = prefix.trim_end_matches('#').to_string();
    (prefix, ontology)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Full ontology document. Definitions with no constraints (a single-leaf
/// tree) get a class frame without `EquivalentTo:`.
pub fn emit_ontology(defs: &DefinitionSet, iri: &str) -> Result<String> {
    if defs.definitions.is_empty() {
        return Err(Error::EmptyDefinitionSet);
    }
    let (prefix, ontology) = ontology_iris(iri);
    let provenance = serde_json::to_string(&defs.provenance)?;
    let mode = match defs.mode {
        DefinitionMode::Exact => "exact",
        DefinitionMode::Box => "box",
    };

    let mut out = String::new();
    let _ = writeln!(out, "Prefix: : <{prefix}>");
    let _ = writeln!(out, "Prefix: xsd: <{XSD}>");
    let _ = writeln!(out, "Prefix: rdfs: <{RDFS}>");
    let _ = writeln!(out, "Prefix: owl: <{OWL}>");
    let _ = writeln!(out);
    let _ = writeln!(out, "Ontology: <{ontology}>");
    let _ = writeln!(out, "    Annotations:");
    let _ = writeln!(out, "        rdfs:comment {},", quote(&format!("{MODE_NOTE}{mode}")));
    let _ = writeln!(out, "        rdfs:comment {}", quote(&format!("{PROVENANCE_NOTE}{provenance}")));
    let _ = writeln!(out);

    for d in defs.catalog.iter() {
        let _ = writeln!(out, "DataProperty: {}", property_name(&d.id));
        let _ = writeln!(out, "    Annotations:");
        let _ = writeln!(out, "        rdfs:comment {}", quote(&d.id));
        let _ = writeln!(out, "    Characteristics:");
        let _ = writeln!(out, "        Functional");
        let _ = writeln!(out, "    Range:");
        let _ = writeln!(out, "        {}", if d.is_binary() { "xsd:boolean" } else { "xsd:decimal" });
        let _ = writeln!(out);
    }

    let _ = writeln!(out, "Class: {ROOT_CLASS}");
    let _ = writeln!(out);

    for def in &defs.definitions {
        let _ = writeln!(out, "Class: {}", class_name(def.label));
        let _ = writeln!(out, "    SubClassOf:");
        let _ = writeln!(out, "        {ROOT_CLASS}");
        match emit_class_expression(def, &defs.catalog) {
            Ok(expr) => {
                let _ = writeln!(out, "    EquivalentTo:");
                let _ = writeln!(out, "        {expr}");
            }
            Err(Error::EmptyDefinition(_)) => {}
            Err(e) => return Err(e),
        }
        let _ = writeln!(out);
    }

    if defs.definitions.len() >= 2 {
        let names: Vec<String> = defs.definitions.iter().map(|d| class_name(d.label)).collect();
        let _ = writeln!(out, "DisjointClasses:");
        let _ = writeln!(out, "    {}", names.join(", "));
        let _ = writeln!(out);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    OpenBracket,
    CloseBracket,
    Comma,
    Cmp(&'static str),
    Word(String),
    Number(f64),
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        position,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::Open,
            b')' => Tok::Close,
            b'[' => Tok::OpenBracket,
            b']' => Tok::CloseBracket,
            b',' => Tok::Comma,
            b'<' | b'>' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                i += eq as usize;
                Tok::Cmp(match (c, eq) {
                    (b'<', false) => "<",
                    (b'<', true) => "<=",
                    (_, false) => ">",
                    (_, true) => ">=",
                })
            }
            b'-' | b'+' | b'.' | b'0'..=b'9' => {
                let mut j = i + 1;
                while j < bytes.len() && matches!(bytes[j], b'0'..=b'9' | b'.' | b'e' | b'E' | b'-' | b'+') {
                    j += 1;
                }
                let lit = &text[i..j];
                let v: f64 = lit
                    .parse()
                    .map_err(|_| syntax(start, format!("bad decimal literal {lit:?}")))?;
                if !v.is_finite() {
                    return Err(syntax(start, format!("non-finite literal {lit:?}")));
                }
                i = j;
                out.push((start, Tok::Number(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' || c == b':' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || matches!(bytes[j], b'_' | b':')) {
                    j += 1;
                }
                out.push((start, Tok::Word(text[i..j].to_string())));
                i = j;
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character {ch:?}")));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    catalog: &'a FeatureCatalog,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        let at = self.here();
        match self.next() {
            Some((_, t)) if &t == want => Ok(()),
            Some((_, t)) => Err(syntax(at, format!("expected {what}, found {t:?}"))),
            None => Err(syntax(at, format!("expected {what}, found end of input"))),
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<()> {
        self.expect(&Tok::Word(word.into()), &format!("`{word}`"))
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Word(w)) if w == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// `Utterance and (exact group | restriction and …)`
    fn expression(&mut self) -> Result<DefinitionBody> {
        self.expect_word(ROOT_CLASS)?;
        self.expect_word("and")?;
        let body = if self.peek() == Some(&Tok::Open) && self.peek2() == Some(&Tok::Open) {
            self.pos += 1;
            let mut paths = Vec::new();
            loop {
                self.expect(&Tok::Open, "`(`")?;
                let constraints = self.conjunction()?;
                self.expect(&Tok::Close, "`)`")?;
                paths.push(PathRule {
                    leaf: paths.len(),
                    constraints,
                    label: LevelLabel::A1,
                    support: 0,
                    purity: 0.0,
                });
                if !self.eat_word("or") {
                    break;
                }
            }
            self.expect(&Tok::Close, "`)`")?;
            DefinitionBody::Exact { paths }
        } else {
            DefinitionBody::Box {
                constraints: self.conjunction()?,
            }
        };
        if self.pos < self.toks.len() {
            return Err(syntax(self.here(), "trailing input"));
        }
        Ok(body)
    }

    fn conjunction(&mut self) -> Result<Vec<IntervalConstraint>> {
        let mut out: Vec<IntervalConstraint> = Vec::new();
        loop {
            let at = self.here();
            let c = self.restriction()?;
            if out.iter().any(|o| o.feature == c.feature) {
                return Err(syntax(at, format!("{} constrained twice", c.descriptor)));
            }
            out.push(c);
            if !self.eat_word("and") {
                break;
            }
        }
        out.sort_by_key(|c| c.feature);
        Ok(out)
    }

    /// `(p some xsd:decimal[facets])` or `(p value true|false)`
    fn restriction(&mut self) -> Result<IntervalConstraint> {
        self.expect(&Tok::Open, "`(`")?;
        let at = self.here();
        let name = match self.next() {
            Some((_, Tok::Word(w))) => w,
            _ => return Err(syntax(at, "expected property name")),
        };
        let feature = self
            .catalog
            .iter()
            .position(|d| property_name(&d.id) == name)
            .ok_or_else(|| Error::UnknownProperty(name.clone()))?;
        let binary = self.catalog[feature].is_binary();
        let kw_at = self.here();
        let interval = if self.eat_word("value") {
            if !binary {
                return Err(syntax(kw_at, format!("`value` on numeric property {name}")));
            }
            let v_at = self.here();
            match self.next() {
                Some((_, Tok::Word(w))) if w == "true" => Interval::greater_than(BINARY_CUT),
                Some((_, Tok::Word(w))) if w == "false" => Interval::at_most(BINARY_CUT),
                _ => return Err(syntax(v_at, "expected `true` or `false`")),
            }
        } else if self.eat_word("some") {
            if binary {
                return Err(syntax(kw_at, format!("binary property {name} needs `value`")));
            }
            self.expect_word("xsd:decimal")?;
            if self.peek() == Some(&Tok::OpenBracket) {
                self.pos += 1;
                self.facets()?
            } else {
                Interval::UNBOUNDED
            }
        } else {
            return Err(syntax(kw_at, "expected `some` or `value`"));
        };
        self.expect(&Tok::Close, "`)`")?;
        Ok(IntervalConstraint::new(self.catalog, feature, interval))
    }

    fn facets(&mut self) -> Result<Interval> {
        let mut iv = Interval::UNBOUNDED;
        loop {
            let at = self.here();
            let op = match self.next() {
                Some((_, Tok::Cmp(op))) => op,
                _ => return Err(syntax(at, "expected facet operator")),
            };
            let v_at = self.here();
            let value = match self.next() {
                Some((_, Tok::Number(v))) => v,
                _ => return Err(syntax(v_at, "expected decimal literal")),
            };
            let bound = Some(Bound {
                value,
                inclusive: op.ends_with('='),
            });
            let slot = if op.starts_with('>') { &mut iv.lower } else { &mut iv.upper };
            if slot.is_some() {
                return Err(syntax(at, "duplicate facet bound"));
            }
            *slot = bound;
            let sep = self.here();
            match self.next() {
                Some((_, Tok::Comma)) => continue,
                Some((_, Tok::CloseBracket)) => break,
                _ => return Err(syntax(sep, "expected `,` or `]`")),
            }
        }
        Ok(iv)
    }
}

/// Parses one expression in the emitted subset. Positions in syntax errors
/// are byte offsets into `text`. Exact-mode paths come back numbered in
/// order, with zero support and purity.
pub fn parse_class_expression(text: &str, catalog: &FeatureCatalog) -> Result<DefinitionBody> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
        catalog,
    };
    p.expression()
}

fn unquote(s: &str) -> Option<String> {
    let inner = s.trim().trim_end_matches(',').strip_prefix('"')?.strip_suffix('"')?;
    Some(inner.replace("\\\"", "\"").replace("\\\\", "\\"))
}

/// A document produced by [`emit_ontology`], read back.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedOntology {
    pub iri: String,
    pub definitions: DefinitionSet,
}

/// Reads back a document written by [`emit_ontology`]: the catalog from the
/// data property frames, mode and provenance from the ontology annotations,
/// and one definition per level class.
pub fn parse_ontology(text: &str) -> Result<ParsedOntology> {
    let mut iri = None;
    let mut mode = None;
    let mut provenance: Option<Provenance> = None;
    let mut property_ids: Vec<String> = Vec::new();
    let mut classes: Vec<(LevelLabel, Option<(usize, String)>)> = Vec::new();

    let mut frame = "";
    let mut section = "";
    let mut offset = 0;
    for raw in text.split_inclusive('\n') {
        let line_start = offset;
        offset += raw.len();
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        if let Some((kw, rest)) = line.split_once(':').filter(|(kw, _)| !kw.contains(' ')) {
            let rest = rest.trim();
            match kw {
                "Prefix" if indent == 0 => {
                    if let Some(iri_text) = rest.strip_prefix(':').map(str::trim) {
                        iri = iri_text
                            .strip_prefix('<')
                            .and_then(|s| s.strip_suffix('>'))
                            .map(str::to_string);
                    }
                    continue;
                }
                "Ontology" | "DataProperty" | "Class" | "DisjointClasses" if indent == 0 => {
                    frame = kw;
                    section = "";
                    if kw == "Class" && rest != ROOT_CLASS {
                        let label = rest
                            .strip_suffix("LevelUtterance")
                            .and_then(|l| l.parse::<LevelLabel>().ok())
                            .ok_or_else(|| syntax(line_start + indent, format!("unexpected class {rest}")))?;
                        classes.push((label, None));
                    }
                    continue;
                }
                "Annotations" | "Characteristics" | "Range" | "SubClassOf" | "EquivalentTo" if rest.is_empty() => {
                    section = kw;
                    continue;
                }
                _ => {}
            }
        }
        match (frame, section) {
            ("Ontology", "Annotations") => {
                let note = line
                    .strip_prefix("rdfs:comment")
                    .and_then(unquote)
                    .ok_or_else(|| syntax(line_start + indent, "expected rdfs:comment"))?;
                if let Some(m) = note.strip_prefix(MODE_NOTE) {
                    mode = Some(m.parse::<DefinitionMode>().map_err(|e| syntax(line_start, e))?);
                } else if let Some(p) = note.strip_prefix(PROVENANCE_NOTE) {
                    provenance = Some(serde_json::from_str(p)?);
                }
            }
            ("DataProperty", "Annotations") => {
                let id = line
                    .strip_prefix("rdfs:comment")
                    .and_then(unquote)
                    .ok_or_else(|| syntax(line_start + indent, "expected rdfs:comment"))?;
                property_ids.push(id);
            }
            ("Class", "EquivalentTo") => {
                if let Some((_, expr)) = classes.last_mut() {
                    *expr = Some((line_start + indent, line.to_string()));
                }
            }
            _ => {}
        }
    }

    let catalog = FeatureCatalog::from_ids(&property_ids)?;
    let mode = mode.ok_or_else(|| syntax(0, "missing definition mode annotation"))?;
    let provenance = provenance.ok_or_else(|| syntax(0, "missing provenance annotation"))?;
    let mut definitions = Vec::with_capacity(classes.len());
    for (label, expr) in classes {
        let body = match expr {
            None => match mode {
                DefinitionMode::Box => DefinitionBody::Box { constraints: vec![] },
                DefinitionMode::Exact => DefinitionBody::Exact {
                    paths: vec![PathRule {
                        leaf: 0,
                        constraints: vec![],
                        label,
                        support: 0,
                        purity: 0.0,
                    }],
                },
            },
            Some((at, expr)) => {
                let mut body = parse_class_expression(&expr, &catalog).map_err(|e| match e {
                    Error::Syntax { position, message } => Error::Syntax {
                        position: at + position,
                        message,
                    },
                    other => other,
                })?;
                if body.mode() != mode {
                    return Err(syntax(at, format!("{label} expression is not in {mode:?} mode")));
                }
                if let DefinitionBody::Exact { paths } = &mut body {
                    for p in paths {
                        p.label = label;
                    }
                }
                body
            }
        };
        definitions.push(ClassDefinition { label, body });
    }

    Ok(ParsedOntology {
        iri: iri.unwrap_or_else(|| DEFAULT_IRI.to_string()),
        definitions: DefinitionSet {
            mode,
            catalog,
            provenance,
            definitions,
        },
    })
}

/// Structural equality of two sets: same mode, catalog and per-label
/// constraints. Path metadata and provenance are ignored.
pub fn same_structure(a: &DefinitionSet, b: &DefinitionSet) -> bool {
    a.mode == b.mode
        && a.catalog == b.catalog
        && a.definitions.len() == b.definitions.len()
        && a.definitions
            .iter()
            .zip(&b.definitions)
            .all(|(x, y)| x.label == y.label && x.body.same_structure(&y.body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::TrainConfig;
    use LevelLabel::*;

    fn cat(ids: &[&str]) -> FeatureCatalog {
        FeatureCatalog::from_ids(ids).unwrap()
    }

    fn oc(lo: f64, hi: f64) -> Interval {
        Interval::greater_than(lo).intersect(&Interval::at_most(hi))
    }

    fn boxed(label: LevelLabel, constraints: Vec<IntervalConstraint>) -> ClassDefinition {
        ClassDefinition {
            label,
            body: DefinitionBody::Box { constraints },
        }
    }

    fn set(mode: DefinitionMode, catalog: FeatureCatalog, definitions: Vec<ClassDefinition>) -> DefinitionSet {
        DefinitionSet {
            mode,
            catalog,
            provenance: Provenance {
                tree_hash: "abc".into(),
                config: TrainConfig::default(),
            },
            definitions,
        }
    }

    #[test]
    fn names() {
        assert_eq!(property_name("flesch_kincaid"), "fleschKincaid");
        assert_eq!(property_name("indirect_speech"), "indirectSpeech");
        assert_eq!(property_name("dale_chall"), "daleChall");
        assert_eq!(class_name(B2), "B2LevelUtterance");
    }

    #[test]
    fn decimals() {
        assert_eq!(format_decimal(4.2), "4.2");
        assert_eq!(format_decimal(5.0), "5");
        assert_eq!(format_decimal(0.1234566), "0.123457");
        assert_eq!(format_decimal(-0.0000001), "0");
        assert_eq!(format_decimal(-2.5), "-2.5");
    }

    #[test]
    fn box_expression() {
        let c = cat(&["flesch_kincaid"]);
        let def = boxed(B1, vec![IntervalConstraint::new(&c, 0, oc(4.2, 8.7))]);
        assert_eq!(
            emit_class_expression(&def, &c).unwrap(),
            "Utterance and (fleschKincaid some xsd:decimal[> 4.2 , <= 8.7])"
        );
    }

    #[test]
    fn binary_expression() {
        let c = cat(&["flesch_kincaid", "indirect_speech"]);
        let def = boxed(
            C1,
            vec![
                IntervalConstraint::new(&c, 0, Interval::greater_than(3.0)),
                IntervalConstraint::new(&c, 1, Interval::greater_than(0.5)),
            ],
        );
        assert_eq!(
            emit_class_expression(&def, &c).unwrap(),
            "Utterance and (fleschKincaid some xsd:decimal[> 3]) and (indirectSpeech value true)"
        );
        let odd = boxed(C1, vec![IntervalConstraint::new(&c, 1, oc(0.2, 0.7))]);
        assert!(matches!(
            emit_class_expression(&odd, &c),
            Err(Error::UnsupportedBinaryConstraint(_))
        ));
    }

    #[test]
    fn exact_expression() {
        let c = cat(&["flesch_kincaid", "gunning_fog"]);
        let path = |leaf, cs| PathRule {
            leaf,
            constraints: cs,
            label: A2,
            support: 3,
            purity: 1.0,
        };
        let def = ClassDefinition {
            label: A2,
            body: DefinitionBody::Exact {
                paths: vec![
                    path(
                        0,
                        vec![
                            IntervalConstraint::new(&c, 0, Interval::at_most(2.0)),
                            IntervalConstraint::new(&c, 1, Interval::at_most(1.0)),
                        ],
                    ),
                    path(3, vec![IntervalConstraint::new(&c, 0, Interval::greater_than(9.0))]),
                ],
            },
        };
        let text = emit_class_expression(&def, &c).unwrap();
        assert_eq!(
            text,
            "Utterance and (((fleschKincaid some xsd:decimal[<= 2]) and (gunningFog some xsd:decimal[<= 1])) \
             or ((fleschKincaid some xsd:decimal[> 9])))"
        );
        assert!(parse_class_expression(&text, &c).unwrap().same_structure(&def.body));
    }

    #[test]
    fn empty_definition_is_an_error() {
        let c = cat(&["flesch_kincaid"]);
        assert!(matches!(
            emit_class_expression(&boxed(A1, vec![]), &c),
            Err(Error::EmptyDefinition(A1))
        ));
        assert!(matches!(
            emit_ontology(&set(DefinitionMode::Box, c, vec![]), DEFAULT_IRI),
            Err(Error::EmptyDefinitionSet)
        ));
    }

    #[test]
    fn parse_examples() {
        let c = cat(&["flesch_kincaid", "indirect_speech"]);
        let body = parse_class_expression("Utterance and (fleschKincaid some xsd:decimal[> 4.2])", &c).unwrap();
        let DefinitionBody::Box { constraints } = body else { panic!() };
        assert_eq!(constraints.len(), 1);
        assert_eq!(constraints[0].interval(), Interval::greater_than(4.2));

        assert!(matches!(
            parse_class_expression("Utterance and (unknownProp some xsd:decimal[> 1])", &c),
            Err(Error::UnknownProperty(p)) if p == "unknownProp"
        ));
        let err = parse_class_expression("Utterance and (fleschKincaid some xsd:decimal[> 4.2)", &c).unwrap_err();
        assert!(matches!(err, Error::Syntax { position: 51, .. }), "{err:?}");
        assert!(matches!(
            parse_class_expression("Utterance and (fleschKincaid value true)", &c),
            Err(Error::Syntax { position: 29, .. })
        ));
        let body = parse_class_expression("Utterance and (indirectSpeech value false)", &c).unwrap();
        let DefinitionBody::Box { constraints } = body else { panic!() };
        assert_eq!(constraints[0].interval(), Interval::at_most(0.5));
    }

    #[test]
    fn separable_ontology_document() {
        let c = cat(&["flesch_kincaid"]);
        let defs = set(
            DefinitionMode::Box,
            c.clone(),
            vec![
                boxed(A1, vec![IntervalConstraint::new(&c, 0, Interval::at_most(5.5))]),
                boxed(C2, vec![IntervalConstraint::new(&c, 0, Interval::greater_than(5.5))]),
            ],
        );
        let doc = emit_ontology(&defs, DEFAULT_IRI).unwrap();
        assert_eq!(doc.matches("\nClass: ").count(), 3);
        assert_eq!(doc.matches("DataProperty: ").count(), 1);
        assert_eq!(doc.matches("DisjointClasses:").count(), 1);
        assert!(doc.starts_with("Prefix: : <https://example.org/conv-onto#>\n"));
        assert!(doc.contains("Ontology: <https://example.org/conv-onto>\n"));
        assert!(doc.contains("A1LevelUtterance, C2LevelUtterance"));
        assert_eq!(doc, emit_ontology(&defs, DEFAULT_IRI).unwrap());

        let parsed = parse_ontology(&doc).unwrap();
        assert_eq!(parsed.iri, DEFAULT_IRI);
        assert_eq!(parsed.definitions, defs);
    }

    #[test]
    fn six_level_document() {
        let c = cat(&["flesch_kincaid"]);
        let defs = set(
            DefinitionMode::Box,
            c.clone(),
            LevelLabel::ALL
                .iter()
                .map(|&l| {
                    let k = l.ordinal() as f64;
                    boxed(l, vec![IntervalConstraint::new(&c, 0, oc(k, k + 1.0))])
                })
                .collect(),
        );
        let doc = emit_ontology(&defs, "http://x.test/onto").unwrap();
        assert_eq!(doc.matches("LevelUtterance\n    SubClassOf:").count(), 6);
        assert_eq!(doc.matches("DisjointClasses:").count(), 1);
        assert!(doc.contains("Prefix: : <http://x.test/onto#>"));
        assert!(same_structure(&parse_ontology(&doc).unwrap().definitions, &defs));
    }

    #[test]
    fn unconstrained_definition_omits_equivalence() {
        let c = cat(&["flesch_kincaid"]);
        let defs = set(DefinitionMode::Box, c, vec![boxed(B1, vec![])]);
        let doc = emit_ontology(&defs, DEFAULT_IRI).unwrap();
        assert!(!doc.contains("EquivalentTo"));
        assert!(!doc.contains("DisjointClasses"));
        assert_eq!(parse_ontology(&doc).unwrap().definitions, defs);
    }
}
