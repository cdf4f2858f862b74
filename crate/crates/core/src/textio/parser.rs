use std::collections::BTreeSet;

use crate::diagram::{Association, AssociationEnd, ClassDiagram};
use crate::multiplicity::{MultiplicitySet, Range};
use crate::names::{ClassifierId, NameId, ObjectId};
use crate::snapshot::{ObjectState, Snapshot};
use crate::transform::{ProofScript, TransformStep};

use super::lexer::{tokenize, Tok, Token};
use super::{DiagramSpans, ParseError, SourceSpan, KEYWORDS};

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        Ok(Self { toks: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let t = self.peek();
        Err(ParseError { span: t.span, expected: expected.to_string(), found: t.tok.describe() })
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w == kw)
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if self.at(&tok) {
            Ok(self.bump().span)
        } else {
            self.error(&tok.describe())
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.at_keyword(kw) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("keyword '{kw}'"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) && !w.contains('-') => {
                let w = w.clone();
                Ok((w, self.bump().span))
            }
            _ => self.error(what),
        }
    }

    fn name(&mut self, what: &str) -> PResult<(NameId, SourceSpan)> {
        let (w, span) = self.ident(what)?;
        Ok((NameId::new(w).expect("lexer produces identifiers"), span))
    }

    fn classifier(&mut self) -> PResult<(ClassifierId, SourceSpan)> {
        let (w, span) = self.ident("a classifier name")?;
        Ok((ClassifierId::new(w).expect("lexer produces identifiers"), span))
    }

    fn string(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error("a quoted string"),
        }
    }

    fn nat(&mut self) -> PResult<u64> {
        match self.peek().tok {
            Tok::Nat(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error("a natural number"),
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if self.at(&Tok::Eof) {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    fn ident_list<T>(
        &mut self,
        what: &str,
        mut f: impl FnMut(String, SourceSpan) -> PResult<T>,
    ) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        let (w, span) = self.ident(what)?;
        out.push(f(w, span)?);
        while self.at(&Tok::Comma) {
            self.bump();
            let (w, span) = self.ident(what)?;
            out.push(f(w, span)?);
        }
        Ok(out)
    }

    /// `[` range (`,` range)* `]`, or `[]` for the empty set.
    fn multiplicity(&mut self) -> PResult<MultiplicitySet> {
        self.expect(Tok::LBracket)?;
        let mut ranges: Vec<Range> = Vec::new();
        if !self.at(&Tok::RBracket) {
            ranges.push(self.range()?);
            while self.at(&Tok::Comma) {
                self.bump();
                ranges.push(self.range()?);
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(MultiplicitySet::from_ranges(ranges).expect("ranges validated while parsing"))
    }

    fn range(&mut self) -> PResult<Range> {
        let span = self.peek().span;
        let lo = self.nat()?;
        if !self.at(&Tok::DotDot) {
            return Ok((lo, Some(lo)));
        }
        self.bump();
        if self.at(&Tok::Star) {
            self.bump();
            return Ok((lo, None));
        }
        let hi = self.nat()?;
        if hi < lo {
            return Err(ParseError {
                span,
                expected: "a range with lower bound <= upper bound".into(),
                found: format!("{lo}..{hi}"),
            });
        }
        Ok((lo, Some(hi)))
    }
}

fn duplicate(span: SourceSpan, what: &str, name: &str) -> ParseError {
    ParseError {
        span,
        expected: format!("a {what} not declared before"),
        found: format!("duplicate {what} '{name}'"),
    }
}

pub fn parse_diagram(text: &str) -> Result<ClassDiagram, ParseError> {
    parse_diagram_with_spans(text).map(|(d, _)| d)
}

/// Parses a diagram and records where each classifier, association and role
/// was declared. Well-formedness is not checked.
pub fn parse_diagram_with_spans(text: &str) -> Result<(ClassDiagram, DiagramSpans), ParseError> {
    let mut p = Parser::new(text)?;
    let mut spans = DiagramSpans::default();
    p.keyword("diagram")?;
    let (name, _) = p.name("a diagram name")?;
    let mut d = ClassDiagram::new(name);
    p.expect(Tok::LBrace)?;
    loop {
        if p.at(&Tok::RBrace) {
            p.bump();
            break;
        }
        if p.at_keyword("abstract") || p.at_keyword("class") {
            let is_abstract = p.at_keyword("abstract");
            if is_abstract {
                p.bump();
            }
            p.keyword("class")?;
            let (c, span) = p.classifier()?;
            if d.classifiers.contains(&c) {
                return Err(duplicate(span, "classifier", c.as_str()));
            }
            d.add_classifier(c.clone());
            spans.names.insert(c.to_string(), span);
            if is_abstract {
                d.abstract_set.insert(c.clone());
            }
            if p.at(&Tok::LBrace) {
                p.bump();
                p.keyword("attributes")?;
                let attrs =
                    p.ident_list("an attribute name", |w, _| Ok(NameId::new(w).expect("identifier")))?;
                d.attributes.entry(c).or_default().extend(attrs);
                p.expect(Tok::RBrace)?;
            }
        } else if p.at_keyword("generalization") {
            p.bump();
            let (sup, sup_span) = p.classifier()?;
            p.expect(Tok::Triangle)?;
            let (sub, _) = p.classifier()?;
            spans.names.entry(format!("{sup} <| {sub}")).or_insert(sup_span);
            d.generalizations.insert((sup, sub));
        } else if p.at_keyword("association") {
            p.bump();
            let (name, span) = p.name("an association name")?;
            spans.names.entry(name.to_string()).or_insert(span);
            p.expect(Tok::LBrace)?;
            let mut ends = Vec::new();
            while p.at_keyword("end") {
                p.bump();
                let (role, role_span) = p.name("a role name")?;
                spans.names.entry(role.to_string()).or_insert(role_span);
                p.expect(Tok::Colon)?;
                let (anchor, _) = p.classifier()?;
                let multi = p.multiplicity()?;
                ends.push(AssociationEnd::new(role, anchor, multi));
            }
            p.expect(Tok::RBrace)?;
            d.associations.push(Association { name, ends });
        } else {
            return p.error("'class', 'abstract', 'generalization', 'association' or '}'");
        }
    }
    p.finish()?;
    Ok((d, spans))
}

/// Parses a snapshot; every link target must be declared somewhere in the
/// snapshot (forward references are fine).
pub fn parse_snapshot(text: &str) -> Result<Snapshot, ParseError> {
    let mut p = Parser::new(text)?;
    p.keyword("snapshot")?;
    let (name, _) = p.name("a snapshot name")?;
    let mut s = Snapshot::named(name);
    let mut references: Vec<(ObjectId, SourceSpan)> = Vec::new();
    p.expect(Tok::LBrace)?;
    while p.at_keyword("object") {
        p.bump();
        let (id, span) = p.ident("an object id")?;
        let id = ObjectId::new(id).expect("identifier");
        if s.objects.contains_key(&id) {
            return Err(duplicate(span, "object", id.as_str()));
        }
        let mut state = ObjectState::default();
        if p.at(&Tok::Colon) {
            p.bump();
            let tags =
                p.ident_list("a classifier name", |w, _| Ok(ClassifierId::new(w).expect("identifier")))?;
            state.isa = tags.into_iter().collect();
        }
        p.expect(Tok::LBrace)?;
        loop {
            if p.at_keyword("attr") {
                p.bump();
                let (a, span) = p.name("an attribute name")?;
                if state.has_slot(&a) {
                    return Err(duplicate(span, "slot", a.as_str()));
                }
                state.atom_slots.insert(a);
            } else if matches!(p.peek().tok, Tok::Word(_)) && !p.at(&Tok::RBrace) {
                let (role, span) = p.name("a role name, 'attr' or '}'")?;
                if state.has_slot(&role) {
                    return Err(duplicate(span, "slot", role.as_str()));
                }
                p.expect(Tok::Arrow)?;
                p.expect(Tok::LBrace)?;
                let mut targets = BTreeSet::new();
                if !p.at(&Tok::RBrace) {
                    let ids = p.ident_list("an object id", |w, span| {
                        Ok((ObjectId::new(w).expect("identifier"), span))
                    })?;
                    for (t, span) in ids {
                        references.push((t.clone(), span));
                        targets.insert(t);
                    }
                }
                p.expect(Tok::RBrace)?;
                state.link_slots.insert(role, targets);
            } else {
                break;
            }
        }
        p.expect(Tok::RBrace)?;
        s.objects.insert(id, state);
    }
    p.expect(Tok::RBrace)?;
    p.finish()?;
    if let Some((t, span)) = references.iter().find(|(t, _)| !s.objects.contains_key(t)) {
        return Err(ParseError {
            span: *span,
            expected: "a declared object".into(),
            found: format!("undeclared object '{t}'"),
        });
    }
    Ok(s)
}

/// Parses a proof script. Diagram paths are kept as written.
pub fn parse_script(text: &str) -> Result<ProofScript, ParseError> {
    let mut p = Parser::new(text)?;
    p.keyword("prove")?;
    let (name, _) = p.name("a script name")?;
    p.expect(Tok::Colon)?;
    let start = p.string()?;
    let goal = if p.at(&Tok::FatArrow) {
        p.bump();
        Some(p.string()?)
    } else {
        None
    };
    p.expect(Tok::LBrace)?;
    let mut steps = Vec::new();
    while !p.at(&Tok::RBrace) {
        steps.push(parse_step(&mut p)?);
    }
    if steps.is_empty() {
        return p.error("at least one step");
    }
    p.bump();
    p.finish()?;
    Ok(ProofScript { name, start, goal, steps })
}

fn qualified(p: &mut Parser) -> PResult<(NameId, NameId)> {
    let (assoc, _) = p.name("an association name")?;
    p.expect(Tok::Dot)?;
    let (role, _) = p.name("a role name")?;
    Ok((assoc, role))
}

fn parse_step(p: &mut Parser) -> PResult<TransformStep> {
    let word = match &p.peek().tok {
        Tok::Word(w) => w.clone(),
        _ => return p.error("a step keyword"),
    };
    let step = match word.as_str() {
        "weaken" => {
            p.bump();
            let (association, role) = qualified(p)?;
            p.keyword("to")?;
            let multi = p.multiplicity()?;
            TransformStep::WeakenMultiplicity { association, role, multi }
        }
        "erase-association" => {
            p.bump();
            let (association, _) = p.name("an association name")?;
            TransformStep::EraseAssociation { association }
        }
        "erase-class" => {
            p.bump();
            let (classifier, _) = p.classifier()?;
            let unchecked = p.at_keyword("unchecked");
            if unchecked {
                p.bump();
            }
            TransformStep::EraseClassifier { classifier, unchecked }
        }
        "erase-attribute" => {
            p.bump();
            let (classifier, _) = p.classifier()?;
            p.expect(Tok::Dot)?;
            let (attribute, _) = p.name("an attribute name")?;
            TransformStep::EraseAttribute { classifier, attribute }
        }
        "erase-generalization" => {
            p.bump();
            let (sup, _) = p.classifier()?;
            p.expect(Tok::Triangle)?;
            let (sub, _) = p.classifier()?;
            TransformStep::EraseGeneralization { sup, sub }
        }
        "move-end-up" => {
            p.bump();
            let (association, role) = qualified(p)?;
            p.keyword("to")?;
            let (target, _) = p.classifier()?;
            let keep_multiplicity = p.at_keyword("keep-multiplicity");
            if keep_multiplicity {
                p.bump();
            }
            TransformStep::MoveEndUp { association, role, target, keep_multiplicity }
        }
        _ => return p.error("a step keyword"),
    };
    Ok(step)
}
