//! Column TSV reader and writer.
//!
//! ```text
//! #doc <id>
//! #scenario <id>
//! #kind story|esd
//! #ed <index> <event_type>          (esd only, opens an event description)
//! index surface lemma pos head deprel coref label [frame [predicted]]
//! ```
//!
//! Columns are tab-separated, `_` marks an absent value, and a blank line
//! closes a sentence (stories) or an event description (ESDs). Other lines
//! starting with `#` are comments.

use std::collections::HashSet;

use super::{
    extract_mentions, pos, CorpusError, DependentConfig, EsdDocument, EventDescription, GoldLabel,
    Story, Token, ABSENT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DocKind {
    Story,
    Esd,
}

impl DocKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DocKind::Story => "story",
            DocKind::Esd => "esd",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Story(Story),
    Esd(EsdDocument),
}

pub fn parse_corpus_file(text: &str, kind: DocKind) -> Result<Vec<Document>, CorpusError> {
    parse_corpus_with(text, kind, &DependentConfig::default())
}

pub fn parse_stories(text: &str) -> Result<Vec<Story>, CorpusError> {
    Ok(parse_corpus_file(text, DocKind::Story)?
        .into_iter()
        .filter_map(|d| match d {
            Document::Story(s) => Some(s),
            Document::Esd(_) => None,
        })
        .collect())
}

pub fn parse_esds(text: &str) -> Result<Vec<EsdDocument>, CorpusError> {
    Ok(parse_corpus_file(text, DocKind::Esd)?
        .into_iter()
        .filter_map(|d| match d {
            Document::Esd(e) => Some(e),
            Document::Story(_) => None,
        })
        .collect())
}

pub fn parse_corpus_with(
    text: &str,
    kind: DocKind,
    deps: &DependentConfig,
) -> Result<Vec<Document>, CorpusError> {
    let mut parser = Parser {
        kind,
        deps,
        docs: Vec::new(),
        ids: HashSet::new(),
        doc: None,
    };
    for (i, raw) in text.lines().enumerate() {
        parser.line(i + 1, raw.trim_end_matches('\r'))?;
    }
    parser.finish_doc()?;
    Ok(parser.docs)
}

struct Pending {
    token: Token,
    line: usize,
}

struct Group {
    ed: Option<(usize, GoldLabel)>,
    line: usize,
    tokens: Vec<Pending>,
}

struct DocBuilder {
    id: String,
    line: usize,
    scenario: Option<String>,
    kind: Option<DocKind>,
    groups: Vec<Group>,
    open: Option<Group>,
}

struct Parser<'a> {
    kind: DocKind,
    deps: &'a DependentConfig,
    docs: Vec<Document>,
    ids: HashSet<String>,
    doc: Option<DocBuilder>,
}

fn malformed(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Malformed {
        line,
        message: message.into(),
    }
}

impl Parser<'_> {
    fn line(&mut self, no: usize, line: &str) -> Result<(), CorpusError> {
        if line.trim().is_empty() {
            return self.close_group();
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.split_whitespace();
            let directive = parts.next().unwrap_or("");
            let args: Vec<&str> = parts.collect();
            return match directive {
                "doc" => self.start_doc(no, &args),
                "scenario" | "kind" | "ed" => self.header(no, directive, &args),
                _ => Ok(()),
            };
        }
        self.token_line(no, line)
    }

    fn start_doc(&mut self, no: usize, args: &[&str]) -> Result<(), CorpusError> {
        let [id] = args else {
            return Err(malformed(no, "expected `#doc <id>`"));
        };
        self.finish_doc()?;
        if !self.ids.insert(id.to_string()) {
            return Err(CorpusError::DuplicateId {
                line: no,
                id: id.to_string(),
            });
        }
        self.doc = Some(DocBuilder {
            id: id.to_string(),
            line: no,
            scenario: None,
            kind: None,
            groups: Vec::new(),
            open: None,
        });
        Ok(())
    }

    fn header(&mut self, no: usize, directive: &str, args: &[&str]) -> Result<(), CorpusError> {
        let expected = self.kind;
        if directive == "ed" {
            self.close_group()?;
        }
        let doc = self
            .doc
            .as_mut()
            .ok_or_else(|| malformed(no, format!("`#{directive}` before any `#doc`")))?;
        match (directive, args) {
            ("scenario", [id]) => doc.scenario = Some(id.to_string()),
            ("kind", [k]) => {
                let kind = match *k {
                    "story" => DocKind::Story,
                    "esd" => DocKind::Esd,
                    other => return Err(malformed(no, format!("unknown document kind `{other}`"))),
                };
                if kind != expected {
                    return Err(malformed(
                        no,
                        format!("document kind `{k}` where `{}` was expected", expected.as_str()),
                    ));
                }
                doc.kind = Some(kind);
            }
            ("ed", [index, label]) => {
                if expected != DocKind::Esd {
                    return Err(malformed(no, "`#ed` header in a story document"));
                }
                let index: usize = index
                    .parse()
                    .map_err(|_| malformed(no, format!("bad ED index `{index}`")))?;
                let label = GoldLabel::parse(label).ok_or_else(|| CorpusError::UnknownLabel {
                    line: no,
                    label: label.to_string(),
                })?;
                if let Some(prev) = doc.groups.last().and_then(|g| g.ed.as_ref()) {
                    if index <= prev.0 {
                        return Err(malformed(no, format!("ED index {index} is not increasing")));
                    }
                }
                doc.open = Some(Group {
                    ed: Some((index, label)),
                    line: no,
                    tokens: Vec::new(),
                });
            }
            _ => return Err(malformed(no, format!("malformed `#{directive}` header"))),
        }
        Ok(())
    }

    fn token_line(&mut self, no: usize, line: &str) -> Result<(), CorpusError> {
        let kind = self.kind;
        let doc = self
            .doc
            .as_mut()
            .ok_or_else(|| malformed(no, "token line before any `#doc`"))?;
        let token = parse_token(no, line)?;
        match (&mut doc.open, kind) {
            (Some(group), _) => group.tokens.push(Pending { token, line: no }),
            (None, DocKind::Story) => {
                doc.open = Some(Group {
                    ed: None,
                    line: no,
                    tokens: vec![Pending { token, line: no }],
                })
            }
            (None, DocKind::Esd) => return Err(malformed(no, "token line outside an `#ed` block")),
        }
        Ok(())
    }

    fn close_group(&mut self) -> Result<(), CorpusError> {
        let Some(doc) = self.doc.as_mut() else {
            return Ok(());
        };
        let Some(group) = doc.open.take() else {
            return Ok(());
        };
        if group.tokens.is_empty() {
            return Err(malformed(group.line, "event description without tokens"));
        }
        validate_group(&group, self.kind)?;
        doc.groups.push(group);
        Ok(())
    }

    fn finish_doc(&mut self) -> Result<(), CorpusError> {
        self.close_group()?;
        let Some(doc) = self.doc.take() else {
            return Ok(());
        };
        let scenario = doc
            .scenario
            .ok_or_else(|| malformed(doc.line, format!("document `{}` has no `#scenario`", doc.id)))?;
        if doc.kind.is_none() {
            return Err(malformed(doc.line, format!("document `{}` has no `#kind`", doc.id)));
        }
        let out = match self.kind {
            DocKind::Story => {
                let sentences: Vec<Vec<Token>> = doc
                    .groups
                    .into_iter()
                    .map(|g| g.tokens.into_iter().map(|p| p.token).collect())
                    .collect();
                let mentions = extract_mentions(&sentences, self.deps);
                Document::Story(Story {
                    scenario,
                    id: doc.id,
                    sentences,
                    mentions,
                })
            }
            DocKind::Esd => Document::Esd(EsdDocument {
                scenario,
                id: doc.id,
                eds: doc
                    .groups
                    .into_iter()
                    .map(|g| {
                        let (index, event_type) = g.ed.expect("esd groups carry a header");
                        EventDescription {
                            index,
                            event_type,
                            tokens: g.tokens.into_iter().map(|p| p.token).collect(),
                        }
                    })
                    .collect(),
            }),
        };
        self.docs.push(out);
        Ok(())
    }
}

fn validate_group(group: &Group, kind: DocKind) -> Result<(), CorpusError> {
    let len = group.tokens.len();
    for (i, p) in group.tokens.iter().enumerate() {
        let t = &p.token;
        if t.index != i + 1 {
            return Err(malformed(
                p.line,
                format!("token index {} where {} was expected", t.index, i + 1),
            ));
        }
        if t.head > len {
            return Err(CorpusError::DanglingHead {
                line: p.line,
                head: t.head,
                len,
            });
        }
        if t.label.is_some() {
            match kind {
                DocKind::Esd => {
                    return Err(malformed(
                        p.line,
                        "token labels are not allowed in ESDs; label the `#ed` header",
                    ))
                }
                DocKind::Story if !pos::is_verbal(&t.pos) => {
                    return Err(malformed(
                        p.line,
                        format!("label on non-verb token with POS `{}`", t.pos),
                    ))
                }
                DocKind::Story => {}
            }
        }
    }
    Ok(())
}

fn optional(field: &str) -> Option<String> {
    (field != ABSENT).then(|| field.to_string())
}

fn parse_token(no: usize, line: &str) -> Result<Token, CorpusError> {
    let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
    if !(8..=10).contains(&fields.len()) {
        return Err(malformed(
            no,
            format!("expected 8 to 10 tab-separated columns, found {}", fields.len()),
        ));
    }
    if let Some(i) = fields.iter().position(|f| f.is_empty()) {
        return Err(malformed(no, format!("column {} is empty", i + 1)));
    }
    let index: usize = fields[0]
        .parse()
        .map_err(|_| malformed(no, format!("bad token index `{}`", fields[0])))?;
    let head: usize = fields[4]
        .parse()
        .map_err(|_| malformed(no, format!("bad head index `{}`", fields[4])))?;
    let label = match fields[7] {
        ABSENT => None,
        s => Some(GoldLabel::parse(s).ok_or_else(|| CorpusError::UnknownLabel {
            line: no,
            label: s.to_string(),
        })?),
    };
    Ok(Token {
        index,
        surface: fields[1].to_string(),
        lemma: fields[2].to_string(),
        pos: fields[3].to_string(),
        head,
        deprel: fields[5].to_string(),
        coref: optional(fields[6]),
        label,
        frame: fields.get(8).and_then(|f| optional(f)),
        predicted: fields.get(9).and_then(|f| optional(f)),
    })
}

fn write_token(out: &mut String, t: &Token) {
    let opt = |o: &Option<String>| o.clone().unwrap_or_else(|| ABSENT.to_string());
    let mut cols = vec![
        t.index.to_string(),
        t.surface.clone(),
        t.lemma.clone(),
        t.pos.clone(),
        t.head.to_string(),
        t.deprel.clone(),
        opt(&t.coref),
        t.label
            .as_ref()
            .map_or_else(|| ABSENT.to_string(), |l| l.as_str().to_string()),
    ];
    if t.frame.is_some() || t.predicted.is_some() {
        cols.push(opt(&t.frame));
    }
    if t.predicted.is_some() {
        cols.push(opt(&t.predicted));
    }
    out.push_str(&cols.join("\t"));
    out.push('\n');
}

fn write_header(out: &mut String, id: &str, scenario: &str, kind: DocKind) {
    out.push_str(&format!("#doc {id}\n#scenario {scenario}\n#kind {}\n", kind.as_str()));
}

pub fn write_stories(stories: &[Story]) -> String {
    let mut out = String::new();
    for story in stories {
        write_header(&mut out, &story.id, &story.scenario, DocKind::Story);
        for sentence in &story.sentences {
            for t in sentence {
                write_token(&mut out, t);
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_esds(docs: &[EsdDocument]) -> String {
    let mut out = String::new();
    for doc in docs {
        write_header(&mut out, &doc.id, &doc.scenario, DocKind::Esd);
        for ed in &doc.eds {
            out.push_str(&format!("#ed {} {}\n", ed.index, ed.event_type));
            for t in &ed.tokens {
                write_token(&mut out, t);
            }
            out.push('\n');
        }
    }
    out
}
