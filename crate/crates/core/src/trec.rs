//! TREC run and qrels formats.
//!
//! Run lines are `topic Q0 doc rank score tag`; qrels lines are
//! `topic iteration doc relevance`. Run entries are re-ranked by
//! `(score desc, docid asc)`, ignoring the rank column.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{DocId, GoldStandard, RankedList, TopicId};

/// Per-topic rankings of one run file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedRun {
    /// Tag of the first line, if any.
    pub tag: Option<String>,
    pub topics: BTreeMap<TopicId, RankedList>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn doc_id(token: &str, line: usize) -> Result<DocId> {
    DocId::new(token).map_err(|e| parse_err(line, e.to_string()))
}

/// Scored entries of one topic in file order, plus the ids seen so far.
type TopicEntries = (Vec<(DocId, f64)>, HashSet<DocId>);

pub fn parse_run(reader: impl Read) -> Result<ParsedRun> {
    let mut tag: Option<String> = None;
    let mut entries: BTreeMap<TopicId, TopicEntries> = BTreeMap::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [topic, _q0, doc, rank, score, run_tag] = fields[..] else {
            return Err(parse_err(line_no, format!("expected 6 fields, found {}", fields.len())));
        };
        rank.parse::<i64>().map_err(|_| parse_err(line_no, format!("invalid rank {rank:?}")))?;
        let score: f64 = score.parse().map_err(|_| parse_err(line_no, format!("invalid score {score:?}")))?;
        if !score.is_finite() {
            return Err(parse_err(line_no, format!("non-finite score {score}")));
        }
        match &tag {
            None => tag = Some(run_tag.to_string()),
            Some(t) if t != run_tag => log::warn!("line {line_no}: run tag {run_tag:?} differs from {t:?}"),
            Some(_) => {}
        }
        let doc = doc_id(doc, line_no)?;
        let (list, seen) = entries.entry(topic.to_string()).or_default();
        if !seen.insert(doc.clone()) {
            return Err(Error::DuplicateDocument { topic: Some(topic.to_string()), doc: doc.to_string() });
        }
        list.push((doc, score));
    }
    let topics =
        entries.into_iter().map(|(t, (list, _))| Ok((t, RankedList::from_scored(list)?))).collect::<Result<_>>()?;
    Ok(ParsedRun { tag, topics })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::File { path: path.display().to_string(), source })
}

/// Parse errors carry the path in their message.
fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        Error::Io(source) => Error::File { path: path.display().to_string(), source },
        other => other,
    })
}

pub fn parse_run_file(path: impl AsRef<Path>) -> Result<ParsedRun> {
    let path = path.as_ref();
    in_file(path, parse_run(open(path)?))
}

/// Relevance of at least 1 marks a document relevant. A repeated
/// `(topic, doc)` keeps its last judgment.
pub fn parse_qrels(reader: impl Read) -> Result<BTreeMap<TopicId, GoldStandard>> {
    let mut judged: BTreeMap<TopicId, BTreeMap<DocId, bool>> = BTreeMap::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let [topic, _iter, doc, rel] = fields[..] else {
            return Err(parse_err(line_no, format!("expected 4 fields, found {}", fields.len())));
        };
        let rel: i64 = rel.parse().map_err(|_| parse_err(line_no, format!("invalid relevance {rel:?}")))?;
        let doc = doc_id(doc, line_no)?;
        match judged.entry(topic.to_string()).or_default().entry(doc) {
            Entry::Vacant(v) => {
                v.insert(rel >= 1);
            }
            Entry::Occupied(mut o) => {
                log::warn!(
                    "line {line_no}: duplicate judgment for topic {topic}, document {}; keeping the last",
                    o.key()
                );
                o.insert(rel >= 1);
            }
        }
    }
    Ok(judged
        .into_iter()
        .map(|(t, docs)| {
            let gold = GoldStandard::new(docs.into_iter().filter(|&(_, r)| r).map(|(d, _)| d));
            if gold.num_relevant() == 0 {
                log::warn!("topic {t} has no relevant documents");
            }
            (t, gold)
        })
        .collect())
}

pub fn parse_qrels_file(path: impl AsRef<Path>) -> Result<BTreeMap<TopicId, GoldStandard>> {
    let path = path.as_ref();
    in_file(path, parse_qrels(open(path)?))
}

/// Writes every topic's ranking in run format with the given tag.
pub fn write_run(mut w: impl Write, topics: &BTreeMap<TopicId, RankedList>, tag: &str) -> Result<()> {
    for (topic, list) in topics {
        for e in list.entries() {
            writeln!(w, "{topic} Q0 {} {} {} {tag}", e.doc, e.rank, e.score)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the relevant documents of every topic with relevance 1.
pub fn write_qrels(mut w: impl Write, golds: &BTreeMap<TopicId, GoldStandard>) -> Result<()> {
    for (topic, gold) in golds {
        for d in gold.relevant() {
            writeln!(w, "{topic} 0 {d} 1")?;
        }
    }
    w.flush()?;
    Ok(())
}
