use std::fmt::Write as _;
use std::path::Path;

use super::{
    DataSplit, Lexicon, RawRecord, Rejection, SenseDefinition, SenseKind, TagSet,
};
use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads one JSON object per line. Lines that do not parse are returned as
/// rejections so ingestion can continue.
pub fn read_raw_records(path: &Path) -> Result<(Vec<RawRecord>, Vec<Rejection>)> {
    let text = read(path)?;
    let mut records = Vec::new();
    let mut rejections = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match serde_json::from_str::<RawRecord>(line) {
            Ok(r) => records.push(r),
            Err(e) => rejections.push(Rejection {
                id: format!("{}:{}", path.display(), n + 1),
                reason: format!("malformed record: {e}"),
            }),
        }
    }
    Ok((records, rejections))
}

/// Writes dictionary records as JSON lines after `header`.
pub fn write_raw_records(path: &Path, records: &[RawRecord], header: &str) -> Result<()> {
    let mut out = String::from(header);
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    write(path, &out)
}

/// Writes slang then conventional senses as JSON lines after `header`.
pub fn write_lexicon(path: &Path, lex: &Lexicon, header: &str) -> Result<()> {
    let mut out = String::from(header);
    writeln!(out, "# tags {}", lex.tag_set()).unwrap();
    for s in lex.slang().iter().chain(lex.conventional_senses()) {
        let json = serde_json::to_string(&RawRecord::from(s)).expect("records serialize");
        out.push_str(&json);
        out.push('\n');
    }
    write(path, &out)
}

fn sense_from_record(r: RawRecord, path: &Path, line: usize) -> Result<SenseDefinition> {
    let missing = |field: &str| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("missing `{field}`"),
    };
    let votes = match (r.up, r.down) {
        (Some(u), Some(d)) => Some((u, d)),
        _ => None,
    };
    Ok(SenseDefinition {
        id: r.id.ok_or_else(|| missing("id"))?,
        word: r.word.ok_or_else(|| missing("word"))?,
        definition: r.definition.ok_or_else(|| missing("definition"))?,
        pos: r.pos.ok_or_else(|| missing("pos"))?,
        kind: r.kind.ok_or_else(|| missing("kind"))?,
        flags: r.flags,
        decade: r.decade.map(|d| d as i32),
        example: r.example,
        votes,
    })
}

/// Loads a lexicon written by [`write_lexicon`].
pub fn read_lexicon(path: &Path) -> Result<Lexicon> {
    let text = read(path)?;
    let mut tag_set = None;
    let mut slang = Vec::new();
    let mut conventional = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(tags) = line.strip_prefix("# tags ") {
            tag_set = Some(TagSet::new(tags.split(',').map(str::to_string))?);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let record: RawRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            message: e.to_string(),
        })?;
        let sense = sense_from_record(record, path, n + 1)?;
        match sense.kind {
            SenseKind::Slang => slang.push(sense),
            SenseKind::Conventional => conventional.push(sense),
        }
    }
    let tag_set = tag_set.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: "missing `# tags` line".into(),
    })?;
    Lexicon::from_senses(slang, conventional, tag_set)
}

pub fn write_split(path: &Path, split: &DataSplit, header: &str) -> Result<()> {
    let mut out = String::from(header);
    for (name, ids) in [
        ("train", &split.train),
        ("validation", &split.validation),
        ("test", &split.test),
    ] {
        writeln!(out, "[{name}]").unwrap();
        for id in ids {
            writeln!(out, "{id}").unwrap();
        }
    }
    write(path, &out)
}

pub fn read_split(path: &Path) -> Result<DataSplit> {
    let text = read(path)?;
    let mut split = DataSplit {
        train: vec![],
        validation: vec![],
        test: vec![],
        seed: 0,
    };
    let mut section: Option<&mut Vec<String>> = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if let Some(seed) = line.strip_prefix("# seed ") {
            split.seed = seed.trim().parse().unwrap_or(0);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        section = match line {
            "[train]" => Some(&mut split.train),
            "[validation]" => Some(&mut split.validation),
            "[test]" => Some(&mut split.test),
            id => match section {
                Some(ids) => {
                    ids.push(id.to_string());
                    Some(ids)
                }
                None => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: n + 1,
                        message: "id outside a section".into(),
                    })
                }
            },
        };
    }
    Ok(split)
}
