//! Readers and writers for the CiteULike text layouts.
//!
//! * users file: one line per user, `count id id ...`
//! * content file (`mult.dat`): one line per article, `count term:count term:count ...`
//! * tags file: one line per article listing tag ids, optionally count-prefixed
//! * citations file: one `citing cited` pair per line
//! * documents: plain text with one article per line, or a CSV with
//!   title/abstract columns

use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{tokenize, InteractionMatrix};
use crate::error::{Error, Result};

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        msg: msg.into(),
    }
}

fn parse_ints(path: &Path, lineno: usize, line: &str) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| parse_err(path, lineno, format!("expected an integer, found '{t}'")))
        })
        .collect()
}

/// Parses `count id id ...` lines. Blank lines are allowed and mean "no ids",
/// which is how empty libraries appear in some exports.
fn parse_count_prefixed(path: &Path) -> Result<Vec<Vec<u64>>> {
    let lines = read_lines(path)?;
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 1;
        let nums = parse_ints(path, lineno, line)?;
        match nums.split_first() {
            None => out.push(Vec::new()),
            Some((&count, ids)) => {
                if count as usize != ids.len() {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("declares {count} ids but lists {}", ids.len()),
                    ));
                }
                out.push(ids.to_vec());
            }
        }
    }
    Ok(out)
}

/// Reads a users file. When `n_articles` is `None` it is taken as the largest
/// id plus one; otherwise any id at or beyond it is a bounds error.
pub fn load_interactions(path: &Path, n_articles: Option<usize>) -> Result<InteractionMatrix> {
    let rows = parse_count_prefixed(path)?;
    if rows.is_empty() {
        return Err(Error::Empty(format!("{}: no users", path.display())));
    }
    let max_id = rows.iter().flatten().copied().max();
    let n_articles = match (n_articles, max_id) {
        (Some(n), Some(m)) if m as usize >= n => {
            return Err(Error::Bounds(format!(
                "{}: article id {m} but only {n} articles declared",
                path.display()
            )))
        }
        (Some(n), _) => n,
        (None, Some(m)) => m as usize + 1,
        (None, None) => 0,
    };
    let libraries = rows
        .into_iter()
        .map(|r| r.into_iter().map(|a| a as u32).collect())
        .collect();
    InteractionMatrix::from_libraries(n_articles, libraries)
}

pub fn save_interactions(path: &Path, r: &InteractionMatrix) -> Result<()> {
    let mut out = String::new();
    for lib in r.libraries() {
        out.push_str(&lib.len().to_string());
        for a in lib {
            out.push(' ');
            out.push_str(&a.to_string());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a `mult.dat` content file into raw `(term, count)` rows.
pub fn load_term_counts(path: &Path) -> Result<Vec<Vec<(u32, u32)>>> {
    let lines = read_lines(path)?;
    let mut rows = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 1;
        let mut toks = line.split_whitespace();
        let Some(first) = toks.next() else {
            rows.push(Vec::new());
            continue;
        };
        let declared: usize = first
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad term count '{first}'")))?;
        let mut row = Vec::with_capacity(declared);
        for t in toks {
            let (term, count) = t
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?)))
                .ok_or_else(|| parse_err(path, lineno, format!("expected term:count, found '{t}'")))?;
            row.push((term, count));
        }
        if row.len() != declared {
            return Err(parse_err(
                path,
                lineno,
                format!("declares {declared} terms but lists {}", row.len()),
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Reads a tags file into `(article, tag)` assignments, article = line index.
pub fn load_tag_assignments(path: &Path, count_prefixed: bool) -> Result<(usize, Vec<(usize, u32)>)> {
    let rows = if count_prefixed {
        parse_count_prefixed(path)?
    } else {
        read_lines(path)?
            .iter()
            .enumerate()
            .map(|(i, l)| parse_ints(path, i + 1, l))
            .collect::<Result<Vec<_>>>()?
    };
    let n = rows.len();
    let pairs = rows
        .into_iter()
        .enumerate()
        .flat_map(|(a, tags)| tags.into_iter().map(move |t| (a, t as u32)))
        .collect();
    Ok((n, pairs))
}

pub fn load_citations(path: &Path) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (i, line) in read_lines(path)?.iter().enumerate() {
        let nums = parse_ints(path, i + 1, line)?;
        match nums.as_slice() {
            [] => {}
            [x, y] => out.push((*x as usize, *y as usize)),
            _ => {
                return Err(parse_err(
                    path,
                    i + 1,
                    "expected exactly two ids: citing cited",
                ))
            }
        }
    }
    Ok(out)
}

/// Reads article documents and tokenizes them (title and abstract joined).
///
/// A `.csv` file must have a header; the columns `raw.title`/`raw.abstract`
/// are used when present, else `title`/`abstract`. Any other file is read as
/// one document per line.
pub fn load_documents(path: &Path) -> Result<Vec<Vec<String>>> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if !is_csv {
        return Ok(read_lines(path)?.iter().map(|l| tokenize(l)).collect());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let find = |names: &[&str]| names.iter().find_map(|n| headers.iter().position(|h| h == *n));
    let title = find(&["raw.title", "title"]);
    let abstr = find(&["raw.abstract", "abstract"]);
    if title.is_none() && abstr.is_none() {
        return Err(Error::Format(format!(
            "{}: no title or abstract column",
            path.display()
        )));
    }
    let mut docs = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut text = String::new();
        for col in [title, abstr].into_iter().flatten() {
            text.push_str(rec.get(col).unwrap_or(""));
            text.push(' ');
        }
        docs.push(tokenize(&text));
    }
    Ok(docs)
}

/// Writes lines, one entry per line.
pub(crate) fn write_lines<I, S>(path: &Path, lines: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for l in lines {
        writeln!(w, "{}", l.as_ref()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
