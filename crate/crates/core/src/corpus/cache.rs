//! Binary caches for the preprocessed matrices.
//!
//! Every file starts with the magic `CATM`, a version byte (1) and a kind byte:
//!
//! ```text
//! kind 1, interactions: n_users u64, n_articles u64,
//!                       then per user: len u32, ids u32 * len
//! kind 2, content:      sparse block
//! kind 3, tags:         sparse block, n_tags u64, original tag ids u32 * n_tags
//!
//! sparse block: n_rows u64, n_cols u64, nnz u64,
//!               indptr u64 * (n_rows + 1), indices u32 * nnz, values f64 * nnz
//! ```
//!
//! All integers and floats are little-endian. Values are stored as raw `f64`
//! bits, so a round trip is bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ContentMatrix, InteractionMatrix, SparseRows, TagMatrix};
use crate::error::{Error, Result};
use crate::tensorfile::{read_exact, read_f64, read_u32, read_u64, read_u8};

pub const MAGIC: &[u8; 4] = b"CATM";
pub const VERSION: u8 = 1;

const KIND_INTERACTIONS: u8 = 1;
const KIND_CONTENT: u8 = 2;
const KIND_TAGS: u8 = 3;

fn header<W: Write>(w: &mut W, kind: u8) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION, kind])
}

fn check_header<R: Read>(r: &mut R, kind: u8) -> Result<()> {
    let mut magic = [0u8; 4];
    read_exact(r, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a matrix cache (bad magic)".into()));
    }
    let version = read_u8(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported cache version {version}")));
    }
    let found = read_u8(r)?;
    if found != kind {
        return Err(Error::Format(format!(
            "cache holds matrix kind {found}, expected {kind}"
        )));
    }
    Ok(())
}

pub fn write_interactions<W: Write>(w: &mut W, m: &InteractionMatrix) -> std::io::Result<()> {
    header(w, KIND_INTERACTIONS)?;
    w.write_all(&(m.n_users() as u64).to_le_bytes())?;
    w.write_all(&(m.n_articles() as u64).to_le_bytes())?;
    for lib in m.libraries() {
        w.write_all(&(lib.len() as u32).to_le_bytes())?;
        for &a in lib {
            w.write_all(&a.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_interactions<R: Read>(r: &mut R) -> Result<InteractionMatrix> {
    check_header(r, KIND_INTERACTIONS)?;
    let n_users = read_u64(r)? as usize;
    let n_articles = read_u64(r)? as usize;
    let mut libs = Vec::with_capacity(n_users);
    for _ in 0..n_users {
        let len = read_u32(r)? as usize;
        let mut lib = Vec::with_capacity(len);
        for _ in 0..len {
            lib.push(read_u32(r)?);
        }
        libs.push(lib);
    }
    InteractionMatrix::from_libraries(n_articles, libs)
}

fn write_sparse<W: Write>(w: &mut W, m: &SparseRows) -> std::io::Result<()> {
    let (indptr, indices, values) = m.raw_parts();
    w.write_all(&(m.n_rows() as u64).to_le_bytes())?;
    w.write_all(&(m.n_cols() as u64).to_le_bytes())?;
    w.write_all(&(indices.len() as u64).to_le_bytes())?;
    for &p in indptr {
        w.write_all(&(p as u64).to_le_bytes())?;
    }
    for &c in indices {
        w.write_all(&c.to_le_bytes())?;
    }
    for &v in values {
        w.write_all(&v.to_bits().to_le_bytes())?;
    }
    Ok(())
}

fn read_sparse<R: Read>(r: &mut R) -> Result<SparseRows> {
    let n_rows = read_u64(r)? as usize;
    let n_cols = read_u64(r)? as usize;
    let nnz = read_u64(r)? as usize;
    let indptr = (0..=n_rows)
        .map(|_| read_u64(r).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let indices = (0..nnz).map(|_| read_u32(r)).collect::<Result<Vec<_>>>()?;
    let values = (0..nnz).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    SparseRows::from_raw_parts(n_cols, indptr, indices, values)
}

pub fn write_content<W: Write>(w: &mut W, m: &ContentMatrix) -> std::io::Result<()> {
    header(w, KIND_CONTENT)?;
    write_sparse(w, m.rows())
}

pub fn read_content<R: Read>(r: &mut R) -> Result<ContentMatrix> {
    check_header(r, KIND_CONTENT)?;
    Ok(ContentMatrix::new(read_sparse(r)?))
}

pub fn write_tags<W: Write>(w: &mut W, m: &TagMatrix) -> std::io::Result<()> {
    header(w, KIND_TAGS)?;
    write_sparse(w, m.rows())?;
    w.write_all(&(m.tag_ids().len() as u64).to_le_bytes())?;
    for &t in m.tag_ids() {
        w.write_all(&t.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tags<R: Read>(r: &mut R) -> Result<TagMatrix> {
    check_header(r, KIND_TAGS)?;
    let rows = read_sparse(r)?;
    let n = read_u64(r)? as usize;
    let ids = (0..n).map(|_| read_u32(r)).collect::<Result<Vec<_>>>()?;
    if ids.len() != rows.n_cols() {
        return Err(Error::Format("tag id list does not match column count".into()));
    }
    Ok(TagMatrix::new(rows, ids))
}

fn save_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
}

pub fn save_interactions(path: &Path, m: &InteractionMatrix) -> Result<()> {
    save_with(path, |w| write_interactions(w, m))
}

pub fn load_interactions(path: &Path) -> Result<InteractionMatrix> {
    read_interactions(&mut open(path)?)
}

pub fn save_content(path: &Path, m: &ContentMatrix) -> Result<()> {
    save_with(path, |w| write_content(w, m))
}

pub fn load_content(path: &Path) -> Result<ContentMatrix> {
    read_content(&mut open(path)?)
}

pub fn save_tags(path: &Path, m: &TagMatrix) -> Result<()> {
    save_with(path, |w| write_tags(w, m))
}

pub fn load_tags(path: &Path) -> Result<TagMatrix> {
    read_tags(&mut open(path)?)
}
