use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

/// Run `write` against `path` atomically (temp file in the same directory,
/// then rename), or against stdout when no path is given. A failed write
/// leaves no file behind.
pub fn emit_with<F>(path: Option<&Path>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let Some(path) = path else {
        let mut out = BufWriter::new(io::stdout().lock());
        write(&mut out)?;
        return out.flush().map_err(Into::into);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir).with_context(|| format!("cannot create a file in {}", dir.display()))?;
    let mut out = BufWriter::new(tmp);
    write(&mut out)?;
    let tmp = out.into_inner().map_err(|e| e.into_error())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    emit_with(path, |w| w.write_all(contents.as_bytes()).map_err(Into::into))
}

/// `# key: value` metadata block used by every CSV output.
pub fn metadata_block(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
}

/// Shortest round-trip float text.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}
