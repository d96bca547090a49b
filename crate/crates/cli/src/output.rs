use std::fs;
use std::io::{self, Write};
use std::path::Path;

use nmrqc::algebra::CMatrix;
use serde::Serialize;
use tempfile::NamedTempFile;

/// Writes `path` via a temporary file in the same directory and a rename,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    {
        let mut w = io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

/// Four rows of `re+imi` entries.
pub fn matrix_table(m: &CMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.dim() {
        let row: Vec<String> = (0..m.dim())
            .map(|c| {
                let z = m[(r, c)];
                // print -0 as 0 so equal matrices give equal text
                let clean = |x: f64| if x.abs() < 5e-9 { 0.0 } else { x };
                format!("{:+.8}{:+.8}i", clean(z.re), clean(z.im))
            })
            .collect();
        out.push_str(&row.join("  "));
        out.push('\n');
    }
    out
}
