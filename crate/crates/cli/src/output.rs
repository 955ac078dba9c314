//! Tab-separated tables with a provenance comment, written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| num(v)).collect());
    }

    pub fn render(&self, command: &str, config_hash: &str) -> String {
        let mut out = format!("# tunnel-arrival {command} config-sha256={config_hash}\n");
        out.push_str(&self.columns.join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Shortest representation that round-trips; stable across runs.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes `contents` to `dir/name` through a temporary file and a rename, so
/// readers never observe a partial table.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut file = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    file.write_all(contents.as_bytes())?;
    file.sync_all()?;
    drop(file);
    fs::rename(&tmp, &target).with_context(|| format!("writing {}", target.display()))?;
    Ok(target)
}

/// Collects the tables one command produces and writes them together.
pub struct Writer<'a> {
    pub dir: &'a Path,
    pub command: &'a str,
    pub hash: &'a str,
    pub written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    pub fn new(dir: &'a Path, command: &'a str, hash: &'a str) -> Self {
        Self { dir, command, hash, written: Vec::new() }
    }

    pub fn table(&mut self, name: &str, table: &Table) -> anyhow::Result<()> {
        let path = write_atomic(self.dir, name, &table.render(self.command, self.hash))?;
        self.written.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_has_comment_and_header() {
        let mut t = Table::new(["a", "b"]);
        t.push_numbers(&[1.0, 0.25]);
        let s = t.render("x", "abc");
        assert_eq!(s, "# tunnel-arrival x config-sha256=abc\na\tb\n1\t0.25\n");
    }

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "t.dat", "hello").unwrap();
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("t.dat")]);
    }
}
