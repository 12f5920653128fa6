use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// RFC 4180 field quoting: fields containing comma, quote, CR, or LF are
/// quoted, embedded quotes doubled.
pub(crate) fn csv_field(field: &str) -> String {
    if field.contains([',', '"', '\r', '\n']) {
        let mut out = String::with_capacity(field.len() + 2);
        out.push('"');
        for ch in field.chars() {
            if ch == '"' {
                out.push('"');
            }
            out.push(ch);
        }
        out.push('"');
        out
    } else {
        field.to_string()
    }
}

pub(crate) fn write_csv_line<W: Write>(w: &mut W, fields: &[String]) -> io::Result<()> {
    let line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
    w.write_all(line.join(",").as_bytes())?;
    w.write_all(b"\n")
}

/// Writer that lands output atomically: everything goes to a temp file in
/// the target directory, renamed into place on success and removed on error,
/// so a partial product is never visible.
pub(crate) struct AtomicFile {
    tmp_path: PathBuf,
    final_path: PathBuf,
    writer: Option<BufWriter<File>>,
}

impl AtomicFile {
    pub fn create(path: &Path) -> io::Result<AtomicFile> {
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        fs::create_dir_all(dir)?;
        let file_name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".to_string());
        let tmp_path = dir.join(format!(".{}.tmp-{}", file_name, std::process::id()));
        let writer = BufWriter::new(File::create(&tmp_path)?);
        Ok(AtomicFile {
            tmp_path,
            final_path: path.to_path_buf(),
            writer: Some(writer),
        })
    }

    pub fn writer(&mut self) -> &mut BufWriter<File> {
        self.writer.as_mut().expect("writer present until commit")
    }

    pub fn commit(mut self) -> io::Result<()> {
        let writer = self.writer.take().expect("commit once");
        let result = writer
            .into_inner()
            .map_err(|e| e.into_error())
            .and_then(|f| f.sync_all())
            .and_then(|_| fs::rename(&self.tmp_path, &self.final_path));
        if result.is_err() {
            let _ = fs::remove_file(&self.tmp_path);
        }
        result
    }
}

impl Drop for AtomicFile {
    fn drop(&mut self) {
        if self.writer.is_some() {
            // error path: drop the handle, then the partial file
            self.writer = None;
            let _ = fs::remove_file(&self.tmp_path);
        }
    }
}

/// Write a whole CSV file (header + rows) atomically.
pub(crate) fn write_csv_file<I>(path: &Path, header: &[&str], rows: I) -> io::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = AtomicFile::create(path)?;
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write_csv_line(out.writer(), &header)?;
    for row in rows {
        write_csv_line(out.writer(), &row)?;
    }
    out.commit()
}

/// Write one JSON object per line, atomically. Key order follows the
/// serialized struct's field order.
pub(crate) fn write_jsonl_file<I, T>(path: &Path, rows: I) -> io::Result<()>
where
    I: IntoIterator<Item = T>,
    T: serde::Serialize,
{
    let mut out = AtomicFile::create(path)?;
    for row in rows {
        let line = serde_json::to_string(&row)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        out.writer().write_all(line.as_bytes())?;
        out.writer().write_all(b"\n")?;
    }
    out.commit()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_rules() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("line\nbreak"), "\"line\nbreak\"");
        assert_eq!(csv_field(""), "");
    }

    #[test]
    fn csv_file_round_trips_through_independent_reader() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let rows = vec![
            vec!["a,b".to_string(), "1".to_string()],
            vec!["plain".to_string(), "2".to_string()],
            vec!["multi\nline \"x\"".to_string(), "3".to_string()],
        ];
        write_csv_file(&path, &["key", "count"], rows.clone()).unwrap();

        let mut rdr = csv::Reader::from_path(&path).unwrap();
        assert_eq!(
            rdr.headers().unwrap().iter().collect::<Vec<_>>(),
            vec!["key", "count"]
        );
        let got: Vec<Vec<String>> = rdr
            .records()
            .map(|r| r.unwrap().iter().map(|f| f.to_string()).collect())
            .collect();
        assert_eq!(got, rows);
    }

    #[test]
    fn header_only_file_for_empty_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_csv_file(&path, &["domain", "count"], Vec::new()).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "domain,count\n");
    }

    #[test]
    fn failed_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("blocked.csv");
        std::fs::create_dir(&target).unwrap(); // rename onto a directory fails
        let rows = vec![vec!["x".to_string()]];
        assert!(write_csv_file(&target, &["col"], rows).is_err());
        let leftovers: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().contains("tmp"))
            .collect();
        assert!(leftovers.is_empty(), "temp files cleaned up");
    }
}
