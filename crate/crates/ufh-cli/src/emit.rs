//! Canonical output: sorted-key JSON, CSV with one `#` header comment
//! carrying tool version, config hash and window. Byte-stable across reruns.

use serde_json::Value;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

/// serde_json maps are BTree-backed, so key order is already canonical;
/// this just fixes the layout and the trailing newline.
pub fn canonical_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

pub fn config_hash(canonical: &Value) -> String {
    let mut h = Sha256::new();
    h.update(canonical_json(canonical).as_bytes());
    let digest = h.finalize();
    let mut out = String::with_capacity(16);
    for b in &digest[..8] {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn header_comment(hash: &str, window: u64) -> String {
    format!("tool=ufh/{} config={hash} window={window}", env!("CARGO_PKG_VERSION"))
}

pub struct Out {
    dir: PathBuf,
}

impl Out {
    pub fn new(dir: &Path) -> std::io::Result<Out> {
        std::fs::create_dir_all(dir)?;
        Ok(Out { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        let mut f = std::fs::File::create(&path)?;
        f.write_all(contents.as_bytes())?;
        Ok(path)
    }

    pub fn write_json(&self, name: &str, v: &Value) -> std::io::Result<PathBuf> {
        self.write(name, &canonical_json(v))
    }
}

/// CSV builder: comment lines, a header row, then data rows.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(comment: &str, columns: &[&str]) -> Csv {
        let mut buf = String::new();
        buf.push_str("# ");
        buf.push_str(comment);
        buf.push('\n');
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn comment(&mut self, text: &str) {
        self.buf.push_str("# ");
        self.buf.push_str(text);
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Exact "p/q" text in rational mode, shortest-round-trip decimal otherwise.
pub fn scalar_field<S: ufh::Scalar>(v: &S) -> String {
    if S::EXACT {
        v.to_string()
    } else {
        ufh::scalar::csv_value(v)
    }
}
