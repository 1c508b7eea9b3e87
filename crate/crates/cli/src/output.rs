use std::fmt::Display;
use std::path::Path;

/// The `#` comment line opening every CSV: tool version, command and parameters.
#[derive(Debug, Clone)]
pub struct Manifest {
    fields: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str, graph: &Path) -> Self {
        Self::without_graph(command).param("graph", graph.display())
    }

    /// A manifest for commands that take no graph file.
    pub fn without_graph(command: &str) -> Self {
        Self {
            fields: vec![
                ("loopsoup".into(), env!("CARGO_PKG_VERSION").into()),
                ("command".into(), command.into()),
            ],
        }
    }

    pub fn param(mut self, key: &str, value: impl Display) -> Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn line(&self) -> String {
        let parts: Vec<String> = self
            .fields
            .iter()
            .map(|(k, v)| {
                if v.contains(char::is_whitespace) {
                    format!("{k}=\"{v}\"")
                } else {
                    format!("{k}={v}")
                }
            })
            .collect();
        format!("# {}\n", parts.join(" "))
    }
}

/// A CSV body under a manifest line.
pub struct Table {
    head: String,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(manifest: &Manifest, header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self {
            head: manifest.line(),
            writer,
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self) -> String {
        let body = self.writer.into_inner().expect("in-memory flush");
        let body = String::from_utf8(body).expect("fields are UTF-8");
        format!("{}{body}", self.head)
    }
}
