use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::OutputArgs;
use crate::CliError;

/// Full-precision decimal: 17 significant digits round-trip every f64.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_line<I: IntoIterator<Item = String>>(fields: I) -> String {
    let mut line = fields.into_iter().collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output is serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Sidecar<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `body` to `--out` (plus its metadata sidecar) or to stdout.
pub fn emit<C: Serialize>(out: &OutputArgs, command: &str, config: &C, body: &str) -> Result<(), CliError> {
    match &out.out {
        Some(path) => {
            write_file(path, body)?;
            let mut meta = path.clone().into_os_string();
            meta.push(".meta.json");
            let sidecar = Sidecar {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command,
                config,
            };
            write_file(&PathBuf::from(meta), &json(&sidecar))
        }
        None => std::io::stdout().write_all(body.as_bytes()).map_err(|source| CliError::Output {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}
