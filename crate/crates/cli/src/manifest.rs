//! Run manifests: everything needed to repeat a command bit-for-bit.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;

use crate::args::{Cli, Command, RerunArgs};
use crate::error::{Classify, CliError, CliResult};
use crate::input::sha256_hex;
use crate::output::KeyValueDoc;

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Resolved invocation. `options` holds long flag names and values; a value
/// of `true` marks a boolean switch. The output directory is deliberately not
/// recorded so that manifests themselves compare equal across reruns.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub input_sha256: Option<String>,
    pub options: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            input: None,
            input_sha256: None,
            options: Vec::new(),
        }
    }

    pub fn input(mut self, path: &Path, sha256: String) -> Self {
        self.input = Some(fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf()));
        self.input_sha256 = Some(sha256);
        self
    }

    pub fn option(mut self, key: &str, value: impl ToString) -> Self {
        self.options.push((key.to_string(), value.to_string()));
        self
    }

    pub fn option_if(self, key: &str, value: Option<impl ToString>) -> Self {
        match value {
            Some(v) => self.option(key, v),
            None => self,
        }
    }

    pub fn to_doc(&self) -> KeyValueDoc {
        let mut doc = KeyValueDoc::new();
        doc.push("command", &self.command)
            .push("version", &self.version)
            .push("seed", self.seed);
        if let (Some(p), Some(h)) = (&self.input, &self.input_sha256) {
            doc.push("input", p.display()).push("input_sha256", h);
        }
        for (k, v) in &self.options {
            doc.push(format!("option.{k}"), v);
        }
        doc
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        self.to_doc().write(&dir.join(MANIFEST_FILE))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc = KeyValueDoc::parse(text)?;
        let field = |k: &str| doc.get(k).with_context(|| format!("manifest lacks `{k}`"));
        let mut m = Self::new(
            field("command")?,
            field("seed")?.parse().context("bad seed")?,
        );
        m.version = field("version")?.to_string();
        m.input = doc.get("input").map(PathBuf::from);
        m.input_sha256 = doc.get("input_sha256").map(str::to_string);
        m.options = doc
            .entries()
            .iter()
            .filter_map(|(k, v)| Some((k.strip_prefix("option.")?.to_string(), v.clone())))
            .collect();
        Ok(m)
    }

    /// Command line that reproduces the run into `out_dir`.
    pub fn argv(&self, out_dir: &Path) -> Vec<OsString> {
        let mut argv: Vec<OsString> = vec!["bellgarch".into(), self.command.clone().into()];
        for (k, v) in &self.options {
            argv.push(format!("--{k}").into());
            if v != "true" {
                argv.push(v.into());
            }
        }
        argv.push("--seed".into());
        argv.push(self.seed.to_string().into());
        argv.push("--out-dir".into());
        argv.push(out_dir.as_os_str().to_owned());
        if let Some(p) = &self.input {
            argv.push(p.as_os_str().to_owned());
        }
        argv
    }

    pub fn verify_input(&self) -> Result<()> {
        if let (Some(p), Some(want)) = (&self.input, &self.input_sha256) {
            let bytes = fs::read(p).with_context(|| format!("cannot read {}", p.display()))?;
            let got = sha256_hex(&bytes);
            if &got != want {
                bail!(
                    "{} changed since the run (sha256 {got}, manifest {want})",
                    p.display()
                );
            }
        }
        Ok(())
    }
}

pub fn rerun(args: &RerunArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.manifest)
        .with_context(|| format!("cannot read {}", args.manifest.display()))
        .or_input()?;
    let manifest = RunManifest::parse(&text).or_input()?;
    manifest.verify_input().or_input()?;
    if manifest.version != env!("CARGO_PKG_VERSION") {
        log::warn!(
            "manifest written by version {}, running {}; outputs may differ",
            manifest.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    let cli = Cli::try_parse_from(manifest.argv(&args.out_dir))
        .map_err(|e| CliError::input(format!("manifest does not form a valid command: {e}")))?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(CliError::input("a manifest cannot describe a rerun"));
    }
    crate::run(&cli)
}
