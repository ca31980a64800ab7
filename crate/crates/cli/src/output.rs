//! CSV and manifest writing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use bootstrap_bandits::sim::AggregateTrace;
use bootstrap_bandits::Result;

/// Formats a float with 10 significant digits, locale-independent.
fn sig10(v: f64) -> String {
    format!("{v:.9e}")
}

/// Writes one CSV with a series per policy:
/// `round,policy,mean,stderr`, rounds 1-based.
pub fn write_trace_csv(path: &Path, series: &[(String, AggregateTrace)]) -> Result<()> {
    let mut buf = String::from("round,policy,mean,stderr\n");
    for (name, trace) in series {
        for (i, (m, s)) in trace.mean.iter().zip(&trace.stderr).enumerate() {
            buf.push_str(&format!("{},{name},{},{}\n", i + 1, sig10(*m), sig10(*s)));
        }
    }
    atomic_write(path, buf.as_bytes())
}

/// Run manifest: enough to reproduce and audit a run. Written atomically
/// next to the outputs.
pub struct Manifest<'a> {
    pub seed: u64,
    pub duration: Duration,
    pub outputs: Vec<PathBuf>,
    pub config_text: &'a str,
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let version = format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
    let outputs: Vec<String> = manifest
        .outputs
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    let mut buf = String::new();
    buf.push_str(&format!("version = {:?}\n", version));
    buf.push_str(&format!("master_seed = {}\n", manifest.seed));
    buf.push_str(&format!(
        "duration_seconds = {:.3}\n",
        manifest.duration.as_secs_f64()
    ));
    buf.push_str(&format!("outputs = {:?}\n", outputs));
    buf.push_str(&format!("\nconfig = '''\n{}'''\n", manifest.config_text));
    atomic_write(&dir.join("manifest.toml"), buf.as_bytes())
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
