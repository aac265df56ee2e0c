//! Versioned CSV artifacts. Every file starts with a `# <format> v<N>`
//! comment line followed by a fixed header row, and numeric cells use the
//! shortest round-trip float encoding, so identical runs produce identical
//! bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

pub const CURVE_FORMAT: &str = "# enroute-curve-csv v1";
pub const CURVE_HEADER: &str =
    "episode,score,goals,conflicts,mean_reward,actor_loss,critic_loss,entropy";
pub const TIMING_FORMAT: &str = "# enroute-timing-csv v1";
pub const TIMING_HEADER: &str = "episode,wall_clock_s";
pub const EVAL_CURVE_FORMAT: &str = "# enroute-eval-curve-csv v1";
pub const EVAL_CURVE_HEADER: &str = "episode,mean_score,std_dev,median,resolution_rate";
pub const SCORES_FORMAT: &str = "# enroute-scores-csv v1";
pub const SCORES_HEADER: &str = "episode,score";

pub struct CsvFile {
    writer: BufWriter<File>,
}

impl CsvFile {
    pub fn create(path: &Path, format_line: &str, header: &str) -> Result<Self> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
        }
        let file =
            File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{format_line}")?;
        writeln!(writer, "{header}")?;
        Ok(CsvFile { writer })
    }

    pub fn row(&mut self, line: &str) -> Result<()> {
        writeln!(self.writer, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}
