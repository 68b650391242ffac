//! CSV and manifest writers. Layouts are fixed; see the README for columns.

use std::fs;
use std::path::{Path, PathBuf};

use lenssplit::{BlowUpEvent, ExperimentRecord, Observable, Snapshot};

use crate::HarnessError;

/// Shortest round-trip decimal; scientific notation outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Collects the files written by one command, in order.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(root).map_err(|e| io_error(root, e))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), HarnessError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.root.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(header).map_err(|e| csv_error(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| io_error(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), HarnessError> {
        let path = self.root.join(name);
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// `series_<observable>.csv`: `step,t,s,value`.
    pub fn write_series(&mut self, record: &ExperimentRecord, observers: &[Observable]) -> Result<(), HarnessError> {
        for obs in observers {
            let rows = record
                .series
                .iter()
                .filter(|r| r.observable == *obs)
                .map(|r| vec![r.step.to_string(), fmt_f64(r.t), fmt_f64(r.s), fmt_f64(r.value)]);
            self.write_csv(&format!("series_{}.csv", obs.name()), &["step", "t", "s", "value"], rows)?;
        }
        Ok(())
    }

    /// `snapshot_u_<k>.csv` (`t,x,re,im,abs`), `snapshot_field_<k>.csv`
    /// (`s,y,re,im,abs`) and the index `snapshots.csv`.
    pub fn write_snapshots(&mut self, record: &ExperimentRecord, stride: usize) -> Result<(), HarnessError> {
        let mut index = Vec::new();
        let groups = [("u", ["t", "x"], &record.snapshots_u), ("field", ["s", "y"], &record.snapshots_field)];
        for (kind, [time_col, coord_col], snaps) in groups {
            for (k, snap) in snaps.iter().enumerate() {
                let name = format!("snapshot_{kind}_{k:04}.csv");
                self.write_csv(&name, &[time_col, coord_col, "re", "im", "abs"], snapshot_rows(snap, stride))?;
                index.push(vec![k.to_string(), kind.to_string(), fmt_f64(snap.time), name]);
            }
        }
        self.write_csv("snapshots.csv", &["index", "kind", "time", "file"], index)
    }

    /// `events.csv`: one `blowup` row when the gradient monitor fired.
    pub fn write_events(&mut self, blowup: Option<&BlowUpEvent>) -> Result<(), HarnessError> {
        let rows = blowup.map(|e| {
            vec![
                "blowup".to_string(),
                e.step.to_string(),
                fmt_f64(e.t_lo),
                fmt_f64(e.t_hi),
                fmt_f64(e.s_lo),
                fmt_f64(e.s_hi),
                fmt_f64(e.grad_norm),
                fmt_f64(e.threshold),
            ]
        });
        self.write_csv("events.csv", &["event", "step", "t_lo", "t_hi", "s_lo", "s_hi", "grad_norm", "threshold"], rows)
    }

    /// `manifest.txt`: `key = value` lines, the file list, then the resolved
    /// configuration. Contains nothing run-dependent beyond the results.
    pub fn write_manifest(
        &mut self,
        entries: &[(String, String)],
        config_toml: Option<&str>,
    ) -> Result<(), HarnessError> {
        let mut text = String::new();
        for (k, v) in entries {
            text.push_str(&format!("{k} = {v}\n"));
        }
        let mut files = self.written.clone();
        files.push("manifest.txt".into());
        text.push_str(&format!("files = {}\n", files.join(", ")));
        if let Some(cfg) = config_toml {
            text.push_str("\n# resolved configuration\n");
            text.push_str(cfg);
        }
        self.write_text("manifest.txt", &text)
    }
}

fn snapshot_rows(snap: &Snapshot, stride: usize) -> impl Iterator<Item = Vec<String>> + '_ {
    let time = fmt_f64(snap.time);
    snap.coords
        .iter()
        .zip(&snap.values)
        .step_by(stride.max(1))
        .map(move |(x, v)| vec![time.clone(), fmt_f64(*x), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(v.norm())])
}

fn io_error(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, -2.5, 0.1, 1e-5, 9.999e15, 1e16, 1.5e-7, -3.25e-300, f64::MAX, 2.5e-4, 123456.789] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(1e-7), "1e-7");
        assert_eq!(fmt_f64(1e16), "1e16");
        assert_eq!(fmt_f64(2.0), "2");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }
}
