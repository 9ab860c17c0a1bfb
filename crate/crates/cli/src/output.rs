//! Files written by a run: the snapshot log, the metrics table, the
//! trajectory plot and the manifest.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use otexplore_core::density::Domain;
use otexplore_core::sim::RunHeader;
use otexplore_core::{Point2, RunMetrics, SnapshotRecord, Target};
use serde::{Deserialize, Serialize};

/// One line of a snapshot log. A log is a header, its snapshots in step
/// order, and optionally the run's metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogLine {
    Header(RunHeader),
    Snapshot(SnapshotRecord),
    Metrics(RunMetrics),
}

pub fn write_line<W: Write>(out: &mut W, line: &LogLine) -> io::Result<()> {
    serde_json::to_writer(&mut *out, line)?;
    out.write_all(b"\n")
}

/// A snapshot log read back into memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotLog {
    pub header: RunHeader,
    pub records: Vec<SnapshotRecord>,
    pub metrics: Option<RunMetrics>,
}

/// Reads a log, rejecting anything out of place. The error names the
/// 1-based line number.
pub fn read_log<R: BufRead>(input: R) -> Result<SnapshotLog, (usize, String)> {
    let mut header = None;
    let mut records = Vec::new();
    let mut metrics = None;
    for (i, line) in input.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| (n, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if metrics.is_some() {
            return Err((n, "content after the metrics line".into()));
        }
        match serde_json::from_str::<LogLine>(&line).map_err(|e| (n, e.to_string()))? {
            LogLine::Header(h) if header.is_none() => header = Some(h),
            LogLine::Header(_) => return Err((n, "second header".into())),
            _ if header.is_none() => return Err((n, "log does not start with a header".into())),
            LogLine::Snapshot(r) => records.push(r),
            LogLine::Metrics(m) => metrics = Some(m),
        }
    }
    let header = header.ok_or((0, "empty log".to_string()))?;
    Ok(SnapshotLog { header, records, metrics })
}

/// Row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub mode: String,
    pub termination_step: u64,
    /// Empty when the run had no targets.
    pub detection_rate: Option<f64>,
    pub final_wub: f64,
    pub initial_wub: f64,
    pub wall_ms: f64,
}

impl MetricsRow {
    pub fn new(m: &RunMetrics, wall_ms: f64) -> Self {
        Self {
            seed: m.seed,
            mode: m.mode.as_str().to_string(),
            termination_step: m.termination_step,
            detection_rate: m.detection_rate,
            final_wub: m.final_wub,
            initial_wub: m.initial_wub,
            wall_ms,
        }
    }
}

pub fn write_metrics<W: Write>(out: W, rows: &[MetricsRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_sha256: String,
    pub mode: String,
    pub seeds: Vec<u64>,
    /// Paths relative to the output directory.
    pub files: Vec<String>,
}

const AGENT_COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Renders agent paths over the sample ensemble and targets.
///
/// Sample points are drawn with opacity proportional to their initial
/// weight; targets are green once detected and red otherwise.
pub fn trajectories_svg(domain: &Domain, samples: &[Point2], targets: &[Target], paths: &[&[Point2]]) -> String {
    const WIDTH: f64 = 900.0;
    let scale = WIDTH / domain.width();
    let height = domain.height() * scale;
    let px = |p: Point2| ((p.x - domain.x[0]) * scale, (domain.y[1] - p.y) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.1} {height:.1}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white" stroke="black"/>"#);
    let _ = writeln!(s, r##"<g fill="#555" fill-opacity="0.35">"##);
    for p in samples {
        let (x, y) = px(*p);
        let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="1.2"/>"#);
    }
    let _ = writeln!(s, "</g>");
    for t in targets {
        let (x, y) = px(t.position);
        let color = if t.detected() { "#2ca02c" } else { "#d62728" };
        let _ = writeln!(
            s,
            r#"<path d="M{:.1} {:.1}L{:.1} {:.1}M{:.1} {:.1}L{:.1} {:.1}" stroke="{color}" stroke-width="1"/>"#,
            x - 3.0,
            y - 3.0,
            x + 3.0,
            y + 3.0,
            x - 3.0,
            y + 3.0,
            x + 3.0,
            y - 3.0
        );
    }
    for (k, path) in paths.iter().enumerate() {
        let color = AGENT_COLORS[k % AGENT_COLORS.len()];
        let pts: Vec<String> = path.iter().map(|p| {
            let (x, y) = px(*p);
            format!("{x:.1},{y:.1}")
        })
        .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
        if let Some(start) = path.first() {
            let (x, y) = px(*start);
            let _ = writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="8" height="8" fill="{color}"/>"#, x - 4.0, y - 4.0);
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use otexplore_core::sim::run_scenario;
    use otexplore_core::{GaussianMixture, Mode, ScenarioConfig};

    fn small() -> ScenarioConfig {
        let mix = GaussianMixture::new([(1.0, Point2::new(50.0, 50.0), [200.0, 0.0, 0.0, 200.0])]).unwrap();
        let domain = Domain::new([0.0, 100.0], [0.0, 100.0]).unwrap();
        let mut cfg = ScenarioConfig::new(Mode::Centralized, domain, mix, 40, 10, 2, 10.0);
        cfg.n_targets = 5;
        cfg.snapshot_every = 2;
        cfg
    }

    #[test]
    fn log_round_trips() {
        let (header, records, metrics) = run_scenario(small()).unwrap();
        let mut buf = Vec::new();
        write_line(&mut buf, &LogLine::Header(header.clone())).unwrap();
        for r in &records {
            write_line(&mut buf, &LogLine::Snapshot(r.clone())).unwrap();
        }
        write_line(&mut buf, &LogLine::Metrics(metrics.clone())).unwrap();
        let log = read_log(buf.as_slice()).unwrap();
        assert_eq!(log.header, header);
        assert_eq!(log.records, records);
        assert_eq!(log.metrics, Some(metrics));
    }

    #[test]
    fn malformed_logs_report_lines() {
        assert_eq!(read_log("".as_bytes()).unwrap_err().0, 0);
        assert_eq!(read_log("{\"kind\":\"snapshot\"}\n".as_bytes()).unwrap_err().0, 1);
        let (header, ..) = run_scenario(small()).unwrap();
        let mut buf = Vec::new();
        write_line(&mut buf, &LogLine::Header(header)).unwrap();
        buf.extend_from_slice(b"{not json\n");
        assert_eq!(read_log(buf.as_slice()).unwrap_err().0, 2);
    }

    #[test]
    fn missing_rate_is_an_empty_cell() {
        let (_, _, mut m) = run_scenario(small()).unwrap();
        m.detection_rate = None;
        let mut buf = Vec::new();
        write_metrics(&mut buf, &[MetricsRow::new(&m, 1.5)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "seed,mode,termination_step,detection_rate,final_wub,initial_wub,wall_ms");
        assert!(lines.next().unwrap().starts_with("0,centralized,5,,"));
    }

    #[test]
    fn svg_has_one_polyline_per_agent() {
        let d = Domain::new([0.0, 10.0], [0.0, 5.0]).unwrap();
        let a = [Point2::new(0.0, 0.0), Point2::new(10.0, 5.0)];
        let svg = trajectories_svg(&d, &[Point2::new(5.0, 2.5)], &[], &[&a, &a[..1]]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(r#"points="0.0,450.0 900.0,0.0""#));
    }
}
