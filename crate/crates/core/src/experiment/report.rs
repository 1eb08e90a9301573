//! CSV, JSON and SVG outputs of a suite run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Condition, RunRecord};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no records to report")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Paths written by [`emit_reports`], in writing order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportFiles {
    pub written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct TableRow<'a> {
    case: &'a str,
    condition: &'static str,
    formulation: &'static str,
    status: &'a str,
    objective_cost: Option<f64>,
    ob_ac: Option<f64>,
    ref_source: Option<&'static str>,
    acceptance_mode: &'static str,
    gap_percent: Option<f64>,
    eps_theta: Option<f64>,
    beta_eps_theta: Option<f64>,
    cycle_max_abs_sum: Option<f64>,
    pf_converged: Option<bool>,
    violations: Option<usize>,
}

#[derive(Serialize)]
struct DeltaVRow<'a> {
    case: &'a str,
    condition: &'static str,
    formulation: &'static str,
    bus: usize,
    vm_socp: f64,
    vm_ac: f64,
    delta_v: f64,
}

#[derive(Serialize)]
struct CycleRow<'a> {
    case: &'a str,
    condition: &'static str,
    cycle_id: usize,
    bus_sequence: &'a str,
    sum_rad: f64,
    formulation: &'static str,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, ReportError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

/// Writes `table1.csv`, `delta_v.csv` (when any record has a reference
/// voltage profile), `cycle_sums.csv`, `runs.json` and one SVG bar chart
/// per case and figure into `out_dir`.
///
/// The CSV files depend only on solver output, so identical runs give
/// identical bytes; timings go to `runs.json` only.
pub fn emit_reports(records: &[RunRecord], out_dir: &Path) -> Result<ReportFiles, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut files = ReportFiles::default();

    let path = out_dir.join("table1.csv");
    let mut w = csv_writer(&path)?;
    for r in records {
        w.serialize(TableRow {
            case: &r.case,
            condition: r.condition.label(),
            formulation: r.formulation.label(),
            status: &r.status,
            objective_cost: r.objective_cost,
            ob_ac: r.ob_ac,
            ref_source: r.ref_source.map(|s| s.label()),
            acceptance_mode: r.acceptance_mode(),
            gap_percent: r.gap_percent,
            eps_theta: r.eps_theta,
            beta_eps_theta: r.penalty,
            cycle_max_abs_sum: r.cycle_max_abs_sum,
            pf_converged: r.pf_converged,
            violations: r.violations.as_ref().map(Vec::len),
        })?;
    }
    w.flush().map_err(io_err(&path))?;
    files.written.push(path);

    let with_vm: Vec<&RunRecord> = records
        .iter()
        .filter(|r| matches!(&r.ref_vm, Some(v) if v.len() == r.vm.len() && !r.vm.is_empty()))
        .collect();
    if with_vm.is_empty() {
        log::info!("no reference voltage profile supplied; delta_v.csv not written");
    } else {
        let path = out_dir.join("delta_v.csv");
        let mut w = csv_writer(&path)?;
        for r in &with_vm {
            let vm_ac = r.ref_vm.as_ref().expect("filtered");
            for (i, (&s, &a)) in r.vm.iter().zip(vm_ac).enumerate() {
                w.serialize(DeltaVRow {
                    case: &r.case,
                    condition: r.condition.label(),
                    formulation: r.formulation.label(),
                    bus: i + 1,
                    vm_socp: s,
                    vm_ac: a,
                    delta_v: s - a,
                })?;
            }
        }
        w.flush().map_err(io_err(&path))?;
        files.written.push(path);
    }

    let path = out_dir.join("cycle_sums.csv");
    write_cycle_csv(records, &path)?;
    files.written.push(path);

    let path = out_dir.join("runs.json");
    let json = serde_json::to_string_pretty(records).expect("records serialize");
    std::fs::write(&path, json).map_err(io_err(&path))?;
    files.written.push(path);

    for ((case, cond), group) in group_by_case(records) {
        let stem = format!("{case}_{}", cond.label());
        let series: Vec<(String, Vec<f64>)> = group
            .iter()
            .filter(|r| matches!(&r.ref_vm, Some(v) if v.len() == r.vm.len() && !r.vm.is_empty()))
            .map(|r| {
                let vm_ac = r.ref_vm.as_ref().expect("filtered");
                let d = r.vm.iter().zip(vm_ac).map(|(s, a)| s - a).collect();
                (r.formulation.label().to_string(), d)
            })
            .collect();
        if let Some((_, first)) = series.first() {
            let labels: Vec<String> = (1..=first.len()).map(|i| i.to_string()).collect();
            let svg = bar_chart(&format!("V_socp - V_ac, {stem}"), "bus", &labels, &series);
            let path = out_dir.join(format!("fig1_delta_v_{stem}.svg"));
            std::fs::write(&path, svg).map_err(io_err(&path))?;
            files.written.push(path);
        }

        let with_cycles: Vec<&&RunRecord> = group.iter().filter(|r| !r.cycles.is_empty()).collect();
        if let Some(first) = with_cycles.first() {
            let labels: Vec<String> = first.cycles.iter().map(|c| c.label.clone()).collect();
            let series: Vec<(String, Vec<f64>)> = with_cycles
                .iter()
                .map(|r| {
                    let v = r.cycles.iter().map(|c| c.sum_rad).collect();
                    (r.formulation.label().to_string(), v)
                })
                .collect();
            let svg = bar_chart(&format!("cycle angle sums (rad), {stem}"), "cycle", &labels, &series);
            let path = out_dir.join(format!("fig2_cycle_sums_{stem}.svg"));
            std::fs::write(&path, svg).map_err(io_err(&path))?;
            files.written.push(path);
        }
    }
    Ok(files)
}

/// Per-cycle sums as CSV: case, condition, cycle_id, bus_sequence, sum_rad, formulation.
pub fn write_cycle_csv(records: &[RunRecord], path: &Path) -> Result<(), ReportError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut w = csv_writer(path)?;
    for r in records {
        for (k, c) in r.cycles.iter().enumerate() {
            w.serialize(CycleRow {
                case: &r.case,
                condition: r.condition.label(),
                cycle_id: k + 1,
                bus_sequence: &c.label,
                sum_rad: c.sum_rad,
                formulation: r.formulation.label(),
            })?;
        }
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn group_by_case(records: &[RunRecord]) -> BTreeMap<(&str, Condition), Vec<&RunRecord>> {
    let mut out: BTreeMap<(&str, Condition), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        out.entry((r.case.as_str(), r.condition)).or_default().push(r);
    }
    out
}

const COLORS: [&str; 4] = ["#4472c4", "#ed7d31", "#70ad47", "#7f7f7f"];

/// Grouped bar chart, one group per label and one bar per series.
fn bar_chart(title: &str, x_name: &str, labels: &[String], series: &[(String, Vec<f64>)]) -> String {
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 90.0);
    let group_w = (12.0 * series.len() as f64 + 8.0).max(18.0);
    let plot_w = group_w * labels.len().max(1) as f64;
    let plot_h = 260.0;
    let width = left + plot_w + right;
    let height = top + plot_h + bottom;

    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for (_, v) in series {
        for &x in v {
            if x.is_finite() {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    if hi - lo <= 0.0 {
        hi = lo + 1.0;
    }
    let y = |v: f64| top + (hi - v) / (hi - lo) * plot_h;
    let bar_w = (group_w - 8.0) / series.len().max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{left}" y="20" font-size="13">{}</text>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="black"/>"#,
        y(0.0),
        left + plot_w
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{:.2}" stroke="black"/>"#,
        top + plot_h
    );
    for v in [lo, hi] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3e}</text>"#,
            left - 4.0,
            y(v) + 4.0
        );
    }
    for (g, label) in labels.iter().enumerate() {
        let x0 = left + g as f64 * group_w + 4.0;
        for (k, (_, vals)) in series.iter().enumerate() {
            let v = vals.get(g).copied().unwrap_or(0.0);
            if !v.is_finite() {
                continue;
            }
            let (y0, y1) = (y(v.max(0.0)), y(v.min(0.0)));
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{y0:.2}" width="{bar_w:.2}" height="{:.2}" fill="{}"/>"#,
                x0 + k as f64 * bar_w,
                (y1 - y0).max(0.5),
                COLORS[k % COLORS.len()]
            );
        }
        let lx = x0 + (group_w - 8.0) / 2.0;
        let ly = top + plot_h + 10.0;
        let _ = writeln!(
            s,
            r#"<text x="{lx:.2}" y="{ly:.2}" transform="rotate(60 {lx:.2} {ly:.2})">{}</text>"#,
            escape(label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + plot_w / 2.0,
        height - 6.0,
        escape(x_name)
    );
    for (k, (name, _)) in series.iter().enumerate() {
        let lx = left + 10.0 + 90.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="26" width="10" height="10" fill="{}"/><text x="{:.2}" y="35">{}</text>"#,
            COLORS[k % COLORS.len()],
            lx + 14.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
