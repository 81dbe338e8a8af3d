//! CSV sweep tables, SVG scatter plots with the fitted trend line, and the
//! static impact table.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::bench::{fit_records, RegressionFit, SweepRecord};
use crate::error::{Error, Result};
use crate::forest::ModelKind;

pub const CSV_HEADER: &str = "model,param,value,n_done,elapsed_s,est_total_s,at_time_s,slope,intercept,r2";

pub const X_LABEL_TREES: &str = "Number of Estimators (number of trees)";
pub const X_LABEL_ROUNDS: &str = "Number of Estimators (number of boosting rounds)";
pub const Y_LABEL_ATTACK: &str = "Estimated Time for Attacks (seconds)";
pub const Y_LABEL_TRAINING: &str = "Estimated Time for Training (seconds)";

/// Run context stored next to a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub model: ModelKind,
    pub grid: Vec<usize>,
    pub budget_s: Option<f64>,
    pub n_target: Option<usize>,
    pub hardware: String,
    pub seed: u64,
}

/// Sweep records with the fit computed from exactly those records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    meta: TableMeta,
    records: Vec<SweepRecord>,
    fit: Option<RegressionFit>,
}

impl SweepTable {
    pub fn new(meta: TableMeta, records: Vec<SweepRecord>) -> Self {
        let fit = fit_records(&records);
        SweepTable { meta, records, fit }
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    pub fn records(&self) -> &[SweepRecord] {
        &self.records
    }

    pub fn fit(&self) -> Option<&RegressionFit> {
        self.fit.as_ref()
    }
}

/// `%g` with six significant digits.
pub fn format_g6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the sweep CSV and returns the number of bytes written.
pub fn emit_sweep_csv<W: Write>(table: &SweepTable, mut out: W) -> Result<usize> {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    let fit_cols = match &table.fit {
        Some(f) => format!("{},{},{}", format_g6(f.slope), format_g6(f.intercept), format_g6(f.r2)),
        None => ",,".into(),
    };
    for r in &table.records {
        let at = r.at_time.map(format_g6).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.model,
            r.param,
            r.value,
            r.n_done,
            format_g6(r.elapsed),
            format_g6(r.est_total),
            at,
            fit_cols
        );
    }
    out.write_all(s.as_bytes())?;
    out.flush()?;
    Ok(s.len())
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub model: ModelKind,
    pub param: String,
    pub value: usize,
    pub n_done: usize,
    pub elapsed_s: f64,
    pub est_total_s: f64,
    pub at_time_s: Option<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
}

pub fn parse_sweep_csv<R: BufRead>(input: R) -> Result<Vec<CsvRow>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?;
    if header.as_deref() != Some(CSV_HEADER) {
        return Err(Error::parse(1, "missing or unexpected sweep CSV header"));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 10 {
            return Err(Error::parse(line_no, format!("expected 10 columns, found {}", cols.len())));
        }
        let bad = |name: &str| Error::parse(line_no, format!("bad {name} field"));
        let num = |i: usize, name: &str| cols[i].parse::<f64>().map_err(|_| bad(name));
        let opt = |i: usize, name: &str| -> Result<Option<f64>> {
            if cols[i].is_empty() {
                Ok(None)
            } else {
                num(i, name).map(Some)
            }
        };
        rows.push(CsvRow {
            model: cols[0].parse().map_err(|_| bad("model"))?,
            param: cols[1].to_string(),
            value: cols[2].parse().map_err(|_| bad("value"))?,
            n_done: cols[3].parse().map_err(|_| bad("n_done"))?,
            elapsed_s: num(4, "elapsed_s")?,
            est_total_s: num(5, "est_total_s")?,
            at_time_s: opt(6, "at_time_s")?,
            slope: opt(7, "slope")?,
            intercept: opt(8, "intercept")?,
            r2: opt(9, "r2")?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlotKind {
    AttackTime,
    AtTime,
}

impl PlotKind {
    pub fn y_label(self) -> &'static str {
        match self {
            PlotKind::AttackTime => Y_LABEL_ATTACK,
            PlotKind::AtTime => Y_LABEL_TRAINING,
        }
    }
}

pub fn x_label(model: ModelKind) -> &'static str {
    match model {
        ModelKind::RandomForest => X_LABEL_TREES,
        ModelKind::GradientBoosting | ModelKind::Xgb => X_LABEL_ROUNDS,
    }
}

pub const SVG_WIDTH: f64 = 640.0;
pub const SVG_HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// Data ranges and the pixel rectangle they map onto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotFrame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl PlotFrame {
    /// Data point to SVG user coordinates (y grows downward).
    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let w = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let h = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let px = MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * w;
        let py = MARGIN_TOP + h - (y - self.y_min) / (self.y_max - self.y_min) * h;
        (px, py)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    let scale = lo.abs().max(hi.abs());
    if span > 1e-9 * scale {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        let pad = if scale == 0.0 { 1.0 } else { 0.05 * scale };
        (lo - pad, hi + pad)
    }
}

fn y_of(r: &SweepRecord, kind: PlotKind) -> f64 {
    match kind {
        PlotKind::AttackTime => r.est_total,
        PlotKind::AtTime => r.at_time.unwrap_or(r.elapsed),
    }
}

/// Linear axes covering every marker and both fit-line endpoints, padded
/// by 5% of each span.
pub fn plot_frame(table: &SweepTable, kind: PlotKind) -> Result<PlotFrame> {
    if table.records.is_empty() {
        return Err(Error::invalid("cannot plot an empty sweep"));
    }
    let xs = table.records.iter().map(|r| r.value as f64);
    let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let mut ys: Vec<f64> = table.records.iter().map(|r| y_of(r, kind)).collect();
    if let Some(f) = &table.fit {
        ys.push(f.predict(x_lo));
        ys.push(f.predict(x_hi));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::invalid("non-finite value in sweep"));
    }
    let (y_lo, y_hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let (x_min, x_max) = padded(x_lo, x_hi);
    let (y_min, y_max) = padded(y_lo, y_hi);
    Ok(PlotFrame { x_min, x_max, y_min, y_max })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes a standalone SVG: one `<circle>` per record, one `<line>` for
/// the regression fit (when there is one), axes with ticks, labels and a
/// legend. Returns the number of bytes written.
pub fn emit_svg_plot<W: Write>(table: &SweepTable, kind: PlotKind, mut out: W) -> Result<usize> {
    let frame = plot_frame(table, kind)?;
    let model = table.meta.model;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>"#);
    let title = match kind {
        PlotKind::AttackTime => format!("{}: extrapolated attack time", model.short_name().to_uppercase()),
        PlotKind::AtTime => format!("{}: adversarial training time", model.short_name().to_uppercase()),
    };
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#, SVG_WIDTH / 2.0, escape(&title));

    // axes
    let (x0, y0) = frame.map(frame.x_min, frame.y_min);
    let (x1, y1) = frame.map(frame.x_max, frame.y_max);
    let _ = writeln!(s, r#"<path class="axes" d="M {x0:.6} {y1:.6} L {x0:.6} {y0:.6} L {x1:.6} {y0:.6}" fill="none" stroke="black"/>"#);
    let mut ticks = String::new();
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        let (px, _) = frame.map(xv, frame.y_min);
        let (_, py) = frame.map(frame.x_min, yv);
        let _ = write!(ticks, "M {px:.6} {y0:.6} l 0 5 M {x0:.6} {py:.6} l -5 0 ");
        let _ = writeln!(s, r#"<text x="{px:.6}" y="{:.6}" text-anchor="middle">{}</text>"#, y0 + 18.0, format_g6(xv));
        let _ = writeln!(s, r#"<text x="{:.6}" y="{:.6}" text-anchor="end">{}</text>"#, x0 - 8.0, py + 4.0, format_g6(yv));
    }
    let _ = writeln!(s, r#"<path class="ticks" d="{}" stroke="black"/>"#, ticks.trim_end());
    let _ = writeln!(
        s,
        r#"<text class="x-label" x="{:.6}" y="{:.6}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        SVG_HEIGHT - 16.0,
        escape(x_label(model))
    );
    let _ = writeln!(
        s,
        r#"<text class="y-label" x="18" y="{:.6}" text-anchor="middle" transform="rotate(-90 18 {:.6})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(kind.y_label())
    );

    for r in &table.records {
        let (px, py) = frame.map(r.value as f64, y_of(r, kind));
        let _ = writeln!(s, r#"<circle class="marker" cx="{px:.6}" cy="{py:.6}" r="3.5" fill="steelblue"/>"#);
    }

    let lx = x0 + 12.0;
    let ly = y1 + 12.0;
    let _ = writeln!(s, r#"<rect x="{:.6}" y="{:.6}" width="7" height="7" fill="steelblue"/>"#, lx - 3.5, ly - 3.5);
    let _ = writeln!(s, r#"<text x="{:.6}" y="{:.6}">Measured</text>"#, lx + 12.0, ly + 4.0);
    if let Some(f) = &table.fit {
        let x_lo = table.records.iter().map(|r| r.value).min().unwrap_or(0) as f64;
        let x_hi = table.records.iter().map(|r| r.value).max().unwrap_or(0) as f64;
        let (ax, ay) = frame.map(x_lo, f.predict(x_lo));
        let (bx, by) = frame.map(x_hi, f.predict(x_hi));
        let _ = writeln!(s, r#"<line class="fit" x1="{ax:.6}" y1="{ay:.6}" x2="{bx:.6}" y2="{by:.6}" stroke="firebrick" stroke-width="1.5"/>"#);
        let _ = writeln!(s, r#"<path d="M {:.6} {:.6} l 14 0" stroke="firebrick" stroke-width="1.5"/>"#, lx - 7.0, ly + 16.0);
        let _ = writeln!(
            s,
            r#"<text class="legend" x="{:.6}" y="{:.6}">Lin. Reg.: y = {} x + {} (R² = {})</text>"#,
            lx + 12.0,
            ly + 20.0,
            format_g6(f.slope),
            format_g6(f.intercept),
            format_g6(f.r2)
        );
    }
    s.push_str("</svg>\n");
    out.write_all(s.as_bytes())?;
    out.flush()?;
    Ok(s.len())
}

/// One row of the operational impact table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImpactRow {
    pub axis: &'static str,
    pub impact: &'static str,
    pub motivation: &'static str,
}

pub const IMPACT_TABLE: [ImpactRow; 3] = [
    ImpactRow {
        axis: "Detection",
        impact: "VH",
        motivation: "Gain of time to detect/respond to VAPT attempt",
    },
    ImpactRow {
        axis: "Response",
        impact: "VH",
        motivation: "Gain of time to detect/respond to VAPT attempt",
    },
    ImpactRow {
        axis: "Prevention",
        impact: "H",
        motivation: "Improve deterrence",
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImpactFormat {
    Text,
    Csv,
}

/// Renders the impact of ensemble-size choices on the detection, response
/// and prevention axes. Returns the number of bytes written.
pub fn emit_impact_report<W: Write>(format: ImpactFormat, mut out: W) -> Result<usize> {
    let mut s = String::new();
    match format {
        ImpactFormat::Csv => {
            s.push_str("axis,impact,motivation\n");
            for r in IMPACT_TABLE {
                let _ = writeln!(s, "{},{},{}", r.axis, r.impact, r.motivation);
            }
        }
        ImpactFormat::Text => {
            let _ = writeln!(s, "{:<12}{:<8}Motivation", "Axis", "Impact");
            for r in IMPACT_TABLE {
                let _ = writeln!(s, "{:<12}{:<8}{}", r.axis, r.impact, r.motivation);
            }
            s.push_str("\nVH = very high, H = high\n");
        }
    }
    out.write_all(s.as_bytes())?;
    out.flush()?;
    Ok(s.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(value: usize, y: f64) -> SweepRecord {
        SweepRecord {
            model: ModelKind::RandomForest,
            param: "n_trees".into(),
            value,
            n_done: 10,
            elapsed: 2.0,
            est_total: y,
            at_time: None,
        }
    }

    fn meta() -> TableMeta {
        TableMeta {
            model: ModelKind::RandomForest,
            grid: vec![5, 10],
            budget_s: Some(2.0),
            n_target: Some(92270),
            hardware: "test".into(),
            seed: 42,
        }
    }

    #[test]
    fn g6_formatting() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (92270.0, "92270"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (1.0 / 3.0, "0.333333"),
            (-2.5, "-2.5"),
            (999999.5, "1e+06"),
            (f64::NAN, "nan"),
        ];
        for (v, want) in cases {
            assert_eq!(format_g6(v), want, "{v}");
        }
    }

    #[test]
    fn near_flat_series_gets_a_readable_frame() {
        let y = 13840.5;
        let t = SweepTable::new(meta(), vec![record(2, y), record(4, y * (1.0 + 1e-15)), record(6, y)]);
        let f = plot_frame(&t, PlotKind::AttackTime).unwrap();
        assert!(f.y_min < y && f.y_max > y);
        assert!(f.y_max - f.y_min > 1000.0, "{f:?}");
    }

    #[test]
    fn csv_line_counts() {
        let empty = SweepTable::new(meta(), vec![]);
        let mut buf = Vec::new();
        emit_sweep_csv(&empty, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));

        let one = SweepTable::new(meta(), vec![record(5, 10.0)]);
        let mut buf = Vec::new();
        let n = emit_sweep_csv(&one, &mut buf).unwrap();
        assert_eq!(n, buf.len());
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(!text.contains('\r'));
        assert!(text.ends_with("rf,n_trees,5,10,2,10,,,,\n"), "{text}");
    }

    #[test]
    fn csv_round_trip() {
        let t = SweepTable::new(meta(), vec![record(5, 1234.5678), record(10, 2469.13)]);
        let mut buf = Vec::new();
        emit_sweep_csv(&t, &mut buf).unwrap();
        let rows = parse_sweep_csv(&buf[..]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].value, 5);
        assert!((rows[0].est_total_s - 1234.57).abs() < 1e-9);
        let f = t.fit().unwrap();
        assert!((rows[1].slope.unwrap() - f.slope).abs() <= 1e-5 * f.slope.abs());
        assert_eq!(rows[0].at_time_s, None);
    }

    #[test]
    fn svg_counts_and_labels() {
        let t = SweepTable::new(meta(), vec![record(5, 10.0), record(10, 20.0)]);
        let mut buf = Vec::new();
        emit_svg_plot(&t, PlotKind::AttackTime, &mut buf).unwrap();
        let svg = String::from_utf8(buf).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.contains(">Estimated Time for Attacks (seconds)</text>"));
        assert!(svg.contains(">Number of Estimators (number of trees)</text>"));
        assert!(svg.contains("Lin. Reg."));

        let mut buf = Vec::new();
        emit_svg_plot(&t, PlotKind::AtTime, &mut buf).unwrap();
        let svg = String::from_utf8(buf).unwrap();
        assert!(svg.contains(">Estimated Time for Training (seconds)</text>"));
    }

    #[test]
    fn svg_rejects_empty() {
        let t = SweepTable::new(meta(), vec![]);
        assert!(emit_svg_plot(&t, PlotKind::AttackTime, Vec::new()).is_err());
    }

    #[test]
    fn impact_table() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        emit_impact_report(ImpactFormat::Csv, &mut a).unwrap();
        emit_impact_report(ImpactFormat::Csv, &mut b).unwrap();
        assert_eq!(a, b);
        let csv = String::from_utf8(a).unwrap();
        assert!(csv.contains("Prevention,H,Improve deterrence"));
        assert!(csv.contains("Detection,VH,Gain of time to detect"));
        assert!(csv.contains("Response,VH,Gain of time to detect"));
        let mut t = Vec::new();
        emit_impact_report(ImpactFormat::Text, &mut t).unwrap();
        assert!(String::from_utf8(t).unwrap().contains("Improve deterrence"));
    }
}
