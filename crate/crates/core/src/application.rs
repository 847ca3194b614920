//! The CIT-07 islet transplantation case study: canned aggregate counts,
//! an all-method forest table, and its CSV and SVG renderings.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::clopper_pearson_lower_one_sided;
use crate::io::{to_csv, write_atomic};
use crate::methods::{Estimator, MethodId, TrialData};

/// Aggregate counts of a published endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedDataset {
    pub name: String,
    pub data: TrialData,
    pub source_note: String,
}

/// Year-1 primary endpoint: 42 successes, 3 failures, 3 missing of 48.
pub fn cit07_year1() -> NamedDataset {
    NamedDataset {
        name: "cit07-year1".into(),
        data: TrialData::new(42, 3, 3).expect("valid counts"),
        source_note: "CIT-07 year-1 primary endpoint; 48 subjects transplanted".into(),
    }
}

/// Year-2 endpoint: 34 successes, 8 failures, 6 missing of 48.
pub fn cit07_year2() -> NamedDataset {
    NamedDataset {
        name: "cit07-year2".into(),
        data: TrialData::new(34, 8, 6).expect("valid counts"),
        source_note: "CIT-07 year-2 endpoint; 48 subjects transplanted".into(),
    }
}

/// Look up a canned dataset by endpoint name (`year1` or `year2`).
pub fn cit07(endpoint: &str) -> Result<NamedDataset> {
    match endpoint {
        "year1" => Ok(cit07_year1()),
        "year2" => Ok(cit07_year2()),
        _ => Err(Error::Parse(format!("unknown CIT-07 endpoint {endpoint:?}; expected year1 or year2"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestRow {
    pub method: MethodId,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Run `methods` on the dataset, each on its own seeded stream, keeping the
/// given order.
pub fn forest_table(dataset: &NamedDataset, methods: &[MethodId], estimator: &Estimator) -> Result<Vec<ForestRow>> {
    methods
        .iter()
        .map(|&method| {
            let ci = estimator.estimate_seeded(method, &dataset.data)?;
            Ok(ForestRow { method, estimate: ci.estimate(), lower: ci.lower(), upper: ci.upper() })
        })
        .collect()
}

/// One-sided exact lower bound with every missing subject counted as a failure.
pub fn impute_failure_one_sided_lower(dataset: &NamedDataset, alpha: f64) -> Result<f64> {
    clopper_pearson_lower_one_sided(dataset.data.y_obs(), dataset.data.n(), alpha)
}

pub fn forest_csv(rows: &[ForestRow]) -> Result<Vec<u8>> {
    to_csv(rows)
}

/// Self-contained SVG: one line per method with a whisker from lower to
/// upper and a square at the estimate. The axis spans [0, 1] widened to
/// include any bound outside it.
pub fn forest_svg(title: &str, rows: &[ForestRow]) -> String {
    const LABEL_W: f64 = 230.0;
    const PLOT_W: f64 = 420.0;
    const ROW_H: f64 = 28.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 50.0;

    let lo = rows.iter().map(|r| r.lower).fold(0.0, f64::min);
    let hi = rows.iter().map(|r| r.upper).fold(1.0, f64::max);
    let x = |v: f64| LABEL_W + (v - lo) / (hi - lo) * PLOT_W;
    let height = TOP + ROW_H * rows.len() as f64 + BOTTOM;
    let width = LABEL_W + PLOT_W + 30.0;
    let axis_y = TOP + ROW_H * rows.len() as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#, width / 2.0, escape(title));
    for (i, r) in rows.iter().enumerate() {
        let y = TOP + ROW_H * (i as f64 + 0.5);
        let _ =
            writeln!(s, r#"<text x="8" y="{:.1}" dominant-baseline="middle">{}</text>"#, y, escape(r.method.label()));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.1}" x2="{:.2}" y2="{y:.1}" stroke="black" stroke-width="1.5"/>"#,
            x(r.lower),
            x(r.upper)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.1}" width="8" height="8" fill="black"/>"#,
            x(r.estimate) - 4.0,
            y - 4.0
        );
    }
    let _ =
        writeln!(s, r#"<line x1="{LABEL_W}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="black"/>"#, LABEL_W + PLOT_W);
    let first_tick = (lo * 10.0).ceil() as i64;
    let last_tick = (hi * 10.0).floor() as i64;
    for t in first_tick..=last_tick {
        let v = t as f64 / 10.0;
        let _ =
            writeln!(s, r#"<line x1="{0:.2}" y1="{axis_y}" x2="{0:.2}" y2="{1}" stroke="black"/>"#, x(v), axis_y + 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{v:.1}</text>"#, x(v), axis_y + 18.0);
    }
    let _ = writeln!(
        s,
        r##"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{axis_y}" stroke="#888" stroke-dasharray="4 3"/>"##,
        x(1.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Proportion</text>"#,
        LABEL_W + PLOT_W / 2.0,
        axis_y + 38.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Write `<prefix>.csv` and `<prefix>.svg` atomically; returns both paths.
pub fn write_forest(
    prefix: &Path,
    title: &str,
    rows: &[ForestRow],
) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let with_ext = |ext: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(ext);
        std::path::PathBuf::from(p)
    };
    let (csv_path, svg_path) = (with_ext(".csv"), with_ext(".svg"));
    write_atomic(&csv_path, &forest_csv(rows)?)?;
    write_atomic(&svg_path, forest_svg(title, rows).as_bytes())?;
    Ok((csv_path, svg_path))
}
