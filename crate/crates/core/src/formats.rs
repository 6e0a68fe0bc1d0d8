//! Text formats for entropy tables, adjacency matrices, contours and state dumps.
//!
//! Numbers are written with 12 significant digits, so a table that has been
//! written once reads back and re-serializes to identical bytes.

use serde::{Deserialize, Serialize};

use crate::contour::ContourVector;
use crate::eamfit::EntanglementAdjacency;
use crate::entropy::EntropyTable;
use crate::states::PureState;
use crate::{Error, Result};

/// Shortest `%.12g`-style rendering of `x`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (11 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_owned()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to the value its 12-digit rendering parses back to.
pub fn round_sig(x: f64) -> f64 {
    format_sig(x).parse().unwrap_or(x)
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.strip_prefix('#')?
        .trim()
        .strip_prefix(key)?
        .strip_prefix('=')
}

fn parse_err(line_no: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {}: {msg}", line_no + 1))
}

/// Comment lines shared by every CSV writer.
fn comment_block(pairs: &[(&str, String)], timestamp: Option<&str>) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(&format!("# {k}={v}\n"));
    }
    if let Some(ts) = timestamp {
        out.push_str(&format!("# timestamp={ts}\n"));
    }
    out
}

pub fn entropy_table_to_csv(table: &EntropyTable, timestamp: Option<&str>) -> String {
    let mut out = comment_block(
        &[
            ("n_sites", table.n_sites().to_string()),
            ("engine", table.engine().to_owned()),
            ("model", table.model().to_owned()),
        ],
        timestamp,
    );
    out.push_str("mask_decimal,popcount,entropy_nats\n");
    for (m, s) in table.entropies().iter().enumerate() {
        out.push_str(&format!("{m},{},{}\n", m.count_ones(), format_sig(*s)));
    }
    out
}

pub fn entropy_table_from_csv(text: &str) -> Result<EntropyTable> {
    let mut n_sites = None;
    let mut engine = String::new();
    let mut model = String::new();
    let mut entropies = Vec::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(v) = header_value(line, "n_sites") {
                n_sites = Some(v.parse::<usize>().map_err(|e| parse_err(line_no, e))?);
            } else if let Some(v) = header_value(line, "engine") {
                engine = v.to_owned();
            } else if let Some(v) = header_value(line, "model") {
                model = v.to_owned();
            }
            continue;
        }
        if line.starts_with(|c: char| c.is_ascii_alphabetic()) {
            continue; // column header
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(
                line_no,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        }
        let mask: usize = fields[0].parse().map_err(|e| parse_err(line_no, e))?;
        let popcount: u32 = fields[1].parse().map_err(|e| parse_err(line_no, e))?;
        let entropy: f64 = fields[2].parse().map_err(|e| parse_err(line_no, e))?;
        if mask != entropies.len() {
            return Err(parse_err(
                line_no,
                format!("mask {mask} out of order (expected {})", entropies.len()),
            ));
        }
        if popcount != mask.count_ones() {
            return Err(parse_err(
                line_no,
                format!("popcount {popcount} wrong for mask {mask}"),
            ));
        }
        entropies.push(entropy);
    }
    let n = n_sites.ok_or_else(|| Error::Parse("missing '# n_sites=' header".into()))?;
    EntropyTable::new(n, entropies, &engine, &model)
}

#[derive(Debug, Serialize, Deserialize)]
struct EntropyRow {
    mask: u64,
    popcount: u32,
    entropy_nats: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct EntropyTableJson {
    n_sites: usize,
    engine: String,
    model: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    timestamp: Option<String>,
    rows: Vec<EntropyRow>,
}

pub fn entropy_table_to_json(table: &EntropyTable, timestamp: Option<&str>) -> String {
    let doc = EntropyTableJson {
        n_sites: table.n_sites(),
        engine: table.engine().to_owned(),
        model: table.model().to_owned(),
        timestamp: timestamp.map(str::to_owned),
        rows: table
            .entropies()
            .iter()
            .enumerate()
            .map(|(m, s)| EntropyRow {
                mask: m as u64,
                popcount: m.count_ones(),
                entropy_nats: round_sig(*s),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

pub fn entropy_table_from_json(text: &str) -> Result<EntropyTable> {
    let doc: EntropyTableJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    for (k, row) in doc.rows.iter().enumerate() {
        if row.mask != k as u64 || row.popcount != row.mask.count_ones() {
            return Err(Error::Parse(format!(
                "row {k} has mask {} / popcount {}",
                row.mask, row.popcount
            )));
        }
    }
    let entropies = doc.rows.iter().map(|r| r.entropy_nats).collect();
    EntropyTable::new(doc.n_sites, entropies, &doc.engine, &doc.model)
}

/// Reads either table format, choosing by the first non-blank character.
pub fn entropy_table_from_str(text: &str) -> Result<EntropyTable> {
    if text.trim_start().starts_with('{') {
        entropy_table_from_json(text)
    } else {
        entropy_table_from_csv(text)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct EamJson {
    n_sites: usize,
    s0: Option<f64>,
    links: Vec<(usize, usize, f64)>,
}

pub fn eam_to_json(eam: &EntanglementAdjacency) -> String {
    serde_json::to_string_pretty(&eam_json_value(eam)).expect("serializable") + "\n"
}

/// The EAM document as a JSON value, for embedding in larger reports.
pub fn eam_json_value(eam: &EntanglementAdjacency) -> serde_json::Value {
    let doc = EamJson {
        n_sites: eam.n_sites(),
        s0: eam.s0().map(round_sig),
        links: eam
            .links()
            .into_iter()
            .map(|(i, j, w)| (i, j, round_sig(w)))
            .collect(),
    };
    serde_json::to_value(doc).expect("serializable")
}

pub fn eam_from_json(text: &str) -> Result<EntanglementAdjacency> {
    let doc: EamJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    EntanglementAdjacency::from_links(doc.n_sites, &doc.links, doc.s0)
}

/// Dense `N × N` matrix, one row per line.
pub fn eam_to_csv(eam: &EntanglementAdjacency, timestamp: Option<&str>) -> String {
    let s0 = eam.s0().map_or_else(|| "none".to_owned(), format_sig);
    let mut out = comment_block(
        &[("n_sites", eam.n_sites().to_string()), ("s0", s0)],
        timestamp,
    );
    let j = eam.matrix();
    for i in 0..eam.n_sites() {
        let row: Vec<String> = (0..eam.n_sites()).map(|k| format_sig(j[(i, k)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn contour_to_csv(contour: &ContourVector, model: &str, timestamp: Option<&str>) -> String {
    let mut out = comment_block(
        &[
            ("route", contour.route.to_string()),
            ("mask", contour.mask.0.to_string()),
            ("model", model.to_owned()),
        ],
        timestamp,
    );
    out.push_str("site,value_nats\n");
    for (site, v) in contour.sites.iter().zip(&contour.values) {
        out.push_str(&format!("{site},{}\n", format_sig(*v)));
    }
    out
}

pub fn state_to_csv(state: &PureState, model: &str, timestamp: Option<&str>) -> String {
    let mut out = comment_block(
        &[
            ("n_sites", state.n_sites().to_string()),
            ("model", model.to_owned()),
        ],
        timestamp,
    );
    out.push_str("index,re,im\n");
    for (k, a) in state.amplitudes().iter().enumerate() {
        out.push_str(&format!("{k},{},{}\n", format_sig(a.re), format_sig(a.im)));
    }
    out
}
