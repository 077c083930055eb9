//! Tab-separated file formats.
//!
//! Every file starts with `#format=ebvariant.v1`; further `#key=value` lines
//! carry metadata, followed by a column header and the body.
//!
//! | file        | columns                                              |
//! |-------------|------------------------------------------------------|
//! | counts      | `site_id pool_id depth alt_count` (long format)      |
//! | truth       | `site_id mu theta_1..theta_M n_1..n_M`               |
//! | calls       | `site_id fdr rank rejected`                          |
//! | gold        | `site_id is_variant`                                 |
//! | benchmark   | `pi1 a p method ER EV FDR FNR sensitivity ETR replications` |
//! | roc         | `method k fdr sensitivity`                           |

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::benchmark::{CellResult, Method};
use crate::embayes::{CallSet, DecisionRule, HyperSource};
use crate::error::{Error, Result};
use crate::evaluation::RocCurve;
use crate::model::{LocalFdrVector, PoolDesign, SiteCountMatrix};
use crate::simulator::LatentTruth;

pub const FORMAT_TAG: &str = "ebvariant.v1";
pub const FORMAT_LINE: &str = "#format=ebvariant.v1";

pub const COUNTS_HEADER: &str = "site_id\tpool_id\tdepth\talt_count";
pub const CALLS_HEADER: &str = "site_id\tfdr\trank\trejected";
pub const GOLD_HEADER: &str = "site_id\tis_variant";
pub const BENCHMARK_HEADER: &str = "pi1\ta\tp\tmethod\tER\tEV\tFDR\tFNR\tsensitivity\tETR\treplications";
pub const ROC_HEADER: &str = "method\tk\tfdr\tsensitivity";

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

/// Leading `#key=value` lines, the column header, and the numbered body lines.
struct Sections {
    metadata: Vec<(String, String)>,
    body: Vec<(usize, String)>,
    header_line: usize,
}

fn split_sections<R: BufRead>(reader: R, expected_header: &str) -> Result<Sections> {
    let mut metadata = Vec::new();
    let mut header_line = None;
    let mut body = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(&line).to_string();
        if header_line.is_none() {
            if let Some(meta) = line.strip_prefix('#') {
                let (key, value) = meta.split_once('=').unwrap_or((meta, ""));
                if key == "format" && value != FORMAT_TAG {
                    return Err(parse_err(lineno, format!("unsupported format '{value}'")));
                }
                metadata.push((key.trim().to_string(), value.trim().to_string()));
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if line.trim_end() != expected_header {
                return Err(parse_err(
                    lineno,
                    format!("expected header '{}'", expected_header.replace('\t', "<TAB>")),
                ));
            }
            header_line = Some(lineno);
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        body.push((lineno, line));
    }
    let header_line = header_line.ok_or_else(|| parse_err(1, "missing header line"))?;
    Ok(Sections { metadata, body, header_line })
}

fn field<T: std::str::FromStr>(value: Option<&str>, name: &str, line: usize) -> Result<T> {
    let value = value.ok_or_else(|| parse_err(line, format!("missing column {name}")))?;
    value
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {name} '{value}'")))
}

/// Parses a long-format count table. Sites keep the order of their first
/// row; pools that never appear for a site get depth 0 and alt count 0.
pub fn read_counts<R: BufRead>(reader: R, design: &PoolDesign) -> Result<SiteCountMatrix> {
    let sections = split_sections(reader, COUNTS_HEADER)?;
    let m = design.pools();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut depths: Vec<u32> = Vec::new();
    let mut alts: Vec<u32> = Vec::new();
    let mut seen: Vec<bool> = Vec::new();

    for (lineno, line) in &sections.body {
        let lineno = *lineno;
        let mut cols = line.split('\t');
        let site_id = cols.next().unwrap_or("").trim();
        if site_id.is_empty() {
            return Err(parse_err(lineno, "empty site_id"));
        }
        let pool: usize = field(cols.next(), "pool_id", lineno)?;
        let depth: u32 = field(cols.next(), "depth", lineno)?;
        let alt: u32 = field(cols.next(), "alt_count", lineno)?;
        if cols.next().is_some() {
            return Err(parse_err(lineno, "expected 4 columns"));
        }
        if pool == 0 || pool > m {
            return Err(parse_err(lineno, format!("pool_id {pool} outside 1..={m}")));
        }
        if alt > depth {
            return Err(parse_err(lineno, format!("alt_count {alt} exceeds depth {depth}")));
        }
        let site = *index.entry(site_id.to_string()).or_insert_with(|| {
            ids.push(site_id.to_string());
            depths.extend(std::iter::repeat_n(0, m));
            alts.extend(std::iter::repeat_n(0, m));
            seen.extend(std::iter::repeat_n(false, m));
            ids.len() - 1
        });
        let slot = site * m + pool - 1;
        if seen[slot] {
            return Err(parse_err(lineno, format!("duplicate entry for site {site_id} pool {pool}")));
        }
        seen[slot] = true;
        depths[slot] = depth;
        alts[slot] = alt;
    }
    if ids.is_empty() {
        return Err(parse_err(sections.header_line, "no sites"));
    }
    SiteCountMatrix::new(m, depths, alts, Some(ids))
}

pub fn write_counts<W: Write>(data: &SiteCountMatrix, mut w: W) -> Result<()> {
    writeln!(w, "{FORMAT_LINE}")?;
    writeln!(w, "{COUNTS_HEADER}")?;
    for (i, site) in data.sites().enumerate() {
        let id = data.site_id(i);
        for (j, (k, x)) in site.depths.iter().zip(site.alt_counts).enumerate() {
            writeln!(w, "{id}\t{}\t{k}\t{x}", j + 1)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn truth_header(pools: usize) -> String {
    let mut cols = vec!["site_id".to_string(), "mu".to_string()];
    cols.extend((1..=pools).map(|j| format!("theta_{j}")));
    cols.extend((1..=pools).map(|j| format!("n_{j}")));
    cols.join("\t")
}

/// Truth sidecar aligned with `data`'s site order.
pub fn write_truth<W: Write>(data: &SiteCountMatrix, truth: &LatentTruth, mut w: W) -> Result<()> {
    if truth.mu.len() != data.num_sites() {
        return Err(Error::LengthMismatch { expected: data.num_sites(), got: truth.mu.len() });
    }
    let m = truth.pools;
    writeln!(w, "{FORMAT_LINE}")?;
    writeln!(w, "{}", truth_header(m))?;
    for i in 0..truth.mu.len() {
        write!(w, "{}\t{}", data.site_id(i), truth.mu[i] as u8)?;
        for t in &truth.theta[i * m..(i + 1) * m] {
            write!(w, "\t{t}")?;
        }
        for n in &truth.n_alt[i * m..(i + 1) * m] {
            write!(w, "\t{n}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth<R: BufRead>(reader: R, pools: usize) -> Result<(Vec<String>, LatentTruth)> {
    let sections = split_sections(reader, &truth_header(pools))?;
    let mut ids = Vec::new();
    let mut truth = LatentTruth { pools, mu: Vec::new(), theta: Vec::new(), n_alt: Vec::new() };
    for (lineno, line) in &sections.body {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 + 2 * pools {
            return Err(parse_err(*lineno, format!("expected {} columns", 2 + 2 * pools)));
        }
        ids.push(cols[0].to_string());
        truth.mu.push(parse_flag(cols[1], "mu", *lineno)?);
        for c in &cols[2..2 + pools] {
            truth.theta.push(field(Some(c), "theta", *lineno)?);
        }
        for c in &cols[2 + pools..] {
            truth.n_alt.push(field(Some(c), "n", *lineno)?);
        }
    }
    Ok((ids, truth))
}

fn parse_flag(value: &str, name: &str, line: usize) -> Result<bool> {
    match value.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(parse_err(line, format!("{name} must be 0 or 1, got '{other}'"))),
    }
}

/// `x` with six significant digits, `%g`-style: fixed notation for
/// exponents in `[-5, 6)`, scientific otherwise, trailing zeros removed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn write_hyper_metadata<W: Write>(w: &mut W, source: &HyperSource) -> Result<()> {
    let h = source.hyper();
    writeln!(w, "#mode={}", source.mode_name())?;
    writeln!(w, "#pi0={}", h.pi0())?;
    writeln!(w, "#pi1={}", h.pi1())?;
    writeln!(w, "#a={}", h.a())?;
    if let HyperSource::Estimated(e) = source {
        writeln!(w, "#raw_pi1={}", e.raw_pi1)?;
        writeln!(w, "#raw_a={}", e.raw_a)?;
        writeln!(w, "#truncated_pi1={}", e.truncated_pi1 as u8)?;
        writeln!(w, "#truncated_a={}", e.truncated_a as u8)?;
        writeln!(w, "#clamped_pi1={}", e.clamped_pi1 as u8)?;
        writeln!(w, "#clamped_a={}", e.clamped_a as u8)?;
    }
    Ok(())
}

/// Writes a call set with its fdr scores. Output bytes depend only on the
/// inputs.
pub fn write_calls<W: Write, S: AsRef<str>>(
    calls: &CallSet,
    scores: &LocalFdrVector,
    site_ids: &[S],
    mut w: W,
) -> Result<()> {
    let n = calls.len();
    for len in [scores.len(), site_ids.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, got: len });
        }
    }
    writeln!(w, "{FORMAT_LINE}")?;
    match calls.rule {
        DecisionRule::StepUp { alpha } => writeln!(w, "#alpha={alpha}")?,
        DecisionRule::BenjaminiHochberg { alpha } => writeln!(w, "#alpha={alpha}")?,
        DecisionRule::Threshold { t } => writeln!(w, "#threshold={t}")?,
    }
    if let Some(source) = &calls.hyper_used {
        write_hyper_metadata(&mut w, source)?;
    }
    writeln!(w, "#num_rejected={}", calls.num_rejected)?;
    if let Some(b) = calls.attained_bfdr {
        writeln!(w, "#attained_bfdr={b}")?;
    }
    writeln!(w, "{CALLS_HEADER}")?;
    for (i, id) in site_ids.iter().enumerate().take(n) {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            id.as_ref(),
            format_sig6(scores.scores()[i]),
            calls.ranks[i],
            calls.decisions[i] as u8
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Contents of a calls file.
#[derive(Debug, Clone, PartialEq)]
pub struct CallsFile {
    pub metadata: Vec<(String, String)>,
    pub site_ids: Vec<String>,
    pub fdr: Vec<f64>,
    pub ranks: Vec<usize>,
    pub decisions: Vec<bool>,
}

impl CallsFile {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn read_calls<R: BufRead>(reader: R) -> Result<CallsFile> {
    let sections = split_sections(reader, CALLS_HEADER)?;
    let mut out = CallsFile {
        metadata: sections.metadata,
        site_ids: Vec::new(),
        fdr: Vec::new(),
        ranks: Vec::new(),
        decisions: Vec::new(),
    };
    for (lineno, line) in &sections.body {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(parse_err(*lineno, "expected 4 columns"));
        }
        out.site_ids.push(cols[0].to_string());
        out.fdr.push(field(Some(cols[1]), "fdr", *lineno)?);
        out.ranks.push(field(Some(cols[2]), "rank", *lineno)?);
        out.decisions.push(parse_flag(cols[3], "rejected", *lineno)?);
    }
    Ok(out)
}

/// Gold-standard table: `site_id<TAB>is_variant(0/1)`.
pub fn read_gold<R: BufRead>(reader: R) -> Result<HashMap<String, bool>> {
    let sections = split_sections(reader, GOLD_HEADER)?;
    let mut gold = HashMap::new();
    for (lineno, line) in &sections.body {
        let (id, flag) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(*lineno, "expected 2 columns"))?;
        if gold.insert(id.to_string(), parse_flag(flag, "is_variant", *lineno)?).is_some() {
            return Err(parse_err(*lineno, format!("duplicate site {id}")));
        }
    }
    Ok(gold)
}

pub fn write_benchmark_table<W: Write>(cells: &[CellResult], mut w: W) -> Result<()> {
    writeln!(w, "{FORMAT_LINE}")?;
    writeln!(w, "{BENCHMARK_HEADER}")?;
    for cell in cells {
        for r in &cell.results {
            let rep = &r.report;
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                cell.cell.pi1,
                cell.cell.a,
                cell.p,
                r.method,
                format_sig6(rep.er),
                format_sig6(rep.ev),
                format_sig6(rep.fdr),
                format_sig6(rep.fnr),
                format_sig6(rep.sensitivity),
                format_sig6(rep.etr),
                rep.replications
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_roc<W: Write>(curves: &[(Method, RocCurve)], metadata: &[(&str, String)], mut w: W) -> Result<()> {
    writeln!(w, "{FORMAT_LINE}")?;
    for (k, v) in metadata {
        writeln!(w, "#{k}={v}")?;
    }
    writeln!(w, "{ROC_HEADER}")?;
    for (method, curve) in curves {
        for pt in &curve.points {
            writeln!(w, "{method}\t{}\t{}\t{}", pt.k, format_sig6(pt.fdr), format_sig6(pt.sensitivity))?;
        }
    }
    w.flush()?;
    Ok(())
}
