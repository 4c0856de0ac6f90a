#![allow(dead_code)]

use std::path::PathBuf;
use std::str::FromStr;

use num_rational::Ratio;
use refmc::pipeline::ReportRow;
use refmc::{MatTuple, RootOfUnity};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn exemplar(name: &str) -> MatTuple {
    let path = fixture_dir().join("exemplars").join(format!("{name}.txt"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    MatTuple::from_str(&text).unwrap()
}

/// Exemplar fixtures as `(group, T, file stem)`.
pub fn exemplar_names() -> Vec<(String, usize, String)> {
    let mut v: Vec<_> = std::fs::read_dir(fixture_dir().join("exemplars"))
        .unwrap()
        .map(|e| e.unwrap().path().file_stem().unwrap().to_string_lossy().into_owned())
        .map(|s| {
            let mut it = s.split('_');
            let g = it.next().unwrap().to_string();
            let t = it.next().unwrap().parse().unwrap();
            (g, t, s)
        })
        .collect();
    v.sort();
    v
}

pub fn ratio(s: &str) -> Ratio<i64> {
    match s.split_once('/') {
        Some((n, d)) => Ratio::new(n.trim().parse().unwrap(), d.trim().parse().unwrap()),
        None => Ratio::from_integer(s.trim().parse().unwrap()),
    }
}

pub fn root(r: Ratio<i64>) -> RootOfUnity {
    RootOfUnity::from_residue(*r.numer(), *r.denom() as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    Exact(usize),
    AtLeast(usize),
    Unknown,
}

#[derive(Clone, Debug)]
pub struct AppendixRow {
    pub group: String,
    pub t: usize,
    pub paper_type: String,
    pub key: Vec<Ratio<i64>>,
    pub xi: Ratio<i64>,
    pub character: Vec<RootOfUnity>,
    pub orbit: Expected,
    pub s_size: usize,
    pub sl2: String,
}

impl AppendixRow {
    pub fn label(&self) -> String {
        format!("{} T={} type {} xi={}", self.group, self.t, self.paper_type, self.xi)
    }
}

fn sorted(mut v: Vec<Ratio<i64>>) -> Vec<Ratio<i64>> {
    v.sort();
    v
}

pub fn appendix_rows() -> Vec<AppendixRow> {
    let text = std::fs::read_to_string(fixture_dir().join("appendix_rows.tsv")).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            assert_eq!(c.len(), 9, "{l}");
            let orbit = match c[6] {
                "-" => Expected::Unknown,
                s if s.starts_with(">=") => Expected::AtLeast(s[2..].parse().unwrap()),
                s => Expected::Exact(s.parse().unwrap()),
            };
            AppendixRow {
                group: c[0].to_string(),
                t: c[1].parse().unwrap(),
                paper_type: c[2].to_string(),
                key: sorted(c[3].split(',').map(ratio).collect()),
                xi: ratio(c[4]),
                character: c[5].split(',').map(|s| root(ratio(s))).collect(),
                orbit,
                s_size: c[7].parse().unwrap(),
                sl2: c[8].to_string(),
            }
        })
        .collect()
}

pub fn key_of(row: &ReportRow) -> Vec<Ratio<i64>> {
    let inner = row.type_key.trim_start_matches('{').trim_end_matches('}');
    sorted(inner.split(',').map(ratio).collect())
}

/// The computed row with the same inverse-product residues and convolution parameter.
pub fn matching<'a>(rows: &'a [ReportRow], a: &AppendixRow) -> Option<&'a ReportRow> {
    rows.iter().find(|r| r.group == a.group && r.t == a.t && r.xi == a.xi && key_of(r) == a.key)
}
