//! Text serialization of codes.
//!
//! ```text
//! gfq-code v1 p=6 n=267 m=179 b=5 seed=7 poly=0x43
//! check 0: 12:3f 80:1 201:2a
//! ...
//! ```
//!
//! `m` is the check count before reduction, so exactly `m - b` check lines
//! follow the header. Coefficients are hexadecimal field elements.

use std::fmt::Write as _;

use super::SparseCode;
use crate::error::{Error, Result};
use crate::gf::{Symbol, PRIMITIVE_POLYS};

const MAGIC: &str = "gfq-code";
const VERSION: &str = "v1";

pub fn write_code(code: &SparseCode) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{MAGIC} {VERSION} p={} n={} m={} b={} seed={} poly={:#x}",
        code.p(),
        code.n_sym(),
        code.m_constructed(),
        code.b(),
        code.seed(),
        PRIMITIVE_POLYS[code.p() as usize]
    )
    .unwrap();
    for f in 0..code.m_sym() {
        write!(out, "check {f}:").unwrap();
        for e in code.check_edges(f) {
            write!(out, " {}:{:x}", code.edge_var(e), code.edge_coef(e)).unwrap();
        }
        out.push('\n');
    }
    out
}

fn header_field<'a>(fields: &'a [&str], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Format(format!("header is missing `{key}=`")))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Format(format!("invalid {what}: `{s}`")))
}

fn parse_hex(s: &str, what: &str) -> Result<u16> {
    let digits = s.trim_start_matches("0x").trim_start_matches("0X");
    u16::from_str_radix(digits, 16).map_err(|_| Error::Format(format!("invalid {what}: `{s}`")))
}

pub fn parse_code(text: &str) -> Result<SparseCode> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty code file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 2 || fields[0] != MAGIC {
        return Err(Error::Format(format!("not a code file: `{header}`")));
    }
    if fields[1] != VERSION {
        return Err(Error::Format(format!("unsupported version `{}`", fields[1])));
    }
    let p: u8 = parse_num(header_field(&fields, "p")?, "p")?;
    let n: usize = parse_num(header_field(&fields, "n")?, "n")?;
    let m: usize = parse_num(header_field(&fields, "m")?, "m")?;
    let b: usize = parse_num(header_field(&fields, "b")?, "b")?;
    let seed: u64 = parse_num(header_field(&fields, "seed")?, "seed")?;
    let poly = parse_hex(header_field(&fields, "poly")?, "poly")?;
    if !(1..=8).contains(&p) {
        return Err(Error::Format(format!("unsupported p={p}")));
    }
    if poly != PRIMITIVE_POLYS[p as usize] {
        return Err(Error::Format(format!(
            "polynomial {poly:#x} differs from the fixed polynomial for p={p}"
        )));
    }

    let mut checks: Vec<Vec<(usize, Symbol)>> = Vec::new();
    for line in lines {
        let (label, body) = line
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("malformed check line `{line}`")))?;
        let id: usize = parse_num(
            label
                .trim()
                .strip_prefix("check")
                .ok_or_else(|| Error::Format(format!("malformed check line `{line}`")))?
                .trim(),
            "check id",
        )?;
        if id != checks.len() {
            return Err(Error::Format(format!(
                "check ids must be consecutive, expected {} got {id}",
                checks.len()
            )));
        }
        let mut row = Vec::new();
        for tok in body.split_whitespace() {
            let (v, h) = tok
                .split_once(':')
                .ok_or_else(|| Error::Format(format!("malformed edge `{tok}`")))?;
            let h = parse_hex(h, "coefficient")?;
            if h > Symbol::MAX as u16 {
                return Err(Error::Format(format!("coefficient `{tok}` out of range")));
            }
            row.push((parse_num(v, "variable")?, h as Symbol));
        }
        checks.push(row);
    }
    SparseCode::from_checks(p, n, &checks, m, b, seed).map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_code;

    #[test]
    fn round_trip() {
        let code = build_code(6, 100, 50, 3, 17).unwrap();
        let text = write_code(&code);
        assert!(text.starts_with("gfq-code v1 p=6 n=100 m=50 b=3 seed=17 poly=0x43\n"));
        assert_eq!(text.lines().count(), 1 + 47);
        assert_eq!(parse_code(&text).unwrap(), code);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_code("").is_err());
        assert!(parse_code("gfq-code v2 p=2 n=2 m=1 b=0 seed=0 poly=0x7\ncheck 0: 0:1 1:1").is_err());
        assert!(parse_code("gfq-code v1 p=2 n=2 m=1 b=0 seed=0 poly=0xb\ncheck 0: 0:1 1:1").is_err());
        assert!(parse_code("gfq-code v1 p=2 n=2 m=1 b=0 seed=0 poly=0x7\ncheck 1: 0:1 1:1").is_err());
        assert!(parse_code("gfq-code v1 p=2 n=2 m=1 b=0 seed=0 poly=0x7\ncheck 0: 0:1 1:4").is_err());
        assert!(parse_code("gfq-code v1 p=2 n=2 m=2 b=0 seed=0 poly=0x7\ncheck 0: 0:1 1:1").is_err());
        let ok = parse_code("gfq-code v1 p=2 n=2 m=1 b=0 seed=0 poly=7\ncheck 0: 0:1 1:3\n").unwrap();
        assert_eq!(ok.checks(), vec![vec![(0, 1), (1, 3)]]);
    }
}
