//! Text formats read and written by the command line.
//!
//! A parse file is
//!
//! ```text
//! LZ77 v1
//! sigma=<sigma> n=<n> z=<z>
//! <s_1> <l_1>
//! ...
//! ```
//!
//! with exactly `z` member lines. Interval files hold one `i j` pair per
//! line. Blank lines are ignored in both.

use std::fmt::{self, Write};

use lzctx::extract::Stats;
use lzctx::matcher::{Kind, Occurrence};
use lzctx::parse::Violation;
use lzctx::{Lz77Parse, Member};

pub const MAGIC: &str = "LZ77 v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for FormatError {}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError { line, message: message.into() }
}

pub fn serialize_parse(parse: &Lz77Parse) -> String {
    let mut out = String::with_capacity(24 + 12 * parse.z());
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "sigma={} n={} z={}", parse.sigma(), parse.len(), parse.z());
    for m in parse.members() {
        let _ = writeln!(out, "{} {}", m.source, m.len);
    }
    out
}

fn number<T: std::str::FromStr>(line: usize, what: &str, text: &str) -> Result<T, FormatError> {
    text.parse().map_err(|_| err(line, format!("bad {what} `{text}`")))
}

fn header_field<T: std::str::FromStr>(line: usize, field: Option<&str>, key: &str) -> Result<T, FormatError> {
    let field = field.ok_or_else(|| err(line, format!("missing `{key}=`")))?;
    let value = field
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| err(line, format!("expected `{key}=`, found `{field}`")))?;
    number(line, key, value)
}

/// Reads a parse file and checks every parse invariant.
pub fn deserialize_parse(text: &str) -> Result<Lz77Parse, FormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((line, other)) => return Err(err(line, format!("expected `{MAGIC}`, found `{other}`"))),
        None => return Err(err(1, "empty parse file")),
    }
    let (line, header) = lines.next().ok_or_else(|| err(2, "missing header line"))?;
    let mut fields = header.split_whitespace();
    let sigma: u32 = header_field(line, fields.next(), "sigma")?;
    let n: usize = header_field(line, fields.next(), "n")?;
    let z: usize = header_field(line, fields.next(), "z")?;
    if let Some(extra) = fields.next() {
        return Err(err(line, format!("unexpected `{extra}`")));
    }
    let mut members = Vec::with_capacity(z.min(1 << 20));
    let mut member_lines = Vec::with_capacity(z.min(1 << 20));
    let mut last = line;
    for (line, text) in lines {
        last = line;
        if members.len() == z {
            return Err(err(line, format!("more than z={z} members")));
        }
        let mut parts = text.split_whitespace();
        let (Some(s), Some(l), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(line, format!("expected `<source> <length>`, found `{text}`")));
        };
        members.push(Member::new(number(line, "source", s)?, number(line, "length", l)?));
        member_lines.push(line);
    }
    if members.len() != z {
        return Err(err(last, format!("found {} members, header says z={z}", members.len())));
    }
    let parse = Lz77Parse::from_parts(sigma, n, members);
    let mut violations = parse.validate();
    // Report member errors before the length total they also break.
    violations.sort_by_key(|v| matches!(v, Violation::LengthMismatch { .. }));
    if let Some(v) = violations.into_iter().next() {
        let at = match v {
            Violation::EmptyPhrase { index }
            | Violation::SourceBelowAlphabet { index, .. }
            | Violation::LongSentinel { index, .. }
            | Violation::Overlap { index, .. } => member_lines[index],
            Violation::EmptyAlphabet | Violation::LengthMismatch { .. } => line,
        };
        return Err(err(at, v.to_string()));
    }
    Ok(parse)
}

/// One `i j` pair per line.
pub fn parse_intervals(text: &str) -> Result<Vec<(i64, i64)>, FormatError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let mut parts = raw.split_whitespace();
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(line, format!("expected `<i> <j>`, found `{raw}`")));
        };
        out.push((number(line, "start", a)?, number(line, "end", b)?));
    }
    Ok(out)
}

/// One start per line; with `kinds`, followed by ` p` or ` s`.
pub fn format_occurrences(occ: &[Occurrence], kinds: bool) -> String {
    let mut out = String::new();
    for o in occ {
        if kinds {
            let tag = if o.kind == Kind::Primary { 'p' } else { 's' };
            let _ = writeln!(out, "{} {tag}", o.start);
        } else {
            let _ = writeln!(out, "{}", o.start);
        }
    }
    out
}

pub fn format_stats(stats: &Stats) -> String {
    format!(
        "peak_words={}\ndict_ops={}\nslp_nodes_visited={}\nbatches={}\ntau={}\nsymbols={}\n",
        stats.peak_words, stats.dict_ops, stats.slp_nodes_visited, stats.batches, stats.tau, stats.symbols
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "LZ77 v1\nsigma=2 n=8 z=4\n-1 1\n-2 2\n1 3\n2 2\n";

    #[test]
    fn parse_file_round_trip() {
        let p = deserialize_parse(SAMPLE).unwrap();
        assert_eq!(p.z(), 4);
        assert_eq!(serialize_parse(&p), SAMPLE);
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("", 1, "empty"),
            ("LZ78\n", 1, "LZ77 v1"),
            ("LZ77 v1\nsigma=2 n=8\n", 2, "`z=`"),
            ("LZ77 v1\nsigma=2 n=8 z=4\n-1 1\n-2 x\n", 4, "length"),
            ("LZ77 v1\nsigma=2 n=8 z=4\n-1 1\n-2 1\n2 3\n2 2\n", 5, "overlaps"),
            ("LZ77 v1\nsigma=2 n=8 z=4\n-1 1\n-3 1\n1 3\n2 2\n", 4, "alphabet"),
            ("LZ77 v1\nsigma=2 n=8 z=4\n-1 1\n", 3, "z=4"),
            ("LZ77 v1\nsigma=2 n=9 z=4\n-1 1\n-2 2\n1 3\n2 2\n", 2, "9"),
        ];
        for (text, line, needle) in cases {
            let e = deserialize_parse(text).unwrap_err();
            assert_eq!(e.line, line, "{text:?}: {e}");
            assert!(e.to_string().to_lowercase().contains(&needle.to_lowercase()), "{text:?}: {e}");
        }
    }

    #[test]
    fn intervals_and_occurrences() {
        assert_eq!(parse_intervals("3 6\n\n7 3\n").unwrap(), vec![(3, 6), (7, 3)]);
        assert_eq!(parse_intervals("1 2\n3\n").unwrap_err().line, 2);
        let occ = [
            Occurrence { start: 1, kind: Kind::Primary, errors_used: 0 },
            Occurrence { start: 4, kind: Kind::Secondary, errors_used: 0 },
        ];
        assert_eq!(format_occurrences(&occ, false), "1\n4\n");
        assert_eq!(format_occurrences(&occ, true), "1 p\n4 s\n");
    }
}
