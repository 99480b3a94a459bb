//! Line-oriented ASCII formats: tree files, query files, and the flat
//! index container written by `build`.
//!
//! Tree file:
//!   line 1: `n d`
//!   line 2: n-1 parent ids, parent of node i+1 at position i, each < i+1
//!   lines 3..: one weight row of d integers per node, raw coordinates
//!
//! Query file, one query per line:
//!   `count x y lo1 hi1 ... lod hid`
//!   `report x y lo1 hi1 ... lod hid`
//!   `succ x y q1 lo2 hi2 ... lod hid`
//!   `dom x q1 ... qd`

use std::fmt::Write as _;

use treequery::dominance::DominanceVariant;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: expected {expected} values for d={d}, got {got}")]
    Dimension {
        line: usize,
        d: usize,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Query(#[from] treequery::Error),
    #[error("{0}")]
    Usage(String),
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeFile {
    pub n: u32,
    pub d: usize,
    pub parents: Vec<u32>,
    pub rows: Vec<Vec<i64>>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse {
        line,
        msg: msg.into(),
    }
}

fn ints<T: std::str::FromStr>(s: &str, line: usize) -> Result<Vec<T>, CliError> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| parse_err(line, format!("bad integer `{t}`")))
        })
        .collect()
}

pub fn parse_tree(text: &str) -> Result<TreeFile, CliError> {
    let mut lines = text.lines().enumerate();
    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let head: Vec<u64> = ints(header, ln + 1)?;
    let [n, d] = head[..] else {
        return Err(parse_err(ln + 1, "header must be `n d`"));
    };
    if n == 0 || n > u32::MAX as u64 / 2 {
        return Err(parse_err(ln + 1, format!("unsupported n = {n}")));
    }
    if d == 0 || d > 16 {
        return Err(parse_err(ln + 1, format!("unsupported d = {d}")));
    }
    let (n, d) = (n as u32, d as usize);

    let (ln, pline) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing parent line"))?;
    let parents: Vec<u32> = ints(pline, ln + 1)?;
    if parents.len() as u32 != n - 1 {
        return Err(parse_err(
            ln + 1,
            format!("expected {} parents, got {}", n - 1, parents.len()),
        ));
    }
    for (i, &p) in parents.iter().enumerate() {
        let v = i as u32 + 2;
        if p == 0 || p >= v {
            return Err(parse_err(
                ln + 1,
                format!("parent of node {v} must be in 1..{v}, got {p}"),
            ));
        }
    }

    let mut rows = Vec::with_capacity(n as usize);
    for v in 1..=n {
        let (ln, wline) = lines
            .next()
            .ok_or_else(|| parse_err(v as usize + 2, format!("missing weight row for node {v}")))?;
        let row: Vec<i64> = ints(wline, ln + 1)?;
        if row.len() != d {
            return Err(CliError::Dimension {
                line: ln + 1,
                d,
                expected: d,
                got: row.len(),
            });
        }
        rows.push(row);
    }
    if let Some((ln, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(ln + 1, format!("trailing content `{extra}`")));
    }
    Ok(TreeFile { n, d, parents, rows })
}

pub fn print_tree(t: &TreeFile) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", t.n, t.d).unwrap();
    let ps: Vec<String> = t.parents.iter().map(|p| p.to_string()).collect();
    writeln!(out, "{}", ps.join(" ")).unwrap();
    for row in &t.rows {
        let ws: Vec<String> = row.iter().map(|w| w.to_string()).collect();
        writeln!(out, "{}", ws.join(" ")).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryLine {
    Count {
        x: u32,
        y: u32,
        ranges: Vec<(i64, i64)>,
    },
    Report {
        x: u32,
        y: u32,
        ranges: Vec<(i64, i64)>,
    },
    Succ {
        x: u32,
        y: u32,
        q1: i64,
        rest: Vec<(i64, i64)>,
    },
    Dom {
        x: u32,
        q: Vec<i64>,
    },
}

impl QueryLine {
    pub fn kind(&self) -> &'static str {
        match self {
            QueryLine::Count { .. } => "count",
            QueryLine::Report { .. } => "report",
            QueryLine::Succ { .. } => "succ",
            QueryLine::Dom { .. } => "dom",
        }
    }

    pub fn print(&self) -> String {
        let mut out = String::new();
        let pairs = |out: &mut String, rs: &[(i64, i64)]| {
            for &(lo, hi) in rs {
                write!(out, " {lo} {hi}").unwrap();
            }
        };
        match self {
            QueryLine::Count { x, y, ranges } => {
                write!(out, "count {x} {y}").unwrap();
                pairs(&mut out, ranges);
            }
            QueryLine::Report { x, y, ranges } => {
                write!(out, "report {x} {y}").unwrap();
                pairs(&mut out, ranges);
            }
            QueryLine::Succ { x, y, q1, rest } => {
                write!(out, "succ {x} {y} {q1}").unwrap();
                pairs(&mut out, rest);
            }
            QueryLine::Dom { x, q } => {
                write!(out, "dom {x}").unwrap();
                for qi in q {
                    write!(out, " {qi}").unwrap();
                }
            }
        }
        out
    }
}

fn pair_up(vals: &[i64], line: usize) -> Result<Vec<(i64, i64)>, CliError> {
    if vals.len() % 2 != 0 {
        return Err(parse_err(line, "odd number of range endpoints"));
    }
    Ok(vals.chunks(2).map(|c| (c[0], c[1])).collect())
}

fn node_arg(v: i64, line: usize, n: u32) -> Result<u32, CliError> {
    if v < 1 || v > n as i64 {
        return Err(parse_err(line, format!("node {v} out of 1..={n}")));
    }
    Ok(v as u32)
}

pub fn parse_queries(text: &str, n: u32, d: usize) -> Result<Vec<(usize, QueryLine)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let (kind, rest) = raw.split_once(char::is_whitespace).unwrap_or((raw, ""));
        let vals: Vec<i64> = ints(rest, line)?;
        let dim_err = |got: usize, expected: usize| CliError::Dimension {
            line,
            d,
            expected,
            got,
        };
        let q = match kind {
            "count" | "report" => {
                if vals.len() != 2 + 2 * d {
                    return Err(dim_err(vals.len(), 2 + 2 * d));
                }
                let x = node_arg(vals[0], line, n)?;
                let y = node_arg(vals[1], line, n)?;
                let ranges = pair_up(&vals[2..], line)?;
                if kind == "count" {
                    QueryLine::Count { x, y, ranges }
                } else {
                    QueryLine::Report { x, y, ranges }
                }
            }
            "succ" => {
                if vals.len() != 3 + 2 * (d - 1) {
                    return Err(dim_err(vals.len(), 3 + 2 * (d - 1)));
                }
                let x = node_arg(vals[0], line, n)?;
                let y = node_arg(vals[1], line, n)?;
                let rest = pair_up(&vals[3..], line)?;
                QueryLine::Succ {
                    x,
                    y,
                    q1: vals[2],
                    rest,
                }
            }
            "dom" => {
                if vals.len() != 1 + d {
                    return Err(dim_err(vals.len(), 1 + d));
                }
                let x = node_arg(vals[0], line, n)?;
                QueryLine::Dom {
                    x,
                    q: vals[1..].to_vec(),
                }
            }
            other => return Err(parse_err(line, format!("unknown query kind `{other}`"))),
        };
        out.push((line, q));
    }
    Ok(out)
}

/// Flat index container: build parameters plus the canonical tree, from
/// which every structure rebuilds deterministically.
pub struct IndexFile {
    pub tree: TreeFile,
    pub epsilon: f64,
    pub branching: Option<u32>,
    pub variant: DominanceVariant,
}

const INDEX_MAGIC: &str = "treequery-index";
const INDEX_VERSION: u32 = 1;

pub fn print_index(ix: &IndexFile) -> String {
    let variant = match ix.variant {
        DominanceVariant::Theorem1 => "theorem1",
        DominanceVariant::Theorem2 => "theorem2",
    };
    let branching = ix
        .branching
        .map_or_else(|| "-".to_string(), |b| b.to_string());
    format!(
        "{INDEX_MAGIC} {INDEX_VERSION}\n{} {branching} {variant}\n{}",
        ix.epsilon,
        print_tree(&ix.tree)
    )
}

pub fn parse_index(text: &str) -> Result<IndexFile, CliError> {
    let (head, rest) = text
        .split_once('\n')
        .ok_or_else(|| parse_err(1, "empty index file"))?;
    let mut hp = head.split_whitespace();
    if hp.next() != Some(INDEX_MAGIC) {
        return Err(parse_err(1, "not a treequery index file"));
    }
    match hp.next().map(str::parse::<u32>) {
        Some(Ok(INDEX_VERSION)) => {}
        Some(Ok(v)) => return Err(parse_err(1, format!("unsupported index version {v}"))),
        _ => return Err(parse_err(1, "missing index version")),
    }
    let (params, body) = rest
        .split_once('\n')
        .ok_or_else(|| parse_err(2, "missing parameter line"))?;
    let ps: Vec<&str> = params.split_whitespace().collect();
    let [eps, branching, variant] = ps[..] else {
        return Err(parse_err(2, "parameter line must be `epsilon branching variant`"));
    };
    let epsilon: f64 = eps
        .parse()
        .map_err(|_| parse_err(2, format!("bad epsilon `{eps}`")))?;
    let branching = match branching {
        "-" => None,
        b => Some(
            b.parse::<u32>()
                .map_err(|_| parse_err(2, format!("bad branching `{b}`")))?,
        ),
    };
    let variant = DominanceVariant::parse(variant)
        .ok_or_else(|| parse_err(2, format!("bad variant `{variant}`")))?;
    let tree = parse_tree(body).map_err(|e| match e {
        // body starts at line 3 of the container
        CliError::Parse { line, msg } => parse_err(line + 2, msg),
        CliError::Dimension {
            line,
            d,
            expected,
            got,
        } => CliError::Dimension {
            line: line + 2,
            d,
            expected,
            got,
        },
        other => other,
    })?;
    Ok(IndexFile {
        tree,
        epsilon,
        branching,
        variant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const T1: &str = "5 1\n1 2 2 1\n3\n1\n5\n2\n4\n";

    #[test]
    fn tree_round_trip() {
        let t = parse_tree(T1).unwrap();
        assert_eq!(t.n, 5);
        assert_eq!(t.parents, vec![1, 2, 2, 1]);
        assert_eq!(t.rows[2], vec![5]);
        assert_eq!(print_tree(&t), T1);
    }

    #[test]
    fn tree_parse_errors_carry_lines() {
        let e = parse_tree("5 1\n1 2 2\n").unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }), "{e}");
        let e = parse_tree("2 2\n1\n1 2\n3\n").unwrap_err();
        assert!(matches!(e, CliError::Dimension { line: 4, .. }), "{e}");
        let e = parse_tree("3 1\n1 3\n1\n2\n3\n").unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn query_lines() {
        let qs = parse_queries("count 3 5 2 4\nsucc 3 5 2\n\nreport 1 4 -1 9\n", 5, 1).unwrap();
        assert_eq!(qs.len(), 3);
        assert_eq!(
            qs[0].1,
            QueryLine::Count {
                x: 3,
                y: 5,
                ranges: vec![(2, 4)]
            }
        );
        assert_eq!(qs[1].0, 2);
        assert_eq!(qs[0].1.print(), "count 3 5 2 4");

        let e = parse_queries("dom 1 2\n", 5, 2).unwrap_err();
        assert!(matches!(e, CliError::Dimension { line: 1, .. }), "{e}");
        let e = parse_queries("size 1 2\n", 5, 2).unwrap_err();
        assert!(matches!(e, CliError::Parse { line: 1, .. }), "{e}");
    }

    #[test]
    fn index_round_trip() {
        let ix = IndexFile {
            tree: parse_tree(T1).unwrap(),
            epsilon: 0.5,
            branching: Some(3),
            variant: DominanceVariant::Theorem2,
        };
        let s = print_index(&ix);
        let back = parse_index(&s).unwrap();
        assert_eq!(back.tree, ix.tree);
        assert_eq!(back.epsilon, 0.5);
        assert_eq!(back.branching, Some(3));
        assert!(matches!(back.variant, DominanceVariant::Theorem2));
        assert!(parse_index("bogus 1\n").is_err());
    }
}
