//! Line-oriented text formats for graphs and seedings.
//!
//! Graph file:
//!
//! ```text
//! n=3 directed=0
//! node 0 group=0 tl=1.5000000000000000e-1 th=5.5000000000000004e-1
//! ...
//! arc 0 1 6.9999999999999996e-1
//! ```
//!
//! Seeding file: one line per source, `source <k>: <node ids>`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{NodeId, TrustArc, TrustGraph};
use crate::instance::{NodeProfile, Seeding};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn kv<'a>(tok: &'a str, key: &str, line: usize) -> Result<&'a str> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| parse_err(line, format!("expected `{key}=...`, got `{tok}`")))
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| parse_err(line, format!("bad number `{s}`")))
}

pub fn write_graph<W: Write>(mut w: W, graph: &TrustGraph, profiles: &[NodeProfile]) -> Result<()> {
    let n = graph.node_count();
    if profiles.len() != n {
        return Err(Error::param(format!("{} profiles for {n} nodes", profiles.len())));
    }
    writeln!(w, "n={n} directed={}", u8::from(!graph.is_symmetric()))?;
    for (u, p) in profiles.iter().enumerate() {
        writeln!(
            w,
            "node {u} group={} tl={} th={}",
            graph.group(u),
            fmt_float(p.t_low),
            fmt_float(p.t_high)
        )?;
    }
    for a in graph.arcs() {
        writeln!(w, "arc {} {} {}", a.src, a.dst, fmt_float(a.trust))?;
    }
    Ok(())
}

pub fn read_graph<R: BufRead>(r: R) -> Result<(TrustGraph, Vec<NodeProfile>)> {
    let mut header: Option<(usize, bool)> = None;
    let mut groups = Vec::new();
    let mut profiles: Vec<Option<NodeProfile>> = Vec::new();
    let mut arcs = Vec::new();

    for (i, line) in r.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match header {
            None => {
                if toks.len() != 2 {
                    return Err(parse_err(lineno, "header must be `n=<int> directed=<0|1>`"));
                }
                let n: usize = num(kv(toks[0], "n", lineno)?, lineno)?;
                let directed = match kv(toks[1], "directed", lineno)? {
                    "0" => false,
                    "1" => true,
                    other => return Err(parse_err(lineno, format!("directed must be 0 or 1, got {other}"))),
                };
                groups = vec![0u32; n];
                profiles = vec![None; n];
                header = Some((n, directed));
            }
            Some((n, _)) => match toks[0] {
                "node" => {
                    if toks.len() != 5 {
                        return Err(parse_err(lineno, "node line needs id, group, tl, th"));
                    }
                    let u: usize = num(toks[1], lineno)?;
                    if u >= n {
                        return Err(parse_err(lineno, format!("node {u} out of range")));
                    }
                    groups[u] = num(kv(toks[2], "group", lineno)?, lineno)?;
                    let tl = num(kv(toks[3], "tl", lineno)?, lineno)?;
                    let th = num(kv(toks[4], "th", lineno)?, lineno)?;
                    profiles[u] = Some(NodeProfile::new(tl, th));
                }
                "arc" => {
                    if toks.len() != 4 {
                        return Err(parse_err(lineno, "arc line needs src, dst, trust"));
                    }
                    let src: usize = num(toks[1], lineno)?;
                    let dst: usize = num(toks[2], lineno)?;
                    if src >= n || dst >= n {
                        return Err(parse_err(lineno, "arc endpoint out of range"));
                    }
                    arcs.push(TrustArc {
                        src: src.into(),
                        dst: dst.into(),
                        trust: num(toks[3], lineno)?,
                    });
                }
                other => return Err(parse_err(lineno, format!("unknown record `{other}`"))),
            },
        }
    }

    let (n, directed) = header.ok_or_else(|| parse_err(0, "missing header"))?;
    let profiles = profiles
        .into_iter()
        .enumerate()
        .map(|(u, p)| p.ok_or_else(|| parse_err(0, format!("node {u} has no node line"))))
        .collect::<Result<Vec<_>>>()?;
    let graph = TrustGraph::new(n, arcs, groups, !directed)?;
    Ok((graph, profiles))
}

pub fn write_seeding<W: Write>(mut w: W, seeding: &Seeding) -> Result<()> {
    for (k, set) in seeding.sets().iter().enumerate() {
        write!(w, "source {k}:")?;
        for u in set {
            write!(w, " {u}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_seeding<R: BufRead>(r: R) -> Result<Seeding> {
    let mut sets: Vec<Vec<NodeId>> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rest = line
            .strip_prefix("source ")
            .ok_or_else(|| parse_err(lineno, "expected `source <k>: ...`"))?;
        let (k, ids) = rest.split_once(':').ok_or_else(|| parse_err(lineno, "missing `:`"))?;
        let k: usize = num(k.trim(), lineno)?;
        if k != sets.len() {
            return Err(parse_err(lineno, format!("expected source {}, got {k}", sets.len())));
        }
        let set = ids
            .split_whitespace()
            .map(|t| num::<u32>(t, lineno).map(NodeId))
            .collect::<Result<Vec<_>>>()?;
        sets.push(set);
    }
    Ok(Seeding::from_sets(sets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_format_has_enough_digits() {
        let s = fmt_float(0.7);
        let digits = s
            .split('e')
            .next()
            .unwrap()
            .chars()
            .filter(|c| c.is_ascii_digit())
            .count();
        assert!(digits >= 9, "{s}");
    }

    #[test]
    fn reads_hand_written_file() {
        let text = "n=2 directed=1\nnode 0 group=1 tl=0.1 th=0.5\nnode 1 group=0 tl=0.2 th=0.2\narc 0 1 0.9\n";
        let (g, p) = read_graph(text.as_bytes()).unwrap();
        assert_eq!(g.node_count(), 2);
        assert!(!g.is_symmetric());
        assert_eq!(g.group(0), 1);
        assert_eq!(p[1], NodeProfile::single(0.2));
        assert_eq!(g.out_arcs(0).collect::<Vec<_>>(), vec![(1, 0.9)]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_graph("n=2 directed=2\n".as_bytes()).is_err());
        assert!(read_graph("n=1 directed=0\n".as_bytes()).is_err());
        assert!(read_graph("n=1 directed=0\nnode 0 group=0 tl=0 th=0\narc 0 3 0.5\n".as_bytes()).is_err());
        assert!(read_seeding("source 1: 0\n".as_bytes()).is_err());
    }

    #[test]
    fn seeding_format() {
        let s = Seeding::from_sets(vec![vec![NodeId(3), NodeId(1)], vec![]]);
        let mut buf = Vec::new();
        write_seeding(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "source 0: 1 3\nsource 1:\n");
        assert_eq!(read_seeding(&buf[..]).unwrap(), s);
    }

    proptest! {
        #[test]
        fn graph_file_roundtrip_is_bit_exact(
            n in 1usize..12,
            raw in prop::collection::vec((0usize..12, 0usize..12, 0.0f64..=1.0), 0..30),
            tl in prop::collection::vec(0.0f64..2.0, 12),
            directed in any::<bool>(),
        ) {
            let arcs: Vec<TrustArc> = raw
                .into_iter()
                .map(|(a, b, t)| TrustArc { src: (a % n).into(), dst: (b % n).into(), trust: t })
                .collect();
            let groups: Vec<u32> = (0..n as u32).map(|u| u % 3).collect();
            let g = TrustGraph::new(n, arcs, groups, !directed).unwrap();
            let profiles: Vec<NodeProfile> =
                (0..n).map(|u| NodeProfile::new(tl[u] / 3.0, tl[u])).collect();
            let mut buf = Vec::new();
            write_graph(&mut buf, &g, &profiles).unwrap();
            let (g2, p2) = read_graph(&buf[..]).unwrap();
            prop_assert_eq!(g, g2);
            for (a, b) in profiles.iter().zip(&p2) {
                prop_assert_eq!(a.t_low.to_bits(), b.t_low.to_bits());
                prop_assert_eq!(a.t_high.to_bits(), b.t_high.to_bits());
            }
        }
    }
}
