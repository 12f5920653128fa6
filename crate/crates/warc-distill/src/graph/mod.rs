//! Domain-webgraph analytics: graph construction, weighted PageRank, degree
//! statistics, and Gephi-compatible GraphML export.

use std::collections::HashMap;
use std::io::{self, Write};
use std::path::Path;

use crate::derivatives::{AtomicFile, DomainWebgraphEdges};

/// A directed, weighted domain graph. Node ids are dense `0..n`, assigned in
/// lexicographic domain order so construction is deterministic; edges sort by
/// (src, dest). Parallel edges cannot occur (edge rows come pre-grouped);
/// self-loops are kept — intra-domain links dominate real collections.
#[derive(Debug, Clone, Default)]
pub struct DomainGraph {
    domains: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize, u64)>,
    scores: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct PagerankOptions {
    pub damping: f64,
    /// L1 convergence tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PagerankOptions {
    fn default() -> Self {
        PagerankOptions {
            damping: 0.85,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

/// Exact degree tallies for one node. A self-loop increments both in and
/// out sides.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeDegrees {
    pub in_degree: u64,
    pub out_degree: u64,
    pub weighted_in: u64,
    pub weighted_out: u64,
}

impl DomainGraph {
    /// Nodes are the union of all source and destination domains — a domain
    /// appearing only as a destination is still a node.
    pub fn from_edges(edges: &DomainWebgraphEdges) -> DomainGraph {
        let mut domains: Vec<String> = edges
            .rows
            .iter()
            .flat_map(|(s, d, _)| [s.clone(), d.clone()])
            .collect();
        domains.sort_unstable();
        domains.dedup();
        let index: HashMap<String, usize> = domains
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), i))
            .collect();
        let mut graph_edges: Vec<(usize, usize, u64)> = edges
            .rows
            .iter()
            .map(|(s, d, c)| (index[s], index[d], *c))
            .collect();
        graph_edges.sort_unstable();
        DomainGraph {
            domains,
            index,
            edges: graph_edges,
            scores: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.domains.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn domains(&self) -> &[String] {
        &self.domains
    }

    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }

    pub fn node_id(&self, domain: &str) -> Option<usize> {
        self.index.get(domain).copied()
    }

    pub fn scores(&self) -> Option<&[f64]> {
        self.scores.as_deref()
    }

    /// Weighted PageRank by power iteration: the transition probability out
    /// of a node is proportional to edge weight; dangling mass redistributes
    /// uniformly. Scores sum to 1. An empty graph has empty scores.
    pub fn compute_pagerank(&mut self, opts: &PagerankOptions) -> &[f64] {
        let n = self.domains.len();
        if n == 0 {
            self.scores = Some(Vec::new());
            return self.scores.as_deref().unwrap();
        }
        let d = opts.damping;
        let nf = n as f64;

        let mut out_weight = vec![0u64; n];
        for &(src, _, w) in &self.edges {
            out_weight[src] += w;
        }

        let mut rank = vec![1.0 / nf; n];
        let mut next = vec![0.0f64; n];
        for _ in 0..opts.max_iter {
            let dangling: f64 = (0..n)
                .filter(|&u| out_weight[u] == 0)
                .map(|u| rank[u])
                .sum();
            let base = (1.0 - d) / nf + d * dangling / nf;
            next.iter_mut().for_each(|x| *x = base);
            for &(src, dest, w) in &self.edges {
                next[dest] += d * rank[src] * (w as f64) / (out_weight[src] as f64);
            }
            let delta: f64 = rank
                .iter()
                .zip(next.iter())
                .map(|(a, b)| (a - b).abs())
                .sum();
            std::mem::swap(&mut rank, &mut next);
            if delta < opts.tol {
                break;
            }
        }
        self.scores = Some(rank);
        self.scores.as_deref().unwrap()
    }

    /// Per-node (in, out, weighted in, weighted out), indexed by node id.
    pub fn degree_stats(&self) -> Vec<NodeDegrees> {
        let mut stats = vec![NodeDegrees::default(); self.domains.len()];
        for &(src, dest, w) in &self.edges {
            stats[src].out_degree += 1;
            stats[src].weighted_out += w;
            stats[dest].in_degree += 1;
            stats[dest].weighted_in += w;
        }
        stats
    }

    /// Well-formed GraphML for Gephi: a directed graph with node attributes
    /// `label` (the domain) and `pagerank` (when computed), and edge
    /// attribute `weight`. Nodes in id order, edges in (src, dest) order,
    /// labels XML-escaped — output is deterministic.
    pub fn write_graphml(&self, path: &Path) -> io::Result<()> {
        let mut out = AtomicFile::create(path)?;
        self.render_graphml(out.writer())?;
        out.commit()
    }

    fn render_graphml<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let with_scores = self.scores.is_some();
        writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
        writeln!(
            w,
            r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">"#
        )?;
        writeln!(
            w,
            r#"  <key id="label" for="node" attr.name="label" attr.type="string"/>"#
        )?;
        if with_scores {
            writeln!(
                w,
                r#"  <key id="pagerank" for="node" attr.name="pagerank" attr.type="double"/>"#
            )?;
        }
        writeln!(
            w,
            r#"  <key id="weight" for="edge" attr.name="weight" attr.type="long"/>"#
        )?;
        writeln!(w, r#"  <graph id="G" edgedefault="directed">"#)?;
        for (id, domain) in self.domains.iter().enumerate() {
            write!(
                w,
                r#"    <node id="n{id}"><data key="label">{}</data>"#,
                xml_escape(domain)
            )?;
            if let Some(scores) = &self.scores {
                write!(w, r#"<data key="pagerank">{}</data>"#, scores[id])?;
            }
            writeln!(w, "</node>")?;
        }
        for &(src, dest, weight) in &self.edges {
            writeln!(
                w,
                r#"    <edge source="n{src}" target="n{dest}"><data key="weight">{weight}</data></edge>"#
            )?;
        }
        writeln!(w, "  </graph>")?;
        writeln!(w, "</graphml>")
    }
}

pub(crate) fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(rows: &[(&str, &str, u64)]) -> DomainWebgraphEdges {
        DomainWebgraphEdges {
            rows: rows
                .iter()
                .map(|(s, d, c)| (s.to_string(), d.to_string(), *c))
                .collect(),
            threshold_used: 0,
        }
    }

    #[test]
    fn build_from_single_edge() {
        let g = DomainGraph::from_edges(&edges(&[("a.com", "b.org", 6)]));
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].2, 6);
    }

    #[test]
    fn empty_graph() {
        let mut g = DomainGraph::from_edges(&edges(&[]));
        assert_eq!(g.node_count(), 0);
        assert!(g.compute_pagerank(&PagerankOptions::default()).is_empty());
    }

    #[test]
    fn dest_only_domain_is_a_node() {
        let g = DomainGraph::from_edges(&edges(&[("a.com", "sink.org", 1)]));
        assert!(g.node_id("sink.org").is_some());
    }

    #[test]
    fn three_node_cycle_is_uniform() {
        let mut g =
            DomainGraph::from_edges(&edges(&[("a", "b", 1), ("b", "c", 1), ("c", "a", 1)]));
        let scores = g.compute_pagerank(&PagerankOptions::default()).to_vec();
        for s in &scores {
            assert!((s - 1.0 / 3.0).abs() < 1e-6, "score {s}");
        }
        let total: f64 = scores.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_dangling_node_scores_one() {
        let mut g = DomainGraph::from_edges(&edges(&[]));
        // a lone node can only arise from a self-referential dataset; build
        // it directly
        g.domains.push("solo.example".to_string());
        g.index.insert("solo.example".to_string(), 0);
        let scores = g.compute_pagerank(&PagerankOptions::default());
        assert!((scores[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn self_loop_counts_both_directions() {
        let g = DomainGraph::from_edges(&edges(&[("a", "a", 2), ("a", "b", 1)]));
        let stats = g.degree_stats();
        let a = g.node_id("a").unwrap();
        let b = g.node_id("b").unwrap();
        assert_eq!(stats[a].out_degree, 2);
        assert_eq!(stats[a].in_degree, 1);
        assert_eq!(stats[a].weighted_out, 3);
        assert_eq!(stats[a].weighted_in, 2);
        assert_eq!(stats[b].in_degree, 1);
        assert_eq!(stats[b].weighted_in, 1);
    }

    #[test]
    fn degree_stats_single_edge() {
        let g = DomainGraph::from_edges(&edges(&[("a", "b", 6)]));
        let stats = g.degree_stats();
        let a = g.node_id("a").unwrap();
        let b = g.node_id("b").unwrap();
        assert_eq!((stats[a].out_degree, stats[a].weighted_out), (1, 6));
        assert_eq!((stats[b].in_degree, stats[b].weighted_in), (1, 6));
    }

    #[test]
    fn graphml_escapes_labels() {
        let mut g = DomainGraph::from_edges(&edges(&[("a&b.com", "c.org", 1)]));
        g.compute_pagerank(&PagerankOptions::default());
        let mut buf = Vec::new();
        g.render_graphml(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("a&amp;b.com"));
        assert!(!text.contains("a&b.com"));
        assert!(text.contains(r#"edgedefault="directed""#));
    }

    #[test]
    fn pagerank_weight_scale_invariance() {
        let base = [("a", "b", 3u64), ("b", "c", 2), ("c", "a", 7), ("a", "c", 1)];
        let scaled: Vec<(&str, &str, u64)> =
            base.iter().map(|&(s, d, c)| (s, d, c * 10)).collect();
        let mut g1 = DomainGraph::from_edges(&edges(&base));
        let mut g2 = DomainGraph::from_edges(&edges(&scaled));
        let s1 = g1.compute_pagerank(&PagerankOptions::default()).to_vec();
        let s2 = g2.compute_pagerank(&PagerankOptions::default()).to_vec();
        for (a, b) in s1.iter().zip(s2.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
