// SPDX-License-Identifier: Apache-2.0

//! Finite posets of equivalence classes with Hasse-diagram export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ops::Operation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetNode {
    pub key: String,
    pub representative: Operation,
    pub formula: Option<String>,
}

/// A partial order on class nodes, stored with both the full order and its
/// covering relation. Nodes are kept sorted by key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    clone: String,
    nodes: Vec<PosetNode>,
    leq: Vec<Vec<bool>>,
    covers: Vec<(usize, usize)>,
}

/// Differences between two posets, by key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PosetDiff {
    pub missing_nodes: Vec<String>,
    pub extra_nodes: Vec<String>,
    pub missing_edges: Vec<(String, String)>,
    pub extra_edges: Vec<(String, String)>,
}

impl PosetDiff {
    pub fn is_empty(&self) -> bool {
        self.missing_nodes.is_empty()
            && self.extra_nodes.is_empty()
            && self.missing_edges.is_empty()
            && self.extra_edges.is_empty()
    }
}

#[derive(Serialize)]
struct JsonNode<'a> {
    key: &'a str,
    representative: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    formula: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonPoset<'a> {
    clone: &'a str,
    nodes: Vec<JsonNode<'a>>,
    edges: Vec<(&'a str, &'a str)>,
}

impl Poset {
    /// Builds a poset from a full order relation, `leq[i][j]` meaning node
    /// `i` lies below node `j`.
    pub fn from_order(clone: &str, nodes: Vec<PosetNode>, leq: &[Vec<bool>]) -> Result<Poset> {
        let n = nodes.len();
        if leq.len() != n || leq.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(
                "order matrix does not match the node list".into(),
            ));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| nodes[a].key.cmp(&nodes[b].key));
        let keys: BTreeSet<&str> = nodes.iter().map(|v| v.key.as_str()).collect();
        if keys.len() != n {
            return Err(Error::InvalidArgument("duplicate node keys".into()));
        }
        let sorted_leq: Vec<Vec<bool>> = order
            .iter()
            .map(|&i| order.iter().map(|&j| leq[i][j]).collect())
            .collect();
        let mut slots: Vec<Option<PosetNode>> = nodes.into_iter().map(Some).collect();
        let nodes: Vec<PosetNode> = order
            .iter()
            .map(|&i| slots[i].take().expect("once"))
            .collect();
        for i in 0..n {
            if !sorted_leq[i][i] {
                return Err(Error::Consistency(format!(
                    "{} is not below itself",
                    nodes[i].key
                )));
            }
            for j in 0..n {
                if i != j && sorted_leq[i][j] && sorted_leq[j][i] {
                    return Err(Error::Consistency(format!(
                        "{} and {} are mutually below each other",
                        nodes[i].key, nodes[j].key
                    )));
                }
                for l in 0..n {
                    if sorted_leq[i][j] && sorted_leq[j][l] && !sorted_leq[i][l] {
                        return Err(Error::Consistency(format!(
                            "order is not transitive at {}, {}, {}",
                            nodes[i].key, nodes[j].key, nodes[l].key
                        )));
                    }
                }
            }
        }
        let covers = transitive_reduction(&sorted_leq);
        Ok(Poset {
            clone: clone.to_string(),
            nodes,
            leq: sorted_leq,
            covers,
        })
    }

    /// Builds a poset from covering pairs given by key.
    pub fn from_covers(
        clone: &str,
        nodes: Vec<PosetNode>,
        covers: &[(&str, &str)],
    ) -> Result<Poset> {
        let n = nodes.len();
        let index: BTreeMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, v)| (v.key.as_str(), i))
            .collect();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(lo, hi) in covers {
            let (Some(&a), Some(&b)) = (index.get(lo), index.get(hi)) else {
                return Err(Error::InvalidArgument(format!(
                    "edge {lo} < {hi} names an unknown node"
                )));
            };
            leq[a][b] = true;
        }
        for m in 0..n {
            let through = leq[m].clone();
            for row in leq.iter_mut().filter(|row| row[m]) {
                for (cell, &x) in row.iter_mut().zip(&through) {
                    *cell |= x;
                }
            }
        }
        let poset = Poset::from_order(clone, nodes, &leq)?;
        if poset.edge_keys().len() != covers.len() {
            return Err(Error::Consistency(
                "listed edges are not a covering relation".into(),
            ));
        }
        Ok(poset)
    }

    pub fn clone_name(&self) -> &str {
        &self.clone
    }

    pub fn nodes(&self) -> &[PosetNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.nodes
            .binary_search_by(|v| v.key.as_str().cmp(key))
            .ok()
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    /// Covering pairs `(lower, upper)` as node indices, sorted.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn edge_keys(&self) -> Vec<(String, String)> {
        self.covers
            .iter()
            .map(|&(a, b)| (self.nodes[a].key.clone(), self.nodes[b].key.clone()))
            .collect()
    }

    /// Length of the longest chain ending at each node.
    pub fn heights(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut below: Vec<usize> = (0..n)
            .map(|j| (0..n).filter(|&i| i != j && self.leq[i][j]).count())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| below[i]);
        below.iter_mut().for_each(|h| *h = 0);
        for &j in &order {
            for &(a, b) in &self.covers {
                if b == j {
                    below[j] = below[j].max(below[a] + 1);
                }
            }
        }
        below
    }

    /// Connected components of the Hasse diagram, as sorted key lists.
    pub fn components(&self) -> Vec<Vec<String>> {
        let n = self.nodes.len();
        let mut label: Vec<usize> = (0..n).collect();
        fn root(label: &mut [usize], mut x: usize) -> usize {
            while label[x] != x {
                label[x] = label[label[x]];
                x = label[x];
            }
            x
        }
        for &(a, b) in &self.covers {
            let (ra, rb) = (root(&mut label, a), root(&mut label, b));
            label[ra.max(rb)] = ra.min(rb);
        }
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for i in 0..n {
            let r = root(&mut label, i);
            groups.entry(r).or_default().push(self.nodes[i].key.clone());
        }
        groups.into_values().collect()
    }

    /// Node and covering-edge differences, `self` being the expected side.
    pub fn diff(&self, actual: &Poset) -> PosetDiff {
        let mine: BTreeSet<&str> = self.nodes.iter().map(|v| v.key.as_str()).collect();
        let theirs: BTreeSet<&str> = actual.nodes.iter().map(|v| v.key.as_str()).collect();
        let my_edges: BTreeSet<(String, String)> = self.edge_keys().into_iter().collect();
        let their_edges: BTreeSet<(String, String)> = actual.edge_keys().into_iter().collect();
        PosetDiff {
            missing_nodes: mine.difference(&theirs).map(|s| s.to_string()).collect(),
            extra_nodes: theirs.difference(&mine).map(|s| s.to_string()).collect(),
            missing_edges: my_edges.difference(&their_edges).cloned().collect(),
            extra_edges: their_edges.difference(&my_edges).cloned().collect(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = JsonPoset {
            clone: &self.clone,
            nodes: self
                .nodes
                .iter()
                .map(|v| JsonNode {
                    key: &v.key,
                    representative: v.representative.to_string(),
                    formula: v.formula.as_deref(),
                })
                .collect(),
            edges: self
                .covers
                .iter()
                .map(|&(a, b)| (self.nodes[a].key.as_str(), self.nodes[b].key.as_str()))
                .collect(),
        };
        serde_json::to_value(doc).expect("plain data")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("plain data")
    }

    /// Graphviz source, drawn bottom to top.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {} {{", quote(&self.clone));
        out.push_str("  rankdir=BT;\n  node [shape=ellipse];\n");
        for v in &self.nodes {
            let caption = match &v.formula {
                Some(f) => format!("{}\n{}", v.key, f),
                None => format!("{}\n{}", v.key, v.representative),
            };
            let _ = writeln!(out, "  {} [label={}];", quote(&v.key), quote(&caption));
        }
        for &(a, b) in &self.covers {
            let _ = writeln!(
                out,
                "  {} -> {};",
                quote(&self.nodes[a].key),
                quote(&self.nodes[b].key)
            );
        }
        out.push_str("}\n");
        out
    }
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for ch in s.chars() {
        match ch {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

/// Covering pairs of a reflexive partial order given as a matrix.
pub fn transitive_reduction(leq: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let n = leq.len();
    let mut covers = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !leq[i][j] {
                continue;
            }
            let between = (0..n).any(|m| m != i && m != j && leq[i][m] && leq[m][j]);
            if !between {
                covers.push((i, j));
            }
        }
    }
    covers
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(key: &str) -> PosetNode {
        PosetNode {
            key: key.into(),
            representative: Operation::identity(2).unwrap(),
            formula: None,
        }
    }

    fn chain() -> Poset {
        // c < b < a, given out of order
        let leq = vec![
            vec![true, false, false],
            vec![true, true, false],
            vec![true, true, true],
        ];
        Poset::from_order("X", vec![node("a"), node("b"), node("c")], &leq).unwrap()
    }

    #[test]
    fn reduction_drops_implied_pairs() {
        let p = chain();
        assert_eq!(
            p.edge_keys(),
            vec![("b".into(), "a".into()), ("c".into(), "b".into())]
        );
        assert_eq!(p.heights(), vec![2, 1, 0]);
        assert_eq!(p.components().len(), 1);
        assert!(p.le(2, 0));
    }

    #[test]
    fn rejects_non_orders() {
        let cyc = vec![vec![true, true], vec![true, true]];
        assert!(Poset::from_order("X", vec![node("a"), node("b")], &cyc).is_err());
        let bad = vec![vec![false]];
        assert!(Poset::from_order("X", vec![node("a")], &bad).is_err());
        assert!(Poset::from_covers("X", vec![node("a"), node("b")], &[("a", "q")]).is_err());
        let redundant = [("c", "b"), ("b", "a"), ("c", "a")];
        assert!(
            Poset::from_covers("X", vec![node("a"), node("b"), node("c")], &redundant).is_err()
        );
    }

    #[test]
    fn covers_round_trip_and_diff() {
        let p = Poset::from_covers(
            "X",
            vec![node("a"), node("b"), node("c")],
            &[("c", "b"), ("b", "a")],
        )
        .unwrap();
        assert!(chain().diff(&p).is_empty());
        let q =
            Poset::from_covers("X", vec![node("a"), node("b"), node("c")], &[("c", "a")]).unwrap();
        let d = p.diff(&q);
        assert_eq!(d.extra_edges, vec![("c".into(), "a".into())]);
        assert_eq!(d.missing_edges.len(), 2);
        assert_eq!(
            q.components(),
            vec![
                vec!["a".to_string(), "c".to_string()],
                vec!["b".to_string()]
            ]
        );
    }

    #[test]
    fn exports() {
        let p = chain();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 3);
        assert_eq!(v["edges"][0], serde_json::json!(["b", "a"]));
        let dot = p.to_dot();
        assert!(dot.starts_with("digraph \"X\" {"));
        assert!(dot.contains("\"c\" -> \"b\";"));
        assert!(dot.contains("rankdir=BT"));
        assert_eq!(quote("F{0}^{\"}"), "\"F{0}^{\\\"}\"");
    }
}
