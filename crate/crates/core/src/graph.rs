//! Dependence graphs read off the mean reversion speed.
//!
//! Entry `b_ij` of `B` says how the level of `X^j` drives the change of
//! `X^i`, so a nonzero `b_ij` is the edge `X^j -> X^i` (a self-loop when
//! `i == j`).

use std::fmt::Write as _;

use crate::matkit::Matrix;
use crate::model::OuModel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependenceGraph {
    labels: Vec<String>,
    /// `(from, to)` pairs of 0-based node indices, in row-major order of `B`.
    edges: Vec<(usize, usize)>,
}

impl DependenceGraph {
    /// Edge `j -> i` for every `|b_ij| > tol`, listed in row-major order.
    pub fn from_speed(speed: &Matrix, labels: &[String], tol: f64) -> Self {
        assert!(speed.is_square() && speed.rows() == labels.len());
        let n = labels.len();
        let edges = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| speed[(i, j)].abs() > tol)
            .map(|(i, j)| (j, i))
            .collect();
        Self {
            labels: labels.to_vec(),
            edges,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges as `(from, to)` label pairs.
    pub fn labeled_edges(&self) -> Vec<(&str, &str)> {
        self.edges
            .iter()
            .map(|&(f, t)| (self.labels[f].as_str(), self.labels[t].as_str()))
            .collect()
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.labeled_edges().contains(&(from, to))
    }

    /// The graph on all `p` nodes after pinning 1-based node `m`: the pinned
    /// node loses its incoming edges and its self-loop but keeps its outgoing
    /// edges.
    pub fn with_intervention(&self, m: usize) -> Self {
        assert!(m >= 1 && m <= self.labels.len(), "node {m} out of range");
        let node = m - 1;
        Self {
            labels: self.labels.clone(),
            edges: self.edges.iter().copied().filter(|&(_, to)| to != node).collect(),
        }
    }

    /// Graphviz rendering: one node statement per label in label order, then
    /// the edges in row-major order, self-loops written as explicit edges.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n");
        for l in &self.labels {
            let _ = writeln!(out, "  {};", quote(l));
        }
        for (f, t) in self.labeled_edges() {
            let _ = writeln!(out, "  {} -> {};", quote(f), quote(t));
        }
        out.push_str("}\n");
        out
    }
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for ch in s.chars() {
        if ch == '"' || ch == '\\' {
            q.push('\\');
        }
        q.push(ch);
    }
    q.push('"');
    q
}

/// Dependence graph of a model with threshold `tol` (0 for structural zeros).
pub fn dependence_graph(model: &OuModel, tol: f64) -> DependenceGraph {
    DependenceGraph::from_speed(model.speed(), model.labels(), tol)
}
