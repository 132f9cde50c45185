//! Whitehead graphs on the `2n` letters and their connectivity.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::words::{check_rank, CyclicWord, Letter};

/// Simple undirected graph on the letters `x1, x1⁻¹, …, xn, xn⁻¹`, stored
/// as adjacency bitmasks indexed by letter ordinal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WhiteheadGraph {
    rank: usize,
    adjacency: Vec<u64>,
}

impl WhiteheadGraph {
    pub fn empty(rank: usize) -> Result<WhiteheadGraph> {
        check_rank(rank)?;
        Ok(WhiteheadGraph {
            rank,
            adjacency: vec![0; 2 * rank],
        })
    }

    pub fn from_edges(rank: usize, edges: &[(Letter, Letter)]) -> Result<WhiteheadGraph> {
        let mut w = WhiteheadGraph::empty(rank)?;
        for &(x, y) in edges {
            w.try_add_edge(x, y)?;
        }
        Ok(w)
    }

    /// Complete graph on `letters`.
    pub fn complete_on(rank: usize, letters: &[Letter]) -> Result<WhiteheadGraph> {
        let mut w = WhiteheadGraph::empty(rank)?;
        for (i, &x) in letters.iter().enumerate() {
            for &y in &letters[i + 1..] {
                w.try_add_edge(x, y)?;
            }
        }
        Ok(w)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.rank
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        Letter::all(self.rank)
    }

    fn try_add_edge(&mut self, x: Letter, y: Letter) -> Result<()> {
        for l in [x, y] {
            if l.index() > self.rank {
                return Err(Error::RankExceeded {
                    index: l.index(),
                    rank: self.rank,
                });
            }
        }
        self.add_edge(x, y);
        Ok(())
    }

    /// Self-loops are ignored.
    pub(crate) fn add_edge(&mut self, x: Letter, y: Letter) {
        if x == y {
            return;
        }
        self.adjacency[x.ordinal()] |= 1 << y.ordinal();
        self.adjacency[y.ordinal()] |= 1 << x.ordinal();
    }

    pub fn has_edge(&self, x: Letter, y: Letter) -> bool {
        self.adjacency[x.ordinal()] >> y.ordinal() & 1 == 1
    }

    pub fn neighbors(&self, x: Letter) -> impl Iterator<Item = Letter> + '_ {
        let mask = self.adjacency[x.ordinal()];
        (0..2 * self.rank)
            .filter(move |&j| mask >> j & 1 == 1)
            .map(Letter::from_ordinal)
    }

    /// Edges `(x, y)` with `x < y`, sorted.
    pub fn edges(&self) -> Vec<(Letter, Letter)> {
        let mut out = Vec::new();
        for i in 0..2 * self.rank {
            for j in i + 1..2 * self.rank {
                if self.adjacency[i] >> j & 1 == 1 {
                    out.push((Letter::from_ordinal(i), Letter::from_ordinal(j)));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency
            .iter()
            .map(|m| m.count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    pub fn union(&self, other: &WhiteheadGraph) -> Result<WhiteheadGraph> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(WhiteheadGraph {
            rank: self.rank,
            adjacency: self
                .adjacency
                .iter()
                .zip(&other.adjacency)
                .map(|(a, b)| a | b)
                .collect(),
        })
    }

    /// Edge set of `self` contained in that of `other`.
    pub fn is_subgraph_of(&self, other: &WhiteheadGraph) -> Result<bool> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(self
            .adjacency
            .iter()
            .zip(&other.adjacency)
            .all(|(a, b)| a & !b == 0))
    }

    /// Components as sorted letter lists, ordered by least letter.
    pub fn components(&self) -> Vec<Vec<Letter>> {
        self.components_without(None)
    }

    /// Components of the graph with `removed` deleted.
    pub fn components_without(&self, removed: Option<Letter>) -> Vec<Vec<Letter>> {
        let n = 2 * self.rank;
        let mut seen = vec![false; n];
        if let Some(r) = removed {
            seen[r.ordinal()] = true;
        }
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for w in 0..n {
                    if self.adjacency[v] >> w & 1 == 1 && !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort();
            out.push(comp.into_iter().map(Letter::from_ordinal).collect());
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Articulation points, by a depth-first lowpoint traversal.
    pub fn cut_vertices(&self) -> Vec<Letter> {
        let n = 2 * self.rank;
        let mut order = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut is_cut = vec![false; n];
        let mut counter = 0;
        for root in 0..n {
            if order[root] != usize::MAX {
                continue;
            }
            order[root] = counter;
            low[root] = counter;
            counter += 1;
            let mut root_children = 0;
            // (vertex, parent, next neighbor to try)
            let mut stack = vec![(root, usize::MAX, 0usize)];
            while let Some(&mut (v, parent, ref mut next)) = stack.last_mut() {
                if *next < n {
                    let w = *next;
                    *next += 1;
                    if self.adjacency[v] >> w & 1 == 0 || w == parent {
                        continue;
                    }
                    if order[w] == usize::MAX {
                        order[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        if v == root {
                            root_children += 1;
                        }
                        stack.push((w, v, 0));
                    } else {
                        low[v] = low[v].min(order[w]);
                    }
                } else {
                    stack.pop();
                    if parent != usize::MAX {
                        low[parent] = low[parent].min(low[v]);
                        if parent != root && low[v] >= order[parent] {
                            is_cut[parent] = true;
                        }
                    }
                }
            }
            is_cut[root] = root_children >= 2;
        }
        (0..n)
            .filter(|&i| is_cut[i])
            .map(Letter::from_ordinal)
            .collect()
    }

    /// A spanning forest as a list of tree edges, optionally avoiding one
    /// vertex. Breadth-first from the least letter of each component.
    pub fn spanning_forest(&self, removed: Option<Letter>) -> Vec<(Letter, Letter)> {
        let n = 2 * self.rank;
        let mut seen = vec![false; n];
        if let Some(r) = removed {
            seen[r.ordinal()] = true;
        }
        let mut tree = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for w in 0..n {
                    if self.adjacency[v] >> w & 1 == 1 && !seen[w] {
                        seen[w] = true;
                        tree.push((Letter::from_ordinal(v), Letter::from_ordinal(w)));
                        queue.push_back(w);
                    }
                }
            }
        }
        tree
    }

    /// Text report line describing connectivity.
    pub fn status(&self) -> String {
        let comps = self.components().len();
        if comps > 1 {
            return format!("disconnected ({comps} components)");
        }
        let cuts = self.cut_vertices();
        if cuts.is_empty() {
            "connected; no cut vertex".to_string()
        } else {
            format!("connected; cut vertices: {}", join_letters(&cuts))
        }
    }

    pub fn to_dot(&self, name: &str) -> String {
        let cuts = self.cut_vertices();
        let mut s = format!("graph {name} {{\n  node [shape=circle];\n");
        for (i, comp) in self.components().iter().enumerate() {
            writeln!(s, "  subgraph cluster_{i} {{").unwrap();
            for &l in comp {
                let shape = if cuts.contains(&l) {
                    " shape=doublecircle"
                } else {
                    ""
                };
                writeln!(s, "    {} [label=\"{l}\"{shape}];", dot_id(l)).unwrap();
            }
            s.push_str("  }\n");
        }
        for (x, y) in self.edges() {
            writeln!(s, "  {} -- {};", dot_id(x), dot_id(y)).unwrap();
        }
        s.push_str("}\n");
        s
    }
}

fn dot_id(l: Letter) -> String {
    format!("{}{}", if l.is_inverted() { "X" } else { "x" }, l.index())
}

pub(crate) fn join_letters(letters: &[Letter]) -> String {
    letters
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Debug for WhiteheadGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Wh[rank {}:", self.rank)?;
        for (x, y) in self.edges() {
            write!(f, " {x}{y}")?;
        }
        write!(f, "]")
    }
}

/// `Wh(Γ)`: for every pair of distinct directed edges ending at a common
/// vertex with distinct labels `x`, `y`, the edge `{x, y}`.
pub fn wh_of_graph(g: &LabeledGraph) -> WhiteheadGraph {
    let mut w = WhiteheadGraph::empty(g.rank()).expect("graph rank is valid");
    for v in g.vertices() {
        let incoming: Vec<Letter> = g.in_edges(v).iter().map(|&d| g.label(d)).collect();
        for (i, &x) in incoming.iter().enumerate() {
            for &y in &incoming[i + 1..] {
                w.add_edge(x, y);
            }
        }
    }
    w
}

/// `Wh(S)`: for each cyclically consecutive pair `(u, v)` of each word, the
/// edge `{u, v⁻¹}`.
pub fn wh_of_set(rank: usize, set: &[CyclicWord]) -> Result<WhiteheadGraph> {
    let mut w = WhiteheadGraph::empty(rank)?;
    for c in set {
        if c.rank() != rank {
            return Err(Error::RankMismatch {
                left: rank,
                right: c.rank(),
            });
        }
        for (u, v) in c.cyclic_pairs() {
            w.add_edge(u, v.inverse());
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{circuit, rose, DirEdge, EdgeId};

    fn l(c: char) -> Letter {
        Letter::from_char(c).unwrap()
    }

    fn edges(spec: &str) -> Vec<(Letter, Letter)> {
        spec.split_whitespace()
            .map(|p| {
                let mut cs = p.chars();
                let (x, y) = (l(cs.next().unwrap()), l(cs.next().unwrap()));
                (x.min(y), x.max(y))
            })
            .collect()
    }

    fn sorted(mut v: Vec<(Letter, Letter)>) -> Vec<(Letter, Letter)> {
        v.sort();
        v
    }

    fn set(words: &[&str], rank: usize) -> WhiteheadGraph {
        let ws: Vec<CyclicWord> = words
            .iter()
            .map(|w| CyclicWord::parse(w, rank).unwrap())
            .collect();
        wh_of_set(rank, &ws).unwrap()
    }

    /// Delete each vertex and recount components of its own component.
    fn brute_cut_vertices(w: &WhiteheadGraph) -> Vec<Letter> {
        let comps = w.components();
        w.letters()
            .filter(|&x| {
                let own = comps.iter().find(|c| c.contains(&x)).unwrap();
                let after = w.components_without(Some(x));
                let pieces = after
                    .iter()
                    .filter(|c| c.iter().any(|y| own.contains(y)))
                    .count();
                pieces > 1
            })
            .collect()
    }

    #[test]
    fn rose_gives_complete_graph() {
        let w = wh_of_graph(&rose(2).unwrap());
        assert_eq!(w.edge_count(), 6);
    }

    #[test]
    fn circuit_ab() {
        let w = wh_of_graph(&circuit(&CyclicWord::parse("ab", 2).unwrap()));
        assert_eq!(w.edges(), sorted(edges("aB bA")));
    }

    #[test]
    fn parallel_equal_labels_add_nothing() {
        // two a-edges p→q: both end at q with label a, giving only a·a⁻¹
        let mut g = LabeledGraph::new(2).unwrap();
        let p = g.add_vertex();
        let q = g.add_vertex();
        g.add_edge(p, q, l('a')).unwrap();
        g.add_edge(p, q, l('a')).unwrap();
        assert_eq!(wh_of_graph(&g).edge_count(), 0);
        assert_eq!(g.label(DirEdge::backward(EdgeId(0))), l('A'));
    }

    #[test]
    fn set_examples() {
        assert_eq!(set(&["a"], 2).edges(), edges("aA"));
        assert_eq!(set(&["abAB"], 2).edges(), sorted(edges("aB ab bA AB")));
        assert_eq!(set(&["aab"], 2).edges(), sorted(edges("aA aB bA")));
    }

    #[test]
    fn components_examples() {
        assert_eq!(
            set(&["a"], 2).components(),
            vec![vec![l('a'), l('A')], vec![l('b')], vec![l('B')]]
        );
        assert_eq!(set(&["abAB"], 2).components().len(), 1);
        assert_eq!(WhiteheadGraph::empty(3).unwrap().components().len(), 6);
    }

    #[test]
    fn cut_vertex_examples() {
        assert!(set(&["abAB"], 2).cut_vertices().is_empty());
        assert_eq!(set(&["aab"], 2).cut_vertices(), vec![l('a'), l('A')]);
        assert!(WhiteheadGraph::empty(2).unwrap().cut_vertices().is_empty());
    }

    #[test]
    fn subgraph_checks() {
        let aab = set(&["aab"], 2);
        let full = wh_of_graph(&rose(2).unwrap());
        assert!(aab.is_subgraph_of(&full).unwrap());
        assert!(!full.is_subgraph_of(&aab).unwrap());
        let other = WhiteheadGraph::empty(3).unwrap();
        assert!(aab.is_subgraph_of(&other).is_err());
    }

    #[test]
    fn status_lines() {
        assert_eq!(set(&["abAB"], 2).status(), "connected; no cut vertex");
        assert_eq!(set(&["a"], 2).status(), "disconnected (3 components)");
        assert_eq!(set(&["aab"], 2).status(), "connected; cut vertices: a A");
    }

    use proptest::prelude::*;

    fn arb_wh(rank: usize) -> impl Strategy<Value = WhiteheadGraph> {
        let n = 2 * rank;
        prop::collection::vec((0..n, 0..n), 0..(2 * n)).prop_map(move |pairs| {
            let mut w = WhiteheadGraph::empty(rank).unwrap();
            for (i, j) in pairs {
                w.add_edge(Letter::from_ordinal(i), Letter::from_ordinal(j));
            }
            w
        })
    }

    proptest! {
        #[test]
        fn cut_vertices_match_brute_force(w in (2usize..=6).prop_flat_map(arb_wh)) {
            prop_assert_eq!(w.cut_vertices(), brute_cut_vertices(&w));
        }

        #[test]
        fn spanning_forest_spans(w in arb_wh(4)) {
            let forest = w.spanning_forest(None);
            prop_assert_eq!(forest.len(), 8 - w.components().len());
            prop_assert!(forest.iter().all(|&(x, y)| w.has_edge(x, y)));
        }
    }
}
