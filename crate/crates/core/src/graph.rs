//! Finite labeled graphs over the letters of `F_n`.
//!
//! Each edge pair `{e, e⁻¹}` is stored once, oriented so that its label is a
//! positive letter; the reverse orientation carries the inverse label. Loops
//! and multiple edges are allowed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::folding;
use crate::words::{check_rank, CyclicWord, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One orientation of a stored edge pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirEdge {
    pub edge: EdgeId,
    pub reversed: bool,
}

impl DirEdge {
    pub fn forward(edge: EdgeId) -> DirEdge {
        DirEdge {
            edge,
            reversed: false,
        }
    }

    pub fn backward(edge: EdgeId) -> DirEdge {
        DirEdge {
            edge,
            reversed: true,
        }
    }

    pub fn inverse(self) -> DirEdge {
        DirEdge {
            edge: self.edge,
            reversed: !self.reversed,
        }
    }

    pub fn parse(text: &str) -> Option<DirEdge> {
        let (id, reversed) = match text.as_bytes().last()? {
            b'+' => (&text[..text.len() - 1], false),
            b'-' => (&text[..text.len() - 1], true),
            _ => return None,
        };
        Some(DirEdge {
            edge: EdgeId(id.parse().ok()?),
            reversed,
        })
    }
}

impl fmt::Display for DirEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.edge, if self.reversed { '-' } else { '+' })
    }
}

/// A stored edge pair in its positive orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub origin: VertexId,
    pub terminus: VertexId,
    pub label: Letter,
}

#[derive(Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    rank: usize,
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, Edge>,
}

impl LabeledGraph {
    pub fn new(rank: usize) -> Result<LabeledGraph> {
        check_rank(rank)?;
        Ok(LabeledGraph {
            rank,
            vertices: BTreeSet::new(),
            edges: BTreeMap::new(),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let id = VertexId(self.vertices.last().map_or(0, |v| v.0 + 1));
        self.vertices.insert(id);
        id
    }

    pub fn add_vertex_with_id(&mut self, id: VertexId) -> Result<()> {
        if !self.vertices.insert(id) {
            return Err(Error::DuplicateId(id.0));
        }
        Ok(())
    }

    /// Adds the pair for a directed edge `from → to` labeled `label`.
    pub fn add_edge(&mut self, from: VertexId, to: VertexId, label: Letter) -> Result<EdgeId> {
        let id = EdgeId(self.edges.keys().last().map_or(0, |e| e.0 + 1));
        self.add_edge_with_id(id, from, to, label)?;
        Ok(id)
    }

    pub fn add_edge_with_id(
        &mut self,
        id: EdgeId,
        from: VertexId,
        to: VertexId,
        label: Letter,
    ) -> Result<()> {
        for v in [from, to] {
            if !self.vertices.contains(&v) {
                return Err(Error::UnknownVertex(v.0));
            }
        }
        if label.index() > self.rank {
            return Err(Error::RankExceeded {
                index: label.index(),
                rank: self.rank,
            });
        }
        if self.edges.contains_key(&id) {
            return Err(Error::DuplicateId(id.0));
        }
        let edge = if label.is_inverted() {
            Edge {
                origin: to,
                terminus: from,
                label: label.inverse(),
            }
        } else {
            Edge {
                origin: from,
                terminus: to,
                label,
            }
        };
        self.edges.insert(id, edge);
        Ok(())
    }

    pub(crate) fn remove_edge(&mut self, id: EdgeId) {
        self.edges.remove(&id);
    }

    /// Removes `v` and every edge pair incident to it.
    pub fn remove_vertex(&mut self, v: VertexId) {
        self.vertices.remove(&v);
        self.edges.retain(|_, e| e.origin != v && e.terminus != v);
    }

    /// Redirects every endpoint at `from` to `to` and deletes `from`.
    pub(crate) fn merge_vertex(&mut self, from: VertexId, to: VertexId) {
        for e in self.edges.values_mut() {
            if e.origin == from {
                e.origin = to;
            }
            if e.terminus == from {
                e.terminus = to;
            }
        }
        self.vertices.remove(&from);
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_pair_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, Edge)> + '_ {
        self.edges.iter().map(|(&id, &e)| (id, e))
    }

    pub fn edge(&self, id: EdgeId) -> Option<Edge> {
        self.edges.get(&id).copied()
    }

    pub fn origin(&self, d: DirEdge) -> VertexId {
        let e = self.edges[&d.edge];
        if d.reversed {
            e.terminus
        } else {
            e.origin
        }
    }

    pub fn terminus(&self, d: DirEdge) -> VertexId {
        self.origin(d.inverse())
    }

    pub fn label(&self, d: DirEdge) -> Letter {
        let l = self.edges[&d.edge].label;
        if d.reversed {
            l.inverse()
        } else {
            l
        }
    }

    /// Both orientations of every edge pair, ordered by `(edge id, reversed)`.
    pub fn directed_edges(&self) -> impl Iterator<Item = DirEdge> + '_ {
        self.edges
            .keys()
            .flat_map(|&e| [DirEdge::forward(e), DirEdge::backward(e)])
    }

    /// Directed edges starting at `v`, ordered by `(edge id, reversed)`.
    /// A loop contributes both of its orientations.
    pub fn out_edges(&self, v: VertexId) -> Vec<DirEdge> {
        self.directed_edges()
            .filter(|&d| self.origin(d) == v)
            .collect()
    }

    /// Directed edges ending at `v`.
    pub fn in_edges(&self, v: VertexId) -> Vec<DirEdge> {
        self.directed_edges()
            .filter(|&d| self.terminus(d) == v)
            .collect()
    }

    /// Valence with loops counted twice.
    pub fn valence(&self, v: VertexId) -> usize {
        self.edges
            .values()
            .map(|e| (e.origin == v) as usize + (e.terminus == v) as usize)
            .sum()
    }

    /// Connected components, each sorted, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut adjacency: BTreeMap<VertexId, Vec<VertexId>> =
            self.vertices.iter().map(|&v| (v, Vec::new())).collect();
        for e in self.edges.values() {
            adjacency.get_mut(&e.origin).unwrap().push(e.terminus);
            adjacency.get_mut(&e.terminus).unwrap().push(e.origin);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in &self.vertices {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adjacency[&v] {
                    if seen.insert(w) {
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// First Betti number: edge pairs − vertices + components.
    pub fn betti(&self) -> usize {
        self.edges.len() + self.components().len() - self.vertices.len()
    }

    pub fn is_core(&self) -> bool {
        self.vertices.iter().all(|&v| self.valence(v) >= 2)
    }

    /// Maximal subgraph without vertices of valence 0 or 1.
    pub fn core(&self) -> LabeledGraph {
        self.prune(None)
    }

    fn prune(&self, keep: Option<VertexId>) -> LabeledGraph {
        let mut g = self.clone();
        loop {
            let doomed: Vec<VertexId> = g
                .vertices()
                .filter(|&v| Some(v) != keep && g.valence(v) <= 1)
                .collect();
            if doomed.is_empty() {
                return g;
            }
            for v in doomed {
                g.remove_vertex(v);
            }
        }
    }

    /// Exactly one vertex and each letter on exactly one edge pair.
    pub fn is_rose(&self) -> bool {
        if self.vertices.len() != 1 || self.edges.len() != self.rank {
            return false;
        }
        let labels: BTreeSet<usize> = self.edges.values().map(|e| e.label.index()).collect();
        labels.len() == self.rank
    }

    /// No vertex has two distinct outgoing directed edges with equal label.
    pub fn is_folded(&self) -> bool {
        folding::find_foldable_pair(self).is_none()
    }

    /// Disjoint union with `other`'s ids shifted past ours. Returns the
    /// union and the vertex and edge offsets applied to `other`.
    pub fn disjoint_union(&self, other: &LabeledGraph) -> Result<(LabeledGraph, u32, u32)> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        let voff = self.vertices.last().map_or(0, |v| v.0 + 1);
        let eoff = self.edges.keys().last().map_or(0, |e| e.0 + 1);
        let mut g = self.clone();
        for v in other.vertices() {
            g.vertices.insert(VertexId(v.0 + voff));
        }
        for (id, e) in other.edges() {
            g.edges.insert(
                EdgeId(id.0 + eoff),
                Edge {
                    origin: VertexId(e.origin.0 + voff),
                    terminus: VertexId(e.terminus.0 + voff),
                    label: e.label,
                },
            );
        }
        Ok((g, voff, eoff))
    }

    /// Renumbers vertices and edges to `0..` preserving order.
    pub fn compacted(&self) -> LabeledGraph {
        let vmap: BTreeMap<VertexId, VertexId> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, VertexId(i as u32)))
            .collect();
        LabeledGraph {
            rank: self.rank,
            vertices: vmap.values().copied().collect(),
            edges: self
                .edges
                .values()
                .enumerate()
                .map(|(i, e)| {
                    (
                        EdgeId(i as u32),
                        Edge {
                            origin: vmap[&e.origin],
                            terminus: vmap[&e.terminus],
                            label: e.label,
                        },
                    )
                })
                .collect(),
        }
    }

    /// Line-based text form: `rank n`, `vertex <id>`, `edge <id> <from> <to> <label>`.
    pub fn to_text(&self) -> String {
        let mut s = format!("rank {}\n", self.rank);
        self.write_body(&mut s);
        s
    }

    pub(crate) fn write_body(&self, s: &mut String) {
        for v in &self.vertices {
            writeln!(s, "vertex {v}").unwrap();
        }
        for (id, e) in &self.edges {
            writeln!(s, "edge {id} {} {} {}", e.origin, e.terminus, e.label).unwrap();
        }
    }

    pub fn parse_text(text: &str) -> Result<LabeledGraph> {
        Ok(parse_graph_lines(text.lines().enumerate(), None)?.0)
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph {name} {{\n  node [shape=circle];\n");
        self.write_dot_body(&mut s, "  ", "");
        s.push_str("}\n");
        s
    }

    pub(crate) fn write_dot_body(&self, s: &mut String, indent: &str, prefix: &str) {
        for v in &self.vertices {
            writeln!(s, "{indent}{prefix}v{v} [label=\"{v}\"];").unwrap();
        }
        for (id, e) in &self.edges {
            writeln!(
                s,
                "{indent}{prefix}v{} -> {prefix}v{} [label=\"{}\", tooltip=\"e{id}\"];",
                e.origin, e.terminus, e.label
            )
            .unwrap();
        }
    }
}

impl fmt::Debug for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// Parses graph lines. `rank` is required unless supplied by the caller;
/// a `base <id>` line is returned when present. Blank lines and `#`
/// comments are skipped.
pub(crate) fn parse_graph_lines<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    rank: Option<usize>,
) -> Result<(LabeledGraph, Option<VertexId>)> {
    let mut graph = match rank {
        Some(r) => Some(LabeledGraph::new(r)?),
        None => None,
    };
    let mut base = None;
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| -> Result<u32> {
            s.parse()
                .map_err(|_| Error::format(line_no, format!("bad number {s:?}")))
        };
        match parts.as_slice() {
            ["rank", n] if graph.is_none() => {
                let n = num(n)? as usize;
                graph =
                    Some(LabeledGraph::new(n).map_err(|e| Error::format(line_no, e.to_string()))?);
            }
            _ => {
                let g = graph
                    .as_mut()
                    .ok_or_else(|| Error::format(line_no, "expected `rank n` first"))?;
                match parts.as_slice() {
                    ["vertex", id] => g
                        .add_vertex_with_id(VertexId(num(id)?))
                        .map_err(|e| Error::format(line_no, e.to_string()))?,
                    ["edge", id, from, to, label] => {
                        let mut chars = label.chars();
                        let letter = match (chars.next().and_then(Letter::from_char), chars.next())
                        {
                            (Some(l), None) => l,
                            _ => {
                                return Err(Error::format(line_no, format!("bad label {label:?}")))
                            }
                        };
                        g.add_edge_with_id(
                            EdgeId(num(id)?),
                            VertexId(num(from)?),
                            VertexId(num(to)?),
                            letter,
                        )
                        .map_err(|e| Error::format(line_no, e.to_string()))?;
                    }
                    ["base", id] => base = Some(VertexId(num(id)?)),
                    _ => {
                        return Err(Error::format(
                            line_no,
                            format!("unrecognized line {line:?}"),
                        ))
                    }
                }
            }
        }
    }
    let graph = graph.ok_or_else(|| Error::format(0, "missing `rank n` line"))?;
    if let Some(b) = base {
        if !graph.has_vertex(b) {
            return Err(Error::UnknownVertex(b.0));
        }
    }
    Ok((graph, base))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasedGraph {
    pub graph: LabeledGraph,
    pub basepoint: VertexId,
}

impl BasedGraph {
    pub fn new(graph: LabeledGraph, basepoint: VertexId) -> Result<BasedGraph> {
        if !graph.has_vertex(basepoint) {
            return Err(Error::UnknownVertex(basepoint.0));
        }
        Ok(BasedGraph { graph, basepoint })
    }

    /// The component of the basepoint, pruned of valence-1 vertices other
    /// than the basepoint.
    pub fn core_pair(&self) -> BasedGraph {
        let comp: BTreeSet<VertexId> = self
            .graph
            .components()
            .into_iter()
            .find(|c| c.contains(&self.basepoint))
            .expect("basepoint is a vertex")
            .into_iter()
            .collect();
        let mut g = self.graph.clone();
        let others: Vec<VertexId> = g.vertices().filter(|v| !comp.contains(v)).collect();
        for v in others {
            g.remove_vertex(v);
        }
        BasedGraph {
            graph: g.prune(Some(self.basepoint)),
            basepoint: self.basepoint,
        }
    }

    pub fn is_core_pair(&self) -> bool {
        self.graph.is_connected()
            && self
                .graph
                .vertices()
                .all(|v| v == self.basepoint || self.graph.valence(v) >= 2)
    }

    /// Whether some closed path at the basepoint reads `word` exactly.
    pub fn reads_word(&self, word: &Word) -> bool {
        path_reading(&self.graph, self.basepoint, word.letters()).is_some()
    }

    pub fn to_text(&self) -> String {
        let mut s = self.graph.to_text();
        writeln!(s, "base {}", self.basepoint).unwrap();
        s
    }

    pub fn parse_text(text: &str) -> Result<BasedGraph> {
        let (graph, base) = parse_graph_lines(text.lines().enumerate(), None)?;
        let base = base.ok_or_else(|| Error::format(0, "missing `base` line"))?;
        BasedGraph::new(graph, base)
    }
}

/// The rose `R_n`: one vertex with edge `i−1` a loop labeled `x_i`.
pub fn rose(rank: usize) -> Result<LabeledGraph> {
    let mut g = LabeledGraph::new(rank)?;
    let v = g.add_vertex();
    for i in 1..=rank {
        g.add_edge(v, v, Letter::positive(i))?;
    }
    Ok(g)
}

/// A cycle of `len(c)` vertices whose edge `i` runs `v_i → v_{i+1}` with
/// label `c[i]`.
pub fn circuit(c: &CyclicWord) -> LabeledGraph {
    let mut g = LabeledGraph::new(c.rank()).expect("cyclic words carry a valid rank");
    append_circuit(&mut g, c);
    g
}

fn append_circuit(g: &mut LabeledGraph, c: &CyclicWord) {
    let vs: Vec<VertexId> = (0..c.len()).map(|_| g.add_vertex()).collect();
    for (i, &l) in c.letters().iter().enumerate() {
        g.add_edge(vs[i], vs[(i + 1) % vs.len()], l).unwrap();
    }
}

/// `Γ_S`: disjoint union of the circuits of `set`, in order.
pub fn disjoint_circuits(rank: usize, set: &[CyclicWord]) -> Result<LabeledGraph> {
    let mut g = LabeledGraph::new(rank)?;
    for c in set {
        if c.rank() != rank {
            return Err(Error::RankMismatch {
                left: rank,
                right: c.rank(),
            });
        }
        append_circuit(&mut g, c);
    }
    Ok(g)
}

/// Subdivided circles, one per word, glued at basepoint `0`; the circle
/// for `w_i` reads `w_i` from the basepoint back to itself.
pub fn wedge_of_words(words: &[Word], rank: usize) -> Result<BasedGraph> {
    let mut g = LabeledGraph::new(rank)?;
    let base = g.add_vertex();
    for w in words {
        if w.rank() != rank {
            return Err(Error::RankMismatch {
                left: rank,
                right: w.rank(),
            });
        }
        if w.is_empty() || !w.is_reduced() {
            return Err(Error::NotReduced(w.to_string()));
        }
        let mut prev = base;
        let k = w.len();
        for (i, &l) in w.letters().iter().enumerate() {
            let next = if i + 1 == k { base } else { g.add_vertex() };
            g.add_edge(prev, next, l)?;
            prev = next;
        }
    }
    BasedGraph::new(g, base)
}

pub type SmallForm = (usize, usize, Vec<(u32, u32, usize)>);

/// Label-isomorphism invariant for small graphs: the least sorted edge list
/// over all vertex numberings. `None` above `max_vertices` vertices.
pub fn small_canonical_form(g: &LabeledGraph, max_vertices: usize) -> Option<SmallForm> {
    let vs: Vec<VertexId> = g.vertices().collect();
    if vs.len() > max_vertices {
        return None;
    }
    let mut perm: Vec<u32> = (0..vs.len() as u32).collect();
    let mut best: Option<Vec<(u32, u32, usize)>> = None;
    loop {
        let pos: BTreeMap<VertexId, u32> = vs.iter().copied().zip(perm.iter().copied()).collect();
        let mut code: Vec<(u32, u32, usize)> = g
            .edges()
            .map(|(_, e)| (pos[&e.origin], pos[&e.terminus], e.label.ordinal()))
            .collect();
        code.sort();
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Some((g.rank(), vs.len(), best.unwrap_or_default()))
}

fn next_permutation(p: &mut [u32]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// A closed path from `start` back to `start` reading `letters`, found by
/// breadth-first search over `(vertex, position)` states.
pub fn path_reading(g: &LabeledGraph, start: VertexId, letters: &[Letter]) -> Option<Vec<DirEdge>> {
    let k = letters.len();
    if k == 0 {
        return Some(Vec::new());
    }
    let mut parent: BTreeMap<(VertexId, usize), (VertexId, DirEdge)> = BTreeMap::new();
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut by_label: BTreeMap<VertexId, Vec<DirEdge>> = BTreeMap::new();
    for d in g.directed_edges() {
        by_label.entry(g.origin(d)).or_default().push(d);
    }
    while let Some((v, pos)) = queue.pop_front() {
        for &d in by_label.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if g.label(d) != letters[pos] {
                continue;
            }
            let next = (g.terminus(d), pos + 1);
            if next.1 == k {
                if next.0 != start {
                    continue;
                }
                let mut path = vec![d];
                let mut cur = (v, pos);
                while cur.1 > 0 {
                    let (pv, pd) = parent[&cur];
                    path.push(pd);
                    cur = (pv, cur.1 - 1);
                }
                path.reverse();
                return Some(path);
            }
            if let std::collections::btree_map::Entry::Vacant(slot) = parent.entry(next) {
                slot.insert((v, d));
                queue.push_back(next);
            }
        }
    }
    None
}

/// A closed path (any start vertex) whose label is exactly `c`.
pub fn closed_path_reading(g: &LabeledGraph, c: &CyclicWord) -> Option<(VertexId, Vec<DirEdge>)> {
    if g.rank() != c.rank() {
        return None;
    }
    g.vertices()
        .find_map(|v| path_reading(g, v, c.letters()).map(|p| (v, p)))
}

pub fn reads_cyclic_word(g: &LabeledGraph, c: &CyclicWord) -> bool {
    closed_path_reading(g, c).is_some()
}

/// Label of a path; `None` if consecutive edges do not connect.
pub fn path_label(g: &LabeledGraph, path: &[DirEdge]) -> Option<Vec<Letter>> {
    for pair in path.windows(2) {
        if g.terminus(pair[0]) != g.origin(pair[1]) {
            return None;
        }
    }
    Some(path.iter().map(|&d| g.label(d)).collect())
}

/// Vertex and edge maps between labeled graphs. Each source edge pair maps,
/// in its stored orientation, to a directed edge of the target.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphMorphism {
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub edge_map: BTreeMap<EdgeId, DirEdge>,
}

impl GraphMorphism {
    pub fn image(&self, d: DirEdge) -> Option<DirEdge> {
        self.edge_map
            .get(&d.edge)
            .map(|&t| if d.reversed { t.inverse() } else { t })
    }

    /// Total on `src`, commutes with endpoints, preserves labels. The
    /// involution is respected because orientations are mapped together.
    pub fn verify(&self, src: &LabeledGraph, dst: &LabeledGraph) -> bool {
        if src.rank() != dst.rank()
            || self.vertex_map.len() != src.vertex_count()
            || self.edge_map.len() != src.edge_pair_count()
        {
            return false;
        }
        for v in src.vertices() {
            match self.vertex_map.get(&v) {
                Some(t) if dst.has_vertex(*t) => {}
                _ => return false,
            }
        }
        for (id, e) in src.edges() {
            let Some(&t) = self.edge_map.get(&id) else {
                return false;
            };
            if dst.edge(t.edge).is_none() {
                return false;
            }
            if dst.origin(t) != self.vertex_map[&e.origin]
                || dst.terminus(t) != self.vertex_map[&e.terminus]
                || dst.label(t) != e.label
            {
                return false;
            }
        }
        true
    }

    /// The unique label-preserving morphism onto `rose(n)`.
    pub fn to_rose(g: &LabeledGraph) -> GraphMorphism {
        GraphMorphism {
            vertex_map: g.vertices().map(|v| (v, VertexId(0))).collect(),
            edge_map: g
                .edges()
                .map(|(id, e)| (id, DirEdge::forward(EdgeId(e.label.index() as u32 - 1))))
                .collect(),
        }
    }
}

pub fn verify_morphism(m: &GraphMorphism, src: &LabeledGraph, dst: &LabeledGraph) -> bool {
    m.verify(src, dst)
}

/// Folded core pair reading exactly the subgroup generated by `generators`
/// as closed paths at the basepoint.
pub fn subgroup_graph(generators: &[Word], rank: usize) -> Result<BasedGraph> {
    let wedge = wedge_of_words(generators, rank)?;
    let seq = folding::fold_to_completion(&wedge.graph);
    let base = seq.track_vertex(wedge.basepoint);
    BasedGraph::new(seq.final_graph().clone(), base).map(|b| b.core_pair())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw(text: &str, rank: usize) -> CyclicWord {
        CyclicWord::parse(text, rank).unwrap()
    }

    fn word(text: &str, rank: usize) -> Word {
        Word::parse(text, rank).unwrap()
    }

    #[test]
    fn rose_shape() {
        let r2 = rose(2).unwrap();
        assert_eq!((r2.vertex_count(), r2.edge_pair_count()), (1, 2));
        assert!(r2.is_rose());
        assert_eq!(rose(3).unwrap().edge_pair_count(), 3);
        assert_eq!(rose(1), Err(Error::InvalidRank(1)));
    }

    #[test]
    fn circuits() {
        let g = circuit(&cw("ab", 2));
        assert_eq!((g.vertex_count(), g.edge_pair_count()), (2, 2));
        let a = circuit(&cw("a", 2));
        assert_eq!((a.vertex_count(), a.edge_pair_count()), (1, 1));
        let e = a.edge(EdgeId(0)).unwrap();
        assert_eq!(e.origin, e.terminus);
        let g = disjoint_circuits(2, &[cw("aab", 2), cw("abAB", 2)]).unwrap();
        assert_eq!(g.components().len(), 2);
        assert_eq!((g.vertex_count(), g.edge_pair_count()), (7, 7));
    }

    #[test]
    fn inverse_labels_are_normalized() {
        let g = circuit(&cw("aB", 2));
        let e = g.edge(EdgeId(1)).unwrap();
        assert_eq!(e.label, Letter::positive(2));
        assert_eq!((e.origin, e.terminus), (VertexId(0), VertexId(1)));
        assert_eq!(g.label(DirEdge::backward(EdgeId(1))), Letter::negative(2));
    }

    #[test]
    fn wedge_reads_its_words() {
        let b = wedge_of_words(&[word("ab", 2), word("b", 2)], 2).unwrap();
        assert_eq!(b.graph.vertex_count(), 2);
        assert_eq!(b.graph.edge_pair_count(), 3);
        assert!(b.reads_word(&word("ab", 2)));
        assert!(b.reads_word(&word("b", 2)));
        assert!(reads_cyclic_word(&b.graph, &cw("ab", 2)));
        let single = wedge_of_words(&[word("a", 2)], 2).unwrap();
        assert_eq!(single.graph.vertex_count(), 1);
        let two = wedge_of_words(&[word("ab", 2), word("ba", 2)], 2).unwrap();
        assert_eq!(
            (two.graph.vertex_count(), two.graph.edge_pair_count()),
            (3, 4)
        );
        assert!(wedge_of_words(&[word("aA", 2)], 2).is_err());
    }

    #[test]
    fn betti_numbers() {
        assert_eq!(rose(2).unwrap().betti(), 2);
        assert_eq!(circuit(&cw("aab", 2)).betti(), 1);
        assert_eq!(
            disjoint_circuits(2, &[cw("a", 2), cw("b", 2)])
                .unwrap()
                .betti(),
            2
        );
    }

    #[test]
    fn core_strips_trees() {
        let c = circuit(&cw("ab", 2));
        assert_eq!(c.core(), c);
        let mut tailed = c.clone();
        let t = tailed.add_vertex();
        tailed
            .add_edge(VertexId(0), t, Letter::positive(1))
            .unwrap();
        assert_eq!(tailed.core(), c);
        let mut seg = LabeledGraph::new(2).unwrap();
        let (p, q) = (seg.add_vertex(), seg.add_vertex());
        seg.add_edge(p, q, Letter::positive(1)).unwrap();
        assert!(seg.core().is_empty());
        let mut isolated = LabeledGraph::new(2).unwrap();
        isolated.add_vertex();
        assert!(isolated.core().is_empty());
    }

    #[test]
    fn core_pair_keeps_only_basepoint_component() {
        // v0 - v1 dangling, plus a separate loop component at v2
        let mut g = LabeledGraph::new(2).unwrap();
        let v0 = g.add_vertex();
        let v1 = g.add_vertex();
        let v2 = g.add_vertex();
        g.add_edge(v0, v1, Letter::positive(1)).unwrap();
        g.add_edge(v2, v2, Letter::positive(2)).unwrap();
        let cp = BasedGraph::new(g, v0).unwrap().core_pair();
        assert_eq!(cp.graph.vertex_count(), 1);
        assert_eq!(cp.graph.edge_pair_count(), 0);
        assert_eq!(cp.basepoint, v0);

        let c = BasedGraph::new(circuit(&cw("ab", 2)), VertexId(0)).unwrap();
        assert_eq!(c.core_pair(), c);
        let w = wedge_of_words(&[word("ab", 2), word("b", 2)], 2).unwrap();
        assert_eq!(w.core_pair(), w);
    }

    #[test]
    fn folded_examples() {
        assert!(rose(2).unwrap().is_folded());
        assert!(!wedge_of_words(&[word("ab", 2), word("b", 2)], 2)
            .unwrap()
            .graph
            .is_folded());
        assert!(circuit(&cw("aab", 2)).is_folded());
    }

    #[test]
    fn readability() {
        assert!(reads_cyclic_word(&rose(2).unwrap(), &cw("abAB", 2)));
        assert!(reads_cyclic_word(&circuit(&cw("ab", 2)), &cw("ab", 2)));
        assert!(!reads_cyclic_word(&circuit(&cw("ab", 2)), &cw("aab", 2)));
        // second power of the circuit is also a closed path
        assert!(reads_cyclic_word(&circuit(&cw("ab", 2)), &cw("abab", 2)));
    }

    #[test]
    fn unreduced_closed_paths_count() {
        // a single a-edge p→q reads "aA" at p only through backtracking
        let mut g = LabeledGraph::new(2).unwrap();
        let p = g.add_vertex();
        let q = g.add_vertex();
        g.add_edge(p, q, Letter::positive(1)).unwrap();
        let aa = word("aA", 2);
        assert!(path_reading(&g, p, aa.letters()).is_some());
        // but the cyclically reduced class [a] is not readable
        assert!(!reads_cyclic_word(&g, &cw("a", 2)));
    }

    #[test]
    fn morphism_verification() {
        let c = circuit(&cw("ab", 2));
        let r = rose(2).unwrap();
        assert!(verify_morphism(&GraphMorphism::to_rose(&c), &c, &r));
        assert!(verify_morphism(&GraphMorphism::to_rose(&r), &r, &r));
        let mut bad = GraphMorphism::to_rose(&c);
        bad.edge_map.insert(EdgeId(0), DirEdge::forward(EdgeId(1)));
        assert!(!verify_morphism(&bad, &c, &r));
    }

    #[test]
    fn subgroup_graphs() {
        let a = subgroup_graph(&[word("a", 2)], 2).unwrap();
        assert_eq!((a.graph.vertex_count(), a.graph.edge_pair_count()), (1, 1));
        let r = subgroup_graph(&[word("ab", 2), word("b", 2)], 2).unwrap();
        assert!(r.graph.is_rose());
        let aa = subgroup_graph(&[word("aa", 2)], 2).unwrap();
        assert_eq!(
            (aa.graph.vertex_count(), aa.graph.edge_pair_count()),
            (2, 2)
        );
        assert!(aa.graph.is_folded());
        assert!(aa.reads_word(&word("aa", 2)));
        assert!(!aa.reads_word(&word("a", 2)));
    }

    #[test]
    fn text_round_trip() {
        let g = wedge_of_words(&[word("aB", 3), word("c", 3)], 3).unwrap();
        let text = g.to_text();
        assert_eq!(BasedGraph::parse_text(&text).unwrap(), g);
        assert!(LabeledGraph::parse_text("vertex 0\n").is_err());
        assert!(LabeledGraph::parse_text("rank 2\nvertex 0\nedge 0 0 1 a\n").is_err());
        let upper = LabeledGraph::parse_text("rank 2\nvertex 0\nvertex 1\nedge 0 0 1 B\n").unwrap();
        assert_eq!(upper.edge(EdgeId(0)).unwrap().origin, VertexId(1));
    }
}
