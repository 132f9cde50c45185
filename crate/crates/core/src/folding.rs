//! Stallings folds.
//!
//! A fold identifies two distinct directed edges with a common origin and a
//! common label, together with their termini. Folding a finite graph until
//! no such pair remains yields its immersed image; the recorded sequence
//! keeps every intermediate graph so later stages can inspect them.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{DirEdge, EdgeId, LabeledGraph, VertexId};
use crate::tameness::{recognize_almost_rose, AlmostRose};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldStep {
    pub edge_a: DirEdge,
    pub edge_b: DirEdge,
    /// `(kept, removed)` when the termini were distinct.
    pub identified_vertices: Option<(VertexId, VertexId)>,
    /// `(kept, removed)` edge pair ids.
    pub identified_edges: (EdgeId, EdgeId),
    pub betti_dropped: bool,
}

#[derive(Clone, Debug)]
pub struct FoldSequence {
    pub start: LabeledGraph,
    pub steps: Vec<FoldStep>,
    /// `snapshots[0]` is `start`; `snapshots[i + 1]` follows `steps[i]`.
    pub snapshots: Vec<LabeledGraph>,
}

impl FoldSequence {
    pub fn final_graph(&self) -> &LabeledGraph {
        self.snapshots.last().expect("at least the start snapshot")
    }

    /// The graph just before the last fold.
    pub fn penultimate(&self) -> Option<&LabeledGraph> {
        let n = self.snapshots.len();
        (n >= 2).then(|| &self.snapshots[n - 2])
    }

    /// Where vertex `v` of the start graph ends up in the final graph.
    pub fn track_vertex(&self, mut v: VertexId) -> VertexId {
        for step in &self.steps {
            if let Some((kept, removed)) = step.identified_vertices {
                if v == removed {
                    v = kept;
                }
            }
        }
        v
    }

    pub fn betti_trace(&self) -> Vec<usize> {
        self.snapshots.iter().map(LabeledGraph::betti).collect()
    }

    /// One DOT cluster per snapshot.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph folds {\n  node [shape=circle];\n");
        for (i, g) in self.snapshots.iter().enumerate() {
            writeln!(s, "  subgraph cluster_{i} {{").unwrap();
            writeln!(s, "    label=\"snapshot {i}\";").unwrap();
            g.write_dot_body(&mut s, "    ", &format!("s{i}_"));
            s.push_str("  }\n");
        }
        s.push_str("}\n");
        s
    }
}

/// All foldable pairs `(a, b)` with `a < b`, ordered by origin vertex and
/// then by `(edge id, reversed)` of `b`, then `a`.
pub fn foldable_pairs(g: &LabeledGraph) -> Vec<(DirEdge, DirEdge)> {
    let mut out_by_vertex: BTreeMap<VertexId, Vec<DirEdge>> = BTreeMap::new();
    for d in g.directed_edges() {
        out_by_vertex.entry(g.origin(d)).or_default().push(d);
    }
    let mut pairs = Vec::new();
    for outs in out_by_vertex.values() {
        for (j, &b) in outs.iter().enumerate() {
            for &a in &outs[..j] {
                if a.edge != b.edge && g.label(a) == g.label(b) {
                    pairs.push((a, b));
                }
            }
        }
    }
    pairs
}

/// The first foldable pair: lowest origin vertex, then the earliest
/// directed edge that repeats a label already seen at that vertex.
pub fn find_foldable_pair(g: &LabeledGraph) -> Option<(DirEdge, DirEdge)> {
    let mut out_by_vertex: BTreeMap<VertexId, Vec<DirEdge>> = BTreeMap::new();
    for d in g.directed_edges() {
        out_by_vertex.entry(g.origin(d)).or_default().push(d);
    }
    for outs in out_by_vertex.values() {
        let mut seen = BTreeMap::new();
        for &d in outs {
            if let Some(&first) = seen.get(&g.label(d)) {
                return Some((first, d));
            }
            seen.insert(g.label(d), d);
        }
    }
    None
}

/// Folds `a` with `b`. The lower vertex id and the lower edge id survive.
pub fn fold_once(g: &LabeledGraph, a: DirEdge, b: DirEdge) -> Result<(LabeledGraph, FoldStep)> {
    if g.edge(a.edge).is_none() || g.edge(b.edge).is_none() {
        return Err(Error::NotFoldable(format!("{a}, {b}: unknown edge")));
    }
    if a.edge == b.edge {
        return Err(Error::NotFoldable(format!("{a}, {b}: same edge pair")));
    }
    if g.origin(a) != g.origin(b) || g.label(a) != g.label(b) {
        return Err(Error::NotFoldable(format!(
            "{a}, {b}: origins or labels differ"
        )));
    }
    let (ta, tb) = (g.terminus(a), g.terminus(b));
    let kept_edge = a.edge.min(b.edge);
    let removed_edge = a.edge.max(b.edge);
    let mut out = g.clone();
    out.remove_edge(removed_edge);
    let identified_vertices = if ta != tb {
        let (kept, removed) = (ta.min(tb), ta.max(tb));
        out.merge_vertex(removed, kept);
        Some((kept, removed))
    } else {
        None
    };
    Ok((
        out,
        FoldStep {
            edge_a: a,
            edge_b: b,
            identified_vertices,
            identified_edges: (kept_edge, removed_edge),
            betti_dropped: ta == tb,
        },
    ))
}

/// Folds at `find_foldable_pair` until the graph is folded.
pub fn fold_to_completion(g: &LabeledGraph) -> FoldSequence {
    fold_with(g, find_foldable_pair)
}

/// Folds until done, letting `choose` pick an index into the current
/// `foldable_pairs` list (taken modulo its length).
pub fn fold_to_completion_by(
    g: &LabeledGraph,
    mut choose: impl FnMut(&[(DirEdge, DirEdge)]) -> usize,
) -> FoldSequence {
    fold_with(g, |current| {
        let pairs = foldable_pairs(current);
        if pairs.is_empty() {
            None
        } else {
            Some(pairs[choose(&pairs) % pairs.len()])
        }
    })
}

fn fold_with(
    g: &LabeledGraph,
    mut pick: impl FnMut(&LabeledGraph) -> Option<(DirEdge, DirEdge)>,
) -> FoldSequence {
    let mut seq = FoldSequence {
        start: g.clone(),
        steps: Vec::new(),
        snapshots: vec![g.clone()],
    };
    while let Some((a, b)) = pick(seq.final_graph()) {
        let (next, step) = fold_once(seq.final_graph(), a, b).expect("pair is foldable");
        seq.steps.push(step);
        seq.snapshots.push(next);
    }
    seq
}

/// Whether the label map `g → R_n` is surjective on fundamental groups.
pub fn is_pi1_surjective(g: &LabeledGraph) -> Result<bool> {
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    Ok(fold_to_completion(g).final_graph().core().is_rose())
}

/// Folds `g` onto the rose and recognizes the graph one fold before the end
/// as an almost-rose.
///
/// Requires `g` connected, core, of Betti number `n`, π₁-surjective and not
/// already the rose. The fold sequence must then keep the Betti number and
/// every snapshot must stay a core graph; a violation is reported as an
/// error naming the offending step.
pub fn factor_through_almost_rose(g: &LabeledGraph) -> Result<(AlmostRose, FoldSequence)> {
    let n = g.rank();
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    if !g.is_core() {
        return Err(Error::Precondition("graph is not a core graph".into()));
    }
    if g.betti() != n {
        return Err(Error::Precondition(format!(
            "Betti number {} differs from rank {n}",
            g.betti()
        )));
    }
    if g.is_rose() {
        return Err(Error::Precondition("graph is already the rose".into()));
    }
    let seq = fold_to_completion(g);
    if !seq.final_graph().core().is_rose() {
        return Err(Error::Precondition("graph is not π₁-surjective".into()));
    }
    for (i, step) in seq.steps.iter().enumerate() {
        if step.betti_dropped {
            return Err(Error::Factorization(format!(
                "step {} drops the Betti number",
                i + 1
            )));
        }
    }
    for (i, snap) in seq.snapshots.iter().enumerate() {
        if !snap.is_core() {
            return Err(Error::Factorization(format!(
                "snapshot {i} is not a core graph"
            )));
        }
    }
    let pen = seq.penultimate().expect("at least one fold");
    let rose = recognize_almost_rose(pen)
        .ok_or_else(|| Error::Factorization("penultimate snapshot is not an almost-rose".into()))?;
    Ok((rose, seq))
}

/// Canonical code of a folded graph, comparable across vertex numberings.
///
/// Each component is encoded by a breadth-first walk that visits outgoing
/// edges in letter order; the component code is the least such walk over all
/// start vertices. Returns `None` for graphs that are not folded.
pub fn folded_canonical_form(g: &LabeledGraph) -> Option<(usize, Vec<Vec<(usize, usize)>>)> {
    if !g.is_folded() {
        return None;
    }
    let mut out: BTreeMap<VertexId, Vec<(usize, VertexId)>> =
        g.vertices().map(|v| (v, Vec::new())).collect();
    for d in g.directed_edges() {
        out.get_mut(&g.origin(d))
            .unwrap()
            .push((g.label(d).ordinal(), g.terminus(d)));
    }
    for edges in out.values_mut() {
        edges.sort();
    }
    let mut codes = Vec::new();
    for comp in g.components() {
        let code = comp
            .iter()
            .map(|&start| {
                let mut number = BTreeMap::from([(start, 0usize)]);
                let mut queue = VecDeque::from([start]);
                let mut code = Vec::new();
                while let Some(v) = queue.pop_front() {
                    for &(label, w) in &out[&v] {
                        let next = number.len();
                        let id = *number.entry(w).or_insert_with(|| {
                            queue.push_back(w);
                            next
                        });
                        code.push((label, id));
                    }
                    code.push((usize::MAX, 0));
                }
                code
            })
            .min()
            .unwrap();
        codes.push(code);
    }
    codes.sort();
    Some((g.rank(), codes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{circuit, rose, wedge_of_words};
    use crate::words::{CyclicWord, Letter, Word};

    fn wedge(words: &[&str], rank: usize) -> LabeledGraph {
        let ws: Vec<Word> = words
            .iter()
            .map(|w| Word::parse(w, rank).unwrap())
            .collect();
        wedge_of_words(&ws, rank).unwrap().graph
    }

    #[test]
    fn find_pair_examples() {
        assert_eq!(find_foldable_pair(&rose(2).unwrap()), None);
        // wedge(ab, b): edges 0: 0→1 a, 1: 1→0 b, 2: 0→0 b.
        // At vertex 0 the outgoing B-edges are 1+ reversed and 2- .
        let g = wedge(&["ab", "b"], 2);
        let (a, b) = find_foldable_pair(&g).unwrap();
        assert_eq!(
            (a, b),
            (DirEdge::backward(EdgeId(1)), DirEdge::backward(EdgeId(2)))
        );
        assert_eq!(g.label(a), Letter::negative(2));

        let mut par = LabeledGraph::new(2).unwrap();
        let v = par.add_vertex();
        let w = par.add_vertex();
        par.add_edge(v, w, Letter::positive(1)).unwrap();
        par.add_edge(v, w, Letter::positive(1)).unwrap();
        assert_eq!(
            find_foldable_pair(&par),
            Some((DirEdge::forward(EdgeId(0)), DirEdge::forward(EdgeId(1))))
        );
    }

    #[test]
    fn fold_once_examples() {
        let g = wedge(&["ab", "b"], 2);
        let (a, b) = find_foldable_pair(&g).unwrap();
        let (folded, step) = fold_once(&g, a, b).unwrap();
        assert!(folded.is_rose());
        assert!(!step.betti_dropped);
        assert_eq!(step.identified_vertices, Some((VertexId(0), VertexId(1))));

        let mut par = LabeledGraph::new(2).unwrap();
        let v = par.add_vertex();
        let w = par.add_vertex();
        par.add_edge(v, w, Letter::positive(1)).unwrap();
        par.add_edge(v, w, Letter::positive(1)).unwrap();
        par.add_edge(w, w, Letter::positive(2)).unwrap();
        let (a, b) = find_foldable_pair(&par).unwrap();
        let (folded, step) = fold_once(&par, a, b).unwrap();
        assert!(step.betti_dropped);
        assert_eq!(folded.betti(), par.betti() - 1);
        assert_eq!(folded.edge_pair_count(), 2);

        let r = rose(2).unwrap();
        assert!(matches!(
            fold_once(&r, DirEdge::forward(EdgeId(0)), DirEdge::forward(EdgeId(1))),
            Err(Error::NotFoldable(_))
        ));
    }

    #[test]
    fn fold_to_completion_examples() {
        let seq = fold_to_completion(&wedge(&["ab", "b"], 2));
        assert_eq!(seq.steps.len(), 1);
        assert!(seq.final_graph().is_rose());

        let c = circuit(&CyclicWord::parse("aab", 2).unwrap());
        assert_eq!(fold_to_completion(&c).steps.len(), 0);

        let seq = fold_to_completion(&wedge(&["ab", "ab"], 2));
        assert_eq!(seq.steps.len(), 2);
        assert_eq!(seq.steps.iter().filter(|s| s.betti_dropped).count(), 1);
        assert_eq!(seq.final_graph().betti(), 1);
        assert!(seq.final_graph().is_folded());
        assert_eq!(seq.betti_trace(), vec![2, 2, 1]);
    }

    #[test]
    fn surjectivity() {
        assert!(is_pi1_surjective(&wedge(&["ab", "b"], 2)).unwrap());
        assert!(!is_pi1_surjective(&circuit(&CyclicWord::parse("ab", 2).unwrap())).unwrap());
        assert!(is_pi1_surjective(&rose(3).unwrap()).unwrap());
        let mut two = LabeledGraph::new(2).unwrap();
        two.add_vertex();
        two.add_vertex();
        assert_eq!(is_pi1_surjective(&two), Err(Error::NotConnected));
    }

    #[test]
    fn factor_examples() {
        let g = wedge(&["ab", "b"], 2);
        let (r, seq) = factor_through_almost_rose(&g).unwrap();
        assert_eq!((r.n(), r.k(), r.l()), (2, 1, 2));
        assert_eq!(seq.penultimate().unwrap(), &g);

        let (r, _) = factor_through_almost_rose(&wedge(&["ba", "a"], 2)).unwrap();
        assert_eq!((r.k(), r.l()), (1, 2));

        assert!(matches!(
            factor_through_almost_rose(&rose(2).unwrap()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn track_basepoint() {
        let g = wedge(&["ab", "b"], 2);
        let seq = fold_to_completion(&g);
        assert_eq!(seq.track_vertex(VertexId(1)), VertexId(0));
    }

    #[test]
    fn canonical_form_ignores_numbering() {
        let c1 = circuit(&CyclicWord::parse("aab", 2).unwrap());
        let c2 = circuit(&CyclicWord::parse("aba", 2).unwrap());
        assert_eq!(folded_canonical_form(&c1), folded_canonical_form(&c2));
        let c3 = circuit(&CyclicWord::parse("abb", 2).unwrap());
        assert_ne!(folded_canonical_form(&c1), folded_canonical_form(&c3));
        assert_eq!(folded_canonical_form(&wedge(&["ab", "b"], 2)), None);
    }
}
