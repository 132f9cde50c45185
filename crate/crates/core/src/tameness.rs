//! Almost-roses and the certified tameness decision.
//!
//! The standard almost-rose `Θ(n, k, l)` has vertices `u = 0` and `v = 1`
//! and edge pairs, in id order:
//!
//! * `0`: loop at `u` labeled `x1`; `1`: `u → v` labeled `x1`;
//! * loops at `u` labeled `x2 … xk`;
//! * `u → v` edges labeled `x(k+1) … xl`;
//! * loops at `v` labeled `x(l+1) … xn`.
//!
//! Every almost-rose is a signed relabeling of exactly one standard one. A
//! set of conjugacy classes is tame when some almost-rose reads all of them,
//! which happens exactly when its Whitehead graph is disconnected or has a
//! cut vertex. [`decide_tame`] returns a certificate for either answer and
//! [`verify_certificate`] checks it without trusting the decision.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::folding::{find_foldable_pair, fold_once, foldable_pairs};
use crate::graph::{
    closed_path_reading, disjoint_circuits, parse_graph_lines, small_canonical_form, DirEdge,
    EdgeId, GraphMorphism, LabeledGraph, SmallForm, VertexId,
};
use crate::whitehead::{wh_of_graph, wh_of_set, WhiteheadGraph};
use crate::words::{check_rank, CyclicWord, Letter, Word};

/// A permutation of the generators together with a sign per generator;
/// `images[j - 1]` is the image of `x_j`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignedRelabeling {
    images: Vec<Letter>,
}

impl SignedRelabeling {
    pub fn new(images: Vec<Letter>) -> Result<SignedRelabeling> {
        let n = images.len();
        check_rank(n)?;
        let mut seen = vec![false; n];
        for l in &images {
            if l.index() > n || std::mem::replace(&mut seen[l.index() - 1], true) {
                return Err(Error::InvalidRelabeling(format!(
                    "images {} are not a signed permutation",
                    images.iter().map(|l| l.to_string()).collect::<String>()
                )));
            }
        }
        Ok(SignedRelabeling { images })
    }

    pub fn identity(rank: usize) -> Result<SignedRelabeling> {
        SignedRelabeling::new((1..=rank).map(Letter::positive).collect())
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[Letter] {
        &self.images
    }

    pub fn apply(&self, x: Letter) -> Letter {
        let y = self.images[x.index() - 1];
        if x.is_inverted() {
            y.inverse()
        } else {
            y
        }
    }

    pub fn inverse(&self) -> SignedRelabeling {
        let mut images = vec![Letter::positive(1); self.images.len()];
        for (j, &y) in self.images.iter().enumerate() {
            images[y.index() - 1] = Letter::new(j + 1, y.is_inverted());
        }
        SignedRelabeling { images }
    }

    pub fn apply_word(&self, w: &Word) -> Word {
        Word::new(
            w.letters().iter().map(|&x| self.apply(x)).collect(),
            w.rank(),
        )
        .expect("relabeling preserves rank")
    }

    pub fn apply_cyclic(&self, c: &CyclicWord) -> CyclicWord {
        CyclicWord::from_letters(
            c.letters().iter().map(|&x| self.apply(x)).collect(),
            c.rank(),
        )
        .expect("relabeling preserves cyclic reduction")
    }

    /// Same vertex and edge ids; labels replaced, orientation normalized.
    pub fn apply_graph(&self, g: &LabeledGraph) -> LabeledGraph {
        let mut out = LabeledGraph::new(g.rank()).unwrap();
        for v in g.vertices() {
            out.add_vertex_with_id(v).unwrap();
        }
        for (id, e) in g.edges() {
            out.add_edge_with_id(id, e.origin, e.terminus, self.apply(e.label))
                .unwrap();
        }
        out
    }

    pub fn apply_whitehead(&self, w: &WhiteheadGraph) -> WhiteheadGraph {
        let edges: Vec<(Letter, Letter)> = w
            .edges()
            .into_iter()
            .map(|(x, y)| (self.apply(x), self.apply(y)))
            .collect();
        WhiteheadGraph::from_edges(w.rank(), &edges).unwrap()
    }
}

impl fmt::Debug for SignedRelabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "σ[")?;
        for (j, y) in self.images.iter().enumerate() {
            write!(
                f,
                "{}{}→{}",
                if j > 0 { " " } else { "" },
                Letter::positive(j + 1),
                y
            )?;
        }
        write!(f, "]")
    }
}

fn check_theta(n: usize, k: usize, l: usize) -> Result<()> {
    check_rank(n)?;
    if !(1 <= k && k <= l && l <= n && k < n) {
        return Err(Error::ThetaConstraint { n, k, l });
    }
    Ok(())
}

/// A relabeled standard almost-rose `Θ(n, k, l)`.
#[derive(Clone, PartialEq, Eq)]
pub struct AlmostRose {
    n: usize,
    k: usize,
    l: usize,
    relabeling: SignedRelabeling,
    realized: LabeledGraph,
}

pub const U: VertexId = VertexId(0);
pub const V: VertexId = VertexId(1);

/// The standard almost-rose with identity relabeling.
pub fn theta(n: usize, k: usize, l: usize) -> Result<AlmostRose> {
    AlmostRose::new(n, k, l, SignedRelabeling::identity(n)?)
}

impl AlmostRose {
    pub fn new(n: usize, k: usize, l: usize, relabeling: SignedRelabeling) -> Result<AlmostRose> {
        check_theta(n, k, l)?;
        if relabeling.rank() != n {
            return Err(Error::RankMismatch {
                left: n,
                right: relabeling.rank(),
            });
        }
        let mut g = LabeledGraph::new(n)?;
        g.add_vertex_with_id(U)?;
        g.add_vertex_with_id(V)?;
        let x = Letter::positive;
        let mut standard = vec![(U, U, x(1)), (U, V, x(1))];
        standard.extend((2..=k).map(|j| (U, U, x(j))));
        standard.extend((k + 1..=l).map(|j| (U, V, x(j))));
        standard.extend((l + 1..=n).map(|j| (V, V, x(j))));
        for (id, (from, to, label)) in standard.into_iter().enumerate() {
            g.add_edge_with_id(EdgeId(id as u32), from, to, relabeling.apply(label))?;
        }
        Ok(AlmostRose {
            n,
            k,
            l,
            relabeling,
            realized: g,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn relabeling(&self) -> &SignedRelabeling {
        &self.relabeling
    }

    pub fn realized_graph(&self) -> &LabeledGraph {
        &self.realized
    }

    /// The image of `x1`: the letter at which the Whitehead graph is wedged.
    pub fn wedge_letter(&self) -> Letter {
        self.relabeling.apply(Letter::positive(1))
    }

    /// The letter sets `V1` (labels of edges ending at `u`) and `V2` (ending
    /// at `v`), after relabeling. They share only the wedge letter.
    pub fn sides(&self) -> (Vec<Letter>, Vec<Letter>) {
        let x = Letter::positive;
        let mut v1 = vec![x(1), x(1).inverse()];
        for j in 2..=self.k {
            v1.extend([x(j), x(j).inverse()]);
        }
        v1.extend((self.k + 1..=self.l).map(|j| x(j).inverse()));
        let mut v2 = vec![x(1)];
        v2.extend((self.k + 1..=self.l).map(x));
        for j in self.l + 1..=self.n {
            v2.extend([x(j), x(j).inverse()]);
        }
        let map = |v: Vec<Letter>| {
            let mut out: Vec<Letter> = v.into_iter().map(|l| self.relabeling.apply(l)).collect();
            out.sort();
            out
        };
        (map(v1), map(v2))
    }

    /// Closed form of `Wh(Θ)`: complete graphs on `V1` and on `V2`.
    pub fn whitehead_graph(&self) -> WhiteheadGraph {
        let (v1, v2) = self.sides();
        WhiteheadGraph::complete_on(self.n, &v1)
            .unwrap()
            .union(&WhiteheadGraph::complete_on(self.n, &v2).unwrap())
            .unwrap()
    }

    pub fn describe(&self) -> String {
        let images: Vec<String> = self
            .relabeling
            .images()
            .iter()
            .enumerate()
            .map(|(j, y)| format!("{} -> {}", Letter::positive(j + 1), y))
            .collect();
        format!(
            "almost-rose n={} k={} l={} ({})",
            self.n,
            self.k,
            self.l,
            images.join(", ")
        )
    }
}

impl fmt::Debug for AlmostRose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

pub fn wh_of_theta(r: &AlmostRose) -> WhiteheadGraph {
    r.whitehead_graph()
}

/// Recognizes `g` as a relabeled `Θ(n, k, l)`: two vertices, `n + 1` edge
/// pairs, core, Betti number `n`, exactly one foldable pair, and folding it
/// gives the rose.
pub fn recognize_almost_rose(g: &LabeledGraph) -> Option<AlmostRose> {
    let n = g.rank();
    if g.vertex_count() != 2 || g.edge_pair_count() != n + 1 || !g.is_core() || g.betti() != n {
        return None;
    }
    if foldable_pairs(g).len() != 1 {
        return None;
    }
    let (a, b) = find_foldable_pair(g)?;
    let (folded, step) = fold_once(g, a, b).ok()?;
    if !folded.is_rose() || step.betti_dropped {
        return None;
    }
    // `u` is the origin of the foldable pair; one of the two is a loop there.
    let u = g.origin(a);
    let v = g.vertices().find(|&x| x != u)?;
    let connector = [a, b].into_iter().find(|&d| g.terminus(d) == v)?;
    let wedge = g.label(connector);

    let mut at_u = Vec::new();
    let mut across = Vec::new();
    let mut at_v = Vec::new();
    for (id, e) in g.edges() {
        if e.label.index() == wedge.index() {
            continue;
        }
        match (e.origin == u, e.terminus == u) {
            (true, true) => at_u.push(e.label),
            (false, false) => at_v.push(e.label),
            _ => {
                let d = if e.origin == u {
                    DirEdge::forward(id)
                } else {
                    DirEdge::backward(id)
                };
                across.push(g.label(d));
            }
        }
    }
    for group in [&mut at_u, &mut across, &mut at_v] {
        group.sort_by_key(|l| l.index());
    }
    let k = 1 + at_u.len();
    let l = k + across.len();
    let mut images = vec![wedge];
    images.extend(at_u);
    images.extend(across);
    images.extend(at_v);
    let rose = AlmostRose::new(n, k, l, SignedRelabeling::new(images).ok()?).ok()?;
    (small_canonical_form(rose.realized_graph(), 2) == small_canonical_form(g, 2)).then_some(rose)
}

/// Every relabeled almost-rose of rank `n`, each isomorphism class once, in
/// a fixed order: image of `x1` in letter order, then per remaining
/// generator a placement among loop at `u`, loop at `v`, positive connector,
/// negative connector.
pub fn enumerate_almost_roses(n: usize) -> Result<AlmostRoses> {
    check_rank(n)?;
    Ok(AlmostRoses {
        n,
        wedge: 0,
        placements: vec![0; n - 1],
        done: false,
        seen: HashSet::new(),
    })
}

pub struct AlmostRoses {
    n: usize,
    wedge: usize,
    placements: Vec<u8>,
    done: bool,
    seen: HashSet<SmallForm>,
}

impl AlmostRoses {
    fn advance(&mut self) {
        for p in self.placements.iter_mut().rev() {
            *p += 1;
            if *p < 4 {
                return;
            }
            *p = 0;
        }
        self.wedge += 1;
        if self.wedge == 2 * self.n {
            self.done = true;
        }
    }

    fn current(&self) -> Option<AlmostRose> {
        let wedge = Letter::from_ordinal(self.wedge);
        let others = (1..=self.n).filter(|&j| j != wedge.index());
        let mut at_u = Vec::new();
        let mut across = Vec::new();
        let mut at_v = Vec::new();
        for (j, &p) in others.zip(&self.placements) {
            match p {
                0 => at_u.push(Letter::positive(j)),
                1 => at_v.push(Letter::positive(j)),
                2 => across.push(Letter::positive(j)),
                _ => across.push(Letter::negative(j)),
            }
        }
        let k = 1 + at_u.len();
        let l = k + across.len();
        if k >= self.n {
            return None;
        }
        let mut images = vec![wedge];
        images.extend(at_u);
        images.extend(across);
        images.extend(at_v);
        AlmostRose::new(self.n, k, l, SignedRelabeling::new(images).ok()?).ok()
    }
}

impl Iterator for AlmostRoses {
    type Item = AlmostRose;

    fn next(&mut self) -> Option<AlmostRose> {
        while !self.done {
            let candidate = self.current();
            self.advance();
            if let Some(r) = candidate {
                let key = small_canonical_form(r.realized_graph(), 2).unwrap();
                if self.seen.insert(key) {
                    return Some(r);
                }
            }
        }
        None
    }
}

/// The edge-rule morphism `g → Θ`, defined when `Wh(g) ⊆ Wh(Θ)`.
///
/// An edge whose label is not the wedge letter `c` (up to sign) goes to the
/// unique edge of `Θ` with that label. A `c`-edge goes to the connecting
/// `c`-edge when its terminus also receives some edge labeled in `V2 ∖ {c}`,
/// and to the `c`-loop otherwise. Vertices go to `v` exactly when they
/// receive such a `V2 ∖ {c}` label.
pub fn standard_morphism(g: &LabeledGraph, r: &AlmostRose) -> Option<GraphMorphism> {
    if g.rank() != r.n() {
        return None;
    }
    if !wh_of_graph(g).is_subgraph_of(&r.whitehead_graph()).ok()? {
        return None;
    }
    let c = r.wedge_letter();
    let (_, v2) = r.sides();
    let v2_strict: Vec<Letter> = v2.into_iter().filter(|&x| x != c).collect();
    let theta = r.realized_graph();

    let mut by_index: BTreeMap<usize, EdgeId> = BTreeMap::new();
    let (mut loop_c, mut connector_c) = (None, None);
    for (id, e) in theta.edges() {
        if e.label.index() == c.index() {
            if e.origin == e.terminus {
                loop_c = Some(id);
            } else {
                connector_c = Some(id);
            }
        } else {
            by_index.insert(e.label.index(), id);
        }
    }
    let (loop_c, connector_c) = (loop_c?, connector_c?);

    let vertex_map: BTreeMap<VertexId, VertexId> = g
        .vertices()
        .map(|p| {
            let on_v = g
                .in_edges(p)
                .iter()
                .any(|&d| v2_strict.contains(&g.label(d)));
            (p, if on_v { V } else { U })
        })
        .collect();

    let mut edge_map = BTreeMap::new();
    for (id, e) in g.edges() {
        let target = if e.label.index() != c.index() {
            by_index[&e.label.index()]
        } else {
            let d = if c.is_inverted() {
                DirEdge::backward(id)
            } else {
                DirEdge::forward(id)
            };
            if vertex_map[&g.terminus(d)] == V {
                connector_c
            } else {
                loop_c
            }
        };
        // stored labels on both sides are positive, so orientations agree
        edge_map.insert(id, DirEdge::forward(target));
    }
    let m = GraphMorphism {
        vertex_map,
        edge_map,
    };
    m.verify(g, theta).then_some(m)
}

/// An almost-rose whose Whitehead graph contains `w`, when `w` is
/// disconnected or has a cut vertex.
///
/// The wedge letter `c` is the first cut vertex, or failing that the first
/// letter whose removal disconnects `w`. Side 1 is the component of `c⁻¹`
/// in `w − c`, side 2 everything else; generators with both letters on
/// side 1 become loops at `u`, both on side 2 loops at `v`, and split
/// generators become connectors oriented toward their side-2 letter.
pub fn build_rose_from_whitehead(w: &WhiteheadGraph) -> Option<AlmostRose> {
    let n = w.rank();
    let c = w
        .cut_vertices()
        .into_iter()
        .chain(w.letters())
        .find(|&c| w.components_without(Some(c)).len() >= 2)?;
    let side1 = w
        .components_without(Some(c))
        .into_iter()
        .find(|comp| comp.contains(&c.inverse()))?;
    let mut at_u = Vec::new();
    let mut across = Vec::new();
    let mut at_v = Vec::new();
    for j in (1..=n).filter(|&j| j != c.index()) {
        let (pos, neg) = (Letter::positive(j), Letter::negative(j));
        match (side1.contains(&pos), side1.contains(&neg)) {
            (true, true) => at_u.push(pos),
            (false, false) => at_v.push(pos),
            (true, false) => across.push(neg),
            (false, true) => across.push(pos),
        }
    }
    let k = 1 + at_u.len();
    let l = k + across.len();
    let mut images = vec![c];
    images.extend(at_u);
    images.extend(across);
    images.extend(at_v);
    let rose = AlmostRose::new(n, k, l, SignedRelabeling::new(images).ok()?).ok()?;
    debug_assert!(w.is_subgraph_of(&rose.whitehead_graph()).unwrap());
    Some(rose)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Tame,
    NotTame,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Tame => "tame",
            Verdict::NotTame => "not-tame",
        })
    }
}

pub type TreeEdges = Vec<(Letter, Letter)>;

/// Evidence that a Whitehead graph is connected without cut vertices: a
/// spanning tree of the whole graph and, per letter, a spanning tree of the
/// graph with that letter deleted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonSeparationWitness {
    pub spanning_tree: TreeEdges,
    pub avoiding: Vec<(Letter, TreeEdges)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    Tame {
        rose: AlmostRose,
        morphism: GraphMorphism,
    },
    NotTame {
        whitehead: WhiteheadGraph,
        witness: NonSeparationWitness,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TamenessCertificate {
    pub rank: usize,
    pub words: Vec<CyclicWord>,
    pub evidence: Evidence,
}

impl TamenessCertificate {
    pub fn verdict(&self) -> Verdict {
        match self.evidence {
            Evidence::Tame { .. } => Verdict::Tame,
            Evidence::NotTame { .. } => Verdict::NotTame,
        }
    }
}

/// Decides whether the classes in `set` are tame and returns a certificate.
pub fn decide_tame(rank: usize, set: &[CyclicWord]) -> Result<TamenessCertificate> {
    let wh = wh_of_set(rank, set)?;
    let evidence = if !wh.is_connected() || !wh.cut_vertices().is_empty() {
        let rose = build_rose_from_whitehead(&wh).ok_or_else(|| {
            Error::Precondition("no wedge letter separates the Whitehead graph".into())
        })?;
        let gamma = disjoint_circuits(rank, set)?;
        let morphism = standard_morphism(&gamma, &rose)
            .ok_or_else(|| Error::Precondition("edge-rule morphism failed verification".into()))?;
        Evidence::Tame { rose, morphism }
    } else {
        let witness = NonSeparationWitness {
            spanning_tree: wh.spanning_forest(None),
            avoiding: wh
                .letters()
                .map(|x| (x, wh.spanning_forest(Some(x))))
                .collect(),
        };
        Evidence::NotTame {
            whitehead: wh,
            witness,
        }
    };
    Ok(TamenessCertificate {
        rank,
        words: set.to_vec(),
        evidence,
    })
}

/// `tree` is a spanning tree of `w` minus `removed`.
fn is_spanning_tree(
    w: &WhiteheadGraph,
    tree: &[(Letter, Letter)],
    removed: Option<Letter>,
) -> bool {
    let n = w.vertex_count();
    let target = n - removed.is_some() as usize;
    if tree.len() + 1 != target {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(x, y) in tree {
        if x.index() > w.rank() || y.index() > w.rank() || !w.has_edge(x, y) {
            return false;
        }
        if Some(x) == removed || Some(y) == removed {
            return false;
        }
        let (rx, ry) = (
            find(&mut parent, x.ordinal()),
            find(&mut parent, y.ordinal()),
        );
        if rx == ry {
            return false;
        }
        parent[rx] = ry;
    }
    true
}

/// Checks a certificate against `set` from scratch.
pub fn verify_certificate(rank: usize, set: &[CyclicWord], cert: &TamenessCertificate) -> bool {
    if cert.rank != rank || cert.words.as_slice() != set {
        return false;
    }
    match &cert.evidence {
        Evidence::Tame { rose, morphism } => {
            let theta = rose.realized_graph();
            if theta.rank() != rank || recognize_almost_rose(theta).is_none() {
                return false;
            }
            let Ok(gamma) = disjoint_circuits(rank, set) else {
                return false;
            };
            morphism.verify(&gamma, theta)
                && set.iter().all(|s| closed_path_reading(theta, s).is_some())
        }
        Evidence::NotTame { whitehead, witness } => {
            let Ok(wh) = wh_of_set(rank, set) else {
                return false;
            };
            if &wh != whitehead || !wh.is_connected() || !wh.cut_vertices().is_empty() {
                return false;
            }
            let letters: Vec<Letter> = wh.letters().collect();
            is_spanning_tree(&wh, &witness.spanning_tree, None)
                && witness.avoiding.len() == letters.len()
                && witness
                    .avoiding
                    .iter()
                    .zip(&letters)
                    .all(|((x, tree), y)| x == y && is_spanning_tree(&wh, tree, Some(*x)))
        }
    }
}

fn tree_text(tree: &[(Letter, Letter)]) -> String {
    tree.iter().map(|(x, y)| format!(" {x}-{y}")).collect()
}

fn parse_tree(parts: &[&str], line: usize) -> Result<TreeEdges> {
    parts
        .iter()
        .map(|p| {
            let cs: Vec<char> = p.chars().collect();
            match cs.as_slice() {
                [x, '-', y] => match (Letter::from_char(*x), Letter::from_char(*y)) {
                    (Some(x), Some(y)) => Ok((x, y)),
                    _ => Err(Error::format(line, format!("bad tree edge {p:?}"))),
                },
                _ => Err(Error::format(line, format!("bad tree edge {p:?}"))),
            }
        })
        .collect()
}

fn parse_letter(text: &str, line: usize) -> Result<Letter> {
    let mut cs = text.chars();
    match (cs.next().and_then(Letter::from_char), cs.next()) {
        (Some(l), None) => Ok(l),
        _ => Err(Error::format(line, format!("bad letter {text:?}"))),
    }
}

const HEADER: &str = "tameness-certificate v1";

impl TamenessCertificate {
    /// Deterministic line-based serialization.
    pub fn to_text(&self) -> String {
        let mut s = format!("{HEADER}\nrank {}\n", self.rank);
        for w in &self.words {
            writeln!(s, "word {w}").unwrap();
        }
        writeln!(s, "verdict {}", self.verdict()).unwrap();
        match &self.evidence {
            Evidence::Tame { rose, morphism } => {
                writeln!(s, "almost-rose {} {} {}", rose.n(), rose.k(), rose.l()).unwrap();
                for (j, y) in rose.relabeling().images().iter().enumerate() {
                    let sign = if y.is_inverted() { '-' } else { '+' };
                    writeln!(s, "relabel {} -> {sign}{}", j + 1, y.index()).unwrap();
                }
                rose.realized_graph().write_body(&mut s);
                for (p, q) in &morphism.vertex_map {
                    writeln!(s, "vmap {p} -> {q}").unwrap();
                }
                for (e, d) in &morphism.edge_map {
                    writeln!(s, "emap {e} -> {d}").unwrap();
                }
            }
            Evidence::NotTame { whitehead, witness } => {
                for (x, y) in whitehead.edges() {
                    writeln!(s, "wh-edge {x} {y}").unwrap();
                }
                writeln!(s, "spanning{}", tree_text(&witness.spanning_tree)).unwrap();
                for (x, tree) in &witness.avoiding {
                    writeln!(s, "avoiding {x}:{}", tree_text(tree)).unwrap();
                }
            }
        }
        s.push_str("end\n");
        s
    }

    pub fn parse_text(text: &str) -> Result<TamenessCertificate> {
        let lines: Vec<(usize, &str)> = text.lines().enumerate().collect();
        let mut it = lines.iter().copied().filter(|(_, l)| !l.trim().is_empty());
        match it.next() {
            Some((_, l)) if l.trim() == HEADER => {}
            _ => return Err(Error::format(1, "missing certificate header")),
        }
        let mut rank = None;
        let mut words = Vec::new();
        let mut verdict = None;
        let mut params = None;
        let mut relabel: BTreeMap<usize, Letter> = BTreeMap::new();
        let mut graph_lines = Vec::new();
        let mut morphism = GraphMorphism::default();
        let mut wh_edges = Vec::new();
        let mut spanning = None;
        let mut avoiding = Vec::new();
        let mut ended = false;
        for (i, raw) in it {
            let line_no = i + 1;
            if ended {
                return Err(Error::format(line_no, "content after `end`"));
            }
            let parts: Vec<&str> = raw.split_whitespace().collect();
            let num = |s: &str| -> Result<usize> {
                s.parse()
                    .map_err(|_| Error::format(line_no, format!("bad number {s:?}")))
            };
            match parts.as_slice() {
                ["rank", n] => rank = Some(num(n)?),
                ["word", w] => {
                    let r = rank.ok_or_else(|| Error::format(line_no, "word before rank"))?;
                    words.push(
                        CyclicWord::parse(w, r)
                            .map_err(|e| Error::format(line_no, e.to_string()))?,
                    );
                }
                ["verdict", "tame"] => verdict = Some(Verdict::Tame),
                ["verdict", "not-tame"] => verdict = Some(Verdict::NotTame),
                ["almost-rose", n, k, l] => params = Some((num(n)?, num(k)?, num(l)?)),
                ["relabel", i, "->", img] => {
                    let (sign, idx) = img.split_at(1);
                    let idx = num(idx)?;
                    if idx == 0 || idx > crate::words::MAX_RANK {
                        return Err(Error::format(line_no, "relabel index out of range"));
                    }
                    let letter = match sign {
                        "+" => Letter::positive(idx),
                        "-" => Letter::negative(idx),
                        _ => return Err(Error::format(line_no, "relabel sign must be + or -")),
                    };
                    relabel.insert(num(i)?, letter);
                }
                ["vertex", ..] | ["edge", ..] => graph_lines.push((i, raw)),
                ["vmap", p, "->", q] => {
                    morphism
                        .vertex_map
                        .insert(VertexId(num(p)? as u32), VertexId(num(q)? as u32));
                }
                ["emap", e, "->", d] => {
                    let d = DirEdge::parse(d)
                        .ok_or_else(|| Error::format(line_no, format!("bad edge {d:?}")))?;
                    morphism.edge_map.insert(EdgeId(num(e)? as u32), d);
                }
                ["wh-edge", x, y] => {
                    wh_edges.push((parse_letter(x, line_no)?, parse_letter(y, line_no)?))
                }
                ["spanning", rest @ ..] => spanning = Some(parse_tree(rest, line_no)?),
                ["avoiding", head, rest @ ..] => {
                    let x = head
                        .strip_suffix(':')
                        .ok_or_else(|| Error::format(line_no, "expected `avoiding x:`"))?;
                    avoiding.push((parse_letter(x, line_no)?, parse_tree(rest, line_no)?));
                }
                ["end"] => ended = true,
                _ => return Err(Error::format(line_no, format!("unrecognized line {raw:?}"))),
            }
        }
        if !ended {
            return Err(Error::format(lines.len(), "missing `end`"));
        }
        let rank = rank.ok_or_else(|| Error::format(0, "missing rank"))?;
        let evidence = match verdict {
            Some(Verdict::Tame) => {
                let (n, k, l) =
                    params.ok_or_else(|| Error::format(0, "missing almost-rose line"))?;
                let images: Vec<Letter> = (1..=n)
                    .map(|j| {
                        relabel
                            .get(&j)
                            .copied()
                            .ok_or_else(|| Error::format(0, format!("missing relabel {j}")))
                    })
                    .collect::<Result<_>>()?;
                if relabel.len() != n {
                    return Err(Error::format(0, "extra relabel lines"));
                }
                let rose = AlmostRose::new(n, k, l, SignedRelabeling::new(images)?)?;
                let (graph, _) = parse_graph_lines(graph_lines.into_iter(), Some(n))?;
                if &graph != rose.realized_graph() {
                    return Err(Error::format(
                        0,
                        "graph lines disagree with almost-rose parameters",
                    ));
                }
                Evidence::Tame { rose, morphism }
            }
            Some(Verdict::NotTame) => Evidence::NotTame {
                whitehead: WhiteheadGraph::from_edges(rank, &wh_edges)?,
                witness: NonSeparationWitness {
                    spanning_tree: spanning
                        .ok_or_else(|| Error::format(0, "missing spanning tree"))?,
                    avoiding,
                },
            },
            None => return Err(Error::format(0, "missing verdict")),
        };
        Ok(TamenessCertificate {
            rank,
            words,
            evidence,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{circuit, rose, wedge_of_words};

    fn l(c: char) -> Letter {
        Letter::from_char(c).unwrap()
    }

    fn letters(s: &str) -> Vec<Letter> {
        let mut v: Vec<Letter> = s.chars().map(l).collect();
        v.sort();
        v
    }

    fn cws(words: &[&str], rank: usize) -> Vec<CyclicWord> {
        words
            .iter()
            .map(|w| CyclicWord::parse(w, rank).unwrap())
            .collect()
    }

    fn wedge_of(v1: &str, v2: &str, rank: usize) -> WhiteheadGraph {
        WhiteheadGraph::complete_on(rank, &letters(v1))
            .unwrap()
            .union(&WhiteheadGraph::complete_on(rank, &letters(v2)).unwrap())
            .unwrap()
    }

    #[test]
    fn theta_shapes() {
        let t = theta(3, 1, 2).unwrap();
        let g = t.realized_graph();
        assert_eq!((g.vertex_count(), g.edge_pair_count()), (2, 4));
        let e: Vec<_> = g
            .edges()
            .map(|(_, e)| (e.origin, e.terminus, e.label))
            .collect();
        assert_eq!(
            e,
            vec![
                (U, U, l('a')),
                (U, V, l('a')),
                (U, V, l('b')),
                (V, V, l('c'))
            ]
        );
        let t = theta(2, 1, 1).unwrap();
        let e: Vec<_> = t
            .realized_graph()
            .edges()
            .map(|(_, e)| (e.origin, e.terminus, e.label))
            .collect();
        assert_eq!(e, vec![(U, U, l('a')), (U, V, l('a')), (V, V, l('b'))]);
        assert_eq!(
            theta(2, 2, 2).unwrap_err(),
            Error::ThetaConstraint { n: 2, k: 2, l: 2 }
        );
        assert!(theta(3, 2, 1).is_err());
    }

    #[test]
    fn theta_whitehead_closed_form() {
        let cases = [
            (3, 1, 2, "aAB", "abcC"),
            (2, 1, 1, "aA", "abB"),
            (2, 1, 2, "aAB", "ab"),
        ];
        for (n, k, lv, v1, v2) in cases {
            let t = theta(n, k, lv).unwrap();
            assert_eq!(t.sides(), (letters(v1), letters(v2)));
            assert_eq!(wh_of_theta(&t), wedge_of(v1, v2, n));
            assert_eq!(wh_of_graph(t.realized_graph()), wh_of_theta(&t));
        }
        assert_eq!(theta(3, 1, 2).unwrap().whitehead_graph().edge_count(), 9);
        assert_eq!(
            theta(3, 1, 2).unwrap().whitehead_graph().cut_vertices(),
            vec![l('a')]
        );
    }

    #[test]
    fn recognize_examples() {
        let t = theta(3, 1, 2).unwrap();
        let r = recognize_almost_rose(t.realized_graph()).unwrap();
        assert_eq!(r, t);

        let w = wedge_of_words(
            &[Word::parse("ab", 2).unwrap(), Word::parse("b", 2).unwrap()],
            2,
        )
        .unwrap();
        let r = recognize_almost_rose(&w.graph).unwrap();
        assert_eq!((r.k(), r.l()), (1, 2));
        assert_eq!(r.relabeling().images(), &[l('B'), l('a')]);

        assert!(recognize_almost_rose(&rose(2).unwrap()).is_none());
        assert!(recognize_almost_rose(&circuit(&CyclicWord::parse("ab", 2).unwrap())).is_none());
    }

    #[test]
    fn enumeration_counts() {
        let two: Vec<AlmostRose> = enumerate_almost_roses(2).unwrap().collect();
        assert_eq!(two.len(), 12);
        assert!(two.len() < 50);
        for r in &two {
            assert_eq!(recognize_almost_rose(r.realized_graph()).as_ref(), Some(r));
        }
        assert_eq!(enumerate_almost_roses(3).unwrap().count(), 90);
    }

    #[test]
    fn build_rose_examples() {
        let aab = wh_of_set(2, &cws(&["aab"], 2)).unwrap();
        let r = build_rose_from_whitehead(&aab).unwrap();
        assert_eq!((r.n(), r.k(), r.l()), (2, 1, 2));
        assert_eq!(r.relabeling().images(), &[l('a'), l('B')]);
        assert_eq!(r.sides(), (letters("aAb"), letters("aB")));
        assert!(aab.is_subgraph_of(&r.whitehead_graph()).unwrap());

        let ab = wh_of_set(2, &cws(&["ab"], 2)).unwrap();
        let r = build_rose_from_whitehead(&ab).unwrap();
        assert_eq!(r.wedge_letter(), l('a'));
        let (v1, v2) = r.sides();
        assert!(v1.contains(&l('A')) && v1.contains(&l('b')));
        assert!(v2.contains(&l('B')));

        let cycle = wh_of_set(2, &cws(&["abAB"], 2)).unwrap();
        assert!(build_rose_from_whitehead(&cycle).is_none());
    }

    #[test]
    fn unused_letters_become_loops_at_v() {
        let w = wh_of_set(3, &cws(&["aab"], 3)).unwrap();
        let r = build_rose_from_whitehead(&w).unwrap();
        assert_eq!(r.relabeling().images()[2], l('c'));
        assert_eq!(r.l(), 2);
    }

    #[test]
    fn standard_morphism_examples() {
        let r = build_rose_from_whitehead(&wh_of_set(2, &cws(&["aab"], 2)).unwrap()).unwrap();
        let g = circuit(&CyclicWord::parse("aab", 2).unwrap());
        let m = standard_morphism(&g, &r).unwrap();
        assert!(m.verify(&g, r.realized_graph()));

        let cyc = circuit(&CyclicWord::parse("abAB", 2).unwrap());
        for r in enumerate_almost_roses(2).unwrap() {
            assert!(standard_morphism(&cyc, &r).is_none());
        }

        let set = cws(&["ab"], 2);
        let r = build_rose_from_whitehead(&wh_of_set(2, &set).unwrap()).unwrap();
        let g = disjoint_circuits(2, &set).unwrap();
        assert!(standard_morphism(&g, &r).is_some());
    }

    #[test]
    fn decide_examples() {
        let ab = cws(&["ab"], 2);
        assert_eq!(decide_tame(2, &ab).unwrap().verdict(), Verdict::Tame);
        let cyc = cws(&["abAB"], 2);
        let cert = decide_tame(2, &cyc).unwrap();
        assert_eq!(cert.verdict(), Verdict::NotTame);
        assert!(verify_certificate(2, &cyc, &cert));
        let aab = cws(&["aab"], 2);
        let cert = decide_tame(2, &aab).unwrap();
        match &cert.evidence {
            Evidence::Tame { rose, .. } => assert_eq!((rose.k(), rose.l()), (1, 2)),
            _ => panic!("aab is tame"),
        }
        assert!(verify_certificate(2, &aab, &cert));
        // empty set: edgeless Whitehead graph
        let empty = decide_tame(2, &[]).unwrap();
        assert_eq!(empty.verdict(), Verdict::Tame);
        assert!(verify_certificate(2, &[], &empty));
    }

    #[test]
    fn tampered_certificates_fail() {
        let aab = cws(&["aab"], 2);
        let mut cert = decide_tame(2, &aab).unwrap();
        if let Evidence::Tame { morphism, .. } = &mut cert.evidence {
            let first = *morphism.edge_map.keys().next().unwrap();
            let img = morphism.edge_map[&first];
            morphism.edge_map.insert(first, img.inverse());
        }
        assert!(!verify_certificate(2, &aab, &cert));

        let cyc = cws(&["abAB"], 2);
        let mut cert = decide_tame(2, &cyc).unwrap();
        if let Evidence::NotTame { witness, .. } = &mut cert.evidence {
            witness.spanning_tree.pop();
        }
        assert!(!verify_certificate(2, &cyc, &cert));
        // certificate for a different set
        let good = decide_tame(2, &cyc).unwrap();
        assert!(!verify_certificate(2, &aab, &good));
    }

    #[test]
    fn certificate_text_round_trip() {
        for (words, rank) in [(vec!["aab"], 2), (vec!["abAB"], 2), (vec!["ab", "c"], 3)] {
            let set = cws(&words, rank);
            let cert = decide_tame(rank, &set).unwrap();
            let text = cert.to_text();
            let back = TamenessCertificate::parse_text(&text).unwrap();
            assert_eq!(back, cert);
            assert_eq!(back.to_text(), text);
        }
        assert!(TamenessCertificate::parse_text("nonsense\n").is_err());
    }

    #[test]
    fn relabeling_algebra() {
        let s = SignedRelabeling::new(vec![l('B'), l('a'), l('C')]).unwrap();
        let inv = s.inverse();
        for x in Letter::all(3) {
            assert_eq!(inv.apply(s.apply(x)), x);
        }
        assert!(SignedRelabeling::new(vec![l('a'), l('A')]).is_err());
        let w = Word::parse("abC", 3).unwrap();
        assert_eq!(s.apply_word(&w).to_string(), "Bac");
    }
}
