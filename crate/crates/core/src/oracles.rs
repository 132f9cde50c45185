//! Brute-force generators and checkers.
//!
//! Primitive elements come from orbits of `x1` under Nielsen generators,
//! separable sets from explicit free splittings pushed through random
//! automorphisms, and label-preserving morphisms from exhaustive search.
//! None of these share code paths with the decision procedure they check.
//!
//! The length-capped orbit is sound (every class it returns is primitive)
//! but not claimed to contain every primitive class up to the cap.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::folding::{factor_through_almost_rose, FoldSequence};
use crate::graph::{
    closed_path_reading, subgroup_graph, wedge_of_words, DirEdge, EdgeId, GraphMorphism,
    LabeledGraph, VertexId,
};
use crate::tameness::{enumerate_almost_roses, AlmostRose, SignedRelabeling};
use crate::words::{check_rank, CyclicWord, Letter, Word};

pub const DEFAULT_STATE_LIMIT: u64 = 10_000_000;

/// Substitution `x_j ↦ images[j - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EndomorphismSpec {
    images: Vec<Word>,
}

impl EndomorphismSpec {
    pub fn new(images: Vec<Word>) -> Result<EndomorphismSpec> {
        let n = images.len();
        check_rank(n)?;
        if let Some(w) = images.iter().find(|w| w.rank() != n) {
            return Err(Error::RankMismatch {
                left: n,
                right: w.rank(),
            });
        }
        Ok(EndomorphismSpec {
            images: images.iter().map(Word::free_reduce).collect(),
        })
    }

    pub fn identity(rank: usize) -> Result<EndomorphismSpec> {
        EndomorphismSpec::new(
            (1..=rank)
                .map(|j| Word::letter(Letter::positive(j), rank))
                .collect::<Result<_>>()?,
        )
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.rank() != self.rank() {
            return Err(Error::RankMismatch {
                left: self.rank(),
                right: w.rank(),
            });
        }
        let mut letters = Vec::new();
        for &x in w.letters() {
            let img = &self.images[x.index() - 1];
            if x.is_inverted() {
                letters.extend(img.inverse().letters());
            } else {
                letters.extend(img.letters());
            }
        }
        Ok(Word::new(letters, self.rank())?.free_reduce())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &EndomorphismSpec) -> Result<EndomorphismSpec> {
        EndomorphismSpec::new(
            other
                .images
                .iter()
                .map(|w| self.apply(w))
                .collect::<Result<_>>()?,
        )
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(j, w)| w.letters() == [Letter::positive(j + 1)])
    }
}

pub fn apply_endomorphism(e: &EndomorphismSpec, w: &Word) -> Result<Word> {
    e.apply(w)
}

/// An endomorphism stored with an inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Automorphism {
    pub forward: EndomorphismSpec,
    pub inverse: EndomorphismSpec,
}

impl Automorphism {
    pub fn identity(rank: usize) -> Result<Automorphism> {
        let id = EndomorphismSpec::identity(rank)?;
        Ok(Automorphism {
            forward: id.clone(),
            inverse: id,
        })
    }

    pub fn rank(&self) -> usize {
        self.forward.rank()
    }

    /// Both composites reduce to the identity on every basis letter.
    pub fn verify(&self) -> bool {
        self.forward.rank() == self.inverse.rank()
            && [
                self.forward.compose(&self.inverse),
                self.inverse.compose(&self.forward),
            ]
            .iter()
            .all(|c| c.as_ref().is_ok_and(EndomorphismSpec::is_identity))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        Ok(Automorphism {
            forward: self.forward.compose(&other.forward)?,
            inverse: other.inverse.compose(&self.inverse)?,
        })
    }

    pub fn inverted(&self) -> Automorphism {
        Automorphism {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        self.forward.apply(w)
    }

    pub fn apply_cyclic(&self, c: &CyclicWord) -> Result<CyclicWord> {
        CyclicWord::class_of(&self.forward.apply(&c.to_word())?)
    }
}

fn word_text(w: &Word) -> String {
    if w.is_empty() {
        "1".to_string()
    } else {
        w.to_string()
    }
}

fn parse_word_text(text: &str, rank: usize, line: usize) -> Result<Word> {
    if text == "1" {
        return Word::identity(rank);
    }
    Word::parse(text, rank).map_err(|e| Error::format(line, e.to_string()))
}

impl Automorphism {
    /// `image i -> word` and `inverse i -> word` lines.
    pub fn to_text(&self) -> String {
        let mut s = format!("automorphism v1\nrank {}\n", self.rank());
        for (i, w) in self.forward.images().iter().enumerate() {
            writeln!(s, "image {} -> {}", i + 1, word_text(w)).unwrap();
        }
        for (i, w) in self.inverse.images().iter().enumerate() {
            writeln!(s, "inverse {} -> {}", i + 1, word_text(w)).unwrap();
        }
        s.push_str("end\n");
        s
    }

    pub fn parse_text(text: &str) -> Result<Automorphism> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        match lines.next() {
            Some((_, l)) if l.trim() == "automorphism v1" => {}
            _ => return Err(Error::format(1, "missing automorphism header")),
        }
        let mut rank = None;
        let mut maps: [BTreeMap<usize, Word>; 2] = Default::default();
        let mut ended = false;
        for (i, raw) in lines {
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
                [kind @ ("image" | "inverse"), j, "->", w] => {
                    let r = rank.ok_or_else(|| Error::format(line_no, "rank must come first"))?;
                    let slot = usize::from(*kind == "inverse");
                    maps[slot].insert(num(j)?, parse_word_text(w, r, line_no)?);
                }
                ["end"] => ended = true,
                _ => return Err(Error::format(line_no, format!("unrecognized line {raw:?}"))),
            }
        }
        if !ended {
            return Err(Error::format(0, "missing `end`"));
        }
        let rank = rank.ok_or_else(|| Error::format(0, "missing rank"))?;
        let dense = |m: &BTreeMap<usize, Word>| -> Result<Vec<Word>> {
            if m.keys().copied().ne(1..=rank) {
                return Err(Error::format(0, format!("expected lines 1..={rank}")));
            }
            Ok(m.values().cloned().collect())
        };
        Ok(Automorphism {
            forward: EndomorphismSpec::new(dense(&maps[0])?)?,
            inverse: EndomorphismSpec::new(dense(&maps[1])?)?,
        })
    }
}

fn spec_from(rank: usize, f: impl Fn(usize) -> Vec<Letter>) -> EndomorphismSpec {
    EndomorphismSpec::new((1..=rank).map(|j| Word::new(f(j), rank).unwrap()).collect()).unwrap()
}

/// Transpositions `x1 ↔ xi`, inversion of `x1`, and the transvection
/// `x1 ↦ x1x2`, each with its inverse attached.
pub fn nielsen_generators(n: usize) -> Result<Vec<Automorphism>> {
    check_rank(n)?;
    let x = Letter::positive;
    let mut out = Vec::new();
    for i in 2..=n {
        let swap = spec_from(n, |j| {
            vec![x(if j == 1 {
                i
            } else if j == i {
                1
            } else {
                j
            })]
        });
        out.push(Automorphism {
            forward: swap.clone(),
            inverse: swap,
        });
    }
    let invert = spec_from(n, |j| vec![if j == 1 { x(1).inverse() } else { x(j) }]);
    out.push(Automorphism {
        forward: invert.clone(),
        inverse: invert,
    });
    out.push(Automorphism {
        forward: spec_from(n, |j| if j == 1 { vec![x(1), x(2)] } else { vec![x(j)] }),
        inverse: spec_from(n, |j| {
            if j == 1 {
                vec![x(1), x(2).inverse()]
            } else {
                vec![x(j)]
            }
        }),
    });
    Ok(out)
}

/// Generators together with their inverses, duplicates removed.
fn nielsen_moves(n: usize) -> Result<Vec<Automorphism>> {
    let mut moves = Vec::new();
    for g in nielsen_generators(n)? {
        let inv = g.inverted();
        if inv != g {
            moves.push(g);
            moves.push(inv);
        } else {
            moves.push(g);
        }
    }
    Ok(moves)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub classes: BTreeSet<CyclicWord>,
    /// The budget ran out before the closure reached a fixed point.
    pub budget_exhausted: bool,
}

/// Breadth-first closure of the class of `x1` under Nielsen moves, keeping
/// only classes of cyclic length at most `max_len`. `budget` bounds the
/// number of classes expanded.
pub fn primitive_orbit(n: usize, max_len: usize, budget: usize) -> Result<Orbit> {
    if max_len == 0 {
        return Err(Error::Precondition("max_len must be at least 1".into()));
    }
    let moves = nielsen_moves(n)?;
    let start = CyclicWord::from_letters(vec![Letter::positive(1)], n)?;
    let mut classes = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut expanded = 0;
    while let Some(c) = queue.pop_front() {
        if expanded == budget {
            return Ok(Orbit {
                classes,
                budget_exhausted: true,
            });
        }
        expanded += 1;
        for m in &moves {
            let image = m.apply_cyclic(&c)?;
            if image.len() <= max_len && classes.insert(image.clone()) {
                queue.push_back(image);
            }
        }
    }
    Ok(Orbit {
        classes,
        budget_exhausted: false,
    })
}

/// A random composite of `steps` Nielsen moves.
pub fn random_automorphism(n: usize, steps: usize, rng: &mut impl Rng) -> Result<Automorphism> {
    let moves = nielsen_moves(n)?;
    let mut phi = Automorphism::identity(n)?;
    for _ in 0..steps {
        phi = moves.choose(rng).unwrap().compose(&phi)?;
    }
    Ok(phi)
}

/// A random reduced word of length `len` over the given generators.
pub fn random_reduced_word(
    rank: usize,
    generators: &[usize],
    len: usize,
    rng: &mut impl Rng,
) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let j = *generators.choose(rng).unwrap();
        let l = Letter::new(j, rng.gen());
        if letters.last() != Some(&l.inverse()) {
            letters.push(l);
        }
    }
    Word::new(letters, rank).unwrap()
}

/// A split `F_n = ⟨x1..xm⟩ * ⟨x(m+1)..xn⟩`, an automorphism `φ`, and per
/// element a conjugator `c` with `s = c · φ(u) · c⁻¹` for some `u` in one
/// factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparableWitness {
    pub split: usize,
    pub automorphism: Automorphism,
    pub conjugators: Vec<Word>,
}

impl SeparableWitness {
    pub fn rank(&self) -> usize {
        self.automorphism.rank()
    }

    pub fn factor_generators(&self, side: usize) -> Vec<usize> {
        if side == 0 {
            (1..=self.split).collect()
        } else {
            (self.split + 1..=self.rank()).collect()
        }
    }

    /// Factor (0 or 1) containing `φ⁻¹(c⁻¹ s c)`, if any.
    pub fn factor_of(&self, s: &CyclicWord, conj: &Word) -> Option<usize> {
        let inner = conj.inverse().mul(&s.to_word()).ok()?.mul(conj).ok()?;
        let u = self.automorphism.inverse.apply(&inner).ok()?;
        if u.is_empty() {
            return None;
        }
        (0..2).find(|&side| {
            let gens = self.factor_generators(side);
            u.letters().iter().all(|l| gens.contains(&l.index()))
        })
    }

    /// Replays the witness against `set`.
    pub fn validates(&self, set: &[CyclicWord]) -> bool {
        let n = self.rank();
        (1..n).contains(&self.split)
            && self.automorphism.verify()
            && self.conjugators.len() == set.len()
            && set
                .iter()
                .zip(&self.conjugators)
                .all(|(s, c)| s.rank() == n && c.rank() == n && self.factor_of(s, c).is_some())
    }

    pub fn to_text(&self, set: &[CyclicWord]) -> String {
        let word = word_text;
        let mut s = format!(
            "separable-witness v1\nrank {}\nsplit {}\n",
            self.rank(),
            self.split
        );
        for w in set {
            writeln!(s, "word {w}").unwrap();
        }
        for (i, w) in self.automorphism.forward.images().iter().enumerate() {
            writeln!(s, "image {} -> {}", i + 1, word(w)).unwrap();
        }
        for (i, w) in self.automorphism.inverse.images().iter().enumerate() {
            writeln!(s, "inverse {} -> {}", i + 1, word(w)).unwrap();
        }
        for (j, c) in self.conjugators.iter().enumerate() {
            writeln!(s, "conj {} -> {}", j + 1, word(c)).unwrap();
        }
        s.push_str("end\n");
        s
    }

    pub fn parse_text(text: &str) -> Result<(SeparableWitness, Vec<CyclicWord>)> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == "separable-witness v1" => {}
            _ => return Err(Error::format(1, "missing witness header")),
        }
        let mut rank = None;
        let mut split = None;
        let mut words = Vec::new();
        let mut maps: [BTreeMap<usize, Word>; 3] = Default::default();
        let mut ended = false;
        for (i, raw) in lines {
            let line_no = i + 1;
            if ended {
                return Err(Error::format(line_no, "content after `end`"));
            }
            let parts: Vec<&str> = raw.split_whitespace().collect();
            let num = |s: &str| -> Result<usize> {
                s.parse()
                    .map_err(|_| Error::format(line_no, format!("bad number {s:?}")))
            };
            let need_rank = || rank.ok_or_else(|| Error::format(line_no, "rank must come first"));
            match parts.as_slice() {
                ["rank", n] => rank = Some(num(n)?),
                ["split", m] => split = Some(num(m)?),
                ["word", w] => words.push(
                    CyclicWord::parse(w, need_rank()?)
                        .map_err(|e| Error::format(line_no, e.to_string()))?,
                ),
                [kind @ ("image" | "inverse" | "conj"), j, "->", w] => {
                    let w = parse_word_text(w, need_rank()?, line_no)?;
                    let slot = match *kind {
                        "image" => 0,
                        "inverse" => 1,
                        _ => 2,
                    };
                    maps[slot].insert(num(j)?, w);
                }
                ["end"] => ended = true,
                _ => return Err(Error::format(line_no, format!("unrecognized line {raw:?}"))),
            }
        }
        if !ended {
            return Err(Error::format(0, "missing `end`"));
        }
        let rank = rank.ok_or_else(|| Error::format(0, "missing rank"))?;
        let dense = |m: &BTreeMap<usize, Word>, len: usize, what: &str| -> Result<Vec<Word>> {
            if m.len() != len || m.keys().copied().ne(1..=len) {
                return Err(Error::format(0, format!("expected {what} lines 1..={len}")));
            }
            Ok(m.values().cloned().collect())
        };
        let witness = SeparableWitness {
            split: split.ok_or_else(|| Error::format(0, "missing split"))?,
            automorphism: Automorphism {
                forward: EndomorphismSpec::new(dense(&maps[0], rank, "image")?)?,
                inverse: EndomorphismSpec::new(dense(&maps[1], rank, "inverse")?)?,
            },
            conjugators: dense(&maps[2], words.len(), "conj")?,
        };
        Ok((witness, words))
    }
}

/// `count` elements, each conjugate into one factor of a random split after
/// a random automorphism, with cyclic length at most `max_len`.
pub fn random_separable_set(
    n: usize,
    seed: u64,
    count: usize,
    max_len: usize,
) -> Result<(Vec<CyclicWord>, SeparableWitness)> {
    check_rank(n)?;
    if max_len == 0 {
        return Err(Error::Precondition("max_len must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let split = rng.gen_range(1..n);
    let mut phi = random_automorphism(n, rng.gen_range(0..=6), &mut rng)?;
    // a long automorphism may leave nothing short enough; back off to the identity
    for _ in 0..3 {
        if (1..=n).any(|j| phi.forward.images()[j - 1].len() <= max_len) {
            break;
        }
        phi = random_automorphism(n, rng.gen_range(0..=2), &mut rng)?;
    }
    if !(1..=n).any(|j| phi.forward.images()[j - 1].len() <= max_len) {
        phi = Automorphism::identity(n)?;
    }
    let factors = [(1..=split).collect::<Vec<_>>(), (split + 1..=n).collect()];
    let mut set = Vec::new();
    let mut conjugators = Vec::new();
    let mut attempts = 0;
    while set.len() < count {
        attempts += 1;
        let gens = &factors[rng.gen_range(0..2)];
        let len = if attempts > 200 {
            1
        } else {
            rng.gen_range(1..=3)
        };
        let mut u = random_reduced_word(n, gens, len, &mut rng);
        if attempts > 400 {
            // fall back to a generator whose image is short
            let j = (1..=n)
                .find(|&j| phi.forward.images()[j - 1].len() <= max_len)
                .unwrap();
            u = Word::letter(Letter::positive(j), n)?;
        }
        let c = random_reduced_word(
            n,
            &(1..=n).collect::<Vec<_>>(),
            rng.gen_range(0..=2),
            &mut rng,
        );
        let t = phi.apply(&u)?.conjugate_by(&c)?;
        let Ok((class, p)) = t.cyclic_reduce() else {
            continue;
        };
        if class.len() > max_len {
            continue;
        }
        // exact conjugator from t to the canonical rotation
        let middle = p.inverse().mul(&t)?.mul(&p)?;
        let shift = (0..middle.len())
            .find(|&r| {
                let rotated: Vec<Letter> = middle.letters()[r..]
                    .iter()
                    .chain(&middle.letters()[..r])
                    .copied()
                    .collect();
                rotated == class.letters()
            })
            .expect("canonical form is a rotation");
        let x = Word::new(middle.letters()[..shift].to_vec(), n)?;
        let conj = p.mul(&x)?.inverse().mul(&c)?;
        set.push(class);
        conjugators.push(conj);
        attempts = 0;
    }
    let witness = SeparableWitness {
        split,
        automorphism: phi,
        conjugators,
    };
    debug_assert!(witness.validates(&set));
    Ok((set, witness))
}

/// A random basis `(φ(x1), …, φ(xn))` whose first element is cyclically
/// reduced of length at least 2.
pub fn random_verified_basis(n: usize, rng: &mut impl Rng) -> Result<Automorphism> {
    loop {
        let steps = rng.gen_range(2..=8);
        let phi = random_automorphism(n, steps, rng)?;
        let w1 = &phi.forward.images()[0];
        if w1.len() >= 2 && w1.is_cyclically_reduced() && phi.verify() {
            return Ok(phi);
        }
    }
}

/// Exhaustive search for a label-preserving morphism `g → h`, trying
/// target vertices in id order. Visiting more than `limit` partial
/// assignments is an error.
pub fn brute_force_morphism(
    g: &LabeledGraph,
    h: &LabeledGraph,
    limit: u64,
) -> Result<Option<GraphMorphism>> {
    if g.rank() != h.rank() {
        return Err(Error::RankMismatch {
            left: g.rank(),
            right: h.rank(),
        });
    }
    // breadth-first order so each vertex after the first of a component is
    // constrained by an already-placed neighbor
    let mut order: Vec<VertexId> = Vec::new();
    let mut placed: BTreeSet<VertexId> = BTreeSet::new();
    for start in g.vertices() {
        if !placed.insert(start) {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for d in g.out_edges(v) {
                let w = g.terminus(d);
                if placed.insert(w) {
                    queue.push_back(w);
                }
            }
        }
    }
    let position: BTreeMap<VertexId, usize> =
        order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // edges checked once both endpoints are placed, at the later position
    let mut checks: Vec<Vec<(EdgeId, usize, usize, Letter)>> = vec![Vec::new(); order.len()];
    for (id, e) in g.edges() {
        let (po, pt) = (position[&e.origin], position[&e.terminus]);
        checks[po.max(pt)].push((id, po, pt, e.label));
    }
    let targets: Vec<VertexId> = h.vertices().collect();
    let mut h_edges: BTreeMap<(VertexId, VertexId, Letter), EdgeId> = BTreeMap::new();
    for (id, e) in h.edges() {
        h_edges.entry((e.origin, e.terminus, e.label)).or_insert(id);
    }

    let mut assignment: Vec<usize> = Vec::with_capacity(order.len());
    let mut visited = 0u64;
    fn search(
        depth: usize,
        assignment: &mut Vec<usize>,
        targets: &[VertexId],
        checks: &[Vec<(EdgeId, usize, usize, Letter)>],
        h_edges: &BTreeMap<(VertexId, VertexId, Letter), EdgeId>,
        visited: &mut u64,
        limit: u64,
    ) -> Result<bool> {
        if depth == checks.len() {
            return Ok(true);
        }
        for t in 0..targets.len() {
            *visited += 1;
            if *visited > limit {
                return Err(Error::SearchLimit { limit });
            }
            assignment.push(t);
            let ok = checks[depth].iter().all(|&(_, po, pt, label)| {
                h_edges.contains_key(&(targets[assignment[po]], targets[assignment[pt]], label))
            });
            if ok
                && search(
                    depth + 1,
                    assignment,
                    targets,
                    checks,
                    h_edges,
                    visited,
                    limit,
                )?
            {
                return Ok(true);
            }
            assignment.pop();
        }
        Ok(false)
    }
    if !search(
        0,
        &mut assignment,
        &targets,
        &checks,
        &h_edges,
        &mut visited,
        limit,
    )? {
        return Ok(None);
    }
    let vertex_map: BTreeMap<VertexId, VertexId> = order
        .iter()
        .zip(&assignment)
        .map(|(&v, &t)| (v, targets[t]))
        .collect();
    let mut edge_map = BTreeMap::new();
    for level in &checks {
        for &(id, po, pt, label) in level {
            let key = (targets[assignment[po]], targets[assignment[pt]], label);
            edge_map.insert(id, DirEdge::forward(h_edges[&key]));
        }
    }
    Ok(Some(GraphMorphism {
        vertex_map,
        edge_map,
    }))
}

/// A uniformly random labeled graph with `1..=max_vertices` vertices and
/// `0..=max_edges` edge pairs.
pub fn random_graph(
    rank: usize,
    max_vertices: usize,
    max_edges: usize,
    rng: &mut impl Rng,
) -> LabeledGraph {
    let mut g = LabeledGraph::new(rank).unwrap();
    let vs: Vec<VertexId> = (0..rng.gen_range(1..=max_vertices))
        .map(|_| g.add_vertex())
        .collect();
    for _ in 0..rng.gen_range(0..=max_edges) {
        let (a, b) = (*vs.choose(rng).unwrap(), *vs.choose(rng).unwrap());
        g.add_edge(a, b, Letter::positive(rng.gen_range(1..=rank)))
            .unwrap();
    }
    g
}

/// A random graph that maps onto `target`: vertices are assigned target
/// vertices at random and every edge lifts a target edge.
pub fn random_lift(
    target: &LabeledGraph,
    max_vertices: usize,
    max_edges: usize,
    rng: &mut impl Rng,
) -> LabeledGraph {
    let mut g = LabeledGraph::new(target.rank()).unwrap();
    let tv: Vec<VertexId> = target.vertices().collect();
    let te: Vec<_> = target.edges().map(|(_, e)| e).collect();
    let mut over: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for &t in &tv {
        let v = g.add_vertex();
        over.entry(t).or_default().push(v);
    }
    for _ in tv.len()..rng.gen_range(tv.len()..=max_vertices.max(tv.len())) {
        let t = *tv.choose(rng).unwrap();
        let v = g.add_vertex();
        over.entry(t).or_default().push(v);
    }
    if te.is_empty() {
        return g;
    }
    for _ in 0..rng.gen_range(0..=max_edges) {
        let e = te.choose(rng).unwrap();
        let a = *over[&e.origin].choose(rng).unwrap();
        let b = *over[&e.terminus].choose(rng).unwrap();
        g.add_edge(a, b, e.label).unwrap();
    }
    g
}

/// A random set of `1..=max_count` classes of cyclic length
/// `1..=max_len`.
pub fn random_cyclic_set(
    rank: usize,
    max_count: usize,
    max_len: usize,
    rng: &mut impl Rng,
) -> Vec<CyclicWord> {
    let all: Vec<usize> = (1..=rank).collect();
    let mut out = Vec::new();
    while out.len() < rng.gen_range(1..=max_count) {
        let w = random_reduced_word(rank, &all, rng.gen_range(1..=max_len), rng);
        if let Ok(c) = CyclicWord::class_of(&w) {
            out.push(c);
        }
    }
    out
}

pub struct BasisOutcome {
    pub rose: AlmostRose,
    pub sequence: FoldSequence,
    /// Start vertex and closed path in the almost-rose reading `w1`.
    pub reading: (VertexId, Vec<DirEdge>),
}

/// Folds the wedge of a verified basis and reads `w1` in the almost-rose
/// one fold before the rose.
pub fn basis_pipeline(basis: &Automorphism) -> Result<BasisOutcome> {
    if !basis.verify() {
        return Err(Error::InvalidWitness("basis has no valid inverse".into()));
    }
    let words = basis.forward.images();
    let w1 = &words[0];
    if w1.len() < 2 {
        return Err(Error::Precondition(
            "w1 has length 1; a single letter is trivially readable in any almost-rose".into(),
        ));
    }
    if !w1.is_cyclically_reduced() {
        return Err(Error::Precondition(format!(
            "w1 = {w1} is not cyclically reduced"
        )));
    }
    let wedge = wedge_of_words(words, basis.rank())?;
    let (rose, sequence) = factor_through_almost_rose(&wedge.graph)?;
    let class = CyclicWord::from_letters(w1.letters().to_vec(), basis.rank())?;
    let reading = closed_path_reading(rose.realized_graph(), &class)
        .ok_or_else(|| Error::Factorization(format!("{class} is not readable in {rose:?}")))?;
    Ok(BasisOutcome {
        rose,
        sequence,
        reading,
    })
}

pub struct SeparableOutcome {
    pub rose: AlmostRose,
    /// `None` when the wedge of factor graphs was already the rose and the
    /// almost-rose was built directly with `k = l`.
    pub sequence: Option<FoldSequence>,
    /// Letter both factors were conjugated by, repeatedly, before wedging.
    pub normalization: Vec<Letter>,
    pub readings: Vec<(VertexId, Vec<DirEdge>)>,
}

/// Wedges the core graphs of the two factors of a separable witness and
/// produces an almost-rose reading every element of `set`.
pub fn separable_pipeline(
    witness: &SeparableWitness,
    set: &[CyclicWord],
) -> Result<SeparableOutcome> {
    if !witness.validates(set) {
        return Err(Error::InvalidWitness(
            "witness does not validate the set".into(),
        ));
    }
    let n = witness.rank();
    let phi = &witness.automorphism.forward;
    let mut gens: [Vec<Word>; 2] = [0, 1].map(|side| {
        witness
            .factor_generators(side)
            .into_iter()
            .map(|j| phi.images()[j - 1].clone())
            .collect()
    });
    let mut normalization = Vec::new();
    let graphs = loop {
        let graphs = [subgroup_graph(&gens[0], n)?, subgroup_graph(&gens[1], n)?];
        // every nontrivial element of both factors reads x…x⁻¹ exactly when
        // both basepoints have a single outgoing edge, with the same label
        let lone = |b: &crate::graph::BasedGraph| {
            let out = b.graph.out_edges(b.basepoint);
            (out.len() == 1).then(|| b.graph.label(out[0]))
        };
        match (lone(&graphs[0]), lone(&graphs[1])) {
            (Some(x), Some(y)) if x == y => {
                normalization.push(x);
                let xw = Word::letter(x, n)?.inverse();
                for side in &mut gens {
                    for w in side.iter_mut() {
                        *w = w.conjugate_by(&xw)?;
                    }
                }
            }
            _ => break graphs,
        }
    };
    let (mut wedge, offset, _) = graphs[0].graph.disjoint_union(&graphs[1].graph)?;
    let b1 = graphs[0].basepoint;
    let b2 = VertexId(graphs[1].basepoint.0 + offset);
    wedge.merge_vertex(b2, b1);

    let (rose, sequence) = if wedge.is_rose() {
        let mut side_letters: [Vec<Letter>; 2] = [Vec::new(), Vec::new()];
        for (side, g) in graphs.iter().enumerate() {
            side_letters[side] = g.graph.edges().map(|(_, e)| e.label).collect();
            side_letters[side].sort();
        }
        let k = side_letters[0].len();
        let images: Vec<Letter> = side_letters.concat();
        let rose = AlmostRose::new(n, k, k, SignedRelabeling::new(images)?)?;
        (rose, None)
    } else {
        let (rose, seq) = factor_through_almost_rose(&wedge)?;
        (rose, Some(seq))
    };
    let readings = set
        .iter()
        .map(|s| {
            closed_path_reading(rose.realized_graph(), s)
                .ok_or_else(|| Error::Factorization(format!("{s} is not readable in {rose:?}")))
        })
        .collect::<Result<_>>()?;
    Ok(SeparableOutcome {
        rose,
        sequence,
        normalization,
        readings,
    })
}

/// Label-isomorphism classes among all 2-vertex core graphs of Betti
/// number `n` with `n + 1` edge pairs that fold onto the rose in one step
/// and have a single foldable pair, by exhaustive enumeration.
pub fn brute_force_almost_rose_classes(n: usize) -> Result<usize> {
    check_rank(n)?;
    use crate::folding::{find_foldable_pair, fold_once, foldable_pairs};
    let slots: Vec<(VertexId, VertexId)> = vec![
        (VertexId(0), VertexId(0)),
        (VertexId(0), VertexId(1)),
        (VertexId(1), VertexId(0)),
        (VertexId(1), VertexId(1)),
    ];
    let labels: Vec<Letter> = (1..=n).map(Letter::positive).collect();
    let choices: Vec<(VertexId, VertexId, Letter)> = labels
        .iter()
        .flat_map(|&l| slots.iter().map(move |&(a, b)| (a, b, l)))
        .collect();
    // multisets of n + 1 edges, as nondecreasing index sequences
    let mut seen = BTreeSet::new();
    let mut idx = vec![0usize; n + 1];
    loop {
        let mut g = LabeledGraph::new(n)?;
        g.add_vertex_with_id(VertexId(0))?;
        g.add_vertex_with_id(VertexId(1))?;
        for &i in &idx {
            let (a, b, l) = choices[i];
            g.add_edge(a, b, l)?;
        }
        if g.is_connected() && g.is_core() && g.betti() == n && foldable_pairs(&g).len() == 1 {
            let (a, b) = find_foldable_pair(&g).unwrap();
            let (folded, step) = fold_once(&g, a, b)?;
            if folded.is_rose() && !step.betti_dropped {
                seen.insert(crate::graph::small_canonical_form(&g, 2).unwrap());
            }
        }
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return Ok(seen.len());
            }
            pos -= 1;
            if idx[pos] + 1 < choices.len() {
                idx[pos] += 1;
                for q in pos + 1..idx.len() {
                    idx[q] = idx[pos];
                }
                break;
            }
        }
    }
}

/// All almost-roses of rank `n`, collected.
pub fn almost_roses(n: usize) -> Result<Vec<AlmostRose>> {
    Ok(enumerate_almost_roses(n)?.collect())
}

pub fn write_corpus(set: &[CyclicWord]) -> String {
    set.iter().map(|c| format!("{c}\n")).collect()
}

/// Reads one class per line, cyclically reducing and canonicalizing;
/// blank lines and `#` comments are skipped.
pub fn parse_corpus(text: &str, rank: usize) -> Result<Vec<CyclicWord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            Word::parse(l.trim(), rank)
                .and_then(|w| CyclicWord::class_of(&w))
                .map_err(|e| Error::format(i + 1, e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{circuit, rose};
    use crate::tameness::{decide_tame, standard_morphism, theta, verify_certificate, Verdict};
    use crate::whitehead::wh_of_graph;

    fn w(s: &str, n: usize) -> Word {
        Word::parse(s, n).unwrap()
    }

    fn cw(s: &str, n: usize) -> CyclicWord {
        CyclicWord::parse(s, n).unwrap()
    }

    #[test]
    fn substitution() {
        let e = EndomorphismSpec::new(vec![w("ab", 2), w("b", 2)]).unwrap();
        assert_eq!(e.apply(&w("aB", 2)).unwrap(), w("a", 2));
        assert_eq!(e.apply(&w("", 2)).unwrap(), w("", 2));
        let id = EndomorphismSpec::identity(2).unwrap();
        assert_eq!(id.apply(&w("abBa", 2)).unwrap(), w("aa", 2));
    }

    #[test]
    fn nielsen_basics() {
        let gens = nielsen_generators(2).unwrap();
        assert_eq!(gens.len(), 3);
        assert!(gens.iter().all(Automorphism::verify));
        assert_eq!(gens[0].apply(&w("aab", 2)).unwrap(), w("bba", 2));
        assert_eq!(nielsen_generators(4).unwrap().len(), 5);
        let bad = Automorphism {
            forward: gens[2].forward.clone(),
            inverse: gens[2].forward.clone(),
        };
        assert!(!bad.verify());
    }

    #[test]
    fn orbit_small() {
        let o = primitive_orbit(2, 1, 1000).unwrap();
        let got: Vec<String> = o.classes.iter().map(|c| c.to_string()).collect();
        assert_eq!(got, ["a", "A", "b", "B"]);
        let o = primitive_orbit(2, 2, 1000).unwrap();
        for c in ["ab", "aB", "Ab", "AB"] {
            assert!(o.classes.contains(&cw(c, 2)), "{c}");
        }
        assert!(!o.budget_exhausted);
        assert!(primitive_orbit(2, 0, 10).is_err());
        let small = primitive_orbit(2, 6, 3).unwrap();
        assert!(small.budget_exhausted);
    }

    #[test]
    fn orbit_avoids_commutator_and_is_tame() {
        let o = primitive_orbit(2, 6, 100_000).unwrap();
        assert!(!o.classes.contains(&cw("abAB", 2)));
        assert!(!o.classes.contains(&cw("aabb", 2)));
        for c in &o.classes {
            let cert = decide_tame(2, std::slice::from_ref(c)).unwrap();
            assert_eq!(cert.verdict(), Verdict::Tame, "{c}");
        }
    }

    #[test]
    fn separable_sets_replay() {
        for seed in 0..40 {
            let (set, wit) = random_separable_set(3, seed, 4, 8).unwrap();
            assert_eq!(set.len(), 4);
            assert!(wit.validates(&set));
            assert!(set.iter().all(|c| c.len() <= 8));
            let text = wit.to_text(&set);
            let (back, words) = SeparableWitness::parse_text(&text).unwrap();
            assert_eq!((back, words), (wit, set.clone()));
        }
        assert_eq!(
            random_separable_set(3, 7, 4, 8).unwrap(),
            random_separable_set(3, 7, 4, 8).unwrap()
        );
    }

    #[test]
    fn identity_split_gives_factor_words() {
        let wit = SeparableWitness {
            split: 1,
            automorphism: Automorphism::identity(2).unwrap(),
            conjugators: vec![Word::identity(2).unwrap(); 2],
        };
        assert!(wit.validates(&[cw("aa", 2), cw("B", 2)]));
        assert!(!wit.validates(&[cw("ab", 2), cw("B", 2)]));
    }

    #[test]
    fn brute_force_examples() {
        let limit = DEFAULT_STATE_LIMIT;
        let ab = circuit(&cw("ab", 2));
        assert!(brute_force_morphism(&ab, &rose(2).unwrap(), limit)
            .unwrap()
            .is_some());
        let bs = circuit(&cw("bb", 2));
        assert!(brute_force_morphism(&circuit(&cw("a", 2)), &bs, limit)
            .unwrap()
            .is_none());
        let t = theta(2, 1, 1).unwrap();
        let comm = circuit(&cw("abAB", 2));
        assert!(brute_force_morphism(&comm, t.realized_graph(), limit)
            .unwrap()
            .is_none());
        let big = circuit(&cw("abababababab", 2));
        assert_eq!(
            brute_force_morphism(&big, &circuit(&cw("ab", 2)), 3),
            Err(Error::SearchLimit { limit: 3 })
        );
    }

    #[test]
    fn morphism_three_way_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3] {
            let roses = almost_roses(n).unwrap();
            for i in 0..60 {
                let g = if i % 2 == 0 {
                    random_graph(n, 5, 7, &mut rng)
                } else {
                    random_lift(
                        roses.choose(&mut rng).unwrap().realized_graph(),
                        5,
                        7,
                        &mut rng,
                    )
                };
                for r in &roses {
                    let bf =
                        brute_force_morphism(&g, r.realized_graph(), DEFAULT_STATE_LIMIT).unwrap();
                    if let Some(m) = &bf {
                        assert!(m.verify(&g, r.realized_graph()));
                    }
                    let incl = wh_of_graph(&g)
                        .is_subgraph_of(&r.whitehead_graph())
                        .unwrap();
                    let sm = standard_morphism(&g, r);
                    assert_eq!(bf.is_some(), incl, "{g:?} {r:?}");
                    assert_eq!(sm.is_some(), incl);
                }
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force_classes() {
        assert_eq!(
            brute_force_almost_rose_classes(2).unwrap(),
            almost_roses(2).unwrap().len()
        );
        assert_eq!(
            brute_force_almost_rose_classes(3).unwrap(),
            almost_roses(3).unwrap().len()
        );
    }

    #[test]
    fn basis_pipeline_examples() {
        let basis = Automorphism {
            forward: EndomorphismSpec::new(vec![w("ab", 2), w("b", 2)]).unwrap(),
            inverse: EndomorphismSpec::new(vec![w("aB", 2), w("b", 2)]).unwrap(),
        };
        let out = basis_pipeline(&basis).unwrap();
        assert_eq!((out.rose.k(), out.rose.l()), (1, 2));
        assert_eq!(out.sequence.steps.len(), 1);

        let aab = Automorphism {
            forward: EndomorphismSpec::new(vec![w("aab", 2), w("b", 2)]).unwrap(),
            inverse: EndomorphismSpec::new(vec![w("aB", 2), w("b", 2)]).unwrap(),
        };
        assert!(!aab.verify());
        let basis = Automorphism {
            forward: EndomorphismSpec::new(vec![w("aab", 2), w("a", 2)]).unwrap(),
            inverse: EndomorphismSpec::new(vec![w("b", 2), w("BBa", 2)]).unwrap(),
        };
        assert!(basis.verify());
        assert!(basis_pipeline(&basis).is_ok());

        assert!(basis_pipeline(&Automorphism::identity(2).unwrap()).is_err());
    }

    #[test]
    fn basis_pipeline_random_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3] {
            for _ in 0..30 {
                let basis = random_verified_basis(n, &mut rng).unwrap();
                let out = basis_pipeline(&basis).unwrap();
                assert!(out.sequence.steps.iter().all(|s| !s.betti_dropped));
            }
        }
    }

    #[test]
    fn separable_pipeline_examples() {
        let wit = SeparableWitness {
            split: 1,
            automorphism: Automorphism::identity(2).unwrap(),
            conjugators: vec![Word::identity(2).unwrap(); 2],
        };
        let set = [cw("a", 2), cw("b", 2)];
        let out = separable_pipeline(&wit, &set).unwrap();
        assert!(out.sequence.is_none());
        assert_eq!((out.rose.k(), out.rose.l()), (1, 1));
        assert_eq!(out.rose.wedge_letter(), Letter::positive(1));

        for seed in 0..60 {
            let (set, wit) = random_separable_set(3, seed, 3, 10).unwrap();
            let out = separable_pipeline(&wit, &set).unwrap();
            assert_eq!(out.readings.len(), set.len());
            let cert = decide_tame(3, &set).unwrap();
            assert!(verify_certificate(3, &set, &cert));
            assert_eq!(cert.verdict(), Verdict::Tame);
        }
    }

    #[test]
    fn automorphism_text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_automorphism(3, 5, &mut rng).unwrap();
        let back = Automorphism::parse_text(&phi.to_text()).unwrap();
        assert_eq!(back, phi);
        assert!(Automorphism::parse_text("automorphism v1\nrank 2\nimage 1 -> a\nend\n").is_err());
    }

    #[test]
    fn corpus_round_trip() {
        let set = vec![cw("ab", 2), cw("aB", 2)];
        assert_eq!(parse_corpus(&write_corpus(&set), 2).unwrap(), set);
        assert_eq!(parse_corpus("# c\nbaB\n", 2).unwrap(), vec![cw("a", 2)]);
        assert!(parse_corpus("abA\nx!\n", 2).is_err());
    }
}
