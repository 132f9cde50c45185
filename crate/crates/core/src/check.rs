//! The acceptance suite, runnable from the library, the `check`
//! subcommand, and the `acceptance` test target.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::folding::{fold_to_completion, fold_to_completion_by, folded_canonical_form};
use crate::graph::disjoint_circuits;
use crate::oracles::{
    almost_roses, basis_pipeline, brute_force_morphism, primitive_orbit, random_cyclic_set,
    random_graph, random_lift, random_separable_set, random_verified_basis, DEFAULT_STATE_LIMIT,
};
use crate::tameness::{
    decide_tame, standard_morphism, theta, verify_certificate, wh_of_theta, TamenessCertificate,
    Verdict,
};
use crate::whitehead::{wh_of_graph, wh_of_set, WhiteheadGraph};
use crate::words::{CyclicWord, Letter};

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub limit: Duration,
    run: fn() -> Result<String, String>,
}

pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub elapsed: Duration,
    pub limit: Duration,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.3?} / limit {:?}): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed,
            self.limit,
            self.detail
        )
    }
}

impl Criterion {
    /// Runs the check; exceeding the time limit fails it.
    pub fn run(&self) -> Outcome {
        let start = Instant::now();
        let result = (self.run)();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(d) if elapsed <= self.limit => (true, d),
            Ok(d) => (false, format!("{d}; time limit exceeded")),
            Err(e) => (false, e),
        };
        Outcome {
            id: self.id,
            name: self.name,
            passed,
            elapsed,
            limit: self.limit,
            detail,
        }
    }
}

pub fn criteria() -> Vec<Criterion> {
    let ms = Duration::from_millis;
    let s = Duration::from_secs;
    vec![
        Criterion {
            id: 1,
            name: "Θ(3,1,2) Whitehead graph",
            limit: ms(1),
            run: theta_3_1_2_instance,
        },
        Criterion {
            id: 2,
            name: "almost-rose sweep n ≤ 6",
            limit: s(1),
            run: theta_sweep,
        },
        Criterion {
            id: 3,
            name: "morphism ⟺ Whitehead inclusion",
            limit: s(60),
            run: morphism_equivalence,
        },
        Criterion {
            id: 4,
            name: "primitive orbits are tame",
            limit: s(60),
            run: primitive_tame,
        },
        Criterion {
            id: 5,
            name: "separable sets are tame",
            limit: s(120),
            run: separable_tame,
        },
        Criterion {
            id: 6,
            name: "negative controls",
            limit: ms(1),
            run: negative_controls,
        },
        Criterion {
            id: 7,
            name: "basis wedge factors through an almost-rose",
            limit: s(60),
            run: basis_factorization,
        },
        Criterion {
            id: 8,
            name: "fold order independence",
            limit: s(30),
            run: fold_confluence,
        },
        Criterion {
            id: 9,
            name: "Wh(Γ_S) = Wh(S)",
            limit: s(10),
            run: circuits_whitehead,
        },
        Criterion {
            id: 10,
            name: "certificate round trip",
            limit: s(10),
            run: certificate_round_trip,
        },
    ]
}

pub fn run_all() -> Vec<Outcome> {
    criteria().iter().map(Criterion::run).collect()
}

fn letters(s: &str) -> Vec<Letter> {
    s.chars().map(|c| Letter::from_char(c).unwrap()).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn theta_3_1_2_instance() -> Result<String, String> {
    let wh = wh_of_theta(&theta(3, 1, 2).map_err(|e| e.to_string())?);
    let expected = WhiteheadGraph::complete_on(3, &letters("aAB"))
        .and_then(|a| a.union(&WhiteheadGraph::complete_on(3, &letters("abcC"))?))
        .map_err(|e| e.to_string())?;
    ensure(wh == expected, || format!("got {wh:?}"))?;
    ensure(wh.edge_count() == 9, || {
        format!("{} edges", wh.edge_count())
    })?;
    let cuts = wh.cut_vertices();
    ensure(cuts == letters("a"), || format!("cut vertices {cuts:?}"))?;
    Ok("9 edges, cut vertex a".into())
}

fn theta_sweep() -> Result<String, String> {
    let mut count = 0;
    for n in 2..=6 {
        for k in 1..n {
            for l in k..=n {
                let t = theta(n, k, l).map_err(|e| e.to_string())?;
                let wh = wh_of_graph(t.realized_graph());
                ensure(wh == wh_of_theta(&t), || format!("({n},{k},{l}): {wh:?}"))?;
                ensure(wh.cut_vertices().contains(&Letter::positive(1)), || {
                    format!("({n},{k},{l}): x1 is not a cut vertex")
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} almost-roses"))
}

fn morphism_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut pairs = 0;
    let mut positive = 0;
    for n in [2, 3] {
        let roses = almost_roses(n).map_err(|e| e.to_string())?;
        for i in 0..500 {
            let g = if i % 2 == 0 {
                random_graph(n, 6, 10, &mut rng)
            } else {
                let r = &roses[rng.gen_range(0..roses.len())];
                random_lift(r.realized_graph(), 6, 10, &mut rng)
            };
            let wh = wh_of_graph(&g);
            for r in &roses {
                let bf = brute_force_morphism(&g, r.realized_graph(), DEFAULT_STATE_LIMIT)
                    .map_err(|e| e.to_string())?;
                let incl = wh.is_subgraph_of(&r.whitehead_graph()).unwrap();
                ensure(bf.is_some() == incl, || {
                    format!(
                        "disagreement: search {} vs inclusion {incl} for {g:?} into {r:?}",
                        bf.is_some()
                    )
                })?;
                if incl {
                    positive += 1;
                    let ok =
                        standard_morphism(&g, r).is_some_and(|m| m.verify(&g, r.realized_graph()));
                    ensure(ok, || {
                        format!("edge-rule morphism failed for {g:?} into {r:?}")
                    })?;
                }
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs, {positive} with inclusion"))
}

fn certified_tame(rank: usize, set: &[CyclicWord]) -> Result<(), String> {
    let cert = decide_tame(rank, set).map_err(|e| e.to_string())?;
    ensure(cert.verdict() == Verdict::Tame, || {
        format!("{set:?} declared not tame")
    })?;
    ensure(verify_certificate(rank, set, &cert), || {
        format!("certificate for {set:?} failed verification")
    })
}

fn primitive_tame() -> Result<String, String> {
    let mut total = 0;
    for (n, len) in [(2, 8), (3, 6)] {
        let orbit = primitive_orbit(n, len, 1_000_000).map_err(|e| e.to_string())?;
        ensure(!orbit.budget_exhausted, || {
            format!("orbit({n},{len}) hit its budget")
        })?;
        for c in &orbit.classes {
            let wh = wh_of_set(n, std::slice::from_ref(c)).map_err(|e| e.to_string())?;
            ensure(!wh.is_connected() || !wh.cut_vertices().is_empty(), || {
                format!("{c}: Whitehead graph connected without cut vertex")
            })?;
            certified_tame(n, std::slice::from_ref(c))?;
        }
        total += orbit.classes.len();
    }
    Ok(format!("{total} primitive classes"))
}

fn separable_tame() -> Result<String, String> {
    let mut sets = 0;
    for n in [3, 4] {
        for seed in 0..500 {
            let (set, witness) = random_separable_set(n, seed, 4, 10).map_err(|e| e.to_string())?;
            ensure(witness.validates(&set), || {
                format!("seed {seed}: witness does not replay")
            })?;
            certified_tame(n, &set)?;
            sets += 1;
        }
    }
    Ok(format!("{sets} sets"))
}

fn negative_controls() -> Result<String, String> {
    for w in ["abAB", "aabb"] {
        let set = [CyclicWord::parse(w, 2).map_err(|e| e.to_string())?];
        let cert = decide_tame(2, &set).map_err(|e| e.to_string())?;
        ensure(cert.verdict() == Verdict::NotTame, || {
            format!("{w} declared tame")
        })?;
        ensure(verify_certificate(2, &set, &cert), || {
            format!("{w}: witness failed")
        })?;
    }
    Ok("abAB, aabb not tame".into())
}

fn basis_factorization() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut count = 0;
    for n in [2, 3] {
        for _ in 0..100 {
            let basis = random_verified_basis(n, &mut rng).map_err(|e| e.to_string())?;
            let out =
                basis_pipeline(&basis).map_err(|e| format!("{:?}: {e}", basis.forward.images()))?;
            ensure(out.sequence.steps.iter().all(|s| !s.betti_dropped), || {
                format!("{:?}: Betti number dropped", basis.forward.images())
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} bases"))
}

fn fold_confluence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    for i in 0..1000 {
        let n = rng.gen_range(2..=4);
        let g = random_graph(n, 8, 14, &mut rng);
        let a = fold_to_completion(&g);
        let mut order_rng = ChaCha8Rng::seed_from_u64(i);
        let b = fold_to_completion_by(&g, |pairs| order_rng.gen_range(0..pairs.len()));
        let (fa, fb) = (
            folded_canonical_form(a.final_graph()),
            folded_canonical_form(b.final_graph()),
        );
        ensure(fa.is_some() && fa == fb, || {
            format!("orders disagree on {g:?}")
        })?;
    }
    Ok("1000 graphs".into())
}

fn circuits_whitehead() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=5);
        let set = random_cyclic_set(n, 4, 12, &mut rng);
        let a = wh_of_set(n, &set).map_err(|e| e.to_string())?;
        let b = wh_of_graph(&disjoint_circuits(n, &set).map_err(|e| e.to_string())?);
        ensure(a == b, || format!("{set:?}: {a:?} vs {b:?}"))?;
    }
    Ok("1000 sets".into())
}

/// Fixed inputs whose certificates are compared across runs.
pub fn round_trip_inputs() -> Vec<(usize, Vec<CyclicWord>)> {
    let mut out: Vec<(usize, Vec<CyclicWord>)> = [
        (2, vec!["aab"]),
        (2, vec!["abAB"]),
        (2, vec!["aabb"]),
        (3, vec!["ab", "cc"]),
        (3, vec!["abcABC"]),
    ]
    .into_iter()
    .map(|(n, ws)| {
        (
            n,
            ws.iter()
                .map(|w| CyclicWord::parse(w, n).unwrap())
                .collect(),
        )
    })
    .collect();
    for seed in 0..20 {
        out.push((3, random_separable_set(3, seed, 3, 8).unwrap().0));
    }
    out
}

fn certificate_round_trip() -> Result<String, String> {
    let inputs = round_trip_inputs();
    for (n, set) in &inputs {
        let first = decide_tame(*n, set).map_err(|e| e.to_string())?.to_text();
        let second = decide_tame(*n, set).map_err(|e| e.to_string())?.to_text();
        ensure(first == second, || format!("{set:?}: two runs differ"))?;
        let parsed = TamenessCertificate::parse_text(&first).map_err(|e| e.to_string())?;
        ensure(parsed.to_text() == first, || {
            format!("{set:?}: re-serialization differs")
        })?;
        ensure(verify_certificate(*n, set, &parsed), || {
            format!("{set:?}: parsed certificate fails")
        })?;
    }
    Ok(format!("{} certificates", inputs.len()))
}
