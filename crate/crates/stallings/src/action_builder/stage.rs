//! The staged construction Γ₀ ⊆ Γ₁ ⊆ ⋯ of finite pieces of a transitive,
//! amenable, strongly almost free action of the free group.
//!
//! Stage n glues onto the previous stage an induced radius-k orbit ball B_k
//! of a metabelian coset space (a finite quotient Q acting on Q × Z^r), with
//! k chosen so that B_k contains a strictly (S, 1/n)-invariant set away from
//! its shell. The copy is joined to the old graph by a path of 2n fresh
//! edges from the first deficient old slot to a deficient shell vertex of
//! the copy. Vertex ids are stable: Γ_{n−1} is literally the id-prefix of
//! Γ_n, so recorded certificates stay valid forever.
//!
//! [`GammaSequence::verify_stage`] re-checks, from the stored graph and
//! metadata alone: (1) a vertex of degree < 2|S| exists, so the action
//! extends transitively; (2) the recorded Følner set is strictly
//! (S, 1/n)-invariant in Γ_n itself, with exactly the recorded ratio;
//! (3) every finite orbit of every short cyclically reduced word lies inside
//! the previous stage — the fibered copies are torsion-free and add none.

use num::BigInt;
use serde_json::{json, Value};

use crate::action_builder::coset::CosetSpace;
use crate::action_builder::folner::{FolnerSearcher, OrbitBall};
use crate::action_builder::quotient::FiniteQuotient;
use crate::digraph::SDigraph;
use crate::isoperimetry::{boundary_ratio, check_invariance, ratio_to_json, Ratio};
use crate::schreier::{finite_orbit_sweep, Ball, SchreierView, VertexRef};
use crate::words::{enumerate_cyclically_reduced, Alphabet, Letter, Word};
use crate::{Error, Result};

/// Ceilings for the searches inside [`GammaSequence::build_stage`]; every
/// failure mode surfaces as [`Error::StageBudget`] naming them.
#[derive(Debug, Clone)]
pub struct StageBudgets {
    /// Largest orbit-ball radius tried per quotient candidate.
    pub max_k: usize,
    /// Orbit-ball vertex ceiling; a candidate is abandoned when its BFS
    /// would exceed it.
    pub max_ball_vertices: usize,
    /// Largest finite quotient order accepted.
    pub max_quotient_order: usize,
    /// Modulus ceiling for the cyclic-quotient ladder.
    pub max_abelian_modulus: usize,
    /// Side ceiling of the boxes tried by the Følner search.
    pub max_box_side: usize,
    /// Cap on the number of enumerated box shapes.
    pub max_shapes: usize,
}

impl Default for StageBudgets {
    fn default() -> Self {
        StageBudgets {
            max_k: 64,
            max_ball_vertices: 3_000_000,
            max_quotient_order: 4096,
            max_abelian_modulus: 64,
            max_box_side: 8,
            max_shapes: 100_000,
        }
    }
}

/// Everything needed to audit one built stage without re-running its search.
#[derive(Debug, Clone, PartialEq)]
pub struct StageMeta {
    pub n: usize,
    /// Description of the finite quotient whose coset space was copied.
    pub quotient: String,
    /// The C_m the quotient avoids: m = n when the full budget sufficed,
    /// smaller when the build fell back down the ladder.
    pub avoided_len: usize,
    pub quotient_order: usize,
    /// Rank r of the fiber Z^r (the Schreier rank of the kernel).
    pub fiber_rank: usize,
    /// Radius of the copied orbit ball B_k.
    pub k: usize,
    /// |B_k|.
    pub ball_vertices: usize,
    /// The stage target ε = 1/n (strict).
    pub eps: Ratio,
    /// Exact boundary ratio of the recorded Følner set.
    pub folner_ratio: Ratio,
    /// The Følner set, as vertex ids of Γ_n (inside the copy, off its shell).
    pub folner_ids: Vec<u32>,
    /// Points removed from the initial box by the greedy trim.
    pub folner_trimmed: usize,
    /// Path attachment: from old vertex `u` along `letter` through 2n − 1
    /// fresh vertices to copy vertex `v`.
    pub u: u32,
    pub letter: Letter,
    pub v: u32,
    /// |V(Γ_{n−1})| — the id-prefix owned by the previous stage.
    pub prev_vertices: usize,
}

/// Outcome of [`GammaSequence::verify_stage`]; `pass()` is the conjunction
/// of the three per-stage invariants.
#[derive(Debug, Clone)]
pub struct StageReport {
    pub n: usize,
    /// A vertex of degree < 2|S| (the action extends transitively).
    pub deficient_vertex: Option<u32>,
    /// Boundary ratio of the stored Følner set, recomputed in Γ_n.
    pub folner_ratio: Option<Ratio>,
    /// Strict (S, 1/n)-invariance holds and the ratio matches the record.
    pub folner_ok: bool,
    /// First finite orbit of a C_{n−1} word leaving the previous stage.
    pub orbit_violation: Option<(Word, u32)>,
    pub orbits_ok: bool,
    /// Vertices on finite orbits, per C_{n−1} word.
    pub finite_orbit_counts: Vec<(Word, usize)>,
    /// The same ledger for C_n on Γ_n — the almost-freeness bookkeeping that
    /// stage n + 1 must preserve.
    pub almost_free_counts: Vec<(Word, usize)>,
}

impl StageReport {
    pub fn pass(&self) -> bool {
        self.deficient_vertex.is_some() && self.folner_ok && self.orbits_ok
    }
}

/// The increasing sequence Γ₀ ⊆ Γ₁ ⊆ ⋯ with its per-stage certificates.
#[derive(Debug, Clone)]
pub struct GammaSequence {
    alphabet: Alphabet,
    graphs: Vec<SDigraph>,
    metas: Vec<Option<StageMeta>>,
}

impl GammaSequence {
    /// Γ₀: a single basepointed vertex with no edges.
    pub fn initial(alphabet: Alphabet) -> GammaSequence {
        GammaSequence {
            alphabet,
            graphs: vec![SDigraph::point(alphabet)],
            metas: vec![None],
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Index of the highest built stage (0 for a fresh sequence).
    pub fn built(&self) -> usize {
        self.graphs.len() - 1
    }

    pub fn stage(&self, n: usize) -> Option<&SDigraph> {
        self.graphs.get(n)
    }

    pub fn meta(&self, n: usize) -> Option<&StageMeta> {
        self.metas.get(n).and_then(|m| m.as_ref())
    }

    /// Build stages 1..=n that are not built yet.
    pub fn build_to(&mut self, n: usize, budgets: &StageBudgets) -> Result<()> {
        for i in 1..=n {
            self.build_stage(i, budgets)?;
        }
        Ok(())
    }

    /// Build stage n from stage n − 1. Already-built stages (n = 0 included)
    /// are a no-op; skipping ahead is an error.
    ///
    /// The quotient is chosen down a ladder: for m = n, n−1, …, 1 try first
    /// a cyclic quotient avoiding C_m, then the canonical permutation
    /// quotient, and accept the first candidate whose coset space yields a
    /// Følner set within the ball and quotient budgets. Falling back to
    /// m < n keeps every verified property — ε = 1/n is unchanged and
    /// property (3) only concerns C_{n−1}-orbits, which fibered copies never
    /// create — it only weakens how far the avoidance bookkeeping reaches.
    pub fn build_stage(&mut self, n: usize, budgets: &StageBudgets) -> Result<()> {
        if n < self.graphs.len() {
            return Ok(());
        }
        if n > self.graphs.len() {
            return Err(Error::InvalidArgument(format!(
                "stage {} must be built before stage {n}",
                self.graphs.len()
            )));
        }
        let prev = self.graphs[n - 1].clone();
        let eps = Ratio::new(BigInt::from(1), BigInt::from(n as i64));
        let (u, letter) = free_slot(&prev).ok_or_else(|| {
            Error::Internal("stage graphs always keep a vertex with a free slot".into())
        })?;

        let mut found = None;
        'levels: for level in (1..=n).rev() {
            let c = enumerate_cyclically_reduced(self.alphabet, level);
            let mut candidates = Vec::new();
            if let Some(q) =
                FiniteQuotient::abelian_avoiding(self.alphabet, &c, budgets.max_abelian_modulus)
            {
                candidates.push(q);
            }
            candidates.push(FiniteQuotient::avoiding(self.alphabet, &c)?);
            'candidates: for q in candidates {
                let group = match q.group(budgets.max_quotient_order) {
                    Ok(g) => g,
                    Err(_) => continue 'candidates,
                };
                let space = CosetSpace::build(&group)?;
                space.torsion_smoke(level.min(3))?;
                let searcher = FolnerSearcher::new(
                    &space,
                    eps.clone(),
                    budgets.max_box_side,
                    budgets.max_shapes,
                );
                let mut ball = OrbitBall::new(&space);
                for k in 1..=budgets.max_k {
                    if !ball.expand_to(&space, k, budgets.max_ball_vertices) {
                        continue 'candidates;
                    }
                    let Some(cert) = searcher.search(&space, &ball, k - 1)? else {
                        continue;
                    };
                    let Some(v) = attach_target(&space, &ball, letter, k) else {
                        continue;
                    };
                    found = Some((space, ball, k, cert, v, level));
                    break 'levels;
                }
            }
        }
        let Some((space, ball, k, cert, v_ball, level)) = found else {
            return Err(Error::StageBudget {
                stage: n,
                search: "quotient ladder and Følner ball",
                budget: format!(
                    "k ≤ {}, ball ≤ {} vertices, quotient order ≤ {}, box side ≤ {}",
                    budgets.max_k,
                    budgets.max_ball_vertices,
                    budgets.max_quotient_order,
                    budgets.max_box_side
                ),
            });
        };
        debug_assert!(cert
            .point_ids
            .iter()
            .all(|&i| (ball.depth[i as usize] as usize) < k));
        debug_assert_eq!(ball.depth[v_ball as usize] as usize, k);

        // Materialize B_k as the induced subgraph on the ball.
        let mut bk = SDigraph::with_vertices(self.alphabet, ball.points.len());
        for (i, p) in ball.points.iter().enumerate() {
            for s in self.alphabet.generators() {
                let t = space.step_point(s, p);
                if let Some(&tid) = ball.index.get(&t) {
                    bk.set_edge(i as u32, s, tid);
                }
            }
        }
        let (merged, offset) = prev.disjoint_union(&bk);
        let gamma = merged.attach_path(u, offset + v_ball, letter, 2 * n)?;

        // The surgery bookkeeping this module promises: ids extend, edges
        // embed verbatim, the base stays put, and the result is connected.
        assert_eq!(
            gamma.num_vertices(),
            prev.num_vertices() + ball.points.len() + 2 * n - 1
        );
        debug_assert!(prev.edges().all(|(a, s, b)| gamma.next(a, s) == Some(b)));
        assert_eq!(gamma.basepoint(), Some(0));
        assert!(gamma.is_connected());

        let meta = StageMeta {
            n,
            quotient: space.description.clone(),
            avoided_len: level,
            quotient_order: space.order,
            fiber_rank: space.rank,
            k,
            ball_vertices: ball.points.len(),
            eps,
            folner_ratio: cert.ratio.clone(),
            folner_ids: cert.point_ids.iter().map(|&i| offset + i).collect(),
            folner_trimmed: cert.trimmed,
            u,
            letter,
            v: offset + v_ball,
            prev_vertices: prev.num_vertices(),
        };
        self.graphs.push(gamma);
        self.metas.push(Some(meta));

        // Fail closed: the sequence accepts a stage only once verify_stage
        // re-derives its invariants from the stored data.
        let report = self.verify_stage(n)?;
        if !report.pass() {
            self.graphs.pop();
            self.metas.pop();
            return Err(Error::Internal(format!(
                "stage {n} failed its own verification: {report:?}"
            )));
        }
        Ok(())
    }

    /// Re-derive the three stage invariants from the stored graph and
    /// metadata; nothing from the build-time search is trusted.
    pub fn verify_stage(&self, n: usize) -> Result<StageReport> {
        let graph = self
            .graphs
            .get(n)
            .ok_or_else(|| Error::InvalidArgument(format!("stage {n} is not built")))?;
        let meta = self.metas[n].as_ref();
        if n >= 1 && meta.is_none() {
            return Err(Error::Internal(format!(
                "stage {n} is missing its metadata"
            )));
        }

        let deficient_vertex = (0..graph.num_vertices() as u32)
            .find(|&v| graph.degree(v) < self.alphabet.num_letters());

        let (folner_ratio, folner_ok) = match meta {
            None => (None, true),
            Some(meta) => {
                let view = SchreierView::new(graph.clone());
                let p: Vec<VertexRef> = meta
                    .folner_ids
                    .iter()
                    .map(|&v| VertexRef::Core(v))
                    .collect();
                let invariant = check_invariance(&view, &p, &meta.eps)?;
                let ratio = boundary_ratio(&view, &p)?;
                let ok = invariant && ratio == meta.folner_ratio;
                (Some(ratio), ok)
            }
        };

        let mut orbit_violation = None;
        let mut finite_orbit_counts = Vec::new();
        if let Some(meta) = meta {
            for w in enumerate_cyclically_reduced(self.alphabet, meta.n - 1) {
                let cycles = finite_orbit_sweep(graph, &w)?;
                let mut on = 0usize;
                for cyc in &cycles {
                    on += cyc.len();
                    if orbit_violation.is_none() {
                        if let Some(&bad) = cyc.iter().find(|&&v| v as usize >= meta.prev_vertices)
                        {
                            orbit_violation = Some((w.clone(), bad));
                        }
                    }
                }
                finite_orbit_counts.push((w, on));
            }
        }
        let orbits_ok = orbit_violation.is_none();

        let mut almost_free_counts = Vec::new();
        for w in enumerate_cyclically_reduced(self.alphabet, n) {
            let cycles = finite_orbit_sweep(graph, &w)?;
            almost_free_counts.push((w, cycles.iter().map(Vec::len).sum()));
        }

        Ok(StageReport {
            n,
            deficient_vertex,
            folner_ratio,
            folner_ok,
            orbit_violation,
            orbits_ok,
            finite_orbit_counts,
            almost_free_counts,
        })
    }

    /// A finite chart of the action around the basepoint of Γ_m's
    /// completion: the induced ball of the given depth.
    pub fn export_ball(&self, m: usize, depth: usize) -> Result<Ball<VertexRef>> {
        let graph = self
            .graphs
            .get(m)
            .ok_or_else(|| Error::InvalidArgument(format!("stage {m} is not built")))?;
        let view = SchreierView::new(graph.clone());
        Ok(view.ball(&view.base(), depth))
    }

    /// JSON chart of the action: per-generator tables over the ball's
    /// vertices, `null` marking steps that leave the chart (the action is
    /// total; the chart is not), plus each vertex's depth and whether it is
    /// a core or completion-tree vertex.
    pub fn export_action(&self, m: usize, depth: usize) -> Result<Value> {
        let ball = self.export_ball(m, depth)?;
        assert!(
            ball.graph.is_connected(),
            "charts of completions are connected"
        );
        let size = ball.graph.num_vertices() as u32;
        let mut tables = serde_json::Map::new();
        let mut external = 0usize;
        for s in self.alphabet.generators() {
            let mut col = Vec::with_capacity(size as usize);
            for i in 0..size {
                match ball.graph.next(i, s) {
                    Some(j) => {
                        debug_assert_eq!(ball.graph.next(j, s.inverse()), Some(i));
                        col.push(json!(j));
                    }
                    None => {
                        external += 1;
                        col.push(Value::Null);
                    }
                }
            }
            tables.insert(s.to_string(), Value::Array(col));
        }
        let kinds: Vec<&'static str> = ball
            .refs
            .iter()
            .map(|r| if r.is_core() { "core" } else { "tree" })
            .collect();
        Ok(json!({
            "stage": m,
            "depth": depth,
            "vertices": size,
            "center": 0,
            "depths": ball.depths,
            "kinds": kinds,
            "generators": tables,
            "external_edges": external,
        }))
    }

    /// Exact persistent form: vertex counts, edge lists, and metadata.
    /// Vertex ids round-trip verbatim (certificates reference them).
    pub fn to_json(&self) -> Value {
        let stages: Vec<Value> = self
            .graphs
            .iter()
            .zip(&self.metas)
            .map(|(g, m)| {
                json!({
                    "graph": graph_to_json(g),
                    "meta": m.as_ref().map(meta_to_json).unwrap_or(Value::Null),
                })
            })
            .collect();
        json!({ "rank": self.alphabet.rank(), "stages": stages })
    }

    /// Parse [`GammaSequence::to_json`] output, re-validating the structural
    /// invariants (id-prefix embedding, basepoints, certificate ranges).
    pub fn from_json(value: &Value) -> Result<GammaSequence> {
        let rank = value
            .get("rank")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidArgument("sequence JSON needs a rank".into()))?;
        let alphabet = Alphabet::new(rank as usize)?;
        let stages = value
            .get("stages")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidArgument("sequence JSON needs a stages array".into()))?;
        if stages.is_empty() {
            return Err(Error::InvalidArgument(
                "a sequence includes at least stage 0".into(),
            ));
        }
        let mut graphs: Vec<SDigraph> = Vec::new();
        let mut metas = Vec::new();
        for (i, st) in stages.iter().enumerate() {
            let graph_value = st
                .get("graph")
                .ok_or_else(|| Error::InvalidArgument(format!("stage {i} lacks a graph")))?;
            let graph = graph_from_json(alphabet, graph_value)?;
            if graph.basepoint() != Some(0) {
                return Err(Error::InvalidArgument(format!(
                    "stage {i} must be based at vertex 0"
                )));
            }
            let meta = match st.get("meta") {
                None | Some(Value::Null) => None,
                Some(mv) => Some(meta_from_json(alphabet, mv)?),
            };
            if i == 0 {
                if meta.is_some() {
                    return Err(Error::InvalidArgument("stage 0 carries no metadata".into()));
                }
            } else {
                let m = meta
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument(format!("stage {i} lacks metadata")))?;
                if m.n != i {
                    return Err(Error::InvalidArgument(format!(
                        "stage {i} metadata is labeled {}",
                        m.n
                    )));
                }
                let prev = &graphs[i - 1];
                if m.prev_vertices != prev.num_vertices() {
                    return Err(Error::InvalidArgument(format!(
                        "stage {i} records {} previous vertices, stage {} has {}",
                        m.prev_vertices,
                        i - 1,
                        prev.num_vertices()
                    )));
                }
                if m.folner_ids.is_empty()
                    || m.folner_ids
                        .iter()
                        .any(|&v| v as usize >= graph.num_vertices())
                {
                    return Err(Error::InvalidArgument(format!(
                        "stage {i} carries an out-of-range invariant set"
                    )));
                }
                if !prev.edges().all(|(a, s, b)| graph.next(a, s) == Some(b)) {
                    return Err(Error::InvalidArgument(format!(
                        "stage {} does not embed as an id-prefix of stage {i}",
                        i - 1
                    )));
                }
            }
            graphs.push(graph);
            metas.push(meta);
        }
        Ok(GammaSequence {
            alphabet,
            graphs,
            metas,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<GammaSequence> {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)?;
        GammaSequence::from_json(&value)
    }
}

/// First (vertex, letter) with an unfilled slot, scanning vertex ids and
/// letters in canonical order.
fn free_slot(g: &SDigraph) -> Option<(u32, Letter)> {
    (0..g.num_vertices() as u32).find_map(|v| {
        g.alphabet()
            .letters()
            .find(|&l| g.next(v, l).is_none())
            .map(|l| (v, l))
    })
}

/// First shell vertex (depth exactly k) whose `letter`-slot toward the path
/// is free in the induced ball — its pre-image under the attachment letter
/// lies outside the ball. One always exists: otherwise the shell would be
/// closed under that step, trapping an orbit of the letter's image inside
/// the finite ball, and every orbit on the torsion-free space is infinite.
fn attach_target(space: &CosetSpace, ball: &OrbitBall, letter: Letter, k: usize) -> Option<u32> {
    let linv = letter.inverse();
    (0..ball.points.len() as u32).find(|&i| {
        ball.depth[i as usize] as usize == k
            && !ball
                .index
                .contains_key(&space.step_point(linv, &ball.points[i as usize]))
    })
}

fn graph_to_json(g: &SDigraph) -> Value {
    let edges: Vec<Value> = g
        .edges()
        .map(|(u, l, v)| json!([u, l.to_string(), v]))
        .collect();
    json!({
        "vertices": g.num_vertices(),
        "edges": edges,
        "basepoint": g.basepoint(),
    })
}

fn graph_from_json(alphabet: Alphabet, value: &Value) -> Result<SDigraph> {
    let n = value
        .get("vertices")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::InvalidArgument("graph JSON needs a vertex count".into()))?
        as usize;
    let mut g = SDigraph::with_vertices(alphabet, n);
    let edges = value
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidArgument("graph JSON needs an edge array".into()))?;
    for e in edges {
        let triple = e
            .as_array()
            .filter(|t| t.len() == 3)
            .ok_or_else(|| Error::InvalidArgument("edges must be [src, label, dst]".into()))?;
        let src = triple[0]
            .as_u64()
            .ok_or_else(|| Error::InvalidArgument("edge source must be an integer".into()))?
            as u32;
        let dst = triple[2]
            .as_u64()
            .ok_or_else(|| Error::InvalidArgument("edge target must be an integer".into()))?
            as u32;
        let label = triple[1]
            .as_str()
            .ok_or_else(|| Error::InvalidArgument("edge label must be a string".into()))?;
        if src as usize >= n || dst as usize >= n {
            return Err(Error::InvalidVertex(src.max(dst)));
        }
        let word = Word::parse(alphabet, label)?;
        if word.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "edge label must be a single letter, got {label:?}"
            )));
        }
        let l = word.letters()[0];
        let (a, s, b) = if l.is_positive() {
            (src, l, dst)
        } else {
            (dst, l.inverse(), src)
        };
        if g.next(a, s).is_some() || g.next(b, s.inverse()).is_some() {
            return Err(Error::InvalidArgument(format!(
                "conflicting edges at vertex {a} over {s}"
            )));
        }
        g.set_edge(a, s, b);
    }
    match value.get("basepoint") {
        None | Some(Value::Null) => g.set_basepoint(None),
        Some(b) => {
            let b = b
                .as_u64()
                .ok_or_else(|| Error::InvalidArgument("basepoint must be an integer".into()))?;
            if b as usize >= n {
                return Err(Error::InvalidVertex(b as u32));
            }
            g.set_basepoint(Some(b as u32));
        }
    }
    Ok(g)
}

fn meta_to_json(m: &StageMeta) -> Value {
    json!({
        "n": m.n,
        "quotient": m.quotient,
        "avoided_len": m.avoided_len,
        "quotient_order": m.quotient_order,
        "fiber_rank": m.fiber_rank,
        "k": m.k,
        "ball_vertices": m.ball_vertices,
        "eps": ratio_to_json(&m.eps),
        "folner_ratio": ratio_to_json(&m.folner_ratio),
        "folner_ids": m.folner_ids,
        "folner_trimmed": m.folner_trimmed,
        "attach_from": m.u,
        "attach_letter": m.letter.to_string(),
        "attach_to": m.v,
        "prev_vertices": m.prev_vertices,
    })
}

fn get_usize(value: &Value, key: &str) -> Result<usize> {
    value
        .get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::InvalidArgument(format!("metadata needs an integer {key:?}")))
}

fn get_ratio(value: &Value, key: &str) -> Result<Ratio> {
    let obj = value
        .get(key)
        .ok_or_else(|| Error::InvalidArgument(format!("metadata needs a ratio {key:?}")))?;
    let num = obj
        .get("num")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidArgument(format!("{key:?} needs a num string")))?;
    let den = obj
        .get("den")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidArgument(format!("{key:?} needs a den string")))?;
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad numerator in {key:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad denominator in {key:?}")))?;
    if den == BigInt::from(0) {
        return Err(Error::InvalidArgument(format!(
            "zero denominator in {key:?}"
        )));
    }
    Ok(Ratio::new(num, den))
}

fn meta_from_json(alphabet: Alphabet, value: &Value) -> Result<StageMeta> {
    let letter_text = value
        .get("attach_letter")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidArgument("metadata needs an attach_letter".into()))?;
    let word = Word::parse(alphabet, letter_text)?;
    if word.len() != 1 {
        return Err(Error::InvalidArgument(
            "attach_letter must be a single letter".into(),
        ));
    }
    let folner_ids = value
        .get("folner_ids")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidArgument("metadata needs folner_ids".into()))?
        .iter()
        .map(|v| {
            v.as_u64()
                .map(|x| x as u32)
                .ok_or_else(|| Error::InvalidArgument("folner_ids must be integers".into()))
        })
        .collect::<Result<Vec<u32>>>()?;
    let quotient = value
        .get("quotient")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidArgument("metadata needs a quotient description".into()))?
        .to_string();
    Ok(StageMeta {
        n: get_usize(value, "n")?,
        quotient,
        avoided_len: get_usize(value, "avoided_len")?,
        quotient_order: get_usize(value, "quotient_order")?,
        fiber_rank: get_usize(value, "fiber_rank")?,
        k: get_usize(value, "k")?,
        ball_vertices: get_usize(value, "ball_vertices")?,
        eps: get_ratio(value, "eps")?,
        folner_ratio: get_ratio(value, "folner_ratio")?,
        folner_ids,
        folner_trimmed: get_usize(value, "folner_trimmed")?,
        u: get_usize(value, "attach_from")? as u32,
        letter: word.letters()[0],
        v: get_usize(value, "attach_to")? as u32,
        prev_vertices: get_usize(value, "prev_vertices")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn test_budgets() -> StageBudgets {
        StageBudgets {
            max_k: 32,
            max_ball_vertices: 200_000,
            max_quotient_order: 64,
            max_abelian_modulus: 16,
            max_box_side: 6,
            max_shapes: 20_000,
        }
    }

    #[test]
    fn initial_stage_is_a_point() {
        let seq = GammaSequence::initial(f2());
        assert_eq!(seq.built(), 0);
        assert_eq!(seq.stage(0).unwrap().num_vertices(), 1);
        let report = seq.verify_stage(0).unwrap();
        assert!(report.pass());
        assert_eq!(report.deficient_vertex, Some(0));
        assert!(report.finite_orbit_counts.is_empty());
        assert!(report.almost_free_counts.is_empty());
        // The chart of Γ₀'s completion is the free-group ball.
        let chart = seq.export_action(0, 2).unwrap();
        assert_eq!(chart["vertices"], 17);
        assert_eq!(chart["kinds"][0], "core");
        assert_eq!(chart["kinds"][1], "tree");
    }

    #[test]
    fn stage_one_builds_and_verifies() {
        let mut seq = GammaSequence::initial(f2());
        seq.build_stage(1, &test_budgets()).unwrap();
        let meta = seq.meta(1).unwrap().clone();
        assert_eq!(meta.n, 1);
        assert_eq!(meta.avoided_len, 1);
        assert_eq!(meta.quotient_order, 2);
        assert_eq!(meta.fiber_rank, 3);
        assert_eq!(meta.eps, Ratio::from_integer(1.into()));
        assert!(meta.folner_ratio < meta.eps);
        assert_eq!(meta.prev_vertices, 1);
        assert_eq!(meta.u, 0);
        assert_eq!(meta.letter, Letter::positive(0));
        // Γ₁ = Γ₀ ⊔ B_k plus one interior path vertex (2·1 − 1 = 1).
        let gamma = seq.stage(1).unwrap();
        assert_eq!(gamma.num_vertices(), 1 + meta.ball_vertices + 1);
        // The copy occupies ids 1..=ball_vertices; the Følner set sits there.
        assert!(meta
            .folner_ids
            .iter()
            .all(|&v| v >= 1 && (v as usize) <= meta.ball_vertices));

        let report = seq.verify_stage(1).unwrap();
        assert!(report.pass(), "stage 1 invariants: {report:?}");
        assert_eq!(report.folner_ratio.as_ref(), Some(&meta.folner_ratio));
        // C₀ is empty; C₁ words have no finite orbits anywhere in Γ₁ —
        // the fibered copy is torsion-free and the path is a tree.
        assert!(report.finite_orbit_counts.is_empty());
        assert_eq!(report.almost_free_counts.len(), 4);
        assert!(report.almost_free_counts.iter().all(|(_, c)| *c == 0));
    }

    #[test]
    fn stage_one_chart_marks_externals() {
        let mut seq = GammaSequence::initial(f2());
        seq.build_stage(1, &test_budgets()).unwrap();
        let chart = seq.export_action(1, 1).unwrap();
        // Vertex 0 has degree 1 in Γ₁ (the attached path), so its chart of
        // depth 1 is one core neighbor plus three tree neighbors.
        assert_eq!(chart["vertices"], 5);
        assert_eq!(chart["kinds"][0], "core");
        assert_eq!(chart["kinds"][1], "core");
        assert_eq!(chart["kinds"][2], "tree");
        assert_eq!(chart["generators"]["a"][0], 1);
        assert!(chart["external_edges"].as_u64().unwrap() > 0);
    }

    #[test]
    fn second_stage_climbs_the_ladder() {
        let mut seq = GammaSequence::initial(f2());
        seq.build_to(2, &test_budgets()).unwrap();
        assert_eq!(seq.built(), 2);
        let meta = seq.meta(2).unwrap().clone();
        assert_eq!(meta.avoided_len, 2);
        assert_eq!(meta.quotient_order, 5);
        assert_eq!(meta.fiber_rank, 6);
        assert_eq!(meta.eps, Ratio::new(1.into(), 2.into()));
        assert!(meta.folner_ratio < meta.eps);
        // Vertex 0's a-slot was used by stage 1; stage 2 attaches by the
        // symmetric inverse slot.
        assert_eq!(meta.u, 0);
        assert_eq!(meta.letter, Letter::negative(0));
        let prev = seq.stage(1).unwrap().num_vertices();
        assert_eq!(meta.prev_vertices, prev);
        assert_eq!(
            seq.stage(2).unwrap().num_vertices(),
            prev + meta.ball_vertices + 3
        );

        let report = seq.verify_stage(2).unwrap();
        assert!(report.pass(), "stage 2 invariants: {report:?}");
        // C₁ sweeps over Γ₂ stay confined (here: empty) as property (3) asks.
        assert_eq!(report.finite_orbit_counts.len(), 4);
        assert!(report.orbits_ok);
        assert!(report.finite_orbit_counts.iter().all(|(_, c)| *c == 0));
    }

    #[test]
    fn budget_exhaustion_names_the_stage() {
        let mut seq = GammaSequence::initial(f2());
        let budgets = StageBudgets {
            max_k: 1,
            ..test_budgets()
        };
        match seq.build_stage(1, &budgets) {
            Err(Error::StageBudget { stage: 1, .. }) => {}
            other => panic!("expected a stage budget failure, got {other:?}"),
        }
        // The sequence is untouched by the failed attempt.
        assert_eq!(seq.built(), 0);
    }

    #[test]
    fn stage_order_is_enforced() {
        let mut seq = GammaSequence::initial(f2());
        assert!(matches!(
            seq.build_stage(2, &test_budgets()),
            Err(Error::InvalidArgument(_))
        ));
        // Stage 0 and rebuilding an existing stage are no-ops.
        seq.build_stage(0, &test_budgets()).unwrap();
        seq.build_stage(1, &test_budgets()).unwrap();
        let before = seq.stage(1).unwrap().clone();
        seq.build_stage(1, &test_budgets()).unwrap();
        assert_eq!(seq.stage(1).unwrap(), &before);
        assert!(matches!(
            seq.verify_stage(7),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn persistence_round_trips_exactly() {
        let mut seq = GammaSequence::initial(f2());
        seq.build_stage(1, &test_budgets()).unwrap();
        let json = seq.to_json();
        let back = GammaSequence::from_json(&json).unwrap();
        assert_eq!(back.built(), 1);
        assert_eq!(back.stage(0), seq.stage(0));
        assert_eq!(back.stage(1), seq.stage(1));
        assert_eq!(back.meta(1), seq.meta(1));
        // The reloaded sequence verifies and can keep building.
        assert!(back.verify_stage(1).unwrap().pass());
    }

    #[test]
    fn from_json_rejects_tampering() {
        let mut seq = GammaSequence::initial(f2());
        seq.build_stage(1, &test_budgets()).unwrap();
        let mut json = seq.to_json();
        // Out-of-range Følner id.
        json["stages"][1]["meta"]["folner_ids"][0] = json!(10_000_000);
        assert!(GammaSequence::from_json(&json).is_err());
        // Mislabeled stage.
        let mut json = seq.to_json();
        json["stages"][1]["meta"]["n"] = json!(3);
        assert!(GammaSequence::from_json(&json).is_err());
    }
}
