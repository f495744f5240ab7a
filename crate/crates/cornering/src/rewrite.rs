//! Normalization and equality for cells of the free cornering.
//!
//! Cells are compared through their pasting graphs. Exploding a term
//! quotients it by the structural laws: associativity, identity, and
//! interchange of the two compositions, and functoriality of lifting,
//! all of which hold definitionally in the graph. On top of that the
//! rewriter applies the yanking equations (corner pairs straighten into
//! wires, receive-then-send collapses to a horizontal identity) and the
//! base theory's equations, oriented so that each application strictly
//! shrinks the graph. Equal canonical graphs mean equal cells; for
//! theories with unoriented equations a bounded bidirectional search
//! closes the gap, reporting `Unknown` when its budget runs out.
//!
//! The row normal form presents a cell as a vertical stack of elementary
//! rows, each a single corner, exchange, generator, or braiding padded
//! by identity wires. It is computed purely structurally, so two terms
//! have identical rows exactly when they denote the same pasting graph
//! before any yanking or equational rewriting.
//!
//! A cell whose left and right boundaries are the unit exchange is a
//! purely vertical transformation, and [`eval_vertical`] recovers the
//! base morphism it denotes by normalizing away the exchanges and
//! reading the surviving rows back as a sequential composite.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cell::{CellBoundary, CellTerm};
use crate::morphism::MorphismTerm;
use crate::pasting::{
    compile_pattern, explode, morphism_from_rows, row_term, schedule, MorphPattern, NodeId,
    Pasting, ScheduledRow, SliceSpec,
};
use crate::theory::Theory;

/// Outcome of an equality query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The cells denote the same cell of the free cornering.
    Equal,
    /// The canonical forms differ and the search space was exhausted;
    /// for theories without equations this is a definitive refutation.
    NotEqualStructurally,
    /// The search budget ran out before a conclusion.
    Unknown,
}

/// Budgets and toggles for the rewriting engine.
#[derive(Clone, Copy, Debug)]
pub struct RewriteOptions {
    /// Maximum rewrite steps in one normalization.
    pub step_budget: usize,
    /// Maximum distinct states explored by the equational search.
    pub search_states: usize,
    /// Maximum search depth (equation applications per side).
    pub search_depth: usize,
    /// Apply the yanking equations. Structural laws (associativity,
    /// identities, interchange, lift functoriality) are definitional in
    /// the graph representation and cannot be switched off.
    pub yanking: bool,
    /// Apply the base theory's equations.
    pub base_equations: bool,
}

impl Default for RewriteOptions {
    fn default() -> Self {
        RewriteOptions {
            step_budget: 10_000,
            search_states: 4096,
            search_depth: 64,
            yanking: true,
            base_equations: true,
        }
    }
}

/// One applied rewrite, located in the row normal form of the cell as it
/// was just before the step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    /// Rule identifier: a yanking rule or an equation name.
    pub rule: String,
    /// Row index in the pre-step normal form.
    pub row: usize,
    /// Column: number of wires left of the rewritten slice.
    pub col: usize,
}

/// Failures of the rewriting engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("step budget of {budget} exhausted before reaching a normal form")]
    StepBudgetExceeded { budget: usize },
    #[error("cannot compare cells with different boundaries: {left} vs {right}")]
    BoundaryMismatch { left: String, right: String },
    #[error("cell is not vertical: boundary {boundary}")]
    NotVertical { boundary: String },
    #[error("cell is not horizontal: boundary {boundary}")]
    NotHorizontal { boundary: String },
    #[error("normal form retains exchange structure: {stuck}")]
    ResidualCorners { stuck: String },
}

/// A cell presented as a vertical stack of elementary rows.
#[derive(Clone, Debug)]
pub struct RowNormalForm {
    boundary: CellBoundary,
    rows: Vec<CellTerm>,
}

impl RowNormalForm {
    pub fn boundary(&self) -> &CellBoundary {
        &self.boundary
    }

    pub fn rows(&self) -> &[CellTerm] {
        &self.rows
    }

    /// Rebuilds the cell term; zero rows recompose to the identity on
    /// the top edge.
    pub fn recompose(&self) -> CellTerm {
        if self.rows.is_empty() {
            return CellTerm::vid(self.boundary.top.clone());
        }
        CellTerm::stack(self.rows.iter().cloned()).expect("normal form rows stack")
    }
}

/// Computes the row normal form of a cell: canonical graph, canonical
/// schedule, one elementary slice per row. Purely structural; corner
/// pairs stay as exchange rows and no equations are applied.
pub fn to_row_normal_form(c: &CellTerm) -> RowNormalForm {
    let mut g = explode(c);
    g.canonicalize();
    let rows = schedule(&g).iter().map(|row| row_term(&g, row)).collect();
    RowNormalForm {
        boundary: c.boundary().clone(),
        rows,
    }
}

/// An equation compiled for graph rewriting, oriented so that applying
/// `lhs -> rhs` never grows the box count.
struct CompiledEq {
    name: String,
    lhs: MorphPattern,
    rhs: MorphPattern,
}

fn compiled_equations(theory: &Theory) -> Vec<CompiledEq> {
    theory
        .equations()
        .iter()
        .enumerate()
        .map(|(i, eq)| {
            let name = eq.name.clone().unwrap_or_else(|| format!("eq#{i}"));
            let l = compile_pattern(&eq.lhs);
            let r = compile_pattern(&eq.rhs);
            if l.size() >= r.size() {
                CompiledEq {
                    name,
                    lhs: l,
                    rhs: r,
                }
            } else {
                CompiledEq {
                    name,
                    lhs: r,
                    rhs: l,
                }
            }
        })
        .collect()
}

fn locate_pair(rows: &[ScheduledRow], sender: NodeId) -> (usize, usize) {
    for (i, r) in rows.iter().enumerate() {
        if let SliceSpec::Pair { sender: s, .. } = r.slice {
            if s == sender {
                return (i, r.pre.len());
            }
        }
    }
    (0, 0)
}

fn locate_corner(rows: &[ScheduledRow], id: NodeId) -> (usize, usize) {
    for (i, r) in rows.iter().enumerate() {
        if let SliceSpec::Corner(c) = r.slice {
            if c == id {
                return (i, r.pre.len());
            }
        }
    }
    (0, 0)
}

fn locate_boxes(rows: &[ScheduledRow], ids: &[NodeId]) -> (usize, usize) {
    rows.iter()
        .enumerate()
        .filter_map(|(i, r)| match r.slice {
            SliceSpec::Box(b) if ids.contains(&b) => Some((i, r.pre.len())),
            _ => None,
        })
        .min()
        .unwrap_or((0, 0))
}

fn polarity_tag(pol: crate::cell::Polarity) -> &'static str {
    match pol {
        crate::cell::Polarity::Circ => "circ",
        crate::cell::Polarity::Bullet => "bullet",
    }
}

/// Rewrites the graph to a normal form in place. Each iteration
/// canonicalizes, then applies the first available move: a pair yank, a
/// guarded relay insertion, or a shrinking equation in canonical match
/// order.
fn normalize(
    theory: &Theory,
    g: &mut Pasting,
    opts: &RewriteOptions,
    mut trace: Option<&mut Vec<RewriteStep>>,
) -> Result<(), RewriteError> {
    let eqs = if opts.base_equations {
        compiled_equations(theory)
    } else {
        Vec::new()
    };
    let mut remaining = opts.step_budget;
    let spend = |remaining: &mut usize| -> Result<(), RewriteError> {
        if *remaining == 0 {
            return Err(RewriteError::StepBudgetExceeded {
                budget: opts.step_budget,
            });
        }
        *remaining -= 1;
        Ok(())
    };
    loop {
        g.canonicalize();
        let rows = trace.as_ref().map(|_| schedule(g));
        if opts.yanking {
            if let Some((sender, _, pol)) = g.yank_one_pair(None) {
                spend(&mut remaining)?;
                if let Some(t) = trace.as_deref_mut() {
                    let (row, col) = locate_pair(rows.as_deref().unwrap_or(&[]), sender);
                    t.push(RewriteStep {
                        rule: format!("yank-{}-h", polarity_tag(pol)),
                        row,
                        col,
                    });
                }
                continue;
            }
            if let Some((receiver, _, pol)) = g.insert_one_relay(None) {
                spend(&mut remaining)?;
                if let Some(t) = trace.as_deref_mut() {
                    let (row, col) = locate_corner(rows.as_deref().unwrap_or(&[]), receiver);
                    t.push(RewriteStep {
                        rule: format!("yank-{}-v", polarity_tag(pol)),
                        row,
                        col,
                    });
                }
                continue;
            }
        }
        let mut applied = false;
        'eqs: for eq in &eqs {
            if eq.lhs.size() == eq.rhs.size() {
                // Unoriented equations do not shrink the graph; they are
                // explored by the equality search instead.
                continue;
            }
            for m in g.find_matches(&eq.lhs, 16) {
                if g.apply_match(&m, &eq.rhs) {
                    spend(&mut remaining)?;
                    if let Some(t) = trace.as_deref_mut() {
                        let (row, col) = locate_boxes(rows.as_deref().unwrap_or(&[]), &m.boxes);
                        t.push(RewriteStep {
                            rule: eq.name.clone(),
                            row,
                            col,
                        });
                    }
                    applied = true;
                    break 'eqs;
                }
            }
        }
        if applied {
            continue;
        }
        break;
    }
    Ok(())
}

/// Yanking fixpoint without equations; used between search moves so that
/// reversed equation applications are not immediately undone.
fn structural_fixpoint(g: &mut Pasting) {
    loop {
        if g.yank_one_pair(None).is_some() {
            continue;
        }
        if g.insert_one_relay(None).is_some() {
            continue;
        }
        break;
    }
    g.canonicalize();
}

/// Rewrites a cell to its normal form and rebuilds it as a term.
pub fn rewrite_fixpoint(
    theory: &Theory,
    c: &CellTerm,
    opts: &RewriteOptions,
) -> Result<CellTerm, RewriteError> {
    let mut g = explode(c);
    normalize(theory, &mut g, opts, None)?;
    Ok(recompose_graph(&g))
}

/// Like [`rewrite_fixpoint`], also reporting each applied rule with its
/// position in the pre-step row normal form.
pub fn rewrite_fixpoint_traced(
    theory: &Theory,
    c: &CellTerm,
    opts: &RewriteOptions,
) -> Result<(CellTerm, Vec<RewriteStep>), RewriteError> {
    let mut g = explode(c);
    let mut steps = Vec::new();
    normalize(theory, &mut g, opts, Some(&mut steps))?;
    Ok((recompose_graph(&g), steps))
}

fn recompose_graph(g: &Pasting) -> CellTerm {
    let rows: Vec<CellTerm> = schedule(g).iter().map(|row| row_term(g, row)).collect();
    if rows.is_empty() {
        return CellTerm::vid(g.boundary.top.clone());
    }
    CellTerm::stack(rows).expect("scheduled rows stack")
}

/// Extracts the base morphism a vertical cell denotes: the cell is
/// normalized, after which every exchange has been yanked away and the
/// remaining rows of generators and braidings compose in sequence.
///
/// The left and right boundaries must be the unit exchange. Yanking
/// eliminates all corners from a well-typed vertical cell (every bent
/// wire is eventually un-bent), but if any structure survives the
/// normal form is reported in [`RewriteError::ResidualCorners`] rather
/// than trusted to be impossible.
pub fn eval_vertical(
    theory: &Theory,
    c: &CellTerm,
    opts: &RewriteOptions,
) -> Result<MorphismTerm, RewriteError> {
    if !c.is_vertical() {
        return Err(RewriteError::NotVertical {
            boundary: c.boundary().to_string(),
        });
    }
    let mut g = explode(c);
    normalize(theory, &mut g, opts, None)?;
    let rows = schedule(&g);
    match morphism_from_rows(&g, &rows) {
        Some(m) => Ok(m),
        None => {
            let stuck = recompose_graph(&g);
            Err(RewriteError::ResidualCorners {
                stuck: stuck.to_string(),
            })
        }
    }
}

/// Decides equality of two cells with the same boundary.
///
/// Both cells are normalized; equal canonical graphs decide positively.
/// Otherwise, when the theory has equations, a bidirectional search
/// applies them in both orientations (re-yanking after each move) until
/// the frontiers meet, both sides saturate, or the budget runs out.
pub fn cells_equal(
    theory: &Theory,
    a: &CellTerm,
    b: &CellTerm,
    opts: &RewriteOptions,
) -> Result<Verdict, RewriteError> {
    if a.boundary() != b.boundary() {
        return Err(RewriteError::BoundaryMismatch {
            left: a.boundary().to_string(),
            right: b.boundary().to_string(),
        });
    }
    let mut ga = explode(a);
    normalize(theory, &mut ga, opts, None)?;
    let mut gb = explode(b);
    normalize(theory, &mut gb, opts, None)?;
    if ga.encoding() == gb.encoding() {
        return Ok(Verdict::Equal);
    }
    if !opts.base_equations || theory.equations().is_empty() {
        return Ok(Verdict::NotEqualStructurally);
    }
    Ok(equational_search(theory, ga, gb, opts))
}

/// Decides equality of two base morphisms modulo the symmetric monoidal
/// axioms and the theory's equations, by comparing their lifted cells.
pub fn morphisms_equal(
    theory: &Theory,
    f: &MorphismTerm,
    g: &MorphismTerm,
    opts: &RewriteOptions,
) -> Result<Verdict, RewriteError> {
    if f.dom() != g.dom() || f.cod() != g.cod() {
        return Err(RewriteError::BoundaryMismatch {
            left: format!("{} -> {}", f.dom(), f.cod()),
            right: format!("{} -> {}", g.dom(), g.cod()),
        });
    }
    cells_equal(
        theory,
        &CellTerm::lift(f.clone()),
        &CellTerm::lift(g.clone()),
        opts,
    )
}

/// Bidirectional breadth-first search over equation applications in both
/// orientations, meeting in the middle on canonical encodings.
fn equational_search(theory: &Theory, ga: Pasting, gb: Pasting, opts: &RewriteOptions) -> Verdict {
    let eqs = compiled_equations(theory);
    let moves: Vec<(&MorphPattern, &MorphPattern)> = eqs
        .iter()
        .flat_map(|eq| [(&eq.lhs, &eq.rhs), (&eq.rhs, &eq.lhs)])
        .collect();
    let mut seen_a: BTreeSet<String> = BTreeSet::new();
    let mut seen_b: BTreeSet<String> = BTreeSet::new();
    seen_a.insert(ga.encoding());
    seen_b.insert(gb.encoding());
    let mut frontier_a = vec![ga];
    let mut frontier_b = vec![gb];
    let mut states = 2usize;
    for _ in 0..opts.search_depth {
        if frontier_a.is_empty() && frontier_b.is_empty() {
            // Both equivalence classes are fully enumerated and disjoint.
            return Verdict::NotEqualStructurally;
        }
        let expand_a = !frontier_a.is_empty()
            && (frontier_b.is_empty() || frontier_a.len() <= frontier_b.len());
        let (frontier, seen, other_seen) = if expand_a {
            (&mut frontier_a, &mut seen_a, &seen_b)
        } else {
            (&mut frontier_b, &mut seen_b, &seen_a)
        };
        let mut next = Vec::new();
        for g in frontier.drain(..) {
            for &(pat, rhs) in &moves {
                for m in g.find_matches(pat, 16) {
                    let mut h = g.clone();
                    if !h.apply_match(&m, rhs) {
                        continue;
                    }
                    structural_fixpoint(&mut h);
                    let enc = h.encoding();
                    if other_seen.contains(&enc) {
                        return Verdict::Equal;
                    }
                    if seen.insert(enc) {
                        states += 1;
                        if states > opts.search_states {
                            return Verdict::Unknown;
                        }
                        next.push(h);
                    }
                }
            }
        }
        *frontier = next;
    }
    if frontier_a.is_empty() && frontier_b.is_empty() {
        return Verdict::NotEqualStructurally;
    }
    Verdict::Unknown
}
