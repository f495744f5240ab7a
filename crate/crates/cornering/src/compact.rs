//! Compact closure: duals for the base theory and for exchanges.
//!
//! Dualizing a theory adjoins a dual generator `A'`, a unit
//! `I → A ⊗ A'`, and a counit `A' ⊗ A → I` for every object generator,
//! together with the two zig-zag equations oriented as reductions. Over
//! such a base the horizontal structure of the free cornering becomes
//! compact closed as well: every exchange type acquires a unit and a
//! counit, the one-way exchange of [`d_circ_bullet`] acquires an
//! inverse, making the horizontal category symmetric, and `A∘ ≅ (A')•`
//! through an explicit pair of mutually inverse cells.
//!
//! Units leave a paper trail. A morphism using units and counits reads
//! as a ledger of debts incurred and settled; [`balance_ledger`] cancels
//! matched pairs by snake reduction and reports whatever remains open.

use serde::{Deserialize, Serialize};
use std::fmt;

use thiserror::Error;

use crate::cell::{CellTerm, ExchangeType, Polarity, PolarizedObject};
use crate::crossing::tensor_cells;
use crate::exchange::{adapter, d_circ_bullet};
use crate::morphism::MorphismTerm;
use crate::pasting::{
    compile_pattern, explode, morphism_from_rows, schedule, MorphPattern, NodeId, ScheduledRow,
    SliceSpec,
};
use crate::theory::{ArrowDecl, Equation, ObjectWord, Theory, TheoryError};

/// Failures of the compact constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompactError {
    #[error("theory `{name}` is already dualized")]
    AlreadyDualized { name: String },
    #[error("theory `{name}` is not marked compact closed")]
    NotMarkedCompactClosed { name: String },
    #[error("the construction needs unit and counit arrows; dualize the theory first")]
    RequiresCompactBase,
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// An object generator or its dual, as a ledger entry.
///
/// The double dual collapses: the dual of `(A, starred)` is
/// `(A, !starred)`, never a doubly starred name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualizedObject {
    pub base: String,
    pub starred: bool,
}

impl DualizedObject {
    pub fn star(&self) -> DualizedObject {
        DualizedObject {
            base: self.base.clone(),
            starred: !self.starred,
        }
    }

    /// The declared object name: the base name, primed when starred.
    pub fn object_name(&self) -> String {
        if self.starred {
            dual_object_name(&self.base)
        } else {
            self.base.clone()
        }
    }
}

impl fmt::Display for DualizedObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.object_name())
    }
}

/// A position in the scheduled diagram: row index from the top, then
/// the number of wires to the left of the slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiagramSite {
    pub row: usize,
    pub col: usize,
}

impl fmt::Display for DiagramSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}, col {}", self.row, self.col)
    }
}

/// One unit/counit pair cancelled by a snake reduction, with the sites
/// the two boxes occupied when the cancellation fired.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CancelledPair {
    pub object: String,
    pub unit_at: DiagramSite,
    pub counit_at: DiagramSite,
}

/// The outcome of balancing a ledger: which pairs cancelled and which
/// entries remain open. Each surviving unit or counit leaves a credit
/// on the plain object and a debit on its dual; the ledger is balanced
/// exactly when both residual multisets are empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub cancelled_pairs: Vec<CancelledPair>,
    pub residual_credits: Vec<DualizedObject>,
    pub residual_debits: Vec<DualizedObject>,
    pub balanced: bool,
}

/// The declared name of an object's dual: a trailing prime, which a
/// second application removes again.
pub fn dual_object_name(name: &str) -> String {
    match name.strip_suffix('\'') {
        Some(base) => base.to_string(),
        None => format!("{name}'"),
    }
}

/// The dual of a word: factors dualized and reversed, so that the unit
/// and counit of a composite word type-check.
pub fn star_word(word: &ObjectWord) -> ObjectWord {
    ObjectWord::from_names(word.factors().iter().rev().map(|g| dual_object_name(g)))
}

fn eta_name(object: &str) -> String {
    format!("{object}_eta")
}

fn eps_name(object: &str) -> String {
    format!("{object}_eps")
}

/// Adjoins a dual, a unit `I → A ⊗ A'`, and a counit `A' ⊗ A → I` for
/// every object generator, plus both zig-zag equations oriented as
/// reductions, and returns the validated extension. Requires the
/// compact-closed flag; refuses to dualize twice.
pub fn dualize_theory(theory: &Theory) -> Result<Theory, CompactError> {
    if theory.is_dualized() {
        return Err(CompactError::AlreadyDualized {
            name: theory.name().to_string(),
        });
    }
    if !theory.compact_closed() {
        return Err(CompactError::NotMarkedCompactClosed {
            name: theory.name().to_string(),
        });
    }
    let mut p = theory.presentation().clone();
    let originals = p.objects.clone();
    for g in &originals {
        p.objects.push(dual_object_name(g));
    }
    for g in &originals {
        let base = ObjectWord::single(g.clone());
        let dual = ObjectWord::single(dual_object_name(g));
        p.arrows.push(ArrowDecl {
            name: eta_name(g),
            dom: ObjectWord::unit(),
            cod: base.tensor(&dual),
        });
        p.arrows.push(ArrowDecl {
            name: eps_name(g),
            dom: dual.tensor(&base),
            cod: ObjectWord::unit(),
        });
    }
    for g in &originals {
        let base = ObjectWord::single(g.clone());
        let dual = ObjectWord::single(dual_object_name(g));
        let eta = MorphismTerm::generator(&p, &eta_name(g)).expect("unit just declared");
        let eps = MorphismTerm::generator(&p, &eps_name(g)).expect("counit just declared");
        p.equations.push(Equation {
            name: Some(format!("{g}_snake")),
            lhs: MorphismTerm::seq(
                MorphismTerm::tensor(eta.clone(), MorphismTerm::identity(base.clone())),
                MorphismTerm::tensor(MorphismTerm::identity(base.clone()), eps.clone()),
            )
            .expect("the zig-zag composes"),
            rhs: MorphismTerm::identity(base),
        });
        p.equations.push(Equation {
            name: Some(format!("{g}_snake_dual")),
            lhs: MorphismTerm::seq(
                MorphismTerm::tensor(MorphismTerm::identity(dual.clone()), eta),
                MorphismTerm::tensor(eps, MorphismTerm::identity(dual.clone())),
            )
            .expect("the dual zig-zag composes"),
            rhs: MorphismTerm::identity(dual),
        });
    }
    let mut out = p.validate()?;
    out.mark_dualized();
    Ok(out)
}

/// The dual of an exchange type: polarity flipped on every factor, the
/// word inside each factor untouched and the order kept. Involutive.
pub fn exchange_dual(x: &ExchangeType) -> ExchangeType {
    x.iter()
        .map(|atom| {
            let polarity = match atom.polarity {
                Polarity::Circ => Polarity::Bullet,
                Polarity::Bullet => Polarity::Circ,
            };
            PolarizedObject {
                object: atom.object.clone(),
                polarity,
            }
        })
        .collect()
}

/// The unit `I → A ⊗ A*` of a single object, routed through the braid
/// when the object is itself a dual so that no doubly primed generator
/// is ever mentioned.
fn eta_object(theory: &Theory, name: &str) -> Result<MorphismTerm, CompactError> {
    if let Some(base) = name.strip_suffix('\'') {
        let eta = theory.generator(&eta_name(base))?;
        let braid = MorphismTerm::braid(ObjectWord::single(base), ObjectWord::single(name));
        return Ok(MorphismTerm::seq(eta, braid).expect("the unit braids"));
    }
    Ok(theory.generator(&eta_name(name))?)
}

/// The counit `A* ⊗ A → I` of a single object; dual objects route
/// through the braid into the base counit.
fn eps_object(theory: &Theory, name: &str) -> Result<MorphismTerm, CompactError> {
    if let Some(base) = name.strip_suffix('\'') {
        let braid = MorphismTerm::braid(ObjectWord::single(base), ObjectWord::single(name));
        let eps = theory.generator(&eps_name(base))?;
        return Ok(MorphismTerm::seq(braid, eps).expect("the counit braids"));
    }
    Ok(theory.generator(&eps_name(name))?)
}

/// The unit `I → w ⊗ w*` of a word, nesting the units of its factors.
fn eta_word(theory: &Theory, word: &ObjectWord) -> Result<MorphismTerm, CompactError> {
    if word.is_unit() {
        return Ok(MorphismTerm::identity(ObjectWord::unit()));
    }
    if !theory.is_dualized() {
        return Err(CompactError::RequiresCompactBase);
    }
    let factors = word.factors();
    let head = &factors[0];
    let rest = ObjectWord::from_names(factors[1..].iter().cloned());
    let head_eta = eta_object(theory, head)?;
    if rest.is_unit() {
        return Ok(head_eta);
    }
    let nested = MorphismTerm::tensor(
        MorphismTerm::tensor(
            MorphismTerm::identity(ObjectWord::single(head.clone())),
            eta_word(theory, &rest)?,
        ),
        MorphismTerm::identity(ObjectWord::single(dual_object_name(head))),
    );
    Ok(MorphismTerm::seq(head_eta, nested).expect("the nested unit composes"))
}

/// The counit `w* ⊗ w → I` of a word, peeling factors from the middle.
fn eps_word(theory: &Theory, word: &ObjectWord) -> Result<MorphismTerm, CompactError> {
    if word.is_unit() {
        return Ok(MorphismTerm::identity(ObjectWord::unit()));
    }
    if !theory.is_dualized() {
        return Err(CompactError::RequiresCompactBase);
    }
    let factors = word.factors();
    let head = &factors[0];
    let rest = ObjectWord::from_names(factors[1..].iter().cloned());
    let head_eps = eps_object(theory, head)?;
    if rest.is_unit() {
        return Ok(head_eps);
    }
    let peel = MorphismTerm::tensor(
        MorphismTerm::identity(star_word(&rest)),
        MorphismTerm::tensor(head_eps, MorphismTerm::identity(rest.clone())),
    );
    Ok(MorphismTerm::seq(peel, eps_word(theory, &rest)?).expect("the peeled counit composes"))
}

/// The unit cell of one exchange factor: `I → [atom, atom*]`.
fn unit_atom(theory: &Theory, atom: &PolarizedObject) -> Result<CellTerm, CompactError> {
    let word = atom.object.clone();
    match atom.polarity {
        // Receive, then send back: the corner pair is a unit on its own.
        Polarity::Bullet => Ok(CellTerm::stack([
            CellTerm::recv_right(word.clone()),
            CellTerm::send_right(word),
        ])
        .expect("the corner pair stacks")),
        // Send, then receive, against a base unit held across the two
        // exchanges and collapsed by the base counit.
        Polarity::Circ => {
            let star = star_word(&word);
            let open = MorphismTerm::seq(
                eta_word(theory, &word)?,
                MorphismTerm::braid(word.clone(), star.clone()),
            )
            .expect("the unit braids");
            Ok(CellTerm::stack([
                CellTerm::lift(open),
                CellTerm::beside([
                    CellTerm::vid(star.clone()),
                    CellTerm::send_right(word.clone()),
                ])
                .expect("the send pads"),
                CellTerm::beside([CellTerm::vid(star), CellTerm::recv_right(word.clone())])
                    .expect("the receive pads"),
                CellTerm::lift(eps_word(theory, &word)?),
            ])
            .expect("the unit cell stacks"))
        }
    }
}

/// The counit cell of one exchange factor: `[atom*, atom] → I`.
fn counit_atom(theory: &Theory, atom: &PolarizedObject) -> Result<CellTerm, CompactError> {
    let word = atom.object.clone();
    match atom.polarity {
        Polarity::Bullet => {
            Ok(
                CellTerm::stack([CellTerm::recv_left(word.clone()), CellTerm::send_left(word)])
                    .expect("the corner pair stacks"),
            )
        }
        Polarity::Circ => {
            let star = star_word(&word);
            let close = MorphismTerm::seq(
                MorphismTerm::braid(word.clone(), star.clone()),
                eps_word(theory, &word)?,
            )
            .expect("the counit braids");
            Ok(CellTerm::stack([
                CellTerm::lift(eta_word(theory, &word)?),
                CellTerm::beside([
                    CellTerm::send_left(word.clone()),
                    CellTerm::vid(star.clone()),
                ])
                .expect("the send pads"),
                CellTerm::beside([CellTerm::recv_left(word), CellTerm::vid(star)])
                    .expect("the receive pads"),
                CellTerm::lift(close),
            ])
            .expect("the counit cell stacks"))
        }
    }
}

fn unit_of(theory: &Theory, atoms: &[PolarizedObject]) -> Result<CellTerm, CompactError> {
    let Some((head, rest)) = atoms.split_first() else {
        return Ok(CellTerm::empty());
    };
    let head_unit = unit_atom(theory, head)?;
    if rest.is_empty() {
        return Ok(head_unit);
    }
    let head_t = ExchangeType::single(head.clone());
    let head_star = exchange_dual(&head_t);
    let rest_t: ExchangeType = rest.iter().cloned().collect();
    let rest_star = exchange_dual(&rest_t);
    // I → X ⊗ X* → X ⊗ (Y ⊗ Y*) ⊗ X* → X ⊗ Y ⊗ X* ⊗ Y*.
    let nest = tensor_cells(
        &tensor_cells(&CellTerm::hid(head_t.clone()), &unit_of(theory, rest)?),
        &CellTerm::hid(head_star.clone()),
    );
    let fix = tensor_cells(
        &CellTerm::hid(head_t.tensor(&rest_t)),
        &h_symmetry(theory, &rest_star, &head_star)?,
    );
    let opened = CellTerm::hcomp(head_unit, nest).expect("the nested unit follows the head unit");
    Ok(CellTerm::hcomp(opened, fix).expect("the symmetry reorders the duals"))
}

fn counit_of(theory: &Theory, atoms: &[PolarizedObject]) -> Result<CellTerm, CompactError> {
    let Some((head, rest)) = atoms.split_first() else {
        return Ok(CellTerm::empty());
    };
    let head_counit = counit_atom(theory, head)?;
    if rest.is_empty() {
        return Ok(head_counit);
    }
    let head_t = ExchangeType::single(head.clone());
    let head_star = exchange_dual(&head_t);
    let rest_t: ExchangeType = rest.iter().cloned().collect();
    let rest_star = exchange_dual(&rest_t);
    // X* ⊗ Y* ⊗ X ⊗ Y → X* ⊗ X ⊗ Y* ⊗ Y → I.
    let sort = tensor_cells(
        &tensor_cells(
            &CellTerm::hid(head_star),
            &h_symmetry(theory, &rest_star, &head_t)?,
        ),
        &CellTerm::hid(rest_t),
    );
    let close = tensor_cells(&head_counit, &counit_of(theory, rest)?);
    Ok(CellTerm::hcomp(sort, close).expect("the sorted factors close"))
}

/// The unit `I → X ⊗ X*` of an exchange type. Receive-send corner
/// pairs serve for `•` factors on any theory; `∘` factors borrow the
/// base unit and counit and need a dualized theory.
pub fn h_unit(theory: &Theory, x: &ExchangeType) -> Result<CellTerm, CompactError> {
    let atoms: Vec<PolarizedObject> = x.iter().cloned().collect();
    unit_of(theory, &atoms)
}

/// The counit `X* ⊗ X → I` of an exchange type; dual remarks as for
/// [`h_unit`].
pub fn h_counit(theory: &Theory, x: &ExchangeType) -> Result<CellTerm, CompactError> {
    let atoms: Vec<PolarizedObject> = x.iter().cloned().collect();
    counit_of(theory, &atoms)
}

/// A swap of two adjacent exchange factors. Same-polarity swaps ride
/// the canonicalization adapter, a `∘` past a `•` is the free one-way
/// exchange, and the reverse needs its compact inverse.
fn pair_swap(
    theory: &Theory,
    a: &PolarizedObject,
    b: &PolarizedObject,
) -> Result<CellTerm, CompactError> {
    match (a.polarity, b.polarity) {
        (Polarity::Circ, Polarity::Bullet) => Ok(d_circ_bullet(&a.object, &b.object)),
        (Polarity::Bullet, Polarity::Circ) => symmetry_inverse(theory, &b.object, &a.object),
        _ => {
            let from: ExchangeType = [a.clone(), b.clone()].into_iter().collect();
            let to: ExchangeType = [b.clone(), a.clone()].into_iter().collect();
            Ok(adapter(theory, &from, &to).expect("same-polarity pairs always have an adapter"))
        }
    }
}

fn swap_layer(
    theory: &Theory,
    atoms: &[PolarizedObject],
    pos: usize,
) -> Result<CellTerm, CompactError> {
    let mut cell = pair_swap(theory, &atoms[pos], &atoms[pos + 1])?;
    if pos > 0 {
        let before: ExchangeType = atoms[..pos].iter().cloned().collect();
        cell = tensor_cells(&CellTerm::hid(before), &cell);
    }
    if pos + 2 < atoms.len() {
        let after: ExchangeType = atoms[pos + 2..].iter().cloned().collect();
        cell = tensor_cells(&cell, &CellTerm::hid(after));
    }
    Ok(cell)
}

/// The symmetry `U ⊗ V → V ⊗ U` of exchange types, as a chain of
/// adjacent transpositions. Free when every crossing moves a `∘` past
/// a `•` or keeps polarity; crossings the other way need the dualized
/// base.
pub fn h_symmetry(
    theory: &Theory,
    u: &ExchangeType,
    v: &ExchangeType,
) -> Result<CellTerm, CompactError> {
    let mut atoms: Vec<PolarizedObject> = u.iter().chain(v.iter()).cloned().collect();
    let u_len = u.iter().count();
    let v_len = v.iter().count();
    let mut cell: Option<CellTerm> = None;
    for j in 0..v_len {
        for pos in (j..u_len + j).rev() {
            let layer = swap_layer(theory, &atoms, pos)?;
            atoms.swap(pos, pos + 1);
            cell = Some(match cell {
                None => layer,
                Some(c) => {
                    CellTerm::hcomp(c, layer).expect("adjacent swap layers share a boundary")
                }
            });
        }
    }
    Ok(cell.unwrap_or_else(|| CellTerm::hid(u.tensor(v))))
}

/// The two mutually inverse cells witnessing `A∘ ≅ (A*)•`: forwards,
/// receive `A` from the left, receive `A*` from the right, and close
/// with the base counit; backwards, open with the base unit, send `A*`
/// leftward and `A` rightward.
pub fn reversal_iso(theory: &Theory, a: &ObjectWord) -> Result<(CellTerm, CellTerm), CompactError> {
    if !theory.is_dualized() {
        return Err(CompactError::RequiresCompactBase);
    }
    if a.is_unit() {
        return Ok((CellTerm::empty(), CellTerm::empty()));
    }
    let star = star_word(a);
    let to = CellTerm::stack([
        CellTerm::recv_left(a.clone()),
        CellTerm::beside([CellTerm::vid(a.clone()), CellTerm::recv_right(star.clone())])
            .expect("the receive pads"),
        CellTerm::lift(
            MorphismTerm::seq(
                MorphismTerm::braid(a.clone(), star.clone()),
                eps_word(theory, a)?,
            )
            .expect("the counit braids"),
        ),
    ])
    .expect("the forward half stacks");
    let from = CellTerm::stack([
        CellTerm::lift(
            MorphismTerm::seq(
                eta_word(theory, a)?,
                MorphismTerm::braid(a.clone(), star.clone()),
            )
            .expect("the unit braids"),
        ),
        CellTerm::beside([CellTerm::send_left(star), CellTerm::vid(a.clone())])
            .expect("the send pads"),
        CellTerm::send_right(a.clone()),
    ])
    .expect("the backward half stacks");
    Ok((to, from))
}

/// The inverse `B• ⊗ A∘ → A∘ ⊗ B•` of the free one-way exchange: hold
/// a unit on `B` open across the crossing and close it once the `B`
/// from the right has arrived.
pub fn symmetry_inverse(
    theory: &Theory,
    a: &ObjectWord,
    b: &ObjectWord,
) -> Result<CellTerm, CompactError> {
    if !theory.is_dualized() {
        return Err(CompactError::RequiresCompactBase);
    }
    let star = star_word(b);
    Ok(CellTerm::stack([
        CellTerm::lift(eta_word(theory, b)?),
        CellTerm::beside([CellTerm::send_left(b.clone()), CellTerm::vid(star.clone())])
            .expect("the send pads"),
        CellTerm::beside([CellTerm::recv_left(a.clone()), CellTerm::vid(star.clone())])
            .expect("the receive pads"),
        CellTerm::lift(MorphismTerm::braid(a.clone(), star.clone())),
        CellTerm::beside([CellTerm::vid(star.clone()), CellTerm::send_right(a.clone())])
            .expect("the send pads"),
        CellTerm::beside([CellTerm::vid(star.clone()), CellTerm::recv_right(b.clone())])
            .expect("the receive pads"),
        CellTerm::lift(eps_word(theory, b)?),
    ])
    .expect("the inverse stacks"))
}

/// The compiled snake patterns of every object with declared unit and
/// counit arrows of the expected shapes, in declaration order.
fn snake_patterns(theory: &Theory) -> Vec<(String, MorphPattern, MorphPattern)> {
    let mut out = Vec::new();
    for g in theory.objects() {
        let base = ObjectWord::single(g.clone());
        let dual = ObjectWord::single(dual_object_name(g));
        let (Some(unit), Some(counit)) = (
            theory.arrow_decl(&eta_name(g)),
            theory.arrow_decl(&eps_name(g)),
        ) else {
            continue;
        };
        if !unit.dom.is_unit() || unit.cod != base.tensor(&dual) {
            continue;
        }
        if counit.dom != dual.tensor(&base) || !counit.cod.is_unit() {
            continue;
        }
        let eta = theory.generator(&eta_name(g)).expect("shape checked");
        let eps = theory.generator(&eps_name(g)).expect("shape checked");
        let zig = MorphismTerm::seq(
            MorphismTerm::tensor(eta.clone(), MorphismTerm::identity(base.clone())),
            MorphismTerm::tensor(MorphismTerm::identity(base.clone()), eps.clone()),
        )
        .expect("the zig-zag composes");
        let zag = MorphismTerm::seq(
            MorphismTerm::tensor(MorphismTerm::identity(dual.clone()), eta),
            MorphismTerm::tensor(eps, MorphismTerm::identity(dual.clone())),
        )
        .expect("the dual zig-zag composes");
        out.push((
            g.clone(),
            compile_pattern(&zig),
            compile_pattern(&MorphismTerm::identity(base)),
        ));
        out.push((
            g.clone(),
            compile_pattern(&zag),
            compile_pattern(&MorphismTerm::identity(dual)),
        ));
    }
    out
}

fn site_of(rows: &[ScheduledRow], id: NodeId) -> DiagramSite {
    rows.iter()
        .enumerate()
        .find_map(|(row, r)| match r.slice {
            SliceSpec::Box(b) if b == id => Some(DiagramSite {
                row,
                col: r.pre.len(),
            }),
            _ => None,
        })
        .unwrap_or(DiagramSite { row: 0, col: 0 })
}

/// The base object when the label names a unit or counit arrow of the
/// dualizing shape.
fn ledger_entry(theory: &Theory, label: &str) -> Option<String> {
    let check = |g: &str| {
        let base = ObjectWord::single(g);
        let dual = ObjectWord::single(dual_object_name(g));
        let unit_ok = theory
            .arrow_decl(&eta_name(g))
            .is_some_and(|d| d.dom.is_unit() && d.cod == base.tensor(&dual));
        let counit_ok = theory
            .arrow_decl(&eps_name(g))
            .is_some_and(|d| d.dom == dual.tensor(&base) && d.cod.is_unit());
        unit_ok && counit_ok
    };
    if let Some(g) = label.strip_suffix("_eta") {
        if check(g) {
            return Some(g.to_string());
        }
    }
    if let Some(g) = label.strip_suffix("_eps") {
        if check(g) {
            return Some(g.to_string());
        }
    }
    None
}

/// Cancels matched unit/counit pairs by snake reduction and reports
/// the bookkeeping: cancelled pairs with the sites they occupied when
/// they fired, and one credit/debit entry per surviving unit or
/// counit. The returned morphism is equal to the input under the snake
/// equations, and balancing it again changes nothing.
pub fn balance_ledger(theory: &Theory, m: &MorphismTerm) -> (MorphismTerm, LedgerReport) {
    let snakes = snake_patterns(theory);
    let mut g = explode(&CellTerm::lift(m.clone()));
    let mut cancelled = Vec::new();
    loop {
        g.canonicalize();
        let rows = schedule(&g);
        let mut fired = false;
        'patterns: for (object, lhs, rhs) in &snakes {
            for binding in g.find_matches(lhs, 16) {
                if g.apply_match(&binding, rhs) {
                    cancelled.push(CancelledPair {
                        object: object.clone(),
                        unit_at: site_of(&rows, binding.boxes[0]),
                        counit_at: site_of(&rows, binding.boxes[1]),
                    });
                    fired = true;
                    break 'patterns;
                }
            }
        }
        if !fired {
            break;
        }
    }
    g.canonicalize();
    let rows = schedule(&g);
    let mut credits = Vec::new();
    let mut debits = Vec::new();
    for node in g.boxes.values() {
        if let Some(base) = ledger_entry(theory, &node.label) {
            credits.push(DualizedObject {
                base: base.clone(),
                starred: false,
            });
            debits.push(DualizedObject {
                base,
                starred: true,
            });
        }
    }
    credits.sort();
    debits.sort();
    let balanced = credits.is_empty() && debits.is_empty();
    let out = morphism_from_rows(&g, &rows).expect("a lifted morphism stays corner-free");
    (
        out,
        LedgerReport {
            cancelled_pairs: cancelled,
            residual_credits: credits,
            residual_debits: debits,
            balanced,
        },
    )
}

/// The forwarding half `[w•] → [(w*)∘]`: open a unit, send the `w` leg
/// leftward, and send the dual onwards.
fn bullet_to_circ(theory: &Theory, word: &ObjectWord) -> Result<CellTerm, CompactError> {
    let star = star_word(word);
    Ok(CellTerm::stack([
        CellTerm::lift(eta_word(theory, word)?),
        CellTerm::beside([
            CellTerm::send_left(word.clone()),
            CellTerm::vid(star.clone()),
        ])
        .expect("the send pads"),
        CellTerm::send_right(star),
    ])
    .expect("the forwarding half stacks"))
}

/// The receiving half `[(w*)∘] → [w•]`: receive the dual from the
/// left, the `w` from the right, and close with the counit.
fn circ_to_bullet(theory: &Theory, word: &ObjectWord) -> Result<CellTerm, CompactError> {
    let star = star_word(word);
    Ok(CellTerm::stack([
        CellTerm::recv_left(star.clone()),
        CellTerm::beside([CellTerm::vid(star), CellTerm::recv_right(word.clone())])
            .expect("the receive pads"),
        CellTerm::lift(eps_word(theory, word)?),
    ])
    .expect("the receiving half stacks"))
}

/// The all-`∘` form of an exchange type: `•` factors become their
/// duals flowing the other way.
fn circ_form(x: &ExchangeType) -> ExchangeType {
    x.iter()
        .map(|atom| match atom.polarity {
            Polarity::Circ => atom.clone(),
            Polarity::Bullet => PolarizedObject {
                object: star_word(&atom.object),
                polarity: Polarity::Circ,
            },
        })
        .collect()
}

/// The witness `x → circ_form(x)`, one factor at a time.
fn to_circ(theory: &Theory, x: &ExchangeType) -> Result<CellTerm, CompactError> {
    let mut parts = Vec::new();
    for atom in x.iter() {
        parts.push(match atom.polarity {
            Polarity::Circ => CellTerm::hid(ExchangeType::single(atom.clone())),
            Polarity::Bullet => bullet_to_circ(theory, &atom.object)?,
        });
    }
    Ok(CellTerm::stack(parts).expect("the factor witnesses stack"))
}

/// The witness `circ_form(x) → x`.
fn from_circ(theory: &Theory, x: &ExchangeType) -> Result<CellTerm, CompactError> {
    let mut parts = Vec::new();
    for atom in x.iter() {
        parts.push(match atom.polarity {
            Polarity::Circ => CellTerm::hid(ExchangeType::single(atom.clone())),
            Polarity::Bullet => circ_to_bullet(theory, &atom.object)?,
        });
    }
    Ok(CellTerm::stack(parts).expect("the factor witnesses stack"))
}

/// Rewrites a cell so that both vertical boundaries flow left to
/// right, by composing with the reversal witnesses wherever a factor
/// flows the other way. A diagnostic form, not a normal form: no
/// completeness is claimed for it.
pub fn circ_normal_form(theory: &Theory, c: &CellTerm) -> Result<CellTerm, CompactError> {
    let boundary = c.boundary().clone();
    let mut out = c.clone();
    if boundary.left.iter().any(|a| a.polarity == Polarity::Bullet) {
        let intro = from_circ(theory, &boundary.left)?;
        out = CellTerm::hcomp(intro, out).expect("the witness matches the left boundary");
    }
    if boundary
        .right
        .iter()
        .any(|a| a.polarity == Polarity::Bullet)
    {
        let outro = to_circ(theory, &boundary.right)?;
        out = CellTerm::hcomp(out, outro).expect("the witness matches the right boundary");
    }
    debug_assert_eq!(out.boundary().left, circ_form(&boundary.left));
    debug_assert_eq!(out.boundary().right, circ_form(&boundary.right));
    Ok(out)
}
