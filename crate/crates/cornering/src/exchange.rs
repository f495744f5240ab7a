//! Canonical forms and adapter cells for exchange types.
//!
//! Exchanges that differ only in how the hand-offs are packaged achieve
//! the same thing: handing over nothing changes nothing, a compound
//! resource may be handed over in one go or factor by factor, and two
//! hand-offs in the same direction may be reordered. The canonical form
//! quotients an exchange type by exactly these equivalences: unit
//! hand-offs are dropped, compound hand-offs are flattened to one
//! generator each, and maximal same-direction runs are sorted by the
//! theory's declaration order. Hand-offs in opposite directions never
//! commute, because one party would have to give away material it has
//! not yet received.
//!
//! Adapters witness the equivalences as horizontal cells built from unit
//! corners, whiskered braidings, and split or merge stages; composing an
//! adapter with its reverse normalizes to the identity protocol. The one
//! genuinely one-directional reordering is [`d_circ_bullet`], which
//! defers a right-bound hand-off past a left-bound one and has no
//! inverse.

use crate::cell::{CellTerm, ExchangeType, Polarity, PolarizedObject};
use crate::morphism::MorphismTerm;
use crate::theory::{ObjectWord, Theory};

/// Rewrites an exchange type to its canonical form: unit hand-offs
/// dropped, compound hand-offs flattened to single generators, and
/// same-polarity runs sorted by the theory's object declaration order.
/// Idempotent; two types canonicalize equal exactly when they describe
/// equivalent exchanges.
pub fn canonicalize_exchange(theory: &Theory, x: &ExchangeType) -> ExchangeType {
    canonical_steps(theory, x).1
}

/// Builds the adapter cell from protocol `x` to protocol `y`: a
/// horizontal cell with boundary (left `x`, right `y`, top I, bottom I)
/// relaying every hand-off while repackaging it. Returns `None` when the
/// canonical forms differ, in particular for any reordering of opposite
/// polarities.
pub fn adapter(theory: &Theory, x: &ExchangeType, y: &ExchangeType) -> Option<CellTerm> {
    let (steps_x, canon_x) = canonical_steps(theory, x);
    let (steps_y, canon_y) = canonical_steps(theory, y);
    if canon_x != canon_y {
        return None;
    }
    let mut cells = Vec::new();
    for (before, step) in &steps_x {
        cells.push(step_cell(before, step, true));
    }
    for (before, step) in steps_y.iter().rev() {
        cells.push(step_cell(before, step, false));
    }
    if cells.is_empty() {
        return Some(CellTerm::hid(x.clone()));
    }
    Some(CellTerm::beside(cells).expect("adapter stages share their boundaries"))
}

/// The one-way reordering cell from `a∘ ⊗ b•` to `b• ⊗ a∘`: it takes `a`
/// from the left and `b` from the right, then hands `b` left and `a`
/// right. The opposite reordering would require giving material away
/// before receiving it, so no inverse cell exists.
pub fn d_circ_bullet(a: &ObjectWord, b: &ObjectWord) -> CellTerm {
    CellTerm::stack([
        CellTerm::recv_left(a.clone()),
        CellTerm::beside([CellTerm::vid(a.clone()), CellTerm::recv_right(b.clone())])
            .expect("receive widens the word"),
        CellTerm::lift(MorphismTerm::braid(a.clone(), b.clone())),
        CellTerm::beside([CellTerm::send_left(b.clone()), CellTerm::vid(a.clone())])
            .expect("send narrows the word"),
        CellTerm::send_right(a.clone()),
    ])
    .expect("the reordering rows chain")
}

/// One canonicalization move, located in the type it applies to.
#[derive(Clone, Debug)]
enum Step {
    /// Remove the unit-object atom at `at`.
    DropUnit { at: usize },
    /// Replace the compound atom at `at` by one atom per factor.
    Flatten { at: usize },
    /// Swap the same-polarity atoms at `at` and `at + 1`.
    SwapAdjacent { at: usize },
}

fn apply_step(x: &ExchangeType, step: &Step) -> ExchangeType {
    let mut v = x.factors().to_vec();
    match step {
        Step::DropUnit { at } => {
            v.remove(*at);
        }
        Step::Flatten { at } => {
            let atom = v[*at].clone();
            let parts = atom
                .object
                .factors()
                .iter()
                .map(|f| PolarizedObject::new(ObjectWord::single(f.clone()), atom.polarity));
            v.splice(*at..*at + 1, parts);
        }
        Step::SwapAdjacent { at } => v.swap(*at, *at + 1),
    }
    ExchangeType::new(v)
}

/// Sort key for single-generator atoms: declaration order, with objects
/// missing from the theory after all declared ones.
fn atom_key(theory: &Theory, atom: &PolarizedObject) -> (usize, String) {
    let name = atom.object.factors()[0].clone();
    (theory.object_index(&name).unwrap_or(usize::MAX), name)
}

fn canonical_steps(theory: &Theory, x: &ExchangeType) -> (Vec<(ExchangeType, Step)>, ExchangeType) {
    let mut cur = x.clone();
    let mut steps = Vec::new();
    let mut push = |cur: &mut ExchangeType, step: Step| {
        let next = apply_step(cur, &step);
        steps.push((cur.clone(), step));
        *cur = next;
    };
    loop {
        let found = cur.factors().iter().position(|a| a.object.len() != 1);
        match found {
            Some(at) if cur.factors()[at].object.is_unit() => push(&mut cur, Step::DropUnit { at }),
            Some(at) => push(&mut cur, Step::Flatten { at }),
            None => break,
        }
    }
    loop {
        let found = (0..cur.len().saturating_sub(1)).find(|&i| {
            let a = &cur.factors()[i];
            let b = &cur.factors()[i + 1];
            a.polarity == b.polarity && atom_key(theory, b) < atom_key(theory, a)
        });
        match found {
            Some(at) => push(&mut cur, Step::SwapAdjacent { at }),
            None => break,
        }
    }
    (steps, cur)
}

/// The cell for one canonicalization move: every untouched hand-off is
/// relayed left to right, while the moved one is repackaged. `forward`
/// builds the move itself (left `before`, right `after`); otherwise its
/// reverse (left `after`, right `before`).
fn step_cell(before: &ExchangeType, step: &Step, forward: bool) -> CellTerm {
    let mut rows = Vec::new();
    let atoms = before.factors();
    let mut j = 0;
    while j < atoms.len() {
        let atom = &atoms[j];
        match step {
            Step::DropUnit { at } if *at == j => match (atom.polarity, forward) {
                (Polarity::Circ, true) => rows.push(CellTerm::recv_left(ObjectWord::unit())),
                (Polarity::Circ, false) => rows.push(CellTerm::send_right(ObjectWord::unit())),
                (Polarity::Bullet, true) => rows.push(CellTerm::send_left(ObjectWord::unit())),
                (Polarity::Bullet, false) => rows.push(CellTerm::recv_right(ObjectWord::unit())),
            },
            Step::Flatten { at } if *at == j => {
                let w = &atom.object;
                match (atom.polarity, forward) {
                    (Polarity::Circ, true) => {
                        rows.push(CellTerm::recv_left(w.clone()));
                        flat_send_right(w, &mut rows);
                    }
                    (Polarity::Circ, false) => {
                        flat_recv_left(w, &mut rows);
                        rows.push(CellTerm::send_right(w.clone()));
                    }
                    (Polarity::Bullet, true) => {
                        flat_recv_right(w, &mut rows);
                        rows.push(CellTerm::send_left(w.clone()));
                    }
                    (Polarity::Bullet, false) => {
                        rows.push(CellTerm::recv_right(w.clone()));
                        flat_send_left(w, &mut rows);
                    }
                }
            }
            Step::SwapAdjacent { at } if *at == j => {
                let (first, second) = if forward {
                    (&atoms[j], &atoms[j + 1])
                } else {
                    (&atoms[j + 1], &atoms[j])
                };
                swap_block(first, second, &mut rows);
                j += 1;
            }
            _ => relay_block(atom, &mut rows),
        }
        j += 1;
    }
    CellTerm::stack(rows).expect("step rows chain")
}

/// Pass one hand-off through unchanged.
fn relay_block(atom: &PolarizedObject, rows: &mut Vec<CellTerm>) {
    match atom.polarity {
        Polarity::Circ => {
            rows.push(CellTerm::recv_left(atom.object.clone()));
            rows.push(CellTerm::send_right(atom.object.clone()));
        }
        Polarity::Bullet => {
            rows.push(CellTerm::recv_right(atom.object.clone()));
            rows.push(CellTerm::send_left(atom.object.clone()));
        }
    }
}

/// Exchange two same-polarity hand-offs: take both in, braid, give both
/// out in the other order.
fn swap_block(a: &PolarizedObject, b: &PolarizedObject, rows: &mut Vec<CellTerm>) {
    let (wa, wb) = (&a.object, &b.object);
    match a.polarity {
        Polarity::Circ => {
            rows.push(CellTerm::recv_left(wa.clone()));
            rows.push(
                CellTerm::beside([CellTerm::recv_left(wb.clone()), CellTerm::vid(wa.clone())])
                    .expect("receive widens the word"),
            );
            rows.push(CellTerm::lift(MorphismTerm::braid(wb.clone(), wa.clone())));
            rows.push(
                CellTerm::beside([CellTerm::vid(wa.clone()), CellTerm::send_right(wb.clone())])
                    .expect("send narrows the word"),
            );
            rows.push(CellTerm::send_right(wa.clone()));
        }
        Polarity::Bullet => {
            rows.push(CellTerm::recv_right(wb.clone()));
            rows.push(
                CellTerm::beside([CellTerm::vid(wb.clone()), CellTerm::recv_right(wa.clone())])
                    .expect("receive widens the word"),
            );
            rows.push(CellTerm::lift(MorphismTerm::braid(wb.clone(), wa.clone())));
            rows.push(
                CellTerm::beside([CellTerm::send_left(wa.clone()), CellTerm::vid(wb.clone())])
                    .expect("send narrows the word"),
            );
            rows.push(CellTerm::send_left(wb.clone()));
        }
    }
}

/// Send each factor rightward in declaration order, braiding it past the
/// factors still waiting.
fn flat_send_right(word: &ObjectWord, rows: &mut Vec<CellTerm>) {
    let fs = word.factors();
    for i in 0..fs.len() {
        let head = ObjectWord::single(fs[i].clone());
        let rest = ObjectWord::from_names(fs[i + 1..].iter().cloned());
        if rest.is_unit() {
            rows.push(CellTerm::send_right(head));
        } else {
            rows.push(CellTerm::lift(MorphismTerm::braid(
                head.clone(),
                rest.clone(),
            )));
            rows.push(
                CellTerm::beside([CellTerm::vid(rest), CellTerm::send_right(head)])
                    .expect("send narrows the word"),
            );
        }
    }
}

/// Receive each factor from the left in order; new arrivals land
/// leftmost, so the assembled word comes out reversed and is braided
/// back into place.
fn flat_recv_left(word: &ObjectWord, rows: &mut Vec<CellTerm>) {
    let mut acc = ObjectWord::unit();
    for f in word.factors() {
        let head = ObjectWord::single(f.clone());
        if acc.is_unit() {
            rows.push(CellTerm::recv_left(head.clone()));
        } else {
            rows.push(
                CellTerm::beside([
                    CellTerm::recv_left(head.clone()),
                    CellTerm::vid(acc.clone()),
                ])
                .expect("receive widens the word"),
            );
        }
        acc = head.tensor(&acc);
    }
    if word.len() > 1 {
        rows.push(CellTerm::lift(reversal(&acc)));
    }
}

/// Receive each factor from the right in order; arrivals land rightmost,
/// already in place.
fn flat_recv_right(word: &ObjectWord, rows: &mut Vec<CellTerm>) {
    let mut acc = ObjectWord::unit();
    for f in word.factors() {
        let head = ObjectWord::single(f.clone());
        if acc.is_unit() {
            rows.push(CellTerm::recv_right(head.clone()));
        } else {
            rows.push(
                CellTerm::beside([
                    CellTerm::vid(acc.clone()),
                    CellTerm::recv_right(head.clone()),
                ])
                .expect("receive widens the word"),
            );
        }
        acc = acc.tensor(&head);
    }
}

/// Send each factor leftward in order; the next factor is always
/// leftmost, so no braiding is needed.
fn flat_send_left(word: &ObjectWord, rows: &mut Vec<CellTerm>) {
    let fs = word.factors();
    for i in 0..fs.len() {
        let head = ObjectWord::single(fs[i].clone());
        let rest = ObjectWord::from_names(fs[i + 1..].iter().cloned());
        if rest.is_unit() {
            rows.push(CellTerm::send_left(head));
        } else {
            rows.push(
                CellTerm::beside([CellTerm::send_left(head), CellTerm::vid(rest)])
                    .expect("send narrows the word"),
            );
        }
    }
}

/// The braid composite reversing a word's factors.
fn reversal(w: &ObjectWord) -> MorphismTerm {
    let fs = w.factors();
    if fs.len() <= 1 {
        return MorphismTerm::identity(w.clone());
    }
    let head = ObjectWord::single(fs[0].clone());
    let rest = ObjectWord::from_names(fs[1..].iter().cloned());
    let rotate = MorphismTerm::braid(head.clone(), rest.clone());
    let recurse = MorphismTerm::tensor(reversal(&rest), MorphismTerm::identity(head));
    MorphismTerm::seq(rotate, recurse).expect("rotation ends where reversal starts")
}
