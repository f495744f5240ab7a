//! Crossing cells and the tensor of cells.
//!
//! A crossing cell carries a vertical wire `B` through an exchange `X`:
//! its boundary is `X` on both sides and `B` on top and bottom. Each
//! hand-off in the exchange is relayed around the carried wire by a pair
//! of corners and a braiding, so the material changes hands exactly as
//! before while `B` passes through untouched. Crossings slide past every
//! cell, which makes purely vertical transformations and purely
//! horizontal exchanges commute with one another.
//!
//! On top of the crossings sits a tensor of cells: two cells placed side
//! by side become one cell whose boundaries are the pointwise tensors,
//! with the inner boundaries routed past each other by crossings. The
//! tensor is strictly associative and unital on boundaries, while on
//! cells the two ways of tensoring vertical composites agree only up to
//! an exchange of the middle wires.

use crate::cell::{CellTerm, ExchangeType, Polarity, PolarizedObject};
use crate::morphism::MorphismTerm;
use crate::rewrite::{cells_equal, RewriteError, RewriteOptions, Verdict};
use crate::theory::{ObjectWord, Theory, TheoryError};

/// A request to carry the wire `over` through the exchange `along`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingRequest {
    pub over: ObjectWord,
    pub along: ExchangeType,
}

impl CrossingRequest {
    /// Checks that both sides of the request are words of the theory.
    pub fn check(&self, theory: &Theory) -> Result<(), TheoryError> {
        theory.check_word(&self.over)?;
        for atom in self.along.iter() {
            theory.check_word(&atom.object)?;
        }
        Ok(())
    }

    pub fn synthesize(&self) -> CellTerm {
        crossing(&self.over, &self.along)
    }
}

/// Builds the cell carrying the wire `over` through the exchange
/// `along`: boundary (left `along`, right `along`, top `over`, bottom
/// `over`). The empty exchange yields the vertical identity, and a
/// composite exchange stacks the crossings of its hand-offs.
pub fn crossing(over: &ObjectWord, along: &ExchangeType) -> CellTerm {
    let mut layers = along.iter().map(|atom| crossing_atom(over, atom));
    match layers.next() {
        None => CellTerm::vid(over.clone()),
        Some(first) => layers.fold(first, |acc, layer| {
            CellTerm::vcomp(acc, layer).expect("crossing layers share the carried wire")
        }),
    }
}

/// One hand-off around the carried wire. A left-bound hand-off enters on
/// the left, braids past the wire, and leaves on the right; a right-bound
/// one mirrors this.
fn crossing_atom(over: &ObjectWord, atom: &PolarizedObject) -> CellTerm {
    let a = atom.object.clone();
    let b = over.clone();
    match atom.polarity {
        Polarity::Circ => CellTerm::vcomp(
            CellTerm::hcomp(CellTerm::recv_left(a.clone()), CellTerm::vid(b.clone()))
                .expect("corner rows tile"),
            CellTerm::vcomp(
                CellTerm::lift(MorphismTerm::braid(a.clone(), b.clone())),
                CellTerm::hcomp(CellTerm::vid(b), CellTerm::send_right(a))
                    .expect("corner rows tile"),
            )
            .expect("braid row meets the send row"),
        )
        .expect("receive row meets the braid row"),
        Polarity::Bullet => CellTerm::vcomp(
            CellTerm::hcomp(CellTerm::vid(b.clone()), CellTerm::recv_right(a.clone()))
                .expect("corner rows tile"),
            CellTerm::vcomp(
                CellTerm::lift(MorphismTerm::braid(b.clone(), a.clone())),
                CellTerm::hcomp(CellTerm::send_left(a), CellTerm::vid(b))
                    .expect("corner rows tile"),
            )
            .expect("braid row meets the send row"),
        )
        .expect("receive row meets the braid row"),
    }
}

/// Verifies that `alpha` slides past a wire `carried` across it: crossing
/// first and then running `alpha` beside the wire equals running `alpha`
/// first and crossing afterwards, the two sides reconciled by braidings
/// of the carried wire with `alpha`'s top and bottom.
pub fn check_crossing_naturality(
    theory: &Theory,
    alpha: &CellTerm,
    carried: &ObjectWord,
    opts: &RewriteOptions,
) -> Result<Verdict, RewriteError> {
    let b = alpha.boundary().clone();
    let lhs = CellTerm::vcomp(
        CellTerm::hcomp(crossing(carried, &b.left), alpha.clone())
            .expect("crossing matches alpha's left boundary"),
        CellTerm::lift(MorphismTerm::braid(carried.clone(), b.bottom)),
    )
    .expect("braid row meets the crossed cell");
    let rhs = CellTerm::vcomp(
        CellTerm::lift(MorphismTerm::braid(carried.clone(), b.top)),
        CellTerm::hcomp(alpha.clone(), crossing(carried, &b.right))
            .expect("crossing matches alpha's right boundary"),
    )
    .expect("braid row meets the crossed cell");
    cells_equal(theory, &lhs, &rhs, opts)
}

/// Verifies that a purely vertical `alpha` and a purely horizontal `beta`
/// do not interact: running `beta` above `alpha` equals running it below,
/// with `alpha`'s material routed past `beta`'s right boundary by a
/// crossing.
pub fn check_noninteraction(
    theory: &Theory,
    alpha: &CellTerm,
    beta: &CellTerm,
    opts: &RewriteOptions,
) -> Result<Verdict, RewriteError> {
    let a = alpha.boundary().clone();
    if !alpha.is_vertical() {
        return Err(RewriteError::NotVertical {
            boundary: a.to_string(),
        });
    }
    let bb = beta.boundary().clone();
    if !bb.top.is_unit() || !bb.bottom.is_unit() {
        return Err(RewriteError::NotHorizontal {
            boundary: bb.to_string(),
        });
    }
    let lhs = CellTerm::vcomp(
        CellTerm::hcomp(beta.clone(), crossing(&a.top, &bb.right))
            .expect("crossing matches beta's right boundary"),
        alpha.clone(),
    )
    .expect("alpha follows its own top edge");
    let rhs = CellTerm::vcomp(
        alpha.clone(),
        CellTerm::hcomp(beta.clone(), crossing(&a.bottom, &bb.right))
            .expect("crossing matches beta's right boundary"),
    )
    .expect("alpha precedes its own bottom edge");
    cells_equal(theory, &lhs, &rhs, opts)
}

/// Places two cells side by side: the result has the pointwise tensored
/// boundary, with `b`'s left boundary routed under `a`'s bottom edge and
/// `a`'s right boundary routed over `b`'s top edge by crossings.
pub fn tensor_cells(a: &CellTerm, b: &CellTerm) -> CellTerm {
    let ba = a.boundary().clone();
    let bb = b.boundary().clone();
    let upper = CellTerm::hcomp(a.clone(), crossing(&bb.top, &ba.right))
        .expect("crossing matches a's right boundary");
    let lower = CellTerm::hcomp(crossing(&ba.bottom, &bb.left), b.clone())
        .expect("crossing matches b's left boundary");
    CellTerm::vcomp(upper, lower).expect("the crossed middles agree")
}
