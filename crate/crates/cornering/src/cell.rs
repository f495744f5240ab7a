//! Cell terms of the free cornering of a resource theory.
//!
//! The free cornering is a single-object double category. Its vertical
//! edges are words of polarized objects (exchange types), its horizontal
//! edges are object words of the base theory, and its cells are generated
//! by four corner families, lifted base morphisms, and identities, closed
//! under horizontal and vertical composition. Every cell carries a cached
//! four-sided boundary; the composition constructors check compatibility
//! and fail rather than build ill-typed pastings.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morphism::MorphismTerm;
use crate::theory::ObjectWord;

/// Direction of an exchange: ∘ moves material left-to-right across a
/// boundary, • moves it right-to-left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Circ,
    Bullet,
}

impl Polarity {
    /// ASCII spelling used by the printer; the parser also accepts the
    /// Unicode marks ∘ and •.
    pub fn ascii(self) -> &'static str {
        match self {
            Polarity::Circ => "^o",
            Polarity::Bullet => "^*",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ascii())
    }
}

/// One factor of an exchange type: an object word with a direction mark.
/// The word is treated as a single atom; `(A ⊗ B)∘` is distinct from
/// `A∘ ⊗ B∘`, the two being merely isomorphic as horizontal objects.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PolarizedObject {
    pub object: ObjectWord,
    pub polarity: Polarity,
}

impl PolarizedObject {
    pub fn new(object: ObjectWord, polarity: Polarity) -> Self {
        PolarizedObject { object, polarity }
    }

    pub fn circ(object: ObjectWord) -> Self {
        PolarizedObject::new(object, Polarity::Circ)
    }

    pub fn bullet(object: ObjectWord) -> Self {
        PolarizedObject::new(object, Polarity::Bullet)
    }
}

impl fmt::Display for PolarizedObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.object.len() > 1 {
            write!(f, "({}){}", self.object, self.polarity)
        } else {
            write!(f, "{}{}", self.object, self.polarity)
        }
    }
}

/// A word of polarized objects: the protocol of sequenced hand-offs along
/// one vertical boundary. The empty word is the unit I.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExchangeType(Vec<PolarizedObject>);

impl ExchangeType {
    pub fn unit() -> Self {
        ExchangeType(Vec::new())
    }

    pub fn single(factor: PolarizedObject) -> Self {
        ExchangeType(vec![factor])
    }

    /// The one-atom type `w∘`.
    pub fn circ(word: ObjectWord) -> Self {
        ExchangeType::single(PolarizedObject::circ(word))
    }

    /// The one-atom type `w•`.
    pub fn bullet(word: ObjectWord) -> Self {
        ExchangeType::single(PolarizedObject::bullet(word))
    }

    pub fn new(factors: Vec<PolarizedObject>) -> Self {
        ExchangeType(factors)
    }

    pub fn factors(&self) -> &[PolarizedObject] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tensor(&self, other: &ExchangeType) -> ExchangeType {
        let mut factors = self.0.clone();
        factors.extend_from_slice(&other.0);
        ExchangeType(factors)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PolarizedObject> {
        self.0.iter()
    }

    /// Index of the first position where the two types disagree, if any.
    fn first_difference(&self, other: &ExchangeType) -> Option<usize> {
        if self == other {
            return None;
        }
        let i = self
            .0
            .iter()
            .zip(other.0.iter())
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| self.0.len().min(other.0.len()));
        Some(i)
    }
}

impl fmt::Display for ExchangeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("I");
        }
        for (i, factor) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

impl FromIterator<PolarizedObject> for ExchangeType {
    fn from_iter<I: IntoIterator<Item = PolarizedObject>>(iter: I) -> Self {
        ExchangeType(iter.into_iter().collect())
    }
}

/// The four-sided boundary of a cell: vertical edges left/right are
/// exchange types, horizontal edges top/bottom are object words.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellBoundary {
    pub left: ExchangeType,
    pub right: ExchangeType,
    pub top: ObjectWord,
    pub bottom: ObjectWord,
}

impl CellBoundary {
    pub fn new(
        left: ExchangeType,
        right: ExchangeType,
        top: ObjectWord,
        bottom: ObjectWord,
    ) -> Self {
        CellBoundary {
            left,
            right,
            top,
            bottom,
        }
    }
}

impl fmt::Display for CellBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(left: {}, right: {}, top: {}, bottom: {})",
            self.left, self.right, self.top, self.bottom
        )
    }
}

/// The syntactic shape of a cell term. Corners carry an arbitrary object
/// word; the edge they bend is the single atom on that word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CellNode {
    /// Bends the top wire `w` into the right edge atom `w∘`.
    SendRight(ObjectWord),
    /// Bends the left edge atom `w∘` into the bottom wire `w`.
    RecvLeft(ObjectWord),
    /// Bends the top wire `w` into the left edge atom `w•`.
    SendLeft(ObjectWord),
    /// Bends the right edge atom `w•` into the bottom wire `w`.
    RecvRight(ObjectWord),
    /// A base morphism as a vertical cell.
    Lift(MorphismTerm),
    /// Vertical identity on an object word; `VId(I)` is the empty cell,
    /// which is also the horizontal identity on the unit exchange type.
    VId(ObjectWord),
    /// Horizontal identity on a nonempty exchange type.
    HId(ExchangeType),
    /// `a | b`: side-by-side pasting along a shared vertical edge.
    HComp(Box<CellTerm>, Box<CellTerm>),
    /// `a / b`: top-to-bottom pasting along a shared horizontal edge.
    VComp(Box<CellTerm>, Box<CellTerm>),
}

/// A cell term with its cached boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellTerm {
    node: CellNode,
    boundary: CellBoundary,
}

impl CellTerm {
    /// The empty cell: simultaneously `VId(I)` and `HId(I)`.
    pub fn empty() -> Self {
        CellTerm {
            node: CellNode::VId(ObjectWord::unit()),
            boundary: CellBoundary::default(),
        }
    }

    pub fn send_right(word: ObjectWord) -> Self {
        CellTerm {
            boundary: CellBoundary::new(
                ExchangeType::unit(),
                ExchangeType::circ(word.clone()),
                word.clone(),
                ObjectWord::unit(),
            ),
            node: CellNode::SendRight(word),
        }
    }

    pub fn recv_left(word: ObjectWord) -> Self {
        CellTerm {
            boundary: CellBoundary::new(
                ExchangeType::circ(word.clone()),
                ExchangeType::unit(),
                ObjectWord::unit(),
                word.clone(),
            ),
            node: CellNode::RecvLeft(word),
        }
    }

    pub fn send_left(word: ObjectWord) -> Self {
        CellTerm {
            boundary: CellBoundary::new(
                ExchangeType::bullet(word.clone()),
                ExchangeType::unit(),
                word.clone(),
                ObjectWord::unit(),
            ),
            node: CellNode::SendLeft(word),
        }
    }

    pub fn recv_right(word: ObjectWord) -> Self {
        CellTerm {
            boundary: CellBoundary::new(
                ExchangeType::unit(),
                ExchangeType::bullet(word.clone()),
                ObjectWord::unit(),
                word.clone(),
            ),
            node: CellNode::RecvRight(word),
        }
    }

    pub fn lift(morphism: MorphismTerm) -> Self {
        CellTerm {
            boundary: CellBoundary::new(
                ExchangeType::unit(),
                ExchangeType::unit(),
                morphism.dom().clone(),
                morphism.cod().clone(),
            ),
            node: CellNode::Lift(morphism),
        }
    }

    pub fn vid(word: ObjectWord) -> Self {
        if word.is_unit() {
            return CellTerm::empty();
        }
        CellTerm {
            boundary: CellBoundary::new(
                ExchangeType::unit(),
                ExchangeType::unit(),
                word.clone(),
                word.clone(),
            ),
            node: CellNode::VId(word),
        }
    }

    pub fn hid(exchange: ExchangeType) -> Self {
        if exchange.is_unit() {
            return CellTerm::empty();
        }
        CellTerm {
            boundary: CellBoundary::new(
                exchange.clone(),
                exchange.clone(),
                ObjectWord::unit(),
                ObjectWord::unit(),
            ),
            node: CellNode::HId(exchange),
        }
    }

    /// `a | b`. Requires `right(a) = left(b)` syntactically; composing with
    /// the empty cell is absorbed.
    pub fn hcomp(a: CellTerm, b: CellTerm) -> Result<CellTerm, CellError> {
        if a.is_empty_cell() {
            return Ok(b);
        }
        if b.is_empty_cell() {
            return Ok(a);
        }
        if a.boundary.right != b.boundary.left {
            let at = a
                .boundary
                .right
                .first_difference(&b.boundary.left)
                .unwrap_or(0);
            return Err(CellError::HCompMismatch {
                left: a.boundary.right.to_string(),
                right: b.boundary.left.to_string(),
                factor: at,
            });
        }
        Ok(CellTerm {
            boundary: CellBoundary::new(
                a.boundary.left.clone(),
                b.boundary.right.clone(),
                a.boundary.top.tensor(&b.boundary.top),
                a.boundary.bottom.tensor(&b.boundary.bottom),
            ),
            node: CellNode::HComp(Box::new(a), Box::new(b)),
        })
    }

    /// `a / b`. Requires `bottom(a) = top(b)`; composing with the empty
    /// cell is absorbed.
    pub fn vcomp(a: CellTerm, b: CellTerm) -> Result<CellTerm, CellError> {
        if a.is_empty_cell() {
            return Ok(b);
        }
        if b.is_empty_cell() {
            return Ok(a);
        }
        if a.boundary.bottom != b.boundary.top {
            let at = a
                .boundary
                .bottom
                .factors()
                .iter()
                .zip(b.boundary.top.factors())
                .position(|(x, y)| x != y)
                .unwrap_or_else(|| a.boundary.bottom.len().min(b.boundary.top.len()));
            return Err(CellError::VCompMismatch {
                bottom: a.boundary.bottom.to_string(),
                top: b.boundary.top.to_string(),
                factor: at,
            });
        }
        Ok(CellTerm {
            boundary: CellBoundary::new(
                a.boundary.left.tensor(&b.boundary.left),
                a.boundary.right.tensor(&b.boundary.right),
                a.boundary.top.clone(),
                b.boundary.bottom.clone(),
            ),
            node: CellNode::VComp(Box::new(a), Box::new(b)),
        })
    }

    /// Folds a nonempty sequence of rows with `vcomp`.
    pub fn stack<I>(rows: I) -> Result<CellTerm, CellError>
    where
        I: IntoIterator<Item = CellTerm>,
    {
        let mut iter = rows.into_iter();
        let first = iter.next().unwrap_or_else(CellTerm::empty);
        iter.try_fold(first, CellTerm::vcomp)
    }

    /// Folds a nonempty sequence of columns with `hcomp`.
    pub fn beside<I>(cols: I) -> Result<CellTerm, CellError>
    where
        I: IntoIterator<Item = CellTerm>,
    {
        let mut iter = cols.into_iter();
        let first = iter.next().unwrap_or_else(CellTerm::empty);
        iter.try_fold(first, CellTerm::hcomp)
    }

    pub fn node(&self) -> &CellNode {
        &self.node
    }

    pub fn boundary(&self) -> &CellBoundary {
        &self.boundary
    }

    pub fn left(&self) -> &ExchangeType {
        &self.boundary.left
    }

    pub fn right(&self) -> &ExchangeType {
        &self.boundary.right
    }

    pub fn top(&self) -> &ObjectWord {
        &self.boundary.top
    }

    pub fn bottom(&self) -> &ObjectWord {
        &self.boundary.bottom
    }

    /// True exactly for the empty cell □.
    pub fn is_empty_cell(&self) -> bool {
        matches!(&self.node, CellNode::VId(w) if w.is_unit())
    }

    /// Trivial left and right edges: the cell is a base-morphism shape.
    pub fn is_vertical(&self) -> bool {
        self.boundary.left.is_unit() && self.boundary.right.is_unit()
    }

    /// Trivial top and bottom edges: the cell is a pure exchange.
    pub fn is_horizontal(&self) -> bool {
        self.boundary.top.is_unit() && self.boundary.bottom.is_unit()
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let own = match self.node {
            CellNode::HComp(..) => 1,
            CellNode::VComp(..) => 2,
            _ => 3,
        };
        if own < prec {
            f.write_str("(")?;
        }
        match &self.node {
            CellNode::SendRight(w) => write!(f, "send_right({w})")?,
            CellNode::RecvLeft(w) => write!(f, "recv_left({w})")?,
            CellNode::SendLeft(w) => write!(f, "send_left({w})")?,
            CellNode::RecvRight(w) => write!(f, "recv_right({w})")?,
            CellNode::Lift(m) => write!(f, "lift({m})")?,
            CellNode::VId(w) => write!(f, "vid({w})")?,
            CellNode::HId(x) => write!(f, "hid({x})")?,
            CellNode::HComp(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, 1)?;
            }
            CellNode::VComp(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" / ")?;
                b.fmt_prec(f, 2)?;
            }
        }
        if own < prec {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for CellTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// The boundary of a cell term.
pub fn boundary_of(c: &CellTerm) -> &CellBoundary {
    c.boundary()
}

/// Composition typing errors for cell terms.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CellError {
    #[error(
        "horizontal composite mismatch at factor {factor}: right edge {left} vs left edge {right}"
    )]
    HCompMismatch {
        left: String,
        right: String,
        factor: usize,
    },
    #[error(
        "vertical composite mismatch at factor {factor}: bottom edge {bottom} vs top edge {top}"
    )]
    VCompMismatch {
        bottom: String,
        top: String,
        factor: usize,
    },
}
