//! Presented resource theories.
//!
//! A resource theory is a symmetric strict monoidal category given by a
//! presentation: object generators, arrow generators with declared
//! boundaries, and equations between morphism terms. Strictness is baked
//! into the representation: objects are words of generators, so
//! associativity and unit laws hold definitionally and no coherence data
//! exists anywhere.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morphism::{MorphismNode, MorphismTerm};

/// Names that the DSL claims for itself; declaring a generator with one of
/// these would make theory files unparseable.
pub const RESERVED_NAMES: &[&str] = &[
    "I",
    "id",
    "sigma",
    "lift",
    "vid",
    "hid",
    "send_right",
    "recv_left",
    "send_left",
    "recv_right",
    "theory",
    "objects",
    "arrows",
    "equations",
    "compact",
    "cell",
    "row",
];

/// A word of object generators under ⊗; the empty word is the unit `I`.
///
/// Concatenation is the monoid operation, so `A ⊗ (B ⊗ C)` and
/// `(A ⊗ B) ⊗ C` are the same value.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectWord(Vec<String>);

impl ObjectWord {
    /// The unit object `I`.
    pub fn unit() -> Self {
        ObjectWord(Vec::new())
    }

    /// The word consisting of a single generator.
    pub fn single(name: impl Into<String>) -> Self {
        ObjectWord(vec![name.into()])
    }

    pub fn new(factors: Vec<String>) -> Self {
        ObjectWord(factors)
    }

    /// Builds a word from anything yielding name-like items.
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ObjectWord(names.into_iter().map(Into::into).collect())
    }

    pub fn factors(&self) -> &[String] {
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

    /// Concatenation; the tensor of the strict monoidal structure.
    pub fn tensor(&self, other: &ObjectWord) -> ObjectWord {
        let mut factors = self.0.clone();
        factors.extend_from_slice(&other.0);
        ObjectWord(factors)
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.0.iter()
    }
}

impl fmt::Display for ObjectWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("I");
        }
        f.write_str(&self.0.join(" * "))
    }
}

impl fmt::Debug for ObjectWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<&str> for ObjectWord {
    fn from(name: &str) -> Self {
        ObjectWord::single(name)
    }
}

/// An arrow generator with its declared boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowDecl {
    pub name: String,
    pub dom: ObjectWord,
    pub cod: ObjectWord,
}

/// An equation imposed between two morphism terms with equal boundaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub name: Option<String>,
    pub lhs: MorphismTerm,
    pub rhs: MorphismTerm,
}

/// A presentation of a resource theory, prior to validation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TheoryPresentation {
    pub name: String,
    pub objects: Vec<String>,
    pub arrows: Vec<ArrowDecl>,
    #[serde(default)]
    pub equations: Vec<Equation>,
    /// Marks the theory as intending compact closure; duals and unit/counit
    /// arrows are adjoined by `compact::dualize_theory`, not here.
    #[serde(default)]
    pub compact_closed: bool,
}

impl TheoryPresentation {
    pub fn new(name: impl Into<String>) -> Self {
        TheoryPresentation {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn object(mut self, name: impl Into<String>) -> Self {
        self.objects.push(name.into());
        self
    }

    pub fn arrow(mut self, name: impl Into<String>, dom: ObjectWord, cod: ObjectWord) -> Self {
        self.arrows.push(ArrowDecl {
            name: name.into(),
            dom,
            cod,
        });
        self
    }

    pub fn equation(mut self, name: Option<String>, lhs: MorphismTerm, rhs: MorphismTerm) -> Self {
        self.equations.push(Equation { name, lhs, rhs });
        self
    }

    pub fn compact(mut self) -> Self {
        self.compact_closed = true;
        self
    }

    /// Looks up an arrow generator by name.
    pub fn arrow_decl(&self, name: &str) -> Option<&ArrowDecl> {
        self.arrows.iter().find(|a| a.name == name)
    }

    /// Checks all invariants and returns the validated theory.
    pub fn validate(self) -> Result<Theory, TheoryError> {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for name in self
            .objects
            .iter()
            .chain(self.arrows.iter().map(|a| &a.name))
        {
            if RESERVED_NAMES.contains(&name.as_str()) {
                return Err(TheoryError::ReservedName { name: name.clone() });
            }
            if name.is_empty() {
                return Err(TheoryError::ReservedName {
                    name: String::new(),
                });
            }
            if !seen.insert(name) {
                return Err(TheoryError::DuplicateName { name: name.clone() });
            }
        }
        for arrow in &self.arrows {
            for word in [&arrow.dom, &arrow.cod] {
                self.check_word(word, &format!("arrow {}", arrow.name))?;
            }
        }
        for (index, eq) in self.equations.iter().enumerate() {
            let context = match &eq.name {
                Some(name) => format!("equation {name}"),
                None => format!("equation #{index}"),
            };
            self.check_term(&eq.lhs, &context)?;
            self.check_term(&eq.rhs, &context)?;
            if eq.lhs.dom() != eq.rhs.dom() || eq.lhs.cod() != eq.rhs.cod() {
                return Err(TheoryError::BoundaryMismatch {
                    context,
                    lhs: format!("{} -> {}", eq.lhs.dom(), eq.lhs.cod()),
                    rhs: format!("{} -> {}", eq.rhs.dom(), eq.rhs.cod()),
                });
            }
        }
        Ok(Theory {
            presentation: self,
            dualized: false,
        })
    }

    fn check_word(&self, word: &ObjectWord, context: &str) -> Result<(), TheoryError> {
        for factor in word.iter() {
            if !self.objects.contains(factor) {
                return Err(TheoryError::UndeclaredObject {
                    name: factor.clone(),
                    context: context.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Recursively checks a term: every generator resolves with its cached
    /// boundary, every word is declared, every composite is well-typed.
    fn check_term(&self, term: &MorphismTerm, context: &str) -> Result<(), TheoryError> {
        match term.node() {
            MorphismNode::Identity(word) => self.check_word(word, context),
            MorphismNode::Generator(name) => match self.arrow_decl(name) {
                None => Err(TheoryError::UndeclaredArrow { name: name.clone() }),
                Some(decl) => {
                    if &decl.dom != term.dom() || &decl.cod != term.cod() {
                        return Err(TheoryError::BoundaryMismatch {
                            context: format!("{context}: generator {name}"),
                            lhs: format!("{} -> {}", term.dom(), term.cod()),
                            rhs: format!("{} -> {}", decl.dom, decl.cod),
                        });
                    }
                    Ok(())
                }
            },
            MorphismNode::Braid(a, b) => {
                self.check_word(a, context)?;
                self.check_word(b, context)
            }
            MorphismNode::Seq(f, g) => {
                self.check_term(f, context)?;
                self.check_term(g, context)?;
                if f.cod() != g.dom() {
                    return Err(TheoryError::IllTypedComposite {
                        cod: f.cod().to_string(),
                        dom: g.dom().to_string(),
                    });
                }
                Ok(())
            }
            MorphismNode::Tensor(f, g) => {
                self.check_term(f, context)?;
                self.check_term(g, context)
            }
        }
    }
}

/// Validates a presentation; alias for [`TheoryPresentation::validate`].
pub fn validate_theory(p: TheoryPresentation) -> Result<Theory, TheoryError> {
    p.validate()
}

/// A validated theory: a handle guaranteeing all presentation invariants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theory {
    presentation: TheoryPresentation,
    /// Set by `compact::dualize_theory`; guards against double dualization.
    #[serde(default)]
    dualized: bool,
}

impl Theory {
    pub fn name(&self) -> &str {
        &self.presentation.name
    }

    pub fn presentation(&self) -> &TheoryPresentation {
        &self.presentation
    }

    /// Object generators in declaration order, the total order used by
    /// exchange canonicalization.
    pub fn objects(&self) -> &[String] {
        &self.presentation.objects
    }

    pub fn arrows(&self) -> &[ArrowDecl] {
        &self.presentation.arrows
    }

    pub fn equations(&self) -> &[Equation] {
        &self.presentation.equations
    }

    pub fn compact_closed(&self) -> bool {
        self.presentation.compact_closed
    }

    pub fn is_dualized(&self) -> bool {
        self.dualized
    }

    pub(crate) fn mark_dualized(&mut self) {
        self.dualized = true;
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.presentation.objects.iter().any(|o| o == name)
    }

    /// Position of a generator in declaration order.
    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.presentation.objects.iter().position(|o| o == name)
    }

    pub fn arrow_decl(&self, name: &str) -> Option<&ArrowDecl> {
        self.presentation.arrow_decl(name)
    }

    /// Checks that every factor of a word is declared.
    pub fn check_word(&self, word: &ObjectWord) -> Result<(), TheoryError> {
        self.presentation.check_word(word, "word")
    }

    /// Checks a term built elsewhere against this theory.
    pub fn check_term(&self, term: &MorphismTerm) -> Result<(), TheoryError> {
        self.presentation.check_term(term, "term")
    }

    /// Convenience constructor for a generator morphism of this theory.
    pub fn generator(&self, name: &str) -> Result<MorphismTerm, TheoryError> {
        MorphismTerm::generator(&self.presentation, name)
    }
}

/// Validation and typing errors for theories and morphism terms.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("undeclared object `{name}` in {context}")]
    UndeclaredObject { name: String, context: String },
    #[error("undeclared arrow `{name}`")]
    UndeclaredArrow { name: String },
    #[error("duplicate name `{name}`")]
    DuplicateName { name: String },
    #[error("`{name}` is reserved and cannot be declared")]
    ReservedName { name: String },
    #[error("boundary mismatch in {context}: {lhs} vs {rhs}")]
    BoundaryMismatch {
        context: String,
        lhs: String,
        rhs: String,
    },
    #[error("ill-typed composite: codomain {cod} does not match domain {dom}")]
    IllTypedComposite { cod: String, dom: String },
}
