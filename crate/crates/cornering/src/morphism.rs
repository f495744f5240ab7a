//! Morphism terms of a presented resource theory.
//!
//! Terms are freely generated from identities, arrow generators, braidings,
//! sequential composition, and tensor. Every term caches its boundary, so
//! typing is available without re-walking the tree. Equality of terms as
//! values is syntactic; semantic equality modulo the symmetric monoidal
//! axioms and the theory's equations lives in `rewrite::morphisms_equal`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::theory::{ObjectWord, TheoryError, TheoryPresentation};

/// The syntactic shape of a morphism term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MorphismNode {
    /// `id_w : w -> w`.
    Identity(ObjectWord),
    /// A declared arrow generator, boundary cached on the enclosing term.
    Generator(String),
    /// `sigma_{a,b} : a ⊗ b -> b ⊗ a`.
    Braid(ObjectWord, ObjectWord),
    /// `f ; g`, requiring `cod f = dom g`.
    Seq(Box<MorphismTerm>, Box<MorphismTerm>),
    /// `f ⊗ g`.
    Tensor(Box<MorphismTerm>, Box<MorphismTerm>),
}

/// A morphism term with cached domain and codomain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphismTerm {
    node: MorphismNode,
    dom: ObjectWord,
    cod: ObjectWord,
}

impl MorphismTerm {
    /// `id_w`.
    pub fn identity(word: ObjectWord) -> Self {
        MorphismTerm {
            dom: word.clone(),
            cod: word.clone(),
            node: MorphismNode::Identity(word),
        }
    }

    /// The braiding `sigma_{a,b} : a ⊗ b -> b ⊗ a`.
    pub fn braid(a: ObjectWord, b: ObjectWord) -> Self {
        MorphismTerm {
            dom: a.tensor(&b),
            cod: b.tensor(&a),
            node: MorphismNode::Braid(a, b),
        }
    }

    /// A declared generator. Takes the presentation rather than a validated
    /// theory so that equations can be written before validation.
    pub fn generator(p: &TheoryPresentation, name: &str) -> Result<Self, TheoryError> {
        let decl = p
            .arrow_decl(name)
            .ok_or_else(|| TheoryError::UndeclaredArrow {
                name: name.to_string(),
            })?;
        Ok(MorphismTerm {
            node: MorphismNode::Generator(decl.name.clone()),
            dom: decl.dom.clone(),
            cod: decl.cod.clone(),
        })
    }

    /// `f ; g`, checked.
    pub fn seq(f: MorphismTerm, g: MorphismTerm) -> Result<Self, TheoryError> {
        if f.cod != g.dom {
            return Err(TheoryError::IllTypedComposite {
                cod: f.cod.to_string(),
                dom: g.dom.to_string(),
            });
        }
        Ok(MorphismTerm {
            dom: f.dom.clone(),
            cod: g.cod.clone(),
            node: MorphismNode::Seq(Box::new(f), Box::new(g)),
        })
    }

    /// `f ⊗ g`; always well-typed.
    pub fn tensor(f: MorphismTerm, g: MorphismTerm) -> Self {
        MorphismTerm {
            dom: f.dom.tensor(&g.dom),
            cod: f.cod.tensor(&g.cod),
            node: MorphismNode::Tensor(Box::new(f), Box::new(g)),
        }
    }

    pub fn node(&self) -> &MorphismNode {
        &self.node
    }

    pub fn dom(&self) -> &ObjectWord {
        &self.dom
    }

    pub fn cod(&self) -> &ObjectWord {
        &self.cod
    }

    /// True when the term is an identity node; identities on different
    /// words are still distinct terms.
    pub fn is_identity_node(&self) -> bool {
        matches!(self.node, MorphismNode::Identity(_))
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let own = match self.node {
            MorphismNode::Seq(..) => 1,
            MorphismNode::Tensor(..) => 2,
            _ => 3,
        };
        if own < prec {
            f.write_str("(")?;
        }
        match &self.node {
            MorphismNode::Identity(w) => write!(f, "id({w})")?,
            MorphismNode::Generator(name) => f.write_str(name)?,
            MorphismNode::Braid(a, b) => write!(f, "sigma({a}, {b})")?,
            MorphismNode::Seq(l, r) => {
                l.fmt_prec(f, 1)?;
                f.write_str(" ; ")?;
                r.fmt_prec(f, 1)?;
            }
            MorphismNode::Tensor(l, r) => {
                l.fmt_prec(f, 2)?;
                f.write_str(" * ")?;
                r.fmt_prec(f, 2)?;
            }
        }
        if own < prec {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// The boundary `(dom, cod)` of a term.
pub fn boundary(term: &MorphismTerm) -> (&ObjectWord, &ObjectWord) {
    (term.dom(), term.cod())
}

impl fmt::Display for MorphismTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
