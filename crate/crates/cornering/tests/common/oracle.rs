//! Brute-force wire-tracing oracle for morphism terms.
//!
//! A morphism term is interpreted as a token-flow graph: each generator
//! occurrence is a box, each wire connects one produced token to one
//! consumed token, and identities and braidings are pure routing. Two
//! terms denote the same morphism of the free symmetric strict monoidal
//! category exactly when their graphs are isomorphic under a
//! label-preserving box bijection that fixes the interface ports.
//!
//! The tracer walks terms directly and uses none of the library's
//! normalization or equality machinery, so it can stand as an independent
//! witness against those implementations.

use cornering::{MorphismNode, MorphismTerm};

/// Where a token comes from: an interface input or a box output port.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Dom(usize),
    BoxOut { box_id: usize, port: usize },
}

/// One generator occurrence with the sources feeding its input ports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxNode {
    pub label: String,
    pub inputs: Vec<Source>,
    pub n_outputs: usize,
}

/// The traced graph: boxes in discovery order plus the sources feeding
/// the codomain ports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenGraph {
    pub n_inputs: usize,
    pub boxes: Vec<BoxNode>,
    pub outputs: Vec<Source>,
}

/// Interprets a term, threading tokens from domain to codomain.
pub fn trace_morphism(term: &MorphismTerm) -> TokenGraph {
    let inputs: Vec<Source> = (0..term.dom().len()).map(Source::Dom).collect();
    let mut boxes = Vec::new();
    let outputs = trace_into(term, &mut boxes, inputs);
    TokenGraph {
        n_inputs: term.dom().len(),
        boxes,
        outputs,
    }
}

/// Traces a term into an existing box list, threading the given input
/// tokens and returning the tokens at the codomain.
pub fn trace_into(
    term: &MorphismTerm,
    boxes: &mut Vec<BoxNode>,
    inputs: Vec<Source>,
) -> Vec<Source> {
    assert_eq!(
        inputs.len(),
        term.dom().len(),
        "token count must match the domain arity"
    );
    match term.node() {
        MorphismNode::Identity(_) => inputs,
        MorphismNode::Generator(name) => {
            let box_id = boxes.len();
            let n_outputs = term.cod().len();
            boxes.push(BoxNode {
                label: name.clone(),
                inputs,
                n_outputs,
            });
            (0..n_outputs)
                .map(|port| Source::BoxOut { box_id, port })
                .collect()
        }
        MorphismNode::Braid(a, _) => {
            let (first, second) = inputs.split_at(a.len());
            let mut swapped = second.to_vec();
            swapped.extend_from_slice(first);
            swapped
        }
        MorphismNode::Seq(f, g) => {
            let mid = trace_into(f, boxes, inputs);
            trace_into(g, boxes, mid)
        }
        MorphismNode::Tensor(f, g) => {
            let (first, second) = inputs.split_at(f.dom().len());
            let mut out = trace_into(f, boxes, first.to_vec());
            out.extend(trace_into(g, boxes, second.to_vec()));
            out
        }
    }
}

/// Label- and wiring-preserving graph isomorphism with fixed interface.
pub fn graphs_isomorphic(g1: &TokenGraph, g2: &TokenGraph) -> bool {
    if g1.n_inputs != g2.n_inputs
        || g1.outputs.len() != g2.outputs.len()
        || g1.boxes.len() != g2.boxes.len()
    {
        return false;
    }
    let mut labels1: Vec<&str> = g1.boxes.iter().map(|b| b.label.as_str()).collect();
    let mut labels2: Vec<&str> = g2.boxes.iter().map(|b| b.label.as_str()).collect();
    labels1.sort_unstable();
    labels2.sort_unstable();
    if labels1 != labels2 {
        return false;
    }
    let mut mapping = vec![usize::MAX; g1.boxes.len()];
    let mut used = vec![false; g2.boxes.len()];
    extend_mapping(g1, g2, 0, &mut mapping, &mut used)
}

/// Depth-first search over box bijections; wiring is checked as far as the
/// partial map allows at each step and in full at the leaves.
fn extend_mapping(
    g1: &TokenGraph,
    g2: &TokenGraph,
    next: usize,
    mapping: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    if next == g1.boxes.len() {
        return wiring_agrees(g1, g2, mapping);
    }
    for candidate in 0..g2.boxes.len() {
        if used[candidate] || !compatible(g1, g2, next, candidate, mapping) {
            continue;
        }
        mapping[next] = candidate;
        used[candidate] = true;
        if extend_mapping(g1, g2, next + 1, mapping, used) {
            return true;
        }
        mapping[next] = usize::MAX;
        used[candidate] = false;
    }
    false
}

fn compatible(g1: &TokenGraph, g2: &TokenGraph, i: usize, j: usize, mapping: &[usize]) -> bool {
    let b1 = &g1.boxes[i];
    let b2 = &g2.boxes[j];
    if b1.label != b2.label || b1.inputs.len() != b2.inputs.len() || b1.n_outputs != b2.n_outputs {
        return false;
    }
    b1.inputs
        .iter()
        .zip(&b2.inputs)
        .all(|(s1, s2)| sources_may_correspond(*s1, *s2, mapping))
}

fn sources_may_correspond(s1: Source, s2: Source, mapping: &[usize]) -> bool {
    match (s1, s2) {
        (Source::Dom(a), Source::Dom(b)) => a == b,
        (
            Source::BoxOut {
                box_id: b1,
                port: p1,
            },
            Source::BoxOut {
                box_id: b2,
                port: p2,
            },
        ) => p1 == p2 && (mapping[b1] == usize::MAX || mapping[b1] == b2),
        _ => false,
    }
}

fn wiring_agrees(g1: &TokenGraph, g2: &TokenGraph, mapping: &[usize]) -> bool {
    let map_source = |s: Source| match s {
        Source::Dom(i) => Source::Dom(i),
        Source::BoxOut { box_id, port } => Source::BoxOut {
            box_id: mapping[box_id],
            port,
        },
    };
    for (i, b1) in g1.boxes.iter().enumerate() {
        let b2 = &g2.boxes[mapping[i]];
        if !b1
            .inputs
            .iter()
            .zip(&b2.inputs)
            .all(|(s1, s2)| map_source(*s1) == *s2)
        {
            return false;
        }
    }
    g1.outputs
        .iter()
        .zip(&g2.outputs)
        .all(|(s1, s2)| map_source(*s1) == *s2)
}

/// Oracle verdict for term equality in the free symmetric monoidal
/// category over the signature: equal boundaries plus isomorphic graphs.
pub fn morphisms_trace_equal(a: &MorphismTerm, b: &MorphismTerm) -> bool {
    a.dom() == b.dom()
        && a.cod() == b.cod()
        && graphs_isomorphic(&trace_morphism(a), &trace_morphism(b))
}
