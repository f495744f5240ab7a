//! Brute-force wire tracer over row normal forms.
//!
//! The rows of a vertical cell's normal form are read literally as token
//! flow: identity wires pass tokens through, lifted morphisms trace as in
//! [`super::oracle`], and an adjacent send/receive pair hands its tokens
//! across the shared edge unchanged, whichever direction the exchange
//! travels. Anything else left in a row means the cell was not vertical.
//!
//! The tracer consults only the printed row structure, never the
//! library's rewriting or extraction paths, so it can stand as an
//! independent witness against a morphism extractor.

use cornering::{CellNode, CellTerm, RowNormalForm};

use super::oracle::{trace_into, BoxNode, Source, TokenGraph};

/// Reads a vertical row normal form as a token-flow graph.
///
/// Errors describe the first untraceable feature found: a non-vertical
/// boundary, an unpaired corner, or a relay wire.
pub fn trace_rows(nf: &RowNormalForm) -> Result<TokenGraph, String> {
    let boundary = nf.boundary();
    if !boundary.left.is_unit() || !boundary.right.is_unit() {
        return Err(format!("boundary {boundary} is not vertical"));
    }
    let mut state: Vec<Source> = (0..boundary.top.len()).map(Source::Dom).collect();
    let mut boxes = Vec::new();
    for row in nf.rows() {
        state = trace_row(row, &mut boxes, state)?;
    }
    if state.len() != boundary.bottom.len() {
        return Err(format!(
            "tracing ended with {} tokens for the bottom word {}",
            state.len(),
            boundary.bottom
        ));
    }
    Ok(TokenGraph {
        n_inputs: boundary.top.len(),
        boxes,
        outputs: state,
    })
}

fn hspine(t: &CellTerm) -> Vec<&CellTerm> {
    match t.node() {
        CellNode::HComp(a, b) => {
            let mut v = hspine(a);
            v.extend(hspine(b));
            v
        }
        _ => vec![t],
    }
}

fn trace_row(
    row: &CellTerm,
    boxes: &mut Vec<BoxNode>,
    state: Vec<Source>,
) -> Result<Vec<Source>, String> {
    let slices = hspine(row);
    let mut out = Vec::new();
    let mut cursor = 0usize;
    let mut i = 0usize;
    while i < slices.len() {
        match slices[i].node() {
            CellNode::VId(w) => {
                let k = w.len();
                out.extend_from_slice(&state[cursor..cursor + k]);
                cursor += k;
                i += 1;
            }
            CellNode::Lift(m) => {
                let k = m.dom().len();
                let fed = state[cursor..cursor + k].to_vec();
                out.extend(trace_into(m, boxes, fed));
                cursor += k;
                i += 1;
            }
            // A pair is two adjacent corners bridging one shared edge; the
            // tokens reappear at the same columns on the far side.
            CellNode::SendRight(w) => {
                match slices.get(i + 1).map(|s| s.node()) {
                    Some(CellNode::RecvLeft(u)) if u == w => {}
                    _ => return Err(format!("unpaired send_right({w}) in row {row}")),
                }
                let k = w.len();
                out.extend_from_slice(&state[cursor..cursor + k]);
                cursor += k;
                i += 2;
            }
            CellNode::RecvRight(w) => {
                match slices.get(i + 1).map(|s| s.node()) {
                    Some(CellNode::SendLeft(u)) if u == w => {}
                    _ => return Err(format!("unpaired recv_right({w}) in row {row}")),
                }
                let k = w.len();
                out.extend_from_slice(&state[cursor..cursor + k]);
                cursor += k;
                i += 2;
            }
            CellNode::RecvLeft(w) => {
                return Err(format!("unpaired recv_left({w}) in row {row}"));
            }
            CellNode::SendLeft(w) => {
                return Err(format!("unpaired send_left({w}) in row {row}"));
            }
            CellNode::HId(x) => {
                return Err(format!("relay wire {x} in row {row}"));
            }
            CellNode::HComp(..) | CellNode::VComp(..) => {
                unreachable!("the spine flattener leaves no composites")
            }
        }
    }
    if cursor != state.len() {
        return Err(format!(
            "row {row} consumed {cursor} of {} tokens",
            state.len()
        ));
    }
    Ok(out)
}
