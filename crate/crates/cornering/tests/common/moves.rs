//! A term-level equational oracle for cells, independent of the library's
//! graph engine.
//!
//! Equality of cells is generated by a finite move set applied in context:
//! interchange of the two compositions, functoriality of lifting, identity
//! lifts, and the four yanking equations. Associativity and unit laws are
//! folded into a canonical string so they need no moves. The oracle decides
//! equality by bidirectional breadth-first search over canonical strings.
//! It is sound but deliberately incomplete (no axioms are applied inside
//! lifted morphism payloads), so tests assert agreement only in the sound
//! directions.

use std::collections::BTreeSet;

use cornering::{
    CellNode, CellTerm, ExchangeType, MorphismNode, MorphismTerm, ObjectWord, Polarity,
};
use rand::Rng;

// -------------------------------------------------------------------
// Canonical strings modulo associativity, units, and spine flattening
// -------------------------------------------------------------------

fn vspine(t: &CellTerm) -> Vec<CellTerm> {
    match t.node() {
        CellNode::VComp(a, b) => {
            let mut v = vspine(a);
            v.extend(vspine(b));
            v
        }
        _ => vec![t.clone()],
    }
}

fn hspine(t: &CellTerm) -> Vec<CellTerm> {
    match t.node() {
        CellNode::HComp(a, b) => {
            let mut v = hspine(a);
            v.extend(hspine(b));
            v
        }
        _ => vec![t.clone()],
    }
}

fn seq_spine(m: &MorphismTerm) -> Vec<MorphismTerm> {
    match m.node() {
        MorphismNode::Seq(a, b) => {
            let mut v = seq_spine(a);
            v.extend(seq_spine(b));
            v
        }
        _ => vec![m.clone()],
    }
}

fn tensor_spine(m: &MorphismTerm) -> Vec<MorphismTerm> {
    match m.node() {
        MorphismNode::Tensor(a, b) => {
            let mut v = tensor_spine(a);
            v.extend(tensor_spine(b));
            v
        }
        _ => vec![m.clone()],
    }
}

fn canon_m(m: &MorphismTerm) -> String {
    let mut steps = Vec::new();
    for s in seq_spine(m) {
        let c = canon_m_factor(&s);
        if c != format!("id[{}]", s.dom()) {
            steps.push(c);
        }
    }
    if steps.is_empty() {
        return format!("id[{}]", m.dom());
    }
    steps.join(" ; ")
}

fn canon_m_factor(m: &MorphismTerm) -> String {
    match m.node() {
        MorphismNode::Tensor(..) => {
            let mut toks: Vec<String> = Vec::new();
            let mut pending: Option<ObjectWord> = None;
            for p in tensor_spine(m) {
                match p.node() {
                    MorphismNode::Identity(w) => {
                        pending = Some(match pending.take() {
                            None => w.clone(),
                            Some(u) => u.tensor(w),
                        });
                    }
                    _ => {
                        if let Some(u) = pending.take() {
                            if !u.is_unit() {
                                toks.push(format!("id[{u}]"));
                            }
                        }
                        toks.push(canon_m_atom(&p));
                    }
                }
            }
            if let Some(u) = pending.take() {
                if !u.is_unit() {
                    toks.push(format!("id[{u}]"));
                }
            }
            if toks.is_empty() {
                format!("id[{}]", m.dom())
            } else {
                toks.join(" , ")
            }
        }
        _ => canon_m_atom(m),
    }
}

fn canon_m_atom(m: &MorphismTerm) -> String {
    match m.node() {
        MorphismNode::Identity(w) => format!("id[{w}]"),
        MorphismNode::Generator(n) => n.clone(),
        MorphismNode::Braid(a, b) => format!("sigma[{a}|{b}]"),
        MorphismNode::Seq(..) => format!("({})", canon_m(m)),
        MorphismNode::Tensor(..) => canon_m_factor(m),
    }
}

fn lift_is_identity(m: &MorphismTerm) -> bool {
    canon_m(m) == format!("id[{}]", m.dom())
}

fn is_vid_token(s: &str) -> bool {
    s.starts_with("vid(")
}

/// Elements of a vertical spine: identity rows dropped, horizontal
/// identities split per atom, horizontal composites recursed.
fn canon_v_parts(t: &CellTerm, out: &mut Vec<String>) {
    for e in vspine(t) {
        match e.node() {
            CellNode::VId(_) => {}
            CellNode::HId(x) => {
                for a in x.iter() {
                    out.push(format!("hid({a})"));
                }
            }
            CellNode::Lift(m) if lift_is_identity(m) => {}
            CellNode::HComp(..) => {
                let parts = canon_h_parts(&e);
                if parts.is_empty() {
                    for a in e.left().iter() {
                        out.push(format!("hid({a})"));
                    }
                } else if parts.iter().all(|p| is_vid_token(p)) {
                    // a row of identity wires
                } else if parts.len() == 1 {
                    out.push(parts.into_iter().next().unwrap());
                } else {
                    out.push(format!("({})", parts.join(" | ")));
                }
            }
            _ => out.push(canon_leaf(&e)),
        }
    }
}

/// Elements of a horizontal spine: horizontal identities dropped,
/// identity squares split per wire, vertical composites recursed.
fn canon_h_parts(t: &CellTerm) -> Vec<String> {
    let mut parts = Vec::new();
    for h in hspine(t) {
        match h.node() {
            CellNode::HId(_) => {}
            CellNode::VId(w) => {
                for f in w.factors() {
                    parts.push(format!("vid({f})"));
                }
            }
            CellNode::Lift(m) if lift_is_identity(m) => {
                for f in m.dom().factors() {
                    parts.push(format!("vid({f})"));
                }
            }
            CellNode::VComp(..) => {
                let mut elems = Vec::new();
                canon_v_parts(&h, &mut elems);
                if elems.is_empty() {
                    for f in h.top().factors() {
                        parts.push(format!("vid({f})"));
                    }
                } else if elems.len() == 1 {
                    parts.push(elems.into_iter().next().unwrap());
                } else {
                    parts.push(format!("[{}]", elems.join(" / ")));
                }
            }
            _ => parts.push(canon_leaf(&h)),
        }
    }
    parts
}

fn canon_leaf(t: &CellTerm) -> String {
    match t.node() {
        CellNode::SendRight(w) => format!("sr({w})"),
        CellNode::RecvLeft(w) => format!("rl({w})"),
        CellNode::SendLeft(w) => format!("sl({w})"),
        CellNode::RecvRight(w) => format!("rr({w})"),
        CellNode::Lift(m) => format!("lift({})", canon_m(m)),
        other => panic!("canon_leaf on non-leaf node {other:?}"),
    }
}

/// Canonical string of a cell modulo associativity, the identity cell
/// laws, and flattening of lifted composition spines.
pub fn canon_cell(t: &CellTerm) -> String {
    let mut elems = Vec::new();
    canon_v_parts(t, &mut elems);
    if elems.is_empty() {
        for f in t.top().factors() {
            elems.push(format!("vid({f})"));
        }
    }
    format!("{} |- [{}]", t.boundary(), elems.join(" / "))
}

// -------------------------------------------------------------------
// One-step moves
// -------------------------------------------------------------------

fn rebuild_stack(elems: Vec<CellTerm>) -> Option<CellTerm> {
    CellTerm::stack(elems).ok()
}

fn rebuild_beside(elems: Vec<CellTerm>) -> Option<CellTerm> {
    CellTerm::beside(elems).ok()
}

/// Moves replacing an adjacent pair in a vertical spine.
fn vpair_moves(a: &CellTerm, b: &CellTerm) -> Vec<CellTerm> {
    let mut out = Vec::new();
    match (a.node(), b.node()) {
        (CellNode::Lift(f), CellNode::Lift(g)) => {
            if let Ok(m) = MorphismTerm::seq(f.clone(), g.clone()) {
                out.push(CellTerm::lift(m));
            }
        }
        (CellNode::RecvLeft(w), CellNode::SendRight(u)) if w == u => {
            out.push(CellTerm::hid(ExchangeType::circ(w.clone())));
        }
        (CellNode::RecvRight(w), CellNode::SendLeft(u)) if w == u => {
            out.push(CellTerm::hid(ExchangeType::bullet(w.clone())));
        }
        _ => {}
    }
    let ha = hspine(a);
    let hb = hspine(b);
    if ha.len() > 1 || hb.len() > 1 {
        for k in 1..ha.len().max(1) {
            for l in 1..hb.len().max(1) {
                let (Some(al), Some(ar), Some(bl), Some(br)) = (
                    rebuild_beside(ha[..k].to_vec()),
                    rebuild_beside(ha[k..].to_vec()),
                    rebuild_beside(hb[..l].to_vec()),
                    rebuild_beside(hb[l..].to_vec()),
                ) else {
                    continue;
                };
                if al.bottom() != bl.top() || ar.bottom() != br.top() {
                    continue;
                }
                let (Ok(x), Ok(y)) = (CellTerm::vcomp(al, bl), CellTerm::vcomp(ar, br)) else {
                    continue;
                };
                if let Ok(u) = CellTerm::hcomp(x, y) {
                    out.push(u);
                }
            }
        }
    }
    out
}

/// Moves replacing an adjacent pair in a horizontal spine.
fn hpair_moves(a: &CellTerm, b: &CellTerm) -> Vec<CellTerm> {
    let mut out = Vec::new();
    match (a.node(), b.node()) {
        (CellNode::Lift(f), CellNode::Lift(g)) => {
            out.push(CellTerm::lift(MorphismTerm::tensor(f.clone(), g.clone())));
        }
        (CellNode::SendRight(w), CellNode::RecvLeft(u)) if w == u => {
            out.push(CellTerm::vid(w.clone()));
        }
        (CellNode::RecvRight(w), CellNode::SendLeft(u)) if w == u => {
            out.push(CellTerm::vid(w.clone()));
        }
        _ => {}
    }
    let va = vspine(a);
    let vb = vspine(b);
    if va.len() > 1 || vb.len() > 1 {
        for k in 1..va.len().max(1) {
            for l in 1..vb.len().max(1) {
                let (Some(at), Some(ab), Some(bt), Some(bb)) = (
                    rebuild_stack(va[..k].to_vec()),
                    rebuild_stack(va[k..].to_vec()),
                    rebuild_stack(vb[..l].to_vec()),
                    rebuild_stack(vb[l..].to_vec()),
                ) else {
                    continue;
                };
                if at.right() != bt.left() || ab.right() != bb.left() {
                    continue;
                }
                let (Ok(x), Ok(y)) = (CellTerm::hcomp(at, bt), CellTerm::hcomp(ab, bb)) else {
                    continue;
                };
                if let Ok(u) = CellTerm::vcomp(x, y) {
                    out.push(u);
                }
            }
        }
    }
    out
}

/// All one-step move results in all contexts of the term.
pub fn neighbours(t: &CellTerm) -> Vec<CellTerm> {
    let mut out = Vec::new();
    match t.node() {
        CellNode::VComp(..) => {
            let vs = vspine(t);
            for i in 0..vs.len() - 1 {
                for r in vpair_moves(&vs[i], &vs[i + 1]) {
                    let mut nv = vs.clone();
                    nv.splice(i..i + 2, [r]);
                    if let Some(u) = rebuild_stack(nv) {
                        out.push(u);
                    }
                }
            }
            for (i, e) in vs.iter().enumerate() {
                for n in neighbours(e) {
                    let mut nv = vs.clone();
                    nv[i] = n;
                    if let Some(u) = rebuild_stack(nv) {
                        out.push(u);
                    }
                }
            }
        }
        CellNode::HComp(..) => {
            let hs = hspine(t);
            for i in 0..hs.len() - 1 {
                for r in hpair_moves(&hs[i], &hs[i + 1]) {
                    let mut nh = hs.clone();
                    nh.splice(i..i + 2, [r]);
                    if let Some(u) = rebuild_beside(nh) {
                        out.push(u);
                    }
                }
            }
            for (i, e) in hs.iter().enumerate() {
                for n in neighbours(e) {
                    let mut nh = hs.clone();
                    nh[i] = n;
                    if let Some(u) = rebuild_beside(nh) {
                        out.push(u);
                    }
                }
            }
        }
        CellNode::Lift(m) => match m.node() {
            MorphismNode::Seq(f, g) => {
                if let Ok(u) =
                    CellTerm::vcomp(CellTerm::lift((**f).clone()), CellTerm::lift((**g).clone()))
                {
                    out.push(u);
                }
            }
            MorphismNode::Tensor(f, g) => {
                if let Ok(u) =
                    CellTerm::hcomp(CellTerm::lift((**f).clone()), CellTerm::lift((**g).clone()))
                {
                    out.push(u);
                }
            }
            MorphismNode::Identity(w) => out.push(CellTerm::vid(w.clone())),
            _ => {}
        },
        CellNode::VId(w) if !w.is_unit() => {
            out.push(CellTerm::lift(MorphismTerm::identity(w.clone())));
            if let Ok(u) = CellTerm::hcomp(
                CellTerm::send_right(w.clone()),
                CellTerm::recv_left(w.clone()),
            ) {
                out.push(u);
            }
            if let Ok(u) = CellTerm::hcomp(
                CellTerm::recv_right(w.clone()),
                CellTerm::send_left(w.clone()),
            ) {
                out.push(u);
            }
        }
        CellNode::HId(x) if !x.is_unit() => {
            for i in 0..x.len() {
                let mut rows = Vec::new();
                for (j, a) in x.iter().enumerate() {
                    if j == i {
                        let exp = match a.polarity {
                            Polarity::Circ => CellTerm::vcomp(
                                CellTerm::recv_left(a.object.clone()),
                                CellTerm::send_right(a.object.clone()),
                            ),
                            Polarity::Bullet => CellTerm::vcomp(
                                CellTerm::recv_right(a.object.clone()),
                                CellTerm::send_left(a.object.clone()),
                            ),
                        };
                        match exp {
                            Ok(e) => rows.push(e),
                            Err(_) => break,
                        }
                    } else {
                        rows.push(CellTerm::hid(ExchangeType::single(a.clone())));
                    }
                }
                if rows.len() == x.len() {
                    if let Some(u) = rebuild_stack(rows) {
                        out.push(u);
                    }
                }
            }
        }
        _ => {}
    }
    out
}

// -------------------------------------------------------------------
// Bidirectional search
// -------------------------------------------------------------------

/// One expansion round on the smaller frontier; `Some(true)` on a meet,
/// `Some(false)` when the state cap is hit, `None` to continue.
fn expand_round(
    frontier: &mut Vec<CellTerm>,
    seen: &mut BTreeSet<String>,
    other_seen: &BTreeSet<String>,
    states: &mut usize,
    cap: usize,
) -> Option<bool> {
    let mut next = Vec::new();
    for t in frontier.drain(..) {
        for n in neighbours(&t) {
            let c = canon_cell(&n);
            if other_seen.contains(&c) {
                return Some(true);
            }
            if seen.insert(c) {
                *states += 1;
                if *states > cap {
                    return Some(false);
                }
                next.push(n);
            }
        }
    }
    *frontier = next;
    None
}

/// Bidirectional breadth-first equality search. `true` means the cells
/// are provably equal by the move system; `false` means no derivation
/// was found within the budget (not a refutation in general).
pub fn oracle_cells_equal(a: &CellTerm, b: &CellTerm, rounds: usize, cap: usize) -> bool {
    if a.boundary() != b.boundary() {
        return false;
    }
    let ca = canon_cell(a);
    let cb = canon_cell(b);
    if ca == cb {
        return true;
    }
    let mut seen_a = BTreeSet::from([ca]);
    let mut seen_b = BTreeSet::from([cb]);
    let mut frontier_a = vec![a.clone()];
    let mut frontier_b = vec![b.clone()];
    let mut states = 2usize;
    for _ in 0..rounds {
        if frontier_a.is_empty() && frontier_b.is_empty() {
            return false;
        }
        let expand_a = !frontier_a.is_empty()
            && (frontier_b.is_empty() || frontier_a.len() <= frontier_b.len());
        let step = if expand_a {
            expand_round(&mut frontier_a, &mut seen_a, &seen_b, &mut states, cap)
        } else {
            expand_round(&mut frontier_b, &mut seen_b, &seen_a, &mut states, cap)
        };
        if let Some(v) = step {
            return v;
        }
    }
    false
}

// -------------------------------------------------------------------
// Random corpus over the baking theory
// -------------------------------------------------------------------

pub struct CorpusConfig {
    pub max_rows: usize,
    pub max_word: usize,
    pub max_gens: usize,
    pub corners: bool,
    pub pairs: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            max_rows: 5,
            max_word: 4,
            max_gens: 12,
            corners: true,
            pairs: true,
        }
    }
}

const OBJS: [&str; 5] = ["bread", "dough", "water", "flour", "oven"];

pub fn random_word<R: Rng>(rng: &mut R, len: usize) -> ObjectWord {
    ObjectWord::from_names((0..len).map(|_| OBJS[rng.gen_range(0..OBJS.len())]))
}

fn word_of(names: &[String]) -> ObjectWord {
    ObjectWord::from_names(names.iter().cloned())
}

/// One row of lifted base structure over the current word: a tensor of
/// identities, braidings, and applicable generators.
pub fn random_lift_row<R: Rng>(
    rng: &mut R,
    cur: &mut Vec<String>,
    gens_left: &mut usize,
) -> CellTerm {
    let p = super::baking_presentation();
    let mut parts: Vec<MorphismTerm> = Vec::new();
    let mut next: Vec<String> = Vec::new();
    let mut i = 0;
    while i < cur.len() {
        let mut opts: Vec<u8> = vec![0];
        if i + 1 < cur.len() {
            opts.push(1);
        }
        if *gens_left > 0 {
            if cur[i] == "dough" {
                opts.push(2);
                opts.push(2);
            }
            if i + 1 < cur.len() && cur[i] == "water" && cur[i + 1] == "flour" {
                opts.push(3);
                opts.push(3);
            }
            if i + 1 < cur.len() && cur[i] == "dough" && cur[i + 1] == "oven" {
                opts.push(4);
                opts.push(4);
            }
        }
        match opts[rng.gen_range(0..opts.len())] {
            0 => {
                parts.push(MorphismTerm::identity(ObjectWord::single(cur[i].clone())));
                next.push(cur[i].clone());
                i += 1;
            }
            1 => {
                parts.push(MorphismTerm::braid(
                    ObjectWord::single(cur[i].clone()),
                    ObjectWord::single(cur[i + 1].clone()),
                ));
                next.push(cur[i + 1].clone());
                next.push(cur[i].clone());
                i += 2;
            }
            2 => {
                parts.push(MorphismTerm::generator(&p, "knead").unwrap());
                next.push("dough".into());
                i += 1;
                *gens_left -= 1;
            }
            3 => {
                parts.push(MorphismTerm::generator(&p, "mix").unwrap());
                next.push("dough".into());
                i += 2;
                *gens_left -= 1;
            }
            _ => {
                parts.push(MorphismTerm::generator(&p, "bake").unwrap());
                next.push("bread".into());
                next.push("oven".into());
                i += 2;
                *gens_left -= 1;
            }
        }
    }
    *cur = next;
    let m = parts
        .into_iter()
        .reduce(MorphismTerm::tensor)
        .expect("nonempty word");
    CellTerm::lift(m)
}

/// A random row-stacked cell over the baking theory. Rows are lifted
/// base morphisms, single corners at the word's edges, or yanked corner
/// pairs inside the word.
pub fn random_cell<R: Rng>(rng: &mut R, cfg: &CorpusConfig) -> CellTerm {
    let start = rng.gen_range(1..=3.min(cfg.max_word));
    let mut cur: Vec<String> = random_word(rng, start).factors().to_vec();
    let mut rows: Vec<CellTerm> = Vec::new();
    let mut gens_left = cfg.max_gens;
    let nrows = rng.gen_range(1..=cfg.max_rows);
    for _ in 0..nrows {
        let mut kinds: Vec<u8> = Vec::new();
        if !cur.is_empty() {
            kinds.push(0);
        }
        if cfg.corners {
            if cur.len() < cfg.max_word {
                kinds.push(1);
                kinds.push(2);
            }
            if !cur.is_empty() {
                kinds.push(3);
                kinds.push(4);
            }
        }
        if cfg.pairs && !cur.is_empty() {
            kinds.push(5);
        }
        if kinds.is_empty() {
            break;
        }
        match kinds[rng.gen_range(0..kinds.len())] {
            0 => {
                let row = random_lift_row(rng, &mut cur, &mut gens_left);
                rows.push(row);
            }
            1 => {
                let k = rng.gen_range(1..=(cfg.max_word - cur.len()).min(2));
                let u = random_word(rng, k);
                let row = CellTerm::beside([
                    CellTerm::recv_left(u.clone()),
                    CellTerm::vid(word_of(&cur)),
                ])
                .unwrap();
                rows.push(row);
                let mut next = u.factors().to_vec();
                next.extend(cur.drain(..));
                cur = next;
            }
            2 => {
                let k = rng.gen_range(1..=(cfg.max_word - cur.len()).min(2));
                let u = random_word(rng, k);
                let row = CellTerm::beside([
                    CellTerm::vid(word_of(&cur)),
                    CellTerm::recv_right(u.clone()),
                ])
                .unwrap();
                rows.push(row);
                cur.extend(u.factors().iter().cloned());
            }
            3 => {
                let k = rng.gen_range(1..=cur.len().min(2));
                let split = cur.len() - k;
                let u = word_of(&cur[split..]);
                let row = CellTerm::beside([
                    CellTerm::vid(word_of(&cur[..split])),
                    CellTerm::send_right(u),
                ])
                .unwrap();
                rows.push(row);
                cur.truncate(split);
            }
            4 => {
                let k = rng.gen_range(1..=cur.len().min(2));
                let u = word_of(&cur[..k]);
                let row =
                    CellTerm::beside([CellTerm::send_left(u), CellTerm::vid(word_of(&cur[k..]))])
                        .unwrap();
                rows.push(row);
                cur.drain(..k);
            }
            _ => {
                // A yanked corner pair is an identity on a segment of the
                // current word; the word itself does not change.
                let pos = rng.gen_range(0..cur.len());
                let k = rng.gen_range(1..=(cur.len() - pos).min(2));
                let u = word_of(&cur[pos..pos + k]);
                let pair = if rng.gen_bool(0.5) {
                    CellTerm::hcomp(
                        CellTerm::send_right(u.clone()),
                        CellTerm::recv_left(u.clone()),
                    )
                } else {
                    CellTerm::hcomp(
                        CellTerm::recv_right(u.clone()),
                        CellTerm::send_left(u.clone()),
                    )
                }
                .unwrap();
                let row = CellTerm::beside([
                    CellTerm::vid(word_of(&cur[..pos])),
                    pair,
                    CellTerm::vid(word_of(&cur[pos + k..])),
                ])
                .unwrap();
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return CellTerm::vid(word_of(&cur));
    }
    CellTerm::stack(rows).unwrap()
}

/// Applies up to `max_moves` random one-step moves.
pub fn random_equal_variant<R: Rng>(rng: &mut R, t: &CellTerm, max_moves: usize) -> CellTerm {
    let mut cur = t.clone();
    for _ in 0..max_moves {
        let ns = neighbours(&cur);
        if ns.is_empty() {
            break;
        }
        cur = ns[rng.gen_range(0..ns.len())].clone();
    }
    cur
}

/// Counts generator occurrences, an invariant of every move.
pub fn generator_multiset(t: &CellTerm) -> Vec<String> {
    fn walk_m(m: &MorphismTerm, out: &mut Vec<String>) {
        match m.node() {
            MorphismNode::Generator(n) => out.push(n.clone()),
            MorphismNode::Seq(a, b) | MorphismNode::Tensor(a, b) => {
                walk_m(a, out);
                walk_m(b, out);
            }
            _ => {}
        }
    }
    fn walk(t: &CellTerm, out: &mut Vec<String>) {
        match t.node() {
            CellNode::Lift(m) => walk_m(m, out),
            CellNode::HComp(a, b) | CellNode::VComp(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(t, &mut out);
    out.sort();
    out
}
