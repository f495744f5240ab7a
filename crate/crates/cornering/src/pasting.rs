//! Exploded pasting graphs: the internal semantic representation of cells.
//!
//! A cell term explodes into a flat graph of generator boxes, corner
//! nodes, relays, and vertical wires. Identities and braidings become
//! pure routing, lifted composites become their constituent generator
//! boxes, and horizontal pasting pairs up corners along shared edges.
//! Lift functoriality and the interchange law therefore hold
//! definitionally here, and structural congruence of terms becomes graph
//! equality after canonical relabeling.
//!
//! Realizability invariant: every graph in circulation is the image of a
//! well-typed term. The constructors preserve this, and the rewrite
//! steps (pair yanking, guarded relay insertion, equation application)
//! are congruence moves that preserve it too.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::cell::{CellBoundary, CellNode, CellTerm, ExchangeType, Polarity, PolarizedObject};
use crate::morphism::{MorphismNode, MorphismTerm};
use crate::theory::{ObjectWord, TheoryPresentation};

pub(crate) type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum CornerKind {
    SendRight,
    RecvLeft,
    SendLeft,
    RecvRight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

impl CornerKind {
    pub(crate) fn polarity(self) -> Polarity {
        match self {
            CornerKind::SendRight | CornerKind::RecvLeft => Polarity::Circ,
            CornerKind::SendLeft | CornerKind::RecvRight => Polarity::Bullet,
        }
    }

    /// Which vertical boundary the corner's bent edge lives on.
    pub(crate) fn side(self) -> Side {
        match self {
            CornerKind::SendRight | CornerKind::RecvRight => Side::Right,
            CornerKind::RecvLeft | CornerKind::SendLeft => Side::Left,
        }
    }

    /// Senders consume wires from above; receivers produce wires below.
    pub(crate) fn consumes(self) -> bool {
        matches!(self, CornerKind::SendRight | CornerKind::SendLeft)
    }

    fn rank(self) -> usize {
        match self {
            CornerKind::RecvLeft => 1,
            CornerKind::SendLeft => 2,
            CornerKind::RecvRight => 5,
            CornerKind::SendRight => 6,
        }
    }
}

/// Where a corner's bent edge ends: an outer boundary ordinal, or paired
/// with the complementary corner of a neighbouring cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum HEnd {
    Boundary(usize),
    Pair(NodeId),
}

#[derive(Clone, Debug)]
pub(crate) struct CornerNode {
    pub(crate) kind: CornerKind,
    pub(crate) obj: ObjectWord,
    pub(crate) h: HEnd,
}

#[derive(Clone, Debug)]
pub(crate) struct BoxNode {
    pub(crate) label: String,
    pub(crate) in_objs: Vec<String>,
    pub(crate) out_objs: Vec<String>,
}

/// Material passing straight through horizontally: the image of a
/// horizontal identity atom.
#[derive(Clone, Debug)]
pub(crate) struct RelayNode {
    pub(crate) obj: ObjectWord,
    pub(crate) pol: Polarity,
    pub(crate) left_ord: usize,
    pub(crate) right_ord: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum VSrc {
    Top(usize),
    BoxOut(NodeId, usize),
    CornerOut(NodeId, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum VDst {
    Bottom(usize),
    BoxIn(NodeId, usize),
    CornerIn(NodeId, usize),
}

#[derive(Clone, Debug)]
pub(crate) struct VWire {
    pub(crate) obj: String,
    pub(crate) src: VSrc,
    pub(crate) dst: VDst,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Pasting {
    pub(crate) boundary: CellBoundary,
    next_id: NodeId,
    pub(crate) boxes: BTreeMap<NodeId, BoxNode>,
    pub(crate) corners: BTreeMap<NodeId, CornerNode>,
    pub(crate) relays: BTreeMap<NodeId, RelayNode>,
    pub(crate) wires: Vec<VWire>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Occupant {
    Corner(NodeId),
    Relay(NodeId),
}

impl Pasting {
    fn new(boundary: CellBoundary) -> Self {
        Pasting {
            boundary,
            ..Default::default()
        }
    }

    fn fresh(&mut self) -> NodeId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// The corner or relay occupying a boundary ordinal, if any.
    fn occupant(&self, side: Side, ordinal: usize) -> Option<Occupant> {
        for (&id, c) in &self.corners {
            if c.kind.side() == side && c.h == HEnd::Boundary(ordinal) {
                return Some(Occupant::Corner(id));
            }
        }
        for (&id, r) in &self.relays {
            let o = match side {
                Side::Left => r.left_ord,
                Side::Right => r.right_ord,
            };
            if o == ordinal {
                return Some(Occupant::Relay(id));
            }
        }
        None
    }

    /// Copies another graph into this one with fresh ids, shifting its
    /// boundary indices. Returns the id translation map.
    fn absorb(
        &mut self,
        other: &Pasting,
        shift_left: usize,
        shift_right: usize,
        shift_top: usize,
        shift_bottom: usize,
    ) -> BTreeMap<NodeId, NodeId> {
        let mut map = BTreeMap::new();
        for (&id, b) in &other.boxes {
            let nid = self.fresh();
            map.insert(id, nid);
            self.boxes.insert(nid, b.clone());
        }
        for (&id, c) in &other.corners {
            let nid = self.fresh();
            map.insert(id, nid);
            let h = match c.h {
                HEnd::Boundary(o) => HEnd::Boundary(match c.kind.side() {
                    Side::Left => o + shift_left,
                    Side::Right => o + shift_right,
                }),
                HEnd::Pair(p) => HEnd::Pair(p),
            };
            self.corners.insert(
                nid,
                CornerNode {
                    kind: c.kind,
                    obj: c.obj.clone(),
                    h,
                },
            );
        }
        // Pair targets referenced the old id space; fix them up.
        let new_corner_ids: Vec<NodeId> = other.corners.keys().map(|id| map[id]).collect();
        for id in new_corner_ids {
            if let Some(c) = self.corners.get_mut(&id) {
                if let HEnd::Pair(p) = c.h {
                    c.h = HEnd::Pair(map[&p]);
                }
            }
        }
        for (&id, r) in &other.relays {
            let nid = self.fresh();
            map.insert(id, nid);
            self.relays.insert(
                nid,
                RelayNode {
                    obj: r.obj.clone(),
                    pol: r.pol,
                    left_ord: r.left_ord + shift_left,
                    right_ord: r.right_ord + shift_right,
                },
            );
        }
        for wire in &other.wires {
            let src = match wire.src {
                VSrc::Top(i) => VSrc::Top(i + shift_top),
                VSrc::BoxOut(b, p) => VSrc::BoxOut(map[&b], p),
                VSrc::CornerOut(c, p) => VSrc::CornerOut(map[&c], p),
            };
            let dst = match wire.dst {
                VDst::Bottom(i) => VDst::Bottom(i + shift_bottom),
                VDst::BoxIn(b, p) => VDst::BoxIn(map[&b], p),
                VDst::CornerIn(c, p) => VDst::CornerIn(map[&c], p),
            };
            self.wires.push(VWire {
                obj: wire.obj.clone(),
                src,
                dst,
            });
        }
        map
    }

    fn wire_into(&self, dst: VDst) -> Option<usize> {
        self.wires.iter().position(|w| w.dst == dst)
    }

    fn wire_from(&self, src: VSrc) -> Option<usize> {
        self.wires.iter().position(|w| w.src == src)
    }

    fn src_node(src: VSrc) -> Option<NodeId> {
        match src {
            VSrc::Top(_) => None,
            VSrc::BoxOut(n, _) | VSrc::CornerOut(n, _) => Some(n),
        }
    }

    fn dst_node(dst: VDst) -> Option<NodeId> {
        match dst {
            VDst::Bottom(_) => None,
            VDst::BoxIn(n, _) | VDst::CornerIn(n, _) => Some(n),
        }
    }
}

/// Interprets a morphism term inside a pasting, threading wire sources
/// from the term's domain to its codomain. Identities and braidings
/// reorder sources without creating nodes.
fn eval_morphism(
    p: &mut Pasting,
    term: &MorphismTerm,
    inputs: Vec<(VSrc, String)>,
) -> Vec<(VSrc, String)> {
    match term.node() {
        MorphismNode::Identity(_) => inputs,
        MorphismNode::Generator(name) => {
            let id = p.fresh();
            let in_objs: Vec<String> = term.dom().factors().to_vec();
            let out_objs: Vec<String> = term.cod().factors().to_vec();
            for (port, (src, obj)) in inputs.into_iter().enumerate() {
                p.wires.push(VWire {
                    obj,
                    src,
                    dst: VDst::BoxIn(id, port),
                });
            }
            p.boxes.insert(
                id,
                BoxNode {
                    label: name.clone(),
                    in_objs,
                    out_objs: out_objs.clone(),
                },
            );
            out_objs
                .into_iter()
                .enumerate()
                .map(|(port, obj)| (VSrc::BoxOut(id, port), obj))
                .collect()
        }
        MorphismNode::Braid(a, _) => {
            let (first, second) = inputs.split_at(a.len());
            let mut out = second.to_vec();
            out.extend_from_slice(first);
            out
        }
        MorphismNode::Seq(f, g) => {
            let mid = eval_morphism(p, f, inputs);
            eval_morphism(p, g, mid)
        }
        MorphismNode::Tensor(f, g) => {
            let (first, second) = inputs.split_at(f.dom().len());
            let mut out = eval_morphism(p, f, first.to_vec());
            out.extend(eval_morphism(p, g, second.to_vec()));
            out
        }
    }
}

/// Explodes a cell term into its pasting graph.
pub(crate) fn explode(term: &CellTerm) -> Pasting {
    let boundary = term.boundary().clone();
    match term.node() {
        CellNode::VId(w) => {
            let mut p = Pasting::new(boundary);
            for (i, obj) in w.factors().iter().enumerate() {
                p.wires.push(VWire {
                    obj: obj.clone(),
                    src: VSrc::Top(i),
                    dst: VDst::Bottom(i),
                });
            }
            p
        }
        CellNode::HId(x) => {
            let mut p = Pasting::new(boundary);
            for (k, atom) in x.factors().iter().enumerate() {
                let id = p.fresh();
                p.relays.insert(
                    id,
                    RelayNode {
                        obj: atom.object.clone(),
                        pol: atom.polarity,
                        left_ord: k,
                        right_ord: k,
                    },
                );
            }
            p
        }
        CellNode::Lift(m) => {
            let mut p = Pasting::new(boundary);
            let inputs: Vec<(VSrc, String)> = m
                .dom()
                .factors()
                .iter()
                .enumerate()
                .map(|(i, obj)| (VSrc::Top(i), obj.clone()))
                .collect();
            let outputs = eval_morphism(&mut p, m, inputs);
            for (i, (src, obj)) in outputs.into_iter().enumerate() {
                p.wires.push(VWire {
                    obj,
                    src,
                    dst: VDst::Bottom(i),
                });
            }
            p
        }
        CellNode::SendRight(w) | CellNode::SendLeft(w) => {
            let kind = if matches!(term.node(), CellNode::SendRight(_)) {
                CornerKind::SendRight
            } else {
                CornerKind::SendLeft
            };
            let mut p = Pasting::new(boundary);
            let id = p.fresh();
            p.corners.insert(
                id,
                CornerNode {
                    kind,
                    obj: w.clone(),
                    h: HEnd::Boundary(0),
                },
            );
            for (i, obj) in w.factors().iter().enumerate() {
                p.wires.push(VWire {
                    obj: obj.clone(),
                    src: VSrc::Top(i),
                    dst: VDst::CornerIn(id, i),
                });
            }
            p
        }
        CellNode::RecvLeft(w) | CellNode::RecvRight(w) => {
            let kind = if matches!(term.node(), CellNode::RecvLeft(_)) {
                CornerKind::RecvLeft
            } else {
                CornerKind::RecvRight
            };
            let mut p = Pasting::new(boundary);
            let id = p.fresh();
            p.corners.insert(
                id,
                CornerNode {
                    kind,
                    obj: w.clone(),
                    h: HEnd::Boundary(0),
                },
            );
            for (i, obj) in w.factors().iter().enumerate() {
                p.wires.push(VWire {
                    obj: obj.clone(),
                    src: VSrc::CornerOut(id, i),
                    dst: VDst::Bottom(i),
                });
            }
            p
        }
        CellNode::VComp(a, b) => {
            let pa = explode(a);
            let pb = explode(b);
            paste_vertical(boundary, &pa, &pb)
        }
        CellNode::HComp(a, b) => {
            let pa = explode(a);
            let pb = explode(b);
            paste_horizontal(boundary, &pa, &pb)
        }
    }
}

/// Pastes `pb` below `pa`, splicing the shared horizontal edge.
fn paste_vertical(boundary: CellBoundary, pa: &Pasting, pb: &Pasting) -> Pasting {
    let mut p = Pasting::new(boundary);
    p.absorb(pa, 0, 0, 0, 0);
    // Hold a's bottom wires aside.
    let mut a_bottom: BTreeMap<usize, (VSrc, String)> = BTreeMap::new();
    let mut kept = Vec::new();
    for w in std::mem::take(&mut p.wires) {
        if let VDst::Bottom(i) = w.dst {
            a_bottom.insert(i, (w.src, w.obj));
        } else {
            kept.push(w);
        }
    }
    p.wires = kept;
    let shift_l = pa.boundary.left.len();
    let shift_r = pa.boundary.right.len();
    let before = p.wires.len();
    p.absorb(pb, shift_l, shift_r, 0, 0);
    let added: Vec<VWire> = p.wires.drain(before..).collect();
    for w in added {
        if let VSrc::Top(i) = w.src {
            let (src, obj) = a_bottom
                .remove(&i)
                .expect("vertical interface ports align by typing");
            debug_assert_eq!(obj, w.obj);
            p.wires.push(VWire {
                obj,
                src,
                dst: w.dst,
            });
        } else {
            p.wires.push(w);
        }
    }
    debug_assert!(a_bottom.is_empty(), "every interface port is consumed");
    p
}

/// Pastes `pb` to the right of `pa`, pairing and merging the occupants
/// of the shared vertical edge ordinal by ordinal.
fn paste_horizontal(boundary: CellBoundary, pa: &Pasting, pb: &Pasting) -> Pasting {
    let mut p = Pasting::new(boundary);
    let map_a = p.absorb(pa, 0, 0, 0, 0);
    let map_b = p.absorb(pb, 0, 0, pa.boundary.top.len(), pa.boundary.bottom.len());
    let shared = pa.boundary.right.len();
    debug_assert_eq!(shared, pb.boundary.left.len());
    for k in 0..shared {
        let occ_a = pa
            .occupant(Side::Right, k)
            .expect("every right ordinal of a well-typed cell is occupied");
        let occ_b = pb
            .occupant(Side::Left, k)
            .expect("every left ordinal of a well-typed cell is occupied");
        let occ_a = match occ_a {
            Occupant::Corner(id) => Occupant::Corner(map_a[&id]),
            Occupant::Relay(id) => Occupant::Relay(map_a[&id]),
        };
        let occ_b = match occ_b {
            Occupant::Corner(id) => Occupant::Corner(map_b[&id]),
            Occupant::Relay(id) => Occupant::Relay(map_b[&id]),
        };
        match (occ_a, occ_b) {
            (Occupant::Corner(ca), Occupant::Corner(cb)) => {
                debug_assert_eq!(
                    p.corners[&ca].obj, p.corners[&cb].obj,
                    "paired corners carry the same atom"
                );
                debug_assert_ne!(
                    p.corners[&ca].kind.consumes(),
                    p.corners[&cb].kind.consumes()
                );
                p.corners.get_mut(&ca).expect("corner").h = HEnd::Pair(cb);
                p.corners.get_mut(&cb).expect("corner").h = HEnd::Pair(ca);
            }
            (Occupant::Corner(ca), Occupant::Relay(rb)) => {
                let out = p.relays.remove(&rb).expect("relay");
                p.corners.get_mut(&ca).expect("corner").h = HEnd::Boundary(out.right_ord);
            }
            (Occupant::Relay(ra), Occupant::Corner(cb)) => {
                let out = p.relays.remove(&ra).expect("relay");
                p.corners.get_mut(&cb).expect("corner").h = HEnd::Boundary(out.left_ord);
            }
            (Occupant::Relay(ra), Occupant::Relay(rb)) => {
                let out = p.relays.remove(&rb).expect("relay");
                p.relays.get_mut(&ra).expect("relay").right_ord = out.right_ord;
            }
        }
    }
    p
}

// ---------------------------------------------------------------------
// Rewriting: pair yanking and guarded relay insertion
// ---------------------------------------------------------------------

impl Pasting {
    /// Yanks one corner pair into straight wires; both yanking equations
    /// of a polarity in their horizontal orientation. Returns the sender,
    /// the receiver, and their polarity when a pair was found.
    pub(crate) fn yank_one_pair(
        &mut self,
        polarity: Option<Polarity>,
    ) -> Option<(NodeId, NodeId, Polarity)> {
        let target = self.corners.iter().find_map(|(&id, c)| match c.h {
            HEnd::Pair(peer)
                if c.kind.consumes() && polarity.map_or(true, |p| c.kind.polarity() == p) =>
            {
                Some((id, peer, c.kind.polarity()))
            }
            _ => None,
        });
        let (sender, receiver, pol) = target?;
        let ports = self.corners[&sender].obj.len();
        for port in 0..ports {
            let wi = self
                .wire_into(VDst::CornerIn(sender, port))
                .expect("sender port wired");
            let wo = self
                .wire_from(VSrc::CornerOut(receiver, port))
                .expect("receiver port wired");
            let src = self.wires[wi].src;
            let dst = self.wires[wo].dst;
            let obj = self.wires[wi].obj.clone();
            debug_assert_eq!(obj, self.wires[wo].obj);
            let (lo, hi) = (wi.min(wo), wi.max(wo));
            self.wires.remove(hi);
            self.wires.remove(lo);
            self.wires.push(VWire { obj, src, dst });
        }
        self.corners.remove(&sender);
        self.corners.remove(&receiver);
        Some((sender, receiver, pol))
    }

    /// Finds one receive corner whose output feeds a matching send corner
    /// directly, and replaces the pair with a relay when the
    /// stratification guard allows it. This is the vertical orientation
    /// of the yanking equations. Returns the receiver, the sender, and
    /// their polarity when a relay was inserted.
    pub(crate) fn insert_one_relay(
        &mut self,
        polarity: Option<Polarity>,
    ) -> Option<(NodeId, NodeId, Polarity)> {
        let mut candidates: Vec<(NodeId, NodeId)> = Vec::new();
        for (&rid, c) in &self.corners {
            if c.kind.consumes() {
                continue;
            }
            if polarity.map_or(false, |p| c.kind.polarity() != p) {
                continue;
            }
            if !matches!(c.h, HEnd::Boundary(_)) {
                continue;
            }
            let want = match c.kind {
                CornerKind::RecvLeft => CornerKind::SendRight,
                CornerKind::RecvRight => CornerKind::SendLeft,
                _ => unreachable!("receive corners only"),
            };
            if c.obj.is_unit() {
                // Unit atoms carry no wires, so every complementary unit
                // send corner is a candidate partner; order-compatible
                // choices come first.
                let mut senders: Vec<(usize, NodeId)> = self
                    .corners
                    .iter()
                    .filter_map(|(&sid, s)| match s.h {
                        HEnd::Boundary(o) if s.kind == want && s.obj.is_unit() => Some((o, sid)),
                        _ => None,
                    })
                    .collect();
                senders.sort();
                candidates.extend(senders.into_iter().map(|(_, sid)| (rid, sid)));
            } else if let Some(sid) = self.direct_sender_below(rid) {
                if self.corners[&sid].kind == want
                    && matches!(self.corners[&sid].h, HEnd::Boundary(_))
                {
                    candidates.push((rid, sid));
                }
            }
        }
        for (receiver, sender) in candidates {
            let rk = self.corners[&receiver].kind;
            let (left_ord, right_ord) = match (self.corners[&receiver].h, self.corners[&sender].h) {
                (HEnd::Boundary(a), HEnd::Boundary(b)) => match rk {
                    CornerKind::RecvLeft => (a, b),
                    _ => (b, a),
                },
                _ => continue,
            };
            if !self.relay_guard(receiver, sender, left_ord, right_ord) {
                continue;
            }
            let obj = self.corners[&receiver].obj.clone();
            let pol = rk.polarity();
            for port in 0..obj.len() {
                let wo = self
                    .wire_from(VSrc::CornerOut(receiver, port))
                    .expect("receiver wired");
                self.wires.remove(wo);
            }
            self.corners.remove(&receiver);
            self.corners.remove(&sender);
            let id = self.fresh();
            self.relays.insert(
                id,
                RelayNode {
                    obj,
                    pol,
                    left_ord,
                    right_ord,
                },
            );
            return Some((receiver, sender, pol));
        }
        None
    }

    /// The send corner directly consuming every output wire of the given
    /// receive corner, ports aligned, if there is one.
    fn direct_sender_below(&self, receiver: NodeId) -> Option<NodeId> {
        let ports = self.corners[&receiver].obj.len();
        let mut sender = None;
        for port in 0..ports {
            let wo = self.wire_from(VSrc::CornerOut(receiver, port))?;
            match self.wires[wo].dst {
                VDst::CornerIn(s, p) if p == port => match sender {
                    None => sender = Some(s),
                    Some(prev) if prev == s => {}
                    _ => return None,
                },
                _ => return None,
            }
        }
        sender
    }

    /// Checks that collapsing the receive/send pair into one horizontal
    /// stratum leaves every remaining connected component wholly above or
    /// wholly below that stratum. Evidence comes from boundary ordinals
    /// and from attachment to the outer top or bottom edge.
    fn relay_guard(
        &self,
        receiver: NodeId,
        sender: NodeId,
        left_ord: usize,
        right_ord: usize,
    ) -> bool {
        #[derive(Default, Clone, Copy)]
        struct Evidence {
            above: bool,
            below: bool,
        }
        let ids: Vec<NodeId> = self
            .boxes
            .keys()
            .chain(self.corners.keys())
            .chain(self.relays.keys())
            .copied()
            .filter(|&id| id != receiver && id != sender)
            .collect();
        let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let root = find(parent, parent[i]);
                parent[i] = root;
            }
            parent[i]
        }
        let mut evidence = vec![Evidence::default(); ids.len()];
        for w in &self.wires {
            let sn = Pasting::src_node(w.src).filter(|n| *n != receiver && *n != sender);
            let dn = Pasting::dst_node(w.dst).filter(|n| *n != receiver && *n != sender);
            match (sn, dn) {
                (Some(a), Some(b)) => {
                    let (ra, rb) = (find(&mut parent, index[&a]), find(&mut parent, index[&b]));
                    if ra != rb {
                        parent[ra] = rb;
                    }
                }
                (None, Some(b)) => {
                    if matches!(w.src, VSrc::Top(_)) {
                        evidence[index[&b]].above = true;
                    }
                }
                (Some(a), None) => {
                    if matches!(w.dst, VDst::Bottom(_)) {
                        evidence[index[&a]].below = true;
                    }
                }
                (None, None) => {
                    // A straight top-to-bottom wire crosses every stratum.
                    if matches!(w.src, VSrc::Top(_)) && matches!(w.dst, VDst::Bottom(_)) {
                        return false;
                    }
                }
            }
        }
        // Paired corners belong to one component.
        for (&id, c) in &self.corners {
            if id == receiver || id == sender {
                continue;
            }
            if let HEnd::Pair(peer) = c.h {
                if peer != receiver && peer != sender {
                    let (ra, rb) = (
                        find(&mut parent, index[&id]),
                        find(&mut parent, index[&peer]),
                    );
                    if ra != rb {
                        parent[ra] = rb;
                    }
                }
            }
        }
        // Boundary ordinal evidence.
        for (&id, c) in &self.corners {
            if id == receiver || id == sender {
                continue;
            }
            if let HEnd::Boundary(o) = c.h {
                let cut = match c.kind.side() {
                    Side::Left => left_ord,
                    Side::Right => right_ord,
                };
                let e = &mut evidence[index[&id]];
                if o < cut {
                    e.above = true;
                } else {
                    e.below = true;
                }
            }
        }
        for (&id, r) in &self.relays {
            let e = &mut evidence[index[&id]];
            if r.left_ord < left_ord {
                e.above = true;
            } else {
                e.below = true;
            }
            if r.right_ord < right_ord {
                e.above = true;
            } else {
                e.below = true;
            }
        }
        let mut merged: BTreeMap<usize, Evidence> = BTreeMap::new();
        for i in 0..ids.len() {
            let root = find(&mut parent, i);
            let entry = merged.entry(root).or_default();
            entry.above |= evidence[i].above;
            entry.below |= evidence[i].below;
        }
        merged.values().all(|e| !(e.above && e.below))
    }

    /// True when the directed wire-flow over boxes and corners is
    /// acyclic; paired corners transmit flow from sender to receiver.
    pub(crate) fn is_acyclic(&self) -> bool {
        let mut succ: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for w in &self.wires {
            if let (Some(a), Some(b)) = (Pasting::src_node(w.src), Pasting::dst_node(w.dst)) {
                succ.entry(a).or_default().push(b);
            }
        }
        for (&id, c) in &self.corners {
            if let HEnd::Pair(peer) = c.h {
                if c.kind.consumes() {
                    succ.entry(id).or_default().push(peer);
                }
            }
        }
        fn visit(
            n: NodeId,
            succ: &BTreeMap<NodeId, Vec<NodeId>>,
            state: &mut BTreeMap<NodeId, u8>,
        ) -> bool {
            match state.get(&n) {
                Some(1) => return false,
                Some(2) => return true,
                _ => {}
            }
            state.insert(n, 1);
            if let Some(next) = succ.get(&n) {
                for &m in next {
                    if !visit(m, succ, state) {
                        return false;
                    }
                }
            }
            state.insert(n, 2);
            true
        }
        let mut state: BTreeMap<NodeId, u8> = BTreeMap::new();
        let nodes: Vec<NodeId> = self
            .boxes
            .keys()
            .chain(self.corners.keys())
            .copied()
            .collect();
        nodes.into_iter().all(|n| visit(n, &succ, &mut state))
    }
}

// ---------------------------------------------------------------------
// Canonical relabeling and encoding
// ---------------------------------------------------------------------

impl Pasting {
    fn neighbours(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        if let Some(b) = self.boxes.get(&id) {
            for port in 0..b.in_objs.len() {
                if let Some(w) = self.wire_into(VDst::BoxIn(id, port)) {
                    out.extend(Pasting::src_node(self.wires[w].src));
                }
            }
            for port in 0..b.out_objs.len() {
                if let Some(w) = self.wire_from(VSrc::BoxOut(id, port)) {
                    out.extend(Pasting::dst_node(self.wires[w].dst));
                }
            }
        } else if let Some(c) = self.corners.get(&id) {
            for port in 0..c.obj.len() {
                if c.kind.consumes() {
                    if let Some(w) = self.wire_into(VDst::CornerIn(id, port)) {
                        out.extend(Pasting::src_node(self.wires[w].src));
                    }
                } else if let Some(w) = self.wire_from(VSrc::CornerOut(id, port)) {
                    out.extend(Pasting::dst_node(self.wires[w].dst));
                }
            }
            if let HEnd::Pair(peer) = c.h {
                out.push(peer);
            }
        }
        out
    }

    fn bfs_order(&self, seeds: impl IntoIterator<Item = NodeId>) -> Vec<NodeId> {
        let mut order = Vec::new();
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<NodeId> = VecDeque::new();
        for s in seeds {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
        while let Some(n) = queue.pop_front() {
            order.push(n);
            for m in self.neighbours(n) {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        order
    }

    fn boundary_seeds(&self) -> Vec<NodeId> {
        let mut seeds = Vec::new();
        for i in 0..self.boundary.top.len() {
            if let Some(w) = self.wire_from(VSrc::Top(i)) {
                seeds.extend(Pasting::dst_node(self.wires[w].dst));
            }
        }
        for p in 0..self.boundary.left.len() {
            match self.occupant(Side::Left, p) {
                Some(Occupant::Corner(id)) | Some(Occupant::Relay(id)) => seeds.push(id),
                None => {}
            }
        }
        for q in 0..self.boundary.right.len() {
            match self.occupant(Side::Right, q) {
                Some(Occupant::Corner(id)) | Some(Occupant::Relay(id)) => seeds.push(id),
                None => {}
            }
        }
        for i in 0..self.boundary.bottom.len() {
            if let Some(w) = self.wire_into(VDst::Bottom(i)) {
                seeds.extend(Pasting::src_node(self.wires[w].src));
            }
        }
        seeds
    }

    /// Relabels nodes canonically: breadth-first from boundary seeds,
    /// then floating components ordered by their minimal encodings.
    pub(crate) fn canonicalize(&mut self) {
        let mut order = self.bfs_order(self.boundary_seeds());
        let placed: BTreeSet<NodeId> = order.iter().copied().collect();
        let mut remaining: BTreeSet<NodeId> = self
            .boxes
            .keys()
            .chain(self.corners.keys())
            .chain(self.relays.keys())
            .copied()
            .filter(|id| !placed.contains(id))
            .collect();
        let mut floats: Vec<(String, Vec<NodeId>)> = Vec::new();
        while let Some(&start) = remaining.iter().next() {
            let component = self.bfs_order([start]);
            let mut best: Option<(String, Vec<NodeId>)> = None;
            for &root in &component {
                let candidate = self.bfs_order([root]);
                let enc = self.encode_with(&candidate, false);
                if best.as_ref().map_or(true, |(b, _)| enc < *b) {
                    best = Some((enc, candidate));
                }
            }
            let best = best.expect("components are nonempty");
            for m in &component {
                remaining.remove(m);
            }
            floats.push(best);
        }
        floats.sort();
        for (_, component) in floats {
            order.extend(component);
        }
        let remap: BTreeMap<NodeId, NodeId> =
            order.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        self.next_id = order.len();
        self.boxes = std::mem::take(&mut self.boxes)
            .into_iter()
            .map(|(id, b)| (remap[&id], b))
            .collect();
        self.corners = std::mem::take(&mut self.corners)
            .into_iter()
            .map(|(id, mut c)| {
                if let HEnd::Pair(p) = c.h {
                    c.h = HEnd::Pair(remap[&p]);
                }
                (remap[&id], c)
            })
            .collect();
        self.relays = std::mem::take(&mut self.relays)
            .into_iter()
            .map(|(id, r)| (remap[&id], r))
            .collect();
        for w in &mut self.wires {
            w.src = match w.src {
                VSrc::Top(i) => VSrc::Top(i),
                VSrc::BoxOut(n, p) => VSrc::BoxOut(remap[&n], p),
                VSrc::CornerOut(n, p) => VSrc::CornerOut(remap[&n], p),
            };
            w.dst = match w.dst {
                VDst::Bottom(i) => VDst::Bottom(i),
                VDst::BoxIn(n, p) => VDst::BoxIn(remap[&n], p),
                VDst::CornerIn(n, p) => VDst::CornerIn(remap[&n], p),
            };
        }
        self.wires
            .sort_by(|a, b| (a.src, a.dst).cmp(&(b.src, b.dst)));
    }

    /// Serializes the graph under the given node ordering, restricted to
    /// wires between listed nodes or the outer boundary. With
    /// `with_boundary`, includes the boundary so equal encodings of
    /// canonical graphs mean equal cells.
    fn encode_with(&self, order: &[NodeId], with_boundary: bool) -> String {
        use std::fmt::Write;
        let pos: BTreeMap<NodeId, usize> = order.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut s = String::new();
        if with_boundary {
            let _ = write!(s, "@{};", self.boundary);
        }
        for &id in order {
            if let Some(b) = self.boxes.get(&id) {
                let _ = write!(s, "B{};", b.label);
            } else if let Some(c) = self.corners.get(&id) {
                let h = match c.h {
                    HEnd::Boundary(o) => format!("b{o}"),
                    HEnd::Pair(p) => format!("p{}", pos.get(&p).map_or(usize::MAX, |&i| i)),
                };
                let _ = write!(s, "C{:?}/{}/{};", c.kind, c.obj, h);
            } else if let Some(r) = self.relays.get(&id) {
                let _ = write!(s, "R{}/{:?}/{}/{};", r.obj, r.pol, r.left_ord, r.right_ord);
            }
        }
        let mut wire_tokens: Vec<String> = self
            .wires
            .iter()
            .filter(|w| {
                let sn = Pasting::src_node(w.src);
                let dn = Pasting::dst_node(w.dst);
                sn.map_or(true, |n| pos.contains_key(&n))
                    && dn.map_or(true, |n| pos.contains_key(&n))
            })
            .map(|w| {
                let src = match w.src {
                    VSrc::Top(i) => format!("t{i}"),
                    VSrc::BoxOut(n, p) => format!("o{}:{}", pos[&n], p),
                    VSrc::CornerOut(n, p) => format!("c{}:{}", pos[&n], p),
                };
                let dst = match w.dst {
                    VDst::Bottom(i) => format!("u{i}"),
                    VDst::BoxIn(n, p) => format!("i{}:{}", pos[&n], p),
                    VDst::CornerIn(n, p) => format!("k{}:{}", pos[&n], p),
                };
                format!("W{}/{}>{};", w.obj, src, dst)
            })
            .collect();
        wire_tokens.sort();
        for t in wire_tokens {
            s.push_str(&t);
        }
        s
    }

    /// Canonical encoding of the whole graph. Only meaningful after
    /// `canonicalize`.
    pub(crate) fn encoding(&self) -> String {
        let order: Vec<NodeId> = self
            .boxes
            .keys()
            .chain(self.corners.keys())
            .chain(self.relays.keys())
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        self.encode_with(&order, true)
    }
}

// ---------------------------------------------------------------------
// Canonical scheduling: rows of the normal form
// ---------------------------------------------------------------------

/// The non-identity content of one scheduled row.
#[derive(Clone, Debug)]
pub(crate) enum SliceSpec {
    /// Adjacent transposition of two wire objects.
    Swap(String, String),
    /// A generator box.
    Box(NodeId),
    /// A single boundary corner.
    Corner(NodeId),
    /// A paired send/receive exchange kept as two adjacent slices.
    Pair { sender: NodeId, receiver: NodeId },
    /// A horizontal identity atom passing through an empty stratum.
    Relay(NodeId),
}

#[derive(Clone, Debug)]
pub(crate) struct ScheduledRow {
    pub(crate) pre: Vec<String>,
    pub(crate) post: Vec<String>,
    pub(crate) slice: SliceSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum UnitKind {
    Box,
    Corner(CornerKind),
    Pair,
    Relay,
}

#[derive(Clone, Debug)]
struct Unit {
    kind: UnitKind,
    /// Primary node: box id, corner id, the sending corner of a pair, or
    /// relay id.
    node: NodeId,
    /// Receiving corner of a pair.
    partner: Option<NodeId>,
    /// Wire indices consumed, in port order.
    consumes: Vec<usize>,
    /// Wire indices produced, in port order.
    produces: Vec<usize>,
    ordinal_left: Option<usize>,
    ordinal_right: Option<usize>,
}

/// Deterministically schedules a canonicalized graph into elementary
/// rows. Panics only if the graph violates the realizability invariant,
/// which constructors and guarded rewrites preserve.
pub(crate) fn schedule(p: &Pasting) -> Vec<ScheduledRow> {
    let mut units: Vec<Unit> = Vec::new();
    for (&id, c) in &p.corners {
        match c.h {
            HEnd::Pair(peer) => {
                if c.kind.consumes() {
                    let consumes = (0..c.obj.len())
                        .map(|port| p.wire_into(VDst::CornerIn(id, port)).expect("wired"))
                        .collect();
                    let produces = (0..c.obj.len())
                        .map(|port| p.wire_from(VSrc::CornerOut(peer, port)).expect("wired"))
                        .collect();
                    units.push(Unit {
                        kind: UnitKind::Pair,
                        node: id,
                        partner: Some(peer),
                        consumes,
                        produces,
                        ordinal_left: None,
                        ordinal_right: None,
                    });
                }
            }
            HEnd::Boundary(ordinal) => {
                let (ordinal_left, ordinal_right) = match c.kind.side() {
                    Side::Left => (Some(ordinal), None),
                    Side::Right => (None, Some(ordinal)),
                };
                let (consumes, produces) = if c.kind.consumes() {
                    (
                        (0..c.obj.len())
                            .map(|port| p.wire_into(VDst::CornerIn(id, port)).expect("wired"))
                            .collect(),
                        Vec::new(),
                    )
                } else {
                    (
                        Vec::new(),
                        (0..c.obj.len())
                            .map(|port| p.wire_from(VSrc::CornerOut(id, port)).expect("wired"))
                            .collect(),
                    )
                };
                units.push(Unit {
                    kind: UnitKind::Corner(c.kind),
                    node: id,
                    partner: None,
                    consumes,
                    produces,
                    ordinal_left,
                    ordinal_right,
                });
            }
        }
    }
    for (&id, b) in &p.boxes {
        let consumes = (0..b.in_objs.len())
            .map(|port| p.wire_into(VDst::BoxIn(id, port)).expect("box input wired"))
            .collect();
        let produces = (0..b.out_objs.len())
            .map(|port| {
                p.wire_from(VSrc::BoxOut(id, port))
                    .expect("box output wired")
            })
            .collect();
        units.push(Unit {
            kind: UnitKind::Box,
            node: id,
            partner: None,
            consumes,
            produces,
            ordinal_left: None,
            ordinal_right: None,
        });
    }
    for (&id, r) in &p.relays {
        units.push(Unit {
            kind: UnitKind::Relay,
            node: id,
            partner: None,
            consumes: Vec::new(),
            produces: Vec::new(),
            ordinal_left: Some(r.left_ord),
            ordinal_right: Some(r.right_ord),
        });
    }

    // Live word: wire indices currently flowing downward.
    let mut top_wires: Vec<(usize, usize)> = p
        .wires
        .iter()
        .enumerate()
        .filter_map(|(i, w)| match w.src {
            VSrc::Top(t) => Some((t, i)),
            _ => None,
        })
        .collect();
    top_wires.sort();
    let mut word: Vec<usize> = top_wires.into_iter().map(|(_, i)| i).collect();

    let mut rows: Vec<ScheduledRow> = Vec::new();
    let mut fired = vec![false; units.len()];
    let mut cur_left = 0usize;
    let mut cur_right = 0usize;

    fn objs(p: &Pasting, word: &[usize]) -> Vec<String> {
        word.iter().map(|&i| p.wires[i].obj.clone()).collect()
    }

    // Emits swap rows until the wires listed in `wanted` sit adjacently
    // in order with the block's left edge at `anchor`.
    fn bubble_to(
        p: &Pasting,
        word: &mut Vec<usize>,
        rows: &mut Vec<ScheduledRow>,
        wanted: &[usize],
        anchor: usize,
    ) {
        for (j, &wire) in wanted.iter().enumerate() {
            let target = anchor + j;
            let mut cur = word
                .iter()
                .position(|&w| w == wire)
                .expect("wanted wire is live");
            while cur > target {
                rows.push(ScheduledRow {
                    pre: objs(p, &word[..cur - 1]),
                    post: objs(p, &word[cur + 1..]),
                    slice: SliceSpec::Swap(
                        p.wires[word[cur - 1]].obj.clone(),
                        p.wires[word[cur]].obj.clone(),
                    ),
                });
                word.swap(cur - 1, cur);
                cur -= 1;
            }
            while cur < target {
                rows.push(ScheduledRow {
                    pre: objs(p, &word[..cur]),
                    post: objs(p, &word[cur + 2..]),
                    slice: SliceSpec::Swap(
                        p.wires[word[cur]].obj.clone(),
                        p.wires[word[cur + 1]].obj.clone(),
                    ),
                });
                word.swap(cur, cur + 1);
                cur += 1;
            }
        }
    }

    loop {
        let mut best: Option<((usize, usize, NodeId), usize)> = None;
        for (u, unit) in units.iter().enumerate() {
            if fired[u] {
                continue;
            }
            if unit.ordinal_left.map_or(false, |o| o != cur_left) {
                continue;
            }
            if unit.ordinal_right.map_or(false, |o| o != cur_right) {
                continue;
            }
            if unit.kind == UnitKind::Relay && !word.is_empty() {
                continue;
            }
            if !unit.consumes.iter().all(|wire| word.contains(wire)) {
                continue;
            }
            let position = match unit.kind {
                UnitKind::Relay
                | UnitKind::Corner(CornerKind::RecvLeft)
                | UnitKind::Corner(CornerKind::SendLeft) => 0,
                UnitKind::Corner(_) => word.len(),
                UnitKind::Box | UnitKind::Pair => unit
                    .consumes
                    .iter()
                    .filter_map(|wire| word.iter().position(|w| w == wire))
                    .min()
                    .unwrap_or(word.len()),
            };
            let rank = match unit.kind {
                UnitKind::Relay => 0,
                UnitKind::Corner(k) => k.rank(),
                UnitKind::Box => 3,
                UnitKind::Pair => 4,
            };
            let key = (position, rank, unit.node);
            if best.map_or(true, |(bk, _)| key < bk) {
                best = Some((key, u));
            }
        }
        let u = match best {
            Some((_, u)) => u,
            None => break,
        };
        let unit = units[u].clone();
        fired[u] = true;
        match unit.kind {
            UnitKind::Relay => {
                rows.push(ScheduledRow {
                    pre: Vec::new(),
                    post: Vec::new(),
                    slice: SliceSpec::Relay(unit.node),
                });
                cur_left += 1;
                cur_right += 1;
            }
            UnitKind::Corner(CornerKind::RecvLeft) => {
                rows.push(ScheduledRow {
                    pre: Vec::new(),
                    post: objs(p, &word),
                    slice: SliceSpec::Corner(unit.node),
                });
                for (j, &wire) in unit.produces.iter().enumerate() {
                    word.insert(j, wire);
                }
                cur_left += 1;
            }
            UnitKind::Corner(CornerKind::SendLeft) => {
                bubble_to(p, &mut word, &mut rows, &unit.consumes, 0);
                rows.push(ScheduledRow {
                    pre: Vec::new(),
                    post: objs(p, &word[unit.consumes.len()..]),
                    slice: SliceSpec::Corner(unit.node),
                });
                word.drain(0..unit.consumes.len());
                cur_left += 1;
            }
            UnitKind::Corner(CornerKind::RecvRight) => {
                rows.push(ScheduledRow {
                    pre: objs(p, &word),
                    post: Vec::new(),
                    slice: SliceSpec::Corner(unit.node),
                });
                word.extend(unit.produces.iter().copied());
                cur_right += 1;
            }
            UnitKind::Corner(CornerKind::SendRight) => {
                let anchor = word.len() - unit.consumes.len();
                bubble_to(p, &mut word, &mut rows, &unit.consumes, anchor);
                rows.push(ScheduledRow {
                    pre: objs(p, &word[..anchor]),
                    post: Vec::new(),
                    slice: SliceSpec::Corner(unit.node),
                });
                word.truncate(anchor);
                cur_right += 1;
            }
            UnitKind::Box | UnitKind::Pair => {
                let anchor = unit
                    .consumes
                    .iter()
                    .filter_map(|wire| word.iter().position(|w| w == wire))
                    .min()
                    .unwrap_or(word.len());
                bubble_to(p, &mut word, &mut rows, &unit.consumes, anchor);
                let slice = match unit.kind {
                    UnitKind::Box => SliceSpec::Box(unit.node),
                    _ => SliceSpec::Pair {
                        sender: unit.node,
                        receiver: unit.partner.expect("pairs carry a receiver"),
                    },
                };
                rows.push(ScheduledRow {
                    pre: objs(p, &word[..anchor]),
                    post: objs(p, &word[anchor + unit.consumes.len()..]),
                    slice,
                });
                word.splice(
                    anchor..anchor + unit.consumes.len(),
                    unit.produces.iter().copied(),
                );
            }
        }
    }
    assert!(
        fired.iter().all(|&f| f),
        "pasting graphs of well-typed cells always schedule completely"
    );

    // Route the surviving word into bottom-port order.
    let target = |wire: usize| -> usize {
        match p.wires[wire].dst {
            VDst::Bottom(i) => i,
            _ => unreachable!("live wires at the end reach the bottom edge"),
        }
    };
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..word.len().saturating_sub(1) {
            if target(word[i]) > target(word[i + 1]) {
                rows.push(ScheduledRow {
                    pre: objs(p, &word[..i]),
                    post: objs(p, &word[i + 2..]),
                    slice: SliceSpec::Swap(
                        p.wires[word[i]].obj.clone(),
                        p.wires[word[i + 1]].obj.clone(),
                    ),
                });
                word.swap(i, i + 1);
                changed = true;
            }
        }
    }
    rows
}

fn generator_term(b: &BoxNode) -> MorphismTerm {
    // Boxes are stored by name with port types; rebuild a generator term
    // carrying the same boundary.
    let decl = TheoryPresentation::new("_rebuild").arrow(
        &b.label,
        ObjectWord::from_names(b.in_objs.iter().cloned()),
        ObjectWord::from_names(b.out_objs.iter().cloned()),
    );
    MorphismTerm::generator(&decl, &b.label).expect("generator just declared")
}

/// Rebuilds a cell term row from a scheduled row.
pub(crate) fn row_term(p: &Pasting, row: &ScheduledRow) -> CellTerm {
    let pre = CellTerm::vid(ObjectWord::from_names(row.pre.iter().cloned()));
    let post = CellTerm::vid(ObjectWord::from_names(row.post.iter().cloned()));
    let slice = match &row.slice {
        SliceSpec::Swap(a, b) => CellTerm::lift(MorphismTerm::braid(
            ObjectWord::single(a.clone()),
            ObjectWord::single(b.clone()),
        )),
        SliceSpec::Box(id) => CellTerm::lift(generator_term(&p.boxes[id])),
        SliceSpec::Corner(id) => {
            let c = &p.corners[id];
            match c.kind {
                CornerKind::SendRight => CellTerm::send_right(c.obj.clone()),
                CornerKind::RecvLeft => CellTerm::recv_left(c.obj.clone()),
                CornerKind::SendLeft => CellTerm::send_left(c.obj.clone()),
                CornerKind::RecvRight => CellTerm::recv_right(c.obj.clone()),
            }
        }
        SliceSpec::Pair { sender, receiver } => {
            let s = &p.corners[sender];
            let r = &p.corners[receiver];
            let (first, second) = match s.kind {
                CornerKind::SendRight => (
                    CellTerm::send_right(s.obj.clone()),
                    CellTerm::recv_left(r.obj.clone()),
                ),
                CornerKind::SendLeft => (
                    CellTerm::recv_right(r.obj.clone()),
                    CellTerm::send_left(s.obj.clone()),
                ),
                _ => unreachable!("pair units anchor on the sending corner"),
            };
            CellTerm::hcomp(first, second).expect("pair slices share their atom")
        }
        SliceSpec::Relay(id) => {
            let r = &p.relays[id];
            CellTerm::hid(ExchangeType::single(PolarizedObject::new(
                r.obj.clone(),
                r.pol,
            )))
        }
    };
    CellTerm::beside([pre, slice, post]).expect("row assembly is always well-typed")
}

/// Rebuilds the morphism of a corner-free, relay-free schedule; `None`
/// when non-vertical content remains.
pub(crate) fn morphism_from_rows(p: &Pasting, rows: &[ScheduledRow]) -> Option<MorphismTerm> {
    let mut term: Option<MorphismTerm> = None;
    for row in rows {
        let slice = match &row.slice {
            SliceSpec::Swap(a, b) => {
                MorphismTerm::braid(ObjectWord::single(a.clone()), ObjectWord::single(b.clone()))
            }
            SliceSpec::Box(id) => generator_term(&p.boxes[id]),
            _ => return None,
        };
        let pre = ObjectWord::from_names(row.pre.iter().cloned());
        let post = ObjectWord::from_names(row.post.iter().cloned());
        let mut padded = slice;
        if !pre.is_unit() {
            padded = MorphismTerm::tensor(MorphismTerm::identity(pre), padded);
        }
        if !post.is_unit() {
            padded = MorphismTerm::tensor(padded, MorphismTerm::identity(post));
        }
        term = Some(match term {
            None => padded,
            Some(t) => MorphismTerm::seq(t, padded).expect("scheduled rows chain"),
        });
    }
    Some(term.unwrap_or_else(|| MorphismTerm::identity(p.boundary.top.clone())))
}

// ---------------------------------------------------------------------
// Base-theory equation patterns and matching
// ---------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PSrc {
    In(usize),
    Box(usize, usize),
}

#[derive(Clone, Debug)]
pub(crate) struct PatternBox {
    pub(crate) label: String,
    pub(crate) inputs: Vec<PSrc>,
    pub(crate) in_objs: Vec<String>,
    pub(crate) out_objs: Vec<String>,
}

/// A morphism term compiled to a matchable diagram.
#[derive(Clone, Debug)]
pub(crate) struct MorphPattern {
    pub(crate) in_objs: Vec<String>,
    pub(crate) boxes: Vec<PatternBox>,
    pub(crate) outputs: Vec<PSrc>,
}

impl MorphPattern {
    pub(crate) fn size(&self) -> usize {
        self.boxes.len()
    }
}

pub(crate) fn compile_pattern(m: &MorphismTerm) -> MorphPattern {
    fn eval(m: &MorphismTerm, boxes: &mut Vec<PatternBox>, inputs: Vec<PSrc>) -> Vec<PSrc> {
        match m.node() {
            MorphismNode::Identity(_) => inputs,
            MorphismNode::Generator(name) => {
                let idx = boxes.len();
                boxes.push(PatternBox {
                    label: name.clone(),
                    inputs,
                    in_objs: m.dom().factors().to_vec(),
                    out_objs: m.cod().factors().to_vec(),
                });
                (0..m.cod().len()).map(|p| PSrc::Box(idx, p)).collect()
            }
            MorphismNode::Braid(a, _) => {
                let (first, second) = inputs.split_at(a.len());
                let mut out = second.to_vec();
                out.extend_from_slice(first);
                out
            }
            MorphismNode::Seq(f, g) => {
                let mid = eval(f, boxes, inputs);
                eval(g, boxes, mid)
            }
            MorphismNode::Tensor(f, g) => {
                let (first, second) = inputs.split_at(f.dom().len());
                let mut out = eval(f, boxes, first.to_vec());
                out.extend(eval(g, boxes, second.to_vec()));
                out
            }
        }
    }
    let mut boxes = Vec::new();
    let inputs = (0..m.dom().len()).map(PSrc::In).collect();
    let outputs = eval(m, &mut boxes, inputs);
    MorphPattern {
        in_objs: m.dom().factors().to_vec(),
        boxes,
        outputs,
    }
}

/// A located occurrence of a pattern: matched graph boxes plus the graph
/// sources and sinks bound to the pattern's interface.
#[derive(Clone, Debug)]
pub(crate) struct MatchBinding {
    pub(crate) boxes: Vec<NodeId>,
    pub(crate) in_srcs: Vec<Option<VSrc>>,
    pub(crate) out_dsts: Vec<Option<VDst>>,
    /// Wires bound to passthrough lanes (a pattern input used directly
    /// as an output), as (input index, output index, wire index).
    pub(crate) passthroughs: Vec<(usize, usize, usize)>,
}

impl Pasting {
    /// Enumerates occurrences of the pattern in deterministic canonical
    /// order, up to `limit`.
    pub(crate) fn find_matches(&self, pat: &MorphPattern, limit: usize) -> Vec<MatchBinding> {
        let mut results = Vec::new();
        let graph_boxes: Vec<NodeId> = self.boxes.keys().copied().collect();
        let mut chosen: Vec<NodeId> = Vec::new();
        self.match_boxes(pat, &graph_boxes, &mut chosen, &mut results, limit);
        results
    }

    fn match_boxes(
        &self,
        pat: &MorphPattern,
        graph_boxes: &[NodeId],
        chosen: &mut Vec<NodeId>,
        results: &mut Vec<MatchBinding>,
        limit: usize,
    ) {
        if results.len() >= limit {
            return;
        }
        if chosen.len() == pat.boxes.len() {
            self.bind_interface(pat, chosen, results);
            return;
        }
        let b = &pat.boxes[chosen.len()];
        for &cand in graph_boxes {
            if chosen.contains(&cand) {
                continue;
            }
            let gb = &self.boxes[&cand];
            if gb.label != b.label
                || gb.in_objs.len() != b.inputs.len()
                || gb.out_objs.len() != b.out_objs.len()
            {
                continue;
            }
            chosen.push(cand);
            if self.partial_wiring_ok(pat, chosen) {
                self.match_boxes(pat, graph_boxes, chosen, results, limit);
            }
            chosen.pop();
            if results.len() >= limit {
                return;
            }
        }
    }

    fn partial_wiring_ok(&self, pat: &MorphPattern, chosen: &[NodeId]) -> bool {
        for (bi, b) in pat.boxes.iter().enumerate().take(chosen.len()) {
            for (port, src) in b.inputs.iter().enumerate() {
                let w = match self.wire_into(VDst::BoxIn(chosen[bi], port)) {
                    Some(w) => w,
                    None => return false,
                };
                if let PSrc::Box(pb, pp) = *src {
                    if pb < chosen.len() && self.wires[w].src != VSrc::BoxOut(chosen[pb], pp) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn bind_interface(
        &self,
        pat: &MorphPattern,
        chosen: &[NodeId],
        results: &mut Vec<MatchBinding>,
    ) {
        let mut in_srcs: Vec<Option<VSrc>> = vec![None; pat.in_objs.len()];
        for (bi, b) in pat.boxes.iter().enumerate() {
            for (port, src) in b.inputs.iter().enumerate() {
                if let PSrc::In(i) = *src {
                    let w = self
                        .wire_into(VDst::BoxIn(chosen[bi], port))
                        .expect("checked in partial_wiring_ok");
                    let gsrc = self.wires[w].src;
                    // Pattern inputs come from outside the matched region.
                    if let VSrc::BoxOut(n, _) = gsrc {
                        if chosen.contains(&n) {
                            return;
                        }
                    }
                    match in_srcs[i] {
                        None => in_srcs[i] = Some(gsrc),
                        Some(prev) if prev == gsrc => {}
                        _ => return,
                    }
                }
            }
        }
        let mut out_dsts: Vec<Option<VDst>> = vec![None; pat.outputs.len()];
        let mut pass_lanes: Vec<(usize, usize)> = Vec::new();
        for (j, out) in pat.outputs.iter().enumerate() {
            match *out {
                PSrc::Box(pb, pp) => {
                    let w = match self.wire_from(VSrc::BoxOut(chosen[pb], pp)) {
                        Some(w) => w,
                        None => return,
                    };
                    let gdst = self.wires[w].dst;
                    // Pattern outputs leave the matched region.
                    if let VDst::BoxIn(n, _) = gdst {
                        if chosen.contains(&n) {
                            return;
                        }
                    }
                    out_dsts[j] = Some(gdst);
                }
                PSrc::In(i) => pass_lanes.push((i, j)),
            }
        }
        if pass_lanes.is_empty() {
            results.push(MatchBinding {
                boxes: chosen.to_vec(),
                in_srcs,
                out_dsts,
                passthroughs: Vec::new(),
            });
            return;
        }
        // Candidate wires for passthrough lanes must not touch matched
        // boxes; a lane binds one whole wire.
        let candidates: Vec<usize> = self
            .wires
            .iter()
            .enumerate()
            .filter(|(_, w)| {
                let src_ok = match w.src {
                    VSrc::BoxOut(n, _) => !chosen.contains(&n),
                    _ => true,
                };
                let dst_ok = match w.dst {
                    VDst::BoxIn(n, _) => !chosen.contains(&n),
                    _ => true,
                };
                src_ok && dst_ok
            })
            .map(|(i, _)| i)
            .collect();
        fn assign(
            this: &Pasting,
            chosen: &[NodeId],
            lanes: &[(usize, usize)],
            candidates: &[usize],
            assignment: &mut Vec<usize>,
            in_srcs: &[Option<VSrc>],
            out_dsts: &[Option<VDst>],
            results: &mut Vec<MatchBinding>,
        ) {
            if assignment.len() == lanes.len() {
                let mut in_srcs = in_srcs.to_vec();
                let mut out_dsts = out_dsts.to_vec();
                let mut passthroughs = Vec::new();
                for (k, &(i, j)) in lanes.iter().enumerate() {
                    let w = assignment[k];
                    match in_srcs[i] {
                        None => in_srcs[i] = Some(this.wires[w].src),
                        Some(prev) if prev == this.wires[w].src => {}
                        _ => return,
                    }
                    out_dsts[j] = Some(this.wires[w].dst);
                    passthroughs.push((i, j, w));
                }
                results.push(MatchBinding {
                    boxes: chosen.to_vec(),
                    in_srcs,
                    out_dsts,
                    passthroughs,
                });
                return;
            }
            for &w in candidates {
                if assignment.contains(&w) {
                    continue;
                }
                assignment.push(w);
                assign(
                    this, chosen, lanes, candidates, assignment, in_srcs, out_dsts, results,
                );
                assignment.pop();
            }
        }
        let mut assignment: Vec<usize> = Vec::new();
        assign(
            self,
            chosen,
            &pass_lanes,
            &candidates,
            &mut assignment,
            &in_srcs,
            &out_dsts,
            results,
        );
    }

    /// Replaces a matched occurrence with the right-hand pattern. Returns
    /// false, leaving the graph untouched, when the result would be
    /// cyclic; this rejects non-convex matches.
    pub(crate) fn apply_match(&mut self, binding: &MatchBinding, rhs: &MorphPattern) -> bool {
        let mut trial = self.clone();
        let doomed: BTreeSet<NodeId> = binding.boxes.iter().copied().collect();
        let pass_wires: BTreeSet<usize> = binding.passthroughs.iter().map(|&(_, _, w)| w).collect();
        let mut kept = Vec::new();
        for (i, w) in trial.wires.iter().enumerate() {
            let touches = match (Pasting::src_node(w.src), Pasting::dst_node(w.dst)) {
                (Some(a), _) if doomed.contains(&a) => true,
                (_, Some(b)) if doomed.contains(&b) => true,
                _ => false,
            };
            if !touches && !pass_wires.contains(&i) {
                kept.push(w.clone());
            }
        }
        trial.wires = kept;
        for b in &binding.boxes {
            trial.boxes.remove(b);
        }
        let mut new_ids = Vec::new();
        for b in &rhs.boxes {
            let id = trial.fresh();
            new_ids.push(id);
            trial.boxes.insert(
                id,
                BoxNode {
                    label: b.label.clone(),
                    in_objs: b.in_objs.clone(),
                    out_objs: b.out_objs.clone(),
                },
            );
        }
        let resolve = |src: PSrc| -> VSrc {
            match src {
                PSrc::In(i) => binding.in_srcs[i].expect("pattern inputs are bound"),
                PSrc::Box(b, p) => VSrc::BoxOut(new_ids[b], p),
            }
        };
        for (bi, b) in rhs.boxes.iter().enumerate() {
            for (port, src) in b.inputs.iter().enumerate() {
                trial.wires.push(VWire {
                    obj: b.in_objs[port].clone(),
                    src: resolve(*src),
                    dst: VDst::BoxIn(new_ids[bi], port),
                });
            }
        }
        for (j, out) in rhs.outputs.iter().enumerate() {
            let obj = match *out {
                PSrc::In(i) => rhs.in_objs[i].clone(),
                PSrc::Box(b, p) => rhs.boxes[b].out_objs[p].clone(),
            };
            trial.wires.push(VWire {
                obj,
                src: resolve(*out),
                dst: binding.out_dsts[j].expect("pattern outputs are bound"),
            });
        }
        if !trial.is_acyclic() {
            return false;
        }
        *self = trial;
        true
    }
}
