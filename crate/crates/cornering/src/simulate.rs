//! Composite rows run as concurrent exchange protocols.
//!
//! A horizontal composite reads as a row of participants separated by
//! vertical boundaries. Each boundary's exchange type is the protocol
//! spoken across it: one hand-off of material per atom, in the order
//! written. This module extracts those hand-offs together with the
//! causal order the row imposes on them, chooses a canonical
//! linearization, and can replay the exchanges on operating-system
//! threads to witness that the row completes without a global scheduler.
//!
//! The causal order is computed, never assumed. Dependencies come from
//! three sources: hand-offs across one boundary happen in protocol
//! order, one participant performs its hand-offs in the top-to-bottom
//! order of its canonical schedule, and material forwarded straight
//! through a participant leaves only after it arrives. A cycle in the
//! resulting relation is reported as [`SimulateError::CausalCycle`]
//! with a witness rather than linearized silently.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cell::{CellNode, CellTerm, ExchangeType, Polarity};
use crate::exchange::adapter;
use crate::morphism::MorphismTerm;
use crate::pasting::{explode, schedule, HEnd, Side, SliceSpec};
use crate::rewrite::{eval_vertical, RewriteError, RewriteOptions};
use crate::theory::{ObjectWord, Theory};

/// Which way material crosses a vertical boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// The circle polarity: the left participant hands material to the
    /// right one.
    LeftToRight,
    /// The bullet polarity: the right participant hands material to the
    /// left one.
    RightToLeft,
}

impl From<Polarity> for Direction {
    fn from(p: Polarity) -> Self {
        match p {
            Polarity::Circ => Direction::LeftToRight,
            Polarity::Bullet => Direction::RightToLeft,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::LeftToRight => ">",
            Direction::RightToLeft => "<",
        })
    }
}

/// One hand-off of material across a vertical boundary.
///
/// Boundaries are numbered left to right: `0` is the outer left edge,
/// boundary `i` separates participant `i - 1` from participant `i`, and
/// the last index is the outer right edge. The ordinal is the atom's
/// position in the boundary's exchange type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BoundaryEvent {
    pub boundary_index: usize,
    pub ordinal: usize,
    /// The material handed over.
    pub object: ObjectWord,
    /// Which way it moves.
    pub direction: Direction,
}

impl fmt::Display for BoundaryEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "boundary={} ordinal={} obj={} dir={}",
            self.boundary_index, self.ordinal, self.object, self.direction
        )
    }
}

/// The hand-offs of a composite row and the order they must respect.
///
/// `events` lists every hand-off sorted by boundary and ordinal.
/// `order` lists dependency pairs as indices into `events`: the first
/// event must happen before the second. `linearization` is one total
/// order extending `order`, chosen deterministically by longest
/// dependency chain, then boundary, then ordinal. Every other extension
/// is an equally valid execution; the concurrency the row permits is
/// exactly the incomparability left in `order`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalTrace {
    pub events: Vec<BoundaryEvent>,
    pub order: Vec<(usize, usize)>,
    pub linearization: Vec<usize>,
}

impl CausalTrace {
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The events in execution order.
    pub fn linearized(&self) -> impl Iterator<Item = &BoundaryEvent> + '_ {
        self.linearization.iter().map(|&i| &self.events[i])
    }
}

impl fmt::Display for CausalTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, event) in self.linearized().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{event}")?;
        }
        Ok(())
    }
}

/// Failures of row composition and trace extraction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulateError {
    /// Adjacent cells do not share a boundary; `index` names the left
    /// cell of the failed joint.
    #[error("cell {index} ends in {left} but its right neighbour starts with {right}")]
    BoundaryClash {
        index: usize,
        left: ExchangeType,
        right: ExchangeType,
    },
    /// The dependency relation is cyclic. The witness lists the events
    /// of one cycle in dependency order.
    #[error("hand-offs form a dependency cycle: {}", cycle_line(.cycle))]
    CausalCycle { cycle: Vec<BoundaryEvent> },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

fn cycle_line(cycle: &[BoundaryEvent]) -> String {
    let stops: Vec<String> = cycle
        .iter()
        .map(|e| format!("({}, {})", e.boundary_index, e.ordinal))
        .collect();
    stops.join(" -> ")
}

/// How [`compose_row`] treats boundary mismatches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdapterMode {
    /// Adjacent boundaries must match syntactically.
    #[default]
    Exact,
    /// Boundaries that agree up to unit padding and regrouping of
    /// like-polarity atoms are joined by the canonical adapter cell.
    Lemma,
}

/// Pastes cells into a row, left to right.
///
/// [`AdapterMode::Exact`] requires adjacent boundaries to match
/// syntactically. [`AdapterMode::Lemma`] also accepts neighbours whose
/// protocols have the same canonical form, splicing in the adapter
/// cell; the adapter relays every hand-off, so the material history of
/// the row is unchanged. A join that fails either way is reported as
/// [`SimulateError::BoundaryClash`]. The empty row composes to the
/// empty cell.
pub fn compose_row(
    theory: &Theory,
    cells: &[CellTerm],
    mode: AdapterMode,
) -> Result<CellTerm, SimulateError> {
    let mut row = CellTerm::empty();
    let mut prev = 0;
    for (index, cell) in cells.iter().enumerate() {
        if !row.is_empty_cell() && !cell.is_empty_cell() && row.right() != cell.left() {
            let repair = match mode {
                AdapterMode::Exact => None,
                AdapterMode::Lemma => adapter(theory, row.right(), cell.left()),
            };
            let Some(joint) = repair else {
                return Err(SimulateError::BoundaryClash {
                    index: prev,
                    left: row.right().clone(),
                    right: cell.left().clone(),
                });
            };
            row = CellTerm::hcomp(row, joint).expect("adapter starts at the row's right edge");
        }
        row = CellTerm::hcomp(row, cell.clone()).expect("boundaries agree at this joint");
        if !cell.is_empty_cell() {
            prev = index;
        }
    }
    Ok(row)
}

/// A boundary position: index of the boundary, ordinal within it.
type Key = (usize, usize);

/// One participant's contribution to the protocol, in the top-to-bottom
/// order of its canonical schedule.
enum Step {
    /// A corner crossing the boundary at `key`; `sends` when the
    /// participant gives the material away rather than accepting it.
    Corner { key: Key, sends: bool },
    /// Material forwarded straight through the participant: it crosses
    /// `from`, then `to`.
    Relay { from: Key, to: Key },
}

/// A composite row split along its outermost horizontal pastings.
struct Analysis {
    /// Exchange types of the vertical boundaries, one more than there
    /// are participants.
    boundaries: Vec<ExchangeType>,
    /// Per-participant steps.
    threads: Vec<Vec<Step>>,
}

fn flatten_spine<'a>(c: &'a CellTerm, out: &mut Vec<&'a CellTerm>) {
    if let CellNode::HComp(a, b) = c.node() {
        flatten_spine(a, out);
        flatten_spine(b, out);
    } else {
        out.push(c);
    }
}

/// Splits the composite at its outermost horizontal pastings and
/// schedules each participant separately. Only the outermost pastings
/// count as protocol boundaries; deeper pastings are private to one
/// participant and their hand-offs never surface. Each participant is
/// canonicalized on its own, so hand-offs that would cancel across the
/// whole row still appear where its edges are crossed.
fn analyze(c: &CellTerm) -> Analysis {
    let mut cells = Vec::new();
    flatten_spine(c, &mut cells);
    let mut boundaries = vec![cells[0].left().clone()];
    for cell in &cells {
        boundaries.push(cell.right().clone());
    }
    let mut threads = Vec::new();
    for (t, cell) in cells.iter().enumerate() {
        let mut g = explode(cell);
        g.canonicalize();
        let mut steps = Vec::new();
        for row in schedule(&g) {
            match row.slice {
                SliceSpec::Corner(id) => {
                    let corner = &g.corners[&id];
                    if let HEnd::Boundary(ordinal) = corner.h {
                        let boundary = match corner.kind.side() {
                            Side::Left => t,
                            Side::Right => t + 1,
                        };
                        steps.push(Step::Corner {
                            key: (boundary, ordinal),
                            sends: corner.kind.consumes(),
                        });
                    }
                }
                SliceSpec::Relay(id) => {
                    let relay = &g.relays[&id];
                    let left = (t, relay.left_ord);
                    let right = (t + 1, relay.right_ord);
                    let (from, to) = match relay.pol {
                        Polarity::Circ => (left, right),
                        Polarity::Bullet => (right, left),
                    };
                    steps.push(Step::Relay { from, to });
                }
                _ => {}
            }
        }
        threads.push(steps);
    }
    Analysis {
        boundaries,
        threads,
    }
}

/// Extracts the hand-offs of a composite row and the causal order the
/// row imposes on them.
///
/// The composite is split at its outermost horizontal pastings; every
/// atom of every boundary protocol, outer edges included, is one event,
/// shared by the two sides that perform it. A cell with no pastings has
/// events only on its outer edges, so a lifted morphism has an empty
/// trace. The linearization is total, deterministic, and extends the
/// dependency order; a cyclic dependency is returned as
/// [`SimulateError::CausalCycle`] instead.
pub fn extract_trace(c: &CellTerm) -> Result<CausalTrace, SimulateError> {
    build_trace(&analyze(c))
}

fn build_trace(analysis: &Analysis) -> Result<CausalTrace, SimulateError> {
    let mut events = Vec::new();
    let mut index: BTreeMap<Key, usize> = BTreeMap::new();
    for (b, protocol) in analysis.boundaries.iter().enumerate() {
        for (o, factor) in protocol.factors().iter().enumerate() {
            index.insert((b, o), events.len());
            events.push(BoundaryEvent {
                boundary_index: b,
                ordinal: o,
                object: factor.object.clone(),
                direction: factor.polarity.into(),
            });
        }
    }
    let mut deps = BTreeSet::new();
    for (b, protocol) in analysis.boundaries.iter().enumerate() {
        for o in 1..protocol.len() {
            deps.insert((index[&(b, o - 1)], index[&(b, o)]));
        }
    }
    for steps in &analysis.threads {
        let mut prev = None;
        for step in steps {
            match step {
                Step::Corner { key, .. } => {
                    let here = index[key];
                    if let Some(before) = prev {
                        deps.insert((before, here));
                    }
                    prev = Some(here);
                }
                Step::Relay { from, to } => {
                    deps.insert((index[from], index[to]));
                }
            }
        }
    }
    let order: Vec<(usize, usize)> = deps.into_iter().collect();
    let linearization = linearize(&events, &order)?;
    Ok(CausalTrace {
        events,
        order,
        linearization,
    })
}

/// Ranks every event by its longest chain of dependencies and sorts by
/// rank, boundary, ordinal. The result extends `order`: a dependency
/// strictly increases the rank.
fn linearize(events: &[BoundaryEvent], order: &[(usize, usize)]) -> Result<Vec<usize>, SimulateError> {
    let n = events.len();
    let mut succs = vec![Vec::new(); n];
    let mut pending = vec![0usize; n];
    for &(a, b) in order {
        succs[a].push(b);
        pending[b] += 1;
    }
    let mut rank = vec![0usize; n];
    let mut ready: VecDeque<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut fired = 0;
    while let Some(i) = ready.pop_front() {
        fired += 1;
        for &j in &succs[i] {
            rank[j] = rank[j].max(rank[i] + 1);
            pending[j] -= 1;
            if pending[j] == 0 {
                ready.push_back(j);
            }
        }
    }
    if fired < n {
        return Err(SimulateError::CausalCycle {
            cycle: cycle_witness(events, order, &pending),
        });
    }
    let mut linearization: Vec<usize> = (0..n).collect();
    linearization.sort_by_key(|&i| (rank[i], events[i].boundary_index, events[i].ordinal));
    Ok(linearization)
}

/// Recovers one cycle from the events left over after a failed
/// topological sort. Every leftover event has a leftover dependency, so
/// walking dependencies backwards must revisit some event; the walk
/// between the two visits, reversed, is a cycle in dependency order.
fn cycle_witness(
    events: &[BoundaryEvent],
    order: &[(usize, usize)],
    pending: &[usize],
) -> Vec<BoundaryEvent> {
    let stuck: BTreeSet<usize> = (0..events.len()).filter(|&i| pending[i] > 0).collect();
    let mut preds: BTreeMap<usize, usize> = BTreeMap::new();
    for &(a, b) in order {
        if stuck.contains(&a) && stuck.contains(&b) {
            let best = preds.entry(b).or_insert(a);
            *best = (*best).min(a);
        }
    }
    let mut cur = *stuck.iter().next().expect("a failed sort leaves events over");
    let mut path = vec![cur];
    let mut seen_at: BTreeMap<usize, usize> = BTreeMap::new();
    seen_at.insert(cur, 0);
    loop {
        let back = preds[&cur];
        if let Some(&at) = seen_at.get(&back) {
            let mut cycle = path[at..].to_vec();
            cycle.reverse();
            return cycle.into_iter().map(|i| events[i].clone()).collect();
        }
        seen_at.insert(back, path.len());
        path.push(back);
        cur = back;
    }
}

/// Runs a closed row: the material history it denotes together with the
/// causal trace of its hand-offs.
///
/// The composite must be vertical, so every hand-off happens across an
/// internal boundary and the corners pair up completely. The history is
/// the vertical extraction of the whole composite; the trace records
/// how the participants cooperated to produce it. Both answers depend
/// only on the composite, so re-slicing the row changes neither.
pub fn run(
    theory: &Theory,
    c: &CellTerm,
    opts: &RewriteOptions,
) -> Result<(MorphismTerm, CausalTrace), SimulateError> {
    let history = eval_vertical(theory, c, opts)?;
    let trace = extract_trace(c)?;
    Ok((history, trace))
}

/// How long a replay worker waits on one hand-off before giving up.
const REPLAY_PATIENCE: Duration = Duration::from_secs(5);

/// A worker's endpoints at one boundary: material goes out through `tx`
/// and comes in through `rx`.
struct Post {
    tx: mpsc::Sender<ObjectWord>,
    rx: mpsc::Receiver<ObjectWord>,
}

type Script = Vec<(BoundaryEvent, bool)>;

fn perform(script: Script, posts: BTreeMap<usize, Post>, log: Arc<Mutex<Vec<BoundaryEvent>>>) {
    for (event, sends) in script {
        let post = posts
            .get(&event.boundary_index)
            .expect("scripts touch only the worker's own boundaries");
        if sends {
            post.tx
                .send(event.object.clone())
                .expect("the accepting side outlives the hand-off");
        } else {
            let got = post
                .rx
                .recv_timeout(REPLAY_PATIENCE)
                .expect("the giving side delivers before the deadline");
            assert_eq!(got, event.object, "a boundary delivered the wrong material");
            log.lock().expect("no worker panics while logging").push(event);
        }
    }
}

/// Replays the row's hand-offs on operating-system threads: one worker
/// per participant, one bidirectional ordered channel per boundary, and
/// a harness worker for each open outer edge. Workers follow their own
/// top-to-bottom schedules with no shared clock, blocking on every
/// receive, and each hand-off is logged when its material arrives.
///
/// Returns the hand-offs in completion order: the same events as
/// [`extract_trace`], with each boundary crossed in ordinal order. The
/// interleaving across boundaries is whatever the scheduler produced,
/// which is the point of the demonstration: the row terminates under
/// any interleaving the causal order allows. A cyclic dependency is
/// reported before any thread starts; a worker stalled longer than five
/// seconds panics, which an acyclic trace never causes.
pub fn replay_concurrently(c: &CellTerm) -> Result<Vec<BoundaryEvent>, SimulateError> {
    let analysis = analyze(c);
    let trace = build_trace(&analysis)?;
    let mut by_key: BTreeMap<Key, BoundaryEvent> = BTreeMap::new();
    for event in &trace.events {
        by_key.insert((event.boundary_index, event.ordinal), event.clone());
    }

    let mut scripts: Vec<Script> = Vec::new();
    for steps in &analysis.threads {
        let mut script = Script::new();
        for step in steps {
            match step {
                Step::Corner { key, sends } => script.push((by_key[key].clone(), *sends)),
                Step::Relay { from, to } => {
                    script.push((by_key[from].clone(), false));
                    script.push((by_key[to].clone(), true));
                }
            }
        }
        scripts.push(script);
    }

    // Two half-channels per boundary; the worker on each side gets one
    // sender and one receiver.
    let last = analysis.boundaries.len() - 1;
    let mut left_posts = Vec::new();
    let mut right_posts = Vec::new();
    for _ in 0..=last {
        let (ltx, lrx) = mpsc::channel();
        let (rtx, rrx) = mpsc::channel();
        left_posts.push(Some(Post { tx: ltx, rx: rrx }));
        right_posts.push(Some(Post { tx: rtx, rx: lrx }));
    }

    let mut workers: Vec<(Script, BTreeMap<usize, Post>)> = Vec::new();
    for (t, script) in scripts.into_iter().enumerate() {
        let mut posts = BTreeMap::new();
        posts.insert(t, right_posts[t].take().expect("each endpoint is handed out once"));
        posts.insert(
            t + 1,
            left_posts[t + 1].take().expect("each endpoint is handed out once"),
        );
        workers.push((script, posts));
    }
    // Harness workers feed the open outer edges in protocol order.
    if !analysis.boundaries[0].is_unit() {
        let script: Script = analysis.boundaries[0]
            .factors()
            .iter()
            .enumerate()
            .map(|(o, f)| (by_key[&(0, o)].clone(), f.polarity == Polarity::Circ))
            .collect();
        let mut posts = BTreeMap::new();
        posts.insert(0, left_posts[0].take().expect("the outer left edge is free"));
        workers.push((script, posts));
    }
    if !analysis.boundaries[last].is_unit() {
        let script: Script = analysis.boundaries[last]
            .factors()
            .iter()
            .enumerate()
            .map(|(o, f)| (by_key[&(last, o)].clone(), f.polarity == Polarity::Bullet))
            .collect();
        let mut posts = BTreeMap::new();
        posts.insert(
            last,
            right_posts[last].take().expect("the outer right edge is free"),
        );
        workers.push((script, posts));
    }

    let log = Arc::new(Mutex::new(Vec::new()));
    let mut handles = Vec::new();
    for (script, posts) in workers {
        let log = Arc::clone(&log);
        handles.push(thread::spawn(move || perform(script, posts, log)));
    }
    for handle in handles {
        handle.join().expect("replay worker finished cleanly");
    }
    let observed = Arc::try_unwrap(log)
        .expect("all workers are done with the log")
        .into_inner()
        .expect("the log outlived every worker");
    Ok(observed)
}
