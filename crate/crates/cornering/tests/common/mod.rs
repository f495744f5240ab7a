//! Shared fixtures and independent oracles for the integration tests.

#![allow(dead_code)]

pub mod moves;
pub mod oracle;
pub mod rnf_oracle;

use cornering::theory::{ArrowDecl, Equation};
use cornering::{CellTerm, MorphismTerm, ObjectWord, Theory, TheoryPresentation};

pub fn w(name: &str) -> ObjectWord {
    ObjectWord::single(name)
}

pub fn ww(names: &[&str]) -> ObjectWord {
    ObjectWord::from_names(names.iter().copied())
}

/// The baking theory: five objects and the arrows mix, knead, bake.
pub fn baking_presentation() -> TheoryPresentation {
    TheoryPresentation::new("Baking")
        .object("bread")
        .object("dough")
        .object("water")
        .object("flour")
        .object("oven")
        .arrow("mix", ww(&["water", "flour"]), w("dough"))
        .arrow("knead", w("dough"), w("dough"))
        .arrow("bake", ww(&["dough", "oven"]), ww(&["bread", "oven"]))
}

pub fn baking_theory() -> Theory {
    baking_presentation()
        .validate()
        .expect("baking fixture is valid")
}

/// Shorthand for a generator term of a presentation.
pub fn gen(p: &TheoryPresentation, name: &str) -> MorphismTerm {
    MorphismTerm::generator(p, name).expect("declared generator")
}

pub fn seq(f: MorphismTerm, g: MorphismTerm) -> MorphismTerm {
    MorphismTerm::seq(f, g).expect("composable")
}

pub fn tensor(f: MorphismTerm, g: MorphismTerm) -> MorphismTerm {
    MorphismTerm::tensor(f, g)
}

pub fn id(word: ObjectWord) -> MorphismTerm {
    MorphismTerm::identity(word)
}

pub fn braid(a: ObjectWord, b: ObjectWord) -> MorphismTerm {
    MorphismTerm::braid(a, b)
}

/// Sequential composite of a nonempty list of steps.
pub fn chain(steps: impl IntoIterator<Item = MorphismTerm>) -> MorphismTerm {
    let mut steps = steps.into_iter();
    let first = steps.next().expect("chain of at least one step");
    steps.fold(first, seq)
}

/// Three cooperating kitchen cells, composable left to right: a mixer
/// that turns water into dough using flour obtained from its right and
/// sends the dough on; a baker that relays flour leftward, bakes the
/// dough it receives, and sends the bread rightward; and a trader that
/// gives its flour away and accepts bread in return.
pub fn kitchen_row() -> [CellTerm; 3] {
    let p = baking_presentation();
    let mixer = CellTerm::stack([
        CellTerm::beside([CellTerm::vid(w("water")), CellTerm::recv_right(w("flour"))]).unwrap(),
        CellTerm::lift(gen(&p, "mix")),
        CellTerm::send_right(w("dough")),
    ])
    .unwrap();
    let baker = CellTerm::stack([
        CellTerm::beside([CellTerm::vid(w("oven")), CellTerm::recv_right(w("flour"))]).unwrap(),
        CellTerm::lift(braid(w("oven"), w("flour"))),
        CellTerm::beside([CellTerm::send_left(w("flour")), CellTerm::vid(w("oven"))]).unwrap(),
        CellTerm::beside([CellTerm::recv_left(w("dough")), CellTerm::vid(w("oven"))]).unwrap(),
        CellTerm::lift(gen(&p, "bake")),
        CellTerm::lift(braid(w("bread"), w("oven"))),
        CellTerm::beside([CellTerm::vid(w("oven")), CellTerm::send_right(w("bread"))]).unwrap(),
    ])
    .unwrap();
    let trader = CellTerm::stack([
        CellTerm::send_left(w("flour")),
        CellTerm::recv_left(w("bread")),
    ])
    .unwrap();
    [mixer, baker, trader]
}

/// The material history the kitchen row denotes: route the flour to the
/// water, mix, bake, and put the oven back first.
pub fn kitchen_history() -> MorphismTerm {
    let p = baking_presentation();
    seq(
        seq(
            seq(
                tensor(id(w("water")), braid(w("oven"), w("flour"))),
                tensor(gen(&p, "mix"), id(w("oven"))),
            ),
            gen(&p, "bake"),
        ),
        braid(w("bread"), w("oven")),
    )
}

/// The two interleavings of baking two loaves with one oven: loaves
/// prepared in parallel and baked as the oven frees up, versus the first
/// loaf finished entirely before the second is started.
pub fn two_loaf_schedules() -> (MorphismTerm, MorphismTerm) {
    let p = baking_presentation();
    let batch = || seq(gen(&p, "mix"), gen(&p, "knead"));

    let interleaved = seq(
        seq(
            seq(
                seq(
                    tensor(tensor(batch(), batch()), id(w("oven"))),
                    tensor(id(w("dough")), braid(w("dough"), w("oven"))),
                ),
                tensor(gen(&p, "bake"), id(w("dough"))),
            ),
            tensor(id(w("bread")), braid(w("oven"), w("dough"))),
        ),
        tensor(id(w("bread")), gen(&p, "bake")),
    );

    let sequential = seq(
        seq(
            seq(
                seq(
                    seq(
                        tensor(batch(), id(ww(&["water", "flour", "oven"]))),
                        tensor(id(w("dough")), braid(ww(&["water", "flour"]), w("oven"))),
                    ),
                    tensor(gen(&p, "bake"), id(ww(&["water", "flour"]))),
                ),
                tensor(id(ww(&["bread", "oven"])), batch()),
            ),
            tensor(id(w("bread")), braid(w("oven"), w("dough"))),
        ),
        tensor(id(w("bread")), gen(&p, "bake")),
    );

    (interleaved, sequential)
}

/// The market theory: baking plus a coin object, marked for compact
/// closure but not yet dualized.
pub fn market_presentation() -> TheoryPresentation {
    let mut p = baking_presentation();
    p.name = "Market".into();
    p.object("$1").compact()
}

pub fn market_theory() -> Theory {
    market_presentation()
        .validate()
        .expect("market fixture is valid")
}

/// The market theory extended by hand with a dual object, a unit, and a
/// counit for every generator, plus both zig-zag equations oriented as
/// reductions. Automated dualization is expected to reproduce exactly
/// this presentation.
pub fn credit_presentation() -> TheoryPresentation {
    let mut p = market_presentation();
    let originals = p.objects.clone();
    for g in &originals {
        p.objects.push(format!("{g}'"));
    }
    for g in &originals {
        let base = w(g);
        let dual = w(&format!("{g}'"));
        p.arrows.push(ArrowDecl {
            name: format!("{g}_eta"),
            dom: ObjectWord::unit(),
            cod: base.tensor(&dual),
        });
        p.arrows.push(ArrowDecl {
            name: format!("{g}_eps"),
            dom: dual.tensor(&base),
            cod: ObjectWord::unit(),
        });
    }
    for g in &originals {
        let base = w(g);
        let dual = w(&format!("{g}'"));
        let eta = gen(&p, &format!("{g}_eta"));
        let eps = gen(&p, &format!("{g}_eps"));
        p.equations.push(Equation {
            name: Some(format!("{g}_snake")),
            lhs: seq(
                tensor(eta.clone(), id(base.clone())),
                tensor(id(base.clone()), eps.clone()),
            ),
            rhs: id(base),
        });
        p.equations.push(Equation {
            name: Some(format!("{g}_snake_dual")),
            lhs: seq(tensor(id(dual.clone()), eta), tensor(eps, id(dual.clone()))),
            rhs: id(dual),
        });
    }
    p
}

pub fn credit_theory() -> Theory {
    credit_presentation()
        .validate()
        .expect("credit fixture is valid")
}

/// A market row bought on credit, composable left to right: a flour
/// seller that hands its flour over for a coin; a baker with no money
/// that conjures a coin against a matching debt, buys flour, bakes, and
/// sells the bread for two coins, settling the debt with the first and
/// keeping the second; and a bread buyer that pays twice for one loaf.
pub fn debit_row() -> [CellTerm; 3] {
    let p = credit_presentation();
    let coin = w("$1");
    let iou = w("$1'");
    let seller = CellTerm::stack([
        CellTerm::beside([
            CellTerm::vid(w("flour")),
            CellTerm::recv_right(coin.clone()),
        ])
        .unwrap(),
        CellTerm::lift(braid(w("flour"), coin.clone())),
        CellTerm::beside([
            CellTerm::vid(coin.clone()),
            CellTerm::send_right(w("flour")),
        ])
        .unwrap(),
    ])
    .unwrap();
    let baker = CellTerm::stack([
        CellTerm::lift(tensor(gen(&p, "$1_eta"), id(ww(&["water", "oven"])))),
        CellTerm::beside([
            CellTerm::send_left(coin.clone()),
            CellTerm::vid(ww(&["$1'", "water", "oven"])),
        ])
        .unwrap(),
        CellTerm::beside([
            CellTerm::recv_left(w("flour")),
            CellTerm::vid(ww(&["$1'", "water", "oven"])),
        ])
        .unwrap(),
        CellTerm::lift(tensor(
            braid(w("flour"), ww(&["$1'", "water"])),
            id(w("oven")),
        )),
        CellTerm::lift(tensor(
            tensor(id(iou.clone()), gen(&p, "mix")),
            id(w("oven")),
        )),
        CellTerm::lift(tensor(id(iou.clone()), gen(&p, "bake"))),
        CellTerm::lift(tensor(id(iou.clone()), braid(w("bread"), w("oven")))),
        CellTerm::beside([
            CellTerm::vid(ww(&["$1'", "oven"])),
            CellTerm::send_right(w("bread")),
        ])
        .unwrap(),
        CellTerm::beside([
            CellTerm::vid(ww(&["$1'", "oven"])),
            CellTerm::recv_right(coin.clone()),
        ])
        .unwrap(),
        CellTerm::lift(tensor(id(iou.clone()), braid(w("oven"), coin.clone()))),
        CellTerm::lift(tensor(gen(&p, "$1_eps"), id(w("oven")))),
        CellTerm::beside([CellTerm::vid(w("oven")), CellTerm::recv_right(coin.clone())]).unwrap(),
        CellTerm::lift(braid(w("oven"), coin.clone())),
    ])
    .unwrap();
    let buyer = CellTerm::stack([
        CellTerm::beside([
            CellTerm::recv_left(w("bread")),
            CellTerm::vid(ww(&["$1", "$1"])),
        ])
        .unwrap(),
        CellTerm::lift(tensor(braid(w("bread"), coin.clone()), id(coin.clone()))),
        CellTerm::beside([
            CellTerm::send_left(coin.clone()),
            CellTerm::vid(ww(&["bread", "$1"])),
        ])
        .unwrap(),
        CellTerm::lift(braid(w("bread"), coin.clone())),
        CellTerm::beside([CellTerm::send_left(coin), CellTerm::vid(w("bread"))]).unwrap(),
    ])
    .unwrap();
    [seller, baker, buyer]
}

/// The material history the debit row denotes, written with the debt
/// still open: a unit conjures the coin pair, the baked bread changes
/// hands, and the counit retires the debt against the buyer's first
/// coin.
pub fn debit_history() -> MorphismTerm {
    let p = credit_presentation();
    let coin = w("$1");
    let two = ww(&["$1", "$1"]);
    let pair = ww(&["$1", "$1'"]);
    chain([
        tensor(
            gen(&p, "$1_eta"),
            id(ww(&["flour", "water", "oven", "$1", "$1"])),
        ),
        tensor(
            id(pair.clone()),
            tensor(braid(w("flour"), w("water")), id(ww(&["oven", "$1", "$1"]))),
        ),
        tensor(
            id(pair.clone()),
            tensor(gen(&p, "mix"), id(ww(&["oven", "$1", "$1"]))),
        ),
        tensor(id(pair.clone()), tensor(gen(&p, "bake"), id(two.clone()))),
        tensor(
            id(pair),
            tensor(
                braid(ww(&["bread", "oven"]), coin.clone()),
                id(coin.clone()),
            ),
        ),
        tensor(
            tensor(id(coin.clone()), gen(&p, "$1_eps")),
            id(ww(&["bread", "oven", "$1"])),
        ),
        tensor(id(coin), braid(ww(&["bread", "oven"]), w("$1"))),
        tensor(id(two), braid(w("bread"), w("oven"))),
    ])
}

/// The same history with the coin pair cancelled: the buyer's first coin
/// flows straight through to the seller and no trace of the debt
/// remains. Expressible in the bare market theory.
pub fn settled_history() -> MorphismTerm {
    let p = market_presentation();
    let two = ww(&["$1", "$1"]);
    chain([
        tensor(braid(w("flour"), w("water")), id(ww(&["oven", "$1", "$1"]))),
        tensor(gen(&p, "mix"), id(ww(&["oven", "$1", "$1"]))),
        tensor(gen(&p, "bake"), id(two.clone())),
        braid(ww(&["bread", "oven"]), two.clone()),
        tensor(id(two), braid(w("bread"), w("oven"))),
    ])
}
