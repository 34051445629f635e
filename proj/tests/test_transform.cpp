#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mopic/transform.hpp>

using namespace mopic;

namespace {

Diagram two_loops(LoopId* l1 = nullptr, LoopId* l2 = nullptr) {
    Diagram d;
    BlockId b = d.new_block();
    LoopId a = add_free_loop(d, b);
    LoopId c = add_free_loop(d, b);
    if (l1) *l1 = a;
    if (l2) *l2 = c;
    return d;
}

}  // namespace

TEST_CASE("birth then death round trips to the empty diagram") {
    Diagram d;
    Birth birth;
    birth.groups.push_back({2, std::nullopt});
    auto det = apply_detail(d, birth);
    CHECK(det.result.loops().size() == 2);
    CHECK(det.events.births == 2);

    Death death;
    death.loops = det.note.born_loops;
    auto [after, ev] = mopic::apply(det.result, death);
    CHECK(after.empty());
    CHECK(ev.deaths == 2);
}

TEST_CASE("death refuses loops in hopf blocks") {
    Diagram d;
    add_hopf_template(d, Sign::plus);
    LoopId l = add_free_loop(d);
    Death death;
    death.loops = {l};
    CHECK(validate(d, death).ok());

    // force the loop into the hopf block: invalid diagram state for death
    Diagram d2;
    BlockId hb = add_hopf_template(d2, Sign::plus);
    FreeLoop fl;
    fl.edge = d2.new_edge();
    fl.block = hb;
    LoopId l2 = d2.new_loop_id();
    d2.put_loop(l2, fl);
    Death death2;
    death2.loops = {l2};
    CHECK_FALSE(validate(d2, death2).ok());
}

TEST_CASE("crossing change toggles and records the new sign") {
    Diagram d;
    add_hopf_template(d, Sign::plus);
    CrossingId c = d.crossings().begin()->first;
    CrossingChange t;
    t.crossings = {c};
    auto det = apply_detail(d, t);
    CHECK(crossing_sign(det.result, c) == Sign::minus);
    REQUIRE(det.events.double_points.size() == 1);
    CHECK(det.events.double_points[0] == Sign::minus);

    // toggle twice restores the diagram exactly
    auto det2 = apply_detail(det.result, t);
    CHECK(isomorphic(det2.result, d));
    CHECK(det2.events.double_points[0] == Sign::plus);

    // toggling one crossing of the template yields the clasp pattern
    Diagram clasp;
    add_clasp_template(clasp, Sign::plus);
    CHECK(isomorphic(det.result, clasp));
}

TEST_CASE("hopf split and merge") {
    LoopId l1, l2;
    Diagram d = two_loops(&l1, &l2);
    BlockId b = d.loop(l1).block;

    HopfMerge merge;
    merge.blocks = {{b, Sign::plus}};
    auto det = apply_detail(d, merge);
    CHECK(is_hopf_block(det.result, b) == Sign::plus);
    REQUIRE(det.events.double_points.size() == 1);
    CHECK(det.events.double_points[0] == Sign::plus);

    HopfSplit split;
    split.blocks = {{b, Sign::plus}};
    auto det2 = apply_detail(det.result, split);
    CHECK(det2.result.crossings().empty());
    CHECK(det2.result.loops().size() == 2);
    CHECK(det2.events.double_points[0] == Sign::minus);
    CHECK(isomorphic(det2.result, d));

    // wrong sign rejected
    HopfSplit wrong;
    wrong.blocks = {{b, Sign::minus}};
    CHECK_FALSE(validate(det.result, wrong).ok());
}

TEST_CASE("the four double point sign statements") {
    // split(+) -> -, split(-) -> +, merge(+) -> +, merge(-) -> -
    for (Sign s : {Sign::plus, Sign::minus}) {
        LoopId l1, l2;
        Diagram d = two_loops(&l1, &l2);
        BlockId b = d.loop(l1).block;
        auto det = apply_detail(d, HopfMerge{{{b, s}}});
        CHECK(det.events.double_points[0] == s);
        auto det2 = apply_detail(det.result, HopfSplit{{{b, s}}});
        CHECK(det2.events.double_points[0] == -s);
    }
}

TEST_CASE("hopf split works on the alternating presentation") {
    Diagram d;
    BlockId b = add_hopf_alternating(d, Sign::minus);
    HopfSplit split;
    split.blocks = {{b, Sign::minus}};
    auto det = apply_detail(d, split);
    CHECK(det.result.crossings().empty());
    CHECK(det.result.loops().size() == 2);
    CHECK(det.events.double_points[0] == Sign::plus);
}

TEST_CASE("twisted fission band on a free loop yields the positive hopf template") {
    Diagram d;
    LoopId l = add_free_loop(d);
    EdgeId e = d.loop(l).edge;
    Band band;
    band.attach1 = band.attach2 = e;
    band.core = {CoreEvent{CoreKind::twist, EdgeId{}, Sign::plus}};
    band.block = BlockId{d.next_block_counter()};
    Surgery1 t;
    t.bands = {band};
    auto det = apply_detail(d, t);
    CHECK(det.events.bands == 1);
    CHECK(det.result.crossings().size() == 2);
    CHECK(trace_components(det.result).size() == 2);

    Diagram want;
    add_hopf_template(want, Sign::plus);
    CHECK(isomorphic(det.result, want));

    REQUIRE(det.result.blocks().size() == 1);
    BlockId hb = det.result.blocks().begin()->first;
    CHECK(is_hopf_block(det.result, hb) == Sign::plus);
}

TEST_CASE("negative twist gives the negative hopf template") {
    Diagram d;
    LoopId l = add_free_loop(d);
    Band band;
    band.attach1 = band.attach2 = d.loop(l).edge;
    band.core = {CoreEvent{CoreKind::twist, EdgeId{}, Sign::minus}};
    band.block = BlockId{d.next_block_counter()};
    auto det = apply_detail(d, Surgery1{{band}});
    Diagram want;
    add_hopf_template(want, Sign::minus);
    CHECK(isomorphic(det.result, want));
}

TEST_CASE("plain band between two loops fuses them") {
    LoopId l1, l2;
    Diagram d = two_loops(&l1, &l2);
    Band band;
    band.attach1 = d.loop(l1).edge;
    band.attach2 = d.loop(l2).edge;
    band.block = d.loop(l1).block;
    auto det = apply_detail(d, Surgery1{{band}});
    CHECK(trace_components(det.result).size() == 1);
    CHECK(det.result.crossings().empty());
    CHECK(det.result.loops().size() == 1);

    // dual band splits it back into two loops
    const BandNote& bn = det.note.bands[0];
    Band dual;
    dual.attach1 = bn.dual1;
    dual.attach2 = bn.dual2;
    dual.block = det.result.loops().begin()->second.block;
    auto det2 = apply_detail(det.result, Surgery1{{dual}});
    CHECK(isomorphic(det2.result, d));
}

TEST_CASE("fusion band between open strands is undone by the same band") {
    // hopf template plus a distant loop; fuse the loop onto one template edge
    Diagram d;
    add_hopf_template(d, Sign::plus);
    LoopId l = add_free_loop(d);
    EdgeId le = d.loop(l).edge;
    EdgeId te = d.crossings().begin()->second.slots[0];
    Band band;
    band.attach1 = te;
    band.attach2 = le;
    band.block = d.block_of_edge(te);
    auto det = apply_detail(d, Surgery1{{band}});
    CHECK(trace_components(det.result).size() == 2);
    // invert: dual feet
    Inverse inv = invert(Surgery1{{band}}, det.note);
    CHECK_FALSE(inv.cleanup.has_value());
    auto det2 = apply_detail(det.result, inv.step);
    CHECK(isomorphic(det2.result, d));
}

TEST_CASE("inverting a twisted fission needs r1 cleanup") {
    Diagram d;
    LoopId l = add_free_loop(d);
    Band band;
    band.attach1 = band.attach2 = d.loop(l).edge;
    band.core = {CoreEvent{CoreKind::twist, EdgeId{}, Sign::plus}};
    band.block = BlockId{d.next_block_counter()};
    Surgery1 t{{band}};
    auto det = apply_detail(d, t);

    Inverse inv = invert(t, det.note);
    REQUIRE(inv.cleanup.has_value());
    auto det2 = apply_detail(det.result, inv.step);
    auto det3 = apply_detail(det2.result, *inv.cleanup);
    CHECK(isomorphic(det3.result, d));
}

TEST_CASE("cross-over core events insert cancelling crossing pairs") {
    LoopId l1, l2;
    Diagram d = two_loops(&l1, &l2);
    LoopId l3 = add_free_loop(d);
    Band band;
    band.attach1 = d.loop(l1).edge;
    band.attach2 = d.loop(l2).edge;
    band.core = {CoreEvent{CoreKind::cross_over, d.loop(l3).edge, Sign::plus}};
    band.block = d.loop(l1).block;
    auto det = apply_detail(d, Surgery1{{band}});
    CHECK(det.result.crossings().size() == 2);
    int plus = 0, minus = 0;
    for (const auto& [id, x] : det.result.crossings())
        (crossing_sign(det.result, id) == Sign::plus ? plus : minus)++;
    CHECK(plus == 1);
    CHECK(minus == 1);
    // the crossed loop is still its own component, now with crossings
    CHECK(trace_components(det.result).size() == 2);
}

TEST_CASE("bands sharing attach edges are rejected") {
    LoopId l1, l2;
    Diagram d = two_loops(&l1, &l2);
    Band b1;
    b1.attach1 = d.loop(l1).edge;
    b1.attach2 = d.loop(l2).edge;
    b1.block = d.loop(l1).block;
    Surgery1 t;
    t.bands = {b1, b1};
    CHECK_FALSE(validate(d, t).ok());
}

TEST_CASE("r1 moves insert and remove kinks") {
    Diagram d;
    LoopId l = add_free_loop(d);
    Isotopy iso;
    iso.moves = {R1Plus{d.loop(l).edge, Sign::plus}};
    auto det = apply_detail(d, iso);
    CHECK(det.result.crossings().size() == 1);
    CHECK(det.result.loops().empty());
    CrossingId k = det.result.crossings().begin()->first;
    CHECK(crossing_sign(det.result, k) == Sign::plus);

    Isotopy undo;
    undo.moves = {R1Minus{k}};
    auto det2 = apply_detail(det.result, undo);
    CHECK(isomorphic(det2.result, d));
}

TEST_CASE("r2 moves slide a strand over another and back") {
    LoopId l1, l2;
    Diagram d = two_loops(&l1, &l2);
    Isotopy iso;
    iso.moves = {R2Plus{d.loop(l1).edge, d.loop(l2).edge, true, Sign::plus}};
    auto det = apply_detail(d, iso);
    CHECK(det.result.crossings().size() == 2);
    CHECK(trace_components(det.result).size() == 2);
    CHECK(linking_number(det.result, ComponentId{0}, ComponentId{1}) == 0);

    auto pr = det.note.moves[0].r2_created;
    REQUIRE(pr.has_value());
    Isotopy undo;
    undo.moves = {R2Minus{pr->first, pr->second}};
    auto det2 = apply_detail(det.result, undo);
    CHECK(isomorphic(det2.result, d));
}

TEST_CASE("r2- rejects non-bigon pairs") {
    Diagram d;
    add_hopf_template(d, Sign::plus);
    auto it = d.crossings().begin();
    CrossingId c1 = it->first;
    CrossingId c2 = std::next(it)->first;
    Isotopy iso;
    iso.moves = {R2Minus{c1, c2}};
    CHECK_FALSE(validate(d, iso).ok());  // same sign: essential crossings
}

TEST_CASE("move to block declares split structure and retag flips scratch") {
    Diagram d;
    add_hopf_template(d, Sign::plus);
    LoopId l = add_free_loop(d);
    EdgeId hedge = d.crossings().begin()->second.slots[0];

    MoveToBlock mv;
    mv.members = {hedge};
    mv.block = BlockId{d.next_block_counter()};
    mv.scratch = true;
    Isotopy iso;
    iso.moves = {mv};
    auto det = apply_detail(d, iso);
    BlockId w = det.result.block_of_edge(hedge);
    CHECK(det.result.is_scratch(w));
    CHECK(det.result.block_tag(w) == BlockTag::hopf);
    CHECK(det.result.loop(l).block != w);

    Isotopy retag;
    retag.moves = {Retag{w, false}};
    auto det2 = apply_detail(det.result, retag);
    CHECK_FALSE(det2.result.is_scratch(w));
}

TEST_CASE("euler bookkeeping: single band changes component count by exactly one") {
    // merge case and split case
    LoopId l1, l2;
    Diagram d = two_loops(&l1, &l2);
    Band merge;
    merge.attach1 = d.loop(l1).edge;
    merge.attach2 = d.loop(l2).edge;
    merge.block = d.loop(l1).block;
    auto efter = mopic::apply(d, Surgery1{{merge}}).first;
    CHECK(trace_components(efter).size() == 1);

    Diagram s;
    LoopId sl = add_free_loop(s);
    Band split;
    split.attach1 = split.attach2 = s.loop(sl).edge;
    split.block = s.loop(sl).block;
    auto after2 = mopic::apply(s, Surgery1{{split}}).first;
    CHECK(trace_components(after2).size() == 2);
}

TEST_CASE("invert round trips for birth, hopf ops and crossing changes") {
    Diagram d;
    Birth birth;
    birth.groups.push_back({2, std::nullopt});
    auto det = apply_detail(d, birth);
    Inverse inv = invert(birth, det.note);
    auto back = apply_detail(det.result, inv.step);
    CHECK(back.result.empty());

    // invert(invert(t)) has the same kind as t
    Inverse inv2 = invert(inv.step, back.note);
    CHECK(std::holds_alternative<Birth>(inv2.step));
}
