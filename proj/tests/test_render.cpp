#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mopic/normalizer.hpp>
#include <mopic/render.hpp>

using namespace mopic;

namespace {

Sequence sphere() {
    Sequence s;
    Birth b;
    b.groups.push_back({1, std::nullopt});
    s.steps.push_back(b);
    Death d;
    d.loops = {LoopId{0}};
    s.steps.push_back(d);
    center_division(s, 1);
    return s;
}

int count_occurrences(const std::string& hay, const std::string& needle) {
    int n = 0;
    for (std::size_t at = hay.find(needle); at != std::string::npos;
         at = hay.find(needle, at + needle.size()))
        n++;
    return n;
}

}  // namespace

TEST_CASE("unknotted sphere renders three level frames plus two events") {
    auto fs = frames(sphere());
    // levels: empty, loop, empty; events: the birth and the death
    CHECK(fs.size() == 5);
    int level_frames = 0;
    for (const auto& f : fs)
        if (f.annotations.empty()) level_frames++;
    CHECK(level_frames == 3);
    // timestamps strictly increase
    for (std::size_t i = 0; i + 1 < fs.size(); ++i) CHECK(fs[i].time < fs[i + 1].time);
}

TEST_CASE("fig6-shaped sequence frame count") {
    // nine levels and four event frames (birth, band, split, death)
    Sequence s;
    Diagram d;
    auto push = [&](const Transformation& t) {
        d = mopic::apply(d, t).first;
        s.steps.push_back(t);
    };
    Birth b;
    b.groups.push_back({1, std::nullopt});
    push(b);
    push(HopfMerge{});
    push(Surgery1{});
    push(Surgery1{});
    push(Surgery1{});
    Band band;
    band.attach1 = band.attach2 = d.loops().begin()->second.edge;
    band.core = {CoreEvent{CoreKind::twist, EdgeId{}, Sign::plus}};
    band.block = BlockId{d.next_block_counter()};
    ApplyDetail det = apply_detail(d, Surgery1{{band}});
    BlockId hb = det.result.block_of_edge(det.note.bands[0].dual1);
    d = det.result;
    s.steps.push_back(Surgery1{{band}});
    push(HopfSplit{{{hb, Sign::plus}}});
    Death death;
    for (const auto& [id, l] : d.loops()) death.loops.push_back(id);
    push(death);
    center_division(s, 4);

    auto fs = frames(s);
    CHECK(fs.size() == 9 + 4);
}

TEST_CASE("svg is deterministic and breaks match crossings") {
    Sequence twin = montesinos_twin();
    auto fs = frames(twin);
    for (const auto& f : fs) {
        std::string a = to_svg(f);
        std::string b = to_svg(f);
        CHECK(a == b);
        CHECK(count_occurrences(a, "class=\"crossing\"") ==
              static_cast<int>(f.diagram.crossings().size()));
        CHECK(count_occurrences(a, "under-break") ==
              static_cast<int>(f.diagram.crossings().size()));
    }
    // hopf panels carry sign labels at the merge and split events
    bool saw_plus_label = false;
    for (const auto& f : fs)
        for (const auto& a : f.annotations)
            if (a.kind == Frame::Annotation::Kind::double_point && a.at_block)
                saw_plus_label = true;
    CHECK(saw_plus_label);
}

TEST_CASE("filenames encode index and timestamp") {
    auto fs = frames(sphere());
    CHECK(frame_filename(0, fs[0]) == "frame_0_-1.svg");
    // midpoint timestamps use 'd' for the slash
    bool found_fraction = false;
    for (std::size_t i = 0; i < fs.size(); ++i)
        if (frame_filename(i, fs[i]).find('d') != std::string::npos) found_fraction = true;
    CHECK(found_fraction);
}
