#include <mopic/dsl.hpp>

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace mopic {

namespace {

// --- tokenizer ------------------------------------------------------------------

struct Token {
    std::string text;
    SourceSpan span;
    bool punct = false;
};

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '+' || c == '-' ||
           c == '/';
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](char c) {
        if (c == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') {
                advance(text[i]);
                i++;
            }
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            advance(c);
            i++;
            continue;
        }
        SourceSpan sp{line, col, 1};
        if (c == '{' || c == '}' || c == '[' || c == ']' || c == '(' || c == ')' || c == ':' ||
            c == '=') {
            out.push_back({std::string(1, c), sp, true});
            advance(c);
            i++;
            continue;
        }
        if (word_char(c)) {
            std::string w;
            while (i < text.size() && word_char(text[i])) {
                w += text[i];
                advance(text[i]);
                i++;
            }
            sp.length = static_cast<int>(w.size());
            out.push_back({w, sp, false});
            continue;
        }
        throw SyntaxError(sp, std::string("unexpected character '") + c + "'");
    }
    return out;
}

// --- parser ----------------------------------------------------------------------

struct Parser {
    std::vector<Token> toks;
    std::size_t pos = 0;
    Diagram cur;  // replay state

    const Token& peek() {
        if (pos >= toks.size()) {
            static Token eof{"<eof>", {0, 0, 0}, true};
            if (!toks.empty()) eof.span = toks.back().span;
            return eof;
        }
        return toks[pos];
    }
    Token take() {
        Token t = peek();
        if (pos < toks.size()) pos++;
        return t;
    }
    bool at(const std::string& s) { return pos < toks.size() && toks[pos].text == s; }
    Token expect(const std::string& s) {
        Token t = take();
        if (t.text != s) throw SyntaxError(t.span, "expected '" + s + "', got '" + t.text + "'");
        return t;
    }

    long long parse_int(const std::string& w, const SourceSpan& sp) {
        std::size_t i = w[0] == '-' ? 1 : 0;
        if (i >= w.size()) throw SyntaxError(sp, "expected a number, got '" + w + "'");
        long long v = 0;
        for (; i < w.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(w[i])))
                throw SyntaxError(sp, "expected a number, got '" + w + "'");
            v = v * 10 + (w[i] - '0');
        }
        return w[0] == '-' ? -v : v;
    }

    Rat parse_rat() {
        Token t = take();
        auto slash = t.text.find('/');
        if (slash == std::string::npos) return Rat(parse_int(t.text, t.span));
        long long num = parse_int(t.text.substr(0, slash), t.span);
        long long den = parse_int(t.text.substr(slash + 1), t.span);
        if (den == 0) throw SyntaxError(t.span, "zero denominator");
        return Rat(num, den);
    }

    std::uint32_t parse_id_num(const Token& t, char prefix, const char* what) {
        if (t.text.size() < 2 || t.text[0] != prefix)
            throw SyntaxError(t.span, std::string("expected ") + what + ", got '" + t.text + "'");
        for (std::size_t i = 1; i < t.text.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(t.text[i])))
                throw SyntaxError(t.span,
                                  std::string("expected ") + what + ", got '" + t.text + "'");
        return static_cast<std::uint32_t>(parse_int(t.text.substr(1), t.span));
    }

    EdgeId parse_edge(bool must_exist = true) {
        Token t = take();
        EdgeId e{parse_id_num(t, 'e', "an edge id")};
        if (must_exist && !cur.has_edge(e))
            throw SemanticError(t.span, Violations{{"no edge " + t.text + " at this level"}});
        return e;
    }
    CrossingId parse_crossing() {
        Token t = take();
        CrossingId c{parse_id_num(t, 'x', "a crossing id")};
        if (!cur.has_crossing(c))
            throw SemanticError(t.span, Violations{{"no crossing " + t.text + " at this level"}});
        return c;
    }
    LoopId parse_loop() {
        Token t = take();
        LoopId l{parse_id_num(t, 'l', "a loop id")};
        if (!cur.has_loop(l))
            throw SemanticError(t.span, Violations{{"no loop " + t.text + " at this level"}});
        return l;
    }
    // fresh block names are allowed; returns (id, existed)
    std::pair<BlockId, bool> parse_block_ref() {
        Token t = take();
        BlockId b{parse_id_num(t, 'b', "a block id")};
        return {b, cur.has_block(b)};
    }

    Sign parse_sign() {
        Token t = take();
        if (t.text == "+") return Sign::plus;
        if (t.text == "-") return Sign::minus;
        throw SyntaxError(t.span, "expected '+' or '-', got '" + t.text + "'");
    }

    Sequence run() {
        Sequence s;
        expect("sequence");
        expect("{");
        expect("division");
        expect("=");
        expect("[");
        while (!at("]")) s.division.push_back(parse_rat());
        expect("]");
        expect("mid");
        expect("=");
        Token mt = take();
        s.mid = static_cast<std::size_t>(parse_int(mt.text, mt.span));

        while (!at("}")) {
            Token head = peek();
            Transformation t = parse_step();
            // collect fresh block refs to verify the written names materialize
            std::vector<BlockId> fresh = fresh_block_refs(t);
            try {
                cur = mopic::apply(cur, t).first;
            } catch (const PreconditionViolated& e) {
                throw SemanticError(head.span, e.report);
            } catch (const Error& e) {
                throw SemanticError(head.span, Violations{{e.what()}});
            }
            for (BlockId b : fresh)
                if (!cur.has_block(b))
                    throw SemanticError(
                        head.span,
                        Violations{{"block name b" + std::to_string(b.v) +
                                    " does not match the deterministic allocation"}});
            s.steps.push_back(std::move(t));
        }
        expect("}");
        if (pos != toks.size())
            throw SyntaxError(peek().span, "trailing input after the sequence");
        if (s.division.size() != s.steps.size() + 1)
            throw SemanticError(toks.empty() ? SourceSpan{} : toks.front().span,
                                Violations{{"division length must equal the number of levels"}});
        if (!cur.empty())
            throw SemanticError(toks.back().span,
                                Violations{{"sequence does not end at the empty diagram"}});
        return s;
    }

    std::vector<BlockId> fresh_block_refs(const Transformation& t) {
        std::vector<BlockId> out;
        auto add = [&](BlockId b) {
            if (!cur.has_block(b)) out.push_back(b);
        };
        if (const auto* b = std::get_if<Birth>(&t)) {
            for (const auto& g : b->groups)
                if (g.block) add(*g.block);
        } else if (const auto* s = std::get_if<Surgery1>(&t)) {
            for (const auto& band : s->bands) {
                add(band.block);
                if (band.split_block) add(*band.split_block);
            }
        } else if (const auto* iso = std::get_if<Isotopy>(&t)) {
            for (const auto& mv : iso->moves)
                if (const auto* m = std::get_if<MoveToBlock>(&mv)) add(m->block);
        }
        return out;
    }

    Transformation parse_step() {
        Token kw = take();
        if (kw.text == "birth") return parse_birth();
        if (kw.text == "death") return parse_death();
        if (kw.text == "bands") return parse_bands();
        if (kw.text == "isotopy") return parse_isotopy();
        if (kw.text == "xchange") return parse_xchange();
        if (kw.text == "hopfsplit") return parse_hopf(true);
        if (kw.text == "hopfmerge") return parse_hopf(false);
        throw SyntaxError(kw.span, "unknown step kind '" + kw.text + "'");
    }

    Transformation parse_birth() {
        expect("{");
        expect("loops");
        Token ct = take();
        long long count = parse_int(ct.text, ct.span);
        if (count < 1) throw SyntaxError(ct.span, "birth needs at least one loop");
        Birth b;
        if (at("blocks")) {
            take();
            expect("[");
            struct Ref {
                BlockId block;
                bool exists;
                bool scratch;
            };
            std::vector<Ref> refs;
            while (!at("]")) {
                auto [blk, exists] = parse_block_ref();
                bool scratch = false;
                if (at("scratch")) {
                    take();
                    scratch = true;
                }
                refs.push_back({blk, exists, scratch});
            }
            Token close = expect("]");
            if (static_cast<long long>(refs.size()) != count)
                throw SyntaxError(close.span, "blocks list must name one block per loop");
            std::set<BlockId> fresh_seen;
            for (std::size_t i = 0; i < refs.size();) {
                std::size_t j = i;
                while (j < refs.size() && refs[j].block == refs[i].block) j++;
                if (!refs[i].exists && !fresh_seen.insert(refs[i].block).second)
                    throw SyntaxError(close.span, "fresh block names must be contiguous");
                Birth::Group g;
                g.count = static_cast<std::uint32_t>(j - i);
                g.block = refs[i].block;
                g.scratch = refs[i].scratch;
                b.groups.push_back(g);
                i = j;
            }
        } else {
            Birth::Group g;
            g.count = static_cast<std::uint32_t>(count);
            b.groups.push_back(g);
        }
        expect("}");
        return b;
    }

    Transformation parse_death() {
        expect("{");
        expect("loops");
        expect("[");
        Death d;
        while (!at("]")) d.loops.push_back(parse_loop());
        expect("]");
        expect("}");
        return d;
    }

    Transformation parse_bands() {
        expect("{");
        Surgery1 s;
        Diagram scratch = cur;  // resolve band edges against the pre-step level
        while (at("band")) {
            take();
            expect("(");
            Band band;
            band.attach1 = parse_edge();
            band.attach2 = parse_edge();
            expect(")");
            if (at("core")) {
                take();
                expect("[");
                while (!at("]")) {
                    Token ev = take();
                    expect("(");
                    if (ev.text == "over" || ev.text == "under") {
                        CoreEvent e;
                        e.kind = ev.text == "over" ? CoreKind::cross_over : CoreKind::cross_under;
                        e.target = parse_edge();
                        band.core.push_back(e);
                    } else if (ev.text == "twist") {
                        CoreEvent e;
                        e.kind = CoreKind::twist;
                        e.sign = parse_sign();
                        band.core.push_back(e);
                    } else {
                        throw SyntaxError(ev.span, "unknown core event '" + ev.text + "'");
                    }
                    expect(")");
                }
                expect("]");
            }
            expect("into");
            band.block = parse_block_ref().first;
            if (at("scratch")) {
                take();
                band.block_scratch = true;
            }
            if (at("split")) {
                take();
                band.split_block = parse_block_ref().first;
                if (at("scratch")) {
                    take();
                    band.split_scratch = true;
                }
            }
            s.bands.push_back(band);
        }
        expect("}");
        return s;
    }

    Transformation parse_isotopy() {
        expect("{");
        Isotopy iso;
        // moves resolve against the running state; simulate move by move
        Diagram sim = cur;
        auto simulate = [&](const Move& m) {
            Isotopy one;
            one.moves = {m};
            sim = mopic::apply(sim, one).first;
        };
        while (!at("}")) {
            Token kw = take();
            expect("(");
            Move mv;
            if (kw.text == "r1+") {
                R1Plus m;
                m.target = parse_edge_in(sim);
                Token st = take();
                if (st.text == "+" || st.text == "+over")
                    m.sign = Sign::plus;
                else if (st.text == "-" || st.text == "-over")
                    m.sign = Sign::minus;
                else
                    throw SyntaxError(st.span, "expected a sign, got '" + st.text + "'");
                m.over_first = st.text.size() > 1;
                mv = m;
            } else if (kw.text == "r1-") {
                R1Minus m;
                m.crossing = parse_crossing_in(sim);
                mv = m;
            } else if (kw.text == "r2+") {
                R2Plus m;
                m.mover = parse_edge_in(sim);
                Token dir = take();
                if (dir.text == "over")
                    m.mover_over = true;
                else if (dir.text == "under")
                    m.mover_over = false;
                else
                    throw SyntaxError(dir.span, "expected 'over' or 'under'");
                m.over_of = parse_edge_in(sim);
                Token st = take();
                if (st.text == "+" || st.text == "+anti")
                    m.near_sign = Sign::plus;
                else if (st.text == "-" || st.text == "-anti")
                    m.near_sign = Sign::minus;
                else
                    throw SyntaxError(st.span, "expected a sign, got '" + st.text + "'");
                m.antiparallel = st.text.size() > 1;
                mv = m;
            } else if (kw.text == "r2-") {
                R2Minus m;
                m.c1 = parse_crossing_in(sim);
                m.c2 = parse_crossing_in(sim);
                mv = m;
            } else if (kw.text == "r3") {
                R3 m;
                m.c_pq = parse_crossing_in(sim);
                m.c_pr = parse_crossing_in(sim);
                m.c_qr = parse_crossing_in(sim);
                mv = m;
            } else if (kw.text == "retag") {
                Retag m;
                m.block = parse_block_ref().first;
                Token mode = take();
                if (mode.text == "scratch")
                    m.scratch = true;
                else if (mode.text == "plain")
                    m.scratch = false;
                else
                    throw SyntaxError(mode.span, "expected 'scratch' or 'plain'");
                mv = m;
            } else if (kw.text == "moveto") {
                MoveToBlock m;
                expect("[");
                while (!at("]")) m.members.push_back(parse_edge_in(sim));
                expect("]");
                m.block = parse_block_ref().first;
                if (at("scratch")) {
                    take();
                    m.scratch = true;
                }
                mv = m;
            } else if (kw.text == "relabel") {
                Relabel m;
                expect("[");
                while (!at("]")) {
                    Token t = peek();
                    if (!t.text.empty() && t.text[0] == 'e')
                        m.edges.push_back(parse_edge_in(sim));
                    else
                        m.crossings.push_back(parse_crossing_in(sim));
                }
                expect("]");
                mv = m;
            } else {
                throw SyntaxError(kw.span, "unknown isotopy move '" + kw.text + "'");
            }
            Token close = expect(")");
            try {
                simulate(mv);
            } catch (const PreconditionViolated& e) {
                throw SemanticError(close.span, e.report);
            }
            iso.moves.push_back(mv);
        }
        expect("}");
        return iso;
    }

    EdgeId parse_edge_in(const Diagram& d) {
        Token t = take();
        EdgeId e{parse_id_num(t, 'e', "an edge id")};
        if (!d.has_edge(e))
            throw SemanticError(t.span, Violations{{"no edge " + t.text + " at this point"}});
        return e;
    }
    CrossingId parse_crossing_in(const Diagram& d) {
        Token t = take();
        CrossingId c{parse_id_num(t, 'x', "a crossing id")};
        if (!d.has_crossing(c))
            throw SemanticError(t.span, Violations{{"no crossing " + t.text + " at this point"}});
        return c;
    }

    Transformation parse_xchange() {
        expect("{");
        expect("crossings");
        expect("[");
        CrossingChange c;
        while (!at("]")) c.crossings.push_back(parse_crossing());
        expect("]");
        expect("}");
        return c;
    }

    Transformation parse_hopf(bool split) {
        expect("{");
        expect("blocks");
        expect("[");
        HopfSplit hs;
        HopfMerge hm;
        while (!at("]")) {
            Token t = peek();
            auto [b, exists] = parse_block_ref();
            if (!exists)
                throw SemanticError(t.span,
                                    Violations{{"no block b" + std::to_string(b.v)}});
            if (split) {
                auto found = is_hopf_block(cur, b);
                if (!found)
                    throw SemanticError(
                        t.span, Violations{{"block b" + std::to_string(b.v) +
                                            " does not hold a Hopf template"}});
                hs.blocks.push_back({b, *found});
            } else {
                expect(":");
                Token st = take();
                Sign sg;
                bool alt = false;
                if (st.text == "+" || st.text == "+alt")
                    sg = Sign::plus;
                else if (st.text == "-" || st.text == "-alt")
                    sg = Sign::minus;
                else
                    throw SyntaxError(st.span, "expected a sign, got '" + st.text + "'");
                alt = st.text.size() > 1;
                hm.blocks.push_back({b, sg, alt});
            }
        }
        expect("]");
        expect("}");
        if (split) return hs;
        return hm;
    }
};

// --- serializer -------------------------------------------------------------------

struct Writer {
    std::ostringstream out;
    const Replay& rep;
    std::size_t step_index = 0;

    explicit Writer(const Replay& r) : rep(r) {}

    static std::string edge(EdgeId e) { return "e" + std::to_string(e.v); }
    static std::string crossing(CrossingId c) { return "x" + std::to_string(c.v); }
    static std::string loop(LoopId l) { return "l" + std::to_string(l.v); }
    static std::string block(BlockId b) { return "b" + std::to_string(b.v); }

    void step(const Transformation& t) {
        const StepNote& note = rep.details[step_index].note;
        out << "  ";
        if (const auto* b = std::get_if<Birth>(&t)) {
            std::uint32_t total = 0;
            bool plain = b->groups.size() == 1 && !b->groups[0].block && !b->groups[0].scratch;
            for (const auto& g : b->groups) total += g.count;
            out << "birth { loops " << total;
            if (!plain) {
                out << " blocks [";
                // name each loop's block from the replay
                std::size_t i = 0;
                bool first = true;
                for (const auto& g : b->groups) {
                    const Diagram& post = rep.details[step_index].result;
                    BlockId bl = post.loop(note.born_loops[i]).block;
                    for (std::uint32_t k = 0; k < g.count; ++k) {
                        out << (first ? "" : ", ") << block(bl)
                            << (post.is_scratch(bl) ? " scratch" : "");
                        first = false;
                        i++;
                    }
                }
                out << "]";
            }
            out << " }";
        } else if (const auto* d = std::get_if<Death>(&t)) {
            std::vector<LoopId> ls = d->loops;
            std::sort(ls.begin(), ls.end());
            out << "death { loops [";
            for (std::size_t i = 0; i < ls.size(); ++i)
                out << (i ? ", " : "") << loop(ls[i]);
            out << "] }";
        } else if (const auto* s = std::get_if<Surgery1>(&t)) {
            // stale block targets resolve to fresh blocks at apply time; write
            // the ids the replay actually allocates so names stay meaningful
            Diagram sim = rep.levels[step_index];
            out << "bands {";
            for (const Band& band : s->bands) {
                out << " band (" << edge(band.attach1) << ", " << edge(band.attach2) << ")";
                if (!band.core.empty()) {
                    out << " core [";
                    for (std::size_t i = 0; i < band.core.size(); ++i) {
                        const CoreEvent& ev = band.core[i];
                        out << (i ? ", " : "");
                        if (ev.kind == CoreKind::twist)
                            out << "twist(" << sign_char(ev.sign) << ")";
                        else
                            out << (ev.kind == CoreKind::cross_over ? "over(" : "under(")
                                << edge(ev.target) << ")";
                    }
                    out << "]";
                }
                bool had_block = sim.has_block(band.block);
                bool had_split = band.split_block && sim.has_block(*band.split_block);
                ApplyDetail det = apply_detail(sim, Surgery1{{band}});
                const BandNote& bn = det.note.bands[0];
                BlockId into = had_block ? band.block : det.result.block_of_edge(bn.dual1);
                out << " into " << block(into) << (band.block_scratch ? " scratch" : "");
                if (band.split_block) {
                    BlockId sb =
                        had_split ? *band.split_block : det.result.block_of_edge(bn.dual2);
                    out << " split " << block(sb) << (band.split_scratch ? " scratch" : "");
                }
                sim = det.result;
            }
            out << " }";
        } else if (const auto* iso = std::get_if<Isotopy>(&t)) {
            Diagram sim = rep.levels[step_index];
            out << "isotopy {";
            for (const Move& mv : iso->moves) {
                out << " ";
                if (const auto* m = std::get_if<R1Plus>(&mv))
                    out << "r1+ (" << edge(m->target) << ", " << sign_char(m->sign)
                        << (m->over_first ? "over" : "") << ")";
                else if (const auto* m1 = std::get_if<R1Minus>(&mv))
                    out << "r1- (" << crossing(m1->crossing) << ")";
                else if (const auto* m2 = std::get_if<R2Plus>(&mv))
                    out << "r2+ (" << edge(m2->mover) << (m2->mover_over ? " over " : " under ")
                        << edge(m2->over_of) << ", " << sign_char(m2->near_sign)
                        << (m2->antiparallel ? "anti" : "") << ")";
                else if (const auto* m3 = std::get_if<R2Minus>(&mv))
                    out << "r2- (" << crossing(m3->c1) << ", " << crossing(m3->c2) << ")";
                else if (const auto* m4 = std::get_if<R3>(&mv))
                    out << "r3 (" << crossing(m4->c_pq) << ", " << crossing(m4->c_pr) << ", "
                        << crossing(m4->c_qr) << ")";
                else if (const auto* m5 = std::get_if<Retag>(&mv))
                    out << "retag (" << block(m5->block) << ", "
                        << (m5->scratch ? "scratch" : "plain") << ")";
                else if (const auto* m6 = std::get_if<MoveToBlock>(&mv)) {
                    BlockId target = m6->block;
                    if (!sim.has_block(target)) {
                        Diagram next = mopic::apply(sim, Isotopy{{mv}}).first;
                        target = next.block_of_edge(m6->members.front());
                    }
                    out << "moveto ([";
                    for (std::size_t i = 0; i < m6->members.size(); ++i)
                        out << (i ? ", " : "") << edge(m6->members[i]);
                    out << "] " << block(target) << (m6->scratch ? " scratch" : "") << ")";
                } else if (const auto* m7 = std::get_if<Relabel>(&mv)) {
                    out << "relabel ([";
                    bool first = true;
                    for (EdgeId e : m7->edges) {
                        out << (first ? "" : ", ") << edge(e);
                        first = false;
                    }
                    for (CrossingId c : m7->crossings) {
                        out << (first ? "" : ", ") << crossing(c);
                        first = false;
                    }
                    out << "])";
                }
                sim = mopic::apply(sim, Isotopy{{mv}}).first;
            }
            out << " }";
        } else if (const auto* c = std::get_if<CrossingChange>(&t)) {
            out << "xchange { crossings [";
            for (std::size_t i = 0; i < c->crossings.size(); ++i)
                out << (i ? ", " : "") << crossing(c->crossings[i]);
            out << "] }";
        } else if (const auto* h = std::get_if<HopfSplit>(&t)) {
            out << "hopfsplit { blocks [";
            for (std::size_t i = 0; i < h->blocks.size(); ++i)
                out << (i ? ", " : "") << block(h->blocks[i].first);
            out << "] }";
        } else if (const auto* m = std::get_if<HopfMerge>(&t)) {
            out << "hopfmerge { blocks [";
            for (std::size_t i = 0; i < m->blocks.size(); ++i)
                out << (i ? ", " : "") << block(m->blocks[i].block) << ":"
                    << sign_char(m->blocks[i].sign) << (m->blocks[i].alternating ? "alt" : "");
            out << "] }";
        }
        out << "\n";
        step_index++;
    }
};

}  // namespace

Sequence parse(const std::string& text) {
    Parser p;
    p.toks = tokenize(text);
    return p.run();
}

std::string serialize(const Sequence& s) {
    Replay rep = replay(s);
    Writer w(rep);
    w.out << "sequence {\n  division = [";
    for (std::size_t i = 0; i < s.division.size(); ++i)
        w.out << (i ? ", " : "") << s.division[i].str();
    w.out << "]\n  mid = " << s.mid << "\n";
    for (const Transformation& t : s.steps) w.step(t);
    w.out << "}\n";
    return w.out.str();
}

}  // namespace mopic
