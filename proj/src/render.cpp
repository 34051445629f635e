#include <mopic/render.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace mopic {

std::vector<Frame> frames(const Sequence& s) {
    Replay rep = replay(s);
    std::vector<Frame> out;
    for (std::size_t i = 0; i <= s.steps.size(); ++i) {
        Frame f;
        f.level = i;
        f.time = s.division[i];
        f.diagram = rep.levels[i];
        out.push_back(std::move(f));

        if (i == s.steps.size()) break;
        const Transformation& t = s.steps[i];
        const ApplyDetail& det = rep.details[i];
        bool critical = det.events.births > 0 || det.events.deaths > 0 ||
                        det.events.bands > 0 || !det.events.double_points.empty();
        if (!critical) continue;

        Frame ev;
        ev.level = i;
        Rat lo = s.division[i], hi = s.division[i + 1];
        ev.time = Rat(lo.num * hi.den + hi.num * lo.den, 2 * lo.den * hi.den);

        if (std::holds_alternative<Birth>(t)) {
            ev.diagram = rep.levels[i + 1];
            for (LoopId l : det.note.born_loops) {
                Frame::Annotation a;
                a.kind = Frame::Annotation::Kind::born_loop;
                a.loop = l;
                ev.annotations.push_back(a);
            }
        } else if (const auto* dd = std::get_if<Death>(&t)) {
            ev.diagram = rep.levels[i];
            for (LoopId l : dd->loops) {
                Frame::Annotation a;
                a.kind = Frame::Annotation::Kind::dying_loop;
                a.loop = l;
                ev.annotations.push_back(a);
            }
        } else if (const auto* sg = std::get_if<Surgery1>(&t)) {
            ev.diagram = rep.levels[i];
            for (const Band& band : sg->bands) {
                Frame::Annotation a;
                a.kind = Frame::Annotation::Kind::band;
                a.a = band.attach1;
                a.b = band.attach2;
                ev.annotations.push_back(a);
            }
        } else if (const auto* cc = std::get_if<CrossingChange>(&t)) {
            ev.diagram = rep.levels[i + 1];
            for (std::size_t k = 0; k < cc->crossings.size(); ++k) {
                Frame::Annotation a;
                a.kind = Frame::Annotation::Kind::double_point;
                a.crossing = cc->crossings[k];
                a.sign = det.events.double_points[k];
                ev.annotations.push_back(a);
            }
        } else if (const auto* hs = std::get_if<HopfSplit>(&t)) {
            ev.diagram = rep.levels[i];
            for (std::size_t k = 0; k < hs->blocks.size(); ++k) {
                Frame::Annotation a;
                a.kind = Frame::Annotation::Kind::double_point;
                a.block = hs->blocks[k].first;
                a.at_block = true;
                a.sign = det.events.double_points[k];
                ev.annotations.push_back(a);
            }
        } else if (const auto* hm = std::get_if<HopfMerge>(&t)) {
            ev.diagram = rep.levels[i];
            for (std::size_t k = 0; k < hm->blocks.size(); ++k) {
                Frame::Annotation a;
                a.kind = Frame::Annotation::Kind::double_point;
                a.block = hm->blocks[k].block;
                a.at_block = true;
                a.sign = det.events.double_points[k];
                ev.annotations.push_back(a);
            }
        }
        out.push_back(std::move(ev));
    }
    return out;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Point {
    double x = 0, y = 0;
};

// schematic layout: blocks left to right, components of a block side by side
struct Layout {
    std::map<EdgeId, Point> edge_pos;       // midpoint of the edge's arc
    std::map<CrossingId, std::pair<Point, Point>> crossing_pos;  // passage points
    std::map<LoopId, Point> loop_center;
    struct Circle {
        Point center;
        double radius;
    };
    std::vector<Circle> circles;
    struct BlockBox {
        BlockId id{};
        bool scratch = false;
        double x0, y0, x1, y1;
    };
    std::vector<BlockBox> boxes;
    double width = 0, height = 0;
};

Layout layout(const Diagram& d) {
    Layout out;
    const double r = 34;
    const double spacing = 96;
    const double top = 70;

    auto comps = trace_components(d);
    // group components by block
    std::map<BlockId, std::vector<std::size_t>> by_block;
    for (std::size_t c = 0; c < comps.size(); ++c)
        by_block[d.block_of_edge(comps[c].edges.front())].push_back(c);

    double x = 60;
    std::map<std::size_t, Point> centers;
    for (const auto& [b, cs] : by_block) {
        double x0 = x - 48;
        for (std::size_t c : cs) {
            centers[c] = {x, top + 40};
            x += spacing;
        }
        Layout::BlockBox box;
        box.id = b;
        box.scratch = d.is_scratch(b);
        box.x0 = x0;
        box.y0 = top - 24;
        box.x1 = x - spacing + 48;
        box.y1 = top + 104;
        out.boxes.push_back(box);
        x += 28;
    }
    out.width = x + 20;
    out.height = top + 150;

    for (std::size_t c = 0; c < comps.size(); ++c) {
        const Component& comp = comps[c];
        Point ctr = centers[c];
        out.circles.push_back({ctr, r});
        if (comp.loop) out.loop_center[*comp.loop] = ctr;
        std::size_t n = comp.passages.size();
        // passage k of this component sits at angle 2*pi*k/n
        for (std::size_t k = 0; k < n; ++k) {
            double ang = 2 * 3.14159265358979 * static_cast<double>(k) /
                         static_cast<double>(std::max<std::size_t>(n, 1));
            Point p{ctr.x + r * std::cos(ang), ctr.y + r * std::sin(ang)};
            const Passage& pass = comp.passages[k];
            auto& entry = out.crossing_pos[pass.crossing];
            if (pass.is_over())
                entry.second = p;
            else
                entry.first = p;
        }
        // edge midpoints: edge k runs from passage k-1 exit to passage k entry
        for (std::size_t k = 0; k < comp.edges.size(); ++k) {
            double a0 = 2 * 3.14159265358979 *
                        (static_cast<double>(k) - 0.5) /
                        static_cast<double>(std::max<std::size_t>(n, 1));
            if (n == 0) a0 = 0;
            out.edge_pos[comp.edges[k]] = {ctr.x + r * std::cos(a0), ctr.y + r * std::sin(a0)};
        }
    }
    return out;
}

}  // namespace

std::string to_svg(const Frame& f) {
    Layout lay = layout(f.diagram);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(lay.width)
        << "\" height=\"" << num(lay.height) << "\" viewBox=\"0 0 " << num(lay.width) << " "
        << num(lay.height) << "\">\n";
    svg << "<text x=\"10\" y=\"20\" font-size=\"14\" font-family=\"monospace\">t = "
        << f.time.str() << " (level " << f.level << ")</text>\n";

    for (const auto& box : lay.boxes) {
        svg << "<rect x=\"" << num(box.x0) << "\" y=\"" << num(box.y0) << "\" width=\""
            << num(box.x1 - box.x0) << "\" height=\"" << num(box.y1 - box.y0)
            << "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"6 4\"/>\n";
        svg << "<text x=\"" << num(box.x0 + 4) << "\" y=\"" << num(box.y1 - 6)
            << "\" font-size=\"11\" font-family=\"monospace\" fill=\"#777\">"
            << (box.scratch ? "W b" : "b") << box.id.v << "</text>\n";
    }

    for (const auto& c : lay.circles)
        svg << "<circle cx=\"" << num(c.center.x) << "\" cy=\"" << num(c.center.y) << "\" r=\""
            << num(c.radius) << "\" fill=\"none\" stroke=\"#222\" stroke-width=\"1.6\"/>\n";

    // crossings: bridge line between the two passage points, over/under glyph
    for (const auto& [id, pts] : lay.crossing_pos) {
        Point u = pts.first, o = pts.second;
        Point m{(u.x + o.x) / 2, (u.y + o.y) / 2};
        svg << "<g class=\"crossing\" id=\"x" << id.v << "\">\n";
        svg << "  <line x1=\"" << num(u.x) << "\" y1=\"" << num(u.y) << "\" x2=\"" << num(o.x)
            << "\" y2=\"" << num(o.y) << "\" stroke=\"#bbb\" stroke-width=\"1\"/>\n";
        // under segment with the break, then the over segment across it
        svg << "  <line class=\"under-break\" x1=\"" << num(m.x - 9) << "\" y1=\"" << num(m.y - 9)
            << "\" x2=\"" << num(m.x - 3) << "\" y2=\"" << num(m.y - 3)
            << "\" stroke=\"#222\" stroke-width=\"2\"/>\n";
        svg << "  <line x1=\"" << num(m.x + 3) << "\" y1=\"" << num(m.y + 3) << "\" x2=\""
            << num(m.x + 9) << "\" y2=\"" << num(m.y + 9)
            << "\" stroke=\"#222\" stroke-width=\"2\"/>\n";
        svg << "  <line class=\"over\" x1=\"" << num(m.x - 9) << "\" y1=\"" << num(m.y + 9)
            << "\" x2=\"" << num(m.x + 9) << "\" y2=\"" << num(m.y - 9)
            << "\" stroke=\"#222\" stroke-width=\"2\"/>\n";
        svg << "</g>\n";
    }

    for (const auto& a : f.annotations) {
        switch (a.kind) {
            case Frame::Annotation::Kind::born_loop:
            case Frame::Annotation::Kind::dying_loop: {
                auto it = lay.loop_center.find(a.loop);
                if (it == lay.loop_center.end()) break;
                bool born = a.kind == Frame::Annotation::Kind::born_loop;
                svg << "<circle cx=\"" << num(it->second.x) << "\" cy=\"" << num(it->second.y)
                    << "\" r=\"40\" fill=\"none\" stroke=\"" << (born ? "#2a2" : "#a22")
                    << "\" stroke-dasharray=\"3 3\"/>\n";
                break;
            }
            case Frame::Annotation::Kind::band: {
                auto i1 = lay.edge_pos.find(a.a);
                auto i2 = lay.edge_pos.find(a.b);
                if (i1 == lay.edge_pos.end() || i2 == lay.edge_pos.end()) break;
                svg << "<line x1=\"" << num(i1->second.x) << "\" y1=\"" << num(i1->second.y)
                    << "\" x2=\"" << num(i2->second.x) << "\" y2=\"" << num(i2->second.y)
                    << "\" stroke=\"#d80\" stroke-width=\"6\" stroke-opacity=\"0.6\"/>\n";
                break;
            }
            case Frame::Annotation::Kind::double_point:
            case Frame::Annotation::Kind::hopf_block: {
                Point p{24, 40};
                if (a.at_block) {
                    for (const auto& box : lay.boxes)
                        if (box.id == a.block) p = {box.x0 + 10, box.y0 + 14};
                } else {
                    auto it = lay.crossing_pos.find(a.crossing);
                    if (it != lay.crossing_pos.end())
                        p = {(it->second.first.x + it->second.second.x) / 2,
                             (it->second.first.y + it->second.second.y) / 2 - 14};
                }
                svg << "<text x=\"" << num(p.x) << "\" y=\"" << num(p.y)
                    << "\" font-size=\"16\" font-family=\"monospace\" fill=\""
                    << (a.sign == Sign::plus ? "#06c" : "#c06") << "\">" << sign_char(a.sign)
                    << "</text>\n";
                break;
            }
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string frame_filename(std::size_t index, const Frame& f) {
    std::string t = f.time.str();
    for (char& c : t)
        if (c == '/') c = 'd';
    return "frame_" + std::to_string(index) + "_" + t + ".svg";
}

}  // namespace mopic
