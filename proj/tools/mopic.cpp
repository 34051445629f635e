// mopic: motion pictures of immersed surface-links on the command line.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <mopic/dsl.hpp>
#include <mopic/normalizer.hpp>
#include <mopic/oracle.hpp>
#include <mopic/render.hpp>

using json = nlohmann::json;
using namespace mopic;

namespace {

// exit codes: 0 success, 1 validation failed, 2 parse error, 3 rewrite
// obstruction, 4 usage error
constexpr int kOk = 0;
constexpr int kValidationFailed = 1;
constexpr int kParseError = 2;
constexpr int kObstruction = 3;
constexpr int kUsage = 4;

bool use_color() {
    const char* v = std::getenv("MOPIC_COLOR");
    if (!v) return false;
    return std::string(v) == "1";
}

std::string pass_str(bool pass) {
    if (!use_color()) return pass ? "pass" : "FAIL";
    return pass ? "\033[32mpass\033[0m" : "\033[31mFAIL\033[0m";
}

Sequence load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void store(const std::string& path, const Sequence& s) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << serialize(s);
}

json invariants_json(const SurfaceInvariants& inv) {
    return json{{"mu", inv.mu},
                {"chi", inv.chi},
                {"genus", inv.genus_total},
                {"c_plus", inv.c_plus},
                {"c_minus", inv.c_minus},
                {"c1_plus", inv.c1_plus},
                {"c1_minus", inv.c1_minus},
                {"c2_plus", inv.c2_plus},
                {"c2_minus", inv.c2_minus}};
}

json report_json(const std::string& file, const std::string& form, const ValidationReport& rep) {
    json clauses = json::array();
    for (const auto& c : rep.clauses)
        clauses.push_back(json{{"id", c.id}, {"pass", c.pass}, {"note", c.note}});
    return json{{"file", file}, {"form", form}, {"pass", rep.pass()}, {"clauses", clauses}};
}

ValidationReport run_form(const Sequence& s, const std::string& form) {
    if (form == "normal") return check_normal_form(s);
    if (form == "ribbon-clasp") return check_ribbon_clasp_normal_form(s);
    if (form == "symmetric") return check_symmetric_normal_form(s);
    throw Error("unknown form '" + form + "'");
}

int cmd_check(const std::vector<std::string>& files, const std::string& form, bool as_json) {
    std::vector<std::string> sorted = files;
    std::sort(sorted.begin(), sorted.end());
    json out = json::array();
    bool all_pass = true;
    for (const std::string& file : sorted) {
        Sequence s;
        try {
            s = load(file);
        } catch (const Error& e) {
            std::cerr << file << ": " << e.what() << "\n";
            return kParseError;
        }
        if (form.empty()) {
            // replay validation only
            try {
                replay(s);
                if (!as_json)
                    std::cout << file << ": " << pass_str(true) << " (replays, "
                              << s.steps.size() << " steps)\n";
                else
                    out.push_back(json{{"file", file}, {"pass", true}});
            } catch (const Error& e) {
                all_pass = false;
                if (!as_json)
                    std::cout << file << ": " << pass_str(false) << " " << e.what() << "\n";
                else
                    out.push_back(json{{"file", file}, {"pass", false}, {"note", e.what()}});
            }
            continue;
        }
        ValidationReport rep = run_form(s, form);
        all_pass = all_pass && rep.pass();
        if (as_json) {
            out.push_back(report_json(file, form, rep));
        } else {
            std::cout << file << " [" << form << "]: " << pass_str(rep.pass()) << "\n";
            for (const auto& c : rep.clauses) {
                std::cout << "  " << c.id << ": " << pass_str(c.pass);
                if (!c.note.empty()) std::cout << " (" << c.note << ")";
                std::cout << "\n";
            }
        }
    }
    if (as_json) std::cout << (out.size() == 1 ? out[0] : out).dump(2) << "\n";
    return all_pass ? kOk : kValidationFailed;
}

int cmd_invariants(const std::string& file, bool as_json) {
    Sequence s;
    try {
        s = load(file);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kParseError;
    }
    SurfaceInvariants inv = realize(s);
    if (as_json) {
        std::cout << invariants_json(inv).dump(2) << "\n";
    } else {
        std::cout << "mu      " << inv.mu << "\n"
                  << "chi     " << inv.chi << "\n"
                  << "genus   " << inv.genus_total << "\n"
                  << "c+      " << inv.c_plus << "  (upper " << inv.c1_plus << ", lower "
                  << inv.c2_plus << ")\n"
                  << "c-      " << inv.c_minus << "  (upper " << inv.c1_minus << ", lower "
                  << inv.c2_minus << ")\n";
    }
    return kOk;
}

DoublePointPartition build_partition(const Sequence& s, int g1p, int g1m, int g2p, int g2m,
                                     const std::string& assign) {
    Replay rep = replay(s);
    std::vector<Sign> dps;
    for (const auto& det : rep.details)
        for (Sign sg : det.events.double_points) dps.push_back(sg);

    DoublePointPartition p;
    if (!assign.empty()) {
        std::stringstream ss(assign);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok == "g1+") p.assign.push_back(DoublePointPartition::Group::g1_plus);
            else if (tok == "g1-") p.assign.push_back(DoublePointPartition::Group::g1_minus);
            else if (tok == "g2+") p.assign.push_back(DoublePointPartition::Group::g2_plus);
            else if (tok == "g2-") p.assign.push_back(DoublePointPartition::Group::g2_minus);
            else throw Error("bad --assign entry '" + tok + "'");
        }
        return p;
    }
    // first-come assignment by double-point order
    int up_plus = g1p, up_minus = g1m;
    int down_plus = g2p, down_minus = g2m;
    for (Sign sg : dps) {
        if (sg == Sign::plus) {
            if (up_plus > 0) {
                p.assign.push_back(DoublePointPartition::Group::g1_plus);
                up_plus--;
            } else {
                p.assign.push_back(DoublePointPartition::Group::g2_plus);
                down_plus--;
            }
        } else {
            if (up_minus > 0) {
                p.assign.push_back(DoublePointPartition::Group::g1_minus);
                up_minus--;
            } else {
                p.assign.push_back(DoublePointPartition::Group::g2_minus);
                down_minus--;
            }
        }
    }
    if (up_plus != 0 || up_minus != 0 || down_plus != 0 || down_minus != 0)
        throw Error("partition counts do not match the double points of the sequence");
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"motion pictures of immersed surface-links"};
    app.require_subcommand(1);

    // check
    auto* check = app.add_subcommand("check", "validate sequences or normal forms");
    std::vector<std::string> check_files;
    std::string form;
    bool check_json = false;
    check->add_option("files", check_files, "input .mp files")->required();
    check->add_option("--form", form, "normal | ribbon-clasp | symmetric");
    check->add_flag("--json", check_json, "machine-readable report on stdout");

    // invariants
    auto* inv = app.add_subcommand("invariants", "realizing-surface invariants");
    std::string inv_file;
    bool inv_json = false;
    inv->add_option("file", inv_file, "input .mp file")->required();
    inv->add_flag("--json", inv_json);

    // normalize
    auto* norm = app.add_subcommand("normalize", "rewrite into a normal form");
    std::string norm_file, norm_out, norm_assign;
    int g1p = 0, g1m = 0, g2p = 0, g2m = 0;
    norm->add_option("file", norm_file)->required();
    norm->add_option("-o,--output", norm_out, "output .mp file")->required();
    norm->add_option("--g1-plus", g1p, "positive double points placed above");
    norm->add_option("--g1-minus", g1m, "negative double points placed above");
    norm->add_option("--g2-plus", g2p, "positive double points placed below");
    norm->add_option("--g2-minus", g2m, "negative double points placed below");
    norm->add_option("--assign", norm_assign, "comma list of g1+/g1-/g2+/g2- per double point");

    // symmetrize / desymmetrize
    auto* symc = app.add_subcommand("symmetrize", "ribbon-clasp form to symmetric form");
    std::string sym_file, sym_out;
    symc->add_option("file", sym_file)->required();
    symc->add_option("-o,--output", sym_out)->required();

    auto* desymc = app.add_subcommand("desymmetrize", "symmetric form to ribbon-clasp form");
    std::string desym_file, desym_out;
    desymc->add_option("file", desym_file)->required();
    desymc->add_option("-o,--output", desym_out)->required();

    // gen
    auto* gen = app.add_subcommand("gen", "emit example sequences");
    bool gen_twin = false, gen_random = false;
    std::string gen_mtrivial, gen_out;
    std::uint64_t gen_seed = 0;
    int gen_max_steps = 10;
    gen->add_flag("--twin", gen_twin, "the Montesinos twin");
    gen->add_option("--m-trivial", gen_mtrivial, "S,T: spheres and twins");
    gen->add_flag("--random", gen_random, "random prenormal sequence");
    gen->add_option("--seed", gen_seed);
    gen->add_option("--max-steps", gen_max_steps);
    gen->add_option("-o,--output", gen_out, "output file (default stdout)");

    // render
    auto* ren = app.add_subcommand("render", "emit SVG frames");
    std::string ren_file, ren_dir;
    ren->add_option("file", ren_file)->required();
    ren->add_option("-o,--output", ren_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*check) return cmd_check(check_files, form, check_json);
        if (*inv) return cmd_invariants(inv_file, inv_json);

        if (*norm) {
            Sequence s;
            try {
                s = load(norm_file);
            } catch (const Error& e) {
                std::cerr << e.what() << "\n";
                return kParseError;
            }
            try {
                Sequence pre = make_prenormal(s);
                require_prenormal(pre);
                DoublePointPartition p = build_partition(pre, g1p, g1m, g2p, g2m, norm_assign);
                Sequence out = normalize(pre, p);
                store(norm_out, out);
            } catch (const NotPrenormal& e) {
                std::cerr << "NotPrenormal: " << e.what() << "\n";
                return kObstruction;
            } catch (const ReorderObstruction& e) {
                std::cerr << "ReorderObstruction: " << e.what() << "\n";
                return kObstruction;
            }
            return kOk;
        }

        if (*symc) {
            Sequence s;
            try {
                s = load(sym_file);
            } catch (const Error& e) {
                std::cerr << e.what() << "\n";
                return kParseError;
            }
            try {
                store(sym_out, symmetrize(s));
            } catch (const NotRibbonClaspNormalForm& e) {
                std::cerr << e.what() << "\n";
                return kValidationFailed;
            } catch (const NoFusionSubset& e) {
                std::cerr << "NoFusionSubset: " << e.what() << "\n";
                return kObstruction;
            }
            return kOk;
        }

        if (*desymc) {
            Sequence s;
            try {
                s = load(desym_file);
            } catch (const Error& e) {
                std::cerr << e.what() << "\n";
                return kParseError;
            }
            try {
                store(desym_out, desymmetrize(s));
            } catch (const NotSymmetricNormalForm& e) {
                std::cerr << e.what() << "\n";
                return kValidationFailed;
            }
            return kOk;
        }

        if (*gen) {
            Sequence s;
            if (gen_twin) {
                s = montesinos_twin();
            } else if (!gen_mtrivial.empty()) {
                auto comma = gen_mtrivial.find(',');
                if (comma == std::string::npos) {
                    std::cerr << "--m-trivial wants S,T\n";
                    return kUsage;
                }
                s = m_trivial(std::stoi(gen_mtrivial.substr(0, comma)),
                              std::stoi(gen_mtrivial.substr(comma + 1)));
            } else if (gen_random) {
                oracle::Limits lim;
                lim.max_steps = gen_max_steps;
                s = oracle::random_prenormal(gen_seed, lim);
            } else {
                std::cerr << "gen wants one of --twin, --m-trivial, --random\n";
                return kUsage;
            }
            if (gen_out.empty())
                std::cout << serialize(s);
            else
                store(gen_out, s);
            return kOk;
        }

        if (*ren) {
            Sequence s;
            try {
                s = load(ren_file);
            } catch (const Error& e) {
                std::cerr << e.what() << "\n";
                return kParseError;
            }
            std::filesystem::create_directories(ren_dir);
            auto fs = frames(s);
            for (std::size_t i = 0; i < fs.size(); ++i) {
                std::ofstream out(std::filesystem::path(ren_dir) / frame_filename(i, fs[i]));
                out << to_svg(fs[i]);
            }
            std::cout << fs.size() << " frames written to " << ren_dir << "\n";
            return kOk;
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kValidationFailed;
    }
    return kUsage;
}
