// stpi: command-line front end for the spatiotemporal pattern library.

#include "stpi/agency.hpp"
#include "stpi/disintegration.hpp"
#include "stpi/io.hpp"
#include "stpi/symmetry.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace stpi;

namespace {

struct Options {
    std::string system_path;
    std::string builtin;
    std::string eps = "1/100";
    int trajectory = 0;  // 1-based; 0 = all
    std::string zeta;
    std::string anchor;
    int time = -1;
    int depth = 1;
    std::string dot_dir;
    std::string csv_path;
    std::string pgm_dir;
    bool json = false;
    int threads = 1;
    int cap_partitions = 13;
    std::uint64_t cap_states = 1u << 20;
    std::string group;
    std::size_t elide = 100;
    bool union_only = false;
    bool no_refinement_filter = false;
    int level = 0;
};

// A loaded system plus the trajectories analyses iterate over.
struct Session {
    std::string name;
    BayesNet net;
    std::optional<MarkovSpec> markov;
    std::optional<PaLoop> paloop;
    std::vector<NamedGroup> groups;
    std::optional<GeneratedGroup> builtin_group;
    std::vector<Pattern> trajectories;  // representatives for mc-eps, all possible otherwise
};

std::string fmt(double x, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

// Generators that are symmetries of the net; others are dropped.
std::optional<GeneratedGroup> symmetric_subgroup(const BayesNet& net, const std::vector<Permutation>& candidates) {
    std::vector<Permutation> gens;
    for (const auto& g : candidates)
        if (is_symmetry(net, g)) gens.push_back(g);
    if (gens.empty()) return std::nullopt;
    return GeneratedGroup(gens);
}

Session load(const Options& o) {
    Caps caps;
    caps.states = o.cap_states;
    caps.partition_elements = o.cap_partitions;
    if (o.builtin.empty() == o.system_path.empty()) throw ParseError(0, "give either a system file or --builtin");
    if (!o.builtin.empty()) {
        MarkovSpec spec;
        if (o.builtin == "mc-const") {
            spec = mc_const_spec();
        } else if (o.builtin == "mc-eps") {
            Rational eps;
            try {
                eps = parse_rational(o.eps);
                spec = mc_eps_spec(eps);
            } catch (const std::exception& e) {
                throw ParseError(0, std::string("--eps: ") + e.what());
            }
        } else {
            throw ParseError(0, "unknown built-in '" + o.builtin + "' (mc-const, mc-eps)");
        }
        Session s{spec.name, build_markov_chain(spec, caps), spec, std::nullopt, {}, std::nullopt, {}};
        const auto& net = s.net;
        std::vector<Permutation> cands{spatial_flip(net)};
        if (o.builtin == "mc-const") {
            for (int j = 1; j <= 2; ++j) {
                cands.push_back(row_time_permutation(net, j, {1, 0, 2}));
                cands.push_back(row_time_permutation(net, j, {0, 2, 1}));
            }
            for (const auto& [traj, p] : enumerate_trajectories(net)) s.trajectories.push_back(traj);
        } else {
            cands.push_back(row_time_permutation(net, 1, {2, 1, 0}).after(row_time_permutation(net, 2, {2, 1, 0})));
            s.trajectories = {Pattern::full({0, 1, 0, 1, 0, 1}), Pattern::full({0, 1, 0, 1, 0, 0}),
                              Pattern::full({0, 1, 0, 0, 0, 1})};
        }
        s.builtin_group = symmetric_subgroup(net, cands);
        return s;
    }
    SystemFile f = load_system(o.system_path, caps);
    Session s{f.name, std::move(*f.net), f.markov, f.paloop, f.groups, std::nullopt, {}};
    for (const auto& [traj, p] : enumerate_trajectories(s.net)) s.trajectories.push_back(traj);
    return s;
}

std::vector<std::pair<int, Pattern>> selected(const Session& s, const Options& o) {
    std::vector<std::pair<int, Pattern>> out;
    if (o.trajectory) {
        if (o.trajectory < 1 || o.trajectory > static_cast<int>(s.trajectories.size()))
            throw ParseError(0, "--trajectory must lie in 1.." + std::to_string(s.trajectories.size()));
        out.emplace_back(o.trajectory, s.trajectories[o.trajectory - 1]);
    } else {
        for (std::size_t i = 0; i < s.trajectories.size(); ++i) out.emplace_back(static_cast<int>(i + 1), s.trajectories[i]);
    }
    return out;
}

std::optional<GeneratedGroup> chosen_group(const Session& s, const Options& o) {
    if (!o.group.empty()) {
        for (const auto& g : s.groups)
            if (g.name == o.group) return resolve_group(s.net, g);
        throw ParseError(0, "no group named '" + o.group + "' in the system file");
    }
    if (s.builtin_group) return s.builtin_group;
    if (!s.groups.empty()) return resolve_group(s.net, s.groups.front());
    return std::nullopt;
}

Pattern parse_literal(const BayesNet& net, const std::string& text, const char* flag) {
    try {
        return parse_pattern(net, text);
    } catch (const std::exception& e) {
        throw ParseError(0, std::string(flag) + ": " + e.what());
    }
}

std::vector<Pattern> parse_list(const BayesNet& net, const std::string& text, const char* flag) {
    std::vector<Pattern> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';'))
        if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(parse_literal(net, item, flag));
    return out;
}

void write_file(const std::string& dir, const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw std::runtime_error("cannot write " + dir + "/" + name);
    out << body;
}

void emit(const Options& o, const Json& j, const std::string& text) {
    if (o.json) std::cout << j.dump(2) << "\n";
    else std::cout << text;
}

std::string header(const Session& s) {
    return "system " + s.name + ": " + std::to_string(s.net.size()) + " nodes, " +
           std::to_string(enumerate_trajectories(s.net).size()) + " possible trajectories\n";
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const Options& o) {
    Session s = load(o);
    std::ostringstream text;
    text << header(s);
    Json reports = Json::array();
    std::ostringstream csv;
    csv << "trajectory,level,partition,ratio,bits\n";
    for (const auto& [idx, traj] : selected(s, o)) {
        auto h = disintegration_hierarchy(s.net, traj, o.threads);
        auto rf = refinement_free(h);
        for (std::size_t l = 0; l < h.levels.size(); ++l)
            for (const auto& pi : h.levels[l].partitions)
                csv << idx << ',' << l + 1 << ",\"" << partition_text(s.net, pi) << "\"," << to_string(h.levels[l].sli.ratio)
                    << ',' << fmt(h.levels[l].sli.bits()) << '\n';
        Json r = hierarchy_json(s.net, h, rf, o.elide);
        r["index"] = idx;
        reports.push_back(r);
        text << "\ntrajectory " << idx << ": " << render_pattern(s.net, traj) << "  p = " << to_string(joint_probability(s.net, traj))
             << "\n  level  ratio          bits       partitions  refinement-free\n";
        for (std::size_t l = 0; l < h.levels.size(); ++l) {
            char line[160];
            std::snprintf(line, sizeof line, "  %5zu  %-13s  %9s  %10zu  %15zu\n", l + 1, to_string(h.levels[l].sli.ratio).c_str(),
                          fmt(h.levels[l].sli.bits()).c_str(), h.levels[l].partitions.size(), rf.levels[l].partitions.size());
            text << line;
        }
        if (!o.dot_dir.empty()) {
            for (std::size_t l = 0; l < h.levels.size(); ++l) {
                std::string base = "traj" + std::to_string(idx) + "_level" + std::to_string(l + 1);
                write_file(o.dot_dir, base + ".dot", hierarchy_dot(s.net, h.levels[l], base));
                write_file(o.dot_dir, base + "_rf.dot", hierarchy_dot(s.net, rf.levels[l], base + "_rf"));
            }
        }
    }
    if (!o.csv_path.empty()) {
        std::ofstream out(o.csv_path);
        if (!out) throw std::runtime_error("cannot write " + o.csv_path);
        out << csv.str();
    }
    emit(o, Json{{"system", s.name}, {"command", "analyze"}, {"trajectories", reports}}, text.str());
    return 0;
}

// ---------------------------------------------------------------- entities

std::string entity_line(const BayesNet& net, const Pattern& p, const SliValue& v) {
    std::string out = "  " + render_pattern(net, p) + "  iota = " + fmt(v.bits()) + " bits (" + to_string(v.ratio) + ")";
    if (net.has_coords()) {
        auto k = classify_composite(net, p);
        out += std::string("  ") + (k.spatial ? "spatial" : "-") + " " + (k.temporal ? "temporal" : "-") + " " +
               (traverses_dof(net, p) ? "dof" : "-");
    }
    return out + "  trajectories=" + std::to_string(trajectory_set(net, p).size()) + "\n";
}

std::string indent_grid(const std::string& g) {
    std::string out = "    ";
    for (std::size_t i = 0; i < g.size(); ++i) {
        out += g[i];
        if (g[i] == '\n' && i + 1 < g.size()) out += "    ";
    }
    if (out.back() != '\n') out += '\n';
    return out;
}

int cmd_entities(const Options& o) {
    Session s = load(o);
    std::ostringstream text;
    text << header(s);
    Json per = Json::array();
    if (!o.union_only) {
        for (const auto& [idx, traj] : selected(s, o)) {
            auto ents = iota_entities(s.net, traj, o.threads);
            text << "\ntrajectory " << idx << ": " << render_pattern(s.net, traj) << "  (" << ents.size() << " entities)\n";
            Json list = Json::array();
            if (!o.pgm_dir.empty() && s.net.has_coords())
                for (std::size_t k = 0; k < ents.size(); ++k)
                    write_file(o.pgm_dir, "traj" + std::to_string(idx) + "_entity" + std::to_string(k + 1) + ".pgm",
                               render_pgm(s.net, ents[k].pattern));
            for (const auto& e : ents) {
                list.push_back(entity_json(s.net, e.pattern, e.iota));
                text << entity_line(s.net, e.pattern, e.iota);
                if (s.net.has_coords()) text << indent_grid(render_grid(s.net, e.pattern));
            }
            per.push_back(Json{{"index", idx}, {"trajectory", render_pattern(s.net, traj)}, {"entities", list}});
        }
    }
    auto all = entity_set_union(s.net, o.threads);
    Json uni = Json::array();
    text << "\nunion over all possible trajectories: " << all.size() << " entities\n";
    for (const auto& e : all) {
        uni.push_back(entity_json(s.net, e.pattern, e.iota));
        text << entity_line(s.net, e.pattern, e.iota);
    }
    emit(o, Json{{"system", s.name}, {"command", "entities"}, {"per_trajectory", per}, {"union", uni}}, text.str());
    return 0;
}

// ---------------------------------------------------------------- actions

EntitySet union_entities(const Session& s, const Options& o) {
    std::vector<Pattern> ps;
    for (const auto& e : entity_set_union(s.net, o.threads)) ps.push_back(e.pattern);
    return EntitySet::from(std::move(ps));
}

std::vector<int> steps(const BayesNet& net, const Options& o) {
    if (!net.has_coords()) throw ParseError(0, "actions and perceptions need a net with j/t node ids");
    if (o.time >= 0) {
        if (o.time < net.min_t() || o.time >= net.max_t()) throw ParseError(0, "--time has no successor step in the net");
        return {o.time};
    }
    std::vector<int> ts;
    for (int t = net.min_t(); t < net.max_t(); ++t) ts.push_back(t);
    return ts;
}

int cmd_actions(const Options& o) {
    Session s = load(o);
    auto ents = union_entities(s, o);
    std::optional<Pattern> anchor;
    if (!o.anchor.empty()) anchor = parse_literal(s.net, o.anchor, "--anchor");
    std::ostringstream text;
    text << header(s) << "entity set: " << ents.members.size() << " ι-entities\n";
    Json pairs = Json::array();
    std::size_t counts[2] = {0, 0};
    for (int t : steps(s.net, o))
        for (const auto& [idx, traj] : selected(s, o))
            for (const auto& x : ents.members) {
                if (anchor && x != *anchor) continue;
                if (!occurs_in(x, traj) || slice_nodes(s.net, x, t).empty() || slice_nodes(s.net, x, t + 1).empty()) continue;
                for (const auto& c : find_co_actions(s.net, ents, x, traj, t)) {
                    ++counts[c.kind == ActionKind::extent];
                    Json j = co_action_json(s.net, c);
                    j["trajectory_index"] = idx;
                    pairs.push_back(j);
                    text << "t=" << t << " " << to_string(c.kind) << ": " << render_pattern(s.net, c.actor) << " | "
                         << render_pattern(s.net, c.coactor) << "  in " << render_pattern(s.net, c.coactor_trajectory) << "\n";
                }
            }
    text << "co-action pairs: " << counts[0] << " value, " << counts[1] << " extent\n";
    emit(o, Json{{"system", s.name}, {"command", "actions"}, {"value_pairs", counts[0]}, {"extent_pairs", counts[1]}, {"pairs", pairs}},
         text.str());
    return 0;
}

// ---------------------------------------------------------------- perceptions

int cmd_perceptions(const Options& o) {
    Session s = load(o);
    auto ents = union_entities(s, o);
    std::vector<Pattern> anchors;
    if (!o.anchor.empty()) anchors.push_back(parse_literal(s.net, o.anchor, "--anchor"));
    else anchors = ents.members;
    std::optional<std::vector<Pattern>> zeta;
    if (!o.zeta.empty()) zeta = parse_list(s.net, o.zeta, "--zeta");

    std::ostringstream text;
    text << header(s);
    Json reports = Json::array();
    for (int t : steps(s.net, o)) {
        for (const auto& a : anchors) {
            if (slice_nodes(s.net, a, t).empty() || slice_nodes(s.net, a, t + 1).empty()) {
                if (!o.anchor.empty()) throw ParseError(0, "--anchor needs nodes at t and t+1");
                continue;
            }
            if (!ents.contains(a)) throw ParseError(0, "--anchor " + render_pattern(s.net, a) + " is not an ι-entity");
            CoPerceptionContext ctx;
            try {
                ctx = make_context(s.net, ents, a, t, zeta, o.depth);
            } catch (const std::invalid_argument& e) {
                throw ParseError(0, e.what());
            }
            auto branches = branching_partition(s.net, ctx);
            if (branches.size() < 2) {
                if (o.anchor.empty() && !o.json) continue;
                std::string why = ctx.members.size() < 2 ? "no co-perception entities" : "no co-perception entities on another branch";
                text << "t=" << t << " anchor " << render_pattern(s.net, a) << ": " << why << "; perception is trivial\n";
                reports.push_back(Json{{"anchor", render_pattern(s.net, a)}, {"t", t}, {"notice", why}});
                continue;
            }
            Perceptions p = perception_partition(s.net, ctx);
            reports.push_back(perceptions_json(s.net, ctx, p));
            text << "t=" << t << " anchor " << render_pattern(s.net, a) << ": " << ctx.active().size() << " entities in "
                 << branches.size() << " branches, " << p.morphs.size() << " environments, " << p.blocks.size() << " perceptions\n";
            for (std::size_t b = 0; b < branches.size(); ++b)
                text << "  branch " << b << ": " << render_pattern(s.net, time_window(s.net, branches[b].front(), t + 1, t + o.depth)) << "\n";
            for (const auto& m : p.morphs) {
                text << "  env " << render_pattern(s.net, m.environment) << " ->";
                for (const auto& q : m.distribution) text << " " << to_string(q) << " (" << fmt(to_double(q), 4) << ")";
                text << "\n";
            }
        }
    }
    if (reports.empty()) text << "no co-perception entities on distinct branches for any anchor\n";
    emit(o, Json{{"system", s.name}, {"command", "perceptions"}, {"reports", reports}}, text.str());
    return 0;
}

// ---------------------------------------------------------------- hasse

int cmd_hasse(const Options& o) {
    Session s = load(o);
    auto group = chosen_group(s, o);
    std::ostringstream text;
    text << header(s);
    Json reports = Json::array();
    for (const auto& [idx, traj] : selected(s, o)) {
        auto h = disintegration_hierarchy(s.net, traj, o.threads);
        // Group elements that fix the trajectory map each level onto itself.
        std::vector<Permutation> stab;
        if (group)
            for (const auto& g : group->elements())
                if (pull_back(s.net, g, traj) == traj) stab.push_back(g);
        text << "\ntrajectory " << idx << ": " << render_pattern(s.net, traj) << "\n";
        Json levels = Json::array();
        for (std::size_t l = 0; l < h.levels.size(); ++l) {
            if (o.level && static_cast<int>(l + 1) != o.level) continue;
            const auto& ps = h.levels[l].partitions;
            auto comps = hasse_components(ps);
            auto edges = hasse_edges(ps);
            std::map<std::size_t, std::size_t> by_size;
            for (const auto& c : comps) ++by_size[c.size()];
            Json sizes = Json::object();
            text << "  level " << l + 1 << " (" << fmt(h.levels[l].sli.bits(), 4) << " bits): " << ps.size() << " partitions, "
                 << comps.size() << " components:";
            for (auto [sz, n] : by_size) {
                sizes[std::to_string(sz)] = n;
                text << " " << n << "x" << sz;
            }
            Json row{{"level", l + 1}, {"partitions", ps.size()}, {"edges", edges.size()}, {"components", comps.size()}, {"component_sizes", sizes}};
            if (!stab.empty()) {
                std::set<SetPartition> seen;
                std::map<std::size_t, std::size_t> orbit_sizes;
                for (const auto& pi : ps) {
                    if (seen.count(pi)) continue;
                    std::set<SetPartition> orb;
                    for (const auto& g : stab) orb.insert(act_on_partition(g, pi));
                    seen.insert(orb.begin(), orb.end());
                    ++orbit_sizes[orb.size()];
                }
                Json os = Json::object();
                text << "; orbits under " << stab.size() << " stabilising elements:";
                for (auto [sz, n] : orbit_sizes) {
                    os[std::to_string(sz)] = n;
                    text << " " << n << "x" << sz;
                }
                row["orbit_sizes"] = os;
            }
            text << "\n";
            levels.push_back(row);
            if (!o.dot_dir.empty()) {
                std::string base = "traj" + std::to_string(idx) + "_level" + std::to_string(l + 1);
                write_file(o.dot_dir, base + ".dot", hierarchy_dot(s.net, h.levels[l], base));
            }
        }
        reports.push_back(Json{{"index", idx}, {"trajectory", render_pattern(s.net, traj)}, {"levels", levels}});
    }
    emit(o, Json{{"system", s.name}, {"command", "hasse"}, {"trajectories", reports}}, text.str());
    return 0;
}

// ---------------------------------------------------------------- verify

struct Check {
    std::string name;
    bool passed;
    std::string detail;
    std::vector<std::string> counterexamples;
};

int cmd_verify(const Options& o) {
    Session s = load(o);
    std::vector<Check> checks;
    if (s.net.has_coords()) checks.push_back({"time-slice Markov property", verify_time_slice_markov(s.net), "", {}});

    for (const auto& [traj, p] : enumerate_trajectories(s.net)) {
        auto r = verify_disintegration_theorem(s.net, traj, o.threads, o.no_refinement_filter);
        checks.push_back({"disintegration theorem " + render_pattern(s.net, traj), r.passed(),
                          std::to_string(r.partitions) + " partitions, " + std::to_string(r.blocks_checked) + " blocks, " +
                              std::to_string(r.entities_checked) + " entities",
                          r.failures});
    }

    if (auto group = chosen_group(s, o)) {
        for (const auto& [traj, p] : enumerate_trajectories(s.net)) {
            auto r = check_sli_symmetry(s.net, *group, traj, o.threads);
            std::vector<std::string> bad = r.precondition_failures;
            bad.insert(bad.end(), r.theorem_failures.begin(), r.theorem_failures.end());
            checks.push_back({"SLI symmetry " + render_pattern(s.net, traj), r.passed(),
                              std::to_string(r.elements) + " elements, " + std::to_string(r.partitions_checked) +
                                  " partitions, invariant by case i/ii/iii " + std::to_string(r.invariance_cases[0]) + "/" +
                                  std::to_string(r.invariance_cases[1]) + "/" + std::to_string(r.invariance_cases[2]) +
                                  ", not invariant " + std::to_string(r.not_invariant),
                              bad});
        }
    }

    if (s.markov && s.markov->J >= 2) {
        // Spatial reversal as the candidate; the check applies when it fixes the driving chain.
        std::vector<int> rev(s.markov->J);
        for (int j = 0; j < s.markov->J; ++j) rev[j] = s.markov->J - j;
        bool fixes = true;
        for (int d : s.markov->driving) fixes = fixes && rev[d - 1] == d;
        bool kernel_symmetric = true;
        const auto& m = *s.markov;
        for (std::size_t a = 0; a < m.matrix.size() && kernel_symmetric; ++a) {
            auto va = decode_slice(m, a);
            std::vector<int> pa(va.rbegin(), va.rend());
            auto ia = encode_slice(m, pa);
            if (m.initial[a] != m.initial[ia]) kernel_symmetric = false;
            for (std::size_t b = 0; b < m.matrix.size() && kernel_symmetric; ++b) {
                auto vb = decode_slice(m, b);
                std::vector<int> pb(vb.rbegin(), vb.rend());
                if (m.matrix[a][b] != m.matrix[ia][encode_slice(m, pb)]) kernel_symmetric = false;
            }
        }
        bool shared = m.states.size() == 1;
        if (fixes && kernel_symmetric && shared) {
            bool ok = false;
            std::string err;
            try {
                ok = check_markov_symmetry_propagation(m, {rev});
            } catch (const std::exception& e) {
                err = e.what();
            }
            checks.push_back({"spatial symmetry propagates to the net", ok, "", err.empty() ? std::vector<std::string>{} : std::vector<std::string>{err}});
        }
    }

    if (s.paloop) {
        auto ext = extend_pa_loop(*s.paloop);
        checks.push_back({"perception-action loop extension keeps the marginal", ext.marginal_matches, "", {}});
        for (int t = 0; t + 1 < s.paloop->T; ++t) {
            auto nh = non_heteronomy(*s.paloop, t);
            checks.push_back({"non-heteronomy at t=" + std::to_string(t) + " matches co-action existence", nh.consistent(),
                              "H = " + fmt(nh.bits) + " bits, actions " + (nh.actions_exist ? "exist" : "absent"), {}});
        }
    }

    std::ostringstream text;
    text << header(s);
    Json rows = Json::array();
    std::size_t failed = 0;
    for (const auto& c : checks) {
        failed += !c.passed;
        text << (c.passed ? "[pass] " : "[FAIL] ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
        for (const auto& ce : c.counterexamples) text << "    " << ce << "\n";
        rows.push_back(Json{{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"counterexamples", c.counterexamples}});
    }
    text << "summary: " << checks.size() << " checks, " << failed << " failed\n";
    emit(o, Json{{"system", s.name}, {"command", "verify"}, {"checks", rows}, {"failed", failed}}, text.str());
    return failed ? 1 : 0;
}

// ---------------------------------------------------------------- workload

int cmd_workload(const Options& o) {
    Session s = load(o);
    auto ex = sli_workload(s.net, WorkloadMode::exhaustive), dis = sli_workload(s.net, WorkloadMode::disintegration);
    std::ostringstream text;
    text << header(s) << "SLI evaluations, all patterns and partitions: " << ex.get_str() << "\n"
         << "SLI evaluations, all trajectories and partitions: " << dis.get_str() << "\n";
    emit(o, Json{{"system", s.name}, {"command", "workload"}, {"exhaustive", ex.get_str()}, {"disintegration", dis.get_str()}},
         text.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Integrated spatiotemporal patterns in discrete Bayesian networks"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("system", o.system_path, "system file");
        sub->add_option("--builtin", o.builtin, "built-in system: mc-const or mc-eps");
        sub->add_option("--eps", o.eps, "noise level of mc-eps as p/q")->capture_default_str();
        sub->add_option("--trajectory", o.trajectory, "1-based trajectory index (representatives for mc-eps)");
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--cap-partitions", o.cap_partitions, "largest ground set for partition enumeration")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--cap-states", o.cap_states, "largest joint state count")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_flag("--json", o.json, "print a JSON report");
    };
    auto agency = [&](CLI::App* sub) {
        sub->add_option("--time", o.time, "time step t (default: every step with a successor)");
        sub->add_option("--anchor", o.anchor, "anchor entity as a pattern literal, e.g. 2/0=1,1/1=0");
    };

    auto* analyze = app.add_subcommand("analyze", "disintegration hierarchy per trajectory");
    common(analyze);
    analyze->add_option("--dot", o.dot_dir, "directory for DOT files of each level");
    analyze->add_option("--csv", o.csv_path, "write every partition's SLI as CSV");
    analyze->add_option("--elide", o.elide, "list partitions only for levels up to this size")->capture_default_str();

    auto* entities = app.add_subcommand("entities", "ι-entities per trajectory and their union");
    common(entities);
    entities->add_flag("--union-only", o.union_only, "skip per-trajectory dumps");
    entities->add_option("--pgm", o.pgm_dir, "directory for PGM grid images of each entity");

    auto* actions = app.add_subcommand("actions", "co-action pairs over the ι-entity set");
    common(actions);
    agency(actions);

    auto* perceptions = app.add_subcommand("perceptions", "branch-morphs and perceptions");
    common(perceptions);
    agency(perceptions);
    perceptions->add_option("--zeta", o.zeta, "mutually exclusive proxy set: pattern literals separated by ';'");
    perceptions->add_option("--depth", o.depth, "branching looks at t+1..t+depth")->check(CLI::PositiveNumber);

    auto* hasse = app.add_subcommand("hasse", "Hasse components and symmetry orbits of each level");
    common(hasse);
    hasse->add_option("--dot", o.dot_dir, "directory for DOT files");
    hasse->add_option("--level", o.level, "restrict to one level (1-based)");
    hasse->add_option("--group", o.group, "named group from the system file");

    auto* verify = app.add_subcommand("verify", "runtime theorem checks");
    common(verify);
    verify->add_option("--group", o.group, "named group from the system file");
    verify->add_flag("--no-refinement-filter", o.no_refinement_filter, "negative control: keep refined partitions");

    auto* workload = app.add_subcommand("workload", "SLI evaluation counts");
    common(workload);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*analyze) return cmd_analyze(o);
        if (*entities) return cmd_entities(o);
        if (*actions) return cmd_actions(o);
        if (*perceptions) return cmd_perceptions(o);
        if (*hasse) return cmd_hasse(o);
        if (*verify) return cmd_verify(o);
        if (*workload) return cmd_workload(o);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const PerceptionError& e) {
        std::cerr << "error: " << e.what() << " (pass it with --zeta)\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
