#include "stpi/agency.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace stpi {

EntitySet EntitySet::from(std::vector<Pattern> patterns) {
    std::sort(patterns.begin(), patterns.end());
    patterns.erase(std::unique(patterns.begin(), patterns.end()), patterns.end());
    return {std::move(patterns)};
}

bool EntitySet::contains(const Pattern& p) const { return std::binary_search(members.begin(), members.end(), p); }

const char* to_string(ActionKind k) { return k == ActionKind::value ? "value" : "extent"; }

namespace {

void need_step(const BayesNet& net, int t) {
    if (!net.has_coords()) throw std::invalid_argument("actions and perceptions need (j, t) coordinates");
    if (t < net.min_t() || t + 1 > net.max_t())
        throw std::invalid_argument("time " + std::to_string(t) + " has no successor in the net");
}

std::uint64_t slice_mask(const BayesNet& net, const Pattern& p, int t) { return mask_of(slice_nodes(net, p, t)); }

std::uint64_t slice_mask_of_net(const BayesNet& net, int t) { return mask_of(net.slice(t)); }

Rational joint_of(const BayesNet& net, const Pattern& a, const Pattern& b) {
    auto m = a.merged(b);
    return m ? marginal_probability(net, *m) : Rational(0);
}

// Per time step index of (entity, trajectory) occurrences keyed by occupied slice and environment.
class CoActionIndex {
public:
    struct Entry {
        Pattern entity;
        std::size_t traj;
        Pattern next;
    };

    CoActionIndex(const BayesNet& net, const EntitySet& entities, int t) : net_(net), t_(t) {
        trajs_ = enumerate_trajectories(net);
        const std::uint64_t vt = slice_mask_of_net(net, t);
        for (const auto& y : entities.members) {
            std::uint64_t bt = slice_mask(net, y, t), bt1 = slice_mask(net, y, t + 1);
            if (!bt || !bt1) continue;
            Pattern next = y.restrict(bt1);
            for (std::size_t k = 0; k < trajs_.size(); ++k) {
                if (!occurs_in(y, trajs_[k].first)) continue;
                buckets_[{bt, trajs_[k].first.restrict(vt & ~bt)}].push_back({y, k, next});
            }
        }
    }

    std::vector<CoActionPair> find(const Pattern& actor, const Pattern& trajectory) const {
        std::vector<CoActionPair> out;
        const std::uint64_t at = slice_mask(net_, actor, t_), at1 = slice_mask(net_, actor, t_ + 1);
        const Pattern next = actor.restrict(at1);
        auto it = buckets_.find({at, trajectory.restrict(slice_mask_of_net(net_, t_) & ~at)});
        if (it == buckets_.end()) return out;
        for (const auto& e : it->second) {
            if (e.next == next || trajs_[e.traj].first == trajectory) continue;
            ActionKind kind = e.next.domain() != at1 ? ActionKind::extent : ActionKind::value;
            out.push_back({actor, trajectory, e.entity, trajs_[e.traj].first, t_, kind});
        }
        return out;
    }

    bool any() const {
        for (const auto& [key, entries] : buckets_) {
            // Up to two distinct trajectories per next slice suffice to decide existence.
            std::map<Pattern, std::vector<std::size_t>> by_next;
            for (const auto& e : entries) {
                auto& v = by_next[e.next];
                if (v.size() < 2 && std::find(v.begin(), v.end(), e.traj) == v.end()) v.push_back(e.traj);
            }
            for (auto a = by_next.begin(); a != by_next.end(); ++a)
                for (auto b = std::next(a); b != by_next.end(); ++b)
                    for (auto ta : a->second)
                        for (auto tb : b->second)
                            if (ta != tb) return true;
        }
        return false;
    }

private:
    const BayesNet& net_;
    int t_;
    std::vector<std::pair<Pattern, Rational>> trajs_;
    std::map<std::pair<std::uint64_t, Pattern>, std::vector<Entry>> buckets_;
};

}  // namespace

std::vector<CoActionPair> find_co_actions(const BayesNet& net, const EntitySet& entities, const Pattern& actor,
                                          const Pattern& trajectory, int t) {
    need_step(net, t);
    if (!entities.contains(actor)) throw std::invalid_argument("actor is not in the entity set");
    if (slice_nodes(net, actor, t).empty() || slice_nodes(net, actor, t + 1).empty())
        throw std::invalid_argument("actor needs non-empty slices at t and t+1");
    if (static_cast<int>(trajectory.size()) != net.size() || joint_probability(net, trajectory) == 0)
        throw std::invalid_argument("trajectory must be full and possible");
    if (!occurs_in(actor, trajectory)) throw std::invalid_argument("actor does not occur in the trajectory");
    return CoActionIndex(net, entities, t).find(actor, trajectory);
}

Pattern environment_of(const BayesNet& net, const Pattern& entity, const Pattern& trajectory, int t) {
    if (!occurs_in(entity, trajectory)) throw std::invalid_argument("entity does not occur in the trajectory");
    return trajectory.restrict(slice_mask_of_net(net, t) & ~slice_mask(net, entity, t));
}

Pattern past_of(const BayesNet& net, const Pattern& p, int t) { return time_window(net, p, net.min_t(), t); }

std::vector<Pattern> co_perception_entities(const BayesNet& net, const EntitySet& entities, const Pattern& anchor, int t) {
    need_step(net, t);
    if (slice_nodes(net, anchor, t).empty() || slice_nodes(net, anchor, t + 1).empty())
        throw std::invalid_argument("anchor needs non-empty slices at t and t+1");
    const Pattern past = past_of(net, anchor, t);
    std::vector<Pattern> out;
    for (const auto& y : entities.members) {
        if (slice_nodes(net, y, t).empty() || slice_nodes(net, y, t + 1).empty()) continue;
        if (past_of(net, y, t) == past) out.push_back(y);
    }
    return out;
}

std::optional<std::pair<Pattern, Pattern>> first_overlap(const BayesNet& net, const std::vector<Pattern>& ps) {
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j)
            if (ps[i] != ps[j] && joint_of(net, ps[i], ps[j]) > 0) return std::make_pair(ps[i], ps[j]);
    return std::nullopt;
}

SetPredicates set_predicates(const BayesNet& net, const std::vector<Pattern>& ps) {
    SetPredicates s;
    Rational covered = 0;
    for (const auto& [traj, p] : enumerate_trajectories(net))
        if (std::any_of(ps.begin(), ps.end(), [&](const Pattern& x) { return occurs_in(x, traj); })) covered += p;
    s.exhaustive = covered == 1;
    s.overlap = first_overlap(net, ps);
    s.mutually_exclusive = !s.overlap;
    s.non_interpenetrating = true;
    if (net.has_coords()) {
        const int t0 = net.min_t(), t1 = net.max_t();
        for (std::size_t i = 0; i < ps.size() && s.non_interpenetrating; ++i)
            for (std::size_t j = i + 1; j < ps.size() && s.non_interpenetrating; ++j) {
                if (ps[i] == ps[j]) continue;
                for (int t = t0; t <= t1; ++t) {
                    if (past_of(net, ps[i], t) != past_of(net, ps[j], t)) continue;
                    if (time_window(net, ps[i], t + 1, t1) == time_window(net, ps[j], t + 1, t1)) continue;
                    if (joint_of(net, ps[i], ps[j]) > 0) {
                        s.non_interpenetrating = false;
                        s.interpenetration = std::make_pair(ps[i], ps[j]);
                    }
                    break;  // the joint does not depend on t
                }
            }
    }
    return s;
}

std::vector<Rational> dist_over_mutually_exclusive(const BayesNet& net, const std::vector<Pattern>& ps,
                                                   const Pattern& c) {
    if (auto o = first_overlap(net, ps))
        throw std::invalid_argument("patterns " + render_pattern(net, o->first) + " and " +
                                    render_pattern(net, o->second) + " are not mutually exclusive");
    if (marginal_probability(net, c) == 0) throw std::domain_error("conditioning pattern is impossible");
    std::vector<Rational> w;
    Rational sum = 0;
    for (const auto& x : ps) {
        w.push_back(joint_of(net, x, c));
        sum += w.back();
    }
    if (sum == 0) throw std::domain_error("no pattern of the set is compatible with the conditioning pattern");
    for (auto& q : w) q /= sum;
    return w;
}

CoPerceptionContext make_context(const BayesNet& net, const EntitySet& entities, const Pattern& anchor, int t,
                                 std::optional<std::vector<Pattern>> zeta, int r) {
    if (!entities.contains(anchor)) throw std::invalid_argument("anchor is not in the entity set");
    if (r < 1) throw std::invalid_argument("branching depth must be at least 1");
    CoPerceptionContext ctx;
    ctx.anchor = anchor;
    ctx.t = t;
    ctx.r = r;
    ctx.members = co_perception_entities(net, entities, anchor, t);
    if (zeta) {
        auto z = EntitySet::from(*zeta).members;
        for (const auto& y : z)
            if (!std::binary_search(ctx.members.begin(), ctx.members.end(), y))
                throw std::invalid_argument("proxy member " + render_pattern(net, y) + " is not a co-perception entity");
        if (!std::binary_search(z.begin(), z.end(), anchor)) throw std::invalid_argument("proxy set must contain the anchor");
        ctx.zeta = std::move(z);
    }
    const std::uint64_t env = slice_mask_of_net(net, t) & ~slice_mask(net, anchor, t);
    ctx.environment_nodes = nodes_of(env);
    return ctx;
}

std::vector<Pattern> co_perception_environments(const BayesNet& net, const CoPerceptionContext& ctx) {
    const auto& nodes = ctx.environment_nodes;
    std::vector<Pattern> out;
    std::vector<int> a(nodes.size(), 0);
    while (true) {
        std::vector<Pattern::Item> items;
        for (std::size_t k = 0; k < nodes.size(); ++k) items.emplace_back(nodes[k], a[k]);
        Pattern env(std::move(items));
        for (const auto& y : ctx.active())
            if (joint_of(net, y, env) > 0) {
                out.push_back(env);
                break;
            }
        int k = static_cast<int>(nodes.size()) - 1;
        while (k >= 0 && ++a[k] == static_cast<int>(net.space(nodes[k]).size())) a[k--] = 0;
        if (k < 0) break;
    }
    return out;
}

std::vector<std::vector<Pattern>> branching_partition(const BayesNet& net, const CoPerceptionContext& ctx) {
    std::vector<std::vector<Pattern>> blocks;
    std::map<Pattern, std::size_t> index;
    for (const auto& y : ctx.active()) {
        Pattern key = time_window(net, y, ctx.t + 1, ctx.t + ctx.r);
        auto [it, fresh] = index.emplace(key, blocks.size());
        if (fresh) blocks.emplace_back();
        blocks[it->second].push_back(y);
    }
    return blocks;
}

BranchMorph branch_morph(const BayesNet& net, const CoPerceptionContext& ctx, const Pattern& environment) {
    if (auto o = first_overlap(net, ctx.active()))
        throw PerceptionError("perception not uniquely defined: " + render_pattern(net, o->first) + " and " +
                              render_pattern(net, o->second) +
                              " are co-perception entities that co-occur; choose a mutually exclusive proxy set");
    auto branches = branching_partition(net, ctx);
    BranchMorph bm{environment, {}};
    Rational sum = 0;
    for (const auto& b : branches) {
        Rational w = 0;
        for (const auto& y : b) w += joint_of(net, y, environment);
        bm.distribution.push_back(w);
        sum += w;
    }
    if (sum == 0) throw std::domain_error("environment " + render_pattern(net, environment) + " is not a co-perception environment");
    for (auto& q : bm.distribution) q /= sum;
    return bm;
}

Perceptions perception_partition(const BayesNet& net, const CoPerceptionContext& ctx) {
    Perceptions out;
    out.branches = branching_partition(net, ctx);
    auto less = [](const std::vector<Rational>& a, const std::vector<Rational>& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            [](const Rational& x, const Rational& y) { return x < y; });
    };
    std::map<std::vector<Rational>, std::size_t, decltype(less)> groups(less);
    for (const auto& env : co_perception_environments(net, ctx)) {
        out.morphs.push_back(branch_morph(net, ctx, env));
        auto [it, fresh] = groups.emplace(out.morphs.back().distribution, out.blocks.size());
        if (fresh) out.blocks.emplace_back();
        out.blocks[it->second].push_back(env);
    }
    return out;
}

// ---------------------------------------------------------------- perception-action loop

void validate(const PaLoop& l) {
    const std::size_t ne = l.e_states.size(), nm = l.m_states.size();
    if (ne == 0 || nm == 0) throw std::invalid_argument("perception-action loop needs non-empty state spaces");
    if (l.T < 2) throw std::invalid_argument("perception-action loop needs at least two time steps");
    if (l.e0.size() != ne || l.m0.size() != nm) throw std::invalid_argument("initial distributions have the wrong length");
    if (l.env_kernel.size() != static_cast<std::size_t>(l.T - 1) || l.mem_kernel.size() != static_cast<std::size_t>(l.T - 1))
        throw std::invalid_argument("one environment and one memory kernel per transition are required");
    auto check = [](const Matrix& k, std::size_t rows, std::size_t cols, const char* what) {
        if (k.size() != rows) throw std::invalid_argument(std::string(what) + " kernel has the wrong number of rows");
        for (const auto& r : k) {
            if (r.size() != cols) throw std::invalid_argument(std::string(what) + " kernel row has the wrong length");
            Rational s = 0;
            for (const auto& q : r) {
                if (!is_probability(q)) throw std::invalid_argument(std::string(what) + " kernel entry outside [0,1]");
                s += q;
            }
            if (s != 1) throw std::invalid_argument(std::string(what) + " kernel row does not sum to 1");
        }
    };
    for (int t = 0; t + 1 < l.T; ++t) {
        check(l.env_kernel[t], ne * nm, ne, "environment");
        check(l.mem_kernel[t], ne * nm, nm, "memory");
    }
}

BayesNet build_pa_net(const PaLoop& l) {
    validate(l);
    std::vector<BayesNet::NodeSpec> nodes;
    for (int t = 0; t < l.T; ++t) {
        BayesNet::NodeSpec e, m;
        e.id = {"1/" + std::to_string(t), Coord{1, t}};
        m.id = {"2/" + std::to_string(t), Coord{2, t}};
        e.space.symbols = l.e_states;
        m.space.symbols = l.m_states;
        if (t == 0) {
            e.rows = {l.e0};
            m.rows = {l.m0};
        } else {
            std::vector<std::string> pa{"1/" + std::to_string(t - 1), "2/" + std::to_string(t - 1)};
            e.parents = m.parents = pa;
            e.rows = l.env_kernel[t - 1];
            m.rows = l.mem_kernel[t - 1];
        }
        nodes.push_back(std::move(e));
        nodes.push_back(std::move(m));
    }
    return BayesNet::build("pa-loop", std::move(nodes));
}

EntitySet pa_entities(const BayesNet& net) {
    std::uint64_t mrow = 0;
    for (int i = 0; i < net.size(); ++i)
        if (net.id(i).coord && net.id(i).coord->j == 2) mrow |= std::uint64_t{1} << i;
    std::vector<Pattern> ms;
    for (const auto& [traj, p] : enumerate_trajectories(net)) ms.push_back(traj.restrict(mrow));
    return EntitySet::from(std::move(ms));
}

namespace {

std::vector<std::vector<int>> group_by(const std::vector<int>& ground, const std::function<std::vector<Rational>(int)>& key) {
    std::vector<std::vector<int>> blocks;
    std::vector<std::vector<Rational>> keys;
    for (int g : ground) {
        auto k = key(g);
        auto it = std::find(keys.begin(), keys.end(), k);
        if (it == keys.end()) {
            keys.push_back(std::move(k));
            blocks.push_back({g});
        } else {
            blocks[it - keys.begin()].push_back(g);
        }
    }
    return blocks;
}

void need_transition(const PaLoop& l, int t) {
    if (t < 0 || t + 1 >= l.T) throw std::invalid_argument("time step has no transition in the loop");
}

}  // namespace

std::vector<std::vector<int>> pa_sensor_partition(const PaLoop& l, int t, std::optional<int> m,
                                                  const std::vector<int>& environments) {
    need_transition(l, t);
    const int ne = static_cast<int>(l.e_states.size()), nm = static_cast<int>(l.m_states.size());
    std::vector<int> ground = environments;
    if (ground.empty())
        for (int e = 0; e < ne; ++e) ground.push_back(e);
    return group_by(ground, [&](int e) {
        std::vector<Rational> k;
        for (int mm = 0; mm < nm; ++mm) {
            if (m && mm != *m) continue;
            const auto& row = l.mem_kernel[t][e * nm + mm];
            k.insert(k.end(), row.begin(), row.end());
        }
        return k;
    });
}

std::vector<std::vector<int>> pa_action_partition(const PaLoop& l, int t) {
    need_transition(l, t);
    const int ne = static_cast<int>(l.e_states.size()), nm = static_cast<int>(l.m_states.size());
    std::vector<int> ground(nm);
    for (int m = 0; m < nm; ++m) ground[m] = m;
    return group_by(ground, [&](int m) {
        std::vector<Rational> k;
        for (int e = 0; e < ne; ++e) {
            const auto& row = l.env_kernel[t][e * nm + m];
            k.insert(k.end(), row.begin(), row.end());
        }
        return k;
    });
}

ExtendedPaLoop extend_pa_loop(const PaLoop& l) {
    const BayesNet base = build_pa_net(l);
    const int ne = static_cast<int>(l.e_states.size()), nm = static_cast<int>(l.m_states.size());
    std::vector<std::vector<std::vector<int>>> sensor, action;
    for (int t = 0; t + 1 < l.T; ++t) {
        sensor.push_back(pa_sensor_partition(l, t));
        action.push_back(pa_action_partition(l, t));
    }
    auto name = [](const char* p, int t) { return std::string(p) + std::to_string(t); };
    auto block_of = [](const std::vector<std::vector<int>>& blocks, int v) {
        for (std::size_t b = 0; b < blocks.size(); ++b)
            if (std::find(blocks[b].begin(), blocks[b].end(), v) != blocks[b].end()) return static_cast<int>(b);
        throw std::logic_error("value outside every block");
    };
    auto delta_rows = [&](const std::vector<std::vector<int>>& blocks, int n) {
        std::vector<std::vector<Rational>> rows(n, std::vector<Rational>(blocks.size(), Rational(0)));
        for (int v = 0; v < n; ++v) rows[v][block_of(blocks, v)] = 1;
        return rows;
    };
    auto symbols = [](const char* p, std::size_t n) {
        std::vector<std::string> s;
        for (std::size_t i = 0; i < n; ++i) s.push_back(std::string(p) + std::to_string(i));
        return s;
    };

    std::vector<BayesNet::NodeSpec> nodes;
    for (int t = 0; t < l.T; ++t) {
        BayesNet::NodeSpec e, m;
        e.id.label = name("E", t);
        m.id.label = name("M", t);
        e.space.symbols = l.e_states;
        m.space.symbols = l.m_states;
        if (t == 0) {
            e.rows = {l.e0};
            m.rows = {l.m0};
        } else {
            const auto& sb = sensor[t - 1];
            const auto& ab = action[t - 1];
            e.parents = {name("E", t - 1), name("A", t - 1)};
            for (int ee = 0; ee < ne; ++ee)
                for (std::size_t a = 0; a < ab.size(); ++a) e.rows.push_back(l.env_kernel[t - 1][ee * nm + ab[a][0]]);
            m.parents = {name("M", t - 1), name("S", t - 1)};
            for (int mm = 0; mm < nm; ++mm)
                for (std::size_t s = 0; s < sb.size(); ++s) m.rows.push_back(l.mem_kernel[t - 1][sb[s][0] * nm + mm]);
        }
        nodes.push_back(std::move(e));
        nodes.push_back(std::move(m));
        if (t + 1 < l.T) {
            BayesNet::NodeSpec s, a;
            s.id.label = name("S", t);
            a.id.label = name("A", t);
            s.space.symbols = symbols("s", sensor[t].size());
            a.space.symbols = symbols("a", action[t].size());
            s.parents = {name("E", t)};
            a.parents = {name("M", t)};
            s.rows = delta_rows(sensor[t], ne);
            a.rows = delta_rows(action[t], nm);
            nodes.push_back(std::move(s));
            nodes.push_back(std::move(a));
        }
    }
    BayesNet ext = BayesNet::build("pa-loop-extended", std::move(nodes));

    // Marginal over (M_T, E_T) of the extension. S_t and A_t each feed a single child, so they are
    // summed out step by step instead of enumerating the full joint of the extension.
    std::vector<int> pos(base.size());
    for (int i = 0; i < base.size(); ++i) {
        const auto& c = *base.id(i).coord;
        pos[i] = *ext.find(name(c.j == 1 ? "E" : "M", c.t));
    }
    std::map<std::vector<int>, Rational> marg;
    std::vector<int> key(base.size(), 0), full(ext.size(), 0);
    const auto sum_out = [&](int hidden, int child) {
        Rational s = 0;
        for (int v = 0; v < static_cast<int>(ext.space(hidden).size()); ++v) {
            full[hidden] = v;
            const Rational& ph = ext.mech_prob(hidden, full);
            if (ph != 0) s += ph * ext.mech_prob(child, full);
        }
        return s;
    };
    while (true) {
        for (int i = 0; i < base.size(); ++i) full[pos[i]] = key[i];
        Rational p = ext.mech_prob(*ext.find("E0"), full) * ext.mech_prob(*ext.find("M0"), full);
        for (int t = 0; t + 1 < l.T && p != 0; ++t) {
            p *= sum_out(*ext.find(name("A", t)), *ext.find(name("E", t + 1)));
            p *= sum_out(*ext.find(name("S", t)), *ext.find(name("M", t + 1)));
        }
        if (p != 0) marg[key] = p;
        int k = base.size() - 1;
        while (k >= 0 && ++key[k] == static_cast<int>(base.space(k).size())) key[k--] = 0;
        if (k < 0) break;
    }
    std::map<std::vector<int>, Rational> orig;
    const auto& bt = base.table();
    for (std::size_t k = 0; k < bt.values.size(); ++k) orig[bt.values[k]] += bt.probs[k];
    bool same = marg == orig;
    return {std::move(ext), std::move(sensor), std::move(action), same};
}

NonHeteronomy non_heteronomy(const PaLoop& l, int t) {
    need_transition(l, t);
    const BayesNet net = build_pa_net(l);
    const int e_node = *net.find(1, t), m_next = *net.find(2, t + 1);
    std::map<int, Rational> pe;
    std::map<std::pair<int, int>, Rational> pem;
    for (const auto& [traj, p] : enumerate_trajectories(net)) {
        int e = *traj.at(e_node), m = *traj.at(m_next);
        pe[e] += p;
        pem[{e, m}] += p;
    }
    NonHeteronomy out;
    std::map<int, int> support;
    for (const auto& [em, p] : pem) {
        out.bits -= to_double(p) * std::log2(to_double(p / pe.at(em.first)));
        ++support[em.first];
    }
    for (const auto& [e, n] : support)
        if (n >= 2) out.positive = true;
    if (out.bits < 0) out.bits = 0;
    out.actions_exist = CoActionIndex(net, pa_entities(net), t).any();
    return out;
}

}  // namespace stpi
