#include "stpi/model.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace stpi {

std::optional<int> StateSpace::index_of(const std::string& s) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i] == s) return static_cast<int>(i);
    return std::nullopt;
}

// ---------------------------------------------------------------- BayesNet

BayesNet BayesNet::build(std::string name, std::vector<NodeSpec> nodes, Caps caps) {
    const int n = static_cast<int>(nodes.size());
    if (n == 0) throw std::invalid_argument("net has no nodes");
    if (n > 64) throw std::invalid_argument("nets are limited to 64 nodes");

    std::map<std::string, int> by_label;
    int with_coords = 0;
    for (int i = 0; i < n; ++i) {
        const auto& nd = nodes[i];
        if (!by_label.emplace(nd.id.label, i).second)
            throw std::invalid_argument("duplicate node id '" + nd.id.label + "'");
        if (nd.space.symbols.empty())
            throw std::invalid_argument("node '" + nd.id.label + "' has an empty state space");
        std::set<std::string> seen(nd.space.symbols.begin(), nd.space.symbols.end());
        if (seen.size() != nd.space.symbols.size())
            throw std::invalid_argument("node '" + nd.id.label + "' has duplicate state symbols");
        if (nd.id.coord) ++with_coords;
    }
    if (with_coords != 0 && with_coords != n)
        throw std::invalid_argument("coordinates must be present on all nodes or none");
    if (with_coords) {
        std::set<Coord> cs;
        for (const auto& nd : nodes)
            if (!cs.insert(*nd.id.coord).second)
                throw std::invalid_argument("duplicate coordinate on node '" + nd.id.label + "'");
    }

    std::vector<std::vector<int>> parents(n);
    std::vector<std::vector<int>> children(n);
    std::vector<int> indeg(n, 0);
    for (int i = 0; i < n; ++i) {
        std::set<int> uniq;
        for (const auto& pl : nodes[i].parents) {
            auto it = by_label.find(pl);
            if (it == by_label.end())
                throw std::invalid_argument("node '" + nodes[i].id.label + "' has unknown parent '" + pl + "'");
            if (it->second == i) throw std::invalid_argument("node '" + pl + "' lists itself as parent");
            if (!uniq.insert(it->second).second)
                throw std::invalid_argument("node '" + nodes[i].id.label + "' repeats parent '" + pl + "'");
            parents[i].push_back(it->second);
            children[it->second].push_back(i);
            ++indeg[i];
        }
    }

    auto key = [&](int i) {
        if (with_coords) return std::tuple<int, int, int>(nodes[i].id.coord->t, nodes[i].id.coord->j, i);
        return std::tuple<int, int, int>(0, 0, i);
    };
    auto cmp = [&](int a, int b) { return key(a) > key(b); };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> ready(cmp);
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push(i);
    std::vector<int> order;
    while (!ready.empty()) {
        int i = ready.top();
        ready.pop();
        order.push_back(i);
        for (int c : children[i])
            if (--indeg[c] == 0) ready.push(c);
    }
    if (static_cast<int>(order.size()) != n) throw std::invalid_argument("graph has a cycle");

    std::vector<int> new_index(n);
    for (int k = 0; k < n; ++k) new_index[order[k]] = k;

    std::vector<std::size_t> space_size(n);
    for (int i = 0; i < n; ++i) space_size[i] = nodes[i].space.size();

    BayesNet net;
    net.name_ = std::move(name);
    net.caps_ = caps;
    net.has_coords_ = with_coords != 0;
    for (int k = 0; k < n; ++k) {
        auto& nd = nodes[order[k]];
        Mechanism m;
        std::size_t configs = 1;
        for (int p : parents[order[k]]) {
            m.parents.push_back(new_index[p]);
            configs *= space_size[p];
            if (configs > (std::size_t{1} << 24))
                throw std::invalid_argument("node '" + nd.id.label + "' has too many parent configurations");
        }
        if (nd.rows.size() != configs)
            throw std::invalid_argument("node '" + nd.id.label + "' needs " + std::to_string(configs) +
                                        " cpt rows, got " + std::to_string(nd.rows.size()));
        for (std::size_t r = 0; r < configs; ++r) {
            const auto& row = nd.rows[r];
            if (row.size() != nd.space.size())
                throw std::invalid_argument("node '" + nd.id.label + "' cpt row " + std::to_string(r) +
                                            " has wrong length");
            Rational sum = 0;
            for (const auto& q : row) {
                if (!is_probability(q))
                    throw std::invalid_argument("node '" + nd.id.label + "' has probability outside [0,1]");
                sum += q;
            }
            if (sum != 1)
                throw std::invalid_argument("node '" + nd.id.label + "' cpt row " + std::to_string(r) +
                                            " sums to " + to_string(sum));
        }
        m.rows = std::move(nd.rows);
        net.ids_.push_back(std::move(nd.id));
        net.spaces_.push_back(std::move(nd.space));
        net.mechs_.push_back(std::move(m));
    }
    return net;
}

std::optional<int> BayesNet::find(const std::string& label) const {
    for (int i = 0; i < size(); ++i)
        if (ids_[i].label == label) return i;
    return std::nullopt;
}

std::optional<int> BayesNet::find(int j, int t) const {
    if (!has_coords_) return std::nullopt;
    for (int i = 0; i < size(); ++i)
        if (ids_[i].coord->j == j && ids_[i].coord->t == t) return i;
    return std::nullopt;
}

int BayesNet::min_t() const {
    if (!has_coords_) throw std::logic_error("net has no coordinates");
    int m = ids_[0].coord->t;
    for (const auto& id : ids_) m = std::min(m, id.coord->t);
    return m;
}

int BayesNet::max_t() const {
    if (!has_coords_) throw std::logic_error("net has no coordinates");
    int m = ids_[0].coord->t;
    for (const auto& id : ids_) m = std::max(m, id.coord->t);
    return m;
}

std::vector<int> BayesNet::spatial_indices() const {
    if (!has_coords_) throw std::logic_error("net has no coordinates");
    std::set<int> js;
    for (const auto& id : ids_) js.insert(id.coord->j);
    return {js.begin(), js.end()};
}

std::vector<int> BayesNet::slice(int t) const {
    if (!has_coords_) throw std::logic_error("net has no coordinates");
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (ids_[i].coord->t == t) out.push_back(i);
    return out;
}

std::string BayesNet::node_name(int i) const {
    if (has_coords_) return std::to_string(ids_[i].coord->j) + "/" + std::to_string(ids_[i].coord->t);
    return ids_[i].label;
}

std::uint64_t BayesNet::state_count() const {
    std::uint64_t c = 1;
    for (const auto& s : spaces_) {
        if (c > (std::uint64_t{1} << 62) / s.size()) return std::uint64_t{1} << 62;
        c *= s.size();
    }
    return c;
}

std::size_t BayesNet::row_index(int node, const std::vector<int>& a) const {
    std::size_t r = 0;
    for (int p : mechs_[node].parents) r = r * spaces_[p].size() + static_cast<std::size_t>(a[p]);
    return r;
}

const Rational& BayesNet::mech_prob(int node, const std::vector<int>& a) const {
    return mechs_[node].rows[row_index(node, a)][a[node]];
}

const TrajectoryTable& BayesNet::table() const {
    std::call_once(lazy_->once, [this] {
        if (state_count() > caps_.states)
            throw std::length_error("state space of " + std::to_string(state_count()) +
                                    " trajectories exceeds cap " + std::to_string(caps_.states));
        auto tab = std::make_unique<TrajectoryTable>();
        const int n = size();
        std::vector<int> a(n, 0);
        std::vector<Rational> prefix(n + 1);
        prefix[0] = 1;
        // Depth-first over nodes in index (topological) order, first node most significant.
        std::function<void(int)> rec = [&](int k) {
            if (k == n) {
                tab->values.push_back(a);
                tab->probs.push_back(prefix[n]);
                return;
            }
            for (int v = 0; v < static_cast<int>(spaces_[k].size()); ++v) {
                a[k] = v;
                const Rational& q = mech_prob(k, a);
                if (q == 0) continue;
                prefix[k + 1] = prefix[k] * q;
                rec(k + 1);
            }
            a[k] = 0;
        };
        rec(0);
        lazy_->table = std::move(tab);
    });
    if (!lazy_->table) throw std::length_error("trajectory table unavailable (cap exceeded)");
    return *lazy_->table;
}

// ---------------------------------------------------------------- probabilities

namespace {

void check_pattern(const BayesNet& net, const Pattern& p) {
    for (auto [node, v] : p.items()) {
        if (node < 0 || node >= net.size()) throw std::out_of_range("pattern refers to unknown node");
        if (v < 0 || v >= static_cast<int>(net.space(node).size()))
            throw std::out_of_range("pattern assigns unknown symbol to node " + net.node_name(node));
    }
}

bool matches(const Pattern& p, const std::vector<int>& traj) {
    for (auto [node, v] : p.items())
        if (traj[node] != v) return false;
    return true;
}

}  // namespace

Rational joint_probability(const BayesNet& net, const Pattern& trajectory) {
    check_pattern(net, trajectory);
    if (static_cast<int>(trajectory.size()) != net.size())
        throw std::invalid_argument("joint probability needs a full trajectory");
    std::vector<int> a(net.size());
    for (auto [node, v] : trajectory.items()) a[node] = v;
    Rational p = 1;
    for (int i = 0; i < net.size() && p != 0; ++i) p *= net.mech_prob(i, a);
    return p;
}

Rational marginal_probability(const BayesNet& net, const Pattern& pattern) {
    check_pattern(net, pattern);
    if (pattern.empty()) return 1;
    const auto& tab = net.table();
    Rational s = 0;
    for (std::size_t k = 0; k < tab.values.size(); ++k)
        if (matches(pattern, tab.values[k])) s += tab.probs[k];
    return s;
}

Rational conditional_probability(const BayesNet& net, const Pattern& target, const Pattern& given) {
    Rational pg = marginal_probability(net, given);
    if (pg == 0) throw std::domain_error("conditioning on a probability-0 pattern");
    auto joint = target.merged(given);
    if (!joint) return 0;
    return marginal_probability(net, *joint) / pg;
}

std::vector<MorphEntry> morph(const BayesNet& net, const Pattern& pattern) {
    Rational pa = marginal_probability(net, pattern);
    if (pa == 0) throw std::domain_error("morph of a probability-0 pattern");
    const auto& tab = net.table();
    std::vector<int> rest;
    for (int i = 0; i < net.size(); ++i)
        if (!pattern.contains(i)) rest.push_back(i);
    std::vector<MorphEntry> out;
    for (std::size_t k = 0; k < tab.values.size(); ++k) {
        if (!matches(pattern, tab.values[k])) continue;
        std::vector<Pattern::Item> items;
        for (int i : rest) items.emplace_back(i, tab.values[k][i]);
        out.push_back({Pattern(std::move(items)), tab.probs[k] / pa});
    }
    return out;
}

std::vector<std::pair<Pattern, Rational>> enumerate_trajectories(const BayesNet& net) {
    const auto& tab = net.table();
    std::vector<std::pair<Pattern, Rational>> out;
    out.reserve(tab.values.size());
    for (std::size_t k = 0; k < tab.values.size(); ++k) out.emplace_back(Pattern::full(tab.values[k]), tab.probs[k]);
    return out;
}

bool is_deterministic(const BayesNet& net) {
    for (int i = 0; i < net.size(); ++i) {
        if (net.mechanism(i).parents.empty()) continue;
        for (const auto& row : net.mechanism(i).rows)
            for (const auto& q : row)
                if (q != 0 && q != 1) return false;
    }
    return true;
}

namespace {

// A parentless node whose row is a point mass is a constant, not a source of randomness.
bool is_constant_root(const BayesNet& net, int i) {
    const auto& m = net.mechanism(i);
    if (!m.parents.empty()) return false;
    for (const auto& q : m.rows[0])
        if (q == 1) return true;
    return false;
}

}  // namespace

std::uint64_t root_state_count(const BayesNet& net) {
    std::uint64_t c = 1;
    for (int i = 0; i < net.size(); ++i)
        if (net.mechanism(i).parents.empty() && !is_constant_root(net, i)) c *= net.space(i).size();
    return c;
}

std::uint64_t deterministic_pattern_count(const BayesNet& net, const Pattern& pattern) {
    if (!is_deterministic(net)) throw std::domain_error("net has a non-deterministic mechanism");
    for (int i = 0; i < net.size(); ++i) {
        const auto& m = net.mechanism(i);
        if (!m.parents.empty() || is_constant_root(net, i)) continue;
        Rational u(1, static_cast<unsigned long>(net.space(i).size()));
        for (const auto& q : m.rows[0])
            if (q != u) throw std::domain_error("root distribution of " + net.node_name(i) + " is not uniform");
    }
    Rational n = marginal_probability(net, pattern) * Rational(static_cast<unsigned long>(root_state_count(net)));
    if (n.get_den() != 1) throw std::logic_error("non-integral deterministic count");
    return n.get_num().get_ui();
}

bool verify_time_slice_markov(const BayesNet& net) {
    if (!net.has_coords()) throw std::invalid_argument("time-slice check needs coordinates");
    const auto& tab = net.table();
    const int t0 = net.min_t(), t1 = net.max_t();
    for (int t = t0; t < t1; ++t) {
        std::vector<int> hist, cur = net.slice(t), next = net.slice(t + 1);
        for (int i = 0; i < net.size(); ++i)
            if (net.id(i).coord->t <= t) hist.push_back(i);
        auto proj = [](const std::vector<int>& traj, const std::vector<int>& nodes) {
            std::vector<int> v;
            v.reserve(nodes.size());
            for (int i : nodes) v.push_back(traj[i]);
            return v;
        };
        using Key = std::vector<int>;
        std::map<Key, Rational> ph, pc;
        std::map<std::pair<Key, Key>, Rational> phn, pcn;
        for (std::size_t k = 0; k < tab.values.size(); ++k) {
            Key h = proj(tab.values[k], hist), c = proj(tab.values[k], cur), nx = proj(tab.values[k], next);
            ph[h] += tab.probs[k];
            pc[c] += tab.probs[k];
            phn[{h, nx}] += tab.probs[k];
            pcn[{c, nx}] += tab.probs[k];
        }
        // Index of the current slice within the history projection.
        std::vector<std::size_t> cur_pos;
        for (int i : cur) cur_pos.push_back(std::find(hist.begin(), hist.end(), i) - hist.begin());
        std::map<Key, std::vector<Key>> nexts_of_cur;
        for (const auto& [cn, q] : pcn) nexts_of_cur[cn.first].push_back(cn.second);
        for (const auto& [h, qh] : ph) {
            Key c;
            for (auto p : cur_pos) c.push_back(h[p]);
            const Rational& qc = pc.at(c);
            for (const auto& nx : nexts_of_cur[c]) {
                auto it = phn.find({h, nx});
                Rational lhs = it == phn.end() ? Rational(0) : it->second / qh;
                Rational rhs = pcn.at({c, nx}) / qc;
                if (lhs != rhs) return false;
            }
            // Any continuation of h must also be a continuation of its current slice.
            for (auto it = phn.lower_bound({h, {}}); it != phn.end() && it->first.first == h; ++it)
                if (pcn.find({c, it->first.second}) == pcn.end()) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------- SubsetMarginals

SubsetMarginals::SubsetMarginals(const BayesNet& net, const Pattern& pattern) : pattern_(pattern) {
    check_pattern(net, pattern);
    const int k = static_cast<int>(pattern.size());
    if (k > 24) throw std::length_error("subset marginals limited to 24 nodes");
    node_pos_.assign(net.size(), -1);
    for (int i = 0; i < k; ++i) node_pos_[pattern.items()[i].first] = i;
    const std::uint32_t full = (std::uint32_t{1} << k);
    m_.assign(full, Rational(0));
    const auto& tab = net.table();
    for (std::size_t r = 0; r < tab.values.size(); ++r) {
        std::uint32_t a = 0;
        for (int i = 0; i < k; ++i)
            if (tab.values[r][pattern.items()[i].first] == pattern.items()[i].second) a |= (1u << i);
        m_[a] += tab.probs[r];
    }
    // Superset sums: m[S] = sum over agreement sets containing S.
    for (int b = 0; b < k; ++b)
        for (std::uint32_t s = 0; s < full; ++s)
            if (!(s & (1u << b))) m_[s] += m_[s | (1u << b)];
}

std::uint32_t SubsetMarginals::local_mask(std::uint64_t node_mask) const {
    std::uint32_t out = 0;
    for (int node : nodes_of(node_mask)) {
        int pos = node < static_cast<int>(node_pos_.size()) ? node_pos_[node] : -1;
        if (pos < 0) throw std::out_of_range("node outside the pattern's domain");
        out |= (1u << pos);
    }
    return out;
}

// ---------------------------------------------------------------- Markov chains

const std::vector<std::string>& MarkovSpec::states_of(int j) const {
    if (states.size() == 1) return states[0];
    return states.at(static_cast<std::size_t>(j - 1));
}

std::size_t MarkovSpec::slice_size() const {
    std::size_t s = 1;
    for (int j = 1; j <= J; ++j) s *= states_of(j).size();
    return s;
}

std::vector<int> decode_slice(const MarkovSpec& spec, std::size_t index) {
    std::vector<int> v(spec.J);
    for (int j = spec.J; j >= 1; --j) {
        auto s = spec.states_of(j).size();
        v[j - 1] = static_cast<int>(index % s);
        index /= s;
    }
    return v;
}

std::size_t encode_slice(const MarkovSpec& spec, const std::vector<int>& values) {
    std::size_t idx = 0;
    for (int j = 1; j <= spec.J; ++j) idx = idx * spec.states_of(j).size() + static_cast<std::size_t>(values[j - 1]);
    return idx;
}

namespace {

// Lexicographic index of the values of `js` (1-based spatial indices) taken from a slice vector.
std::size_t encode_sub(const MarkovSpec& spec, const std::vector<int>& js, const std::vector<int>& slice) {
    std::size_t idx = 0;
    for (int j : js) idx = idx * spec.states_of(j).size() + static_cast<std::size_t>(slice[j - 1]);
    return idx;
}

std::size_t sub_size(const MarkovSpec& spec, const std::vector<int>& js) {
    std::size_t s = 1;
    for (int j : js) s *= spec.states_of(j).size();
    return s;
}

// Chooses a minimal parent set for one node from a candidate list and returns the mechanism.
// `cond(cfg)` gives the conditional distribution for a full candidate configuration, or nullopt
// where the configuration has zero mass.
struct Candidate {
    int node;     // index into the chain's node numbering (t * J + j - 1)
    int size;
};

struct Pruned {
    std::vector<Candidate> kept;
    std::vector<std::vector<Rational>> rows;
};

Pruned prune_parents(const std::vector<Candidate>& cands, int own_size,
                     const std::function<std::optional<std::vector<Rational>>(const std::vector<int>&)>& cond) {
    const int c = static_cast<int>(cands.size());
    std::size_t total = 1;
    for (const auto& cd : cands) total *= static_cast<std::size_t>(cd.size);
    std::vector<std::vector<int>> cfgs(total);
    std::vector<std::optional<std::vector<Rational>>> dist(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::vector<int> v(c);
        std::size_t r = idx;
        for (int k = c - 1; k >= 0; --k) {
            v[k] = static_cast<int>(r % cands[k].size);
            r /= cands[k].size;
        }
        dist[idx] = cond(v);
        cfgs[idx] = std::move(v);
    }
    std::vector<bool> keep(c, true);
    auto consistent = [&](const std::vector<bool>& ks) {
        std::map<std::vector<int>, const std::vector<Rational>*> seen;
        for (std::size_t idx = 0; idx < total; ++idx) {
            if (!dist[idx]) continue;
            std::vector<int> key;
            for (int k = 0; k < c; ++k)
                if (ks[k]) key.push_back(cfgs[idx][k]);
            auto [it, fresh] = seen.emplace(key, &*dist[idx]);
            if (!fresh && *it->second != *dist[idx]) return false;
        }
        return true;
    };
    for (int k = 0; k < c; ++k) {
        keep[k] = false;
        if (!consistent(keep)) keep[k] = true;
    }
    Pruned out;
    std::vector<int> kept_pos;
    for (int k = 0; k < c; ++k)
        if (keep[k]) {
            out.kept.push_back(cands[k]);
            kept_pos.push_back(k);
        }
    // Parents are listed in ascending node order; candidates are generated in that order already
    // except for intra-slice ones, so sort explicitly.
    std::vector<int> order(out.kept.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return out.kept[a].node < out.kept[b].node; });
    std::vector<Candidate> sorted_kept;
    std::vector<int> sorted_pos;
    for (int o : order) {
        sorted_kept.push_back(out.kept[o]);
        sorted_pos.push_back(kept_pos[o]);
    }
    out.kept = sorted_kept;
    std::size_t rows = 1;
    for (const auto& cd : out.kept) rows *= static_cast<std::size_t>(cd.size);
    // Configurations that cannot occur get a point mass on the first state, so nets whose
    // reachable rows are deterministic stay deterministic.
    std::vector<Rational> point(own_size, Rational(0));
    point[0] = 1;
    out.rows.assign(rows, point);
    std::vector<bool> filled(rows, false);
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (!dist[idx]) continue;
        std::size_t r = 0;
        for (std::size_t k = 0; k < sorted_pos.size(); ++k)
            r = r * static_cast<std::size_t>(sorted_kept[k].size) + static_cast<std::size_t>(cfgs[idx][sorted_pos[k]]);
        if (!filled[r]) {
            out.rows[r] = *dist[idx];
            filled[r] = true;
        }
    }
    return out;
}

void check_stochastic(const MarkovSpec& spec) {
    if (spec.J < 1) throw std::invalid_argument("J must be at least 1");
    if (spec.T < 1) throw std::invalid_argument("T must be at least 1");
    if (spec.states.size() != 1 && spec.states.size() != static_cast<std::size_t>(spec.J))
        throw std::invalid_argument("states must be given once or per spatial index");
    for (const auto& s : spec.states)
        if (s.empty()) throw std::invalid_argument("empty state space");
    const std::size_t n = spec.slice_size();
    if (spec.matrix.size() != n) throw std::invalid_argument("markov matrix has wrong number of rows");
    for (const auto& row : spec.matrix)
        if (row.size() != n) throw std::invalid_argument("markov matrix has wrong number of columns");
    for (std::size_t from = 0; from < n; ++from) {
        Rational s = 0;
        for (std::size_t to = 0; to < n; ++to) {
            if (!is_probability(spec.matrix[to][from]))
                throw std::invalid_argument("markov matrix entry outside [0,1]");
            s += spec.matrix[to][from];
        }
        if (s != 1)
            throw std::invalid_argument("markov matrix column " + std::to_string(from) + " sums to " + to_string(s));
    }
    if (spec.initial.size() != n) throw std::invalid_argument("initial distribution has wrong length");
    Rational s = 0;
    for (const auto& q : spec.initial) {
        if (!is_probability(q)) throw std::invalid_argument("initial probability outside [0,1]");
        s += q;
    }
    if (s != 1) throw std::invalid_argument("initial distribution sums to " + to_string(s));
    for (int j : spec.driving)
        if (j < 1 || j > spec.J) throw std::invalid_argument("driving index out of range");
}

}  // namespace

Matrix compose_driven_kernel(const MarkovSpec& shape, const Matrix& drive, const Matrix& driven) {
    std::vector<int> B = shape.driving, A;
    std::sort(B.begin(), B.end());
    for (int j = 1; j <= shape.J; ++j)
        if (!std::binary_search(B.begin(), B.end(), j)) A.push_back(j);
    const std::size_t n = shape.slice_size(), nA = sub_size(shape, A), nB = sub_size(shape, B);
    if (drive.size() != nB || driven.size() != nA) throw std::invalid_argument("driven kernel shape mismatch");
    for (const auto& r : drive)
        if (r.size() != nA * nB) throw std::invalid_argument("drive kernel shape mismatch");
    for (const auto& r : driven)
        if (r.size() != nB * nA) throw std::invalid_argument("driven kernel shape mismatch");
    Matrix m(n, std::vector<Rational>(n));
    for (std::size_t from = 0; from < n; ++from) {
        auto xf = decode_slice(shape, from);
        std::size_t a_t = encode_sub(shape, A, xf), b_t = encode_sub(shape, B, xf);
        for (std::size_t to = 0; to < n; ++to) {
            auto xt = decode_slice(shape, to);
            std::size_t a1 = encode_sub(shape, A, xt), b1 = encode_sub(shape, B, xt);
            m[to][from] = drive[b1][a_t * nB + b_t] * driven[a1][b1 * nA + a_t];
        }
    }
    return m;
}

BayesNet build_markov_chain(const MarkovSpec& spec, Caps caps) {
    check_stochastic(spec);
    const int J = spec.J;
    std::vector<int> B = spec.driving;
    std::sort(B.begin(), B.end());
    B.erase(std::unique(B.begin(), B.end()), B.end());
    auto is_driving = [&](int j) { return std::binary_search(B.begin(), B.end(), j); };
    // Chain-rule order within a slice: driving indices first.
    std::vector<int> order = B;
    for (int j = 1; j <= J; ++j)
        if (!is_driving(j)) order.push_back(j);

    auto sz = [&](int j) { return static_cast<int>(spec.states_of(j).size()); };
    const std::size_t n = spec.slice_size();
    std::vector<std::vector<int>> slices(n);
    for (std::size_t s = 0; s < n; ++s) slices[s] = decode_slice(spec, s);

    // Mechanisms per spatial index, for t = 0 and for t >= 1 (homogeneous in time).
    struct Mech {
        std::vector<Candidate> parents;  // node = (dt, j) encoded as dt * (J+1) + j, dt in {0: same slice, -1: previous}
        std::vector<std::vector<Rational>> rows;
    };
    std::map<int, Mech> init_mech, step_mech;
    auto enc = [&](int dt, int j) { return (dt + 1) * (J + 1) + j; };  // previous slice sorts first

    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const int j = order[oi];
        std::vector<int> prev(order.begin(), order.begin() + static_cast<long>(oi));
        // t = 0: condition on earlier nodes of the slice.
        {
            std::vector<Candidate> cands;
            for (int pj : prev) cands.push_back({enc(0, pj), sz(pj)});
            auto cond = [&](const std::vector<int>& v) -> std::optional<std::vector<Rational>> {
                std::vector<Rational> d(sz(j), Rational(0));
                Rational den = 0;
                for (std::size_t s = 0; s < n; ++s) {
                    bool ok = true;
                    for (std::size_t k = 0; k < prev.size() && ok; ++k) ok = slices[s][prev[k] - 1] == v[k];
                    if (!ok) continue;
                    d[slices[s][j - 1]] += spec.initial[s];
                    den += spec.initial[s];
                }
                if (den == 0) return std::nullopt;
                for (auto& q : d) q /= den;
                return d;
            };
            auto pr = prune_parents(cands, sz(j), cond);
            init_mech[j] = {pr.kept, pr.rows};
        }
        // t >= 1: condition on the previous slice and earlier nodes of the current slice.
        {
            std::vector<Candidate> cands;
            for (int pj = 1; pj <= J; ++pj) cands.push_back({enc(-1, pj), sz(pj)});
            for (int pj : prev) cands.push_back({enc(0, pj), sz(pj)});
            auto cond = [&](const std::vector<int>& v) -> std::optional<std::vector<Rational>> {
                std::vector<int> from(v.begin(), v.begin() + J);
                std::size_t fi = encode_slice(spec, from);
                std::vector<Rational> d(sz(j), Rational(0));
                Rational den = 0;
                for (std::size_t s = 0; s < n; ++s) {
                    bool ok = true;
                    for (std::size_t k = 0; k < prev.size() && ok; ++k) ok = slices[s][prev[k] - 1] == v[J + k];
                    if (!ok) continue;
                    d[slices[s][j - 1]] += spec.matrix[s][fi];
                    den += spec.matrix[s][fi];
                }
                if (den == 0) return std::nullopt;
                for (auto& q : d) q /= den;
                return d;
            };
            auto pr = prune_parents(cands, sz(j), cond);
            step_mech[j] = {pr.kept, pr.rows};
        }
    }

    if (!B.empty()) {
        auto bad = [](int j) {
            throw std::invalid_argument("kernel does not respect the driven split at spatial index " +
                                        std::to_string(j));
        };
        for (int j = 1; j <= J; ++j) {
            for (const auto& p : init_mech[j].parents) {
                int pj = p.node % (J + 1);
                if (is_driving(j) || !is_driving(pj)) bad(j);
            }
            for (const auto& p : step_mech[j].parents) {
                int dt = p.node / (J + 1) - 1, pj = p.node % (J + 1);
                if (!is_driving(j) && !((dt == -1 && !is_driving(pj)) || (dt == 0 && is_driving(pj)))) bad(j);
                if (is_driving(j) && dt == 0) bad(j);
            }
        }
    }

    std::vector<BayesNet::NodeSpec> nodes;
    for (int t = 0; t < spec.T; ++t) {
        for (int j = 1; j <= J; ++j) {
            BayesNet::NodeSpec nd;
            nd.id.label = std::to_string(j) + "/" + std::to_string(t);
            nd.id.coord = Coord{j, t};
            nd.space.symbols = spec.states_of(j);
            const Mech& m = t == 0 ? init_mech[j] : step_mech[j];
            for (const auto& p : m.parents) {
                int dt = p.node / (J + 1) - 1, pj = p.node % (J + 1);
                nd.parents.push_back(std::to_string(pj) + "/" + std::to_string(t + dt));
            }
            nd.rows = m.rows;
            nodes.push_back(std::move(nd));
        }
    }
    return BayesNet::build(spec.name, std::move(nodes), caps);
}

MarkovSpec mc_const_spec() {
    MarkovSpec s;
    s.name = "mc-const";
    s.J = 2;
    s.T = 3;
    s.states = {{"0", "1"}};
    s.matrix.assign(4, std::vector<Rational>(4, Rational(0)));
    for (int i = 0; i < 4; ++i) s.matrix[i][i] = 1;
    s.initial.assign(4, Rational(1, 4));
    return s;
}

MarkovSpec mc_eps_spec(const Rational& eps) {
    if (eps <= 0 || eps >= Rational(1, 3)) throw std::invalid_argument("eps must lie in (0, 1/3)");
    MarkovSpec s;
    s.name = "mc-eps";
    s.J = 2;
    s.T = 3;
    s.states = {{"0", "1"}};
    s.matrix.assign(4, std::vector<Rational>(4, eps));
    for (int i = 0; i < 4; ++i) s.matrix[i][i] = 1 - 3 * eps;
    s.initial.assign(4, Rational(1, 4));
    return s;
}

BayesNet mc_const() { return build_markov_chain(mc_const_spec()); }
BayesNet mc_eps(const Rational& eps) { return build_markov_chain(mc_eps_spec(eps)); }

}  // namespace stpi
