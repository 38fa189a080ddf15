#include "stpi/pattern.hpp"

#include "stpi/model.hpp"
#include "stpi/partition.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stpi {

Pattern::Pattern(std::vector<Item> items) : items_(std::move(items)) {
    std::sort(items_.begin(), items_.end());
    for (std::size_t k = 0; k < items_.size(); ++k) {
        int node = items_[k].first;
        if (node < 0 || node >= 64) throw std::out_of_range("node index outside [0, 64)");
        if (k && items_[k - 1].first == node)
            throw std::invalid_argument("node " + std::to_string(node) + " assigned twice in a pattern");
        mask_ |= std::uint64_t{1} << node;
    }
}

Pattern Pattern::full(const std::vector<int>& values) {
    std::vector<Item> items;
    items.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) items.emplace_back(static_cast<int>(i), values[i]);
    return Pattern(std::move(items));
}

std::vector<int> Pattern::nodes() const {
    std::vector<int> out;
    out.reserve(items_.size());
    for (auto [n, v] : items_) out.push_back(n);
    return out;
}

std::optional<int> Pattern::at(int node) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), Item{node, -1});
    if (it == items_.end() || it->first != node) return std::nullopt;
    return it->second;
}

Pattern Pattern::restrict(std::uint64_t mask) const {
    std::vector<Item> out;
    for (auto it : items_)
        if ((mask >> it.first) & 1u) out.push_back(it);
    return Pattern(std::move(out));
}

Pattern Pattern::restrict(const std::vector<int>& nodes) const { return restrict(mask_of(nodes)); }

bool Pattern::agrees_with(const Pattern& other) const {
    std::size_t i = 0, j = 0;
    while (i < items_.size() && j < other.items_.size()) {
        if (items_[i].first < other.items_[j].first)
            ++i;
        else if (items_[i].first > other.items_[j].first)
            ++j;
        else {
            if (items_[i].second != other.items_[j].second) return false;
            ++i;
            ++j;
        }
    }
    return true;
}

std::optional<Pattern> Pattern::merged(const Pattern& other) const {
    if (!agrees_with(other)) return std::nullopt;
    std::vector<Item> out = items_;
    for (auto it : other.items_)
        if (!contains(it.first)) out.push_back(it);
    return Pattern(std::move(out));
}

std::uint64_t mask_of(const std::vector<int>& nodes) {
    std::uint64_t m = 0;
    for (int n : nodes) {
        if (n < 0 || n >= 64) throw std::out_of_range("node index outside [0, 64)");
        m |= std::uint64_t{1} << n;
    }
    return m;
}

std::vector<int> nodes_of(std::uint64_t mask) {
    std::vector<int> out;
    for (int i = 0; i < 64; ++i)
        if ((mask >> i) & 1u) out.push_back(i);
    return out;
}

// ---------------------------------------------------------------- net-bound

bool occurs_in(const Pattern& pattern, const Pattern& trajectory) {
    for (auto [node, v] : pattern.items()) {
        auto w = trajectory.at(node);
        if (!w || *w != v) return false;
    }
    return true;
}

std::vector<Pattern> trajectory_set(const BayesNet& net, const Pattern& pattern, bool possible_only) {
    std::vector<Pattern> out;
    if (possible_only) {
        for (const auto& [traj, p] : enumerate_trajectories(net))
            if (occurs_in(pattern, traj)) out.push_back(traj);
        return out;
    }
    if (net.state_count() > net.caps().states) throw std::length_error("state space exceeds cap");
    const int n = net.size();
    std::vector<int> a(n, 0);
    while (true) {
        Pattern tr = Pattern::full(a);
        if (occurs_in(pattern, tr)) out.push_back(std::move(tr));
        int k = n - 1;
        while (k >= 0 && ++a[k] == static_cast<int>(net.space(k).size())) a[k--] = 0;
        if (k < 0) break;
    }
    return out;
}

namespace {

// All assignments on `nodes` (lexicographic, first node most significant).
template <class F>
void for_each_assignment(const BayesNet& net, const std::vector<int>& nodes, F&& f) {
    std::vector<int> a(nodes.size(), 0);
    while (true) {
        f(a);
        int k = static_cast<int>(nodes.size()) - 1;
        while (k >= 0 && ++a[k] == static_cast<int>(net.space(nodes[k]).size())) a[k--] = 0;
        if (k < 0) return;
    }
}

}  // namespace

std::vector<Pattern> anti_patterns(const BayesNet& net, const Pattern& pattern) {
    if (pattern.empty()) throw std::invalid_argument("anti-patterns of the empty pattern are undefined");
    return anti_patterns_wrt(net, pattern, SetPartition::zero(pattern.nodes()));
}

std::vector<Pattern> anti_patterns_wrt(const BayesNet& net, const Pattern& pattern, const SetPartition& partition) {
    if (pattern.empty()) throw std::invalid_argument("anti-patterns of the empty pattern are undefined");
    auto nodes = pattern.nodes();
    if (partition.ground() != nodes) throw std::invalid_argument("partition does not partition the pattern's domain");
    if (nodes.size() > 20) throw std::length_error("anti-pattern enumeration limited to 20 nodes");
    std::vector<int> block(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) block[k] = partition.block_of(nodes[k]);
    std::vector<Pattern> out;
    for_each_assignment(net, nodes, [&](const std::vector<int>& a) {
        std::vector<char> differs(partition.block_count(), 0);
        for (std::size_t k = 0; k < nodes.size(); ++k)
            if (a[k] != pattern.items()[k].second) differs[block[k]] = 1;
        if (std::all_of(differs.begin(), differs.end(), [](char c) { return c != 0; })) {
            std::vector<Pattern::Item> items;
            for (std::size_t k = 0; k < nodes.size(); ++k) items.emplace_back(nodes[k], a[k]);
            out.emplace_back(std::move(items));
        }
    });
    return out;
}

namespace {

void need_coords(const BayesNet& net) {
    if (!net.has_coords()) throw std::invalid_argument("operation needs (j, t) coordinates");
}

std::map<int, std::set<int>> slices_by_time(const BayesNet& net, const Pattern& p) {
    std::map<int, std::set<int>> s;
    for (auto [node, v] : p.items()) s[net.id(node).coord->t].insert(net.id(node).coord->j);
    return s;
}

}  // namespace

CompositeKind classify_composite(const BayesNet& net, const Pattern& pattern) {
    need_coords(net);
    auto s = slices_by_time(net, pattern);
    CompositeKind k;
    for (const auto& [t, js] : s)
        if (js.size() > 1) k.spatial = true;
    k.temporal = s.size() >= 2;
    return k;
}

bool traverses_dof(const BayesNet& net, const Pattern& pattern) {
    need_coords(net);
    auto s = slices_by_time(net, pattern);
    for (auto a = s.begin(); a != s.end(); ++a)
        for (auto b = std::next(a); b != s.end(); ++b)
            if (a->second != b->second) return true;
    return false;
}

Variation variation(const Pattern& p, const Pattern& q) {
    if (p == q) return Variation::equal;
    if (p.domain() == q.domain()) return Variation::value;
    return p.agrees_with(q) ? Variation::extent : Variation::value_and_extent;
}

const char* to_string(Variation v) {
    switch (v) {
        case Variation::equal: return "equal";
        case Variation::value: return "value";
        case Variation::extent: return "extent";
        case Variation::value_and_extent: return "value_and_extent";
    }
    return "?";
}

std::vector<int> slice_nodes(const BayesNet& net, const Pattern& pattern, int t) {
    need_coords(net);
    std::vector<int> out;
    for (auto [node, v] : pattern.items())
        if (net.id(node).coord->t == t) out.push_back(node);
    return out;
}

Pattern time_slice(const BayesNet& net, const Pattern& pattern, int t) {
    return pattern.restrict(slice_nodes(net, pattern, t));
}

Pattern time_window(const BayesNet& net, const Pattern& pattern, int from, int to) {
    need_coords(net);
    std::vector<Pattern::Item> out;
    for (auto it : pattern.items()) {
        int t = net.id(it.first).coord->t;
        if (t >= from && t <= to) out.push_back(it);
    }
    return Pattern(std::move(out));
}

Pattern parse_pattern(const BayesNet& net, const std::string& text) {
    std::vector<Pattern::Item> items;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto b = tok.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        tok = tok.substr(b, tok.find_last_not_of(" \t") - b + 1);
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("pattern item '" + tok + "' lacks '='");
        std::string where = tok.substr(0, eq), sym = tok.substr(eq + 1);
        std::optional<int> node;
        if (auto slash = where.find('/'); slash != std::string::npos && net.has_coords()) {
            try {
                node = net.find(std::stoi(where.substr(0, slash)), std::stoi(where.substr(slash + 1)));
            } catch (const std::logic_error&) {
                node.reset();
            }
        }
        if (!node) node = net.find(where);
        if (!node) throw std::invalid_argument("unknown node '" + where + "' in pattern");
        auto v = net.space(*node).index_of(sym);
        if (!v) throw std::invalid_argument("unknown symbol '" + sym + "' for node " + where);
        items.emplace_back(*node, *v);
    }
    return Pattern(std::move(items));
}

std::string render_pattern(const BayesNet& net, const Pattern& pattern) {
    std::string out;
    for (auto [node, v] : pattern.items()) {
        if (!out.empty()) out += ",";
        out += net.node_name(node) + "=" + net.space(node).symbols[v];
    }
    return out;
}

std::string render_grid(const BayesNet& net, const Pattern& pattern) {
    need_coords(net);
    auto js = net.spatial_indices();
    std::string out;
    for (int j : js) {
        for (int t = net.min_t(); t <= net.max_t(); ++t) {
            auto node = net.find(j, t);
            std::optional<int> v = node ? pattern.at(*node) : std::nullopt;
            out += v ? net.space(*node).symbols[*v] : std::string(".");
            if (t < net.max_t()) out += " ";
        }
        out += "\n";
    }
    return out;
}

std::string render_pgm(const BayesNet& net, const Pattern& pattern, int cell) {
    need_coords(net);
    auto js = net.spatial_indices();
    const int cols = net.max_t() - net.min_t() + 1, rows = static_cast<int>(js.size());
    std::ostringstream os;
    os << "P2\n" << cols * cell << " " << rows * cell << "\n255\n";
    for (int r = 0; r < rows * cell; ++r) {
        for (int c = 0; c < cols * cell; ++c) {
            auto node = net.find(js[r / cell], net.min_t() + c / cell);
            int level = 128;
            if (node) {
                if (auto v = pattern.at(*node)) {
                    int k = static_cast<int>(net.space(*node).size());
                    level = k <= 1 ? 255 : 255 - (255 * *v) / (k - 1);
                }
            }
            os << level << (c + 1 < cols * cell ? " " : "\n");
        }
    }
    return os.str();
}

}  // namespace stpi
