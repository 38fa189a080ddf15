#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stpi {

class BayesNet;
class SetPartition;

// A spatiotemporal pattern: values (state indices) assigned to a subset of node indices.
// Items are kept sorted by node index; a net orders its nodes by (t, j) when coordinates exist,
// so this is also the canonical (t, j) ordering.
class Pattern {
public:
    using Item = std::pair<int, int>;  // (node, state index)

    Pattern() = default;
    explicit Pattern(std::vector<Item> items);

    static Pattern full(const std::vector<int>& values);

    const std::vector<Item>& items() const { return items_; }
    std::uint64_t domain() const { return mask_; }
    std::vector<int> nodes() const;
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

    std::optional<int> at(int node) const;
    bool contains(int node) const { return node < 64 && ((mask_ >> node) & 1u); }

    Pattern restrict(std::uint64_t mask) const;
    Pattern restrict(const std::vector<int>& nodes) const;
    bool agrees_with(const Pattern& other) const;
    std::optional<Pattern> merged(const Pattern& other) const;

    auto operator<=>(const Pattern& o) const { return items_ <=> o.items_; }
    bool operator==(const Pattern& o) const { return items_ == o.items_; }

private:
    std::vector<Item> items_;
    std::uint64_t mask_ = 0;
};

std::uint64_t mask_of(const std::vector<int>& nodes);
std::vector<int> nodes_of(std::uint64_t mask);

// ---- net-bound operations ----

bool occurs_in(const Pattern& pattern, const Pattern& trajectory);

std::vector<Pattern> trajectory_set(const BayesNet& net, const Pattern& pattern, bool possible_only = true);

std::vector<Pattern> anti_patterns(const BayesNet& net, const Pattern& pattern);
std::vector<Pattern> anti_patterns_wrt(const BayesNet& net, const Pattern& pattern, const SetPartition& partition);

struct CompositeKind {
    bool spatial = false;
    bool temporal = false;
    bool spatiotemporal() const { return spatial && temporal; }
};
CompositeKind classify_composite(const BayesNet& net, const Pattern& pattern);

bool traverses_dof(const BayesNet& net, const Pattern& pattern);

enum class Variation { equal, value, extent, value_and_extent };
Variation variation(const Pattern& p, const Pattern& q);
const char* to_string(Variation v);

// Nodes of the pattern's domain at time t.
std::vector<int> slice_nodes(const BayesNet& net, const Pattern& pattern, int t);
Pattern time_slice(const BayesNet& net, const Pattern& pattern, int t);
// Restriction to times <= t (past) or to times in [from, to].
Pattern time_window(const BayesNet& net, const Pattern& pattern, int from, int to);

// `j/t=symbol` comma lists. Nodes without coordinates are addressed by label.
Pattern parse_pattern(const BayesNet& net, const std::string& text);
std::string render_pattern(const BayesNet& net, const Pattern& pattern);

// Grid views: rows are j, columns are t, '.' for unfixed nodes.
std::string render_grid(const BayesNet& net, const Pattern& pattern);
std::string render_pgm(const BayesNet& net, const Pattern& pattern, int cell = 8);

}  // namespace stpi
