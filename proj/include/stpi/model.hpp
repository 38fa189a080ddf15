#pragma once

#include "stpi/pattern.hpp"
#include "stpi/rational.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace stpi {

struct Coord {
    int j = 0;
    int t = 0;
    auto operator<=>(const Coord&) const = default;
};

struct NodeId {
    std::string label;
    std::optional<Coord> coord;
};

struct StateSpace {
    std::vector<std::string> symbols;
    std::size_t size() const { return symbols.size(); }
    std::optional<int> index_of(const std::string& s) const;
};

// Rows are indexed by parent configuration in lexicographic order over the parents'
// state orders, first parent most significant.
struct Mechanism {
    std::vector<int> parents;
    std::vector<std::vector<Rational>> rows;
};

struct Caps {
    std::uint64_t states = 1u << 20;  // product of state-space sizes
    int partition_elements = 13;
};

class BayesNet;

struct TrajectoryTable {
    std::vector<std::vector<int>> values;  // possible trajectories only
    std::vector<Rational> probs;
};

class BayesNet {
public:
    struct NodeSpec {
        NodeId id;
        StateSpace space;
        std::vector<std::string> parents;  // labels
        std::vector<std::vector<Rational>> rows;
    };

    // Validates the node definitions and reorders nodes topologically, preferring (t, j) order
    // when coordinates are present and insertion order otherwise.
    static BayesNet build(std::string name, std::vector<NodeSpec> nodes, Caps caps = {});

    const std::string& name() const { return name_; }
    int size() const { return static_cast<int>(ids_.size()); }
    const NodeId& id(int i) const { return ids_[i]; }
    const StateSpace& space(int i) const { return spaces_[i]; }
    const Mechanism& mechanism(int i) const { return mechs_[i]; }
    const Caps& caps() const { return caps_; }

    std::optional<int> find(const std::string& label) const;
    std::optional<int> find(int j, int t) const;
    bool has_coords() const { return has_coords_; }
    int min_t() const;
    int max_t() const;
    std::vector<int> spatial_indices() const;
    std::vector<int> slice(int t) const;
    std::string node_name(int i) const;

    std::uint64_t state_count() const;  // product of |X_i|, saturating
    std::size_t row_index(int node, const std::vector<int>& assignment) const;
    const Rational& mech_prob(int node, const std::vector<int>& assignment) const;

    // Possible trajectories, computed once and shared; requires state_count() <= caps().states.
    const TrajectoryTable& table() const;

private:
    std::string name_;
    std::vector<NodeId> ids_;
    std::vector<StateSpace> spaces_;
    std::vector<Mechanism> mechs_;
    Caps caps_;
    bool has_coords_ = false;

    struct Lazy {
        std::once_flag once;
        std::unique_ptr<TrajectoryTable> table;
    };
    std::shared_ptr<Lazy> lazy_ = std::make_shared<Lazy>();
};

// ---- probabilities ----

Rational joint_probability(const BayesNet& net, const Pattern& trajectory);
Rational marginal_probability(const BayesNet& net, const Pattern& pattern);
Rational conditional_probability(const BayesNet& net, const Pattern& target, const Pattern& given);

struct MorphEntry {
    Pattern completion;
    Rational prob;
};
// Conditional distribution over completions of the pattern (support only, enumeration order).
std::vector<MorphEntry> morph(const BayesNet& net, const Pattern& pattern);

std::vector<std::pair<Pattern, Rational>> enumerate_trajectories(const BayesNet& net);

// N(x_A) with p_A(x_A) = N(x_A) / |X_{V_0}| on deterministic nets with uniform roots.
std::uint64_t deterministic_pattern_count(const BayesNet& net, const Pattern& pattern);
bool is_deterministic(const BayesNet& net);
std::uint64_t root_state_count(const BayesNet& net);

bool verify_time_slice_markov(const BayesNet& net);

// p(x_S) for every S within the pattern's domain, indexed by local submask (bit k = k-th item).
class SubsetMarginals {
public:
    SubsetMarginals(const BayesNet& net, const Pattern& pattern);
    const Rational& operator[](std::uint32_t local_mask) const { return m_[local_mask]; }
    std::uint32_t local_mask(std::uint64_t node_mask) const;
    const Pattern& pattern() const { return pattern_; }

private:
    Pattern pattern_;
    std::vector<int> node_pos_;
    std::vector<Rational> m_;
};

// ---- multivariate Markov chains ----

using Matrix = std::vector<std::vector<Rational>>;

// Joint slice states are indexed lexicographically over spatial indices 1..J, j = 1 most significant.
struct MarkovSpec {
    int J = 0;
    int T = 0;
    std::vector<std::vector<std::string>> states;  // per spatial index; one entry means shared
    Matrix matrix;                                  // matrix[to][from], columns sum to 1
    std::vector<Rational> initial;                  // over X_{V_0}
    std::vector<int> driving;                       // spatial indices forming the driving chain
    std::string name = "markov";

    const std::vector<std::string>& states_of(int j) const;
    std::size_t slice_size() const;
};

// Factored kernels for a driven chain: drive[x_{B,t+1}][(x_{A,t}, x_{B,t})] and
// driven[x_{A,t+1}][(x_{B,t+1}, x_{A,t})]; A and B states indexed lexicographically.
Matrix compose_driven_kernel(const MarkovSpec& shape, const Matrix& drive, const Matrix& driven);

BayesNet build_markov_chain(const MarkovSpec& spec, Caps caps = {});

std::vector<int> decode_slice(const MarkovSpec& spec, std::size_t index);
std::size_t encode_slice(const MarkovSpec& spec, const std::vector<int>& values);

MarkovSpec mc_const_spec();
MarkovSpec mc_eps_spec(const Rational& eps);
BayesNet mc_const();
BayesNet mc_eps(const Rational& eps = Rational(1, 100));

}  // namespace stpi
