#pragma once

#include "stpi/integration.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace stpi {

// Bijection on node indices 0..n-1; nodes outside the support map to themselves.
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<int> image);  // image[i] = g(i)
    static Permutation identity(int n);
    // Cycles over node indices, e.g. {{0, 1}, {2, 4, 3}}.
    static Permutation from_cycles(int n, const std::vector<std::vector<int>>& cycles);

    int size() const { return static_cast<int>(image_.size()); }
    int operator()(int i) const { return image_[i]; }
    const std::vector<int>& image() const { return image_; }
    bool is_identity() const;
    std::vector<int> support() const;

    Permutation inverse() const;
    // (*this)(other(i)): apply `other` first.
    Permutation after(const Permutation& other) const;

    auto operator<=>(const Permutation&) const = default;

private:
    std::vector<int> image_;
};

std::string render_cycles(const Permutation& g, const BayesNet& net);

class GeneratedGroup {
public:
    explicit GeneratedGroup(std::vector<Permutation> generators, std::size_t cap = 10000);
    const std::vector<Permutation>& generators() const { return gens_; }
    // Closure sorted ascending; throws std::length_error above the cap.
    const std::vector<Permutation>& elements() const;

private:
    std::vector<Permutation> gens_;
    std::size_t cap_;
    mutable std::vector<Permutation> closure_;
};

// (g x)_i = x_{g^-1(i)}: the value at node k moves to g(k).
Pattern act_on_pattern(const BayesNet& net, const Permutation& g, const Pattern& x);
// x^g with (x^g)_i = x_{g(i)}.
Pattern pull_back(const BayesNet& net, const Permutation& g, const Pattern& x);
SetPartition act_on_partition(const Permutation& g, const SetPartition& pi);

// Transformed distribution (g p)(x) = p(x^g); queries are answered from the source net.
class TransformedDistribution {
public:
    TransformedDistribution(const BayesNet& net, Permutation g);
    Rational marginal(const Pattern& x) const;
    std::map<Pattern, Rational> support() const;  // full trajectories

private:
    const BayesNet* net_;
    Permutation g_;
};

bool is_symmetry(const BayesNet& net, const Permutation& g, const Pattern& x);
bool is_symmetry(const Permutation& g, const SetPartition& pi);
bool is_symmetry(const BayesNet& net, const Permutation& g);
// g maps the domain A onto itself and leaves p_A invariant.
bool is_marginal_symmetry(const BayesNet& net, const Permutation& g, std::uint64_t domain);

std::vector<SetPartition> orbit(const GeneratedGroup& group, const SetPartition& pi);

// Built-in families for nets with (j, t) coordinates.
Permutation spatial_flip(const BayesNet& net);  // j -> J + 1 - j
Permutation row_time_permutation(const BayesNet& net, int j, const std::vector<int>& time_image);
Permutation time_shift(const BayesNet& net);  // (j, t) -> (j, t - 1 mod T)
// Spatial permutation sigma (sigma[j-1] = image of j) applied at every time step.
Permutation spatial_permutation(const BayesNet& net, const std::vector<int>& sigma);

struct SymmetryReport {
    std::size_t elements = 0;
    std::size_t partitions_checked = 0;
    // Partitions where mi_{g pi}(x) = mi_pi(x), keyed by the first applicable case (i, ii, iii).
    std::array<std::size_t, 3> invariance_cases{};
    std::size_t not_invariant = 0;
    std::vector<std::string> precondition_failures;
    std::vector<std::string> theorem_failures;
    bool passed() const { return precondition_failures.empty() && theorem_failures.empty(); }
};

SymmetryReport check_sli_symmetry(const BayesNet& net, const GeneratedGroup& group, const Pattern& x, int threads = 1);

// Spatial generators as images over 1..J (sigma[j-1] = image of j).
bool check_markov_symmetry_propagation(const MarkovSpec& spec, const std::vector<std::vector<int>>& spatial_generators);

}  // namespace stpi
