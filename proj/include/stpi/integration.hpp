#pragma once

#include "stpi/model.hpp"
#include "stpi/partition.hpp"
#include "stpi/pattern.hpp"
#include "stpi/rational.hpp"

#include <compare>
#include <optional>
#include <vector>

namespace stpi {

// Specific local integration as the exact ratio p_O(x_O) / prod_b p_b(x_b).
struct SliValue {
    Rational ratio = 1;
    double bits() const { return log2q(ratio); }

    auto operator<=>(const SliValue& o) const {
        int c = cmp(ratio, o.ratio);
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }
    bool operator==(const SliValue& o) const { return ratio == o.ratio; }
};

// Ratio from a pattern marginal and its block marginals, applying the 0/0 convention.
SliValue sli_from_marginals(const Rational& whole, const std::vector<Rational>& blocks);

SliValue sli(const BayesNet& net, const Pattern& pattern, const SetPartition& partition);
SliValue sli_deterministic(const BayesNet& net, const Pattern& pattern, const SetPartition& partition);

struct CliResult {
    SliValue value;
    SetPartition witness;
    bool is_entity = false;
};

CliResult cli(const BayesNet& net, const Pattern& pattern);
// Same minimisation against precomputed subset marginals of the pattern.
CliResult cli(const SubsetMarginals& marginals);

double normalized_sli(const BayesNet& net, const Pattern& pattern, const SetPartition& partition);
double sli_upper_bound(const Rational& pattern_prob, int k);

// mi_pi - mi_xi as the exact ratio prod_{a in xi} p_a / prod_{b in pi} p_b.
SliValue delta_sli(const BayesNet& net, const Pattern& pattern, const SetPartition& pi, const SetPartition& xi);

struct Fixture {
    BayesNet net;
    Pattern pattern;
    SetPartition partition;
};

// n binary nodes copying a root with p(0) = q; pattern all zeros, partition into singletons.
Fixture max_sli_fixture(const Rational& q, int n);
// k binary nodes with p(0..0) = q and (1-q)/k on each single-node deviation; singleton partition.
Fixture negative_sli_fixture(const Rational& q, int k);

// Builds a net reproducing a joint distribution over `sizes`-valued nodes by the chain rule.
// `joint` is indexed lexicographically with the first node most significant.
BayesNet net_from_joint(const std::string& name, const std::vector<int>& sizes, const std::vector<Rational>& joint);

}  // namespace stpi
