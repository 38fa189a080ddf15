#include "stpi/integration.hpp"

#include <cmath>
#include <stdexcept>

namespace stpi {

SliValue sli_from_marginals(const Rational& whole, const std::vector<Rational>& blocks) {
    Rational prod = 1;
    for (const auto& b : blocks) prod *= b;
    if (whole == 0) {
        if (prod != 0) throw std::domain_error("pattern impossible");
        return {Rational(1)};
    }
    return {whole / prod};
}

namespace {

void check_partition(const Pattern& pattern, const SetPartition& partition) {
    if (partition.ground() != pattern.nodes())
        throw std::invalid_argument("partition does not partition the pattern's domain");
}

std::vector<Rational> block_marginals(const BayesNet& net, const Pattern& pattern, const SetPartition& partition) {
    std::vector<Rational> out;
    for (auto m : partition.block_masks()) out.push_back(marginal_probability(net, pattern.restrict(m)));
    return out;
}

}  // namespace

SliValue sli(const BayesNet& net, const Pattern& pattern, const SetPartition& partition) {
    check_partition(pattern, partition);
    if (pattern.empty()) throw std::invalid_argument("SLI of the empty pattern");
    return sli_from_marginals(marginal_probability(net, pattern), block_marginals(net, pattern, partition));
}

SliValue sli_deterministic(const BayesNet& net, const Pattern& pattern, const SetPartition& partition) {
    check_partition(pattern, partition);
    const auto n_o = deterministic_pattern_count(net, pattern);
    if (n_o == 0) throw std::domain_error("pattern impossible");
    mpz_class prod = 1;
    for (auto m : partition.block_masks())
        prod *= static_cast<unsigned long>(deterministic_pattern_count(net, pattern.restrict(m)));
    mpz_class roots = static_cast<unsigned long>(root_state_count(net));
    mpz_class scale;
    mpz_pow_ui(scale.get_mpz_t(), roots.get_mpz_t(), static_cast<unsigned long>(partition.block_count() - 1));
    Rational r(scale * static_cast<unsigned long>(n_o), prod);
    r.canonicalize();
    return {r};
}

CliResult cli(const SubsetMarginals& sm) {
    const auto nodes = sm.pattern().nodes();
    const int k = static_cast<int>(nodes.size());
    if (k < 2) throw std::invalid_argument("complete local integration is undefined for a singleton pattern");
    const Rational& whole = sm[(std::uint32_t{1} << k) - 1];
    if (whole == 0) throw std::domain_error("pattern impossible");
    std::vector<int> local(k);
    for (int i = 0; i < k; ++i) local[i] = i;
    PartitionEnumerator en(local, std::max(k, kDefaultPartitionCap));
    SetPartition pi;
    std::optional<CliResult> best;
    std::vector<std::uint32_t> masks;
    while (en.next(pi)) {
        if (pi.is_unit()) continue;
        masks.assign(pi.block_count(), 0);
        for (int i = 0; i < k; ++i) masks[pi.rgs()[i]] |= (1u << i);
        Rational prod = 1;
        for (auto m : masks) prod *= sm[m];
        SliValue v{whole / prod};
        if (!best || v < best->value) best = CliResult{v, SetPartition::from_rgs(nodes, pi.rgs()), false};
    }
    best->is_entity = best->value.ratio > 1;
    return *best;
}

CliResult cli(const BayesNet& net, const Pattern& pattern) {
    if (pattern.size() < 2) throw std::invalid_argument("complete local integration is undefined for a singleton pattern");
    if (static_cast<int>(pattern.size()) > net.caps().partition_elements)
        throw std::length_error("pattern exceeds the partition-enumeration cap");
    return cli(SubsetMarginals(net, pattern));
}

double normalized_sli(const BayesNet& net, const Pattern& pattern, const SetPartition& partition) {
    if (partition.is_unit()) throw std::invalid_argument("normalised SLI needs a non-unit partition");
    Rational p = marginal_probability(net, pattern);
    if (p == 0 || p == 1) throw std::domain_error("normalised SLI needs 0 < p_O < 1");
    return sli(net, pattern, partition).bits() / sli_upper_bound(p, partition.block_count());
}

double sli_upper_bound(const Rational& p, int k) {
    if (p <= 0 || p > 1) throw std::domain_error("bound needs 0 < p <= 1");
    if (k < 1) throw std::invalid_argument("bound needs k >= 1");
    if (k == 1) return 0.0;
    return -(k - 1) * log2q(p);
}

SliValue delta_sli(const BayesNet& net, const Pattern& pattern, const SetPartition& pi, const SetPartition& xi) {
    check_partition(pattern, pi);
    check_partition(pattern, xi);
    Rational num = 1, den = 1;
    for (const auto& q : block_marginals(net, pattern, xi)) num *= q;
    for (const auto& q : block_marginals(net, pattern, pi)) den *= q;
    if (den == 0 || num == 0) throw std::domain_error("pattern impossible");
    return {num / den};
}

BayesNet net_from_joint(const std::string& name, const std::vector<int>& sizes, const std::vector<Rational>& joint) {
    const int n = static_cast<int>(sizes.size());
    std::size_t total = 1;
    for (int s : sizes) total *= static_cast<std::size_t>(s);
    if (joint.size() != total) throw std::invalid_argument("joint table has the wrong length");
    std::vector<BayesNet::NodeSpec> specs;
    // prefix[i] = marginal over the first i nodes, lexicographic.
    std::vector<std::vector<Rational>> prefix(n + 1);
    prefix[n] = joint;
    for (int i = n; i > 0; --i) {
        prefix[i - 1].assign(prefix[i].size() / sizes[i - 1], Rational(0));
        for (std::size_t r = 0; r < prefix[i].size(); ++r) prefix[i - 1][r / sizes[i - 1]] += prefix[i][r];
    }
    for (int i = 0; i < n; ++i) {
        BayesNet::NodeSpec s;
        s.id.label = "n" + std::to_string(i);
        for (int v = 0; v < sizes[i]; ++v) s.space.symbols.push_back(std::to_string(v));
        for (int p = 0; p < i; ++p) s.parents.push_back("n" + std::to_string(p));
        for (std::size_t cfg = 0; cfg < prefix[i].size(); ++cfg) {
            std::vector<Rational> row(sizes[i]);
            for (int v = 0; v < sizes[i]; ++v)
                row[v] = prefix[i][cfg] == 0 ? Rational(1, sizes[i]) : prefix[i + 1][cfg * sizes[i] + v] / prefix[i][cfg];
            s.rows.push_back(std::move(row));
        }
        specs.push_back(std::move(s));
    }
    return BayesNet::build(name, std::move(specs));
}

Fixture max_sli_fixture(const Rational& q, int n) {
    if (q <= 0 || q >= 1) throw std::invalid_argument("max-SLI fixture needs 0 < q < 1");
    if (n < 2) throw std::invalid_argument("max-SLI fixture needs n >= 2");
    std::vector<BayesNet::NodeSpec> specs;
    for (int i = 0; i < n; ++i) {
        BayesNet::NodeSpec s;
        s.id.label = "o" + std::to_string(i);
        s.space.symbols = {"0", "1"};
        if (i == 0) {
            s.rows = {{q, 1 - q}};
        } else {
            s.parents = {"o0"};
            s.rows = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
        }
        specs.push_back(std::move(s));
    }
    auto net = BayesNet::build("max-sli", std::move(specs));
    std::vector<int> zeros(n, 0);
    std::vector<int> ground(n);
    for (int i = 0; i < n; ++i) ground[i] = i;
    return {net, Pattern::full(zeros), SetPartition::zero(ground)};
}

Fixture negative_sli_fixture(const Rational& q, int k) {
    if (q <= 0 || q >= 1) throw std::invalid_argument("negative-SLI fixture needs 0 < q < 1");
    if (k < 2 || k > 16) throw std::invalid_argument("negative-SLI fixture needs 2 <= k <= 16");
    std::vector<Rational> joint(std::size_t{1} << k, Rational(0));
    joint[0] = q;
    for (int i = 0; i < k; ++i) joint[std::size_t{1} << i] = (1 - q) / k;
    auto net = net_from_joint("negative-sli", std::vector<int>(k, 2), joint);
    std::vector<int> ground(k);
    for (int i = 0; i < k; ++i) ground[i] = i;
    return {net, Pattern::full(std::vector<int>(k, 0)), SetPartition::zero(ground)};
}

}  // namespace stpi
