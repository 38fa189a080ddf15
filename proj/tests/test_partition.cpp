#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <map>
#include <set>

using namespace stpi;
using namespace stpi::test;

namespace {

std::vector<int> iota_vec(int n, int from = 0) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = from + i;
    return v;
}

// Bell numbers from the Bell triangle.
std::vector<long long> bell_triangle(int n) {
    std::vector<long long> out{1}, row{1};
    for (int i = 1; i <= n; ++i) {
        std::vector<long long> next{row.back()};
        for (long long x : row) next.push_back(next.back() + x);
        out.push_back(next.front());
        row = next;
    }
    return out;
}

// Canonical partitions reached by labelling every element with an arbitrary block label.
std::set<std::vector<int>> partitions_by_labelling(int n) {
    std::set<std::vector<int>> out;
    std::vector<int> lab(n, 0);
    while (true) {
        std::map<int, int> rename;
        std::vector<int> rgs;
        for (int x : lab) {
            auto it = rename.emplace(x, static_cast<int>(rename.size())).first;
            rgs.push_back(it->second);
        }
        out.insert(rgs);
        int k = n - 1;
        while (k >= 0 && ++lab[k] == n) lab[k--] = 0;
        if (k < 0) return out;
    }
}

// Refinement straight from the definition: each block of pi inside some block of xi.
bool refines_oracle(const SetPartition& pi, const SetPartition& xi) {
    for (const auto& b : pi.blocks()) {
        bool inside = false;
        for (const auto& c : xi.blocks())
            inside = inside || std::includes(c.begin(), c.end(), b.begin(), b.end());
        if (!inside) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("partition construction and canonical form") {
    auto pi = SetPartition::from_blocks({{3, 1}, {2}});
    CHECK(pi.ground() == std::vector<int>{1, 2, 3});
    CHECK(pi.rgs() == std::vector<int>{0, 1, 0});
    CHECK(pi.blocks() == std::vector<std::vector<int>>{{1, 3}, {2}});
    CHECK(pi.block_count() == 2);
    CHECK(pi.block_of(3) == 0);
    CHECK(pi.block_masks() == std::vector<std::uint64_t>{0b1010, 0b0100});
    CHECK(SetPartition::zero({4, 5}).is_zero());
    CHECK(SetPartition::unit({4, 5}).is_unit());
    CHECK_THROWS(SetPartition::from_rgs({0, 1}, {1, 0}));
    CHECK_THROWS(SetPartition::from_rgs({0, 1, 2}, {0, 2, 1}));
    CHECK_THROWS(SetPartition::from_blocks({{1, 2}, {2, 3}}));
    CHECK_THROWS(SetPartition::from_blocks({{1}, {}}));
}

TEST_CASE("Bell and Stirling numbers") {
    auto b = bell_triangle(20);
    for (int n = 0; n <= 20; ++n) CHECK(bell(n) == mpz_class(std::to_string(b[n])));
    CHECK(stirling2(6, 2) == 31);
    CHECK(stirling2(6, 3) == 90);
    CHECK(stirling2(0, 0) == 1);
    CHECK(stirling2(5, 0) == 0);
    for (int n = 1; n <= 12; ++n) {
        mpz_class sum = 0;
        for (int k = 0; k <= n; ++k) sum += stirling2(n, k);
        CHECK(sum == bell(n));
        CHECK(stirling2(n, n) == 1);
        for (int k = 1; k < n; ++k) CHECK(stirling2(n, k) == k * stirling2(n - 1, k) + stirling2(n - 1, k - 1));
    }
}

TEST_CASE("enumeration matches labelling oracle and Bell counts") {
    for (int n = 1; n <= 9; ++n) {
        auto parts = enumerate_partitions(iota_vec(n, 1));
        CHECK(mpz_class(static_cast<unsigned long>(parts.size())) == bell(n));
        // Strictly increasing in RGS order, hence distinct.
        for (std::size_t i = 1; i < parts.size(); ++i) CHECK(parts[i - 1] < parts[i]);
        if (n <= 6) {
            std::set<std::vector<int>> got;
            for (const auto& p : parts) got.insert(p.rgs());
            CHECK(got == partitions_by_labelling(n));
        }
    }
    auto six = enumerate_partitions(iota_vec(6));
    std::vector<int> profile(7, 0);
    for (const auto& p : six) ++profile[p.block_count()];
    CHECK(profile == std::vector<int>{0, 1, 31, 90, 65, 15, 1});
    CHECK_THROWS_AS(enumerate_partitions(iota_vec(14)), std::length_error);
    CHECK(enumerate_partitions(iota_vec(3), 3).size() == 5);
}

TEST_CASE("enumerator yields the same sequence as the bulk call") {
    PartitionEnumerator e(iota_vec(5));
    std::vector<SetPartition> seen;
    SetPartition p;
    while (e.next(p)) seen.push_back(p);
    CHECK(seen == enumerate_partitions(iota_vec(5)));
}

TEST_CASE("lattice operations on examples") {
    auto a = SetPartition::from_blocks({{1, 2}, {3}, {4}});
    auto b = SetPartition::from_blocks({{1}, {2}, {3, 4}});
    CHECK(join(a, b) == SetPartition::from_blocks({{1, 2}, {3, 4}}));
    CHECK(meet(a, b) == SetPartition::zero({1, 2, 3, 4}));
    CHECK(refines(a, SetPartition::from_blocks({{1, 2, 3}, {4}})));
    CHECK_FALSE(refines(a, b));
    CHECK(strictly_refines(SetPartition::zero({1, 2}), SetPartition::unit({1, 2})));
    CHECK_FALSE(strictly_refines(a, a));
    CHECK(covers(SetPartition::zero({1, 2}), SetPartition::unit({1, 2})));
    CHECK_FALSE(covers(SetPartition::zero({1, 2, 3}), SetPartition::unit({1, 2, 3})));
    CHECK(covers(SetPartition::zero({1, 2, 3}), SetPartition::from_blocks({{1, 2}, {3}})));
    CHECK(restrict(SetPartition::from_blocks({{1, 2}, {3, 4}}), {1, 3}) == SetPartition::zero({1, 3}));
    CHECK(restrict(SetPartition::unit({1, 2, 3}), {2, 3}) == SetPartition::unit({2, 3}));
    CHECK(restrict(a, a.ground()) == a);
    CHECK_THROWS(restrict(a, {}));
    CHECK_THROWS(join(a, SetPartition::unit({1, 2})));
}

TEST_CASE("property: refinement is a partial order with lattice bounds") {
    Rng rng(7);
    for (int round = 0; round < 3000; ++round) {
        auto ground = iota_vec(1 + static_cast<int>(rng() % 7));
        auto x = random_partition(rng, ground), y = random_partition(rng, ground), z = random_partition(rng, ground);
        CHECK(refines(x, y) == refines_oracle(x, y));
        CHECK(refines(x, x));
        if (refines(x, y) && refines(y, x)) CHECK(x == y);
        if (refines(x, y) && refines(y, z)) CHECK(refines(x, z));

        auto j = join(x, y), m = meet(x, y);
        CHECK(refines(x, j));
        CHECK(refines(y, j));
        CHECK(refines(m, x));
        CHECK(refines(m, y));
        if (refines(x, z) && refines(y, z)) CHECK(refines(j, z));
        if (refines(z, x) && refines(z, y)) CHECK(refines(z, m));

        CHECK(parse_partition(render_partition(x)) == x);
        CHECK(covers(x, y) == (refines(x, y) && y.block_count() + 1 == x.block_count()));
    }
}

TEST_CASE("rendering and parsing") {
    auto pi = SetPartition::from_blocks({{1, 2}, {3}});
    CHECK(render_partition(pi) == "{1,2}|{3}");
    CHECK(render_partition(pi, [](int e) { return "v" + std::to_string(e); }) == "{v1,v2}|{v3}");
    CHECK(parse_partition(" {3} | {2,1} ") == pi);
    CHECK_THROWS(parse_partition("{1,2}|{2}"));
    CHECK_THROWS(parse_partition("{1,2"));
}

TEST_CASE("Hasse diagrams: edges, components and isomorphism") {
    auto three = enumerate_partitions({1, 2, 3});
    auto edges = hasse_edges(three);
    CHECK(edges.size() == 6);
    CHECK(hasse_components(three).size() == 1);
    CHECK(hasse_edges({three[0]}).empty());

    // Covers relative to the subset: 0 and 1 become adjacent once the middle layer is dropped.
    std::vector<SetPartition> ends{SetPartition::zero({1, 2, 3}), SetPartition::unit({1, 2, 3})};
    CHECK(hasse_edges(ends).size() == 1);

    std::vector<SetPartition> middle;
    for (const auto& p : three)
        if (p.block_count() == 2) middle.push_back(p);
    CHECK(hasse_components(middle).size() == 3);

    CHECK(posets_isomorphic(3, {{0, 1}, {1, 2}}, 3, {{2, 0}, {0, 1}}));
    CHECK_FALSE(posets_isomorphic(3, {{0, 1}, {1, 2}}, 3, {{0, 1}, {0, 2}}));
    CHECK_FALSE(posets_isomorphic(2, {{0, 1}}, 3, {{0, 1}}));

    auto dot = hasse_dot(three, "L3");
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("{1,2}|{3}") != std::string::npos);
    CHECK(dot == hasse_dot(three, "L3"));
}

TEST_CASE("property: Hasse edges are exactly the covering pairs of random subsets") {
    Rng rng(11);
    auto all = enumerate_partitions(iota_vec(5));
    for (int round = 0; round < 40; ++round) {
        std::vector<SetPartition> sub;
        for (const auto& p : all)
            if (rng() % 4 == 0) sub.push_back(p);
        std::set<std::pair<int, int>> expected;
        const int n = static_cast<int>(sub.size());
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (a == b || !strictly_refines(sub[a], sub[b])) continue;
                bool between = false;
                for (int c = 0; c < n; ++c)
                    between = between || (strictly_refines(sub[a], sub[c]) && strictly_refines(sub[c], sub[b]));
                if (!between) expected.emplace(a, b);
            }
        auto got = hasse_edges(sub);
        CHECK(std::set<std::pair<int, int>>(got.begin(), got.end()) == expected);

        // Components by union-find over the oracle edges.
        std::vector<int> parent(n);
        for (int i = 0; i < n; ++i) parent[i] = i;
        auto find = [&](int v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        for (auto [a, b] : expected) parent[find(a)] = find(b);
        std::set<int> roots;
        for (int i = 0; i < n; ++i) roots.insert(find(i));
        CHECK(hasse_components(sub).size() == roots.size());
    }
}

TEST_CASE("workload counts") {
    auto one = BayesNet::build("one", {{{"a", std::nullopt}, {{"0", "1"}}, {}, {{Rational(1, 2), Rational(1, 2)}}}});
    CHECK(sli_workload(one, WorkloadMode::exhaustive) == 2);
    CHECK(sli_workload(one, WorkloadMode::disintegration) == 2);

    auto net = mc_const();
    CHECK(sli_workload(net, WorkloadMode::disintegration) == 64 * 203);
    // Sum over non-empty subsets A of |X_A| B_|A|, by direct subset enumeration.
    auto b = bell_triangle(6);
    long long total = 0;
    for (int mask = 1; mask < 64; ++mask) total += (1LL << __builtin_popcount(mask)) * b[__builtin_popcount(mask)];
    CHECK(sli_workload(net, WorkloadMode::exhaustive) == mpz_class(std::to_string(total)));
}
