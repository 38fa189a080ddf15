#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stpi/disintegration.hpp"
#include "support.hpp"

#include <set>

using namespace stpi;
using namespace stpi::test;

namespace {

// Sub-patterns of the trajectory with positive CLI, found by minimising oracle ratios directly.
std::set<Pattern> oracle_entities(const BayesNet& net, const Pattern& traj) {
    std::set<Pattern> out;
    const int n = net.size();
    for (std::uint64_t mask = 1; mask < (1u << n); ++mask) {
        if (__builtin_popcountll(mask) < 2) continue;
        auto x = traj.restrict(mask);
        bool positive = true;
        for (const auto& pi : enumerate_partitions(x.nodes()))
            if (!pi.is_unit() && !(oracle_sli_ratio(net, x, pi) > 1)) positive = false;
        if (positive) out.insert(x);
    }
    return out;
}

std::set<Pattern> patterns_of(const std::vector<IotaEntity>& es) {
    std::set<Pattern> out;
    for (const auto& e : es) out.insert(e.pattern);
    return out;
}

// Refinement-free levels straight from the definition: drop partitions refined by a partition
// at the same or any lower level.
std::vector<std::size_t> oracle_rf_sizes(const Hierarchy& h) {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < h.levels.size(); ++l) {
        std::size_t keep = 0;
        for (const auto& pi : h.levels[l].partitions) {
            bool refined = false;
            for (std::size_t k = 0; k <= l && !refined; ++k)
                for (const auto& rho : h.levels[k].partitions)
                    if (rho != pi && refines(rho, pi)) {
                        refined = true;
                        break;
                    }
            keep += !refined;
        }
        out.push_back(keep);
    }
    return out;
}

}  // namespace

TEST_CASE("MC= hierarchy is the same on all four trajectories") {
    auto net = mc_const();
    auto trajs = enumerate_trajectories(net);
    REQUIRE(trajs.size() == 4);
    std::set<std::set<std::uint64_t>> domain_sets;
    for (const auto& [traj, p] : trajs) {
        CHECK(p == Rational(1, 4));
        auto h = disintegration_hierarchy(net, traj);
        REQUIRE(h.levels.size() == 5);
        std::vector<Rational> ratios;
        std::vector<std::size_t> sizes;
        for (const auto& l : h.levels) ratios.push_back(l.sli.ratio), sizes.push_back(l.partitions.size());
        CHECK(ratios == std::vector<Rational>{1, 2, 4, 8, 16});
        CHECK(sizes == std::vector<std::size_t>{2, 18, 71, 78, 34});

        auto rf = refinement_free(h);
        std::vector<std::size_t> rf_sizes;
        for (const auto& l : rf.levels) rf_sizes.push_back(l.partitions.size());
        CHECK(rf_sizes == oracle_rf_sizes(h));
        CHECK(rf_sizes == std::vector<std::size_t>{1, 6, 11, 6, 1});

        auto ents = iota_entities(net, rf, traj);
        CHECK(ents.size() == 8);
        std::set<std::uint64_t> domains;
        for (const auto& e : ents) {
            CHECK(e.iota.ratio == 2);
            CHECK(!e.witnesses.empty());
            domains.insert(e.pattern.domain());
        }
        domain_sets.insert(domains);
        CHECK(patterns_of(ents) == oracle_entities(net, traj));
    }
    // One family of eight index sets: the subsets of size at least two inside a single row.
    REQUIRE(domain_sets.size() == 1);
    std::set<std::uint64_t> rows;
    for (int j = 1; j <= 2; ++j) {
        int a = *net.find(j, 0), b = *net.find(j, 1), c = *net.find(j, 2);
        for (auto m : {mask_of({a, b}), mask_of({a, c}), mask_of({b, c}), mask_of({a, b, c})}) rows.insert(m);
    }
    CHECK(*domain_sets.begin() == rows);
    CHECK(entity_set_union(net).size() == 16);
}

TEST_CASE("level invariants on MCe representatives") {
    auto net = mc_eps();
    for (const auto& traj : {Pattern::full({0, 1, 0, 1, 0, 1}), Pattern::full({0, 1, 0, 1, 0, 0}),
                             Pattern::full({0, 1, 0, 0, 0, 1})}) {
        auto h = disintegration_hierarchy(net, traj);
        std::size_t total = 0;
        for (std::size_t l = 0; l < h.levels.size(); ++l) {
            total += h.levels[l].partitions.size();
            for (const auto& pi : h.levels[l].partitions) CHECK(sli(net, traj, pi) == h.levels[l].sli);
            if (l > 0) CHECK(h.levels[l - 1].sli.ratio < h.levels[l].sli.ratio);
        }
        CHECK(total == 203);
        auto rf = refinement_free(h);
        std::vector<std::size_t> rf_sizes;
        for (const auto& l : rf.levels) rf_sizes.push_back(l.partitions.size());
        CHECK(rf_sizes == oracle_rf_sizes(h));
        auto ents = iota_entities(net, rf, traj);
        CHECK(patterns_of(ents) == oracle_entities(net, traj));
        for (const auto& e : ents) CHECK(e.iota == cli(net, e.pattern).value);
    }
}

TEST_CASE("MCe entity counts on the representatives") {
    auto net = mc_eps();
    CHECK(iota_entities(net, Pattern::full({0, 1, 0, 1, 0, 1})).size() == 22);
    CHECK(iota_entities(net, Pattern::full({0, 1, 0, 1, 0, 0})).size() == 8);
    CHECK(iota_entities(net, Pattern::full({0, 1, 0, 0, 0, 1})).size() == 9);
}

TEST_CASE("disintegration theorem holds exhaustively on both built-ins") {
    for (auto [net, expected] : {std::pair{mc_const(), 4u}, std::pair{mc_eps(), 64u}}) {
        std::size_t n = 0;
        for (const auto& [traj, p] : enumerate_trajectories(net)) {
            auto r = verify_disintegration_theorem(net, traj);
            CHECK(r.partitions == 203);
            CHECK(r.passed());
            ++n;
            auto brute = brute_force_entities(net, traj);
            CHECK(std::set<Pattern>(brute.begin(), brute.end()) == patterns_of(iota_entities(net, traj)));
        }
        CHECK(n == expected);
    }
}

TEST_CASE("skipping the refinement filter is caught") {
    auto net = mc_const();
    auto traj = enumerate_trajectories(net).front().first;
    auto r = verify_disintegration_theorem(net, traj, 1, true);
    CHECK_FALSE(r.passed());
    auto rf = refinement_free(disintegration_hierarchy(net, traj), true);
    std::size_t total = 0;
    for (const auto& l : rf.levels) total += l.partitions.size();
    CHECK(total == 203);
}

TEST_CASE("thread count does not change results") {
    auto net = mc_eps();
    auto traj = Pattern::full({0, 1, 0, 1, 0, 1});
    auto a = disintegration_hierarchy(net, traj, 1), b = disintegration_hierarchy(net, traj, 4);
    REQUIRE(a.levels.size() == b.levels.size());
    for (std::size_t l = 0; l < a.levels.size(); ++l) {
        CHECK(a.levels[l].sli == b.levels[l].sli);
        CHECK(a.levels[l].partitions == b.levels[l].partitions);
    }
    auto ua = entity_set_union(net, 1), ub = entity_set_union(net, 3);
    REQUIRE(ua.size() == ub.size());
    CHECK(ua.size() == 72);
    for (std::size_t i = 0; i < ua.size(); ++i) CHECK(ua[i].pattern == ub[i].pattern);
}

TEST_CASE("property: theorem and oracle on random small nets") {
    Rng rng(41);
    for (int round = 0; round < 15; ++round) {
        auto net = random_net(rng, 3 + round % 3, 2, 2);
        for (const auto& [traj, p] : enumerate_trajectories(net)) {
            CHECK(verify_disintegration_theorem(net, traj).passed());
            CHECK(patterns_of(iota_entities(net, traj)) == oracle_entities(net, traj));
        }
    }
}
