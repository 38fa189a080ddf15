#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace stpi;
using namespace stpi::test;

namespace {

Pattern traj(std::vector<int> v) { return Pattern::full(v); }

}  // namespace

TEST_CASE("rational parsing and display") {
    CHECK(parse_rational("3/6") == Rational(1, 2));
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK(parse_rational("7") == Rational(7));
    CHECK(to_string(Rational(2, 4)) == "1/2");
    CHECK(to_string(Rational(3)) == "3");
    CHECK_THROWS(parse_rational("1/0"));
    CHECK_THROWS(parse_rational("abc"));
    CHECK(log2q(Rational(8)) == doctest::Approx(3.0));
    // Far outside double range.
    mpz_class big = 1;
    big <<= 3000;
    CHECK(log2q(Rational(big) / 3) == doctest::Approx(3000 - std::log2(3.0)));
}

TEST_CASE("built-in chains") {
    auto c = mc_const();
    CHECK(c.size() == 6);
    CHECK(c.has_coords());
    auto e = mc_eps();
    CHECK(e.size() == 6);
    // Kernel diagonal through the net: p(V_1 = s | V_0 = s) for every slice state.
    auto spec = mc_eps_spec(Rational(1, 100));
    for (std::size_t s = 0; s < 4; ++s) {
        auto v = decode_slice(spec, s);
        Pattern from({{*e.find(1, 0), v[0]}, {*e.find(2, 0), v[1]}});
        for (std::size_t to = 0; to < 4; ++to) {
            auto w = decode_slice(spec, to);
            Pattern next({{*e.find(1, 1), w[0]}, {*e.find(2, 1), w[1]}});
            CHECK(conditional_probability(e, next, from) == spec.matrix[to][s]);
        }
        CHECK(spec.matrix[s][s] == Rational(97, 100));
    }
}

TEST_CASE("degenerate one-state chain") {
    MarkovSpec s;
    s.J = 1;
    s.T = 2;
    s.states = {{"a"}};
    s.matrix = {{Rational(1)}};
    s.initial = {Rational(1)};
    auto net = build_markov_chain(s);
    auto ts = enumerate_trajectories(net);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].second == 1);
}

TEST_CASE("markov spec errors") {
    auto s = mc_const_spec();
    s.matrix[0][0] = Rational(1, 2);
    CHECK_THROWS(build_markov_chain(s));
    s = mc_const_spec();
    s.T = 0;
    CHECK_THROWS(build_markov_chain(s));
    s = mc_const_spec();
    s.J = 0;
    CHECK_THROWS(build_markov_chain(s));
    CHECK_THROWS(mc_eps_spec(Rational(1, 3)));
}

TEST_CASE("joint probability") {
    auto c = mc_const();
    CHECK(joint_probability(c, traj({0, 0, 0, 0, 0, 0})) == Rational(1, 4));
    CHECK(joint_probability(c, traj({0, 1, 0, 1, 0, 0})) == 0);
    auto e = mc_eps();
    CHECK(joint_probability(e, traj({0, 1, 0, 1, 0, 1})) == Rational(9409, 40000));
    CHECK(joint_probability(e, traj({0, 1, 0, 1, 0, 0})) == Rational(97, 40000));
    CHECK(joint_probability(e, traj({0, 1, 0, 0, 0, 1})) == Rational(1, 40000));
    CHECK_THROWS(joint_probability(e, traj({0, 1, 0})));
}

TEST_CASE("marginal probability") {
    auto c = mc_const();
    Pattern x = P(c, "1/0=0");
    CHECK(marginal_probability(c, x) == oracle_marginal(c, x));
    CHECK(marginal_probability(c, x) == Rational(1, 2));
    CHECK(marginal_probability(c, Pattern()) == 1);
    auto e = mc_eps();
    CHECK(marginal_probability(e, traj({0, 1, 0, 1, 0, 1})) == Rational(9409, 40000));
    CHECK_THROWS(P(c, "1/0=7"));
    CHECK_THROWS(P(c, "9/0=0"));
}

TEST_CASE("conditional probability") {
    auto c = mc_const();
    CHECK(conditional_probability(c, P(c, "1/1=0"), P(c, "1/0=0")) == oracle_marginal(c, P(c, "1/0=0,1/1=0")) / oracle_marginal(c, P(c, "1/0=0")));
    CHECK(conditional_probability(c, P(c, "1/1=0"), P(c, "1/0=0")) == 1);
    auto x = P(c, "1/0=1,2/2=0");
    CHECK(conditional_probability(c, x, x) == 1);
    CHECK_THROWS(conditional_probability(c, x, P(c, "1/0=0,1/1=1")));
    auto e = mc_eps();
    auto given = P(e, "1/0=0,2/0=1");
    auto cont = P(e, "1/1=0,2/1=1,1/2=0,2/2=1");
    Rational eps(1, 100);
    CHECK(conditional_probability(e, cont, given) == (1 - 3 * eps) * (1 - 3 * eps));
    CHECK(conditional_probability(e, cont, given) == Rational(9409, 10000));
}

TEST_CASE("morphs") {
    auto c = mc_const();
    auto m = morph(c, P(c, "1/0=0"));
    REQUIRE(m.size() == 2);
    for (const auto& entry : m) CHECK(entry.prob == Rational(1, 2));
    auto full = morph(c, traj({1, 1, 1, 1, 1, 1}));
    REQUIRE(full.size() == 1);
    CHECK(full[0].completion.empty());
    CHECK(full[0].prob == 1);
    auto e = mc_eps();
    auto m0 = morph(e, P(e, "1/0=0,2/0=0"));
    CHECK(m0.size() == 16);
    Rational sum = 0;
    for (const auto& entry : m0) sum += entry.prob;
    CHECK(sum == 1);
    CHECK_THROWS(morph(c, P(c, "1/0=0,1/1=1")));
}

TEST_CASE("trajectory enumeration") {
    auto c = mc_const();
    auto ts = enumerate_trajectories(c);
    CHECK(ts.size() == 4);
    for (const auto& [t, p] : ts) CHECK(p == Rational(1, 4));
    auto e = mc_eps();
    std::map<Rational, int> classes;
    for (const auto& [t, p] : enumerate_trajectories(e)) ++classes[p];
    CHECK(classes.size() == 3);
    CHECK(classes[Rational(9409, 40000)] == 4);
    CHECK(classes[Rational(97, 40000)] == 24);
    CHECK(classes[Rational(1, 40000)] == 36);

    Caps tiny;
    tiny.states = 8;
    auto capped = build_markov_chain(mc_const_spec(), tiny);
    CHECK_THROWS_AS(enumerate_trajectories(capped), std::length_error);
}

TEST_CASE("deterministic pattern counts") {
    auto c = mc_const();
    CHECK(is_deterministic(c));
    CHECK(root_state_count(c) == 4);
    CHECK(deterministic_pattern_count(c, P(c, "1/0=0")) == 2);
    CHECK(deterministic_pattern_count(c, traj({0, 0, 0, 0, 0, 0})) == 1);
    CHECK(deterministic_pattern_count(c, P(c, "1/0=0,1/1=1")) == 0);
    CHECK_FALSE(is_deterministic(mc_eps()));
    CHECK_THROWS(deterministic_pattern_count(mc_eps(), P(c, "1/0=0")));
}

TEST_CASE("time-slice Markov property") {
    CHECK(verify_time_slice_markov(mc_const()));
    CHECK(verify_time_slice_markov(mc_eps()));
    // X_2 copies X_0 past an independent X_1.
    std::vector<BayesNet::NodeSpec> nodes(3);
    for (int t = 0; t < 3; ++t) {
        nodes[t].id = {"x" + std::to_string(t), Coord{1, t}};
        nodes[t].space.symbols = {"0", "1"};
    }
    nodes[0].rows = {{Rational(1, 2), Rational(1, 2)}};
    nodes[1].rows = {{Rational(1, 2), Rational(1, 2)}};
    nodes[2].parents = {"x0"};
    nodes[2].rows = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    CHECK_FALSE(verify_time_slice_markov(BayesNet::build("skip", nodes)));
}

TEST_CASE("network validation") {
    std::vector<BayesNet::NodeSpec> nodes(2);
    nodes[0].id.label = "a";
    nodes[1].id.label = "b";
    nodes[0].space.symbols = nodes[1].space.symbols = {"0", "1"};
    nodes[0].parents = {"b"};
    nodes[1].parents = {"a"};
    nodes[0].rows = nodes[1].rows = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    CHECK_THROWS(BayesNet::build("cycle", nodes));
    nodes[1].parents.clear();
    nodes[1].rows = {{Rational(1, 2), Rational(1, 3)}};
    CHECK_THROWS(BayesNet::build("row", nodes));
    nodes[1].rows = {{Rational(1, 2), Rational(1, 2)}};
    CHECK_NOTHROW(BayesNet::build("ok", nodes));
    nodes[1].space.symbols = {"0", "0"};
    CHECK_THROWS(BayesNet::build("dup", nodes));
}

TEST_CASE("property: marginals agree with the brute-force oracle") {
    Rng rng(11);
    for (int round = 0; round < 40; ++round) {
        auto net = random_net(rng, 3 + static_cast<int>(rng() % 4));
        Rational total = 0;
        for (const auto& [t, p] : enumerate_trajectories(net)) {
            total += p;
            CHECK(p == oracle_joint(net, [&] {
                      std::vector<int> a(net.size());
                      for (auto [n, v] : t.items()) a[n] = v;
                      return a;
                  }()));
        }
        CHECK(total == 1);
        for (int k = 0; k < 10; ++k) {
            auto x = random_pattern(rng, net);
            Rational px = marginal_probability(net, x);
            CHECK(px == oracle_marginal(net, x));
            // Sub-patterns are at least as probable.
            if (px > 0)
                for (std::uint64_t s = x.domain(); s; s = (s - 1) & x.domain()) CHECK(marginal_probability(net, x.restrict(s)) >= px);
        }
    }
}

TEST_CASE("property: deterministic counts on deterministic chains") {
    Rng rng(5);
    for (int round = 0; round < 20; ++round) {
        // Random deterministic kernel (a function on slice states) with uniform initial.
        MarkovSpec s;
        s.J = 2;
        s.T = 3;
        s.states = {{"0", "1"}};
        s.matrix.assign(4, std::vector<Rational>(4, Rational(0)));
        for (int from = 0; from < 4; ++from) s.matrix[rng() % 4][from] = 1;
        s.initial.assign(4, Rational(1, 4));
        auto net = build_markov_chain(s);
        REQUIRE(is_deterministic(net));
        CHECK(root_state_count(net) == 4);
        // Oracle: run the slice map from every initial state and count matching trajectories.
        std::vector<std::vector<int>> trajs;
        for (std::size_t s0 = 0; s0 < 4; ++s0) {
            std::vector<int> traj(net.size());
            std::size_t cur = s0;
            for (int t = 0; t < s.T; ++t) {
                auto v = decode_slice(s, cur);
                traj[*net.find(1, t)] = v[0];
                traj[*net.find(2, t)] = v[1];
                std::size_t next = 0;
                for (std::size_t to = 0; to < 4; ++to)
                    if (s.matrix[to][cur] == 1) next = to;
                cur = next;
            }
            trajs.push_back(traj);
        }
        for (int k = 0; k < 20; ++k) {
            auto x = random_pattern(rng, net);
            std::uint64_t n = 0;
            for (const auto& traj : trajs) {
                bool ok = true;
                for (auto [node, v] : x.items()) ok = ok && traj[node] == v;
                n += ok;
            }
            CHECK(deterministic_pattern_count(net, x) == n);
        }
    }
}

TEST_CASE("property: built chains reproduce their kernel and are time-slice Markov") {
    Rng rng(17);
    for (int round = 0; round < 25; ++round) {
        auto spec = random_markov(rng, 3);
        auto net = build_markov_chain(spec);
        CHECK(verify_time_slice_markov(net));
        for (std::size_t s = 0; s < 4; ++s) {
            auto v = decode_slice(spec, s);
            Pattern from({{*net.find(1, 1), v[0]}, {*net.find(2, 1), v[1]}});
            if (marginal_probability(net, from) == 0) continue;
            for (std::size_t to = 0; to < 4; ++to) {
                auto w = decode_slice(spec, to);
                Pattern next({{*net.find(1, 2), w[0]}, {*net.find(2, 2), w[1]}});
                CHECK(conditional_probability(net, next, from) == spec.matrix[to][s]);
            }
        }
        Rational p0 = 0;
        for (std::size_t s = 0; s < 4; ++s) {
            auto v = decode_slice(spec, s);
            CHECK(marginal_probability(net, Pattern({{*net.find(1, 0), v[0]}, {*net.find(2, 0), v[1]}})) == spec.initial[s]);
        }
    }
}

TEST_CASE("driven chain") {
    auto spec = thermostat_spec(Rational(1, 10));
    auto net = build_markov_chain(spec);
    CHECK(net.size() == 8);
    CHECK(verify_time_slice_markov(net));
    // The heater at t = 1 is a function of the driven nodes at t = 0.
    auto h = *net.find(4, 1);
    for (const auto& [t, p] : enumerate_trajectories(net)) {
        int ones = *t.at(*net.find(1, 0)) + *t.at(*net.find(2, 0)) + *t.at(*net.find(3, 0));
        CHECK(*t.at(h) == (ones <= 1 ? 1 : 0));
    }
    CHECK_THROWS(compose_driven_kernel(spec, Matrix(3), Matrix(8)));
}
