#pragma once

// Random fixtures and brute-force oracles shared by the test executables.

#include "stpi/agency.hpp"
#include "stpi/model.hpp"
#include "stpi/partition.hpp"
#include "stpi/pattern.hpp"

#include <random>
#include <string>
#include <vector>

namespace stpi::test {

using Rng = std::mt19937;

// Distribution with small integer weights; at least one entry positive.
inline std::vector<Rational> random_row(Rng& rng, std::size_t k, bool allow_zero = true) {
    std::uniform_int_distribution<int> w(allow_zero ? 0 : 1, 4);
    std::vector<int> ws(k);
    int sum = 0;
    while (sum == 0) {
        sum = 0;
        for (auto& x : ws) sum += (x = w(rng));
    }
    std::vector<Rational> row;
    for (int x : ws) row.emplace_back(x, sum);
    for (auto& q : row) q.canonicalize();
    return row;
}

// Random DAG over n nodes in insertion order with 2 or 3 states each.
inline BayesNet random_net(Rng& rng, int n, int max_states = 3, int max_parents = 2) {
    std::vector<BayesNet::NodeSpec> nodes;
    std::uniform_int_distribution<int> states(2, max_states);
    for (int i = 0; i < n; ++i) {
        BayesNet::NodeSpec s;
        s.id.label = "n" + std::to_string(i);
        int k = states(rng);
        for (int v = 0; v < k; ++v) s.space.symbols.push_back(std::to_string(v));
        std::size_t configs = 1;
        for (int p = 0; p < i && static_cast<int>(s.parents.size()) < max_parents; ++p)
            if (rng() % 2) {
                s.parents.push_back("n" + std::to_string(p));
                configs *= nodes[p].space.size();
            }
        for (std::size_t c = 0; c < configs; ++c) s.rows.push_back(random_row(rng, k));
        nodes.push_back(std::move(s));
    }
    return BayesNet::build("random", std::move(nodes));
}

// Two-row binary chain with a random kernel.
inline MarkovSpec random_markov(Rng& rng, int T, bool allow_zero = true) {
    MarkovSpec s;
    s.J = 2;
    s.T = T;
    s.states = {{"0", "1"}};
    s.matrix.assign(4, std::vector<Rational>(4));
    for (int from = 0; from < 4; ++from) {
        auto col = random_row(rng, 4, allow_zero);
        for (int to = 0; to < 4; ++to) s.matrix[to][from] = col[to];
    }
    s.initial = random_row(rng, 4, allow_zero);
    return s;
}

inline Pattern random_pattern(Rng& rng, const BayesNet& net, int min_size = 1) {
    while (true) {
        std::vector<Pattern::Item> items;
        for (int i = 0; i < net.size(); ++i)
            if (rng() % 2) items.emplace_back(i, static_cast<int>(rng() % net.space(i).size()));
        if (static_cast<int>(items.size()) >= min_size) return Pattern(std::move(items));
    }
}

inline SetPartition random_partition(Rng& rng, const std::vector<int>& ground) {
    std::vector<int> rgs(ground.size(), 0);
    int mx = 0;
    for (std::size_t i = 1; i < ground.size(); ++i) {
        rgs[i] = static_cast<int>(rng() % (mx + 2));
        mx = std::max(mx, rgs[i]);
    }
    return SetPartition::from_rgs(ground, rgs);
}

// All full assignments in row-major order, possible or not.
inline std::vector<std::vector<int>> all_assignments(const BayesNet& net) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(net.size(), 0);
    while (true) {
        out.push_back(a);
        int k = net.size() - 1;
        while (k >= 0 && ++a[k] == static_cast<int>(net.space(k).size())) a[k--] = 0;
        if (k < 0) return out;
    }
}

// Product of mechanism entries, read straight from the tables.
inline Rational oracle_joint(const BayesNet& net, const std::vector<int>& a) {
    Rational p = 1;
    for (int i = 0; i < net.size(); ++i) {
        const auto& m = net.mechanism(i);
        std::size_t row = 0;
        for (int par : m.parents) row = row * net.space(par).size() + a[par];
        p *= m.rows[row][a[i]];
    }
    return p;
}

inline Rational oracle_marginal(const BayesNet& net, const Pattern& x) {
    Rational sum = 0;
    for (const auto& a : all_assignments(net)) {
        bool ok = true;
        for (auto [n, v] : x.items()) ok = ok && a[n] == v;
        if (ok) sum += oracle_joint(net, a);
    }
    return sum;
}

inline Rational oracle_sli_ratio(const BayesNet& net, const Pattern& x, const SetPartition& pi) {
    Rational prod = 1;
    for (const auto& b : pi.blocks()) prod *= oracle_marginal(net, x.restrict(b));
    return oracle_marginal(net, x) / prod;
}

// PA loop with |E|, |M| in 1..3 and T in 2..4.
inline PaLoop random_pa_loop(Rng& rng, bool allow_zero = true) {
    PaLoop l;
    int ne = 1 + static_cast<int>(rng() % 3), nm = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < ne; ++i) l.e_states.push_back("e" + std::to_string(i));
    for (int i = 0; i < nm; ++i) l.m_states.push_back("m" + std::to_string(i));
    l.T = 2 + static_cast<int>(rng() % 3);
    l.e0 = random_row(rng, ne, allow_zero);
    l.m0 = random_row(rng, nm, allow_zero);
    for (int t = 0; t + 1 < l.T; ++t) {
        Matrix env, mem;
        for (int r = 0; r < ne * nm; ++r) {
            // Sparse rows make equal kernel rows and deterministic transitions likely.
            bool det = rng() % 3 == 0;
            auto er = det ? std::vector<Rational>(ne, Rational(0)) : random_row(rng, ne, allow_zero);
            if (det) er[rng() % ne] = 1;
            det = rng() % 3 == 0;
            auto mr = det ? std::vector<Rational>(nm, Rational(0)) : random_row(rng, nm, allow_zero);
            if (det) mr[rng() % nm] = 1;
            env.push_back(er);
            mem.push_back(mr);
        }
        l.env_kernel.push_back(env);
        l.mem_kernel.push_back(mem);
    }
    return l;
}

inline Pattern P(const BayesNet& net, const std::string& literal) { return parse_pattern(net, literal); }

// Three binary driven nodes A = {1,2,3} and a heater B = {4}: the heater switches on iff the
// average driven state is at most 1/2; a driven node equal to the heater stays, any other
// moves to the heater's state with probability eps.
inline MarkovSpec thermostat_spec(const Rational& eps, int T = 2) {
    MarkovSpec shape;
    shape.name = "thermostat";
    shape.J = 4;
    shape.T = T;
    shape.states = {{"0", "1"}};
    shape.driving = {4};
    Matrix drive(2, std::vector<Rational>(16, Rational(0)));
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 2; ++b) {
            int ones = (a >> 2 & 1) + (a >> 1 & 1) + (a & 1);
            drive[2 * ones <= 3 ? 1 : 0][a * 2 + b] = 1;
        }
    Matrix driven(8, std::vector<Rational>(16, Rational(0)));
    for (int b1 = 0; b1 < 2; ++b1)
        for (int a = 0; a < 8; ++a)
            for (int a1 = 0; a1 < 8; ++a1) {
                Rational p = 1;
                for (int bit = 0; bit < 3; ++bit) {
                    int x = a >> bit & 1, y = a1 >> bit & 1;
                    if (x == b1) p *= y == x ? 1 : 0;
                    else p *= y == b1 ? eps : 1 - eps;
                }
                driven[a1][b1 * 8 + a] = p;
            }
    shape.matrix = compose_driven_kernel(shape, drive, driven);
    shape.initial.assign(16, Rational(1, 16));
    return shape;
}

}  // namespace stpi::test
