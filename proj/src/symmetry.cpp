#include "stpi/symmetry.hpp"

#include "stpi/parallel.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <stdexcept>

namespace stpi {

Permutation::Permutation(std::vector<int> image) : image_(std::move(image)) {
    std::vector<char> hit(image_.size(), 0);
    for (int v : image_) {
        if (v < 0 || v >= static_cast<int>(image_.size()) || hit[v])
            throw std::invalid_argument("permutation image is not a bijection");
        hit[v] = 1;
    }
}

Permutation Permutation::identity(int n) {
    std::vector<int> im(n);
    for (int i = 0; i < n; ++i) im[i] = i;
    return Permutation(std::move(im));
}

Permutation Permutation::from_cycles(int n, const std::vector<std::vector<int>>& cycles) {
    std::vector<int> im(n);
    for (int i = 0; i < n; ++i) im[i] = i;
    std::vector<char> used(n, 0);
    for (const auto& c : cycles) {
        for (std::size_t k = 0; k < c.size(); ++k) {
            int a = c[k], b = c[(k + 1) % c.size()];
            if (a < 0 || a >= n || b < 0 || b >= n) throw std::out_of_range("cycle element outside the net");
            if (used[a]) throw std::invalid_argument("element appears in two cycles");
            used[a] = 1;
            im[a] = b;
        }
    }
    return Permutation(std::move(im));
}

bool Permutation::is_identity() const {
    for (int i = 0; i < size(); ++i)
        if (image_[i] != i) return false;
    return true;
}

std::vector<int> Permutation::support() const {
    std::vector<int> s;
    for (int i = 0; i < size(); ++i)
        if (image_[i] != i) s.push_back(i);
    return s;
}

Permutation Permutation::inverse() const {
    std::vector<int> inv(image_.size());
    for (int i = 0; i < size(); ++i) inv[image_[i]] = i;
    return Permutation(std::move(inv));
}

Permutation Permutation::after(const Permutation& other) const {
    if (other.size() != size()) throw std::invalid_argument("composing permutations of different sizes");
    std::vector<int> im(image_.size());
    for (int i = 0; i < size(); ++i) im[i] = image_[other.image_[i]];
    return Permutation(std::move(im));
}

std::string render_cycles(const Permutation& g, const BayesNet& net) {
    std::string out;
    std::vector<char> seen(g.size(), 0);
    for (int i = 0; i < g.size(); ++i) {
        if (seen[i] || g(i) == i) continue;
        out += "(";
        for (int k = i; !seen[k]; k = g(k)) {
            seen[k] = 1;
            if (k != i) out += " ";
            out += net.node_name(k);
        }
        out += ")";
    }
    return out.empty() ? "()" : out;
}

GeneratedGroup::GeneratedGroup(std::vector<Permutation> generators, std::size_t cap)
    : gens_(std::move(generators)), cap_(cap) {
    if (gens_.empty()) throw std::invalid_argument("a group needs at least one generator");
    for (const auto& g : gens_)
        if (g.size() != gens_[0].size()) throw std::invalid_argument("generators act on different node counts");
}

const std::vector<Permutation>& GeneratedGroup::elements() const {
    if (!closure_.empty()) return closure_;
    std::set<Permutation> seen{Permutation::identity(gens_[0].size())};
    std::deque<Permutation> queue(seen.begin(), seen.end());
    while (!queue.empty()) {
        Permutation e = queue.front();
        queue.pop_front();
        for (const auto& g : gens_) {
            Permutation h = g.after(e);
            if (seen.insert(h).second) {
                if (seen.size() > cap_) throw std::length_error("group closure exceeds cap");
                queue.push_back(std::move(h));
            }
        }
    }
    closure_.assign(seen.begin(), seen.end());
    return closure_;
}

namespace {

void check_spaces(const BayesNet& net, const Permutation& g) {
    if (g.size() != net.size()) throw std::invalid_argument("permutation size differs from the net");
    for (int i = 0; i < g.size(); ++i)
        if (net.space(i).symbols != net.space(g(i)).symbols)
            throw std::invalid_argument("permutation moves " + net.node_name(i) + " to a node with another state space");
}

Pattern move_values(const Permutation& g, const Pattern& x) {
    std::vector<Pattern::Item> items;
    items.reserve(x.size());
    for (auto [k, v] : x.items()) items.emplace_back(g(k), v);
    return Pattern(std::move(items));
}

}  // namespace

Pattern act_on_pattern(const BayesNet& net, const Permutation& g, const Pattern& x) {
    check_spaces(net, g);
    return move_values(g, x);
}

Pattern pull_back(const BayesNet& net, const Permutation& g, const Pattern& x) {
    return act_on_pattern(net, g.inverse(), x);
}

SetPartition act_on_partition(const Permutation& g, const SetPartition& pi) {
    std::vector<std::vector<int>> blocks;
    for (const auto& b : pi.blocks()) {
        std::vector<int> nb;
        for (int e : b) {
            if (e < 0 || e >= g.size()) throw std::out_of_range("partition element outside the permutation's domain");
            nb.push_back(g(e));
        }
        blocks.push_back(std::move(nb));
    }
    return SetPartition::from_blocks(blocks);
}

TransformedDistribution::TransformedDistribution(const BayesNet& net, Permutation g) : net_(&net), g_(std::move(g)) {
    check_spaces(net, g_);
}

Rational TransformedDistribution::marginal(const Pattern& x) const {
    return marginal_probability(*net_, move_values(g_.inverse(), x));
}

std::map<Pattern, Rational> TransformedDistribution::support() const {
    std::map<Pattern, Rational> out;
    // (g p)(g z) = p(z).
    for (const auto& [z, p] : enumerate_trajectories(*net_)) out.emplace(move_values(g_, z), p);
    return out;
}

bool is_symmetry(const BayesNet& net, const Permutation& g, const Pattern& x) {
    return act_on_pattern(net, g, x) == x;
}

bool is_symmetry(const Permutation& g, const SetPartition& pi) { return act_on_partition(g, pi) == pi; }

bool is_symmetry(const BayesNet& net, const Permutation& g) {
    std::map<Pattern, Rational> orig;
    for (const auto& [z, p] : enumerate_trajectories(net)) orig.emplace(z, p);
    return TransformedDistribution(net, g).support() == orig;
}

bool is_marginal_symmetry(const BayesNet& net, const Permutation& g, std::uint64_t domain) {
    check_spaces(net, g);
    for (int n : nodes_of(domain))
        if (!((domain >> g(n)) & 1u)) return false;
    // Compare p_A(x_A) with p_A(x^g_A) over the support of p_A.
    std::map<Pattern, Rational> pa;
    for (const auto& [z, p] : enumerate_trajectories(net)) pa[z.restrict(domain)] += p;
    const Permutation inv = g.inverse();
    for (const auto& [x, p] : pa) {
        auto it = pa.find(move_values(inv, x));
        if (it == pa.end() || it->second != p) return false;
    }
    return true;
}

std::vector<SetPartition> orbit(const GeneratedGroup& group, const SetPartition& pi) {
    std::set<SetPartition> out;
    for (const auto& g : group.elements()) out.insert(act_on_partition(g, pi));
    return {out.begin(), out.end()};
}

namespace {

void need_grid(const BayesNet& net) {
    if (!net.has_coords()) throw std::invalid_argument("built-in symmetries need (j, t) coordinates");
}

Permutation coordinate_map(const BayesNet& net, const std::function<Coord(Coord)>& f) {
    need_grid(net);
    std::vector<int> im(net.size());
    for (int i = 0; i < net.size(); ++i) {
        Coord c = f(*net.id(i).coord);
        auto k = net.find(c.j, c.t);
        if (!k) throw std::invalid_argument("coordinate map leaves the net");
        im[i] = *k;
    }
    return Permutation(std::move(im));
}

}  // namespace

Permutation spatial_flip(const BayesNet& net) {
    need_grid(net);
    auto js = net.spatial_indices();
    const int lo = js.front(), hi = js.back();
    return coordinate_map(net, [&](Coord c) { return Coord{lo + hi - c.j, c.t}; });
}

Permutation row_time_permutation(const BayesNet& net, int j, const std::vector<int>& time_image) {
    need_grid(net);
    const int t0 = net.min_t();
    if (static_cast<int>(time_image.size()) != net.max_t() - t0 + 1)
        throw std::invalid_argument("time permutation has the wrong length");
    return coordinate_map(net, [&](Coord c) { return c.j == j ? Coord{j, time_image[c.t - t0]} : c; });
}

Permutation time_shift(const BayesNet& net) {
    need_grid(net);
    const int t0 = net.min_t(), T = net.max_t() - t0 + 1;
    return coordinate_map(net, [&](Coord c) { return Coord{c.j, t0 + ((c.t - t0 - 1 + T) % T)}; });
}

Permutation spatial_permutation(const BayesNet& net, const std::vector<int>& sigma) {
    need_grid(net);
    auto js = net.spatial_indices();
    if (sigma.size() != js.size()) throw std::invalid_argument("spatial permutation has the wrong length");
    return coordinate_map(net, [&](Coord c) { return Coord{sigma[c.j - js.front()], c.t}; });
}

SymmetryReport check_sli_symmetry(const BayesNet& net, const GeneratedGroup& group, const Pattern& x, int threads) {
    SymmetryReport rep;
    const auto& els = group.elements();
    rep.elements = els.size();
    std::vector<Permutation> valid;
    for (const auto& g : els) {
        if (is_marginal_symmetry(net, g, x.domain()))
            valid.push_back(g);
        else
            rep.precondition_failures.push_back("g = " + render_cycles(g, net) + " does not preserve p_A");
    }
    if (!rep.precondition_failures.empty()) return rep;

    const auto parts = enumerate_partitions(x.nodes(), net.caps().partition_elements);
    struct Row {
        std::array<std::size_t, 3> cases{};
        std::size_t none = 0;
        std::vector<std::string> fails;
    };
    std::vector<Row> rows(valid.size());
    parallel_for(valid.size(), threads, [&](std::size_t gi) {
        const auto& g = valid[gi];
        const Pattern xg = pull_back(net, g, x);
        Row& r = rows[gi];
        for (const auto& pi : parts) {
            const SetPartition gpi = act_on_partition(g, pi);
            SliValue lhs = sli(net, x, gpi), rhs = sli(net, xg, pi);
            if (lhs != rhs)
                r.fails.push_back("g = " + render_cycles(g, net) + ", pi = " + render_partition(pi) +
                                  ": mi_{g pi}(x) != mi_pi(x^g)");
            if (lhs != sli(net, x, pi)) {
                ++r.none;
                continue;
            }
            if (xg == x) {
                ++r.cases[0];
                continue;
            }
            bool blockwise = true;
            Rational prod_x = 1, prod_g = 1;
            for (auto m : pi.block_masks()) {
                Rational a = marginal_probability(net, x.restrict(m)), b = marginal_probability(net, xg.restrict(m));
                prod_x *= a;
                prod_g *= b;
                if (a != b) blockwise = false;
            }
            if (blockwise)
                ++r.cases[1];
            else if (prod_x == prod_g)
                ++r.cases[2];
            else
                ++r.none;  // unreachable when the theorem holds: equal SLI forces equal products
        }
    });
    for (auto& r : rows) {
        for (int c = 0; c < 3; ++c) rep.invariance_cases[c] += r.cases[c];
        rep.not_invariant += r.none;
        for (auto& f : r.fails) rep.theorem_failures.push_back(std::move(f));
    }
    rep.partitions_checked = parts.size() * valid.size();
    return rep;
}

bool check_markov_symmetry_propagation(const MarkovSpec& spec, const std::vector<std::vector<int>>& spatial_generators) {
    std::vector<Permutation> gens;
    for (const auto& sigma : spatial_generators) {
        if (static_cast<int>(sigma.size()) != spec.J) throw std::invalid_argument("spatial permutation has the wrong length");
        std::vector<int> im(spec.J);
        for (int j = 0; j < spec.J; ++j) im[j] = sigma[j] - 1;
        Permutation p(im);
        for (int j = 1; j <= spec.J; ++j) {
            if (spec.states_of(j) != spec.states_of(p(j - 1) + 1))
                throw std::invalid_argument("spatial permutation mixes state spaces");
            bool driving = std::find(spec.driving.begin(), spec.driving.end(), j) != spec.driving.end();
            if (driving && p(j - 1) != j - 1) throw std::invalid_argument("permutation moves a driving index");
        }
        gens.push_back(std::move(p));
    }
    if (gens.empty()) return true;
    GeneratedGroup group(gens);
    const std::size_t n = spec.slice_size();
    for (const auto& g : group.elements()) {
        // Slice map s -> index of x^g, with (x^g)_j = x_{g(j)}.
        std::vector<std::size_t> pull(n);
        for (std::size_t s = 0; s < n; ++s) {
            auto x = decode_slice(spec, s);
            std::vector<int> xg(spec.J);
            for (int j = 0; j < spec.J; ++j) xg[j] = x[g(j)];
            pull[s] = encode_slice(spec, xg);
        }
        for (std::size_t s = 0; s < n; ++s) {
            if (spec.initial[pull[s]] != spec.initial[s]) return false;
            for (std::size_t to = 0; to < n; ++to)
                if (spec.matrix[pull[to]][pull[s]] != spec.matrix[to][s]) return false;
        }
    }
    const BayesNet net = build_markov_chain(spec);
    for (const auto& g : group.elements()) {
        std::vector<int> sigma(spec.J);
        for (int j = 0; j < spec.J; ++j) sigma[j] = g(j) + 1;
        if (!is_symmetry(net, spatial_permutation(net, sigma)))
            throw std::logic_error("symmetric Markov kernel produced an asymmetric trajectory distribution");
    }
    return true;
}

}  // namespace stpi
