#include "stpi/partition.hpp"

#include "stpi/model.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stpi {

// ---------------------------------------------------------------- SetPartition

SetPartition SetPartition::from_rgs(std::vector<int> ground, std::vector<int> rgs) {
    if (ground.size() != rgs.size()) throw std::invalid_argument("rgs length differs from ground size");
    for (std::size_t i = 1; i < ground.size(); ++i)
        if (ground[i] <= ground[i - 1]) throw std::invalid_argument("ground set must be strictly ascending");
    int mx = -1;
    for (int r : rgs) {
        if (r < 0 || r > mx + 1) throw std::invalid_argument("not a restricted-growth string");
        mx = std::max(mx, r);
    }
    SetPartition p;
    p.ground_ = std::move(ground);
    p.rgs_ = std::move(rgs);
    p.blocks_ = mx + 1;
    return p;
}

SetPartition SetPartition::from_blocks(const std::vector<std::vector<int>>& blocks) {
    std::map<int, int> label;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].empty()) throw std::invalid_argument("empty block");
        for (int e : blocks[b])
            if (!label.emplace(e, static_cast<int>(b)).second)
                throw std::invalid_argument("element " + std::to_string(e) + " appears in two blocks");
    }
    std::vector<int> ground, rgs;
    std::map<int, int> relabel;
    for (auto [e, b] : label) {
        ground.push_back(e);
        auto it = relabel.emplace(b, static_cast<int>(relabel.size())).first;
        rgs.push_back(it->second);
    }
    return from_rgs(std::move(ground), std::move(rgs));
}

SetPartition SetPartition::zero(std::vector<int> ground) {
    std::sort(ground.begin(), ground.end());
    std::vector<int> rgs(ground.size());
    std::iota(rgs.begin(), rgs.end(), 0);
    return from_rgs(std::move(ground), std::move(rgs));
}

SetPartition SetPartition::unit(std::vector<int> ground) {
    std::sort(ground.begin(), ground.end());
    std::vector<int> rgs(ground.size(), 0);
    return from_rgs(std::move(ground), std::move(rgs));
}

std::vector<std::vector<int>> SetPartition::blocks() const {
    std::vector<std::vector<int>> out(blocks_);
    for (std::size_t i = 0; i < ground_.size(); ++i) out[rgs_[i]].push_back(ground_[i]);
    return out;
}

std::vector<std::uint64_t> SetPartition::block_masks() const {
    std::vector<std::uint64_t> out(blocks_, 0);
    for (std::size_t i = 0; i < ground_.size(); ++i) {
        if (ground_[i] < 0 || ground_[i] >= 64) throw std::out_of_range("element outside mask range");
        out[rgs_[i]] |= std::uint64_t{1} << ground_[i];
    }
    return out;
}

int SetPartition::block_of(int element) const {
    auto it = std::lower_bound(ground_.begin(), ground_.end(), element);
    if (it == ground_.end() || *it != element) throw std::out_of_range("element not in ground set");
    return rgs_[it - ground_.begin()];
}

// ---------------------------------------------------------------- enumeration

PartitionEnumerator::PartitionEnumerator(std::vector<int> ground, int cap) : ground_(std::move(ground)) {
    std::sort(ground_.begin(), ground_.end());
    if (std::adjacent_find(ground_.begin(), ground_.end()) != ground_.end())
        throw std::invalid_argument("ground set has duplicates");
    if (ground_.empty()) throw std::invalid_argument("cannot enumerate partitions of the empty set");
    if (static_cast<int>(ground_.size()) > cap)
        throw std::length_error("ground set of " + std::to_string(ground_.size()) + " elements exceeds partition cap " +
                                std::to_string(cap));
    a_.assign(ground_.size(), 0);
    m_.assign(ground_.size(), 0);
}

bool PartitionEnumerator::next(SetPartition& out) {
    if (done_) return false;
    if (started_) {
        const int n = static_cast<int>(a_.size());
        int i = n - 1;
        while (i > 0 && a_[i] > m_[i - 1]) --i;
        if (i == 0) {
            done_ = true;
            return false;
        }
        ++a_[i];
        m_[i] = std::max(m_[i - 1], a_[i]);
        for (int k = i + 1; k < n; ++k) {
            a_[k] = 0;
            m_[k] = m_[k - 1];
        }
    }
    started_ = true;
    out = SetPartition::from_rgs(ground_, a_);
    return true;
}

std::vector<SetPartition> enumerate_partitions(const std::vector<int>& ground, int cap) {
    PartitionEnumerator en(ground, cap);
    std::vector<SetPartition> out;
    SetPartition p;
    while (en.next(p)) out.push_back(p);
    return out;
}

mpz_class bell(int n) {
    if (n < 0) throw std::out_of_range("bell: negative n");
    // Bell triangle.
    std::vector<mpz_class> row{1};
    for (int i = 1; i <= n; ++i) {
        std::vector<mpz_class> nxt{row.back()};
        for (const auto& x : row) nxt.push_back(nxt.back() + x);
        row = std::move(nxt);
    }
    return row.front();
}

mpz_class stirling2(int n, int k) {
    if (n < 0 || k < 0 || k > n) throw std::out_of_range("stirling2: need 0 <= k <= n");
    std::vector<mpz_class> s(k + 1, 0);
    s[0] = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = std::min(i, k); j >= 0; --j) s[j] = j == 0 ? mpz_class(0) : s[j - 1] + mpz_class(j) * s[j];
    return s[k];
}

// ---------------------------------------------------------------- lattice

namespace {

void same_ground(const SetPartition& a, const SetPartition& b) {
    if (a.ground() != b.ground()) throw std::invalid_argument("partitions have different ground sets");
}

SetPartition from_labels(const std::vector<int>& ground, const std::vector<int>& labels) {
    std::map<int, int> relabel;
    std::vector<int> rgs;
    for (int l : labels) rgs.push_back(relabel.emplace(l, static_cast<int>(relabel.size())).first->second);
    return SetPartition::from_rgs(ground, std::move(rgs));
}

}  // namespace

bool refines(const SetPartition& pi, const SetPartition& xi) {
    same_ground(pi, xi);
    std::vector<int> img(pi.block_count(), -1);
    for (std::size_t i = 0; i < pi.rgs().size(); ++i) {
        int& m = img[pi.rgs()[i]];
        if (m == -1)
            m = xi.rgs()[i];
        else if (m != xi.rgs()[i])
            return false;
    }
    return true;
}

bool strictly_refines(const SetPartition& pi, const SetPartition& xi) {
    return pi.block_count() > xi.block_count() && refines(pi, xi);
}

SetPartition join(const SetPartition& pi, const SetPartition& xi) {
    same_ground(pi, xi);
    const std::size_t n = pi.ground().size();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (const auto* p : {&pi, &xi}) {
        std::vector<int> first(p->block_count(), -1);
        for (std::size_t i = 0; i < n; ++i) {
            int& f = first[p->rgs()[i]];
            if (f == -1)
                f = static_cast<int>(i);
            else
                parent[find(static_cast<int>(i))] = find(f);
        }
    }
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = find(static_cast<int>(i));
    return from_labels(pi.ground(), labels);
}

SetPartition meet(const SetPartition& pi, const SetPartition& xi) {
    same_ground(pi, xi);
    std::vector<int> labels(pi.ground().size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = pi.rgs()[i] * (xi.block_count() + 1) + xi.rgs()[i];
    return from_labels(pi.ground(), labels);
}

bool covers(const SetPartition& xi, const SetPartition& pi) {
    same_ground(xi, pi);
    return xi.block_count() == pi.block_count() + 1 && refines(xi, pi);
}

SetPartition restrict(const SetPartition& pi, const std::vector<int>& subset) {
    if (subset.empty()) throw std::invalid_argument("restriction to the empty set");
    std::vector<int> s = subset;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::vector<int> labels;
    for (int e : s) labels.push_back(pi.block_of(e));
    return from_labels(s, labels);
}

std::vector<std::pair<int, int>> hasse_edges(const std::vector<SetPartition>& el) {
    const int n = static_cast<int>(el.size());
    std::vector<std::vector<char>> below(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && el[i].ground() == el[j].ground() && strictly_refines(el[i], el[j])) below[i][j] = 1;
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!below[i][j]) continue;
            bool direct = true;
            for (int k = 0; k < n && direct; ++k)
                if (below[i][k] && below[k][j]) direct = false;
            if (direct) out.emplace_back(i, j);
        }
    return out;
}

std::vector<std::vector<int>> hasse_components(const std::vector<SetPartition>& el) {
    const int n = static_cast<int>(el.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (auto [a, b] : hasse_edges(el)) parent[find(a)] = find(b);
    std::map<int, std::vector<int>> comp;
    for (int i = 0; i < n; ++i) comp[find(i)].push_back(i);
    std::vector<std::vector<int>> out;
    for (auto& [r, v] : comp) out.push_back(std::move(v));
    std::sort(out.begin(), out.end());
    return out;
}

bool posets_isomorphic(int n1, const std::vector<std::pair<int, int>>& e1, int n2,
                       const std::vector<std::pair<int, int>>& e2) {
    if (n1 != n2 || e1.size() != e2.size()) return false;
    if (n1 > 10) throw std::length_error("poset isomorphism limited to 10 elements");
    const int n = n1;
    std::vector<std::vector<char>> a(n, std::vector<char>(n, 0)), b = a;
    for (auto [x, y] : e1) a[x][y] = 1;
    for (auto [x, y] : e2) b[x][y] = 1;
    auto degs = [n](const std::vector<std::vector<char>>& m) {
        std::vector<std::pair<int, int>> d(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (m[i][j]) {
                    ++d[i].first;
                    ++d[j].second;
                }
        return d;
    };
    auto da = degs(a), db = degs(b);
    auto sa = da, sb = db;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) ok = da[i] == db[perm[i]];
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j) ok = a[i][j] == b[perm[i]][perm[j]];
        if (ok) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

// ---------------------------------------------------------------- text and DOT

std::string render_partition(const SetPartition& pi, const ElementLabel& label) {
    std::string out;
    bool first_block = true;
    for (const auto& b : pi.blocks()) {
        if (!first_block) out += "|";
        first_block = false;
        out += "{";
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (k) out += ",";
            out += label ? label(b[k]) : std::to_string(b[k]);
        }
        out += "}";
    }
    return out;
}

SetPartition parse_partition(const std::string& text) {
    std::vector<std::vector<int>> blocks;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && (text[i] == ' ' || text[i] == '|')) ++i;
    };
    skip();
    while (i < text.size()) {
        if (text[i] != '{') throw std::invalid_argument("expected '{' in partition '" + text + "'");
        auto close = text.find('}', i);
        if (close == std::string::npos) throw std::invalid_argument("unterminated block in '" + text + "'");
        std::vector<int> block;
        std::stringstream ss(text.substr(i + 1, close - i - 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) block.push_back(std::stoi(tok));
        blocks.push_back(std::move(block));
        i = close + 1;
        skip();
    }
    return SetPartition::from_blocks(blocks);
}

std::string hasse_dot(const std::vector<SetPartition>& el, const std::string& name, const ElementLabel& label) {
    std::ostringstream os;
    os << "digraph \"" << name << "\" {\n  rankdir=BT;\n  node [shape=box, fontsize=10];\n";
    for (std::size_t i = 0; i < el.size(); ++i)
        os << "  p" << i << " [label=\"" << render_partition(el[i], label) << "\"];\n";
    std::map<int, std::vector<std::size_t>, std::greater<>> ranks;
    for (std::size_t i = 0; i < el.size(); ++i) ranks[el[i].block_count()].push_back(i);
    for (const auto& [k, ids] : ranks) {
        os << "  { rank=same;";
        for (auto i : ids) os << " p" << i << ";";
        os << " }\n";
    }
    for (auto [a, b] : hasse_edges(el)) os << "  p" << a << " -> p" << b << ";\n";
    os << "}\n";
    return os.str();
}

mpz_class sli_workload(const BayesNet& net, WorkloadMode mode) {
    const int n = net.size();
    if (mode == WorkloadMode::disintegration) {
        mpz_class states = 1;
        for (int i = 0; i < n; ++i) states *= static_cast<unsigned long>(net.space(i).size());
        return states * bell(n);
    }
    // Elementary symmetric polynomials of the state-space sizes give sum over |A| = k of |X_A|.
    std::vector<mpz_class> e(n + 1, 0);
    e[0] = 1;
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k >= 1; --k) e[k] += e[k - 1] * static_cast<unsigned long>(net.space(i).size());
    mpz_class total = 0;
    for (int k = 1; k <= n; ++k) total += e[k] * bell(k);
    return total;
}

}  // namespace stpi
