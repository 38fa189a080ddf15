#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace stpi {

class BayesNet;

// A partition of a finite set of integers, stored as a restricted-growth string over the
// ascending ground set: rgs[0] = 0 and rgs[i] <= 1 + max(rgs[0..i-1]).
class SetPartition {
public:
    SetPartition() = default;
    static SetPartition from_rgs(std::vector<int> ground, std::vector<int> rgs);
    static SetPartition from_blocks(const std::vector<std::vector<int>>& blocks);
    static SetPartition zero(std::vector<int> ground);
    static SetPartition unit(std::vector<int> ground);

    const std::vector<int>& ground() const { return ground_; }
    const std::vector<int>& rgs() const { return rgs_; }
    int block_count() const { return blocks_; }
    bool is_unit() const { return blocks_ == 1; }
    bool is_zero() const { return blocks_ == static_cast<int>(ground_.size()); }

    // Blocks in order of first appearance; each block ascending.
    std::vector<std::vector<int>> blocks() const;
    // Bit masks of the blocks over element values; elements must lie in [0, 64).
    std::vector<std::uint64_t> block_masks() const;
    int block_of(int element) const;

    auto operator<=>(const SetPartition& o) const {
        if (auto c = ground_ <=> o.ground_; c != 0) return c;
        return rgs_ <=> o.rgs_;
    }
    bool operator==(const SetPartition& o) const { return ground_ == o.ground_ && rgs_ == o.rgs_; }

private:
    std::vector<int> ground_;
    std::vector<int> rgs_;
    int blocks_ = 0;
};

inline constexpr int kDefaultPartitionCap = 13;

// Restricted-growth lexicographic enumeration; supports splitting into independent chunks.
class PartitionEnumerator {
public:
    explicit PartitionEnumerator(std::vector<int> ground, int cap = kDefaultPartitionCap);
    bool next(SetPartition& out);

private:
    std::vector<int> ground_;
    std::vector<int> a_, m_;  // rgs and running maxima
    bool started_ = false, done_ = false;
};

std::vector<SetPartition> enumerate_partitions(const std::vector<int>& ground, int cap = kDefaultPartitionCap);

mpz_class bell(int n);
mpz_class stirling2(int n, int k);

bool refines(const SetPartition& pi, const SetPartition& xi);
bool strictly_refines(const SetPartition& pi, const SetPartition& xi);
SetPartition join(const SetPartition& pi, const SetPartition& xi);
SetPartition meet(const SetPartition& pi, const SetPartition& xi);
// True iff pi is xi with exactly two blocks merged.
bool covers(const SetPartition& xi, const SetPartition& pi);
SetPartition restrict(const SetPartition& pi, const std::vector<int>& subset);

// Covering pairs (lower index, upper index) of the refinement order restricted to `elements`.
std::vector<std::pair<int, int>> hasse_edges(const std::vector<SetPartition>& elements);
// Connected components of the Hasse diagram; each component lists element indices ascending.
std::vector<std::vector<int>> hasse_components(const std::vector<SetPartition>& elements);
// Exact isomorphism of two finite posets given by their covering relations (small sizes only).
bool posets_isomorphic(int n1, const std::vector<std::pair<int, int>>& e1, int n2,
                       const std::vector<std::pair<int, int>>& e2);

using ElementLabel = std::function<std::string(int)>;
std::string render_partition(const SetPartition& pi, const ElementLabel& label = {});
SetPartition parse_partition(const std::string& text);

std::string hasse_dot(const std::vector<SetPartition>& elements, const std::string& name,
                      const ElementLabel& label = {});

enum class WorkloadMode { exhaustive, disintegration };
mpz_class sli_workload(const BayesNet& net, WorkloadMode mode);

}  // namespace stpi
