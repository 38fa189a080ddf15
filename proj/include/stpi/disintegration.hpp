#pragma once

#include "stpi/integration.hpp"

#include <string>
#include <vector>

namespace stpi {

struct Level {
    SliValue sli;
    std::vector<SetPartition> partitions;  // RGS order
};

struct Hierarchy {
    Pattern trajectory;
    std::vector<Level> levels;  // strictly increasing SLI
};

struct RefinementFreeHierarchy {
    std::vector<Level> levels;  // same SLI keys as the source hierarchy; levels may be empty
};

struct IotaEntity {
    Pattern pattern;
    SliValue iota;
    std::vector<std::pair<int, SetPartition>> witnesses;  // (level index, partition) in the refinement-free hierarchy
};

Hierarchy disintegration_hierarchy(const BayesNet& net, const Pattern& trajectory, int threads = 1);

// skip_filter keeps every partition; it exists only as a negative control for the verifier.
RefinementFreeHierarchy refinement_free(const Hierarchy& h, bool skip_filter = false);

// Non-singleton blocks of the refinement-free partitions, deduplicated and sorted by pattern.
std::vector<IotaEntity> iota_entities(const BayesNet& net, const RefinementFreeHierarchy& rf, const Pattern& trajectory);
std::vector<IotaEntity> iota_entities(const BayesNet& net, const Pattern& trajectory, int threads = 1);

// Union over all possible trajectories; witnesses are dropped.
std::vector<IotaEntity> entity_set_union(const BayesNet& net, int threads = 1);

// Every sub-pattern of the trajectory with at least two nodes and positive complete local integration.
std::vector<Pattern> brute_force_entities(const BayesNet& net, const Pattern& trajectory);

struct DisintegrationReport {
    Pattern trajectory;
    std::size_t partitions = 0;
    std::size_t blocks_checked = 0;    // direction (a)
    std::size_t entities_checked = 0;  // direction (b)
    std::vector<std::string> failures;
    bool passed() const { return failures.empty(); }
};

DisintegrationReport verify_disintegration_theorem(const BayesNet& net, const Pattern& trajectory, int threads = 1,
                                                   bool skip_filter = false);

}  // namespace stpi
