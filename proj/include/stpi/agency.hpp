#pragma once

#include "stpi/model.hpp"
#include "stpi/partition.hpp"
#include "stpi/pattern.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stpi {

// A sorted, deduplicated list of patterns of one net.
struct EntitySet {
    std::vector<Pattern> members;

    static EntitySet from(std::vector<Pattern> patterns);
    bool contains(const Pattern& p) const;
};

enum class ActionKind { value, extent };
const char* to_string(ActionKind k);

struct CoActionPair {
    Pattern actor;
    Pattern actor_trajectory;
    Pattern coactor;
    Pattern coactor_trajectory;
    int t = 0;
    ActionKind kind = ActionKind::value;
};

std::vector<CoActionPair> find_co_actions(const BayesNet& net, const EntitySet& entities, const Pattern& actor,
                                          const Pattern& trajectory, int t);

// x_{V_t \ A_t}.
Pattern environment_of(const BayesNet& net, const Pattern& entity, const Pattern& trajectory, int t);

// y_{B <= t}: the restriction to times up to t.
Pattern past_of(const BayesNet& net, const Pattern& p, int t);

std::vector<Pattern> co_perception_entities(const BayesNet& net, const EntitySet& entities, const Pattern& anchor, int t);

struct SetPredicates {
    bool exhaustive = false;
    bool mutually_exclusive = false;
    bool non_interpenetrating = false;
    std::optional<std::pair<Pattern, Pattern>> overlap;        // first co-occurring pair
    std::optional<std::pair<Pattern, Pattern>> interpenetration;  // first violating pair
};

SetPredicates set_predicates(const BayesNet& net, const std::vector<Pattern>& patterns);
// Pairwise exclusion only; returns the first co-occurring pair if any.
std::optional<std::pair<Pattern, Pattern>> first_overlap(const BayesNet& net, const std::vector<Pattern>& patterns);

// p(k) = p(x^k | c) / sum_l p(x^l | c) over a mutually exclusive set.
std::vector<Rational> dist_over_mutually_exclusive(const BayesNet& net, const std::vector<Pattern>& patterns,
                                                   const Pattern& conditioning);

class PerceptionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CoPerceptionContext {
    Pattern anchor;
    int t = 0;
    int r = 1;  // branching looks at slices t+1..t+r
    std::vector<Pattern> members;             // co-perception entities
    std::optional<std::vector<Pattern>> zeta;  // proxy subset
    std::vector<int> environment_nodes;        // V_t \ A_t

    const std::vector<Pattern>& active() const { return zeta ? *zeta : members; }
};

CoPerceptionContext make_context(const BayesNet& net, const EntitySet& entities, const Pattern& anchor, int t,
                                 std::optional<std::vector<Pattern>> zeta = std::nullopt, int r = 1);

std::vector<Pattern> co_perception_environments(const BayesNet& net, const CoPerceptionContext& ctx);

// Branches as lists of members of the active set, ordered by first member.
std::vector<std::vector<Pattern>> branching_partition(const BayesNet& net, const CoPerceptionContext& ctx);

struct BranchMorph {
    Pattern environment;
    std::vector<Rational> distribution;  // indexed like branching_partition
};

// Throws PerceptionError naming a co-occurring pair when the active set is not mutually exclusive.
BranchMorph branch_morph(const BayesNet& net, const CoPerceptionContext& ctx, const Pattern& environment);

struct Perceptions {
    std::vector<std::vector<Pattern>> branches;
    std::vector<BranchMorph> morphs;               // one per co-perception environment
    std::vector<std::vector<Pattern>> blocks;      // environments grouped by equal morph
};

Perceptions perception_partition(const BayesNet& net, const CoPerceptionContext& ctx);

// ---- perception-action loop ----

// E_t = (1, t), M_t = (2, t); both have parents (E_{t-1}, M_{t-1}) in that order.
struct PaLoop {
    std::vector<std::string> e_states;
    std::vector<std::string> m_states;
    int T = 2;
    std::vector<Rational> e0;
    std::vector<Rational> m0;
    // Per transition t -> t+1: row (e_t * |M| + m_t) gives the next-state distribution.
    std::vector<Matrix> env_kernel;
    std::vector<Matrix> mem_kernel;
};

void validate(const PaLoop& loop);
BayesNet build_pa_net(const PaLoop& loop);
// Agent time-evolutions m_T that are possible.
EntitySet pa_entities(const BayesNet& pa_net);

// Blocks of environment indices. With `m` given only that memory state is compared, and
// `environments` (if non-empty) restricts the ground set.
std::vector<std::vector<int>> pa_sensor_partition(const PaLoop& loop, int t, std::optional<int> m = std::nullopt,
                                                  const std::vector<int>& environments = {});
std::vector<std::vector<int>> pa_action_partition(const PaLoop& loop, int t);

struct ExtendedPaLoop {
    BayesNet net;
    std::vector<std::vector<std::vector<int>>> sensor;  // per t
    std::vector<std::vector<std::vector<int>>> action;  // per t
    bool marginal_matches = false;
};

ExtendedPaLoop extend_pa_loop(const PaLoop& loop);

struct NonHeteronomy {
    double bits = 0;
    bool positive = false;     // exact: some possible e_t admits two next memory states
    bool actions_exist = false;  // co-action search over the loop's entity set
    bool consistent() const { return positive == actions_exist; }
};

NonHeteronomy non_heteronomy(const PaLoop& loop, int t);

}  // namespace stpi
