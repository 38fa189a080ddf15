#include "stpi/disintegration.hpp"

#include "stpi/parallel.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <stdexcept>

namespace stpi {

Hierarchy disintegration_hierarchy(const BayesNet& net, const Pattern& trajectory, int threads) {
    if (static_cast<int>(trajectory.size()) != net.size())
        throw std::invalid_argument("disintegration needs a full trajectory");
    if (net.size() > net.caps().partition_elements)
        throw std::length_error("trajectory exceeds the partition-enumeration cap");
    SubsetMarginals sm(net, trajectory);
    const std::uint32_t full = (std::uint32_t{1} << net.size()) - 1;
    const Rational& whole = sm[full];
    if (whole == 0) throw std::domain_error("trajectory impossible");

    auto parts = enumerate_partitions(trajectory.nodes(), net.caps().partition_elements);
    std::vector<Rational> ratio(parts.size());
    parallel_for(parts.size(), threads, [&](std::size_t i) {
        Rational prod = 1;
        for (auto m : parts[i].block_masks()) prod *= sm[sm.local_mask(m)];
        ratio[i] = whole / prod;
    });

    std::vector<std::size_t> order(parts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ratio[a] < ratio[b]; });
    Hierarchy h{trajectory, {}};
    for (auto i : order) {
        if (h.levels.empty() || h.levels.back().sli.ratio != ratio[i]) h.levels.push_back({SliValue{ratio[i]}, {}});
        h.levels.back().partitions.push_back(parts[i]);
    }
    return h;
}

RefinementFreeHierarchy refinement_free(const Hierarchy& h, bool skip_filter) {
    RefinementFreeHierarchy rf;
    // Partitions seen so far, bucketed by block count; only partitions with more blocks can strictly refine.
    std::map<int, std::vector<const SetPartition*>> seen;
    for (const auto& level : h.levels) {
        for (const auto& pi : level.partitions) seen[pi.block_count()].push_back(&pi);
        Level out{level.sli, {}};
        for (const auto& pi : level.partitions) {
            bool has_refinement = false;
            if (!skip_filter) {
                for (auto it = seen.upper_bound(pi.block_count()); it != seen.end() && !has_refinement; ++it)
                    for (const auto* xi : it->second)
                        if (refines(*xi, pi)) {
                            has_refinement = true;
                            break;
                        }
            }
            if (!has_refinement) out.partitions.push_back(pi);
        }
        rf.levels.push_back(std::move(out));
    }
    return rf;
}

std::vector<IotaEntity> iota_entities(const BayesNet& net, const RefinementFreeHierarchy& rf, const Pattern& trajectory) {
    std::map<Pattern, std::vector<std::pair<int, SetPartition>>> found;
    for (std::size_t l = 0; l < rf.levels.size(); ++l)
        for (const auto& pi : rf.levels[l].partitions)
            for (auto m : pi.block_masks())
                if (std::popcount(m) >= 2) found[trajectory.restrict(m)].emplace_back(static_cast<int>(l), pi);
    std::vector<IotaEntity> out;
    for (auto& [p, w] : found) out.push_back({p, cli(net, p).value, std::move(w)});
    return out;
}

std::vector<IotaEntity> iota_entities(const BayesNet& net, const Pattern& trajectory, int threads) {
    return iota_entities(net, refinement_free(disintegration_hierarchy(net, trajectory, threads)), trajectory);
}

std::vector<IotaEntity> entity_set_union(const BayesNet& net, int threads) {
    auto trajs = enumerate_trajectories(net);
    std::vector<std::vector<IotaEntity>> per(trajs.size());
    parallel_for(trajs.size(), threads, [&](std::size_t i) { per[i] = iota_entities(net, trajs[i].first, 1); });
    std::map<Pattern, SliValue> all;
    for (auto& v : per)
        for (auto& e : v) all.emplace(e.pattern, e.iota);
    std::vector<IotaEntity> out;
    for (auto& [p, v] : all) out.push_back({p, v, {}});
    return out;
}

std::vector<Pattern> brute_force_entities(const BayesNet& net, const Pattern& trajectory) {
    std::vector<Pattern> out;
    const std::uint64_t dom = trajectory.domain();
    // Enumerate submasks of the domain.
    for (std::uint64_t s = dom; s; s = (s - 1) & dom) {
        if (std::popcount(s) < 2) continue;
        Pattern p = trajectory.restrict(s);
        if (cli(net, p).is_entity) out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end());
    return out;
}

DisintegrationReport verify_disintegration_theorem(const BayesNet& net, const Pattern& trajectory, int threads,
                                                   bool skip_filter) {
    DisintegrationReport rep;
    rep.trajectory = trajectory;
    auto h = disintegration_hierarchy(net, trajectory, threads);
    auto rf = refinement_free(h, skip_filter);
    for (const auto& l : h.levels) rep.partitions += l.partitions.size();

    // (a) every non-singleton block of a refinement-free partition has positive CLI.
    std::map<Pattern, bool> block_ok;
    for (const auto& level : rf.levels)
        for (const auto& pi : level.partitions)
            for (auto m : pi.block_masks())
                if (std::popcount(m) >= 2) block_ok.emplace(trajectory.restrict(m), false);
    std::vector<Pattern> blocks;
    for (auto& [p, ok] : block_ok) blocks.push_back(p);
    std::vector<char> pos(blocks.size());
    parallel_for(blocks.size(), threads, [&](std::size_t i) { pos[i] = cli(net, blocks[i]).is_entity; });
    rep.blocks_checked = blocks.size();
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (!pos[i]) rep.failures.push_back("block " + render_pattern(net, blocks[i]) + " has non-positive CLI");

    // (b) every entity x_A of the trajectory appears through pi^A = {A} plus singletons at its level.
    auto ents = brute_force_entities(net, trajectory);
    rep.entities_checked = ents.size();
    for (const auto& e : ents) {
        std::vector<std::vector<int>> blocks_a{e.nodes()};
        for (int n : trajectory.nodes())
            if (!e.contains(n)) blocks_a.push_back({n});
        auto pia = SetPartition::from_blocks(blocks_a);
        bool present = false;
        for (std::size_t l = 0; l < h.levels.size() && !present; ++l) {
            const auto& hp = h.levels[l].partitions;
            if (!std::binary_search(hp.begin(), hp.end(), pia)) continue;
            const auto& rp = rf.levels[l].partitions;
            present = std::find(rp.begin(), rp.end(), pia) != rp.end();
            if (!present) break;
        }
        if (!present)
            rep.failures.push_back("entity " + render_pattern(net, e) + " lacks its partition in the refinement-free hierarchy");
    }
    return rep;
}

}  // namespace stpi
