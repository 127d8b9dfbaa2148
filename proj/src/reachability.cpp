#include "popsim/reachability.hpp"

#include "popsim/error.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace popsim {

std::vector<LayerWitness> LayerStructure::added_at(std::size_t layer) const {
    std::vector<LayerWitness> out;
    for (const auto& w : witnesses)
        if (w.layer == layer)
            out.push_back(w);
    return out;
}

LayerStructure compute_layers(const ProtocolSpec& protocol, StateId start) {
    const auto q = protocol.num_states();
    if (start.index >= q)
        throw Error("start state outside Q");

    LayerStructure result;
    result.start = start;
    std::vector<bool> member(q, false);
    member[start.index] = true;
    result.layers.push_back({start});

    while (true) {
        const auto& current = result.layers.back();
        const auto next_layer = result.layers.size();
        std::vector<bool> next = member;
        std::vector<LayerWitness> found;
        for (auto a : current) {
            for (auto b : current) {
                auto [c, d] = protocol.delta(a, b);
                for (int position = 0; position < 2; ++position) {
                    auto s = position == 0 ? c : d;
                    if (!next[s.index]) {
                        next[s.index] = true;
                        found.push_back({s, a, b, position, next_layer});
                    }
                }
            }
        }
        if (found.empty())
            break;
        member = std::move(next);
        std::vector<StateId> layer;
        for (std::size_t s = 0; s < q; ++s)
            if (member[s])
                layer.push_back(protocol.state(s));
        result.layers.push_back(std::move(layer));
        result.witnesses.insert(result.witnesses.end(), found.begin(), found.end());
    }
    return result;
}

std::vector<StateId> reachable_states(const ProtocolSpec& protocol, StateId start) {
    return compute_layers(protocol, start).reachable();
}

ConsensusVerdict is_stable_consensus(const ProtocolSpec& protocol, const Configuration& config,
                                     std::size_t max_configs) {
    auto value = consensus_value(protocol, config);
    if (!value)
        return UnstableConsensus{{config}};

    std::map<Configuration, const Configuration*> parent;
    std::deque<const Configuration*> frontier;
    auto [root, _] = parent.emplace(config, nullptr);
    frontier.push_back(&root->first);

    while (!frontier.empty()) {
        const Configuration* current = frontier.front();
        frontier.pop_front();
        for (auto& next : successors(protocol, *current)) {
            if (parent.contains(next))
                continue;
            if (parent.size() >= max_configs)
                return ConsensusLimitExceeded{parent.size()};
            auto [it, inserted] = parent.emplace(next, current);
            if (consensus_value(protocol, next) != value) {
                std::vector<Configuration> path;
                for (const Configuration* c = &it->first; c != nullptr; c = parent.at(*c))
                    path.push_back(*c);
                std::reverse(path.begin(), path.end());
                return UnstableConsensus{std::move(path)};
            }
            frontier.push_back(&it->first);
        }
    }
    return StableConsensus{};
}

} // namespace popsim
