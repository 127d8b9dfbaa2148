#pragma once

#include "popsim/protocol.hpp"

#include <cstddef>
#include <variant>
#include <vector>

namespace popsim {

/// How a state first entered the layer chain: delta(initiator, responder)
/// places it at `position` (0 = initiator's new state, 1 = responder's).
struct LayerWitness {
    StateId state;
    StateId initiator;
    StateId responder;
    int position = 0;
    /// Index i + 1 of the layer F_{i+1} that first contains `state`.
    std::size_t layer = 0;

    friend bool operator==(const LayerWitness&, const LayerWitness&) = default;
};

/// The chain F_0 = {s_0} subset F_1 subset ... up to its fixpoint.
struct LayerStructure {
    StateId start;
    /// layers[i] is F_i as a sorted list of states.
    std::vector<std::vector<StateId>> layers;
    /// One witness per state outside F_0, in discovery order.
    std::vector<LayerWitness> witnesses;

    std::size_t l_max() const noexcept { return layers.size() - 1; }
    const std::vector<StateId>& reachable() const noexcept { return layers.back(); }
    /// Witnesses of the states in F_{i} \ F_{i-1}, i >= 1.
    std::vector<LayerWitness> added_at(std::size_t layer) const;
};

/// Fixpoint of F_{i+1} = F_i + {outputs of delta(p, q) : p, q in F_i}.
/// Witnesses are the first producing pair in (initiator, responder,
/// position) order.
LayerStructure compute_layers(const ProtocolSpec& protocol, StateId start);

/// Union of the layers, sorted by index.
std::vector<StateId> reachable_states(const ProtocolSpec& protocol, StateId start);

struct StableConsensus {};
struct UnstableConsensus {
    /// Shortest path from the checked configuration to one whose outputs
    /// differ from its own. A single element means the configuration is not
    /// a consensus at all.
    std::vector<Configuration> path;
};
struct ConsensusLimitExceeded {
    std::size_t explored = 0;
};

using ConsensusVerdict = std::variant<StableConsensus, UnstableConsensus, ConsensusLimitExceeded>;

/// Explicit-state BFS over count vectors (Def. of stable consensus).
ConsensusVerdict is_stable_consensus(const ProtocolSpec& protocol, const Configuration& config,
                                     std::size_t max_configs = 1'000'000);

} // namespace popsim
