#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace popsim {

/// Dense index of a protocol state. Names live in the owning ProtocolSpec.
struct StateId {
    std::uint32_t index = 0;

    friend constexpr auto operator<=>(StateId, StateId) = default;
};

using StatePair = std::pair<StateId, StateId>;

struct ProtocolMetadata {
    std::string name;
    std::map<std::string, std::string> params;

    friend bool operator==(const ProtocolMetadata&, const ProtocolMetadata&) = default;
};

/// A population protocol (Q, Sigma, I, O, delta) with a total transition table.
///
/// Pairs are ordered: the first element is the initiator. Entries that were
/// never set hold the identity transition.
class ProtocolSpec {
public:
    explicit ProtocolSpec(std::vector<std::string> state_names, ProtocolMetadata metadata = {});

    std::size_t num_states() const noexcept { return names_.size(); }
    const std::string& name(StateId s) const { return names_.at(s.index); }
    const std::vector<std::string>& state_names() const noexcept { return names_; }
    std::optional<StateId> find(std::string_view name) const;
    /// Like find() but throws Error for unknown names.
    StateId at(std::string_view name) const;

    const ProtocolMetadata& metadata() const noexcept { return metadata_; }
    ProtocolMetadata& metadata() noexcept { return metadata_; }

    int output(StateId s) const { return outputs_.at(s.index); }
    void set_output(StateId s, int value);
    const std::vector<int>& outputs() const noexcept { return outputs_; }

    /// Input alphabet in declaration order.
    const std::vector<std::pair<std::string, StateId>>& inputs() const noexcept { return inputs_; }
    void add_input(std::string symbol, StateId s);
    /// The state every agent starts in: I of the first input symbol, or state 0.
    StateId initial_state() const noexcept;

    StatePair delta(StateId a, StateId b) const noexcept { return table_[a.index * names_.size() + b.index]; }
    void set_delta(StateId a, StateId b, StatePair result);
    bool is_identity(StateId a, StateId b) const noexcept;

    StateId state(std::size_t index) const { return StateId{static_cast<std::uint32_t>(index)}; }

    friend bool operator==(const ProtocolSpec& x, const ProtocolSpec& y) {
        return x.names_ == y.names_ && x.outputs_ == y.outputs_ && x.inputs_ == y.inputs_ &&
               x.table_ == y.table_ && x.metadata_ == y.metadata_;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, StateId> index_;
    std::vector<int> outputs_;
    std::vector<std::pair<std::string, StateId>> inputs_;
    std::vector<StatePair> table_;
    ProtocolMetadata metadata_;
};

/// Anonymous population snapshot: number of agents per state.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<std::uint64_t> counts);

    /// No agents over num_states states.
    static Configuration empty(std::size_t num_states) { return Configuration(std::vector<std::uint64_t>(num_states, 0)); }
    /// n agents, all in state s.
    static Configuration uniform(std::size_t num_states, StateId s, std::uint64_t n);

    std::uint64_t operator[](StateId s) const { return counts_.at(s.index); }
    std::uint64_t n() const noexcept { return n_; }
    std::size_t num_states() const noexcept { return counts_.size(); }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }

    void add(StateId s, std::uint64_t k = 1);
    void remove(StateId s, std::uint64_t k = 1);

    friend bool operator==(const Configuration& x, const Configuration& y) { return x.counts_ == y.counts_; }
    friend auto operator<=>(const Configuration& x, const Configuration& y) { return x.counts_ <=> y.counts_; }

private:
    std::vector<std::uint64_t> counts_;
    std::uint64_t n_ = 0;
};

/// Agent-indexed population; agent identity is needed for visitor audits.
class AgentPopulation {
public:
    AgentPopulation() = default;
    AgentPopulation(std::size_t num_states, std::vector<StateId> agent_states);
    /// Agents laid out in state-index order.
    static AgentPopulation from_configuration(const Configuration& config);

    std::size_t n() const noexcept { return agents_.size(); }
    StateId operator[](std::size_t agent) const { return agents_[agent]; }
    const std::vector<StateId>& agent_states() const noexcept { return agents_; }
    const Configuration& configuration() const noexcept { return config_; }

    void set(std::size_t agent, StateId s);

private:
    std::vector<StateId> agents_;
    Configuration config_;
};

/// Fire delta on one initiator in state a and one responder in state b.
/// Throws InvalidDrawError when the counts cannot supply two distinct agents.
Configuration apply_rule(const ProtocolSpec& protocol, const Configuration& config, StateId a, StateId b);

/// True when config holds two distinct agents in states (a, b).
bool can_draw(const Configuration& config, StateId a, StateId b) noexcept;

/// Every configuration reachable in exactly one interaction.
std::set<Configuration> successors(const ProtocolSpec& protocol, const Configuration& config);

/// All non-empty states share one output value.
bool is_consensus(const ProtocolSpec& protocol, const Configuration& config);

/// The common output of a consensus configuration, or nullopt.
std::optional<int> consensus_value(const ProtocolSpec& protocol, const Configuration& config);

std::string to_string(const ProtocolSpec& protocol, const Configuration& config);

} // namespace popsim
