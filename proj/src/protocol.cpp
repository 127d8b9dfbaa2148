#include "popsim/protocol.hpp"

#include "popsim/error.hpp"

#include <numeric>

namespace popsim {

ProtocolSpec::ProtocolSpec(std::vector<std::string> state_names, ProtocolMetadata metadata)
    : names_(std::move(state_names)), outputs_(names_.size(), 0), metadata_(std::move(metadata)) {
    if (names_.empty())
        throw Error("a protocol needs at least one state");
    for (std::size_t i = 0; i < names_.size(); ++i) {
        auto [it, inserted] = index_.emplace(names_[i], state(i));
        if (!inserted)
            throw Error("duplicate state name '" + names_[i] + "'");
    }
    table_.reserve(names_.size() * names_.size());
    for (std::size_t a = 0; a < names_.size(); ++a)
        for (std::size_t b = 0; b < names_.size(); ++b)
            table_.emplace_back(state(a), state(b));
}

std::optional<StateId> ProtocolSpec::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

StateId ProtocolSpec::at(std::string_view name) const {
    if (auto s = find(name))
        return *s;
    throw Error("unknown state '" + std::string(name) + "'");
}

void ProtocolSpec::set_output(StateId s, int value) {
    if (value != 0 && value != 1)
        throw Error("output must be 0 or 1");
    outputs_.at(s.index) = value;
}

void ProtocolSpec::add_input(std::string symbol, StateId s) {
    if (s.index >= names_.size())
        throw Error("input maps to a state outside Q");
    for (const auto& [sym, _] : inputs_)
        if (sym == symbol)
            throw Error("duplicate input symbol '" + symbol + "'");
    inputs_.emplace_back(std::move(symbol), s);
}

StateId ProtocolSpec::initial_state() const noexcept {
    return inputs_.empty() ? StateId{0} : inputs_.front().second;
}

void ProtocolSpec::set_delta(StateId a, StateId b, StatePair result) {
    const auto q = names_.size();
    if (a.index >= q || b.index >= q || result.first.index >= q || result.second.index >= q)
        throw Error("transition references a state outside Q");
    table_[a.index * q + b.index] = result;
}

bool ProtocolSpec::is_identity(StateId a, StateId b) const noexcept {
    auto [c, d] = delta(a, b);
    return c == a && d == b;
}

Configuration::Configuration(std::vector<std::uint64_t> counts)
    : counts_(std::move(counts)), n_(std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0})) {}

Configuration Configuration::uniform(std::size_t num_states, StateId s, std::uint64_t n) {
    auto c = empty(num_states);
    c.add(s, n);
    return c;
}

void Configuration::add(StateId s, std::uint64_t k) {
    counts_.at(s.index) += k;
    n_ += k;
}

void Configuration::remove(StateId s, std::uint64_t k) {
    auto& c = counts_.at(s.index);
    if (c < k)
        throw InvalidDrawError("state count would become negative");
    c -= k;
    n_ -= k;
}

AgentPopulation::AgentPopulation(std::size_t num_states, std::vector<StateId> agent_states)
    : agents_(std::move(agent_states)), config_(Configuration::empty(num_states)) {
    for (auto s : agents_)
        config_.add(s);
}

AgentPopulation AgentPopulation::from_configuration(const Configuration& config) {
    std::vector<StateId> agents;
    agents.reserve(config.n());
    for (std::size_t s = 0; s < config.num_states(); ++s)
        agents.insert(agents.end(), config.counts()[s], StateId{static_cast<std::uint32_t>(s)});
    return AgentPopulation(config.num_states(), std::move(agents));
}

void AgentPopulation::set(std::size_t agent, StateId s) {
    config_.remove(agents_.at(agent));
    config_.add(s);
    agents_[agent] = s;
}

bool can_draw(const Configuration& config, StateId a, StateId b) noexcept {
    if (a.index >= config.num_states() || b.index >= config.num_states())
        return false;
    if (a == b)
        return config.counts()[a.index] >= 2;
    return config.counts()[a.index] >= 1 && config.counts()[b.index] >= 1;
}

Configuration apply_rule(const ProtocolSpec& protocol, const Configuration& config, StateId a, StateId b) {
    if (!can_draw(config, a, b))
        throw InvalidDrawError("cannot draw an ordered pair (" + protocol.name(a) + ", " + protocol.name(b) +
                               ") from " + to_string(protocol, config));
    auto [c, d] = protocol.delta(a, b);
    Configuration next = config;
    next.remove(a);
    next.remove(b);
    next.add(c);
    next.add(d);
    return next;
}

std::set<Configuration> successors(const ProtocolSpec& protocol, const Configuration& config) {
    std::set<Configuration> out;
    const auto q = protocol.num_states();
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = 0; b < q; ++b)
            if (can_draw(config, protocol.state(a), protocol.state(b)))
                out.insert(apply_rule(protocol, config, protocol.state(a), protocol.state(b)));
    return out;
}

std::optional<int> consensus_value(const ProtocolSpec& protocol, const Configuration& config) {
    std::optional<int> value;
    for (std::size_t s = 0; s < config.num_states(); ++s) {
        if (config.counts()[s] == 0)
            continue;
        int o = protocol.output(protocol.state(s));
        if (value && *value != o)
            return std::nullopt;
        value = o;
    }
    return value;
}

bool is_consensus(const ProtocolSpec& protocol, const Configuration& config) {
    return consensus_value(protocol, config).has_value();
}

std::string to_string(const ProtocolSpec& protocol, const Configuration& config) {
    std::string out = "{";
    bool first = true;
    for (std::size_t s = 0; s < config.num_states(); ++s) {
        if (config.counts()[s] == 0)
            continue;
        if (!first)
            out += ", ";
        first = false;
        out += protocol.name(protocol.state(s)) + ":" + std::to_string(config.counts()[s]);
    }
    return out + "}";
}

} // namespace popsim
