#pragma once

#include "popsim/protocol.hpp"
#include "popsim/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace popsim {

enum class Mode { counts, agents };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

/// Ordered pair of distinct agent indices.
struct AgentDraw {
    std::size_t initiator;
    std::size_t responder;
};

/// ChooseNextPair over agent indices: two independent uniform draws from
/// [0, n); equal draws are a no-op (nullopt). Throws EmptyPopulationError
/// for n = 0.
std::optional<AgentDraw> choose_next_pair(Rng& rng, std::size_t n);

/// ChooseNextPair over a count vector. The initiator state is drawn with
/// probability counts[s]/n; with probability 1/n the call is a no-op;
/// otherwise the responder state is drawn from the counts with one initiator
/// removed. Consumes the same two draws as the agent form, and the induced
/// ordered state-pair distribution matches it exactly.
std::optional<StatePair> choose_next_pair(Rng& rng, const Configuration& config);

/// Fenwick tree over state counts; maps a uniform agent rank in [0, n) to
/// its state in O(log |Q|).
class CountIndex {
public:
    explicit CountIndex(const Configuration& config);

    void add(StateId s, std::int64_t delta);
    std::uint64_t count(StateId s) const { return counts_[s.index]; }
    std::uint64_t n() const noexcept { return n_; }
    /// Number of agents in states with index below s.
    std::uint64_t prefix(StateId s) const;
    /// State of the agent with rank r when agents are sorted by state index.
    StateId locate(std::uint64_t r) const;

    /// Same sampling rule as choose_next_pair(Rng&, const Configuration&).
    std::optional<StatePair> draw(Rng& rng) const;

private:
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> tree_;
    std::uint64_t n_ = 0;
    std::size_t top_bit_ = 1;
};

/// One disjunct of a stop rule.
struct StopClause {
    struct FixedCalls {
        std::uint64_t calls;
    };
    struct FixedInteractions {
        std::uint64_t interactions;
    };
    /// Number of agents in `members` equals `target`.
    struct ClassCount {
        std::vector<StateId> members;
        std::uint64_t target;
    };
    /// Any of `states` is occupied.
    struct StateEntered {
        std::vector<StateId> states;
    };
    struct Predicate {
        std::function<bool(const Configuration&)> test;
    };

    std::string label;
    std::variant<FixedCalls, FixedInteractions, ClassCount, StateEntered, Predicate> rule;
};

/// Disjunction of clauses; the run stops when any clause holds. The label of
/// the first satisfied clause (in declaration order) becomes the stop reason.
struct StopCondition {
    std::vector<StopClause> clauses;

    static StopCondition fixed_calls(std::uint64_t calls);
    static StopCondition fixed_interactions(std::uint64_t interactions);
    static StopCondition class_count(std::string label, std::vector<StateId> members, std::uint64_t target);
    static StopCondition first_state_entered(std::string label, std::vector<StateId> states);
    static StopCondition predicate(std::string label, std::function<bool(const Configuration&)> test);

    /// Disjunction.
    StopCondition operator|(const StopCondition& other) const;
};

struct ProbeSpec {
    std::string name;
    /// Sorted call indices at which the metric is sampled.
    std::vector<std::uint64_t> ticks;
    std::function<double(const Configuration&)> metric;
};

std::vector<std::uint64_t> linear_ticks(std::uint64_t step, std::uint64_t last);
std::vector<std::uint64_t> geometric_ticks(std::uint64_t first, double ratio, std::uint64_t last);

struct ProbeRecord {
    std::string name;
    std::uint64_t call;
    double value;
};

struct InteractionEvent {
    std::uint64_t call = 0;
    bool noop = true;
    StateId initiator{}, responder{};
    StateId initiator_after{}, responder_after{};
};

/// One line of the optional event trace:
/// call,noop,initiator,responder,initiator_after,responder_after
std::string format_event(const ProtocolSpec& protocol, const InteractionEvent& event);

struct RunConfig {
    std::shared_ptr<const ProtocolSpec> protocol;
    std::variant<Configuration, AgentPopulation> initial;
    Mode mode = Mode::counts;
    std::uint64_t seed = 0;
    StopCondition stop;
    std::vector<ProbeSpec> probes;
    /// Defaults to 64 n^2 calls.
    std::optional<std::uint64_t> max_calls;
    /// States whose distinct visitors are recorded (agents mode only).
    std::vector<StateId> audited;
    /// Optional per-state level; the run reports the largest level of any
    /// state ever occupied.
    std::vector<std::int64_t> state_level;
    /// The run reports the first call at which all of these states are
    /// simultaneously occupied.
    std::vector<StateId> coverage;
    std::function<void(const InteractionEvent&)> on_event;
};

struct RunResult {
    Configuration final_config;
    std::uint64_t calls_made = 0;
    std::uint64_t interactions_made = 0;
    std::string stop_reason;
    std::vector<ProbeRecord> probes;
    std::vector<std::pair<StateId, std::uint64_t>> visitors;
    std::optional<std::int64_t> max_level;
    std::optional<std::uint64_t> first_full_coverage_call;

    /// Canonical text rendering; equal results render byte-identically.
    std::string serialize(const ProtocolSpec& protocol) const;
};

/// An execution in progress. run() is `while (!stopped()) step();`.
class Simulation {
public:
    explicit Simulation(RunConfig config);

    bool stopped() const noexcept { return !stop_reason_.empty(); }
    /// One ChooseNextPair call and, unless it is a no-op, one transition.
    InteractionEvent step();

    const Configuration& configuration() const noexcept { return config_; }
    std::uint64_t calls_made() const noexcept { return calls_; }
    std::uint64_t interactions_made() const noexcept { return interactions_; }
    /// Distinct agents seen so far in an audited state.
    std::uint64_t visitors(StateId s) const;

    RunResult result() const;

private:
    void adjust(StateId s, int delta);
    void enter(std::size_t agent, StateId s);
    void check_stop();
    void fire_probes();

    RunConfig cfg_;
    Rng rng_;
    Configuration config_;
    std::optional<CountIndex> index_;
    std::vector<StateId> agents_;
    std::uint64_t calls_ = 0;
    std::uint64_t interactions_ = 0;
    std::uint64_t max_calls_ = 0;
    std::string stop_reason_;

    struct ClassTracker {
        std::size_t clause;
        std::vector<char> member;
        std::uint64_t count = 0;
        std::uint64_t target = 0;
    };
    struct EnterTracker {
        std::size_t clause;
        std::vector<char> member;
        std::uint64_t occupied = 0;
    };
    std::vector<ClassTracker> classes_;
    std::vector<EnterTracker> entered_;

    std::vector<int> audit_slot_;
    std::vector<std::vector<char>> audit_seen_;
    std::vector<std::uint64_t> audit_count_;

    std::optional<std::int64_t> max_level_;
    std::vector<char> coverage_member_;
    std::uint64_t coverage_occupied_ = 0;
    std::uint64_t coverage_size_ = 0;
    std::optional<std::uint64_t> coverage_call_;

    std::vector<std::size_t> probe_cursor_;
    std::vector<ProbeRecord> probe_records_;
};

RunResult run(RunConfig config);

/// Distinct agents that ever occupied `s`. Throws MissingAuditError when the
/// run did not audit `s`.
std::uint64_t distinct_visitors(const RunResult& result, StateId s);

} // namespace popsim
