#pragma once

#include "popsim/protocol.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace popsim {

enum class Phase { init, computation };

/// Agent state of the timer-based leader election protocol, plus the
/// has_seen_timer bit of the improved variant.
struct LeaderTimerState {
    bool leader = false;
    bool timer = false;
    bool timer_set = false;
    bool timer_reset = false;
    int timer_count = 0;
    Phase phase = Phase::init;
    std::optional<bool> has_seen_timer;

    /// Encoding invariants; combinations failing them are not states.
    bool valid() const noexcept;
    /// e.g. L1_T0_TS1_TR0_C3, with _P1 for the computation phase and _H0/_H1
    /// for the improved variant.
    std::string name() const;
    static std::optional<LeaderTimerState> decode(std::string_view name);

    static LeaderTimerState blank() { return {}; }
    static LeaderTimerState initial_leader() { return {true, false, false, false, 0, Phase::init, std::nullopt}; }

    friend bool operator==(const LeaderTimerState&, const LeaderTimerState&) = default;
};

/// Timer-based leader election with threshold k: a leader that meets a
/// timer k times in a row enters the computation phase.
ProtocolSpec protocol_1(int k);

/// protocol_1 with a has_seen_timer bit; an agent that has seen a timer
/// demotes any leader that has not.
ProtocolSpec improved_protocol_1(int k);

/// protocol_1 without a computation phase; timer_count saturates at cap.
ProtocolSpec unbounded_counter_variant(int cap);

/// Chain s_0..s_{m-1} with delta(s_i, s_i) = (s_{i+1}, s_i).
ProtocolSpec ladder_protocol(int m);

/// L L -> L F.
ProtocolSpec pairwise_elimination();

/// Resolve "builtin:<name>?<key>=<value>&..." (or a bare builtin name).
/// Known names: protocol1 (k), improved1 (k), unbounded (cap), ladder (m),
/// elim. Throws Error for unknown names or bad parameters.
ProtocolSpec builtin_protocol(std::string_view address);

/// Builtin address, or a path to a protocol file.
ProtocolSpec load_protocol(std::string_view address);

bool is_builtin_address(std::string_view address) noexcept;

struct BuiltinInfo {
    std::string name;
    std::string example;
    std::string summary;
};
std::vector<BuiltinInfo> builtin_catalog();

/// States whose output is 1; every built-in uses the output as leader flag.
std::vector<StateId> leader_states(const ProtocolSpec& protocol);

/// States of the computation phase (timer-based protocols only).
std::vector<StateId> computation_states(const ProtocolSpec& protocol);

/// timer_count per state (0 for states that carry none).
std::vector<std::int64_t> timer_count_levels(const ProtocolSpec& protocol);

} // namespace popsim
