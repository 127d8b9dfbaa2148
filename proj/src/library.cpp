#include "popsim/library.hpp"

#include "popsim/dsl.hpp"
#include "popsim/error.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace popsim {

bool LeaderTimerState::valid() const noexcept {
    if (leader && timer)
        return false;
    if (!leader && (timer_set || timer_reset || timer_count != 0 || phase != Phase::init))
        return false;
    if (timer_count < 0 || (timer_count > 0 && !timer_set))
        return false;
    if (timer_reset && timer_count != 0)
        return false;
    if (phase == Phase::computation && (!timer_set || timer_reset))
        return false;
    return true;
}

std::string LeaderTimerState::name() const {
    std::string out = "L" + std::to_string(leader) + "_T" + std::to_string(timer) + "_TS" +
                      std::to_string(timer_set) + "_TR" + std::to_string(timer_reset) + "_C" +
                      std::to_string(timer_count);
    if (phase == Phase::computation)
        out += "_P1";
    if (has_seen_timer)
        out += *has_seen_timer ? "_H1" : "_H0";
    return out;
}

std::optional<LeaderTimerState> LeaderTimerState::decode(std::string_view name) {
    LeaderTimerState st;
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos <= name.size()) {
        auto end = name.find('_', pos);
        if (end == std::string_view::npos)
            end = name.size();
        fields.push_back(name.substr(pos, end - pos));
        pos = end + 1;
    }
    if (fields.size() < 5)
        return std::nullopt;
    auto field = [](std::string_view f, std::string_view prefix) -> std::optional<int> {
        if (f.substr(0, prefix.size()) != prefix)
            return std::nullopt;
        int value = 0;
        auto digits = f.substr(prefix.size());
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty())
            return std::nullopt;
        return value;
    };
    auto bit = [&](std::string_view f, std::string_view prefix) -> std::optional<bool> {
        auto v = field(f, prefix);
        if (!v || (*v != 0 && *v != 1))
            return std::nullopt;
        return *v == 1;
    };
    auto l = bit(fields[0], "L"), t = bit(fields[1], "T"), ts = bit(fields[2], "TS"), tr = bit(fields[3], "TR");
    auto c = field(fields[4], "C");
    if (!l || !t || !ts || !tr || !c)
        return std::nullopt;
    st.leader = *l;
    st.timer = *t;
    st.timer_set = *ts;
    st.timer_reset = *tr;
    st.timer_count = *c;
    for (std::size_t i = 5; i < fields.size(); ++i) {
        if (fields[i] == "P1" && st.phase == Phase::init && !st.has_seen_timer) {
            st.phase = Phase::computation;
        } else if (auto h = bit(fields[i], "H"); h && !st.has_seen_timer) {
            st.has_seen_timer = *h;
        } else {
            return std::nullopt;
        }
    }
    if (!st.valid() || st.name() != name)
        return std::nullopt;
    return st;
}

namespace {

using Pair = std::pair<LeaderTimerState, LeaderTimerState>;

LeaderTimerState make_leader(bool ts, bool tr, int tc, Phase phase = Phase::init) {
    return {true, false, ts, tr, tc, phase, std::nullopt};
}

LeaderTimerState timer_agent() {
    return {false, true, false, false, 0, Phase::init, std::nullopt};
}

/// Counter behavior of rule 2: with a computation phase, reaching the
/// threshold enters it; without one, the counter saturates.
struct CounterRule {
    int limit;
    bool computation_phase;
};

bool is_blank(const LeaderTimerState& s) {
    return !s.leader && !s.timer;
}

/// The one-sided rules 1, 2, 5, 6, 7 with x in the leading position.
std::optional<Pair> leader_side_rule(const LeaderTimerState& x, const LeaderTimerState& y, CounterRule counter) {
    if (!x.leader)
        return std::nullopt;
    const bool counting = x.timer_set && !x.timer_reset && x.phase == Phase::init;
    // 1: mark a blank agent as timer
    if (!x.timer_set && !x.timer_reset && is_blank(y))
        return Pair{make_leader(true, false, 0), timer_agent()};
    // 2: consecutive timer meeting
    if (counting && y.timer) {
        auto next = x;
        if (x.timer_count + 1 >= counter.limit) {
            next.timer_count = counter.limit;
            if (counter.computation_phase)
                next.phase = Phase::computation;
        } else {
            next.timer_count = x.timer_count + 1;
        }
        return Pair{next, y};
    }
    // 5: a resetting leader turns a timer back into a blank agent
    if (x.timer_reset && y.timer)
        return Pair{make_leader(x.timer_set, false, 0), LeaderTimerState::blank()};
    // 6: a resetting leader resets the counter of its partner
    if (counting && y.leader && y.timer_reset)
        return Pair{make_leader(true, false, 0), y};
    // 7: meeting a blank agent resets the counter
    if (counting && is_blank(y))
        return Pair{make_leader(true, false, 0), y};
    return std::nullopt;
}

Pair base_delta(const LeaderTimerState& a, const LeaderTimerState& b, CounterRule counter) {
    // 3 and 4 are initiator-ordered: the initiator wins.
    if (a.leader && b.leader && !a.timer_reset && !b.timer_reset) {
        if (!b.timer_set) {
            auto loser = a.timer_set ? LeaderTimerState::blank() : timer_agent();
            return {make_leader(true, false, 0), loser};
        }
        return {make_leader(a.timer_set, true, 0), LeaderTimerState::blank()};
    }
    if (auto r = leader_side_rule(a, b, counter))
        return *r;
    if (auto r = leader_side_rule(b, a, counter))
        return {r->second, r->first};
    return {a, b};
}

LeaderTimerState strip(LeaderTimerState s) {
    s.has_seen_timer.reset();
    return s;
}

LeaderTimerState with_seen(LeaderTimerState s, bool seen) {
    s.has_seen_timer = seen;
    return s;
}

Pair improved_delta(const LeaderTimerState& a, const LeaderTimerState& b, CounterRule counter) {
    const bool a_seen = a.has_seen_timer.value_or(false);
    const bool b_seen = b.has_seen_timer.value_or(false);
    if (a_seen && b.leader && !b_seen)
        return {a, with_seen(LeaderTimerState::blank(), false)};
    if (b_seen && a.leader && !a_seen)
        return {with_seen(LeaderTimerState::blank(), false), b};
    auto [c, d] = base_delta(strip(a), strip(b), counter);
    return {with_seen(c, a_seen || b.timer), with_seen(d, b_seen || a.timer)};
}

std::vector<LeaderTimerState> leader_timer_states(int counter_limit, bool computation_phase) {
    std::vector<LeaderTimerState> states{LeaderTimerState::blank(), timer_agent()};
    const int last_init = computation_phase ? counter_limit - 1 : counter_limit;
    for (bool ts : {false, true})
        for (bool tr : {false, true})
            for (int tc = 0; tc <= last_init; ++tc)
                if (auto s = make_leader(ts, tr, tc); s.valid())
                    states.push_back(s);
    if (computation_phase)
        states.push_back(make_leader(true, false, counter_limit, Phase::computation));
    return states;
}

ProtocolSpec build(const std::vector<LeaderTimerState>& states, ProtocolMetadata metadata,
                   const std::function<Pair(const LeaderTimerState&, const LeaderTimerState&)>& delta) {
    std::vector<std::string> names;
    names.reserve(states.size());
    for (const auto& s : states)
        names.push_back(s.name());
    ProtocolSpec spec(names, std::move(metadata));
    for (std::size_t i = 0; i < states.size(); ++i)
        spec.set_output(spec.state(i), states[i].leader ? 1 : 0);
    auto initial = states.front().has_seen_timer ? with_seen(LeaderTimerState::initial_leader(), false)
                                                 : LeaderTimerState::initial_leader();
    spec.add_input("x", spec.at(initial.name()));
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = 0; j < states.size(); ++j) {
            auto [c, d] = delta(states[i], states[j]);
            spec.set_delta(spec.state(i), spec.state(j), {spec.at(c.name()), spec.at(d.name())});
        }
    }
    return spec;
}

void require_positive(int value, const char* what) {
    if (value < 1)
        throw Error(std::string(what) + " must be a positive integer");
}

} // namespace

ProtocolSpec protocol_1(int k) {
    require_positive(k, "k");
    CounterRule counter{k, true};
    return build(leader_timer_states(k, true), {"protocol1", {{"k", std::to_string(k)}}},
                 [counter](const auto& a, const auto& b) { return base_delta(a, b, counter); });
}

ProtocolSpec improved_protocol_1(int k) {
    require_positive(k, "k");
    CounterRule counter{k, true};
    std::vector<LeaderTimerState> states;
    for (const auto& s : leader_timer_states(k, true))
        for (bool seen : {false, true})
            states.push_back(with_seen(s, seen));
    return build(states, {"improved1", {{"k", std::to_string(k)}}},
                 [counter](const auto& a, const auto& b) { return improved_delta(a, b, counter); });
}

ProtocolSpec unbounded_counter_variant(int cap) {
    require_positive(cap, "cap");
    CounterRule counter{cap, false};
    return build(leader_timer_states(cap, false), {"unbounded", {{"cap", std::to_string(cap)}}},
                 [counter](const auto& a, const auto& b) { return base_delta(a, b, counter); });
}

ProtocolSpec ladder_protocol(int m) {
    require_positive(m, "m");
    std::vector<std::string> names;
    for (int i = 0; i < m; ++i)
        names.push_back("s" + std::to_string(i));
    ProtocolSpec spec(names, {"ladder", {{"m", std::to_string(m)}}});
    for (int i = 0; i < m; ++i)
        spec.set_output(spec.state(i), 1);
    spec.add_input("x", spec.state(0));
    for (int i = 0; i + 1 < m; ++i)
        spec.set_delta(spec.state(i), spec.state(i), {spec.state(i + 1), spec.state(i)});
    return spec;
}

ProtocolSpec pairwise_elimination() {
    ProtocolSpec spec({"L", "F"}, {"elim", {}});
    auto l = spec.at("L"), f = spec.at("F");
    spec.set_output(l, 1);
    spec.set_output(f, 0);
    spec.add_input("x", l);
    spec.set_delta(l, l, {l, f});
    return spec;
}

bool is_builtin_address(std::string_view address) noexcept {
    return address.rfind("builtin:", 0) == 0;
}

namespace {

int int_param(const std::map<std::string, std::string>& params, const std::string& key, int fallback) {
    auto it = params.find(key);
    if (it == params.end())
        return fallback;
    int value = 0;
    const auto& text = it->second;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error("parameter " + key + " must be an integer, got '" + text + "'");
    return value;
}

} // namespace

ProtocolSpec builtin_protocol(std::string_view address) {
    if (is_builtin_address(address))
        address.remove_prefix(8);
    auto q = address.find('?');
    std::string name(address.substr(0, q));
    std::map<std::string, std::string> params;
    if (q != std::string_view::npos) {
        std::string_view rest = address.substr(q + 1);
        while (!rest.empty()) {
            auto amp = rest.find('&');
            auto item = rest.substr(0, amp);
            auto eq = item.find('=');
            if (eq == std::string_view::npos || eq == 0)
                throw Error("malformed builtin parameter '" + std::string(item) + "'");
            params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
            rest = amp == std::string_view::npos ? std::string_view{} : rest.substr(amp + 1);
        }
    }
    auto reject_extra = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [key, _] : params) {
            bool ok = false;
            for (auto a : allowed)
                ok = ok || key == a;
            if (!ok)
                throw Error("builtin '" + name + "' has no parameter '" + key + "'");
        }
    };
    if (name == "protocol1") {
        reject_extra({"k"});
        return protocol_1(int_param(params, "k", 4));
    }
    if (name == "improved1") {
        reject_extra({"k"});
        return improved_protocol_1(int_param(params, "k", 4));
    }
    if (name == "unbounded") {
        reject_extra({"cap"});
        return unbounded_counter_variant(int_param(params, "cap", 64));
    }
    if (name == "ladder") {
        reject_extra({"m"});
        return ladder_protocol(int_param(params, "m", 4));
    }
    if (name == "elim") {
        reject_extra({});
        return pairwise_elimination();
    }
    throw Error("unknown builtin protocol '" + name + "'");
}

ProtocolSpec load_protocol(std::string_view address) {
    if (is_builtin_address(address))
        return builtin_protocol(address);
    std::ifstream in{std::string(address)};
    if (!in)
        throw Error("cannot open protocol file '" + std::string(address) + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_protocol(buffer.str());
}

std::vector<BuiltinInfo> builtin_catalog() {
    return {
        {"protocol1", "builtin:protocol1?k=4", "timer-based leader election with threshold k"},
        {"improved1", "builtin:improved1?k=4", "protocol1 with the has_seen_timer elimination bit"},
        {"unbounded", "builtin:unbounded?cap=64", "protocol1 without computation phase, counter saturating at cap"},
        {"ladder", "builtin:ladder?m=4", "chain s_i s_i -> s_{i+1} s_i over m states"},
        {"elim", "builtin:elim", "pairwise leader elimination L L -> L F"},
    };
}

std::vector<StateId> leader_states(const ProtocolSpec& protocol) {
    std::vector<StateId> out;
    for (std::size_t s = 0; s < protocol.num_states(); ++s)
        if (protocol.output(protocol.state(s)) == 1)
            out.push_back(protocol.state(s));
    return out;
}

std::vector<StateId> computation_states(const ProtocolSpec& protocol) {
    std::vector<StateId> out;
    for (std::size_t s = 0; s < protocol.num_states(); ++s) {
        auto st = LeaderTimerState::decode(protocol.name(protocol.state(s)));
        if (st && st->phase == Phase::computation)
            out.push_back(protocol.state(s));
    }
    return out;
}

std::vector<std::int64_t> timer_count_levels(const ProtocolSpec& protocol) {
    std::vector<std::int64_t> out(protocol.num_states(), 0);
    for (std::size_t s = 0; s < protocol.num_states(); ++s)
        if (auto st = LeaderTimerState::decode(protocol.name(protocol.state(s))))
            out[s] = st->timer_count;
    return out;
}

} // namespace popsim
