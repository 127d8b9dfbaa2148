#include "popsim/scheduler.hpp"

#include "popsim/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace popsim {

std::string_view to_string(Mode mode) noexcept {
    return mode == Mode::agents ? "agents" : "counts";
}

Mode parse_mode(std::string_view text) {
    if (text == "agents")
        return Mode::agents;
    if (text == "counts")
        return Mode::counts;
    throw Error("unknown mode '" + std::string(text) + "' (expected counts or agents)");
}

std::optional<AgentDraw> choose_next_pair(Rng& rng, std::size_t n) {
    if (n == 0)
        throw EmptyPopulationError();
    auto a = rng.uniform(n);
    auto b = rng.uniform(n);
    if (a == b)
        return std::nullopt;
    return AgentDraw{a, b};
}

namespace {

StateId locate_linear(std::span<const std::uint64_t> counts, std::uint64_t r) {
    for (std::size_t s = 0; s < counts.size(); ++s) {
        if (r < counts[s])
            return StateId{static_cast<std::uint32_t>(s)};
        r -= counts[s];
    }
    throw InvalidDrawError("rank outside the population");
}

} // namespace

std::optional<StatePair> choose_next_pair(Rng& rng, const Configuration& config) {
    const auto n = config.n();
    if (n == 0)
        throw EmptyPopulationError();
    auto counts = config.counts();
    auto a = locate_linear(counts, rng.uniform(n));
    auto r = rng.uniform(n);
    if (r == n - 1)
        return std::nullopt;
    std::uint64_t before = 0;
    for (std::uint32_t s = 0; s < a.index; ++s)
        before += counts[s];
    if (r < before)
        return StatePair{a, locate_linear(counts, r)};
    if (r < before + counts[a.index] - 1)
        return StatePair{a, a};
    return StatePair{a, locate_linear(counts, r + 1)};
}

CountIndex::CountIndex(const Configuration& config)
    : counts_(config.counts().begin(), config.counts().end()), tree_(counts_.size() + 1, 0) {
    while (top_bit_ * 2 <= counts_.size())
        top_bit_ *= 2;
    for (std::size_t s = 0; s < counts_.size(); ++s) {
        n_ += counts_[s];
        for (auto i = s + 1; i < tree_.size(); i += i & (~i + 1))
            tree_[i] += counts_[s];
    }
}

void CountIndex::add(StateId s, std::int64_t delta) {
    counts_[s.index] += static_cast<std::uint64_t>(delta);
    n_ += static_cast<std::uint64_t>(delta);
    for (std::size_t i = s.index + 1; i < tree_.size(); i += i & (~i + 1))
        tree_[i] += static_cast<std::uint64_t>(delta);
}

std::uint64_t CountIndex::prefix(StateId s) const {
    std::uint64_t sum = 0;
    for (std::size_t i = s.index; i > 0; i -= i & (~i + 1))
        sum += tree_[i];
    return sum;
}

StateId CountIndex::locate(std::uint64_t r) const {
    std::size_t pos = 0;
    for (std::size_t step = top_bit_; step > 0; step >>= 1) {
        auto next = pos + step;
        if (next < tree_.size() && tree_[next] <= r) {
            pos = next;
            r -= tree_[next];
        }
    }
    return StateId{static_cast<std::uint32_t>(pos)};
}

std::optional<StatePair> CountIndex::draw(Rng& rng) const {
    if (n_ == 0)
        throw EmptyPopulationError();
    auto a = locate(rng.uniform(n_));
    auto r = rng.uniform(n_);
    if (r == n_ - 1)
        return std::nullopt;
    auto before = prefix(a);
    if (r < before)
        return StatePair{a, locate(r)};
    if (r < before + counts_[a.index] - 1)
        return StatePair{a, a};
    return StatePair{a, locate(r + 1)};
}

StopCondition StopCondition::fixed_calls(std::uint64_t calls) {
    return {{{"calls", StopClause::FixedCalls{calls}}}};
}

StopCondition StopCondition::fixed_interactions(std::uint64_t interactions) {
    return {{{"interactions", StopClause::FixedInteractions{interactions}}}};
}

StopCondition StopCondition::class_count(std::string label, std::vector<StateId> members, std::uint64_t target) {
    return {{{std::move(label), StopClause::ClassCount{std::move(members), target}}}};
}

StopCondition StopCondition::first_state_entered(std::string label, std::vector<StateId> states) {
    return {{{std::move(label), StopClause::StateEntered{std::move(states)}}}};
}

StopCondition StopCondition::predicate(std::string label, std::function<bool(const Configuration&)> test) {
    return {{{std::move(label), StopClause::Predicate{std::move(test)}}}};
}

StopCondition StopCondition::operator|(const StopCondition& other) const {
    StopCondition out = *this;
    out.clauses.insert(out.clauses.end(), other.clauses.begin(), other.clauses.end());
    return out;
}

std::vector<std::uint64_t> linear_ticks(std::uint64_t step, std::uint64_t last) {
    if (step == 0)
        throw Error("probe step must be positive");
    std::vector<std::uint64_t> ticks;
    for (std::uint64_t t = 0; t <= last; t += step)
        ticks.push_back(t);
    return ticks;
}

std::vector<std::uint64_t> geometric_ticks(std::uint64_t first, double ratio, std::uint64_t last) {
    if (first == 0 || ratio <= 1.0)
        throw Error("geometric ticks need first > 0 and ratio > 1");
    std::vector<std::uint64_t> ticks{0};
    double t = static_cast<double>(first);
    while (t <= static_cast<double>(last)) {
        auto tick = static_cast<std::uint64_t>(t);
        if (tick > ticks.back())
            ticks.push_back(tick);
        t *= ratio;
    }
    return ticks;
}

std::string format_event(const ProtocolSpec& protocol, const InteractionEvent& event) {
    std::string line = std::to_string(event.call) + (event.noop ? ",1" : ",0");
    if (event.noop)
        return line + ",,,,";
    return line + "," + protocol.name(event.initiator) + "," + protocol.name(event.responder) + "," +
           protocol.name(event.initiator_after) + "," + protocol.name(event.responder_after);
}

std::string RunResult::serialize(const ProtocolSpec& protocol) const {
    std::ostringstream out;
    out.precision(17);
    out << "rng " << Rng::algorithm_id << '\n'
        << "final " << to_string(protocol, final_config) << '\n'
        << "calls " << calls_made << '\n'
        << "interactions " << interactions_made << '\n'
        << "stop " << stop_reason << '\n';
    for (const auto& [s, count] : visitors)
        out << "visitors " << protocol.name(s) << ' ' << count << '\n';
    if (max_level)
        out << "max_level " << *max_level << '\n';
    if (first_full_coverage_call)
        out << "coverage " << *first_full_coverage_call << '\n';
    for (const auto& p : probes)
        out << "probe " << p.name << ' ' << p.call << ' ' << p.value << '\n';
    return out.str();
}

Simulation::Simulation(RunConfig config) : cfg_(std::move(config)), rng_(cfg_.seed) {
    if (!cfg_.protocol)
        throw Error("run configuration has no protocol");
    const auto& protocol = *cfg_.protocol;
    const auto q = protocol.num_states();

    if (auto* pop = std::get_if<AgentPopulation>(&cfg_.initial)) {
        config_ = pop->configuration();
        agents_ = pop->agent_states();
    } else {
        config_ = std::get<Configuration>(cfg_.initial);
        if (cfg_.mode == Mode::agents)
            agents_ = AgentPopulation::from_configuration(config_).agent_states();
    }
    if (config_.num_states() != q)
        throw Error("initial configuration does not match the protocol's state count");
    if (config_.n() == 0)
        throw EmptyPopulationError();
    if (cfg_.mode == Mode::counts) {
        if (!cfg_.audited.empty())
            throw Error("distinct-visitor audits need agents mode");
        agents_.clear();
        index_.emplace(config_);
    }
    const auto n = config_.n();
    max_calls_ = cfg_.max_calls.value_or(64 * n * n);

    for (std::size_t i = 0; i < cfg_.stop.clauses.size(); ++i) {
        const auto& rule = cfg_.stop.clauses[i].rule;
        if (auto* cc = std::get_if<StopClause::ClassCount>(&rule)) {
            ClassTracker t{i, std::vector<char>(q, 0), 0, cc->target};
            for (auto s : cc->members)
                t.member.at(s.index) = 1;
            for (std::size_t s = 0; s < q; ++s)
                if (t.member[s])
                    t.count += config_.counts()[s];
            classes_.push_back(std::move(t));
        } else if (auto* se = std::get_if<StopClause::StateEntered>(&rule)) {
            EnterTracker t{i, std::vector<char>(q, 0), 0};
            for (auto s : se->states)
                t.member.at(s.index) = 1;
            for (std::size_t s = 0; s < q; ++s)
                if (t.member[s] && config_.counts()[s] > 0)
                    ++t.occupied;
            entered_.push_back(std::move(t));
        }
    }

    audit_slot_.assign(q, -1);
    for (auto s : cfg_.audited) {
        if (s.index >= q)
            throw Error("audited state outside Q");
        if (audit_slot_[s.index] >= 0)
            continue;
        audit_slot_[s.index] = static_cast<int>(audit_seen_.size());
        audit_seen_.emplace_back(n, 0);
        audit_count_.push_back(0);
    }
    for (std::size_t agent = 0; agent < agents_.size(); ++agent)
        enter(agent, agents_[agent]);

    if (!cfg_.state_level.empty()) {
        if (cfg_.state_level.size() != q)
            throw Error("state_level must have one entry per state");
        for (std::size_t s = 0; s < q; ++s)
            if (config_.counts()[s] > 0)
                max_level_ = std::max(max_level_.value_or(cfg_.state_level[s]), cfg_.state_level[s]);
    }

    if (!cfg_.coverage.empty()) {
        coverage_member_.assign(q, 0);
        for (auto s : cfg_.coverage)
            coverage_member_.at(s.index) = 1;
        for (std::size_t s = 0; s < q; ++s)
            if (coverage_member_[s] && config_.counts()[s] > 0)
                ++coverage_occupied_;
        coverage_size_ = static_cast<std::uint64_t>(std::count(coverage_member_.begin(), coverage_member_.end(), 1));
        if (coverage_occupied_ == coverage_size_)
            coverage_call_ = 0;
    }

    probe_cursor_.assign(cfg_.probes.size(), 0);
    fire_probes();
    check_stop();
}

void Simulation::enter(std::size_t agent, StateId s) {
    int slot = audit_slot_[s.index];
    if (slot < 0)
        return;
    auto& seen = audit_seen_[static_cast<std::size_t>(slot)][agent];
    if (!seen) {
        seen = 1;
        ++audit_count_[static_cast<std::size_t>(slot)];
    }
}

void Simulation::adjust(StateId s, int delta) {
    const auto before = config_.counts()[s.index];
    if (delta > 0)
        config_.add(s);
    else
        config_.remove(s);
    if (index_)
        index_->add(s, delta);
    const auto after = config_.counts()[s.index];
    for (auto& t : classes_)
        if (t.member[s.index])
            t.count += static_cast<std::uint64_t>(delta);
    const bool toggled = (before == 0) != (after == 0);
    if (!toggled)
        return;
    for (auto& t : entered_)
        if (t.member[s.index])
            t.occupied += after > 0 ? 1 : std::uint64_t(-1);
    if (!coverage_member_.empty() && coverage_member_[s.index])
        coverage_occupied_ += after > 0 ? 1 : std::uint64_t(-1);
}

InteractionEvent Simulation::step() {
    InteractionEvent event;
    const auto& protocol = *cfg_.protocol;

    StateId a, b;
    std::size_t agent_a = 0, agent_b = 0;
    bool noop;
    if (cfg_.mode == Mode::agents) {
        auto draw = choose_next_pair(rng_, agents_.size());
        noop = !draw;
        if (draw) {
            agent_a = draw->initiator;
            agent_b = draw->responder;
            a = agents_[agent_a];
            b = agents_[agent_b];
        }
    } else {
        auto draw = index_->draw(rng_);
        noop = !draw;
        if (draw)
            std::tie(a, b) = *draw;
    }
    ++calls_;
    event.call = calls_;
    event.noop = noop;

    if (!noop) {
        ++interactions_;
        auto [c, d] = protocol.delta(a, b);
        event.initiator = a;
        event.responder = b;
        event.initiator_after = c;
        event.responder_after = d;
        if (c != a || d != b) {
            adjust(a, -1);
            adjust(b, -1);
            adjust(c, +1);
            adjust(d, +1);
            if (cfg_.mode == Mode::agents) {
                agents_[agent_a] = c;
                agents_[agent_b] = d;
                enter(agent_a, c);
                enter(agent_b, d);
            }
            if (!cfg_.state_level.empty())
                max_level_ = std::max({*max_level_, cfg_.state_level[c.index], cfg_.state_level[d.index]});
            if (!coverage_call_ && !coverage_member_.empty() && coverage_occupied_ == coverage_size_)
                coverage_call_ = calls_;
        }
    }
    if (cfg_.on_event)
        cfg_.on_event(event);
    fire_probes();
    check_stop();
    return event;
}

void Simulation::fire_probes() {
    for (std::size_t i = 0; i < cfg_.probes.size(); ++i) {
        const auto& probe = cfg_.probes[i];
        auto& cursor = probe_cursor_[i];
        while (cursor < probe.ticks.size() && probe.ticks[cursor] < calls_)
            ++cursor;
        if (cursor < probe.ticks.size() && probe.ticks[cursor] == calls_) {
            probe_records_.push_back({probe.name, calls_, probe.metric(config_)});
            ++cursor;
        }
    }
}

void Simulation::check_stop() {
    std::optional<std::size_t> hit;
    for (const auto& t : classes_)
        if (t.count == t.target && (!hit || t.clause < *hit))
            hit = t.clause;
    for (const auto& t : entered_)
        if (t.occupied > 0 && (!hit || t.clause < *hit))
            hit = t.clause;
    for (std::size_t i = 0; i < cfg_.stop.clauses.size() && (!hit || i < *hit); ++i) {
        const auto& rule = cfg_.stop.clauses[i].rule;
        if (auto* fc = std::get_if<StopClause::FixedCalls>(&rule)) {
            if (calls_ >= fc->calls)
                hit = i;
        } else if (auto* fi = std::get_if<StopClause::FixedInteractions>(&rule)) {
            if (interactions_ >= fi->interactions)
                hit = i;
        } else if (auto* p = std::get_if<StopClause::Predicate>(&rule)) {
            if (p->test(config_))
                hit = i;
        }
    }
    if (hit)
        stop_reason_ = cfg_.stop.clauses[*hit].label;
    else if (calls_ >= max_calls_)
        stop_reason_ = "cap";
}

std::uint64_t Simulation::visitors(StateId s) const {
    if (s.index >= audit_slot_.size() || audit_slot_[s.index] < 0)
        throw MissingAuditError("state was not audited");
    return audit_count_[static_cast<std::size_t>(audit_slot_[s.index])];
}

RunResult Simulation::result() const {
    RunResult r;
    r.final_config = config_;
    r.calls_made = calls_;
    r.interactions_made = interactions_;
    r.stop_reason = stop_reason_;
    r.probes = probe_records_;
    for (std::size_t s = 0; s < audit_slot_.size(); ++s)
        if (audit_slot_[s] >= 0)
            r.visitors.emplace_back(StateId{static_cast<std::uint32_t>(s)},
                                    audit_count_[static_cast<std::size_t>(audit_slot_[s])]);
    r.max_level = max_level_;
    r.first_full_coverage_call = coverage_call_;
    return r;
}

RunResult run(RunConfig config) {
    Simulation sim(std::move(config));
    while (!sim.stopped())
        sim.step();
    return sim.result();
}

std::uint64_t distinct_visitors(const RunResult& result, StateId s) {
    for (const auto& [state, count] : result.visitors)
        if (state == s)
            return count;
    throw MissingAuditError("state was not audited in this run");
}

} // namespace popsim
