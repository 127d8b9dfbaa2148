// popsim: command-line front end for the population protocol toolkit.

#include "popsim/bounds.hpp"
#include "popsim/dsl.hpp"
#include "popsim/error.hpp"
#include "popsim/harness.hpp"
#include "popsim/library.hpp"
#include "popsim/reachability.hpp"
#include "popsim/scheduler.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

namespace {

using namespace popsim;
using json = nlohmann::json;

/// Bad flags, unknown names, unreadable inputs: exit 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ProtocolSpec resolve_protocol(const std::string& address) {
    try {
        return load_protocol(address);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

StateId resolve_state(const ProtocolSpec& protocol, const std::string& name) {
    auto s = protocol.find(name);
    if (!s)
        throw UsageError("unknown state '" + name + "'");
    return *s;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep))
        if (!cur.empty())
            out.push_back(cur);
    return out;
}

std::uint64_t parse_count(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        auto v = std::stoull(text, &used);
        if (used != text.size())
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError("bad " + what + ": '" + text + "'");
    }
}

/// "A:3,B:1" over the protocol's states.
Configuration parse_config(const ProtocolSpec& protocol, const std::string& text) {
    std::vector<std::uint64_t> counts(protocol.num_states(), 0);
    for (const auto& item : split(text, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw UsageError("configuration entries look like STATE:COUNT, got '" + item + "'");
        counts[resolve_state(protocol, item.substr(0, colon)).index] += parse_count(item.substr(colon + 1), "count");
    }
    return Configuration(std::move(counts));
}

std::vector<StateId> parse_state_list(const ProtocolSpec& protocol, const std::string& text) {
    std::vector<StateId> out;
    for (const auto& name : split(text, '+'))
        out.push_back(resolve_state(protocol, name));
    return out;
}

/// calls:N, interactions:N, single-leader, leaders:N, entered:A+B, computation.
StopCondition parse_stop(const ProtocolSpec& protocol, const std::string& text) {
    auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "calls")
        return StopCondition::fixed_calls(parse_count(arg, "call count"));
    if (kind == "interactions")
        return StopCondition::fixed_interactions(parse_count(arg, "interaction count"));
    if (kind == "single-leader")
        return StopCondition::class_count("single-leader", leader_states(protocol), 1);
    if (kind == "leaders")
        return StopCondition::class_count("leaders", leader_states(protocol), parse_count(arg, "leader count"));
    if (kind == "entered")
        return StopCondition::first_state_entered("entered", parse_state_list(protocol, arg));
    if (kind == "computation")
        return StopCondition::first_state_entered("computation", computation_states(protocol));
    throw UsageError("unknown stop condition '" + text + "'");
}

Mode mode_from(const std::string& text) {
    try {
        return parse_mode(text);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

unsigned default_workers() {
    if (const char* env = std::getenv("POPSIM_WORKERS")) {
        try {
            auto v = std::stoul(env);
            if (v > 0)
                return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- run

struct RunOptions {
    std::string protocol;
    std::uint64_t n = 0;
    std::string init;
    std::string mode = "counts";
    std::uint64_t seed = 1;
    std::vector<std::string> stops;
    std::uint64_t max_calls = 0;
    std::string trace;
    std::vector<std::string> audit;
    std::string format = "text";
};

int cmd_run(const RunOptions& o) {
    auto protocol = std::make_shared<const ProtocolSpec>(resolve_protocol(o.protocol));
    RunConfig cfg;
    cfg.protocol = protocol;
    if (!o.init.empty())
        cfg.initial = parse_config(*protocol, o.init);
    else if (o.n >= 1)
        cfg.initial = Configuration::uniform(protocol->num_states(), protocol->initial_state(), o.n);
    else
        throw UsageError("give --n (at least 1) or --init");
    cfg.mode = mode_from(o.mode);
    cfg.seed = o.seed;
    for (const auto& s : o.stops)
        cfg.stop = cfg.stop | parse_stop(*protocol, s);
    if (o.max_calls)
        cfg.max_calls = o.max_calls;
    for (const auto& name : o.audit)
        cfg.audited.push_back(resolve_state(*protocol, name));
    if (!cfg.audited.empty())
        cfg.mode = Mode::agents;

    std::ofstream trace;
    if (!o.trace.empty()) {
        trace.open(o.trace, std::ios::binary);
        if (!trace)
            throw UsageError("cannot write trace file " + o.trace);
        trace << "call,noop,init,resp,init_after,resp_after\n";
        cfg.on_event = [&](const InteractionEvent& e) { trace << format_event(*protocol, e) << '\n'; };
    }

    auto result = run(std::move(cfg));
    if (o.format == "json") {
        json j;
        json counts = json::object();
        for (std::size_t i = 0; i < protocol->num_states(); ++i)
            counts[protocol->name(StateId{static_cast<std::uint32_t>(i)})] =
                result.final_config[StateId{static_cast<std::uint32_t>(i)}];
        j["protocol"] = protocol->metadata().name;
        j["final"] = counts;
        j["calls"] = result.calls_made;
        j["interactions"] = result.interactions_made;
        j["stop_reason"] = result.stop_reason;
        for (const auto& [s, v] : result.visitors)
            j["visitors"][protocol->name(s)] = v;
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << result.serialize(*protocol);
    }
    return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
    std::string preset;
    std::string spec_file;
    std::string protocol;
    std::string state;
    std::vector<std::uint64_t> n;
    std::uint64_t n_max = 0;
    int k = 4;
    int cap = 64;
    double C = 10;
    std::uint64_t runs = 0;
    std::uint64_t seed = 1;
    std::string mode = "agents";
    std::uint64_t max_calls_factor = 64;
    unsigned workers = 0;
    std::string out = "out";
    bool paper_scale = false;
    bool strict = false;
    double max_flagged_rate = 0.05;
    bool svg = false;
};

/// One experiment of a sweep invocation; several may share a CSV file.
struct Job {
    std::string experiment;
    SweepSpec spec;
    int k = 4;
    int cap = 64;
    double C = 10;
    std::string state;
    Variant variant = Variant::base;
};

NSchedule doubling_to(std::uint64_t start, std::uint64_t stop) {
    auto s = NSchedule::doubling(start, stop);
    if (s.values.empty())
        throw UsageError("empty n schedule");
    return s;
}

std::vector<Job> preset_jobs(const SweepOptions& o) {
    SweepSpec base;
    base.master_seed = o.seed;
    base.mode = mode_from(o.mode);
    base.max_calls_factor = o.max_calls_factor;
    base.runs_per_n = o.paper_scale ? 1 : 20;

    auto with_n = [&](SweepSpec spec, NSchedule fallback, std::uint64_t default_runs) {
        spec.n = o.n.empty() ? std::move(fallback) : NSchedule::list(o.n);
        spec.runs_per_n = o.runs ? o.runs : (o.paper_scale ? 1 : default_runs);
        return spec;
    };

    std::vector<Job> jobs;
    if (o.preset == "fig3.1") {
        auto sched = o.paper_scale ? NSchedule::arithmetic(100, 50, o.n_max ? o.n_max : 300000)
                                   : doubling_to(100, o.n_max ? o.n_max : 12800);
        for (auto v : {Variant::base, Variant::improved}) {
            Job j{"final_leaders", with_n(base, sched, 20)};
            j.k = o.k;
            j.variant = v;
            j.spec.protocol = v == Variant::base ? "builtin:protocol1" : "builtin:improved1";
            jobs.push_back(j);
        }
    } else if (o.preset == "fig5.1") {
        auto sched = o.paper_scale ? NSchedule::arithmetic(10, 50, o.n_max ? o.n_max : 50000)
                                   : NSchedule::list({16, 64, 256, 1024, 4096});
        Job j{"max_counter", with_n(base, sched, 20)};
        j.cap = o.cap;
        j.spec.protocol = "builtin:unbounded";
        jobs.push_back(j);
    } else if (o.preset == "occupancy") {
        Job j{"occupancy", with_n(base, NSchedule::list({1000, 10000, 100000}), 20)};
        j.spec.protocol = o.protocol.empty() ? "builtin:ladder?m=4" : o.protocol;
        j.C = o.C;
        jobs.push_back(j);
    } else if (o.preset == "stabilization") {
        std::vector<std::string> protocols = o.protocol.empty()
                                                 ? std::vector<std::string>{"builtin:elim", "builtin:protocol1?k=4"}
                                                 : std::vector<std::string>{o.protocol};
        for (const auto& p : protocols) {
            Job j{"stabilization", with_n(base, doubling_to(64, o.n_max ? o.n_max : 1024), 20)};
            j.spec.protocol = p;
            jobs.push_back(j);
        }
    } else if (o.preset == "audit") {
        Job j{"audit", with_n(base, NSchedule::list({100, 1000, 10000}), 50)};
        j.spec.protocol = o.protocol.empty() ? "builtin:ladder?m=3" : o.protocol;
        j.state = o.state.empty() ? "s2" : o.state;
        j.C = o.C;
        jobs.push_back(j);
    } else {
        throw UsageError("unknown preset '" + o.preset + "' (fig3.1, fig5.1, occupancy, stabilization, audit)");
    }
    return jobs;
}

NSchedule schedule_from_json(const json& n) {
    if (n.is_array())
        return NSchedule::list(n.get<std::vector<std::uint64_t>>());
    if (n.contains("arithmetic")) {
        auto a = n.at("arithmetic").get<std::vector<std::uint64_t>>();
        if (a.size() != 3)
            throw UsageError("arithmetic schedule is [start, step, stop]");
        return NSchedule::arithmetic(a[0], a[1], a[2]);
    }
    if (n.contains("doubling")) {
        auto a = n.at("doubling").get<std::vector<std::uint64_t>>();
        if (a.size() != 2)
            throw UsageError("doubling schedule is [start, stop]");
        return NSchedule::doubling(a[0], a[1]);
    }
    throw UsageError("n must be a list, {\"arithmetic\": [...]} or {\"doubling\": [...]}");
}

std::vector<Job> file_jobs(const SweepOptions& o) {
    std::ifstream in(o.spec_file);
    if (!in)
        throw UsageError("cannot read spec file " + o.spec_file);
    json j;
    try {
        j = json::parse(in);
        Job job;
        job.experiment = j.at("experiment").get<std::string>();
        job.spec.protocol = j.value("protocol", std::string());
        job.spec.n = schedule_from_json(j.at("n"));
        job.spec.runs_per_n = j.value("runs_per_n", std::uint64_t{20});
        job.spec.master_seed = j.value("master_seed", o.seed);
        job.spec.mode = mode_from(j.value("mode", std::string("agents")));
        job.spec.max_calls_factor = j.value("max_calls_factor", std::uint64_t{64});
        job.k = j.value("k", 4);
        job.cap = j.value("cap", 64);
        job.C = j.value("C", 10.0);
        job.state = j.value("state", std::string());
        if (job.experiment == "final_leaders") {
            std::vector<Job> jobs;
            for (const auto& v : j.value("variants", std::vector<std::string>{"base", "improved"})) {
                if (v != "base" && v != "improved")
                    throw UsageError("unknown variant '" + v + "'");
                Job copy = job;
                copy.variant = v == "base" ? Variant::base : Variant::improved;
                jobs.push_back(copy);
            }
            return jobs;
        }
        if (job.experiment != "max_counter" && job.experiment != "occupancy" && job.experiment != "stabilization" &&
            job.experiment != "audit")
            throw UsageError("unknown experiment '" + job.experiment + "'");
        if (job.experiment == "audit" && job.state.empty())
            throw UsageError("audit needs \"state\"");
        if (job.experiment != "max_counter" && job.spec.protocol.empty())
            throw UsageError(job.experiment + " needs \"protocol\"");
        return {job};
    } catch (const json::exception& e) {
        throw UsageError(std::string("spec file: ") + e.what());
    }
}

SweepResult run_job(const Job& job) {
    if (job.experiment == "final_leaders")
        return sweep_final_leaders(job.k, job.spec, job.variant);
    if (job.experiment == "max_counter")
        return sweep_max_counter(job.cap, job.spec);
    if (job.experiment == "occupancy")
        return sweep_occupancy(job.spec, job.C);
    if (job.experiment == "stabilization")
        return sweep_stabilization(job.spec);
    return audit_confident_state(job.spec, job.state, job.C);
}

int cmd_sweep(const SweepOptions& o) {
    if (o.preset.empty() == o.spec_file.empty())
        throw UsageError("give exactly one of --preset or --spec");
    auto jobs = o.preset.empty() ? file_jobs(o) : preset_jobs(o);
    const unsigned workers = o.workers ? o.workers : default_workers();
    for (auto& job : jobs) {
        job.spec.workers = workers;
        try {
            job.spec.validate();
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        if (!job.spec.protocol.empty() && job.experiment != "final_leaders" && job.experiment != "max_counter")
            resolve_protocol(job.spec.protocol);
    }

    std::vector<SweepResult> results;
    std::map<std::string, Table> files;
    std::vector<std::string> order;
    for (const auto& job : jobs) {
        auto r = run_job(job);
        auto [it, fresh] = files.try_emplace(r.name, Table{r.table.header, {}});
        if (fresh)
            order.push_back(r.name);
        it->second.rows.insert(it->second.rows.end(), r.table.rows.begin(), r.table.rows.end());
        results.push_back(std::move(r));
    }
    for (const auto& name : order)
        write_csv(o.out, name, files[name]);
    write_csv(o.out, "fits", fits_table(results));

    bool over = false;
    for (const auto& r : results) {
        std::cout << r.metric << '\n';
        for (const auto& s : r.summary) {
            std::cout << "  n=" << s.n << " runs=" << s.runs << " flagged=" << s.flagged
                      << " mean=" << format_double(s.mean) << " sd=" << format_double(s.stddev);
            for (const auto& [k, v] : s.extra)
                std::cout << ' ' << k << '=' << format_double(v);
            std::cout << '\n';
        }
        if (r.fit)
            std::cout << "  fit slope=" << format_double(r.fit->slope) << " r2=" << format_double(r.fit->r2) << '\n';
        std::cout << "  flagged_rate=" << format_double(r.flagged_rate()) << '\n';
        over = over || r.flagged_rate() > o.max_flagged_rate;
        if (o.svg) {
            std::string stem = r.metric;
            for (auto& c : stem)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
                    c = '_';
            std::ofstream svg(std::filesystem::path(o.out) / (stem + ".svg"), std::ios::binary);
            svg << render_svg(r);
        }
    }
    if (o.strict && over) {
        std::cerr << "flagged-row rate above " << format_double(o.max_flagged_rate) << '\n';
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------- layers, bounds

StateId start_state(const ProtocolSpec& protocol, const std::string& name) {
    return name.empty() ? protocol.initial_state() : resolve_state(protocol, name);
}

int cmd_layers(const std::string& address, const std::string& start) {
    auto protocol = resolve_protocol(address);
    auto layers = compute_layers(protocol, start_state(protocol, start));
    for (std::size_t i = 0; i < layers.layers.size(); ++i) {
        std::cout << "F_" << i << ":";
        for (auto s : layers.layers[i])
            std::cout << ' ' << protocol.name(s);
        std::cout << '\n';
    }
    for (const auto& w : layers.witnesses)
        std::cout << "witness " << protocol.name(w.state) << " layer " << w.layer << " <- "
                  << protocol.name(w.initiator) << ' ' << protocol.name(w.responder) << " position " << w.position
                  << '\n';
    std::cout << "l_max " << layers.l_max() << '\n' << "reachable " << layers.reachable().size() << '\n';
    return 0;
}

int cmd_bounds(const std::string& address, const std::string& start, const std::vector<std::string>& fractions,
               std::uint64_t n) {
    auto protocol = resolve_protocol(address);
    auto layers = compute_layers(protocol, start_state(protocol, start));
    std::map<StateId, Rational> initial;
    if (fractions.empty())
        initial[layers.start] = 1;
    for (const auto& item : fractions) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw UsageError("fractions look like STATE=p/q, got '" + item + "'");
        try {
            initial[resolve_state(protocol, item.substr(0, eq))] = parse_rational(item.substr(eq + 1));
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    try {
        auto report = propagate_bounds(layers, initial);
        std::cout << render_report(protocol, report, n ? std::optional<std::uint64_t>(n) : std::nullopt);
    } catch (const VacuousBoundError& e) {
        std::cerr << "vacuous bound: " << e.what() << " (value " << e.raw_value() << ")\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------- check

int cmd_check(const std::string& address, const std::string& config, std::uint64_t n, std::size_t max_configs,
              bool strict) {
    auto protocol = resolve_protocol(address);
    Configuration start = !config.empty() ? parse_config(protocol, config)
                          : n >= 1        ? Configuration::uniform(protocol.num_states(), protocol.initial_state(), n)
                                          : throw UsageError("give --config or --n");
    auto verdict = is_stable_consensus(protocol, start, max_configs);
    if (std::holds_alternative<StableConsensus>(verdict)) {
        std::cout << "stable " << to_string(protocol, start) << '\n';
        return 0;
    }
    if (auto* u = std::get_if<UnstableConsensus>(&verdict)) {
        std::cout << "unstable\n";
        for (std::size_t i = 0; i < u->path.size(); ++i)
            std::cout << "  " << i << ' ' << to_string(protocol, u->path[i]) << '\n';
        return strict ? 1 : 0;
    }
    std::cout << "limit-exceeded explored=" << std::get<ConsensusLimitExceeded>(verdict).explored << '\n';
    return strict ? 1 : 0;
}

// ---------------------------------------------------------------- protocols

int cmd_protocols_list() {
    for (const auto& b : builtin_catalog())
        std::cout << b.example << "  " << b.summary << '\n';
    return 0;
}

int cmd_protocols_emit(const std::string& address) {
    std::cout << emit_protocol(resolve_protocol(address));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"popsim: population protocol simulator, bound calculator and experiment harness"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    RunOptions ro;
    auto* run = app.add_subcommand("run", "Execute one simulation and print its summary");
    run->add_option("--protocol,-p", ro.protocol, "Protocol file or builtin:<name>?<k=v>")->required();
    run->add_option("--n", ro.n, "Population size (all agents in the initial state)");
    run->add_option("--init", ro.init, "Explicit initial configuration, e.g. A:3,B:1");
    run->add_option("--mode", ro.mode, "counts or agents");
    run->add_option("--seed", ro.seed, "RNG seed");
    run->add_option("--stop", ro.stops,
                    "Stop clause, repeatable (any holds): calls:N, interactions:N, single-leader, leaders:N, "
                    "entered:A+B, computation");
    run->add_option("--max-calls", ro.max_calls, "Call cap (0: 64 n^2)");
    run->add_option("--trace", ro.trace, "Write every call as CSV to this file");
    run->add_option("--audit", ro.audit, "Record distinct visitors of this state (forces agents mode)");
    run->add_option("--format", ro.format, "text or json")->check(CLI::IsMember({"text", "json"}));

    SweepOptions so;
    auto* sweep = app.add_subcommand("sweep", "Run an experiment sweep and write CSV files");
    sweep->add_option("--preset", so.preset, "fig3.1, fig5.1, occupancy, stabilization or audit");
    sweep->add_option("--spec", so.spec_file, "JSON sweep specification");
    sweep->add_option("--protocol", so.protocol, "Protocol for occupancy, stabilization and audit presets");
    sweep->add_option("--state", so.state, "Audited state (audit preset)");
    sweep->add_option("--n", so.n, "Explicit n schedule")->delimiter(',');
    sweep->add_option("--n-max", so.n_max, "Largest n of the preset schedule (0: preset default)");
    sweep->add_option("--k", so.k, "Timer threshold (fig3.1)");
    sweep->add_option("--cap", so.cap, "Counter cap (fig5.1)");
    sweep->add_option("--C", so.C, "Calls per agent (occupancy, audit)");
    sweep->add_option("--runs", so.runs, "Runs per n (0: preset default)");
    sweep->add_option("--seed", so.seed, "Master seed");
    sweep->add_option("--mode", so.mode, "counts or agents");
    sweep->add_option("--max-calls-factor", so.max_calls_factor, "Per-run cap as a multiple of n^2");
    sweep->add_option("--workers", so.workers, "Worker threads (0: $POPSIM_WORKERS or hardware concurrency)");
    sweep->add_option("--out", so.out, "Output directory");
    sweep->add_flag("--paper-scale", so.paper_scale, "Use the original dense single-run schedules");
    sweep->add_flag("--strict", so.strict, "Exit 1 when a flagged-row rate exceeds --max-flagged-rate");
    sweep->add_option("--max-flagged-rate", so.max_flagged_rate, "Threshold for --strict");
    sweep->add_flag("--svg", so.svg, "Also write one SVG chart per metric");

    std::string l_protocol, l_start;
    auto* layers = app.add_subcommand("layers", "Print the layer chain F_0, F_1, ... with witnesses");
    layers->add_option("--protocol,-p", l_protocol, "Protocol file or builtin address")->required();
    layers->add_option("--start", l_start, "Start state (default: initial state)");

    std::string b_protocol, b_start;
    std::vector<std::string> b_fractions;
    std::uint64_t b_n = 0;
    auto* bounds = app.add_subcommand("bounds", "Propagate occupancy lower bounds through the layers");
    bounds->add_option("--protocol,-p", b_protocol, "Protocol file or builtin address")->required();
    bounds->add_option("--start", b_start, "Start state (default: initial state)");
    bounds->add_option("--fraction", b_fractions, "Initial fraction STATE=p/q, repeatable (default: start=1)");
    bounds->add_option("--n", b_n, "Also print expected agent counts at this n (0: off)");

    std::string c_protocol, c_config;
    std::uint64_t c_n = 0;
    std::size_t c_max = 1'000'000;
    bool c_strict = false;
    auto* check = app.add_subcommand("check", "Decide stable consensus by explicit-state search");
    check->add_option("--protocol,-p", c_protocol, "Protocol file or builtin address")->required();
    check->add_option("--config", c_config, "Configuration, e.g. A:3,B:1");
    check->add_option("--n", c_n, "All agents in the initial state");
    check->add_option("--max-configs", c_max, "Exploration limit");
    check->add_flag("--strict", c_strict, "Exit 1 on unstable or limit-exceeded");

    std::string e_protocol;
    auto* protocols = app.add_subcommand("protocols", "List or emit protocols");
    protocols->require_subcommand(1);
    auto* list = protocols->add_subcommand("list", "List builtin protocols");
    auto* emit = protocols->add_subcommand("emit", "Print a protocol in the text format");
    emit->add_option("--protocol,-p", e_protocol, "Protocol file or builtin address")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run)
            return cmd_run(ro);
        if (*sweep)
            return cmd_sweep(so);
        if (*layers)
            return cmd_layers(l_protocol, l_start);
        if (*bounds)
            return cmd_bounds(b_protocol, b_start, b_fractions, b_n);
        if (*check)
            return cmd_check(c_protocol, c_config, c_n, c_max, c_strict);
        if (*list)
            return cmd_protocols_list();
        if (*emit)
            return cmd_protocols_emit(e_protocol);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
