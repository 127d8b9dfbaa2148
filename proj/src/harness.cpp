#include "popsim/harness.hpp"

#include "popsim/error.hpp"
#include "popsim/library.hpp"
#include "popsim/reachability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace popsim {

NSchedule NSchedule::arithmetic(std::uint64_t start, std::uint64_t step, std::uint64_t stop) {
    if (step == 0)
        throw Error("arithmetic schedule needs a positive step");
    NSchedule s;
    for (auto n = start; n <= stop; n += step)
        s.values.push_back(n);
    return s;
}

NSchedule NSchedule::doubling(std::uint64_t start, std::uint64_t stop) {
    if (start == 0)
        throw Error("doubling schedule needs a positive start");
    NSchedule s;
    for (auto n = start; n <= stop; n *= 2)
        s.values.push_back(n);
    return s;
}

NSchedule NSchedule::list(std::vector<std::uint64_t> values) {
    return NSchedule{std::move(values)};
}

void SweepSpec::validate() const {
    if (n.values.empty())
        throw Error("the n schedule is empty");
    for (std::size_t i = 0; i < n.values.size(); ++i) {
        if (n.values[i] == 0)
            throw Error("population sizes must be positive");
        if (i > 0 && n.values[i] <= n.values[i - 1])
            throw Error("the n schedule must be strictly increasing");
    }
    if (runs_per_n == 0)
        throw Error("runs_per_n must be at least 1");
    if (max_calls_factor == 0)
        throw Error("max_calls_factor must be positive");
}

FitResult fit_loglog(std::span<const std::pair<double, double>> n_and_mean) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [n, mean] : n_and_mean)
        if (n > 0 && mean > 0)
            pts.emplace_back(n, mean);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first == b.first; }), pts.end());
    if (pts.size() < 3)
        throw InsufficientDataError("log-log fit needs at least 3 distinct n with positive mean");

    double sx = 0, sy = 0;
    for (const auto& [n, m] : pts) {
        sx += std::log(n);
        sy += std::log(m);
    }
    const double k = static_cast<double>(pts.size());
    const double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [n, m] : pts) {
        const double dx = std::log(n) - mx, dy = std::log(m) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (const auto& [n, m] : pts) {
        const double r = std::log(m) - (fit.intercept + fit.slope * std::log(n));
        ss_res += r * r;
    }
    fit.r2 = syy == 0 ? 1.0 : 1.0 - ss_res / syy;
    fit.n_min = static_cast<std::uint64_t>(pts.front().first);
    fit.n_max = static_cast<std::uint64_t>(pts.back().first);
    return fit;
}

std::string Table::to_csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& row : rows)
        line(row);
    return out;
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

void write_csv(const std::string& dir, const std::string& name, const Table& table) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / (name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << table.to_csv();
}

namespace {

/// Runs fn(row) for every row on `workers` threads; results are stored by
/// row index so the output does not depend on scheduling.
template <class Row>
std::vector<Row> run_rows(std::size_t count, unsigned workers, const std::function<Row(std::size_t)>& fn) {
    std::vector<Row> rows(count);
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            rows[i] = fn(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        while (true) {
            auto i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                rows[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = count;
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, count); ++w)
        threads.emplace_back(worker);
    for (auto& t : threads)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    return rows;
}

struct RowKey {
    std::size_t n_index;
    std::uint64_t n;
    std::uint64_t run;
    std::uint64_t seed;
};

RowKey row_key(const SweepSpec& spec, std::size_t row) {
    const auto n_index = row / spec.runs_per_n;
    return {n_index, spec.n.values[n_index], row % spec.runs_per_n, derive_seed(spec.master_seed, row)};
}

struct Sample {
    double value = 0;
    bool flagged = false;
};

/// Means and deviations per n over unflagged samples, in schedule order.
std::vector<NSummary> summarize(const SweepSpec& spec, const std::vector<Sample>& samples) {
    std::vector<NSummary> out;
    for (std::size_t i = 0; i < spec.n.values.size(); ++i) {
        NSummary s;
        s.n = spec.n.values[i];
        std::vector<double> values;
        for (std::size_t r = 0; r < spec.runs_per_n; ++r) {
            const auto& sample = samples[i * spec.runs_per_n + r];
            if (sample.flagged)
                ++s.flagged;
            else
                values.push_back(sample.value);
        }
        s.runs = values.size();
        if (!values.empty()) {
            double sum = 0;
            for (double v : values)
                sum += v;
            s.mean = sum / static_cast<double>(values.size());
            double var = 0;
            for (double v : values)
                var += (v - s.mean) * (v - s.mean);
            s.stddev = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
        }
        out.push_back(std::move(s));
    }
    return out;
}

void finish(SweepResult& result, const SweepSpec& spec, const std::vector<Sample>& samples) {
    result.summary = summarize(spec, samples);
    result.total_rows = samples.size();
    result.flagged_rows = static_cast<std::uint64_t>(std::count_if(samples.begin(), samples.end(), [](auto& s) {
        return s.flagged;
    }));
    std::vector<std::pair<double, double>> points;
    for (const auto& s : result.summary)
        if (s.runs > 0)
            points.emplace_back(static_cast<double>(s.n), s.mean);
    try {
        result.fit = fit_loglog(points);
    } catch (const InsufficientDataError&) {
        result.fit.reset();
    }
}

RunConfig base_config(const std::shared_ptr<const ProtocolSpec>& protocol, const SweepSpec& spec,
                      const RowKey& key) {
    RunConfig cfg;
    cfg.protocol = protocol;
    cfg.initial = Configuration::uniform(protocol->num_states(), protocol->initial_state(), key.n);
    cfg.mode = spec.mode;
    cfg.seed = key.seed;
    cfg.max_calls = spec.max_calls_factor * key.n * key.n;
    return cfg;
}

std::uint64_t leader_count(const ProtocolSpec& protocol, const Configuration& config) {
    std::uint64_t total = 0;
    for (auto s : leader_states(protocol))
        total += config[s];
    return total;
}

std::uint64_t scaled_calls(double coefficient, std::uint64_t n) {
    if (!(coefficient >= 0))
        throw Error("call coefficient must be non-negative");
    return static_cast<std::uint64_t>(std::floor(coefficient * static_cast<double>(n)));
}

} // namespace

SweepResult sweep_final_leaders(int k, const SweepSpec& spec, Variant variant) {
    spec.validate();
    auto protocol = std::make_shared<const ProtocolSpec>(variant == Variant::base ? protocol_1(k)
                                                                                  : improved_protocol_1(k));
    const auto stop = StopCondition::first_state_entered("computation", computation_states(*protocol)) |
                      StopCondition::class_count("single-leader", leader_states(*protocol), 1);
    const std::string variant_name = variant == Variant::base ? "base" : "improved";

    struct Row {
        std::vector<std::string> cells;
        Sample sample;
    };
    const auto rows = run_rows<Row>(spec.n.values.size() * spec.runs_per_n, spec.workers, [&](std::size_t i) {
        auto key = row_key(spec, i);
        auto cfg = base_config(protocol, spec, key);
        cfg.stop = stop;
        auto result = run(std::move(cfg));
        auto leaders = leader_count(*protocol, result.final_config);
        return Row{{protocol->metadata().name, variant_name, std::to_string(k), std::to_string(key.n),
                    std::to_string(key.run), std::to_string(key.seed), std::to_string(result.calls_made),
                    std::to_string(result.interactions_made), std::to_string(leaders), result.stop_reason},
                   {static_cast<double>(leaders), result.stop_reason == "cap"}};
    });

    SweepResult result;
    result.name = "final_leaders";
    result.metric = "final_leaders_" + variant_name;
    result.table.header = {"protocol", "variant", "k", "n", "run", "seed", "calls", "interactions", "final_leaders",
                           "stop_reason"};
    std::vector<Sample> samples;
    for (const auto& r : rows) {
        result.table.rows.push_back(r.cells);
        samples.push_back(r.sample);
    }
    finish(result, spec, samples);
    return result;
}

SweepResult sweep_max_counter(int cap, const SweepSpec& spec) {
    spec.validate();
    auto protocol = std::make_shared<const ProtocolSpec>(unbounded_counter_variant(cap));
    const auto levels = timer_count_levels(*protocol);

    struct Row {
        std::vector<std::string> cells;
        Sample sample;
    };
    const auto rows = run_rows<Row>(spec.n.values.size() * spec.runs_per_n, spec.workers, [&](std::size_t i) {
        auto key = row_key(spec, i);
        auto cfg = base_config(protocol, spec, key);
        cfg.stop = StopCondition::class_count("single-leader", leader_states(*protocol), 1);
        cfg.state_level = levels;
        auto result = run(std::move(cfg));
        const auto max_counter = result.max_level.value_or(0);
        const bool saturated = max_counter >= cap;
        return Row{{protocol->metadata().name, std::to_string(cap), std::to_string(key.n), std::to_string(key.run),
                    std::to_string(key.seed), std::to_string(result.calls_made),
                    std::to_string(result.interactions_made), std::to_string(max_counter), saturated ? "1" : "0"},
                   {static_cast<double>(max_counter), saturated || result.stop_reason == "cap"}};
    });

    SweepResult result;
    result.name = "max_counter";
    result.metric = "max_counter";
    result.table.header = {"protocol", "cap", "n", "run", "seed", "calls", "interactions", "max_counter", "saturated"};
    std::vector<Sample> samples;
    for (const auto& r : rows) {
        result.table.rows.push_back(r.cells);
        samples.push_back(r.sample);
    }
    finish(result, spec, samples);
    return result;
}

SweepResult sweep_occupancy(const SweepSpec& spec, double call_coefficient) {
    spec.validate();
    auto protocol = std::make_shared<const ProtocolSpec>(load_protocol(spec.protocol));
    const auto reachable = reachable_states(*protocol, protocol->initial_state());
    const std::string coefficient = format_double(call_coefficient);

    struct Row {
        std::vector<std::vector<std::string>> lines;
        Sample sample;
        bool all_nonempty = false;
    };
    const auto rows = run_rows<Row>(spec.n.values.size() * spec.runs_per_n, spec.workers, [&](std::size_t i) {
        auto key = row_key(spec, i);
        auto cfg = base_config(protocol, spec, key);
        cfg.stop = StopCondition::fixed_calls(scaled_calls(call_coefficient, key.n));
        cfg.coverage = reachable;
        cfg.max_calls = std::max(*cfg.max_calls, scaled_calls(call_coefficient, key.n));
        auto result = run(std::move(cfg));
        Row row;
        double min_fraction = 1.0;
        bool all_nonempty = true;
        const auto coverage = result.first_full_coverage_call ? std::to_string(*result.first_full_coverage_call)
                                                              : std::string("NA");
        for (auto s : reachable) {
            const double fraction = static_cast<double>(result.final_config[s]) / static_cast<double>(key.n);
            min_fraction = std::min(min_fraction, fraction);
            all_nonempty = all_nonempty && result.final_config[s] > 0;
            row.lines.push_back({spec.protocol, std::to_string(key.n), std::to_string(key.run),
                                 std::to_string(key.seed), coefficient, protocol->name(s), format_double(fraction),
                                 coverage});
        }
        row.sample = {min_fraction, false};
        row.all_nonempty = all_nonempty;
        return row;
    });

    SweepResult result;
    result.name = "occupancy";
    result.metric = "min_fraction";
    result.table.header = {"protocol", "n", "run", "seed", "C", "state", "fraction_at_stop",
                           "first_full_coverage_call"};
    std::vector<Sample> samples;
    for (const auto& r : rows) {
        for (const auto& line : r.lines)
            result.table.rows.push_back(line);
        samples.push_back(r.sample);
    }
    finish(result, spec, samples);
    for (std::size_t i = 0; i < spec.n.values.size(); ++i) {
        std::uint64_t covered = 0;
        for (std::size_t r = 0; r < spec.runs_per_n; ++r)
            covered += rows[i * spec.runs_per_n + r].all_nonempty ? 1 : 0;
        result.summary[i].extra["all_nonempty_rate"] =
            static_cast<double>(covered) / static_cast<double>(spec.runs_per_n);
    }
    return result;
}

SweepResult sweep_stabilization(const SweepSpec& spec) {
    spec.validate();
    auto protocol = std::make_shared<const ProtocolSpec>(load_protocol(spec.protocol));
    const auto leaders = leader_states(*protocol);
    if (leaders.empty())
        throw Error("protocol has no leader-flagged (output 1) states");

    struct Row {
        std::vector<std::string> cells;
        Sample sample;
    };
    const auto rows = run_rows<Row>(spec.n.values.size() * spec.runs_per_n, spec.workers, [&](std::size_t i) {
        auto key = row_key(spec, i);
        auto cfg = base_config(protocol, spec, key);
        cfg.stop = StopCondition::class_count("single-leader", leaders, 1);
        auto result = run(std::move(cfg));
        return Row{{spec.protocol, std::to_string(key.n), std::to_string(key.run), std::to_string(key.seed),
                    std::to_string(result.interactions_made), result.stop_reason},
                   {static_cast<double>(result.interactions_made), result.stop_reason == "cap"}};
    });

    SweepResult result;
    result.name = "stabilization";
    result.metric = "interactions:" + spec.protocol;
    result.table.header = {"protocol", "n", "run", "seed", "interactions", "stop_reason"};
    std::vector<Sample> samples;
    for (const auto& r : rows) {
        result.table.rows.push_back(r.cells);
        samples.push_back(r.sample);
    }
    finish(result, spec, samples);
    return result;
}

SweepResult audit_confident_state(const SweepSpec& spec, const std::string& state,
                                  std::optional<double> call_coefficient) {
    spec.validate();
    auto protocol = std::make_shared<const ProtocolSpec>(load_protocol(spec.protocol));
    const auto target = protocol->at(state);
    const auto reachable = reachable_states(*protocol, protocol->initial_state());
    if (std::find(reachable.begin(), reachable.end(), target) == reachable.end())
        throw Error("state '" + state + "' is not reachable from the initial state");

    struct Row {
        std::vector<std::string> cells;
        Sample sample;
    };
    const auto rows = run_rows<Row>(spec.n.values.size() * spec.runs_per_n, spec.workers, [&](std::size_t i) {
        auto key = row_key(spec, i);
        auto cfg = base_config(protocol, spec, key);
        cfg.mode = Mode::agents;
        cfg.audited = {target};
        if (call_coefficient) {
            cfg.stop = StopCondition::fixed_calls(scaled_calls(*call_coefficient, key.n));
            cfg.max_calls = std::max(*cfg.max_calls, scaled_calls(*call_coefficient, key.n));
        } else {
            cfg.stop = StopCondition::first_state_entered("entered", {target});
        }
        auto result = run(std::move(cfg));
        auto visitors = distinct_visitors(result, target);
        return Row{{spec.protocol, state, std::to_string(key.n), std::to_string(key.run), std::to_string(key.seed),
                    std::to_string(visitors)},
                   {static_cast<double>(visitors), false}};
    });

    SweepResult result;
    result.name = "audit";
    result.metric = "distinct_visitors:" + state;
    result.table.header = {"protocol", "state", "n", "run", "seed", "distinct_visitors"};
    std::vector<Sample> samples;
    for (const auto& r : rows) {
        result.table.rows.push_back(r.cells);
        samples.push_back(r.sample);
    }
    finish(result, spec, samples);
    for (std::size_t i = 0; i < spec.n.values.size(); ++i) {
        std::uint64_t multi = 0;
        for (std::size_t r = 0; r < spec.runs_per_n; ++r)
            multi += samples[i * spec.runs_per_n + r].value >= 2 ? 1 : 0;
        result.summary[i].extra["multi_visitor_rate"] =
            static_cast<double>(multi) / static_cast<double>(spec.runs_per_n);
    }
    return result;
}

Table fits_table(std::span<const SweepResult> sweeps) {
    Table t;
    t.header = {"metric", "slope", "intercept", "r2", "n_min", "n_max"};
    for (const auto& s : sweeps)
        if (s.fit)
            t.rows.push_back({s.metric, format_double(s.fit->slope), format_double(s.fit->intercept),
                              format_double(s.fit->r2), std::to_string(s.fit->n_min), std::to_string(s.fit->n_max)});
    return t;
}

std::string render_svg(const SweepResult& sweep) {
    constexpr double width = 640, height = 420, margin = 60;
    std::vector<const NSummary*> pts;
    for (const auto& s : sweep.summary)
        if (s.runs > 0 && s.mean > 0)
            pts.push_back(&s);
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << margin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << sweep.metric
        << " (log-log)</text>\n";
    if (pts.empty()) {
        out << "</svg>\n";
        return out.str();
    }
    double x0 = std::log(static_cast<double>(pts.front()->n)), x1 = std::log(static_cast<double>(pts.back()->n));
    double y0 = INFINITY, y1 = -INFINITY;
    for (auto* p : pts) {
        y0 = std::min(y0, std::log(std::max(p->mean - p->stddev, p->mean / 10)));
        y1 = std::max(y1, std::log(p->mean + p->stddev));
    }
    if (x1 == x0)
        x1 = x0 + 1;
    if (y1 == y0)
        y1 = y0 + 1;
    auto px = [&](double n) { return margin + (std::log(n) - x0) / (x1 - x0) * (width - 2 * margin); };
    auto py = [&](double v) { return height - margin - (std::log(v) - y0) / (y1 - y0) * (height - 2 * margin); };
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
    for (auto* p : pts)
        out << px(static_cast<double>(p->n)) << ',' << py(p->mean) << ' ';
    out << "\"/>\n";
    for (auto* p : pts) {
        const double x = px(static_cast<double>(p->n));
        const double lo = std::max(p->mean - p->stddev, p->mean / 10);
        out << "<line x1=\"" << x << "\" y1=\"" << py(lo) << "\" x2=\"" << x << "\" y2=\"" << py(p->mean + p->stddev)
            << "\" stroke=\"gray\"/>\n"
            << "<circle cx=\"" << x << "\" cy=\"" << py(p->mean) << "\" r=\"3\" fill=\"steelblue\"/>\n"
            << "<text x=\"" << x << "\" y=\"" << height - margin + 16
            << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << p->n << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace popsim
