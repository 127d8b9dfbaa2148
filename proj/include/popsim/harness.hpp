#pragma once

#include "popsim/scheduler.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace popsim {

/// Population sizes of a sweep, strictly increasing.
struct NSchedule {
    std::vector<std::uint64_t> values;

    /// start, start + step, ... up to and including stop.
    static NSchedule arithmetic(std::uint64_t start, std::uint64_t step, std::uint64_t stop);
    /// start, 2 start, 4 start, ... up to and including stop.
    static NSchedule doubling(std::uint64_t start, std::uint64_t stop);
    static NSchedule list(std::vector<std::uint64_t> values);
};

struct SweepSpec {
    std::string protocol;
    NSchedule n;
    std::uint64_t runs_per_n = 20;
    Mode mode = Mode::agents;
    std::uint64_t master_seed = 1;
    /// Cap per run as a multiple of n^2 calls.
    std::uint64_t max_calls_factor = 64;
    unsigned workers = 1;

    /// Throws Error on an empty or non-increasing schedule or zero runs.
    void validate() const;
};

struct FitResult {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    std::uint64_t n_min = 0;
    std::uint64_t n_max = 0;
};

/// Ordinary least squares on (ln n, ln mean). Points with a non-positive
/// mean are skipped; fewer than 3 remaining distinct n raise
/// InsufficientDataError.
FitResult fit_loglog(std::span<const std::pair<double, double>> n_and_mean);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const;
};

/// Per-n aggregate of one metric over the unflagged runs.
struct NSummary {
    std::uint64_t n = 0;
    std::uint64_t runs = 0;
    std::uint64_t flagged = 0;
    double mean = 0;
    double stddev = 0;
    /// Experiment-specific rates, e.g. "all_nonempty_rate".
    std::map<std::string, double> extra;
};

struct SweepResult {
    /// CSV file stem: final_leaders, max_counter, occupancy, stabilization, audit.
    std::string name;
    /// Metric label used in fits.csv.
    std::string metric;
    Table table;
    std::vector<NSummary> summary;
    std::optional<FitResult> fit;
    std::uint64_t total_rows = 0;
    std::uint64_t flagged_rows = 0;

    double flagged_rate() const noexcept {
        return total_rows == 0 ? 0.0 : static_cast<double>(flagged_rows) / static_cast<double>(total_rows);
    }
};

enum class Variant { base, improved };

/// Leader count when the first leader enters the computation phase or a
/// single leader is left.
SweepResult sweep_final_leaders(int k, const SweepSpec& spec, Variant variant);

/// Highest timer_count ever reached before a single leader is left.
SweepResult sweep_max_counter(int cap, const SweepSpec& spec);

/// Occupancy of every reachable state after floor(C n) calls.
SweepResult sweep_occupancy(const SweepSpec& spec, double call_coefficient);

/// Interactions until a single leader (output-1 agent) is left.
SweepResult sweep_stabilization(const SweepSpec& spec);

/// Distinct agents that visited `state`. With call_coefficient set the run
/// lasts floor(C n) calls; otherwise it stops at the first entry into `state`.
SweepResult audit_confident_state(const SweepSpec& spec, const std::string& state,
                                  std::optional<double> call_coefficient);

/// fits.csv for the given sweeps (sweeps without a fit are skipped).
Table fits_table(std::span<const SweepResult> sweeps);

/// Deterministic double rendering used in every CSV.
std::string format_double(double value);

/// Write `<dir>/<name>.csv`; creates the directory if needed.
void write_csv(const std::string& dir, const std::string& name, const Table& table);

/// Minimal SVG chart: per-n means with deviation bars on log-log axes.
std::string render_svg(const SweepResult& sweep);

} // namespace popsim
