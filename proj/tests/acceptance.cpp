// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "oracle.hpp"

#include "popsim/bounds.hpp"
#include "popsim/harness.hpp"
#include "popsim/library.hpp"
#include "popsim/reachability.hpp"
#include "popsim/rng.hpp"
#include "popsim/scheduler.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

using namespace popsim;

namespace {

constexpr double kSignificance = 1e-3;
constexpr unsigned kWorkers = 1;
constexpr unsigned kOtherWorkers = 4;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

double chi2_upper(double statistic, double df) {
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), statistic));
}

SweepSpec spec_for(std::string protocol, std::vector<std::uint64_t> n, std::uint64_t runs, unsigned workers) {
    SweepSpec s;
    s.protocol = std::move(protocol);
    s.n = NSchedule::list(std::move(n));
    s.runs_per_n = runs;
    s.workers = workers;
    return s;
}

/// Every sweep the criteria use, so criterion 10 can rerun them verbatim.
struct Sweeps {
    SweepResult fig31_base, fig31_improved, fig51, stab_elim, stab_p1, occupancy, audit;
};

Sweeps run_sweeps(unsigned workers) {
    Sweeps s;
    auto fig31 = spec_for("", NSchedule::doubling(100, 12800).values, 20, workers);
    s.fig31_base = sweep_final_leaders(4, fig31, Variant::base);
    s.fig31_improved = sweep_final_leaders(4, fig31, Variant::improved);
    s.fig51 = sweep_max_counter(64, spec_for("", {16, 64, 256, 1024, 4096}, 20, workers));
    s.stab_elim = sweep_stabilization(spec_for("builtin:elim", {64, 128, 256, 512, 1024}, 20, workers));
    s.stab_p1 = sweep_stabilization(spec_for("builtin:protocol1?k=4", {64, 128, 256, 512, 1024}, 20, workers));
    s.occupancy = sweep_occupancy(spec_for("builtin:ladder?m=4", {1000, 10000, 100000}, 20, workers), 10.0);
    s.audit = audit_confident_state(spec_for("builtin:ladder?m=3", {100, 1000, 10000}, 50, workers), "s2", 10.0);
    return s;
}

Outcome scheduler_uniformity() {
    const std::size_t n = 5;
    const std::uint64_t calls = 1'000'000;
    Rng rng(20240601);
    std::vector<std::uint64_t> freq(n * n, 0);
    std::uint64_t noop = 0;
    for (std::uint64_t i = 0; i < calls; ++i) {
        auto d = choose_next_pair(rng, n);
        if (!d)
            ++noop;
        else
            ++freq[d->initiator * n + d->responder];
    }
    const double interactions = static_cast<double>(calls - noop);
    const double expected = interactions / static_cast<double>(n * (n - 1));
    double chi2 = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b)
                chi2 += std::pow(static_cast<double>(freq[a * n + b]) - expected, 2) / expected;
    const double p = chi2_upper(chi2, static_cast<double>(n * (n - 1) - 1));
    const double mean = static_cast<double>(calls) / n;
    const double sigma = std::sqrt(static_cast<double>(calls) * (1.0 / n) * (1.0 - 1.0 / n));
    const double z = (static_cast<double>(noop) - mean) / sigma;
    return {p >= kSignificance && std::abs(z) <= 3.0,
            fmt("chi2=%.2f df=19 p=%.4f; no-op rate=%.6f z=%.2f", chi2, p, noop / static_cast<double>(calls), z)};
}

Outcome mode_equivalence() {
    auto p = load_protocol(std::string(POPSIM_FIXTURE_DIR) + "/majority.pp");
    const Configuration config({2, 3, 1});
    const std::size_t q = p.num_states();
    const std::uint64_t draws = 1'000'000;
    // category q*q is the no-op
    std::vector<double> counts_mode(q * q + 1, 0), agents_mode(q * q + 1, 0);

    Rng rc(101);
    CountIndex index(config);
    for (std::uint64_t i = 0; i < draws; ++i) {
        auto d = index.draw(rc);
        counts_mode[d ? d->first.index * q + d->second.index : q * q] += 1;
    }
    Rng ra(202);
    auto pop = AgentPopulation::from_configuration(config);
    for (std::uint64_t i = 0; i < draws; ++i) {
        auto d = choose_next_pair(ra, pop.n());
        agents_mode[d ? pop[d->initiator].index * q + pop[d->responder].index : q * q] += 1;
    }
    double chi2 = 0;
    int categories = 0;
    for (std::size_t k = 0; k < counts_mode.size(); ++k) {
        const double total = counts_mode[k] + agents_mode[k];
        if (total == 0)
            continue;
        ++categories;
        const double e = total / 2;
        chi2 += std::pow(counts_mode[k] - e, 2) / e + std::pow(agents_mode[k] - e, 2) / e;
    }
    const double p_value = chi2_upper(chi2, categories - 1);
    return {p_value >= kSignificance, fmt("chi2=%.2f df=%d p=%.4f over %d categories", chi2, categories - 1,
                                          p_value, categories)};
}

Outcome figure31(const Sweeps& s) {
    const auto& base = s.fig31_base;
    const auto& improved = s.fig31_improved;
    if (!base.fit || !improved.fit)
        return {false, "missing fit"};
    auto slope_ok = [](const FitResult& f) { return f.slope >= 0.8 && f.slope <= 1.2 && f.r2 >= 0.95; };
    std::size_t better = 0;
    for (std::size_t i = 0; i < base.summary.size(); ++i)
        better += improved.summary[i].mean <= base.summary[i].mean ? 1 : 0;
    const double share = static_cast<double>(better) / static_cast<double>(base.summary.size());
    return {slope_ok(*base.fit) && slope_ok(*improved.fit) && share >= 0.7,
            fmt("base slope=%.4f r2=%.4f; improved slope=%.4f r2=%.4f; improved<=base at %.0f%% of n",
                base.fit->slope, base.fit->r2, improved.fit->slope, improved.fit->r2, 100 * share)};
}

Outcome figure51(const Sweeps& s) {
    if (!s.fig51.fit)
        return {false, "missing fit"};
    return {s.fig51.fit->slope <= 0.5,
            fmt("slope=%.4f r2=%.4f flagged=%llu", s.fig51.fit->slope, s.fig51.fit->r2,
                static_cast<unsigned long long>(s.fig51.flagged_rows))};
}

Outcome stabilization(const Sweeps& s) {
    if (!s.stab_elim.fit || !s.stab_p1.fit)
        return {false, "missing fit"};
    auto ok = [](const FitResult& f) { return f.slope >= 1.8 && f.slope <= 2.2; };
    return {ok(*s.stab_elim.fit) && ok(*s.stab_p1.fit),
            fmt("elim slope=%.4f; protocol1(k=4) slope=%.4f", s.stab_elim.fit->slope, s.stab_p1.fit->slope)};
}

Outcome occupancy(const Sweeps& s) {
    bool ok = true;
    std::string rates;
    for (const auto& sum : s.occupancy.summary) {
        const double rate = sum.extra.at("all_nonempty_rate");
        ok = ok && rate >= 0.95;
        rates += fmt("n=%llu:%.2f ", static_cast<unsigned long long>(sum.n), rate);
    }
    const double m4 = s.occupancy.summary[1].mean, m5 = s.occupancy.summary[2].mean;
    const double ratio = m5 / m4;
    ok = ok && m4 > 0 && ratio >= 0.5 && ratio <= 2.0;
    return {ok, fmt("all-nonempty %smin fraction 1e4=%.5f 1e5=%.5f ratio=%.3f", rates.c_str(), m4, m5, ratio)};
}

Outcome bound_goldens() {
    Rational golden_value(45, 81920);
    golden_value.canonicalize();
    const Rational half(1, 2);
    const auto f = window_fraction(FractionPair(half, half), BoundForm::exact);
    const bool golden = f == golden_value;

    const Rational compound = Rational(9, 40) * Rational(5, 256) * Rational(1, 8);
    const mpz_class threshold = min_population_threshold(compound * compound * compound);
    const double t = threshold.get_d();
    const bool cubed = compound == golden_value && t > 6.0e9 && t < 6.1e9;

    auto p = ladder_protocol(2);
    auto report = propagate_bounds(compute_layers(p, p.at("s0")), {{p.at("s0"), Rational(1)}});
    Rational s0 = -1;
    for (const auto& sf : report.final_fractions)
        if (sf.state == p.at("s0"))
            s0 = sf.fraction;
    const bool ladder = report.t_calls == Rational(1, 8) && s0 == Rational(5, 8);
    return {golden && cubed && ladder,
            fmt("window fraction=%s (45/81920); threshold=%s; ladder(2) T_calls=%s s0=%s", f.get_str().c_str(),
                threshold.get_str().c_str(), report.t_calls.get_str().c_str(), s0.get_str().c_str())};
}

Outcome oracle_equivalence() {
    std::vector<std::pair<std::string, ProtocolSpec>> fixtures;
    for (const auto& b : builtin_catalog()) {
        for (int m = 1; m <= 4; ++m) {
            auto p = builtin_protocol(b.name == "ladder" ? "builtin:ladder?m=" + std::to_string(m) : b.example);
            if (p.num_states() <= 4 && (b.name == "ladder" || m == 1))
                fixtures.emplace_back(b.name + (b.name == "ladder" ? std::to_string(m) : ""), p);
        }
    }
    std::size_t configs = 0;
    std::string failures;
    for (const auto& [name, p] : fixtures) {
        std::set<std::uint32_t> layers;
        for (auto s : reachable_states(p, p.initial_state()))
            layers.insert(s.index);
        std::set<std::uint32_t> seen_all;
        for (std::uint64_t n = 1; n <= 6; ++n) {
            oracle::Counts start(p.num_states(), 0);
            start[p.initial_state().index] = n;
            auto seen = oracle::occupied(oracle::explore(p, start));
            if (!std::includes(layers.begin(), layers.end(), seen.begin(), seen.end()))
                failures += name + " escapes layers at n=" + std::to_string(n) + "; ";
            seen_all.insert(seen.begin(), seen.end());
            for (const auto& c : oracle::compositions(p.num_states(), n)) {
                ++configs;
                const bool stable = std::holds_alternative<StableConsensus>(is_stable_consensus(p, Configuration(c)));
                if (stable != oracle::stable(p, c))
                    failures += name + " consensus mismatch; ";
            }
        }
        if (seen_all != layers)
            failures += name + " reachable set differs; ";
    }
    return {failures.empty(), fmt("%zu protocols, %zu configurations checked%s%s", fixtures.size(), configs,
                                  failures.empty() ? "" : ": ", failures.c_str())};
}

Outcome audit(const Sweeps& s) {
    bool ok = true;
    double last = -1;
    std::string rates;
    for (const auto& sum : s.audit.summary) {
        const double rate = sum.extra.at("multi_visitor_rate");
        ok = ok && rate >= last;
        last = rate;
        rates += fmt("n=%llu:%.2f ", static_cast<unsigned long long>(sum.n), rate);
    }
    ok = ok && last >= 0.95;
    return {ok, "P(visitors>=2) " + rates};
}

Outcome determinism(const Sweeps& first) {
    const auto again = run_sweeps(kOtherWorkers);
    auto csv_of = [](const Sweeps& s) {
        std::vector<SweepResult> all{s.fig31_base, s.fig31_improved, s.fig51, s.stab_elim,
                                     s.stab_p1,    s.occupancy,      s.audit};
        std::vector<std::string> out;
        for (const auto& r : all)
            out.push_back(r.table.to_csv());
        out.push_back(fits_table(all).to_csv());
        return out;
    };
    auto a = csv_of(first), b = csv_of(again);
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        same += a[i] == b[i] ? 1 : 0;
    return {same == a.size(), fmt("%zu/%zu CSV files byte-identical (workers %u vs %u)", same, a.size(), kWorkers,
                                  kOtherWorkers)};
}

} // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %2d %-28s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    };

    report(1, "scheduler uniformity", scheduler_uniformity);
    report(2, "mode equivalence", mode_equivalence);

    Sweeps sweeps;
    bool sweeps_ok = true;
    std::string sweep_error;
    try {
        sweeps = run_sweeps(kWorkers);
    } catch (const std::exception& e) {
        sweeps_ok = false;
        sweep_error = e.what();
    }
    auto needs_sweeps = [&](auto fn) {
        return [&, fn]() -> Outcome {
            if (!sweeps_ok)
                return {false, "sweep failed: " + sweep_error};
            return fn(sweeps);
        };
    };

    report(3, "figure 3.1 trend", needs_sweeps(figure31));
    report(4, "figure 5.1 trend", needs_sweeps(figure51));
    report(5, "stabilization scaling", needs_sweeps(stabilization));
    report(6, "occupancy", needs_sweeps(occupancy));
    report(7, "bound calculator goldens", bound_goldens);
    report(8, "small-n oracle equivalence", oracle_equivalence);
    report(9, "distinct-visitor audit", needs_sweeps(audit));
    report(10, "determinism", needs_sweeps(determinism));

    std::printf("%d of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
