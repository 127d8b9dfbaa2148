#include "popsim/bounds.hpp"

#include "popsim/error.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

namespace popsim {

std::string to_decimal(const Rational& value, int digits) {
    if (value == 0)
        return "0";
    mpf_class f(value, 256);
    mp_exp_t exponent = 0;
    char* raw = mpf_get_str(nullptr, &exponent, 10, static_cast<std::size_t>(digits), f.get_mpf_t());
    std::string mantissa(raw);
    void (*free_fn)(void*, std::size_t);
    mp_get_memory_functions(nullptr, nullptr, &free_fn);
    free_fn(raw, std::strlen(raw) + 1);

    bool negative = !mantissa.empty() && mantissa[0] == '-';
    if (negative)
        mantissa.erase(0, 1);
    mantissa.resize(static_cast<std::size_t>(digits), '0');
    std::string out = negative ? "-" : "";
    out += mantissa.substr(0, 1);
    if (digits > 1)
        out += "." + mantissa.substr(1);
    out += "e" + std::to_string(static_cast<long>(exponent) - 1);
    return out;
}

std::string to_fraction_string(const Rational& value) {
    return value.get_str();
}

Rational parse_rational(const std::string& text) {
    if (text.empty())
        throw Error("empty number");
    if (text.find('/') != std::string::npos) {
        Rational r;
        if (text.find_first_not_of("-0123456789/") != std::string::npos || r.set_str(text, 10) != 0)
            throw Error("not a number: '" + text + "'");
        if (r.get_den() == 0)
            throw Error("zero denominator in '" + text + "'");
        r.canonicalize();
        return r;
    }
    // decimal with optional exponent: [-]digits[.digits][e[+-]digits]
    std::string mantissa = text;
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string::npos) {
        mantissa = text.substr(0, e);
        const std::string exp_text = text.substr(e + 1);
        std::size_t used = 0;
        try {
            exponent = std::stol(exp_text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (exp_text.empty() || used != exp_text.size())
            throw Error("not a number: '" + text + "'");
    }
    const bool negative = !mantissa.empty() && mantissa[0] == '-';
    if (negative)
        mantissa.erase(0, 1);
    const auto dot = mantissa.find('.');
    std::string digits = mantissa;
    if (dot != std::string::npos) {
        digits = mantissa.substr(0, dot) + mantissa.substr(dot + 1);
        exponent -= static_cast<long>(mantissa.size() - dot - 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw Error("not a number: '" + text + "'");
    mpz_class numerator(digits, 10);
    if (negative)
        numerator = -numerator;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    Rational r = exponent < 0 ? Rational(numerator, scale) : Rational(numerator * scale);
    r.canonicalize();
    return r;
}

FractionPair::FractionPair(Rational c_i, Rational c_j) : c_i_(std::move(c_i)), c_j_(std::move(c_j)) {
    if (c_i_ <= 0 || c_i_ >= 1 || c_j_ <= 0 || c_j_ >= 1)
        throw Error("fractions must lie strictly between 0 and 1, got (" + to_fraction_string(c_i_) + ", " +
                    to_fraction_string(c_j_) + ")");
}

Rational FractionPair::base_constant() const {
    return Rational(5, 256) * c_i_ * c_j_ * min();
}

Rational window_calls_coefficient(const FractionPair& pair) {
    return pair.min() / 4;
}

Rational window_fraction(const FractionPair& pair, BoundForm form) {
    const Rational c = pair.base_constant();
    if (form == BoundForm::floor)
        return Rational(9, 40) * c;
    Rational exact = c * (Rational(3, 5) - Rational(3, 4) * pair.min());
    if (exact <= 0)
        throw VacuousBoundError("exact window bound is not positive (min(c_i, c_j) >= 4/5)",
                                to_fraction_string(exact));
    return exact;
}

Rational untouched_fraction(const Rational& c_i, const Rational& t) {
    if (t >= Rational(1, 3))
        throw VacuousBoundError("untouched-agent bound needs t < 1/3", to_fraction_string(1 - 3 * t));
    return (1 - 3 * t) * c_i;
}

Rational window_success_bound(const FailureCoefficients& coeffs, const mpz_class& n) {
    Rational nn(n);
    return (1 - coeffs.const2 / nn) * (1 - coeffs.const3 / nn) - coeffs.const4 / nn;
}

FailureCoefficients failure_coefficients(const FractionPair& pair, std::span<const Rational> survivors) {
    const Rational min = pair.min();
    const Rational cc = pair.c_i() * pair.c_j();
    const Rational c = pair.base_constant();
    const Rational deviation = 1024 * (1 - cc / 16) / (min * cc);
    FailureCoefficients out;
    out.const3 = deviation;
    out.const2 = deviation + 8 * (1 - c) / (c * min) + deviation;
    out.const4 = 0;
    for (const auto& s : survivors)
        out.const4 += 2 * (1 - s) / (min / 4 * s);

    // n^2 - (a + b + c) n + a b > 0 holds beyond the larger root.
    const Rational sum = out.const2 + out.const3 + out.const4;
    const Rational disc = sum * sum - 4 * out.const2 * out.const3;
    const mp_bitcnt_t precision =
        std::max<mp_bitcnt_t>(256, 2 * mpz_sizeinbase(sum.get_num_mpz_t(), 2) + 64);
    mpf_class root = (mpf_class(sum, precision) + sqrt(mpf_class(disc, precision))) / 2;
    mpz_class candidate(floor(root));
    candidate += 1;
    while (candidate > 1 && window_success_bound(out, candidate - 1) > 0)
        candidate -= 1;
    while (window_success_bound(out, candidate) <= 0)
        candidate += 1;
    out.min_n_positive = candidate;
    return out;
}

mpz_class min_population_threshold(const Rational& fraction) {
    if (fraction <= 0 || fraction >= 1)
        throw Error("fraction must lie strictly between 0 and 1");
    Rational inv = 1 / fraction;
    mpz_class q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), inv.get_num_mpz_t(), inv.get_den_mpz_t());
    if (r != 0)
        q += 1;
    return q;
}

namespace {

std::vector<StateFraction> snapshot(const std::map<StateId, Rational>& fractions) {
    std::vector<StateFraction> out;
    for (const auto& [s, f] : fractions)
        out.push_back({s, f});
    return out;
}

} // namespace

BoundReport propagate_bounds(const LayerStructure& layers, const std::map<StateId, Rational>& initial_fractions) {
    BoundReport report;
    report.start = layers.start;
    std::map<StateId, Rational> fractions;
    for (const auto& [s, f] : initial_fractions) {
        if (f == 0)
            continue;
        if (f < 0 || f > 1)
            throw Error("initial fractions must lie in (0, 1]");
        if (std::find(layers.layers.front().begin(), layers.layers.front().end(), s) == layers.layers.front().end())
            throw Error("initial fractions must be zero outside F_0");
        fractions[s] = f;
    }
    if (fractions.empty())
        throw Error("no initial fraction on F_0");
    report.t_calls = 0;
    report.layer_fractions.push_back(snapshot(fractions));

    for (std::size_t layer = 1; layer < layers.layers.size(); ++layer) {
        for (const auto& w : layers.added_at(layer)) {
            const std::string where = "window for state #" + std::to_string(w.state.index) + " (layer " +
                                      std::to_string(layer) + ")";
            auto source = [&](StateId s) -> const Rational& {
                auto it = fractions.find(s);
                if (it == fractions.end())
                    throw Error(where + ": source state has no fraction yet");
                return it->second;
            };
            const bool split = w.initiator == w.responder;
            std::optional<FractionPair> pair;
            try {
                pair = split ? FractionPair(source(w.initiator) / 2, source(w.initiator) / 2)
                             : FractionPair(source(w.initiator), source(w.responder));
            } catch (const VacuousBoundError&) {
                throw;
            } catch (const Error& e) {
                throw VacuousBoundError(where + ": " + e.what(), "n/a");
            }

            BoundWindow window{w, *pair, split, window_calls_coefficient(*pair), 0, 0, 0, false, {}, {}, {}};
            window.floor_fraction = window_fraction(*pair, BoundForm::floor);
            try {
                window.exact_fraction = window_fraction(*pair, BoundForm::exact);
                window.assigned = window.exact_fraction;
            } catch (const VacuousBoundError&) {
                window.exact_fraction = pair->base_constant() * (Rational(3, 5) - Rational(3, 4) * pair->min());
                window.assigned = window.floor_fraction;
                window.used_floor = true;
            }
            window.before = snapshot(fractions);

            std::vector<Rational> survivors;
            for (const auto& [_, f] : fractions)
                survivors.push_back(f);
            window.failure = failure_coefficients(*pair, survivors);

            for (auto& [s, f] : fractions) {
                try {
                    f = untouched_fraction(f, window.call_coefficient);
                } catch (const VacuousBoundError& e) {
                    throw VacuousBoundError(where + ": " + e.what(), e.raw_value());
                }
            }
            fractions[w.state] = window.assigned;
            window.after = snapshot(fractions);
            report.t_calls += window.call_coefficient;
            report.windows.push_back(std::move(window));
        }
        report.layer_fractions.push_back(snapshot(fractions));
    }

    report.final_fractions = snapshot(fractions);
    for (const auto& [s, f] : fractions)
        report.thresholds.emplace_back(s, f < 1 ? min_population_threshold(f) : mpz_class(1));
    return report;
}

std::string render_report(const ProtocolSpec& protocol, const BoundReport& report, std::optional<std::uint64_t> n) {
    std::ostringstream out;
    auto fractions_line = [&](const std::vector<StateFraction>& fs) {
        std::string line;
        for (const auto& sf : fs) {
            if (!line.empty())
                line += ", ";
            line += protocol.name(sf.state) + "=" + to_decimal(sf.fraction);
        }
        return line;
    };

    out << "bounds start=" << protocol.name(report.start) << " windows=" << report.windows.size() << '\n';
    for (std::size_t i = 0; i < report.windows.size(); ++i) {
        const auto& w = report.windows[i];
        out << "\n[window " << i + 1 << "]\n"
            << "layer: " << w.witness.layer << '\n'
            << "state: " << protocol.name(w.witness.state) << '\n'
            << "witness: " << protocol.name(w.witness.initiator) << ' ' << protocol.name(w.witness.responder)
            << " position " << w.witness.position << '\n'
            << "pair: c_i=" << to_decimal(w.pair.c_i()) << " c_j=" << to_decimal(w.pair.c_j())
            << (w.split ? " (same-state split)" : "") << '\n'
            << "call_coefficient: " << to_fraction_string(w.call_coefficient) << " = "
            << to_decimal(w.call_coefficient) << '\n'
            << "fraction_exact: " << to_decimal(w.exact_fraction) << '\n'
            << "fraction_floor: " << to_decimal(w.floor_fraction) << '\n'
            << "fraction_assigned: " << to_decimal(w.assigned) << (w.used_floor ? " (floor)" : " (exact)") << '\n'
            << "before: " << fractions_line(w.before) << '\n'
            << "after: " << fractions_line(w.after) << '\n'
            << "const2: " << to_decimal(w.failure.const2) << '\n'
            << "const3: " << to_decimal(w.failure.const3) << '\n'
            << "const4: " << to_decimal(w.failure.const4) << '\n'
            << "min_n_positive: " << w.failure.min_n_positive.get_str() << '\n';
    }
    out << "\n[summary]\n"
        << "t_calls_coefficient: " << to_fraction_string(report.t_calls) << " = " << to_decimal(report.t_calls)
        << '\n';
    for (std::size_t h = 0; h < report.layer_fractions.size(); ++h)
        out << "layer " << h << ": " << fractions_line(report.layer_fractions[h]) << '\n';
    for (std::size_t i = 0; i < report.final_fractions.size(); ++i) {
        const auto& sf = report.final_fractions[i];
        out << "state " << protocol.name(sf.state) << " fraction=" << to_decimal(sf.fraction)
            << " threshold=" << report.thresholds[i].second.get_str();
        if (n) {
            Rational expected = sf.fraction * Rational(mpz_class(std::to_string(*n)));
            mpz_class agents(expected.get_num() / expected.get_den());
            out << " agents_at_n=" << agents.get_str() << (expected >= 1 ? " ok" : " below-1");
        }
        out << '\n';
    }
    return out.str();
}

} // namespace popsim
