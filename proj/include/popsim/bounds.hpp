#pragma once

#include "popsim/protocol.hpp"
#include "popsim/reachability.hpp"

#include <gmpxx.h>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace popsim {

using Rational = mpq_class;

/// Decimal rendering with `digits` significant digits, e.g. 5.49316406250e-4.
std::string to_decimal(const Rational& value, int digits = 12);

/// Exact "p/q" rendering.
std::string to_fraction_string(const Rational& value);

/// Parse "p/q", an integer, or a finite decimal such as "0.25" or "5.4932e-4"
/// exactly.
Rational parse_rational(const std::string& text);

/// Lower bounds c_i, c_j on the fractions of agents in the two source
/// states of a window; both strictly inside (0, 1).
class FractionPair {
public:
    FractionPair(Rational c_i, Rational c_j);

    const Rational& c_i() const noexcept { return c_i_; }
    const Rational& c_j() const noexcept { return c_j_; }
    Rational min() const { return c_i_ < c_j_ ? c_i_ : c_j_; }
    /// 5/256 c_i c_j min(c_i, c_j).
    Rational base_constant() const;

private:
    Rational c_i_;
    Rational c_j_;
};

enum class BoundForm { exact, floor };

/// ChooseNextPair calls per window, as a multiple of n: min(c_i, c_j)/4.
Rational window_calls_coefficient(const FractionPair& pair);

/// Fraction of agents guaranteed in the produced state after one window.
/// exact: c (3/5 - 3/4 min); floor: 9/40 c, with c = 5/256 c_i c_j min.
/// Throws VacuousBoundError when the exact form is not positive.
Rational window_fraction(const FractionPair& pair, BoundForm form);

/// Surviving fraction (1 - 3t) c_i of agents untouched during t n calls.
/// Throws VacuousBoundError for t >= 1/3.
Rational untouched_fraction(const Rational& c_i, const Rational& t);

struct FailureCoefficients {
    Rational const2;
    Rational const3;
    Rational const4;
    /// Smallest n with (1 - const2/n)(1 - const3/n) - const4/n > 0.
    mpz_class min_n_positive;
};

/// Chebyshev failure coefficients for one window. `survivors` are the
/// fractions of every state already populated before the window.
FailureCoefficients failure_coefficients(const FractionPair& pair, std::span<const Rational> survivors);

/// Success-probability lower bound of one window at population size n.
Rational window_success_bound(const FailureCoefficients& coeffs, const mpz_class& n);

/// ceil(1 / fraction): the population size at which the bound promises one
/// agent.
mpz_class min_population_threshold(const Rational& fraction);

struct StateFraction {
    StateId state;
    Rational fraction;
};

struct BoundWindow {
    LayerWitness witness;
    /// Source fractions; a same-state witness splits its fraction in half.
    FractionPair pair;
    bool split = false;
    Rational call_coefficient;
    Rational exact_fraction;
    Rational floor_fraction;
    /// Fraction assigned to the new state (exact form, floor on failure).
    Rational assigned;
    bool used_floor = false;
    std::vector<StateFraction> before;
    std::vector<StateFraction> after;
    FailureCoefficients failure;
};

struct BoundReport {
    StateId start;
    std::vector<BoundWindow> windows;
    /// layer_fractions[h]: every populated state's bound once layer h is done.
    std::vector<std::vector<StateFraction>> layer_fractions;
    std::vector<StateFraction> final_fractions;
    /// Coefficient of n in the total call budget T_calls.
    Rational t_calls;
    std::vector<std::pair<StateId, mpz_class>> thresholds;
};

/// Run the layer-by-layer induction: one window per new state in witness
/// order, shrinking every populated state by untouched_fraction. Vacuous
/// windows raise VacuousBoundError naming the window.
BoundReport propagate_bounds(const LayerStructure& layers, const std::map<StateId, Rational>& initial_fractions);

/// Structured text rendering; with `n`, also concrete counts per state.
std::string render_report(const ProtocolSpec& protocol, const BoundReport& report,
                          std::optional<std::uint64_t> n = std::nullopt);

} // namespace popsim
