#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fieldlab/kirchhoff.hpp"
#include "fieldlab/nonlinearity.hpp"

namespace fieldlab {

enum class ConditionId {
    f0,
    f1p,
    f2,
    f3,
    M1,
    M2,
    M3,
    M2p,
    // Pointwise properties of the truncation envelopes.
    h_sandwich,
    h_nonneg,
    h_dead_zone,
    h_witness,
    hbar_ratio,
    H_sandwich,
    H_nonneg,
    H_dead_zone,
    Hbar_zeta_gap,
    Hbar_growth,
};

enum class Verdict { Holds, Fails, Inconclusive };

std::string_view to_string(ConditionId id);
std::string_view to_string(Verdict v);

struct ConditionReport {
    ConditionId condition_id;
    Verdict verdict;
    std::vector<std::pair<double, double>> evidence;
    std::string message;
};

/// Logarithmic sample of (0, ∞): points_per_decade points in each decade
/// between 10^lo_decade and 10^hi_decade.
struct SamplingGrid {
    int lo_decade = -6;
    int hi_decade = 6;
    int points_per_decade = 512;

    std::vector<double> points() const;
};

/// Checks (f0), (f'1), (f2) and (f3) on the sampling grid. Asymptotic
/// conditions are classified from the trend over the outer three decades and
/// come back Inconclusive rather than Holds when the trend is not monotone.
std::vector<ConditionReport> check_f_conditions(const Nonlinearity& f, int dimension,
                                                const SamplingGrid& grid = {});

/// Checks (M1), and for N ≥ 3 also (M2), (M3) and the multiplicity alternative
/// reported under M2p: "(M2) holds or limsup G(t) ≤ 0", with
/// G(t) = M̂(t) - (1 - 2/N) M(t) t.
std::vector<ConditionReport> check_m_conditions(const KirchhoffFunction& M, int dimension,
                                                const SamplingGrid& grid = {});

const ConditionReport& find_report(const std::vector<ConditionReport>& reports, ConditionId id);

} // namespace fieldlab
