#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fieldlab/kirchhoff.hpp"
#include "fieldlab/profile.hpp"
#include "json.hpp"

namespace fieldlab {

/// h(v,t) = M(t^{2-N}‖∇v‖²)·t². A root t gives the Kirchhoff solution
/// u(·) = v(t·) of -M(‖∇u‖²)Δu = f(u).
double transfer_map(const RadialProfile& v, const KirchhoffFunction& M, double t);

struct TransferOptions {
    double t_min = 1e-6;
    double t_max = 1e6;
    int panels = 200;
    /// While h(v, t_min) > 1 the lower end moves down by factors of 1e3, at
    /// the same panel density, but never below t_floor.
    double t_floor = 1e-30;
    /// Certificate on |h(v,t) - 1| for every reported root.
    double root_tol = 1e-10;
};

struct RootDiagnostics {
    double h_residual = 0.0;
    double strong_residual = 0.0;
    double nehari_residual = 0.0;
};

struct TransferResult {
    std::shared_ptr<const RadialProfile> source;
    double grad_norm_sq_v = 0.0;
    std::vector<double> roots;
    std::vector<RadialProfile> profiles;
    /// t_i^{2-N}·g for each root.
    std::vector<double> kirchhoff_grad_norms;
    std::vector<RootDiagnostics> diagnostics;
    /// Sign changes whose bisected root failed the certificate.
    std::vector<std::string> rejected;
};

/// Closed form t = M(g)^{-1/2} for N = 2; logarithmic scan plus bisection on
/// every sign change of h(v,·) - 1 otherwise. No root is a valid outcome.
/// Throws std::invalid_argument when M drops below its floor m0 > 0 at a
/// scanned argument, i.e. (M1) fails.
TransferResult solve_transfer(std::shared_ptr<const RadialProfile> v, const KirchhoffFunction& M,
                              const TransferOptions& opts = {});
TransferResult solve_transfer(const RadialProfile& v, const KirchhoffFunction& M, const TransferOptions& opts = {});

/// u(r) = v(t r) with the tail and cached norms rescaled exactly.
RadialProfile build_kt_solution(const RadialProfile& v, double t);

/// q_n = m0 / (1 + max_{i≤n} λ((2m0)^{(N-2)/2} g_i)) for M = m0 + qλ.
double q_threshold(const KirchhoffFunction& M, std::span<const RadialProfile> profiles, int n);

/// {n, q_n, g_values, formula_inputs}.
nlohmann::json threshold_report(const KirchhoffFunction& M, std::span<const RadialProfile> profiles, int n);

struct MultiplicityRow {
    double q = 0.0;
    /// Number of pairwise-distinct Kirchhoff gradient norms among all roots.
    int n_found = 0;
    std::vector<int> source_index;
    std::vector<double> t;
    std::vector<double> kt_grad;
    std::vector<double> J;
    std::string diagnostics;
};

struct MultiplicityTable {
    nlohmann::json family;
    std::vector<MultiplicityRow> rows;
    /// q_1..q_n when the family carries a decomposition and N ≥ 3.
    std::vector<double> q_thresholds;
};

/// Relative separation below which two gradient norms count as one solution.
inline constexpr double kDistinctRelSep = 1e-6;

/// Number of clusters of `values` at relative separation kDistinctRelSep.
int count_distinct(std::vector<double> values);

/// Runs solve_transfer for every profile at every q, in parallel over q.
/// Rows come back in q order; per-q failures become n_found = 0 plus a note.
MultiplicityTable multiplicity_sweep(const KirchhoffFamily& family, std::span<const RadialProfile> profiles,
                                     std::span<const double> q_grid, const TransferOptions& opts = {});

/// Columns q,n_found,t_1..t_k,kt_grad_1..kt_grad_k,J_1..J_k,diagnostics.
void write_sweep_csv(std::ostream& os, const MultiplicityTable& table);

} // namespace fieldlab
