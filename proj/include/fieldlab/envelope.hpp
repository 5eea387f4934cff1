#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "fieldlab/conditions.hpp"
#include "fieldlab/nonlinearity.hpp"

namespace fieldlab {

/// Truncation envelopes of a nonlinearity:
///   h(t)    = max{ωt + f(t), 0}                     (t ≥ 0, odd extension)
///   hbar(t) = t^{p0} · max_{0<τ≤t} h(τ)/τ^{p0}        (odd extension)
///   H, Hbar = antiderivatives of h, hbar.
///
/// All four are sampled on a monotone grid starting at 0. Between grid points
/// h is evaluated exactly. Between grid points hbar(t) = t^{p0}·r(t) where
/// r is h(t)/t^{p0} clamped to the running maxima at the two neighbouring
/// samples; this keeps hbar continuous, which the shooter needs. H, Hbar
/// interpolate linearly between the cumulative trapezoid sums. Past
/// the last grid point Hbar is continued with the frozen ratio; H is not
/// defined there.
class Envelope {
public:
    /// Assemble from raw samples. Used by build_envelope and by test fixtures
    /// that need an envelope with deliberately altered hbar.
    Envelope(NonlinearityPtr f, double p0, double delta, std::vector<double> grid, std::vector<double> h,
             std::vector<double> hbar);

    double omega() const { return f_->omega(); }
    double p0() const { return p0_; }
    double delta() const { return delta_; }
    const Nonlinearity& source() const { return *f_; }
    const NonlinearityPtr& source_ptr() const { return f_; }

    double h(double t) const;
    double hbar(double t) const;
    double H(double t) const;
    double Hbar(double t) const;

    std::span<const double> grid() const { return grid_; }
    std::span<const double> h_samples() const { return h_; }
    std::span<const double> hbar_samples() const { return hbar_; }
    std::span<const double> H_samples() const { return H_; }
    std::span<const double> Hbar_samples() const { return Hbar_; }
    /// Accumulated trapezoid error bound for H and Hbar at each grid point.
    std::span<const double> quadrature_error() const { return qerr_; }

    /// CSV with header t,h,hbar,H,Hbar and 17 significant digits.
    void write_csv(std::ostream& os) const;

private:
    std::size_t segment(double t) const;
    double interp(const std::vector<double>& y, double t) const;

    NonlinearityPtr f_;
    double p0_;
    double delta_;
    std::vector<double> grid_, h_, hbar_, ratio_, H_, Hbar_, qerr_;
};

/// Midpoint of the admissible p0 interval: ½(1 + (N+2)/(N-2)) for N ≥ 3, 3 for N = 2.
double default_p0(int dimension);

/// First positive zero of ωt + f(t), i.e. the radius of the interval on which
/// h and hbar vanish.
double dead_zone(const Nonlinearity& f);

/// n uniformly spaced points on [0, t_max].
std::vector<double> uniform_grid(double t_max, std::size_t n);

Envelope build_envelope(NonlinearityPtr f, double p0, std::span<const double> grid, int dimension);

/// Pointwise checks of the envelope properties (h_sandwich .. Hbar_growth) on the build grid.
std::vector<ConditionReport> verify_envelope_lemmas(const Envelope& e, const Nonlinearity& f);

/// Nonlinearity of the auxiliary problem -m0 Δu + ωu = hbar(u), rewritten as
/// -Δu = f_A(u) with f_A(t) = (hbar(t) - ωt)/m0 and ω_A = ω/(2 m0).
NonlinearityPtr aux_problem_nonlinearity(const Envelope& e, double m0);

} // namespace fieldlab
