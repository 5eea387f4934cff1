#pragma once

#include <optional>
#include <vector>

#include "fieldlab/nonlinearity.hpp"

namespace fieldlab {

/// Decaying tail attached beyond the last stored radius. The tail solves the
/// linearisation v'' + (N-1)/r v' = κ² v exactly:
///     v(r) = C · r^{-ν} K_ν(κ r),  ν = (N-2)/2,
/// which behaves like C' r^{-(N-1)/2} e^{-κr} for large r
/// (algebraic_power records that exponent).
struct TailModel {
    double match_radius = 0.0;
    double amplitude = 0.0;
    double decay_rate = 0.0;
    double algebraic_power = 0.0;

    double value(int dimension, double r) const;
    double derivative(int dimension, double r) const;
    double log_derivative(int dimension, double r) const;
};

/// Radially symmetric function sampled on [0, R] plus an analytic tail.
struct RadialProfile {
    int dimension = 3;
    std::vector<double> radii;
    std::vector<double> values;
    std::vector<double> derivs;
    int node_count = 0;
    double shoot_height = 0.0;
    std::optional<TailModel> tail;
    NonlinearityPtr f;

    // Norm cache; filled by attach_norms() and carried through exact rescaling.
    std::optional<double> grad_norm_sq;
    std::optional<double> l2_norm_sq;
    std::optional<double> integral_F;

    double value_at(double r) const;
    double max_abs() const;
};

/// Number of strict sign changes in a sample sequence (zeros are skipped).
int count_sign_changes(const std::vector<double>& values);

/// Throws InvariantViolation when a structural invariant is broken:
/// radii strictly increasing from 0, v'(0) = 0, node_count equal to the
/// sign-change count, positive tail decay rate.
void check_profile_invariants(const RadialProfile& p);

/// Tail with amplitude fitted to the last sample (value match).
TailModel fit_tail(int dimension, double match_radius, double value, double decay_rate);

/// Samples r ↦ (v(r), v'(r)) on n uniform points over [0, r_max] with a zero
/// tail; used for analytic test profiles.
RadialProfile sample_profile(int dimension, double r_max, std::size_t n, const RealMap& v, const RealMap& dv,
                             NonlinearityPtr f = nullptr);

} // namespace fieldlab
