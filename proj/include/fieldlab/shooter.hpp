#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fieldlab/nonlinearity.hpp"
#include "fieldlab/profile.hpp"

namespace fieldlab {

struct IntegratorOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    /// Defaults to 50/√(2ω).
    std::optional<double> max_radius;
    /// Defaults to 1e6·(1 + |s|).
    std::optional<double> blowup_bound;
    /// Largest accepted step, in units of the linear decay length 1/√(2ω).
    double max_step = 0.1;
    /// Stop once the trajectory has crossed zero more than this many times.
    std::optional<int> max_crossings;
    long max_steps = 10'000'000;
};

enum class TrajectoryKind { Decay, Trapped, Crossing };
enum class Termination { EnergyNegative, MaxRadius, Blowup, CrossingLimit };

struct Classification {
    TrajectoryKind kind;
    int crossings;

    bool operator==(const Classification&) const = default;
};

std::string to_string(const Classification& c);
std::string to_string(Termination t);

/// Solution of the radial initial value problem
///     v'' + (N-1)/r v' + f(v) = 0,  v(0) = s, v'(0) = 0.
/// Trapped(k) means the local energy E = ½v'² + F(v) went negative after k
/// zero crossings; E is nonincreasing along solutions, so no further zero can
/// follow. Crossing(k) means at least k crossings were seen when integration
/// stopped for another reason.
struct Trajectory {
    int dimension = 0;
    double shoot_height = 0.0;
    std::vector<double> radii;
    std::vector<double> values;
    std::vector<double> derivs;
    std::vector<double> crossing_radii;
    Classification classification{TrajectoryKind::Crossing, 0};
    Termination termination = Termination::MaxRadius;
};

/// Adaptive Dormand-Prince 5(4) integration. The first step off r = 0 uses
/// the series v(r) = s - f(s)r²/(2N) + f(s)f'(s)r⁴/(8N(N+2)) at
/// r = 1e-6·(1 + |s|).
Trajectory integrate_ivp(const Nonlinearity& f, int dimension, double s, const IntegratorOptions& opts = {});

struct ShootingOptions {
    IntegratorOptions integrator;
    /// Bisection stops when the bracket is narrower than this.
    double bisection_tol = 1e-13;
    int max_iterations = 200;
    /// Largest |v(R)|/max|v| accepted at the tail match radius.
    double tail_threshold = 1e-3;
    /// Relative size of the unstable mode tolerated at the match radius.
    double tail_margin = 1e-7;
    /// Multiplicative step of the upward scan in s used by solution_family.
    double scan_factor = 1.05;
    std::optional<double> scan_max;
    int family_cap = 8;
};

/// Bisects on the shoot height between a trajectory with exactly `nodes`
/// zero crossings and one with more, then attaches the analytic tail and the
/// norm cache. Bracket endpoints may be given in either order of magnitude
/// and either sign.
RadialProfile find_bound_state(NonlinearityPtr f, int dimension, int nodes, std::pair<double, double> bracket,
                               const ShootingOptions& opts = {});

struct SolutionFamily {
    std::vector<RadialProfile> profiles;
    std::vector<std::string> warnings;
    /// ‖∇v_n‖² strictly increasing along the family.
    bool gradient_order_strict = true;
};

/// Bound states v_1..v_{n_max} with 0..n_max-1 nodes, located by scanning the
/// shoot height upward from the dead-zone radius.
SolutionFamily solution_family(NonlinearityPtr f, int dimension, int n_max, const ShootingOptions& opts = {});

} // namespace fieldlab
