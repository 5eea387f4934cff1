#include "fieldlab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fieldlab/errors.hpp"

namespace fieldlab {

namespace {

// Beyond this argument K_ν underflows; the tail is zero to double precision.
constexpr double kBesselCutoff = 700.0;

double order(int dimension) { return 0.5 * double(dimension - 2); }

} // namespace

double TailModel::value(int dimension, double r) const
{
    const double x = decay_rate * r;
    if (amplitude == 0.0 || x > kBesselCutoff)
        return 0.0;
    const double nu = order(dimension);
    return amplitude * std::pow(r, -nu) * std::cyl_bessel_k(nu, x);
}

double TailModel::derivative(int dimension, double r) const
{
    const double x = decay_rate * r;
    if (amplitude == 0.0 || x > kBesselCutoff)
        return 0.0;
    const double nu = order(dimension);
    return -amplitude * decay_rate * std::pow(r, -nu) * std::cyl_bessel_k(nu + 1.0, x);
}

double TailModel::log_derivative(int dimension, double r) const
{
    const double nu = order(dimension);
    const double x = decay_rate * r;
    return -decay_rate * std::cyl_bessel_k(nu + 1.0, x) / std::cyl_bessel_k(nu, x);
}

TailModel fit_tail(int dimension, double match_radius, double value, double decay_rate)
{
    if (!(decay_rate > 0.0) || !(match_radius > 0.0))
        throw std::invalid_argument("fit_tail: need positive decay rate and match radius");
    TailModel t;
    t.match_radius = match_radius;
    t.decay_rate = decay_rate;
    t.algebraic_power = 0.5 * double(dimension - 1);
    t.amplitude = 1.0;
    t.amplitude = value / t.value(dimension, match_radius);
    return t;
}

double RadialProfile::value_at(double r) const
{
    if (radii.empty())
        return 0.0;
    if (r >= radii.back())
        return tail ? tail->value(dimension, r) : 0.0;
    auto it = std::upper_bound(radii.begin(), radii.end(), r);
    const std::size_t i = it == radii.begin() ? 0 : std::size_t(it - radii.begin()) - 1;
    // Cubic Hermite on [r_i, r_{i+1}].
    const double h = radii[i + 1] - radii[i];
    const double s = (r - radii[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * values[i] + h10 * h * derivs[i] + h01 * values[i + 1] + h11 * h * derivs[i + 1];
}

double RadialProfile::max_abs() const
{
    double m = 0.0;
    for (double v : values)
        m = std::max(m, std::abs(v));
    return m;
}

int count_sign_changes(const std::vector<double>& values)
{
    int count = 0;
    double last = 0.0;
    for (double v : values) {
        if (v == 0.0)
            continue;
        if (last != 0.0 && (v > 0.0) != (last > 0.0))
            ++count;
        last = v;
    }
    return count;
}

void check_profile_invariants(const RadialProfile& p)
{
    auto fail = [](const std::string& what) { throw InvariantViolation("radial profile: " + what); };
    const std::size_t n = p.radii.size();
    if (n < 3 || p.values.size() != n || p.derivs.size() != n)
        fail("sample arrays must have equal length >= 3");
    if (p.dimension < 2)
        fail("dimension must be >= 2");
    if (p.radii[0] != 0.0)
        fail("radii must start at 0");
    for (std::size_t i = 1; i < n; ++i)
        if (!(p.radii[i] > p.radii[i - 1]))
            fail("radii must be strictly increasing");
    if (p.derivs[0] != 0.0)
        fail("v'(0) must vanish");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(p.values[i]) || !std::isfinite(p.derivs[i]))
            fail("non-finite sample");
    const int nodes = count_sign_changes(p.values);
    if (nodes != p.node_count) {
        std::ostringstream msg;
        msg << "node_count " << p.node_count << " but samples change sign " << nodes << " times";
        fail(msg.str());
    }
    if (p.tail && !(p.tail->decay_rate > 0.0))
        fail("tail decay rate must be positive");
}

RadialProfile sample_profile(int dimension, double r_max, std::size_t n, const RealMap& v, const RealMap& dv,
                             NonlinearityPtr f)
{
    if (n < 3 || !(r_max > 0.0))
        throw std::invalid_argument("sample_profile: need n >= 3 and r_max > 0");
    RadialProfile p;
    p.dimension = dimension;
    p.f = std::move(f);
    p.radii.resize(n);
    p.values.resize(n);
    p.derivs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = r_max * double(i) / double(n - 1);
        p.radii[i] = r;
        p.values[i] = v(r);
        p.derivs[i] = i == 0 ? 0.0 : dv(r);
    }
    p.shoot_height = p.values[0];
    p.node_count = count_sign_changes(p.values);
    TailModel t;
    t.match_radius = r_max;
    t.decay_rate = 1.0;
    t.algebraic_power = 0.5 * double(dimension - 1);
    p.tail = t;
    return p;
}

} // namespace fieldlab
