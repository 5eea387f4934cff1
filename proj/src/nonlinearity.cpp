#include "fieldlab/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fieldlab {

Nonlinearity::Nonlinearity(RealMap eval, RealMap antideriv, double omega, double zeta,
                           double growth_exponent, FamilyTag family, nlohmann::json descriptor)
    : eval_(std::move(eval)),
      antideriv_(std::move(antideriv)),
      omega_(omega),
      zeta_(zeta),
      growth_exponent_(growth_exponent),
      family_(std::move(family)),
      descriptor_(std::move(descriptor))
{
    if (!eval_ || !antideriv_)
        throw std::invalid_argument("nonlinearity: eval and antiderivative must be set");
    if (!std::isfinite(omega_) || omega_ < 0.0)
        throw std::invalid_argument("nonlinearity: omega must be finite and nonnegative");
    if (!std::isfinite(zeta_) || zeta_ <= 0.0)
        throw std::invalid_argument("nonlinearity: zeta must be positive");
}

double Nonlinearity::decay_rate() const { return std::sqrt(2.0 * omega_); }

void Nonlinearity::require_admissible() const
{
    if (!(omega_ > 0.0))
        throw std::invalid_argument("nonlinearity: omega = 0, (f'1) requires limsup f(t)/t < 0");
    if (!(antideriv_(zeta_) > 0.0))
        throw std::invalid_argument("nonlinearity: F(zeta) <= 0, (f3) witness is invalid");
}

NonlinearityPtr make_power_nonlinearity(double mu, double p, int dimension)
{
    if (dimension < 2)
        throw std::invalid_argument("power nonlinearity: dimension must be >= 2");
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("power nonlinearity: mu must be >= 0");
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::invalid_argument("power nonlinearity: p must be > 1");
    if (dimension >= 3) {
        const double critical = double(dimension + 2) / double(dimension - 2);
        if (p >= critical) {
            std::ostringstream msg;
            msg << "power nonlinearity violates (f2): p = " << p << " is not below the critical exponent "
                << critical << " for N = " << dimension;
            throw std::invalid_argument(msg.str());
        }
    }

    auto f = [mu, p](double t) { return -mu * t + std::pow(std::abs(t), p - 1.0) * t; };
    auto F = [mu, p](double t) { return -0.5 * mu * t * t + std::pow(std::abs(t), p + 1.0) / (p + 1.0); };

    // F vanishes at t0 = (μ(p+1)/2)^{1/(p-1)}; the witness sits √2 beyond it.
    const double t0 = std::pow(0.5 * mu * (p + 1.0), 1.0 / (p - 1.0));
    const double zeta = mu > 0.0 ? std::sqrt(2.0) * t0 : 1.0;

    nlohmann::json desc = {{"family", "power"}, {"mu", mu}, {"p", p}};
    return std::make_shared<const Nonlinearity>(f, F, 0.5 * mu, zeta, p, PowerFamily{mu, p}, std::move(desc));
}

namespace {

struct Table {
    std::vector<double> t, f, F;

    // Linear interpolation on [0, t_max], linear extrapolation beyond; t >= 0.
    double value(double x) const
    {
        const std::size_t n = t.size();
        auto it = std::upper_bound(t.begin(), t.end(), x);
        std::size_t i = it == t.begin() ? 0 : std::size_t(it - t.begin()) - 1;
        i = std::min(i, n - 2);
        const double w = (x - t[i]) / (t[i + 1] - t[i]);
        return f[i] + w * (f[i + 1] - f[i]);
    }

    // Exact integral of the piecewise-linear interpolant.
    double integral(double x) const
    {
        const std::size_t n = t.size();
        auto it = std::upper_bound(t.begin(), t.end(), x);
        std::size_t i = it == t.begin() ? 0 : std::size_t(it - t.begin()) - 1;
        i = std::min(i, n - 2);
        const double fx = value(x);
        return F[i] + 0.5 * (x - t[i]) * (f[i] + fx);
    }
};

} // namespace

NonlinearityPtr make_tabulated_nonlinearity(std::string name, std::span<const double> t,
                                            std::span<const double> f, double omega_override)
{
    if (t.size() != f.size() || t.size() < 3)
        throw std::invalid_argument("tabulated nonlinearity: need >= 3 matching samples");
    if (t[0] != 0.0 || f[0] != 0.0)
        throw std::invalid_argument("tabulated nonlinearity: table must start at (0, 0)");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw std::invalid_argument("tabulated nonlinearity: abscissae must be strictly increasing");

    auto table = std::make_shared<Table>();
    table->t.assign(t.begin(), t.end());
    table->f.assign(f.begin(), f.end());
    table->F.assign(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i)
        table->F[i] = table->F[i - 1] + 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);

    double omega = omega_override;
    if (!(omega > 0.0)) {
        const double decade_end = 10.0 * t[1];
        double max_ratio = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < t.size() && t[i] <= decade_end; ++i)
            max_ratio = std::max(max_ratio, f[i] / t[i]);
        omega = std::max(0.0, -0.5 * max_ratio);
    }

    double zeta = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (table->F[i] > 0.0) {
            zeta = t[i];
            break;
        }
    if (zeta == 0.0)
        zeta = t.back();

    auto eval = [table](double x) { return x < 0.0 ? -table->value(-x) : table->value(x); };
    auto anti = [table](double x) { return table->integral(std::abs(x)); };
    nlohmann::json desc = {{"family", "tabulated"}, {"name", name}, {"t", table->t}, {"f", table->f},
                           {"omega", omega_override}};
    return std::make_shared<const Nonlinearity>(eval, anti, omega, zeta, 1.0, TabulatedFamily{std::move(name)},
                                                std::move(desc));
}

double first_positive_root(const RealMap& g, double t_max, int samples, double tol)
{
    if (!(t_max > 0.0) || samples < 2)
        throw std::invalid_argument("first_positive_root: need t_max > 0 and >= 2 samples");
    const double t_min = t_max * 1e-9;
    const double ratio = std::pow(t_max / t_min, 1.0 / double(samples - 1));
    double prev_t = t_min;
    double prev_g = g(prev_t);
    if (prev_g >= 0.0)
        return 0.0;
    for (int i = 1; i < samples; ++i) {
        const double t = t_min * std::pow(ratio, double(i));
        const double gt = g(t);
        if (gt > 0.0) {
            double lo = prev_t, hi = t;
            while (hi - lo > tol * std::max(1.0, hi)) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi)
                    break;
                (g(mid) > 0.0 ? hi : lo) = mid;
            }
            return lo;
        }
        prev_t = t;
    }
    return 0.0;
}

} // namespace fieldlab
