#include "fieldlab/functionals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fieldlab {

namespace {

constexpr std::array<double, 8> kGaussNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                               0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

// Tail integration window, in decay lengths 1/κ past the match radius.
constexpr double kTailSpan = 40.0;
constexpr double kTailPanel = 0.5;

const TailModel& require_tail(const RadialProfile& u)
{
    if (!u.tail)
        throw std::invalid_argument("radial integral: profile has no tail model");
    return *u.tail;
}

const Nonlinearity& require_f(const RadialProfile& u)
{
    if (!u.f)
        throw std::invalid_argument("functional: profile carries no nonlinearity");
    return *u.f;
}

// ∫_R^∞ q(r) r^{N-1} dr over the tail, q evaluated on (v_tail(r), v_tail'(r)).
template <class Q> double tail_integral(const RadialProfile& u, Q&& q)
{
    const TailModel& t = require_tail(u);
    if (t.amplitude == 0.0)
        return 0.0;
    const double len = 1.0 / t.decay_rate;
    const double R = u.radii.back();
    const int panels = int(kTailSpan / kTailPanel);
    double sum = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = R + k * kTailPanel * len;
        const double half = 0.5 * kTailPanel * len;
        const double mid = a + half;
        for (std::size_t j = 0; j < kGaussNodes.size(); ++j) {
            const double r = mid + half * kGaussNodes[j];
            sum += kGaussWeights[j] * half * q(t.value(u.dimension, r), t.derivative(u.dimension, r)) *
                   std::pow(r, u.dimension - 1);
        }
    }
    return sum;
}

template <class Q> std::vector<double> weighted_samples(const RadialProfile& u, Q&& q)
{
    std::vector<double> y(u.radii.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = q(u.values[i], u.derivs[i]) * std::pow(u.radii[i], u.dimension - 1);
    return y;
}

template <class Q> double integrate(const RadialProfile& u, Q&& q)
{
    const std::vector<double> y = weighted_samples(u, q);
    return surface_area(u.dimension) * (simpson(u.radii, y) + tail_integral(u, q));
}

// Fornberg's finite-difference weights for the first derivative at z.
void fornberg_first(double z, std::span<const double> x, std::span<double> w)
{
    const std::size_t n = x.size();
    std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const int mn = 1;
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    for (std::size_t i = 0; i < n; ++i)
        w[i] = c[i][1];
}

} // namespace

double surface_area(int dimension)
{
    if (dimension < 1)
        throw std::invalid_argument("surface_area: dimension must be >= 1");
    const double half = 0.5 * double(dimension);
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double simpson(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n != y.size())
        throw std::invalid_argument("simpson: size mismatch");
    if (n < 2)
        return 0.0;
    if (n == 2)
        return 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
    double sum = 0.0;
    const std::size_t intervals = n - 1;
    const std::size_t paired = intervals - intervals % 2;
    for (std::size_t i = 0; i < paired; i += 2) {
        const double h0 = x[i + 1] - x[i];
        const double h1 = x[i + 2] - x[i + 1];
        const double hs = h0 + h1;
        sum += hs / 6.0 * ((2.0 - h1 / h0) * y[i] + hs * hs / (h0 * h1) * y[i + 1] + (2.0 - h0 / h1) * y[i + 2]);
    }
    if (intervals % 2 == 1) {
        const double h0 = x[n - 2] - x[n - 3];
        const double h1 = x[n - 1] - x[n - 2];
        sum += y[n - 1] * (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1)) +
               y[n - 2] * (h1 * h1 + 3.0 * h1 * h0) / (6.0 * h0) - y[n - 3] * h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    }
    return sum;
}

double radial_integral(const RealMap& g, const RadialProfile& u)
{
    require_tail(u);
    return integrate(u, [&](double v, double) { return g(v); });
}

double gradient_integral(const RadialProfile& u)
{
    require_tail(u);
    return integrate(u, [](double, double w) { return w * w; });
}

RadialProfile attach_norms(RadialProfile u)
{
    const Nonlinearity& f = require_f(u);
    u.grad_norm_sq = gradient_integral(u);
    u.l2_norm_sq = radial_integral([](double v) { return v * v; }, u);
    u.integral_F = radial_integral([&](double v) { return f.antideriv(v); }, u);
    return u;
}

double grad_norm_sq(const RadialProfile& u) { return u.grad_norm_sq ? *u.grad_norm_sq : gradient_integral(u); }

double l2_norm_sq(const RadialProfile& u)
{
    return u.l2_norm_sq ? *u.l2_norm_sq : radial_integral([](double v) { return v * v; }, u);
}

double integral_F(const RadialProfile& u)
{
    if (u.integral_F)
        return *u.integral_F;
    const Nonlinearity& f = require_f(u);
    return radial_integral([&](double v) { return f.antideriv(v); }, u);
}

double energy_sf(const RadialProfile& v) { return 0.5 * grad_norm_sq(v) - integral_F(v); }

double energy_kt(const RadialProfile& u, const KirchhoffFunction& M)
{
    return 0.5 * M.antideriv(grad_norm_sq(u)) - integral_F(u);
}

double energy_aux(const RadialProfile& u, const Envelope& e, double m0)
{
    const double norm_sq = m0 * grad_norm_sq(u) + e.omega() * l2_norm_sq(u);
    return 0.5 * norm_sq - radial_integral([&](double v) { return e.Hbar(v); }, u);
}

double scaled_energy(double theta, const RadialProfile& u, const KirchhoffFunction& M)
{
    const int N = u.dimension;
    return 0.5 * M.antideriv(std::exp((N - 2) * theta) * grad_norm_sq(u)) - std::exp(N * theta) * integral_F(u);
}

double scaled_energy_derivative(double theta, const RadialProfile& u, const KirchhoffFunction& M)
{
    const int N = u.dimension;
    const double g = std::exp((N - 2) * theta) * grad_norm_sq(u);
    return 0.5 * (N - 2) * M(g) * g - N * std::exp(N * theta) * integral_F(u);
}

double pohozaev_residual(const RadialProfile& u, const KirchhoffFunction& M)
{
    const int N = u.dimension;
    const double g = grad_norm_sq(u);
    const double iF = integral_F(u);
    return (0.5 * (N - 2) * M(g) * g - N * iF) / std::max(1.0, N * std::abs(iF));
}

double nehari_residual(const RadialProfile& u, const KirchhoffFunction& M)
{
    const Nonlinearity& f = require_f(u);
    const double g = grad_norm_sq(u);
    const double ifu = radial_integral([&](double v) { return f(v) * v; }, u);
    return (M(g) * g - ifu) / std::max(1.0, std::abs(ifu));
}

double strong_residual(const RadialProfile& u, const KirchhoffFunction& M, const Nonlinearity& f)
{
    constexpr std::size_t half = 3;
    const std::size_t n = u.radii.size();
    if (n < 2 * half + 1)
        throw std::invalid_argument("strong_residual: profile too short");
    const double coeff = M(grad_norm_sq(u));
    const int N = u.dimension;
    double sup_f = 0.0;
    for (double v : u.values)
        sup_f = std::max(sup_f, std::abs(f(v)));
    if (sup_f == 0.0)
        return 0.0;
    std::array<double, 2 * half + 1> w{};
    double sup_res = 0.0;
    for (std::size_t i = half; i + half < n; ++i) {
        const std::span<const double> stencil(u.radii.data() + i - half, 2 * half + 1);
        fornberg_first(u.radii[i], stencil, w);
        double upp = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j)
            upp += w[j] * u.derivs[i - half + j];
        const double lap = upp + (N - 1) * u.derivs[i] / u.radii[i];
        sup_res = std::max(sup_res, std::abs(coeff * lap + f(u.values[i])));
    }
    return sup_res / sup_f;
}

double quadrature_error(const RadialProfile& u)
{
    const Nonlinearity* f = u.f.get();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < u.radii.size(); i += 2)
        idx.push_back(i);
    if (idx.back() != u.radii.size() - 1)
        idx.push_back(u.radii.size() - 1);
    std::vector<double> xc(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
        xc[k] = u.radii[idx[k]];

    auto estimate = [&](auto q) {
        const std::vector<double> y = weighted_samples(u, q);
        std::vector<double> yc(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k)
            yc[k] = y[idx[k]];
        const double fine = simpson(u.radii, y);
        const double coarse = simpson(xc, yc);
        return surface_area(u.dimension) * (std::abs(fine - coarse) + 1e-14 * std::abs(fine));
    };
    double err = std::max(estimate([](double, double w) { return w * w; }),
                          estimate([](double v, double) { return v * v; }));
    if (f)
        err = std::max(err, estimate([f](double v, double) { return f->antideriv(v); }));
    return err;
}

FunctionalReport evaluate_functionals(const RadialProfile& u, const KirchhoffFunction& M,
                                      const KirchhoffFunction& equation, const Envelope* envelope, double m0)
{
    const Nonlinearity& f = require_f(u);
    FunctionalReport r;
    r.grad_norm_sq = gradient_integral(u);
    r.l2_norm_sq = radial_integral([](double v) { return v * v; }, u);
    r.integral_F = radial_integral([&](double v) { return f.antideriv(v); }, u);

    RadialProfile fresh = u;
    fresh.grad_norm_sq = r.grad_norm_sq;
    fresh.l2_norm_sq = r.l2_norm_sq;
    fresh.integral_F = r.integral_F;

    r.energy_sf = energy_sf(fresh);
    r.energy_kt = energy_kt(fresh, M);
    if (envelope)
        r.energy_aux = energy_aux(fresh, *envelope, m0);
    r.pohozaev_residual = pohozaev_residual(fresh, equation);
    r.nehari_residual = nehari_residual(fresh, equation);
    r.strong_residual_sup = strong_residual(fresh, equation, f);
    r.quadrature_tol = quadrature_error(fresh);
    return r;
}

} // namespace fieldlab
