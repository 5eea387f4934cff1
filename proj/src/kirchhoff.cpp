#include "fieldlab/kirchhoff.hpp"

#include <cmath>
#include <stdexcept>

namespace fieldlab {

KirchhoffFunction::KirchhoffFunction(RealMap eval, RealMap antideriv, double m0,
                                     std::optional<Decomposition> decomposition, nlohmann::json descriptor)
    : eval_(std::move(eval)),
      antideriv_(std::move(antideriv)),
      m0_(m0),
      decomposition_(std::move(decomposition)),
      descriptor_(std::move(descriptor))
{
    if (!eval_ || !antideriv_)
        throw std::invalid_argument("kirchhoff function: eval and antiderivative must be set");
    if (!(m0_ > 0.0) || !std::isfinite(m0_))
        throw std::invalid_argument("kirchhoff function: m0 must be positive");
    if (decomposition_ && (!decomposition_->lambda || !decomposition_->Lambda || !(decomposition_->q > 0.0)))
        throw std::invalid_argument("kirchhoff function: decomposition needs q > 0, lambda and Lambda");
}

KirchhoffFunction make_constant_m(double m0)
{
    auto zero = [](double) { return 0.0; };
    return KirchhoffFunction([m0](double) { return m0; }, [m0](double t) { return m0 * t; }, m0,
                             Decomposition{1.0, zero, zero}, {{"family", "constant"}, {"m0", m0}});
}

KirchhoffFunction make_affine_m(double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("affine M: need a > 0 and b > 0");
    return KirchhoffFunction([a, b](double t) { return a + b * t; },
                             [a, b](double t) { return a * t + 0.5 * b * t * t; }, a,
                             Decomposition{b, [](double t) { return t; }, [](double t) { return 0.5 * t * t; }},
                             {{"family", "affine"}, {"a", a}, {"b", b}});
}

KirchhoffFunction make_power_m(double m0, double q, double s)
{
    if (!(m0 > 0.0) || !(q > 0.0) || !(s > 0.0))
        throw std::invalid_argument("power_m: need m0 > 0, q > 0, s > 0");
    auto lambda = [s](double t) { return std::pow(t, s); };
    auto Lambda = [s](double t) { return std::pow(t, s + 1.0) / (s + 1.0); };
    return KirchhoffFunction([=](double t) { return m0 + q * lambda(t); },
                             [=](double t) { return m0 * t + q * Lambda(t); }, m0, Decomposition{q, lambda, Lambda},
                             {{"family", "power_m"}, {"m0", m0}, {"q", q}, {"s", s}});
}

KirchhoffFunction make_exp_m(double q)
{
    if (!(q > 0.0))
        throw std::invalid_argument("exp_m: need q > 0");
    auto lambda = [](double t) { return 0.5 * std::expm1(t); };
    auto Lambda = [](double t) { return 0.5 * (std::expm1(t) - t); };
    return KirchhoffFunction([=](double t) { return 1.0 + q * lambda(t); },
                             [=](double t) { return t + q * Lambda(t); }, 1.0, Decomposition{q, lambda, Lambda},
                             {{"family", "exp_m"}, {"q", q}});
}

} // namespace fieldlab
