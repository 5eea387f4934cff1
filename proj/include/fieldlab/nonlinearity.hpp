#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace fieldlab {

using RealMap = std::function<double(double)>;

struct PowerFamily {
    double mu;
    double p;
};
struct TabulatedFamily {
    std::string name;
};
struct AuxDerivedFamily {
    double m0;
    double p0;
};
using FamilyTag = std::variant<PowerFamily, TabulatedFamily, AuxDerivedFamily>;

/// Odd nonlinearity f of the scalar-field equation -Δv = f(v), together with
/// its antiderivative F, the linearisation constant ω = -½ limsup f(t)/t at 0
/// and a witness ζ > 0 with F(ζ) > 0.
///
/// The constructor only checks structural sanity. Whether the standing
/// hypotheses on f actually hold is the job of check_f_conditions(); the
/// shooting code calls require_admissible() before using an instance.
class Nonlinearity {
public:
    Nonlinearity(RealMap eval, RealMap antideriv, double omega, double zeta,
                 double growth_exponent, FamilyTag family, nlohmann::json descriptor);

    double operator()(double t) const { return eval_(t); }
    double eval(double t) const { return eval_(t); }
    double antideriv(double t) const { return antideriv_(t); }

    double omega() const { return omega_; }
    double zeta() const { return zeta_; }
    double growth_exponent() const { return growth_exponent_; }
    const FamilyTag& family() const { return family_; }

    /// JSON description that can rebuild this nonlinearity (see descriptors.hpp).
    const nlohmann::json& descriptor() const { return descriptor_; }

    /// Decay rate √(2ω) of the linearised equation at v = 0.
    double decay_rate() const;

    /// Throws std::invalid_argument unless ω > 0 and F(ζ) > 0.
    void require_admissible() const;

private:
    RealMap eval_;
    RealMap antideriv_;
    double omega_;
    double zeta_;
    double growth_exponent_;
    FamilyTag family_;
    nlohmann::json descriptor_;
};

using NonlinearityPtr = std::shared_ptr<const Nonlinearity>;

/// f(t) = -μt + |t|^{p-1}t. For N ≥ 3 the exponent must be Sobolev
/// subcritical, p < (N+2)/(N-2). μ = 0 is accepted so that the degenerate
/// pure-power case can be fed to the condition checks; it is not admissible
/// for shooting.
NonlinearityPtr make_power_nonlinearity(double mu, double p, int dimension);

/// Piecewise-linear f through (t_i, f_i), t_0 = 0 < t_1 < ..., oddly extended
/// and linearly extrapolated past the last sample. ω is estimated as
/// -½ max f(t)/t over the first decade of the table unless omega_override > 0.
NonlinearityPtr make_tabulated_nonlinearity(std::string name, std::span<const double> t,
                                            std::span<const double> f, double omega_override = 0.0);

/// First sign change from negative to positive of g on (0, t_max], located
/// on a logarithmic scan and refined by bisection. The returned point still
/// satisfies g <= 0. Returns 0 when g starts nonnegative or never turns positive.
double first_positive_root(const RealMap& g, double t_max, int samples = 4096, double tol = 1e-12);

} // namespace fieldlab
