#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "fieldlab/nonlinearity.hpp"
#include "json.hpp"

namespace fieldlab {

/// M = m0 + q·λ with λ ≥ 0 and Λ its antiderivative.
struct Decomposition {
    double q;
    RealMap lambda;
    RealMap Lambda;
};

/// Kirchhoff coefficient M : [0,∞) → (0,∞), its antiderivative M̂ and the
/// floor m0 from (M1).
class KirchhoffFunction {
public:
    KirchhoffFunction(RealMap eval, RealMap antideriv, double m0, std::optional<Decomposition> decomposition,
                      nlohmann::json descriptor);

    double operator()(double t) const { return eval_(t); }
    double eval(double t) const { return eval_(t); }
    double antideriv(double t) const { return antideriv_(t); }
    double m0() const { return m0_; }
    const std::optional<Decomposition>& decomposition() const { return decomposition_; }
    const nlohmann::json& descriptor() const { return descriptor_; }

private:
    RealMap eval_;
    RealMap antideriv_;
    double m0_;
    std::optional<Decomposition> decomposition_;
    nlohmann::json descriptor_;
};

/// M ≡ m0; carries the trivial decomposition λ ≡ 0.
KirchhoffFunction make_constant_m(double m0 = 1.0);
/// M(t) = a + b·t, decomposed with m0 = a, q = b, λ(t) = t.
KirchhoffFunction make_affine_m(double a, double b);
/// M(t) = m0 + q·t^s.
KirchhoffFunction make_power_m(double m0, double q, double s);
/// M(t) = 1 + (q/2)(e^t - 1).
KirchhoffFunction make_exp_m(double q);

/// One-parameter family q ↦ M_q used by multiplicity sweeps.
struct KirchhoffFamily {
    std::function<KirchhoffFunction(double)> at;
    nlohmann::json descriptor;
};

} // namespace fieldlab
