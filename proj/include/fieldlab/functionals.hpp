#pragma once

#include <optional>
#include <span>

#include "fieldlab/envelope.hpp"
#include "fieldlab/kirchhoff.hpp"
#include "fieldlab/profile.hpp"

namespace fieldlab {

/// |S^{N-1}| = 2π^{N/2}/Γ(N/2).
double surface_area(int dimension);

/// Composite Simpson rule on an arbitrary increasing grid (the last interval
/// of an odd-length partition is closed with a three-point correction).
double simpson(std::span<const double> x, std::span<const double> y);

/// ∫_{R^N} g(u) dx for radial u: stored samples by Simpson, tail by
/// Gauss-Legendre panels out to 40 decay lengths past the match radius.
/// g must vanish at 0. Throws std::invalid_argument when the profile has no tail.
double radial_integral(const RealMap& g, const RadialProfile& u);

/// ‖∇u‖² from the stored derivative samples and the tail derivative.
double gradient_integral(const RadialProfile& u);

/// Copy of u with ‖∇u‖², ‖u‖₂² and ∫F(u) cached (F from u.f).
RadialProfile attach_norms(RadialProfile u);

/// Cached value when present, quadrature otherwise.
double grad_norm_sq(const RadialProfile& u);
double l2_norm_sq(const RadialProfile& u);
double integral_F(const RadialProfile& u);

/// I(v) = ½‖∇v‖² - ∫F(v).
double energy_sf(const RadialProfile& v);
/// J(u) = ½M̂(‖∇u‖²) - ∫F(u).
double energy_kt(const RadialProfile& u, const KirchhoffFunction& M);
/// K(u) = ½(m0‖∇u‖² + ω‖u‖₂²) - ∫Hbar(u).
double energy_aux(const RadialProfile& u, const Envelope& e, double m0);

/// Φ(θ,u) = ½M̂(e^{(N-2)θ}‖∇u‖²) - e^{Nθ}∫F(u), from the cached integrals.
double scaled_energy(double theta, const RadialProfile& u, const KirchhoffFunction& M);
/// ∂_θΦ(θ,u) in closed form.
double scaled_energy_derivative(double theta, const RadialProfile& u, const KirchhoffFunction& M);

/// ((N-2)/2)M(g)g - N∫F(u), divided by max(1, N|∫F(u)|).
double pohozaev_residual(const RadialProfile& u, const KirchhoffFunction& M);
/// M(g)g - ∫f(u)u, divided by max(1, |∫f(u)u|).
double nehari_residual(const RadialProfile& u, const KirchhoffFunction& M);
/// sup over interior samples of |M(g)(u'' + (N-1)u'/r) + f(u)| / sup|f(u)|,
/// with u'' from a seven-point finite-difference stencil on the stored u'.
double strong_residual(const RadialProfile& u, const KirchhoffFunction& M, const Nonlinearity& f);

struct FunctionalReport {
    double grad_norm_sq = 0.0;
    double l2_norm_sq = 0.0;
    double integral_F = 0.0;
    double energy_sf = 0.0;
    double energy_kt = 0.0;
    std::optional<double> energy_aux;
    double pohozaev_residual = 0.0;
    double nehari_residual = 0.0;
    double strong_residual_sup = 0.0;
    double quadrature_tol = 0.0;
};

/// All functionals of u. J uses M; the residuals use `equation` (the
/// coefficient of the equation u is meant to solve, M ≡ 1 for scalar-field
/// profiles). K is filled when an envelope is supplied.
FunctionalReport evaluate_functionals(const RadialProfile& u, const KirchhoffFunction& M,
                                      const KirchhoffFunction& equation, const Envelope* envelope = nullptr,
                                      double m0 = 1.0);

/// Richardson-style error bound for the headline integrals: the change from
/// dropping every other sample.
double quadrature_error(const RadialProfile& u);

} // namespace fieldlab
