#pragma once

#include "homsim/exact.hpp"
#include "homsim/half_int.hpp"

#include <map>
#include <stdexcept>

namespace homsim {

namespace constants {
// CODATA 2018.
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double epsilon0 = 8.8541878128e-12; // F/m
} // namespace constants

// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> in the Condon-Shortley
// convention, evaluated with the Racah sum formula in exact rational
// arithmetic. Returns zero when M != m1 + m2, when the triangle inequality
// fails, or when j1 + j2 + J is not an integer. Throws std::domain_error for
// arguments that are not a valid (j, m) pair: negative j, |m| > j, |M| > J,
// or j + m not an integer.
ExactRoot clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2,
                         HalfInt J, HalfInt M);

// Hyperfine level scheme of the Raman source: ground levels |a>, |b> with
// total angular momenta F_a, F_b, excited level |c> with F_c, and the
// initial-state populations p_m over m = -F_a .. F_a. Populations are kept
// as exact rationals so that angle ratios evaluate exactly; doubles convert
// losslessly (every finite double is rational).
class LevelScheme {
public:
    LevelScheme(HalfInt F_a, HalfInt F_b, HalfInt F_c,
                std::map<int, Rational> populations_by_twice_m);

    static LevelScheme uniform(HalfInt F_a, HalfInt F_b, HalfInt F_c);

    HalfInt F_a() const { return F_a_; }
    HalfInt F_b() const { return F_b_; }
    HalfInt F_c() const { return F_c_; }
    const Rational& population(HalfInt m) const;

private:
    HalfInt F_a_, F_b_, F_c_;
    std::map<int, Rational> populations_; // key: 2m
};

// X_{m,alpha} = C^{F_a 1 F_c}_{m 0 m} * C^{F_b 1 F_c}_{m-alpha alpha m}:
// product of the write-absorption pi amplitude and the signal-emission
// amplitude into polarization component alpha. Zero whenever a selection
// rule closes either factor.
ExactRoot x_coefficient(const LevelScheme& scheme, HalfInt m, int alpha);

// cos^2(theta) = sum_m p_m X^2_{m,-1} / sum_{alpha=+-1} sum_m p_m X^2_{m,alpha}.
Rational branching_angle_exact(const LevelScheme& scheme);
double branching_angle(const LevelScheme& scheme);

// cos^2(eta) = (1/2) sum_{alpha=+-1} sum_m p_m X^2_{m,alpha}
//              / (sum_m p_m X^2_{m,0} + (1/2) sum_{alpha=+-1} sum_m p_m X^2_{m,alpha}).
Rational mixing_angle_exact(const LevelScheme& scheme);
double mixing_angle(const LevelScheme& scheme);

// Structure sum under the square root of the coupling constant:
// sum_m p_m (X^2_{m,0} + sum_{alpha=+-1} X^2_{m,alpha} / 2).
Rational coupling_structure_sum(const LevelScheme& scheme);

// Physical inputs of the dimensionless parametric coupling chi.
struct CouplingInputs {
    double d_cb;  // reduced dipole matrix element c<->b, C m
    double d_ca;  // reduced dipole matrix element c<->a, C m
    double Delta; // write detuning, rad/s, nonzero
    double k_s;   // signal wavenumber, 1/m
    double k_w;   // write wavenumber, 1/m
    double n_w;   // mean write-pulse photon number
    double N;     // atom number
    double A_bar; // effective overlap area, m^2

    void validate() const;
};

// chi = 2 d_cb d_ca / Delta * sqrt(k_s k_w n_w N) / (hbar epsilon0 A_bar)
//       * sqrt(coupling_structure_sum). Sign follows the sign of Delta.
double coupling_chi(const LevelScheme& scheme, const CouplingInputs& inputs);

} // namespace homsim
