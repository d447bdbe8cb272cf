#include "homsim/angular.hpp"

#include <cmath>

namespace homsim {

namespace {

BigInt factorial(int n) {
    BigInt r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// Factorial of a doubled-integer argument known to be even and non-negative.
BigInt fact2(int twice) {
    return factorial(twice / 2);
}

bool valid_jm(HalfInt j, HalfInt m) {
    if (j.twice() < 0) return false;
    if (m.abs() > j) return false;
    // j + m must be an integer, i.e. j and m share parity.
    return ((j + m).twice() % 2) == 0;
}

} // namespace

ExactRoot clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2,
                         HalfInt J, HalfInt M) {
    if (!valid_jm(j1, m1) || !valid_jm(j2, m2) || !valid_jm(J, M))
        throw std::domain_error("clebsch_gordan: invalid (j, m) pair");

    if (!(m1 + m2 == M)) return ExactRoot::zero();
    if (J < (j1 - j2).abs() || J > j1 + j2) return ExactRoot::zero();
    if (((j1 + j2 + J).twice() % 2) != 0) return ExactRoot::zero();

    const int tj1 = j1.twice(), tm1 = m1.twice();
    const int tj2 = j2.twice(), tm2 = m2.twice();
    const int tJ = J.twice(), tM = M.twice();

    // Racah's closed form: C = sqrt(prefactor) * S with S rational.
    Rational pref = Rational(tJ + 1) *
                    Rational(fact2(tj1 + tj2 - tJ) * fact2(tj1 - tj2 + tJ) *
                                 fact2(-tj1 + tj2 + tJ),
                             fact2(tj1 + tj2 + tJ + 2));
    pref *= Rational(fact2(tJ + tM) * fact2(tJ - tM) * fact2(tj1 - tm1) *
                     fact2(tj1 + tm1) * fact2(tj2 - tm2) * fact2(tj2 + tm2));

    Rational S = 0;
    for (int k = 0;; ++k) {
        const int a = tj1 + tj2 - tJ - 2 * k;
        const int b = tj1 - tm1 - 2 * k;
        const int c = tj2 + tm2 - 2 * k;
        if (a < 0 || b < 0 || c < 0) break;
        const int d = tJ - tj2 + tm1 + 2 * k;
        const int e = tJ - tj1 - tm2 + 2 * k;
        if (d < 0 || e < 0) continue;
        Rational term(1, factorial(k) * fact2(a) * fact2(b) * fact2(c) *
                             fact2(d) * fact2(e));
        S += (k % 2 == 0) ? term : -term;
    }
    if (S == 0) return ExactRoot::zero();

    const int sign = S > 0 ? +1 : -1;
    return ExactRoot::sqrt_of(S * S * pref, sign);
}

LevelScheme::LevelScheme(HalfInt F_a, HalfInt F_b, HalfInt F_c,
                         std::map<int, Rational> populations_by_twice_m)
    : F_a_(F_a), F_b_(F_b), F_c_(F_c),
      populations_(std::move(populations_by_twice_m)) {
    if (F_a_.twice() < 0 || F_b_.twice() < 0 || F_c_.twice() < 0)
        throw std::domain_error("LevelScheme: negative angular momentum");
    const HalfInt one = HalfInt::of(1);
    if (F_c_ < (F_a_ - one).abs() || F_c_ > F_a_ + one ||
        F_c_ < (F_b_ - one).abs() || F_c_ > F_b_ + one)
        throw std::domain_error(
            "LevelScheme: F_c violates the dipole triangle rules; all X_{m,alpha} vanish");

    Rational total = 0;
    for (int tm = -F_a_.twice(); tm <= F_a_.twice(); tm += 2) {
        auto it = populations_.find(tm);
        if (it == populations_.end()) {
            populations_[tm] = 0;
            continue;
        }
        if (it->second < 0)
            throw std::domain_error("LevelScheme: negative population");
        total += it->second;
    }
    for (const auto& [tm, p] : populations_) {
        if (tm < -F_a_.twice() || tm > F_a_.twice() ||
            ((tm - F_a_.twice()) % 2) != 0)
            throw std::domain_error("LevelScheme: population at invalid m");
    }
    if (std::abs(to_double(total) - 1.0) > 1e-12)
        throw std::domain_error("LevelScheme: populations must sum to 1");
}

LevelScheme LevelScheme::uniform(HalfInt F_a, HalfInt F_b, HalfInt F_c) {
    std::map<int, Rational> p;
    const int levels = F_a.twice() + 1;
    for (int tm = -F_a.twice(); tm <= F_a.twice(); tm += 2)
        p[tm] = Rational(1, levels);
    return LevelScheme(F_a, F_b, F_c, std::move(p));
}

const Rational& LevelScheme::population(HalfInt m) const {
    auto it = populations_.find(m.twice());
    if (it == populations_.end())
        throw std::domain_error("LevelScheme: m outside -F_a..F_a");
    return it->second;
}

ExactRoot x_coefficient(const LevelScheme& scheme, HalfInt m, int alpha) {
    if (alpha < -1 || alpha > 1)
        throw std::domain_error("x_coefficient: alpha must be in {-1, 0, +1}");
    if (m.abs() > scheme.F_a())
        throw std::domain_error("x_coefficient: |m| > F_a");
    const HalfInt one = HalfInt::of(1);
    const HalfInt al = HalfInt::of(alpha);
    const HalfInt mb = m - al;
    if (mb.abs() > scheme.F_b()) return ExactRoot::zero();
    if (m.abs() > scheme.F_c()) return ExactRoot::zero();

    const ExactRoot write =
        clebsch_gordan(scheme.F_a(), m, one, HalfInt::of(0), scheme.F_c(), m);
    const ExactRoot emit =
        clebsch_gordan(scheme.F_b(), mb, one, al, scheme.F_c(), m);
    return write * emit;
}

namespace {

// sum_m p_m X^2_{m,alpha}
Rational channel_sum(const LevelScheme& scheme, int alpha) {
    Rational s = 0;
    for (int tm = -scheme.F_a().twice(); tm <= scheme.F_a().twice(); tm += 2) {
        const HalfInt m = HalfInt::from_twice(tm);
        const ExactRoot x = x_coefficient(scheme, m, alpha);
        if (!x.is_zero()) s += scheme.population(m) * x.squared();
    }
    return s;
}

} // namespace

Rational branching_angle_exact(const LevelScheme& scheme) {
    const Rational minus = channel_sum(scheme, -1);
    const Rational plus = channel_sum(scheme, +1);
    const Rational den = minus + plus;
    if (den == 0)
        throw std::domain_error(
            "branching_angle: degenerate scheme, all X_{m,+-1} vanish");
    return minus / den;
}

double branching_angle(const LevelScheme& scheme) {
    return to_double(branching_angle_exact(scheme));
}

Rational mixing_angle_exact(const LevelScheme& scheme) {
    const Rational pi_sum = channel_sum(scheme, 0);
    const Rational sigma_half = (channel_sum(scheme, -1) + channel_sum(scheme, +1)) / 2;
    const Rational den = pi_sum + sigma_half;
    if (den == 0)
        throw std::domain_error("mixing_angle: degenerate scheme, all X vanish");
    return sigma_half / den;
}

double mixing_angle(const LevelScheme& scheme) {
    return to_double(mixing_angle_exact(scheme));
}

Rational coupling_structure_sum(const LevelScheme& scheme) {
    return channel_sum(scheme, 0) +
           (channel_sum(scheme, -1) + channel_sum(scheme, +1)) / 2;
}

void CouplingInputs::validate() const {
    if (Delta == 0.0)
        throw std::domain_error("CouplingInputs: Delta must be nonzero");
    if (!(k_s > 0) || !(k_w > 0) || !(n_w > 0) || !(N > 0) || !(A_bar > 0))
        throw std::domain_error(
            "CouplingInputs: k_s, k_w, n_w, N, A_bar must all be positive");
}

double coupling_chi(const LevelScheme& scheme, const CouplingInputs& in) {
    in.validate();
    const double structure =
        std::sqrt(to_double(coupling_structure_sum(scheme)));
    return 2.0 * in.d_cb * in.d_ca / in.Delta *
           std::sqrt(in.k_s * in.k_w * in.n_w * in.N) /
           (constants::hbar * constants::epsilon0 * in.A_bar) * structure;
}

} // namespace homsim
