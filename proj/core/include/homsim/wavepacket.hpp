#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace homsim {

// Adaptive Simpson quadrature. abs_tol is an absolute tolerance on the
// integral. Bounded jumps in the integrand are pinched into leaf panels of
// negligible width; QuadratureError is thrown only when a panel exhausts the
// depth limit with a defect still above the whole-panel error budget.
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth = 48);

// Normalized temporal amplitude profile phi(t) of a write pulse, with
// integral |phi|^2 dt = 1. Gaussian and square shapes are analytic; custom
// profiles are uniform-grid samples, renormalized on ingest (a flag records
// whether renormalization was needed).
class Wavepacket {
public:
    enum class Shape { gaussian, square, custom };

    static Wavepacket gaussian(double center, double width);
    static Wavepacket square(double center, double width);
    // samples on the uniform grid [t0, t0 + (n-1) dt].
    static Wavepacket custom(double t0, double dt, std::vector<double> samples);

    Shape shape() const { return shape_; }
    double center() const { return center_; }
    double width() const { return width_; }
    bool was_renormalized() const { return renormalized_; }

    double amplitude(double t) const;

    // Support window [lo, hi] outside which the amplitude is negligible;
    // used to build quadrature windows (exact for square and custom shapes,
    // 8 sigma for gaussians).
    double support_lo() const;
    double support_hi() const;

    // integral phi_a(t) phi_b(t) dt (profiles are real).
    static double overlap(const Wavepacket& a, const Wavepacket& b,
                          double abs_tol = 1e-12);

    bool same_profile_as(const Wavepacket& other) const;

private:
    Wavepacket() = default;
    Shape shape_ = Shape::gaussian;
    double center_ = 0.0;
    double width_ = 1.0;
    double t0_ = 0.0, dt_ = 0.0;
    std::vector<double> samples_;
    bool renormalized_ = false;
};

} // namespace homsim
