#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace homsim {

using Complex = std::complex<double>;

// Ordered, uniquely labeled mode list with a common per-mode photon cutoff.
// Mode order is fixed for the lifetime of a computation; amplitudes are
// indexed mixed-radix with mode i carrying stride (cutoff+1)^i.
class ModeRegistry {
public:
    explicit ModeRegistry(int cutoff);

    int add_mode(const std::string& label);
    int index_of(const std::string& label) const;
    bool has_mode(const std::string& label) const;
    const std::string& label_of(int index) const { return labels_.at(index); }

    int cutoff() const { return cutoff_; }
    int dim() const { return cutoff_ + 1; }
    int mode_count() const { return static_cast<int>(labels_.size()); }
    std::size_t state_size() const;

private:
    int cutoff_;
    std::vector<std::string> labels_;
};

// Threshold (click / no-click) detector: the set of modes it watches and the
// per-photon detection probability for each mode. A photon in mode m clicks
// this detector with probability eff[m]; efficiencies from different
// detectors watching the same mode must sum to at most 1 (the photon is
// routed to exactly one place or lost).
struct Detector {
    std::string id;
    std::map<int, double> mode_efficiency;
};

// Convenience builder: detector watching `modes` with unit efficiency.
Detector ideal_detector(const std::string& id, const std::set<int>& modes);

// Pure state over the truncated multi-mode Fock space. norm_deficit tracks
// the probability mass pushed outside the truncation by number-raising
// elements (squeezers) or total-occupation overflow at beamsplitters.
class FockState {
public:
    explicit FockState(ModeRegistry registry); // vacuum

    const ModeRegistry& registry() const { return registry_; }
    int cutoff() const { return registry_.cutoff(); }

    double norm2() const;
    double norm_deficit() const { return norm_deficit_; }

    Complex amplitude(const std::vector<int>& occupation) const;
    void set_amplitude(const std::vector<int>& occupation, Complex value);

    // exp(r (a_i† a_j† − a_i a_j)). Acting on vacuum this produces the
    // two-mode squeezed state with amplitudes tanh^n(r)/cosh(r) on |n,n>.
    // Amplitudes of retained occupations are exact; clipped mass goes to
    // norm_deficit.
    void apply_two_mode_squeezer(int mode_a, int mode_b, double r);

    // a_i -> sqrt(T) a_i + sqrt(R) a_j, a_j -> sqrt(R) a_i − sqrt(T) a_j
    // (real orthogonal convention). Conserves total photon number; overflow
    // above the per-mode cutoff is clipped into norm_deficit.
    void apply_beamsplitter(int mode_i, int mode_j, double reflectance);

    // a_i -> cos(angle) a_i + sin(angle) a_j, a_j -> −sin(angle) a_i + cos(angle) a_j.
    // angle = pi/2 maps the full occupation of i onto j (H -> V half-wave
    // rotation up to sign).
    void apply_polarization_rotation(int mode_i, int mode_j, double angle);

    // Couples `mode` to a fresh vacuum ancilla (appended to the registry)
    // through a beamsplitter of transmission t; the ancilla stays in the
    // state (purification) and is traced implicitly at measurement by never
    // being watched by a detector. Returns the ancilla mode index.
    int apply_loss(int mode, double transmission);

    // <prod_m (1-eff[m])^(n_m)>: probability that every listed detector
    // stays silent. Detectors not listed are unconstrained (their modes are
    // marginalized), which is what traces purification ancillas.
    double silent_probability(const std::vector<const Detector*>& silent) const;

    // Full joint click-pattern distribution over the given detectors, by
    // inclusion-exclusion over silent_probability. Pattern bit k = 1 means
    // detectors[k] clicked. Probabilities sum to norm2() (truncation leakage
    // is exposed, not renormalized away). Detector mode sets must be
    // disjoint unless allow_shared_modes is set (used internally for routed
    // split-efficiency detectors, where per-mode efficiencies of the sharing
    // detectors add).
    std::vector<double> click_pattern_probabilities(
        const std::vector<Detector>& detectors,
        bool allow_shared_modes = false) const;

    // Normally ordered photon-flux correlation
    //   <: prod_g ( sum_m w_g[m] n_m ) :>
    // the photocounting-rate observable whose low-efficiency limit the
    // closed-form coincidence formulas describe. Groups may share modes; a
    // mode picked by c groups contributes the falling factorial
    // n(n-1)...(n-c+1) (normal ordering), so routed split-efficiency groups
    // give the same value as physically splitting the mode on a beamsplitter.
    double flux_correlation(
        const std::vector<std::map<int, double>>& groups) const;

    std::vector<double> photon_number_distribution(int mode) const;
    double mean_photon_number(int mode) const;

    // Debug dump: one "(n1,...,nk) re im" line per nonzero amplitude, in
    // index order, for golden tests.
    std::string dump(double threshold = 0.0) const;

private:
    void apply_two_mode_kernel(int mode_i, int mode_j,
                               const std::vector<Complex>& kernel);

    ModeRegistry registry_;
    std::vector<Complex> amps_;
    double norm_deficit_ = 0.0;
    int loss_ancillas_ = 0;
};

// Exact cutoff-truncated matrix elements <m',n'|exp(r(a†b†−ab))|m,n> packed
// as kernel[(m'*d+n')*d*d + (m*d+n)], d = cutoff+1. Retained elements are
// exact (disentangled triangular factorization); used by the squeezer gate
// and exposed for oracle tests.
std::vector<Complex> squeezer_kernel(int cutoff, double r);

// Matrix elements of the real mode mixer a -> u11 a + u21 b, b -> u12 a + u22 b.
std::vector<Complex> mixer_kernel(int cutoff, double u11, double u12,
                                  double u21, double u22);

} // namespace homsim
