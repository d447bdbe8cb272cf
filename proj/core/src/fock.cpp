#include "homsim/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace homsim {

ModeRegistry::ModeRegistry(int cutoff) : cutoff_(cutoff) {
    if (cutoff < 2)
        throw std::domain_error(
            "ModeRegistry: cutoff must be >= 2 to resolve multiphoton terms");
}

int ModeRegistry::add_mode(const std::string& label) {
    if (has_mode(label))
        throw std::domain_error("ModeRegistry: duplicate mode label " + label);
    labels_.push_back(label);
    return static_cast<int>(labels_.size()) - 1;
}

bool ModeRegistry::has_mode(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

int ModeRegistry::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end())
        throw std::domain_error("ModeRegistry: unknown mode label " + label);
    return static_cast<int>(it - labels_.begin());
}

std::size_t ModeRegistry::state_size() const {
    std::size_t n = 1;
    for (int i = 0; i < mode_count(); ++i) n *= static_cast<std::size_t>(dim());
    return n;
}

Detector ideal_detector(const std::string& id, const std::set<int>& modes) {
    Detector d;
    d.id = id;
    for (int m : modes) d.mode_efficiency[m] = 1.0;
    return d;
}

FockState::FockState(ModeRegistry registry) : registry_(std::move(registry)) {
    if (registry_.mode_count() == 0)
        throw std::domain_error("FockState: registry has no modes");
    amps_.assign(registry_.state_size(), Complex(0.0, 0.0));
    amps_[0] = Complex(1.0, 0.0);
}

double FockState::norm2() const {
    double s = 0.0;
    for (const Complex& a : amps_) s += std::norm(a);
    return s;
}

namespace {

std::size_t flat_index(const ModeRegistry& reg, const std::vector<int>& occ) {
    if (static_cast<int>(occ.size()) != reg.mode_count())
        throw std::domain_error("occupation tuple length mismatch");
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (int i = 0; i < reg.mode_count(); ++i) {
        if (occ[i] < 0 || occ[i] > reg.cutoff())
            throw std::domain_error("occupation outside cutoff");
        idx += static_cast<std::size_t>(occ[i]) * stride;
        stride *= static_cast<std::size_t>(reg.dim());
    }
    return idx;
}

} // namespace

Complex FockState::amplitude(const std::vector<int>& occupation) const {
    return amps_[flat_index(registry_, occupation)];
}

void FockState::set_amplitude(const std::vector<int>& occupation, Complex value) {
    amps_[flat_index(registry_, occupation)] = value;
}

void FockState::apply_two_mode_kernel(int mode_i, int mode_j,
                                      const std::vector<Complex>& kernel) {
    if (mode_i == mode_j)
        throw std::domain_error("two-mode gate needs distinct modes");
    const int M = registry_.mode_count();
    if (mode_i < 0 || mode_i >= M || mode_j < 0 || mode_j >= M)
        throw std::domain_error("two-mode gate: mode index out of range");

    const std::size_t d = static_cast<std::size_t>(registry_.dim());
    const std::size_t d2 = d * d;
    std::size_t stride_i = 1, stride_j = 1;
    for (int k = 0; k < mode_i; ++k) stride_i *= d;
    for (int k = 0; k < mode_j; ++k) stride_j *= d;

    // Enumerate the subspace complementary to (mode_i, mode_j): every flat
    // index with both of those digits zero.
    std::vector<std::size_t> rest_bases;
    rest_bases.reserve(amps_.size() / d2);
    for (std::size_t flat = 0; flat < amps_.size(); ++flat) {
        std::size_t x = flat;
        bool zero_ij = true;
        for (int k = 0; k < M; ++k) {
            const int dig = static_cast<int>(x % d);
            x /= d;
            if ((k == mode_i || k == mode_j) && dig != 0) {
                zero_ij = false;
                break;
            }
        }
        if (zero_ij) rest_bases.push_back(flat);
    }

    std::vector<Complex> x(d2), y(d2);
    for (std::size_t base : rest_bases) {
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                x[a * d + b] = amps_[base + a * stride_i + b * stride_j];
        for (std::size_t row = 0; row < d2; ++row) {
            Complex acc(0.0, 0.0);
            const Complex* krow = kernel.data() + row * d2;
            for (std::size_t col = 0; col < d2; ++col) acc += krow[col] * x[col];
            y[row] = acc;
        }
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                amps_[base + a * stride_i + b * stride_j] = y[a * d + b];
    }
}

std::vector<Complex> squeezer_kernel(int cutoff, double r) {
    const int d = cutoff + 1;
    const std::size_t d2 = static_cast<std::size_t>(d) * d;
    // Disentangled form exp(lam a†b†) exp(-g (n_a+n_b+1)) exp(-lam a b),
    // lam = tanh r, g = ln cosh r. The raising factor is triangular, so the
    // product's retained matrix elements equal the untruncated ones.
    const double lam = std::tanh(r);
    const double g = std::log(std::cosh(r));

    std::vector<double> logfact(2 * d + 1, 0.0);
    for (int n = 1; n <= 2 * d; ++n)
        logfact[n] = logfact[n - 1] + std::log(static_cast<double>(n));

    std::vector<Complex> kernel(d2 * d2, Complex(0.0, 0.0));
    // <mp,np| A D B |m,n> = sum over k (lower by B), then diagonal, then
    // raise by j (A): mp = m - k + j, np = n - k + j.
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            const int kmax = std::min(m, n);
            for (int k = 0; k <= kmax; ++k) {
                // B: |m,n> -> (-lam)^k / k! * sqrt(m!/(m-k)! * n!/(n-k)!) |m-k,n-k>
                const double bcoef =
                    std::pow(-lam, k) / std::exp(logfact[k]) *
                    std::exp(0.5 * (logfact[m] - logfact[m - k] + logfact[n] -
                                    logfact[n - k]));
                const int mm = m - k, nn = n - k;
                const double dcoef = std::exp(-g * (mm + nn + 1));
                for (int j = 0; mm + j < d && nn + j < d; ++j) {
                    const double acoef =
                        std::pow(lam, j) / std::exp(logfact[j]) *
                        std::exp(0.5 * (logfact[mm + j] - logfact[mm] +
                                        logfact[nn + j] - logfact[nn]));
                    const std::size_t row =
                        static_cast<std::size_t>(mm + j) * d + (nn + j);
                    const std::size_t col = static_cast<std::size_t>(m) * d + n;
                    kernel[row * d2 + col] += acoef * dcoef * bcoef;
                }
            }
        }
    }
    return kernel;
}

std::vector<Complex> mixer_kernel(int cutoff, double u11, double u12,
                                  double u21, double u22) {
    const int d = cutoff + 1;
    const std::size_t d2 = static_cast<std::size_t>(d) * d;
    std::vector<double> fact(2 * d + 1, 1.0);
    for (int n = 1; n <= 2 * d; ++n) fact[n] = fact[n - 1] * n;

    std::vector<Complex> kernel(d2 * d2, Complex(0.0, 0.0));
    // |m,n> -> (u11 a† + u21 b†)^m (u12 a† + u22 b†)^n |0,0> / sqrt(m! n!)
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            const std::size_t col = static_cast<std::size_t>(m) * d + n;
            for (int k = 0; k <= m; ++k) {
                const double c1 = fact[m] / (fact[k] * fact[m - k]) *
                                  std::pow(u11, k) * std::pow(u21, m - k);
                for (int l = 0; l <= n; ++l) {
                    const double c2 = fact[n] / (fact[l] * fact[n - l]) *
                                      std::pow(u12, l) * std::pow(u22, n - l);
                    const int p = k + l, q = (m - k) + (n - l);
                    if (p >= d || q >= d) continue; // clipped overflow
                    const double amp = c1 * c2 *
                                       std::sqrt(fact[p] * fact[q]) /
                                       std::sqrt(fact[m] * fact[n]);
                    kernel[(static_cast<std::size_t>(p) * d + q) * d2 + col] += amp;
                }
            }
        }
    }
    return kernel;
}

void FockState::apply_two_mode_squeezer(int mode_a, int mode_b, double r) {
    const double before = norm2();
    apply_two_mode_kernel(mode_a, mode_b, squeezer_kernel(cutoff(), r));
    norm_deficit_ += std::max(0.0, before - norm2());
}

void FockState::apply_beamsplitter(int mode_i, int mode_j, double reflectance) {
    if (reflectance < 0.0 || reflectance > 1.0)
        throw std::domain_error("beamsplitter: reflectance outside [0,1]");
    const double T = 1.0 - reflectance;
    const double before = norm2();
    apply_two_mode_kernel(mode_i, mode_j,
                          mixer_kernel(cutoff(), std::sqrt(T), std::sqrt(reflectance),
                                       std::sqrt(reflectance), -std::sqrt(T)));
    norm_deficit_ += std::max(0.0, before - norm2());
}

void FockState::apply_polarization_rotation(int mode_i, int mode_j, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const double before = norm2();
    apply_two_mode_kernel(mode_i, mode_j, mixer_kernel(cutoff(), c, s, -s, c));
    norm_deficit_ += std::max(0.0, before - norm2());
}

int FockState::apply_loss(int mode, double transmission) {
    if (transmission < 0.0 || transmission > 1.0)
        throw std::domain_error("loss: transmission outside [0,1]");
    const int ancilla =
        registry_.add_mode("loss_ancilla_" + std::to_string(loss_ancillas_++));
    std::vector<Complex> grown(registry_.state_size(), Complex(0.0, 0.0));
    std::copy(amps_.begin(), amps_.end(), grown.begin());
    amps_ = std::move(grown);
    // Beamsplitter of reflectance 1 - t: amplitude sqrt(t) stays, the rest
    // goes to the ancilla.
    const double before = norm2();
    apply_two_mode_kernel(mode, ancilla,
                          mixer_kernel(cutoff(), std::sqrt(transmission),
                                       std::sqrt(1.0 - transmission),
                                       std::sqrt(1.0 - transmission),
                                       -std::sqrt(transmission)));
    norm_deficit_ += std::max(0.0, before - norm2());
    return ancilla;
}

double FockState::silent_probability(
    const std::vector<const Detector*>& silent) const {
    // Accumulate the total watched efficiency per mode over the silent set;
    // a photon escapes all of them with probability (1 - sum eff).
    std::map<int, double> eff;
    for (const Detector* det : silent)
        for (const auto& [m, t] : det->mode_efficiency) {
            eff[m] += t;
            if (eff[m] > 1.0 + 1e-12)
                throw std::domain_error(
                    "detectors watching mode " + registry_.label_of(m) +
                    " have total efficiency > 1");
        }

    const int M = registry_.mode_count();
    const std::size_t d = static_cast<std::size_t>(registry_.dim());
    // Per-mode weight tables (1 - eff)^n.
    std::vector<std::vector<double>> table(M);
    for (const auto& [m, t] : eff) {
        auto& col = table[m];
        col.resize(d);
        double w = 1.0;
        for (std::size_t n = 0; n < d; ++n) {
            col[n] = w;
            w *= std::max(0.0, 1.0 - t);
        }
    }

    double total = 0.0;
    for (std::size_t flat = 0; flat < amps_.size(); ++flat) {
        const double p = std::norm(amps_[flat]);
        if (p == 0.0) continue;
        double w = p;
        std::size_t x = flat;
        for (int k = 0; k < M; ++k) {
            const std::size_t dig = x % d;
            x /= d;
            if (!table[k].empty()) w *= table[k][dig];
        }
        total += w;
    }
    return total;
}

std::vector<double> FockState::click_pattern_probabilities(
    const std::vector<Detector>& detectors, bool allow_shared_modes) const {
    const int n = static_cast<int>(detectors.size());
    if (n > 20) throw std::domain_error("too many detectors");
    if (!allow_shared_modes) {
        std::set<int> seen;
        for (const auto& det : detectors)
            for (const auto& [m, t] : det.mode_efficiency) {
                (void)t;
                if (!seen.insert(m).second)
                    throw std::domain_error(
                        "detector mode sets overlap on mode " +
                        registry_.label_of(m));
            }
    }

    // silent_probability for every subset, then inclusion-exclusion:
    // P(pattern) = sum_{S subset of clicked} (-1)^|S| V(silent ∪ S).
    const std::size_t subsets = std::size_t(1) << n;
    std::vector<double> V(subsets);
    std::vector<const Detector*> list;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
        list.clear();
        for (int k = 0; k < n; ++k)
            if (mask & (std::size_t(1) << k)) list.push_back(&detectors[k]);
        V[mask] = silent_probability(list);
    }

    std::vector<double> prob(subsets, 0.0);
    for (std::size_t pattern = 0; pattern < subsets; ++pattern) {
        const std::size_t clicked = pattern;
        const std::size_t silent = (~pattern) & (subsets - 1);
        // Iterate over subsets S of `clicked`.
        double p = 0.0;
        std::size_t S = clicked;
        while (true) {
            const int bits = std::popcount(S);
            p += ((bits % 2 == 0) ? 1.0 : -1.0) * V[silent | S];
            if (S == 0) break;
            S = (S - 1) & clicked;
        }
        prob[pattern] = p;
    }
    return prob;
}

double FockState::flux_correlation(
    const std::vector<std::map<int, double>>& groups) const {
    // Normally ordered product of weighted number operators,
    // <: prod_g (sum_m w_gm n_m) :>. Groups may share modes; a mode picked by
    // c groups contributes the falling factorial n(n-1)...(n-c+1), which is
    // what photon-flux coincidence counting measures.
    const int k = static_cast<int>(groups.size());
    if (k == 0) return norm2();
    for (const auto& g : groups) {
        if (g.empty()) return 0.0;
        for (const auto& [m, w] : g) {
            (void)w;
            if (m < 0 || m >= registry_.mode_count())
                throw std::domain_error("flux_correlation: mode index out of range");
        }
    }

    struct Term {
        double weight;
        std::vector<std::pair<int, int>> mode_mult;
    };
    std::vector<Term> terms;
    std::vector<std::map<int, double>::const_iterator> pick(k);
    for (int g = 0; g < k; ++g) pick[g] = groups[g].begin();
    while (true) {
        Term t;
        t.weight = 1.0;
        std::map<int, int> mult;
        for (int g = 0; g < k; ++g) {
            t.weight *= pick[g]->second;
            mult[pick[g]->first] += 1;
        }
        t.mode_mult.assign(mult.begin(), mult.end());
        terms.push_back(std::move(t));
        int g = k - 1;
        for (; g >= 0; --g) {
            if (++pick[g] != groups[g].end()) break;
            pick[g] = groups[g].begin();
        }
        if (g < 0) break;
    }

    const int M = registry_.mode_count();
    const std::size_t d = static_cast<std::size_t>(registry_.dim());
    double total = 0.0;
    std::vector<int> digits(M);
    for (std::size_t flat = 0; flat < amps_.size(); ++flat) {
        const double p = std::norm(amps_[flat]);
        if (p == 0.0) continue;
        std::size_t x = flat;
        for (int m = 0; m < M; ++m) {
            digits[m] = static_cast<int>(x % d);
            x /= d;
        }
        double w = 0.0;
        for (const Term& t : terms) {
            double f = t.weight;
            for (const auto& [m, c] : t.mode_mult)
                for (int j = 0; j < c; ++j) f *= digits[m] - j;
            w += f;
        }
        total += p * w;
    }
    return total;
}

std::vector<double> FockState::photon_number_distribution(int mode) const {
    const std::size_t d = static_cast<std::size_t>(registry_.dim());
    std::vector<double> dist(d, 0.0);
    std::size_t stride = 1;
    for (int k = 0; k < mode; ++k) stride *= d;
    for (std::size_t flat = 0; flat < amps_.size(); ++flat) {
        const double p = std::norm(amps_[flat]);
        if (p == 0.0) continue;
        dist[(flat / stride) % d] += p;
    }
    return dist;
}

double FockState::mean_photon_number(int mode) const {
    const auto dist = photon_number_distribution(mode);
    double mean = 0.0;
    for (std::size_t n = 0; n < dist.size(); ++n) mean += n * dist[n];
    return mean;
}

std::string FockState::dump(double threshold) const {
    const int M = registry_.mode_count();
    const std::size_t d = static_cast<std::size_t>(registry_.dim());
    std::string out;
    char buf[64];
    for (std::size_t flat = 0; flat < amps_.size(); ++flat) {
        const Complex a = amps_[flat];
        if (std::norm(a) <= threshold * threshold) continue;
        out += "(";
        std::size_t x = flat;
        for (int k = 0; k < M; ++k) {
            if (k) out += ",";
            out += std::to_string(x % d);
            x /= d;
        }
        std::snprintf(buf, sizeof buf, ") %.17g %.17g\n", a.real(), a.imag());
        out += buf;
    }
    return out;
}

} // namespace homsim
