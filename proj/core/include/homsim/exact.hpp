#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace homsim {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) {
    return static_cast<double>(q);
}

// Value of the form sign * sqrt(radicand) with radicand a non-negative
// rational. Closed under multiplication; squaring returns a plain Rational.
// This is exactly the shape produced by the Racah formula, whose sum is
// rational and whose prefactor is a rational radicand.
class ExactRoot {
public:
    ExactRoot() : sign_(0), radicand_(0) {}

    static ExactRoot zero() { return ExactRoot(); }

    static ExactRoot sqrt_of(const Rational& radicand, int sign = +1) {
        if (radicand < 0) throw std::domain_error("ExactRoot: negative radicand");
        ExactRoot v;
        v.radicand_ = radicand;
        v.sign_ = (radicand == 0) ? 0 : (sign >= 0 ? +1 : -1);
        return v;
    }

    static ExactRoot of_rational(const Rational& q) {
        ExactRoot v;
        v.radicand_ = q * q;
        v.sign_ = (q > 0) - (q < 0);
        return v;
    }

    int sign() const { return sign_; }
    const Rational& radicand() const { return radicand_; }
    bool is_zero() const { return sign_ == 0; }

    Rational squared() const { return radicand_; }

    double to_double() const {
        if (sign_ == 0) return 0.0;
        return sign_ * std::sqrt(static_cast<double>(radicand_));
    }

    friend ExactRoot operator*(const ExactRoot& a, const ExactRoot& b) {
        if (a.sign_ == 0 || b.sign_ == 0) return zero();
        ExactRoot v;
        v.sign_ = a.sign_ * b.sign_;
        v.radicand_ = a.radicand_ * b.radicand_;
        return v;
    }

    friend bool operator==(const ExactRoot& a, const ExactRoot& b) {
        return a.sign_ == b.sign_ && (a.sign_ == 0 || a.radicand_ == b.radicand_);
    }

    // Canonical golden-file form: "0", "+sqrt(p/q)" or "-sqrt(p/q)" with p/q
    // in lowest terms.
    std::string str() const {
        if (sign_ == 0) return "0";
        std::string s = sign_ > 0 ? "+sqrt(" : "-sqrt(";
        s += boost::multiprecision::numerator(radicand_).str();
        s += "/";
        s += boost::multiprecision::denominator(radicand_).str();
        s += ")";
        return s;
    }

private:
    int sign_;          // -1, 0, +1
    Rational radicand_; // >= 0, kept in lowest terms by cpp_rational
};

} // namespace homsim
