#pragma once

#include <compare>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace homsim {

// Half-integer angular momentum value stored as twice its value, so that
// j = 3/2 is HalfInt::from_twice(3) and parity checks are integer exact.
class HalfInt {
public:
    constexpr HalfInt() : twice_(0) {}

    static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
    static constexpr HalfInt of(int whole) { return HalfInt(2 * whole); }

    constexpr int twice() const { return twice_; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }
    constexpr HalfInt operator-() const { return HalfInt(-twice_); }
    constexpr HalfInt abs() const { return HalfInt(twice_ < 0 ? -twice_ : twice_); }
    double to_double() const { return 0.5 * twice_; }

    friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return HalfInt(a.twice_ + b.twice_); }
    friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return HalfInt(a.twice_ - b.twice_); }
    friend constexpr bool operator==(HalfInt a, HalfInt b) { return a.twice_ == b.twice_; }
    friend constexpr auto operator<=>(HalfInt a, HalfInt b) { return a.twice_ <=> b.twice_; }

    std::string str() const {
        if (is_integer()) return std::to_string(twice_ / 2);
        return std::to_string(twice_) + "/2";
    }

private:
    explicit constexpr HalfInt(int twice) : twice_(twice) {}
    int twice_;
};

} // namespace homsim
