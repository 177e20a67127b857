#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace streamfdr {

// Small exact rational, used for target levels and thresholds so that
// step-up comparisons at lattice points do not depend on float rounding.
struct Rational {
    long long num{0};
    long long den{1};

    Rational() = default;
    Rational(long long n, long long d) : num(n), den(d) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        normalize();
    }

    void normalize() {
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den <= static_cast<__int128>(b.num) * a.den;
    }

    // Nearest rational with denominator <= max_den (continued fractions).
    static Rational from_double(double x, long long max_den = 1000000) {
        if (!std::isfinite(x)) throw std::invalid_argument("Rational: non-finite");
        bool neg = x < 0;
        double v = neg ? -x : x;
        long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
        double frac = v;
        for (int it = 0; it < 64; ++it) {
            double fl = std::floor(frac);
            if (fl > 9e17) break;
            long long a = static_cast<long long>(fl);
            long long p2 = a * p1 + p0;
            long long q2 = a * q1 + q0;
            if (q2 > max_den) break;
            p0 = p1; q0 = q1; p1 = p2; q1 = q2;
            double rem = frac - fl;
            if (rem < 1e-15) break;
            frac = 1.0 / rem;
        }
        if (q1 == 0) throw std::invalid_argument("Rational: cannot approximate");
        return Rational(neg ? -p1 : p1, q1);
    }

    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

// A p-value, either an exact lattice rational (count/den) or a plain double.
// Exactness matters for BH decisions on the lattice {k/n}.
class PValue {
public:
    PValue() = default;

    static PValue exact(long long count, long long den) {
        if (den <= 0 || count < 0 || count > den)
            throw std::invalid_argument("PValue: bad exact fraction");
        PValue p;
        p.num_ = count;
        p.den_ = den;
        p.val_ = static_cast<double>(count) / static_cast<double>(den);
        return p;
    }

    static PValue approx(double v) {
        PValue p;
        p.val_ = v;
        return p;
    }

    bool is_exact() const { return den_ > 0; }
    double value() const { return val_; }
    long long count() const { return num_; }
    long long denom() const { return den_; }

    // p <= r, exact whenever this p-value is exact.
    bool leq(const Rational& r) const {
        if (is_exact())
            return static_cast<__int128>(num_) * r.den <= static_cast<__int128>(r.num) * den_;
        return val_ <= r.value();
    }

    // p <= a * k / (a.den * m), i.e. the step-up comparison against alpha*k/m.
    bool leq_scaled(const Rational& alpha, long long k, long long m) const {
        if (is_exact())
            return static_cast<__int128>(num_) * alpha.den * m <=
                   static_cast<__int128>(alpha.num) * k * den_;
        return val_ <= alpha.value() * static_cast<double>(k) / static_cast<double>(m);
    }

    friend bool operator<(const PValue& a, const PValue& b) {
        if (a.is_exact() && b.is_exact())
            return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
        return a.val_ < b.val_;
    }

private:
    double val_{0};
    long long num_{-1};
    long long den_{0};
};

}  // namespace streamfdr
