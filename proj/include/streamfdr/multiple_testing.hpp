#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "streamfdr/rational.hpp"

namespace streamfdr {

struct BHResult {
    Rational threshold{0, 1};
    std::vector<std::size_t> rejected;
    std::size_t k_star{0};
};

// Step-up rule: k* = max{k : p_(k) <= alpha*k/m}, reject all p_i <= alpha*k*/m.
// Comparison is inclusive (<=) and exact for lattice p-values.
inline BHResult bh(const std::vector<PValue>& pvalues, const Rational& alpha) {
    if (pvalues.empty()) throw std::invalid_argument("bh: empty input");
    auto m = static_cast<long long>(pvalues.size());
    std::vector<std::size_t> order(pvalues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    long long k_star = 0;
    for (long long k = m; k >= 1; --k) {
        if (pvalues[order[k - 1]].leq_scaled(alpha, k, m)) {
            k_star = k;
            break;
        }
    }
    BHResult res;
    res.k_star = static_cast<std::size_t>(k_star);
    if (k_star > 0) {
        res.threshold = Rational(alpha.num * k_star, alpha.den * m);
        res.rejected.assign(order.begin(), order.begin() + k_star);
        std::sort(res.rejected.begin(), res.rejected.end());
    }
    return res;
}

inline BHResult bh(const std::vector<double>& pvalues, const Rational& alpha) {
    std::vector<PValue> pv;
    pv.reserve(pvalues.size());
    for (double p : pvalues) pv.push_back(PValue::approx(p));
    return bh(pv, alpha);
}

// Independent O(m^2) oracle: selection-sort the p-values, then try every k
// from m down to 1. Used only in tests.
inline BHResult bh_bruteforce(const std::vector<PValue>& pvalues, const Rational& alpha) {
    if (pvalues.empty()) throw std::invalid_argument("bh_bruteforce: empty input");
    auto m = static_cast<long long>(pvalues.size());
    std::vector<std::size_t> order;
    std::vector<bool> used(pvalues.size(), false);
    for (long long r = 0; r < m; ++r) {
        long long best = -1;
        for (long long i = 0; i < m; ++i) {
            if (used[i]) continue;
            if (best < 0 || pvalues[i] < pvalues[best]) best = i;
        }
        used[best] = true;
        order.push_back(static_cast<std::size_t>(best));
    }
    long long k_star = 0;
    for (long long k = m; k >= 1; --k) {
        if (pvalues[order[k - 1]].leq_scaled(alpha, k, m)) {
            k_star = k;
            break;
        }
    }
    BHResult res;
    res.k_star = static_cast<std::size_t>(k_star);
    if (k_star > 0) {
        res.threshold = Rational(alpha.num * k_star, alpha.den * m);
        for (long long i = 0; i < m; ++i)
            if (pvalues[i].leq_scaled(alpha, k_star, m))
                res.rejected.push_back(static_cast<std::size_t>(i));
    }
    return res;
}

// Fast kernel for Monte-Carlo loops: p-values given as integer counts over a
// common denominator, already sorted ascending. Returns k*.
inline long long bh_kstar_counts(const std::vector<long long>& sorted_counts, long long den,
                                 const Rational& alpha) {
    auto m = static_cast<long long>(sorted_counts.size());
    for (long long k = m; k >= 1; --k) {
        if (static_cast<__int128>(sorted_counts[k - 1]) * alpha.den * m <=
            static_cast<__int128>(alpha.num) * k * den)
            return k;
    }
    return 0;
}

// Largest count still rejected once k* is known: count <= alpha*k*n/m.
inline long long bh_count_cutoff(long long k_star, long long den, long long m,
                                 const Rational& alpha) {
    if (k_star == 0) return -1;
    return static_cast<long long>((static_cast<__int128>(alpha.num) * k_star * den) /
                                  (static_cast<__int128>(alpha.den) * m));
}

// alpha' = alpha * (1 + (1-alpha)/(m*pi))^-1, computed exactly:
// alpha' = aN*m*pN / (aD*m*pN + pD*(aD - aN)).
inline Rational mbh_alpha_prime(const Rational& alpha, long long m, const Rational& pi_hat) {
    if (pi_hat.num <= 0) throw std::invalid_argument("mbh_alpha_prime: pi must be positive");
    if (alpha.num <= 0 || Rational(1, 1) < alpha || m < 1)
        throw std::invalid_argument("mbh_alpha_prime: bad alpha or m");
    return Rational(alpha.num * m * pi_hat.num,
                    alpha.den * m * pi_hat.num + pi_hat.den * (alpha.den - alpha.num));
}

// n = ceil(ell*m/alpha_level) - 1; exactly ell*m/alpha_level - 1 when integral.
inline long long calibration_cardinality(long long m, const Rational& alpha_level, long long ell) {
    if (ell < 1) throw std::invalid_argument("calibration_cardinality: ell must be >= 1");
    long long num = ell * m * alpha_level.den;
    long long den = alpha_level.num;
    return (num + den - 1) / den - 1;
}

struct MBHConfig {
    Rational alpha{1, 10};
    Rational pi_hat{1, 100};
    long long m{100};
    long long ell{1};

    Rational alpha_prime() const { return mbh_alpha_prime(alpha, m, pi_hat); }
    long long n_cal() const { return calibration_cardinality(m, alpha_prime(), ell); }
};

inline BHResult mbh(const std::vector<PValue>& pvalues, const MBHConfig& cfg) {
    return bh(pvalues, cfg.alpha_prime());
}

// LORD3 threshold sequence (alpha-investing): every past rejection keeps
// paying into the threshold,
//   eps_t = gamma_t * w0 + sum over rejection times tau of gamma_{t-tau} * b0,
// wealth decreases by eps_t each step and gains b0 on rejection. Since the
// gamma sequence sums to at most 1, total spending never exceeds w0 plus the
// earnings, so wealth stays nonnegative and thresholds stay strictly positive.
struct LordConfig {
    double alpha{0.1};
    double w0{0.05};
    double b0{0.05};
    std::size_t horizon{10000000};

    static LordConfig defaults(double alpha) {
        LordConfig c;
        c.alpha = alpha;
        c.w0 = alpha / 2.0;
        c.b0 = alpha - c.w0;
        return c;
    }
};

namespace detail {
inline double lord_gamma_raw(std::size_t j) {
    double dj = static_cast<double>(j);
    double lj = std::log(std::max(dj, 2.0));
    return lj / (dj * std::exp(std::sqrt(std::log(dj))));
}

inline double lord_gamma_norm(std::size_t horizon) {
    // Cached per horizon; the default horizon dominates every use.
    static std::size_t cached_h = 0;
    static double cached_z = 0.0;
    if (cached_h != horizon) {
        double z = 0.0;
        for (std::size_t j = 1; j <= horizon; ++j) z += lord_gamma_raw(j);
        cached_h = horizon;
        cached_z = z;
    }
    return cached_z;
}
}  // namespace detail

class LordState {
public:
    explicit LordState(const LordConfig& cfg)
        : cfg_(cfg), z_(detail::lord_gamma_norm(cfg.horizon)), wealth_(cfg.w0) {
        if (cfg.w0 <= 0.0 || cfg.b0 < 0.0)
            throw std::invalid_argument("LordState: w0 must be positive");
    }

    double gamma(std::size_t j) const { return detail::lord_gamma_raw(j) / z_; }

    // Threshold for step t+1; call record() with the decision afterwards.
    double next_threshold() {
        std::size_t t = t_ + 1;
        double eps = gamma_cached(t) * cfg_.w0;
        for (std::size_t tau : taus_) eps += gamma_cached(t - tau) * cfg_.b0;
        pending_eps_ = eps;
        pending_ = true;
        return pending_eps_;
    }

    void record(bool rejected) {
        ++t_;
        wealth_ -= pending_eps_;
        pending_ = false;
        if (rejected) {
            wealth_ += cfg_.b0;
            taus_.push_back(t_);
        }
    }

    double wealth() const { return wealth_; }
    std::size_t step() const { return t_; }
    bool has_pending() const { return pending_; }

private:
    double gamma_cached(std::size_t j) {
        while (gammas_.size() <= j) {
            std::size_t k = gammas_.size();
            gammas_.push_back(k == 0 ? 0.0 : detail::lord_gamma_raw(k) / z_);
        }
        return gammas_[j];
    }

    LordConfig cfg_;
    double z_;
    double wealth_;
    std::vector<std::size_t> taus_;
    std::vector<double> gammas_;
    std::size_t t_{0};
    double pending_eps_{0.0};
    bool pending_{false};
};

// One-call form: feed the previous decision, get the next threshold.
inline double lord3_next(LordState& state, double /*last_pvalue*/, int last_decision) {
    if (state.has_pending()) state.record(last_decision != 0);
    return state.next_threshold();
}

}  // namespace streamfdr
