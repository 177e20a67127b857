#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "streamfdr/detector.hpp"
#include "streamfdr/multiple_testing.hpp"
#include "streamfdr/rational.hpp"
#include "streamfdr/rng.hpp"

namespace streamfdr {

// Every error-rate ratio in this module shares the 0/0 = 0 convention.
inline double ratio0(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

struct ConfusionCounts {
    long long R{0};   // rejections
    long long FP{0};  // false positives
    long long FN{0};  // false negatives
    long long m1{0};  // true anomalies
    long long m0{0};  // true nulls

    void validate() const {
        if (FP > R || FN > m1 || R < 0 || FP < 0 || FN < 0 || m1 < 0 || m0 < 0)
            throw std::invalid_argument("ConfusionCounts: inconsistent counts");
    }

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        R += o.R; FP += o.FP; FN += o.FN; m1 += o.m1; m0 += o.m0;
        return *this;
    }
};

inline ConfusionCounts confusion_from_records(const std::vector<DetectionRecord>& records,
                                              bool include_warmup = false) {
    ConfusionCounts c;
    for (const auto& r : records) {
        if (r.warmup && !include_warmup) continue;
        if (r.label < 0) throw std::invalid_argument("confusion_from_records: missing labels");
        if (r.label == 1) ++c.m1; else ++c.m0;
        if (r.decision == 1) {
            ++c.R;
            if (r.label == 0) ++c.FP;
        } else if (r.label == 1) {
            ++c.FN;
        }
    }
    return c;
}

inline double fdp(const ConfusionCounts& c) {
    return ratio0(static_cast<double>(c.FP), static_cast<double>(c.R));
}

inline double fnp(const ConfusionCounts& c) {
    return ratio0(static_cast<double>(c.FN), static_cast<double>(c.m1));
}

// Ratio of sums over windows (not mean of per-window ratios).
inline double mfdr_estimate(const std::vector<ConfusionCounts>& windows) {
    if (windows.empty()) throw std::invalid_argument("mfdr_estimate: no windows");
    long long fp = 0, r = 0;
    for (const auto& w : windows) { fp += w.FP; r += w.R; }
    return ratio0(static_cast<double>(fp), static_cast<double>(r));
}

struct RejectionDistribution {
    std::vector<double> pmf;  // pmf[k-1] = P(R(i) = k), k in [1, m]
    long long m{0};

    void validate() const {
        if (static_cast<long long>(pmf.size()) != m || m < 1)
            throw std::invalid_argument("RejectionDistribution: wrong support size");
        double s = 0.0;
        for (double p : pmf) {
            if (p < 0.0) throw std::invalid_argument("RejectionDistribution: negative mass");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("RejectionDistribution: mass does not sum to 1");
    }
};

// FDR of BH on empirical p-values with calibration cardinality n:
// FDR = m0 * sum_k [(floor(alpha*k*n/m) + 1) / (n+1)] / k * P(R(i) = k).
inline double theoretical_fdr_empirical_bh(long long n, long long m, long long m0,
                                           const Rational& alpha,
                                           const RejectionDistribution& rdist) {
    rdist.validate();
    if (rdist.m != m) throw std::invalid_argument("theoretical_fdr_empirical_bh: m mismatch");
    double sum = 0.0;
    for (long long k = 1; k <= m; ++k) {
        double pk = rdist.pmf[k - 1];
        if (pk == 0.0) continue;
        auto fl = static_cast<long long>((static_cast<__int128>(alpha.num) * k * n) /
                                         (static_cast<__int128>(alpha.den) * m));
        sum += static_cast<double>(fl + 1) / static_cast<double>(n + 1) / static_cast<double>(k) *
               pk;
    }
    return static_cast<double>(m0) * sum;
}

// Fractional part of alpha*k*n/m, exact for rational alpha.
inline double q_fractional(long long n, long long k, long long m, const Rational& alpha) {
    if (n < 1 || k < 1 || m < 1) throw std::invalid_argument("q_fractional: bad arguments");
    auto num = static_cast<__int128>(alpha.num) * k * n;
    auto den = static_cast<__int128>(alpha.den) * m;
    auto rem = num % den;
    return static_cast<double>(rem) / static_cast<double>(den);
}

// E[R] = m*pi*(1-beta)/(1-alpha) under window-level mFDR = alpha, FNR = beta.
inline double expected_rejections(long long m, double pi, double alpha, double beta) {
    if (alpha >= 1.0) throw std::domain_error("expected_rejections: alpha must be < 1");
    return static_cast<double>(m) * pi * (1.0 - beta) / (1.0 - alpha);
}

struct HeuristicGap {
    double er{0};        // E[R]
    double eri{0};       // E[R(i)], one uniformly chosen null zeroed out
    double gap{0};       // eri - er (the approximation predicts 1)
    bool saturated{false};  // every window rejected everything; gap uninformative
};

// One window per replication via gen(rng, pvalues, null_indices).
inline HeuristicGap heuristic_gap(
    long long replications, const Rational& alpha, std::uint64_t seed,
    const std::function<void(Rng&, std::vector<PValue>&, std::vector<std::size_t>&)>& gen) {
    double sum_r = 0.0, sum_ri = 0.0;
    bool all_saturated = true;
    std::vector<PValue> pv;
    std::vector<std::size_t> nulls;
    for (long long b = 0; b < replications; ++b) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(b));
        pv.clear();
        nulls.clear();
        gen(rng, pv, nulls);
        if (pv.empty() || nulls.empty())
            throw std::invalid_argument("heuristic_gap: generator produced no window/nulls");
        BHResult base = bh(pv, alpha);
        std::size_t i = nulls[rng.below(nulls.size())];
        PValue saved = pv[i];
        pv[i] = PValue::exact(0, 1);
        BHResult zeroed = bh(pv, alpha);
        pv[i] = saved;
        sum_r += static_cast<double>(base.k_star);
        sum_ri += static_cast<double>(zeroed.k_star);
        if (base.k_star != pv.size()) all_saturated = false;
    }
    HeuristicGap h;
    h.er = sum_r / static_cast<double>(replications);
    h.eri = sum_ri / static_cast<double>(replications);
    h.saturated = all_saturated;
    h.gap = h.saturated ? 0.0 : h.eri - h.er;
    return h;
}

namespace detail {
inline double max_gap_of_means(const std::vector<double>& data,
                               const std::vector<std::size_t>& sizes) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::size_t off = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        double s = 0.0;
        for (std::size_t i = 0; i < sizes[g]; ++i) s += data[off + i];
        double mean = s / static_cast<double>(sizes[g]);
        lo = std::min(lo, mean);
        hi = std::max(hi, mean);
        off += sizes[g];
    }
    return hi - lo;
}

inline bool multinomial_at_most(const std::vector<std::size_t>& sizes, long long limit,
                                long long& total) {
    // total = N! / prod(sizes!) computed incrementally; stop early past limit.
    long long n = 0;
    double t = 1.0;
    for (std::size_t sz : sizes) {
        for (std::size_t i = 1; i <= sz; ++i) {
            ++n;
            t *= static_cast<double>(n) / static_cast<double>(i);
            if (t > static_cast<double>(limit) * 2.0) return false;
        }
    }
    total = static_cast<long long>(std::llround(t));
    return total <= limit;
}

// Assign each pool element to one of the groups with remaining capacity; every
// distinguishable assignment is visited exactly once.
inline void enumerate_assignments(const std::vector<double>& pool,
                                  const std::vector<std::size_t>& sizes,
                                  std::vector<std::size_t>& remaining, std::vector<double>& sums,
                                  std::size_t idx, double observed, long long& ge,
                                  long long& total) {
    if (idx == pool.size()) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t g = 0; g < sizes.size(); ++g) {
            double mean = sums[g] / static_cast<double>(sizes[g]);
            lo = std::min(lo, mean);
            hi = std::max(hi, mean);
        }
        ++total;
        if (hi - lo >= observed - 1e-12) ++ge;
        return;
    }
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        if (remaining[g] == 0) continue;
        --remaining[g];
        sums[g] += pool[idx];
        enumerate_assignments(pool, sizes, remaining, sums, idx + 1, observed, ge, total);
        sums[g] -= pool[idx];
        ++remaining[g];
    }
}
}  // namespace detail

// Two-sided permutation test with the maximal gap between group means as the
// statistic. Exhaustive when the number of distinct assignments fits in
// n_permutations, Monte-Carlo otherwise.
inline double permutation_test_max_gap(const std::vector<std::vector<double>>& groups,
                                       long long n_permutations, std::uint64_t seed) {
    if (groups.size() < 2) throw std::invalid_argument("permutation_test_max_gap: need >= 2 groups");
    std::vector<double> pool;
    std::vector<std::size_t> sizes;
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("permutation_test_max_gap: empty group");
        sizes.push_back(g.size());
        pool.insert(pool.end(), g.begin(), g.end());
    }
    std::vector<double> flat = pool;
    double observed = detail::max_gap_of_means(flat, sizes);

    long long total = 0;
    if (detail::multinomial_at_most(sizes, n_permutations, total)) {
        long long ge = 0, seen = 0;
        std::vector<std::size_t> remaining = sizes;
        std::vector<double> sums(sizes.size(), 0.0);
        detail::enumerate_assignments(pool, sizes, remaining, sums, 0, observed, ge, seen);
        return static_cast<double>(ge) / static_cast<double>(seen);
    }

    Rng rng(seed);
    long long ge = 0;
    for (long long b = 0; b < n_permutations; ++b) {
        rng.shuffle(pool.begin(), pool.end());
        if (detail::max_gap_of_means(pool, sizes) >= observed - 1e-12) ++ge;
    }
    return static_cast<double>(1 + ge) / static_cast<double>(1 + n_permutations);
}

}  // namespace streamfdr
