#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "streamfdr/generator.hpp"
#include "streamfdr/multiple_testing.hpp"
#include "streamfdr/pvalues.hpp"
#include "streamfdr/rng.hpp"

namespace streamfdr {

// How the m calibration sets of one window relate to each other.
struct OverlapScenario {
    enum class Kind { SameCal, OverlapCal, IidCal };
    Kind kind{Kind::SameCal};
    double s{0.0};  // shift proportion for OverlapCal

    std::string name() const {
        switch (kind) {
            case Kind::SameCal: return "same";
            case Kind::IidCal: return "iid";
            case Kind::OverlapCal: {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "overlap_s=%g", s);
                return buf;
            }
        }
        return "?";
    }
};

inline std::vector<OverlapScenario> default_overlap_scenarios() {
    std::vector<OverlapScenario> v;
    v.push_back({OverlapScenario::Kind::SameCal, 0.0});
    for (double s : {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5})
        v.push_back({OverlapScenario::Kind::OverlapCal, s});
    v.push_back({OverlapScenario::Kind::IidCal, 0.0});
    return v;
}

// Empirical p-value counts for the m test points of one window under a given
// calibration scheme. counts[i] = #{calibration scores of point i >= x_i}.
inline void overlap_pvalue_counts(Rng& rng, const OverlapScenario& sc, long long n, long long m,
                                  const std::vector<double>& x, std::vector<long long>& counts) {
    counts.assign(m, 0);
    switch (sc.kind) {
        case OverlapScenario::Kind::SameCal: {
            std::vector<double> z(n);
            for (auto& v : z) v = rng.gaussian();
            std::sort(z.begin(), z.end());
            for (long long i = 0; i < m; ++i)
                counts[i] = z.end() - std::lower_bound(z.begin(), z.end(), x[i]);
            break;
        }
        case OverlapScenario::Kind::IidCal: {
            for (long long i = 0; i < m; ++i) {
                long long c = 0;
                for (long long j = 0; j < n; ++j)
                    if (rng.gaussian() >= x[i]) ++c;
                counts[i] = c;
            }
            break;
        }
        case OverlapScenario::Kind::OverlapCal: {
            // Window i covers pool positions [floor(i*s*n), floor(i*s*n) + n).
            double sn = sc.s * static_cast<double>(n);
            auto last = static_cast<long long>(std::floor(static_cast<double>(m - 1) * sn));
            std::vector<double> pool(last + n);
            for (auto& v : pool) v = rng.gaussian();
            for (long long i = 0; i < m; ++i) {
                auto a = static_cast<long long>(std::floor(static_cast<double>(i) * sn));
                long long c = 0;
                const double xi = x[i];
                for (long long j = a; j < a + n; ++j)
                    if (pool[j] >= xi) ++c;
                counts[i] = c;
            }
            break;
        }
    }
}

struct OverlapGridResult {
    std::vector<std::string> row_names;
    std::vector<long long> n_values;
    std::vector<std::vector<double>> fdr;                // [row][col]
    std::vector<std::vector<std::vector<double>>> fdp;   // [row][col][replication]
};

// FDR per (strategy, n) cell: m test points with m1 Dirac anomalies, empirical
// p-values under the strategy, BH at alpha, FDP averaged over replications.
inline OverlapGridResult run_overlap_grid(const std::vector<OverlapScenario>& scenarios,
                                          const std::vector<long long>& n_values,
                                          long long replications, std::uint64_t seed,
                                          long long m = 100, long long m1 = 1,
                                          Rational alpha = Rational(1, 10), double delta = 4.0) {
    OverlapGridResult res;
    res.n_values = n_values;
    for (const auto& sc : scenarios) res.row_names.push_back(sc.name());
    res.fdr.assign(scenarios.size(), std::vector<double>(n_values.size(), 0.0));
    res.fdp.assign(scenarios.size(),
                   std::vector<std::vector<double>>(n_values.size(), std::vector<double>()));

    std::vector<double> x(m);
    std::vector<long long> counts;
    std::vector<long long> sorted_counts;
    for (std::size_t r = 0; r < scenarios.size(); ++r) {
        for (std::size_t c = 0; c < n_values.size(); ++c) {
            long long n = n_values[c];
            std::uint64_t cell_seed =
                derive_seed(seed, (static_cast<std::uint64_t>(r) << 32) | c);
            auto& samples = res.fdp[r][c];
            samples.reserve(replications);
            double sum = 0.0;
            for (long long b = 0; b < replications; ++b) {
                Rng rng = Rng::derive(cell_seed, static_cast<std::uint64_t>(b));
                for (long long i = 0; i < m1; ++i) x[i] = delta;
                for (long long i = m1; i < m; ++i) x[i] = rng.gaussian();
                overlap_pvalue_counts(rng, scenarios[r], n, m, x, counts);
                sorted_counts = counts;
                std::sort(sorted_counts.begin(), sorted_counts.end());
                long long k = bh_kstar_counts(sorted_counts, n, alpha);
                long long cutoff = bh_count_cutoff(k, n, m, alpha);
                long long tp = 0;
                for (long long i = 0; i < m1; ++i)
                    if (counts[i] <= cutoff) ++tp;
                double f = k == 0 ? 0.0
                                  : static_cast<double>(k - tp) / static_cast<double>(k);
                samples.push_back(f);
                sum += f;
            }
            res.fdr[r][c] = sum / static_cast<double>(replications);
        }
    }
    return res;
}

struct PrdsBucket {
    double lo{0}, hi{0};
    long long hits{0};      // replications with p-hat_1 in the bucket
    long long event{0};     // ... where the increasing event also held
    double freq{0};
    double se{0};
};

struct PrdsReport {
    std::vector<PrdsBucket> buckets;
    bool nondecreasing_within(double k_se) const {
        for (std::size_t i = 1; i < buckets.size(); ++i) {
            double slack = k_se * (buckets[i].se + buckets[i - 1].se);
            if (buckets[i].freq < buckets[i - 1].freq - slack) return false;
        }
        return true;
    }
    bool flat_within(double k_se) const {
        for (std::size_t i = 1; i < buckets.size(); ++i) {
            double slack = k_se * (buckets[i].se + buckets[i - 1].se);
            if (std::abs(buckets[i].freq - buckets[i - 1].freq) > slack) return false;
        }
        return true;
    }
};

// One-dimensional monotonicity surrogate of positive regression dependence:
// the increasing event "BH over the other m-1 p-values rejects nothing",
// conditioned on which bucket p-hat_1 falls in. For dependent (shared
// calibration) p-values the conditional frequency should not decrease with
// the bucket; for independent ones it is flat.
inline PrdsReport prds_sanity_check(const OverlapScenario& sc, long long n, long long m,
                                    Rational alpha, const std::vector<double>& bucket_edges,
                                    long long replications, std::uint64_t seed) {
    PrdsReport rep;
    for (std::size_t i = 0; i + 1 < bucket_edges.size(); ++i)
        rep.buckets.push_back({bucket_edges[i], bucket_edges[i + 1], 0, 0, 0.0, 0.0});

    std::vector<double> x(m);
    std::vector<long long> counts, others;
    for (long long b = 0; b < replications; ++b) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(b));
        for (long long i = 0; i < m; ++i) x[i] = rng.gaussian();  // all null
        overlap_pvalue_counts(rng, sc, n, m, x, counts);
        double p1 = static_cast<double>(counts[0]) / static_cast<double>(n);
        others.assign(counts.begin() + 1, counts.end());
        std::sort(others.begin(), others.end());
        bool event = bh_kstar_counts(others, n, alpha) == 0;
        for (auto& bk : rep.buckets) {
            if (p1 >= bk.lo && (p1 < bk.hi || (bk.hi == bucket_edges.back() && p1 <= bk.hi))) {
                ++bk.hits;
                if (event) ++bk.event;
                break;
            }
        }
    }
    for (auto& bk : rep.buckets) {
        if (bk.hits > 0) {
            bk.freq = static_cast<double>(bk.event) / static_cast<double>(bk.hits);
            bk.se = std::sqrt(std::max(bk.freq * (1.0 - bk.freq), 1e-12) /
                              static_cast<double>(bk.hits));
        }
    }
    return rep;
}

}  // namespace streamfdr
