#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "streamfdr/detector.hpp"
#include "streamfdr/generator.hpp"
#include "streamfdr/metrics.hpp"
#include "streamfdr/prds.hpp"
#include "streamfdr/svg.hpp"

namespace streamfdr {

struct ExperimentSpec {
    std::string name;
    std::map<std::string, std::string> params;
    std::uint64_t seed{20240801};
    int jobs{1};
    bool quick{false};
    bool plot{false};
    bool check{false};
    std::string out_dir{"out"};

    long long get(const std::string& key, long long dflt) const {
        auto it = params.find(key);
        return it == params.end() ? dflt : std::stoll(it->second);
    }
    double get(const std::string& key, double dflt) const {
        auto it = params.find(key);
        return it == params.end() ? dflt : std::stod(it->second);
    }
};

struct CheckOutcome {
    std::string label;
    bool passed{false};
    std::string detail;
};

struct ExperimentResult {
    std::string results_path;
    std::string summary_path;
    std::vector<CheckOutcome> checks;

    bool checks_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

struct ExperimentInfo {
    std::string name;
    std::string description;
};

inline const std::vector<ExperimentInfo>& experiment_catalog() {
    static const std::vector<ExperimentInfo> cat = {
        {"FdrVsN", "FDR of BH on empirical p-values as a function of the calibration size n, "
                   "Gaussian vs matched Student(5) reference"},
        {"FnrVsN", "FNR counterpart of FdrVsN over the same n grid"},
        {"MfdrAtypicity", "window-level mFDR and FNR of BH and mBH on oracle p-values as the "
                          "anomaly atypicity varies"},
        {"DisjointVsOverlap", "mFDR/FNR agreement between disjoint-block and overlapping-window "
                              "thresholds on one stream"},
        {"Convergence", "cumulative FDP of the overlapping mBH detector as the stream grows"},
        {"CompareLord", "FDR/FNR of overlapping mBH vs the LORD3 online baseline across p-value "
                        "estimation modes"},
        {"OverlapTables", "FDR grid across calibration-set overlap strategies plus max-gap "
                          "permutation tests"},
        {"HeuristicTable", "expected rejections with and without one p-value forced to zero"},
        {"ConformalCompare", "conformal vs empirical p-values: FNR dominance and FDR bound"},
        {"IntermediateDrops", "fine structure of the FDR-vs-n curve for 1 to 4 planted anomalies"},
    };
    return cat;
}

namespace detail {

// Fixed chunk layout, so accumulation order (and thus float results) does not
// depend on the number of worker threads.
inline void run_chunks(int jobs, long long nchunks,
                       const std::function<void(long long)>& fn) {
    if (jobs <= 1) {
        for (long long c = 0; c < nchunks; ++c) fn(c);
        return;
    }
    std::atomic<long long> next{0};
    auto worker = [&]() {
        for (;;) {
            long long c = next.fetch_add(1);
            if (c >= nchunks) return;
            fn(c);
        }
    };
    std::vector<std::thread> threads;
    int nt = std::min<long long>(jobs, nchunks);
    threads.reserve(nt);
    for (int i = 0; i < nt; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
}

inline std::filesystem::path experiment_dir(const ExperimentSpec& spec) {
    std::filesystem::path dir = std::filesystem::path(spec.out_dir) / spec.name;
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// FDR/FNR curves over the calibration-size grid (shared by several
// experiments). Per replication one window of m scores is tested against
// growing prefixes of a single calibration pool, so every grid point is
// evaluated from the same draws.
// ---------------------------------------------------------------------------

inline std::vector<long long> default_n_grid() {
    std::vector<long long> g;
    for (long long k = 1; k <= 200; ++k) g.push_back(10 * k - 1);
    for (long long k = 1; k <= 200; ++k) g.push_back(10 * k);
    std::sort(g.begin(), g.end());
    return g;
}

struct CurveSpec {
    RefDist dist{RefDist::GaussianStd};
    double delta{4.0};
    long long m{100};
    long long m1{1};
    Rational alpha{1, 10};
    std::vector<long long> grid{};
    long long replications{10000};
    bool conformal{false};  // additionally evaluate the conformal estimator
};

struct CurvePoint {
    long long n{0};
    double fdr{0}, fnr{0};
    double fdr_se{0}, fnr_se{0};
    double c_fdr{0}, c_fnr{0};  // conformal variants
    double c_fdr_se{0}, c_fnr_se{0};
};

inline std::vector<CurvePoint> fdr_fnr_curve(const CurveSpec& cs, std::uint64_t seed, int jobs) {
    const auto& grid = cs.grid;
    const long long G = static_cast<long long>(grid.size());
    const long long m = cs.m, m1 = cs.m1;
    const long long n_max = grid.back();
    const long long B = cs.replications;

    const long long nchunks = std::min<long long>(64, B);
    struct Acc {
        std::vector<double> fdp, fnp, fdp2, fnp2, cfdp, cfnp, cfdp2, cfnp2;
    };
    std::vector<Acc> acc(nchunks);
    for (auto& a : acc) {
        a.fdp.assign(G, 0.0); a.fnp.assign(G, 0.0);
        a.fdp2.assign(G, 0.0); a.fnp2.assign(G, 0.0);
        if (cs.conformal) {
            a.cfdp.assign(G, 0.0); a.cfnp.assign(G, 0.0);
            a.cfdp2.assign(G, 0.0); a.cfnp2.assign(G, 0.0);
        }
    }

    detail::run_chunks(jobs, nchunks, [&](long long chunk) {
        long long b0 = chunk * B / nchunks;
        long long b1 = (chunk + 1) * B / nchunks;
        Acc& a = acc[chunk];
        std::vector<double> q(m);
        std::vector<int> is_anom(m);
        std::vector<long long> order(m);
        std::vector<long long> bump(m + 1);
        std::vector<long long> counts(m);      // per sorted query, descending in i
        std::vector<long long> asc(m);         // ascending counts for the kernel
        std::vector<long long> asc1(m);
        for (long long b = b0; b < b1; ++b) {
            Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(b));
            for (long long i = 0; i < m1; ++i) { q[i] = cs.delta; is_anom[i] = 1; }
            for (long long i = m1; i < m; ++i) {
                q[i] = draw_ref(rng, cs.dist, 5);
                is_anom[i] = 0;
            }
            std::iota(order.begin(), order.end(), 0LL);
            std::sort(order.begin(), order.end(),
                      [&](long long x, long long y) { return q[x] < q[y]; });
            std::vector<double> qs(m);
            std::vector<int> anom_s(m);
            for (long long i = 0; i < m; ++i) { qs[i] = q[order[i]]; anom_s[i] = is_anom[order[i]]; }
            std::fill(bump.begin(), bump.end(), 0LL);
            long long gi = 0;
            for (long long j = 1; j <= n_max && gi < G; ++j) {
                double z = draw_ref(rng, cs.dist, 5);
                auto pos = std::upper_bound(qs.begin(), qs.end(), z) - qs.begin();
                ++bump[pos];
                while (gi < G && grid[gi] == j) {
                    long long n = j;
                    // counts[i] = #{z in prefix : z >= qs[i]} via suffix sums
                    long long suf = 0;
                    for (long long i = m; i >= 1; --i) {
                        suf += bump[i];
                        counts[i - 1] = suf;
                    }
                    for (long long i = 0; i < m; ++i) asc[i] = counts[m - 1 - i];
                    long long k = bh_kstar_counts(asc, n, cs.alpha);
                    long long cutoff = bh_count_cutoff(k, n, m, cs.alpha);
                    long long tp = 0;
                    for (long long i = 0; i < m; ++i)
                        if (anom_s[i] && counts[i] <= cutoff) ++tp;
                    double fdp_v = k == 0 ? 0.0 : static_cast<double>(k - tp) / k;
                    double fnp_v = static_cast<double>(m1 - tp) / m1;
                    a.fdp[gi] += fdp_v; a.fdp2[gi] += fdp_v * fdp_v;
                    a.fnp[gi] += fnp_v; a.fnp2[gi] += fnp_v * fnp_v;
                    if (cs.conformal) {
                        for (long long i = 0; i < m; ++i) asc1[i] = asc[i] + 1;
                        long long ck = bh_kstar_counts(asc1, n + 1, cs.alpha);
                        long long ccut = bh_count_cutoff(ck, n + 1, m, cs.alpha) - 1;
                        long long ctp = 0;
                        for (long long i = 0; i < m; ++i)
                            if (anom_s[i] && counts[i] <= ccut) ++ctp;
                        double cfdp = ck == 0 ? 0.0 : static_cast<double>(ck - ctp) / ck;
                        double cfnp = static_cast<double>(m1 - ctp) / m1;
                        a.cfdp[gi] += cfdp; a.cfdp2[gi] += cfdp * cfdp;
                        a.cfnp[gi] += cfnp; a.cfnp2[gi] += cfnp * cfnp;
                    }
                    ++gi;
                }
            }
        }
    });

    std::vector<CurvePoint> out(G);
    auto finish = [&](double sum, double sum2, double& mean, double& se) {
        mean = sum / static_cast<double>(B);
        double var = std::max(0.0, sum2 / static_cast<double>(B) - mean * mean);
        se = std::sqrt(var / static_cast<double>(B));
    };
    for (long long gi = 0; gi < G; ++gi) {
        double sf = 0, sf2 = 0, sn = 0, sn2 = 0, cf = 0, cf2 = 0, cn = 0, cn2 = 0;
        for (const auto& a : acc) {
            sf += a.fdp[gi]; sf2 += a.fdp2[gi];
            sn += a.fnp[gi]; sn2 += a.fnp2[gi];
            if (cs.conformal) {
                cf += a.cfdp[gi]; cf2 += a.cfdp2[gi];
                cn += a.cfnp[gi]; cn2 += a.cfnp2[gi];
            }
        }
        out[gi].n = grid[gi];
        finish(sf, sf2, out[gi].fdr, out[gi].fdr_se);
        finish(sn, sn2, out[gi].fnr, out[gi].fnr_se);
        if (cs.conformal) {
            finish(cf, cf2, out[gi].c_fdr, out[gi].c_fdr_se);
            finish(cn, cn2, out[gi].c_fnr, out[gi].c_fnr_se);
        }
    }
    return out;
}

// Direct Monte-Carlo FDR plus an estimate of the zero-substitution rejection
// distribution P(R(i)=k) at a single calibration size.
struct FdrSpotCheck {
    double mc_fdr{0};
    RejectionDistribution rdist;
    double formula_fdr{0};
};

inline FdrSpotCheck fdr_spot_check(long long n, long long m, long long m1, const Rational& alpha,
                                   double delta, long long B, std::uint64_t seed) {
    std::vector<double> z(n), q(m);
    std::vector<long long> counts(m), asc(m);
    std::vector<double> pmf(m, 0.0);
    double fdp_sum = 0.0;
    for (long long b = 0; b < B; ++b) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(b));
        for (auto& v : z) v = rng.gaussian();
        std::sort(z.begin(), z.end());
        for (long long i = 0; i < m1; ++i) q[i] = delta;
        for (long long i = m1; i < m; ++i) q[i] = rng.gaussian();
        for (long long i = 0; i < m; ++i)
            counts[i] = z.end() - std::lower_bound(z.begin(), z.end(), q[i]);
        asc = counts;
        std::sort(asc.begin(), asc.end());
        long long k = bh_kstar_counts(asc, n, alpha);
        long long cutoff = bh_count_cutoff(k, n, m, alpha);
        long long tp = 0;
        for (long long i = 0; i < m1; ++i)
            if (counts[i] <= cutoff) ++tp;
        fdp_sum += k == 0 ? 0.0 : static_cast<double>(k - tp) / static_cast<double>(k);
        // R(i): zero out one uniformly chosen null p-value and rerun
        long long nulls = m - m1;
        long long pick = m1 + static_cast<long long>(rng.below(nulls));
        long long saved = counts[pick];
        counts[pick] = 0;
        asc = counts;
        std::sort(asc.begin(), asc.end());
        long long ki = bh_kstar_counts(asc, n, alpha);
        counts[pick] = saved;
        pmf[ki - 1] += 1.0;
    }
    FdrSpotCheck out;
    out.mc_fdr = fdp_sum / static_cast<double>(B);
    for (auto& p : pmf) p /= static_cast<double>(B);
    out.rdist.pmf = pmf;
    out.rdist.m = m;
    out.formula_fdr = theoretical_fdr_empirical_bh(n, m, m - m1, alpha, out.rdist);
    return out;
}

// ---------------------------------------------------------------------------
// Window-level mFDR on oracle p-values (atypicity sweeps).
// ---------------------------------------------------------------------------

struct MfdrCell {
    double alpha{0}, pi{0}, delta{0};
    std::string policy;
    double mfdr{0}, mfdr_se{0};
    double fnr{0}, fnr_se{0};
};

inline MfdrCell mfdr_cell(const Rational& alpha, double pi, double delta, bool use_mbh,
                          long long m, long long K, long long B, std::uint64_t seed) {
    Rational level = use_mbh ? mbh_alpha_prime(alpha, m, Rational::from_double(pi, 100000))
                             : alpha;
    double sum_m = 0, sum_m2 = 0, sum_f = 0, sum_f2 = 0;
    // each window holds exactly m1 = round(pi * m) anomalies; only their
    // p-values are shrunk, so FNR can hit 0 exactly once delta is large enough
    long long m1 = std::llround(pi * static_cast<double>(m));
    std::vector<double> p(m);
    std::vector<int> lab(m);
    for (long long i = 0; i < m; ++i) lab[i] = i >= m - m1 ? 1 : 0;
    for (long long b = 0; b < B; ++b) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(b));
        long long FP = 0, R = 0, FN = 0, M1 = 0;
        for (long long k = 0; k < K; ++k) {
            for (long long i = 0; i < m; ++i) {
                double u = rng.uniform();
                p[i] = lab[i] ? u / delta : u;
            }
            BHResult res = bh(p, level);
            std::vector<bool> rej(m, false);
            for (std::size_t idx : res.rejected) rej[idx] = true;
            for (long long i = 0; i < m; ++i) {
                if (lab[i]) {
                    ++M1;
                    if (!rej[i]) ++FN;
                }
                if (rej[i]) {
                    ++R;
                    if (!lab[i]) ++FP;
                }
            }
        }
        double mf = R == 0 ? 0.0 : static_cast<double>(FP) / static_cast<double>(R);
        double fn = M1 == 0 ? 0.0 : static_cast<double>(FN) / static_cast<double>(M1);
        sum_m += mf; sum_m2 += mf * mf;
        sum_f += fn; sum_f2 += fn * fn;
    }
    MfdrCell cell;
    cell.alpha = alpha.value();
    cell.pi = pi;
    cell.delta = delta;
    cell.policy = use_mbh ? "mbh" : "bh";
    cell.mfdr = sum_m / static_cast<double>(B);
    cell.fnr = sum_f / static_cast<double>(B);
    double vm = std::max(0.0, sum_m2 / B - cell.mfdr * cell.mfdr);
    double vf = std::max(0.0, sum_f2 / B - cell.fnr * cell.fnr);
    cell.mfdr_se = std::sqrt(vm / static_cast<double>(B));
    cell.fnr_se = std::sqrt(vf / static_cast<double>(B));
    return cell;
}

// ---------------------------------------------------------------------------
// Individual experiments.
// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace streamfdr

#include "streamfdr/experiments_impl.hpp"
