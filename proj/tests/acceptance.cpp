// End-to-end statistical acceptance checks. Each check prints one PASS/FAIL
// line; the process exits nonzero if any fails. Budgeted for a single core.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "streamfdr/experiments.hpp"
#include "streamfdr/streamfdr.hpp"

using namespace streamfdr;

namespace {

int g_failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& detail) {
    std::printf("[%s] %2d %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.5g", v);
    return buf;
}

// 1. BH on true uniform p-values: FDR is exactly m0*alpha/m.
void check_oracle_bh_exactness() {
    const long long m = 100, m0 = 99, B = 10000;
    const Rational alpha(1, 10);
    double fdp_sum = 0.0;
    std::vector<double> p(m);
    for (long long b = 0; b < B; ++b) {
        Rng rng = Rng::derive(101, static_cast<std::uint64_t>(b));
        p[0] = 0.0;  // one certain anomaly
        for (long long i = 1; i < m; ++i) p[i] = rng.uniform();
        auto res = bh(p, alpha);
        long long fp = 0;
        for (auto idx : res.rejected)
            if (idx != 0) ++fp;
        if (res.k_star > 0)
            fdp_sum += static_cast<double>(fp) / static_cast<double>(res.k_star);
    }
    double fdr = fdp_sum / B;
    double target = static_cast<double>(m0) * alpha.value() / m;
    report(1, "BH on true p-values attains FDR m0*alpha/m", std::abs(fdr - target) <= 0.006,
           "fdr=" + fmt(fdr) + " target=" + fmt(target));
}

// 2. Null empirical p-value is discrete uniform on {0, 1/n, ..., 1}.
void check_empirical_law() {
    const long long n = 10, draws = 100000;
    std::vector<long long> atom(n + 1, 0);
    Rng rng(202);
    for (long long b = 0; b < draws; ++b) {
        CalibrationSet c(CalibStrategy::Fixed, n);
        for (long long i = 0; i < n; ++i) c.push(rng.gaussian());
        ++atom[empirical_pvalue(rng.gaussian(), c).count()];
    }
    double worst = 0.0;
    for (long long k = 0; k <= n; ++k)
        worst = std::max(worst,
                         std::abs(static_cast<double>(atom[k]) / draws - 1.0 / (n + 1)));
    report(2, "null empirical p-value is discrete uniform", worst <= 0.004,
           "max atom deviation " + fmt(worst));
}

// 3. Tuned cardinality controls the FDR; one extra calibration point breaks it.
void check_cardinality_tuning() {
    const long long B = 10000;
    auto fdr_at = [&](long long n) {
        return fdr_spot_check(n, 100, 1, Rational(1, 10), 4.0, B, 303).mc_fdr;
    };
    double f999 = fdr_at(999), f1000 = fdr_at(1000);
    double f1999 = fdr_at(1999), f2000 = fdr_at(2000);
    // the (1999, 2000) spike is smaller than the (999, 1000) one because the
    // floor in the exact formula jumps at a different k there; the pattern
    // (control on the left, clear jump on the right) is what must hold
    bool ok = f999 >= 0.093 && f999 <= 0.105 && (f1000 - f999) >= 0.03 &&
              f1999 >= 0.093 && f1999 <= 0.105 && (f2000 - f1999) >= 0.015;
    report(3, "calibration cardinality n = m/alpha - 1 is sharp", ok,
           "fdr(999)=" + fmt(f999) + " fdr(1000)=" + fmt(f1000) + " fdr(1999)=" + fmt(f1999) +
               " fdr(2000)=" + fmt(f2000));
}

// 4. Exact FDR formula vs direct Monte Carlo.
void check_formula_consistency() {
    bool ok = true;
    std::string detail;
    for (long long n : {999LL, 1000LL, 1499LL, 1999LL}) {
        auto sc = fdr_spot_check(n, 100, 1, Rational(1, 10), 4.0, 10000, 404);
        double gap = std::abs(sc.mc_fdr - sc.formula_fdr);
        if (gap > 0.01) ok = false;
        detail += "n=" + std::to_string(n) + ":" + fmt(gap) + " ";
    }
    report(4, "rejection-count formula matches direct MC FDR", ok, "gaps " + detail);
}

// 5. Gaussian vs matched Student(5) reference: curves agree pointwise.
void check_tail_robustness() {
    CurveSpec g;
    g.grid = default_n_grid();
    g.replications = 10000;
    auto gauss = fdr_fnr_curve(g, 505, 1);
    CurveSpec t = g;
    t.dist = RefDist::StudentDF;
    t.delta = student_matched_shift(4.0);
    auto student = fdr_fnr_curve(t, 506, 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < gauss.size(); ++i)
        worst = std::max(worst, std::abs(gauss[i].fdr - student[i].fdr));
    report(5, "FDR curve is insensitive to reference tail thickness", worst <= 0.02,
           "max pointwise gap " + fmt(worst));
}

// 6. mBH mFDR plateau at (1-pi)*alpha with zero FNR for very atypical anomalies.
void check_mfdr_plateau() {
    bool ok = true;
    std::string detail;
    for (double delta : {100.0, 1000.0, 10000.0}) {
        auto cell = mfdr_cell(Rational(1, 5), 0.07, delta, true, 100, 50, 100, 606);
        double target = (1.0 - 0.07) * 0.2;
        if (std::abs(cell.mfdr - target) > 0.015 || cell.fnr != 0.0) ok = false;
        detail += "d=" + fmt(delta) + ":" + fmt(cell.mfdr) + "/" + fmt(cell.fnr) + " ";
    }
    report(6, "mBH mFDR plateaus at (1-pi)*alpha with FNR 0", ok,
           detail + "target " + fmt(0.93 * 0.2));
}

// 7. Disjoint and overlapping windowings agree in aggregate.
void check_disjoint_vs_overlap() {
    DetectorConfig base;
    base.window_m = 100;
    base.policy.kind = PolicyKind::BH;
    base.policy.alpha = Rational(1, 10);
    base.pvalue_kind = PValueKind::Oracle;
    base.oracle_survival = [](double s) { return s; };
    base.calib_n = 1;
    base.calib_strategy = CalibStrategy::Fixed;

    ConfusionCounts agg_d, agg_o;
    for (long long b = 0; b < 100; ++b) {
        OraclePValueConfig gc;
        gc.pi = 0.01;
        gc.delta = 1000.0;
        gc.length = 10000;
        gc.seed = derive_seed(707, static_cast<std::uint64_t>(b));
        auto series = generate_oracle_pvalues(gc);
        for (auto mode : {Windowing::Disjoint, Windowing::Overlapping}) {
            DetectorConfig cfg = base;
            cfg.windowing = mode;
            auto recs = run_stream(series.pvalues, &series.labels, cfg);
            (mode == Windowing::Disjoint ? agg_d : agg_o) += confusion_from_records(recs);
        }
    }
    double md = ratio0(agg_d.FP, agg_d.R), mo = ratio0(agg_o.FP, agg_o.R);
    double fd = ratio0(agg_d.FN, agg_d.m1), fo = ratio0(agg_o.FN, agg_o.m1);
    bool ok = std::abs(md - mo) <= 0.02 && std::abs(fd - fo) <= 0.02;
    report(7, "disjoint and overlapping windows agree in aggregate", ok,
           "mFDR " + fmt(md) + " vs " + fmt(mo) + ", FNR " + fmt(fd) + " vs " + fmt(fo));
}

// 8. Cumulative FDP of the overlapping mBH detector settles near the target.
void check_convergence() {
    DetectorConfig cfg;
    cfg.window_m = 100;
    cfg.windowing = Windowing::Overlapping;
    cfg.policy.kind = PolicyKind::MBH;
    cfg.policy.alpha = Rational(1, 20);
    cfg.policy.pi_hat = Rational(1, 50);
    cfg.pvalue_kind = PValueKind::Oracle;
    cfg.oracle_survival = [](double s) { return s; };
    cfg.calib_n = 1;
    cfg.calib_strategy = CalibStrategy::Fixed;

    const long long reps = 100;
    long long in_band = 0;
    double fsum = 0, fsum2 = 0;
    for (long long b = 0; b < reps; ++b) {
        OraclePValueConfig gc;
        gc.pi = 0.02;
        gc.delta = 1000.0;
        gc.length = 2000;
        gc.seed = derive_seed(808, static_cast<std::uint64_t>(b));
        auto series = generate_oracle_pvalues(gc);
        auto recs = run_stream(series.pvalues, &series.labels, cfg);
        auto c = confusion_from_records(recs);
        double f = ratio0(c.FP, c.R);
        fsum += f;
        fsum2 += f * f;
        if (f >= 0.03 && f <= 0.07) ++in_band;
    }
    double share = static_cast<double>(in_band) / reps;
    double mean = fsum / reps;
    double se = std::sqrt(std::max(0.0, fsum2 / reps - mean * mean) / reps);
    // With ~40 anomalies by t=2000, the per-run FDP lattice (0, 1/R, 2/R, ...)
    // straddles the band edges, so the per-run share cannot reach 0.9 even
    // though the mean FDP sits on the target; the mean and its standard error
    // are reported alongside for that reason.
    report(8, "cumulative FDP lands in [0.03, 0.07] for >=90% of runs", share >= 0.9,
           "share " + fmt(share) + ", mean FDP " + fmt(mean) + " (se " + fmt(se) + ")");
}

// 9. Overlapping mBH vs the online baseline across p-value estimation modes.
void check_compare_lord_spots() {
    const long long T = 10000, n = 999, reps = 100, m = 100;
    const double delta = 4.0, pi = 0.01;

    auto run_combo = [&](PolicyKind policy, PValueKind pk, CalibStrategy strat,
                         double& fdr, double& fnr) {
        double fsum = 0, nsum = 0;
        for (long long b = 0; b < reps; ++b) {
            MixtureConfig mc;
            mc.pi = pi;
            mc.anomaly_shift = delta;
            mc.length = T;
            mc.seed = derive_seed(909, static_cast<std::uint64_t>(b));
            LabeledSeries series;
            if (pk == PValueKind::Oracle) {
                series = generate_mixture(mc);
            } else {
                // clean prefix fills the calibration set before anomalies start
                Rng rng(mc.seed);
                for (long long i = 0; i < n; ++i) {
                    series.values.push_back(rng.gaussian());
                    series.labels.push_back(0);
                }
                for (long long t = 0; t < T; ++t) {
                    bool a = rng.bernoulli(pi);
                    series.labels.push_back(a ? 1 : 0);
                    series.values.push_back(a ? delta : rng.gaussian());
                }
            }
            DetectorConfig cfg;
            cfg.window_m = m;
            cfg.windowing = Windowing::Overlapping;
            cfg.policy.kind = policy;
            cfg.policy.alpha = Rational(1, 10);
            cfg.policy.pi_hat = Rational(1, 100);
            cfg.policy.lord = LordConfig::defaults(0.1);
            cfg.pvalue_kind = pk;
            if (pk == PValueKind::Oracle) {
                cfg.oracle_survival = [](double s) { return normal_survival(s); };
                cfg.calib_n = 1;
                cfg.calib_strategy = CalibStrategy::Fixed;
            } else {
                cfg.calib_n = n;
                cfg.calib_strategy = strat;
                cfg.force_n = true;  // n tuned to alpha rather than alpha'
            }
            auto recs = run_stream(series, cfg);
            auto c = confusion_from_records(recs);
            fsum += fdp(c);
            nsum += fnp(c);
        }
        fdr = fsum / reps;
        fnr = nsum / reps;
    };

    double f_or, n_or, f_sl, n_sl, f_lo, n_lo;
    run_combo(PolicyKind::MBH, PValueKind::Oracle, CalibStrategy::Fixed, f_or, n_or);
    run_combo(PolicyKind::MBH, PValueKind::Empirical, CalibStrategy::SlidingEstimated, f_sl,
              n_sl);
    run_combo(PolicyKind::LORD3, PValueKind::Empirical, CalibStrategy::SlidingOracle, f_lo,
              n_lo);

    bool ok = std::abs(f_or - 0.101) <= 0.03 && std::abs(n_or - 0.020) <= 0.03 && f_sl >= 0.25 &&
              n_lo >= 0.6;
    report(9, "policy comparison spot checks across estimation modes", ok,
           "mbh/oracle fdr=" + fmt(f_or) + " fnr=" + fmt(n_or) + "; mbh/sliding fdr=" +
               fmt(f_sl) + "; lord/sliding-star fnr=" + fmt(n_lo));
}

// 10. One forced zero p-value increases the expected rejection count by ~1.
void check_heuristic() {
    const long long m = 100;
    const double pi = 0.02, p_anom = normal_survival(4.0);
    bool ok = true;
    std::string detail;
    std::uint64_t stream = 0;
    for (auto alpha : {Rational(1, 20), Rational(1, 10), Rational(1, 5)}) {
        auto gen = [&](Rng& rng, std::vector<PValue>& pv, std::vector<std::size_t>& nulls) {
            for (long long i = 0; i < m; ++i) {
                if (rng.bernoulli(pi)) {
                    pv.push_back(PValue::approx(p_anom));
                } else {
                    pv.push_back(PValue::approx(rng.uniform()));
                    nulls.push_back(static_cast<std::size_t>(i));
                }
            }
        };
        auto h = heuristic_gap(1000, alpha, derive_seed(1010, stream++), gen);
        if (std::abs(h.eri - (h.er + 1.0)) > 0.3) ok = false;
        detail += "a=" + fmt(alpha.value()) + ":" + fmt(h.eri - h.er) + " ";
    }
    report(10, "forcing one rejection adds about one rejection", ok, "gaps " + detail);
}

// 11. Conformal p-values: never more detections, and a super-uniform FDR bound.
void check_conformal() {
    CurveSpec cs;
    cs.grid = default_n_grid();
    cs.replications = 1000;
    cs.conformal = true;
    auto curve = fdr_fnr_curve(cs, 1111, 1);
    bool dominated = true;
    for (const auto& pt : curve)
        if (pt.c_fnr < pt.fnr - 1e-15) dominated = false;

    CurveSpec spot = cs;
    spot.grid = {1000, 2000};
    spot.replications = 10000;
    auto spots = fdr_fnr_curve(spot, 1112, 1);
    bool bounded = true;
    std::string detail;
    for (const auto& pt : spots) {
        double bound = 0.099 + 3.0 * pt.c_fdr_se;
        if (pt.c_fdr > bound) bounded = false;
        detail += "n=" + std::to_string(pt.n) + ":" + fmt(pt.c_fdr) + "<=" + fmt(bound) + " ";
    }
    report(11, "conformal p-values detect less but keep the FDR bound",
           dominated && bounded, detail + (dominated ? "dominated" : "NOT dominated"));
}

// 12. Calibration overlap strategies are statistically indistinguishable.
void check_overlap_tables() {
    auto scenarios = default_overlap_scenarios();
    std::vector<long long> n_values = {249, 250, 499, 500, 749, 750, 999, 1000};
    auto grid = run_overlap_grid(scenarios, n_values, 1000, 20240801);
    bool ok = true;
    std::string detail;
    for (std::size_t c = 0; c < n_values.size(); ++c) {
        std::vector<std::vector<double>> groups;
        for (std::size_t r = 0; r < scenarios.size(); ++r) groups.push_back(grid.fdp[r][c]);
        double p = permutation_test_max_gap(groups, 10000, derive_seed(20240801, 50 + c));
        if (p <= 0.00625) ok = false;
        detail += "n=" + std::to_string(n_values[c]) + ":" + fmt(p) + " ";
    }
    report(12, "no calibration-overlap strategy shifts the FDR", ok, "perm p " + detail);
}

// 13. bh vs the brute-force oracle, continuous and lattice inputs.
void check_bh_oracle_equivalence() {
    Rng rng(1313);
    bool ok = true;
    for (int rep = 0; rep < 10000 && ok; ++rep) {
        auto m = static_cast<std::size_t>(1 + rng.below(50));
        bool lattice = rep % 2 == 0;
        long long den = 1 + static_cast<long long>(rng.below(1000));
        std::vector<PValue> w;
        for (std::size_t i = 0; i < m; ++i) {
            if (lattice)
                w.push_back(PValue::exact(static_cast<long long>(rng.below(den + 1)), den));
            else
                w.push_back(PValue::approx(rng.uniform()));
        }
        Rational alpha(1 + static_cast<long long>(rng.below(30)), 30);
        auto a = bh(w, alpha);
        auto b = bh_bruteforce(w, alpha);
        if (a.k_star != b.k_star || !(a.threshold == b.threshold) || a.rejected != b.rejected)
            ok = false;
    }
    report(13, "step-up rule matches the brute-force oracle", ok, "10000 random instances");
}

}  // namespace

int main() {
    check_oracle_bh_exactness();
    check_empirical_law();
    check_cardinality_tuning();
    check_formula_consistency();
    check_tail_robustness();
    check_mfdr_plateau();
    check_disjoint_vs_overlap();
    check_convergence();
    check_compare_lord_spots();
    check_heuristic();
    check_conformal();
    check_overlap_tables();
    check_bh_oracle_equivalence();
    std::printf("%s: %d failure(s)\n", g_failures == 0 ? "ACCEPTANCE OK" : "ACCEPTANCE FAILED",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
