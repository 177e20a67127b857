#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "streamfdr/generator.hpp"
#include "streamfdr/multiple_testing.hpp"
#include "streamfdr/pvalues.hpp"
#include "streamfdr/scoring.hpp"

namespace streamfdr {

enum class Windowing { Disjoint, Overlapping };
enum class PolicyKind { BH, MBH, LORD3 };
enum class PValueKind { Empirical, Conformal, Oracle };

struct ThresholdPolicy {
    PolicyKind kind{PolicyKind::BH};
    Rational alpha{1, 10};
    Rational pi_hat{1, 100};
    long long ell{1};
    LordConfig lord{LordConfig::defaults(0.1)};

    // Effective step-up level: alpha for BH, alpha' for mBH.
    Rational level(long long m) const {
        return kind == PolicyKind::MBH ? mbh_alpha_prime(alpha, m, pi_hat) : alpha;
    }
};

constexpr double kWarmupThreshold = -1.0;

struct DetectionRecord {
    long long t{0};
    double pvalue{std::numeric_limits<double>::quiet_NaN()};
    long long p_num{-1};
    long long p_den{0};
    double threshold{kWarmupThreshold};
    int decision{0};
    int label{-1};     // -1 when ground truth is unknown
    bool warmup{false};  // calibration fill / undecided tail; excluded from metrics
};

struct DetectorConfig {
    long long window_m{100};
    Windowing windowing{Windowing::Overlapping};
    ThresholdPolicy policy{};
    PValueKind pvalue_kind{PValueKind::Empirical};
    std::function<double(double)> oracle_survival;  // score -> true p-value
    CalibStrategy calib_strategy{CalibStrategy::SlidingEstimated};
    long long calib_n{999};
    ScoreFunction score{};
    bool force_n{false};

    void validate() const {
        if (window_m < 1) throw std::invalid_argument("DetectorConfig: window_m must be >= 1");
        score.validate();
        if (pvalue_kind == PValueKind::Oracle) {
            if (!oracle_survival)
                throw std::invalid_argument("DetectorConfig: oracle p-values need a survival function");
        } else if (calib_n < 1) {
            throw std::invalid_argument("DetectorConfig: calibration size must be >= 1");
        }
        if (policy.kind == PolicyKind::MBH && policy.pi_hat.num <= 0)
            throw std::invalid_argument("DetectorConfig: mBH needs a positive pi estimate");
        if (policy.kind == PolicyKind::MBH && pvalue_kind == PValueKind::Empirical && !force_n) {
            // n must sit on the tuned lattice n = ceil(ell*m/alpha') - 1.
            Rational ap = policy.level(window_m);
            bool ok = false;
            for (long long ell = 1; ell <= 1000; ++ell) {
                long long n = calibration_cardinality(window_m, ap, ell);
                if (n == calib_n) { ok = true; break; }
                if (n > calib_n) break;
            }
            if (!ok)
                throw std::invalid_argument(
                    "DetectorConfig: calibration size does not match the tuned cardinality "
                    "ceil(ell*m/alpha')-1 for any ell; pass force_n to override");
        }
    }
};

// Threshold and decision for one index of a p-value window (BH/mBH only).
inline std::pair<double, int> decide_point(const std::vector<PValue>& window,
                                           const ThresholdPolicy& policy, std::size_t idx) {
    if (idx >= window.size()) throw std::invalid_argument("decide_point: index out of window");
    if (policy.kind == PolicyKind::LORD3)
        throw std::invalid_argument("decide_point: not defined for a sequential policy");
    auto m = static_cast<long long>(window.size());
    Rational level = policy.level(m);
    BHResult res = bh(window, level);
    int d = res.k_star > 0 &&
                    window[idx].leq_scaled(level, static_cast<long long>(res.k_star), m)
                ? 1
                : 0;
    return {res.threshold.value(), d};
}

// Algorithm: score each observation, turn it into a p-value against the
// calibration set, threshold with the policy on disjoint or overlapping
// windows, update the calibration set with the decision. Decisions are never
// revised; in Disjoint mode they are emitted at block end (latency m).
inline std::vector<DetectionRecord> run_stream(const std::vector<double>& values,
                                               const std::vector<int>* labels,
                                               const DetectorConfig& cfg) {
    cfg.validate();
    if (labels && labels->size() != values.size())
        throw std::invalid_argument("run_stream: labels/values length mismatch");
    if (cfg.calib_strategy == CalibStrategy::SlidingOracle && !labels)
        throw std::invalid_argument("run_stream: SlidingOracle calibration needs labels");

    const auto T = static_cast<long long>(values.size());
    const long long m = cfg.window_m;
    const bool uses_calib = cfg.pvalue_kind != PValueKind::Oracle;
    const long long warm = uses_calib ? cfg.calib_n : 0;
    if (T < warm + m) throw std::invalid_argument("run_stream: series shorter than warm-up + m");

    CalibrationSet calib =
        uses_calib ? CalibrationSet(cfg.calib_strategy, static_cast<std::size_t>(cfg.calib_n))
                   : CalibrationSet(CalibStrategy::Fixed, 1);

    std::vector<DetectionRecord> out;
    out.reserve(values.size());
    auto label_at = [&](long long i) { return labels ? (*labels)[i] : -1; };

    // Warm-up: the first n observations are assumed normal and fill the
    // calibration set; they carry no p-value and a sentinel threshold.
    for (long long i = 0; i < warm; ++i) {
        calib.push(cfg.score(values[i]));
        DetectionRecord r;
        r.t = i + 1;
        r.label = label_at(i);
        r.warmup = true;
        out.push_back(r);
    }

    Rational level = cfg.policy.kind == PolicyKind::LORD3 ? cfg.policy.alpha
                                                          : cfg.policy.level(m);
    std::optional<LordState> lord;
    if (cfg.policy.kind == PolicyKind::LORD3) lord.emplace(cfg.policy.lord);

    struct Pending {
        long long i;
        double s;
        PValue p;
    };
    std::deque<Pending> window;   // overlapping
    std::vector<Pending> block;   // disjoint

    auto make_record = [&](const Pending& pe, double thr, int dec, bool warm_flag) {
        DetectionRecord r;
        r.t = pe.i + 1;
        r.pvalue = pe.p.value();
        if (pe.p.is_exact()) {
            r.p_num = pe.p.count();
            r.p_den = pe.p.denom();
        }
        r.threshold = thr;
        r.decision = dec;
        r.label = label_at(pe.i);
        r.warmup = warm_flag;
        return r;
    };

    auto update_calib = [&](const Pending& pe, int dec) {
        if (!uses_calib) return;
        std::optional<int> lab;
        if (labels) lab = (*labels)[pe.i];
        calib.update(pe.s, dec, lab);
    };

    for (long long i = warm; i < T; ++i) {
        Pending pe;
        pe.i = i;
        pe.s = cfg.score(values[i]);
        switch (cfg.pvalue_kind) {
            case PValueKind::Empirical: pe.p = empirical_pvalue(pe.s, calib); break;
            case PValueKind::Conformal: pe.p = conformal_pvalue(pe.s, calib); break;
            case PValueKind::Oracle: pe.p = PValue::approx(cfg.oracle_survival(pe.s)); break;
        }

        if (cfg.policy.kind == PolicyKind::LORD3) {
            double eps = lord->next_threshold();
            int d = pe.p.value() <= eps ? 1 : 0;
            lord->record(d != 0);
            out.push_back(make_record(pe, eps, d, false));
            update_calib(pe, d);
            continue;
        }

        if (cfg.windowing == Windowing::Overlapping) {
            window.push_back(pe);
            if (static_cast<long long>(window.size()) < m) {
                // not enough p-values for a window yet: undecided
                out.push_back(make_record(pe, kWarmupThreshold, 0, true));
                update_calib(pe, 0);
                continue;
            }
            std::vector<PValue> wp;
            wp.reserve(window.size());
            for (const auto& w : window) wp.push_back(w.p);
            BHResult res = bh(wp, level);
            int d = res.k_star > 0 &&
                            pe.p.leq_scaled(level, static_cast<long long>(res.k_star), m)
                        ? 1
                        : 0;
            out.push_back(make_record(pe, res.threshold.value(), d, false));
            update_calib(pe, d);
            window.pop_front();
        } else {
            block.push_back(pe);
            if (static_cast<long long>(block.size()) == m) {
                std::vector<PValue> bp;
                bp.reserve(block.size());
                for (const auto& b : block) bp.push_back(b.p);
                BHResult res = bh(bp, level);
                for (const auto& b : block) {
                    int d = res.k_star > 0 &&
                                    b.p.leq_scaled(level, static_cast<long long>(res.k_star), m)
                                ? 1
                                : 0;
                    out.push_back(make_record(b, res.threshold.value(), d, false));
                    update_calib(b, d);
                }
                block.clear();
            }
        }
    }

    // Trailing partial disjoint block: no threshold was ever computed for it.
    for (const auto& b : block) {
        out.push_back(make_record(b, kWarmupThreshold, 0, true));
    }
    return out;
}

inline std::vector<DetectionRecord> run_stream(const LabeledSeries& series,
                                               const DetectorConfig& cfg) {
    return run_stream(series.values, &series.labels, cfg);
}

}  // namespace streamfdr
