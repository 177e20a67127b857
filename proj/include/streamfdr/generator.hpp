#pragma once

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "streamfdr/rng.hpp"

namespace streamfdr {

enum class RefDist { GaussianStd, StudentDF };

struct MixtureConfig {
    double pi{0.01};
    RefDist ref_dist{RefDist::GaussianStd};
    int student_nu{5};
    double anomaly_shift{4.0};
    long long length{10000};
    std::uint64_t seed{0};

    void validate() const {
        if (pi < 0.0 || pi > 1.0) throw std::invalid_argument("MixtureConfig: pi must be in [0,1]");
        if (length < 1) throw std::invalid_argument("MixtureConfig: length must be >= 1");
        if (ref_dist == RefDist::StudentDF && student_nu < 1)
            throw std::invalid_argument("MixtureConfig: student_nu must be >= 1");
    }
};

struct LabeledSeries {
    std::vector<double> values;
    std::vector<int> labels;
};

struct OraclePValueConfig {
    double pi{0.01};
    double delta{1000.0};  // atypicity level, anomalies ~ U([0, 1/delta])
    long long length{10000};
    std::uint64_t seed{0};

    void validate() const {
        if (pi < 0.0 || pi > 1.0)
            throw std::invalid_argument("OraclePValueConfig: pi must be in [0,1]");
        if (delta < 1.0) throw std::invalid_argument("OraclePValueConfig: delta must be >= 1");
        if (length < 1) throw std::invalid_argument("OraclePValueConfig: length must be >= 1");
    }
};

inline double draw_ref(Rng& rng, RefDist dist, int nu) {
    return dist == RefDist::GaussianStd ? rng.gaussian() : rng.student_t(nu);
}

inline LabeledSeries generate_mixture(const MixtureConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    LabeledSeries out;
    out.values.reserve(cfg.length);
    out.labels.reserve(cfg.length);
    for (long long t = 0; t < cfg.length; ++t) {
        bool anomaly = rng.bernoulli(cfg.pi);
        out.labels.push_back(anomaly ? 1 : 0);
        out.values.push_back(anomaly ? cfg.anomaly_shift
                                     : draw_ref(rng, cfg.ref_dist, cfg.student_nu));
    }
    return out;
}

struct OraclePValueSeries {
    std::vector<double> pvalues;
    std::vector<int> labels;
};

inline OraclePValueSeries generate_oracle_pvalues(const OraclePValueConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    OraclePValueSeries out;
    out.pvalues.reserve(cfg.length);
    out.labels.reserve(cfg.length);
    for (long long t = 0; t < cfg.length; ++t) {
        bool anomaly = rng.bernoulli(cfg.pi);
        out.labels.push_back(anomaly ? 1 : 0);
        double u = rng.uniform();
        out.pvalues.push_back(anomaly ? u / cfg.delta : u);
    }
    return out;
}

inline double normal_survival(double x) {
    return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), x));
}

inline double student_survival(double x, int nu) {
    return boost::math::cdf(
        boost::math::complement(boost::math::students_t_distribution<double>(nu), x));
}

// Shift for Student(5) anomalies with the same right-tail mass as a Gaussian
// shift delta_gauss, so the two scenarios are equally hard to detect.
inline double student_matched_shift(double delta_gauss) {
    if (!std::isfinite(delta_gauss))
        throw std::invalid_argument("student_matched_shift: non-finite input");
    double target = normal_survival(delta_gauss);
    double lo = -1e8, hi = 1e8;
    // Survival is strictly decreasing: bisect S_T5(x) = target.
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (student_survival(mid, 5) > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * std::max(1.0, std::abs(lo))) break;
    }
    return 0.5 * (lo + hi);
}

inline void write_series_csv(std::ostream& os, const std::vector<double>& values,
                             const std::vector<int>* labels) {
    os << "t,value";
    if (labels) os << ",label";
    os << "\n";
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        int len = std::snprintf(buf, sizeof(buf), "%lld,%.17g", static_cast<long long>(i + 1),
                                values[i]);
        os.write(buf, len);
        if (labels) {
            os << ',' << (*labels)[i];
        }
        os << '\n';
    }
}

}  // namespace streamfdr
