#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace streamfdr {

// Atypicity score: higher means more atypical.
struct ScoreFunction {
    enum class Kind { Identity, ZScore, KNN, KDE };

    Kind kind{Kind::Identity};
    double mu{0.0};
    double sigma{1.0};
    std::size_t k{1};
    double bandwidth{1.0};
    std::vector<double> train;

    void validate() const {
        switch (kind) {
            case Kind::Identity:
                break;
            case Kind::ZScore:
                if (sigma <= 0.0) throw std::invalid_argument("ZScore: sigma must be positive");
                break;
            case Kind::KNN:
                if (train.empty()) throw std::invalid_argument("KNN: empty training set");
                if (k == 0 || k > train.size())
                    throw std::invalid_argument("KNN: k must be in [1, train size]");
                break;
            case Kind::KDE:
                if (train.empty()) throw std::invalid_argument("KDE: empty training set");
                if (bandwidth <= 0.0) throw std::invalid_argument("KDE: bandwidth must be positive");
                break;
        }
    }

    double operator()(double x) const {
        switch (kind) {
            case Kind::Identity:
                return x;
            case Kind::ZScore:
                return std::abs(x - mu) / sigma;
            case Kind::KNN: {
                // Mean distance to the k nearest training points; ties in
                // distance broken by training index order.
                std::vector<std::pair<double, std::size_t>> d;
                d.reserve(train.size());
                for (std::size_t i = 0; i < train.size(); ++i)
                    d.emplace_back(std::abs(x - train[i]), i);
                std::sort(d.begin(), d.end());
                double sum = 0.0;
                for (std::size_t i = 0; i < k; ++i) sum += d[i].first;
                return sum / static_cast<double>(k);
            }
            case Kind::KDE: {
                double s = 0.0;
                double h2 = 2.0 * bandwidth * bandwidth;
                for (double z : train) s += -std::exp(-(x - z) * (x - z) / h2);
                return s / static_cast<double>(train.size());
            }
        }
        return x;
    }

    static ScoreFunction identity() { return ScoreFunction{}; }

    static ScoreFunction zscore(double mu, double sigma) {
        ScoreFunction f;
        f.kind = Kind::ZScore;
        f.mu = mu;
        f.sigma = sigma;
        f.validate();
        return f;
    }

    static ScoreFunction knn(std::size_t k, std::vector<double> train) {
        ScoreFunction f;
        f.kind = Kind::KNN;
        f.k = k;
        f.train = std::move(train);
        f.validate();
        return f;
    }

    static ScoreFunction kde(double bandwidth, std::vector<double> train) {
        ScoreFunction f;
        f.kind = Kind::KDE;
        f.bandwidth = bandwidth;
        f.train = std::move(train);
        f.validate();
        return f;
    }
};

inline ScoreFunction fit_zscore(const std::vector<double>& train) {
    if (train.size() < 2) throw std::invalid_argument("fit_zscore: need at least 2 points");
    double mean = std::accumulate(train.begin(), train.end(), 0.0) /
                  static_cast<double>(train.size());
    double ss = 0.0;
    for (double z : train) ss += (z - mean) * (z - mean);
    double sigma = std::sqrt(ss / static_cast<double>(train.size() - 1));
    if (sigma == 0.0) throw std::invalid_argument("fit_zscore: degenerate (constant) training set");
    return ScoreFunction::zscore(mean, sigma);
}

}  // namespace streamfdr
