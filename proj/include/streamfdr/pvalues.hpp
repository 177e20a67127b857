#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "streamfdr/rational.hpp"

namespace streamfdr {

enum class CalibStrategy { Fixed, IID, SlidingEstimated, SlidingOracle, OverlappingShift };

// Ordered buffer of reference scores. A sorted mirror is kept so that
// count-of-scores >= s is a binary search instead of a linear scan.
class CalibrationSet {
public:
    CalibrationSet() = default;
    CalibrationSet(CalibStrategy strategy, std::size_t capacity, double shift_s = 0.0)
        : strategy_(strategy), capacity_(capacity), shift_s_(shift_s) {
        if (capacity == 0) throw std::invalid_argument("CalibrationSet: capacity must be positive");
        if (strategy == CalibStrategy::OverlappingShift && (shift_s <= 0.0 || shift_s > 1.0))
            throw std::invalid_argument("CalibrationSet: shift proportion must be in (0,1]");
    }

    CalibStrategy strategy() const { return strategy_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return buf_.size(); }
    bool full() const { return buf_.size() == capacity_; }
    const std::deque<double>& values() const { return buf_; }

    // Unconditional append (warm-up fill), evicting the oldest at capacity.
    void push(double s) {
        if (buf_.size() == capacity_) pop_oldest();
        buf_.push_back(s);
        sorted_.insert(std::lower_bound(sorted_.begin(), sorted_.end(), s), s);
    }

    std::size_t count_geq(double s) const {
        return sorted_.end() - std::lower_bound(sorted_.begin(), sorted_.end(), s);
    }

    // Post-decision maintenance. IID and OverlappingShift draw fresh reference
    // data instead (simulation only); see refresh() and shift_in().
    void update(double score, int decision, std::optional<int> true_label = std::nullopt) {
        switch (strategy_) {
            case CalibStrategy::Fixed:
            case CalibStrategy::IID:
            case CalibStrategy::OverlappingShift:
                break;
            case CalibStrategy::SlidingEstimated:
                if (decision == 0) push(score);
                break;
            case CalibStrategy::SlidingOracle:
                if (!true_label)
                    throw std::invalid_argument("CalibrationSet: SlidingOracle needs a true label");
                if (*true_label == 0) push(score);
                break;
        }
    }

    // IID strategy: replace the whole buffer with fresh reference draws.
    void refresh(const std::vector<double>& fresh) {
        if (fresh.size() != capacity_)
            throw std::invalid_argument("CalibrationSet: refresh needs exactly n draws");
        buf_.assign(fresh.begin(), fresh.end());
        sorted_.assign(fresh.begin(), fresh.end());
        std::sort(sorted_.begin(), sorted_.end());
    }

    // OverlappingShift: advance the window by floor(s*n) fresh reference points.
    void shift_in(const std::vector<double>& fresh) {
        for (double s : fresh) push(s);
    }

    std::size_t shift_count() const {
        return static_cast<std::size_t>(shift_s_ * static_cast<double>(capacity_));
    }

private:
    void pop_oldest() {
        double old = buf_.front();
        buf_.pop_front();
        sorted_.erase(std::lower_bound(sorted_.begin(), sorted_.end(), old));
    }

    CalibStrategy strategy_{CalibStrategy::Fixed};
    std::size_t capacity_{1};
    double shift_s_{0.0};
    std::deque<double> buf_;
    std::vector<double> sorted_;
};

// (1/n) * #{i : z_i >= s}; exact lattice rational with denominator n.
inline PValue empirical_pvalue(double s, const CalibrationSet& calib) {
    if (!calib.full()) throw std::logic_error("empirical_pvalue: calibration set not full");
    auto n = static_cast<long long>(calib.capacity());
    return PValue::exact(static_cast<long long>(calib.count_geq(s)), n);
}

// (1 + #{i : z_i >= s}) / (n+1); super-uniform, never below 1/(n+1).
inline PValue conformal_pvalue(double s, const CalibrationSet& calib) {
    if (!calib.full()) throw std::logic_error("conformal_pvalue: calibration set not full");
    auto n = static_cast<long long>(calib.capacity());
    return PValue::exact(1 + static_cast<long long>(calib.count_geq(s)), n + 1);
}

}  // namespace streamfdr
