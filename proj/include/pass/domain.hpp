#pragma once

#include <cstddef>
#include <vector>

#include "pass/errors.hpp"

namespace pass {

// A point in input space; dimension is context-checked against the owning
// Domain by the operations that consume it.
using Point = std::vector<double>;

// Axis-aligned box domain: per-axis bounds with lower < upper.
struct Domain {
    std::vector<double> lower;
    std::vector<double> upper;

    Domain() = default;
    Domain(std::vector<double> lo, std::vector<double> hi);

    std::size_t dim() const { return lower.size(); }
    double width(std::size_t j) const { return upper[j] - lower[j]; }
    bool contains(const Point& x) const;
    Point clamped(Point x) const;
};

struct LabeledSample {
    Point x;
    double y = 0.0;
    long t = 0;  // step at which the label was acquired
};

// Append-only labeled history with nondecreasing acquisition times.
class Dataset {
public:
    Dataset() = default;

    void append(LabeledSample s);
    const std::vector<LabeledSample>& samples() const { return samples_; }
    const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

private:
    std::vector<LabeledSample> samples_;
};

// Axis-aligned hyper-rectangle |x_j - center_j| <= half_width_j.
struct Rect {
    Point center;
    std::vector<double> half_widths;

    bool empty() const { return center.empty(); }
    bool contains(const Point& x) const;
    double volume() const;
};

enum class DriftKind { abrupt, incremental };

// A realized localized drift: an additive shift of magnitude `delta`
// (response units) inside `region`, switched on at `onset`. Incremental
// drift ramps linearly from onset to ramp_end.
struct DriftSpec {
    DriftKind kind = DriftKind::abrupt;
    double delta = 0.0;
    double volume_ratio = 0.0;
    long onset = 0;
    long ramp_end = 0;
    Rect region;

    static DriftSpec none() { return DriftSpec{}; }
};

struct NoiseSpec {
    double sigma = 0.0;
};

}  // namespace pass
