#include "pass/domain.hpp"

#include <algorithm>
#include <string>

namespace pass {

Domain::Domain(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.empty()) {
        throw InvalidInput("Domain: bound vectors must be nonempty and equal length");
    }
    for (std::size_t j = 0; j < lower.size(); ++j) {
        if (!(lower[j] < upper[j])) {
            throw InvalidInput("Domain: lower bound must be below upper bound on axis " +
                               std::to_string(j));
        }
    }
}

bool Domain::contains(const Point& x) const {
    if (x.size() != dim()) return false;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] < lower[j] || x[j] > upper[j]) return false;
    }
    return true;
}

Point Domain::clamped(Point x) const {
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = std::clamp(x[j], lower[j], upper[j]);
    }
    return x;
}

void Dataset::append(LabeledSample s) {
    if (!samples_.empty() && s.t < samples_.back().t) {
        throw InvalidInput("Dataset: sample times must be nondecreasing");
    }
    samples_.push_back(std::move(s));
}

bool Rect::contains(const Point& x) const {
    if (empty() || x.size() != center.size()) return false;
    for (std::size_t j = 0; j < center.size(); ++j) {
        if (std::abs(x[j] - center[j]) > half_widths[j]) return false;
    }
    return true;
}

double Rect::volume() const {
    double v = 1.0;
    for (double w : half_widths) v *= 2.0 * w;
    return v;
}

}  // namespace pass
