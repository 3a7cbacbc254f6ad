#include "pass/exploit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pass::exploit {

namespace {

constexpr int kMaxRedraws = 16;

std::size_t lower_bound_scaled(const std::vector<double>& cum, std::size_t begin,
                               std::size_t end, double offset, double total, double u) {
    // Smallest k in [begin, end) with (cum[k]-offset)/total >= u.
    std::size_t lo = begin, hi = end;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if ((cum[mid] - offset) / total < u) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    return lo < end ? lo : end - 1;
}

std::size_t uniform_fallback_select(std::size_t begin, std::size_t end, double u) {
    // All-ones weights: smallest k with (k-begin+1)/count >= u.
    const double count = static_cast<double>(end - begin);
    std::size_t lo = begin, hi = end;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (static_cast<double>(mid - begin + 1) / count < u) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    return lo < end ? lo : end - 1;
}

void check_u(double u) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw InvalidInput("inverse_cdf_select: u must lie in [0, 1)");
    }
}

}  // namespace

void TurbulenceSchedule::validate() const {
    if (!(h_min > 0.0) || !(h_min <= h0) || !(h0 <= h_max)) {
        throw InvalidInput("TurbulenceSchedule: need 0 < h_min <= h0 <= h_max");
    }
    if (!(rho > 0.0 && rho <= 1.0)) {
        throw InvalidInput("TurbulenceSchedule: rho must lie in (0, 1]");
    }
}

WeightTable build_weights(std::span<const double> residuals) {
    if (residuals.empty()) throw InvalidInput("build_weights: residual vector is empty");
    WeightTable table;
    table.weights.reserve(residuals.size());
    double total = 0.0;
    for (double e : residuals) {
        if (!std::isfinite(e)) throw InvalidInput("build_weights: non-finite residual");
        const double w = e * e;
        table.weights.push_back(w);
        total += w;
    }
    if (total == 0.0) {
        std::fill(table.weights.begin(), table.weights.end(), 1.0);
        total = static_cast<double>(table.weights.size());
    }
    table.probabilities.reserve(table.weights.size());
    table.cdf.reserve(table.weights.size());
    double partial = 0.0;
    for (double w : table.weights) {
        table.probabilities.push_back(w / total);
        partial += w;
        table.cdf.push_back(partial / total);
    }
    return table;
}

std::size_t inverse_cdf_select(const WeightTable& table, double u) {
    check_u(u);
    const auto it = std::lower_bound(table.cdf.begin(), table.cdf.end(), u);
    if (it == table.cdf.end()) return table.cdf.size() - 1;  // guards cdf.back() < 1 rounding
    return static_cast<std::size_t>(it - table.cdf.begin());
}

Point perturb(const Point& anchor, double h, const Domain& domain, RngStream& rng) {
    return perturb(anchor, h, {}, domain, rng);
}

Point perturb(const Point& anchor, double h, std::span<const double> axis_scale,
              const Domain& domain, RngStream& rng) {
    if (!(h > 0.0)) throw InvalidInput("perturb: h must be positive");
    if (anchor.size() != domain.dim()) {
        throw InvalidInput("perturb: anchor dimension does not match domain");
    }
    if (!axis_scale.empty() && axis_scale.size() != domain.dim()) {
        throw InvalidInput("perturb: axis_scale dimension does not match domain");
    }
    Point proposal(anchor.size());
    for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
        for (std::size_t j = 0; j < anchor.size(); ++j) {
            const double sd = axis_scale.empty() ? h : h * axis_scale[j];
            proposal[j] = anchor[j] + sd * rng.normal();
        }
        if (domain.contains(proposal)) return proposal;
    }
    return domain.clamped(std::move(proposal));
}

double update_h(double h_prev, const TurbulenceSchedule& schedule) {
    const double contracted = std::max(schedule.h_min, schedule.rho * h_prev);
    return std::clamp(contracted, schedule.h_min, schedule.h_max);
}

std::vector<Point> exploitation_sample(const Dataset& data, const FittedModel& model,
                                       long m_x, double h, const Domain& domain,
                                       RngStream& rng) {
    if (m_x < 0) throw InvalidInput("exploitation_sample: m_x must be nonnegative");
    if (data.empty()) throw InvalidInput("exploitation_sample: labeled history is empty");
    std::vector<Point> out;
    if (m_x == 0) return out;
    const auto res = residuals(model, data);
    const WeightTable table = build_weights(res);
    out.reserve(static_cast<std::size_t>(m_x));
    for (long k = 0; k < m_x; ++k) {
        const std::size_t j = inverse_cdf_select(table, rng.uniform());
        out.push_back(perturb(data[j].x, h, domain, rng));
    }
    return out;
}

void ExploitationState::add(Point x, double residual) {
    if (!std::isfinite(residual)) throw InvalidInput("ExploitationState: non-finite residual");
    const double prev = cum_weights_.empty() ? 0.0 : cum_weights_.back();
    points_.push_back(std::move(x));
    cum_weights_.push_back(prev + residual * residual);
}

std::size_t ExploitationState::select(double u) const {
    check_u(u);
    if (points_.empty()) throw InvalidInput("ExploitationState: no anchors");
    const std::size_t begin =
        (window_ > 0 && points_.size() > window_) ? points_.size() - window_ : 0;
    const double offset = begin > 0 ? cum_weights_[begin - 1] : 0.0;
    const double total = cum_weights_.back() - offset;
    if (total == 0.0) return uniform_fallback_select(begin, points_.size(), u);
    return lower_bound_scaled(cum_weights_, begin, points_.size(), offset, total, u);
}

std::vector<Point> ExploitationState::sample(long m_x, double h, const Domain& domain,
                                             RngStream& rng) const {
    if (m_x < 0) throw InvalidInput("ExploitationState: m_x must be nonnegative");
    std::vector<Point> out;
    if (m_x == 0) return out;
    if (points_.empty()) throw InvalidInput("ExploitationState: no anchors");
    out.reserve(static_cast<std::size_t>(m_x));
    for (long k = 0; k < m_x; ++k) {
        const std::size_t j = select(rng.uniform());
        out.push_back(perturb(points_[j], h, domain, rng));
    }
    return out;
}

}  // namespace pass::exploit
