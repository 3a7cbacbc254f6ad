#pragma once

#include <span>
#include <vector>

#include "pass/domain.hpp"
#include "pass/predictor.hpp"
#include "pass/rng.hpp"

namespace pass::exploit {

// Gaussian turbulence scale h_t: geometric contraction with floor, clipped
// to [h_min, h_max]. rho == 1 keeps h constant.
struct TurbulenceSchedule {
    double h0 = 1.0;
    double rho = 1.0;
    double h_min = 1e-12;
    double h_max = 1.0;

    void validate() const;
};

// Residual-weighted selection table: w_i = e_i^2 normalized into a CDF for
// inverse-transform anchor draws. An all-zero weight vector falls back to
// uniform weights.
struct WeightTable {
    std::vector<double> weights;
    std::vector<double> probabilities;
    std::vector<double> cdf;

    std::size_t size() const { return weights.size(); }
};

WeightTable build_weights(std::span<const double> residuals);

// Smallest index k (0-based) with F(k) >= u.
std::size_t inverse_cdf_select(const WeightTable& table, double u);

// Gaussian proposal N(anchor, h^2 I) truncated to the domain: redraw up to
// 16 times, then clamp componentwise.
Point perturb(const Point& anchor, double h, const Domain& domain, RngStream& rng);

// Anisotropic variant with per-axis scales h * axis_scale[j].
Point perturb(const Point& anchor, double h, std::span<const double> axis_scale,
              const Domain& domain, RngStream& rng);

double update_h(double h_prev, const TurbulenceSchedule& schedule);

// Algorithm: residual-weighted inverse transform over the labeled history,
// one (anchor draw, perturb) pair per requested point.
std::vector<Point> exploitation_sample(const Dataset& data, const FittedModel& model,
                                       long m_x, double h, const Domain& domain,
                                       RngStream& rng);

// Incremental form of the same sampler for long runs: residuals are appended
// once as labels arrive, selection is a binary search over running weight
// sums. With the same rng it reproduces exploitation_sample bit for bit.
// A nonzero window restricts anchor selection to the last `window` samples.
class ExploitationState {
public:
    explicit ExploitationState(std::size_t window = 0) : window_(window) {}

    void add(Point x, double residual);
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    std::size_t select(double u) const;
    const Point& anchor(std::size_t i) const { return points_[i]; }

    std::vector<Point> sample(long m_x, double h, const Domain& domain, RngStream& rng) const;

private:
    std::size_t window_;
    std::vector<Point> points_;
    std::vector<double> cum_weights_;  // running sums of e_i^2
};

}  // namespace pass::exploit
