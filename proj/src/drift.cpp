#include "pass/drift.hpp"

#include <algorithm>
#include <cmath>

namespace pass {

Rect make_drift_region(const Domain& domain, double volume_ratio, RngStream& rng) {
    if (!(volume_ratio > 0.0 && volume_ratio < 1.0)) {
        throw InvalidInput("make_drift_region: volume_ratio must lie in (0, 1)");
    }
    const std::size_t d = domain.dim();
    const double edge_fraction = std::pow(volume_ratio, 1.0 / static_cast<double>(d));
    Rect region;
    region.center.resize(d);
    region.half_widths.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double w = 0.5 * edge_fraction * domain.width(j);
        region.half_widths[j] = w;
        region.center[j] = rng.uniform(domain.lower[j] + w, domain.upper[j] - w);
    }
    return region;
}

double drift_shift(const DriftSpec& spec, const Point& x, long t) {
    if (spec.delta == 0.0 || spec.region.empty() || !spec.region.contains(x)) return 0.0;
    if (spec.kind == DriftKind::abrupt) {
        return t >= spec.onset ? spec.delta : 0.0;
    }
    if (t <= spec.onset) return 0.0;
    if (spec.ramp_end <= spec.onset) return spec.delta;  // degenerate ramp
    const double frac = static_cast<double>(t - spec.onset) /
                        static_cast<double>(spec.ramp_end - spec.onset);
    return spec.delta * std::min(frac, 1.0);
}

double sample_label(const ResponseFn& f, const DriftSpec& spec, const NoiseSpec& noise,
                    const Point& x, long t, RngStream& rng) {
    double y = f(x);
    if (noise.sigma > 0.0) y += noise.sigma * rng.normal();
    return y + drift_shift(spec, x, t);
}

}  // namespace pass
