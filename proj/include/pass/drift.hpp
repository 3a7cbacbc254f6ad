#pragma once

#include <functional>

#include "pass/domain.hpp"
#include "pass/rng.hpp"

namespace pass {

using ResponseFn = std::function<double(const Point&)>;

// Draw an axis-aligned drift region occupying `volume_ratio` of the
// domain's volume: half-widths w_j = 0.5 * volume_ratio^(1/d) * range_j,
// center uniform over the positions that keep the region inside the domain.
Rect make_drift_region(const Domain& domain, double volume_ratio, RngStream& rng);

// Additive shift applied at point x and step t. Abrupt: full magnitude from
// onset. Incremental: linear ramp, zero at onset, full from ramp_end.
double drift_shift(const DriftSpec& spec, const Point& x, long t);

// Ground-truth label: f(x) + Gaussian noise + drift shift.
double sample_label(const ResponseFn& f, const DriftSpec& spec, const NoiseSpec& noise,
                    const Point& x, long t, RngStream& rng);

}  // namespace pass
