#include "pass/explore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pass::explore {

namespace {

constexpr long kAttemptsPerPoint = 10000;

}  // namespace

GridSpec::GridSpec(Domain d, std::vector<std::size_t> b)
    : domain(std::move(d)), bins(std::move(b)) {
    if (bins.size() != domain.dim()) {
        throw InvalidInput("GridSpec: bin vector length must match domain dimension");
    }
    for (std::size_t bj : bins) {
        if (bj < 1) throw InvalidInput("GridSpec: every axis needs at least one bin");
    }
}

std::size_t GridSpec::cell_count() const {
    std::size_t n = 1;
    for (std::size_t bj : bins) n *= bj;
    return n;
}

double GridSpec::min_cell_width() const {
    double w = cell_width(0);
    for (std::size_t j = 1; j < bins.size(); ++j) w = std::min(w, cell_width(j));
    return w;
}

std::size_t GridSpec::axis_cell(std::size_t axis, double coord) const {
    const double rel = (coord - domain.lower[axis]) / cell_width(axis);
    auto c = static_cast<long>(rel);
    if (c < 0) c = 0;
    const auto last = static_cast<long>(bins[axis]) - 1;
    if (c > last) c = last;  // upper bound belongs to the last bin
    return static_cast<std::size_t>(c);
}

void GridSpec::cell_coords(std::size_t cell, std::vector<std::size_t>& out) const {
    out.resize(bins.size());
    for (std::size_t j = bins.size(); j-- > 0;) {
        out[j] = cell % bins[j];
        cell /= bins[j];
    }
}

std::size_t cell_of(const GridSpec& grid, const Point& x) {
    if (!grid.domain.contains(x)) {
        throw InvalidInput("cell_of: point lies outside the grid domain");
    }
    std::size_t idx = 0;
    for (std::size_t j = 0; j < grid.bins.size(); ++j) {
        idx = idx * grid.bins[j] + grid.axis_cell(j, x[j]);
    }
    return idx;
}

void LastVisitMap::stamp(std::size_t cell, long t) {
    auto [it, inserted] = visits_.try_emplace(cell, t);
    if (!inserted) {
        if (t < it->second) {
            throw InvalidInput("LastVisitMap: stamp time regression on cell " +
                               std::to_string(cell));
        }
        it->second = t;
    }
}

std::vector<std::pair<std::size_t, long>> LastVisitMap::sorted_entries() const {
    std::vector<std::pair<std::size_t, long>> entries(visits_.begin(), visits_.end());
    std::sort(entries.begin(), entries.end());
    return entries;
}

double acceptance_prob(long delta_t, long t, std::size_t cell_count) {
    const double denom = static_cast<double>(
        std::min<long>(t, static_cast<long>(cell_count)));
    return std::min(static_cast<double>(delta_t) / denom, 1.0);
}

std::vector<Point> exploration_sample(const GridSpec& grid, LastVisitMap& visits, long t,
                                      long m_e, std::span<const Point> exploit_set,
                                      RngStream& rng) {
    if (t < 1) throw InvalidInput("exploration_sample: t must be >= 1");
    if (m_e < 0) throw InvalidInput("exploration_sample: m_e must be nonnegative");

    for (const Point& x : exploit_set) visits.stamp(cell_of(grid, x), t);

    std::vector<Point> out;
    if (m_e == 0) return out;
    out.reserve(static_cast<std::size_t>(m_e));

    const std::size_t n_cells = grid.cell_count();
    const std::size_t d = grid.domain.dim();
    const long attempt_budget = kAttemptsPerPoint * m_e;
    long rejected = 0;
    std::vector<std::size_t> coords;
    Point x(d);
    while (out.size() < static_cast<std::size_t>(m_e)) {
        const std::size_t cell = rng.uniform_below(n_cells);
        const double p = acceptance_prob(t - visits.last_visit(cell), t, n_cells);
        const double u = rng.uniform();
        if (u < p) {
            grid.cell_coords(cell, coords);
            for (std::size_t j = 0; j < d; ++j) {
                const double w = grid.cell_width(j);
                const double lo = grid.domain.lower[j] + w * static_cast<double>(coords[j]);
                x[j] = lo + w * rng.uniform();
                // Uniform draws target [lo, lo+w); nudge any float spill back
                // into the proposed bin so cell_of(x) == cell holds exactly.
                while (grid.axis_cell(j, x[j]) > coords[j]) x[j] = std::nextafter(x[j], lo);
                while (grid.axis_cell(j, x[j]) < coords[j]) {
                    x[j] = std::nextafter(x[j], grid.domain.upper[j]);
                }
            }
            visits.stamp(cell, t);
            out.push_back(x);
        } else if (++rejected > attempt_budget) {
            throw ProgressFailureError(
                "exploration_sample: no acceptable cell after " +
                std::to_string(attempt_budget) + " rejected proposals at t=" +
                std::to_string(t));
        }
    }
    return out;
}

void dump_visits_csv(const LastVisitMap& visits, std::ostream& os) {
    os << "cell_index,tau\n";
    for (const auto& [cell, tau] : visits.sorted_entries()) {
        os << cell << ',' << tau << '\n';
    }
}

}  // namespace pass::explore
