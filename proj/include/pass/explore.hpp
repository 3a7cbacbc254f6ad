#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pass/domain.hpp"
#include "pass/rng.hpp"

namespace pass::explore {

// Axis-aligned exploration grid: bins[j] cells along axis j, row-major cell
// indexing (first axis slowest), half-open cells except the last bin of an
// axis which includes the upper bound.
struct GridSpec {
    Domain domain;
    std::vector<std::size_t> bins;

    GridSpec() = default;
    GridSpec(Domain d, std::vector<std::size_t> b);

    std::size_t cell_count() const;
    double cell_width(std::size_t axis) const {
        return domain.width(axis) / static_cast<double>(bins[axis]);
    }
    double min_cell_width() const;

    std::size_t axis_cell(std::size_t axis, double coord) const;
    void cell_coords(std::size_t cell, std::vector<std::size_t>& out) const;
};

std::size_t cell_of(const GridSpec& grid, const Point& x);

// Sparse last-visit times: only visited cells are stored, a missing cell
// reads as tau = 0.
class LastVisitMap {
public:
    long last_visit(std::size_t cell) const {
        const auto it = visits_.find(cell);
        return it == visits_.end() ? 0 : it->second;
    }

    void stamp(std::size_t cell, long t);

    std::size_t stored_cells() const { return visits_.size(); }

    // Entries sorted by cell index, for reproducible dumps.
    std::vector<std::pair<std::size_t, long>> sorted_entries() const;

private:
    std::unordered_map<std::size_t, long> visits_;
};

// min{ delta_t / min{t, cell_count}, 1 }
double acceptance_prob(long delta_t, long t, std::size_t cell_count);

// Time-weighted accept-reject draw of m_e points. Stamps the cells touched
// by the exploitation set first, then proposes cells uniformly and accepts
// with probability acceptance_prob, drawing the accepted point uniformly
// inside the cell. Mutates `visits`. Raises ProgressFailureError after
// 10000 * m_e rejected proposals.
std::vector<Point> exploration_sample(const GridSpec& grid, LastVisitMap& visits, long t,
                                      long m_e, std::span<const Point> exploit_set,
                                      RngStream& rng);

// CSV dump (cell_index, tau), sorted by cell index.
void dump_visits_csv(const LastVisitMap& visits, std::ostream& os);

}  // namespace pass::explore
