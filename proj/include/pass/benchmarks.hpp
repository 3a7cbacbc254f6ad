#pragma once

#include <string_view>

#include "pass/domain.hpp"

namespace pass {

// Deterministic parts of the four benchmark response surfaces. Noise and
// drift are attached separately (see drift.hpp).

double branin(const Point& x);      // 2D
double ishigami(const Point& x);    // 3D
double friedman(const Point& x);    // 5D
double linkletter(const Point& x);  // 8D

enum class BenchmarkId { branin, ishigami, friedman, linkletter };

struct BenchmarkInfo {
    BenchmarkId id;
    std::string_view name;
    std::size_t dim;
    double noise_sigma;               // published noise level
    double (*eval)(const Point&);
    Domain standard_domain() const;   // conventional input domain
};

const BenchmarkInfo& benchmark(BenchmarkId id);
BenchmarkId benchmark_from_name(std::string_view name);

}  // namespace pass
