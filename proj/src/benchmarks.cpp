#include "pass/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pass {

namespace {

void require_dim(const Point& x, std::size_t d, const char* fn) {
    if (x.size() != d) {
        throw InvalidInput(std::string(fn) + ": expected " + std::to_string(d) +
                           " coordinates, got " + std::to_string(x.size()));
    }
}

constexpr double kPi = std::numbers::pi;

}  // namespace

double branin(const Point& x) {
    require_dim(x, 2, "branin");
    const double x1 = x[0], x2 = x[1];
    const double a = x2 - 5.1 / (4.0 * kPi * kPi) * x1 * x1 + 5.0 / kPi * x1 - 6.0;
    return a * a + 10.0 * (1.0 - 1.0 / (8.0 * kPi)) * std::cos(x1) + 10.0;
}

double ishigami(const Point& x) {
    require_dim(x, 3, "ishigami");
    const double s1 = std::sin(x[0]);
    const double s2 = std::sin(x[1]);
    return s1 + 7.0 * s2 * s2 + 0.1 * std::pow(x[2], 4) * s1;
}

double friedman(const Point& x) {
    require_dim(x, 5, "friedman");
    return 10.0 * std::sin(kPi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
           10.0 * x[3] + 5.0 * x[4];
}

double linkletter(const Point& x) {
    require_dim(x, 8, "linkletter");
    double acc = 0.0;
    double coef = 0.2;
    for (std::size_t n = 0; n < 8; ++n) {
        acc += coef * x[n];
        coef *= 0.5;
    }
    return acc;
}

Domain BenchmarkInfo::standard_domain() const {
    switch (id) {
        case BenchmarkId::branin:
            return Domain({-5.0, 0.0}, {10.0, 15.0});
        case BenchmarkId::ishigami:
            return Domain({-kPi, -kPi, -kPi}, {kPi, kPi, kPi});
        case BenchmarkId::friedman:
            return Domain(std::vector<double>(5, 0.0), std::vector<double>(5, 1.0));
        case BenchmarkId::linkletter:
            return Domain(std::vector<double>(8, 0.0), std::vector<double>(8, 1.0));
    }
    throw InvalidInput("unknown benchmark id");
}

const BenchmarkInfo& benchmark(BenchmarkId id) {
    static const BenchmarkInfo table[] = {
        {BenchmarkId::branin, "branin", 2, 11.32, &branin},
        {BenchmarkId::ishigami, "ishigami", 3, 0.187, &ishigami},
        {BenchmarkId::friedman, "friedman", 5, 0.05, &friedman},
        {BenchmarkId::linkletter, "linkletter", 8, 1.0, &linkletter},
    };
    return table[static_cast<int>(id)];
}

BenchmarkId benchmark_from_name(std::string_view name) {
    if (name == "branin") return BenchmarkId::branin;
    if (name == "ishigami") return BenchmarkId::ishigami;
    if (name == "friedman") return BenchmarkId::friedman;
    if (name == "linkletter") return BenchmarkId::linkletter;
    throw InvalidInput("unknown benchmark function: " + std::string(name));
}

}  // namespace pass
