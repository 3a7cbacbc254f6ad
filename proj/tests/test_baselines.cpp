#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pass/baselines.hpp"
#include "pass/monitor.hpp"

using namespace pass;
using namespace pass::baselines;

namespace {

FittedModel line_model(double intercept, double slope) {
    FittedModel model;
    model.feature_map.kind = FeatureKind::identity;
    model.feature_map.domain = Domain({-5.0}, {5.0});
    model.coefficients = Eigen::Vector2d(intercept, slope);
    return model;
}

}  // namespace

TEST_CASE("budget split") {
    CHECK(split_budget(20, 0.2) == std::pair<long, long>{16, 4});
    CHECK(split_budget(20, 0.5) == std::pair<long, long>{10, 10});
    CHECK(split_budget(20, 0.8) == std::pair<long, long>{4, 16});
    CHECK(split_budget(20, 0.0) == std::pair<long, long>{20, 0});
    CHECK(split_budget(20, 1.0) == std::pair<long, long>{0, 20});
    CHECK(split_budget(7, 0.5) == std::pair<long, long>{3, 4});
    CHECK_THROWS_AS(split_budget(10, 1.5), InvalidInput);
}

TEST_CASE("random_sample is uniform over the box") {
    const Domain domain({-2.0, 10.0}, {4.0, 30.0});
    RngStream rng(3);
    CHECK(random_sample(domain, 0, rng).empty());
    CHECK_THROWS_AS(random_sample(domain, -1, rng), InvalidInput);

    const long n = 1000000;
    const auto points = random_sample(domain, n, rng);
    double mean0 = 0.0, mean1 = 0.0;
    for (const auto& p : points) {
        CHECK(domain.contains(p));
        mean0 += p[0];
        mean1 += p[1];
    }
    mean0 /= static_cast<double>(n);
    mean1 /= static_cast<double>(n);
    const double se0 = domain.width(0) / std::sqrt(12.0 * n);
    const double se1 = domain.width(1) / std::sqrt(12.0 * n);
    CHECK(std::abs(mean0 - 1.0) <= 3.0 * se0);
    CHECK(std::abs(mean1 - 20.0) <= 3.0 * se1);

    RngStream a(8), b(8);
    CHECK(random_sample(domain, 25, a) == random_sample(domain, 25, b));
}

TEST_CASE("score vector is the Gaussian log-likelihood gradient") {
    const auto model = line_model(1.0, 2.0);
    const Point x{1.5};
    const double y_hat = 1.0 + 2.0 * 1.5;

    const auto zero = score_vector(model, x, y_hat, 2.0);
    CHECK(zero.norm() == 0.0);

    const auto s1 = score_vector(model, x, y_hat + 1.0, 2.0);
    const auto s2 = score_vector(model, x, y_hat + 2.0, 2.0);
    CHECK((s2 - 2.0 * s1).norm() < 1e-12);
    CHECK(s1[0] == doctest::Approx(0.5));        // 1 * residual / sigma2
    CHECK(s1[1] == doctest::Approx(0.75));       // x * residual / sigma2

    CHECK_THROWS_AS(score_vector(model, x, std::nan(""), 1.0), InvalidInput);
    CHECK_THROWS_AS(score_vector(model, x, 1.0, 0.0), InvalidInput);
}

TEST_CASE("score has zero empirical mean in control") {
    const auto model = line_model(1.0, 2.0);  // the true coefficients
    const double sigma = 0.7;
    RngStream rng(12);
    const long n = 100000;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    ScoreEvaluator score(model, sigma * sigma);
    Eigen::VectorXd s;
    for (long i = 0; i < n; ++i) {
        const Point x{rng.uniform(-5.0, 5.0)};
        const double y = 1.0 + 2.0 * x[0] + rng.normal(0.0, sigma);
        score(x, y, s);
        mean += s;
    }
    mean /= static_cast<double>(n);
    // Var(score_j) = E[phi_j^2] / sigma^2: 1/sigma^2 and E[x^2]/sigma^2.
    const double se0 = std::sqrt(1.0 / (sigma * sigma) / n);
    const double se1 = std::sqrt((25.0 / 3.0) / (sigma * sigma) / n);
    CHECK(std::abs(mean[0]) <= 3.0 * se0);
    CHECK(std::abs(mean[1]) <= 3.0 * se1);
}

TEST_CASE("mewma step basics") {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3);
    MewmaChart chart(0.2, cov, 20);
    chart.set_ucl(10.0);
    for (int i = 0; i < 50; ++i) {
        const auto [t2, alarm] = chart.step(Eigen::VectorXd::Zero(3));
        CHECK(t2 == 0.0);
        CHECK(!alarm);
    }
    CHECK_THROWS_AS(chart.step(Eigen::VectorXd::Zero(2)), InvalidInput);
    CHECK_THROWS_AS(MewmaChart(0.2, Eigen::MatrixXd::Zero(2, 2), 20),
                    CalibrationFailureError);
}

TEST_CASE("one-dimensional MEWMA reduces to a squared standardized EWMA") {
    const double lambda = 0.3;
    const double cov0 = 4.0;
    const long n_batch = 10;
    MewmaChart chart(lambda, Eigen::MatrixXd::Constant(1, 1, cov0), n_batch);

    monitor::EwmaChart ewma;  // truncated form equals plain EWMA on nonneg input
    ewma.lambda = lambda;
    ewma.theta0 = 0.0;

    RngStream rng(9);
    const double sigma_z2 = lambda / (2.0 - lambda) * cov0 / static_cast<double>(n_batch);
    for (int i = 0; i < 300; ++i) {
        const double s = std::abs(rng.normal());
        const auto [t2, alarm] = mewma_step(chart, Eigen::VectorXd::Constant(1, s));
        monitor::ewma_update(ewma, s);
        CHECK(t2 == doctest::Approx(ewma.z * ewma.z / sigma_z2).epsilon(1e-10));
    }
}

TEST_CASE("T2 is invariant under linear reparameterization of the basis") {
    RngStream rng(41);
    const int p = 4;
    // Well-conditioned SPD covariance.
    Eigen::MatrixXd base = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) base(i, j) = rng.normal();
    }
    const Eigen::MatrixXd cov0 =
        base * base.transpose() + 0.5 * Eigen::MatrixXd::Identity(p, p);

    Eigen::MatrixXd reparam = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) reparam(i, j) = rng.normal();
    }
    reparam += 3.0 * Eigen::MatrixXd::Identity(p, p);  // keep it invertible

    MewmaChart original(0.2, cov0, 20);
    MewmaChart transformed(0.2, reparam * cov0 * reparam.transpose(), 20);
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd s(p);
        for (int j = 0; j < p; ++j) s[j] = rng.normal();
        const auto [t2_orig, alarm_o] = original.step(s);
        const auto [t2_tran, alarm_t] = transformed.step(reparam * s);
        CHECK(t2_tran == doctest::Approx(t2_orig).epsilon(1e-8));
    }
}

TEST_CASE("score covariance estimate is SPD with the trace ridge") {
    RngStream rng(6);
    std::vector<Eigen::VectorXd> scores;
    for (int i = 0; i < 50; ++i) {
        Eigen::VectorXd s(3);
        // Rank-deficient scores: third component is a copy of the first.
        s[0] = rng.normal();
        s[1] = rng.normal();
        s[2] = s[0];
        scores.push_back(s);
    }
    const auto cov = estimate_score_cov(scores);
    CHECK_NOTHROW(MewmaChart(0.2, cov, 10));
    CHECK_THROWS_AS(estimate_score_cov(std::vector<Eigen::VectorXd>{}), InvalidInput);
}
