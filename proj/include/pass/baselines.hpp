#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "pass/domain.hpp"
#include "pass/predictor.hpp"
#include "pass/rng.hpp"

namespace pass::baselines {

enum class PolicyKind { pass, random, score_adaptive };

// pass and score_adaptive split the budget as m_x = floor((1-eps)M),
// m_e = M - m_x; random ignores eps and samples the whole budget uniformly.
struct SamplingPolicy {
    PolicyKind kind = PolicyKind::pass;
    double epsilon = 0.2;
};

// (m_x, m_e) with a rounding guard so exact fractions land on the integer.
std::pair<long, long> split_budget(long budget, double epsilon);

std::vector<Point> random_sample(const Domain& domain, long m, RngStream& rng);

// Per-observation log-likelihood gradient w.r.t. the coefficients of a
// Gaussian linear model: features(x) * (y - prediction) / sigma2.
Eigen::VectorXd score_vector(const FittedModel& model, const Point& x, double y,
                             double sigma2);

// Reusable evaluator for hot loops (shares feature scratch space).
class ScoreEvaluator {
public:
    explicit ScoreEvaluator(const FittedModel& model, double sigma2);
    // Writes the score into `out`, returns the residual.
    double operator()(const Point& x, double y, Eigen::VectorXd& out);

private:
    const FittedModel* model_;
    FeatureEvaluator features_;
    double sigma2_;
};

// Sample covariance of score vectors with a trace-scaled ridge for
// invertibility.
Eigen::MatrixXd estimate_score_cov(std::span<const Eigen::VectorXd> scores,
                                   double ridge_scale = 1e-8);

// Multivariate EWMA on batch-mean scores monitored through a Hotelling
// statistic: z <- lambda*s + (1-lambda)*z, T2 = z' Sigma_z^{-1} z with the
// steady-state covariance Sigma_z = (lambda/(2-lambda)) * cov0 / n_batch.
class MewmaChart {
public:
    MewmaChart() = default;
    MewmaChart(double lambda, Eigen::MatrixXd cov0, long n_batch);

    void reset() { z_.setZero(); }
    void set_ucl(double ucl) { ucl_ = ucl; }
    double ucl() const { return ucl_; }
    double lambda() const { return lambda_; }
    const Eigen::VectorXd& z() const { return z_; }

    // Returns (T2, alarm).
    std::pair<double, bool> step(const Eigen::VectorXd& batch_mean_score);

private:
    double lambda_ = 0.2;
    double ucl_ = std::numeric_limits<double>::infinity();
    Eigen::VectorXd z_;
    Eigen::LLT<Eigen::MatrixXd> sigma_z_llt_;
};

std::pair<double, bool> mewma_step(MewmaChart& chart, const Eigen::VectorXd& batch_mean_score);

}  // namespace pass::baselines
