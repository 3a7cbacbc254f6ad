#include "pass/baselines.hpp"

#include <cmath>
#include <string>

namespace pass::baselines {

std::pair<long, long> split_budget(long budget, double epsilon) {
    if (budget < 0) throw InvalidInput("split_budget: negative budget");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw InvalidInput("split_budget: epsilon must lie in [0, 1]");
    }
    auto m_x = static_cast<long>(std::floor((1.0 - epsilon) * static_cast<double>(budget) +
                                            1e-9));
    m_x = std::min(m_x, budget);
    return {m_x, budget - m_x};
}

std::vector<Point> random_sample(const Domain& domain, long m, RngStream& rng) {
    if (m < 0) throw InvalidInput("random_sample: m must be nonnegative");
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(m));
    const std::size_t d = domain.dim();
    for (long i = 0; i < m; ++i) {
        Point x(d);
        for (std::size_t j = 0; j < d; ++j) {
            x[j] = rng.uniform(domain.lower[j], domain.upper[j]);
        }
        out.push_back(std::move(x));
    }
    return out;
}

Eigen::VectorXd score_vector(const FittedModel& model, const Point& x, double y,
                             double sigma2) {
    if (!std::isfinite(y)) throw InvalidInput("score_vector: non-finite response");
    if (!(sigma2 > 0.0)) throw InvalidInput("score_vector: sigma2 must be positive");
    for (double c : x) {
        if (!std::isfinite(c)) throw InvalidInput("score_vector: non-finite input");
    }
    FeatureEvaluator features(model.feature_map);
    const Eigen::VectorXd& phi = features(x);
    return phi * ((y - phi.dot(model.coefficients)) / sigma2);
}

ScoreEvaluator::ScoreEvaluator(const FittedModel& model, double sigma2)
    : model_(&model), features_(model.feature_map), sigma2_(sigma2) {
    if (!(sigma2 > 0.0)) throw InvalidInput("ScoreEvaluator: sigma2 must be positive");
}

double ScoreEvaluator::operator()(const Point& x, double y, Eigen::VectorXd& out) {
    const Eigen::VectorXd& phi = features_(x);
    const double residual = y - phi.dot(model_->coefficients);
    out = phi * (residual / sigma2_);
    return residual;
}

Eigen::MatrixXd estimate_score_cov(std::span<const Eigen::VectorXd> scores,
                                   double ridge_scale) {
    if (scores.size() < 2) throw InvalidInput("estimate_score_cov: need at least two scores");
    const Eigen::Index p = scores.front().size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (const auto& s : scores) mean += s;
    mean /= static_cast<double>(scores.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    for (const auto& s : scores) {
        const Eigen::VectorXd c = s - mean;
        cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(scores.size() - 1);
    if (ridge_scale > 0.0) {
        const double ridge = ridge_scale * cov.trace() / static_cast<double>(p);
        cov += ridge * Eigen::MatrixXd::Identity(p, p);
    }
    return cov;
}

MewmaChart::MewmaChart(double lambda, Eigen::MatrixXd cov0, long n_batch) : lambda_(lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw InvalidInput("MewmaChart: lambda must lie in (0, 1]");
    }
    if (n_batch < 1) throw InvalidInput("MewmaChart: batch size must be positive");
    if (cov0.rows() != cov0.cols() || cov0.rows() == 0) {
        throw InvalidInput("MewmaChart: covariance must be square and nonempty");
    }
    const Eigen::MatrixXd sigma_z =
        (lambda / (2.0 - lambda)) * cov0 / static_cast<double>(n_batch);
    sigma_z_llt_.compute(sigma_z);
    if (sigma_z_llt_.info() != Eigen::Success) {
        throw CalibrationFailureError("MewmaChart: singular in-control score covariance");
    }
    z_ = Eigen::VectorXd::Zero(cov0.rows());
}

std::pair<double, bool> MewmaChart::step(const Eigen::VectorXd& batch_mean_score) {
    if (batch_mean_score.size() != z_.size()) {
        throw InvalidInput("MewmaChart: score dimension mismatch");
    }
    z_ = lambda_ * batch_mean_score + (1.0 - lambda_) * z_;
    const double t2 = z_.dot(sigma_z_llt_.solve(z_));
    return {t2, t2 > ucl_};
}

std::pair<double, bool> mewma_step(MewmaChart& chart, const Eigen::VectorXd& batch_mean_score) {
    return chart.step(batch_mean_score);
}

}  // namespace pass::baselines
