#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "pass/domain.hpp"

namespace pass {

enum class FeatureKind { identity, spline_interactions };

// Deterministic feature expansion. `identity` is [1, x_1..x_d].
// `spline_interactions` builds per-axis B-spline bases (uniform interior
// knots over the domain, clamped ends) and expands them with all cross-axis
// pairwise products: [1] + main-effect blocks + interaction blocks.
struct FeatureMap {
    FeatureKind kind = FeatureKind::identity;
    Domain domain;
    int knots_per_axis = 5;  // interior knots
    int spline_degree = 3;

    std::size_t basis_per_axis() const;
    std::size_t dimension() const;
};

// Evaluates a FeatureMap repeatedly without reallocating. Returns a
// reference to an internal buffer valid until the next call.
class FeatureEvaluator {
public:
    explicit FeatureEvaluator(const FeatureMap& map);
    const Eigen::VectorXd& operator()(const Point& x);

private:
    const FeatureMap* map_;
    std::vector<std::vector<double>> axis_basis_;
    Eigen::VectorXd features_;
};

struct FittedModel {
    FeatureMap feature_map;
    Eigen::VectorXd coefficients;
    double ridge_penalty = 0.0;
};

// Least squares / ridge fit of y on the expanded features, solved by
// Householder QR on the (optionally penalty-augmented) design matrix.
// penalty == 0 with a rank-deficient design raises RankDeficiencyError.
FittedModel fit(const Dataset& data, const FeatureMap& map, double ridge_penalty);

double predict(const FittedModel& model, const Point& x);

// Order-preserving residuals e_i = y_i - prediction(x_i).
std::vector<double> residuals(const FittedModel& model, const Dataset& data);

// Bundles a model with feature scratch space for hot loops.
class ModelEvaluator {
public:
    explicit ModelEvaluator(const FittedModel& model)
        : model_(&model), features_(model.feature_map) {}
    double operator()(const Point& x) {
        return features_(x).dot(model_->coefficients);
    }

private:
    const FittedModel* model_;
    FeatureEvaluator features_;
};

nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& doc);

}  // namespace pass
