#include "pass/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>

namespace pass {

namespace {

// All B-spline basis values at x for a clamped uniform knot vector on
// [lo, hi] with n_int interior knots and the given degree. Writes
// basis-count values into out (zero outside the active span). Points at the
// upper bound fall in the last span.
void bspline_basis(double x, double lo, double hi, int n_int, int degree, double* out,
                   int n_basis) {
    std::fill(out, out + n_basis, 0.0);
    const double cell = (hi - lo) / static_cast<double>(n_int + 1);
    int interval = static_cast<int>((x - lo) / cell);
    interval = std::clamp(interval, 0, n_int);
    const int span = degree + interval;  // knot span index containing x

    auto knot = [&](int i) -> double {
        if (i <= degree) return lo;
        if (i >= n_basis) return hi;
        return lo + cell * static_cast<double>(i - degree);
    };

    // Cox-de Boor triangle for the degree+1 nonzero functions on the span.
    double vals[32];
    double left[32];
    double right[32];
    vals[0] = 1.0;
    for (int d = 1; d <= degree; ++d) {
        left[d] = x - knot(span + 1 - d);
        right[d] = knot(span + d) - x;
        double saved = 0.0;
        for (int r = 0; r < d; ++r) {
            const double denom = right[r + 1] + left[d - r];
            const double term = denom != 0.0 ? vals[r] / denom : 0.0;
            vals[r] = saved + right[r + 1] * term;
            saved = left[d - r] * term;
        }
        vals[d] = saved;
    }
    for (int r = 0; r <= degree; ++r) out[span - degree + r] = vals[r];
}

}  // namespace

std::size_t FeatureMap::basis_per_axis() const {
    return static_cast<std::size_t>(knots_per_axis + spline_degree + 1);
}

std::size_t FeatureMap::dimension() const {
    const std::size_t d = domain.dim();
    if (kind == FeatureKind::identity) return 1 + d;
    const std::size_t nb = basis_per_axis();
    return 1 + d * nb + d * (d - 1) / 2 * nb * nb;
}

FeatureEvaluator::FeatureEvaluator(const FeatureMap& map) : map_(&map) {
    if (map.kind == FeatureKind::spline_interactions) {
        if (map.spline_degree < 1 || map.spline_degree > 31) {
            throw InvalidInput("FeatureMap: spline_degree out of range");
        }
        if (map.knots_per_axis < 0) {
            throw InvalidInput("FeatureMap: knots_per_axis must be nonnegative");
        }
        axis_basis_.assign(map.domain.dim(), std::vector<double>(map.basis_per_axis()));
    }
    features_.resize(static_cast<Eigen::Index>(map.dimension()));
}

const Eigen::VectorXd& FeatureEvaluator::operator()(const Point& x) {
    const FeatureMap& map = *map_;
    const std::size_t d = map.domain.dim();
    if (x.size() != d) {
        throw InvalidInput("features: point dimension " + std::to_string(x.size()) +
                           " does not match map dimension " + std::to_string(d));
    }
    if (map.kind == FeatureKind::identity) {
        features_[0] = 1.0;
        for (std::size_t j = 0; j < d; ++j) features_[static_cast<Eigen::Index>(1 + j)] = x[j];
        return features_;
    }

    const int nb = static_cast<int>(map.basis_per_axis());
    for (std::size_t j = 0; j < d; ++j) {
        bspline_basis(x[j], map.domain.lower[j], map.domain.upper[j], map.knots_per_axis,
                      map.spline_degree, axis_basis_[j].data(), nb);
    }

    Eigen::Index k = 0;
    features_[k++] = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
        for (int i = 0; i < nb; ++i) features_[k++] = axis_basis_[j][i];
    }
    for (std::size_t a = 0; a + 1 < d; ++a) {
        for (std::size_t b = a + 1; b < d; ++b) {
            const double* ba = axis_basis_[a].data();
            const double* bb = axis_basis_[b].data();
            for (int i = 0; i < nb; ++i) {
                const double va = ba[i];
                for (int jj = 0; jj < nb; ++jj) features_[k++] = va * bb[jj];
            }
        }
    }
    return features_;
}

FittedModel fit(const Dataset& data, const FeatureMap& map, double ridge_penalty) {
    if (data.empty()) throw InvalidInput("fit: dataset is empty");
    if (ridge_penalty < 0.0) throw InvalidInput("fit: ridge penalty must be nonnegative");

    const auto n = static_cast<Eigen::Index>(data.size());
    const auto p = static_cast<Eigen::Index>(map.dimension());
    Eigen::MatrixXd design(n, p);
    Eigen::VectorXd y(n);
    FeatureEvaluator features(map);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = data[static_cast<std::size_t>(i)];
        design.row(i) = features(s.x).transpose();
        y[i] = s.y;
    }

    FittedModel model;
    model.feature_map = map;
    model.ridge_penalty = ridge_penalty;
    if (ridge_penalty == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        if (qr.rank() < p) {
            throw RankDeficiencyError(
                "fit: design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                " of " + std::to_string(p) +
                " feature columns); use a ridge penalty or a smaller basis");
        }
        model.coefficients = qr.solve(y);
    } else {
        // Augmented least squares [X; sqrt(penalty) I] beta = [y; 0].
        Eigen::MatrixXd aug(n + p, p);
        aug.topRows(n) = design;
        aug.bottomRows(p) =
            std::sqrt(ridge_penalty) * Eigen::MatrixXd::Identity(p, p);
        Eigen::VectorXd y_aug = Eigen::VectorXd::Zero(n + p);
        y_aug.head(n) = y;
        model.coefficients = aug.householderQr().solve(y_aug);
    }
    return model;
}

double predict(const FittedModel& model, const Point& x) {
    FeatureEvaluator features(model.feature_map);
    return features(x).dot(model.coefficients);
}

std::vector<double> residuals(const FittedModel& model, const Dataset& data) {
    std::vector<double> out;
    out.reserve(data.size());
    ModelEvaluator eval(model);
    for (const auto& s : data.samples()) out.push_back(s.y - eval(s.x));
    return out;
}

nlohmann::json model_to_json(const FittedModel& model) {
    nlohmann::json doc;
    doc["feature_map"] = {
        {"kind", model.feature_map.kind == FeatureKind::identity ? "identity"
                                                                 : "spline_interactions"},
        {"lower", model.feature_map.domain.lower},
        {"upper", model.feature_map.domain.upper},
        {"knots_per_axis", model.feature_map.knots_per_axis},
        {"spline_degree", model.feature_map.spline_degree},
    };
    doc["ridge_penalty"] = model.ridge_penalty;
    doc["coefficients"] = std::vector<double>(
        model.coefficients.data(), model.coefficients.data() + model.coefficients.size());
    return doc;
}

FittedModel model_from_json(const nlohmann::json& doc) {
    FittedModel model;
    const auto& fm = doc.at("feature_map");
    const std::string kind = fm.at("kind").get<std::string>();
    if (kind == "identity") {
        model.feature_map.kind = FeatureKind::identity;
    } else if (kind == "spline_interactions") {
        model.feature_map.kind = FeatureKind::spline_interactions;
    } else {
        throw ParseError("model: unknown feature map kind '" + kind + "'");
    }
    model.feature_map.domain = Domain(fm.at("lower").get<std::vector<double>>(),
                                      fm.at("upper").get<std::vector<double>>());
    model.feature_map.knots_per_axis = fm.at("knots_per_axis").get<int>();
    model.feature_map.spline_degree = fm.at("spline_degree").get<int>();
    model.ridge_penalty = doc.at("ridge_penalty").get<double>();
    const auto coefs = doc.at("coefficients").get<std::vector<double>>();
    if (coefs.size() != model.feature_map.dimension()) {
        throw ParseError("model: coefficient count does not match feature dimension");
    }
    model.coefficients =
        Eigen::Map<const Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
    return model;
}

}  // namespace pass
