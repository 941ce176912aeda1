#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gbrff/base_learner.hpp"
#include "gbrff/data.hpp"
#include "gbrff/rff.hpp"
#include "gbrff/rng.hpp"

namespace gbrff {

struct LabeledLandmark {
    Vector point;
    double label = 1.0;  // in {-1, +1}
};

struct LandmarkKernel {
    RffSet rff;
    SimplexWeights q;
};

struct LinearModel {
    Vector weights;
    double bias = 0.0;
};

// Two-step baseline: fixed landmarks, per-landmark pseudo-posterior from
// the kernel alignment loss, then a linear classifier on the mapped data.
struct PbrffModel {
    std::vector<LabeledLandmark> landmarks;
    std::vector<LandmarkKernel> per_landmark;
    LinearModel linear;

    Eigen::Index n_landmarks() const {
        return static_cast<Eigen::Index>(landmarks.size());
    }
};

// Linear alignment loss of one feature against every training point
// other than the landmark itself:
// (1/m) sum_i [ 1/2 - 1/2 y_t y_i cos(omega_j . (x_t - x_i)) ].
// Pass exclude_index < 0 when the landmark is not a training row.
inline double alignment_loss(const RffSet& rff, Eigen::Index feature_index,
                             const LabeledLandmark& landmark, const Dataset& train,
                             Eigen::Index exclude_index = -1) {
    if (feature_index < 0 || feature_index >= rff.k())
        throw std::invalid_argument("alignment_loss: feature index out of range");
    if (landmark.point.size() != rff.dim() || train.dim() != rff.dim())
        throw std::invalid_argument("alignment_loss: dimension mismatch");
    double sum = 0.0;
    Eigen::Index m = 0;
    const auto omega = rff.omegas.row(feature_index);
    for (Eigen::Index i = 0; i < train.n(); ++i) {
        if (i == exclude_index) continue;
        const double cosv = std::cos(omega.dot((landmark.point - train.x.row(i).transpose())));
        sum += 0.5 - 0.5 * landmark.label * train.y[i] * cosv;
        ++m;
    }
    if (m == 0) throw std::invalid_argument("alignment_loss: no comparison points");
    return sum / static_cast<double>(m);
}

// All K per-feature alignment losses at once.
inline Vector alignment_losses(const RffSet& rff, const LabeledLandmark& landmark,
                               const Dataset& train, Eigen::Index exclude_index = -1) {
    if (landmark.point.size() != rff.dim() || train.dim() != rff.dim())
        throw std::invalid_argument("alignment_losses: dimension mismatch");
    Vector sums = Vector::Zero(rff.k());
    Eigen::Index m = 0;
    for (Eigen::Index i = 0; i < train.n(); ++i) {
        if (i == exclude_index) continue;
        Vector phase = rff.omegas * (landmark.point - train.x.row(i).transpose());
        sums += (0.5 - 0.5 * landmark.label * train.y[i] * phase.array().cos()).matrix();
        ++m;
    }
    if (m == 0) throw std::invalid_argument("alignment_losses: no comparison points");
    return sums / static_cast<double>(m);
}

// Closed-form pseudo-posterior: Q_j proportional to exp(-beta sqrt(n) L_j).
inline SimplexWeights compute_q_pbrff(const Vector& losses, double beta, Eigen::Index n) {
    if (beta < 0.0) throw std::invalid_argument("compute_q_pbrff: beta must be >= 0");
    if (n < 2) throw std::invalid_argument("compute_q_pbrff: need n >= 2");
    if (losses.size() < 1) throw std::invalid_argument("compute_q_pbrff: empty loss vector");
    return softmax_weights(-beta * std::sqrt(static_cast<double>(n)) * losses);
}

inline Vector map_features(const PbrffModel& model, const Vector& x) {
    Vector out(model.n_landmarks());
    for (Eigen::Index t = 0; t < model.n_landmarks(); ++t)
        out[t] = kernel_value(model.per_landmark[t].rff, model.per_landmark[t].q,
                              model.landmarks[t].point, x);
    return out;
}

inline Matrix map_features(const PbrffModel& model, const Matrix& x) {
    Matrix out(x.rows(), model.n_landmarks());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out.row(i) = map_features(model, Vector(x.row(i).transpose())).transpose();
    return out;
}

// L2-regularized hinge loss, lambda = 1/(c_param * n), minimized by
// deterministic full-batch subgradient descent with step 1/(lambda * e)
// at epoch e, Pegasos-style ball projection, averaged iterate output.
// The bias is unregularized. `seed` is accepted for interface symmetry;
// the full-batch trajectory does not depend on it.
inline LinearModel train_linear(const Matrix& features, const Vector& labels,
                                double c_param, int epochs = 200,
                                std::uint64_t seed = 0) {
    (void)seed;
    if (features.rows() != labels.size() || features.rows() < 1)
        throw std::invalid_argument("train_linear: feature/label shape mismatch");
    if (!(c_param > 0.0)) throw std::invalid_argument("train_linear: c_param must be > 0");
    if (epochs < 1) throw std::invalid_argument("train_linear: epochs must be >= 1");

    const auto n = static_cast<double>(features.rows());
    const double lambda = 1.0 / (c_param * n);
    const double radius = 1.0 / std::sqrt(lambda);

    Vector w = Vector::Zero(features.cols());
    double b = 0.0;
    Vector w_avg = Vector::Zero(features.cols());
    double b_avg = 0.0;

    for (int e = 1; e <= epochs; ++e) {
        Vector margins = labels.array() * (features * w).array() + labels.array() * b;
        Vector grad_w = lambda * w;
        double grad_b = 0.0;
        for (Eigen::Index i = 0; i < features.rows(); ++i) {
            if (margins[i] < 1.0) {
                grad_w -= (labels[i] / n) * features.row(i).transpose();
                grad_b -= labels[i] / n;
            }
        }
        const double step = 1.0 / (lambda * static_cast<double>(e));
        w -= step * grad_w;
        b -= step * grad_b;
        const double norm = w.norm();
        if (norm > radius) {
            w *= radius / norm;
            b *= radius / norm;
        }
        w_avg += (w - w_avg) / static_cast<double>(e);
        b_avg += (b - b_avg) / static_cast<double>(e);
    }
    return {w_avg, b_avg};
}

inline double hinge_objective(const LinearModel& m, const Matrix& features,
                              const Vector& labels, double c_param) {
    const auto n = static_cast<double>(features.rows());
    const double lambda = 1.0 / (c_param * n);
    Vector margins =
        labels.array() * (features * m.weights).array() + labels.array() * m.bias;
    double hinge = (1.0 - margins.array()).cwiseMax(0.0).sum() / n;
    return 0.5 * lambda * m.weights.squaredNorm() + hinge;
}

inline PbrffModel fit_pbrff(const Dataset& train, Eigen::Index n_landmarks,
                            Eigen::Index k_features, double beta, double c_param,
                            std::uint64_t seed, int linear_epochs = 200) {
    if (train.n() < 2) throw std::invalid_argument("fit_pbrff: need at least 2 points");
    if (n_landmarks < 1 || k_features < 1)
        throw std::invalid_argument("fit_pbrff: n_landmarks and k_features must be >= 1");

    PbrffModel model;
    Rng pick(derive_seed(seed, "landmarks"));
    const std::uint64_t rff_root = derive_seed(seed, "rff");
    for (Eigen::Index t = 0; t < n_landmarks; ++t) {
        // with replacement, per the reference protocol
        const auto idx = static_cast<Eigen::Index>(pick.index(static_cast<std::uint64_t>(train.n())));
        LabeledLandmark lm{train.x.row(idx).transpose(), train.y[idx]};
        RffSet rff = sample_rff(k_features, train.dim(),
                                derive_seed(rff_root, static_cast<std::uint64_t>(t)));
        Vector losses = alignment_losses(rff, lm, train, idx);
        SimplexWeights q = compute_q_pbrff(losses, beta, train.n());
        model.landmarks.push_back(std::move(lm));
        model.per_landmark.push_back({std::move(rff), std::move(q)});
    }

    Matrix mapped = map_features(model, train.x);
    model.linear = train_linear(mapped, train.y, c_param, linear_epochs,
                                derive_seed(seed, "linear"));
    return model;
}

inline double predict_raw_pbrff(const PbrffModel& model, const Vector& x) {
    return model.linear.weights.dot(map_features(model, x)) + model.linear.bias;
}

// sign(0) = +1
inline double predict_pbrff(const PbrffModel& model, const Vector& x) {
    return predict_raw_pbrff(model, x) >= 0.0 ? 1.0 : -1.0;
}

// Catoni-style bound diagnostic:
// sum_j q_j L_j + (1/s) (KL(q || uniform) + s^2 / (2(n-1)) + ln(1/eps))
// with KL over the K sampled atoms, KL = sum_j q_j ln(K q_j).
inline double pac_bayes_bound(const Vector& emp_losses, const SimplexWeights& q,
                              double s, double epsilon, Eigen::Index n) {
    if (!(s > 0.0)) throw std::invalid_argument("pac_bayes_bound: s must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("pac_bayes_bound: epsilon must be in (0, 1)");
    if (n < 2) throw std::invalid_argument("pac_bayes_bound: need n >= 2");
    if (emp_losses.size() != q.q.size())
        throw std::invalid_argument("pac_bayes_bound: loss/weight length mismatch");
    if ((emp_losses.array() < 0.0).any() || (emp_losses.array() > 1.0).any())
        throw std::invalid_argument("pac_bayes_bound: losses must lie in [0, 1]");

    const auto k = static_cast<double>(q.q.size());
    double kl = 0.0;
    for (Eigen::Index j = 0; j < q.q.size(); ++j)
        if (q.q[j] > 0.0) kl += q.q[j] * std::log(k * q.q[j]);
    const double emp = q.q.dot(emp_losses);
    return emp + (kl + s * s / (2.0 * static_cast<double>(n - 1)) + std::log(1.0 / epsilon)) / s;
}

}  // namespace gbrff
