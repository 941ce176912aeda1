#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gbrff/rff.hpp"

namespace gbrff {

// One boosting-round predictor: a landmark, its feature draw and the
// pseudo-posterior weights over the features.
struct BaseLearner {
    Vector landmark;
    RffSet rff;
    SimplexWeights q;
};

struct LandmarkDescentConfig {
    double step_size = 1.0;
    int max_iterations = 100;
    double grad_tolerance = 1e-6;  // infinity-norm stop test
};

namespace detail {

inline void check_landmark_args(const RffSet& rff, const Vector& residuals,
                                const Matrix& points, const Vector& landmark) {
    if (residuals.size() < 1)
        throw std::invalid_argument("landmark loss: empty residual vector");
    if (points.rows() != residuals.size())
        throw std::invalid_argument("landmark loss: points/residuals length mismatch");
    if (points.cols() != rff.dim() || landmark.size() != rff.dim())
        throw std::invalid_argument("landmark loss: dimension mismatch");
}

// Caches cos/sin of the fixed per-point projections omega_j . x_i. The
// phase is omega_j . landmark - omega_j . x_i, so by the angle-addition
// identities every loss or gradient evaluation during descent needs only
// K fresh trig calls (for the landmark term) plus matrix products:
//   cos(a - b) = cos a cos b + sin a sin b
//   sin(a - b) = sin a cos b - cos a sin b
class LandmarkObjective {
public:
    LandmarkObjective(const RffSet& rff, const Vector& residuals,
                      const Matrix& points)
        : rff_(rff), residuals_(residuals) {
        const Matrix point_proj = points * rff.omegas.transpose();  // n x K
        cos_b_ = point_proj.array().cos();
        sin_b_ = point_proj.array().sin();
    }

    // (1/n) sum_i (r_i - mean_j cos(omega_j . (landmark - x_i)))^2
    double loss(const Vector& landmark) const {
        Vector ca, sa;
        landmark_trig(landmark, ca, sa);
        Vector approx = (cos_b_ * ca + sin_b_ * sa) / static_cast<double>(rff_.k());
        return (residuals_ - approx).squaredNorm() / static_cast<double>(n());
    }

    // (2/n) sum_i [ (1/K) sum_j omega_j sin(.) ] (r_i - (1/K) sum_j cos(.))
    Vector gradient(const Vector& landmark) const {
        Vector ca, sa;
        landmark_trig(landmark, ca, sa);
        Vector approx = (cos_b_ * ca + sin_b_ * sa) / static_cast<double>(rff_.k());
        Vector err = residuals_ - approx;
        // sum_i err_i sin(a_j - b_ij), one entry per feature j
        Vector weighted_sines =
            sa.cwiseProduct(cos_b_.transpose() * err) - ca.cwiseProduct(sin_b_.transpose() * err);
        double scale = 2.0 / (static_cast<double>(n()) * static_cast<double>(rff_.k()));
        return scale * (rff_.omegas.transpose() * weighted_sines);
    }

    // Per-feature losses f_{omega_j}(landmark), one column of cosines each.
    Vector per_feature_losses(const Vector& landmark) const {
        Vector ca, sa;
        landmark_trig(landmark, ca, sa);
        Matrix cosines = cos_b_.array().rowwise() * ca.transpose().array() +
                         sin_b_.array().rowwise() * sa.transpose().array();
        Vector out(rff_.k());
        for (Eigen::Index j = 0; j < rff_.k(); ++j)
            out[j] = (residuals_ - cosines.col(j)).squaredNorm() / static_cast<double>(n());
        return out;
    }

    Eigen::Index n() const { return residuals_.size(); }

private:
    void landmark_trig(const Vector& landmark, Vector& ca, Vector& sa) const {
        Vector lm_proj = rff_.omegas * landmark;
        ca = lm_proj.array().cos();
        sa = lm_proj.array().sin();
    }

    const RffSet& rff_;
    const Vector& residuals_;
    Matrix cos_b_;  // n x K, cos(omega_j . x_i)
    Matrix sin_b_;  // n x K, sin(omega_j . x_i)
};

}  // namespace detail

inline double landmark_loss(const RffSet& rff, const Vector& residuals,
                            const Matrix& points, const Vector& landmark) {
    detail::check_landmark_args(rff, residuals, points, landmark);
    return detail::LandmarkObjective(rff, residuals, points).loss(landmark);
}

inline Vector landmark_gradient(const RffSet& rff, const Vector& residuals,
                                const Matrix& points, const Vector& landmark) {
    detail::check_landmark_args(rff, residuals, points, landmark);
    return detail::LandmarkObjective(rff, residuals, points).gradient(landmark);
}

// Fixed-step gradient descent with a backtracking guard: if a step would
// increase the loss, halve it and retry up to 10 times, then stop. The
// returned landmark never has a higher loss than the initialization.
inline Vector optimize_landmark(const RffSet& rff, const Vector& residuals,
                                const Matrix& points, const Vector& init,
                                const LandmarkDescentConfig& cfg = {}) {
    detail::check_landmark_args(rff, residuals, points, init);
    if (!(cfg.step_size > 0.0) || cfg.max_iterations < 1)
        throw std::invalid_argument("optimize_landmark: invalid descent config");

    detail::LandmarkObjective obj(rff, residuals, points);
    Vector current = init;
    double current_loss = obj.loss(current);
    for (int it = 0; it < cfg.max_iterations; ++it) {
        Vector grad = obj.gradient(current);
        if (grad.lpNorm<Eigen::Infinity>() <= cfg.grad_tolerance) break;

        double step = cfg.step_size;
        bool accepted = false;
        for (int half = 0; half <= 10; ++half) {
            Vector candidate = current - step * grad;
            double candidate_loss = obj.loss(candidate);
            if (candidate_loss <= current_loss) {
                current = std::move(candidate);
                current_loss = candidate_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    return current;
}

// Pseudo-posterior over features: Q_j proportional to exp(-c f_j) with
// f_j the single-feature residual loss, max-shifted before
// exponentiation. Underflow of every term falls back to uniform.
inline SimplexWeights softmax_weights(const Vector& neg_exponents) {
    const Eigen::Index k = neg_exponents.size();
    Vector shifted = neg_exponents.array() - neg_exponents.maxCoeff();
    Vector w = shifted.array().exp();
    double z = w.sum();
    SimplexWeights out;
    if (!(z > 0.0) || !std::isfinite(z)) {
        out = SimplexWeights::uniform(k);
    } else {
        out.q = w / z;
    }
    return out;
}

inline SimplexWeights compute_q(const RffSet& rff, const Vector& residuals,
                                const Matrix& points, const Vector& landmark,
                                double c) {
    detail::check_landmark_args(rff, residuals, points, landmark);
    if (c < 0.0) throw std::invalid_argument("compute_q: c must be >= 0");
    Vector losses =
        detail::LandmarkObjective(rff, residuals, points).per_feature_losses(landmark);
    return softmax_weights(-c * losses);
}

inline double predict_base(const BaseLearner& learner, const Vector& x) {
    return kernel_value(learner.rff, learner.q, learner.landmark, x);
}

}  // namespace gbrff
