#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gbrff/base_learner.hpp"
#include "gbrff/data.hpp"
#include "gbrff/rff.hpp"
#include "gbrff/rng.hpp"

namespace gbrff {

struct DegenerateLearnerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LandmarkMode { learned, random };

struct GbrffConfig {
    int t_rounds = 200;
    int k_features = 100;
    double v = 1.0;                 // learning rate in (0, 1]
    double c = 0.0;                 // pseudo-posterior temperature
    LandmarkDescentConfig descent;
    LandmarkMode landmark_mode = LandmarkMode::learned;
    std::uint64_t seed = 0;
    double bandwidth = 1.0;
    // optional patience stop: halt after `patience` rounds with relative
    // MSE improvement below `patience_tolerance`; off by default
    bool early_stopping = false;
    int patience = 10;
    double patience_tolerance = 1e-6;
};

struct BoostingRound {
    double alpha = 0.0;
    BaseLearner learner;
};

struct Ensemble {
    double h0 = 0.0;
    double v = 1.0;
    std::vector<BoostingRound> rounds;
    int skipped_rounds = 0;           // degenerate rounds dropped during fit
    std::vector<double> train_mse;    // per completed round, diagnostics

    Eigen::Index dim() const {
        return rounds.empty() ? -1 : rounds.front().learner.landmark.size();
    }
};

inline double init_h0(const Vector& labels) {
    if (labels.size() < 1) throw std::invalid_argument("init_h0: empty label vector");
    return labels.mean();
}

inline Vector residuals(const Vector& labels, const Vector& raw_predictions) {
    if (labels.size() != raw_predictions.size())
        throw std::invalid_argument("residuals: length mismatch");
    return labels - raw_predictions;
}

// Exact line search for the least squares loss:
// alpha = sum(r_i h_i) / sum(h_i^2).
inline double optimal_step(const Vector& resid, const Vector& base_outputs) {
    if (resid.size() != base_outputs.size())
        throw std::invalid_argument("optimal_step: length mismatch");
    const double denom = base_outputs.squaredNorm();
    if (!(denom > 0.0))
        throw DegenerateLearnerError("optimal_step: base learner outputs are all zero");
    return resid.dot(base_outputs) / denom;
}

inline double predict_raw(const Ensemble& ens, const Vector& x) {
    if (!ens.rounds.empty() && x.size() != ens.dim())
        throw std::invalid_argument("predict_raw: dimension mismatch");
    double raw = ens.h0;
    for (const auto& round : ens.rounds)
        raw += ens.v * round.alpha * predict_base(round.learner, x);
    return raw;
}

// sign(0) = +1
inline double predict(const Ensemble& ens, const Vector& x) {
    return predict_raw(ens, x) >= 0.0 ? 1.0 : -1.0;
}

inline Vector predict_raw_all(const Ensemble& ens, const Matrix& x) {
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict_raw(ens, x.row(i).transpose());
    return out;
}

namespace detail {

inline Eigen::Index argmax_abs(const Vector& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    return best;
}

}  // namespace detail

// GBRFF training loop. Each round draws a fresh feature set from a child
// seed, fits the landmark against the current residuals with uniform
// feature weights, computes the pseudo-posterior and the exact step size,
// then shrinks the update by the learning rate.
inline Ensemble fit(const Dataset& train, const GbrffConfig& cfg) {
    if (train.n() < 1) throw std::invalid_argument("fit: empty training set");
    if (cfg.t_rounds < 1 || cfg.k_features < 1)
        throw std::invalid_argument("fit: t_rounds and k_features must be >= 1");
    if (!(cfg.v > 0.0 && cfg.v <= 1.0))
        throw std::invalid_argument("fit: learning rate must be in (0, 1]");
    if (cfg.c < 0.0) throw std::invalid_argument("fit: c must be >= 0");
    for (Eigen::Index i = 0; i < train.n(); ++i)
        if (train.y[i] != 1.0 && train.y[i] != -1.0)
            throw std::invalid_argument("fit: labels must be in {-1, +1}");

    Ensemble ens;
    ens.h0 = init_h0(train.y);
    ens.v = cfg.v;

    Vector raw = Vector::Constant(train.n(), ens.h0);
    double prev_mse = (train.y - raw).squaredNorm() / static_cast<double>(train.n());
    int stale_rounds = 0;

    for (int t = 1; t <= cfg.t_rounds; ++t) {
        RffSet rff = sample_rff(cfg.k_features, train.dim(),
                                derive_seed(cfg.seed, static_cast<std::uint64_t>(t)),
                                cfg.bandwidth);
        Vector resid = residuals(train.y, raw);

        Vector landmark;
        if (cfg.landmark_mode == LandmarkMode::random) {
            Rng pick(derive_seed(derive_seed(cfg.seed, "landmark"),
                                 static_cast<std::uint64_t>(t)));
            landmark = train.x.row(static_cast<Eigen::Index>(pick.index(
                                       static_cast<std::uint64_t>(train.n()))))
                           .transpose();
        } else {
            Vector init = train.x.row(detail::argmax_abs(resid)).transpose();
            landmark = optimize_landmark(rff, resid, train.x, init, cfg.descent);
        }

        BaseLearner learner;
        learner.landmark = landmark;
        learner.q = compute_q(rff, resid, train.x, landmark, cfg.c);
        learner.rff = std::move(rff);

        Vector outputs(train.n());
        for (Eigen::Index i = 0; i < train.n(); ++i)
            outputs[i] = predict_base(learner, train.x.row(i).transpose());

        double alpha;
        try {
            alpha = optimal_step(resid, outputs);
        } catch (const DegenerateLearnerError&) {
            ++ens.skipped_rounds;
            continue;
        }

        raw += cfg.v * alpha * outputs;
        ens.rounds.push_back({alpha, std::move(learner)});

        const double mse = (train.y - raw).squaredNorm() / static_cast<double>(train.n());
        ens.train_mse.push_back(mse);

        if (cfg.early_stopping) {
            const double rel = prev_mse > 0.0 ? (prev_mse - mse) / prev_mse : 0.0;
            stale_rounds = rel < cfg.patience_tolerance ? stale_rounds + 1 : 0;
            if (stale_rounds >= cfg.patience) break;
        }
        prev_mse = mse;
    }
    return ens;
}

}  // namespace gbrff
