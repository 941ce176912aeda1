#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "gbrff/rng.hpp"

namespace gbrff {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A sampled set of K frequency vectors, one per row. Re-sampling with
// the same (K, d, seed, bandwidth) reproduces the matrix bit-for-bit.
struct RffSet {
    Matrix omegas;       // K x d
    std::uint64_t seed = 0;

    Eigen::Index k() const { return omegas.rows(); }
    Eigen::Index dim() const { return omegas.cols(); }
};

// Non-negative weights over the K features, summing to 1.
struct SimplexWeights {
    Vector q;

    static constexpr double kSumTolerance = 1e-12;

    bool valid() const {
        if (q.size() == 0 || (q.array() < 0.0).any()) return false;
        return std::abs(q.sum() - 1.0) <= kSumTolerance;
    }

    static SimplexWeights uniform(Eigen::Index k) {
        SimplexWeights w;
        w.q = Vector::Constant(k, 1.0 / static_cast<double>(k));
        return w;
    }
};

// Draw K frequency vectors from the Fourier transform of the Gaussian
// kernel, i.e. the standard normal. `bandwidth` rescales the kernel
// width: omegas are divided by it (1.0 reproduces the plain N(0, I) draw).
inline RffSet sample_rff(Eigen::Index k_count, Eigen::Index dim,
                         std::uint64_t seed, double bandwidth = 1.0) {
    if (k_count < 1 || dim < 1)
        throw std::invalid_argument("sample_rff: k_count and dim must be >= 1");
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("sample_rff: bandwidth must be > 0");
    RffSet rff;
    rff.seed = seed;
    rff.omegas.resize(k_count, dim);
    Rng rng(seed);
    for (Eigen::Index i = 0; i < k_count; ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
            rff.omegas(i, j) = rng.normal() / bandwidth;
    return rff;
}

// k_Q(landmark - x) = sum_j q_j cos(omega_j . (landmark - x)).
// Always in [-1, 1] since the weights live on the simplex.
inline double kernel_value(const RffSet& rff, const SimplexWeights& weights,
                           const Vector& landmark, const Vector& x) {
    if (weights.q.size() != rff.k())
        throw std::invalid_argument("kernel_value: weight length != K");
    if (landmark.size() != rff.dim() || x.size() != rff.dim())
        throw std::invalid_argument("kernel_value: dimension mismatch");
    Vector proj = rff.omegas * (landmark - x);
    return proj.array().cos().matrix().dot(weights.q);
}

// Exact Gaussian kernel exp(-|delta|^2 / 2); validation oracle for the
// uniform-weight RFF approximation.
inline double gaussian_kernel_exact(const Vector& delta) {
    return std::exp(-0.5 * delta.squaredNorm());
}

}  // namespace gbrff
