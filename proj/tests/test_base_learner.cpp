#include <catch2/catch_amalgamated.hpp>

#include "gbrff/base_learner.hpp"

using namespace gbrff;

namespace {

// Brute-force evaluation of the landmark loss, double loop, no reuse of
// the library's matrix path.
double naive_loss(const RffSet& rff, const Vector& resid, const Matrix& points,
                  const Vector& landmark) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < resid.size(); ++i) {
        double approx = 0.0;
        for (Eigen::Index j = 0; j < rff.k(); ++j)
            approx += std::cos(rff.omegas.row(j).dot(landmark - points.row(i).transpose()));
        approx /= static_cast<double>(rff.k());
        total += (resid[i] - approx) * (resid[i] - approx);
    }
    return total / static_cast<double>(resid.size());
}

struct Instance {
    RffSet rff;
    Vector resid;
    Matrix points;
    Vector landmark;
};

Instance random_instance(Rng& rng, Eigen::Index n, Eigen::Index d, Eigen::Index k) {
    Instance inst;
    inst.rff = sample_rff(k, d, rng.index(1u << 30));
    inst.resid.resize(n);
    inst.points.resize(n, d);
    inst.landmark.resize(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        inst.resid[i] = rng.normal();
        for (Eigen::Index j = 0; j < d; ++j) inst.points(i, j) = rng.normal();
    }
    for (Eigen::Index j = 0; j < d; ++j) inst.landmark[j] = rng.normal();
    return inst;
}

}  // namespace

TEST_CASE("landmark_loss at the single training point") {
    RffSet rff = sample_rff(8, 3, 1);
    Matrix points(1, 3);
    points.row(0) = Vector::Random(3).transpose();
    Vector landmark = points.row(0).transpose();

    Vector resid1(1);
    resid1 << 1.0;
    CHECK(landmark_loss(rff, resid1, points, landmark) == Catch::Approx(0.0).margin(1e-15));

    Vector resid0(1);
    resid0 << 0.0;
    CHECK(landmark_loss(rff, resid0, points, landmark) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("landmark_loss matches the naive double loop") {
    Rng rng(3);
    Instance inst = random_instance(rng, 20, 4, 8);
    const double fast = landmark_loss(inst.rff, inst.resid, inst.points, inst.landmark);
    const double slow = naive_loss(inst.rff, inst.resid, inst.points, inst.landmark);
    CHECK(fast == Catch::Approx(slow).epsilon(1e-12));
}

TEST_CASE("landmark_loss rejects mismatched shapes") {
    RffSet rff = sample_rff(4, 2, 0);
    Matrix points = Matrix::Zero(3, 2);
    Vector resid = Vector::Zero(2);  // wrong length
    CHECK_THROWS_AS(landmark_loss(rff, resid, points, Vector::Zero(2)), std::invalid_argument);
    Vector ok = Vector::Zero(3);
    CHECK_THROWS_AS(landmark_loss(rff, ok, points, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("landmark_gradient vanishes at a zero-shift stationary point") {
    RffSet rff = sample_rff(6, 2, 9);
    Matrix points(1, 2);
    points << 0.3, -0.7;
    Vector resid(1);
    resid << 1.0;
    Vector grad = landmark_gradient(rff, resid, points, points.row(0).transpose());
    CHECK(grad.lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("landmark_gradient hand-computed 1-D value") {
    // K=1, omega=1, landmark - x = pi/2, residual 1:
    // 2 * sin(pi/2) * (1 - cos(pi/2)) = 2
    RffSet rff;
    rff.omegas = Matrix::Ones(1, 1);
    Matrix points = Matrix::Zero(1, 1);
    Vector resid(1);
    resid << 1.0;
    Vector landmark(1);
    landmark << M_PI / 2.0;
    Vector grad = landmark_gradient(rff, resid, points, landmark);
    CHECK(grad[0] == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("landmark_gradient matches central finite differences") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(49));
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(10));
        const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.index(20));
        Instance inst = random_instance(rng, n, d, k);
        Vector grad = landmark_gradient(inst.rff, inst.resid, inst.points, inst.landmark);
        const double h = 1e-5;
        for (Eigen::Index j = 0; j < d; ++j) {
            Vector lp = inst.landmark, lm = inst.landmark;
            lp[j] += h;
            lm[j] -= h;
            const double fd = (landmark_loss(inst.rff, inst.resid, inst.points, lp) -
                               landmark_loss(inst.rff, inst.resid, inst.points, lm)) /
                              (2.0 * h);
            const double denom = std::max(1.0, std::abs(fd));
            REQUIRE(std::abs(grad[j] - fd) / denom < 1e-5);
        }
    }
}

TEST_CASE("optimize_landmark returns the init unchanged at a stationary point") {
    RffSet rff = sample_rff(6, 2, 21);
    Matrix points(1, 2);
    points << 1.0, 2.0;
    Vector resid(1);
    resid << 1.0;  // zero-shift point has zero loss and zero gradient
    Vector out = optimize_landmark(rff, resid, points, points.row(0).transpose());
    CHECK((out.array() == points.row(0).transpose().array()).all());
}

TEST_CASE("optimize_landmark never increases the loss") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        Instance inst = random_instance(rng, 15, 3, 10);
        const double before = landmark_loss(inst.rff, inst.resid, inst.points, inst.landmark);
        Vector out = optimize_landmark(inst.rff, inst.resid, inst.points, inst.landmark);
        const double after = landmark_loss(inst.rff, inst.resid, inst.points, out);
        REQUIRE(after <= before + 1e-12);
    }
}

TEST_CASE("optimize_landmark single-iteration trace matches the update rule") {
    Rng rng(41);
    Instance inst = random_instance(rng, 10, 2, 6);
    LandmarkDescentConfig cfg;
    cfg.max_iterations = 1;
    cfg.step_size = 0.05;  // small enough for the first step to descend
    Vector grad = landmark_gradient(inst.rff, inst.resid, inst.points, inst.landmark);
    Vector expected = inst.landmark - cfg.step_size * grad;
    const double init_loss = landmark_loss(inst.rff, inst.resid, inst.points, inst.landmark);
    REQUIRE(landmark_loss(inst.rff, inst.resid, inst.points, expected) <= init_loss);
    Vector out = optimize_landmark(inst.rff, inst.resid, inst.points, inst.landmark, cfg);
    CHECK((out - expected).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("compute_q with c = 0 is exactly uniform") {
    Rng rng(51);
    Instance inst = random_instance(rng, 12, 3, 7);
    SimplexWeights q = compute_q(inst.rff, inst.resid, inst.points, inst.landmark, 0.0);
    for (Eigen::Index j = 0; j < 7; ++j) REQUIRE(q.q[j] == 1.0 / 7.0);
}

TEST_CASE("softmax_weights concentrates on the low-loss feature") {
    // two features with losses (0, 1) and temperature 2^10
    Vector losses(2);
    losses << 0.0, 1.0;
    SimplexWeights q = softmax_weights(-std::pow(2.0, 10) * losses);
    CHECK(q.q[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(q.q[1] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("compute_q output satisfies the simplex invariants") {
    Rng rng(61);
    for (double c : {0.0, 0.5, 8.0, 1024.0, 1e8}) {
        Instance inst = random_instance(rng, 10, 2, 9);
        SimplexWeights q = compute_q(inst.rff, inst.resid, inst.points, inst.landmark, c);
        REQUIRE(q.valid());
    }
    Instance inst = random_instance(rng, 5, 2, 4);
    CHECK_THROWS_AS(compute_q(inst.rff, inst.resid, inst.points, inst.landmark, -1.0),
                    std::invalid_argument);
}

TEST_CASE("raising c never favors the worst feature") {
    Rng rng(71);
    Instance inst = random_instance(rng, 14, 3, 8);
    Vector losses = detail::LandmarkObjective(inst.rff, inst.resid, inst.points)
                        .per_feature_losses(inst.landmark);
    Eigen::Index worst;
    losses.maxCoeff(&worst);
    double prev = 1.0;
    for (double c : {0.0, 0.5, 1.0, 4.0, 16.0, 256.0}) {
        SimplexWeights q = compute_q(inst.rff, inst.resid, inst.points, inst.landmark, c);
        REQUIRE(q.q[worst] <= prev + 1e-15);
        prev = q.q[worst];
    }
}

TEST_CASE("predict_base agrees with an explicit weighted sum") {
    Rng rng(81);
    BaseLearner learner;
    learner.rff = sample_rff(10, 3, 5);
    learner.landmark = Vector::Random(3);
    Vector raw(10);
    for (Eigen::Index j = 0; j < 10; ++j) raw[j] = std::abs(rng.normal()) + 1e-3;
    learner.q.q = raw / raw.sum();
    Vector x = Vector::Random(3);

    CHECK(predict_base(learner, learner.landmark) == Catch::Approx(1.0).margin(1e-14));

    double expected = 0.0;
    for (Eigen::Index j = 0; j < 10; ++j)
        expected += learner.q.q[j] *
                    std::cos(learner.rff.omegas.row(j).dot(learner.landmark - x));
    CHECK(predict_base(learner, x) == Catch::Approx(expected).margin(1e-13));
}
