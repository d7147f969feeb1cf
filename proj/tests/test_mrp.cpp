#include <catch_amalgamated.hpp>

#include "scem/env.hpp"
#include "scem/mrp.hpp"
#include "test_util.hpp"

using namespace scem;

namespace {

FiniteMrp swap_chain(double gamma = 0.5) {
    Matrix p(2, 2);
    p << 0, 1, 1, 0;
    return FiniteMrp(p, Matrix::Constant(2, 2, 1.0), gamma,
                     Vector::Constant(2, 0.5));
}

// independent oracle: value iteration to a 1e-13 fixed point
Vector value_iteration(const FiniteMrp& m) {
    Vector v = Vector::Zero(m.n);
    const Vector rbar = m.expected_reward();
    for (int it = 0; it < 2000000; ++it) {
        Vector next = rbar + m.gamma * (m.P * v);
        if ((next - v).lpNorm<Eigen::Infinity>() < 1e-13) return next;
        v = next;
    }
    return v;
}

}  // namespace

TEST_CASE("exact value function on the 2-state swap chain") {
    const Vector v = exact_value_function(swap_chain());
    CHECK(v[0] == Catch::Approx(2.0).margin(1e-12));
    CHECK(v[1] == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("exact value function is zero for zero rewards") {
    auto [m, phi] = make_baird(true, 0.9);
    CHECK(exact_value_function(m).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("exact value function matches fixed-point iteration") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const FiniteMrp m = testutil::random_mrp(5, seed, 0.8);
        const Vector v = exact_value_function(m);
        const Vector v_it = value_iteration(m);
        CHECK((v - v_it).lpNorm<Eigen::Infinity>() < 1e-10);
        // Bellman equation residual
        const Vector resid = v - m.expected_reward() - m.gamma * (m.P * v);
        CHECK(resid.lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("stationary distribution of the ring is uniform") {
    auto [m, phi] = make_ring(0.5);
    const Vector pi = stationary_distribution(m);
    for (int s = 0; s < m.n; ++s) CHECK(pi[s] == Catch::Approx(0.1).margin(1e-9));
}

TEST_CASE("stationary distribution of the swap chain is (1/2, 1/2)") {
    const Vector pi = stationary_distribution(swap_chain());
    CHECK(pi[0] == Catch::Approx(0.5).margin(1e-10));
    CHECK((pi.transpose() * swap_chain().P - pi.transpose()).norm() < 1e-9);
}

TEST_CASE("stationary distribution errs on the non-ergodic star chain") {
    auto [m, phi] = make_baird(true, 0.9);
    CHECK_THROWS(stationary_distribution(m));
}

TEST_CASE("stationary distribution matches long-run state frequencies") {
    const FiniteMrp m = make_random_mdp({50, 77}, 0.9);
    const Vector pi = stationary_distribution(m);
    TrajectorySampler sampler(m, 5, SampleMode::StationaryChain);
    Vector freq = Vector::Zero(m.n);
    const long steps = 10000000;
    for (long i = 0; i < steps; ++i) freq[sampler.next().s] += 1.0;
    freq /= static_cast<double>(steps);
    CHECK(0.5 * (freq - pi).lpNorm<1>() < 1e-2);  // total variation
}

TEST_CASE("sampling matches the kernel") {
    SECTION("deterministic chain always lands on its successor") {
        Matrix p(3, 3);
        p << 0, 1, 0, 0, 0, 1, 1, 0, 0;
        FiniteMrp m(p, Matrix::Zero(3, 3), 0.5, Vector::Constant(3, 1.0 / 3));
        TrajectorySampler sampler(m, 9);
        for (int i = 0; i < 100; ++i) {
            const Transition tr = sampler.next();
            CHECK(tr.s_next == (tr.s + 1) % 3);
        }
    }
    SECTION("every star transition enters state 7") {
        auto [m, phi] = make_baird(true, 0.9);
        TrajectorySampler sampler(m, 10);
        for (int i = 0; i < 200; ++i) CHECK(sampler.next().s_next == 6);
    }
    SECTION("iid state frequencies match nu") {
        const FiniteMrp m = testutil::random_mrp(6, 21, 0.9);
        TrajectorySampler sampler(m, 3, SampleMode::IidFromNu);
        Vector freq = Vector::Zero(m.n);
        const long steps = 1000000;
        for (long i = 0; i < steps; ++i) freq[sampler.next().s] += 1.0;
        freq /= static_cast<double>(steps);
        CHECK(0.5 * (freq - m.nu).lpNorm<1>() < 1e-2);
    }
}

TEST_CASE("samplers with equal seeds produce identical streams") {
    const FiniteMrp m = testutil::random_mrp(8, 4, 0.9);
    TrajectorySampler a(m, 123), b(m, 123);
    for (int i = 0; i < 1000; ++i) {
        const Transition ta = a.next(), tb = b.next();
        CHECK(ta.s == tb.s);
        CHECK(ta.s_next == tb.s_next);
        CHECK(ta.r == tb.r);
    }
}

TEST_CASE("exact statistics on the swap chain") {
    const FiniteMrp m = swap_chain();
    const Matrix phi = Matrix::Identity(2, 2);
    const OmegaTriple w = exact_statistics(m, phi);
    CHECK(w.w0[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(w.w0[1] == Catch::Approx(0.5).margin(1e-12));
    Matrix w1_expected(2, 2);
    w1_expected << -0.5, 0.25, 0.25, -0.5;
    CHECK((w.w1 - w1_expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((w.w2 - 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact statistics, zero rewards give zero w0") {
    FiniteMrp m = testutil::random_mrp(4, 8, 0.7);
    FiniteMrp zero(m.P, Matrix::Zero(4, 4), m.gamma, m.nu);
    const OmegaTriple w = exact_statistics(zero, Matrix::Identity(4, 4));
    CHECK(w.w0.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("exact statistics at gamma=0 with tabular phi") {
    const int n = 4;
    FiniteMrp m0 = testutil::random_mrp(n, 9, 0.5, true);
    FiniteMrp m(m0.P, m0.R, 0.0, m0.nu);
    const OmegaTriple w = exact_statistics(m, Matrix::Identity(n, n));
    CHECK((w.w1 + Matrix::Identity(n, n) / n).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact statistics rejects dependent features") {
    const FiniteMrp m = testutil::random_mrp(4, 10, 0.5);
    Matrix phi(4, 2);
    phi.col(0).setOnes();
    phi.col(1).setConstant(2.0);  // linearly dependent columns
    CHECK_THROWS(exact_statistics(m, phi));
}

TEST_CASE("omega-form fixed point equals the TD fixed point") {
    for (std::uint64_t seed : {31u, 32u, 33u, 34u}) {
        const FiniteMrp m = testutil::random_mrp(6, seed, 0.85);
        const Matrix phi = testutil::random_features(6, 3, seed + 100);
        const OmegaTriple w = exact_statistics(m, phi);
        // omega route: w1 z = -w0
        const Vector z_omega = w.w1.fullPivLu().solve(-w.w0);
        // direct route: A z = b with A = E[phi (phi - gamma phi')^T], b = E[r phi]
        const Matrix d_nu = m.nu.asDiagonal();
        const Matrix a = phi.transpose() * d_nu *
                         (Matrix::Identity(m.n, m.n) - m.gamma * m.P) * phi;
        const Vector b = phi.transpose() * d_nu * m.expected_reward();
        const Vector z_td = a.fullPivLu().solve(b);
        CHECK((z_omega - z_td).lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("row sums of generated kernels are exactly stochastic") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const FiniteMrp m = testutil::random_mrp(7, seed, 0.9);
        for (int s = 0; s < m.n; ++s)
            CHECK(std::abs(m.P.row(s).sum() - 1.0) <= 1e-12);
    }
}
