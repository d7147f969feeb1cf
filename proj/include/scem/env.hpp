#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "scem/features.hpp"
#include "scem/mrp.hpp"

namespace scem {

// ---------------------------------------------------------------------------
// Finite benchmark problems
// ---------------------------------------------------------------------------

/// Baird's 7-star: every state transitions to state 7; nu uniform. The
/// perfect variant has zero rewards, the imperfect one R(s,s') = 2.0 and a
/// feature matrix that cannot represent the constant value function.
inline std::pair<FiniteMrp, Matrix> make_baird(bool perfect, double gamma) {
    const int n = 7;
    Matrix p = Matrix::Zero(n, n);
    p.col(6).setOnes();
    Matrix reward = perfect ? Matrix::Zero(n, n) : Matrix::Constant(n, n, 2.0);
    Vector nu = Vector::Constant(n, 1.0 / n);

    Matrix phi(n, 8);
    if (perfect) {
        phi << 1, 2, 0, 0, 0, 0, 0, 0,
               1, 0, 2, 0, 0, 0, 0, 0,
               1, 0, 0, 2, 0, 0, 0, 0,
               1, 0, 0, 0, 2, 0, 0, 0,
               1, 0, 0, 0, 0, 2, 0, 0,
               1, 0, 0, 0, 0, 0, 2, 0,
               2, 0, 0, 0, 0, 0, 0, 1;
    } else {
        phi << 1, 2, 0, 0, 0, 0, 1, 0,
               1, 0, 2, 0, 0, 0, 0, 0,
               1, 0, 0, 2, 0, 0, 0, 0,
               1, 0, 0, 0, 2, 0, 0, 0,
               1, 0, 0, 0, 0, 0, 0, 2,
               1, 0, 0, 0, 0, 0, 0, 3,
               2, 0, 0, 0, 0, 0, 0, 1;
    }
    return {FiniteMrp(std::move(p), std::move(reward), gamma, std::move(nu)), phi};
}

/// 10-state ring: cyclic transitions, unit rewards, nu uniform. The printed
/// feature matrix reuses rows for states 9 and 10 (rank-deficient on
/// purpose).
inline std::pair<FiniteMrp, Matrix> make_ring(double gamma) {
    const int n = 10;
    Matrix p = Matrix::Zero(n, n);
    for (int s = 0; s < n; ++s) p(s, (s + 1) % n) = 1.0;
    Matrix reward = Matrix::Constant(n, n, 1.0);
    Vector nu = Vector::Constant(n, 1.0 / n);

    Matrix phi = Matrix::Zero(n, 8);
    for (int s = 0; s < 8; ++s) phi(s, s) = 1.0;
    phi(8, 7) = 1.0;
    phi(9, 5) = 1.0;
    return {FiniteMrp(std::move(p), std::move(reward), gamma, std::move(nu)), phi};
}

struct BinomialRandomMdpSpec {
    int n = 0;
    std::uint64_t seed = 0;
};

/// Random ergodic MRP: row s is the Binomial(n-1, b(s)) distribution over
/// states 0..n-1 and R(s,s') = G(s)G(s')/(1+s')^{1/4}, with b, G ~ U(0,1).
/// nu is the stationary distribution.
inline FiniteMrp make_random_mdp(const BinomialRandomMdpSpec& spec, double gamma) {
    if (spec.n < 2) throw std::invalid_argument("make_random_mdp: n >= 2 required");
    const int n = spec.n;
    Rng rng(spec.seed);
    Vector b(n), g(n);
    for (int s = 0; s < n; ++s) b[s] = rng.uniform();
    for (int s = 0; s < n; ++s) g[s] = rng.uniform();

    // log C(n-1, j) + j log b + (n-1-j) log(1-b), evaluated stably
    Matrix p(n, n);
    Vector lgam(n + 1);
    for (int j = 0; j <= n; ++j) lgam[j] = std::lgamma(j + 1.0);
    for (int s = 0; s < n; ++s) {
        const double lb = std::log(b[s]);
        const double l1b = std::log1p(-b[s]);
        for (int j = 0; j < n; ++j) {
            const double lc = lgam[n - 1] - lgam[j] - lgam[n - 1 - j];
            p(s, j) = std::exp(lc + j * lb + (n - 1 - j) * l1b);
        }
        p.row(s) /= p.row(s).sum();
    }

    Matrix reward(n, n);
    for (int s = 0; s < n; ++s)
        for (int j = 0; j < n; ++j)
            reward(s, j) = g[s] * g[j] / std::pow(1.0 + j, 0.25);

    FiniteMrp tmp(p, reward, gamma, Vector::Constant(n, 1.0 / n));
    Vector nu = stationary_distribution(tmp);
    return FiniteMrp(std::move(p), std::move(reward), gamma, std::move(nu));
}

// ---------------------------------------------------------------------------
// Linear-Gaussian control benchmarks
// ---------------------------------------------------------------------------

/// Discrete-time linear system s' = F s + G a + w with Gaussian process
/// noise, a Gaussian linear policy a = policy_gain s + policy_noise * xi,
/// and quadratic cost reward R(s,a) = -(s^T Q s + a^T Ract a).
struct LinearGaussSystem {
    Matrix f;           // d x d
    Matrix g;           // d x p
    Matrix noise_cov;   // d x d PSD
    Matrix policy_gain; // p x d
    double policy_noise = 0.0;
    Matrix reward_q;    // d x d PSD
    Matrix reward_ract; // p x p PSD
    double dt = 0.0;

    int state_dim() const { return static_cast<int>(f.rows()); }
    int action_dim() const { return static_cast<int>(g.cols()); }

    Matrix closed_loop() const { return f + g * policy_gain; }

    double reward(const Vector& s, const Vector& a) const {
        return -(s.dot(reward_q * s) + a.dot(reward_ract * a));
    }
};

/// Linearized cart-pole, state (psi, psi_dot, x, x_dot). Only the cart
/// velocity receives process noise (std sigma2).
inline LinearGaussSystem make_cartpole() {
    const double grav = 9.8, m = 0.5, big_m = 0.5, l = 0.6, b = 0.1, dt = 0.1,
                 sigma2 = 0.01;
    const double den1 = 4.0 * big_m * l - m * l;
    const double den2 = 4.0 * big_m - m;

    LinearGaussSystem sys;
    sys.dt = dt;
    sys.f = Matrix::Identity(4, 4);
    sys.f(0, 1) = dt;
    sys.f(1, 0) = dt * 3.0 * (big_m + m) / den1;
    sys.f(1, 1) = 1.0 + dt * 3.0 * b / den1;
    sys.f(2, 3) = dt;
    sys.f(3, 0) = dt * 3.0 * m * grav / den2;
    sys.f(3, 1) = -dt * 4.0 * b / den2;
    sys.g = Matrix::Zero(4, 1);
    sys.g(1, 0) = -dt * 3.0 / den1;
    sys.g(3, 0) = dt * 4.0 / den2;
    sys.noise_cov = Matrix::Zero(4, 4);
    sys.noise_cov(3, 3) = sigma2 * sigma2;
    sys.reward_q = Vector{{100.0, 0.0, 1.0, 0.0}}.asDiagonal();
    sys.reward_ract = Matrix::Constant(1, 1, 0.1);
    sys.policy_gain = Matrix::Zero(1, 4);
    sys.policy_noise = 0.1;
    return sys;
}

/// 5-link actuated pendulum, state (q, qdot) in R^10. Mass matrix
/// M_ij = l^2 (6-max(i,j)) m, gravity matrix U_ii = -g l (6-i) m.
inline LinearGaussSystem make_pendulum5() {
    const double grav = 9.8, m = 1.0, l = 1.0, dt = 0.1;
    const int links = 5;
    Matrix mass(links, links), u = Matrix::Zero(links, links);
    for (int i = 0; i < links; ++i) {
        for (int j = 0; j < links; ++j)
            mass(i, j) = l * l * (6.0 - std::max(i + 1, j + 1)) * m;
        u(i, i) = -grav * l * (6.0 - (i + 1)) * m;
    }
    const Matrix mass_inv = mass.inverse();

    LinearGaussSystem sys;
    sys.dt = dt;
    sys.f = Matrix::Identity(10, 10);
    sys.f.topRightCorner(links, links) = dt * Matrix::Identity(links, links);
    sys.f.bottomLeftCorner(links, links) = -dt * mass_inv * u;
    sys.g = Matrix::Zero(10, links);
    sys.g.bottomRows(links) = dt * mass_inv;
    sys.noise_cov = 1e-4 * Matrix::Identity(10, 10);  // sigma 0.01 per component
    sys.reward_q = Matrix::Zero(10, 10);
    sys.reward_q.topLeftCorner(links, links) = Matrix::Identity(links, links);
    sys.reward_ract = Matrix::Zero(links, links);
    sys.policy_gain = Matrix::Zero(links, 10);
    sys.policy_noise = 0.1;
    return sys;
}

/// Discounted discrete-time Riccati iteration for the evaluation policy:
/// returns the gain K (a = K s) and the quadratic cost matrix.
struct LqrSolution {
    Matrix gain;       // p x d, minimizing gain (negative feedback included)
    Matrix cost;       // d x d cost-to-go quadratic
};

inline LqrSolution solve_lqr_policy(const LinearGaussSystem& sys, double gamma,
                                    double tol = 1e-10, int max_iter = 200000) {
    const int d = sys.state_dim(), p = sys.action_dim();
    Matrix pk = sys.reward_q;
    Matrix k = Matrix::Zero(p, d);
    for (int it = 0; it < max_iter; ++it) {
        const Matrix denom = sys.reward_ract + gamma * sys.g.transpose() * pk * sys.g;
        k = -gamma * Eigen::LDLT<Matrix>(denom).solve(sys.g.transpose() * pk * sys.f);
        const Matrix fcl = sys.f + sys.g * k;
        const Matrix pn = sys.reward_q + k.transpose() * sys.reward_ract * k +
                          gamma * fcl.transpose() * pk * fcl;
        const double diff = (pn - pk).cwiseAbs().maxCoeff();
        pk = pn;
        if (diff < tol) return {k, pk};
    }
    throw std::runtime_error("solve_lqr_policy: Riccati iteration did not converge");
}

/// Quadratic value of the Gaussian policy: V(s) = -(s^T Pv s + cv). The
/// closed loop must be gamma-contractive.
struct QuadraticValue {
    Matrix pv;
    double cv = 0.0;

    double value(const Vector& s) const { return -(s.dot(pv * s) + cv); }
};

inline double spectral_radius(const Matrix& a) {
    return a.eigenvalues().cwiseAbs().maxCoeff();
}

inline QuadraticValue exact_quadratic_value(const LinearGaussSystem& sys,
                                            double gamma, double tol = 1e-13,
                                            int max_iter = 400000) {
    const Matrix fcl = sys.closed_loop();
    if (gamma * spectral_radius(fcl) * spectral_radius(fcl) >= 1.0)
        throw std::runtime_error("exact_quadratic_value: closed loop not gamma-contractive");
    const Matrix qq = sys.reward_q +
                      sys.policy_gain.transpose() * sys.reward_ract * sys.policy_gain;
    Matrix pv = Matrix::Zero(sys.state_dim(), sys.state_dim());
    for (int it = 0; it < max_iter; ++it) {
        const Matrix pn = qq + gamma * fcl.transpose() * pv * fcl;
        const double diff = (pn - pv).cwiseAbs().maxCoeff();
        pv = pn;
        if (diff < tol) break;
        if (it + 1 == max_iter)
            throw std::runtime_error("exact_quadratic_value: Lyapunov iteration stalled");
    }
    const double s1 = sys.policy_noise;
    const Matrix noise_in = sys.noise_cov + s1 * s1 * sys.g * sys.g.transpose();
    const double cv = (gamma * (pv * noise_in).trace() +
                       s1 * s1 * sys.reward_ract.trace()) /
                      (1.0 - gamma);
    return {pv, cv};
}

/// Stationary state covariance of the closed loop (discrete Lyapunov
/// fixed point), used to initialize held-out trajectories near steady state.
inline Matrix stationary_state_cov(const LinearGaussSystem& sys, double tol = 1e-14,
                                   int max_iter = 400000) {
    const Matrix fcl = sys.closed_loop();
    const double s1 = sys.policy_noise;
    const Matrix noise_in = sys.noise_cov + s1 * s1 * sys.g * sys.g.transpose();
    Matrix cov = noise_in;
    for (int it = 0; it < max_iter; ++it) {
        const Matrix next = fcl * cov * fcl.transpose() + noise_in;
        const double diff = (next - cov).cwiseAbs().maxCoeff();
        cov = next;
        if (diff < tol) break;
    }
    return cov;
}

struct ContTransition {
    Vector s;
    double r = 0.0;
    Vector s_next;
};

/// Trajectory sampler for the linear-Gaussian systems under their stored
/// policy; one per thread, deterministic per seed.
class LinearGaussSampler {
public:
    LinearGaussSampler(const LinearGaussSystem& sys, std::uint64_t seed,
                       int burn_in = 1000)
        : sys_(&sys), rng_(seed), s_(Vector::Zero(sys.state_dim())) {
        noise_chol_ = Eigen::LLT<Matrix>(
                          sys.noise_cov +
                          1e-18 * Matrix::Identity(sys.state_dim(), sys.state_dim()))
                          .matrixL();
        for (int i = 0; i < burn_in; ++i) advance();
    }

    ContTransition next() {
        ContTransition tr;
        tr.s = s_;
        tr.r = advance();
        tr.s_next = s_;
        return tr;
    }

    /// Independent second next-state draw from the current state (fresh
    /// action and process noise), for double-sampling algorithms.
    Vector sample_next_state(const Vector& s) {
        const Vector a = policy_action(s);
        return sys_->f * s + sys_->g * a + process_noise();
    }

private:
    Vector policy_action(const Vector& s) {
        Vector a = sys_->policy_gain * s;
        for (Eigen::Index i = 0; i < a.size(); ++i)
            a[i] += sys_->policy_noise * rng_.normal();
        return a;
    }

    Vector process_noise() {
        Vector w(sys_->state_dim());
        for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng_.normal();
        return noise_chol_ * w;
    }

    double advance() {
        const Vector a = policy_action(s_);
        const double r = sys_->reward(s_, a);
        s_ = sys_->f * s_ + sys_->g * a + process_noise();
        return r;
    }

    const LinearGaussSystem* sys_;
    Rng rng_;
    Vector s_;
    Matrix noise_chol_;
};

/// Measure-weighted oracle for continuous-state runs, estimated once from a
/// long held-out trajectory: the decoupled statistics (for MSPBE), the value
/// moments (for MSE) and the feature second moments (for standardization).
struct ContOracle {
    OmegaTriple omega;   // on standardized features when scales are applied
    Vector scales;       // sqrt(E[phi_i^2]) of the raw features
    Matrix gram;         // E[phi phi^T], standardized
    Vector v_phi;        // E[V(s) phi(s)], standardized
    double v_sq = 0.0;   // E[V(s)^2]

    double mspbe(const Vector& z) const {
        const Vector v = omega.w0 + omega.w1 * z;
        return std::max(0.0, v.dot(omega.w2 * v));
    }

    double mse(const Vector& z) const {
        return std::max(0.0, v_sq - 2.0 * z.dot(v_phi) + z.dot(gram * z));
    }
};

inline ContOracle build_cont_oracle(const LinearGaussSystem& sys,
                                    const FeatureMap& raw_map, double gamma,
                                    long n_transitions, std::uint64_t seed,
                                    bool standardize) {
    const QuadraticValue qv = exact_quadratic_value(sys, gamma);
    LinearGaussSampler sampler(sys, seed);
    const int k = raw_map.k();

    Vector w0 = Vector::Zero(k), v_phi = Vector::Zero(k);
    Matrix a1 = Matrix::Zero(k, k), gram = Matrix::Zero(k, k);
    double v_sq = 0.0;
    for (long t = 1; t <= n_transitions; ++t) {
        const ContTransition tr = sampler.next();
        const Vector phi = raw_map.evaluate(tr.s);
        const Vector phip = raw_map.evaluate(tr.s_next);
        const double inv = 1.0 / static_cast<double>(t);
        w0 += inv * (tr.r * phi - w0);
        a1 += inv * (phi * (gamma * phip - phi).transpose() - a1);
        gram += inv * (phi * phi.transpose() - gram);
        const double val = qv.value(tr.s);
        v_phi += inv * (val * phi - v_phi);
        v_sq += inv * (val * val - v_sq);
    }

    ContOracle orc;
    orc.scales = standardize ? gram.diagonal().cwiseSqrt().eval()
                             : Vector::Ones(k).eval();
    const Vector inv_s = orc.scales.cwiseInverse();
    orc.omega.w0 = inv_s.asDiagonal() * w0;
    orc.omega.w1 = inv_s.asDiagonal() * a1 * inv_s.asDiagonal();
    orc.gram = inv_s.asDiagonal() * gram * inv_s.asDiagonal();
    Eigen::FullPivLU<Matrix> lu(orc.gram);
    if (!lu.isInvertible())
        throw std::runtime_error("build_cont_oracle: singular feature Gram");
    orc.omega.w2 = lu.inverse();
    orc.v_phi = inv_s.asDiagonal() * v_phi;
    orc.v_sq = v_sq;
    return orc;
}

}  // namespace scem
