#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "scem/rng.hpp"

namespace scem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Finite Markov reward process: row-stochastic kernel P, per-pair rewards
/// R(s,s'), discount gamma, and the sampling distribution nu. Immutable
/// after construction and shareable across threads.
struct FiniteMrp {
    int n = 0;
    Matrix P;       // n x n, rows sum to 1
    Matrix R;       // n x n reward per transition
    double gamma = 0.0;
    Vector nu;      // sampling distribution over states
    double r_max = 0.0;

    FiniteMrp(Matrix P_, Matrix R_, double gamma_, Vector nu_)
        : n(static_cast<int>(P_.rows())),
          P(std::move(P_)),
          R(std::move(R_)),
          gamma(gamma_),
          nu(std::move(nu_)) {
        if (P.rows() != P.cols() || R.rows() != n || R.cols() != n || nu.size() != n)
            throw std::invalid_argument("FiniteMrp: inconsistent dimensions");
        if (gamma < 0.0 || gamma >= 1.0)
            throw std::invalid_argument("FiniteMrp: gamma must lie in [0,1)");
        for (int s = 0; s < n; ++s) {
            if (P.row(s).minCoeff() < 0.0)
                throw std::invalid_argument("FiniteMrp: negative transition probability");
            if (std::abs(P.row(s).sum() - 1.0) > 1e-12)
                throw std::invalid_argument("FiniteMrp: row " + std::to_string(s) +
                                            " of P does not sum to 1");
        }
        if (nu.minCoeff() < 0.0 || std::abs(nu.sum() - 1.0) > 1e-12)
            throw std::invalid_argument("FiniteMrp: nu is not a probability vector");
        r_max = R.cwiseAbs().maxCoeff();
    }

    /// Expected one-step reward per state, Rbar(s) = sum_s' P(s,s') R(s,s').
    Vector expected_reward() const { return (P.array() * R.array()).rowwise().sum(); }
};

struct Transition {
    int s = 0;
    double r = 0.0;
    int s_next = 0;
};

enum class SampleMode { IidFromNu, StationaryChain };

/// Draws (s, r, s') triplets from a finite MRP. One sampler per thread;
/// identical seed and model give an identical stream.
class TrajectorySampler {
public:
    TrajectorySampler(const FiniteMrp& m, std::uint64_t seed,
                      SampleMode mode = SampleMode::IidFromNu)
        : m_(&m), rng_(seed), mode_(mode) {
        nu_cdf_ = cumsum(m.nu);
        p_cdf_.resize(m.n, m.n);
        for (int s = 0; s < m.n; ++s)
            p_cdf_.row(s) = cumsum(m.P.row(s).transpose()).transpose();
        cur_ = draw(nu_cdf_.data(), m.n);
    }

    Transition next() {
        const int s = (mode_ == SampleMode::IidFromNu) ? draw(nu_cdf_.data(), m_->n) : cur_;
        const int sp = sample_next_state(s);
        cur_ = sp;
        return Transition{s, m_->R(s, sp), sp};
    }

    /// Independent next-state draw from P(s, .) for double-sampling
    /// algorithms. Never advances the chain position.
    int sample_next_state(int s) {
        return draw(p_cdf_.data() + static_cast<std::ptrdiff_t>(s) * m_->n, m_->n);
    }

    const FiniteMrp& model() const { return *m_; }

private:
    static Vector cumsum(const Vector& v) {
        Vector c(v.size());
        double acc = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            acc += v[i];
            c[i] = acc;
        }
        c[v.size() - 1] = 1.0;
        return c;
    }

    int draw(const double* cdf, int n) {
        const double u = rng_.uniform();
        return static_cast<int>(std::lower_bound(cdf, cdf + n, u) - cdf);
    }

    const FiniteMrp* m_;
    Rng rng_;
    SampleMode mode_;
    Vector nu_cdf_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> p_cdf_;
    int cur_ = 0;
};

/// Decoupled MSPBE statistics: w0 = E[r phi], w1 = E[phi (gamma phi' - phi)^T],
/// w2 = E[phi phi^T]^{-1}.
struct OmegaTriple {
    Vector w0;
    Matrix w1;
    Matrix w2;

    static OmegaTriple zero(int k) {
        return OmegaTriple{Vector::Zero(k), Matrix::Zero(k, k), Matrix::Zero(k, k)};
    }
};

/// V = (I - gamma P)^{-1} Rbar via a pivoted LU solve.
inline Vector exact_value_function(const FiniteMrp& m) {
    if (m.gamma >= 1.0) throw std::invalid_argument("exact_value_function: gamma >= 1");
    const Matrix A = Matrix::Identity(m.n, m.n) - m.gamma * m.P;
    return Eigen::PartialPivLU<Matrix>(A).solve(m.expected_reward());
}

/// Stationary distribution by power iteration; throws if the chain does not
/// converge (non-ergodic, e.g. Baird's star).
inline Vector stationary_distribution(const FiniteMrp& m, double tol = 1e-10,
                                      int max_iter = 100000) {
    Vector pi = Vector::Constant(m.n, 1.0 / m.n);
    for (int it = 0; it < max_iter; ++it) {
        Vector next = m.P.transpose() * pi;
        next /= next.sum();
        const double diff = (next - pi).lpNorm<Eigen::Infinity>();
        pi = next;
        if (diff < tol) {
            // a fixed point of P^T reached from uniform is only stationary for
            // an ergodic chain if it is strictly positive
            if (pi.minCoeff() <= 0.0)
                throw std::runtime_error("stationary_distribution: chain is not ergodic");
            return pi;
        }
    }
    throw std::runtime_error("stationary_distribution: power iteration did not converge");
}

/// Exact omega statistics under (m, Phi): the ground truth the online
/// recursions track.
inline OmegaTriple exact_statistics(const FiniteMrp& m, const Matrix& phi) {
    const auto k = phi.cols();
    const Matrix d_nu = m.nu.asDiagonal();
    const Matrix gram = phi.transpose() * d_nu * phi;
    Eigen::FullPivLU<Matrix> lu(gram);
    if (!lu.isInvertible())
        throw std::runtime_error("exact_statistics: singular feature Gram matrix");
    OmegaTriple w = OmegaTriple::zero(static_cast<int>(k));
    w.w0 = phi.transpose() * d_nu * m.expected_reward();
    w.w1 = phi.transpose() * d_nu * (m.gamma * m.P - Matrix::Identity(m.n, m.n)) * phi;
    w.w2 = lu.inverse();
    return w;
}

}  // namespace scem
