#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "scem/sce.hpp"

namespace scem {

/// Divergence guard shared by the online baselines.
constexpr double kDivergenceThreshold = 1e12;

inline double td_error(const Vector& z, const FeatTransition& tr, double gamma) {
    return tr.reward + gamma * z.dot(tr.phi_next) - z.dot(tr.phi);
}

/// TD(0): z <- z + alpha delta phi. diverged() flags runaway off-policy runs.
class Td0 {
public:
    explicit Td0(Vector z0) : z_(std::move(z0)) {}

    void step(const FeatTransition& tr, double alpha, double gamma) {
        if (diverged_) return;
        const double delta = td_error(z_, tr, gamma);
        z_ += alpha * delta * tr.phi;
        if (z_.norm() > kDivergenceThreshold || !z_.allFinite()) diverged_ = true;
    }

    const Vector& z() const { return z_; }
    bool diverged() const { return diverged_; }

private:
    Vector z_;
    bool diverged_ = false;
};

/// GTD2 with the auxiliary vector v on the faster timescale beta = eta alpha.
class Gtd2 {
public:
    explicit Gtd2(Vector z0) : z_(std::move(z0)), v_(Vector::Zero(z_.size())) {}

    void step(const FeatTransition& tr, double alpha, double eta, double gamma) {
        if (eta <= 0.0) throw std::invalid_argument("Gtd2: eta must be positive");
        if (diverged_) return;
        const double beta = eta * alpha;
        const double delta = td_error(z_, tr, gamma);
        const double pv = tr.phi.dot(v_);
        z_ += alpha * pv * (tr.phi - gamma * tr.phi_next);
        v_ += beta * (delta - pv) * tr.phi;
        if (z_.norm() > kDivergenceThreshold || !z_.allFinite()) diverged_ = true;
    }

    const Vector& z() const { return z_; }
    const Vector& v() const { return v_; }
    bool diverged() const { return diverged_; }

private:
    Vector z_, v_;
    bool diverged_ = false;
};

/// Residual gradient with double sampling: the correction uses an
/// independent second next-state phi''.
class ResidualGradient {
public:
    explicit ResidualGradient(Vector z0) : z_(std::move(z0)) {}

    void step(const Vector& phi, double reward, const Vector& phi_next,
              const Vector& phi_next2, double alpha, double gamma) {
        if (diverged_) return;
        const double delta = reward + gamma * z_.dot(phi_next) - z_.dot(phi);
        z_ += alpha * delta * (phi - gamma * phi_next2);
        if (z_.norm() > kDivergenceThreshold || !z_.allFinite()) diverged_ = true;
    }

    const Vector& z() const { return z_; }
    bool diverged() const { return diverged_; }

private:
    Vector z_;
    bool diverged_ = false;
};

/// Batch LSTD(0): accumulates A_t = (1/t) sum phi (phi - gamma phi')^T and
/// b_t = (1/t) sum r phi; solve() factors once at the end.
class Lstd {
public:
    explicit Lstd(int k) : a_(Matrix::Zero(k, k)), b_(Vector::Zero(k)) {}

    void step(const FeatTransition& tr, double gamma) {
        ++count_;
        a_ += (tr.phi * (tr.phi - gamma * tr.phi_next).transpose() - a_) / count_;
        b_ += (tr.reward * tr.phi - b_) / count_;
    }

    /// Solves A z = b; throws on a singular system (callers regularize via
    /// the ridge argument when the feature set is rank-deficient).
    Vector solve(double ridge = 0.0) const {
        if (count_ == 0) throw std::runtime_error("Lstd: no samples");
        Matrix a = a_;
        if (ridge > 0.0) a += ridge * Matrix::Identity(a.rows(), a.cols());
        Eigen::FullPivLU<Matrix> lu(a);
        if (!lu.isInvertible())
            throw std::runtime_error("Lstd: singular system; pass a ridge to regularize");
        return lu.solve(b_);
    }

    long count() const { return count_; }
    const Matrix& a() const { return a_; }
    const Vector& b() const { return b_; }

private:
    Matrix a_;
    Vector b_;
    long count_ = 0;
};

/// Recursive LSTD: Sherman-Morrison rank-1 maintenance of A^{-1}, with the
/// inverse accumulator initialized to (1/epsilon) I.
class Rlstd {
public:
    explicit Rlstd(int k, double epsilon = 1e-2)
        : inv_(Matrix::Identity(k, k) / epsilon), z_(Vector::Zero(k)),
          b_(Vector::Zero(k)) {}

    void step(const FeatTransition& tr, double gamma) {
        const Vector u = tr.phi;
        const Vector v = tr.phi - gamma * tr.phi_next;
        const Vector inv_u = inv_ * u;
        const double denom = 1.0 + v.dot(inv_u);
        if (std::abs(denom) < 1e-12) {
            ++skipped_;
            return;
        }
        inv_ -= (inv_u * (v.transpose() * inv_)) / denom;
        b_ += tr.reward * tr.phi;
        z_ = inv_ * b_;
    }

    const Vector& z() const { return z_; }
    long skipped() const { return skipped_; }

private:
    Matrix inv_;
    Vector z_;
    Vector b_;
    long skipped_ = 0;
};

/// LSPE(0): least-squares fit u of the empirical Bellman image of the
/// current z, then z <- z + alpha (u - z). Accumulators share the LSTD
/// sample averages; the Gram solve is ridge-stabilized.
class Lspe {
public:
    explicit Lspe(Vector z0)
        : z_(std::move(z0)),
          gram_(Matrix::Zero(z_.size(), z_.size())),
          cross_(Matrix::Zero(z_.size(), z_.size())),
          b_(Vector::Zero(z_.size())) {}

    void step(const FeatTransition& tr, double alpha, double gamma) {
        ++count_;
        gram_ += (tr.phi * tr.phi.transpose() - gram_) / count_;
        cross_ += (tr.phi * tr.phi_next.transpose() - cross_) / count_;
        b_ += (tr.reward * tr.phi - b_) / count_;
        const Matrix g =
            gram_ + 1e-8 * Matrix::Identity(gram_.rows(), gram_.cols());
        const Vector u = Eigen::LDLT<Matrix>(g).solve(b_ + gamma * (cross_ * z_));
        z_ += alpha * (u - z_);
    }

    const Vector& z() const { return z_; }

private:
    Vector z_;
    Matrix gram_, cross_;
    Vector b_;
    long count_ = 0;
};

}  // namespace scem
