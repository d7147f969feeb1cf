#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "scem/rng.hpp"

namespace scem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Gaussian model theta = (mu, Sigma). Sigma must be symmetric PSD up to
/// round-off; a zero Sigma is the degenerate point mass.
struct GaussParam {
    Vector mu;
    Matrix sigma;

    int dim() const { return static_cast<int>(mu.size()); }

    void validate() const {
        if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
            throw std::invalid_argument("GaussParam: dimension mismatch");
        if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("GaussParam: sigma not symmetric");
        Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw std::invalid_argument("GaussParam: sigma not PSD");
    }

    static GaussParam isotropic(const Vector& mu, double var) {
        return GaussParam{mu, var * Matrix::Identity(mu.size(), mu.size())};
    }
};

/// Cached factor L with L L^T = Sigma, for repeated sampling from a fixed
/// Gaussian. Eigenvalue-based so PSD-with-zero-modes parameters work.
class GaussSampler {
public:
    GaussSampler() = default;
    explicit GaussSampler(const GaussParam& p) { reset(p); }

    void reset(const GaussParam& p) {
        mu_ = p.mu;
        Eigen::SelfAdjointEigenSolver<Matrix> es(p.sigma);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("GaussSampler: eigendecomposition failed");
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw std::runtime_error("GaussSampler: covariance not PSD");
        factor_ = es.eigenvectors() *
                  es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    Vector sample(Rng& rng) const {
        Vector n(mu_.size());
        for (Eigen::Index i = 0; i < n.size(); ++i) n[i] = rng.normal();
        return mu_ + factor_ * n;
    }

    const Vector& mu() const { return mu_; }

private:
    Vector mu_;
    Matrix factor_;
};

/// Mixture (1-lambda) f_current + lambda f_base; the base keeps full support
/// for exploration.
struct MixtureParam {
    double lambda = 0.0;
    GaussParam base;
    GaussParam current;
};

inline Vector sample(const MixtureParam& mix, Rng& rng) {
    if (!(mix.lambda > 0.0 && mix.lambda < 1.0))
        throw std::invalid_argument("sample: lambda must lie in (0,1)");
    const GaussParam& pick = (rng.uniform() < mix.lambda) ? mix.base : mix.current;
    return GaussSampler(pick).sample(rng);
}

/// Shaping S(x) = exp(r x) and the elite quantile level rho.
struct Shaping {
    double r = 1.0;
    double rho = 0.1;

    void validate() const {
        if (r <= 0.0) throw std::invalid_argument("Shaping: r must be positive");
        if (rho <= 0.0 || rho >= 1.0) throw std::invalid_argument("Shaping: rho in (0,1)");
    }
};

/// S evaluated in log-space relative to a shared offset; callers that
/// aggregate weights pass the running max of r*H to avoid underflow of
/// large-negative objectives.
inline double shaping_value(double hx, const Shaping& sh, double log_offset = 0.0) {
    const double e = std::min(sh.r * hx - log_offset, 700.0);
    return std::exp(e);
}

inline double g0(double hx, double gamma, const Shaping& sh, double log_offset = 0.0) {
    return hx >= gamma ? shaping_value(hx, sh, log_offset) : 0.0;
}

inline Vector g1(double hx, const Vector& x, double gamma, const Shaping& sh,
                 double log_offset = 0.0) {
    return g0(hx, gamma, sh, log_offset) * x;
}

inline Matrix g2(double hx, const Vector& x, double gamma, const Vector& mu,
                 const Shaping& sh, double log_offset = 0.0) {
    const Vector d = x - mu;
    return g0(hx, gamma, sh, log_offset) * (d * d.transpose());
}

/// The ceil((1-rho) N)-th smallest of the sample, i.e. the empirical
/// (1-rho)-quantile used by the Monte-Carlo method.
inline double order_statistic_quantile(std::vector<double> values, double rho) {
    if (values.empty())
        throw std::invalid_argument("order_statistic_quantile: empty sample");
    const auto n = values.size();
    auto idx = static_cast<std::size_t>(
        std::ceil((1.0 - rho) * static_cast<double>(n)));
    idx = std::min(std::max<std::size_t>(idx, 1), n);
    std::nth_element(values.begin(), values.begin() + (idx - 1), values.end());
    return values[idx - 1];
}

/// Quantile loss whose minimizer over y is the (1-rho)-quantile of H.
inline double psi(double hx, double y, double rho) {
    double v = 0.0;
    if (hx >= y) v += (1.0 - rho) * (hx - y);
    if (hx <= y) v += rho * (y - hx);
    return v;
}

/// One iteration of the Monte-Carlo method: sample, take the order-statistic
/// threshold, compare against the running threshold, and refit (mu, Sigma)
/// with the shaped elite weights.
struct McCeState {
    GaussParam theta;
    double gamma_star = -std::numeric_limits<double>::infinity();
    bool degenerate_last = false;  // all weights were zero; parameters retained
};

inline McCeState mc_ce_iterate(const McCeState& state,
                               const std::function<double(const Vector&)>& objective,
                               int n_samples, const Shaping& sh, double epsilon,
                               Rng& rng) {
    if (n_samples < 1) throw std::invalid_argument("mc_ce_iterate: N must be >= 1");
    const int m = state.theta.dim();
    GaussSampler sampler(state.theta);

    std::vector<Vector> xs(n_samples);
    std::vector<double> hs(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        xs[i] = sampler.sample(rng);
        hs[i] = objective(xs[i]);
    }

    const double gamma_bar = order_statistic_quantile(hs, sh.rho);
    McCeState next = state;
    next.gamma_star =
        (gamma_bar >= state.gamma_star + epsilon) ? gamma_bar : state.gamma_star;

    // shared max-subtraction keeps the exp weights in [0,1]
    double log_off = -std::numeric_limits<double>::infinity();
    for (double h : hs) log_off = std::max(log_off, sh.r * h);

    double wsum = 0.0;
    Vector mu_num = Vector::Zero(m);
    for (int i = 0; i < n_samples; ++i) {
        const double w = g0(hs[i], next.gamma_star, sh, log_off);
        wsum += w;
        mu_num += w * xs[i];
    }
    if (wsum <= 0.0) {
        next.degenerate_last = true;
        return next;
    }
    next.degenerate_last = false;
    const Vector mu_new = mu_num / wsum;

    Matrix sig_num = Matrix::Zero(m, m);
    for (int i = 0; i < n_samples; ++i) {
        const double w = g0(hs[i], next.gamma_star, sh, log_off);
        if (w > 0.0) {
            const Vector d = xs[i] - mu_new;
            sig_num += w * (d * d.transpose());
        }
    }
    next.theta.mu = mu_new;
    next.theta.sigma = sig_num / wsum + 1e-9 * Matrix::Identity(m, m);
    return next;
}

}  // namespace scem
