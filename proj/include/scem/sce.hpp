#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "scem/ce.hpp"
#include "scem/mrp.hpp"

namespace scem {

/// One step-size family a(t) = scale * t^{-exponent} (exponent 0 = constant).
struct StepSeq {
    double scale = 1.0;
    double exponent = 0.0;

    double operator()(long t) const {
        return exponent == 0.0 ? scale
                               : scale * std::pow(static_cast<double>(t), -exponent);
    }

    /// Robbins-Monro conditions hold for t^{-a} with a in (1/2, 1].
    bool satisfies_theory() const { return exponent > 0.5 && exponent <= 1.0; }
};

/// All tunables of the online stepper. The experiment tables pin alpha, beta,
/// c and epsilon1; lambda, rho, r, the initial covariance scale q and the
/// warm-up length are preset choices.
struct Schedule {
    StepSeq alpha;   // slow timescale: omega and theta
    StepSeq beta;    // fast timescale: gamma, xi, gamma_p
    StepSeq c_seq;   // threshold-comparison smoothing, refreshed at updates
    double epsilon1 = 0.9;
    double lambda = 0.15;
    double rho = 0.1;
    double r = 1.0;
    long warmup_steps = 0;  // omega-only steps before the search recursions engage

    void validate() const {
        if (epsilon1 <= 0.0 || epsilon1 >= 1.0)
            throw std::invalid_argument("Schedule: epsilon1 in (0,1)");
        if (lambda <= 0.0 || lambda >= 1.0)
            throw std::invalid_argument("Schedule: lambda in (0,1)");
        if (rho <= 0.0 || rho >= 1.0)
            throw std::invalid_argument("Schedule: rho in (0,1)");
        if (rho >= lambda)
            throw std::invalid_argument("Schedule: rho must be smaller than lambda");
        if (r <= 0.0) throw std::invalid_argument("Schedule: r must be positive");
        if (warmup_steps < 0) throw std::invalid_argument("Schedule: warmup_steps >= 0");
    }

    Shaping shaping() const { return Shaping{r, rho}; }
};

/// Transition already mapped into feature space.
struct FeatTransition {
    Vector phi;
    double reward = 0.0;
    Vector phi_next;
};

/// omega <- omega + alpha * Delta(omega) with the per-component increments
/// r phi - w0, phi(gamma phi' - phi)^T - w1, I - phi phi^T w2.
inline void update_omega(OmegaTriple& w, const FeatTransition& tr, double alpha,
                         double gamma_discount) {
    w.w0 += alpha * (tr.reward * tr.phi - w.w0);
    w.w1 += alpha * (tr.phi * (gamma_discount * tr.phi_next - tr.phi).transpose() - w.w1);
    w.w2 += alpha * (Matrix::Identity(w.w2.rows(), w.w2.cols()) -
                     tr.phi * (tr.phi.transpose() * w.w2));
}

/// Tracked objective -(w0 + w1 z)^T w2 (w0 + w1 z); equals -MSPBE(z) at the
/// exact statistics.
inline double jbar(const OmegaTriple& w, const Vector& z) {
    const Vector v = w.w0 + w.w1 * z;
    return -v.dot(w.w2 * v);
}

/// One subgradient step on the quantile loss: at jval = gamma both
/// indicators fire and the increment is 2 rho - 1.
inline double update_gamma(double gamma, double jval, double beta, double rho) {
    double delta = 0.0;
    if (jval >= gamma) delta -= (1.0 - rho);
    if (jval <= gamma) delta += rho;
    return gamma - beta * delta;
}

/// xi tracking of the elite mean/scatter; xi1's increment uses the
/// pre-update xi0.
inline void update_xi(Vector& xi0, Matrix& xi1, const Vector& z, double jval,
                      double gamma, double beta, const Shaping& sh,
                      double log_offset) {
    const double w = g0(jval, gamma, sh, log_offset);
    const Vector xi0_prev = xi0;
    xi0 += beta * (w * z - xi0 * w);
    const Vector d = z - xi0_prev;
    xi1 += beta * (w * (d * d.transpose()) - xi1 * w);
}

/// T <- T + c(sign - T) where sign is +-1 from the threshold comparison.
inline double update_T(double T, double gamma, double gamma_p, double c) {
    const double ind = (gamma > gamma_p) ? 1.0 : -1.0;
    return T + c * (ind - T);
}

struct SceDiagnostics {
    long t = 0;
    double gamma = 0.0;
    double gamma_p = 0.0;
    double T = 0.0;
    double sigma_fro = 0.0;
    long theta_updates = 0;
};

/// The online multi-timescale stepper. Owns its state; one instance per run.
class SceStepper {
public:
    SceStepper(int k, const Schedule& sched, const GaussParam& theta0,
               double gamma_discount)
        : k_(k),
          sched_(sched),
          gamma_discount_(gamma_discount),
          omega_(OmegaTriple::zero(k)),
          xi0_(Vector::Zero(k)),
          xi1_(Matrix::Zero(k, k)),
          theta_(theta0),
          theta0_(theta0),
          base_sampler_(theta0),
          cur_sampler_(theta0) {
        sched_.validate();
        theta0_.validate();
        gamma_p_ = -std::numeric_limits<double>::infinity();
        c_ = sched_.c_seq(1);
        if (sched_.warmup_steps > 0) warm_j_.reserve(sched_.warmup_steps);
    }

    /// Processes one trajectory transition (already in feature space).
    void step(const FeatTransition& tr, Rng& rng) {
        const long t = t_ + 1;
        const double alpha = sched_.alpha(t);
        const double beta = sched_.beta(t);
        const Shaping sh = sched_.shaping();

        const Vector z = sample_mixture(cur_sampler_, rng);
        const double jval = jbar(omega_, z);  // pre-update omega
        double jp = 0.0;
        const bool has_prev = prev_sampler_.has_value();
        if (has_prev) {
            const Vector zp = sample_mixture(*prev_sampler_, rng);
            jp = jbar(omega_, zp);
        }

        update_omega(omega_, tr, alpha, gamma_discount_);

        if (t_ < sched_.warmup_steps) {
            warm_j_.push_back(jval);
            if (t_ + 1 == sched_.warmup_steps) {
                // seed gamma from the second half of the recorded values so
                // the quantile reflects the warmed statistics
                std::vector<double> tail(warm_j_.begin() + warm_j_.size() / 2,
                                         warm_j_.end());
                gamma_ = order_statistic_quantile(std::move(tail), sched_.rho);
                warm_j_.clear();
            }
            t_ = t;
            return;
        }

        if (sh.r * jval > log_max_) log_max_ = sh.r * jval;

        const double gamma_prev = gamma_;
        const Vector xi0_prev = xi0_;
        const Matrix xi1_prev = xi1_;

        gamma_ = update_gamma(gamma_, jval, beta, sched_.rho);
        update_xi(xi0_, xi1_, z, jval, gamma_prev, beta, sh, log_max_);
        if (has_prev) gamma_p_ = update_gamma(gamma_p_, jp, beta, sched_.rho);

        T_ = update_T(T_, gamma_, gamma_p_, c_);
        if (!(T_ > -1.0 && T_ < 1.0))
            throw std::logic_error("SceStepper: T left (-1,1)");

        if (T_ > sched_.epsilon1) {
            ++theta_updates_;
            const double alpha_theta = sched_.alpha(theta_updates_);
            prev_sampler_ = cur_sampler_;
            theta_.mu += alpha_theta * (xi0_prev - theta_.mu);
            theta_.sigma += alpha_theta * (xi1_prev - theta_.sigma);
            repair_covariance();
            cur_sampler_.reset(theta_);
            gamma_p_ = gamma_prev;
            T_ = 0.0;
            c_ = sched_.c_seq(t);
        }
        t_ = t;
    }

    const GaussParam& theta() const { return theta_; }
    const OmegaTriple& omega() const { return omega_; }
    const Vector& xi0() const { return xi0_; }
    const Matrix& xi1() const { return xi1_; }
    double gamma() const { return gamma_; }
    double gamma_p() const { return gamma_p_; }
    double T() const { return T_; }
    long t() const { return t_; }
    long theta_updates() const { return theta_updates_; }

    SceDiagnostics diagnostics() const {
        SceDiagnostics d;
        d.t = t_;
        d.gamma = gamma_;
        d.gamma_p = gamma_p_;
        d.T = T_;
        d.sigma_fro = theta_.sigma.norm();
        d.theta_updates = theta_updates_;
        return d;
    }

private:
    Vector sample_mixture(const GaussSampler& current, Rng& rng) const {
        return (rng.uniform() < sched_.lambda) ? base_sampler_.sample(rng)
                                               : current.sample(rng);
    }

    void repair_covariance() {
        if (!theta_.sigma.allFinite() || !theta_.mu.allFinite())
            throw std::runtime_error(
                "SceStepper: non-finite model parameters at t=" + std::to_string(t_));
        theta_.sigma = ((theta_.sigma + theta_.sigma.transpose()) * 0.5).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> es(theta_.sigma);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("SceStepper: covariance repair failed at t=" +
                                     std::to_string(t_));
        theta_.sigma = es.eigenvectors() *
                       es.eigenvalues().cwiseMax(1e-9).asDiagonal() *
                       es.eigenvectors().transpose();
    }

    int k_;
    Schedule sched_;
    double gamma_discount_;

    long t_ = 0;
    OmegaTriple omega_;
    double gamma_ = 0.0;
    double gamma_p_;
    Vector xi0_;
    Matrix xi1_;
    double T_ = 0.0;
    GaussParam theta_;
    GaussParam theta0_;
    double c_;
    long theta_updates_ = 0;
    double log_max_ = -std::numeric_limits<double>::infinity();

    GaussSampler base_sampler_;
    GaussSampler cur_sampler_;
    std::optional<GaussSampler> prev_sampler_;
    std::vector<double> warm_j_;
};

}  // namespace scem
