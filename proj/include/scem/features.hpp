#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace scem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Feature map phi: state -> R^k. Tabular/quadratic/RBF/Fourier kinds cover
/// the benchmark set; ExplicitMatrix carries a hand-specified Phi (Baird,
/// ring). An optional per-feature scale standardizes columns.
class FeatureMap {
public:
    enum class Kind { Tabular, Quadratic, Rbf, Fourier, ExplicitMatrix };

    static FeatureMap tabular(int n) {
        FeatureMap f(Kind::Tabular, 1, n);
        f.k_ = n;
        return f;
    }

    /// 1, all squares, all distinct cross products s_i s_j (i<j), in
    /// lexicographic order.
    static FeatureMap quadratic(int input_dim) {
        FeatureMap f(Kind::Quadratic, input_dim, 0);
        f.k_ = 1 + input_dim + input_dim * (input_dim - 1) / 2;
        return f;
    }

    /// Gaussian bumps exp(-(s-m_i)^2 / (2 v_i^2)) on the scalar state id.
    static FeatureMap rbf(Vector centers, Vector widths) {
        if (centers.size() != widths.size() || centers.size() == 0)
            throw std::invalid_argument("rbf: centers/widths mismatch");
        if (widths.minCoeff() <= 0.0)
            throw std::invalid_argument("rbf: widths must be positive");
        FeatureMap f(Kind::Rbf, 1, 0);
        f.k_ = static_cast<int>(centers.size());
        f.centers_ = std::move(centers);
        f.widths_ = std::move(widths);
        return f;
    }

    /// Grid of k bumps over state ids 0..n-1: spacing h=n/k, centers at
    /// h/2 + (i-1)h, widths h/2. Reproduces centers 10+20(i-1), widths 10
    /// for n=1000, k=50.
    static FeatureMap rbf_grid(int n, int k) {
        const double h = static_cast<double>(n) / k;
        Vector c(k), w(k);
        for (int i = 0; i < k; ++i) {
            c[i] = h / 2 + h * i;
            w[i] = h / 2;
        }
        return rbf(std::move(c), std::move(w));
    }

    /// phi_1 = 1; odd i>1: cos((i+1) pi s / 2); even i: sin(i pi s / 2).
    /// The scalar state id is normalized to [0,1] before evaluation.
    static FeatureMap fourier(int k, double state_scale) {
        FeatureMap f(Kind::Fourier, 1, 0);
        f.k_ = k;
        f.state_scale_ = state_scale;
        return f;
    }

    static FeatureMap explicit_matrix(Matrix phi) {
        FeatureMap f(Kind::ExplicitMatrix, 1, static_cast<int>(phi.rows()));
        f.k_ = static_cast<int>(phi.cols());
        f.matrix_ = std::move(phi);
        return f;
    }

    int k() const { return k_; }
    int input_dim() const { return input_dim_; }
    Kind kind() const { return kind_; }

    /// Divide each feature by scale[i]; error metrics are invariant to this
    /// reparameterization.
    void set_scales(Vector scales) {
        if (scales.size() != k_) throw std::invalid_argument("set_scales: wrong length");
        if (scales.minCoeff() <= 0.0) throw std::invalid_argument("set_scales: scales must be positive");
        scales_ = std::move(scales);
    }

    Vector evaluate(const Vector& s) const {
        if (s.size() != input_dim_)
            throw std::invalid_argument("FeatureMap::evaluate: state dimension mismatch");
        Vector out(k_);
        switch (kind_) {
            case Kind::Tabular:
            case Kind::ExplicitMatrix: {
                return evaluate_id(static_cast<int>(s[0]));
            }
            case Kind::Quadratic: {
                out[0] = 1.0;
                int idx = 1;
                for (int i = 0; i < input_dim_; ++i) out[idx++] = s[i] * s[i];
                for (int i = 0; i < input_dim_; ++i)
                    for (int j = i + 1; j < input_dim_; ++j) out[idx++] = s[i] * s[j];
                break;
            }
            case Kind::Rbf: {
                for (int i = 0; i < k_; ++i) {
                    const double d = s[0] - centers_[i];
                    out[i] = std::exp(-d * d / (2.0 * widths_[i] * widths_[i]));
                }
                break;
            }
            case Kind::Fourier: {
                const double x = s[0] * state_scale_;
                const double pi = 3.14159265358979323846;
                for (int i = 1; i <= k_; ++i) {
                    if (i == 1)
                        out[i - 1] = 1.0;
                    else if (i % 2 == 1)
                        out[i - 1] = std::cos((i + 1) * pi * x / 2.0);
                    else
                        out[i - 1] = std::sin(i * pi * x / 2.0);
                }
                break;
            }
        }
        if (scales_.size() == k_) out.array() /= scales_.array();
        return out;
    }

    /// Evaluate on an integer state id (finite-state maps).
    Vector evaluate_id(int s) const {
        switch (kind_) {
            case Kind::Tabular: {
                if (s < 0 || s >= n_states_)
                    throw std::invalid_argument("evaluate_id: state out of range");
                Vector out = Vector::Zero(k_);
                out[s] = 1.0;
                return out;
            }
            case Kind::ExplicitMatrix: {
                if (s < 0 || s >= n_states_)
                    throw std::invalid_argument("evaluate_id: state out of range");
                Vector out = matrix_.row(s).transpose();
                if (scales_.size() == k_) out.array() /= scales_.array();
                return out;
            }
            default: {
                Vector v(1);
                v[0] = static_cast<double>(s);
                return evaluate(v);
            }
        }
    }

private:
    FeatureMap(Kind kind, int input_dim, int n_states)
        : kind_(kind), input_dim_(input_dim), n_states_(n_states) {}

    Kind kind_;
    int input_dim_;
    int n_states_;
    int k_ = 0;
    Vector centers_, widths_, scales_;
    double state_scale_ = 1.0;
    Matrix matrix_;
};

/// Feature matrix Phi with row s = phi(s)^T over an ordered state list.
inline Matrix build_matrix(const FeatureMap& map, int n_states) {
    Matrix phi(n_states, map.k());
    for (int s = 0; s < n_states; ++s) phi.row(s) = map.evaluate_id(s).transpose();
    return phi;
}

}  // namespace scem
