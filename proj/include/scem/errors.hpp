#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "scem/mrp.hpp"

namespace scem {

/// nu-weighted projection onto the column space of Phi.
struct ProjectionContext {
    Matrix d_nu;   // diag(nu)
    Matrix pi_nu;  // Phi (Phi^T D Phi)^{-1} Phi^T D
    Matrix gram;   // Phi^T D Phi
};

inline ProjectionContext projection(const Matrix& phi, const Vector& nu) {
    ProjectionContext ctx;
    ctx.d_nu = nu.asDiagonal();
    ctx.gram = phi.transpose() * ctx.d_nu * phi;
    Eigen::FullPivLU<Matrix> lu(ctx.gram);
    if (!lu.isInvertible())
        throw std::runtime_error("projection: singular Gram matrix Phi^T D Phi");
    ctx.pi_nu = phi * lu.inverse() * phi.transpose() * ctx.d_nu;
    return ctx;
}

inline double weighted_sq_norm(const Vector& v, const Vector& nu) {
    return (v.array().square() * nu.array()).sum();
}

/// ||Phi z - Pi T Phi z||^2_nu, evaluated from the definition.
inline double mspbe(const FiniteMrp& m, const Matrix& phi, const Vector& z) {
    const ProjectionContext ctx = projection(phi, m.nu);
    const Vector vz = phi * z;
    const Vector tvz = m.expected_reward() + m.gamma * (m.P * vz);
    const Vector diff = vz - ctx.pi_nu * tvz;
    return weighted_sq_norm(diff, m.nu);
}

/// Same quantity from the decoupled statistics:
/// (w0 + w1 z)^T w2 (w0 + w1 z).
inline double mspbe_omega_form(const OmegaTriple& w, const Vector& z) {
    const Vector v = w.w0 + w.w1 * z;
    return v.dot(w.w2 * v);
}

/// Gradient of the omega form, 2 w1^T w2 (w0 + w1 z).
inline Vector mspbe_gradient(const OmegaTriple& w, const Vector& z) {
    return 2.0 * w.w1.transpose() * (w.w2 * (w.w0 + w.w1 * z));
}

/// E_nu[(E[delta | s])^2] = ||T Phi z - Phi z||^2_nu.
inline double msbr(const FiniteMrp& m, const Matrix& phi, const Vector& z) {
    const Vector vz = phi * z;
    const Vector resid = m.expected_reward() + m.gamma * (m.P * vz) - vz;
    return weighted_sq_norm(resid, m.nu);
}

/// ||V - Phi z||^2_nu against the exact value function.
inline double mse(const FiniteMrp& m, const Matrix& phi, const Vector& z) {
    const Vector v = exact_value_function(m);
    return weighted_sq_norm(v - phi * z, m.nu);
}

/// C(nu) = max_{s,s'} P(s,s')/nu(s) and the MSBR-to-MSE factor
/// sqrt(C)/(1-gamma).
inline std::pair<double, double> error_bound_constants(const FiniteMrp& m) {
    if (m.nu.minCoeff() <= 0.0)
        throw std::invalid_argument("error_bound_constants: nu has a zero entry");
    double c = 0.0;
    for (int s = 0; s < m.n; ++s)
        c = std::max(c, m.P.row(s).maxCoeff() / m.nu[s]);
    return {c, std::sqrt(c) / (1.0 - m.gamma)};
}

}  // namespace scem
