#pragma once

#include "scem/mrp.hpp"
#include "scem/rng.hpp"

namespace scem::testutil {

/// Random ergodic MRP with dense strictly-positive rows. Deterministic per
/// seed; used as the generator behind the property-style checks.
inline FiniteMrp random_mrp(int n, std::uint64_t seed, double gamma,
                            bool nu_uniform = false) {
    Rng rng(seed);
    Matrix p(n, n), reward(n, n);
    for (int s = 0; s < n; ++s) {
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            p(s, j) = 0.05 + rng.uniform();
            total += p(s, j);
        }
        p.row(s) /= total;
        // renormalize exactly so the row-sum invariant holds bit-tight
        p(s, n - 1) = 1.0 - (p.row(s).sum() - p(s, n - 1));
        for (int j = 0; j < n; ++j) reward(s, j) = 2.0 * rng.uniform() - 1.0;
    }
    Vector nu(n);
    if (nu_uniform) {
        nu.setConstant(1.0 / n);
    } else {
        double total = 0.0;
        for (int s = 0; s < n; ++s) {
            nu[s] = 0.1 + rng.uniform();
            total += nu[s];
        }
        nu /= total;
        nu[n - 1] = 1.0 - (nu.sum() - nu[n - 1]);
    }
    return FiniteMrp(std::move(p), std::move(reward), gamma, std::move(nu));
}

/// Random full-column-rank feature matrix with a leading constant feature.
inline Matrix random_features(int n, int k, std::uint64_t seed) {
    Rng rng(seed);
    Matrix phi(n, k);
    for (int s = 0; s < n; ++s) {
        phi(s, 0) = 1.0;
        for (int j = 1; j < k; ++j) phi(s, j) = rng.normal();
    }
    return phi;
}

}  // namespace scem::testutil
