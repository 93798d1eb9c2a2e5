#pragma once

#include <utility>
#include <vector>

#include "tubal/sensing.hpp"
#include "tubal/tensor.hpp"

namespace tubal {

// Orthonormal column space of X_star and its complement, from the T-eigenvalue
// decomposition. The basis is deterministic for a given X_star: eigenvalues
// descending per spectral slice, eigenvector phases normalized.
struct SubspaceBasis {
    Tensor3 u;       // n x r_star x n3
    Tensor3 v;       // n x (n - r_star) x n3
    Tensor3 d_star;  // r_star x r_star x n3, f-diagonal
    int r_star = 0;
};

SubspaceBasis subspace_basis(const Tensor3& x_star, int r_star, double tol = 1e-8);

// S = U^* * F, T = V^* * F.
std::pair<Tensor3, Tensor3> subspace_split(const Tensor3& f, const SubspaceBasis& b);

// Spectral norms of the residual blocks, their max E_t, and the deterministic
// two-sided bound E_t <= |FF^* - X_star| <= 4 E_t checked at runtime.
struct ErrorTerms {
    double d_ss = 0.0;       // |D_star - S S^*|
    double st = 0.0;         // |S T^*|
    double tt = 0.0;         // |T T^*|
    double e_t = 0.0;        // max of the three
    double delta_norm = 0.0; // |F F^* - X_star|
};

ErrorTerms error_terms(const Tensor3& f, const SubspaceBasis& b, const Tensor3& x_star);

// One population gradient step expressed in the split coordinates.
std::pair<Tensor3, Tensor3> tilde_update(const Tensor3& s, const Tensor3& t,
                                         const SubspaceBasis& b, double eta);

// G_t = M*(M(FF^* - X_star) - s) - (FF^* - X_star), the deviation of the
// sampled gradient from the population gradient.
Tensor3 sample_deviation(const Tensor3& f, const ProblemInstance& p);

// Tail fit of an error curve: log-linear decay vs C/(t+t0), chosen by
// log-space r^2 over the tail half of the usable points.
struct RateFit {
    enum class Kind { linear, sublinear };
    Kind kind = Kind::linear;
    double slope = 0.0;  // d(log e)/dt for the linear model
    double c = 0.0;      // scale of the sublinear model
    double t0 = 0.0;
    double r2 = 0.0;
};

RateFit rate_fit(const std::vector<double>& errors);

}  // namespace tubal
