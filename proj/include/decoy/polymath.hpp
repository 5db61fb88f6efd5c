#pragma once

// Closed-form numerics behind the decoy-state inversion.
//
// The photon-number problem Q_i e^{mu_i} = sum_m Y_m mu_i^m / m! is truncated
// to a k x k system with matrix M_{i,j} = mu_i^{j-1} / (j-1)!. Its inverse has
// an explicit form in terms of elementary symmetric polynomials, which is what
// makes the low rows (m = 0, 1) stable even though M itself is badly
// conditioned.
//
// Indexing: intensities are passed in the caller's order (normally strictly
// decreasing) and `i` is a 0-based position in that list. `m` is the photon
// number, so row m of M^{-1} recovers Y_m.

#include <span>
#include <vector>

namespace decoy {

/// Shannon entropy of a Bernoulli(x) variable, in bits.
double binary_entropy(double x);

/// e_d(values): sum over all size-d subsets of the product of their elements.
/// Built with the add-one-variable recurrence, so non-negative inputs never
/// produce cancellation.
double elementary_symmetric(std::span<const double> values, int degree);

/// h_d(values): sum of all degree-d monomials.
double complete_homogeneous(std::span<const double> values, int degree);

/// n! for n <= 20, exp(lgamma(n + 1)) beyond.
double factorial(int n);
double log_factorial(int n);

/// e_{k-m-1} of the intensities with position i removed.
double s_im(std::span<const double> intensities, std::size_t i, int m);

/// (M^{-1})_{m,i} = (-1)^{k-m-1} S_im m! / prod_{t != i}(mu_i - mu_t).
/// Throws ErrorKind::Degenerate when two intensities coincide.
double m_inverse_entry(std::span<const double> intensities, int m, std::size_t i);

/// Whole row m of M^{-1}.
std::vector<double> m_inverse_row(std::span<const double> intensities, int m);

/// Truncation coefficient C_{m,j} = -sum_i (M^{-1})_{m,i} mu_i^j / j!, the
/// weight of the unknown Y_j (j >= k) in the inverted estimate of Y_m.
double c_coefficient(std::span<const double> intensities, int m, int j);

/// C_{0,j} through its symmetric-function form
/// (-1)^k / j! * prod(mu) * h_{j-k}(mu). Independent of m_inverse_entry.
double c1_closed_form(std::span<const double> intensities, int j);

/// mu^m e^{-mu} / m!, evaluated in log space once m! would overflow.
double poisson_weight(double mu, int m);

/// sum_{j >= n} mu^j / j!, the Poisson mass (times e^mu) beyond photon number n-1.
double exp_tail(double mu, int n);

}  // namespace decoy
