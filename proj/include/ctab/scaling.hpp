#ifndef CTAB_SCALING_HPP_
#define CTAB_SCALING_HPP_

#include "ctab/core.hpp"

namespace ctab {

struct ScalingOptions {
    double tol = 1e-10;
    long long max_iters = 100000;
};

// Factorization a_ij = b_ij * xi_i * eta_j with B doubly stochastic and the
// gauge prod eta_j = 1, so sigma(A) = prod xi_i.
struct ScalingResult {
    Matrix B;
    std::vector<double> xi;
    std::vector<double> eta;
    double log_sigma = 0.0;
    long long iterations = 0;
    double residual = 0.0;  // max |row/col sum of B - 1|
};

// m x n scaling to row sums r_i and column sums c_j:
// w_ij * gamma_ij = l_ij * mu_i * lambda_j.
struct ReducedScalingResult {
    Matrix L;
    std::vector<double> mu;
    std::vector<double> lambda;
    double log_sigma = 0.0;  // sum r_i ln(mu_i r_i) + sum c_j ln(lambda_j c_j)
    long long iterations = 0;
    double residual = 0.0;
};

// Alternating row/column normalization until the doubly-stochastic residual
// drops below tol, then a one-time gauge fix enforcing prod eta_j = 1.
ScalingResult sinkhorn_scale(const Matrix& a, double tol = 1e-10, long long max_iters = 100000);

// sigma(A) = prod xi_i. Thin wrapper over sinkhorn_scale.
double sigma(const Matrix& a, double tol = 1e-10);
double log_sigma(const Matrix& a, double tol = 1e-10);

// Independent route: ln sigma(A) = min over {sum tau = 0} of
// f_A(t) = sum_i ln(sum_j a_ij e^{tau_j}), by damped Newton on the
// hyperplane. Returns sigma; serves as the module's self-check.
double sigma_via_minimization(const Matrix& a, double tol = 1e-9);
double log_sigma_via_minimization(const Matrix& a, double tol = 1e-9);

// Scales the m x n matrix (w_ij * gamma_ij) to the problem's margins and
// evaluates ln sigma of the full N x N block matrix in closed form.
ReducedScalingResult reduced_scale(const ProblemInstance& problem, const Matrix& gamma,
                                   double tol = 1e-10, long long max_iters = 100000);

// Same reduction applied to an explicit positive m x n matrix.
ReducedScalingResult reduced_scale_matrix(const Matrix& wg,
                                          const std::vector<long long>& row_margins,
                                          const std::vector<long long>& col_margins,
                                          double tol = 1e-10, long long max_iters = 100000);

}  // namespace ctab

#endif  // CTAB_SCALING_HPP_
