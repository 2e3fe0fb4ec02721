#ifndef CTAB_BOUNDS_HPP_
#define CTAB_BOUNDS_HPP_

#include "ctab/core.hpp"

namespace ctab {

// The approximation factor alpha(R,C) = (N^N / N!) * min of the row and
// column factorial products.
struct ApproximationFactor {
    double alpha = 1.0;
    double log_alpha = 0.0;
    double row_product = 1.0;  // prod r_i! / r_i^{r_i}
    double col_product = 1.0;  // prod c_j! / c_j^{c_j}
    enum class Side { rows, cols } chosen_side = Side::rows;
};

ApproximationFactor alpha_factor(const std::vector<long long>& row_margins,
                                 const std::vector<long long>& col_margins);

// Van der Waerden lower bound N!/N^N for the permanent of a doubly
// stochastic matrix.
double vdw_lower_bound(long long N);
double log_vdw_lower_bound(long long N);

// Extended Minc-Bregman bound prod (t_i!)^{1/t_i} / t_i for a row-stochastic
// matrix with b_ij <= 1/t_i, t_i positive integers.
double bregman_extension_bound(const std::vector<long long>& t);
double log_bregman_extension_bound(const std::vector<long long>& t);

// Soules bound prod Gamma^{1/t_i}(t_i + 1) / t_i for real t_i > 0.
double soules_bound(const std::vector<double>& t);
double log_soules_bound(const std::vector<double>& t);

// Bounds on per B for the scaled block matrix of a problem: the van der
// Waerden lower bound and the Bregman products over row and column blocks
// (entries in block row R_i do not exceed 1/r_i, and symmetrically for
// columns).
struct MarginBounds {
    double per_lower = 0.0;
    double per_upper_rows = 0.0;
    double per_upper_cols = 0.0;
};

MarginBounds theorem_margin_bounds(const ProblemInstance& problem);

}  // namespace ctab

#endif  // CTAB_BOUNDS_HPP_
