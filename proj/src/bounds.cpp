#include "ctab/bounds.hpp"

namespace ctab {

namespace {

// log of prod t! / t^t over a margin vector
double log_factorial_product(const std::vector<long long>& margins) {
    double s = 0.0;
    for (long long t : margins) {
        if (t < 1) throw validation_error("margins must be positive");
        s += log_factorial(t) - static_cast<double>(t) * std::log(static_cast<double>(t));
    }
    return s;
}

}  // namespace

ApproximationFactor alpha_factor(const std::vector<long long>& row_margins,
                                 const std::vector<long long>& col_margins) {
    long long n_rows = 0, n_cols = 0;
    for (long long r : row_margins) n_rows += r;
    for (long long c : col_margins) n_cols += c;
    if (n_rows != n_cols) throw validation_error("margin sums differ");
    long long N = n_rows;

    double log_rows = log_factorial_product(row_margins);
    double log_cols = log_factorial_product(col_margins);
    double log_lead = static_cast<double>(N) * std::log(static_cast<double>(N)) - log_factorial(N);

    ApproximationFactor a;
    a.row_product = std::exp(log_rows);
    a.col_product = std::exp(log_cols);
    a.chosen_side = log_rows <= log_cols ? ApproximationFactor::Side::rows
                                         : ApproximationFactor::Side::cols;
    a.log_alpha = log_lead + std::min(log_rows, log_cols);
    a.alpha = std::exp(a.log_alpha);
    return a;
}

double log_vdw_lower_bound(long long N) {
    if (N < 1) throw validation_error("N must be >= 1");
    return log_factorial(N) - static_cast<double>(N) * std::log(static_cast<double>(N));
}

double vdw_lower_bound(long long N) { return std::exp(log_vdw_lower_bound(N)); }

double log_bregman_extension_bound(const std::vector<long long>& t) {
    double s = 0.0;
    for (long long ti : t) {
        if (ti < 1) throw validation_error("t_i must be positive integers");
        s += log_factorial(ti) / static_cast<double>(ti) - std::log(static_cast<double>(ti));
    }
    return s;
}

double bregman_extension_bound(const std::vector<long long>& t) {
    return std::exp(log_bregman_extension_bound(t));
}

double log_soules_bound(const std::vector<double>& t) {
    double s = 0.0;
    for (double ti : t) {
        if (!(ti > 0.0)) throw validation_error("t_i must be positive");
        s += std::lgamma(ti + 1.0) / ti - std::log(ti);
    }
    return s;
}

double soules_bound(const std::vector<double>& t) { return std::exp(log_soules_bound(t)); }

MarginBounds theorem_margin_bounds(const ProblemInstance& problem) {
    MarginBounds b;
    b.per_lower = vdw_lower_bound(problem.total);

    // Block row R_i contributes r_i factors with t = r_i, which telescopes
    // to r_i! / r_i^{r_i} per block.
    std::vector<long long> row_t, col_t;
    for (long long r : problem.row_margins) row_t.insert(row_t.end(), r, r);
    for (long long c : problem.col_margins) col_t.insert(col_t.end(), c, c);
    b.per_upper_rows = bregman_extension_bound(row_t);
    b.per_upper_cols = bregman_extension_bound(col_t);
    return b;
}

}  // namespace ctab
