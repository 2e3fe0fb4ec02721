#include "ctab/core.hpp"

#include <cfloat>
#include <numeric>
#include <sstream>

namespace ctab {

ProblemInstance validate_problem(const std::vector<long long>& row_margins,
                                 const std::vector<long long>& col_margins,
                                 const Matrix& weights) {
    if (row_margins.empty() || col_margins.empty())
        throw validation_error("margins must be non-empty");
    for (long long r : row_margins)
        if (r < 1) throw validation_error("row margins must be positive integers");
    for (long long c : col_margins)
        if (c < 1) throw validation_error("column margins must be positive integers");

    long long row_sum = std::accumulate(row_margins.begin(), row_margins.end(), 0LL);
    long long col_sum = std::accumulate(col_margins.begin(), col_margins.end(), 0LL);
    if (row_sum != col_sum) {
        std::ostringstream msg;
        msg << "margin sums differ: rows " << row_sum << " != cols " << col_sum;
        throw validation_error(msg.str());
    }

    int m = static_cast<int>(row_margins.size());
    int n = static_cast<int>(col_margins.size());

    ProblemInstance p;
    p.row_margins = row_margins;
    p.col_margins = col_margins;
    p.total = row_sum;

    if (weights.data.empty()) {
        p.weights = Matrix(m, n, 1.0);
    } else {
        if (weights.rows != m || weights.cols != n)
            throw validation_error("weight matrix dimensions do not match margins");
        for (double w : weights.data) {
            if (!(w >= 0.0)) throw validation_error("weights must be non-negative");
        }
        p.weights = weights;
    }
    for (double w : p.weights.data)
        if (w == 0.0) p.has_zero_weight = true;
    return p;
}

Matrix sample_gamma(int m, int n, RandomSource& rng) {
    if (m < 1 || n < 1) throw validation_error("gamma dimensions must be >= 1");
    Matrix g(m, n);
    for (double& v : g.data) v = rng.exponential();
    return g;
}

BlockSquareMatrix assemble_block_matrix(const ProblemInstance& problem, const Matrix& gamma) {
    if (gamma.rows != problem.m() || gamma.cols != problem.n())
        throw validation_error("gamma dimensions do not match problem");

    int N = static_cast<int>(problem.total);
    BlockSquareMatrix a;
    a.entries = Matrix(N, N);
    a.row_block.reserve(N);
    a.col_block.reserve(N);
    for (int i = 0; i < problem.m(); ++i)
        for (long long k = 0; k < problem.row_margins[i]; ++k) a.row_block.push_back(i);
    for (int j = 0; j < problem.n(); ++j)
        for (long long k = 0; k < problem.col_margins[j]; ++k) a.col_block.push_back(j);

    for (int p = 0; p < N; ++p) {
        int i = a.row_block[p];
        for (int q = 0; q < N; ++q) {
            int j = a.col_block[q];
            a.entries(p, q) = problem.weights(i, j) * gamma(i, j);
        }
    }
    return a;
}

double default_epsilon(const ProblemInstance& problem) {
    double smallest_positive = std::numeric_limits<double>::infinity();
    for (double w : problem.weights.data)
        if (w > 0.0 && w < smallest_positive) smallest_positive = w;
    if (!std::isfinite(smallest_positive)) smallest_positive = 1.0;  // all-zero weights
    return std::max(DBL_MIN, 1e-8 * smallest_positive);
}

Matrix effective_weights(const ProblemInstance& problem, double eps) {
    if (!problem.has_zero_weight) return problem.weights;
    if (eps <= 0.0) eps = default_epsilon(problem);
    Matrix w = problem.weights;
    for (double& v : w.data)
        if (v == 0.0) v = eps;
    return w;
}

}  // namespace ctab
