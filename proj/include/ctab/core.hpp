#ifndef CTAB_CORE_HPP_
#define CTAB_CORE_HPP_

#include <vector>

#include "ctab/common.hpp"

namespace ctab {

// A weighted margin problem: row margins r_i, column margins c_j with a
// common total N, and a non-negative m x n weight matrix.
struct ProblemInstance {
    std::vector<long long> row_margins;
    std::vector<long long> col_margins;
    Matrix weights;
    long long total = 0;
    bool has_zero_weight = false;

    int m() const { return static_cast<int>(row_margins.size()); }
    int n() const { return static_cast<int>(col_margins.size()); }
};

// N x N matrix built from an m x n problem: the block of rows R_i and
// columns C_j holds a single constant value. row_block[p] / col_block[q]
// give the block index of row p / column q.
struct BlockSquareMatrix {
    Matrix entries;
    std::vector<int> row_block;
    std::vector<int> col_block;
};

// Non-negative integer table with prescribed margins.
struct ContingencyTable {
    int m = 0;
    int n = 0;
    std::vector<long long> d;

    long long operator()(int i, int j) const { return d[static_cast<std::size_t>(i) * n + j]; }
};

// Validates raw margins and weights. An empty weight matrix means all ones.
ProblemInstance validate_problem(const std::vector<long long>& row_margins,
                                 const std::vector<long long>& col_margins,
                                 const Matrix& weights = Matrix());

// m x n matrix of independent standard exponential draws.
Matrix sample_gamma(int m, int n, RandomSource& rng);

// The block matrix A(gamma): block R_i x C_j filled with w_ij * gamma_ij.
BlockSquareMatrix assemble_block_matrix(const ProblemInstance& problem, const Matrix& gamma);

// Default substitution value for zero weights: 1e-8 times the smallest
// positive weight (floored at the smallest normal double).
double default_epsilon(const ProblemInstance& problem);

// Copy of the weights with every zero entry replaced by eps. eps <= 0
// selects default_epsilon. Strictly positive weights are returned unchanged.
Matrix effective_weights(const ProblemInstance& problem, double eps = -1.0);

}  // namespace ctab

#endif  // CTAB_CORE_HPP_
