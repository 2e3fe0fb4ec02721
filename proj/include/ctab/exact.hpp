#ifndef CTAB_EXACT_HPP_
#define CTAB_EXACT_HPP_

#include <functional>
#include <vector>

#include "ctab/core.hpp"

namespace ctab {

// Exact weighted total T(R,C;W) with a log-domain companion and the number
// of tables visited.
struct ExactTotal {
    double value = 0.0;
    double log_value = 0.0;
    long long table_count = 0;
};

struct EnumerationBudget {
    long long max_nodes = 10'000'000;  // partial assignments visited
};

// Visits every contingency table with the given margins exactly once.
// support, when non-empty (m*n row-major bools), forces d_ij = 0 wherever
// support is false. Returns the number of tables visited.
long long enumerate_tables(const std::vector<long long>& row_margins,
                           const std::vector<long long>& col_margins,
                           const std::function<void(const ContingencyTable&)>& visit,
                           const EnumerationBudget& budget = EnumerationBudget(),
                           const std::vector<bool>& support = {});

// Collects all tables into a vector (small instances only).
std::vector<ContingencyTable> list_tables(const std::vector<long long>& row_margins,
                                          const std::vector<long long>& col_margins,
                                          const EnumerationBudget& budget = EnumerationBudget());

// T(R,C;W) = sum over tables of prod w_ij^{d_ij}, with 0^0 = 1. Cells with
// zero weight are enumerated as forced zeros rather than filtered afterwards.
ExactTotal weighted_total_exact(const ProblemInstance& problem,
                                const EnumerationBudget& budget = EnumerationBudget());

// Exact permanent by Ryser inclusion-exclusion with Gray-code subset order,
// O(2^N * N). Hard cap N <= 64.
double permanent_ryser(const Matrix& a);

// Fisher-Yates weighted total: sum over tables of prod w_ij^{d_ij} / d_ij!.
// Computed by direct enumeration and, when N is within the Ryser cap, as
// per(A_det) / (prod r_i! prod c_j!) with A_det the deterministic block
// matrix (gamma = 1). value carries the enumeration result when available.
struct FisherYatesTotal {
    double value = 0.0;
    double by_enumeration = 0.0;
    double by_permanent = 0.0;
    bool enumeration_ran = false;
    bool permanent_ran = false;
};

FisherYatesTotal fisher_yates_total(const ProblemInstance& problem,
                                    const EnumerationBudget& budget = EnumerationBudget());

}  // namespace ctab

#endif  // CTAB_EXACT_HPP_
