#include "ctab/exact.hpp"

#include <bit>

namespace ctab {

namespace {

// Streaming log-sum-exp for totals spanning many orders of magnitude.
class LogSumExpStream {
public:
    void add(double log_x) {
        if (!std::isfinite(log_x)) return;  // log(0) terms contribute nothing
        if (log_x <= max_) {
            sum_ += std::exp(log_x - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - log_x) + 1.0;
            max_ = log_x;
        }
    }
    double value() const {
        if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
        return max_ + std::log(sum_);
    }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

struct Enumerator {
    int m, n;
    const std::vector<long long>& rows;
    std::vector<long long> col_rem;
    const std::vector<bool>* support;  // nullptr means all cells allowed
    const std::function<void(const ContingencyTable&)>& visit;
    long long max_nodes;
    long long nodes = 0;
    long long count = 0;
    ContingencyTable table;

    bool allowed(int i, int j) const {
        return support == nullptr || (*support)[static_cast<std::size_t>(i) * n + j];
    }

    void cell(int i, int j, long long row_rem) {
        if (++nodes > max_nodes)
            throw precondition_error("table enumeration budget exceeded");

        if (j == n) {
            // row_rem == 0 is guaranteed by the bounds below
            if (i + 1 == m) {
                ++count;
                visit(table);
            } else {
                cell(i + 1, 0, rows[i + 1]);
            }
            return;
        }

        // Remaining columns of this row can absorb at most cap_after units.
        long long cap_after = 0;
        for (int k = j + 1; k < n; ++k)
            if (allowed(i, k)) cap_after += col_rem[k];

        long long lo = std::max(0LL, row_rem - cap_after);
        long long hi = allowed(i, j) ? std::min(row_rem, col_rem[j]) : 0;
        std::size_t idx = static_cast<std::size_t>(i) * n + j;
        for (long long d = lo; d <= hi; ++d) {
            table.d[idx] = d;
            col_rem[j] -= d;
            cell(i, j + 1, row_rem - d);
            col_rem[j] += d;
        }
        table.d[idx] = 0;
    }
};

constexpr int kRyserCap = 64;

}  // namespace

long long enumerate_tables(const std::vector<long long>& row_margins,
                           const std::vector<long long>& col_margins,
                           const std::function<void(const ContingencyTable&)>& visit,
                           const EnumerationBudget& budget,
                           const std::vector<bool>& support) {
    ProblemInstance p = validate_problem(row_margins, col_margins);  // reuse margin checks
    if (!support.empty() &&
        support.size() != static_cast<std::size_t>(p.m()) * p.n())
        throw validation_error("support mask dimensions do not match margins");

    Enumerator e{p.m(),
                 p.n(),
                 row_margins,
                 col_margins,
                 support.empty() ? nullptr : &support,
                 visit,
                 budget.max_nodes};
    e.table.m = p.m();
    e.table.n = p.n();
    e.table.d.assign(static_cast<std::size_t>(p.m()) * p.n(), 0);
    e.cell(0, 0, row_margins[0]);
    return e.count;
}

std::vector<ContingencyTable> list_tables(const std::vector<long long>& row_margins,
                                          const std::vector<long long>& col_margins,
                                          const EnumerationBudget& budget) {
    std::vector<ContingencyTable> out;
    enumerate_tables(row_margins, col_margins,
                     [&out](const ContingencyTable& t) { out.push_back(t); }, budget);
    return out;
}

ExactTotal weighted_total_exact(const ProblemInstance& problem, const EnumerationBudget& budget) {
    int m = problem.m(), n = problem.n();

    // Zero-weight cells contribute only through d_ij = 0 (0^0 = 1), so they
    // are excluded from the enumeration support up front.
    std::vector<bool> support;
    if (problem.has_zero_weight) {
        support.resize(static_cast<std::size_t>(m) * n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                support[static_cast<std::size_t>(i) * n + j] = problem.weights(i, j) > 0.0;
    }

    Matrix log_w(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            log_w(i, j) = problem.weights(i, j) > 0.0 ? std::log(problem.weights(i, j)) : 0.0;

    KahanSum linear;
    LogSumExpStream logsum;
    ExactTotal total;
    total.table_count = enumerate_tables(
        problem.row_margins, problem.col_margins,
        [&](const ContingencyTable& t) {
            double lw = 0.0;
            double w = 1.0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j)
                    if (t(i, j) > 0) {
                        lw += static_cast<double>(t(i, j)) * log_w(i, j);
                        w *= std::pow(problem.weights(i, j), static_cast<double>(t(i, j)));
                    }
            linear.add(w);
            logsum.add(lw);
        },
        budget, support);
    total.value = linear.value();
    total.log_value = logsum.value();
    return total;
}

double permanent_ryser(const Matrix& a) {
    if (a.rows != a.cols) throw validation_error("permanent requires a square matrix");
    int n = a.rows;
    if (n > kRyserCap) throw precondition_error("Ryser permanent cap N <= 64 exceeded");
    if (n == 0) return 1.0;

    std::vector<double> row_sums(n, 0.0);
    double total = 0.0;
    std::uint64_t num_subsets = (n >= 64) ? 0 : (1ULL << n);  // n == 64 would not terminate anyway
    for (std::uint64_t k = 1; k < num_subsets; ++k) {
        int j = std::countr_zero(k);
        bool added = (k ^ (k >> 1)) & (1ULL << j);  // Gray code bit toggled on or off
        for (int i = 0; i < n; ++i)
            row_sums[i] += added ? a(i, j) : -a(i, j);

        int popcount = std::popcount(k ^ (k >> 1));
        double prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= row_sums[i];
        total += ((n - popcount) % 2 == 0) ? prod : -prod;
    }
    return total;
}

FisherYatesTotal fisher_yates_total(const ProblemInstance& problem, const EnumerationBudget& budget) {
    FisherYatesTotal out;
    int m = problem.m(), n = problem.n();

    std::vector<bool> support;
    if (problem.has_zero_weight) {
        support.resize(static_cast<std::size_t>(m) * n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                support[static_cast<std::size_t>(i) * n + j] = problem.weights(i, j) > 0.0;
    }

    try {
        KahanSum sum;
        enumerate_tables(
            problem.row_margins, problem.col_margins,
            [&](const ContingencyTable& t) {
                double lw = 0.0;
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                        if (t(i, j) > 0)
                            lw += static_cast<double>(t(i, j)) * std::log(problem.weights(i, j)) -
                                  log_factorial(t(i, j));
                sum.add(std::exp(lw));
            },
            budget, support);
        out.by_enumeration = sum.value();
        out.enumeration_ran = true;
    } catch (const precondition_error&) {
        // fall through to the permanent route
    }

    if (problem.total <= 20) {
        Matrix ones(m, n, 1.0);
        BlockSquareMatrix a_det = assemble_block_matrix(problem, ones);
        double log_fact = 0.0;
        for (long long r : problem.row_margins) log_fact += log_factorial(r);
        for (long long c : problem.col_margins) log_fact += log_factorial(c);
        out.by_permanent = permanent_ryser(a_det.entries) * std::exp(-log_fact);
        out.permanent_ran = true;
    }

    if (!out.enumeration_ran && !out.permanent_ran)
        throw precondition_error("Fisher-Yates total: both computation routes infeasible");
    out.value = out.enumeration_ran ? out.by_enumeration : out.by_permanent;
    return out;
}

}  // namespace ctab
