#include "ctab/scaling.hpp"

#include <sstream>

namespace ctab {

namespace {

void require_positive(const Matrix& a) {
    for (double v : a.data)
        if (!(v > 0.0) || !std::isfinite(v))
            throw validation_error("matrix entries must be strictly positive and finite");
}

double max_entry(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, v);
    return m;
}

// Dense solve by Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<std::vector<double>> h, std::vector<double> rhs) {
    int n = static_cast<int>(rhs.size());
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(h[i][k]) > std::fabs(h[piv][k])) piv = i;
        std::swap(h[k], h[piv]);
        std::swap(rhs[k], rhs[piv]);
        if (h[k][k] == 0.0) throw numerical_error("singular Newton system in sigma minimization");
        for (int i = k + 1; i < n; ++i) {
            double f = h[i][k] / h[k][k];
            if (f == 0.0) continue;
            for (int j = k; j < n; ++j) h[i][j] -= f * h[k][j];
            rhs[i] -= f * rhs[k];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = rhs[i];
        for (int j = i + 1; j < n; ++j) s -= h[i][j] * x[j];
        x[i] = s / h[i][i];
    }
    return x;
}

}  // namespace

ScalingResult sinkhorn_scale(const Matrix& a, double tol, long long max_iters) {
    if (a.rows != a.cols) throw validation_error("scaling requires a square matrix");
    require_positive(a);
    if (tol <= 0.0) throw validation_error("tolerance must be positive");
    int n = a.rows;

    // Work on a / amax; sigma is homogeneous of degree N, so amax is
    // reattached to xi at the end.
    double amax = max_entry(a);
    Matrix s = a;
    for (double& v : s.data) v /= amax;

    std::vector<double> xi(n, 1.0), eta(n, 1.0);
    double residual = std::numeric_limits<double>::infinity();
    long long iter = 0;
    for (; iter < max_iters && residual > tol; ++iter) {
        for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) sum += s(i, j) / eta[j];
            xi[i] = sum;
        }
        for (int j = 0; j < n; ++j) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += s(i, j) / xi[i];
            eta[j] = sum;
        }
        // Column sums of B are exactly 1 after the eta sweep; measure rows.
        residual = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += s(i, j) / (xi[i] * eta[j]);
            residual = std::max(residual, std::fabs(row - 1.0));
        }
    }
    if (residual > tol) {
        std::ostringstream msg;
        msg << "Sinkhorn did not converge: residual " << residual << " after " << max_iters
            << " iterations";
        throw numerical_error(msg.str());
    }

    // Gauge fix prod eta_j = 1 once after convergence.
    double mean_log_eta = 0.0;
    for (double e : eta) mean_log_eta += std::log(e);
    mean_log_eta /= n;
    double tau = std::exp(mean_log_eta);
    for (double& x : xi) x *= tau;
    for (double& e : eta) e /= tau;

    ScalingResult r;
    r.B = Matrix(n, n);
    r.log_sigma = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) r.B(i, j) = s(i, j) / (xi[i] * eta[j]);
        xi[i] *= amax;
        r.log_sigma += std::log(xi[i]);
    }
    r.xi = std::move(xi);
    r.eta = std::move(eta);
    r.iterations = iter;
    r.residual = residual;
    return r;
}

double sigma(const Matrix& a, double tol) { return std::exp(sinkhorn_scale(a, tol).log_sigma); }

double log_sigma(const Matrix& a, double tol) { return sinkhorn_scale(a, tol).log_sigma; }

double log_sigma_via_minimization(const Matrix& a, double tol) {
    if (a.rows != a.cols) throw validation_error("scaling requires a square matrix");
    require_positive(a);
    int n = a.rows;

    double amax = max_entry(a);
    Matrix s = a;
    for (double& v : s.data) v /= amax;

    auto f = [&](const std::vector<double>& t) {
        double val = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += s(i, j) * std::exp(t[j]);
            val += std::log(row);
        }
        return val;
    };

    std::vector<double> t(n, 0.0);
    double fval = f(t);
    const int max_newton = 200;
    for (int iter = 0; iter < max_newton; ++iter) {
        // p_ij = s_ij e^{t_j} / row_i; gradient is the column-sum vector.
        std::vector<std::vector<double>> p(n, std::vector<double>(n));
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) {
                p[i][j] = s(i, j) * std::exp(t[j]);
                row += p[i][j];
            }
            for (int j = 0; j < n; ++j) p[i][j] /= row;
        }
        std::vector<double> g(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g[j] += p[i][j];

        double gnorm = 0.0;
        for (int j = 0; j < n; ++j) gnorm = std::max(gnorm, std::fabs(g[j] - 1.0));
        if (gnorm <= tol) return fval + n * std::log(amax);

        // Hessian diag(g) - P^T P, regularized along the all-ones null space.
        std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) h[k][l] -= p[i][k] * p[i][l];
        for (int k = 0; k < n; ++k) h[k][k] += g[k];
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) h[k][l] += 1.0 / n;

        std::vector<double> rhs(n);
        for (int j = 0; j < n; ++j) rhs[j] = -(g[j] - 1.0);
        std::vector<double> d = solve_dense(std::move(h), std::move(rhs));
        double mean_d = 0.0;
        for (double v : d) mean_d += v;
        mean_d /= n;
        for (double& v : d) v -= mean_d;

        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            std::vector<double> cand(n);
            for (int j = 0; j < n; ++j) cand[j] = t[j] + step * d[j];
            double fc = f(cand);
            if (fc < fval) {
                t = std::move(cand);
                fval = fc;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            // The objective is at floating-point resolution; a tiny residual
            // gradient costs O(gnorm^2) in the minimum value, far below the
            // accuracy this route is used for.
            if (gnorm <= 1e-6) return fval + n * std::log(amax);
            std::ostringstream msg;
            msg << "sigma minimization stalled, gradient norm " << gnorm;
            throw numerical_error(msg.str());
        }
    }
    throw numerical_error("sigma minimization did not converge");
}

double sigma_via_minimization(const Matrix& a, double tol) {
    return std::exp(log_sigma_via_minimization(a, tol));
}

ReducedScalingResult reduced_scale_matrix(const Matrix& wg,
                                          const std::vector<long long>& row_margins,
                                          const std::vector<long long>& col_margins,
                                          double tol, long long max_iters) {
    require_positive(wg);
    if (tol <= 0.0) throw validation_error("tolerance must be positive");
    int m = wg.rows, n = wg.cols;
    if (m != static_cast<int>(row_margins.size()) || n != static_cast<int>(col_margins.size()))
        throw validation_error("matrix dimensions do not match margins");

    double wmax = max_entry(wg);
    Matrix s = wg;
    for (double& v : s.data) v /= wmax;

    std::vector<double> mu(m, 1.0), lambda(n, 1.0);
    double residual = std::numeric_limits<double>::infinity();
    long long iter = 0;
    for (; iter < max_iters && residual > tol; ++iter) {
        for (int i = 0; i < m; ++i) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) sum += s(i, j) / lambda[j];
            mu[i] = sum / static_cast<double>(row_margins[i]);
        }
        for (int j = 0; j < n; ++j) {
            double sum = 0.0;
            for (int i = 0; i < m; ++i) sum += s(i, j) / mu[i];
            lambda[j] = sum / static_cast<double>(col_margins[j]);
        }
        residual = 0.0;
        for (int i = 0; i < m; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += s(i, j) / (mu[i] * lambda[j]);
            double target = static_cast<double>(row_margins[i]);
            residual = std::max(residual, std::fabs(row - target) / target);
        }
    }
    if (residual > tol) {
        std::ostringstream msg;
        msg << "reduced scaling did not converge: residual " << residual;
        throw numerical_error(msg.str());
    }

    ReducedScalingResult r;
    r.L = Matrix(m, n);
    for (int i = 0; i < m; ++i) {
        mu[i] *= wmax;
        for (int j = 0; j < n; ++j) r.L(i, j) = wg(i, j) / (mu[i] * lambda[j]);
    }
    r.log_sigma = 0.0;
    for (int i = 0; i < m; ++i)
        r.log_sigma += static_cast<double>(row_margins[i]) *
                       std::log(mu[i] * static_cast<double>(row_margins[i]));
    for (int j = 0; j < n; ++j)
        r.log_sigma += static_cast<double>(col_margins[j]) *
                       std::log(lambda[j] * static_cast<double>(col_margins[j]));
    r.mu = std::move(mu);
    r.lambda = std::move(lambda);
    r.iterations = iter;
    r.residual = residual;
    return r;
}

ReducedScalingResult reduced_scale(const ProblemInstance& problem, const Matrix& gamma,
                                   double tol, long long max_iters) {
    if (gamma.rows != problem.m() || gamma.cols != problem.n())
        throw validation_error("gamma dimensions do not match problem");
    Matrix wg(problem.m(), problem.n());
    for (int i = 0; i < problem.m(); ++i)
        for (int j = 0; j < problem.n(); ++j) wg(i, j) = problem.weights(i, j) * gamma(i, j);
    return reduced_scale_matrix(wg, problem.row_margins, problem.col_margins, tol, max_iters);
}

}  // namespace ctab
