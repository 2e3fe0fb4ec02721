#include "ctab/estimator.hpp"

#include <sstream>

#include "ctab/exact.hpp"
#include "ctab/quadrature.hpp"
#include "ctab/scaling.hpp"

namespace ctab {

namespace {

// ln of N! / (N^N prod r_i! prod c_j!)
double log_prefactor(const ProblemInstance& p) {
    double lf = log_factorial(p.total) -
                static_cast<double>(p.total) * std::log(static_cast<double>(p.total));
    for (long long r : p.row_margins) lf -= log_factorial(r);
    for (long long c : p.col_margins) lf -= log_factorial(c);
    return lf;
}

double log_factorial_denominator(const ProblemInstance& p) {
    double lf = 0.0;
    for (long long r : p.row_margins) lf += log_factorial(r);
    for (long long c : p.col_margins) lf += log_factorial(c);
    return lf;
}

void fill_alpha_bracket(EstimateReport& rep, const ProblemInstance& p) {
    ApproximationFactor a = alpha_factor(p.row_margins, p.col_margins);
    rep.alpha = a.alpha;
    rep.bracket_lo = rep.t_prime;
    rep.bracket_hi = rep.alpha * rep.t_prime;
}

// Gelman-Rubin potential scale reduction over per-chain scalar traces.
double gelman_rubin_stat(const std::vector<std::vector<double>>& traces) {
    std::size_t chains = traces.size();
    if (chains < 2) return 1.0;
    std::size_t n = traces[0].size();
    if (n < 2) return 1.0;

    std::vector<double> means(chains);
    double grand = 0.0;
    for (std::size_t c = 0; c < chains; ++c) {
        KahanSum s;
        for (double v : traces[c]) s.add(v);
        means[c] = s.value() / n;
        grand += means[c];
    }
    grand /= chains;

    double b = 0.0;  // between-chain variance * n
    for (double m : means) b += (m - grand) * (m - grand);
    b *= static_cast<double>(n) / (chains - 1);

    double w = 0.0;  // within-chain variance
    for (std::size_t c = 0; c < chains; ++c) {
        double acc = 0.0;
        for (double v : traces[c]) acc += (v - means[c]) * (v - means[c]);
        w += acc / (n - 1);
    }
    w /= chains;
    if (w <= 0.0) return 1.0;
    double var_plus = (static_cast<double>(n - 1) / n) * w + b / n;
    return std::sqrt(var_plus / w);
}

}  // namespace

MeanStderr estimate_expected_permanent(const ProblemInstance& problem, long long samples,
                                       RandomSource& rng) {
    if (samples < 2) throw validation_error("need at least 2 samples");
    double scale = std::exp(-log_factorial_denominator(problem));

    KahanSum sum, sumsq;
    for (long long k = 0; k < samples; ++k) {
        Matrix gamma = sample_gamma(problem.m(), problem.n(), rng);
        BlockSquareMatrix a = assemble_block_matrix(problem, gamma);
        double v = permanent_ryser(a.entries) * scale;
        sum.add(v);
        sumsq.add(v * v);
    }
    double mean = sum.value() / samples;
    double var = (sumsq.value() / samples - mean * mean) * samples / (samples - 1.0);
    MeanStderr out;
    out.mean = mean;
    out.stderr_est = std::sqrt(std::max(0.0, var) / samples);
    return out;
}

EstimateReport estimate_T_prime_direct(const ProblemInstance& problem, long long samples,
                                       RandomSource& rng, double weight_eps,
                                       const ScalingOptions& scaling,
                                       std::vector<double>* trace_log_sigma) {
    if (samples < 2) throw validation_error("need at least 2 samples");
    Matrix w = effective_weights(problem, weight_eps);
    int m = problem.m(), n = problem.n();

    // Substituted zero weights make the scaled matrix nearly decomposable,
    // where Sinkhorn converges only polynomially; a 1e-6 residual perturbs
    // ln sigma far below the Monte Carlo error, so relax the target up front
    // instead of burning the iteration budget on every sample.
    double tol = problem.has_zero_weight ? std::max(scaling.tol, 1e-6) : scaling.tol;

    std::vector<double> ls;
    ls.reserve(samples);
    for (long long k = 0; k < samples; ++k) {
        Matrix gamma = sample_gamma(m, n, rng);
        Matrix wg(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) wg(i, j) = w(i, j) * gamma(i, j);
        double log_s;
        try {
            log_s = reduced_scale_matrix(wg, problem.row_margins, problem.col_margins, tol,
                                         scaling.max_iters)
                        .log_sigma;
        } catch (const numerical_error&) {
            // one retry with a larger budget and a relaxed target
            log_s = reduced_scale_matrix(wg, problem.row_margins, problem.col_margins,
                                         std::max(tol, 1e-6), 10 * scaling.max_iters)
                        .log_sigma;
        }
        ls.push_back(log_s);
    }
    if (trace_log_sigma) *trace_log_sigma = ls;

    // Log-domain mean and variance of sigma.
    double mx = *std::max_element(ls.begin(), ls.end());
    KahanSum s1, s2;
    for (double v : ls) {
        s1.add(std::exp(v - mx));
        s2.add(std::exp(2.0 * (v - mx)));
    }
    double mean_rel = s1.value() / samples;
    double var_rel =
        (s2.value() / samples - mean_rel * mean_rel) * samples / (samples - 1.0);
    double rel_se = std::sqrt(std::max(0.0, var_rel) / samples) / mean_rel;

    EstimateReport rep;
    rep.method = EstimateReport::Method::direct;
    rep.samples_used = samples;
    rep.log_t_prime = mx + std::log(mean_rel) + log_prefactor(problem);
    rep.t_prime = std::exp(rep.log_t_prime);
    rep.stderr_est = rep.t_prime * rel_se;
    rep.ci_lo = rep.t_prime - 1.96 * rep.stderr_est;
    rep.ci_hi = rep.t_prime + 1.96 * rep.stderr_est;
    fill_alpha_bracket(rep, problem);
    return rep;
}

double delta_for_epsilon(double epsilon, int m, int n, long long N) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw validation_error("epsilon must be in (0,1)");
    double mn = static_cast<double>(m) * n;
    return -std::log1p(-epsilon) / (mn * (static_cast<double>(N) + mn - 1.0));
}

double lipschitz_bound(double delta, long long N) {
    if (!(delta > 0.0)) throw validation_error("delta must be positive");
    return static_cast<double>(N) / delta;
}

HitAndRunChain::HitAndRunChain(int dim, double delta, LogDensity log_density, RandomSource rng)
    : dim_(dim), delta_(delta), log_density_(std::move(log_density)), rng_(rng) {
    if (dim < 2) throw validation_error("hit-and-run needs dimension >= 2");
    if (!(delta >= 0.0 && delta < 1.0 / dim))
        throw validation_error("delta must lie in [0, 1/dim)");
    reset_to_centroid();
    restarts_ = 0;
}

void HitAndRunChain::reset_to_centroid() {
    x_.assign(dim_, 1.0 / dim_);
    ++restarts_;
}

void HitAndRunChain::set_state(const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != dim_) throw validation_error("state dimension mismatch");
    x_ = x;
}

double HitAndRunChain::chord_sample(const std::vector<double>& dir, double tlo, double thi) {
    auto g = [&](double t) {
        std::vector<double> p(dim_);
        for (int k = 0; k < dim_; ++k) p[k] = x_[k] + t * dir[k];
        return log_density_(p);
    };

    // Golden-section maximum of the concave restriction.
    double a = tlo, b = thi;
    const double gr = 0.6180339887498949;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = g(c1), f2 = g(c2);
    while (b - a > 1e-3 * (thi - tlo)) {
        if (f1 < f2) {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = g(c2);
        } else {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = g(c1);
        }
    }
    double tstar = 0.5 * (a + b);

    // Piecewise-constant envelope over a grid that contains the mode; on
    // each subinterval the concave g is unimodal-free, so the larger
    // endpoint value dominates.
    std::vector<std::pair<double, double>> pts;  // (t, g(t)) sorted
    const int kInit = 12;
    for (int k = 0; k <= kInit; ++k) {
        double t = tlo + (thi - tlo) * k / kInit;
        pts.emplace_back(t, g(t));
    }
    pts.emplace_back(tstar, g(tstar));
    std::sort(pts.begin(), pts.end());

    for (int attempt = 0; attempt < 500; ++attempt) {
        double gmax = -std::numeric_limits<double>::infinity();
        for (auto& p : pts) gmax = std::max(gmax, p.second);

        // interval weights len * exp(level - gmax)
        std::vector<double> cum(pts.size() - 1);
        double total = 0.0;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            double level = std::max(pts[k].second, pts[k + 1].second);
            total += (pts[k + 1].first - pts[k].first) * std::exp(level - gmax);
            cum[k] = total;
        }
        double u = rng_.uniform01() * total;
        std::size_t k = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
        if (k >= cum.size()) k = cum.size() - 1;
        double level = std::max(pts[k].second, pts[k + 1].second);
        double t = pts[k].first + rng_.uniform01() * (pts[k + 1].first - pts[k].first);
        double gt = g(t);
        if (std::log(rng_.uniform01()) <= gt - level) return t;
        // refine the envelope with the rejected point
        pts.insert(pts.begin() + k + 1, {t, gt});
    }
    throw numerical_error("chord rejection sampling failed to accept");
}

void HitAndRunChain::step() {
    // Uniform direction in the sum-zero hyperplane.
    std::vector<double> dir(dim_);
    double norm = 0.0;
    do {
        double mean = 0.0;
        for (int k = 0; k < dim_; ++k) {
            dir[k] = rng_.normal();
            mean += dir[k];
        }
        mean /= dim_;
        norm = 0.0;
        for (int k = 0; k < dim_; ++k) {
            dir[k] -= mean;
            norm += dir[k] * dir[k];
        }
        norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (int k = 0; k < dim_; ++k) dir[k] /= norm;

    // Chord of the delta-interior simplex along dir.
    double tlo = -std::numeric_limits<double>::infinity();
    double thi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < dim_; ++k) {
        if (dir[k] > 0.0)
            tlo = std::max(tlo, (delta_ - x_[k]) / dir[k]);
        else if (dir[k] < 0.0)
            thi = std::min(thi, (delta_ - x_[k]) / dir[k]);
    }
    if (!(thi - tlo > 1e-13)) {
        reset_to_centroid();
        return;
    }

    double t = chord_sample(dir, tlo, thi);
    double sum = 0.0;
    for (int k = 0; k < dim_; ++k) {
        x_[k] += t * dir[k];
        sum += x_[k];
    }
    // renormalize against drift off the hyperplane
    for (int k = 0; k < dim_; ++k) x_[k] /= sum;
}

void HitAndRunChain::run(long long steps) {
    for (long long k = 0; k < steps; ++k) step();
}

double log_simplex_measure(int dim, double delta) {
    if (dim < 1) throw validation_error("dimension must be >= 1");
    if (dim == 1) return 0.0;  // a single point, counted with unit mass
    // Delta_delta = delta * 1 + (1 - dim*delta) * Delta, an affine copy in
    // an affine subspace of dimension dim-1.
    return (dim - 1) * std::log1p(-dim * delta) + 0.5 * std::log(static_cast<double>(dim)) -
           std::lgamma(static_cast<double>(dim));
}

AnnealedIntegral simplex_integral_annealed(int dim, double delta,
                                           const HitAndRunChain::LogDensity& log_s,
                                           const McmcConfig& config, RandomSource& rng) {
    AnnealedIntegral out;
    if (dim == 1) {
        out.log_integral = log_s({1.0});
        out.per_chain_log = {out.log_integral};
        out.gelman_rubin = 1.0;
        return out;
    }

    long long burn_in = config.burn_in >= 0 ? config.burn_in : 1000LL * dim;
    long long thin = config.thin >= 1 ? config.thin : dim;
    long long stage_burn = config.stage_burn_in >= 0 ? config.stage_burn_in : burn_in / 10;
    int chains = std::max(2, config.chains);
    int stages = config.beta_stages >= 2
                     ? config.beta_stages
                     : std::min(64, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dim)) * 10.0)));
    long long per_stage = std::max<long long>(2, config.samples_per_stage);

    // beta_0 = 0 (uniform), then geometric up to 1.
    std::vector<double> beta(stages);
    beta[0] = 0.0;
    const double beta_min = 0.02;
    for (int k = 1; k < stages; ++k) {
        beta[k] = stages == 2 ? 1.0
                              : std::pow(beta_min, static_cast<double>(stages - 1 - k) /
                                                       (stages - 2));
    }

    std::vector<std::vector<double>> log_ratio(chains,
                                               std::vector<double>(stages - 1, 0.0));
    std::vector<std::vector<double>> final_trace(chains);
    long long used = 0;

    for (int c = 0; c < chains; ++c) {
        RandomSource crng = rng.split(static_cast<std::uint64_t>(c));
        HitAndRunChain chain(
            dim, delta, [](const std::vector<double>&) { return 0.0; }, crng);
        chain.run(burn_in);
        for (int k = 0; k + 1 < stages; ++k) {
            double bk = beta[k], bnext = beta[k + 1];
            chain.set_log_density([&log_s, bk](const std::vector<double>& p) {
                return bk == 0.0 ? 0.0 : bk * log_s(p);
            });
            if (k > 0) chain.run(stage_burn);
            std::vector<double> increments;
            increments.reserve(per_stage);
            for (long long s = 0; s < per_stage; ++s) {
                chain.run(thin);
                double v = log_s(chain.state());
                increments.push_back((bnext - bk) * v);
                if (k + 2 == stages) final_trace[c].push_back(v);
                ++used;
            }
            log_ratio[c][k] = log_sum_exp(increments) - std::log(static_cast<double>(per_stage));
        }
    }
    out.samples_used = used;

    double log_measure = log_simplex_measure(dim, delta);
    auto pooled = [&](int skip) {
        double total = log_measure;
        for (int k = 0; k + 1 < stages; ++k) {
            std::vector<double> vals;
            for (int c = 0; c < chains; ++c)
                if (c != skip) vals.push_back(log_ratio[c][k]);
            total += log_sum_exp(vals) - std::log(static_cast<double>(vals.size()));
        }
        return total;
    };

    out.log_integral = pooled(-1);
    out.per_chain_log.resize(chains);
    std::vector<double> jack(chains);
    double jack_mean = 0.0;
    for (int c = 0; c < chains; ++c) {
        double chain_total = log_measure;
        for (int k = 0; k + 1 < stages; ++k) chain_total += log_ratio[c][k];
        out.per_chain_log[c] = chain_total;
        jack[c] = pooled(c);
        jack_mean += jack[c];
    }
    jack_mean /= chains;
    double jse = 0.0;
    for (double j : jack) jse += (j - jack_mean) * (j - jack_mean);
    out.log_stderr = std::sqrt(jse * (chains - 1.0) / chains);

    out.gelman_rubin = gelman_rubin_stat(final_trace);
    out.flagged = !(out.gelman_rubin <= 1.1) || !std::isfinite(out.log_integral);
    return out;
}

double log_S_of_point(const ProblemInstance& problem, const Matrix& effective_w,
                      const std::vector<double>& point, const ScalingOptions& scaling) {
    int m = problem.m(), n = problem.n();
    if (static_cast<int>(point.size()) != m * n)
        throw validation_error("point dimension does not match problem");
    Matrix wg(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            wg(i, j) = effective_w(i, j) * point[static_cast<std::size_t>(i) * n + j];
    return reduced_scale_matrix(wg, problem.row_margins, problem.col_margins, scaling.tol,
                                scaling.max_iters)
        .log_sigma;
}

EstimateReport estimate_T_prime_simplex(const ProblemInstance& problem, double epsilon,
                                        RandomSource& rng, const McmcConfig& config,
                                        double weight_eps, const ScalingOptions& scaling,
                                        double delta_override) {
    Matrix w = effective_weights(problem, weight_eps);
    int m = problem.m(), n = problem.n();
    int mn = m * n;
    long long N = problem.total;

    EstimateReport rep;
    rep.method = EstimateReport::Method::simplex;

    auto log_s = [&](const std::vector<double>& p) {
        return log_S_of_point(problem, w, p, scaling);
    };

    AnnealedIntegral integral;
    if (mn == 1) {
        // Delta is the single point gamma = 1; no MCMC needed.
        integral.log_integral = log_s({1.0});
        integral.gelman_rubin = 1.0;
        rep.delta = 0.0;
        rep.lemma43_factor = 1.0;
    } else {
        if (delta_override > 0.0) {
            rep.delta = delta_override;
        } else {
            // exact choice making (1 - mn delta)^{N+mn-1} = 1 - epsilon; it
            // sits below the delta_for_epsilon upper bound, whose first-order
            // form would overshoot the 1/(1-epsilon) width guarantee
            if (!(epsilon > 0.0 && epsilon < 1.0))
                throw validation_error("epsilon must be in (0,1)");
            double k = static_cast<double>(N) + mn - 1.0;
            rep.delta = -std::expm1(std::log1p(-epsilon) / k) / mn;
        }
        if (!(rep.delta < 1.0 / mn)) throw validation_error("delta must be below 1/mn");
        rep.lemma43_factor =
            std::exp(-(static_cast<double>(N) + mn - 1.0) * std::log1p(-mn * rep.delta));
        integral = simplex_integral_annealed(mn, rep.delta, log_s, config, rng);
    }

    // Lemma 4.2 factor (N+mn-1)!/sqrt(mn) and the T' prefactor.
    double log_lemma42 = log_factorial(N + mn - 1) - 0.5 * std::log(static_cast<double>(mn));
    rep.log_t_prime = integral.log_integral + log_lemma42 + log_prefactor(problem);
    rep.t_prime = std::exp(rep.log_t_prime);
    rep.samples_used = integral.samples_used;
    rep.gelman_rubin = integral.gelman_rubin;
    rep.mcmc_flagged = integral.flagged;

    double se_log = integral.log_stderr;
    rep.stderr_est = rep.t_prime * se_log;
    rep.ci_lo = std::exp(rep.log_t_prime - 1.96 * se_log);
    rep.ci_hi = std::exp(rep.log_t_prime + 1.96 * se_log);
    fill_alpha_bracket(rep, problem);
    return rep;
}

Lemma42Report verify_lemma_4_2(const ProblemInstance& problem) {
    int m = problem.m(), n = problem.n();
    int mn = m * n;
    long long N = problem.total;
    if (mn > 3 || N > 4)
        throw precondition_error("quadrature check is feasible only for mn <= 3, N <= 4");
    Matrix w = effective_weights(problem);

    auto eval_P = [&](const std::vector<double>& point) {
        Matrix gamma(m, n);
        for (int k = 0; k < mn; ++k) gamma.data[k] = point[k];
        return permanent_ryser(assemble_block_matrix(problem, gamma).entries);
    };
    auto eval_S = [&](const std::vector<double>& point) {
        return std::exp(log_S_of_point(problem, w, point, ScalingOptions{1e-12, 1000000}));
    };

    // LHS: tensor Gauss-Laguerre over the positive orthant with the
    // exponential weight.
    QuadratureRule lag = gauss_laguerre(40);
    auto orthant = [&](const std::function<double(const std::vector<double>&)>& f) {
        std::vector<double> point(mn);
        std::function<double(int)> rec = [&](int d) -> double {
            double acc = 0.0;
            for (std::size_t k = 0; k < lag.nodes.size(); ++k) {
                point[d] = lag.nodes[k];
                acc += lag.weights[k] * (d + 1 == mn ? f(point) : rec(d + 1));
            }
            return acc;
        };
        return rec(0);
    };

    // RHS: (N+mn-1)!/sqrt(mn) times the simplex integral; the sqrt(mn)
    // metric factor of nu cancels against the flat parametrization.
    QuadratureRule leg = gauss_legendre(64);
    auto simplex = [&](const std::function<double(const std::vector<double>&)>& f) {
        std::vector<double> point(mn);
        if (mn == 1) {
            point[0] = 1.0;
            return f(point);
        }
        std::function<double(int, double)> rec = [&](int d, double rem) -> double {
            double acc = 0.0;
            for (std::size_t k = 0; k < leg.nodes.size(); ++k) {
                double t = rem * 0.5 * (leg.nodes[k] + 1.0);
                double wq = rem * 0.5 * leg.weights[k];
                point[d] = t;
                if (d + 2 == mn) {
                    point[mn - 1] = rem - t;
                    acc += wq * f(point);
                } else {
                    acc += wq * rec(d + 1, rem - t);
                }
            }
            return acc;
        };
        return rec(0, 1.0);
    };

    double factor = std::exp(log_factorial(N + mn - 1));
    Lemma42Report r;
    r.lhs_P = orthant(eval_P);
    r.rhs_P = factor * simplex(eval_P);
    r.rel_err_P = std::fabs(r.lhs_P - r.rhs_P) / std::max(std::fabs(r.lhs_P), 1e-300);
    r.lhs_S = orthant(eval_S);
    r.rhs_S = factor * simplex(eval_S);
    r.rel_err_S = std::fabs(r.lhs_S - r.rhs_S) / std::max(std::fabs(r.lhs_S), 1e-300);
    return r;
}

}  // namespace ctab
