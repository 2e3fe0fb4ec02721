#ifndef CTAB_ESTIMATOR_HPP_
#define CTAB_ESTIMATOR_HPP_

#include <functional>

#include "ctab/bounds.hpp"
#include "ctab/core.hpp"
#include "ctab/scaling.hpp"

namespace ctab {

// Point estimate of T' with a 95% confidence interval and the implied
// bracket [T', alpha * T'] for T.
struct EstimateReport {
    double t_prime = 0.0;
    double log_t_prime = 0.0;
    double stderr_est = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    long long samples_used = 0;
    enum class Method { direct, simplex } method = Method::direct;
    double alpha = 1.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    // simplex-specific diagnostics
    double delta = 0.0;
    double lemma43_factor = 1.0;  // Delta-integral upper/lower ratio bound
    double gelman_rubin = 0.0;
    bool mcmc_flagged = false;
};

struct McmcConfig {
    long long burn_in = -1;           // -1: 1000 * mn
    long long thin = -1;              // -1: mn
    int chains = 8;
    int beta_stages = -1;             // -1: min(64, ceil(sqrt(mn) * 10))
    long long samples_per_stage = 256;  // per chain per annealing stage
    long long stage_burn_in = -1;     // -1: burn_in / 10 (chains stay warm)
};

// Monte Carlo estimate of E per A(gamma) / (prod r_i! prod c_j!), which
// equals T exactly in expectation.
struct MeanStderr {
    double mean = 0.0;
    double stderr_est = 0.0;
};

MeanStderr estimate_expected_permanent(const ProblemInstance& problem, long long samples,
                                       RandomSource& rng);

// T' by plain Monte Carlo over exponential gamma draws: mean of sigma(A)
// via the reduced m x n scaling, times N! / (N^N prod r_i! prod c_j!).
// trace_log_sigma, when given, receives the per-sample ln sigma values.
EstimateReport estimate_T_prime_direct(const ProblemInstance& problem, long long samples,
                                       RandomSource& rng, double weight_eps = -1.0,
                                       const ScalingOptions& scaling = ScalingOptions(),
                                       std::vector<double>* trace_log_sigma = nullptr);

// delta <= -ln(1 - eps) / (mn (N + mn - 1)): truncating the simplex to its
// delta-interior loses at most a (1 - eps) factor of the integral.
double delta_for_epsilon(double epsilon, int m, int n, long long N);

// Lipschitz constant N / delta of ln S on the delta-interior simplex.
double lipschitz_bound(double delta, long long N);

// Hit-and-run Markov chain on the delta-interior of the standard simplex
// in `dim` coordinates, targeting a log-concave density. Each step picks a
// uniform direction in the sum-zero hyperplane and resamples along the
// chord by rejection against a concave piecewise envelope.
class HitAndRunChain {
public:
    using LogDensity = std::function<double(const std::vector<double>&)>;

    HitAndRunChain(int dim, double delta, LogDensity log_density, RandomSource rng);

    void set_log_density(LogDensity log_density) { log_density_ = std::move(log_density); }
    void set_state(const std::vector<double>& x);
    const std::vector<double>& state() const { return x_; }
    void step();
    void run(long long steps);
    long long restarts() const { return restarts_; }

private:
    double chord_sample(const std::vector<double>& dir, double tlo, double thi);
    void reset_to_centroid();

    int dim_;
    double delta_;
    LogDensity log_density_;
    RandomSource rng_;
    std::vector<double> x_;
    long long restarts_ = 0;
};

// Annealed ratio estimate of ln of the integral of S over the
// delta-interior simplex (with respect to the induced Lebesgue measure),
// telescoping over densities proportional to S^{beta_k} starting from the
// uniform stage whose measure is known in closed form.
struct AnnealedIntegral {
    double log_integral = 0.0;
    double log_stderr = 0.0;  // jackknife over chains, on the log scale
    std::vector<double> per_chain_log;
    double gelman_rubin = 0.0;
    bool flagged = false;
    long long samples_used = 0;
};

double log_simplex_measure(int dim, double delta);  // ln nu(Delta_delta)

AnnealedIntegral simplex_integral_annealed(int dim, double delta,
                                           const HitAndRunChain::LogDensity& log_s,
                                           const McmcConfig& config, RandomSource& rng);

// The full simplex pipeline: delta from epsilon, annealed integration of S
// over the delta-interior, Lemma 4.2 prefactor, and the alpha bracket.
// delta_override > 0 replaces the delta derived from epsilon.
EstimateReport estimate_T_prime_simplex(const ProblemInstance& problem, double epsilon,
                                        RandomSource& rng, const McmcConfig& config = McmcConfig(),
                                        double weight_eps = -1.0,
                                        const ScalingOptions& scaling = ScalingOptions(),
                                        double delta_override = -1.0);

// Quadrature check of the orthant-to-simplex integral identity for both
// P(gamma) = per A(gamma) and S(gamma) = sigma(A(gamma)). Feasible only for
// mn <= 3 and N <= 4.
struct Lemma42Report {
    double lhs_P = 0.0, rhs_P = 0.0, rel_err_P = 0.0;
    double lhs_S = 0.0, rhs_S = 0.0, rel_err_S = 0.0;
};

Lemma42Report verify_lemma_4_2(const ProblemInstance& problem);

// ln S(gamma) = ln sigma(A(gamma)) for an m*n coordinate vector, via the
// reduced scaling. Shared by the simplex estimator and the property suites.
double log_S_of_point(const ProblemInstance& problem, const Matrix& effective_w,
                      const std::vector<double>& point,
                      const ScalingOptions& scaling = ScalingOptions());

}  // namespace ctab

#endif  // CTAB_ESTIMATOR_HPP_
