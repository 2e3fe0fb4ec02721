#ifndef CTAB_COMMON_HPP_
#define CTAB_COMMON_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctab {

// Input that fails validation (bad margins, negative weights, malformed files).
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid input that violates an operation's precondition
// (enumeration budget, Ryser cap, cyclic flow graph).
struct precondition_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iteration that failed to converge or produced a non-finite value.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded random stream. Identical seed reproduces the identical stream;
// parallel substreams are derived with split(), never by sharing an engine.
// Distribution transforms are hand-rolled so the stream does not depend on
// the standard library's unspecified <random> distribution algorithms.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed)
        : seed_(seed), engine_(splitmix64(seed)) {}

    static const char* algorithm() { return "splitmix64+mt19937_64"; }

    std::uint64_t seed() const { return seed_; }

    // Independent substream for a numbered parallel worker.
    RandomSource split(std::uint64_t stream) const {
        return RandomSource(splitmix64(seed_ + 0x9e3779b97f4a7c15ULL * (stream + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on (0, 1].
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard exponential via inverse CDF: gamma = -ln(u), u in (0,1].
    double exponential() { return -std::log(uniform01()); }

    // Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Compensated (Kahan) accumulator.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline double log_sum_exp(const std::vector<double>& v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    KahanSum s;
    for (double x : v) s.add(std::exp(x - m));
    return m + std::log(s.value());
}

inline double log_factorial(long long n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace ctab

#endif  // CTAB_COMMON_HPP_
