#include "ctab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace ctab {

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("quadrature order must be >= 1");
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    QuadratureRule r = gauss_legendre(n);
    double mid = 0.5 * (a + b), len = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = mid + len * r.nodes[i];
        r.weights[i] *= len;
    }
    return r;
}

QuadratureRule gauss_laguerre(int n) {
    if (n < 1) throw std::invalid_argument("quadrature order must be >= 1");
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    double x = 0.0;
    for (int i = 0; i < n; ++i) {
        // Stroud-Secrest initial guesses, then Newton on L_n.
        if (i == 0) {
            x = 3.0 / (1.0 + 2.4 * n);
        } else if (i == 1) {
            x += 15.0 / (1.0 + 2.5 * n);
        } else {
            double ai = i - 1;
            x += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (x - r.nodes[i - 2]);
        }
        double p1 = 0.0, p0 = 0.0;
        for (int it = 0; it < 200; ++it) {
            p1 = 1.0;
            double pm = 0.0;
            for (int k = 1; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0 - x) * p1 - (k - 1.0) * pm) / k;
                pm = p1;
                p1 = p2;
            }
            p0 = pm;
            double dp = n * (p1 - p0) / x;
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-14 * std::max(1.0, std::fabs(x))) break;
        }
        r.nodes[i] = x;
        // w_i = x_i / ((n+1) L_{n+1}(x_i))^2; via recurrence L_{n+1} from L_n, L_{n-1}
        double lnp1 = ((2.0 * n + 1.0 - x) * p1 - n * p0) / (n + 1.0);
        r.weights[i] = x / ((n + 1.0) * (n + 1.0) * lnp1 * lnp1);
    }
    return r;
}

}  // namespace ctab
