#ifndef CTAB_QUADRATURE_HPP_
#define CTAB_QUADRATURE_HPP_

#include <vector>

namespace ctab {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

// Gauss-Laguerre rule for integrals of f(x) e^{-x} on [0, inf).
QuadratureRule gauss_laguerre(int n);

}  // namespace ctab

#endif  // CTAB_QUADRATURE_HPP_
