#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

#include "ez/sampling.hpp"

namespace ez {

struct PrHyper {
    int max_degree = 9;
    int max_interact_degree = 3;
    friend bool operator==(const PrHyper&, const PrHyper&) = default;
};

inline constexpr std::array<int, 6> kPrDegreeGrid = {9, 10, 12, 13, 14, 15};

using Exponent = std::array<int, 3>;

/// Monomial exponents x1^a x2^b x3^c with a+b+c <= max_degree, where terms mixing two or
/// more variables are further capped at max_interact_degree. Graded lexicographic order.
std::vector<Exponent> poly_exponents(const PrHyper& hyper);

/// Monomial values at a scaled point, in exponent order.
Eigen::VectorXd poly_features(const Point3& x, std::span<const Exponent> exponents);

struct PolyModel {
    PrHyper hyper;
    std::vector<Exponent> exponents;
    Eigen::VectorXd coefficients;

    double eval(const Point3& scaled) const;
};

/// Ridge added to the normal equations' diagonal (via row augmentation) for rank deficiency.
inline constexpr double kPolyRidge = 1e-10;

/// Least squares on already-scaled inputs via column-pivoted Householder QR.
/// Throws ValidationError when there are no more rows than features.
PolyModel fit_poly_scaled(std::span<const Point3> x, std::span<const double> y, const PrHyper& hyper);

} // namespace ez
