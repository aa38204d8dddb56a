#include "ez/poly.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

#include "ez/error.hpp"

namespace ez {

std::vector<Exponent> poly_exponents(const PrHyper& hyper) {
    if (hyper.max_degree < 0 || hyper.max_interact_degree < 0)
        throw ValidationError("poly_exponents: negative degree");
    std::vector<Exponent> out;
    for (int total = 0; total <= hyper.max_degree; ++total) {
        for (int a = total; a >= 0; --a) {
            for (int b = total - a; b >= 0; --b) {
                const int c = total - a - b;
                const int vars = (a > 0) + (b > 0) + (c > 0);
                if (vars >= 2 && total > hyper.max_interact_degree) continue;
                out.push_back({a, b, c});
            }
        }
    }
    return out;
}

namespace {

int max_exponent(std::span<const Exponent> exps) {
    int m = 0;
    for (const Exponent& e : exps) m = std::max({m, e[0], e[1], e[2]});
    return m;
}

void fill_powers(const Point3& x, int max_power, std::array<std::vector<double>, 3>& pw) {
    for (std::size_t d = 0; d < 3; ++d) {
        pw[d].resize(static_cast<std::size_t>(max_power) + 1);
        pw[d][0] = 1.0;
        for (int k = 1; k <= max_power; ++k) pw[d][static_cast<std::size_t>(k)] = pw[d][static_cast<std::size_t>(k) - 1] * x[d];
    }
}

} // namespace

Eigen::VectorXd poly_features(const Point3& x, std::span<const Exponent> exponents) {
    std::array<std::vector<double>, 3> pw;
    fill_powers(x, max_exponent(exponents), pw);
    Eigen::VectorXd f(static_cast<Eigen::Index>(exponents.size()));
    for (std::size_t j = 0; j < exponents.size(); ++j) {
        const Exponent& e = exponents[j];
        f(static_cast<Eigen::Index>(j)) = pw[0][static_cast<std::size_t>(e[0])] *
                                          pw[1][static_cast<std::size_t>(e[1])] *
                                          pw[2][static_cast<std::size_t>(e[2])];
    }
    return f;
}

double PolyModel::eval(const Point3& scaled) const {
    // Powers on the stack; degree is bounded by the grid (<= 15).
    const int max_power = hyper.max_degree;
    std::array<std::array<double, 32>, 3> pw;
    for (std::size_t d = 0; d < 3; ++d) {
        pw[d][0] = 1.0;
        for (int k = 1; k <= max_power && k < 32; ++k)
            pw[d][static_cast<std::size_t>(k)] = pw[d][static_cast<std::size_t>(k) - 1] * scaled[d];
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < exponents.size(); ++j) {
        const Exponent& e = exponents[j];
        sum += coefficients(static_cast<Eigen::Index>(j)) * pw[0][static_cast<std::size_t>(e[0])] *
               pw[1][static_cast<std::size_t>(e[1])] * pw[2][static_cast<std::size_t>(e[2])];
    }
    return sum;
}

PolyModel fit_poly_scaled(std::span<const Point3> x, std::span<const double> y, const PrHyper& hyper) {
    if (x.size() != y.size()) throw ValidationError("fit_poly: x/y length mismatch");
    if (hyper.max_degree > 31) throw ValidationError("fit_poly: max_degree above 31 unsupported");
    PolyModel model;
    model.hyper = hyper;
    model.exponents = poly_exponents(hyper);
    const auto n = static_cast<Eigen::Index>(x.size());
    const auto p = static_cast<Eigen::Index>(model.exponents.size());
    if (n <= p) {
        throw ValidationError("fit_poly: " + std::to_string(n) + " rows for " + std::to_string(p) +
                              " features (underdetermined)");
    }
    Eigen::MatrixXd a(n + p, p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + p);
    for (Eigen::Index i = 0; i < n; ++i) {
        a.row(i) = poly_features(x[static_cast<std::size_t>(i)], model.exponents).transpose();
        b(i) = y[static_cast<std::size_t>(i)];
    }
    a.bottomRows(p) = std::sqrt(kPolyRidge) * Eigen::MatrixXd::Identity(p, p);
    model.coefficients = a.colPivHouseholderQr().solve(b);
    return model;
}

} // namespace ez
