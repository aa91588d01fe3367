#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>
#include <unsupported/Eigen/Polynomials>

#include "error.hpp"

namespace canard {

// plain bisection; f(lo), f(hi) must differ in sign
template <class F>
double bisect(F&& f, double lo, double hi, double tol = 1e-12, int max_iter = 200)
{
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if ((flo > 0) == (fhi > 0))
        throw NumericFailure("bisect: interval does not bracket a root");
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0)
            return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// bracketed root by TOMS 748
template <class F>
double brent_root(F&& f, double lo, double hi, double tol = 1e-14, int max_iter = 200)
{
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if ((flo > 0) == (fhi > 0))
        throw NumericFailure("brent_root: interval does not bracket a root");
    std::uintmax_t it = static_cast<std::uintmax_t>(max_iter);
    auto stop = [tol](double a, double b) { return std::fabs(b - a) <= tol * std::max(1.0, std::fabs(a)); };
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, it);
    return 0.5 * (r.first + r.second);
}

// scan [lo,hi] on n cells and return every sign-change root
template <class F>
std::vector<double> scan_roots(F&& f, double lo, double hi, int n, double tol = 1e-14)
{
    std::vector<double> roots;
    double xa = lo, fa = f(lo);
    for (int i = 1; i <= n; ++i) {
        double xb = lo + (hi - lo) * i / n;
        double fb = f(xb);
        if (fa == 0.0) {
            if (roots.empty() || roots.back() != xa)
                roots.push_back(xa);
        } else if ((fa > 0) != (fb > 0) && fb != 0.0) {
            roots.push_back(brent_root(f, xa, xb, tol));
        }
        xa = xb;
        fa = fb;
    }
    if (fa == 0.0 && (roots.empty() || roots.back() != xa))
        roots.push_back(xa);
    return roots;
}

struct NewtonResult {
    Eigen::VectorXd x;
    double residual = 0;
    int iterations = 0;
    bool converged = false;
};

// damped Newton for small square systems
inline NewtonResult newton_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F,
                                 const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& J,
                                 Eigen::VectorXd x, double tol = 1e-13, int max_iter = 100)
{
    NewtonResult res;
    Eigen::VectorXd f = F(x);
    double norm = f.norm();
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it;
        if (norm <= tol) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd dx = J(x).fullPivLu().solve(-f);
        if (!dx.allFinite())
            break;
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            Eigen::VectorXd xn = x + lambda * dx;
            Eigen::VectorXd fn = F(xn);
            double nn = fn.norm();
            if (std::isfinite(nn) && nn < (1.0 - 1e-4 * lambda) * norm) {
                x = xn;
                f = fn;
                norm = nn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            // full step stalls at roundoff level: accept if already tiny
            if (dx.norm() <= 1e-14 * std::max(1.0, x.norm()))
                res.converged = true;
            break;
        }
        if (dx.norm() * lambda <= 1e-15 * std::max(1.0, x.norm())) {
            res.converged = norm <= 1e3 * tol;
            break;
        }
    }
    if (norm <= tol)
        res.converged = true;
    res.x = x;
    res.residual = norm;
    return res;
}

// finite-difference Jacobian for newton_solve
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F,
                                   const Eigen::VectorXd& x, double rel = 1e-7)
{
    Eigen::VectorXd f0 = F(x);
    Eigen::MatrixXd J(f0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double h = rel * std::max(1.0, std::fabs(x[j]));
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (F(xp) - F(xm)) / (2 * h);
    }
    return J;
}

// real roots of sum c[k] x^k, polished by Newton, ascending
inline std::vector<double> real_polynomial_roots(std::vector<double> c, double imag_tol = 1e-8)
{
    while (!c.empty() && c.back() == 0.0)
        c.pop_back();
    if (c.size() < 2)
        return {};
    Eigen::VectorXd coeffs = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(coeffs);
    std::vector<double> out;
    for (const auto& z : solver.roots()) {
        if (std::fabs(z.imag()) > imag_tol * std::max(1.0, std::abs(z)))
            continue;
        double x = z.real();
        for (int it = 0; it < 8; ++it) {
            double p = 0, dp = 0;
            for (std::size_t k = c.size(); k-- > 0;) {
                dp = dp * x + p;
                p = p * x + c[k];
            }
            if (dp == 0.0)
                break;
            double step = p / dp;
            x -= step;
            if (std::fabs(step) <= 1e-16 * std::max(1.0, std::fabs(x)))
                break;
        }
        out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::fabs(a - b) <= 1e-10 * std::max(1.0, std::fabs(a)); }),
              out.end());
    return out;
}

}  // namespace canard
