#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

namespace adspeech {

// Limited-memory BFGS with backtracking Armijo line search, for smooth
// convex objectives (the regularized log-likelihood here). Convergence is
// declared on the gradient infinity norm.
struct LbfgsResult {
    std::vector<double> x;
    double objective = 0.0;
    double grad_inf_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// fn(x, grad_out) -> objective; grad_out is resized by the caller.
inline LbfgsResult lbfgs_minimize(std::vector<double> x,
                                  const std::function<double(const std::vector<double>&, std::vector<double>&)>& fn,
                                  double tol, int max_iter, std::size_t history = 10) {
    const std::size_t n = x.size();
    std::vector<double> grad(n), new_grad(n);
    double f = fn(x, grad);

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    LbfgsResult res;
    auto inf_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    };

    int it = 0;
    for (; it < max_iter; ++it) {
        const double gnorm = inf_norm(grad);
        if (gnorm < tol) {
            res.converged = true;
            break;
        }

        // Two-loop recursion.
        std::vector<double> q = grad;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t k = s_hist.size(); k-- > 0;) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += s_hist[k][j] * q[j];
            alpha[k] = rho_hist[k] * dot;
            for (std::size_t j = 0; j < n; ++j) q[j] -= alpha[k] * y_hist[k][j];
        }
        if (!s_hist.empty()) {
            double sy = 0.0, yy = 0.0;
            const auto& s_last = s_hist.back();
            const auto& y_last = y_hist.back();
            for (std::size_t j = 0; j < n; ++j) {
                sy += s_last[j] * y_last[j];
                yy += y_last[j] * y_last[j];
            }
            const double gamma = yy > 0.0 ? sy / yy : 1.0;
            for (double& v : q) v *= gamma;
        }
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += y_hist[k][j] * q[j];
            const double beta = rho_hist[k] * dot;
            for (std::size_t j = 0; j < n; ++j) q[j] += s_hist[k][j] * (alpha[k] - beta);
        }
        // q is now the ascent direction estimate; descend along -q.
        double dir_dot_grad = 0.0;
        for (std::size_t j = 0; j < n; ++j) dir_dot_grad += -q[j] * grad[j];
        if (dir_dot_grad > -1e-16) {
            // Not a descent direction (stale curvature); fall back to steepest descent.
            for (std::size_t j = 0; j < n; ++j) q[j] = grad[j];
            dir_dot_grad = 0.0;
            for (std::size_t j = 0; j < n; ++j) dir_dot_grad += -q[j] * grad[j];
        }

        double step = 1.0;
        std::vector<double> x_new(n);
        double f_new = f;
        bool advanced = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t j = 0; j < n; ++j) x_new[j] = x[j] - step * q[j];
            f_new = fn(x_new, new_grad);
            if (f_new <= f + 1e-4 * step * dir_dot_grad) {
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if (!advanced) break;  // line search exhausted at machine precision

        std::vector<double> s_vec(n), y_vec(n);
        double sy = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            s_vec[j] = x_new[j] - x[j];
            y_vec[j] = new_grad[j] - grad[j];
            sy += s_vec[j] * y_vec[j];
        }
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x.swap(x_new);
        grad.swap(new_grad);
        f = f_new;
    }

    res.x = std::move(x);
    res.objective = f;
    res.grad_inf_norm = inf_norm(grad);
    res.iterations = it;
    if (res.grad_inf_norm < tol) res.converged = true;
    return res;
}

}  // namespace adspeech
