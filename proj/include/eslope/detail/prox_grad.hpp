#pragma once
// Accelerated proximal gradient (FISTA) with function-value restart.
//
// A Problem supplies:
//   double smooth(const Vector& z, Vector& grad) const;   // f(z), writes grad f(z)
//   double penalty(const Vector& z) const;                // h(z)
//   void prox(const Vector& v, double step, Vector& out) const;
//   double kkt_residual(const Vector& z, const Vector& grad) const;
// and minimize() drives f + h to a point where the objective has stalled over
// a window and kkt_residual (how far -grad is from the subdifferential of h)
// is below kkt_tol.

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include <Eigen/Dense>

namespace eslope::detail {

struct ProxGradOptions {
    int max_iter = 20000;
    double tol = 1e-8;
    double kkt_tol = 1e-6;
    bool accelerate = true;
    bool restart = true;
    bool backtracking = false;
    int window = 10;
};

struct ProxGradOutcome {
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    double kkt_residual = 0.0;
};

template <class Problem>
ProxGradOutcome minimize(const Problem& problem, Eigen::VectorXd& x, double lipschitz,
                         const ProxGradOptions& opt, std::vector<double>* trace = nullptr)
{
    using Vec = Eigen::VectorXd;
    ProxGradOutcome out;

    Vec grad_x(x.size());
    double f_x = problem.smooth(x, grad_x);
    double obj_x = f_x + problem.penalty(x);
    if (trace) {
        trace->push_back(obj_x);
    }

    Vec w = x;
    Vec grad_w(x.size());
    Vec step_point(x.size());
    Vec x_new(x.size());
    Vec grad_new(x.size());
    double momentum = 1.0;
    double L = lipschitz;
    std::deque<double> history{obj_x};

    for (int k = 1; k <= opt.max_iter; ++k) {
        out.iterations = k;
        const double f_w = problem.smooth(w, grad_w);
        double f_new = 0.0;
        for (;;) {
            step_point = w - grad_w / L;
            problem.prox(step_point, 1.0 / L, x_new);
            f_new = problem.smooth(x_new, grad_new);
            if (!opt.backtracking) {
                break;
            }
            const Vec d = x_new - w;
            if (f_new <= f_w + grad_w.dot(d) + 0.5 * L * d.squaredNorm() + 1e-12 * std::abs(f_w)) {
                break;
            }
            L *= 2.0;
        }
        const double obj_new = f_new + problem.penalty(x_new);

        if (opt.accelerate && opt.restart && momentum > 1.0 && obj_new > obj_x) {
            // Drop the momentum and retake a plain gradient step from x.
            momentum = 1.0;
            w = x;
            continue;
        }

        if (opt.accelerate) {
            const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            w = x_new + ((momentum - 1.0) / next) * (x_new - x);
            momentum = next;
        } else {
            w = x_new;
        }
        x.swap(x_new);
        grad_x.swap(grad_new);
        obj_x = obj_new;
        if (trace) {
            trace->push_back(obj_x);
        }

        history.push_back(obj_x);
        if (static_cast<int>(history.size()) > opt.window + 1) {
            history.pop_front();
        }
        if (static_cast<int>(history.size()) == opt.window + 1 &&
            history.front() - obj_x <= opt.tol * std::max(1.0, std::abs(obj_x))) {
            const double kkt = problem.kkt_residual(x, grad_x);
            out.kkt_residual = kkt;
            if (kkt <= opt.kkt_tol) {
                out.converged = true;
                break;
            }
        }
    }
    out.objective = obj_x;
    if (!out.converged) {
        out.kkt_residual = problem.kkt_residual(x, grad_x);
    }
    return out;
}

} // namespace eslope::detail
