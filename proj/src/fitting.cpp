#include "rtx/fitting.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rtx {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double FitResult::operator[](const std::string& name) const
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return params(static_cast<Eigen::Index>(i));
    throw std::out_of_range("FitResult: no parameter '" + name + "'");
}

namespace {

struct Eval {
    VectorXd r;  // weighted residuals
    MatrixXd J;  // weighted model Jacobian
    double cost = 0;
};

Eval evaluate(const Model& m, const FitData& d, const VectorXd& p, bool with_jacobian)
{
    const Eigen::Index n = d.x.size();
    Eval e;
    e.r.resize(n);
    if (with_jacobian) e.J.resize(n, p.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        double w = d.sigma.size() ? 1.0 / d.sigma(i) : 1.0;
        e.r(i) = (d.y(i) - m.value(d.x(i), p)) * w;
        if (with_jacobian) e.J.row(i) = m.jacobian(d.x(i), p).transpose() * w;
    }
    e.cost = e.r.squaredNorm();
    return e;
}

// Residuals at roundoff level (rn <= floor) count as an exact fit: their
// direction relative to J is noise.
double scaled_gradient(const Eval& e, double floor)
{
    double rn = std::sqrt(e.cost);
    if (rn <= floor) return 0.0;
    VectorXd g = e.J.transpose() * e.r;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
        double cn = e.J.col(j).norm();
        if (cn > 0) worst = std::max(worst, std::abs(g(j)) / (cn * rn));
    }
    return worst;
}

// index of the first sample at or past which y drops below frac * y0
double crossing(const FitData& d, double frac)
{
    double y0 = d.y(0);
    for (Eigen::Index i = 0; i < d.x.size(); ++i)
        if (d.y(i) <= frac * y0) return d.x(i);
    return d.x(d.x.size() - 1);
}

}  // namespace

FitResult fit_nlls(const Model& model, const FitData& data, const VectorXd& init, FitOptions opt)
{
    const Eigen::Index n = data.x.size();
    const Eigen::Index np = init.size();
    if (data.y.size() != n || (data.sigma.size() && data.sigma.size() != n))
        throw std::invalid_argument("fit_nlls: x, y and sigma sizes differ");
    if (n < np + 1)
        throw std::invalid_argument("fit_nlls: need at least " + std::to_string(np + 1) + " points for "
                                    + std::to_string(np) + " parameters");

    double y_norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double w = data.sigma.size() ? 1.0 / data.sigma(i) : 1.0;
        y_norm += data.y(i) * data.y(i) * w * w;
    }
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::sqrt(y_norm);

    VectorXd p = init;
    Eval cur = evaluate(model, data, p, true);
    double lambda = opt.lambda0;

    FitResult res;
    res.names = model.params;
    res.history.push_back(cur.cost);
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        res.gradient_norm = scaled_gradient(cur, floor);
        if (res.gradient_norm < opt.gtol || cur.cost < 1e-300) break;

        MatrixXd A = cur.J.transpose() * cur.J;
        VectorXd g = cur.J.transpose() * cur.r;
        VectorXd diag = A.diagonal().cwiseMax(1e-300);
        bool accepted = false;
        bool tiny_step = false;
        for (int tries = 0; tries < 60; ++tries) {
            MatrixXd M = A;
            M.diagonal() += lambda * diag;
            VectorXd step = M.ldlt().solve(g);
            VectorXd trial = p + step;
            Eval next = evaluate(model, data, trial, false);
            if (std::isfinite(next.cost) && next.cost <= cur.cost) {
                tiny_step = step.norm() <= opt.xtol * (p.norm() + opt.xtol);
                p = trial;
                cur = evaluate(model, data, p, true);
                lambda = std::max(lambda / 10.0, 1e-300);
                accepted = true;
                res.history.push_back(cur.cost);
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted || tiny_step) {
            ++it;
            break;
        }
    }
    res.gradient_norm = scaled_gradient(cur, floor);
    res.iterations = it;
    res.params = p;
    res.residual_norm = cur.cost;
    res.converged = res.gradient_norm < opt.gtol || cur.cost < 1e-300;

    MatrixXd A = cur.J.transpose() * cur.J;
    res.covariance = A.completeOrthogonalDecomposition().pseudoInverse();
    if (!data.sigma.size() && n > np) res.covariance *= cur.cost / static_cast<double>(n - np);
    res.sigma = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return res;
}

FitResult fit_nlls(const Model& model, const FitData& data, FitOptions opt)
{
    if (!model.guess) throw std::invalid_argument("fit_nlls: model '" + model.name + "' has no initializer");
    return fit_nlls(model, data, model.guess(data), opt);
}

Model gaussian_decay()
{
    Model m;
    m.name = "gaussian_decay";
    m.params = {"A", "tau_c"};
    m.value = [](double t, const VectorXd& p) { return p(0) * std::exp(-t * t / (p(1) * p(1))); };
    m.jacobian = [](double t, const VectorXd& p) {
        double e = std::exp(-t * t / (p(1) * p(1)));
        VectorXd j(2);
        j << e, p(0) * e * 2.0 * t * t / std::pow(p(1), 3);
        return j;
    };
    m.guess = [](const FitData& d) {
        VectorXd p(2);
        p << d.y(0), std::max(crossing(d, std::exp(-1.0)), 1e-300);
        return p;
    };
    return m;
}

Model exponential_decay()
{
    Model m;
    m.name = "exponential_decay";
    m.params = {"A", "tau_D"};
    m.value = [](double t, const VectorXd& p) { return p(0) * std::exp(-t / p(1)); };
    m.jacobian = [](double t, const VectorXd& p) {
        double e = std::exp(-t / p(1));
        VectorXd j(2);
        j << e, p(0) * e * t / (p(1) * p(1));
        return j;
    };
    m.guess = [](const FitData& d) {
        VectorXd p(2);
        p << d.y(0), std::max(crossing(d, std::exp(-1.0)), 1e-300);
        return p;
    };
    return m;
}

Model lorentzian()
{
    Model m;
    m.name = "lorentzian";
    m.params = {"A", "x0", "fwhm"};
    m.value = [](double x, const VectorXd& p) {
        double u = 2.0 * (x - p(1)) / p(2);
        return p(0) / (1.0 + u * u);
    };
    m.jacobian = [](double x, const VectorXd& p) {
        double u = 2.0 * (x - p(1)) / p(2);
        double v = 1.0 / (1.0 + u * u);
        VectorXd j(3);
        j << v, 4.0 * p(0) * u * v * v / p(2), 2.0 * p(0) * u * u * v * v / p(2);
        return j;
    };
    // centre at the data maximum, width from the samples above half maximum
    m.guess = [](const FitData& d) {
        Eigen::Index k;
        double ymax = d.y.maxCoeff(&k);
        double lo = d.x(k), hi = d.x(k);
        for (Eigen::Index i = 0; i < d.x.size(); ++i)
            if (d.y(i) >= ymax / 2.0) {
                lo = std::min(lo, d.x(i));
                hi = std::max(hi, d.x(i));
            }
        double w = hi - lo;
        if (w <= 0) w = (d.x.maxCoeff() - d.x.minCoeff()) / 4.0;
        VectorXd p(3);
        p << ymax, d.x(k), w;
        return p;
    };
    return m;
}

Model scaling_law()
{
    Model m;
    m.name = "scaling_law";
    m.params = {"beta"};
    m.value = [](double d, const VectorXd& p) { return 1.0 - p(0) / d; };
    m.jacobian = [](double d, const VectorXd&) {
        VectorXd j(1);
        j << -1.0 / d;
        return j;
    };
    m.guess = [](const FitData& d) {
        VectorXd p(1);
        p << ((1.0 - d.y.array()) * d.x.array()).mean();
        return p;
    };
    return m;
}

Model photon_number_law(double t_d)
{
    Model m;
    m.name = "photon_number_law";
    m.params = {"eta0", "gamma0"};
    m.value = [t_d](double N, const VectorXd& p) { return p(0) * std::exp(-2.0 * std::sqrt(N) * p(1) * t_d); };
    m.jacobian = [t_d](double N, const VectorXd& p) {
        double e = std::exp(-2.0 * std::sqrt(N) * p(1) * t_d);
        VectorXd j(2);
        j << e, -2.0 * std::sqrt(N) * t_d * p(0) * e;
        return j;
    };
    // log-linear regression of ln y on sqrt(N)
    m.guess = [t_d](const FitData& d) {
        const Eigen::Index n = d.x.size();
        Eigen::MatrixXd A(n, 2);
        VectorXd b(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            A(i, 0) = 1.0;
            A(i, 1) = std::sqrt(d.x(i));
            b(i) = std::log(std::max(d.y(i), 1e-12));
        }
        VectorXd c = A.colPivHouseholderQr().solve(b);
        VectorXd p(2);
        p << std::exp(c(0)), std::max(-c(1) / (2.0 * t_d), 0.0);
        return p;
    };
    return m;
}

Model mixer_gaussian()
{
    Model m;
    m.name = "mixer_gaussian";
    m.params = {"amplitude", "center", "width", "floor"};
    m.value = [](double U, const VectorXd& p) {
        double u = (U - p(1)) / p(2);
        return p(0) * std::exp(-0.5 * u * u) + p(3);
    };
    m.jacobian = [](double U, const VectorXd& p) {
        double u = (U - p(1)) / p(2);
        double e = std::exp(-0.5 * u * u);
        VectorXd j(4);
        j << e, p(0) * e * u / p(2), p(0) * e * u * u / p(2), 1.0;
        return j;
    };
    m.guess = [](const FitData& d) {
        Eigen::Index k;
        double ymax = d.y.maxCoeff(&k);
        double ymin = d.y.minCoeff();
        double half = ymin + (ymax - ymin) / 2.0;
        double lo = d.x(k);
        for (Eigen::Index i = 0; i < d.x.size(); ++i)
            if (d.y(i) >= half) lo = std::min(lo, d.x(i));
        double width = std::max(d.x(k) - lo, 1e-12) / std::sqrt(2.0 * std::log(2.0));
        VectorXd p(4);
        p << ymax - ymin, d.x(k), width, ymin;
        return p;
    };
    return m;
}

Model two_level_transmission(double Gamma2, double I_in)
{
    const double h2 = Gamma2 * Gamma2 / 4.0;
    Model m;
    m.name = "two_level_transmission";
    m.params = {"d0"};
    m.value = [h2, I_in](double w, const VectorXd& p) { return I_in * std::exp(-p(0) * h2 / (w * w + h2)); };
    m.jacobian = [h2, I_in](double w, const VectorXd& p) {
        double l = h2 / (w * w + h2);
        VectorXd j(1);
        j << -l * I_in * std::exp(-p(0) * l);
        return j;
    };
    // invert the least saturated sample that still shows absorption
    m.guess = [h2, I_in](const FitData& d) {
        double best = 1.0;
        double score = -1.0;
        for (Eigen::Index i = 0; i < d.x.size(); ++i) {
            double T = d.y(i) / I_in;
            if (T <= 1e-6 || T >= 0.999) continue;
            double s = T * (1.0 - T);
            if (s > score) {
                score = s;
                best = -std::log(T) * (d.x(i) * d.x(i) + h2) / h2;
            }
        }
        VectorXd p(1);
        p << best;
        return p;
    };
    return m;
}

Model exponential_g2()
{
    Model m;
    m.name = "exponential_g2";
    m.params = {"g2_0", "tau_coh"};
    m.value = [](double t, const VectorXd& p) { return 1.0 + (p(0) - 1.0) * std::exp(-t / p(1)); };
    m.jacobian = [](double t, const VectorXd& p) {
        double e = std::exp(-t / p(1));
        VectorXd j(2);
        j << e, (p(0) - 1.0) * e * t / (p(1) * p(1));
        return j;
    };
    m.guess = [](const FitData& d) {
        double g0 = d.y(0);
        double tau = d.x(d.x.size() - 1) / 3.0;
        for (Eigen::Index i = 0; i < d.x.size(); ++i)
            if (d.y(i) - 1.0 <= (g0 - 1.0) / std::exp(1.0)) {
                tau = std::max(d.x(i), 1e-300);
                break;
            }
        VectorXd p(2);
        p << g0, tau;
        return p;
    };
    return m;
}

std::map<std::string, Model> model_catalog()
{
    std::map<std::string, Model> c;
    for (Model m : {gaussian_decay(), exponential_decay(), lorentzian(), scaling_law(), photon_number_law(623e-9),
                    mixer_gaussian(), two_level_transmission(2.0 * 3.141592653589793 * 6e6), exponential_g2()})
        c.emplace(m.name, std::move(m));
    return c;
}

double no_cloning_threshold(const std::function<double(double)>& model, double level, double scale)
{
    double f0 = model(0.0);
    if (f0 == level) return 0.0;
    if (f0 < level) throw std::domain_error("no_cloning_threshold: model(0) is below the threshold level");
    double hi = scale;
    int guard = 0;
    while (model(hi) > level) {
        hi *= 2.0;
        if (++guard > 200) throw std::domain_error("no_cloning_threshold: model never crosses the level");
    }
    auto f = [&](double t) { return model(t) - level; };
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::abs(a + b); };
    auto [a, b] = boost::math::tools::bisect(f, 0.0, hi, tol);
    return 0.5 * (a + b);
}

VectorXd numeric_jacobian(const Model& m, double x, const VectorXd& p, double rel_step)
{
    VectorXd j(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        double h = rel_step * std::max(std::abs(p(k)), 1e-300);
        VectorXd a = p, b = p;
        a(k) += h;
        b(k) -= h;
        j(k) = (m.value(x, a) - m.value(x, b)) / (2.0 * h);
    }
    return j;
}

}  // namespace rtx
