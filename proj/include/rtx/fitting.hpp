#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace rtx {

struct FitData {
    Eigen::VectorXd x, y;
    Eigen::VectorXd sigma;  // empty: unit weights
};

struct Model {
    std::string name;
    std::vector<std::string> params;
    std::function<double(double, const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> jacobian;
    std::function<Eigen::VectorXd(const FitData&)> guess;  // deterministic initialization
};

struct FitOptions {
    int max_iterations = 500;
    double lambda0 = 1e-3;
    double gtol = 1e-8;   // on the scaled gradient (cosine between residual and Jacobian columns)
    double xtol = 1e-14;  // relative step
};

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;
    Eigen::VectorXd sigma;        // sqrt(diag(covariance))
    double residual_norm = 0;     // weighted sum of squared residuals
    double gradient_norm = 0;     // scaled, see FitOptions::gtol
    bool converged = false;
    int iterations = 0;
    std::vector<double> history;  // residual_norm after each accepted step

    double operator[](const std::string& name) const;
};

// Levenberg-Marquardt with Marquardt diagonal scaling; lambda starts at
// lambda0 and is divided/multiplied by 10 on accept/reject.
FitResult fit_nlls(const Model& model, const FitData& data, const Eigen::VectorXd& init, FitOptions opt = {});
FitResult fit_nlls(const Model& model, const FitData& data, FitOptions opt = {});

Model gaussian_decay();           // A exp(-t^2 / tau_c^2)
Model exponential_decay();        // A exp(-t / tau_D)
Model lorentzian();               // A / (1 + (2 (x - x0) / fwhm)^2)
Model scaling_law();              // 1 - beta / d
Model photon_number_law(double t_d);            // eta0 exp(-2 sqrt(N) gamma0 t_d)
Model mixer_gaussian();           // a exp(-(U-U0)^2 / (2 w^2)) + floor
Model two_level_transmission(double Gamma2, double I_in = 1.0);  // I_in exp(-d0 h^2/(w^2+h^2)), h = Gamma2/2
Model exponential_g2();           // 1 + (g2_0 - 1) exp(-tau / tau_coh)

std::map<std::string, Model> model_catalog();

// Root of model(tau) = level for a decreasing model by bracketed bisection.
// Throws std::domain_error when model(0) < level; returns 0 when equal.
double no_cloning_threshold(const std::function<double(double)>& model, double level = 0.5,
                            double scale = 1e-6);

// Central finite-difference Jacobian used by the property tests.
Eigen::VectorXd numeric_jacobian(const Model& m, double x, const Eigen::VectorXd& p, double rel_step = 1e-6);

}  // namespace rtx
