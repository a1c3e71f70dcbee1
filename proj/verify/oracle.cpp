#include "aerobat/oracle.hpp"

#include <cmath>

namespace aerobat::oracle {

double wagnerKernelRate(double t, double chord, const aero::WagnerCoefficients& w) {
    const double r1 = 2.0 * w.eps1 / chord;
    const double r2 = 2.0 * w.eps2 / chord;
    const double decay_rate = -(w.psi1 * r1 * std::exp(-r1 * t) + w.psi2 * r2 * std::exp(-r2 * t));
    return w.form == aero::WagnerForm::Rising ? -decay_rate : decay_rate;
}

std::vector<double> duhamelResponse(const std::vector<double>& y, double dt, double chord,
                                    const aero::WagnerCoefficients& w) {
    const std::size_t n = y.size();
    std::vector<double> kernel(n);
    for (std::size_t k = 0; k < n; ++k) kernel[k] = wagnerKernelRate(static_cast<double>(k) * dt, chord, w);
    const double phi0 = w.form == aero::WagnerForm::Rising ? 1.0 - w.psi1 - w.psi2 : w.psi1 + w.psi2;
    std::vector<double> beta(n);
    for (std::size_t i = 0; i < n; ++i) {
        double integral = 0;
        if (i > 0) {
            integral = 0.5 * (kernel[i] * y[0] + kernel[0] * y[i]);
            for (std::size_t j = 1; j < i; ++j) integral += kernel[i - j] * y[j];
            integral *= dt;
        }
        beta[i] = phi0 * y[i] + integral;
    }
    return beta;
}

Eigen::VectorXd centralDifference(const std::function<Eigen::VectorXd(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

double exponentialDecay(double x0, double t) { return x0 * std::exp(-t); }

}  // namespace aerobat::oracle
