#pragma once

#include "aerobat/aero.hpp"

#include <functional>
#include <vector>

// Reference computations that share no code with the models they check.
namespace aerobat::oracle {

/// Time derivative of the indicial response Phi(2 t / c) in physical time, written out term by term.
double wagnerKernelRate(double t, double chord, const aero::WagnerCoefficients& w);

/// Duhamel superposition beta(t_n) = Phi(0) y(t_n) + int_0^{t_n} dPhi/dt(t_n - s) y(s) ds on a uniform
/// grid, integrated with the trapezoidal rule.
std::vector<double> duhamelResponse(const std::vector<double>& y, double dt, double chord,
                                    const aero::WagnerCoefficients& w);

/// Central-difference derivative of a vector-valued function of one variable.
Eigen::VectorXd centralDifference(const std::function<Eigen::VectorXd(double)>& f, double x, double h);

/// Exact solution of x' = -x at time t from x(0) = x0.
double exponentialDecay(double x0, double t);

}  // namespace aerobat::oracle
