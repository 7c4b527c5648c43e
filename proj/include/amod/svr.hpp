#pragma once

#include <Eigen/Dense>

#include <vector>

namespace amod {

// Frame-level feature sequence for rank pooling. Row t of `vectors` is the
// feature vector of frame t; `targets` are the centered time indices
// c_t = (t+1) - (L+1)/2 (sum zero).
struct FeatureSequence {
  Eigen::MatrixXd vectors;  // L x d
  Eigen::VectorXd targets;  // L

  Eigen::Index length() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
};

Eigen::VectorXd centered_targets(Eigen::Index length);

struct SvrOptions {
  int max_iterations = 500;
  double objective_tol = 1e-6;  // relative objective change
  double gradient_tol = 1e-10;  // on the min-norm subgradient, relative
};

struct SvrSolution {
  Eigen::VectorXd u;
  double b = 0.0;
  double C = 0.0;
  double epsilon = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  // Objective after every outer iteration, starting at the initial point.
  std::vector<double> objective_history;
};

double svr_objective(const FeatureSequence& fs, double C, double epsilon,
                     const Eigen::VectorXd& u, double b);

// Minimizes  0.5*||u||^2 + C * sum_t max(0, |c_t - u.v_t - b| - epsilon).
//
// The minimizer lies in the span of the feature vectors, so the solve runs
// in Gram space: steepest descent along the negative minimum-norm
// subgradient with an exact line search over the piecewise-quadratic
// restriction. Each step is computed in closed form, so the objective never
// increases and the run is deterministic.
SvrSolution solve_linear_svr(const FeatureSequence& fs, double C, double epsilon,
                             const SvrOptions& options = {});

}  // namespace amod
