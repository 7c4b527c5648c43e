#include "amod/svr.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "amod/common.hpp"

namespace amod {

Eigen::VectorXd centered_targets(Eigen::Index length) {
  Eigen::VectorXd c(length);
  const double mid = 0.5 * static_cast<double>(length + 1);
  for (Eigen::Index t = 0; t < length; ++t)
    c[t] = static_cast<double>(t + 1) - mid;
  return c;
}

double svr_objective(const FeatureSequence& fs, double C, double epsilon,
                     const Eigen::VectorXd& u, double b) {
  double hinge = 0.0;
  for (Eigen::Index t = 0; t < fs.length(); ++t) {
    double r = fs.targets[t] - fs.vectors.row(t).dot(u) - b;
    hinge += std::max(0.0, std::abs(r) - epsilon);
  }
  return 0.5 * u.squaredNorm() + C * hinge;
}

namespace {

double hinge_sum(const Eigen::VectorXd& residual, double epsilon) {
  double h = 0.0;
  for (Eigen::Index t = 0; t < residual.size(); ++t)
    h += std::max(0.0, std::abs(residual[t]) - epsilon);
  return h;
}

double objective_from_state(const Eigen::MatrixXd& gram, double C, double epsilon,
                            const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& residual) {
  return 0.5 * beta.dot(gram * beta) + C * hinge_sum(residual, epsilon);
}

// Per-sample subgradient bounds for the hinge sign sigma_t, from the
// residual's position relative to the epsilon tube.
void sigma_bounds(const Eigen::VectorXd& residual, double epsilon, double kink_tol,
                  Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
  for (Eigen::Index t = 0; t < residual.size(); ++t) {
    const double r = residual[t];
    if (r > epsilon + kink_tol) {
      lo[t] = hi[t] = 1.0;
    } else if (r < -epsilon - kink_tol) {
      lo[t] = hi[t] = -1.0;
    } else if (std::abs(r) < epsilon - kink_tol) {
      lo[t] = hi[t] = 0.0;
    } else if (epsilon <= kink_tol) {
      lo[t] = -1.0;
      hi[t] = 1.0;
    } else if (r >= 0.0) {
      lo[t] = 0.0;
      hi[t] = 1.0;
    } else {
      lo[t] = -1.0;
      hi[t] = 0.0;
    }
  }
}

// Minimum-norm subgradient over the sigma box:
//   |g|^2 = (beta - C*sigma)' G (beta - C*sigma) + C^2 (sum sigma)^2,
// by cyclic projected coordinate descent (convex QP, dimension L).
double min_norm_sigma(const Eigen::MatrixXd& gram, const Eigen::VectorXd& beta,
                      double C, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                      Eigen::VectorXd& sigma) {
  const Eigen::Index L = beta.size();
  sigma = 0.5 * (lo + hi);
  Eigen::VectorXd w = beta - C * sigma;
  Eigen::VectorXd gw = gram * w;
  double ssum = sigma.sum();

  for (int sweep = 0; sweep < 80; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index t = 0; t < L; ++t) {
      if (lo[t] == hi[t]) continue;
      const double curvature = C * (gram(t, t) + 1.0);
      if (curvature <= 0.0) continue;
      double target = std::clamp(sigma[t] + (gw[t] - C * ssum) / curvature,
                                 lo[t], hi[t]);
      double delta = target - sigma[t];
      if (delta == 0.0) continue;
      sigma[t] = target;
      w[t] -= C * delta;
      gw -= C * delta * gram.col(t);
      ssum += delta;
      max_delta = std::max(max_delta, std::abs(delta));
    }
    if (max_delta < 1e-14) break;
  }
  return w.dot(gram * w) + C * C * ssum * ssum;
}

struct PolishResult {
  Eigen::VectorXd beta;
  double b = 0.0;
  Eigen::VectorXd residual;
};

// Active-set refinement: guess which samples sit exactly on the epsilon tube
// from the current residuals, solve the KKT equations for that guess, and
// verify. On success this lands on the exact minimizer (up to linear-solve
// roundoff); on any inconsistency the caller keeps iterating.
std::optional<PolishResult> try_polish(const Eigen::MatrixXd& gram,
                                       const Eigen::VectorXd& targets, double C,
                                       double epsilon,
                                       const Eigen::VectorXd& residual) {
  const Eigen::Index L = targets.size();
  const double scale = 1.0 + targets.cwiseAbs().maxCoeff();
  // The guess may be generous; acceptance is gated by the tight
  // verification below, which keeps false positives out.
  const double guess_tol = 1e-5 * scale;
  const double verify_tol = 1e-10 * scale;

  std::vector<Eigen::Index> active;  // on the tube edge
  Eigen::VectorXd sigma_fixed = Eigen::VectorXd::Zero(L);
  Eigen::VectorXd edge(L);
  for (Eigen::Index t = 0; t < L; ++t) {
    const double r = residual[t];
    if (std::abs(r - epsilon) <= guess_tol) {
      active.push_back(t);
      edge[t] = epsilon;
    } else if (epsilon > 0.0 && std::abs(r + epsilon) <= guess_tol) {
      active.push_back(t);
      edge[t] = -epsilon;
    } else if (r > epsilon) {
      sigma_fixed[t] = 1.0;
    } else if (r < -epsilon) {
      sigma_fixed[t] = -1.0;
    }
  }
  const Eigen::Index k = static_cast<Eigen::Index>(active.size());
  if (k == 0) return std::nullopt;

  // Unknowns: sigma on the active set, then b.
  // Rows: tube consistency per active sample, then sum(sigma) = 0.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs(k + 1);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index a = active[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j)
      M(i, j) = C * gram(a, active[static_cast<std::size_t>(j)]);
    M(i, k) = 1.0;
    double fixed_pred = 0.0;
    for (Eigen::Index t = 0; t < L; ++t)
      fixed_pred += C * sigma_fixed[t] * gram(a, t);
    rhs[i] = targets[a] - edge[a] - fixed_pred;
  }
  M.row(k).head(k).setOnes();
  rhs[k] = -sigma_fixed.sum();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::VectorXd x = lu.solve(rhs);
  if (!x.allFinite()) return std::nullopt;

  Eigen::VectorXd sigma = sigma_fixed;
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index a = active[static_cast<std::size_t>(i)];
    const double s = x[i];
    double lo = -1.0, hi = 1.0;
    if (epsilon > 0.0) {
      if (edge[a] > 0.0) lo = 0.0;
      if (edge[a] < 0.0) hi = 0.0;
    }
    if (s < lo - verify_tol || s > hi + verify_tol) return std::nullopt;
    sigma[a] = std::clamp(s, lo, hi);
  }

  PolishResult out;
  out.beta = C * sigma;
  out.b = x[k];
  out.residual = targets - gram * out.beta;
  out.residual.array() -= out.b;

  // The strict sets must keep their classification with essentially no
  // slack; a verified point satisfies the optimality conditions exactly.
  for (Eigen::Index t = 0; t < L; ++t) {
    const double r = out.residual[t];
    if (sigma_fixed[t] > 0.0 && r < epsilon - verify_tol) return std::nullopt;
    if (sigma_fixed[t] < 0.0 && r > -epsilon + verify_tol) return std::nullopt;
    if (sigma_fixed[t] == 0.0 && sigma[t] == 0.0 &&
        std::abs(r) > epsilon + verify_tol)
      return std::nullopt;
  }
  return out;
}

struct Breakpoint {
  double s;
  Eigen::Index t;
};

}  // namespace

SvrSolution solve_linear_svr(const FeatureSequence& fs, double C, double epsilon,
                             const SvrOptions& options) {
  if (fs.length() < 2) throw DataError("svr: need at least 2 samples");
  if (fs.targets.size() != fs.length())
    throw DataError("svr: targets/vectors length mismatch");
  if (C <= 0.0) throw DataError("svr: C must be positive");
  if (epsilon < 0.0) throw DataError("svr: epsilon must be nonnegative");
  if (!fs.vectors.allFinite() || !fs.targets.allFinite())
    throw NumericError("svr: non-finite features");

  const Eigen::Index L = fs.length();
  const Eigen::MatrixXd gram = fs.vectors * fs.vectors.transpose();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(L);
  double b = 0.0;
  Eigen::VectorXd residual = fs.targets;  // c - G*beta - b

  SvrSolution sol;
  sol.C = C;
  sol.epsilon = epsilon;
  double obj = objective_from_state(gram, C, epsilon, beta, residual);
  sol.objective_history.push_back(obj);

  const double kink_tol = 1e-9 * (1.0 + epsilon + fs.targets.cwiseAbs().maxCoeff());
  const double grad_scale = C * static_cast<double>(L) *
                            (1.0 + std::sqrt(gram.diagonal().maxCoeff()));

  Eigen::VectorXd lo(L), hi(L), sigma(L);
  bool converged = false;
  bool polished_exact = false;

  // Attempts the active-set finish; on success lands on the exact minimizer.
  auto attempt_polish = [&]() {
    if (auto polished = try_polish(gram, fs.targets, C, epsilon, residual)) {
      const double pol_obj = objective_from_state(gram, C, epsilon,
                                                  polished->beta,
                                                  polished->residual);
      if (pol_obj <= obj * (1.0 + 1e-12) + 1e-15) {
        beta = polished->beta;
        b = polished->b;
        residual = polished->residual;
        obj = std::min(obj, pol_obj);
        sol.objective_history.push_back(obj);
        polished_exact = true;
        return true;
      }
    }
    return false;
  };

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (iter > 0 && iter % 25 == 0) {
      // Refresh the incrementally updated residual.
      residual = fs.targets - gram * beta;
      residual.array() -= b;
    }

    sigma_bounds(residual, epsilon, kink_tol, lo, hi);
    const double gnorm = std::sqrt(
        std::max(min_norm_sigma(gram, beta, C, lo, hi, sigma), 0.0));
    if (gnorm <= options.gradient_tol * grad_scale) {
      converged = true;
      break;
    }

    // The attempt is O(L^3) and verified, so it is cheap to make every
    // iteration once there is an iterate to read the active set from.
    if (iter > 0 && attempt_polish()) {
      converged = true;
      ++iter;
      break;
    }

    // Steepest descent direction; db covers the unregularized bias.
    Eigen::VectorXd dbeta = C * sigma - beta;
    double db = C * sigma.sum();
    Eigen::VectorXd gd = gram * dbeta;
    Eigen::VectorXd q = gd.array() + db;  // residual(s) = residual - s*q

    const double A = 0.5 * dbeta.dot(gd);
    const double B = beta.dot(gd);

    std::vector<Breakpoint> bps;
    bps.reserve(static_cast<std::size_t>(2 * L));
    for (Eigen::Index t = 0; t < L; ++t) {
      if (q[t] == 0.0) continue;
      for (double e : {epsilon, -epsilon}) {
        double s = (residual[t] - e) / q[t];
        if (s > 0.0 && std::isfinite(s)) bps.push_back({s, t});
      }
    }
    std::sort(bps.begin(), bps.end(),
              [](const Breakpoint& l, const Breakpoint& r) { return l.s < r.s; });

    // phi(s) is convex piecewise quadratic; stop at the first zero crossing
    // of its derivative. Hinge slopes are constant within a segment, so a
    // midpoint probe identifies them.
    auto hinge_slope_at = [&](double s_probe) {
      double slope = 0.0;
      for (Eigen::Index t = 0; t < L; ++t) {
        double r = residual[t] - s_probe * q[t];
        if (r > epsilon)
          slope -= q[t];
        else if (r < -epsilon)
          slope += q[t];
      }
      return C * slope;
    };

    double best_s = -1.0;
    double seg_start = 0.0;
    for (std::size_t i = 0; i <= bps.size(); ++i) {
      const bool last = i == bps.size();
      const double seg_end = last ? -1.0 : bps[i].s;
      const double probe = last ? seg_start + 1.0 : 0.5 * (seg_start + seg_end);
      const double w_lin = hinge_slope_at(probe);
      if (2.0 * A * seg_start + B + w_lin >= 0.0) {
        best_s = seg_start;
        break;
      }
      if (A > 0.0) {
        double vertex = -(B + w_lin) / (2.0 * A);
        if (vertex >= seg_start && (last || vertex <= seg_end)) {
          best_s = vertex;
          break;
        }
      }
      if (last) break;
      seg_start = seg_end;
    }
    if (best_s < 0.0) best_s = seg_start;

    if (best_s <= 0.0) {
      converged = true;  // no descent within rounding: fixed point
      break;
    }

    beta += best_s * dbeta;
    b += best_s * db;
    residual -= best_s * q;

    const double new_obj = objective_from_state(gram, C, epsilon, beta, residual);
    const double drop = obj - new_obj;
    obj = std::min(obj, new_obj);
    sol.objective_history.push_back(obj);
    if (drop >= 0.0 && drop <= options.objective_tol * std::max(1.0, std::abs(obj))) {
      ++iter;
      converged = true;
      break;
    }
  }

  if (!polished_exact) attempt_polish();

  sol.u = fs.vectors.transpose() * beta;
  sol.b = b;
  sol.objective = svr_objective(fs, C, epsilon, sol.u, sol.b);
  sol.iterations = iter;
  sol.converged = converged;
  return sol;
}

}  // namespace amod
