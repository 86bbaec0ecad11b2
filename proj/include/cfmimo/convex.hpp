#pragma once

#include <string>
#include <vector>

#include "cfmimo/types.hpp"

namespace cfmimo {

/// Convex program
///
///   maximize   sum_{i in log_vars} ln(1 + x_i)
///   subject to sum_j q_j x_j^2 + sum_j c_j x_j <= rhs   (q_j >= 0)
///
/// i.e. every constraint is linear plus a separable convex quadratic. This is
/// exactly the shape of the inner-approximation subproblems, and keeps
/// Hessians cheap to assemble.
struct Term {
  int var;
  double coef;
};

struct Constraint {
  std::vector<Term> quad;
  std::vector<Term> lin;
  double rhs = 0.0;
  std::string tag;

  double value(const RVector& x) const;  // lhs - rhs, feasible when <= 0
};

struct ConvexProgram {
  int num_vars = 0;
  std::vector<int> log_vars;
  std::vector<Constraint> constraints;

  double objective(const RVector& x) const;
  /// Largest constraint value (<= 0 means feasible).
  double max_violation(const RVector& x) const;
  bool strictly_feasible(const RVector& x) const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kStalled };

const char* to_string(SolveStatus s);

struct SolveOptions {
  double tol = 1e-8;        // target duality gap m / t
  double t0 = 1.0;
  double mu = 10.0;
  int max_newton = 200;     // per centering step
  double ridge = 1e-13;     // relative diagonal regularisation
};

struct SolveResult {
  SolveStatus status = SolveStatus::kStalled;
  RVector x;
  double objective = 0.0;
  double gap = 0.0;           // m / t at exit
  double newton_decrement = 0.0;
  int newton_steps = 0;
  /// Phase-I certificate: smallest achievable max constraint value found.
  /// Positive means no strictly feasible point exists (to tolerance).
  double infeasibility = 0.0;
  std::string message;
};

/// Log-barrier interior-point method with dense Newton steps. `start` is used
/// directly when strictly feasible, otherwise a phase-I problem is solved from
/// it first.
SolveResult solve_convex(const ConvexProgram& prog, const RVector& start,
                         const SolveOptions& opts = {});

}  // namespace cfmimo
