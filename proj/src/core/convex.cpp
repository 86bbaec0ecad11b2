#include "cfmimo/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cfmimo {

double Constraint::value(const RVector& x) const {
  double v = -rhs;
  for (const auto& t : quad) v += t.coef * x(t.var) * x(t.var);
  for (const auto& t : lin) v += t.coef * x(t.var);
  return v;
}

double ConvexProgram::objective(const RVector& x) const {
  double f = 0.0;
  for (int i : log_vars) f += std::log1p(x(i));
  return f;
}

double ConvexProgram::max_violation(const RVector& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) worst = std::max(worst, c.value(x));
  return worst;
}

bool ConvexProgram::strictly_feasible(const RVector& x) const {
  for (int i : log_vars)
    if (!(x(i) > -1.0)) return false;
  for (const auto& c : constraints)
    if (!(c.value(x) < 0.0)) return false;
  return true;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kStalled: return "stalled";
  }
  return "unknown";
}

namespace {

// Barrier problem  minimize t * f(x) - sum_j ln(-g_j(x)).
// f is -sum ln(1 + x_i) over log_vars, or x(linear_var) when linear_var >= 0.
struct BarrierProblem {
  int n = 0;
  std::vector<int> log_vars;
  int linear_var = -1;
  std::vector<Constraint> cons;

  bool in_domain(const RVector& x) const {
    for (int i : log_vars)
      if (!(x(i) > -1.0)) return false;
    for (const auto& c : cons)
      if (!(c.value(x) < 0.0)) return false;
    return true;
  }

  double f(const RVector& x) const {
    if (linear_var >= 0) return x(linear_var);
    double v = 0.0;
    for (int i : log_vars) v -= std::log1p(x(i));
    return v;
  }

  double phi(const RVector& x, double t) const {
    double v = t * f(x);
    for (const auto& c : cons) v -= std::log(-c.value(x));
    return v;
  }
};

// Rescales every constraint so its largest coefficient or rhs has magnitude 1.
Constraint normalized(const Constraint& c) {
  double s = std::abs(c.rhs);
  for (const auto& t : c.quad) s = std::max(s, std::abs(t.coef));
  for (const auto& t : c.lin) s = std::max(s, std::abs(t.coef));
  if (!(s > 0.0)) return c;
  Constraint out = c;
  out.rhs /= s;
  for (auto& t : out.quad) t.coef /= s;
  for (auto& t : out.lin) t.coef /= s;
  return out;
}

// Smallest s > 0 with g + b s + a s^2 = 0 given g < 0 and a >= 0.
double first_root(double a, double b, double g) {
  if (a <= 0.0) return b > 0.0 ? -g / b : std::numeric_limits<double>::infinity();
  const double disc = b * b - 4.0 * a * g;  // > b^2 since g < 0
  // Stable form of (-b + sqrt(disc)) / (2a).
  return b >= 0.0 ? (-2.0 * g) / (b + std::sqrt(disc)) : (-b + std::sqrt(disc)) / (2.0 * a);
}

struct CenterResult {
  RVector x;
  int steps = 0;
  double decrement = 0.0;
  bool stalled = false;
  bool unbounded = false;
};

// Damped Newton centering. `early_exit` lets phase I stop at the first
// strictly feasible point of the original constraints.
template <typename EarlyExit>
CenterResult center(const BarrierProblem& bp, RVector x, double t, const SolveOptions& opts,
                    EarlyExit&& early_exit) {
  CenterResult out;
  const int n = bp.n;
  RVector grad(n);
  RMatrix hess(n, n);
  RVector cg = RVector::Zero(n);
  std::vector<int> touched;
  touched.reserve(static_cast<std::size_t>(n));
  std::vector<char> mark(static_cast<std::size_t>(n), 0);

  for (int it = 0; it < opts.max_newton; ++it) {
    grad.setZero();
    hess.setZero();
    if (bp.linear_var >= 0) {
      grad(bp.linear_var) += t;
    } else {
      for (int i : bp.log_vars) {
        const double u = 1.0 + x(i);
        grad(i) -= t / u;
        hess(i, i) += t / (u * u);
      }
    }
    for (const auto& c : bp.cons) {
      const double g = c.value(x);
      const double inv = -1.0 / g;  // > 0
      touched.clear();
      auto touch = [&](int v, double d) {
        if (!mark[static_cast<std::size_t>(v)]) {
          mark[static_cast<std::size_t>(v)] = 1;
          touched.push_back(v);
          cg(v) = 0.0;
        }
        cg(v) += d;
      };
      for (const auto& q : c.quad) {
        touch(q.var, 2.0 * q.coef * x(q.var));
        hess(q.var, q.var) += 2.0 * q.coef * inv;
      }
      for (const auto& l : c.lin) touch(l.var, l.coef);
      const double inv2 = inv * inv;
      for (int a : touched) {
        grad(a) += cg(a) * inv;
        const double ca = cg(a) * inv2;
        for (int b : touched) hess(a, b) += ca * cg(b);
      }
      for (int a : touched) mark[static_cast<std::size_t>(a)] = 0;
    }

    RVector d(n);
    for (int i = 0; i < n; ++i) d(i) = 1.0 / std::sqrt(std::max(hess(i, i), 1e-300));
    RMatrix hs = d.asDiagonal() * hess * d.asDiagonal();
    hs.diagonal().array() += opts.ridge;
    const Eigen::LDLT<RMatrix> ldlt(hs);
    const RVector step = d.cwiseProduct(ldlt.solve(-d.cwiseProduct(grad)));
    const double slope = grad.dot(step);
    out.decrement = std::sqrt(std::max(-slope, 0.0));
    ++out.steps;
    if (!step.allFinite()) {
      out.stalled = true;
      break;
    }
    if (-slope / 2.0 <= 1e-9) break;

    // Along the ray each constraint is g + b s + a s^2 with a >= 0, so the
    // largest step that stays strictly inside follows from its positive root.
    double s_max = std::numeric_limits<double>::infinity();
    for (const auto& c : bp.cons) {
      const double g = c.value(x);
      double a = 0.0;
      double b = 0.0;
      for (const auto& q : c.quad) {
        a += q.coef * step(q.var) * step(q.var);
        b += 2.0 * q.coef * x(q.var) * step(q.var);
      }
      for (const auto& l : c.lin) b += l.coef * step(l.var);
      s_max = std::min(s_max, first_root(a, b, g));
    }
    for (int i : bp.log_vars)
      if (step(i) < 0.0) s_max = std::min(s_max, (1.0 + x(i)) / -step(i));
    double s = std::min(1.0, 0.99 * s_max);
    RVector trial = x + s * step;
    while (!bp.in_domain(trial) && s > 1e-18) {
      s *= 0.5;
      trial = x + s * step;
    }
    const double phi0 = bp.phi(x, t);
    while (s > 1e-18 && !(bp.phi(trial, t) <= phi0 + 0.25 * s * slope)) {
      s *= 0.5;
      trial = x + s * step;
    }
    if (s <= 1e-18) {
      out.stalled = true;
      break;
    }
    const double phi1 = bp.phi(trial, t);
    x = trial;
    // Progress below round-off: the centre is as accurate as it will get.
    if (phi0 - phi1 <= 1e-14 * std::max(1.0, std::abs(phi0))) break;
    if (x.lpNorm<Eigen::Infinity>() > 1e15) {
      out.unbounded = true;
      break;
    }
    if (early_exit(x)) break;
  }
  out.x = std::move(x);
  return out;
}

}  // namespace

SolveResult solve_convex(const ConvexProgram& prog, const RVector& start,
                         const SolveOptions& opts) {
  if (start.size() != prog.num_vars) {
    throw Error(ErrorCode::kInvalidArgument, "solve_convex: start has the wrong dimension");
  }
  SolveResult res;
  std::vector<Constraint> cons;
  cons.reserve(prog.constraints.size());
  for (const auto& c : prog.constraints) cons.push_back(normalized(c));
  const double m = static_cast<double>(std::max<std::size_t>(cons.size(), 1));

  RVector x = start;
  ConvexProgram scaled{prog.num_vars, prog.log_vars, cons};
  if (!scaled.strictly_feasible(x)) {
    // Phase I: minimize s subject to g_j(x) <= s.
    BarrierProblem p1;
    p1.n = prog.num_vars + 1;
    p1.linear_var = prog.num_vars;
    for (const auto& c : cons) {
      Constraint e = c;
      e.lin.push_back({prog.num_vars, -1.0});
      p1.cons.push_back(std::move(e));
    }
    // Domain of the log objective: x_i > -1, kept strict through the slack.
    for (int i : prog.log_vars) {
      Constraint e;
      e.lin = {{i, -1.0}, {prog.num_vars, -1.0}};
      e.rhs = 1.0 - 1e-9;
      p1.cons.push_back(std::move(e));
    }
    RVector z(p1.n);
    z.head(prog.num_vars) = x;
    double worst = scaled.max_violation(x);
    for (int i : prog.log_vars) worst = std::max(worst, -x(i) - 1.0);
    z(prog.num_vars) = worst + 1.0;
    const double m1 = static_cast<double>(p1.cons.size());
    double t = opts.t0;
    bool found = false;
    auto feasible_now = [&](const RVector& zz) {
      return scaled.strictly_feasible(zz.head(prog.num_vars));
    };
    for (int outer = 0; outer < 60; ++outer) {
      auto c = center(p1, z, t, opts, feasible_now);
      res.newton_steps += c.steps;
      z = c.x;
      if (feasible_now(z)) {
        found = true;
        break;
      }
      if (c.stalled || m1 / t < opts.tol) break;
      t *= opts.mu;
    }
    if (!found) {
      res.status = SolveStatus::kInfeasible;
      res.x = z.head(prog.num_vars);
      res.infeasibility = z(prog.num_vars);
      res.message = "phase I found no strictly feasible point (min max-violation " +
                    std::to_string(res.infeasibility) + ")";
      return res;
    }
    x = z.head(prog.num_vars);
  }

  BarrierProblem p2;
  p2.n = prog.num_vars;
  p2.log_vars = prog.log_vars;
  p2.cons = std::move(cons);
  double t = opts.t0;
  auto never = [](const RVector&) { return false; };
  bool stalled = false;
  for (;;) {
    auto c = center(p2, x, t, opts, never);
    res.newton_steps += c.steps;
    res.newton_decrement = c.decrement;
    x = c.x;
    if (c.unbounded) {
      res.status = SolveStatus::kUnbounded;
      res.x = x;
      res.objective = prog.objective(x);
      res.message = "iterates diverged";
      return res;
    }
    if (c.stalled) stalled = true;
    if (m / t < opts.tol) break;
    if (stalled) break;
    t *= opts.mu;
  }
  res.x = x;
  res.objective = prog.objective(x);
  res.gap = m / t;
  res.status = stalled ? SolveStatus::kStalled : SolveStatus::kOptimal;
  if (stalled) res.message = "line search stalled at gap " + std::to_string(res.gap);
  return res;
}

}  // namespace cfmimo
