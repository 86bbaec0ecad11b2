#include "cfmimo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cfmimo {

namespace {

constexpr double kRspEpsilon = 1e-6;
// psi starts this far above the exact denominator so every constraint is strict.
constexpr double kPsiMargin = 1e-4;
constexpr int kScaleSteps = 24;
// Relative slack on the floors demanded from the feasibility program.
constexpr double kFloorMargin = 1e-3;

RVector squares(const RVector& v) { return v.cwiseAbs2(); }

bool all_above(const RVector& v, double floor) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!(v(i) > floor)) return false;
  return true;
}

}  // namespace

double surrogate_fr(double x, double y, double x0, double y0) {
  if (!(y0 > 0.0)) throw Error(ErrorCode::kDomain, "surrogate_fr: y0 must be positive");
  const double r = x0 / y0;
  return 2.0 * r * x - r * r * y;
}

double surrogate_qu(double x, double x0) { return 2.0 * x0 * x - x0 * x0; }

double sinr_floor(double rate_bits) { return std::exp2(rate_bits) - 1.0; }

RVector ScaModel::dl_den(const RVector& s, const RVector& q) const {
  RVector d = e_dl * squares(s);
  if (q.size() > 0) d += f_dl * squares(q);
  return d.array() + 1.0;
}

RVector ScaModel::ul_den(const RVector& s, const RVector& q) const {
  RVector d = g_ul * squares(q);
  if (s.size() > 0) d += s_ul * squares(s);
  return d.array() + 1.0;
}

RVector ScaModel::dl_sinr(const RVector& s, const RVector& q) const {
  return a_dl.cwiseProduct(squares(s)).cwiseQuotient(dl_den(s, q));
}

RVector ScaModel::ul_sinr(const RVector& s, const RVector& q) const {
  return b_ul.cwiseProduct(squares(q)).cwiseQuotient(ul_den(s, q));
}

ScaModel make_sca_model(const ZfModel& zf, const SystemConfig& cfg, bool half_duplex) {
  ScaModel m;
  const double sigma2 = zf.noise;
  const double pmax = zf.ul_power_max;
  m.noise = sigma2;
  m.ul_power_max = pmax;
  m.ap_budget = zf.ap_power_max / sigma2;
  m.lambda_min_dl = sinr_floor(cfg.rate_floor_dl);
  m.lambda_min_ul = sinr_floor(cfg.rate_floor_ul);

  m.a_dl = zf.c_dl;
  m.e_dl = zf.e_dl;
  m.f_dl = zf.cci * (pmax / sigma2);
  m.q_ap = zf.block_power;

  const RVector inv_a2 = zf.a2.cwiseInverse();
  m.b_ul = (zf.c_ul * (pmax / sigma2)).cwiseProduct(inv_a2);
  m.g_ul = inv_a2.asDiagonal() * zf.e_ul * (pmax / sigma2);
  m.s_ul = inv_a2.asDiagonal() * zf.si;
  if (half_duplex) {
    m.f_dl.setZero();
    m.s_ul.setZero();
  }
  return m;
}

double SolveState::objective() const {
  double f = 0.0;
  for (Eigen::Index i = 0; i < lambda_dl.size(); ++i) f += std::log1p(lambda_dl(i));
  for (Eigen::Index i = 0; i < lambda_ul.size(); ++i) f += std::log1p(lambda_ul(i));
  return f;
}

RVector pack_state(const SolveState& st, const ScaModel& model) {
  const VarLayout v{model.num_dl(), model.num_ul()};
  RVector x(v.size());
  for (int k = 0; k < v.k; ++k) {
    x(v.s(k)) = std::sqrt(std::max(st.omega(k), 0.0) / model.noise);
    x(v.lambda_dl(k)) = st.lambda_dl(k);
    x(v.psi_dl(k)) = st.psi_dl(k);
  }
  for (int l = 0; l < v.l; ++l) {
    x(v.q(l)) = std::sqrt(std::max(st.p(l), 0.0) / model.ul_power_max);
    x(v.lambda_ul(l)) = st.lambda_ul(l);
    x(v.psi_ul(l)) = st.psi_ul(l);
  }
  return x;
}

SolveState unpack_state(const RVector& x, const ScaModel& model) {
  const VarLayout v{model.num_dl(), model.num_ul()};
  SolveState st;
  st.omega = x.segment(v.s(0), v.k).cwiseAbs2() * model.noise;
  st.p = x.segment(v.q(0), v.l).cwiseAbs2() * model.ul_power_max;
  st.lambda_dl = x.segment(v.lambda_dl(0), v.k);
  st.lambda_ul = x.segment(v.lambda_ul(0), v.l);
  st.psi_dl = x.segment(v.psi_dl(0), v.k);
  st.psi_ul = x.segment(v.psi_ul(0), v.l);
  return st;
}

ConvexProgram build_subproblem(const SolveState& st, const ScaModel& model) {
  const VarLayout v{model.num_dl(), model.num_ul()};
  const RVector x0 = pack_state(st, model);
  ConvexProgram prog;
  prog.num_vars = v.size();
  for (int k = 0; k < v.k; ++k) prog.log_vars.push_back(v.lambda_dl(k));
  for (int l = 0; l < v.l; ++l) prog.log_vars.push_back(v.lambda_ul(l));

  auto add_quad = [](Constraint& c, int var, double coef) {
    if (coef != 0.0) c.quad.push_back({var, coef});
  };

  for (int k = 0; k < v.k; ++k) {
    const double s0 = x0(v.s(k));
    const double psi0 = x0(v.psi_dl(k));
    if (!(psi0 > 0.0)) throw Error(ErrorCode::kInfeasible, "non-positive DL denominator proxy");
    // lambda <= a * h_fr(s, psi)
    const double r = s0 / psi0;
    Constraint c;
    c.tag = "dl_sinr";
    c.lin = {{v.lambda_dl(k), 1.0}, {v.s(k), -2.0 * model.a_dl(k) * r},
             {v.psi_dl(k), model.a_dl(k) * r * r}};
    prog.constraints.push_back(std::move(c));

    Constraint d;
    d.tag = "dl_den";
    for (int j = 0; j < v.k; ++j) add_quad(d, v.s(j), model.e_dl(k, j));
    for (int l = 0; l < v.l; ++l) add_quad(d, v.q(l), model.f_dl(k, l));
    d.lin = {{v.psi_dl(k), -1.0}};
    d.rhs = -1.0;
    prog.constraints.push_back(std::move(d));
  }
  for (int l = 0; l < v.l; ++l) {
    const double q0 = x0(v.q(l));
    const double psi0 = x0(v.psi_ul(l));
    if (!(psi0 > 0.0)) throw Error(ErrorCode::kInfeasible, "non-positive UL denominator proxy");
    const double r = q0 / psi0;
    Constraint c;
    c.tag = "ul_sinr";
    c.lin = {{v.lambda_ul(l), 1.0}, {v.q(l), -2.0 * model.b_ul(l) * r},
             {v.psi_ul(l), model.b_ul(l) * r * r}};
    prog.constraints.push_back(std::move(c));

    Constraint d;
    d.tag = "ul_den";
    for (int j = 0; j < v.l; ++j) add_quad(d, v.q(j), model.g_ul(l, j));
    for (int k = 0; k < v.k; ++k) add_quad(d, v.s(k), model.s_ul(l, k));
    d.lin = {{v.psi_ul(l), -1.0}};
    d.rhs = -1.0;
    prog.constraints.push_back(std::move(d));
  }
  for (int m = 0; m < model.num_aps(); ++m) {
    Constraint c;
    c.tag = "ap_power";
    for (int k = 0; k < v.k; ++k) add_quad(c, v.s(k), model.q_ap(m, k));
    if (c.quad.empty()) continue;
    c.rhs = model.ap_budget;
    prog.constraints.push_back(std::move(c));
  }
  for (int l = 0; l < v.l; ++l) {
    Constraint c;
    c.tag = "ul_power";
    c.quad = {{v.q(l), 1.0}};
    c.rhs = 1.0;
    prog.constraints.push_back(std::move(c));
    prog.constraints.push_back({{}, {{v.q(l), -1.0}}, 0.0, "ul_sign"});
    prog.constraints.push_back({{}, {{v.lambda_ul(l), -1.0}}, -model.lambda_min_ul, "ul_floor"});
  }
  for (int k = 0; k < v.k; ++k) {
    prog.constraints.push_back({{}, {{v.s(k), -1.0}}, 0.0, "dl_sign"});
    prog.constraints.push_back({{}, {{v.lambda_dl(k), -1.0}}, -model.lambda_min_dl, "dl_floor"});
  }
  return prog;
}

SubproblemResult solve_subproblem(const ConvexProgram& prog, const SolveState& start,
                                  const ScaModel& model, const SystemConfig& cfg) {
  SolveOptions opts;
  opts.tol = cfg.solver_tol;
  SubproblemResult out;
  out.solver = solve_convex(prog, pack_state(start, model), opts);
  out.state = unpack_state(out.solver.x, model);
  return out;
}

double max_residual(const SolveState& st, const ScaModel& model) {
  const RVector s = (st.omega / model.noise).cwiseMax(0.0).cwiseSqrt();
  const RVector q = (st.p / model.ul_power_max).cwiseMax(0.0).cwiseSqrt();
  double worst = -std::numeric_limits<double>::infinity();
  if (model.num_dl() > 0) {
    const RVector g = model.dl_sinr(s, q);
    worst = std::max(worst, (st.lambda_dl - g).maxCoeff());
    worst = std::max(worst, model.lambda_min_dl - g.minCoeff());
    const RVector power = model.q_ap * squares(s);
    worst = std::max(worst, (power.array() / model.ap_budget - 1.0).maxCoeff());
  }
  if (model.num_ul() > 0) {
    const RVector g = model.ul_sinr(s, q);
    worst = std::max(worst, (st.lambda_ul - g).maxCoeff());
    worst = std::max(worst, model.lambda_min_ul - g.minCoeff());
    worst = std::max(worst, (squares(q).array() - 1.0).maxCoeff());
  }
  return std::isfinite(worst) ? worst : 0.0;
}

namespace {

// Completes (omega, p) into a strictly interior iterate.
SolveState interior_state(const RVector& s, const RVector& q, const ScaModel& model) {
  SolveState st;
  st.omega = squares(s) * model.noise;
  st.p = squares(q) * model.ul_power_max;
  st.psi_dl = model.dl_den(s, q) * (1.0 + kPsiMargin);
  st.psi_ul = model.ul_den(s, q) * (1.0 + kPsiMargin);
  const RVector gd = model.a_dl.cwiseProduct(squares(s)).cwiseQuotient(st.psi_dl);
  const RVector gu = model.b_ul.cwiseProduct(squares(q)).cwiseQuotient(st.psi_ul);
  st.lambda_dl = (gd.array() + model.lambda_min_dl) * 0.5;
  st.lambda_ul = (gu.array() + model.lambda_min_ul) * 0.5;
  return st;
}

}  // namespace

InitResult initialize_feasible(const ScaModel& model) {
  const int k_count = model.num_dl();
  const int l_count = model.num_ul();
  InitResult out;

  RVector s0 = RVector::Zero(k_count);
  if (k_count > 0) {
    const double worst_ap = model.q_ap.rowwise().sum().maxCoeff();
    const double omega = worst_ap > 0.0 ? 0.5 * model.ap_budget / worst_ap : 0.0;
    s0.setConstant(std::sqrt(omega));
  }
  const RVector q0 = RVector::Constant(l_count, std::sqrt(0.5));

  {
    const RVector gd = model.dl_sinr(s0, q0);
    const RVector gu = model.ul_sinr(s0, q0);
    const double fd = model.lambda_min_dl * (1.0 + kPsiMargin);
    const double fu = model.lambda_min_ul * (1.0 + kPsiMargin);
    for (int k = 0; k < k_count; ++k)
      if (!(gd(k) > fd)) out.dl_short.push_back(k);
    for (int l = 0; l < l_count; ++l)
      if (!(gu(l) > fu)) out.ul_short.push_back(l);
  }

  // Geometric grid over (DL scale, UL scale), smallest total reduction first.
  for (int total = 0; total <= 2 * kScaleSteps; ++total) {
    for (int i = std::max(0, total - kScaleSteps); i <= std::min(total, kScaleSteps); ++i) {
      const int j = total - i;
      ++out.attempts;
      const double a = std::ldexp(1.0, -i);
      const double b = std::ldexp(1.0, -j);
      const RVector s = s0 * std::sqrt(a);
      const RVector q = q0 * std::sqrt(b);
      SolveState st = interior_state(s, q, model);
      const double fd = model.lambda_min_dl * (1.0 + kPsiMargin);
      const double fu = model.lambda_min_ul * (1.0 + kPsiMargin);
      const RVector gd = model.a_dl.cwiseProduct(squares(s)).cwiseQuotient(st.psi_dl);
      const RVector gu = model.b_ul.cwiseProduct(squares(q)).cwiseQuotient(st.psi_ul);
      if ((k_count == 0 || all_above(gd, fd)) && (l_count == 0 || all_above(gu, fu))) {
        out.feasible = true;
        out.dl_scale = a;
        out.ul_scale = b;
        out.state = std::move(st);
        return out;
      }
    }
  }

  // With ZF the floors are linear in (omega, p), so feasibility is an exact
  // linear program in u = omega / sigma^2 and v = p / P^max. Its analytic
  // centre is a well-interior starting point.
  const double fd = model.lambda_min_dl * (1.0 + kFloorMargin);
  const double fu = model.lambda_min_ul * (1.0 + kFloorMargin);
  ConvexProgram lp;
  lp.num_vars = k_count + l_count;
  auto u = [](int k) { return k; };
  auto v = [k_count](int l) { return k_count + l; };
  for (int k = 0; k < k_count; ++k) {
    Constraint c;
    c.tag = "dl_floor";
    for (int j = 0; j < k_count; ++j) {
      const double coef = fd * model.e_dl(k, j) - (j == k ? model.a_dl(k) : 0.0);
      if (coef != 0.0) c.lin.push_back({u(j), coef});
    }
    for (int l = 0; l < l_count; ++l)
      if (model.f_dl(k, l) != 0.0) c.lin.push_back({v(l), fd * model.f_dl(k, l)});
    c.rhs = -fd;
    lp.constraints.push_back(std::move(c));
    lp.constraints.push_back({{}, {{u(k), -1.0}}, 0.0, "dl_sign"});
  }
  for (int l = 0; l < l_count; ++l) {
    Constraint c;
    c.tag = "ul_floor";
    for (int j = 0; j < l_count; ++j) {
      const double coef = fu * model.g_ul(l, j) - (j == l ? model.b_ul(l) : 0.0);
      if (coef != 0.0) c.lin.push_back({v(j), coef});
    }
    for (int k = 0; k < k_count; ++k)
      if (model.s_ul(l, k) != 0.0) c.lin.push_back({u(k), fu * model.s_ul(l, k)});
    c.rhs = -fu;
    lp.constraints.push_back(std::move(c));
    lp.constraints.push_back({{}, {{v(l), -1.0}}, 0.0, "ul_sign"});
    lp.constraints.push_back({{}, {{v(l), 1.0}}, 1.0, "ul_power"});
  }
  for (int m = 0; m < model.num_aps(); ++m) {
    Constraint c;
    c.tag = "ap_power";
    for (int k = 0; k < k_count; ++k)
      if (model.q_ap(m, k) != 0.0) c.lin.push_back({u(k), model.q_ap(m, k)});
    if (c.lin.empty()) continue;
    c.rhs = model.ap_budget;
    lp.constraints.push_back(std::move(c));
  }
  RVector start(lp.num_vars);
  start << s0.cwiseAbs2(), q0.cwiseAbs2();
  SolveOptions opts;
  opts.tol = 1e-3;  // only an interior point is needed
  const SolveResult res = solve_convex(lp, start, opts);
  ++out.attempts;
  if (res.status != SolveStatus::kInfeasible && res.status != SolveStatus::kUnbounded &&
      lp.strictly_feasible(res.x)) {
    const RVector s = res.x.head(k_count).cwiseMax(0.0).cwiseSqrt();
    const RVector q = res.x.tail(l_count).cwiseMax(0.0).cwiseMin(1.0).cwiseSqrt();
    out.feasible = true;
    out.state = interior_state(s, q, model);
    return out;
  }
  std::ostringstream msg;
  msg << "rate floors unattainable: " << out.dl_short.size() << " DL and "
      << out.ul_short.size() << " UL UEs below their floors at the uniform point; "
      << "the floor system has no strictly feasible point (certificate "
      << res.infeasibility << ")";
  out.message = msg.str();
  return out;
}

SolveState run_sca(const SolveState& init, const ScaModel& model, const SystemConfig& cfg) {
  SolveState cur = init;
  cur.trace.clear();
  cur.converged = false;
  cur.iteration = 0;
  cur.trace.push_back({0, cur.objective(), max_residual(cur, model), 0});
  if (model.num_dl() + model.num_ul() == 0) {
    cur.converged = true;
    return cur;
  }
  for (int it = 1; it <= cfg.sca_max_iter; ++it) {
    const ConvexProgram prog = build_subproblem(cur, model);
    const auto sub = solve_subproblem(prog, cur, model, cfg);
    const auto status = sub.solver.status;
    if (status == SolveStatus::kInfeasible || status == SolveStatus::kUnbounded ||
        !prog.strictly_feasible(sub.solver.x)) {
      cur.message = std::string("subproblem ") + to_string(status) + ": " + sub.solver.message;
      break;
    }
    double gain = sub.state.objective() - cur.objective();
    if (gain > 0.0) {
      auto trace = std::move(cur.trace);
      cur = sub.state;
      cur.trace = std::move(trace);
    } else {
      gain = 0.0;  // keep the previous iterate so the trace never decreases
    }
    cur.iteration = it;
    cur.trace.push_back({it, cur.objective(), max_residual(cur, model), sub.solver.newton_steps});
    if (gain < cfg.sca_tol) {
      cur.converged = true;
      break;
    }
  }
  if (!cur.converged && cur.message.empty()) cur.message = "iteration cap reached";
  return cur;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "iteration,objective_nats,max_constraint_residual,solver_newton_steps\n";
  out.precision(12);
  for (const auto& r : trace)
    out << r.iteration << ',' << r.objective_nats << ',' << r.max_residual << ','
        << r.newton_steps << '\n';
}

Association associate(const CMatrix& w, const EstimateSet& es, const SystemConfig& cfg) {
  const Eigen::Index k_count = w.cols();
  const int nm = cfg.antennas_per_ap;
  const double thr = cfg.threshold();
  Association a;
  a.alpha = AssocMatrix::Zero(k_count, cfg.num_aps);
  a.r_sp = RMatrix::Zero(k_count, cfg.num_aps);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double total = std::norm(es.h_dl_hat.row(k).dot(w.col(k).conjugate())) / cfg.noise_power;
    for (int m = 0; m < cfg.num_aps; ++m) {
      const Eigen::Index off = static_cast<Eigen::Index>(m) * nm;
      const cplx part = (es.h_dl_hat.row(k).segment(off, nm) * w.col(k).segment(off, nm))(0);
      const double r = std::norm(part) / cfg.noise_power / (total + kRspEpsilon);
      a.r_sp(k, m) = r;
      a.alpha(k, m) = r > thr ? 1 : 0;
    }
  }
  return a;
}

void refine_with_association(OptimizeResult& run, const EstimateSet& design,
                             const ChannelSet& ch, const SystemConfig& cfg,
                             const OptimizeOptions& opts) {
  const Eigen::Index k_count = design.h_dl_hat.rows();
  const int nm = cfg.antennas_per_ap;
  const RMatrix rank = run.assoc.r_sp;
  AssocMatrix alpha = run.assoc.alpha;
  run.forced_pairs = AssocMatrix::Zero(k_count, cfg.num_aps);
  if (k_count == 0) return;

  for (int round = 1; round <= opts.max_assoc_rounds; ++round) {
    if (round == 1 && (alpha.array() == 1).all()) return;  // nothing pruned

    // Each restricted column needs at least K antennas to null the other UEs.
    AssocMatrix forced = run.forced_pairs;
    for (Eigen::Index k = 0; k < k_count; ++k) {
      Eigen::Index served = 0;
      for (int m = 0; m < cfg.num_aps; ++m) served += alpha(k, m);
      while (served * nm < k_count) {
        int best = -1;
        for (int m = 0; m < cfg.num_aps; ++m)
          if (!alpha(k, m) && (best < 0 || rank(k, m) > rank(k, best))) best = m;
        if (best < 0) break;
        alpha(k, best) = 1;
        forced(k, best) = 1;
        ++served;
      }
    }

    ZfOperators zf;
    try {
      zf = zf_operators(design, cfg, alpha);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumeric) throw;
      run.message = std::string("kept unrestricted solution: ") + e.what();
      return;
    }
    const ScaModel model =
        make_sca_model(build_zf_model(zf, design, ch, cfg), cfg, opts.half_duplex);
    const InitResult init = initialize_feasible(model);
    if (!init.feasible) {
      run.message = "kept previous solution: restricted problem " + init.message;
      return;
    }
    SolveState st = run_sca(init.state, model, cfg);
    BeamformerSet beams = zf_beams(zf, st.omega, st.p);
    Association next = associate(beams.w, design, cfg);

    run.zf = std::move(zf);
    run.state = std::move(st);
    run.beams = std::move(beams);
    run.refined = true;
    run.converged = run.state.converged;
    run.forced_pairs = forced;
    run.forced = (forced.array() != 0).any();
    run.assoc_rounds = round;
    run.assoc.r_sp = next.r_sp;
    run.assoc.alpha = alpha;

    AssocMatrix pruned = next.alpha;
    for (Eigen::Index k = 0; k < k_count; ++k)
      for (int m = 0; m < cfg.num_aps; ++m)
        if (forced(k, m)) pruned(k, m) = 1;
    if (pruned == alpha) return;
    alpha = pruned;
  }
  run.message = "association round cap reached";
}

OptimizeResult optimize_zf(const EstimateSet& design, const ChannelSet& ch,
                           const SystemConfig& cfg, const OptimizeOptions& opts) {
  OptimizeResult run;
  run.zf = zf_operators(design, cfg);
  const ScaModel model =
      make_sca_model(build_zf_model(run.zf, design, ch, cfg), cfg, opts.half_duplex);
  const InitResult init = initialize_feasible(model);
  if (!init.feasible) {
    run.message = init.message;
    return run;
  }
  run.state = run_sca(init.state, model, cfg);
  run.first_pass = run.state;
  run.feasible = true;
  run.converged = run.state.converged;
  run.message = run.state.message;
  run.beams = zf_beams(run.zf, run.state.omega, run.state.p);
  run.assoc = associate(run.beams.w, design, cfg);
  run.forced_pairs = AssocMatrix::Zero(run.assoc.alpha.rows(), run.assoc.alpha.cols());
  if (opts.refine) {
    refine_with_association(run, design, ch, cfg, opts);
  } else {
    run.assoc.alpha.setOnes();
  }
  if (!run.refined) run.assoc.alpha.setOnes();  // unrestricted ZF serves from every AP
  return run;
}

namespace {

SeReport summarize(RVector dl, RVector ul, bool half_duplex) {
  SeReport r;
  const double scale = half_duplex ? 0.5 : 1.0;
  r.dl_rate_bits = dl.unaryExpr([](double g) { return std::log1p(g) / std::log(2.0); });
  r.ul_rate_bits = ul.unaryExpr([](double g) { return std::log1p(g) / std::log(2.0); });
  r.nats = scale * (dl.unaryExpr([](double g) { return std::log1p(g); }).sum() +
                    ul.unaryExpr([](double g) { return std::log1p(g); }).sum());
  r.bits = r.nats / std::log(2.0);
  r.dl_sinr = std::move(dl);
  r.ul_sinr = std::move(ul);
  return r;
}

}  // namespace

SeReport spectral_efficiency(const BeamformerSet& beams, const AssocMatrix& alpha,
                             const EstimateSet& es, const ChannelSet& ch,
                             const SystemConfig& cfg, bool half_duplex) {
  const RVector none_p;
  const CMatrix none_w(beams.w.rows(), 0);
  RVector dl = dl_sinr_general(beams.w, half_duplex ? none_p : beams.p, alpha, es, cfg);
  RVector ul = ul_sinr_general(half_duplex ? none_w : beams.w, beams.p, alpha, beams.a, es, ch, cfg);
  return summarize(std::move(dl), std::move(ul), half_duplex);
}

SeReport spectral_efficiency_true(const BeamformerSet& beams, const AssocMatrix& alpha,
                                  const ChannelSet& ch, const SystemConfig& cfg,
                                  bool half_duplex) {
  const RVector none_p;
  const CMatrix none_w(beams.w.rows(), 0);
  RVector dl = dl_sinr_true(beams.w, half_duplex ? none_p : beams.p, alpha, ch, cfg);
  RVector ul = ul_sinr_true(half_duplex ? none_w : beams.w, beams.p, alpha, beams.a, ch, cfg);
  return summarize(std::move(dl), std::move(ul), half_duplex);
}

double effective_se(double f_se, int coherence, int training) {
  if (training < 0 || training >= coherence) {
    std::ostringstream msg;
    msg << "training length " << training << " must lie in [0, " << coherence << ")";
    throw Error(ErrorCode::kDomain, msg.str());
  }
  return f_se * static_cast<double>(coherence - training) / coherence;
}

double effective_se(double f_se, const SystemConfig& cfg) {
  return effective_se(f_se, cfg.coherence, cfg.training);
}

}  // namespace cfmimo
