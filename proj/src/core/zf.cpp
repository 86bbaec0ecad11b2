#include "cfmimo/zf.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cfmimo {

namespace {

constexpr double kMaxCondition = 1e12;

double condition_number(const CMatrix& h) {
  if (h.rows() == 0 || h.cols() == 0) return 1.0;
  Eigen::JacobiSVD<CMatrix> svd(h);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

// Pseudo-inverse of a full-row-rank matrix (rows <= cols).
CMatrix right_pinv(const CMatrix& h, const char* what) {
  if (h.rows() == 0) return CMatrix::Zero(h.cols(), 0);
  if (h.rows() > h.cols()) {
    std::ostringstream msg;
    msg << what << ": " << h.rows() << " users exceed " << h.cols() << " antennas";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  const double cond = condition_number(h);
  if (!(cond < kMaxCondition)) {
    std::ostringstream msg;
    msg << what << ": rank-deficient channel matrix (condition number " << cond << ")";
    throw Error(ErrorCode::kNumeric, msg.str());
  }
  return Eigen::CompleteOrthogonalDecomposition<CMatrix>(h).pseudoInverse();
}

CMatrix masked_precoder(const CMatrix& w, const AssocMatrix& alpha, int nm) {
  CMatrix out = w;
  for (Eigen::Index k = 0; k < w.cols(); ++k)
    for (Eigen::Index m = 0; m < alpha.cols(); ++m)
      if (!alpha(k, m)) out.col(k).segment(m * nm, nm).setZero();
  return out;
}

// ||B_m x_k||^2 for every AP block m and column k.
RMatrix column_block_power(const CMatrix& x, int num_aps, int nm) {
  RMatrix q(num_aps, x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    for (int m = 0; m < num_aps; ++m) q(m, k) = x.col(k).segment(m * nm, nm).squaredNorm();
  return q;
}

void require_alpha_shape(const AssocMatrix& alpha, Eigen::Index k, Eigen::Index m) {
  if (alpha.rows() != k || alpha.cols() != m) {
    throw Error(ErrorCode::kInvalidArgument, "association matrix has the wrong shape");
  }
}

}  // namespace

RVector ZfOperators::mask(int m) const {
  RVector b = RVector::Zero(static_cast<Eigen::Index>(num_aps) * antennas_per_ap);
  b.segment(static_cast<Eigen::Index>(m) * antennas_per_ap, antennas_per_ap).setOnes();
  return b;
}

RMatrix ZfOperators::block_power() const {
  return column_block_power(h_zf, num_aps, antennas_per_ap);
}

ZfOperators zf_operators(const EstimateSet& es, const SystemConfig& cfg) {
  ZfOperators zf;
  zf.num_aps = cfg.num_aps;
  zf.antennas_per_ap = cfg.antennas_per_ap;
  zf.h_zf = right_pinv(es.h_dl_hat, "DL zero-forcing");
  const CMatrix hu_t = es.h_ul_hat.adjoint();
  zf.a_zf = right_pinv(hu_t, "UL zero-forcing").adjoint();
  return zf;
}

ZfOperators zf_operators(const EstimateSet& es, const SystemConfig& cfg,
                         const AssocMatrix& alpha) {
  const Eigen::Index k_count = es.h_dl_hat.rows();
  const int nm = cfg.antennas_per_ap;
  require_alpha_shape(alpha, k_count, cfg.num_aps);
  ZfOperators zf = zf_operators(es, cfg);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    std::vector<Eigen::Index> cols;
    for (int m = 0; m < cfg.num_aps; ++m)
      if (alpha(k, m))
        for (int i = 0; i < nm; ++i) cols.push_back(static_cast<Eigen::Index>(m) * nm + i);
    if (static_cast<Eigen::Index>(cols.size()) < k_count) {
      std::ostringstream msg;
      msg << "restricted DL zero-forcing: UE " << k << " has " << cols.size()
          << " serving antennas for " << k_count << " users";
      throw Error(ErrorCode::kNumeric, msg.str());
    }
    CMatrix sub(k_count, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = es.h_dl_hat.col(cols[c]);
    const CMatrix pinv = right_pinv(sub, "restricted DL zero-forcing");
    zf.h_zf.col(k).setZero();
    for (std::size_t c = 0; c < cols.size(); ++c) zf.h_zf(cols[c], k) = pinv(static_cast<Eigen::Index>(c), k);
  }
  return zf;
}

double per_ap_power(const RVector& omega, const ZfOperators& zf, int m) {
  const auto nm = zf.antennas_per_ap;
  double total = 0.0;
  for (Eigen::Index k = 0; k < zf.h_zf.cols(); ++k)
    total += omega(k) * zf.h_zf.col(k).segment(static_cast<Eigen::Index>(m) * nm, nm).squaredNorm();
  return total;
}

RVector ZfModel::dl_interference(const RVector& omega, const RVector& p) const {
  RVector d = e_dl * omega;
  if (p.size() > 0) d += cci * p;
  return d.array() + noise;
}

RVector ZfModel::ul_interference(const RVector& omega, const RVector& p) const {
  RVector d = e_ul * p;
  if (omega.size() > 0) d += si * omega;
  return d + noise * a2;
}

ZfModel build_zf_model(const ZfOperators& zf, const EstimateSet& es, const ChannelSet& ch,
                       const SystemConfig& cfg) {
  const int nm = cfg.antennas_per_ap;
  ZfModel z;
  z.noise = cfg.noise_power;
  z.ap_power_max = cfg.ap_power_max();
  z.ul_power_max = cfg.ul_power_max;
  z.block_power = column_block_power(zf.h_zf, cfg.num_aps, nm);

  const CMatrix hd_hzf = es.h_dl_hat * zf.h_zf;
  z.c_dl = hd_hzf.diagonal().cwiseAbs2();
  z.e_dl = es.eps_dl * z.block_power;
  z.cci = es.g_cci_hat.cwiseAbs2() + es.eps_cci;

  const CMatrix a_hu = zf.a_zf * es.h_ul_hat;
  z.c_ul = a_hu.diagonal().cwiseAbs2();
  const RMatrix a_block = column_block_power(zf.a_zf.transpose(), cfg.num_aps, nm);  // M x L
  z.e_ul = a_block.transpose() * es.eps_ul;
  z.si = (zf.a_zf * ch.g_aa * zf.h_zf).cwiseAbs2();
  z.a2 = zf.a_zf.rowwise().squaredNorm();
  return z;
}

RVector dl_sinr_zf(const RVector& omega, const RVector& p, const ZfModel& model) {
  const RVector den = model.dl_interference(omega, p);
  return omega.cwiseProduct(model.c_dl).cwiseQuotient(den);
}

RVector ul_sinr_zf(const RVector& omega, const RVector& p, const ZfModel& model) {
  const RVector den = model.ul_interference(omega, p);
  return p.cwiseProduct(model.c_ul).cwiseQuotient(den);
}

RVector dl_sinr_zf(const RVector& omega, const RVector& p, const EstimateSet& es,
                   const ZfOperators& zf, const SystemConfig& cfg) {
  // The DL SINR does not involve G~, so an empty channel set is enough.
  ChannelSet none;
  const Eigen::Index n = zf.h_zf.rows();
  none.g_aa = CMatrix::Zero(n, n);
  return dl_sinr_zf(omega, p, build_zf_model(zf, es, none, cfg));
}

RVector ul_sinr_zf(const RVector& omega, const RVector& p, const EstimateSet& es,
                   const ZfOperators& zf, const ChannelSet& ch, const SystemConfig& cfg) {
  return ul_sinr_zf(omega, p, build_zf_model(zf, es, ch, cfg));
}

BeamformerSet zf_beams(const ZfOperators& zf, const RVector& omega, const RVector& p) {
  BeamformerSet b;
  b.w = zf.h_zf * omega.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  b.a = zf.a_zf;
  b.p = p;
  b.omega = omega;
  return b;
}

RVector dl_sinr_general(const CMatrix& w, const RVector& p, const AssocMatrix& alpha,
                        const EstimateSet& es, const SystemConfig& cfg) {
  const Eigen::Index k_count = es.h_dl_hat.rows();
  require_alpha_shape(alpha, k_count, cfg.num_aps);
  const CMatrix wa = masked_precoder(w, alpha, cfg.antennas_per_ap);
  const CMatrix g = es.h_dl_hat * wa;
  const RMatrix served = column_block_power(wa, cfg.num_aps, cfg.antennas_per_ap);  // M x K
  const RVector err = (es.eps_dl * served).rowwise().sum();
  const RMatrix cci = es.g_cci_hat.cwiseAbs2() + es.eps_cci;

  RVector out(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double signal = std::norm(g(k, k));
    const double mui = g.row(k).squaredNorm() - signal;
    double den = std::max(mui, 0.0) + err(k) + cfg.noise_power;
    if (p.size() > 0) den += cci.row(k).dot(p);
    out(k) = signal / den;
  }
  return out;
}

RVector ul_sinr_general(const CMatrix& w, const RVector& p, const AssocMatrix& alpha,
                        const CMatrix& a, const EstimateSet& es, const ChannelSet& ch,
                        const SystemConfig& cfg) {
  const Eigen::Index l_count = es.h_ul_hat.cols();
  const int nm = cfg.antennas_per_ap;
  if (w.cols() > 0) require_alpha_shape(alpha, w.cols(), cfg.num_aps);
  const CMatrix wa = w.cols() > 0 ? masked_precoder(w, alpha, nm) : w;
  const CMatrix f = a * es.h_ul_hat;
  const RMatrix a_block = column_block_power(a.transpose(), cfg.num_aps, nm);
  const RMatrix e_ul = a_block.transpose() * es.eps_ul;
  const RVector si = wa.cols() > 0 ? RVector((a * ch.g_aa * wa).rowwise().squaredNorm())
                                   : RVector(RVector::Zero(l_count));

  RVector out(l_count);
  for (Eigen::Index l = 0; l < l_count; ++l) {
    const double signal = p(l) * std::norm(f(l, l));
    double mui = 0.0;
    for (Eigen::Index lp = 0; lp < l_count; ++lp)
      if (lp != l) mui += p(lp) * std::norm(f(l, lp));
    const double den = mui + e_ul.row(l).dot(p) + si(l) + cfg.noise_power * a.row(l).squaredNorm();
    out(l) = signal / den;
  }
  return out;
}

RVector dl_sinr_true(const CMatrix& w, const RVector& p, const AssocMatrix& alpha,
                     const ChannelSet& ch, const SystemConfig& cfg) {
  const Eigen::Index k_count = ch.h_dl.rows();
  require_alpha_shape(alpha, k_count, cfg.num_aps);
  const CMatrix g = ch.h_dl * masked_precoder(w, alpha, cfg.antennas_per_ap);
  RVector out(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double signal = std::norm(g(k, k));
    double den = std::max(g.row(k).squaredNorm() - signal, 0.0) + cfg.noise_power;
    if (p.size() > 0) den += ch.g_cci.row(k).cwiseAbs2().dot(p);
    out(k) = signal / den;
  }
  return out;
}

RVector ul_sinr_true(const CMatrix& w, const RVector& p, const AssocMatrix& alpha,
                     const CMatrix& a, const ChannelSet& ch, const SystemConfig& cfg) {
  const Eigen::Index l_count = ch.h_ul.cols();
  const CMatrix wa = w.cols() > 0 ? masked_precoder(w, alpha, cfg.antennas_per_ap) : w;
  const CMatrix f = a * ch.h_ul;
  const RVector si = wa.cols() > 0 ? RVector((a * ch.g_aa * wa).rowwise().squaredNorm())
                                   : RVector(RVector::Zero(l_count));
  RVector out(l_count);
  for (Eigen::Index l = 0; l < l_count; ++l) {
    const double signal = p(l) * std::norm(f(l, l));
    double mui = 0.0;
    for (Eigen::Index lp = 0; lp < l_count; ++lp)
      if (lp != l) mui += p(lp) * std::norm(f(l, lp));
    out(l) = signal / (mui + si(l) + cfg.noise_power * a.row(l).squaredNorm());
  }
  return out;
}

BeamformerSet mrt_mrc_beams(const EstimateSet& es, const SystemConfig& cfg) {
  const Eigen::Index k_count = es.h_dl_hat.rows();
  const int nm = cfg.antennas_per_ap;
  BeamformerSet b;
  b.w = CMatrix::Zero(es.h_dl_hat.cols(), k_count);
  if (k_count > 0) {
    const double per_ue = std::sqrt(cfg.ap_power_max() / static_cast<double>(k_count));
    for (Eigen::Index k = 0; k < k_count; ++k) {
      for (int m = 0; m < cfg.num_aps; ++m) {
        const CRowVector h = es.h_dl_hat.row(k).segment(static_cast<Eigen::Index>(m) * nm, nm);
        const double norm = h.norm();
        if (norm > 0.0) b.w.col(k).segment(static_cast<Eigen::Index>(m) * nm, nm) = per_ue * h.adjoint() / norm;
      }
    }
  }
  b.a = es.h_ul_hat.adjoint();
  b.p = RVector::Constant(es.h_ul_hat.cols(), cfg.ul_power_max);
  return b;
}

AssocMatrix full_association(Eigen::Index k, Eigen::Index m) {
  return AssocMatrix::Ones(k, m);
}

}  // namespace cfmimo
