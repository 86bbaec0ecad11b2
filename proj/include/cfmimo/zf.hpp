#pragma once

#include <vector>

#include "cfmimo/config.hpp"
#include "cfmimo/estimation.hpp"
#include "cfmimo/scenario.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

/// Binary AP-serves-DL-UE matrix, K x M.
using AssocMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// DL pseudo-inverse basis and UL ZF receiver.
///
/// h_zf is N x K with Hd h_zf = I_K, a_zf is L x N with a_zf Hu = I_L. When
/// built from an association, column k of h_zf is supported only on the
/// antennas of APs serving UE k.
struct ZfOperators {
  CMatrix h_zf;
  CMatrix a_zf;
  int num_aps = 0;
  int antennas_per_ap = 0;

  /// Diagonal of the AP-m selector B_m as a 0/1 vector of length N.
  RVector mask(int m) const;
  /// ||B_m h_k^ZF||^2 as an M x K matrix.
  RMatrix block_power() const;
};

/// Unrestricted ZF. Throws kNumeric (with a condition-number estimate in the
/// message) when either Gram matrix is singular, and kInvalidArgument when
/// K > N or L > N.
ZfOperators zf_operators(const EstimateSet& es, const SystemConfig& cfg);

/// DL ZF whose column k is restricted to the APs with alpha(k, m) = 1, so the
/// precoder is exactly zero on every pruned pair while still nulling all other
/// DL UEs. Throws kNumeric if any restricted system is rank deficient.
ZfOperators zf_operators(const EstimateSet& es, const SystemConfig& cfg,
                         const AssocMatrix& alpha);

/// Sum_k omega_k ||B_m h_k^ZF||^2.
double per_ap_power(const RVector& omega, const ZfOperators& zf, int m);

/// Coefficients that make the ZF SINRs linear-fractional in (omega, p):
///
///   dl_k = omega_k c_dl_k / (sum_k' omega_k' e_dl(k,k') + sum_l p_l cci(k,l) + sigma^2)
///   ul_l = p_l c_ul_l / (sum_l' p_l' e_ul(l,l') + sum_k omega_k si(l,k) + sigma^2 a2_l)
///
/// e_dl(k,k') = sum_m eps_km ||B_m h_k'^ZF||^2, cci(k,l) = |g^_kl|^2 + eps_cci_kl,
/// e_ul(l,l') = sum_m eps_ml' ||a_ml||^2 and si(l,k) = |a_l G~ h_k^ZF|^2.
struct ZfModel {
  RVector c_dl;
  RMatrix e_dl;
  RMatrix cci;
  RVector c_ul;
  RMatrix e_ul;
  RMatrix si;
  RVector a2;
  RMatrix block_power;  // M x K
  double noise = 0.0;
  double ap_power_max = 0.0;
  double ul_power_max = 0.0;

  Eigen::Index num_dl() const { return c_dl.size(); }
  Eigen::Index num_ul() const { return c_ul.size(); }
  Eigen::Index num_aps() const { return block_power.rows(); }

  RVector dl_interference(const RVector& omega, const RVector& p) const;
  RVector ul_interference(const RVector& omega, const RVector& p) const;
};

ZfModel build_zf_model(const ZfOperators& zf, const EstimateSet& es, const ChannelSet& ch,
                       const SystemConfig& cfg);

/// ZF-reduced SINRs with the MUI terms dropped.
RVector dl_sinr_zf(const RVector& omega, const RVector& p, const ZfModel& model);
RVector ul_sinr_zf(const RVector& omega, const RVector& p, const ZfModel& model);

/// Convenience overloads that assemble the model first.
RVector dl_sinr_zf(const RVector& omega, const RVector& p, const EstimateSet& es,
                   const ZfOperators& zf, const SystemConfig& cfg);
RVector ul_sinr_zf(const RVector& omega, const RVector& p, const EstimateSet& es,
                   const ZfOperators& zf, const ChannelSet& ch, const SystemConfig& cfg);

/// DL precoders, UL combiner rows and UL powers.
struct BeamformerSet {
  CMatrix w;      // N x K
  CMatrix a;      // L x N
  RVector p;      // L
  RVector omega;  // K (ZF weights; empty for non-ZF beams)
};

/// W = H^ZF diag(omega)^(1/2) and a = A^ZF.
BeamformerSet zf_beams(const ZfOperators& zf, const RVector& omega, const RVector& p);

/// Robust SINRs for arbitrary beamformers, treating CSI errors as noise:
///
///   DL: |sum_m a_km h^_km w_km|^2 over coherent MUI on the estimates, the
///       error term sum_m sum_k' a_k'm eps_km ||w_k'm||^2, CCI
///       sum_l p_l (|g^_kl|^2 + eps_cci_kl) and noise.
///   UL: p_l |a_l h^_l|^2 over MUI, sum_m sum_l' p_l' eps_ml' ||a_ml||^2,
///       SI/IAI sum_k |a_l G~ (alpha o w)_k|^2 and sigma^2 ||a_l||^2.
RVector dl_sinr_general(const CMatrix& w, const RVector& p, const AssocMatrix& alpha,
                        const EstimateSet& es, const SystemConfig& cfg);
RVector ul_sinr_general(const CMatrix& w, const RVector& p, const AssocMatrix& alpha,
                        const CMatrix& a, const EstimateSet& es, const ChannelSet& ch,
                        const SystemConfig& cfg);

/// Genie SINRs on the true channels (no error statistics), for logging.
RVector dl_sinr_true(const CMatrix& w, const RVector& p, const AssocMatrix& alpha,
                     const ChannelSet& ch, const SystemConfig& cfg);
RVector ul_sinr_true(const CMatrix& w, const RVector& p, const AssocMatrix& alpha,
                     const CMatrix& a, const ChannelSet& ch, const SystemConfig& cfg);

/// MRT/MRC baseline: w_km along (h^_km)^H with ||w_km||^2 = P_AP / K, a_l = (h^_l)^H,
/// p_l = P_l^max.
BeamformerSet mrt_mrc_beams(const EstimateSet& es, const SystemConfig& cfg);

AssocMatrix full_association(Eigen::Index k, Eigen::Index m);

}  // namespace cfmimo
