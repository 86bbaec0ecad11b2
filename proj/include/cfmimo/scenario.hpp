#pragma once

#include <ostream>
#include <vector>

#include "cfmimo/config.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct Topology {
  std::vector<Point> ap_pos;
  std::vector<Point> dl_pos;
  std::vector<Point> ul_pos;
};

/// Large-scale power gains (linear).
///
/// beta_dl is K x M, beta_ul is M x L, beta_cci is K x L and beta_aa is M x M.
/// The diagonal of beta_aa is left at zero: the SI loop gain is modelled
/// separately through SystemConfig::rsi and SystemConfig::si_gain.
struct LargeScale {
  RMatrix beta_dl;
  RMatrix beta_ul;
  RMatrix beta_cci;
  RMatrix beta_aa;
};

/// Small-scale channel realisation scaled by the large-scale gains.
///
/// h_dl is K x N (row k is the DL channel of UE k over all antennas), h_ul is
/// N x L, g_cci is K x L and g_aa is N x N with block (m, m') the channel from
/// AP m' into AP m. Diagonal blocks carry sqrt(rsi) times the Rician SI loop.
struct ChannelSet {
  CMatrix h_dl;
  CMatrix h_ul;
  CMatrix g_cci;
  CMatrix g_aa;
};

/// Three-slope path loss in dB (negative numbers; gain = 10^(PL/10)).
///
/// With d in km, L the COST231-Hata offset at the configured carrier and
/// antenna heights, d0 = 10 m and d1 = 50 m:
///   d >  d1:        -L - 35 log10(d)
///   d0 < d <= d1:   -L - 15 log10(d1) - 20 log10(d)
///   d <= d0:        -L - 15 log10(d1) - 20 log10(d0)
/// Throws kDomain for d <= 0.
double path_loss_db(double d_meters, const SystemConfig& cfg);

/// COST231-Hata constant L in dB (about 140.7 dB at the defaults).
double hata_offset_db(const SystemConfig& cfg);

Topology sample_topology(const SystemConfig& cfg, Rng& rng);

LargeScale large_scale(const Topology& topo, const SystemConfig& cfg, Rng& rng);

ChannelSet sample_channels(const LargeScale& ls, const SystemConfig& cfg, Rng& rng);

/// One row per link: type, i, j, distance, beta.
void write_links_csv(std::ostream& out, const Topology& topo, const LargeScale& ls,
                     const SystemConfig& cfg);

}  // namespace cfmimo
