#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cfmimo/scenario.hpp"

using namespace cfmimo;

namespace {

bool same(const RMatrix& a, const RMatrix& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; }
bool same(const CMatrix& a, const CMatrix& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; }

}  // namespace

TEST(PathLoss, FrozenValues) {
  const SystemConfig cfg;
  // Hand-evaluated COST231-Hata offset at 1900 MHz, 15 m / 1.65 m antennas.
  EXPECT_NEAR(hata_offset_db(cfg), 140.71508370390842, 1e-9);
  EXPECT_NEAR(path_loss_db(1000.0, cfg), -140.71508370390842, 1e-9);
  EXPECT_NEAR(path_loss_db(500.0, cfg), -130.17903385566908, 1e-9);
  EXPECT_NEAR(path_loss_db(5.0, cfg), -81.1996337689487, 1e-9);
}

TEST(PathLoss, ContinuousAtBreakpoints) {
  const SystemConfig cfg;
  for (double d : {cfg.pl_d0, cfg.pl_d1}) {
    const double left = path_loss_db(d, cfg);
    const double right = path_loss_db(std::nextafter(d, 1e9), cfg);
    EXPECT_LT(std::abs(left - right), 1e-9) << d;
  }
  // Far branch extended back to d1 meets the mid branch.
  const double far_at_d1 = -hata_offset_db(cfg) - 35.0 * std::log10(cfg.pl_d1 / 1000.0);
  EXPECT_NEAR(far_at_d1, path_loss_db(cfg.pl_d1, cfg), 1e-9);
}

TEST(PathLoss, FarSlopeDoubling) {
  const SystemConfig cfg;
  const double d1 = cfg.pl_d1;
  EXPECT_NEAR(path_loss_db(4 * d1, cfg) - path_loss_db(2 * d1, cfg), -35.0 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(path_loss_db(2 * d1, cfg) - path_loss_db(d1, cfg), -35.0 * std::log10(2.0), 1e-12);
}

TEST(PathLoss, RejectsNonPositiveDistance) {
  const SystemConfig cfg;
  EXPECT_THROW(path_loss_db(0.0, cfg), Error);
  EXPECT_THROW(path_loss_db(-1.0, cfg), Error);
}

TEST(Topology, ZeroRadiusCollapsesToOrigin) {
  SystemConfig cfg;
  cfg.radius = 0.0;
  Rng rng(1);
  const Topology t = sample_topology(cfg, rng);
  for (const auto* v : {&t.ap_pos, &t.dl_pos, &t.ul_pos}) {
    for (const Point& p : *v) {
      EXPECT_EQ(p.x, 0.0);
      EXPECT_EQ(p.y, 0.0);
    }
  }
}

TEST(Topology, SeededDeterminism) {
  const SystemConfig cfg;
  Rng a(42), b(42);
  const Topology ta = sample_topology(cfg, a);
  const Topology tb = sample_topology(cfg, b);
  ASSERT_EQ(ta.ap_pos.size(), 64u);
  for (std::size_t i = 0; i < ta.ap_pos.size(); ++i) {
    EXPECT_EQ(ta.ap_pos[i].x, tb.ap_pos[i].x);
    EXPECT_EQ(ta.ap_pos[i].y, tb.ap_pos[i].y);
  }
}

TEST(Topology, MeanRadiusOfUniformDisc) {
  SystemConfig cfg;
  cfg.num_aps = 100000;
  cfg.num_dl = cfg.num_ul = 0;
  Rng rng(7);
  const Topology t = sample_topology(cfg, rng);
  double sum = 0.0;
  for (const Point& p : t.ap_pos) {
    const double r = std::hypot(p.x, p.y);
    ASSERT_LE(r, cfg.radius);
    sum += r;
  }
  const double mean = sum / static_cast<double>(t.ap_pos.size());
  EXPECT_NEAR(mean / (2.0 / 3.0 * cfg.radius), 1.0, 0.01);
}

TEST(LargeScale, NoShadowingIsPurePathLoss) {
  SystemConfig cfg;
  cfg.shadow_std_db = 0.0;
  Rng rng(3);
  const Topology t = sample_topology(cfg, rng);
  const LargeScale ls = large_scale(t, cfg, rng);
  for (int k = 0; k < cfg.num_dl; ++k) {
    for (int m = 0; m < cfg.num_aps; ++m) {
      const double d = std::max(distance(t.dl_pos[k], t.ap_pos[m]), cfg.min_distance);
      EXPECT_DOUBLE_EQ(ls.beta_dl(k, m), db_to_linear(path_loss_db(d, cfg)));
    }
  }
}

TEST(LargeScale, PositiveFiniteAndShaped) {
  const SystemConfig cfg;
  Rng rng(5);
  const Topology t = sample_topology(cfg, rng);
  const LargeScale ls = large_scale(t, cfg, rng);
  EXPECT_EQ(ls.beta_dl.rows(), cfg.num_dl);
  EXPECT_EQ(ls.beta_dl.cols(), cfg.num_aps);
  EXPECT_EQ(ls.beta_ul.rows(), cfg.num_aps);
  EXPECT_EQ(ls.beta_ul.cols(), cfg.num_ul);
  EXPECT_EQ(ls.beta_cci.rows(), cfg.num_dl);
  EXPECT_EQ(ls.beta_cci.cols(), cfg.num_ul);
  for (const RMatrix* b : {&ls.beta_dl, &ls.beta_ul, &ls.beta_cci}) {
    EXPECT_TRUE(b->allFinite());
    EXPECT_GT(b->minCoeff(), 0.0);
  }
  for (int m = 0; m < cfg.num_aps; ++m) {
    EXPECT_EQ(ls.beta_aa(m, m), 0.0);
    for (int mp = 0; mp < cfg.num_aps; ++mp) {
      if (m != mp) {
        EXPECT_GT(ls.beta_aa(m, mp), 0.0);
      }
    }
  }
}

TEST(LargeScale, ShadowingIsZeroMean) {
  SystemConfig cfg;
  cfg.num_aps = 100;
  cfg.num_dl = 100;
  cfg.num_ul = 1;
  Rng rng(11);
  const Topology t = sample_topology(cfg, rng);
  const LargeScale ls = large_scale(t, cfg, rng);
  double sum = 0.0;
  for (int k = 0; k < cfg.num_dl; ++k) {
    for (int m = 0; m < cfg.num_aps; ++m) {
      const double d = std::max(distance(t.dl_pos[k], t.ap_pos[m]), cfg.min_distance);
      sum += linear_to_db(ls.beta_dl(k, m)) - path_loss_db(d, cfg);
    }
  }
  EXPECT_NEAR(sum / 1e4, 0.0, 0.3);
}

TEST(LargeScale, SeededDeterminism) {
  const SystemConfig cfg;
  Rng a(9), b(9);
  const Topology ta = sample_topology(cfg, a);
  const Topology tb = sample_topology(cfg, b);
  const LargeScale la = large_scale(ta, cfg, a);
  const LargeScale lb = large_scale(tb, cfg, b);
  EXPECT_TRUE(same(la.beta_dl, lb.beta_dl));
  EXPECT_TRUE(same(la.beta_aa, lb.beta_aa));
  const ChannelSet ca = sample_channels(la, cfg, a);
  const ChannelSet cb = sample_channels(lb, cfg, b);
  EXPECT_TRUE(same(ca.h_dl, cb.h_dl));
  EXPECT_TRUE(same(ca.g_aa, cb.g_aa));
}

TEST(Channels, PerfectSiCancellationZeroesDiagonalBlocks) {
  SystemConfig cfg;
  cfg.rsi = 0.0;
  cfg.num_aps = 6;
  Rng rng(2);
  const LargeScale ls = large_scale(sample_topology(cfg, rng), cfg, rng);
  const ChannelSet ch = sample_channels(ls, cfg, rng);
  const int nm = cfg.antennas_per_ap;
  for (int m = 0; m < cfg.num_aps; ++m) {
    EXPECT_EQ(ch.g_aa.block(m * nm, m * nm, nm, nm).norm(), 0.0);
    if (m + 1 < cfg.num_aps) {
      EXPECT_GT(ch.g_aa.block(m * nm, (m + 1) * nm, nm, nm).norm(), 0.0);
    }
  }
}

TEST(Channels, InfiniteRicianFactorLeavesMeanComponent) {
  SystemConfig cfg;
  cfg.rician_factor_db = 1e6;  // overflows to an infinite linear K-factor
  cfg.num_aps = 4;
  Rng rng(2);
  const LargeScale ls = large_scale(sample_topology(cfg, rng), cfg, rng);
  const ChannelSet ch = sample_channels(ls, cfg, rng);
  const int nm = cfg.antennas_per_ap;
  const double expected = std::sqrt(cfg.rsi * cfg.si_gain);
  for (int m = 0; m < cfg.num_aps; ++m) {
    const CMatrix block = ch.g_aa.block(m * nm, m * nm, nm, nm);
    EXPECT_NEAR((block - CMatrix::Constant(nm, nm, expected)).norm(), 0.0, 1e-20);
  }
}

TEST(Channels, EntryVarianceMatchesBeta) {
  SystemConfig cfg;
  cfg.num_aps = 2;
  cfg.num_dl = cfg.num_ul = 1;
  Rng rng(17);
  const LargeScale ls = large_scale(sample_topology(cfg, rng), cfg, rng);
  const int draws = 10000;
  double dl = 0.0, ul = 0.0, aa = 0.0, si = 0.0;
  for (int i = 0; i < draws; ++i) {
    const ChannelSet ch = sample_channels(ls, cfg, rng);
    dl += std::norm(ch.h_dl(0, 0));
    ul += std::norm(ch.h_ul(3, 0));
    aa += std::norm(ch.g_aa(0, 2));
    si += std::norm(ch.g_aa(0, 1));
  }
  EXPECT_NEAR(dl / draws / ls.beta_dl(0, 0), 1.0, 0.05);
  EXPECT_NEAR(ul / draws / ls.beta_ul(1, 0), 1.0, 0.05);
  EXPECT_NEAR(aa / draws / ls.beta_aa(0, 1), 1.0, 0.05);
  EXPECT_NEAR(si / draws / (cfg.rsi * cfg.si_gain), 1.0, 0.05);
}

TEST(Links, CsvHasOneRowPerLink) {
  SystemConfig cfg;
  cfg.num_aps = 3;
  cfg.num_dl = 2;
  cfg.num_ul = 1;
  Rng rng(1);
  const Topology t = sample_topology(cfg, rng);
  const LargeScale ls = large_scale(t, cfg, rng);
  std::ostringstream out;
  write_links_csv(out, t, ls, cfg);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# cfmimo links config_hash=", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line, "type,i,j,distance_m,beta");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2 * 3 + 3 * 1 + 2 * 1 + 3 * 2);
}
