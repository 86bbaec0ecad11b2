#include "cfmimo/scenario.hpp"

#include <cmath>
#include <iomanip>

namespace cfmimo {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double hata_offset_db(const SystemConfig& cfg) {
  const double lf = std::log10(cfg.carrier_mhz);
  return 46.3 + 33.9 * lf - 13.82 * std::log10(cfg.ap_height) -
         (1.1 * lf - 0.7) * cfg.ue_height + (1.56 * lf - 0.8);
}

double path_loss_db(double d_meters, const SystemConfig& cfg) {
  if (!(d_meters > 0.0)) {
    throw Error(ErrorCode::kDomain, "path_loss_db: distance must be > 0");
  }
  const double offset = hata_offset_db(cfg);
  const double d = d_meters / 1000.0;
  const double d0 = cfg.pl_d0 / 1000.0;
  const double d1 = cfg.pl_d1 / 1000.0;
  if (d > d1) return -offset - 35.0 * std::log10(d);
  if (d > d0) return -offset - 15.0 * std::log10(d1) - 20.0 * std::log10(d);
  return -offset - 15.0 * std::log10(d1) - 20.0 * std::log10(d0);
}

namespace {

Point uniform_in_disc(double radius, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  const double theta = 2.0 * M_PI * u(rng);
  return {r * std::cos(theta), r * std::sin(theta)};
}

std::vector<Point> sample_points(int n, double radius, Rng& rng) {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(uniform_in_disc(radius, rng));
  return out;
}

}  // namespace

Topology sample_topology(const SystemConfig& cfg, Rng& rng) {
  Topology t;
  t.ap_pos = sample_points(cfg.num_aps, cfg.radius, rng);
  t.dl_pos = sample_points(cfg.num_dl, cfg.radius, rng);
  t.ul_pos = sample_points(cfg.num_ul, cfg.radius, rng);
  return t;
}

LargeScale large_scale(const Topology& topo, const SystemConfig& cfg, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  auto gain = [&](const Point& a, const Point& b) {
    const double d = std::max(distance(a, b), cfg.min_distance);
    return db_to_linear(path_loss_db(d, cfg) + cfg.shadow_std_db * z(rng));
  };
  const auto m_count = static_cast<Eigen::Index>(topo.ap_pos.size());
  const auto k_count = static_cast<Eigen::Index>(topo.dl_pos.size());
  const auto l_count = static_cast<Eigen::Index>(topo.ul_pos.size());

  LargeScale ls;
  ls.beta_dl.resize(k_count, m_count);
  for (Eigen::Index k = 0; k < k_count; ++k)
    for (Eigen::Index m = 0; m < m_count; ++m) ls.beta_dl(k, m) = gain(topo.dl_pos[k], topo.ap_pos[m]);

  ls.beta_ul.resize(m_count, l_count);
  for (Eigen::Index m = 0; m < m_count; ++m)
    for (Eigen::Index l = 0; l < l_count; ++l) ls.beta_ul(m, l) = gain(topo.ap_pos[m], topo.ul_pos[l]);

  ls.beta_cci.resize(k_count, l_count);
  for (Eigen::Index k = 0; k < k_count; ++k)
    for (Eigen::Index l = 0; l < l_count; ++l) ls.beta_cci(k, l) = gain(topo.dl_pos[k], topo.ul_pos[l]);

  ls.beta_aa = RMatrix::Zero(m_count, m_count);
  for (Eigen::Index m = 0; m < m_count; ++m)
    for (Eigen::Index mp = 0; mp < m_count; ++mp)
      if (m != mp) ls.beta_aa(m, mp) = gain(topo.ap_pos[m], topo.ap_pos[mp]);
  return ls;
}

ChannelSet sample_channels(const LargeScale& ls, const SystemConfig& cfg, Rng& rng) {
  const Eigen::Index nm = cfg.antennas_per_ap;
  const Eigen::Index m_count = ls.beta_aa.rows();
  const Eigen::Index n = nm * m_count;
  const Eigen::Index k_count = ls.beta_dl.rows();
  const Eigen::Index l_count = ls.beta_ul.cols();

  ChannelSet ch;
  ch.h_dl.resize(k_count, n);
  for (Eigen::Index k = 0; k < k_count; ++k)
    for (Eigen::Index a = 0; a < n; ++a)
      ch.h_dl(k, a) = std::sqrt(ls.beta_dl(k, a / nm)) * complex_normal(rng);

  ch.h_ul.resize(n, l_count);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index l = 0; l < l_count; ++l)
      ch.h_ul(a, l) = std::sqrt(ls.beta_ul(a / nm, l)) * complex_normal(rng);

  ch.g_cci.resize(k_count, l_count);
  for (Eigen::Index k = 0; k < k_count; ++k)
    for (Eigen::Index l = 0; l < l_count; ++l)
      ch.g_cci(k, l) = std::sqrt(ls.beta_cci(k, l)) * complex_normal(rng);

  // Rician SI loop: unit average power split into a fixed all-ones line-of-sight
  // part (fraction K/(K+1)) and a CN scatter part (fraction 1/(K+1)).
  const double kf = db_to_linear(cfg.rician_factor_db);
  const double los = std::isinf(kf) ? 1.0 : std::sqrt(kf / (kf + 1.0));
  const double nlos = std::isinf(kf) ? 0.0 : std::sqrt(1.0 / (kf + 1.0));
  const double si_scale = std::sqrt(cfg.rsi * cfg.si_gain);

  ch.g_aa.resize(n, n);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    for (Eigen::Index mp = 0; mp < m_count; ++mp) {
      for (Eigen::Index i = 0; i < nm; ++i) {
        for (Eigen::Index j = 0; j < nm; ++j) {
          const cplx scatter = complex_normal(rng);
          cplx v;
          if (m == mp) {
            v = si_scale * (los + nlos * scatter);
          } else {
            v = std::sqrt(ls.beta_aa(m, mp)) * scatter;
          }
          ch.g_aa(m * nm + i, mp * nm + j) = v;
        }
      }
    }
  }
  return ch;
}

void write_links_csv(std::ostream& out, const Topology& topo, const LargeScale& ls,
                     const SystemConfig& cfg) {
  out << "# cfmimo links config_hash=" << std::hex << std::setw(16) << std::setfill('0')
      << config_hash(cfg) << std::dec << std::setfill(' ') << " seed=" << cfg.rng_seed << "\n";
  out << "type,i,j,distance_m,beta\n";
  out << std::setprecision(10);
  auto row = [&](const char* type, std::size_t i, std::size_t j, const Point& a,
                 const Point& b, double beta) {
    out << type << ',' << i << ',' << j << ',' << distance(a, b) << ',' << beta << '\n';
  };
  for (std::size_t k = 0; k < topo.dl_pos.size(); ++k)
    for (std::size_t m = 0; m < topo.ap_pos.size(); ++m)
      row("dl", k, m, topo.dl_pos[k], topo.ap_pos[m], ls.beta_dl(k, m));
  for (std::size_t m = 0; m < topo.ap_pos.size(); ++m)
    for (std::size_t l = 0; l < topo.ul_pos.size(); ++l)
      row("ul", m, l, topo.ap_pos[m], topo.ul_pos[l], ls.beta_ul(m, l));
  for (std::size_t k = 0; k < topo.dl_pos.size(); ++k)
    for (std::size_t l = 0; l < topo.ul_pos.size(); ++l)
      row("cci", k, l, topo.dl_pos[k], topo.ul_pos[l], ls.beta_cci(k, l));
  for (std::size_t m = 0; m < topo.ap_pos.size(); ++m)
    for (std::size_t mp = 0; mp < topo.ap_pos.size(); ++mp)
      if (m != mp) row("aa", m, mp, topo.ap_pos[m], topo.ap_pos[mp], ls.beta_aa(m, mp));
}

}  // namespace cfmimo
