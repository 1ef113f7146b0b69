#include "rsma/subproblem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rsma {

using conic::AffineExpr;
using conic::ConeBlock;
using conic::ConeKind;

namespace {

std::string idx(const char* base, int a) { return std::string(base) + "[" + std::to_string(a) + "]"; }

std::string idx(const char* base, int a, int b) {
  return std::string(base) + "[" + std::to_string(a) + "][" + std::to_string(b) + "]";
}

bool has_vars(const std::vector<int>& re) {
  for (int v : re) {
    if (v >= 0) return true;
  }
  return false;
}

}  // namespace

ConeBlock encode_rate_log(const AffineExpr& rate, const AffineExpr& gamma, double tau_mhz) {
  if (!(tau_mhz > 0.0)) throw std::invalid_argument("encode_rate_log: tau must be > 0");
  AffineExpr x = rate;
  x.scale(std::numbers::ln2 / tau_mhz);
  AffineExpr z = gamma;
  z.constant += 1.0;
  return ConeBlock{ConeKind::kExponential, {std::move(x), AffineExpr::constant_value(1.0), std::move(z)}, "rate_log"};
}

std::pair<AffineExpr, AffineExpr> inner_product_rows(const Eigen::VectorXcd& h, const std::vector<int>& re,
                                                     const std::vector<int>& im) {
  // conj(c + jd) (a + jb) = (ca + db) + j(cb - da)
  AffineExpr real_part;
  AffineExpr imag_part;
  for (Eigen::Index n = 0; n < h.size(); ++n) {
    const int a = re[static_cast<std::size_t>(n)];
    const int b = im[static_cast<std::size_t>(n)];
    if (a < 0) continue;
    const double c = h(n).real();
    const double d = h(n).imag();
    real_part.add(a, c).add(b, d);
    imag_part.add(b, c).add(a, -d);
  }
  return {std::move(real_part), std::move(imag_part)};
}

namespace {

ConeBlock qt_block(const SubproblemLayout& layout, const Eigen::VectorXcd& hk, const std::vector<int>& sig_re,
                   const std::vector<int>& sig_im, int gamma_var, std::complex<double> u,
                   const InterferenceSet& interferers, std::string tag) {
  const double u_abs = std::abs(u);
  // v = 2 Re{u h^H w} - gamma - |u|^2
  auto [sr, si] = inner_product_rows(hk, sig_re, sig_im);
  AffineExpr v;
  v.add(sr, 2.0 * u.real()).add(si, -2.0 * u.imag());
  if (gamma_var >= 0) v.add(gamma_var, -1.0);
  v.constant -= u_abs * u_abs;
  std::vector<AffineExpr> q;
  auto push = [&](const std::vector<int>& re, const std::vector<int>& im) {
    if (!has_vars(re)) return;
    auto [r, i] = inner_product_rows(hk, re, im);
    q.push_back(r.scale(u_abs));
    q.push_back(i.scale(u_abs));
  };
  for (int j : interferers.private_streams) {
    push(layout.private_re[static_cast<std::size_t>(j)], layout.private_im[static_cast<std::size_t>(j)]);
  }
  for (int l : interferers.common_streams) {
    push(layout.common_re[static_cast<std::size_t>(l)], layout.common_im[static_cast<std::size_t>(l)]);
  }
  // ||q||^2 <= v * 1  <=>  ||(2q, v - 1)|| <= v + 1
  AffineExpr t = v;
  t.constant += 1.0;
  ConeBlock blk{ConeKind::kSecondOrder, {}, std::move(tag)};
  blk.rows.push_back(std::move(t));
  for (auto& e : q) blk.rows.push_back(e.scale(2.0));
  AffineExpr last = v;
  last.constant -= 1.0;
  blk.rows.push_back(std::move(last));
  return blk;
}

}  // namespace

ConeBlock encode_qt_private(const SubproblemLayout& layout, int k, std::complex<double> u_scaled,
                            const ChannelState& h_scaled, const RsmaStructure& s) {
  return qt_block(layout, h_scaled.aggregate(k), layout.private_re[static_cast<std::size_t>(k)],
                  layout.private_im[static_cast<std::size_t>(k)], layout.private_gamma[static_cast<std::size_t>(k)],
                  u_scaled, private_interference(s, k), idx("qt_private", k));
}

ConeBlock encode_qt_common(const SubproblemLayout& layout, int i, int k, std::complex<double> u_scaled,
                           const ChannelState& h_scaled, const RsmaStructure& s) {
  return qt_block(layout, h_scaled.aggregate(k), layout.common_re[static_cast<std::size_t>(i)],
                  layout.common_im[static_cast<std::size_t>(i)], layout.common_gamma(i, k), u_scaled,
                  common_interference(s, i, k), idx("qt_common", i, k));
}

Subproblem build_subproblem(const ChannelState& h, const RsmaStructure& s, const AuxVariables& u,
                            const SystemConfig& config, double noise_w) {
  const int nk = config.num_users;
  const int nb = config.num_bs;
  const int nl = config.antennas_per_bs;
  const int dim = nb * nl;
  if (h.num_users() != nk || h.num_bs() != nb || h.antennas() != nl || s.num_users() != nk ||
      s.num_bs() != nb || static_cast<int>(u.u_private.size()) != nk || u.u_common.rows() != nk ||
      u.u_common.cols() != nk) {
    throw std::invalid_argument("build_subproblem: dimension mismatch between channel, structure and auxiliaries");
  }
  if (!(noise_w > 0.0)) throw std::invalid_argument("build_subproblem: noise power must be > 0");

  Subproblem sub;
  auto& prog = sub.program;
  auto& lay = sub.layout;
  lay.num_users = nk;
  lay.aggregate_dim = dim;
  lay.channel_scale = 1.0 / std::sqrt(noise_w);
  const double sigma = std::sqrt(noise_w);
  const ChannelState hs = h.scaled(lay.channel_scale);

  const std::vector<int> none(static_cast<std::size_t>(dim), -1);
  lay.private_re.assign(static_cast<std::size_t>(nk), none);
  lay.private_im.assign(static_cast<std::size_t>(nk), none);
  lay.common_re.assign(static_cast<std::size_t>(nk), none);
  lay.common_im.assign(static_cast<std::size_t>(nk), none);
  lay.private_rate.assign(static_cast<std::size_t>(nk), -1);
  lay.common_rate.assign(static_cast<std::size_t>(nk), -1);
  lay.private_gamma.assign(static_cast<std::size_t>(nk), -1);
  lay.common_gamma = Eigen::MatrixXi::Constant(nk, nk, -1);

  auto scaled_u = [sigma](std::complex<double> v) { return v * sigma; };
  auto live = [&](std::complex<double> v) { return std::abs(scaled_u(v)) >= kFrozenAuxThreshold; };

  std::vector<bool> private_on(static_cast<std::size_t>(nk));
  std::vector<bool> common_on(static_cast<std::size_t>(nk), false);
  for (int k = 0; k < nk; ++k) private_on[static_cast<std::size_t>(k)] = live(u.u_private[static_cast<std::size_t>(k)]);
  for (int i = 0; i < nk; ++i) {
    if (!s.has_common_stream(i)) continue;
    bool on = true;
    for (int k : s.decode.decoders[static_cast<std::size_t>(i)]) on = on && live(u.u_common(i, k));
    common_on[static_cast<std::size_t>(i)] = on;
  }

  auto add_precoder = [&](const char* name, int owner, bool common) {
    auto& re = common ? lay.common_re[static_cast<std::size_t>(owner)] : lay.private_re[static_cast<std::size_t>(owner)];
    auto& im = common ? lay.common_im[static_cast<std::size_t>(owner)] : lay.private_im[static_cast<std::size_t>(owner)];
    for (int b = 0; b < nb; ++b) {
      const bool served = common ? s.clusters.serves_common(b, owner) : s.clusters.serves_private(b, owner);
      if (!served) continue;
      for (int l = 0; l < nl; ++l) {
        const int n = b * nl + l;
        re[static_cast<std::size_t>(n)] = prog.add_variable(idx(name, owner, n) + ".re");
        im[static_cast<std::size_t>(n)] = prog.add_variable(idx(name, owner, n) + ".im");
        ++lay.complex_precoder_entries;
      }
    }
  };

  for (int k = 0; k < nk; ++k) {
    if (!private_on[static_cast<std::size_t>(k)]) continue;
    add_precoder("wp", k, false);
  }
  for (int i = 0; i < nk; ++i) {
    if (common_on[static_cast<std::size_t>(i)]) add_precoder("wc", i, true);
  }
  for (int k = 0; k < nk; ++k) {
    if (!private_on[static_cast<std::size_t>(k)]) continue;
    lay.private_rate[static_cast<std::size_t>(k)] = prog.add_variable(idx("rp", k));
    lay.private_gamma[static_cast<std::size_t>(k)] = prog.add_variable(idx("gp", k));
    lay.rate_variables += 1;
    lay.gamma_variables += 1;
  }
  for (int i = 0; i < nk; ++i) {
    if (!common_on[static_cast<std::size_t>(i)]) continue;
    if (s.common_mode == CommonMode::kPerUser) {
      lay.common_rate[static_cast<std::size_t>(i)] = prog.add_variable(idx("rc", i));
      lay.rate_variables += 1;
    } else {
      for (int k = 0; k < nk; ++k) {
        lay.common_rate[static_cast<std::size_t>(k)] = prog.add_variable(idx("share", k));
        lay.rate_variables += 1;
      }
    }
    for (int k : s.decode.decoders[static_cast<std::size_t>(i)]) {
      lay.common_gamma(i, k) = prog.add_variable(idx("gc", i, k));
      lay.gamma_variables += 1;
    }
  }
  lay.core_variable_count = lay.complex_precoder_entries + lay.rate_variables + lay.gamma_variables;

  // Fronthaul.
  for (int b = 0; b < nb; ++b) {
    AffineExpr row = AffineExpr::constant_value(config.fronthaul_capacity_mbps);
    for (int k : s.clusters.private_clusters[static_cast<std::size_t>(b)]) {
      if (const int v = lay.private_rate[static_cast<std::size_t>(k)]; v >= 0) row.add(v, -1.0);
    }
    for (int k : s.clusters.common_clusters[static_cast<std::size_t>(b)]) {
      if (const int v = lay.common_rate[static_cast<std::size_t>(k)]; v >= 0) row.add(v, -1.0);
    }
    if (!row.terms.empty()) prog.add_nonnegative(std::move(row), idx("fronthaul", b));
  }

  // Per-BS transmit power.
  const double pmax_sqrt = std::sqrt(config.max_power_w());
  for (int b = 0; b < nb; ++b) {
    std::vector<AffineExpr> entries;
    auto collect = [&](const std::vector<int>& re, const std::vector<int>& im) {
      for (int l = 0; l < nl; ++l) {
        const auto n = static_cast<std::size_t>(b * nl + l);
        if (re[n] < 0) continue;
        entries.push_back(AffineExpr::variable(re[n]));
        entries.push_back(AffineExpr::variable(im[n]));
      }
    };
    for (int k = 0; k < nk; ++k) {
      collect(lay.private_re[static_cast<std::size_t>(k)], lay.private_im[static_cast<std::size_t>(k)]);
      collect(lay.common_re[static_cast<std::size_t>(k)], lay.common_im[static_cast<std::size_t>(k)]);
    }
    if (!entries.empty()) {
      prog.add_second_order(AffineExpr::constant_value(pmax_sqrt), std::move(entries), idx("power", b));
    }
  }

  for (int k = 0; k < nk; ++k) {
    if (const int v = lay.private_rate[static_cast<std::size_t>(k)]; v >= 0) {
      prog.add_nonnegative(AffineExpr::variable(v), idx("rp_nonneg", k));
    }
    if (const int v = lay.common_rate[static_cast<std::size_t>(k)]; v >= 0) {
      prog.add_nonnegative(AffineExpr::variable(v), idx("rc_nonneg", k));
    }
  }

  // Rate-log cones.
  const double tau = config.bandwidth_mhz;
  auto add_cone = [&prog](ConeBlock blk, std::string tag) {
    blk.tag = std::move(tag);
    if (blk.kind == ConeKind::kExponential) {
      prog.add_exponential(std::move(blk.rows[0]), std::move(blk.rows[1]), std::move(blk.rows[2]), std::move(blk.tag));
    } else {
      AffineExpr t = std::move(blk.rows[0]);
      std::vector<AffineExpr> rest(std::make_move_iterator(blk.rows.begin() + 1), std::make_move_iterator(blk.rows.end()));
      prog.add_second_order(std::move(t), std::move(rest), std::move(blk.tag));
    }
  };
  for (int k = 0; k < nk; ++k) {
    if (lay.private_rate[static_cast<std::size_t>(k)] < 0) continue;
    add_cone(encode_rate_log(AffineExpr::variable(lay.private_rate[static_cast<std::size_t>(k)]),
                             AffineExpr::variable(lay.private_gamma[static_cast<std::size_t>(k)]), tau),
             idx("rate_private", k));
  }
  for (int i = 0; i < nk; ++i) {
    if (!common_on[static_cast<std::size_t>(i)]) continue;
    AffineExpr rate;
    if (s.common_mode == CommonMode::kPerUser) {
      rate.add(lay.common_rate[static_cast<std::size_t>(i)], 1.0);
    } else {
      for (int k = 0; k < nk; ++k) rate.add(lay.common_rate[static_cast<std::size_t>(k)], 1.0);
    }
    for (int k : s.decode.decoders[static_cast<std::size_t>(i)]) {
      add_cone(encode_rate_log(rate, AffineExpr::variable(lay.common_gamma(i, k)), tau), idx("rate_common", i, k));
    }
  }

  // Quadratic-transform rows.
  for (int k = 0; k < nk; ++k) {
    if (!private_on[static_cast<std::size_t>(k)]) continue;
    add_cone(encode_qt_private(lay, k, scaled_u(u.u_private[static_cast<std::size_t>(k)]), hs, s), idx("qt_private", k));
  }
  for (int i = 0; i < nk; ++i) {
    if (!common_on[static_cast<std::size_t>(i)]) continue;
    for (int k : s.decode.decoders[static_cast<std::size_t>(i)]) {
      add_cone(encode_qt_common(lay, i, k, scaled_u(u.u_common(i, k)), hs, s), idx("qt_common", i, k));
    }
  }

  // Objective in epigraph form: alpha/K * e_mse + (1 - alpha) * e_pow.
  AffineExpr objective;
  const double alpha = config.alpha;
  if (alpha > 0.0) {
    lay.mse_epigraph = prog.add_variable("epi_mse");
    std::vector<AffineExpr> gaps;
    for (int k = 0; k < nk; ++k) {
      AffineExpr g = AffineExpr::constant_value(-config.desired_rates_mbps[static_cast<std::size_t>(k)]);
      if (const int v = lay.private_rate[static_cast<std::size_t>(k)]; v >= 0) g.add(v, 1.0);
      if (const int v = lay.common_rate[static_cast<std::size_t>(k)]; v >= 0) g.add(v, 1.0);
      gaps.push_back(std::move(g));
    }
    prog.add_rotated_second_order(gaps, AffineExpr::variable(lay.mse_epigraph), AffineExpr::constant_value(1.0),
                                  "epi_mse");
    objective.add(lay.mse_epigraph, alpha / static_cast<double>(nk));
  }
  if (alpha < 1.0) {
    lay.power_epigraph = prog.add_variable("epi_power");
    std::vector<AffineExpr> entries;
    for (int k = 0; k < nk; ++k) {
      for (const auto* vars : {&lay.private_re, &lay.private_im, &lay.common_re, &lay.common_im}) {
        for (int v : (*vars)[static_cast<std::size_t>(k)]) {
          if (v >= 0) entries.push_back(AffineExpr::variable(v));
        }
      }
    }
    prog.add_rotated_second_order(entries, AffineExpr::variable(lay.power_epigraph), AffineExpr::constant_value(1.0),
                                  "epi_power");
    objective.add(lay.power_epigraph, 1.0 - alpha);
  }
  prog.set_objective(std::move(objective));
  return sub;
}

Eigen::VectorXd encode_point(const Subproblem& sub, const SubproblemPoint& point, const SystemConfig& config) {
  const auto& lay = sub.layout;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sub.program.num_variables());
  const int nk = lay.num_users;
  for (int k = 0; k < nk; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    for (int n = 0; n < lay.aggregate_dim; ++n) {
      const auto ns = static_cast<std::size_t>(n);
      if (lay.private_re[ks][ns] >= 0) {
        x(lay.private_re[ks][ns]) = point.w.w_private[ks](n).real();
        x(lay.private_im[ks][ns]) = point.w.w_private[ks](n).imag();
      }
      if (lay.common_re[ks][ns] >= 0) {
        x(lay.common_re[ks][ns]) = point.w.w_common[ks](n).real();
        x(lay.common_im[ks][ns]) = point.w.w_common[ks](n).imag();
      }
    }
    if (lay.private_rate[ks] >= 0) x(lay.private_rate[ks]) = point.r.private_rate[ks];
    if (lay.common_rate[ks] >= 0) x(lay.common_rate[ks]) = point.r.common_rate[ks];
    if (lay.private_gamma[ks] >= 0) x(lay.private_gamma[ks]) = point.gamma.private_sinr[ks];
    for (int kk = 0; kk < nk; ++kk) {
      if (lay.common_gamma(k, kk) >= 0) x(lay.common_gamma(k, kk)) = point.gamma.common_sinr(k, kk);
    }
  }
  // Epigraph values with headroom so the point is well inside the cones.
  if (lay.mse_epigraph >= 0) x(lay.mse_epigraph) = 2.0 * rate_mse(point.r, config.desired_rates_mbps) * nk + 1.0;
  if (lay.power_epigraph >= 0) x(lay.power_epigraph) = 2.0 * total_power(point.w) + 1e-6;
  return x;
}

SubproblemPoint decode_point(const SubproblemLayout& lay, const Eigen::VectorXd& x) {
  const int nk = lay.num_users;
  SubproblemPoint p{PrecoderSet::zeros(nk, lay.aggregate_dim), RateAllocation::zeros(nk), SinrAuxiliaries::zeros(nk)};
  for (int k = 0; k < nk; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    for (int n = 0; n < lay.aggregate_dim; ++n) {
      const auto ns = static_cast<std::size_t>(n);
      if (lay.private_re[ks][ns] >= 0) {
        p.w.w_private[ks](n) = {x(lay.private_re[ks][ns]), x(lay.private_im[ks][ns])};
      }
      if (lay.common_re[ks][ns] >= 0) {
        p.w.w_common[ks](n) = {x(lay.common_re[ks][ns]), x(lay.common_im[ks][ns])};
      }
    }
    if (lay.private_rate[ks] >= 0) p.r.private_rate[ks] = x(lay.private_rate[ks]);
    if (lay.common_rate[ks] >= 0) p.r.common_rate[ks] = x(lay.common_rate[ks]);
    if (lay.private_gamma[ks] >= 0) p.gamma.private_sinr[ks] = x(lay.private_gamma[ks]);
    for (int kk = 0; kk < nk; ++kk) {
      if (lay.common_gamma(k, kk) >= 0) p.gamma.common_sinr(k, kk) = x(lay.common_gamma(k, kk));
    }
  }
  return p;
}

}  // namespace rsma
