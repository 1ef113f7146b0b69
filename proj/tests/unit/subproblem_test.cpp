#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rsma/baselines.hpp"
#include "rsma/qt_algo.hpp"
#include "rsma/subproblem.hpp"

namespace rsma {
namespace {

using conic::ConeKind;
using conic::ConicProgram;

RsmaStructure full_rsma(const Scenario& sc) {
  const int nb = sc.config.num_bs;
  return make_rsma_structure(sc.channel, sc.config, {nb, nb}, sc.config.num_users - 1);
}

int count_tagged(const ConicProgram& p, const std::string& prefix, ConeKind kind) {
  int n = 0;
  for (const auto& c : p.cones()) n += c.kind == kind && c.tag.rfind(prefix, 0) == 0;
  return n;
}

const conic::ConeBlock& block_tagged(const ConicProgram& p, const std::string& tag) {
  for (const auto& c : p.cones()) {
    if (c.tag == tag) return c;
  }
  throw std::out_of_range(tag);
}

std::string tagged(const char* base, int a) { return std::string(base) + "[" + std::to_string(a) + "]"; }
std::string tagged(const char* base, int a, int b) {
  return std::string(base) + "[" + std::to_string(a) + "][" + std::to_string(b) + "]";
}

TEST(Subproblem, CoreVariableCountAtPaperScale) {
  const auto sc = make_scenario(paper_scale_config(), 1);
  const auto s = full_rsma(sc);
  const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
  const auto sub = build_subproblem(sc.channel, s, update_aux(w, sc.channel, s, sc.noise_power_w), sc.config,
                                    sc.noise_power_w);
  EXPECT_EQ(sub.layout.core_variable_count, 944);
  EXPECT_EQ(sub.layout.core_variable_count, 16 * (2 * (10 * 2 + 1) + 16 + 1));
}

TEST(Subproblem, CoreVariableCountAcrossShapes) {
  for (int nb : {1, 2, 3}) {
    for (int nk : {1, 2, 4}) {
      for (int nl : {1, 2}) {
        SystemConfig c = desk_scale_config();
        c.num_bs = nb;
        c.num_users = nk;
        c.antennas_per_bs = nl;
        const auto sc = make_scenario(c, static_cast<std::uint64_t>(nb * 100 + nk * 10 + nl));
        const auto s = full_rsma(sc);
        const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
        const auto sub = build_subproblem(sc.channel, s, update_aux(w, sc.channel, s, sc.noise_power_w),
                                          sc.config, sc.noise_power_w);
        EXPECT_EQ(sub.layout.core_variable_count, nk * (2 * (nb * nl + 1) + nk + 1)) << nb << nk << nl;
        EXPECT_TRUE(sub.program.all_variables_referenced());
      }
    }
  }
}

TEST(Subproblem, TinHasNoCommonRows) {
  const auto sc = make_scenario(desk_scale_config(), 2);
  const auto s = make_structure({SchemeKind::kTin, {2, 1}, 2}, sc.channel, sc.config);
  const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
  const auto sub = build_subproblem(sc.channel, s, update_aux(w, sc.channel, s, sc.noise_power_w), sc.config,
                                    sc.noise_power_w);
  EXPECT_EQ(count_tagged(sub.program, "rate_common", ConeKind::kExponential), 0);
  EXPECT_EQ(count_tagged(sub.program, "qt_common", ConeKind::kSecondOrder), 0);
  EXPECT_EQ(sub.program.count(ConeKind::kExponential), 6);
  EXPECT_EQ(count_tagged(sub.program, "qt_private", ConeKind::kSecondOrder), 6);
}

TEST(Subproblem, RebuildIsStructurallyIdentical) {
  const auto sc = make_scenario(desk_scale_config(), 3);
  const auto s = make_rsma_structure(sc.channel, sc.config, {2, 1}, 2);
  const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
  const auto u = update_aux(w, sc.channel, s, sc.noise_power_w);
  std::ostringstream a, b;
  build_subproblem(sc.channel, s, u, sc.config, sc.noise_power_w).program.dump(a);
  build_subproblem(sc.channel, s, u, sc.config, sc.noise_power_w).program.dump(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Subproblem, DimensionMismatchThrows) {
  const auto sc = make_scenario(desk_scale_config(), 3);
  const auto s = make_rsma_structure(sc.channel, sc.config, {2, 1}, 2);
  EXPECT_THROW(build_subproblem(sc.channel, s, AuxVariables::zeros(5), sc.config, sc.noise_power_w),
               std::invalid_argument);
  SystemConfig c = sc.config;
  c.num_bs = 3;
  EXPECT_THROW(build_subproblem(sc.channel, s, AuxVariables::zeros(6), c, sc.noise_power_w), std::invalid_argument);
}

class QtEncoding : public ::testing::TestWithParam<std::uint64_t> {
 protected:
  void SetUp() override {
    sc_.emplace(make_scenario(desk_scale_config(), GetParam()));
    s_ = make_rsma_structure(sc_->channel, sc_->config, {2, 1}, 2);
    RandomStream rng(GetParam() * 7 + 1);
    w_ = init_precoders(sc_->channel, s_, sc_->config, InitMode::kRandom, GetParam());
    for (auto& v : w_.w_private) v *= rng.uniform(0.2, 1.0);
    for (auto& v : w_.w_common) v *= rng.uniform(0.2, 1.0);
    u_ = update_aux(init_precoders(sc_->channel, s_, sc_->config, InitMode::kMrt), sc_->channel, s_,
                    sc_->noise_power_w);
    // Random auxiliaries with the magnitude of the Lemma-2 ones.
    for (auto& x : u_.u_private) x *= std::polar(rng.uniform(0.5, 1.5), rng.uniform(0.0, 6.28));
    sub_.emplace(build_subproblem(sc_->channel, s_, u_, sc_->config, sc_->noise_power_w));
  }
  std::optional<Scenario> sc_;
  RsmaStructure s_;
  PrecoderSet w_;
  AuxVariables u_;
  std::optional<Subproblem> sub_;
};

// g <= 0 by direct evaluation <=> the encoded cone accepts the point.
TEST_P(QtEncoding, PrivateRowsAgreeWithDirectEvaluation) {
  const double n = sc_->noise_power_w;
  for (int k = 0; k < 6; ++k) {
    const auto uk = u_.u_private[static_cast<std::size_t>(k)];
    const double g0 = qt_private_value(k, uk, 0.0, w_, sc_->channel, s_, n);
    for (double gamma : {-g0 - 0.5 * std::abs(g0), -g0 + 0.5 * std::abs(g0) + 1e-3}) {
      if (gamma < 0.0) continue;
      SubproblemPoint pt{w_, RateAllocation::zeros(6), SinrAuxiliaries::zeros(6)};
      pt.gamma.private_sinr[static_cast<std::size_t>(k)] = gamma;
      const auto x = encode_point(*sub_, pt, sc_->config);
      const double g = qt_private_value(k, uk, gamma, w_, sc_->channel, s_, n);
      const double viol = ConicProgram::block_violation(block_tagged(sub_->program, tagged("qt_private", k)), x);
      if (g <= 0.0) {
        EXPECT_LE(viol, 1e-9 * std::max(1.0, gamma)) << "k=" << k;
      } else {
        EXPECT_GT(viol, 0.0) << "k=" << k;
      }
    }
  }
}

TEST_P(QtEncoding, CommonRowsAgreeWithDirectEvaluation) {
  const double n = sc_->noise_power_w;
  for (int i = 0; i < 6; ++i) {
    if (!s_.has_common_stream(i)) continue;
    for (int k : s_.decode.decoders[static_cast<std::size_t>(i)]) {
      const auto u = u_.u_common(i, k);
      const double g0 = qt_common_value(i, k, u, 0.0, w_, sc_->channel, s_, n);
      for (double gamma : {-g0 - 0.5 * std::abs(g0), -g0 + 0.5 * std::abs(g0) + 1e-3}) {
        if (gamma < 0.0) continue;
        SubproblemPoint pt{w_, RateAllocation::zeros(6), SinrAuxiliaries::zeros(6)};
        pt.gamma.common_sinr(i, k) = gamma;
        const auto x = encode_point(*sub_, pt, sc_->config);
        const double g = qt_common_value(i, k, u, gamma, w_, sc_->channel, s_, n);
        const double viol = ConicProgram::block_violation(block_tagged(sub_->program, tagged("qt_common", i, k)), x);
        if (g <= 0.0) {
          EXPECT_LE(viol, 1e-9 * std::max(1.0, gamma));
        } else {
          EXPECT_GT(viol, 0.0);
        }
      }
    }
  }
}

// A point meeting fronthaul, power, rate-log and QT conditions by direct
// evaluation is accepted by the whole program; breaking a rate bound is not.
TEST_P(QtEncoding, RoundTripFeasiblePoint) {
  const double n = sc_->noise_power_w;
  const auto u = update_aux(w_, sc_->channel, s_, n);
  const auto sub = build_subproblem(sc_->channel, s_, u, sc_->config, n);
  SubproblemPoint pt{w_, RateAllocation::zeros(6), true_sinrs(w_, sc_->channel, s_, n)};
  pt.gamma.private_sinr[0] *= 0.999;
  const auto rates = achievable_rates(w_, sc_->channel, s_, sc_->config, n);
  for (int k = 0; k < 6; ++k) {
    pt.r.private_rate[static_cast<std::size_t>(k)] = std::min(0.9 * rates.private_mbps[static_cast<std::size_t>(k)], 2.0);
    if (s_.has_common_stream(k)) pt.r.common_rate[static_cast<std::size_t>(k)] = std::min(0.9 * rates.common_min_mbps[static_cast<std::size_t>(k)], 1.0);
  }
  ASSERT_TRUE(check_feasibility(w_, pt.r, sc_->channel, s_, sc_->config, n, 0.0).feasible);
  const auto x = encode_point(sub, pt, sc_->config);
  EXPECT_LE(sub.program.max_violation(x), 1e-7);

  pt.r.private_rate[0] = 1.01 * rates.private_mbps[0] + 1e-3;
  EXPECT_GT(sub.program.max_violation(encode_point(sub, pt, sc_->config)), 0.0);
}

TEST_P(QtEncoding, LemmaTwoAuxMakesRowTight) {
  const double n = sc_->noise_power_w;
  const auto u = update_aux(w_, sc_->channel, s_, n);
  const auto truth = true_sinrs(w_, sc_->channel, s_, n);
  for (int k = 0; k < 6; ++k) {
    const double g = truth.private_sinr[static_cast<std::size_t>(k)];
    EXPECT_NEAR(qt_private_value(k, u.u_private[static_cast<std::size_t>(k)], g, w_, sc_->channel, s_, n), 0.0,
                1e-9 * std::max(1.0, g));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, QtEncoding, ::testing::Range<std::uint64_t>(1, 9));

TEST(QtRows, ZeroAuxiliaryLeavesGammaNonPositive) {
  const auto sc = make_scenario(desk_scale_config(), 4);
  const auto s = make_rsma_structure(sc.channel, sc.config, {2, 1}, 2);
  const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
  const auto sub = build_subproblem(sc.channel, s, update_aux(w, sc.channel, s, sc.noise_power_w), sc.config,
                                    sc.noise_power_w);
  const auto hs = sc.channel.scaled(sub.layout.channel_scale);
  const auto blk = encode_qt_private(sub.layout, 1, 0.0, hs, s);
  SubproblemPoint pt{w, RateAllocation::zeros(6), SinrAuxiliaries::zeros(6)};
  EXPECT_LE(ConicProgram::block_violation(blk, encode_point(sub, pt, sc.config)), 1e-12);
  pt.gamma.private_sinr[1] = 1e-3;
  EXPECT_GT(ConicProgram::block_violation(blk, encode_point(sub, pt, sc.config)), 0.0);
}

TEST(QtRows, SingleUserLemmaTwoBoundsGammaBySnr) {
  SystemConfig c = desk_scale_config();
  c.num_bs = 1;
  c.num_users = 1;
  c.antennas_per_bs = 2;
  const auto sc = make_scenario(c, 5);
  const auto s = make_structure({SchemeKind::kTin, {1, 0}, 0}, sc.channel, sc.config);
  const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kRandom, 3);
  const auto sub = build_subproblem(sc.channel, s, update_aux(w, sc.channel, s, sc.noise_power_w), sc.config,
                                    sc.noise_power_w);
  const double snr = std::norm(sc.channel.aggregate(0).dot(w.w_private[0])) / sc.noise_power_w;
  const auto& blk = block_tagged(sub.program, "qt_private[0]");
  SubproblemPoint pt{w, RateAllocation::zeros(1), SinrAuxiliaries::zeros(1)};
  pt.gamma.private_sinr[0] = snr * (1.0 - 1e-7);
  EXPECT_LE(ConicProgram::block_violation(blk, encode_point(sub, pt, sc.config)), 1e-9 * snr);
  pt.gamma.private_sinr[0] = snr * (1.0 + 1e-6);
  EXPECT_GT(ConicProgram::block_violation(blk, encode_point(sub, pt, sc.config)), 0.0);
}

// Independent 1-D oracle: with one user and one BS the subproblem reduces to a
// search over the transmit power p, since the best precoder aligns with u* h.
double scalar_subproblem_oracle(double a, double noise_scaled_u2, double tau, double cap, double d, double alpha,
                                double pmax) {
  auto psi = [&](double p) {
    const double gamma = std::max(0.0, 2.0 * a * std::sqrt(p) - noise_scaled_u2);
    const double r = std::min({tau * std::log2(1.0 + gamma), cap, d});
    return alpha * (r - d) * (r - d) + (1.0 - alpha) * p;
  };
  double best_p = 0.0;
  double best = psi(0.0);
  const int n = 200000;
  for (int i = 1; i <= n; ++i) {
    const double p = pmax * i / n;
    if (psi(p) < best) {
      best = psi(p);
      best_p = p;
    }
  }
  double lo = std::max(0.0, best_p - pmax / n), hi = std::min(pmax, best_p + pmax / n);
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (psi(m1) < psi(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return std::min(best, psi(0.5 * (lo + hi)));
}

TEST(Subproblem, SingleUserMatchesScalarOracle) {
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    for (double alpha : {0.2, 0.5, 0.9}) {
      SystemConfig c = desk_scale_config();
      c.num_bs = 1;
      c.num_users = 1;
      c.antennas_per_bs = 1;
      c.alpha = alpha;
      c.fronthaul_capacity_mbps = 9.0;
      const auto sc = make_scenario(c, seed);
      const auto s = make_structure({SchemeKind::kTin, {1, 0}, 0}, sc.channel, sc.config);
      const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
      const double n = sc.noise_power_w;
      const auto u = update_aux(w, sc.channel, s, n);
      const auto sub = build_subproblem(sc.channel, s, u, sc.config, n);
      const auto res = conic::solve(sub.program, {});
      ASSERT_EQ(res.status, conic::SolverStatus::kOptimal);
      const auto pt = decode_point(sub.layout, res.x);
      const double got = objective_psi(pt.w, pt.r, sc.config);

      const double uabs = std::abs(u.u_private[0]);
      const double habs = std::abs(sc.channel.link(0, 0)(0));
      const double expected = scalar_subproblem_oracle(uabs * habs, uabs * uabs * n, c.bandwidth_mhz,
                                                       c.fronthaul_capacity_mbps, sc.config.desired_rates_mbps[0],
                                                       alpha, c.max_power_w());
      EXPECT_NEAR(got, expected, 1e-4 * std::max(1e-12, expected)) << "seed " << seed << " alpha " << alpha;
      EXPECT_NEAR(res.objective, got, 1e-6 * std::max(1.0, got));
    }
  }
}

TEST(Subproblem, EpigraphObjectiveEqualsPsi) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto sc = make_scenario(desk_scale_config(), seed);
    const auto s = make_rsma_structure(sc.channel, sc.config, {2, 1}, 2);
    const auto w = init_precoders(sc.channel, s, sc.config, InitMode::kMrt);
    const auto sub = build_subproblem(sc.channel, s, update_aux(w, sc.channel, s, sc.noise_power_w), sc.config,
                                      sc.noise_power_w);
    const auto res = conic::solve(sub.program, {});
    ASSERT_EQ(res.status, conic::SolverStatus::kOptimal);
    const auto pt = decode_point(sub.layout, res.x);
    const double psi = objective_psi(pt.w, pt.r, sc.config);
    EXPECT_NEAR(res.objective, psi, 1e-6 * std::max(1.0, std::abs(psi)));
    EXPECT_LE(sub.program.max_violation(res.x), 1e-7);
    EXPECT_EQ(pt.w.masking_violation(s.clusters, 2), 0.0);
  }
}

TEST(Subproblem, FrozenAuxiliaryDropsStream) {
  const auto sc = make_scenario(desk_scale_config(), 6);
  const auto s = make_rsma_structure(sc.channel, sc.config, {2, 1}, 2);
  auto u = update_aux(init_precoders(sc.channel, s, sc.config, InitMode::kMrt), sc.channel, s, sc.noise_power_w);
  const auto full = build_subproblem(sc.channel, s, u, sc.config, sc.noise_power_w);
  u.u_private[2] = 0.0;
  const auto reduced = build_subproblem(sc.channel, s, u, sc.config, sc.noise_power_w);
  EXPECT_EQ(reduced.layout.private_rate[2], -1);
  EXPECT_EQ(reduced.layout.private_gamma[2], -1);
  EXPECT_LT(reduced.program.num_variables(), full.program.num_variables());
  for (int v : reduced.layout.private_re[2]) EXPECT_EQ(v, -1);
}

}  // namespace
}  // namespace rsma
