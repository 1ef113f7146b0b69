#include <gtest/gtest.h>

#include "rsma/baselines.hpp"
#include "rsma/qt_algo.hpp"

namespace rsma {
namespace {

TEST(Scheme, StringRoundTrip) {
  for (auto k : all_schemes()) EXPECT_EQ(scheme_from_string(to_string(k)), k);
  EXPECT_THROW(scheme_from_string("noma"), ConfigError);
  EXPECT_THROW(scheme_from_string("RSMA"), ConfigError);
  EXPECT_EQ(all_schemes().size(), 3u);
}

TEST(Tin, HasNoCommonStreams) {
  const auto sc = make_scenario(desk_scale_config(), 1);
  const auto s = make_structure({SchemeKind::kTin, {2, 1}, 2}, sc.channel, sc.config);
  EXPECT_EQ(s.common_mode, CommonMode::kNone);
  EXPECT_EQ(s.num_common_streams(), 0);
  for (const auto& c : s.clusters.common_clusters) EXPECT_TRUE(c.empty());
  for (int k = 0; k < 6; ++k) EXPECT_TRUE(s.decode.decoded[static_cast<std::size_t>(k)].empty());
  EXPECT_EQ(s.clusters.private_clusters, build_clusters(sc.channel, sc.config, {2, 0}).private_clusters);
}

TEST(Scm, SingleStreamFromAllBsDecodedFirstByEveryone) {
  const auto sc = make_scenario(desk_scale_config(), 2);
  const auto s = make_structure({SchemeKind::kScm, {2, 1}, 2}, sc.channel, sc.config);
  EXPECT_EQ(s.common_mode, CommonMode::kSharedSingle);
  EXPECT_EQ(s.num_common_streams(), 1);
  EXPECT_TRUE(s.has_common_stream(0));
  for (int b = 0; b < 4; ++b) EXPECT_EQ(s.clusters.common_clusters[static_cast<std::size_t>(b)].size(), 6u);
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(s.decode.decoded[static_cast<std::size_t>(k)], std::vector<int>{0});
    EXPECT_EQ(s.decode.rank(k, 0), 1);
  }
  EXPECT_NO_THROW(s.decode.check_consistency());
}

TEST(Rsma, DelegatesToClusteringAndDecoding) {
  const auto sc = make_scenario(desk_scale_config(), 3);
  const auto s = make_structure({SchemeKind::kRsma, {2, 1}, 2}, sc.channel, sc.config);
  const auto cl = build_clusters(sc.channel, sc.config, {2, 1});
  EXPECT_EQ(s.clusters.private_clusters, cl.private_clusters);
  EXPECT_EQ(s.clusters.common_clusters, cl.common_clusters);
  EXPECT_EQ(s.decode.decoded, build_decode_structure(sc.channel, cl, sc.config, 2).decoded);
}

SystemConfig one_user() {
  SystemConfig c = desk_scale_config();
  c.num_users = 1;
  c.level_rates = {30.0, 30.0, 30.0};
  return c;
}

// With a single user the common stream adds nothing TIN cannot do.
TEST(Baselines, SingleUserRsmaMatchesTin) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto sc = make_scenario(one_user(), seed);
    const auto tin = make_structure({SchemeKind::kTin, {2, 1}, 2}, sc.channel, sc.config);
    const auto rs = make_structure({SchemeKind::kRsma, {2, 1}, 2}, sc.channel, sc.config);
    const auto a = run(sc.config, sc.channel, tin, sc.noise_power_w);
    const auto b = run(sc.config, sc.channel, rs, sc.noise_power_w);
    EXPECT_NEAR(b.psi, a.psi, 1e-4 * std::max(1.0, a.psi)) << seed;
  }
}

// Zeroing the common precoders and rates of a feasible RSMA point leaves a
// feasible TIN point with identical private SINRs.
TEST(Baselines, ZeroCommonPowerReducesToTin) {
  const auto sc = make_scenario(desk_scale_config(), 4);
  const auto rs = make_structure({SchemeKind::kRsma, {2, 1}, 2}, sc.channel, sc.config);
  const auto tin = make_structure({SchemeKind::kTin, {2, 1}, 2}, sc.channel, sc.config);
  auto w = init_precoders(sc.channel, rs, sc.config, InitMode::kMrt);
  for (auto& v : w.w_common) v.setZero();
  for (int k = 0; k < 6; ++k) {
    EXPECT_NEAR(sinr_private(k, w, sc.channel, rs, sc.noise_power_w),
                sinr_private(k, w, sc.channel, tin, sc.noise_power_w), 1e-12);
  }
  const auto rates = achievable_rates(w, sc.channel, tin, sc.config, sc.noise_power_w);
  RateAllocation r = RateAllocation::zeros(6);
  r.private_rate = rates.private_mbps;
  for (auto& x : r.private_rate) x = std::min(x, 1.0);
  EXPECT_TRUE(check_feasibility(w, r, sc.channel, tin, sc.config, sc.noise_power_w, 1e-9).feasible);
}

}  // namespace
}  // namespace rsma
