#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rsma/csv.hpp"
#include "rsma/harness.hpp"

namespace rsma {
namespace {

using nlohmann::json;

TEST(Names, RoundTrip) {
  for (auto p : {SweepParameter::kFronthaul, SweepParameter::kSnr, SweepParameter::kTargetRates,
                 SweepParameter::kAlpha}) {
    EXPECT_EQ(sweep_parameter_from_string(to_string(p)), p);
  }
  for (auto v : {CriticalityVariant::kMixed, CriticalityVariant::kNoMixLO, CriticalityVariant::kNoMixME,
                 CriticalityVariant::kNoMixHI, CriticalityVariant::kNoCrit}) {
    EXPECT_EQ(variant_from_string(to_string(v)), v);
  }
  EXPECT_EQ(to_string(SweepParameter::kTargetRates), "target-rates");
  EXPECT_THROW(sweep_parameter_from_string("power"), ConfigError);
  EXPECT_THROW(variant_from_string("nomixme"), ConfigError);
}

TEST(Variants, RewriteDemandsOrAlphaOnly) {
  const auto truth = make_scenario(desk_scale_config(), 1).config;
  const auto me = apply_criticality_variant(CriticalityVariant::kNoMixME, truth);
  for (double d : me.desired_rates_mbps) EXPECT_EQ(d, 7.0);
  EXPECT_EQ(me.alpha, truth.alpha);
  for (double d : apply_criticality_variant(CriticalityVariant::kNoMixHI, truth).desired_rates_mbps) EXPECT_EQ(d, 14.0);
  for (double d : apply_criticality_variant(CriticalityVariant::kNoMixLO, truth).desired_rates_mbps) EXPECT_EQ(d, 3.0);
  const auto nc = apply_criticality_variant(CriticalityVariant::kNoCrit, truth);
  EXPECT_EQ(nc.alpha, 0.0);
  EXPECT_EQ(nc.desired_rates_mbps, truth.desired_rates_mbps);
  const auto mixed = apply_criticality_variant(CriticalityVariant::kMixed, truth);
  EXPECT_EQ(mixed.desired_rates_mbps, truth.desired_rates_mbps);
  EXPECT_EQ(mixed.alpha, truth.alpha);
}

TEST(SweepValue, Semantics) {
  const auto base = desk_scale_config();
  EXPECT_EQ(apply_sweep_value(SweepParameter::kFronthaul, 21.0, base).fronthaul_capacity_mbps, 21.0);
  EXPECT_EQ(apply_sweep_value(SweepParameter::kAlpha, 0.3, base).alpha, 0.3);
  const auto snr = apply_sweep_value(SweepParameter::kSnr, 20.0, base);
  EXPECT_NEAR(10.0 * std::log10(snr.max_power_w() / noise_power_w(snr)), 20.0, 1e-9);
  auto pinned = base;
  pinned.desired_rates_mbps = {1, 2, 3, 4, 5, 6};
  const auto tr = apply_sweep_value(SweepParameter::kTargetRates, 2.5, pinned);
  EXPECT_EQ(tr.level_rates.low_mbps, 2.5);
  EXPECT_EQ(tr.level_rates.medium_mbps, 5.0);
  EXPECT_EQ(tr.level_rates.high_mbps, 10.0);
  EXPECT_TRUE(tr.desired_rates_mbps.empty());
}

TEST(SweepSpec, ValidateRejectsEmptyLists) {
  SweepSpec s;
  s.grid = {1.0};
  s.seeds = {1};
  EXPECT_NO_THROW(s.validate());
  auto bad = s;
  bad.grid.clear();
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.seeds.clear();
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.schemes.clear();
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.variants.clear();
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.threads = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(RunPoint, EvaluatesAgainstTrueDemands) {
  const auto cfg = desk_scale_config();
  const auto out = run_point(cfg, 3, SchemeKind::kRsma, CriticalityVariant::kNoMixHI, {2, 1}, 2, {});
  const auto truth = make_scenario(cfg, 3).config;
  double sum = 0.0;
  for (double d : truth.desired_rates_mbps) sum += d;
  EXPECT_DOUBLE_EQ(out.row.sum_target_mbps, sum);
  EXPECT_EQ(out.row.variant, "NoMixHI");
  EXPECT_EQ(out.row.scheme, "rsma");
  EXPECT_EQ(out.row.seed, 3u);
  EXPECT_NEAR(out.row.mse, rate_mse(out.solution.r, truth.desired_rates_mbps), 1e-12);
  EXPECT_NEAR(out.row.psi, objective_psi(out.solution.w, out.solution.r, truth), 1e-12);
  EXPECT_NEAR(out.row.phi, energy_efficiency_phi(out.solution.w, out.solution.r, truth), 1e-12);
  EXPECT_EQ(out.row.status, "ok");
  EXPECT_TRUE(out.row.feasible);
}

SweepSpec small_spec() {
  SweepSpec s;
  s.grid = {14.0, 28.0};
  s.seeds = {1, 2};
  s.variants = {CriticalityVariant::kMixed, CriticalityVariant::kNoCrit};
  s.threads = 2;
  return s;
}

TEST(Sweep, CardinalityOrderAndDeterminism) {
  const auto spec = small_spec();
  const auto rows = sweep(spec, desk_scale_config());
  ASSERT_EQ(rows.size(), 2u * 2u * 2u * 3u);
  std::size_t i = 0;
  for (double v : spec.grid) {
    for (auto var : spec.variants) {
      for (auto seed : spec.seeds) {
        for (auto sch : spec.schemes) {
          EXPECT_EQ(rows[i].value, v);
          EXPECT_EQ(rows[i].variant, to_string(var));
          EXPECT_EQ(rows[i].seed, seed);
          EXPECT_EQ(rows[i].scheme, to_string(sch));
          EXPECT_EQ(rows[i].parameter, "fronthaul");
          ++i;
        }
      }
    }
  }
  auto serial = spec;
  serial.threads = 1;
  std::ostringstream a, b;
  write_results_csv(a, rows);
  write_results_csv(b, sweep(serial, desk_scale_config()));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), result_csv_header());
  EXPECT_EQ(result_csv_header(false).find("wall_ms"), std::string::npos);
  EXPECT_NE(result_csv_header(true).find("wall_ms"), std::string::npos);
}

TEST(Aggregate, MeansAndSampleStd) {
  std::istringstream in(result_csv_header() +
                        "\n"
                        "fronthaul,14,30,Mixed,1,rsma,1,2,0.1,5,3,1,0,1,ok,0\n"
                        "fronthaul,14,30,Mixed,2,rsma,3,4,0.3,7,5,1,0,1,ok,0\n"
                        "fronthaul,14,30,Mixed,3,rsma,nan,nan,nan,nan,0,0,0,0,infeasible,nan\n"
                        "fronthaul,14,30,Mixed,1,tin,10,0,0,1,2,1,0,1,ok,0\n");
  const auto series = aggregate_results(in);
  ASSERT_EQ(series.size(), 2u);
  const auto& r = series[0];
  EXPECT_EQ(r.scheme, "rsma");
  EXPECT_EQ(r.count, 2);
  EXPECT_DOUBLE_EQ(r.psi_mean, 2.0);
  EXPECT_DOUBLE_EQ(r.psi_std, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(r.power_mean, 0.2);
  EXPECT_DOUBLE_EQ(r.iterations_mean, 4.0);
  EXPECT_EQ(series[1].scheme, "tin");
  EXPECT_EQ(series[1].count, 1);
  EXPECT_EQ(series[1].psi_std, 0.0);
  std::ostringstream out;
  write_series_csv(out, series);
  const auto t = [&] {
    std::istringstream back(out.str());
    return csv::read(back);
  }();
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_GE(t.column("psi_mean"), 0);
}

TEST(Aggregate, RejectsEmptyOrHeaderless) {
  std::istringstream empty("");
  EXPECT_THROW(aggregate_results(empty), ConfigError);
  std::istringstream header_only(result_csv_header() + "\n");
  EXPECT_THROW(aggregate_results(header_only), ConfigError);
  std::istringstream wrong("a,b\n1,2\n");
  EXPECT_THROW(aggregate_results(wrong), ConfigError);
}

TEST(Experiment, ParsesSections) {
  const json j = {{"preset", "desk"},
                  {"system", {{"fronthaul_capacity_mbps", 35.0}}},
                  {"structure", {{"private_cluster_size", 3}, {"decode_set_size", 1}}},
                  {"algorithm", {{"epsilon_rel", 1e-3}, {"init", "random"}}},
                  {"sweep", {{"parameter", "alpha"}, {"grid", {0.1, 0.9}}, {"schemes", {"tin"}},
                             {"seeds", 3}, {"first_seed", 10}}}};
  const auto e = parse_experiment(j);
  EXPECT_EQ(e.system.fronthaul_capacity_mbps, 35.0);
  EXPECT_EQ(e.sweep.sizes.private_size, 3);
  EXPECT_EQ(e.sweep.decode_set_size, 1);
  EXPECT_EQ(e.sweep.qt.epsilon_rel, 1e-3);
  EXPECT_EQ(e.sweep.qt.init, InitMode::kRandom);
  EXPECT_EQ(e.sweep.parameter, SweepParameter::kAlpha);
  EXPECT_EQ(e.sweep.schemes, std::vector<SchemeKind>{SchemeKind::kTin});
  EXPECT_EQ(e.sweep.seeds, (std::vector<std::uint64_t>{10, 11, 12}));
  EXPECT_EQ(parse_experiment(json{{"sweep", {{"seeds", {4, 9}}}}}).sweep.seeds,
            (std::vector<std::uint64_t>{4, 9}));
  EXPECT_EQ(parse_experiment(json{{"preset", "paper"}}).system.num_bs, 10);
}

TEST(Experiment, RejectsBadInput) {
  EXPECT_THROW(parse_experiment(json::array()), ConfigError);
  EXPECT_THROW(parse_experiment(json{{"sytem", json::object()}}), ConfigError);
  EXPECT_THROW(parse_experiment(json{{"preset", "huge"}}), ConfigError);
  EXPECT_THROW(parse_experiment(json{{"sweep", {{"grid", "1,2"}}}}), ConfigError);
  EXPECT_THROW(parse_experiment(json{{"sweep", {{"grid", json::array()}}}}), ConfigError);
  EXPECT_THROW(parse_experiment(json{{"sweep", {{"seeds", 0}}}}), ConfigError);
  EXPECT_THROW(parse_experiment(json{{"sweep", {{"schemes", {"noma"}}}}}), ConfigError);
  EXPECT_THROW(parse_experiment(json{{"algorithm", {{"max_iterations", 0}}}}), ConfigError);
  EXPECT_THROW(parse_experiment(json{{"structure", {{"private_cluster_size", 9}}}}), ConfigError);
  EXPECT_THROW(parse_experiment(json{{"solver", {{"barrier_growth", 0.5}}}}), ConfigError);
  EXPECT_THROW(parse_experiment(json{{"system", {{"num_bs", 0}}}}), ConfigError);
  EXPECT_THROW(load_experiment("/nonexistent/cfg.json"), ConfigError);
}

TEST(Experiment, DefaultIsRunnable) {
  const auto e = load_experiment("default");
  EXPECT_EQ(e.sweep.grid, (std::vector<double>{7, 14, 21, 28, 35, 42}));
  EXPECT_EQ(e.sweep.seeds.size(), 20u);
  EXPECT_NO_THROW(e.sweep.validate());
}

}  // namespace
}  // namespace rsma
