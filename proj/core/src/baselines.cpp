#include "rsma/baselines.hpp"

#include <numeric>

namespace rsma {

std::string to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::kRsma:
      return "rsma";
    case SchemeKind::kTin:
      return "tin";
    case SchemeKind::kScm:
      return "scm";
  }
  return "?";
}

SchemeKind scheme_from_string(const std::string& s) {
  if (s == "rsma") return SchemeKind::kRsma;
  if (s == "tin") return SchemeKind::kTin;
  if (s == "scm") return SchemeKind::kScm;
  throw ConfigError("unknown scheme '" + s + "' (expected rsma, tin or scm)");
}

std::vector<SchemeKind> all_schemes() { return {SchemeKind::kRsma, SchemeKind::kScm, SchemeKind::kTin}; }

RsmaStructure make_tin_structure(const ClusterSets& clusters) {
  RsmaStructure s;
  s.clusters.private_clusters = clusters.private_clusters;
  s.clusters.common_clusters.assign(clusters.private_clusters.size(), {});
  std::size_t nk = 0;
  for (const auto& c : clusters.private_clusters) {
    for (int k : c) nk = std::max(nk, static_cast<std::size_t>(k) + 1);
  }
  for (const auto& c : clusters.common_clusters) {
    for (int k : c) nk = std::max(nk, static_cast<std::size_t>(k) + 1);
  }
  s.decode.decoders.assign(nk, {});
  s.decode.decoded.assign(nk, {});
  s.common_mode = CommonMode::kNone;
  return s;
}

RsmaStructure make_scm_structure(const SystemConfig& config, const ClusterSets& clusters) {
  const int nk = config.num_users;
  if (nk < 1) throw std::invalid_argument("make_scm_structure: needs at least one user");
  std::vector<int> everyone(static_cast<std::size_t>(nk));
  std::iota(everyone.begin(), everyone.end(), 0);

  RsmaStructure s;
  s.common_mode = CommonMode::kSharedSingle;
  s.clusters.private_clusters = clusters.private_clusters;
  s.clusters.common_clusters.assign(static_cast<std::size_t>(config.num_bs), everyone);
  s.decode.decoders.assign(static_cast<std::size_t>(nk), {});
  s.decode.decoders[0] = everyone;
  s.decode.decoded.assign(static_cast<std::size_t>(nk), std::vector<int>{0});
  return s;
}

RsmaStructure make_rsma_structure(const ChannelState& h, const SystemConfig& config, ClusterSizes sizes,
                                  int decode_set_size) {
  RsmaStructure s;
  s.common_mode = CommonMode::kPerUser;
  s.clusters = build_clusters(h, config, sizes);
  s.decode = build_decode_structure(h, s.clusters, config, decode_set_size);
  return s;
}

RsmaStructure make_structure(const SchemeSpec& spec, const ChannelState& h, const SystemConfig& config) {
  switch (spec.kind) {
    case SchemeKind::kRsma:
      return make_rsma_structure(h, config, spec.sizes, spec.decode_set_size);
    case SchemeKind::kTin:
      return make_tin_structure(build_clusters(h, config, {spec.sizes.private_size, 0}));
    case SchemeKind::kScm:
      return make_scm_structure(config, build_clusters(h, config, {spec.sizes.private_size, 0}));
  }
  throw std::invalid_argument("make_structure: unknown scheme");
}

}  // namespace rsma
