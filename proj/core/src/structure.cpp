#include "rsma/structure.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rsma {

namespace {

bool contains_sorted(const std::vector<int>& v, int x) { return std::binary_search(v.begin(), v.end(), x); }

// Indices 0..n-1 sorted by descending score, ties by ascending index.
std::vector<int> rank_descending(const std::vector<double>& score) {
  std::vector<int> idx(score.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&score](int a, int b) {
    return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
  });
  return idx;
}

double restricted_norm2(const ChannelState& h, int user, const std::vector<int>& bss) {
  double acc = 0.0;
  for (int b : bss) acc += h.link(b, user).squaredNorm();
  return acc;
}

}  // namespace

bool ClusterSets::serves_private(int b, int k) const {
  return contains_sorted(private_clusters[static_cast<std::size_t>(b)], k);
}

bool ClusterSets::serves_common(int b, int k) const {
  return contains_sorted(common_clusters[static_cast<std::size_t>(b)], k);
}

std::vector<int> ClusterSets::private_serving(int k) const {
  std::vector<int> out;
  for (int b = 0; b < num_bs(); ++b) {
    if (serves_private(b, k)) out.push_back(b);
  }
  return out;
}

std::vector<int> ClusterSets::common_serving(int k) const {
  std::vector<int> out;
  for (int b = 0; b < num_bs(); ++b) {
    if (serves_common(b, k)) out.push_back(b);
  }
  return out;
}

int DecodeStructure::rank(int k, int i) const {
  const auto& order = decoded[static_cast<std::size_t>(k)];
  const auto it = std::find(order.begin(), order.end(), i);
  return it == order.end() ? 0 : static_cast<int>(it - order.begin()) + 1;
}

void DecodeStructure::check_consistency() const {
  const int k_users = num_users();
  if (static_cast<int>(decoded.size()) != k_users) {
    throw std::invalid_argument("decode structure: |I| != |M|");
  }
  for (int k = 0; k < k_users; ++k) {
    const auto& order = decoded[static_cast<std::size_t>(k)];
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("decode structure: decoding order repeats an owner");
    }
    for (int i : order) {
      if (i < 0 || i >= k_users) throw std::invalid_argument("decode structure: owner out of range");
      if (!contains_sorted(decoders[static_cast<std::size_t>(i)], k)) {
        throw std::invalid_argument("decode structure: i in I_k but k not in M_i");
      }
    }
  }
  for (int i = 0; i < k_users; ++i) {
    for (int k : decoders[static_cast<std::size_t>(i)]) {
      if (k < 0 || k >= k_users) throw std::invalid_argument("decode structure: decoder out of range");
      if (rank(k, i) == 0) throw std::invalid_argument("decode structure: k in M_i but i not in I_k");
    }
  }
}

bool RsmaStructure::has_common_stream(int i) const {
  switch (common_mode) {
    case CommonMode::kNone:
      return false;
    case CommonMode::kSharedSingle:
      return i == 0 && !decode.decoders[0].empty();
    case CommonMode::kPerUser:
      if (decode.decoders[static_cast<std::size_t>(i)].empty()) return false;
      for (int b = 0; b < num_bs(); ++b) {
        if (clusters.serves_common(b, i)) return true;
      }
      return false;
  }
  return false;
}

int RsmaStructure::num_common_streams() const {
  int n = 0;
  for (int i = 0; i < num_users(); ++i) n += has_common_stream(i) ? 1 : 0;
  return n;
}

ClusterSets build_clusters(const ChannelState& channel, const SystemConfig& config, ClusterSizes sizes) {
  const int nb = config.num_bs;
  const int nk = config.num_users;
  if (sizes.private_size < 1 || sizes.private_size > nb || sizes.common_size < 0 || sizes.common_size > nb) {
    throw std::invalid_argument("build_clusters: cluster sizes must lie in [1, B]");
  }
  ClusterSets out;
  out.private_clusters.assign(static_cast<std::size_t>(nb), {});
  out.common_clusters.assign(static_cast<std::size_t>(nb), {});
  for (int k = 0; k < nk; ++k) {
    std::vector<double> strength(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) strength[static_cast<std::size_t>(b)] = channel.link(b, k).norm();
    const auto order = rank_descending(strength);
    for (int n = 0; n < sizes.private_size; ++n) {
      out.private_clusters[static_cast<std::size_t>(order[static_cast<std::size_t>(n)])].push_back(k);
    }
    for (int n = 0; n < sizes.common_size; ++n) {
      out.common_clusters[static_cast<std::size_t>(order[static_cast<std::size_t>(n)])].push_back(k);
    }
  }
  // Users were appended in ascending k, so every list is already sorted.
  return out;
}

DecodeStructure build_decode_structure(const ChannelState& channel, const ClusterSets& clusters,
                                       const SystemConfig& config, int decode_set_size) {
  if (decode_set_size < 0) throw std::invalid_argument("build_decode_structure: d must be >= 0");
  const int nk = config.num_users;
  const int d = std::min(decode_set_size, nk - 1);
  DecodeStructure out;
  out.decoders.assign(static_cast<std::size_t>(nk), {});
  out.decoded.assign(static_cast<std::size_t>(nk), {});

  std::vector<std::vector<int>> serving(static_cast<std::size_t>(nk));
  for (int k = 0; k < nk; ++k) serving[static_cast<std::size_t>(k)] = clusters.common_serving(k);

  for (int k = 0; k < nk; ++k) {
    const auto& cl = serving[static_cast<std::size_t>(k)];
    if (cl.empty()) continue;
    std::vector<double> strength(static_cast<std::size_t>(nk), -1.0);
    for (int j = 0; j < nk; ++j) {
      if (j != k) strength[static_cast<std::size_t>(j)] = restricted_norm2(channel, j, cl);
    }
    strength[static_cast<std::size_t>(k)] = -2.0;  // k is always included separately
    const auto order = rank_descending(strength);
    auto& m = out.decoders[static_cast<std::size_t>(k)];
    m.push_back(k);
    for (int n = 0; n < d; ++n) m.push_back(order[static_cast<std::size_t>(n)]);
    std::sort(m.begin(), m.end());
  }

  for (int k = 0; k < nk; ++k) {
    std::vector<int> owners;
    for (int i = 0; i < nk; ++i) {
      if (contains_sorted(out.decoders[static_cast<std::size_t>(i)], k)) owners.push_back(i);
    }
    std::vector<double> strength;
    strength.reserve(owners.size());
    for (int i : owners) strength.push_back(restricted_norm2(channel, k, serving[static_cast<std::size_t>(i)]));
    const auto order = rank_descending(strength);
    auto& seq = out.decoded[static_cast<std::size_t>(k)];
    for (int pos : order) seq.push_back(owners[static_cast<std::size_t>(pos)]);
  }
  return out;
}

std::vector<int> residual_set(const DecodeStructure& decode, int i, int k) {
  const int r = decode.rank(k, i);
  if (r == 0) throw std::domain_error("residual_set: i is not decoded by k");
  const auto& order = decode.decoded[static_cast<std::size_t>(k)];
  std::vector<int> out(order.begin() + r, order.end());
  std::sort(out.begin(), out.end());
  return out;
}

InterferenceSet private_interference(const RsmaStructure& s, int k) {
  InterferenceSet out;
  const int nk = s.num_users();
  for (int j = 0; j < nk; ++j) {
    if (j != k) out.private_streams.push_back(j);
  }
  for (int l = 0; l < nk; ++l) {
    if (s.has_common_stream(l) && !s.decode.decodes(k, l)) out.common_streams.push_back(l);
  }
  return out;
}

InterferenceSet common_interference(const RsmaStructure& s, int i, int k) {
  InterferenceSet out;
  const int nk = s.num_users();
  const int ri = s.decode.rank(k, i);
  if (ri == 0) throw std::domain_error("common_interference: i is not decoded by k");
  for (int j = 0; j < nk; ++j) out.private_streams.push_back(j);
  for (int l = 0; l < nk; ++l) {
    if (!s.has_common_stream(l) || l == i) continue;
    const int rl = s.decode.rank(k, l);
    if (rl == 0 || rl > ri) out.common_streams.push_back(l);
  }
  return out;
}

std::string to_string(CommonMode m) {
  switch (m) {
    case CommonMode::kNone:
      return "none";
    case CommonMode::kPerUser:
      return "per_user";
    case CommonMode::kSharedSingle:
      return "shared_single";
  }
  return "?";
}

void to_json(nlohmann::json& j, const RsmaStructure& s) {
  nlohmann::json users = nlohmann::json::array();
  for (int k = 0; k < s.num_users(); ++k) {
    users.push_back({{"user", k},
                     {"decoders", s.decode.decoders[static_cast<std::size_t>(k)]},
                     {"decoding_order", s.decode.decoded[static_cast<std::size_t>(k)]},
                     {"private_serving", s.clusters.private_serving(k)},
                     {"common_serving", s.clusters.common_serving(k)}});
  }
  j = nlohmann::json{{"common_mode", to_string(s.common_mode)},
                     {"private_clusters", s.clusters.private_clusters},
                     {"common_clusters", s.clusters.common_clusters},
                     {"users", users}};
}

void from_json(const nlohmann::json& j, RsmaStructure& s) {
  const auto mode = j.at("common_mode").get<std::string>();
  if (mode == "none") {
    s.common_mode = CommonMode::kNone;
  } else if (mode == "per_user") {
    s.common_mode = CommonMode::kPerUser;
  } else if (mode == "shared_single") {
    s.common_mode = CommonMode::kSharedSingle;
  } else {
    throw std::invalid_argument("unknown common_mode '" + mode + "'");
  }
  j.at("private_clusters").get_to(s.clusters.private_clusters);
  j.at("common_clusters").get_to(s.clusters.common_clusters);
  for (auto& c : s.clusters.private_clusters) std::sort(c.begin(), c.end());
  for (auto& c : s.clusters.common_clusters) std::sort(c.begin(), c.end());
  const auto& users = j.at("users");
  s.decode.decoders.assign(users.size(), {});
  s.decode.decoded.assign(users.size(), {});
  for (const auto& u : users) {
    const auto k = u.at("user").get<std::size_t>();
    if (k >= users.size()) throw std::invalid_argument("structure: user index out of range");
    u.at("decoders").get_to(s.decode.decoders[k]);
    std::sort(s.decode.decoders[k].begin(), s.decode.decoders[k].end());
    u.at("decoding_order").get_to(s.decode.decoded[k]);
  }
  s.decode.check_consistency();
}

}  // namespace rsma
