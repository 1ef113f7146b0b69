#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rsma/netmodel.hpp"

namespace rsma {

// K_b^p and K_b^c: users whose private / common stream BS b transmits.
// Each per-BS list is sorted ascending.
struct ClusterSets {
  std::vector<std::vector<int>> private_clusters;
  std::vector<std::vector<int>> common_clusters;

  int num_bs() const { return static_cast<int>(private_clusters.size()); }
  bool serves_private(int b, int k) const;
  bool serves_common(int b, int k) const;
  // BSs serving user k's stream, ascending.
  std::vector<int> private_serving(int k) const;
  std::vector<int> common_serving(int k) const;
};

// M_k (decoders of k's common message), I_k (owners whose common messages k
// decodes) and the decoding order pi_k. `decoded[k]` is stored in decoding
// order, so pi_k(i) is the 1-based position of i in decoded[k].
struct DecodeStructure {
  std::vector<std::vector<int>> decoders;
  std::vector<std::vector<int>> decoded;

  int num_users() const { return static_cast<int>(decoders.size()); }
  bool decodes(int k, int i) const { return rank(k, i) > 0; }
  // pi_k(i), or 0 when i is not in I_k.
  int rank(int k, int i) const;
  // Throws std::invalid_argument unless i in I_k <=> k in M_i and every
  // decoding order is a permutation.
  void check_consistency() const;
};

// How common-stream rates are credited to users.
enum class CommonMode {
  kNone,          // no common streams (TIN)
  kPerUser,       // each user i owns common stream i with rate r_i^c
  kSharedSingle,  // one super-common stream (slot 0), rate split into shares
};

struct RsmaStructure {
  ClusterSets clusters;
  DecodeStructure decode;
  CommonMode common_mode = CommonMode::kPerUser;

  int num_users() const { return decode.num_users(); }
  int num_bs() const { return clusters.num_bs(); }
  // Whether slot i carries a transmitted common stream.
  bool has_common_stream(int i) const;
  int num_common_streams() const;
};

// Common streams default to the single strongest BS so that a common Mbps
// costs less fronthaul than a private one.
struct ClusterSizes {
  int private_size = 2;
  int common_size = 1;
};

// Each user's private (common) stream is served by its s_p (s_c) strongest
// BSs by ||h_{b,k}||; ties go to the lower BS index.
ClusterSets build_clusters(const ChannelState& channel, const SystemConfig& config, ClusterSizes sizes);

// M_k = {k} plus the d users with the strongest channel towards k's
// common-serving BSs. Owners are decoded in descending order of the decoder's
// channel strength towards the owner's common cluster; ties by owner index.
// d >= K is clamped to K - 1. Users without a common cluster get M_k empty.
DecodeStructure build_decode_structure(const ChannelState& channel, const ClusterSets& clusters,
                                       const SystemConfig& config, int decode_set_size);

// I'_{i,k}: owners in I_k decoded after i at user k. Throws std::domain_error
// when i is not in I_k.
std::vector<int> residual_set(const DecodeStructure& decode, int i, int k);

// Stream index sets that interfere with a decoding step.
struct InterferenceSet {
  std::vector<int> private_streams;
  std::vector<int> common_streams;
};

// Private message of k: private j != k and common l not in I_k.
InterferenceSet private_interference(const RsmaStructure& s, int k);
// Common message of i at k: all private streams and common l in
// K \ (I_k \ I'_{i,k}).
InterferenceSet common_interference(const RsmaStructure& s, int i, int k);

void to_json(nlohmann::json& j, const RsmaStructure& s);
void from_json(const nlohmann::json& j, RsmaStructure& s);

std::string to_string(CommonMode m);

}  // namespace rsma
