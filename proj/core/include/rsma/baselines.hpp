#pragma once

#include <string>
#include <vector>

#include "rsma/netmodel.hpp"
#include "rsma/structure.hpp"

namespace rsma {

enum class SchemeKind { kRsma, kTin, kScm };

std::string to_string(SchemeKind k);
// Accepts rsma | tin | scm; throws ConfigError otherwise.
SchemeKind scheme_from_string(const std::string& s);
std::vector<SchemeKind> all_schemes();

struct SchemeSpec {
  SchemeKind kind = SchemeKind::kRsma;
  ClusterSizes sizes;
  int decode_set_size = 2;  // d, RSMA only
};

// No common streams: empty K_b^c and empty decode sets.
RsmaStructure make_tin_structure(const ClusterSets& clusters);

// One super-common stream in slot 0, sent by every BS and decoded first by
// every user. Rates are credited through per-user shares, and every
// K_b^c lists all users so the fronthaul row of each BS counts the full sum
// of shares once.
RsmaStructure make_scm_structure(const SystemConfig& config, const ClusterSets& clusters);

RsmaStructure make_rsma_structure(const ChannelState& h, const SystemConfig& config, ClusterSizes sizes,
                                  int decode_set_size);

RsmaStructure make_structure(const SchemeSpec& spec, const ChannelState& h, const SystemConfig& config);

}  // namespace rsma
