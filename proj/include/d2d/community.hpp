#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "d2d/social.hpp"

namespace d2d {

// A partition of all devices with per-community durability h_C = w_C / (w_C + w_C_out).
struct CommunityStructure {
  std::vector<int> community_of;          // device -> community index
  std::vector<std::vector<int>> members;  // sorted ids per community
  std::vector<double> durability;         // h_C
  double total_durability = 0.0;          // R
  int k() const { return static_cast<int>(members.size()); }
};

// h_C for an arbitrary device set; 0 when the set touches no edges at all.
double durability(const std::vector<int>& community, const ContactGraph& graph);

struct DcdOptions {
  // Run improving eject/merge/transfer moves to a fixpoint after the three
  // phases, so the local-optimality certificate holds on every output.
  bool polish = true;
  // Phase I grows from random seeds, so rerun the whole greedy this many
  // times (derived seeds) and keep the best partition.
  int restarts = 8;
};

struct DcdDiagnostics {
  double r_development = 0.0;
  double r_augmentation = 0.0;
  double r_refinement = 0.0;
  double r_final = 0.0;
};

// Three-phase greedy: grow communities from random seeds, eject members whose
// removal raises h_C, then merge community pairs while the total improves.
CommunityStructure dcd(const ContactGraph& graph, std::uint64_t seed, const DcdOptions& = {},
                       DcdDiagnostics* diag = nullptr);

// Exhaustive partition enumeration; requires n <= 10. Ties broken toward fewer
// communities, then the lexicographically smallest assignment.
CommunityStructure dcd_oracle(const ContactGraph& graph);

struct OptimalityViolation {
  enum class Kind { ImprovingAdd, ImprovingRemove, ImprovingMerge };
  Kind kind;
  int community = -1;        // community under test
  int other_community = -1;  // merge partner / donor community for adds
  int node = -1;             // node added or removed (-1 for merges)
  double gain = 0.0;         // total-durability improvement the move would give
  std::string describe() const;
};

// Checks that no single-node add (transfer into an adjacent community), no
// ejection to a singleton and no pairwise merge improves R. Empty = certified.
std::vector<OptimalityViolation> certify_local_optimality(const CommunityStructure& structure,
                                                          const ContactGraph& graph);

// `device_id,community_id` rows followed by a `# k=..,R=..` summary line.
void dump_communities_csv(const CommunityStructure& structure, std::ostream& out);

}  // namespace d2d
