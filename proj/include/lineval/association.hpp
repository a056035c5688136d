#pragma once

#include <utility>
#include <vector>

#include "lineval/geometry.hpp"

namespace lineval {

// One-to-one set of index pairs between the line lists of two frames.
class MatchSet {
public:
  MatchSet() = default;

  // Throws InputError when an index repeats on either side.
  explicit MatchSet(std::vector<std::pair<int, int>> pairs);

  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  size_t size() const { return pairs_.size(); }
  bool contains(const std::pair<int, int>& p) const;

private:
  std::vector<std::pair<int, int>> pairs_;  // sorted
};

struct AssociationTally {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
};

// Ground-truth associations: all index pairs sharing a track id. Throws
// InputError on a duplicate track id within a frame.
MatchSet gt_matches(const std::vector<LineSegment2D>& lines_i,
                    const std::vector<LineSegment2D>& lines_j);

// Four-class tally over the n_i x n_j index cross-product.
AssociationTally classify_matches(const MatchSet& pred, const MatchSet& gt,
                                  int n_i, int n_j);

struct AssociationPRF {
  double precision;
  double recall;
  double f_score;
};

// Micro-averaged precision/recall/F over pooled counts.
AssociationPRF association_prf(const std::vector<AssociationTally>& tallies);

}  // namespace lineval
