#include "lineval/association.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "lineval/errors.hpp"

namespace lineval {

MatchSet::MatchSet(std::vector<std::pair<int, int>> pairs) : pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  std::map<int, int> seen_i, seen_j;
  for (const auto& [a, b] : pairs_) {
    if (a < 0 || b < 0) throw InputError("match indices must be non-negative");
    if (++seen_i[a] > 1 || ++seen_j[b] > 1) {
      std::ostringstream msg;
      msg << "match (" << a << ", " << b << ") violates one-to-one matching";
      throw InputError(msg.str());
    }
  }
}

bool MatchSet::contains(const std::pair<int, int>& p) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), p);
}

MatchSet gt_matches(const std::vector<LineSegment2D>& lines_i,
                    const std::vector<LineSegment2D>& lines_j) {
  const auto index_by_track = [](const std::vector<LineSegment2D>& lines,
                                 const char* which) {
    std::map<int, int> by_track;
    for (int idx = 0; idx < int(lines.size()); ++idx) {
      if (!lines[idx].track_id) continue;
      const auto [it, inserted] = by_track.emplace(*lines[idx].track_id, idx);
      if (!inserted) {
        std::ostringstream msg;
        msg << "duplicate track id " << *lines[idx].track_id << " in " << which
            << " frame";
        throw InputError(msg.str());
      }
    }
    return by_track;
  };
  const auto tracks_i = index_by_track(lines_i, "first");
  const auto tracks_j = index_by_track(lines_j, "second");

  std::vector<std::pair<int, int>> pairs;
  for (const auto& [track, idx_i] : tracks_i) {
    const auto it = tracks_j.find(track);
    if (it != tracks_j.end()) pairs.emplace_back(idx_i, it->second);
  }
  return MatchSet(std::move(pairs));
}

AssociationTally classify_matches(const MatchSet& pred, const MatchSet& gt,
                                  int n_i, int n_j) {
  for (const auto& [a, b] : pred.pairs()) {
    if (a >= n_i || b >= n_j) throw InputError("match index out of range");
  }
  for (const auto& [a, b] : gt.pairs()) {
    if (a >= n_i || b >= n_j) throw InputError("ground-truth match index out of range");
  }
  AssociationTally tally;
  for (const auto& p : pred.pairs()) {
    if (gt.contains(p)) ++tally.tp; else ++tally.fp;
  }
  tally.fn = long(gt.size()) - tally.tp;
  const long established_union = long(pred.size()) + long(gt.size()) - tally.tp;
  tally.tn = long(n_i) * long(n_j) - established_union;
  return tally;
}

AssociationPRF association_prf(const std::vector<AssociationTally>& tallies) {
  long tp = 0, fp = 0, fn = 0;
  for (const auto& t : tallies) {
    tp += t.tp;
    fp += t.fp;
    fn += t.fn;
  }
  const double precision = (tp + fp == 0) ? 1.0 : double(tp) / (tp + fp);
  const double recall = (tp + fn == 0) ? 1.0 : double(tp) / (tp + fn);
  const double f = (precision + recall == 0.0)
                       ? 0.0
                       : 2.0 * precision * recall / (precision + recall);
  return AssociationPRF{precision, recall, f};
}

}  // namespace lineval
