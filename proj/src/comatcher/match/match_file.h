#pragma once

#include <string>
#include <vector>

#include "comatcher/features/image_features.h"
#include "comatcher/match/match_head.h"

namespace comatcher {

struct PairMatches {
  std::string source_id;
  std::string target_id;
  MatchSet matches;
};

nlohmann::json PairMatchesToJson(const PairMatches& m);
PairMatches PairMatchesFromJson(const nlohmann::json& j);

// JSON lines {source_id, target_id, matches: [[u, x, score], ...],
// unmatched_source, unmatched_target}; "unverified": true when flagged.
void WriteMatchFile(const std::string& path,
                    const std::vector<PairMatches>& matches);
std::vector<PairMatches> ReadMatchFile(const std::string& path);

}  // namespace comatcher
