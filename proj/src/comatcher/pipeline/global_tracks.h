#pragma once

#include <string>
#include <utility>
#include <vector>

#include "comatcher/match/match_file.h"

namespace comatcher {

// Entries sorted by image id; at most one point per image.
struct GlobalTrack {
  std::vector<std::pair<std::string, int>> entries;

  friend bool operator==(const GlobalTrack&, const GlobalTrack&) = default;
};

// Union-find over (image, point) nodes joined by every match. Components
// holding two points of one image are discarded; the rest (>= 2 entries)
// become tracks ordered by their first entry.
std::vector<GlobalTrack> MergeTracks(const std::vector<PairMatches>& matches);

// The pairwise matches implied by the tracks (every pair of entries).
std::vector<PairMatches> TrackPairMatches(
    const std::vector<GlobalTrack>& tracks);

// JSON lines {track_id, entries: [[image_id, point], ...]}.
void WriteTracksFile(const std::string& path,
                     const std::vector<GlobalTrack>& tracks);
std::vector<GlobalTrack> ReadTracksFile(const std::string& path);

}  // namespace comatcher
