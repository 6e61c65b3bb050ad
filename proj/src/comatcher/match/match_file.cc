#include "comatcher/match/match_file.h"

#include "comatcher/core/error.h"

namespace comatcher {

nlohmann::json PairMatchesToJson(const PairMatches& m) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : m.matches.pairs) pairs.push_back({p.u, p.x, p.score});
  nlohmann::json j = {{"source_id", m.source_id},
                      {"target_id", m.target_id},
                      {"matches", std::move(pairs)},
                      {"unmatched_source", m.matches.unmatched_source},
                      {"unmatched_target", m.matches.unmatched_target}};
  if (m.matches.unverified) j["unverified"] = true;
  return j;
}

PairMatches PairMatchesFromJson(const nlohmann::json& j) {
  PairMatches m;
  try {
    m.source_id = j.at("source_id").get<std::string>();
    m.target_id = j.at("target_id").get<std::string>();
    for (const auto& p : j.at("matches")) {
      m.matches.pairs.push_back(
          {p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<double>()});
    }
    m.matches.unmatched_source =
        j.at("unmatched_source").get<std::vector<int>>();
    m.matches.unmatched_target =
        j.at("unmatched_target").get<std::vector<int>>();
    m.matches.unverified = j.value("unverified", false);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed-matches", e.what());
  }
  return m;
}

void WriteMatchFile(const std::string& path,
                    const std::vector<PairMatches>& matches) {
  std::vector<nlohmann::json> lines;
  for (const auto& m : matches) lines.push_back(PairMatchesToJson(m));
  WriteJsonLines(path, lines);
}

std::vector<PairMatches> ReadMatchFile(const std::string& path) {
  std::vector<PairMatches> out;
  for (const auto& j : ReadJsonLines(path)) {
    out.push_back(PairMatchesFromJson(j));
  }
  return out;
}

}  // namespace comatcher
