#include "strokekit/tactics.hpp"

#include <algorithm>
#include <map>

namespace strokekit {

namespace {

struct WinCount {
  int occurrences = 0;
  int wins = 0;
};

// Walks every eligible window and feeds (trigram, won) to the sink.
template <typename Sink>
void for_each_window(std::span<const Rally> rallies, bool serve_only,
                     Sink&& sink) {
  for (const Rally& rally : rallies) {
    const int n = static_cast<int>(rally.strokes.size());
    const int last_start = serve_only ? 0 : n - 3;
    for (int i = 0; i <= last_start && i + 2 < n; ++i) {
      // Stroke i (0-indexed) is the server's when i is even.
      const Side executor =
          (i % 2 == 0) ? rally.server : other_side(rally.server);
      sink(rally.strokes[static_cast<std::size_t>(i)],
           rally.strokes[static_cast<std::size_t>(i) + 1],
           rally.strokes[static_cast<std::size_t>(i) + 2],
           rally.winner == executor);
    }
  }
}

}  // namespace

std::vector<TacticStat> mine_tactics(std::span<const Rally> rallies,
                                     const MineOptions& options) {
  std::map<std::array<std::string, 3>, WinCount> counts;
  for_each_window(rallies, options.serve_only,
                  [&counts](const std::string& a, const std::string& b,
                            const std::string& c, bool won) {
                    WinCount& wc = counts[{a, b, c}];
                    ++wc.occurrences;
                    if (won) ++wc.wins;
                  });

  std::vector<TacticStat> stats;
  for (const auto& [trigram, wc] : counts) {
    if (wc.occurrences < options.min_occurrences) continue;
    TacticStat stat;
    stat.trigram = trigram;
    stat.occurrences = wc.occurrences;
    stat.wins = wc.wins;
    stat.scoring_rate =
        static_cast<double>(wc.wins) / static_cast<double>(wc.occurrences);
    stats.push_back(std::move(stat));
  }
  std::sort(stats.begin(), stats.end(),
            [](const TacticStat& x, const TacticStat& y) {
              if (x.scoring_rate != y.scoring_rate) {
                return x.scoring_rate > y.scoring_rate;
              }
              if (x.occurrences != y.occurrences) {
                return x.occurrences > y.occurrences;
              }
              return x.trigram < y.trigram;
            });
  return stats;
}

std::vector<FollowupStat> conditional_followups(
    std::span<const Rally> rallies,
    const std::array<std::string, 2>& prefix, const MineOptions& options) {
  std::map<std::string, WinCount> counts;
  for_each_window(rallies, options.serve_only,
                  [&counts, &prefix](const std::string& a, const std::string& b,
                                     const std::string& c, bool won) {
                    if (a != prefix[0] || b != prefix[1]) return;
                    WinCount& wc = counts[c];
                    ++wc.occurrences;
                    if (won) ++wc.wins;
                  });

  std::vector<FollowupStat> stats;
  for (const auto& [third, wc] : counts) {
    if (wc.occurrences < options.min_occurrences) continue;
    FollowupStat stat;
    stat.third = third;
    stat.occurrences = wc.occurrences;
    stat.wins = wc.wins;
    stat.scoring_rate =
        static_cast<double>(wc.wins) / static_cast<double>(wc.occurrences);
    stats.push_back(std::move(stat));
  }
  std::sort(stats.begin(), stats.end(),
            [](const FollowupStat& x, const FollowupStat& y) {
              if (x.scoring_rate != y.scoring_rate) {
                return x.scoring_rate > y.scoring_rate;
              }
              if (x.occurrences != y.occurrences) {
                return x.occurrences > y.occurrences;
              }
              return x.third < y.third;
            });
  return stats;
}

}  // namespace strokekit
