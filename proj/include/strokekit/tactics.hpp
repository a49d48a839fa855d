#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace strokekit {

enum class Side { A, B };

inline Side other_side(Side s) { return s == Side::A ? Side::B : Side::A; }

// One point: the technique sequence, who served, who won. Strokes alternate
// sides starting from the server (stroke k is the server's iff k is odd,
// 1-indexed).
struct Rally {
  std::string rally_id;
  std::vector<std::string> strokes;
  Side server = Side::A;
  Side winner = Side::A;
};

// Aggregate for one three-stroke window pattern. The perspective player is
// the executor of the window's first stroke (who also hits the third); an
// occurrence is a win when that player wins the rally.
struct TacticStat {
  std::array<std::string, 3> trigram;
  int occurrences = 0;
  int wins = 0;
  double scoring_rate = 0.0;
};

struct MineOptions {
  int min_occurrences = 5;
  // When true, only windows starting at the first stroke count (the serve's
  // perspective); when false, every window of three consecutive strokes
  // counts from its own executor's perspective.
  bool serve_only = true;
};

// Scoring rate per trigram, sorted by rate descending, then occurrences
// descending, then lexicographic trigram. Rallies with fewer than three
// strokes contribute nothing.
std::vector<TacticStat> mine_tactics(std::span<const Rally> rallies,
                                     const MineOptions& options = {});

struct FollowupStat {
  std::string third;
  int occurrences = 0;
  int wins = 0;
  double scoring_rate = 0.0;
};

// Scoring rate of each third stroke over windows whose first two strokes
// match the prefix; same win rule and ordering as mine_tactics.
std::vector<FollowupStat> conditional_followups(
    std::span<const Rally> rallies,
    const std::array<std::string, 2>& prefix, const MineOptions& options = {});

}  // namespace strokekit
