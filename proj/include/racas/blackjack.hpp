#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace racas {

// Hit/stick game against a hidden target X in [12, 100]. No dealer: sticking
// scores +1 when X - 10 < sum <= X, otherwise 0; going over X is a bust (-1).
// Cards are min(rank, 10) with ranks drawn uniformly from 1..13.
inline constexpr int kMinTarget = 12;
inline constexpr int kMaxTarget = 100;
inline constexpr int kWinBand = 10;

enum class BlackjackAction { hit, stick };

std::string_view to_string(BlackjackAction a);

struct BlackjackState {
    int hidden_target = 42;
    int player_sum = 0;
    bool episode_done = false;
    std::mt19937_64 rng;
};

struct BlackjackOutcome {
    bool done = false;
    bool busted = false;
    int reward = 0;
    int card = 0;       // card drawn by a hit, 0 on stick
    std::string text;   // reports bust/score, never the target
};

BlackjackState new_blackjack_episode(int hidden_target, std::uint64_t seed);
BlackjackState new_blackjack_episode(int hidden_target, std::mt19937_64 rng);

int draw_card(std::mt19937_64& rng);
int stick_reward(int hidden_target, int player_sum);

// Throws ActionOnFinishedEpisode once the episode is over.
BlackjackOutcome blackjack_step(BlackjackState& state, BlackjackAction action);

// Symbolic game state as text, the monitor's view of the table.
std::string describe_blackjack_state(const BlackjackState& state);

struct TargetBelief {
    int low = kMinTarget;
    int high = kMaxTarget;

    int width() const { return high - low; }
    bool contains(int x) const { return low <= x && x <= high; }
    friend bool operator==(const TargetBelief&, const TargetBelief&) = default;
};

// Bust at s: high := min(high, s - 1). Stick at s: low := max(low, s).
// Throws InconsistentOutcome if the interval empties.
TargetBelief belief_update(TargetBelief belief, int final_sum, bool busted);

// Also reads the stick score. A scoring stick at s bounds X to [s, s + 9]. A
// non-scoring stick at s <= low means s <= X - 10, so low := s + 10. A
// non-scoring stick above low is ambiguous and leaves the belief as is.
TargetBelief belief_update(TargetBelief belief, int final_sum, bool busted, int reward);

// Hit iff player_sum <= low - 10.
BlackjackAction reference_strategy(const TargetBelief& belief, int player_sum);

enum class MemoryMode { curated, appended, no_memory, random };

std::string_view to_string(MemoryMode m);
MemoryMode parse_memory_mode(std::string_view s);
inline constexpr MemoryMode kAllMemoryModes[] = {MemoryMode::curated, MemoryMode::appended, MemoryMode::no_memory,
                                                 MemoryMode::random};

struct BlackjackConfig {
    int hidden_target = 42;
    int episodes = 200;
    std::uint64_t seed = 1;
    std::size_t appended_budget = 1000;  // characters of raw outcome log kept
};

struct BlackjackEpisode {
    int episode = 0;  // 1-based
    int score = 0;
    double cumulative_average = 0.0;
    int final_sum = 0;
    bool busted = false;
    TargetBelief belief_before;
    TargetBelief belief_after;
};

struct MemoryExperimentResult {
    MemoryMode mode = MemoryMode::curated;
    std::vector<BlackjackEpisode> episodes;

    double mean_score() const;
};

// Appended-mode memory: outcome lines concatenated until the budget is hit;
// later lines are dropped so the oldest context survives.
std::string outcome_log_line(int episode, int final_sum, bool busted, int reward);
TargetBelief belief_from_log(std::string_view log);

MemoryExperimentResult run_memory_experiment(MemoryMode mode, const BlackjackConfig& config);

// Columns: episode,mode,score,cumulative_average,belief_low,belief_high
void write_blackjack_csv(std::ostream& out, std::span<const MemoryExperimentResult> results);

}  // namespace racas
