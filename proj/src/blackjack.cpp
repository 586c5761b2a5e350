#include "racas/blackjack.hpp"

#include "racas/error.hpp"
#include "racas/text.hpp"

#include <algorithm>
#include <ostream>
#include <regex>

namespace racas {

std::string_view to_string(BlackjackAction a) { return a == BlackjackAction::hit ? "hit" : "stick"; }

BlackjackState new_blackjack_episode(int hidden_target, std::mt19937_64 rng) {
    if (hidden_target < kMinTarget || hidden_target > kMaxTarget) {
        throw Error("hidden target must lie in [12, 100], got " + std::to_string(hidden_target));
    }
    BlackjackState s;
    s.hidden_target = hidden_target;
    s.rng = std::move(rng);
    return s;
}

BlackjackState new_blackjack_episode(int hidden_target, std::uint64_t seed) {
    return new_blackjack_episode(hidden_target, std::mt19937_64(seed));
}

int draw_card(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> rank(1, 13);
    return std::min(rank(rng), 10);
}

int stick_reward(int hidden_target, int player_sum) {
    return (player_sum > hidden_target - kWinBand && player_sum <= hidden_target) ? 1 : 0;
}

BlackjackOutcome blackjack_step(BlackjackState& state, BlackjackAction action) {
    if (state.episode_done) throw ActionOnFinishedEpisode();
    BlackjackOutcome out;
    if (action == BlackjackAction::hit) {
        out.card = draw_card(state.rng);
        state.player_sum += out.card;
        if (state.player_sum > state.hidden_target) {
            state.episode_done = true;
            out.done = out.busted = true;
            out.reward = -1;
            out.text = "Drew " + std::to_string(out.card) + ". Bust at " + std::to_string(state.player_sum) +
                       ", score -1.";
        } else {
            out.text = "Drew " + std::to_string(out.card) + ". Sum is " + std::to_string(state.player_sum) + ".";
        }
        return out;
    }
    state.episode_done = true;
    out.done = true;
    out.reward = stick_reward(state.hidden_target, state.player_sum);
    out.text = "Stuck at " + std::to_string(state.player_sum) + ", score " + std::to_string(out.reward) + ".";
    return out;
}

std::string describe_blackjack_state(const BlackjackState& state) {
    return "Player sum: " + std::to_string(state.player_sum) + ". " +
           (state.episode_done ? "Episode finished." : "Choose hit or stick.");
}

namespace {

TargetBelief checked(TargetBelief b) {
    if (b.low > b.high) {
        throw InconsistentOutcome("belief interval emptied: [" + std::to_string(b.low) + ", " + std::to_string(b.high) +
                                  "]");
    }
    return b;
}

}  // namespace

TargetBelief belief_update(TargetBelief belief, int final_sum, bool busted) {
    if (busted) {
        belief.high = std::min(belief.high, final_sum - 1);
    } else {
        belief.low = std::max(belief.low, final_sum);
    }
    return checked(belief);
}

TargetBelief belief_update(TargetBelief belief, int final_sum, bool busted, int reward) {
    if (busted) {
        belief.high = std::min(belief.high, final_sum - 1);
    } else if (reward > 0) {
        belief.low = std::max(belief.low, final_sum);
        belief.high = std::min(belief.high, final_sum + kWinBand - 1);
    } else if (final_sum <= belief.low) {
        belief.low = std::max(belief.low, final_sum + kWinBand);
    }
    return checked(belief);
}

BlackjackAction reference_strategy(const TargetBelief& belief, int player_sum) {
    return player_sum <= belief.low - kWinBand ? BlackjackAction::hit : BlackjackAction::stick;
}

std::string_view to_string(MemoryMode m) {
    switch (m) {
        case MemoryMode::curated: return "curated";
        case MemoryMode::appended: return "appended";
        case MemoryMode::no_memory: return "no_memory";
        case MemoryMode::random: return "random";
    }
    return "?";
}

MemoryMode parse_memory_mode(std::string_view s) {
    for (auto m : kAllMemoryModes) {
        if (to_string(m) == s) return m;
    }
    throw Error("unknown memory mode: " + std::string(s));
}

double MemoryExperimentResult::mean_score() const {
    if (episodes.empty()) return 0.0;
    return episodes.back().cumulative_average;
}

std::string outcome_log_line(int episode, int final_sum, bool busted, int reward) {
    return "Episode " + std::to_string(episode) + ": " + (busted ? "bust" : "stuck") + " at " +
           std::to_string(final_sum) + ", score " + std::to_string(reward) + ".\n";
}

TargetBelief belief_from_log(std::string_view log) {
    static const std::regex line_re(R"(^Episode \d+: (bust|stuck) at (\d+), score (-?\d+)\.$)");
    TargetBelief belief;
    for (auto line : text::split_lines(log)) {
        const std::string l(text::trim(line));
        std::smatch m;
        if (!std::regex_match(l, m, line_re)) continue;
        belief = belief_update(belief, std::stoi(m[2]), m[1] == "bust", std::stoi(m[3]));
    }
    return belief;
}

MemoryExperimentResult run_memory_experiment(MemoryMode mode, const BlackjackConfig& config) {
    if (config.episodes < 1) throw Error("run_memory_experiment needs at least one episode");
    MemoryExperimentResult result;
    result.mode = mode;

    // Cards come from one stream per experiment; the random policy has its own
    // so every mode sees comparable decks for a given seed.
    std::mt19937_64 deck(config.seed);
    std::mt19937_64 policy(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::bernoulli_distribution coin(0.5);

    TargetBelief carried;
    std::string log;
    long total = 0;

    for (int e = 1; e <= config.episodes; ++e) {
        TargetBelief belief;
        switch (mode) {
            case MemoryMode::curated: belief = carried; break;
            case MemoryMode::appended: belief = belief_from_log(log); break;
            case MemoryMode::no_memory:
            case MemoryMode::random: belief = TargetBelief{}; break;
        }

        BlackjackState state = new_blackjack_episode(config.hidden_target, std::move(deck));
        BlackjackOutcome outcome;
        while (!state.episode_done) {
            const BlackjackAction a = mode == MemoryMode::random
                                          ? (coin(policy) ? BlackjackAction::hit : BlackjackAction::stick)
                                          : reference_strategy(belief, state.player_sum);
            outcome = blackjack_step(state, a);
        }
        deck = std::move(state.rng);

        BlackjackEpisode ep;
        ep.episode = e;
        ep.score = outcome.reward;
        ep.final_sum = state.player_sum;
        ep.busted = outcome.busted;
        ep.belief_before = belief;
        ep.belief_after = belief;

        switch (mode) {
            case MemoryMode::curated:
                carried = belief_update(carried, ep.final_sum, ep.busted, ep.score);
                ep.belief_after = carried;
                break;
            case MemoryMode::appended: {
                const std::string line = outcome_log_line(e, ep.final_sum, ep.busted, ep.score);
                if (log.size() + line.size() <= config.appended_budget) log += line;
                ep.belief_after = belief_from_log(log);
                break;
            }
            case MemoryMode::no_memory:
                ep.belief_after = belief_update(belief, ep.final_sum, ep.busted, ep.score);
                break;
            case MemoryMode::random: break;
        }

        total += ep.score;
        ep.cumulative_average = static_cast<double>(total) / e;
        result.episodes.push_back(ep);
    }
    return result;
}

void write_blackjack_csv(std::ostream& out, std::span<const MemoryExperimentResult> results) {
    out << "episode,mode,score,cumulative_average,belief_low,belief_high\n";
    for (const auto& r : results) {
        for (const auto& ep : r.episodes) {
            out << ep.episode << ',' << to_string(r.mode) << ',' << ep.score << ','
                << text::format_number(ep.cumulative_average) << ',' << ep.belief_after.low << ','
                << ep.belief_after.high << '\n';
        }
    }
}

}  // namespace racas
