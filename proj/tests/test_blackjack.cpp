#include "racas/blackjack.hpp"
#include "racas/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace racas;

namespace {

// Finds a seed whose first card has the requested value.
std::uint64_t seed_with_first_card(int value) {
    for (std::uint64_t s = 1;; ++s) {
        std::mt19937_64 rng(s);
        if (draw_card(rng) == value) return s;
    }
}

}  // namespace

TEST_CASE("stick scoring band") {
    CHECK(stick_reward(42, 33) == 1);
    CHECK(stick_reward(42, 42) == 1);
    CHECK(stick_reward(42, 32) == 0);
    CHECK(stick_reward(42, 0) == 0);
    CHECK(stick_reward(12, 3) == 1);
}

TEST_CASE("cards are min(rank, 10) with rank uniform on 1..13") {
    std::mt19937_64 rng(17);
    std::array<int, 11> counts{};
    const int n = 130000;
    for (int i = 0; i < n; ++i) {
        const int c = draw_card(rng);
        REQUIRE(c >= 1);
        REQUIRE(c <= 10);
        ++counts[static_cast<std::size_t>(c)];
    }
    for (int v = 1; v <= 10; ++v) {
        const double p = v == 10 ? 4.0 / 13 : 1.0 / 13;
        const double sigma = std::sqrt(n * p * (1 - p));
        CHECK(std::abs(counts[static_cast<std::size_t>(v)] - n * p) < 4 * sigma);
    }
}

TEST_CASE("step: hit, stick, bust and finished episodes") {
    auto s = new_blackjack_episode(42, seed_with_first_card(7));
    CHECK(s.player_sum == 0);
    auto o = blackjack_step(s, BlackjackAction::hit);
    CHECK(o.card == 7);
    CHECK_FALSE(o.done);
    CHECK(s.player_sum == 7);
    CHECK(o.text == "Drew 7. Sum is 7.");
    o = blackjack_step(s, BlackjackAction::stick);
    CHECK(o.done);
    CHECK(o.reward == 0);
    CHECK(o.text == "Stuck at 7, score 0.");
    CHECK(o.text.find("42") == std::string::npos);
    CHECK_THROWS_AS(blackjack_step(s, BlackjackAction::hit), ActionOnFinishedEpisode);

    auto b = new_blackjack_episode(12, std::uint64_t{5});
    BlackjackOutcome last;
    while (!b.episode_done) last = blackjack_step(b, BlackjackAction::hit);
    CHECK(last.busted);
    CHECK(last.reward == -1);
    CHECK(b.player_sum > 12);
    CHECK(last.text.find("Bust at " + std::to_string(b.player_sum) + ", score -1.") != std::string::npos);

    CHECK_THROWS_AS(new_blackjack_episode(11, std::uint64_t{1}), Error);
    CHECK_THROWS_AS(new_blackjack_episode(101, std::uint64_t{1}), Error);
}

TEST_CASE("belief update examples") {
    const TargetBelief full;
    CHECK(belief_update(full, 50, true) == TargetBelief{12, 49});
    CHECK(belief_update(full, 30, false) == TargetBelief{30, 100});
    CHECK(belief_update(full, 35, false, 1) == TargetBelief{35, 44});
    CHECK(belief_update(full, 10, false, 0) == TargetBelief{20, 100});
    CHECK(belief_update(TargetBelief{30, 60}, 40, false, 0) == TargetBelief{30, 60});
    CHECK(belief_update(full, 50, true, -1) == TargetBelief{12, 49});
    CHECK_THROWS_AS(belief_update(TargetBelief{40, 45}, 30, true), InconsistentOutcome);
    CHECK_THROWS_AS(belief_update(TargetBelief{40, 45}, 50, false), InconsistentOutcome);
}

TEST_CASE("reference strategy hits only while safely below the band") {
    const TargetBelief b{42, 42};
    CHECK(reference_strategy(b, 32) == BlackjackAction::hit);
    CHECK(reference_strategy(b, 33) == BlackjackAction::stick);
    CHECK(reference_strategy(TargetBelief{}, 0) == BlackjackAction::hit);
    CHECK(reference_strategy(TargetBelief{}, 2) == BlackjackAction::hit);
    CHECK(reference_strategy(TargetBelief{}, 3) == BlackjackAction::stick);
}

TEST_CASE("beliefs always contain the true target") {
    for (int target = kMinTarget; target <= kMaxTarget; target += 7) {
        for (MemoryMode mode : {MemoryMode::curated, MemoryMode::appended, MemoryMode::no_memory}) {
            BlackjackConfig cfg;
            cfg.hidden_target = target;
            cfg.episodes = 60;
            cfg.seed = static_cast<std::uint64_t>(target);
            for (const auto& ep : run_memory_experiment(mode, cfg).episodes) {
                CHECK(ep.belief_before.contains(target));
                CHECK(ep.belief_after.contains(target));
            }
        }
    }
}

TEST_CASE("experiments are deterministic in the seed") {
    BlackjackConfig cfg;
    cfg.episodes = 50;
    for (auto mode : kAllMemoryModes) {
        const auto a = run_memory_experiment(mode, cfg), b = run_memory_experiment(mode, cfg);
        REQUIRE(a.episodes.size() == b.episodes.size());
        for (std::size_t i = 0; i < a.episodes.size(); ++i) {
            CHECK(a.episodes[i].score == b.episodes[i].score);
            CHECK(a.episodes[i].final_sum == b.episodes[i].final_sum);
        }
    }
}

TEST_CASE("no_memory starts every episode from the full interval") {
    const auto r = run_memory_experiment(MemoryMode::no_memory, BlackjackConfig{});
    for (const auto& ep : r.episodes) CHECK(ep.belief_before == TargetBelief{});
}

TEST_CASE("curated memory narrows monotonically and beats the baselines") {
    const BlackjackConfig cfg;
    const auto curated = run_memory_experiment(MemoryMode::curated, cfg);
    REQUIRE(curated.episodes.size() == 200);
    int prev = TargetBelief{}.width();
    for (const auto& ep : curated.episodes) {
        CHECK(ep.belief_after.width() <= prev);
        prev = ep.belief_after.width();
    }
    CHECK(curated.episodes.back().belief_after.width() < kMaxTarget - kMinTarget);
    const auto appended = run_memory_experiment(MemoryMode::appended, cfg);
    const auto none = run_memory_experiment(MemoryMode::no_memory, cfg);
    const auto random = run_memory_experiment(MemoryMode::random, cfg);
    CHECK(curated.mean_score() > appended.mean_score());
    CHECK(curated.mean_score() > none.mean_score());
    CHECK(curated.mean_score() > random.mean_score());
    CHECK(curated.episodes.back().cumulative_average == doctest::Approx(curated.mean_score()));
}

TEST_CASE("appended log stops growing at its budget") {
    BlackjackConfig cfg;
    cfg.appended_budget = 200;
    const auto r = run_memory_experiment(MemoryMode::appended, cfg);
    // Once the log is full the belief freezes.
    const auto frozen = r.episodes.back().belief_after;
    CHECK(r.episodes[150].belief_after == frozen);
    CHECK(outcome_log_line(3, 45, true, -1) == "Episode 3: bust at 45, score -1.\n");
    CHECK(outcome_log_line(4, 38, false, 1) == "Episode 4: stuck at 38, score 1.\n");
    CHECK(belief_from_log(outcome_log_line(3, 45, true, -1) + outcome_log_line(4, 38, false, 1)) == TargetBelief{38, 44});
    CHECK(belief_from_log("") == TargetBelief{});
}

TEST_CASE("random mode matches an independent Monte Carlo estimate") {
    BlackjackConfig cfg;
    cfg.episodes = 20000;
    cfg.seed = 3;
    const auto r = run_memory_experiment(MemoryMode::random, cfg);
    double sum = 0, sumsq = 0;
    for (const auto& ep : r.episodes) {
        sum += ep.score;
        sumsq += ep.score * ep.score;
    }
    const double n1 = cfg.episodes;
    const double m1 = sum / n1;
    const double s1 = std::sqrt((sumsq - sum * sum / n1) / (n1 - 1));
    const auto mc = testing::blackjack_random_policy_mc(cfg.hidden_target, 200000, 11);
    const double sigma = std::sqrt(s1 * s1 / n1 + mc.stddev * mc.stddev / static_cast<double>(mc.n));
    INFO("implementation " << m1 << ", oracle " << mc.mean);
    CHECK(std::abs(m1 - mc.mean) < 2 * sigma);
}

TEST_CASE("csv output") {
    BlackjackConfig cfg;
    cfg.episodes = 2;
    const std::vector<MemoryExperimentResult> results{run_memory_experiment(MemoryMode::curated, cfg)};
    std::ostringstream out;
    write_blackjack_csv(out, results);
    std::istringstream in(out.str());
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "episode,mode,score,cumulative_average,belief_low,belief_high");
    int rows = 0;
    while (std::getline(in, row)) {
        CHECK(row.find(",curated,") != std::string::npos);
        ++rows;
    }
    CHECK(rows == 2);
    CHECK(parse_memory_mode("no_memory") == MemoryMode::no_memory);
    CHECK_THROWS_AS(parse_memory_mode("sometimes"), Error);
}
