#include "racas/controller.hpp"
#include "racas/error.hpp"
#include "racas/memory.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace racas;
using racas::testing::load_shipped;

namespace {

// Replies from a fixed list in order, ignoring the request.
class SequenceBackend final : public ChatBackend {
public:
    explicit SequenceBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string id() const override { return "sequence"; }
    int calls = 0;
    std::vector<std::vector<ChatMessage>> requests;

protected:
    std::string do_complete(std::span<const ChatMessage> messages) override {
        requests.emplace_back(messages.begin(), messages.end());
        return replies_.at(static_cast<std::size_t>(calls++));
    }

private:
    std::vector<std::string> replies_;
};

ComposedPrompt prompt_for(const EmbodimentConfig& cfg, const ActionHistory& history = {}) {
    return compose_system_prompt(cfg, empty_memory(), ProprioState{}, history, static_cast<int>(history.entries().size()) + 1);
}

std::size_t count(const std::string& hay, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("six sections, each header once, in order") {
    for (const char* robot : {"dingo", "limb", "rov"}) {
        const auto p = prompt_for(load_shipped(robot));
        REQUIRE(p.sections.size() == 6);
        const auto text = p.render();
        std::size_t last = 0;
        for (const auto h : kPromptSectionHeaders) {
            CHECK(count(text, h) == 1);
            const auto pos = text.find(h);
            CHECK(pos >= last);
            last = pos;
        }
    }
}

TEST_CASE("empty history renders the sentinel") {
    const auto p = prompt_for(load_shipped("dingo"));
    CHECK(p.sections[4].text == kNoActionsSentinel);
    for (const auto h : {kPhysicalEnvironmentHeader, kRobotStateHeader, kCuratedHistoryHeader, kTaskStateHeader}) {
        CHECK(p.sections[2].text.find(h) != std::string::npos);
    }
}

TEST_CASE("history section lists entries in order") {
    ActionHistory h;
    h.append(1, "up", {});
    h.append(2, "rotate_cw", {});
    h.append(3, "reset", {});
    const auto text = prompt_for(load_shipped("limb"), h).sections[4].text;
    CHECK(text == "Step 1: up\nStep 2: rotate_cw\nStep 3: reset");
}

TEST_CASE("action section renders every action") {
    const auto cfg = load_shipped("rov");
    const auto text = prompt_for(cfg).sections[1].text;
    for (const auto& a : cfg.interface.actions) {
        CHECK(text.find("- " + a.name + ": " + a.description) != std::string::npos);
    }
    CHECK(text.find("parameter thrust in [300, 600] us, default 450") != std::string::npos);
}

TEST_CASE("environment context is folded into the robot section") {
    auto cfg = load_shipped("dingo");
    cfg.environment_context = "Simulated warehouse, 20 by 30 m.";
    const auto p = prompt_for(cfg);
    CHECK(p.sections.size() == 6);
    CHECK(p.sections[0].text.find("Simulated warehouse") != std::string::npos);
}

TEST_CASE("proprio rendering") {
    ProprioState s;
    s.joint_displacements = {{"x", 0.5}, {"heading", -90}};
    s.pose_estimate = PoseEstimate{0.5, 0, -90};
    CHECK(render_proprio_state(s) == "Joint displacements from start: heading=-90, x=0.5\nPose estimate: x=0.5, y=0, heading=-90");
    CHECK(render_proprio_state({}) == "No proprioceptive data.");
}

TEST_CASE("visual query extraction") {
    const auto p = prompt_for(load_shipped("dingo"));
    SequenceBackend b({"I should look around.\nQUERY: Is the fire extinguisher visible, and in which direction?"});
    CHECK(generate_visual_query(p, b).text == "Is the fire extinguisher visible, and in which direction?");
    SequenceBackend trailing({"QUERY:   Where is the chair?   \n"});
    CHECK(generate_visual_query(p, trailing).text == "Where is the chair?");
    SequenceBackend next_line({"query:\n\n  Is the box left?"});
    CHECK(generate_visual_query(p, next_line).text == "Is the box left?");
}

TEST_CASE("query reprompt then failure") {
    const auto p = prompt_for(load_shipped("dingo"));
    SequenceBackend recovers({"no marker here", "QUERY: Is the box visible?"});
    CHECK(generate_visual_query(p, recovers).text == "Is the box visible?");
    CHECK(recovers.calls == 2);
    SequenceBackend fails({"no marker", "still none"});
    CHECK_THROWS_AS(generate_visual_query(p, fails), QueryParseFailure);
    CHECK(fails.calls == 2);
}

TEST_CASE("select_action with a scripted rule") {
    const auto cfg = load_shipped("dingo");
    ScriptedBackend b(std::vector<ScriptedRule>{{"slightly left", "The target is left of centre.\nACTION: rotate_left"}});
    const auto d = select_action(prompt_for(cfg), {"Where is the target?"}, {{"front", "target visible slightly left"}}, b,
                                 cfg.interface);
    CHECK(d.action.name == "rotate_left");
    CHECK(d.reasoning == "The target is left of centre.");
}

TEST_CASE("observations are shown labelled by camera") {
    const auto cfg = load_shipped("dingo");
    SequenceBackend b({"ACTION: forward"});
    select_action(prompt_for(cfg), {"q?"}, {{"front", "A"}, {"left", "B"}, {"right", "C"}}, b, cfg.interface);
    const auto& user = b.requests[0].back().text;
    CHECK(user.find("[front] A\n[left] B\n[right] C") != std::string::npos);
    CHECK(user.find("forward, backward, rotate_left, rotate_right") != std::string::npos);
}

TEST_CASE("unknown action twice is UnknownAction after one reprompt") {
    const auto cfg = load_shipped("dingo");
    SequenceBackend b({"ACTION: levitate", "ACTION: levitate"});
    CHECK_THROWS_AS(select_action(prompt_for(cfg), {"q"}, {}, b, cfg.interface), UnknownAction);
    CHECK(b.calls == 2);
    REQUIRE(b.requests[1].size() == 4);
    CHECK(b.requests[1][3].text.find("'levitate' is not an admissible action") != std::string::npos);
    CHECK(b.requests[1][3].text.find("rotate_right") != std::string::npos);

    SequenceBackend recovers({"ACTION: levitate", "Sorry.\nACTION: backward"});
    CHECK(select_action(prompt_for(cfg), {"q"}, {}, recovers, cfg.interface).action.name == "backward");

    SequenceBackend garbled({"I will go forward", "no idea"});
    CHECK_THROWS_AS(select_action(prompt_for(cfg), {"q"}, {}, garbled, cfg.interface), ActionParseFailure);
}

TEST_CASE("ROV green box below frame leads to heave_down") {
    const auto cfg = load_shipped("rov");
    ScriptedBackend b(std::vector<ScriptedRule>{{"below frame", "The box is below me.\nACTION: heave_down"}});
    const auto d = select_action(prompt_for(cfg), {"Where is the green box?"}, {{"front", "green box below frame"}}, b,
                                 cfg.interface);
    CHECK(d.action.name == "heave_down");
    CHECK(d.parameters.at("thrust") == 500);
    CHECK(d.parameters.at("duration") == 2);
}

TEST_CASE("parameters: defaults, clamping, unknown names") {
    const auto cfg = load_shipped("rov");
    auto d = resolve_decision(parse_action_reply("ACTION: surge_forward\nPARAMS: thrust=900, duration=1"), cfg.interface);
    CHECK(d.parameters.at("thrust") == 600);
    CHECK(d.parameters.at("duration") == 1);
    REQUIRE(d.clamp_notes.size() == 1);
    CHECK(d.clamp_notes[0] == "thrust: requested 900, clamped to 600");
    CHECK_THROWS_AS(resolve_decision(parse_action_reply("ACTION: yaw_left\nPARAMS: speed=1"), cfg.interface),
                    ActionParseFailure);
    CHECK_THROWS_AS(parse_action_reply("ACTION: yaw_left\nPARAMS: thrust=lots"), ActionParseFailure);
    CHECK_THROWS_AS(parse_action_reply("ACTION: yaw_left\nPARAMS: thrust"), ActionParseFailure);
}

TEST_CASE("action parsing takes the last marker and cleans the token") {
    const auto a = parse_action_reply("Maybe ACTION: forward?\nThinking.\nACTION: `rotate_left`.");
    CHECK(a.name == "rotate_left");
    CHECK(parse_action_reply("ACTION: **up**").name == "up");
    CHECK(parse_action_reply("ACTION: up").reasoning == "(no reasoning given)");
    CHECK_THROWS_AS(parse_action_reply("ACTION:   "), ActionParseFailure);
}

TEST_CASE("controller is stateless across instances") {
    const auto cfg = load_shipped("limb");
    const std::vector<ScriptedRule> rules{{"Decide what you need to see", "QUERY: Is the fire extinguisher visible?"},
                                          {"workbench", "ACTION: rotate_cw"}};
    ScriptedBackend b1(rules), b2(rules);
    const auto p1 = prompt_for(cfg), p2 = prompt_for(cfg);
    CHECK(p1.digest() == p2.digest());
    const auto q1 = generate_visual_query(p1, b1), q2 = generate_visual_query(p2, b2);
    CHECK(q1.text == q2.text);
    const std::vector<MonitorObservation> obs{{"gripper", "No: queried object not visible. Visible: workbench (center, medium)."}};
    CHECK(select_action(p1, q1, obs, b1, cfg.interface).action == select_action(p2, q2, obs, b2, cfg.interface).action);
}

TEST_CASE("accepted decisions are always admissible under adversarial replies") {
    const auto cfg = load_shipped("limb");
    const std::vector<std::string> fragments{"ACTION:", "ACTION: up", "ACTION: UP", "PARAMS: x=1", "ACTION: reset\n",
                                             "levitate", "```", "ACTION: rotate_cw.", "\n", "ACTION: fly", "QUERY: ?",
                                             "ACTION: \"bend\"", "ACTION: bend extend", "PARAMS:", "=="};
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, fragments.size() - 1), len(0, 5);
    const auto names = cfg.interface.names();
    int accepted = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::string a, b;
        for (std::size_t i = len(rng); i > 0; --i) a += fragments[pick(rng)];
        for (std::size_t i = len(rng); i > 0; --i) b += fragments[pick(rng)];
        SequenceBackend backend({a.empty() ? "x" : a, b.empty() ? "x" : b});
        try {
            const auto d = select_action(prompt_for(cfg), {"q"}, {}, backend, cfg.interface);
            CHECK(std::find(names.begin(), names.end(), d.action.name) != names.end());
            ++accepted;
        } catch (const UnknownAction&) {
        } catch (const ActionParseFailure&) {
        }
    }
    CHECK(accepted > 0);
}
