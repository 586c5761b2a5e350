#include "racas/error.hpp"
#include "racas/memory.hpp"

#include <doctest.h>

#include <random>

using namespace racas;

namespace {

StepRecord record_with(int step, std::string action, MotionEvent motion, std::vector<ObservationEntry> obs = {},
                       DispatchAck ack = DispatchAck::ok()) {
    StepRecord r;
    r.step = step;
    r.query = "Where is the red chair?";
    r.observations = std::move(obs);
    r.decision.action = std::move(action);
    r.decision.motion = motion;
    r.ack = std::move(ack);
    return r;
}

const ObjectEntry* find_object(const EnvironmentMemory& m, const std::string& label) {
    for (const auto& o : m.objects) {
        if (o.label == label) return &o;
    }
    return nullptr;
}

std::string four_sections(const std::string& history) {
    return std::string(kPhysicalEnvironmentHeader) + "\nA pallet ahead.\n" + std::string(kRobotStateHeader) +
           "\nAt start.\n" + std::string(kCuratedHistoryHeader) + "\n" + history + "\n" +
           std::string(kTaskStateHeader) + "\nFind the chair.";
}

class SequenceBackend final : public ChatBackend {
public:
    explicit SequenceBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string id() const override { return "sequence"; }
    int calls = 0;

protected:
    std::string do_complete(std::span<const ChatMessage>) override {
        return replies_.at(static_cast<std::size_t>(calls++));
    }

private:
    std::vector<std::string> replies_;
};

}  // namespace

TEST_CASE("empty memory renders four headers with sentinels") {
    const auto text = render_memory_text(empty_memory());
    CHECK(text == "[PHYSICAL ENVIRONMENT]\n(nothing recorded)\n[ROBOT STATE]\n(nothing recorded)\n"
                  "[CURATED HISTORY]\n(nothing recorded)\n[TASK STATE]\n(nothing recorded)");
    CHECK(text.size() == minimum_memory_budget());
    CHECK_THROWS_AS(empty_memory(minimum_memory_budget() - 1), SchemaViolation);
    CHECK_NOTHROW(empty_memory(minimum_memory_budget()));
}

TEST_CASE("objects are listed under the physical environment") {
    auto m = empty_memory();
    m.objects.push_back({"pallet", "", Bearing::front(), DistanceClass::near, 2});
    m.objects.push_back({"red chair", "seen by left camera", Bearing::left(), DistanceClass::far, 3});
    const auto text = render_memory_text(m);
    CHECK(text.find("- pallet: front, near, last seen step 2") != std::string::npos);
    CHECK(text.find("- red chair: left, far, last seen step 3; seen by left camera") != std::string::npos);
    CHECK(text.size() <= m.size_budget);
}

TEST_CASE("detections are parsed from both answer styles") {
    const auto yes = parse_detections("Yes: red chair visible, right of frame, small.");
    REQUIRE(yes.size() == 1);
    CHECK(yes[0].label == "red chair");
    CHECK(yes[0].side == "right");
    CHECK(yes[0].size == "small");
    const auto seen = parse_detections("No: queried object not visible. Visible: pallet (center, large), shelf (left, small).");
    REQUIRE(seen.size() == 2);
    CHECK(seen[1].label == "shelf");
    CHECK(parse_detections("No: queried object not visible.").empty());
}

TEST_CASE("first detection by the front camera is stored as front") {
    const auto m = reference_curate(empty_memory(),
                                    record_with(1, "forward", MotionEvent::translate(MotionKind::translate_forward),
                                                {{"front", Bearing::front(), "Yes: red chair visible, center of frame, medium."}}),
                                    "Find the red chair.");
    const auto* chair = find_object(m, "red chair");
    REQUIRE(chair);
    CHECK(chair->bearing == Bearing::front());
    CHECK(chair->distance_class == DistanceClass::mid);
    CHECK(chair->last_seen_step == 1);
    CHECK(m.task_state.starts_with("Objective: Find the red chair.\nStatus: in progress"));
}

TEST_CASE("moving left turns a front object into front-right") {
    auto m = empty_memory();
    m.objects.push_back({"pallet", "", Bearing::front(), DistanceClass::near, 1});
    m = reference_curate(m, record_with(2, "left", MotionEvent::translate(MotionKind::translate_left)));
    CHECK(find_object(m, "pallet")->bearing == Bearing::front_right());
    m = reference_curate(m, record_with(3, "rotate_left", MotionEvent::rotate_left(2)));
    CHECK(find_object(m, "pallet")->bearing == Bearing::back_right());
}

TEST_CASE("a blocked action does not move remembered bearings") {
    auto m = empty_memory();
    m.objects.push_back({"pallet", "", Bearing::front(), DistanceClass::near, 1});
    m = reference_curate(m, record_with(2, "rotate_left", MotionEvent::rotate_left(2), {}, DispatchAck::blocked()));
    CHECK(find_object(m, "pallet")->bearing == Bearing::front());
    CHECK(m.last_motion == MotionEvent::none());
}

TEST_CASE("side camera detection after a rotation records where it came from") {
    auto m = reference_curate(empty_memory(), record_with(1, "rotate_left", MotionEvent::rotate_left(2)));
    m = reference_curate(m, record_with(2, "forward", MotionEvent::translate(MotionKind::translate_forward),
                                        {{"left", Bearing::left(), "Yes: red chair visible, center of frame, small."}}));
    const auto* chair = find_object(m, "red chair");
    REQUIRE(chair);
    CHECK(chair->bearing == Bearing::left());
    CHECK(chair->properties.find("revealed after rotate_left, back of the pose before that move") != std::string::npos);
}

TEST_CASE("a newer sighting replaces the older one") {
    auto m = reference_curate(empty_memory(), record_with(1, "forward", MotionEvent::translate(MotionKind::translate_forward),
                                                          {{"front", Bearing::front(), "Yes: red chair visible, left of frame, small."}}));
    m = reference_curate(m, record_with(2, "forward", MotionEvent::translate(MotionKind::translate_forward),
                                        {{"right", Bearing::right(), "Yes: red chair visible, center of frame, large."}}));
    REQUIRE(m.objects.size() == 1);
    CHECK(m.objects[0].bearing == Bearing::right());
    CHECK(m.objects[0].distance_class == DistanceClass::near);
}

TEST_CASE("a repeated action with the same outcome is folded into one note") {
    auto m = empty_memory();
    const auto fwd = MotionEvent::translate(MotionKind::translate_forward);
    m = reference_curate(m, record_with(1, "forward", fwd));
    m = reference_curate(m, record_with(2, "forward", fwd));
    REQUIRE(m.curated_history.size() == 1);
    CHECK(m.curated_history[0].step == 2);
    CHECK(m.curated_history[0].text.ends_with("(repeated)"));
    m = reference_curate(m, record_with(3, "forward", fwd, {}, DispatchAck::blocked("blocked: shelf")));
    CHECK(m.curated_history.size() == 2);
}

TEST_CASE("memory stays within budget over long runs") {
    for (const std::size_t budget : {minimum_memory_budget(), std::size_t{400}, EnvironmentMemory::kDefaultBudget}) {
        auto m = empty_memory(budget);
        std::mt19937 rng(11);
        const std::vector<std::string> actions{"forward", "backward", "rotate_left", "rotate_right"};
        for (int step = 1; step <= 100; ++step) {
            const auto& a = actions[rng() % actions.size()];
            const std::string label = "object " + std::to_string(rng() % 40);
            m = reference_curate(
                m,
                record_with(step, a + std::to_string(step), MotionEvent::rotate_left(1),
                            {{"front", Bearing::front(), "Yes: " + label + " visible, center of frame, small."}},
                            step % 3 ? DispatchAck::ok() : DispatchAck::blocked()),
                std::string(300, 'x'));
            CHECK(render_memory_text(m).size() <= budget);
        }
    }
}

TEST_CASE("parse_memory_text accepts any order, rejects missing or doubled sections") {
    const auto m = parse_memory_text(four_sections("- drove forward\n- hit shelf"), 8000);
    REQUIRE(m);
    CHECK(m->scene_description == "A pallet ahead.");
    CHECK(m->robot_state == "At start.");
    REQUIRE(m->curated_history.size() == 2);
    CHECK(m->curated_history[1].text == "hit shelf");
    CHECK(m->task_state == "Find the chair.");

    const std::string reordered = std::string(kTaskStateHeader) + "\nT\n" + std::string(kCuratedHistoryHeader) + "\n" +
                                  std::string(kEmptySentinel) + "\n" + std::string(kRobotStateHeader) + "\nR\n" +
                                  std::string(kPhysicalEnvironmentHeader) + "\nP";
    const auto r = parse_memory_text(reordered, 8000);
    REQUIRE(r);
    CHECK(r->task_state == "T");
    CHECK(r->curated_history.empty());

    CHECK_FALSE(parse_memory_text("[PHYSICAL ENVIRONMENT]\nx\n[ROBOT STATE]\ny\n[TASK STATE]\nz", 8000));
    CHECK_FALSE(parse_memory_text(four_sections("x") + "\n[ROBOT STATE]\nagain", 8000));
}

TEST_CASE("model curation uses a valid reply and falls back otherwise") {
    const auto rec = record_with(1, "forward", MotionEvent::translate(MotionKind::translate_forward));
    SequenceBackend good({four_sections("- forward ok")});
    auto r = curate(empty_memory(), rec, good);
    CHECK_FALSE(r.fell_back);
    CHECK(r.memory.scene_description == "A pallet ahead.");
    CHECK(r.memory.last_motion == rec.decision.motion);

    const std::string three = "[PHYSICAL ENVIRONMENT]\nx\n[ROBOT STATE]\ny\n[TASK STATE]\nz";
    SequenceBackend bad({three, three});
    r = curate(empty_memory(), rec, bad);
    CHECK(r.fell_back);
    CHECK(bad.calls == 2);
    CHECK(r.memory == reference_curate(empty_memory(), rec));

    SequenceBackend second({three, four_sections("- ok")});
    CHECK_FALSE(curate(empty_memory(), rec, second).fell_back);

    SequenceBackend too_long({four_sections(std::string(9000, 'h')), four_sections(std::string(9000, 'h'))});
    CHECK(curate(empty_memory(), rec, too_long).fell_back);
}
