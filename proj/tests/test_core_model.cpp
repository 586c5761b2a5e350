#include "racas/core_model.hpp"
#include "racas/error.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <fstream>

using namespace racas;
using racas::testing::TempDir;
using racas::testing::config_dir;
using racas::testing::load_shipped;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

const char* kRobot = "A test robot.\nCameras: front\nAxes: x, y\n";
const char* kTask = "Reach the box.\nTarget: box\n";

}  // namespace

TEST_CASE("shipped configs load with their action counts") {
    CHECK(load_shipped("dingo").interface.size() == 4);
    CHECK(load_shipped("limb").interface.size() == 9);
    CHECK(load_shipped("rov").interface.size() == 6);
}

TEST_CASE("shipped config fields") {
    const auto limb = load_shipped("limb");
    CHECK(limb.robot.camera_ids == std::vector<std::string>{"gripper", "wrist", "base_front", "base_rear"});
    CHECK(limb.task.target_label == "fire extinguisher");
    const auto rov = load_shipped("rov");
    const auto& surge = validate_action("surge_forward", rov.interface);
    REQUIRE(surge.find_parameter("thrust") != nullptr);
    CHECK(surge.find_parameter("thrust")->min == 300);
    CHECK(surge.find_parameter("thrust")->max == 600);
    CHECK(surge.find_parameter("duration")->default_value == 2);
}

TEST_CASE("every action validates against its own interface") {
    for (const char* robot : {"dingo", "limb", "rov"}) {
        const auto cfg = load_shipped(robot);
        for (const auto& a : cfg.interface.actions) CHECK(validate_action(a.name, cfg.interface).name == a.name);
    }
}

TEST_CASE("validate_action examples") {
    const auto rov = load_shipped("rov");
    CHECK(validate_action("yaw_left", rov.interface).name == "yaw_left");
    const auto dingo = load_shipped("dingo");
    CHECK_THROWS_AS(validate_action("fly", dingo.interface), UnknownAction);
    try {
        validate_action("Forward", dingo.interface);
        FAIL("case-insensitive match accepted");
    } catch (const UnknownAction& e) {
        CHECK(e.name() == "Forward");
        CHECK(e.admissible().size() == 4);
    }
}

TEST_CASE("duplicate action names are rejected") {
    const char* actions = R"({"actions": [{"name": "forward", "description": "a"}, {"name": "forward", "description": "b"}]})";
    CHECK_THROWS_AS(parse_action_interface(actions), DuplicateActionName);
}

TEST_CASE("schema violations name the field") {
    auto field_of = [](const char* json) {
        try {
            parse_action_interface(json);
        } catch (const SchemaViolation& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of(R"({"actions": [], "extra": 1})") == "actions_file.extra");
    CHECK(field_of(R"({"actions": []})") == "actions");
    CHECK(field_of(R"({"actions": [{"name": "Go", "description": "x"}]})") == "actions[0].name");
    CHECK(field_of(R"({"actions": [{"name": "go"}]})") == "actions[0].description");
    CHECK(field_of(R"({"actions": [{"name": "go", "description": "x", "colour": "red"}]})") == "actions[0].colour");
    CHECK(field_of(R"({"action_count": 2, "actions": [{"name": "go", "description": "x"}]})") == "action_count");
    CHECK(field_of(R"({"actions": [{"name": "go", "description": "x",
        "parameters": [{"name": "speed", "unit": "m/s", "min": 1, "max": 1, "default": 1}]}]})")
              .starts_with("actions[0].parameters[0]"));
    CHECK(field_of(R"({"actions": [{"name": "go", "description": "x", "motion": {"kind": "rotate_left"}}]})") ==
          "actions[0].motion.sectors");
    CHECK(field_of("{not json") == "actions");
}

TEST_CASE("robot description needs a camera line") {
    CHECK_THROWS_AS(parse_robot_description("A robot with no cameras."), SchemaViolation);
    CHECK_THROWS_AS(parse_robot_description("   "), SchemaViolation);
    CHECK_THROWS_AS(parse_robot_description("x\nCameras: a, a"), SchemaViolation);
    const auto r = parse_robot_description("  Body.\nCameras: a, b_2\n");
    CHECK(r.camera_ids == std::vector<std::string>{"a", "b_2"});
    CHECK(r.text == "Body.\nCameras: a, b_2");
    CHECK_THROWS_AS(parse_task_spec(""), SchemaViolation);
}

TEST_CASE("missing files are reported") {
    TempDir dir;
    write(dir / "robot.txt", kRobot);
    write(dir / "task.txt", kTask);
    try {
        load_embodiment_config(dir / "robot.txt", dir / "nope.json", dir / "task.txt");
        FAIL("no exception");
    } catch (const MissingFile& e) {
        CHECK(e.path().find("nope.json") != std::string::npos);
    }
}

TEST_CASE("save and reload is structurally equal") {
    for (const char* robot : {"dingo", "limb", "rov"}) {
        auto cfg = load_shipped(robot);
        cfg.environment_context = "Indoor test hall.";
        TempDir dir;
        save_embodiment_config(cfg, dir.path());
        const auto back = load_embodiment_config(dir / "robot.txt", dir / "actions.json", dir / "task.txt",
                                                 dir / "context.txt");
        CHECK(back == cfg);
    }
}

TEST_CASE("action history indices strictly increase from 1") {
    ActionHistory h;
    CHECK_THROWS_AS(h.append(0, "forward", {}), SchemaViolation);
    h.append(1, "forward", {});
    h.append(2, "backward", {{"speed", 0.2}});
    CHECK_THROWS_AS(h.append(2, "forward", {}), Error);
    CHECK(h.entries().size() == 2);
}

TEST_CASE("proprio keys must be declared axes") {
    const auto robot = parse_robot_description(kRobot);
    ProprioState ok;
    ok.joint_displacements = {{"x", 1.0}};
    CHECK_NOTHROW(check_proprio(ok, robot));
    ProprioState bad;
    bad.joint_displacements = {{"z", 1.0}};
    CHECK_THROWS_AS(check_proprio(bad, robot), SchemaViolation);
}

TEST_CASE("identifier grammar") {
    CHECK(is_identifier("yaw_left"));
    CHECK(is_identifier("a1"));
    CHECK_FALSE(is_identifier("1a"));
    CHECK_FALSE(is_identifier("Yaw"));
    CHECK_FALSE(is_identifier(""));
    CHECK_FALSE(is_identifier("yaw-left"));
}
