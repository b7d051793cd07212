#include "flexlab/error.hpp"
#include "flexlab/export.hpp"
#include "flexlab/session.hpp"
#include "support/paths.hpp"

#include <doctest.h>

#include <thread>

using namespace flexlab;
using namespace std::chrono_literals;

namespace {

std::shared_ptr<SessionRegistry> make_registry(double speed, double coalesce_above = 1e12,
                                               std::filesystem::path persist = {}) {
    ServiceOptions o;
    o.default_config = flexlab::testing::default_test_config();
    o.session.speed_min_per_s = speed;
    o.session.coalesce_above_ticks_per_s = coalesce_above;
    o.session.persist_dir = std::move(persist);
    o.session.config_base_dir = flexlab::testing::assets_dir();
    return std::make_shared<SessionRegistry>(std::move(o));
}

Json send(Session& s, const std::string& text) { return Json::parse(s.handle_text(text)); }

void wait_for_frames(const Session& s, std::size_t n) {
    for (int i = 0; i < 2000 && s.frames().size() < n; ++i) std::this_thread::sleep_for(1ms);
}

std::vector<WireMessage> drain(Subscriber& sub) {
    std::vector<WireMessage> out;
    while (auto m = sub.pop(10s)) out.push_back(std::move(*m));
    return out;
}

}  // namespace

TEST_CASE("create with the default template") {
    auto reg = make_registry(10);
    const auto s = reg->create(Json());
    CHECK(s->phase() == Phase::configured);
    CHECK(s->id().size() == 32);
    CHECK(reg->find(s->id()) == s);
    CHECK(reg->find("nope") == nullptr);
    CHECK(reg->create(Json::object())->id() != s->id());
}

TEST_CASE("create rejects invalid documents") {
    auto reg = make_registry(10);
    auto doc = Json::parse(read_file(flexlab::testing::assets_dir() / "default_config.json"));
    doc["baseline"]["cooling_setpoint_c"] = 18;
    try {
        reg->create(doc);
        FAIL("expected validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("deadband violation") != std::string::npos);
    }
    doc = Json::parse(read_file(flexlab::testing::assets_dir() / "default_config.json"));
    doc["weather_path"] = "missing_weather.csv";
    try {
        reg->create(doc);
        FAIL("expected validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("file not found") != std::string::npos);
        CHECK(std::string(e.what()).find("missing_weather.csv") != std::string::npos);
    }
    CHECK(reg->size() == 0);
}

TEST_CASE("command replies") {
    auto reg = make_registry(1);
    auto s = reg->create(Json());

    auto r = send(*s, R"({"type":"override","command":{"kind":"cooling_mode","mode":-2},"req":"1"})");
    CHECK(r["type"] == "error");
    CHECK(r["req"] == "1");
    CHECK(r["code"] == "not_running");
    CHECK(r["message"] == "not running");

    r = send(*s, R"({"type":"pause","req":2})");
    CHECK(r["type"] == "error");
    CHECK(r["req"] == 2);

    CHECK(send(*s, R"({"type":"start","req":"s"})") == Json::parse(R"({"type":"ack","req":"s"})"));
    CHECK(s->phase() == Phase::running);
    CHECK(send(*s, R"({"type":"override","command":{"kind":"cooling_mode","mode":-2},"req":"7"})") ==
          Json::parse(R"({"type":"ack","req":"7"})"));

    CHECK(send(*s, R"({"type":"pause","req":"p1"})")["type"] == "ack");
    CHECK(send(*s, R"({"type":"pause","req":"p2"})")["type"] == "ack");
    CHECK(s->phase() == Phase::paused);

    r = send(*s, R"({"type":"set_speed","speed":0,"req":"sp"})");
    CHECK(r["type"] == "error");
    CHECK(r["message"] == "speed must be positive");
    CHECK(send(*s, R"({"type":"set_speed","speed":-3,"req":"sp2"})")["type"] == "error");

    r = send(*s, R"({"type":"override","command":{"kind":"cooling_mode","mode":0.3},"req":"bad"})");
    CHECK(r["type"] == "error");
    CHECK(r["code"] == "validation");

    r = send(*s, R"({"type":"override","req":"x",)");
    CHECK(r["type"] == "error");
    CHECK(r["code"] == "parse_error");
    CHECK(r["message"].get<std::string>().starts_with("malformed JSON at byte "));

    r = send(*s, R"({"type":"warp","req":"w"})");
    CHECK(r["type"] == "error");
    CHECK(r["req"] == "w");

    r = send(*s, R"({"type":"configure","req":"c","config":{}})");
    CHECK(r["type"] == "error");

    CHECK(send(*s, R"({"type":"resume","req":"r"})")["type"] == "ack");
    CHECK(send(*s, R"({"type":"reset","req":"z"})")["type"] == "ack");
    CHECK(s->phase() == Phase::configured);
    CHECK(s->command_log().empty());
    CHECK_THROWS_AS(s->export_csv(), Error);
}

TEST_CASE("configure before start replaces the config") {
    auto reg = make_registry(1000);
    auto s = reg->create(Json());
    auto doc = Json::parse(read_file(flexlab::testing::assets_dir() / "default_config.json"));
    doc["baseline"]["cooling_setpoint_c"] = 25;
    Json msg{{"type", "configure"}, {"req", "c"}, {"config", doc}};
    CHECK(send(*s, msg.dump())["type"] == "ack");
    CHECK(s->config().baseline.cooling_setpoint_c == 25.0);
    doc["dt_s"] = 0;
    msg["config"] = doc;
    const auto r = send(*s, msg.dump());
    CHECK(r["type"] == "error");
    CHECK(r["message"].get<std::string>().find("dt_s") != std::string::npos);
    CHECK(s->config().dt_s == 60.0);
}

TEST_CASE("pausing and speed changes never alter frames") {
    auto reg = make_registry(3000);
    auto s = reg->create(Json());
    CHECK(send(*s, R"({"type":"start"})")["type"] == "ack");
    wait_for_frames(*s, 50);
    CHECK(send(*s, R"({"type":"pause"})")["type"] == "ack");
    const auto n = s->frames().size();
    std::this_thread::sleep_for(30ms);
    CHECK(s->frames().size() == n);
    CHECK(send(*s, R"({"type":"set_speed","speed":700})")["type"] == "ack");
    CHECK(send(*s, R"({"type":"resume"})")["type"] == "ack");
    wait_for_frames(*s, n + 40);
    CHECK(send(*s, R"({"type":"set_speed","speed":20000})")["type"] == "ack");
    REQUIRE(s->wait_finished(20s));
    CHECK(s->frames() == run_day(flexlab::testing::default_test_config()).frames);
    CHECK(s->summary().has_value());
    const auto r = send(*s, R"({"type":"override","command":{"kind":"clear_all"},"req":9})");
    CHECK(r["code"] == "not_running");
}

TEST_CASE("late joiner gets the current frame first") {
    auto reg = make_registry(2000);
    auto s = reg->create(Json());
    send(*s, R"({"type":"start"})");
    wait_for_frames(*s, 100);
    send(*s, R"({"type":"pause"})");
    auto sub = s->subscribe();
    const auto first = sub->pop(1s);
    REQUIRE(first.has_value());
    CHECK(first->type == MessageType::telemetry);
    CHECK(frame_from_json(first->body.at("frame")) == s->frames().back());
    const auto second = sub->pop(1s);
    REQUIRE(second.has_value());
    CHECK(second->type == MessageType::phase);
}

TEST_CASE("subscribers see the same lossless stream ending in the summary") {
    auto reg = make_registry(10000);
    auto s = reg->create(Json());
    auto a = s->subscribe();
    auto b = s->subscribe();
    send(*s, R"({"type":"start"})");
    const auto ma = drain(*a);
    const auto mb = drain(*b);
    CHECK(ma == mb);
    REQUIRE(!ma.empty());
    CHECK(ma.back().type == MessageType::summary);
    CHECK(summary_from_json(ma.back().body.at("summary")) == *s->summary());
    std::size_t frames = 0;
    for (const auto& m : ma) frames += m.type == MessageType::telemetry;
    CHECK(frames == 1440);
    CHECK(a->drained());
    // a finished session hands new subscribers the summary and closes
    auto late = s->subscribe();
    const auto ml = drain(*late);
    REQUIRE(!ml.empty());
    CHECK(ml.back().type == MessageType::summary);
}

TEST_CASE("fast runs coalesce telemetry but keep every frame") {
    auto reg = make_registry(10000, 20.0);
    auto s = reg->create(Json());
    auto sub = s->subscribe();
    // hold the consumer back so the mailbox has something to coalesce
    send(*s, R"({"type":"start"})");
    REQUIRE(s->wait_finished(20s));
    const auto msgs = drain(*sub);
    std::size_t frames = 0;
    for (const auto& m : msgs) frames += m.type == MessageType::telemetry;
    CHECK(frames < 1440);
    CHECK(msgs.back().type == MessageType::summary);
    CHECK(s->frames().size() == 1440);
}

TEST_CASE("finished runs are persisted and replay headless") {
    const auto dir = flexlab::testing::scratch_dir("persist");
    auto reg = make_registry(4000, 1e12, dir);
    auto s = reg->create(Json());
    CHECK_THROWS_AS(s->summary_json(), Error);
    send(*s, R"({"type":"start"})");
    wait_for_frames(*s, 30);
    send(*s, R"({"type":"pause"})");
    send(*s, R"({"type":"override","command":{"kind":"cooling_mode","mode":1}})");
    send(*s, R"({"type":"resume"})");
    wait_for_frames(*s, 200);
    send(*s, R"({"type":"pause"})");
    send(*s, R"({"type":"override","command":{"kind":"cooling_absolute","value":25.5}})");
    send(*s, R"({"type":"resume"})");
    REQUIRE(s->wait_finished(20s));
    const auto run_dir = dir / s->id();
    const auto log = parse_script_text(read_file(run_dir / "commands.ndjson"));
    CHECK(log.events.size() == 2);
    const auto replay = run_day(flexlab::testing::default_test_config(), log);
    CHECK(replay.frames == s->frames());
    CHECK(read_file(run_dir / "export.csv") == export_csv(replay.frames));
    CHECK(read_file(run_dir / "summary.json") == s->summary_json());
    std::filesystem::remove_all(dir);
}

TEST_CASE("restart after reset runs a fresh day") {
    auto reg = make_registry(1);
    auto s = reg->create(Json());
    send(*s, R"({"type":"start"})");
    REQUIRE(send(*s, R"({"type":"override","command":{"kind":"cooling_mode","mode":2}})")["type"] == "ack");
    send(*s, R"({"type":"set_speed","speed":20000})");
    REQUIRE(s->wait_finished(20s));
    CHECK(s->command_log().size() == 1);
    CHECK(send(*s, R"({"type":"start","req":1})")["type"] == "error");
    send(*s, R"({"type":"reset"})");
    send(*s, R"({"type":"start"})");
    REQUIRE(s->wait_finished(20s));
    CHECK(s->command_log().empty());
    CHECK(s->frames() == run_day(flexlab::testing::default_test_config()).frames);
}

TEST_CASE("concurrent sessions stay isolated") {
    auto reg = make_registry(1);
    auto a = reg->create(Json());
    auto b = reg->create(Json());
    std::thread ta([&] {
        send(*a, R"({"type":"start"})");
        send(*a, R"({"type":"override","command":{"kind":"cooling_mode","mode":2}})");
        send(*a, R"({"type":"set_speed","speed":8000})");
    });
    std::thread tb([&] {
        send(*b, R"({"type":"start"})");
        send(*b, R"({"type":"set_speed","speed":8000})");
    });
    ta.join();
    tb.join();
    REQUIRE(a->wait_finished(20s));
    REQUIRE(b->wait_finished(20s));
    CHECK(a->command_log().size() == 1);
    CHECK(b->command_log().empty());
    CHECK(b->frames() == run_day(flexlab::testing::default_test_config()).frames);
    CHECK(a->frames() == run_day(flexlab::testing::default_test_config(), script_from_log(a->command_log())).frames);
}
