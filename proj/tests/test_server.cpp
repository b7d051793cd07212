#include "flexlab/export.hpp"
#include "flexlab/server.hpp"
#include "support/paths.hpp"
#include "support/ws_client.hpp"

#include <doctest.h>
#include <httplib.h>

using namespace flexlab;
using flexlab::testing::WsClient;
using namespace std::chrono_literals;

namespace {

struct Fixture {
    std::shared_ptr<SessionRegistry> registry;
    std::unique_ptr<Server> server;

    explicit Fixture(double speed = 20000) {
        ServiceOptions o;
        o.default_config = flexlab::testing::default_test_config();
        o.session.speed_min_per_s = speed;
        o.session.coalesce_above_ticks_per_s = 1e12;
        o.session.config_base_dir = flexlab::testing::assets_dir();
        registry = std::make_shared<SessionRegistry>(std::move(o));
        server = std::make_unique<Server>(registry, "127.0.0.1", 0);
        server->start();
    }

    httplib::Client http() const {
        httplib::Client c("127.0.0.1", server->port());
        c.set_read_timeout(10, 0);
        return c;
    }

    std::string create() const {
        auto res = http().Post("/sessions", "", "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 201);
        return Json::parse(res->body).at("id").get<std::string>();
    }
};

Json next_json(WsClient& ws) {
    const auto text = ws.recv();
    REQUIRE(text.has_value());
    return Json::parse(*text);
}

/// Reads until the reply carrying `req` arrives, returning it. Other
/// messages are appended to `others`.
Json reply_for(WsClient& ws, const Json& req, std::vector<Json>* others = nullptr) {
    while (true) {
        const auto text = ws.recv();
        REQUIRE(text.has_value());
        Json j = Json::parse(*text);
        if (j.contains("req") && j["req"] == req) return j;
        if (others) others->push_back(std::move(j));
    }
}

}  // namespace

TEST_CASE("health check") {
    Fixture f;
    CHECK(f.server->port() != 0);
    auto res = f.http().Get("/healthz");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == "ok\n");
}

TEST_CASE("session creation over http") {
    Fixture f;
    const auto id = f.create();
    CHECK(f.registry->find(id) != nullptr);

    auto doc = Json::parse(read_file(flexlab::testing::assets_dir() / "default_config.json"));
    doc["baseline"]["cooling_setpoint_c"] = 18;
    auto res = f.http().Post("/sessions", doc.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    const auto body = Json::parse(res->body);
    CHECK(body["error"] == "validation");
    CHECK(body["violations"][0].get<std::string>().find("deadband violation") != std::string::npos);

    res = f.http().Post("/sessions", "{\"zones\":", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(Json::parse(res->body)["error"] == "parse_error");
}

TEST_CASE("exports wait for the run to finish") {
    Fixture f;
    const auto id = f.create();
    auto res = f.http().Get("/sessions/" + id + "/export.csv");
    REQUIRE(res);
    CHECK(res->status == 409);
    CHECK(Json::parse(res->body)["message"] == "run incomplete");
    res = f.http().Get("/sessions/" + id + "/summary.json");
    REQUIRE(res);
    CHECK(res->status == 409);
    res = f.http().Get("/sessions/ffff/export.csv");
    REQUIRE(res);
    CHECK(res->status == 404);
}

TEST_CASE("web socket to an unknown session is refused") {
    Fixture f;
    CHECK_THROWS(WsClient("127.0.0.1", f.server->port(), "/ws/session/0123"));
}

TEST_CASE("full live run over the web socket") {
    Fixture f;
    const auto id = f.create();
    WsClient ws("127.0.0.1", f.server->port(), "/ws/session/" + id);
    CHECK(next_json(ws) == Json::parse(R"({"type":"phase","phase":"configured"})"));

    ws.send(R"({"type":"override","req":"early","command":{"kind":"cooling_mode","mode":1}})");
    const auto early = reply_for(ws, "early");
    CHECK(early["type"] == "error");
    CHECK(early["message"] == "not running");

    ws.send(R"({"type":"start","req":1})");
    std::vector<Json> stream;
    CHECK(reply_for(ws, 1, &stream)["type"] == "ack");
    while (auto text = ws.recv()) stream.push_back(Json::parse(*text));
    CHECK(ws.closed_normally());

    std::size_t telemetry = 0;
    for (const auto& m : stream) telemetry += m["type"] == "telemetry";
    CHECK(telemetry == 1440);
    REQUIRE(stream.size() >= 2);
    CHECK(stream.back()["type"] == "summary");
    CHECK(stream[stream.size() - 2] == Json::parse(R"({"type":"phase","phase":"finished"})"));

    auto res = f.http().Get("/sessions/" + id + "/export.csv");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == export_csv(run_day(flexlab::testing::default_test_config()).frames));
    res = f.http().Get("/sessions/" + id + "/summary.json");
    REQUIRE(res);
    CHECK(summary_from_json(Json::parse(res->body)) == summary_from_json(stream.back()["summary"]));
}

TEST_CASE("two clients on one session get the same frames") {
    Fixture f(5000);
    const auto id = f.create();
    WsClient a("127.0.0.1", f.server->port(), "/ws/session/" + id);
    WsClient b("127.0.0.1", f.server->port(), "/ws/session/" + id);
    CHECK(next_json(a)["phase"] == "configured");
    CHECK(next_json(b)["phase"] == "configured");
    a.send(R"({"type":"start","req":"go"})");
    std::vector<Json> sa, sb;
    while (auto t = a.recv()) sa.push_back(Json::parse(*t));
    while (auto t = b.recv()) sb.push_back(Json::parse(*t));
    // only the sender sees its ack
    std::erase_if(sa, [](const Json& j) { return j["type"] == "ack"; });
    CHECK(sa == sb);
    CHECK(sa.back()["type"] == "summary");
}

TEST_CASE("server stops cleanly with a client attached to a running session") {
    auto f = std::make_unique<Fixture>(5);
    const auto id = f->create();
    auto ws = std::make_unique<WsClient>("127.0.0.1", f->server->port(), "/ws/session/" + id);
    ws->send(R"({"type":"start","req":1})");
    reply_for(*ws, 1);
    f->server->stop();
    // the session keeps ticking with nobody attached
    const auto session = f->registry->find(id);
    const auto n = session->frames().size();
    std::this_thread::sleep_for(300ms);
    CHECK(session->frames().size() > n);
    CHECK(session->subscriber_count() == 0);
    ws.reset();
    f.reset();
}
