#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "cim/fixtures.hpp"
#include "cim/parser.hpp"
#include "cim/query.hpp"
#include "cim/service.hpp"
#include "support.hpp"

using namespace cim;
using json = nlohmann::json;

namespace {

const Service& ready_service() {
    static Service* s = [] {
        auto* svc = new Service();
        svc->install(Session::open(test::olympic_dir()));
        return svc;
    }();
    return *s;
}

json body(const HttpResponse& r) { return json::parse(r.body); }

const char* kWeekendJson = R"({
  "factRelationship": "Attends",
  "rollups": {"Date": "Weekend"},
  "conditions": [{"level": "Venue", "property": "name", "operator": "equals", "values": ["Whistler Olympic Park"]}],
  "aggregation": {"function": "sum", "measure": "TicketPrice"}
})";

}  // namespace

TEST(Service, NotReadyBeforeLoad) {
    Service s;
    EXPECT_FALSE(s.ready());
    for (const char* path : {"/health", "/model", "/views"}) {
        const HttpResponse r = s.handle("GET", path, "");
        EXPECT_EQ(r.status, 503) << path;
        EXPECT_EQ(body(r).at("error").at("code"), "not-ready");
    }
}

TEST(Service, LoadFailureIsReported) {
    Service s;
    s.load("/nonexistent/workspace");
    EXPECT_FALSE(s.ready());
    const HttpResponse r = s.handle("GET", "/health", "");
    EXPECT_EQ(r.status, 503);
    EXPECT_EQ(body(r).at("error").at("code"), "load-failed");
}

TEST(Service, Health) {
    const HttpResponse r = ready_service().handle("GET", "/health", "");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(body(r).at("apiVersion"), 1);
    EXPECT_EQ(body(r).at("views"), 26);
}

TEST(Service, ModelIsTheGraphExport) {
    const HttpResponse r = ready_service().handle("GET", "/model", "");
    ASSERT_EQ(r.status, 200);
    json expected = export_graph_json(test::olympic().workspace.cdl, test::olympic().workspace.sdl, test::olympic().workspace.mdl);
    expected["apiVersion"] = 1;
    EXPECT_EQ(body(r), expected);
}

TEST(Service, HeadHasNoBody) {
    const HttpResponse r = ready_service().handle("HEAD", "/model", "");
    EXPECT_EQ(r.status, 200);
    EXPECT_TRUE(r.body.empty());
}

TEST(Service, ViewsContainWeekend) {
    const json j = body(ready_service().handle("GET", "/views", ""));
    bool found = false;
    for (const auto& v : j.at("views")) found |= v.at("id") == "level:Weekend" && v.at("body").dump().find("\"Sat\"") != std::string::npos;
    EXPECT_TRUE(found);
}

TEST(Service, ViewsConflictWhenCompilationFails) {
    auto session = std::make_shared<Session>(*Session::open(test::olympic_dir()));
    session->workspace.mdl = MdlModel{};
    session->compiled = compile(session->workspace.cdl, session->workspace.sdl, session->workspace.mdl);
    Service s;
    s.install(session);
    const HttpResponse r = s.handle("GET", "/views", "");
    EXPECT_EQ(r.status, 409);
    EXPECT_EQ(body(r).at("error").at("code"), "compile-failed");
    const json details = body(r).at("error").at("details");
    bool unmapped_level = false;
    for (const auto& d : details) unmapped_level |= d.at("code") == "unmapped-level";
    EXPECT_TRUE(unmapped_level);
    EXPECT_EQ(s.handle("GET", "/levels/Weekend/members", "").status, 409);
}

TEST(Service, QueryMatchesOracle) {
    const HttpResponse r = ready_service().handle("POST", "/query", kWeekendJson);
    ASSERT_EQ(r.status, 200);
    const Session& o = test::olympic();
    const Relation expected = oracle_execute(CqlQuery::from_json(json::parse(kWeekendJson)), o.workspace.cdl,
                                             o.workspace.sdl, o.workspace.mdl, o.store);
    EXPECT_EQ(body(r), result_to_json(expected));
}

TEST(Service, QueryErrors) {
    const Service& s = ready_service();
    EXPECT_EQ(s.handle("POST", "/query", "").status, 400);
    EXPECT_EQ(s.handle("POST", "/query", "{\"factRelationship\": 1}").status, 400);
    json j = json::parse(kWeekendJson);
    j["aggregation"]["measure"] = "TicketPrise";
    const HttpResponse r = s.handle("POST", "/query", j.dump());
    EXPECT_EQ(r.status, 422);
    EXPECT_EQ(body(r).at("error").at("code"), "unresolved-name");
    EXPECT_EQ(body(r).at("error").at("details").at("candidates"), json::array({"TicketPrice"}));
}

TEST(Service, LevelMembers) {
    const Service& s = ready_service();
    const HttpResponse r = s.handle("GET", "/levels/Weekend/members", "");
    ASSERT_EQ(r.status, 200);
    const json j = body(r);
    EXPECT_EQ(j.at("rows").size(), 104u);
    for (const auto& row : j.at("rows")) EXPECT_TRUE(row[2] == "Sat" || row[2] == "Sun");
    EXPECT_EQ(s.handle("GET", "/levels/Weekand/members", "").status, 404);
}

TEST(Service, RoutingErrors) {
    const Service& s = ready_service();
    EXPECT_EQ(s.handle("GET", "/nowhere", "").status, 404);
    EXPECT_EQ(s.handle("POST", "/model", "").status, 405);
    EXPECT_EQ(s.handle("GET", "/query", "").status, 405);
    EXPECT_EQ(s.handle("GET", "/health?verbose=1", "").status, 200);
}

TEST(Service, ServesOverHttp) {
    Service s;
    const int port = s.bind_any("127.0.0.1");
    std::thread server([&] { s.listen(); });
    s.wait_until_listening();
    httplib::Client client("127.0.0.1", port);
    auto early = client.Get("/health");
    ASSERT_TRUE(early);
    EXPECT_EQ(early->status, 503);
    s.install(Session::open(test::olympic_dir()));
    auto health = client.Get("/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    auto query = client.Post("/query", kWeekendJson, "application/json");
    ASSERT_TRUE(query);
    EXPECT_EQ(query->status, 200);
    EXPECT_EQ(json::parse(query->body), json::parse(ready_service().handle("POST", "/query", kWeekendJson).body));
    s.stop();
    server.join();
}
