#include <gtest/gtest.h>

#include <httplib.h>

#include "fixtures.hpp"
#include "sgss/service.hpp"
#include "workspace_fixture.hpp"

namespace sgss {
namespace {

using testing::make_summary;
using testing::TempDir;

struct ServiceFixture : ::testing::Test {
  TempDir dir;
  Workspace ws{dir.path()};

  void SetUp() override {
    std::vector<StructuredSummary> ss = {make_summary("a", {2, 1}), make_summary("b", {1}),
                                         make_summary("c", {1}, "q2"), make_summary("d", {2}, "q2")};
    std::vector<PreferencePair> pairs = {{"p1", "q1", "a", "b", PairOrigin::annotated, {}},
                                         {"p2", "q2", "c", "d", PairOrigin::annotated, {}}};
    testing::write_workspace(ws, ss, {}, pairs);
  }

  AnnotationService service(std::uint64_t seed = 0) {
    ServiceOptions o;
    o.seed = seed;
    o.clock = [] { return std::int64_t{1700000000}; };
    return AnnotationService(ws, o);
  }

  static nlohmann::json full_submission(AnnotationService& svc, const std::string& pair_id,
                                        const std::string& labeller, const std::string& choice = "LEFT") {
    nlohmann::json body;
    body["labeller_id"] = labeller;
    body["labels"] = nlohmann::json::array();
    const auto pair = nlohmann::json::parse(svc.get_pair(pair_id, labeller).body.dump());
    for (const auto& col : pair["columns"])
      for (const auto& t : col["checklist"]) body["labels"].push_back({{"target", t}, {"grade", "Perfectly"}});
    body["preference"] = {{"choice", choice}};
    return body;
  }
};

TEST_F(ServiceFixture, CompleteSubmissionIsStored) {
  auto svc = service();
  const auto body = full_submission(svc, "p1", "alice");
  const auto r = svc.submit("p1", body.dump());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["status"], "complete");
  const auto stored = ws.load_labels();
  EXPECT_EQ(stored.labels.size(), body["labels"].size());
  ASSERT_EQ(stored.preferences.size(), 1u);
  EXPECT_EQ(stored.preferences[0].ts, 1700000000);
  EXPECT_EQ(stored.labels[0].kind, LabellerKind::human);
  EXPECT_EQ(svc.get_pair("p1", "alice").body["status"], "complete");
}

TEST_F(ServiceFixture, MissingPreferenceIsConflict) {
  auto svc = service();
  auto body = full_submission(svc, "p1", "alice");
  body.erase("preference");
  body["labels"].erase(0);
  const auto r = svc.submit("p1", body.dump());
  ASSERT_EQ(r.status, 409);
  const auto missing = r.body["missing"].get<std::vector<std::string>>();
  ASSERT_EQ(missing.size(), 2u);
  EXPECT_EQ(missing.back(), "Preference(p1)");
  EXPECT_EQ(missing.front().rfind("OS(", 0), 0u);
  EXPECT_TRUE(ws.load_labels().labels.empty());
}

TEST_F(ServiceFixture, InvalidRequests) {
  auto svc = service();
  EXPECT_EQ(svc.get_pair("nope", "alice").status, 404);
  EXPECT_EQ(svc.submit("nope", R"({"labeller_id":"alice"})").status, 404);
  EXPECT_EQ(svc.submit("p1", "{not json").status, 400);
  EXPECT_EQ(svc.submit("p1", R"({"labels":[]})").status, 400);
  EXPECT_EQ(svc.next_pair("").status, 400);

  auto body = full_submission(svc, "p1", "alice");
  body["labels"][0]["target"]["summary_id"] = "c";
  EXPECT_EQ(svc.submit("p1", body.dump()).status, 400);

  body = full_submission(svc, "p1", "alice");
  body["labels"][0].erase("grade");
  body["labels"][0]["score"] = 0.7;
  EXPECT_EQ(svc.submit("p1", body.dump()).status, 400);

  body = full_submission(svc, "p1", "alice");
  body["labels"][0]["kind"] = "llm";
  EXPECT_EQ(svc.submit("p1", body.dump()).status, 400);

  EXPECT_FALSE(std::filesystem::exists(ws.labels_path()) && !ws.load_labels().labels.empty());
}

TEST_F(ServiceFixture, LabellersHaveIndependentTasks) {
  auto svc = service();
  ASSERT_EQ(svc.submit("p1", full_submission(svc, "p1", "alice").dump()).status, 200);
  EXPECT_EQ(svc.get_pair("p1", "alice").body["status"], "complete");
  EXPECT_EQ(svc.get_pair("p1", "bob").body["status"], "open");
  EXPECT_EQ(svc.next_pair("alice").body["pair_id"], "p2");
  EXPECT_EQ(svc.next_pair("bob").body["pair_id"], "p1");
  ASSERT_EQ(svc.submit("p2", full_submission(svc, "p2", "alice").dump()).status, 200);
  EXPECT_EQ(svc.next_pair("alice").status, 204);

  const auto progress = svc.progress().body;
  EXPECT_EQ(progress["pairs"], 2);
  EXPECT_EQ(progress["labellers"]["alice"]["complete"], 2);
  EXPECT_EQ(progress["labellers"]["bob"]["open"], 2);
}

TEST_F(ServiceFixture, SkipMovesPairToTheBack) {
  auto svc = service();
  EXPECT_EQ(svc.next_pair("alice").body["pair_id"], "p1");
  ASSERT_EQ(svc.skip("p1", "alice").status, 200);
  EXPECT_EQ(svc.next_pair("alice").body["pair_id"], "p2");
  ASSERT_EQ(svc.skip("p2", "alice").status, 200);
  EXPECT_EQ(svc.next_pair("alice").body["pair_id"], "p1");
  EXPECT_EQ(svc.next_pair("bob").body["pair_id"], "p1");
  EXPECT_EQ(svc.progress().body["labellers"]["alice"]["skipped"], 2);

  auto reloaded = service();
  EXPECT_EQ(reloaded.next_pair("alice").body["pair_id"], "p1");
}

TEST_F(ServiceFixture, ChoiceMapsBackToCanonicalOrder) {
  // Over many labellers both presentations occur; a vote for the column
  // showing "a" must always be stored as LEFT.
  auto svc = service(17);
  int swapped = 0;
  for (int n = 0; n < 40; ++n) {
    const std::string who = "l" + std::to_string(n);
    const auto shown = svc.get_pair("p1", who).body;
    const bool a_first = shown["columns"][0]["summary"]["id"] == "a";
    if (!a_first) ++swapped;
    EXPECT_EQ(shown, svc.get_pair("p1", who).body);
    ASSERT_EQ(svc.submit("p1", full_submission(svc, "p1", who, a_first ? "LEFT" : "RIGHT").dump()).status, 200);
  }
  EXPECT_GT(swapped, 5);
  EXPECT_LT(swapped, 35);
  for (const auto& p : ws.load_labels().preferences) EXPECT_EQ(p.choice, Choice::LEFT);
  // Assignments survive a restart.
  auto reloaded = service(99);
  for (int n = 0; n < 40; ++n) {
    const std::string who = "l" + std::to_string(n);
    EXPECT_EQ(reloaded.get_pair("p1", who).body["columns"], svc.get_pair("p1", who).body["columns"]);
  }
}

TEST_F(ServiceFixture, HttpRoundTrip) {
  auto svc = service();
  HttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  server.start();
  httplib::Client client("127.0.0.1", port);

  auto next = client.Get("/api/pairs/next?labeller=alice");
  ASSERT_TRUE(next);
  ASSERT_EQ(next->status, 200);
  EXPECT_EQ(nlohmann::json::parse(next->body)["pair_id"], "p1");

  auto bad = client.Post("/api/pairs/p1/labels", R"({"labeller_id":"alice"})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 409);

  auto ok = client.Post("/api/pairs/p1/labels", full_submission(svc, "p1", "alice").dump(), "application/json");
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 200);

  auto skip = client.Post("/api/pairs/p2/skip?labeller=alice", "", "application/json");
  ASSERT_TRUE(skip);
  EXPECT_EQ(skip->status, 200);

  auto missing = client.Get("/api/pairs/zzz");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  auto progress = client.Get("/api/progress");
  ASSERT_TRUE(progress);
  EXPECT_EQ(nlohmann::json::parse(progress->body)["labellers"]["alice"]["complete"], 1);
  server.stop();
}

}  // namespace
}  // namespace sgss
