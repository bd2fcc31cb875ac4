#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "pme/errors.hpp"
#include "pme/ingestion.hpp"
#include "pme/random.hpp"

using namespace pme;
namespace fs = std::filesystem;

class IngestionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pme_ingest_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << body;
    return p;
  }

  DatasetManifest manifest(const std::string& actions, const std::string& edges) {
    DatasetManifest m;
    m.actions.push_back({write("actions.csv", actions), ""});
    m.edges = write("edges.csv", edges);
    return m;
  }

  fs::path dir_;
};

TEST_F(IngestionTest, ActionSourceParsesOptionalKind) {
  const auto a = ActionSource::parse("data/loves.tsv:love");
  EXPECT_EQ(a.path, fs::path("data/loves.tsv"));
  EXPECT_EQ(a.kind, "love");
  const auto b = ActionSource::parse("data/all.csv");
  EXPECT_EQ(b.kind, "");
}

TEST_F(IngestionTest, SymmetricEdgesCollapse) {
  const Dataset d = load_dataset(manifest("user,item,timestamp,kind\na,x,1,love\n", "user,friend\na,b\nb,a\n"));
  EXPECT_EQ(d.graph.edge_count(), 1u);
  EXPECT_EQ(d.report.duplicate_edges, 1u);
  EXPECT_TRUE(d.graph.are_friends(*d.log.dict().find_user("a"), *d.log.dict().find_user("b")));
}

TEST_F(IngestionTest, SelfEdgeIsCountedNotKept) {
  const Dataset d = load_dataset(manifest("user,item,timestamp,kind\na,x,1,love\n", "user,friend\na,a\na,b\n"));
  EXPECT_EQ(d.report.self_edges, 1u);
  EXPECT_EQ(d.graph.edge_count(), 1u);
}

TEST_F(IngestionTest, NegativeTimestampNamesTheLine) {
  try {
    load_dataset(manifest("user,item,timestamp,kind\na,x,1,love\nb,y,-4,love\n", "user,friend\na,b\n"));
    FAIL() << "expected a data error";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("actions.csv:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("-4"), std::string::npos) << msg;
  }
}

TEST_F(IngestionTest, UnparseableTimestampAndUnknownKindFail) {
  EXPECT_THROW(load_dataset(manifest("user,item,timestamp,kind\na,x,soon,love\n", "user,friend\na,b\n")),
               DataError);
  DatasetManifest m = manifest("user,item,timestamp,kind\na,x,1,rate\n", "user,friend\na,b\n");
  m.kinds = {"love"};
  EXPECT_THROW(load_dataset(m), DataError);
}

TEST_F(IngestionTest, MissingColumnsAndFilesFail) {
  EXPECT_THROW(load_dataset(manifest("user,timestamp\na,1\n", "user,friend\na,b\n")), DataError);
  EXPECT_THROW(load_dataset(manifest("user,item,timestamp\na,x,1\n", "user,friend\na,b\n")), DataError);
  DatasetManifest m = manifest("user,item,timestamp,kind\na,x,1,love\n", "user,friend\n");
  m.edges = dir_ / "absent.csv";
  EXPECT_THROW(load_dataset(m), DataError);
}

TEST_F(IngestionTest, TabDelimiterAndKindSuffix) {
  DatasetManifest m;
  m.actions.push_back({write("loves.tsv", "user_id\titem_id\tts\nu1\ts1\t10\nu2\ts1\t12\n"), "love"});
  m.actions.push_back({write("listens.tsv", "user_id\titem_id\tts\nu1\ts2\t11\n"), "listen"});
  m.edges = write("edges.tsv", "a\tb\nu1\tu2\n");
  const Dataset d = load_dataset(m);
  EXPECT_EQ(d.log.size(), 3u);
  EXPECT_EQ(d.log.dict().kinds(), (std::vector<std::string>{"love", "listen"}));
  EXPECT_EQ(d.log.stream(d.log.dict().kind("listen")).size(), 1u);
}

TEST_F(IngestionTest, IdsFollowNameOrder) {
  const Dataset d = load_dataset(manifest("user,item,timestamp,kind\nzed,b,1,love\namy,a,2,love\n", "u,v\nzed,mid\n"));
  const Dictionary& dict = d.log.dict();
  EXPECT_EQ(dict.user_name(UserId{0}), "amy");
  EXPECT_EQ(dict.user_name(UserId{1}), "mid");
  EXPECT_EQ(dict.user_name(UserId{2}), "zed");
}

TEST_F(IngestionTest, LenientCountsEveryLine) {
  Rng rng(4);
  std::string body = "user,item,timestamp,kind\n";
  std::size_t bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto roll = uniform_index(rng, 20);
    const std::string user = "u" + std::to_string(uniform_index(rng, 100));
    const std::string item = "i" + std::to_string(uniform_index(rng, 500));
    if (roll == 0) {
      body += user + "," + item + ",-1,love\n";
      ++bad;
    } else if (roll == 1) {
      body += user + "," + item + "\n";
      ++bad;
    } else if (roll == 2) {
      body += user + "," + item + ",12x,love\n";
      ++bad;
    } else if (roll == 3) {
      body += "," + item + ",5,love\n";
      ++bad;
    } else {
      body += user + "," + item + "," + std::to_string(uniform_index(rng, 100000)) + ",love\n";
    }
  }
  DatasetManifest m = manifest(body, "user,friend\nu1,u2\n");
  EXPECT_THROW(load_dataset(m), DataError);
  m.lenient = true;
  const Dataset d = load_dataset(m);
  EXPECT_EQ(d.report.action_lines, 10000u);
  EXPECT_EQ(d.report.actions_rejected, bad);
  EXPECT_EQ(d.report.actions_accepted + d.report.actions_rejected, d.report.action_lines);
  EXPECT_EQ(d.log.size(), 10000u - bad);
  EXPECT_FALSE(d.report.warnings.empty());
  EXPECT_EQ(dataset_stats(d.log, d.graph).all.action_count, 10000u - bad);
}

TEST_F(IngestionTest, RatingFilterDropsLowRatings) {
  DatasetManifest m = manifest("user,item,timestamp,kind,rating\na,x,1,rate,2\na,y,2,rate,4\nb,x,3,rate,3\n",
                               "user,friend\na,b\n");
  m.min_rating = 3.0;
  const Dataset d = load_dataset(m);
  EXPECT_EQ(d.log.size(), 2u);
  EXPECT_EQ(d.report.actions_filtered, 1u);
}

TEST_F(IngestionTest, RoundTripIsIdentity) {
  Rng rng(8);
  std::string body = "user,item,timestamp,kind\n";
  for (int i = 0; i < 500; ++i) {
    body += "user" + std::to_string(uniform_index(rng, 30)) + ",song" + std::to_string(uniform_index(rng, 80)) +
            "," + std::to_string(uniform_index(rng, 50)) + "," + (uniform_index(rng, 2) ? "love" : "listen") + "\n";
  }
  std::string edges = "user,friend\n";
  std::string degrees = "user,count\n";
  for (int i = 0; i < 60; ++i) {
    edges += "user" + std::to_string(uniform_index(rng, 30)) + ",user" + std::to_string(uniform_index(rng, 30)) + "\n";
  }
  for (int u = 0; u < 30; ++u) degrees += "user" + std::to_string(u) + ",100\n";
  DatasetManifest m = manifest(body, edges);
  m.declared_degrees = write("degrees.csv", degrees);
  const Dataset first = load_dataset(m);
  const DatasetManifest again = write_dataset(dir_ / "out", first.log, first.graph);
  const Dataset second = load_dataset(again);

  const Dictionary& d1 = first.log.dict();
  const Dictionary& d2 = second.log.dict();
  ASSERT_EQ(d1.user_count(), d2.user_count());
  ASSERT_EQ(d1.item_count(), d2.item_count());
  EXPECT_EQ(d1.kinds(), d2.kinds());
  for (std::uint32_t u = 0; u < d1.user_count(); ++u) EXPECT_EQ(d1.user_name(UserId{u}), d2.user_name(UserId{u}));
  const auto a1 = first.log.actions();
  const auto a2 = second.log.actions();
  ASSERT_EQ(a1.size(), a2.size());
  for (std::size_t i = 0; i < a1.size(); ++i) {
    EXPECT_EQ(std::tuple(a1[i].time, a1[i].user, a1[i].item, a1[i].kind),
              std::tuple(a2[i].time, a2[i].user, a2[i].item, a2[i].kind));
  }
  EXPECT_EQ(first.graph.edges(), second.graph.edges());
  EXPECT_EQ(first.graph.declared_degrees(), second.graph.declared_degrees());
}

TEST_F(IngestionTest, StatsOnThreeUsers) {
  const Dataset d = load_dataset(manifest(
      "user,item,timestamp,kind\na,x,1,love\nb,x,1,love\nb,y,2,love\nc,x,1,love\nc,y,2,love\nc,z,3,love\n",
      "user,friend\na,b\n"));
  const DatasetStats s = dataset_stats(d.log, d.graph);
  EXPECT_EQ(s.all.user_count, 3u);
  EXPECT_EQ(s.all.item_count, 3u);
  EXPECT_DOUBLE_EQ(s.all.actions_per_user.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.all.actions_per_user.median, 2.0);
  EXPECT_EQ(s.edge_count, 1u);
}

TEST_F(IngestionTest, StatsOnSingleUserHaveZeroError) {
  const Dataset d = load_dataset(manifest("user,item,timestamp,kind\na,x,1,love\na,y,1,love\n", "user,friend\na,b\n"));
  EXPECT_EQ(dataset_stats(d.log, d.graph).all.actions_per_user.std_error, 0.0);
}

TEST_F(IngestionTest, StatsMatchTwoPassOracle) {
  Rng rng(12);
  std::string body = "user,item,timestamp,kind\n";
  std::map<std::string, double> per_user;
  std::map<std::string, double> per_item;
  for (int i = 0; i < 3000; ++i) {
    const std::string u = "u" + std::to_string(uniform_index(rng, 1 + uniform_index(rng, 200)));
    const std::string it = "i" + std::to_string(uniform_index(rng, 1 + uniform_index(rng, 400)));
    body += u + "," + it + "," + std::to_string(i) + ",love\n";
    per_user[u] += 1;
    per_item[it] += 1;
  }
  const Dataset d = load_dataset(manifest(body, "user,friend\nu1,u2\n"));
  const DatasetStats s = dataset_stats(d.log, d.graph);

  auto check = [](const std::map<std::string, double>& counts, const Summary& got) {
    std::vector<double> v;
    for (auto& [k, c] : counts) v.push_back(c);
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    EXPECT_EQ(got.n, n);
    EXPECT_NEAR(got.mean, mean, 1e-9 * mean);
    EXPECT_NEAR(got.std_error, se, 1e-9 * se);
    EXPECT_DOUBLE_EQ(got.median, median);
  };
  check(per_user, s.all.actions_per_user);
  check(per_item, s.all.actions_per_item);
}

TEST_F(IngestionTest, StatsRejectEmptyLog) {
  const Dataset d = load_dataset(manifest("user,item,timestamp,kind\n", "user,friend\na,b\n"));
  EXPECT_THROW(dataset_stats(d.log, d.graph), UsageError);
}
