#include "fedload/ingest.hpp"

#include "fixtures.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace fedload {
namespace {

namespace fs = std::filesystem;
using testing::fixture_a;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("fedload_ingest_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

TEST(Canonical, FixtureADocumentParses) {
  const std::string doc = R"({"version":"fedload/1","servers":["a","b","c"],
    "users":[{"id":"u1","server":"a"},{"id":"u2","server":"b"},{"id":"u3","server":"c"}],
    "rooms":[{"id":"r1","members":["u1","u2"]},{"id":"r2","members":["u1","u3"]}]})";
  EXPECT_EQ(read_structure(doc, Format::canonical_json), fixture_a());
}

TEST(Canonical, SaveLoadRoundTrip) {
  TempDir dir;
  save(fixture_a(), dir / "a.json");
  EXPECT_EQ(load(dir / "a.json"), fixture_a());
}

TEST(Canonical, SaveIsByteDeterministic) {
  TempDir dir;
  save(fixture_a(), dir / "one.json");
  save(fixture_a(), dir / "two.json");
  EXPECT_EQ(read_file(dir / "one.json"), read_file(dir / "two.json"));
}

TEST(Canonical, RejectsUnknownField) {
  const std::string doc = R"({"version":"fedload/1","servers":[],"users":[],"rooms":[],"extra":1})";
  EXPECT_THROW(read_structure(doc, Format::canonical_json), ParseError);
  const std::string user = R"({"version":"fedload/1","servers":["a"],"users":[{"id":"u","server":"a","x":1}],"rooms":[]})";
  EXPECT_THROW(read_structure(user, Format::canonical_json), ParseError);
}

TEST(Canonical, RejectsWrongVersion) {
  EXPECT_THROW(read_structure(R"({"version":"fedload/2","servers":[],"users":[],"rooms":[]})", Format::canonical_json),
               ParseError);
}

TEST(Canonical, SyntaxErrorReportsPosition) {
  try {
    read_structure("{\n  \"version\": \"fedload/1\",\n  \"servers\": [,]\n}", Format::canonical_json);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_GT(e.column(), 0u);
  }
}

TEST(Canonical, DuplicatesRejected) {
  EXPECT_THROW(read_structure(R"({"version":"fedload/1","servers":["a","a"],"users":[],"rooms":[]})",
                              Format::canonical_json),
               ParseError);
}

TEST(Membership, FixtureARows) {
  const std::string text = "user_id,server_id,room_id\nu1,a,r1\nu2,b,r1\nu1,a,r2\nu3,c,r2\n";
  EXPECT_EQ(read_structure(text, Format::membership_csv), fixture_a());
}

TEST(Membership, DuplicateRowsCollapse) {
  const std::string text = "user_id,server_id,room_id\nu1,a,r1\nu2,b,r1\nu1,a,r2\nu3,c,r2\nu1,a,r1\r\n";
  EXPECT_EQ(read_structure(text, Format::membership_csv), fixture_a());
}

TEST(Membership, TwoHomesNamesTheUser) {
  const std::string text = "user_id,server_id,room_id\nu1,a,r1\nu1,b,r2\n";
  try {
    read_structure(text, Format::membership_csv);
    FAIL() << "expected a validation error";
  } catch (const InvalidStructureError& e) {
    ASSERT_EQ(e.report().violations.size(), 1u);
    EXPECT_EQ(e.report().violations[0].ids.front(), EntityId("u1"));
    EXPECT_NE(std::string(e.what()).find("u1"), std::string::npos);
  }
}

TEST(Membership, HeaderMustMatch) {
  EXPECT_THROW(read_structure("user,server,room\nu1,a,r1\n", Format::membership_csv), ParseError);
  EXPECT_THROW(read_structure("", Format::membership_csv), ParseError);
}

TEST(Membership, FieldCountReportsLine) {
  try {
    read_structure("user_id,server_id,room_id\nu1,a,r1\nu2,b\n", Format::membership_csv);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Membership, QuotedFields) {
  const auto s = read_structure("user_id,server_id,room_id\n\"u,1\",\"a\"\"x\",r1\n", Format::membership_csv);
  EXPECT_TRUE(s.users.contains(EntityId("u,1")));
  EXPECT_TRUE(s.servers.contains(EntityId("a\"x")));
}

TEST(Membership, UserWithoutRooms) {
  const auto s = read_structure("user_id,server_id,room_id\nu1,a,\n", Format::membership_csv);
  EXPECT_EQ(s.users.size(), 1u);
  EXPECT_TRUE(s.rooms.empty());
}

TEST(Load, RefusesInvalidStructure) {
  TempDir dir;
  write_file(dir / "bad.json",
             R"({"version":"fedload/1","servers":["a"],"users":[{"id":"u","server":"z"}],"rooms":[]})");
  EXPECT_THROW(load(dir / "bad.json"), InvalidStructureError);
  EXPECT_THROW(load(dir / "missing.json"), IoError);
  EXPECT_THROW(load(dir / "file.txt"), Error);
}

TEST(Save, RefusesInvalidStructure) {
  TempDir dir;
  auto s = fixture_a();
  s.rooms[EntityId("r1")].insert(EntityId("ghost"));
  EXPECT_THROW(save(s, dir / "x.json"), InvalidStructureError);
}

TEST(Csv, EscapeRoundTrip) {
  const std::vector<std::string> fields{"plain", "com,ma", "qu\"ote", "line\nbreak", ""};
  std::ostringstream os;
  csv::write_row(os, fields);
  const auto rows = csv::parse(os.str());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].fields, fields);
}

TEST(GeneratorConfigJson, RoundTrip) {
  GeneratorConfig c;
  c.servers = 5;
  c.users = 20;
  c.rooms = 4;
  c.seed = 99;
  c.fill = FillPolicy::uniform;
  c.users_per_server = DistributionSpec::lognormal(1.5, 0.5);
  c.rooms_per_user = DistributionSpec::empirical({1, 2, 3});
  c.room_size = DistributionSpec::zipf(1.2, 10);
  EXPECT_EQ(generator_config_from_json(to_json(c)), c);
}

TEST(GeneratorConfigJson, Strict) {
  EXPECT_THROW(generator_config_from_json(R"({"version":"fedload-gen/1","servers":1,"users":1,"rooms":1,"bogus":0})"),
               ParseError);
  EXPECT_THROW(generator_config_from_json(R"({"version":"fedload-gen/1","servers":-1,"users":1,"rooms":1})"),
               ParseError);
}

// Round trip through both formats for generated structures. Membership CSV
// cannot carry empty servers or empty rooms, so those are compared after
// removing them.
class RoundTrip : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RoundTrip, Canonical) {
  const auto s = testing::random_structure(GetParam());
  EXPECT_EQ(read_structure(to_canonical_json(s), Format::canonical_json), s);
}

TEST_P(RoundTrip, Membership) {
  auto s = testing::random_structure(GetParam());
  std::erase_if(s.rooms, [](const auto& room) { return room.second.empty(); });
  EXPECT_EQ(read_structure(to_membership_csv(s), Format::membership_csv), s);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RoundTrip, ::testing::Range<std::uint64_t>(100, 140));

TEST(RoundTripLarge, TwoThousandServers) {
  GeneratorConfig c;
  c.servers = 2003;
  c.users = 20000;
  c.rooms = 800;
  c.seed = 3;
  const auto s = generate(c);
  TempDir dir;
  save(s, dir / "big.json");
  EXPECT_EQ(load(dir / "big.json"), s);
  auto populated = s;
  std::erase_if(populated.rooms, [](const auto& room) { return room.second.empty(); });
  save(populated, dir / "big.csv", Format::membership_csv);
  EXPECT_EQ(load(dir / "big.csv"), populated);
}

}  // namespace
}  // namespace fedload
