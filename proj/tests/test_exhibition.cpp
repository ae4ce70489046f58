#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "prism/exhibition.hpp"
#include "support.hpp"

using namespace prism;
using prism::testing::demo_exhibition;

namespace {

Json demo_doc() { return Json::parse(demo::kExhibitionJson); }

ExhibitionParseResult parse_doc(const Json& doc) { return parse_exhibition(doc.dump()); }

bool has_error(const ExhibitionParseResult& r, ExhibitionErrorKind kind, std::string_view needle = "") {
  for (const auto& e : r.errors) {
    if (e.kind == kind && (needle.empty() || e.message.find(needle) != std::string::npos ||
                           e.path.find(needle) != std::string::npos)) {
      return true;
    }
  }
  return false;
}

std::vector<std::string> invariants(const Exhibition& ex) {
  std::vector<std::string> out;
  for (const auto& v : validate(ex)) out.push_back(v.invariant);
  return out;
}

FloorMap map_from(const std::vector<std::string>& rows) {
  std::vector<CellKind> cells;
  for (const auto& r : rows) {
    for (char c : r) cells.push_back(c == '#' ? CellKind::Wall : c == 'F' ? CellKind::Fixture : CellKind::Walkable);
  }
  return FloorMap(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()), std::move(cells));
}

}  // namespace

TEST(DemoExhibition, EmbeddedCopyMatchesShippedFile) {
  EXPECT_EQ(prism::testing::slurp(PRISM_DATA_DIR "/exhibition.json"), std::string(demo::kExhibitionJson));
}

TEST(DemoExhibition, ParsesWithElevenSculpturesAndTwoSubSpaces) {
  const auto r = parse_exhibition(demo::kExhibitionJson);
  ASSERT_TRUE(r.ok());
  const auto& ex = *r.exhibition;
  EXPECT_EQ(ex.title, "Forms of Thought - Where the Timeless and the Modern Converge");
  ASSERT_EQ(ex.artworks.size(), 11u);
  for (std::size_t i = 0; i < ex.artworks.size(); ++i) {
    EXPECT_EQ(ex.artworks[i].display_order, i);
    EXPECT_EQ(ex.artworks[i].medium, "sculpture");
  }
  EXPECT_EQ(sub_spaces(ex.floor_map).count, 2);
  EXPECT_TRUE(validate(ex).empty());
  EXPECT_EQ(ex.floor_map.width(), ex.floor_map.height());
}

TEST(DemoExhibition, GuestbookNearEntranceAndLaptopOnFixture) {
  const auto& ex = *demo_exhibition();
  EXPECT_LE(chebyshev(cell_of(ex.entrance), cell_of(ex.guestbook_pos)), kGuestbookMaxDistance);
  EXPECT_EQ(ex.floor_map.kind_at(ex.laptop_pos), CellKind::Fixture);
  EXPECT_EQ(ex.floor_map.kind_at(ex.guestbook_pos), CellKind::Fixture);
  EXPECT_TRUE(walkable_at(ex.floor_map, ex.entrance));
  EXPECT_TRUE(walkable_at(ex.floor_map, ex.guide_spawn));
}

TEST(ParseExhibition, ZeroArtworksIsValid) {
  auto doc = demo_doc();
  doc["artworks"] = Json::array();
  const auto r = parse_doc(doc);
  ASSERT_TRUE(r.ok()) << (r.errors.empty() ? "" : r.errors[0].message);
  EXPECT_TRUE(r.exhibition->artworks.empty());
}

TEST(ParseExhibition, ArtworkOnWalkableCellIsInvalidCellRef) {
  auto doc = demo_doc();
  doc["artworks"][0]["position"] = Json{{"x", 2.5}, {"y", 1.5}};
  const auto r = parse_doc(doc);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, ExhibitionErrorKind::InvalidCellRef, "a1"));
}

TEST(ParseExhibition, DuplicateIdReported) {
  auto doc = demo_doc();
  doc["artworks"][1]["id"] = "a1";
  const auto r = parse_doc(doc);
  EXPECT_TRUE(has_error(r, ExhibitionErrorKind::DuplicateArtworkId));
}

TEST(ParseExhibition, SyntaxErrorCarriesLine) {
  const auto r = parse_exhibition("{\n  \"id\": \"x\",\n  \"title\": oops\n}");
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].kind, ExhibitionErrorKind::SyntaxError);
  EXPECT_EQ(r.errors[0].line, 3u);
}

TEST(ParseExhibition, AccumulatesEveryMissingField) {
  auto doc = demo_doc();
  doc.erase("title");
  doc.erase("laptop");
  doc["artworks"][2].erase("curator_label");
  const auto r = parse_doc(doc);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, ExhibitionErrorKind::MissingField, "title"));
  EXPECT_TRUE(has_error(r, ExhibitionErrorKind::MissingField, "laptop"));
  EXPECT_TRUE(has_error(r, ExhibitionErrorKind::MissingField, "artworks[2].curator_label"));
}

TEST(ParseExhibition, StructuralAndCellErrorsTogether) {
  auto doc = demo_doc();
  doc.erase("title");
  doc["artworks"][0]["position"] = Json{{"x", 2.5}, {"y", 1.5}};
  const auto r = parse_doc(doc);
  EXPECT_TRUE(has_error(r, ExhibitionErrorKind::MissingField, "title"));
  EXPECT_TRUE(has_error(r, ExhibitionErrorKind::InvalidCellRef, "a1"));
}

TEST(ParseExhibition, RaggedMapRejected) {
  auto doc = demo_doc();
  doc["map"][3] = "#....#";
  const auto r = parse_doc(doc);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, ExhibitionErrorKind::InvalidField, "map"));
}

TEST(ParseExhibition, AcceptedDocumentsAlwaysValidate) {
  std::mt19937_64 rng(7);
  auto doc = demo_doc();
  std::uniform_real_distribution<double> coord(-1.0, 17.0);
  int accepted = 0;
  for (int i = 0; i < 300; ++i) {
    auto d = doc;
    // cell centres keep a useful share of documents valid; raw coordinates cover the rejections
    const auto pick = [&] { return i % 2 ? std::floor(coord(rng)) + 0.5 : coord(rng); };
    d["artworks"][static_cast<std::size_t>(i % 11)]["position"] = Json{{"x", pick()}, {"y", pick()}};
    if (i % 3 == 0) d["entrance"] = Json{{"x", pick()}, {"y", pick()}};
    const auto r = parse_doc(d);
    if (r.ok()) {
      ++accepted;
      EXPECT_TRUE(validate(*r.exhibition).empty());
    } else {
      EXPECT_FALSE(r.errors.empty());
    }
  }
  EXPECT_GT(accepted, 0);
}

TEST(Validate, GuestbookFiveCellsAwayIsTooFar) {
  Exhibition ex = *demo_exhibition();
  // demo guestbook sits at (1,14); entrance moved to (6,12): Chebyshev max(5,2) = 5
  ex.entrance = {6.5, 12.5};
  EXPECT_EQ(invariants(ex), std::vector<std::string>{"GuestbookTooFar"});
}

TEST(Validate, WalkablePerimeterCell) {
  Exhibition ex = *demo_exhibition();
  auto rows = ex.floor_map.rows();
  rows[0][5] = '.';
  ex.floor_map = map_from(rows);
  EXPECT_EQ(invariants(ex), std::vector<std::string>{"PerimeterNotWall"});
}

TEST(Validate, EnclosedFixtureUnreachable) {
  const auto map = map_from({"#####", "#F#.#", "#####"});
  Exhibition ex;
  ex.id = "x";
  ex.floor_map = map;
  ex.entrance = ex.guide_spawn = {3.5, 1.5};
  ex.guestbook_pos = ex.laptop_pos = {1.5, 1.5};
  const auto inv = invariants(ex);
  EXPECT_NE(std::find(inv.begin(), inv.end(), "FixtureNotReachable"), inv.end());
  EXPECT_NE(std::find(inv.begin(), inv.end(), "OverlappingFixtures"), inv.end());
}

TEST(Validate, DisplayOrderGap) {
  Exhibition ex = *demo_exhibition();
  ex.artworks.back().display_order = 20;
  EXPECT_EQ(invariants(ex), std::vector<std::string>{"DisplayOrderNotContiguous"});
}

TEST(Walkable, CellAssignmentUsesFloor) {
  const auto& map = demo_exhibition()->floor_map;
  EXPECT_TRUE(walkable_at(map, {1.5, 1.5}));
  EXPECT_TRUE(walkable_at(map, {1.0, 1.0}));
  EXPECT_FALSE(walkable_at(map, {0.999, 1.5}));  // perimeter
  EXPECT_FALSE(walkable_at(map, {8.0, 3.0}));    // division wall starts at x = 8
  EXPECT_TRUE(walkable_at(map, {7.999, 3.0}));
  EXPECT_FALSE(walkable_at(map, {1.5, 2.5}));    // fixture
  EXPECT_FALSE(walkable_at(map, {-0.1, 3.0}));
  EXPECT_FALSE(walkable_at(map, {16.0, 3.0}));
  EXPECT_FALSE(walkable_at(map, {std::nan(""), 3.0}));
  EXPECT_FALSE(walkable_at(map, {1e300, 3.0}));
  EXPECT_FALSE(walkable_at(map, {-std::numeric_limits<double>::infinity(), 3.0}));
}

TEST(SubSpaces, OpenRoomIsOne) {
  const auto s = sub_spaces(map_from({"#####", "#...#", "#...#", "#####"}));
  EXPECT_EQ(s.count, 1);
}

TEST(SubSpaces, DiagonalGapDoesNotConnect) {
  const auto s = sub_spaces(map_from({"####", "#.##", "##.#", "####"}));
  EXPECT_EQ(s.count, 2);
}

TEST(SubSpaces, LabelsFollowSmallestCellOrder) {
  // component containing (1,3) has the lexicographically smallest (x, y) cell
  const auto s = sub_spaces(map_from({"######", "###..#", "######", "#.####", "######"}));
  ASSERT_EQ(s.count, 2);
  EXPECT_EQ(s.label_at({1, 3}), 0);
  EXPECT_EQ(s.label_at({3, 1}), 1);
  EXPECT_EQ(s.label_at({4, 1}), 1);
}

TEST(SubSpaces, MatchesUnionFindOnRandomMaps) {
  std::mt19937_64 rng(2024);
  // the pairwise check is quadratic in cells, so these maps stay small
  for (int iter = 0; iter < 400; ++iter) {
    const FloorMap map = prism::testing::random_map(rng, 12);
    const int w = map.width(), h = map.height();
    prism::testing::UnionFind uf(static_cast<std::size_t>(w * h));
    auto walk = [&](int x, int y) { return map.at({x, y}) == CellKind::Walkable; };
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!walk(x, y)) continue;
        if (x + 1 < w && walk(x + 1, y)) uf.unite(y * w + x, y * w + x + 1);
        if (y + 1 < h && walk(x, y + 1)) uf.unite(y * w + x, (y + 1) * w + x);
      }
    }
    std::set<int> roots;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (walk(x, y)) roots.insert(uf.find(y * w + x));
      }
    }
    const auto s = sub_spaces(map);
    ASSERT_EQ(s.count, static_cast<int>(roots.size()));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int y2 = 0; y2 < h; ++y2) {
          for (int x2 = 0; x2 < w; ++x2) {
            if (!walk(x, y) || !walk(x2, y2)) continue;
            const bool same = uf.find(y * w + x) == uf.find(y2 * w + x2);
            ASSERT_EQ(same, s.label_at({x, y}) == s.label_at({x2, y2}));
          }
        }
        if (!walk(x, y)) {
          ASSERT_EQ(s.label_at({x, y}), -1);
        } else {
          // walkable_at(cell) implies a label
          ASSERT_GE(s.label_at({x, y}), 0);
          ASSERT_TRUE(walkable_at(map, cell_center({x, y})));
        }
      }
    }
  }
}

TEST(SubSpaces, CountMatchesUnionFindOnLargeRandomMaps) {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 300; ++iter) {
    const FloorMap map = prism::testing::random_map(rng, 32);
    const int w = map.width(), h = map.height();
    prism::testing::UnionFind uf(static_cast<std::size_t>(w * h));
    auto walk = [&](int x, int y) { return map.at({x, y}) == CellKind::Walkable; };
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!walk(x, y)) continue;
        if (x + 1 < w && walk(x + 1, y)) uf.unite(y * w + x, y * w + x + 1);
        if (y + 1 < h && walk(x, y + 1)) uf.unite(y * w + x, (y + 1) * w + x);
      }
    }
    std::map<int, int> root_to_label;
    const auto s = sub_spaces(map);
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) {
        if (!walk(x, y)) continue;
        const int root = uf.find(y * w + x);
        // first visit in (x, y) order fixes the expected label
        const auto [it, fresh] = root_to_label.emplace(root, static_cast<int>(root_to_label.size()));
        ASSERT_EQ(s.label_at({x, y}), it->second);
      }
    }
    ASSERT_EQ(s.count, static_cast<int>(root_to_label.size()));
  }
}

TEST(RenderMap, DemoWithVisitorAtEntrance) {
  const auto& ex = *demo_exhibition();
  const std::string expected =
      "################\n"
      "#.......#......#\n"
      "#1......#.....6#\n"
      "#.......#......#\n"
      "#...4...#..9...#\n"
      "#.......#......#\n"
      "#2......#.....7#\n"
      "#.......#......#\n"
      "#.......#......#\n"
      "#...5...#..a...#\n"
      "#3......#.....8#\n"
      "#.......#......#\n"
      "#.......#......#\n"
      "#.......#..b...#\n"
      "#G.@....#.....L#\n"
      "################\n";
  EXPECT_EQ(render_map(ex, ex.entrance), expected);
}

TEST(RenderMap, NoVisitorShowsEntranceAndNoAt) {
  const auto& ex = *demo_exhibition();
  const auto grid = render_map(ex);
  EXPECT_EQ(grid.find('@'), std::string::npos);
  EXPECT_EQ(std::count(grid.begin(), grid.end(), 'E'), 1);
  const std::string glyphs = "123456789ab";
  for (char g : glyphs) EXPECT_EQ(std::count(grid.begin(), grid.end(), g), 1) << g;
  EXPECT_EQ(grid, render_map(ex));  // pure
}

TEST(RenderMap, OutOfBoundsVisitorThrows) {
  const auto& ex = *demo_exhibition();
  try {
    render_map(ex, Position{20.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::VisitorOutOfBounds);
  }
}

TEST(RenderMap, GlyphCountEqualsArtworkCount) {
  auto doc = demo_doc();
  for (std::size_t keep = 0; keep <= 11; ++keep) {
    auto d = doc;
    auto arts = Json::array();
    for (std::size_t i = 0; i < keep; ++i) arts.push_back(doc["artworks"][i]);
    d["artworks"] = arts;
    const auto r = parse_doc(d);
    ASSERT_TRUE(r.ok());
    const auto grid = render_map(*r.exhibition);
    std::size_t glyphs = 0;
    for (char c : grid) {
      if ((c >= '1' && c <= '9') || (c >= 'a' && c <= 'z')) ++glyphs;
    }
    EXPECT_EQ(glyphs, keep);
  }
}

TEST(ExhibitionJson, CarriesMapAndCounts) {
  const auto j = to_json(*demo_exhibition());
  EXPECT_EQ(j["artworks"].size(), 11u);
  EXPECT_EQ(j["sub_spaces"], 2);
  EXPECT_EQ(j["map"].size(), 16u);
  EXPECT_EQ(j["title"], "Forms of Thought - Where the Timeless and the Modern Converge");
}
