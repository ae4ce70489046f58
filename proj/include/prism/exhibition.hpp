#pragma once

// Exhibition space: floor map, artworks, fixed interactables and the
// text map the guide hands out.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prism/error.hpp"

namespace prism {

using Json = nlohmann::ordered_json;

struct Position {
  double x = 0.0;
  double y = 0.0;

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
  friend bool operator==(const Position&, const Position&) = default;
};

/// Integer cell coordinates. A Position belongs to cell (floor(x), floor(y)).
struct Cell {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline constexpr std::pair<int, int> kNeighbours4[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

inline Cell cell_of(const Position& p) {
  // clamp keeps the integer conversion defined for huge coordinates
  auto to_index = [](double v) {
    constexpr double limit = 9.0e15;
    return static_cast<std::int64_t>(std::floor(std::clamp(v, -limit, limit)));
  };
  return {to_index(p.x), to_index(p.y)};
}

inline Position cell_center(const Cell& c) {
  return {static_cast<double>(c.x) + 0.5, static_cast<double>(c.y) + 0.5};
}

inline std::int64_t chebyshev(const Cell& a, const Cell& b) {
  return std::max(std::llabs(a.x - b.x), std::llabs(a.y - b.y));
}

enum class CellKind : std::uint8_t { Walkable, Wall, Fixture };

class FloorMap {
 public:
  FloorMap() = default;
  FloorMap(int width, int height, std::vector<CellKind> cells)
      : width_(width), height_(height), cells_(std::move(cells)) {}

  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(const Cell& c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }

  CellKind at(const Cell& c) const {
    return cells_[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(c.x)];
  }

  std::optional<CellKind> kind_at(const Position& p) const {
    if (!p.finite()) return std::nullopt;
    const Cell c = cell_of(p);
    if (!in_bounds(c)) return std::nullopt;
    return at(c);
  }

  /// Rows using the definition alphabet `# . F`.
  std::vector<std::string> rows() const {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(height_));
    for (int y = 0; y < height_; ++y) {
      std::string row;
      for (int x = 0; x < width_; ++x) {
        switch (at({x, y})) {
          case CellKind::Walkable: row += '.'; break;
          case CellKind::Wall: row += '#'; break;
          case CellKind::Fixture: row += 'F'; break;
        }
      }
      out.push_back(std::move(row));
    }
    return out;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<CellKind> cells_;
};

struct Artwork {
  std::string id;
  std::string title;
  std::string medium = "sculpture";
  std::string curator_label;
  Position position;
  std::size_t display_order = 0;
};

struct Exhibition {
  std::string id;
  std::string title;
  FloorMap floor_map;
  std::vector<Artwork> artworks;  // sorted by display_order
  Position entrance;
  Position guestbook_pos;
  Position laptop_pos;
  Position guide_spawn;

  const Artwork* find_artwork(std::string_view artwork_id) const {
    for (const auto& a : artworks) {
      if (a.id == artwork_id) return &a;
    }
    return nullptr;
  }
};

/// Guestbook must sit within this many cells (Chebyshev) of the entrance.
inline constexpr std::int64_t kGuestbookMaxDistance = 2;
/// Artwork glyphs: 1-9 then a-z.
inline constexpr std::size_t kMaxArtworks = 35;

inline char artwork_glyph(std::size_t display_order) {
  if (display_order < 9) return static_cast<char>('1' + display_order);
  return static_cast<char>('a' + (display_order - 9));
}

// ---------------------------------------------------------------------------
// validate

struct Violation {
  std::string invariant;
  std::string entity;
  std::string message;
};

inline bool is_slug(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_';
  });
}

namespace detail {

inline std::string describe(const Position& p) {
  Json j = {{"x", p.x}, {"y", p.y}};
  return j.dump();
}

inline void check_position(const FloorMap& map, const Position& p, CellKind wanted,
                           const std::string& entity, std::vector<Violation>& out) {
  const auto kind = map.kind_at(p);
  if (!kind || *kind != wanted) {
    const char* want = wanted == CellKind::Walkable ? "Walkable" : "Fixture";
    out.push_back({"InvalidCellRef", entity,
                   entity + " at " + describe(p) + " must be on a " + want + " cell"});
  }
}

}  // namespace detail

inline std::vector<Violation> validate(const Exhibition& ex) {
  std::vector<Violation> out;
  const FloorMap& map = ex.floor_map;

  if (!is_slug(ex.id)) out.push_back({"InvalidSlug", "exhibition", "exhibition id must be a slug"});

  bool any_walkable = false;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const Cell c{x, y};
      const CellKind kind = map.at(c);
      const bool perimeter = x == 0 || y == 0 || x == map.width() - 1 || y == map.height() - 1;
      const std::string entity = "cell(" + std::to_string(x) + "," + std::to_string(y) + ")";
      if (perimeter && kind != CellKind::Wall) {
        out.push_back({"PerimeterNotWall", entity, entity + " is on the perimeter but not a wall"});
      }
      if (kind == CellKind::Walkable) any_walkable = true;
      if (kind == CellKind::Fixture) {
        bool reachable = false;
        for (auto [dx, dy] : kNeighbours4) {
          const Cell n{x + dx, y + dy};
          if (map.in_bounds(n) && map.at(n) == CellKind::Walkable) reachable = true;
        }
        if (!reachable) {
          out.push_back({"FixtureNotReachable", entity,
                         entity + " is a fixture with no 4-adjacent walkable cell"});
        }
      }
    }
  }
  if (!any_walkable) out.push_back({"NoWalkableCell", "map", "map has no walkable cell"});

  if (ex.artworks.size() > kMaxArtworks) {
    out.push_back({"TooManyArtworks", "artworks",
                   "at most " + std::to_string(kMaxArtworks) + " artworks are supported"});
  }

  std::set<std::string> ids;
  std::vector<std::size_t> orders;
  std::set<Cell> fixture_cells;
  auto claim_fixture = [&](const Position& p, const std::string& entity) {
    if (!p.finite()) return;
    if (!fixture_cells.insert(cell_of(p)).second) {
      out.push_back({"OverlappingFixtures", entity,
                     entity + " shares its cell with another interactable"});
    }
  };

  for (const auto& art : ex.artworks) {
    const std::string entity = "artwork '" + art.id + "'";
    if (!is_slug(art.id)) out.push_back({"InvalidSlug", entity, "artwork id must be a slug"});
    if (!ids.insert(art.id).second) {
      out.push_back({"DuplicateArtworkId", entity, "artwork id '" + art.id + "' is not unique"});
    }
    if (text::trim(art.title).empty()) {
      out.push_back({"EmptyArtworkText", entity, "artwork title must be nonempty"});
    }
    if (text::trim(art.curator_label).empty()) {
      out.push_back({"EmptyArtworkText", entity, "curator label must be nonempty"});
    }
    detail::check_position(map, art.position, CellKind::Fixture, entity, out);
    claim_fixture(art.position, entity);
    orders.push_back(art.display_order);
  }
  std::sort(orders.begin(), orders.end());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (orders[i] != i) {
      out.push_back({"DisplayOrderNotContiguous", "artworks",
                     "display_order values must form 0.." + std::to_string(orders.size() - 1)});
      break;
    }
  }

  detail::check_position(map, ex.entrance, CellKind::Walkable, "entrance", out);
  detail::check_position(map, ex.guide_spawn, CellKind::Walkable, "guide_spawn", out);
  detail::check_position(map, ex.guestbook_pos, CellKind::Fixture, "guestbook", out);
  detail::check_position(map, ex.laptop_pos, CellKind::Fixture, "laptop", out);
  claim_fixture(ex.guestbook_pos, "guestbook");
  claim_fixture(ex.laptop_pos, "laptop");

  if (ex.entrance.finite() && ex.guestbook_pos.finite()) {
    const auto d = chebyshev(cell_of(ex.entrance), cell_of(ex.guestbook_pos));
    if (d > kGuestbookMaxDistance) {
      out.push_back({"GuestbookTooFar", "guestbook",
                     "guestbook is " + std::to_string(d) + " cells from the entrance (max " +
                         std::to_string(kGuestbookMaxDistance) + ")"});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// parse_exhibition

enum class ExhibitionErrorKind {
  SyntaxError,
  MissingField,
  InvalidField,
  InvalidCellRef,
  DuplicateArtworkId,
  InvariantViolation,
};

constexpr std::string_view kind_name(ExhibitionErrorKind k) {
  switch (k) {
    case ExhibitionErrorKind::SyntaxError: return "SyntaxError";
    case ExhibitionErrorKind::MissingField: return "MissingField";
    case ExhibitionErrorKind::InvalidField: return "InvalidField";
    case ExhibitionErrorKind::InvalidCellRef: return "InvalidCellRef";
    case ExhibitionErrorKind::DuplicateArtworkId: return "DuplicateArtworkId";
    case ExhibitionErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

struct ExhibitionError {
  ExhibitionErrorKind kind;
  std::string path;  // JSON path or entity name
  std::size_t line = 0;  // 1-based; 0 when not tied to a line
  std::string message;
};

struct ExhibitionParseResult {
  std::optional<Exhibition> exhibition;
  std::vector<ExhibitionError> errors;

  bool ok() const { return exhibition.has_value(); }
};

namespace detail {

class ExhibitionReader {
 public:
  explicit ExhibitionReader(std::vector<ExhibitionError>& errors) : errors_(errors) {}

  const Json* require(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
      errors_.push_back({ExhibitionErrorKind::MissingField, path, 0, "missing field " + path});
      return nullptr;
    }
    return &obj.at(key);
  }

  void invalid(const std::string& path, const std::string& message) {
    errors_.push_back({ExhibitionErrorKind::InvalidField, path, 0, path + ": " + message});
  }

  std::optional<std::string> string_field(const Json& obj, const std::string& key,
                                          const std::string& path) {
    const Json* v = require(obj, key, path);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      invalid(path, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<Position> position_field(const Json& obj, const std::string& key,
                                         const std::string& path) {
    const Json* v = require(obj, key, path);
    if (!v) return std::nullopt;
    if (!v->is_object()) {
      invalid(path, "expected an object {\"x\": number, \"y\": number}");
      return std::nullopt;
    }
    std::optional<double> coords[2];
    const char* names[2] = {"x", "y"};
    for (int i = 0; i < 2; ++i) {
      const std::string sub = path + "." + names[i];
      const Json* c = require(*v, names[i], sub);
      if (!c) continue;
      if (!c->is_number()) {
        invalid(sub, "expected a number");
        continue;
      }
      coords[i] = c->get<double>();
    }
    if (!coords[0] || !coords[1]) return std::nullopt;
    return Position{*coords[0], *coords[1]};
  }

  std::optional<FloorMap> map_field(const Json& root) {
    const Json* v = require(root, "map", "map");
    if (!v) return std::nullopt;
    if (!v->is_array() || v->empty()) {
      invalid("map", "expected a nonempty list of strings");
      return std::nullopt;
    }
    std::vector<CellKind> cells;
    std::size_t width = 0;
    bool ok = true;
    for (std::size_t y = 0; y < v->size(); ++y) {
      const std::string path = "map[" + std::to_string(y) + "]";
      const Json& row = (*v)[y];
      if (!row.is_string()) {
        invalid(path, "expected a string");
        ok = false;
        continue;
      }
      const auto s = row.get<std::string>();
      if (y == 0) width = s.size();
      if (s.empty() || s.size() != width) {
        invalid(path, "rows must be nonempty and of equal length");
        ok = false;
        continue;
      }
      for (std::size_t x = 0; x < s.size(); ++x) {
        switch (s[x]) {
          case '#': cells.push_back(CellKind::Wall); break;
          case '.': cells.push_back(CellKind::Walkable); break;
          case 'F': cells.push_back(CellKind::Fixture); break;
          default:
            invalid(path, "unknown glyph '" + std::string(1, s[x]) + "' at column " +
                              std::to_string(x));
            ok = false;
        }
      }
    }
    if (!ok) return std::nullopt;
    return FloorMap(static_cast<int>(width), static_cast<int>(v->size()), std::move(cells));
  }

 private:
  std::vector<ExhibitionError>& errors_;
};

inline std::size_t line_of_offset(std::string_view doc, std::size_t offset) {
  offset = std::min(offset, doc.size());
  return 1 + static_cast<std::size_t>(std::count(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace detail

/// Parses and fully validates an exhibition definition document. On failure
/// every detected problem is reported, not just the first.
inline ExhibitionParseResult parse_exhibition(std::string_view document) {
  ExhibitionParseResult result;
  auto& errors = result.errors;

  Json root;
  try {
    root = Json::parse(document);
  } catch (const Json::parse_error& e) {
    // byte is 1-based and points just past the offending character
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    errors.push_back({ExhibitionErrorKind::SyntaxError, "", detail::line_of_offset(document, offset),
                      e.what()});
    return result;
  }
  if (!root.is_object()) {
    errors.push_back({ExhibitionErrorKind::SyntaxError, "", 1, "top level must be a JSON object"});
    return result;
  }

  detail::ExhibitionReader rd(errors);
  Exhibition ex;
  const auto id = rd.string_field(root, "id", "id");
  const auto title = rd.string_field(root, "title", "title");
  const auto map = rd.map_field(root);
  const auto entrance = rd.position_field(root, "entrance", "entrance");
  const auto guestbook = rd.position_field(root, "guestbook", "guestbook");
  const auto laptop = rd.position_field(root, "laptop", "laptop");
  const auto guide = rd.position_field(root, "guide_spawn", "guide_spawn");

  bool artworks_ok = true;
  if (const Json* arts = rd.require(root, "artworks", "artworks")) {
    if (!arts->is_array()) {
      rd.invalid("artworks", "expected a list");
      artworks_ok = false;
    } else {
      for (std::size_t i = 0; i < arts->size(); ++i) {
        const std::string base = "artworks[" + std::to_string(i) + "]";
        const Json& a = (*arts)[i];
        if (!a.is_object()) {
          rd.invalid(base, "expected an object");
          artworks_ok = false;
          continue;
        }
        Artwork art;
        auto aid = rd.string_field(a, "id", base + ".id");
        auto atitle = rd.string_field(a, "title", base + ".title");
        auto label = rd.string_field(a, "curator_label", base + ".curator_label");
        auto pos = rd.position_field(a, "position", base + ".position");
        if (a.contains("medium")) {
          if (a["medium"].is_string()) {
            art.medium = a["medium"].get<std::string>();
          } else {
            rd.invalid(base + ".medium", "expected a string");
            artworks_ok = false;
          }
        }
        art.display_order = i;
        if (a.contains("display_order")) {
          if (a["display_order"].is_number_unsigned()) {
            art.display_order = a["display_order"].get<std::size_t>();
          } else {
            rd.invalid(base + ".display_order", "expected a non-negative integer");
            artworks_ok = false;
          }
        }
        if (!aid || !atitle || !label || !pos) {
          artworks_ok = false;
          continue;
        }
        art.id = *aid;
        art.title = *atitle;
        art.curator_label = *label;
        art.position = *pos;
        ex.artworks.push_back(std::move(art));
      }
    }
  } else {
    artworks_ok = false;
  }

  if (!id || !title || !map || !entrance || !guestbook || !laptop || !guide || !artworks_ok) {
    // Still report cell-level problems for whatever parsed when the map is usable.
    if (map) {
      std::vector<Violation> partial;
      for (const auto& art : ex.artworks) {
        detail::check_position(*map, art.position, CellKind::Fixture, "artwork '" + art.id + "'",
                               partial);
      }
      if (entrance) detail::check_position(*map, *entrance, CellKind::Walkable, "entrance", partial);
      if (guestbook) detail::check_position(*map, *guestbook, CellKind::Fixture, "guestbook", partial);
      if (laptop) detail::check_position(*map, *laptop, CellKind::Fixture, "laptop", partial);
      if (guide) detail::check_position(*map, *guide, CellKind::Walkable, "guide_spawn", partial);
      for (auto& v : partial) {
        errors.push_back({ExhibitionErrorKind::InvalidCellRef, v.entity, 0, v.message});
      }
    }
    return result;
  }

  ex.id = *id;
  ex.title = *title;
  ex.floor_map = *map;
  ex.entrance = *entrance;
  ex.guestbook_pos = *guestbook;
  ex.laptop_pos = *laptop;
  ex.guide_spawn = *guide;
  std::stable_sort(ex.artworks.begin(), ex.artworks.end(),
                   [](const Artwork& a, const Artwork& b) { return a.display_order < b.display_order; });

  for (auto& v : validate(ex)) {
    ExhibitionErrorKind kind = ExhibitionErrorKind::InvariantViolation;
    if (v.invariant == "InvalidCellRef") kind = ExhibitionErrorKind::InvalidCellRef;
    if (v.invariant == "DuplicateArtworkId") kind = ExhibitionErrorKind::DuplicateArtworkId;
    errors.push_back({kind, v.entity, 0, v.invariant + ": " + v.message});
  }
  if (errors.empty()) result.exhibition = std::move(ex);
  return result;
}

// ---------------------------------------------------------------------------
// geometry queries

inline bool walkable_at(const FloorMap& map, const Position& p) {
  const auto kind = map.kind_at(p);
  return kind && *kind == CellKind::Walkable;
}

/// Connected components of walkable cells under 4-connectivity.
struct SubSpaces {
  int width = 0;
  int height = 0;
  int count = 0;
  std::vector<int> labels;  // row-major; -1 for non-walkable cells

  int label_at(const Cell& c) const {
    return labels[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(c.x)];
  }
};

/// Labels are assigned in lexicographic (x, y) order of each component's
/// smallest cell, so the labelling is deterministic.
inline SubSpaces sub_spaces(const FloorMap& map) {
  SubSpaces out;
  out.width = map.width();
  out.height = map.height();
  out.labels.assign(static_cast<std::size_t>(map.width()) * static_cast<std::size_t>(map.height()), -1);
  auto idx = [&](const Cell& c) {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(map.width()) +
           static_cast<std::size_t>(c.x);
  };

  std::deque<Cell> queue;
  for (int x = 0; x < map.width(); ++x) {
    for (int y = 0; y < map.height(); ++y) {
      const Cell seed{x, y};
      if (map.at(seed) != CellKind::Walkable || out.labels[idx(seed)] != -1) continue;
      const int label = out.count++;
      out.labels[idx(seed)] = label;
      queue.push_back(seed);
      while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (auto [dx, dy] : kNeighbours4) {
          const Cell n{c.x + dx, c.y + dy};
          if (!map.in_bounds(n) || map.at(n) != CellKind::Walkable || out.labels[idx(n)] != -1) {
            continue;
          }
          out.labels[idx(n)] = label;
          queue.push_back(n);
        }
      }
    }
  }
  return out;
}

/// Text map: `#` wall, `.` floor, `F` bare fixture, artwork glyphs in display
/// order, `G` guestbook, `L` laptop, `E` entrance, `@` visitor (drawn last).
inline std::string render_map(const Exhibition& ex, std::optional<Position> visitor = std::nullopt) {
  const FloorMap& map = ex.floor_map;
  if (visitor && !map.kind_at(*visitor)) {
    throw Error(Errc::VisitorOutOfBounds, "visitor position " + detail::describe(*visitor) +
                                              " is outside the floor map");
  }
  std::vector<std::string> grid = map.rows();
  auto put = [&](const Position& p, char glyph) {
    if (!map.kind_at(p)) return;
    const Cell c = cell_of(p);
    grid[static_cast<std::size_t>(c.y)][static_cast<std::size_t>(c.x)] = glyph;
  };
  for (const auto& art : ex.artworks) put(art.position, artwork_glyph(art.display_order));
  put(ex.guestbook_pos, 'G');
  put(ex.laptop_pos, 'L');
  put(ex.entrance, 'E');
  if (visitor) put(*visitor, '@');

  std::string out;
  for (const auto& row : grid) {
    out += row;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline Json to_json(const Position& p) { return Json{{"x", p.x}, {"y", p.y}}; }

inline Json to_json(const Artwork& a) {
  return Json{{"id", a.id},
              {"title", a.title},
              {"medium", a.medium},
              {"curator_label", a.curator_label},
              {"position", to_json(a.position)},
              {"display_order", a.display_order}};
}

inline Json to_json(const Exhibition& ex) {
  Json arts = Json::array();
  for (const auto& a : ex.artworks) arts.push_back(to_json(a));
  return Json{{"id", ex.id},
              {"title", ex.title},
              {"width", ex.floor_map.width()},
              {"height", ex.floor_map.height()},
              {"map", ex.floor_map.rows()},
              {"artworks", std::move(arts)},
              {"entrance", to_json(ex.entrance)},
              {"guestbook", to_json(ex.guestbook_pos)},
              {"laptop", to_json(ex.laptop_pos)},
              {"guide_spawn", to_json(ex.guide_spawn)},
              {"sub_spaces", sub_spaces(ex.floor_map).count}};
}

}  // namespace prism
