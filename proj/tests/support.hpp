#pragma once

// Shared fixtures and independent oracles for the unit suites and the
// acceptance runner.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "prism/annotation_store.hpp"
#include "prism/demo.hpp"
#include "prism/exhibition.hpp"
#include "prism/mini_ink.hpp"

namespace prism::testing {

inline std::shared_ptr<const Exhibition> demo_exhibition() {
  static const auto ex = [] {
    auto parsed = parse_exhibition(demo::kExhibitionJson);
    return std::make_shared<const Exhibition>(std::move(*parsed.exhibition));
  }();
  return ex;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, std::string_view contents) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << contents;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("prism-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// random content

inline const std::vector<std::string>& sample_names() {
  static const std::vector<std::string> names{"Ada", "ada lovelace", "Grace", "Alan T.", "Noor", "Kenji",
                                              "  Mira  ", "", "Zoë", "Ólafur", "BRONZE fan"};
  return names;
}

inline const std::vector<std::string>& sample_words() {
  static const std::vector<std::string> words{"bronze", "Marble", "form", "light", "shadow", "Bronze",
                                              "idea",   "é",      "the",  "of",    "striking", "quiet"};
  return words;
}

inline std::string random_body(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 12);
  std::uniform_int_distribution<std::size_t> pick(0, sample_words().size() - 1);
  std::string body;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    if (i) body += ' ';
    body += sample_words()[pick(rng)];
  }
  return body;
}

inline std::optional<std::string> random_name(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, sample_names().size());
  const auto i = pick(rng);
  if (i == sample_names().size()) return std::nullopt;
  return sample_names()[i];
}

inline Target random_target(std::mt19937_64& rng, const Exhibition& ex, bool include_guestbook) {
  std::uniform_int_distribution<std::size_t> pick(0, ex.artworks.size() - (include_guestbook ? 0 : 1));
  const auto i = pick(rng);
  if (i == ex.artworks.size()) return Target::guestbook();
  return Target::artwork(ex.artworks[i].id);
}

/// Posts `n` random comments. Timestamps come from a small range so that
/// equal created_at values are common.
inline void fill_random(AnnotationStore& store, std::mt19937_64& rng, std::size_t n, bool include_guestbook = true) {
  std::uniform_int_distribution<std::int64_t> ts(1'700'000'000'000, 1'700'000'000'040);
  for (std::size_t i = 0; i < n; ++i) {
    const auto name = random_name(rng);
    store.post(random_target(rng, store.exhibition(), include_guestbook),
               name ? std::optional<std::string_view>(*name) : std::nullopt, random_body(rng), ts(rng));
  }
}

// ---------------------------------------------------------------------------
// brute-force oracles

/// Ascending (created_at, seq) by insertion sort into position; independent of
/// the store's std::sort path.
inline std::vector<Comment> oracle_newest_first(std::vector<Comment> in) {
  std::vector<Comment> out;
  for (auto& c : in) {
    auto it = out.begin();
    while (it != out.end() &&
           (it->created_at > c.created_at || (it->created_at == c.created_at && it->seq > c.seq))) {
      ++it;
    }
    out.insert(it, std::move(c));
  }
  return out;
}

inline std::string oracle_lower(std::string s) {
  for (auto& ch : s) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return s;
}

inline bool oracle_filter(const FilterSpec& f, const Comment& c) {
  if (f.author_substring && !f.author_substring->empty() &&
      oracle_lower(c.guest_name).find(oracle_lower(*f.author_substring)) == std::string::npos) {
    return false;
  }
  if (f.keyword && !f.keyword->empty() && oracle_lower(c.body).find(oracle_lower(*f.keyword)) == std::string::npos) {
    return false;
  }
  if (f.since && c.created_at < *f.since) return false;
  if (f.until && c.created_at > *f.until) return false;
  return true;
}

inline std::size_t oracle_code_points(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char ch : s) {
    if ((ch & 0xC0) != 0x80) ++n;
  }
  return n;
}

/// Expected summary built from the identity summary by filtering and ranking
/// with selection sort.
inline std::vector<SummarySection> oracle_summary(const std::vector<SummarySection>& identity, const RankKey& rank,
                                                  const FilterSpec& filter) {
  std::vector<SummarySection> out;
  for (const auto& s : identity) {
    SummarySection t{s.artwork_id, s.artwork_title, 0, {}};
    std::vector<Comment> kept;
    for (const auto& c : s.comments) {
      if (oracle_filter(filter, c)) kept.push_back(c);
    }
    // selection sort: repeatedly take the element that must come first
    auto before = [&](const Comment& a, const Comment& b) {
      switch (rank.comment_rank) {
        case CommentRank::Newest:
          return a.created_at > b.created_at || (a.created_at == b.created_at && a.seq > b.seq);
        case CommentRank::Oldest:
          return a.created_at < b.created_at || (a.created_at == b.created_at && a.seq < b.seq);
        case CommentRank::Longest: {
          const auto la = oracle_code_points(a.body), lb = oracle_code_points(b.body);
          if (la != lb) return la > lb;
          return a.created_at > b.created_at || (a.created_at == b.created_at && a.seq > b.seq);
        }
      }
      return false;
    };
    while (!kept.empty()) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < kept.size(); ++i) {
        if (before(kept[i], kept[best])) best = i;
      }
      t.comments.push_back(kept[best]);
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(best));
    }
    t.comment_count = t.comments.size();
    out.push_back(std::move(t));
  }
  if (rank.artwork_rank == ArtworkRank::MostComments) {
    // insertion keeps equal counts in display order
    std::vector<SummarySection> sorted;
    for (auto& s : out) {
      auto it = sorted.begin();
      while (it != sorted.end() && it->comment_count >= s.comment_count) ++it;
      sorted.insert(it, std::move(s));
    }
    out = std::move(sorted);
  }
  return out;
}

inline bool same_sections(const std::vector<SummarySection>& a, const std::vector<SummarySection>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].artwork_id != b[i].artwork_id || a[i].artwork_title != b[i].artwork_title ||
        a[i].comment_count != b[i].comment_count || a[i].comments != b[i].comments) {
      return false;
    }
  }
  return true;
}

/// Observable state of a store: every comment per target plus the seq counter.
inline bool observably_equal(const AnnotationStore& a, const AnnotationStore& b) {
  if (a.last_seq() != b.last_seq() || a.all() != b.all()) return false;
  if (a.comments_of(Target::guestbook()) != b.comments_of(Target::guestbook())) return false;
  for (const auto& art : a.exhibition().artworks) {
    if (a.comments_of(Target::artwork(art.id)) != b.comments_of(Target::artwork(art.id))) return false;
  }
  return a.save() == b.save();
}

// ---------------------------------------------------------------------------
// random maps and flood-fill oracle

/// Union-find over walkable cells; returns the number of components and a
/// representative per cell (-1 for non-walkable).
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

inline FloorMap random_map(std::mt19937_64& rng, int max_side = 32) {
  std::uniform_int_distribution<int> side(3, max_side);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int w = side(rng), h = side(rng);
  const double wall_p = unit(rng) * 0.6;
  std::vector<CellKind> cells(static_cast<std::size_t>(w * h), CellKind::Wall);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double r = unit(rng);
      cells[static_cast<std::size_t>(y * w + x)] =
          r < wall_p ? CellKind::Wall : (r < wall_p + 0.05 ? CellKind::Fixture : CellKind::Walkable);
    }
  }
  return FloorMap(w, h, std::move(cells));
}

// ---------------------------------------------------------------------------
// Mini-Ink corpus

struct CorpusCase {
  std::string name;
  std::string source;
  std::string choices;
  std::string golden;
};

inline std::vector<CorpusCase> load_corpus(const std::filesystem::path& dir) {
  std::vector<CorpusCase> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".mink") continue;
    auto base = entry.path();
    CorpusCase c;
    c.name = base.stem().string();
    c.source = slurp(base);
    c.choices = slurp(base.replace_extension(".choices"));
    c.golden = slurp(base.replace_extension(".golden"));
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

/// Golden transcript format: the stepper's stdout, then its stderr after a
/// `--- stderr ---` marker when non-empty, then `--- exit N ---`.
inline std::string run_corpus_case(const CorpusCase& c) {
  std::istringstream in(c.choices);
  std::ostringstream out, err;
  const int rc = ink::run_interactive(c.name + ".mink", c.source, in, out, err, true);
  std::string t = out.str();
  if (!err.str().empty()) t += "--- stderr ---\n" + err.str();
  t += "--- exit " + std::to_string(rc) + " ---\n";
  return t;
}

/// Random line soup built from Mini-Ink fragments and arbitrary bytes.
inline std::string random_mink(std::mt19937_64& rng) {
  static const std::vector<std::string> fragments{
      "== ", "==", "=", " knot ", "hub", "END", "-> ", "->", "* ", "+ ", "[", "]", "#", " tag", "//", "-",
      "Hello.", "a", "_x1", "\t", " ", "===", "-> END", "-> hub", "== hub ==", "* [Ask] -> hub", "+ Stay",
      "\xC3\xA9", "\xFF", "\r", "9", "[[", "]]"};
  std::uniform_int_distribution<int> lines(0, 20);
  std::uniform_int_distribution<int> parts(0, 6);
  std::uniform_int_distribution<std::size_t> pick(0, fragments.size() - 1);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> coin(0, 9);
  std::string src;
  const int n = lines(rng);
  for (int i = 0; i < n; ++i) {
    const int k = parts(rng);
    for (int j = 0; j < k; ++j) {
      if (coin(rng) == 0) {
        src += static_cast<char>(byte(rng));
      } else {
        src += fragments[pick(rng)];
      }
    }
    src += '\n';
  }
  return src;
}

/// Parses, validates and, when clean, drives a script with random choices.
/// Returns false only if something other than a documented Error escaped.
inline bool exercise_script(const std::string& src, std::mt19937_64& rng) {
  try {
    auto parsed = ink::parse(src);
    if (!parsed.ok()) return !parsed.errors.empty();
    const auto diags = ink::validate(*parsed.script);
    if (ink::has_errors(diags)) return true;
    auto script = std::make_shared<const ink::Script>(std::move(*parsed.script));
    auto [session, step] = ink::DialogueSession::start(script);
    for (int i = 0; i < 50 && session.status() == ink::Status::AwaitingChoice; ++i) {
      if (step.choices.empty()) return false;
      std::uniform_int_distribution<std::size_t> pick(0, step.choices.size() - 1);
      step = session.choose(pick(rng));
      if ((step.status == ink::Status::AwaitingChoice) == step.choices.empty()) return false;
    }
    return true;
  } catch (const Error& e) {
    return e.code() == Errc::InfiniteLoop;
  } catch (...) {
    return false;
  }
}

}  // namespace prism::testing
