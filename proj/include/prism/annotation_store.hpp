#pragma once

// Audience input: per-artwork comment threads and the guestbook, the three
// annotation surfaces built from them, and the append-only journal.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prism/error.hpp"
#include "prism/exhibition.hpp"

namespace prism {

inline constexpr std::int64_t kMaxGuestNameLength = 80;
inline constexpr std::int64_t kMaxBodyLength = 2000;
inline constexpr std::string_view kAnonymousVisitor = "Anonymous Visitor";

class Target {
 public:
  static Target guestbook() { return Target{}; }
  static Target artwork(std::string artwork_id) { return Target{std::move(artwork_id)}; }

  bool is_guestbook() const { return !artwork_id_.has_value(); }
  const std::string& artwork_id() const { return *artwork_id_; }

  /// Journal encoding: "guestbook" or "artwork:<id>".
  std::string key() const { return is_guestbook() ? "guestbook" : "artwork:" + *artwork_id_; }

  static std::optional<Target> from_key(std::string_view key) {
    if (key == "guestbook") return guestbook();
    constexpr std::string_view prefix = "artwork:";
    if (key.size() > prefix.size() && key.substr(0, prefix.size()) == prefix) {
      return artwork(std::string(key.substr(prefix.size())));
    }
    return std::nullopt;
  }

  friend bool operator==(const Target&, const Target&) = default;

 private:
  Target() = default;
  explicit Target(std::string id) : artwork_id_(std::move(id)) {}
  std::optional<std::string> artwork_id_;
};

struct Comment {
  std::uint64_t seq = 0;
  Target target = Target::guestbook();
  std::string guest_name;
  std::string body;
  std::int64_t created_at = 0;  // ms since epoch

  friend bool operator==(const Comment&, const Comment&) = default;
};

/// Total order on comments: (created_at, seq).
inline bool is_newer(const Comment& a, const Comment& b) {
  if (a.created_at != b.created_at) return a.created_at > b.created_at;
  return a.seq > b.seq;
}

struct FormSection {
  std::vector<std::string> fields{"guest_name", "body"};
  bool initially_collapsed = true;
};

struct VisitorSection {
  std::vector<Comment> comments;  // most recent first
  bool initially_collapsed = true;
};

/// Curator label on top, then the two collapsible sections.
struct AnnotationView {
  std::string artwork_id;
  std::string artwork_title;
  std::string curator_section;
  VisitorSection visitor_section;
  FormSection form_section;
};

struct GuestbookView {
  std::vector<Comment> entries;  // most recent first
  FormSection form_section;
};

enum class CommentRank { Newest, Oldest, Longest };
enum class ArtworkRank { DisplayOrder, MostComments };

struct RankKey {
  CommentRank comment_rank = CommentRank::Newest;
  ArtworkRank artwork_rank = ArtworkRank::DisplayOrder;

  friend bool operator==(const RankKey&, const RankKey&) = default;
};

constexpr std::string_view to_string(CommentRank r) {
  switch (r) {
    case CommentRank::Newest: return "newest";
    case CommentRank::Oldest: return "oldest";
    case CommentRank::Longest: return "longest";
  }
  return "newest";
}

constexpr std::string_view to_string(ArtworkRank r) {
  return r == ArtworkRank::MostComments ? "most_comments" : "display_order";
}

inline std::optional<CommentRank> parse_comment_rank(std::string_view s) {
  if (s == "newest") return CommentRank::Newest;
  if (s == "oldest") return CommentRank::Oldest;
  if (s == "longest") return CommentRank::Longest;
  return std::nullopt;
}

inline std::optional<ArtworkRank> parse_artwork_rank(std::string_view s) {
  if (s == "display_order") return ArtworkRank::DisplayOrder;
  if (s == "most_comments") return ArtworkRank::MostComments;
  return std::nullopt;
}

/// Unset (or empty) members do not filter.
struct FilterSpec {
  std::optional<std::string> author_substring;
  std::optional<std::string> keyword;
  std::optional<std::int64_t> since;
  std::optional<std::int64_t> until;

  bool matches(const Comment& c) const {
    if (author_substring && !author_substring->empty() &&
        !text::contains_ci(c.guest_name, *author_substring)) {
      return false;
    }
    if (keyword && !keyword->empty() && !text::contains_ci(c.body, *keyword)) return false;
    if (since && c.created_at < *since) return false;
    if (until && c.created_at > *until) return false;
    return true;
  }

  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

struct SummarySection {
  std::string artwork_id;
  std::string artwork_title;
  std::size_t comment_count = 0;
  std::vector<Comment> comments;
};

struct SummaryReport {
  std::vector<SummarySection> sections;
  RankKey applied_rank;
  FilterSpec applied_filter;
};

/// Sorts comments in place according to a comment rank.
inline void rank_comments(std::vector<Comment>& comments, CommentRank rank) {
  switch (rank) {
    case CommentRank::Newest:
      std::sort(comments.begin(), comments.end(), is_newer);
      break;
    case CommentRank::Oldest:
      std::sort(comments.begin(), comments.end(),
                [](const Comment& a, const Comment& b) { return is_newer(b, a); });
      break;
    case CommentRank::Longest:
      std::sort(comments.begin(), comments.end(), [](const Comment& a, const Comment& b) {
        const auto la = text::utf8_length(a.body);
        const auto lb = text::utf8_length(b.body);
        if (la != lb) return la > lb;
        return is_newer(a, b);
      });
      break;
  }
}

struct JournalError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct JournalLoad;

class AnnotationStore {
 public:
  using Sink = std::function<void(const Comment&)>;

  explicit AnnotationStore(std::shared_ptr<const Exhibition> exhibition)
      : exhibition_(std::move(exhibition)) {}

  AnnotationStore(const AnnotationStore& other) : exhibition_(other.exhibition_) {
    std::shared_lock lock(other.mutex_);
    comments_ = other.comments_;
    by_target_ = other.by_target_;
  }

  AnnotationStore& operator=(const AnnotationStore&) = delete;

  const Exhibition& exhibition() const { return *exhibition_; }

  /// Installs a callback run inside the append critical section, once per
  /// post, in seq order. Used to mirror posts into a journal file.
  void set_sink(Sink sink) {
    std::unique_lock lock(mutex_);
    sink_ = std::move(sink);
  }

  Comment post(const Target& target, std::optional<std::string_view> guest_name,
               std::string_view body, std::int64_t now) {
    check_target(target);
    Comment c;
    c.target = target;
    c.guest_name = normalize_name(guest_name);
    c.body = normalize_body(body);
    c.created_at = now;

    std::unique_lock lock(mutex_);
    c.seq = comments_.size() + 1;
    if (sink_) sink_(c);
    append_locked(c);
    return c;
  }

  std::vector<Comment> comments_of(const Target& target) const {
    check_target(target);
    std::shared_lock lock(mutex_);
    return comments_of_locked(target.key());
  }

  AnnotationView artwork_view(std::string_view artwork_id) const {
    const Artwork* art = exhibition_->find_artwork(artwork_id);
    if (!art) throw Error(Errc::UnknownTarget, "unknown artwork '" + std::string(artwork_id) + "'");
    AnnotationView view;
    view.artwork_id = art->id;
    view.artwork_title = art->title;
    view.curator_section = art->curator_label;
    std::shared_lock lock(mutex_);
    view.visitor_section.comments = comments_of_locked(Target::artwork(art->id).key());
    return view;
  }

  GuestbookView guestbook_view() const {
    GuestbookView view;
    std::shared_lock lock(mutex_);
    view.entries = comments_of_locked(Target::guestbook().key());
    return view;
  }

  /// Filter per comment, then rank comments within each section, then rank
  /// sections. Guestbook entries never appear here.
  SummaryReport summary(const RankKey& rank, const FilterSpec& filter) const {
    SummaryReport report;
    report.applied_rank = rank;
    report.applied_filter = filter;
    {
      std::shared_lock lock(mutex_);
      for (const auto& art : exhibition_->artworks) {
        SummarySection section;
        section.artwork_id = art.id;
        section.artwork_title = art.title;
        const auto it = by_target_.find(Target::artwork(art.id).key());
        if (it != by_target_.end()) {
          for (const auto idx : it->second) {
            if (filter.matches(comments_[idx])) section.comments.push_back(comments_[idx]);
          }
        }
        report.sections.push_back(std::move(section));
      }
    }
    for (auto& section : report.sections) {
      rank_comments(section.comments, rank.comment_rank);
      section.comment_count = section.comments.size();
    }
    if (rank.artwork_rank == ArtworkRank::MostComments) {
      // stable: ties keep display order
      std::stable_sort(report.sections.begin(), report.sections.end(),
                       [](const SummarySection& a, const SummarySection& b) {
                         return a.comment_count > b.comment_count;
                       });
    }
    return report;
  }

  /// Every comment in seq order.
  std::vector<Comment> all() const {
    std::shared_lock lock(mutex_);
    return comments_;
  }

  std::uint64_t last_seq() const {
    std::shared_lock lock(mutex_);
    return comments_.size();
  }

  std::string save() const;
  static JournalLoad load(std::shared_ptr<const Exhibition> exhibition, std::string_view journal);

 private:
  void check_target(const Target& target) const {
    if (!target.is_guestbook() && !exhibition_->find_artwork(target.artwork_id())) {
      throw Error(Errc::UnknownTarget, "unknown artwork '" + target.artwork_id() + "'");
    }
  }

  static std::string normalize_name(std::optional<std::string_view> name) {
    const auto trimmed = text::trim(name.value_or(""));
    if (trimmed.empty()) return std::string(kAnonymousVisitor);
    const auto len = text::utf8_length(trimmed);
    if (len < 0) throw Error(Errc::InvalidText, "guest name is not valid UTF-8");
    if (len > kMaxGuestNameLength) {
      throw Error(Errc::NameTooLong, "guest name exceeds " + std::to_string(kMaxGuestNameLength) +
                                         " characters");
    }
    return std::string(trimmed);
  }

  static std::string normalize_body(std::string_view body) {
    const auto trimmed = text::trim(body);
    if (trimmed.empty()) throw Error(Errc::EmptyBody, "comment body is empty");
    const auto len = text::utf8_length(trimmed);
    if (len < 0) throw Error(Errc::InvalidText, "comment body is not valid UTF-8");
    if (len > kMaxBodyLength) {
      throw Error(Errc::BodyTooLong, "comment body exceeds " + std::to_string(kMaxBodyLength) +
                                         " characters");
    }
    return std::string(trimmed);
  }

  void append_locked(Comment c) {
    by_target_[c.target.key()].push_back(comments_.size());
    comments_.push_back(std::move(c));
  }

  std::vector<Comment> comments_of_locked(const std::string& key) const {
    std::vector<Comment> out;
    const auto it = by_target_.find(key);
    if (it == by_target_.end()) return out;
    out.reserve(it->second.size());
    for (const auto idx : it->second) out.push_back(comments_[idx]);
    std::sort(out.begin(), out.end(), is_newer);
    return out;
  }

  std::shared_ptr<const Exhibition> exhibition_;
  mutable std::shared_mutex mutex_;
  std::vector<Comment> comments_;  // index i holds seq i+1
  std::map<std::string, std::vector<std::size_t>> by_target_;
  Sink sink_;
};

struct JournalLoad {
  AnnotationStore store;
  std::optional<JournalError> error;
};

// ---------------------------------------------------------------------------
// JSON and journal

inline Json to_json(const Comment& c) {
  return Json{{"seq", c.seq},
              {"target", c.target.key()},
              {"name", c.guest_name},
              {"body", c.body},
              {"at", c.created_at}};
}

inline Json to_json(const std::vector<Comment>& comments) {
  Json arr = Json::array();
  for (const auto& c : comments) arr.push_back(to_json(c));
  return arr;
}

inline Json to_json(const FormSection& f) {
  return Json{{"fields", f.fields}, {"initially_collapsed", f.initially_collapsed}};
}

inline Json to_json(const AnnotationView& v) {
  return Json{{"artwork_id", v.artwork_id},
              {"artwork_title", v.artwork_title},
              {"curator_section", {{"label", v.curator_section}}},
              {"visitor_section",
               {{"comments", to_json(v.visitor_section.comments)},
                {"initially_collapsed", v.visitor_section.initially_collapsed}}},
              {"form_section", to_json(v.form_section)}};
}

inline Json to_json(const GuestbookView& v) {
  return Json{{"entries", to_json(v.entries)}, {"form_section", to_json(v.form_section)}};
}

inline Json to_json(const FilterSpec& f) {
  Json j = Json::object();
  j["author"] = f.author_substring ? Json(*f.author_substring) : Json(nullptr);
  j["keyword"] = f.keyword ? Json(*f.keyword) : Json(nullptr);
  j["since"] = f.since ? Json(*f.since) : Json(nullptr);
  j["until"] = f.until ? Json(*f.until) : Json(nullptr);
  return j;
}

inline Json to_json(const SummaryReport& r) {
  Json sections = Json::array();
  for (const auto& s : r.sections) {
    sections.push_back(Json{{"artwork_id", s.artwork_id},
                            {"artwork_title", s.artwork_title},
                            {"comment_count", s.comment_count},
                            {"comments", to_json(s.comments)}});
  }
  return Json{{"comment_rank", to_string(r.applied_rank.comment_rank)},
              {"artwork_rank", to_string(r.applied_rank.artwork_rank)},
              {"filter", to_json(r.applied_filter)},
              {"sections", std::move(sections)}};
}

inline std::string journal_line(const Comment& c) { return to_json(c).dump(); }

inline std::string AnnotationStore::save() const {
  std::string out;
  for (const auto& c : all()) {
    out += journal_line(c);
    out += '\n';
  }
  return out;
}

/// Replays a journal. Loading stops at the first malformed record; every
/// record before it is kept and the problem is reported with its line number.
inline JournalLoad AnnotationStore::load(std::shared_ptr<const Exhibition> exhibition,
                                         std::string_view journal) {
  JournalLoad result{AnnotationStore(std::move(exhibition)), std::nullopt};
  AnnotationStore& store = result.store;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < journal.size()) {
    const auto nl = journal.find('\n', pos);
    const auto line = journal.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? journal.size() : nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;

    auto fail = [&](const std::string& why) {
      result.error = JournalError{line_no, "line " + std::to_string(line_no) + ": " + why};
    };

    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::parse_error&) {
      fail("malformed record");
      break;
    }
    if (!rec.is_object() || !rec.contains("seq") || !rec["seq"].is_number_unsigned() ||
        !rec.contains("target") || !rec["target"].is_string() || !rec.contains("name") ||
        !rec["name"].is_string() || !rec.contains("body") || !rec["body"].is_string() ||
        !rec.contains("at") || !rec["at"].is_number_integer()) {
      fail("record is missing fields or has wrong types");
      break;
    }
    const auto seq = rec["seq"].get<std::uint64_t>();
    if (seq != store.comments_.size() + 1) {
      fail("expected seq " + std::to_string(store.comments_.size() + 1) + ", found " +
           std::to_string(seq));
      break;
    }
    const auto target = Target::from_key(rec["target"].get<std::string>());
    Comment c;
    try {
      if (!target) throw Error(Errc::UnknownTarget, "bad target");
      store.check_target(*target);
      c.target = *target;
      c.guest_name = normalize_name(rec["name"].get<std::string>());
      c.body = normalize_body(rec["body"].get<std::string>());
    } catch (const Error& e) {
      fail(std::string(e.name()) + ": " + e.what());
      break;
    }
    c.seq = seq;
    c.created_at = rec["at"].get<std::int64_t>();
    store.append_locked(std::move(c));
  }
  return result;
}

// ---------------------------------------------------------------------------
// query parameters shared by the CLI and the HTTP API

struct SummaryQuery {
  RankKey rank;
  FilterSpec filter;
};

/// Keys: comment_rank, artwork_rank, author, keyword, since, until. Empty
/// values count as absent. Throws Error(BadRequest) on bad values.
inline SummaryQuery parse_summary_query(const std::map<std::string, std::string>& params) {
  SummaryQuery q;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = params.find(key);
    if (it == params.end() || it->second.empty()) return std::nullopt;
    return it->second;
  };
  auto parse_time = [](const std::string& key, const std::string& value) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
      throw Error(Errc::BadRequest, key + " must be an integer timestamp in milliseconds");
    }
    return v;
  };
  if (const auto v = get("comment_rank")) {
    const auto r = parse_comment_rank(*v);
    if (!r) throw Error(Errc::BadRequest, "comment_rank must be newest, oldest or longest");
    q.rank.comment_rank = *r;
  }
  if (const auto v = get("artwork_rank")) {
    const auto r = parse_artwork_rank(*v);
    if (!r) throw Error(Errc::BadRequest, "artwork_rank must be display_order or most_comments");
    q.rank.artwork_rank = *r;
  }
  q.filter.author_substring = get("author");
  q.filter.keyword = get("keyword");
  if (const auto v = get("since")) q.filter.since = parse_time("since", *v);
  if (const auto v = get("until")) q.filter.until = parse_time("until", *v);
  return q;
}

}  // namespace prism
