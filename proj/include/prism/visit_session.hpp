#pragma once

// A visitor inside the exhibition: teleport locomotion, proximity-gated
// interaction, and the glue between annotations and the guide dialogue.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "prism/annotation_store.hpp"
#include "prism/error.hpp"
#include "prism/exhibition.hpp"
#include "prism/mini_ink.hpp"

namespace prism {

inline constexpr double kDefaultInteractionRadius = 2.5;

// Root menu of the generated guide script.
inline constexpr std::string_view kGuideBackgroundLabel = "Tell me the background story of this exhibition.";
inline constexpr std::string_view kGuideHighlightsLabel = "What are the highlights of this exhibition?";
inline constexpr std::string_view kGuideNavigationLabel = "How do I get around the space?";
inline constexpr std::string_view kGuideMapLabel = "May I have a map of the exhibition?";
inline constexpr std::string_view kGuideGoodbyeLabel = "Goodbye.";
inline constexpr std::string_view kShowMapTag = "action: show_map";
inline constexpr std::size_t kGuideHighlightCount = 3;

namespace detail {

/// Makes arbitrary text safe to embed in a Mini-Ink text line.
inline std::string ink_safe(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '#') continue;
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') continue;
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') continue;
    out += (c == '\n' || c == '\r' || c == '\t') ? ' ' : c;
  }
  return ink::detail::collapse_spaces(out);
}

inline std::string join_titles(const std::vector<std::string>& titles) {
  std::string out;
  for (std::size_t i = 0; i < titles.size(); ++i) {
    if (i > 0) out += (i + 1 == titles.size()) ? " and " : ", ";
    out += titles[i];
  }
  return out;
}

}  // namespace detail

/// Generates the guide's Mini-Ink script for an exhibition. The root menu
/// offers background, highlights, navigation help, a map and goodbye; all
/// but goodbye are sticky and lead back to the menu.
inline std::string build_guide_script(const Exhibition& ex) {
  const std::string title = detail::ink_safe(ex.title);
  const std::size_t n = ex.artworks.size();
  std::string s;
  auto line = [&](std::string_view l) {
    s += l;
    s += '\n';
  };

  line("// Guide dialogue for " + title);
  line("// Generated from the exhibition definition; the guide speaks as its curator.");
  line("Welcome to " + title + ". I am the curator of this exhibition. #speaker: curator");
  line("-> hub");
  line("");
  line("== hub ==");
  line("What would you like to know?");
  line("+ [" + std::string(kGuideBackgroundLabel) + "] -> background");
  line("+ [" + std::string(kGuideHighlightsLabel) + "] -> highlights");
  line("+ [" + std::string(kGuideNavigationLabel) + "] -> navigation");
  line("+ [" + std::string(kGuideMapLabel) + "] -> map");
  line("* [" + std::string(kGuideGoodbyeLabel) + "] Thank you for visiting. Enjoy the rest of the exhibition. -> END");
  line("");

  line("== background ==");
  if (n == 0) {
    line(title + " is still being installed; no works are on display yet.");
  } else {
    bool same_medium = true;
    for (const auto& a : ex.artworks) same_medium = same_medium && a.medium == ex.artworks.front().medium;
    const std::string count = std::to_string(n) + (n == 1 ? " work" : " works");
    if (same_medium) {
      const std::string medium = detail::ink_safe(ex.artworks.front().medium);
      line(title + " brings together " + count + ", " + (n == 1 ? "a single " + medium + "." : "every piece a " + medium + "."));
    } else {
      line(title + " brings together " + count + " in several media.");
    }
  }
  line("I placed pieces from antiquity beside modern ones so that you can compare how each era gives form to an idea.");
  line("Every label is only a starting point. Add your own reading beside each work and sign the guestbook by the entrance.");
  line("-> hub");
  line("");

  line("== highlights ==");
  if (n == 0) {
    line("There are no highlights to show yet, because no artworks are on display.");
  } else {
    std::vector<std::string> titles;
    for (std::size_t i = 0; i < n && i < kGuideHighlightCount; ++i) {
      titles.push_back(detail::ink_safe(ex.artworks[i].title));
    }
    line("Do not miss " + detail::join_titles(titles) + ".");
    for (std::size_t i = 0; i < titles.size(); ++i) {
      line(titles[i] + " is marked " + std::string(1, artwork_glyph(ex.artworks[i].display_order)) +
           " on the map.");
    }
  }
  line("-> hub");
  line("");

  const int spaces = sub_spaces(ex.floor_map).count;
  line("== navigation ==");
  line("To move, pick any open floor tile and you are teleported onto it. Walls and display cases cannot be stood on.");
  if (spaces > 1) {
    line("A division wall splits the gallery into " + std::to_string(spaces) +
         " sub-spaces. You can teleport straight from one to another.");
  } else {
    line("The gallery is a single open space.");
  }
  line("Step close to an artwork to read its label and what earlier visitors wrote. The laptop gathers every comment in one place.");
  line("-> hub");
  line("");

  line("== map ==");
  line("Here is a map of the exhibition. You are marked with @. #" + std::string(kShowMapTag));
  line("-> hub");
  return s;
}

/// Everything a visitor session shares with other sessions.
struct Venue {
  std::shared_ptr<const Exhibition> exhibition;
  std::shared_ptr<AnnotationStore> store;
  std::shared_ptr<const ink::Script> guide_script;
  double interaction_radius = kDefaultInteractionRadius;

  static Venue create(std::shared_ptr<const Exhibition> exhibition, std::shared_ptr<AnnotationStore> store,
                      double radius = kDefaultInteractionRadius) {
    auto parsed = ink::parse(build_guide_script(*exhibition));
    if (!parsed.ok() || ink::has_errors(ink::validate(*parsed.script))) {
      throw std::logic_error("generated guide script does not validate");
    }
    return Venue{std::move(exhibition), std::move(store),
                 std::make_shared<const ink::Script>(std::move(*parsed.script)), radius};
  }
};

struct InteractableRef {
  enum class Kind { Artwork, Guestbook, Laptop, Guide };
  Kind kind = Kind::Guestbook;
  std::string artwork_id;

  static InteractableRef artwork(std::string id) { return {Kind::Artwork, std::move(id)}; }
  static InteractableRef guestbook() { return {Kind::Guestbook, {}}; }
  static InteractableRef laptop() { return {Kind::Laptop, {}}; }
  static InteractableRef guide() { return {Kind::Guide, {}}; }
};

struct Focus {
  enum class Kind { None, ArtworkView, GuestbookView, SummaryView, GuideDialogue };
  Kind kind = Kind::None;
  std::string artwork_id;

  friend bool operator==(const Focus&, const Focus&) = default;
};

constexpr std::string_view to_string(Focus::Kind k) {
  switch (k) {
    case Focus::Kind::None: return "none";
    case Focus::Kind::ArtworkView: return "artwork_view";
    case Focus::Kind::GuestbookView: return "guestbook_view";
    case Focus::Kind::SummaryView: return "summary_view";
    case Focus::Kind::GuideDialogue: return "guide_dialogue";
  }
  return "none";
}

using InteractPayload = std::variant<AnnotationView, GuestbookView, SummaryReport, ink::StepOutput>;

struct FormResult {
  Comment comment;
  std::variant<AnnotationView, GuestbookView> view;
};

struct SideEffect {
  enum class Kind { MapText };
  Kind kind = Kind::MapText;
  std::string text;
};

struct DialogueResult {
  ink::StepOutput step;
  std::vector<SideEffect> side_effects;
};

/// 128-bit random token in hex.
inline std::string generate_session_id() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

inline bool is_show_map_tag(std::string_view tag) {
  std::string compact;
  for (char c : tag) {
    if (c != ' ' && c != '\t') compact += c;
  }
  return compact == "action:show_map";
}

class VisitorSession {
 public:
  static VisitorSession enter(Venue venue, std::optional<std::string_view> guest_name,
                              std::string session_id = generate_session_id()) {
    return VisitorSession(std::move(venue), guest_name, std::move(session_id));
  }

  const std::string& id() const { return id_; }
  const std::string& guest_name() const { return guest_name_; }
  const Position& position() const { return position_; }
  const Focus& focus() const { return focus_; }
  const std::optional<ink::DialogueSession>& dialogue() const { return dialogue_; }
  const Venue& venue() const { return venue_; }

  Position teleport(const Position& target) {
    if (!walkable_at(venue_.exhibition->floor_map, target)) {
      throw Error(Errc::NotWalkable, "cannot teleport to " + detail::describe(target) + ": not walkable floor");
    }
    position_ = target;
    set_focus({});
    return position_;
  }

  /// Chebyshev distance between the centers of the visitor's cell and the
  /// interactable's cell.
  double distance_to(const InteractableRef& ref) const {
    return static_cast<double>(chebyshev(cell_of(position_), cell_of(position_of(ref))));
  }

  InteractPayload interact(const InteractableRef& ref) {
    const double d = distance_to(ref);
    if (d > venue_.interaction_radius) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "interactable is %g m away (radius %g m)", d, venue_.interaction_radius);
      throw Error(Errc::OutOfRange, buf);
    }
    switch (ref.kind) {
      case InteractableRef::Kind::Artwork: {
        auto view = venue_.store->artwork_view(ref.artwork_id);
        set_focus({Focus::Kind::ArtworkView, ref.artwork_id});
        return view;
      }
      case InteractableRef::Kind::Guestbook:
        set_focus({Focus::Kind::GuestbookView, {}});
        return venue_.store->guestbook_view();
      case InteractableRef::Kind::Laptop:
        set_focus({Focus::Kind::SummaryView, {}});
        return venue_.store->summary({}, {});
      case InteractableRef::Kind::Guide: {
        auto [session, step] = ink::DialogueSession::start(venue_.guide_script);
        if (step.status == ink::Status::Ended) {
          set_focus({});
        } else {
          set_focus({Focus::Kind::GuideDialogue, {}});
          dialogue_ = std::move(session);
        }
        return step;
      }
    }
    throw Error(Errc::UnknownInteractable, "unknown interactable");
  }

  /// A blank guest name falls back to the name given on entry.
  FormResult submit_form(std::optional<std::string_view> guest_name, std::string_view body, std::int64_t now) {
    std::optional<Target> target;
    if (focus_.kind == Focus::Kind::ArtworkView) target = Target::artwork(focus_.artwork_id);
    if (focus_.kind == Focus::Kind::GuestbookView) target = Target::guestbook();
    if (!target) throw Error(Errc::WrongFocus, "no comment form is open");

    std::string_view name = guest_name_;
    if (guest_name && !text::trim(*guest_name).empty()) name = *guest_name;
    Comment c = venue_.store->post(*target, name, body, now);
    if (target->is_guestbook()) return {std::move(c), venue_.store->guestbook_view()};
    return {std::move(c), venue_.store->artwork_view(focus_.artwork_id)};
  }

  DialogueResult dialogue_choose(std::size_t display_index) {
    if (focus_.kind != Focus::Kind::GuideDialogue || !dialogue_) {
      throw Error(Errc::WrongFocus, "no guide dialogue is open");
    }
    DialogueResult result;
    try {
      result.step = dialogue_->choose(display_index);
    } catch (const Error& e) {
      if (e.code() == Errc::InfiniteLoop) set_focus({});
      throw;
    }
    for (const auto& line : result.step.lines) {
      for (const auto& tag : line.tags) {
        if (is_show_map_tag(tag)) {
          result.side_effects.push_back({SideEffect::Kind::MapText, render_map(*venue_.exhibition, position_)});
        }
      }
    }
    if (result.step.status == ink::Status::Ended) set_focus({});
    return result;
  }

 private:
  VisitorSession(Venue venue, std::optional<std::string_view> guest_name, std::string id)
      : venue_(std::move(venue)), id_(std::move(id)), position_(venue_.exhibition->entrance) {
    const auto trimmed = text::trim(guest_name.value_or(""));
    guest_name_ = trimmed.empty() ? std::string(kAnonymousVisitor) : std::string(trimmed);
  }

  Position position_of(const InteractableRef& ref) const {
    const Exhibition& ex = *venue_.exhibition;
    switch (ref.kind) {
      case InteractableRef::Kind::Artwork: {
        const Artwork* art = ex.find_artwork(ref.artwork_id);
        if (!art) throw Error(Errc::UnknownInteractable, "unknown artwork '" + ref.artwork_id + "'");
        return art->position;
      }
      case InteractableRef::Kind::Guestbook: return ex.guestbook_pos;
      case InteractableRef::Kind::Laptop: return ex.laptop_pos;
      case InteractableRef::Kind::Guide: return ex.guide_spawn;
    }
    throw Error(Errc::UnknownInteractable, "unknown interactable");
  }

  void set_focus(Focus f) {
    if (f.kind != Focus::Kind::GuideDialogue) dialogue_.reset();
    focus_ = std::move(f);
  }

  Venue venue_;
  std::string id_;
  std::string guest_name_;
  Position position_;
  Focus focus_;
  std::optional<ink::DialogueSession> dialogue_;
};

// ---------------------------------------------------------------------------
// JSON

inline Json to_json(const Focus& f) {
  Json j{{"kind", to_string(f.kind)}};
  if (f.kind == Focus::Kind::ArtworkView) j["artwork_id"] = f.artwork_id;
  return j;
}

inline Json to_json(const InteractPayload& payload) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ink::StepOutput>) {
          return ink::to_json(p);
        } else {
          return to_json(p);
        }
      },
      payload);
}

inline Json to_json(const SideEffect& e) { return Json{{"type", "map"}, {"text", e.text}}; }

inline Json session_json(const VisitorSession& s) {
  return Json{{"session_id", s.id()},
              {"guest_name", s.guest_name()},
              {"position", to_json(s.position())},
              {"focus", to_json(s.focus())}};
}

}  // namespace prism
