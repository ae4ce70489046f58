#pragma once

// Mini-Ink: a small subset of the ink narrative scripting language.
//
//   == knot_name ==        knot header (two or more '=')
//   Some text. #tag        text line, optional tags
//   * [Menu] Spoken -> k   once-only choice
//   + Label -> k           sticky choice
//   -> knot / -> END       divert
//   // comment
//
// See docs/mini-ink-grammar.ebnf for the full grammar.

#include <cstddef>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "prism/error.hpp"

namespace prism::ink {

inline constexpr std::string_view kEnd = "END";
/// Statements executed between two pauses before a run is declared looping.
inline constexpr std::size_t kMaxStepsWithoutPause = 10000;

struct TextStmt {
  std::string line;
  std::vector<std::string> tags;
};

struct ChoiceStmt {
  bool sticky = false;
  std::optional<std::string> menu_label;  // bracketed part, if any
  std::string label;                      // what the menu shows
  std::string spoken_text;                // what is said once chosen; may be empty
  std::vector<std::string> tags;
  std::optional<std::string> divert;
  std::size_t choice_id = 0;
};

struct DivertStmt {
  std::string target;
};

struct Stmt {
  std::variant<TextStmt, ChoiceStmt, DivertStmt> node;
  std::size_t line = 0;

  const ChoiceStmt* choice() const { return std::get_if<ChoiceStmt>(&node); }
};

struct Knot {
  std::string name;
  std::size_t line = 0;
  std::vector<Stmt> body;
};

struct Script {
  std::vector<Stmt> start_block;
  std::vector<Knot> knots;  // source order, duplicates kept for validation
  std::size_t choice_count = 0;

  /// First knot with this name.
  std::optional<std::size_t> knot_index(std::string_view name) const {
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (knots[i].name == name) return i;
    }
    return std::nullopt;
  }

  const std::vector<Stmt>& block(std::optional<std::size_t> knot) const {
    return knot ? knots[*knot].body : start_block;
  }
};

// ---------------------------------------------------------------------------
// parse

enum class ParseErrorKind {
  BadKnotHeader,
  DanglingDivertSyntax,
  BadChoice,
  UnsupportedSyntax,
  EmptyScript,
};

constexpr std::string_view kind_name(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::BadKnotHeader: return "BadKnotHeader";
    case ParseErrorKind::DanglingDivertSyntax: return "DanglingDivertSyntax";
    case ParseErrorKind::BadChoice: return "BadChoice";
    case ParseErrorKind::UnsupportedSyntax: return "UnsupportedSyntax";
    case ParseErrorKind::EmptyScript: return "EmptyScript";
  }
  return "Unknown";
}

struct ParseError {
  ParseErrorKind kind;
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::optional<Script> script;
  std::vector<ParseError> errors;

  bool ok() const { return script.has_value(); }
};

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s[0])) return false;
  for (char c : s.substr(1)) {
    if (!alpha(c) && !digit(c)) return false;
  }
  return true;
}

namespace detail {

inline std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : text::trim(s)) {
    if (c == ' ' || c == '\t') {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

/// Splits "content #a #b" into content and {"a", "b"}.
inline std::pair<std::string_view, std::vector<std::string>> split_tags(std::string_view s) {
  std::vector<std::string> tags;
  const auto hash = s.find('#');
  if (hash == std::string_view::npos) return {s, tags};
  std::string_view rest = s.substr(hash + 1);
  while (true) {
    const auto next = rest.find('#');
    const auto tag = text::trim(rest.substr(0, next));
    if (!tag.empty()) tags.emplace_back(tag);
    if (next == std::string_view::npos) break;
    rest = rest.substr(next + 1);
  }
  return {s.substr(0, hash), tags};
}

class Parser {
 public:
  ParseResult run(std::string_view source) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
      const auto nl = source.find('\n', pos);
      std::string_view raw = source.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++line_no;
      parse_line(raw, line_no);
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }

    std::size_t statements = script_.start_block.size();
    for (const auto& k : script_.knots) statements += k.body.size();
    if (statements == 0) {
      errors_.push_back({ParseErrorKind::EmptyScript, 0, "script contains no statements"});
    }

    ParseResult result;
    result.errors = std::move(errors_);
    if (result.errors.empty()) {
      script_.choice_count = next_choice_id_;
      result.script = std::move(script_);
    }
    return result;
  }

 private:
  std::vector<Stmt>& current_block() {
    return script_.knots.empty() ? script_.start_block : script_.knots.back().body;
  }

  void error(ParseErrorKind kind, std::size_t line, std::string message) {
    errors_.push_back({kind, line, std::move(message)});
  }

  std::optional<std::string> divert_target(std::string_view after_arrow, std::size_t line) {
    const auto target = text::trim(after_arrow);
    if (!is_identifier(target)) {
      error(ParseErrorKind::DanglingDivertSyntax, line,
            target.empty() ? "divert '->' has no target"
                           : "divert target '" + std::string(target) + "' is not a valid name");
      return std::nullopt;
    }
    return std::string(target);
  }

  void parse_line(std::string_view raw, std::size_t line) {
    if (const auto comment = raw.find("//"); comment != std::string_view::npos) {
      raw = raw.substr(0, comment);
    }
    const std::string_view s = text::trim(raw);
    if (s.empty()) return;

    if (s[0] == '=') {
      parse_knot_header(s, line);
    } else if (s[0] == '*' || s[0] == '+') {
      parse_choice(s, line);
    } else if (s.substr(0, 2) == "->") {
      const auto [body, tags] = split_tags(s.substr(2));
      if (auto target = divert_target(body, line)) {
        current_block().push_back({DivertStmt{*target}, line});
      }
    } else if (s[0] == '-' && (s.size() == 1 || s[1] == ' ' || s[1] == '\t')) {
      error(ParseErrorKind::UnsupportedSyntax, line, "gathers ('-') are not supported");
    } else {
      parse_text(s, line);
    }
  }

  void parse_knot_header(std::string_view s, std::size_t line) {
    std::size_t i = 0;
    while (i < s.size() && s[i] == '=') ++i;
    if (i < 2) {
      error(ParseErrorKind::BadKnotHeader, line, "knot headers start with '=='; stitches are not supported");
      return;
    }
    std::string_view rest = s.substr(i);
    while (!rest.empty() && rest.back() == '=') rest.remove_suffix(1);
    const auto name = text::trim(rest);
    if (!is_identifier(name)) {
      error(ParseErrorKind::BadKnotHeader, line,
            "knot name '" + std::string(name) + "' must match [A-Za-z_][A-Za-z0-9_]*");
      return;
    }
    if (name == kEnd) {
      error(ParseErrorKind::BadKnotHeader, line, "END is reserved and cannot name a knot");
      return;
    }
    pending_tags_.clear();
    pending_block_ = nullptr;
    script_.knots.push_back({std::string(name), line, {}});
  }

  void parse_choice(std::string_view s, std::size_t line) {
    ChoiceStmt choice;
    choice.sticky = s[0] == '+';
    std::string_view rest = text::trim(s.substr(1));
    if (!rest.empty() && (rest[0] == '*' || rest[0] == '+')) {
      error(ParseErrorKind::UnsupportedSyntax, line, "nested choices are not supported");
      return;
    }
    auto [content, tags] = split_tags(rest);
    choice.tags = std::move(tags);
    if (const auto arrow = content.find("->"); arrow != std::string_view::npos) {
      auto target = divert_target(content.substr(arrow + 2), line);
      if (!target) return;
      choice.divert = std::move(target);
      content = content.substr(0, arrow);
    }

    const auto open = content.find('[');
    if (open == std::string_view::npos) {
      if (content.find(']') != std::string_view::npos) {
        error(ParseErrorKind::BadChoice, line, "unmatched ']' in choice");
        return;
      }
      choice.label = collapse_spaces(content);
      choice.spoken_text = choice.label;
    } else {
      const auto close = content.find(']', open);
      if (close == std::string_view::npos) {
        error(ParseErrorKind::BadChoice, line, "unclosed '[' in choice");
        return;
      }
      const auto before = content.substr(0, open);
      const auto inside = content.substr(open + 1, close - open - 1);
      const auto after = content.substr(close + 1);
      if (inside.find('[') != std::string_view::npos || after.find_first_of("[]") != std::string_view::npos) {
        error(ParseErrorKind::BadChoice, line, "a choice may contain one bracketed label");
        return;
      }
      choice.menu_label = collapse_spaces(inside);
      choice.label = collapse_spaces(std::string(before) + std::string(inside));
      choice.spoken_text = collapse_spaces(std::string(before) + std::string(after));
    }
    if (choice.label.empty()) {
      error(ParseErrorKind::BadChoice, line, "choice has no label");
      return;
    }
    choice.choice_id = next_choice_id_++;
    current_block().push_back({std::move(choice), line});
  }

  void parse_text(std::string_view s, std::size_t line) {
    auto [content, tags] = split_tags(s);
    std::optional<std::string> divert;
    if (const auto arrow = content.find("->"); arrow != std::string_view::npos) {
      divert = divert_target(content.substr(arrow + 2), line);
      if (!divert) return;
      content = content.substr(0, arrow);
    }
    const auto body = text::trim(content);
    if (body.empty() && !divert) {
      // tag-only line: tags attach to the next text line of this block
      pending_tags_.insert(pending_tags_.end(), tags.begin(), tags.end());
      pending_block_ = &current_block();
    } else if (!body.empty()) {
      TextStmt t{std::string(body), {}};
      if (pending_block_ == &current_block()) t.tags = std::move(pending_tags_);
      pending_tags_.clear();
      pending_block_ = nullptr;
      t.tags.insert(t.tags.end(), tags.begin(), tags.end());
      current_block().push_back({std::move(t), line});
    }
    if (divert) current_block().push_back({DivertStmt{*divert}, line});
  }

  Script script_;
  std::vector<ParseError> errors_;
  std::size_t next_choice_id_ = 0;
  std::vector<std::string> pending_tags_;
  const std::vector<Stmt>* pending_block_ = nullptr;
};

}  // namespace detail

/// Never throws on arbitrary input; returns a Script or every parse error.
inline ParseResult parse(std::string_view source) { return detail::Parser{}.run(source); }

// ---------------------------------------------------------------------------
// validate

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;  // UnknownDivertTarget, DuplicateKnot, UnreachableKnot, KnotFallsOffEnd
  std::size_t line = 0;
  std::string message;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::Error) return true;
  }
  return false;
}

namespace detail {

template <typename Fn>
void for_each_divert(const std::vector<Stmt>& block, Fn&& fn) {
  for (const auto& stmt : block) {
    if (const auto* d = std::get_if<DivertStmt>(&stmt.node)) fn(d->target, stmt.line);
    if (const auto* c = stmt.choice(); c && c->divert) fn(*c->divert, stmt.line);
  }
}

}  // namespace detail

inline std::vector<Diagnostic> validate(const Script& script) {
  std::vector<Diagnostic> out;

  std::set<std::string> seen;
  for (const auto& k : script.knots) {
    if (!seen.insert(k.name).second) {
      out.push_back({Severity::Error, "DuplicateKnot", k.line, "knot '" + k.name + "' is declared more than once"});
    }
  }

  auto check_targets = [&](const std::vector<Stmt>& block) {
    detail::for_each_divert(block, [&](const std::string& target, std::size_t line) {
      if (target != kEnd && !script.knot_index(target)) {
        out.push_back({Severity::Error, "UnknownDivertTarget", line, "divert to unknown knot '" + target + "'"});
      }
    });
  };
  check_targets(script.start_block);
  for (const auto& k : script.knots) check_targets(k.body);

  // reachability over divert edges from the start block
  std::vector<bool> reached(script.knots.size(), false);
  std::queue<std::optional<std::size_t>> pending;
  pending.push(std::nullopt);
  while (!pending.empty()) {
    const auto block = pending.front();
    pending.pop();
    detail::for_each_divert(script.block(block), [&](const std::string& target, std::size_t) {
      const auto idx = script.knot_index(target);
      if (idx && !reached[*idx]) {
        reached[*idx] = true;
        pending.push(idx);
      }
    });
  }
  for (std::size_t i = 0; i < script.knots.size(); ++i) {
    const auto& k = script.knots[i];
    if (script.knot_index(k.name) != i) continue;  // duplicate, already an error
    if (!reached[i]) {
      out.push_back({Severity::Warning, "UnreachableKnot", k.line, "knot '" + k.name + "' is never diverted to"});
    }
  }

  auto falls_off = [](const std::vector<Stmt>& block) {
    return block.empty() || std::holds_alternative<TextStmt>(block.back().node);
  };
  if (falls_off(script.start_block)) {
    const std::size_t line = script.start_block.empty() ? 1 : script.start_block.back().line;
    out.push_back({Severity::Warning, "KnotFallsOffEnd", line,
                   "start block has no closing divert or choice; the dialogue ends here"});
  }
  for (const auto& k : script.knots) {
    if (falls_off(k.body)) {
      const std::size_t line = k.body.empty() ? k.line : k.body.back().line;
      out.push_back({Severity::Warning, "KnotFallsOffEnd", line,
                     "knot '" + k.name + "' has no closing divert or choice; the dialogue ends here"});
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
  return out;
}

// ---------------------------------------------------------------------------
// runtime

enum class Status { Running, AwaitingChoice, Ended };

constexpr std::string_view to_string(Status s) {
  switch (s) {
    case Status::Running: return "running";
    case Status::AwaitingChoice: return "awaiting_choice";
    case Status::Ended: return "ended";
  }
  return "ended";
}

struct Line {
  std::string text;
  std::vector<std::string> tags;

  friend bool operator==(const Line&, const Line&) = default;
};

struct ChoiceOption {
  std::size_t display_index = 0;
  std::string label;

  friend bool operator==(const ChoiceOption&, const ChoiceOption&) = default;
};

struct StepOutput {
  std::vector<Line> lines;
  std::vector<ChoiceOption> choices;
  Status status = Status::Running;

  friend bool operator==(const StepOutput&, const StepOutput&) = default;
};

struct Event {
  enum class Kind { LineEmitted, ChoiceTaken, Ended };
  Kind kind = Kind::LineEmitted;
  std::string text;  // line text or choice label
  std::vector<std::string> tags;
  std::size_t display_index = 0;
  std::size_t choice_id = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// One visitor's walk through a script. Single owner; not thread-safe.
class DialogueSession {
 public:
  static std::pair<DialogueSession, StepOutput> start(std::shared_ptr<const Script> script) {
    DialogueSession session(std::move(script));
    StepOutput out = session.resume();
    return {std::move(session), std::move(out)};
  }

  StepOutput choose(std::size_t display_index) {
    if (status_ != Status::AwaitingChoice) {
      throw Error(Errc::NotAwaitingChoice, "the dialogue is not waiting for a choice");
    }
    if (display_index >= offered_.size()) {
      throw Error(Errc::InvalidChoiceIndex, "choice index " + std::to_string(display_index) +
                                                " is out of range (" + std::to_string(offered_.size()) +
                                                " offered)");
    }
    const auto& block = script_->block(cursor_.knot);
    const ChoiceStmt& choice = *block[offered_[display_index]].choice();

    transcript_.push_back({Event::Kind::ChoiceTaken, choice.label, {}, display_index, choice.choice_id});
    if (!choice.sticky) consumed_.insert(choice.choice_id);

    StepOutput out;
    if (!choice.spoken_text.empty()) emit(out, choice.spoken_text, choice.tags);
    if (choice.divert) {
      if (!jump(*choice.divert)) return finish(std::move(out));
    } else {
      cursor_.index = group_end_;
    }
    offered_.clear();
    status_ = Status::Running;
    return resume(std::move(out));
  }

  Status status() const { return status_; }
  const std::vector<Event>& transcript() const { return transcript_; }
  const std::set<std::size_t>& consumed() const { return consumed_; }
  const Script& script() const { return *script_; }

 private:
  struct Cursor {
    std::optional<std::size_t> knot;  // nullopt = start block
    std::size_t index = 0;
  };

  explicit DialogueSession(std::shared_ptr<const Script> script) : script_(std::move(script)) {}

  void emit(StepOutput& out, const std::string& text, const std::vector<std::string>& tags) {
    out.lines.push_back({text, tags});
    transcript_.push_back({Event::Kind::LineEmitted, text, tags, 0, 0});
  }

  StepOutput finish(StepOutput out) {
    status_ = Status::Ended;
    out.status = Status::Ended;
    out.choices.clear();
    offered_.clear();
    transcript_.push_back({Event::Kind::Ended, {}, {}, 0, 0});
    return out;
  }

  /// Returns false when the target is END.
  bool jump(const std::string& target) {
    if (target == kEnd) return false;
    const auto idx = script_->knot_index(target);
    if (!idx) {
      // validated scripts never get here; treat like END
      return false;
    }
    cursor_ = {idx, 0};
    return true;
  }

  StepOutput resume(StepOutput out = {}) {
    std::size_t steps = 0;
    while (true) {
      if (++steps > kMaxStepsWithoutPause) {
        status_ = Status::Ended;
        offered_.clear();
        throw Error(Errc::InfiniteLoop, "no pause after " + std::to_string(kMaxStepsWithoutPause) +
                                            " statements; the script loops forever");
      }
      const auto& block = script_->block(cursor_.knot);
      if (cursor_.index >= block.size()) return finish(std::move(out));
      const Stmt& stmt = block[cursor_.index];

      if (const auto* t = std::get_if<TextStmt>(&stmt.node)) {
        emit(out, t->line, t->tags);
        ++cursor_.index;
      } else if (const auto* d = std::get_if<DivertStmt>(&stmt.node)) {
        if (!jump(d->target)) return finish(std::move(out));
      } else {
        std::size_t end = cursor_.index;
        while (end < block.size() && block[end].choice()) ++end;
        offered_.clear();
        for (std::size_t i = cursor_.index; i < end; ++i) {
          const ChoiceStmt& c = *block[i].choice();
          if (c.sticky || !consumed_.count(c.choice_id)) offered_.push_back(i);
        }
        group_end_ = end;
        if (offered_.empty()) {
          // every option used up: continue after the group
          cursor_.index = end;
          continue;
        }
        for (std::size_t i = 0; i < offered_.size(); ++i) {
          out.choices.push_back({i, block[offered_[i]].choice()->label});
        }
        status_ = Status::AwaitingChoice;
        out.status = Status::AwaitingChoice;
        return out;
      }
    }
  }

  std::shared_ptr<const Script> script_;
  Cursor cursor_;
  std::vector<std::size_t> offered_;  // statement indices within the current block
  std::size_t group_end_ = 0;
  std::set<std::size_t> consumed_;
  std::vector<Event> transcript_;
  Status status_ = Status::Running;
};

// ---------------------------------------------------------------------------
// text rendering (interactive stepper and golden transcripts)

inline std::string format_line(const Line& line) {
  std::string s = line.text;
  for (const auto& tag : line.tags) s += " #" + tag;
  return s;
}

inline void write_step(std::ostream& out, const StepOutput& step) {
  for (const auto& line : step.lines) out << format_line(line) << '\n';
  for (const auto& c : step.choices) out << "  [" << (c.display_index + 1) << "] " << c.label << '\n';
  if (step.status == Status::Ended) out << "-- END --\n";
}

inline std::string format_diagnostic(std::string_view file, const Diagnostic& d) {
  std::ostringstream os;
  os << file << ':' << d.line << ": " << (d.severity == Severity::Error ? "error" : "warning") << ": "
     << d.code << ": " << d.message;
  return os.str();
}

inline std::string format_parse_error(std::string_view file, const ParseError& e) {
  std::ostringstream os;
  os << file << ':' << e.line << ": error: " << kind_name(e.kind) << ": " << e.message;
  return os.str();
}

/// Parses, validates and runs a script, reading 1-based choice numbers from
/// `in`. With `echo`, each accepted number is written after the prompt so the
/// output reads as a complete transcript. Returns 0 on a clean run, 1 when
/// the script has errors or loops.
inline int run_interactive(std::string_view file, std::string_view source, std::istream& in,
                           std::ostream& out, std::ostream& err, bool echo) {
  auto parsed = parse(source);
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors) err << format_parse_error(file, e) << '\n';
    return 1;
  }
  const auto diags = validate(*parsed.script);
  for (const auto& d : diags) err << format_diagnostic(file, d) << '\n';
  if (has_errors(diags)) return 1;

  auto script = std::make_shared<const Script>(std::move(*parsed.script));
  try {
    auto [session, step] = DialogueSession::start(script);
    write_step(out, step);
    while (session.status() == Status::AwaitingChoice) {
      out << "> " << std::flush;
      std::string input;
      if (!std::getline(in, input)) {
        out << "\n-- stopped --\n";
        return 0;
      }
      const auto trimmed = std::string(text::trim(input));
      std::size_t n = 0;
      bool valid = !trimmed.empty() && trimmed.size() < 10 &&
                   trimmed.find_first_not_of("0123456789") == std::string::npos;
      if (valid) n = std::stoul(trimmed);
      if (!valid || n == 0 || n > step.choices.size()) {
        if (echo) out << trimmed << '\n';
        out << "? choose a number from 1 to " << step.choices.size() << '\n';
        continue;
      }
      if (echo) out << n << '\n';
      step = session.choose(n - 1);
      write_step(out, step);
    }
  } catch (const Error& e) {
    err << file << ": error: " << e.name() << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const StepOutput& step) {
  using J = nlohmann::ordered_json;
  J lines = J::array();
  for (const auto& l : step.lines) lines.push_back(J{{"text", l.text}, {"tags", l.tags}});
  J choices = J::array();
  for (const auto& c : step.choices) choices.push_back(J{{"index", c.display_index}, {"label", c.label}});
  return J{{"lines", std::move(lines)}, {"choices", std::move(choices)}, {"status", to_string(step.status)}};
}

}  // namespace prism::ink
