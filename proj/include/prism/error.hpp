#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace prism {

/// Broad error category; the HTTP layer maps each to a status code.
enum class ErrorClass {
  Validation,  // 400
  NotFound,    // 404
  Conflict,    // 409
};

enum class Errc {
  // annotation-store
  EmptyBody,
  BodyTooLong,
  NameTooLong,
  InvalidText,
  UnknownTarget,
  // exhibition-model
  VisitorOutOfBounds,
  // dialogue-engine
  InfiniteLoop,
  InvalidChoiceIndex,
  NotAwaitingChoice,
  // visit-session
  NotWalkable,
  OutOfRange,
  UnknownInteractable,
  WrongFocus,
  // service-api
  UnknownSession,
  BadRequest,
  UnknownRoute,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::EmptyBody: return "EmptyBody";
    case Errc::BodyTooLong: return "BodyTooLong";
    case Errc::NameTooLong: return "NameTooLong";
    case Errc::InvalidText: return "InvalidText";
    case Errc::UnknownTarget: return "UnknownTarget";
    case Errc::VisitorOutOfBounds: return "VisitorOutOfBounds";
    case Errc::InfiniteLoop: return "InfiniteLoop";
    case Errc::InvalidChoiceIndex: return "InvalidChoiceIndex";
    case Errc::NotAwaitingChoice: return "NotAwaitingChoice";
    case Errc::NotWalkable: return "NotWalkable";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::UnknownInteractable: return "UnknownInteractable";
    case Errc::WrongFocus: return "WrongFocus";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::BadRequest: return "BadRequest";
    case Errc::UnknownRoute: return "UnknownRoute";
  }
  return "Unknown";
}

constexpr ErrorClass errc_class(Errc code) {
  switch (code) {
    case Errc::UnknownTarget:
    case Errc::UnknownInteractable:
    case Errc::UnknownSession:
    case Errc::UnknownRoute:
      return ErrorClass::NotFound;
    case Errc::NotWalkable:
    case Errc::OutOfRange:
    case Errc::WrongFocus:
    case Errc::InvalidChoiceIndex:
    case Errc::NotAwaitingChoice:
    case Errc::InfiniteLoop:
      return ErrorClass::Conflict;
    default:
      return ErrorClass::Validation;
  }
}

/// Exception carrying a machine-readable code. Operations that fail on a
/// precondition throw this; "list of problems" results are returned as data.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errc_name(code_); }
  ErrorClass error_class() const noexcept { return errc_class(code_); }

 private:
  Errc code_;
};

namespace text {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline bool contains_ci(std::string_view haystack, std::string_view needle) {
  return to_lower_ascii(haystack).find(to_lower_ascii(needle)) != std::string::npos;
}

/// Number of code points in a UTF-8 string, or -1 if it is not valid UTF-8.
inline std::int64_t utf8_length(std::string_view s) {
  std::int64_t count = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      extra = 1;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      extra = 2;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      extra = 3;
      cp = lead & 0x07;
    } else {
      return -1;
    }
    if (i + extra >= s.size()) return -1;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cont = static_cast<unsigned char>(s[i + k]);
      if ((cont & 0xC0) != 0x80) return -1;
      cp = (cp << 6) | (cont & 0x3F);
    }
    // overlong encodings and surrogates
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && (cp < 0x10000 || cp > 0x10FFFF)) ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return -1;
    }
    i += extra + 1;
    ++count;
  }
  return count;
}

}  // namespace text
}  // namespace prism
