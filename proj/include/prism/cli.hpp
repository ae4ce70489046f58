#pragma once

// Curator command line: validate, serve, summary, seed-demo, dialogue run.
// Exit codes: 0 success, 1 validation failure, 2 usage error.

#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "prism/annotation_store.hpp"
#include "prism/demo.hpp"
#include "prism/exhibition.hpp"
#include "prism/mini_ink.hpp"
#include "prism/service.hpp"
#include "prism/visit_session.hpp"

namespace prism::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitUsage = 2;

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  bool stdin_is_tty = false;
};

namespace detail {

inline std::string iso_utc(std::int64_t ms) {
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct FileReport {
  std::string path;
  std::string kind;
  Json diagnostics = Json::array();
  std::size_t errors = 0;
  std::size_t warnings = 0;
};

inline void add(FileReport& r, bool error, std::string code, std::size_t line, std::string message,
                std::vector<std::string>& text) {
  (error ? r.errors : r.warnings)++;
  Json d{{"severity", error ? "error" : "warning"}, {"code", code}, {"line", line}, {"message", message}};
  r.diagnostics.push_back(std::move(d));
  std::string loc = r.path;
  if (line > 0) loc += ":" + std::to_string(line);
  text.push_back(loc + ": " + (error ? "error" : "warning") + ": " + code + ": " + message);
}

inline FileReport check_exhibition(const std::string& path, std::vector<std::string>& text) {
  FileReport r{path, "exhibition"};
  std::string doc;
  try {
    doc = read_file(path);
  } catch (const StartupError& e) {
    add(r, true, "Unreadable", 0, e.what(), text);
    return r;
  }
  const auto parsed = parse_exhibition(doc);
  for (const auto& e : parsed.errors) add(r, true, std::string(kind_name(e.kind)), e.line, e.message, text);
  return r;
}

inline FileReport check_script(const std::string& path, std::vector<std::string>& text) {
  FileReport r{path, "script"};
  std::string src;
  try {
    src = read_file(path);
  } catch (const StartupError& e) {
    add(r, true, "Unreadable", 0, e.what(), text);
    return r;
  }
  const auto parsed = ink::parse(src);
  for (const auto& e : parsed.errors) add(r, true, std::string(ink::kind_name(e.kind)), e.line, e.message, text);
  if (parsed.ok()) {
    for (const auto& d : ink::validate(*parsed.script)) {
      add(r, d.severity == ink::Severity::Error, d.code, d.line, d.message, text);
    }
  }
  return r;
}

inline void print_summary_text(std::ostream& out, const Exhibition& ex, const SummaryReport& report) {
  out << ex.title << '\n';
  out << "comments: " << to_string(report.applied_rank.comment_rank)
      << ", artworks: " << to_string(report.applied_rank.artwork_rank) << '\n';
  for (const auto& s : report.sections) {
    const Artwork* art = ex.find_artwork(s.artwork_id);
    out << '\n' << '[' << artwork_glyph(art ? art->display_order : 0) << "] " << s.artwork_title << " (" << s.artwork_id
        << ") - " << s.comment_count << (s.comment_count == 1 ? " comment" : " comments") << '\n';
    for (const auto& c : s.comments) {
      out << "    #" << c.seq << ' ' << iso_utc(c.created_at) << ' ' << c.guest_name << ": " << c.body << '\n';
    }
  }
}

inline int serve_until_signalled(const ServerConfig& config, Io io) {
  // Block termination signals here so server worker threads inherit the mask
  // and a single sigwait below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<Service> service;
  try {
    service = std::make_unique<Service>(config, io.err);
  } catch (const StartupError& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  service->start_background();
  io.out << "serving " << config.exhibition_path << " on " << config.host << ':' << service->port() << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  io.out << "shutting down" << std::endl;
  service->stop();
  return kExitOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, Io io) {
  CLI::App app{"Virtual exhibition engine: annotations, guide dialogue and the visitor service", "prism"};
  app.require_subcommand(1);

  std::string format = "text";
  auto add_format = [&format](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
  };

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check an exhibition definition and Mini-Ink scripts");
  std::string validate_exhibition;
  std::vector<std::string> validate_scripts;
  validate_cmd->add_option("exhibition", validate_exhibition, "Exhibition definition (JSON)")->required();
  validate_cmd->add_option("scripts", validate_scripts, "Mini-Ink scripts (.mink)");
  add_format(validate_cmd);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  ServerConfig config;
  std::int64_t ttl_seconds = kDefaultSessionTtl.count();
  std::optional<std::int64_t> fixed_clock;
  serve_cmd->add_option("--host", config.host, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", config.port, "Listen port")->envname("PRISM_PORT")->check(CLI::Range(1, 65535))->capture_default_str();
  serve_cmd->add_option("--exhibition", config.exhibition_path, "Exhibition definition")->envname("PRISM_EXHIBITION")->required();
  serve_cmd->add_option("--journal", config.journal_path, "Comment journal (created if absent)")->envname("PRISM_JOURNAL")->required();
  serve_cmd->add_option("--radius", config.interaction_radius, "Interaction radius in meters")->check(CLI::PositiveNumber)->capture_default_str();
  serve_cmd->add_option("--session-ttl", ttl_seconds, "Idle session lifetime in seconds")->check(CLI::PositiveNumber)->capture_default_str();
  serve_cmd->add_option("--fixed-clock", fixed_clock, "Stamp every request with this time (ms); for tests");

  // summary
  auto* summary_cmd = app.add_subcommand("summary", "Print the annotation summary of a journal");
  std::string summary_journal;
  std::string summary_exhibition;
  std::map<std::string, std::string> query;
  summary_cmd->add_option("--journal", summary_journal, "Comment journal")->required();
  summary_cmd->add_option("--exhibition", summary_exhibition, "Exhibition definition")->required();
  summary_cmd->add_option("--comment-rank", query["comment_rank"], "newest | oldest | longest");
  summary_cmd->add_option("--artwork-rank", query["artwork_rank"], "display_order | most_comments");
  summary_cmd->add_option("--author", query["author"], "Keep comments whose guest name contains this");
  summary_cmd->add_option("--keyword", query["keyword"], "Keep comments whose body contains this");
  summary_cmd->add_option("--since", query["since"], "Earliest timestamp (ms, inclusive)");
  summary_cmd->add_option("--until", query["until"], "Latest timestamp (ms, inclusive)");
  add_format(summary_cmd);

  // seed-demo
  auto* seed_cmd = app.add_subcommand("seed-demo", "Write the bundled demo exhibition, guide script and empty journal");
  std::string seed_out;
  bool seed_force = false;
  seed_cmd->add_option("--out", seed_out, "Target directory")->required();
  seed_cmd->add_flag("--force", seed_force, "Overwrite existing files");

  // dialogue run
  auto* dialogue_cmd = app.add_subcommand("dialogue", "Work with Mini-Ink dialogue scripts");
  dialogue_cmd->require_subcommand(1);
  auto* dialogue_run = dialogue_cmd->add_subcommand("run", "Step through a script interactively");
  std::string dialogue_script;
  dialogue_run->add_option("script", dialogue_script, "Mini-Ink script")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, io.out, io.err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*validate_cmd) {
    std::vector<std::string> text;
    std::vector<detail::FileReport> reports;
    reports.push_back(detail::check_exhibition(validate_exhibition, text));
    for (const auto& s : validate_scripts) reports.push_back(detail::check_script(s, text));
    std::size_t errors = 0, warnings = 0;
    Json files = Json::array();
    for (auto& r : reports) {
      errors += r.errors;
      warnings += r.warnings;
      files.push_back(Json{{"path", r.path}, {"kind", r.kind}, {"diagnostics", std::move(r.diagnostics)}});
    }
    if (format == "json") {
      io.out << json_body(Json{{"files", std::move(files)}, {"errors", errors}, {"warnings", warnings}});
    } else {
      for (const auto& line : text) io.out << line << '\n';
      io.out << reports.size() << (reports.size() == 1 ? " file" : " files") << " checked, " << errors
             << " errors, " << warnings << " warnings\n";
    }
    return errors == 0 ? kExitOk : kExitInvalid;
  }

  if (*serve_cmd) {
    config.session_ttl = std::chrono::seconds(ttl_seconds);
    config.fixed_clock_ms = fixed_clock;
    return detail::serve_until_signalled(config, io);
  }

  if (*summary_cmd) {
    try {
      auto exhibition = load_exhibition_file(summary_exhibition);
      auto loaded = AnnotationStore::load(exhibition, read_file(summary_journal));
      const auto q = parse_summary_query(query);
      const auto report = loaded.store.summary(q.rank, q.filter);
      if (format == "json") {
        io.out << json_body(to_json(report));
      } else {
        detail::print_summary_text(io.out, *exhibition, report);
      }
      if (loaded.error) {
        io.err << summary_journal << ": error: CorruptJournal: " << loaded.error->message << '\n';
        return kExitInvalid;
      }
      return kExitOk;
    } catch (const StartupError& e) {
      io.err << "error: " << e.what() << '\n';
      return kExitInvalid;
    } catch (const Error& e) {
      io.err << "error: " << e.name() << ": " << e.what() << '\n';
      return kExitUsage;
    }
  }

  if (*seed_cmd) {
    namespace fs = std::filesystem;
    const fs::path dir(seed_out);
    const fs::path files[] = {dir / "exhibition.json", dir / "guide.mink", dir / "journal.jsonl"};
    if (!seed_force) {
      for (const auto& f : files) {
        if (fs::exists(f)) {
          io.err << "error: " << f.string() << " already exists (use --force to overwrite)\n";
          return kExitInvalid;
        }
      }
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    const auto exhibition = parse_exhibition(demo::kExhibitionJson);
    const std::string contents[] = {std::string(demo::kExhibitionJson), build_guide_script(*exhibition.exhibition), ""};
    for (std::size_t i = 0; i < 3; ++i) {
      std::ofstream f(files[i], std::ios::binary | std::ios::trunc);
      f << contents[i];
      if (!f) {
        io.err << "error: cannot write " << files[i].string() << '\n';
        return kExitInvalid;
      }
      io.out << "wrote " << files[i].string() << '\n';
    }
    return kExitOk;
  }

  if (*dialogue_run) {
    std::string src;
    try {
      src = read_file(dialogue_script);
    } catch (const StartupError& e) {
      io.err << "error: " << e.what() << '\n';
      return kExitInvalid;
    }
    return ink::run_interactive(dialogue_script, src, io.in, io.out, io.err, !io.stdin_is_tty);
  }
  return kExitUsage;
}

}  // namespace prism::cli
