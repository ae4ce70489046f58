#pragma once

// HTTP front for the engine. `Api` is the route table and does not touch
// sockets; `Service` owns the store, the journal file and the HTTP server.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "prism/annotation_store.hpp"
#include "prism/error.hpp"
#include "prism/exhibition.hpp"
#include "prism/visit_session.hpp"

namespace prism {

using WallClock = std::function<std::int64_t()>;
using MonotonicClock = std::function<std::chrono::steady_clock::time_point()>;

inline std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline constexpr std::chrono::seconds kDefaultSessionTtl{2 * 60 * 60};

struct ServerConfig {
  std::string host = "0.0.0.0";
  int port = 8080;  // 0 binds an ephemeral port
  std::string exhibition_path;
  std::string journal_path;
  double interaction_radius = kDefaultInteractionRadius;
  std::optional<std::int64_t> fixed_clock_ms;  // for tests: every request gets this timestamp
  std::chrono::seconds session_ttl = kDefaultSessionTtl;
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

inline int http_status(ErrorClass c) {
  switch (c) {
    case ErrorClass::Validation: return 400;
    case ErrorClass::NotFound: return 404;
    case ErrorClass::Conflict: return 409;
  }
  return 500;
}

/// JSON bodies end with a newline; the CLI prints the same bytes.
inline std::string json_body(const Json& j) { return j.dump() + "\n"; }

class Api {
 public:
  struct Options {
    WallClock clock = system_clock_ms;
    MonotonicClock monotonic = [] { return std::chrono::steady_clock::now(); };
    std::chrono::seconds session_ttl = kDefaultSessionTtl;
  };

  Api(Venue venue, Options options) : venue_(std::move(venue)), options_(std::move(options)) {}

  const Venue& venue() const { return venue_; }

  ApiResponse handle(const ApiRequest& req) {
    const std::int64_t now = options_.clock();
    try {
      return route(req, now);
    } catch (const Error& e) {
      return error_response(http_status(e.error_class()), e.name(), e.what());
    } catch (const std::exception& e) {
      return error_response(500, "Internal", e.what());
    }
  }

  std::size_t session_count() {
    std::lock_guard lock(sessions_mutex_);
    return sessions_.size();
  }

 private:
  struct SessionEntry {
    explicit SessionEntry(VisitorSession s) : session(std::move(s)) {}
    std::mutex mutex;
    VisitorSession session;
    std::chrono::steady_clock::time_point last_access;
  };

  static ApiResponse error_response(int status, std::string_view name, std::string_view message) {
    return {status, json_body(Json{{"error", name}, {"message", message}})};
  }

  static std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos < path.size()) {
      const auto slash = path.find('/', pos);
      const auto part = path.substr(pos, slash == std::string_view::npos ? std::string_view::npos : slash - pos);
      if (!part.empty()) parts.emplace_back(part);
      if (slash == std::string_view::npos) break;
      pos = slash + 1;
    }
    return parts;
  }

  static Json parse_body(const ApiRequest& req) {
    if (text::trim(req.body).empty()) return Json::object();
    Json j = Json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(Errc::BadRequest, "request body must be a JSON object");
    return j;
  }

  static std::optional<std::string> optional_string(const Json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw Error(Errc::BadRequest, std::string(key) + " must be a string");
    return j[key].get<std::string>();
  }

  static double required_number(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw Error(Errc::BadRequest, std::string(key) + " must be a number");
    return j[key].get<double>();
  }

  ApiResponse route(const ApiRequest& req, std::int64_t now) {
    const auto parts = split_path(req.path);
    const std::string& m = req.method;
    const std::size_t n = parts.size();

    if (m == "GET" && n == 1 && parts[0] == "exhibition") return ok(to_json(*venue_.exhibition));
    if (m == "GET" && n == 1 && parts[0] == "map") return get_map(req);
    if (m == "GET" && n == 1 && parts[0] == "guestbook") return ok(to_json(venue_.store->guestbook_view()));
    if (m == "POST" && n == 1 && parts[0] == "guestbook") {
      const Json body = parse_body(req);
      const auto name = optional_string(body, "guest_name");
      const auto comment = venue_.store->post(Target::guestbook(), name, optional_string(body, "body").value_or(""), now);
      return {201, json_body(to_json(comment))};
    }
    if (m == "GET" && n == 1 && parts[0] == "summary") {
      const auto q = parse_summary_query(req.query);
      return ok(to_json(venue_.store->summary(q.rank, q.filter)));
    }
    if (n == 3 && parts[0] == "artworks") {
      if (m == "GET" && parts[2] == "view") return ok(to_json(venue_.store->artwork_view(parts[1])));
      if (m == "POST" && parts[2] == "comments") {
        const Json body = parse_body(req);
        const auto name = optional_string(body, "guest_name");
        const auto comment =
            venue_.store->post(Target::artwork(parts[1]), name, optional_string(body, "body").value_or(""), now);
        return {201, json_body(to_json(comment))};
      }
    }
    if (n >= 1 && parts[0] == "sessions") {
      if (m == "POST" && n == 1) return create_session(req);
      if (m == "DELETE" && n == 2) return delete_session(parts[1]);
      if (m == "POST" && n >= 3) {
        const std::string action = n == 3 ? parts[2] : parts[2] + "/" + parts[3];
        if (n <= 4 && (action == "teleport" || action == "interact" || action == "form" || action == "dialogue/choice")) {
          return session_action(parts[1], action, req, now);
        }
      }
    }
    throw Error(Errc::UnknownRoute, "no route for " + m + " " + req.path);
  }

  static ApiResponse ok(const Json& j) { return {200, json_body(j)}; }

  ApiResponse get_map(const ApiRequest& req) {
    const auto it = req.query.find("session");
    if (it == req.query.end() || it->second.empty()) {
      return ok(Json{{"map", render_map(*venue_.exhibition)}});
    }
    auto entry = find_session(it->second);
    std::lock_guard lock(entry->mutex);
    const auto& s = entry->session;
    return ok(Json{{"map", render_map(*venue_.exhibition, s.position())}, {"position", to_json(s.position())}});
  }

  ApiResponse create_session(const ApiRequest& req) {
    const Json body = parse_body(req);
    const auto name = optional_string(body, "guest_name");
    auto entry = std::make_shared<SessionEntry>(VisitorSession::enter(venue_, name));
    Json j = session_json(entry->session);
    std::lock_guard lock(sessions_mutex_);
    sweep_expired_locked();
    entry->last_access = options_.monotonic();
    sessions_.emplace(entry->session.id(), std::move(entry));
    return {201, json_body(j)};
  }

  ApiResponse delete_session(const std::string& id) {
    find_session(id);  // 404 for unknown or expired
    std::lock_guard lock(sessions_mutex_);
    sessions_.erase(id);
    return {204, ""};
  }

  ApiResponse session_action(const std::string& id, const std::string& action, const ApiRequest& req,
                             std::int64_t now) {
    const Json body = parse_body(req);
    auto entry = find_session(id);
    std::lock_guard lock(entry->mutex);
    VisitorSession& s = entry->session;

    if (action == "teleport") {
      s.teleport({required_number(body, "x"), required_number(body, "y")});
      return ok(session_json(s));
    }
    if (action == "interact") {
      const auto payload = s.interact(interactable_from(body));
      return ok(Json{{"focus", to_json(s.focus())}, {"payload", to_json(payload)}});
    }
    if (action == "form") {
      const auto result = s.submit_form(optional_string(body, "guest_name"),
                                        optional_string(body, "body").value_or(""), now);
      Json view = std::visit([](const auto& v) { return to_json(v); }, result.view);
      return {201, json_body(Json{{"comment", to_json(result.comment)}, {"view", std::move(view)}})};
    }
    // dialogue/choice
    if (!body.contains("index") || !body["index"].is_number_integer()) {
      throw Error(Errc::BadRequest, "index must be an integer");
    }
    const auto index = body["index"].get<std::int64_t>();
    if (index < 0) throw Error(Errc::InvalidChoiceIndex, "choice index must not be negative");
    const auto result = s.dialogue_choose(static_cast<std::size_t>(index));
    Json effects = Json::array();
    for (const auto& e : result.side_effects) effects.push_back(to_json(e));
    return ok(Json{{"step", ink::to_json(result.step)}, {"side_effects", std::move(effects)}, {"focus", to_json(s.focus())}});
  }

  static InteractableRef interactable_from(const Json& body) {
    const auto kind = optional_string(body, "kind").value_or("");
    if (kind == "artwork") {
      auto id = optional_string(body, "artwork_id");
      if (!id) id = optional_string(body, "id");
      if (!id) throw Error(Errc::BadRequest, "artwork interaction needs artwork_id");
      return InteractableRef::artwork(*id);
    }
    if (kind == "guestbook") return InteractableRef::guestbook();
    if (kind == "laptop") return InteractableRef::laptop();
    if (kind == "guide") return InteractableRef::guide();
    throw Error(Errc::UnknownInteractable, "kind must be artwork, guestbook, laptop or guide");
  }

  std::shared_ptr<SessionEntry> find_session(const std::string& id) {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(Errc::UnknownSession, "unknown session '" + id + "'");
    const auto t = options_.monotonic();
    if (t - it->second->last_access > options_.session_ttl) {
      sessions_.erase(it);
      throw Error(Errc::UnknownSession, "session '" + id + "' has expired");
    }
    it->second->last_access = t;
    return it->second;
  }

  void sweep_expired_locked() {
    const auto t = options_.monotonic();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (t - it->second->last_access > options_.session_ttl) {
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }

  Venue venue_;
  Options options_;
  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<SessionEntry>> sessions_;
};

// ---------------------------------------------------------------------------

class StartupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StartupError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Loads and validates an exhibition file, throwing StartupError with every
/// problem listed.
inline std::shared_ptr<const Exhibition> load_exhibition_file(const std::filesystem::path& path) {
  auto parsed = parse_exhibition(read_file(path));
  if (!parsed.ok()) {
    std::string msg = path.string() + " is not a valid exhibition:";
    for (const auto& e : parsed.errors) msg += "\n  " + std::string(kind_name(e.kind)) + ": " + e.message;
    throw StartupError(msg);
  }
  return std::make_shared<const Exhibition>(std::move(*parsed.exhibition));
}

/// Append-only journal file; every post is written and flushed before the
/// post returns.
class JournalFile {
 public:
  explicit JournalFile(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::app) {
    if (!out_) throw StartupError("cannot open journal " + path.string() + " for appending");
  }

  void append(const Comment& c) {
    out_ << journal_line(c) << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("journal write failed");
  }

 private:
  std::ofstream out_;
};

class Service {
 public:
  /// Loads the exhibition and the journal (absent journal = empty store). A
  /// journal with a corrupt tail is recovered and rewritten before use.
  Service(const ServerConfig& config, std::ostream& log) : config_(config) {
    if (config.port < 0 || config.port > 65535) throw StartupError("port must be in 1-65535");
    auto exhibition = load_exhibition_file(config.exhibition_path);

    std::shared_ptr<AnnotationStore> store;
    if (!config.journal_path.empty() && std::filesystem::exists(config.journal_path)) {
      auto loaded = AnnotationStore::load(exhibition, read_file(config.journal_path));
      store = std::make_shared<AnnotationStore>(loaded.store);
      if (loaded.error) {
        log << "warning: journal " << config.journal_path << ": " << loaded.error->message << "; kept "
            << store->last_seq() << " records and rewrote the journal\n";
        std::ofstream rewrite(config.journal_path, std::ios::binary | std::ios::trunc);
        rewrite << store->save();
        if (!rewrite) throw StartupError("cannot rewrite journal " + config.journal_path);
      }
    } else {
      store = std::make_shared<AnnotationStore>(exhibition);
    }
    if (!config.journal_path.empty()) {
      journal_ = std::make_unique<JournalFile>(config.journal_path);
      store->set_sink([journal = journal_.get()](const Comment& c) { journal->append(c); });
    }

    Api::Options options;
    if (config.fixed_clock_ms) {
      options.clock = [t = *config.fixed_clock_ms] { return t; };
    }
    options.session_ttl = config.session_ttl;
    api_ = std::make_unique<Api>(Venue::create(exhibition, store, config.interaction_radius), std::move(options));

    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      ApiRequest r{req.method, req.path, {}, req.body};
      for (const auto& [k, v] : req.params) r.query.emplace(k, v);
      const auto out = api_->handle(r);
      res.status = out.status;
      if (!out.body.empty()) res.set_content(out.body, "application/json");
    };
    server_.Get(".*", handler);
    server_.Post(".*", handler);
    server_.Delete(".*", handler);

    if (config.port == 0) {
      port_ = server_.bind_to_any_port(config.host);
      if (port_ < 0) throw StartupError("cannot bind " + config.host);
    } else {
      if (!server_.bind_to_port(config.host, config.port)) {
        throw StartupError("cannot bind " + config.host + ":" + std::to_string(config.port));
      }
      port_ = config.port;
    }
  }

  ~Service() { stop(); }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  int port() const { return port_; }
  Api& api() { return *api_; }
  AnnotationStore& store() { return *api_->venue().store; }

  /// Serves until stop() is called.
  void run() { server_.listen_after_bind(); }

  void start_background() {
    thread_ = std::thread([this] { run(); });
    server_.wait_until_ready();
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  ServerConfig config_;
  std::unique_ptr<JournalFile> journal_;
  std::unique_ptr<Api> api_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace prism
