#include <httplib.h>

#include <charconv>

#include <spdlog/spdlog.h>

#include "modconf/error.hpp"
#include "modconf/review_service.hpp"

namespace modconf {

namespace {

constexpr std::size_t kDefaultPendingLimit = 20;
constexpr std::size_t kMaxPendingLimit = 1000;

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kInvalidArgument: return 422;
    default: return 500;
  }
}

}  // namespace

struct ReviewServer::Impl {
  ReviewStore& store;
  ServerOptions options;
  httplib::Server server;
  std::thread thread;
  int port = -1;

  Impl(ReviewStore& s, ServerOptions o) : store(s), options(std::move(o)) { routes(); }

  nlohmann::ordered_json with_image(const ConflictTriple& t) const {
    auto j = to_json(t);
    j["image_url"] = "/images/" + t.image_id + options.image_extension;
    return j;
  }

  void routes() {
    server.Get("/api/pending", [this](const httplib::Request& req, httplib::Response& res) {
      std::size_t limit = kDefaultPendingLimit;
      if (req.has_param("limit")) {
        const auto raw = req.get_param_value("limit");
        auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), limit);
        if (raw.empty() || ec != std::errc() || ptr != raw.data() + raw.size() || limit == 0 ||
            limit > kMaxPendingLimit) {
          send_error(res, 400, "invalid-limit", "limit must be an integer in [1, 1000]");
          return;
        }
      }
      auto records = nlohmann::ordered_json::array();
      for (const auto& t : store.pending(limit)) records.push_back(with_image(t));
      nlohmann::ordered_json body;
      body["count"] = records.size();
      body["records"] = std::move(records);
      send_json(res, 200, body);
    });

    server.Post("/api/review/:id", [this](const httplib::Request& req, httplib::Response& res) {
      const auto id = req.path_params.at("id");
      try {
        nlohmann::json body;
        try {
          body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::parse_error&) {
          throw Error(ErrorCode::kInvalidArgument, "body is not valid JSON");
        }
        auto decision = ReviewDecision::from_json(id, body);
        send_json(res, 200, with_image(store.apply(std::move(decision))));
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), e.code_name(), e.what());
      }
    });

    server.Post("/api/admin/reopen/:id", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        auto body = nlohmann::json::parse(req.body.empty() ? "{}" : req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) throw Error(ErrorCode::kInvalidArgument, "invalid body");
        auto annotator = body.value("annotator_id", std::string{});
        send_json(res, 200, with_image(store.reopen(req.path_params.at("id"), annotator)));
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), e.code_name(), e.what());
      }
    });

    server.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
      auto body = to_json(store.stats());
      body["progress"] = to_json(store.progress());
      send_json(res, 200, body);
    });

    server.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
      std::string out;
      for (const auto& t : store.export_final()) out += to_jsonl_line(t) + '\n';
      res.set_content(out, "application/x-ndjson");
    });

    if (!options.image_root.empty()) server.set_mount_point("/images", options.image_root.string());
    if (!options.ui_dir.empty()) server.set_mount_point("/", options.ui_dir.string());

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    });
  }
};

ReviewServer::ReviewServer(ReviewStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind() {
  if (impl_->options.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
  } else if (impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->port = impl_->options.port;
  }
  if (impl_->port <= 0) {
    throw Error(ErrorCode::kIoError, "cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  return impl_->port;
}

void ReviewServer::listen() {
  spdlog::info("review service listening on http://{}:{}", impl_->options.host, impl_->port);
  impl_->server.listen_after_bind();
}

int ReviewServer::start() {
  int port = bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void ReviewServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace modconf
