#include "dosm/http_server.hpp"

#include <httplib.h>

#include "dosm/error.hpp"
#include "dosm/wire.hpp"

namespace dosm::http {

int status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SpaceNotFound:
    case ErrorCode::SessionNotFound:
    case ErrorCode::AssetNotFound:
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::SpaceExists:
    case ErrorCode::NoPosition:
      return 409;
    case ErrorCode::ValidationFailed:
    case ErrorCode::UnknownId:
    case ErrorCode::DuplicateId:
    case ErrorCode::UnreachableTarget:
    case ErrorCode::NoPath:
    case ErrorCode::DegenerateSpace:
    case ErrorCode::OutOfBounds:
    case ErrorCode::NoPassableCells:
    case ErrorCode::NoAssets:
    case ErrorCode::InsufficientBeacons:
    case ErrorCode::DegenerateGeometry:
    case ErrorCode::SingularSystem:
      return 422;
    case ErrorCode::IoError:
      return 500;
    default:
      return 400;
  }
}

struct HttpServer::Impl {
  explicit Impl(service::DosmService& s) : svc(s) {}

  service::DosmService& svc;
  httplib::Server server;
  int port = -1;

  static void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  // Runs a handler, mapping exceptions to ApiError bodies.
  template <typename Fn>
  static void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      reply(res, status_for(e.code()), wire::error_to_json(e));
    } catch (const nlohmann::json::exception& e) {
      reply(res, 400, wire::error_to_json(Error(ErrorCode::InvalidArgument, e.what())));
    } catch (const std::exception& e) {
      reply(res, 500, Json{{"code", "internal"}, {"message", e.what()}});
    }
  }

  static Json body_of(const httplib::Request& req) { return parse_document(req.body); }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    server.Post("/spaces", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        Json doc = body_of(req);
        DecodeContext ctx;
        SpaceModel model = space_from_json(doc, ctx);
        auto update = svc.import_space(std::move(model));
        auto warnings = ctx.warnings;
        warnings.insert(warnings.end(), update.warnings.begin(), update.warnings.end());
        Json out{{"id", update.model->id}, {"version", update.model->version}};
        out["warnings"] = warnings;
        reply(res, 201, out);
      });
    });

    server.Get("/spaces", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, Json{{"spaces", svc.space_ids()}}); });
    });

    server.Get(R"(/spaces/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, to_json(*svc.get_space(req.matches[1]))); });
    });

    server.Post(R"(/spaces/([^/]+)/mutations)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string space_id = req.matches[1];
        auto current = svc.get_space(space_id);
        std::vector<std::string> warnings;
        Mutation m = wire::mutation_from_json(body_of(req), *current, warnings);
        auto update = svc.apply(space_id, m);
        warnings.insert(warnings.end(), update.warnings.begin(), update.warnings.end());
        Json out{{"id", space_id}, {"version", update.model->version}};
        out["warnings"] = warnings;
        reply(res, 200, out);
      });
    });

    server.Get(R"(/spaces/([^/]+)/navgraph)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, wire::nav_graph_to_json(*svc.nav_graph(req.matches[1]))); });
    });

    server.Post(R"(/spaces/([^/]+)/sessions)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = svc.create_session(req.matches[1]);
        reply(res, 201, Json{{"session_id", id}, {"space_id", std::string(req.matches[1])}});
      });
    });

    server.Get(R"(/spaces/([^/]+)/assets/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        reply(res, 200, wire::asset_details_to_json(svc.get_asset_details(req.matches[1], req.matches[2])));
      });
    });

    server.Put(R"(/sessions/([^/]+)/preferences)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        Json body = body_of(req);
        const Json& list = body.is_object() ? body.at("asset_ids") : body;
        if (!list.is_array()) throw Error(ErrorCode::InvalidArgument, "asset_ids must be an array");
        std::vector<Id> ids;
        for (const auto& v : list) {
          if (!v.is_string()) throw Error(ErrorCode::InvalidArgument, "asset ids must be strings");
          ids.push_back(v.get<std::string>());
        }
        reply(res, 200, Json{{"preferences", svc.set_preferences(req.matches[1], ids)}});
      });
    });

    server.Post(R"(/sessions/([^/]+)/readings)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const Id session_id = req.matches[1];
        (void)svc.session(session_id);  // unknown session beats malformed body
        auto readings = wire::readings_from_json(body_of(req));
        reply(res, 200, wire::ingest_to_json(svc.ingest_readings(session_id, readings)));
      });
    });

    server.Get(R"(/sessions/([^/]+)/route)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        nav::OrderMode mode = nav::OrderMode::Optimal;
        if (req.has_param("mode")) {
          const std::string m = req.get_param_value("mode");
          if (m == "as-given") {
            mode = nav::OrderMode::AsGiven;
          } else if (m != "optimal") {
            throw Error(ErrorCode::InvalidArgument, "mode must be optimal or as-given");
          }
        }
        reply(res, 200, wire::route_to_json(svc.get_route(req.matches[1], mode)));
      });
    });

    server.Get(R"(/sessions/([^/]+)/notifications)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::uint64_t after = 0;
        if (req.has_param("after")) {
          const std::string text = req.get_param_value("after");
          try {
            std::size_t used = 0;
            after = std::stoull(text, &used);
            if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
          } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "after must be a non-negative integer");
          }
        }
        auto page = svc.poll_notifications(req.matches[1], after);
        Json events = Json::array();
        for (const auto& e : page.events) events.push_back(wire::event_to_json(e));
        reply(res, 200, Json{{"events", events}, {"next_seq", page.next_seq}});
      });
    });

    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, wire::session_to_json(svc.session(req.matches[1]))); });
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        Error e(res.status == 404 ? ErrorCode::NotFound : ErrorCode::InvalidArgument,
                "no such endpoint or method");
        res.set_content(wire::error_to_json(e).dump(), "application/json");
      }
    });
  }
};

HttpServer::HttpServer(service::DosmService& service) : impl_(std::make_unique<Impl>(service)) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else {
    impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  return impl_->port;
}

bool HttpServer::listen() { return impl_->port > 0 && impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace dosm::http
