#include "sir/api_server.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <iostream>
#include <thread>

#include "sir/error.hpp"

namespace sir {

int http_status(Errc code) {
  switch (code) {
    case Errc::NotFound:
    case Errc::UnknownDeck:
    case Errc::UnknownQuestion:
      return 404;
    case Errc::AlreadyAssigned:
    case Errc::PhaseViolation:
    case Errc::DuplicateDeck:
      return 409;
    case Errc::EmptyResponse:
    case Errc::InvalidArgument:
    case Errc::OutOfRange:
    case Errc::IncompleteResponses:
    case Errc::InvalidImage:
    case Errc::EmptyDeck:
    case Errc::EmptyInput:
    case Errc::Parse:
    case Errc::IncompleteCorpus:
    case Errc::MissingDescription:
      return 422;
    case Errc::ProviderFailure:
      return 502;
    case Errc::Unavailable:
      return 503;
    default:
      return 500;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view error, const std::string& msg) {
  send_json(res, status, {{"error", error}, {"message", msg}});
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(Errc::Parse, "request body must be a JSON object");
  }
  return j;
}

template <class T>
T field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end()) throw Error(Errc::InvalidArgument, std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::InvalidArgument, std::string("field '") + name + "' has the wrong type");
  }
}

json session_view(const Session& s) {
  json answers = json::object();
  for (const auto& [qid, r] : s.answers) {
    answers[qid] = {{"latest_text", r.latest_text},
                    {"submitted_at", r.submitted_at},
                    {"revisions", r.history.size()}};
  }
  return {{"session_id", s.session_id},
          {"condition", condition_name(s.condition)},
          {"phase", phase_name(s.phase)},
          {"completed", s.completed},
          {"answers", answers},
          {"pre_score", s.pre_score ? json(*s.pre_score) : json(nullptr)},
          {"post_score", s.post_score ? json(*s.post_score) : json(nullptr)},
          {"max_score", s.max_score}};
}

}  // namespace

struct ApiServer::Impl {
  Service& svc;
  ApiOptions opts;
  httplib::Server server;
  std::jthread worker;

  Impl(Service& s, ApiOptions o) : svc(s), opts(std::move(o)) { install(); }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Wraps a handler with the error mapping shared by every route.
  Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), errc_name(e.code()), e.what());
      } catch (const std::exception& e) {
        std::cerr << "sir: " << req.method << ' ' << req.path << ": " << e.what() << '\n';
        send_error(res, 500, "Internal", "internal error");
      }
    };
  }

  Handler admin(Handler h) {
    return guarded([this, h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      if (opts.admin_token.empty()) {
        send_error(res, 403, "Forbidden", "admin routes are disabled");
        return;
      }
      if (req.get_header_value("Authorization") != "Bearer " + opts.admin_token) {
        send_error(res, 401, "Unauthorized", "admin token required");
        return;
      }
      h(req, res);
    });
  }

  bool origin_allowed(const std::string& origin) const {
    return std::find(opts.cors_origins.begin(), opts.cors_origins.end(), origin) !=
           opts.cors_origins.end();
  }

  void add_cors(const httplib::Request& req, httplib::Response& res) const {
    std::string ancestors = "'self'";
    for (const auto& o : opts.cors_origins) ancestors += " " + o;
    res.set_header("Content-Security-Policy", "frame-ancestors " + ancestors);
    const auto origin = req.get_header_value("Origin");
    if (!origin.empty() && origin_allowed(origin)) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    }
  }

  void install() {
    server.new_task_queue = [n = opts.worker_threads] { return new httplib::ThreadPool(n); };
    server.set_post_routing_handler(
        [this](const httplib::Request& req, httplib::Response& res) { add_cors(req, res); });
    server.Options(R"(/v1/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      res.status = 204;
      if (origin_allowed(req.get_header_value("Origin"))) {
        res.set_header("Access-Control-Allow-Methods", "GET, HEAD, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
        res.set_header("Access-Control-Max-Age", "600");
      }
    });

    server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });

    server.Post("/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      const auto s = svc.create_session(field<std::string>(body, "participant_id"));
      send_json(res, 201, {{"session_id", s.session_id},
                           {"condition", condition_name(s.condition)},
                           {"phase", phase_name(s.phase)}});
    }));

    server.Get("/v1/sessions/:id/state",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, session_view(svc.state(req.path_params.at("id"))));
               }));

    server.Get("/v1/sessions/:id/questions",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, svc.phase_items(req.path_params.at("id")));
               }));

    server.Post("/v1/sessions/:id/answers",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = body_of(req);
                  const auto r = svc.submit_answer(req.path_params.at("id"),
                                                   field<std::string>(body, "question_id"),
                                                   field<std::string>(body, "text"));
                  json out{{"cached", true},
                           {"question_id", r.record.question_id},
                           {"submitted_at", r.record.submitted_at},
                           {"revisions", r.record.history.size()},
                           {"feedback", r.feedback ? json(*r.feedback) : json(nullptr)}};
                  if (r.correct) out["correct"] = *r.correct;
                  send_json(res, 200, out);
                }));

    server.Post("/v1/sessions/:id/tests/:phase",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto& which = req.path_params.at("phase");
                  if (which != "pre" && which != "post") {
                    throw Error(Errc::NotFound, "test phase '" + which + "'");
                  }
                  const auto body = body_of(req);
                  const auto& id = req.path_params.at("id");
                  const auto score =
                      svc.submit_test(id, which == "pre" ? TestPhase::Pre : TestPhase::Post,
                                      field<std::map<std::string, int>>(body, "responses"));
                  const auto s = svc.state(id);
                  send_json(res, 200, {{"score", score.score},
                                       {"max_score", s.max_score},
                                       {"attention_pass", score.attention_pass},
                                       {"phase", phase_name(s.phase)}});
                }));

    server.Post("/v1/sessions/:id/advance",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  send_json(res, 200, {{"phase", phase_name(svc.advance(req.path_params.at("id")))}});
                }));

    server.Post("/v1/sessions/:id/survey",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = body_of(req);
                  svc.submit_survey(req.path_params.at("id"),
                                    field<std::vector<LikertAnswer>>(body, "answers"),
                                    body.value("comment", std::string()));
                  send_json(res, 200, {{"completed", true}});
                }));

    server.Get("/v1/slides/:deck/:page/image",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 int page = 0;
                 const auto& p = req.path_params.at("page");
                 auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), page);
                 if (ec != std::errc{} || end != p.data() + p.size()) {
                   throw Error(Errc::NotFound, "page '" + p + "'");
                 }
                 const auto img = svc.slide_image(req.path_params.at("deck"), page);
                 res.set_header("Cache-Control", "public, max-age=3600");
                 res.set_content(img.bytes, std::string(mime_type(img.type)));
               }));

    server.Post("/v1/admin/ingest", admin([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      const auto report = svc.ingest(field<std::string>(body, "deck_dir"), body.value("overwrite", false));
      json failures = json::array();
      for (const auto& f : report.failures) {
        failures.push_back({{"deck_id", f.page.deck_id}, {"page_no", f.page.page_no}, {"error", f.error}});
      }
      send_json(res, report.failures.empty() ? 200 : 207,
                {{"pages_described", report.pages_described},
                 {"pages_embedded", report.pages_embedded},
                 {"cache_hits", report.cache_hits},
                 {"failures", failures}});
    }));

    server.Post("/v1/admin/course", admin([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      Course course;
      try {
        course = body.get<Course>();
      } catch (const json::exception& e) {
        throw Error(Errc::Parse, e.what());
      }
      const auto n = course.questions.size();
      svc.load_course(std::move(course));
      send_json(res, 200, {{"questions", n}});
    }));

    server.Post("/v1/admin/precompute",
                admin([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = body_of(req);
                  std::optional<std::string> qid;
                  if (body.contains("question_id")) qid = field<std::string>(body, "question_id");
                  send_json(res, 200, {{"results", svc.precompute(qid)}});
                }));

    server.Get("/v1/admin/export/sessions",
               admin([this](const httplib::Request&, httplib::Response& res) {
                 res.set_content(svc.export_sessions(), "application/x-ndjson");
               }));

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      send_error(res, 500, "Internal", "internal error");
    });
    const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(svc.config().request_timeout);
    server.set_read_timeout(std::max<long>(1, timeout.count()), 0);
    server.set_write_timeout(std::max<long>(1, timeout.count()), 0);
  }
};

ApiServer::ApiServer(Service& service, ApiOptions opts)
    : impl_(std::make_unique<Impl>(service, std::move(opts))) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(Errc::Io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->worker = std::jthread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ApiServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(Errc::Io, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void ApiServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace sir
