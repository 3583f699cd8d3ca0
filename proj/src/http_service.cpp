#include "invt/http_service.hpp"

#include <httplib.h>
#include <json.hpp>

namespace invt {

using Json = nlohmann::ordered_json;

struct ExperimentService::Impl {
    ExperimentStore& store;
    ServiceOptions options;
    httplib::Server server;
    int port = -1;

    Impl(ExperimentStore& s, ServiceOptions o) : store(s), options(std::move(o)) {}
};

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void error(httplib::Response& res, int status, const std::string& message) {
    reply(res, status, Json{{"error", message}});
}

template <class F>
auto guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const NotFoundError& e) {
            error(res, 404, e.what());
        } catch (const ConflictError& e) {
            reply(res, 409, Json{{"error", e.what()}, {"cursor", e.cursor()}});
        } catch (const nlohmann::json::exception& e) {
            error(res, 400, std::string("bad request body: ") + e.what());
        } catch (const ArgumentError& e) {
            error(res, 400, e.what());
        } catch (const ConfigError& e) {
            error(res, 422, e.what());
        } catch (const std::exception& e) {
            error(res, 500, e.what());
        }
    };
}

}  // namespace

ExperimentService::ExperimentService(ExperimentStore& store, ServiceOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
    auto& srv = impl_->server;
    Impl* self = impl_.get();

    srv.Post("/api/session", guarded([self](const httplib::Request& req, httplib::Response& res) {
                 const Json body = req.body.empty() ? Json::object() : Json::parse(req.body);
                 SessionRequest r;
                 r.observer = body.value("observer", std::string());
                 r.reps = body.value("reps", self->options.default_reps);
                 r.seed = body.value("seed", self->options.default_seed);
                 r.axis = body.value("axis", std::string("D"));
                 const std::string id = self->store.create_session(r);
                 const auto s = self->store.summary(id);
                 reply(res, 201, Json{{"id", id}, {"total", s.total}});
             }));

    srv.Get(R"(/api/session/([^/]+)/trial)", guarded([self](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                const auto t = self->store.next_trial(id);
                if (!t) {
                    const auto s = self->store.summary(id);
                    reply(res, 200, Json{{"done", true}, {"session", id}, {"total", s.total}});
                    return;
                }
                reply(res, 200,
                      Json{{"done", false},
                           {"session", t->session},
                           {"trial_index", t->trial_index},
                           {"total", t->total},
                           {"left", "/api/stimulus/" + t->left},
                           {"right", "/api/stimulus/" + t->right}});
            }));

    srv.Post(R"(/api/session/([^/]+)/response)", guarded([self](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 const Json body = Json::parse(req.body);
                 const auto index = body.at("trial_index").get<std::size_t>();
                 const auto c = body.at("choice").get<std::string>();
                 if (c != "left" && c != "right") throw ArgumentError("choice must be left or right");
                 const TrialRecord r =
                     self->store.submit_response(id, index, c == "left" ? Choice::left : Choice::right);
                 const auto s = self->store.summary(id);
                 reply(res, 200, Json{{"ok", true}, {"trial_index", r.trial_index}, {"next_index", s.cursor},
                                      {"done", s.complete}});
             }));

    srv.Get(R"(/api/stimulus/([0-9a-f]+))", guarded([self](const httplib::Request& req, httplib::Response& res) {
                const auto bytes = self->store.stimulus_bytes(req.matches[1]);
                res.status = 200;
                res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
                res.set_header("Cache-Control", "no-store");
            }));

    srv.Get(R"(/api/session/([^/]+)/summary)", guarded([self](const httplib::Request& req, httplib::Response& res) {
                const auto s = self->store.summary(req.matches[1]);
                Json levels = Json::array();
                for (const auto& l : s.levels)
                    levels.push_back({{"level", l.level},
                                      {"n", l.n},
                                      {"correct", l.correct},
                                      {"proportion", l.n ? static_cast<double>(l.correct) / l.n : 0.0}});
                reply(res, 200,
                      Json{{"session", s.session},
                           {"observer", s.observer},
                           {"axis", s.axis},
                           {"cursor", s.cursor},
                           {"total", s.total},
                           {"complete", s.complete},
                           {"levels", levels}});
            }));

    if (impl_->options.static_dir) srv.set_mount_point("/", impl_->options.static_dir->string());
}

ExperimentService::~ExperimentService() { stop(); }

int ExperimentService::bind() {
    auto& o = impl_->options;
    if (o.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(o.host);
    } else {
        impl_->port = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
    }
    if (impl_->port < 0) throw Error("cannot bind " + o.host + ":" + std::to_string(o.port));
    return impl_->port;
}

void ExperimentService::serve() { impl_->server.listen_after_bind(); }

void ExperimentService::wait_ready() { impl_->server.wait_until_ready(); }

void ExperimentService::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace invt
