#include "cim/service.hpp"

#include <httplib.h>

#include "cim/parser.hpp"
#include "cim/query.hpp"

namespace cim {

namespace {

using json = nlohmann::json;

HttpResponse ok(json body) {
    body["apiVersion"] = kApiVersion;
    return {200, body.dump()};
}

HttpResponse fail(int status, std::string_view code, std::string_view message, const json& details = nullptr) {
    return {status, api_error_json(code, message, details).dump()};
}

int status_for(const QueryError& e) {
    if (e.code == api_error::kInvalidQuery) return 400;
    if (e.code == api_error::kUnmappedLevel) return 409;
    return 422;
}

}  // namespace

json api_error_json(std::string_view code, std::string_view message, const json& details) {
    json error = {{"code", code}, {"message", message}};
    if (!details.is_null()) error["details"] = details;
    return {{"apiVersion", kApiVersion}, {"error", error}};
}

struct Service::Server {
    httplib::Server http;
};

void Service::load(const std::filesystem::path& workspace, bool materialize) {
    try {
        install(Session::open(workspace, materialize));
    } catch (const std::exception& e) {
        std::lock_guard lock(mutex_);
        load_error_ = e.what();
    }
}

void Service::install(std::shared_ptr<const Session> session) {
    std::lock_guard lock(mutex_);
    session_ = std::move(session);
    load_error_.clear();
}

bool Service::ready() const { return session() != nullptr; }

std::shared_ptr<const Session> Service::session() const {
    std::lock_guard lock(mutex_);
    return session_;
}

HttpResponse Service::handle(std::string_view method, std::string_view target, std::string_view body) const {
    const std::string_view path = target.substr(0, target.find('?'));
    const bool head = method == "HEAD";
    HttpResponse r;
    try {
        r = route(head ? "GET" : method, path, body);
    } catch (const std::exception& e) {
        r = fail(500, api_error::kInternal, e.what());
    }
    if (head) r.body.clear();
    return r;
}

HttpResponse Service::route(std::string_view method, std::string_view path, std::string_view body) const {
    const bool known = path == "/health" || path == "/model" || path == "/views" || path == "/query" ||
                       (path.starts_with("/levels/") && path.ends_with("/members"));
    if (!known) return fail(404, api_error::kNotFound, "no resource at " + std::string(path));
    const std::string_view expected = path == "/query" ? "POST" : "GET";
    if (method != expected)
        return fail(405, api_error::kMethodNotAllowed, std::string(path) + " accepts " + std::string(expected));

    const auto s = session();
    if (!s) {
        std::string error;
        {
            std::lock_guard lock(mutex_);
            error = load_error_;
        }
        if (!error.empty()) return fail(503, api_error::kLoadFailed, error);
        return fail(503, api_error::kNotReady, "workspace is still loading");
    }
    const Workspace& w = s->workspace;
    const CompileResult& c = s->compiled;

    if (path == "/health") return ok({{"status", "ok"}, {"views", c.views.size()}});
    if (path == "/model") return ok(export_graph_json(w.cdl, w.sdl, w.mdl));
    if (path == "/views") {
        if (!c.ok()) return fail(409, api_error::kCompileFailed, "view compilation failed", to_json(c.diagnostics));
        json j = c.views.to_json();
        j["diagnostics"] = to_json(c.diagnostics);
        return ok(std::move(j));
    }
    if (path == "/query") {
        json request;
        try {
            request = json::parse(body);
        } catch (const json::parse_error& e) {
            return fail(400, api_error::kInvalidQuery, std::string("malformed JSON: ") + e.what());
        }
        try {
            const CqlQuery query = CqlQuery::from_json(request);
            return ok(result_to_json(execute(query, c.views, w.cdl, s->store)));
        } catch (const QueryError& e) {
            json details = nullptr;
            if (!e.candidates.empty()) details = {{"candidates", e.candidates}};
            return fail(status_for(e), e.code, e.what(), details);
        }
    }
    // /levels/{name}/members
    const std::string name(path.substr(8, path.size() - 8 - 8));
    if (!w.cdl.find_level(name)) {
        std::vector<std::string> names;
        for (const auto& l : w.cdl.levels) names.push_back(l.name);
        const auto candidates = suggest(name, names);
        return fail(404, api_error::kNotFound, "unknown level '" + name + "'",
                    candidates.empty() ? json(nullptr) : json{{"candidates", candidates}});
    }
    const ViewDefinition* v = c.views.level(name);
    if (!v) return fail(409, api_error::kUnmappedLevel, "unmapped level: " + name);
    return ok(result_to_json(s->store.evaluate(c.views.reference(*v), c.views.overlay())));
}

void Service::serve(const std::string& host, int port) {
    bind(host, port);
    listen();
}

void Service::bind(const std::string& host, int port) {
    server_ = std::make_shared<Server>();
    if (!server_->http.bind_to_port(host, port))
        throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

int Service::bind_any(const std::string& host) {
    server_ = std::make_shared<Server>();
    const int port = server_->http.bind_to_any_port(host);
    if (port < 0) throw IoError("cannot bind " + host);
    return port;
}

void Service::listen() {
    // Routing happens in handle(); httplib only reads the request body for registered routes.
    const auto route = [this](const httplib::Request& req, httplib::Response& res) {
        const HttpResponse r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_header("Access-Control-Allow-Origin", "*");
        if (!r.body.empty()) res.set_content(r.body, "application/json");
    };
    server_->http.Get(".*", route);
    server_->http.Post(".*", route);
    server_->http.Put(".*", route);
    server_->http.Patch(".*", route);
    server_->http.Delete(".*", route);
    server_->http.Options(".*", route);
    server_->http.listen_after_bind();
}

void Service::wait_until_listening() const { server_->http.wait_until_ready(); }

void Service::stop() {
    if (server_) server_->http.stop();
}

}  // namespace cim
