#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cim/workspace.hpp"

namespace cim {

inline constexpr int kApiVersion = 1;

/// Error codes carried in ApiError bodies; see docs/api.md.
namespace api_error {
inline constexpr const char* kNotReady = "not-ready";
inline constexpr const char* kNotFound = "not-found";
inline constexpr const char* kMethodNotAllowed = "method-not-allowed";
inline constexpr const char* kCompileFailed = "compile-failed";
inline constexpr const char* kLoadFailed = "load-failed";
inline constexpr const char* kInvalidQuery = "invalid-query";
inline constexpr const char* kUnresolvedName = "unresolved-name";
inline constexpr const char* kAmbiguousPath = "ambiguous-path";
inline constexpr const char* kUnmappedLevel = "unmapped-level";
inline constexpr const char* kInternal = "internal";
}  // namespace api_error

struct HttpResponse {
    int status = 200;
    std::string body;
};

/// {apiVersion, error:{code, message[, details]}}
nlohmann::json api_error_json(std::string_view code, std::string_view message,
                              const nlohmann::json& details = nullptr);

/// HTTP/JSON facade over a session. Not ready (503) until a session is installed.
class Service {
public:
    /// Loads the workspace; on failure the service reports load-failed instead of becoming ready.
    void load(const std::filesystem::path& workspace, bool materialize = false);
    void install(std::shared_ptr<const Session> session);
    bool ready() const;

    /// Routes one request. `target` is the path, optionally with a query string.
    HttpResponse handle(std::string_view method, std::string_view target, std::string_view body) const;

    /// Binds and serves until stop(). Throws IoError when the port cannot be bound.
    void serve(const std::string& host, int port);
    /// Throws IoError when the port cannot be bound.
    void bind(const std::string& host, int port);
    /// Binds to an ephemeral port and returns it; serve on it with listen().
    int bind_any(const std::string& host);
    void listen();
    /// Blocks until a listen() running on another thread accepts connections.
    void wait_until_listening() const;
    void stop();

private:
    std::shared_ptr<const Session> session() const;
    HttpResponse route(std::string_view method, std::string_view path, std::string_view body) const;

    mutable std::mutex mutex_;
    std::shared_ptr<const Session> session_;
    std::string load_error_;
    struct Server;
    std::shared_ptr<Server> server_;
};

}  // namespace cim
