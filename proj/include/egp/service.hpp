#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "egp/corpus.hpp"

namespace egp {

inline constexpr std::size_t kMaxBodyBytes = 8u << 20;

std::string_view version();

struct HttpResult {
    int status = 200;
    std::string body;  // one JSON document
};

/// Routes one request. Pure given its arguments; `corpus` is read-only.
HttpResult handle_request(const std::string& method, const std::string& path, const std::string& body,
                          const std::vector<CorpusEntry>& corpus);

/// Report text as emitted by both the CLI (`--json`) and the service.
std::string render(const Report& report);

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    /// Value of Access-Control-Allow-Origin; EGP_ALLOWED_ORIGIN or "*".
    std::string allowed_origin;
    std::filesystem::path corpus_dir;
};

class Service {
public:
    explicit Service(ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the socket; returns the bound port.
    int bind();
    /// Serves until stop(). Call after bind().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace egp
