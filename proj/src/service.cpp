#include "egp/service.hpp"

#include <cstdlib>

#include <httplib.h>

#include "egp/error.hpp"

#ifndef EGP_VERSION
#define EGP_VERSION "0.0.0"
#endif

namespace egp {

using nlohmann::json;

namespace {

struct Route {
    std::string_view path;
    QueryKind kind;
};

constexpr Route kRoutes[] = {
    {"/v1/parse", QueryKind::parse},
    {"/v1/dsep", QueryKind::dsep},
    {"/v1/paths", QueryKind::paths},
    {"/v1/adjustment-sets", QueryKind::adjustment_sets},
    {"/v1/iv-check", QueryKind::iv},
    {"/v1/implications", QueryKind::implications},
    {"/v1/factorize", QueryKind::factorize},
    {"/v1/simulate", QueryKind::simulate},
    {"/v1/estimate", QueryKind::estimate},
    {"/v1/testfit", QueryKind::testfit},
    {"/v1/sensitivity", QueryKind::sensitivity},
};

HttpResult failure(int status, std::string_view code, const std::string& message) {
    return {status, render(Report{{"error", {{"code", code}, {"message", message}}}})};
}

int status_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::parse_error:
        case ErrorCode::cycle:
        case ErrorCode::duplicate_node:
        case ErrorCode::unknown_endpoint:
        case ErrorCode::self_loop:
        case ErrorCode::latent_adjusted:
        case ErrorCode::invalid_name: return 400;
        default: return 422;
    }
}

} // namespace

std::string_view version() { return EGP_VERSION; }

std::string render(const Report& report) { return report.dump(2) + "\n"; }

HttpResult handle_request(const std::string& method, const std::string& path, const std::string& body,
                          const std::vector<CorpusEntry>& corpus) {
    if (path == "/v1/health") {
        if (method != "GET") return failure(405, "method_not_allowed", "use GET for " + path);
        return {200, render(Report{{"status", "ok"}, {"version", version()}, {"kind", "health"}})};
    }
    constexpr std::string_view corpus_prefix = "/v1/corpus";
    if (path == corpus_prefix || path.starts_with(std::string(corpus_prefix) + "/")) {
        if (method != "GET") return failure(405, "method_not_allowed", "use GET for " + path);
        if (path == corpus_prefix) return {200, render(catalog_json(corpus))};
        const auto id = path.substr(corpus_prefix.size() + 1);
        for (const auto& e : corpus)
            if (e.id == id) return {200, render(entry_json(e))};
        return failure(404, "not_found", "no corpus entry '" + id + "'");
    }
    for (const auto& route : kRoutes) {
        if (path != route.path) continue;
        if (method != "POST") return failure(405, "method_not_allowed", "use POST for " + path);
        if (body.size() > kMaxBodyBytes) return failure(413, "payload_too_large", "request body exceeds 8 MiB");
        json request;
        try {
            request = json::parse(body);
        } catch (const json::parse_error& e) {
            return failure(400, "invalid_request", std::string("body is not valid JSON: ") + e.what());
        }
        try {
            return {200, render(analyze(route.kind, request))};
        } catch (const Error& e) {
            return {status_for(e), render(error_report(e))};
        } catch (const std::exception& e) {
            return {500, render(error_report(e))};
        }
    }
    return failure(404, "not_found", "no endpoint " + path);
}

struct Service::Impl {
    ServiceOptions options;
    std::vector<CorpusEntry> corpus;
    httplib::Server server;
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
    if (options.allowed_origin.empty()) {
        const char* env = std::getenv("EGP_ALLOWED_ORIGIN");
        options.allowed_origin = env && *env ? env : "*";
    }
    if (options.corpus_dir.empty()) options.corpus_dir = default_corpus_dir();
    impl_->corpus = load_corpus(options.corpus_dir);
    impl_->options = std::move(options);

    auto& svr = impl_->server;
    const auto* corpus = &impl_->corpus;
    svr.set_payload_max_length(kMaxBodyBytes);
    svr.set_default_headers({
        {"Access-Control-Allow-Origin", impl_->options.allowed_origin},
        {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
        {"Access-Control-Allow-Headers", "Content-Type"},
        {"Vary", "Origin"},
    });
    auto dispatch = [corpus](const httplib::Request& req, httplib::Response& res) {
        auto result = handle_request(req.method, req.path, req.body, *corpus);
        res.status = result.status;
        res.set_content(std::move(result.body), "application/json");
    };
    const std::string any = R"(/.*)";
    svr.Get(any, dispatch);
    svr.Post(any, dispatch);
    svr.Put(any, dispatch);
    svr.Delete(any, dispatch);
    svr.Options(any, [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        auto result = res.status == 413 ? failure(413, "payload_too_large", "request body exceeds 8 MiB")
                                        : failure(res.status, "http_error", "request failed");
        res.set_content(std::move(result.body), "application/json");
    });
}

Service::~Service() { stop(); }

int Service::bind() {
    auto& svr = impl_->server;
    const auto& opt = impl_->options;
    if (opt.port == 0) {
        const int port = svr.bind_to_any_port(opt.host);
        if (port < 0) throw Error(ErrorCode::io_error, "cannot bind " + opt.host);
        return port;
    }
    if (!svr.bind_to_port(opt.host, opt.port))
        throw Error(ErrorCode::io_error, "cannot bind " + opt.host + ":" + std::to_string(opt.port));
    return opt.port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
    if (impl_) impl_->server.stop();
}

} // namespace egp
