#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "wotchat/service/annotation.hpp"

namespace httplib {
class Server;
}

namespace wotchat::service {

struct ServerOptions {
    std::filesystem::path static_dir;  // built UI bundle; empty or missing = API only
};

// GET  /api/matches?only_unclassified=&offset=&limit=
// GET  /api/matches/{id}/messages
// PUT  /api/messages/{id}/labels           {"labels": {...}, "annotator_id": "...", "version": n}
// POST /api/messages/{id}/clear-unknowns   {"annotator_id": "...", "version": n}
// Errors are {"error": code, "message": text} with 400, 404 or 409; a 409
// also carries "current_version".
class ApiServer {
public:
    ApiServer(AnnotationService& service, ServerOptions options = {});
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Port 0 picks a free port. Serves on a background thread.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    // Blocks until stop().
    bool listen(const std::string& host, int port);
    void stop();

private:
    AnnotationService& service_;
    ServerOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

// "host:port" -> parts. Throws std::invalid_argument.
std::pair<std::string, int> parse_bind_addr(const std::string& addr);

}  // namespace wotchat::service
