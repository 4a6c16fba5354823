#pragma once

#include <map>
#include <memory>
#include <string>

#include "gamdiag/session.hpp"

namespace httplib {
class Server;
}

namespace gamdiag {

struct HttpResponse {
    int status = 200;
    std::string body;
};

using QueryParams = std::multimap<std::string, std::string>;

/// Routes one GET request to the engine. Errors map to 400 (bad
/// parameters), 404 (unknown column or path), 503 (busy) and 500.
HttpResponse handle_request(const Session& session, const std::string& path,
                            const QueryParams& params);

class DiagnosticsServer {
public:
    explicit DiagnosticsServer(std::shared_ptr<const Session> session);
    ~DiagnosticsServer();
    DiagnosticsServer(const DiagnosticsServer&) = delete;
    DiagnosticsServer& operator=(const DiagnosticsServer&) = delete;

    /// Binds (port 0 picks a free port) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    bool run();
    void stop();

private:
    std::shared_ptr<const Session> session_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace gamdiag
