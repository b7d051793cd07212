#pragma once

#include "flexlab/session.hpp"

#include <memory>
#include <string>

namespace flexlab {

/// HTTP + web socket front end for a SessionRegistry.
///
///   GET  /healthz
///   POST /sessions                      body: config document or empty
///   GET  /sessions/<id>/export.csv
///   GET  /sessions/<id>/summary.json
///   GET  /ws/session/<id>               web socket upgrade
class Server {
public:
    /// Binds immediately; port 0 picks a free port. Throws Error(io_error)
    /// when the address cannot be bound.
    Server(std::shared_ptr<SessionRegistry> registry, const std::string& address, unsigned short port,
           int threads = 2);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    unsigned short port() const noexcept;

    /// Starts the I/O threads and returns.
    void start();
    /// Blocks until SIGINT/SIGTERM or stop().
    void run_until_signal();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace flexlab
