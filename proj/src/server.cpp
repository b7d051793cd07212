#include "flexlab/server.hpp"

#include "flexlab/error.hpp"

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include <deque>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace flexlab {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

Response make_response(const Request& req, http::status status, std::string body, std::string_view content_type) {
    Response res{status, req.version()};
    res.set(http::field::server, "flexlab");
    res.set(http::field::content_type, beast::string_view(content_type.data(), content_type.size()));
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
}

Response json_response(const Request& req, http::status status, const Json& body) {
    return make_response(req, status, body.dump() + "\n", "application/json");
}

Response error_response(const Request& req, http::status status, std::string_view code, std::string_view message) {
    Json body;
    body["error"] = std::string(code);
    body["message"] = std::string(message);
    return json_response(req, status, body);
}

std::string_view target_of(const Request& req) {
    const auto t = req.target();
    return {t.data(), t.size()};
}

/// Splits "/a/b/c" into {"a","b","c"}, ignoring any query string.
std::vector<std::string_view> path_segments(std::string_view target) {
    if (const auto q = target.find('?'); q != std::string_view::npos) target = target.substr(0, q);
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < target.size()) {
        if (target[pos] == '/') {
            ++pos;
            continue;
        }
        const auto next = target.find('/', pos);
        const auto end = next == std::string_view::npos ? target.size() : next;
        out.push_back(target.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

class WsConnection;

/// Live web socket connections, so stop() can detach them from their
/// sessions before the io_context goes away.
struct ConnectionSet {
    std::mutex mu;
    std::vector<std::weak_ptr<WsConnection>> live;

    void add(const std::shared_ptr<WsConnection>& c) {
        std::lock_guard lk(mu);
        std::erase_if(live, [](const auto& w) { return w.expired(); });
        live.push_back(c);
    }
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
public:
    WsConnection(tcp::socket&& socket, std::shared_ptr<Session> session)
        : ws_(std::move(socket)), session_(std::move(session)) {}

    ~WsConnection() { detach(); }

    void detach() {
        if (sub_) {
            session_->unsubscribe(sub_);
            sub_.reset();
        }
    }

    void run(Request req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.text(true);
        ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) {
            spdlog::debug("ws accept failed: {}", ec.message());
            return;
        }
        std::weak_ptr<WsConnection> weak = shared_from_this();
        auto executor = ws_.get_executor();
        // Runs on the engine thread: only hop onto this connection's strand.
        sub_ = session_->subscribe([weak, executor] {
            net::post(executor, [weak] {
                if (auto self = weak.lock()) self->drain();
            });
        });
        drain();
        do_read();
    }

    void do_read() {
        ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            detach();
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        if (!closing_) enqueue(session_->handle_text(text));
        do_read();
    }

    void drain() {
        if (!sub_) return;
        while (auto msg = sub_->try_pop()) enqueue(encode(*msg));
        maybe_close();
    }

    void enqueue(std::string text) {
        if (closing_) return;
        outbox_.push_back(std::move(text));
        if (!writing_) do_write();
    }

    void do_write() {
        writing_ = true;
        ws_.async_write(net::buffer(outbox_.front()),
                        beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        writing_ = false;
        if (ec) {
            detach();
            return;
        }
        outbox_.pop_front();
        if (!outbox_.empty()) {
            do_write();
            return;
        }
        maybe_close();
    }

    /// After the final summary has gone out, close the stream normally.
    void maybe_close() {
        if (closing_ || writing_ || !outbox_.empty() || !sub_ || !sub_->drained()) return;
        closing_ = true;
        ws_.async_close(websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) { self->detach(); });
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::shared_ptr<Session> session_;
    std::shared_ptr<Subscriber> sub_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    bool writing_ = false;
    bool closing_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
public:
    HttpConnection(tcp::socket&& socket, std::shared_ptr<SessionRegistry> registry,
                   std::shared_ptr<ConnectionSet> connections)
        : stream_(std::move(socket)), registry_(std::move(registry)), connections_(std::move(connections)) {}

    void run() {
        net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpConnection::do_read, shared_from_this()));
    }

private:
    void do_read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec == http::error::end_of_stream) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        if (ec) return;

        if (websocket::is_upgrade(req_)) {
            const auto seg = path_segments(target_of(req_));
            if (seg.size() == 3 && seg[0] == "ws" && seg[1] == "session") {
                if (auto session = registry_->find(std::string(seg[2]))) {
                    stream_.expires_never();
                    auto ws = std::make_shared<WsConnection>(stream_.release_socket(), std::move(session));
                    connections_->add(ws);
                    ws->run(std::move(req_));
                    return;
                }
                send(error_response(req_, http::status::not_found, "not_found", "unknown session"));
                return;
            }
            send(error_response(req_, http::status::not_found, "not_found", "no web socket endpoint here"));
            return;
        }
        send(route());
    }

    Response route() {
        const auto seg = path_segments(target_of(req_));
        const auto method = req_.method();

        if (seg.size() == 1 && seg[0] == "healthz") {
            if (method != http::verb::get) return error_response(req_, http::status::method_not_allowed, "method", "GET only");
            return make_response(req_, http::status::ok, "ok\n", "text/plain");
        }
        if (seg.size() == 1 && seg[0] == "sessions") {
            if (method != http::verb::post)
                return error_response(req_, http::status::method_not_allowed, "method", "POST only");
            return create_session();
        }
        if (seg.size() == 3 && seg[0] == "sessions") {
            if (method != http::verb::get) return error_response(req_, http::status::method_not_allowed, "method", "GET only");
            const auto session = registry_->find(std::string(seg[1]));
            if (!session) return error_response(req_, http::status::not_found, "not_found", "unknown session");
            try {
                if (seg[2] == "export.csv")
                    return make_response(req_, http::status::ok, session->export_csv(), "text/csv");
                if (seg[2] == "summary.json")
                    return make_response(req_, http::status::ok, session->summary_json(), "application/json");
            } catch (const Error& e) {
                if (e.code() == ErrorCode::run_incomplete)
                    return error_response(req_, http::status::conflict, to_string(e.code()), e.what());
                return error_response(req_, http::status::internal_server_error, to_string(e.code()), e.what());
            }
        }
        if (seg.empty()) {
            return make_response(req_, http::status::ok,
                                 "flexlab session service\n"
                                 "POST /sessions, GET /sessions/<id>/export.csv, GET /sessions/<id>/summary.json,\n"
                                 "web socket /ws/session/<id>\n",
                                 "text/plain");
        }
        return error_response(req_, http::status::not_found, "not_found", "no such endpoint");
    }

    Response create_session() {
        Json doc;
        const std::string& body = req_.body();
        if (body.find_first_not_of(" \t\r\n") != std::string::npos) {
            try {
                doc = Json::parse(body);
            } catch (const Json::parse_error& e) {
                return error_response(req_, http::status::bad_request, "parse_error",
                                      "malformed JSON at byte " + std::to_string(e.byte));
            }
        }
        try {
            const auto session = registry_->create(doc);
            Json out;
            out["id"] = session->id();
            return json_response(req_, http::status::created, out);
        } catch (const ValidationError& e) {
            Json out;
            out["error"] = std::string(to_string(e.code()));
            out["violations"] = e.violations();
            return json_response(req_, http::status::bad_request, out);
        } catch (const Error& e) {
            return error_response(req_, http::status::bad_request, to_string(e.code()), e.what());
        }
    }

    void send(Response res) {
        auto sp = std::make_shared<Response>(std::move(res));
        http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
            if (ec) return;
            if (sp->need_eof()) {
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                return;
            }
            self->do_read();
        });
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    Request req_;
    std::shared_ptr<SessionRegistry> registry_;
    std::shared_ptr<ConnectionSet> connections_;
};

}  // namespace

struct Server::Impl {
    Impl(std::shared_ptr<SessionRegistry> reg, int n) : registry(std::move(reg)), ioc(n), acceptor(ioc), threads_wanted(n) {}

    void do_accept() {
        acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != net::error::operation_aborted) spdlog::warn("accept: {}", ec.message());
            } else {
                std::make_shared<HttpConnection>(std::move(socket), registry, connections)->run();
            }
            if (acceptor.is_open()) do_accept();
        });
    }

    std::shared_ptr<SessionRegistry> registry;
    std::shared_ptr<ConnectionSet> connections = std::make_shared<ConnectionSet>();
    net::io_context ioc;
    tcp::acceptor acceptor;
    int threads_wanted;
    std::vector<std::thread> threads;
    unsigned short bound_port = 0;
    bool stopped = false;
};

Server::Server(std::shared_ptr<SessionRegistry> registry, const std::string& address, unsigned short port,
               int threads)
    : impl_(std::make_unique<Impl>(std::move(registry), threads < 1 ? 1 : threads)) {
    beast::error_code ec;
    const auto addr = net::ip::make_address(address, ec);
    if (ec) throw Error(ErrorCode::io_error, "bad address " + address + ": " + ec.message());
    const tcp::endpoint endpoint{addr, port};
    auto& acc = impl_->acceptor;
    if (acc.open(endpoint.protocol(), ec); ec) throw Error(ErrorCode::io_error, "open: " + ec.message());
    if (acc.set_option(net::socket_base::reuse_address(true), ec); ec)
        throw Error(ErrorCode::io_error, "set_option: " + ec.message());
    if (acc.bind(endpoint, ec); ec)
        throw Error(ErrorCode::io_error, "cannot bind " + address + ":" + std::to_string(port) + ": " + ec.message());
    if (acc.listen(net::socket_base::max_listen_connections, ec); ec)
        throw Error(ErrorCode::io_error, "listen: " + ec.message());
    impl_->bound_port = acc.local_endpoint().port();
}

Server::~Server() { stop(); }

unsigned short Server::port() const noexcept { return impl_->bound_port; }

void Server::start() {
    impl_->do_accept();
    for (int i = 0; i < impl_->threads_wanted; ++i) impl_->threads.emplace_back([this] { impl_->ioc.run(); });
}

void Server::run_until_signal() {
    net::io_context sig_ioc;
    net::signal_set signals(sig_ioc, SIGINT, SIGTERM);
    signals.async_wait([](beast::error_code, int sig) { spdlog::info("signal {}, shutting down", sig); });
    sig_ioc.run();
    stop();
}

void Server::stop() {
    if (impl_->stopped) return;
    impl_->stopped = true;
    impl_->ioc.stop();
    for (auto& t : impl_->threads)
        if (t.joinable()) t.join();
    // The pending accept is only ever touched by I/O threads, so close it after they exit.
    beast::error_code ec;
    impl_->acceptor.close(ec);
    // I/O threads are gone, so nothing else touches the connections now.
    std::lock_guard lk(impl_->connections->mu);
    for (auto& w : impl_->connections->live)
        if (auto c = w.lock()) c->detach();
}

}  // namespace flexlab
