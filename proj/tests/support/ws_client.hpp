#pragma once

// Minimal web socket client for driving the service in tests. One I/O
// thread keeps a read outstanding; send() hands writes to that thread.

#include <boost/asio/connect.hpp>
#include <boost/asio/executor_work_guard.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace flexlab::testing {

class WsClient {
public:
    /// Throws boost::system::system_error when the handshake is refused.
    WsClient(const std::string& host, unsigned short port, const std::string& target)
        : work_(boost::asio::make_work_guard(ioc_)), ws_(ioc_) {
        namespace net = boost::asio;
        net::ip::tcp::resolver resolver(ioc_);
        const auto results = resolver.resolve(host, std::to_string(port));
        boost::beast::get_lowest_layer(ws_).connect(results);
        ws_.handshake(host + ":" + std::to_string(port), target);
        ws_.text(true);
        read_next();
        thread_ = std::thread([this] { ioc_.run(); });
    }

    ~WsClient() {
        boost::asio::post(ioc_, [this] {
            if (!closed_flag_) {
                boost::beast::error_code ec;
                boost::beast::get_lowest_layer(ws_).socket().shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
                boost::beast::get_lowest_layer(ws_).socket().close(ec);
            }
        });
        work_.reset();
        if (thread_.joinable()) thread_.join();
    }

    WsClient(const WsClient&) = delete;
    WsClient& operator=(const WsClient&) = delete;

    /// Returns false if the write failed.
    bool send(std::string text) {
        auto payload = std::make_shared<std::string>(std::move(text));
        auto done = std::make_shared<std::promise<bool>>();
        auto fut = done->get_future();
        boost::asio::post(ioc_, [this, payload, done] {
            ws_.async_write(boost::asio::buffer(*payload),
                            [payload, done](boost::beast::error_code ec, std::size_t) { done->set_value(!ec); });
        });
        return fut.get();
    }

    /// Next text frame, or empty on timeout or once the stream has closed.
    std::optional<std::string> recv(std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
        std::unique_lock lk(mu_);
        cv_.wait_for(lk, timeout, [&] { return !inbox_.empty() || closed_; });
        if (inbox_.empty()) return std::nullopt;
        std::string s = std::move(inbox_.front());
        inbox_.pop_front();
        return s;
    }

    bool closed() const {
        std::lock_guard lk(mu_);
        return closed_ && inbox_.empty();
    }

    /// True when the server ended the stream with a normal close frame.
    bool closed_normally() const {
        std::lock_guard lk(mu_);
        return normal_close_;
    }

private:
    void read_next() {
        ws_.async_read(buffer_, [this](boost::beast::error_code ec, std::size_t) {
            std::lock_guard lk(mu_);
            if (ec) {
                closed_ = true;
                closed_flag_ = true;
                normal_close_ = ec == boost::beast::websocket::error::closed &&
                                ws_.reason().code == boost::beast::websocket::close_code::normal;
                cv_.notify_all();
                return;
            }
            inbox_.push_back(boost::beast::buffers_to_string(buffer_.data()));
            buffer_.consume(buffer_.size());
            cv_.notify_all();
            read_next();
        });
    }

    boost::asio::io_context ioc_;
    boost::asio::executor_work_guard<boost::asio::io_context::executor_type> work_;
    boost::beast::websocket::stream<boost::beast::tcp_stream> ws_;
    boost::beast::flat_buffer buffer_;
    std::thread thread_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::string> inbox_;
    bool closed_ = false;
    bool closed_flag_ = false;  // I/O thread only
    bool normal_close_ = false;
};

}  // namespace flexlab::testing
