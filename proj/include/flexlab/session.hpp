#pragma once

#include "flexlab/codec.hpp"
#include "flexlab/engine.hpp"
#include "flexlab/pacing.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

namespace flexlab {

enum class Phase { configured, running, paused, finished };

std::string_view to_string(Phase phase) noexcept;

/// Outbound mailbox for one telemetry consumer. Producers never block on
/// it: with coalescing on, a queued telemetry message that has not been
/// taken yet is replaced by the newer one. Other message types are never
/// dropped.
class Subscriber {
public:
    using Notify = std::function<void()>;

    void push(WireMessage msg, bool coalesce);
    void close();

    /// Called after every push and on close. Set before the subscriber is
    /// registered with a session.
    void set_notify(Notify notify);
    /// After this returns the callback is never invoked again.
    void clear_notify();

    std::optional<WireMessage> try_pop();
    /// Blocks up to `timeout`. Empty when timed out or closed and drained.
    std::optional<WireMessage> pop(std::chrono::milliseconds timeout);

    bool closed() const;
    bool drained() const;

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<WireMessage> queue_;
    bool closed_ = false;
    Notify notify_;
};

struct SessionOptions {
    double speed_min_per_s = 10.0;
    /// Above this emission rate telemetry is coalesced per subscriber.
    double coalesce_above_ticks_per_s = 20.0;
    /// When set, finished runs are written to `<persist_dir>/<session id>/`.
    std::filesystem::path persist_dir;
    /// Base for relative weather paths in `configure` documents.
    std::filesystem::path config_base_dir;
};

/// One simulation session: config, engine, live pacing thread, command log
/// and subscribers. All client messages go through handle(), which is
/// serialised per session; the engine thread only talks to subscribers via
/// their mailboxes.
class Session {
public:
    Session(std::string id, SimConfig config, SessionOptions options);
    ~Session();

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const std::string& id() const noexcept { return id_; }
    Phase phase() const;
    SimConfig config() const;

    /// Returns exactly one ack or error echoing msg.req.
    WireMessage handle(const WireMessage& msg);
    /// Decodes, handles and encodes; malformed input yields an error reply.
    std::string handle_text(std::string_view text);

    /// Registers a subscriber. A running or paused session first sends the
    /// latest frame as a snapshot; a finished one sends its summary and
    /// closes the stream.
    std::shared_ptr<Subscriber> subscribe(Subscriber::Notify notify = {});
    void unsubscribe(const std::shared_ptr<Subscriber>& sub);
    std::size_t subscriber_count() const;

    std::vector<TelemetryFrame> frames() const;
    std::vector<LedgerEntry> command_log() const;
    std::optional<RunSummary> summary() const;

    /// Throw Error(run_incomplete) before the run has finished.
    std::string export_csv() const;
    std::string summary_json() const;

    bool wait_finished(std::chrono::milliseconds timeout) const;

private:
    WireMessage start(const Json& req);
    WireMessage reset(const Json& req);
    void run_loop();
    void finish_locked();
    void broadcast_locked(const WireMessage& msg, bool droppable);
    void stop_worker();

    const std::string id_;
    const SessionOptions options_;

    std::mutex control_mu_;  // serialises handle()
    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    Phase phase_ = Phase::configured;
    SimConfig config_;
    std::unique_ptr<Engine> engine_;
    Pacer pacer_;
    std::optional<RunSummary> summary_;
    std::string failure_;
    std::vector<std::shared_ptr<Subscriber>> subscribers_;
    std::thread worker_;
    bool stop_ = false;
    std::uint64_t wake_ = 0;
};

struct ServiceOptions {
    SimConfig default_config;
    SessionOptions session;
};

/// Concurrent create/lookup of sessions keyed by random 128-bit ids.
class SessionRegistry {
public:
    explicit SessionRegistry(ServiceOptions options);

    /// A null or empty document uses the default config. Throws
    /// ValidationError listing every violated invariant.
    std::shared_ptr<Session> create(const Json& config_doc);
    std::shared_ptr<Session> find(const std::string& id) const;
    std::size_t size() const;

    const ServiceOptions& options() const noexcept { return options_; }

private:
    ServiceOptions options_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

std::string random_session_id();

}  // namespace flexlab
