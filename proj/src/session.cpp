#include "flexlab/session.hpp"

#include "flexlab/config.hpp"
#include "flexlab/error.hpp"
#include "flexlab/export.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <random>

namespace flexlab {

std::string_view to_string(Phase phase) noexcept {
    switch (phase) {
        case Phase::configured: return "configured";
        case Phase::running: return "running";
        case Phase::paused: return "paused";
        case Phase::finished: return "finished";
    }
    return "configured";
}

// ---------------------------------------------------------------------------
// Subscriber

// The notify callback runs under mu_ so clear_notify() is a hard barrier.
// Callbacks must not call back into this subscriber.

void Subscriber::set_notify(Notify notify) {
    std::lock_guard lk(mu_);
    notify_ = std::move(notify);
}

void Subscriber::clear_notify() {
    std::lock_guard lk(mu_);
    notify_ = nullptr;
}

void Subscriber::push(WireMessage msg, bool coalesce) {
    std::lock_guard lk(mu_);
    if (closed_) return;
    if (coalesce && msg.type == MessageType::telemetry && !queue_.empty() &&
        queue_.back().type == MessageType::telemetry) {
        queue_.back() = std::move(msg);
    } else {
        queue_.push_back(std::move(msg));
    }
    cv_.notify_all();
    if (notify_) notify_();
}

void Subscriber::close() {
    std::lock_guard lk(mu_);
    if (closed_) return;
    closed_ = true;
    cv_.notify_all();
    if (notify_) notify_();
}

std::optional<WireMessage> Subscriber::try_pop() {
    std::lock_guard lk(mu_);
    if (queue_.empty()) return std::nullopt;
    WireMessage msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
}

std::optional<WireMessage> Subscriber::pop(std::chrono::milliseconds timeout) {
    std::unique_lock lk(mu_);
    cv_.wait_for(lk, timeout, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    WireMessage msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
}

bool Subscriber::closed() const {
    std::lock_guard lk(mu_);
    return closed_;
}

bool Subscriber::drained() const {
    std::lock_guard lk(mu_);
    return closed_ && queue_.empty();
}

// ---------------------------------------------------------------------------
// Session

Session::Session(std::string id, SimConfig config, SessionOptions options)
    : id_(std::move(id)),
      options_(std::move(options)),
      config_(std::move(config)),
      pacer_(options_.speed_min_per_s, config_.dt_s) {
    if (auto v = config_.violations(); !v.empty()) throw ValidationError(std::move(v));
}

Session::~Session() {
    stop_worker();
    std::lock_guard lk(mu_);
    for (auto& s : subscribers_) s->close();
}

Phase Session::phase() const {
    std::lock_guard lk(mu_);
    return phase_;
}

SimConfig Session::config() const {
    std::lock_guard lk(mu_);
    return config_;
}

void Session::stop_worker() {
    {
        std::lock_guard lk(mu_);
        stop_ = true;
    }
    cv_.notify_all();
    if (worker_.joinable()) worker_.join();
    std::lock_guard lk(mu_);
    stop_ = false;
}

void Session::broadcast_locked(const WireMessage& msg, bool droppable) {
    const bool coalesce = droppable && pacer_.ticks_per_second() > options_.coalesce_above_ticks_per_s;
    for (auto& s : subscribers_) s->push(msg, coalesce);
}

void Session::finish_locked() {
    phase_ = Phase::finished;
    summary_ = summarize(engine_->frames());
    if (!options_.persist_dir.empty()) {
        try {
            write_run_files(options_.persist_dir / id_, engine_->frames(), *summary_, engine_->command_log());
        } catch (const Error& e) {
            spdlog::error("session {}: {}", id_, e.what());
        }
    }
    broadcast_locked(make_phase(to_string(Phase::finished)), false);
    broadcast_locked(make_summary(*summary_), false);
    for (auto& s : subscribers_) s->close();
    spdlog::info("session {} finished", id_);
    cv_.notify_all();
}

void Session::run_loop() {
    std::unique_lock lk(mu_);
    auto last_tick = std::chrono::steady_clock::time_point{};
    while (true) {
        cv_.wait(lk, [&] { return stop_ || !pacer_.paused(); });
        if (stop_) return;

        // Recomputed every pass so a speed change applies to the pending wait.
        const auto due = last_tick + pacer_.tick_interval();
        if (std::chrono::steady_clock::now() < due) {
            const auto seen = wake_;
            cv_.wait_until(lk, due, [&] { return stop_ || pacer_.paused() || wake_ != seen; });
            continue;
        }

        last_tick = std::chrono::steady_clock::now();
        try {
            const TelemetryFrame& frame = engine_->step();
            broadcast_locked(make_telemetry(frame), true);
        } catch (const ModelDivergence& e) {
            failure_ = e.what();
            phase_ = Phase::finished;
            spdlog::error("session {}: {}", id_, failure_);
            broadcast_locked(make_error(Json(), to_string(e.code()), e.what()), false);
            broadcast_locked(make_phase(to_string(Phase::finished)), false);
            for (auto& s : subscribers_) s->close();
            cv_.notify_all();
            return;
        }
        if (engine_->finished()) {
            finish_locked();
            return;
        }
    }
}

WireMessage Session::start(const Json& req) {
    std::unique_lock lk(mu_);
    switch (phase_) {
        case Phase::running:
            return make_ack(req);
        case Phase::paused:
            return make_error(req, "invalid_phase", "session is paused; use resume");
        case Phase::finished:
            return make_error(req, "invalid_phase", "run finished; reset to start again");
        case Phase::configured:
            break;
    }
    engine_ = std::make_unique<Engine>(config_);
    failure_.clear();
    summary_.reset();
    pacer_.resume();
    phase_ = Phase::running;
    broadcast_locked(make_phase(to_string(phase_)), false);
    lk.unlock();
    if (worker_.joinable()) worker_.join();
    worker_ = std::thread([this] { run_loop(); });
    return make_ack(req);
}

WireMessage Session::reset(const Json& req) {
    stop_worker();
    std::lock_guard lk(mu_);
    engine_.reset();
    summary_.reset();
    failure_.clear();
    pacer_.resume();
    phase_ = Phase::configured;
    broadcast_locked(make_phase(to_string(phase_)), false);
    return make_ack(req);
}

WireMessage Session::handle(const WireMessage& msg) {
    std::lock_guard control(control_mu_);
    const Json& req = msg.req;
    try {
        switch (msg.type) {
            case MessageType::configure: {
                std::lock_guard lk(mu_);
                if (phase_ != Phase::configured)
                    return make_error(req, "invalid_phase", "configure is only accepted before start");
                const auto it = msg.body.find("config");
                if (it == msg.body.end()) return make_error(req, "parse_error", "configure: missing field config");
                SimConfig next = config_from_json(*it, options_.config_base_dir);
                Pacer probe(pacer_.speed(), next.dt_s);
                config_ = std::move(next);
                pacer_ = probe;
                return make_ack(req);
            }
            case MessageType::start:
                return start(req);
            case MessageType::pause: {
                std::lock_guard lk(mu_);
                if (phase_ == Phase::paused) return make_ack(req);
                if (phase_ != Phase::running) return make_error(req, "not_running", "not running");
                pacer_.pause();
                phase_ = Phase::paused;
                broadcast_locked(make_phase(to_string(phase_)), false);
                cv_.notify_all();
                return make_ack(req);
            }
            case MessageType::resume: {
                std::lock_guard lk(mu_);
                if (phase_ == Phase::running) return make_ack(req);
                if (phase_ != Phase::paused) return make_error(req, "not_running", "not running");
                pacer_.resume();
                phase_ = Phase::running;
                broadcast_locked(make_phase(to_string(phase_)), false);
                cv_.notify_all();
                return make_ack(req);
            }
            case MessageType::set_speed: {
                const double speed = number_field(msg.body, "speed", "speed");
                std::lock_guard lk(mu_);
                pacer_.set_speed(speed);
                ++wake_;
                cv_.notify_all();
                return make_ack(req);
            }
            case MessageType::override_command: {
                const auto it = msg.body.find("command");
                if (it == msg.body.end()) return make_error(req, "parse_error", "override: missing field command");
                const OverrideCommand cmd = override_from_json(*it);
                std::lock_guard lk(mu_);
                if (phase_ != Phase::running && phase_ != Phase::paused)
                    return make_error(req, "not_running", "not running");
                engine_->enqueue(cmd);
                return make_ack(req);
            }
            case MessageType::reset:
                return reset(req);
            default:
                return make_error(req, "parse_error",
                                  "unexpected message type " + std::string(to_string(msg.type)));
        }
    } catch (const ValidationError& e) {
        return make_error(req, to_string(e.code()), e.what());
    } catch (const Error& e) {
        return make_error(req, to_string(e.code()), e.what());
    }
}

std::string Session::handle_text(std::string_view text) {
    Json req;
    WireMessage msg;
    try {
        msg = decode(text, &req);
    } catch (const Error& e) {
        return encode(make_error(req, to_string(e.code()), e.what()));
    }
    return encode(handle(msg));
}

std::shared_ptr<Subscriber> Session::subscribe(Subscriber::Notify notify) {
    auto sub = std::make_shared<Subscriber>();
    sub->set_notify(std::move(notify));
    std::lock_guard lk(mu_);
    switch (phase_) {
        case Phase::running:
        case Phase::paused:
            // The snapshot comes first so a late joiner can draw immediately.
            if (engine_ && !engine_->frames().empty()) sub->push(make_telemetry(engine_->frames().back()), false);
            sub->push(make_phase(to_string(phase_)), false);
            break;
        case Phase::finished:
            sub->push(make_phase(to_string(phase_)), false);
            if (summary_) sub->push(make_summary(*summary_), false);
            sub->close();
            return sub;
        case Phase::configured:
            sub->push(make_phase(to_string(phase_)), false);
            break;
    }
    subscribers_.push_back(sub);
    return sub;
}

void Session::unsubscribe(const std::shared_ptr<Subscriber>& sub) {
    sub->clear_notify();
    std::lock_guard lk(mu_);
    std::erase(subscribers_, sub);
}

std::size_t Session::subscriber_count() const {
    std::lock_guard lk(mu_);
    return subscribers_.size();
}

std::vector<TelemetryFrame> Session::frames() const {
    std::lock_guard lk(mu_);
    if (!engine_) return {};
    return {engine_->frames().begin(), engine_->frames().end()};
}

std::vector<LedgerEntry> Session::command_log() const {
    std::lock_guard lk(mu_);
    if (!engine_) return {};
    return engine_->command_log();
}

std::optional<RunSummary> Session::summary() const {
    std::lock_guard lk(mu_);
    return summary_;
}

std::string Session::export_csv() const {
    std::lock_guard lk(mu_);
    if (!summary_) throw Error(ErrorCode::run_incomplete, "run incomplete");
    return flexlab::export_csv(engine_->frames());
}

std::string Session::summary_json() const {
    std::lock_guard lk(mu_);
    if (!summary_) throw Error(ErrorCode::run_incomplete, "run incomplete");
    return flexlab::summary_json(*summary_);
}

bool Session::wait_finished(std::chrono::milliseconds timeout) const {
    std::unique_lock lk(mu_);
    return cv_.wait_for(lk, timeout, [&] { return phase_ == Phase::finished; });
}

// ---------------------------------------------------------------------------
// Registry

std::string random_session_id() {
    static thread_local std::mt19937_64 rng{[] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }()};
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(rng()));
    return buf;
}

SessionRegistry::SessionRegistry(ServiceOptions options) : options_(std::move(options)) {
    if (auto v = options_.default_config.violations(); !v.empty()) throw ValidationError(std::move(v));
}

std::shared_ptr<Session> SessionRegistry::create(const Json& config_doc) {
    SimConfig config = (config_doc.is_null() || (config_doc.is_object() && config_doc.empty()))
                           ? options_.default_config
                           : config_from_json(config_doc, options_.session.config_base_dir);
    std::unique_lock lk(mu_);
    std::string id;
    do {
        id = random_session_id();
    } while (sessions_.contains(id));
    auto session = std::make_shared<Session>(id, std::move(config), options_.session);
    sessions_.emplace(id, session);
    spdlog::info("session {} created", id);
    return session;
}

std::shared_ptr<Session> SessionRegistry::find(const std::string& id) const {
    std::shared_lock lk(mu_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::size_t SessionRegistry::size() const {
    std::shared_lock lk(mu_);
    return sessions_.size();
}

}  // namespace flexlab
