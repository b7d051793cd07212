// flexlab: headless runs, config validation and the live session service.

#include "flexlab/config.hpp"
#include "flexlab/error.hpp"
#include "flexlab/export.hpp"
#include "flexlab/server.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitBind = 4;
constexpr int kExitIo = 5;

void report(std::string_view code, std::string_view message) {
    std::cerr << "code: " << code << ": " << message << '\n';
}

int report_validation(const flexlab::ValidationError& e) {
    for (const auto& v : e.violations()) report("validation", v);
    return kExitValidation;
}

void configure_logging() {
    // stdout carries command output only
    spdlog::set_default_logger(spdlog::stderr_color_mt("flexlab"));
    const char* level = std::getenv("FLEXLAB_LOG");
    spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

int cmd_run(const std::string& config_path, const std::string& script_path, const std::string& out_dir) {
    using namespace flexlab;
    try {
        const SimConfig config = load_config(config_path);
        const ScenarioScript script = script_path.empty() ? ScenarioScript{} : load_script(script_path);
        const RunResult result = run_day(config, script);
        write_run_files(out_dir, result.frames, result.summary, result.command_log);
        write_file(std::filesystem::path(out_dir) / "replay.json",
                   to_json(script_from_log(result.command_log)).dump(2) + "\n");
        std::cout << format_summary_table(result.summary);
        return kExitOk;
    } catch (const ValidationError& e) {
        return report_validation(e);
    } catch (const ModelDivergence& e) {
        report(to_string(e.code()), e.what());
        return kExitDivergence;
    } catch (const Error& e) {
        report(to_string(e.code()), e.what());
        return e.code() == ErrorCode::parse_error ? kExitValidation : kExitIo;
    }
}

int cmd_validate(const std::string& config_path) {
    const auto violations = flexlab::validate_config_file(config_path);
    for (const auto& v : violations) report("validation", v);
    if (!violations.empty()) return kExitValidation;
    std::cout << "ok\n";
    return kExitOk;
}

int cmd_serve(const std::string& config_path, const std::string& address, unsigned short port, double speed,
              const std::string& out_dir) {
    using namespace flexlab;
    ServiceOptions options;
    try {
        options.default_config = load_config(config_path);
        options.session.config_base_dir = std::filesystem::path(config_path).parent_path();
        options.session.speed_min_per_s = speed;
        options.session.persist_dir = out_dir;
        Pacer probe(speed, options.default_config.dt_s);
    } catch (const ValidationError& e) {
        return report_validation(e);
    } catch (const Error& e) {
        report(to_string(e.code()), e.what());
        return e.code() == ErrorCode::validation || e.code() == ErrorCode::parse_error ? kExitValidation : kExitIo;
    }

    auto registry = std::make_shared<SessionRegistry>(std::move(options));
    std::unique_ptr<Server> server;
    try {
        server = std::make_unique<Server>(registry, address, port);
    } catch (const Error& e) {
        report("bind", e.what());
        return kExitBind;
    }
    server->start();
    spdlog::info("dashboard: http://{}:{}/", address, server->port());
    // Scripts that start the service read the bound port from here.
    std::cout << "listening on " << address << ':' << server->port() << std::endl;
    server->run_until_signal();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"flexlab: HVAC demand-flexibility simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string script_path;
    std::string out_dir = "out";
    std::string address = "127.0.0.1";
    unsigned short port = 8080;
    double speed = 10.0;

    auto* run = app.add_subcommand("run", "Run one scripted day headless and write exports");
    run->add_option("--config", config_path, "Config document")->required()->check(CLI::ExistingFile);
    run->add_option("--script", script_path, "Scenario script (JSON or command-log NDJSON)")
        ->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();

    auto* validate = app.add_subcommand("validate", "Check a config document without running");
    validate->add_option("--config", config_path, "Config document")->required()->check(CLI::ExistingFile);

    auto* serve = app.add_subcommand("serve", "Start the live session service");
    serve->add_option("--config", config_path, "Default session config")->required()->check(CLI::ExistingFile);
    serve->add_option("--port", port, "TCP port, 0 for any free port")->capture_default_str();
    serve->add_option("--address", address, "Bind address")->capture_default_str();
    serve->add_option("--speed", speed, "Initial speed in simulated minutes per second")->capture_default_str();
    serve->add_option("--out", out_dir, "Directory for finished runs")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        // A missing --config or --script file is an input problem, not a usage one.
        if (dynamic_cast<const CLI::ValidationError*>(&e)) {
            report("validation", e.what());
            return kExitValidation;
        }
        report("usage", e.what());
        return kExitUsage;
    }

    if (*run) return cmd_run(config_path, script_path, out_dir);
    if (*validate) return cmd_validate(config_path);
    return cmd_serve(config_path, address, port, speed, out_dir);
}
