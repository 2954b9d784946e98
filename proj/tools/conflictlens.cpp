// Operator entrypoint: serve the API, move session logs in and out of a data
// dir, and record or replay provider fixtures.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "conflictlens/error.hpp"
#include "conflictlens/gateway/provider.hpp"
#include "conflictlens/service/event_store.hpp"
#include "conflictlens/service/http_api.hpp"
#include "conflictlens/service/service.hpp"

namespace cl = conflictlens;
namespace fs = std::filesystem;

namespace {

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::string catalog_dir = CONFLICTLENS_DATA_DIR;
  std::string provider_config;
  std::string fixtures;
  std::string record_out;
};

void add_serve_flags(CLI::App* cmd, ServeArgs& a) {
  cmd->add_option("--host", a.host, "Interface to bind")->capture_default_str();
  cmd->add_option("--port", a.port, "Port to bind; 0 picks a free port")->capture_default_str();
  cmd->add_option("--data-dir", a.data_dir, "Session store root")->required();
  cmd->add_option("--catalog-dir", a.catalog_dir, "Catalogs, templates and lexicons")->capture_default_str();
}

cl::gateway::ProviderConfig live_config(const std::string& file) {
  auto cfg = file.empty() ? cl::gateway::provider_config_from_env() : cl::gateway::load_provider_config(file);
  if (cfg.base_url.empty()) throw cl::Error(cl::ErrorCode::ConfigError, "provider base_url is not configured");
  if (cfg.model_name.empty()) throw cl::Error(cl::ErrorCode::ConfigError, "provider model_name is not configured");
  return cfg;
}

// Blocks SIGINT/SIGTERM in every thread; a dedicated thread waits for them
// and stops the server.
int run_server(const ServeArgs& a, std::shared_ptr<cl::gateway::Provider> provider, int retry_budget,
               const std::function<void()>& on_exit = {}) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  cl::service::ServiceConfig config;
  config.data_dir = a.data_dir;
  config.catalog_dir = a.catalog_dir;
  cl::service::ConflictLensService svc(config, std::move(provider), {retry_budget});
  cl::service::ApiServer server(svc);
  const int port = server.bind(a.host, a.port);
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.listen();
  // listen() also returns if the socket fails; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  if (on_exit) on_exit();
  return 0;
}

std::string read_all(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conflictlens: conflict-resolution training service"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  add_serve_flags(serve_cmd, serve);
  serve_cmd->add_option("--provider-config", serve.provider_config, "Provider JSON (no secrets; key via env)");
  serve_cmd->add_option("--fixtures", serve.fixtures, "Serve from a fixture file instead of a live provider");

  auto* session_cmd = app.add_subcommand("session", "Session log tools");
  session_cmd->require_subcommand(1);
  std::string session_id, import_file, session_data_dir;
  auto* export_cmd = session_cmd->add_subcommand("export", "Write a session's event log to stdout");
  export_cmd->add_option("id", session_id, "Session id")->required();
  export_cmd->add_option("--data-dir", session_data_dir, "Session store root")->required();
  auto* import_cmd = session_cmd->add_subcommand("import", "Load an exported event log");
  import_cmd->add_option("file", import_file, "Event log, or - for stdin")->required();
  import_cmd->add_option("--data-dir", session_data_dir, "Session store root")->required();

  auto* fixtures_cmd = app.add_subcommand("fixtures", "Capture or replay provider responses");
  fixtures_cmd->require_subcommand(1);
  ServeArgs record, replay;
  auto* record_cmd = fixtures_cmd->add_subcommand("record", "Serve against the live provider and save fixtures");
  add_serve_flags(record_cmd, record);
  record_cmd->add_option("--provider-config", record.provider_config, "Provider JSON");
  record_cmd->add_option("--out", record.record_out, "Fixture file written on shutdown")->required();
  auto* replay_cmd = fixtures_cmd->add_subcommand("replay", "Serve from recorded fixtures");
  add_serve_flags(replay_cmd, replay);
  replay_cmd->add_option("--fixtures", replay.fixtures, "Fixture file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve_cmd->parsed()) {
      if (!serve.fixtures.empty()) {
        return run_server(serve, std::make_shared<cl::gateway::MockProvider>(cl::gateway::load_fixtures(serve.fixtures)),
                          2);
      }
      const auto cfg = live_config(serve.provider_config);
      return run_server(serve, std::make_shared<cl::gateway::HttpProvider>(cfg), cfg.retry_budget);
    }
    if (export_cmd->parsed()) {
      cl::service::EventStore store(session_data_dir);
      if (!store.exists(session_id)) {
        std::cerr << "error: no session " << session_id << " in " << session_data_dir << "\n";
        return 1;
      }
      std::cout << store.export_log(session_id);
      return 0;
    }
    if (import_cmd->parsed()) {
      std::string log;
      if (import_file == "-") {
        log = read_all(std::cin);
      } else {
        std::ifstream in(import_file, std::ios::binary);
        if (!in) {
          std::cerr << "error: cannot read " << import_file << "\n";
          return 1;
        }
        log = read_all(in);
      }
      cl::service::EventStore store(session_data_dir);
      const auto s = store.import_log(log);
      std::cout << s.session_id << "\n";
      return 0;
    }
    if (record_cmd->parsed()) {
      const auto cfg = live_config(record.provider_config);
      auto recorder = std::make_shared<cl::gateway::RecordingProvider>(std::make_shared<cl::gateway::HttpProvider>(cfg));
      return run_server(record, recorder, cfg.retry_budget, [&] {
        std::ofstream out(record.record_out);
        out << cl::gateway::fixtures_to_json(recorder->recorded()).dump(2) << "\n";
        std::cerr << "fixtures written to " << record.record_out << "\n";
      });
    }
    if (replay_cmd->parsed()) {
      return run_server(replay,
                        std::make_shared<cl::gateway::MockProvider>(cl::gateway::load_fixtures(replay.fixtures)), 2);
    }
  } catch (const cl::Error& e) {
    std::cerr << "error: " << cl::to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == cl::ErrorCode::SessionNotFound ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
