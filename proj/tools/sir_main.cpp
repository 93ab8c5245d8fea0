// sir: command-line front end for the slide feedback service.
#include <CLI11.hpp>

#include <pthread.h>

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include "sir/analytics/report.hpp"
#include "sir/api_server.hpp"
#include "sir/config.hpp"
#include "sir/error.hpp"
#include "sir/fsutil.hpp"
#include "sir/json_io.hpp"
#include "sir/service.hpp"
#include "sir/simulation.hpp"

namespace {

using namespace sir;

ServiceConfig base_config(const std::string& store, bool mock) {
  ServiceConfig cfg;
  cfg.store_root = store;
  cfg.mock_providers = mock;
  cfg.live.apply_env();
  if (const char* seed = std::getenv("SIR_SEED"); seed && *seed) cfg.seed = std::stoull(seed);
  return cfg;
}

Course read_course(const std::string& path) {
  try {
    return json::parse(fsutil::read_file(path)).get<Course>();
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, path + ": " + e.what());
  }
}

int cmd_ingest(Service& svc, const std::string& deck_dir, bool overwrite, int attempts) {
  const auto deck = load_deck_dir(deck_dir);
  if (svc.store().has_deck(deck.deck.deck_id) && !overwrite) {
    std::cerr << "deck '" << deck.deck.deck_id << "' already stored; pass --overwrite to replace\n";
    return 1;
  }
  svc.store().put_deck(deck, overwrite);
  IngestReport report;
  std::chrono::seconds backoff{1};
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    report = ingest_deck(svc.store(), deck.deck.deck_id, *svc.providers().vision,
                         *svc.providers().embedding, IngestOptions{svc.config().max_inflight});
    std::cout << "attempt " << attempt << ": described " << report.pages_described << ", embedded "
              << report.pages_embedded << ", unchanged " << report.cache_hits << ", failed "
              << report.failures.size() << '\n';
    if (report.failures.empty() || attempt == attempts) break;
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
  for (const auto& f : report.failures) {
    std::cerr << "  " << f.page.deck_id << " p" << f.page.page_no << ": " << f.error << '\n';
  }
  return report.failures.empty() ? 0 : 2;
}

void print_precompute(const std::vector<RetrievalResult>& results) {
  std::cout << std::left << std::setw(16) << "question" << std::setw(6) << "rank" << std::setw(28)
            << "deck" << std::setw(6) << "page" << "score\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.hits.size(); ++i) {
      const auto& h = r.hits[i];
      std::cout << std::setw(16) << r.question_id << std::setw(6) << i + 1 << std::setw(28)
                << h.deck_id << std::setw(6) << h.page_no << std::fixed << std::setprecision(4)
                << h.score << '\n';
    }
  }
}

int cmd_serve(const std::string& config_path, const std::string& store_override, std::string listen,
              bool mock) {
  SirConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  apply_env(cfg);
  if (!store_override.empty()) cfg.service.store_root = store_override;
  if (mock) cfg.service.mock_providers = true;
  if (!listen.empty()) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw Error(Errc::InvalidArgument, "--listen must be host:port");
    cfg.host = listen.substr(0, colon);
    cfg.port = std::stoi(listen.substr(colon + 1));
  }
  validate_config(cfg);

  // Block the stop signals before any thread starts; the main thread waits for them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  Service svc(cfg.service);
  ApiServer server(svc, ApiOptions{cfg.cors_origins, cfg.admin_token});
  const int port = server.start(cfg.host, cfg.port);
  // Supervisors and tests read this line to find the port.
  std::cout << "listening on " << cfg.host << ":" << port << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SlideItRight: slide-grounded feedback service and study analysis"};
  app.require_subcommand(1);
  std::string store = "store";
  bool mock = false;
  app.add_option("--store", store, "Store root directory")->capture_default_str();
  app.add_flag("--mock-providers", mock, "Use the deterministic offline providers");

  auto* ingest = app.add_subcommand("ingest", "Store a deck directory and describe/embed its pages");
  std::string deck_dir;
  bool overwrite = false;
  std::size_t max_inflight = 4;
  int attempts = 3;
  ingest->add_option("deck_dir", deck_dir, "Directory holding deck.json and page images")->required();
  ingest->add_flag("--overwrite", overwrite, "Replace a stored deck of the same id");
  ingest->add_option("--max-inflight", max_inflight, "Pages processed concurrently")->check(CLI::PositiveNumber);
  ingest->add_option("--attempts", attempts, "Retries for failed pages, with backoff")->check(CLI::PositiveNumber);

  auto* course = app.add_subcommand("course", "Load the course definition (questions, tests, survey)");
  std::string course_path;
  course->add_option("course_json", course_path)->required()->check(CLI::ExistingFile);

  auto* precompute = app.add_subcommand("precompute", "Compute and cache slide retrieval for questions");
  std::string question_id;
  precompute->add_option("--question", question_id, "Single question id (default: all)");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string config_path, listen;
  serve->add_option("--config", config_path, "sir.toml-style config file")->check(CLI::ExistingFile);
  serve->add_option("--listen", listen, "host:port, overrides the config (port 0 picks one)");

  auto* exp = app.add_subcommand("export", "Write all sessions as ndjson");
  std::string out_path;
  exp->add_option("-o,--output", out_path, "Output file (default: stdout)");

  auto* analyze = app.add_subcommand("analyze", "Learning-gain and survey report from exported sessions");
  std::string sessions_path, report_format = "md", analyze_course;
  analyze->add_option("sessions", sessions_path, "sessions.ndjson")->required()->check(CLI::ExistingFile);
  analyze->add_option("--report", report_format)->check(CLI::IsMember({"md", "csv", "tex"}))->capture_default_str();
  analyze->add_option("--course", analyze_course, "course.json, for survey item labels")->check(CLI::ExistingFile);

  auto* simulate = app.add_subcommand("simulate", "Run seeded mock participants through the study");
  SimulationOptions sim;
  std::vector<std::string> boosts;
  simulate->add_option("-n,--participants", sim.participants)->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--boost", boosts, "CONDITION=items, e.g. COMBINED=3");
  simulate->add_option("--inattentive-rate", sim.inattentive_rate)->capture_default_str();
  simulate->add_option("--noise", sim.noise, "Post-test score jitter in items")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return cmd_serve(config_path, store, listen, mock);

    if (*analyze) {
      std::ifstream in(sessions_path);
      const auto sessions = read_sessions_ndjson(in);
      std::vector<SurveyItem> survey;
      if (!analyze_course.empty()) survey = read_course(analyze_course).survey;
      const auto report = analytics::analyze(sessions, survey);
      if (report_format == "md") std::cout << analytics::render_markdown(report);
      if (report_format == "csv") std::cout << analytics::render_csv(report);
      if (report_format == "tex") std::cout << analytics::render_tex(report);
      return 0;
    }

    // Export and course loading never call a provider.
    auto cfg = base_config(store, mock || *exp || *course);
    cfg.max_inflight = max_inflight;
    Service svc(cfg);

    if (*ingest) return cmd_ingest(svc, deck_dir, overwrite, attempts);
    if (*course) {
      svc.load_course(read_course(course_path));
      std::cout << "course loaded: " << svc.store().course()->questions.size() << " questions\n";
      return 0;
    }
    if (*precompute) {
      print_precompute(svc.precompute(question_id.empty() ? std::nullopt
                                                          : std::optional<std::string>(question_id)));
      return 0;
    }
    if (*exp) {
      const auto text = svc.export_sessions();
      if (out_path.empty()) {
        std::cout << text;
      } else {
        fsutil::write_file_atomic(out_path, text);
      }
      return 0;
    }
    if (*simulate) {
      for (const auto& b : boosts) {
        const auto eq = b.find('=');
        if (eq == std::string::npos) throw Error(Errc::InvalidArgument, "--boost expects CONDITION=items");
        sim.boost[parse_condition(b.substr(0, eq))] = std::stoi(b.substr(eq + 1));
      }
      const auto people = simulate_study(svc, sim);
      std::size_t attentive = 0;
      for (const auto& p : people) attentive += p.attentive;
      std::cout << "simulated " << people.size() << " participants, " << attentive << " attentive\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "sir: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sir: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
