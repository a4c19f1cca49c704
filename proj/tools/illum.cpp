// Command-line front end: corpus generation, splits, augmentation,
// evaluation, psychometric fitting and the experiment server.

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "illum/dataset.hpp"
#include "illum/error.hpp"
#include "illum/metrics.hpp"
#include "illum/png_io.hpp"
#include "illum/psychophysics.hpp"
#include "illum/run_config.hpp"
#include "illum/server.hpp"
#include "illum/session.hpp"
#include "illum/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace illum;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter:
    case ErrorKind::configuration:
    case ErrorKind::precondition: return 2;
    case ErrorKind::io: return 3;
    case ErrorKind::not_found: return 4;
    case ErrorKind::unfittable: return 5;
    default: return 1;
  }
}

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_file_atomic(out, j.dump(2) + "\n");
  }
}

std::vector<SessionData> load_sessions(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::io, dir.string() + " is not a directory");
  std::vector<fs::path> logs;
  for (const auto& f : fs::directory_iterator(dir))
    if (f.path().extension() == ".jsonl") logs.push_back(f.path());
  std::sort(logs.begin(), logs.end());
  std::vector<SessionData> out;
  for (const auto& path : logs) out.push_back(replay_session(path).data());
  if (out.empty()) throw Error(ErrorKind::precondition, "no session logs in " + dir.string());
  return out;
}

ExperimentServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brightness-illusion corpus, metrics and psychophysics toolkit"};
  app.set_version_flag("--version", std::string("illum ") + kVersion + " (manifest schema " +
                                        std::to_string(kManifestSchemaVersion) + ", session log schema " +
                                        std::to_string(kSessionLogSchemaVersion) + ")");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);

  // generate
  auto* gen = app.add_subcommand("generate", "Render the stimulus corpus and write its manifest");
  std::string gen_out;
  std::optional<std::uint64_t> gen_seed;
  std::vector<std::string> gen_families;
  bool gen_no_csv = false;
  gen->add_option("-o,--out", gen_out, "Output directory");
  gen->add_option("--seed", gen_seed, "Sweep seed");
  gen->add_option("--family", gen_families, "Restrict to these families");
  gen->add_flag("--no-csv", gen_no_csv, "Skip manifest.csv");

  // augment
  auto* aug = app.add_subcommand("augment", "Add augmented non-illusions up to a target count");
  std::string aug_manifest;
  std::optional<int> aug_target;
  std::optional<std::uint64_t> aug_seed;
  aug->add_option("-m,--manifest", aug_manifest, "Manifest file or directory")->required();
  aug->add_option("--target", aug_target, "Non-illusion count to reach");
  aug->add_option("--seed", aug_seed, "Augmentation seed");

  // split
  auto* split = app.add_subcommand("split", "Write a train/test split");
  std::string split_manifest, split_task = "localization", split_out;
  std::optional<std::uint64_t> split_seed;
  split->add_option("-m,--manifest", split_manifest, "Manifest file or directory")->required();
  split->add_option("--task", split_task, "identification | classification | localization");
  split->add_option("--seed", split_seed, "Split seed");
  split->add_option("-o,--out", split_out, "Output JSON (stdout when omitted)");

  // eval
  auto* ev = app.add_subcommand("eval", "Score predicted response maps against manifest masks");
  std::string ev_manifest, ev_pred, ev_out, ev_ids;
  std::optional<double> ev_threshold, ev_alpha, ev_beta;
  bool ev_serial = false;
  ev->add_option("-m,--manifest", ev_manifest, "Manifest file or directory")->required();
  ev->add_option("-p,--pred", ev_pred, "Directory of <id>.png predictions")
      ->required()
      ->check(CLI::ExistingDirectory);
  ev->add_option("-o,--out", ev_out, "Report prefix (writes .csv and .json)");
  ev->add_option("--ids", ev_ids, "File with one id per line")->check(CLI::ExistingFile);
  ev->add_option("--threshold", ev_threshold, "Binarization threshold");
  ev->add_option("--alpha", ev_alpha, "MSE weight");
  ev->add_option("--beta", ev_beta, "1 - SSIM weight");
  ev->add_flag("--serial", ev_serial, "Single-threaded scoring");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a psychometric function to a session log");
  std::string fit_session = "-", fit_family, fit_out;
  fit->add_option("-s,--session", fit_session, "Session log (JSON lines); - reads stdin");
  fit->add_option("--function", fit_family, "cumulative_gaussian | logistic");
  fit->add_option("-o,--out", fit_out, "Output JSON (stdout when omitted)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a simulated observer and write its session log");
  double sim_reduction = 0, sim_sigma = 10;
  int sim_trials = 1000;
  std::uint64_t sim_seed = 0;
  std::string sim_family = "sbc", sim_subject = "sim", sim_out;
  sim->add_option("--reduction", sim_reduction, "True illusory reduction")->required();
  sim->add_option("--sigma", sim_sigma, "Observer noise (gray levels)");
  sim->add_option("--trials", sim_trials, "Number of trials");
  sim->add_option("--seed", sim_seed, "Seed for schedule and noise");
  sim->add_option("--family", sim_family, "Comparator family");
  sim->add_option("--subject", sim_subject, "Subject id");
  sim->add_option("-o,--out", sim_out, "Session log to write (stdout when omitted)");

  // table
  auto* tab = app.add_subcommand("table", "Reduction table (subjects x families) from session logs");
  std::string tab_dir, tab_out, tab_family;
  tab->add_option("--sessions", tab_dir, "Directory of session logs")->required();
  tab->add_option("-o,--out", tab_out, "Prefix for .csv and .json");
  tab->add_option("--function", tab_family, "cumulative_gaussian | logistic");

  // serve
  auto* srv = app.add_subcommand("serve", "Run the experiment server");
  std::optional<std::string> srv_host, srv_log_dir, srv_static;
  std::optional<int> srv_port;
  bool srv_no_restore = false;
  srv->add_option("--host", srv_host, "Bind address");
  srv->add_option("--port", srv_port, "Port (0: any free port)");
  srv->add_option("--log-dir,--data", srv_log_dir, "Session log directory");
  srv->add_option("--static-dir", srv_static, "Directory served at /");
  srv->add_flag("--no-restore", srv_no_restore, "Do not replay existing logs");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);

    if (*gen) {
      if (gen_seed) cfg.sweep.seed = *gen_seed;
      if (!gen_out.empty()) cfg.out_dir = gen_out;
      if (!gen_families.empty()) {
        cfg.families.clear();
        for (const auto& f : gen_families) cfg.families.push_back(family_from_string(f));
      }
      BuildOptions options;
      options.families = cfg.families;
      options.write_csv = !gen_no_csv;
      const auto manifest = build_dataset(cfg.sweep, cfg.out_dir, options);
      json counts = json::object();
      for (const auto& e : manifest.entries) counts[std::string(to_string(e.family))] =
          counts.value(std::string(to_string(e.family)), 0) + 1;
      emit({{"manifest", manifest.file().string()},
            {"images", manifest.entries.size()},
            {"illusions", manifest.count(Label::illusion)},
            {"non_illusions", manifest.count(Label::non_illusion)},
            {"families", counts}},
           "");
    } else if (*aug) {
      auto manifest = load_manifest(aug_manifest);
      const auto report = augment_non_illusions(manifest, aug_target.value_or(cfg.augment_target),
                                                aug_seed.value_or(cfg.effective_seed()));
      if (report.warning) std::cerr << "warning: " << *report.warning << '\n';
      emit({{"added", report.added},
            {"duplicates_skipped", report.duplicates_skipped},
            {"non_illusions", manifest.count(Label::non_illusion)}},
           "");
    } else if (*split) {
      const auto manifest = load_manifest(split_manifest);
      const auto spec = make_splits(manifest, split_task_from_string(split_task),
                                    split_seed.value_or(cfg.effective_seed()));
      emit(to_json(spec), split_out);
      if (!split_out.empty())
        std::cout << "train " << spec.train_ids.size() << " test " << spec.test_ids.size() << '\n';
    } else if (*ev) {
      const auto manifest = load_manifest(ev_manifest);
      EvalOptions options;
      options.threshold = ev_threshold.value_or(cfg.threshold);
      options.loss = cfg.loss;
      if (ev_alpha) options.loss.alpha = *ev_alpha;
      if (ev_beta) options.loss.beta = *ev_beta;
      options.parallel = !ev_serial;
      if (!ev_ids.empty()) {
        std::ifstream in(ev_ids);
        std::vector<std::string> ids;
        for (std::string line; std::getline(in, line);)
          if (!line.empty()) ids.push_back(line);
        options.ids = std::move(ids);
      }
      const auto report = evaluate_directory(ev_pred, manifest, options);
      if (!ev_out.empty()) write_report(report, ev_out);
      auto j = to_json(report);
      j.erase("rows");
      emit(j, "");
    } else if (*fit) {
      const auto session = fit_session == "-" ? replay_session(std::cin) : replay_session(fit_session);
      const auto family = fit_family.empty() ? session.config().fit_family
                                             : psychometric_family_from_string(fit_family);
      const auto points = aggregate(session.results());
      const auto f = fit_psychometric(points, family);
      json out{{"session_id", session.id()},
               {"subject_id", session.config().subject_id},
               {"family", std::string(to_string(session.config().family))},
               {"fit", to_json(f)}};
      json pts = json::array();
      for (const auto& p : points) pts.push_back(to_json(p));
      out["points"] = pts;
      out["reduction"] = to_json(illusory_reduction(f, session.config().comparator_intensity));
      emit(out, fit_out);
    } else if (*sim) {
      SessionConfig sc;
      sc.subject_id = sim_subject;
      sc.family = family_from_string(sim_family);
      sc.n_trials = sim_trials;
      sc.seed = sim_seed;
      Session session(sim_subject + "-" + sim_family, sc);
      const auto results = simulate_observer(sim_reduction, sim_sigma, session.schedule(), sim_seed);
      if (sim_out.empty()) {
        std::cout << session_header(session).dump() << '\n';
        for (const auto& r : results)
          std::cout << trial_record(session.schedule()[r.trial_id], session.record(r)).dump() << '\n';
      } else {
        if (fs::exists(sim_out)) throw Error(ErrorKind::conflict, sim_out + " already exists");
        SessionLog log(sim_out, session);
        for (const auto& r : results) log.append(session.schedule()[r.trial_id], session.record(r));
        emit({{"session_log", sim_out}, {"n_trials", session.results().size()}}, "");
      }
    } else if (*tab) {
      const auto table = reduction_table(load_sessions(tab_dir),
                                         tab_family.empty() ? PsychometricFamily::cumulative_gaussian
                                                            : psychometric_family_from_string(tab_family));
      std::cout << to_csv(table);
      if (!tab_out.empty()) {
        write_file_atomic(tab_out + ".csv", to_csv(table));
        write_file_atomic(tab_out + ".json", to_json(table).dump(2) + "\n");
      }
    } else if (*srv) {
      ServerOptions options = cfg.server;
      if (srv_host) options.host = *srv_host;
      if (srv_port) options.port = *srv_port;
      if (srv_log_dir) options.log_dir = *srv_log_dir;
      if (srv_static) options.static_dir = *srv_static;
      if (srv_no_restore) options.restore = false;
      ExperimentServer server(options);
      const int port = server.bind();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << options.host << ':' << port << std::endl;
      server.run();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
