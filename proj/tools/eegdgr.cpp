// eegdgr: offline training and online serving of the EEG classifier.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include "eegdgr/config.hpp"
#include "eegdgr/csv_recording.hpp"
#include "eegdgr/dataset.hpp"
#include "eegdgr/edf.hpp"
#include "eegdgr/evaluation.hpp"
#include "eegdgr/model_io.hpp"
#include "eegdgr/synthetic.hpp"
#include "eegdgr/transport.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

namespace fs = std::filesystem;
using namespace eegdgr;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string data;
  std::string kind = "csv";
  int window = 0;
  double overlap = 0.5;
  std::uint64_t seed = 0;
  std::string model = "model.b2o";
  int epochs = 100;
  double lr = 0.0005;
  int depth = 10;
  int hidden = 120;
  int patience = 20;
  std::string host = "127.0.0.1";
  int port = 5555;
  std::string catalog;
  std::string format = "json";
  std::string speed = "max";
  std::string out;
  std::string history;
  std::string split = "test";
  std::string audit;
  std::string dispatch_log;
  int max_sessions = 0;
  int synthetic_class = 0;
  int samples = 1024;
  int blocks = 100;
  int block_samples = 16;
  int channels = synthetic::SyntheticSpec{}.channels;
  std::uint64_t mixing_seed = synthetic::SyntheticSpec{}.seed;
};

void add_data_options(CLI::App* sub, Options& o, bool required) {
  auto* data = sub->add_option("--data", o.data, "dataset directory or file")->check(CLI::ExistingPath);
  if (required) data->required();
  sub->add_option("--kind", o.kind, "dataset kind")->check(CLI::IsMember({"edf-dir", "csv"}));
  sub->add_option("--window", o.window, "window length L (default 64 for edf-dir, 16 for csv)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--overlap", o.overlap, "window overlap fraction")->check(CLI::Range(0.0, 0.99));
  sub->add_option("--seed", o.seed, "split and initialization seed");
}

void add_model_options(CLI::App* sub, Options& o) {
  sub->add_option("--model", o.model, "model container path");
}

void add_train_options(CLI::App* sub, Options& o) {
  sub->add_option("--epochs", o.epochs, "maximum training epochs")->check(CLI::NonNegativeNumber);
  sub->add_option("--lr", o.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  sub->add_option("--depth", o.depth, "convolution depth D")->check(CLI::PositiveNumber);
  sub->add_option("--hidden", o.hidden, "hidden units D'")->check(CLI::PositiveNumber);
  sub->add_option("--patience", o.patience, "early-stopping patience in epochs; 0 disables")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--history", o.history, "training history JSON (default <model>.history.json)");
}

void add_net_options(CLI::App* sub, Options& o) {
  sub->add_option("--host", o.host, "server address");
  sub->add_option("--port", o.port, "server TCP port")->check(CLI::Range(0, 65535));
}

// Fills options not given on the command line from the key=value file.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  if (!fs::exists(path)) throw UsageError("config file not found: " + path);
  for (const auto& [key, value] : read_key_values(path)) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || key == "config") throw UsageError("unknown config key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    opt->add_result(value);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

DatasetSpec dataset_spec(const Options& o) {
  DatasetSpec s;
  s.kind = parse_dataset_kind(o.kind);
  s.path = o.data;
  s.window = o.window;
  s.overlap = o.overlap;
  return s;
}

SplitSpec split_spec(const Options& o) {
  SplitSpec s;
  s.seed = o.seed;
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_train(const Options& o) {
  const Dataset ds = load_dataset(dataset_spec(o));
  const SplitResult split = split_and_batch(ds.epochs, split_spec(o));
  net::TrainConfig cfg;
  cfg.learning_rate = o.lr;
  cfg.epochs = o.epochs;
  cfg.patience = o.patience;
  cfg.conv_depth = o.depth;
  cfg.hidden = o.hidden;
  cfg.seed = o.seed;
  std::cerr << "training on " << ds.epochs.size() << " epochs (" << ds.num_channels << " channels, window "
            << ds.window << ", " << ds.num_classes << " classes) from " << ds.files.size() << " file(s)\n";
  const net::TrainResult r = net::train_model(split.train_batches, split.test, cfg);
  net::save_model(r.model, o.model);
  const std::string history = o.history.empty() ? o.model + ".history.json" : o.history;
  write_text(history, history_json(r) + "\n");

  const Evaluation e = evaluate(r.model, split.test);
  nlohmann::json summary{{"model", o.model},
                         {"history", history},
                         {"epochs_run", r.history.size()},
                         {"best_epoch", r.best_epoch},
                         {"test", nlohmann::json::parse(evaluation_json(e))}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_eval(const Options& o) {
  const net::ClassifierModel model = net::load_model(o.model);
  DatasetSpec spec = dataset_spec(o);
  if (spec.window == 0) spec.window = model.window;
  if (spec.window != model.window) {
    throw std::runtime_error("dimension mismatch: window " + std::to_string(spec.window) + " but the model expects " +
                             std::to_string(model.window));
  }
  const Dataset ds = load_dataset(spec);
  if (ds.num_channels != model.num_channels()) {
    throw std::runtime_error("dimension mismatch: data has " + std::to_string(ds.num_channels) +
                             " channels but the model expects " + std::to_string(model.num_channels()));
  }
  const std::vector<Epoch> epochs = o.split == "all" ? ds.epochs : split_and_batch(ds.epochs, split_spec(o)).test;
  const Evaluation e = evaluate(model, epochs);
  const metrics::LatencyReport latency = latency_report(model, ds.sampling_rate);

  if (o.format == "csv") {
    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    std::vector<fs::path> written{dir / "confusion.csv", dir / "report.csv"};
    write_text(written[0], metrics::confusion_csv(e.confusion));
    write_text(written[1], report_csv(e));
    for (std::size_t k = 0; k < e.roc.per_class.size(); ++k) {
      written.push_back(dir / ("roc_class" + std::to_string(k + 1) + ".csv"));
      write_text(written.back(), metrics::roc_csv(e.roc.per_class[k]));
    }
    for (const auto& p : written) std::cout << p.string() << '\n';
    std::cerr << "accuracy " << e.report.accuracy << " on " << epochs.size() << " epochs\n";
    return 0;
  }
  nlohmann::json j = nlohmann::json::parse(evaluation_json(e));
  j["latency"] = nlohmann::json::parse(latency_json(latency));
  if (o.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_text(o.out, j.dump(2) + "\n");
  }
  return 0;
}

std::unique_ptr<std::ofstream> open_log(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path, std::ios::app);
  if (!*f) throw std::runtime_error("cannot open " + path);
  return f;
}

int cmd_serve(const Options& o) {
  const net::ClassifierModel model = net::load_model(o.model);
  const stream::Catalog catalog = o.catalog.empty() ? stream::default_catalog() : stream::load_catalog(o.catalog);
  auto audit_file = open_log(o.audit);
  auto dispatch_file = open_log(o.dispatch_log);
  stream::AuditLog audit(audit_file ? static_cast<std::ostream*>(audit_file.get()) : &std::cout);
  stream::DispatchLog dispatch(dispatch_file.get());

  stream::ServerConfig cfg;
  cfg.host = o.host;
  cfg.port = static_cast<std::uint16_t>(o.port);
  cfg.max_sessions = o.max_sessions;

  // Signals are taken synchronously by a watcher thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  stream::Server server(model, cfg, &audit, &catalog, &dispatch);
  server.bind();
  std::cerr << "listening on " << o.host << ":" << server.port() << std::endl;
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    const timespec tick{0, 200'000'000};
    while (!done) {
      if (sigtimedwait(&signals, nullptr, &tick) > 0) {
        server.stop();
        return;
      }
    }
  });
  server.run();
  done = true;
  watcher.join();
  std::cerr << "served " << server.sessions_finished() << " session(s), " << audit.events().size() << " decision(s)\n";
  return 0;
}

Recording load_single_recording(const Options& o) {
  if (o.synthetic_class > 0) {
    synthetic::SyntheticSpec spec;
    spec.seed = o.mixing_seed;
    if (o.synthetic_class > spec.classes) throw UsageError("--synthetic-class must be in 1.." + std::to_string(spec.classes));
    return synthetic::synthetic_recording(spec, {o.synthetic_class}, o.samples, o.seed);
  }
  if (o.data.empty()) throw UsageError("simulate needs --data or --synthetic-class");
  if (!fs::is_regular_file(o.data)) throw UsageError("--data must name a single recording for simulate");
  std::string ext = fs::path(o.data).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".edf" ? edf::read_edf_file(o.data) : load_local_csv(o.data);
}

int cmd_simulate(const Options& o) {
  const Recording rec = load_single_recording(o);
  stream::SimulateOptions opts;
  opts.host = o.host;
  opts.port = static_cast<std::uint16_t>(o.port);
  opts.speed = o.speed == "realtime" ? stream::ReplaySpeed::realtime : stream::ReplaySpeed::max;
  const stream::SimulateResult r = stream::simulate(rec, opts);

  auto out_file = open_log(o.out);
  std::ostream& out = out_file ? *out_file : std::cout;
  for (const auto& d : r.decisions) {
    out << nlohmann::json{{"event", "decision"},
                          {"class", d.class_id},
                          {"votes", d.votes},
                          {"confidence", d.confidence},
                          {"timestamp_us", d.timestamp_us}}
               .dump()
        << '\n';
  }
  std::cerr << "sent " << r.samples_sent << " samples, received " << r.decisions.size() << " decision(s)\n";
  if (r.error) {
    std::cerr << "server error " << static_cast<int>(r.error->code) << ": " << r.error->message << '\n';
    return kExitRuntime;
  }
  return 0;
}

int cmd_synth(const Options& o) {
  if (o.out.empty()) throw UsageError("synth needs --out DIR");
  synthetic::SyntheticSpec spec;
  spec.seed = o.mixing_seed;
  spec.channels = o.channels;
  std::vector<int> sequence;
  for (int b = 0; b < o.blocks; ++b) {
    for (int k = 1; k <= spec.classes; ++k) sequence.push_back(k);
  }
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / "synthetic.csv";
  write_local_csv(path, synthetic::synthetic_recording(spec, sequence, o.block_samples, o.seed));
  std::cout << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"EEG motor-imagery classifier: CSP and a learnable channel graph feeding a CNN"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  auto* train = app.add_subcommand("train", "train a model and write it with its history");
  auto* eval = app.add_subcommand("eval", "evaluate a model: confusion matrix, P/R/F1, AUC, latency");
  auto* serve = app.add_subcommand("serve", "serve online classification over TCP");
  auto* simulate = app.add_subcommand("simulate", "replay a recording against a server");
  auto* synth = app.add_subcommand("synth", "write a synthetic labelled CSV recording");

  for (auto* sub : {train, eval, serve, simulate, synth}) {
    sub->add_option("--config", o.config, "key=value file; command-line flags win");
  }
  add_data_options(train, o, true);
  add_model_options(train, o);
  add_train_options(train, o);

  add_data_options(eval, o, true);
  add_model_options(eval, o);
  eval->add_option("--format", o.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  eval->add_option("--out", o.out, "output file (json) or directory (csv)");
  eval->add_option("--split", o.split, "evaluate the test split or all epochs")->check(CLI::IsMember({"test", "all"}));

  add_model_options(serve, o);
  add_net_options(serve, o);
  serve->add_option("--catalog", o.catalog, "class-to-object catalog JSON")->check(CLI::ExistingFile);
  serve->add_option("--audit", o.audit, "append decision events as NDJSON (default stdout)");
  serve->add_option("--dispatch-log", o.dispatch_log, "append dispatch records as NDJSON");
  serve->add_option("--max-sessions", o.max_sessions, "exit after this many sessions; 0 runs until signalled")
      ->check(CLI::NonNegativeNumber);

  add_net_options(simulate, o);
  simulate->add_option("--data", o.data, "recording to replay (.csv or .edf)")->check(CLI::ExistingFile);
  simulate->add_option("--speed", o.speed, "replay pacing")->check(CLI::IsMember({"realtime", "max"}));
  simulate->add_option("--out", o.out, "append decisions as NDJSON (default stdout)");
  simulate->add_option("--synthetic-class", o.synthetic_class, "replay a synthetic stream of this class instead")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--samples", o.samples, "length of the synthetic stream")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", o.seed, "synthetic stream seed");
  simulate->add_option("--mixing-seed", o.mixing_seed, "synthetic mixing seed");

  synth->add_option("--out", o.out, "output directory")->required();
  synth->add_option("--blocks", o.blocks, "blocks per class")->check(CLI::PositiveNumber);
  synth->add_option("--block-samples", o.block_samples, "samples per block")->check(CLI::PositiveNumber);
  synth->add_option("--channels", o.channels, "channel count")->check(CLI::Range(2, 1024));
  synth->add_option("--seed", o.seed, "stream seed");
  synth->add_option("--mixing-seed", o.mixing_seed, "mixing seed");

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    apply_config(sub, o.config);
    if (sub == train) return cmd_train(o);
    if (sub == eval) return cmd_eval(o);
    if (sub == serve) return cmd_serve(o);
    if (sub == simulate) return cmd_simulate(o);
    return cmd_synth(o);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DatasetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
